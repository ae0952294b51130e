//! Complex Clifford representations with `e_i e_j + e_j e_i = -2 δ_ij`.
//!
//! Generators come from Jordan-Wigner strings of Pauli matrices. For even `p`
//! the chirality `c(i^k e_1 ⋯ e_p)` is the diagonal grading `γ`; for odd `p`
//! the last generator is fixed so that `c(i^{k+1} e_1 ⋯ e_p) = Id`.

use crate::error::{Error, Result};
use crate::linalg::{eye, kron, max_abs, pauli, CMat, C64, I};

#[derive(Clone, Debug)]
pub struct CliffordRep {
    pub p: usize,
    pub dim: usize,
    pub gens: Vec<CMat>,
    /// `Some(γ)` for even `p`.
    pub grading: Option<CMat>,
}

fn jw_string(k: usize, m: usize, last: usize) -> CMat {
    let mut out = CMat::identity(1, 1);
    for slot in 0..k {
        let f = match slot.cmp(&m) {
            std::cmp::Ordering::Less => pauli(3),
            std::cmp::Ordering::Equal => pauli(last),
            std::cmp::Ordering::Greater => eye(2),
        };
        out = kron(&out, &f);
    }
    out
}

fn ipow(n: usize) -> C64 {
    [C64::new(1.0, 0.0), I, C64::new(-1.0, 0.0), -I][n % 4]
}

pub fn build_clifford(p: usize) -> Result<CliffordRep> {
    if p == 0 {
        return Err(Error::Precondition("Clifford representation needs p >= 1".into()));
    }
    let k = p / 2;
    let dim = 1usize << k;
    let mut herm = Vec::with_capacity(2 * k);
    for m in 0..k {
        herm.push(jw_string(k, m, 1));
        herm.push(jw_string(k, m, 2));
    }
    if p % 2 == 0 {
        let gens: Vec<CMat> = herm.iter().map(|g| g * I).collect();
        let prod = gens.iter().fold(eye(dim), |acc, g| acc * g);
        let gamma = prod * ipow(k);
        Ok(CliffordRep { p, dim, gens, grading: Some(gamma) })
    } else {
        let mut gens: Vec<CMat> = herm.iter().map(|g| g * (-I)).collect();
        let chi = herm.iter().fold(eye(dim), |acc, g| acc * g) * ipow(3 * k);
        gens.push(chi * (-I));
        Ok(CliffordRep { p, dim, gens, grading: None })
    }
}

impl CliffordRep {
    /// `c(mu) = Σ mu_j c(e_j)`
    pub fn c_of_mu(&self, mu: &[f64]) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for (g, &x) in self.gens.iter().zip(mu) {
            out += g * C64::new(x, 0.0);
        }
        out
    }

    /// Basis indices of the `+1` and `-1` eigenspaces of `γ`.
    pub fn chiral_indices(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let g = self.grading.as_ref()?;
        let plus = (0..self.dim).filter(|&i| g[(i, i)].re > 0.0).collect();
        let minus = (0..self.dim).filter(|&i| g[(i, i)].re < 0.0).collect();
        Some((plus, minus))
    }

    /// The block `c⁺(mu): Δ⁺ → Δ⁻` of `c(mu)`, even `p` only.
    pub fn cplus_of_mu(&self, mu: &[f64]) -> Result<CMat> {
        let (plus, minus) = self
            .chiral_indices()
            .ok_or_else(|| Error::Precondition("c⁺ is only defined for even p".into()))?;
        let c = self.c_of_mu(mu);
        Ok(CMat::from_fn(minus.len(), plus.len(), |i, j| c[(minus[i], plus[j])]))
    }

    /// Largest deviation from the defining relations and normalisation.
    pub fn relation_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for (i, a) in self.gens.iter().enumerate() {
            for (j, b) in self.gens.iter().enumerate() {
                let target = if i == j { eye(n) * C64::new(-2.0, 0.0) } else { CMat::zeros(n, n) };
                worst = worst.max(max_abs(&(a * b + b * a - target)));
            }
            worst = worst.max(max_abs(&(a.adjoint() * a - eye(n))));
        }
        let k = self.p / 2;
        let prod = self.gens.iter().fold(eye(n), |acc, g| acc * g);
        match &self.grading {
            Some(g) => {
                worst = worst.max(max_abs(&(prod * ipow(k) - g)));
                worst = worst.max(max_abs(&(g * g - eye(n))));
                worst = worst.max(max_abs(&(g - g.adjoint())));
                for a in &self.gens {
                    worst = worst.max(max_abs(&(g * a + a * g)));
                }
            }
            None => worst = worst.max(max_abs(&(prod * ipow(k + 1) - eye(n)))),
        }
        worst
    }
}
