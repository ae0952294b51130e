//! Matrix-valued polynomials in `mu`, kept exact under sums, products and
//! differentiation.

use std::collections::BTreeMap;

use crate::linalg::{CMat, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct MatPoly {
    pub p: usize,
    pub n: usize,
    /// exponent vector -> coefficient
    pub terms: BTreeMap<Vec<u32>, CMat>,
}

impl MatPoly {
    pub fn zero(p: usize, n: usize) -> Self {
        MatPoly { p, n, terms: BTreeMap::new() }
    }

    pub fn constant(p: usize, m: CMat) -> Self {
        let n = m.nrows();
        let mut out = MatPoly::zero(p, n);
        out.insert(vec![0; p], m);
        out
    }

    /// `mu_j * m`
    pub fn linear(p: usize, j: usize, m: CMat) -> Self {
        let n = m.nrows();
        let mut e = vec![0; p];
        e[j] = 1;
        let mut out = MatPoly::zero(p, n);
        out.insert(e, m);
        out
    }

    pub fn insert(&mut self, e: Vec<u32>, m: CMat) {
        if m.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(old) => {
                *old += m;
                if old.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, m);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn eval(&self, mu: &[f64]) -> CMat {
        let mut out = CMat::zeros(self.n, self.n);
        for (e, m) in &self.terms {
            let mut w = 1.0;
            for (x, &k) in mu.iter().zip(e) {
                w *= x.powi(k as i32);
            }
            out += m * C64::new(w, 0.0);
        }
        out
    }

    pub fn add(&self, other: &MatPoly) -> MatPoly {
        let mut out = self.clone();
        for (e, m) in &other.terms {
            out.insert(e.clone(), m.clone());
        }
        out
    }

    pub fn scale(&self, c: C64) -> MatPoly {
        let mut out = MatPoly::zero(self.p, self.n);
        for (e, m) in &self.terms {
            out.insert(e.clone(), m * c);
        }
        out
    }

    pub fn mul(&self, other: &MatPoly) -> MatPoly {
        let mut out = MatPoly::zero(self.p, self.n);
        for (ea, a) in &self.terms {
            for (eb, b) in &other.terms {
                let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.insert(e, a * b);
            }
        }
        out
    }

    pub fn partial(&self, j: usize) -> MatPoly {
        let mut out = MatPoly::zero(self.p, self.n);
        for (e, m) in &self.terms {
            if e[j] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[j] -= 1;
            out.insert(e2, m * C64::new(e[j] as f64, 0.0));
        }
        out
    }

    /// The homogeneous part of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> MatPoly {
        let mut out = MatPoly::zero(self.p, self.n);
        for (e, m) in &self.terms {
            if e.iter().sum::<u32>() == d {
                out.insert(e.clone(), m.clone());
            }
        }
        out
    }

    pub fn trace(&self) -> MatPoly {
        let mut out = MatPoly::zero(self.p, 1);
        for (e, m) in &self.terms {
            out.insert(e.clone(), CMat::from_element(1, 1, m.trace()));
        }
        out
    }

    /// Entrywise `f(mu) ⊗ m` for a scalar polynomial, or `poly ⊗ m` in general.
    pub fn kron_right(&self, m: &CMat) -> MatPoly {
        let mut out = MatPoly::zero(self.p, self.n * m.nrows());
        for (e, a) in &self.terms {
            out.insert(e.clone(), a.kronecker(m));
        }
        out
    }

    pub fn kron_left(&self, m: &CMat) -> MatPoly {
        let mut out = MatPoly::zero(self.p, self.n * m.nrows());
        for (e, a) in &self.terms {
            out.insert(e.clone(), m.kronecker(a));
        }
        out
    }

    pub fn mul_left(&self, m: &CMat) -> MatPoly {
        let mut out = MatPoly::zero(self.p, self.n);
        for (e, a) in &self.terms {
            out.insert(e.clone(), m * a);
        }
        out
    }

    pub fn mul_right(&self, m: &CMat) -> MatPoly {
        let mut out = MatPoly::zero(self.p, self.n);
        for (e, a) in &self.terms {
            out.insert(e.clone(), a * m);
        }
        out
    }
}
