//! Symbol-valued differential forms on `R^p` and the regularized traces on them.
//!
//! Multi-indices are stored as bit masks (bit `j` ↔ `dmu_{j+1}`), which keeps
//! them strictly increasing by construction.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::regint::{reg_integral, sphere_integral, QuadConfig};
use crate::symbol::ParamSymbol;

#[derive(Clone)]
pub struct OperatorForm {
    p: usize,
    n: usize,
    coeffs: BTreeMap<u32, ParamSymbol>,
}

/// Sign of moving the one-forms in `b` past those in `a` into increasing order.
fn merge_sign(a: u32, b: u32) -> f64 {
    let mut inversions = 0;
    let mut bits = b;
    while bits != 0 {
        let j = bits.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        bits &= bits - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn mask_of(idx: &[usize]) -> Result<u32> {
    let mut m = 0u32;
    for w in idx.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Precondition(format!("multi-index {idx:?} is not strictly increasing")));
        }
    }
    for &j in idx {
        m |= 1 << j;
    }
    Ok(m)
}

impl OperatorForm {
    pub fn zero(p: usize, n: usize) -> Self {
        OperatorForm { p, n, coeffs: BTreeMap::new() }
    }

    /// The zero-form `a`.
    pub fn scalar(a: &ParamSymbol) -> Self {
        let mut f = OperatorForm::zero(a.p(), a.n());
        f.insert(0, a.clone());
        f
    }

    /// `Σ coeff_I dmu_I` from (multi-index, coefficient) pairs; indices are 0-based.
    pub fn from_coeffs(p: usize, n: usize, items: Vec<(Vec<usize>, ParamSymbol)>) -> Result<Self> {
        let mut f = OperatorForm::zero(p, n);
        for (idx, a) in items {
            if idx.iter().any(|&j| j >= p) {
                return Err(Error::Dimension(format!("index in {idx:?} exceeds p = {p}")));
            }
            if a.p() != p || a.n() != n {
                return Err(Error::Dimension("coefficient has the wrong shape".into()));
            }
            f.insert(mask_of(&idx)?, a);
        }
        Ok(f)
    }

    fn insert(&mut self, mask: u32, a: ParamSymbol) {
        if a.is_zero() {
            return;
        }
        let merged = match self.coeffs.remove(&mask) {
            Some(old) => old.add(&a),
            None => a,
        };
        if !merged.is_zero() {
            self.coeffs.insert(mask, merged);
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficient(&self, idx: &[usize]) -> Option<&ParamSymbol> {
        self.coeffs.get(&mask_of(idx).ok()?)
    }

    pub fn components(&self) -> impl Iterator<Item = (Vec<usize>, &ParamSymbol)> {
        self.coeffs
            .iter()
            .map(|(m, a)| ((0..32).filter(|j| m & (1 << j) != 0).collect(), a))
    }

    /// Degree of a homogeneous form; `None` for mixed degree or the zero form.
    pub fn degree(&self) -> Option<usize> {
        let mut d = self.coeffs.keys().map(|m| m.count_ones() as usize);
        let first = d.next()?;
        d.all(|x| x == first).then_some(first)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &OperatorForm) -> OperatorForm {
        let mut out = self.clone();
        for (m, a) in &o.coeffs {
            out.insert(*m, a.clone());
        }
        out
    }

    pub fn scale(&self, z: C64) -> OperatorForm {
        let mut out = OperatorForm::zero(self.p, self.n);
        for (m, a) in &self.coeffs {
            out.insert(*m, a.scale(z));
        }
        out
    }

    pub fn wedge(&self, o: &OperatorForm) -> OperatorForm {
        wedge(self, o)
    }

    pub fn d(&self) -> OperatorForm {
        ext_d(self)
    }

    /// `self ∧ self ∧ ⋯` (`k` factors, `k ≥ 1`).
    pub fn power(&self, k: usize) -> OperatorForm {
        let mut out = self.clone();
        for _ in 1..k {
            out = wedge(&out, self);
        }
        out
    }
}

pub fn wedge(a: &OperatorForm, b: &OperatorForm) -> OperatorForm {
    let mut out = OperatorForm::zero(a.p, a.n);
    for (ma, x) in &a.coeffs {
        for (mb, y) in &b.coeffs {
            if ma & mb != 0 {
                continue;
            }
            let s = merge_sign(*ma, *mb);
            let prod = x.mul(y);
            out.insert(ma | mb, if s > 0.0 { prod } else { prod.neg() });
        }
    }
    out
}

/// `d(a dmu_I) = Σ_j ∂_j a dmu_j ∧ dmu_I`
pub fn ext_d(w: &OperatorForm) -> OperatorForm {
    let mut out = OperatorForm::zero(w.p, w.n);
    for (m, a) in &w.coeffs {
        for j in 0..w.p {
            if m & (1 << j) != 0 {
                continue;
            }
            let da = a.partial(j);
            if da.is_zero() {
                continue;
            }
            let s = merge_sign(1 << j, *m);
            out.insert(m | (1 << j), if s > 0.0 { da } else { da.neg() });
        }
    }
    out
}

/// One-form `dA = Σ ∂_j A dmu_j`.
pub fn differential(a: &ParamSymbol) -> OperatorForm {
    ext_d(&OperatorForm::scalar(a))
}

/// Regularized trace of the top-degree part; lower-degree forms give zero.
pub fn tr_bar(w: &OperatorForm, cfg: &QuadConfig) -> Result<C64> {
    let top = (1u32 << w.p) - 1;
    match w.coeffs.get(&top) {
        Some(a) => reg_integral(&a.trace(), cfg),
        None => Ok(C64::new(0.0, 0.0)),
    }
}

/// Boundary functional on `(p-1)`-forms from the homogeneous component of
/// degree `1-p`: `Σ_j (-1)^j ∮ tr η_j^{[1-p]}(ω) ω_j dω`, where `η_j` is the
/// coefficient of the form omitting `dmu_j`.
pub fn tr_tilde(eta: &OperatorForm, cfg: &QuadConfig) -> Result<C64> {
    let p = eta.p;
    let top = (1u32 << p) - 1;
    let target = 1.0 - p as f64;
    let mut parts = vec![];
    for j in 0..p {
        let Some(a) = eta.coeffs.get(&(top & !(1 << j))) else { continue };
        let t = a.trace();
        if !(t.remainder_order() < target) {
            return Err(Error::InsufficientExpansion(format!(
                "coefficient remainder order {} is not below {}",
                t.remainder_order(),
                target
            )));
        }
        if let Some(term) = t.terms().iter().find(|h| (h.degree - target).abs() < 1e-9 && h.log_power == 0) {
            parts.push((j, term.clone()));
        }
    }
    if parts.is_empty() {
        return Ok(C64::new(0.0, 0.0));
    }
    let f = |w: &[f64]| {
        parts.iter().fold(C64::new(0.0, 0.0), |s, (j, h)| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            s + h.angular(w)[(0, 0)] * (sign * w[*j])
        })
    };
    sphere_integral(p, cfg, &f)
}

/// `T̃R(η) = TR̄(dη)`, the defining route; used as a cross-check.
pub fn tr_tilde_by_definition(eta: &OperatorForm, cfg: &QuadConfig) -> Result<C64> {
    tr_bar(&ext_d(eta), cfg)
}

/// `a_0 da_1 ⋯ da_k`
pub fn word_form(words: &[ParamSymbol]) -> OperatorForm {
    let mut f = OperatorForm::scalar(&words[0]);
    for a in &words[1..] {
        f = wedge(&f, &differential(a));
    }
    f
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// `φ_k(a_0, …, a_k) = TR̄(a_0 da_1 ⋯ da_k) / k!`
pub fn phi(words: &[ParamSymbol], cfg: &QuadConfig) -> Result<C64> {
    let k = words.len() - 1;
    if k != words[0].p() || words[1..].iter().any(|a| a.is_identity()) {
        return Ok(C64::new(0.0, 0.0));
    }
    Ok(tr_bar(&word_form(words), cfg)? / factorial(k))
}

/// `ψ_k(b_0, …, b_k) = T̃R(b_0 db_1 ⋯ db_k) / k!`
pub fn psi(words: &[ParamSymbol], cfg: &QuadConfig) -> Result<C64> {
    let k = words.len() - 1;
    if k + 1 != words[0].p() || words[1..].iter().any(|a| a.is_identity()) {
        return Ok(C64::new(0.0, 0.0));
    }
    Ok(tr_tilde(&word_form(words), cfg)? / factorial(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CMat, I};
    use crate::poly::MatPoly;
    use crate::symbol::{sym_inv, ParamSymbol};
    use std::f64::consts::PI;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn merge_signs() {
        // dmu_2 ∧ dmu_1 = -dmu_1 ∧ dmu_2
        assert_eq!(merge_sign(0b10, 0b01), -1.0);
        assert_eq!(merge_sign(0b01, 0b10), 1.0);
        assert_eq!(merge_sign(0b101, 0b010), -1.0);
    }

    #[test]
    fn d_squared_vanishes_on_polynomials() {
        let mut q = MatPoly::zero(3, 1);
        q.insert(vec![2, 1, 0], CMat::from_element(1, 1, C64::new(1.0, 2.0)));
        q.insert(vec![0, 3, 1], CMat::from_element(1, 1, C64::new(-0.5, 0.0)));
        let a = ParamSymbol::polynomial(q);
        let w = OperatorForm::from_coeffs(3, 1, vec![(vec![0], a.clone()), (vec![2], a.mul(&a))]).unwrap();
        assert!(ext_d(&ext_d(&w)).is_zero());
    }

    #[test]
    fn unordered_multi_index_is_rejected() {
        let a = ParamSymbol::scalar(2, one());
        assert!(OperatorForm::from_coeffs(2, 1, vec![(vec![1, 0], a)]).is_err());
    }

    #[test]
    fn resolvent_one_form() {
        // TR̄((λ - iμ)^{-1} (-i) dμ) = -iπ for λ > 0
        let cfg = QuadConfig::default();
        let lam = ParamSymbol::scalar(1, C64::new(0.8, 0.0));
        let a = lam.add(&ParamSymbol::coordinate(1, 0).scale(-I));
        let ai = sym_inv(&a, None).unwrap();
        let w = wedge(&OperatorForm::scalar(&ai), &differential(&a));
        let v = tr_bar(&w, &cfg).unwrap();
        assert!((v + I * PI).norm() < 1e-8, "{v}");
        // lower degree forms are ignored
        assert_eq!(tr_bar(&OperatorForm::scalar(&ai), &cfg).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn stokes_defect_on_the_line() {
        let cfg = QuadConfig::default();
        let f = ParamSymbol::coordinate(1, 0).mul(&ParamSymbol::radial_power(1, 1.0, -0.5, 8).unwrap());
        let df = differential(&f);
        assert!((tr_bar(&df, &cfg).unwrap() - 2.0).norm() < 1e-8);
        assert!((tr_tilde(&OperatorForm::scalar(&f), &cfg).unwrap() - 2.0).norm() < 1e-12);
        assert_eq!(phi(&[f.clone(), ParamSymbol::identity(1, 1)], &cfg).unwrap(), C64::new(0.0, 0.0));
        assert!((phi(&[ParamSymbol::identity(1, 1), f], &cfg).unwrap() - 2.0).norm() < 1e-8);
    }

    #[test]
    fn smoothing_symbols_have_no_boundary_trace() {
        let cfg = QuadConfig::default();
        let b = ParamSymbol::bump(1, 1.0);
        assert_eq!(tr_tilde(&OperatorForm::scalar(&b), &cfg).unwrap(), C64::new(0.0, 0.0));
        assert!(tr_bar(&differential(&b), &cfg).unwrap().norm() < 1e-9);
    }

    #[test]
    fn boundary_trace_of_order_minus_one_vanishes() {
        let cfg = QuadConfig::default();
        let a = ParamSymbol::scalar(1, C64::new(0.4, 0.0)).add(&ParamSymbol::coordinate(1, 0).scale(-I));
        let eta = sym_inv(&a, None).unwrap().scale(C64::new(2.0, 0.0));
        assert_eq!(tr_tilde(&OperatorForm::scalar(&eta), &cfg).unwrap(), C64::new(0.0, 0.0));
    }
}
