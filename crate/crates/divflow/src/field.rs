//! Smooth matrix-valued functions of `mu` with lazily derived partials.
//!
//! A [`Field`] is immutable and cheap to clone. Partial derivatives are built on
//! first request and cached, so sharing a field between threads is safe and
//! repeated requests return the same object.

use std::sync::{Arc, OnceLock};

use crate::linalg::{CMat, C64};
use crate::poly::MatPoly;

pub type EvalFn = Arc<dyn Fn(&[f64]) -> CMat + Send + Sync>;
pub type DerivFn = Arc<dyn Fn(usize) -> Field + Send + Sync>;

#[derive(Clone)]
pub struct Field(Arc<Inner>);

struct Inner {
    p: usize,
    n: usize,
    kind: Kind,
    partials: Vec<OnceLock<Field>>,
}

enum Kind {
    Zero,
    Poly(MatPoly),
    Scaled(Field, C64),
    General { eval: EvalFn, deriv: Option<DerivFn> },
}

/// Central-difference step used when no analytic partial is available.
pub fn fd_step(mu: &[f64]) -> f64 {
    1e-5 * (1.0 + mu.iter().map(|x| x * x).sum::<f64>().sqrt())
}

impl Field {
    fn wrap(p: usize, n: usize, kind: Kind) -> Field {
        Field(Arc::new(Inner { p, n, kind, partials: (0..p).map(|_| OnceLock::new()).collect() }))
    }

    pub fn zero(p: usize, n: usize) -> Field {
        Field::wrap(p, n, Kind::Zero)
    }

    pub fn constant(p: usize, m: CMat) -> Field {
        Field::poly(MatPoly::constant(p, m))
    }

    pub fn poly(poly: MatPoly) -> Field {
        let (p, n) = (poly.p, poly.n);
        if poly.is_zero() {
            Field::zero(p, n)
        } else {
            Field::wrap(p, n, Kind::Poly(poly))
        }
    }

    /// A field from an evaluator. Without `deriv`, partials fall back to
    /// central differences.
    pub fn from_fn(p: usize, n: usize, eval: EvalFn, deriv: Option<DerivFn>) -> Field {
        Field::wrap(p, n, Kind::General { eval, deriv })
    }

    pub fn p(&self) -> usize {
        self.0.p
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0.kind, Kind::Zero)
    }

    pub fn as_poly(&self) -> Option<&MatPoly> {
        match &self.0.kind {
            Kind::Poly(q) => Some(q),
            _ => None,
        }
    }

    pub fn ptr_eq(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn eval(&self, mu: &[f64]) -> CMat {
        match &self.0.kind {
            Kind::Zero => CMat::zeros(self.0.n, self.0.n),
            Kind::Poly(q) => q.eval(mu),
            Kind::Scaled(b, c) => b.eval(mu) * *c,
            Kind::General { eval, .. } => eval(mu),
        }
    }

    pub fn partial(&self, j: usize) -> Field {
        self.0.partials[j]
            .get_or_init(|| match &self.0.kind {
                Kind::Zero => Field::zero(self.0.p, self.0.n),
                Kind::Poly(q) => Field::poly(q.partial(j)),
                Kind::Scaled(b, c) => b.partial(j).scale(*c),
                Kind::General { deriv: Some(d), .. } => d(j),
                Kind::General { deriv: None, .. } => self.fd_partial(j),
            })
            .clone()
    }

    /// Central-difference partial, regardless of any analytic rule.
    pub fn fd_partial(&self, j: usize) -> Field {
        let f = self.clone();
        Field::from_fn(
            self.0.p,
            self.0.n,
            Arc::new(move |mu: &[f64]| {
                let h = fd_step(mu);
                let mut a = mu.to_vec();
                let mut b = mu.to_vec();
                a[j] += h;
                b[j] -= h;
                (f.eval(&a) - f.eval(&b)) * C64::new(0.5 / h, 0.0)
            }),
            None,
        )
    }

    fn base_coeff(&self) -> (Field, C64) {
        match &self.0.kind {
            Kind::Scaled(b, c) => (b.clone(), *c),
            _ => (self.clone(), C64::new(1.0, 0.0)),
        }
    }

    pub fn scale(&self, c: C64) -> Field {
        if c == C64::new(0.0, 0.0) || self.is_zero() {
            return Field::zero(self.0.p, self.0.n);
        }
        if c == C64::new(1.0, 0.0) {
            return self.clone();
        }
        match &self.0.kind {
            Kind::Poly(q) => Field::poly(q.scale(c)),
            Kind::Scaled(b, c0) => Field::wrap(self.0.p, self.0.n, Kind::Scaled(b.clone(), c0 * c)),
            _ => Field::wrap(self.0.p, self.0.n, Kind::Scaled(self.clone(), c)),
        }
    }

    pub fn neg(&self) -> Field {
        self.scale(C64::new(-1.0, 0.0))
    }

    pub fn add(&self, other: &Field) -> Field {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_poly(), other.as_poly()) {
            return Field::poly(a.add(b));
        }
        let (ba, ca) = self.base_coeff();
        let (bb, cb) = other.base_coeff();
        if ba.ptr_eq(&bb) {
            return ba.scale(ca + cb);
        }
        let (a, b) = (self.clone(), other.clone());
        let (a2, b2) = (a.clone(), b.clone());
        Field::from_fn(
            self.0.p,
            self.0.n,
            Arc::new(move |mu: &[f64]| a.eval(mu) + b.eval(mu)),
            Some(Arc::new(move |j| a2.partial(j).add(&b2.partial(j)))),
        )
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Field) -> Field {
        if self.is_zero() || other.is_zero() {
            return Field::zero(self.0.p, self.0.n);
        }
        if let (Some(a), Some(b)) = (self.as_poly(), other.as_poly()) {
            return Field::poly(a.mul(b));
        }
        let (a, b) = (self.clone(), other.clone());
        let (a2, b2) = (a.clone(), b.clone());
        Field::from_fn(
            self.0.p,
            self.0.n,
            Arc::new(move |mu: &[f64]| a.eval(mu) * b.eval(mu)),
            Some(Arc::new(move |j| a2.partial(j).mul(&b2).add(&a2.mul(&b2.partial(j))))),
        )
    }

    /// Pointwise inverse. Evaluation at a singular point yields NaN entries;
    /// callers check invertibility beforehand.
    pub fn inv(&self) -> Field {
        let a = self.clone();
        let a2 = self.clone();
        let n = self.0.n;
        Field::from_fn(
            self.0.p,
            n,
            Arc::new(move |mu: &[f64]| {
                a.eval(mu).try_inverse().unwrap_or_else(|| CMat::from_element(n, n, C64::new(f64::NAN, f64::NAN)))
            }),
            Some(Arc::new(move |j| {
                let ai = a2.inv();
                ai.mul(&a2.partial(j)).mul(&ai).neg()
            })),
        )
    }

    pub fn trace(&self) -> Field {
        match &self.0.kind {
            Kind::Zero => Field::zero(self.0.p, 1),
            Kind::Poly(q) => Field::poly(q.trace()),
            Kind::Scaled(b, c) => b.trace().scale(*c),
            Kind::General { .. } => {
                let a = self.clone();
                let a2 = self.clone();
                Field::from_fn(
                    self.0.p,
                    1,
                    Arc::new(move |mu: &[f64]| CMat::from_element(1, 1, a.eval(mu).trace())),
                    Some(Arc::new(move |j| a2.partial(j).trace())),
                )
            }
        }
    }

    /// `f(mu) ⊗ m`
    pub fn kron_right(&self, m: &CMat) -> Field {
        let n = self.0.n * m.nrows();
        match &self.0.kind {
            Kind::Zero => Field::zero(self.0.p, n),
            Kind::Poly(q) => Field::poly(q.kron_right(m)),
            Kind::Scaled(b, c) => b.kron_right(m).scale(*c),
            Kind::General { .. } => {
                let (a, a2) = (self.clone(), self.clone());
                let (m1, m2) = (m.clone(), m.clone());
                Field::from_fn(
                    self.0.p,
                    n,
                    Arc::new(move |mu: &[f64]| a.eval(mu).kronecker(&m1)),
                    Some(Arc::new(move |j| a2.partial(j).kron_right(&m2))),
                )
            }
        }
    }

    /// `m ⊗ f(mu)`
    pub fn kron_left(&self, m: &CMat) -> Field {
        let n = self.0.n * m.nrows();
        match &self.0.kind {
            Kind::Zero => Field::zero(self.0.p, n),
            Kind::Poly(q) => Field::poly(q.kron_left(m)),
            Kind::Scaled(b, c) => b.kron_left(m).scale(*c),
            Kind::General { .. } => {
                let (a, a2) = (self.clone(), self.clone());
                let (m1, m2) = (m.clone(), m.clone());
                Field::from_fn(
                    self.0.p,
                    n,
                    Arc::new(move |mu: &[f64]| m1.kronecker(&a.eval(mu))),
                    Some(Arc::new(move |j| a2.partial(j).kron_left(&m2))),
                )
            }
        }
    }

    pub fn coordinate(p: usize, j: usize) -> Field {
        Field::poly(MatPoly::linear(p, j, CMat::identity(1, 1)))
    }

    /// Scalar `coef * |mu|^alpha`, homogeneous away from the origin.
    pub fn hrad(p: usize, coef: C64, alpha: f64) -> Field {
        if coef == C64::new(0.0, 0.0) {
            return Field::zero(p, 1);
        }
        if alpha == 0.0 {
            return Field::constant(p, CMat::from_element(1, 1, coef));
        }
        Field::from_fn(
            p,
            1,
            Arc::new(move |mu: &[f64]| {
                let r2: f64 = mu.iter().map(|x| x * x).sum();
                CMat::from_element(1, 1, coef * r2.powf(0.5 * alpha))
            }),
            Some(Arc::new(move |j| Field::coordinate(p, j).mul(&Field::hrad(p, coef * alpha, alpha - 2.0)))),
        )
    }

    /// Scalar `coef * (c + |mu|^2)^beta`.
    pub fn radial_power(p: usize, coef: C64, c: f64, beta: f64) -> Field {
        if coef == C64::new(0.0, 0.0) {
            return Field::zero(p, 1);
        }
        if beta == 0.0 {
            return Field::constant(p, CMat::from_element(1, 1, coef));
        }
        Field::from_fn(
            p,
            1,
            Arc::new(move |mu: &[f64]| {
                let r2: f64 = mu.iter().map(|x| x * x).sum();
                CMat::from_element(1, 1, coef * (c + r2).powf(beta))
            }),
            Some(Arc::new(move |j| {
                Field::coordinate(p, j).mul(&Field::radial_power(p, coef * (2.0 * beta), c, beta - 1.0))
            })),
        )
    }

    /// Scalar `coef * mu^e` on the line, `e` possibly negative.
    pub fn monomial_1d(coef: C64, e: i32) -> Field {
        if coef == C64::new(0.0, 0.0) {
            return Field::zero(1, 1);
        }
        if e >= 0 {
            let mut q = MatPoly::zero(1, 1);
            q.insert(vec![e as u32], CMat::from_element(1, 1, coef));
            return Field::poly(q);
        }
        Field::from_fn(
            1,
            1,
            Arc::new(move |mu: &[f64]| CMat::from_element(1, 1, coef * mu[0].powi(e))),
            Some(Arc::new(move |_| Field::monomial_1d(coef * e as f64, e - 1))),
        )
    }

    /// Scalar rational function `num(mu) / den(mu)` on the line, coefficients
    /// in ascending powers.
    pub fn rational_1d(num: Vec<C64>, den: Vec<C64>) -> Field {
        let (n2, d2) = (num.clone(), den.clone());
        Field::from_fn(
            1,
            1,
            Arc::new(move |mu: &[f64]| {
                let x = C64::new(mu[0], 0.0);
                CMat::from_element(1, 1, cpoly_eval(&num, x) / cpoly_eval(&den, x))
            }),
            Some(Arc::new(move |_| {
                let a = cpoly_mul(&cpoly_deriv(&n2), &d2);
                let b = cpoly_mul(&n2, &cpoly_deriv(&d2));
                Field::rational_1d(cpoly_sub(&a, &b), cpoly_mul(&d2, &d2))
            })),
        )
    }
}

pub fn cpoly_eval(a: &[C64], x: C64) -> C64 {
    a.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

pub fn cpoly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn cpoly_sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).cloned().unwrap_or_default() - b.get(i).cloned().unwrap_or_default())
        .collect()
}

pub fn cpoly_deriv(a: &[C64]) -> Vec<C64> {
    a.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

/// Drop trailing zero coefficients.
pub fn cpoly_trim(a: &[C64]) -> Vec<C64> {
    let mut v = a.to_vec();
    while v.last().is_some_and(|z| z.norm() == 0.0) {
        v.pop();
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(f: &Field, mu: &[f64]) -> C64 {
        f.eval(mu)[(0, 0)]
    }

    #[test]
    fn scaled_copies_cancel_to_zero() {
        let f = Field::radial_power(2, C64::new(1.0, 0.0), 1.0, -0.5);
        assert!(f.add(&f.neg()).is_zero());
        assert!(f.scale(C64::new(2.0, 0.0)).sub(&f.scale(C64::new(2.0, 0.0))).is_zero());
    }

    #[test]
    fn radial_partial_matches_difference_quotient() {
        let f = Field::radial_power(3, C64::new(1.0, 0.0), 2.0, -1.5);
        let mu = [0.3, -0.7, 1.1];
        for j in 0..3 {
            let a = s(&f.partial(j), &mu);
            let b = s(&f.fd_partial(j), &mu);
            assert!((a - b).norm() < 1e-8, "{a} {b}");
        }
    }

    #[test]
    fn inverse_partial_is_minus_sandwich() {
        let r = Field::rational_1d(vec![C64::new(0.0, 1.0), C64::new(1.0, 0.0)], vec![C64::new(0.0, -1.0), C64::new(1.0, 0.0)]);
        let ri = r.inv();
        let x = [0.4];
        let a = s(&ri.partial(0), &x);
        let b = s(&ri.fd_partial(0), &x);
        assert!((a - b).norm() < 1e-8);
    }

    #[test]
    fn partials_are_cached() {
        let f = Field::hrad(2, C64::new(1.0, 0.0), -1.0);
        assert!(f.partial(1).ptr_eq(&f.partial(1)));
    }
}
