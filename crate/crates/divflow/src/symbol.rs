//! Parametric symbols: matrix-valued functions of `mu ∈ R^p` together with an
//! explicit asymptotic expansion in homogeneous terms at infinity.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::field::{cpoly_trim, DerivFn, EvalFn, Field};
use crate::linalg::{eigh, max_abs, min_singular, spectral_projections, CMat, C64};
use crate::poly::MatPoly;

const DEG_TOL: f64 = 1e-9;

static NEXT_KEY: AtomicU64 = AtomicU64::new(1);

fn fresh_key() -> Arc<[u64]> {
    Arc::from(vec![NEXT_KEY.fetch_add(1, Ordering::Relaxed)])
}

/// `profile(mu) · log^l |mu|` where `profile` is homogeneous of degree `degree`.
#[derive(Clone)]
pub struct HomogTerm {
    pub degree: f64,
    pub log_power: u32,
    pub profile: Field,
}

impl HomogTerm {
    pub fn new(degree: f64, log_power: u32, profile: Field) -> Self {
        HomogTerm { degree, log_power, profile }
    }

    /// Value on the unit sphere.
    pub fn angular(&self, omega: &[f64]) -> CMat {
        self.profile.eval(omega)
    }

    pub fn eval(&self, mu: &[f64]) -> CMat {
        let v = self.profile.eval(mu);
        if self.log_power == 0 {
            v
        } else {
            let r = mu.iter().map(|x| x * x).sum::<f64>().sqrt();
            v * C64::new(r.ln().powi(self.log_power as i32), 0.0)
        }
    }

    fn mul(&self, o: &HomogTerm) -> HomogTerm {
        HomogTerm::new(self.degree + o.degree, self.log_power + o.log_power, self.profile.mul(&o.profile))
    }

    fn map(&self, f: impl Fn(&Field) -> Field) -> HomogTerm {
        HomogTerm::new(self.degree, self.log_power, f(&self.profile))
    }

    fn partial(&self, j: usize) -> Vec<HomogTerm> {
        let p = self.profile.p();
        let mut out = vec![HomogTerm::new(self.degree - 1.0, self.log_power, self.profile.partial(j))];
        if self.log_power > 0 {
            // d/dmu_j log^l r = l log^{l-1} r · mu_j / r^2
            let w = Field::coordinate(p, j).mul(&Field::hrad(p, C64::new(self.log_power as f64, 0.0), -2.0));
            let w = if self.profile.n() == 1 { w } else { w.kron_right(&CMat::identity(self.profile.n(), self.profile.n())) };
            out.push(HomogTerm::new(self.degree - 1.0, self.log_power - 1, w.mul(&self.profile)));
        }
        out
    }
}

/// Sort by degree (then log power) descending, merge equal pairs, drop zeros.
pub fn merge_terms(mut v: Vec<HomogTerm>) -> Vec<HomogTerm> {
    v.retain(|t| !t.profile.is_zero());
    v.sort_by(|a, b| b.degree.total_cmp(&a.degree).then(b.log_power.cmp(&a.log_power)));
    let mut out: Vec<HomogTerm> = Vec::with_capacity(v.len());
    for t in v {
        match out.last_mut() {
            Some(last) if (last.degree - t.degree).abs() < DEG_TOL && last.log_power == t.log_power => {
                last.profile = last.profile.add(&t.profile);
            }
            _ => out.push(t),
        }
    }
    out.retain(|t| !t.profile.is_zero());
    out
}

#[derive(Clone)]
pub struct ParamSymbol(Arc<SymInner>);

struct SymInner {
    p: usize,
    n: usize,
    order: f64,
    field: Field,
    terms: Vec<HomogTerm>,
    remainder_order: f64,
    key: Arc<[u64]>,
    partials: Vec<OnceLock<ParamSymbol>>,
}

impl std::fmt::Debug for ParamSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParamSymbol")
            .field("p", &self.0.p)
            .field("n", &self.0.n)
            .field("order", &self.0.order)
            .field("degrees", &self.0.terms.iter().map(|t| (t.degree, t.log_power)).collect::<Vec<_>>())
            .field("remainder_order", &self.0.remainder_order)
            .finish()
    }
}

impl ParamSymbol {
    /// Assemble a symbol from an evaluator field and its expansion.
    pub fn from_field(field: Field, order: f64, terms: Vec<HomogTerm>, remainder_order: f64) -> Self {
        Self::with_key(field, order, terms, remainder_order, fresh_key())
    }

    fn with_key(field: Field, order: f64, terms: Vec<HomogTerm>, remainder_order: f64, key: Arc<[u64]>) -> Self {
        let (p, n) = (field.p(), field.n());
        ParamSymbol(Arc::new(SymInner {
            p,
            n,
            order,
            field,
            terms: merge_terms(terms),
            remainder_order,
            key,
            partials: (0..p).map(|_| OnceLock::new()).collect(),
        }))
    }

    /// A symbol from closures. Without `deriv`, partials use central differences.
    pub fn from_fn(
        p: usize,
        n: usize,
        order: f64,
        eval: EvalFn,
        deriv: Option<DerivFn>,
        terms: Vec<HomogTerm>,
        remainder_order: f64,
    ) -> Self {
        Self::from_field(Field::from_fn(p, n, eval, deriv), order, terms, remainder_order)
    }

    pub fn zero(p: usize, n: usize) -> Self {
        Self::from_field(Field::zero(p, n), f64::NEG_INFINITY, vec![], f64::NEG_INFINITY)
    }

    pub fn identity(p: usize, n: usize) -> Self {
        let f = Field::constant(p, CMat::identity(n, n));
        Self::with_key(f.clone(), 0.0, vec![HomogTerm::new(0.0, 0, f)], f64::NEG_INFINITY, Arc::from(vec![]))
    }

    pub fn constant(p: usize, m: CMat) -> Self {
        Self::polynomial(MatPoly::constant(p, m))
    }

    pub fn scalar(p: usize, z: C64) -> Self {
        Self::constant(p, CMat::from_element(1, 1, z))
    }

    pub fn coordinate(p: usize, j: usize) -> Self {
        Self::polynomial(MatPoly::linear(p, j, CMat::identity(1, 1)))
    }

    /// Exact symbol of a matrix polynomial; the expansion is its homogeneous parts.
    pub fn polynomial(q: MatPoly) -> Self {
        let (p, n) = (q.p, q.n);
        let Some(deg) = q.degree() else { return Self::zero(p, n) };
        let terms = (0..=deg).rev().map(|d| HomogTerm::new(d as f64, 0, Field::poly(q.homogeneous_part(d)))).collect();
        Self::from_field(Field::poly(q), deg as f64, terms, f64::NEG_INFINITY)
    }

    /// Scalar `num(mu)/den(mu)` on the line (`p = 1`), expanded to `depth` terms.
    /// The denominator must not vanish on the real axis.
    pub fn rational_1d(num: &[C64], den: &[C64], depth: usize) -> Result<Self> {
        let num = cpoly_trim(num);
        let den = cpoly_trim(den);
        if den.is_empty() {
            return Err(Error::Precondition("zero denominator".into()));
        }
        if num.is_empty() {
            return Ok(Self::zero(1, 1));
        }
        if den.len() == 1 {
            let mut q = MatPoly::zero(1, 1);
            for (k, c) in num.iter().enumerate() {
                q.insert(vec![k as u32], CMat::from_element(1, 1, c / den[0]));
            }
            return Ok(Self::polynomial(q));
        }
        let (dn, dd) = (num.len() - 1, den.len() - 1);
        let a: Vec<C64> = num.iter().rev().cloned().collect();
        let b: Vec<C64> = den.iter().rev().cloned().collect();
        let mut cs: Vec<C64> = Vec::with_capacity(depth);
        for k in 0..depth {
            let mut v = a.get(k).cloned().unwrap_or_default();
            for i in 1..=k.min(dd) {
                v -= b[i] * cs[k - i];
            }
            cs.push(v / b[0]);
        }
        let lead = dn as i32 - dd as i32;
        let terms = cs
            .iter()
            .enumerate()
            .map(|(k, &c)| HomogTerm::new((lead - k as i32) as f64, 0, Field::monomial_1d(c, lead - k as i32)))
            .collect();
        Ok(Self::from_field(Field::rational_1d(num, den), lead as f64, terms, (lead - depth as i32) as f64))
    }

    /// Scalar `(c + |mu|^2)^beta` with `c > 0`, expanded by the binomial series.
    pub fn radial_power(p: usize, c: f64, beta: f64, depth: usize) -> Result<Self> {
        if c <= 0.0 && !(beta >= 0.0 && beta.fract() == 0.0) {
            return Err(Error::NotInvertible { mu: vec![0.0; p] });
        }
        let (terms, rem) = binomial_terms(p, c, beta, depth, &CMat::identity(1, 1));
        Ok(Self::from_field(Field::radial_power(p, C64::new(1.0, 0.0), c, beta), 2.0 * beta, terms, rem))
    }

    /// `(D^2 + |mu|^2)^beta` for Hermitian `D`, via its spectral decomposition.
    pub fn spectral_radial(p: usize, d: &CMat, beta: f64, depth: usize) -> Result<Self> {
        let n = d.nrows();
        let mut field = Field::zero(p, n);
        let mut terms = vec![];
        let mut rem = f64::NEG_INFINITY;
        for (l, proj) in spectral_projections(d) {
            let c = l * l;
            if c < 1e-28 && !(beta >= 0.0 && beta.fract() == 0.0) {
                return Err(Error::NotInvertible { mu: vec![0.0; p] });
            }
            field = field.add(&Field::radial_power(p, C64::new(1.0, 0.0), c, beta).kron_right(&proj));
            let (t, r) = binomial_terms(p, c, beta, depth, &proj);
            terms.extend(t);
            rem = rem.max(r);
        }
        Ok(Self::from_field(field, 2.0 * beta, terms, rem))
    }

    /// Same expansion as [`spectral_radial`](Self::spectral_radial), but the
    /// evaluator is `(D^2 + |mu|^2 + φ(|mu|/w) φ(D^2))^beta`, which stays
    /// smooth when `D` is singular. The two differ by a compactly supported term.
    pub fn spectral_radial_bumped(p: usize, d: &CMat, beta: f64, width: f64, depth: usize) -> Self {
        let n = d.nrows();
        let spec = spectral_projections(d);
        let mut terms = vec![];
        let mut rem = f64::NEG_INFINITY;
        for (l, proj) in &spec {
            let c = l * l;
            if c < 1e-28 {
                terms.push(HomogTerm::new(2.0 * beta, 0, Field::hrad(p, C64::new(1.0, 0.0), 2.0 * beta).kron_right(proj)));
            } else {
                let (t, r) = binomial_terms(p, c, beta, depth, proj);
                terms.extend(t);
                rem = rem.max(r);
            }
        }
        let spec2 = spec.clone();
        let eval: EvalFn = Arc::new(move |mu: &[f64]| {
            let r = mu.iter().map(|x| x * x).sum::<f64>().sqrt();
            let b = bump(r / width);
            let mut out = CMat::zeros(n, n);
            for (l, proj) in &spec {
                let x = l * l + r * r + b * bump(l * l);
                out += proj * C64::new(x.powf(beta), 0.0);
            }
            out
        });
        let deriv: DerivFn = Arc::new(move |j| {
            let spec = spec2.clone();
            Field::from_fn(
                p,
                n,
                Arc::new(move |mu: &[f64]| {
                    let r = mu.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let b = bump(r / width);
                    let db = if r > 0.0 { bump_deriv(r / width) * mu[j] / (r * width) } else { 0.0 };
                    let mut out = CMat::zeros(n, n);
                    for (l, proj) in &spec {
                        let x = l * l + r * r + b * bump(l * l);
                        let dx = 2.0 * mu[j] + db * bump(l * l);
                        out += proj * C64::new(beta * x.powf(beta - 1.0) * dx, 0.0);
                    }
                    out
                }),
                None,
            )
        });
        Self::from_field(Field::from_fn(p, n, eval, Some(deriv)), 2.0 * beta, terms, rem)
    }

    /// Derivative of [`spectral_radial_bumped`](Self::spectral_radial_bumped)
    /// along `D + t Ḋ` at `t = 0`, via divided differences in the eigenbasis.
    pub fn spectral_radial_bumped_sderiv(
        p: usize,
        d: &CMat,
        ddot: &CMat,
        beta: f64,
        width: f64,
        depth: usize,
    ) -> Self {
        let n = d.nrows();
        let (lam, u) = eigh(d);
        let g = u.adjoint() * ddot * &u;
        let eval: EvalFn = Arc::new(move |mu: &[f64]| {
            let r2 = mu.iter().map(|x| x * x).sum::<f64>();
            let b = bump(r2.sqrt() / width);
            let f = |l: f64| (l * l + r2 + b * bump(l * l)).powf(beta);
            let df = |l: f64| {
                let x = l * l + r2 + b * bump(l * l);
                beta * x.powf(beta - 1.0) * (2.0 * l + b * bump_deriv(l * l) * 2.0 * l)
            };
            let m = CMat::from_fn(n, n, |i, j| {
                let (a, c) = (lam[i], lam[j]);
                let dd = if (a - c).abs() > 1e-7 * (1.0 + a.abs() + c.abs()) {
                    (f(a) - f(c)) / (a - c)
                } else {
                    df(0.5 * (a + c))
                };
                g[(i, j)] * dd
            });
            &u * m * u.adjoint()
        });
        // (D^2 + r^2)^beta = Σ_j C(beta, j) D^{2j} r^{2beta - 2j}; differentiate D^{2j}
        let mut terms = vec![];
        let mut coef = 1.0;
        let mut powers = vec![CMat::identity(n, n)];
        for j in 1..depth {
            coef *= (beta - (j - 1) as f64) / j as f64;
            while powers.len() < 2 * j {
                let next = powers.last().unwrap() * d;
                powers.push(next);
            }
            let mut dm = CMat::zeros(n, n);
            for a in 0..2 * j {
                dm += &powers[a] * ddot * &powers[2 * j - 1 - a];
            }
            let deg = 2.0 * beta - 2.0 * j as f64;
            terms.push(HomogTerm::new(deg, 0, Field::hrad(p, C64::new(coef, 0.0), deg).kron_right(&dm)));
        }
        let rem = 2.0 * beta - 2.0 * depth.max(1) as f64;
        Self::from_field(Field::from_fn(p, n, eval, None), 2.0 * beta - 2.0, terms, rem)
    }

    /// Scalar smoothing symbol `φ(|mu|/w)` with `φ(0) = 1`, supported in the ball of radius `w`.
    pub fn bump(p: usize, width: f64) -> Self {
        let eval: EvalFn = Arc::new(move |mu: &[f64]| {
            let r = mu.iter().map(|x| x * x).sum::<f64>().sqrt();
            CMat::from_element(1, 1, C64::new(bump(r / width), 0.0))
        });
        let deriv: DerivFn = Arc::new(move |j| {
            Field::from_fn(
                p,
                1,
                Arc::new(move |mu: &[f64]| {
                    let r = mu.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let v = if r > 0.0 { bump_deriv(r / width) * mu[j] / (r * width) } else { 0.0 };
                    CMat::from_element(1, 1, C64::new(v, 0.0))
                }),
                None,
            )
        });
        Self::from_field(Field::from_fn(p, 1, eval, Some(deriv)), f64::NEG_INFINITY, vec![], f64::NEG_INFINITY)
    }

    pub fn p(&self) -> usize {
        self.0.p
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn order(&self) -> f64 {
        self.0.order
    }

    pub fn terms(&self) -> &[HomogTerm] {
        &self.0.terms
    }

    pub fn remainder_order(&self) -> f64 {
        self.0.remainder_order
    }

    pub fn field(&self) -> &Field {
        &self.0.field
    }

    /// Monomial key: products concatenate keys, the identity has the empty key.
    pub fn key(&self) -> &[u64] {
        &self.0.key
    }

    pub fn eval(&self, mu: &[f64]) -> CMat {
        self.0.field.eval(mu)
    }

    /// Sum of the expansion terms at `mu` (meaningful for large `|mu|`).
    pub fn eval_terms(&self, mu: &[f64]) -> CMat {
        let mut out = CMat::zeros(self.0.n, self.0.n);
        for t in &self.0.terms {
            out += t.eval(mu);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.field.is_zero() && self.0.terms.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.key.is_empty()
    }

    pub fn ptr_eq(&self, other: &ParamSymbol) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Classical: no log terms and degrees in integer steps below the order.
    pub fn is_classical(&self) -> bool {
        self.0.terms.iter().all(|t| {
            let k = self.0.order - t.degree;
            t.log_power == 0 && (k - k.round()).abs() < DEG_TOL && k > -DEG_TOL
        })
    }

    pub fn partial(&self, j: usize) -> ParamSymbol {
        sym_partial(self, j)
    }

    pub fn trace(&self) -> ParamSymbol {
        ParamSymbol::from_field(
            self.0.field.trace(),
            self.0.order,
            self.0.terms.iter().map(|t| t.map(|f| f.trace())).collect(),
            self.0.remainder_order,
        )
    }

    pub fn scale(&self, z: C64) -> ParamSymbol {
        if z == C64::new(1.0, 0.0) {
            return self.clone();
        }
        if z == C64::new(0.0, 0.0) {
            return ParamSymbol::zero(self.0.p, self.0.n);
        }
        ParamSymbol::from_field(
            self.0.field.scale(z),
            self.0.order,
            self.0.terms.iter().map(|t| t.map(|f| f.scale(z))).collect(),
            self.0.remainder_order,
        )
    }

    pub fn neg(&self) -> ParamSymbol {
        self.scale(C64::new(-1.0, 0.0))
    }

    /// `self ⊗ m`
    pub fn kron_right(&self, m: &CMat) -> ParamSymbol {
        ParamSymbol::from_field(
            self.0.field.kron_right(m),
            self.0.order,
            self.0.terms.iter().map(|t| t.map(|f| f.kron_right(m))).collect(),
            self.0.remainder_order,
        )
    }

    /// `m ⊗ self`
    pub fn kron_left(&self, m: &CMat) -> ParamSymbol {
        ParamSymbol::from_field(
            self.0.field.kron_left(m),
            self.0.order,
            self.0.terms.iter().map(|t| t.map(|f| f.kron_left(m))).collect(),
            self.0.remainder_order,
        )
    }

    pub fn add(&self, o: &ParamSymbol) -> ParamSymbol {
        sym_add(self, o)
    }

    pub fn sub(&self, o: &ParamSymbol) -> ParamSymbol {
        sym_add(self, &o.neg())
    }

    pub fn mul(&self, o: &ParamSymbol) -> ParamSymbol {
        sym_mul(self, o)
    }

    /// A representative of the inverse symbol class built from the expansion
    /// alone: the Neumann series times a cutoff vanishing near the origin.
    /// Defined whenever the leading term is invertible, even if the symbol
    /// itself is not pointwise invertible.
    pub fn parametrix(&self, target: Option<f64>) -> Result<ParamSymbol> {
        let (terms, rem) = inverse_expansion(self, target)?;
        let p = self.0.p;
        let n = self.0.n;
        let ts = terms.clone();
        let eval: EvalFn = Arc::new(move |mu: &[f64]| {
            let r = mu.iter().map(|x| x * x).sum::<f64>().sqrt();
            let chi = 1.0 - bump(r);
            let mut out = CMat::zeros(n, n);
            if chi > 0.0 {
                for t in &ts {
                    out += t.eval(mu);
                }
            }
            out * C64::new(chi, 0.0)
        });
        Ok(ParamSymbol::from_fn(p, n, -self.top_degree(), eval, None, terms, rem))
    }

    fn top_degree(&self) -> f64 {
        self.0.terms.first().map(|t| t.degree).unwrap_or(self.0.order)
    }
}

/// `φ(t) = exp(1 - 1/(1 - t^2))` on `|t| < 1`, zero outside.
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

pub fn bump_deriv(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        let u = 1.0 - t * t;
        bump(t) * (-2.0 * t / (u * u))
    }
}

fn binomial_terms(p: usize, c: f64, beta: f64, depth: usize, proj: &CMat) -> (Vec<HomogTerm>, f64) {
    let integer = beta >= 0.0 && beta.fract() == 0.0;
    let count = if integer { beta as usize + 1 } else { depth };
    let mut terms = vec![];
    let mut coef = 1.0;
    for k in 0..count {
        if k > 0 {
            coef *= (beta - (k - 1) as f64) / k as f64;
        }
        let w = coef * c.powi(k as i32);
        let deg = 2.0 * beta - 2.0 * k as f64;
        terms.push(HomogTerm::new(deg, 0, Field::hrad(p, C64::new(w, 0.0), deg).kron_right(proj)));
    }
    let rem = if integer { f64::NEG_INFINITY } else { 2.0 * beta - 2.0 * depth as f64 };
    (terms, rem)
}

pub fn sym_add(a: &ParamSymbol, b: &ParamSymbol) -> ParamSymbol {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    let field = a.0.field.add(&b.0.field);
    let mut terms = a.0.terms.clone();
    terms.extend(b.0.terms.iter().cloned());
    let terms = merge_terms(terms);
    if field.is_zero() && terms.is_empty() {
        return ParamSymbol::zero(a.0.p, a.0.n);
    }
    ParamSymbol::from_field(field, a.0.order.max(b.0.order), terms, a.0.remainder_order.max(b.0.remainder_order))
}

/// Product of term lists keeping only degrees strictly above `cutoff`.
/// Returns the kept terms and the largest dropped degree.
fn mul_terms(a: &[HomogTerm], b: &[HomogTerm], cutoff: f64) -> (Vec<HomogTerm>, f64) {
    let mut out = vec![];
    let mut dropped = f64::NEG_INFINITY;
    for x in a {
        for y in b {
            let d = x.degree + y.degree;
            if d > cutoff + DEG_TOL {
                out.push(x.mul(y));
            } else {
                dropped = dropped.max(d);
            }
        }
    }
    (merge_terms(out), dropped)
}

pub fn sym_mul(a: &ParamSymbol, b: &ParamSymbol) -> ParamSymbol {
    if a.is_identity() {
        return b.clone();
    }
    if b.is_identity() {
        return a.clone();
    }
    if a.is_zero() || b.is_zero() {
        return ParamSymbol::zero(a.0.p, a.0.n);
    }
    let cutoff = (a.0.remainder_order + b.0.order).max(a.0.order + b.0.remainder_order);
    let (terms, _) = mul_terms(&a.0.terms, &b.0.terms, cutoff);
    let key: Vec<u64> = a.key().iter().chain(b.key().iter()).cloned().collect();
    ParamSymbol::with_key(a.0.field.mul(&b.0.field), a.0.order + b.0.order, terms, cutoff, Arc::from(key))
}

/// Deterministic sample directions on the unit sphere.
pub fn sphere_samples(p: usize) -> Vec<Vec<f64>> {
    let mut out = sphere_samples_generic(p);
    if p >= 2 {
        for j in 0..p {
            for s in [1.0, -1.0] {
                let mut v = vec![0.0; p];
                v[j] = s;
                out.push(v);
            }
        }
    }
    out
}

fn sphere_samples_generic(p: usize) -> Vec<Vec<f64>> {
    match p {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..16).map(|k| {
            let t = 2.0 * PI * (k as f64 + 0.25) / 16.0;
            vec![t.cos(), t.sin()]
        }).collect(),
        _ => {
            // Fibonacci points, padded with zeros beyond three coordinates
            let m = 40;
            let g = PI * (3.0 - 5f64.sqrt());
            (0..m)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
                    let r = (1.0 - z * z).sqrt();
                    let mut v = vec![0.0; p];
                    v[0] = r * (g * k as f64).cos();
                    v[1] = r * (g * k as f64).sin();
                    v[2] = z;
                    v
                })
                .collect()
        }
    }
}

fn inverse_expansion(a: &ParamSymbol, target: Option<f64>) -> Result<(Vec<HomogTerm>, f64)> {
    let p = a.0.p;
    let lead = a
        .0
        .terms
        .first()
        .ok_or_else(|| Error::NotElliptic("symbol has no expansion terms".into()))?;
    if lead.log_power != 0 {
        return Err(Error::NotElliptic("leading term carries a logarithm".into()));
    }
    for w in sphere_samples(p) {
        let v = lead.angular(&w);
        let s = min_singular(&v);
        if !(s > 1e-10 * (1.0 + max_abs(&v))) {
            return Err(Error::NotElliptic(format!("leading term is singular at direction {w:?}")));
        }
    }
    let m = lead.degree;
    let target = target.unwrap_or_else(|| (-(p as f64) - 1.5).min(-m - 2.5));
    let b0 = HomogTerm::new(-m, 0, lead.profile.inv());
    let x: Vec<HomogTerm> = a.0.terms[1..]
        .iter()
        .map(|t| {
            let u = b0.mul(t);
            HomogTerm::new(u.degree, u.log_power, u.profile.neg())
        })
        .collect();
    let x = merge_terms(x);
    let mut result = vec![b0.clone()];
    let mut cur = vec![b0];
    let mut dropped = f64::NEG_INFINITY;
    for _ in 0..256 {
        let (next, d) = mul_terms(&x, &cur, target);
        dropped = dropped.max(d);
        if next.is_empty() {
            break;
        }
        result.extend(next.iter().cloned());
        cur = next;
    }
    let rem = dropped.max(a.0.remainder_order - 2.0 * m);
    Ok((merge_terms(result), rem))
}

/// Pointwise inverse with the Neumann expansion of the inverse symbol.
/// `target` bounds the degrees kept; the default keeps enough terms that the
/// remainder order is below `-p - 1`.
pub fn sym_inv(a: &ParamSymbol, target: Option<f64>) -> Result<ParamSymbol> {
    let (terms, rem) = inverse_expansion(a, target)?;
    let p = a.0.p;
    for r in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
        for w in sphere_samples(p) {
            let mu: Vec<f64> = w.iter().map(|x| x * r).collect();
            let v = a.eval(&mu);
            if !(min_singular(&v) > 1e-12 * (1.0 + max_abs(&v))) {
                return Err(Error::NotInvertible { mu });
            }
            if r == 0.0 {
                break;
            }
        }
    }
    Ok(ParamSymbol::from_field(a.0.field.inv(), -a.top_degree(), terms, rem))
}

pub fn sym_partial(a: &ParamSymbol, j: usize) -> ParamSymbol {
    a.0.partials[j]
        .get_or_init(|| {
            if a.is_zero() {
                return ParamSymbol::zero(a.0.p, a.0.n);
            }
            let terms: Vec<HomogTerm> = a.0.terms.iter().flat_map(|t| t.partial(j)).collect();
            let field = a.0.field.partial(j);
            let terms = merge_terms(terms);
            if field.is_zero() && terms.is_empty() {
                return ParamSymbol::zero(a.0.p, a.0.n);
            }
            ParamSymbol::from_field(field, a.0.order - 1.0, terms, a.0.remainder_order - 1.0)
        })
        .clone()
}

/// The first `n_terms` expansion terms.
pub fn leading_part(a: &ParamSymbol, n_terms: usize) -> Result<Vec<HomogTerm>> {
    if n_terms > a.0.terms.len() && a.0.remainder_order > f64::NEG_INFINITY {
        return Err(Error::InsufficientExpansion(format!(
            "{} terms requested, {} stored",
            n_terms,
            a.0.terms.len()
        )));
    }
    Ok(a.0.terms.iter().take(n_terms).cloned().collect())
}

#[derive(Clone, Debug)]
pub struct ExpansionCheck {
    pub err_100: f64,
    pub err_1000: f64,
    pub c_100: f64,
    pub c_1000: f64,
    pub ok: bool,
}

/// Compare `eval - Σ terms` with `R^remainder_order` at `R = 100, 1000`.
pub fn check_expansion(a: &ParamSymbol) -> ExpansionCheck {
    let dirs = sphere_samples(a.0.p);
    let measure = |r: f64| {
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for w in &dirs {
            let mu: Vec<f64> = w.iter().map(|x| x * r).collect();
            let v = a.eval(&mu);
            err = err.max(max_abs(&(&v - a.eval_terms(&mu))));
            scale = scale.max(max_abs(&v));
        }
        (err, scale)
    };
    let (e1, s1) = measure(100.0);
    let (e2, s2) = measure(1000.0);
    let rho = a.0.remainder_order;
    let floor1 = 1e-11 * (1.0 + s1);
    let floor2 = 1e-11 * (1.0 + s2);
    let (c1, c2) = if rho == f64::NEG_INFINITY { (e1, e2) } else { (e1 / 100f64.powf(rho), e2 / 1000f64.powf(rho)) };
    let ok = if e1 <= floor1 && e2 <= floor2 {
        true
    } else if rho == f64::NEG_INFINITY {
        false
    } else if e2 <= floor2 {
        true
    } else {
        c2 <= 4.0 * c1
    };
    ExpansionCheck { err_100: e1, err_1000: e2, c_100: c1, c_1000: c2, ok }
}

/// A path `s ↦ a_s`, `s ∈ [0, 1]`, with its `s`-derivative.
#[derive(Clone)]
pub struct SymbolPath {
    pub p: usize,
    pub n: usize,
    family: Arc<dyn Fn(f64) -> ParamSymbol + Send + Sync>,
    derivative: Arc<dyn Fn(f64) -> ParamSymbol + Send + Sync>,
    /// Interior points where the path is only piecewise smooth.
    pub breakpoints: Vec<f64>,
}

impl SymbolPath {
    pub fn new(
        p: usize,
        n: usize,
        family: Arc<dyn Fn(f64) -> ParamSymbol + Send + Sync>,
        derivative: Arc<dyn Fn(f64) -> ParamSymbol + Send + Sync>,
        breakpoints: Vec<f64>,
    ) -> Self {
        SymbolPath { p, n, family, derivative, breakpoints }
    }

    pub fn at(&self, s: f64) -> ParamSymbol {
        (self.family)(s)
    }

    pub fn s_derivative(&self, s: f64) -> ParamSymbol {
        (self.derivative)(s)
    }

    /// `s ↦ a_{φ(s)}` for an increasing `φ` with `φ(0) = 0`, `φ(1) = 1`.
    pub fn reparametrize(
        &self,
        phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        dphi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        inverse: impl Fn(f64) -> f64,
    ) -> SymbolPath {
        let (f, d) = (self.family.clone(), self.derivative.clone());
        let phi2 = phi.clone();
        SymbolPath {
            p: self.p,
            n: self.n,
            family: Arc::new(move |s| f(phi(s))),
            derivative: Arc::new(move |s| d(phi2(s)).scale(C64::new(dphi(s), 0.0))),
            breakpoints: self.breakpoints.iter().map(|&b| inverse(b)).collect(),
        }
    }

    /// Pointwise product path `s ↦ a_s b_s`.
    pub fn product(&self, other: &SymbolPath) -> SymbolPath {
        let (a, da, b, db) = (self.family.clone(), self.derivative.clone(), other.family.clone(), other.derivative.clone());
        let (a2, b2) = (a.clone(), b.clone());
        let mut bp = self.breakpoints.clone();
        bp.extend(other.breakpoints.iter().cloned());
        bp.sort_by(f64::total_cmp);
        bp.dedup();
        SymbolPath {
            p: self.p,
            n: self.n,
            family: Arc::new(move |s| a(s).mul(&b(s))),
            derivative: Arc::new(move |s| da(s).mul(&b2(s)).add(&a2(s).mul(&db(s)))),
            breakpoints: bp,
        }
    }
}
