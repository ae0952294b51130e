//! Spectral flow, eta invariants, Clifford suspensions and divisor flows.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::clifford::build_clifford;
use crate::cyclic::{pair_relative, reg_character, relative_ch_path, relative_ch_path_even};
use crate::error::{Error, Result};
use crate::forms::{differential, tr_bar, tr_tilde, wedge, OperatorForm};
use crate::linalg::{eigvalsh, eye, is_hermitian, kron, max_abs, random_hermitian, random_unitary, CMat, C64, I};
use crate::poly::MatPoly;
use crate::quad::composite_gauss;
use crate::regint::{reg_integral, reg_integral_radial, QuadConfig, RadialFunction, RadialTerm};
use crate::symbol::{sym_inv, ParamSymbol, SymbolPath};

/// Expansion depth used for spectral functions of `D`.
const DEPTH: usize = 8;

/// Piecewise linear path of Hermitian matrices on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct HermitianPath {
    n: usize,
    knots: Vec<(f64, CMat)>,
}

impl HermitianPath {
    pub fn new(knots: Vec<(f64, CMat)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Precondition("a path needs at least two knots".into()));
        }
        let n = knots[0].1.nrows();
        if knots[0].0 != 0.0 || knots.last().unwrap().0 != 1.0 {
            return Err(Error::Precondition("knots must start at s = 0 and end at s = 1".into()));
        }
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Precondition("knot positions must increase strictly".into()));
            }
        }
        for (s, m) in &knots {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Dimension(format!("knot at s = {s} is not {n}×{n}")));
            }
            if !is_hermitian(m, 1e-12) {
                return Err(Error::Precondition(format!("knot at s = {s} is not Hermitian")));
            }
        }
        for (s, m) in [&knots[0], knots.last().unwrap()] {
            let gap = eigvalsh(m).iter().fold(f64::INFINITY, |g, l| g.min(l.abs()));
            if gap <= 1e-8 {
                return Err(Error::Precondition(format!("endpoint at s = {s} is not invertible (|λ|min = {gap:.3e})")));
            }
        }
        Ok(HermitianPath { n, knots })
    }

    /// `s ↦ (1 - s) D_0 + s D_1`
    pub fn linear(d0: CMat, d1: CMat) -> Result<Self> {
        Self::new(vec![(0.0, d0), (1.0, d1)])
    }

    /// `D_s = 2s - 1` on `C^1`.
    pub fn crossing() -> Self {
        Self::linear(CMat::from_element(1, 1, C64::new(-1.0, 0.0)), CMat::from_element(1, 1, C64::new(1.0, 0.0))).unwrap()
    }

    /// Random path with `knots` knots and endpoints whose spectra stay away from 0.
    pub fn random<R: Rng>(rng: &mut R, n: usize, knots: usize) -> Self {
        let knots = knots.max(2);
        let mut ks = vec![];
        for i in 0..knots {
            let s = i as f64 / (knots - 1) as f64;
            let m = loop {
                let m = random_hermitian(rng, n, 1.0);
                let gap = eigvalsh(&m).iter().fold(f64::INFINITY, |g, l| g.min(l.abs()));
                if (i != 0 && i != knots - 1) || gap > 0.1 {
                    break m;
                }
            };
            ks.push((s, m));
        }
        Self::new(ks).unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn knots(&self) -> &[(f64, CMat)] {
        &self.knots
    }

    fn segment(&self, s: f64) -> usize {
        let last = self.knots.len() - 2;
        (0..=last).find(|&i| s < self.knots[i + 1].0).unwrap_or(last)
    }

    pub fn at(&self, s: f64) -> CMat {
        let i = self.segment(s);
        let (s0, a) = &self.knots[i];
        let (s1, b) = &self.knots[i + 1];
        let t = (s - s0) / (s1 - s0);
        a * C64::new(1.0 - t, 0.0) + b * C64::new(t, 0.0)
    }

    /// Right derivative (left derivative at `s = 1`).
    pub fn derivative(&self, s: f64) -> CMat {
        let i = self.segment(s);
        let (s0, a) = &self.knots[i];
        let (s1, b) = &self.knots[i + 1];
        (b - a) / C64::new(s1 - s0, 0.0)
    }

    /// Interior knots, where the path is only piecewise smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.knots[1..self.knots.len() - 1].iter().map(|k| k.0).collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectralFlow {
    pub value: i64,
    pub up: usize,
    pub down: usize,
    /// Located zero crossings `(s, ±1)`.
    pub crossings: Vec<(f64, i32)>,
    pub grid_points: usize,
}

fn negative_count(m: &CMat) -> i64 {
    eigvalsh(m).iter().filter(|&&l| l < 0.0).count() as i64
}

/// Sampling grid containing all knots, `per_segment` cells per segment.
fn sf_grid(path: &HermitianPath, per_segment: usize) -> Vec<f64> {
    let mut grid = vec![0.0];
    for w in path.knots.windows(2) {
        let (a, b) = (w[0].0, w[1].0);
        for j in 1..=per_segment {
            grid.push(a + (b - a) * j as f64 / per_segment as f64);
        }
    }
    grid
}

/// Move grid points sitting on a zero eigenvalue; the operator is never touched.
fn perturb_grid(path: &HermitianPath, grid: &mut [f64]) {
    let len = grid.len();
    for i in 1..len - 1 {
        let h = (grid[i + 1] - grid[i - 1]) * 0.05;
        let mut tries = 0;
        while tries < 20 && eigvalsh(&path.at(grid[i])).iter().any(|l| l.abs() < 1e-10) {
            tries += 1;
            grid[i] += h * 0.618_033_988_749_895 / tries as f64 * if tries % 2 == 0 { -1.0 } else { 1.0 };
        }
    }
}

fn locate_crossing(path: &HermitianPath, branch: usize, mut a: f64, mut b: f64) -> f64 {
    let val = |s: f64| eigvalsh(&path.at(s))[branch];
    let fa = val(a);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if (val(m) < 0.0) == (fa < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn sf_level(path: &HermitianPath, per_segment: usize) -> SpectralFlow {
    let mut grid = sf_grid(path, per_segment);
    perturb_grid(path, &mut grid);
    let eigs: Vec<Vec<f64>> = grid.par_iter().map(|&s| eigvalsh(&path.at(s))).collect();
    let (mut up, mut down) = (0, 0);
    let mut crossings = vec![];
    for i in 0..grid.len() - 1 {
        for (b, (x, y)) in eigs[i].iter().zip(&eigs[i + 1]).enumerate() {
            if *x < 0.0 && *y >= 0.0 {
                up += 1;
                crossings.push((locate_crossing(path, b, grid[i], grid[i + 1]), 1));
            } else if *x >= 0.0 && *y < 0.0 {
                down += 1;
                crossings.push((locate_crossing(path, b, grid[i], grid[i + 1]), -1));
            }
        }
    }
    SpectralFlow { value: up as i64 - down as i64, up, down, crossings, grid_points: grid.len() }
}

/// Signed count of eigenvalue crossings, tracked on sorted branches and
/// refined until the crossing counts agree on two consecutive levels.
pub fn spectral_flow_detailed(path: &HermitianPath, n_s: usize) -> Result<SpectralFlow> {
    for s in [0.0, 1.0] {
        if eigvalsh(&path.at(s)).iter().any(|l| l.abs() < 1e-10) {
            return Err(Error::Precondition(format!("eigenvalue at zero at the endpoint s = {s}")));
        }
    }
    let segs = path.knots.len() - 1;
    let mut per = (n_s / segs).max(4);
    let mut prev = sf_level(path, per);
    for _ in 0..12 {
        per *= 2;
        let next = sf_level(path, per);
        if (next.up, next.down) == (prev.up, prev.down) {
            let telescoped = negative_count(&path.at(0.0)) - negative_count(&path.at(1.0));
            debug_assert_eq!(telescoped, next.value);
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NonConvergence("crossing counts did not stabilise under refinement".into()))
}

pub fn spectral_flow(path: &HermitianPath, n_s: usize) -> Result<i64> {
    Ok(spectral_flow_detailed(path, n_s)?.value)
}

fn zero_threshold(d: &CMat) -> f64 {
    1e-10 * max_abs(d).max(1.0)
}

/// `Σ_{λ ≠ 0} sgn λ`
pub fn eta_spectral(d: &CMat) -> f64 {
    let t = zero_threshold(d);
    eigvalsh(d).iter().map(|&l| if l > t { 1.0 } else if l < -t { -1.0 } else { 0.0 }).sum()
}

/// `(η + dim ker)/2`
pub fn eta_reduced(d: &CMat) -> f64 {
    let t = zero_threshold(d);
    let kernel = eigvalsh(d).iter().filter(|l| l.abs() <= t).count() as f64;
    0.5 * (eta_spectral(d) + kernel)
}

fn check_invertible(d: &CMat) -> Result<()> {
    if eigvalsh(d).iter().any(|l| l.abs() <= zero_threshold(d)) {
        return Err(Error::NotInvertible { mu: vec![] });
    }
    Ok(())
}

/// `Γ((p+1)/2) π^{-(p+1)/2} TR̄(D (D² + |mu|²)^{-(p+1)/2})`
pub fn eta_parametric(d: &CMat, p: usize, cfg: &QuadConfig) -> Result<f64> {
    check_invertible(d)?;
    let z = (p as f64 + 1.0) / 2.0;
    let sym = ParamSymbol::constant(p, d.clone()).mul(&ParamSymbol::spectral_radial(p, d, -z, DEPTH)?);
    let v = reg_integral(&sym, cfg)?;
    Ok(gamma(z) / PI.powf(z) * v.re)
}

/// The radial formula `2Γ(z)/(√π Γ(z - 1/2)) ⨍_0^∞ r^{2z-2} tr D(D² + r²)^{-z} dr`
/// at `z = (p+1)/2`.
pub fn eta_radial_crosscheck(d: &CMat, p: usize, cfg: &QuadConfig) -> Result<f64> {
    check_invertible(d)?;
    let z = (p as f64 + 1.0) / 2.0;
    let lams = eigvalsh(d);
    let ls = lams.clone();
    let eval = Arc::new(move |r: f64| {
        let v: f64 = ls.iter().map(|l| l * (l * l + r * r).powf(-z)).sum();
        C64::new(r.powf(2.0 * z - 2.0) * v, 0.0)
    });
    let mut at_infinity = vec![];
    let mut coef = 1.0;
    for j in 0..DEPTH {
        if j > 0 {
            coef *= (-z - (j - 1) as f64) / j as f64;
        }
        let s: f64 = lams.iter().map(|l| l.powi(2 * j as i32 + 1)).sum();
        at_infinity.push(RadialTerm { coef: C64::new(coef * s, 0.0), alpha: -2.0 - 2.0 * j as f64, log_power: 0 });
    }
    let g = RadialFunction { eval, at_infinity, remainder_infinity: -2.0 - 2.0 * DEPTH as f64, at_zero: vec![] };
    let v = reg_integral_radial(&g, cfg)?;
    Ok(2.0 * gamma(z) / (PI.sqrt() * gamma(z - 0.5)) * v.re)
}

fn linear_clifford_poly(p: usize, n: usize, gens: &[CMat], left: &CMat) -> MatPoly {
    let mut q = MatPoly::zero(p, n);
    for (j, g) in gens.iter().enumerate() {
        let mut e = vec![0u32; p];
        e[j] = 1;
        q.insert(e, kron(left, g));
    }
    q
}

/// `D_s ⊗ I ± I ⊗ c(mu)` on `C^N ⊗ C^{2^k}`, `p = 2k + 1`.
pub fn suspend_odd(path: &HermitianPath, p: usize, sign: f64) -> Result<SymbolPath> {
    if p % 2 == 0 {
        return Err(Error::Precondition(format!("odd suspension needs odd p, got {p}")));
    }
    let rep = build_clifford(p)?;
    let n = path.n * rep.dim;
    let spin = eye(rep.dim);
    let gens: Vec<CMat> = rep.gens.iter().map(|g| g * C64::new(sign, 0.0)).collect();
    let lin = linear_clifford_poly(p, n, &gens, &eye(path.n));
    let (pa, pb) = (path.clone(), path.clone());
    let spin2 = spin.clone();
    let family = Arc::new(move |s: f64| {
        let mut q = lin.clone();
        q.insert(vec![0; p], kron(&pa.at(s), &spin));
        ParamSymbol::polynomial(q)
    });
    let derivative = Arc::new(move |s: f64| ParamSymbol::constant(p, kron(&pb.derivative(s), &spin2)));
    Ok(SymbolPath::new(p, n, family, derivative, path.breakpoints()))
}

/// `γ(D ⊗ I + c(mu)) = D ⊗ γ + I ⊗ γ c(mu)`, `p = 2k`.
pub fn suspend_even(d: &CMat, k: usize) -> Result<ParamSymbol> {
    if k == 0 {
        return Err(Error::Precondition("even suspension needs k ≥ 1".into()));
    }
    let p = 2 * k;
    let rep = build_clifford(p)?;
    let gamma = rep.grading.clone().unwrap();
    let gens: Vec<CMat> = rep.gens.iter().map(|g| &gamma * g).collect();
    let mut q = linear_clifford_poly(p, d.nrows() * rep.dim, &gens, &eye(d.nrows()));
    q.insert(vec![0; p], kron(d, &gamma));
    Ok(ParamSymbol::polynomial(q))
}

fn half_minus(q_inv: &ParamSymbol, dd: &ParamSymbol) -> ParamSymbol {
    let n = dd.n();
    let p = dd.p();
    let id = ParamSymbol::identity(p, n);
    id.sub(&q_inv.mul(dd)).scale(C64::new(0.5, 0.0))
}

/// `P = (I - Q^{-1} D_{2k})/2` with `Q = (D² + |mu|²)^{1/2} ⊗ I`.
pub fn idempotent_from_d(d: &CMat, k: usize) -> Result<ParamSymbol> {
    check_invertible(d)?;
    let dd = suspend_even(d, k)?;
    let spin = eye(1 << k);
    let q_inv = ParamSymbol::spectral_radial(2 * k, d, -0.5, DEPTH)?.kron_right(&spin);
    Ok(half_minus(&q_inv, &dd))
}

/// Compactly supported `a - b`, for symbols with identical expansions.
fn smoothing_difference(a: &ParamSymbol, b: &ParamSymbol) -> ParamSymbol {
    ParamSymbol::from_field(a.field().sub(b.field()), f64::NEG_INFINITY, vec![], f64::NEG_INFINITY)
}

/// Almost idempotents `P_s = P̃_s + s(P_1 - P̃_1) + (1 - s)(P_0 - P̃_0)` where
/// `P̃_s` uses `Q̃_s = (D_{2k,s}² + φ(|mu|/w) φ(D_s²))^{1/2}`.
pub fn almost_idempotent_path(path: &HermitianPath, k: usize, width: f64) -> Result<SymbolPath> {
    let p = 2 * k;
    let spin = eye(1 << k);
    let rep = build_clifford(p)?;
    let gamma = rep.grading.clone().unwrap();
    let n = path.n * rep.dim;
    let lift = {
        let (path, spin) = (path.clone(), spin.clone());
        move |s: f64| -> ParamSymbol {
            let d = path.at(s);
            let q_inv = ParamSymbol::spectral_radial_bumped(p, &d, -0.5, width, DEPTH).kron_right(&spin);
            half_minus(&q_inv, &suspend_even(&d, k).unwrap())
        }
    };
    let p0 = idempotent_from_d(&path.at(0.0), k)?;
    let p1 = idempotent_from_d(&path.at(1.0), k)?;
    let c0 = smoothing_difference(&p0, &lift(0.0));
    let c1 = smoothing_difference(&p1, &lift(1.0));
    let family = {
        let (lift, p0, p1, c0, c1) = (lift.clone(), p0.clone(), p1.clone(), c0.clone(), c1.clone());
        Arc::new(move |s: f64| {
            if s == 0.0 {
                p0.clone()
            } else if s == 1.0 {
                p1.clone()
            } else {
                lift(s).add(&c1.scale(C64::new(s, 0.0))).add(&c0.scale(C64::new(1.0 - s, 0.0)))
            }
        })
    };
    let derivative = {
        let path = path.clone();
        Arc::new(move |s: f64| {
            let d = path.at(s);
            let dot = path.derivative(s);
            let q_inv = ParamSymbol::spectral_radial_bumped(p, &d, -0.5, width, DEPTH).kron_right(&spin);
            let dq_inv =
                ParamSymbol::spectral_radial_bumped_sderiv(p, &d, &dot, -0.5, width, DEPTH).kron_right(&spin);
            let dd = suspend_even(&d, k).unwrap();
            let dd_dot = ParamSymbol::constant(p, kron(&dot, &gamma));
            let lift_dot = dq_inv.mul(&dd).add(&q_inv.mul(&dd_dot)).scale(C64::new(-0.5, 0.0));
            lift_dot.add(&c1).sub(&c0)
        })
    };
    Ok(SymbolPath::new(p, n, family, derivative, path.breakpoints()))
}

/// Outcome of a flow computation; `value` is the sum of `parts`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FlowResult {
    pub value: C64,
    pub snapped: i64,
    pub residual: f64,
    pub parts: BTreeMap<String, C64>,
    pub diagnostics: BTreeMap<String, f64>,
}

impl FlowResult {
    pub fn from_parts(parts: BTreeMap<String, C64>, diagnostics: BTreeMap<String, f64>) -> Self {
        let value: C64 = parts.values().sum();
        let snapped = value.re.round() as i64;
        let residual = (value - C64::new(snapped as f64, 0.0)).norm();
        FlowResult { value, snapped, residual, parts, diagnostics }
    }
}

fn cpow(z: C64, n: usize) -> C64 {
    (0..n).fold(C64::new(1.0, 0.0), |acc, _| acc * z)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// `∫_0^1 f(s) ds` by composite Gauss over the path's pieces, doubling the
/// node count until two levels agree within `cfg.s_tol`.
pub fn s_integrate<F>(breaks: &[f64], f: F, cfg: &QuadConfig) -> Result<(C64, usize, f64)>
where
    F: Fn(f64) -> Result<C64> + Sync,
{
    let level = |n: usize| -> Result<C64> {
        let nodes = composite_gauss(breaks, n);
        let vals: Result<Vec<C64>> = nodes.par_iter().map(|&(s, w)| Ok(f(s)? * w)).collect();
        Ok(vals?.into_iter().sum())
    };
    let mut n = cfg.s_nodes;
    let mut prev = level(n)?;
    for _ in 0..cfg.max_s_doublings {
        n *= 2;
        let next = level(n)?;
        let change = (next - prev).norm();
        if change < cfg.s_tol {
            return Ok((next, n, change));
        }
        prev = next;
    }
    Err(Error::NonConvergence(format!("s-quadrature did not settle with {n} nodes")))
}

/// `TR̄((A^{-1} dA)^{2k+1})`
pub fn odd_endpoint_term(a: &ParamSymbol, cfg: &QuadConfig) -> Result<C64> {
    let p = a.p();
    let ainv = sym_inv(a, None)?;
    let w = wedge(&OperatorForm::scalar(&ainv), &differential(a));
    tr_bar(&w.power(p), cfg)
}

/// `T̃R(σ(A)^{-1} σ(Ȧ) (σ(A)^{-1} dσ(A))^{2k})`
pub fn odd_correction_term(a: &ParamSymbol, a_dot: &ParamSymbol, cfg: &QuadConfig) -> Result<C64> {
    let p = a.p();
    let ainv = a.parametrix(None)?;
    let mut w = OperatorForm::scalar(&ainv.mul(a_dot));
    if p > 1 {
        let one = wedge(&OperatorForm::scalar(&ainv), &differential(a));
        w = wedge(&w, &one.power(p - 1));
    }
    tr_tilde(&w, cfg)
}

fn split(diag: &mut BTreeMap<String, f64>, name: &str, z: C64) {
    diag.insert(format!("{name}_re"), z.re);
    diag.insert(format!("{name}_im"), z.im);
}

/// Odd divisor flow of an admissible path in dimension `p = 2k + 1`.
pub fn divisor_flow_odd(path: &SymbolPath, k: usize, cfg: &QuadConfig) -> Result<FlowResult> {
    let p = 2 * k + 1;
    if path.p != p {
        return Err(Error::Dimension(format!("path lives on R^{} but k = {k} needs p = {p}", path.p)));
    }
    let e0 = odd_endpoint_term(&path.at(0.0), cfg)?;
    let e1 = odd_endpoint_term(&path.at(1.0), cfg)?;
    let (corr, nodes, change) =
        s_integrate(&path.breakpoints, |s| odd_correction_term(&path.at(s), &path.s_derivative(s), cfg), cfg)?;
    let base = cpow(C64::new(0.0, -2.0 * PI), k + 1);
    let c1 = factorial(k) / factorial(2 * k + 1) / base;
    let c2 = factorial(k) / factorial(2 * k) / base;
    let mut parts = BTreeMap::new();
    parts.insert("endpoint_0".to_string(), -c1 * e0);
    parts.insert("endpoint_1".to_string(), c1 * e1);
    parts.insert("correction".to_string(), -c2 * corr);
    let mut diag = BTreeMap::new();
    split(&mut diag, "tr_bar_0", e0);
    split(&mut diag, "tr_bar_1", e1);
    split(&mut diag, "tr_tilde_integral", corr);
    diag.insert("s_nodes".into(), nodes as f64);
    diag.insert("s_change".into(), change);
    Ok(FlowResult::from_parts(parts, diag))
}

/// `TR̄((P - 1/2)(dP)^{2k})`
pub fn even_endpoint_integral(e: &ParamSymbol, cfg: &QuadConfig) -> Result<C64> {
    let k = e.p() / 2;
    let half = ParamSymbol::identity(e.p(), e.n()).scale(C64::new(0.5, 0.0));
    let w = wedge(&OperatorForm::scalar(&e.sub(&half)), &differential(e).power(2 * k));
    tr_bar(&w, cfg)
}

/// `η_{2k}(P) = -2/((2πi)^k k!) TR̄((P - 1/2)(dP)^{2k})`
pub fn eta_even(e: &ParamSymbol, cfg: &QuadConfig) -> Result<C64> {
    let k = e.p() / 2;
    let v = even_endpoint_integral(e, cfg)?;
    Ok(v * (-2.0 / factorial(k)) / cpow(C64::new(0.0, 2.0 * PI), k))
}

/// `T̃R(σ((2f - 1) ḟ) (dσ(f))^{2k-1})`
pub fn even_correction_term(f: &ParamSymbol, f_dot: &ParamSymbol, cfg: &QuadConfig) -> Result<C64> {
    let k = f.p() / 2;
    let one = ParamSymbol::identity(f.p(), f.n());
    let h = f.scale(C64::new(2.0, 0.0)).sub(&one).mul(f_dot);
    let w = wedge(&OperatorForm::scalar(&h), &differential(f).power(2 * k - 1));
    tr_tilde(&w, cfg)
}

/// Even divisor flow of a path of almost idempotents in dimension `p = 2k`.
pub fn divisor_flow_even(path: &SymbolPath, k: usize, cfg: &QuadConfig) -> Result<FlowResult> {
    let p = 2 * k;
    if k == 0 || path.p != p {
        return Err(Error::Dimension(format!("path lives on R^{} but k = {k} needs p = {p}", path.p)));
    }
    let (f0, f1) = (path.at(0.0), path.at(1.0));
    for (s, f) in [(0.0, &f0), (1.0, &f1)] {
        let d = crate::cyclic::idempotent_defect(f);
        if d > 1e-6 {
            return Err(Error::Precondition(format!("endpoint at s = {s} is not idempotent (defect {d:.2e})")));
        }
    }
    let sign_k = if k % 2 == 0 { 1.0 } else { -1.0 };
    let e0 = even_endpoint_integral(&f0, cfg)? * (sign_k / factorial(k));
    let e1 = even_endpoint_integral(&f1, cfg)? * (sign_k / factorial(k));
    let (corr, nodes, change) = s_integrate(
        &path.breakpoints,
        |s| Ok(even_correction_term(&path.at(s), &path.s_derivative(s), cfg)? * (sign_k / factorial(k - 1))),
        cfg,
    )?;
    let base = cpow(C64::new(0.0, 2.0 * PI), k);
    let mut parts = BTreeMap::new();
    parts.insert("endpoint_0".to_string(), e0 * sign_k / base);
    parts.insert("endpoint_1".to_string(), -e1 * sign_k / base);
    parts.insert("correction".to_string(), corr * sign_k / base);
    let mut diag = BTreeMap::new();
    split(&mut diag, "pairing_0", e0);
    split(&mut diag, "pairing_1", e1);
    split(&mut diag, "secondary_integral", corr);
    diag.insert("s_nodes".into(), nodes as f64);
    diag.insert("s_change".into(), change);
    Ok(FlowResult::from_parts(parts, diag))
}

/// Odd divisor flow as the relative pairing of the path's Chern character
/// with the regularized character, `n_s` Gauss nodes per smooth piece.
pub fn df_via_pairing(path: &SymbolPath, k: usize, n_s: usize, cfg: &QuadConfig) -> Result<C64> {
    let p = 2 * k + 1;
    if path.p != p {
        return Err(Error::Dimension(format!("path lives on R^{} but k = {k} needs p = {p}", path.p)));
    }
    let rc = relative_ch_path(path, k, n_s)?;
    let (phi, psi) = reg_character(p, cfg);
    Ok(pair_relative(&phi, &psi, &rc)? / cpow(C64::new(0.0, -2.0 * PI), k + 1))
}

/// Even counterpart of [`df_via_pairing`].
pub fn df_via_pairing_even(path: &SymbolPath, k: usize, n_s: usize, cfg: &QuadConfig) -> Result<C64> {
    let p = 2 * k;
    if k == 0 || path.p != p {
        return Err(Error::Dimension(format!("path lives on R^{} but k = {k} needs p = {p}", path.p)));
    }
    let rc = relative_ch_path_even(path, k, n_s)?;
    let (phi, psi) = reg_character(p, cfg);
    let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
    Ok(pair_relative(&phi, &psi, &rc)? * sign / cpow(C64::new(0.0, 2.0 * PI), k))
}

/// `Π (mu - a_i) / Π (mu - b_i)` on the line; equal counts keep it elliptic of order 0.
pub fn rational_symbol(zeros: &[C64], poles: &[C64]) -> Result<ParamSymbol> {
    let roots_poly = |rs: &[C64]| {
        rs.iter().fold(vec![C64::new(1.0, 0.0)], |acc, r| {
            let mut out = vec![C64::new(0.0, 0.0); acc.len() + 1];
            for (i, c) in acc.iter().enumerate() {
                out[i + 1] += c;
                out[i] -= c * r;
            }
            out
        })
    };
    if poles.iter().any(|b| b.im == 0.0) || zeros.iter().any(|a| a.im == 0.0) {
        return Err(Error::NotInvertible { mu: vec![] });
    }
    ParamSymbol::rational_1d(&roots_poly(zeros), &roots_poly(poles), 12)
}

/// `((mu + i)/(mu - i))^n`
pub fn winding_symbol(n: i32) -> Result<ParamSymbol> {
    let m = n.unsigned_abs() as usize;
    let (plus, minus) = (vec![-I; m], vec![I; m]);
    if n >= 0 {
        rational_symbol(&plus, &minus)
    } else {
        rational_symbol(&minus, &plus)
    }
}

/// `U diag(g_1, …, g_N) U^*` from scalar symbols on the line.
pub fn conjugated_diagonal(blocks: &[ParamSymbol], u: &CMat) -> ParamSymbol {
    let n = blocks.len();
    let mut sum = ParamSymbol::zero(1, n);
    for (i, g) in blocks.iter().enumerate() {
        let mut e = CMat::zeros(n, n);
        e[(i, i)] = C64::new(1.0, 0.0);
        sum = sum.add(&g.kron_left(&e));
    }
    ParamSymbol::constant(1, u.clone()).mul(&sum).mul(&ParamSymbol::constant(1, u.adjoint()))
}

/// The path `s ↦ 1 + s(g - 1)`.
pub fn winding_path(g: &ParamSymbol) -> SymbolPath {
    let id = ParamSymbol::identity(g.p(), g.n());
    let h = g.sub(&id);
    let (id2, h2) = (id.clone(), h.clone());
    let g2 = g.clone();
    SymbolPath::new(
        g.p(),
        g.n(),
        Arc::new(move |s: f64| {
            if s == 0.0 {
                id2.clone()
            } else if s == 1.0 {
                g2.clone()
            } else {
                id2.add(&h2.scale(C64::new(s, 0.0)))
            }
        }),
        Arc::new(move |_| h.clone()),
        vec![],
    )
}

/// A seeded winding family on `C^N`: random zeros and poles off the real axis,
/// conjugated by a random unitary. Returns the symbol and its winding number.
pub fn random_winding<R: Rng>(rng: &mut R, n: usize, max_degree: usize) -> Result<(ParamSymbol, i64)> {
    let mut blocks = vec![];
    let mut oracle = 0.0;
    for _ in 0..n {
        let deg = rng.gen_range(1..=max_degree);
        let mut draw = || {
            let re = rng.gen_range(-2.0..2.0);
            let im: f64 = rng.gen_range(0.3..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            C64::new(re, im)
        };
        let zeros: Vec<C64> = (0..deg).map(|_| draw()).collect();
        let poles: Vec<C64> = (0..deg).map(|_| draw()).collect();
        for (a, b) in zeros.iter().zip(&poles) {
            oracle -= 0.5 * (a.im.signum() - b.im.signum());
        }
        blocks.push(rational_symbol(&zeros, &poles)?);
    }
    let u = random_unitary(rng, n);
    Ok((conjugated_diagonal(&blocks, &u), oracle.round() as i64))
}
