//! Regularized integrals over `R^p`: the constant term of `∫_{|mu| ≤ R} f` as
//! `R → ∞`, computed as a numeric ball integral, exact tail constants for the
//! expansion terms, and a numeric integral of the remainder.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::quad::{gk_adaptive, SphereRule};
use crate::symbol::ParamSymbol;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct QuadConfig {
    /// Splitting radius between the ball and the tail.
    pub r0: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Trapezoid nodes on the circle (`p = 2`).
    pub circle_nodes: usize,
    /// Gauss nodes in `cos θ` and trapezoid nodes in `φ` (`p = 3`).
    pub sphere_theta: usize,
    pub sphere_phi: usize,
    pub max_panels: usize,
    /// Radius ratio between consecutive tail shells.
    pub shell_ratio: f64,
    pub max_shells: usize,
    /// Initial Gauss nodes per smooth piece of the `s`-interval.
    pub s_nodes: usize,
    pub s_tol: f64,
    pub max_s_doublings: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            r0: 1.0,
            abs_tol: 1e-9,
            rel_tol: 1e-12,
            circle_nodes: 256,
            sphere_theta: 24,
            sphere_phi: 48,
            max_panels: 4000,
            shell_ratio: 4.0,
            max_shells: 60,
            s_nodes: 32,
            s_tol: 1e-7,
            max_s_doublings: 4,
        }
    }
}

impl QuadConfig {
    pub fn sphere_rule(&self, p: usize) -> Result<SphereRule> {
        SphereRule::new(p, self.circle_nodes, self.sphere_theta, self.sphere_phi)
    }
}

/// Antiderivative of `r^beta log^l r`.
fn antiderivative(beta: f64, l: u32, r: f64) -> f64 {
    let lr = r.ln();
    let e = beta + 1.0;
    if e.abs() < 1e-12 {
        return lr.powi(l as i32 + 1) / (l as f64 + 1.0);
    }
    let mut sum = 0.0;
    let mut fall = 1.0; // l!/(l-j)!
    for j in 0..=l {
        if j > 0 {
            fall *= (l - j + 1) as f64;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * fall * lr.powi((l - j) as i32) / e.powi(j as i32 + 1);
    }
    r.powf(e) * sum
}

/// Constant-term contribution of `a(ω) |mu|^alpha log^l |mu|` integrated over
/// `|mu| ≥ r0` in `R^p`, where `sphere_integral = ∮ a`.
pub fn tail_constant_term(alpha: f64, l: u32, sphere_integral: C64, r0: f64, p: usize) -> C64 {
    -sphere_integral * antiderivative(alpha + p as f64 - 1.0, l, r0)
}

/// `∮_{S^{p-1}} f`.
pub fn sphere_integral(p: usize, cfg: &QuadConfig, f: &(dyn Fn(&[f64]) -> C64 + Sync)) -> Result<C64> {
    let rule = cfg.sphere_rule(p)?;
    let vals: Vec<C64> = rule.points.par_iter().map(|w| f(w)).collect();
    Ok(vals.iter().zip(&rule.weights).fold(C64::new(0.0, 0.0), |s, (v, w)| s + v * *w))
}

/// Integrate `r^{p-1} ∮ g(r ω) dω` for radii in `[a, b]` with `r = r0 e^u`
/// substitution when `log_scale` is set.
/// The integrand receives the point, the index of its sphere node and the radius.
type ShellFn<'a> = &'a (dyn Fn(&[f64], usize, f64) -> C64 + Sync);

fn radial_shell(
    p: usize,
    rule: &SphereRule,
    g: ShellFn,
    a: f64,
    b: f64,
    log_scale: Option<f64>,
    tol: f64,
    cfg: &QuadConfig,
) -> Result<C64> {
    let m = rule.len();
    let batch = |xs: &[f64]| -> Vec<C64> {
        let radii: Vec<(f64, f64)> = xs
            .iter()
            .map(|&x| match log_scale {
                Some(r0) => {
                    let r = r0 * x.exp();
                    (r, r.powi(p as i32))
                }
                None => (x, x.powi(p as i32 - 1)),
            })
            .collect();
        let vals: Vec<C64> = (0..radii.len() * m)
            .into_par_iter()
            .map(|idx| {
                let (r, _) = radii[idx / m];
                let w = &rule.points[idx % m];
                let mu: Vec<f64> = w.iter().map(|x| x * r).collect();
                g(&mu, idx % m, r) * rule.weights[idx % m]
            })
            .collect();
        radii
            .iter()
            .enumerate()
            .map(|(i, (_, jac))| vals[i * m..(i + 1) * m].iter().fold(C64::new(0.0, 0.0), |s, v| s + v) * *jac)
            .collect()
    };
    Ok(gk_adaptive(&batch, a, b, tol, cfg.rel_tol, cfg.max_panels)?.0)
}

/// Sum shells `[r0 q^k, r0 q^{k+1}]` until two consecutive shells are negligible.
fn tail_integral(p: usize, rule: &SphereRule, g: ShellFn, r0: f64, cfg: &QuadConfig) -> Result<C64> {
    let width = cfg.shell_ratio.ln();
    let mut total = C64::new(0.0, 0.0);
    let mut quiet = 0;
    for k in 0..cfg.max_shells {
        let a = k as f64 * width;
        let v = radial_shell(p, rule, g, a, a + width, Some(r0), 0.1 * cfg.abs_tol, cfg)?;
        total += v;
        if v.norm() < 0.1 * cfg.abs_tol {
            quiet += 1;
            if quiet >= 2 {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NonConvergence(format!("remainder tail did not settle after {} shells", cfg.max_shells)))
}

/// Regularized integral of a scalar symbol (matrix symbols are traced first).
pub fn reg_integral(f: &ParamSymbol, cfg: &QuadConfig) -> Result<C64> {
    let p = f.p();
    let f = if f.n() == 1 { f.clone() } else { f.trace() };
    if !(f.remainder_order() < -(p as f64)) {
        return Err(Error::InsufficientExpansion(format!(
            "remainder order {} is not below -p = {}",
            f.remainder_order(),
            -(p as f64)
        )));
    }
    if f.is_zero() {
        return Ok(C64::new(0.0, 0.0));
    }
    let rule = cfg.sphere_rule(p)?;
    let r0 = cfg.r0;
    let full = |mu: &[f64], _: usize, _: f64| f.eval(mu)[(0, 0)];
    let ball = radial_shell(p, &rule, &full, 0.0, r0, None, 0.5 * cfg.abs_tol, cfg)?;
    // angular profiles on the sphere nodes, evaluated once
    let table: Vec<Vec<C64>> = f
        .terms()
        .iter()
        .map(|t| rule.points.par_iter().map(|w| t.angular(w)[(0, 0)]).collect())
        .collect();
    let mut tails = C64::new(0.0, 0.0);
    for (t, row) in f.terms().iter().zip(&table) {
        let s = row.iter().zip(&rule.weights).fold(C64::new(0.0, 0.0), |acc, (v, wt)| acc + v * *wt);
        tails += tail_constant_term(t.degree, t.log_power, s, r0, p);
    }
    let rem = |mu: &[f64], idx: usize, r: f64| {
        let lr = r.ln();
        let expansion = f.terms().iter().zip(&table).fold(C64::new(0.0, 0.0), |acc, (t, row)| {
            acc + row[idx] * (r.powf(t.degree) * lr.powi(t.log_power as i32))
        });
        f.eval(mu)[(0, 0)] - expansion
    };
    let remainder = tail_integral(p, &rule, &rem, r0, cfg)?;
    Ok(ball + tails + remainder)
}

/// `coef · r^alpha · log^l r`
#[derive(Clone, Copy, Debug)]
pub struct RadialTerm {
    pub coef: C64,
    pub alpha: f64,
    pub log_power: u32,
}

/// A function on `(0, ∞)` with expansions at both ends.
#[derive(Clone)]
pub struct RadialFunction {
    pub eval: Arc<dyn Fn(f64) -> C64 + Send + Sync>,
    pub at_infinity: Vec<RadialTerm>,
    pub remainder_infinity: f64,
    /// Singular behaviour at the origin to be integrated exactly (often empty).
    pub at_zero: Vec<RadialTerm>,
}

impl RadialFunction {
    /// `r^a (c + r²)^b` with `c > 0`, expanded to `depth` terms at infinity.
    pub fn power_ratio(a: f64, c: f64, b: f64, depth: usize) -> Result<Self> {
        if c <= 0.0 {
            return Err(Error::Precondition(format!("power ratio needs c > 0, got {c}")));
        }
        let mut binom = vec![1.0];
        for j in 1..depth.max(1) {
            binom.push(binom[j - 1] * (b - (j - 1) as f64) / j as f64);
        }
        let at_infinity = (0..depth)
            .map(|j| RadialTerm { coef: C64::new(binom[j] * c.powi(j as i32), 0.0), alpha: a + 2.0 * b - 2.0 * j as f64, log_power: 0 })
            .collect();
        // singular terms at the origin are integrated exactly
        let at_zero = (0..depth)
            .take_while(|&j| a + 2.0 * (j as f64) < 0.0)
            .map(|j| RadialTerm { coef: C64::new(binom[j] * c.powf(b - j as f64), 0.0), alpha: a + 2.0 * j as f64, log_power: 0 })
            .collect();
        Ok(RadialFunction {
            eval: Arc::new(move |r| C64::new(r.powf(a) * (c + r * r).powf(b), 0.0)),
            at_infinity,
            remainder_infinity: a + 2.0 * b - 2.0 * depth as f64,
            at_zero,
        })
    }
}

fn radial_term_value(ts: &[RadialTerm], r: f64) -> C64 {
    ts.iter().fold(C64::new(0.0, 0.0), |s, t| s + t.coef * r.powf(t.alpha) * r.ln().powi(t.log_power as i32))
}

/// Regularized `∫_0^∞ g(r) dr` (constant terms at both ends).
pub fn reg_integral_radial(g: &RadialFunction, cfg: &QuadConfig) -> Result<C64> {
    if !(g.remainder_infinity < -1.0) {
        return Err(Error::InsufficientExpansion(format!(
            "remainder order {} at infinity is not below -1",
            g.remainder_infinity
        )));
    }
    let r0 = cfg.r0;
    let rule = SphereRule { points: vec![vec![1.0]], weights: vec![1.0] };
    let near = |mu: &[f64], _: usize, _: f64| (g.eval)(mu[0]) - radial_term_value(&g.at_zero, mu[0]);
    let mut total = radial_shell(1, &rule, &near, 0.0, r0, None, 0.5 * cfg.abs_tol, cfg)?;
    for t in &g.at_zero {
        total += t.coef * antiderivative(t.alpha, t.log_power, r0);
    }
    for t in &g.at_infinity {
        total += tail_constant_term(t.alpha, t.log_power, t.coef, r0, 1);
    }
    let far = |mu: &[f64], _: usize, _: f64| (g.eval)(mu[0]) - radial_term_value(&g.at_infinity, mu[0]);
    total += tail_integral(1, &rule, &far, r0, cfg)?;
    Ok(total)
}
