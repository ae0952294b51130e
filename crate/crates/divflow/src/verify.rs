//! Invariant suites run by `divflow verify`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::build_clifford;
use crate::cyclic::*;
use crate::error::{Error, Result};
use crate::flows::*;
use crate::forms::*;
use crate::linalg::{eye, max_abs, random_hermitian, trace, CMat, C64, I};
use crate::regint::{reg_integral, QuadConfig};
use crate::symbol::{check_expansion, sym_inv, ParamSymbol};

pub const SUITES: [&str; 6] = ["clifford", "symbols", "regint", "forms", "cyclic", "flows"];

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        Check { name: name.into(), residual, tol, pass: residual.is_finite() && residual < tol }
    }
}

/// Runs one suite, or every suite for `"all"`.
pub fn run_suite(name: &str, seed: u64, cfg: &QuadConfig) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match name {
        "all" => {
            let mut out = vec![];
            for s in SUITES {
                out.extend(run_suite(s, seed, cfg)?);
            }
            Ok(out)
        }
        "clifford" => clifford(&mut rng),
        "symbols" => symbols(&mut rng),
        "regint" => regint(cfg),
        "forms" => forms(cfg),
        "cyclic" => cyclic(&mut rng, cfg),
        "flows" => flows(&mut rng, cfg),
        _ => Err(Error::Precondition(format!("unknown suite `{name}`; expected one of {SUITES:?} or `all`"))),
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn clifford(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut out = vec![];
    for p in 1..=4 {
        let rep = build_clifford(p)?;
        out.push(Check::new(format!("clifford.p{p}.relations"), rep.relation_residual(), 1e-12));
        let mut worst: f64 = 0.0;
        for _ in 0..8 {
            let mu: Vec<f64> = (0..p).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let cm = rep.c_of_mu(&mu);
            let r2: f64 = mu.iter().map(|x| x * x).sum();
            worst = worst.max(max_abs(&(cm.adjoint() + &cm)));
            worst = worst.max(max_abs(&(&cm * &cm + eye(rep.dim) * c(r2, 0.0))));
            if let Some(g) = &rep.grading {
                worst = worst.max(max_abs(&(g * &cm + &cm * g)));
            }
        }
        out.push(Check::new(format!("clifford.p{p}.random_mu"), worst, 1e-12));
    }
    Ok(out)
}

fn symbols(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut out = vec![];
    let d = random_hermitian(rng, 2, 1.0) + eye(2) * c(3.0, 0.0);
    let a = ParamSymbol::constant(1, d).add(&ParamSymbol::coordinate(1, 0).kron_right(&eye(2)).scale(-I));
    let ai = sym_inv(&a, None)?;
    let mut worst: f64 = 0.0;
    for _ in 0..8 {
        let mu = [rng.gen_range(-20.0..20.0)];
        worst = worst.max(max_abs(&(ai.mul(&a).eval(&mu) - eye(2))));
    }
    out.push(Check::new("symbols.inverse", worst, 1e-10));
    for (name, f) in [
        ("symbols.expansion.rational", ParamSymbol::rational_1d(&[c(1.0, 0.0), c(0.0, 2.0)], &[c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)], 10)?),
        ("symbols.expansion.radial", ParamSymbol::radial_power(3, 1.0, -1.5, 8)?),
        ("symbols.expansion.inverse", ai.clone()),
    ] {
        let e = check_expansion(&f);
        out.push(Check::new(name, if e.ok { e.err_1000 } else { f64::INFINITY }, 1.0));
    }
    Ok(out)
}

fn regint(cfg: &QuadConfig) -> Result<Vec<Check>> {
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    let mut out = vec![];
    let cases = [
        ("regint.constant", ParamSymbol::scalar(1, one), 0.0),
        ("regint.complement", ParamSymbol::rational_1d(&[zero, zero, one], &[one, zero, one], 12)?, -PI),
        ("regint.lorentzian", ParamSymbol::rational_1d(&[one], &[one, zero, one], 12)?, PI),
        ("regint.radial_p3", ParamSymbol::radial_power(3, 1.0, -2.0, 8)?, PI * PI),
    ];
    for (name, f, want) in &cases {
        out.push(Check::new(*name, (reg_integral(f, cfg)? - want).norm(), 1e-7));
    }
    let base = reg_integral(&cases[1].1, cfg)?;
    let mut spread: f64 = 0.0;
    for r0 in [0.5, 2.0] {
        let moved = QuadConfig { r0, ..cfg.clone() };
        spread = spread.max((reg_integral(&cases[1].1, &moved)? - base).norm());
    }
    out.push(Check::new("regint.split_radius", spread, 1e-7));
    Ok(out)
}

fn forms(cfg: &QuadConfig) -> Result<Vec<Check>> {
    let mut out = vec![];
    let f = ParamSymbol::coordinate(1, 0).mul(&ParamSymbol::radial_power(1, 1.0, -0.5, 8)?);
    out.push(Check::new("forms.stokes_defect", (tr_bar(&differential(&f), cfg)? - 2.0).norm(), 1e-7));
    out.push(Check::new("forms.boundary_trace", (tr_tilde(&OperatorForm::scalar(&f), cfg)? - 2.0).norm(), 1e-7));
    let a = ParamSymbol::scalar(1, c(0.8, 0.0)).add(&ParamSymbol::coordinate(1, 0).scale(-I));
    let w = wedge(&OperatorForm::scalar(&sym_inv(&a, None)?), &differential(&a));
    out.push(Check::new("forms.resolvent", (tr_bar(&w, cfg)? + I * PI).norm(), 1e-7));
    let x = |j| ParamSymbol::coordinate(2, j);
    let rho = ParamSymbol::radial_power(2, 1.0, -1.0, 10)?;
    let eta = OperatorForm::from_coeffs(2, 1, vec![(vec![0], x(1).mul(&x(1)).mul(&rho)), (vec![1], x(0).mul(&rho))])?;
    let sphere = tr_tilde(&eta, cfg)?;
    out.push(Check::new("forms.stokes_with_boundary", (sphere - tr_tilde_by_definition(&eta, cfg)?).norm(), 1e-6));
    let poly = x(0).mul(&x(0)).mul(&x(1)).add(&x(1));
    let form = OperatorForm::from_coeffs(2, 1, vec![(vec![0], poly.clone()), (vec![1], poly.mul(&poly))])?;
    out.push(Check::new("forms.d_squared", if ext_d(&ext_d(&form)).is_zero() { 0.0 } else { 1.0 }, 0.5));
    Ok(out)
}

fn constant_chain(rng: &mut ChaCha8Rng, deg: usize) -> TensorChain {
    let letters: Vec<ParamSymbol> = (0..4).map(|_| ParamSymbol::constant(1, random_hermitian(rng, 3, 1.0))).collect();
    let mut ch = TensorChain::zero(1, 3);
    for _ in 0..5 {
        let word = (0..=deg).map(|_| letters[rng.gen_range(0..4)].clone()).collect();
        ch.push(c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), word);
    }
    ch
}

/// Largest value of `tr(X_0 a_0 X_1 a_1 ⋯)` over the chain's components.
fn probe(ch: &TensorChain, xs: &[CMat]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for d in ch.degrees() {
        let v = ch.evaluate_with(d, |w| {
            let m = w.iter().zip(xs).fold(eye(3), |acc, (a, x)| acc * x * a.eval(&[0.0]));
            Ok(trace(&m))
        })?;
        worst = worst.max(v.norm());
    }
    Ok(worst)
}

fn cyclic(rng: &mut ChaCha8Rng, cfg: &QuadConfig) -> Result<Vec<Check>> {
    let mut out = vec![];
    let xs: Vec<CMat> = (0..8).map(|_| random_hermitian(rng, 3, 1.0)).collect();
    let (mut bb, mut big, mut anti): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for deg in 0..=5 {
        let ch = constant_chain(rng, deg).normalized();
        bb = bb.max(probe(&b_chain(&b_chain(&ch)), &xs)?);
        big = big.max(probe(&B_chain(&B_chain(&ch)).normalized(), &xs)?);
        anti = anti.max(probe(&b_chain(&B_chain(&ch)).add(&B_chain(&b_chain(&ch))).normalized(), &xs)?);
    }
    out.push(Check::new("cyclic.b_squared", bb, 1e-12));
    out.push(Check::new("cyclic.B_squared", big, 1e-12));
    out.push(Check::new("cyclic.bB_plus_Bb", anti, 1e-12));

    let (phi1, psi0) = reg_character(1, cfg);
    let mut draw = || c(rng.gen_range(-1.0..1.0), rng.gen_range(0.4..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
    let a: Vec<ParamSymbol> = (0..3).map(|_| rational_symbol(&[draw()], &[draw()])).collect::<Result<_>>()?;
    let u = crate::linalg::random_unitary(rng, 2);
    let a: Vec<ParamSymbol> = a.iter().enumerate().map(|(i, g)| conjugated_diagonal(&[g.clone(), a[(i + 1) % 3].clone()], &u)).collect();
    let bphi = pair(&phi1, &b_chain(&TensorChain::word(c(1.0, 0.0), a.clone())))?;
    out.push(Check::new("cyclic.b_phi", bphi.norm(), 1e-6));
    let big_phi = pair(&phi1, &B_chain(&TensorChain::word(c(1.0, 0.0), vec![a[0].clone()])))?;
    out.push(Check::new("cyclic.B_phi_boundary", (big_phi - psi0.eval(&a[..1])?).norm(), 1e-6));
    Ok(out)
}

fn flows(rng: &mut ChaCha8Rng, cfg: &QuadConfig) -> Result<Vec<Check>> {
    let mut out = vec![];
    out.push(Check::new("flows.sf_crossing", (spectral_flow(&HermitianPath::crossing(), 16)? - 1).abs() as f64, 0.5));
    let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0), c(-3.0, 0.0)]));
    for p in 1..=3 {
        let tol = if p == 1 { 1e-6 } else { 1e-4 };
        out.push(Check::new(format!("flows.eta_p{p}"), (eta_parametric(&d, p, cfg)? - eta_spectral(&d)).abs(), tol));
    }
    for n in [-1, 2] {
        let r = divisor_flow_odd(&winding_path(&winding_symbol(n)?), 0, cfg)?;
        out.push(Check::new(format!("flows.winding_{n}"), (r.value - n as f64).norm(), 1e-8));
    }
    let path = HermitianPath::random(rng, 2, 3);
    let sf = spectral_flow(&path, 16)?;
    for sign in [1.0, -1.0] {
        let r = divisor_flow_odd(&suspend_odd(&path, 1, sign)?, 0, cfg)?;
        let miss = (r.snapped - sign as i64 * sf).abs() as f64;
        out.push(Check::new(format!("flows.df_sf_sign{}", if sign > 0.0 { "+" } else { "-" }), miss.max(r.residual), 1e-5));
    }
    let s = suspend_odd(&HermitianPath::crossing(), 1, 1.0)?;
    let direct = divisor_flow_odd(&s, 0, cfg)?.value;
    out.push(Check::new("flows.pairing_oracle", (df_via_pairing(&s, 0, 16, cfg)? - direct).norm(), 1e-6));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suites_pass() {
        let cfg = QuadConfig::default();
        for suite in ["clifford", "symbols", "regint", "forms", "cyclic"] {
            for check in run_suite(suite, 7, &cfg).unwrap() {
                assert!(check.pass, "{check:?}");
            }
        }
        assert!(run_suite("nonsense", 0, &cfg).is_err());
    }
}
