//! Family specifications, result records and the operations behind the
//! `divflow` command line tool.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::flows::*;
use crate::linalg::{eigvalsh, CMat, C64};
use crate::regint::{reg_integral, reg_integral_radial, QuadConfig, RadialFunction};
use crate::symbol::{ParamSymbol, SymbolPath};
use crate::verify::{run_suite, Check};

pub const SCHEMA_VERSION: u32 = 1;

fn default_version() -> u32 {
    SCHEMA_VERSION
}

/// One knot of a Hermitian path: real and (optional) imaginary parts by rows.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Knot {
    pub s: f64,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RandomPath {
    pub n: usize,
    pub knots: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    HermitianPath,
    Winding,
    Bump,
    SuspensionOdd,
    SuspensionEven,
}

/// A family of operators or symbols. Which fields are read depends on `kind`:
///
/// * `hermitian_path`: `knots`, or `random` plus `seed`;
/// * `winding`: exponent `n`, or a seeded random family of `size` blocks and
///   degree at most `max_degree`;
/// * `bump`: `I + s·amplitude·φ(|mu|/width)` on `R^p`;
/// * `suspension_odd`: a Hermitian path with `p` and `sign`;
/// * `suspension_even`: a Hermitian path with `k` and cutoff `width`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    #[serde(default = "default_version")]
    pub version: u32,
    pub kind: FamilyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<Knot>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomPath>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ExprKind {
    Rational,
    RadialPower,
    PowerRatio,
    Exponential,
}

/// Input of `regint`:
///
/// * `rational`: `num(mu)/den(mu)` on the line, coefficients `[re, im]` in
///   ascending order;
/// * `radial_power`: `(c + |mu|²)^beta` on `R^p`;
/// * `power_ratio`: `r^a (c + r²)^b` on `(0, ∞)`;
/// * `exponential`: `e^{-rate·r}` on `(0, ∞)`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExprSpec {
    #[serde(default = "default_version")]
    pub version: u32,
    pub kind: ExprKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub den: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

/// Output of every command. Serializes deterministically; `wall_time` is only
/// present when timing was requested.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub operation: String,
    pub input_digest: String,
    pub config: Value,
    pub value: C64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapped: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default)]
    pub parts: BTreeMap<String, C64>,
    #[serde(default)]
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub checks: BTreeMap<String, bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

impl ResultRecord {
    fn new(operation: &str, digest: String, config: Value, value: C64) -> Self {
        ResultRecord {
            schema_version: SCHEMA_VERSION,
            operation: operation.into(),
            input_digest: digest,
            config,
            value,
            snapped: None,
            residual: None,
            parts: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
            checks: BTreeMap::new(),
            wall_time: None,
        }
    }

    fn with_flow(mut self, r: FlowResult) -> Self {
        self.snapped = Some(r.snapped);
        self.residual = Some(r.residual);
        self.parts = r.parts;
        self.diagnostics = r.diagnostics;
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// False when any recorded check failed.
    pub fn passed(&self) -> bool {
        self.checks.values().all(|&b| b)
    }
}

pub fn parse_family(text: &str) -> Result<FamilySpec> {
    let spec: FamilySpec = serde_json::from_str(text)?;
    if spec.version != SCHEMA_VERSION {
        return Err(Error::Precondition(format!("schema version {} is not supported (expected {SCHEMA_VERSION})", spec.version)));
    }
    Ok(spec)
}

pub fn parse_expr(text: &str) -> Result<ExprSpec> {
    let spec: ExprSpec = serde_json::from_str(text)?;
    if spec.version != SCHEMA_VERSION {
        return Err(Error::Precondition(format!("schema version {} is not supported (expected {SCHEMA_VERSION})", spec.version)));
    }
    Ok(spec)
}

fn digest<T: Serialize>(x: &T) -> Result<String> {
    Ok(hex::encode(Sha256::digest(serde_json::to_vec(x)?)))
}

fn echo(cfg: &QuadConfig, options: Value) -> Result<Value> {
    Ok(serde_json::json!({ "quadrature": serde_json::to_value(cfg)?, "options": options }))
}

fn need<T: Copy>(x: Option<T>, what: &str, kind: FamilyKind) -> Result<T> {
    x.ok_or_else(|| Error::Precondition(format!("{kind:?} spec needs `{what}`")))
}

fn knot_matrix(k: &Knot) -> Result<CMat> {
    let n = k.re.len();
    let im = k.im.clone().unwrap_or_else(|| vec![vec![0.0; n]; n]);
    if n == 0 || im.len() != n || k.re.iter().chain(&im).any(|row| row.len() != n) {
        return Err(Error::Dimension(format!("knot at s = {} is not a square matrix", k.s)));
    }
    Ok(CMat::from_fn(n, n, |i, j| C64::new(k.re[i][j], im[i][j])))
}

fn seeded(spec: &FamilySpec) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(spec.seed.unwrap_or(0))
}

/// The Hermitian path carried by a spec (path and suspension kinds).
pub fn hermitian_path(spec: &FamilySpec) -> Result<HermitianPath> {
    match (spec.kind, &spec.knots, &spec.random) {
        (FamilyKind::Winding | FamilyKind::Bump, _, _) => {
            Err(Error::Precondition(format!("{:?} spec does not carry a Hermitian path", spec.kind)))
        }
        (_, Some(knots), _) => HermitianPath::new(knots.iter().map(|k| Ok((k.s, knot_matrix(k)?))).collect::<Result<_>>()?),
        (_, None, Some(r)) => {
            if r.n == 0 || r.knots < 2 {
                return Err(Error::Precondition("random path needs n ≥ 1 and at least 2 knots".into()));
            }
            Ok(HermitianPath::random(&mut seeded(spec), r.n, r.knots))
        }
        _ => Err(Error::Precondition("path spec needs `knots` or `random`".into())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Odd,
    Even,
}

/// Symbol path of a spec with its parity and the `k` of `p = 2k + 1` or `p = 2k`.
pub fn symbol_path(spec: &FamilySpec) -> Result<(SymbolPath, Parity, usize)> {
    match spec.kind {
        FamilyKind::Winding => {
            let g = match spec.n {
                Some(n) => winding_symbol(n)?,
                None => random_winding(&mut seeded(spec), spec.size.unwrap_or(1), spec.max_degree.unwrap_or(2))?.0,
            };
            Ok((winding_path(&g), Parity::Odd, 0))
        }
        FamilyKind::Bump => {
            let p = spec.p.unwrap_or(1);
            if p % 2 == 0 || p > 3 {
                return Err(Error::Precondition(format!("bump family needs p ∈ {{1, 3}}, got {p}")));
            }
            let [re, im] = need(spec.amplitude, "amplitude", spec.kind)?;
            let bump = ParamSymbol::bump(p, spec.width.unwrap_or(1.0)).scale(C64::new(re, im));
            Ok((winding_path(&ParamSymbol::identity(p, 1).add(&bump)), Parity::Odd, p / 2))
        }
        FamilyKind::SuspensionOdd => {
            let p = spec.p.unwrap_or(1);
            Ok((suspend_odd(&hermitian_path(spec)?, p, spec.sign.unwrap_or(1.0).signum())?, Parity::Odd, p / 2))
        }
        FamilyKind::SuspensionEven => {
            let k = spec.k.unwrap_or(1);
            Ok((almost_idempotent_path(&hermitian_path(spec)?, k, spec.width.unwrap_or(1.0))?, Parity::Even, k))
        }
        FamilyKind::HermitianPath => {
            Err(Error::Precondition("a bare Hermitian path has no divisor flow; use `suspend`".into()))
        }
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn cmd_sf(spec: &FamilySpec, cfg: &QuadConfig) -> Result<ResultRecord> {
    let path = hermitian_path(spec)?;
    let sf = spectral_flow_detailed(&path, cfg.s_nodes)?;
    let mut rec = ResultRecord::new("sf", digest(spec)?, echo(cfg, serde_json::json!({}))?, real(sf.value as f64));
    rec.snapped = Some(sf.value);
    rec.residual = Some(0.0);
    rec.parts.insert("up".into(), real(sf.up as f64));
    rec.parts.insert("down".into(), real(-(sf.down as f64)));
    for (i, (s, dir)) in sf.crossings.iter().enumerate() {
        rec.diagnostics.insert(format!("crossing_{i:03}_s"), *s);
        rec.diagnostics.insert(format!("crossing_{i:03}_direction"), *dir as f64);
    }
    rec.diagnostics.insert("grid_points".into(), sf.grid_points as f64);
    Ok(rec)
}

/// Eta invariants of the matrix at `s = 0` of the spec's path.
pub fn cmd_eta(spec: &FamilySpec, p: usize, cfg: &QuadConfig) -> Result<ResultRecord> {
    let d = hermitian_path(spec)?.at(0.0);
    let eta = eta_parametric(&d, p, cfg)?;
    let mut rec = ResultRecord::new("eta", digest(spec)?, echo(cfg, serde_json::json!({ "p": p }))?, real(eta));
    rec.snapped = Some(eta.round() as i64);
    rec.residual = Some((eta - eta.round()).abs());
    rec.parts.insert("eta_spectral".into(), real(eta_spectral(&d)));
    rec.parts.insert("eta_reduced".into(), real(eta_reduced(&d)));
    rec.parts.insert("eta_radial".into(), real(eta_radial_crosscheck(&d, p, cfg)?));
    if p % 2 == 0 {
        let e = idempotent_from_d(&d, p / 2)?;
        rec.parts.insert("eta_even_idempotent".into(), eta_even(&e, cfg)?);
    }
    Ok(rec)
}

pub fn cmd_df(spec: &FamilySpec, k: Option<usize>, parity: Option<Parity>, cfg: &QuadConfig) -> Result<ResultRecord> {
    let (path, par, kk) = symbol_path(spec)?;
    if let Some(k) = k.filter(|&k| k != kk) {
        return Err(Error::Precondition(format!("--k {k} does not match the family (k = {kk})")));
    }
    if let Some(q) = parity.filter(|&q| q != par) {
        return Err(Error::Precondition(format!("--parity {q:?} does not match the family ({par:?})")));
    }
    let r = match par {
        Parity::Odd => divisor_flow_odd(&path, kk, cfg)?,
        Parity::Even => divisor_flow_even(&path, kk, cfg)?,
    };
    let options = serde_json::json!({ "k": kk, "parity": par });
    Ok(ResultRecord::new("df", digest(spec)?, echo(cfg, options)?, r.value).with_flow(r))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Suspension {
    Odd { p: usize, sign: f64 },
    Even { k: usize },
}

/// Suspends the spec's Hermitian path and compares its divisor flow with
/// `±` the spectral flow.
pub fn cmd_suspend(spec: &FamilySpec, how: Suspension, cfg: &QuadConfig) -> Result<ResultRecord> {
    let path = hermitian_path(spec)?;
    let sf = spectral_flow(&path, cfg.s_nodes)?;
    let (r, expected, options) = match how {
        Suspension::Odd { p, sign } => {
            let r = divisor_flow_odd(&suspend_odd(&path, p, sign)?, p / 2, cfg)?;
            (r, sign.signum() as i64 * sf, serde_json::json!({ "p": p, "sign": sign.signum() }))
        }
        Suspension::Even { k } => {
            let r = divisor_flow_even(&almost_idempotent_path(&path, k, spec.width.unwrap_or(1.0))?, k, cfg)?;
            (r, sf, serde_json::json!({ "k": k }))
        }
    };
    let snapped = r.snapped;
    let mut rec = ResultRecord::new("suspend", digest(spec)?, echo(cfg, options)?, r.value).with_flow(r);
    rec.diagnostics.insert("sf".into(), sf as f64);
    rec.diagnostics.insert("df_snapped".into(), snapped as f64);
    rec.checks.insert("match".into(), snapped == expected);
    Ok(rec)
}

pub fn cmd_regint(expr: &ExprSpec, cfg: &QuadConfig) -> Result<ResultRecord> {
    let need = |x: Option<f64>, what: &str| x.ok_or_else(|| Error::Precondition(format!("{:?} expression needs `{what}`", expr.kind)));
    let coeffs = |v: &Option<Vec<[f64; 2]>>, what: &str| -> Result<Vec<C64>> {
        let v = v.as_ref().ok_or_else(|| Error::Precondition(format!("rational expression needs `{what}`")))?;
        Ok(v.iter().map(|[re, im]| C64::new(*re, *im)).collect())
    };
    let depth = expr.depth.unwrap_or(12);
    let value = match expr.kind {
        ExprKind::Rational => {
            let f = ParamSymbol::rational_1d(&coeffs(&expr.num, "num")?, &coeffs(&expr.den, "den")?, depth)?;
            reg_integral(&f, cfg)?
        }
        ExprKind::RadialPower => {
            let p = expr.p.unwrap_or(1);
            reg_integral(&ParamSymbol::radial_power(p, need(expr.c, "c")?, need(expr.beta, "beta")?, depth)?, cfg)?
        }
        ExprKind::PowerRatio => {
            let g = RadialFunction::power_ratio(need(expr.a, "a")?, need(expr.c, "c")?, need(expr.b, "b")?, depth)?;
            reg_integral_radial(&g, cfg)?
        }
        ExprKind::Exponential => {
            let rate = need(expr.rate, "rate")?;
            if rate <= 0.0 {
                return Err(Error::Precondition("exponential needs a positive rate".into()));
            }
            let g = RadialFunction {
                eval: std::sync::Arc::new(move |r| real((-rate * r).exp())),
                at_infinity: vec![],
                remainder_infinity: f64::NEG_INFINITY,
                at_zero: vec![],
            };
            reg_integral_radial(&g, cfg)?
        }
    };
    Ok(ResultRecord::new("regint", digest(expr)?, echo(cfg, serde_json::json!({ "depth": depth }))?, value))
}

pub fn cmd_verify(suite: &str, seed: u64, cfg: &QuadConfig) -> Result<ResultRecord> {
    let checks: Vec<Check> = run_suite(suite, seed, cfg)?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    let options = serde_json::json!({ "suite": suite, "seed": seed });
    let mut rec = ResultRecord::new("verify", digest(&options)?, echo(cfg, options)?, real(failed as f64));
    for c in checks {
        rec.diagnostics.insert(format!("{}.residual", c.name), c.residual);
        rec.diagnostics.insert(format!("{}.tol", c.name), c.tol);
        rec.checks.insert(c.name, c.pass);
    }
    Ok(rec)
}

/// CSV with sorted eigenvalues and the reduced eta invariant along the path.
pub fn cmd_trace(spec: &FamilySpec, cfg: &QuadConfig) -> Result<String> {
    let path = hermitian_path(spec)?;
    let n = path.n();
    let samples = 8 * cfg.s_nodes;
    let mut out = String::from("s");
    for i in 0..n {
        write!(out, ",lambda_{i}").unwrap();
    }
    out.push_str(",eta_reduced,eta_reduced_mod1\n");
    for j in 0..=samples {
        let s = j as f64 / samples as f64;
        let d = path.at(s);
        write!(out, "{s}").unwrap();
        for l in eigvalsh(&d) {
            write!(out, ",{l}").unwrap();
        }
        let eta = eta_reduced(&d);
        writeln!(out, ",{eta},{}", eta.rem_euclid(1.0)).unwrap();
    }
    Ok(out)
}
