//! Quadrature building blocks: adaptive Gauss-Kronrod on intervals, Gauss-Legendre
//! nodes and product rules on low-dimensional spheres.

use std::collections::BinaryHeap;
use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::C64;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// The 15 Kronrod abscissae mapped to `[a, b]`.
fn gk_nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [0.0; 15];
    for i in 0..7 {
        x[2 * i] = c - h * XGK[i];
        x[2 * i + 1] = c + h * XGK[i];
    }
    x[14] = c;
    x
}

fn gk_combine(a: f64, b: f64, v: &[C64]) -> (C64, f64) {
    let h = 0.5 * (b - a);
    let mut k = v[14] * WGK[7];
    let mut g = v[14] * WG[3];
    for i in 0..7 {
        let s = v[2 * i] + v[2 * i + 1];
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

struct Panel {
    a: f64,
    b: f64,
    val: C64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive 7-15 Gauss-Kronrod. The integrand receives a batch of
/// abscissae and returns the values in the same order, so callers can
/// parallelise inside.
pub fn gk_adaptive(
    f: &(dyn Fn(&[f64]) -> Vec<C64> + Sync),
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<(C64, f64)> {
    if a == b {
        return Ok((C64::new(0.0, 0.0), 0.0));
    }
    let eval = |a: f64, b: f64| -> Panel {
        let x = gk_nodes(a, b);
        let v = f(&x);
        let (val, err) = gk_combine(a, b, &v);
        Panel { a, b, val, err }
    };
    let mut heap = BinaryHeap::new();
    let first = eval(a, b);
    let mut total = first.val;
    let mut err = first.err;
    heap.push(first);
    while err > abs_tol.max(rel_tol * total.norm()) {
        if heap.len() >= max_panels {
            return Err(Error::NonConvergence(format!(
                "adaptive quadrature on [{a}, {b}] stalled at error {err:.3e}"
            )));
        }
        let worst = heap.pop().unwrap();
        let m = 0.5 * (worst.a + worst.b);
        let l = eval(worst.a, m);
        let r = eval(m, worst.b);
        total += l.val + r.val - worst.val;
        err += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::NonConvergence("integrand is not finite".into()));
        }
    }
    // re-sum in a fixed order so the result does not depend on heap history
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let total = panels.iter().fold(C64::new(0.0, 0.0), |s, p| s + p.val);
    let err = panels.iter().map(|p| p.err).sum();
    Ok((total, err))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Golub-Welsch).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    // symmetrise to remove eigen-solver noise
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let k = n - 1 - i;
        x[i] = 0.5 * (pairs[i].0 - pairs[k].0);
        w[i] = 0.5 * (pairs[i].1 + pairs[k].1);
    }
    (x, w)
}

/// Composite Gauss rule on `[0, 1]` split at `breaks`, `n` nodes per piece.
pub fn composite_gauss(breaks: &[f64], n: usize) -> Vec<(f64, f64)> {
    let mut cuts = vec![0.0];
    for &b in breaks {
        if b > 0.0 && b < 1.0 {
            cuts.push(b);
        }
    }
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let (x, w) = gauss_legendre(n);
    let mut out = vec![];
    for win in cuts.windows(2) {
        let (a, b) = (win[0], win[1]);
        let h = 0.5 * (b - a);
        for (xi, wi) in x.iter().zip(&w) {
            out.push((a + h * (xi + 1.0), wi * h));
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct SphereRule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// `p = 1`: the two points `±1`; `p = 2`: trapezoid with `circle` nodes;
    /// `p = 3`: Gauss-Legendre in `cos θ` times trapezoid in `φ`.
    pub fn new(p: usize, circle: usize, theta: usize, phi: usize) -> Result<SphereRule> {
        match p {
            1 => Ok(SphereRule { points: vec![vec![1.0], vec![-1.0]], weights: vec![1.0, 1.0] }),
            2 => {
                let w = 2.0 * PI / circle as f64;
                let points = (0..circle)
                    .map(|k| {
                        let t = 2.0 * PI * k as f64 / circle as f64;
                        vec![t.cos(), t.sin()]
                    })
                    .collect();
                Ok(SphereRule { points, weights: vec![w; circle] })
            }
            3 => {
                let (z, wz) = gauss_legendre(theta);
                let mut points = vec![];
                let mut weights = vec![];
                for (zi, wi) in z.iter().zip(&wz) {
                    let r = (1.0 - zi * zi).sqrt();
                    for k in 0..phi {
                        let t = 2.0 * PI * (k as f64 + 0.5) / phi as f64;
                        points.push(vec![r * t.cos(), r * t.sin(), *zi]);
                        weights.push(wi * 2.0 * PI / phi as f64);
                    }
                }
                Ok(SphereRule { points, weights })
            }
            _ => Err(Error::Precondition(format!("no sphere rule for p = {p}"))),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Area of the unit sphere `S^{p-1}`.
pub fn sphere_area(p: usize) -> f64 {
    let h = p as f64 / 2.0;
    2.0 * PI.powf(h) / statrs::function::gamma::gamma(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((i - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn kronrod_handles_smooth_and_peaked_integrands() {
        let f = |xs: &[f64]| xs.iter().map(|&x| C64::new(1.0 / (1.0 + x * x), 0.0)).collect();
        let (v, _) = gk_adaptive(&f, -50.0, 50.0, 1e-12, 1e-12, 500).unwrap();
        assert!((v.re - 2.0 * 50f64.atan()).abs() < 1e-11);
        let g = |xs: &[f64]| xs.iter().map(|&x| C64::new(0.0, (-1e4 * (x - 0.3).powi(2)).exp())).collect();
        let (v, _) = gk_adaptive(&g, 0.0, 1.0, 1e-13, 1e-13, 500).unwrap();
        assert!((v.im - (PI / 1e4).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sphere_rules_have_the_right_area() {
        for (p, r) in [(1, SphereRule::new(1, 0, 0, 0)), (2, SphereRule::new(2, 256, 0, 0)), (3, SphereRule::new(3, 0, 24, 48))] {
            let r = r.unwrap();
            let a: f64 = r.weights.iter().sum();
            assert!((a - sphere_area(p)).abs() < 1e-12, "p = {p}");
        }
        let r = SphereRule::new(3, 0, 24, 48).unwrap();
        let m: f64 = r.points.iter().zip(&r.weights).map(|(x, w)| w * x[2].powi(4)).sum();
        assert!((m - 4.0 * PI / 5.0).abs() < 1e-12);
        assert!(r.len() >= 590);
    }
}
