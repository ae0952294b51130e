use divflow::cyclic::*;
use divflow::flows::{conjugated_diagonal, rational_symbol};
use divflow::linalg::{random_hermitian, random_unitary, trace, CMat};
use divflow::regint::QuadConfig;
use divflow::symbol::ParamSymbol;
use divflow::{Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `tr(X_0 a_0(x_0) X_1 (a_1(x_1) - a_1(y_1)) ⋯)`: multilinear and zero
/// whenever a letter past the first is constant, so it sees the normalized complex.
struct Probe {
    xs: Vec<CMat>,
    pts: Vec<(f64, f64)>,
}

impl Probe {
    fn new(rng: &mut ChaCha8Rng, n: usize, max_degree: usize) -> Self {
        let xs = (0..=max_degree).map(|_| random_hermitian(rng, n, 1.0)).collect();
        let pts = (0..=max_degree).map(|_| (rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5))).collect();
        Probe { xs, pts }
    }

    fn eval(&self, w: &[ParamSymbol]) -> C64 {
        let n = self.xs[0].nrows();
        let mut m = &self.xs[0] * w[0].eval(&[self.pts[0].0]);
        for (j, a) in w.iter().enumerate().skip(1) {
            let (x, y) = self.pts[j];
            m = m * &self.xs[j] * (a.eval(&[x]) - a.eval(&[y]));
        }
        assert_eq!(m.nrows(), n);
        trace(&m)
    }

    fn on(&self, chain: &TensorChain, deg: usize) -> C64 {
        chain.evaluate_with(deg, |w| Ok(self.eval(w))).unwrap()
    }
}

fn b_plus_b(chain: &TensorChain) -> TensorChain {
    b_chain(chain).add(&B_chain(chain))
}

/// Richardson-extrapolated central difference.
fn ddx(f: impl Fn(f64) -> C64, x: f64, h: f64) -> C64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (d(h / 2.0) * 4.0 - d(h)) / 3.0
}

fn close(a: C64, b: C64, rel: f64) -> bool {
    (a - b).norm() <= rel * a.norm().max(b.norm()).max(1e-3)
}

/// `D - iμ` with Hermitian positive `D`.
fn resolvent_type(d: &CMat) -> ParamSymbol {
    let n = d.nrows();
    let mu = ParamSymbol::coordinate(1, 0).kron_right(&CMat::identity(n, n));
    ParamSymbol::constant(1, d.clone()).add(&mu.scale(c(0.0, -1.0)))
}

fn positive(rng: &mut ChaCha8Rng) -> CMat {
    random_hermitian(rng, 2, 0.3) + CMat::identity(2, 2) * c(2.0, 0.0)
}

#[test]
fn odd_transgression() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (d0, d1) = (positive(&mut rng), random_hermitian(&mut rng, 2, 0.5));
    let probe = Probe::new(&mut rng, 2, 4);
    let g = |s: f64| resolvent_type(&(&d0 + &d1 * c(s, 0.0)));
    let s0 = 0.3;
    for deg in [1, 3] {
        let lhs = ddx(|s| probe.on(&ch_odd(&g(s), 1).unwrap(), deg), s0, 1e-4);
        let sec = ch_sec_odd(&g(s0), &ParamSymbol::constant(1, d1.clone()), 1).unwrap();
        let rhs = probe.on(&b_plus_b(&sec), deg);
        assert!(close(lhs, rhs, 1e-4), "degree {deg}: {lhs} vs {rhs}");
    }
}

#[test]
fn secondary_transgression() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let d0 = positive(&mut rng);
    let (hs, ht) = (random_hermitian(&mut rng, 2, 0.5), random_hermitian(&mut rng, 2, 0.5));
    let probe = Probe::new(&mut rng, 2, 4);
    let g = |s: f64, t: f64| resolvent_type(&(&d0 + &hs * c(s, 0.0) + &ht * c(t, 0.0)));
    let (cs, ct) = (ParamSymbol::constant(1, hs.clone()), ParamSymbol::constant(1, ht.clone()));
    let (s0, t0) = (0.2, -0.1);
    for deg in [0, 2, 4] {
        let ds = ddx(|s| probe.on(&ch_sec_odd(&g(s, t0), &ct, 1).unwrap(), deg), s0, 1e-4);
        let dt = ddx(|t| probe.on(&ch_sec_odd(&g(s0, t), &cs, 1).unwrap(), deg), t0, 1e-4);
        let rhs = probe.on(&b_plus_b(&ch_sec2_odd(&g(s0, t0), &cs, &ct, 1).unwrap()), deg);
        assert!(close(ds - dt, rhs, 1e-3), "degree {deg}: {} vs {rhs}", ds - dt);
    }
}

#[test]
fn secondary_character_with_equal_arguments() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = resolvent_type(&positive(&mut rng));
    let h = ParamSymbol::constant(1, random_hermitian(&mut rng, 2, 1.0));
    let probe = Probe::new(&mut rng, 2, 5);
    // with h_1 = h_2 only the leading -g^{-1}h ⊗ g^{-1}h survives
    let chain = ch_sec2_odd(&g, &h, &h, 1).unwrap();
    assert!(probe.on(&chain, 3).norm() < 1e-12);
    let x = divflow::symbol::sym_inv(&g, None).unwrap().mul(&h);
    let lead = probe.eval(&[x.clone(), x]);
    assert!((probe.on(&chain, 1) + lead).norm() < 1e-12);
    let one = ParamSymbol::identity(1, 1);
    let (h1, h2) = (ParamSymbol::coordinate(1, 0), ParamSymbol::scalar(1, c(0.5, 1.0)));
    let chain = ch_sec2_odd(&one, &h1, &h2, 0).unwrap();
    let lowest = chain.component(1);
    assert_eq!(lowest.len(), 1);
    let (z, w) = &lowest[0];
    assert_eq!(*z, c(-1.0, 0.0));
    assert_eq!(w[0].eval(&[0.7])[(0, 0)], c(0.7, 0.0));
    assert_eq!(w[1].eval(&[0.7])[(0, 0)], c(0.5, 1.0));
}

/// The rank-one projection onto `(cos a, e^{iμ} sin a)`, `a = s + μ/5`.
fn rotating(s: f64) -> (ParamSymbol, ParamSymbol) {
    let vec_at = move |mu: f64, da: bool| {
        let a = s + 0.2 * mu;
        let ph = c(mu.cos(), mu.sin());
        if da {
            [c(-a.sin(), 0.0), ph * a.cos()]
        } else {
            [c(a.cos(), 0.0), ph * a.sin()]
        }
    };
    let outer = |u: [C64; 2], v: [C64; 2]| CMat::from_fn(2, 2, |i, j| u[i] * v[j].conj());
    let e = ParamSymbol::from_fn(
        1,
        2,
        0.0,
        Arc::new(move |mu: &[f64]| {
            let v = vec_at(mu[0], false);
            outer(v, v)
        }),
        None,
        vec![],
        f64::NEG_INFINITY,
    );
    let edot = ParamSymbol::from_fn(
        1,
        2,
        0.0,
        Arc::new(move |mu: &[f64]| {
            let (v, w) = (vec_at(mu[0], false), vec_at(mu[0], true));
            outer(w, v) + outer(v, w)
        }),
        None,
        vec![],
        f64::NEG_INFINITY,
    );
    (e, edot)
}

#[test]
fn even_transgression() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let probe = Probe::new(&mut rng, 2, 5);
    let s0 = 0.4;
    let (e, edot) = rotating(s0);
    let one = ParamSymbol::identity(1, 2);
    let h = e.scale(c(2.0, 0.0)).sub(&one).mul(&edot);
    let rhs_chain = b_plus_b(&ch_sec_even(&e, &h, 2).unwrap());
    for deg in [0, 2, 4] {
        let lhs = ddx(|s| probe.on(&ch_even(&rotating(s).0, 2).unwrap(), deg), s0, 1e-4);
        let rhs = probe.on(&rhs_chain, deg);
        assert!(close(lhs, rhs, 1e-4), "degree {deg}: {lhs} vs {rhs}");
    }
}

fn random_line_symbol(rng: &mut ChaCha8Rng) -> ParamSymbol {
    let mut draw = || c(rng.gen_range(-1.0..1.0), rng.gen_range(0.4..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
    let blocks = vec![rational_symbol(&[draw()], &[draw()]).unwrap(), rational_symbol(&[draw(), draw()], &[draw(), draw()]).unwrap()];
    conjugated_diagonal(&blocks, &random_unitary(rng, 2))
}

#[test]
fn character_is_a_relative_cocycle() -> Result<()> {
    let cfg = QuadConfig::default();
    let (phi1, psi0) = reg_character(1, &cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..3 {
        let a: Vec<ParamSymbol> = (0..3).map(|_| random_line_symbol(&mut rng)).collect();
        let bphi = pair(&phi1, &b_chain(&TensorChain::word(c(1.0, 0.0), a.clone())))?;
        assert!(bphi.norm() < 1e-6, "bφ = {bphi}");
        let word = TensorChain::word(c(1.0, 0.0), vec![a[0].clone()]);
        let big = pair(&phi1, &B_chain(&word))?;
        let bdry = psi0.eval(&a[..1])?;
        assert!((big - bdry).norm() < 1e-6, "Bφ = {big}, σ*ψ = {bdry}");
    }
    Ok(())
}
