use std::collections::BTreeMap;
use std::f64::consts::PI;

use divflow::clifford::build_clifford;
use divflow::cyclic::{b_chain, TensorChain};
use divflow::flows::*;
use divflow::forms::{ext_d, OperatorForm};
use divflow::harness::{ResultRecord, SCHEMA_VERSION};
use divflow::linalg::{eigvalsh, max_abs, random_hermitian, trace, CMat};
use divflow::regint::{reg_integral, tail_constant_term, QuadConfig};
use divflow::symbol::{sym_inv, ParamSymbol};
use divflow::C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clifford_square_is_minus_norm(p in 1usize..=5, raw in prop::collection::vec(-10.0f64..10.0, 5)) {
        let rep = build_clifford(p).unwrap();
        let mu = &raw[..p];
        let cm = rep.c_of_mu(mu);
        let r2: f64 = mu.iter().map(|x| x * x).sum();
        let n = rep.dim;
        prop_assert!(max_abs(&(&cm * &cm + CMat::identity(n, n) * c(r2, 0.0))) < 1e-12 * (1.0 + r2));
        prop_assert!(max_abs(&(cm.adjoint() + &cm)) < 1e-12);
    }

    #[test]
    fn resolvent_inverse(lambda in 0.1f64..5.0, mu in -50.0f64..50.0) {
        let a = ParamSymbol::scalar(1, c(lambda, 0.0)).add(&ParamSymbol::coordinate(1, 0).scale(c(0.0, -1.0)));
        let ai = sym_inv(&a, None).unwrap();
        let z = ai.eval(&[mu])[(0, 0)];
        prop_assert!((z * c(lambda, -mu) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn d_squared_vanishes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = |j| ParamSymbol::coordinate(3, j);
        let mut poly = || {
            (0..4).fold(ParamSymbol::scalar(3, c(rng.gen_range(-1.0..1.0), 0.0)), |acc, _| {
                let m = x(rng.gen_range(0..3)).mul(&x(rng.gen_range(0..3)));
                acc.add(&m.scale(c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            })
        };
        let items = vec![(vec![0], poly()), (vec![2], poly()), (vec![0, 1], poly())];
        let form = OperatorForm::from_coeffs(3, 1, items).unwrap();
        prop_assert!(ext_d(&ext_d(&form)).is_zero());
    }

    #[test]
    fn hochschild_boundary_squares_to_zero(seed in any::<u64>(), deg in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let letters: Vec<ParamSymbol> = (0..3).map(|_| ParamSymbol::constant(1, random_hermitian(&mut rng, 2, 1.0))).collect();
        let mut ch = TensorChain::zero(1, 2);
        for _ in 0..4 {
            let word = (0..=deg).map(|_| letters[rng.gen_range(0..3)].clone()).collect();
            ch.push(c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), word);
        }
        let xs: Vec<CMat> = (0..=deg).map(|_| random_hermitian(&mut rng, 2, 1.0)).collect();
        let bb = b_chain(&b_chain(&ch));
        for d in bb.degrees() {
            let v = bb.evaluate_with(d, |w| {
                let m = w.iter().zip(&xs).fold(CMat::identity(2, 2), |acc, (a, x)| acc * x * a.eval(&[0.0]));
                Ok(trace(&m))
            }).unwrap();
            prop_assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn tail_constant_of_a_power(alpha in -4.0f64..-1.2, r0 in 0.3f64..3.0) {
        // ∫_{r0}^∞ r^alpha dr converges, so the constant term is the whole integral
        let v = tail_constant_term(alpha, 0, c(2.0, 0.0), r0, 1);
        prop_assert!((v - 2.0 * r0.powf(alpha + 1.0) / -(alpha + 1.0)).norm() < 1e-12);
    }

    #[test]
    fn spectral_flow_reverses_with_the_path(seed in any::<u64>(), n in 1usize..4) {
        let path = HermitianPath::random(&mut ChaCha8Rng::seed_from_u64(seed), n, 3);
        let back = HermitianPath::new(path.knots().iter().rev().map(|(s, m)| (1.0 - s, m.clone())).collect()).unwrap();
        let sf = spectral_flow(&path, 16).unwrap();
        prop_assert_eq!(spectral_flow(&back, 16).unwrap(), -sf);
        let signature = |s: f64| eigvalsh(&path.at(s)).iter().map(|l| l.signum()).sum::<f64>();
        prop_assert_eq!(2 * sf, (signature(1.0) - signature(0.0)) as i64);
    }

    #[test]
    fn seeds_reproduce_families(seed in any::<u64>()) {
        let a = HermitianPath::random(&mut ChaCha8Rng::seed_from_u64(seed), 2, 3);
        let b = HermitianPath::random(&mut ChaCha8Rng::seed_from_u64(seed), 2, 3);
        prop_assert_eq!(a.knots(), b.knots());
    }

    #[test]
    fn result_record_round_trip(re in any::<f64>(), im in -1e300f64..1e300, x in any::<f64>(), snapped in any::<i64>()) {
        prop_assume!(re.is_finite() && x.is_finite());
        let rec = ResultRecord {
            schema_version: SCHEMA_VERSION,
            operation: "df".into(),
            input_digest: "00".into(),
            config: serde_json::json!({ "tol": x }),
            value: c(re, im),
            snapped: Some(snapped),
            residual: Some(x.abs()),
            parts: BTreeMap::from([("endpoint_0".to_string(), c(x, re))]),
            diagnostics: BTreeMap::from([("grid_points".to_string(), x)]),
            checks: BTreeMap::new(),
            wall_time: None,
        };
        let text = rec.to_json().unwrap();
        let back = ResultRecord::from_json(&text).unwrap();
        prop_assert_eq!(&back, &rec);
        prop_assert_eq!(back.to_json().unwrap(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn regularized_integral_is_linear(a in 0.3f64..4.0, x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let cfg = QuadConfig::default();
        let (zero, one) = (c(0.0, 0.0), c(1.0, 0.0));
        let lorentz = ParamSymbol::rational_1d(&[one], &[c(a, 0.0), zero, one], 12).unwrap();
        let complement = ParamSymbol::rational_1d(&[zero, zero, one], &[c(a, 0.0), zero, one], 12).unwrap();
        let (l, m) = (reg_integral(&lorentz, &cfg).unwrap(), reg_integral(&complement, &cfg).unwrap());
        // closed forms π/√a and -π√a
        prop_assert!((l - PI / a.sqrt()).norm() < 1e-7);
        prop_assert!((m + PI * a.sqrt()).norm() < 1e-7);
        let mix = reg_integral(&lorentz.scale(c(x, 0.0)).add(&complement.scale(c(0.0, y))), &cfg).unwrap();
        prop_assert!((mix - (l * x + m * c(0.0, y))).norm() < 1e-7);
    }

    #[test]
    fn eta_is_odd_and_equals_the_signature(seed in any::<u64>(), n in 1usize..4) {
        let cfg = QuadConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_hermitian(&mut rng, n, 1.0);
        prop_assume!(eigvalsh(&d).iter().all(|l| l.abs() > 0.05));
        let eta = eta_parametric(&d, 1, &cfg).unwrap();
        prop_assert!((eta - eta_spectral(&d)).abs() < 1e-6);
        prop_assert!((eta_parametric(&(-d), 1, &cfg).unwrap() + eta).abs() < 1e-6);
    }
}
