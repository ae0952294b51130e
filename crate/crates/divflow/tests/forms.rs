use divflow::forms::*;
use divflow::linalg::{max_abs, CMat};
use divflow::regint::QuadConfig;
use divflow::symbol::{sym_inv, ParamSymbol};
use divflow::C64;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn unit(i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(2, 2);
    m[(i, j)] = c(1.0, 0.0);
    m
}

fn mat(v: [f64; 8]) -> CMat {
    CMat::from_row_slice(2, 2, &[c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]), c(v[6], v[7])])
}

fn x(j: usize) -> ParamSymbol {
    ParamSymbol::coordinate(2, j)
}

fn rho(beta: f64) -> ParamSymbol {
    ParamSymbol::radial_power(2, 1.0, beta, 10).unwrap()
}

#[test]
fn wedge_examples() {
    let f = ParamSymbol::scalar(2, c(2.0, 0.0));
    let g = x(0);
    let one = |a: &ParamSymbol, j| OperatorForm::from_coeffs(2, 1, vec![(vec![j], a.clone())]).unwrap();
    assert!(wedge(&one(&f, 0), &one(&g, 0)).is_zero());
    let fg = wedge(&one(&f, 0), &one(&g, 1));
    let gf = wedge(&one(&g, 1), &one(&f, 0));
    let mu = [0.3, -1.2];
    let top = fg.coefficient(&[0, 1]).unwrap().eval(&mu)[(0, 0)];
    assert_eq!(top, c(0.6, 0.0));
    assert_eq!(gf.coefficient(&[0, 1]).unwrap().eval(&mu)[(0, 0)], -top);

    let a = OperatorForm::from_coeffs(2, 2, vec![(vec![0], ParamSymbol::constant(2, unit(0, 1)))]).unwrap();
    let b = OperatorForm::from_coeffs(2, 2, vec![(vec![1], ParamSymbol::constant(2, unit(1, 0)))]).unwrap();
    let ab = wedge(&a, &b);
    assert_eq!(ab.degree(), Some(2));
    assert!(max_abs(&(ab.coefficient(&[0, 1]).unwrap().eval(&mu) - unit(0, 0))) == 0.0);
}

#[test]
fn exterior_derivative_signs() {
    let w = OperatorForm::from_coeffs(2, 1, vec![(vec![0], x(1))]).unwrap();
    let dw = ext_d(&w);
    assert_eq!(dw.coefficient(&[0, 1]).unwrap().eval(&[0.4, 0.9])[(0, 0)], c(-1.0, 0.0));
    assert!(differential(&ParamSymbol::scalar(2, c(3.0, 1.0))).is_zero());
}

#[test]
fn leibniz_rule() {
    let a = x(0).mul(&x(1)).add(&x(1));
    let b = x(0).mul(&x(0)).scale(c(0.0, 2.0));
    let w = OperatorForm::from_coeffs(2, 1, vec![(vec![0], a.clone()), (vec![1], b.clone())]).unwrap();
    let f = OperatorForm::scalar(&x(0).add(&ParamSymbol::scalar(2, c(1.0, 0.0))));
    // d(f w) = df ∧ w + f dw
    let lhs = ext_d(&wedge(&f, &w));
    let rhs = wedge(&ext_d(&f), &w).add(&wedge(&f, &ext_d(&w)));
    for mu in [[0.2, 0.7], [-1.5, 2.0]] {
        let l = lhs.coefficient(&[0, 1]).unwrap().eval(&mu);
        let r = rhs.coefficient(&[0, 1]).unwrap().eval(&mu);
        assert!(max_abs(&(l - r)) < 1e-12);
    }
}

#[test]
fn graded_trace_in_the_plane() {
    let cfg = QuadConfig::default();
    let a = rho(-1.0).kron_left(&mat([1.0, 0.0, 0.5, -1.0, 0.2, 0.0, -0.3, 0.4]));
    let b = x(0).mul(&rho(-0.5)).kron_left(&mat([0.0, 1.0, 2.0, 0.0, -1.0, 0.3, 0.5, 0.0]));
    let e = x(1).mul(&rho(-1.0)).kron_left(&mat([0.3, 0.0, 0.0, 1.0, 1.0, 1.0, -2.0, 0.0]));
    let w = OperatorForm::from_coeffs(2, 2, vec![(vec![0], a.clone()), (vec![1], e.clone())]).unwrap();
    let v = OperatorForm::from_coeffs(2, 2, vec![(vec![1], b.clone()), (vec![0], a.mul(&b))]).unwrap();
    // two one-forms: ω∧η + η∧ω
    let t = tr_bar(&wedge(&w, &v).add(&wedge(&v, &w)), &cfg).unwrap();
    assert!(t.norm() < 1e-7, "{t}");
    // a zero-form against a two-form
    let top = OperatorForm::from_coeffs(2, 2, vec![(vec![0, 1], a.mul(&e))]).unwrap();
    let z = OperatorForm::scalar(&b.add(&ParamSymbol::constant(2, unit(1, 0))));
    let t = tr_bar(&wedge(&z, &top).add(&wedge(&top, &z).scale(c(-1.0, 0.0))), &cfg).unwrap();
    assert!(t.norm() < 1e-7, "{t}");
}

#[test]
fn stokes_with_boundary_in_the_plane() {
    let cfg = QuadConfig::default();
    // μ_1/(1 + |μ|²) dμ_2 has boundary value ∮ cos²θ dθ = π
    let eta = OperatorForm::from_coeffs(2, 1, vec![(vec![1], x(0).mul(&rho(-1.0)))]).unwrap();
    let sphere = tr_tilde(&eta, &cfg).unwrap();
    assert!((sphere - PI).norm() < 1e-9, "{sphere}");
    assert!((tr_tilde_by_definition(&eta, &cfg).unwrap() - PI).norm() < 1e-6);

    let g = x(0).mul(&x(1)).add(&ParamSymbol::scalar(2, c(0.0, 1.0))).mul(&rho(-1.5));
    let h = x(1).mul(&x(1)).scale(c(2.0, -1.0)).mul(&rho(-1.0)).add(&rho(-2.0));
    let eta = OperatorForm::from_coeffs(2, 1, vec![(vec![0], g), (vec![1], h)]).unwrap();
    let a = tr_tilde(&eta, &cfg).unwrap();
    let b = tr_tilde_by_definition(&eta, &cfg).unwrap();
    assert!((a - b).norm() < 1e-6, "{a} vs {b}");
}

#[test]
fn formal_trace_is_closed() {
    let cfg = QuadConfig::default();
    let f = x(0).mul(&x(0)).add(&x(1).scale(c(0.0, 3.0))).mul(&rho(-0.5));
    let v = tr_tilde(&differential(&f), &cfg).unwrap();
    assert!(v.norm() < 1e-7, "{v}");
}

#[test]
fn character_values_on_the_line() {
    let cfg = QuadConfig::default();
    let mu = ParamSymbol::coordinate(1, 0);
    let i = ParamSymbol::scalar(1, c(0.0, 1.0));
    let g = mu.sub(&i).mul(&sym_inv(&mu.add(&i), None).unwrap());
    let ginv = sym_inv(&g, None).unwrap();
    let v = phi(&[ginv, g], &cfg).unwrap();
    assert!((v - c(0.0, 2.0 * PI)).norm() < 1e-8, "{v}");

    let b0 = mu.mul(&ParamSymbol::radial_power(1, 1.0, -0.5, 8).unwrap());
    assert!((psi(&[b0], &cfg).unwrap() - 2.0).norm() < 1e-12);
    let smooth = ParamSymbol::bump(1, 2.0);
    assert!(phi(&[ParamSymbol::identity(1, 1), smooth], &cfg).unwrap().norm() < 1e-9);
}
