use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

pub fn pauli(k: usize) -> CMat {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    match k {
        1 => CMat::from_row_slice(2, 2, &[z, o, o, z]),
        2 => CMat::from_row_slice(2, 2, &[z, -I, I, z]),
        3 => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => eye(2),
    }
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn trace(a: &CMat) -> C64 {
    a.trace()
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    a.is_square() && max_abs(&(a - a.adjoint())) <= tol * (1.0 + max_abs(a))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(a: &CMat) -> (Vec<f64>, CMat) {
    let h = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = a.nrows();
    let mut vecs = CMat::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn eigvalsh(a: &CMat) -> Vec<f64> {
    eigh(a).0
}

/// Spectral projections of a Hermitian matrix, one per eigenvalue (not grouped).
pub fn spectral_projections(a: &CMat) -> Vec<(f64, CMat)> {
    let (vals, vecs) = eigh(a);
    vals.iter()
        .enumerate()
        .map(|(i, &l)| {
            let v = vecs.column(i).into_owned();
            (l, &v * v.adjoint())
        })
        .collect()
}

/// f(A) for Hermitian A through its eigen-decomposition.
pub fn hermitian_fn(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let mut out = zeros(a.nrows());
    for (l, p) in spectral_projections(a) {
        out += p * C64::new(f(l), 0.0);
    }
    out
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CMat {
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(scale * rng.gen_range(-1.0..1.0), 0.0);
        for j in (i + 1)..n {
            let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * (0.5 * scale);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// A random unitary from the QR factorisation of a complex Gaussian-ish matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let m = CMat::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let qr = m.qr();
    let q = qr.q();
    let r = qr.r();
    // fix column phases so the distribution does not depend on the QR convention
    let mut d = eye(n);
    for i in 0..n {
        let z = r[(i, i)];
        if z.norm() > 0.0 {
            d[(i, i)] = z / z.norm();
        }
    }
    q * d
}

pub fn inverse(a: &CMat) -> Option<CMat> {
    a.clone().try_inverse()
}

/// Smallest singular value, used for invertibility checks.
pub fn min_singular(a: &CMat) -> f64 {
    a.clone().singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
}
