//! Cyclic chains over the symbol algebra: `b`, `B`, Chern characters and the
//! relative pairing with the regularized characters.
//!
//! Chains are formal sums of words of symbols; words are identified by the
//! monomial keys of their letters, so `b` and `B` act exactly and all numerics
//! are deferred to pairing time.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forms::{phi, psi};
use crate::linalg::{max_abs, C64};
use crate::quad::composite_gauss;
use crate::regint::QuadConfig;
use crate::symbol::{sphere_samples, sym_inv, ParamSymbol, SymbolPath};

type WordKey = Vec<Vec<u64>>;

#[derive(Clone)]
struct Term {
    coef: C64,
    letters: Vec<ParamSymbol>,
}

#[derive(Clone)]
pub struct TensorChain {
    p: usize,
    n: usize,
    comps: BTreeMap<usize, BTreeMap<WordKey, Term>>,
}

fn word_key(letters: &[ParamSymbol]) -> WordKey {
    letters.iter().map(|a| a.key().to_vec()).collect()
}

fn sgn(e: usize) -> f64 {
    if e % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

impl TensorChain {
    pub fn zero(p: usize, n: usize) -> Self {
        TensorChain { p, n, comps: BTreeMap::new() }
    }

    /// A single word `coef · (a_0 ⊗ ⋯ ⊗ a_n)`.
    pub fn word(coef: C64, letters: Vec<ParamSymbol>) -> Self {
        let mut c = TensorChain::zero(letters[0].p(), letters[0].n());
        c.push(coef, letters);
        c
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn push(&mut self, coef: C64, letters: Vec<ParamSymbol>) {
        if coef == C64::new(0.0, 0.0) || letters.iter().any(|a| a.is_zero()) {
            return;
        }
        let deg = letters.len() - 1;
        let comp = self.comps.entry(deg).or_default();
        let key = word_key(&letters);
        let drop = match comp.get_mut(&key) {
            Some(t) => {
                t.coef += coef;
                t.coef == C64::new(0.0, 0.0)
            }
            None => {
                comp.insert(key.clone(), Term { coef, letters });
                false
            }
        };
        if drop {
            comp.remove(&key);
            if comp.is_empty() {
                self.comps.remove(&deg);
            }
        }
    }

    pub fn add(&self, o: &TensorChain) -> TensorChain {
        let mut out = self.clone();
        out.add_assign(o, C64::new(1.0, 0.0));
        out
    }

    pub fn sub(&self, o: &TensorChain) -> TensorChain {
        let mut out = self.clone();
        out.add_assign(o, C64::new(-1.0, 0.0));
        out
    }

    /// `self += z · o`
    pub fn add_assign(&mut self, o: &TensorChain, z: C64) {
        for t in o.terms() {
            self.push(t.coef * z, t.letters.clone());
        }
    }

    pub fn scale(&self, z: C64) -> TensorChain {
        let mut out = TensorChain::zero(self.p, self.n);
        out.add_assign(self, z);
        out
    }

    fn terms(&self) -> impl Iterator<Item = &Term> {
        self.comps.values().flat_map(|c| c.values())
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.comps.keys().cloned().collect()
    }

    /// Number of distinct words.
    pub fn len(&self) -> usize {
        self.comps.values().map(|c| c.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    /// Words of degree `deg` with their coefficients.
    pub fn component(&self, deg: usize) -> Vec<(C64, Vec<ParamSymbol>)> {
        self.comps
            .get(&deg)
            .map(|c| c.values().map(|t| (t.coef, t.letters.clone())).collect())
            .unwrap_or_default()
    }

    pub fn truncate(&self, max_degree: usize) -> TensorChain {
        let mut out = self.clone();
        out.comps.retain(|d, _| *d <= max_degree);
        out
    }

    /// Drop words carrying the unit in a slot other than the first.
    pub fn normalized(&self) -> TensorChain {
        let mut out = TensorChain::zero(self.p, self.n);
        for t in self.terms() {
            if !t.letters[1..].iter().any(|a| a.is_identity()) {
                out.push(t.coef, t.letters.clone());
            }
        }
        out
    }

    /// `Σ coef · f(word)` over the words of degree `deg`, in parallel.
    pub fn evaluate_with<F>(&self, deg: usize, f: F) -> Result<C64>
    where
        F: Fn(&[ParamSymbol]) -> Result<C64> + Sync,
    {
        let Some(comp) = self.comps.get(&deg) else { return Ok(C64::new(0.0, 0.0)) };
        let terms: Vec<&Term> = comp.values().collect();
        let vals: Result<Vec<C64>> = terms.par_iter().map(|t| Ok(t.coef * f(&t.letters)?)).collect();
        Ok(vals?.into_iter().sum())
    }
}

/// `b(a_0 ⊗ ⋯ ⊗ a_n) = Σ_{j<n} (-1)^j (⋯ a_j a_{j+1} ⋯) + (-1)^n (a_n a_0 ⊗ a_1 ⊗ ⋯)`
pub fn b_chain(c: &TensorChain) -> TensorChain {
    let mut out = TensorChain::zero(c.p, c.n);
    for t in c.terms() {
        let a = &t.letters;
        let n = a.len() - 1;
        if n == 0 {
            continue;
        }
        for j in 0..n {
            let mut w = Vec::with_capacity(n);
            w.extend_from_slice(&a[..j]);
            w.push(a[j].mul(&a[j + 1]));
            w.extend_from_slice(&a[j + 2..]);
            out.push(t.coef * sgn(j), w);
        }
        let mut w = vec![a[n].mul(&a[0])];
        w.extend_from_slice(&a[1..n]);
        out.push(t.coef * sgn(n), w);
    }
    out
}

/// Adjoint of the cochain operator `B`:
/// `B(a_0 ⊗ ⋯ ⊗ a_n) = Σ_j (-1)^{nj} [(1, a_j, …, a_n, a_0, …, a_{j-1}) - (a_j, 1, a_{j+1}, …, a_{j-1})]`.
#[allow(non_snake_case)]
pub fn B_chain(c: &TensorChain) -> TensorChain {
    let mut out = TensorChain::zero(c.p, c.n);
    let one = ParamSymbol::identity(c.p, c.n);
    for t in c.terms() {
        let a = &t.letters;
        let n = a.len() - 1;
        for j in 0..=n {
            let rot: Vec<ParamSymbol> = a[j..].iter().chain(a[..j].iter()).cloned().collect();
            let s = t.coef * sgn(n * j);
            let mut w1 = vec![one.clone()];
            w1.extend(rot.iter().cloned());
            out.push(s, w1);
            let mut w2 = vec![rot[0].clone(), one.clone()];
            w2.extend(rot[1..].iter().cloned());
            out.push(-s, w2);
        }
    }
    out
}

fn check_invertible(g: &ParamSymbol) -> Result<ParamSymbol> {
    sym_inv(g, None)
}

/// `(g^{-1} ⊗ g)^{⊗ m}` as a letter list.
fn alternating(ginv: &ParamSymbol, g: &ParamSymbol, m: usize) -> Vec<ParamSymbol> {
    (0..m).flat_map(|_| [ginv.clone(), g.clone()]).collect()
}

/// Odd character from a given inverse; `ginv` may be any representative of
/// the inverse class.
pub fn ch_odd_with_inverse(g: &ParamSymbol, ginv: &ParamSymbol, k_max: usize) -> TensorChain {
    let mut out = TensorChain::zero(g.p(), g.n());
    for k in 0..=k_max {
        out.push(C64::new(sgn(k) * factorial(k), 0.0), alternating(ginv, g, k + 1));
    }
    out
}

/// `ch(g) = Σ_{k ≤ K} (-1)^k k! (g^{-1} ⊗ g)^{⊗(k+1)}`
pub fn ch_odd(g: &ParamSymbol, k_max: usize) -> Result<TensorChain> {
    let ginv = check_invertible(g)?;
    Ok(ch_odd_with_inverse(g, &ginv, k_max))
}

/// Secondary character with a given inverse, components of degree `≤ max_degree`.
pub fn ch_sec_odd_with_inverse(
    g: &ParamSymbol,
    ginv: &ParamSymbol,
    h: &ParamSymbol,
    max_degree: usize,
) -> TensorChain {
    let mut out = TensorChain::zero(g.p(), g.n());
    let gh = ginv.mul(h);
    if h.is_zero() {
        return out;
    }
    out.push(C64::new(1.0, 0.0), vec![gh.clone()]);
    let mut k = 0;
    while 2 * k + 2 <= max_degree {
        let c = C64::new(sgn(k + 1) * factorial(k), 0.0);
        for j in 0..=k {
            let mut w = alternating(ginv, g, j + 1);
            w.push(gh.clone());
            w.extend(alternating(ginv, g, k - j));
            out.push(c, w);
        }
        k += 1;
    }
    out
}

/// `/ch(g, h)` truncated at degree `2K + 2`.
pub fn ch_sec_odd(g: &ParamSymbol, h: &ParamSymbol, k_max: usize) -> Result<TensorChain> {
    let ginv = check_invertible(g)?;
    Ok(ch_sec_odd_with_inverse(g, &ginv, h, 2 * k_max + 2))
}

/// `//ch(g, h_1, h_2)` truncated at degree `2K + 3`. The triple sums carry
/// `+(-1)^k k!` on the `h_1 … h_2` words and the opposite sign on `h_2 … h_1`,
/// which is what makes `∂_s /ch(g, ∂_t g) - ∂_t /ch(g, ∂_s g) = (b + B) //ch`
/// hold with the `b`, `B` above.
pub fn ch_sec2_odd(g: &ParamSymbol, h1: &ParamSymbol, h2: &ParamSymbol, k_max: usize) -> Result<TensorChain> {
    let ginv = check_invertible(g)?;
    let mut out = TensorChain::zero(g.p(), g.n());
    let gh1 = ginv.mul(h1);
    let gh2 = ginv.mul(h2);
    out.push(C64::new(-1.0, 0.0), vec![gh1.clone(), gh2.clone()]);
    for k in 0..=k_max {
        let c = sgn(k) * factorial(k);
        for j1 in 0..=k {
            for j2 in 0..=(k - j1) {
                let j3 = k - j1 - j2;
                for (first, second, s) in [(&gh1, &gh2, c), (&gh2, &gh1, -c)] {
                    let mut w = alternating(&ginv, g, j1 + 1);
                    w.push(first.clone());
                    w.extend(alternating(&ginv, g, j2));
                    w.push(second.clone());
                    w.extend(alternating(&ginv, g, j3));
                    out.push(C64::new(s, 0.0), w);
                }
            }
        }
    }
    Ok(out)
}

/// Pointwise idempotency defect on sample points of several radii.
pub fn idempotent_defect(e: &ParamSymbol) -> f64 {
    let mut worst: f64 = 0.0;
    for r in [0.0, 0.5, 1.0, 3.0, 10.0] {
        for w in sphere_samples(e.p()) {
            let mu: Vec<f64> = w.iter().map(|x| x * r).collect();
            let v = e.eval(&mu);
            worst = worst.max(max_abs(&(&v * &v - &v)));
        }
    }
    worst
}

/// Even character without the idempotency check; used on symbol classes.
pub fn ch_even_unchecked(e: &ParamSymbol, k_max: usize) -> TensorChain {
    let mut out = TensorChain::zero(e.p(), e.n());
    out.push(C64::new(1.0, 0.0), vec![e.clone()]);
    let shifted = e.sub(&ParamSymbol::identity(e.p(), e.n()).scale(C64::new(0.5, 0.0)));
    for k in 1..=k_max {
        let mut w = vec![shifted.clone()];
        w.extend((0..2 * k).map(|_| e.clone()));
        out.push(C64::new(sgn(k) * factorial(2 * k) / factorial(k), 0.0), w);
    }
    out
}

/// `ch(e) = e + Σ_{1 ≤ k ≤ K} (-1)^k (2k)!/k! (e - 1/2) ⊗ e^{⊗ 2k}`
pub fn ch_even(e: &ParamSymbol, k_max: usize) -> Result<TensorChain> {
    let d = idempotent_defect(e);
    if d > 1e-9 {
        return Err(Error::Precondition(format!("symbol is not idempotent (defect {d:.2e})")));
    }
    Ok(ch_even_unchecked(e, k_max))
}

/// `ι(h)(a_0 ⊗ ⋯ ⊗ a_l) = Σ_i (-1)^i (a_0, …, a_i, h, a_{i+1}, …, a_l)`
pub fn iota(h: &ParamSymbol, c: &TensorChain) -> TensorChain {
    let mut out = TensorChain::zero(c.p, c.n);
    for t in c.terms() {
        for i in 0..t.letters.len() {
            let mut w = t.letters[..=i].to_vec();
            w.push(h.clone());
            w.extend_from_slice(&t.letters[i + 1..]);
            out.push(t.coef * sgn(i), w);
        }
    }
    out
}

/// `/ch(e, h) = ι(h) ch(e)`
pub fn ch_sec_even(e: &ParamSymbol, h: &ParamSymbol, k_max: usize) -> Result<TensorChain> {
    Ok(iota(h, &ch_even(e, k_max)?))
}

/// A relative cycle: bulk chain in the interior algebra and boundary chain of
/// leading-part classes (any representative of a class will do).
#[derive(Clone)]
pub struct RelativeChain {
    pub bulk: TensorChain,
    pub boundary: TensorChain,
}

/// Odd relative character of an admissible elliptic path. Bulk degrees are
/// `≤ 2K + 1`, boundary degrees `≤ 2K`; `n_s` Gauss nodes per smooth piece.
pub fn relative_ch_path(path: &SymbolPath, k_max: usize, n_s: usize) -> Result<RelativeChain> {
    let a0 = path.at(0.0);
    let a1 = path.at(1.0);
    let bulk = if a0.key() == a1.key() {
        TensorChain::zero(a0.p(), a0.n())
    } else {
        ch_odd(&a1, k_max)?.sub(&ch_odd(&a0, k_max)?)
    };
    let nodes = composite_gauss(&path.breakpoints, n_s);
    let pieces: Result<Vec<TensorChain>> = nodes
        .par_iter()
        .map(|&(s, w)| {
            let a = path.at(s);
            let ainv = a.parametrix(None)?;
            let h = path.s_derivative(s);
            Ok(ch_sec_odd_with_inverse(&a, &ainv, &h, 2 * k_max).scale(C64::new(-w, 0.0)))
        })
        .collect();
    let mut boundary = TensorChain::zero(a0.p(), a0.n());
    for c in pieces? {
        boundary.add_assign(&c, C64::new(1.0, 0.0));
    }
    Ok(RelativeChain { bulk, boundary })
}

/// Even relative character of a path of almost-idempotents with idempotent
/// endpoints. Bulk degrees `≤ 2K`, boundary degrees `≤ 2K - 1`.
pub fn relative_ch_path_even(path: &SymbolPath, k_max: usize, n_s: usize) -> Result<RelativeChain> {
    let f0 = path.at(0.0);
    let f1 = path.at(1.0);
    let bulk = ch_even(&f1, k_max)?.sub(&ch_even(&f0, k_max)?);
    let nodes = composite_gauss(&path.breakpoints, n_s);
    let one = ParamSymbol::identity(f0.p(), f0.n());
    let pieces: Vec<TensorChain> = nodes
        .par_iter()
        .map(|&(s, w)| {
            let f = path.at(s);
            let h = f.scale(C64::new(2.0, 0.0)).sub(&one).mul(&path.s_derivative(s));
            iota(&h, &ch_even_unchecked(&f, k_max)).truncate(2 * k_max - 1).scale(C64::new(-w, 0.0))
        })
        .collect();
    let mut boundary = TensorChain::zero(f0.p(), f0.n());
    for c in pieces {
        boundary.add_assign(&c, C64::new(1.0, 0.0));
    }
    Ok(RelativeChain { bulk, boundary })
}

/// A multilinear functional on words of a fixed degree.
pub trait Cochain: Sync {
    fn degree(&self) -> usize;
    fn eval(&self, words: &[ParamSymbol]) -> Result<C64>;
}

/// `φ_p(a_0, …, a_p) = TR̄(a_0 da_1 ⋯ da_p)/p!`
pub struct RegCharacter {
    pub p: usize,
    pub cfg: QuadConfig,
}

/// `ψ_{p-1}(b_0, …, b_{p-1}) = T̃R(b_0 db_1 ⋯ db_{p-1})/(p-1)!`
pub struct BoundaryCharacter {
    pub p: usize,
    pub cfg: QuadConfig,
}

impl Cochain for RegCharacter {
    fn degree(&self) -> usize {
        self.p
    }
    fn eval(&self, words: &[ParamSymbol]) -> Result<C64> {
        phi(words, &self.cfg)
    }
}

impl Cochain for BoundaryCharacter {
    fn degree(&self) -> usize {
        self.p - 1
    }
    fn eval(&self, words: &[ParamSymbol]) -> Result<C64> {
        psi(words, &self.cfg)
    }
}

/// Only the component in the cochain's degree contributes.
pub fn pair(cochain: &dyn Cochain, chain: &TensorChain) -> Result<C64> {
    chain.evaluate_with(cochain.degree(), |w| cochain.eval(w))
}

/// `⟨(φ, ψ), (bulk, boundary)⟩ = ⟨φ, bulk⟩ + ⟨ψ, boundary⟩`
pub fn pair_relative(phi: &dyn Cochain, psi: &dyn Cochain, chain: &RelativeChain) -> Result<C64> {
    Ok(pair(phi, &chain.bulk)? + pair(psi, &chain.boundary)?)
}

/// The regularized relative character in dimension `p`.
pub fn reg_character(p: usize, cfg: &QuadConfig) -> (RegCharacter, BoundaryCharacter) {
    (RegCharacter { p, cfg: cfg.clone() }, BoundaryCharacter { p, cfg: cfg.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_hermitian, trace, CMat, I};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    fn e(i: usize, j: usize) -> ParamSymbol {
        let mut m = CMat::zeros(2, 2);
        m[(i, j)] = one();
        ParamSymbol::constant(1, m)
    }

    /// `tr(X_0 a_0 X_1 a_1 ⋯)` at a fixed point; not normalized.
    struct Spiral {
        xs: Vec<CMat>,
        mu: Vec<f64>,
    }

    impl Cochain for Spiral {
        fn degree(&self) -> usize {
            self.xs.len() - 1
        }
        fn eval(&self, w: &[ParamSymbol]) -> Result<C64> {
            let n = self.xs[0].nrows();
            let m = w.iter().zip(&self.xs).fold(CMat::identity(n, n), |acc, (a, x)| acc * x * a.eval(&self.mu));
            Ok(trace(&m))
        }
    }

    fn random_chain(rng: &mut ChaCha8Rng, deg: usize, words: usize, n: usize) -> TensorChain {
        let letters: Vec<ParamSymbol> = (0..4).map(|_| ParamSymbol::constant(1, random_hermitian(rng, n, 1.0))).collect();
        let mut c = TensorChain::zero(1, n);
        for w in 0..words {
            let word = (0..=deg).map(|i| letters[(w * 7 + i * 3 + i * i) % 4].clone()).collect();
            c.push(C64::new(1.0 + w as f64, -0.5), word);
        }
        c
    }

    #[test]
    fn b_on_matrix_units() {
        let c = TensorChain::word(one(), vec![e(0, 1), e(1, 0)]);
        let bc = b_chain(&c);
        let total = bc
            .component(0)
            .iter()
            .fold(CMat::zeros(2, 2), |acc, (z, w)| acc + w[0].eval(&[0.0]) * *z);
        let mut expect = CMat::zeros(2, 2);
        expect[(0, 0)] = one();
        expect[(1, 1)] = -one();
        assert!(max_abs(&(total - expect)) < 1e-15);
        // scalars commute
        let a = ParamSymbol::scalar(1, C64::new(2.0, 1.0));
        let b = ParamSymbol::coordinate(1, 0);
        let v = b_chain(&TensorChain::word(one(), vec![a, b])).component(0);
        let s: C64 = v.iter().map(|(z, w)| z * w[0].eval(&[0.7])[(0, 0)]).sum();
        assert!(s.norm() < 1e-15);
    }

    #[test]
    fn big_b_on_degree_zero() {
        let a = e(0, 1);
        let bc = B_chain(&TensorChain::word(one(), vec![a.clone()]));
        let comp = bc.component(1);
        assert_eq!(comp.len(), 2);
        for (z, w) in comp {
            if w[0].is_identity() {
                assert_eq!(z, one());
                assert!(w[1].ptr_eq(&a));
            } else {
                assert_eq!(z, -one());
                assert!(w[0].ptr_eq(&a) && w[1].is_identity());
            }
        }
    }

    #[test]
    fn mixed_complex_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for deg in 0..=5 {
            let c = random_chain(&mut rng, deg, 6, 3);
            assert!(b_chain(&b_chain(&c)).is_zero(), "b² at degree {deg}");
            assert!(B_chain(&B_chain(&c)).normalized().is_zero(), "B² at degree {deg}");
            let cn = c.normalized();
            let anti = b_chain(&B_chain(&cn)).add(&B_chain(&b_chain(&cn))).normalized();
            assert!(anti.is_zero(), "bB + Bb at degree {deg}");
            // the same identities numerically, against a generic functional
            let xs: Vec<CMat> = (0..deg + 2).map(|_| random_hermitian(&mut rng, 3, 1.0)).collect();
            let f = Spiral { xs: xs[..deg + 1].to_vec(), mu: vec![0.0] };
            let bb = b_chain(&B_chain(&cn)).add(&B_chain(&b_chain(&cn))).normalized();
            assert!(pair(&f, &bb).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn character_coefficients() {
        let g = ParamSymbol::scalar(1, C64::new(2.0, 0.0));
        let ch = ch_odd(&g, 2).unwrap();
        assert_eq!(ch.degrees(), vec![1, 3, 5]);
        assert_eq!(ch.component(1)[0].0, one());
        assert_eq!(ch.component(3)[0].0, -one());
        assert_eq!(ch.component(5)[0].0, C64::new(2.0, 0.0));

        let h = ParamSymbol::scalar(1, C64::new(0.3, 0.0));
        let sec = ch_sec_odd(&g, &h, 1).unwrap();
        assert_eq!(sec.degrees(), vec![0, 2, 4]);
        assert_eq!(sec.component(0)[0].0, one());
        assert_eq!(sec.component(2)[0].0, -one());
        assert_eq!(sec.component(4).len(), 2);
        assert!(ch_sec_odd(&g, &ParamSymbol::zero(1, 1), 2).unwrap().is_zero());

        let h2 = ParamSymbol::scalar(1, C64::new(-1.1, 0.0));
        let one_sym = ParamSymbol::identity(1, 1);
        let sec2 = ch_sec2_odd(&one_sym, &h, &h2, 0).unwrap();
        let d1 = sec2.component(1);
        let lead: Vec<_> = d1.iter().filter(|(_, w)| !w[0].is_identity()).collect();
        assert_eq!(lead.len(), 1);
        assert_eq!(lead[0].0, -one());
        let v = lead[0].1[0].eval(&[0.0])[(0, 0)] * lead[0].1[1].eval(&[0.0])[(0, 0)];
        assert!((v - C64::new(0.3 * -1.1, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn even_character_shape() {
        let p = ParamSymbol::constant(1, CMat::from_row_slice(2, 2, &[one(), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]));
        let ch = ch_even(&p, 2).unwrap();
        assert_eq!(ch.degrees(), vec![0, 2, 4]);
        assert_eq!(ch.component(2)[0].0, C64::new(-2.0, 0.0));
        assert_eq!(ch.component(4)[0].0, C64::new(12.0, 0.0));
        assert!(ch_even(&ParamSymbol::zero(1, 2), 3).unwrap().degrees().is_empty());
        assert_eq!(ch_even(&ParamSymbol::identity(1, 2), 3).unwrap().normalized().degrees(), vec![0]);
        assert!(ch_even(&ParamSymbol::scalar(1, C64::new(0.5, 0.0)), 1).is_err());

        let h = e(0, 1);
        let io = iota(&h, &TensorChain::word(one(), vec![e(0, 0), e(1, 1)]));
        let words = io.component(2);
        assert_eq!(words.len(), 2);
        for (z, w) in words {
            if w[1].ptr_eq(&h) {
                assert_eq!(z, one());
            } else {
                assert!(w[2].ptr_eq(&h));
                assert_eq!(z, -one());
            }
        }
    }

    #[test]
    fn winding_pairing() {
        let cfg = QuadConfig::default();
        let g = ParamSymbol::rational_1d(&[-I, one()], &[I, one()], 10).unwrap();
        let (phi1, _) = reg_character(1, &cfg);
        let v = pair(&phi1, &ch_odd(&g, 0).unwrap()).unwrap();
        assert!((v - 2.0 * PI * I).norm() < 1e-7, "{v}");
        assert_eq!(pair(&phi1, &TensorChain::zero(1, 1)).unwrap(), C64::new(0.0, 0.0));
        // the identity pairs to zero in every degree
        let id = ParamSymbol::identity(1, 1);
        assert_eq!(pair(&phi1, &ch_odd(&id, 0).unwrap()).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn degenerate_relative_chain() {
        let cfg = QuadConfig::default();
        let a = ParamSymbol::scalar(1, C64::new(2.0, 0.0));
        let a_ = a.clone();
        let path = SymbolPath::new(1, 1, Arc::new(move |_| a_.clone()), Arc::new(|_| ParamSymbol::zero(1, 1)), vec![]);
        let rc = relative_ch_path(&path, 0, 8).unwrap();
        assert!(rc.bulk.is_zero() && rc.boundary.is_zero());
        let (f, g) = reg_character(1, &cfg);
        assert_eq!(pair_relative(&f, &g, &rc).unwrap(), C64::new(0.0, 0.0));
    }
}
