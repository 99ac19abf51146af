//! Independent oracles: exact rational arithmetic, first-quantized
//! symmetric tensors and dense matrix exponentials.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use meanfield::combinatorics::{krasikov_bound, laguerre, log_dnm, theta_weyl_coefficients};
use meanfield::fock::{field_apply, ladder_operator, weyl_apply, FockBasis, FockVector, Ladder, Sector};
use meanfield::linalg::{hermitian_eigen, random_complex, random_unit_vector};
use meanfield::states::{random_excitation, theta_state, ThetaMethod};
use meanfield::C64;

fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * big(k))
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `Σ_i (-1)^i C(k+α, k-i) x^i / i!`, exact for integer `α ≥ 0` and `x`.
fn laguerre_exact(k: u64, alpha: u64, x: u64) -> BigRational {
    let mut sum = BigRational::zero();
    for i in 0..=k {
        let term = BigRational::new(binomial(k + alpha, k - i) * big(x).pow(i as u32), factorial(i));
        if i % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("fits in f64")
}

#[test]
fn laguerre_recurrence_matches_exact_sum() {
    let mut worst: f64 = 0.0;
    for k in 0..=24u64 {
        for alpha in [0u64, 1, 2, 5, 11, 20] {
            for x in [1u64, 3, 7, 12, 20, 30] {
                let exact = laguerre_exact(k, alpha, x);
                let e = to_f64(&exact);
                // the size of the largest partial term bounds the cancellation
                let scale = (0..=k)
                    .map(|i| to_f64(&BigRational::new(binomial(k + alpha, k - i) * big(x).pow(i as u32), factorial(i))))
                    .fold(1.0, f64::max);
                let got = laguerre(k as usize, alpha as f64, x as f64);
                let err = (got - e).abs() / e.abs().max(1e-3 * scale).max(1.0);
                worst = worst.max(err);
                assert!(err < 1e-10, "L_{k}^({alpha})({x}): {got} vs {e}");
            }
        }
    }
    assert!(worst < 1e-10);
}

#[test]
fn small_laguerre_polynomials_by_hand() {
    // L_1^{(a)}(x) = 1 + a - x, L_2^{(a)}(x) = ((a+1)(a+2) - 2(a+2)x + x²)/2
    for &(a, x) in &[(0.0, 0.3), (2.5, 1.7), (-0.5, 4.0)] {
        assert!((laguerre(1, a, x) - (1.0 + a - x)).abs() < 1e-14);
        let l2 = ((a + 1.0) * (a + 2.0) - 2.0 * (a + 2.0) * x + x * x) / 2.0;
        assert!((laguerre(2, a, x) - l2).abs() < 1e-13);
    }
}

#[test]
fn dnm_matches_exact_factorials() {
    for n in 1..=60u64 {
        for m in 0..=n.min(6) {
            // d² = (n-m)! e^n / n^{n-m}
            let ratio = BigRational::new(factorial(n - m), big(n).pow((n - m) as u32));
            let want = 0.5 * (to_f64(&ratio).ln() + n as f64);
            let got = log_dnm(n as usize, m as usize);
            assert!((got - want).abs() < 1e-11 * want.abs().max(1.0), "n={n}, m={m}: {got} vs {want}");
        }
    }
}

/// `A_k² = e^{-n} n^{n-m-k} k!/(n-m)! L_k^{(n-m-k)}(n)²` with the rational
/// part exact.
#[test]
fn theta_coefficients_match_exact_rationals() {
    for (n, m) in [(4u64, 0u64), (6, 1), (6, 2), (10, 3), (16, 1), (25, 4), (40, 2)] {
        let closed = theta_weyl_coefficients(n as usize, m as usize).unwrap();
        assert_eq!(closed.a.len(), (n - m + 1) as usize);
        for k in 0..=n - m {
            let alpha = n - m - k;
            let l = laguerre_exact(k, alpha, n);
            let rational = BigRational::new(big(n).pow(alpha as u32) * factorial(k), factorial(n - m)) * &l * &l;
            let want = (to_f64(&rational) * (-(n as f64)).exp()).sqrt();
            let got = closed.a[k as usize];
            assert!((got - want).abs() <= 1e-11 * want.max(1e-300) + 1e-300, "A_{k}({n},{m}) = {got} vs {want}");
        }
        // sectors above n are not covered by the A_k
        assert!(closed.sum_sq() <= 1.0 + 1e-12, "sector norms of a unit vector, got {}", closed.sum_sq());
    }
}

#[test]
fn theta_coefficients_against_displaced_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (n, m) in [(6usize, 1usize), (6, 2), (8, 1), (7, 3)] {
        let closed = theta_weyl_coefficients(n, m).unwrap();
        let d = 3;
        let phi = random_unit_vector(d, &mut rng);
        let exc = random_excitation(&phi, m, 5).unwrap();
        let n_max = meanfield::fock::headroom((n as f64).sqrt()) + n;
        let basis = Arc::new(FockBasis::new(d, Sector::Truncated(n_max)).unwrap());
        let theta = theta_state(&phi, &exc, n, ThetaMethod::Symmetrize, &basis).unwrap();
        let shifted = weyl_apply(&(&phi * C64::new(-(n as f64).sqrt(), 0.0)), &theta).unwrap();
        let w = shifted.state.sector_weights();
        for k in 0..=n - m {
            assert!((w[k + m].sqrt() - closed.a[k]).abs() < 1e-7, "n={n}, m={m}, k={k}");
        }
        // nothing below sector m
        assert!(w[..m].iter().all(|x| *x < 1e-14));
    }
}

#[test]
fn krasikov_envelope_is_strict_against_exact_values() {
    let mut checked = 0;
    for k in 2..=30u64 {
        for alpha in [0u64, 1, 3, 8, 15] {
            let probe = krasikov_bound(k as usize, alpha as f64, 1.0);
            let lo = probe.q2.floor() as u64 + 1;
            let hi = probe.s2.ceil() as u64;
            for x in lo..hi {
                let b = krasikov_bound(k as usize, alpha as f64, x as f64);
                if !b.valid {
                    continue;
                }
                let exact = to_f64(&laguerre_exact(k, alpha, x).abs());
                assert!(exact < b.bound, "k={k}, alpha={alpha}, x={x}: {exact} >= {}", b.bound);
                checked += 1;
            }
        }
    }
    assert!(checked > 500, "only {checked} interior points");
}

// ---- first-quantized symmetric tensors ----

/// Dense tensor in `(C^d)^{⊗n}`, row-major in the index tuple.
#[derive(Clone)]
struct Tensor {
    d: usize,
    n: usize,
    data: Vec<C64>,
}

fn tuples(d: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|t| (0..d).map(move |p| [t.clone(), vec![p]].concat())).collect();
    }
    out
}

fn flat(t: &[usize], d: usize) -> usize {
    t.iter().fold(0, |acc, &p| acc * d + p)
}

fn occupation(t: &[usize], d: usize) -> Vec<u16> {
    let mut occ = vec![0u16; d];
    for &p in t {
        occ[p] += 1;
    }
    occ
}

fn ln_fact(k: u16) -> f64 {
    (1..=k as u64).map(|j| (j as f64).ln()).sum()
}

/// `T(y) = c_{occ(y)} √(Π n_p! / n!)`.
fn to_tensor(v: &FockVector, n: usize) -> Tensor {
    let d = v.basis().d();
    let mut data = vec![C64::new(0.0, 0.0); d.pow(n as u32)];
    for t in tuples(d, n) {
        let occ = occupation(&t, d);
        let w = (0.5 * (occ.iter().map(|&k| ln_fact(k)).sum::<f64>() - ln_fact(n as u16))).exp();
        data[flat(&t, d)] = v.amplitude(&occ) * w;
    }
    Tensor { d, n, data }
}

fn from_tensor(t: &Tensor, basis: Arc<FockBasis>) -> FockVector {
    let mut v = FockVector::zeros(basis.clone());
    for i in 0..basis.dim() {
        let occ = basis.occupation(i).to_vec();
        let tuple: Vec<usize> = occ.iter().enumerate().flat_map(|(p, &k)| std::iter::repeat(p).take(k as usize)).collect();
        let w = (0.5 * (occ.iter().map(|&k| ln_fact(k)).sum::<f64>() - ln_fact(t.n as u16))).exp();
        v.coeffs_mut()[i] = t.data[flat(&tuple, t.d)] / w;
    }
    v
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for slot in 0..n {
            let mut q = p.clone();
            q.insert(slot, n - 1);
            out.push(q);
        }
    }
    out
}

fn symmetrize(t: &Tensor) -> Tensor {
    let perms = permutations(t.n);
    let mut data = vec![C64::new(0.0, 0.0); t.data.len()];
    for y in tuples(t.d, t.n) {
        let mut acc = C64::new(0.0, 0.0);
        for p in &perms {
            let z: Vec<usize> = p.iter().map(|&i| y[i]).collect();
            acc += t.data[flat(&z, t.d)];
        }
        data[flat(&y, t.d)] = acc / perms.len() as f64;
    }
    Tensor { d: t.d, n: t.n, data }
}

/// `(a*(f)ψ)(y_1..y_{n+1}) = √(n+1) Sym(f ⊗ ψ)`.
fn tensor_create(f: &DVector<C64>, t: &Tensor) -> Tensor {
    let d = t.d;
    let mut data = vec![C64::new(0.0, 0.0); d.pow(t.n as u32 + 1)];
    for y in tuples(d, t.n + 1) {
        data[flat(&y, d)] = f[y[0]] * t.data[flat(&y[1..], d)];
    }
    let s = symmetrize(&Tensor { d, n: t.n + 1, data });
    let scale = ((t.n + 1) as f64).sqrt();
    Tensor { d, n: t.n + 1, data: s.data.iter().map(|z| z * scale).collect() }
}

/// `(a(f)ψ)(y_1..y_{n-1}) = √n Σ_x f_x ψ(x, y_1..y_{n-1})`.
fn tensor_annihilate(f: &DVector<C64>, t: &Tensor) -> Tensor {
    let d = t.d;
    let mut data = vec![C64::new(0.0, 0.0); d.pow(t.n as u32 - 1)];
    let scale = (t.n as f64).sqrt();
    for y in tuples(d, t.n - 1) {
        let mut acc = C64::new(0.0, 0.0);
        for x in 0..d {
            let full: Vec<usize> = std::iter::once(x).chain(y.iter().copied()).collect();
            acc += f[x] * t.data[flat(&full, d)];
        }
        data[flat(&y, d)] = acc * scale;
    }
    Tensor { d, n: t.n - 1, data }
}

fn random_fixed(d: usize, n: usize, rng: &mut ChaCha8Rng) -> FockVector {
    let basis = Arc::new(FockBasis::new(d, Sector::Fixed(n)).unwrap());
    let coeffs = (0..basis.dim()).map(|_| random_complex(rng)).collect();
    let mut v = FockVector::from_coeffs(basis, coeffs).unwrap();
    v.normalize().unwrap();
    v
}

#[test]
fn ladder_operators_match_symmetric_tensor_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in 1..=3 {
        for n in 1..=4 {
            let v = random_fixed(d, n, &mut rng);
            let f = DVector::from_fn(d, |_, _| random_complex(&mut rng));
            let t = to_tensor(&v, n);

            let up = field_apply(Ladder::Create, &f, &v).unwrap();
            let oracle = from_tensor(&tensor_create(&f, &t), up.basis().clone());
            assert!(up.max_abs_diff(&oracle).unwrap() < 1e-12, "a*(f), d={d}, n={n}");

            let down = field_apply(Ladder::Annihilate, &f, &v).unwrap();
            let oracle = from_tensor(&tensor_annihilate(&f, &t), down.basis().clone());
            assert!(down.max_abs_diff(&oracle).unwrap() < 1e-12, "a(f), d={d}, n={n}");
        }
    }
}

#[test]
fn occupation_tensor_round_trip_preserves_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (d, n) in [(2, 3), (3, 4), (4, 2)] {
        let v = random_fixed(d, n, &mut rng);
        let t = to_tensor(&v, n);
        let norm: f64 = t.data.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        let s = symmetrize(&t);
        assert!(s.data.iter().zip(&t.data).all(|(a, b)| (a - b).norm() < 1e-13), "already symmetric");
        assert!(from_tensor(&t, v.basis().clone()).max_abs_diff(&v).unwrap() < 1e-13);
    }
}

#[test]
fn excitation_tensor_entries_match_tensor_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in 1..=3 {
        let phi = random_unit_vector(3, &mut rng);
        let exc = random_excitation(&phi, m, 9).unwrap();
        let t = to_tensor(exc.psi(), m);
        for y in tuples(3, m) {
            assert!((exc.tensor_entry(&y) - t.data[flat(&y, 3)]).norm() < 1e-13);
        }
        // orthogonality in first quantization: Σ_x φ̄_x ψ(x, ..) = 0
        let phibar = phi.map(|z| z.conj());
        let contracted = tensor_annihilate(&phibar, &t);
        assert!(contracted.data.iter().all(|z| z.norm() < 1e-10));
    }
}

#[test]
fn theta_from_explicit_tensor_symmetrization() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let d = 2;
    for (n, m) in [(3usize, 1usize), (4, 2), (5, 1)] {
        let phi = random_unit_vector(d, &mut rng);
        let exc = random_excitation(&phi, m, 13).unwrap();
        // Sym(ψ_m ⊗ φ^{⊗(n-m)}) normalized
        let psi = to_tensor(exc.psi(), m);
        let mut data = vec![C64::new(0.0, 0.0); d.pow(n as u32)];
        for y in tuples(d, n) {
            let tail: C64 = y[m..].iter().map(|&p| phi[p]).product();
            data[flat(&y, d)] = psi.data[flat(&y[..m], d)] * tail;
        }
        let mut s = symmetrize(&Tensor { d, n, data });
        let norm = s.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        s.data.iter_mut().for_each(|z| *z /= norm);
        let basis = Arc::new(FockBasis::new(d, Sector::Fixed(n)).unwrap());
        let oracle = from_tensor(&s, basis.clone());
        let theta = theta_state(&phi, &exc, n, ThetaMethod::CreationPolynomial, &basis).unwrap();
        // equal up to a global phase
        let overlap = oracle.inner(&theta).unwrap();
        assert!((overlap.norm() - 1.0).abs() < 1e-12, "n={n}, m={m}: |<oracle,theta>| = {}", overlap.norm());
    }
}

// ---- Weyl operator by dense exponentiation ----

/// `exp(a*(α) - a(ᾱ))` on a truncated basis through the eigendecomposition
/// of the Hermitian `i(a*(α) - a(ᾱ))`.
fn weyl_dense(alpha: &DVector<C64>, basis: &Arc<FockBasis>) -> DMatrix<C64> {
    let dim = basis.dim();
    let mut g = DMatrix::<C64>::zeros(dim, dim);
    for p in 0..basis.d() {
        let a = ladder_operator(Ladder::Annihilate, p, basis).unwrap().to_dense();
        let ad = ladder_operator(Ladder::Create, p, basis).unwrap().to_dense();
        g += ad * alpha[p] - a * alpha[p].conj();
    }
    let herm = &g * C64::new(0.0, 1.0);
    let (vals, vecs) = hermitian_eigen(&herm);
    let phases = DMatrix::from_diagonal(&DVector::from_iterator(dim, vals.iter().map(|l| C64::new(0.0, -l).exp())));
    &vecs * phases * vecs.adjoint()
}

#[test]
fn weyl_matches_matrix_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let d = 2;
    let basis = Arc::new(FockBasis::new(d, Sector::Truncated(36)).unwrap());
    for scale in [0.3, 0.8, 1.2] {
        let alpha = random_unit_vector(d, &mut rng) * C64::new(scale, 0.0);
        let dense = weyl_dense(&alpha, &basis);
        let mut v = FockVector::zeros(basis.clone());
        for i in 0..basis.dim() {
            if basis.total(i) <= 2 {
                v.coeffs_mut()[i] = random_complex(&mut rng);
            }
        }
        v.normalize().unwrap();
        let oracle = &dense * DVector::from_column_slice(v.coeffs());
        let got = weyl_apply(&alpha, &v).unwrap();
        // compare where the generator's truncation cannot reach
        for i in 0..basis.dim() {
            if basis.total(i) <= 16 {
                assert!((got.state.coeffs()[i] - oracle[i]).norm() < 1e-10, "alpha scale {scale}, index {i}");
            }
        }
        assert!(got.loss.abs() < 1e-10);
    }
}

#[test]
fn single_mode_coherent_coefficients() {
    // C(α)Ω at d=1, α=2: e^{-|α|²/2} α^k / √(k!)
    let basis = Arc::new(FockBasis::new(1, Sector::Truncated(meanfield::fock::headroom(2.0))).unwrap());
    let alpha = DVector::from_element(1, C64::new(2.0, 0.0));
    let out = weyl_apply(&alpha, &FockVector::vacuum(basis.clone()).unwrap()).unwrap();
    for k in 0..=basis.n_max() {
        let want = (-2.0f64 + k as f64 * 2f64.ln() - 0.5 * ln_fact(k as u16)).exp();
        let got = out.state.amplitude(&[k as u16]);
        assert!((got - C64::new(want, 0.0)).norm() < 1e-12, "k={k}");
    }
    assert!(out.loss.abs() < 1e-6);
}

#[test]
fn big_rational_sign_helper() {
    // guards the exact helpers themselves: L_3^{(0)}(1) = -2/3
    let l = laguerre_exact(3, 0, 1);
    assert!(l.is_negative());
    assert_eq!(l, BigRational::new(BigInt::from(-2), big(3)));
}
