//! Invariant suites: every module's structural properties on randomized
//! instances, with a machine-readable verdict.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    admissible_m, krasikov_bound, laguerre, log_dnm, theta_weyl_coefficients, weighted_number_moment,
};
use crate::dynamics::{number_moment, PropagatorMethod, PropagatorPlan};
use crate::fock::{
    build_hamiltonian, field_apply, headroom, ladder_apply, ladder_operator, ladder_operator_with_rule,
    number_operator, second_quantize, sector_project, weyl_apply, FockBasis, FockVector, Ladder, ModeSystem, Sector,
    SparseOperator,
};
use crate::hartree::{evolve_hartree, uniform_grid, DEFAULT_TOL};
use crate::linalg::{cdot, projector, random_complex, random_hermitian, random_symmetric, random_unit_vector, vnorm};
use crate::rdm::distances;
use crate::states::{coherent_basis, product_state, random_excitation, theta_state, ThetaMethod};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub checks: usize,
    /// Largest violation measure seen (relative to each check's tolerance
    /// when `> 1` means failure).
    pub worst_ratio: f64,
    /// First few failures, for diagnostics.
    pub failures: Vec<String>,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub level: Level,
    pub passed: bool,
    pub suites: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite report serializes")
    }
}

const MAX_LISTED: usize = 10;

/// Algebraic identities (CCR, adjointness, operator bounds).
pub const ALGEBRA_TOL: f64 = 1e-10;
/// Weyl identities, on top of the reported truncation loss.
pub const WEYL_TOL: f64 = 1e-6;
pub const THETA_AGREEMENT_TOL: f64 = 1e-8;

/// Accumulates checks of the form `value ≤ tol`.
struct Tally {
    name: String,
    checks: usize,
    worst: f64,
    failures: Vec<String>,
    failed: usize,
    start: Instant,
}

impl Tally {
    fn new(name: &str) -> Self {
        Self { name: name.into(), checks: 0, worst: 0.0, failures: Vec::new(), failed: 0, start: Instant::now() }
    }

    fn le(&mut self, value: f64, tol: f64, what: impl FnOnce() -> String) {
        self.checks += 1;
        let ratio = if tol > 0.0 { value / tol } else if value <= 0.0 { 0.0 } else { f64::INFINITY };
        let ratio = if ratio.is_nan() { f64::INFINITY } else { ratio };
        self.worst = self.worst.max(ratio);
        if !(value <= tol) {
            self.failed += 1;
            if self.failures.len() < MAX_LISTED {
                self.failures.push(format!("{}: {value:e} > {tol:e}", what()));
            }
        }
    }

    fn truth(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.le(if ok { 0.0 } else { 1.0 }, 0.5, what);
    }

    fn error(&mut self, context: &str, e: crate::Error) {
        self.checks += 1;
        self.failed += 1;
        self.worst = f64::INFINITY;
        if self.failures.len() < MAX_LISTED {
            self.failures.push(format!("{context}: {e}"));
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            passed: self.failed == 0 && self.checks > 0,
            checks: self.checks,
            worst_ratio: self.worst,
            failures: self.failures,
            runtime_s: self.start.elapsed().as_secs_f64(),
        }
    }
}

fn run(name: &str, body: impl FnOnce(&mut Tally) -> Result<()>) -> CheckResult {
    let mut t = Tally::new(name);
    if let Err(e) = body(&mut t) {
        t.error("aborted", e);
    }
    t.finish()
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Random vector supported on sectors `0..=top` of `basis`.
fn random_state<R: Rng>(basis: &Arc<FockBasis>, top: usize, rng: &mut R) -> FockVector {
    let mut v = FockVector::zeros(basis.clone());
    for i in 0..basis.dim() {
        if basis.total(i) <= top {
            v.coeffs_mut()[i] = random_complex(rng);
        }
    }
    v.normalize().expect("nonzero random state");
    v
}

fn number_power(v: &FockVector, power: f64) -> f64 {
    number_moment(v, power).expect("nonnegative exponent")
}

/// `(a_p a†_q − a†_q a_p) v = δ_pq v` for states strictly inside the
/// truncation, with ladder matrices built from `rule`.
pub fn ccr_suite_with_rule(cases: usize, seed: u64, rule: &dyn Fn(u16) -> f64) -> CheckResult {
    run("ccr", |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for case in 0..cases {
            let d = 1 + case % 4;
            let n_max = 5;
            let basis = Arc::new(FockBasis::new(d, Sector::Truncated(n_max))?);
            let ann: Vec<SparseOperator> =
                (0..d).map(|p| ladder_operator_with_rule(Ladder::Annihilate, p, &basis, rule)).collect::<Result<_>>()?;
            let cre: Vec<SparseOperator> =
                (0..d).map(|p| ladder_operator_with_rule(Ladder::Create, p, &basis, rule)).collect::<Result<_>>()?;
            let v = random_state(&basis, n_max - 1, &mut rng);
            for p in 0..d {
                for q in 0..d {
                    let lhs = ann[p].apply(&cre[q].apply(&v)?)?;
                    let rhs = cre[q].apply(&ann[p].apply(&v)?)?;
                    let mut diff = lhs.sub(&rhs)?;
                    if p == q {
                        diff.axpy(c(-1.0), &v)?;
                    }
                    t.le(diff.norm(), ALGEBRA_TOL, || format!("case {case}, d={d}, p={p}, q={q}"));
                }
            }
        }
        Ok(())
    })
}

pub fn ccr_suite(cases: usize, seed: u64) -> CheckResult {
    ccr_suite_with_rule(cases, seed, &|n| (n as f64).sqrt())
}

/// Matrix adjointness of the ladder pair and `⟨u, a*(f) w⟩ = ⟨a(f̄) u, w⟩`.
pub fn adjointness_suite(cases: usize, seed: u64) -> CheckResult {
    run("adjointness", |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for case in 0..cases {
            let d = 1 + case % 4;
            let basis = Arc::new(FockBasis::new(d, Sector::Truncated(4))?);
            for p in 0..d {
                let a = ladder_operator(Ladder::Annihilate, p, &basis)?.to_dense();
                let ad = ladder_operator(Ladder::Create, p, &basis)?.to_dense();
                let gap = (a.adjoint() - ad).iter().map(|z| z.norm()).fold(0.0, f64::max);
                t.le(gap, ALGEBRA_TOL, || format!("matrix adjoint, d={d}, p={p}"));
            }
            let f = DVector::from_fn(d, |_, _| random_complex(&mut rng));
            let fbar = f.map(|z| z.conj());
            let u = random_state(&basis, 4, &mut rng);
            let w = random_state(&basis, 3, &mut rng);
            let lhs = u.inner(&field_apply(Ladder::Create, &f, &w)?)?;
            let rhs = field_apply(Ladder::Annihilate, &fbar, &u)?.inner(&w)?;
            t.le((lhs - rhs).norm(), ALGEBRA_TOL, || format!("field adjoint, case {case}"));
        }
        Ok(())
    })
}

/// `dΓ(1) = N` entrywise, `dΓ(A)` conserves number, Hamiltonians are
/// Hermitian and commute with `N`.
pub fn second_quantization_suite(cases: usize, seed: u64) -> CheckResult {
    run("second_quantization", |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for case in 0..cases {
            let d = 1 + case % 4;
            let basis = Arc::new(FockBasis::new(d, Sector::Truncated(4))?);
            let id = second_quantize(&DMatrix::identity(d, d), &basis)?.to_dense();
            let num = number_operator(&basis).to_dense();
            let gap = (id - num).iter().map(|z| z.norm()).fold(0.0, f64::max);
            t.le(gap, 0.0, || format!("dGamma(1) vs N, d={d}"));
            let ms = ModeSystem::dense(random_hermitian(d, 1.0, &mut rng), random_symmetric(d, 1.0, &mut rng))?;
            let h = build_hamiltonian(&ms, 3, &basis)?;
            t.le(h.hermitian_defect(), 1e-12, || format!("H Hermitian, case {case}"));
            t.truth(h.conserves_number(), || format!("H block diagonal, case {case}"));
            let v = random_state(&basis, 4, &mut rng);
            let hv = h.apply(&v)?;
            let nv = number_operator(&basis).apply(&v)?;
            let comm = v.inner(&h.apply(&nv)?)? - v.inner(&number_operator(&basis).apply(&hv)?)?;
            t.le(comm.norm(), 1e-12, || format!("<[H,N]>, case {case}"));
        }
        Ok(())
    })
}

/// `‖a#(f) v‖ ≤ ‖f‖ ‖(N+1)^{1/2} v‖` and
/// `‖Σ f_pq a#_p a#_q v‖ ≤ ‖f‖_HS ‖(N+1) v‖`.
pub fn operator_bounds_suite(cases: usize, seed: u64) -> CheckResult {
    run("operator_bounds", |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for case in 0..cases {
            let d = 1 + case % 4;
            let basis = Arc::new(FockBasis::new(d, Sector::Truncated(5))?);
            let v = random_state(&basis, 4, &mut rng);
            let f = DVector::from_fn(d, |_, _| random_complex(&mut rng));
            let half = number_power(&v, 0.5);
            for kind in [Ladder::Annihilate, Ladder::Create] {
                let out = field_apply(kind, &f, &v)?.norm();
                t.le(out - vnorm(&f) * half, ALGEBRA_TOL, || format!("one-body {kind:?}, case {case}"));
            }
            let fm = DMatrix::from_fn(d, d, |_, _| random_complex(&mut rng));
            let hs = fm.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            // aa against (N+1), a†a against N, a†a† against (N+2): the sector-k
            // block of a†a† has norm ‖f‖_HS √((k+1)(k+2)), so (N+1) is too tight.
            let n_plus = |shift: f64| -> f64 {
                v.sector_weights().iter().enumerate().map(|(k, w)| (k as f64 + shift).powi(2) * w).sum::<f64>().sqrt()
            };
            let pairs = [
                (Ladder::Annihilate, Ladder::Annihilate, n_plus(1.0)),
                (Ladder::Create, Ladder::Annihilate, n_plus(0.0)),
                (Ladder::Create, Ladder::Create, n_plus(2.0)),
            ];
            for (k1, k2, full) in pairs {
                let mut acc = FockVector::zeros(basis.clone());
                for q in 0..d {
                    let inner = ladder_apply(k2, q, &v)?;
                    for p in 0..d {
                        acc.axpy(fm[(p, q)], &ladder_apply(k1, p, &inner)?)?;
                    }
                }
                t.le(acc.norm() - hs * full, ALGEBRA_TOL, || format!("two-body {k1:?}{k2:?}, case {case}"));
            }
        }
        Ok(())
    })
}

/// Unitarity, inverse pair, composition phase and the shift property of
/// Weyl operators, all within the reported truncation loss.
pub fn weyl_suite(cases: usize, seed: u64) -> CheckResult {
    run("weyl", |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tol = WEYL_TOL;
        for case in 0..cases {
            let d = 1 + case % 3;
            let scale: f64 = rng.random_range(0.2..1.5);
            let alpha = random_unit_vector(d, &mut rng) * c(scale);
            let beta = random_unit_vector(d, &mut rng) * c(rng.random_range(0.2..1.5));
            let reach = vnorm(&alpha) + vnorm(&beta);
            let basis = Arc::new(FockBasis::new(d, Sector::Truncated(headroom(reach) + 2))?);
            let v = random_state(&basis, 2, &mut rng);
            let ca = weyl_apply(&alpha, &v)?;
            t.le(ca.loss.abs(), tol, || format!("unitarity loss, case {case}"));
            let back = weyl_apply(&(-&alpha), &ca.state)?;
            t.le(back.state.distance(&v)?, tol, || format!("inverse pair, case {case}"));
            let ab = weyl_apply(&alpha, &weyl_apply(&beta, &v)?.state)?.state;
            let phase = C64::new(0.0, -cdot(&alpha, &beta).im).exp();
            let sum = weyl_apply(&(&alpha + &beta), &v)?.state.scaled(phase);
            t.le(ab.distance(&sum)?, tol, || format!("composition, case {case}"));
            for p in 0..d {
                let lhs = ladder_apply(Ladder::Annihilate, p, &ca.state)?;
                let mut shifted = ladder_apply(Ladder::Annihilate, p, &v)?;
                shifted.axpy(alpha[p], &v)?;
                let rhs = weyl_apply(&alpha, &shifted)?.state;
                t.le(lhs.distance(&rhs)?, tol, || format!("shift, case {case}, p={p}"));
            }
        }
        Ok(())
    })
}

/// Three θ constructions agree, and `φ^{⊗n} = d_{n,0} P_n C(√n φ) Ω`.
pub fn theta_constructions_suite(n_top: usize, seed: u64) -> CheckResult {
    run("theta_constructions", |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for d in [2usize, 3] {
            for n in 2..=n_top {
                let phi = random_unit_vector(d, &mut rng);
                for m in 0..=3.min(n) {
                    let exc = random_excitation(&phi, m, rng.random())?;
                    let basis = Arc::new(FockBasis::new(d, Sector::Fixed(n))?);
                    let s = theta_state(&phi, &exc, n, ThetaMethod::Symmetrize, &basis)?;
                    let p = theta_state(&phi, &exc, n, ThetaMethod::CreationPolynomial, &basis)?;
                    let w = theta_state(&phi, &exc, n, ThetaMethod::WeylProjection, &basis)?;
                    let ctx = || format!("n={n}, m={m}, d={d}");
                    t.le(s.max_abs_diff(&p)?, THETA_AGREEMENT_TOL, || format!("symmetrize/creation, {}", ctx()));
                    t.le(s.max_abs_diff(&w)?, THETA_AGREEMENT_TOL, || format!("symmetrize/weyl, {}", ctx()));
                    t.le(p.max_abs_diff(&w)?, THETA_AGREEMENT_TOL, || format!("creation/weyl, {}", ctx()));
                    t.le((p.norm() - 1.0).abs(), 1e-10, || format!("norm, {}", ctx()));
                }
                let cb = coherent_basis(d, n, 1.0)?;
                let coh = weyl_apply(&(&phi * c((n as f64).sqrt())), &FockVector::vacuum(cb)?)?.state;
                let proj = sector_project(n, &coh)?.scaled(c(log_dnm(n, 0).exp()));
                let fixed = Arc::new(FockBasis::new(d, Sector::Fixed(n))?);
                let (proj, _) = proj.embed_into(fixed.clone())?;
                let prod = product_state(&phi, n, &fixed)?;
                t.le(proj.max_abs_diff(&prod)?, THETA_AGREEMENT_TOL, || format!("condensate from coherent, n={n}, d={d}"));
            }
        }
        Ok(())
    })
}

/// Closed-form `A_k` against sector norms of `C*(√n φ) θ_{n,m}`, and their
/// independence of `(φ, ψ_m)`.
pub fn weyl_coefficients_suite(pairs: &[(usize, usize)], seed: u64) -> CheckResult {
    run("weyl_coefficients", |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for &(n, m) in pairs {
            let closed = theta_weyl_coefficients(n, m)?;
            let mut numeric: Vec<Vec<f64>> = Vec::new();
            for _ in 0..2 {
                let d = 3;
                let phi = random_unit_vector(d, &mut rng);
                let exc = random_excitation(&phi, m, rng.random())?;
                let n_max = headroom((n as f64).sqrt()) + n;
                let basis = Arc::new(FockBasis::new(d, Sector::Truncated(n_max))?);
                let theta = theta_state(&phi, &exc, n, ThetaMethod::CreationPolynomial, &basis)?;
                let shifted = weyl_apply(&(&phi * c(-(n as f64).sqrt())), &theta)?;
                let w = shifted.state.sector_weights();
                numeric.push((0..=n - m).map(|k| w[k + m].sqrt()).collect());
            }
            for k in 0..=n - m {
                t.le((closed.a[k] - numeric[0][k]).abs(), 1e-7, || format!("A_{k} at n={n}, m={m}"));
                t.le((numeric[0][k] - numeric[1][k]).abs(), 1e-10, || {
                    format!("A_{k} depends on the states at n={n}, m={m}")
                });
            }
            let d = closed.dnm();
            t.le((closed.a[0] - 1.0 / d).abs(), 1e-12, || format!("A_0 at n={n}, m={m}"));
            if n > m {
                let want = m as f64 / ((n as f64).sqrt() * d);
                t.le((closed.a[1] - want).abs(), 1e-12, || format!("A_1 at n={n}, m={m}"));
            }
        }
        Ok(())
    })
}

/// `|L_k^{(α)}(x)| < envelope` on random points of the valid window.
pub fn laguerre_envelope_suite(samples: usize, seed: u64) -> CheckResult {
    run("laguerre_envelope", |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut done = 0;
        while done < samples {
            let k = rng.random_range(2..40usize);
            let alpha: f64 = rng.random_range(-0.9..30.0);
            let probe = krasikov_bound(k, alpha, 1.0);
            let (q2, s2) = (probe.q2, probe.s2);
            let x = q2 + (s2 - q2) * rng.random_range(0.001..0.999);
            let b = krasikov_bound(k, alpha, x);
            if !b.valid {
                continue;
            }
            done += 1;
            let l = laguerre(k, alpha, x).abs();
            t.truth(l < b.bound, || format!("k={k}, alpha={alpha}, x={x}: |L|={l:e}, bound={:e}", b.bound));
        }
        Ok(())
    })
}

/// The `(N+1)^{-δ}` moment bound at `δ = 1/2` and the growth of its scaled
/// right-hand side over `n → 4n`.
pub fn number_moment_bound_suite(ns: &[usize]) -> CheckResult {
    run("number_moment_bound", |t| {
        for &n in ns {
            for m in 0..=admissible_m(n).min(4) {
                let b = weighted_number_moment(n, m, 0.5)?;
                t.truth(b.holds(), || format!("n={n}, m={m}: lhs {} > rhs {}", b.lhs, b.rhs));
            }
        }
        // rhs·d²·e^{-m} grows like ln n at δ = 1/2; growth per 4× must stay
        // below the 4^{1/4} of the d_{n,m} scale it is compared with.
        for m in [0usize, 3] {
            let scaled: Vec<f64> = [200usize, 800, 3200]
                .iter()
                .map(|&n| weighted_number_moment(n, m, 0.5).map(|b| b.scaled_rhs(m)))
                .collect::<Result<_>>()?;
            for w in scaled.windows(2) {
                t.le(w[1] / w[0], 4f64.powf(0.25), || format!("scaled rhs growth at m={m}"));
            }
        }
        Ok(())
    })
}

/// Hartree norm/energy conservation, exact solutions, and many-body
/// unitarity, number and energy conservation.
pub fn conservation_suite(systems: usize, seed: u64) -> CheckResult {
    run("conservation", |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = uniform_grid(2.0, 0.1);
        for case in 0..systems {
            let d = 2 + case % 3;
            let ms = ModeSystem::dense(random_hermitian(d, 1.0, &mut rng), random_symmetric(d, 1.0, &mut rng))?;
            let phi = random_unit_vector(d, &mut rng);
            match evolve_hartree(&ms, &phi, &grid, DEFAULT_TOL) {
                Ok(traj) => {
                    t.le(traj.norm_drift(), 1e-8, || format!("hartree norm, case {case}"));
                    t.le(traj.energy_drift(), 1e-6, || format!("hartree energy, case {case}"));
                }
                Err(e) => t.error(&format!("hartree case {case}"), e),
            }
        }
        // free diagonal and single-mode exact solutions
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.3), c(-1.1), c(2.0)]));
        let ms = ModeSystem::dense(h, DMatrix::zeros(3, 3))?;
        let phi = random_unit_vector(3, &mut rng);
        let traj = evolve_hartree(&ms, &phi, &grid, DEFAULT_TOL)?;
        for (s, state) in traj.times.iter().zip(&traj.states) {
            for p in 0..3 {
                let want = phi[p] * C64::new(0.0, -ms.h()[(p, p)].re * s).exp();
                t.le((state[p] - want).norm(), 1e-9, || format!("free solution at t={s}"));
            }
        }
        let g = 1.7;
        let ms = ModeSystem::dense(DMatrix::zeros(1, 1), DMatrix::from_element(1, 1, g))?;
        let phi = DVector::from_element(1, C64::new(0.6, 0.8));
        let traj = evolve_hartree(&ms, &phi, &grid, DEFAULT_TOL)?;
        for (s, state) in traj.times.iter().zip(&traj.states) {
            let want = phi[0] * C64::new(0.0, -g * s).exp();
            t.le((state[0] - want).norm(), 1e-9, || format!("single-mode solution at t={s}"));
        }
        // many-body propagation
        for case in 0..systems.min(6) {
            let d = 2 + case % 2;
            let ms = ModeSystem::dense(random_hermitian(d, 1.0, &mut rng), random_symmetric(d, 1.0, &mut rng))?;
            let basis = Arc::new(FockBasis::new(d, Sector::Truncated(5))?);
            let h = build_hamiltonian(&ms, 4, &basis)?;
            let dense = PropagatorPlan::with_method(h.clone(), PropagatorMethod::DenseEig)?;
            let krylov = PropagatorPlan::with_method(h.clone(), PropagatorMethod::Krylov)?;
            let v = random_state(&basis, 5, &mut rng);
            let e0 = h.expectation(&v)?.re;
            let w0 = v.sector_weights();
            for s in [0.3, 1.0] {
                let a = dense.evolve(&v, s)?;
                let b = krylov.evolve(&v, s)?;
                t.le((a.norm() - 1.0).abs(), 1e-9, || format!("unitarity, case {case}"));
                t.le(a.max_abs_diff(&b)?, 1e-8, || format!("dense vs krylov, case {case}"));
                t.le((h.expectation(&a)?.re - e0).abs(), 1e-8, || format!("energy, case {case}"));
                for (x, y) in a.sector_weights().iter().zip(&w0) {
                    t.le((x - y).abs(), 1e-9, || format!("sector weight, case {case}"));
                }
            }
            let ab = dense.evolve(&dense.evolve(&v, 0.4)?, 0.7)?;
            t.le(ab.max_abs_diff(&dense.evolve(&v, 1.1)?)?, 1e-8, || format!("group law, case {case}"));
        }
        Ok(())
    })
}

/// `op ≤ HS ≤ trace` on random pairs, and `trace ≤ 2·HS` against rank-one
/// projectors.
pub fn norm_ordering_suite(cases: usize, seed: u64) -> CheckResult {
    run("norm_ordering", |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for case in 0..cases {
            let d = 2 + case % 3;
            let random_dm = |rng: &mut ChaCha8Rng| {
                let a = DMatrix::from_fn(d, d, |_, _| random_complex(rng));
                let m = &a * a.adjoint();
                let tr = m.trace();
                m / tr
            };
            let a = random_dm(&mut rng);
            let b = random_dm(&mut rng);
            let dd = distances(&a, &b)?;
            t.truth(dd.ordered(1e-12), || format!("ordering, case {case}: {dd:?}"));
            let p = projector(&random_unit_vector(d, &mut rng));
            let dp = distances(&a, &p)?;
            t.truth(dp.ordered(1e-12), || format!("ordering vs projector, case {case}"));
            t.le(dp.trace - 2.0 * dp.hilbert_schmidt, 1e-12, || format!("rank-one trace bound, case {case}"));
        }
        Ok(())
    })
}

pub fn run_invariant_suite(level: Level, seed: u64) -> SuiteReport {
    let full = level == Level::Full;
    let suites = vec![
        ccr_suite(if full { 400 } else { 100 }, seed),
        adjointness_suite(if full { 400 } else { 100 }, seed + 1),
        second_quantization_suite(if full { 200 } else { 40 }, seed + 2),
        operator_bounds_suite(if full { 400 } else { 100 }, seed + 3),
        weyl_suite(if full { 60 } else { 15 }, seed + 4),
        theta_constructions_suite(if full { 8 } else { 6 }, seed + 5),
        weyl_coefficients_suite(
            if full { &[(6, 1), (6, 2), (8, 1), (10, 2), (12, 3)] } else { &[(6, 1), (6, 2), (8, 1)] },
            seed + 6,
        ),
        laguerre_envelope_suite(if full { 5000 } else { 500 }, seed + 7),
        number_moment_bound_suite(if full { &[50, 200, 800, 3200, 12800] } else { &[50, 200, 800, 3200] }),
        conservation_suite(20, seed + 8),
        norm_ordering_suite(if full { 1000 } else { 200 }, seed + 9),
    ];
    SuiteReport { level, passed: suites.iter().all(|s| s.passed), suites }
}
