//! Exact many-body propagation `U(t) = e^{-itH}` and the fluctuation
//! propagator `W(t, 0) = C*(√n φ_t) U(t) C(√n φ_0)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::fock::{build_hamiltonian, headroom, weyl_apply, FockBasis, FockVector, ModeSystem, SparseOperator};
use crate::hartree::HartreeTrajectory;
use crate::linalg::{hermitian_eigen, vnorm};
use crate::{Error, Result};

/// Largest sector block diagonalized densely.
pub const DENSE_LIMIT: usize = 4000;
pub const KRYLOV_TOL: f64 = 1e-10;
pub const KRYLOV_DIM: usize = 40;
const KRYLOV_MAX_SUBSTEPS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorMethod {
    DenseEig,
    Krylov,
}

#[derive(Debug, Clone)]
struct SectorEigen {
    start: usize,
    values: Vec<f64>,
    vectors: DMatrix<C64>,
}

/// A Hamiltonian prepared for repeated propagation. Immutable once built,
/// so one plan can serve concurrent `evolve` calls.
#[derive(Debug, Clone)]
pub struct PropagatorPlan {
    method: PropagatorMethod,
    h: SparseOperator,
    krylov_dim: usize,
    tol: f64,
    sectors: Vec<SectorEigen>,
}

impl PropagatorPlan {
    /// Dense eigendecomposition of every particle-number block when each
    /// block has at most [`DENSE_LIMIT`] states, Krylov otherwise.
    pub fn new(h: SparseOperator) -> Result<Self> {
        let basis = h.basis().clone();
        let largest = basis.totals().map(|k| basis.sector_range(k).len()).max().unwrap_or(0);
        let method = if largest <= DENSE_LIMIT { PropagatorMethod::DenseEig } else { PropagatorMethod::Krylov };
        Self::with_method(h, method)
    }

    pub fn with_method(h: SparseOperator, method: PropagatorMethod) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::Contract("propagation needs a Hermitian Hamiltonian".into()));
        }
        if !h.conserves_number() {
            return Err(Error::Contract("propagation needs a number-conserving Hamiltonian".into()));
        }
        let basis = h.basis().clone();
        let mut sectors = Vec::new();
        if method == PropagatorMethod::DenseEig {
            for k in basis.totals() {
                let range = basis.sector_range(k);
                if range.len() > DENSE_LIMIT {
                    return Err(Error::Capacity { dim: range.len() as u128, cap: DENSE_LIMIT });
                }
                let (values, vectors) = hermitian_eigen(&h.sector_block(k));
                sectors.push(SectorEigen { start: range.start, values, vectors });
            }
        }
        Ok(Self { method, h, krylov_dim: KRYLOV_DIM, tol: KRYLOV_TOL, sectors })
    }

    /// Plan for `H` of `ms` with interaction scaled by `1/(2 n_scale)`.
    pub fn for_system(ms: &ModeSystem, n_scale: usize, basis: &Arc<FockBasis>) -> Result<Self> {
        Self::new(build_hamiltonian(ms, n_scale, basis)?)
    }

    pub fn method(&self) -> PropagatorMethod {
        self.method
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        self.h.basis()
    }

    pub fn hamiltonian(&self) -> &SparseOperator {
        &self.h
    }

    pub fn krylov_dim(&self) -> usize {
        self.krylov_dim
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn evolve(&self, v: &FockVector, t: f64) -> Result<FockVector> {
        evolve_fock(self, v, t)
    }
}

/// `U(t) v`.
pub fn evolve_fock(plan: &PropagatorPlan, v: &FockVector, t: f64) -> Result<FockVector> {
    if !Arc::ptr_eq(v.basis(), plan.basis()) && v.basis().as_ref() != plan.basis().as_ref() {
        return Err(Error::Shape("state does not live on the propagator basis".into()));
    }
    if t == 0.0 {
        return Ok(v.clone());
    }
    let coeffs = match plan.method {
        PropagatorMethod::DenseEig => dense_evolve(plan, v.coeffs(), t),
        PropagatorMethod::Krylov => krylov_evolve(plan, v.coeffs(), t)?,
    };
    FockVector::from_coeffs(plan.basis().clone(), coeffs)
}

fn dense_evolve(plan: &PropagatorPlan, x: &[C64], t: f64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); x.len()];
    for s in &plan.sectors {
        let k = s.values.len();
        let block = DVector::from_column_slice(&x[s.start..s.start + k]);
        if block.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            continue;
        }
        let mut c = s.vectors.adjoint() * block;
        for (ci, &lam) in c.iter_mut().zip(&s.values) {
            *ci *= C64::new(0.0, -lam * t).exp();
        }
        let y = &s.vectors * c;
        out[s.start..s.start + k].copy_from_slice(y.as_slice());
    }
    out
}

fn krylov_evolve(plan: &PropagatorPlan, x: &[C64], t: f64) -> Result<Vec<C64>> {
    let mut y = x.to_vec();
    let mut done = 0.0;
    let mut dt = t;
    let mut substeps = 0;
    while (t - done).abs() > 0.0 {
        if substeps >= KRYLOV_MAX_SUBSTEPS {
            return Err(Error::Krylov(format!("no convergence after {substeps} substeps at t = {done}")));
        }
        let step = if (dt.abs()) >= (t - done).abs() { t - done } else { dt };
        let (next, err) = lanczos_expm(&plan.h, &y, step, plan.krylov_dim);
        if err <= plan.tol {
            y = next;
            done = if step == t - done { t } else { done + step };
            substeps += 1;
            if err < plan.tol / 100.0 {
                dt = step * 1.5;
            } else {
                dt = step;
            }
        } else {
            dt = step / 2.0;
            if dt.abs() < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Krylov(format!("step collapsed at t = {done} (error {err:e})")));
            }
        }
    }
    Ok(y)
}

fn cdot_slice(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `e^{-i dt H} x` in a Krylov space of dimension at most `m`, with the
/// standard a-posteriori error estimate `β_m |e_m^T e^{-i dt T} e_1| ‖x‖`.
fn lanczos_expm(h: &SparseOperator, x: &[C64], dt: f64, m: usize) -> (Vec<C64>, f64) {
    let n = x.len();
    let beta0 = cdot_slice(x, x).re.sqrt();
    if beta0 == 0.0 {
        return (x.to_vec(), 0.0);
    }
    let m = m.min(n);
    let mut basis: Vec<Vec<C64>> = vec![x.iter().map(|z| z / beta0).collect()];
    let mut alpha = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut breakdown = false;
    for j in 0..m {
        h.apply_slice(&basis[j], &mut w);
        let a = cdot_slice(&basis[j], &w).re;
        alpha.push(a);
        // full reorthogonalization keeps the small basis orthonormal
        for _ in 0..2 {
            for q in &basis {
                let c = cdot_slice(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = cdot_slice(&w, &w).re.sqrt();
        beta.push(b);
        if b < 1e-13 * (1.0 + a.abs()) {
            breakdown = true;
            break;
        }
        if j + 1 < m {
            basis.push(w.iter().map(|z| z / b).collect());
        }
    }
    let k = alpha.len();
    let mut tri = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        tri[(i, i)] = alpha[i];
        if i + 1 < k {
            tri[(i, i + 1)] = beta[i];
            tri[(i + 1, i)] = beta[i];
        }
    }
    let eig = tri.symmetric_eigen();
    let mut small = DVector::<C64>::zeros(k);
    for l in 0..k {
        let e1 = eig.eigenvectors[(0, l)];
        let phase = C64::new(0.0, -dt * eig.eigenvalues[l]).exp() * e1;
        for i in 0..k {
            small[i] += phase * eig.eigenvectors[(i, l)];
        }
    }
    let err = if breakdown { 0.0 } else { beta[k - 1] * small[k - 1].norm() * beta0 };
    let mut y = vec![C64::new(0.0, 0.0); n];
    for (i, q) in basis.iter().enumerate().take(k) {
        let c = small[i] * beta0;
        for (yi, qi) in y.iter_mut().zip(q) {
            *yi += c * qi;
        }
    }
    (y, err)
}

/// `W(t, 0) v = C(−√n φ_t) U(t) C(√n φ_0) v`, with the Weyl truncation loss
/// of both displacements summed.
#[derive(Debug, Clone)]
pub struct Fluctuation {
    pub state: FockVector,
    pub loss: f64,
}

pub fn fluctuation_apply(
    plan: &PropagatorPlan,
    n: usize,
    trajectory: &HartreeTrajectory,
    v: &FockVector,
    t: f64,
) -> Result<Fluctuation> {
    let basis = plan.basis();
    if !basis.is_truncated() {
        return Err(Error::Contract("fluctuation dynamics needs a truncated basis".into()));
    }
    if !trajectory.covers(0.0) || !trajectory.covers(t) {
        return Err(Error::Invalid(format!("trajectory does not cover [0, {t}]")));
    }
    let sqrt_n = C64::new((n as f64).sqrt(), 0.0);
    let phi0 = trajectory.at(0.0)? * sqrt_n;
    let phit = trajectory.at(t)? * sqrt_n;
    let need = headroom(vnorm(&phi0).max(vnorm(&phit)));
    if basis.n_max() < need {
        return Err(Error::Sector(format!("n_max = {} below headroom {need}", basis.n_max())));
    }
    let first = weyl_apply(&phi0, v)?;
    let moved = evolve_fock(plan, &first.state, t)?;
    let back = weyl_apply(&(-phit), &moved)?;
    Ok(Fluctuation { state: back.state, loss: first.loss + back.loss })
}

/// `‖(N+1)^δ v‖ = (Σ_k (k+1)^{2δ} ‖P_k v‖²)^{1/2}`.
pub fn number_moment(v: &FockVector, delta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::Invalid(format!("moment exponent {delta} must be nonnegative")));
    }
    let w = v.sector_weights();
    let s: f64 = w.iter().enumerate().map(|(k, x)| ((k + 1) as f64).powf(2.0 * delta) * x).sum();
    Ok(s.sqrt())
}

/// `log y ≤ log K + c|t|` fitted to samples: `c` is the least-squares slope
/// of `log y` against `|t|` (floored at a small positive value) and `K` the
/// smallest constant that makes the envelope hold at every sample.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExponentialEnvelope {
    pub constant: f64,
    pub rate: f64,
}

impl ExponentialEnvelope {
    pub fn eval(&self, t: f64) -> f64 {
        self.constant * (self.rate * t.abs()).exp()
    }
}

pub const MIN_ENVELOPE_RATE: f64 = 1e-6;

pub fn fit_exponential_envelope(times: &[f64], values: &[f64]) -> Result<ExponentialEnvelope> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::Invalid("envelope fit needs at least two matching samples".into()));
    }
    if values.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::Invalid("envelope fit needs positive samples".into()));
    }
    let xs: Vec<f64> = times.iter().map(|t| t.abs()).collect();
    let ys: Vec<f64> = values.iter().map(|y| y.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let rate = slope.max(MIN_ENVELOPE_RATE);
    let log_k = xs.iter().zip(&ys).map(|(x, y)| y - rate * x).fold(f64::NEG_INFINITY, f64::max);
    Ok(ExponentialEnvelope { constant: log_k.exp(), rate })
}
