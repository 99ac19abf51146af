//! Convergence sweeps: exact many-body evolution against Hartree dynamics
//! over a range of particle numbers.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::config::{to_dvector, ExperimentConfig, Family};
use super::report::{envelope_constant, fit_all, ConvergenceReport, Metric, ReportRow, WeightRow};
use crate::dynamics::PropagatorPlan;
use crate::fock::{FockBasis, FockVector, ModeSystem, Sector};
use crate::hartree::evolve_hartree;
use crate::linalg::{cdot, projector, vnorm};
use crate::rdm::{distances, mixed_target, reduced_dm, OneParticleDM};
use crate::states::{
    coherent_basis, coherent_state, product_state, random_excitation, superposition, theta_state, SuperpositionKind,
    SuperpositionSpec, ThetaMethod,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Worker threads; results are identical for any value.
    pub threads: usize,
    /// Record wall-clock time per row. Off by default so that output files
    /// are reproducible byte for byte.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { threads: 1, timing: false }
    }
}

/// Runs `f` on every item, in parallel when `threads > 1`; results keep the
/// item order and the first error (by item order) wins.
pub fn parallel_map<T, F>(items: &[usize], threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(|&i| f(i)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<T>>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads.min(items.len()) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= items.len() {
                    break;
                }
                let out = f(items[k]);
                slots.lock().expect("worker panicked")[k] = Some(out);
            });
        }
    });
    slots.into_inner().expect("worker panicked").into_iter().map(|o| o.expect("every slot filled")).collect()
}

/// `φ_t` for every requested time (any sign), integrating forward and
/// backward from zero.
pub fn hartree_states(ms: &ModeSystem, phi: &DVector<C64>, t_list: &[f64], tol: f64) -> Result<Vec<DVector<C64>>> {
    let mut fwd: Vec<f64> = t_list.iter().copied().filter(|&t| t > 0.0).collect();
    let mut bwd: Vec<f64> = t_list.iter().copied().filter(|&t| t < 0.0).collect();
    fwd.sort_by(f64::total_cmp);
    fwd.dedup();
    bwd.sort_by(|a, b| b.total_cmp(a));
    bwd.dedup();
    let run = |grid: Vec<f64>| -> Result<Vec<(f64, DVector<C64>)>> {
        let mut full = vec![0.0];
        full.extend(grid);
        let traj = evolve_hartree(ms, phi, &full, tol)?;
        Ok(traj.times.into_iter().zip(traj.states).collect())
    };
    let mut table = run(fwd)?;
    table.extend(run(bwd)?);
    Ok(t_list
        .iter()
        .map(|t| table.iter().find(|(s, _)| s == t).expect("every time integrated").1.clone())
        .collect())
}

fn sorted_times(cfg: &ExperimentConfig) -> Vec<f64> {
    let mut ts = cfg.t_list.clone();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// The clock is only read when timing is on (it is unavailable on some
/// targets, e.g. bare wasm).
fn timed<T>(timing: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    if !timing {
        return Ok((f()?, 0.0));
    }
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

/// Single-state families against `|φ_t⟩⟨φ_t|`, in trace norm.
pub fn run_convergence_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ConvergenceReport> {
    cfg.validate()?;
    if cfg.state.family == Family::Superposition {
        return Err(Error::Config("superposition configs run through the superposition sweep".into()));
    }
    let hash = cfg.hash();
    let ms = cfg.system.build(cfg.seed)?;
    let phi = cfg.phi()?;
    let d = ms.d();
    let ts = sorted_times(cfg);
    let targets: Vec<DMatrix<C64>> =
        hartree_states(&ms, &phi, &ts, cfg.tolerances.hartree)?.iter().map(projector).collect();
    let sched = cfg.m_schedule();

    let cells = parallel_map(&cfg.n_list, opts.threads, |n| {
        let (m, basis, v): (usize, Arc<FockBasis>, FockVector) = match cfg.state.family {
            Family::Product => {
                let b = Arc::new(FockBasis::new(d, Sector::Fixed(n))?);
                (0, b.clone(), product_state(&phi, n, &b)?)
            }
            Family::Coherent => {
                let b = coherent_basis(d, n, vnorm(&phi))?;
                (0, b.clone(), coherent_state(&phi, n, &b)?)
            }
            Family::Theta => {
                let m = sched.m(n);
                let b = Arc::new(FockBasis::new(d, Sector::Fixed(n))?);
                let exc = random_excitation(&phi, m, cfg.seed)?;
                (m, b.clone(), theta_state(&phi, &exc, n, ThetaMethod::CreationPolynomial, &b)?)
            }
            Family::Superposition => unreachable!("rejected above"),
        };
        let envelope = match cfg.state.family {
            Family::Theta => (m as f64 / 2.0).exp() * ((m + 1) as f64).powi(7) / (n as f64).sqrt(),
            _ => 1.0 / (n as f64).sqrt(),
        };
        let plan = PropagatorPlan::for_system(&ms, n, &basis)?;
        let mut rows = Vec::with_capacity(ts.len());
        for (t, target) in ts.iter().zip(&targets) {
            let (dist, runtime) = timed(opts.timing, || {
                let vt = plan.evolve(&v, *t)?;
                let rho = reduced_dm(&vt)?;
                distances(&rho.rho, target)
            })?;
            rows.push(ReportRow {
                n,
                m,
                t: *t,
                trace_dist: dist.trace,
                hs_dist: dist.hilbert_schmidt,
                op_dist: dist.operator,
                cross_term: None,
                bound_envelope: envelope,
                runtime_s: runtime,
                config_hash: hash.clone(),
            });
        }
        Ok(rows)
    })?;
    let rows: Vec<ReportRow> = cells.into_iter().flatten().collect();
    let family = match cfg.state.family {
        Family::Product => "product",
        Family::Coherent => "coherent",
        _ => "theta",
    };
    Ok(ConvergenceReport {
        config_hash: hash,
        family: family.into(),
        metric: Metric::Trace,
        fits: fit_all(&rows, Metric::Trace),
        envelope_constant: envelope_constant(&rows, Metric::Trace),
        rows,
        weights: Vec::new(),
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

/// Least-squares `w` minimizing `‖ρ − Σ w_i |φ_i⟩⟨φ_i|‖_HS`.
pub fn fit_mixture_weights(rho: &OneParticleDM, phis: &[DVector<C64>]) -> Result<Vec<f64>> {
    let k = phis.len();
    let gram = DMatrix::from_fn(k, k, |i, j| cdot(&phis[i], &phis[j]).norm_sqr());
    let rhs = DVector::from_fn(k, |i, _| cdot(&phis[i], &(&rho.rho * &phis[i])).re);
    let w = gram.lu().solve(&rhs).ok_or_else(|| Error::Degenerate { min_eig: 0.0 })?;
    Ok(w.iter().copied().collect())
}

/// Superpositions against the limiting mixture, in Hilbert–Schmidt norm.
pub fn run_superposition_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let sc = match (&cfg.state.family, &cfg.state.superposition) {
        (Family::Superposition, Some(sc)) => sc,
        _ => return Err(Error::Config("superposition sweep needs a superposition config".into())),
    };
    let hash = cfg.hash();
    let ms = cfg.system.build(cfg.seed)?;
    let d = ms.d();
    let family: Vec<DVector<C64>> = sc.family.iter().map(|f| to_dvector(f)).collect();
    if sc.kind == SuperpositionKind::Psi {
        // the limiting mixture is formed from unit Hartree solutions
        if let Some(f) = family.iter().find(|f| (vnorm(f) - 1.0).abs() > 1e-10) {
            return Err(Error::Config(format!("Psi sweep components must be unit vectors (norm {})", vnorm(f))));
        }
    }
    let coeffs: Vec<C64> = sc.coeffs.iter().map(|z| C64::new(z[0], z[1])).collect();
    let ts = sorted_times(cfg);
    let evolved: Vec<Vec<DVector<C64>>> = family
        .iter()
        .map(|f| hartree_states(&ms, f, &ts, cfg.tolerances.hartree))
        .collect::<Result<_>>()?;
    let sched = cfg.m_schedule();
    let k = family.len();

    let cells = parallel_map(&cfg.n_list, opts.threads, |n| {
        let m = if sc.kind == SuperpositionKind::Theta { sched.m(n) } else { 0 };
        let spec = match sc.kind {
            SuperpositionKind::Theta => SuperpositionSpec::theta(coeffs.clone(), family.clone(), &vec![m; k], cfg.seed)?,
            kind => SuperpositionSpec::new(kind, coeffs.clone(), family.clone()),
        };
        let basis = match sc.kind {
            SuperpositionKind::Psi => coherent_basis(d, n, spec.sup_norm())?,
            _ => Arc::new(FockBasis::new(d, Sector::Fixed(n))?),
        };
        let sup = superposition(&spec, n, &basis)?;
        let mut cross = 0.0;
        for i in 0..k {
            for j in i + 1..k {
                cross += sup.gram[(i, j)].norm();
            }
        }
        let nf = n as f64;
        let envelope = match sc.kind {
            SuperpositionKind::Phi => nf.powf(-0.25),
            SuperpositionKind::Theta => nf.powf(-0.25) * (m as f64 / 2.0).exp() * ((m + 1) as f64).powi(3),
            SuperpositionKind::Psi => nf.powf(-0.5),
        };
        let limit = spec.limit_weights();
        let coefficient: Vec<f64> = sup.coeffs_n.iter().map(|z| z.norm_sqr()).collect();
        let plan = PropagatorPlan::for_system(&ms, n, &basis)?;
        let mut rows = Vec::with_capacity(ts.len());
        let mut weights = Vec::with_capacity(ts.len());
        for (ti, t) in ts.iter().enumerate() {
            let phis_t: Vec<DVector<C64>> = evolved.iter().map(|e| e[ti].clone()).collect();
            let ((dist, fitted), runtime) = timed(opts.timing, || {
                let vt = plan.evolve(&sup.state, *t)?;
                let rho = reduced_dm(&vt)?;
                let target = mixed_target(&limit, &phis_t)?;
                Ok((distances(&rho.rho, &target.rho)?, fit_mixture_weights(&rho, &phis_t)?))
            })?;
            rows.push(ReportRow {
                n,
                m,
                t: *t,
                trace_dist: dist.trace,
                hs_dist: dist.hilbert_schmidt,
                op_dist: dist.operator,
                cross_term: Some(cross),
                bound_envelope: envelope,
                runtime_s: runtime,
                config_hash: hash.clone(),
            });
            weights.push(WeightRow { n, t: *t, limit: limit.clone(), coefficient: coefficient.clone(), fitted });
        }
        Ok((rows, weights))
    })?;
    let mut rows = Vec::new();
    let mut weights = Vec::new();
    for (r, w) in cells {
        rows.extend(r);
        weights.extend(w);
    }
    let family = match sc.kind {
        SuperpositionKind::Phi => "superposition_phi",
        SuperpositionKind::Theta => "superposition_theta",
        SuperpositionKind::Psi => "superposition_psi",
    };
    Ok(ConvergenceReport {
        config_hash: hash,
        family: family.into(),
        metric: Metric::HilbertSchmidt,
        fits: fit_all(&rows, Metric::HilbertSchmidt),
        envelope_constant: envelope_constant(&rows, Metric::HilbertSchmidt),
        rows,
        weights,
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

/// Dispatches on the configured family.
pub fn run_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ConvergenceReport> {
    match cfg.state.family {
        Family::Superposition => run_superposition_sweep(cfg, opts),
        _ => run_convergence_sweep(cfg, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_keeps_order_and_first_error() {
        let items: Vec<usize> = (0..20).collect();
        let out = parallel_map(&items, 4, |i| Ok(i * i)).unwrap();
        assert_eq!(out, items.iter().map(|i| i * i).collect::<Vec<_>>());
        let err = parallel_map(&items, 4, |i| if i >= 5 { Err(Error::Invalid(format!("{i}"))) } else { Ok(i) });
        assert!(matches!(err, Err(Error::Invalid(s)) if s == "5"));
    }

    #[test]
    fn free_product_sweep_is_exact() {
        let text = r#"{
            "system": {"geometry": "lattice", "points": 3,
                       "dispersion": {"kind": "laplacian", "hopping": 1.0},
                       "potential": {"kind": "none"}},
            "state": {"family": "product"},
            "n_list": [2, 3, 4],
            "t_list": [0.0, 0.7, -0.3],
            "seed": 3
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let rep = run_convergence_sweep(&cfg, &RunOptions::default()).unwrap();
        assert_eq!(rep.rows.len(), 9);
        assert!(rep.rows.iter().all(|r| r.trace_dist < 1e-12));
        assert_eq!(rep.rows[0].t, -0.3);
        assert!(rep.fits.iter().all(|f| matches!(f, super::super::report::FitOutcome::ExactRegime { .. })));
    }
}
