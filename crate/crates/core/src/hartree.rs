//! Mean-field dynamics `i∂_t φ = hφ + (Σ_q v(·,q)|φ_q|²)φ` on the mode basis
//! (ħ = 1, dimensionless time), integrated with an adaptive Dormand–Prince
//! 5(4) pair.

use std::io::Write;

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::fock::ModeSystem;
use crate::linalg::{cdot, vnorm};
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
/// Allowed drift of `‖φ_t‖` before the integration is declared broken.
pub const NORM_DRIFT_TOL: f64 = 1e-8;
const MAX_STEPS: usize = 10_000_000;

fn mean_field(ms: &ModeSystem, phi: &DVector<C64>) -> DVector<C64> {
    let d = phi.len();
    let dens: Vec<f64> = phi.iter().map(|z| z.norm_sqr()).collect();
    let mut out = ms.h() * phi;
    for p in 0..d {
        let pot: f64 = (0..d).map(|q| ms.kernel(p, q) * dens[q]).sum();
        out[p] += phi[p] * pot;
    }
    out
}

/// `−i[(hφ)_p + (Σ_q v(p,q)|φ_q|²) φ_p]`.
pub fn hartree_rhs(ms: &ModeSystem, phi: &DVector<C64>) -> Result<DVector<C64>> {
    ms.check_vector(phi)?;
    Ok(mean_field(ms, phi) * C64::new(0.0, -1.0))
}

/// `⟨φ, hφ⟩ + ½ Σ_{pq} v(p,q)|φ_p|²|φ_q|²`.
pub fn hartree_energy(ms: &ModeSystem, phi: &DVector<C64>) -> Result<f64> {
    ms.check_vector(phi)?;
    let d = phi.len();
    let kinetic = cdot(phi, &(ms.h() * phi)).re;
    let mut pot = 0.0;
    for p in 0..d {
        for q in 0..d {
            pot += ms.kernel(p, q) * phi[p].norm_sqr() * phi[q].norm_sqr();
        }
    }
    Ok(kinetic + 0.5 * pot)
}

/// `⟨φ, (1 + h)φ⟩`, the discrete stand-in for the `H¹` norm.
pub fn energy_norm(ms: &ModeSystem, phi: &DVector<C64>) -> f64 {
    phi.norm_squared() + cdot(phi, &(ms.h() * phi)).re
}

#[derive(Debug, Clone)]
pub struct HartreeTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<C64>>,
    /// `∂_t φ` at each stored time, used for Hermite interpolation.
    pub derivatives: Vec<DVector<C64>>,
    pub norm_log: Vec<f64>,
    pub energy_log: Vec<f64>,
    pub energy_norm_log: Vec<f64>,
    pub steps: usize,
}

impl HartreeTrajectory {
    pub fn d(&self) -> usize {
        self.states[0].len()
    }

    pub fn norm_drift(&self) -> f64 {
        self.norm_log.iter().map(|x| (x - self.norm_log[0]).abs()).fold(0.0, f64::max)
    }

    pub fn energy_drift(&self) -> f64 {
        self.energy_log.iter().map(|x| (x - self.energy_log[0]).abs()).fold(0.0, f64::max)
    }

    pub fn covers(&self, t: f64) -> bool {
        let (lo, hi) = self.span();
        t >= lo && t <= hi
    }

    fn span(&self) -> (f64, f64) {
        let a = self.times[0];
        let b = *self.times.last().unwrap();
        (a.min(b), a.max(b))
    }

    /// `φ_t`: a stored sample when `t` is on the grid, otherwise cubic
    /// Hermite interpolation between the neighbouring samples.
    pub fn at(&self, t: f64) -> Result<DVector<C64>> {
        if !self.covers(t) {
            let (lo, hi) = self.span();
            return Err(Error::Invalid(format!("time {t} outside trajectory [{lo}, {hi}]")));
        }
        if let Some(i) = self.times.iter().position(|&s| s == t) {
            return Ok(self.states[i].clone());
        }
        let i = self
            .times
            .windows(2)
            .position(|w| (w[0] - t) * (w[1] - t) <= 0.0)
            .expect("covered time lies in some interval");
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
        let h10 = s.powi(3) - 2.0 * s * s + s;
        let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
        let h11 = s.powi(3) - s * s;
        let r = |x: f64| C64::new(x, 0.0);
        Ok(&self.states[i] * r(h00)
            + &self.derivatives[i] * r(h10 * h)
            + &self.states[i + 1] * r(h01)
            + &self.derivatives[i + 1] * r(h11 * h))
    }

    /// CSV with columns `t, re_0, im_0, …, norm, energy`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = vec!["t".to_string()];
        for p in 0..self.d() {
            header.push(format!("re_{p}"));
            header.push(format!("im_{p}"));
        }
        header.push("norm".into());
        header.push("energy".into());
        writeln!(w, "{}", header.join(","))?;
        for (i, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t:?}")];
            for z in self.states[i].iter() {
                row.push(format!("{:?}", z.re));
                row.push(format!("{:?}", z.im));
            }
            row.push(format!("{:?}", self.norm_log[i]));
            row.push(format!("{:?}", self.energy_log[i]));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

// Dormand–Prince 5(4) tableau; the right-hand side is autonomous, so the
// nodes are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Stepper<'a> {
    ms: &'a ModeSystem,
    phi: DVector<C64>,
    k1: DVector<C64>,
    t: f64,
    h: f64,
    tol: f64,
    steps: usize,
}

impl Stepper<'_> {
    fn rhs(&self, phi: &DVector<C64>) -> DVector<C64> {
        mean_field(self.ms, phi) * C64::new(0.0, -1.0)
    }

    /// Advances exactly to `target`, adapting the step on the way.
    fn advance_to(&mut self, target: f64) -> Result<()> {
        let dir = (target - self.t).signum();
        while (target - self.t) * dir > 0.0 {
            if self.steps >= MAX_STEPS {
                return Err(Error::Integration { t: self.t, reason: "step budget exhausted".into() });
            }
            let remaining = target - self.t;
            let mut h = self.h.abs().min(remaining.abs()) * dir;
            let last = h.abs() >= remaining.abs();
            if last {
                h = remaining;
            }
            let mut k: Vec<DVector<C64>> = Vec::with_capacity(7);
            k.push(self.k1.clone());
            for s in 1..7 {
                let mut y = self.phi.clone();
                for (j, kj) in k.iter().enumerate() {
                    if A[s][j] != 0.0 {
                        y += kj * C64::new(h * A[s][j], 0.0);
                    }
                }
                k.push(self.rhs(&y));
            }
            let mut y5 = self.phi.clone();
            let mut err = DVector::<C64>::zeros(self.phi.len());
            for s in 0..7 {
                if B5[s] != 0.0 {
                    y5 += &k[s] * C64::new(h * B5[s], 0.0);
                }
                err += &k[s] * C64::new(h * (B5[s] - B4[s]), 0.0);
            }
            // error per unit time
            let e = vnorm(&err) / h.abs();
            if e <= self.tol {
                self.t = if last { target } else { self.t + h };
                self.phi = y5;
                self.k1 = k.pop().unwrap();
                self.steps += 1;
            }
            let factor = if e == 0.0 { 5.0 } else { (0.9 * (self.tol / e).powf(0.2)).clamp(0.2, 5.0) };
            // keep the last proposal when a short final step was forced
            if !(last && e <= self.tol) {
                self.h = h.abs() * factor;
            }
            if self.h < 1e-14 * (1.0 + self.t.abs()) {
                return Err(Error::Integration { t: self.t, reason: format!("step size collapsed to {:e}", self.h) });
            }
        }
        Ok(())
    }
}

/// Integrates from `t_grid[0]` through every later grid time. The grid must
/// be strictly monotone (either direction). Local error per unit time is
/// kept below `tol`.
pub fn evolve_hartree(ms: &ModeSystem, phi0: &DVector<C64>, t_grid: &[f64], tol: f64) -> Result<HartreeTrajectory> {
    ms.check_vector(phi0)?;
    let n0 = vnorm(phi0);
    if (n0 - 1.0).abs() > 1e-10 {
        return Err(Error::Invalid(format!("initial state has norm {n0}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("tolerance {tol} must be positive")));
    }
    if t_grid.is_empty() || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Invalid("time grid must be nonempty and finite".into()));
    }
    let increasing = t_grid.windows(2).all(|w| w[1] > w[0]);
    let decreasing = t_grid.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::Invalid("time grid must be strictly monotone".into()));
    }
    let span = (t_grid[t_grid.len() - 1] - t_grid[0]).abs();
    let k1 = mean_field(ms, phi0) * C64::new(0.0, -1.0);
    let h0 = (0.01 / (1.0 + vnorm(&k1))).min(if span > 0.0 { span } else { 1.0 });
    let mut st = Stepper { ms, phi: phi0.clone(), k1, t: t_grid[0], h: h0, tol, steps: 0 };

    let mut traj = HartreeTrajectory {
        times: Vec::with_capacity(t_grid.len()),
        states: Vec::with_capacity(t_grid.len()),
        derivatives: Vec::with_capacity(t_grid.len()),
        norm_log: Vec::with_capacity(t_grid.len()),
        energy_log: Vec::with_capacity(t_grid.len()),
        energy_norm_log: Vec::with_capacity(t_grid.len()),
        steps: 0,
    };
    for &t in t_grid {
        st.advance_to(t)?;
        let norm = vnorm(&st.phi);
        if (norm - n0).abs() > NORM_DRIFT_TOL {
            return Err(Error::Integration { t, reason: format!("norm drifted by {:e}", norm - n0) });
        }
        traj.times.push(t);
        traj.states.push(st.phi.clone());
        traj.derivatives.push(st.k1.clone());
        traj.norm_log.push(norm);
        traj.energy_log.push(hartree_energy(ms, &st.phi)?);
        traj.energy_norm_log.push(energy_norm(ms, &st.phi));
    }
    traj.steps = st.steps;
    Ok(traj)
}

/// Uniform grid `0, dt, …, t_end` (inclusive), `dt` not exceeding `max_dt`.
pub fn uniform_grid(t_end: f64, max_dt: f64) -> Vec<f64> {
    let steps = ((t_end.abs() / max_dt).ceil() as usize).max(1);
    (0..=steps).map(|i| t_end * i as f64 / steps as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn single_mode(g: f64) -> ModeSystem {
        ModeSystem::dense(DMatrix::zeros(1, 1), DMatrix::from_element(1, 1, g)).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let ms = single_mode(2.0);
        let phi = DVector::from_element(1, C64::new(0.6, 0.8));
        let r = hartree_rhs(&ms, &phi).unwrap();
        let want = C64::new(0.0, -1.0) * 2.0 * phi[0];
        assert!((r[0] - want).norm() < 1e-15);
        assert!((hartree_energy(&ms, &phi).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn free_identity_energy() {
        let ms = ModeSystem::dense(DMatrix::identity(3, 3), DMatrix::zeros(3, 3)).unwrap();
        let phi = DVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0)]);
        assert!((hartree_energy(&ms, &phi).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_mode_phase_rotation() {
        let ms = single_mode(1.5);
        let phi0 = DVector::from_element(1, C64::new(1.0, 0.0));
        let traj = evolve_hartree(&ms, &phi0, &uniform_grid(2.0, 0.25), DEFAULT_TOL).unwrap();
        for (t, phi) in traj.times.iter().zip(&traj.states) {
            let want = C64::new(0.0, -1.5 * t).exp();
            assert!((phi[0] - want).norm() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn interpolation_between_samples() {
        let ms = single_mode(1.0);
        let phi0 = DVector::from_element(1, C64::new(1.0, 0.0));
        let traj = evolve_hartree(&ms, &phi0, &uniform_grid(1.0, 0.01), DEFAULT_TOL).unwrap();
        let got = traj.at(0.505).unwrap();
        assert!((got[0] - C64::new(0.0, -0.505).exp()).norm() < 1e-8);
        assert!(traj.at(1.5).is_err());
    }

    #[test]
    fn backwards_grid() {
        let ms = single_mode(1.0);
        let phi0 = DVector::from_element(1, C64::new(1.0, 0.0));
        let traj = evolve_hartree(&ms, &phi0, &[0.0, -1.0], DEFAULT_TOL).unwrap();
        assert!((traj.states[1][0] - C64::new(0.0, 1.0).exp()).norm() < 1e-9);
    }

    #[test]
    fn csv_layout() {
        let ms = single_mode(1.0);
        let phi0 = DVector::from_element(1, C64::new(1.0, 0.0));
        let traj = evolve_hartree(&ms, &phi0, &[0.0], DEFAULT_TOL).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,re_0,im_0,norm,energy\n0.0,1.0,0.0,1.0,0.5\n");
    }
}
