//! Weyl displacement `C(α) = exp(a*(α) - a(ᾱ))` on a truncated basis.
//!
//! Applied in normal-ordered form
//! `C(α) = e^{-‖α‖²/2} exp(a*(α)) exp(-a(ᾱ))`, one Taylor series per
//! factor. The annihilation series terminates after at most `n_max + 1`
//! terms. The creation series only ever raises the particle number, so
//! dropping amplitudes above `n_max` at every step yields exactly
//! `P_{≤n_max} C(α) v` for any `v` supported in the basis; the only error is
//! the weight pushed past the cutoff, reported as the truncation loss.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use super::operator::{field_apply_into, Ladder};
use super::vector::FockVector;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Displaced {
    pub state: FockVector,
    /// `‖v‖² - ‖C(α)v‖²` as seen inside the basis.
    pub loss: f64,
}

/// Minimal `n_max` for displacing by `α` with negligible Poisson tail.
pub fn headroom(alpha_norm: f64) -> usize {
    (alpha_norm * alpha_norm + 8.0 * alpha_norm + 16.0).ceil() as usize
}

pub fn weyl_apply(alpha: &DVector<C64>, v: &FockVector) -> Result<Displaced> {
    let basis = v.basis().clone();
    if !basis.is_truncated() {
        return Err(Error::Contract("Weyl operators need a truncated basis".into()));
    }
    if alpha.len() != basis.d() {
        return Err(Error::Shape(format!("displacement of length {} for {} modes", alpha.len(), basis.d())));
    }
    let norm_sqr: f64 = alpha.iter().map(|z| z.norm_sqr()).sum();
    if norm_sqr == 0.0 {
        return Ok(Displaced { state: v.clone(), loss: 0.0 });
    }
    let alpha_bar = alpha.map(|z| z.conj());

    let series = |kind: Ladder, f: &DVector<C64>, start: &FockVector, sign: f64| -> Result<FockVector> {
        let mut acc = start.clone();
        let mut term = start.clone();
        for k in 1..=basis.n_max() + 1 {
            term = field_apply_into(kind, f, &term, basis.clone())?;
            term.scale(C64::new(sign / k as f64, 0.0));
            if term.coeffs().iter().all(|z| *z == C64::new(0.0, 0.0)) {
                break;
            }
            acc.axpy(C64::new(1.0, 0.0), &term)?;
        }
        Ok(acc)
    };

    let lowered = series(Ladder::Annihilate, &alpha_bar, v, -1.0)?;
    let mut state = series(Ladder::Create, alpha, &lowered, 1.0)?;
    state.scale(C64::new((-norm_sqr / 2.0).exp(), 0.0));
    let loss = v.norm_sqr() - state.norm_sqr();
    Ok(Displaced { state, loss })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fock::{FockBasis, Sector};
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_displacement_is_identity() {
        let b = Arc::new(FockBasis::new(2, Sector::Truncated(3)).unwrap());
        let v = FockVector::basis_state(b, &[1, 2]).unwrap();
        let out = weyl_apply(&DVector::from_element(2, C64::new(0.0, 0.0)), &v).unwrap();
        assert_eq!(out.state, v);
        assert_eq!(out.loss, 0.0);
    }

    #[test]
    fn single_mode_coherent_amplitudes() {
        let b = Arc::new(FockBasis::new(1, Sector::Truncated(headroom(2.0))).unwrap());
        let out = weyl_apply(&DVector::from_element(1, C64::new(2.0, 0.0)), &FockVector::vacuum(b).unwrap()).unwrap();
        let mut fact = 1.0;
        for k in 0..20u16 {
            if k > 0 {
                fact *= k as f64;
            }
            let want = (-2.0f64).exp() * 2f64.powi(k as i32) / fact.sqrt();
            assert_abs_diff_eq!(out.state.amplitude(&[k]).re, want, epsilon = 1e-13);
        }
        assert!(out.loss.abs() < 1e-10);
    }

    #[test]
    fn fixed_basis_is_a_contract_violation() {
        let b = Arc::new(FockBasis::new(1, Sector::Fixed(2)).unwrap());
        let v = FockVector::basis_state(b, &[2]).unwrap();
        let err = weyl_apply(&DVector::from_element(1, C64::new(1.0, 0.0)), &v).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn headroom_rule() {
        assert_eq!(headroom(4.0), 64);
        assert_eq!(headroom(2.0), 36);
    }
}
