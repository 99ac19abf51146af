//! The discretized one-particle space.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;

/// Kinetic term on a periodic ring of lattice points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Dispersion {
    /// Nearest-neighbour discrete Laplacian, `-Δ ≈ J (2δ_pq - δ_{q,p±1})`.
    /// On a two-site ring both neighbours coincide and the hops add up.
    Laplacian { hopping: f64 },
    /// Explicit on-site energies and a uniform nearest-neighbour hopping.
    Tight { onsite: Vec<f64>, hopping: f64 },
}

/// Pair potential `v(p, q)` as a function of ring distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PairPotential {
    None,
    /// `g δ_pq`.
    Contact { g: f64 },
    /// `g` for every pair, including `p = q`.
    Uniform { g: f64 },
    /// `g exp(-r²/(2w²))` with `r` the periodic distance.
    Gaussian { g: f64, width: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Lattice { points: usize, dispersion: Dispersion, potential: PairPotential },
    Dense,
}

/// `d` modes with a Hermitian one-body matrix `h` and a real symmetric,
/// position-diagonal pair kernel `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSystem {
    h: DMatrix<C64>,
    v: DMatrix<f64>,
    geometry: Geometry,
}

impl ModeSystem {
    pub fn dense(h: DMatrix<C64>, v: DMatrix<f64>) -> Result<Self> {
        let d = h.nrows();
        if d == 0 || h.ncols() != d || v.nrows() != d || v.ncols() != d {
            return Err(Error::Shape(format!(
                "h is {}x{}, v is {}x{}",
                h.nrows(),
                h.ncols(),
                v.nrows(),
                v.ncols()
            )));
        }
        let defect = hermitian_defect(&h);
        if defect > HERMITIAN_TOL {
            return Err(Error::Invalid(format!("h is not Hermitian (defect {defect:e})")));
        }
        for p in 0..d {
            for q in 0..d {
                if !v[(p, q)].is_finite() {
                    return Err(Error::Invalid(format!("v({p},{q}) is not finite")));
                }
                if v[(p, q)] != v[(q, p)] {
                    return Err(Error::Invalid(format!("v is not symmetric at ({p},{q})")));
                }
            }
        }
        Ok(Self { h, v, geometry: Geometry::Dense })
    }

    pub fn lattice(points: usize, dispersion: Dispersion, potential: PairPotential) -> Result<Self> {
        if points == 0 {
            return Err(Error::Invalid("lattice needs at least one point".into()));
        }
        let l = points;
        let mut h = DMatrix::<C64>::zeros(l, l);
        let (onsite, hopping) = match &dispersion {
            Dispersion::Laplacian { hopping } => (vec![2.0 * hopping; l], *hopping),
            Dispersion::Tight { onsite, hopping } => {
                if onsite.len() != l {
                    return Err(Error::Shape(format!(
                        "{} on-site energies for {l} points",
                        onsite.len()
                    )));
                }
                (onsite.clone(), *hopping)
            }
        };
        for p in 0..l {
            h[(p, p)] += C64::new(onsite[p], 0.0);
            if l > 1 {
                h[(p, (p + 1) % l)] -= C64::new(hopping, 0.0);
                h[(p, (p + l - 1) % l)] -= C64::new(hopping, 0.0);
            }
        }
        let mut v = DMatrix::<f64>::zeros(l, l);
        for p in 0..l {
            for q in 0..l {
                let raw = p.abs_diff(q);
                let r = raw.min(l - raw) as f64;
                v[(p, q)] = match potential {
                    PairPotential::None => 0.0,
                    PairPotential::Contact { g } => {
                        if p == q {
                            g
                        } else {
                            0.0
                        }
                    }
                    PairPotential::Uniform { g } => g,
                    PairPotential::Gaussian { g, width } => g * (-r * r / (2.0 * width * width)).exp(),
                };
            }
        }
        let mut ms = Self::dense(h, v)?;
        ms.geometry = Geometry::Lattice { points, dispersion, potential };
        Ok(ms)
    }

    pub fn d(&self) -> usize {
        self.h.nrows()
    }

    pub fn h(&self) -> &DMatrix<C64> {
        &self.h
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn kernel(&self, p: usize, q: usize) -> f64 {
        self.v[(p, q)]
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn is_free(&self) -> bool {
        self.v.iter().all(|&x| x == 0.0)
    }

    /// Same one-body part, interaction switched off.
    pub fn without_interaction(&self) -> Self {
        let d = self.d();
        Self { h: self.h.clone(), v: DMatrix::zeros(d, d), geometry: Geometry::Dense }
    }

    /// Checks a one-particle vector has length `d`.
    pub fn check_vector(&self, phi: &DVector<C64>) -> Result<()> {
        if phi.len() != self.d() {
            return Err(Error::Shape(format!("vector of length {} for {} modes", phi.len(), self.d())));
        }
        Ok(())
    }
}

pub fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_laplacian_is_hermitian_and_annihilates_constants() {
        let ms = ModeSystem::lattice(5, Dispersion::Laplacian { hopping: 1.0 }, PairPotential::Contact { g: 2.0 })
            .unwrap();
        let ones = DVector::from_element(5, C64::new(1.0, 0.0));
        let r = ms.h() * ones;
        assert!(r.iter().all(|z| z.norm() < 1e-14));
        assert_eq!(ms.kernel(2, 2), 2.0);
        assert_eq!(ms.kernel(1, 2), 0.0);
    }

    #[test]
    fn two_site_ring_accumulates_hops() {
        let ms = ModeSystem::lattice(2, Dispersion::Laplacian { hopping: 1.0 }, PairPotential::None).unwrap();
        assert_eq!(ms.h()[(0, 1)], C64::new(-2.0, 0.0));
        assert!(ms.is_free());
    }

    #[test]
    fn rejects_non_hermitian_and_asymmetric() {
        let mut h = DMatrix::<C64>::zeros(2, 2);
        h[(0, 1)] = C64::new(1.0, 0.0);
        assert!(ModeSystem::dense(h, DMatrix::zeros(2, 2)).is_err());
        let mut v = DMatrix::<f64>::zeros(2, 2);
        v[(0, 1)] = 1.0;
        assert!(ModeSystem::dense(DMatrix::zeros(2, 2), v).is_err());
    }

    #[test]
    fn gaussian_kernel_uses_periodic_distance() {
        let ms = ModeSystem::lattice(
            6,
            Dispersion::Laplacian { hopping: 0.5 },
            PairPotential::Gaussian { g: 1.0, width: 1.0 },
        )
        .unwrap();
        assert_eq!(ms.kernel(0, 5), ms.kernel(0, 1));
        assert!((ms.kernel(0, 3) - (-4.5f64).exp()).abs() < 1e-15);
    }
}
