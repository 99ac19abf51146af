//! One-particle reduced density matrices and their distances.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::fock::{hermitian_defect, FockVector};
use crate::linalg::{hermitian_eigenvalues, projector, vnorm};
use crate::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues below this fail the run instead of being clipped.
pub const PSD_FLOOR: f64 = -1e-10;
pub const TRACE_TOL: f64 = 1e-10;

/// `T_pq = ⟨v, a†_p a_q v⟩`.
pub fn transition_matrix(v: &FockVector) -> DMatrix<C64> {
    let basis = v.basis();
    let d = basis.d();
    let mut t = DMatrix::<C64>::zeros(d, d);
    let mut occ = vec![0u16; d];
    for (i, &ci) in v.coeffs().iter().enumerate() {
        if ci == C64::new(0.0, 0.0) {
            continue;
        }
        let src = basis.occupation(i);
        for q in 0..d {
            if src[q] == 0 {
                continue;
            }
            for p in 0..d {
                occ.copy_from_slice(src);
                let nq = occ[q] as f64;
                occ[q] -= 1;
                let np = occ[p] as f64 + 1.0;
                occ[p] += 1;
                let j = basis.index_of(&occ).expect("hopping preserves the particle number");
                t[(p, q)] += v.coeffs()[j].conj() * ci * (nq * np).sqrt();
            }
        }
    }
    t
}

/// `ρ` with `ρ_pq = T_qp / tr T`, so a condensate `φ^{⊗n}` gives `|φ⟩⟨φ|`.
#[derive(Debug, Clone)]
pub struct OneParticleDM {
    pub rho: DMatrix<C64>,
    /// `tr T = ⟨v, N v⟩` before normalization.
    pub trace_raw: f64,
}

impl OneParticleDM {
    /// Wraps a matrix after checking Hermiticity, unit trace and the PSD
    /// floor. The matrix is symmetrized to remove sub-tolerance round-off.
    pub fn new(rho: DMatrix<C64>, trace_raw: f64) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::Shape("density matrix must be square".into()));
        }
        let defect = hermitian_defect(&rho);
        if defect > HERMITIAN_TOL {
            return Err(Error::Invalid(format!("density matrix not Hermitian (defect {defect:e})")));
        }
        let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::Invalid(format!("density matrix has trace {tr}")));
        }
        let min = hermitian_eigenvalues(&rho)[0];
        if min < PSD_FLOOR {
            return Err(Error::Invalid(format!("density matrix has eigenvalue {min:e}")));
        }
        Ok(Self { rho, trace_raw })
    }

    pub fn d(&self) -> usize {
        self.rho.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.rho)
    }

    pub fn to_packed(&self) -> PackedDM {
        let d = self.d();
        let mut upper = Vec::with_capacity(d * (d.saturating_sub(1)) / 2);
        for p in 0..d {
            for q in p + 1..d {
                let z = self.rho[(p, q)];
                upper.push([z.re, z.im]);
            }
        }
        PackedDM { d, diagonal: (0..d).map(|p| self.rho[(p, p)].re).collect(), upper, trace_raw: self.trace_raw }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_packed())?)
    }
}

/// Hermitian-packed export: real diagonal plus row-major upper triangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackedDM {
    pub d: usize,
    pub diagonal: Vec<f64>,
    pub upper: Vec<[f64; 2]>,
    pub trace_raw: f64,
}

impl PackedDM {
    pub fn unpack(&self) -> Result<OneParticleDM> {
        let d = self.d;
        if self.diagonal.len() != d || self.upper.len() != d * d.saturating_sub(1) / 2 {
            return Err(Error::Shape("packed density matrix has the wrong length".into()));
        }
        let mut rho = DMatrix::<C64>::zeros(d, d);
        let mut k = 0;
        for p in 0..d {
            rho[(p, p)] = C64::new(self.diagonal[p], 0.0);
            for q in p + 1..d {
                let z = C64::new(self.upper[k][0], self.upper[k][1]);
                rho[(p, q)] = z;
                rho[(q, p)] = z.conj();
                k += 1;
            }
        }
        OneParticleDM::new(rho, self.trace_raw)
    }
}

pub fn reduced_dm(v: &FockVector) -> Result<OneParticleDM> {
    let t = transition_matrix(v);
    let tr = t.trace().re;
    if !(tr > 0.0) {
        return Err(Error::Invalid("reduced density matrix of a state with no particles".into()));
    }
    OneParticleDM::new(t.transpose() / C64::new(tr, 0.0), tr)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    Trace,
    HilbertSchmidt,
    Operator,
}

fn difference(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(a - b)
}

pub fn distance(a: &DMatrix<C64>, b: &DMatrix<C64>, norm: Norm) -> Result<f64> {
    let diff = difference(a, b)?;
    Ok(match norm {
        Norm::HilbertSchmidt => diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        Norm::Trace => hermitian_eigenvalues(&diff).iter().map(|x| x.abs()).sum(),
        Norm::Operator => hermitian_eigenvalues(&diff).iter().map(|x| x.abs()).fold(0.0, f64::max),
    })
}

/// All three distances from one eigendecomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distances {
    pub trace: f64,
    pub hilbert_schmidt: f64,
    pub operator: f64,
}

impl Distances {
    /// `op ≤ HS ≤ trace` up to `slack`.
    pub fn ordered(&self, slack: f64) -> bool {
        self.operator <= self.hilbert_schmidt + slack && self.hilbert_schmidt <= self.trace + slack
    }
}

pub fn distances(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<Distances> {
    let diff = difference(a, b)?;
    let eig = hermitian_eigenvalues(&diff);
    Ok(Distances {
        trace: eig.iter().map(|x| x.abs()).sum(),
        hilbert_schmidt: eig.iter().map(|x| x * x).sum::<f64>().sqrt(),
        operator: eig.iter().map(|x| x.abs()).fold(0.0, f64::max),
    })
}

/// `Σ_i w_i |φ_i⟩⟨φ_i|`.
pub fn mixed_target(weights: &[f64], phis: &[DVector<C64>]) -> Result<OneParticleDM> {
    if weights.len() != phis.len() || phis.is_empty() {
        return Err(Error::Shape(format!("{} weights for {} states", weights.len(), phis.len())));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::Invalid("weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Invalid(format!("weights sum to {total}")));
    }
    let d = phis[0].len();
    let mut rho = DMatrix::<C64>::zeros(d, d);
    for (w, phi) in weights.iter().zip(phis) {
        if phi.len() != d {
            return Err(Error::Shape("states of different dimension".into()));
        }
        let n = vnorm(phi);
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::Invalid(format!("state has norm {n}")));
        }
        rho += projector(phi) * C64::new(*w, 0.0);
    }
    OneParticleDM::new(rho, 1.0)
}
