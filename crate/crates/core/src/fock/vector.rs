use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::basis::FockBasis;
use crate::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Complex amplitudes over a [`FockBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    basis: Arc<FockBasis>,
    coeffs: Vec<C64>,
}

impl FockVector {
    pub fn zeros(basis: Arc<FockBasis>) -> Self {
        let dim = basis.dim();
        Self { basis, coeffs: vec![ZERO; dim] }
    }

    pub fn from_coeffs(basis: Arc<FockBasis>, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != basis.dim() {
            return Err(Error::Shape(format!(
                "{} coefficients for basis of dimension {}",
                coeffs.len(),
                basis.dim()
            )));
        }
        Ok(Self { basis, coeffs })
    }

    /// Normalized occupation-number state `|occ⟩`.
    pub fn basis_state(basis: Arc<FockBasis>, occ: &[u16]) -> Result<Self> {
        let idx = basis
            .index_of(occ)
            .ok_or_else(|| Error::Sector(format!("occupation {occ:?} not in basis")))?;
        let mut v = Self::zeros(basis);
        v.coeffs[idx] = C64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn vacuum(basis: Arc<FockBasis>) -> Result<Self> {
        let occ = vec![0u16; basis.d()];
        Self::basis_state(basis, &occ)
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Amplitude of the occupation tuple, zero if it lies outside the basis.
    pub fn amplitude(&self, occ: &[u16]) -> C64 {
        self.basis.index_of(occ).map_or(ZERO, |i| self.coeffs[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &FockVector) -> Result<C64> {
        self.check_same_basis(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn same_basis(&self, other: &FockVector) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis
    }

    fn check_same_basis(&self, other: &FockVector) -> Result<()> {
        if self.same_basis(other) {
            Ok(())
        } else {
            Err(Error::Sector("vectors live on different bases".into()))
        }
    }

    pub fn scale(&mut self, s: C64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }

    pub fn scaled(mut self, s: C64) -> Self {
        self.scale(s);
        self
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: C64, other: &FockVector) -> Result<()> {
        self.check_same_basis(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
        Ok(())
    }

    pub fn sub(&self, other: &FockVector) -> Result<FockVector> {
        let mut out = self.clone();
        out.axpy(C64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &FockVector) -> Result<f64> {
        self.check_same_basis(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn distance(&self, other: &FockVector) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::Invalid("cannot normalize the zero vector".into()));
        }
        self.scale(C64::new(1.0 / n, 0.0));
        Ok(n)
    }

    /// `‖P_k v‖²` for every particle number `k = 0..=n_max`.
    pub fn sector_weights(&self) -> Vec<f64> {
        let n_max = self.basis.n_max();
        (0..=n_max)
            .map(|k| self.coeffs[self.basis.sector_range(k)].iter().map(|c| c.norm_sqr()).sum())
            .collect()
    }

    /// `⟨v, N v⟩`.
    pub fn mean_number(&self) -> f64 {
        self.sector_weights().iter().enumerate().map(|(k, w)| k as f64 * w).sum()
    }

    /// Re-expresses the vector on another basis over the same modes.
    /// Amplitudes whose occupation is absent from `target` are dropped; the
    /// returned number is their total squared modulus.
    pub fn embed_into(&self, target: Arc<FockBasis>) -> Result<(FockVector, f64)> {
        if target.d() != self.basis.d() {
            return Err(Error::Shape(format!(
                "cannot embed {}-mode vector into {}-mode basis",
                self.basis.d(),
                target.d()
            )));
        }
        let mut out = FockVector::zeros(target);
        let mut dropped = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            match out.basis.index_of(self.basis.occupation(i)) {
                Some(j) => out.coeffs[j] = *c,
                None => dropped += c.norm_sqr(),
            }
        }
        Ok((out, dropped))
    }

    /// Embedding that fails if any nonzero amplitude would be dropped.
    pub fn embed_exact(&self, target: Arc<FockBasis>) -> Result<FockVector> {
        let (v, dropped) = self.embed_into(target)?;
        if dropped > 0.0 {
            return Err(Error::Sector(format!("embedding drops weight {dropped:e}")));
        }
        Ok(v)
    }
}
