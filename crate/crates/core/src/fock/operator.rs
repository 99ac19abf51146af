//! Ladder operators, second quantization and Hamiltonian assembly.
//!
//! The ladder rule is the occupation-number form of the symmetric-tensor
//! definitions: `a_p |…, n_p, …⟩ = √n_p |…, n_p - 1, …⟩` and
//! `a†_p |…, n_p, …⟩ = √(n_p + 1) |…, n_p + 1, …⟩`.
//!
//! Smeared fields follow a convention that is *linear* in the test function
//! for both operators: `a(f) = Σ_p f_p a_p` and `a*(f) = Σ_p f_p a†_p`, so
//! `[a(f), a*(g)] = Σ_p f_p g_p` without complex conjugation and the adjoint
//! of `a*(f)` is `a(f̄)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::basis::{FockBasis, Sector};
use super::mode_system::{hermitian_defect, ModeSystem};
use super::vector::FockVector;
use crate::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Create,
    Annihilate,
}

/// Sparse complex matrix in compressed-row form acting on one basis.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    basis: Arc<FockBasis>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    hermitian: bool,
}

impl SparseOperator {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(basis: Arc<FockBasis>, mut triplets: Vec<(usize, usize, C64)>, hermitian: bool) -> Self {
        let dim = basis.dim();
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
                last = Some((r, c));
            }
        }
        // drop cancelled entries
        let mut keep_rows = Vec::with_capacity(rows.len());
        let mut keep_cols = Vec::with_capacity(rows.len());
        let mut keep_vals = Vec::with_capacity(rows.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != ZERO {
                keep_rows.push(r);
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for &r in &keep_rows {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { basis, row_ptr, cols: keep_cols, vals: keep_vals, hermitian }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    /// `out = A x` on raw coefficient slices.
    pub fn apply_slice(&self, x: &[C64], out: &mut [C64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *o = acc;
        }
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        self.check_basis(v)?;
        let mut out = FockVector::zeros(self.basis.clone());
        self.apply_slice(v.coeffs(), out.coeffs_mut());
        Ok(out)
    }

    /// `⟨v, A v⟩`.
    pub fn expectation(&self, v: &FockVector) -> Result<C64> {
        let av = self.apply(v)?;
        v.inner(&av)
    }

    fn check_basis(&self, v: &FockVector) -> Result<()> {
        if Arc::ptr_eq(&self.basis, v.basis()) || **v.basis() == *self.basis {
            Ok(())
        } else {
            Err(Error::Sector("operator and vector live on different bases".into()))
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.dim() {
            for (c, v) in self.row(r) {
                t.push((c, r, v.conj()));
            }
        }
        Self::from_triplets(self.basis.clone(), t, self.hermitian)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for r in 0..self.dim() {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    /// Dense block restricted to the states of particle number `total`.
    pub fn sector_block(&self, total: usize) -> DMatrix<C64> {
        let range = self.basis.sector_range(total);
        let n = range.len();
        let mut m = DMatrix::zeros(n, n);
        for r in range.clone() {
            for (c, v) in self.row(r) {
                if range.contains(&c) {
                    m[(r - range.start, c - range.start)] += v;
                }
            }
        }
        m
    }

    /// Largest entry of `A - A†`.
    pub fn hermitian_defect(&self) -> f64 {
        if self.dim() <= 2000 {
            return hermitian_defect(&self.to_dense());
        }
        let adj = self.adjoint();
        let mut worst: f64 = 0.0;
        for r in 0..self.dim() {
            let mut a: Vec<(usize, C64)> = self.row(r).collect();
            let b: Vec<(usize, C64)> = adj.row(r).collect();
            for (c, v) in b {
                a.push((c, -v));
            }
            a.sort_by_key(|e| e.0);
            let mut i = 0;
            while i < a.len() {
                let mut s = a[i].1;
                let mut j = i + 1;
                while j < a.len() && a[j].0 == a[i].0 {
                    s += a[j].1;
                    j += 1;
                }
                worst = worst.max(s.norm());
                i = j;
            }
        }
        worst
    }

    /// Largest entry of `[A, B]`, both operators on the same basis.
    pub fn commutator_norm(&self, other: &SparseOperator) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::Shape("commutator of operators on different bases".into()));
        }
        let a = self.to_dense();
        let b = other.to_dense();
        let c = &a * &b - &b * &a;
        Ok(c.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// `true` if no entry couples different particle-number sectors.
    pub fn conserves_number(&self) -> bool {
        (0..self.dim()).all(|r| {
            let tr = self.basis.total(r);
            self.row(r).all(|(c, _)| self.basis.total(c) == tr)
        })
    }
}

fn check_mode(p: usize, d: usize) -> Result<()> {
    if p >= d {
        Err(Error::ModeIndex { index: p, d })
    } else {
        Ok(())
    }
}

/// Basis that receives the output of a ladder operator applied on `basis`.
pub fn ladder_target(kind: Ladder, basis: &Arc<FockBasis>) -> Result<Arc<FockBasis>> {
    match (basis.sector(), kind) {
        (Sector::Truncated(_), _) => Ok(basis.clone()),
        (Sector::Fixed(n), Ladder::Create) => Ok(Arc::new(FockBasis::new(basis.d(), Sector::Fixed(n + 1))?)),
        (Sector::Fixed(0), Ladder::Annihilate) => {
            Err(Error::Sector("annihilation on the zero-particle sector has no target sector".into()))
        }
        (Sector::Fixed(n), Ladder::Annihilate) => Ok(Arc::new(FockBasis::new(basis.d(), Sector::Fixed(n - 1))?)),
    }
}

fn check_target(kind: Ladder, src: &FockBasis, dst: &FockBasis) -> Result<()> {
    if src.d() != dst.d() {
        return Err(Error::Sector("input and output bases have different mode counts".into()));
    }
    let ok = match (src.sector(), dst.sector(), kind) {
        (Sector::Truncated(a), Sector::Truncated(b), _) => a == b,
        (Sector::Fixed(a), Sector::Fixed(b), Ladder::Create) => b == a + 1,
        (Sector::Fixed(a), Sector::Fixed(b), Ladder::Annihilate) => a == b + 1,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Sector(format!("{kind:?} maps {:?} outside {:?}", src.sector(), dst.sector())))
    }
}

/// Accumulates `weights_p * a^#_p v` into `out`, using `rule(n)` as the
/// matrix element between occupations `n` and `n - 1`.
fn accumulate_ladder(
    kind: Ladder,
    weights: &[(usize, C64)],
    v: &FockVector,
    out: &mut FockVector,
    rule: &dyn Fn(u16) -> f64,
) {
    let src = v.basis().clone();
    let dst = out.basis().clone();
    let mut occ = vec![0u16; src.d()];
    for (i, &c) in v.coeffs().iter().enumerate() {
        if c == ZERO {
            continue;
        }
        occ.copy_from_slice(src.occupation(i));
        for &(p, w) in weights {
            let np = occ[p];
            let (new, amp) = match kind {
                Ladder::Annihilate => {
                    if np == 0 {
                        continue;
                    }
                    (np - 1, rule(np))
                }
                Ladder::Create => (np + 1, rule(np + 1)),
            };
            occ[p] = new;
            if let Some(j) = dst.index_of(&occ) {
                out.coeffs_mut()[j] += w * amp * c;
            }
            occ[p] = np;
        }
    }
}

fn sqrt_rule(n: u16) -> f64 {
    (n as f64).sqrt()
}

/// `a_p v` or `a†_p v`. Fixed-sector inputs map to the neighbouring fixed
/// sector; truncated inputs stay in their basis, and creation drops any
/// amplitude that would exceed `n_max`.
pub fn ladder_apply(kind: Ladder, p: usize, v: &FockVector) -> Result<FockVector> {
    let target = ladder_target(kind, v.basis())?;
    ladder_apply_into(kind, p, v, target)
}

pub fn ladder_apply_into(kind: Ladder, p: usize, v: &FockVector, target: Arc<FockBasis>) -> Result<FockVector> {
    check_mode(p, v.basis().d())?;
    check_target(kind, v.basis(), &target)?;
    let mut out = FockVector::zeros(target);
    accumulate_ladder(kind, &[(p, C64::new(1.0, 0.0))], v, &mut out, &sqrt_rule);
    Ok(out)
}

/// `a(f) v = Σ_p f_p a_p v` or `a*(f) v = Σ_p f_p a†_p v`.
pub fn field_apply(kind: Ladder, f: &DVector<C64>, v: &FockVector) -> Result<FockVector> {
    let target = ladder_target(kind, v.basis())?;
    field_apply_into(kind, f, v, target)
}

pub fn field_apply_into(kind: Ladder, f: &DVector<C64>, v: &FockVector, target: Arc<FockBasis>) -> Result<FockVector> {
    if f.len() != v.basis().d() {
        return Err(Error::Shape(format!("test function of length {} for {} modes", f.len(), v.basis().d())));
    }
    check_target(kind, v.basis(), &target)?;
    let weights: Vec<(usize, C64)> = f.iter().enumerate().filter(|(_, w)| **w != ZERO).map(|(p, w)| (p, *w)).collect();
    let mut out = FockVector::zeros(target);
    accumulate_ladder(kind, &weights, v, &mut out, &sqrt_rule);
    Ok(out)
}

/// Matrix of `a_p` or `a†_p` on a truncated basis.
pub fn ladder_operator(kind: Ladder, p: usize, basis: &Arc<FockBasis>) -> Result<SparseOperator> {
    ladder_operator_with_rule(kind, p, basis, &sqrt_rule)
}

/// As [`ladder_operator`] with a custom matrix-element rule; used to build
/// deliberately corrupted operators for negative controls.
pub fn ladder_operator_with_rule(
    kind: Ladder,
    p: usize,
    basis: &Arc<FockBasis>,
    rule: &dyn Fn(u16) -> f64,
) -> Result<SparseOperator> {
    check_mode(p, basis.d())?;
    if !basis.is_truncated() {
        return Err(Error::Sector("ladder matrices need a truncated basis".into()));
    }
    let mut t = Vec::new();
    let mut occ = vec![0u16; basis.d()];
    for i in 0..basis.dim() {
        occ.copy_from_slice(basis.occupation(i));
        let np = occ[p];
        let (new, amp) = match kind {
            Ladder::Annihilate if np == 0 => continue,
            Ladder::Annihilate => (np - 1, rule(np)),
            Ladder::Create => (np + 1, rule(np + 1)),
        };
        occ[p] = new;
        if let Some(j) = basis.index_of(&occ) {
            t.push((j, i, C64::new(amp, 0.0)));
        }
    }
    Ok(SparseOperator::from_triplets(basis.clone(), t, false))
}

/// `dΓ(A) = Σ_pq A_pq a†_p a_q`, number conserving on any basis.
pub fn second_quantize(a: &DMatrix<C64>, basis: &Arc<FockBasis>) -> Result<SparseOperator> {
    let d = basis.d();
    if a.nrows() != d || a.ncols() != d {
        return Err(Error::Shape(format!("{}x{} matrix for {d} modes", a.nrows(), a.ncols())));
    }
    let hermitian = hermitian_defect(a) <= 1e-12;
    Ok(SparseOperator::from_triplets(basis.clone(), one_body_triplets(a, basis), hermitian))
}

fn one_body_triplets(a: &DMatrix<C64>, basis: &FockBasis) -> Vec<(usize, usize, C64)> {
    let d = basis.d();
    let mut t = Vec::new();
    let mut occ = vec![0u16; d];
    for i in 0..basis.dim() {
        occ.copy_from_slice(basis.occupation(i));
        for q in 0..d {
            let nq = occ[q];
            if nq == 0 {
                continue;
            }
            occ[q] -= 1;
            for p in 0..d {
                let apq = a[(p, q)];
                if apq == ZERO {
                    continue;
                }
                let np = occ[p] + 1;
                occ[p] = np;
                let j = basis.index_of(&occ).expect("number-conserving move stays in basis");
                t.push((j, i, apq * (nq as f64 * np as f64).sqrt()));
                occ[p] = np - 1;
            }
            occ[q] += 1;
        }
    }
    t
}

/// Diagonal number operator `N`.
pub fn number_operator(basis: &Arc<FockBasis>) -> SparseOperator {
    let t = (0..basis.dim()).map(|i| (i, i, C64::new(basis.total(i) as f64, 0.0))).collect();
    SparseOperator::from_triplets(basis.clone(), t, true)
}

/// Diagonal of the pair interaction `Σ_pq v(p,q) a†_p a†_q a_q a_p` on one
/// occupation tuple: `Σ_{p≠q} v_pq n_p n_q + Σ_p v_pp n_p (n_p - 1)`.
pub fn pair_interaction_diagonal(ms: &ModeSystem, occ: &[u16]) -> f64 {
    let d = occ.len();
    let mut e = 0.0;
    for p in 0..d {
        let np = occ[p] as f64;
        if np == 0.0 {
            continue;
        }
        for q in 0..d {
            let nq = occ[q] as f64;
            let pair = if p == q { np * (np - 1.0) } else { np * nq };
            e += ms.kernel(p, q) * pair;
        }
    }
    e
}

/// `H = dΓ(h) + (1/2n) Σ_pq v(p,q) a†_p a†_q a_q a_p` with `n = n_scale`.
pub fn build_hamiltonian(ms: &ModeSystem, n_scale: usize, basis: &Arc<FockBasis>) -> Result<SparseOperator> {
    if n_scale == 0 {
        return Err(Error::Invalid("n_scale must be positive".into()));
    }
    if ms.d() != basis.d() {
        return Err(Error::Shape(format!("{}-mode system on {}-mode basis", ms.d(), basis.d())));
    }
    let mut t = one_body_triplets(ms.h(), basis);
    if !ms.is_free() {
        let coupling = 1.0 / (2.0 * n_scale as f64);
        for i in 0..basis.dim() {
            let e = pair_interaction_diagonal(ms, basis.occupation(i));
            if e != 0.0 {
                t.push((i, i, C64::new(coupling * e, 0.0)));
            }
        }
    }
    Ok(SparseOperator::from_triplets(basis.clone(), t, true))
}

/// `P_n v`: zeroes every amplitude outside particle number `n`.
pub fn sector_project(n: usize, v: &FockVector) -> Result<FockVector> {
    let basis = v.basis();
    if n > basis.n_max() {
        return Err(Error::Sector(format!("sector {n} exceeds n_max = {}", basis.n_max())));
    }
    let range = basis.sector_range(n);
    let mut out = FockVector::zeros(basis.clone());
    out.coeffs_mut()[range.clone()].copy_from_slice(&v.coeffs()[range]);
    Ok(out)
}
