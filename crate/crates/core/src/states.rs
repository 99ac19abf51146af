//! Initial-state families: condensates `φ^{⊗n}`, coherent states
//! `C(√n φ)Ω`, partially factorized states `θ_{n,m}` and normalized
//! superpositions of each kind.

use std::sync::Arc;

use libm::lgamma;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{admissible_m, log_dnm};
use crate::fock::{
    field_apply, field_apply_into, headroom, ladder_apply_into, sector_project, weyl_apply, FockBasis, FockVector,
    Ladder, Sector,
};
use crate::linalg::{cdot, hermitian_eigenvalues, orthogonal_complement, random_complex, vnorm};
use crate::{Error, Result};

/// Tolerance on `‖φ‖ = 1` for inputs flagged as normalized.
pub const UNIT_TOL: f64 = 1e-10;
/// Tolerance on the first-variable orthogonality of an excitation.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Cap on `d^n` for the explicit tensor symmetrization.
pub const TENSOR_CAPACITY: usize = 1 << 22;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn check_unit(phi: &DVector<C64>) -> Result<()> {
    let n = vnorm(phi);
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::Invalid(format!("one-particle state has norm {n}, expected 1")));
    }
    Ok(())
}

fn check_contains(basis: &FockBasis, n: usize) -> Result<()> {
    if !basis.sector().contains(n) {
        return Err(Error::Sector(format!("basis {:?} does not contain sector {n}", basis.sector())));
    }
    Ok(())
}

/// `φ^{⊗n}` with multinomial amplitudes `√(n!/Π n_p!) Π φ_p^{n_p}`.
pub fn product_state(phi: &DVector<C64>, n: usize, basis: &Arc<FockBasis>) -> Result<FockVector> {
    check_unit(phi)?;
    if phi.len() != basis.d() {
        return Err(Error::Shape(format!("vector of length {} for {} modes", phi.len(), basis.d())));
    }
    check_contains(basis, n)?;
    let mut v = FockVector::zeros(basis.clone());
    let ln_nfact = lgamma(n as f64 + 1.0);
    for i in basis.sector_range(n) {
        let occ = basis.occupation(i);
        let ln_mult = ln_nfact - occ.iter().map(|&k| lgamma(k as f64 + 1.0)).sum::<f64>();
        let mut amp = c((0.5 * ln_mult).exp());
        for (p, &k) in occ.iter().enumerate() {
            if k > 0 {
                amp *= phi[p].powu(k as u32);
            }
        }
        v.coeffs_mut()[i] = amp;
    }
    Ok(v)
}

/// `C(√n φ)Ω`. The basis must satisfy the displacement headroom rule.
pub fn coherent_state(phi: &DVector<C64>, n: usize, basis: &Arc<FockBasis>) -> Result<FockVector> {
    if phi.len() != basis.d() {
        return Err(Error::Shape(format!("vector of length {} for {} modes", phi.len(), basis.d())));
    }
    if !basis.is_truncated() {
        return Err(Error::Contract("coherent states need a truncated basis".into()));
    }
    let alpha = phi * c((n as f64).sqrt());
    let need = headroom(vnorm(&alpha));
    if basis.n_max() < need {
        return Err(Error::Sector(format!("n_max = {} below headroom {need} for n = {n}", basis.n_max())));
    }
    Ok(weyl_apply(&alpha, &FockVector::vacuum(basis.clone())?)?.state)
}

/// Truncated basis sized by the headroom rule for `C(√n φ)`, `‖φ‖ ≤ norm`.
pub fn coherent_basis(d: usize, n: usize, norm: f64) -> Result<Arc<FockBasis>> {
    let n_max = headroom((n as f64).sqrt() * norm);
    Ok(Arc::new(FockBasis::new(d, Sector::Truncated(n_max))?))
}

/// An `m`-particle state `ψ_m` whose first variable is orthogonal to `φ`.
#[derive(Debug, Clone)]
pub struct ExcitationState {
    phi: DVector<C64>,
    psi: FockVector,
}

impl ExcitationState {
    /// Validates unit norm and `a(φ̄) ψ = 0`; `psi` must live on `fixed(m)`.
    pub fn new(phi: DVector<C64>, psi: FockVector) -> Result<Self> {
        check_unit(&phi)?;
        if psi.basis().d() != phi.len() {
            return Err(Error::Shape("excitation and reference live on different mode counts".into()));
        }
        let Sector::Fixed(m) = psi.basis().sector() else {
            return Err(Error::Sector("excitation must live in a fixed-number sector".into()));
        };
        if (psi.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::Invalid(format!("excitation has norm {}", psi.norm())));
        }
        if m > 0 {
            let defect = field_apply(Ladder::Annihilate, &phi.map(|z| z.conj()), &psi)?.norm();
            if defect > ORTHOGONALITY_TOL {
                return Err(Error::Contract(format!("excitation not orthogonal to phi (defect {defect:e})")));
            }
        }
        Ok(Self { phi, psi })
    }

    /// `m = 0`: the vacuum, which turns `θ_{n,0}` into `φ^{⊗n}`.
    pub fn trivial(phi: DVector<C64>) -> Result<Self> {
        let basis = Arc::new(FockBasis::new(phi.len(), Sector::Fixed(0))?);
        Self::new(phi, FockVector::vacuum(basis)?)
    }

    pub fn m(&self) -> usize {
        self.psi.basis().n_max()
    }

    pub fn phi(&self) -> &DVector<C64> {
        &self.phi
    }

    pub fn psi(&self) -> &FockVector {
        &self.psi
    }

    /// `‖a(φ̄) ψ_m‖`.
    pub fn orthogonality_defect(&self) -> Result<f64> {
        if self.m() == 0 {
            return Ok(0.0);
        }
        Ok(field_apply(Ladder::Annihilate, &self.phi.map(|z| z.conj()), &self.psi)?.norm())
    }

    /// First-quantized amplitude `ψ(y_1, …, y_m)` of an index tuple.
    pub fn tensor_entry(&self, tuple: &[usize]) -> C64 {
        let d = self.phi.len();
        let mut occ = vec![0u16; d];
        for &y in tuple {
            occ[y] += 1;
        }
        let m = tuple.len();
        let ln_ratio = occ.iter().map(|&k| lgamma(k as f64 + 1.0)).sum::<f64>() - lgamma(m as f64 + 1.0);
        self.psi.amplitude(&occ) * (0.5 * ln_ratio).exp()
    }
}

/// Random `ψ_m` built from symmetric products of modes orthogonal to `φ`;
/// deterministic per seed.
pub fn random_excitation(phi: &DVector<C64>, m: usize, seed: u64) -> Result<ExcitationState> {
    check_unit(phi)?;
    let d = phi.len();
    if m == 0 {
        return ExcitationState::trivial(phi.clone());
    }
    if d < 2 {
        return Err(Error::Invalid("excitations need at least two modes".into()));
    }
    let complement = orthogonal_complement(phi);
    let k = complement.len();
    let small = Arc::new(FockBasis::new(k, Sector::Fixed(m))?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs: Vec<C64> = (0..small.dim()).map(|_| random_complex(&mut rng)).collect();
    let norm = coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let phase = coeffs[0].conj() / coeffs[0].norm();
    for z in &mut coeffs {
        *z *= phase / norm;
    }

    let work = Arc::new(FockBasis::new(d, Sector::Truncated(m))?);
    let vacuum = FockVector::vacuum(work.clone())?;
    let mut psi = FockVector::zeros(work.clone());
    for (i, &amp) in coeffs.iter().enumerate() {
        let mut term = vacuum.clone();
        for (j, &b) in small.occupation(i).iter().enumerate() {
            for _ in 0..b {
                term = field_apply_into(Ladder::Create, &complement[j], &term, work.clone())?;
            }
            let ln_fact = lgamma(b as f64 + 1.0);
            term.scale(c((-0.5 * ln_fact).exp()));
        }
        psi.axpy(amp, &term)?;
    }
    let target = Arc::new(FockBasis::new(d, Sector::Fixed(m))?);
    let (mut psi, _) = psi.embed_into(target)?;
    psi.normalize()?;
    ExcitationState::new(phi.clone(), psi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaMethod {
    /// `c_{n,m} S_n(φ^{⊗(n-m)} ⊗ ψ_m)` through the explicit `d^n` tensor.
    Symmetrize,
    /// `((n-m)! m!)^{-1/2} Σ_y ψ(y) a*(φ)^{n-m} a*(y_1)…a*(y_m) Ω`.
    CreationPolynomial,
    /// `d_{n,m}/√(m!) Σ_y ψ(y) P_n C(√n φ) a*(y_1)…a*(y_m) Ω`.
    WeylProjection,
}

/// `Σ_y ψ(y_1…y_m) a†_{y_1}…a†_{y_m} Ω` over ordered tuples, i.e. `√(m!) ψ_m`.
fn excitation_polynomial(exc: &ExcitationState, basis: &Arc<FockBasis>) -> Result<FockVector> {
    let d = basis.d();
    let m = exc.m();
    let vacuum = FockVector::vacuum(basis.clone())?;
    let mut out = FockVector::zeros(basis.clone());
    let count = d.checked_pow(m as u32).ok_or_else(|| Error::Capacity { dim: u128::MAX, cap: TENSOR_CAPACITY })?;
    let mut tuple = vec![0usize; m];
    for idx in 0..count {
        let mut r = idx;
        for slot in tuple.iter_mut().rev() {
            *slot = r % d;
            r /= d;
        }
        let w = exc.tensor_entry(&tuple);
        if w == c(0.0) {
            continue;
        }
        let mut term = vacuum.clone();
        for &y in tuple.iter().rev() {
            term = ladder_apply_into(Ladder::Create, y, &term, basis.clone())?;
        }
        out.axpy(w, &term)?;
    }
    Ok(out)
}

fn theta_symmetrize(phi: &DVector<C64>, exc: &ExcitationState, n: usize) -> Result<FockVector> {
    let d = phi.len();
    let m = exc.m();
    let count = d.checked_pow(n as u32).filter(|&x| x <= TENSOR_CAPACITY).ok_or(Error::Capacity {
        dim: (d as u128).saturating_pow(n as u32),
        cap: TENSOR_CAPACITY,
    })?;
    let basis = Arc::new(FockBasis::new(d, Sector::Fixed(n))?);
    let mut sums = vec![c(0.0); basis.dim()];
    let mut tuple = vec![0usize; n];
    let mut occ = vec![0u16; d];
    for idx in 0..count {
        let mut r = idx;
        for slot in tuple.iter_mut().rev() {
            *slot = r % d;
            r /= d;
        }
        let mut t = exc.tensor_entry(&tuple[n - m..]);
        for &y in &tuple[..n - m] {
            t *= phi[y];
        }
        occ.iter_mut().for_each(|x| *x = 0);
        for &y in &tuple {
            occ[y] += 1;
        }
        let j = basis.index_of(&occ).expect("tuple occupation lies in the fixed sector");
        sums[j] += t;
    }
    // ⟨occ| S T⟩ = ⟨occ| T⟩ = √(Π n_p!/n!) Σ_{tuples with occ} T
    let ln_cnm = 0.5 * (lgamma(n as f64 + 1.0) - lgamma(m as f64 + 1.0) - lgamma((n - m) as f64 + 1.0));
    let ln_nfact = lgamma(n as f64 + 1.0);
    for (j, s) in sums.iter_mut().enumerate() {
        let ln_occ: f64 = basis.occupation(j).iter().map(|&k| lgamma(k as f64 + 1.0)).sum();
        *s *= (ln_cnm + 0.5 * (ln_occ - ln_nfact)).exp();
    }
    FockVector::from_coeffs(basis, sums)
}

/// `θ_{n,m}` built by one of three independent routes. The result lives on
/// `basis`, which must contain sector `n`.
pub fn theta_state(
    phi: &DVector<C64>,
    exc: &ExcitationState,
    n: usize,
    method: ThetaMethod,
    basis: &Arc<FockBasis>,
) -> Result<FockVector> {
    check_unit(phi)?;
    let m = exc.m();
    if m > n {
        return Err(Error::Invalid(format!("m = {m} exceeds n = {n}")));
    }
    if phi.len() != basis.d() || exc.phi().len() != basis.d() {
        return Err(Error::Shape("mode counts disagree".into()));
    }
    check_contains(basis, n)?;
    if m > 0 {
        let defect = field_apply(Ladder::Annihilate, &phi.map(|z| z.conj()), exc.psi())?.norm();
        if defect > ORTHOGONALITY_TOL {
            return Err(Error::Contract(format!("excitation not orthogonal to phi (defect {defect:e})")));
        }
    }
    let ln_mfact = lgamma(m as f64 + 1.0);
    let raw = match method {
        ThetaMethod::Symmetrize => theta_symmetrize(phi, exc, n)?,
        ThetaMethod::CreationPolynomial => {
            let work = Arc::new(FockBasis::new(basis.d(), Sector::Truncated(n))?);
            let mut v = excitation_polynomial(exc, &work)?;
            for _ in 0..n - m {
                v = field_apply_into(Ladder::Create, phi, &v, work.clone())?;
            }
            let ln_scale = -0.5 * (lgamma((n - m) as f64 + 1.0) + ln_mfact);
            v.scaled(c(ln_scale.exp()))
        }
        ThetaMethod::WeylProjection => {
            // Creation never lowers the particle number, so truncating at n
            // leaves P_n C(α) exact.
            let work = Arc::new(FockBasis::new(basis.d(), Sector::Truncated(n))?);
            let x = excitation_polynomial(exc, &work)?;
            let displaced = weyl_apply(&(phi * c((n as f64).sqrt())), &x)?.state;
            let projected = sector_project(n, &displaced)?;
            projected.scaled(c((log_dnm(n, m) - 0.5 * ln_mfact).exp()))
        }
    };
    raw.embed_exact(basis.clone()).or_else(|_| {
        // only sector n carries weight; anything else is round-off
        let (v, _) = raw.embed_into(basis.clone())?;
        Ok(v)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuperpositionKind {
    /// `Σ α_i(n) (φ^{(i)})^{⊗n}`.
    Phi,
    /// `Σ β_i(n) θ^{(i)}_{n,m_i}`.
    Theta,
    /// `Σ γ_i(n) C(√n φ^{(i)})Ω`.
    Psi,
}

#[derive(Debug, Clone)]
pub struct SuperpositionSpec {
    pub kind: SuperpositionKind,
    pub coeffs: Vec<C64>,
    pub family: Vec<DVector<C64>>,
    /// One excitation per component (`Theta` only), `m_i` nondecreasing.
    pub excitations: Vec<ExcitationState>,
}

impl SuperpositionSpec {
    pub fn new(kind: SuperpositionKind, coeffs: Vec<C64>, family: Vec<DVector<C64>>) -> Self {
        Self { kind, coeffs, family, excitations: Vec::new() }
    }

    /// Theta spec with random excitations `ψ^{(i)}_{m_i}` seeded by `seed + i`.
    pub fn theta(coeffs: Vec<C64>, family: Vec<DVector<C64>>, m_schedule: &[usize], seed: u64) -> Result<Self> {
        if m_schedule.len() != family.len() {
            return Err(Error::Shape("m schedule and family differ in length".into()));
        }
        let excitations = family
            .iter()
            .zip(m_schedule)
            .enumerate()
            .map(|(i, (phi, &m))| random_excitation(phi, m, seed.wrapping_add(i as u64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kind: SuperpositionKind::Theta, coeffs, family, excitations })
    }

    /// `sup_i ‖φ^{(i)}‖`.
    pub fn sup_norm(&self) -> f64 {
        self.family.iter().map(vnorm).fold(0.0, f64::max)
    }

    /// Weights `|c_i|² / ‖c‖²_{l²}` of the limiting mixture.
    pub fn limit_weights(&self) -> Vec<f64> {
        let total: f64 = self.coeffs.iter().map(|z| z.norm_sqr()).sum();
        self.coeffs.iter().map(|z| z.norm_sqr() / total).collect()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let k = self.family.len();
        if k == 0 || self.coeffs.len() != k {
            return Err(Error::Invalid(format!("{} coefficients for {k} components", self.coeffs.len())));
        }
        let d = self.family[0].len();
        if self.family.iter().any(|f| f.len() != d) {
            return Err(Error::Shape("family members differ in length".into()));
        }
        match self.kind {
            SuperpositionKind::Phi | SuperpositionKind::Theta => {
                for f in &self.family {
                    check_unit(f)?;
                }
                for i in 0..k {
                    for j in i + 1..k {
                        let o = cdot(&self.family[i], &self.family[j]).norm();
                        if o >= 1.0 - 1e-12 {
                            return Err(Error::Invalid(format!("components {i} and {j} are linearly dependent")));
                        }
                    }
                }
            }
            SuperpositionKind::Psi => {
                for i in 0..k {
                    for j in i + 1..k {
                        if self.family[i] == self.family[j] {
                            return Err(Error::Invalid(format!("components {i} and {j} coincide")));
                        }
                    }
                }
            }
        }
        if self.kind == SuperpositionKind::Theta {
            if self.excitations.len() != k {
                return Err(Error::Invalid("theta superposition needs one excitation per component".into()));
            }
            let cap = admissible_m(n);
            let mut prev = 0;
            for (i, e) in self.excitations.iter().enumerate() {
                if e.m() < prev {
                    return Err(Error::Invalid("m schedule must be nondecreasing".into()));
                }
                if e.m() > cap {
                    return Err(Error::Invalid(format!("m_{i} = {} exceeds admissible {cap} at n = {n}", e.m())));
                }
                if vnorm(&(e.phi() - &self.family[i])) > UNIT_TOL {
                    return Err(Error::Invalid(format!("excitation {i} belongs to a different reference state")));
                }
                prev = e.m();
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Superposition {
    pub state: FockVector,
    /// `α_i(n)` (resp. `β_i(n)`, `γ_i(n)`).
    pub coeffs_n: Vec<C64>,
    pub gram: DMatrix<C64>,
    /// Largest gap between closed-form and numerically computed Gram entries
    /// (zero for `Theta`, whose Gram matrix is numerical).
    pub gram_discrepancy: f64,
    pub components: Vec<FockVector>,
}

/// Smallest Gram eigenvalue tolerated before the components count as
/// degenerate.
pub const GRAM_FLOOR: f64 = 1e-12;

/// Builds the normalized superposition on `basis` (a fixed sector for
/// `Phi`/`Theta`, a truncated one with headroom for `Psi`).
pub fn superposition(spec: &SuperpositionSpec, n: usize, basis: &Arc<FockBasis>) -> Result<Superposition> {
    spec.validate(n)?;
    let k = spec.family.len();
    let components: Vec<FockVector> = match spec.kind {
        SuperpositionKind::Phi => spec.family.iter().map(|f| product_state(f, n, basis)).collect::<Result<_>>()?,
        SuperpositionKind::Theta => spec
            .family
            .iter()
            .zip(&spec.excitations)
            .map(|(f, e)| theta_state(f, e, n, ThetaMethod::CreationPolynomial, basis))
            .collect::<Result<_>>()?,
        SuperpositionKind::Psi => spec.family.iter().map(|f| coherent_state(f, n, basis)).collect::<Result<_>>()?,
    };
    let numeric = DMatrix::from_fn(k, k, |i, j| components[i].inner(&components[j]).unwrap_or(c(f64::NAN)));
    let (gram, gram_discrepancy) = match spec.kind {
        SuperpositionKind::Theta => (numeric, 0.0),
        kind => {
            let item = |f: &DVector<C64>| match kind {
                SuperpositionKind::Phi => GramItem::Product(f.clone()),
                _ => GramItem::Coherent(f.clone()),
            };
            let closed = DMatrix::from_fn(k, k, |i, j| {
                closed_form_overlap(&item(&spec.family[i]), &item(&spec.family[j]), n).expect("closed form exists")
            });
            let gap = (&closed - &numeric).iter().map(|z| z.norm()).fold(0.0, f64::max);
            (closed, gap)
        }
    };
    let min_eig = hermitian_eigenvalues(&gram)[0];
    if min_eig < GRAM_FLOOR {
        return Err(Error::Degenerate { min_eig });
    }
    let mut norm_sqr = c(0.0);
    for i in 0..k {
        for j in 0..k {
            norm_sqr += spec.coeffs[i].conj() * spec.coeffs[j] * gram[(i, j)];
        }
    }
    let scale = 1.0 / norm_sqr.re.sqrt();
    let coeffs_n: Vec<C64> = spec.coeffs.iter().map(|z| z * scale).collect();
    let mut state = FockVector::zeros(basis.clone());
    for (w, comp) in coeffs_n.iter().zip(&components) {
        state.axpy(*w, comp)?;
    }
    Ok(Superposition { state, coeffs_n, gram, gram_discrepancy, components })
}

/// One member of a superposition family, for overlap computations.
#[derive(Debug, Clone)]
pub enum GramItem {
    Product(DVector<C64>),
    Coherent(DVector<C64>),
    Theta(ExcitationState),
}

fn closed_form_overlap(a: &GramItem, b: &GramItem, n: usize) -> Option<C64> {
    match (a, b) {
        (GramItem::Product(x), GramItem::Product(y)) => Some(cdot(x, y).powu(n as u32)),
        (GramItem::Coherent(x), GramItem::Coherent(y)) => {
            let nf = n as f64;
            let phase = C64::new(0.0, nf * cdot(x, y).im).exp();
            let dist = vnorm(&(y - x));
            Some(phase * (-nf * dist * dist / 2.0).exp())
        }
        _ => None,
    }
}

/// `(m+1)(m!)² n^m |⟨φ_i, φ_j⟩|^{n-2m}` with `m = max(m_i, m_j)`.
pub fn theta_overlap_bound(m: usize, n: usize, overlap: f64) -> f64 {
    let mf = m as f64;
    let ln = (mf + 1.0).ln() + 2.0 * lgamma(mf + 1.0) + mf * (n as f64).ln();
    let power = n as f64 - 2.0 * mf;
    ln.exp() * overlap.powf(power)
}

/// `⟨item_i, item_j⟩` for `n` particles: closed forms for product and
/// coherent items; numerical in `fixed(n)` for θ items, where the overlap is
/// also checked against [`theta_overlap_bound`].
pub fn gram_overlap(a: &GramItem, b: &GramItem, n: usize) -> Result<C64> {
    if let Some(z) = closed_form_overlap(a, b, n) {
        return Ok(z);
    }
    let (GramItem::Theta(x), GramItem::Theta(y)) = (a, b) else {
        return Err(Error::Invalid("overlaps between different families are not defined".into()));
    };
    let basis = Arc::new(FockBasis::new(x.phi().len(), Sector::Fixed(n))?);
    let tx = theta_state(x.phi(), x, n, ThetaMethod::CreationPolynomial, &basis)?;
    let ty = theta_state(y.phi(), y, n, ThetaMethod::CreationPolynomial, &basis)?;
    let z = tx.inner(&ty)?;
    let bound = theta_overlap_bound(x.m().max(y.m()), n, cdot(x.phi(), y.phi()).norm());
    if z.norm() > bound * (1.0 + 1e-12) + 1e-15 {
        return Err(Error::Bound(format!("|<theta_i, theta_j>| = {} exceeds {bound}", z.norm())));
    }
    Ok(z)
}
