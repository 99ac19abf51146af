//! Experiment configuration: one JSON document, unknown keys rejected.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::combinatorics::admissible_m;
use crate::fock::{Dispersion, ModeSystem, PairPotential};
use crate::linalg::{random_hermitian, random_symmetric, random_unit_vector, vnorm};
use crate::states::SuperpositionKind;
use crate::{Error, Result};

/// `[re, im]`.
pub type Complex = [f64; 2];

fn to_c(z: &Complex) -> C64 {
    C64::new(z[0], z[1])
}

pub fn to_dvector(v: &[Complex]) -> DVector<C64> {
    DVector::from_iterator(v.len(), v.iter().map(to_c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "geometry", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// Periodic ring of `points` sites.
    Lattice { points: usize, dispersion: Dispersion, potential: PairPotential },
    /// Explicit one-body matrix (rows of `[re, im]`) and pair kernel.
    Dense { h: Vec<Vec<Complex>>, v: Vec<Vec<f64>> },
    /// Gaussian random Hermitian `h` and symmetric `v`, drawn from the seed.
    Random { d: usize, h_scale: f64, v_scale: f64 },
}

impl SystemSpec {
    pub fn build(&self, seed: u64) -> Result<ModeSystem> {
        match self {
            SystemSpec::Lattice { points, dispersion, potential } => {
                ModeSystem::lattice(*points, dispersion.clone(), potential.clone())
            }
            SystemSpec::Dense { h, v } => {
                let d = h.len();
                if h.iter().any(|r| r.len() != d) || v.len() != d || v.iter().any(|r| r.len() != d) {
                    return Err(Error::Config("h and v must be square and of equal size".into()));
                }
                let hm = DMatrix::from_fn(d, d, |r, c| to_c(&h[r][c]));
                let vm = DMatrix::from_fn(d, d, |r, c| v[r][c]);
                ModeSystem::dense(hm, vm)
            }
            SystemSpec::Random { d, h_scale, v_scale } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0001);
                let h = random_hermitian(*d, *h_scale, &mut rng);
                let v = random_symmetric(*d, *v_scale, &mut rng);
                ModeSystem::dense(h, v)
            }
        }
    }

    pub fn d(&self) -> usize {
        match self {
            SystemSpec::Lattice { points, .. } => *points,
            SystemSpec::Dense { h, .. } => h.len(),
            SystemSpec::Random { d, .. } => *d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Product,
    Coherent,
    Theta,
    Superposition,
}

/// Excitation number as a function of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MSchedule {
    Constant { m: usize },
    /// `round(a ln n)`, clamped to the admissible range.
    Log { a: f64 },
}

impl Default for MSchedule {
    fn default() -> Self {
        MSchedule::Constant { m: 1 }
    }
}

impl MSchedule {
    pub fn m(&self, n: usize) -> usize {
        match *self {
            MSchedule::Constant { m } => m,
            MSchedule::Log { a } => ((a * (n as f64).ln()).round().max(0.0) as usize).min(admissible_m(n)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperpositionConfig {
    pub kind: SuperpositionKind,
    pub coeffs: Vec<Complex>,
    pub family: Vec<Vec<Complex>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub family: Family,
    /// Reference one-particle state; drawn from the seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<Complex>>,
    /// Theta states and theta superpositions only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_schedule: Option<MSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub superposition: Option<SuperpositionConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_hartree_tol")]
    pub hartree: f64,
}

fn default_hartree_tol() -> f64 {
    crate::hartree::DEFAULT_TOL
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { hartree: default_hartree_tol() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// File stem for sweep outputs (`<stem>.csv` / `<stem>.json`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    pub state: StateSpec,
    pub n_list: Vec<usize>,
    pub t_list: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical (compact, field-ordered) serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn m_schedule(&self) -> MSchedule {
        self.state.m_schedule.unwrap_or_default()
    }

    /// The reference state: given explicitly or drawn from the seed.
    pub fn phi(&self) -> Result<DVector<C64>> {
        match &self.state.phi {
            Some(v) => Ok(to_dvector(v)),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5eed_0002);
                Ok(random_unit_vector(self.system.d(), &mut rng))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::Config(s));
        let d = self.system.d();
        if d == 0 {
            return bad("system needs at least one mode".into());
        }
        if self.n_list.is_empty() || self.n_list[0] == 0 || self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return bad("n_list must be nonempty, positive and strictly increasing".into());
        }
        if self.t_list.is_empty() || self.t_list.iter().any(|t| !t.is_finite()) {
            return bad("t_list must be nonempty and finite".into());
        }
        if !(self.tolerances.hartree > 0.0) {
            return bad("hartree tolerance must be positive".into());
        }
        if let Some(phi) = &self.state.phi {
            if phi.len() != d {
                return bad(format!("phi has {} entries for {d} modes", phi.len()));
            }
            let norm = vnorm(&to_dvector(phi));
            if (norm - 1.0).abs() > 1e-10 {
                return bad(format!("phi has norm {norm}"));
            }
        }
        let theta_like = match (self.state.family, &self.state.superposition) {
            (Family::Theta, _) => true,
            (Family::Superposition, Some(s)) => s.kind == SuperpositionKind::Theta,
            _ => false,
        };
        if self.state.m_schedule.is_some() && !theta_like {
            return bad("m_schedule only applies to theta states".into());
        }
        if theta_like {
            let sched = self.m_schedule();
            let a_cap = if self.state.family == Family::Superposition { 0.5 } else { 1.0 };
            match sched {
                MSchedule::Log { a } if !(0.0..a_cap).contains(&a) => {
                    return bad(format!("m schedule exponent a = {a} must lie in [0, {a_cap})"));
                }
                MSchedule::Constant { m } => {
                    for &n in &self.n_list {
                        if m > admissible_m(n) {
                            return bad(format!("m = {m} exceeds admissible {} at n = {n}", admissible_m(n)));
                        }
                    }
                }
                _ => {}
            }
            if d < 2 && self.n_list.iter().any(|&n| sched.m(n) > 0) {
                return bad("excitations need at least two modes".into());
            }
        }
        match (self.state.family, &self.state.superposition) {
            (Family::Superposition, None) => return bad("superposition family needs a superposition block".into()),
            (Family::Superposition, Some(s)) => {
                if s.family.len() < 2 || s.coeffs.len() != s.family.len() {
                    return bad("superpositions need at least two components and one coefficient each".into());
                }
                if s.family.iter().any(|f| f.len() != d) {
                    return bad("superposition components must have one entry per mode".into());
                }
                if self.state.phi.is_some() {
                    return bad("superpositions take their states from the superposition block".into());
                }
            }
            (_, Some(_)) => return bad("superposition block given for a single-state family".into()),
            _ => {}
        }
        Ok(())
    }
}
