//! Special functions and closed forms for displaced partially factorized
//! states: generalized Laguerre polynomials, the normalization `d_{n,m}`,
//! the sector norms `A_k` of `C*(√n φ) θ_{n,m}`, the Krasikov envelope and
//! the weighted number-moment bound built from them.
//!
//! Factorials and powers are handled in log space through `lgamma`; the
//! explicit alternating Laguerre sum is never evaluated here because of
//! cancellation, only the three-term recurrence.

use libm::lgamma;

use crate::{Error, Result};

/// `L_k^{(α)}(x)` by the forward recurrence
/// `(j+1) L_{j+1} = (2j + 1 + α - x) L_j - (j + α) L_{j-1}`.
pub fn laguerre(k: usize, alpha: f64, x: f64) -> f64 {
    let (mantissa, log_scale) = laguerre_scaled(k, alpha, x);
    mantissa * log_scale.exp()
}

/// Recurrence with periodic rescaling; returns `(m, s)` with
/// `L_k^{(α)}(x) = m · e^s`.
pub fn laguerre_scaled(k: usize, alpha: f64, x: f64) -> (f64, f64) {
    const BIG: f64 = 1e150;
    let mut prev = 1.0;
    if k == 0 {
        return (prev, 0.0);
    }
    let mut cur = 1.0 + alpha - x;
    let mut log_scale = 0.0;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + alpha - x) * cur - (jf + alpha) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
        let mag = cur.abs().max(prev.abs());
        if mag > BIG {
            prev /= mag;
            cur /= mag;
            log_scale += mag.ln();
        }
    }
    (cur, log_scale)
}

/// `log |L_k^{(α)}(x)|`, `-∞` at a root.
pub fn ln_abs_laguerre(k: usize, alpha: f64, x: f64) -> f64 {
    let (m, s) = laguerre_scaled(k, alpha, x);
    m.abs().ln() + s
}

/// `log d_{n,m}` with `d_{n,m} = √((n-m)!) e^{n/2} n^{-(n-m)/2}`.
pub fn log_dnm(n: usize, m: usize) -> f64 {
    assert!(m <= n && n >= 1, "log_dnm needs 0 <= m <= n, n >= 1");
    let nm = (n - m) as f64;
    let nf = n as f64;
    0.5 * lgamma(nm + 1.0) + 0.5 * nf - 0.5 * nm * nf.ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaCoefficients {
    pub n: usize,
    pub m: usize,
    pub log_dnm: f64,
    /// `A_0 … A_{n-m}`.
    pub a: Vec<f64>,
}

impl ThetaCoefficients {
    pub fn dnm(&self) -> f64 {
        self.log_dnm.exp()
    }

    pub fn sum_sq(&self) -> f64 {
        self.a.iter().map(|x| x * x).sum()
    }
}

/// Sector norms of the displaced θ state,
/// `A_k = e^{-n/2} n^{(n-m-k)/2} √(k!/(n-m)!) |L_k^{(n-m-k)}(n)|`.
/// Depends on `(n, m, k)` only.
pub fn theta_weyl_coefficients(n: usize, m: usize) -> Result<ThetaCoefficients> {
    if m > n || n == 0 {
        return Err(Error::Invalid(format!("need 0 <= m <= n and n >= 1, got n = {n}, m = {m}")));
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let top = n - m;
    let ln_fact_top = lgamma(top as f64 + 1.0);
    let a = (0..=top)
        .map(|k| {
            let alpha = (top - k) as f64;
            let ln_l = ln_abs_laguerre(k, alpha, nf);
            let ln_a = -0.5 * nf + 0.5 * alpha * ln_n + 0.5 * (lgamma(k as f64 + 1.0) - ln_fact_top) + ln_l;
            ln_a.exp()
        })
        .collect();
    Ok(ThetaCoefficients { n, m, log_dnm: log_dnm(n, m), a })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrasikovBound {
    pub bound: f64,
    pub valid: bool,
    pub q2: f64,
    pub s2: f64,
}

/// Envelope for `|L_k^{(α)}(x)|` on `(q², s²)`:
/// `√((k+α)!/k!) · √(x(s²-q²)/r(x)) · e^{x/2} · x^{-(α+1)/2}`,
/// `r(x) = (x - q²)(s² - x)`, `s, q = √(k+α+1) ± √k`.
pub fn krasikov_bound(k: usize, alpha: f64, x: f64) -> KrasikovBound {
    let kf = k as f64;
    let big = (kf + alpha + 1.0).sqrt();
    let small = kf.sqrt();
    let s2 = (big + small).powi(2);
    let q2 = (big - small).powi(2);
    let valid = k >= 2 && alpha > -1.0 && x > q2 && x < s2;
    if !valid {
        return KrasikovBound { bound: f64::NAN, valid, q2, s2 };
    }
    let r = (x - q2) * (s2 - x);
    let ln_bound = 0.5 * (lgamma(kf + alpha + 1.0) - lgamma(kf + 1.0)) + 0.5 * (x * (s2 - q2) / r).ln() + 0.5 * x
        - 0.5 * (alpha + 1.0) * x.ln();
    KrasikovBound { bound: ln_bound.exp(), valid, q2, s2 }
}

/// Largest `m` with `m ≤ √(7 + 3n) - 3`, clamped at zero.
pub fn admissible_m(n: usize) -> usize {
    let v = (7.0 + 3.0 * n as f64).sqrt() - 3.0;
    if v <= 0.0 {
        0
    } else {
        v.floor() as usize
    }
}

/// `H_s(N) = Σ_{j=1}^N j^{-s}`, summed from the small terms upward.
pub fn generalized_harmonic(s: f64, big_n: usize) -> f64 {
    (1..=big_n).rev().map(|j| (j as f64).powf(-s)).sum()
}

/// `ζ(s)` for `s > 1`: `H_s(10⁶)` plus an Euler–Maclaurin tail
/// `N^{1-s}/(s-1) - N^{-s}/2 + s N^{-s-1}/12`.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta needs s > 1");
    const N: usize = 1_000_000;
    let nf = N as f64;
    generalized_harmonic(s, N) + nf.powf(1.0 - s) / (s - 1.0) - 0.5 * nf.powf(-s) + s * nf.powf(-s - 1.0) / 12.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentBound {
    /// `Σ_{k≤n-m} A_k²/(k+m+1)^δ + (n-m+2)^{-δ}`.
    pub lhs: f64,
    /// `d⁻²(1 + m/√n) + (√2/2 - 1/2)⁻¹ (n-m+1)^{-1/2} (H_{δ+1/2}(n-m+1) - 1) + (n-m+2)^{-δ}`.
    pub rhs: f64,
    pub log_dnm: f64,
}

impl MomentBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }

    /// `rhs · d_{n,m}² · e^{-m}`, the quantity whose boundedness in `n`
    /// gives the `K(ε)` of the moment estimate.
    pub fn scaled_rhs(&self, m: usize) -> f64 {
        self.rhs * (2.0 * self.log_dnm - m as f64).exp()
    }
}

/// Bound on `⟨C*(√n φ)θ_{n,m}, (N+1)^{-δ} C*(√n φ)θ_{n,m}⟩` built from the
/// `A_k`; requires `m ≤ admissible_m(n)` and `δ > 1/4`.
pub fn weighted_number_moment(n: usize, m: usize, delta: f64) -> Result<MomentBound> {
    if n == 0 || m > admissible_m(n) {
        return Err(Error::Invalid(format!("m = {m} exceeds admissible bound {} for n = {n}", admissible_m(n))));
    }
    if delta <= 0.25 {
        return Err(Error::Invalid(format!("delta = {delta} must exceed 1/4")));
    }
    let coeffs = theta_weyl_coefficients(n, m)?;
    let top = n - m;
    let tail = ((top + 2) as f64).powf(-delta);
    let lhs = coeffs
        .a
        .iter()
        .enumerate()
        .map(|(k, a)| a * a / ((k + m + 1) as f64).powf(delta))
        .sum::<f64>()
        + tail;
    let inv_d2 = (-2.0 * coeffs.log_dnm).exp();
    let c = 1.0 / (std::f64::consts::FRAC_1_SQRT_2 - 0.5);
    let rhs = inv_d2 * (1.0 + m as f64 / (n as f64).sqrt())
        + c * ((top + 1) as f64).powf(-0.5) * (generalized_harmonic(delta + 0.5, top + 1) - 1.0)
        + tail;
    Ok(MomentBound { lhs, rhs, log_dnm: coeffs.log_dnm })
}
