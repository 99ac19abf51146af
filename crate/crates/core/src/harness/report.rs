//! Sweep results, their CSV/JSON forms and log-log rate fits.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const CSV_HEADER: &str = "n,m,t,trace_dist,hs_dist,op_dist,cross_term,bound_envelope,runtime_s";

/// Distances below this count as exact agreement; rate fits refuse them.
pub const EXACT_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: usize,
    pub m: usize,
    pub t: f64,
    pub trace_dist: f64,
    pub hs_dist: f64,
    pub op_dist: f64,
    /// Overlap terms between superposition components; absent for single states.
    pub cross_term: Option<f64>,
    /// Shape of the theoretical rate without its unknown constants.
    pub bound_envelope: f64,
    pub runtime_s: f64,
    pub config_hash: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Trace,
    HilbertSchmidt,
    Operator,
}

impl ReportRow {
    pub fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Trace => self.trace_dist,
            Metric::HilbertSchmidt => self.hs_dist,
            Metric::Operator => self.op_dist,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum FitOutcome {
    Fitted { t: f64, fit: RateFit },
    ExactRegime { t: f64, reason: String },
    Skipped { t: f64, reason: String },
}

/// Per-component weights at one `(n, t)` of a superposition sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRow {
    pub n: usize,
    pub t: f64,
    /// `|c_i|²/‖c‖²`, the weights of the limiting mixture.
    pub limit: Vec<f64>,
    /// `|c_i(n)|²` of the normalized superposition.
    pub coefficient: Vec<f64>,
    /// Least-squares weights of the reduced density matrix on the
    /// evolved component projectors.
    pub fitted: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config_hash: String,
    pub family: String,
    /// Distance used for rate fits.
    pub metric: Metric,
    pub rows: Vec<ReportRow>,
    pub fits: Vec<FitOutcome>,
    /// `max dist / bound_envelope` over the rows: the smallest constant the
    /// envelope needs (fitted, not a known theoretical value).
    pub envelope_constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<WeightRow>,
    pub version: String,
}

/// Ordinary least squares of `ln dist` on `ln n` over rows at time `t`.
pub fn fit_rate(rows: &[ReportRow], t: f64, metric: Metric) -> Result<RateFit> {
    let sel: Vec<&ReportRow> = rows.iter().filter(|r| r.t == t).collect();
    if sel.len() < 3 {
        return Err(Error::Invalid(format!("{} rows at t = {t}; a fit needs at least 3", sel.len())));
    }
    if let Some(r) = sel.iter().find(|r| !(r.metric(metric) >= EXACT_THRESHOLD)) {
        return Err(Error::ExactRegime(format!(
            "distance {:e} at n = {}, t = {t} is at machine precision",
            r.metric(metric),
            r.n
        )));
    }
    let xs: Vec<f64> = sel.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = sel.iter().map(|r| r.metric(metric).ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Invalid("all rows share one n".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(RateFit { slope, intercept, r2 })
}

/// Distinct times in first-appearance order.
pub fn times(rows: &[ReportRow]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for r in rows {
        if !out.contains(&r.t) {
            out.push(r.t);
        }
    }
    out
}

pub fn fit_all(rows: &[ReportRow], metric: Metric) -> Vec<FitOutcome> {
    times(rows)
        .into_iter()
        .map(|t| match fit_rate(rows, t, metric) {
            Ok(fit) => FitOutcome::Fitted { t, fit },
            Err(Error::ExactRegime(reason)) => FitOutcome::ExactRegime { t, reason },
            Err(e) => FitOutcome::Skipped { t, reason: e.to_string() },
        })
        .collect()
}

impl ConvergenceReport {
    pub fn fit(&self, t: f64) -> Result<RateFit> {
        fit_rate(&self.rows, t, self.metric)
    }

    /// CSV with the fixed header; floats in shortest round-trip form, LF
    /// line endings.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_csv(&self.rows, w)
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn fmt(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_csv<W: Write>(rows: &[ReportRow], mut w: W) -> Result<()> {
    w.write_all(CSV_HEADER.as_bytes())?;
    w.write_all(b"\n")?;
    for r in rows {
        let cross = r.cross_term.map(fmt).unwrap_or_default();
        let line = format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.m,
            fmt(r.t),
            fmt(r.trace_dist),
            fmt(r.hs_dist),
            fmt(r.op_dist),
            cross,
            fmt(r.bound_envelope),
            fmt(r.runtime_s)
        );
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Parses a CSV written by [`write_csv`]. The CSV carries no config hash, so
/// rows are tagged with `hash`.
pub fn parse_csv(text: &str, hash: &str) -> Result<Vec<ReportRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Config("unexpected CSV header".into()));
    }
    let num = |s: &str, what: &str| -> Result<f64> {
        s.parse::<f64>().map_err(|_| Error::Config(format!("bad {what} value {s:?}")))
    };
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(Error::Config(format!("line {}: expected 9 fields, got {}", i + 2, f.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| Error::Config(format!("line {}: bad integer {s:?}", i + 2)));
        rows.push(ReportRow {
            n: int(f[0])?,
            m: int(f[1])?,
            t: num(f[2], "t")?,
            trace_dist: num(f[3], "trace_dist")?,
            hs_dist: num(f[4], "hs_dist")?,
            op_dist: num(f[5], "op_dist")?,
            cross_term: if f[6].is_empty() { None } else { Some(num(f[6], "cross_term")?) },
            bound_envelope: num(f[7], "bound_envelope")?,
            runtime_s: num(f[8], "runtime_s")?,
            config_hash: hash.to_string(),
        });
    }
    Ok(rows)
}

/// Concatenates reports of one configuration; mixing configurations is an
/// error.
pub fn merge_reports(reports: &[ConvergenceReport]) -> Result<ConvergenceReport> {
    let first = reports.first().ok_or_else(|| Error::Invalid("nothing to merge".into()))?;
    for r in reports {
        if r.config_hash != first.config_hash || r.rows.iter().any(|row| row.config_hash != first.config_hash) {
            return Err(Error::Config(format!(
                "cannot merge results of config {} with config {}",
                first.config_hash, r.config_hash
            )));
        }
    }
    let mut rows: Vec<ReportRow> = reports.iter().flat_map(|r| r.rows.iter().cloned()).collect();
    rows.sort_by(|a, b| a.n.cmp(&b.n).then(a.t.total_cmp(&b.t)));
    rows.dedup_by(|a, b| a.n == b.n && a.t == b.t);
    let mut weights: Vec<WeightRow> = reports.iter().flat_map(|r| r.weights.iter().cloned()).collect();
    weights.sort_by(|a, b| a.n.cmp(&b.n).then(a.t.total_cmp(&b.t)));
    weights.dedup_by(|a, b| a.n == b.n && a.t == b.t);
    Ok(ConvergenceReport {
        config_hash: first.config_hash.clone(),
        family: first.family.clone(),
        metric: first.metric,
        fits: fit_all(&rows, first.metric),
        envelope_constant: envelope_constant(&rows, first.metric),
        rows,
        weights,
        version: first.version.clone(),
    })
}

pub fn envelope_constant(rows: &[ReportRow], metric: Metric) -> Option<f64> {
    rows.iter().filter(|r| r.bound_envelope > 0.0).map(|r| r.metric(metric) / r.bound_envelope).reduce(f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, t: f64, dist: f64) -> ReportRow {
        ReportRow {
            n,
            m: 0,
            t,
            trace_dist: dist,
            hs_dist: dist,
            op_dist: dist,
            cross_term: None,
            bound_envelope: 1.0 / (n as f64).sqrt(),
            runtime_s: 0.0,
            config_hash: "h".into(),
        }
    }

    #[test]
    fn synthetic_rates() {
        let rows: Vec<_> = [4, 8, 16, 32].iter().map(|&n| row(n, 0.5, 1.0 / n as f64)).collect();
        let fit = fit_rate(&rows, 0.5, Metric::Trace).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-6);
        assert!((fit.r2 - 1.0).abs() < 1e-12);

        let rows: Vec<_> = [4, 8, 16, 32].iter().map(|&n| row(n, 0.5, 3.0 / (n as f64).sqrt())).collect();
        let fit = fit_rate(&rows, 0.5, Metric::Trace).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn exact_regime_refusal() {
        let rows: Vec<_> = [4, 8, 16].iter().map(|&n| row(n, 0.0, 0.0)).collect();
        assert!(matches!(fit_rate(&rows, 0.0, Metric::Trace), Err(Error::ExactRegime(_))));
        assert!(matches!(fit_all(&rows, Metric::Trace)[0], FitOutcome::ExactRegime { .. }));
        assert!(fit_rate(&rows[..2], 0.0, Metric::Trace).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut rows = vec![row(4, 0.5, 0.125), row(6, 0.5, 1e-7)];
        rows[1].cross_term = Some(0.015625);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(&format!("{CSV_HEADER}\n4,0,0.5,0.125,0.125,0.125,,0.5,0.0\n")));
        assert!(!text.contains('\r'));
        assert_eq!(parse_csv(&text, "h").unwrap(), rows);
    }

    #[test]
    fn merge_rejects_mixed_configs() {
        let mk = |hash: &str| {
            let mut rows = vec![row(4, 0.5, 0.1)];
            rows[0].config_hash = hash.into();
            ConvergenceReport {
                config_hash: hash.into(),
                family: "product".into(),
                metric: Metric::Trace,
                rows,
                fits: vec![],
                envelope_constant: None,
                weights: vec![],
                version: "0".into(),
            }
        };
        assert!(merge_reports(&[mk("a"), mk("a")]).is_ok());
        assert!(matches!(merge_reports(&[mk("a"), mk("b")]), Err(Error::Config(_))));
    }
}
