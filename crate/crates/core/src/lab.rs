//! Test-field families and the experiments run on top of the functionals.
//!
//! Every experiment returns an [`ExperimentResult`]: a table of numeric rows in
//! a fixed column order, fitted slopes and pass/fail verdicts. Rows are
//! emitted in parameter order regardless of how the work was scheduled, so a
//! rerun with the same inputs reproduces the same bytes.

mod experiments;
mod family;

pub use experiments::*;
pub use family::*;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slope {
    pub name: String,
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero for two points.
    pub stderr: f64,
}

/// Ordinary least squares fit of `ln y` on `ln x`. Needs at least two points
/// and strictly positive finite data.
pub fn fit_loglog(name: &str, xs: &[f64], ys: &[f64]) -> Result<Slope> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidInput("log-log fit needs at least two paired points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidInput(format!("log-log fit of {name} needs positive finite data")));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("log-log fit needs distinct abscissae".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if lx.len() > 2 {
        let ssr: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(Slope {
        name: name.to_string(),
        slope,
        intercept,
        stderr,
    })
}

/// A named check of one value against a closed interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Verdict {
    pub fn within(name: &str, value: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let passed = value.is_finite() && lower.is_none_or(|l| value >= l) && upper.is_none_or(|u| value <= u);
        Verdict {
            name: name.to_string(),
            value,
            lower,
            upper,
            passed,
        }
    }

    pub fn at_least(name: &str, value: f64, lower: f64) -> Self {
        Self::within(name, value, Some(lower), None)
    }

    pub fn at_most(name: &str, value: f64, upper: f64) -> Self {
        Self::within(name, value, None, Some(upper))
    }

    /// Boolean check stored as `1` (pass) or `0`.
    pub fn flag(name: &str, ok: bool) -> Self {
        Self::within(name, if ok { 1.0 } else { 0.0 }, Some(1.0), None)
    }
}

/// Tabular outcome of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub seed: u64,
    /// Filled in by the driver that owns the configuration.
    pub config_hash: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub slopes: Vec<Slope>,
    pub verdicts: Vec<Verdict>,
    pub summary: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl ExperimentResult {
    pub fn new(experiment: &str, seed: u64, columns: &[&str]) -> Self {
        ExperimentResult {
            experiment: experiment.to_string(),
            seed,
            config_hash: String::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            slopes: Vec::new(),
            verdicts: Vec::new(),
            summary: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Values of one column, in row order.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn slope(&self, name: &str) -> Option<&Slope> {
        self.slopes.iter().find(|s| s.name == name)
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }
}

/// Experiment output together with the structured per-row reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome<R> {
    pub result: ExperimentResult,
    pub reports: Vec<R>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let xs = [4.0, 8.0, 16.0, 32.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-5.0)).collect();
        let s = fit_loglog("u", &xs, &ys).unwrap();
        assert!((s.slope + 5.0).abs() < 1e-12);
        assert!((s.intercept - 3f64.ln()).abs() < 1e-10);
        assert!(s.stderr < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_data() {
        assert!(fit_loglog("u", &[1.0], &[1.0]).is_err());
        assert!(fit_loglog("u", &[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(fit_loglog("u", &[2.0, 2.0], &[1.0, 3.0]).is_err());
    }

    #[test]
    fn verdict_bounds() {
        assert!(Verdict::within("x", 1.0, Some(0.0), Some(1.0)).passed);
        assert!(!Verdict::at_least("x", f64::NAN, 0.0).passed);
        assert!(!Verdict::at_most("x", 2.0, 1.0).passed);
        assert!(!Verdict::flag("x", false).passed);
    }

    proptest! {
        #[test]
        fn noisy_fit_stays_near_true_slope(slope in -6.0f64..6.0, noise in proptest::collection::vec(-1e-3f64..1e-3, 6)) {
            let xs: Vec<f64> = (0..6).map(|k| 2f64.powi(k + 2)).collect();
            let ys: Vec<f64> = xs.iter().zip(&noise).map(|(x, e)| x.powf(slope) * e.exp()).collect();
            let s = fit_loglog("y", &xs, &ys).unwrap();
            prop_assert!((s.slope - slope).abs() < 2e-3);
            prop_assert!(s.stderr < 2e-3);
        }
    }
}
