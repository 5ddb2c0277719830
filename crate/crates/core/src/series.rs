use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// A sampled correlation function C(t) with per-point standard errors.
///
/// `values` and `stderr` are on the current scale; `normalization` maps them
/// back to the raw scale (raw = values · normalization). A freshly estimated
/// series is returned normalized, with `normalization` holding the raw
/// ⟨M_x²⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub normalization: f64,
    /// Provenance written into the CSV header (table hash, parameters, seed...).
    pub meta: BTreeMap<String, String>,
}

impl CorrelationSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, stderr: Vec<f64>) -> Result<Self> {
        let s = CorrelationSeries {
            times,
            values,
            stderr,
            normalization: 1.0,
            meta: BTreeMap::new(),
        };
        s.validate()?;
        Ok(s)
    }

    /// Uniform grid t_k = k·dt for k = 0..len.
    pub fn uniform(dt: f64, values: Vec<f64>, stderr: Vec<f64>) -> Result<Self> {
        let times = (0..values.len()).map(|k| k as f64 * dt).collect();
        Self::new(times, values, stderr)
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.is_empty() {
            return Err(Error::InvalidParams("empty series".into()));
        }
        if self.values.len() != self.times.len() || self.stderr.len() != self.times.len() {
            return Err(Error::InvalidParams("series columns differ in length".into()));
        }
        if self.times[0] != 0.0 {
            return Err(Error::InvalidParams("series must start at t = 0".into()));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams("times must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn raw_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v * self.normalization).collect()
    }

    /// Grid spacing when the grid is uniform (relative tolerance 1e-9).
    pub fn uniform_step(&self) -> Option<f64> {
        if self.len() < 2 {
            return None;
        }
        let dt = self.times[1] - self.times[0];
        self.times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt)
            .then_some(dt)
    }

    /// Linear interpolation at time `t` inside the grid.
    pub fn interpolate(&self, t: f64) -> Option<(f64, f64)> {
        let last = *self.times.last()?;
        if t < self.times[0] || t > last {
            return None;
        }
        let i = self.times.partition_point(|&x| x <= t);
        if i == self.times.len() {
            let k = self.len() - 1;
            return Some((self.values[k], self.stderr[k]));
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = (t - t0) / (t1 - t0);
        let lerp = |a: &[f64]| a[i - 1] + w * (a[i] - a[i - 1]);
        Some((lerp(&self.values), lerp(&self.stderr)))
    }

    /// CSV with `# key: value` header lines followed by the columns
    /// `t,C_raw,C_normalized,stderr` (stderr of the normalized value).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("# fidsim correlation series v1\n");
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(out, "# normalization: {:?}", self.normalization);
        out.push_str("t,C_raw,C_normalized,stderr\n");
        let c0 = self.values[0];
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{:?},{:?},{:?},{:?}",
                self.times[i],
                self.values[i] * self.normalization,
                self.values[i] / c0,
                self.stderr[i] / c0
            );
        }
        out
    }

    /// Reads a CSV written by [`to_csv`](Self::to_csv); the result is the
    /// normalized series with the raw scale in `normalization`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut meta = BTreeMap::new();
        let mut times = Vec::new();
        let mut values = Vec::new();
        let mut stderr = Vec::new();
        let mut raw0 = None;
        let mut seen_columns = false;
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if let Some(comment) = line.strip_prefix("# ") {
                if let Some((k, v)) = comment.split_once(": ") {
                    if k != "normalization" {
                        meta.insert(k.to_string(), v.to_string());
                    }
                }
                continue;
            }
            if line.starts_with("t,") {
                seen_columns = true;
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if !seen_columns || cols.len() != 4 {
                return Err(Error::Parse { line: lineno, msg: "malformed row".into() });
            }
            let num = |s: &str| -> Result<f64> {
                s.parse().map_err(|_| Error::Parse { line: lineno, msg: format!("bad number '{s}'") })
            };
            times.push(num(cols[0])?);
            if raw0.is_none() {
                raw0 = Some(num(cols[1])?);
            }
            values.push(num(cols[2])?);
            stderr.push(num(cols[3])?);
        }
        let mut s = CorrelationSeries::new(times, values, stderr)?;
        s.normalization = raw0.unwrap_or(1.0);
        s.meta = meta;
        Ok(s)
    }
}

/// Streaming estimator for ratio-of-means series c(t) = ⟨x(t)⟩ / ⟨y⟩, with
/// delta-method standard errors. Samples must be added in a fixed order for
/// bitwise-reproducible output.
#[derive(Clone, Debug)]
pub(crate) struct RatioAccumulator {
    n: usize,
    mean_x: Vec<f64>,
    m2_x: Vec<f64>,
    cov_xy: Vec<f64>,
    mean_y: f64,
    m2_y: f64,
}

impl RatioAccumulator {
    pub fn new(len: usize) -> Self {
        RatioAccumulator {
            n: 0,
            mean_x: vec![0.0; len],
            m2_x: vec![0.0; len],
            cov_xy: vec![0.0; len],
            mean_y: 0.0,
            m2_y: 0.0,
        }
    }

    pub fn push(&mut self, x: &[f64], y: f64) {
        debug_assert_eq!(x.len(), self.mean_x.len());
        self.n += 1;
        let n = self.n as f64;
        let dy = y - self.mean_y;
        self.mean_y += dy / n;
        let dy_new = y - self.mean_y;
        self.m2_y += dy * dy_new;
        for (k, &xk) in x.iter().enumerate() {
            let dx = xk - self.mean_x[k];
            self.mean_x[k] += dx / n;
            self.m2_x[k] += dx * (xk - self.mean_x[k]);
            self.cov_xy[k] += dx * dy_new;
        }
    }

    pub fn mean_y(&self) -> f64 {
        self.mean_y
    }

    /// Normalized values and their standard errors.
    pub fn ratio(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n as f64;
        let my = self.mean_y;
        let values: Vec<f64> = self.mean_x.iter().map(|m| m / my).collect();
        let stderr = values
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                if self.n < 2 {
                    return 0.0;
                }
                let var = (self.m2_x[k] - 2.0 * c * self.cov_xy[k] + c * c * self.m2_y) / (n - 1.0);
                (var.max(0.0) / n).sqrt() / my.abs()
            })
            .collect();
        (values, stderr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_matches_two_pass_formulas() {
        let xs = [[2.0, 1.0], [4.0, 1.5], [3.0, 0.2], [5.0, 2.0]];
        let mut acc = RatioAccumulator::new(2);
        for x in &xs {
            acc.push(x, x[0]);
        }
        let (v, se) = acc.ratio();
        let n = xs.len() as f64;
        let my = xs.iter().map(|x| x[0]).sum::<f64>() / n;
        let mx1 = xs.iter().map(|x| x[1]).sum::<f64>() / n;
        let c = mx1 / my;
        assert!((v[1] - c).abs() < 1e-15);
        assert_eq!(v[0], 1.0);
        assert_eq!(se[0], 0.0);
        let resid: Vec<f64> = xs.iter().map(|x| x[1] - c * x[0]).collect();
        let rm = resid.iter().sum::<f64>() / n;
        let var = resid.iter().map(|r| (r - rm).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((se[1] - (var / n).sqrt() / my).abs() < 1e-14);
    }

    #[test]
    fn csv_round_trip() {
        let mut s = CorrelationSeries::uniform(0.05, vec![1.0, 0.5, -0.25], vec![0.0, 0.01, 0.02]).unwrap();
        s.normalization = 4.0;
        s.meta.insert("seed".into(), "7".into());
        let text = s.to_csv();
        let back = CorrelationSeries::from_csv(&text).unwrap();
        assert_eq!(back, s);
        assert!(text.contains("# seed: 7"));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(CorrelationSeries::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(CorrelationSeries::new(vec![0.1], vec![1.0], vec![0.0]).is_err());
        assert!(CorrelationSeries::new(vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn interpolation() {
        let s = CorrelationSeries::uniform(1.0, vec![1.0, 0.0, 2.0], vec![0.0; 3]).unwrap();
        assert_eq!(s.interpolate(0.5).unwrap().0, 0.5);
        assert_eq!(s.interpolate(2.0).unwrap().0, 2.0);
        assert!(s.interpolate(2.5).is_none());
        assert_eq!(s.uniform_step(), Some(1.0));
    }
}
