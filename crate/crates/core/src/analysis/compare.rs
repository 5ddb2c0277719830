use serde::{Deserialize, Serialize};

use super::fit::{fit_long_time_tail, FitWindow};
use crate::error::{Error, Result};
use crate::series::CorrelationSeries;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub window: FitWindow,
    pub n_points: usize,
    pub max_abs_diff: f64,
    /// time at which max_abs_diff occurs
    pub t_at_max: f64,
    pub rms_diff: f64,
    /// (a - b) / sqrt(σa² + σb²) on the common grid; zero where both errors vanish
    pub z_scores: Vec<f64>,
    pub max_abs_z: f64,
    /// γ_a - γ_b and ω_a - ω_b when both tails fit with their default windows
    pub delta_gamma: Option<f64>,
    pub delta_omega: Option<f64>,
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Compare two series on [t_lo, t_hi] using the grid of `a`, with `b` linearly
/// interpolated onto it.
pub fn compare_series(a: &CorrelationSeries, b: &CorrelationSeries, window: FitWindow) -> Result<ComparisonReport> {
    a.validate()?;
    b.validate()?;
    let lo = window.t_lo.max(a.times[0]).max(b.times[0]);
    let hi = window.t_hi.min(*a.times.last().unwrap()).min(*b.times.last().unwrap());
    if !(lo <= hi) {
        return Err(Error::InvalidParams(format!(
            "window [{}, {}] does not overlap both series",
            window.t_lo, window.t_hi
        )));
    }
    let mut n = 0;
    let (mut max_abs, mut t_at_max, mut sum_sq, mut max_z) = (0.0f64, lo, 0.0, 0.0f64);
    let mut z_scores = Vec::new();
    for k in 0..a.len() {
        let t = a.times[k];
        if t < lo || t > hi {
            continue;
        }
        let (vb, eb) = b.interpolate(t).expect("t inside b's range");
        let d = a.values[k] - vb;
        let sigma = a.stderr[k].hypot(eb);
        let z = if sigma > 0.0 { d / sigma } else { 0.0 };
        if d.abs() > max_abs {
            max_abs = d.abs();
            t_at_max = t;
        }
        sum_sq += d * d;
        max_z = max_z.max(z.abs());
        z_scores.push(z);
        n += 1;
    }
    if n == 0 {
        return Err(Error::InvalidParams("no grid points of the first series inside the window".into()));
    }
    let fits = (fit_long_time_tail(a, None, None), fit_long_time_tail(b, None, None));
    let (delta_gamma, delta_omega) = match fits {
        (Ok(fa), Ok(fb)) => (Some(fa.gamma - fb.gamma), Some(fa.omega - fb.omega)),
        _ => (None, None),
    };
    Ok(ComparisonReport {
        window: FitWindow { t_lo: lo, t_hi: hi },
        n_points: n,
        max_abs_diff: max_abs,
        t_at_max,
        rms_diff: (sum_sq / n as f64).sqrt(),
        z_scores,
        max_abs_z: max_z,
        delta_gamma,
        delta_omega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(offset: f64, dt: f64, n: usize) -> CorrelationSeries {
        let v = (0..n).map(|k| offset + (-0.1 * k as f64 * dt).exp()).collect();
        CorrelationSeries::uniform(dt, v, vec![0.0; n]).unwrap()
    }

    #[test]
    fn identical_series() {
        let a = ramp(0.0, 0.1, 50);
        let r = compare_series(&a, &a, FitWindow { t_lo: 0.0, t_hi: 10.0 }).unwrap();
        assert_eq!((r.max_abs_diff, r.rms_diff, r.max_abs_z), (0.0, 0.0, 0.0));
        assert_eq!(r.n_points, 50);
        assert_eq!(r.window.t_hi, 4.9);
    }

    #[test]
    fn constant_offset_on_a_different_grid() {
        let a = ramp(0.0, 0.1, 50);
        let b = ramp(0.01, 0.05, 100);
        let r = compare_series(&a, &b, FitWindow { t_lo: 0.0, t_hi: 1.0 }).unwrap();
        // b is linearly interpolated, so allow for its curvature
        assert!((r.max_abs_diff - 0.01).abs() < 1e-4);
    }

    #[test]
    fn disjoint_window() {
        let a = ramp(0.0, 0.1, 50);
        assert!(compare_series(&a, &a, FitWindow { t_lo: 6.0, t_hi: 7.0 }).is_err());
    }
}
