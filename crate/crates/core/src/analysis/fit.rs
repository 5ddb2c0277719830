//! Long-time tail C(t) ≅ A e^{-γt} cos(ωt + φ) by Levenberg–Marquardt on the
//! linear series.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice_model::DipolarConstants;
use crate::series::CorrelationSeries;

/// Lobes are delimited by sign changes that exceed this many standard errors.
const LOBE_THRESHOLD_SIGMAS: f64 = 2.0;
/// The default window ends with the first lobe whose extremum is closer to
/// zero than this many standard errors.
const WINDOW_END_SIGMAS: f64 = 5.0;
/// Relative residuals above this mark a tail that the damped cosine does not
/// describe.
pub const HIGH_RESIDUAL: f64 = 0.25;

/// Largest gap, in mean extremum spacings, to a lobe still counted as signal.
const MAX_SPACING_RATIO: f64 = 1.5;

const MAX_ITERATIONS: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub t_lo: f64,
    pub t_hi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailParams {
    pub amplitude: f64,
    pub gamma: f64,
    pub omega: f64,
    pub phase: f64,
}

impl TailParams {
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * (-self.gamma * t).exp() * (self.omega * t + self.phase).cos()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub amplitude: f64,
    pub gamma: f64,
    pub omega: f64,
    pub phase: f64,
    pub window: FitWindow,
    /// ‖C - fit‖ / ‖fit‖ over the window points.
    pub rms_residual: f64,
    pub n_points: usize,
    /// rms_residual exceeds [`HIGH_RESIDUAL`]
    pub high_residual: bool,
}

impl TailFit {
    pub fn params(&self) -> TailParams {
        TailParams { amplitude: self.amplitude, gamma: self.gamma, omega: self.omega, phase: self.phase }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.params().eval(t)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit serializes")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extremum {
    pub index: usize,
    pub t: f64,
    pub value: f64,
}

/// One extremum per lobe, where a lobe is a run of points of one sign with
/// sign changes only counted once |C| exceeds 2 standard errors.
pub fn find_extrema(series: &CorrelationSeries) -> Vec<Extremum> {
    let v = &series.values;
    let mut out = Vec::new();
    let mut sign = 0.0;
    let mut best: Option<usize> = None;
    for k in 0..v.len() {
        let thr = LOBE_THRESHOLD_SIGMAS * series.stderr[k];
        if v[k].abs() > thr && v[k].signum() != sign {
            if let Some(b) = best.take() {
                out.push(refine(series, b));
            }
            sign = v[k].signum();
        }
        if sign != 0.0 && v[k].signum() == sign && best.is_none_or(|b| v[k].abs() > v[b].abs()) {
            best = Some(k);
        }
    }
    if let Some(b) = best {
        out.push(refine(series, b));
    }
    out
}

/// Parabolic refinement of a sampled extremum.
fn refine(series: &CorrelationSeries, k: usize) -> Extremum {
    let (t, v) = (&series.times, &series.values);
    if k == 0 || k + 1 >= v.len() {
        return Extremum { index: k, t: t[k], value: v[k] };
    }
    let h = t[k + 1] - t[k];
    let curv = v[k - 1] - 2.0 * v[k] + v[k + 1];
    if curv == 0.0 || ((t[k] - t[k - 1]) - h).abs() > 1e-9 * h {
        return Extremum { index: k, t: t[k], value: v[k] };
    }
    let x = (0.5 * (v[k - 1] - v[k + 1]) / curv).clamp(-0.5, 0.5);
    Extremum { index: k, t: t[k] + x * h, value: v[k] - 0.25 * (v[k - 1] - v[k + 1]) * x }
}

/// Window from the deepest minimum of C to the end of the first later lobe
/// whose extremum is below 5 standard errors, i.e. the lobe where the signal
/// sinks into the noise. That lobe is dropped if it lies more than 1.5 mean
/// extremum spacings beyond the last significant one. A lobe ends at a sign
/// change or where |C| falls below one standard error.
pub fn default_window(series: &CorrelationSeries) -> Result<FitWindow> {
    let ext = find_extrema(series);
    let deepest = ext
        .iter()
        .enumerate()
        .filter(|(_, e)| e.value < 0.0)
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::FitFailure("series never becomes negative".into()))?;
    let first = deepest;
    let significant = |e: &Extremum| e.value.abs() >= WINDOW_END_SIGMAS * series.stderr[e.index];
    let run = ext[first..].iter().take_while(|e| significant(e)).count();
    let sig_last = first + run - 1;
    // the fading lobe must follow at about the spacing of the significant
    // ones; a distant one is a noise excursion
    let last = match ext.get(sig_last + 1) {
        Some(next) if run >= 2 => {
            let spacing = (ext[sig_last].t - ext[first].t) / (run - 1) as f64;
            if next.t - ext[sig_last].t <= MAX_SPACING_RATIO * spacing { sig_last + 1 } else { sig_last }
        }
        Some(_) => sig_last + 1,
        None => sig_last,
    };
    if last < first + 2 {
        return Err(Error::FitFailure(format!(
            "only {} extrema from the deepest minimum to the noise floor, 3 are needed",
            (last + 1).saturating_sub(first)
        )));
    }
    let t_lo = series.times[ext[first].index];
    // end of the last lobe: its sign change, or earlier where |C| drops below
    // one standard error (correlated noise can hold one sign for a long time)
    let v = &series.values;
    let e = ext[last];
    let k = (e.index..v.len())
        .find(|&k| v[k].signum() != e.value.signum() || v[k].abs() < series.stderr[k])
        .unwrap_or(v.len() - 1);
    let t_hi = series.times[k];
    Ok(FitWindow { t_lo, t_hi })
}

/// Least-squares fit of A e^{-γt} cos(ωt + φ) on the window (default window
/// if none is given). Starting values come from the extrema in the window
/// unless a hint is supplied; the best of several perturbed starts wins.
pub fn fit_long_time_tail(
    series: &CorrelationSeries,
    window: Option<FitWindow>,
    init_hint: Option<TailParams>,
) -> Result<TailFit> {
    series.validate()?;
    let window = match window {
        Some(w) => w,
        None => default_window(series)?,
    };
    if !(window.t_lo < window.t_hi) {
        return Err(Error::InvalidParams(format!("empty fit window [{}, {}]", window.t_lo, window.t_hi)));
    }
    let idx: Vec<usize> = (0..series.len())
        .filter(|&k| series.times[k] >= window.t_lo && series.times[k] <= window.t_hi)
        .collect();
    let ext: Vec<Extremum> = find_extrema(series)
        .into_iter()
        .filter(|e| (window.t_lo..=window.t_hi).contains(&series.times[e.index]))
        .collect();
    if ext.len() < 3 {
        return Err(Error::FitFailure(format!("window holds {} extrema, at least 3 are needed", ext.len())));
    }
    if idx.len() < 8 {
        return Err(Error::FitFailure(format!("window holds only {} points", idx.len())));
    }

    // Internally time is measured from t0 to keep A and γ decoupled.
    let t0 = window.t_lo;
    let ts: Vec<f64> = idx.iter().map(|&k| series.times[k] - t0).collect();
    let ys: Vec<f64> = idx.iter().map(|&k| series.values[k]).collect();

    let guess = match init_hint {
        Some(h) => shift(h, t0),
        None => initial_guess(&ext, t0),
    };
    let mut best: Option<(f64, TailParams)> = None;
    let mut last_err = String::new();
    for (fg, fw) in starts() {
        let start = TailParams { gamma: guess.gamma * fg, omega: guess.omega * fw, ..guess };
        match levenberg_marquardt(&ts, &ys, start) {
            Ok((cost, p)) => {
                if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                    best = Some((cost, p));
                }
            }
            Err(e) => last_err = e,
        }
    }
    let (_, p) = best.ok_or_else(|| Error::FitFailure(format!("no start converged: {last_err}")))?;
    let p = canonical(unshift(p, t0));
    if !(p.gamma > 0.0) {
        return Err(Error::FitFailure(format!("fitted decay rate {} is not positive", p.gamma)));
    }
    let (res2, fit2) = idx.iter().fold((0.0, 0.0), |(r, f), &k| {
        let y = p.eval(series.times[k]);
        (r + (series.values[k] - y).powi(2), f + y * y)
    });
    let rms = (res2 / fit2).sqrt();
    Ok(TailFit {
        amplitude: p.amplitude,
        gamma: p.gamma,
        omega: p.omega,
        phase: p.phase,
        window,
        rms_residual: rms,
        n_points: idx.len(),
        high_residual: rms > HIGH_RESIDUAL,
    })
}

fn starts() -> Vec<(f64, f64)> {
    let f = [1.0, 0.8, 1.2];
    f.iter().flat_map(|&g| f.iter().map(move |&w| (g, w))).collect()
}

fn initial_guess(ext: &[Extremum], t0: f64) -> TailParams {
    let n = ext.len() as f64;
    let spacing = (ext[ext.len() - 1].t - ext[0].t) / (n - 1.0);
    let omega = PI / spacing;
    // log-envelope regression
    let (mt, ml) = ext.iter().fold((0.0, 0.0), |(a, b), e| (a + e.t / n, b + e.value.abs().ln() / n));
    let (sxy, sxx) = ext.iter().fold((0.0, 0.0), |(a, b), e| {
        (a + (e.t - mt) * (e.value.abs().ln() - ml), b + (e.t - mt) * (e.t - mt))
    });
    let gamma = (-sxy / sxx).max(0.1 * omega / PI);
    // extremum of e^{-γs}cos(ωs+ψ) sits where tan(ωs+ψ) = -γ/ω
    let e = ext[0];
    let s = e.t - t0;
    let lobe = if e.value > 0.0 { 0.0 } else { PI };
    let arg = lobe - (gamma / omega).atan();
    let phase = wrap(arg - omega * s);
    let amplitude = e.value.abs() / arg.cos().abs().max(0.5) * (gamma * s).exp();
    TailParams { amplitude, gamma, omega, phase }
}

fn shift(p: TailParams, t0: f64) -> TailParams {
    TailParams { amplitude: p.amplitude * (-p.gamma * t0).exp(), phase: p.phase + p.omega * t0, ..p }
}

fn unshift(p: TailParams, t0: f64) -> TailParams {
    TailParams { amplitude: p.amplitude * (p.gamma * t0).exp(), phase: p.phase - p.omega * t0, ..p }
}

/// A > 0, ω ≥ 0, φ in (-π, π].
fn canonical(mut p: TailParams) -> TailParams {
    if p.omega < 0.0 {
        p.omega = -p.omega;
        p.phase = -p.phase;
    }
    if p.amplitude < 0.0 {
        p.amplitude = -p.amplitude;
        p.phase += PI;
    }
    p.phase = wrap(p.phase);
    p
}

fn wrap(phi: f64) -> f64 {
    let mut x = phi.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

fn residuals(ts: &[f64], ys: &[f64], p: &TailParams, r: &mut [f64]) -> f64 {
    let mut cost = 0.0;
    for ((ri, &t), &y) in r.iter_mut().zip(ts).zip(ys) {
        *ri = y - p.eval(t);
        cost += *ri * *ri;
    }
    cost
}

fn levenberg_marquardt(ts: &[f64], ys: &[f64], start: TailParams) -> std::result::Result<(f64, TailParams), String> {
    let mut p = start;
    let mut r = vec![0.0; ts.len()];
    let mut cost = residuals(ts, ys, &p, &mut r);
    if !cost.is_finite() {
        return Err("non-finite cost at start".into());
    }
    let mut lambda = 1e-3;
    for _ in 0..MAX_ITERATIONS {
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for (&t, &ri) in ts.iter().zip(&r) {
            let env = (-p.gamma * t).exp();
            let (s, c) = (p.omega * t + p.phase).sin_cos();
            let g = Vector4::new(env * c, -t * p.amplitude * env * c, -t * p.amplitude * env * s, -p.amplitude * env * s);
            jtj += g * g.transpose();
            jtr += g * ri;
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj;
            for i in 0..4 {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
            }
            let Some(delta) = a.cholesky().map(|ch| ch.solve(&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = TailParams {
                amplitude: p.amplitude + delta[0],
                gamma: p.gamma + delta[1],
                omega: p.omega + delta[2],
                phase: p.phase + delta[3],
            };
            let mut rt = vec![0.0; ts.len()];
            let ct = residuals(ts, ys, &trial, &mut rt);
            if ct.is_finite() && ct <= cost {
                let small = delta.iter().zip([trial.amplitude, trial.gamma, trial.omega, 1.0]).all(|(d, v)| d.abs() <= 1e-13 * v.abs().max(1e-3));
                let stalled = cost - ct <= 1e-16 * cost;
                p = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if small || stalled {
                    return Ok((cost, p));
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // no downhill step at any damping: a minimum to working precision
            return Ok((cost, p));
        }
    }
    Err(format!("no convergence in {MAX_ITERATIONS} iterations (cost {cost:.3e})"))
}

/// Multiply rates by `factor` (and divide times by it).
pub fn scale_rates(fit: &TailFit, factor: f64) -> TailFit {
    TailFit {
        gamma: fit.gamma * factor,
        omega: fit.omega * factor,
        window: FitWindow { t_lo: fit.window.t_lo / factor, t_hi: fit.window.t_hi / factor },
        ..fit.clone()
    }
}

/// Rates of a fit made in dipolar J units expressed in ms⁻¹ and rad/ms.
pub fn to_physical_units(fit: &TailFit, consts: &DipolarConstants) -> TailFit {
    scale_rates(fit, consts.rate_per_ms())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(p: TailParams, dt: f64, n: usize) -> CorrelationSeries {
        let values = (0..n).map(|k| p.eval(k as f64 * dt)).collect();
        CorrelationSeries::uniform(dt, values, vec![0.0; n]).unwrap()
    }

    #[test]
    fn recovers_damped_cosine() {
        let p = TailParams { amplitude: 1.0, gamma: 0.5, omega: 3.0, phase: 0.2 };
        let s = synthetic(p, 0.05, 300);
        let f = fit_long_time_tail(&s, Some(FitWindow { t_lo: 1.0, t_hi: 12.0 }), None).unwrap();
        assert!((f.gamma - 0.5).abs() < 1e-6);
        assert!((f.omega - 3.0).abs() < 1e-6);
        assert!((f.phase - 0.2).abs() < 1e-6);
        assert!((f.amplitude - 1.0).abs() < 1e-6);
        assert!(f.rms_residual < 1e-8 && !f.high_residual);
    }

    #[test]
    fn negative_amplitude_is_folded_into_phase() {
        let p = TailParams { amplitude: -2.0, gamma: 0.3, omega: 2.0, phase: 2.5 };
        let s = synthetic(p, 0.05, 400);
        let f = fit_long_time_tail(&s, Some(FitWindow { t_lo: 0.5, t_hi: 15.0 }), None).unwrap();
        assert!((f.amplitude - 2.0).abs() < 1e-6);
        assert!((f.phase - wrap(2.5 + PI)).abs() < 1e-6);
    }

    #[test]
    fn extrema_of_cosine() {
        let s = synthetic(TailParams { amplitude: 1.0, gamma: 0.0, omega: PI, phase: 0.0 }, 0.01, 501);
        let e = find_extrema(&s);
        assert_eq!(e.len(), 6);
        for (i, x) in e.iter().enumerate() {
            assert!((x.t - i as f64).abs() < 1e-6, "{x:?}");
        }
    }

    #[test]
    fn distant_noise_lobe_is_not_signal() {
        let p = TailParams { amplitude: 1.0, gamma: 0.6, omega: 3.0, phase: 0.0 };
        let mut s = synthetic(p, 0.02, 800);
        // signal cut at the zero crossing after t = 4, then a lone -3σ bump at t = 12
        let cut = (4.0f64 / 0.02) as usize;
        let cut = (cut..s.len()).find(|&k| s.values[k] * s.values[k - 1] <= 0.0).unwrap();
        for k in 0..s.len() {
            let t = s.times[k];
            if k >= cut {
                s.values[k] = -0.03 * (-(t - 12.0).powi(2) / 0.5).exp();
            }
            s.stderr[k] = 0.01;
        }
        let w = default_window(&s).unwrap();
        assert!(w.t_hi < 5.0, "{w:?}");
    }

    #[test]
    fn too_few_extrema() {
        let p = TailParams { amplitude: 1.0, gamma: 0.5, omega: 1.0, phase: 0.0 };
        let s = synthetic(p, 0.05, 100);
        assert!(fit_long_time_tail(&s, Some(FitWindow { t_lo: 0.5, t_hi: 4.0 }), None).is_err());
    }

    #[test]
    fn unit_conversion_round_trip() {
        let f = TailFit {
            amplitude: 1.2,
            gamma: 1.8,
            omega: 4.6,
            phase: -0.3,
            window: FitWindow { t_lo: 1.0, t_hi: 6.0 },
            rms_residual: 0.01,
            n_points: 10,
            high_residual: false,
        };
        assert_eq!(scale_rates(&f, 1.0), f);
        let c = DipolarConstants::CAF2;
        let back = scale_rates(&to_physical_units(&f, &c), 1.0 / c.rate_per_ms());
        assert!((back.gamma - f.gamma).abs() < 1e-14 && (back.omega - f.omega).abs() < 1e-14);
        assert!((back.window.t_hi - f.window.t_hi).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let p = TailParams { amplitude: 1.0, gamma: 0.5, omega: 3.0, phase: 0.2 };
        let f = fit_long_time_tail(&synthetic(p, 0.05, 300), Some(FitWindow { t_lo: 1.0, t_hi: 12.0 }), None).unwrap();
        let back: TailFit = serde_json::from_str(&f.to_json()).unwrap();
        assert_eq!(back, f);
    }
}
