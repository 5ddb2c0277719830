use crate::error::{Error, Result};
use crate::series::CorrelationSeries;

/// Divide by the raw C(0) so that C(0) = 1.
pub fn normalize(series: &CorrelationSeries) -> Result<CorrelationSeries> {
    series.validate()?;
    let c0 = series.values[0];
    let raw0 = c0 * series.normalization;
    if !(raw0 > 0.0) || !(c0 > 0.0) {
        return Err(Error::InvalidParams(format!("raw C(0) = {raw0} must be positive")));
    }
    let mut out = series.clone();
    for v in &mut out.values {
        *v /= c0;
    }
    for e in &mut out.stderr {
        *e /= c0;
    }
    out.values[0] = 1.0;
    out.normalization = raw0;
    Ok(out)
}

/// -C''(0) and its standard error, from the 5-point central difference with
/// C(-t) = C(t): M2 = (30 C0 - 32 C1 + 2 C2) / (12 h²).
pub fn second_moment(series: &CorrelationSeries) -> Result<(f64, f64)> {
    series.validate()?;
    if series.len() < 4 {
        return Err(Error::InvalidParams("second moment needs at least four points".into()));
    }
    let h = series.times[1] - series.times[0];
    let uniform = (1..=3).all(|k| ((series.times[k] - series.times[k - 1]) - h).abs() <= 1e-9 * h);
    if series.times[0] != 0.0 || !uniform {
        return Err(Error::InvalidParams("second moment needs a uniform grid starting at t = 0".into()));
    }
    let v = &series.values;
    if let Some(k) = (1..v.len() - 1).find(|&k| v[k] <= v[k + 1] && v[k] < v[k - 1]) {
        if k < 3 {
            return Err(Error::InvalidParams(format!(
                "grid too coarse: first extremum at point {k}, need at least 3 points before it"
            )));
        }
    }
    let scale = 12.0 * h * h;
    let m2 = (30.0 * v[0] - 32.0 * v[1] + 2.0 * v[2]) / scale;
    let e = &series.stderr;
    let err = ((32.0 * e[1]).powi(2) + (2.0 * e[2]).powi(2)).sqrt() / scale;
    Ok((m2, err))
}
