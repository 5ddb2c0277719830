use super::batch::SpinBatch;
use super::field::{FieldScratch, FieldSolver};

/// Anything that can produce local fields for a batch of configurations.
pub(crate) trait FieldSource {
    fn fields(&self, s: &SpinBatch, h: &mut SpinBatch, scratch: &mut FieldScratch);
}

impl FieldSource for FieldSolver {
    fn fields(&self, s: &SpinBatch, h: &mut SpinBatch, scratch: &mut FieldScratch) {
        FieldSolver::fields(self, s, h, scratch)
    }
}

/// Buffers reused across RK4 steps.
#[derive(Clone, Debug)]
pub(crate) struct Rk4Work {
    stage: SpinBatch,
    field: SpinBatch,
    slope: SpinBatch,
    acc: SpinBatch,
    pub scratch: FieldScratch,
}

impl Rk4Work {
    pub fn new(n_sites: usize, lanes: usize) -> Self {
        let z = SpinBatch::zeros(n_sites, lanes);
        Rk4Work {
            stage: z.clone(),
            field: z.clone(),
            slope: z.clone(),
            acc: z,
            scratch: FieldScratch::default(),
        }
    }
}

/// slope = s × h
fn cross(s: &SpinBatch, h: &SpinBatch, out: &mut SpinBatch) {
    let n = s.x.len();
    for i in 0..n {
        out.x[i] = s.y[i] * h.z[i] - s.z[i] * h.y[i];
        out.y[i] = s.z[i] * h.x[i] - s.x[i] * h.z[i];
        out.z[i] = s.x[i] * h.y[i] - s.y[i] * h.x[i];
    }
}

/// dst = base + c·k
fn axpy(base: &SpinBatch, c: f64, k: &SpinBatch, dst: &mut SpinBatch) {
    for (d, (b, v)) in dst.x.iter_mut().zip(base.x.iter().zip(&k.x)) {
        *d = b + c * v;
    }
    for (d, (b, v)) in dst.y.iter_mut().zip(base.y.iter().zip(&k.y)) {
        *d = b + c * v;
    }
    for (d, (b, v)) in dst.z.iter_mut().zip(base.z.iter().zip(&k.z)) {
        *d = b + c * v;
    }
}

/// acc += c·k
fn accumulate(acc: &mut SpinBatch, c: f64, k: &SpinBatch) {
    for (a, v) in acc.x.iter_mut().zip(&k.x) {
        *a += c * v;
    }
    for (a, v) in acc.y.iter_mut().zip(&k.y) {
        *a += c * v;
    }
    for (a, v) in acc.z.iter_mut().zip(&k.z) {
        *a += c * v;
    }
}

/// One classical fourth-order Runge-Kutta step of dS_m/dt = S_m × h_m for
/// every lane, with fields recomputed at each stage. Spin lengths are not
/// renormalized.
pub(crate) fn rk4_step_batch<F: FieldSource>(source: &F, s: &mut SpinBatch, dt: f64, w: &mut Rk4Work) {
    // k1
    source.fields(s, &mut w.field, &mut w.scratch);
    cross(s, &w.field, &mut w.slope);
    w.acc.x.copy_from_slice(&w.slope.x);
    w.acc.y.copy_from_slice(&w.slope.y);
    w.acc.z.copy_from_slice(&w.slope.z);
    axpy(s, 0.5 * dt, &w.slope, &mut w.stage);
    // k2
    source.fields(&w.stage, &mut w.field, &mut w.scratch);
    cross(&w.stage, &w.field, &mut w.slope);
    accumulate(&mut w.acc, 2.0, &w.slope);
    axpy(s, 0.5 * dt, &w.slope, &mut w.stage);
    // k3
    source.fields(&w.stage, &mut w.field, &mut w.scratch);
    cross(&w.stage, &w.field, &mut w.slope);
    accumulate(&mut w.acc, 2.0, &w.slope);
    axpy(s, dt, &w.slope, &mut w.stage);
    // k4
    source.fields(&w.stage, &mut w.field, &mut w.scratch);
    cross(&w.stage, &w.field, &mut w.slope);
    accumulate(&mut w.acc, 1.0, &w.slope);
    accumulate(s, dt / 6.0, &w.acc);
}

/// Classical energy Σ_{m<n} J^x S^x_m S^x_n + ... = ½ Σ_m S_m · h_m per lane.
pub(crate) fn energy_batch(
    solver: &FieldSolver,
    s: &SpinBatch,
    field: &mut SpinBatch,
    scratch: &mut FieldScratch,
    out: &mut [f64],
) {
    solver.fields(s, field, scratch);
    s.dot_per_lane(field, out);
    for e in out.iter_mut() {
        *e *= 0.5;
    }
}
