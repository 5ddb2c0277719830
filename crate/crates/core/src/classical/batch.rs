/// Spin vectors (or fields) for a batch of independent realizations, laid
/// out `[site][lane]` per component.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct SpinBatch {
    pub n_sites: usize,
    pub lanes: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl SpinBatch {
    pub fn zeros(n_sites: usize, lanes: usize) -> Self {
        let n = n_sites * lanes;
        SpinBatch { n_sites, lanes, x: vec![0.0; n], y: vec![0.0; n], z: vec![0.0; n] }
    }

    pub fn from_states(states: &[Vec<[f64; 3]>]) -> Self {
        let lanes = states.len();
        let n_sites = states[0].len();
        let mut b = SpinBatch::zeros(n_sites, lanes);
        for (lane, st) in states.iter().enumerate() {
            for (m, s) in st.iter().enumerate() {
                let i = m * lanes + lane;
                b.x[i] = s[0];
                b.y[i] = s[1];
                b.z[i] = s[2];
            }
        }
        b
    }

    pub fn lane(&self, lane: usize) -> Vec<[f64; 3]> {
        (0..self.n_sites)
            .map(|m| {
                let i = m * self.lanes + lane;
                [self.x[i], self.y[i], self.z[i]]
            })
            .collect()
    }

    /// Σ_m S^x_m for every lane.
    pub fn total_x(&self, out: &mut [f64]) {
        total(&self.x, self.lanes, out)
    }

    pub fn total_z(&self, out: &mut [f64]) {
        total(&self.z, self.lanes, out)
    }

    /// Σ_m S_m · h_m for every lane.
    pub fn dot_per_lane(&self, other: &SpinBatch, out: &mut [f64]) {
        out.fill(0.0);
        for m in 0..self.n_sites {
            let r = m * self.lanes..(m + 1) * self.lanes;
            for (q, o) in out.iter_mut().enumerate() {
                let i = r.start + q;
                *o += self.x[i] * other.x[i] + self.y[i] * other.y[i] + self.z[i] * other.z[i];
            }
        }
    }

    /// max_m | |S_m| - 1 | for every lane.
    pub fn norm_drift(&self, out: &mut [f64]) {
        out.fill(0.0);
        for m in 0..self.n_sites {
            for (q, o) in out.iter_mut().enumerate() {
                let i = m * self.lanes + q;
                let len = (self.x[i] * self.x[i] + self.y[i] * self.y[i] + self.z[i] * self.z[i]).sqrt();
                *o = o.max((len - 1.0).abs());
            }
        }
    }
}

fn total(v: &[f64], lanes: usize, out: &mut [f64]) {
    out.fill(0.0);
    for row in v.chunks_exact(lanes) {
        for (o, x) in out.iter_mut().zip(row) {
            *o += x;
        }
    }
}
