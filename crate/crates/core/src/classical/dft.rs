//! Small-size DFTs along the axes of a periodic lattice, vectorized over a
//! batch of independent lanes. Data layout is `[site][lane]` with sites in
//! row-major order, real and imaginary parts held in separate arrays.

use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    /// e^{-2πi jk/L}
    Forward,
    /// e^{+2πi jk/L}, unscaled
    Inverse,
}

#[derive(Clone, Debug)]
struct AxisPlan {
    len: usize,
    /// distance between consecutive points of a line, in sites
    stride: usize,
    /// first site of every line along this axis
    line_starts: Vec<usize>,
    /// cos(2π m/L), sin(2π m/L) for m in 0..L
    cos: Vec<f64>,
    sin: Vec<f64>,
}

#[derive(Clone, Debug)]
pub(crate) struct Dft3 {
    n_sites: usize,
    axes: Vec<AxisPlan>,
}

/// Work buffers for one line: gathered input and paired sums.
#[derive(Clone, Debug, Default)]
pub(crate) struct LineScratch {
    in_re: Vec<f64>,
    in_im: Vec<f64>,
    sum_re: Vec<f64>,
    sum_im: Vec<f64>,
    dif_re: Vec<f64>,
    dif_im: Vec<f64>,
    acc: [Vec<f64>; 4],
}

impl Dft3 {
    pub fn new(dims: [usize; 3]) -> Self {
        let n_sites = dims.iter().product();
        let strides = [dims[1] * dims[2], dims[2], 1];
        let mut axes = Vec::new();
        for a in 0..3 {
            let len = dims[a];
            if len < 2 {
                continue;
            }
            let line_starts = (0..n_sites)
                .filter(|&s| (s / strides[a]) % len == 0)
                .collect();
            let angle = |m: usize| 2.0 * PI * m as f64 / len as f64;
            axes.push(AxisPlan {
                len,
                stride: strides[a],
                line_starts,
                cos: (0..len).map(|m| angle(m).cos()).collect(),
                sin: (0..len).map(|m| angle(m).sin()).collect(),
            });
        }
        Dft3 { n_sites, axes }
    }

    /// In-place multidimensional DFT of `lanes` interleaved transforms.
    pub fn transform(
        &self,
        re: &mut [f64],
        im: &mut [f64],
        lanes: usize,
        dir: Direction,
        scratch: &mut LineScratch,
    ) {
        debug_assert_eq!(re.len(), self.n_sites * lanes);
        for axis in &self.axes {
            scratch.ensure(axis.len, lanes);
            for &start in &axis.line_starts {
                transform_line(axis, start, re, im, lanes, dir, scratch);
            }
        }
    }
}

impl LineScratch {
    fn ensure(&mut self, len: usize, lanes: usize) {
        let n = len * lanes;
        for v in [&mut self.in_re, &mut self.in_im, &mut self.sum_re, &mut self.sum_im, &mut self.dif_re, &mut self.dif_im] {
            if v.len() < n {
                v.resize(n, 0.0);
            }
        }
        for v in &mut self.acc {
            if v.len() < lanes {
                v.resize(lanes, 0.0);
            }
        }
    }
}

/// One line of length L. Pairs x_j with x_{L-j} so that each output pair
/// (k, L-k) shares a cosine sum and a sine sum.
fn transform_line(
    axis: &AxisPlan,
    start: usize,
    re: &mut [f64],
    im: &mut [f64],
    p: usize,
    dir: Direction,
    s: &mut LineScratch,
) {
    let len = axis.len;
    let half = (len - 1) / 2;
    let mid = (len % 2 == 0).then_some(len / 2);
    let at = |j: usize| (start + j * axis.stride) * p;

    for j in 0..len {
        let src = at(j);
        s.in_re[j * p..(j + 1) * p].copy_from_slice(&re[src..src + p]);
        s.in_im[j * p..(j + 1) * p].copy_from_slice(&im[src..src + p]);
    }
    for j in 1..=half {
        for q in 0..p {
            let (ar, ai) = (s.in_re[j * p + q], s.in_im[j * p + q]);
            let (br, bi) = (s.in_re[(len - j) * p + q], s.in_im[(len - j) * p + q]);
            s.sum_re[j * p + q] = ar + br;
            s.sum_im[j * p + q] = ai + bi;
            s.dif_re[j * p + q] = ar - br;
            s.dif_im[j * p + q] = ai - bi;
        }
    }

    // k = 0
    {
        let [r0, i0, _, _] = &mut s.acc;
        r0[..p].copy_from_slice(&s.in_re[..p]);
        i0[..p].copy_from_slice(&s.in_im[..p]);
        for j in 1..=half {
            for q in 0..p {
                r0[q] += s.sum_re[j * p + q];
                i0[q] += s.sum_im[j * p + q];
            }
        }
        if let Some(m) = mid {
            for q in 0..p {
                r0[q] += s.in_re[m * p + q];
                i0[q] += s.in_im[m * p + q];
            }
        }
        let dst = at(0);
        re[dst..dst + p].copy_from_slice(&r0[..p]);
        im[dst..dst + p].copy_from_slice(&i0[..p]);
    }

    for k in 1..=half {
        let [cr, ci, sr, si] = &mut s.acc;
        cr[..p].copy_from_slice(&s.in_re[..p]);
        ci[..p].copy_from_slice(&s.in_im[..p]);
        sr[..p].fill(0.0);
        si[..p].fill(0.0);
        for j in 1..=half {
            let c = axis.cos[(j * k) % len];
            let sn = axis.sin[(j * k) % len];
            for q in 0..p {
                cr[q] += c * s.sum_re[j * p + q];
                ci[q] += c * s.sum_im[j * p + q];
                sr[q] += sn * s.dif_re[j * p + q];
                si[q] += sn * s.dif_im[j * p + q];
            }
        }
        if let Some(m) = mid {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            for q in 0..p {
                cr[q] += sign * s.in_re[m * p + q];
                ci[q] += sign * s.in_im[m * p + q];
            }
        }
        // Forward: y_k = C - i·S, y_{L-k} = C + i·S; inverse swaps the two.
        let (lo, hi) = match dir {
            Direction::Forward => (at(k), at(len - k)),
            Direction::Inverse => (at(len - k), at(k)),
        };
        for q in 0..p {
            re[lo + q] = cr[q] + si[q];
            im[lo + q] = ci[q] - sr[q];
            re[hi + q] = cr[q] - si[q];
            im[hi + q] = ci[q] + sr[q];
        }
    }

    if let Some(m) = mid {
        let [r, i, _, _] = &mut s.acc;
        for q in 0..p {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            r[q] = s.in_re[q] + sign * s.in_re[m * p + q];
            i[q] = s.in_im[q] + sign * s.in_im[m * p + q];
        }
        for j in 1..=half {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            for q in 0..p {
                r[q] += sign * s.sum_re[j * p + q];
                i[q] += sign * s.sum_im[j * p + q];
            }
        }
        let dst = at(m);
        re[dst..dst + p].copy_from_slice(&r[..p]);
        im[dst..dst + p].copy_from_slice(&i[..p]);
    }
}
