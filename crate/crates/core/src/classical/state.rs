use rand::Rng;

use super::batch::SpinBatch;
use super::field::FieldSolver;
use super::integrator::{rk4_step_batch, Rk4Work};
use crate::error::{Error, Result};
use crate::lattice_model::CouplingTable;

/// N classical spins of unit length.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalSpinState {
    spins: Vec<[f64; 3]>,
}

impl ClassicalSpinState {
    /// Rejects vectors whose length differs from 1 by more than 1e-12.
    pub fn new(spins: Vec<[f64; 3]>) -> Result<Self> {
        if spins.is_empty() {
            return Err(Error::InvalidParams("a state needs at least one spin".into()));
        }
        for (m, s) in spins.iter().enumerate() {
            let len = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
            if !((len - 1.0).abs() <= 1e-12) {
                return Err(Error::InvalidParams(format!("spin {m} has length {len}")));
            }
        }
        Ok(ClassicalSpinState { spins })
    }

    /// All spins along +z.
    pub fn polarized_z(n: usize) -> Self {
        ClassicalSpinState { spins: vec![[0.0, 0.0, 1.0]; n] }
    }

    pub fn spins(&self) -> &[[f64; 3]] {
        &self.spins
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    /// Total moment (M_x, M_y, M_z).
    pub fn magnetization(&self) -> [f64; 3] {
        self.spins.iter().fold([0.0; 3], |a, s| [a[0] + s[0], a[1] + s[1], a[2] + s[2]])
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.spins
            .iter()
            .map(|s| ((s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Independent spins, each uniform on the unit sphere.
pub fn sample_random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ClassicalSpinState {
    let spins = (0..n).map(|_| random_unit_vector(rng)).collect();
    ClassicalSpinState { spins }
}

pub(crate) fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let phi: f64 = std::f64::consts::TAU * rng.random::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    let (s, c) = phi.sin_cos();
    [r * c, r * s, z]
}

/// h_m = Σ_n (J^x_{mn} S^x_n, J^y_{mn} S^y_n, J^z_{mn} S^z_n).
pub fn local_field(state: &ClassicalSpinState, table: &CouplingTable, m: usize) -> Result<[f64; 3]> {
    table.require_classical()?;
    check_size(state, table)?;
    let mut h = [0.0; 3];
    for b in table.bonds() {
        let other = if b.m == m {
            b.n
        } else if b.n == m {
            b.m
        } else {
            continue;
        };
        let s = state.spins[other];
        h[0] += b.coupling.x * s[0];
        h[1] += b.coupling.y * s[1];
        h[2] += b.coupling.z * s[2];
    }
    Ok(h)
}

/// Classical value of H = Σ_{m<n} J^x S^x_m S^x_n + J^y S^y_m S^y_n + J^z S^z_m S^z_n.
pub fn energy(state: &ClassicalSpinState, table: &CouplingTable) -> Result<f64> {
    table.require_classical()?;
    check_size(state, table)?;
    Ok(table
        .bonds()
        .iter()
        .map(|b| {
            let (a, c) = (state.spins[b.m], state.spins[b.n]);
            b.coupling.x * a[0] * c[0] + b.coupling.y * a[1] * c[1] + b.coupling.z * a[2] * c[2]
        })
        .sum())
}

/// Reusable RK4 integrator for single configurations of one table.
#[derive(Clone, Debug)]
pub struct ClassicalIntegrator {
    solver: FieldSolver,
    n_sites: usize,
}

impl ClassicalIntegrator {
    pub fn new(table: &CouplingTable) -> Result<Self> {
        table.require_classical()?;
        Ok(ClassicalIntegrator { solver: FieldSolver::for_table(table), n_sites: table.site_count() })
    }

    /// Forces the explicit neighbor-sum field route.
    pub fn with_sparse_fields(table: &CouplingTable) -> Result<Self> {
        table.require_classical()?;
        Ok(ClassicalIntegrator { solver: FieldSolver::sparse(table), n_sites: table.site_count() })
    }

    /// Forces the convolution field route; fails for tables that are not
    /// translation invariant.
    pub fn with_convolution_fields(table: &CouplingTable) -> Result<Self> {
        table.require_classical()?;
        Ok(ClassicalIntegrator { solver: FieldSolver::convolution(table)?, n_sites: table.site_count() })
    }

    pub fn uses_convolution(&self) -> bool {
        matches!(self.solver, FieldSolver::Convolution(_))
    }

    /// Local fields on every site.
    pub fn fields(&self, state: &ClassicalSpinState) -> Result<Vec<[f64; 3]>> {
        self.check(state)?;
        let s = SpinBatch::from_states(std::slice::from_ref(&state.spins));
        let mut h = SpinBatch::zeros(self.n_sites, 1);
        self.solver.fields(&s, &mut h, &mut Default::default());
        Ok(h.lane(0))
    }

    /// Advances `steps` RK4 steps in place.
    pub fn advance(&self, state: &mut ClassicalSpinState, dt: f64, steps: usize) -> Result<()> {
        self.check(state)?;
        let mut s = SpinBatch::from_states(std::slice::from_ref(&state.spins));
        let mut work = Rk4Work::new(self.n_sites, 1);
        for _ in 0..steps {
            rk4_step_batch(&self.solver, &mut s, dt, &mut work);
        }
        state.spins = s.lane(0);
        Ok(())
    }

    fn check(&self, state: &ClassicalSpinState) -> Result<()> {
        if state.len() != self.n_sites {
            return Err(Error::DimensionMismatch { expected: self.n_sites, found: state.len() });
        }
        Ok(())
    }
}

/// One RK4 step of dS_m/dt = S_m × h_m. Builds a fresh integrator; use
/// [`ClassicalIntegrator`] to take many steps.
pub fn rk4_step(state: &ClassicalSpinState, table: &CouplingTable, dt: f64) -> Result<ClassicalSpinState> {
    let integ = ClassicalIntegrator::new(table)?;
    let mut out = state.clone();
    integ.advance(&mut out, dt, 1)?;
    Ok(out)
}

fn check_size(state: &ClassicalSpinState, table: &CouplingTable) -> Result<()> {
    if state.len() != table.site_count() {
        return Err(Error::DimensionMismatch { expected: table.site_count(), found: state.len() });
    }
    Ok(())
}
