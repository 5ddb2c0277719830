//! Named configurations for the systems of the CaF₂, chain and square-lattice
//! studies.

use fidsim_core::{FieldDirection, Spin};

use crate::config::{CouplingSource, ExperimentConfig, KindName, Method};

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset { name: "caf2-100", summary: "CaF2 19F FID, field along [100]: classical dipolar 9x9x9" },
    Preset { name: "caf2-110", summary: "CaF2 19F FID, field along [110]: classical dipolar 9x9x9" },
    Preset { name: "caf2-111", summary: "CaF2 19F FID, field along [111]: classical dipolar 9x9x9" },
    Preset { name: "chain12-s1/2", summary: "12-spin chain, S = 1/2, J = (-0.41, -0.41, 0.82)/sqrt(S(S+1))" },
    Preset { name: "chain12-s1", summary: "12-spin chain, S = 1, J = (-0.41, -0.41, 0.82)/sqrt(S(S+1))" },
    Preset { name: "chain9-s5/2", summary: "9-spin chain, S = 5/2, J = (-0.41, -0.41, 0.82)/sqrt(S(S+1))" },
    Preset { name: "chain12-classical", summary: "12-spin classical chain, J = (-0.41, -0.41, 0.82)" },
    Preset { name: "chain9-classical", summary: "9-spin classical chain, J = (-0.41, -0.41, 0.82)" },
    Preset { name: "square5-a", summary: "5x5 square lattice, S = 1/2, J = (-0.41, -0.41, 0.82)/sqrt(3/4)" },
    Preset { name: "square5-b", summary: "5x5 square lattice, S = 1/2, J = (0, -1, 1)/sqrt(3/4)" },
    Preset { name: "square5-a-classical", summary: "5x5 classical square lattice, J = (-0.41, -0.41, 0.82)" },
    Preset { name: "square5-b-classical", summary: "5x5 classical square lattice, J = (0, -1, 1)" },
];

const FIG2: [f64; 3] = [-0.41, -0.41, 0.82];
const SQUARE_B: [f64; 3] = [0.0, -1.0, 1.0];

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let mut c = ExperimentConfig { preset: Some(name.to_string()), ..Default::default() };
    let quantum = |c: &mut ExperimentConfig, s: Spin, samples: usize| {
        c.spin.kind = KindName::Quantum;
        c.spin.s = s;
        c.run.method = Some(Method::Typicality);
        c.run.samples = samples;
    };
    match name {
        "caf2-100" | "caf2-110" | "caf2-111" => {
            c.lattice.dims = vec![9, 9, 9];
            c.couplings.source = CouplingSource::Dipolar;
            c.couplings.direction = name[5..].parse::<FieldDirection>().ok()?;
            c.run.realizations = 2000;
            // RK4 at dt = 0.05 drifts by up to ~1e-3 on dipolar lattices
            c.run.norm_tolerance = 1e-2;
            c.run.energy_tolerance = 1e-2;
        }
        "chain12-s1/2" => quantum(&mut c, Spin::HALF, 16),
        "chain12-s1" => quantum(&mut c, Spin::ONE, 2),
        "chain9-s5/2" => {
            c.lattice.dims = vec![9];
            quantum(&mut c, Spin::FIVE_HALVES, 1);
        }
        "chain12-classical" => c.run.realizations = 10_000,
        "chain9-classical" => {
            c.lattice.dims = vec![9];
            c.run.realizations = 10_000;
        }
        "square5-a" | "square5-b" | "square5-a-classical" | "square5-b-classical" => {
            c.lattice.dims = vec![5, 5];
            c.couplings.values = if name.starts_with("square5-a") { FIG2 } else { SQUARE_B };
            // four neighbours give a stronger local field than the chain; keep dt/τ comparable
            c.run.dt = 0.025;
            if name.ends_with("classical") {
                c.run.realizations = 10_000;
            } else {
                quantum(&mut c, Spin::HALF, 1);
            }
        }
        _ => return None,
    }
    Some(c)
}
