use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::geometry::LatticeSpec;
use super::table::{Bond, Coupling, CouplingTable, Units};
use crate::error::{Error, Result};
use crate::spin::{Spin, SpinKind};

/// Nearest-neighbor couplings on a periodic lattice. An axis of extent 2
/// contributes a single bond per site pair, not a doubled one.
pub fn build_nearest_neighbor(
    spec: &LatticeSpec,
    coupling: Coupling,
    kind: SpinKind,
) -> Result<CouplingTable> {
    let mut pairs = Vec::new();
    for m in 0..spec.site_count() {
        for (axis, &extent) in spec.dims().iter().enumerate() {
            if extent < 2 {
                continue;
            }
            let mut delta = [0i64; 3];
            delta[axis] = 1;
            let n = spec.shifted(m, delta);
            pairs.push(if m < n { (m, n) } else { (n, m) });
        }
    }
    if pairs.is_empty() {
        return Err(Error::InvalidLattice("lattice has no neighbor pairs".into()));
    }
    pairs.sort_unstable();
    pairs.dedup();
    CouplingTable::from_pairs(
        spec.clone(),
        kind,
        Units::Model,
        pairs.into_iter().map(|(m, n)| (m, n, coupling)),
    )
}

/// Orientation of the external field relative to the cubic crystal axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldDirection {
    #[serde(rename = "100")]
    D100,
    #[serde(rename = "110")]
    D110,
    #[serde(rename = "111")]
    D111,
}

impl FieldDirection {
    pub const ALL: [FieldDirection; 3] = [FieldDirection::D100, FieldDirection::D110, FieldDirection::D111];

    pub fn unit_vector(self) -> [f64; 3] {
        match self {
            FieldDirection::D100 => [1.0, 0.0, 0.0],
            FieldDirection::D110 => {
                let c = std::f64::consts::FRAC_1_SQRT_2;
                [c, c, 0.0]
            }
            FieldDirection::D111 => {
                let c = 1.0 / 3f64.sqrt();
                [c, c, c]
            }
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FieldDirection::D100 => "100",
            FieldDirection::D110 => "110",
            FieldDirection::D111 => "111",
        }
    }
}

impl fmt::Display for FieldDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.label())
    }
}

impl FromStr for FieldDirection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_start_matches('[').trim_end_matches(']') {
            "100" => Ok(FieldDirection::D100),
            "110" => Ok(FieldDirection::D110),
            "111" => Ok(FieldDirection::D111),
            other => Err(Error::InvalidParams(format!("unknown field direction '{other}'"))),
        }
    }
}

/// Physical constants fixing the dipolar energy unit J = g²ħ²/a0³.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DipolarConstants {
    /// Gyromagnetic ratio in rad s⁻¹ Oe⁻¹.
    pub gyromagnetic_ratio: f64,
    /// Lattice period in Å.
    pub lattice_period_angstrom: f64,
}

/// ħ in erg·s (CGS).
pub const HBAR_ERG_S: f64 = 1.054_571_817e-27;

impl DipolarConstants {
    /// ¹⁹F in CaF₂.
    pub const CAF2: DipolarConstants =
        DipolarConstants { gyromagnetic_ratio: 25_166.2, lattice_period_angstrom: 2.72 };

    pub fn new(gyromagnetic_ratio: f64, lattice_period_angstrom: f64) -> Result<Self> {
        if !(gyromagnetic_ratio > 0.0 && lattice_period_angstrom > 0.0) {
            return Err(Error::InvalidParams(
                "gyromagnetic ratio and lattice period must be positive".into(),
            ));
        }
        Ok(DipolarConstants { gyromagnetic_ratio, lattice_period_angstrom })
    }

    /// J/ħ = g²ħ/a0³ in s⁻¹.
    pub fn rate_per_second(&self) -> f64 {
        let a0_cm = self.lattice_period_angstrom * 1e-8;
        self.gyromagnetic_ratio.powi(2) * HBAR_ERG_S / a0_cm.powi(3)
    }

    /// J/ħ in ms⁻¹, the factor converting rates in J units to 1/ms.
    pub fn rate_per_ms(&self) -> f64 {
        self.rate_per_second() * 1e-3
    }
}

/// Truncated dipolar couplings between every pair of sites, using the
/// minimum-image displacement, in units of J = g²ħ²/a0³:
/// J^z = (1 − 3cos²θ)/r³ and J^x = J^y = −J^z/2.
///
/// Every extent must be odd and at least 3 so that the minimum image is
/// unique.
pub fn build_dipolar_couplings(
    spec: &LatticeSpec,
    direction: FieldDirection,
    kind: SpinKind,
) -> Result<CouplingTable> {
    if spec.n_axes() != 3 {
        return Err(Error::InvalidLattice("dipolar lattices must be three-dimensional".into()));
    }
    if spec.dims().iter().any(|&l| l < 3) {
        return Err(Error::InvalidLattice("dipolar lattices need every extent >= 3".into()));
    }
    if !spec.all_odd() {
        return Err(Error::InvalidLattice(
            "dipolar lattices need odd extents (even extents make the minimum image ambiguous)"
                .into(),
        ));
    }

    let dims = spec.dims3();
    let b = direction.unit_vector();
    // Coupling per displacement, indexed by the displacement's site on a
    // lattice anchored at the origin.
    let kernel: Vec<Coupling> = (0..spec.site_count())
        .map(|s| {
            if s == 0 {
                return Coupling::ZERO;
            }
            dipolar_coupling(spec.min_image(0, s), b)
        })
        .collect();

    let n_sites = spec.site_count();
    let mut bonds = Vec::with_capacity(n_sites * (n_sites - 1) / 2);
    for m in 0..n_sites {
        let cm = spec.coords(m);
        for n in (m + 1)..n_sites {
            let cn = spec.coords(n);
            let mut rel = [0usize; 3];
            for a in 0..3 {
                rel[a] = (cn[a] + dims[a] - cm[a]) % dims[a];
            }
            bonds.push(Bond { m, n, coupling: kernel[spec.site(rel)] });
        }
    }
    Ok(CouplingTable::from_sorted_bonds(spec.clone(), kind, Units::DipolarJ, bonds))
}

/// Truncated dipolar coupling for one displacement (in lattice periods).
pub fn dipolar_coupling(displacement: [i64; 3], field: [f64; 3]) -> Coupling {
    let r = displacement.map(|x| x as f64);
    let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    let dot = r[0] * field[0] + r[1] * field[1] + r[2] * field[2];
    let cos2 = dot * dot / r2;
    let jz = (1.0 - 3.0 * cos2) / (r2 * r2.sqrt());
    Coupling::new(-0.5 * jz, -0.5 * jz, jz)
}

/// Converts a quantum spin-S table to the classical table with the same
/// characteristic time, multiplying every coupling by √(S(S+1)).
pub fn rescale_for_classical(table: &CouplingTable, spin: Spin) -> Result<CouplingTable> {
    table.require_kind(SpinKind::Quantum(spin))?;
    Ok(table.rescaled(spin.casimir().sqrt(), SpinKind::Classical))
}

/// Inverse of [`rescale_for_classical`]: divides classical couplings by
/// √(S(S+1)) and tags the result quantum(S).
pub fn rescale_for_quantum(table: &CouplingTable, spin: Spin) -> Result<CouplingTable> {
    table.require_classical()?;
    Ok(table.rescaled(1.0 / spin.casimir().sqrt(), SpinKind::Quantum(spin)))
}
