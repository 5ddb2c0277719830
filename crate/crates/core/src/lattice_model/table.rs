use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::geometry::LatticeSpec;
use crate::error::{Error, Result};
use crate::spin::{Spin, SpinKind};

/// Anisotropic coupling triple (J^x, J^y, J^z) for one pair of sites.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Coupling {
    pub const ZERO: Coupling = Coupling { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Coupling { x, y, z }
    }

    pub fn scaled(self, f: f64) -> Self {
        Coupling::new(self.x * f, self.y * f, self.z * f)
    }

    /// J^x² + J^y² + J^z²
    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn is_zero(self) -> bool {
        self.x == 0.0 && self.y == 0.0 && self.z == 0.0
    }
}

/// Energy units the coupling magnitudes are expressed in (ħ = 1 throughout).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Units {
    /// Plain model couplings; times are in inverse coupling units.
    Model,
    /// Multiples of J = g²ħ²/a0³ of a dipolar lattice.
    DipolarJ,
}

impl fmt::Display for Units {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Units::Model => "model",
            Units::DipolarJ => "dipolar_j",
        })
    }
}

impl FromStr for Units {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "model" => Ok(Units::Model),
            "dipolar_j" => Ok(Units::DipolarJ),
            other => Err(Error::InvalidParams(format!("unknown units '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bond {
    pub m: usize,
    pub n: usize,
    pub coupling: Coupling,
}

/// Pair couplings on a periodic lattice, stored once per unordered pair
/// (m < n) and sorted by (m, n).
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingTable {
    spec: LatticeSpec,
    kind: SpinKind,
    units: Units,
    bonds: Vec<Bond>,
}

/// Coupling seen from one site: the partner, its minimum-image displacement
/// and the coupling triple.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub site: usize,
    pub displacement: [i64; 3],
    pub coupling: Coupling,
}

impl CouplingTable {
    /// Builds a table from an arbitrary pair list. Pairs are canonicalised to
    /// m < n; self-couplings and duplicates are rejected.
    pub fn from_pairs(
        spec: LatticeSpec,
        kind: SpinKind,
        units: Units,
        pairs: impl IntoIterator<Item = (usize, usize, Coupling)>,
    ) -> Result<Self> {
        let n_sites = spec.site_count();
        let mut bonds = Vec::new();
        for (a, b, coupling) in pairs {
            if a == b {
                return Err(Error::InvalidParams(format!("self-coupling on site {a}")));
            }
            if a >= n_sites || b >= n_sites {
                return Err(Error::InvalidParams(format!(
                    "pair ({a}, {b}) outside a lattice of {n_sites} sites"
                )));
            }
            if ![coupling.x, coupling.y, coupling.z].iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidParams(format!("non-finite coupling on ({a}, {b})")));
            }
            let (m, n) = if a < b { (a, b) } else { (b, a) };
            bonds.push(Bond { m, n, coupling });
        }
        bonds.sort_by_key(|b| (b.m, b.n));
        if bonds.windows(2).any(|w| (w[0].m, w[0].n) == (w[1].m, w[1].n)) {
            return Err(Error::InvalidParams("duplicate pair".into()));
        }
        Ok(CouplingTable { spec, kind, units, bonds })
    }

    pub(crate) fn from_sorted_bonds(
        spec: LatticeSpec,
        kind: SpinKind,
        units: Units,
        bonds: Vec<Bond>,
    ) -> Self {
        debug_assert!(bonds.windows(2).all(|w| (w[0].m, w[0].n) < (w[1].m, w[1].n)));
        CouplingTable { spec, kind, units, bonds }
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn kind(&self) -> SpinKind {
        self.kind
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn site_count(&self) -> usize {
        self.spec.site_count()
    }

    pub fn is_all_zero(&self) -> bool {
        self.bonds.iter().all(|b| b.coupling.is_zero())
    }

    /// Coupling between two sites, zero when the pair is absent.
    pub fn coupling(&self, a: usize, b: usize) -> Coupling {
        let key = if a < b { (a, b) } else { (b, a) };
        self.bonds
            .binary_search_by_key(&key, |b| (b.m, b.n))
            .map(|i| self.bonds[i].coupling)
            .unwrap_or(Coupling::ZERO)
    }

    /// Neighbor lists for every site, each sorted by displacement so that
    /// sums over neighbors run in the same order on every site.
    pub fn adjacency(&self) -> Vec<Vec<Neighbor>> {
        let mut adj: Vec<Vec<Neighbor>> = vec![Vec::new(); self.site_count()];
        for b in &self.bonds {
            adj[b.m].push(Neighbor {
                site: b.n,
                displacement: self.spec.min_image(b.m, b.n),
                coupling: b.coupling,
            });
            adj[b.n].push(Neighbor {
                site: b.m,
                displacement: self.spec.min_image(b.n, b.m),
                coupling: b.coupling,
            });
        }
        for list in &mut adj {
            list.sort_by_key(|nb| nb.displacement);
        }
        adj
    }

    /// Relabel the spin convention, multiplying every coupling by `factor`.
    pub(crate) fn rescaled(&self, factor: f64, kind: SpinKind) -> Self {
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond { coupling: b.coupling.scaled(factor), ..*b })
            .collect();
        CouplingTable { spec: self.spec.clone(), kind, units: self.units, bonds }
    }

    /// Writes the documented plain-text format:
    ///
    /// ```text
    /// # fidsim coupling table v1
    /// dimensions 12
    /// spin quantum(1/2)
    /// units model
    /// pairs 12
    /// 0 1 -0.41 -0.41 0.82
    /// ```
    ///
    /// followed by one `m n Jx Jy Jz` line per pair, m < n, sorted. Numbers
    /// are printed in shortest round-trip form so parsing is bit-exact.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::with_capacity(64 + 48 * self.bonds.len());
        out.push_str(TEXT_MAGIC);
        out.push('\n');
        let dims: Vec<String> = self.spec.dims().iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "dimensions {}", dims.join(" "));
        let _ = writeln!(out, "spin {}", self.kind);
        let _ = writeln!(out, "units {}", self.units);
        let _ = writeln!(out, "pairs {}", self.bonds.len());
        for b in &self.bonds {
            let c = b.coupling;
            let _ = writeln!(out, "{} {} {:?} {:?} {:?}", b.m, b.n, c.x, c.y, c.z);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, &str)> {
            lines
                .next()
                .map(|(i, l)| (i + 1, l))
                .ok_or_else(|| Error::Parse { line: 0, msg: format!("missing {what}") })
        };
        let (line, magic) = next("header")?;
        if magic.trim() != TEXT_MAGIC {
            return Err(Error::Parse { line, msg: "not a coupling table".into() });
        }
        let (line, dims) = next("dimensions")?;
        let dims: Vec<usize> = header_value(line, dims, "dimensions")?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse { line, msg: format!("bad extent '{t}'") }))
            .collect::<Result<_>>()?;
        let spec = LatticeSpec::new(&dims)?;
        let (line, spin) = next("spin")?;
        let kind: SpinKind = header_value(line, spin, "spin")?.parse()?;
        let (line, units) = next("units")?;
        let units: Units = header_value(line, units, "units")?.parse()?;
        let (line, count) = next("pairs")?;
        let count: usize = header_value(line, count, "pairs")?
            .parse()
            .map_err(|_| Error::Parse { line, msg: "bad pair count".into() })?;

        let mut pairs = Vec::with_capacity(count);
        for (i, l) in lines {
            let line = i + 1;
            if l.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(Error::Parse { line, msg: "expected 'm n Jx Jy Jz'".into() });
            }
            let idx = |t: &str| -> Result<usize> {
                t.parse().map_err(|_| Error::Parse { line, msg: format!("bad site index '{t}'") })
            };
            let num = |t: &str| -> Result<f64> {
                t.parse().map_err(|_| Error::Parse { line, msg: format!("bad coupling '{t}'") })
            };
            pairs.push((
                idx(fields[0])?,
                idx(fields[1])?,
                Coupling::new(num(fields[2])?, num(fields[3])?, num(fields[4])?),
            ));
        }
        if pairs.len() != count {
            return Err(Error::Parse {
                line: 0,
                msg: format!("header announces {count} pairs, found {}", pairs.len()),
            });
        }
        CouplingTable::from_pairs(spec, kind, units, pairs)
    }

    /// SHA-256 of the text serialization, hex encoded.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    /// Checks that the coupling depends only on the minimum-image
    /// displacement, by comparing every site's neighbor list against site 0.
    pub fn is_translation_invariant(&self) -> bool {
        let adj = self.adjacency();
        let reference: Vec<([i64; 3], Coupling)> =
            adj[0].iter().map(|nb| (nb.displacement, nb.coupling)).collect();
        adj.iter().all(|list| {
            list.len() == reference.len()
                && list
                    .iter()
                    .zip(&reference)
                    .all(|(nb, (d, c))| nb.displacement == *d && nb.coupling == *c)
        })
    }

    pub(crate) fn require_kind(&self, expected: SpinKind) -> Result<()> {
        if self.kind != expected {
            return Err(Error::SpinTagMismatch {
                expected: expected.to_string(),
                found: self.kind.to_string(),
            });
        }
        Ok(())
    }

    pub(crate) fn require_classical(&self) -> Result<()> {
        self.require_kind(SpinKind::Classical)
    }

    pub(crate) fn quantum_spin(&self) -> Result<Spin> {
        match self.kind {
            SpinKind::Quantum(s) => Ok(s),
            SpinKind::Classical => Err(Error::SpinTagMismatch {
                expected: "quantum(S)".into(),
                found: "classical".into(),
            }),
        }
    }
}

const TEXT_MAGIC: &str = "# fidsim coupling table v1";

fn header_value<'a>(line: usize, text: &'a str, key: &str) -> Result<&'a str> {
    text.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .map(str::trim)
        .ok_or_else(|| Error::Parse { line, msg: format!("expected '{key} ...'") })
}
