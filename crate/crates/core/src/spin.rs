use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A spin quantum number S, stored as the integer 2S so that half-integers
/// are exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub const HALF: Spin = Spin { twice: 1 };
    pub const ONE: Spin = Spin { twice: 2 };
    pub const FIVE_HALVES: Spin = Spin { twice: 5 };

    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(Error::InvalidSpin("S must be positive".into()));
        }
        Ok(Spin { twice })
    }

    /// Accepts any positive multiple of 1/2.
    pub fn from_f64(s: f64) -> Result<Self> {
        let twice = 2.0 * s;
        if !(twice.is_finite() && twice >= 1.0 && (twice - twice.round()).abs() < 1e-12) {
            return Err(Error::InvalidSpin(format!("{s} is not a positive half-integer")));
        }
        Spin::from_twice(twice.round() as u32)
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    /// S(S+1)
    pub fn casimir(self) -> f64 {
        let s = self.value();
        s * (s + 1.0)
    }

    /// Local Hilbert-space dimension 2S+1.
    pub fn local_dim(self) -> usize {
        self.twice as usize + 1
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for Spin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: u32 = num
                .trim()
                .parse()
                .map_err(|_| Error::InvalidSpin(format!("cannot parse '{s}'")))?;
            return match den.trim() {
                "2" => Spin::from_twice(num),
                "1" => Spin::from_twice(2 * num),
                _ => Err(Error::InvalidSpin(format!("'{s}' is not a half-integer"))),
            };
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::InvalidSpin(format!("cannot parse '{s}'")))?;
        Spin::from_f64(v)
    }
}

impl TryFrom<String> for Spin {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Spin> for String {
    fn from(s: Spin) -> String {
        s.to_string()
    }
}

/// Which convention the coupling magnitudes of a table follow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpinKind {
    /// Unit-length classical vectors.
    Classical,
    Quantum(Spin),
}

impl SpinKind {
    /// Infinite-temperature ⟨(S^α)²⟩ for a single site.
    pub fn mean_square_component(self) -> f64 {
        match self {
            SpinKind::Classical => 1.0 / 3.0,
            SpinKind::Quantum(s) => s.casimir() / 3.0,
        }
    }
}

impl fmt::Display for SpinKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpinKind::Classical => f.write_str("classical"),
            SpinKind::Quantum(s) => write!(f, "quantum({s})"),
        }
    }
}

impl FromStr for SpinKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "classical" {
            return Ok(SpinKind::Classical);
        }
        if let Some(inner) = s.strip_prefix("quantum(").and_then(|r| r.strip_suffix(')')) {
            return Ok(SpinKind::Quantum(inner.parse()?));
        }
        Err(Error::InvalidSpin(format!("unknown spin tag '{s}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!("1/2".parse::<Spin>().unwrap(), Spin::HALF);
        assert_eq!("0.5".parse::<Spin>().unwrap(), Spin::HALF);
        assert_eq!("5/2".parse::<Spin>().unwrap(), Spin::FIVE_HALVES);
        assert_eq!("1".parse::<Spin>().unwrap(), Spin::ONE);
        assert!("0".parse::<Spin>().is_err());
        assert!("-1/2".parse::<Spin>().is_err());
        assert!("1/3".parse::<Spin>().is_err());
        assert!("0.3".parse::<Spin>().is_err());
    }

    #[test]
    fn casimir_values() {
        assert_eq!(Spin::HALF.casimir(), 0.75);
        assert_eq!(Spin::ONE.casimir(), 2.0);
        assert_eq!(Spin::FIVE_HALVES.casimir(), 35.0 / 4.0);
        assert_eq!(Spin::FIVE_HALVES.local_dim(), 6);
    }

    #[test]
    fn kind_round_trips_through_text() {
        for kind in [SpinKind::Classical, SpinKind::Quantum(Spin::HALF), SpinKind::Quantum(Spin::ONE)] {
            assert_eq!(kind.to_string().parse::<SpinKind>().unwrap(), kind);
        }
    }
}
