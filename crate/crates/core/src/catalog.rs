//! Named state families and witness selectors, as used on the command line.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{self, DensityOperator};
use crate::witnesses::{self, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Isotropic,
    Epsilon,
    Horodecki3x3,
    Horodecki2x4,
    Gamma,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Isotropic,
        Family::Epsilon,
        Family::Horodecki3x3,
        Family::Horodecki2x4,
        Family::Gamma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Isotropic => "isotropic",
            Family::Epsilon => "epsilon",
            Family::Horodecki3x3 => "horodecki3x3",
            Family::Horodecki2x4 => "horodecki2x4",
            Family::Gamma => "gamma",
        }
    }

    /// Whether the family takes a local dimension (`m` or `d`).
    pub fn has_dimension(self) -> bool {
        matches!(self, Family::Isotropic | Family::Gamma)
    }

    pub fn default_dimension(self) -> usize {
        match self {
            Family::Isotropic | Family::Epsilon | Family::Horodecki3x3 | Family::Gamma => 3,
            Family::Horodecki2x4 => 2,
        }
    }

    /// Whether `p` lies in the family's parameter domain.
    pub fn accepts(self, p: f64) -> bool {
        match self {
            Family::Isotropic => (0.0..=1.0).contains(&p),
            Family::Epsilon | Family::Gamma => p > 0.0 && p.is_finite(),
            Family::Horodecki3x3 | Family::Horodecki2x4 => p > 0.0 && p < 1.0,
        }
    }

    pub fn state(self, dim: usize, p: f64) -> Result<DensityOperator> {
        match self {
            Family::Isotropic => states::isotropic_state(dim, p),
            Family::Epsilon => states::epsilon_state(p),
            Family::Horodecki3x3 => states::horodecki_3x3(p),
            Family::Horodecki2x4 => states::horodecki_2x4(p),
            Family::Gamma => states::gamma_state(dim, p),
        }
    }

    /// Witness used when none is given explicitly.
    pub fn default_witness(self) -> Option<WitnessSpec> {
        match self {
            Family::Isotropic => Some(WitnessSpec::Iso(1)),
            Family::Epsilon => Some(WitnessSpec::ChoiAuto),
            Family::Horodecki3x3 => Some(WitnessSpec::SixiaYu(None)),
            Family::Horodecki2x4 => None,
            Family::Gamma => Some(WitnessSpec::WdkMax),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Parse(format!("unknown family {s:?}")))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Witness selector. Dimension-dependent witnesses take the local
/// dimension at build time; `ChoiAuto` and `SixiaYu(None)` follow the
/// family parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum WitnessSpec {
    Flip,
    Iso(usize),
    Choi(u8),
    /// `choi1` below `eps = 1`, `choi2` from `eps = 1` on.
    ChoiAuto,
    Wdk(usize),
    /// `W_{d,d-2}`.
    WdkMax,
    SixiaYu(Option<f64>),
    Tang(f64),
}

impl WitnessSpec {
    pub fn depends_on_param(&self) -> bool {
        matches!(self, WitnessSpec::ChoiAuto | WitnessSpec::SixiaYu(None))
    }

    pub fn build(&self, dim: usize, param: Option<f64>) -> Result<Witness> {
        let need = |p: Option<f64>| {
            p.ok_or_else(|| Error::Parse(format!("witness {self} needs a parameter")))
        };
        match self {
            WitnessSpec::Flip => witnesses::flip_witness(dim),
            WitnessSpec::Iso(k) => witnesses::iso_witness(dim, *k),
            WitnessSpec::Choi(v) => witnesses::choi_witness(*v),
            WitnessSpec::ChoiAuto => {
                witnesses::choi_witness(if need(param)? < 1.0 { 1 } else { 2 })
            }
            WitnessSpec::Wdk(k) => witnesses::wdk_witness(dim, *k),
            WitnessSpec::WdkMax => witnesses::wdk_witness(dim, dim.saturating_sub(2)),
            WitnessSpec::SixiaYu(Some(a)) => witnesses::sixia_yu_witness(*a),
            WitnessSpec::SixiaYu(None) => witnesses::sixia_yu_witness(need(param)?),
            WitnessSpec::Tang(u) => witnesses::tang_witness(*u),
        }
    }

    /// Short form usable inside a CSV column name.
    pub fn column_tag(&self) -> String {
        self.to_string().replace([':', '-'], "")
    }
}

impl FromStr for WitnessSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let bad = || Error::Parse(format!("bad witness selector {s:?}"));
        let int = |a: Option<&str>| a.ok_or_else(bad)?.parse::<usize>().map_err(|_| bad());
        let real = |a: &str| a.parse::<f64>().map_err(|_| bad());
        Ok(match (head, arg) {
            ("flip", None) => WitnessSpec::Flip,
            ("iso", a) => WitnessSpec::Iso(int(a)?),
            ("choi1", None) => WitnessSpec::Choi(1),
            ("choi2", None) => WitnessSpec::Choi(2),
            ("choi", None) => WitnessSpec::ChoiAuto,
            ("wdk", Some("max")) => WitnessSpec::WdkMax,
            ("wdk", a) => WitnessSpec::Wdk(int(a)?),
            ("sixia-yu", None) => WitnessSpec::SixiaYu(None),
            ("sixia-yu", Some(a)) => WitnessSpec::SixiaYu(Some(real(a)?)),
            ("tang", Some(a)) => WitnessSpec::Tang(real(a)?),
            _ => return Err(bad()),
        })
    }
}

impl fmt::Display for WitnessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessSpec::Flip => write!(f, "flip"),
            WitnessSpec::Iso(k) => write!(f, "iso:{k}"),
            WitnessSpec::Choi(v) => write!(f, "choi{v}"),
            WitnessSpec::ChoiAuto => write!(f, "choi"),
            WitnessSpec::Wdk(k) => write!(f, "wdk:{k}"),
            WitnessSpec::WdkMax => write!(f, "wdk:max"),
            WitnessSpec::SixiaYu(None) => write!(f, "sixia-yu"),
            WitnessSpec::SixiaYu(Some(a)) => write!(f, "sixia-yu:{a}"),
            WitnessSpec::Tang(u) => write!(f, "tang:{u}"),
        }
    }
}
