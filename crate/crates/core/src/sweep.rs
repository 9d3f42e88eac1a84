//! Parameter sweeps over a state family, producing one CSV row per grid
//! point. Grid points are evaluated independently (in parallel when
//! enabled) and rows always come out in grid order.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::{caf_bound, ou_bound, witness_bound_signed, wootters};
use crate::catalog::{Family, WitnessSpec};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::lambda::{lambda_estimate, AlphaSource, OptimizerConfig};
use crate::witnesses::Witness;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
}

impl Grid {
    pub fn new(start: f64, stop: f64, points: usize, scale: Scale) -> Self {
        Self {
            start,
            stop,
            points,
            scale,
        }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points < 2 {
            return Err(Error::OutOfRange(format!(
                "a grid needs at least 2 points, got {}",
                self.points
            )));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::OutOfRange("grid endpoints must be finite".into()));
        }
        let last = (self.points - 1) as f64;
        Ok(match self.scale {
            Scale::Linear => (0..self.points)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / last)
                .collect(),
            Scale::Log => {
                if self.start <= 0.0 || self.stop <= 0.0 {
                    return Err(Error::OutOfRange(
                        "log grid needs positive endpoints".into(),
                    ));
                }
                let (l0, l1) = (self.start.ln(), self.stop.ln());
                (0..self.points)
                    .map(|i| (l0 + (l1 - l0) * i as f64 / last).exp())
                    .collect()
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Witness,
    Caf,
    Ou,
    Wootters,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Witness => "witness",
            Method::Caf => "caf",
            Method::Ou => "ou",
            Method::Wootters => "wootters",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "witness" => Ok(Method::Witness),
            "caf" => Ok(Method::Caf),
            "ou" => Ok(Method::Ou),
            "wootters" => Ok(Method::Wootters),
            _ => Err(Error::Parse(format!("unknown method {s:?}"))),
        }
    }
}

/// How the rescaling constant of a witness is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaSpec {
    /// The attached constant if there is one, otherwise the estimate.
    Auto,
    /// The witness's attached constant; an error if it has none.
    Known,
    /// Always the optimizer estimate (times the configured margin).
    Estimate,
    Explicit(f64),
}

impl FromStr for AlphaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(AlphaSpec::Auto),
            "known" => Ok(AlphaSpec::Known),
            "estimate" => Ok(AlphaSpec::Estimate),
            v => match v.parse::<f64>() {
                Ok(x) if x > 0.0 && x.is_finite() => Ok(AlphaSpec::Explicit(x)),
                _ => Err(Error::Parse(format!(
                    "alpha must be auto, known, estimate or a positive number, got {s:?}"
                ))),
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub family: Family,
    /// Local dimensions to sweep (`m` for isotropic, `d` for gamma).
    pub dims: Vec<usize>,
    pub grid: Grid,
    pub witnesses: Vec<WitnessSpec>,
    pub alpha: AlphaSpec,
    pub methods: Vec<Method>,
    pub clamp: bool,
    pub optimizer: OptimizerConfig,
    pub execution: Execution,
}

impl SweepSpec {
    pub fn new(family: Family, grid: Grid) -> Self {
        Self {
            family,
            dims: vec![family.default_dimension()],
            grid,
            witnesses: family.default_witness().into_iter().collect(),
            alpha: AlphaSpec::Auto,
            methods: vec![Method::Witness, Method::Caf],
            clamp: false,
            optimizer: OptimizerConfig::default(),
            execution: Execution::default(),
        }
    }

    fn validate(&self) -> Result<Vec<f64>> {
        let values = self.grid.values()?;
        for p in [self.grid.start, self.grid.stop] {
            if !self.family.accepts(p) {
                return Err(Error::OutOfRange(format!(
                    "grid endpoint {p} outside the {} parameter domain",
                    self.family
                )));
            }
        }
        if self.dims.is_empty() || self.methods.is_empty() {
            return Err(Error::OutOfRange(
                "a sweep needs at least one dimension and one method".into(),
            ));
        }
        if !self.family.has_dimension()
            && self
                .dims
                .iter()
                .any(|&d| d != self.family.default_dimension())
        {
            return Err(Error::OutOfRange(format!(
                "the {} family has a fixed dimension",
                self.family
            )));
        }
        if self.methods.contains(&Method::Witness) && self.witnesses.is_empty() {
            return Err(Error::OutOfRange(format!(
                "the {} family needs an explicit --witness",
                self.family
            )));
        }
        Ok(values)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SweepTable {
    /// RFC 4180 CSV, 17 significant digits, `.` decimal separator.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_number(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits in scientific notation; NaN for missing values.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    let mut s = String::new();
    write!(s, "{v:.16e}").expect("write to string");
    s
}

enum Column {
    Witness {
        dim: usize,
        spec: WitnessSpec,
        fixed: Option<(Witness, f64)>,
    },
    Caf {
        dim: usize,
    },
    Ou {
        dim: usize,
    },
    Wootters {
        dim: usize,
    },
}

/// Rescaling constant for `w` under `alpha`, with where it came from.
pub fn alpha_for(
    w: &Witness,
    alpha: AlphaSpec,
    cfg: &OptimizerConfig,
) -> Result<(f64, AlphaSource)> {
    match (alpha, w.known_lambda()) {
        (AlphaSpec::Explicit(a), _) => Ok((a, AlphaSource::Explicit)),
        (AlphaSpec::Known | AlphaSpec::Auto, Some(l)) => Ok((l, AlphaSource::Known)),
        (AlphaSpec::Known, None) => Err(Error::OutOfRange(format!(
            "witness {} has no known rescaling constant",
            w.label()
        ))),
        (AlphaSpec::Estimate | AlphaSpec::Auto, _) => {
            let a = lambda_estimate(w, cfg)?.lambda_hat * cfg.margin;
            if a > 0.0 {
                Ok((a, AlphaSource::Estimated))
            } else {
                Err(Error::Invariant(format!(
                    "estimated rescaling constant {a} is not positive"
                )))
            }
        }
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    let grid = spec.validate()?;
    let multi_dim = spec.dims.len() > 1;
    let multi_witness = spec.witnesses.len() > 1;
    let mut header = vec!["param".to_string()];
    let mut columns = Vec::new();
    for &dim in &spec.dims {
        let suffix = if multi_dim {
            format!("_d{dim}")
        } else {
            String::new()
        };
        for &method in &spec.methods {
            match method {
                Method::Witness => {
                    for ws in &spec.witnesses {
                        let tag = if multi_witness {
                            format!("_{}", ws.column_tag())
                        } else {
                            String::new()
                        };
                        header.push(format!("witness{suffix}{tag}"));
                        // parameter-independent witnesses are built (and rescaled) once
                        let fixed = if ws.depends_on_param() {
                            None
                        } else {
                            let w = ws.build(dim, None)?;
                            let (a, _) = alpha_for(&w, spec.alpha, &spec.optimizer)?;
                            Some((w, a))
                        };
                        columns.push(Column::Witness {
                            dim,
                            spec: ws.clone(),
                            fixed,
                        });
                    }
                }
                Method::Caf => {
                    header.push(format!("caf{suffix}"));
                    columns.push(Column::Caf { dim });
                }
                Method::Ou => {
                    header.push(format!("ou{suffix}"));
                    columns.push(Column::Ou { dim });
                }
                Method::Wootters => {
                    if spec.family.state(dim, grid[0])?.dims().total() != 4 {
                        return Err(Error::OutOfRange(
                            "wootters needs a two-qubit family".into(),
                        ));
                    }
                    header.push(format!("wootters{suffix}"));
                    columns.push(Column::Wootters { dim });
                }
            }
        }
    }

    let evaluated = map_indexed(grid.len(), spec.execution, |i| -> Result<Vec<f64>> {
        let p = grid[i];
        let mut row = vec![p];
        for col in &columns {
            let v = match col {
                Column::Witness {
                    dim,
                    spec: ws,
                    fixed,
                } => {
                    let rho = spec.family.state(*dim, p)?;
                    match fixed {
                        Some((w, a)) => witness_bound_signed(&rho, w, *a)?,
                        None => {
                            let w = ws.build(*dim, Some(p))?;
                            let (a, _) = alpha_for(&w, spec.alpha, &spec.optimizer)?;
                            witness_bound_signed(&rho, &w, a)?
                        }
                    }
                }
                Column::Caf { dim } => caf_bound(&spec.family.state(*dim, p)?)?,
                Column::Ou { dim } => ou_bound(&spec.family.state(*dim, p)?)?,
                Column::Wootters { dim } => wootters(&spec.family.state(*dim, p)?)?,
            };
            row.push(if spec.clamp { v.max(0.0) } else { v });
        }
        Ok(row)
    });
    let rows = evaluated.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { header, rows })
}
