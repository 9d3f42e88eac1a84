//! JSON forms of density operators and witnesses:
//! `{"dims": [dA, dB], "re": [[..]], "im": [[..]]}`, plus an optional
//! `"lambda"` for witnesses and an optional `"label"`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{BipartiteDims, ComplexMatrix, C64};
use crate::states::DensityOperator;
use crate::witnesses::Witness;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 2]>,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl MatrixJson {
    pub fn from_matrix(
        m: &ComplexMatrix,
        dims: Option<BipartiteDims>,
        lambda: Option<f64>,
    ) -> Self {
        let rows = |f: fn(&C64) -> f64| {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect())
                .collect()
        };
        Self {
            dims: dims.map(Into::into),
            re: rows(|z| z.re),
            im: Some(rows(|z| z.im)),
            lambda,
            label: None,
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        if self.re.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("ragged \"re\" array".into()));
        }
        if let Some(im) = &self.im {
            if im.len() != rows || im.iter().any(|r| r.len() != cols) {
                return Err(Error::Parse("\"im\" shape differs from \"re\"".into()));
            }
        }
        let m = ComplexMatrix::from_fn(rows, cols, |r, c| {
            C64::new(self.re[r][c], self.im.as_ref().map_or(0.0, |im| im[r][c]))
        });
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("non-finite matrix entry".into()));
        }
        Ok(m)
    }

    fn bipartite_dims(&self) -> Result<BipartiteDims> {
        let [da, db] = self
            .dims
            .ok_or_else(|| Error::Parse("missing \"dims\"".into()))?;
        BipartiteDims::new(da, db)
    }
}

impl From<&DensityOperator> for MatrixJson {
    fn from(rho: &DensityOperator) -> Self {
        MatrixJson::from_matrix(rho.matrix(), Some(rho.dims()), None)
    }
}

impl From<&Witness> for MatrixJson {
    fn from(w: &Witness) -> Self {
        let mut j = MatrixJson::from_matrix(w.matrix(), Some(w.dims()), w.known_lambda());
        j.label = Some(w.label().to_string());
        j
    }
}

impl TryFrom<&MatrixJson> for DensityOperator {
    type Error = Error;

    fn try_from(j: &MatrixJson) -> Result<Self> {
        DensityOperator::new(j.to_matrix()?, j.bipartite_dims()?)
    }
}

impl TryFrom<&MatrixJson> for Witness {
    type Error = Error;

    fn try_from(j: &MatrixJson) -> Result<Self> {
        let w = Witness::new(j.to_matrix()?, j.bipartite_dims()?, j.lambda)?;
        Ok(match &j.label {
            Some(l) => w.with_label(l.clone()),
            None => w.with_label("file"),
        })
    }
}

pub fn density_to_json(rho: &DensityOperator) -> String {
    serde_json::to_string_pretty(&MatrixJson::from(rho)).expect("matrix JSON serializes")
}

pub fn density_from_json(s: &str) -> Result<DensityOperator> {
    let j: MatrixJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    DensityOperator::try_from(&j)
}

pub fn witness_to_json(w: &Witness) -> String {
    serde_json::to_string_pretty(&MatrixJson::from(w)).expect("matrix JSON serializes")
}

pub fn witness_from_json(s: &str) -> Result<Witness> {
    let j: MatrixJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    Witness::try_from(&j)
}

pub fn read_density(path: &Path) -> Result<DensityOperator> {
    density_from_json(&std::fs::read_to_string(path)?)
}

pub fn read_witness(path: &Path) -> Result<Witness> {
    witness_from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{epsilon_state, random_density};
    use crate::witnesses::tang_witness;

    #[test]
    fn density_round_trip() {
        let rho = random_density(BipartiteDims::new(2, 3).unwrap(), 3, 4).unwrap();
        let back = density_from_json(&density_to_json(&rho)).unwrap();
        assert!((back.matrix() - rho.matrix())
            .iter()
            .all(|z| z.norm() < 1e-12));
        assert_eq!(back.dims(), rho.dims());
    }

    #[test]
    fn witness_round_trip_keeps_lambda() {
        let w = tang_witness(0.4).unwrap();
        let back = witness_from_json(&witness_to_json(&w)).unwrap();
        assert_eq!(back.known_lambda(), w.known_lambda());
        assert!(back.known_lambda().is_some());
        assert_eq!(back.label(), w.label());
        assert_eq!(back.matrix(), w.matrix());
    }

    #[test]
    fn imaginary_part_is_optional() {
        let s = r#"{"dims": [2, 2], "re": [[0.5,0,0,0.5],[0,0,0,0],[0,0,0,0],[0.5,0,0,0.5]]}"#;
        let rho = density_from_json(s).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(matches!(density_from_json("{"), Err(Error::Parse(_))));
        assert!(density_from_json(r#"{"dims": [2, 2], "re": [[1, 0], [0]]}"#).is_err());
        assert!(density_from_json(r#"{"re": [[1]]}"#).is_err());
        assert!(density_from_json(
            r#"{"dims": [2, 2], "re": [[1,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,1]]}"#
        )
        .is_err());
        let three = MatrixJson::from(&epsilon_state(2.0).unwrap());
        let mut wrong = three.clone();
        wrong.dims = Some([2, 2]);
        assert!(matches!(
            DensityOperator::try_from(&wrong),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
