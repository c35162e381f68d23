//! Observation records and the dataset CSV formats.
//!
//! Three on-disk layouts are supported, distinguished by header:
//! a single `x` column (positive reals), a single `y` column (0/1), or
//! `y,x1,...,xK` for binary responses with covariates.

use std::path::Path;

use crate::error::{Error, Result};

/// One observation: a scalar response plus optional covariates.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub response: f64,
    pub covariates: Option<Vec<f64>>,
}

impl Observation {
    pub fn scalar(response: f64) -> Self {
        Observation { response, covariates: None }
    }

    pub fn with_covariates(response: f64, covariates: Vec<f64>) -> Self {
        Observation { response, covariates: Some(covariates) }
    }
}

/// An ordered collection of observations with a consistent shape.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    observations: Vec<Observation>,
    covariate_dim: Option<usize>,
    response_name: String,
}

impl Dataset {
    /// Builds a dataset from rows, checking that every row has the same
    /// covariate dimension and that all values are finite.
    pub fn new(observations: Vec<Observation>, response_name: &str) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::DataValidation("dataset is empty".into()));
        }
        let covariate_dim = observations[0].covariates.as_ref().map(Vec::len);
        for (i, obs) in observations.iter().enumerate() {
            if !obs.response.is_finite() {
                return Err(Error::DataValidation(format!(
                    "non-finite response at row {i}"
                )));
            }
            let dim = obs.covariates.as_ref().map(Vec::len);
            if dim != covariate_dim {
                return Err(Error::DataValidation(format!(
                    "row {i} has covariate dimension {dim:?}, expected {covariate_dim:?}"
                )));
            }
            if let Some(cov) = &obs.covariates {
                if let Some(j) = cov.iter().position(|v| !v.is_finite()) {
                    return Err(Error::DataValidation(format!(
                        "non-finite covariate {j} at row {i}"
                    )));
                }
            }
        }
        Ok(Dataset {
            observations,
            covariate_dim,
            response_name: response_name.to_string(),
        })
    }

    /// Scalar responses with no covariates.
    pub fn from_responses(responses: Vec<f64>, response_name: &str) -> Result<Self> {
        Self::new(responses.into_iter().map(Observation::scalar).collect(), response_name)
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn get(&self, i: usize) -> &Observation {
        &self.observations[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Observation> {
        self.observations.iter()
    }

    pub fn covariate_dim(&self) -> Option<usize> {
        self.covariate_dim
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    /// A copy with observation `i` removed (leave-one-out helper).
    pub fn without(&self, i: usize) -> Result<Self> {
        if i >= self.len() {
            return Err(Error::Domain(format!(
                "cannot drop observation {i} from a dataset of size {}",
                self.len()
            )));
        }
        if self.len() == 1 {
            return Err(Error::DataValidation(
                "cannot drop the only observation".into(),
            ));
        }
        let mut observations = self.observations.clone();
        observations.remove(i);
        Ok(Dataset {
            observations,
            covariate_dim: self.covariate_dim,
            response_name: self.response_name.clone(),
        })
    }

    /// Reads a dataset from CSV, inferring the layout from the header.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_path(path)?;
        let headers: Vec<String> = reader
            .headers()?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let (response_name, n_cov) = match headers.as_slice() {
            [single] if single == "x" || single == "y" => (single.clone(), 0),
            [first, rest @ ..] if first == "y" && !rest.is_empty() => {
                for (j, name) in rest.iter().enumerate() {
                    let expected = format!("x{}", j + 1);
                    if *name != expected {
                        return Err(Error::DataValidation(format!(
                            "unexpected column '{name}' (expected '{expected}') in {}",
                            path.display()
                        )));
                    }
                }
                (first.clone(), rest.len())
            }
            _ => {
                return Err(Error::DataValidation(format!(
                    "unrecognized header {:?} in {}",
                    headers,
                    path.display()
                )))
            }
        };

        let mut observations = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != n_cov + 1 {
                return Err(Error::DataValidation(format!(
                    "row {row} has {} fields, expected {}",
                    record.len(),
                    n_cov + 1
                )));
            }
            let parse = |field: &str, what: &str| -> Result<f64> {
                field.trim().parse::<f64>().map_err(|_| {
                    Error::DataValidation(format!("row {row}: cannot parse {what} '{field}'"))
                })
            };
            let response = parse(&record[0], "response")?;
            let covariates = if n_cov == 0 {
                None
            } else {
                let mut cov = Vec::with_capacity(n_cov);
                for j in 0..n_cov {
                    cov.push(parse(&record[j + 1], "covariate")?);
                }
                Some(cov)
            };
            observations.push(Observation { response, covariates });
        }
        Dataset::new(observations, &response_name)
    }

    /// Writes the dataset back out in the layout it was built with.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        let mut header = vec![self.response_name.clone()];
        if let Some(k) = self.covariate_dim {
            for j in 1..=k {
                header.push(format!("x{j}"));
            }
        }
        writer.write_record(&header)?;
        for obs in &self.observations {
            let mut row = vec![format!("{}", obs.response)];
            if let Some(cov) = &obs.covariates {
                for v in cov {
                    row.push(format!("{v}"));
                }
            }
            writer.write_record(&row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mixed_covariate_dimensions() {
        let rows = vec![
            Observation::with_covariates(1.0, vec![0.5, 0.5]),
            Observation::with_covariates(0.0, vec![0.5]),
        ];
        assert!(matches!(Dataset::new(rows, "y"), Err(Error::DataValidation(_))));
    }

    #[test]
    fn rejects_non_finite_values() {
        assert!(Dataset::from_responses(vec![1.0, f64::NAN], "x").is_err());
        let rows = vec![Observation::with_covariates(1.0, vec![f64::INFINITY])];
        assert!(Dataset::new(rows, "y").is_err());
    }

    #[test]
    fn csv_round_trip_scalar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let data = Dataset::from_responses(vec![0.25, 1.5, 3.0], "x").unwrap();
        data.write_csv(&path).unwrap();
        let back = Dataset::read_csv(&path).unwrap();
        assert_eq!(data, back);
    }

    #[test]
    fn csv_round_trip_covariates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let rows = vec![
            Observation::with_covariates(1.0, vec![0.1, -0.2, 0.3]),
            Observation::with_covariates(0.0, vec![-1.0, 2.0, 0.0]),
        ];
        let data = Dataset::new(rows, "y").unwrap();
        data.write_csv(&path).unwrap();
        let back = Dataset::read_csv(&path).unwrap();
        assert_eq!(data, back);
        assert_eq!(back.covariate_dim(), Some(3));
    }

    #[test]
    fn read_rejects_bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        std::fs::write(&path, "value\n1.0\n").unwrap();
        assert!(matches!(
            Dataset::read_csv(&path),
            Err(Error::DataValidation(_))
        ));
        std::fs::write(&path, "y,x2\n1.0,0.5\n").unwrap();
        assert!(Dataset::read_csv(&path).is_err());
    }

    #[test]
    fn read_rejects_unparseable_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        std::fs::write(&path, "x\n1.0\noops\n").unwrap();
        assert!(Dataset::read_csv(&path).is_err());
    }

    #[test]
    fn without_drops_one_row() {
        let data = Dataset::from_responses(vec![1.0, 2.0, 3.0], "x").unwrap();
        let reduced = data.without(1).unwrap();
        assert_eq!(reduced.len(), 2);
        assert_eq!(reduced.get(0).response, 1.0);
        assert_eq!(reduced.get(1).response, 3.0);
        assert!(data.without(3).is_err());
    }
}
