//! Feature datasets and their CSV form: `id,feat_0,...,feat_{d-1},label`.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{RaclError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: u64,
    pub features: Vec<f64>,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    feature_dim: usize,
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(feature_dim: usize, samples: Vec<Sample>) -> Result<Self> {
        if feature_dim == 0 {
            return Err(RaclError::InvalidInput("feature dimension must be positive".into()));
        }
        if let Some(s) = samples.iter().find(|s| s.features.len() != feature_dim) {
            return Err(RaclError::DimensionMismatch {
                expected: feature_dim,
                actual: s.features.len(),
            });
        }
        if let Some(s) = samples.iter().find(|s| s.features.iter().any(|v| !v.is_finite())) {
            return Err(RaclError::InvalidInput(format!("sample {} has non-finite features", s.id)));
        }
        let mut ids: Vec<u64> = samples.iter().map(|s| s.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(RaclError::InvalidInput("duplicate sample ids".into()));
        }
        Ok(Self { feature_dim, samples })
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    /// Number of classes implied by the largest label.
    pub fn inferred_num_classes(&self) -> usize {
        self.samples.iter().map(|s| s.label + 1).max().unwrap_or(0)
    }

    /// Per-class sample counts over `num_classes` classes.
    pub fn class_counts(&self, num_classes: usize) -> Vec<usize> {
        let mut counts = vec![0; num_classes];
        for s in &self.samples {
            if s.label < num_classes {
                counts[s.label] += 1;
            }
        }
        counts
    }

    /// Sample indices grouped by label, in dataset order.
    pub fn indices_by_class(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, s) in self.samples.iter().enumerate() {
            by_class.entry(s.label).or_default().push(i);
        }
        by_class
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            feature_dim: self.feature_dim,
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
        }
    }

    pub fn with_labels(&self, labels: &[usize]) -> Result<Self> {
        if labels.len() != self.samples.len() {
            return Err(RaclError::DimensionMismatch {
                expected: self.samples.len(),
                actual: labels.len(),
            });
        }
        let samples = self
            .samples
            .iter()
            .zip(labels)
            .map(|(s, &label)| Sample { label, ..s.clone() })
            .collect();
        Ok(Self { feature_dim: self.feature_dim, samples })
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header = rdr.headers()?.clone();
        let n = header.len();
        if n < 3 || &header[0] != "id" || &header[n - 1] != "label" {
            return Err(RaclError::Parse(
                "dataset header must be id,feat_0..feat_{d-1},label".into(),
            ));
        }
        let feature_dim = n - 2;
        for (j, name) in header.iter().skip(1).take(feature_dim).enumerate() {
            if name != format!("feat_{j}") {
                return Err(RaclError::Parse(format!("expected column feat_{j}, found {name}")));
            }
        }
        let mut samples = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let field = |i: usize| record.get(i).unwrap_or("").trim();
            let bad = |what: &str| RaclError::Parse(format!("row {}: bad {what}", line + 2));
            let id = field(0).parse::<u64>().map_err(|_| bad("id"))?;
            let features = (1..=feature_dim)
                .map(|i| field(i).parse::<f64>().map_err(|_| bad("feature")))
                .collect::<Result<Vec<_>>>()?;
            let label = field(n - 1).parse::<usize>().map_err(|_| bad("label"))?;
            samples.push(Sample { id, features, label });
        }
        Self::new(feature_dim, samples)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["id".to_string()];
        header.extend((0..self.feature_dim).map(|j| format!("feat_{j}")));
        header.push("label".into());
        w.write_record(&header)?;
        for s in &self.samples {
            let mut row = vec![s.id.to_string()];
            row.extend(s.features.iter().map(|v| v.to_string()));
            row.push(s.label.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dataset {
        Dataset::new(
            2,
            vec![
                Sample { id: 3, features: vec![0.5, -1.25], label: 1 },
                Sample { id: 7, features: vec![1e-3, 2.0], label: 0 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn csv_roundtrip() {
        let d = tiny();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,feat_0,feat_1,label\n"));
        assert_eq!(Dataset::read_csv(buf.as_slice()).unwrap(), d);
    }

    #[test]
    fn rejects_malformed() {
        assert!(Dataset::read_csv("id,x,label\n1,2,0\n".as_bytes()).is_err());
        assert!(Dataset::read_csv("id,feat_0,label\n1,abc,0\n".as_bytes()).is_err());
        assert!(Dataset::read_csv("id,feat_0,label\n1,1.0,-1\n".as_bytes()).is_err());
        assert!(Dataset::read_csv("id,feat_0,label\n1,1.0,0\n1,2.0,1\n".as_bytes()).is_err());
    }

    #[test]
    fn grouping_and_counts() {
        let d = tiny();
        assert_eq!(d.inferred_num_classes(), 2);
        assert_eq!(d.class_counts(3), vec![1, 1, 0]);
        assert_eq!(d.indices_by_class()[&1], vec![0]);
    }
}
