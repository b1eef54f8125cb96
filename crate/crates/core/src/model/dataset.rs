use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One feature vector, optionally labelled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

impl Instance {
    pub fn new(values: Vec<f64>) -> Self {
        Instance { values, label: None, id: None }
    }

    pub fn labelled(values: Vec<f64>, label: usize) -> Self {
        Instance { values, label: Some(label), id: None }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// An ordered collection of instances sharing one feature dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    d: usize,
    class_count: usize,
    instances: Vec<Instance>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    /// Validates dimensions, finiteness and label range.
    pub fn new(d: usize, class_count: usize, instances: Vec<Instance>) -> Result<Self> {
        if class_count < 2 {
            return Err(Error::InvalidDataset(format!("class_count must be at least 2, got {class_count}")));
        }
        for (row, inst) in instances.iter().enumerate() {
            if inst.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: inst.dim() });
            }
            if let Some(col) = inst.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!("row {row}, column {col}: non-finite value")));
            }
            if let Some(label) = inst.label {
                if label >= class_count {
                    return Err(Error::InvalidDataset(format!("row {row}: label {label} outside [0, {class_count})")));
                }
            }
        }
        Ok(Dataset { d, class_count, instances, feature_names: None })
    }

    /// Builds a dataset whose class count is inferred from the labels
    /// (at least two classes).
    pub fn from_instances(d: usize, instances: Vec<Instance>) -> Result<Self> {
        let classes = instances.iter().filter_map(|i| i.label).max().map_or(2, |m| (m + 1).max(2));
        Dataset::new(d, classes, instances)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: names.len() });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn is_labelled(&self) -> bool {
        !self.instances.is_empty() && self.instances.iter().all(|i| i.label.is_some())
    }

    /// Per-feature mean over all instances.
    pub fn feature_means(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.d];
        if self.instances.is_empty() {
            return mean;
        }
        for inst in &self.instances {
            for (m, v) in mean.iter_mut().zip(&inst.values) {
                *m += v;
            }
        }
        let n = self.instances.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    /// Reads the CSV layout: a header row, feature columns in order, and an
    /// optional final column named `label` with integer class indices.
    /// Instance ids are the zero-based data row numbers.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let has_label = headers.last().is_some_and(|h| h == "label");
        let d = headers.len() - usize::from(has_label);
        if d == 0 {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        let mut instances = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let mut values = Vec::with_capacity(d);
            for col in 0..d {
                let field = &record[col];
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::InvalidDataset(format!("row {row}, column {col}: cannot parse {field:?}")))?;
                values.push(v);
            }
            let label =
                if has_label {
                    let field = &record[d];
                    Some(field.parse::<usize>().map_err(|_| {
                        Error::InvalidDataset(format!("row {row}: label {field:?} is not a class index"))
                    })?)
                } else {
                    None
                };
            instances.push(Instance { values, label, id: Some(row.to_string()) });
        }
        Dataset::from_instances(d, instances)?.with_feature_names(headers[..d].to_vec())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Dataset::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = match &self.feature_names {
            Some(names) => names.clone(),
            None => (0..self.d).map(|i| format!("x{i}")).collect(),
        };
        let labelled = self.is_labelled();
        if labelled {
            header.push("label".into());
        }
        wtr.write_record(&header)?;
        for inst in &self.instances {
            let mut row: Vec<String> = inst.values.iter().map(|v| v.to_string()).collect();
            if labelled {
                row.push(inst.label.unwrap_or_default().to_string());
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_label_column() {
        let text = "a,b,label\n1.5,2,0\n-1,0.25,1\n";
        let ds = Dataset::read_csv(text.as_bytes()).unwrap();
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.class_count(), 2);
        assert_eq!(ds.instances()[1].values, vec![-1.0, 0.25]);
        assert_eq!(ds.instances()[1].label, Some(1));
        assert_eq!(ds.instances()[1].id.as_deref(), Some("1"));
        assert_eq!(ds.feature_names().unwrap(), ["a", "b"]);

        let mut out = Vec::new();
        ds.write_csv(&mut out).unwrap();
        assert_eq!(Dataset::read_csv(out.as_slice()).unwrap(), ds);
    }

    #[test]
    fn csv_without_labels() {
        let ds = Dataset::read_csv("x,y,z\n1,2,3\n".as_bytes()).unwrap();
        assert_eq!(ds.dim(), 3);
        assert!(!ds.is_labelled());
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(Dataset::read_csv("a,label\nfoo,1\n".as_bytes()).is_err());
        assert!(Dataset::read_csv("a,label\n1,1.5\n".as_bytes()).is_err());
        assert!(matches!(
            Dataset::new(2, 2, vec![Instance::new(vec![1.0])]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
        assert!(Dataset::new(1, 2, vec![Instance::new(vec![f64::NAN])]).is_err());
        assert!(Dataset::new(1, 2, vec![Instance::labelled(vec![0.0], 2)]).is_err());
    }

    #[test]
    fn single_class_labels_still_have_two_classes() {
        let ds = Dataset::from_instances(1, vec![Instance::labelled(vec![0.0], 0)]).unwrap();
        assert_eq!(ds.class_count(), 2);
    }
}
