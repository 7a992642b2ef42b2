//! Labeled feature tables and their CSV form.
//!
//! CSV layout: header `subject_id,label,f0,...,f{d-1}`, one row per sample,
//! labels as literal class names, `\n` line endings, shortest round-trip
//! decimal formatting.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::face::EmotionLabel;
use crate::skeleton::PostureLabel;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    /// Class index per row, into `classes`.
    pub labels: Vec<usize>,
    pub classes: Vec<String>,
    pub subjects: Vec<String>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        classes: Vec<String>,
        subjects: Vec<String>,
    ) -> Result<Self> {
        let dim = features.first().map_or(0, Vec::len);
        let feature_names = (0..dim).map(|i| format!("f{i}")).collect();
        let ds = Dataset {
            features,
            labels,
            classes,
            subjects,
            feature_names,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                found: names.len(),
            });
        }
        self.feature_names = names;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.features.len();
        if n == 0 {
            return Err(Error::InvalidDataset("no rows".into()));
        }
        if self.labels.len() != n || self.subjects.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{} rows but {} labels and {} subject ids",
                n,
                self.labels.len(),
                self.subjects.len()
            )));
        }
        let d = self.dim();
        if d == 0 {
            return Err(Error::InvalidDataset("zero feature columns".into()));
        }
        for (i, row) in self.features.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidDataset(format!(
                    "row {i} has {} features, expected {d}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "row {i} has a non-finite feature"
                )));
            }
        }
        if let Some(bad) = self.labels.iter().find(|&&l| l >= self.classes.len()) {
            return Err(Error::InvalidDataset(format!(
                "label index {bad} out of range"
            )));
        }
        let present = self.class_counts().iter().filter(|&&c| c > 0).count();
        if present < 2 {
            return Err(Error::InvalidDataset(
                "fewer than two classes present".into(),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for &l in &self.labels {
            if l < counts.len() {
                counts[l] += 1;
            }
        }
        counts
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    pub fn distinct_subjects(&self) -> Vec<String> {
        self.subjects
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Rows at `indices`, in that order. The class list is kept whole, so a
    /// subset may lack some classes.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes.clone(),
            subjects: indices.iter().map(|&i| self.subjects[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let mut header = vec!["subject_id".to_string(), "label".to_string()];
        header.extend((0..self.dim()).map(|i| format!("f{i}")));
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec = vec![
                self.subjects[i].clone(),
                self.classes[self.labels[i]].clone(),
            ];
            rec.extend(self.features[i].iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Reads a dataset CSV. Class order follows the posture or emotion
    /// vocabulary when every label belongs to it; a `Rest` label is placed
    /// first; anything else is ordered lexicographically.
    pub fn read_csv<R: Read>(input: R) -> Result<Dataset> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let header = r.headers()?.clone();
        if header.len() < 3 || &header[0] != "subject_id" || &header[1] != "label" {
            return Err(Error::format(
                1,
                "expected header `subject_id,label,f0,...`",
            ));
        }
        for (k, h) in header.iter().skip(2).enumerate() {
            if h != format!("f{k}") {
                return Err(Error::format(
                    1,
                    format!("column {} should be `f{k}`, found `{h}`", k + 2),
                ));
            }
        }
        let d = header.len() - 2;
        let mut features = Vec::new();
        let mut names = Vec::new();
        let mut subjects = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = row + 2;
            if rec.len() != d + 2 {
                return Err(Error::format(
                    line,
                    format!("expected {} fields, found {}", d + 2, rec.len()),
                ));
            }
            subjects.push(rec[0].to_string());
            names.push(rec[1].to_string());
            let mut x = Vec::with_capacity(d);
            for field in rec.iter().skip(2) {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::format(line, format!("`{field}` is not a number")))?;
                x.push(v);
            }
            features.push(x);
        }
        let classes = infer_classes(&names);
        let labels = names
            .iter()
            .map(|n| classes.iter().position(|c| c == n).unwrap())
            .collect();
        Dataset::new(features, labels, classes, subjects)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Dataset> {
        let file = std::fs::File::open(path)?;
        Dataset::read_csv(std::io::BufReader::new(file))
    }
}

pub const REST_CLASS: &str = "Rest";

pub fn posture_classes() -> Vec<String> {
    PostureLabel::ALL
        .iter()
        .map(|l| l.name().to_string())
        .collect()
}

pub fn emotion_classes() -> Vec<String> {
    EmotionLabel::ALL
        .iter()
        .map(|l| l.name().to_string())
        .collect()
}

fn infer_classes(names: &[String]) -> Vec<String> {
    let distinct: BTreeSet<&str> = names.iter().map(String::as_str).collect();
    for vocab in [posture_classes(), emotion_classes()] {
        if distinct.iter().all(|n| vocab.iter().any(|v| v == n)) {
            return vocab;
        }
    }
    let mut classes: Vec<String> = distinct.iter().map(|s| s.to_string()).collect();
    if let Some(pos) = classes.iter().position(|c| c == REST_CLASS) {
        let rest = classes.remove(pos);
        classes.insert(0, rest);
    }
    classes
}
