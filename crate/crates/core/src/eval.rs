//! Cross-validation, subject-held-out blind testing, confusion matrices,
//! one-vs-rest relabeling and ROC analysis.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, REST_CLASS};
use crate::ml::Classifier;
use crate::{Error, Result};

pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_HOLDOUT: f64 = 0.3;
pub const CSV_HEADER: &str = "mode,model,fold,accuracy,matrix";

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> ConfusionMatrix {
        ConfusionMatrix {
            counts: vec![vec![0; n_classes]; n_classes],
        }
    }

    pub fn from_counts(counts: Vec<Vec<usize>>) -> Result<ConfusionMatrix> {
        let c = counts.len();
        if c == 0 || counts.iter().any(|r| r.len() != c) {
            return Err(Error::Shape {
                expected: c,
                found: counts.iter().map(Vec::len).find(|&l| l != c).unwrap_or(0),
            });
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn record(&mut self, truth: usize, pred: usize) {
        self.counts[truth][pred] += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        (0..self.n_classes())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    /// Row-major counts joined by `;`.
    pub fn flattened(&self) -> String {
        self.counts
            .iter()
            .flatten()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub classes: Vec<String>,
    pub matrix: ConfusionMatrix,
    pub accuracy: f64,
    /// Per-fold results in cross-validation mode.
    pub folds: Vec<ConfusionMatrix>,
    /// Present for 2-class problems, scored on class index 1.
    pub roc: Option<RocCurve>,
    /// Subjects held out in blind mode.
    pub blind_subjects: Vec<String>,
    /// Subject ids found on both sides of a blind split; always 0 when built
    /// by [`blind_test`].
    pub subject_overlap: usize,
}

impl EvalReport {
    fn from_matrix(classes: Vec<String>, matrix: ConfusionMatrix) -> EvalReport {
        EvalReport {
            classes,
            accuracy: matrix.accuracy(),
            matrix,
            folds: Vec::new(),
            roc: None,
            blind_subjects: Vec::new(),
            subject_overlap: 0,
        }
    }

    pub fn fold_accuracies(&self) -> Vec<f64> {
        self.folds.iter().map(ConfusionMatrix::accuracy).collect()
    }

    pub fn to_text(&self, title: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{title}");
        let w = self
            .classes
            .iter()
            .map(String::len)
            .max()
            .unwrap_or(4)
            .max(8);
        let _ = write!(s, "{:>w$}", "true\\pred");
        for c in &self.classes {
            let _ = write!(s, " {c:>w$}");
        }
        s.push('\n');
        for (c, row) in self.classes.iter().zip(&self.matrix.counts) {
            let _ = write!(s, "{c:>w$}");
            for v in row {
                let _ = write!(s, " {v:>w$}");
            }
            s.push('\n');
        }
        let _ = writeln!(
            s,
            "accuracy {:.4} ({}/{})",
            self.accuracy,
            self.matrix.trace(),
            self.matrix.total()
        );
        for (i, a) in self.fold_accuracies().iter().enumerate() {
            let _ = writeln!(s, "fold {i} accuracy {a:.4}");
        }
        if !self.blind_subjects.is_empty() {
            let _ = writeln!(
                s,
                "blind subjects {} ({} shared with training)",
                self.blind_subjects.join(" "),
                self.subject_overlap
            );
        }
        if let Some(roc) = &self.roc {
            let _ = writeln!(s, "AUC {:.4}", roc.auc);
        }
        s
    }

    /// CSV rows (no header): one per fold, then the pooled row with fold `all`.
    pub fn csv_rows(&self, mode: &str, model: &str) -> String {
        let mut s = String::new();
        for (i, m) in self.folds.iter().enumerate() {
            let _ = writeln!(s, "{mode},{model},{i},{},{}", m.accuracy(), m.flattened());
        }
        let _ = writeln!(
            s,
            "{mode},{model},all,{},{}",
            self.accuracy,
            self.matrix.flattened()
        );
        s
    }
}

pub fn confusion_and_accuracy(
    truth: &[usize],
    pred: &[usize],
    n_classes: usize,
) -> Result<EvalReport> {
    if truth.len() != pred.len() {
        return Err(Error::Shape {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::InvalidLabels("no samples to evaluate".into()));
    }
    if let Some(bad) = truth.iter().chain(pred).find(|&&l| l >= n_classes) {
        return Err(Error::InvalidLabels(format!(
            "label {bad} outside {n_classes} classes"
        )));
    }
    let mut m = ConfusionMatrix::new(n_classes);
    for (&t, &p) in truth.iter().zip(pred) {
        m.record(t, p);
    }
    Ok(EvalReport::from_matrix(
        (0..n_classes).map(|i| i.to_string()).collect(),
        m,
    ))
}

/// Round-robin assignment of each class's shuffled members to folds, with
/// the fold counter carried across classes so fold sizes differ by at most one.
pub fn stratified_kfold(
    data: &Dataset,
    k: usize,
    seed: u64,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 {
        return Err(Error::InvalidSplit(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    let counts = data.class_counts();
    if let Some(c) = counts.iter().position(|&n| n > 0 && n < k) {
        return Err(Error::InvalidSplit(format!(
            "class `{}` has {} rows, fewer than {k} folds",
            data.classes[c], counts[c]
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0; data.len()];
    let mut slot = 0;
    for c in 0..data.n_classes() {
        let mut members: Vec<usize> = (0..data.len()).filter(|&i| data.labels[i] == c).collect();
        members.shuffle(&mut rng);
        for i in members {
            fold_of[i] = slot % k;
            slot += 1;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..data.len()).partition(|&i| fold_of[i] == f);
            (train, test)
        })
        .collect())
}

/// Number of held-out subjects for `subjects` distinct ids.
pub fn blind_subject_count(subjects: usize, fraction: f64) -> usize {
    ((fraction * subjects as f64).round() as usize).clamp(1, subjects.saturating_sub(1).max(1))
}

/// Splits row indices into `(train, blind)` with whole subjects held out.
pub fn subject_holdout_split(
    data: &Dataset,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidSplit(format!(
            "holdout fraction {fraction} outside (0, 1)"
        )));
    }
    let mut subjects = data.distinct_subjects();
    if subjects.len() < 2 {
        return Err(Error::InvalidSplit(
            "subject holdout needs at least two subjects".into(),
        ));
    }
    let n_blind = blind_subject_count(subjects.len(), fraction);
    subjects.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let blind: BTreeSet<&String> = subjects[..n_blind].iter().collect();
    Ok((0..data.len()).partition(|&i| !blind.contains(&data.subjects[i])))
}

/// Relabels to `[Rest, positive]`; features and subjects are untouched.
pub fn one_vs_rest(data: &Dataset, positive: &str) -> Result<Dataset> {
    let p = data
        .class_index(positive)
        .filter(|&p| data.labels.contains(&p))
        .ok_or_else(|| Error::InvalidClass(format!("class `{positive}` not present")))?;
    let labels = data.labels.iter().map(|&l| usize::from(l == p)).collect();
    let mut out = Dataset::new(
        data.features.clone(),
        labels,
        vec![REST_CLASS.to_string(), positive.to_string()],
        data.subjects.clone(),
    )?;
    out.feature_names = data.feature_names.clone();
    Ok(out)
}

/// ROC over every distinct threshold, equal scores grouped into one step,
/// and the trapezoid area under it.
pub fn roc_auc(scores: &[f64], truth: &[bool]) -> Result<RocCurve> {
    if scores.len() != truth.len() {
        return Err(Error::Shape {
            expected: truth.len(),
            found: scores.len(),
        });
    }
    let p = truth.iter().filter(|&&t| t).count();
    let n = truth.len() - p;
    if p == 0 || n == 0 {
        return Err(Error::InvalidLabels(
            "ROC needs both positive and negative samples".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]].total_cmp(&s).is_eq() {
            if truth[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let (x0, y0) = *points.last().expect("starts non-empty");
        let pt = (fp as f64 / n as f64, tp as f64 / p as f64);
        auc += (pt.0 - x0) * (pt.1 + y0) / 2.0;
        points.push(pt);
    }
    Ok(RocCurve { points, auc })
}

fn score_split<C: Classifier>(
    model: &C,
    data: &Dataset,
    rows: &[usize],
) -> Result<(ConfusionMatrix, Vec<f64>)> {
    let mut m = ConfusionMatrix::new(data.n_classes());
    let mut pos_scores = Vec::with_capacity(rows.len());
    for &i in rows {
        let s = model.predict_score(&data.features[i])?;
        m.record(data.labels[i], crate::ml::argmax(&s));
        if s.len() == 2 {
            pos_scores.push(s[1]);
        }
    }
    Ok((m, pos_scores))
}

fn attach_roc(report: &mut EvalReport, data: &Dataset, rows: &[usize], scores: &[f64]) {
    if data.n_classes() == 2 && scores.len() == rows.len() {
        let truth: Vec<bool> = rows.iter().map(|&i| data.labels[i] == 1).collect();
        report.roc = roc_auc(scores, &truth).ok();
    }
}

/// Stratified k-fold cross-validation. `fit` trains on one fold's training
/// rows; the second argument is the fold index.
pub fn cross_validate<C, F>(data: &Dataset, k: usize, seed: u64, mut fit: F) -> Result<EvalReport>
where
    C: Classifier,
    F: FnMut(&Dataset, usize) -> Result<C>,
{
    let mut pooled = ConfusionMatrix::new(data.n_classes());
    let mut folds = Vec::with_capacity(k);
    let mut rows = Vec::new();
    let mut scores = Vec::new();
    for (f, (train, test)) in stratified_kfold(data, k, seed)?.into_iter().enumerate() {
        let model = fit(&data.subset(&train), f)?;
        let (m, s) = score_split(&model, data, &test)?;
        pooled.add(&m);
        folds.push(m);
        rows.extend(test);
        scores.extend(s);
    }
    let mut report = EvalReport::from_matrix(data.classes.clone(), pooled);
    report.folds = folds;
    attach_roc(&mut report, data, &rows, &scores);
    Ok(report)
}

/// Trains on the non-held-out subjects and scores the held-out ones.
pub fn blind_test<C, F>(data: &Dataset, fraction: f64, seed: u64, fit: F) -> Result<EvalReport>
where
    C: Classifier,
    F: FnOnce(&Dataset) -> Result<C>,
{
    let (train, blind) = subject_holdout_split(data, fraction, seed)?;
    let model = fit(&data.subset(&train))?;
    let (m, scores) = score_split(&model, data, &blind)?;
    let mut report = EvalReport::from_matrix(data.classes.clone(), m);
    attach_roc(&mut report, data, &blind, &scores);
    let train_ids: BTreeSet<&String> = train.iter().map(|&i| &data.subjects[i]).collect();
    let blind_ids: BTreeSet<&String> = blind.iter().map(|&i| &data.subjects[i]).collect();
    report.subject_overlap = train_ids.intersection(&blind_ids).count();
    report.blind_subjects = blind_ids.into_iter().cloned().collect();
    Ok(report)
}
