//! Structural properties of splits, confusion matrices and ROC curves.

use std::collections::BTreeSet;

use lumisense::dataset::Dataset;
use lumisense::eval::{
    blind_subject_count, blind_test, confusion_and_accuracy, cross_validate, one_vs_rest, roc_auc,
    stratified_kfold, subject_holdout_split,
};
use lumisense::ml::{train, ModelConfig, ModelKind};
use proptest::prelude::*;

const AUC_TOL: f64 = 1e-12;

/// `classes` labels, `subjects` subject ids, rows dealt round-robin.
fn dataset(labels: &[usize], classes: usize, subjects: usize) -> Dataset {
    let features = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| vec![l as f64 + (i % 7) as f64 * 0.1, (i % 3) as f64])
        .collect();
    Dataset::new(
        features,
        labels.to_vec(),
        (0..classes).map(|c| format!("c{c}")).collect(),
        (0..labels.len())
            .map(|i| format!("S{:02}", i % subjects + 1))
            .collect(),
    )
    .unwrap()
}

/// Labels with every class present at least `min` times.
fn labels(classes: usize, min: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..classes, 0..60).prop_map(move |mut extra| {
        for c in 0..classes {
            extra.extend(std::iter::repeat_n(c, min));
        }
        extra
    })
}

fn scored() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    // small integer range so ties are common
    prop::collection::vec((0..8i32, any::<bool>()), 2..80)
        .prop_filter("both classes", |v| {
            v.iter().any(|p| p.1) && v.iter().any(|p| !p.1)
        })
        .prop_map(|v| v.into_iter().map(|(s, t)| (s as f64 / 4.0, t)).unzip())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn confusion_margins_match_counts(
        pairs in prop::collection::vec((0..4usize, 0..4usize), 1..100)
    ) {
        let (truth, pred): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let report = confusion_and_accuracy(&truth, &pred, 4).unwrap();
        let m = &report.matrix;
        for c in 0..4 {
            prop_assert_eq!(m.row_sums()[c], truth.iter().filter(|&&t| t == c).count());
            prop_assert_eq!(m.col_sums()[c], pred.iter().filter(|&&p| p == c).count());
        }
        let hits = truth.iter().zip(&pred).filter(|(t, p)| t == p).count();
        prop_assert_eq!(m.trace(), hits);
        prop_assert_eq!(m.total(), truth.len());
        prop_assert_eq!(report.accuracy, m.trace() as f64 / m.total() as f64);
    }

    #[test]
    fn auc_of_negated_scores_is_complement((scores, truth) in scored()) {
        let up = roc_auc(&scores, &truth).unwrap().auc;
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let down = roc_auc(&neg, &truth).unwrap().auc;
        prop_assert!((up + down - 1.0).abs() <= AUC_TOL, "{up} + {down}");
    }

    #[test]
    fn roc_is_monotone_from_corner_to_corner((scores, truth) in scored()) {
        let roc = roc_auc(&scores, &truth).unwrap();
        prop_assert_eq!(roc.points.first(), Some(&(0.0, 0.0)));
        prop_assert_eq!(roc.points.last(), Some(&(1.0, 1.0)));
        for w in roc.points.windows(2) {
            prop_assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1, "{:?}", w);
        }
        prop_assert!((0.0..=1.0).contains(&roc.auc));
    }

    #[test]
    fn folds_partition_and_stratify(ls in labels(3, 5), k in 2..6usize, seed in any::<u64>()) {
        let data = dataset(&ls, 3, 4);
        let folds = stratified_kfold(&data, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut seen = vec![0; data.len()];
        for (train, test) in &folds {
            let a: BTreeSet<_> = train.iter().collect();
            let b: BTreeSet<_> = test.iter().collect();
            prop_assert!(a.is_disjoint(&b));
            prop_assert_eq!(a.len() + b.len(), data.len());
            test.iter().for_each(|&i| seen[i] += 1);
        }
        prop_assert!(seen.iter().all(|&n| n == 1), "every row tested exactly once");
        let sizes: Vec<usize> = folds.iter().map(|f| f.1.len()).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for c in 0..3 {
            let per: Vec<usize> = folds
                .iter()
                .map(|(_, t)| t.iter().filter(|&&i| data.labels[i] == c).count())
                .collect();
            prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1, "class {c}: {per:?}");
        }
    }

    #[test]
    fn holdout_is_subject_disjoint(ls in labels(2, 20), subjects in 2..30usize, frac in 0.05..0.95f64, seed in any::<u64>()) {
        let data = dataset(&ls, 2, subjects);
        let (train, blind) = subject_holdout_split(&data, frac, seed).unwrap();
        prop_assert_eq!(train.len() + blind.len(), data.len());
        let a: BTreeSet<_> = train.iter().map(|&i| &data.subjects[i]).collect();
        let b: BTreeSet<_> = blind.iter().map(|&i| &data.subjects[i]).collect();
        prop_assert!(a.is_disjoint(&b));
        let distinct = data.distinct_subjects().len();
        prop_assert_eq!(b.len(), blind_subject_count(distinct, frac));
        prop_assert!(!a.is_empty());
    }

    #[test]
    fn one_vs_rest_relabels_exactly(ls in labels(3, 1)) {
        let data = dataset(&ls, 3, 3);
        let mut positives = 0;
        for (c, name) in data.classes.iter().enumerate() {
            let ovr = one_vs_rest(&data, name).unwrap();
            let count = ovr.labels.iter().filter(|&&l| l == 1).count();
            prop_assert_eq!(count, data.labels.iter().filter(|&&l| l == c).count());
            prop_assert_eq!(&ovr.features, &data.features);
            prop_assert_eq!(&ovr.subjects, &data.subjects);
            prop_assert_eq!(&one_vs_rest(&ovr, name).unwrap().labels, &ovr.labels);
            positives += count;
        }
        prop_assert_eq!(positives, data.len());
    }
}

#[test]
fn reports_keep_trace_over_total() {
    let ls: Vec<usize> = (0..90).map(|i| i % 3).collect();
    let data = dataset(&ls, 3, 9);
    let fit = |d: &Dataset| train(d, &ModelConfig::new(ModelKind::GaussianNb), 1);
    let cv = cross_validate(&data, 10, 1, |d, _| fit(d)).unwrap();
    let blind = blind_test(&data, 0.3, 1, fit).unwrap();
    for r in [&cv, &blind] {
        assert_eq!(
            r.accuracy,
            r.matrix.trace() as f64 / r.matrix.total() as f64
        );
    }
    assert_eq!(cv.matrix.total(), data.len());
    for (f, acc) in cv.folds.iter().zip(cv.fold_accuracies()) {
        assert_eq!(acc, f.trace() as f64 / f.total() as f64);
    }
    assert_eq!(blind.subject_overlap, 0);
}

#[test]
fn twenty_seven_subjects_hold_out_eight() {
    assert_eq!(blind_subject_count(27, 0.3), 8);
    let ls: Vec<usize> = (0..270).map(|i| i % 3).collect();
    let data = dataset(&ls, 3, 27);
    let (_, blind) = subject_holdout_split(&data, 0.3, 42).unwrap();
    let ids: BTreeSet<_> = blind.iter().map(|&i| &data.subjects[i]).collect();
    assert_eq!(ids.len(), 8);
}
