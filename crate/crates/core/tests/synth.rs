//! Generator contracts: reproducibility, class balance, subject ids and
//! label fidelity.

use std::collections::BTreeSet;

use lumisense::skeleton::rule_label_posture;
use lumisense::synth::{gen_face_dataset, gen_skeleton_dataset, FaceGenConfig, PoseGenConfig};

const MIXES: [[f64; 3]; 3] = [[1.0 / 3.0; 3], [0.5, 0.3, 0.2], [0.1, 0.1, 0.8]];
const BALANCE_SEEDS: u64 = 8;
const SIGMAS: f64 = 3.0;

fn within_binomial(counts: [usize; 3], mix: [f64; 3], n: usize) -> Result<(), String> {
    for c in 0..3 {
        let mean = n as f64 * mix[c];
        let sd = (n as f64 * mix[c] * (1.0 - mix[c])).sqrt();
        if (counts[c] as f64 - mean).abs() > SIGMAS * sd {
            return Err(format!(
                "class {c}: {} vs {mean:.1} +- {:.1}",
                counts[c],
                SIGMAS * sd
            ));
        }
    }
    Ok(())
}

#[test]
fn identical_configs_give_identical_streams() {
    let pose = PoseGenConfig {
        subjects: 6,
        frames_per_subject: 7,
        seed: 11,
        ..PoseGenConfig::default()
    };
    assert_eq!(
        gen_skeleton_dataset(&pose).unwrap(),
        gen_skeleton_dataset(&pose).unwrap()
    );
    let other = PoseGenConfig {
        seed: 12,
        ..pose.clone()
    };
    assert_ne!(
        gen_skeleton_dataset(&pose).unwrap(),
        gen_skeleton_dataset(&other).unwrap()
    );

    let face = FaceGenConfig {
        subjects: 6,
        frames_per_subject: 7,
        seed: 11,
        ..FaceGenConfig::default()
    };
    assert_eq!(
        gen_face_dataset(&face).unwrap(),
        gen_face_dataset(&face).unwrap()
    );
}

#[test]
fn earlier_subjects_do_not_change_with_more_subjects() {
    let small = PoseGenConfig {
        subjects: 3,
        frames_per_subject: 5,
        ..PoseGenConfig::default()
    };
    let big = PoseGenConfig {
        subjects: 9,
        ..small.clone()
    };
    let a = gen_skeleton_dataset(&small).unwrap();
    let b = gen_skeleton_dataset(&big).unwrap();
    assert_eq!(a[..], b[..a.len()]);
}

#[test]
fn class_counts_follow_the_mix() {
    for mix in MIXES {
        for seed in 0..BALANCE_SEEDS {
            let pose = PoseGenConfig {
                subjects: 10,
                frames_per_subject: 30,
                class_mix: mix,
                seed,
                ..PoseGenConfig::default()
            };
            let samples = gen_skeleton_dataset(&pose).unwrap();
            let mut counts = [0; 3];
            samples.iter().for_each(|s| counts[s.label.index()] += 1);
            within_binomial(counts, mix, samples.len())
                .unwrap_or_else(|e| panic!("pose mix {mix:?} seed {seed}: {e}"));

            let face = FaceGenConfig {
                subjects: 10,
                frames_per_subject: 30,
                class_mix: mix,
                seed,
                ..FaceGenConfig::default()
            };
            let samples = gen_face_dataset(&face).unwrap();
            let mut counts = [0; 3];
            samples.iter().for_each(|s| counts[s.label.index()] += 1);
            within_binomial(counts, mix, samples.len())
                .unwrap_or_else(|e| panic!("face mix {mix:?} seed {seed}: {e}"));
        }
    }
}

#[test]
fn subject_ids_match_the_configured_count() {
    for subjects in [1, 2, 7, 27] {
        let pose = PoseGenConfig {
            subjects,
            frames_per_subject: 4,
            ..PoseGenConfig::default()
        };
        let ids: BTreeSet<_> = gen_skeleton_dataset(&pose)
            .unwrap()
            .into_iter()
            .map(|s| s.frame.subject_id)
            .collect();
        assert_eq!(ids.len(), subjects);

        let face = FaceGenConfig {
            subjects,
            frames_per_subject: 4,
            ..FaceGenConfig::default()
        };
        let ids: BTreeSet<_> = gen_face_dataset(&face)
            .unwrap()
            .into_iter()
            .map(|s| s.frame.subject_id)
            .collect();
        assert_eq!(ids.len(), subjects);
    }
}

#[test]
fn noiseless_poses_carry_their_rule_label() {
    for seed in 0..5 {
        let cfg = PoseGenConfig {
            subjects: 10,
            frames_per_subject: 30,
            joint_noise: 0.0,
            turn_range: (-180.0, 180.0),
            seed,
            ..PoseGenConfig::default()
        };
        for s in gen_skeleton_dataset(&cfg).unwrap() {
            assert_eq!(
                rule_label_posture(&s.frame).unwrap(),
                s.label,
                "seed {seed}"
            );
        }
    }
}
