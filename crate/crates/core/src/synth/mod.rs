//! Seeded generators for labeled skeleton and face frames.
//!
//! Every subject draws from its own ChaCha stream (stream id = subject
//! index), so generation is reproducible per subject and independent of how
//! many subjects precede it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::face::FaceFrame;
use crate::geometry::Vec3;
use crate::skeleton::{Joint, SkeletonFrame};

mod face;
mod pose;

pub use face::{deform_face, face_dataset, gen_face_dataset, FaceGenConfig, LabeledFace};
pub use pose::{
    build_pose, gen_skeleton_dataset, posture_dataset, BodyDims, BodyRanges, LabeledSkeleton,
    PoseGenConfig, PoseParams,
};

/// Largest per-coordinate joint noise the pose generator accepts, meters.
pub const MAX_JOINT_NOISE: f64 = 0.1;
/// Largest per-coordinate landmark noise the face generator accepts, meters.
pub const MAX_LANDMARK_NOISE: f64 = 0.01;

pub(crate) fn subject_rng(seed: u64, subject: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(subject as u64 + 1);
    rng
}

pub(crate) fn subject_id(index: usize) -> String {
    format!("S{:02}", index + 1)
}

/// A frame that can be moved rigidly in the camera frame.
pub trait RigidFrame: Sized {
    /// The point rotations are taken about (spine joint, nose tip).
    fn pivot(&self) -> Vec3;
    fn map_points(&self, f: impl FnMut(Vec3) -> Vec3) -> Self;
}

impl RigidFrame for SkeletonFrame {
    fn pivot(&self) -> Vec3 {
        self.joint(Joint::Spine)
    }
    fn map_points(&self, f: impl FnMut(Vec3) -> Vec3) -> Self {
        self.map(f)
    }
}

impl RigidFrame for FaceFrame {
    fn pivot(&self) -> Vec3 {
        self.points[crate::face::NOSE_TIP]
    }
    fn map_points(&self, f: impl FnMut(Vec3) -> Vec3) -> Self {
        self.map(f)
    }
}

/// Rotates the frame about the vertical axis through its pivot by
/// `yaw_deg` (advancing XZ headings, so a skeleton's turn angle grows by
/// the same amount), then translates it.
pub fn perturb_camera<F: RigidFrame>(frame: &F, translation: Vec3, yaw_deg: f64) -> F {
    if yaw_deg == 0.0 {
        return frame.map_points(|p| p + translation);
    }
    let pivot = frame.pivot();
    frame.map_points(|p| (p - pivot).rotate_y(yaw_deg) + pivot + translation)
}

/// One noisy skeleton of class `label`, drawn as a single-subject dataset
/// with the default generator settings.
pub fn sample_skeleton(
    label: crate::skeleton::PostureLabel,
    seed: u64,
) -> crate::Result<SkeletonFrame> {
    let mut class_mix = [0.0; 3];
    class_mix[label.index()] = 1.0;
    let cfg = PoseGenConfig {
        subjects: 1,
        frames_per_subject: 1,
        class_mix,
        seed,
        ..PoseGenConfig::default()
    };
    Ok(gen_skeleton_dataset(&cfg)?.remove(0).frame)
}

/// One noisy face of class `label`, drawn like [`sample_skeleton`].
pub fn sample_face(label: crate::face::EmotionLabel, seed: u64) -> crate::Result<FaceFrame> {
    let mut class_mix = [0.0; 3];
    class_mix[label.index()] = 1.0;
    let cfg = FaceGenConfig {
        subjects: 1,
        frames_per_subject: 1,
        class_mix,
        seed,
        ..FaceGenConfig::default()
    };
    Ok(gen_face_dataset(&cfg)?.remove(0).frame)
}
