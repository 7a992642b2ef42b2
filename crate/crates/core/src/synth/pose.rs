use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Normal;

use super::{perturb_camera, subject_id, subject_rng, MAX_JOINT_NOISE};
use crate::dataset::{posture_classes, Dataset};
use crate::geometry::Vec3;
use crate::skeleton::{
    label_from_angles, leg_angles, posture_feature_names, posture_features, Joint, LegAngles,
    PostureLabel, SkeletonFrame, KNEE_THRESHOLD_DEG, LYING_MIN_DEG, UPRIGHT_MAX_DEG,
};
use crate::{Error, Result};

/// Degrees every noiseless generated pose sits inside its class's rule
/// thresholds.
pub const CLASS_MARGIN_DEG: f64 = 10.0;

const MAX_RESAMPLES: usize = 64;

/// Per-subject bone lengths, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyDims {
    pub torso: f64,
    pub neck: f64,
    pub pelvis: f64,
    pub hip_half_width: f64,
    pub shoulder_half_width: f64,
    pub upper_arm: f64,
    pub forearm: f64,
    pub thigh: f64,
    pub shin: f64,
}

impl Default for BodyDims {
    fn default() -> Self {
        BodyDims {
            torso: 0.30,
            neck: 0.20,
            pelvis: 0.08,
            hip_half_width: 0.10,
            shoulder_half_width: 0.18,
            upper_arm: 0.29,
            forearm: 0.25,
            thigh: 0.44,
            shin: 0.42,
        }
    }
}

/// Sampling ranges for [`BodyDims`], meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyRanges {
    pub torso: (f64, f64),
    pub neck: (f64, f64),
    pub pelvis: (f64, f64),
    pub hip_half_width: (f64, f64),
    pub shoulder_half_width: (f64, f64),
    pub upper_arm: (f64, f64),
    pub forearm: (f64, f64),
    pub thigh: (f64, f64),
    pub shin: (f64, f64),
}

impl Default for BodyRanges {
    fn default() -> Self {
        BodyRanges {
            torso: (0.26, 0.34),
            neck: (0.17, 0.23),
            pelvis: (0.06, 0.10),
            hip_half_width: (0.08, 0.12),
            shoulder_half_width: (0.15, 0.21),
            upper_arm: (0.26, 0.33),
            forearm: (0.22, 0.28),
            thigh: (0.39, 0.49),
            shin: (0.37, 0.47),
        }
    }
}

impl BodyRanges {
    fn all(&self) -> [(&'static str, (f64, f64)); 9] {
        [
            ("torso", self.torso),
            ("neck", self.neck),
            ("pelvis", self.pelvis),
            ("hip_half_width", self.hip_half_width),
            ("shoulder_half_width", self.shoulder_half_width),
            ("upper_arm", self.upper_arm),
            ("forearm", self.forearm),
            ("thigh", self.thigh),
            ("shin", self.shin),
        ]
    }

    fn sample(&self, rng: &mut impl Rng) -> BodyDims {
        let mut u = |(lo, hi): (f64, f64)| {
            if hi > lo {
                rng.random_range(lo..=hi)
            } else {
                lo
            }
        };
        BodyDims {
            torso: u(self.torso),
            neck: u(self.neck),
            pelvis: u(self.pelvis),
            hip_half_width: u(self.hip_half_width),
            shoulder_half_width: u(self.shoulder_half_width),
            upper_arm: u(self.upper_arm),
            forearm: u(self.forearm),
            thigh: u(self.thigh),
            shin: u(self.shin),
        }
    }
}

/// Joint angles of a body-local pose, degrees.
///
/// The body frame has the spine at the origin, `+X` to the subject's right,
/// `+Y` up and the subject facing `-Z` (toward the sensor).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseParams {
    /// Thigh swing forward from hanging straight down, per leg (left, right).
    pub hip_flexion: (f64, f64),
    /// Knee bend away from a straight leg, per leg (left, right).
    pub knee_flexion: (f64, f64),
    /// Forward (positive) or backward lean of the upper body.
    pub torso_lean: f64,
    /// Arm swing forward, abduction outward and elbow bend, shared by both arms.
    pub arm_flexion: f64,
    pub arm_abduction: f64,
    pub elbow_flexion: f64,
    /// Whole-body tilt about the left-right axis; +-90 lies flat.
    pub recline: f64,
    /// Whole-body turn about the vertical axis; becomes the turn angle.
    pub turn: f64,
}

impl Default for PoseParams {
    fn default() -> Self {
        PoseParams {
            hip_flexion: (0.0, 0.0),
            knee_flexion: (0.0, 0.0),
            torso_lean: 0.0,
            arm_flexion: 0.0,
            arm_abduction: 10.0,
            elbow_flexion: 10.0,
            recline: 0.0,
            turn: 0.0,
        }
    }
}

/// Builds a spine-centered skeleton from bone lengths and joint angles.
pub fn build_pose(dims: &BodyDims, params: &PoseParams, subject: &str) -> SkeletonFrame {
    let mut f = SkeletonFrame::new([Vec3::ZERO; Joint::COUNT], subject);
    // rotate_x by a positive angle swings a hanging limb forward (-Z)
    let down = Vec3::new(0.0, -1.0, 0.0);
    // leaning forward carries +Y toward the subject's front (-Z)
    let lean = |v: Vec3| v.rotate_x(-params.torso_lean);

    let shoulder_center = lean(Vec3::new(0.0, dims.torso, 0.0));
    f.set_joint(Joint::ShoulderCenter, shoulder_center);
    f.set_joint(
        Joint::Head,
        shoulder_center + lean(Vec3::new(0.0, dims.neck, -0.02)),
    );
    let hip_center = Vec3::new(0.0, -dims.pelvis, 0.0);
    f.set_joint(Joint::HipCenter, hip_center);

    let arm_dir = |sign: f64, extra: f64| {
        down.rotate_z(sign * params.arm_abduction)
            .rotate_x(params.arm_flexion + extra)
    };
    let arms = [
        (
            -1.0,
            Joint::ShoulderLeft,
            Joint::ElbowLeft,
            Joint::WristLeft,
            Joint::HandLeft,
        ),
        (
            1.0,
            Joint::ShoulderRight,
            Joint::ElbowRight,
            Joint::WristRight,
            Joint::HandRight,
        ),
    ];
    for (sign, shoulder, elbow, wrist, hand) in arms {
        // abduction swings the arm away from the body's midline
        let s = shoulder_center + lean(Vec3::new(sign * dims.shoulder_half_width, -0.03, 0.0));
        let e = s + lean(arm_dir(sign, 0.0)) * dims.upper_arm;
        let fore = lean(arm_dir(sign, params.elbow_flexion));
        let w = e + fore * dims.forearm;
        f.set_joint(shoulder, s);
        f.set_joint(elbow, e);
        f.set_joint(wrist, w);
        f.set_joint(hand, w + fore * 0.08);
    }

    let legs = [
        (
            -1.0,
            params.hip_flexion.0,
            params.knee_flexion.0,
            Joint::HipLeft,
            Joint::KneeLeft,
            Joint::AnkleLeft,
            Joint::FootLeft,
        ),
        (
            1.0,
            params.hip_flexion.1,
            params.knee_flexion.1,
            Joint::HipRight,
            Joint::KneeRight,
            Joint::AnkleRight,
            Joint::FootRight,
        ),
    ];
    for (sign, flex, bend, hip, knee, ankle, foot) in legs {
        let h = hip_center + Vec3::new(sign * dims.hip_half_width, 0.0, 0.0);
        let k = h + down.rotate_x(flex) * dims.thigh;
        let a = k + down.rotate_x(flex - bend) * dims.shin;
        f.set_joint(hip, h);
        f.set_joint(knee, k);
        f.set_joint(ankle, a);
        f.set_joint(foot, a + Vec3::new(0.0, -0.04, -0.10));
    }

    f.map(|p| p.rotate_x(params.recline).rotate_y(params.turn))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseGenConfig {
    pub subjects: usize,
    pub frames_per_subject: usize,
    /// Sampling weights for (Standing, Sitting, LyingDown); must sum to 1.
    pub class_mix: [f64; 3],
    /// Per-coordinate Gaussian joint noise, meters.
    pub joint_noise: f64,
    pub body: BodyRanges,
    /// Turn about the vertical axis, degrees.
    pub turn_range: (f64, f64),
    /// Camera-frame position of the spine, meters, per axis.
    pub offset_x: (f64, f64),
    pub offset_y: (f64, f64),
    pub offset_z: (f64, f64),
    pub seed: u64,
}

impl Default for PoseGenConfig {
    fn default() -> Self {
        PoseGenConfig {
            subjects: 27,
            frames_per_subject: 20,
            class_mix: [1.0 / 3.0; 3],
            joint_noise: 0.02,
            body: BodyRanges::default(),
            turn_range: (-45.0, 45.0),
            offset_x: (-1.0, 1.0),
            offset_y: (-0.4, 0.4),
            offset_z: (1.8, 3.8),
            seed: 42,
        }
    }
}

impl PoseGenConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InfeasibleConfig(m));
        if self.subjects == 0 || self.frames_per_subject == 0 {
            return bad("subject and frame counts must be at least 1".into());
        }
        if !(self.joint_noise >= 0.0 && self.joint_noise <= MAX_JOINT_NOISE) {
            return bad(format!(
                "joint noise {} m outside [0, {MAX_JOINT_NOISE}]; poses could not keep a {CLASS_MARGIN_DEG} degree class margin",
                self.joint_noise
            ));
        }
        if self.class_mix.iter().any(|w| w.is_nan() || *w < 0.0)
            || (self.class_mix.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return bad(format!(
                "class mix {:?} must be non-negative and sum to 1",
                self.class_mix
            ));
        }
        let ranges = [
            ("turn", self.turn_range),
            ("offset_x", self.offset_x),
            ("offset_y", self.offset_y),
            ("offset_z", self.offset_z),
        ];
        for (name, (lo, hi)) in ranges.into_iter().chain(self.body.all()) {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad(format!(
                    "range {name} = ({lo}, {hi}) is not an ordered finite interval"
                ));
            }
        }
        if self.body.all().iter().any(|(_, (lo, _))| *lo <= 0.0) {
            return bad("bone lengths must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSkeleton {
    pub frame: SkeletonFrame,
    pub label: PostureLabel,
}

/// True when the angles sit at least [`CLASS_MARGIN_DEG`] inside `label`'s rule.
fn inside_margin(a: &LegAngles, label: PostureLabel) -> bool {
    let m = CLASS_MARGIN_DEG;
    let (alpha, delta) = (a.mean_alpha(), a.mean_delta());
    match label {
        PostureLabel::Standing => {
            alpha >= KNEE_THRESHOLD_DEG + m
                && delta >= KNEE_THRESHOLD_DEG + m
                && a.tau <= UPRIGHT_MAX_DEG - m
        }
        PostureLabel::Sitting => {
            alpha <= KNEE_THRESHOLD_DEG - m
                && delta <= KNEE_THRESHOLD_DEG - m
                && a.tau <= LYING_MIN_DEG - m
        }
        PostureLabel::LyingDown => a.tau >= LYING_MIN_DEG + m,
    }
}

fn sample_params(label: PostureLabel, rng: &mut impl Rng) -> PoseParams {
    let mut u = |lo: f64, hi: f64| rng.random_range(lo..=hi);
    let mut p = PoseParams {
        arm_flexion: u(-10.0, 40.0),
        arm_abduction: u(5.0, 25.0),
        elbow_flexion: u(0.0, 90.0),
        ..PoseParams::default()
    };
    match label {
        PostureLabel::Standing => {
            p.hip_flexion = (u(-5.0, 10.0), u(-5.0, 10.0));
            p.knee_flexion = (u(0.0, 15.0), u(0.0, 15.0));
            p.torso_lean = u(-5.0, 10.0);
        }
        PostureLabel::Sitting => {
            let (hl, hr) = (u(75.0, 100.0), u(75.0, 100.0));
            p.hip_flexion = (hl, hr);
            p.knee_flexion = (hl + u(-15.0, 20.0), hr + u(-15.0, 20.0));
            p.torso_lean = u(-15.0, 20.0);
        }
        PostureLabel::LyingDown => {
            p.hip_flexion = (u(0.0, 30.0), u(0.0, 30.0));
            p.knee_flexion = (u(0.0, 40.0), u(0.0, 40.0));
            let tilt = u(75.0, 105.0);
            p.recline = if u(0.0, 1.0) < 0.5 { tilt } else { -tilt };
        }
    }
    p
}

/// Generates `subjects * frames_per_subject` labeled skeletons.
///
/// Each noiseless pose is resampled until it sits at least
/// [`CLASS_MARGIN_DEG`] inside its class's rule thresholds, then turned,
/// placed in the camera frame and perturbed with joint noise.
pub fn gen_skeleton_dataset(cfg: &PoseGenConfig) -> Result<Vec<LabeledSkeleton>> {
    cfg.validate()?;
    let classes =
        WeightedIndex::new(cfg.class_mix).map_err(|e| Error::InfeasibleConfig(e.to_string()))?;
    let noise =
        Normal::new(0.0, cfg.joint_noise).map_err(|e| Error::InfeasibleConfig(e.to_string()))?;
    let mut out = Vec::with_capacity(cfg.subjects * cfg.frames_per_subject);
    for s in 0..cfg.subjects {
        let mut rng = subject_rng(cfg.seed, s);
        let id = subject_id(s);
        let dims = cfg.body.sample(&mut rng);
        for _ in 0..cfg.frames_per_subject {
            let label = PostureLabel::ALL[classes.sample(&mut rng)];
            let mut accepted = None;
            for _ in 0..MAX_RESAMPLES {
                let params = sample_params(label, &mut rng);
                let pose = build_pose(&dims, &params, &id);
                let angles = leg_angles(&pose)?;
                if inside_margin(&angles, label) && label_from_angles(&angles) == label {
                    accepted = Some(pose);
                    break;
                }
            }
            let pose = accepted.ok_or_else(|| {
                Error::InfeasibleConfig(format!(
                    "could not place a {label} pose {CLASS_MARGIN_DEG} degrees inside its thresholds with these body ranges"
                ))
            })?;
            let turn = rng.random_range(cfg.turn_range.0..=cfg.turn_range.1);
            let offset = Vec3::new(
                rng.random_range(cfg.offset_x.0..=cfg.offset_x.1),
                rng.random_range(cfg.offset_y.0..=cfg.offset_y.1),
                rng.random_range(cfg.offset_z.0..=cfg.offset_z.1),
            );
            let mut frame = perturb_camera(&pose, offset, turn);
            if cfg.joint_noise > 0.0 {
                frame = frame.map(|p| {
                    p + Vec3::new(
                        noise.sample(&mut rng),
                        noise.sample(&mut rng),
                        noise.sample(&mut rng),
                    )
                });
            }
            out.push(LabeledSkeleton { frame, label });
        }
    }
    Ok(out)
}

/// Extracts posture features into a dataset with the posture class list.
pub fn posture_dataset(samples: &[LabeledSkeleton]) -> Result<Dataset> {
    let mut features = Vec::with_capacity(samples.len());
    for s in samples {
        features.push(posture_features(&s.frame)?.0.to_vec());
    }
    Dataset::new(
        features,
        samples.iter().map(|s| s.label.index()).collect(),
        posture_classes(),
        samples.iter().map(|s| s.frame.subject_id.clone()).collect(),
    )?
    .with_feature_names(posture_feature_names())
}
