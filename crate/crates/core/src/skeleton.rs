//! Skeleton-frame geometry: spine-centric recentering, spherical joint
//! angles, the 31-dimensional posture feature vector and the rule labeler
//! used to annotate postures.

use std::fmt;
use std::str::FromStr;

use crate::geometry::{wrap_degrees, Vec3};
use crate::{Error, Result};

/// Norms below this are treated as zero-length bones / hip lines.
pub const DEGENERATE_EPS: f64 = 1e-9;

/// Knee-angle and knee-elevation threshold separating straight legs from
/// folded ones, degrees.
pub const KNEE_THRESHOLD_DEG: f64 = 140.0;
/// Torso inclination below which the torso counts as aligned with `+Y`.
pub const UPRIGHT_MAX_DEG: f64 = 30.0;
/// Torso inclination at or above which the torso lies in the XZ plane.
pub const LYING_MIN_DEG: f64 = 60.0;

/// The 20 tracked joints, in sensor stream order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Joint {
    HipCenter,
    Spine,
    ShoulderCenter,
    Head,
    ShoulderLeft,
    ElbowLeft,
    WristLeft,
    HandLeft,
    ShoulderRight,
    ElbowRight,
    WristRight,
    HandRight,
    HipLeft,
    KneeLeft,
    AnkleLeft,
    FootLeft,
    HipRight,
    KneeRight,
    AnkleRight,
    FootRight,
}

impl Joint {
    pub const COUNT: usize = 20;

    pub const ALL: [Joint; 20] = [
        Joint::HipCenter,
        Joint::Spine,
        Joint::ShoulderCenter,
        Joint::Head,
        Joint::ShoulderLeft,
        Joint::ElbowLeft,
        Joint::WristLeft,
        Joint::HandLeft,
        Joint::ShoulderRight,
        Joint::ElbowRight,
        Joint::WristRight,
        Joint::HandRight,
        Joint::HipLeft,
        Joint::KneeLeft,
        Joint::AnkleLeft,
        Joint::FootLeft,
        Joint::HipRight,
        Joint::KneeRight,
        Joint::AnkleRight,
        Joint::FootRight,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Third-degree joints (hands and feet) carry no posture information.
    pub fn is_redundant(self) -> bool {
        matches!(
            self,
            Joint::HandLeft | Joint::HandRight | Joint::FootLeft | Joint::FootRight
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Joint::HipCenter => "hip_center",
            Joint::Spine => "spine",
            Joint::ShoulderCenter => "shoulder_center",
            Joint::Head => "head",
            Joint::ShoulderLeft => "shoulder_left",
            Joint::ElbowLeft => "elbow_left",
            Joint::WristLeft => "wrist_left",
            Joint::HandLeft => "hand_left",
            Joint::ShoulderRight => "shoulder_right",
            Joint::ElbowRight => "elbow_right",
            Joint::WristRight => "wrist_right",
            Joint::HandRight => "hand_right",
            Joint::HipLeft => "hip_left",
            Joint::KneeLeft => "knee_left",
            Joint::AnkleLeft => "ankle_left",
            Joint::FootLeft => "foot_left",
            Joint::HipRight => "hip_right",
            Joint::KneeRight => "knee_right",
            Joint::AnkleRight => "ankle_right",
            Joint::FootRight => "foot_right",
        }
    }
}

/// Joints contributing a (theta, phi) pair to the posture vector, in
/// serialization order. Spine is the origin and the four redundant joints
/// are dropped.
pub const FEATURE_JOINTS: [Joint; 15] = [
    Joint::Head,
    Joint::ShoulderCenter,
    Joint::ShoulderLeft,
    Joint::ShoulderRight,
    Joint::ElbowLeft,
    Joint::ElbowRight,
    Joint::WristLeft,
    Joint::WristRight,
    Joint::HipCenter,
    Joint::HipLeft,
    Joint::HipRight,
    Joint::KneeLeft,
    Joint::KneeRight,
    Joint::AnkleLeft,
    Joint::AnkleRight,
];

pub const POSTURE_DIM: usize = 2 * FEATURE_JOINTS.len() + 1;

/// Column names of the posture vector: `<joint>_theta`, `<joint>_phi`, ..., `beta`.
pub fn posture_feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(POSTURE_DIM);
    for j in FEATURE_JOINTS {
        names.push(format!("{}_theta", j.name()));
        names.push(format!("{}_phi", j.name()));
    }
    names.push("beta".to_string());
    names
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonFrame {
    pub joints: [Vec3; Joint::COUNT],
    pub subject_id: String,
}

impl SkeletonFrame {
    pub fn new(joints: [Vec3; Joint::COUNT], subject_id: impl Into<String>) -> Self {
        Self {
            joints,
            subject_id: subject_id.into(),
        }
    }

    pub fn joint(&self, j: Joint) -> Vec3 {
        self.joints[j.index()]
    }

    pub fn set_joint(&mut self, j: Joint, p: Vec3) {
        self.joints[j.index()] = p;
    }

    pub fn validate(&self) -> Result<()> {
        match Joint::ALL.iter().find(|j| !self.joint(**j).is_finite()) {
            Some(j) => Err(Error::InvalidFrame(format!(
                "joint {} is not finite",
                j.name()
            ))),
            None => Ok(()),
        }
    }

    /// Applies `f` to every joint.
    pub fn map(&self, f: impl FnMut(Vec3) -> Vec3) -> SkeletonFrame {
        SkeletonFrame {
            joints: self.joints.map(f),
            subject_id: self.subject_id.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCoords {
    pub r: f64,
    /// Polar angle from `+Y`, degrees in `[0, 180]`.
    pub theta: f64,
    /// Azimuth from `+Z` toward `+X`, degrees in `(-180, 180]`.
    pub phi: f64,
}

/// Converts a spine-relative point to spherical coordinates about `+Y`.
///
/// Two-argument arctangents keep `theta` in `[0, 180]`: a joint straight
/// below the origin has `theta = 180`. The origin maps to all zeros.
pub fn to_spherical(p: Vec3) -> SphericalCoords {
    let r = p.norm();
    if r == 0.0 {
        return SphericalCoords {
            r: 0.0,
            theta: 0.0,
            phi: 0.0,
        };
    }
    let horizontal = (p.x * p.x + p.z * p.z).sqrt();
    let theta = horizontal.atan2(p.y).to_degrees();
    let phi = wrap_degrees(p.x.atan2(p.z).to_degrees());
    SphericalCoords { r, theta, phi }
}

pub fn from_spherical(s: SphericalCoords) -> Vec3 {
    let (st, ct) = s.theta.to_radians().sin_cos();
    let (sp, cp) = s.phi.to_radians().sin_cos();
    Vec3::new(s.r * st * sp, s.r * ct, s.r * st * cp)
}

/// Shifts the origin from the camera to the spine joint.
pub fn recenter_to_spine(frame: &SkeletonFrame) -> Result<SkeletonFrame> {
    frame.validate()?;
    let spine = frame.joint(Joint::Spine);
    Ok(frame.map(|p| p - spine))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn hip(self) -> Joint {
        match self {
            Side::Left => Joint::HipLeft,
            Side::Right => Joint::HipRight,
        }
    }
    fn knee(self) -> Joint {
        match self {
            Side::Left => Joint::KneeLeft,
            Side::Right => Joint::KneeRight,
        }
    }
    fn ankle(self) -> Joint {
        match self {
            Side::Left => Joint::AnkleLeft,
            Side::Right => Joint::AnkleRight,
        }
    }
}

/// Heading of the hip line (right hip minus left hip) in the XZ plane,
/// degrees in `(-180, 180]`. Zero when squarely facing the sensor.
pub fn turn_angle(frame: &SkeletonFrame) -> Result<f64> {
    let h = frame.joint(Joint::HipRight) - frame.joint(Joint::HipLeft);
    if h.x.hypot(h.z) < DEGENERATE_EPS {
        return Err(Error::DegeneratePose(
            "hip line has no horizontal extent".into(),
        ));
    }
    Ok(wrap_degrees(h.z.atan2(h.x).to_degrees()))
}

/// Hip-knee-ankle angle of one leg, degrees in `[0, 180]`.
pub fn knee_angle(frame: &SkeletonFrame, side: Side) -> Result<f64> {
    let knee = frame.joint(side.knee());
    let to_hip = frame.joint(side.hip()) - knee;
    let to_ankle = frame.joint(side.ankle()) - knee;
    vector_angle(to_hip, to_ankle).ok_or_else(|| {
        Error::DegeneratePose(format!("zero-length {:?} thigh or shin", side).to_lowercase())
    })
}

/// Polar angle of the knee about the spine, degrees in `[0, 180]`.
pub fn knee_elevation(frame: &SkeletonFrame, side: Side) -> Result<f64> {
    let knee = frame.joint(side.knee());
    if knee.norm() < DEGENERATE_EPS {
        return Err(Error::DegeneratePose("knee coincides with spine".into()));
    }
    Ok(to_spherical(knee).theta)
}

/// Angle between the spine-to-shoulder-center vector and `+Y`, degrees.
pub fn torso_inclination(frame: &SkeletonFrame) -> Result<f64> {
    let torso = frame.joint(Joint::ShoulderCenter) - frame.joint(Joint::Spine);
    vector_angle(torso, Vec3::new(0.0, 1.0, 0.0))
        .ok_or_else(|| Error::DegeneratePose("shoulder center coincides with spine".into()))
}

fn vector_angle(a: Vec3, b: Vec3) -> Option<f64> {
    let (na, nb) = (a.norm(), b.norm());
    if na < DEGENERATE_EPS || nb < DEGENERATE_EPS {
        return None;
    }
    let cos = (a.dot(b) / (na * nb)).clamp(-1.0, 1.0);
    Some(cos.acos().to_degrees())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegAngles {
    pub alpha_left: f64,
    pub alpha_right: f64,
    pub delta_left: f64,
    pub delta_right: f64,
    pub tau: f64,
}

impl LegAngles {
    pub fn mean_alpha(&self) -> f64 {
        0.5 * (self.alpha_left + self.alpha_right)
    }

    pub fn mean_delta(&self) -> f64 {
        0.5 * (self.delta_left + self.delta_right)
    }
}

/// Knee angles, knee elevations and torso inclination of a camera-frame
/// skeleton.
pub fn leg_angles(frame: &SkeletonFrame) -> Result<LegAngles> {
    let f = recenter_to_spine(frame)?;
    Ok(LegAngles {
        alpha_left: knee_angle(&f, Side::Left)?,
        alpha_right: knee_angle(&f, Side::Right)?,
        delta_left: knee_elevation(&f, Side::Left)?,
        delta_right: knee_elevation(&f, Side::Right)?,
        tau: torso_inclination(&f)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostureFeatures(pub [f64; POSTURE_DIM]);

impl PostureFeatures {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn beta(&self) -> f64 {
        self.0[POSTURE_DIM - 1]
    }

    pub fn theta(&self, joint_slot: usize) -> f64 {
        self.0[2 * joint_slot]
    }
}

/// The 31-dimensional posture vector: (theta, phi) of each of
/// [`FEATURE_JOINTS`] about the spine, then the turn angle. Radii are not
/// emitted.
pub fn posture_features(frame: &SkeletonFrame) -> Result<PostureFeatures> {
    let f = recenter_to_spine(frame)?;
    let mut out = [0.0; POSTURE_DIM];
    for (slot, joint) in FEATURE_JOINTS.iter().enumerate() {
        let p = f.joint(*joint);
        if p.norm() < DEGENERATE_EPS {
            log::warn!(
                "joint {} coincides with spine; emitting zero angles",
                joint.name()
            );
            continue;
        }
        let s = to_spherical(p);
        out[2 * slot] = s.theta;
        out[2 * slot + 1] = s.phi;
    }
    out[POSTURE_DIM - 1] = turn_angle(&f)?;
    Ok(PostureFeatures(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PostureLabel {
    Standing,
    Sitting,
    LyingDown,
}

impl PostureLabel {
    pub const ALL: [PostureLabel; 3] = [
        PostureLabel::Standing,
        PostureLabel::Sitting,
        PostureLabel::LyingDown,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            PostureLabel::Standing => "Standing",
            PostureLabel::Sitting => "Sitting",
            PostureLabel::LyingDown => "LyingDown",
        }
    }
}

impl fmt::Display for PostureLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PostureLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PostureLabel::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidClass(format!("unknown posture `{s}`")))
    }
}

/// Applies the labeling rules to precomputed angles.
///
/// Lying (torso in the XZ plane) takes precedence, then standing (straight
/// legs, upright torso), then sitting (folded legs). Poses matching none of
/// the rules go to the class whose thresholds are violated by the fewest
/// degrees, lowest class index on ties.
pub fn label_from_angles(a: &LegAngles) -> PostureLabel {
    let alpha = a.mean_alpha();
    let delta = a.mean_delta();
    if a.tau >= LYING_MIN_DEG {
        return PostureLabel::LyingDown;
    }
    if alpha > KNEE_THRESHOLD_DEG && delta > KNEE_THRESHOLD_DEG && a.tau < UPRIGHT_MAX_DEG {
        return PostureLabel::Standing;
    }
    if alpha < KNEE_THRESHOLD_DEG && delta < KNEE_THRESHOLD_DEG {
        return PostureLabel::Sitting;
    }
    let standing = (KNEE_THRESHOLD_DEG - alpha).max(0.0)
        + (KNEE_THRESHOLD_DEG - delta).max(0.0)
        + (a.tau - UPRIGHT_MAX_DEG).max(0.0);
    let sitting = (alpha - KNEE_THRESHOLD_DEG).max(0.0) + (delta - KNEE_THRESHOLD_DEG).max(0.0);
    let lying = LYING_MIN_DEG - a.tau;
    let violations = [standing, sitting, lying];
    let mut best = 0;
    for (i, v) in violations.iter().enumerate() {
        if *v < violations[best] {
            best = i;
        }
    }
    PostureLabel::ALL[best]
}

pub fn rule_label_posture(frame: &SkeletonFrame) -> Result<PostureLabel> {
    Ok(label_from_angles(&leg_angles(frame)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn blank() -> SkeletonFrame {
        SkeletonFrame::new([Vec3::ZERO; 20], "s")
    }

    #[test]
    fn joint_set_shape() {
        assert_eq!(Joint::ALL.len(), 20);
        assert_eq!(Joint::ALL.iter().filter(|j| j.is_redundant()).count(), 4);
        for (i, j) in Joint::ALL.iter().enumerate() {
            assert_eq!(j.index(), i);
        }
        assert!(!FEATURE_JOINTS.contains(&Joint::Spine));
        assert!(FEATURE_JOINTS.iter().all(|j| !j.is_redundant()));
        assert_eq!(posture_feature_names().len(), 31);
    }

    #[test]
    fn recenter_examples() {
        let mut f = blank();
        f.set_joint(Joint::Spine, Vec3::new(1.0, 2.0, 3.0));
        f.set_joint(Joint::Head, Vec3::new(1.0, 2.0, 3.0));
        let c = recenter_to_spine(&f).unwrap();
        assert_eq!(c.joint(Joint::Head), Vec3::ZERO);
        assert_eq!(c.joint(Joint::Spine), Vec3::ZERO);

        let mut f = blank();
        f.set_joint(Joint::Head, Vec3::new(0.1, 0.6, 0.0));
        assert_eq!(recenter_to_spine(&f).unwrap(), f);

        let mut f = blank();
        f.subject_id = "p7".into();
        f.set_joint(Joint::Spine, Vec3::new(0.5, -0.1, 2.0));
        f.set_joint(Joint::KneeRight, Vec3::new(0.7, -0.6, 2.1));
        let k = recenter_to_spine(&f).unwrap();
        let rk = k.joint(Joint::KneeRight);
        // componentwise oracle
        assert!(
            close(rk.x, 0.7 - 0.5, 1e-15)
                && close(rk.y, -0.6 + 0.1, 1e-15)
                && close(rk.z, 2.1 - 2.0, 1e-15)
        );
        assert!(close(rk.x, 0.2, 1e-12) && close(rk.y, -0.5, 1e-12) && close(rk.z, 0.1, 1e-12));
        assert_eq!(k.subject_id, "p7");
    }

    #[test]
    fn recenter_rejects_non_finite() {
        let mut f = blank();
        f.set_joint(Joint::ElbowLeft, Vec3::new(f64::NAN, 0.0, 0.0));
        assert!(matches!(recenter_to_spine(&f), Err(Error::InvalidFrame(_))));
        f.set_joint(Joint::ElbowLeft, Vec3::new(0.0, f64::INFINITY, 0.0));
        assert!(matches!(posture_features(&f), Err(Error::InvalidFrame(_))));
    }

    #[test]
    fn spherical_examples() {
        let s = to_spherical(Vec3::new(0.0, 1.0, 0.0));
        assert_eq!((s.r, s.theta, s.phi), (1.0, 0.0, 0.0));
        let s = to_spherical(Vec3::new(1.0, 0.0, 0.0));
        assert!(close(s.r, 1.0, 1e-15) && close(s.theta, 90.0, 1e-12) && close(s.phi, 90.0, 1e-12));
        let s = to_spherical(Vec3::new(1.0, 2.0, 2.0));
        // oracle: cos(theta) = y / r, tan(phi) = x / z with z > 0
        assert!(close(s.r, 3.0, 1e-15));
        assert!(close(s.theta, (2.0f64 / 3.0).acos().to_degrees(), 1e-12));
        assert!(close(s.phi, (0.5f64).atan().to_degrees(), 1e-12));
        assert!(close(s.theta, 48.190, 1e-3) && close(s.phi, 26.565, 1e-3));
        let s = to_spherical(Vec3::ZERO);
        assert_eq!((s.r, s.theta, s.phi), (0.0, 0.0, 0.0));
        let s = to_spherical(Vec3::new(0.0, -2.0, 0.0));
        assert_eq!(s.theta, 180.0);
        let s = to_spherical(Vec3::new(-0.0, 0.0, -1.0));
        assert_eq!(s.phi, 180.0);
    }

    fn hips(rh: Vec3, lh: Vec3) -> SkeletonFrame {
        let mut f = blank();
        f.set_joint(Joint::HipRight, rh);
        f.set_joint(Joint::HipLeft, lh);
        f
    }

    #[test]
    fn turn_angle_examples() {
        let b = turn_angle(&hips(Vec3::new(0.15, 0.0, 0.0), Vec3::new(-0.15, 0.0, 0.0))).unwrap();
        assert_eq!(b, 0.0);
        let b = turn_angle(&hips(Vec3::new(0.0, 0.0, 0.15), Vec3::new(0.0, 0.0, -0.15))).unwrap();
        assert!(close(b, 90.0, 1e-12));
        let b = turn_angle(&hips(Vec3::new(0.1, 0.0, 0.1), Vec3::new(-0.1, 0.0, -0.1))).unwrap();
        assert!(close(b, (1.0f64).atan().to_degrees(), 1e-12));
        assert!(close(b, 45.0, 1e-12));
        let e = turn_angle(&hips(Vec3::new(0.0, -0.1, 0.0), Vec3::new(0.0, 0.1, 0.0)));
        assert!(matches!(e, Err(Error::DegeneratePose(_))));
    }

    fn leg(hip: Vec3, knee: Vec3, ankle: Vec3) -> SkeletonFrame {
        let mut f = blank();
        f.set_joint(Joint::HipRight, hip);
        f.set_joint(Joint::KneeRight, knee);
        f.set_joint(Joint::AnkleRight, ankle);
        f
    }

    #[test]
    fn knee_angle_examples() {
        let k = Vec3::new(0.1, -0.5, 0.0);
        let a = knee_angle(
            &leg(
                k + Vec3::new(0.0, 0.4, 0.0),
                k,
                k + Vec3::new(0.0, -0.45, 0.0),
            ),
            Side::Right,
        )
        .unwrap();
        assert!(close(a, 180.0, 1e-12));
        let a = knee_angle(
            &leg(
                k + Vec3::new(0.0, 0.4, 0.0),
                k,
                k + Vec3::new(0.45, 0.0, 0.0),
            ),
            Side::Right,
        )
        .unwrap();
        assert!(close(a, 90.0, 1e-12));

        let kh = Vec3::new(0.1, 0.4, 0.0);
        let ka = Vec3::new(0.1, -0.4, 0.05);
        let a = knee_angle(&leg(k + kh, k, k + ka), Side::Right).unwrap();
        // brute-force oracle: law of cosines on the triangle hip-knee-ankle
        let (b, c) = (kh.norm(), ka.norm());
        let opp = (kh - ka).norm();
        let expected = ((b * b + c * c - opp * opp) / (2.0 * b * c))
            .acos()
            .to_degrees();
        assert!(close(a, expected, 1e-9), "{a} vs {expected}");

        let e = knee_angle(&leg(k, k, k + ka), Side::Right);
        assert!(matches!(e, Err(Error::DegeneratePose(_))));
    }

    #[test]
    fn knee_elevation_examples() {
        let mut f = blank();
        f.set_joint(Joint::KneeLeft, Vec3::new(0.0, -0.5, 0.0));
        assert_eq!(knee_elevation(&f, Side::Left).unwrap(), 180.0);
        f.set_joint(Joint::KneeLeft, Vec3::new(0.3, 0.0, 0.3));
        assert!(close(knee_elevation(&f, Side::Left).unwrap(), 90.0, 1e-12));
        f.set_joint(Joint::KneeLeft, Vec3::new(0.1, -0.35, 0.3));
        let d = knee_elevation(&f, Side::Left).unwrap();
        let expected = 180.0
            - ((0.1f64 * 0.1 + 0.3 * 0.3).sqrt() / 0.35)
                .atan()
                .to_degrees();
        assert!(close(d, expected, 1e-12));
        assert!(close(d, 137.9, 0.05));
        f.set_joint(Joint::KneeLeft, Vec3::ZERO);
        assert!(matches!(
            knee_elevation(&f, Side::Left),
            Err(Error::DegeneratePose(_))
        ));
    }

    #[test]
    fn torso_examples() {
        let mut f = blank();
        f.set_joint(Joint::ShoulderCenter, Vec3::new(0.0, 0.5, 0.0));
        assert_eq!(torso_inclination(&f).unwrap(), 0.0);
        f.set_joint(Joint::ShoulderCenter, Vec3::new(0.5, 0.0, 0.0));
        assert!(close(torso_inclination(&f).unwrap(), 90.0, 1e-12));
        f.set_joint(Joint::ShoulderCenter, Vec3::new(0.1, 0.45, 0.1));
        let t = torso_inclination(&f).unwrap();
        let expected = ((0.02f64).sqrt()).atan2(0.45).to_degrees();
        assert!(close(t, expected, 1e-12));
        assert!(close(t, 17.5, 0.1));
        f.set_joint(Joint::ShoulderCenter, Vec3::ZERO);
        assert!(matches!(
            torso_inclination(&f),
            Err(Error::DegeneratePose(_))
        ));
    }

    fn angles(alpha: f64, delta: f64, tau: f64) -> LegAngles {
        LegAngles {
            alpha_left: alpha,
            alpha_right: alpha,
            delta_left: delta,
            delta_right: delta,
            tau,
        }
    }

    #[test]
    fn rule_examples() {
        assert_eq!(
            label_from_angles(&angles(170.0, 165.0, 5.0)),
            PostureLabel::Standing
        );
        assert_eq!(
            label_from_angles(&angles(95.0, 100.0, 10.0)),
            PostureLabel::Sitting
        );
        assert_eq!(
            label_from_angles(&angles(170.0, 165.0, 88.0)),
            PostureLabel::LyingDown
        );
        assert_eq!(
            label_from_angles(&angles(95.0, 100.0, 88.0)),
            PostureLabel::LyingDown
        );
    }

    #[test]
    fn rule_fallback() {
        // straight knees, knees raised: 10 deg from standing, 30 from sitting
        assert_eq!(
            label_from_angles(&angles(170.0, 130.0, 5.0)),
            PostureLabel::Standing
        );
        // folded knees hanging low: 20 from standing, 5 from sitting
        assert_eq!(
            label_from_angles(&angles(120.0, 145.0, 5.0)),
            PostureLabel::Sitting
        );
        // leaning torso with straight legs: standing violated by 25, lying by 5
        assert_eq!(
            label_from_angles(&angles(170.0, 170.0, 55.0)),
            PostureLabel::LyingDown
        );
        // exact tie between standing and sitting goes to the lower index
        assert_eq!(
            label_from_angles(&angles(150.0, 130.0, 0.0)),
            PostureLabel::Standing
        );
    }

    #[test]
    fn posture_label_parse() {
        assert_eq!(
            "lyingdown".parse::<PostureLabel>().unwrap(),
            PostureLabel::LyingDown
        );
        assert!("crouching".parse::<PostureLabel>().is_err());
    }
}
