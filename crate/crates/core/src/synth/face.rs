use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Normal;

use super::{subject_id, subject_rng, MAX_LANDMARK_NOISE};
use crate::dataset::{emotion_classes, Dataset};
use crate::face::{
    emotion_feature_names, emotion_features, EmotionLabel, FaceFrame, NOSE_TIP, SELECTED,
};
use crate::geometry::Vec3;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FaceGenConfig {
    pub subjects: usize,
    pub frames_per_subject: usize,
    /// Sampling weights for (Comfortable, Neutral, Uncomfortable).
    pub class_mix: [f64; 3],
    /// Expression intensity ranges per class, same order as `class_mix`.
    pub intensity: [(f64, f64); 3],
    /// Per-coordinate Gaussian landmark noise, meters.
    pub landmark_noise: f64,
    /// Per-subject uniform face scale.
    pub face_scale: (f64, f64),
    /// Per-subject, per-landmark identity offsets (Gaussian sigma), meters.
    pub identity_jitter: f64,
    /// Head yaw / pitch / roll about the nose tip, degrees.
    pub yaw_range: (f64, f64),
    pub pitch_range: (f64, f64),
    pub roll_range: (f64, f64),
    /// Camera-frame nose-tip position, meters, per axis.
    pub offset_x: (f64, f64),
    pub offset_y: (f64, f64),
    pub offset_z: (f64, f64),
    pub seed: u64,
}

impl Default for FaceGenConfig {
    fn default() -> Self {
        FaceGenConfig {
            subjects: 31,
            frames_per_subject: 10,
            class_mix: [1.0 / 3.0; 3],
            intensity: [(0.5, 1.0), (0.0, 0.0), (0.5, 1.0)],
            landmark_noise: 0.002,
            face_scale: (0.95, 1.05),
            identity_jitter: 0.001,
            yaw_range: (-25.0, 25.0),
            pitch_range: (-10.0, 10.0),
            roll_range: (-10.0, 10.0),
            offset_x: (-0.5, 0.5),
            offset_y: (-0.3, 0.3),
            offset_z: (1.2, 2.5),
            seed: 42,
        }
    }
}

impl FaceGenConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InfeasibleConfig(m));
        if self.subjects == 0 || self.frames_per_subject == 0 {
            return bad("subject and frame counts must be at least 1".into());
        }
        if !(self.landmark_noise >= 0.0 && self.landmark_noise <= MAX_LANDMARK_NOISE) {
            return bad(format!(
                "landmark noise {} m outside [0, {MAX_LANDMARK_NOISE}]",
                self.landmark_noise
            ));
        }
        if !(self.identity_jitter >= 0.0 && self.identity_jitter <= MAX_LANDMARK_NOISE) {
            return bad(format!(
                "identity jitter {} m outside [0, {MAX_LANDMARK_NOISE}]",
                self.identity_jitter
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
        let named = [
            ("face_scale", self.face_scale),
            ("yaw", self.yaw_range),
            ("pitch", self.pitch_range),
            ("roll", self.roll_range),
            ("offset_x", self.offset_x),
            ("offset_y", self.offset_y),
            ("offset_z", self.offset_z),
        ];
        for (name, (lo, hi)) in named
            .into_iter()
            .chain(self.intensity.iter().map(|r| ("intensity", *r)))
        {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad(format!(
                    "range {name} = ({lo}, {hi}) is not an ordered finite interval"
                ));
            }
        }
        if self.face_scale.0 <= 0.0 {
            return bad("face scale must be positive".into());
        }
        if self.intensity.iter().any(|(lo, _)| *lo < 0.0) {
            return bad("expression intensity must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFace {
    pub frame: FaceFrame,
    pub label: EmotionLabel,
}

/// Applies a mirror-symmetric expression to a nose-centered face.
///
/// Comfortable raises and widens the mouth corners, lifts the cheeks and
/// relaxes the brows upward. Uncomfortable lowers and draws in the brows
/// and presses the lips together. Neutral, or zero intensity, is the
/// identity.
pub fn deform_face(face: &FaceFrame, label: EmotionLabel, intensity: f64) -> FaceFrame {
    let mut out = face.clone();
    if intensity == 0.0 || label == EmotionLabel::Neutral {
        return out;
    }
    let s = intensity;
    // (right, left) pairs; dx is outward on the right side
    let mut shift = |pairs: &[(usize, usize)], dx: f64, dy: f64, dz: f64| {
        for &(r, l) in pairs {
            out.points[r] = out.points[r] + Vec3::new(dx, dy, dz);
            out.points[l] = out.points[l] + Vec3::new(-dx, dy, dz);
        }
    };
    let corners = [SELECTED.pairs[4], SELECTED.pairs[9]];
    let upper_lip = [SELECTED.pairs[5], SELECTED.pairs[6]];
    let lower_lip = [SELECTED.pairs[7], SELECTED.pairs[8]];
    match label {
        EmotionLabel::Comfortable => {
            shift(&corners, 0.005 * s, 0.007 * s, 0.0);
            shift(&upper_lip, 0.002 * s, 0.002 * s, 0.0);
            shift(&lower_lip, 0.002 * s, 0.003 * s, 0.0);
            shift(SELECTED.cheek_pairs(), 0.001 * s, 0.004 * s, -0.001 * s);
            shift(SELECTED.brow_pairs(), 0.0, 0.002 * s, 0.0);
        }
        EmotionLabel::Uncomfortable => {
            shift(SELECTED.brow_pairs(), -0.005 * s, -0.005 * s, 0.0);
            shift(&corners, -0.004 * s, -0.002 * s, 0.0);
            shift(&upper_lip, -0.001 * s, -0.003 * s, 0.0);
            shift(&lower_lip, -0.001 * s, 0.004 * s, 0.0);
            for &i in &SELECTED.nose_sides {
                out.points[i] = out.points[i] + Vec3::new(0.0, 0.001 * s, 0.0);
            }
        }
        EmotionLabel::Neutral => {}
    }
    out
}

fn range(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Generates `subjects * frames_per_subject` labeled faces.
///
/// Per subject the template is scaled and given fixed identity offsets;
/// per frame an expression of sampled intensity is applied, the head is
/// rotated about the nose tip and placed in the camera frame, and landmark
/// noise is added.
pub fn gen_face_dataset(cfg: &FaceGenConfig) -> Result<Vec<LabeledFace>> {
    cfg.validate()?;
    let classes =
        WeightedIndex::new(cfg.class_mix).map_err(|e| Error::InfeasibleConfig(e.to_string()))?;
    let noise =
        Normal::new(0.0, cfg.landmark_noise).map_err(|e| Error::InfeasibleConfig(e.to_string()))?;
    let jitter = Normal::new(0.0, cfg.identity_jitter)
        .map_err(|e| Error::InfeasibleConfig(e.to_string()))?;
    let template = FaceFrame::template();
    let mut out = Vec::with_capacity(cfg.subjects * cfg.frames_per_subject);
    for s in 0..cfg.subjects {
        let mut rng = subject_rng(cfg.seed ^ 0xFACE, s);
        let id = subject_id(s);
        let scale = range(&mut rng, cfg.face_scale);
        let mut identity = template.map(|p| p * scale);
        identity.subject_id = id.clone();
        if cfg.identity_jitter > 0.0 {
            for (i, p) in identity.points.iter_mut().enumerate() {
                if i != NOSE_TIP {
                    *p = *p
                        + Vec3::new(
                            jitter.sample(&mut rng),
                            jitter.sample(&mut rng),
                            jitter.sample(&mut rng),
                        );
                }
            }
        }
        for _ in 0..cfg.frames_per_subject {
            let k = classes.sample(&mut rng);
            let label = EmotionLabel::ALL[k];
            let intensity = range(&mut rng, cfg.intensity[k]);
            let (yaw, pitch, roll) = (
                range(&mut rng, cfg.yaw_range),
                range(&mut rng, cfg.pitch_range),
                range(&mut rng, cfg.roll_range),
            );
            let offset = Vec3::new(
                range(&mut rng, cfg.offset_x),
                range(&mut rng, cfg.offset_y),
                range(&mut rng, cfg.offset_z),
            );
            let expressed = deform_face(&identity, label, intensity);
            let mut frame =
                expressed.map(|p| p.rotate_z(roll).rotate_x(pitch).rotate_y(yaw) + offset);
            if cfg.landmark_noise > 0.0 {
                frame = frame.map(|p| {
                    p + Vec3::new(
                        noise.sample(&mut rng),
                        noise.sample(&mut rng),
                        noise.sample(&mut rng),
                    )
                });
            }
            out.push(LabeledFace { frame, label });
        }
    }
    Ok(out)
}

pub fn face_dataset(samples: &[LabeledFace]) -> Result<Dataset> {
    let mut features = Vec::with_capacity(samples.len());
    for s in samples {
        features.push(emotion_features(&s.frame)?.0.to_vec());
    }
    Dataset::new(
        features,
        samples.iter().map(|s| s.label.index()).collect(),
        emotion_classes(),
        samples.iter().map(|s| s.frame.subject_id.clone()).collect(),
    )?
    .with_feature_names(emotion_feature_names())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neutral_is_identity() {
        let t = FaceFrame::template();
        assert_eq!(deform_face(&t, EmotionLabel::Neutral, 0.7), t);
        assert_eq!(deform_face(&t, EmotionLabel::Comfortable, 0.0), t);
        assert_ne!(deform_face(&t, EmotionLabel::Comfortable, 0.5), t);
    }

    #[test]
    fn deformations_stay_mirror_symmetric() {
        let t = FaceFrame::template();
        for label in EmotionLabel::ALL {
            let d = deform_face(&t, label, 1.0);
            let m = d.mirrored();
            for i in 0..d.points.len() {
                assert!(d.points[i].distance(m.points[i]) < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let cfg = FaceGenConfig {
            landmark_noise: 0.5,
            ..FaceGenConfig::default()
        };
        assert!(matches!(
            gen_face_dataset(&cfg),
            Err(Error::InfeasibleConfig(_))
        ));
        let cfg = FaceGenConfig {
            intensity: [(1.0, 0.5), (0.0, 0.0), (0.5, 1.0)],
            ..FaceGenConfig::default()
        };
        assert!(matches!(
            gen_face_dataset(&cfg),
            Err(Error::InfeasibleConfig(_))
        ));
    }
}
