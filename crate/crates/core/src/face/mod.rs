//! Face-landmark geometry: nose-tip recentering and the 46 distance
//! features (32 nose-tip distances, 14 left/right pair distances).

use std::fmt;
use std::str::FromStr;

use crate::geometry::Vec3;
use crate::{Error, Result};

mod template;

pub const FACE_POINTS: usize = 120;
/// Index of the nose-tip landmark, the origin of the feature frame.
pub const NOSE_TIP: usize = 46;
pub const EMOTION_DIM: usize = 46;

#[derive(Debug, Clone, PartialEq)]
pub struct FaceFrame {
    pub points: [Vec3; FACE_POINTS],
    pub subject_id: String,
}

impl FaceFrame {
    pub fn new(points: [Vec3; FACE_POINTS], subject_id: impl Into<String>) -> Self {
        Self {
            points,
            subject_id: subject_id.into(),
        }
    }

    /// The frozen neutral face, already in the nose-tip frame.
    pub fn template() -> Self {
        Self::new(
            template::TEMPLATE.map(|[x, y, z]| Vec3::new(x, y, z)),
            "template",
        )
    }

    pub fn validate(&self) -> Result<()> {
        match self.points.iter().position(|p| !p.is_finite()) {
            Some(i) => Err(Error::InvalidFrame(format!("face point {i} is not finite"))),
            None => Ok(()),
        }
    }

    pub fn map(&self, f: impl FnMut(Vec3) -> Vec3) -> FaceFrame {
        FaceFrame {
            points: self.points.map(f),
            subject_id: self.subject_id.clone(),
        }
    }

    /// The face reflected across its own midline: every landmark takes the
    /// mirrored position of its mirror partner.
    pub fn mirrored(&self) -> FaceFrame {
        let nose = self.points[NOSE_TIP];
        let reflect = |p: Vec3| Vec3::new(2.0 * nose.x - p.x, p.y, p.z);
        let mut points = self.points;
        for (i, p) in points.iter_mut().enumerate() {
            *p = reflect(self.points[template::MIRROR[i]]);
        }
        FaceFrame {
            points,
            subject_id: self.subject_id.clone(),
        }
    }
}

/// Index of the landmark mirroring `i` across the facial midline.
pub fn mirror_index(i: usize) -> usize {
    template::MIRROR[i]
}

/// The 32 expressive landmarks: 14 right/left mirror pairs over the brows,
/// mouth and cheeks, plus 4 unpaired nose-side points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectedFaceSet {
    /// `(right, left)` landmark indices.
    pub pairs: [(usize, usize); 14],
    pub nose_sides: [usize; 4],
}

pub const SELECTED: SelectedFaceSet = SelectedFaceSet {
    pairs: [
        // brows
        (20, 25),
        (21, 26),
        (22, 27),
        (23, 28),
        // mouth: outer corners, upper lip, lower lip, inner corners
        (51, 52),
        (53, 54),
        (55, 56),
        (57, 58),
        (59, 60),
        (63, 64),
        // cheeks
        (71, 77),
        (72, 78),
        (73, 79),
        (74, 80),
    ],
    nose_sides: [47, 48, 49, 50],
};

impl SelectedFaceSet {
    /// Selection order: each pair right-then-left, then the nose sides.
    pub fn indices(&self) -> Vec<usize> {
        self.pairs
            .iter()
            .flat_map(|&(r, l)| [r, l])
            .chain(self.nose_sides)
            .collect()
    }

    pub fn brow_pairs(&self) -> &[(usize, usize)] {
        &self.pairs[0..4]
    }

    pub fn mouth_pairs(&self) -> &[(usize, usize)] {
        &self.pairs[4..10]
    }

    pub fn cheek_pairs(&self) -> &[(usize, usize)] {
        &self.pairs[10..14]
    }
}

pub fn emotion_feature_names() -> Vec<String> {
    let mut names: Vec<String> = SELECTED
        .indices()
        .iter()
        .map(|i| format!("ed_np_{i}"))
        .collect();
    names.extend(SELECTED.pairs.iter().map(|(r, l)| format!("ed_h_{r}_{l}")));
    names
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmotionFeatures(pub [f64; EMOTION_DIM]);

impl EmotionFeatures {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn recenter_to_nose(frame: &FaceFrame) -> Result<FaceFrame> {
    frame.validate()?;
    let nose = frame.points[NOSE_TIP];
    Ok(frame.map(|p| p - nose))
}

/// Distances of the selected landmarks from the origin (the nose tip of a
/// recentered frame), in selection order.
pub fn ed_np(frame: &FaceFrame, sel: &SelectedFaceSet) -> Vec<f64> {
    sel.indices()
        .into_iter()
        .map(|i| frame.points[i].norm())
        .collect()
}

/// Right-to-left distances of the mirror pairs.
pub fn ed_h(frame: &FaceFrame, sel: &SelectedFaceSet) -> Vec<f64> {
    sel.pairs
        .iter()
        .map(|&(r, l)| frame.points[r].distance(frame.points[l]))
        .collect()
}

pub fn emotion_features(frame: &FaceFrame) -> Result<EmotionFeatures> {
    let f = recenter_to_nose(frame)?;
    let mut out = [0.0; EMOTION_DIM];
    let np = ed_np(&f, &SELECTED);
    let h = ed_h(&f, &SELECTED);
    out[..np.len()].copy_from_slice(&np);
    out[np.len()..].copy_from_slice(&h);
    Ok(EmotionFeatures(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EmotionLabel {
    Comfortable,
    Neutral,
    Uncomfortable,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; 3] = [
        EmotionLabel::Comfortable,
        EmotionLabel::Neutral,
        EmotionLabel::Uncomfortable,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            EmotionLabel::Comfortable => "Comfortable",
            EmotionLabel::Neutral => "Neutral",
            EmotionLabel::Uncomfortable => "Uncomfortable",
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmotionLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        EmotionLabel::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidClass(format!("unknown emotion `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn selection_structure() {
        let idx = SELECTED.indices();
        assert_eq!(idx.len(), 32);
        assert_eq!(idx.iter().collect::<HashSet<_>>().len(), 32);
        assert!(!idx.contains(&NOSE_TIP));
        assert!(idx.iter().all(|&i| i < FACE_POINTS));
        for &(r, l) in &SELECTED.pairs {
            assert_eq!(mirror_index(r), l);
            let t = FaceFrame::template();
            assert!(t.points[r].x > 0.0 && t.points[l].x < 0.0);
        }
        // nose sides are closed under mirroring but excluded from pair distances
        for &i in &SELECTED.nose_sides {
            assert!(SELECTED.nose_sides.contains(&mirror_index(i)));
        }
        assert_eq!(emotion_feature_names().len(), EMOTION_DIM);
    }

    #[test]
    fn template_is_symmetric_and_nose_centered() {
        let t = FaceFrame::template();
        assert_eq!(t.points[NOSE_TIP], Vec3::ZERO);
        for i in 0..FACE_POINTS {
            let m = t.points[mirror_index(i)];
            assert_eq!(t.points[i], Vec3::new(-m.x, m.y, m.z));
            assert_eq!(mirror_index(mirror_index(i)), i);
        }
    }

    #[test]
    fn recenter_examples() {
        let t = FaceFrame::template();
        assert_eq!(recenter_to_nose(&t).unwrap(), t);

        let mut f = FaceFrame::new([Vec3::ZERO; FACE_POINTS], "x");
        f.points[NOSE_TIP] = Vec3::new(0.02, 0.01, 1.5);
        f.points[3] = Vec3::new(0.05, 0.04, 1.5);
        let c = recenter_to_nose(&f).unwrap();
        assert_eq!(c.points[NOSE_TIP], Vec3::ZERO);
        let p = c.points[3];
        assert!((p.x - 0.03).abs() < 1e-15 && (p.y - 0.03).abs() < 1e-15 && p.z == 0.0);

        f.points[7] = Vec3::new(f64::NAN, 0.0, 0.0);
        assert!(matches!(recenter_to_nose(&f), Err(Error::InvalidFrame(_))));
    }

    #[test]
    fn distance_examples() {
        let mut f = FaceFrame::new([Vec3::ZERO; FACE_POINTS], "x");
        let (r, l) = SELECTED.pairs[0];
        f.points[r] = Vec3::new(0.03, 0.04, 0.0);
        let np = ed_np(&f, &SELECTED);
        assert_eq!(np[0], 0.05);
        assert_eq!(np[1], 0.0);

        f.points[r] = Vec3::new(0.01, 0.01, 0.0);
        f.points[l] = Vec3::new(-0.01, 0.01, 0.0);
        assert_eq!(ed_h(&f, &SELECTED)[0], 0.02);
        f.points[l] = f.points[r];
        assert_eq!(ed_h(&f, &SELECTED)[0], 0.0);
    }

    #[test]
    fn mirrored_face_permutes_nose_distances() {
        let t = FaceFrame::template().map(|p| p + Vec3::new(0.003 * p.y, 0.1, 1.2 + p.x));
        let a = emotion_features(&t).unwrap();
        let b = emotion_features(&t.mirrored()).unwrap();
        let idx = SELECTED.indices();
        for (k, &i) in idx.iter().enumerate() {
            let partner = idx.iter().position(|&j| j == mirror_index(i)).unwrap();
            assert!((b.0[k] - a.0[partner]).abs() < 1e-12);
        }
        for k in 32..46 {
            assert!((a.0[k] - b.0[k]).abs() < 1e-12);
        }
    }
}
