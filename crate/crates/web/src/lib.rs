//! Browser demo: a posture explorer, a face expression inspector and a
//! closed-loop lux trace. The plain functions are testable natively; the
//! `wasm_*` exports wrap them and return JSON.

use std::cell::OnceCell;

use lumisense::control::{
    run_automation_loop, ControlConfig, LightPlant, LoopConfig, Perception, Scenario,
};
use lumisense::face::{
    emotion_feature_names, emotion_features, EmotionLabel, FaceFrame, NOSE_TIP, SELECTED,
};
use lumisense::ml::{train, ModelConfig, ModelKind, TrainedModel};
use lumisense::skeleton::{
    leg_angles, posture_feature_names, posture_features, rule_label_posture, Joint, PostureLabel,
};
use lumisense::synth::{
    build_pose, deform_face, face_dataset, gen_face_dataset, BodyDims, FaceGenConfig, PoseParams,
};
use lumisense::Result;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseSliders {
    pub hip: f64,
    pub knee: f64,
    pub lean: f64,
    pub recline: f64,
    pub turn: f64,
}

#[derive(Debug, Serialize)]
pub struct PostureView {
    /// Joint name and spine-centered position, meters.
    pub joints: Vec<(String, [f64; 3])>,
    /// Parent-child index pairs for drawing bones.
    pub bones: Vec<(usize, usize)>,
    pub features: Vec<(String, f64)>,
    pub alpha: f64,
    pub delta: f64,
    pub tau: f64,
    pub label: String,
}

const BONES: [(Joint, Joint); 19] = [
    (Joint::HipCenter, Joint::Spine),
    (Joint::Spine, Joint::ShoulderCenter),
    (Joint::ShoulderCenter, Joint::Head),
    (Joint::ShoulderCenter, Joint::ShoulderLeft),
    (Joint::ShoulderLeft, Joint::ElbowLeft),
    (Joint::ElbowLeft, Joint::WristLeft),
    (Joint::WristLeft, Joint::HandLeft),
    (Joint::ShoulderCenter, Joint::ShoulderRight),
    (Joint::ShoulderRight, Joint::ElbowRight),
    (Joint::ElbowRight, Joint::WristRight),
    (Joint::WristRight, Joint::HandRight),
    (Joint::HipCenter, Joint::HipLeft),
    (Joint::HipLeft, Joint::KneeLeft),
    (Joint::KneeLeft, Joint::AnkleLeft),
    (Joint::AnkleLeft, Joint::FootLeft),
    (Joint::HipCenter, Joint::HipRight),
    (Joint::HipRight, Joint::KneeRight),
    (Joint::KneeRight, Joint::AnkleRight),
    (Joint::AnkleRight, Joint::FootRight),
];

/// Builds a skeleton from slider angles (degrees) and runs the posture
/// feature extractor and rule labeler on it.
pub fn explore_posture(s: PoseSliders) -> Result<PostureView> {
    let params = PoseParams {
        hip_flexion: (s.hip, s.hip),
        knee_flexion: (s.knee, s.knee),
        torso_lean: s.lean,
        recline: s.recline,
        turn: s.turn,
        ..PoseParams::default()
    };
    let frame = build_pose(&BodyDims::default(), &params, "demo");
    let features = posture_features(&frame)?;
    let angles = leg_angles(&frame)?;
    Ok(PostureView {
        joints: Joint::ALL
            .iter()
            .map(|j| {
                let p = frame.joint(*j);
                (j.name().to_string(), [p.x, p.y, p.z])
            })
            .collect(),
        bones: BONES.iter().map(|(a, b)| (a.index(), b.index())).collect(),
        features: posture_feature_names()
            .into_iter()
            .zip(features.as_slice().iter().copied())
            .collect(),
        alpha: angles.mean_alpha(),
        delta: angles.mean_delta(),
        tau: angles.tau,
        label: rule_label_posture(&frame)?.name().to_string(),
    })
}

#[derive(Debug, Serialize)]
pub struct FaceView {
    /// Front-view (x, y) of every landmark, meters from the nose tip.
    pub points: Vec<[f64; 2]>,
    pub nose_tip: usize,
    pub selected: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
    pub features: Vec<(String, f64)>,
    /// Feature change relative to the neutral template.
    pub delta: Vec<f64>,
}

pub fn inspect_face(label: EmotionLabel, intensity: f64) -> Result<FaceView> {
    let template = FaceFrame::template();
    let face = deform_face(&template, label, intensity.clamp(0.0, 1.0));
    let base = emotion_features(&template)?;
    let feats = emotion_features(&face)?;
    Ok(FaceView {
        points: face.points.iter().map(|p| [p.x, p.y]).collect(),
        nose_tip: NOSE_TIP,
        selected: SELECTED.indices(),
        pairs: SELECTED.pairs.to_vec(),
        features: emotion_feature_names().into_iter().zip(feats.0).collect(),
        delta: feats.0.iter().zip(base.0).map(|(a, b)| a - b).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopSettings {
    pub posture: PostureLabel,
    pub emotion: EmotionLabel,
    pub ambient: f64,
    /// Seconds after entry at which the occupant leaves; none stays.
    pub leave_after_s: Option<u64>,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct LoopView {
    pub ts: Vec<u64>,
    pub occupancy: Vec<u32>,
    pub mean_lux: Vec<f64>,
    pub levels: Vec<[u8; 3]>,
    pub commands: Vec<String>,
    pub target: f64,
    pub perceived_posture: String,
    pub perceived_emotion: String,
    pub steady: bool,
    pub safety_violations: usize,
}

thread_local! {
    static EMOTION_MODEL: OnceCell<TrainedModel> = const { OnceCell::new() };
}

fn emotion_model() -> Result<TrainedModel> {
    EMOTION_MODEL.with(|cell| {
        if let Some(m) = cell.get() {
            return Ok(m.clone());
        }
        let data = face_dataset(&gen_face_dataset(&FaceGenConfig::default())?)?;
        let model = train(&data, &ModelConfig::new(ModelKind::Lda), 42)?;
        Ok(cell.get_or_init(|| model).clone())
    })
}

/// Scenario text: an entry, one posture frame and one face frame, and an
/// optional exit.
pub fn loop_scenario(s: &LoopSettings) -> String {
    let mut text = format!(
        "EVT door PIR_OUT 1 0\nEVT door PIR_IN 1 400\nFRAME posture {} {} 500\nFRAME emotion {} {} 500\n",
        s.posture.name(),
        s.seed,
        s.emotion.name(),
        s.seed
    );
    if let Some(t) = s.leave_after_s {
        let ts = 400 + t * 1000;
        text.push_str(&format!(
            "EVT door PIR_IN 1 {ts}\nEVT door PIR_OUT 1 {}\n",
            ts + 400
        ));
    }
    text
}

/// Runs the closed loop with the rule posture labeler and an LDA emotion
/// model trained on generated faces.
pub fn run_loop(s: &LoopSettings) -> Result<LoopView> {
    let scenario: Scenario = loop_scenario(s).parse()?;
    let model = emotion_model()?;
    let cfg = ControlConfig::default();
    let plant = LightPlant {
        ambient: s.ambient.max(0.0),
        ..LightPlant::default()
    };
    let perception = Perception {
        posture: None,
        emotion: Some(&model),
    };
    let trace = run_automation_loop(&scenario, &cfg, &LoopConfig::default(), plant, perception)?;
    let last = trace.rows.last();
    let name = |o: Option<String>| o.unwrap_or_else(|| "unknown".into());
    let posture = last.and_then(|r| r.posture);
    Ok(LoopView {
        ts: trace.rows.iter().map(|r| r.ts).collect(),
        occupancy: trace.rows.iter().map(|r| r.occupancy).collect(),
        mean_lux: trace
            .rows
            .iter()
            .map(|r| r.lux.iter().sum::<f64>() / 3.0)
            .collect(),
        levels: trace.rows.iter().map(|r| r.levels).collect(),
        commands: trace
            .rows
            .iter()
            .map(|r| {
                r.commands
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect(),
        target: posture.map_or(f64::NAN, |p| cfg.targets[p.index()]),
        perceived_posture: name(posture.map(|p| p.name().to_string())),
        perceived_emotion: name(last.and_then(|r| r.emotion).map(|e| e.name().to_string())),
        steady: trace.steady,
        safety_violations: trace.safety_violations,
    })
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn wasm_explore_posture(
    hip: f64,
    knee: f64,
    lean: f64,
    recline: f64,
    turn: f64,
) -> std::result::Result<String, JsError> {
    to_js(explore_posture(PoseSliders {
        hip,
        knee,
        lean,
        recline,
        turn,
    }))
}

#[wasm_bindgen]
pub fn wasm_inspect_face(label: &str, intensity: f64) -> std::result::Result<String, JsError> {
    to_js(label.parse().and_then(|l| inspect_face(l, intensity)))
}

#[wasm_bindgen]
pub fn wasm_run_loop(
    posture: &str,
    emotion: &str,
    ambient: f64,
    leave_after_s: i32,
    seed: u32,
) -> std::result::Result<String, JsError> {
    let settings = posture.parse().and_then(|p| {
        Ok(LoopSettings {
            posture: p,
            emotion: emotion.parse()?,
            ambient,
            leave_after_s: u64::try_from(leave_after_s).ok(),
            seed: seed.into(),
        })
    });
    to_js(settings.and_then(|s| run_loop(&s)))
}
