//! Browser bindings for the demo page in `www/`.
//!
//! Each export returns a JSON string; the plain functions are usable (and
//! tested) natively.

use gaitblend_core::config::FullConfig;
use gaitblend_core::control::{ControllerConfig, Strategy};
use gaitblend_core::metrics::{smoothness_metrics, transparency_metrics, DEFAULT_JUMP_THRESHOLD};
use gaitblend_core::model::{
    build_grounded_chain, Environment, ExoParams, Side, DEVICE_JOINT_NAMES,
};
use gaitblend_core::runner::{calibrate_at, run_scenario};
use gaitblend_core::sim::Scenario;
use gaitblend_core::Result;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn to_js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

fn round(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

/// Blend gain, FSM selection and true load share over `points` samples of
/// two strides at constant speed.
pub fn gain_curve_json(speed_kmh: f64, points: usize) -> Result<String> {
    let cfg = FullConfig::default();
    let weights = calibrate_at(&cfg, speed_kmh, 0.0, 0.0)?;
    let sc = Scenario::constant_speed("demo", speed_kmh, 60.0);
    let controller = ControllerConfig {
        strategy: Strategy::Blend,
        ..Default::default()
    };
    let rec = run_scenario(&cfg, &sc, &controller, Some(&weights), None)?;
    let fsm = run_scenario(
        &cfg,
        &sc,
        &ControllerConfig {
            strategy: Strategy::Fsm,
            ..controller
        },
        None,
        None,
    )?;
    // two strides starting from the first heel strike after settling
    let start = rec
        .samples
        .windows(2)
        .position(|w| w[0].t > 5.0 && w[1].phase < w[0].phase)
        .map_or(0, |i| i + 1);
    let span = rec.samples[start..]
        .iter()
        .scan((0, f64::NAN), |(wraps, prev), s| {
            if s.phase < *prev {
                *wraps += 1;
            }
            *prev = s.phase;
            Some(*wraps)
        })
        .take_while(|&w| w < 2)
        .count();
    let step = (span / points.max(2)).max(1);
    let idx: Vec<usize> = (start..start + span).step_by(step).collect();
    Ok(json!({
        "t": idx.iter().map(|&i| round(rec.samples[i].t)).collect::<Vec<_>>(),
        "phase": idx.iter().map(|&i| round(rec.samples[i].phase)).collect::<Vec<_>>(),
        "blend_left": idx.iter().map(|&i| round(rec.samples[i].gains.left)).collect::<Vec<_>>(),
        "fsm_left": idx.iter().map(|&i| fsm.samples[i].gains.left).collect::<Vec<_>>(),
        "load_share_left": idx.iter().map(|&i| {
            let s = &rec.samples[i];
            round(s.load[0] / (s.load[0] + s.load[1]))
        }).collect::<Vec<_>>(),
        "weights": weights.y,
    })
    .to_string())
}

/// Runs a short constant-speed trial and returns its torque and cuff traces.
pub fn simulate_json(
    speed_kmh: f64,
    fsm: bool,
    ankle_on: bool,
    load_mass: f64,
    duration: f64,
) -> Result<String> {
    let cfg = FullConfig::default();
    let mut sc = Scenario::constant_speed("demo", speed_kmh, duration);
    sc.load_mass = load_mass;
    sc.validate()?;
    let controller = ControllerConfig {
        strategy: if fsm { Strategy::Fsm } else { Strategy::Blend },
        ankle_actuated: ankle_on,
        ..Default::default()
    };
    let weights = if fsm {
        None
    } else {
        Some(calibrate_at(&cfg, speed_kmh, 0.0, load_mass)?)
    };
    let rec = run_scenario(&cfg, &sc, &controller, weights.as_ref(), None)?;
    let smooth = smoothness_metrics(&rec, DEFAULT_JUMP_THRESHOLD)?;
    let transp = transparency_metrics(&rec);
    let col = |f: &dyn Fn(&gaitblend_core::sim::RunSample) -> f64| {
        rec.samples.iter().map(|s| round(f(s))).collect::<Vec<_>>()
    };
    Ok(json!({
        "t": col(&|s| s.t),
        "applied_l_hip": col(&|s| s.applied.0[0]),
        "applied_l_knee": col(&|s| s.applied.0[1]),
        "applied_l_ankle": col(&|s| s.applied.0[2]),
        "residual_l_ankle": col(&|s| s.residual.0[2]),
        "cuff_l_thigh": col(&|s| s.cuff[0]),
        "cuff_l_shank": col(&|s| s.cuff[1]),
        "gamma_left": col(&|s| s.gains.left),
        "max_jump": smooth.overall_max_jump(),
        "cuff_mean": transp.pooled.mean,
        "cuff_peak": transp.pooled.peak,
    })
    .to_string())
}

/// Static gravity torques of the grounded model for a device-ordered posture.
pub fn gravity_json(
    q: &[f64],
    stance_left: bool,
    slope_deg: f64,
    load_mass: f64,
) -> Result<String> {
    let q: [f64; 6] = q
        .try_into()
        .map_err(|_| gaitblend_core::Error::LengthMismatch {
            expected: 6,
            got: q.len(),
        })?;
    let env = Environment::flat()
        .with_slope(slope_deg.to_radians())
        .with_load(load_mass);
    let side = if stance_left { Side::Left } else { Side::Right };
    let chain = build_grounded_chain(&ExoParams::default(), side, &env)?;
    let tau = chain.gravity_torques(&q);
    let frames = chain.forward_kinematics(&q);
    Ok(json!({
        "joints": DEVICE_JOINT_NAMES,
        "torque": tau.0,
        "points": frames.joints.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>(),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn gain_curve(speed_kmh: f64, points: usize) -> std::result::Result<String, JsError> {
    to_js(gain_curve_json(speed_kmh, points))
}

#[wasm_bindgen]
pub fn simulate(
    speed_kmh: f64,
    fsm: bool,
    ankle_on: bool,
    load_mass: f64,
    duration: f64,
) -> std::result::Result<String, JsError> {
    to_js(simulate_json(speed_kmh, fsm, ankle_on, load_mass, duration))
}

#[wasm_bindgen]
pub fn gravity_torques(
    q: &[f64],
    stance_left: bool,
    slope_deg: f64,
    load_mass: f64,
) -> std::result::Result<String, JsError> {
    to_js(gravity_json(q, stance_left, slope_deg, load_mass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn gain_curve_spans_two_strides() {
        let v: Value = serde_json::from_str(&gain_curve_json(3.5, 100).unwrap()).unwrap();
        let g = v["blend_left"].as_array().unwrap();
        assert!(g.len() >= 100);
        assert!(g.iter().all(|x| (0.0..=1.0).contains(&x.as_f64().unwrap())));
        let fsm = v["fsm_left"].as_array().unwrap();
        assert!(fsm
            .iter()
            .all(|x| x.as_f64() == Some(0.0) || x.as_f64() == Some(1.0)));
    }

    #[test]
    fn simulate_reports_traces() {
        let v: Value =
            serde_json::from_str(&simulate_json(3.5, false, false, 0.0, 3.0).unwrap()).unwrap();
        assert_eq!(v["t"].as_array().unwrap().len(), 300);
        // passive ankle applies nothing there
        assert!(v["applied_l_ankle"]
            .as_array()
            .unwrap()
            .iter()
            .all(|x| x.as_f64() == Some(0.0)));
        assert!(v["cuff_mean"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn gravity_of_upright_posture_is_zero() {
        let v: Value =
            serde_json::from_str(&gravity_json(&[0.0; 6], true, 0.0, 0.0).unwrap()).unwrap();
        assert!(v["torque"]
            .as_array()
            .unwrap()
            .iter()
            .all(|x| x.as_f64().unwrap().abs() < 1e-9));
        assert_eq!(v["points"].as_array().unwrap().len(), 7);
        assert!(gravity_json(&[0.0; 5], true, 0.0, 0.0).is_err());
    }
}
