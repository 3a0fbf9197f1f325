//! Invariants over randomized inputs.

use gaitblend_core::config::{load_config, FullConfig};
use gaitblend_core::control::{
    assist_torques, blend_gains_with, BlendGains, BlendWeights, ClampPolicy, ControllerConfig,
    GainSource, Strategy as ControlStrategy,
};
use gaitblend_core::gait::{gait_sample, GaitProfile, StanceLaw};
use gaitblend_core::metrics::{smoothness_of, MagnitudeStats};
use gaitblend_core::model::{
    build_grounded_chain, mirror_device, Environment, ExoParams, JointState, Side, Torques,
    JOINT_COUNT,
};
use gaitblend_core::runner::run_scenario;
use gaitblend_core::sim::{interaction_forces, HarnessModel, RunRecord, Scenario};
use proptest::prelude::{
    any, prop_assert, prop_assert_eq, prop_oneof, proptest, Just, ProptestConfig, Strategy as _,
};

fn vec6(
    range: std::ops::Range<f64>,
) -> impl proptest::strategy::Strategy<Value = [f64; JOINT_COUNT]> {
    proptest::array::uniform6(range)
}

fn torques() -> impl proptest::strategy::Strategy<Value = Torques> {
    vec6(-100.0..100.0).prop_map(Torques)
}

fn side() -> impl proptest::strategy::Strategy<Value = Side> {
    prop_oneof![Just(Side::Left), Just(Side::Right)]
}

proptest! {
    #[test]
    fn blend_gains_sum_to_one(y in vec6(-50.0..50.0), q in vec6(-2.0..2.0)) {
        let w = BlendWeights::from_y(y);
        for policy in [ClampPolicy::Clamp, ClampPolicy::Tanh] {
            let g = blend_gains_with(&w, &q, policy);
            prop_assert_eq!(g.left + g.right, 1.0);
            prop_assert!((0.0..=1.0).contains(&g.left) && (0.0..=1.0).contains(&g.right));
        }
    }

    #[test]
    fn from_left_is_exact(g in -0.5f64..1.5) {
        let b = BlendGains::from_left(g);
        prop_assert_eq!(b.left + b.right, 1.0);
    }

    #[test]
    fn compensation_is_mirror_symmetric(q in vec6(-0.8..0.8), qd in vec6(-3.0..3.0), qdd in vec6(-20.0..20.0), load in 0.0f64..20.0) {
        let exo = ExoParams::default();
        let env = Environment::flat().with_load(load);
        let left = build_grounded_chain(&exo, Side::Left, &env).unwrap();
        let right = build_grounded_chain(&exo, Side::Right, &env).unwrap();
        let s = JointState { q, qd, qdd };
        let a = left.compensation_torques(&s);
        let b = right.compensation_torques(&s.mirrored());
        let m = mirror_device(&b.0);
        for j in 0..JOINT_COUNT {
            prop_assert!((a.0[j] - m[j]).abs() < 1e-9 * (1.0 + a.0[j].abs()));
        }
    }

    #[test]
    fn cuff_forces_are_linear(q in vec6(-0.5..0.8), r1 in torques(), r2 in torques(), k in -3.0f64..3.0, stance in side()) {
        let exo = ExoParams::default();
        let chain = build_grounded_chain(&exo, stance, &Environment::flat()).unwrap();
        let h = HarnessModel::from(&exo);
        let f1 = interaction_forces(&r1, &chain, &q, &h);
        let f2 = interaction_forces(&r2, &chain, &q, &h);
        let f = interaction_forces(&r1.scale(k).add(&r2), &chain, &q, &h);
        for c in 0..4 {
            let expect = k * f1.forces[c] + f2.forces[c];
            prop_assert!((f.forces[c] - expect).abs() < 1e-6 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn passive_ankle_zeroes_only_the_ankles(l in torques(), r in torques(), g in 0.0f64..1.0) {
        let cfg = ControllerConfig { ankle_actuated: false, ..Default::default() };
        let out = assist_torques(&cfg, &l, &r, GainSource::Blend(BlendGains::from_left(g)));
        for j in 0..JOINT_COUNT {
            if j % 3 == 2 {
                prop_assert_eq!(out.torque.0[j], 0.0);
            } else {
                prop_assert_eq!(out.torque.0[j], out.command.0[j]);
            }
        }
    }

    #[test]
    fn fsm_applies_one_model_whole(l in torques(), r in torques(), s in side()) {
        let cfg = ControllerConfig { strategy: ControlStrategy::Fsm, ankle_actuated: true, ..Default::default() };
        let out = assist_torques(&cfg, &l, &r, GainSource::Fsm(s));
        prop_assert_eq!(out.torque, if s == Side::Left { l } else { r });
    }

    #[test]
    fn pooled_rms_derivative_matches_joint_rms(series in proptest::collection::vec(torques(), 2..40), rate in 10.0f64..500.0) {
        let rep = smoothness_of(&series, rate, 5.0).unwrap();
        let mut sq = 0.0;
        for w in series.windows(2) {
            for j in 0..JOINT_COUNT {
                sq += ((w[1].0[j] - w[0].0[j]) * rate).powi(2);
            }
        }
        let pooled = (sq / ((series.len() - 1) * JOINT_COUNT) as f64).sqrt();
        prop_assert!((rep.pooled_rms_derivative() - pooled).abs() < 1e-9 * (1.0 + pooled));
    }

    #[test]
    fn magnitude_stats_ignore_order(mut v in proptest::collection::vec(-100.0f64..100.0, 1..60), split in 0usize..60) {
        let a = MagnitudeStats::of(v.iter().copied());
        let cut = split.min(v.len());
        v.rotate_left(cut);
        let b = MagnitudeStats::of(v.iter().copied());
        prop_assert_eq!(a.peak, b.peak);
        prop_assert_eq!(a.count, b.count);
        prop_assert!((a.mean - b.mean).abs() < 1e-9 && (a.rms - b.rms).abs() < 1e-9);
    }

    #[test]
    fn gait_is_stride_periodic(kmh in 0.8f64..6.0, t in 0.0f64..20.0) {
        let p = GaitProfile::constant_speed(kmh);
        let period = 1.0 / p.stride_rate(kmh / 3.6);
        let a = gait_sample(&p, t);
        let b = gait_sample(&p, t + period);
        for j in 0..JOINT_COUNT {
            prop_assert!((a.state.q[j] - b.state.q[j]).abs() < 1e-7);
        }
        prop_assert_eq!(a.contact, b.contact);
    }

    #[test]
    fn contact_iff_positive_pressure(kmh in 0.5f64..6.0, t in 0.0f64..30.0, sigma in 0.0f64..20.0, seed in any::<u64>()) {
        let p = GaitProfile { noise_sigma: sigma, seed, ..GaitProfile::constant_speed(kmh) };
        let s = gait_sample(&p, t);
        for (i, leg) in [Side::Left, Side::Right].into_iter().enumerate() {
            prop_assert_eq!(s.contact[i], s.pressure_sum(leg) > 0.0);
        }
        prop_assert!(s.contact[0] || s.contact[1]);
    }

    #[test]
    fn double_support_fraction_is_physiological(kmh in 1.0f64..6.0) {
        let p = GaitProfile::constant_speed(kmh);
        let n = 20_000;
        let period = 1.0 / p.stride_rate(kmh / 3.6);
        let both = (0..n)
            .filter(|k| gait_sample(&p, 10.0 + period * *k as f64 / n as f64).contact == [true, true])
            .count();
        let frac = both as f64 / n as f64;
        prop_assert!((0.10..=0.25).contains(&frac), "{frac}");
    }

    #[test]
    fn weights_text_round_trips(y in vec6(-50.0..50.0)) {
        let w = BlendWeights::from_y(y);
        prop_assert_eq!(BlendWeights::from_text(&w.to_text()).unwrap(), w);
    }

    #[test]
    fn config_round_trips(seed in any::<u64>(), slope in -15.0f64..15.0, load in 0.0f64..30.0, kmh in 0.5f64..6.0) {
        let mut cfg = FullConfig { seed, ..Default::default() };
        cfg.environment.slope_deg = slope;
        cfg.environment.load_mass = load;
        cfg.calibration.speed_kmh = kmh;
        prop_assert_eq!(load_config(&cfg.to_toml()).unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn runs_are_deterministic_and_csv_round_trips(seed in any::<u64>(), kmh in 1.0f64..5.0, rate in 50.0f64..200.0, dur in 0.5f64..2.0) {
        let cfg = FullConfig { seed, ..Default::default() };
        let mut sc = Scenario::constant_speed("prop", kmh, dur);
        sc.sample_rate = rate;
        let controller = ControllerConfig { strategy: ControlStrategy::Fsm, ..Default::default() };
        let a = run_scenario(&cfg, &sc, &controller, None, None).unwrap();
        let b = run_scenario(&cfg, &sc, &controller, None, None).unwrap();
        prop_assert_eq!(a.to_csv(), b.to_csv());
        prop_assert_eq!(a.samples.len(), (dur * rate + 1e-9).floor() as usize);
        for (k, s) in a.samples.iter().enumerate() {
            prop_assert_eq!(s.t, k as f64 / rate);
        }
        let back = RunRecord::from_csv(a.meta.clone(), &a.to_csv()).unwrap();
        prop_assert_eq!(back.to_csv(), a.to_csv());
    }

    #[test]
    fn exact_model_full_actuation_is_transparent(kmh in 0.8f64..5.5, load in 0.0f64..15.0, y in vec6(-5.0..5.0)) {
        let cfg = FullConfig::default();
        let mut sc = Scenario::constant_speed("prop", kmh, 2.0);
        sc.load_mass = load;
        let controller = ControllerConfig { ankle_actuated: true, ..Default::default() };
        let rec = run_scenario(&cfg, &sc, &controller, Some(&BlendWeights::from_y(y)), None).unwrap();
        for s in &rec.samples {
            prop_assert!(s.cuff.iter().all(|f| f.abs() < 1e-6));
        }
    }

    #[test]
    fn passive_ankle_residual_is_the_ankle_command(kmh in 0.8f64..5.5, y in vec6(-5.0..5.0)) {
        let cfg = FullConfig::default();
        let sc = Scenario::constant_speed("prop", kmh, 2.0);
        let rec = run_scenario(&cfg, &sc, &ControllerConfig::default(), Some(&BlendWeights::from_y(y)), None).unwrap();
        for s in &rec.samples {
            for j in [2, 5] {
                prop_assert!((s.residual.0[j] - s.command.0[j]).abs() < 1e-9 * (1.0 + s.command.0[j].abs()));
            }
        }
    }
}

#[test]
fn stance_law_default_is_bounded() {
    let law = StanceLaw::default();
    for v in [0.0, 0.5, 1.0, 2.0, 5.0] {
        let b = law.fraction(v);
        assert!((0.5..=0.8).contains(&b));
    }
}
