//! Closed-loop simulation and oscillation measurement on the four reference scenarios.

use chatter_core::harmonic_balance::predict_numeric;
use chatter_core::*;

fn scenarios() -> Vec<(&'static str, PlantParams<f64>, ManifoldSpec<f64>)> {
    let dsm = ManifoldSpec::dynamic(-40.0, 39.6, -1.0, 1.0);
    vec![
        (
            "ssm_0.01",
            PlantParams { k: 1.0, tau: 0.01 },
            ManifoldSpec::Static,
        ),
        (
            "ssm_0.1",
            PlantParams { k: 1.0, tau: 0.1 },
            ManifoldSpec::Static,
        ),
        ("dsm_0.01", PlantParams { k: 1.0, tau: 0.01 }, dsm),
        ("dsm_0.1", PlantParams { k: 1.0, tau: 0.1 }, dsm),
    ]
}

fn sigma_amp(
    p: &PlantParams<f64>,
    m: &ManifoldSpec<f64>,
    cfg: &SimConfig<f64>,
    discard: f64,
) -> f64 {
    let ts = simulate(p, m, cfg).unwrap();
    measure_oscillation(&ts, Signal::Sigma, discard)
        .unwrap()
        .amplitude
}

#[test]
fn ssm_short_run_matches_reported_amplitude() {
    let p = PlantParams {
        k: 1.0_f64,
        tau: 0.01,
    };
    let cfg = SimConfig {
        dt: 1e-5,
        t_end: 2.0,
        ..SimConfig::for_plant(&p)
    };
    let ts = simulate(&p, &ManifoldSpec::Static, &cfg).unwrap();
    let r = measure_oscillation(&ts, Signal::X, 0.5).unwrap();
    assert!(
        (r.amplitude - 0.0068).abs() / 0.0068 < 0.10,
        "{}",
        r.amplitude
    );
}

#[test]
fn step_halving_changes_amplitude_by_less_than_two_percent() {
    for (label, p, m) in scenarios() {
        let cfg = SimConfig::for_plant(&p);
        let fine = SimConfig {
            dt: cfg.dt / 2.0,
            ..cfg
        };
        let a = sigma_amp(&p, &m, &cfg, 0.5);
        let b = sigma_amp(&p, &m, &fine, 0.5);
        assert!((a - b).abs() / b < 0.02, "{label}: {a} vs {b}");
    }
}

#[test]
fn window_choice_changes_amplitude_by_less_than_two_percent() {
    for (label, p, m) in scenarios() {
        let ts = simulate(&p, &m, &SimConfig::for_plant(&p)).unwrap();
        for signal in [Signal::Sigma, Signal::X] {
            let a = measure_oscillation(&ts, signal, 0.5).unwrap().amplitude;
            let b = measure_oscillation(&ts, signal, 0.6).unwrap().amplitude;
            assert!((a - b).abs() / a < 0.02, "{label} {signal:?}: {a} vs {b}");
        }
    }
}

#[test]
fn trajectories_stay_bounded_by_twice_the_prediction() {
    for (label, p, m) in scenarios() {
        let ts = simulate(&p, &m, &SimConfig::for_plant(&p)).unwrap();
        assert!(ts.x.iter().all(|x| x.is_finite()));
        let hb = predict_numeric(&p, &m).unwrap().prediction;
        let half = ts.len() / 2;
        let peak = ts.x[half..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(
            peak < 2.0 * hb.x_hat,
            "{label}: peak {peak} vs x_hat {}",
            hb.x_hat
        );
    }
}

#[test]
fn simulation_is_deterministic() {
    let (_, p, m) = scenarios()[2];
    let mut cfg = SimConfig::for_plant(&p);
    cfg.t_end = 1.0;
    let a = simulate(&p, &m, &cfg).unwrap();
    let b = simulate(&p, &m, &cfg).unwrap();
    assert_eq!(a, b);
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.sigma), bits(&b.sigma));
}

#[test]
fn recorded_sigma_matches_manifold_definition() {
    for (_, p, m) in scenarios() {
        let ts = simulate(&p, &m, &SimConfig::for_plant(&p)).unwrap();
        match (m, ts.z.as_ref()) {
            (ManifoldSpec::Dynamic(d), Some(z)) => {
                for ((s, z), x) in ts.sigma.iter().zip(z).zip(&ts.x) {
                    assert!((s - (d.h * z + d.l * x)).abs() <= 1e-12);
                }
            }
            (ManifoldSpec::Static, None) => assert_eq!(ts.sigma, ts.x),
            _ => panic!("z present iff the manifold is dynamic"),
        }
    }
}

#[test]
fn dynamic_start_lies_on_manifold() {
    let (_, p, m) = scenarios()[3];
    let mut cfg = SimConfig::for_plant(&p);
    cfg.x0 = 0.5;
    let ts = simulate(&p, &m, &cfg).unwrap();
    assert_eq!(ts.sigma[0], 0.0);
    assert_eq!(ts.z.as_ref().unwrap()[0], 0.5);
}

#[test]
fn sinusoid_round_trip_across_scales() {
    for amp in [1e-4f64, 1.0, 1e3] {
        for omega in [1.0f64, 100.0, 1e4] {
            let period = std::f64::consts::TAU / omega;
            let dt = period / 200.0;
            let n = 200 * 40;
            let t: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
            let v: Vec<f64> = t.iter().map(|&t| amp * (omega * t + 0.3).sin()).collect();
            let ts = TimeSeries::from_samples(t.clone(), v.clone());
            let r = measure_oscillation(&ts, Signal::X, 0.5).unwrap();
            assert!(
                (r.amplitude - amp).abs() / amp < 0.005,
                "A={amp} w={omega}: {}",
                r.amplitude
            );
            assert!(
                (r.frequency - omega).abs() / omega < 0.005,
                "A={amp} w={omega}: {}",
                r.frequency
            );

            for offset in [-10.0, 3.7, 10.0] {
                let shifted: Vec<f64> = v.iter().map(|x| x + offset).collect();
                let rs = measure_oscillation(
                    &TimeSeries::from_samples(t.clone(), shifted),
                    Signal::X,
                    0.5,
                )
                .unwrap();
                assert!(
                    (rs.amplitude - r.amplitude).abs() / r.amplitude < 1e-9,
                    "offset {offset}: {} vs {}",
                    rs.amplitude,
                    r.amplitude
                );
            }
        }
    }
}
