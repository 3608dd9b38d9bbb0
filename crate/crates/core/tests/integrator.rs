use blowup_core::integrate::{
    integrate, Direction, Event, EventKind, IntegratorConfig, Recording, Termination,
};
use std::f64::consts::PI;

fn oscillator(_: f64, y: &[f64; 2]) -> [f64; 2] {
    [y[1], -y[0]]
}

fn tight() -> IntegratorConfig {
    IntegratorConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        ..IntegratorConfig::default()
    }
}

#[test]
fn harmonic_oscillator_over_ten_periods() {
    let sol = integrate(
        oscillator,
        [1.0, 0.0],
        (0.0, 20.0 * PI),
        &[],
        &tight(),
        Recording::default(),
    )
    .unwrap();
    let (t, y) = sol.last();
    assert_eq!(t, 20.0 * PI);
    assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9, "{y:?}");
}

#[test]
fn conditional_stop_skips_early_roots() {
    let ev = Event::new(
        EventKind::Custom,
        Direction::Any,
        true,
        |_, y: &[f64; 2]| y[0],
    )
    .stop_when(|t, _| t > 5.0);
    let sol = integrate(
        oscillator,
        [0.0, 1.0],
        (0.0, 100.0),
        &[ev],
        &tight(),
        Recording::default(),
    )
    .unwrap();
    assert_eq!(sol.termination, Termination::Event(0));
    let roots: Vec<f64> = sol.events.iter().map(|e| e.location).collect();
    assert_eq!(roots.len(), 2, "{roots:?}");
    assert!((roots[0] - PI).abs() < 1e-10);
    assert!((roots[1] - 2.0 * PI).abs() < 1e-10);
}

#[test]
fn direction_is_relative_to_integration() {
    // Backward from t = 3pi/2 where y = -1: going down in t, sin rises through
    // zero at t = pi.
    let rising = Event::new(
        EventKind::Custom,
        Direction::Rising,
        true,
        |_, y: &[f64; 2]| y[0],
    );
    let sol = integrate(
        oscillator,
        [-1.0, 0.0],
        (1.5 * PI, 0.0),
        &[rising],
        &tight(),
        Recording::default(),
    )
    .unwrap();
    let e = sol.terminal_event().unwrap();
    assert!((e.location - PI).abs() < 1e-10, "{}", e.location);
}

#[test]
fn dense_samples_respect_spacing() {
    let sol = integrate(
        oscillator,
        [1.0, 0.0],
        (0.0, 3.0),
        &[],
        &tight(),
        Recording {
            max_spacing: Some(0.01),
            endpoint_only: false,
        },
    )
    .unwrap();
    for w in sol.trajectory.windows(2) {
        assert!(w[1].0 - w[0].0 <= 0.01 + 1e-12);
    }
    for (t, y) in &sol.trajectory {
        assert!((y[0] - t.cos()).abs() < 1e-9);
    }
}

#[test]
fn invalid_config_is_rejected() {
    let cfg = IntegratorConfig {
        rel_tol: 0.0,
        ..IntegratorConfig::default()
    };
    assert!(integrate(
        oscillator,
        [1.0, 0.0],
        (0.0, 1.0),
        &[],
        &cfg,
        Recording::default()
    )
    .is_err());
}
