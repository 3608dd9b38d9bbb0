//! Checks that tie orbits and profiles back to the qualitative theory: the
//! cylinder as a one-way barrier, positivity at the axis of interface
//! profiles, the phi-function extremum, ordering of forward shots, and the
//! bounds behind the non-existence gap.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{self, Direction, Event, EventKind, Recording, Termination};
use crate::model::{hyperbola_phi_max, Params, Profile};
use crate::phase::{
    self, critical_points, cylinder_value, from_phase, to_phase, vf_main, PhaseState, PointLabel,
    PointLocation, ESCAPE_BOUND, Z_MAX,
};
use crate::shooting::{
    nonexistence_gap, shoot_backward, shoot_forward_with_slope, ShootingConfig, ShotOutcome,
};

/// Three-valued verdict for checks whose numerics can fail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CheckOutcome {
    Holds,
    Violated { detail: String },
    Indeterminate { reason: String },
}

impl CheckOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, CheckOutcome::Holds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum OrbitEnd {
    /// Final state within `distance` (max norm) of a finite critical point.
    NearPoint {
        label: PointLabel,
        distance: f64,
    },
    /// Left the escape bound; `nearest` is the closest direction at infinity.
    Escaped {
        direction: [f64; 3],
        nearest: PointLabel,
    },
    /// Reached the requested parameter span.
    Horizon,
    Failed {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitReport {
    pub start: PhaseState,
    pub samples: Vec<(f64, PhaseState)>,
    /// Sign of `cylinder_value` at every sample.
    pub cylinder_signs: Vec<i8>,
    pub end: OrbitEnd,
}

/// Follows the main system from `start` over `eta` in `[0, eta_max]`
/// (or `[eta_max, 0]` when negative), sampling every `spacing`.
pub fn follow_orbit(params: &Params, start: PhaseState, eta_max: f64, spacing: f64) -> OrbitReport {
    let p = *params;
    let events = [
        Event::new(
            EventKind::StateBound,
            Direction::Rising,
            true,
            |_, s: &[f64; 3]| s[0].abs() + s[1].abs() - ESCAPE_BOUND,
        ),
        Event::new(
            EventKind::StateBound,
            Direction::Rising,
            true,
            |_, s: &[f64; 3]| s[2] - Z_MAX,
        ),
    ];
    let result = integrate::integrate(
        |_, s| vf_main(&p, &PhaseState::from_array(*s)).to_array(),
        start.to_array(),
        (0.0, eta_max),
        &events,
        &phase::phase_integrator(),
        Recording {
            max_spacing: Some(spacing),
            endpoint_only: false,
        },
    );
    let sol = match result {
        Ok(sol) => sol,
        Err(e) => {
            return OrbitReport {
                start,
                samples: vec![(0.0, start)],
                cylinder_signs: vec![sign(cylinder_value(params, &start))],
                end: OrbitEnd::Failed {
                    reason: e.to_string(),
                },
            }
        }
    };
    let samples: Vec<(f64, PhaseState)> = sol
        .trajectory
        .iter()
        .map(|&(t, s)| (t, PhaseState::from_array(s)))
        .collect();
    let cylinder_signs = samples
        .iter()
        .map(|(_, s)| sign(cylinder_value(params, s)))
        .collect();
    let last = samples.last().expect("trajectory is never empty").1;
    let end = match sol.termination {
        Termination::Event(_) => {
            let n = (last.x * last.x + last.y * last.y + last.z * last.z).sqrt();
            let direction = [last.x / n, last.y / n, last.z / n];
            OrbitEnd::Escaped {
                direction,
                nearest: nearest_at_infinity(params, direction),
            }
        }
        Termination::Completed => nearest_finite(params, &last)
            .filter(|(_, d)| *d < 1e-3)
            .map_or(OrbitEnd::Horizon, |(label, distance)| OrbitEnd::NearPoint {
                label,
                distance,
            }),
    };
    OrbitReport {
        start,
        samples,
        cylinder_signs,
        end,
    }
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

fn nearest_finite(params: &Params, s: &PhaseState) -> Option<(PointLabel, f64)> {
    critical_points(params)
        .into_iter()
        .filter_map(|cp| match cp.location {
            PointLocation::Finite(p) => Some((cp.label, p.max_dist(s))),
            PointLocation::AtInfinity(_) => None,
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

fn nearest_at_infinity(params: &Params, dir: [f64; 3]) -> PointLabel {
    critical_points(params)
        .into_iter()
        .filter_map(|cp| match cp.location {
            PointLocation::AtInfinity(d) => {
                let dot = d[0] * dir[0] + d[1] * dir[1] + d[2] * dir[2];
                Some((cp.label, dot))
            }
            PointLocation::Finite(_) => None,
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(l, _)| l)
        .expect("catalog has points at infinity")
}

/// Whether an orbit started strictly outside the cylinder stays outside,
/// up to `-1e-8` on `cylinder_value`.
pub fn cylinder_invariance_check(
    params: &Params,
    start: PhaseState,
    eta_max: f64,
) -> Result<CheckOutcome> {
    if cylinder_value(params, &start) <= 0.0 {
        return Err(Error::Domain("start must lie outside the cylinder".into()));
    }
    let report = follow_orbit(params, start, eta_max, 0.01);
    if let OrbitEnd::Failed { reason } = report.end {
        return Ok(CheckOutcome::Indeterminate { reason });
    }
    for (eta, s) in &report.samples {
        let c = cylinder_value(params, s);
        if c <= -1e-8 {
            return Ok(CheckOutcome::Violated {
                detail: format!("cylinder value {c} at eta = {eta}"),
            });
        }
    }
    Ok(CheckOutcome::Holds)
}

/// `(eta, cylinder_value)` along an orbit.
pub fn cylinder_trace(params: &Params, start: PhaseState, eta_max: f64) -> Vec<(f64, f64)> {
    follow_orbit(params, start, eta_max, 0.01)
        .samples
        .iter()
        .map(|(eta, s)| (*eta, cylinder_value(params, s)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterfaceOriginReport {
    pub xi0: f64,
    /// Backward shot reached the axis with `f(0) > 0`.
    pub positive: bool,
    pub f0: Option<f64>,
    pub slope: Option<f64>,
}

/// Backward shot from `xi0`: does the profile stay positive down to the
/// axis?
pub fn interface_origin_check(
    params: &Params,
    xi0: f64,
    config: &ShootingConfig,
) -> Result<InterfaceOriginReport> {
    match shoot_backward(params, xi0, config.epsilon_rel * xi0, false, config) {
        Ok(shot) => match shot.outcome {
            ShotOutcome::ReachedOrigin { f0, slope } => Ok(InterfaceOriginReport {
                xi0,
                positive: f0 > 0.0,
                f0: Some(f0),
                slope: Some(slope),
            }),
            _ => Ok(InterfaceOriginReport {
                xi0,
                positive: false,
                f0: None,
                slope: None,
            }),
        },
        Err(Error::VanishedBeforeAxis { .. }) => Ok(InterfaceOriginReport {
            xi0,
            positive: false,
            f0: None,
            slope: None,
        }),
        Err(e) => Err(e),
    }
}

/// Maximum point `x0 = (m(m-1))^(-m/(m-1)) xi1^(-m sigma/(m-1))` of
/// `phi(x) = x^(1/m)/(m-1) - xi1^sigma x`.
pub fn phi_extremum(params: &Params, xi1: f64) -> Result<f64> {
    let (m, sigma) = (params.m(), params.sigma());
    if !(xi1 > 0.0 || (xi1 == 0.0 && sigma == 0.0)) {
        return Err(Error::Domain(format!("xi1 must be > 0, got {xi1}")));
    }
    let w = xi1.powf(sigma);
    let x0 = (m * (m - 1.0)).powf(-m / (m - 1.0)) * xi1.powf(-m * sigma / (m - 1.0));
    let dphi = x0.powf(1.0 / m - 1.0) / (m * (m - 1.0)) - w;
    if dphi.abs() > 1e-12 * w.max(1.0) {
        return Err(Error::Consistency(format!("phi'(x0) = {dphi}")));
    }
    Ok(x0)
}

/// Two forward shots that start ordered: equal heights with the second
/// rising, or equal zero slopes with the second higher.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MonotonePair {
    Slope { a: f64, slope: f64 },
    Height { a1: f64, a2: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub pair: MonotonePair,
    /// End of the window where the shots must stay ordered.
    pub horizon: f64,
    /// `min (f2 - f1)` over the window, away from a shared start point.
    pub min_gap: f64,
    pub crossed: bool,
}

/// The upper shot stays above the lower one until both have crossed the
/// hyperbola where `phi` peaks.
pub fn monotone_pair_check(
    params: &Params,
    pair: MonotonePair,
    config: &ShootingConfig,
) -> Result<PairReport> {
    let (lower, upper) = match pair {
        MonotonePair::Slope { a, slope } => {
            if !(slope > 0.0) {
                return Err(Error::InvalidParams("slope must be > 0".into()));
            }
            (
                shoot_forward_with_slope(params, a, 0.0, config)?,
                shoot_forward_with_slope(params, a, slope, config)?,
            )
        }
        MonotonePair::Height { a1, a2 } => {
            if !(a2 > a1) {
                return Err(Error::InvalidParams("need a2 > a1".into()));
            }
            (
                shoot_forward_with_slope(params, a1, 0.0, config)?,
                shoot_forward_with_slope(params, a2, 0.0, config)?,
            )
        }
    };
    let first_cross = |s: &crate::shooting::Shot| {
        s.phi_max_crossings
            .first()
            .copied()
            .unwrap_or(s.profile.last().xi)
    };
    let horizon = first_cross(&lower)
        .max(first_cross(&upper))
        .min(lower.profile.last().xi)
        .min(upper.profile.last().xi);
    let m = params.m();
    let n = 4000;
    let mut min_gap = f64::INFINITY;
    for k in 1..=n {
        let xi = horizon * k as f64 / n as f64;
        let f1 = lower.profile.state_at(xi)?.f(m);
        let f2 = upper.profile.state_at(xi)?.f(m);
        min_gap = min_gap.min(f2 - f1);
    }
    Ok(PairReport {
        pair,
        horizon,
        min_gap,
        crossed: min_gap < -1e-9,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct P2OrbitReport {
    /// `xi` where the orbit first reaches the hyperbola `Z = 1/m`.
    pub xi_cross: Option<f64>,
    pub xi_plus: f64,
    /// `min (X - X_bound)` before the crossing; the bound on `X` is the
    /// profile bound `f >= (c xi)^(2/(m-1))` in phase variables.
    pub min_margin: f64,
    /// `cylinder_value` stays positive while the orbit leaves `P2`.
    pub leaves_outward: bool,
    pub holds: bool,
}

/// Coefficient `c` of the lower bound `f >= (c xi)^(2/(m-1))` along the
/// orbit leaving `P2`.
pub fn p2_bound_coefficient(params: &Params) -> f64 {
    let m = params.m();
    (m - 1.0) / (2.0 * m) * ((2.0 * m + 1.0) / (m * (m + 1.0))).sqrt()
}

/// Launch point `P2 + 1e-6 e3`, with `e3` the unit outgoing eigenvector
/// oriented into `Z > 0`.
pub fn p2_launch(params: &Params) -> PhaseState {
    let cp = phase::critical_point(params, PointLabel::P2);
    let PointLocation::Finite(p2) = cp.location else {
        unreachable!("P2 is finite")
    };
    let e = cp.eigenvectors[0];
    let n = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt() * e[2].signum();
    PhaseState::new(
        p2.x + 1e-6 * e[0] / n,
        p2.y + 1e-6 * e[1] / n,
        p2.z + 1e-6 * e[2] / n,
    )
}

pub fn p2_orbit_check(params: &Params) -> Result<P2OrbitReport> {
    let gap = nonexistence_gap(params)?;
    let m = params.m();
    let start = p2_launch(params);
    let p = *params;
    let events = [
        Event::new(
            EventKind::HyperbolaPhiMaxCross,
            Direction::Rising,
            true,
            move |_, s: &[f64; 3]| s[2] - 1.0 / m,
        ),
        Event::new(
            EventKind::StateBound,
            Direction::Rising,
            true,
            |_, s: &[f64; 3]| s[0].abs() + s[1].abs() - ESCAPE_BOUND,
        ),
    ];
    let sol = integrate::integrate(
        |_, s| vf_main(&p, &PhaseState::from_array(*s)).to_array(),
        start.to_array(),
        (0.0, 1e3),
        &events,
        &phase::phase_integrator(),
        Recording {
            max_spacing: Some(0.01),
            endpoint_only: false,
        },
    )?;
    let x_bound = (m * (m - 1.0)).sqrt() * p2_bound_coefficient(params);
    let mut min_margin = f64::INFINITY;
    let cp = phase::critical_point(params, PointLabel::P2);
    let PointLocation::Finite(p2) = cp.location else {
        unreachable!("P2 is finite")
    };
    let mut leaves_outward = true;
    for (_, s) in &sol.trajectory {
        let s = PhaseState::from_array(*s);
        min_margin = min_margin.min(s.x - x_bound);
        if s.max_dist(&p2) < 1e-2 && cylinder_value(params, &s) <= 0.0 {
            leaves_outward = false;
        }
    }
    let xi_cross = match sol.termination {
        Termination::Event(0) => {
            let s = PhaseState::from_array(sol.last().1);
            from_phase(params, &s).map(|(xi, _)| xi)
        }
        _ => None,
    };
    let holds =
        min_margin >= -1e-9 && leaves_outward && xi_cross.is_some_and(|x| x <= gap.xi_plus + 1e-9);
    Ok(P2OrbitReport {
        xi_cross,
        xi_plus: gap.xi_plus,
        min_margin,
        leaves_outward,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackwardBoundReport {
    pub xi0: f64,
    /// Largest `xi` where the profile meets the hyperbola `Z = 1/m`.
    pub last_crossing: Option<f64>,
    pub xi_minus: f64,
    pub f_at_crossing: Option<f64>,
    /// `((m-1) h0 xi / sigma)^(2/(m-1))` at the crossing.
    pub f_bound: Option<f64>,
    pub holds: bool,
}

/// At the last hyperbola crossing of the profile with interface `xi0`, `f`
/// lies below `((m-1) h0 xi/sigma)^(2/(m-1))` and the crossing lies beyond
/// `xi_minus`.
pub fn backward_bound_check(
    params: &Params,
    xi0: f64,
    config: &ShootingConfig,
) -> Result<BackwardBoundReport> {
    let gap = nonexistence_gap(params)?;
    let (m, sigma) = (params.m(), params.sigma());
    let shot = shoot_backward(params, xi0, config.epsilon_rel * xi0, true, config)?;
    let last = shot.phi_max_crossings.last().copied();
    let (f_at, f_bound) = match last {
        Some(xc) => (
            Some(shot.profile.state_at(xc)?.f(m)),
            Some(((m - 1.0) * params.h0() * xc / sigma).powf(2.0 / (m - 1.0))),
        ),
        None => (None, None),
    };
    let holds = match (last, f_at, f_bound) {
        (Some(xc), Some(f), Some(b)) => f <= b * (1.0 + 1e-9) && xc >= gap.xi_minus - 1e-9,
        _ => true,
    };
    Ok(BackwardBoundReport {
        xi0,
        last_crossing: last,
        xi_minus: gap.xi_minus,
        f_at_crossing: f_at,
        f_bound,
        holds,
    })
}

/// `cylinder_value` at the first point where the profile's orbit comes
/// within `radius` (max norm) of `P1` with `Y < 0`, or `None` if it never
/// does.
pub fn p1_entry_value(params: &Params, profile: &Profile, radius: f64) -> Option<f64> {
    let m = params.m();
    let p1 = PhaseState::new(0.0, -params.h0(), 0.0);
    profile
        .samples
        .iter()
        .filter(|s| s.xi > 0.0 && s.g > 0.0)
        .filter_map(|s| to_phase(params, s.xi, s.f(m), s.fprime(m)).ok())
        .find(|s| s.y < 0.0 && s.max_dist(&p1) < radius)
        .map(|s| cylinder_value(params, &s))
}

/// `hyperbola_phi_max` through [`phi_extremum`]: `x0^(1/m)`.
pub fn phi_max_height(params: &Params, xi1: f64) -> Result<f64> {
    Ok(phi_extremum(params, xi1)?.powf(1.0 / params.m()))
}

/// Relative gap between the two expressions for the hyperbola height.
pub fn phi_hyperbola_mismatch(params: &Params, xi1: f64) -> Result<f64> {
    let a = phi_max_height(params, xi1)?;
    let b = hyperbola_phi_max(params, xi1)?;
    Ok((a - b).abs() / b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::plane_invariant;

    fn p(m: f64, s: f64) -> Params {
        Params::new(m, s).unwrap()
    }

    #[test]
    fn phi_extremum_examples() {
        assert!((phi_extremum(&p(2.0, 1.0), 1.0).unwrap() - 0.25).abs() < 1e-15);
        for xi in [0.3, 1.0, 7.0] {
            assert!((phi_extremum(&p(2.0, 0.0), xi).unwrap() - 0.25).abs() < 1e-15);
        }
        for (m, s, xi) in [(2.0, 1.0, 2.0), (3.5, 0.4, 0.7), (1.2, 2.0, 5.0)] {
            assert!(phi_hyperbola_mismatch(&p(m, s), xi).unwrap() < 1e-13);
        }
        assert!(phi_extremum(&p(2.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn orbits_outside_cylinder_stay_outside() {
        let q = p(2.0, 0.5);
        for start in [
            PhaseState::new(0.5, 1.0, 0.5),
            PhaseState::new(1.0, -0.9, 0.2),
            PhaseState::new(0.1, 0.0, 2.0),
        ] {
            assert!(cylinder_invariance_check(&q, start, 30.0).unwrap().holds());
        }
        assert!(cylinder_invariance_check(&q, PhaseState::new(0.1, 0.0, 0.5), 1.0).is_err());
    }

    #[test]
    fn cylinder_point_moves_outward_for_positive_sigma() {
        let q = p(2.0, 1.0);
        let y: f64 = 0.3;
        let start = PhaseState::new(0.5, y, 2.0 * (2.0 / 3.0 - y * y));
        let trace = cylinder_trace(&q, start, 0.5);
        assert!(trace[1..].iter().all(|(_, c)| *c > 0.0));
    }

    #[test]
    fn cylinder_is_invariant_without_weight() {
        let q = p(2.0, 0.0);
        let y: f64 = 0.3;
        let start = PhaseState::new(0.5, y, 2.0 * (2.0 / 3.0 - y * y));
        // The orbit slides along the cylinder into P1, where the direction
        // across the cylinder is unstable and roundoff grows like
        // exp((m+1) h0 eta); compare only until it enters a 0.05 neighborhood.
        let p1 = PhaseState::new(0.0, -q.h0(), 0.0);
        let r = follow_orbit(&q, start, 20.0, 0.01);
        let mut checked = 0;
        for (_, s) in r
            .samples
            .iter()
            .take_while(|(_, s)| s.max_dist(&p1) >= 0.05)
        {
            assert!(cylinder_value(&q, s).abs() < 1e-8);
            checked += 1;
        }
        assert!(checked > 100);
    }

    #[test]
    fn plane_invariant_conserved() {
        let q = p(2.0, 0.0);
        let start = PhaseState::new(0.0, 0.2, 0.7);
        let k0 = plane_invariant(&q, &start);
        let r = follow_orbit(&q, start, 30.0, 0.05);
        for (_, s) in &r.samples {
            assert_eq!(s.x, 0.0);
            assert!((plane_invariant(&q, s) - k0).abs() < 1e-8);
        }
    }

    #[test]
    fn escape_direction_classified() {
        let q = p(2.0, 1.0);
        let r = follow_orbit(&q, PhaseState::new(0.1, -2.0, 0.5), 50.0, 0.1);
        assert!(
            matches!(
                r.end,
                OrbitEnd::Escaped {
                    nearest: PointLabel::Q3,
                    ..
                }
            ),
            "{:?}",
            r.end
        );
    }

    #[test]
    fn interface_profiles_positive_at_axis() {
        let cfg = ShootingConfig::default();
        let r = interface_origin_check(&p(2.0, 4.0), 1.0, &cfg).unwrap();
        assert!(r.positive && r.slope.unwrap() < 0.0);
        let r = interface_origin_check(&p(2.0, 0.0), 2.0 * std::f64::consts::PI, &cfg).unwrap();
        assert!(r.positive && (r.f0.unwrap() - 4.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn monotone_pairs_examples() {
        let cfg = ShootingConfig::default();
        let q = p(2.0, 0.5);
        let r = monotone_pair_check(&q, MonotonePair::Slope { a: 1.0, slope: 0.3 }, &cfg).unwrap();
        assert!(!r.crossed && r.horizon > 0.0, "{r:?}");
        let r = monotone_pair_check(&q, MonotonePair::Height { a1: 0.8, a2: 1.1 }, &cfg).unwrap();
        assert!(!r.crossed, "{r:?}");
    }

    #[test]
    fn p2_orbit_bounds() {
        for (m, s) in [(2.0, 0.5), (2.0, 4.0), (3.0, 1.0)] {
            let r = p2_orbit_check(&p(m, s)).unwrap();
            assert!(r.holds, "{r:?}");
        }
    }

    #[test]
    fn backward_bounds() {
        let cfg = ShootingConfig::default();
        for (m, s) in [(2.0, 4.0), (3.0, 6.0), (2.0, 1.0)] {
            for xi0 in [1.0, 5.0, 20.0] {
                let r = backward_bound_check(&p(m, s), xi0, &cfg).unwrap();
                assert!(r.holds, "{r:?}");
            }
        }
    }

    #[test]
    fn interface_orbits_enter_p1_from_inside() {
        let cfg = ShootingConfig::default();
        let q = p(2.0, 0.5);
        let shot = shoot_backward(&q, 3.0, 3e-6, true, &cfg).unwrap();
        let c = p1_entry_value(&q, &shot.profile, 0.05).expect("reaches P1");
        assert!(c < 0.0, "{c}");
    }
}
