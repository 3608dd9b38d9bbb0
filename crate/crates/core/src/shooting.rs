//! Forward and backward shooting for the profile equation, the search for
//! good profiles with an interface, and the non-existence gap.
//!
//! Forward shots start at the axis with `f(0) = a`. Backward shots start just
//! inside a prescribed interface `xi0`, seeded by the leading term of the
//! local interface expansion, and run to the axis.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{
    self, Direction, Event, EventKind, EventRecord, IntegrateError, IntegratorConfig, Recording,
    Solution, Termination,
};
use crate::model::{rhs_g_clamped, Params, Profile, ProfileState, Provenance};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ShotOutcome {
    /// The profile reaches zero with zero flux.
    Interface {
        xi0: f64,
    },
    /// The profile reaches zero with `f' = -infinity`.
    VerticalSlope {
        xi0: f64,
    },
    ReachedOrigin {
        f0: f64,
        slope: f64,
    },
    Diverged {
        reason: String,
    },
    /// Neither vanished nor failed before `xi_max`.
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootingConfig {
    pub integrator: IntegratorConfig,
    /// Backward shots start at `xi0 (1 - epsilon_rel)`.
    pub epsilon_rel: f64,
    pub slope_tol: f64,
    pub max_bisections: usize,
    pub dedup_tol: f64,
    pub xi_max: f64,
    /// Largest gap between stored samples.
    pub sample_spacing: f64,
    /// A zero of `g` counts as an interface when `|dg|` there is below this
    /// fraction of the largest `|dg|` along the shot.
    pub vanish_tol: f64,
    /// Agreement required between slopes computed with `epsilon` and
    /// `epsilon / 2`, relative to `1 + |slope|`.
    pub richardson_tol: f64,
    /// Forward shots read off the interface position where the phase
    /// `k d` of the local expansion `w ~ sin(k d) / k` falls to this value.
    pub extrapolation_angle: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig {
                rel_tol: 1e-12,
                abs_tol: 1e-30,
                ..IntegratorConfig::default()
            },
            epsilon_rel: 1e-6,
            slope_tol: 1e-6,
            max_bisections: 60,
            dedup_tol: 1e-6,
            xi_max: 1e3,
            sample_spacing: 1e-3,
            vanish_tol: 1e-6,
            richardson_tol: 1e-4,
            extrapolation_angle: 0.5,
        }
    }
}

impl ShootingConfig {
    pub fn validate(&self) -> Result<()> {
        self.integrator
            .validate()
            .map_err(|_| Error::InvalidParams("invalid integrator tolerances".into()))?;
        let positive = [
            self.epsilon_rel,
            self.slope_tol,
            self.dedup_tol,
            self.xi_max,
            self.sample_spacing,
            self.vanish_tol,
            self.richardson_tol,
            self.extrapolation_angle,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) || self.epsilon_rel >= 0.5 {
            return Err(Error::InvalidParams(
                "invalid shooting configuration".into(),
            ));
        }
        Ok(())
    }
}

/// A shot together with the places where it crossed the hyperbola
/// `m(m-1) xi^sigma f^(m-1) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Shot {
    pub profile: Profile,
    pub outcome: ShotOutcome,
    /// Crossing locations in increasing `xi`.
    pub phi_max_crossings: Vec<f64>,
}

/// `m (m-1) xi^sigma g^((m-1)/m) - 1`: zero on the hyperbola where
/// `phi(x) = x^(1/m)/(m-1) - xi^sigma x` peaks.
fn phi_max_level(params: &Params, xi: f64, g: f64) -> f64 {
    let m = params.m();
    m * (m - 1.0) * xi.max(0.0).powf(params.sigma()) * g.max(0.0).powf((m - 1.0) / m) - 1.0
}

fn rhs(params: &Params) -> impl FnMut(f64, &[f64; 2]) -> [f64; 2] + '_ {
    move |xi, y| [y[1], rhs_g_clamped(params, xi, y[0])]
}

fn to_samples(sol: &Solution<2>) -> Vec<ProfileState> {
    sol.trajectory
        .iter()
        .map(|&(xi, y)| ProfileState {
            xi,
            g: y[0],
            dg: y[1],
        })
        .collect()
}

/// Splits extrema records into sorted maxima and minima.
fn extrema(params: &Params, records: &[EventRecord<2>], dg_index: usize) -> (Vec<f64>, Vec<f64>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for r in records.iter().filter(|r| r.index == dg_index) {
        let curv = rhs_g_clamped(params, r.location, r.state[0]);
        if curv < 0.0 {
            maxima.push(r.location);
        } else if curv > 0.0 {
            minima.push(r.location);
        }
    }
    maxima.sort_by(f64::total_cmp);
    minima.sort_by(f64::total_cmp);
    (maxima, minima)
}

fn crossings(records: &[EventRecord<2>], index: usize) -> Vec<f64> {
    let mut v: Vec<f64> = records
        .iter()
        .filter(|r| r.index == index)
        .map(|r| r.location)
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Interface position read off a state before it. With `w = f^((m-1)/2)`,
/// `p = 2m/(m-1)`, `k = xi^(sigma/2)/p` and `d` the distance to the
/// interface, `w` is proportional to `sin(k d)` when `sigma = 0` and agrees
/// with it through the cubic term otherwise, so `r = w/|w'|` gives
/// `d = atan(k r)/k`.
fn interface_from_state(params: &Params, xi: f64, g: f64, dg: f64) -> f64 {
    let m = params.m();
    let p = 2.0 * m / (m - 1.0);
    let r = -p * g / dg;
    let k = xi.powf(0.5 * params.sigma()) / p;
    xi + (k * r).atan() / k
}

/// Forward shot with `f(0) = a` and `f'(0) = 0`.
pub fn shoot_forward(params: &Params, a: f64, config: &ShootingConfig) -> Result<Shot> {
    shoot_forward_with_slope(params, a, 0.0, config)
}

/// Forward shot with `f(0) = a` and `f'(0) = slope`.
pub fn shoot_forward_with_slope(
    params: &Params,
    a: f64,
    slope: f64,
    config: &ShootingConfig,
) -> Result<Shot> {
    config.validate()?;
    if !(a.is_finite() && a > 0.0 && slope.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "forward shot needs a > 0 and a finite slope, got a = {a}, slope = {slope}"
        )));
    }
    let m = params.m();
    let sigma = params.sigma();
    let g0 = a.powf(m);
    let dg0 = m * a.powf(m - 1.0) * slope;
    let touch = config.vanish_tol * g0;
    let reach = config.extrapolation_angle.tan() * 2.0 * m / (m - 1.0);
    let p = *params;

    let events = [
        Event::new(
            EventKind::GZero,
            Direction::Falling,
            true,
            |_, y: &[f64; 2]| y[0],
        ),
        Event::new(
            EventKind::DgZero,
            Direction::Any,
            false,
            |_, y: &[f64; 2]| y[1],
        ),
        Event::new(
            EventKind::HyperbolaPhiMaxCross,
            Direction::Any,
            false,
            move |xi, y: &[f64; 2]| phi_max_level(&p, xi, y[0]),
        ),
        // Marks the point where w/|w'|, with w = f^((m-1)/2), drops to the
        // extrapolation reach.
        Event::new(
            EventKind::Custom,
            Direction::Falling,
            false,
            move |xi, y: &[f64; 2]| {
                let r = reach / xi.powf(sigma).max(1.0).sqrt();
                2.0 * m * y[0] + (m - 1.0) * r * y[1]
            },
        ),
        // A minimum of g that almost touches zero.
        Event::new(
            EventKind::DgZero,
            Direction::Rising,
            true,
            |_, y: &[f64; 2]| y[1],
        )
        .stop_when(move |_, y| y[0] < touch),
    ];

    let result = integrate::integrate(
        rhs(params),
        [g0, dg0],
        (0.0, config.xi_max),
        &events,
        &config.integrator,
        Recording {
            max_spacing: Some(config.sample_spacing),
            endpoint_only: false,
        },
    );
    let initial = ProfileState {
        xi: 0.0,
        g: g0,
        dg: dg0,
    };
    let mut profile = Profile {
        params: *params,
        samples: vec![initial],
        provenance: Provenance::ForwardShot { a },
        maxima: Vec::new(),
        minima: Vec::new(),
        interface: None,
        slope_at_origin: Some(slope),
    };
    let sol = match result {
        Ok(sol) => sol,
        Err(IntegrateError::MaxStepsExceeded(_)) => {
            return Ok(Shot {
                profile,
                outcome: ShotOutcome::Exhausted,
                phi_max_crossings: Vec::new(),
            })
        }
        Err(e) => {
            return Ok(Shot {
                profile,
                outcome: ShotOutcome::Diverged {
                    reason: e.to_string(),
                },
                phi_max_crossings: Vec::new(),
            })
        }
    };

    profile.samples = to_samples(&sol);
    let (mut maxima, minima) = extrema(params, &sol.events, 1);
    if slope == 0.0 && rhs_g_clamped(params, 0.0, g0) < 0.0 {
        maxima.insert(0, 0.0);
    }
    profile.maxima = maxima;
    profile.minima = minima;
    let phi_max_crossings = crossings(&sol.events, 2);

    let max_dg = profile
        .samples
        .iter()
        .map(|s| s.dg.abs())
        .fold(0.0, f64::max);
    let extrapolated = |end: f64| {
        sol.events
            .iter()
            .rfind(|r| r.index == 3 && r.location <= end && r.state[1] < 0.0)
            .map(|r| interface_from_state(params, r.location, r.state[0], r.state[1]))
            .unwrap_or(end)
    };
    let outcome = match sol.termination {
        Termination::Completed => ShotOutcome::Exhausted,
        Termination::Event(0) => {
            let end = sol.terminal_event().expect("terminal record");
            if end.state[1].abs() < config.vanish_tol * max_dg {
                ShotOutcome::Interface {
                    xi0: extrapolated(end.location),
                }
            } else {
                ShotOutcome::VerticalSlope { xi0: end.location }
            }
        }
        Termination::Event(_) => {
            let end = sol.terminal_event().expect("terminal record");
            ShotOutcome::Interface {
                xi0: extrapolated(end.location),
            }
        }
    };
    if let ShotOutcome::Interface { xi0 } = outcome {
        profile.interface = Some(xi0);
    }
    Ok(Shot {
        profile,
        outcome,
        phi_max_crossings,
    })
}

/// Initial state `(g, dg)` at `xi0 - epsilon` from the interface expansion
/// `f^((m-1)/2) ~ C (xi0 - xi)`.
pub fn interface_seed(params: &Params, epsilon: f64) -> (f64, f64) {
    let m = params.m();
    let c = (m - 1.0) * params.h0() / (2.0 * (m * (m - 1.0)).sqrt());
    let ce = c * epsilon;
    let g = ce.powf(2.0 * m / (m - 1.0));
    let dg = -(2.0 * m / (m - 1.0)) * c * ce.powf((m + 1.0) / (m - 1.0));
    (g, dg)
}

/// Backward shot from an interface at `xi0`, started at `xi0 - epsilon`.
///
/// `sampled = false` stores only the two end states, which is all a slope
/// evaluation needs.
pub fn shoot_backward(
    params: &Params,
    xi0: f64,
    epsilon: f64,
    sampled: bool,
    config: &ShootingConfig,
) -> Result<Shot> {
    config.validate()?;
    if !(xi0.is_finite() && xi0 > 0.0) {
        return Err(Error::InvalidParams(format!("xi0 must be > 0, got {xi0}")));
    }
    if !(epsilon > 0.0 && epsilon < 0.5 * xi0) {
        return Err(Error::InvalidParams(format!(
            "epsilon must lie in (0, xi0/2), got {epsilon}"
        )));
    }
    let m = params.m();
    let (g0, dg0) = interface_seed(params, epsilon);
    let start = xi0 - epsilon;
    let mut integrator = config.integrator;
    integrator.abs_tol = integrator
        .abs_tol
        .min(integrator.rel_tol * g0.min(dg0.abs()))
        .max(f64::MIN_POSITIVE);
    integrator.initial_step_cap = integrator.initial_step_cap.min(1e-3 * epsilon);
    let p = *params;

    let events = [
        Event::new(
            EventKind::GZero,
            Direction::Falling,
            true,
            |_, y: &[f64; 2]| y[0],
        ),
        Event::new(
            EventKind::DgZero,
            Direction::Any,
            false,
            |_, y: &[f64; 2]| y[1],
        ),
        Event::new(
            EventKind::HyperbolaPhiMaxCross,
            Direction::Any,
            false,
            move |xi, y: &[f64; 2]| phi_max_level(&p, xi, y[0]),
        ),
        Event::new(
            EventKind::StateBound,
            Direction::Rising,
            true,
            |_, y: &[f64; 2]| y[0] - 1e200,
        ),
    ];
    let spacing = config.sample_spacing.min(xi0 * 1e-3);
    let sol = integrate::integrate(
        rhs(params),
        [g0, dg0],
        (start, 0.0),
        &events,
        &integrator,
        Recording {
            max_spacing: Some(spacing),
            endpoint_only: !sampled,
        },
    )?;

    let mut samples = to_samples(&sol);
    if sampled {
        samples.reverse();
    } else {
        samples.insert(
            0,
            ProfileState {
                xi: start,
                g: g0,
                dg: dg0,
            },
        );
        samples.reverse();
    }
    samples.push(ProfileState {
        xi: xi0,
        g: 0.0,
        dg: 0.0,
    });

    let (maxima, minima) = extrema(params, &sol.events, 1);
    let phi_max_crossings = crossings(&sol.events, 2);
    let mut profile = Profile {
        params: *params,
        samples,
        provenance: Provenance::BackwardShot { xi0, epsilon },
        maxima,
        minima,
        interface: Some(xi0),
        slope_at_origin: None,
    };

    let outcome = match sol.termination {
        Termination::Completed => {
            let (_, y) = sol.last();
            let g = y[0];
            if g <= 0.0 {
                return Err(Error::VanishedBeforeAxis { xi0, at: 0.0 });
            }
            let f0 = g.powf(1.0 / m);
            let slope = y[1] / (m * g.powf((m - 1.0) / m));
            profile.slope_at_origin = Some(slope);
            ShotOutcome::ReachedOrigin { f0, slope }
        }
        Termination::Event(0) => {
            let at = sol.terminal_event().map(|r| r.location).unwrap_or(0.0);
            return Err(Error::VanishedBeforeAxis { xi0, at });
        }
        Termination::Event(_) => ShotOutcome::Diverged {
            reason: "g exceeded the state bound".into(),
        },
    };
    Ok(Shot {
        profile,
        outcome,
        phi_max_crossings,
    })
}

/// Maxima of the profile in the open support; the origin is included when
/// the slope there vanishes and the profile is concave at it.
pub fn count_maxima(profile: &Profile) -> usize {
    profile.maxima.len()
}

fn origin_maximum(params: &Params, profile: &mut Profile, slope_tol: f64) {
    let first = *profile.first();
    let flat = profile.slope_at_origin.is_some_and(|s| s.abs() < slope_tol);
    if first.xi == 0.0
        && flat
        && rhs_g_clamped(params, 0.0, first.g) < 0.0
        && profile.maxima.first() != Some(&0.0)
    {
        // A nearly flat start puts a root of g' within about
        // |g'(0) / g''(0)| of the axis; it is the same maximum.
        let near = 1e-4 * profile.last().xi;
        profile.maxima.retain(|&x| x > near);
        profile.maxima.insert(0, 0.0);
    }
}

fn backward_slope(params: &Params, xi0: f64, epsilon: f64, config: &ShootingConfig) -> Result<f64> {
    match shoot_backward(params, xi0, epsilon, false, config)?.outcome {
        ShotOutcome::ReachedOrigin { slope, .. } => Ok(slope),
        other => Err(Error::Consistency(format!(
            "backward shot from {xi0} ended with {other:?}"
        ))),
    }
}

/// `f'(0)` of the profile with interface at `xi0`, checked against the same
/// computation with half the starting offset.
pub fn slope_fn(params: &Params, xi0: f64, config: &ShootingConfig) -> Result<f64> {
    let eps = config.epsilon_rel * xi0;
    let coarse = backward_slope(params, xi0, eps, config)?;
    let fine = backward_slope(params, xi0, 0.5 * eps, config)?;
    if (coarse - fine).abs() > config.richardson_tol * (1.0 + fine.abs()) {
        return Err(Error::Unreliable { xi0, coarse, fine });
    }
    Ok(fine)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodProfile {
    pub params: Params,
    /// `f(0)`
    pub a: f64,
    pub xi0: f64,
    pub n_max: usize,
    pub profile: Profile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodProfileSearch {
    pub profiles: Vec<GoodProfile>,
    /// Grid points whose slope could not be trusted.
    pub unreliable: usize,
    /// Sign changes where bisection did not reach the slope tolerance.
    pub unresolved: usize,
    /// `(xi0, slope)` on the grid, `None` where the evaluation failed.
    pub grid: Vec<(f64, Option<f64>)>,
}

fn bisect(
    params: &Params,
    mut lo: (f64, f64),
    mut hi: (f64, f64),
    config: &ShootingConfig,
) -> Option<f64> {
    let slope_at = |x: f64| backward_slope(params, x, config.epsilon_rel * x, config).ok();
    for _ in 0..config.max_bisections {
        let mid = 0.5 * (lo.0 + hi.0);
        let s = slope_at(mid)?;
        if s.abs() < config.slope_tol {
            return Some(mid);
        }
        if (s < 0.0) == (lo.1 < 0.0) {
            lo = (mid, s);
        } else {
            hi = (mid, s);
        }
    }
    None
}

/// Builds the good profile with interface at `xi0`, or `None` when its slope
/// at the origin misses the tolerance.
pub fn good_profile_at(
    params: &Params,
    xi0: f64,
    config: &ShootingConfig,
) -> Result<Option<GoodProfile>> {
    let slope = slope_fn(params, xi0, config)?;
    if slope.abs() >= config.slope_tol {
        return Ok(None);
    }
    let shot = shoot_backward(params, xi0, config.epsilon_rel * xi0, true, config)?;
    let ShotOutcome::ReachedOrigin { f0, .. } = shot.outcome else {
        return Ok(None);
    };
    let mut profile = shot.profile;
    origin_maximum(params, &mut profile, config.slope_tol);
    Ok(Some(GoodProfile {
        params: *params,
        a: f0,
        xi0,
        n_max: count_maxima(&profile),
        profile,
    }))
}

/// Good profiles with interface in `[xi0_lo, xi0_hi]`: sign changes of
/// `slope_fn` on a uniform grid, refined by bisection in `xi0`.
pub fn find_good_profiles(
    params: &Params,
    xi0_lo: f64,
    xi0_hi: f64,
    grid_n: usize,
    config: &ShootingConfig,
) -> Result<GoodProfileSearch> {
    config.validate()?;
    if !(xi0_lo > 0.0 && xi0_hi > xi0_lo && xi0_hi.is_finite()) || grid_n < 2 {
        return Err(Error::InvalidParams(format!(
            "need 0 < xi0_lo < xi0_hi and grid_n >= 2, got [{xi0_lo}, {xi0_hi}], {grid_n}"
        )));
    }
    let grid: Vec<(f64, Option<f64>)> = (0..grid_n)
        .into_par_iter()
        .map(|k| {
            let x = xi0_lo + (xi0_hi - xi0_lo) * k as f64 / (grid_n - 1) as f64;
            (x, slope_fn(params, x, config).ok())
        })
        .collect();
    let unreliable = grid.iter().filter(|(_, s)| s.is_none()).count();

    let mut brackets = Vec::new();
    let mut exact = Vec::new();
    for w in grid.windows(2) {
        if let ((x0, Some(s0)), (x1, Some(s1))) = (w[0], w[1]) {
            if s0 == 0.0 {
                exact.push(x0);
            } else if s0 * s1 < 0.0 {
                brackets.push(((x0, s0), (x1, s1)));
            }
        }
    }
    if let Some((x, Some(s))) = grid.last() {
        if *s == 0.0 {
            exact.push(*x);
        }
    }

    let roots: Vec<Option<f64>> = brackets
        .par_iter()
        .map(|&(lo, hi)| bisect(params, lo, hi, config))
        .collect();
    let unresolved = roots.iter().filter(|r| r.is_none()).count();
    let mut xs: Vec<f64> = roots.into_iter().flatten().chain(exact).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|b, a| (*b - *a).abs() < config.dedup_tol);

    let built: Vec<Result<Option<GoodProfile>>> = xs
        .par_iter()
        .map(|&x| good_profile_at(params, x, config))
        .collect();
    let mut profiles = Vec::new();
    let mut unresolved = unresolved;
    for b in built {
        match b {
            Ok(Some(gp)) => profiles.push(gp),
            _ => unresolved += 1,
        }
    }
    Ok(GoodProfileSearch {
        profiles,
        unreliable,
        unresolved,
        grid,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub sigma: f64,
    pub result: std::result::Result<GoodProfileSearch, String>,
}

impl ScanRow {
    pub fn count(&self) -> usize {
        self.result.as_ref().map_or(0, |r| r.profiles.len())
    }
}

/// Good-profile counts per `sigma` over `(0, xi0_hi]`; a lower bound on the
/// multiplicity, limited by the window and grid.
pub fn multiplicity_scan(
    m: f64,
    sigmas: &[f64],
    xi0_hi: f64,
    grid_n: usize,
    config: &ShootingConfig,
) -> Result<Vec<ScanRow>> {
    if sigmas.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::InvalidParams("sigmas must be >= 0".into()));
    }
    if grid_n < 2 {
        return Err(Error::InvalidParams("grid_n must be >= 2".into()));
    }
    let mut rows: Vec<ScanRow> = sigmas
        .par_iter()
        .map(|&sigma| {
            let result = Params::new(m, sigma)
                .and_then(|p| {
                    find_good_profiles(&p, xi0_hi / grid_n as f64, xi0_hi, grid_n, config)
                })
                .map_err(|e| e.to_string());
            ScanRow { sigma, result }
        })
        .collect();
    rows.sort_by(|a, b| a.sigma.total_cmp(&b.sigma));
    Ok(rows)
}

/// Bounds behind the non-existence result for large `sigma`, in the native
/// variable `xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonexistenceGap {
    /// Upper bound for the first hyperbola crossing of forward good profiles.
    pub xi_plus: f64,
    /// Lower bound for the last hyperbola crossing of interface profiles.
    pub xi_minus: f64,
    /// `2m sqrt(2m/(2m+1))`
    pub sigma_threshold: f64,
    pub gap: bool,
}

pub fn nonexistence_gap(params: &Params) -> Result<NonexistenceGap> {
    params.require_positive_sigma()?;
    let (m, sigma) = (params.m(), params.sigma());
    let e = 1.0 / (sigma + 2.0);
    let xi_plus = (4.0 * m * m * (m + 1.0) / ((2.0 * m + 1.0) * (m - 1.0).powi(3))).powf(e);
    let xi_minus = ((m + 1.0) * sigma * sigma / (2.0 * m * (m - 1.0).powi(3))).powf(e);
    Ok(NonexistenceGap {
        xi_plus,
        xi_minus,
        sigma_threshold: 2.0 * m * (2.0 * m / (2.0 * m + 1.0)).sqrt(),
        gap: xi_minus > xi_plus,
    })
}

/// `sigma^2 > 8 m^3 / (2m + 1)`.
pub fn gap_by_threshold(params: &Params) -> bool {
    let m = params.m();
    params.sigma().powi(2) > 8.0 * m.powi(3) / (2.0 * m + 1.0)
}
