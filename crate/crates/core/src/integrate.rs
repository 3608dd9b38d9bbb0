//! Adaptive explicit integration with dense output and event location.
//!
//! The stepper is the Dormand-Prince 5(4) pair with its free fourth-order
//! continuous extension. Events are bracketed by sampling the dense output at
//! eight points per accepted step and refined by bisection, which stays robust
//! where the event function is flat (degenerate interfaces).

use serde::Serialize;
use thiserror::Error;

/// Tolerances and limits shared by every integration in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Cap on the very first step size.
    pub initial_step_cap: f64,
    pub max_steps: usize,
    pub event_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            initial_step_cap: 1e-6,
            max_steps: 10_000_000,
            event_tol: 1e-12,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), IntegrateError> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_step > 0.0
            && self.initial_step_cap > 0.0
            && self.event_tol > 0.0
            && self.max_steps >= 1;
        if ok {
            Ok(())
        } else {
            Err(IntegrateError::InvalidConfig)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("maximum number of steps ({0}) exceeded")]
    MaxStepsExceeded(usize),
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("invalid integrator configuration")]
    InvalidConfig,
    #[error("empty integration span")]
    EmptySpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EventKind {
    GZero,
    DgZero,
    HyperbolaPhiMaxCross,
    CylinderCross,
    StateBound,
    /// Anything not covered above (test problems, Poincare sections).
    Custom,
}

/// Sign change direction of the event function along the integration
/// direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Rising,
    Falling,
    Any,
}

impl Direction {
    fn admits(self, before: f64, after: f64) -> bool {
        match self {
            Direction::Rising => before < 0.0 && after >= 0.0,
            Direction::Falling => before > 0.0 && after <= 0.0,
            Direction::Any => (before < 0.0 && after >= 0.0) || (before > 0.0 && after <= 0.0),
        }
    }
}

type EventFn<'a, const N: usize> = Box<dyn Fn(f64, &[f64; N]) -> f64 + Send + Sync + 'a>;

pub struct Event<'a, const N: usize> {
    pub kind: EventKind,
    pub direction: Direction,
    pub terminal: bool,
    func: EventFn<'a, N>,
    stop_if: Option<StopFn<'a, N>>,
}

type StopFn<'a, const N: usize> = Box<dyn Fn(f64, &[f64; N]) -> bool + Send + Sync + 'a>;

impl<'a, const N: usize> Event<'a, N> {
    pub fn new(
        kind: EventKind,
        direction: Direction,
        terminal: bool,
        func: impl Fn(f64, &[f64; N]) -> f64 + Send + Sync + 'a,
    ) -> Self {
        Self {
            kind,
            direction,
            terminal,
            func: Box::new(func),
            stop_if: None,
        }
    }

    /// Makes a terminal event stop the integration only at roots where
    /// `pred` holds; other roots are recorded and integration continues.
    pub fn stop_when(mut self, pred: impl Fn(f64, &[f64; N]) -> bool + Send + Sync + 'a) -> Self {
        self.stop_if = Some(Box::new(pred));
        self
    }

    fn stops_at(&self, t: f64, y: &[f64; N]) -> bool {
        self.terminal && self.stop_if.as_ref().is_none_or(|p| p(t, y))
    }

    pub fn eval(&self, t: f64, y: &[f64; N]) -> f64 {
        (self.func)(t, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventRecord<const N: usize> {
    pub kind: EventKind,
    /// Index of the event in the list handed to [`integrate`].
    pub index: usize,
    pub location: f64,
    #[serde(serialize_with = "serialize_array")]
    pub state: [f64; N],
}

fn serialize_array<S: serde::Serializer, const N: usize>(
    v: &[f64; N],
    s: S,
) -> Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&v[..], s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    /// Reached the end of the span.
    Completed,
    /// Stopped by the terminal event with this index.
    Event(usize),
}

#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    /// Accepted points (plus dense samples when requested), ordered along
    /// the integration direction.
    pub trajectory: Vec<(f64, [f64; N])>,
    pub events: Vec<EventRecord<N>>,
    pub termination: Termination,
    pub steps: usize,
}

impl<const N: usize> Solution<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        *self.trajectory.last().expect("trajectory is never empty")
    }

    pub fn terminal_event(&self) -> Option<&EventRecord<N>> {
        match self.termination {
            Termination::Event(idx) => self.events.iter().rev().find(|e| e.index == idx),
            Termination::Completed => None,
        }
    }
}

/// Optional knobs that do not belong to the numerical tolerances.
#[derive(Debug, Clone, Copy, Default)]
pub struct Recording {
    /// When set, the trajectory is filled from the dense output so that
    /// consecutive samples are at most this far apart.
    pub max_spacing: Option<f64>,
    /// Keep only the final state (events are still recorded).
    pub endpoint_only: bool,
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Dense output over one accepted step.
struct Dense<const N: usize> {
    t0: f64,
    h: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> Dense<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let mut out = [0.0; N];
        for i in 0..N {
            let r = &self.r;
            out[i] = r[0][i]
                + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
        }
        out
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

fn all_finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Integrates `rhs` from `y0` over `span`, which may run in either direction.
pub fn integrate<const N: usize, F>(
    mut rhs: F,
    y0: [f64; N],
    span: (f64, f64),
    events: &[Event<'_, N>],
    config: &IntegratorConfig,
    recording: Recording,
) -> Result<Solution<N>, IntegrateError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    config.validate()?;
    let (t0, t1) = span;
    if t0 == t1 {
        return Err(IntegrateError::EmptySpan);
    }
    if !all_finite(&y0) || !t0.is_finite() || !t1.is_finite() {
        return Err(IntegrateError::NonFiniteState { t: t0 });
    }
    let dir = (t1 - t0).signum();
    let length = (t1 - t0).abs();

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    if !all_finite(&k1) {
        return Err(IntegrateError::NonFiniteState { t });
    }

    let mut trajectory = vec![(t, y)];
    let mut records = Vec::new();
    let mut prev_event_vals: Vec<f64> = events.iter().map(|e| e.eval(t, &y)).collect();

    let mut h = initial_step(&mut rhs, t, &y, &k1, dir, config)
        .min(config.max_step)
        .min(length);
    let mut steps = 0usize;
    let mut rejected_last = false;

    loop {
        if steps >= config.max_steps {
            return Err(IntegrateError::MaxStepsExceeded(config.max_steps));
        }
        let remaining = (t1 - t).abs();
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        if h <= 1e-15 * t.abs().max(1e-300) || h < f64::MIN_POSITIVE {
            return Err(IntegrateError::StepUnderflow { t });
        }
        let hs = dir * h;

        let k2 = rhs(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(
            t + C4 * hs,
            &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = rhs(
            t + C5 * hs,
            &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            t + hs,
            &axpy(
                &y,
                hs,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let t_new = if last { t1 } else { t + hs };
        let y_new = axpy(
            &y,
            hs,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = rhs(t_new, &y_new);
        steps += 1;

        let finite = all_finite(&y_new) && all_finite(&k7);
        let err = if finite {
            let mut acc = 0.0;
            for i in 0..N {
                let e = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = config.abs_tol + config.rel_tol * y[i].abs().max(y_new[i].abs());
                acc += (e / sc).powi(2);
            }
            (acc / N as f64).sqrt()
        } else {
            f64::INFINITY
        };

        if !err.is_finite() || err > 1.0 {
            let fac = if err.is_finite() {
                (0.9 * err.powf(-0.2)).max(0.2)
            } else {
                0.1
            };
            h *= fac;
            rejected_last = true;
            continue;
        }

        // Accepted.
        let mut dense = Dense {
            t0: t,
            h: hs,
            r: [[0.0; N]; 5],
        };
        for i in 0..N {
            let ydiff = y_new[i] - y[i];
            let bspl = hs * k1[i] - ydiff;
            dense.r[0][i] = y[i];
            dense.r[1][i] = ydiff;
            dense.r[2][i] = bspl;
            dense.r[3][i] = ydiff - hs * k7[i] - bspl;
            dense.r[4][i] =
                hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }

        // Event detection on eight interior samples.
        let mut fired: Option<(f64, usize)> = None;
        for (idx, ev) in events.iter().enumerate() {
            let mut before = prev_event_vals[idx];
            let mut t_before = t;
            for j in 1..=8 {
                let tj = if j == 8 {
                    t_new
                } else {
                    t + hs * (j as f64 / 8.0)
                };
                let yj = if j == 8 { y_new } else { dense.eval(tj) };
                let after = ev.eval(tj, &yj);
                if ev.direction.admits(before, after) {
                    let loc = refine(ev, &dense, t_before, tj, before, config.event_tol);
                    let state = if loc == t_new { y_new } else { dense.eval(loc) };
                    records.push(EventRecord {
                        kind: ev.kind,
                        index: idx,
                        location: loc,
                        state,
                    });
                    if ev.stops_at(loc, &state) {
                        let closer = match fired {
                            None => true,
                            Some((l, _)) => dir * (loc - l) < 0.0,
                        };
                        if closer {
                            fired = Some((loc, idx));
                        }
                    }
                    break;
                }
                if after != 0.0 {
                    before = after;
                    t_before = tj;
                }
            }
        }

        if let Some((loc, idx)) = fired {
            // Drop records of non-terminal events past the terminal one.
            records.retain(|r| dir * (r.location - loc) <= 0.0);
            records.sort_by(|a, b| (dir * a.location).total_cmp(&(dir * b.location)));
            let state = dense.eval(loc);
            push_samples(&mut trajectory, &dense, t, loc, recording);
            if recording.endpoint_only {
                trajectory.clear();
            }
            trajectory.push((loc, state));
            return Ok(Solution {
                trajectory,
                events: records,
                termination: Termination::Event(idx),
                steps,
            });
        }

        for (idx, ev) in events.iter().enumerate() {
            let v = ev.eval(t_new, &y_new);
            if v != 0.0 || prev_event_vals[idx] == 0.0 {
                prev_event_vals[idx] = v;
            }
        }

        push_samples(&mut trajectory, &dense, t, t_new, recording);
        if recording.endpoint_only {
            trajectory.clear();
        }
        trajectory.push((t_new, y_new));

        t = t_new;
        y = y_new;
        k1 = k7;
        if !finite {
            return Err(IntegrateError::NonFiniteState { t });
        }
        if last {
            records.sort_by(|a, b| (dir * a.location).total_cmp(&(dir * b.location)));
            return Ok(Solution {
                trajectory,
                events: records,
                termination: Termination::Completed,
                steps,
            });
        }

        let mut fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if rejected_last {
            fac = fac.min(1.0);
        }
        rejected_last = false;
        h = (h * fac).min(config.max_step);
    }
}

fn push_samples<const N: usize>(
    traj: &mut Vec<(f64, [f64; N])>,
    dense: &Dense<N>,
    from: f64,
    to: f64,
    recording: Recording,
) {
    if recording.endpoint_only {
        return;
    }
    if let Some(dx) = recording.max_spacing {
        let n = ((to - from).abs() / dx).ceil() as usize;
        for j in 1..n {
            let tj = from + (to - from) * (j as f64 / n as f64);
            traj.push((tj, dense.eval(tj)));
        }
    }
}

fn refine<const N: usize>(
    ev: &Event<'_, N>,
    dense: &Dense<N>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    tol: f64,
) -> f64 {
    let mut fb = ev.eval(b, &dense.eval(b));
    if fb == 0.0 {
        return b;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let fm = ev.eval(mid, &dense.eval(mid));
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
        if fb.abs() < tol && (b - a).abs() <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
            break;
        }
    }
    if fa.abs() < fb.abs() && fa.abs() < tol {
        a
    } else {
        b
    }
}

fn initial_step<const N: usize, F>(
    rhs: &mut F,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    config: &IntegratorConfig,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    // Hairer-Norsett-Wanner starting step heuristic.
    let sc = |i: usize| config.abs_tol + config.rel_tol * y[i].abs();
    let norm = |v: &[f64; N]| {
        let mut acc = 0.0;
        for i in 0..N {
            acc += (v[i] / sc(i)).powi(2);
        }
        (acc / N as f64).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(config.initial_step_cap);
    let y1 = axpy(y, dir * h0, &[(1.0, f0)]);
    let f1 = rhs(t + dir * h0, &y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    let h = (100.0 * h0).min(h1);
    if h.is_finite() && h > 0.0 {
        h.min(config.initial_step_cap)
    } else {
        config.initial_step_cap
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exponential_decay() {
        let sol = integrate(
            |_, y: &[f64; 1]| [-y[0]],
            [1.0],
            (0.0, 1.0),
            &[],
            &IntegratorConfig::default(),
            Recording::default(),
        )
        .unwrap();
        let (t, y) = sol.last();
        assert_eq!(t, 1.0);
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-9);
        assert_eq!(sol.termination, Termination::Completed);
    }

    #[test]
    fn harmonic_oscillator_falling_zero() {
        let ev = Event::new(
            EventKind::Custom,
            Direction::Falling,
            true,
            |_, y: &[f64; 2]| y[0],
        );
        let sol = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            [1.0, 0.0],
            (0.0, 10.0),
            &[ev],
            &IntegratorConfig::default(),
            Recording::default(),
        )
        .unwrap();
        let rec = sol.terminal_event().unwrap();
        assert!((rec.location - PI / 2.0).abs() < 1e-9, "{}", rec.location);
        assert!(rec.state[0].abs() < 1e-12);
    }

    #[test]
    fn direction_filter_skips_rising_crossings() {
        // sin(t) rises through zero at 2*pi, falls at pi.
        let ev = Event::new(
            EventKind::Custom,
            Direction::Rising,
            false,
            |_, y: &[f64; 2]| y[0],
        );
        let sol = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            [0.0, 1.0],
            (0.0, 7.0),
            &[ev],
            &IntegratorConfig::default(),
            Recording::default(),
        )
        .unwrap();
        assert_eq!(sol.events.len(), 1);
        assert!((sol.events[0].location - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn backward_span() {
        let sol = integrate(
            |_, y: &[f64; 1]| [y[0]],
            [1.0],
            (0.0, -2.0),
            &[],
            &IntegratorConfig::default(),
            Recording::default(),
        )
        .unwrap();
        let (_, y) = sol.last();
        assert!((y[0] - (-2.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn forward_then_backward_returns() {
        let cfg = IntegratorConfig::default();
        let f = |_: f64, y: &[f64; 2]| [y[1], -y[0].sin()];
        let fwd = integrate(f, [0.3, 0.2], (0.0, 5.0), &[], &cfg, Recording::default()).unwrap();
        let (_, y5) = fwd.last();
        let back = integrate(f, y5, (5.0, 0.0), &[], &cfg, Recording::default()).unwrap();
        let (_, y0) = back.last();
        assert!((y0[0] - 0.3).abs() < 100.0 * cfg.rel_tol);
        assert!((y0[1] - 0.2).abs() < 100.0 * cfg.rel_tol);
    }

    #[test]
    fn dense_sampling_bounds_spacing() {
        let sol = integrate(
            |_, y: &[f64; 1]| [-y[0]],
            [1.0],
            (0.0, 1.0),
            &[],
            &IntegratorConfig::default(),
            Recording {
                max_spacing: Some(0.01),
                endpoint_only: false,
            },
        )
        .unwrap();
        for w in sol.trajectory.windows(2) {
            assert!(w[1].0 - w[0].0 <= 0.01 + 1e-12);
            assert!(w[1].0 > w[0].0);
        }
        for (t, y) in &sol.trajectory {
            assert!((y[0] - (-t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn event_function_small_at_reported_location() {
        let ev = Event::new(
            EventKind::Custom,
            Direction::Any,
            false,
            |t, y: &[f64; 1]| y[0] - 0.5 - 0.1 * t,
        );
        let sol = integrate(
            |_, y: &[f64; 1]| [-y[0]],
            [1.0],
            (0.0, 3.0),
            &[ev],
            &IntegratorConfig::default(),
            Recording::default(),
        )
        .unwrap();
        assert_eq!(sol.events.len(), 1);
        let r = &sol.events[0];
        assert!((r.state[0] - 0.5 - 0.1 * r.location).abs() < 1e-12);
    }

    #[test]
    fn zero_start_is_not_an_event() {
        let ev = Event::new(EventKind::GZero, Direction::Any, true, |_, y: &[f64; 2]| {
            y[0]
        });
        let sol = integrate(
            |_, _y: &[f64; 2]| [0.0, 0.0],
            [0.0, 0.0],
            (0.0, 1.0),
            &[ev],
            &IntegratorConfig::default(),
            Recording::default(),
        )
        .unwrap();
        assert!(sol.events.is_empty());
    }

    #[test]
    fn max_steps_reported() {
        let cfg = IntegratorConfig {
            max_steps: 3,
            max_step: 0.01,
            ..Default::default()
        };
        let err = integrate(
            |_, y: &[f64; 1]| [-y[0]],
            [1.0],
            (0.0, 1.0),
            &[],
            &cfg,
            Recording::default(),
        )
        .unwrap_err();
        assert_eq!(err, IntegrateError::MaxStepsExceeded(3));
    }

    #[test]
    fn blowup_is_an_error() {
        // y' = y^2 blows up at t = 1.
        let err = integrate(
            |_, y: &[f64; 1]| [y[0] * y[0]],
            [1.0],
            (0.0, 2.0),
            &[],
            &IntegratorConfig::default(),
            Recording::default(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            IntegrateError::StepUnderflow { .. }
                | IntegrateError::NonFiniteState { .. }
                | IntegrateError::MaxStepsExceeded(_)
        ));
    }

    #[test]
    fn halving_tolerance_moves_events_little() {
        let run = |rtol: f64| {
            let ev = Event::new(
                EventKind::Custom,
                Direction::Falling,
                true,
                |_, y: &[f64; 2]| y[0],
            );
            let cfg = IntegratorConfig {
                rel_tol: rtol,
                ..Default::default()
            };
            integrate(
                |_, y: &[f64; 2]| [y[1], -y[0] - 0.1 * y[0].powi(3)],
                [1.0, 0.0],
                (0.0, 20.0),
                &[ev],
                &cfg,
                Recording::default(),
            )
            .unwrap()
            .terminal_event()
            .unwrap()
            .location
        };
        let a = run(1e-8);
        let b = run(0.5e-8);
        assert!((a - b).abs() < 10.0 * 1e-8);
    }
}
