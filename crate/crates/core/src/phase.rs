//! The quadratic autonomous system in `(X, Y, Z)`, the alternative system in
//! `(x, y, z)`, the critical-point catalog, the cylinder separatrix and the
//! normal form at the fold-Hopf point `P3`.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{self, Direction, Event, EventKind, IntegratorConfig, Recording};
use crate::model::Params;

/// Orbits with `Z` beyond this are flagged: no orbit may approach `Q4`.
pub const Z_MAX: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PhaseState {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn max_dist(&self, other: &PhaseState) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }
}

/// State of the alternative system: `x = f^(m-1)`, `y = f^(m-2) f'`, `z = xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AltPhaseState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub fn vf_main(params: &Params, s: &PhaseState) -> PhaseState {
    let (m, sigma) = (params.m(), params.sigma());
    PhaseState {
        x: 0.5 * (m - 1.0) * s.x * s.y - s.x * s.x,
        y: -0.5 * (m + 1.0) * s.y * s.y + 1.0 - s.z,
        z: s.z * ((m - 1.0) * s.y + sigma * s.x),
    }
}

pub fn vf_alt(params: &Params, s: &AltPhaseState) -> AltPhaseState {
    let (m, sigma) = (params.m(), params.sigma());
    AltPhaseState {
        x: m * (m - 1.0) * s.x * s.y,
        y: -m * s.y * s.y + s.x / (m - 1.0) - s.z.max(0.0).powf(sigma) * s.x * s.x,
        z: m * s.x,
    }
}

pub fn jacobian_main(params: &Params, s: &PhaseState) -> Matrix3<f64> {
    let (m, sigma) = (params.m(), params.sigma());
    Matrix3::new(
        0.5 * (m - 1.0) * s.y - 2.0 * s.x,
        0.5 * (m - 1.0) * s.x,
        0.0,
        0.0,
        -(m + 1.0) * s.y,
        -1.0,
        sigma * s.z,
        (m - 1.0) * s.z,
        (m - 1.0) * s.y + sigma * s.x,
    )
}

/// Profile point `(xi, f, f')` to phase coordinates.
pub fn to_phase(params: &Params, xi: f64, f: f64, fprime: f64) -> Result<PhaseState> {
    if !(xi > 0.0 && f > 0.0) {
        return Err(Error::Domain(format!(
            "phase map needs xi > 0 and f > 0, got xi = {xi}, f = {f}"
        )));
    }
    let (m, sigma) = (params.m(), params.sigma());
    let k = (m * (m - 1.0)).sqrt();
    Ok(PhaseState {
        x: k / xi * f.powf(0.5 * (m - 1.0)),
        y: k * f.powf(0.5 * (m - 3.0)) * fprime,
        z: (m - 1.0) * xi.powf(sigma) * f.powf(m - 1.0),
    })
}

/// Inverse of [`to_phase`] for `X > 0`, `Z > 0`: returns `(xi, f)`.
pub fn from_phase(params: &Params, s: &PhaseState) -> Option<(f64, f64)> {
    if !(s.x > 0.0 && s.z > 0.0) {
        return None;
    }
    let (m, sigma) = (params.m(), params.sigma());
    // Z = xi^(sigma+2) X^2 / m
    let xi = (m * s.z / (s.x * s.x)).powf(1.0 / (sigma + 2.0));
    let f = (s.x * s.x * xi * xi / (m * (m - 1.0))).powf(1.0 / (m - 1.0));
    Some((xi, f))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PointLabel {
    P0,
    P1,
    P2,
    P3,
    Q1,
    Q2,
    Q3,
    Q4,
    Q5,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PointLocation {
    Finite(PhaseState),
    /// Direction `(X, Y, Z, 0)` on the equator of the Poincare hypersphere.
    AtInfinity([f64; 4]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StabilityKind {
    /// Two unstable directions, one stable.
    Saddle2u1s,
    Saddle1u2s,
    Nonhyperbolic,
    UnstableNode,
    StableNode,
}

/// Local behavior of the profiles carried by orbits at the point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LocalBehavior {
    /// Profiles leaving an interface: `f ~ (c xi - K)_+^(2/(m-1))`.
    InterfaceOutgoing,
    /// Profiles reaching an interface: `f ~ (K - c xi)_+^(2/(m-1))`.
    InterfaceIncoming,
    /// `f(0) = 0`, `f ~ [(m-1)/(2m(m+1))]^(1/(m-1)) xi^(2/(m-1))`.
    VanishingAtOrigin,
    /// Fold-Hopf point; hyperbola (hyp) for `sigma = 0` only.
    FoldHopf,
    /// `f(0) = a > 0` with arbitrary slope.
    Q1Regular,
    /// Vanishing with `f' = +infinity`.
    Q2Vertical,
    /// Vanishing with `f' = -infinity`.
    Q3Vertical,
    /// Nothing enters.
    NoEntry,
    /// `f(0) = 0`, `f ~ K xi^(1/m)`.
    Q5Power,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub label: PointLabel,
    pub location: PointLocation,
    /// For points at infinity, eigenvalues of the chart system with the time
    /// orientation matching the original flow.
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: Vec<[f64; 3]>,
    pub kind: StabilityKind,
    pub expansion: LocalBehavior,
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// The nine critical points with closed-form eigen-data.
pub fn critical_points(params: &Params) -> Vec<CriticalPoint> {
    let (m, sigma) = (params.m(), params.sigma());
    let h0 = params.h0();
    let om = (m - 1.0).sqrt();
    let q5n = (1.0 + m * m).sqrt();
    let e3 = [
        -(m - 1.0) / (2.0 * (sigma + 3.0)),
        -1.0,
        0.5 * (sigma * (m - 1.0) + 4.0 * m) * h0,
    ];
    vec![
        CriticalPoint {
            label: PointLabel::P0,
            location: PointLocation::Finite(PhaseState::new(0.0, h0, 0.0)),
            eigenvalues: vec![
                re(0.5 * (m - 1.0) * h0),
                re(-(m + 1.0) * h0),
                re((m - 1.0) * h0),
            ],
            eigenvectors: vec![],
            kind: StabilityKind::Saddle2u1s,
            expansion: LocalBehavior::InterfaceOutgoing,
        },
        CriticalPoint {
            label: PointLabel::P1,
            location: PointLocation::Finite(PhaseState::new(0.0, -h0, 0.0)),
            eigenvalues: vec![
                re(-0.5 * (m - 1.0) * h0),
                re((m + 1.0) * h0),
                re(-(m - 1.0) * h0),
            ],
            eigenvectors: vec![],
            kind: StabilityKind::Saddle1u2s,
            expansion: LocalBehavior::InterfaceIncoming,
        },
        CriticalPoint {
            label: PointLabel::P2,
            location: PointLocation::Finite(PhaseState::new(0.5 * (m - 1.0) * h0, h0, 0.0)),
            eigenvalues: vec![
                re(-0.5 * (m - 1.0) * h0),
                re(-(m + 1.0) * h0),
                re(0.5 * (m - 1.0) * (sigma + 2.0) * h0),
            ],
            eigenvectors: vec![e3],
            kind: StabilityKind::Saddle1u2s,
            expansion: LocalBehavior::VanishingAtOrigin,
        },
        CriticalPoint {
            label: PointLabel::P3,
            location: PointLocation::Finite(PhaseState::new(0.0, 0.0, 1.0)),
            eigenvalues: vec![re(0.0), Complex64::new(0.0, om), Complex64::new(0.0, -om)],
            eigenvectors: vec![],
            kind: StabilityKind::Nonhyperbolic,
            expansion: LocalBehavior::FoldHopf,
        },
        CriticalPoint {
            label: PointLabel::Q1,
            location: PointLocation::AtInfinity([1.0, 0.0, 0.0, 0.0]),
            eigenvalues: vec![re(1.0), re(sigma + 1.0), re(1.0)],
            eigenvectors: vec![],
            kind: StabilityKind::UnstableNode,
            expansion: LocalBehavior::Q1Regular,
        },
        CriticalPoint {
            label: PointLabel::Q2,
            location: PointLocation::AtInfinity([0.0, 1.0, 0.0, 0.0]),
            eigenvalues: vec![re(m), re(0.5 * (3.0 * m - 1.0)), re(0.5 * (m + 1.0))],
            eigenvectors: vec![],
            kind: StabilityKind::UnstableNode,
            expansion: LocalBehavior::Q2Vertical,
        },
        CriticalPoint {
            label: PointLabel::Q3,
            location: PointLocation::AtInfinity([0.0, -1.0, 0.0, 0.0]),
            eigenvalues: vec![re(-m), re(-0.5 * (3.0 * m - 1.0)), re(-0.5 * (m + 1.0))],
            eigenvectors: vec![],
            kind: StabilityKind::StableNode,
            expansion: LocalBehavior::Q3Vertical,
        },
        CriticalPoint {
            label: PointLabel::Q4,
            location: PointLocation::AtInfinity([0.0, 0.0, 1.0, 0.0]),
            eigenvalues: vec![],
            eigenvectors: vec![],
            kind: StabilityKind::Nonhyperbolic,
            expansion: LocalBehavior::NoEntry,
        },
        CriticalPoint {
            label: PointLabel::Q5,
            location: PointLocation::AtInfinity([m / q5n, 1.0 / q5n, 0.0, 0.0]),
            eigenvalues: vec![
                re(-1.0),
                re((2.0 * m * (sigma + 1.0) + m - 1.0) / (2.0 * m)),
                re((m + 1.0) / (2.0 * m)),
            ],
            eigenvectors: vec![],
            kind: StabilityKind::Saddle2u1s,
            expansion: LocalBehavior::Q5Power,
        },
    ]
}

pub fn critical_point(params: &Params, label: PointLabel) -> CriticalPoint {
    critical_points(params)
        .into_iter()
        .find(|p| p.label == label)
        .expect("catalog holds every label")
}

/// Eigenvalues of the analytic Jacobian, computed numerically.
pub fn numeric_eigenvalues(params: &Params, s: &PhaseState) -> Vec<Complex64> {
    jacobian_main(params, s)
        .complex_eigenvalues()
        .iter()
        .copied()
        .collect()
}

/// `Y^2 - 2/(m+1) + Z/m`: negative strictly inside the cylinder.
pub fn cylinder_value(params: &Params, s: &PhaseState) -> f64 {
    let m = params.m();
    s.y * s.y - 2.0 / (m + 1.0) + s.z / m
}

/// Normal flow across the cylinder at a point on it, `sigma X Z / m`,
/// cross-checked against the unsimplified expression.
pub fn cylinder_flux(params: &Params, s: &PhaseState) -> Result<f64> {
    let (m, sigma) = (params.m(), params.sigma());
    let c = cylinder_value(params, s);
    if c.abs() >= 1e-10 {
        return Err(Error::Domain(format!("point is off the cylinder by {c}")));
    }
    let simplified = sigma * s.x * s.z / m;
    // Substitute Z from the cylinder equation into the unsimplified form.
    let (x, y) = (s.x, s.y);
    let z = 2.0 * m / (m + 1.0) - m * y * y;
    let full =
        -(m + 1.0) * y.powi(3) + 2.0 * y - 2.0 * y * z + (m - 1.0) / m * y * z + sigma / m * x * z;
    let simplified_on = sigma * x * z / m;
    let scale = 1.0 + y.abs().powi(3) + y.abs() * (1.0 + z.abs()) + (sigma * x * z).abs();
    if (full - simplified_on).abs() > 1e-12 * scale {
        return Err(Error::Consistency(format!(
            "cylinder flux forms disagree: {full} vs {simplified_on}"
        )));
    }
    Ok(simplified)
}

/// `grad(c) . F` for `c = cylinder_value`, evaluated from the field itself
/// at any point.
pub fn cylinder_normal_flow(params: &Params, s: &PhaseState) -> f64 {
    let d = vf_main(params, s);
    2.0 * s.y * d.y + d.z / params.m()
}

/// Coefficients of the Poincare normal form at `P3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalFormCoeffs {
    pub g200: f64,
    pub g011: f64,
    pub g111: f64,
    pub g300: f64,
    pub h110: f64,
    pub h210: Complex64,
    pub h021: Complex64,
}

/// Taylor coefficients of the nonlinear parts after the change of variables
/// `v = (m-1)Y + sigma X`, `u = sqrt(m-1)(Z-1)`, `z = X`, `w = v + iu`.
/// `g` belongs to the `z` equation, `h` to the `w` equation; indices are the
/// powers of `(z, w, conj(w))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaylorCoeffs {
    pub g200: Complex64,
    pub g110: Complex64,
    pub g101: Complex64,
    pub g020: Complex64,
    pub g002: Complex64,
    pub g011: Complex64,
    pub h200: Complex64,
    pub h110: Complex64,
    pub h101: Complex64,
    pub h020: Complex64,
    pub h002: Complex64,
    pub h011: Complex64,
    /// Cubic terms; all vanish for a quadratic field.
    pub g300: Complex64,
    pub g111: Complex64,
}

/// Closed-form Taylor coefficients.
pub fn taylor_coeffs_closed(params: &Params) -> TaylorCoeffs {
    let (m, sigma) = (params.m(), params.sigma());
    let r = (m + 1.0) / (4.0 * (m - 1.0));
    TaylorCoeffs {
        g200: re(-(sigma + 2.0)),
        g110: re(0.25),
        g101: re(0.25),
        g020: re(0.0),
        g002: re(0.0),
        g011: re(0.0),
        h200: re(-2.0 * sigma * (m * sigma + m - 1.0) / (m - 1.0)),
        h110: re((3.0 * m + 1.0) * sigma / (4.0 * (m - 1.0))),
        h101: re((3.0 * m + 1.0) * sigma / (4.0 * (m - 1.0))),
        h020: re(0.5 - r),
        h002: re(-(0.5 + r)),
        h011: re(-r),
        g300: re(0.0),
        g111: re(0.0),
    }
}

/// Taylor coefficients read off the vector field itself: the field is
/// evaluated in `(z, w)` coordinates and split into monomials by a discrete
/// Fourier transform in the angle of `w`, which is exact for polynomials of
/// degree below the number of angles.
pub fn taylor_coeffs_from_field(params: &Params) -> TaylorCoeffs {
    let (m, sigma) = (params.m(), params.sigma());
    let om = (m - 1.0).sqrt();
    // Field in (z, w) coordinates: returns (z', w') minus linear parts.
    let field = |z: f64, w: Complex64| -> (Complex64, Complex64) {
        let (v, u) = (w.re, w.im);
        let x = z;
        let y = (v - sigma * x) / (m - 1.0);
        let zz = 1.0 + u / om;
        let d = vf_main(params, &PhaseState::new(x, y, zz));
        let vdot = (m - 1.0) * d.y + sigma * d.x;
        let udot = om * d.z;
        let zdot = d.x;
        let wdot = Complex64::new(vdot, udot) - Complex64::new(0.0, om) * w;
        (re(zdot), wdot)
    };
    const N: usize = 8;
    // Fourier mode k of F(theta) on the circle |w| = rho.
    let mode = |z: f64, rho: f64, k: i32, pick_w: bool| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..N {
            let th = 2.0 * std::f64::consts::PI * j as f64 / N as f64;
            let w = Complex64::from_polar(rho, th);
            let (gz, hw) = field(z, w);
            let val = if pick_w { hw } else { gz };
            acc += val * Complex64::from_polar(1.0, -(k as f64) * th);
        }
        acc / N as f64
    };
    let (g_z2, h_z2) = {
        let (a, b) = field(1.0, Complex64::new(0.0, 0.0));
        (a, b)
    };
    // Pure w terms at z = 0, rho = 1: w^2 -> mode 2, conj(w)^2 -> mode -2,
    // |w|^2 -> mode 0.
    let h020 = 2.0 * mode(0.0, 1.0, 2, true);
    let h002 = 2.0 * mode(0.0, 1.0, -2, true);
    let h011 = mode(0.0, 1.0, 0, true);
    let g020 = 2.0 * mode(0.0, 1.0, 2, false);
    let g002 = 2.0 * mode(0.0, 1.0, -2, false);
    let g011 = mode(0.0, 1.0, 0, false);
    // Mixed z w terms: mode +-1 at z = 1 (pure-w terms carry modes 0, +-2).
    let h110 = mode(1.0, 1.0, 1, true);
    let h101 = mode(1.0, 1.0, -1, true);
    let g110 = mode(1.0, 1.0, 1, false);
    let g101 = mode(1.0, 1.0, -1, false);
    // Cubic z^3 and z|w|^2 terms: compare z = 2 against the quadratic model.
    let (g_z2_at2, _) = field(2.0, Complex64::new(0.0, 0.0));
    let g300 = 6.0 * (g_z2_at2 - 4.0 * g_z2) / 8.0;
    let g111 = mode(2.0, 1.0, 0, false)
        - mode(1.0, 1.0, 0, false)
        - (mode(1.0, 1.0, 0, false) - g011 - g_z2)
        - g_z2 * 3.0;
    TaylorCoeffs {
        g200: 2.0 * g_z2,
        g110,
        g101,
        g020,
        g002,
        g011,
        h200: 2.0 * h_z2,
        h110,
        h101,
        h020,
        h002,
        h011,
        g300,
        g111,
    }
}

/// Normal-form coefficients from Taylor coefficients through the generic
/// fold-Hopf reduction formulas, with `omega = sqrt(m-1)`.
pub fn normal_form_from_taylor(t: &TaylorCoeffs, omega: f64) -> NormalFormCoeffs {
    let i_over = Complex64::new(0.0, 1.0 / (2.0 * omega));
    let h210 =
        i_over * (t.h200 * (t.h020 - 2.0 * t.g110) - t.h101.norm_sqr() - t.h011 * t.h200.conj());
    let h021 = i_over
        * (t.h011 * t.h020
            - 0.5 * t.g020 * t.h101
            - 2.0 * t.h011.norm_sqr()
            - t.h002.norm_sqr() / 3.0);
    let g300 = t.g300 - 6.0 / omega * (t.g110 * t.h200).im;
    let g111 = t.g111 - 1.0 / omega * (2.0 * (t.g110 * t.h011).im + (t.g020 * t.h101.conj()).im);
    NormalFormCoeffs {
        g200: t.g200.re,
        g011: t.g011.re,
        g111: g111.re,
        g300: g300.re,
        h110: t.h110.re,
        h210,
        h021,
    }
}

/// Closed-form normal form at `P3`, verified against the generic formulas.
pub fn normal_form_p3(params: &Params) -> Result<NormalFormCoeffs> {
    params.require_positive_sigma()?;
    let (m, sigma) = (params.m(), params.sigma());
    let om = (m - 1.0).sqrt();
    let i_over = Complex64::new(0.0, 1.0 / (2.0 * om));
    let closed = NormalFormCoeffs {
        g200: -(sigma + 2.0),
        g011: 0.0,
        g111: 0.0,
        g300: 0.0,
        h110: (3.0 * m + 1.0) * sigma / (4.0 * (m - 1.0)),
        h210: -i_over * ((3.0 * m + 1.0).powi(2) * sigma * sigma / (16.0 * (m - 1.0).powi(2))),
        h021: i_over
            * (-(m + 1.0).powi(2) / (12.0 * (m - 1.0).powi(2))
                - 5.0 * (m + 1.0) / (24.0 * (m - 1.0))
                - 1.0 / 12.0),
    };
    let generic = normal_form_from_taylor(&taylor_coeffs_closed(params), om);
    let diff = normal_form_distance(&closed, &generic);
    if diff > 1e-12 * (1.0 + normal_form_size(&closed)) {
        return Err(Error::Consistency(format!(
            "normal form closed forms differ from generic formulas by {diff}"
        )));
    }
    Ok(closed)
}

pub fn normal_form_distance(a: &NormalFormCoeffs, b: &NormalFormCoeffs) -> f64 {
    [
        (a.g200 - b.g200).abs(),
        (a.g011 - b.g011).abs(),
        (a.g111 - b.g111).abs(),
        (a.g300 - b.g300).abs(),
        (a.h110 - b.h110).abs(),
        (a.h210 - b.h210).norm(),
        (a.h021 - b.h021).norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn normal_form_size(a: &NormalFormCoeffs) -> f64 {
    [a.g200.abs(), a.h110.abs(), a.h210.norm(), a.h021.norm()]
        .into_iter()
        .fold(0.0, f64::max)
}

/// Integrator settings for phase-space orbits.
pub fn phase_integrator() -> IntegratorConfig {
    IntegratorConfig {
        rel_tol: 1e-11,
        abs_tol: 1e-13,
        initial_step_cap: 1e-2,
        max_steps: 2_000_000,
        ..IntegratorConfig::default()
    }
}

/// Bound on `|X| + |Y|` beyond which an orbit is taken to have left for a
/// point at infinity.
pub const ESCAPE_BOUND: f64 = 1e3;

/// Result of following an orbit past `P3`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpiralDiagnostic {
    /// `|Z - 1|` at successive crossings of the half-plane `{Y = 0, Z > 1}`.
    pub radii: Vec<f64>,
    /// Parameter values of the crossings.
    pub etas: Vec<f64>,
    /// State where the orbit crossed the escape bound, if it did.
    pub exit: Option<PhaseState>,
}

impl SpiralDiagnostic {
    /// Length of the longest strictly increasing run starting at the first
    /// return.
    pub fn increasing_run(&self) -> usize {
        if self.radii.is_empty() {
            return 0;
        }
        let mut n = 1;
        for w in self.radii.windows(2) {
            if w[1] > w[0] {
                n += 1;
            } else {
                break;
            }
        }
        n
    }
}

/// Follows the orbit through `start` and records section returns around
/// `P3` until `turns` returns, escape, or `eta_max`.
pub fn p3_spiral_diagnostic(
    params: &Params,
    start: PhaseState,
    turns: usize,
    eta_max: f64,
) -> Result<SpiralDiagnostic> {
    if turns < 2 {
        return Err(Error::Domain("need at least two turns".into()));
    }
    let p = *params;
    let events = [
        Event::new(
            EventKind::Custom,
            Direction::Any,
            false,
            |_, s: &[f64; 3]| s[1],
        ),
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
    let sol = integrate::integrate(
        |_, s| vf_main(&p, &PhaseState::from_array(*s)).to_array(),
        start.to_array(),
        (0.0, eta_max),
        &events,
        &phase_integrator(),
        Recording {
            max_spacing: None,
            endpoint_only: true,
        },
    )?;
    let mut radii = Vec::new();
    let mut etas = Vec::new();
    for r in sol
        .events
        .iter()
        .filter(|r| r.index == 0 && r.state[2] > 1.0)
    {
        if radii.len() == turns {
            break;
        }
        radii.push((r.state[2] - 1.0).abs());
        etas.push(r.location);
    }
    let exit = sol
        .terminal_event()
        .filter(|r| r.index == 1)
        .map(|r| PhaseState::from_array(r.state));
    Ok(SpiralDiagnostic { radii, etas, exit })
}

/// First integral of the flow inside the invariant plane `X = 0`:
/// `Z^((m+1)/(m-1)) [Y^2 + ((m+1)Z - 2m)/(m(m+1))]`.
pub fn plane_invariant(params: &Params, s: &PhaseState) -> f64 {
    let m = params.m();
    s.z.powf((m + 1.0) / (m - 1.0)) * (s.y * s.y + ((m + 1.0) * s.z - 2.0 * m) / (m * (m + 1.0)))
}
