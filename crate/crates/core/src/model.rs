//! Parameters, the profile equation in the regularized variable `g = f^m`,
//! reference solutions and the two hyperbolas used by the shooting bounds.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Negative `g` values smaller than this in magnitude are roundoff.
pub const G_CLAMP_TOL: f64 = 1e-14;

/// The exponent pair `(m, sigma)` of `u_t = (u^m)_xx + |x|^sigma u^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    m: f64,
    sigma: f64,
}

impl Params {
    pub fn new(m: f64, sigma: f64) -> Result<Self> {
        if !(m.is_finite() && m > 1.0) {
            return Err(Error::InvalidParams(format!("m must be > 1, got {m}")));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "sigma must be >= 0, got {sigma}"
            )));
        }
        Ok(Self { m, sigma })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `sqrt(2/(m+1))`
    pub fn h0(&self) -> f64 {
        (2.0 / (self.m + 1.0)).sqrt()
    }

    /// Blow-up rate exponent `1/(m-1)`.
    pub fn alpha(&self) -> f64 {
        1.0 / (self.m - 1.0)
    }

    pub fn require_positive_sigma(&self) -> Result<()> {
        if self.sigma > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParams("operation requires sigma > 0".into()))
        }
    }
}

/// One point of a profile in regularized variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileState {
    pub xi: f64,
    /// `f^m`
    pub g: f64,
    /// `(f^m)'`
    pub dg: f64,
}

impl ProfileState {
    pub fn f(&self, m: f64) -> f64 {
        self.g.max(0.0).powf(1.0 / m)
    }

    /// `f' = g' / (m g^((m-1)/m))`; infinite where `g = 0` and `g' != 0`.
    pub fn fprime(&self, m: f64) -> f64 {
        let g = self.g.max(0.0);
        if g == 0.0 {
            if self.dg == 0.0 {
                0.0
            } else {
                self.dg.signum() * f64::INFINITY
            }
        } else {
            self.dg / (m * g.powf((m - 1.0) / m))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Provenance {
    ForwardShot {
        a: f64,
    },
    BackwardShot {
        xi0: f64,
        epsilon: f64,
    },
    /// Sampled from the closed-form solution at `sigma = 0`.
    Explicit,
    /// Built from externally supplied samples.
    Imported,
}

/// A sampled profile, ordered by increasing `xi`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profile {
    pub params: Params,
    pub samples: Vec<ProfileState>,
    pub provenance: Provenance,
    pub maxima: Vec<f64>,
    pub minima: Vec<f64>,
    pub interface: Option<f64>,
    pub slope_at_origin: Option<f64>,
}

impl Profile {
    /// Samples of the explicit homogeneous profile on `[0, interface]`.
    pub fn explicit_f0(m: f64, n: usize) -> Result<Self> {
        let params = Params::new(m, 0.0)?;
        let xi_end = homogeneous_interface(m);
        let n = n.max(2);
        let k = (m - 1.0) / (2.0 * m);
        let p = 2.0 * m / (m - 1.0);
        let amp = (2.0 * m / ((m + 1.0) * (m - 1.0))).powf(m / (m - 1.0));
        let samples = (0..n)
            .map(|i| {
                let xi = xi_end * i as f64 / (n - 1) as f64;
                let c = (k * xi).cos().max(0.0);
                let s = (k * xi).sin();
                ProfileState {
                    xi,
                    g: amp * c.powf(p),
                    dg: -amp * p * k * c.powf(p - 1.0) * s,
                }
            })
            .collect();
        Ok(Self {
            params,
            samples,
            provenance: Provenance::Explicit,
            maxima: vec![0.0],
            minima: Vec::new(),
            interface: Some(xi_end),
            slope_at_origin: Some(0.0),
        })
    }

    /// Wraps samples read from elsewhere. They must be non-empty, finite and
    /// strictly increasing in `xi`.
    pub fn from_samples(params: Params, samples: Vec<ProfileState>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("no samples".into()));
        }
        if samples
            .iter()
            .any(|s| !(s.xi.is_finite() && s.g.is_finite() && s.dg.is_finite()))
        {
            return Err(Error::Domain("non-finite sample".into()));
        }
        if samples.windows(2).any(|w| w[1].xi <= w[0].xi) {
            return Err(Error::Domain("samples not increasing in xi".into()));
        }
        Ok(Self {
            params,
            samples,
            provenance: Provenance::Imported,
            maxima: Vec::new(),
            minima: Vec::new(),
            interface: None,
            slope_at_origin: None,
        })
    }

    pub fn first(&self) -> &ProfileState {
        &self.samples[0]
    }

    pub fn last(&self) -> &ProfileState {
        self.samples.last().expect("profile has samples")
    }

    /// State at `xi` by cubic Hermite interpolation between samples.
    pub fn state_at(&self, xi: f64) -> Result<ProfileState> {
        let s = &self.samples;
        let (lo, hi) = (s[0].xi, self.last().xi);
        if !(xi >= lo && xi <= hi) {
            return Err(Error::Domain(format!(
                "xi = {xi} outside sampled range [{lo}, {hi}]"
            )));
        }
        let j = s.partition_point(|p| p.xi <= xi);
        if j == 0 {
            return Ok(s[0]);
        }
        let a = s[j - 1];
        if a.xi == xi || j == s.len() {
            return Ok(a);
        }
        let b = s[j];
        Ok(hermite(&self.params, &a, &b, xi))
    }
}

fn hermite(params: &Params, a: &ProfileState, b: &ProfileState, xi: f64) -> ProfileState {
    let h = b.xi - a.xi;
    let t = (xi - a.xi) / h;
    let h00 = (1.0 + 2.0 * t) * (1.0 - t).powi(2);
    let h10 = t * (1.0 - t).powi(2);
    let h01 = t * t * (3.0 - 2.0 * t);
    let h11 = t * t * (t - 1.0);
    let dda = rhs_g_clamped(params, a.xi, a.g);
    let ddb = rhs_g_clamped(params, b.xi, b.g);
    ProfileState {
        xi,
        g: h00 * a.g + h10 * h * a.dg + h01 * b.g + h11 * h * b.dg,
        dg: h00 * a.dg + h10 * h * dda + h01 * b.dg + h11 * h * ddb,
    }
}

/// `g'' = g^(1/m)/(m-1) - xi^sigma g`.
pub fn rhs_g(params: &Params, xi: f64, g: f64) -> Result<f64> {
    if xi < 0.0 {
        return Err(Error::Domain(format!("xi must be >= 0, got {xi}")));
    }
    if g < -G_CLAMP_TOL {
        return Err(Error::Domain(format!("negative g = {g}")));
    }
    Ok(rhs_g_clamped(params, xi, g))
}

/// Same as [`rhs_g`] with `g` and `xi` clamped at zero; used inside the
/// integrator, where trial stages may step slightly past the interface.
pub(crate) fn rhs_g_clamped(params: &Params, xi: f64, g: f64) -> f64 {
    let g = g.max(0.0);
    let xi = xi.max(0.0);
    g.powf(1.0 / params.m) / (params.m - 1.0) - xi.powf(params.sigma) * g
}

/// Interface of the explicit homogeneous profile, `pi m/(m-1)`.
pub fn homogeneous_interface(m: f64) -> f64 {
    PI * m / (m - 1.0)
}

/// Explicit compactly supported profile at `sigma = 0`:
/// `[2m/((m+1)(m-1))]^(1/(m-1)) cos^(2/(m-1))((m-1) xi/(2m))` on its support.
pub fn explicit_profile_f0(m: f64, xi: f64) -> f64 {
    if xi.abs() >= homogeneous_interface(m) {
        return 0.0;
    }
    let amp = (2.0 * m / ((m + 1.0) * (m - 1.0))).powf(1.0 / (m - 1.0));
    let c = ((m - 1.0) * xi / (2.0 * m)).cos();
    amp * (c * c).max(0.0).powf(1.0 / (m - 1.0))
}

fn hyperbola(params: &Params, xi: f64, coef: f64) -> Result<f64> {
    let (m, sigma) = (params.m, params.sigma);
    if xi < 0.0 || (xi == 0.0 && sigma > 0.0) {
        return Err(Error::Domain(format!(
            "hyperbola undefined at xi = {xi} for sigma = {sigma}"
        )));
    }
    Ok(coef.powf(1.0 / (m - 1.0)) * xi.powf(-sigma / (m - 1.0)))
}

/// `(1/(m-1))^(1/(m-1)) xi^(-sigma/(m-1))`, where `(m-1) xi^sigma f^(m-1) = 1`.
pub fn hyperbola_equilibrium(params: &Params, xi: f64) -> Result<f64> {
    hyperbola(params, xi, 1.0 / (params.m - 1.0))
}

/// `(1/(m(m-1)))^(1/(m-1)) xi^(-sigma/(m-1))`: the f-value at which
/// `x^(1/m)/(m-1) - xi^sigma x` peaks.
pub fn hyperbola_phi_max(params: &Params, xi: f64) -> Result<f64> {
    hyperbola(params, xi, 1.0 / (params.m * (params.m - 1.0)))
}

/// `(m-1) xi^sigma f^(m-1)` expressed through `g`.
pub fn weighted_level(params: &Params, xi: f64, g: f64) -> f64 {
    let m = params.m;
    (m - 1.0) * xi.max(0.0).powf(params.sigma) * g.max(0.0).powf((m - 1.0) / m)
}

/// Absolute residual of the energy identity obtained by multiplying the
/// g-equation by `g'` and integrating over `(0, xi0)`:
///
/// `g'(xi0)^2 = g'(0)^2 + 2m/((m+1)(m-1)) [g(xi0)^((m+1)/m) - g(0)^((m+1)/m)]
///              - xi0^sigma g(xi0)^2 + 0^sigma g(0)^2 + sigma int xi^(sigma-1) g^2`.
///
/// The `0^sigma` boundary term vanishes for `sigma > 0` and is `g(0)^2` at
/// `sigma = 0`. The weighted integral uses the trapezoid rule in `g^2` with
/// the weight `xi^(sigma-1)` integrated exactly on every subinterval, so the
/// endpoint singularity for `sigma < 1` costs no accuracy.
pub fn integral_identity_residual(profile: &Profile, xi0: f64) -> Result<f64> {
    let params = &profile.params;
    let (m, sigma) = (params.m, params.sigma);
    let s = &profile.samples;
    if s.is_empty() {
        return Err(Error::Domain("empty profile".into()));
    }
    if s[0].xi != 0.0 {
        return Err(Error::Domain("profile does not start at the axis".into()));
    }
    let end = profile.state_at(xi0)?;
    let start = s[0];

    let mut integral = 0.0;
    if sigma > 0.0 {
        for w in s.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.xi >= xi0 {
                break;
            }
            let b = if b.xi > xi0 { end } else { b };
            let (wa, wb) = weighted_trapezoid(a.xi, b.xi, sigma);
            integral += wa * a.g.max(0.0).powi(2) + wb * b.g.max(0.0).powi(2);
        }
    }

    let q = (m + 1.0) / m;
    let c = 2.0 * m / ((m + 1.0) * (m - 1.0));
    let lhs = end.dg * end.dg;
    let rhs = start.dg * start.dg + c * (end.g.max(0.0).powf(q) - start.g.max(0.0).powf(q))
        - xi0.powf(sigma) * end.g * end.g
        + 0f64.powf(sigma) * start.g * start.g
        + sigma * integral;
    Ok((lhs - rhs).abs())
}

/// Weights `(wa, wb)` with `int_a^b xi^(sigma-1) G dxi ~ wa G(a) + wb G(b)`
/// for `G` linear on `[a, b]`.
fn weighted_trapezoid(a: f64, b: f64, sigma: f64) -> (f64, f64) {
    let h = b - a;
    if h <= 0.0 {
        return (0.0, 0.0);
    }
    let (w0, w1) = if a == 0.0 {
        (b.powf(sigma) / sigma, b.powf(sigma + 1.0) / (sigma + 1.0))
    } else {
        let l = (h / a).ln_1p();
        (
            a.powf(sigma) * (sigma * l).exp_m1() / sigma,
            a.powf(sigma + 1.0) * ((sigma + 1.0) * l).exp_m1() / (sigma + 1.0),
        )
    };
    let wb = (w1 - a * w0) / h;
    (w0 - wb, wb)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(m: f64, s: f64) -> Params {
        Params::new(m, s).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(1.0, 1.0).is_err());
        assert!(Params::new(0.5, 1.0).is_err());
        assert!(Params::new(2.0, -0.1).is_err());
        assert!(Params::new(f64::NAN, 1.0).is_err());
        let q = p(3.0, 0.0);
        assert!((q.h0().powi(2) * 4.0 - 2.0).abs() < 1e-15);
        assert_eq!(q.alpha(), 0.5);
    }

    #[test]
    fn rhs_g_examples() {
        assert_eq!(rhs_g(&p(2.0, 1.0), 0.0, 1.0).unwrap(), 1.0);
        assert_eq!(rhs_g(&p(2.0, 1.0), 1.0, 1.0).unwrap(), 0.0);
        assert!(rhs_g(&p(2.0, 0.5), 4.0, 0.25).unwrap().abs() < 1e-15);
        assert_eq!(rhs_g(&p(2.0, 1.0), 3.0, 0.0).unwrap(), 0.0);
        assert_eq!(rhs_g(&p(2.0, 1.0), 3.0, -1e-15).unwrap(), 0.0);
        assert!(rhs_g(&p(2.0, 1.0), 3.0, -1e-6).is_err());
    }

    #[test]
    fn explicit_profile_values() {
        assert!((explicit_profile_f0(2.0, 0.0) - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(explicit_profile_f0(2.0, 2.0 * PI), 0.0);
        assert_eq!(explicit_profile_f0(2.0, 7.0), 0.0);
        assert!(explicit_profile_f0(2.0, 2.0 * PI - 1e-3) > 0.0);
        for m in [1.5, 2.0, 3.0, 5.0] {
            let h = 1e-5;
            let d = (explicit_profile_f0(m, h) - explicit_profile_f0(m, -h)) / (2.0 * h);
            assert!(d.abs() < 1e-9);
            assert!(explicit_profile_f0(m, 0.1) < explicit_profile_f0(m, 0.0));
        }
    }

    #[test]
    fn explicit_profile_solves_the_equation() {
        // g = A cos^p(k xi) has g'' = A p k^2 [(p-1) cos^(p-2) sin^2 - cos^p].
        for m in [1.25, 1.5, 2.0, 2.5, 3.0, 4.0] {
            let params = p(m, 0.0);
            let end = homogeneous_interface(m);
            let (k, pw) = ((m - 1.0) / (2.0 * m), 2.0 * m / (m - 1.0));
            let amp = explicit_profile_f0(m, 0.0).powf(m);
            let mut worst: f64 = 0.0;
            for i in 0..400 {
                let x = end * i as f64 / 400.0;
                let (sn, c) = (k * x).sin_cos();
                let exact =
                    amp * pw * k * k * ((pw - 1.0) * c.powf(pw - 2.0) * sn * sn - c.powf(pw));
                let g = explicit_profile_f0(m, x).powf(m);
                worst = worst.max((exact - rhs_g(&params, x, g).unwrap()).abs() / amp);
            }
            assert!(worst < 1e-12, "m = {m}: {worst}");

            // Finite differences on the inner half, where g is smooth enough.
            let g = |x: f64| explicit_profile_f0(m, x).powf(m);
            let h = 1e-2;
            for i in 1..50 {
                let x = 0.5 * end * i as f64 / 50.0;
                let fd1 = (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
                let h2 = h / 2.0;
                let fd2 = (g(x + h2) - 2.0 * g(x) + g(x - h2)) / (h2 * h2);
                let fd = (4.0 * fd2 - fd1) / 3.0;
                let r = (fd - rhs_g(&params, x, g(x)).unwrap()).abs() / amp;
                assert!(r < 1e-8, "m = {m}, xi = {x}: {r}");
            }
        }
    }

    #[test]
    fn hyperbola_values() {
        assert_eq!(hyperbola_equilibrium(&p(2.0, 0.0), 3.7).unwrap(), 1.0);
        assert_eq!(hyperbola_equilibrium(&p(2.0, 1.0), 1.0).unwrap(), 1.0);
        let v = hyperbola_equilibrium(&p(3.0, 2.0), 4.0).unwrap();
        assert!((v - 0.5f64.sqrt() / 4.0).abs() < 1e-15);
        assert!((hyperbola_phi_max(&p(2.0, 1.0), 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((hyperbola_phi_max(&p(2.0, 0.0), 9.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(hyperbola_equilibrium(&p(2.0, 1.0), 0.0).is_err());
        assert!(hyperbola_phi_max(&p(2.0, 1.0), 0.0).is_err());
        assert_eq!(hyperbola_equilibrium(&p(2.0, 0.0), 0.0).unwrap(), 1.0);
    }

    #[test]
    fn hyperbola_equilibrium_balances() {
        for &(m, s) in &[(2.0, 1.0), (3.0, 0.5), (1.5, 2.5)] {
            let q = p(m, s);
            for xi in [0.1, 1.0, 3.3, 10.0] {
                let f = hyperbola_equilibrium(&q, xi).unwrap();
                assert!(((m - 1.0) * xi.powf(s) * f.powf(m - 1.0) - 1.0).abs() < 1e-12);
                let r = hyperbola_phi_max(&q, xi).unwrap() / f;
                assert!((r - m.powf(-1.0 / (m - 1.0))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_on_explicit_profile() {
        for m in [1.5, 2.0, 3.0] {
            let prof = Profile::explicit_f0(m, 4001).unwrap();
            let end = homogeneous_interface(m);
            for frac in [0.1, 0.37, 0.5, 0.8, 1.0] {
                let r = integral_identity_residual(&prof, frac * end).unwrap();
                assert!(r < 1e-6, "m = {m}, frac = {frac}: {r}");
            }
        }
    }

    #[test]
    fn identity_on_zero_profile() {
        let prof = Profile {
            params: p(2.0, 0.7),
            samples: (0..10)
                .map(|i| ProfileState {
                    xi: i as f64,
                    g: 0.0,
                    dg: 0.0,
                })
                .collect(),
            provenance: Provenance::Explicit,
            maxima: vec![],
            minima: vec![],
            interface: None,
            slope_at_origin: None,
        };
        assert_eq!(integral_identity_residual(&prof, 9.0).unwrap(), 0.0);
        assert_eq!(integral_identity_residual(&prof, 4.5).unwrap(), 0.0);
        assert!(integral_identity_residual(&prof, 9.5).is_err());
    }

    #[test]
    fn weighted_trapezoid_is_exact_for_linear() {
        // int_0^2 xi^(s-1) (1 + xi) = 2^s/s + 2^(s+1)/(s+1)
        for s in [0.1, 0.5, 1.0, 2.5] {
            let n = 17;
            let mut acc = 0.0;
            for i in 0..n {
                let a = 2.0 * i as f64 / n as f64;
                let b = 2.0 * (i + 1) as f64 / n as f64;
                let (wa, wb) = weighted_trapezoid(a, b, s);
                acc += wa * (1.0 + a) + wb * (1.0 + b);
            }
            let exact = 2f64.powf(s) / s + 2f64.powf(s + 1.0) / (s + 1.0);
            assert!((acc - exact).abs() < 1e-12 * exact, "s = {s}");
        }
    }

    #[test]
    fn fprime_conversions() {
        let st = ProfileState {
            xi: 1.0,
            g: 4.0,
            dg: 2.0,
        };
        // m = 2: f = 2, f' = g'/(2 f) = 0.5
        assert!((st.f(2.0) - 2.0).abs() < 1e-15);
        assert!((st.fprime(2.0) - 0.5).abs() < 1e-15);
        let z = ProfileState {
            xi: 1.0,
            g: 0.0,
            dg: -1.0,
        };
        assert_eq!(z.fprime(2.0), f64::NEG_INFINITY);
    }
}
