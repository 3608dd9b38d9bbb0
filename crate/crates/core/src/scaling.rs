//! Exact change of variables between the profile equation used throughout
//! the crate,
//!
//! `(f^m)'' - f/(m-1) + xi^sigma f^m = 0`,
//!
//! and the normalization with diffusion `(u^(m-1) u_x)_x = (u^m)_xx / m`,
//! whose profiles solve
//!
//! `(1/m)(F^m)'' - F/(m-1) + s^sigma F^m = 0`.
//!
//! The second form is the classical one for which the homogeneous profile has
//! support half-width `pi sqrt(m)/(m-1)`. With `s = lambda xi` and
//! `F = mu f`, where `lambda = m^(-1/(sigma+2))` and
//! `mu = m^(sigma/((sigma+2)(m-1)))`, solutions map one-to-one. Slopes at the
//! origin keep their sign, so good profiles, interfaces and maxima counts
//! correspond exactly.

use serde::Serialize;

use crate::model::Params;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamarskiiScaling {
    /// `s = lambda xi`
    pub lambda: f64,
    /// `F = mu f`
    pub mu: f64,
}

impl SamarskiiScaling {
    pub fn new(params: &Params) -> Self {
        let (m, sigma) = (params.m(), params.sigma());
        Self {
            lambda: m.powf(-1.0 / (sigma + 2.0)),
            mu: m.powf(sigma / ((sigma + 2.0) * (m - 1.0))),
        }
    }

    pub fn xi_to_scaled(&self, xi: f64) -> f64 {
        self.lambda * xi
    }

    pub fn xi_from_scaled(&self, s: f64) -> f64 {
        s / self.lambda
    }

    pub fn f_to_scaled(&self, f: f64) -> f64 {
        self.mu * f
    }

    pub fn f_from_scaled(&self, f: f64) -> f64 {
        f / self.mu
    }

    pub fn slope_to_scaled(&self, fprime: f64) -> f64 {
        self.mu / self.lambda * fprime
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{explicit_profile_f0, homogeneous_interface};
    use std::f64::consts::PI;

    /// Closed form of the homogeneous profile in the scaled normalization.
    fn classical_f0(m: f64, s: f64) -> f64 {
        let c = ((m - 1.0) * s / (2.0 * m.sqrt())).cos();
        let amp = 2.0 * m / ((m + 1.0) * (m - 1.0));
        if s >= PI * m.sqrt() / (m - 1.0) {
            return 0.0;
        }
        (amp * c * c).powf(1.0 / (m - 1.0))
    }

    #[test]
    fn homogeneous_profile_maps_to_classical_form() {
        for m in [1.5, 2.0, 3.0] {
            let sc = SamarskiiScaling::new(&Params::new(m, 0.0).unwrap());
            assert_eq!(sc.mu, 1.0);
            for i in 0..50 {
                let xi = homogeneous_interface(m) * i as f64 / 50.0;
                let lhs = classical_f0(m, sc.xi_to_scaled(xi));
                assert!((lhs - sc.f_to_scaled(explicit_profile_f0(m, xi))).abs() < 1e-13);
            }
            assert!(
                (sc.xi_to_scaled(homogeneous_interface(m)) - PI * m.sqrt() / (m - 1.0)).abs()
                    < 1e-13
            );
        }
    }

    #[test]
    fn scaled_classical_profile_solves_scaled_equation() {
        let m: f64 = 2.0;
        let big_g = |s: f64| classical_f0(m, s).powf(m);
        let h = 1e-4;
        for i in 1..20 {
            let s = 4.0 * i as f64 / 20.0;
            let d2 = (big_g(s + h) - 2.0 * big_g(s) + big_g(s - h)) / (h * h);
            let res = d2 / m - classical_f0(m, s) / (m - 1.0) + big_g(s);
            assert!(res.abs() < 1e-6, "{res}");
        }
    }

    #[test]
    fn inverse_maps() {
        let sc = SamarskiiScaling::new(&Params::new(2.5, 0.3).unwrap());
        assert!((sc.xi_from_scaled(sc.xi_to_scaled(7.0)) - 7.0).abs() < 1e-14);
        assert!((sc.f_from_scaled(sc.f_to_scaled(0.4)) - 0.4).abs() < 1e-15);
        assert!(sc.slope_to_scaled(-1.0) < 0.0);
    }
}
