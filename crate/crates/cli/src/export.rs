//! Text formats. Floats are written with 17 significant digits so that the
//! same run always produces the same bytes.

use std::io::{Read, Write};

use blowup_core::scaling::SamarskiiScaling;
use blowup_core::{Params, Profile, ProfileState};

use crate::args::Scaling;
use crate::CliError;

pub const SCHEMA: &str = "v1";

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Linear map from native variables to the output coordinates.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Coords {
    pub scaling: &'static str,
    pub lambda: f64,
    pub mu: f64,
    pub m: f64,
}

impl Coords {
    pub fn new(params: &Params, scaling: Scaling) -> Self {
        match scaling {
            Scaling::Native => Self {
                scaling: "native",
                lambda: 1.0,
                mu: 1.0,
                m: params.m(),
            },
            Scaling::Samarskii => {
                let s = SamarskiiScaling::new(params);
                Self {
                    scaling: "samarskii",
                    lambda: s.lambda,
                    mu: s.mu,
                    m: params.m(),
                }
            }
        }
    }

    pub fn xi_out(&self, xi: f64) -> f64 {
        self.lambda * xi
    }

    pub fn xi_in(&self, s: f64) -> f64 {
        s / self.lambda
    }

    pub fn f_out(&self, f: f64) -> f64 {
        self.mu * f
    }

    pub fn f_in(&self, f: f64) -> f64 {
        f / self.mu
    }

    pub fn slope_out(&self, fp: f64) -> f64 {
        self.mu / self.lambda * fp
    }

    pub fn slope_in(&self, fp: f64) -> f64 {
        fp * self.lambda / self.mu
    }

    fn g_scale(&self) -> f64 {
        self.mu.powf(self.m)
    }

    /// `(s, F, F', F^m, (F^m)')` for a native sample.
    pub fn row(&self, p: &ProfileState) -> [f64; 5] {
        [
            self.xi_out(p.xi),
            self.f_out(p.f(self.m)),
            self.slope_out(p.fprime(self.m)),
            self.g_scale() * p.g,
            self.g_scale() / self.lambda * p.dg,
        ]
    }

    /// Inverse of [`Coords::row`] on the columns that carry the state.
    pub fn state(&self, xi: f64, g: f64, dg: f64) -> ProfileState {
        ProfileState {
            xi: self.xi_in(xi),
            g: g / self.g_scale(),
            dg: dg * self.lambda / self.g_scale(),
        }
    }
}

pub const PROFILE_HEADER: [&str; 5] = ["xi", "f", "fprime", "g", "dg"];

pub fn write_profile_csv<W: Write>(
    w: W,
    profile: &Profile,
    coords: &Coords,
) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(PROFILE_HEADER)?;
    for p in &profile.samples {
        out.write_record(coords.row(p).map(num))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads samples written by [`write_profile_csv`] back into native variables.
pub fn read_profile_csv<R: Read>(
    r: R,
    params: Params,
    coords: &Coords,
) -> Result<Profile, CliError> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers()?.clone();
    if header.iter().ne(PROFILE_HEADER) {
        return Err(CliError::Usage(format!("unexpected header {header:?}")));
    }
    let mut samples = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64, CliError> {
            rec[i]
                .parse()
                .map_err(|e| CliError::Usage(format!("bad number {:?}: {e}", &rec[i])))
        };
        samples.push(coords.state(field(0)?, field(3)?, field(4)?));
    }
    Ok(Profile::from_samples(params, samples)?)
}

pub fn table<W: Write>(w: W, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for r in rows {
        out.write_record(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn json_bytes(v: &serde_json::Value) -> Result<Vec<u8>, CliError> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(num(f64::INFINITY).parse::<f64>().unwrap(), f64::INFINITY);
    }

    #[test]
    fn coordinates_invert() {
        let q = Params::new(3.0, 1.5).unwrap();
        let c = Coords::new(&q, Scaling::Samarskii);
        let p = ProfileState {
            xi: 1.25,
            g: 0.7,
            dg: -0.3,
        };
        let r = c.row(&p);
        let back = c.state(r[0], r[3], r[4]);
        assert!((back.xi - p.xi).abs() < 1e-15);
        assert!((back.g - p.g).abs() < 1e-15);
        assert!((back.dg - p.dg).abs() < 1e-15);
        assert!((c.slope_in(c.slope_out(0.4)) - 0.4).abs() < 1e-15);
        assert!((r[1] - c.f_out(p.f(3.0))).abs() < 1e-15);
        let n = Coords::new(&q, Scaling::Native);
        assert_eq!(n.row(&p)[0], 1.25);
    }

    #[test]
    fn reader_rejects_bad_input() {
        let q = Params::new(2.0, 0.0).unwrap();
        let c = Coords::new(&q, Scaling::Native);
        assert!(read_profile_csv("a,b\n1,2\n".as_bytes(), q, &c).is_err());
        let bad = "xi,f,fprime,g,dg\n0,1,0,1,0\n0,1,0,1,0\n";
        assert!(read_profile_csv(bad.as_bytes(), q, &c).is_err());
        let good = "xi,f,fprime,g,dg\n0,1,0,1,0\n0.5,1,0,0.9,-0.1\n";
        assert_eq!(
            read_profile_csv(good.as_bytes(), q, &c)
                .unwrap()
                .samples
                .len(),
            2
        );
    }
}
