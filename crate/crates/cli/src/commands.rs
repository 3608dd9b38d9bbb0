use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use blowup_core::acceptance::{run_all, AcceptanceConfig};
use blowup_core::analysis::{follow_orbit, OrbitEnd};
use blowup_core::phase::{critical_points, cylinder_value, PhaseState, PointLocation};
use blowup_core::shooting::{
    count_maxima, find_good_profiles, nonexistence_gap, shoot_backward, shoot_forward_with_slope,
    ShootingConfig, ShotOutcome,
};
use blowup_core::Params;
use serde_json::{json, Value};

use crate::args::{
    Command, Format, Output, PhaseArgs, PointArgs, ProfileArgs, ScanArgs, Tolerances, VerifyArgs,
};
use crate::export::{self, num, Coords, SCHEMA};
use crate::CliError;

pub fn execute(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Profile(a) => profile(a),
        Command::Scan(a) => scan(a),
        Command::Phase(a) => phase(a),
        Command::Points(a) => points(a),
        Command::Bounds(a) => bounds(a),
        Command::Verify(a) => verify(a),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn params(m: f64, sigma: f64) -> Result<Params, CliError> {
    Params::new(m, sigma).map_err(|e| usage(e.to_string()))
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!(
            "--{name} must be positive and finite, got {v}"
        )))
    }
}

fn shooting_config(tol: &Tolerances, spacing: Option<f64>) -> Result<ShootingConfig, CliError> {
    let mut cfg = ShootingConfig::default();
    if let Some(r) = tol.rel_tol {
        cfg.integrator.rel_tol = positive("rel-tol", r)?;
    }
    if let Some(a) = tol.abs_tol {
        cfg.integrator.abs_tol = positive("abs-tol", a)?;
    }
    if let Some(s) = spacing {
        cfg.sample_spacing = positive("spacing", s)?;
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

/// Writes `bytes` to `path`, or to standard output.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            w.write_all(bytes)?;
            w.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn emit_json(out: &Output, v: &Value) -> Result<(), CliError> {
    emit(out.out.as_deref(), &export::json_bytes(v)?)
}

fn emit_table(out: &Output, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut buf = Vec::new();
    export::table(&mut buf, header, rows)?;
    emit(out.out.as_deref(), &buf)
}

fn sidecar_path(p: &Path) -> Result<PathBuf, CliError> {
    let s = p.with_extension("json");
    if s == p {
        return Err(usage(
            "with --format csv the profile file must not end in .json",
        ));
    }
    Ok(s)
}

fn outcome_json(o: &ShotOutcome, c: &Coords) -> Value {
    match o {
        ShotOutcome::Interface { xi0 } => json!({"kind": "interface", "xi0": c.xi_out(*xi0)}),
        ShotOutcome::VerticalSlope { xi0 } => {
            json!({"kind": "vertical_slope", "xi0": c.xi_out(*xi0)})
        }
        ShotOutcome::ReachedOrigin { f0, slope } => json!({
            "kind": "reached_origin",
            "f0": c.f_out(*f0),
            "slope": c.slope_out(*slope),
        }),
        ShotOutcome::Diverged { reason } => json!({"kind": "diverged", "reason": reason}),
        ShotOutcome::Exhausted => json!({"kind": "exhausted"}),
    }
}

fn profile(a: &ProfileArgs) -> Result<(), CliError> {
    let q = params(a.model.m, a.model.sigma)?;
    let mut cfg = shooting_config(&a.tol, a.spacing)?;
    if let Some(v) = a.vanish_tol {
        cfg.vanish_tol = positive("vanish-tol", v)?;
        cfg.validate().map_err(|e| usage(e.to_string()))?;
    }
    let c = Coords::new(&q, a.scaling);
    let (input, shot) = match (a.a, a.xi0) {
        (Some(h), None) => {
            let h = positive("a", h)?;
            let slope = a.slope.unwrap_or(0.0);
            if !slope.is_finite() {
                return Err(usage("--slope must be finite"));
            }
            let shot = shoot_forward_with_slope(&q, c.f_in(h), c.slope_in(slope), &cfg)?;
            (json!({"a": h, "slope": slope}), shot)
        }
        (None, Some(x)) => {
            let x = c.xi_in(positive("xi0", x)?);
            let shot = shoot_backward(&q, x, cfg.epsilon_rel * x, true, &cfg)?;
            (json!({"xi0": a.xi0}), shot)
        }
        _ => return Err(usage("give exactly one of --a and --xi0")),
    };
    let p = &shot.profile;
    let xs = |v: &[f64]| v.iter().map(|x| c.xi_out(*x)).collect::<Vec<_>>();
    let mut meta = json!({
        "schema": SCHEMA,
        "command": "profile",
        "m": q.m(),
        "sigma": q.sigma(),
        "coordinates": c,
        "input": input,
        "outcome": outcome_json(&shot.outcome, &c),
        "interface": p.interface.map(|x| c.xi_out(x)),
        "slope_at_origin": p.slope_at_origin.map(|s| c.slope_out(s)),
        "maxima": xs(&p.maxima),
        "minima": xs(&p.minima),
        "n_max": count_maxima(p),
        "phi_max_crossings": xs(&shot.phi_max_crossings),
        "samples": p.samples.len(),
    });
    match a.output.format {
        Format::Csv => {
            let mut buf = Vec::new();
            export::write_profile_csv(&mut buf, p, &c)?;
            emit(a.output.out.as_deref(), &buf)?;
            let side = export::json_bytes(&meta)?;
            match &a.output.out {
                Some(path) => emit(Some(&sidecar_path(path)?), &side)?,
                None => io::stderr().write_all(&side)?,
            }
        }
        Format::Json => {
            let rows: Vec<[f64; 5]> = p.samples.iter().map(|s| c.row(s)).collect();
            let col = |i: usize| rows.iter().map(|r| r[i]).collect::<Vec<_>>();
            meta["samples"] = json!({
                "xi": col(0), "f": col(1), "fprime": col(2), "g": col(3), "dg": col(4),
            });
            emit_json(&a.output, &meta)?;
        }
    }
    Ok(())
}

fn scan(a: &ScanArgs) -> Result<(), CliError> {
    let cfg = shooting_config(&a.tol, None)?;
    let hi = positive("xi0-max", a.xi0_max)?;
    if a.grid < 2 {
        return Err(usage("--grid must be at least 2"));
    }
    let lo = positive("xi0-min", a.xi0_min.unwrap_or(hi / a.grid as f64))?;
    if lo >= hi {
        return Err(usage("--xi0-min must lie below --xi0-max"));
    }
    let qs = a
        .sigma
        .iter()
        .map(|s| params(a.m, *s))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for q in &qs {
        let c = Coords::new(q, a.scaling);
        let r = find_good_profiles(q, c.xi_in(lo), c.xi_in(hi), a.grid, &cfg)?;
        let join = |v: Vec<String>| v.join(";");
        rows.push(vec![
            num(q.sigma()),
            r.profiles.len().to_string(),
            join(r.profiles.iter().map(|g| num(c.xi_out(g.xi0))).collect()),
            join(r.profiles.iter().map(|g| g.n_max.to_string()).collect()),
        ]);
        let profiles: Vec<Value> = r
            .profiles
            .iter()
            .map(|g| {
                json!({
                    "xi0": c.xi_out(g.xi0),
                    "a": c.f_out(g.a),
                    "n_max": g.n_max,
                    "slope_at_origin": g.profile.slope_at_origin.map(|s| c.slope_out(s)),
                    "maxima": g.profile.maxima.iter().map(|x| c.xi_out(*x)).collect::<Vec<_>>(),
                    "native": {"xi0": g.xi0, "a": g.a},
                })
            })
            .collect();
        json_rows.push(json!({
            "sigma": q.sigma(),
            "coordinates": c,
            "count": r.profiles.len(),
            "unreliable": r.unreliable,
            "unresolved": r.unresolved,
            "profiles": profiles,
        }));
    }
    match a.output.format {
        Format::Csv => emit_table(
            &a.output,
            &["sigma", "count", "xi0_list", "n_max_list"],
            &rows,
        ),
        Format::Json => emit_json(
            &a.output,
            &json!({
                "schema": SCHEMA,
                "command": "scan",
                "m": a.m,
                "window": [lo, hi],
                "grid": a.grid,
                "rows": json_rows,
            }),
        ),
    }
}

fn phase(a: &PhaseArgs) -> Result<(), CliError> {
    let q = params(a.model.m, a.model.sigma)?;
    let [x, y, z] = a.start[..] else {
        return Err(usage("--start takes three comma-separated numbers X,Y,Z"));
    };
    if ![x, y, z].iter().all(|v| v.is_finite()) {
        return Err(usage("--start must be finite"));
    }
    positive("eta-max", a.eta_max)?;
    positive("spacing", a.spacing)?;
    let r = follow_orbit(&q, PhaseState::new(x, y, z), a.eta_max, a.spacing);
    match a.output.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = r
                .samples
                .iter()
                .map(|(eta, s)| {
                    vec![
                        num(*eta),
                        num(s.x),
                        num(s.y),
                        num(s.z),
                        num(cylinder_value(&q, s)),
                    ]
                })
                .collect();
            emit_table(&a.output, &["eta", "X", "Y", "Z", "cylinder_value"], &rows)?;
        }
        Format::Json => {
            let samples: Vec<Value> = r
                .samples
                .iter()
                .map(|(eta, s)| json!([eta, s.x, s.y, s.z, cylinder_value(&q, s)]))
                .collect();
            emit_json(
                &a.output,
                &json!({
                    "schema": SCHEMA,
                    "command": "phase",
                    "m": q.m(),
                    "sigma": q.sigma(),
                    "start": [x, y, z],
                    "columns": ["eta", "X", "Y", "Z", "cylinder_value"],
                    "samples": samples,
                    "end": r.end,
                }),
            )?;
        }
    }
    match r.end {
        OrbitEnd::Failed { reason } => Err(CliError::Numerical(reason)),
        _ => Ok(()),
    }
}

fn points(a: &PointArgs) -> Result<(), CliError> {
    let q = params(a.model.m, a.model.sigma)?;
    let cps = critical_points(&q);
    match a.output.format {
        Format::Json => emit_json(
            &a.output,
            &json!({
                "schema": SCHEMA,
                "command": "points",
                "m": q.m(),
                "sigma": q.sigma(),
                "points": cps,
            }),
        ),
        Format::Csv => {
            let rows: Vec<Vec<String>> = cps
                .iter()
                .map(|cp| {
                    let (inf, coords) = match cp.location {
                        PointLocation::Finite(s) => ("false", [s.x, s.y, s.z, 0.0]),
                        PointLocation::AtInfinity(d) => ("true", d),
                    };
                    let mut row = vec![format!("{:?}", cp.label), inf.to_string()];
                    row.extend(coords.iter().map(|v| num(*v)));
                    row.push(format!("{:?}", cp.kind));
                    row.push(format!("{:?}", cp.expansion));
                    for i in 0..3 {
                        match cp.eigenvalues.get(i) {
                            Some(l) => row.extend([num(l.re), num(l.im)]),
                            None => row.extend([String::new(), String::new()]),
                        }
                    }
                    row
                })
                .collect();
            emit_table(
                &a.output,
                &[
                    "label",
                    "at_infinity",
                    "x",
                    "y",
                    "z",
                    "w",
                    "kind",
                    "behavior",
                    "l1_re",
                    "l1_im",
                    "l2_re",
                    "l2_im",
                    "l3_re",
                    "l3_im",
                ],
                &rows,
            )
        }
    }
}

fn bounds(a: &PointArgs) -> Result<(), CliError> {
    let q = params(a.model.m, a.model.sigma)?;
    let g = nonexistence_gap(&q).map_err(|e| usage(e.to_string()))?;
    match a.output.format {
        Format::Json => emit_json(
            &a.output,
            &json!({
                "schema": SCHEMA,
                "command": "bounds",
                "m": q.m(),
                "sigma": q.sigma(),
                "xi_plus": g.xi_plus,
                "xi_minus": g.xi_minus,
                "sigma_threshold": g.sigma_threshold,
                "gap": g.gap,
            }),
        ),
        Format::Csv => emit_table(
            &a.output,
            &[
                "m",
                "sigma",
                "xi_plus",
                "xi_minus",
                "sigma_threshold",
                "gap",
            ],
            &[vec![
                num(q.m()),
                num(q.sigma()),
                num(g.xi_plus),
                num(g.xi_minus),
                num(g.sigma_threshold),
                g.gap.to_string(),
            ]],
        ),
    }
}

fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    let cfg = AcceptanceConfig {
        seed: a.seed,
        shooting: shooting_config(&a.tol, None)?,
    };
    let reports = run_all(&cfg);
    let failed = reports.iter().filter(|r| !r.passed).count();
    let lines = || {
        reports
            .iter()
            .map(|r| {
                let tag = if r.passed { "PASS" } else { "FAIL" };
                format!("{tag} {:>2} {}: {}\n", r.id, r.name, r.detail)
            })
            .collect::<String>()
    };
    match (&a.output.out, a.output.format) {
        (None, Format::Json) => {}
        _ => {
            let mut out = io::stdout().lock();
            out.write_all(lines().as_bytes())?;
            out.flush()?;
        }
    }
    let entries: Vec<Value> = reports
        .iter()
        .map(|r| json!({"id": r.id, "name": r.name, "passed": r.passed, "detail": r.detail}))
        .collect();
    match (&a.output.out, a.output.format) {
        (_, Format::Json) => emit_json(
            &a.output,
            &json!({
                "schema": SCHEMA,
                "command": "verify",
                "seed": a.seed,
                "passed": failed == 0,
                "criteria": entries,
            }),
        )?,
        (Some(_), Format::Csv) => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        r.id.to_string(),
                        r.name.to_string(),
                        r.passed.to_string(),
                        r.detail.clone(),
                    ]
                })
                .collect();
            emit_table(&a.output, &["id", "name", "passed", "detail"], &rows)?;
        }
        (None, Format::Csv) => {}
    }
    if failed > 0 {
        return Err(CliError::Verification(failed, reports.len()));
    }
    Ok(())
}
