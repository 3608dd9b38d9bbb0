use std::path::Path;
use std::process::{Command, Output};

use blowup_cli::args::Scaling;
use blowup_cli::export::{read_profile_csv, Coords};
use blowup_cli::{CliError, EXIT_NUMERICAL, EXIT_USAGE, EXIT_VERIFY};
use blowup_core::model::integral_identity_residual;
use blowup_core::shooting::{shoot_backward, ShootingConfig};
use blowup_core::Params;
use serde_json::Value;

fn blowup(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blowup"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(args: &[&str]) -> Value {
    let mut v = args.to_vec();
    v.extend(["--format", "json"]);
    let out = blowup(&v);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

#[test]
fn profile_sign_of_axis_slope() {
    let v = json_of(&["profile", "--m", "2", "--sigma", "0.1", "--xi0", "12"]);
    assert_eq!(v["schema"], "v1");
    assert!(v["slope_at_origin"].as_f64().unwrap() > 0.0);
    let v = json_of(&["profile", "--m", "2", "--sigma", "0.5", "--xi0", "2"]);
    assert!(v["slope_at_origin"].as_f64().unwrap() < 0.0);
}

#[test]
fn forward_homogeneous_profile_interface() {
    let v = json_of(&["profile", "--m", "2", "--a", "1.3333333333333333"]);
    assert_eq!(v["outcome"]["kind"], "interface");
    let x = v["interface"].as_f64().unwrap();
    assert!((x - std::f64::consts::PI * 2f64.sqrt()).abs() < 1e-5, "{x}");
    // Eight digits of 4/3 miss the separatrix; the orbit bounces at a
    // positive minimum unless the vanishing threshold is loosened.
    let v = json_of(&["profile", "--m", "2", "--a", "1.3333333"]);
    assert_eq!(v["outcome"]["kind"], "exhausted");
    let v = json_of(&[
        "profile",
        "--m",
        "2",
        "--a",
        "1.3333333",
        "--vanish-tol",
        "1e-5",
    ]);
    assert!((v["interface"].as_f64().unwrap() - 4.4429).abs() < 1e-3);
}

#[test]
fn native_coordinates_are_available() {
    let v = json_of(&[
        "profile",
        "--m",
        "2",
        "--a",
        "1.3333333333333333",
        "--scaling",
        "native",
    ]);
    assert!((v["interface"].as_f64().unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-5);
}

#[test]
fn csv_round_trip_reproduces_identity_residual() {
    let dir = tempfile::tempdir().unwrap();
    for (scaling, name) in [
        (Scaling::Samarskii, "samarskii"),
        (Scaling::Native, "native"),
    ] {
        let path = dir.path().join(format!("p_{name}.csv"));
        let out = blowup(&[
            "profile",
            "--m",
            "2",
            "--sigma",
            "0.5",
            "--xi0",
            "2",
            "--scaling",
            name,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        let side = read_json(&path.with_extension("json"));
        assert_eq!(side["coordinates"]["scaling"], name);

        let q = Params::new(2.0, 0.5).unwrap();
        let c = Coords::new(&q, scaling);
        let back = read_profile_csv(std::fs::File::open(&path).unwrap(), q, &c).unwrap();
        let cfg = ShootingConfig::default();
        let x = c.xi_in(2.0);
        let mem = shoot_backward(&q, x, cfg.epsilon_rel * x, true, &cfg)
            .unwrap()
            .profile;
        assert_eq!(back.samples.len(), mem.samples.len());
        for xi in [x, 0.5 * x, 0.1 * x] {
            let xi = xi.min(back.last().xi);
            let a = integral_identity_residual(&back, xi).unwrap();
            let b = integral_identity_residual(&mem, xi).unwrap();
            assert!((a - b).abs() < 1e-9, "{name}: {a} vs {b}");
        }
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let p = dir.path().join(format!("{tag}.csv"));
        let s = dir.path().join(format!("{tag}_scan.json"));
        assert!(blowup(&[
            "profile",
            "--m",
            "3",
            "--sigma",
            "1",
            "--xi0",
            "2.5",
            "--out",
            p.to_str().unwrap()
        ])
        .status
        .success());
        assert!(blowup(&[
            "scan",
            "--m",
            "2",
            "--sigma",
            "0.1,0.5",
            "--xi0-max",
            "8",
            "--format",
            "json",
            "--out",
            s.to_str().unwrap()
        ])
        .status
        .success());
        (
            std::fs::read(&p).unwrap(),
            std::fs::read(p.with_extension("json")).unwrap(),
            std::fs::read(&s).unwrap(),
        )
    };
    let a = run("a");
    let b = run("b");
    assert!(a == b);
    assert!(!a.0.contains(&b'\r'));
    let text = String::from_utf8(a.0).unwrap();
    assert!(text.starts_with("xi,f,fprime,g,dg\n"));
    let first = text.lines().nth(1).unwrap();
    for field in first.split(',') {
        let mantissa = field.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.len(), 18, "{field}");
    }
}

#[test]
fn scan_examples() {
    let out = blowup(&["scan", "--m", "2", "--sigma", "0.1", "--xi0-max", "16"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let xs: Vec<f64> = row[2].split(';').map(|s| s.parse().unwrap()).collect();
    assert!(xs.iter().any(|x| (x - 11.1).abs() < 0.3), "{xs:?}");
    assert!(xs.iter().any(|x| (x - 12.83).abs() < 0.3), "{xs:?}");

    let v = json_of(&["scan", "--m", "2", "--sigma", "4", "--xi0-max", "20"]);
    assert_eq!(v["rows"][0]["count"], 0);

    let v = json_of(&["scan", "--m", "2", "--sigma", "0", "--xi0-max", "6"]);
    assert_eq!(v["rows"][0]["count"], 1);
    let x = v["rows"][0]["profiles"][0]["xi0"].as_f64().unwrap();
    assert!((x - std::f64::consts::PI * 2f64.sqrt()).abs() < 1e-4, "{x}");
}

#[test]
fn bounds_points_and_phase() {
    let v = json_of(&["bounds", "--m", "2", "--sigma", "4"]);
    assert_eq!(v["gap"], true);
    assert!((v["xi_plus"].as_f64().unwrap() - 1.4579).abs() < 1e-4);
    assert!((v["xi_minus"].as_f64().unwrap() - 1.5131).abs() < 1e-4);

    let v = json_of(&["points", "--m", "2", "--sigma", "1"]);
    let p3 = v["points"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["label"] == "P3")
        .unwrap();
    let mut ims: Vec<f64> = p3["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| {
            assert!(l[0].as_f64().unwrap().abs() < 1e-14);
            l[1].as_f64().unwrap()
        })
        .collect();
    ims.sort_by(f64::total_cmp);
    assert_eq!(ims, [-1.0, 0.0, 1.0]);

    let out = blowup(&[
        "phase",
        "--m",
        "2",
        "--sigma",
        "1",
        "--start",
        "0.05,0.01,1.01",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("eta,X,Y,Z,cylinder_value\n"));
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    assert!(
        last[2] < -100.0,
        "orbit leaves towards negative Y: {last:?}"
    );
}

#[test]
fn exit_codes() {
    assert_eq!(
        blowup(&["bounds", "--m", "0.5", "--sigma", "1"])
            .status
            .code(),
        Some(EXIT_USAGE)
    );
    assert_eq!(
        blowup(&["bounds", "--m", "2", "--sigma", "0"])
            .status
            .code(),
        Some(EXIT_USAGE)
    );
    assert_eq!(
        blowup(&["profile", "--m", "2"]).status.code(),
        Some(EXIT_USAGE)
    );
    assert_eq!(
        blowup(&["profile", "--m", "2", "--a", "1", "--xi0", "2"])
            .status
            .code(),
        Some(EXIT_USAGE)
    );
    assert_eq!(
        blowup(&["phase", "--m", "2", "--start", "1,2"])
            .status
            .code(),
        Some(EXIT_USAGE)
    );
    assert_eq!(
        blowup(&["scan", "--m", "2", "--sigma", "1", "--xi0-max", "-1"])
            .status
            .code(),
        Some(EXIT_USAGE)
    );
    assert_eq!(
        blowup(&["profile", "--m", "2", "--xi0", "2", "--rel-tol", "0"])
            .status
            .code(),
        Some(EXIT_USAGE)
    );
    assert_eq!(blowup(&["--help"]).status.code(), Some(0));
    let out = Command::new(env!("CARGO_BIN_EXE_blowup"))
        .args(["bounds", "--m", "2", "--sigma", "4"])
        .env("BLOWUP_NUM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    let out = Command::new(env!("CARGO_BIN_EXE_blowup"))
        .args(["scan", "--m", "2", "--sigma", "0.1", "--xi0-max", "16"])
        .env("BLOWUP_NUM_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(CliError::Numerical("x".into()).exit_code(), EXIT_NUMERICAL);
    assert_eq!(CliError::Verification(1, 10).exit_code(), EXIT_VERIFY);
}
