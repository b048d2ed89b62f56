//! Exit codes and output formats of the command line.

use std::path::PathBuf;
use std::process::{Command, Output};

fn spec(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("specs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hscomp"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn estimate_writes_the_profile_csv() {
    let out = run(&[
        "--construction",
        &spec("z_star_z.toml"),
        "--radius",
        "3",
        "estimate",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d,min,max,count"));
    assert_eq!(lines.next(), Some("0,0.0,0.0,53"));
}

#[test]
fn json_output_parses() {
    let out = run(&[
        "--construction",
        &spec("z2_star_z3.toml"),
        "--radius",
        "4",
        "--format",
        "json",
        "estimate",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["fit"]["headline"].is_number());
    assert_eq!(v["profile"]["radius"], 4);
}

#[test]
fn a_false_certificate_exits_one() {
    let z = spec("z_star_z.toml");
    let ok = run(&["--construction", &z, "--radius", "3", "verify"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = run(&[
        "--construction",
        &z,
        "--radius",
        "4",
        "verify",
        "--epsilon",
        "0.9",
        "--c",
        "1",
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn configuration_errors_exit_two() {
    assert_eq!(run(&["estimate"]).status.code(), Some(2));
    assert_eq!(
        run(&["--construction", "/nonexistent.toml", "estimate"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["--construction", &spec("d_infinity.toml"), "chains"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["schedule", "--p", "2"]).status.code(), Some(2));
}

#[test]
fn chains_and_cnd_pass_on_the_klein_extension() {
    let k = spec("klein_hnn.toml");
    assert_eq!(
        run(&["--construction", &k, "--radius", "3", "chains"])
            .status
            .code(),
        Some(0)
    );
    let out = run(&["--construction", &k, "--radius", "4", "cnd"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("check,value,limit,pass"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn every_shipped_spec_loads() {
    for name in [
        "z_star_z",
        "d_infinity",
        "z2_star_z3",
        "z4_amalgam_z6",
        "bs12",
        "klein_hnn",
    ] {
        let out = run(&[
            "--construction",
            &spec(&format!("{name}.toml")),
            "--radius",
            "2",
            "embed",
        ]);
        assert_eq!(out.status.code(), Some(0), "{name}");
    }
    let out = run(&["--group-spec", &spec("klein.toml"), "--radius", "2", "embed"]);
    assert_eq!(out.status.code(), Some(0));
}
