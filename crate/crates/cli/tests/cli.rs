use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

const MIRRORS: &str = r#"
schema_version = 1

[observable]
kind = "casimir"

[materials.mirror.permittivity]
kind = "perfect"

[[bodies]]
kind = "cavity"
left = "mirror"
right = "mirror"
gap = 1.0
"#;

const VACUUM_CAVITY: &str = r#"
schema_version = 1

[observable]
kind = "casimir"

[materials.nothing]

[[bodies]]
kind = "cavity"
left = "nothing"
right = "nothing"
gap = 1.5
"#;

const CP_PLATE: &str = r#"
schema_version = 1

[observable]
kind = "casimir_polder"
atom = "A"

[quadrature]
rel_tol = 1e-10

[materials.glass.permittivity]
kind = "oscillators"
oscillators = [{ strength = 2.5, resonance = 1.2, damping = 0.1 }]

[[bodies]]
kind = "half_space"
material = "glass"

[[atoms]]
name = "A"
position = [0.0, 0.0, 0.6]

[atoms.model]
polarizability = [{ strength = 0.002, frequency = 0.9 }]
"#;

const TWO_ATOMS: &str = r#"
schema_version = 1

[observable]
kind = "van_der_waals"
atom_a = "A"
atom_b = "B"

[quadrature]
rel_tol = 1e-10

[[atoms]]
name = "A"
position = [0.0, 0.0, 0.0]
model = { polarizability = [{ strength = 1.0, frequency = 1.0 }] }

[[atoms]]
name = "B"
position = [0.0, 0.0, 50.0]
model = { polarizability = [{ strength = 1.0, frequency = 1.0 }] }
"#;

/// Asymmetric cavity: electric left plate, magnetoelectric right plate.
const ASYMMETRIC_CAVITY: &str = r#"
schema_version = 1

[observable]
kind = "casimir"

[quadrature]
rel_tol = 1e-10

[materials.left.permittivity]
kind = "oscillators"
oscillators = [{ strength = 4.0, resonance = 1.0, damping = 0.1 }]

[materials.right.permittivity]
kind = "oscillators"
oscillators = [{ strength = 1.0, resonance = 2.0, damping = 0.3 }]

[materials.right.permeability]
kind = "oscillators"
oscillators = [{ strength = 3.0, resonance = 0.5, damping = 0.2 }]

[[bodies]]
kind = "cavity"
left = "left"
right = "right"
gap = 0.8
"#;

fn mqed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mqed"))
        .args(args)
        .env_remove("MQED_JOBS")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn result_value(path: &Path) -> toml::Table {
    fs::read_to_string(path).unwrap().parse().unwrap()
}

#[test]
fn vacuum_cavity_gives_zero() {
    let dir = TempDir::new().unwrap();
    let scenario = write(&dir, "vac.toml", VACUUM_CAVITY);
    let out = dir.path().join("out.toml");
    let o = mqed(&["compute", "--scenario", s(&scenario), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(result_value(&out)["value"].as_float(), Some(0.0));
}

#[test]
fn ideal_mirrors_with_error_bar_and_settings_echo() {
    let dir = TempDir::new().unwrap();
    let scenario = write(&dir, "m.toml", MIRRORS);
    let out = dir.path().join("out.toml");
    let o = mqed(&["compute", "--scenario", s(&scenario), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let r = result_value(&out);
    let value = r["value"].as_float().unwrap();
    let error = r["quadrature_error"].as_float().unwrap();
    let exact = -PI.powi(2) / 240.0;
    assert!((value - exact).abs() <= 5.0 * error, "{value} ± {error}");
    assert_eq!(r["quantity"].as_str(), Some("pressure"));
    assert_eq!(r["scenario_hash"].as_str().unwrap().len(), 64);
    assert!(r["settings"].as_table().unwrap().contains_key("rel_tol"));
    // Ideal mirrors are admissible but flagged.
    assert!(stderr(&o).contains("notice:"));
}

#[test]
fn missing_material_is_named() {
    let dir = TempDir::new().unwrap();
    let scenario = write(&dir, "bad.toml", &MIRRORS.replace("right = \"mirror\"", "right = \"gold\""));
    let o = mqed(&["compute", "--scenario", s(&scenario)]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("bodies[0].right") && e.contains("gold"), "{e}");
}

#[test]
fn parse_errors_point_at_the_line() {
    let dir = TempDir::new().unwrap();
    let scenario = write(&dir, "bad.toml", "schema_version = 1\n\n[observable]\nkind = casimir\n");
    let o = mqed(&["compute", "--scenario", s(&scenario)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn quadrature_failure_has_its_own_exit_code() {
    let dir = TempDir::new().unwrap();
    let text = CP_PLATE.replace("rel_tol = 1e-10", "rel_tol = 1e-14\nmax_subdivisions = 1");
    let scenario = write(&dir, "hard.toml", &text);
    let o = mqed(&["compute", "--scenario", s(&scenario)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("did not converge"));
}

#[test]
fn verify_duality_passes_for_plate_and_atom_pairs() {
    let dir = TempDir::new().unwrap();
    for (name, text) in [("cp.toml", CP_PLATE), ("vdw.toml", TWO_ATOMS), ("cav.toml", ASYMMETRIC_CAVITY)] {
        let scenario = write(&dir, name, text);
        let report = dir.path().join(format!("{name}.report"));
        let o = mqed(&[
            "verify-duality",
            "--scenario",
            s(&scenario),
            "--rtol",
            "1e-8",
            "--out",
            s(&report),
        ]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        let r = result_value(&report);
        assert_eq!(r["passed"].as_bool(), Some(true));
        assert!(r["relative_difference"].as_float().unwrap() <= 1e-8);
    }
}

#[test]
fn broken_dual_candidate_fails_verification() {
    let dir = TempDir::new().unwrap();
    let scenario = write(&dir, "cav.toml", ASYMMETRIC_CAVITY);
    // Swap ε ↔ μ on the left plate only.
    let broken = ASYMMETRIC_CAVITY.replace(
        "[materials.left.permittivity]",
        "[materials.left.permeability]",
    );
    let candidate = write(&dir, "broken.toml", &broken);
    let o = mqed(&["verify-duality", "--scenario", s(&scenario), "--dual", s(&candidate)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("fail"));
}

#[test]
fn embedded_atom_is_refused() {
    let dir = TempDir::new().unwrap();
    let scenario = write(&dir, "in.toml", &CP_PLATE.replace("[0.0, 0.0, 0.6]", "[0.0, 0.0, -0.6]"));
    let o = mqed(&["verify-duality", "--scenario", s(&scenario)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("real-cavity"), "{}", stderr(&o));
}

#[test]
fn dualize_twice_reproduces_the_canonical_file() {
    let dir = TempDir::new().unwrap();
    let scenario = write(&dir, "cp.toml", CP_PLATE);
    let (a, b) = (dir.path().join("a.toml"), dir.path().join("b.toml"));
    assert!(mqed(&["dualize", "--scenario", s(&scenario), "--out", s(&a)]).status.success());
    assert!(mqed(&["dualize", "--scenario", s(&a), "--out", s(&b)]).status.success());
    let dual = fs::read_to_string(&a).unwrap();
    assert!(dual.contains("[materials.glass.permeability]"));
    assert!(dual.contains("[[atoms.model.magnetizability]]"));
    let canonical = mqed_core::Scenario::from_toml_str(CP_PLATE).unwrap().to_toml_string();
    assert_eq!(fs::read_to_string(&b).unwrap(), canonical);
}

#[test]
fn sweep_gap_follows_inverse_fourth_power() {
    let dir = TempDir::new().unwrap();
    let scenario = write(&dir, "m.toml", MIRRORS);
    let csv = dir.path().join("sweep.csv");
    let o = mqed(&[
        "sweep", "--scenario", s(&scenario), "--param", "bodies.0.gap", "--from", "1", "--to", "2",
        "--points", "2", "--out", s(&csv),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("parameter,value,error"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][0], rows[1][0]), (1.0, 2.0));
    assert!((rows[0][1] / rows[1][1] - 16.0).abs() < 1e-8);
}

#[test]
fn retarded_sweep_has_slope_minus_seven() {
    let dir = TempDir::new().unwrap();
    let scenario = write(&dir, "vdw.toml", TWO_ATOMS);
    let csv = dir.path().join("sweep.csv");
    let o = mqed(&[
        "sweep", "--scenario", s(&scenario), "--param", "atoms.1.position.2", "--from", "50",
        "--to", "100", "--points", "6", "--log", "--out", s(&csv),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let pts: Vec<(f64, f64)> = fs::read_to_string(&csv)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (v[0].ln(), v[1].abs().ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope / -7.0 - 1.0).abs() < 0.01, "slope {slope}");
}

#[test]
fn sweep_input_errors() {
    let dir = TempDir::new().unwrap();
    let scenario = write(&dir, "m.toml", MIRRORS);
    let base = ["sweep", "--scenario", s(&scenario), "--from", "1", "--to", "2"];
    let zero = mqed(&[&base[..], &["--param", "bodies.0.gap", "--points", "0"]].concat());
    assert_eq!(zero.status.code(), Some(1));
    let text = mqed(&[&base[..], &["--param", "bodies.0.kind", "--points", "2"]].concat());
    assert_eq!(text.status.code(), Some(1));
    assert!(stderr(&text).contains("not numeric"), "{}", stderr(&text));
    let missing = mqed(&[&base[..], &["--param", "bodies.3.gap", "--points", "2"]].concat());
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn job_count_from_environment() {
    let dir = TempDir::new().unwrap();
    let scenario = write(&dir, "m.toml", MIRRORS);
    let run = |jobs: &str| {
        Command::new(env!("CARGO_BIN_EXE_mqed"))
            .args([
                "sweep", "--scenario", s(&scenario), "--param", "bodies.0.gap", "--from", "0.5",
                "--to", "4", "--points", "7", "--log",
            ])
            .env("MQED_JOBS", jobs)
            .output()
            .unwrap()
    };
    let (one, four) = (run("1"), run("4"));
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(run("many").status.code(), Some(1));
}

#[test]
fn help_exits_cleanly() {
    let o = mqed(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for cmd in ["compute", "dualize", "verify-duality", "sweep"] {
        assert!(text.contains(cmd));
    }
    assert_eq!(mqed(&["frobnicate"]).status.code(), Some(1));
}
