//! End-to-end checks of the command-line driver: outputs, exit codes, and
//! byte-for-byte determinism across repeated runs.

use std::process::{Command, Output};

fn vlax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vlax"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn fixture_path(name: &str) -> String {
    format!("{}/tests/fixtures/{}", env!("CARGO_MANIFEST_DIR"), name)
}

#[test]
fn poisson_matrix_matches_reference_display() {
    let out = vlax(&["poisson-matrix", "--algebra", "sl2", "--level", "0", "--decomposition", "borel"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "[0, 0, 0]\n[0, 0, 2*e]\n[0, -2*e, 0]\n");
    // strict convention flips the display
    let strict = vlax(&[
        "poisson-matrix",
        "--algebra",
        "sl2",
        "--decomposition",
        "borel",
        "--strict-convention",
    ]);
    assert_eq!(stdout(&strict), "[0, 0, 0]\n[0, 0, -2*e]\n[0, 2*e, 0]\n");
}

#[test]
fn hierarchy_prints_first_borel_flow() {
    let out = vlax(&["hierarchy", "--algebra", "sl2", "--decomposition", "borel", "--family", "power", "--n", "1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "df/dt_1 = 0\ndh/dt_1 = 4*f*e\nde/dt_1 = -2*h*e\n");
}

#[test]
fn involution_exits_zero_on_all_true() {
    let out = vlax(&["involution", "--algebra", "sl3", "--decomposition", "borel", "--max-degree", "3"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("all pairs Poisson-commute"));
}

#[test]
fn mybe_defect_sets_math_failure_exit_code() {
    let ok = vlax(&["mybe", "--algebra", "sl2", "--decomposition", "borel"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = vlax(&["mybe", "--algebra", "sl2", "--decomposition", "iwasawa"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("defect (f, h)"));
}

#[test]
fn usage_errors_exit_two() {
    let unknown = vlax(&["poisson-matrix", "--algebra", "so8", "--decomposition", "borel"]);
    assert_eq!(unknown.status.code(), Some(2));
    let unknown_dec = vlax(&["poisson-matrix", "--algebra", "sl2", "--decomposition", "parabolic"]);
    assert_eq!(unknown_dec.status.code(), Some(2));
    let bad_flag = vlax(&["no-such-command"]);
    assert_eq!(bad_flag.status.code(), Some(2));
}

#[test]
fn algebra_spec_files_load() {
    let path = fixture_path("heisenberg.json");
    let out = vlax(&["poisson-matrix", "--algebra", &path, "--level", "1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "[(1)*D]\n");
    let table = vlax(&["bracket-table", "--algebra", &path, "--level", "1"]);
    assert_eq!(stdout(&table), "{u_L u} = (1)*L\n");
}

#[test]
fn verify_solution_and_integrate() {
    for (flow, solution) in [
        ("borel1", "rational"),
        ("iwasawa1", "oscillator"),
        ("borel2", "soliton"),
    ] {
        let out = vlax(&["verify-solution", "--flow", flow, "--solution", solution]);
        assert_eq!(out.status.code(), Some(0), "{flow}/{solution}: {}", stdout(&out));
        assert!(stdout(&out).starts_with("PASS"));
    }
    // a deliberately tight tolerance is a mathematical failure, not a usage error
    let tight = vlax(&[
        "verify-solution",
        "--flow",
        "borel1",
        "--solution",
        "oscillator",
    ]);
    assert_eq!(tight.status.code(), Some(1));

    let tr = vlax(&["integrate", "--init", "1,1,-0.25", "--t-end", "1", "--dt", "0.001"]);
    assert!(tr.status.success());
    let text = stdout(&tr);
    let last_data = text
        .lines()
        .filter(|l| !l.starts_with("first-integral") && !l.starts_with('t'))
        .next_back()
        .unwrap();
    let h_end: f64 = last_data.split('\t').nth(2).unwrap().parse().unwrap();
    assert!((h_end - 0.5).abs() < 1e-8);
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        vec!["bracket-table", "--algebra", "sl3", "--decomposition", "borel"],
        vec!["poisson-matrix", "--algebra", "sl3", "--decomposition", "iwasawa"],
        vec!["hierarchy", "--algebra", "sl3", "--decomposition", "borel", "--family", "power", "--n", "1"],
        vec!["export", "--what", "matrix", "--algebra", "sl2", "--decomposition", "borel", "--format", "json"],
    ] {
        let a = stdout(&vlax(&args));
        let b = stdout(&vlax(&args));
        assert_eq!(a, b, "repeated runs differ for {args:?}");
        assert!(!a.is_empty());
    }
}

#[test]
fn latex_export_renders() {
    let out = vlax(&[
        "poisson-matrix",
        "--algebra",
        "sl2",
        "--decomposition",
        "borel",
        "--format",
        "latex",
    ]);
    let text = stdout(&out);
    assert!(text.contains("\\begin{bmatrix}"));
    assert!(text.contains("2 e"));
    let flow = vlax(&[
        "hierarchy",
        "--algebra",
        "sl2",
        "--decomposition",
        "borel",
        "--format",
        "latex",
    ]);
    assert!(stdout(&flow).contains("\\begin{align*}"));
}

#[test]
fn output_file_flag_writes_identical_bytes() {
    let dir = std::env::temp_dir().join("vlax-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("matrix.txt");
    let to_file = vlax(&[
        "poisson-matrix",
        "--algebra",
        "sl2",
        "--decomposition",
        "borel",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(to_file.status.success());
    let direct = stdout(&vlax(&["poisson-matrix", "--algebra", "sl2", "--decomposition", "borel"]));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), direct);
}

#[test]
fn bracket_table_reports_axiom_failure_for_sl3_iwasawa() {
    let out = vlax(&["bracket-table", "--algebra", "sl3", "--decomposition", "iwasawa"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("Jacobi fails"));
}
