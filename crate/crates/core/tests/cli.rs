use std::process::{Command, Output};

use faber_core::faber::io;

fn faber(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_faber"))
        .args(args)
        .env("FABER_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn levels_lists_eight_vectors() {
    let o = faber(&["levels", "--dim", "2", "--n", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("j_1,j_2,reduced_order"));
    let rows: Vec<&str> = lines.take_while(|l| !l.starts_with("levels:")).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.contains(&"-1,-1,0") && rows.contains(&"1,0,1"));
    assert!(out.contains("8 level vectors"));
}

#[test]
fn rates_writes_nine_records_and_reports_the_slope() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rates.csv");
    let o = faber(&[
        "rates",
        "--dim",
        "1",
        "--p",
        "2",
        "--q",
        "2",
        "--func",
        "extremal",
        "--depth",
        "14",
        "--n",
        "4..12",
        "--seed",
        "7",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,m,error,error_estimate,reference"));
    assert_eq!(lines.count(), 9);
    let summary = stdout(&o);
    assert!(summary.contains("fitted slope -0.5"), "{summary}");
    assert!(summary.contains("m = 8193"));
}

#[test]
fn comb_has_one_row_per_budget() {
    let o = faber(&["comb", "--alpha", "1", "--dim", "2", "--n", "10..20"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,ratio_tail,ratio_bulk");
    assert_eq!(
        lines
            .iter()
            .filter(|l| l.starts_with(char::is_numeric))
            .count(),
        11
    );
}

#[test]
fn json_mirrors_csv_field_names() {
    let o = faber(&[
        "cubature", "--dim", "2", "--n", "1..3", "--func", "x2", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let json_end = out.rfind(']').unwrap() + 1;
    let rows: serde_json::Value = serde_json::from_str(&out[..json_end]).unwrap();
    let first = rows[0].as_object().unwrap();
    let keys: Vec<&str> = first.keys().map(|k| k.as_str()).collect();
    assert_eq!(keys, vec!["abs_error", "m", "n", "reference"]);
}

#[test]
fn identical_runs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for (i, threads) in ["1", "3"].into_iter().enumerate() {
        let path = dir.path().join(format!("w{i}.csv"));
        let o = Command::new(env!("CARGO_BIN_EXE_faber"))
            .args([
                "widths",
                "--dim",
                "2",
                "--n",
                "3..5",
                "--func",
                "extremal",
                "--depth",
                "8",
                "--samples",
                "20000",
                "--out",
                path.to_str().unwrap(),
            ])
            .env("FABER_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        bodies.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    assert!(String::from_utf8_lossy(&bodies[0]).starts_with("m,error,upper_ref,lower_ref\n"));
}

#[test]
fn analyze_output_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.txt");
    let o = faber(&[
        "analyze",
        "--dim",
        "2",
        "--n",
        "3",
        "--func",
        "exp",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let series = io::from_text(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!((series.dim(), series.budget()), (2, 3));
    assert!(stdout(&o).contains("m = 113 nodes"));
}

#[test]
fn noncompact_reports_the_conclusion() {
    let o = faber(&["noncompact", "--max-level", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("j,l,witness,distance\n"));
    assert!(out.contains("no L_inf-convergent subsequence"));
}

#[test]
fn print_config_shows_defaults_without_running() {
    let o = faber(&[
        "recover",
        "--dim",
        "1",
        "--n",
        "5",
        "--func",
        "kink",
        "--print-config",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let config: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(config["subcommand"], "recover");
    assert_eq!(config["measure"]["method"]["CompositeGauss"]["order"], 5);
    let mc = faber(&["rates", "--dim", "2", "--n", "2..3", "--print-config"]);
    let config: serde_json::Value = serde_json::from_str(&stdout(&mc)).unwrap();
    assert_eq!(
        config["measure"]["method"]["StratifiedMc"]["samples"],
        200000
    );
}

#[test]
fn exit_codes() {
    let bad_flag = faber(&["levels", "--dim", "2", "--n", "1", "--wat"]);
    assert_eq!(bad_flag.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_flag.stderr).contains("--wat"));

    let bad_range = faber(&["comb", "--alpha", "1", "--dim", "2", "--n", "9..3"]);
    assert_eq!(bad_range.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_range.stderr).contains("--n"));

    let bad_func = faber(&["analyze", "--dim", "1", "--n", "2", "--func", "nope"]);
    assert_eq!(bad_func.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_func.stderr).contains("--func"));

    // mesh of 2^(3*(20+1)) cells is refused at computation time
    let too_fine = faber(&[
        "recover",
        "--dim",
        "3",
        "--n",
        "2",
        "--func",
        "x2",
        "--method",
        "gauss",
        "--mesh-level",
        "20",
    ]);
    assert_eq!(too_fine.status.code(), Some(1));

    assert_eq!(faber(&["--help"]).status.code(), Some(0));
}
