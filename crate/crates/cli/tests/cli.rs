use std::path::PathBuf;
use std::process::{Command, Output};

fn example() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/problem14.json")
}

fn urgp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_urgp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn sweep_csv_layout_and_round_trip() {
    let ex = example();
    let o = urgp(&[
        "sweep",
        ex.to_str().unwrap(),
        "--criterion",
        "optimistic",
        "--epsilon",
        "0.05",
        "--alpha-grid",
        "0.1:0.9:0.1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = parse_csv(&stdout(&o));
    assert_eq!(header, ["alpha", "x1", "x2", "x3", "t0", "t1", "objective"]);
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[4][0], 0.5);
    assert!((rows[4][6] - 193.8614603817).abs() < 1e-6);
    // Full precision: the printed value re-parses to the same f64 text.
    for line in stdout(&o).lines().skip(1) {
        for field in line.split(',') {
            assert_eq!(field.parse::<f64>().unwrap().to_string(), field);
        }
    }
}

#[test]
fn parallel_sweep_is_byte_identical() {
    let ex = example();
    let args = [
        "sweep",
        ex.to_str().unwrap(),
        "--criterion",
        "pessimistic",
        "--epsilon",
        "0.05",
        "--alpha-grid",
        "0.1:0.9:0.2",
    ];
    let serial = urgp(&args);
    let mut par_args = args.to_vec();
    par_args.push("--parallel");
    let par = Command::new(env!("CARGO_BIN_EXE_urgp")).args(&par_args).env("URGP_THREADS", "3").output().unwrap();
    assert!(serial.status.success() && par.status.success());
    assert_eq!(serial.stdout, par.stdout);
}

#[test]
fn curve_mirrors_about_half() {
    let ex = example();
    let run = |c: &str| {
        let o = urgp(&[
            "curve",
            ex.to_str().unwrap(),
            "--criterion",
            c,
            "--epsilon",
            "0.05",
            "--alpha-grid",
            "0.1:0.9:0.1",
        ]);
        assert!(o.status.success());
        parse_csv(&stdout(&o))
    };
    let (header, opt) = run("optimistic");
    let (_, pes) = run("pessimistic");
    assert_eq!(header, ["alpha", "objective"]);
    for (o, p) in opt.iter().zip(pes.iter().rev()) {
        assert!((o[1] - p[1]).abs() <= 1e-6 * o[1]);
    }
}

#[test]
fn solve_prints_six_digits_and_writes_full_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sol.json");
    let ex = example();
    let o = urgp(&[
        "solve",
        ex.to_str().unwrap(),
        "--criterion",
        "optimistic",
        "--alpha",
        "0.5",
        "--epsilon",
        "0.05",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("objective     193.861\n"), "{text}");
    assert!(text.contains("status        optimal"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let obj = json["primal"]["objective"].as_f64().unwrap();
    assert!((obj - 193.8614603817).abs() < 1e-6);
    assert_eq!(json["criterion"], "optimistic");
    assert_eq!(json["primal"]["x"].as_array().unwrap().len(), 5);
}

#[test]
fn expected_needs_no_alpha() {
    let ex = example();
    let o = urgp(&["solve", ex.to_str().unwrap(), "--criterion", "expected", "--epsilon", "0.05"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("193.861"));
}

#[test]
fn usage_errors_exit_2() {
    let ex = example();
    let f = ex.to_str().unwrap();
    for args in [
        vec!["solve", f, "--criterion", "optimistic", "--alpha", "1.0", "--epsilon", "0.05"],
        vec!["solve", f, "--criterion", "optimistic", "--alpha", "0.0", "--epsilon", "0.05"],
        vec!["solve", f, "--criterion", "optimistic", "--epsilon", "0.05"],
        vec!["solve", f, "--criterion", "sideways", "--alpha", "0.5", "--epsilon", "0.05"],
        vec!["solve", f, "--criterion", "optimistic", "--alpha", "0.5", "--epsilon", "0.7"],
        vec!["sweep", f, "--criterion", "optimistic", "--epsilon", "0.05", "--alpha-grid", "0.0:0.9:0.1"],
        vec!["sweep", f, "--criterion", "optimistic", "--epsilon", "0.05", "--alpha-grid", "0.1:1.0:0.1"],
        vec!["validate", f, "--criterion", "optimistic", "--alpha", "0.5", "--epsilon", "0.05", "--samples", "10"],
        vec!["solve", "/no/such/file.json", "--criterion", "expected", "--epsilon", "0.05"],
    ] {
        let o = urgp(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn parse_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(example()).unwrap().replacen(r#""sigma": 3"#, r#""sigma": 0"#, 1);
    let bad = write_temp(&dir, "bad.json", &text);
    let o = urgp(&["solve", bad.to_str().unwrap(), "--criterion", "expected", "--epsilon", "0.05"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("objective[0].A.sigma"), "{}", stderr(&o));
}

#[test]
fn validate_is_seed_deterministic() {
    let ex = example();
    let args = [
        "validate",
        ex.to_str().unwrap(),
        "--criterion",
        "optimistic",
        "--alpha",
        "0.3",
        "--epsilon",
        "0.05",
        "--samples",
        "60000",
        "--seed",
        "42",
    ];
    let a = urgp(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_urgp")).args(args).env("URGP_THREADS", "4").output().unwrap();
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let (_, rows) = {
        let text = stdout(&a);
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let h: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
        let rows: Vec<Vec<String>> = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
        (h, rows)
    };
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "objective");
    assert_eq!(rows[1][3], "60000");
}

#[test]
fn validate_flags_infeasible_point_with_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.json");
    let ex = example();
    let f = ex.to_str().unwrap();
    let o = urgp(&[
        "solve",
        f,
        "--criterion",
        "optimistic",
        "--alpha",
        "0.5",
        "--epsilon",
        "0.05",
        "--out",
        sol.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let check = |path: &PathBuf| {
        urgp(&[
            "validate",
            f,
            "--criterion",
            "optimistic",
            "--alpha",
            "0.5",
            "--epsilon",
            "0.05",
            "--samples",
            "50000",
            "--seed",
            "7",
            "--at",
            path.to_str().unwrap(),
        ])
    };
    assert!(check(&sol).status.success());

    // Push every variable up 20%: the constraint row is then violated.
    let mut json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    for v in json["primal"]["x"].as_array_mut().unwrap() {
        *v = serde_json::json!(v.as_f64().unwrap() * 1.2);
    }
    let moved = write_temp(&dir, "moved.json", &json.to_string());
    let o = check(&moved);
    assert_eq!(o.status.code(), Some(4), "{}", stdout(&o));
    assert!(stderr(&o).contains("constraint1"));
}

#[test]
fn dual_reports_certificate() {
    let ex = example();
    let o = urgp(&["dual", ex.to_str().unwrap(), "--criterion", "optimistic", "--alpha", "0.5", "--epsilon", "0.05"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("difficulty    4"));
    assert!(text.contains("dual value    193.861"));
    assert!(text.lines().filter(|l| l.trim_start().starts_with("constraint")).count() == 7);
}

const NEGATIVE_D: &str = r#"{
    "format": 1,
    "variables": ["x", "y"],
    "objective": [{"A": {"mu": 2, "sigma": 0.1}, "B": {"mu": 3, "sigma": 0.1}, "exponents": {"x": -1, "y": -1}}],
    "constraints": [[{"A": {"mu": 0.5, "sigma": 0.05}, "B": {"mu": 0.6, "sigma": 0.05}, "exponents": {"x": 1, "y": 1}}]]
}"#;

#[test]
fn dual_rejects_negative_difficulty_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_temp(&dir, "neg.json", NEGATIVE_D);
    let o = urgp(&["dual", p.to_str().unwrap(), "--criterion", "expected", "--epsilon", "0.5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("negative degree of difficulty"), "{}", stderr(&o));
}

#[test]
fn half_epsilon_solve_succeeds() {
    let ex = example();
    let o = urgp(&["solve", ex.to_str().unwrap(), "--criterion", "optimistic", "--alpha", "0.5", "--epsilon", "0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("142.68"), "{}", stdout(&o));
}
