use std::process::{Command, Output};

fn qdlab(args: &[&str]) -> Output {
    qdlab_env(args, None)
}

fn qdlab_env(args: &[&str], cap: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qdlab"));
    cmd.args(args).env_remove("QDLAB_CAP");
    if let Some(c) = cap {
        cmd.env("QDLAB_CAP", c);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (serde_json::Value, i32) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = qdlab(&all);
    let v = serde_json::from_str(&stdout(&o)).unwrap_or_else(|e| {
        panic!(
            "{e}: {} / {}",
            stdout(&o),
            String::from_utf8_lossy(&o.stderr)
        )
    });
    (v, o.status.code().unwrap())
}

fn homs(v: &serde_json::Value) -> Vec<(u64, String)> {
    v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            (
                r["hom"].as_u64().unwrap(),
                r["class"].as_str().unwrap().to_string(),
            )
        })
        .collect()
}

#[test]
fn enumerate_examples() {
    let (v, code) = json(&["enumerate", "--gauge", "4", "--matter", "2"]);
    assert_eq!(code, 0);
    assert_eq!(homs(&v), [(0, "A".into()), (2, "C".into())]);
    let (v, _) = json(&["enumerate", "--gauge", "2", "--matter", "3"]);
    assert_eq!(homs(&v), [(0, "A".into())]);
    let (v, _) = json(&["enumerate", "--gauge", "2", "--matter", "2"]);
    assert_eq!(homs(&v), [(0, "A".into()), (1, "B".into())]);
}

#[test]
fn verify_exit_codes() {
    let (v, code) = json(&["verify", "--gauge", "2", "--matter", "2", "--hom", "1"]);
    assert_eq!(code, 0);
    assert!(v["max_commutator_norm"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["solvable"], true);
    for n in ["1", "2", "3", "4"] {
        assert_eq!(
            qdlab(&["verify", "--gauge", n, "--matter", "1"])
                .status
                .code(),
            Some(0)
        );
    }
    let bad = qdlab(&["verify", "--gauge", "2", "--matter", "3", "--hom", "1"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("not a homomorphism"));
}

#[test]
fn gsd_examples() {
    for (args, expected) in [
        (vec!["--hom", "1"], 1),
        (vec!["--matter", "1"], 4),
        (vec!["--matter", "3", "--hom", "0"], 12),
    ] {
        let mut all = vec!["gsd"];
        all.extend(args);
        let (v, code) = json(&all);
        assert_eq!(code, 0);
        assert_eq!(v["oracle"], expected);
        assert_eq!(v["formula"], expected);
        assert_eq!(v["match"], true);
        assert_eq!(v["schema"], 1);
    }
}

#[test]
fn confine_examples() {
    let deltas = |args: &[&str]| -> Vec<f64> {
        let mut all = vec!["confine"];
        all.extend(args);
        let (v, code) = json(&all);
        assert_eq!(code, 0);
        v["rows"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["delta_e"].as_f64().unwrap())
            .collect()
    };
    assert_eq!(deltas(&["--hom", "1"]), [3.0, 4.0, 5.0]);
    assert_eq!(deltas(&["--hom", "0"]), [2.0, 2.0, 2.0]);
    assert_eq!(deltas(&["--hom", "1", "--charge", "0"]), [0.0, 0.0, 0.0]);
    assert_eq!(deltas(&["--hom", "1", "--kind", "x"]), [2.0, 2.0, 2.0]);
    let csv = stdout(&qdlab(&["confine", "--hom", "1", "--format", "csv"]));
    assert_eq!(csv, "length,delta_e\n1,3\n2,4\n3,5\n");
    assert!(stdout(&qdlab(&["confine", "--hom", "1"])).contains("profile"));
}

#[test]
fn spectrum_wops_fourier() {
    let (v, code) = json(&["spectrum", "--matter", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["ground_energy"], -16);
    assert_eq!(v["ground_multiplicity"], 4);

    let (v, _) = json(&["wops", "--hom", "1"]);
    let table: Vec<(u64, u64, Vec<String>)> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            let ops = r["operators"]
                .as_array()
                .unwrap()
                .iter()
                .map(|s| s.as_str().unwrap().to_string());
            (
                r["gauge_label"].as_u64().unwrap(),
                r["matter_label"].as_u64().unwrap(),
                ops.collect(),
            )
        })
        .collect();
    let one = |s: &str| vec![s.to_string()];
    assert_eq!(
        table,
        [
            (1, 1, one("1")),
            (1, 2, one("sigma_z")),
            (2, 1, one("sigma_x")),
            (2, 2, one("sigma_y"))
        ]
    );

    let (v, code) = json(&["fourier", "--hom", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["diagonal"], true);
    assert!(v["max_off_diagonal"].as_f64().unwrap() < 1e-10);
}

#[test]
fn output_is_deterministic() {
    let args = ["gsd", "--matter", "3", "--format", "json"];
    let a = qdlab(&args);
    let b = qdlab(&args);
    assert_eq!(a.stdout, b.stdout);
    // Fixed key order.
    let s = stdout(&a);
    let pos = |k: &str| s.find(&format!("\"{k}\"")).unwrap();
    assert!(
        pos("schema") < pos("command")
            && pos("command") < pos("model")
            && pos("model") < pos("oracle")
    );
    assert!(s.contains("\"trace\":12.0000000000"));
}

#[test]
fn config_file_and_overrides() {
    let dir = std::env::temp_dir().join(format!("qdlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("model.cfg");
    std::fs::write(
        &path,
        "# D^2(Z_2)\nfamily = dual\ngauge = 2\nmatter = 2\nhom = 1\nformat = json\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();

    let v: serde_json::Value =
        serde_json::from_str(&stdout(&qdlab(&["gsd", "--config", p]))).unwrap();
    assert_eq!(v["oracle"], 1);
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&qdlab(&["gsd", "--config", p, "--hom", "0"]))).unwrap();
    assert_eq!(v["oracle"], 8);

    std::fs::write(&path, "gauge = 2\ncolour = blue\n").unwrap();
    assert_eq!(qdlab(&["gsd", "--config", p]).status.code(), Some(2));
    assert_eq!(
        qdlab(&["gsd", "--config", "/nonexistent/qdlab.cfg"])
            .status
            .code(),
        Some(2)
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn dimension_cap_precedence() {
    // D^2(Z_2) on 2x2 has dimension 4096.
    let args = ["gsd", "--hom", "1", "--format", "json"];
    assert_eq!(qdlab_env(&args, Some("100")).status.code(), Some(2));
    let over = qdlab_env(&args, Some("100"));
    assert!(String::from_utf8_lossy(&over.stderr).contains("100"));
    assert_eq!(qdlab_env(&args, Some("5000")).status.code(), Some(0));
    let mut with_flag = args.to_vec();
    with_flag.extend(["--cap", "5000"]);
    assert_eq!(qdlab_env(&with_flag, Some("100")).status.code(), Some(0));
    assert_eq!(qdlab_env(&args, Some("many")).status.code(), Some(2));
}

#[test]
fn configuration_errors_exit_2() {
    assert_eq!(qdlab(&["gsd", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(qdlab(&["gsd", "--genus", "2"]).status.code(), Some(2));
    assert_eq!(qdlab(&["gsd", "--family", "cubic"]).status.code(), Some(2));
    assert_eq!(qdlab(&["confine", "--charge", "5"]).status.code(), Some(2));
    assert_eq!(
        qdlab(&["wops", "--family", "vertex", "--theta", "regular"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(qdlab(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn vertex_family_runs() {
    let (v, code) = json(&["gsd", "--family", "vertex", "--matter", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["oracle"], 4);
    assert_eq!(v["formula"], serde_json::Value::Null);
    let (_, code) = json(&[
        "verify",
        "--family",
        "vertex",
        "--theta",
        "block:1:1",
        "--matter",
        "3",
    ]);
    assert_eq!(code, 0);
}
