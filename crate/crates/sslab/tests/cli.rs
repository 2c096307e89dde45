use std::path::Path;
use std::process::{Command, Output};

use sslab::{parse_config_str, ConfigError, VERSION};

const SOLITON: &str = r#"
experiment = "soliton"

[[solitons]]
kappa = [0.0, 0.5]
h = [0.0, -1.0]

[grid]
x_min = -2.0
x_max = 2.0
x_step = 0.5
t_values = [0.0, 0.5, 1.0]

[output]
csv_path = "out.csv"
json_path = "out.json"
"#;

fn sslab(dir: &Path, args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sslab"));
    cmd.args(args).current_dir(dir).env_remove("SSLAB_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn run_with(config: &str, experiment: &str, extra: &[&str]) -> (tempfile::TempDir, Output) {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), config).unwrap();
    let mut args = vec![experiment, "--config", "run.toml"];
    args.extend_from_slice(extra);
    let out = sslab(dir.path(), &args, &[]);
    (dir, out)
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text
        .lines()
        .find(|l| l.starts_with('{'))
        .expect("error JSON on stderr");
    serde_json::from_str(line).unwrap()
}

#[test]
fn misspelled_section_gets_suggestion_and_position() {
    let cfg = SOLITON.replace("[grid]", "[gird]");
    let err = parse_config_str(&cfg, "run.toml").unwrap_err();
    match err {
        ConfigError::Parse {
            line,
            column,
            message,
            ..
        } => {
            assert_eq!((line, column), (8, 1));
            assert!(message.contains("`grid`"), "{message}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn misspelled_domain_key_exits_two_with_json() {
    let cfg = r#"
[domian]
kind = "ellipse"
eta1 = 1.0
eta2 = 2.0
rho = 0.6

[grid]
x_min = 0.0
x_max = 1.0
x_step = 0.5
t_values = [0.0]

[output]
csv_path = "a.csv"
json_path = "a.json"
"#;
    let (_d, out) = run_with(cfg, "ellipse-profile", &[]);
    assert_eq!(out.status.code(), Some(2));
    let j = stderr_json(&out);
    assert_eq!(j["error"]["kind"], "parse");
    assert_eq!(j["error"]["line"], 2);
    assert!(j["error"]["message"]
        .as_str()
        .unwrap()
        .contains("did you mean `domain`"));
    assert_eq!(j["version"], VERSION);
}

#[test]
fn misspelled_nested_key_is_located() {
    let cfg = SOLITON.replace("x_step", "x_stpe");
    match parse_config_str(&cfg, "c.toml").unwrap_err() {
        ConfigError::Parse { line, message, .. } => {
            assert_eq!(line, 11);
            assert!(message.contains("x_step"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn toml_syntax_error_has_position() {
    let cfg = SOLITON.replace("x_min = -2.0", "x_min = = -2.0");
    match parse_config_str(&cfg, "c.toml").unwrap_err() {
        ConfigError::Parse { line, .. } => assert_eq!(line, 9),
        other => panic!("{other:?}"),
    }
}

#[test]
fn ellipse_order_is_validated() {
    let cfg = r#"
[domain]
kind = "ellipse"
eta1 = 2.0
eta2 = 1.0
rho = 0.6

[grid]
x_min = 0.0
x_max = 1.0
x_step = 0.5
t_values = [0.0]

[output]
csv_path = "a.csv"
json_path = "a.json"
"#;
    let err = parse_config_str(cfg, "c.toml").unwrap_err();
    assert!(matches!(err, ConfigError::Validation(_)));
    assert!(err.to_string().contains("eta1 < eta2 required"), "{err}");
    let (_d, out) = run_with(cfg, "ellipse-profile", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["error"]["message"]
        .as_str()
        .unwrap()
        .contains("eta1 < eta2 required"));
}

#[test]
fn grid_validation() {
    let cases = [
        ("x_step = 0.5", "x_step = 0.0"),
        ("x_max = 2.0", "x_max = -3.0"),
        ("t_values = [0.0, 0.5, 1.0]", "t_values = []"),
    ];
    for (from, to) in cases {
        let cfg = SOLITON.replace(from, to);
        assert!(
            matches!(
                parse_config_str(&cfg, "c.toml"),
                Err(ConfigError::Validation(_))
            ),
            "{to}"
        );
    }
}

#[test]
fn unknown_tolerance_is_rejected() {
    let cfg = format!("{SOLITON}\n[tolerances]\nclosed_from = 1e-9\n");
    let (_d, out) = run_with(&cfg, "soliton", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["error"]["message"]
        .as_str()
        .unwrap()
        .contains("closed_form"));
}

#[test]
fn experiment_mismatch_and_missing_file_exit_two() {
    let (_d, out) = run_with(SOLITON, "shielding", &[]);
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = sslab(dir.path(), &["soliton", "--config", "nope.toml"], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], "io");
}

#[test]
fn missing_output_directory_is_a_config_error() {
    let cfg = SOLITON.replace("csv_path = \"out.csv\"", "csv_path = \"missing/out.csv\"");
    let (_d, out) = run_with(&cfg, "soliton", &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn soliton_run_writes_csv_and_json() {
    let (d, out) = run_with(SOLITON, "soliton", &["--plot", "p.svg"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(d.path().join("out.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,t,re_q,im_q");
    assert_eq!(lines.len() - 1, 9 * 3);
    for (k, line) in lines[1..].iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 4);
        for f in &fields {
            let mantissa = f.trim_start_matches('-').split('e').next().unwrap();
            assert!(f.contains('e'), "{f}");
            assert_eq!(mantissa.replace('.', "").len(), 17, "{f}");
            f.parse::<f64>().unwrap();
        }
        let x: f64 = fields[0].parse().unwrap();
        let t: f64 = fields[1].parse().unwrap();
        assert_eq!(x, -2.0 + 0.5 * (k % 9) as f64);
        assert_eq!(t, [0.0, 0.5, 1.0][k / 9]);
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("out.json")).unwrap()).unwrap();
    assert_eq!(json["version"], VERSION);
    assert_eq!(json["experiment"], "soliton");
    assert_eq!(json["pass"], true);
    assert_eq!(json["config"]["grid"]["x_step"], 0.5);
    assert_eq!(json["config"]["tolerances"]["closed_form"], 1e-10);
    assert!(json["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["name"] == "closed_form_error"));
    let svg = std::fs::read_to_string(d.path().join("p.svg")).unwrap();
    assert!(
        svg.starts_with("<svg") && svg.contains("<polyline") && svg.trim_end().ends_with("</svg>")
    );
}

#[test]
fn tolerance_failure_exits_one() {
    let cfg = format!("{SOLITON}\n[tolerances]\nclosed_form = 1e-30\n");
    let (d, out) = run_with(&cfg, "soliton", &[]);
    assert_eq!(out.status.code(), Some(1));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("out.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], false);
    let tol = json["config"]["tolerances"]["closed_form"]
        .as_f64()
        .unwrap();
    assert!((tol - 1e-30).abs() < 1e-44);
}

#[test]
fn numerical_failure_exits_three() {
    // r crosses the negative real axis on the band
    let cfg = r#"
[domain]
kind = "ellipse"
eta1 = 1.0
eta2 = 2.0
rho = 0.6

[density]
w2 = [[1.0, -1.5], [1.0, 0.0]]

[grid]
x_min = 0.0
x_max = 1.0
x_step = 0.5
t_values = [0.0]

[output]
csv_path = "a.csv"
json_path = "a.json"
"#;
    let (_d, out) = run_with(cfg, "ellipse-profile", &[]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(stderr_json(&out)["error"]["kind"], "numerical");
}

#[test]
fn outputs_identical_across_thread_counts() {
    let run = |threads: &str, via_env: bool| {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("run.toml"), SOLITON).unwrap();
        let out = if via_env {
            sslab(
                dir.path(),
                &["soliton", "--config", "run.toml"],
                &[("SSLAB_THREADS", threads)],
            )
        } else {
            sslab(
                dir.path(),
                &["soliton", "--config", "run.toml", "--threads", threads],
                &[],
            )
        };
        assert_eq!(out.status.code(), Some(0));
        let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
        (read("out.csv"), read("out.json"))
    };
    let one = run("1", false);
    assert_eq!(one, run("8", false));
    assert_eq!(one, run("3", true));
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), SOLITON).unwrap();
    let out = sslab(
        dir.path(),
        &["soliton", "--config", "run.toml"],
        &[("SSLAB_THREADS", "zero")],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reference_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            sslab::parse_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 7);
}
