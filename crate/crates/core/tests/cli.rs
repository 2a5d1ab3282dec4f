use std::path::Path;
use std::process::{Command, Output};

use imdelab::discovery::{load_reports, read_curve};
use imdelab::nn::Checkpoint;
use serde_json::Value;

fn imdelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imdelab")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn write_config(dir: &Path, name: &str, lines: &[&str]) -> String {
    let path = dir.join(name);
    let mut text = lines.join("\n");
    text.push('\n');
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn tiny_config(dir: &Path, run_id: &str, updates: u64) -> String {
    write_config(
        dir,
        &format!("{run_id}.cfg"),
        &[
            "problem.name = damped-oscillator",
            "model.kind = odenet",
            "method.name = euler",
            "method.T = 0.04",
            "method.S = 2",
            "data.count = 40",
            "data.test_count = 20",
            "net.hidden = 8",
            "train.batch = 20",
            &format!("train.updates = {updates}"),
            "train.log_every = 10",
            "eval.samples = 100000",
            &format!("run.id = {run_id}"),
            &format!("run.out = {}", dir.display()),
        ],
    )
}

#[test]
fn imde_pendulum_euler_row() {
    let out = imdelab(&["imde", "--problem", "pendulum", "--method", "euler", "--k", "1", "--point", "0,1"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    let f1 = doc["coefficients"][1]["value"].as_array().unwrap();
    assert!(f1[0].as_f64().unwrap().abs() < 1e-12);
    assert!((f1[1].as_f64().unwrap() + 4.2073549).abs() < 1e-7);
    assert_eq!(doc["K"], 1);
}

#[test]
fn imde_k0_returns_the_field() {
    let out = imdelab(&["imde", "--problem", "lorenz", "--method", "rk4", "--k", "0", "--point", "1,1,1"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    let rows = doc["coefficients"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    let f0: Vec<f64> = rows[0]["value"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(f0[0], 0.0);
    assert_eq!(f0[1], 17.0);
    assert!((f0[2] - 22.0 / 3.0).abs() < 1e-12);
}

#[test]
fn imde_notes_vanishing_coefficients() {
    let out =
        imdelab(&["imde", "--problem", "pendulum", "--method", "explicit-midpoint", "--k", "2", "--point", "0.3,-0.2"]);
    let doc = json(&out);
    assert_eq!(doc["coefficients"][1]["note"], "vanishes (order-2 method)");
    assert!(doc["coefficients"][2].get("note").is_none());
    let out = imdelab(&["imde", "--problem", "pendulum", "--method", "euler", "--s", "4", "--k", "2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["compositions"], 4);
}

#[test]
fn usage_errors_exit_2() {
    let cases: [&[&str]; 6] = [
        &["imde", "--problem", "van-der-pol", "--method", "euler"],
        &["imde", "--problem", "pendulum", "--method", "rk9"],
        &["imde", "--problem", "pendulum", "--method", "euler", "--point", "1,2,3"],
        &["imde", "--problem", "lorenz", "--param", "sigma=3", "--method", "euler"],
        &["imde", "--problem", "pendulum", "--method", "euler", "--h", "-0.1"],
        &["train"],
    ];
    for args in cases {
        let out = imdelab(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn bad_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown =
        write_config(dir.path(), "a.cfg", &["problem.name = pendulum", "model.kind = odenet", "train.momentum = 0.9"]);
    assert_eq!(code(&imdelab(&["train", "--config", &unknown])), 2);
    let implicit = write_config(
        dir.path(),
        "b.cfg",
        &[
            "problem.name = pendulum",
            "model.kind = odenet",
            "method.name = implicit-euler",
            "train.updates = 1",
            &format!("run.out = {}", dir.path().display()),
        ],
    );
    assert_eq!(code(&imdelab(&["train", "--config", &implicit])), 2);
    assert!(load_reports(&dir.path().join("pendulum-odenet-implicit-euler-T0.12-S1.report.csv")).unwrap()[0]
        .status
        .starts_with("failed"));
    assert_eq!(code(&imdelab(&["reproduce", "table4"])), 2);
}

#[test]
fn divergent_training_exits_3_with_a_flagged_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "boom.cfg",
        &[
            "problem.name = damped-oscillator",
            "model.kind = odenet",
            "data.count = 20",
            "net.hidden = 4",
            "train.schedule = constant",
            "train.lr = 1e200",
            "train.updates = 50",
            "run.id = boom",
            &format!("run.out = {}", dir.path().display()),
        ],
    );
    let out = imdelab(&["train", "--config", &cfg]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = load_reports(&dir.path().join("boom.report.csv")).unwrap();
    assert!(rows[0].status.starts_with("failed"), "{}", rows[0].status);
    assert!(rows[0].train_loss.is_none());
}

#[test]
fn training_writes_artifacts_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path(), "tiny", 40);
    let first = imdelab(&["train", "--config", &cfg]);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    for suffix in ["cfg", "checkpoint.json", "curve.csv", "report.csv", "loss.svg", "phase.svg"] {
        assert!(dir.path().join(format!("tiny.{suffix}")).exists(), "{suffix}");
    }
    let rows = load_reports(&dir.path().join("tiny.report.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].status, "ok");
    assert_eq!(rows[0].h, 0.02);
    assert!(rows[0].e_net_vs_f.unwrap() > 0.0);
    let curve = read_curve(std::fs::File::open(dir.path().join("tiny.curve.csv")).unwrap()).unwrap();
    assert_eq!(curve.first().unwrap().0, 0);
    assert_eq!(curve.last().unwrap().0, 40);

    let second = imdelab(&["train", "--config", &cfg]);
    assert_eq!(first.stdout, second.stdout);
    let reseeded = imdelab(&["train", "--config", &cfg, "--seed", "5"]);
    assert_ne!(first.stdout, reseeded.stdout);

    // the written config reproduces the run
    let again = dir.path().join("again");
    let out = imdelab(&[
        "train",
        "--config",
        dir.path().join("tiny.cfg").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        std::fs::read(again.join("tiny.report.csv")).unwrap(),
        std::fs::read(dir.path().join("tiny.report.csv")).unwrap()
    );
}

#[test]
fn zero_updates_checkpoint_the_initial_net_and_evaluate_matches() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path(), "init", 0);
    assert_eq!(code(&imdelab(&["train", "--config", &cfg])), 0);
    let net = Checkpoint::load(&dir.path().join("init.checkpoint.json")).unwrap().to_net().unwrap();
    let fresh = imdelab::nn::Mlp::new(&[2, 8, 2], imdelab::nn::Activation::Sigmoid, 0).unwrap();
    assert_eq!(net, fresh);

    let out = imdelab(&[
        "evaluate",
        "--config",
        &cfg,
        "--checkpoint",
        dir.path().join("init.checkpoint.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let trained = load_reports(&dir.path().join("init.report.csv")).unwrap();
    let evaluated = load_reports(&dir.path().join("init.eval.csv")).unwrap();
    assert_eq!(trained, evaluated);
}

#[test]
fn problems_list() {
    let out = imdelab(&["problems", "list"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in imdelab::bench::PROBLEM_NAMES {
        assert!(text.lines().any(|l| l == name), "{name}");
    }
    assert!(text.contains("x0: [-0.8, 0.7, 2.6]"));
}

#[test]
fn shipped_configs_resolve() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for scale in ["desk", "full"] {
        for entry in std::fs::read_dir(root.join(scale)).unwrap() {
            let path = entry.unwrap().path();
            let cfg = imdelab::cli::ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(cfg.scale.to_string(), scale);
            assert_eq!(path.file_stem().unwrap().to_str().unwrap(), cfg.run_id);
            seen += 1;
        }
    }
    assert_eq!(seen, 14);
}
