use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fastgate::{GateSolution, PhaseTarget, PulseSequence, TrapSetup};

fn fastgate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fastgate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write_solution(dir: &Path) -> PathBuf {
    let times: Vec<f64> = (0..6).map(|i| i as f64 * 2e-7).collect();
    let seq = PulseSequence::new(times, vec![1, -1, -1, 1, 1, -1]).unwrap();
    let trap = TrapSetup::builtin_pair("ca43-sr88").unwrap();
    let sol = GateSolution::evaluate(&trap, seq, vec![1.0, 1.0], PhaseTarget::Plus).unwrap();
    let path = dir.join("sol.json");
    std::fs::write(&path, sol.to_json().unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&fastgate(&["solve", "--bogus"])), 64);
    assert_eq!(
        code(&fastgate(&[
            "solve",
            "--pair",
            "xx1-yy2",
            "--gate-time",
            "1e-6"
        ])),
        64
    );
    let dir = tempfile::tempdir().unwrap();
    let sol = write_solution(dir.path());
    let out = dir.path().join("a.csv");
    assert_eq!(
        code(&fastgate(&[
            "sweep",
            "--solution",
            s(&sol),
            "--kind",
            "jitter",
            "--grid",
            "",
            "--out",
            s(&out)
        ])),
        64
    );
    assert_eq!(
        code(&fastgate(&[
            "sweep",
            "--solution",
            s(&sol),
            "--preset",
            "fig9",
            "--out",
            s(&out)
        ])),
        64
    );
    assert!(code(&fastgate(&["--help"])) == 0);
}

#[test]
fn corrupt_input_exits_65() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&fastgate(&["evaluate", "--solution", s(&bad)])), 65);
    let missing = dir.path().join("missing.json");
    assert_eq!(
        code(&fastgate(&["evaluate", "--solution", s(&missing)])),
        65
    );
}

#[test]
fn sweep_is_byte_reproducible_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let sol = write_solution(dir.path());
    let out = dir.path().join("jitter.csv");
    let args = |threads: &str| {
        vec![
            "--threads",
            threads,
            "sweep",
            "--solution",
            s(&sol),
            "--kind",
            "jitter",
            "--grid",
            "1e-11:1e-9:log3",
            "--samples",
            "300",
            "--seed",
            "7",
            "--out",
            s(&out),
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>()
    };
    let run = |threads: &str| {
        let a = args(threads);
        let o = fastgate(&a.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(&out).unwrap()
    };
    let first = run("1");
    assert_eq!(first, run("1"));
    assert_eq!(first, run("2"));
    let text = String::from_utf8(first).unwrap();
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("# schema=fastgate.sweep/1 kind=timing_jitter"));
    assert_eq!(
        lines.next().unwrap(),
        "magnitude,mean_error,std_error,phase_term,motional_term,standard_error"
    );
    assert_eq!(lines.count(), 3);

    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("jitter.csv.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["schema"], "fastgate.manifest/1");
    assert_eq!(manifest["seeds"][0], 7);
    let hash = fastgate::cli::sha256_hex(&std::fs::read(&sol).unwrap());
    assert_eq!(manifest["input_hashes"][s(&sol)], hash.as_str());
}

#[test]
fn drift_presets_write_rows() {
    let dir = tempfile::tempdir().unwrap();
    let sol = write_solution(dir.path());
    for (preset, rows) in [("fig1g", 25), ("figS3", 25), ("figS4", 41)] {
        let out = dir.path().join(format!("{preset}.csv"));
        let o = fastgate(&[
            "sweep",
            "--solution",
            s(&sol),
            "--preset",
            preset,
            "--out",
            s(&out),
        ]);
        assert_eq!(
            code(&o),
            0,
            "{preset}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert_eq!(
            std::fs::read_to_string(&out).unwrap().lines().count(),
            rows + 2
        );
    }
}

#[test]
fn evaluate_round_trips_a_stored_solution() {
    let dir = tempfile::tempdir().unwrap();
    let sol = write_solution(dir.path());
    let report = dir.path().join("report.json");
    let o = fastgate(&["evaluate", "--solution", s(&sol), "--out", s(&report)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("oracle:"), "{stdout}");
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["schema"], "fastgate.evaluation/1");
}

#[test]
fn hand_built_kick_pair() {
    let o = fastgate(&[
        "evaluate",
        "--pair",
        "ca43-sr88",
        "--times",
        "0,0",
        "--directions",
        "1,-1",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // Cancelling kicks: no motion, no phase, so ε = (2/3)(π/4)².
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .contains("eps = 4.112335"));
}

#[test]
fn solve_writes_a_loadable_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = fastgate(&[
        "solve",
        "--pair",
        "ca43-sr88",
        "--gate-time",
        "1.8e-6",
        "--groups",
        "16",
        "--nmax",
        "6",
        "--ensemble",
        "300",
        "--out",
        s(&out),
    ]);
    let c = code(&o);
    assert!(c == 0 || c == 2, "{}", String::from_utf8_lossy(&o.stderr));
    let sol = GateSolution::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(sol.gate_time <= 1.8e-6 * (1.0 + 1e-12));
    assert!(sol.manifest.is_some());
    assert_eq!(c == 0, sol.status.is_success());
}
