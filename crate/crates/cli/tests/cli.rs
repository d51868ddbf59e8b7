use std::path::Path;
use std::process::{Command, Output};

use nbekcf::io::write_pgm;
use nbekcf::synthetic::{generate, SequenceSpec};

fn nbekcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nbekcf")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Writes a 10-frame sequence and its 1-indexed ground truth; returns the init box string.
fn write_sequence(dir: &Path) -> String {
    let seq = generate(&SequenceSpec { frames: 10, width: 160, height: 120, start: (40.0, 40.0), ..Default::default() })
        .unwrap();
    let frames = dir.join("img");
    std::fs::create_dir(&frames).unwrap();
    for (k, f) in seq.frames.iter().enumerate() {
        write_pgm(frames.join(format!("{:04}.pgm", k + 1)), f).unwrap();
    }
    let gt: String = seq
        .groundtruth
        .iter()
        .map(|b| format!("{},{},{},{}\n", b.x + 1.0, b.y + 1.0, b.w, b.h))
        .collect();
    std::fs::write(dir.join("gt.txt"), gt).unwrap();
    let b = seq.groundtruth[0];
    format!("{},{},{},{}", b.x, b.y, b.w, b.h)
}

#[test]
fn track_writes_results_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let init = write_sequence(dir.path());
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let run = |out: &str, metrics: &str| {
        nbekcf(&["track", "--seq", &p("img"), "--init", &init, "--gt", &p("gt.txt"), "--out", out, "--metrics", metrics])
    };
    let o = run(&p("a.csv"), &p("a.json"));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("mean fps"));

    let csv = std::fs::read_to_string(p("a.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert_eq!(csv.lines().next(), Some("frame,x,y,w,h"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p("a.json")).unwrap()).unwrap();
    assert!(json["auc"].as_f64().unwrap() > 0.5);
    assert_eq!(json["overlap_precision"].as_f64(), Some(1.0));

    // same inputs, byte-identical outputs
    assert!(run(&p("b.csv"), &p("b.json")).status.success());
    assert_eq!(std::fs::read(p("a.csv")).unwrap(), std::fs::read(p("b.csv")).unwrap());
    assert_eq!(std::fs::read(p("a.json")).unwrap(), std::fs::read(p("b.json")).unwrap());
}

#[test]
fn track_argument_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv").to_string_lossy().into_owned();
    let d = dir.path().to_string_lossy().into_owned();
    for args in [
        vec!["track", "--seq", &d, "--init", "1,2,3", "--out", &out],
        vec!["track", "--seq", &d, "--init", "a,b,c,d", "--out", &out],
        vec!["track", "--init", "1,2,3,4", "--out", &out],
        vec!["track", "--seq", &d, "--init", "1,2,3,4", "--out", &out, "--kernel", "rbf"],
        vec!["track", "--seq", &d, "--init", "1,2,3,4", "--out", &out, "--scale-steps", "2"],
    ] {
        let o = nbekcf(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"), "{args:?}");
    }
}

#[test]
fn track_runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv").to_string_lossy().into_owned();
    let missing = dir.path().join("nope").to_string_lossy().into_owned();
    let o = nbekcf(&["track", "--seq", &missing, "--init", "1,2,3,4", "--out", &out]);
    assert_eq!(o.status.code(), Some(1));

    let init = write_sequence(dir.path());
    let img = dir.path().join("img");
    std::fs::write(img.join("0005.pgm"), b"P5\n4 4\n255\nxx").unwrap();
    let o = nbekcf(&["track", "--seq", &img.to_string_lossy(), "--init", &init, "--out", &out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("frame 4"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bench_reports_methods() {
    let o = nbekcf(&["bench", "--m", "4", "--n", "5", "--M", "12", "--N", "12", "--D", "3", "--iters", "3"]);
    assert!(o.status.success());
    let s = stdout(&o);
    for name in ["ccim", "acsii", "brute-ccim", "brute-acsii"] {
        assert!(s.lines().any(|l| l.starts_with(name)), "{name} missing in\n{s}");
    }
    let ccim = s.lines().find(|l| l.starts_with("ccim ")).unwrap();
    assert!(ccim.trim_end().ends_with('x'), "{ccim}");

    let o = nbekcf(&["bench", "--M", "20", "--N", "20", "--m", "4", "--n", "4", "--D", "2", "--method", "brute"]);
    assert_eq!(o.status.code(), Some(2));
    let o = nbekcf(&["bench", "--m", "9", "--M", "8"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn selftest_passes_and_catches_fault() {
    let o = nbekcf(&["selftest", "--cases", "30"]);
    assert!(o.status.success());
    let s = stdout(&o);
    for suite in ["acsii", "ccim", "kernel", "recursion"] {
        assert!(s.contains(&format!("{suite:<10} 30/30 passed")), "{s}");
    }

    let o = nbekcf(&["selftest", "--cases", "30", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert!(s.contains("(m,n,M,N,D,i',j')") && s.contains("max deviation"), "{s}");

    let o = nbekcf(&["selftest", "--cases", "0"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn selftest_is_deterministic() {
    let a = nbekcf(&["selftest", "--cases", "20", "--seed", "9", "--inject-fault"]);
    let b = nbekcf(&["selftest", "--cases", "20", "--seed", "9", "--inject-fault"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn thread_cap_from_environment() {
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_nbekcf"))
            .args(["selftest", "--cases", "5"])
            .env("NBEKCF_THREADS", v)
            .output()
            .unwrap()
    };
    assert!(run("1").status.success());
    assert!(run("0").status.success());
    assert_eq!(run("many").status.code(), Some(2));
}
