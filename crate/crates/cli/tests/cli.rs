use std::path::Path;
use std::process::{Command, Output};

fn scma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scma"))
        .args(args)
        .env_remove("SCMA_WORKERS")
        .output()
        .expect("scma runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn te_reports_exact_efficiency() {
    let dir = tempfile::tempdir().unwrap();
    let hcpi = write(dir.path(), "h.json", r#"{"scheme":"hcpi","snr_db":[0]}"#);
    let o = scma(&["te", "--config", &hcpi]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("te: 27/8 = 3.375 bits/chip"), "{text}");
    assert!(text.contains("m: 9"), "{text}");

    let cscma = write(dir.path(), "c.json", r#"{"scheme":"cscma","snr_db":[0]}"#);
    let o = scma(&["te", "--config", &cscma]);
    assert!(stdout(&o).contains("te: 3 = 3 bits/chip"), "{}", stdout(&o));

    let cpi = write(
        dir.path(),
        "p.json",
        r#"{"scheme":"cpi","snr_db":[0],"hcpi":{"n":4,"t":[2]}}"#,
    );
    let o = scma(&["te", "--config", &cpi]);
    assert!(
        stdout(&o).contains("te: 9/4 = 2.25 bits/chip"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn generated_codebook_validates() {
    let dir = tempfile::tempdir().unwrap();
    let cb = dir.path().join("cb.json");
    let cb = cb.to_str().unwrap();
    let o = scma(&[
        "gen-codebook",
        "--graph",
        "4,6,3,2",
        "--C",
        "4",
        "--R",
        "2",
        "--out",
        cb,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = scma(&["validate", "--codebook", cb]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("ok: K=4 J=6 C=4 R=2"));
}

#[test]
fn validate_names_the_broken_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let cb = dir.path().join("cb.json");
    let cb_str = cb.to_str().unwrap();
    assert!(scma(&[
        "gen-codebook",
        "--graph",
        "4,6,3,2",
        "--C",
        "4",
        "--R",
        "1",
        "--out",
        cb_str
    ])
    .status
    .success());
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cb).unwrap()).unwrap();
    // Scale the first codeword of user 0 so its energy is no longer one.
    let word = &mut doc["families"][0]["codewords"][0][0];
    for chip in word.as_array_mut().unwrap() {
        let re = chip[0].as_f64().unwrap();
        chip[0] = serde_json::json!(re * 2.0);
    }
    let bad = write(dir.path(), "bad.json", &doc.to_string());
    let o = scma(&["validate", "--codebook", &bad]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("power violation"), "{}", stderr(&o));
}

#[test]
fn validate_rejects_unknown_graph_degrees() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cb.json");
    let o = scma(&[
        "gen-codebook",
        "--graph",
        "4,6,3,3",
        "--C",
        "4",
        "--R",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("infeasible degrees"), "{}", stderr(&o));
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"scheme":"hcpi","snr_db":[6,12],"max_trials":40,"target_bit_errors":20,"seed":5}"#,
    );
    let out = dir.path().join("r.csv");
    let o = scma(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--workers",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let res = scma_core::sim::parse_csv(&text).unwrap();
    assert_eq!(res.points.len(), 2);
    assert_eq!(res.seed, 5);
    assert_eq!(res.t, vec![2, 1]);

    let again = dir.path().join("r1.csv");
    let o = scma(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        again.to_str().unwrap(),
        "--workers",
        "1",
    ]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&again).unwrap(), text);
}

#[test]
fn bound_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.json",
        r#"{"scheme":"hcpi","snr_db":[10,20],"seed":3}"#,
    );
    let out = dir.path().join("b.csv");
    let o = scma(&[
        "bound",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--samples",
        "20",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "snr_db,n0,bound,stderr,mode");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].ends_with(",sampled"));
}
