use std::process::{Command, Output};

fn kronecker(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kronecker"))
        .args(args)
        .env_remove("KRONECKER_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn symbolic_polynomial() {
    let o = kronecker(&["chi", "2", "3", "--symbolic"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1/2*m^4 - 4/3*m^3 + m^2 - 1/6*m\n");
    assert_eq!(stdout(&kronecker(&["chi", "2", "3"])), stdout(&o));
}

#[test]
fn evaluated_values() {
    for (a, b, m, v) in [("2", "3", "3", "13"), ("3", "4", "3", "68"), ("4", "5", "3", "399"), ("2", "5", "4", "58")] {
        let o = kronecker(&["chi", a, b, "--at", m]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(stdout(&o), format!("{v}\n"), "({a},{b}) at m = {m}");
    }
}

#[test]
fn closed_form_text() {
    let o = kronecker(&["closed-form", "2", "1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("count: 6\n"), "{out}");
    assert!(out.contains("chi: 6*m^4\n"), "{out}");
    assert!(out.contains("census: OK\n"), "{out}");
}

#[test]
fn chi_pair_monomial() {
    let o = kronecker(&["chi-pair", "1*2", "1*3"]);
    assert_eq!(stdout(&o), "6*m^4\n");
    let o = kronecker(&["chi-pair", "2*1", "3*1"]);
    assert_eq!(stdout(&o), "6*m\n");
}

#[test]
fn json_document_parses() {
    let o = kronecker(&["--format", "json", "chi", "2", "3", "--at", "3"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["value"], "13");
    assert_eq!(doc["summands"].as_array().unwrap().len(), 6);
    assert!(doc.get("elapsed_ms").is_none());
}

#[test]
fn argument_errors_exit_with_two() {
    for args in [
        &["chi", "2"][..],
        &["chi", "2", "4"],
        &["chi", "0", "3"],
        &["--format", "xml", "chi", "2", "3"],
        &["--budget", "0", "chi", "2", "3"],
        &["chi-pair", "1*2", "1*x"],
        &["split-demo", "/nonexistent/tree.json"],
    ] {
        let o = kronecker(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn budget_refusal_exits_with_three() {
    let o = kronecker(&["--budget", "10", "chi", "2", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("12"), "{}", stderr(&o));
    let o = kronecker(&["--budget", "12", "chi", "2", "3"]);
    assert!(o.status.success());
}

#[test]
fn quick_verification_passes() {
    let start = std::time::Instant::now();
    let o = kronecker(&["verify", "--quick"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains(" 0 failed"));
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn output_does_not_depend_on_workers() {
    for args in [
        &["--format", "json", "chi", "4", "5"][..],
        &["--format", "csv", "bounds", "--m", "3", "--amax", "3"],
        &["enumerate", "2", "3", "--stable-only"],
    ] {
        let runs: Vec<Vec<u8>> = ["1", "2", "4"]
            .iter()
            .map(|w| {
                let mut full = vec!["--workers", w];
                full.extend_from_slice(args);
                let o = kronecker(&full);
                assert!(o.status.success(), "{args:?}");
                o.stdout
            })
            .collect();
        assert!(runs.windows(2).all(|w| w[0] == w[1]), "{args:?}");
    }
}

#[test]
fn enumerate_lists_every_tree() {
    let o = kronecker(&["--format", "csv", "enumerate", "2", "3", "--pair", "1*2", "1*3"]);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("pair,edges,stable,weight"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 12);
    assert_eq!(rows.iter().filter(|r| r.contains(",true,")).count(), 6);
}

#[test]
fn bounds_csv_header() {
    let o = kronecker(&["--format", "csv", "bounds", "--m", "3", "--amax", "2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("a,b,m,chi,upper_bound,ratio,k,f,g,h,i_triv,schur_root,dimension"));
    assert!(out.lines().skip(1).any(|l| l.starts_with("2,3,3,13,")), "{out}");
}

#[test]
fn split_demo_reaches_the_path() {
    let tree = serde_json::json!({
        "support": {
            "sources": [
                {"label": "i_1_1", "level": 1},
                {"label": "i_1_2", "level": 1},
                {"label": "i_2_1", "level": 2}
            ],
            "sinks": (1..=5).map(|n| serde_json::json!({"label": format!("j_1_{n}"), "level": 1})).collect::<Vec<_>>()
        },
        "edges": [
            ["i_1_1", "j_1_1"], ["i_1_1", "j_1_2"],
            ["i_1_2", "j_1_2"], ["i_1_2", "j_1_3"],
            ["i_2_1", "j_1_3"], ["i_2_1", "j_1_4"], ["i_2_1", "j_1_5"]
        ]
    });
    let path = std::env::temp_dir().join(format!("kronecker-split-{}.json", std::process::id()));
    std::fs::write(&path, tree.to_string()).unwrap();
    let o = kronecker(&["--format", "json", "split-demo", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let trace = doc["trace"].as_array().unwrap();
    assert_eq!(trace.len(), 1);
    let targets = doc["targets"].as_array().unwrap();
    assert!(!targets.is_empty());
    for t in targets {
        assert_eq!(t["tree"]["support"]["sources"].as_array().unwrap().len(), 4);
    }
}
