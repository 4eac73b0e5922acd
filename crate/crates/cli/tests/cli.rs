use std::fs;
use std::process::{Command, Output};

fn itree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_itree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn threshold_report() {
    let o = itree(&["threshold", "--n", "10000", "--p", "0.05", "--kv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("k0 ")));
    let k0: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("k0="))
        .unwrap()
        .parse()
        .unwrap();
    let k_unit: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("k_unit="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(k_unit == k0 || k_unit == k0 + 1);
}

#[test]
fn sample_solve_count_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    let p = path.to_str().unwrap();
    assert!(
        itree(&["sample", "--n", "18", "--p", "0.3", "--seed", "42", "--out", p])
            .status
            .success()
    );
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("18 "));
    // stdout and file agree
    assert_eq!(
        stdout(&itree(&[
            "sample", "--n", "18", "--p", "0.3", "--seed", "42"
        ])),
        text
    );

    let solved = stdout(&itree(&["solve", "--in", p]));
    let size: usize = solved
        .lines()
        .find_map(|l| l.strip_prefix("size"))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    let count = |extra: &[&str], k: usize| -> u64 {
        let k = k.to_string();
        let mut args = vec!["count", "--in", p, "--k", &k];
        args.extend_from_slice(extra);
        stdout(&itree(&args)).trim().parse().unwrap()
    };
    assert!(count(&[], size) >= 1);
    assert!(count(&["--maximal"], size) >= 1);
    if size < 18 {
        assert_eq!(count(&[], size + 1), 0);
    }
    assert!(count(&["--fortified"], 3) <= count(&[], 3));
}

#[test]
fn budget_exceeded_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    let p = path.to_str().unwrap();
    assert!(
        itree(&["sample", "--n", "45", "--p", "0.3", "--seed", "1", "--out", p])
            .status
            .success()
    );
    assert_eq!(
        itree(&["solve", "--in", p, "--budget", "10"]).status.code(),
        Some(3)
    );
}

#[test]
fn pairs_anchor() {
    let text = stdout(&itree(&[
        "pairs", "--n", "8", "--k", "3", "--l", "2", "--m", "1", "--p", "0.3",
    ]));
    assert!(text
        .lines()
        .any(|l| l.split_whitespace().collect::<Vec<_>>() == ["tree_pairs", "4"]));
}

#[test]
fn verify_exit_codes() {
    let ok = itree(&["verify", "--kmax", "2", "--lmax", "4"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).lines().all(|l| l.starts_with("PASS")));
    let bad = itree(&["verify", "--kmax", "3", "--lmax", "4", "--inject-fault"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stdout(&bad).contains("FAIL"));
}

#[test]
fn usage_errors() {
    assert_eq!(itree(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(itree(&["threshold", "--n", "10"]).status.code(), Some(1));
    assert_eq!(
        itree(&["threshold", "--n", "10", "--p", "1.5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(itree(&["verify", "--kmax", "9"]).status.code(), Some(1));
    assert_eq!(
        itree(&["solve", "--in", "/nonexistent/graph.txt"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(itree(&["--help"]).status.code(), Some(0));
}

#[test]
fn experiment_csv_is_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# concentration demo\nn = 30\np = 0.4\nmode = concentration\ntrials = 25\nseed = 7\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let one = itree(&["experiment", "--config", c, "--workers", "1"]);
    let four = itree(&["experiment", "--config", c, "--workers", "4"]);
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let csv = stdout(&one);
    assert_eq!(
        csv.lines().next().unwrap(),
        "trial_index,seed,n,p,t_value,k0,in_window,solver_nodes,elapsed_ms"
    );
    assert_eq!(csv.lines().count(), 26);
    assert!(!csv.contains('\r'));
    // flags override the file
    let more = itree(&["experiment", "--config", c, "--trials", "3"]);
    assert_eq!(stdout(&more).lines().count(), 4);
}

#[test]
fn experiment_censored_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "n = 40\np = 0.3\nmode = concentration\ntrials = 2\nnode_budget = 5\n",
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let o = itree(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.matches(",censored,").count(), 2);
}

#[test]
fn experiment_other_modes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.cfg");
    fs::write(
        &cfg,
        "n = 6\np = 0.5\nmode = moments\ntrials = 500\nk_list = 1,2,3\n",
    )
    .unwrap();
    let o = itree(&["experiment", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert!(csv.starts_with("k,mean_x,se_x,expected_x"));
    assert_eq!(csv.lines().count(), 4);

    let o = itree(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--mode",
        "drift-report",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("drift_bound"));

    fs::write(&cfg, "n = 20\np = 0.5\nmode = moments\n").unwrap();
    assert_eq!(
        itree(&["experiment", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}
