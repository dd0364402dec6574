use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn regcut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regcut")).args(args).env_remove("REGCUT_THREADS").output().unwrap()
}

fn c5() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/c5.txt")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn oracle_on_bundled_pentagon_prints_four() {
    let dir = tempfile::tempdir().unwrap();
    let spins = dir.path().join("x.txt");
    let o = regcut(&["oracle", "--out", s(&spins), s(&c5())]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "4\n");
    let x: Vec<i32> = std::fs::read_to_string(spins).unwrap().lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(x.len(), 5);
    assert_eq!(x[0], 1);
}

#[test]
fn exit_codes() {
    let o = regcut(&["solve", "--frobnicate", s(&c5())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(regcut(&["bench"]).status.code(), Some(1));
    assert_eq!(regcut(&["solve", "--method", "gnn-relax", s(&c5())]).status.code(), Some(1));
    assert_eq!(regcut(&["oracle", "/nonexistent/graph.txt"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "3 1 0\n2 1\n").unwrap();
    assert_eq!(regcut(&["oracle", s(&bad)]).status.code(), Some(2));
    let big = dir.path().join("big.txt");
    assert_eq!(regcut(&["gen", "--n", "30", "--d", "3", "--out", s(&big)]).status.code(), Some(0));
    assert_eq!(regcut(&["oracle", s(&big)]).status.code(), Some(1));
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"method":"eo","n":10,"d":3,"graphCount":0,"output":"x.csv"}"#).unwrap();
    assert_eq!(regcut(&["bench", "--config", s(&cfg)]).status.code(), Some(1));
}

#[test]
fn gen_writes_seeded_graph_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("graphs");
    let o = regcut(&["gen", "--n", "12", "--d", "3", "--count", "3", "--seed", "4", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let files: Vec<PathBuf> = stdout(&o).lines().map(PathBuf::from).collect();
    assert_eq!(files.len(), 3);
    let text = std::fs::read_to_string(&files[1]).unwrap();
    let header: Vec<u64> = text.lines().next().unwrap().split(' ').map(|t| t.parse().unwrap()).collect();
    assert_eq!(header, [12, 3, regcut::experiment::graph_seed(4, 1)]);
    assert_eq!(text.lines().count(), 1 + 18);
}

#[test]
fn solve_is_reproducible_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    regcut(&["gen", "--n", "40", "--d", "3", "--seed", "2", "--out", s(&g)]);
    let trace = dir.path().join("trace.csv");
    let run = || regcut(&["solve", "--method", "eo", "--seed", "9", "--trace", s(&trace), s(&g)]);
    let (a, b) = (run(), run());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let lines: Vec<String> = stdout(&a).lines().map(String::from).collect();
    assert_eq!(lines[0], "method,n,d,seed,cut_value,P");
    assert!(lines[1].starts_with("eo,40,3,9,"));
    let t = std::fs::read_to_string(&trace).unwrap();
    assert!(t.starts_with("step,cut\n0,") && t.lines().nth(2).unwrap().starts_with("40,"));
    assert_eq!(t.lines().count(), 1 + 10_001);

    let sdp = regcut(&["solve", "--method", "sdp", s(&g)]);
    assert_eq!(sdp.status.code(), Some(0));
    assert!(stdout(&sdp).contains("\nsdp,40,3,0,"));
}

#[test]
fn train_then_solve_with_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("train.json");
    std::fs::write(
        &cfg,
        r#"{"method":"gnn-relax","n":12,"d":3,"graphCount":1,"model":{"layers":3,"hops":2,"width":4},"train":{"training_graphs":20}}"#,
    )
    .unwrap();
    let ckpt = dir.path().join("model.bin");
    let o = regcut(&["train", "--config", s(&cfg), "--out", s(&ckpt)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("epoch,objective,mean_P\n0,"));
    assert_eq!(&std::fs::read(&ckpt).unwrap()[..8], b"RGCUTGNN");

    let g = dir.path().join("g.txt");
    regcut(&["gen", "--n", "12", "--d", "3", "--out", s(&g)]);
    let solved = regcut(&["solve", "--method", "gnn-relax", "--checkpoint", s(&ckpt), s(&g)]);
    assert_eq!(solved.status.code(), Some(0));
    assert_eq!(regcut(&["solve", "--method", "gnn-pg", "--checkpoint", s(&ckpt), s(&g)]).status.code(), Some(1));
}

#[test]
fn bench_writes_records_summary_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bench.json");
    std::fs::write(
        &cfg,
        r#"[{"method":"eo","n":20,"d":3,"graphCount":4,"eo":{"t_max":2000}},
            {"method":"sdp","n":20,"d":3,"graphCount":4,"sdp":{"rounding_trials":50}}]"#,
    )
    .unwrap();
    let out = dir.path().join("res.csv");
    let o = regcut(&["bench", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let records = std::fs::read_to_string(&out).unwrap();
    assert_eq!(records.lines().count(), 9);
    assert!(records.lines().nth(1).unwrap().starts_with("sdp,20,3,0,"));
    let summary = std::fs::read_to_string(dir.path().join("res.summary.csv")).unwrap();
    assert_eq!(summary.lines().next().unwrap(), "method,n,d,count,mean_P,std_P,min_P,max_P");
    assert_eq!(summary.lines().count(), 3);
    assert!(dir.path().join("res.timing.csv").exists());
    assert_eq!(stdout(&o), std::fs::read_to_string(dir.path().join("res.table.txt")).unwrap());
}

#[test]
fn bundled_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        for cfg in regcut::config::load_configs(&path).unwrap() {
            cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        }
        seen += 1;
    }
    assert_eq!(seen, 5);
}
