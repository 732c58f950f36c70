use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn netdeg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netdeg"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = netdeg(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn code(args: &[&str]) -> i32 {
    netdeg(args).status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn states(path: &Path) -> Vec<f64> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect()
}

fn header(path: &Path, key: &str) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    let prefix = format!("# {key}: ");
    text.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap_or_else(|| panic!("no {key}")).to_string()
}

struct Work {
    dir: tempfile::TempDir,
}

impl Work {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }
    fn p(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

#[test]
fn complete_graph_from_saturated_er() {
    let w = Work::new();
    let g = w.p("k10.txt");
    ok(&["generate", "--model", "er", "--n", "10", "--m", "45", "--seed", "3", "-o", s(&g)]);
    let lines = std::fs::read_to_string(&g).unwrap().lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(lines, 45);
}

#[test]
fn generation_is_seeded() {
    let w = Work::new();
    let (a, b, c) = (w.p("a"), w.p("b"), w.p("c"));
    ok(&["generate", "--model", "ba", "--n", "80", "--attach", "2", "--seed", "5", "-o", s(&a)]);
    ok(&["generate", "--model", "ba", "--n", "80", "--attach", "2", "--seed", "5", "-o", s(&b)]);
    ok(&["generate", "--model", "ba", "--n", "80", "--attach", "2", "--seed", "6", "-o", s(&c)]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn usage_and_io_exit_codes() {
    let w = Work::new();
    let g = w.p("g.txt");
    assert_eq!(code(&["generate", "--model", "regular", "--n", "7", "--k", "3", "-o", s(&g)]), 1);
    assert_eq!(code(&["generate", "--model", "ba", "--n", "10", "-o", s(&g)]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["--help"]), 0);
    let missing = w.p("missing.txt");
    assert_eq!(code(&["simulate", "--graph", s(&missing), "--family", "epidemic", "-o", s(&w.p("x"))]), 2);
    ok(&["generate", "--model", "regular", "--n", "20", "--k", "4", "-o", s(&g)]);
    assert_eq!(code(&["generate", "--model", "regular", "--n", "20", "--k", "4", "-o", s(&g)]), 2);
    ok(&["generate", "--model", "regular", "--n", "20", "--k", "4", "-o", s(&g), "--force"]);
    assert_eq!(code(&["simulate", "--graph", s(&g), "--family", "nope", "-o", s(&w.p("x"))]), 1);
    assert_eq!(code(&["simulate", "--graph", s(&g), "--family", "epidemic", "--param", "Q=1", "-o", s(&w.p("x"))]), 1);
}

#[test]
fn epidemic_on_regular_graph_reaches_closed_form() {
    let w = Work::new();
    let g = w.p("g.txt");
    ok(&["generate", "--model", "regular", "--n", "30", "--k", "4", "--seed", "1", "-o", s(&g)]);
    let x = w.p("x.txt");
    ok(&["simulate", "--graph", s(&g), "--family", "epidemic", "-o", s(&x)]);
    let v = states(&x);
    assert_eq!(v.len(), 30);
    assert!(v.iter().all(|&xi| (xi - 0.75).abs() < 1e-8), "{v:?}");
    let z = w.p("z.txt");
    ok(&["simulate", "--graph", s(&g), "--family", "epidemic", "--x0", "0", "-o", s(&z)]);
    assert!(states(&z).iter().all(|&xi| xi == 0.0));
}

#[test]
fn estimate_pipeline_and_round_prior() {
    let w = Work::new();
    let g = w.p("g.txt");
    let x = w.p("x.txt");
    let sub = w.p("sub.txt");
    ok(&["generate", "--model", "ba", "--n", "300", "--attach", "3", "--seed", "2", "-o", s(&g)]);
    ok(&["simulate", "--graph", s(&g), "--family", "epidemic", "-o", s(&x)]);
    ok(&["sample", "--graph", s(&g), "--fraction", "0.2", "--seed", "4", "-o", s(&sub)]);

    let zt = w.p("zt.csv");
    ok(&["estimate", "--states", s(&x), "--family", "epidemic", "--estimator", "zerotopo", "--graph", s(&g), "-o", s(&zt)]);
    let tp = w.p("tp.csv");
    ok(&[
        "estimate", "--states", s(&x), "--family", "epidemic", "--subgraph", s(&sub), "--graph", s(&g), "-o", s(&tp),
    ]);
    let acc_zt: f64 = header(&zt, "accuracy").parse().unwrap();
    let acc_tp: f64 = header(&tp, "accuracy").parse().unwrap();
    assert!(acc_tp >= acc_zt, "{acc_tp} < {acc_zt}");
    assert_eq!(header(&tp, "estimator"), "topoplus");

    let rd = w.p("round.csv");
    ok(&[
        "estimate", "--states", s(&x), "--family", "epidemic", "--estimator", "round", "--subgraph", s(&sub), "--prior",
        s(&tp), "-o", s(&rd),
    ]);
    let rd2 = w.p("round2.csv");
    ok(&[
        "estimate", "--states", s(&x), "--family", "epidemic", "--estimator", "round", "--subgraph", s(&sub), "-o",
        s(&rd2),
    ]);
    let body = |p: &Path| -> Vec<String> {
        std::fs::read_to_string(p).unwrap().lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
    };
    assert_eq!(body(&rd), body(&rd2));

    // Without a subgraph, topoplus reduces to zerotopo.
    let tp0 = w.p("tp0.csv");
    ok(&["estimate", "--states", s(&x), "--family", "epidemic", "--graph", s(&g), "-o", s(&tp0)]);
    assert_eq!(header(&tp0, "accuracy"), header(&zt, "accuracy"));
    assert_eq!(
        code(&["estimate", "--states", s(&x), "--family", "epidemic", "--prior", s(&tp), "-o", s(&w.p("bad.csv"))]),
        1
    );
}

#[test]
fn noisy_sample_writes_perturbed_states() {
    let w = Work::new();
    let g = w.p("g.txt");
    let x = w.p("x.txt");
    ok(&["generate", "--model", "er", "--n", "50", "--m", "120", "--seed", "2", "-o", s(&g)]);
    ok(&["simulate", "--graph", s(&g), "--family", "regulatory", "-o", s(&x)]);
    let noisy = w.p("noisy.txt");
    ok(&[
        "sample", "--graph", s(&g), "--fraction", "0.1", "--sampler", "random_walk", "--states", s(&x), "--sigma",
        "0.1", "--noisy-output", s(&noisy), "-o", s(&w.p("sub.txt")),
    ]);
    let (a, b) = (states(&x), states(&noisy));
    assert_eq!(a.len(), b.len());
    assert!(a.iter().zip(&b).any(|(p, q)| p != q));
    assert!(b.iter().all(|&v| v >= 0.0));
}

fn write_eval_config(w: &Work) -> PathBuf {
    let cfg = w.p("exp.toml");
    std::fs::write(
        &cfg,
        r#"
fractions = [0.0, 0.2]
estimators = ["zerotopo", "topoplus", "round"]
repetitions = 4
seed = 11
graph = { kind = "ba", n = 150, attach = 3, seed = 1 }
[dynamics]
family = "epidemic"
"#,
    )
    .unwrap();
    cfg
}

#[test]
fn evaluate_output_is_independent_of_thread_count() {
    let w = Work::new();
    let cfg = write_eval_config(&w);
    let a = w.p("a");
    let b = w.p("b");
    let out1 = ok(&["--jobs", "1", "evaluate", "--config", s(&cfg), "-o", s(&a)]);
    let out4 = ok(&["--jobs", "4", "evaluate", "--config", s(&cfg), "-o", s(&b)]);
    assert_eq!(out1.stdout, out4.stdout);
    let csv = |p: &Path| std::fs::read(format!("{}.csv", p.display())).unwrap();
    assert_eq!(csv(&a), csv(&b));
    assert!(Path::new(&format!("{}.json", a.display())).exists());
    assert_eq!(code(&["evaluate", "--config", s(&cfg), "-o", s(&a)]), 2);
}

#[test]
fn linkpred_runs_and_rejects_full_sampling() {
    let w = Work::new();
    let cfg = w.p("lp.toml");
    std::fs::write(
        &cfg,
        "fraction = 0.05\nrepetitions = 3\nmetrics = [\"pa\"]\ngraph = { kind = \"ba\", n = 200, attach = 3, seed = 1 }\n[dynamics]\nfamily = \"epidemic\"\n",
    )
    .unwrap();
    let out = ok(&["linkpred", "--config", s(&cfg), "-o", s(&w.p("lp"))]);
    assert!(!out.stdout.is_empty());
    assert!(w.p("lp.csv").exists() && w.p("lp.json").exists());
    let c = code(&["linkpred", "--config", s(&cfg), "--fraction", "1", "-o", s(&w.p("lp1"))]);
    assert_eq!(c, 1);
}

#[test]
fn shipped_configs_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let w = Work::new();
    for name in ["sampling", "misspecification"] {
        let cfg = root.join(format!("{name}.toml"));
        ok(&["evaluate", "--config", s(&cfg), "--reps", "2", "-o", s(&w.p(name))]);
    }
    ok(&["linkpred", "--config", s(&root.join("linkpred.toml")), "--reps", "2", "-o", s(&w.p("lp"))]);
}
