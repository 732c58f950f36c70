use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use netdeg::dynamics::{DynamicsModel, Family};
use netdeg::estimators::{round_refine, EstimateResult, Estimator, EstimatorConfig, StateCoverage, Termination};
use netdeg::eval::{accuracy, ground_truth, scored_estimates, DEFAULT_THRESHOLD};
use netdeg::graph::{gen_barabasi_albert, gen_erdos_renyi, gen_regular, read_edge_list, LoadedGraph};
use netdeg::linkpred::linkpred_experiment;
use netdeg::rng::{derive_seed, stream};
use netdeg::sampling::{add_state_noise, sample_random_walk, Sampler};
use netdeg::solver::{simulate_full, SolverOptions, StateVector};
use netdeg::subgraph::{sidecar_path, SampledSubgraph};

use crate::config::{load_experiment, LinkpredRunConfig};
use crate::error::CliError;
use crate::{
    DynamicsArgs, EstimateArgs, EvaluateArgs, GenerateArgs, GraphModel, LinkpredArgs, SampleArgs, SimulateArgs,
};

fn check_writable(paths: &[&Path], force: bool) -> Result<(), CliError> {
    for p in paths {
        if p.exists() && !force {
            return Err(CliError::io(format!("{} exists; pass --force to overwrite", p.display())));
        }
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    s.into()
}

fn model_from_args(a: &DynamicsArgs) -> Result<DynamicsModel, CliError> {
    let family: Family = a.family.parse()?;
    let mut model = DynamicsModel::default_for(family);
    for p in &a.params {
        let (name, value) = p
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("--param expects NAME=VALUE, got {p:?}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("--param {name}: not a number: {value:?}")))?;
        model = model.with_param(name.trim(), value)?;
    }
    Ok(model)
}

pub fn generate(a: &GenerateArgs) -> Result<(), CliError> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| CliError::usage(format!("--model needs --{flag}")));
    let graph = match a.model {
        GraphModel::Ba => gen_barabasi_albert(a.n, need(a.attach, "attach")?, a.seed)?,
        GraphModel::Er => gen_erdos_renyi(a.n, need(a.m, "m")?, a.seed)?,
        GraphModel::Regular => gen_regular(a.n, need(a.k, "k")?, a.seed)?,
    };
    check_writable(&[&a.out.output], a.out.force)?;
    let isolated = graph.degrees().iter().filter(|&&d| d == 0).count();
    if isolated > 0 {
        log::warn!("{isolated} isolated vertices are not representable in an edge list and are dropped");
    }
    graph.write_edge_list(&a.out.output)?;
    log::info!("wrote {} vertices, {} edges to {}", graph.n() - isolated, graph.m(), a.out.output.display());
    Ok(())
}

fn load_graph(path: &Path) -> Result<LoadedGraph, CliError> {
    let loaded = read_edge_list(path)?;
    if loaded.self_loops_dropped + loaded.duplicates_dropped > 0 {
        log::warn!(
            "{}: dropped {} self-loops and {} duplicate edges",
            path.display(),
            loaded.self_loops_dropped,
            loaded.duplicates_dropped
        );
    }
    Ok(loaded)
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let model = model_from_args(&a.dynamics)?;
    let loaded = load_graph(&a.graph)?;
    check_writable(&[&a.out.output], a.out.force)?;
    let x0 = a.x0.unwrap_or_else(|| model.default_initial_state());
    let states = simulate_full(&loaded.graph, &model, &StateVector::constant(loaded.graph.n(), x0), &SolverOptions::default())?;
    states.write(&a.out.output, Some(&loaded.original_ids))?;
    log::info!("steady state: mean {:.6}, written to {}", states.mean(), a.out.output.display());
    Ok(())
}

pub fn sample(a: &SampleArgs) -> Result<(), CliError> {
    let sampler: Sampler = a.sampler.parse().map_err(CliError::usage)?;
    if !(0.0..=1.0).contains(&a.fraction) {
        return Err(CliError::usage(format!("--fraction {} outside [0, 1]", a.fraction)));
    }
    if !(a.sigma.is_finite() && a.sigma >= 0.0) {
        return Err(CliError::usage(format!("--sigma {} must be >= 0", a.sigma)));
    }
    let loaded = load_graph(&a.graph)?;
    let side = sidecar_path(&a.out.output);
    let mut outputs: Vec<&Path> = vec![&a.out.output, &side];
    if let Some(p) = &a.noisy_output {
        outputs.push(p);
    }
    check_writable(&outputs, a.out.force)?;
    let seed = derive_seed(a.seed, &[stream::SAMPLE]);
    let sub = match sampler {
        Sampler::RandomWalk => {
            let w = sample_random_walk(&loaded.graph, a.fraction, seed);
            if w.shortfall > 0 {
                log::warn!("random walk fell {} edges short of the requested fraction", w.shortfall);
            }
            w.subgraph
        }
        s => s.sample(&loaded.graph, a.fraction, seed),
    };
    sub.write(&a.out.output, Some(&loaded.original_ids))?;
    log::info!(
        "{} sample: {} edges, {} observed vertices, written to {}",
        sampler,
        sub.m(),
        sub.observed_count(),
        a.out.output.display()
    );
    if let (Some(input), Some(output)) = (&a.states, &a.noisy_output) {
        let (ids, states) = StateVector::read(input)?;
        let noisy = add_state_noise(&states, a.sigma, derive_seed(a.seed, &[stream::NOISE]));
        noisy.write(output, Some(&ids))?;
    }
    Ok(())
}

/// Per-vertex estimate table with a `# key: value` summary header.
fn estimate_to_text(r: &EstimateResult, sub: &SampledSubgraph, labels: &[u64], est: Estimator, extra: &[(&str, String)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# estimator: {}", est.name());
    let _ = writeln!(out, "# beta: {}", r.beta);
    let _ = writeln!(out, "# x_eff: {}", r.x_eff);
    let _ = writeln!(out, "# iterations: {}", r.iterations);
    let _ = writeln!(out, "# converged: {}", r.converged);
    let _ = writeln!(out, "# termination: {}", serde_json::to_string(&r.termination).unwrap_or_default().trim_matches('"'));
    let _ = writeln!(out, "# inestimable: {}", r.inestimable.len());
    let _ = writeln!(out, "# clamped_negative: {}", r.clamped_negative);
    for (k, v) in extra {
        let _ = writeln!(out, "# {k}: {v}");
    }
    out.push_str("vertex,sampled_degree,d_raw,d,delta_hat_raw,delta_hat,estimated,inestimable\n");
    for v in 0..labels.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            labels[v],
            sub.sampled_degree(v),
            r.d_raw[v],
            r.d[v],
            r.delta_hat_raw[v],
            r.delta_hat[v],
            u8::from(r.estimated[v]),
            u8::from(r.is_inestimable(v))
        );
    }
    out
}

/// Reads back an estimate table written by `estimate`.
fn parse_estimate(path: &Path, ids: &HashMap<u64, usize>, n: usize) -> Result<EstimateResult, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let bad = |line: usize, why: &str| CliError::io(format!("{}:{line}: {why}", path.display()));
    let mut x_eff = None;
    let mut r = EstimateResult {
        delta_hat_raw: vec![0.0; n],
        delta_hat: vec![0; n],
        d_raw: vec![0.0; n],
        d: vec![0; n],
        x_eff: 0.0,
        beta: 0.0,
        iterations: 0,
        converged: true,
        termination: Termination::Converged,
        inestimable: Vec::new(),
        estimated: vec![false; n],
        clamped_negative: 0,
        sweeps: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(h) = line.strip_prefix('#') {
            if let Some((k, v)) = h.split_once(':') {
                match k.trim() {
                    "x_eff" => x_eff = v.trim().parse::<f64>().ok(),
                    "beta" => r.beta = v.trim().parse().unwrap_or(0.0),
                    _ => {}
                }
            }
            continue;
        }
        if line.is_empty() || line.starts_with("vertex") {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(bad(i + 1, "expected 8 columns"));
        }
        let id: u64 = f[0].parse().map_err(|_| bad(i + 1, "bad vertex id"))?;
        let v = *ids.get(&id).ok_or_else(|| bad(i + 1, "vertex not in the states file"))?;
        r.d_raw[v] = f[2].parse().map_err(|_| bad(i + 1, "bad d_raw"))?;
        r.d[v] = f[3].parse().map_err(|_| bad(i + 1, "bad d"))?;
        r.delta_hat_raw[v] = f[4].parse().map_err(|_| bad(i + 1, "bad delta_hat_raw"))?;
        r.delta_hat[v] = f[5].parse().map_err(|_| bad(i + 1, "bad delta_hat"))?;
        r.estimated[v] = f[6] == "1";
        if f[7] == "1" {
            r.inestimable.push(v);
        }
    }
    r.inestimable.sort_unstable();
    r.x_eff = x_eff.ok_or_else(|| bad(0, "missing `# x_eff:` header"))?;
    Ok(r)
}

pub fn estimate(a: &EstimateArgs, jobs: Option<usize>) -> Result<(), CliError> {
    let estimator: Estimator = a.estimator.parse().map_err(CliError::usage)?;
    let model = model_from_args(&a.dynamics)?;
    if a.prior.is_some() && estimator != Estimator::Round {
        return Err(CliError::usage("--prior only applies to --estimator round"));
    }
    let (mut labels, mut states) = StateVector::read(&a.states)?;
    let graph = match &a.graph {
        Some(p) => {
            let loaded = load_graph(p)?;
            let pos: HashMap<u64, usize> = labels.iter().enumerate().map(|(i, &id)| (id, i)).collect();
            if pos.len() != loaded.graph.n() || loaded.original_ids.iter().any(|id| !pos.contains_key(id)) {
                return Err(CliError::usage("states and --graph do not cover the same vertex ids"));
            }
            states = StateVector(loaded.original_ids.iter().map(|id| states[pos[id]]).collect());
            labels = loaded.original_ids.clone();
            Some(loaded.graph)
        }
        None => None,
    };
    let ids: HashMap<u64, usize> = labels.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    if ids.len() != labels.len() {
        return Err(CliError::io(format!("{}: repeated vertex ids", a.states.display())));
    }
    let n = labels.len();
    let sub = match &a.subgraph {
        Some(p) => SampledSubgraph::read(n, p, |id| ids.get(&id).copied())?,
        None => {
            if estimator != Estimator::ZeroTopo {
                log::info!("no --subgraph given; {} runs on the empty subgraph", estimator.name());
            }
            SampledSubgraph::empty(n)
        }
    };
    let mut cfg = EstimatorConfig::default();
    if a.observed_only {
        cfg.coverage = StateCoverage::ObservedOnly;
    }
    check_writable(&[&a.out.output], a.out.force)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
    let result = pool.install(|| -> Result<EstimateResult, CliError> {
        match (estimator, &a.prior) {
            (Estimator::Round, Some(p)) => {
                let prior = parse_estimate(p, &ids, n)?;
                Ok(round_refine(&states, &sub, &prior, &model, &cfg)?)
            }
            (Estimator::Round, None) => {
                log::info!("no --prior given; running topoplus before round");
                Ok(estimator.run(&states, Some(&sub), &model, &cfg)?)
            }
            _ => Ok(estimator.run(&states, Some(&sub), &model, &cfg)?),
        }
    })?;
    if !result.converged {
        log::warn!("estimator stopped without converging ({:?})", result.termination);
    }
    let mut extra = Vec::new();
    if let Some(g) = &graph {
        let acc = accuracy(&g.degrees().0, &scored_estimates(&result), DEFAULT_THRESHOLD)
            .map_err(|e| CliError::numerical(e.to_string()))?;
        log::info!("accuracy@5%: {acc:.4}");
        extra.push(("accuracy", acc.to_string()));
    }
    write_text(&a.out.output, &estimate_to_text(&result, &sub, &labels, estimator, &extra))?;
    log::info!(
        "beta {:.6}, x_eff {:.6}, {} iterations, written to {}",
        result.beta,
        result.x_eff,
        result.iterations,
        a.out.output.display()
    );
    Ok(())
}

pub fn evaluate(a: &EvaluateArgs, jobs: Option<usize>) -> Result<(), CliError> {
    let mut config = load_experiment(&a.config)?;
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(r) = a.reps {
        config.repetitions = r;
    }
    config.per_vertex |= a.per_vertex;
    config.validate()?;
    let csv = with_suffix(&a.out.output, ".csv");
    let json = with_suffix(&a.out.output, ".json");
    let pv = with_suffix(&a.out.output, ".vertices.csv");
    let mut outputs = vec![csv.as_path(), json.as_path()];
    if config.per_vertex {
        outputs.push(&pv);
    }
    check_writable(&outputs, a.out.force)?;
    let report = netdeg::eval::run_experiment(&config, jobs)?;
    for p in report.write(&a.out.output)? {
        log::info!("wrote {}", p.display());
    }
    print!("{}", report.to_csv());
    Ok(())
}

pub fn linkpred(a: &LinkpredArgs, jobs: Option<usize>) -> Result<(), CliError> {
    let mut config = LinkpredRunConfig::load(&a.config)?;
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(r) = a.reps {
        config.repetitions = r;
    }
    if let Some(f) = a.fraction {
        config.fraction = f;
    }
    config.dynamics.validate()?;
    let csv = with_suffix(&a.out.output, ".csv");
    let json = with_suffix(&a.out.output, ".json");
    check_writable(&[&csv, &json], a.out.force)?;
    let (graph, labels) = config.graph.load()?;
    let states = match &config.states {
        Some(p) => {
            let (ids, x) = StateVector::read(p)?;
            let pos: HashMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
            let order: Vec<u64> = labels.clone().unwrap_or_else(|| (0..graph.n() as u64).collect());
            let reordered: Option<Vec<f64>> = order.iter().map(|id| pos.get(id).map(|&i| x[i])).collect();
            StateVector(reordered.ok_or_else(|| CliError::usage("states file does not cover every graph vertex"))?)
        }
        None => {
            ground_truth(graph.clone(), labels, &config.dynamics, &config.options, config.cache_dir.as_deref())?.states
        }
    };
    let report = linkpred_experiment(&graph, &states, &config.dynamics, &config.linkpred_config(), jobs)?;
    write_text(&csv, &report.to_csv())?;
    let doc = serde_json::json!({ "config": config, "report": report });
    write_text(&json, &serde_json::to_string_pretty(&doc).expect("report serializes"))?;
    print!("{}", report.to_csv());
    Ok(())
}
