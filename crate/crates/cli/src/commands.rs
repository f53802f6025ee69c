use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rayon::prelude::*;
use serde::Serialize;

use resgraph::datasets::{gen_grid, gen_knn, random_connected_graph, random_tree, read_ego_edges};
use resgraph::{
    evaluate, ppr_matrix, reconstruct_from_ppr, reconstruct_full, reconstruct_tree, sample_pairs,
    solve_block_cd, solve_convex, solve_gd, Evaluation, FeasibilityReport, Graph, LearnResult,
    MeasurementSet, NoiseScale, NoiseSpec, StopReason,
};

use crate::failure::Failure;
use crate::matrix_file;
use crate::settings::{
    parse_list, scale_name, ConfigFile, NoiseFlags, Settings, Solver, SolverFlags,
};

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

pub fn build_graph(spec: &[String], seed: u64) -> Result<Graph, Failure> {
    let bad = || {
        Failure::usage(format!(
            "unknown graph spec {:?}; expected grid R C, knn N K, tree N, random N P, or ego PATH",
            spec.join(" ")
        ))
    };
    let int = |s: &String| s.parse::<usize>().map_err(|_| bad());
    let graph = match spec {
        [kind, r, c] if kind == "grid" => gen_grid(int(r)?, int(c)?)?,
        [kind, n, k] if kind == "knn" => gen_knn(int(n)?, int(k)?, seed)?,
        [kind, n] if kind == "tree" => {
            let n = int(n)?;
            if n < 2 {
                return Err(Failure::usage("tree needs at least 2 nodes"));
            }
            random_tree(n, seed)
        }
        [kind, n, p] if kind == "random" => {
            let n = int(n)?;
            let p: f64 = p.parse().map_err(|_| bad())?;
            if n < 2 || !(0.0..=1.0).contains(&p) {
                return Err(Failure::usage("random needs n >= 2 and p in [0, 1]"));
            }
            random_connected_graph(n, p, seed)
        }
        [kind, path] if kind == "ego" => {
            let ego = read_ego_edges(Path::new(path))?;
            info!(
                "ego network: {} nodes, {} edges, {} self-loops skipped",
                ego.graph.n(),
                ego.graph.edge_count(),
                ego.skipped_self_loops
            );
            ego.graph
        }
        _ => return Err(bad()),
    };
    Ok(graph)
}

pub fn generate(spec: &[String], seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    let g = build_graph(spec, seed)?;
    emit(out, &g.to_edge_list())
}

fn noise_level(noise: &NoiseFlags) -> Result<f64, Failure> {
    match noise.sigma2.as_deref() {
        None => Ok(0.0),
        Some(text) => text
            .trim()
            .parse()
            .map_err(|e| Failure::usage(format!("--sigma2 {text:?}: {e}"))),
    }
}

fn noise_spec(sigma2: f64, scale: NoiseScale, seed: u64) -> Result<NoiseSpec, Failure> {
    Ok(NoiseSpec::new(sigma2, seed)?.with_scale(scale))
}

pub fn measure(
    graph: &Path,
    f: f64,
    noise: &NoiseFlags,
    seed: u64,
    alpha: Option<f64>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let g = Graph::read(graph)?;
    if let Some(alpha) = alpha {
        let p = ppr_matrix(&g, alpha)?;
        return emit(out, &matrix_file::to_text(&p));
    }
    let pairs = sample_pairs(g.n(), f, seed)?;
    let spec = noise_spec(
        noise_level(noise)?,
        noise.noise_scale.unwrap_or_default(),
        seed,
    )?;
    let ms = resgraph::measure(&g, &pairs, spec)?;
    emit(out, &ms.to_text())
}

struct Learned {
    graph: Graph,
    run: Option<LearnResult>,
    report: Option<FeasibilityReport>,
    seconds: f64,
}

fn learn_from(settings: &Settings, ms: &MeasurementSet) -> Result<Learned, Failure> {
    let clock = Instant::now();
    let (graph, run, report) = match settings.solver {
        Solver::Gd => {
            let run = solve_gd(ms, &settings.solver_config())?;
            (run.graph.clone(), Some(run), None)
        }
        Solver::Cd => {
            let run = solve_block_cd(ms, &settings.solver_config())?;
            (run.graph.clone(), Some(run), None)
        }
        Solver::Convex => {
            let res = solve_convex(ms, &settings.penalty_config())?;
            (res.learn.graph.clone(), Some(res.learn), Some(res.report))
        }
        Solver::Exact => {
            let table = ms.full_table().ok_or_else(|| {
                Failure::numerical(format!(
                    "exact reconstruction needs every pair measured, got {} of {}",
                    ms.len(),
                    resgraph::pair_count(ms.n())
                ))
            })?;
            (reconstruct_full(&table, ms.n())?, None, None)
        }
        Solver::Tree => (reconstruct_tree(ms)?, None, None),
        Solver::Ppr => {
            return Err(Failure::usage(
                "solver ppr reads a PageRank matrix, not resistance measurements",
            ))
        }
    };
    Ok(Learned {
        graph,
        run,
        report,
        seconds: clock.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Serialize)]
struct Inputs {
    command: &'static str,
    measurements: String,
    graph: Option<String>,
    truth: Option<String>,
    config: Option<String>,
}

#[derive(Debug, Serialize)]
struct Metrics {
    n: usize,
    measured_pairs: Option<usize>,
    objective: Option<f64>,
    normalized_objective: Option<f64>,
    generalization_error: Option<f64>,
    edges_learned: Option<f64>,
    baseline: Option<f64>,
    learned_edges: usize,
    iterations: Option<usize>,
    stop_reason: Option<StopReason>,
    feasible: Option<bool>,
    runtime_seconds: f64,
    settings: Option<Settings>,
    inputs: Inputs,
}

impl Metrics {
    fn new(h: &Graph, eval: Option<Evaluation>, inputs: Inputs) -> Self {
        let eval = eval.as_ref();
        Self {
            n: h.n(),
            measured_pairs: None,
            objective: eval.map(|e| e.objective),
            normalized_objective: eval.map(|e| e.normalized_objective),
            generalization_error: eval.and_then(|e| e.generalization_error),
            edges_learned: eval.and_then(|e| e.edges_learned),
            baseline: eval.and_then(|e| e.baseline),
            learned_edges: h.edge_count(),
            iterations: None,
            stop_reason: None,
            feasible: None,
            runtime_seconds: 0.0,
            settings: None,
            inputs,
        }
    }

    fn to_json(&self) -> Result<String, Failure> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

fn read_truth(truth: Option<&Path>, n: usize) -> Result<Option<Graph>, Failure> {
    let Some(path) = truth else { return Ok(None) };
    let g = Graph::read(path)?;
    if g.n() != n {
        return Err(Failure::usage(format!(
            "{}: true graph has {} nodes, measurements have {n}",
            path.display(),
            g.n()
        )));
    }
    Ok(Some(g))
}

pub struct LearnArgs {
    pub measurements: PathBuf,
    pub truth: Option<PathBuf>,
    pub flags: SolverFlags,
    pub out_graph: Option<PathBuf>,
    pub out_metrics: Option<PathBuf>,
    pub out_trace: Option<PathBuf>,
    pub out_report: Option<PathBuf>,
}

pub fn learn(args: LearnArgs) -> Result<(), Failure> {
    let file = ConfigFile::load(args.flags.config.as_deref())?;
    let settings = Settings::resolve(&args.flags, &file)?;
    let inputs = Inputs {
        command: "learn",
        measurements: display(&args.measurements),
        graph: None,
        truth: args.truth.as_deref().map(display),
        config: args.flags.config.as_deref().map(display),
    };

    if settings.solver == Solver::Ppr {
        let p = matrix_file::read(&args.measurements)?;
        let alpha = settings.alpha.expect("validated");
        let clock = Instant::now();
        let h = reconstruct_from_ppr(&p, alpha)?;
        let seconds = clock.elapsed().as_secs_f64();
        let truth = read_truth(args.truth.as_deref(), h.n())?;
        let mut metrics = Metrics::new(&h, None, inputs);
        if let Some(g) = &truth {
            let g = &g.normalized()?;
            metrics.generalization_error = Some(resgraph::metrics::generalization_error(&h, g)?);
            metrics.edges_learned = Some(resgraph::metrics::edges_learned(&h, g)?);
            metrics.baseline = Some(resgraph::metrics::baseline_density(g));
        }
        metrics.runtime_seconds = seconds;
        metrics.settings = Some(settings);
        if let Some(path) = &args.out_graph {
            h.write(path)?;
        }
        return emit(args.out_metrics.as_deref(), &metrics.to_json()?);
    }

    let ms = MeasurementSet::read(&args.measurements)?;
    let truth = read_truth(args.truth.as_deref(), ms.n())?;
    let learned = learn_from(&settings, &ms)?;
    let eval = evaluate(&learned.graph, &ms, truth.as_ref())?;
    let mut metrics = Metrics::new(&learned.graph, Some(eval), inputs);
    metrics.measured_pairs = Some(ms.len());
    metrics.runtime_seconds = learned.seconds;
    if let Some(run) = &learned.run {
        metrics.iterations = Some(run.iterations);
        metrics.stop_reason = Some(run.stop_reason);
    }
    metrics.feasible = learned.report.as_ref().map(|r| r.feasible);
    metrics.settings = Some(settings);

    if let Some(path) = &args.out_graph {
        learned.graph.write(path)?;
    }
    if let Some(path) = &args.out_trace {
        match &learned.run {
            Some(run) => run.write_trace(path)?,
            None => emit(Some(path), "iter,objective,wall_seconds\n")?,
        }
    }
    if let Some(path) = &args.out_report {
        match &learned.report {
            Some(report) => report.write_csv(path)?,
            None => return Err(Failure::usage("--out-report needs --solver convex")),
        }
    }
    emit(args.out_metrics.as_deref(), &metrics.to_json()?)
}

pub fn eval(
    graph: &Path,
    measurements: &Path,
    truth: Option<&Path>,
    out_metrics: Option<&Path>,
) -> Result<(), Failure> {
    let h = Graph::read(graph)?;
    let ms = MeasurementSet::read(measurements)?;
    if h.n() != ms.n() {
        return Err(Failure::usage(format!(
            "graph has {} nodes, measurements have {}",
            h.n(),
            ms.n()
        )));
    }
    let truth_graph = read_truth(truth, ms.n())?;
    let eval = evaluate(&h, &ms, truth_graph.as_ref())?;
    let inputs = Inputs {
        command: "eval",
        measurements: display(measurements),
        graph: Some(display(graph)),
        truth: truth.map(display),
        config: None,
    };
    let mut metrics = Metrics::new(&h, Some(eval), inputs);
    metrics.measured_pairs = Some(ms.len());
    emit(out_metrics, &metrics.to_json()?)
}

pub struct ExperimentArgs {
    pub graph: Option<PathBuf>,
    pub generate: Option<String>,
    pub f: String,
    pub noise: NoiseFlags,
    pub reps: usize,
    pub flags: SolverFlags,
    pub out: Option<PathBuf>,
    pub out_runs: Option<PathBuf>,
}

#[derive(Debug, Clone)]
struct Run {
    f: f64,
    sigma2: f64,
    rep: usize,
    seed: u64,
    eval: Evaluation,
    seconds: f64,
}

fn mean_std(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some(var.sqrt()))
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| format!("{v:?}")).unwrap_or_default()
}

pub fn experiment(args: ExperimentArgs) -> Result<(), Failure> {
    let file = ConfigFile::load(args.flags.config.as_deref())?;
    let settings = Settings::resolve(&args.flags, &file)?;
    if settings.solver == Solver::Ppr {
        return Err(Failure::usage(
            "experiment runs resistance solvers only, not ppr",
        ));
    }
    if args.reps == 0 {
        return Err(Failure::usage("--reps must be at least 1"));
    }
    let g = match (&args.graph, &args.generate) {
        (Some(path), _) => Graph::read(path)?,
        (None, Some(spec)) => {
            let words: Vec<String> = spec.split_whitespace().map(str::to_owned).collect();
            build_graph(&words, settings.seed)?
        }
        (None, None) => return Err(Failure::usage("experiment needs --graph or --generate")),
    };
    let fs = parse_list(&args.f, "--f")?;
    let sigmas = parse_list(args.noise.sigma2.as_deref().unwrap_or("0"), "--sigma2")?;
    let scale = args.noise.noise_scale.unwrap_or_default();

    let mut jobs = Vec::new();
    for &f in &fs {
        for &sigma2 in &sigmas {
            for rep in 0..args.reps {
                jobs.push((f, sigma2, rep));
            }
        }
    }
    let runs: Vec<Run> = jobs
        .par_iter()
        .map(|&(f, sigma2, rep)| {
            let seed = settings.seed + rep as u64;
            let pairs = sample_pairs(g.n(), f, seed)?;
            let ms = resgraph::measure(&g, &pairs, noise_spec(sigma2, scale, seed)?)?;
            let run_settings = Settings {
                seed,
                ..settings.clone()
            };
            let learned = learn_from(&run_settings, &ms)?;
            let eval = evaluate(&learned.graph, &ms, Some(&g))?;
            info!("f={f} sigma2={sigma2} rep={rep}: {eval:?}");
            Ok(Run {
                f,
                sigma2,
                rep,
                seed,
                eval,
                seconds: learned.seconds,
            })
        })
        .collect::<Result<_, Failure>>()?;

    let mut table = String::from(
        "solver,noise_scale,f,sigma2,reps,objective_mean,objective_std,\
         normalized_objective_mean,normalized_objective_std,generalization_error_mean,\
         generalization_error_std,edges_learned_mean,edges_learned_std,baseline,\
         runtime_seconds_mean,runtime_seconds_std\n",
    );
    for chunk in runs.chunks(args.reps) {
        let first = &chunk[0];
        let column = |pick: &dyn Fn(&Run) -> f64| {
            let xs: Vec<f64> = chunk.iter().map(pick).collect();
            let (m, s) = mean_std(&xs);
            format!("{m:?},{}", cell(s))
        };
        let _ = writeln!(
            table,
            "{},{},{:?},{:?},{},{},{},{},{},{},{}",
            settings.solver,
            scale_name(scale),
            first.f,
            first.sigma2,
            chunk.len(),
            column(&|r| r.eval.objective),
            column(&|r| r.eval.normalized_objective),
            column(&|r| r.eval.generalization_error.unwrap_or(f64::NAN)),
            column(&|r| r.eval.edges_learned.unwrap_or(f64::NAN)),
            cell(first.eval.baseline),
            column(&|r| r.seconds),
        );
    }

    if let Some(path) = &args.out_runs {
        let mut text = String::from(
            "solver,noise_scale,f,sigma2,rep,seed,objective,normalized_objective,\
             generalization_error,edges_learned,baseline,runtime_seconds\n",
        );
        for r in &runs {
            let _ = writeln!(
                text,
                "{},{},{:?},{:?},{},{},{:?},{:?},{},{},{},{:?}",
                settings.solver,
                scale_name(scale),
                r.f,
                r.sigma2,
                r.rep,
                r.seed,
                r.eval.objective,
                r.eval.normalized_objective,
                cell(r.eval.generalization_error),
                cell(r.eval.edges_learned),
                cell(r.eval.baseline),
                r.seconds,
            );
        }
        emit(Some(path), &text)?;
    }
    emit(args.out.as_deref(), &table)
}
