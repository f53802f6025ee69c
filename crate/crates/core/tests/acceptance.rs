//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Reference values are computed here with independent dense solves rather
//! than through the library's pseudoinverse routines.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use resgraph::datasets::{
    gen_grid, gen_knn, random_connected_graph, random_tree, read_ego_edges, DEFAULT_KNN_K,
};
use resgraph::lsq::{gradient, hessian, objective};
use resgraph::metrics::{baseline_density, edges_learned, normalized_objective};
use resgraph::{
    measure, reconstruct_from_hitting, reconstruct_from_ppr, reconstruct_full, reconstruct_tree,
    sample_pairs, solve_convex, solve_gd, Graph, Measurement, MeasurementSet, NoiseScale,
    NoiseSpec, PenaltyConfig, SolverConfig,
};

struct Outcome {
    pass: bool,
    detail: String,
}

enum Status {
    Done(Outcome),
    Skipped(String),
}

fn done(pass: bool, detail: String) -> Status {
    Status::Done(Outcome { pass, detail })
}

// ---- oracles ----

fn dense_laplacian(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let mut l = DMatrix::zeros(n, n);
    for (u, v, w) in g.edges() {
        l[(u, v)] -= w;
        l[(v, u)] -= w;
        l[(u, u)] += w;
        l[(v, v)] += w;
    }
    l
}

/// Resistances by grounding node 0: with `L₀` the Laplacian minus row and
/// column 0, `r(u,v) = (e_u - e_v)ᵀ L₀⁻¹ (e_u - e_v)` (with `e_0 = 0`).
fn resistances(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let l = dense_laplacian(g);
    let grounded = l.view((1, 1), (n - 1, n - 1)).into_owned();
    let inv = grounded.lu().try_inverse().expect("connected graph");
    let x = |i: usize, j: usize| {
        if i == 0 || j == 0 {
            0.0
        } else {
            inv[(i - 1, j - 1)]
        }
    };
    let mut out = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            out.push(x(u, u) + x(v, v) - 2.0 * x(u, v));
        }
    }
    out
}

fn relative_laplacian_error(h: &Graph, g: &Graph) -> f64 {
    let lg = dense_laplacian(g);
    (dense_laplacian(h) - &lg).norm() / lg.norm()
}

fn scale_free_error(h: &Graph, g: &Graph) -> f64 {
    let s = g.weights().iter().sum::<f64>() / h.weights().iter().sum::<f64>();
    let scaled = Graph::from_weights(h.n(), h.weights().iter().map(|w| w * s).collect()).unwrap();
    relative_laplacian_error(&scaled, g)
}

/// Expected steps to reach `v` from every node, by solving the absorbing
/// chain `(I - T_{-v}) h = 1`.
fn hitting_oracle(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let deg: Vec<f64> = (0..n)
        .map(|u| (0..n).filter(|&v| v != u).map(|v| g.weight(u, v)).sum())
        .collect();
    let mut h = DMatrix::zeros(n, n);
    for target in 0..n {
        let others: Vec<usize> = (0..n).filter(|&u| u != target).collect();
        let k = others.len();
        let a = DMatrix::from_fn(k, k, |i, j| {
            let (u, v) = (others[i], others[j]);
            let step = if u == v { 0.0 } else { g.weight(u, v) / deg[u] };
            if i == j {
                1.0 - step
            } else {
                -step
            }
        });
        let sol = a.lu().solve(&DVector::from_element(k, 1.0)).unwrap();
        for (i, &u) in others.iter().enumerate() {
            h[(u, target)] = sol[i];
        }
    }
    h
}

/// `α (I - (1-α) W)⁻¹` with `W = (I + A D⁻¹) / 2`.
fn ppr_oracle(g: &Graph, alpha: f64) -> DMatrix<f64> {
    let n = g.n();
    let deg: Vec<f64> = (0..n)
        .map(|u| (0..n).filter(|&v| v != u).map(|v| g.weight(u, v)).sum())
        .collect();
    let w = DMatrix::from_fn(n, n, |i, j| {
        let walk = if i == j { 0.0 } else { g.weight(i, j) / deg[j] };
        0.5 * (if i == j { 1.0 } else { 0.0 } + walk)
    });
    let m = DMatrix::identity(n, n) - w * (1.0 - alpha);
    m.try_inverse().unwrap() * alpha
}

fn generalization(h: &Graph, g: &Graph) -> f64 {
    let rh = resistances(h);
    let rg = resistances(g);
    let num: f64 = rh.iter().zip(&rg).map(|(a, b)| (a - b).powi(2)).sum();
    num / rg.iter().map(|b| b * b).sum::<f64>()
}

/// Share of `g`'s edges among `h`'s `m` heaviest, ties by pair order.
fn edges_oracle(h: &Graph, g: &Graph) -> f64 {
    let truth: Vec<(usize, usize)> = g.edges().iter().map(|&(u, v, _)| (u, v)).collect();
    let mut ranked = h.edges();
    ranked.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    let hits = ranked
        .iter()
        .take(truth.len())
        .filter(|e| truth.contains(&(e.0, e.1)))
        .count();
    100.0 * hits as f64 / truth.len() as f64
}

fn exact_measurements(g: &Graph, pairs: &[(usize, usize)]) -> MeasurementSet {
    let table = resistances(g);
    let n = g.n();
    let index = |u: usize, v: usize| u * n - u * (u + 1) / 2 + (v - u - 1);
    MeasurementSet::new(
        n,
        pairs
            .iter()
            .map(|&(u, v)| Measurement {
                u,
                v,
                rbar: table[index(u, v)],
            })
            .collect(),
    )
    .unwrap()
}

// ---- criteria ----

fn exact_round_trip() -> Status {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    for k in 0..50 {
        let n = rng.random_range(5..=40);
        let g = random_connected_graph(n, rng.random_range(0.05..0.5), 100 + k);
        let back = reconstruct_full(&resistances(&g), n).unwrap();
        worst = worst.max(relative_laplacian_error(&back, &g));
    }
    let secs = clock.elapsed().as_secs_f64();
    done(
        worst <= 1e-8 && secs < 5.0,
        format!("max rel. Laplacian error {worst:.2e}, {secs:.2} s"),
    )
}

fn tree_recovery() -> Status {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0_f64;
    for k in 0..50 {
        let n = rng.random_range(5..=50);
        let tree = random_tree(n, 200 + k);
        let mut pairs: Vec<(usize, usize)> = tree.edges().iter().map(|&(u, v, _)| (u, v)).collect();
        let others: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| tree.weight(u, v) == 0.0)
            .collect();
        let extra = (others.len() as f64 * 0.1).round() as usize;
        for i in rand::seq::index::sample(&mut rng, others.len(), extra) {
            pairs.push(others[i]);
        }
        pairs.sort();
        let back = reconstruct_tree(&exact_measurements(&tree, &pairs)).unwrap();
        worst = worst.max(relative_laplacian_error(&back, &tree));
    }
    let secs = clock.elapsed().as_secs_f64();
    done(
        worst <= 1e-8 && secs < 5.0,
        format!("max rel. Laplacian error {worst:.2e}, {secs:.2} s"),
    )
}

fn hitting_times() -> Status {
    let mut identity = 0.0_f64;
    let mut round_trip = 0.0_f64;
    for k in 0..30 {
        let n = 5 + (k as usize % 20);
        let g = random_connected_graph(n, 0.3, 300 + k);
        let h = resgraph::hitting_times(&g).unwrap();
        let oracle = hitting_oracle(&g);
        let vol = 2.0 * g.total_weight();
        let r = resistances(&g);
        let mut i = 0;
        for u in 0..n {
            for v in u + 1..n {
                let commute = h[(u, v)] + h[(v, u)];
                identity = identity.max((commute - vol * r[i]).abs() / (vol * r[i]));
                identity = identity.max((h[(u, v)] - oracle[(u, v)]).abs() / oracle[(u, v)]);
                i += 1;
            }
        }
        round_trip = round_trip.max(scale_free_error(
            &reconstruct_from_hitting(&oracle).unwrap(),
            &g,
        ));
    }
    done(
        identity <= 1e-8 && round_trip <= 1e-8,
        format!("commute identity {identity:.2e}, recovery {round_trip:.2e}"),
    )
}

fn ppr_recovery() -> Status {
    let mut worst = 0.0_f64;
    for k in 0..30 {
        let n = 5 + (k as usize % 25);
        let g = random_connected_graph(n, 0.3, 400 + k);
        let back = reconstruct_from_ppr(&ppr_oracle(&g, 0.3), 0.3).unwrap();
        worst = worst.max(scale_free_error(&back, &g));
    }
    done(
        worst <= 1e-8,
        format!("max rel. error up to scale {worst:.2e}"),
    )
}

fn derivatives() -> Status {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut grad_err = 0.0_f64;
    let mut hess_err = 0.0_f64;
    for k in 0..20 {
        let n = rng.random_range(4..=12);
        let g = random_connected_graph(n, 0.3, 500 + k);
        let pairs = sample_pairs(n, 0.5, k).unwrap();
        let ms = exact_measurements(&g, &pairs);
        let w: Vec<f64> = g
            .weights()
            .iter()
            .map(|x| x * rng.random_range(0.5..1.5) + rng.random_range(0.0..0.2))
            .collect();
        let grad = gradient(&w, &ms).unwrap();
        let gscale = grad.iter().fold(1e-12_f64, |a, x| a.max(x.abs()));
        for i in 0..w.len() {
            let h = 1e-6 * (1.0 + w[i].abs());
            let (mut p, mut m) = (w.clone(), w.clone());
            p[i] += h;
            m[i] -= h;
            let fd = (objective(&p, &ms).unwrap() - objective(&m, &ms).unwrap()) / (2.0 * h);
            grad_err = grad_err.max((fd - grad[i]).abs() / gscale);
        }
        if n <= 7 {
            let hess = hessian(&w, &ms).unwrap();
            let hscale = hess.amax().max(1e-12);
            for j in 0..w.len() {
                let h = 1e-6 * (1.0 + w[j].abs());
                let (mut p, mut m) = (w.clone(), w.clone());
                p[j] += h;
                m[j] -= h;
                let (gp, gm) = (gradient(&p, &ms).unwrap(), gradient(&m, &ms).unwrap());
                for i in 0..w.len() {
                    let fd = (gp[i] - gm[i]) / (2.0 * h);
                    hess_err = hess_err.max((fd - hess[(i, j)]).abs() / hscale);
                }
            }
        }
    }
    done(
        grad_err <= 1e-5 && hess_err <= 1e-4,
        format!("gradient rel. error {grad_err:.2e}, Hessian rel. error {hess_err:.2e}"),
    )
}

/// Iteration cap for the least-squares runs, which are meant to run to
/// convergence.
const GD_BUDGET: usize = 100_000;

struct Run {
    edges: f64,
    generalization: f64,
    normalized: f64,
}

fn gd_run(g: &Graph, f: f64, noise: NoiseSpec, seed: u64) -> Run {
    let pairs = sample_pairs(g.n(), f, seed).unwrap();
    let ms = measure(g, &pairs, noise).unwrap();
    let cfg = SolverConfig {
        seed,
        max_iters: GD_BUDGET,
        ..SolverConfig::default()
    };
    let out = solve_gd(&ms, &cfg).unwrap();
    let h = &out.graph;
    let edges = edges_oracle(h, g);
    assert_eq!(edges, edges_learned(h, g).unwrap());
    Run {
        edges,
        generalization: generalization(h, g),
        normalized: normalized_objective(h, &ms).unwrap(),
    }
}

fn grid_full() -> Status {
    let clock = Instant::now();
    let g = gen_grid(8, 8).unwrap();
    let run = gd_run(&g, 1.0, NoiseSpec::noiseless(), 0);
    let secs = clock.elapsed().as_secs_f64();
    done(
        run.edges == 100.0 && run.normalized <= 1e-6 && secs <= 600.0,
        format!(
            "edges learned {:.2}%, normalized objective {:.2e}, {secs:.1} s",
            run.edges, run.normalized
        ),
    )
}

fn grid_quarter() -> Status {
    let clock = Instant::now();
    let g = gen_grid(8, 8).unwrap();
    let runs: Vec<Run> = (0..3)
        .map(|s| gd_run(&g, 0.25, NoiseSpec::noiseless(), s))
        .collect();
    let secs = clock.elapsed().as_secs_f64();
    let pass = runs
        .iter()
        .any(|r| r.edges >= 75.0 && r.generalization <= 0.01)
        && secs <= 900.0;
    let detail = runs
        .iter()
        .map(|r| format!("{:.2}% / {:.2e}", r.edges, r.generalization))
        .collect::<Vec<_>>()
        .join(", ");
    done(
        pass,
        format!("edges learned / generalization per seed: {detail}; {secs:.1} s"),
    )
}

fn grid_noisy() -> Status {
    let g = gen_grid(8, 8).unwrap();
    let noise = NoiseSpec::new(0.1, 0).unwrap();
    let run = gd_run(&g, 0.25, noise, 0);
    // same instance with sigma2 * mean r as the noise standard deviation, for reference only
    let alt = gd_run(&g, 0.25, noise.with_scale(NoiseScale::StdDev), 0);
    done(
        run.edges >= 35.0,
        format!(
            "edges learned {:.2}%, generalization {:.2e} (stddev-scaled noise: {:.2}%, {:.2e})",
            run.edges, run.generalization, alt.edges, alt.generalization
        ),
    )
}

fn knn_quarter() -> Status {
    let g = gen_knn(80, DEFAULT_KNN_K, 0).unwrap();
    let run = gd_run(&g, 0.25, NoiseSpec::noiseless(), 0);
    done(
        run.edges >= 55.0,
        format!(
            "edges learned {:.2}% (baseline {:.2}%)",
            run.edges,
            baseline_density(&g)
        ),
    )
}

fn convex_grid() -> Status {
    let g = gen_grid(8, 8).unwrap();
    let pairs = sample_pairs(64, 1.0, 0).unwrap();
    let ms = exact_measurements(&g, &pairs);
    let out = solve_convex(&ms, &PenaltyConfig::default()).unwrap();
    let h = &out.learn.graph;
    let r = resistances(h);
    let mean = ms.mean_target();
    let violation = ms
        .entries()
        .iter()
        .zip(&r)
        .map(|(e, r)| (r - e.rbar).max(0.0))
        .fold(0.0, f64::max)
        / mean;
    let trace = 2.0 * h.total_weight();
    let true_trace = 2.0 * g.total_weight();
    let edges = edges_oracle(h, &g);
    let baseline = 100.0 * g.edge_count() as f64 / pairs.len() as f64;
    done(
        violation <= 1e-3 && trace <= 1.1 * true_trace && edges > baseline,
        format!(
            "violation {violation:.2e}, trace {trace:.3} vs true {true_trace:.3}, edges learned {edges:.2}% vs baseline {baseline:.2}%"
        ),
    )
}

fn m_matrix_spectrum() -> Status {
    let mut ok = true;
    let mut detail = Vec::new();
    for n in 4..=6usize {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        let m = pairs.len();
        let abs_b = DMatrix::from_fn(m, n, |i, k| {
            if pairs[i].0 == k || pairs[i].1 == k {
                1.0
            } else {
                0.0
            }
        });
        let mm = -(&abs_b * abs_b.transpose()) - DMatrix::identity(m, m) * 2.0;
        let eig = mm.symmetric_eigenvalues();
        let count = |t: f64| {
            eig.iter()
                .filter(|&&l: &&f64| (l - t).abs() <= 1e-8)
                .count()
        };
        let nf = n as f64;
        let counts = (count(-2.0 * nf), count(-nf), count(-2.0));
        ok &= counts == (1, n - 1, m - n);
        detail.push(format!("n={n}: {counts:?}"));
    }
    done(ok, detail.join(", "))
}

fn facebook_small() -> Status {
    let path = std::env::var_os("RESGRAPH_FB_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/facebook"))
        .join("698.edges");
    if !path.exists() {
        return Status::Skipped(format!(
            "{} not found; set RESGRAPH_FB_DIR to the directory holding the SNAP ego files",
            path.display()
        ));
    }
    let ego = read_ego_edges(&path).unwrap();
    let g = ego.graph;
    let run = gd_run(&g, 0.25, NoiseSpec::noiseless(), 0);
    done(
        run.edges >= 60.0,
        format!(
            "n={}, m={}, edges learned {:.2}%",
            g.n(),
            g.edge_count(),
            run.edges
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Status); 12] = [
        ("exact reconstruction round trip", exact_round_trip),
        ("tree recovery", tree_recovery),
        ("hitting-time identity and recovery", hitting_times),
        ("PPR recovery", ppr_recovery),
        ("gradient and Hessian correctness", derivatives),
        ("grid f=100% GD", grid_full),
        ("grid f=25% GD", grid_quarter),
        ("grid f=25% sigma2=0.1 GD", grid_noisy),
        ("k-NN f=25% GD", knn_quarter),
        ("convex solver on grid f=100%", convex_grid),
        ("M-matrix spectrum", m_matrix_spectrum),
        ("FB Small A f=25% GD", facebook_small),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.is_some_and(|o| o != id) {
            continue;
        }
        match check() {
            Status::Done(o) => {
                let verdict = if o.pass { "PASS" } else { "FAIL" };
                println!("criterion {id:>2} [{verdict}] {name}: {}", o.detail);
                failed += usize::from(!o.pass);
            }
            Status::Skipped(why) => println!("criterion {id:>2} [SKIP] {name}: {why}"),
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
