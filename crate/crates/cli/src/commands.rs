use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use lasso_paths::graph::{indicator, weighted_incidence, Graph};
use lasso_paths::instances::{
    blob_image, grid_from_image, lattice_network, load_road_network, nicholson, parse_pgm,
    random_geometric, ridge_image, write_instance, GridSpec, Instance, LatticeSpec, RggSpec,
    RoadOptions,
};
use lasso_paths::lars::{
    crossing_ratio_tree, crossing_times_generic, joining_time_tree, joining_times_generic,
    lars_solve_graph, verify_dijkstra_equivalence, EquivalenceStatus, LarsOptions, TwinTrees,
};
use lasso_paths::oracle::{dijkstra, terminal_uniqueness_check};
use lasso_paths::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::error::CliError;
use crate::load::{describe, resolve_pair, InstanceArgs};
use crate::manifest::RunManifest;
use crate::methods::{run_method, Method, SolverArgs};

#[derive(Debug, Subcommand)]
pub enum GenerateCmd {
    /// Random geometric graph, radius grown until the giant component is large enough.
    Rgg {
        #[arg(long)]
        n: usize,
        /// Multiplicative weight perturbation (0 disables it).
        #[arg(long, default_value_t = 1e-6)]
        perturb: f64,
        /// Starting radius for the growth loop.
        #[arg(long)]
        radius_start: Option<f64>,
    },
    /// The 9-vertex fixture with pair (1, 9).
    Nicholson,
    /// Pixel grid from a PGM file or a synthetic image.
    Grid {
        #[arg(long, conflicts_with_all = ["blob", "ridge"], required_unless_present_any = ["blob", "ridge"])]
        pgm: Option<PathBuf>,
        /// Synthetic blob image `WxH`.
        #[arg(long, value_parser = parse_dims, conflicts_with = "ridge")]
        blob: Option<(usize, usize)>,
        /// Synthetic ridge image `WxH`.
        #[arg(long, value_parser = parse_dims)]
        ridge: Option<(usize, usize)>,
        /// Use 4-connectivity instead of 8.
        #[arg(long)]
        four_neighbour: bool,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
    },
    /// Synthetic street lattice with arterials.
    Road {
        #[arg(long, default_value_t = 32)]
        cols: usize,
        #[arg(long, default_value_t = 32)]
        rows: usize,
        /// Share of blocks with a diagonal street.
        #[arg(long, default_value_t = 0.0)]
        diagonal: f64,
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
    },
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s}"))?;
    let w = w.trim().parse().map_err(|e| format!("bad width: {e}"))?;
    let h = h.trim().parse().map_err(|e| format!("bad height: {e}"))?;
    Ok((w, h))
}

fn maybe_perturb(inst: Instance, magnitude: f64, seed: u64) -> Result<Instance, CliError> {
    if magnitude > 0.0 {
        Ok(inst.perturbed(magnitude, seed)?)
    } else {
        Ok(inst)
    }
}

pub fn generate(
    cmd: &GenerateCmd,
    seed: u64,
    out: &Path,
    manifest: &mut RunManifest,
) -> Result<(), CliError> {
    let (stem, inst) = match cmd {
        GenerateCmd::Rgg {
            n,
            perturb,
            radius_start,
        } => {
            let mut spec = RggSpec::new(*n, seed);
            spec.perturbation = *perturb;
            spec.radius_start = *radius_start;
            manifest.config = json!({ "generator": "rgg", "n": n, "perturb": perturb, "radius_start": radius_start });
            ("rgg", random_geometric(&spec)?)
        }
        GenerateCmd::Nicholson => {
            manifest.config = json!({ "generator": "nicholson" });
            ("nicholson", nicholson())
        }
        GenerateCmd::Grid {
            pgm,
            blob,
            ridge,
            four_neighbour,
            epsilon,
            perturb,
        } => {
            let img = match (pgm, blob, ridge) {
                (Some(p), _, _) => {
                    let bytes = fs::read(p)
                        .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
                    parse_pgm(&bytes)?
                }
                (None, Some((w, h)), _) => blob_image(*w, *h, seed),
                (None, None, Some((w, h))) => ridge_image(*w, *h),
                (None, None, None) => {
                    return Err(CliError::Input(
                        "grid needs --pgm, --blob or --ridge".into(),
                    ))
                }
            };
            let spec = GridSpec {
                eight_neighbour: !four_neighbour,
                epsilon: *epsilon,
            };
            manifest.config = json!({
                "generator": "grid",
                "pgm": pgm.as_ref().map(|p| p.display().to_string()),
                "blob": blob,
                "ridge": ridge,
                "eight_neighbour": !four_neighbour,
                "epsilon": epsilon,
                "perturb": perturb,
            });
            (
                "grid",
                maybe_perturb(grid_from_image(&img, &spec)?, *perturb, seed)?,
            )
        }
        GenerateCmd::Road {
            cols,
            rows,
            diagonal,
            perturb,
        } => {
            let spec = LatticeSpec {
                cols: *cols,
                rows: *rows,
                diagonal_fraction: *diagonal,
                seed,
                ..Default::default()
            };
            let (nodes, edges) = lattice_network(&spec)?;
            manifest.emit(out, "road.nodes.txt", &nodes)?;
            manifest.emit(out, "road.segments.txt", &edges)?;
            let opts = RoadOptions {
                speed_table: spec.speed_table(),
                turn: None,
            };
            manifest.config = json!({ "generator": "road", "cols": cols, "rows": rows, "diagonal": diagonal, "perturb": perturb });
            (
                "road",
                maybe_perturb(load_road_network(&nodes, &edges, &opts)?, *perturb, seed)?,
            )
        }
    };
    let files = write_instance(&inst, out, stem)?;
    manifest.record_output(&files.edges);
    manifest.record_output(&files.sidecar);
    if let Some(c) = &files.coords {
        manifest.record_output(c);
    }
    manifest.instance = Some(describe(&inst));
    println!(
        "wrote {} (n = {}, m = {})",
        files.edges.display(),
        inst.graph.n(),
        inst.graph.m()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum)]
    pub method: Method,
    /// Source vertex label.
    #[arg(long)]
    pub s: Option<u64>,
    /// Target vertex label.
    #[arg(long)]
    pub t: Option<u64>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

pub fn solve(args: &SolveArgs, out: &Path, manifest: &mut RunManifest) -> Result<(), CliError> {
    let inst = args.instance.load()?;
    manifest.instance = Some(describe(&inst));
    let (s, t) = resolve_pair(&inst, args.s, args.t)?;
    let g = &inst.graph;
    manifest.config = json!({
        "method": args.method,
        "s": g.label(s),
        "t": g.label(t),
        "solver": args.solver,
    });
    let run = run_method(args.method, g, s, t, &args.solver);
    for (name, body) in &run.artifacts {
        manifest.emit(out, name, body)?;
    }
    manifest.count("wall_seconds_solver", run.wall_seconds);
    if let Some(k) = run.iterations {
        manifest.count("iterations", k);
    }
    if let Some(c) = run.cg_total {
        manifest.count("cg_iterations", c);
    }
    manifest.count("method", run.counters.clone());
    let path = run.path?;
    manifest.emit(out, "path.tsv", &path.to_tsv(g))?;
    manifest.count("distance", path.length);
    println!("distance\t{}", path.length);
    println!("edges\t{}", path.steps.len());
    Ok(())
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Methods to run per pair.
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "dijkstra,lars,admm,inadmm,inadmm-warm"
    )]
    pub methods: Vec<Method>,
    /// Pair file with one `s t` label pair per line; defaults to the sidecar pairs.
    #[arg(long, conflicts_with = "random_pairs")]
    pub pairs: Option<PathBuf>,
    /// Draw this many random pairs from the seed instead.
    #[arg(long)]
    pub random_pairs: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

const AGREEMENT_RTOL: f64 = 1e-6;

fn read_pairs(path: &Path, g: &Graph) -> Result<Vec<(usize, usize)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let parse = |v: &str| {
            v.parse::<u64>()
                .map_err(|e| CliError::Input(format!("pairs line {}: {e}", i + 1)))
        };
        if f.len() != 2 {
            return Err(CliError::Input(format!(
                "pairs line {}: expected two labels",
                i + 1
            )));
        }
        pairs.push((
            g.vertex_of_label(parse(f[0])?)?,
            g.vertex_of_label(parse(f[1])?)?,
        ));
    }
    Ok(pairs)
}

fn random_pairs(g: &Graph, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.n();
    (0..count)
        .map(|_| {
            let s = rng.gen_range(0..n);
            let mut t = rng.gen_range(0..n - 1);
            if t >= s {
                t += 1;
            }
            (s, t)
        })
        .collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn compare(
    args: &CompareArgs,
    seed: u64,
    out: &Path,
    manifest: &mut RunManifest,
) -> Result<(), CliError> {
    let inst = args.instance.load()?;
    manifest.instance = Some(describe(&inst));
    let g = &inst.graph;
    if args.methods.is_empty() {
        return Err(CliError::Input("no methods given".into()));
    }
    let pairs = match (&args.pairs, args.random_pairs) {
        (Some(p), _) => read_pairs(p, g)?,
        (None, Some(k)) => random_pairs(g, k, seed),
        (None, None) => inst.pairs.clone(),
    };
    manifest.config = json!({
        "methods": args.methods,
        "pairs": pairs.iter().map(|&(s, t)| (g.label(s), g.label(t))).collect::<Vec<_>>(),
        "solver": args.solver,
    });

    let jobs: Vec<(usize, Method)> = (0..pairs.len())
        .flat_map(|i| args.methods.iter().map(move |&m| (i, m)))
        .collect();
    let oracle: Vec<_> = pairs
        .par_iter()
        .map(|&(s, t)| {
            dijkstra(g, s, Some(t))
                .ok()
                .and_then(|tree| tree.path_to(g, t))
        })
        .collect();
    let runs: Vec<_> = jobs
        .par_iter()
        .map(|&(i, m)| run_method(m, g, pairs[i].0, pairs[i].1, &args.solver))
        .collect();

    let mut report = String::from(
        "s,t,method,distance,oracle_distance,path_equal,iterations,cg_iterations,wall_seconds,flag,error\n",
    );
    let mut failures = 0;
    for (&(i, _), run) in jobs.iter().zip(&runs) {
        let (s, t) = pairs[i];
        let reference = oracle[i].as_ref();
        let (distance, equal, error) = match &run.path {
            Ok(p) => (
                p.length.to_string(),
                reference
                    .is_some_and(|r| r.support() == p.support())
                    .to_string(),
                String::new(),
            ),
            Err(e) => {
                failures += 1;
                (String::new(), "false".into(), e.to_string())
            }
        };
        let flag = match (&run.path, reference) {
            (Ok(p), Some(r)) if (p.length - r.length).abs() > AGREEMENT_RTOL * r.length.abs() => {
                "distance-mismatch"
            }
            _ => "",
        };
        let opt = |v: Option<usize>| v.map(|k| k.to_string()).unwrap_or_default();
        writeln!(
            report,
            "{},{},{},{distance},{},{equal},{},{},{},{flag},{}",
            g.label(s),
            g.label(t),
            run.method.name(),
            reference.map(|r| r.length.to_string()).unwrap_or_default(),
            opt(run.iterations),
            opt(run.cg_total),
            run.wall_seconds,
            csv_field(&error),
        )
        .unwrap();
    }
    manifest.emit(out, "compare.csv", &report)?;
    manifest.count("rows", runs.len());
    manifest.count("failed_rows", failures);
    println!("{} rows, {failures} failed", runs.len());
    if !runs.is_empty() && failures == runs.len() {
        return Err(CliError::Failed("every comparison row failed".into()));
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub instance: Option<VerifyInstance>,
    /// Source vertex label.
    #[arg(long)]
    pub s: Option<u64>,
    /// Target vertex label.
    #[arg(long)]
    pub t: Option<u64>,
    /// Check this many seeded random geometric graphs instead of one instance.
    #[arg(long, conflicts_with = "instance")]
    pub sweep: Option<usize>,
}

#[derive(Debug, Args)]
#[group(required = false, multiple = true)]
pub struct VerifyInstance {
    /// Edge list (`u v w` per line).
    #[arg(long = "instance")]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
}

const FORMULA_RTOL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= FORMULA_RTOL * a.abs().max(b.abs())
}

/// Outcome of one instance check.
enum Checked {
    Passed {
        breakpoints: usize,
        checks: usize,
        formulas: usize,
    },
    Skipped(String),
}

/// Runs the Dijkstra equivalence checks and compares closed-form event
/// times with the generic ones on every segment.
fn check_instance(g: &Graph, s: usize, t: usize) -> Result<Checked, Error> {
    // Ties make the active Gram matrix singular, so gate before solving.
    if !terminal_uniqueness_check(g, s, t)?.holds() {
        return Ok(Checked::Skipped(
            "shortest paths from the terminals are not unique".into(),
        ));
    }
    let path = lars_solve_graph(g, s, t, &LarsOptions::default())?;
    let report = verify_dijkstra_equivalence(&path, g, s, t)?;
    if let EquivalenceStatus::Skipped(reason) = report.status {
        return Ok(Checked::Skipped(reason));
    }
    let q = weighted_incidence(g);
    let y = indicator(g, s, t)?.to_dense();
    let mut formulas = 0;
    for (k, seg) in path.segments.iter().enumerate() {
        let Ok(twin) = TwinTrees::from_active(g, s, t, &seg.state.indices) else {
            continue;
        };
        let joins = joining_times_generic(&q, &y, &seg.state, &seg.a, &seg.b, seg.lambda_hi);
        for j in 0..g.m() {
            if seg.state.contains(j) || joins.time[j] <= 0.0 {
                continue;
            }
            let closed = joining_time_tree(&twin, g, j)?;
            if !close(closed, joins.time[j]) {
                return Err(Error::PropertyViolation {
                    check: "closed-form-join".into(),
                    breakpoint: k + 1,
                    detail: format!("edge {j}: closed form {closed}, generic {}", joins.time[j]),
                });
            }
            formulas += 1;
        }
        let crosses = crossing_times_generic(&seg.a, &seg.b, seg.lambda_hi);
        for (&j, &c) in seg.state.indices.iter().zip(&crosses) {
            if c > 0.0 {
                let closed = crossing_ratio_tree(&twin, g, j)?;
                if !close(closed, c) {
                    return Err(Error::PropertyViolation {
                        check: "closed-form-cross".into(),
                        breakpoint: k + 1,
                        detail: format!("edge {j}: closed form {closed}, generic {c}"),
                    });
                }
                formulas += 1;
            }
        }
    }
    let oracle = dijkstra(g, s, Some(t))?.dist[t];
    if (path.distance - oracle).abs() > FORMULA_RTOL * oracle.abs() {
        return Err(Error::PropertyViolation {
            check: "terminal-distance".into(),
            breakpoint: path.segments.len(),
            detail: format!("lasso distance {}, Dijkstra {oracle}", path.distance),
        });
    }
    Ok(Checked::Passed {
        breakpoints: report.breakpoints_checked,
        checks: report.checks_run,
        formulas,
    })
}

pub fn verify(
    args: &VerifyArgs,
    seed: u64,
    out: &Path,
    manifest: &mut RunManifest,
) -> Result<(), CliError> {
    if let Some(count) = args.sweep {
        manifest.config = json!({ "sweep": count });
        let results: Vec<_> = (0..count)
            .into_par_iter()
            .map(|i| {
                let n = 10 + (i * 7) % 31;
                let inst = random_geometric(&RggSpec::new(n, seed.wrapping_add(i as u64)))?;
                let (s, t) = inst.pairs[0];
                check_instance(&inst.graph, s, t)
            })
            .collect();
        let mut report = String::from("instance,status,detail\n");
        let (mut passed, mut skipped, mut violations) = (0, 0, 0);
        let mut first_error = None;
        for (i, r) in results.into_iter().enumerate() {
            let (status, detail) = match r {
                Ok(Checked::Passed { formulas, .. }) => {
                    passed += 1;
                    ("passed", format!("{formulas} formula checks"))
                }
                Ok(Checked::Skipped(reason)) => {
                    skipped += 1;
                    ("skipped", reason)
                }
                Err(e) => {
                    violations += 1;
                    let msg = e.to_string();
                    first_error.get_or_insert(CliError::from(e));
                    ("failed", msg)
                }
            };
            writeln!(report, "{i},{status},{}", csv_field(&detail)).unwrap();
        }
        manifest.emit(out, "verify.csv", &report)?;
        manifest.count("passed", passed);
        manifest.count("skipped", skipped);
        manifest.count("failed", violations);
        println!("passed {passed}/{count} (skipped {skipped}, failed {violations})");
        return first_error.map_or(Ok(()), Err);
    }

    let Some(VerifyInstance {
        instance: Some(edges),
        sidecar,
    }) = &args.instance
    else {
        return Err(CliError::Input("verify needs --instance or --sweep".into()));
    };
    let loader = InstanceArgs {
        instance: edges.clone(),
        sidecar: sidecar.clone(),
    };
    let inst = loader.load()?;
    manifest.instance = Some(describe(&inst));
    let (s, t) = resolve_pair(&inst, args.s, args.t)?;
    let g = &inst.graph;
    manifest.config = json!({ "s": g.label(s), "t": g.label(t) });
    let report = match check_instance(g, s, t)? {
        Checked::Passed {
            breakpoints,
            checks,
            formulas,
        } => {
            println!(
                "pass: {breakpoints} breakpoints, {checks} checks, {formulas} formula comparisons"
            );
            json!({ "status": "passed", "breakpoints": breakpoints, "checks": checks, "formula_checks": formulas })
        }
        Checked::Skipped(reason) => {
            println!("assumption not met, checks skipped ({reason})");
            json!({ "status": "skipped", "reason": reason })
        }
    };
    manifest.emit(
        out,
        "verify.json",
        &(serde_json::to_string_pretty(&report).unwrap() + "\n"),
    )?;
    Ok(())
}
