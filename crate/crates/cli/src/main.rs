//! `recomb`: batch solver for the recombination equation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use recomb_core::ancestral::{
    build_discrete_matrix, build_generator, coefficients_discrete, coefficients_recursion, coefficients_semigroup,
    coefficients_single_crossover, compute_psi_theta, monte_carlo_coefficients, SplitSampler,
};
use recomb_core::dynamics::{integrate_grid, iterate_discrete, warn_unseparated, ExactMethod, ExactSolver};
use recomb_core::moran::{lln_report_with, simulate_arg_with, MoranSimulator, PopulationState};
use recomb_core::rng::{replicate_rng, run_replicates};
use recomb_core::{io, CoefficientVector, PartitionIndex, Trajectory};

use config::{config_error, ConfigError, ModelConfig};
use output::{emit, Format};

#[derive(Debug, Parser)]
#[command(name = "recomb", version, about = "Solve and simulate the deterministic recombination equation")]
struct Cli {
    /// Model configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads for replicate simulations; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Largest deviation `crosscheck` accepts.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tolerance: f64,
    #[command(subcommand)]
    mode: Mode,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CoefficientMethod {
    Semigroup,
    Recursion,
    SingleCrossover,
    MonteCarlo,
    Discrete,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolveMethod {
    Semigroup,
    Recursion,
    SingleCrossover,
}

impl From<SolveMethod> for ExactMethod {
    fn from(m: SolveMethod) -> Self {
        match m {
            SolveMethod::Semigroup => ExactMethod::Semigroup,
            SolveMethod::Recursion => ExactMethod::Recursion,
            SolveMethod::SingleCrossover => ExactMethod::SingleCrossover,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Mode {
    /// Integrate the equation with fixed-step RK4 on the time grid.
    SolveOde,
    /// Exact solution from ancestral coefficients on the time grid.
    SolveExact {
        #[arg(long, value_enum)]
        method: Option<SolveMethod>,
    },
    /// Iterate the discrete-time map for `run.generations` steps.
    SolveDiscrete,
    /// Transition probabilities of the partitioning process at `run.t`.
    Coefficients {
        #[arg(long, value_enum)]
        method: CoefficientMethod,
    },
    /// Forward Moran simulations recorded on the time grid.
    SimulateMoran,
    /// Finite-population genealogies of one individual at `run.t`.
    SimulateArg,
    /// Distance of Moran populations from the deterministic solution.
    LlnReport,
    /// Compare all applicable exact coefficient methods.
    Crosscheck,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_TOLERANCE: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RECOMB_LOG", "warn")).init();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return EXIT_CONFIG;
        }
        if let Some(core) = cause.downcast_ref::<recomb_core::Error>() {
            return match core {
                recomb_core::Error::Io(_) | recomb_core::Error::Csv(_) => 1,
                c if c.is_numerical() => EXIT_NUMERICAL,
                _ => EXIT_CONFIG,
            };
        }
    }
    1
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    let path = cli.config.as_ref().ok_or_else(|| config_error(anyhow!("--config PATH is required")))?;
    let cfg = ModelConfig::load(path)?;
    let d = cfg.recombination()?;
    warn_unseparated(&d);
    let seed = cli.seed.or(cfg.run.seed).unwrap_or(0);
    match &cli.mode {
        Mode::SolveOde => {
            let w0 = cfg.initial()?;
            let grid = with_origin(cfg.grid()?);
            let tr = integrate_grid(&d, &w0, &grid, cfg.dt()?, cfg.run.drift)?;
            write_trajectory(cli, &tr)?;
        }
        Mode::SolveExact { method } => {
            let w0 = cfg.initial()?;
            let method = method.map(ExactMethod::from).or(cfg.run.method).unwrap_or(ExactMethod::Semigroup);
            let grid = with_origin(cfg.grid()?);
            let tr = ExactSolver::new(&d, method)?.solve_grid(&w0, &grid)?;
            write_trajectory(cli, &tr)?;
        }
        Mode::SolveDiscrete => {
            let w0 = cfg.initial()?;
            let steps = cfg
                .run
                .generations
                .ok_or_else(|| config_error(anyhow!("field `run.generations` is required")))?;
            write_trajectory(cli, &iterate_discrete(&d, &w0, steps)?)?;
        }
        Mode::Coefficients { method } => coefficients(cli, &cfg, &d, *method, seed)?,
        Mode::SimulateMoran => simulate_moran(cli, &cfg, &d, seed)?,
        Mode::SimulateArg => simulate_arg(cli, &cfg, &d, seed)?,
        Mode::LlnReport => {
            let w0 = cfg.initial()?;
            let n_list = cfg
                .run
                .population_list
                .clone()
                .ok_or_else(|| config_error(anyhow!("field `run.N_list` is required")))?;
            let report = lln_report_with(&d, &w0, cfg.time()?, &n_list, cfg.replicates(200)?, seed, cli.jobs, cfg.run.init)?;
            for row in &report.rows {
                println!("N={} mean_tv={:.6e} std_error={:.2e}", row.population, row.mean_tv, row.std_error);
            }
            match report.slope {
                Some(s) => println!("log-log slope {s:.4}"),
                None => println!("log-log slope undefined"),
            }
            emit(
                &cli.out,
                "lln",
                cli.format,
                |w| {
                    let mut out = csv_writer(w);
                    out.write_record(["N", "mean_tv", "std_error"])?;
                    for r in &report.rows {
                        out.write_record([r.population.to_string(), r.mean_tv.to_string(), r.std_error.to_string()])?;
                    }
                    out.flush()?;
                    Ok(())
                },
                || serde_json::to_value(&report).expect("serializable report"),
            )?;
        }
        Mode::Crosscheck => return crosscheck(cli, &cfg, &d),
    }
    Ok(ExitCode::SUCCESS)
}

fn csv_writer(w: &mut dyn std::io::Write) -> csv::Writer<&mut dyn std::io::Write> {
    csv::Writer::from_writer(w)
}

/// Trajectories start at time zero.
fn with_origin(mut grid: Vec<f64>) -> Vec<f64> {
    if grid[0] > 0.0 {
        grid.insert(0, 0.0);
    }
    grid
}

fn write_trajectory(cli: &Cli, tr: &Trajectory) -> anyhow::Result<()> {
    emit(
        &cli.out,
        "trajectory",
        cli.format,
        |w| io::write_trajectory(w, tr),
        || {
            let space = tr.states[0].space();
            json!({
                "times": tr.times,
                "types": (0..space.cardinality()).map(|x| space.label(x)).collect::<Vec<_>>(),
                "states": tr.states.iter().map(|w| w.to_dense()).collect::<Vec<_>>(),
            })
        },
    )?;
    Ok(())
}

fn coefficients_json(c: &CoefficientVector) -> Value {
    Value::Array(c.iter().map(|(a, v)| json!({"partition": a.to_string(), "a_t": v})).collect())
}

fn write_coefficients(cli: &Cli, c: &CoefficientVector, meta: Value) -> anyhow::Result<()> {
    emit(
        &cli.out,
        "coefficients",
        cli.format,
        |w| io::write_coefficients(w, c),
        || {
            let mut v = meta;
            v["coefficients"] = coefficients_json(c);
            v
        },
    )?;
    Ok(())
}

fn coefficients(
    cli: &Cli,
    cfg: &ModelConfig,
    d: &recomb_core::RecombinationDistribution,
    method: CoefficientMethod,
    seed: u64,
) -> anyhow::Result<()> {
    let idx = Arc::new(PartitionIndex::for_sites(d.sites())?);
    let start = cfg.start_partition()?;
    let from_coarsest = || -> anyhow::Result<()> {
        if !start.is_coarsest() {
            return Err(config_error(anyhow!("field `run.start`: this method only starts from the coarsest partition")));
        }
        Ok(())
    };
    let (c, meta) = match method {
        CoefficientMethod::Discrete => {
            let steps = cfg
                .run
                .generations
                .ok_or_else(|| config_error(anyhow!("field `run.generations` is required")))?;
            let m = build_discrete_matrix(d, &idx)?;
            (coefficients_discrete(&m, steps, &start)?, json!({"method": "discrete", "generations": steps}))
        }
        _ => {
            let t = cfg.time()?;
            let c = match method {
                CoefficientMethod::Semigroup => coefficients_semigroup(&build_generator(d, &idx)?, t, &start)?,
                CoefficientMethod::Recursion => {
                    from_coarsest()?;
                    coefficients_recursion(&compute_psi_theta(d, &idx)?, t)?
                }
                CoefficientMethod::SingleCrossover => {
                    from_coarsest()?;
                    coefficients_single_crossover(d, &idx, t)?
                }
                CoefficientMethod::MonteCarlo => {
                    let reps = cfg.replicates(100_000)?;
                    monte_carlo_coefficients(d, &idx, &start, t, reps, seed, cli.jobs)?
                }
                CoefficientMethod::Discrete => unreachable!(),
            };
            let name = format!("{method:?}").to_lowercase();
            (c, json!({"method": name, "t": t, "start": start.to_string()}))
        }
    };
    write_coefficients(cli, &c, meta)
}

fn simulate_moran(cli: &Cli, cfg: &ModelConfig, d: &recomb_core::RecombinationDistribution, seed: u64) -> anyhow::Result<()> {
    let w0 = cfg.initial()?;
    let n = cfg.population()?;
    let grid = cfg.grid()?;
    let reps = cfg.replicates(1)?;
    let sim = MoranSimulator::new(d);
    let runs = run_replicates(reps, cli.jobs, || (), |_, r| -> recomb_core::Result<Vec<PopulationState>> {
        let mut rng = replicate_rng(seed, r);
        let z0 = PopulationState::from_distribution(&w0, n, cfg.run.init, &mut rng)?;
        sim.run_grid(&z0, &grid, &mut rng)
    });
    let runs: Vec<Vec<PopulationState>> = runs.into_iter().collect::<recomb_core::Result<_>>()?;
    let rows = || {
        runs.iter()
            .enumerate()
            .flat_map(|(r, states)| grid.iter().zip(states).map(move |(&t, z)| (r as u64, t, z)))
    };
    emit(
        &cli.out,
        "moran",
        cli.format,
        |w| io::write_moran(w, rows()),
        || {
            let mut recs = Vec::new();
            for (r, t, z) in rows() {
                for (x, c) in z.iter() {
                    recs.push(json!({"replicate": r, "t": t, "type": z.space().label(x), "count": c}));
                }
            }
            json!({"N": n, "records": recs})
        },
    )?;
    Ok(())
}

fn simulate_arg(cli: &Cli, cfg: &ModelConfig, d: &recomb_core::RecombinationDistribution, seed: u64) -> anyhow::Result<()> {
    let n = cfg.population()?;
    let t = cfg.time()?;
    let reps = cfg.replicates(1)?;
    let states = run_replicates(reps, cli.jobs, || SplitSampler::new(d), |s, r| {
        simulate_arg_with(s, Some(n), t, &mut replicate_rng(seed, r))
    });
    let states: Vec<_> = states.into_iter().collect::<recomb_core::Result<_>>()?;
    emit(
        &cli.out,
        "arg",
        cli.format,
        |w| io::write_arg(w, states.iter().enumerate().map(|(r, a)| (r as u64, a))),
        || {
            let recs: Vec<Value> = states
                .iter()
                .enumerate()
                .map(|(r, a)| json!({"replicate": r, "partition": a.partition().to_string(), "ancestors": a.individuals()}))
                .collect();
            json!({"N": n, "t": t, "records": recs})
        },
    )?;
    Ok(())
}

fn crosscheck(cli: &Cli, cfg: &ModelConfig, d: &recomb_core::RecombinationDistribution) -> anyhow::Result<ExitCode> {
    if !(cli.tolerance >= 0.0) {
        return Err(config_error(anyhow!("--tolerance must be nonnegative")));
    }
    let idx = Arc::new(PartitionIndex::for_sites(d.sites())?);
    let grid = cfg.grid()?;
    let q = build_generator(d, &idx)?;
    let psi_theta = match compute_psi_theta(d, &idx) {
        Ok(pt) => Some(pt),
        Err(e @ recomb_core::Error::NonGeneric { .. }) => {
            log::warn!("skipping recursion: {e}");
            None
        }
        Err(e) => return Err(e.into()),
    };
    let one = recomb_core::Partition::coarsest(idx.ground());
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &t in &grid {
        let mut results: Vec<(&str, CoefficientVector)> = vec![("semigroup", coefficients_semigroup(&q, t, &one)?)];
        if let Some(pt) = &psi_theta {
            results.push(("recursion", coefficients_recursion(pt, t)?));
        }
        if d.is_single_crossover() {
            results.push(("single_crossover", coefficients_single_crossover(d, &idx, t)?));
        }
        for i in 0..results.len() {
            for j in i + 1..results.len() {
                let dev = results[i].1.max_abs_diff(&results[j].1)?;
                worst = worst.max(dev);
                rows.push((t, results[i].0, results[j].0, dev));
            }
        }
    }
    if rows.is_empty() {
        log::warn!("only one coefficient method applies to this model; nothing to compare");
    }
    emit(
        &cli.out,
        "crosscheck",
        cli.format,
        |w| {
            let mut out = csv_writer(w);
            out.write_record(["t", "method_a", "method_b", "deviation"])?;
            for (t, a, b, dev) in &rows {
                out.write_record([t.to_string(), a.to_string(), b.to_string(), dev.to_string()])?;
            }
            out.flush()?;
            Ok(())
        },
        || {
            json!({
                "tolerance": cli.tolerance,
                "max_deviation": worst,
                "comparisons": rows.iter().map(|(t, a, b, dev)| json!({"t": t, "method_a": a, "method_b": b, "deviation": dev})).collect::<Vec<_>>(),
            })
        },
    )
    .context("writing crosscheck table")?;
    println!("max deviation {worst:e} over {} comparisons (tolerance {:e})", rows.len(), cli.tolerance);
    if worst > cli.tolerance {
        eprintln!("error: deviation {worst:e} exceeds tolerance {:e}", cli.tolerance);
        return Ok(ExitCode::from(EXIT_TOLERANCE));
    }
    Ok(ExitCode::SUCCESS)
}
