use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hallar_cli::commands::{bench, solve_source, verify_report, VERIFY_TOL};
use hallar_cli::instance::{write_instance, Kind, Manifest, Params, Source};
use hallar_cli::json;
use hallar_cli::report::{trace_csv, ReportFile};
use hallar_core::hallar::Tolerance;
use hallar_core::{HallarConfig, Status};

/// Exit code for unreadable input or invalid configuration.
const EXIT_CONFIG: u8 = 2;
/// Exit code when the solver stops without meeting its tolerance (or a
/// verification disagrees).
const EXIT_UNSOLVED: u8 = 3;

#[derive(Parser)]
#[command(name = "hallar", version, about = "Matrix-free low-rank SDP solver")]
struct Cli {
    /// Log progress (repeat for more detail); RUST_LOG takes precedence.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and write a JSON report.
    Solve(SolveArgs),
    /// Generate a synthetic instance together with its manifest.
    Generate(GenerateArgs),
    /// Recompute residuals from the solution stored in a report.
    Verify {
        #[arg(long)]
        report: PathBuf,
    },
    /// Solve a batch of instances and write a CSV summary.
    Bench(BenchArgs),
}

#[derive(Args)]
#[group(id = "source", required = true, multiple = false)]
struct SourceArgs {
    /// Edge-list graph (stable set / Lovász theta).
    #[arg(long, group = "source")]
    graph: Option<PathBuf>,
    /// CSV observations (matrix completion).
    #[arg(long, group = "source")]
    obs: Option<PathBuf>,
    /// JSON phase retrieval instance.
    #[arg(long, group = "source")]
    phase: Option<PathBuf>,
    /// Manifest of a synthetic instance, regenerated on the fly.
    #[arg(long, group = "source")]
    manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Relative,
    Theory,
}

#[derive(Args)]
struct SolverArgs {
    /// JSON solver configuration (a report's `config_echo` is accepted);
    /// flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Relative KKT tolerance.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Absolute feasibility tolerance (theory mode).
    #[arg(long)]
    eps_p: Option<f64>,
    /// Absolute complementarity tolerance (theory mode).
    #[arg(long)]
    eps_c: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    beta0: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    chi: Option<f64>,
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long)]
    rho_bar: Option<f64>,
    #[arg(long)]
    s_trigger: Option<usize>,
    #[arg(long)]
    max_outer: Option<usize>,
    #[arg(long)]
    no_recompress: bool,
}

#[derive(Args)]
struct SolveArgs {
    /// Expected problem kind; checked against the source.
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Report path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-outer-iteration CSV trace.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    kind: Kind,
    /// Graph family: cycle, complete, empty, hypercube, petersen or random.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Hypercube dimension.
    #[arg(long)]
    d: Option<u32>,
    /// Edge probability of random graphs.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Instance files or manifests.
    paths: Vec<PathBuf>,
    /// File listing one instance path per line ('#' comments allowed).
    #[arg(long)]
    list: Option<PathBuf>,
    /// Concurrent solves; defaults to HALLAR_NUM_THREADS or the core count.
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    /// CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_config(path: &Path) -> Result<HallarConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let v = v.get("config_echo").cloned().unwrap_or(v);
    serde_json::from_value(v).with_context(|| format!("invalid solver configuration in {}", path.display()))
}

impl SolverArgs {
    fn config(&self) -> Result<HallarConfig> {
        let mut cfg = match &self.config {
            Some(p) => load_config(p)?,
            None => HallarConfig::default(),
        };
        let theory = match self.mode {
            Some(Mode::Theory) => true,
            Some(Mode::Relative) => false,
            None => self.eps_p.is_some() || self.eps_c.is_some(),
        };
        if theory {
            if self.eps.is_some() {
                bail!("--eps selects relative mode; use --eps-p and --eps-c in theory mode");
            }
            match (self.eps_p, self.eps_c, cfg.tolerance) {
                (Some(eps_p), Some(eps_c), _) => cfg.tolerance = Tolerance::Theory { eps_p, eps_c },
                (None, None, Tolerance::Theory { .. }) => {}
                _ => bail!("theory mode needs both --eps-p and --eps-c"),
            }
        } else {
            if self.eps_p.is_some() || self.eps_c.is_some() {
                bail!("--eps-p/--eps-c require theory mode");
            }
            if let Some(eps) = self.eps {
                cfg.tolerance = Tolerance::Relative { eps };
            } else if matches!(self.mode, Some(Mode::Relative)) && !matches!(cfg.tolerance, Tolerance::Relative { .. }) {
                cfg.tolerance = Tolerance::Relative { eps: 1e-5 };
            }
        }
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field {
                    cfg.$field = v;
                })*
            };
        }
        macro_rules! set_opt {
            ($($field:ident),*) => {
                $(if self.$field.is_some() {
                    cfg.$field = self.$field;
                })*
            };
        }
        set!(seed, sigma, chi, lambda0, max_outer);
        set_opt!(beta0, rho_bar, s_trigger);
        if self.time_limit.is_some() {
            cfg.time_limit_s = self.time_limit;
        }
        if self.no_recompress {
            cfg.recompress = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl SourceArgs {
    fn source(&self) -> Result<Source> {
        let abs = |p: &PathBuf| fs::canonicalize(p).with_context(|| format!("cannot open {}", p.display()));
        if let Some(p) = &self.graph {
            Ok(Source::Graph(abs(p)?))
        } else if let Some(p) = &self.obs {
            Ok(Source::Observations(abs(p)?))
        } else if let Some(p) = &self.phase {
            Ok(Source::Phase(abs(p)?))
        } else if let Some(p) = &self.manifest {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(Source::Manifest(
                serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", p.display()))?,
            ))
        } else {
            bail!("no instance given")
        }
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<u8> {
    let cfg = args.solver.config()?;
    let source = args.source.source()?;
    if let Some(kind) = args.kind {
        if kind != source.kind() {
            bail!("--kind {} does not match a {} source", kind.name(), source.kind().name());
        }
    }
    let out = solve_source(&source, &cfg)?;
    let r = &out.report;
    write_or_print(args.out.as_deref(), &json::to_string(r)?)?;
    if let Some(t) = &args.trace {
        fs::write(t, trace_csv(&out.trace)).with_context(|| format!("writing {}", t.display()))?;
    }
    eprintln!(
        "{:?}: value {:.10} (dual {:.10}), primal_rel {:.2e}, gap_rel {:.2e}, {} outer, {} MEV, rank {}, {:.2}s",
        r.status,
        r.pval_user,
        r.dval_user,
        r.residuals.primal_rel,
        r.residuals.gap_rel,
        r.counters.outer,
        r.counters.mev,
        r.solution.s,
        r.wall_time_s
    );
    Ok(if r.status == Status::Solved { 0 } else { EXIT_UNSOLVED })
}

fn cmd_generate(args: &GenerateArgs) -> Result<u8> {
    let manifest = Manifest {
        kind: args.kind,
        params: Params {
            family: args.family.clone(),
            n: args.n,
            d: args.d,
            p: args.p,
            n1: args.n1,
            n2: args.n2,
            r: args.r,
        },
        seed: args.seed,
        n: 0,
        m: 0,
    };
    let inst = manifest.regenerate()?;
    let manifest = manifest.with_sizes(&inst);
    let file = write_instance(&args.out_dir, &manifest, &inst)?;
    eprintln!("wrote {} (n = {}, m = {})", file.display(), manifest.n, manifest.m);
    Ok(0)
}

fn cmd_verify(path: &Path) -> Result<u8> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let r: ReportFile = serde_json::from_str(&text).with_context(|| format!("parsing report {}", path.display()))?;
    let v = verify_report(&r)?;
    println!(
        "primal_rel {} gap_rel {} pval {} dval {} max_diff {:.3e} fresh_theta {} stored_theta {}",
        json::fmt_f64(v.primal_rel),
        json::fmt_f64(v.gap_rel),
        json::fmt_f64(v.pval),
        json::fmt_f64(v.dval),
        v.max_diff,
        json::fmt_f64(v.fresh_theta),
        json::fmt_f64(r.theta)
    );
    if v.agrees() {
        eprintln!("report verified (tolerance {VERIFY_TOL:e})");
        Ok(0)
    } else {
        eprintln!("report disagrees with recomputation by {:.3e}", v.max_diff);
        Ok(EXIT_UNSOLVED)
    }
}

fn workers(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var("HALLAR_NUM_THREADS").ok().and_then(|v| v.trim().parse().ok()))
        .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1)
        .max(1)
}

fn cmd_bench(args: &BenchArgs) -> Result<u8> {
    let cfg = args.solver.config()?;
    let mut paths = args.paths.clone();
    if let Some(list) = &args.list {
        let text = fs::read_to_string(list).with_context(|| format!("reading {}", list.display()))?;
        let base = list.parent().unwrap_or(Path::new("."));
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            paths.push(base.join(line));
        }
    }
    let (csv, unsolved) = bench(&paths, &cfg, workers(args.workers))?;
    write_or_print(args.out.as_deref(), &csv)?;
    if unsolved > 0 {
        eprintln!("{unsolved} of {} instances not solved", paths.len());
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Verify { report } => cmd_verify(report),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
