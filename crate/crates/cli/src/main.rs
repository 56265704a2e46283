use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fastcmh::bench::{
    confounded_csv, confounded_experiment, confounded_grid, fwer_csv, null_fwer_experiment, null_grid, power_csv,
    power_experiment, power_grid, runtime_csv, runtime_experiment, runtime_grid, DESK_CONFOUND_SWEEP,
    DESK_POWER_SWEEP, DESK_RUNTIME_SWEEP,
};
use fastcmh::formats::dataset_paths;
use fastcmh::synth::{gen_confounded, gen_standard, ConfoundSpec, GenSpec};
use fastcmh::tarone::{DEFAULT_ALPHA, DEFAULT_MU, DEFAULT_N_STEPS};
use fastcmh::{filter_overlaps, hits_tsv, load_dataset, run_method, summary_text, write_dataset, Interval, Method, MethodParams};

#[derive(Parser)]
#[command(name = "fastcmh", version, about = "Significant interval mining with a categorical covariate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find intervals significantly associated with the labels.
    Mine(MineArgs),
    /// Write a synthetic dataset.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run a simulation experiment and write CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Fastcmh,
    BonferroniCmh,
    FaisChi2,
    FaisCmh,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Fastcmh => Method::FastCmh,
            MethodArg::BonferroniCmh => Method::BonferroniCmh,
            MethodArg::FaisChi2 => Method::FaisChi2,
            MethodArg::FaisCmh => Method::FaisCmh,
        }
    }
}

#[derive(Args)]
struct Tuning {
    /// Target family-wise error rate.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Log10 spacing of the threshold grid.
    #[arg(long, default_value_t = DEFAULT_MU)]
    mu: f64,
    /// Number of threshold grid steps.
    #[arg(long, default_value_t = DEFAULT_N_STEPS)]
    n_steps: usize,
    /// Longest interval length considered (default: unlimited).
    #[arg(long)]
    max_ell: Option<usize>,
}

impl Tuning {
    fn params(&self) -> MethodParams {
        MethodParams {
            alpha: self.alpha,
            mu: self.mu,
            n_steps: self.n_steps,
            max_ell: self.max_ell,
        }
    }
}

#[derive(Args)]
struct MineArgs {
    /// Binary data matrix, one sample per line.
    #[arg(long)]
    data: PathBuf,
    /// Class labels, one 0/1 per line.
    #[arg(long)]
    labels: PathBuf,
    /// Category indices, one per line, contiguous from 0.
    #[arg(long)]
    covariates: PathBuf,
    /// Data file holds one position per line instead of one sample.
    #[arg(long)]
    transpose: bool,
    #[arg(long, value_enum, default_value = "fastcmh")]
    method: MethodArg,
    #[command(flatten)]
    tuning: Tuning,
    /// Skip the overlap-filtered report.
    #[arg(long)]
    no_filter: bool,
    /// Output prefix; writes <out>.summary.tsv, <out>.raw.tsv and
    /// <out>.filtered.tsv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Balanced design with case-enriched windows.
    Standard(StandardArgs),
    /// A window confounded with the covariate.
    Confounded(ConfoundedArgs),
}

fn parse_interval(s: &str) -> Result<Interval, String> {
    let (tau, ell) = s.split_once(':').ok_or("expected TAU:ELL")?;
    let tau = tau.parse().map_err(|_| format!("bad start {tau:?}"))?;
    let ell = ell.parse().map_err(|_| format!("bad length {ell:?}"))?;
    Ok(Interval::new(tau, ell))
}

#[derive(Args)]
struct StandardArgs {
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    len: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0.2)]
    p1: f64,
    #[arg(long, default_value_t = 0.5)]
    p_case: f64,
    /// Planted window as TAU:ELL (0-based start); repeatable.
    #[arg(long = "plant", value_parser = parse_interval)]
    plants: Vec<Interval>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix; writes <out>.data.txt, <out>.labels.txt and
    /// <out>.covariates.txt.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConfoundedArgs {
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    len: usize,
    #[arg(long, default_value_t = 0.2)]
    p1: f64,
    #[arg(long, default_value_t = 0.0)]
    rho_sig: f64,
    #[arg(long, default_value_t = 0.8)]
    rho_con: f64,
    #[arg(long, default_value_t = 0.1)]
    p_eps: f64,
    #[arg(long, default_value_t = 0.95)]
    p_case: f64,
    /// Confounded window as TAU:ELL.
    #[arg(long, value_parser = parse_interval, default_value = "250:5")]
    confounded: Interval,
    /// Optional genuinely associated window as TAU:ELL.
    #[arg(long, value_parser = parse_interval)]
    genuine: Option<Interval>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Power,
    Confounded,
    Runtime,
    Fwer,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(value_enum)]
    experiment: Experiment,
    /// Repetitions per sweep point.
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    /// Comma-separated sweep values (default: the desk grid).
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    /// Comma-separated methods (default depends on the experiment).
    #[arg(long, value_enum, value_delimiter = ',')]
    methods: Option<Vec<MethodArg>>,
    #[command(flatten)]
    tuning: Tuning,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn mine(args: &MineArgs) -> Result<()> {
    let dataset = load_dataset(&args.data, &args.labels, &args.covariates, args.transpose)?;
    let params = args.tuning.params();
    let result = run_method(args.method.into(), &dataset, &params)?;
    let filtered = (!args.no_filter).then(|| filter_overlaps(&result.hits));
    let summary = summary_text(&result, &params, filtered.as_ref().map(Vec::len));
    write_file(&with_suffix(&args.out, ".summary.tsv"), &summary)?;
    write_file(&with_suffix(&args.out, ".raw.tsv"), &hits_tsv(&result.hits, result.categories))?;
    if let Some(kept) = &filtered {
        write_file(&with_suffix(&args.out, ".filtered.tsv"), &hits_tsv(kept, result.categories))?;
    }
    if result.granularity_warning {
        eprintln!(
            "warning: testable_at_delta_star * delta_star exceeds alpha; \
             the threshold grid is too coarse to resolve delta_star exactly"
        );
    }
    print!("{summary}");
    Ok(())
}

fn gen(cmd: &GenCommand) -> Result<()> {
    let (dataset, out) = match cmd {
        GenCommand::Standard(a) => {
            let spec = GenSpec {
                n: a.n,
                len: a.len,
                k: a.k,
                p1: a.p1,
                p_case: a.p_case,
                plants: a.plants.clone(),
                seed: a.seed,
            };
            (gen_standard(&spec)?, &a.out)
        }
        GenCommand::Confounded(a) => {
            let spec = ConfoundSpec {
                n: a.n,
                len: a.len,
                p1: a.p1,
                rho_sig: a.rho_sig,
                rho_con: a.rho_con,
                p_eps: a.p_eps,
                p_case: a.p_case,
                confounded: a.confounded,
                genuine: a.genuine,
                seed: a.seed,
            };
            (gen_confounded(&spec)?, &a.out)
        }
    };
    let (d, l, c) = dataset_paths(out);
    write_dataset(&dataset, &d, &l, &c)?;
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<()> {
    let params = args.tuning.params();
    let methods: Option<Vec<Method>> = args.methods.as_ref().map(|m| m.iter().map(|&m| m.into()).collect());
    let values = |desk: &[f64]| args.values.clone().unwrap_or_else(|| desk.to_vec());
    let csv = match args.experiment {
        Experiment::Power => {
            let mut grid = power_grid(values(&DESK_POWER_SWEEP), args.reps, args.seed_base);
            grid.params = params;
            grid.methods = methods.unwrap_or(grid.methods);
            power_csv(&power_experiment(&grid)?)
        }
        Experiment::Confounded => {
            let mut grid = confounded_grid(values(&DESK_CONFOUND_SWEEP), args.reps, args.seed_base);
            grid.params = params;
            grid.methods = methods.unwrap_or(grid.methods);
            confounded_csv(&confounded_experiment(&grid)?)
        }
        Experiment::Runtime => {
            let mut grid = runtime_grid(values(&DESK_RUNTIME_SWEEP), args.reps, args.seed_base);
            grid.params = params;
            grid.methods = methods.unwrap_or(grid.methods);
            runtime_csv(&runtime_experiment(&grid)?)
        }
        Experiment::Fwer => {
            if args.values.is_some() {
                bail!("the fwer experiment has no sweep; drop --values");
            }
            let mut grid = null_grid(args.reps, params.alpha, args.seed_base);
            grid.params = params;
            grid.methods = methods.unwrap_or(grid.methods);
            fwer_csv(&null_fwer_experiment(&grid)?)
        }
    };
    write_file(&args.out, &csv)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Mine(a) => mine(a),
        Command::Gen(g) => gen(g),
        Command::Bench(b) => bench(b),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
