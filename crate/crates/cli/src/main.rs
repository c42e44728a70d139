use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qunit_cli::config::{read_config, resolve_dataset};
use qunit_cli::{
    cmd_compare, cmd_evaluate, cmd_inspect, cmd_train, CliError, CliResult, ModelKind, Overrides,
    ParamsFile, RunConfig, SplitChoice,
};

#[derive(Parser, Debug)]
#[command(name = "qunit", version, about = "Train and evaluate the single-qudit classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train R seeded repetitions and write curves, parameters and a summary.
    Train(RunArgs),
    /// Score a parameter file on its split (or another dataset).
    Evaluate(EvaluateArgs),
    /// Train two configurations on the same data and tabulate them.
    Compare(CompareArgs),
    /// Print a parameter file, including the evaluated SU(N) matrix.
    Inspect {
        params: PathBuf,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct RunArgs {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CANCER, SONAR, IRIS or IRIS2.
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Repetitions; run r uses seed + r.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for run artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Hidden-layer width of the fcnn model (0 for none).
    #[arg(long)]
    hidden: Option<usize>,
    /// Directory holding the dataset CSV files [default: data].
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    Qunit,
    Fcnn,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SplitArg {
    Train,
    Test,
    All,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    params: PathBuf,
    /// Dataset to score on; defaults to the one recorded in the parameter file.
    #[arg(long)]
    dataset: Option<String>,
    /// Config file supplying dataset and column settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "test")]
    split: SplitArg,
}

#[derive(Args, Debug)]
struct CompareArgs {
    first: PathBuf,
    second: PathBuf,
    /// Repetitions for both configurations.
    #[arg(long)]
    runs: Option<usize>,
    /// Write each configuration's artifacts under this directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            dataset: self.dataset.clone(),
            model: self.model.map(|m| match m {
                ModelArg::Qunit => ModelKind::Qunit,
                ModelArg::Fcnn => ModelKind::Fcnn,
            }),
            runs: self.runs,
            seed: self.seed,
            out: self.out.clone(),
            lr: self.lr,
            epochs: self.epochs,
            hidden: self.hidden,
            data_dir: self.data_dir.clone(),
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Train(args) => {
            let cfg = RunConfig::load(args.config.as_deref(), &args.overrides())?;
            cmd_train(&cfg, &mut stdout)?;
        }
        Command::Evaluate(args) => {
            let params = ParamsFile::read(&args.params)?;
            let kv = read_config(args.config.as_deref())?;
            let ov = Overrides {
                dataset: args
                    .dataset
                    .or_else(|| kv.get("dataset").is_none().then(|| params.dataset.clone())),
                data_dir: args.data_dir,
                ..Overrides::default()
            };
            let entry = resolve_dataset(&kv, &ov)?;
            let which = match args.split {
                SplitArg::Train => SplitChoice::Train,
                SplitArg::Test => SplitChoice::Test,
                SplitArg::All => SplitChoice::All,
            };
            cmd_evaluate(&params, &entry, which, &mut stdout)?;
        }
        Command::Compare(args) => {
            let ov = Overrides {
                runs: args.runs,
                data_dir: args.data_dir,
                ..Overrides::default()
            };
            let a = RunConfig::load(Some(&args.first), &ov)?;
            let b = RunConfig::load(Some(&args.second), &ov)?;
            cmd_compare(&a, &b, args.out.as_deref(), &mut stdout)?;
        }
        Command::Inspect { params } => cmd_inspect(&params, &mut stdout)?,
    }
    stdout.flush().map_err(|e| CliError::Config(format!("cannot write output: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qunit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
