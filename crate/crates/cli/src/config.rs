//! Run configuration: a flat key-value file, overridden by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qunit_core::dataset::lookup;
use qunit_core::{DatasetRegistryEntry, FcnnConfig, GradientMode, InitScheme, OutputKind, TrainConfig};

use crate::error::{CliError, CliResult};
use crate::kv::{KeyValues, KvError};

pub const DEFAULT_QUNIT_RUNS: usize = 100;
pub const DEFAULT_FCNN_RUNS: usize = 5;

const GENERAL_KEYS: &[&str] = &[
    "dataset", "data_dir", "file", "feature_columns", "label_column", "header", "labels",
    "drop_labels", "train_count", "model", "runs", "seed", "out", "lr", "epochs",
];
const QUNIT_KEYS: &[&str] = &["min_epochs", "window", "delta", "init", "gradient"];
const FCNN_KEYS: &[&str] = &["hidden", "output"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Qunit,
    Fcnn,
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qunit" => Ok(ModelKind::Qunit),
            "fcnn" => Ok(ModelKind::Fcnn),
            other => Err(format!("unknown model {other:?}, expected qunit or fcnn")),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Qunit => "qunit",
            ModelKind::Fcnn => "fcnn",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelConfig {
    Qunit(TrainConfig),
    Fcnn(FcnnConfig),
}

impl ModelConfig {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelConfig::Qunit(_) => ModelKind::Qunit,
            ModelConfig::Fcnn(_) => ModelKind::Fcnn,
        }
    }

    /// Short label for tables, e.g. `fcnn (h=4)`.
    pub fn label(&self) -> String {
        match self {
            ModelConfig::Qunit(_) => "qunit".into(),
            ModelConfig::Fcnn(c) => format!("fcnn (h={})", c.hidden_dim),
        }
    }
}

/// Values given on the command line; each one replaces the config-file value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub dataset: Option<String>,
    pub model: Option<ModelKind>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub lr: Option<f64>,
    pub epochs: Option<usize>,
    pub hidden: Option<usize>,
    pub data_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Registry entry with column overrides applied and `source` resolved.
    pub dataset: DatasetRegistryEntry,
    pub model: ModelConfig,
    pub train_count: usize,
    pub runs: usize,
    /// Run r uses seed + r for both its split and its initialization.
    pub seed: u64,
    pub out: PathBuf,
}

fn cfg_err(e: KvError) -> CliError {
    CliError::Config(e.0)
}

fn parse_bool(key: &str, v: &str) -> CliResult<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Config(format!("key {key:?}: expected true or false, got {v:?}"))),
    }
}

fn parse_list(v: &str) -> Vec<String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// Column indices such as `0-26` or `0,2,5-9` (ranges inclusive).
pub fn parse_columns(v: &str) -> Result<Vec<usize>, String> {
    let mut cols = Vec::new();
    for part in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid column index {s:?}"))
        };
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (parse(a)?, parse(b)?);
                if a > b {
                    return Err(format!("empty column range {part:?}"));
                }
                cols.extend(a..=b);
            }
            None => cols.push(parse(part)?),
        }
    }
    if cols.is_empty() {
        return Err("no feature columns given".into());
    }
    Ok(cols)
}

/// The registry entry named by `ov.dataset` or the `dataset` key, with any
/// column overrides from `kv` applied and its source file checked.
pub fn resolve_dataset(kv: &KeyValues, ov: &Overrides) -> CliResult<DatasetRegistryEntry> {
    let name = ov
        .dataset
        .clone()
        .or_else(|| kv.get("dataset").map(String::from))
        .ok_or_else(|| CliError::Config("no dataset given".into()))?;
    let mut dataset = lookup(&name).ok_or_else(|| {
        CliError::Config(format!("unknown dataset {name:?}, expected CANCER, SONAR, IRIS or IRIS2"))
    })?;
    if let Some(v) = kv.get("file") {
        dataset.source = PathBuf::from(v);
    }
    if let Some(v) = kv.get("feature_columns") {
        dataset.schema.feature_columns = parse_columns(v).map_err(CliError::Config)?;
        dataset.expected_d = dataset.schema.feature_columns.len();
    }
    if let Some(c) = kv.parse_opt::<usize>("label_column").map_err(cfg_err)? {
        dataset.schema.label_column = c;
    }
    if let Some(v) = kv.get("header") {
        dataset.schema.header = parse_bool("header", v)?;
    }
    if let Some(v) = kv.get("labels") {
        dataset.label_names = parse_list(v);
        dataset.expected_n = dataset.label_names.len();
        if dataset.expected_n < 2 {
            return Err(CliError::Config("at least two labels are required".into()));
        }
    }
    if let Some(v) = kv.get("drop_labels") {
        dataset.drop_labels = parse_list(v);
    }
    let data_dir = ov
        .data_dir
        .clone()
        .or_else(|| kv.get("data_dir").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data"));
    let dataset = dataset.in_dir(&data_dir);
    if !dataset.source.is_file() {
        return Err(CliError::Config(format!(
            "dataset file {} does not exist",
            dataset.source.display()
        )));
    }
    Ok(dataset)
}

/// The key-value pairs of `path`, or none without a config file.
pub fn read_config(path: Option<&Path>) -> CliResult<KeyValues> {
    match path {
        Some(p) => KeyValues::read(p).map_err(cfg_err),
        None => Ok(KeyValues::new()),
    }
}

impl RunConfig {
    /// Reads the optional config file and applies `ov` on top of it.
    pub fn load(config: Option<&Path>, ov: &Overrides) -> CliResult<Self> {
        Self::from_parts(&read_config(config)?, ov)
    }

    pub fn from_parts(kv: &KeyValues, ov: &Overrides) -> CliResult<Self> {
        let model_kind = match ov.model {
            Some(m) => m,
            None => kv
                .parse_opt::<ModelKind>("model")
                .map_err(cfg_err)?
                .unwrap_or(ModelKind::Qunit),
        };
        for key in kv.keys() {
            let allowed = GENERAL_KEYS.contains(&key)
                || (model_kind == ModelKind::Qunit && QUNIT_KEYS.contains(&key))
                || (model_kind == ModelKind::Fcnn && FCNN_KEYS.contains(&key));
            if !allowed {
                return Err(CliError::Config(format!("key {key:?} is not valid for model {model_kind}")));
            }
        }
        if ov.hidden.is_some() && model_kind == ModelKind::Qunit {
            return Err(CliError::Config("--hidden applies to the fcnn model only".into()));
        }

        let dataset = resolve_dataset(kv, ov)?;

        let train_count = kv
            .parse_opt::<usize>("train_count")
            .map_err(cfg_err)?
            .unwrap_or(dataset.train_count);
        if train_count == 0 || !train_count.is_multiple_of(dataset.expected_n) {
            return Err(CliError::Config(format!(
                "train_count {train_count} must be a positive multiple of the class count {}",
                dataset.expected_n
            )));
        }
        let seed = match ov.seed {
            Some(s) => s,
            None => kv.parse_opt::<u64>("seed").map_err(cfg_err)?.unwrap_or(0),
        };
        let lr = match ov.lr {
            Some(v) => Some(v),
            None => kv.parse_opt::<f64>("lr").map_err(cfg_err)?,
        };
        let epochs = match ov.epochs {
            Some(v) => Some(v),
            None => kv.parse_opt::<usize>("epochs").map_err(cfg_err)?,
        };

        let model = match model_kind {
            ModelKind::Qunit => {
                let mut c = TrainConfig::default();
                if let Some(v) = lr {
                    c.learning_rate = v;
                }
                if let Some(v) = epochs {
                    c.max_epochs = v;
                }
                if let Some(v) = kv.parse_opt("min_epochs").map_err(cfg_err)? {
                    c.min_epochs = v;
                }
                if let Some(v) = kv.parse_opt("window").map_err(cfg_err)? {
                    c.convergence_window = v;
                }
                if let Some(v) = kv.parse_opt("delta").map_err(cfg_err)? {
                    c.convergence_delta = v;
                }
                if let Some(v) = kv.get("init") {
                    c.init_scheme = match v {
                        "uniform_small" => InitScheme::UniformSmall,
                        "zeros" => InitScheme::Zeros,
                        _ => return Err(CliError::Config(format!("init must be uniform_small or zeros, got {v:?}"))),
                    };
                }
                if let Some(v) = kv.get("gradient") {
                    c.gradient_mode = match v {
                        "analytic" => GradientMode::Analytic,
                        "finite_difference" => GradientMode::FiniteDifference,
                        _ => {
                            return Err(CliError::Config(format!(
                                "gradient must be analytic or finite_difference, got {v:?}"
                            )))
                        }
                    };
                }
                c.validate().map_err(|e| CliError::Config(e.to_string()))?;
                ModelConfig::Qunit(c)
            }
            ModelKind::Fcnn => {
                let mut c = FcnnConfig::default();
                if let Some(v) = lr {
                    c.learning_rate = v;
                }
                if let Some(v) = epochs {
                    c.epochs = v;
                }
                c.hidden_dim = match ov.hidden {
                    Some(h) => h,
                    None => kv.parse_opt("hidden").map_err(cfg_err)?.unwrap_or(0),
                };
                if let Some(v) = kv.get("output") {
                    c.output = match v {
                        "tanh_mse" => OutputKind::TanhMse,
                        "softmax_ce" => OutputKind::SoftmaxCrossEntropy,
                        _ => return Err(CliError::Config(format!("output must be tanh_mse or softmax_ce, got {v:?}"))),
                    };
                }
                if !(c.learning_rate > 0.0 && c.learning_rate.is_finite()) {
                    return Err(CliError::Config("fcnn learning rate must be positive".into()));
                }
                if c.epochs == 0 {
                    return Err(CliError::Config("epochs must be positive".into()));
                }
                ModelConfig::Fcnn(c)
            }
        };

        let runs = match ov.runs {
            Some(r) => r,
            None => kv.parse_opt::<usize>("runs").map_err(cfg_err)?.unwrap_or(match model_kind {
                ModelKind::Qunit => DEFAULT_QUNIT_RUNS,
                ModelKind::Fcnn => DEFAULT_FCNN_RUNS,
            }),
        };
        if runs == 0 {
            return Err(CliError::Config("runs must be at least 1".into()));
        }
        let out = ov
            .out
            .clone()
            .or_else(|| kv.get("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("runs").join(format!("{}-{}", dataset.name, model_kind)));

        Ok(Self {
            dataset,
            model,
            train_count,
            runs,
            seed,
            out,
        })
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        self.seed.wrapping_add(run as u64)
    }
}
