//! Files written per run (error curve, frozen parameters) and per invocation
//! (summary).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use qunit_core::{FcnnModel, OutputKind, ParameterState};

use crate::error::{CliError, CliResult};
use crate::kv::{join_reals, KeyValues, KvError};

pub const PARAMS_FORMAT: &str = "qunit-params";
pub const SUMMARY_FORMAT: &str = "qunit-summary";
pub const FORMAT_VERSION: u32 = 1;

pub fn curve_path(dir: &Path, run: usize) -> PathBuf {
    dir.join(format!("run_{run:03}.curve.csv"))
}

pub fn params_path(dir: &Path, run: usize) -> PathBuf {
    dir.join(format!("run_{run:03}.params"))
}

pub fn summary_path(dir: &Path) -> PathBuf {
    dir.join("summary.txt")
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

/// One row of an error curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub epoch: usize,
    pub error: f64,
    pub train_accuracy: f64,
}

/// `epoch,error,train_accuracy`, one line per completed epoch. Wall-clock
/// times are left out so that repeated runs give identical bytes.
pub fn write_curve(path: &Path, points: impl IntoIterator<Item = CurvePoint>) -> CliResult<()> {
    fn write_all(path: &Path, points: impl IntoIterator<Item = CurvePoint>) -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "epoch,error,train_accuracy")?;
        for p in points {
            writeln!(w, "{},{:?},{:?}", p.epoch, p.error, p.train_accuracy)?;
        }
        w.flush()
    }
    write_all(path, points).map_err(|e| io_err(path, e))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Weights {
    Qunit(ParameterState),
    Fcnn(FcnnModel),
}

/// Frozen parameters of one run plus what is needed to rebuild its split.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamsFile {
    pub dataset: String,
    pub d: usize,
    pub n: usize,
    /// Seed of the run; drives both the split and the initialization.
    pub seed: u64,
    pub train_count: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub epochs: usize,
    pub converged: bool,
    pub weights: Weights,
}

impl ParamsFile {
    pub fn model_name(&self) -> &'static str {
        match self.weights {
            Weights::Qunit(_) => "qunit",
            Weights::Fcnn(_) => "fcnn",
        }
    }

    pub fn to_kv(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        kv.push("format", PARAMS_FORMAT);
        kv.push("version", FORMAT_VERSION);
        kv.push("model", self.model_name());
        kv.push("dataset", &self.dataset);
        kv.push("d", self.d);
        kv.push("n", self.n);
        kv.push("seed", self.seed);
        kv.push("train_count", self.train_count);
        kv.push("train_accuracy", format!("{:?}", self.train_accuracy));
        kv.push("test_accuracy", format!("{:?}", self.test_accuracy));
        kv.push("epochs", self.epochs);
        kv.push("converged", self.converged);
        match &self.weights {
            Weights::Qunit(p) => {
                kv.push("w", join_reals(&p.w));
                kv.push("alpha", join_reals(&p.alpha));
            }
            Weights::Fcnn(m) => {
                let hidden = if m.layers.len() == 2 { m.layers[0].outputs } else { 0 };
                kv.push("hidden", hidden);
                kv.push(
                    "output",
                    match m.output {
                        OutputKind::TanhMse => "tanh_mse",
                        OutputKind::SoftmaxCrossEntropy => "softmax_ce",
                    },
                );
                for (i, l) in m.layers.iter().enumerate() {
                    kv.push(format!("layer.{i}.weights"), join_reals(&l.weights));
                    kv.push(format!("layer.{i}.bias"), join_reals(&l.bias));
                }
            }
        }
        kv
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_kv().to_text()).map_err(|e| io_err(path, e))
    }

    pub fn from_kv(kv: &KeyValues) -> Result<Self, KvError> {
        let format = kv.require("format")?;
        if format != PARAMS_FORMAT {
            return Err(KvError(format!("not a parameter file (format {format:?})")));
        }
        let version: u32 = kv.parse_required("version")?;
        if version != FORMAT_VERSION {
            return Err(KvError(format!("unsupported version {version}")));
        }
        let d: usize = kv.parse_required("d")?;
        let n: usize = kv.parse_required("n")?;
        if n < 2 {
            return Err(KvError(format!("class count {n} is below 2")));
        }
        let check_len = |key: &str, v: &[f64], expected: usize| {
            if v.len() == expected {
                Ok(())
            } else {
                Err(KvError(format!("{key} has {} values, expected {expected}", v.len())))
            }
        };
        let seed: u64 = kv.parse_required("seed")?;
        let weights = match kv.require("model")? {
            "qunit" => {
                let w = kv.reals("w")?;
                let alpha = kv.reals("alpha")?;
                check_len("w", &w, d)?;
                check_len("alpha", &alpha, n * n - 1)?;
                Weights::Qunit(ParameterState { w, alpha, seed })
            }
            "fcnn" => {
                let hidden: usize = kv.parse_required("hidden")?;
                let output = match kv.require("output")? {
                    "tanh_mse" => OutputKind::TanhMse,
                    "softmax_ce" => OutputKind::SoftmaxCrossEntropy,
                    other => return Err(KvError(format!("unknown output {other:?}"))),
                };
                let mut model = FcnnModel::zeros(d, n, hidden, output);
                for (i, l) in model.layers.iter_mut().enumerate() {
                    let wk = format!("layer.{i}.weights");
                    let bk = format!("layer.{i}.bias");
                    let w = kv.reals(&wk)?;
                    let b = kv.reals(&bk)?;
                    check_len(&wk, &w, l.weights.len())?;
                    check_len(&bk, &b, l.bias.len())?;
                    l.weights = w;
                    l.bias = b;
                }
                Weights::Fcnn(model)
            }
            other => return Err(KvError(format!("unknown model {other:?}"))),
        };
        Ok(Self {
            dataset: kv.require("dataset")?.to_string(),
            d,
            n,
            seed,
            train_count: kv.parse_required("train_count")?,
            train_accuracy: kv.parse_required("train_accuracy")?,
            test_accuracy: kv.parse_required("test_accuracy")?,
            epochs: kv.parse_required("epochs")?,
            converged: kv.parse_required("converged")?,
            weights,
        })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let kv = KeyValues::read(path).map_err(|e| CliError::Data(e.0))?;
        Self::from_kv(&kv).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RunOutcome {
    Completed {
        train_accuracy: f64,
        test_accuracy: f64,
        epochs: usize,
        converged: bool,
    },
    Diverged {
        epoch: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub outcome: RunOutcome,
}

/// Mean and sample standard deviation (n − 1 denominator; 0 for one value).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, std })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub dataset: String,
    pub model: String,
    pub d: usize,
    pub n: usize,
    pub parameter_count: usize,
    pub runs: Vec<RunRecord>,
}

impl RunSummary {
    fn completed(&self, pick: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.runs
            .iter()
            .filter_map(|r| match r.outcome {
                RunOutcome::Completed {
                    train_accuracy,
                    test_accuracy,
                    ..
                } => Some(pick(train_accuracy, test_accuracy)),
                RunOutcome::Diverged { .. } => None,
            })
            .collect()
    }

    pub fn train_accuracy(&self) -> Option<Stats> {
        Stats::of(&self.completed(|tr, _| tr))
    }

    pub fn test_accuracy(&self) -> Option<Stats> {
        Stats::of(&self.completed(|_, te| te))
    }

    pub fn diverged(&self) -> usize {
        self.runs
            .iter()
            .filter(|r| matches!(r.outcome, RunOutcome::Diverged { .. }))
            .count()
    }

    pub fn to_kv(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        kv.push("format", SUMMARY_FORMAT);
        kv.push("version", FORMAT_VERSION);
        kv.push("model", &self.model);
        kv.push("dataset", &self.dataset);
        kv.push("d", self.d);
        kv.push("n", self.n);
        kv.push("parameter_count", self.parameter_count);
        kv.push("runs", self.runs.len());
        kv.push("diverged", self.diverged());
        for r in &self.runs {
            let line = match r.outcome {
                RunOutcome::Completed {
                    train_accuracy,
                    test_accuracy,
                    epochs,
                    converged,
                } => format!(
                    "status=ok seed={} train_accuracy={train_accuracy:?} test_accuracy={test_accuracy:?} \
                     epochs={epochs} converged={converged}",
                    r.seed
                ),
                RunOutcome::Diverged { epoch } => {
                    format!("status=diverged seed={} epoch={epoch}", r.seed)
                }
            };
            kv.push(format!("run.{:03}", r.run), line);
        }
        for (key, stats) in [("train_accuracy", self.train_accuracy()), ("test_accuracy", self.test_accuracy())] {
            if let Some(s) = stats {
                kv.push(format!("{key}.mean"), format!("{:?}", s.mean));
                kv.push(format!("{key}.std"), format!("{:?}", s.std));
            }
        }
        kv
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_kv().to_text()).map_err(|e| io_err(path, e))
    }
}
