//! The `train`, `evaluate`, `compare` and `inspect` commands.

use std::io::Write;
use std::path::Path;

use qunit_core::fcnn::parameter_counts;
use qunit_core::{
    balanced_split, fcnn_evaluate, fcnn_train_logged, load_csv, DatasetRegistryEntry, Error,
    Evaluation, LabeledDataset, QuditClassifier, SplitSpec, TrainConfig,
};
use rayon::prelude::*;

use crate::artifacts::{
    curve_path, params_path, summary_path, write_curve, CurvePoint, ParamsFile, RunOutcome,
    RunRecord, RunSummary, Stats, Weights,
};
use crate::config::{ModelConfig, RunConfig};
use crate::error::{CliError, CliResult};

fn out_err(e: std::io::Error) -> CliError {
    CliError::Config(format!("cannot write output: {e}"))
}

pub fn load_dataset(entry: &DatasetRegistryEntry) -> CliResult<LabeledDataset> {
    load_csv(&entry.source, entry).map_err(CliError::data)
}

pub fn split(ds: &LabeledDataset, train_count: usize, seed: u64) -> CliResult<(LabeledDataset, LabeledDataset)> {
    let spec = SplitSpec::from_train_count(train_count, ds.n_classes(), seed).map_err(CliError::data)?;
    balanced_split(ds, &spec).map_err(CliError::data)
}

pub fn parameter_count(model: &ModelConfig, d: usize, n: usize) -> usize {
    match model {
        ModelConfig::Qunit(_) => parameter_counts(d, n, 0).0,
        ModelConfig::Fcnn(c) => parameter_counts(d, n, c.hidden_dim).1,
    }
}

/// Trains and scores one repetition, writing its curve and parameter file
/// into `dir` when given.
fn run_once(cfg: &RunConfig, ds: &LabeledDataset, run: usize, dir: Option<&Path>) -> CliResult<RunRecord> {
    let seed = cfg.run_seed(run);
    let (train_split, test_split) = split(ds, cfg.train_count, seed)?;
    let (d, n) = (ds.d(), ds.n_classes());

    let trained = match &cfg.model {
        ModelConfig::Qunit(base) => {
            let clf = QuditClassifier::new(n).map_err(CliError::data)?;
            let tc = TrainConfig { seed, ..base.clone() };
            clf.train(&train_split, &tc).and_then(|log| {
                let train_eval = clf.evaluate(&train_split, &log.final_params)?;
                let test_eval = clf.evaluate(&test_split, &log.final_params)?;
                let curve: Vec<CurvePoint> = log
                    .records
                    .iter()
                    .map(|r| CurvePoint {
                        epoch: r.epoch,
                        error: r.error,
                        train_accuracy: r.train_accuracy,
                    })
                    .collect();
                Ok((
                    Weights::Qunit(log.final_params),
                    curve,
                    train_eval,
                    test_eval,
                    log.converged,
                ))
            })
        }
        ModelConfig::Fcnn(base) => {
            let fc = qunit_core::FcnnConfig { seed, ..base.clone() };
            fcnn_train_logged(&train_split, &fc).map(|(model, history)| {
                let train_eval = fcnn_evaluate(&model, &train_split);
                let test_eval = fcnn_evaluate(&model, &test_split);
                let curve = history
                    .iter()
                    .map(|h| CurvePoint {
                        epoch: h.epoch,
                        error: h.loss,
                        train_accuracy: h.train_accuracy,
                    })
                    .collect();
                (Weights::Fcnn(model), curve, train_eval, test_eval, false)
            })
        }
    };

    let outcome = match trained {
        Ok((weights, curve, train_eval, test_eval, converged)) => {
            let epochs = curve.len();
            if let Some(dir) = dir {
                write_curve(&curve_path(dir, run), curve)?;
                ParamsFile {
                    dataset: cfg.dataset.name.clone(),
                    d,
                    n,
                    seed,
                    train_count: cfg.train_count,
                    train_accuracy: train_eval.accuracy,
                    test_accuracy: test_eval.accuracy,
                    epochs,
                    converged,
                    weights,
                }
                .write(&params_path(dir, run))?;
            }
            RunOutcome::Completed {
                train_accuracy: train_eval.accuracy,
                test_accuracy: test_eval.accuracy,
                epochs,
                converged,
            }
        }
        Err(Error::Diverged { epoch, .. }) => RunOutcome::Diverged { epoch },
        Err(e) => return Err(CliError::data(e)),
    };
    Ok(RunRecord { run, seed, outcome })
}

/// Runs every repetition of `cfg` (in parallel) and, with `dir`, persists
/// per-run artifacts and the summary. Divergence is recorded per run.
pub fn execute(cfg: &RunConfig, dir: Option<&Path>) -> CliResult<RunSummary> {
    let ds = load_dataset(&cfg.dataset)?;
    // fail on an impossible split before any artifact exists
    split(&ds, cfg.train_count, cfg.seed)?;
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    }
    let runs = (0..cfg.runs)
        .into_par_iter()
        .map(|r| run_once(cfg, &ds, r, dir))
        .collect::<CliResult<Vec<_>>>()?;
    let summary = RunSummary {
        dataset: cfg.dataset.name.clone(),
        model: cfg.model.label(),
        d: ds.d(),
        n: ds.n_classes(),
        parameter_count: parameter_count(&cfg.model, ds.d(), ds.n_classes()),
        runs,
    };
    if let Some(dir) = dir {
        summary.write(&summary_path(dir))?;
    }
    Ok(summary)
}

fn fmt_stats(s: Option<Stats>) -> String {
    match s {
        Some(s) => format!("{:.2} ± {:.2} %", s.mean, s.std),
        None => "n/a".into(),
    }
}

pub fn cmd_train(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<RunSummary> {
    let summary = execute(cfg, Some(&cfg.out))?;
    writeln!(
        out,
        "{} {}: {} runs, d={}, N={}, {} parameters",
        summary.dataset,
        summary.model,
        summary.runs.len(),
        summary.d,
        summary.n,
        summary.parameter_count
    )
    .map_err(out_err)?;
    for r in &summary.runs {
        let line = match r.outcome {
            RunOutcome::Completed {
                train_accuracy,
                test_accuracy,
                epochs,
                converged,
            } => format!(
                "run {:03} seed {}: train {train_accuracy:.2}% test {test_accuracy:.2}% ({epochs} epochs{})",
                r.run,
                r.seed,
                if converged { ", converged" } else { "" }
            ),
            RunOutcome::Diverged { epoch } => {
                format!("run {:03} seed {}: diverged at epoch {epoch}", r.run, r.seed)
            }
        };
        writeln!(out, "{line}").map_err(out_err)?;
    }
    writeln!(out, "train accuracy {}", fmt_stats(summary.train_accuracy())).map_err(out_err)?;
    writeln!(out, "test accuracy  {}", fmt_stats(summary.test_accuracy())).map_err(out_err)?;
    writeln!(out, "artifacts in {}", cfg.out.display()).map_err(out_err)?;
    if summary.diverged() == summary.runs.len() {
        return Err(CliError::AllDiverged {
            runs: summary.runs.len(),
        });
    }
    Ok(summary)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitChoice {
    Train,
    Test,
    All,
}

/// Scores a parameter file on `entry`, rebuilding the run's split from the
/// seed and train count stored in the file.
pub fn cmd_evaluate(
    params: &ParamsFile,
    entry: &DatasetRegistryEntry,
    which: SplitChoice,
    out: &mut dyn Write,
) -> CliResult<Evaluation> {
    let ds = load_dataset(entry)?;
    if (ds.d(), ds.n_classes()) != (params.d, params.n) {
        return Err(CliError::Data(format!(
            "shape mismatch: parameters expect d={}, N={} but {} has d={}, N={}",
            params.d,
            params.n,
            entry.name,
            ds.d(),
            ds.n_classes()
        )));
    }
    let target = match which {
        SplitChoice::All => ds,
        SplitChoice::Train => split(&ds, params.train_count, params.seed)?.0,
        SplitChoice::Test => split(&ds, params.train_count, params.seed)?.1,
    };
    let eval = match &params.weights {
        Weights::Qunit(p) => QuditClassifier::new(params.n)
            .and_then(|clf| clf.evaluate(&target, p))
            .map_err(CliError::data)?,
        Weights::Fcnn(m) => fcnn_evaluate(m, &target),
    };
    writeln!(
        out,
        "{} {} ({:?} split, {} samples): accuracy {:.2}% ({}/{})",
        entry.name,
        params.model_name(),
        which,
        eval.total,
        eval.accuracy,
        eval.correct,
        eval.total
    )
    .map_err(out_err)?;
    for (name, acc) in target.label_names.iter().zip(&eval.per_class_accuracy) {
        writeln!(out, "  {name}: {acc:.2}%").map_err(out_err)?;
    }
    Ok(eval)
}

/// Trains two configurations on the same data and split seeds and prints
/// their accuracies and parameter counts side by side.
pub fn cmd_compare(
    a: &RunConfig,
    b: &RunConfig,
    dir: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<Vec<RunSummary>> {
    if a.dataset != b.dataset || a.train_count != b.train_count {
        return Err(CliError::Config(format!(
            "configs use different data ({} with {} training rows vs {} with {})",
            a.dataset.name, a.train_count, b.dataset.name, b.train_count
        )));
    }
    if a.seed != b.seed {
        return Err(CliError::Config(format!(
            "configs use different seeds ({} vs {})",
            a.seed, b.seed
        )));
    }
    let mut summaries = Vec::new();
    for (i, cfg) in [a, b].into_iter().enumerate() {
        let sub = dir.map(|d| d.join(format!("{}-{}", i, cfg.model.kind())));
        summaries.push(execute(cfg, sub.as_deref())?);
    }
    let first = &summaries[0];
    writeln!(out, "{} (d={}, N={})", first.dataset, first.d, first.n).map_err(out_err)?;
    writeln!(
        out,
        "{:<14} {:>6} {:>6} {:>18} {:>18}",
        "model", "runs", "params", "train", "test"
    )
    .map_err(out_err)?;
    for s in &summaries {
        writeln!(
            out,
            "{:<14} {:>6} {:>6} {:>18} {:>18}",
            s.model,
            s.runs.len() - s.diverged(),
            s.parameter_count,
            fmt_stats(s.train_accuracy()),
            fmt_stats(s.test_accuracy())
        )
        .map_err(out_err)?;
    }
    Ok(summaries)
}

pub fn cmd_inspect(path: &Path, out: &mut dyn Write) -> CliResult<()> {
    let p = ParamsFile::read(path)?;
    let mut w = |s: String| writeln!(out, "{s}").map_err(out_err);
    w(format!(
        "{} parameters for {} (d={}, N={}), seed {}",
        p.model_name(),
        p.dataset,
        p.d,
        p.n,
        p.seed
    ))?;
    w(format!(
        "train accuracy {:.2}%, test accuracy {:.2}%, {} epochs",
        p.train_accuracy, p.test_accuracy, p.epochs
    ))?;
    match &p.weights {
        Weights::Qunit(state) => {
            w(format!("parameter count {} (d + N² − 1)", state.len()))?;
            w(format!("w     = {:?}", state.w))?;
            w(format!("alpha = {:?}", state.alpha))?;
            let u = QuditClassifier::new(p.n)
                .and_then(|clf| clf.unitary(state))
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            w("U =".into())?;
            for r in 0..p.n {
                let row: Vec<String> = u
                    .matrix()
                    .row(r)
                    .iter()
                    .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                    .collect();
                w(format!("  [{}]", row.join(", ")))?;
            }
            w(format!("unitarity residual {:.3e}", u.matrix().unitarity_residual()))?;
            let det = u.matrix().determinant();
            w(format!("det U = {:+.6}{:+.6}i", det.re, det.im))?;
        }
        Weights::Fcnn(m) => {
            w(format!("parameter count {}", m.n_params()))?;
            for (i, l) in m.layers.iter().enumerate() {
                w(format!("layer {i}: {} -> {}", l.inputs, l.outputs))?;
                w(format!("  weights = {:?}", l.weights))?;
                w(format!("  bias    = {:?}", l.bias))?;
            }
        }
    }
    Ok(())
}
