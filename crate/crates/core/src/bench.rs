//! Training loop, metrics and the results table.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{Adam, GradBuffer, Graph};
use crate::dataset::{Dataset, Sample};
use crate::exec::Exec;
use crate::models::{Input, Model, ModelError, ModelKind, RunConfig};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("training diverged in epoch {epoch}: loss is {loss}")]
    Divergence { epoch: usize, loss: f64 },
    #[error("the {0} split is empty")]
    EmptySplit(&'static str),
}

/// Binary classification metrics; class 1 is the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        Self {
            accuracy: ratio(tp + tn, tp + fp + tn + fn_),
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_),
            tp,
            fp,
            tn,
            fn_,
        }
    }

    pub fn from_predictions(predicted: &[usize], labels: &[usize]) -> Self {
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for (&p, &l) in predicted.iter().zip(labels) {
            match (p == 1, l == 1) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fn_ += 1,
            }
        }
        Self::from_counts(tp, fp, tn, fn_)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train: Metrics,
    pub test: Metrics,
    /// Wall time of the training pass only.
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub model: ModelKind,
    pub parameters: usize,
    pub initial_test: Metrics,
    pub history: Vec<EpochMetrics>,
}

impl TrainReport {
    pub fn final_test(&self) -> Metrics {
        self.history.last().map_or(self.initial_test, |e| e.test)
    }

    pub fn median_epoch_seconds(&self) -> f64 {
        let mut t: Vec<f64> = self.history.iter().map(|e| e.seconds).collect();
        if t.is_empty() {
            return 0.0;
        }
        t.sort_by(f64::total_cmp);
        let n = t.len();
        if n % 2 == 1 {
            t[n / 2]
        } else {
            0.5 * (t[n / 2 - 1] + t[n / 2])
        }
    }
}

/// Model inputs for both splits, prepared once.
pub struct PreparedData {
    pub train: Vec<Input>,
    pub train_labels: Vec<usize>,
    pub test: Vec<Input>,
    pub test_labels: Vec<usize>,
}

pub fn prepare_split(model: &Model, samples: &[Sample], exec: Exec) -> Result<(Vec<Input>, Vec<usize>), ModelError> {
    let inputs = exec
        .map(samples, |_, s| model.prepare(&s.mesh))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok((inputs, samples.iter().map(|s| s.label).collect()))
}

pub fn prepare(model: &Model, data: &Dataset, exec: Exec) -> Result<PreparedData, ModelError> {
    if model.kind().uses_template() && !data.shares_template() {
        return Err(ModelError::Template(format!(
            "{} cannot train on a dataset with varying topology",
            model.kind()
        )));
    }
    let (train, train_labels) = prepare_split(model, &data.train, exec)?;
    let (test, test_labels) = prepare_split(model, &data.test, exec)?;
    Ok(PreparedData {
        train,
        train_labels,
        test,
        test_labels,
    })
}

fn argmax(l: [f64; 2]) -> usize {
    usize::from(l[1] > l[0])
}

/// Predicted class per input.
pub fn predict(model: &Model, inputs: &[Input], exec: Exec) -> Result<Vec<usize>, ModelError> {
    exec.map(inputs, |_, inp| model.logits(inp).map(argmax)).into_iter().collect()
}

pub fn evaluate(model: &Model, inputs: &[Input], labels: &[usize], exec: Exec) -> Result<Metrics, TrainError> {
    if inputs.is_empty() {
        return Err(TrainError::EmptySplit("evaluation"));
    }
    Ok(Metrics::from_predictions(&predict(model, inputs, exec)?, labels))
}

struct SampleStep {
    loss: f64,
    predicted: usize,
    grads: GradBuffer,
}

fn sample_step(model: &Model, input: &Input, label: usize) -> Result<SampleStep, ModelError> {
    let mut g = Graph::with_params(&model.params);
    let logits = model.forward(&mut g, input)?;
    let v = g.value(logits).data();
    let predicted = usize::from(v[1] > v[0]);
    let loss = g.cross_entropy(logits, &[label])?;
    let grads = g.backward(loss)?;
    Ok(SampleStep {
        loss: g.value(loss).item(),
        predicted,
        grads: g.param_grads(&grads),
    })
}

/// Seeded mini-batch Adam. Per-sample gradients may be computed in parallel;
/// they are summed in sample order, so the result does not depend on `exec`.
pub fn train(model: &mut Model, data: &PreparedData, exec: Exec) -> Result<TrainReport, TrainError> {
    if data.train.is_empty() {
        return Err(TrainError::EmptySplit("train"));
    }
    if data.test.is_empty() {
        return Err(TrainError::EmptySplit("test"));
    }
    model.fit_normalization(&data.train);
    let cfg: RunConfig = model.config.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut adam = Adam::new(cfg.optimizer);
    let initial_test = evaluate(model, &data.test, &data.test_labels, exec)?;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    for epoch in 1..=cfg.epochs {
        let start = Instant::now();
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut predicted = vec![0usize; data.train.len()];
        for batch in order.chunks(cfg.batch_size) {
            let steps: Vec<Result<SampleStep, ModelError>> =
                exec.map(batch, |_, &i| sample_step(model, &data.train[i], data.train_labels[i]));
            let mut total = GradBuffer::empty(model.params.len());
            for (step, &i) in steps.into_iter().zip(batch) {
                let step = step?;
                if !step.loss.is_finite() {
                    return Err(TrainError::Divergence { epoch, loss: step.loss });
                }
                loss_sum += step.loss;
                predicted[i] = step.predicted;
                total.merge(&step.grads);
            }
            model.params.zero_grad();
            model.params.accumulate(&total, 1.0 / batch.len() as f64);
            adam.step(&mut model.params).map_err(ModelError::from)?;
            if model.params.iter().any(|p| p.value.data().iter().any(|v| !v.is_finite())) {
                return Err(TrainError::Divergence { epoch, loss: f64::NAN });
            }
        }
        let seconds = start.elapsed().as_secs_f64();
        let test = evaluate(model, &data.test, &data.test_labels, exec)?;
        history.push(EpochMetrics {
            epoch,
            train_loss: loss_sum / data.train.len() as f64,
            train: Metrics::from_predictions(&predicted, &data.train_labels),
            test,
            seconds,
        });
    }
    Ok(TrainReport {
        model: model.kind(),
        parameters: model.parameter_count(),
        initial_test,
        history,
    })
}

/// One row of the results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub template: bool,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub parameters: usize,
    pub median_epoch_seconds: f64,
}

impl ReportRow {
    pub fn from_run(kind: ModelKind, metrics: &Metrics, parameters: usize, median_epoch_seconds: f64) -> Self {
        Self {
            method: kind.method_name().to_string(),
            template: kind.uses_template(),
            accuracy: metrics.accuracy,
            precision: metrics.precision,
            recall: metrics.recall,
            parameters,
            median_epoch_seconds,
        }
    }
}

/// Plain-text table with columns Method, Template, Acc(%), Prec, Rec, #Params.
pub fn format_table(rows: &[ReportRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<12} {:>8} {:>7} {:>6} {:>6} {:>9}", "Method", "Template", "Acc(%)", "Prec", "Rec", "#Params");
    for r in rows {
        let _ = writeln!(
            s,
            "{:<12} {:>8} {:>7.1} {:>6.2} {:>6.2} {:>9}",
            r.method,
            if r.template { "yes" } else { "no" },
            100.0 * r.accuracy,
            r.precision,
            r.recall,
            r.parameters
        );
    }
    s
}
