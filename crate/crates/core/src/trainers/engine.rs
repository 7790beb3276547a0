use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{Method, TrainConfig};
use super::report::{EpochRecord, FinalMetrics, StopReason, TrainReport};
use crate::data::{Dataset, Part, SplitTag, Task};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::losses::{loss, upstream_derivative, LossKind};
use crate::metrics::{global_fidelity, task_metric};
use crate::moo::{combine_direction, is_pareto_stationary, solve_alpha};
use crate::nn::{GradientVector, MlpModel};
use crate::optim::AdamState;
use crate::seeds::{derive_seed, stream};
use crate::surrogate::LinearSurrogate;

/// How the black-box update weighs the predictive gradient when it is not chosen by
/// MGDA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSchedule {
    Constant(f64),
    /// Fresh `α ~ U(0, 1)` every step from the run's seeded alpha stream.
    RandomUniform,
}

/// Per-step diagnostics handed to an observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub epoch: usize,
    pub step: usize,
    pub alpha: f64,
    /// `‖d_θ‖` as reported by the α solver (MGDA only).
    pub combined_norm: Option<f64>,
    pub d_dot_pred: f64,
    /// Absent when the step did not use the fidelity gradient.
    pub d_dot_pf: Option<f64>,
    pub g_pred_norm: f64,
    pub g_pf_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// The trained black-box; for the linear baseline, the single-layer predictor.
    pub model: MlpModel,
    pub surrogate: Option<LinearSurrogate>,
    pub report: TrainReport,
}

enum Direction<'a> {
    PredOnly,
    Mgda,
    Weighted(AlphaSchedule),
    Distill { teacher: &'a MlpModel, weight: f64 },
}

struct LoopSpec<'a> {
    direction: Direction<'a>,
    update_surrogate: bool,
    check_stationary: bool,
    init: Option<&'a MlpModel>,
    hidden: &'a [usize],
}

struct LoopResult {
    model: MlpModel,
    surrogate: LinearSurrogate,
    history: Vec<EpochRecord>,
    stopped: StopReason,
}

type Observer<'o> = &'o mut dyn FnMut(&StepInfo);

fn pred_loss_kind(task: Task) -> LossKind {
    match task {
        Task::BinaryClassification => LossKind::BinaryCrossEntropy,
        Task::Regression => LossKind::Mse,
    }
}

fn train_part(ds: &Dataset) -> Result<Part> {
    let train = ds.part(SplitTag::Train);
    if train.is_empty() {
        return Err(Error::Invalid("training split is empty".into()));
    }
    Ok(train)
}

fn diverged(epoch: usize, what: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::NonFinite(_) => Error::Diverged { epoch, what },
        other => other,
    }
}

fn run_loop(
    ds: &Dataset,
    cfg: &TrainConfig,
    spec: LoopSpec<'_>,
    observer: Observer<'_>,
) -> Result<LoopResult> {
    cfg.validate()?;
    let train = train_part(ds)?;
    let (n, d) = (train.len(), ds.n_features());
    let pred_kind = pred_loss_kind(ds.task);

    let mut model = match spec.init {
        Some(m) => {
            if m.input_dim() != d || m.output_kind() != ds.task.output_kind() {
                return Err(Error::Invalid(
                    "initial model does not fit the dataset".into(),
                ));
            }
            m.clone()
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, stream::INIT));
            MlpModel::init(d, spec.hidden, ds.task.output_kind(), &mut rng)
        }
    };
    let mut params = model.flatten_params();
    let mut adam_theta = AdamState::new(params.len());
    let mut surrogate = LinearSurrogate::zeros(d);
    let mut phi = surrogate.params();
    let mut adam_phi = AdamState::new(phi.len());
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, stream::SHUFFLE));
    let mut alpha_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, stream::ALPHA));

    let teacher_out = match spec.direction {
        Direction::Distill { teacher, .. } => Some(teacher.forward_batch(&train.x)?),
        _ => None,
    };

    let batch_size = cfg.batch_size.min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::new();
    let mut stopped = StopReason::Budget;
    let mut step = 0usize;

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let mut alpha_sum = 0.0;
        let mut steps_in_epoch = 0usize;
        for chunk in order.chunks(batch_size) {
            let xb = train.x.select_rows(chunk);
            let yb: Vec<f64> = chunk.iter().map(|&i| train.y[i]).collect();
            let cache = model.forward_cached(&xb)?;
            let fo = cache.outputs();

            if spec.update_surrogate {
                // black-box outputs are a fixed target here
                for _ in 0..cfg.surrogate_steps {
                    let go = surrogate.predict_batch(&xb)?;
                    let resid: Vec<f64> = fo.iter().zip(&go).map(|(f, g)| f - g).collect();
                    let grad = surrogate.grad_point_fidelity(&xb, &resid)?;
                    adam_phi
                        .step(&mut phi, &grad, cfg.lr_phi)
                        .map_err(diverged(epoch, "surrogate gradient"))?;
                    surrogate.set_params(&phi)?;
                }
            }

            let up_pred = upstream_derivative(fo, &yb, pred_kind)
                .map_err(diverged(epoch, "predictive loss"))?;
            let g_pred = model.backward_cached(&cache, &up_pred)?;
            let pf_grad = |surrogate: &LinearSurrogate| -> Result<GradientVector> {
                let go = surrogate.predict_batch(&xb)?;
                let up = upstream_derivative(fo, &go, LossKind::PointFidelity)
                    .map_err(diverged(epoch, "fidelity loss"))?;
                model.backward_cached(&cache, &up)
            };

            let mut combined_norm = None;
            let (direction, alpha, g_pf) = match &spec.direction {
                Direction::PredOnly => (g_pred.clone(), 1.0, None),
                Direction::Mgda => {
                    let g_pf = pf_grad(&surrogate)?;
                    let sol = solve_alpha(&g_pred, &g_pf).map_err(diverged(epoch, "gradients"))?;
                    combined_norm = Some(sol.combined_norm);
                    (
                        combine_direction(sol.alpha, &g_pred, &g_pf)?,
                        sol.alpha,
                        Some(g_pf),
                    )
                }
                Direction::Weighted(schedule) => {
                    let g_pf = pf_grad(&surrogate)?;
                    let a = match *schedule {
                        AlphaSchedule::Constant(a) => a,
                        AlphaSchedule::RandomUniform => loop {
                            let a: f64 = alpha_rng.random();
                            if a > 0.0 {
                                break a;
                            }
                        },
                    };
                    (combine_direction(a, &g_pred, &g_pf)?, a, Some(g_pf))
                }
                Direction::Distill { weight, .. } => {
                    let g_pf = pf_grad(&surrogate)?;
                    let mut dir: Vec<f64> = g_pred
                        .iter()
                        .zip(g_pf.iter())
                        .map(|(a, b)| 0.5 * a + 0.5 * b)
                        .collect();
                    if *weight != 0.0 {
                        let tb: Vec<f64> = chunk
                            .iter()
                            .map(|&i| teacher_out.as_ref().expect("teacher outputs")[i])
                            .collect();
                        let up = upstream_derivative(fo, &tb, LossKind::Distill)
                            .map_err(diverged(epoch, "distillation loss"))?;
                        let g_dist = model.backward_cached(&cache, &up)?;
                        for (di, gi) in dir.iter_mut().zip(g_dist.iter()) {
                            *di += 0.5 * weight * gi;
                        }
                    }
                    (GradientVector::from(dir), 0.5, Some(g_pf))
                }
            };

            step += 1;
            steps_in_epoch += 1;
            alpha_sum += alpha;
            observer(&StepInfo {
                epoch,
                step,
                alpha,
                combined_norm,
                d_dot_pred: dot(&direction, &g_pred),
                d_dot_pf: g_pf.as_ref().map(|g| dot(&direction, g)),
                g_pred_norm: dot(&g_pred, &g_pred).sqrt(),
                g_pf_norm: g_pf.as_ref().map(|g| dot(g, g).sqrt()),
            });

            adam_theta
                .step(&mut params, &direction, cfg.lr_theta)
                .map_err(diverged(epoch, "black-box gradient"))?;
            model.set_params(&params)?;
        }

        let cache = model.forward_cached(&train.x)?;
        let fo = cache.outputs();
        let go = surrogate.predict_batch(&train.x)?;
        let l_pred = loss(fo, &train.y, pred_kind).map_err(diverged(epoch, "predictive loss"))?;
        let l_pf =
            loss(fo, &go, LossKind::PointFidelity).map_err(diverged(epoch, "fidelity loss"))?;
        if !l_pred.is_finite() {
            return Err(Error::Diverged {
                epoch,
                what: "predictive loss",
            });
        }
        if !l_pf.is_finite() {
            return Err(Error::Diverged {
                epoch,
                what: "fidelity loss",
            });
        }
        history.push(EpochRecord {
            epoch,
            l_pred,
            l_pf,
            alpha: alpha_sum / steps_in_epoch.max(1) as f64,
        });

        if spec.check_stationary {
            let g_pred =
                model.backward_cached(&cache, &upstream_derivative(fo, &train.y, pred_kind)?)?;
            let g_pf = model.backward_cached(
                &cache,
                &upstream_derivative(fo, &go, LossKind::PointFidelity)?,
            )?;
            if is_pareto_stationary(&g_pred, &g_pf, cfg.stationarity_tol)? {
                stopped = StopReason::Stationary;
                break;
            }
        }
    }

    Ok(LoopResult {
        model,
        surrogate,
        history,
        stopped,
    })
}

/// Full-batch Adam fit of the surrogate to a frozen black-box.
///
/// Stops when the fidelity loss improves by less than `cfg.surrogate_fit_tol`
/// across a 100-step window, or after `cfg.surrogate_fit_budget` steps.
fn fit_surrogate_frozen(
    model: &MlpModel,
    x: &crate::linalg::DenseMatrix,
    cfg: &TrainConfig,
) -> Result<(LinearSurrogate, usize)> {
    const WINDOW: usize = 100;
    let fo = model.forward_batch(x)?;
    let mut g = LinearSurrogate::zeros(x.cols());
    let mut phi = g.params();
    let mut adam = AdamState::new(phi.len());
    let mut last = f64::INFINITY;
    let mut steps = 0;
    while steps < cfg.surrogate_fit_budget {
        let go = g.predict_batch(x)?;
        let resid: Vec<f64> = fo.iter().zip(&go).map(|(f, g)| f - g).collect();
        let grad = g.grad_point_fidelity(x, &resid)?;
        adam.step(&mut phi, &grad, cfg.lr_phi)?;
        g.set_params(&phi)?;
        steps += 1;
        if steps % WINDOW == 0 {
            let l = loss(&fo, &g.predict_batch(x)?, LossKind::PointFidelity)?;
            if last - l < cfg.surrogate_fit_tol {
                break;
            }
            last = l;
        }
    }
    Ok((g, steps))
}

fn finish(
    ds: &Dataset,
    cfg: &TrainConfig,
    method: String,
    res: LoopResult,
    with_surrogate: bool,
    surrogate_fit_steps: Option<usize>,
) -> Result<TrainOutcome> {
    let test = ds.part(SplitTag::Test);
    let eval = if test.is_empty() {
        train_part(ds)?
    } else {
        test
    };
    let outputs = res.model.forward_batch(&eval.x)?;
    let metric = task_metric(ds.task, &outputs, &eval.y)?;
    let gf = if with_surrogate {
        Some(global_fidelity(&res.model, &res.surrogate, &eval.x)?)
    } else {
        None
    };
    let last = res.history.last();
    let train_l_pred = last.map_or(f64::NAN, |r| r.l_pred);
    let train_l_pf = if with_surrogate {
        last.map(|r| r.l_pf)
    } else {
        None
    };
    let report = TrainReport {
        method,
        seed: cfg.seed,
        epochs_run: res.history.len(),
        stopped_reason: res.stopped,
        history: res.history,
        final_metrics: FinalMetrics {
            task_metric_name: ds.task.metric_name().to_string(),
            task_metric: metric,
            gf,
            gnf: None,
            train_l_pred,
            train_l_pf,
        },
        surrogate_fit_steps,
    };
    Ok(TrainOutcome {
        model: res.model,
        surrogate: with_surrogate.then_some(res.surrogate),
        report,
    })
}

fn noop() -> impl FnMut(&StepInfo) {
    |_: &StepInfo| {}
}

/// Joint training with the MGDA direction (the surrogate-aware method).
pub fn train_joint_moo(ds: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_joint_moo_observed(ds, cfg, &mut noop())
}

pub fn train_joint_moo_observed(
    ds: &Dataset,
    cfg: &TrainConfig,
    observer: Observer<'_>,
) -> Result<TrainOutcome> {
    let spec = LoopSpec {
        direction: Direction::Mgda,
        update_surrogate: true,
        check_stationary: true,
        init: None,
        hidden: &cfg.hidden,
    };
    let res = run_loop(ds, cfg, spec, observer)?;
    finish(ds, cfg, Method::Moo.to_string(), res, true, None)
}

/// Black-box on the predictive loss alone, without a surrogate.
pub fn train_black_box(ds: &Dataset, cfg: &TrainConfig) -> Result<MlpModel> {
    let spec = LoopSpec {
        direction: Direction::PredOnly,
        update_surrogate: false,
        check_stationary: false,
        init: None,
        hidden: &cfg.hidden,
    };
    Ok(run_loop(ds, cfg, spec, &mut noop())?.model)
}

/// Single-task learning: train the black-box, then fit the surrogate to it.
pub fn train_stl(ds: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let spec = LoopSpec {
        direction: Direction::PredOnly,
        update_surrogate: false,
        check_stationary: false,
        init: None,
        hidden: &cfg.hidden,
    };
    let mut res = run_loop(ds, cfg, spec, &mut noop())?;
    let train = train_part(ds)?;
    let (g, steps) = fit_surrogate_frozen(&res.model, &train.x, cfg)?;
    res.surrogate = g;
    // final fidelity row reflects the fitted surrogate
    if let Some(last) = res.history.last_mut() {
        let fo = res.model.forward_batch(&train.x)?;
        last.l_pf = loss(
            &fo,
            &res.surrogate.predict_batch(&train.x)?,
            LossKind::PointFidelity,
        )?;
    }
    finish(ds, cfg, Method::Stl.to_string(), res, true, Some(steps))
}

/// Fixed-weight or random-weight scalarisation (UNI, GS, RND).
pub fn train_weighted(
    ds: &Dataset,
    cfg: &TrainConfig,
    schedule: AlphaSchedule,
) -> Result<TrainOutcome> {
    train_weighted_from(ds, cfg, schedule, None)
}

/// [`train_weighted`] starting from a given black-box instead of a fresh init.
pub fn train_weighted_from(
    ds: &Dataset,
    cfg: &TrainConfig,
    schedule: AlphaSchedule,
    init: Option<&MlpModel>,
) -> Result<TrainOutcome> {
    if let AlphaSchedule::Constant(a) = schedule {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::Config(format!("alpha {a} outside [0, 1]")));
        }
    }
    let spec = LoopSpec {
        direction: Direction::Weighted(schedule),
        update_surrogate: true,
        check_stationary: true,
        init,
        hidden: &cfg.hidden,
    };
    let res = run_loop(ds, cfg, spec, &mut noop())?;
    let tag = match (cfg.method, schedule) {
        (m @ (Method::Uni | Method::Gs(_) | Method::Rnd), _) => m.to_string(),
        (_, AlphaSchedule::Constant(a)) => Method::Gs(a).to_string(),
        (_, AlphaSchedule::RandomUniform) => Method::Rnd.to_string(),
    };
    finish(ds, cfg, tag, res, true, None)
}

/// Joint training where each model follows only its own loss.
pub fn train_jsep(ds: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let spec = LoopSpec {
        direction: Direction::PredOnly,
        update_surrogate: true,
        check_stationary: false,
        init: None,
        hidden: &cfg.hidden,
    };
    let res = run_loop(ds, cfg, spec, &mut noop())?;
    finish(ds, cfg, Method::Jsep.to_string(), res, true, None)
}

/// Distillation-regularised joint training: the student starts as a copy of `teacher`
/// and follows `½(∇L_pred + w·∇L_dist) + ½∇L_PF`.
pub fn train_jdist(ds: &Dataset, cfg: &TrainConfig, teacher: &MlpModel) -> Result<TrainOutcome> {
    let spec = LoopSpec {
        direction: Direction::Distill {
            teacher,
            weight: cfg.distill_weight,
        },
        update_surrogate: true,
        check_stationary: false,
        init: Some(teacher),
        hidden: &cfg.hidden,
    };
    let res = run_loop(ds, cfg, spec, &mut noop())?;
    finish(ds, cfg, Method::Jdist.to_string(), res, true, None)
}

/// Linear predictor trained directly on the targets (sigmoid link for
/// classification). Returns the coefficients as a [`LinearSurrogate`].
pub fn train_linear(ds: &Dataset, cfg: &TrainConfig) -> Result<(LinearSurrogate, TrainReport)> {
    let out = train_linear_outcome(ds, cfg)?;
    let layer = &out.model.layers()[0];
    let g = LinearSurrogate::new(layer.weight.row(0).to_vec(), layer.bias[0])?;
    Ok((g, out.report))
}

fn train_linear_outcome(ds: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let spec = LoopSpec {
        direction: Direction::PredOnly,
        update_surrogate: false,
        check_stationary: false,
        init: None,
        hidden: &[],
    };
    let res = run_loop(ds, cfg, spec, &mut noop())?;
    finish(ds, cfg, Method::Linear.to_string(), res, false, None)
}

/// Dispatches on `cfg.method`. J-DIST first trains its teacher with the STL
/// black-box phase under the same config.
pub fn train(ds: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    match cfg.method {
        Method::Moo => train_joint_moo(ds, cfg),
        Method::Stl => train_stl(ds, cfg),
        Method::Uni => train_weighted(ds, cfg, AlphaSchedule::Constant(0.5)),
        Method::Gs(a) => train_weighted(ds, cfg, AlphaSchedule::Constant(a)),
        Method::Rnd => train_weighted(ds, cfg, AlphaSchedule::RandomUniform),
        Method::Jsep => train_jsep(ds, cfg),
        Method::Jdist => {
            let teacher = train_black_box(ds, cfg)?;
            train_jdist(ds, cfg, &teacher)
        }
        Method::Linear => train_linear_outcome(ds, cfg),
    }
}
