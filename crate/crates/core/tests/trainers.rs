mod common;

use common::*;
use fidelity_moo::data::{make_synthetic, SplitFractions, SyntheticKind};
use fidelity_moo::linalg::{cholesky_solve, dot};
use fidelity_moo::losses::{loss, upstream_derivative, LossKind};
use fidelity_moo::moo::is_pareto_stationary;
use fidelity_moo::trainers::{
    train, train_black_box, train_jdist, train_joint_moo, train_joint_moo_observed, train_jsep,
    train_linear, train_stl, train_weighted, train_weighted_from, AlphaSchedule, Method, StepInfo,
    StopReason, TrainConfig,
};
use fidelity_moo::{Dataset, DenseMatrix, MlpModel, OutputKind, SplitTag, Task};

fn linear_regression() -> Dataset {
    make_synthetic(SyntheticKind::LinearRegression, 500, 5, 0.0, 3).unwrap()
}

fn small_classification() -> Dataset {
    make_synthetic(SyntheticKind::Nonlinear, 400, 6, 0.0, 5).unwrap()
}

fn quick(epochs: usize) -> TrainConfig {
    TrainConfig {
        max_epochs: epochs,
        hidden: vec![8, 8],
        batch_size: 32,
        ..TrainConfig::default()
    }
}

/// Least squares of `y` on `[x, 1]` via the normal equations.
fn ols(x: &DenseMatrix, y: &[f64]) -> Vec<f64> {
    let p = x.cols() + 1;
    let mut a = DenseMatrix::zeros(p, p);
    let mut rhs = vec![0.0; p];
    for (row, &yi) in x.iter_rows().zip(y) {
        let z: Vec<f64> = row.iter().copied().chain(std::iter::once(1.0)).collect();
        for i in 0..p {
            rhs[i] += z[i] * yi;
            for j in 0..p {
                a.set(i, j, a.get(i, j) + z[i] * z[j]);
            }
        }
    }
    cholesky_solve(&a, &rhs, 1e-14).unwrap()
}

#[test]
fn moo_reaches_both_optima_when_co_satisfiable() {
    let ds = linear_regression();
    for seed in [0, 1] {
        let cfg = TrainConfig {
            max_epochs: 300,
            hidden: vec![16, 16],
            lr_phi: 1e-2,
            seed,
            ..quick(0)
        };
        let out = train_joint_moo(&ds, &cfg).unwrap();
        let last = out.report.history.last().unwrap();
        assert!(last.l_pred <= 1e-3, "seed {seed}: {last:?}");
        assert!(last.l_pf <= 1e-3, "seed {seed}: {last:?}");
    }
}

#[test]
fn zero_predictive_gradient_puts_all_weight_on_it_and_stops() {
    let mut r = rng(4);
    let x = normal_matrix(&mut r, 200, 3);
    let teacher = MlpModel::init(
        3,
        &[8],
        OutputKind::RegressionScalar,
        &mut rng(fidelity_moo::seeds::derive_seed(0, 0)),
    );
    let y = teacher.forward_batch(&x).unwrap();
    let ds = Dataset::new(
        x,
        y,
        Task::Regression,
        vec!["a".into(), "b".into(), "c".into()],
    )
    .unwrap();
    let cfg = TrainConfig {
        hidden: vec![8],
        ..quick(20)
    };
    let mut alphas = Vec::new();
    let out = train_joint_moo_observed(&ds, &cfg, &mut |s: &StepInfo| {
        alphas.push((s.alpha, s.combined_norm))
    })
    .unwrap();
    assert!(alphas.iter().all(|&(a, n)| a == 1.0 && n == Some(0.0)));
    assert_eq!(out.model, teacher);
    assert_eq!(out.report.stopped_reason, StopReason::Stationary);
    assert_eq!(out.report.epochs_run, 1);
    assert_eq!(out.report.history[0].l_pred, 0.0);
}

#[test]
fn fidelity_keeps_falling_when_predictive_gradient_vanishes() {
    let mut r = rng(4);
    let x = normal_matrix(&mut r, 200, 3);
    let teacher = MlpModel::init(
        3,
        &[8],
        OutputKind::RegressionScalar,
        &mut rng(fidelity_moo::seeds::derive_seed(0, 0)),
    );
    let y = teacher.forward_batch(&x).unwrap();
    let ds = Dataset::new(
        x,
        y,
        Task::Regression,
        vec!["a".into(), "b".into(), "c".into()],
    )
    .unwrap();
    let cfg = TrainConfig {
        hidden: vec![8],
        ..quick(30)
    };
    let out = train_jsep(&ds, &cfg).unwrap();
    let pf: Vec<f64> = out.report.history.iter().map(|r| r.l_pf).collect();
    assert!(pf.windows(2).all(|w| w[1] <= w[0]), "{pf:?}");
    assert!(out.report.history.iter().all(|r| r.l_pred == 0.0));
}

#[test]
fn moo_steps_descend_both_objectives() {
    let ds = small_classification();
    let cfg = quick(15);
    let mut worst = (f64::INFINITY, f64::INFINITY);
    let mut steps = 0;
    train_joint_moo_observed(&ds, &cfg, &mut |s: &StepInfo| {
        steps += 1;
        if s.combined_norm.unwrap() > cfg.stationarity_tol {
            let scale = s.g_pred_norm.powi(2) + s.g_pf_norm.unwrap().powi(2);
            worst.0 = worst.0.min(s.d_dot_pred / scale.max(1e-300));
            worst.1 = worst.1.min(s.d_dot_pf.unwrap() / scale.max(1e-300));
        }
    })
    .unwrap();
    assert!(steps > 100);
    assert!(worst.0 >= -1e-12 && worst.1 >= -1e-12, "{worst:?}");
}

#[test]
fn fidelity_trend_is_non_increasing_after_burn_in() {
    let ds = linear_regression();
    let cfg = TrainConfig {
        max_epochs: 200,
        hidden: vec![16, 16],
        lr_phi: 1e-2,
        ..quick(0)
    };
    let out = train_joint_moo(&ds, &cfg).unwrap();
    let pf: Vec<f64> = out.report.history.iter().map(|r| r.l_pf).collect();
    let burn = pf.len() / 10;
    let window = 10;
    let smooth: Vec<f64> = pf[burn..]
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect();
    let blocks: Vec<f64> = smooth.chunks(window).map(|c| c[0]).collect();
    assert!(
        blocks.windows(2).all(|w| w[1] <= w[0] * 1.05),
        "smoothed fidelity rose: {blocks:?}"
    );
    assert!(smooth.last().unwrap() < &smooth[0]);
}

#[test]
fn stationary_exit_is_really_stationary() {
    let ds = small_classification();
    let cfg = TrainConfig {
        stationarity_tol: 5e-3,
        ..quick(200)
    };
    let out = train_joint_moo(&ds, &cfg).unwrap();
    assert_eq!(out.report.stopped_reason, StopReason::Stationary);
    let train_part = ds.part(SplitTag::Train);
    let cache = out.model.forward_cached(&train_part.x).unwrap();
    let f = cache.outputs();
    let g = out.surrogate.unwrap().predict_batch(&train_part.x).unwrap();
    let up_pred = upstream_derivative(f, &train_part.y, LossKind::BinaryCrossEntropy).unwrap();
    let up_pf = upstream_derivative(f, &g, LossKind::PointFidelity).unwrap();
    let g_pred = out.model.backward_cached(&cache, &up_pred).unwrap();
    let g_pf = out.model.backward_cached(&cache, &up_pf).unwrap();
    assert!(is_pareto_stationary(&g_pred, &g_pf, cfg.stationarity_tol).unwrap());
}

#[test]
fn runs_are_bit_reproducible() {
    let ds = small_classification();
    for m in ["moo", "stl", "rnd", "jsep", "jdist", "linear", "gs:0.3"] {
        let cfg = quick(5).with_method(m.parse().unwrap()).with_seed(9);
        let a = train(&ds, &cfg).unwrap();
        let b = train(&ds, &cfg).unwrap();
        assert_eq!(a, b, "{m}");
        assert!(a
            .report
            .history
            .iter()
            .all(|r| r.l_pred.is_finite() && r.l_pf.is_finite()));
    }
}

#[test]
fn stl_surrogate_matches_least_squares() {
    let ds = make_synthetic(SyntheticKind::Nonlinear, 300, 4, 0.0, 2).unwrap();
    // regression view of the same features so the black-box output is unbounded
    let reg = Dataset::new(
        ds.features.clone(),
        ds.features
            .iter_rows()
            .map(|r| r[0] * r[1] + r[2])
            .collect(),
        Task::Regression,
        ds.feature_names.clone(),
    )
    .unwrap()
    .with_split(SplitFractions::default(), 1)
    .unwrap();
    let cfg = TrainConfig {
        surrogate_fit_budget: 200_000,
        surrogate_fit_tol: 1e-12,
        ..quick(20)
    }
    .with_method(Method::Stl);
    let out = train_stl(&reg, &cfg).unwrap();
    let train_part = reg.part(SplitTag::Train);
    let f = out.model.forward_batch(&train_part.x).unwrap();
    let expect = ols(&train_part.x, &f);
    let got = out.surrogate.unwrap().params();
    let err = got
        .iter()
        .zip(&expect)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-4, "max deviation {err}: {got:?} vs {expect:?}");
}

#[test]
fn stl_on_linear_data_has_small_global_fidelity() {
    let cfg = TrainConfig {
        hidden: vec![16, 16],
        ..quick(1000)
    };
    let out = train_stl(&linear_regression(), &cfg.with_method(Method::Stl)).unwrap();
    assert!(
        out.report.final_metrics.gf.unwrap() <= 1e-3,
        "{:?}",
        out.report.final_metrics
    );
    assert!(out.report.surrogate_fit_steps.unwrap() > 0);
}

#[test]
fn jsep_black_box_follows_stl_exactly() {
    let ds = small_classification();
    let cfg = quick(6);
    let stl = train_stl(&ds, &cfg.clone().with_method(Method::Stl)).unwrap();
    let jsep = train_jsep(&ds, &cfg.clone().with_method(Method::Jsep)).unwrap();
    assert_eq!(stl.model, jsep.model);
    let l_pred = |o: &fidelity_moo::TrainOutcome| {
        o.report
            .history
            .iter()
            .map(|r| r.l_pred)
            .collect::<Vec<_>>()
    };
    assert_eq!(l_pred(&stl), l_pred(&jsep));
}

#[test]
fn jsep_is_less_faithful_than_moo() {
    let ds = small_classification();
    let cfg = quick(40);
    let moo = train_joint_moo(&ds, &cfg).unwrap();
    let jsep = train_jsep(&ds, &cfg.clone().with_method(Method::Jsep)).unwrap();
    assert!(jsep.report.final_metrics.gf.unwrap() >= moo.report.final_metrics.gf.unwrap());
}

#[test]
fn uni_equals_gs_half() {
    let ds = small_classification();
    let uni = train(&ds, &quick(5).with_method(Method::Uni)).unwrap();
    let gs = train(&ds, &quick(5).with_method(Method::Gs(0.5))).unwrap();
    assert_eq!(uni.model, gs.model);
    assert_eq!(uni.surrogate, gs.surrogate);
    assert_eq!(uni.report.history, gs.report.history);
    assert_eq!(uni.report.final_metrics, gs.report.final_metrics);
    assert_eq!(uni.report.method, "uni");
    assert_eq!(gs.report.method, "gs:0.5");
}

#[test]
fn heavier_predictive_weight_costs_fidelity() {
    let ds = small_classification();
    for seed in 0..3 {
        let cfg = quick(30).with_seed(seed);
        let lo = train_weighted(
            &ds,
            &cfg.clone().with_method(Method::Gs(0.1)),
            AlphaSchedule::Constant(0.1),
        )
        .unwrap();
        let hi = train_weighted(
            &ds,
            &cfg.clone().with_method(Method::Gs(0.9)),
            AlphaSchedule::Constant(0.9),
        )
        .unwrap();
        assert!(
            hi.report.final_metrics.gf.unwrap() >= lo.report.final_metrics.gf.unwrap(),
            "seed {seed}"
        );
    }
}

#[test]
fn random_schedule_is_seeded() {
    let ds = small_classification();
    let trace = |seed| {
        let mut alphas = Vec::new();
        let cfg = quick(2).with_method(Method::Rnd).with_seed(seed);
        let out = train_weighted(&ds, &cfg, AlphaSchedule::RandomUniform).unwrap();
        for r in &out.report.history {
            alphas.push(r.alpha);
        }
        alphas
    };
    let a = trace(1);
    assert_eq!(a, trace(1));
    assert_ne!(a, trace(2));
    assert!(a.iter().all(|&x| x > 0.0 && x < 1.0));
}

#[test]
fn jdist_without_distillation_is_uni_from_the_teacher() {
    let ds = small_classification();
    let cfg = quick(4);
    let teacher = train_black_box(&ds, &cfg).unwrap();
    let cfg0 = TrainConfig {
        distill_weight: 0.0,
        ..cfg.clone()
    };
    let jd = train_jdist(&ds, &cfg0.clone().with_method(Method::Jdist), &teacher).unwrap();
    let uni = train_weighted_from(
        &ds,
        &cfg0.with_method(Method::Uni),
        AlphaSchedule::Constant(0.5),
        Some(&teacher),
    )
    .unwrap();
    assert_eq!(jd.model, uni.model);
    assert_eq!(jd.surrogate, uni.surrogate);
    assert_eq!(jd.report.history, uni.report.history);
}

#[test]
fn jdist_converges_when_teacher_is_linear_and_exact() {
    let mut r = rng(12);
    let x = normal_matrix(&mut r, 400, 4);
    let teacher = MlpModel::init(4, &[], OutputKind::RegressionScalar, &mut r);
    let y = teacher.forward_batch(&x).unwrap();
    let names = (0..4).map(|j| format!("x{j}")).collect();
    let ds = Dataset::new(x, y, Task::Regression, names)
        .unwrap()
        .with_split(SplitFractions::default(), 0)
        .unwrap();
    let cfg = TrainConfig {
        hidden: vec![],
        lr_phi: 1e-2,
        ..quick(150)
    }
    .with_method(Method::Jdist);
    let out = train_jdist(&ds, &cfg, &teacher).unwrap();
    let train_part = ds.part(SplitTag::Train);
    let f = out.model.forward_batch(&train_part.x).unwrap();
    let t = teacher.forward_batch(&train_part.x).unwrap();
    let g = out.surrogate.unwrap().predict_batch(&train_part.x).unwrap();
    assert!(loss(&f, &train_part.y, LossKind::Mse).unwrap() <= 1e-3);
    assert!(loss(&t, &f, LossKind::Distill).unwrap() <= 1e-3);
    assert!(loss(&f, &g, LossKind::PointFidelity).unwrap() <= 1e-3);
}

#[test]
fn linear_baseline_fits_exact_linear_data() {
    let ds = linear_regression();
    let (g, report) = train_linear(&ds, &quick(300).with_method(Method::Linear)).unwrap();
    assert!(
        report.final_metrics.task_metric <= 1e-4,
        "{:?}",
        report.final_metrics
    );
    assert_eq!(report.final_metrics.gf, None);
    assert_eq!(report.final_metrics.train_l_pf, None);
    let again = train_linear(&ds, &quick(300).with_method(Method::Linear)).unwrap();
    assert_eq!((g.clone(), report), again);
    let test = ds.part(SplitTag::Test);
    let pred = g.predict_batch(&test.x).unwrap();
    assert!(dot(&pred, &pred).is_finite());
}

#[test]
fn divergence_names_the_epoch() {
    let ds = small_classification();
    let cfg = TrainConfig {
        lr_theta: 1e300,
        ..quick(5)
    };
    match train(&ds, &cfg.with_method(Method::Stl)) {
        Err(fidelity_moo::Error::Diverged { epoch, .. }) => assert!(epoch >= 1),
        Ok(_) => {}
        Err(e) => panic!("unexpected error {e}"),
    }
}
