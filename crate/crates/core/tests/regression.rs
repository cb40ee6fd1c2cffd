use indexlab::dataset::{bundled_table_a1, Dataset, Series, IDESI, IDESI_DIMENSIONS, SII};
use indexlab::regression::{
    anova, casewise_diagnostics, collinearity_series, durbin_watson_statistic, durbin_watson_with_order,
    fit_ols, fit_ols_series, predict, stepwise_fit, StepAction,
};
use indexlab::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform_scores(rng: &mut ChaCha8Rng, name: &str, n: usize) -> Series {
    Series::new(name, (0..n).map(|_| rng.gen_range(0.0..100.0)).collect())
}

/// x1..x3 uniform on [0, 100]; y depends on x1 and x2 only.
fn synthetic(seed: u64, n: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<Series> = (1..=3).map(|j| uniform_scores(&mut rng, &format!("x{j}"), n)).collect();
    let y = (0..n)
        .map(|i| 10.0 + 0.4 * xs[0].values[i] + 0.3 * xs[1].values[i] + rng.gen_range(-4.0..4.0))
        .collect();
    let mut all = vec![Series::new("y", y)];
    all.extend(xs);
    Dataset::from_series(&all).unwrap()
}

#[test]
fn leave_one_out_cooks_distance_on_synthetic_data() {
    for seed in 0..10 {
        let data = synthetic(seed, 25);
        let preds = ["x1", "x2", "x3"];
        let fit = fit_ols(&data, "y", &preds).unwrap();
        let diag = casewise_diagnostics(&fit);
        let scale = 4.0 * fit.rmse * fit.rmse;
        for i in 0..data.len() {
            let loo = fit_ols(&data.without_row(i).unwrap(), "y", &preds).unwrap();
            let shift: f64 = data
                .records()
                .iter()
                .zip(&fit.fitted)
                .map(|(r, yhat)| {
                    let x: Vec<(&str, f64)> = preds.iter().map(|p| (*p, data.value(&r.name, p).unwrap())).collect();
                    (yhat - predict(&loo, &x).unwrap()).powi(2)
                })
                .sum();
            assert!((shift / scale - diag.cooks_distance[i]).abs() < 1e-9);
        }
    }
}

#[test]
fn row_order_does_not_change_the_fit() {
    let data = bundled_table_a1();
    let fit = fit_ols(&data, SII, &IDESI_DIMENSIONS).unwrap();
    let shuffled = data.reordered(&data.alphabetical_order()).unwrap();
    let other = fit_ols(&shuffled, SII, &IDESI_DIMENSIONS).unwrap();
    for (a, b) in fit.coefficients.iter().zip(&other.coefficients) {
        assert!((a - b).abs() < 1e-10);
    }
    assert!((fit.r_squared - other.r_squared).abs() < 1e-12);
}

#[test]
fn predictor_order_does_not_change_the_fit() {
    let data = bundled_table_a1();
    let fit = fit_ols(&data, SII, &IDESI_DIMENSIONS).unwrap();
    let mut reversed = IDESI_DIMENSIONS;
    reversed.reverse();
    let other = fit_ols(&data, SII, &reversed).unwrap();
    for name in IDESI_DIMENSIONS {
        assert!((fit.coefficient(name).unwrap() - other.coefficient(name).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn singular_design_names_the_dependent_column() {
    let data = bundled_table_a1();
    let x = data.column(IDESI).unwrap();
    let twice = Series::new("twice", x.values.iter().map(|v| v * 0.5 + 1.0).collect());
    let err = fit_ols_series(&data.column(SII).unwrap(), &[x, twice]).unwrap_err();
    assert!(matches!(err, Error::SingularDesign { column } if column == "twice"));
}

#[test]
fn too_few_rows_is_insufficient_data() {
    let y = Series::new("y", vec![1.0, 2.0, 4.0]);
    let xs = [Series::new("a", vec![1.0, 2.0, 3.0]), Series::new("b", vec![0.0, 1.0, 0.0])];
    assert!(matches!(fit_ols_series(&y, &xs), Err(Error::InsufficientData { needed: 4, .. })));
}

#[test]
fn exact_fit_has_infinite_f() {
    let x = Series::new("x", (0..10).map(f64::from).collect());
    let y = Series::new("y", x.values.iter().map(|v| 3.0 + 2.0 * v).collect());
    let fit = fit_ols_series(&y, &[x]).unwrap();
    assert_eq!(fit.residual_ss, 0.0);
    assert_eq!(anova(&fit).unwrap().f, f64::INFINITY);
    assert_eq!(fit.r_squared, 1.0);
}

#[test]
fn prediction_requires_every_predictor() {
    let fit = fit_ols(&bundled_table_a1(), SII, &[IDESI]).unwrap();
    assert!(matches!(predict(&fit, &[("other", 1.0)]), Err(Error::Argument(_))));
    let p = predict(&fit, &[(IDESI, 42.0), ("ignored", 5.0)]).unwrap();
    assert!((p - 51.44).abs() < 0.005);
}

#[test]
fn durbin_watson_needs_variation() {
    assert!(durbin_watson_statistic(&[1.0, 2.0]).is_err());
    assert!(durbin_watson_statistic(&[0.0; 5]).is_err());
}

#[test]
fn durbin_watson_p_is_seeded() {
    let data = bundled_table_a1();
    let fit = fit_ols(&data, SII, &[IDESI]).unwrap();
    let order = data.alphabetical_order();
    let a = durbin_watson_with_order(&fit, &order, 500, 7).unwrap();
    let b = durbin_watson_with_order(&fit, &order, 500, 7).unwrap();
    assert_eq!(a, b);
    assert!(durbin_watson_with_order(&fit, &order, 0, 7).is_err());
    assert!(durbin_watson_with_order(&fit, &[0, 0, 1], 10, 7).is_err());
}

#[test]
fn stepwise_recovers_the_generating_predictors() {
    for seed in 0..5 {
        let data = synthetic(100 + seed, 40);
        let r = stepwise_fit(&data, "y", &["x1", "x2", "x3"], 0.05, 0.10).unwrap();
        assert!(r.fit.predictors.iter().any(|p| p == "x1"), "seed {seed}");
        assert!(r.fit.predictors.iter().any(|p| p == "x2"), "seed {seed}");
        assert_eq!(r.trace[0].action, StepAction::Enter);
        assert_eq!(r.trace[0].variable, "x1");
        for step in &r.trace {
            if step.action == StepAction::Enter {
                assert!(step.p < 0.05);
            }
        }
        for p in &r.fit.p_values[1..] {
            assert!(p.value < 0.10);
        }
    }
}

#[test]
fn stepwise_rejects_bad_thresholds() {
    let data = synthetic(1, 20);
    assert!(matches!(stepwise_fit(&data, "y", &["x1"], 0.10, 0.05), Err(Error::Argument(_))));
    assert!(matches!(stepwise_fit::<&str>(&data, "y", &[], 0.05, 0.10), Err(Error::Argument(_))));
}

fn series_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0..100.0f64, n)
}

fn case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (8usize..40).prop_flat_map(|n| (series_strategy(n), series_strategy(n), series_strategy(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_rescaling_of_a_predictor(
        (y, x1, x2) in case(),
        scale in 0.1..10.0f64,
        shift in -50.0..50.0f64,
    ) {
        let (ys, a, b) = (Series::new("y", y), Series::new("a", x1), Series::new("b", x2));
        let Ok(fit) = fit_ols_series(&ys, &[a.clone(), b.clone()]) else { return Ok(()) };
        let moved = Series::new("a", a.values.iter().map(|v| shift + scale * v).collect());
        let other = fit_ols_series(&ys, &[moved, b]).unwrap();
        prop_assert!((other.coefficients[1] * scale - fit.coefficients[1]).abs() < 1e-8 * (1.0 + fit.coefficients[1].abs()));
        prop_assert!((other.t_values[1] - fit.t_values[1]).abs() < 1e-7 * (1.0 + fit.t_values[1].abs()));
        prop_assert!((other.r_squared - fit.r_squared).abs() < 1e-10);
        prop_assert!((other.standardized_betas[1].unwrap() - fit.standardized_betas[1].unwrap()).abs() < 1e-9);
    }

    #[test]
    fn decomposition_and_leverage((y, x1, x2) in case()) {
        let (ys, a, b) = (Series::new("y", y), Series::new("a", x1), Series::new("b", x2));
        let Ok(fit) = fit_ols_series(&ys, &[a, b]) else { return Ok(()) };
        let a = anova(&fit).unwrap();
        prop_assert!((a.regression_ss + a.residual_ss - a.total_ss).abs() < 1e-8 * a.total_ss);
        let h: f64 = fit.leverage.iter().sum();
        prop_assert!((h - 3.0).abs() < 1e-9);
        prop_assert!(fit.leverage.iter().all(|&h| h >= 1.0 / fit.n as f64 - 1e-12 && h <= 1.0 + 1e-12));
        for (i, r) in fit.residuals.iter().enumerate() {
            prop_assert!((ys.values[i] - fit.fitted[i] - r).abs() < 1e-9 * (1.0 + ys.values[i].abs()));
        }
    }

    #[test]
    fn durbin_watson_symmetries(e in prop::collection::vec(-10.0..10.0f64, 3..60)) {
        prop_assume!(e.iter().any(|v| v.abs() > 1e-6));
        let (d, ac) = durbin_watson_statistic(&e).unwrap();
        let negated: Vec<f64> = e.iter().map(|v| -v).collect();
        let reversed: Vec<f64> = e.iter().rev().copied().collect();
        let (dn, acn) = durbin_watson_statistic(&negated).unwrap();
        let (dr, acr) = durbin_watson_statistic(&reversed).unwrap();
        prop_assert!((d - dn).abs() < 1e-12 && (ac - acn).abs() < 1e-12);
        prop_assert!((d - dr).abs() < 1e-12 && (ac - acr).abs() < 1e-12);
        prop_assert!((0.0..=4.0).contains(&d));
    }

    #[test]
    fn tolerance_matches_auxiliary_regression((x1, x2, x3) in case()) {
        let xs = [Series::new("a", x1), Series::new("b", x2), Series::new("c", x3)];
        let Ok(report) = collinearity_series(&xs) else { return Ok(()) };
        let aux = fit_ols_series(&xs[0], &xs[1..]).unwrap();
        let tol = report.get("a").unwrap().tolerance;
        prop_assert!((tol - (1.0 - aux.r_squared)).abs() < 1e-9);
    }
}
