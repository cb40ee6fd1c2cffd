use indexlab::correlation::CorrelationMatrix;
use indexlab::dataset::{bundled_table_a1, IDESI_DIMENSIONS, SII_PILLARS};
use indexlab::linalg::Matrix;
use indexlab::pca::{bartlett_sphericity, kmo, pca_from_correlation, reconstruct, run_pca};
use indexlab::Error;
use proptest::prelude::*;

fn equicorrelation(p: usize, r: f64) -> CorrelationMatrix {
    let rows = (0..p)
        .map(|i| (0..p).map(|j| if i == j { 1.0 } else { r }).collect())
        .collect();
    let names = (0..p).map(|i| format!("v{i}")).collect();
    CorrelationMatrix::from_r(names, rows, 50).unwrap()
}

#[test]
fn loadings_are_orthogonal_and_sign_fixed() {
    let pca = run_pca(&bundled_table_a1(), &IDESI_DIMENSIONS, 1.0).unwrap();
    let p = pca.variables.len();
    for a in 0..p {
        let col: Vec<f64> = pca.loadings.iter().map(|row| row[a]).collect();
        let largest = col.iter().copied().fold(0.0_f64, |m, v| if v.abs() > m.abs() { v } else { m });
        assert!(largest > 0.0);
        let ss: f64 = col.iter().map(|v| v * v).sum();
        assert!((ss - pca.eigenvalues[a]).abs() < 1e-9);
        for b in a + 1..p {
            let dot: f64 = pca.loadings.iter().map(|row| row[a] * row[b]).sum();
            assert!(dot.abs() < 1e-9);
        }
    }
    assert!((pca.cumulative_pct[p - 1] - 100.0).abs() < 1e-9);
}

#[test]
fn pillars_also_yield_one_component() {
    let pca = run_pca(&bundled_table_a1(), &SII_PILLARS, 1.0).unwrap();
    assert_eq!(pca.retained, 1);
    assert!(pca.kmo > 0.5 && pca.kmo < 1.0);
}

#[test]
fn retention_threshold_controls_component_count() {
    let data = bundled_table_a1();
    assert_eq!(run_pca(&data, &IDESI_DIMENSIONS, 0.0).unwrap().retained, 5);
    assert_eq!(run_pca(&data, &IDESI_DIMENSIONS, 10.0).unwrap().retained, 0);
}

#[test]
fn equicorrelation_eigenvalues() {
    for (p, r) in [(3, 0.2), (5, 0.6), (8, 0.9)] {
        let pca = pca_from_correlation(&equicorrelation(p, r), 1.0).unwrap();
        assert!((pca.eigenvalues[0] - (1.0 + (p - 1) as f64 * r)).abs() < 1e-10);
        for v in &pca.eigenvalues[1..] {
            assert!((v - (1.0 - r)).abs() < 1e-10);
        }
        let expected = (1.0 + r).powi(2) / ((1.0 + r).powi(2) + 1.0);
        if p == 3 {
            assert!((pca.kmo - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn bartlett_needs_more_rows_than_variables() {
    let m = equicorrelation(4, 0.3);
    assert!(matches!(bartlett_sphericity(&m, 4), Err(Error::InsufficientData { .. })));
    let t = bartlett_sphericity(&m, 30).unwrap();
    assert_eq!(t.df, 6.0);
    assert!(t.statistic > 0.0);
}

#[test]
fn singular_correlation_is_rejected_by_kmo() {
    assert!(kmo(&equicorrelation(3, 1.0)).is_err());
}

fn correlation_strategy() -> impl Strategy<Value = CorrelationMatrix> {
    (2usize..7)
        .prop_flat_map(|p| (Just(p), prop::collection::vec(-1.0..1.0f64, p * (p + 2))))
        .prop_map(|(p, raw)| {
            // Gram matrix of random vectors plus a small ridge, scaled to unit diagonal.
            let v: Vec<&[f64]> = raw.chunks(p + 2).collect();
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            let d: Vec<f64> = v.iter().map(|a| dot(a, a) + 1e-2).collect();
            let r = (0..p)
                .map(|i| (0..p).map(|j| if i == j { 1.0 } else { dot(v[i], v[j]) / (d[i] * d[j]).sqrt() }).collect())
                .collect();
            CorrelationMatrix::from_r((0..p).map(|i| format!("v{i}")).collect(), r, 100).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn full_reconstruction_and_trace(corr in correlation_strategy()) {
        let p = corr.variables.len();
        let pca = pca_from_correlation(&corr, 1.0).unwrap();
        prop_assert!((pca.eigenvalues.iter().sum::<f64>() - p as f64).abs() < 1e-9);
        let gap: f64 = reconstruct(&pca, p).max_abs_diff(&corr.to_matrix());
        prop_assert!(gap < 1e-9);
        prop_assert!(pca.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(pca.eigenvalues.iter().filter(|&&v| v >= 1.0).count() == pca.retained);
    }

    #[test]
    fn kmo_is_a_proportion(corr in correlation_strategy()) {
        let value = kmo(&corr).unwrap();
        prop_assert!((0.0..=1.0).contains(&value));
        if corr.variables.len() == 2 {
            prop_assert!((value - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_reconstruction_keeps_unit_diagonal_bounded(corr in correlation_strategy()) {
        let pca = pca_from_correlation(&corr, 1.0).unwrap();
        let m: Matrix = reconstruct(&pca, 1);
        for i in 0..corr.variables.len() {
            let communality = m.row(i)[i];
            prop_assert!((-1e-12..=1.0 + 1e-9).contains(&communality));
        }
    }
}
