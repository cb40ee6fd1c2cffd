//! Principal components of a correlation matrix, KMO and Bartlett's test.

use serde::Serialize;

use crate::correlation::{correlation_matrix, CorrelationMatrix};
use crate::dataset::Dataset;
use crate::distributions::{chi2_tail_p, HypothesisTestResult};
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};

pub use crate::linalg::{eigen_symmetric, SymmetricEigen};

/// Kaiser criterion.
pub const DEFAULT_RETENTION: f64 = 1.0;
const PSD_FLOOR: f64 = -1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaResult {
    pub variables: Vec<String>,
    /// All eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub retained: usize,
    /// `loadings[i][j]`: variable `i` on component `j`, for every component.
    /// The first `retained` columns form the component matrix.
    pub loadings: Vec<Vec<f64>>,
    pub variance_explained_pct: Vec<f64>,
    pub cumulative_pct: Vec<f64>,
    pub kmo: f64,
    pub bartlett: HypothesisTestResult,
}

impl PcaResult {
    /// Loadings of variable `name` on the retained components.
    pub fn retained_loadings(&self, name: &str) -> Option<&[f64]> {
        let i = self.variables.iter().position(|v| v == name)?;
        Some(&self.loadings[i][..self.retained])
    }
}

pub fn run_pca<S: AsRef<str>>(data: &Dataset, variables: &[S], retention: f64) -> Result<PcaResult> {
    if variables.len() < 2 {
        return Err(Error::Argument("PCA needs at least 2 variables".into()));
    }
    let corr = correlation_matrix(data, variables)?;
    pca_from_correlation(&corr, retention)
}

/// PCA of an already computed correlation matrix.
pub fn pca_from_correlation(corr: &CorrelationMatrix, retention: f64) -> Result<PcaResult> {
    let p = corr.variables.len();
    let eig = eigen_symmetric(&corr.to_matrix())?;
    if let Some(&low) = eig.values.last() {
        if low < PSD_FLOOR {
            return Err(Error::Numerical(format!(
                "correlation matrix is not positive semidefinite (eigenvalue {low:e})"
            )));
        }
    }
    let eigenvalues: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();

    let mut loadings = vec![vec![0.0; p]; p];
    for (j, &lambda) in eigenvalues.iter().enumerate() {
        let col = eig.vectors.column(j);
        let pivot = col
            .iter()
            .copied()
            .fold(0.0_f64, |a, v| if v.abs() > a.abs() { v } else { a });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        let scale = lambda.sqrt() * sign;
        for i in 0..p {
            loadings[i][j] = col[i] * scale;
        }
    }

    let variance_explained_pct: Vec<f64> = eigenvalues.iter().map(|l| 100.0 * l / p as f64).collect();
    let cumulative_pct = variance_explained_pct
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect();

    Ok(PcaResult {
        variables: corr.variables.clone(),
        retained: eigenvalues.iter().filter(|&&l| l >= retention).count(),
        eigenvalues,
        loadings,
        variance_explained_pct,
        cumulative_pct,
        kmo: kmo(corr)?,
        bartlett: bartlett_sphericity(corr, corr.n)?,
    })
}

/// Kaiser-Meyer-Olkin measure of sampling adequacy.
pub fn kmo(corr: &CorrelationMatrix) -> Result<f64> {
    let p = corr.variables.len();
    if p < 2 {
        return Err(Error::Argument("KMO needs at least 2 variables".into()));
    }
    let r = corr.to_matrix();
    let inv = Cholesky::new(&r)
        .map_err(|_| Error::Numerical("correlation matrix is singular".into()))?
        .inverse();
    if p == 2 {
        // the partial correlation of two variables is r itself
        return Ok(0.5);
    }
    let (mut sum_r, mut sum_q) = (0.0, 0.0);
    for i in 0..p {
        for j in 0..p {
            if i != j {
                let q = -inv[(i, j)] / (inv[(i, i)] * inv[(j, j)]).sqrt();
                sum_r += r[(i, j)].powi(2);
                sum_q += q * q;
            }
        }
    }
    if sum_r + sum_q == 0.0 {
        return Err(Error::Degenerate("KMO undefined for an identity matrix".into()));
    }
    Ok(sum_r / (sum_r + sum_q))
}

/// Bartlett's test that the correlation matrix is the identity.
pub fn bartlett_sphericity(corr: &CorrelationMatrix, n: usize) -> Result<HypothesisTestResult> {
    let p = corr.variables.len();
    if p < 2 {
        return Err(Error::Argument("Bartlett's test needs at least 2 variables".into()));
    }
    if n <= p {
        return Err(Error::InsufficientData { needed: p + 1, got: n });
    }
    let ln_det = Cholesky::new(&corr.to_matrix())
        .map_err(|_| Error::Domain("correlation matrix determinant is not positive".into()))?
        .ln_determinant();
    let factor = n as f64 - 1.0 - (2.0 * p as f64 + 5.0) / 6.0;
    let statistic = (-factor * ln_det).max(0.0);
    let df = (p * (p - 1) / 2) as f64;
    Ok(HypothesisTestResult {
        test: "Bartlett's test of sphericity".into(),
        statistic,
        df,
        df2: None,
        p: chi2_tail_p(statistic, df)?,
    })
}

/// `L Lᵀ` over the first `components` columns of the loadings.
pub fn reconstruct(result: &PcaResult, components: usize) -> Matrix {
    let p = result.variables.len();
    let mut out = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            out[(i, j)] = (0..components)
                .map(|c| result.loadings[i][c] * result.loadings[j][c])
                .sum();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{self, bundled_table_a1};

    fn synthetic(r: Vec<Vec<f64>>, n: usize) -> CorrelationMatrix {
        let names = (0..r.len()).map(|i| format!("v{i}")).collect();
        CorrelationMatrix::from_r(names, r, n).unwrap()
    }

    #[test]
    fn idesi_dimensions() {
        let d = bundled_table_a1();
        let res = run_pca(&d, &dataset::IDESI_DIMENSIONS, DEFAULT_RETENTION).unwrap();
        assert_eq!(res.retained, 1);
        assert!((res.eigenvalues[0] - 3.6734).abs() < 1e-3);
        assert!((res.variance_explained_pct[0] - 73.468).abs() < 5e-3);
        assert!((res.retained_loadings(dataset::IDT).unwrap()[0] - 0.9081).abs() < 1e-3);
        assert!((res.kmo - 0.88109).abs() < 1e-4);
        assert!((res.bartlett.statistic - 85.2885).abs() < 1e-3);
        assert_eq!(res.bartlett.df, 10.0);
    }

    #[test]
    fn two_variable_kmo_is_half() {
        let c = synthetic(vec![vec![1.0, 0.37], vec![0.37, 1.0]], 20);
        assert_eq!(kmo(&c).unwrap(), 0.5);
    }

    #[test]
    fn equicorrelation_kmo() {
        let r = 0.5;
        let c = synthetic(
            vec![vec![1.0, r, r], vec![r, 1.0, r], vec![r, r, 1.0]],
            30,
        );
        // partial correlation r/(1+r) for the equicorrelated 3×3 case
        let expected = (1.0_f64 + r).powi(2) / ((1.0 + r).powi(2) + 1.0);
        assert!((kmo(&c).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn identity_bartlett() {
        let c = synthetic(
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            30,
        );
        let b = bartlett_sphericity(&c, 30).unwrap();
        assert_eq!(b.statistic, 0.0);
        assert_eq!(b.p.value, 1.0);
        assert!(kmo(&c).is_err());
    }

    #[test]
    fn singular_kmo() {
        let c = synthetic(vec![vec![1.0, 1.0], vec![1.0, 1.0]], 10);
        assert!(kmo(&c).is_err());
        assert!(bartlett_sphericity(&c, 10).is_err());
    }
}
