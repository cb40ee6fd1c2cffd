//! Pearson correlation, correlation matrices and significance stars.

use serde::Serialize;

use crate::dataset::{Dataset, Series};
use crate::distributions::{t_two_tailed_p, PValue};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub r: f64,
    /// Two-tailed, from t = r·√((n−2)/(1−r²)) with n − 2 df.
    pub p: PValue,
    pub n: usize,
}

/// Symmetric r / p / star matrices over an ordered variable list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub variables: Vec<String>,
    pub r: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    pub stars: Vec<Vec<String>>,
    pub n: usize,
}

/// Two-tailed p-value of a sample correlation `r` over `n` pairs.
pub fn correlation_p(r: f64, n: usize) -> Result<PValue> {
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    if r.abs() >= 1.0 {
        return Ok(PValue::two_tailed(0.0));
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    t_two_tailed_p(t, df)
}

/// Pearson's product-moment correlation between two equally long slices.
pub fn pearson_values(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "series lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("correlation with a zero-variance series".into()));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok(CorrelationResult {
        r,
        p: correlation_p(r, n)?,
        n,
    })
}

pub fn pearson(x: &Series, y: &Series) -> Result<CorrelationResult> {
    pearson_values(&x.values, &y.values)
}

/// `***` below .001, `**` below .01, `*` below .05.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// All pairwise correlations among `variables`.
pub fn correlation_matrix<S: AsRef<str>>(data: &Dataset, variables: &[S]) -> Result<CorrelationMatrix> {
    if variables.len() < 2 {
        return Err(Error::Argument("a correlation matrix needs at least 2 variables".into()));
    }
    let series = data.select(variables)?;
    let k = series.len();
    let mut r = vec![vec![1.0; k]; k];
    let mut p = vec![vec![0.0; k]; k];
    let mut stars = vec![vec![String::new(); k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let c = pearson(&series[i], &series[j])?;
            r[i][j] = c.r;
            r[j][i] = c.r;
            p[i][j] = c.p.value;
            p[j][i] = c.p.value;
            let s = significance_stars(c.p.value).to_string();
            stars[i][j] = s.clone();
            stars[j][i] = s;
        }
    }
    Ok(CorrelationMatrix {
        variables: series.into_iter().map(|s| s.name).collect(),
        r,
        p,
        stars,
        n: data.len(),
    })
}

impl CorrelationMatrix {
    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn get(&self, a: &str, b: &str) -> Result<CorrelationResult> {
        let (i, j) = (self.index_of(a)?, self.index_of(b)?);
        Ok(CorrelationResult {
            r: self.r[i][j],
            p: PValue::two_tailed(self.p[i][j]),
            n: self.n,
        })
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_rows(&self.r).expect("square by construction")
    }

    /// Builds a matrix object from an explicit r matrix (p and stars derived
    /// from `n`). Used for synthetic inputs to KMO and Bartlett.
    pub fn from_r(variables: Vec<String>, r: Vec<Vec<f64>>, n: usize) -> Result<Self> {
        let k = variables.len();
        if r.len() != k || r.iter().any(|row| row.len() != k) {
            return Err(Error::Shape("r matrix does not match variable count".into()));
        }
        let mut p = vec![vec![0.0; k]; k];
        let mut stars = vec![vec![String::new(); k]; k];
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    let pv = correlation_p(r[i][j], n.max(3))?.value;
                    p[i][j] = pv;
                    stars[i][j] = significance_stars(pv).to_string();
                }
            }
        }
        Ok(CorrelationMatrix {
            variables,
            r,
            p,
            stars,
            n,
        })
    }

    /// Lower-triangular text rendering with `–` on the diagonal, r to three
    /// decimals with stars.
    pub fn render_lower_triangle(&self) -> String {
        let mut out = String::new();
        out.push_str("Variable");
        for (j, v) in self.variables.iter().enumerate() {
            out.push_str(&format!("\t{}. {}", j + 1, v));
        }
        out.push('\n');
        for (i, v) in self.variables.iter().enumerate() {
            out.push_str(&format!("{}. {}", i + 1, v));
            for j in 0..=i {
                if i == j {
                    out.push_str("\t–");
                } else {
                    out.push_str(&format!("\t{:.3}{}", self.r[i][j], self.stars[i][j]));
                }
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{self, bundled_table_a1};

    #[test]
    fn table_a1_pairs() {
        let d = bundled_table_a1();
        let sii = d.column(dataset::SII).unwrap();
        let idt = d.column(dataset::IDT).unwrap();
        let c = pearson(&sii, &idt).unwrap();
        assert!((c.r - 0.700).abs() < 0.001);
        assert!(c.p.value < 0.001);
        let hc = d.column(dataset::HUMAN_CAPITAL).unwrap();
        let c = pearson(&sii, &hc).unwrap();
        assert!((c.r - 0.530).abs() < 0.001);
        assert!((c.p.value - 0.003).abs() < 0.002);
    }

    #[test]
    fn self_correlation_is_one() {
        let x = Series::new("x", vec![1.3, 2.7, 3.1, 9.4, 0.2]);
        assert_eq!(pearson(&x, &x).unwrap().r, 1.0);
    }

    #[test]
    fn anticorrelated_columns() {
        let a = Series::new("a", vec![1.0, 2.0, 3.0, 4.0]);
        let b = Series::new("b", vec![8.0, 6.0, 4.0, 2.0]);
        let d = Dataset::from_series(&[a, b]).unwrap();
        let m = correlation_matrix(&d, &["a", "b"]).unwrap();
        assert_eq!(m.r[0][1], -1.0);
        assert_eq!(m.r[1][0], -1.0);
    }

    #[test]
    fn errors() {
        let a = Series::new("a", vec![1.0, 2.0, 3.0]);
        let b = Series::new("b", vec![1.0, 2.0]);
        assert!(matches!(pearson(&a, &b), Err(Error::Shape(_))));
        let c = Series::new("c", vec![4.0, 4.0, 4.0]);
        assert!(matches!(pearson(&a, &c), Err(Error::Degenerate(_))));
    }

    #[test]
    fn stars() {
        assert_eq!(significance_stars(0.0005), "***");
        assert_eq!(significance_stars(0.005), "**");
        assert_eq!(significance_stars(0.03), "*");
        assert_eq!(significance_stars(0.5), "");
        assert_eq!(significance_stars(0.05), "");
        assert_eq!(significance_stars(0.001), "**");
    }

    #[test]
    fn table_11_cells() {
        let d = bundled_table_a1();
        let vars: Vec<&str> = dataset::IDESI_DIMENSIONS
            .iter()
            .chain(dataset::SII_PILLARS.iter())
            .copied()
            .collect();
        let m = correlation_matrix(&d, &vars).unwrap();
        let c = m.get(dataset::USE_OF_INTERNET, dataset::SOCIETY).unwrap();
        assert!((c.r - 0.788).abs() < 0.001);
        assert_eq!(significance_stars(c.p.value), "***");
        let c = m.get(dataset::CONNECTIVITY, dataset::ENTREPRENEURSHIP).unwrap();
        assert!((c.r - 0.170).abs() < 0.001);
        assert_eq!(significance_stars(c.p.value), "");
        let c = m.get(dataset::USE_OF_INTERNET, dataset::IDT).unwrap();
        assert!((c.r - 0.816).abs() < 0.001);
        assert!(m.render_lower_triangle().contains("0.816***"));
    }
}
