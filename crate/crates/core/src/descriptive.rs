//! Descriptive statistics, Tukey boxplot screening and the Shapiro-Wilk test.

use serde::Serialize;

use crate::dataset::Series;
use crate::distributions::{normal_quantile, normal_sf, PValue};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescriptiveStats {
    pub valid: usize,
    pub missing: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std_deviation: f64,
    pub minimum: f64,
    pub maximum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalityResult {
    pub w: f64,
    pub p: PValue,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance with n − 1 denominator (two-pass).
pub fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0)
}

/// Mean, sample standard deviation and range. Non-finite entries count as missing.
pub fn describe(series: &Series) -> Result<DescriptiveStats> {
    let valid: Vec<f64> = series.values.iter().copied().filter(|v| v.is_finite()).collect();
    if valid.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: valid.len(),
        });
    }
    let m = mean(&valid);
    Ok(DescriptiveStats {
        valid: valid.len(),
        missing: series.len() - valid.len(),
        mean: m,
        std_deviation: sample_variance(&valid).sqrt(),
        minimum: valid.iter().copied().fold(f64::INFINITY, f64::min),
        maximum: valid.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Tukey hinges (lower, upper): medians of the lower and upper halves, the
/// middle value belonging to both halves when `n` is odd.
pub fn tukey_hinges(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            got: values.len(),
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let half = n.div_ceil(2);
    Ok((median_sorted(&sorted[..half]), median_sorted(&sorted[n - half..])))
}

/// Indices of values outside `[Q1 − 1.5·IQR, Q3 + 1.5·IQR]`.
pub fn boxplot_outliers(series: &Series) -> Result<Vec<usize>> {
    let (q1, q3) = tukey_hinges(&series.values)?;
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    Ok(series
        .values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < lo || v > hi)
        .map(|(i, _)| i)
        .collect())
}

// Polynomial coefficients of the Royston (1995) approximation, ascending powers.
const C1: [f64; 6] = [0.0, 0.221_157, -0.147_981, -2.071_190, 4.434_685, -2.706_056];
const C2: [f64; 6] = [0.0, 0.042_981, -0.293_762, -1.752_461, 5.682_633, -3.582_633];
const C3: [f64; 4] = [0.5440, -0.399_78, 0.025_054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.778_57, 0.062_767, -0.002_032_2];
const C5: [f64; 4] = [-1.5861, -0.310_82, -0.083_751, 0.003_891_5];
const C6: [f64; 3] = [-0.4803, -0.082_676, 0.003_030_2];
const GAMMA_SMALL: [f64; 2] = [-2.273, 0.459];

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Shapiro-Wilk coefficients `a_1 ≥ … ≥ a_{n/2} > 0` pairing the i-th smallest
/// and i-th largest order statistics.
pub fn shapiro_wilk_coefficients(n: usize) -> Result<Vec<f64>> {
    if n < 3 {
        return Err(Error::Domain(format!("Shapiro-Wilk needs n >= 3, got {n}")));
    }
    if n == 3 {
        return Ok(vec![std::f64::consts::FRAC_1_SQRT_2]);
    }
    let half = n / 2;
    let an = n as f64;
    let m: Vec<f64> = (1..=half)
        .map(|i| normal_quantile((i as f64 - 0.375) / (an + 0.25)))
        .collect::<Result<_>>()?;
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / an.sqrt();
    let a1 = poly(&C1, rsn) - m[0] / ssumm2;

    let mut a = vec![0.0; half];
    a[0] = a1;
    if n > 5 {
        let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
        let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
            .sqrt();
        a[1] = a2;
        for i in 2..half {
            a[i] = -m[i] / fac;
        }
    } else {
        let fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        for i in 1..half {
            a[i] = -m[i] / fac;
        }
    }
    Ok(a)
}

/// Shapiro-Wilk W and its p-value (Royston's AS R94 approximation).
pub fn shapiro_wilk(series: &Series) -> Result<NormalityResult> {
    let n = series.len();
    if !(3..=5000).contains(&n) {
        return Err(Error::Domain(format!(
            "Shapiro-Wilk needs 3 <= n <= 5000, got {n}"
        )));
    }
    if series.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("Shapiro-Wilk input contains non-finite values".into()));
    }
    let mut x = series.values.clone();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if !(range > 0.0) || range < 1e-19 * x[n - 1].abs().max(1.0) {
        return Err(Error::Degenerate("Shapiro-Wilk input has zero variance".into()));
    }

    let a = shapiro_wilk_coefficients(n)?;
    // full antisymmetric coefficient vector aligned with the sorted sample
    let mut coef = vec![0.0; n];
    for (i, &ai) in a.iter().enumerate() {
        coef[i] = -ai;
        coef[n - 1 - i] = ai;
    }
    let xbar = mean(&x);
    let abar = mean(&coef);
    let (mut sax, mut ssa, mut ssx) = (0.0, 0.0, 0.0);
    for (xi, ci) in x.iter().zip(&coef) {
        let dx = (xi - xbar) / range;
        let da = ci - abar;
        sax += da * dx;
        ssa += da * da;
        ssx += dx * dx;
    }
    let w = (sax * sax / (ssa * ssx)).min(1.0);

    if n == 3 {
        let w = w.max(0.75);
        let p = 1.0 - (6.0 / std::f64::consts::PI) * w.sqrt().acos();
        return Ok(NormalityResult {
            w,
            p: PValue::one_tailed(p),
        });
    }
    Ok(NormalityResult {
        w,
        p: PValue::one_tailed(royston_p(w, n)),
    })
}

// Normalising transform of ln(1 − W): a log-normal fit for n ≥ 12 and a
// shifted-log fit for 4 ≤ n ≤ 11.
fn royston_p(w: f64, n: usize) -> f64 {
    let w1 = 1.0 - w;
    if w1 <= 0.0 {
        return 1.0;
    }
    let y = w1.ln();
    let an = n as f64;
    if n <= 11 {
        let gamma = poly(&GAMMA_SMALL, an);
        if y >= gamma {
            return 1e-19;
        }
        let y = -(gamma - y).ln();
        let m = poly(&C3, an);
        let s = poly(&C4, an).exp();
        normal_sf((y - m) / s)
    } else {
        let ln_n = an.ln();
        let m = poly(&C5, ln_n);
        let s = poly(&C6, ln_n).exp();
        normal_sf((y - m) / s)
    }
}
