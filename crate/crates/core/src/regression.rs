//! Ordinary least squares and its diagnostics.
//!
//! Models are fitted by Householder QR of the centered design, so the
//! intercept is recovered from the means rather than carried as a column.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{Dataset, Series};
use crate::descriptive::{mean, sample_variance};
use crate::distributions::{f_tail_p, t_two_tailed_p, PValue};
use crate::error::{Error, Result};
use crate::linalg::{forward_substitute_transposed, HouseholderQr, Matrix};

pub const INTERCEPT: &str = "(Intercept)";
pub const DEFAULT_P_ENTER: f64 = 0.05;
pub const DEFAULT_P_REMOVE: f64 = 0.10;
pub const DEFAULT_REPLICATES: usize = 10_000;
pub const STANDARDIZED_RESIDUAL_LIMIT: f64 = 3.0;
pub const COOKS_DISTANCE_LIMIT: f64 = 1.0;

// Residual SS at or below this fraction of total SS is treated as an exact fit.
const PERFECT_FIT: f64 = 1e-24;
// Tolerances below this are reported as exact dependence.
const TOLERANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaTable {
    pub regression_ss: f64,
    pub residual_ss: f64,
    pub total_ss: f64,
    pub df_regression: usize,
    pub df_residual: usize,
    pub mean_square_regression: f64,
    pub mean_square_residual: f64,
    /// `+∞` for an exact fit.
    pub f: f64,
    pub p: PValue,
}

/// A fitted linear model. Coefficient vectors are intercept first, then the
/// predictors in the order given.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearModelFit {
    pub response: String,
    pub predictors: Vec<String>,
    pub n: usize,
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    pub p_values: Vec<PValue>,
    /// `None` for the intercept and whenever the response is constant.
    pub standardized_betas: Vec<Option<f64>>,
    pub r: f64,
    pub r_squared: f64,
    pub adjusted_r_squared: f64,
    pub rmse: f64,
    pub residual_ss: f64,
    pub total_ss: f64,
    pub anova: Option<AnovaTable>,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    pub leverage: Vec<f64>,
}

impl LinearModelFit {
    pub fn k(&self) -> usize {
        self.predictors.len()
    }

    pub fn df_residual(&self) -> usize {
        self.n - self.k() - 1
    }

    pub fn intercept(&self) -> f64 {
        self.coefficients[0]
    }

    /// Position of `name` in the coefficient vectors (intercept is 0).
    pub fn term_index(&self, name: &str) -> Result<usize> {
        if name == INTERCEPT {
            return Ok(0);
        }
        self.predictors
            .iter()
            .position(|p| p == name)
            .map(|i| i + 1)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn coefficient(&self, name: &str) -> Result<f64> {
        Ok(self.coefficients[self.term_index(name)?])
    }
}

pub fn fit_ols<S: AsRef<str>>(data: &Dataset, response: &str, predictors: &[S]) -> Result<LinearModelFit> {
    let y = data.column(response)?;
    let xs = data.select(predictors)?;
    fit_ols_series(&y, &xs)
}

/// OLS of `response` on `predictors` (may be empty) with an intercept.
pub fn fit_ols_series(response: &Series, predictors: &[Series]) -> Result<LinearModelFit> {
    let n = response.len();
    let k = predictors.len();
    if n < k + 2 {
        return Err(Error::InsufficientData { needed: k + 2, got: n });
    }
    for x in predictors {
        if x.len() != n {
            return Err(Error::Shape(format!(
                "predictor '{}' has {} values, response has {n}",
                x.name,
                x.len()
            )));
        }
    }
    let values_ok = response
        .values
        .iter()
        .chain(predictors.iter().flat_map(|x| x.values.iter()))
        .all(|v| v.is_finite());
    if !values_ok {
        return Err(Error::Domain("regression inputs must be finite".into()));
    }

    let y_mean = mean(&response.values);
    let yc: Vec<f64> = response.values.iter().map(|v| v - y_mean).collect();
    let total_ss: f64 = yc.iter().map(|v| v * v).sum();
    let x_means: Vec<f64> = predictors.iter().map(|x| mean(&x.values)).collect();

    let centered: Vec<Vec<f64>> = predictors
        .iter()
        .zip(&x_means)
        .map(|(x, m)| x.values.iter().map(|v| v - m).collect())
        .collect();
    let columns: Vec<&[f64]> = centered.iter().map(|c| c.as_slice()).collect();

    let (slopes, gram_inv, qr) = if k == 0 {
        (Vec::new(), Matrix::zeros(0, 0), None)
    } else {
        let design = Matrix::from_columns(&columns)?;
        let qr = HouseholderQr::new(&design);
        if let Some(&j) = qr.dependent_columns().first() {
            return Err(Error::SingularDesign {
                column: predictors[j].name.clone(),
            });
        }
        let b = qr.solve(&yc)?;
        let g = qr.gram_inverse();
        (b, g, Some(qr))
    };

    let residuals: Vec<f64> = (0..n)
        .map(|i| yc[i] - (0..k).map(|j| slopes[j] * centered[j][i]).sum::<f64>())
        .collect();
    let fitted: Vec<f64> = response
        .values
        .iter()
        .zip(&residuals)
        .map(|(y, e)| y - e)
        .collect();

    let mut residual_ss: f64 = residuals.iter().map(|e| e * e).sum();
    let exact = k > 0 && residual_ss <= PERFECT_FIT * total_ss.max(f64::MIN_POSITIVE);
    if exact {
        residual_ss = 0.0;
    }
    let df_res = n - k - 1;
    let s2 = residual_ss / df_res as f64;
    let rmse = s2.sqrt();

    let intercept = y_mean - slopes.iter().zip(&x_means).map(|(b, m)| b * m).sum::<f64>();
    let mut coefficients = vec![intercept];
    coefficients.extend(&slopes);

    // var(intercept) = s²(1/n + x̄ᵀ G x̄)
    let quad: f64 = (0..k)
        .flat_map(|a| (0..k).map(move |b| (a, b)))
        .map(|(a, b)| x_means[a] * gram_inv[(a, b)] * x_means[b])
        .sum();
    let mut standard_errors = vec![(s2 * (1.0 / n as f64 + quad)).sqrt()];
    standard_errors.extend((0..k).map(|j| (s2 * gram_inv[(j, j)]).sqrt()));

    let t_values: Vec<f64> = coefficients
        .iter()
        .zip(&standard_errors)
        .map(|(b, se)| {
            if *se > 0.0 {
                b / se
            } else if *b == 0.0 {
                0.0
            } else {
                b.signum() * f64::INFINITY
            }
        })
        .collect();
    let p_values = t_values
        .iter()
        .map(|t| t_two_tailed_p(*t, df_res as f64))
        .collect::<Result<Vec<_>>>()?;

    let sd_y = (total_ss / (n - 1) as f64).sqrt();
    let mut standardized_betas = vec![None];
    standardized_betas.extend(predictors.iter().zip(&slopes).map(|(x, b)| {
        if sd_y > 0.0 {
            Some(b * sample_variance(&x.values).sqrt() / sd_y)
        } else {
            None
        }
    }));

    let (r_squared, regression_ss) = if total_ss > 0.0 && k > 0 {
        let reg = (total_ss - residual_ss).max(0.0);
        (reg / total_ss, reg)
    } else {
        (0.0, 0.0)
    };
    let adjusted_r_squared = if k == 0 {
        0.0
    } else {
        1.0 - (1.0 - r_squared) * (n - 1) as f64 / df_res as f64
    };

    let leverage: Vec<f64> = match &qr {
        None => vec![1.0 / n as f64; n],
        Some(qr) => (0..n)
            .map(|i| {
                let row: Vec<f64> = (0..k).map(|j| centered[j][i]).collect();
                let z = forward_substitute_transposed(qr.r(), &row);
                1.0 / n as f64 + z.iter().map(|v| v * v).sum::<f64>()
            })
            .collect(),
    };

    let anova = if k == 0 {
        None
    } else {
        let msr = regression_ss / k as f64;
        let mse = s2;
        let f = if residual_ss == 0.0 { f64::INFINITY } else { msr / mse };
        Some(AnovaTable {
            regression_ss,
            residual_ss,
            total_ss,
            df_regression: k,
            df_residual: df_res,
            mean_square_regression: msr,
            mean_square_residual: mse,
            f,
            p: f_tail_p(f, k as f64, df_res as f64)?,
        })
    };

    Ok(LinearModelFit {
        response: response.name.clone(),
        predictors: predictors.iter().map(|x| x.name.clone()).collect(),
        n,
        coefficients,
        standard_errors,
        t_values,
        p_values,
        standardized_betas,
        r: r_squared.sqrt(),
        r_squared,
        adjusted_r_squared,
        rmse,
        residual_ss,
        total_ss,
        anova,
        residuals,
        fitted,
        leverage,
    })
}

/// Intercept-only model: the intercept is the mean and RMSE the sample sd.
pub fn null_model(data: &Dataset, response: &str) -> Result<LinearModelFit> {
    let y = data.column(response)?;
    fit_ols_series(&y, &[])
}

pub fn anova(fit: &LinearModelFit) -> Result<&AnovaTable> {
    fit.anova.as_ref().ok_or(Error::UndefinedAnova)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DurbinWatsonResult {
    pub d: f64,
    pub autocorrelation: f64,
    pub p: PValue,
    pub replicates: usize,
    pub seed: u64,
}

/// `d = Σ(eₜ − eₜ₋₁)² / Σeₜ²` and the lag-1 autocorrelation `Σeₜeₜ₋₁ / Σeₜ²`.
pub fn durbin_watson_statistic(residuals: &[f64]) -> Result<(f64, f64)> {
    let n = residuals.len();
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    let ss: f64 = residuals.iter().map(|e| e * e).sum();
    if ss == 0.0 {
        return Err(Error::Degenerate("all residuals are zero".into()));
    }
    let (num, lag) = residuals
        .windows(2)
        .fold((0.0, 0.0), |(a, b), w| (a + (w[1] - w[0]).powi(2), b + w[1] * w[0]));
    Ok((num / ss, lag / ss))
}

/// Durbin-Watson test over residuals in row order.
pub fn durbin_watson(fit: &LinearModelFit, replicates: usize, seed: u64) -> Result<DurbinWatsonResult> {
    let order: Vec<usize> = (0..fit.residuals.len()).collect();
    durbin_watson_with_order(fit, &order, replicates, seed)
}

/// Durbin-Watson test over residuals taken in `order`.
///
/// The p-value is a two-sided permutation bootstrap: each replicate shuffles
/// the residuals with its own ChaCha8 stream and recomputes `d`. Replicate `i`
/// uses stream `i` of the master seed, so the result does not depend on how
/// rayon splits the work.
pub fn durbin_watson_with_order(
    fit: &LinearModelFit,
    order: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<DurbinWatsonResult> {
    if replicates == 0 {
        return Err(Error::Argument("bootstrap needs at least one replicate".into()));
    }
    let n = fit.residuals.len();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
        return Err(Error::Argument("order must be a permutation of the residual rows".into()));
    }
    let e: Vec<f64> = order.iter().map(|&i| fit.residuals[i]).collect();
    let (d, autocorrelation) = durbin_watson_statistic(&e)?;

    let exceed = (0..replicates)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut shuffled = e.clone();
            shuffled.shuffle(&mut rng);
            let (ds, _) = durbin_watson_statistic(&shuffled).expect("same residual set");
            ds > d
        })
        .count();
    let frac = exceed as f64 / replicates as f64;
    Ok(DurbinWatsonResult {
        d,
        autocorrelation,
        p: PValue::two_tailed(2.0 * frac.min(1.0 - frac)),
        replicates,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollinearityEntry {
    pub predictor: String,
    pub tolerance: f64,
    /// `+∞` when the predictor is an exact combination of the others.
    pub vif: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollinearityReport {
    pub entries: Vec<CollinearityEntry>,
}

impl CollinearityReport {
    /// A lone predictor: tolerance and VIF are exactly 1.
    pub fn single(predictor: &str) -> Self {
        CollinearityReport {
            entries: vec![CollinearityEntry {
                predictor: predictor.to_string(),
                tolerance: 1.0,
                vif: 1.0,
            }],
        }
    }

    pub fn get(&self, predictor: &str) -> Option<&CollinearityEntry> {
        self.entries.iter().find(|e| e.predictor == predictor)
    }

    /// Predictors whose VIF is infinite.
    pub fn singular(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.vif.is_infinite())
            .map(|e| e.predictor.as_str())
            .collect()
    }
}

/// Tolerance `1 − R²ⱼ` of each predictor regressed on the rest, and VIF.
pub fn collinearity<S: AsRef<str>>(data: &Dataset, predictors: &[S]) -> Result<CollinearityReport> {
    if predictors.len() < 2 {
        return Err(Error::Argument("collinearity needs at least 2 predictors".into()));
    }
    collinearity_series(&data.select(predictors)?)
}

pub fn collinearity_series(predictors: &[Series]) -> Result<CollinearityReport> {
    let centered: Vec<Vec<f64>> = predictors
        .iter()
        .map(|x| {
            let m = mean(&x.values);
            x.values.iter().map(|v| v - m).collect()
        })
        .collect();
    let mut entries = Vec::with_capacity(predictors.len());
    for (j, x) in predictors.iter().enumerate() {
        let target = &centered[j];
        let total: f64 = target.iter().map(|v| v * v).sum();
        let tolerance = if total == 0.0 {
            0.0
        } else {
            let others: Vec<&[f64]> = centered
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .map(|(_, c)| c.as_slice())
                .collect();
            let qr = HouseholderQr::new(&Matrix::from_columns(&others)?);
            let qty = qr.apply_qt(target);
            let residual: f64 = qty[qr.rank()..].iter().map(|v| v * v).sum();
            let tol = residual / total;
            if tol < TOLERANCE_FLOOR {
                0.0
            } else {
                tol.min(1.0)
            }
        };
        entries.push(CollinearityEntry {
            predictor: x.name.clone(),
            tolerance,
            vif: if tolerance == 0.0 { f64::INFINITY } else { 1.0 / tolerance },
        });
    }
    Ok(CollinearityReport { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CasewiseDiagnostics {
    pub cooks_distance: Vec<f64>,
    /// Internally studentized: `eᵢ / (s·√(1 − hᵢ))`.
    pub standardized_residuals: Vec<f64>,
    pub leverage: Vec<f64>,
    pub flagged: Vec<usize>,
}

pub fn casewise_diagnostics(fit: &LinearModelFit) -> CasewiseDiagnostics {
    let p = (fit.k() + 1) as f64;
    let s2 = fit.rmse * fit.rmse;
    let mut cooks = Vec::with_capacity(fit.n);
    let mut standardized = Vec::with_capacity(fit.n);
    for (e, h) in fit.residuals.iter().zip(&fit.leverage) {
        let one_minus_h = 1.0 - h;
        if s2 == 0.0 || one_minus_h <= 0.0 {
            cooks.push(0.0);
            standardized.push(0.0);
            continue;
        }
        cooks.push(e * e * h / (p * s2 * one_minus_h * one_minus_h));
        standardized.push(e / (s2 * one_minus_h).sqrt());
    }
    let flagged = (0..fit.n)
        .filter(|&i| {
            standardized[i].abs() > STANDARDIZED_RESIDUAL_LIMIT || cooks[i] > COOKS_DISTANCE_LIMIT
        })
        .collect();
    CasewiseDiagnostics {
        cooks_distance: cooks,
        standardized_residuals: standardized,
        leverage: fit.leverage.clone(),
        flagged,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StepAction {
    Enter,
    Remove,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepwiseStep {
    pub action: StepAction,
    pub variable: String,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepwiseResult {
    pub fit: LinearModelFit,
    pub trace: Vec<StepwiseStep>,
}

/// Forward entry with backward removal.
///
/// Each round enters the candidate with the smallest p below `p_enter`, then
/// drops included predictors whose p exceeds `p_remove`, worst first.
/// Candidates that would make the design singular are skipped.
pub fn stepwise_fit<S: AsRef<str>>(
    data: &Dataset,
    response: &str,
    candidates: &[S],
    p_enter: f64,
    p_remove: f64,
) -> Result<StepwiseResult> {
    if candidates.is_empty() {
        return Err(Error::Argument("stepwise selection needs at least one candidate".into()));
    }
    if !(p_enter < p_remove) {
        return Err(Error::Argument(format!(
            "p_enter ({p_enter}) must be below p_remove ({p_remove})"
        )));
    }
    let y = data.column(response)?;
    let pool = data.select(candidates)?;
    let mut included: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let max_rounds = 4 * pool.len() + 10;

    let fit_with = |idx: &[usize]| -> Result<LinearModelFit> {
        let xs: Vec<Series> = idx.iter().map(|&i| pool[i].clone()).collect();
        fit_ols_series(&y, &xs)
    };

    for _ in 0..max_rounds {
        let mut best: Option<(usize, f64)> = None;
        for c in (0..pool.len()).filter(|c| !included.contains(c)) {
            let mut trial = included.clone();
            trial.push(c);
            let fit = match fit_with(&trial) {
                Ok(f) => f,
                Err(Error::SingularDesign { .. }) | Err(Error::InsufficientData { .. }) => continue,
                Err(e) => return Err(e),
            };
            let p = fit.p_values[trial.len()].value;
            if best.is_none_or(|(_, bp)| p < bp) {
                best = Some((c, p));
            }
        }
        let Some((c, p)) = best.filter(|(_, p)| *p < p_enter) else {
            break;
        };
        included.push(c);
        trace.push(StepwiseStep {
            action: StepAction::Enter,
            variable: pool[c].name.clone(),
            p,
        });

        loop {
            let fit = fit_with(&included)?;
            let worst = (0..included.len())
                .map(|i| (i, fit.p_values[i + 1].value))
                .fold(None, |acc: Option<(usize, f64)>, (i, p)| match acc {
                    Some((_, bp)) if bp >= p => acc,
                    _ => Some((i, p)),
                });
            match worst {
                Some((i, p)) if p > p_remove => {
                    let removed = included.remove(i);
                    trace.push(StepwiseStep {
                        action: StepAction::Remove,
                        variable: pool[removed].name.clone(),
                        p,
                    });
                }
                _ => break,
            }
        }
    }

    Ok(StepwiseResult {
        fit: fit_with(&included)?,
        trace,
    })
}

/// Evaluates the fitted equation at `x`. Extra keys are ignored.
pub fn predict(fit: &LinearModelFit, x: &[(&str, f64)]) -> Result<f64> {
    let mut value = fit.intercept();
    for (j, name) in fit.predictors.iter().enumerate() {
        let v = x
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Argument(format!("no value supplied for predictor '{name}'")))?;
        value += fit.coefficients[j + 1] * v;
    }
    Ok(value)
}
