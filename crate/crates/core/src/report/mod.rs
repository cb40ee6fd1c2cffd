//! End-to-end reproduction pipeline: tables, figure data, predictions and
//! provenance collected into one [`ReportBundle`].

mod emit;
mod golden;

pub use emit::{emit, parse_csv_sections, CsvSection, Format};
pub use golden::{diff_golden, golden_cells, CellDiff, Expected, GoldenCell, GoldenDiff};

use indexmap::IndexMap;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::correlation::{correlation_matrix, CorrelationMatrix};
use crate::dataset::{
    self, bundled_table_a1, Dataset, IDESI, IDESI_DIMENSIONS, IDT, SII, SII_PILLARS, TABLE_A1_COLUMNS,
};
use crate::descriptive::{boxplot_outliers, describe, shapiro_wilk, tukey_hinges, NormalityResult};
use crate::distributions::format_p;
use crate::error::{Error, Result};
use crate::pca::{run_pca, PcaResult, DEFAULT_RETENTION};
use crate::regression::{
    casewise_diagnostics, collinearity, durbin_watson_with_order, fit_ols, null_model, predict,
    stepwise_fit, CollinearityReport, DurbinWatsonResult, LinearModelFit, StepAction, StepwiseResult,
    DEFAULT_P_ENTER, DEFAULT_P_REMOVE, DEFAULT_REPLICATES, INTERCEPT,
};

pub const HUNGARY_IDESI: f64 = 42.0;
/// Published Hungary prediction and the intercept it was computed with.
pub const PRINTED_HUNGARY_SII: f64 = 51.084;
pub const PRINTED_HUNGARY_INTERCEPT: f64 = 15.048;

pub const HISTOGRAM_BINS: usize = 10;
pub const HISTOGRAM_RANGE: (f64, f64) = (-3.5, 3.5);

/// One table cell. Numbers keep full precision; rounding happens on output.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Cell {
    Empty,
    Dash,
    Num(f64),
    P(f64),
    Int(i64),
    Stars { r: f64, stars: String },
    Text(String),
}

fn fmt3(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "∞".into() } else { "-∞".into() };
    }
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Num(v) | Cell::P(v) => Some(*v),
            Cell::Int(i) => Some(*i as f64),
            Cell::Stars { r, .. } => Some(*r),
            _ => None,
        }
    }

    /// Table rendering: three decimals, `<0.001` for small p.
    pub fn display(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Dash => "–".into(),
            Cell::Num(v) => fmt3(*v),
            Cell::P(p) => format_p(*p),
            Cell::Int(i) => i.to_string(),
            Cell::Stars { r, stars } => format!("{}{stars}", fmt3(*r)),
            Cell::Text(t) => t.clone(),
        }
    }

    /// Lossless rendering used by the CSV emitter.
    pub fn raw(&self) -> String {
        match self {
            Cell::Num(v) | Cell::P(v) => v.to_string(),
            Cell::Stars { r, stars } => format!("{r}{stars}"),
            other => other.display(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub key: String,
    pub labels: Vec<String>,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub id: String,
    pub title: String,
    pub label_columns: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new<S: AsRef<str>>(id: &str, title: &str, label_columns: &[&str], columns: &[S]) -> Self {
        Table {
            id: id.into(),
            title: title.into(),
            label_columns: label_columns.iter().map(|s| s.to_string()).collect(),
            columns: columns.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, key: impl Into<String>, labels: &[&str], cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        debug_assert_eq!(labels.len(), self.label_columns.len());
        self.rows.push(Row {
            key: key.into(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            cells,
        });
    }

    pub fn row(&self, key: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.key == key)
    }

    pub fn cell(&self, row: &str, column: &str) -> Option<&Cell> {
        let j = self.columns.iter().position(|c| c == column)?;
        self.row(row).map(|r| &r.cells[j])
    }

    pub fn cell_mut(&mut self, row: &str, column: &str) -> Option<&mut Cell> {
        let j = self.columns.iter().position(|c| c == column)?;
        self.rows.iter_mut().find(|r| r.key == row).map(|r| &mut r.cells[j])
    }

    pub fn value(&self, row: &str, column: &str) -> Option<f64> {
        self.cell(row, column).and_then(Cell::value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotSeries {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Optional per-row point labels (empty when unlabeled).
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure {
    pub id: String,
    pub title: String,
    pub series: Vec<PlotSeries>,
}

impl Figure {
    /// Whitespace-separated plot data, one block per series.
    pub fn to_dat(&self) -> String {
        let mut out = format!("# {}: {}\n", self.id, self.title);
        for s in &self.series {
            out.push_str(&format!("\n# series: {}\n# {}\n", s.name, s.columns.join(" ")));
            for (i, row) in s.rows.iter().enumerate() {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                out.push_str(&line.join(" "));
                if let Some(label) = s.labels.get(i) {
                    out.push_str(&format!(" # {label}"));
                }
                out.push('\n');
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub country: Option<String>,
    pub model: ModelChoice,
    pub predictor: String,
    pub input: f64,
    pub predicted: f64,
    /// Published value for the same input, when one exists.
    pub printed: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Provenance {
    pub dataset_sha256: String,
    pub dataset_rows: usize,
    pub tool_version: String,
    pub seed: u64,
    pub replicates: usize,
    pub normality_alpha: String,
    pub durbin_watson_order: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ReportBundle {
    pub tables: IndexMap<String, Table>,
    pub figures: IndexMap<String, Figure>,
    pub predictions: Vec<Prediction>,
    pub provenance: Provenance,
}

impl ReportBundle {
    pub fn table(&self, id: &str) -> Result<&Table> {
        self.tables
            .get(id)
            .ok_or_else(|| Error::Argument(format!("no table '{id}' in bundle")))
    }

    /// Values that must agree across tables, as (description, left, right).
    pub fn consistency_checks(&self) -> Vec<(String, f64, f64)> {
        let get = |t: &str, r: &str, c: &str| {
            self.tables.get(t).and_then(|t| t.value(r, c)).unwrap_or(f64::NAN)
        };
        vec![
            (
                "T2 R equals the T3 standardised slope".into(),
                get("T2", "H1", "R"),
                get("T3", &format!("H1/{IDESI}"), "Standardised"),
            ),
            (
                "T8 R equals T4 r(SII, IDT)".into(),
                get("T8", "H1", "R"),
                get("T4", &format!("{IDT}/r"), SII),
            ),
            (
                "T1 SII sd equals T2 H0 RMSE".into(),
                get("T1", "Std. deviation", SII),
                get("T2", "H0", "RMSE"),
            ),
            (
                "T7 SII mean equals T3 H0 intercept".into(),
                get("T7", "Mean", SII),
                get("T3", &format!("H0/{INTERCEPT}"), "Unstandardised"),
            ),
            (
                "T7 SII mean equals T9 H0 intercept".into(),
                get("T7", "Mean", SII),
                get("T9", &format!("H0/{INTERCEPT}"), "Unstandardised"),
            ),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Simple,
    Stepwise,
}

impl std::str::FromStr for ModelChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(ModelChoice::Simple),
            "stepwise" => Ok(ModelChoice::Stepwise),
            other => Err(Error::Usage(format!(
                "unknown model '{other}' (expected simple or stepwise)"
            ))),
        }
    }
}

/// Row order used for Durbin-Watson residual sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceOrder {
    /// Countries sorted by name. Reproduces the published d values.
    Alphabetical,
    /// Dataset row order.
    Rows,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    pub replicates: usize,
    /// Predictors with Shapiro-Wilk p below this are excluded before stepwise selection.
    pub normality_alpha: f64,
    pub p_enter: f64,
    pub p_remove: f64,
    pub retention: f64,
    pub sequence: SequenceOrder,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            replicates: DEFAULT_REPLICATES,
            normality_alpha: 0.05,
            p_enter: DEFAULT_P_ENTER,
            p_remove: DEFAULT_P_REMOVE,
            retention: DEFAULT_RETENTION,
            sequence: SequenceOrder::Alphabetical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateEntry {
    pub variable: String,
    pub normality: NormalityResult,
    pub retained: bool,
}

/// Drops candidates whose Shapiro-Wilk p is below `alpha`.
pub fn normality_gate(data: &Dataset, candidates: &[&str], alpha: f64) -> Result<Vec<GateEntry>> {
    candidates
        .iter()
        .map(|&c| {
            let normality = shapiro_wilk(&data.column(c)?)?;
            Ok(GateEntry {
                variable: c.to_string(),
                retained: normality.p.value >= alpha,
                normality,
            })
        })
        .collect()
}

/// Gate then stepwise selection of SII on the I-DESI dimensions.
pub fn stepwise_model(data: &Dataset, config: &PipelineConfig) -> Result<(Vec<GateEntry>, StepwiseResult)> {
    let gate = normality_gate(data, &IDESI_DIMENSIONS, config.normality_alpha)?;
    let kept: Vec<&str> = gate
        .iter()
        .filter(|g| g.retained)
        .map(|g| g.variable.as_str())
        .collect();
    let result = if kept.is_empty() {
        StepwiseResult {
            fit: null_model(data, SII)?,
            trace: Vec::new(),
        }
    } else {
        stepwise_fit(data, SII, &kept, config.p_enter, config.p_remove)?
    };
    Ok((gate, result))
}

pub fn reproduce_all(data: &Dataset, seed: u64) -> Result<ReportBundle> {
    reproduce_with(
        data,
        &PipelineConfig {
            seed,
            ..PipelineConfig::default()
        },
    )
}

pub fn reproduce_with(data: &Dataset, config: &PipelineConfig) -> Result<ReportBundle> {
    data.require_columns(&TABLE_A1_COLUMNS)?;
    let order = match config.sequence {
        SequenceOrder::Alphabetical => data.alphabetical_order(),
        SequenceOrder::Rows => (0..data.len()).collect(),
    };
    let dw = |fit: &LinearModelFit| durbin_watson_with_order(fit, &order, config.replicates, config.seed);

    let mut tables = IndexMap::new();
    let mut add = |t: Table| {
        tables.insert(t.id.clone(), t);
    };

    add(descriptive_table("T1", "Descriptive statistics", data, &TABLE_A1_COLUMNS, false)?);
    add(outlier_table(data, &TABLE_A1_COLUMNS)?);

    let h0 = null_model(data, SII)?;
    let h0_dw = dw(&h0)?;
    let simple = fit_ols(data, SII, &[IDESI])?;
    let simple_dw = dw(&simple)?;
    add(summary_table(
        "T2",
        "Linear regression model summary (SII and I-DESI)",
        [(&h0, &h0_dw), (&simple, &simple_dw)],
    ));
    add(coefficient_table("T3", "Coefficients (SII and I-DESI)", &h0, &simple, None));
    add(anova_table("T3-ANOVA", "ANOVA (SII and I-DESI)", &simple)?);

    let hungary = hungary_prediction(&simple)?;

    let with_sii: Vec<&str> = std::iter::once(SII).chain(IDESI_DIMENSIONS).collect();
    let corr_sii = correlation_matrix(data, &with_sii)?;
    add(correlation_p_table("T4", "Pearson's correlations", &corr_sii));

    let multiple = fit_ols(data, SII, &IDESI_DIMENSIONS)?;
    let coll = collinearity(data, &IDESI_DIMENSIONS)?;
    add(coefficient_table("T5", "Coefficients", &h0, &multiple, Some(&coll)));
    add(casewise_table("T5-CASEWISE", data, &multiple));

    let pca = run_pca(data, &IDESI_DIMENSIONS, config.retention)?;
    add(component_table(&pca));
    add(pca_stats_table(&pca));
    add(eigen_table(&pca));

    add(descriptive_table(
        "T7",
        "Descriptive statistics",
        data,
        &with_sii,
        true,
    )?);
    let (gate, stepwise) = stepwise_model(data, config)?;
    add(gate_table(&gate, config.normality_alpha));

    let step_dw = dw(&stepwise.fit)?;
    add(summary_table(
        "T8",
        "Model summary (SII and IDT)",
        [(&h0, &h0_dw), (&stepwise.fit, &step_dw)],
    ));
    if stepwise.fit.k() > 0 {
        add(anova_table("T9-ANOVA", "ANOVA (SII and IDT)", &stepwise.fit)?);
    }
    let step_coll = match stepwise.fit.k() {
        0 => None,
        1 => Some(CollinearityReport::single(&stepwise.fit.predictors[0])),
        _ => Some(collinearity(data, &stepwise.fit.predictors)?),
    };
    add(coefficient_table(
        "T9",
        "Coefficients (SII and IDT)",
        &h0,
        &stepwise.fit,
        step_coll.as_ref(),
    ));
    add(trace_table("T9-TRACE", &stepwise));

    add(correlation_star_table(
        "T10",
        "Pearson's correlations between SII and I-DESI dimensions",
        &corr_sii,
    ));
    let dims_pillars: Vec<&str> = IDESI_DIMENSIONS.iter().chain(SII_PILLARS.iter()).copied().collect();
    add(correlation_star_table(
        "T11",
        "Pearson's correlation table (I-DESI dimensions and the pillars of SII)",
        &correlation_matrix(data, &dims_pillars)?,
    ));
    add(prediction_table(std::slice::from_ref(&hungary)));

    let mut figures = IndexMap::new();
    figures.insert(
        "F3".to_string(),
        residual_figure(
            "F3",
            "Residuals vs predicted and standardised residual histogram (SII and I-DESI)",
            &simple,
        ),
    );
    figures.insert("F4".to_string(), country_figure(data)?);
    figures.insert(
        "F5".to_string(),
        residual_figure(
            "F5",
            "Residuals vs predicted and standardised residual histogram (SII and IDT)",
            &stepwise.fit,
        ),
    );

    Ok(ReportBundle {
        tables,
        figures,
        predictions: vec![hungary],
        provenance: Provenance {
            dataset_sha256: dataset_digest(data),
            dataset_rows: data.len(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            replicates: config.replicates,
            normality_alpha: config.normality_alpha.to_string(),
            durbin_watson_order: match config.sequence {
                SequenceOrder::Alphabetical => "alphabetical by country".into(),
                SequenceOrder::Rows => "dataset row order".into(),
            },
        },
    })
}

/// SHA-256 of the dataset's canonical CSV form.
pub fn dataset_digest(data: &Dataset) -> String {
    let digest = Sha256::digest(data.to_csv().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Prediction from a model fitted on the bundled dataset.
pub fn predict_country(model: ModelChoice, score: f64) -> Result<Prediction> {
    predict_with(&bundled_table_a1(), &PipelineConfig::default(), model, score)
}

pub fn predict_with(data: &Dataset, config: &PipelineConfig, model: ModelChoice, score: f64) -> Result<Prediction> {
    let (lo, hi) = dataset::SCORE_RANGE;
    if !(lo..=hi).contains(&score) {
        return Err(Error::Validation(format!("score {score} is outside [{lo}, {hi}]")));
    }
    let fit = match model {
        ModelChoice::Simple => fit_ols(data, SII, &[IDESI])?,
        ModelChoice::Stepwise => stepwise_model(data, config)?.1.fit,
    };
    let Some(predictor) = fit.predictors.first().cloned() else {
        return Err(Error::Degenerate("stepwise selection kept no predictor".into()));
    };
    let predicted = predict(&fit, &[(predictor.as_str(), score)])?;
    let published = model == ModelChoice::Simple && score == HUNGARY_IDESI;
    Ok(Prediction {
        country: published.then(|| "Hungary".to_string()),
        model,
        predictor,
        input: score,
        predicted,
        printed: published.then_some(PRINTED_HUNGARY_SII),
        note: published.then(|| hungary_note(&fit)),
    })
}

fn hungary_note(fit: &LinearModelFit) -> String {
    format!(
        "published value {PRINTED_HUNGARY_SII} uses intercept {PRINTED_HUNGARY_INTERCEPT}; \
         the fitted intercept is {:.3}",
        fit.intercept()
    )
}

fn hungary_prediction(simple: &LinearModelFit) -> Result<Prediction> {
    Ok(Prediction {
        country: Some("Hungary".into()),
        model: ModelChoice::Simple,
        predictor: IDESI.into(),
        input: HUNGARY_IDESI,
        predicted: predict(simple, &[(IDESI, HUNGARY_IDESI)])?,
        printed: Some(PRINTED_HUNGARY_SII),
        note: Some(hungary_note(simple)),
    })
}

pub fn descriptive_table(id: &str, title: &str, data: &Dataset, columns: &[&str], normality_first: bool) -> Result<Table> {
    let mut stats = Vec::new();
    let mut normal = Vec::new();
    for c in columns {
        let s = data.column(c)?;
        stats.push(describe(&s)?);
        normal.push(shapiro_wilk(&s)?);
    }
    let mut t = Table::new(id, title, &[""], columns);
    let counts = |f: fn(&crate::descriptive::DescriptiveStats) -> usize| {
        stats.iter().map(|s| Cell::Int(f(s) as i64)).collect::<Vec<_>>()
    };
    let nums = |f: fn(&crate::descriptive::DescriptiveStats) -> f64| {
        stats.iter().map(|s| Cell::Num(f(s))).collect::<Vec<_>>()
    };
    let w: Vec<Cell> = normal.iter().map(|n| Cell::Num(n.w)).collect();
    let p: Vec<Cell> = normal.iter().map(|n| Cell::P(n.p.value)).collect();

    t.push("Valid", &["Valid"], counts(|s| s.valid));
    t.push("Missing", &["Missing"], counts(|s| s.missing));
    t.push("Mean", &["Mean"], nums(|s| s.mean));
    t.push("Std. deviation", &["Std. deviation"], nums(|s| s.std_deviation));
    if normality_first {
        t.push("Shapiro-Wilk", &["Shapiro-Wilk"], w.clone());
        t.push("P-value of Shapiro-Wilk", &["P-value of Shapiro-Wilk"], p.clone());
    }
    t.push("Minimum", &["Minimum"], nums(|s| s.minimum));
    t.push("Maximum", &["Maximum"], nums(|s| s.maximum));
    if !normality_first {
        t.push("Shapiro-Wilk", &["Shapiro-Wilk"], w);
        t.push("P-value of Shapiro-Wilk", &["P-value of Shapiro-Wilk"], p);
    }
    Ok(t)
}

pub fn outlier_table(data: &Dataset, columns: &[&str]) -> Result<Table> {
    let mut t = Table::new(
        "T1-OUTLIERS",
        "Boxplot outlier screen (Tukey hinges, 1.5 IQR)",
        &["Variable"],
        &["Lower hinge", "Upper hinge", "Lower fence", "Upper fence", "Outliers"],
    );
    for c in columns {
        let s = data.column(c)?;
        let (q1, q3) = tukey_hinges(&s.values)?;
        let iqr = q3 - q1;
        let outliers = boxplot_outliers(&s)?;
        for &i in &outliers {
            t.notes.push(format!("{c}: {}", data.records()[i].name));
        }
        t.push(
            *c,
            &[c],
            vec![
                Cell::Num(q1),
                Cell::Num(q3),
                Cell::Num(q1 - 1.5 * iqr),
                Cell::Num(q3 + 1.5 * iqr),
                Cell::Int(outliers.len() as i64),
            ],
        );
    }
    Ok(t)
}

pub fn summary_table(id: &str, title: &str, models: [(&LinearModelFit, &DurbinWatsonResult); 2]) -> Table {
    let mut t = Table::new(
        id,
        title,
        &["Model"],
        &[
            "R",
            "R²",
            "Adjusted R²",
            "RMSE",
            "Durbin-Watson autocorrelation",
            "Durbin-Watson statistic",
            "Durbin-Watson p",
        ],
    );
    for ((key, label), (fit, dw)) in [("H0", "H₀"), ("H1", "H₁")].into_iter().zip(models) {
        t.push(
            key,
            &[label],
            vec![
                Cell::Num(fit.r),
                Cell::Num(fit.r_squared),
                Cell::Num(fit.adjusted_r_squared),
                Cell::Num(fit.rmse),
                Cell::Num(dw.autocorrelation),
                Cell::Num(dw.d),
                Cell::P(dw.p.value),
            ],
        );
    }
    t.notes.push(format!(
        "Durbin-Watson p from {} permutation replicates, seed {}",
        models[1].1.replicates, models[1].1.seed
    ));
    t
}

pub fn coefficient_table(
    id: &str,
    title: &str,
    h0: &LinearModelFit,
    h1: &LinearModelFit,
    coll: Option<&CollinearityReport>,
) -> Table {
    let mut columns = vec!["Unstandardised", "Standard error", "Standardised", "t", "p"];
    let with_coll = coll.is_some();
    if with_coll {
        columns.extend(["Tolerance", "VIF"]);
    }
    let mut t = Table::new(id, title, &["Model", "Term"], &columns);
    for (model, label, fit) in [("H0", "H₀", h0), ("H1", "H₁", h1)] {
        for j in 0..=fit.k() {
            let term = if j == 0 { INTERCEPT } else { fit.predictors[j - 1].as_str() };
            let mut cells = vec![
                Cell::Num(fit.coefficients[j]),
                Cell::Num(fit.standard_errors[j]),
                fit.standardized_betas[j].map_or(Cell::Empty, Cell::Num),
                Cell::Num(fit.t_values[j]),
                Cell::P(fit.p_values[j].value),
            ];
            if with_coll {
                match coll.and_then(|c| c.get(term)) {
                    Some(e) => cells.extend([Cell::Num(e.tolerance), Cell::Num(e.vif)]),
                    None => cells.extend([Cell::Empty, Cell::Empty]),
                }
            }
            let model_label = if j == 0 { label } else { "" };
            t.push(format!("{model}/{term}"), &[model_label, term], cells);
        }
    }
    t
}

pub fn anova_table(id: &str, title: &str, fit: &LinearModelFit) -> Result<Table> {
    let a = crate::regression::anova(fit)?;
    let mut t = Table::new(id, title, &["Source"], &["Sum of squares", "df", "Mean square", "F", "p"]);
    t.push(
        "Regression",
        &["Regression"],
        vec![
            Cell::Num(a.regression_ss),
            Cell::Int(a.df_regression as i64),
            Cell::Num(a.mean_square_regression),
            Cell::Num(a.f),
            Cell::P(a.p.value),
        ],
    );
    t.push(
        "Residual",
        &["Residual"],
        vec![
            Cell::Num(a.residual_ss),
            Cell::Int(a.df_residual as i64),
            Cell::Num(a.mean_square_residual),
            Cell::Empty,
            Cell::Empty,
        ],
    );
    t.push(
        "Total",
        &["Total"],
        vec![
            Cell::Num(a.total_ss),
            Cell::Int((a.df_regression + a.df_residual) as i64),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
        ],
    );
    Ok(t)
}

fn numbered(i: usize, name: &str) -> String {
    format!("{}. {name}", i + 1)
}

pub fn correlation_p_table(id: &str, title: &str, m: &CorrelationMatrix) -> Table {
    let mut t = Table::new(id, title, &["Variable", ""], &m.variables);
    for (i, v) in m.variables.iter().enumerate() {
        let lower = |f: &dyn Fn(usize) -> Cell| -> Vec<Cell> {
            (0..m.variables.len())
                .map(|j| match j.cmp(&i) {
                    std::cmp::Ordering::Less => f(j),
                    std::cmp::Ordering::Equal => Cell::Dash,
                    std::cmp::Ordering::Greater => Cell::Empty,
                })
                .collect()
        };
        let label = numbered(i, v);
        t.push(format!("{v}/r"), &[&label, "Pearson's r"], lower(&|j| Cell::Num(m.r[i][j])));
        t.push(format!("{v}/p"), &["", "p-value"], lower(&|j| Cell::P(m.p[i][j])));
    }
    t
}

pub fn correlation_star_table(id: &str, title: &str, m: &CorrelationMatrix) -> Table {
    let mut t = Table::new(id, title, &["Variable"], &m.variables);
    for (i, v) in m.variables.iter().enumerate() {
        let cells = (0..m.variables.len())
            .map(|j| match j.cmp(&i) {
                std::cmp::Ordering::Less => Cell::Stars {
                    r: m.r[i][j],
                    stars: m.stars[i][j].clone(),
                },
                std::cmp::Ordering::Equal => Cell::Dash,
                std::cmp::Ordering::Greater => Cell::Empty,
            })
            .collect();
        t.push(v.as_str(), &[&numbered(i, v)], cells);
    }
    t.notes.push("* p < .05, ** p < .01, *** p < .001".into());
    t
}

pub fn casewise_table(id: &str, data: &Dataset, fit: &LinearModelFit) -> Table {
    let diag = casewise_diagnostics(fit);
    let max_abs = |v: &[f64]| v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let mut t = Table::new(
        id,
        "Casewise diagnostics (|standardised residual| > 3 or Cook's distance > 1)",
        &[""],
        &["Value"],
    );
    t.push("Flagged rows", &["Flagged rows"], vec![Cell::Int(diag.flagged.len() as i64)]);
    t.push(
        "Max Cook's distance",
        &["Max Cook's distance"],
        vec![Cell::Num(max_abs(&diag.cooks_distance))],
    );
    t.push(
        "Max |standardised residual|",
        &["Max |standardised residual|"],
        vec![Cell::Num(max_abs(&diag.standardized_residuals))],
    );
    for &i in &diag.flagged {
        t.notes.push(format!(
            "{}: standardised residual {:.3}, Cook's distance {:.3}",
            data.records()[i].name,
            diag.standardized_residuals[i],
            diag.cooks_distance[i]
        ));
    }
    t
}

pub fn component_table(pca: &PcaResult) -> Table {
    let columns: Vec<String> = (1..=pca.retained).map(|j| format!("Component {j}")).collect();
    let mut t = Table::new("T6", "Component matrix", &["Variable"], &columns);
    for (i, v) in pca.variables.iter().enumerate() {
        let cells = pca.loadings[i][..pca.retained].iter().map(|&l| Cell::Num(l)).collect();
        t.push(v.as_str(), &[v], cells);
    }
    t.notes.push(format!(
        "{} component(s) extracted (eigenvalue ≥ 1). Extraction method: PCA.",
        pca.retained
    ));
    t
}

pub fn pca_stats_table(pca: &PcaResult) -> Table {
    let mut t = Table::new("T6-STATS", "Sampling adequacy and sphericity", &[""], &["Value"]);
    let retained_pct = pca.cumulative_pct.get(pca.retained.max(1) - 1).copied().unwrap_or(0.0);
    let rows = [
        ("KMO", Cell::Num(pca.kmo)),
        ("Bartlett chi-square", Cell::Num(pca.bartlett.statistic)),
        ("Bartlett df", Cell::Int(pca.bartlett.df as i64)),
        ("Bartlett p", Cell::P(pca.bartlett.p.value)),
        ("Variance explained (%)", Cell::Num(retained_pct)),
        ("Components retained", Cell::Int(pca.retained as i64)),
    ];
    for (k, c) in rows {
        t.push(k, &[k], vec![c]);
    }
    t
}

pub fn eigen_table(pca: &PcaResult) -> Table {
    let mut t = Table::new(
        "T6-EIGEN",
        "Total variance explained",
        &["Component"],
        &["Eigenvalue", "% of variance", "Cumulative %"],
    );
    for j in 0..pca.eigenvalues.len() {
        let label = (j + 1).to_string();
        t.push(
            label.as_str(),
            &[&label],
            vec![
                Cell::Num(pca.eigenvalues[j]),
                Cell::Num(pca.variance_explained_pct[j]),
                Cell::Num(pca.cumulative_pct[j]),
            ],
        );
    }
    t
}

pub fn gate_table(gate: &[GateEntry], alpha: f64) -> Table {
    let mut t = Table::new(
        "T7-GATE",
        "Normality gate for stepwise candidates",
        &["Variable"],
        &["Shapiro-Wilk", "p", "Decision"],
    );
    for g in gate {
        t.push(
            g.variable.as_str(),
            &[&g.variable],
            vec![
                Cell::Num(g.normality.w),
                Cell::P(g.normality.p.value),
                Cell::Text(if g.retained { "retained" } else { "excluded" }.into()),
            ],
        );
    }
    t.notes.push(format!("candidates with Shapiro-Wilk p < {alpha} are excluded"));
    t
}

pub fn trace_table(id: &str, step: &StepwiseResult) -> Table {
    let mut t = Table::new(id, "Stepwise selection trace", &["Step"], &["Action", "Variable", "p"]);
    for (i, s) in step.trace.iter().enumerate() {
        let label = (i + 1).to_string();
        let action = match s.action {
            StepAction::Enter => "enter",
            StepAction::Remove => "remove",
        };
        t.push(
            format!("step {label}"),
            &[&label],
            vec![Cell::Text(action.into()), Cell::Text(s.variable.clone()), Cell::P(s.p)],
        );
    }
    t.push(
        "selected",
        &["selected"],
        vec![
            Cell::Text("final".into()),
            Cell::Text(step.fit.predictors.join("; ")),
            Cell::Empty,
        ],
    );
    t
}

pub fn prediction_table(predictions: &[Prediction]) -> Table {
    let mut t = Table::new(
        "PRED",
        "Predicted SII",
        &["Country", "Model"],
        &["Input", "Predicted", "Published", "Note"],
    );
    for p in predictions {
        let country = p.country.clone().unwrap_or_default();
        let model = match p.model {
            ModelChoice::Simple => "simple",
            ModelChoice::Stepwise => "stepwise",
        };
        t.push(
            format!("{country}/{model}"),
            &[&country, model],
            vec![
                Cell::Num(p.input),
                Cell::Num(p.predicted),
                p.printed.map_or(Cell::Empty, Cell::Num),
                p.note.clone().map_or(Cell::Empty, Cell::Text),
            ],
        );
    }
    t
}

/// Equal-width histogram as (bin centre, count); values beyond the range fall
/// into the outermost bins.
pub fn histogram(values: &[f64], bins: usize, range: (f64, f64)) -> Vec<Vec<f64>> {
    let (lo, hi) = range;
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in values {
        let b = ((v - lo) / width).floor().clamp(0.0, (bins - 1) as f64) as usize;
        counts[b] += 1;
    }
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| vec![lo + (i as f64 + 0.5) * width, c as f64])
        .collect()
}

fn residual_figure(id: &str, title: &str, fit: &LinearModelFit) -> Figure {
    let diag = casewise_diagnostics(fit);
    Figure {
        id: id.into(),
        title: title.into(),
        series: vec![
            PlotSeries {
                name: "residuals_vs_predicted".into(),
                columns: vec!["predicted".into(), "residual".into()],
                rows: fit
                    .fitted
                    .iter()
                    .zip(&fit.residuals)
                    .map(|(f, e)| vec![*f, *e])
                    .collect(),
                labels: Vec::new(),
            },
            PlotSeries {
                name: "standardised_residual_histogram".into(),
                columns: vec!["bin_centre".into(), "count".into()],
                rows: histogram(&diag.standardized_residuals, HISTOGRAM_BINS, HISTOGRAM_RANGE),
                labels: Vec::new(),
            },
        ],
    }
}

fn country_figure(data: &Dataset) -> Result<Figure> {
    let x = data.column(IDESI)?;
    let y = data.column(SII)?;
    Ok(Figure {
        id: "F4".into(),
        title: "Countries by SII and I-DESI".into(),
        series: vec![PlotSeries {
            name: "countries".into(),
            columns: vec![IDESI.into(), SII.into()],
            rows: x.values.iter().zip(&y.values).map(|(a, b)| vec![*a, *b]).collect(),
            labels: data.country_names().iter().map(|s| s.to_string()).collect(),
        }],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_rendering() {
        assert_eq!(Cell::Num(-0.0001).display(), "0.000");
        assert_eq!(Cell::P(0.0002).display(), "<0.001");
        assert_eq!(Cell::Stars { r: 0.6581, stars: "***".into() }.display(), "0.658***");
        assert_eq!(Cell::Num(f64::INFINITY).display(), "∞");
        assert_eq!(Cell::Dash.value(), None);
    }

    #[test]
    fn histogram_clamps_to_edges() {
        let h = histogram(&[-9.0, 0.0, 0.1, 3.5, 9.0], 10, (-3.5, 3.5));
        assert_eq!(h.len(), 10);
        assert_eq!(h[0][1], 1.0);
        assert_eq!(h[9][1], 2.0);
        assert_eq!(h.iter().map(|r| r[1]).sum::<f64>(), 5.0);
        assert!((h[0][0] + 3.15).abs() < 1e-12);
    }

    #[test]
    fn model_choice_parse() {
        assert_eq!("simple".parse::<ModelChoice>().unwrap(), ModelChoice::Simple);
        assert!(matches!("lasso".parse::<ModelChoice>(), Err(Error::Usage(_))));
    }

    #[test]
    fn prediction_range_checked() {
        assert!(matches!(
            predict_country(ModelChoice::Simple, 101.0),
            Err(Error::Validation(_))
        ));
    }
}
