//! Weighted composite indices.
//!
//! An [`IndexDefinition`] is an ordered list of weighted components, each of
//! which may carry a nested definition (pillar → indicator). Weights are
//! renormalised to sum to one at evaluation time, so published percentages
//! that round to 99.99% still give an exact weighted average.

use std::collections::HashMap;

use serde::Serialize;

use crate::dataset::{self, Dataset};
use crate::error::{Error, Result};

/// Maximum nesting depth (pillar → indicator).
pub const MAX_DEPTH: usize = 2;

/// How a raw component score is mapped onto the 0–100 scale before weighting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Normalization {
    /// Score is already on the 0–100 scale.
    None,
    /// Linear rescaling between fixed bounds, clamped to [0, 100].
    MinMax { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub name: String,
    pub weight: f64,
    pub normalization: Normalization,
    pub sub: Option<IndexDefinition>,
}

impl Component {
    pub fn new(name: impl Into<String>, weight: f64) -> Self {
        Component {
            name: name.into(),
            weight,
            normalization: Normalization::None,
            sub: None,
        }
    }

    pub fn with_bounds(mut self, lo: f64, hi: f64) -> Self {
        self.normalization = Normalization::MinMax { lo, hi };
        self
    }

    pub fn with_sub(mut self, sub: IndexDefinition) -> Self {
        self.sub = Some(sub);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexDefinition {
    pub name: String,
    pub components: Vec<Component>,
}

/// A composite value with the weighted contribution of each component.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexScore {
    pub country: Option<String>,
    pub value: f64,
    pub contributions: Vec<(String, f64)>,
}

impl IndexDefinition {
    /// Validates weights, names and depth.
    pub fn new(name: impl Into<String>, components: Vec<Component>) -> Result<Self> {
        let def = IndexDefinition {
            name: name.into(),
            components,
        };
        def.validate(1)?;
        Ok(def)
    }

    fn validate(&self, depth: usize) -> Result<()> {
        if depth > MAX_DEPTH {
            return Err(Error::Definition(format!(
                "'{}' nests deeper than {MAX_DEPTH} levels",
                self.name
            )));
        }
        if self.components.is_empty() {
            return Err(Error::Definition(format!("'{}' has no components", self.name)));
        }
        let mut names = std::collections::HashSet::new();
        for c in &self.components {
            if !names.insert(c.name.as_str()) {
                return Err(Error::Definition(format!(
                    "'{}' lists component '{}' twice",
                    self.name, c.name
                )));
            }
            if !(c.weight > 0.0) || !c.weight.is_finite() {
                return Err(Error::Definition(format!(
                    "component '{}' has non-positive weight {}",
                    c.name, c.weight
                )));
            }
            if let Normalization::MinMax { lo, hi } = c.normalization {
                if !(hi > lo) {
                    return Err(Error::Definition(format!(
                        "component '{}' has degenerate bounds [{lo}, {hi}]",
                        c.name
                    )));
                }
            }
            if let Some(sub) = &c.sub {
                sub.validate(depth + 1)?;
            }
        }
        Ok(())
    }

    pub fn weight_sum(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// Component weights divided by their sum.
    pub fn normalized_weights(&self) -> Result<Vec<f64>> {
        let total = self.weight_sum();
        if !(total > 0.0) {
            return Err(Error::Definition(format!(
                "weights of '{}' sum to zero",
                self.name
            )));
        }
        Ok(self.components.iter().map(|c| c.weight / total).collect())
    }

    /// Names of the top-level components.
    pub fn component_names(&self) -> Vec<&str> {
        self.components.iter().map(|c| c.name.as_str()).collect()
    }
}

/// Weighted average of component scores.
///
/// A score supplied for a component name is used directly; otherwise, if the
/// component has a nested definition, that definition is evaluated from the
/// same score map. Scores after normalisation must lie in [0, 100].
pub fn compute_composite(
    definition: &IndexDefinition,
    scores: &HashMap<String, f64>,
) -> Result<IndexScore> {
    let weights = definition.normalized_weights()?;
    let mut contributions = Vec::with_capacity(weights.len());
    for (c, w) in definition.components.iter().zip(weights) {
        let raw = match (scores.get(&c.name), &c.sub) {
            (Some(&v), _) => v,
            (None, Some(sub)) => compute_composite(sub, scores)?.value,
            (None, None) => {
                return Err(Error::Definition(format!(
                    "no score for component '{}' of '{}'",
                    c.name, definition.name
                )))
            }
        };
        let v = match c.normalization {
            Normalization::None => raw,
            Normalization::MinMax { lo, hi } => normalize_one(raw, lo, hi),
        };
        if !v.is_finite() || !(0.0..=100.0).contains(&v) {
            return Err(Error::Validation(format!(
                "score {v} for '{}' outside [0, 100]",
                c.name
            )));
        }
        contributions.push((c.name.clone(), w * v));
    }
    let value = contributions.iter().map(|(_, c)| c).sum();
    Ok(IndexScore {
        country: None,
        value,
        contributions,
    })
}

/// Evaluates a definition for every row, reading component scores from the
/// dataset columns of the same names.
pub fn evaluate_dataset(definition: &IndexDefinition, data: &Dataset) -> Result<Vec<IndexScore>> {
    data.records()
        .iter()
        .map(|rec| {
            let scores: HashMap<String, f64> = data
                .columns()
                .iter()
                .cloned()
                .zip(rec.values.iter().copied())
                .collect();
            let mut s = compute_composite(definition, &scores)?;
            s.country = Some(rec.name.clone());
            Ok(s)
        })
        .collect()
}

fn check_range(values: &[f64]) -> Result<()> {
    for &v in values {
        if !v.is_finite() || !(0.0..=100.0).contains(&v) {
            return Err(Error::Validation(format!("score {v} outside [0, 100]")));
        }
    }
    Ok(())
}

/// SII from its four pillar scores (policy, financing, entrepreneurship, society).
pub fn compute_sii_from_pillars(pillars: [f64; 4]) -> Result<f64> {
    check_range(&pillars)?;
    let def = sii_2016();
    let scores = dataset::SII_PILLARS
        .iter()
        .map(|s| s.to_string())
        .zip(pillars)
        .collect();
    Ok(compute_composite(&def, &scores)?.value)
}

/// I-DESI from its five dimension scores (connectivity, human capital, use of
/// internet, integration of digital technology, digital public services).
pub fn compute_idesi(dimensions: [f64; 5]) -> Result<f64> {
    check_range(&dimensions)?;
    let def = idesi_2020();
    let scores = dataset::IDESI_DIMENSIONS
        .iter()
        .map(|s| s.to_string())
        .zip(dimensions)
        .collect();
    Ok(compute_composite(&def, &scores)?.value)
}

fn normalize_one(v: f64, lo: f64, hi: f64) -> f64 {
    (100.0 * (v - lo) / (hi - lo)).clamp(0.0, 100.0)
}

/// Maps each value to `100·(v − lo)/(hi − lo)`, clamped to [0, 100].
pub fn min_max_normalize(values: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !(hi > lo) {
        return Err(Error::Domain(format!("degenerate range [{lo}, {hi}]")));
    }
    Ok(values.iter().map(|&v| normalize_one(v, lo, hi)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankEntry {
    pub rank: usize,
    pub country: String,
    pub score: f64,
}

/// Descending ranking with competition ranks (ties share the smaller rank);
/// ties keep their input order.
pub fn rank(data: &Dataset, column: &str) -> Result<Vec<RankEntry>> {
    let series = data.column(column)?;
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| series.values[b].total_cmp(&series.values[a]));
    let mut out: Vec<RankEntry> = Vec::with_capacity(order.len());
    for (pos, &i) in order.iter().enumerate() {
        let score = series.values[i];
        let rank = match out.last() {
            Some(prev) if prev.score == score => prev.rank,
            _ => pos + 1,
        };
        out.push(RankEntry {
            rank,
            country: data.records()[i].name.clone(),
            score,
        });
    }
    Ok(out)
}

/// Social Innovation Index 2016: four pillars with their published
/// indicator-level weights. Indicator bounds are the raw rating scales.
pub fn sii_2016() -> IndexDefinition {
    let policy = IndexDefinition {
        name: dataset::POLICY.into(),
        components: vec![
            Component::new("Existence of national policy on social innovation", 25.0).with_bounds(0.0, 2.0),
            Component::new("Social innovation research and impact", 20.0).with_bounds(0.0, 3.0),
            Component::new("Legal framework for social enterprises", 20.0).with_bounds(0.0, 2.0),
            Component::new("Effectiveness of system in policy implementation", 20.0).with_bounds(1.0, 5.0),
            Component::new("The rule of law", 15.0).with_bounds(1.0, 5.0),
        ],
    };
    let financing = IndexDefinition {
        name: dataset::FINANCING.into(),
        components: vec![
            Component::new("Availability of government financing to promote social innovation", 50.0)
                .with_bounds(0.0, 7.0),
            Component::new("Ease of getting credit", 25.0).with_bounds(0.0, 12.0),
            Component::new("Total public social expenditure", 25.0),
        ],
    };
    let entrepreneurship = IndexDefinition {
        name: dataset::ENTREPRENEURSHIP.into(),
        components: vec![
            Component::new("Risk-taking mind-set", 25.0),
            Component::new("Citizens' attitude towards entrepreneurship", 25.0),
            Component::new("Ease of starting a business", 25.0).with_bounds(1.0, 5.0),
            Component::new("Development of clusters", 25.0).with_bounds(1.0, 7.0),
        ],
    };
    let society = IndexDefinition {
        name: dataset::SOCIETY.into(),
        components: vec![
            Component::new("Culture of volunteerism", 20.0),
            Component::new("Political participation", 20.0).with_bounds(0.0, 10.0),
            Component::new("Civil society engagement", 20.0),
            Component::new("Trust in society", 20.0),
            Component::new("Press freedom", 20.0),
        ],
    };
    IndexDefinition {
        name: "sii-2016".into(),
        components: vec![
            Component::new(dataset::POLICY, 44.44).with_sub(policy),
            Component::new(dataset::FINANCING, 22.22).with_sub(financing),
            Component::new(dataset::ENTREPRENEURSHIP, 15.0).with_sub(entrepreneurship),
            Component::new(dataset::SOCIETY, 18.33).with_sub(society),
        ],
    }
}

/// International Digital Economy and Society Index: five weighted dimensions.
pub fn idesi_2020() -> IndexDefinition {
    IndexDefinition {
        name: "idesi-2020".into(),
        components: vec![
            Component::new(dataset::CONNECTIVITY, 0.25),
            Component::new(dataset::HUMAN_CAPITAL, 0.25),
            Component::new(dataset::USE_OF_INTERNET, 0.15),
            Component::new(dataset::IDT, 0.2),
            Component::new(dataset::DIGITAL_PUBLIC_SERVICES, 0.15),
        ],
    }
}

/// Looks up a built-in definition by name.
pub fn preset(name: &str) -> Result<IndexDefinition> {
    match name {
        "sii-2016" => Ok(sii_2016()),
        "idesi-2020" => Ok(idesi_2020()),
        other => Err(Error::Usage(format!(
            "unknown preset '{other}' (expected sii-2016 or idesi-2020)"
        ))),
    }
}

/// Parses the line-oriented definition format:
///
/// ```text
/// index: my-index
/// # comment
/// Pillar A, 60%
///   Indicator 1, 0.5, 0, 5
///   Indicator 2, 0.5
/// Pillar B, 40%
/// ```
///
/// Each line is `name, weight[, lo, hi]`; weights may carry a `%` suffix and
/// `lo, hi` request min-max normalisation. Indented lines belong to the
/// closest preceding unindented component.
pub fn parse_definition(text: &str) -> Result<IndexDefinition> {
    let mut name = "custom".to_string();
    let mut components: Vec<Component> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("index:") {
            name = rest.trim().to_string();
            continue;
        }
        let indented = raw.starts_with(' ') || raw.starts_with('\t');
        let component = parse_component_line(trimmed, line_no)?;
        if indented {
            let parent = components.last_mut().ok_or_else(|| {
                Error::Definition(format!("line {line_no}: indented component without a parent"))
            })?;
            parent
                .sub
                .get_or_insert_with(|| IndexDefinition {
                    name: parent.name.clone(),
                    components: Vec::new(),
                })
                .components
                .push(component);
        } else {
            components.push(component);
        }
    }
    IndexDefinition::new(name, components)
}

fn parse_component_line(line: &str, line_no: usize) -> Result<Component> {
    let parts: Vec<&str> = line.split(',').map(str::trim).collect();
    let bad = |msg: &str| Error::Definition(format!("line {line_no}: {msg}"));
    if parts.len() != 2 && parts.len() != 4 {
        return Err(bad("expected 'name, weight' or 'name, weight, lo, hi'"));
    }
    if parts[0].is_empty() {
        return Err(bad("empty component name"));
    }
    let weight = match parts[1].strip_suffix('%') {
        Some(pct) => pct.trim().parse::<f64>().map(|w| w / 100.0),
        None => parts[1].parse::<f64>(),
    }
    .map_err(|_| bad(&format!("weight '{}' is not a number", parts[1])))?;
    let mut c = Component::new(parts[0], weight);
    if parts.len() == 4 {
        let lo: f64 = parts[2].parse().map_err(|_| bad("lower bound is not a number"))?;
        let hi: f64 = parts[3].parse().map_err(|_| bad("upper bound is not a number"))?;
        c = c.with_bounds(lo, hi);
    }
    Ok(c)
}
