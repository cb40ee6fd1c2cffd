//! Text serialisations of a [`ReportBundle`].

use std::fmt::Write as _;
use std::str::FromStr;

use indexmap::IndexMap;

use super::{ReportBundle, Table};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            "json" => Ok(Format::Json),
            other => Err(Error::Usage(format!(
                "unknown format '{other}' (expected csv, markdown or json)"
            ))),
        }
    }
}

pub fn emit(bundle: &ReportBundle, format: Format) -> Result<String> {
    match format {
        Format::Csv => emit_csv(bundle),
        Format::Markdown => Ok(emit_markdown(bundle)),
        Format::Json => serde_json::to_string_pretty(bundle)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| Error::Numerical(format!("JSON serialisation failed: {e}"))),
    }
}

fn provenance_pairs(bundle: &ReportBundle) -> Vec<(&'static str, String)> {
    let p = &bundle.provenance;
    vec![
        ("dataset_sha256", p.dataset_sha256.clone()),
        ("dataset_rows", p.dataset_rows.to_string()),
        ("tool_version", p.tool_version.clone()),
        ("seed", p.seed.to_string()),
        ("replicates", p.replicates.to_string()),
        ("normality_alpha", p.normality_alpha.clone()),
        ("durbin_watson_order", p.durbin_watson_order.clone()),
    ]
}

fn md_escape(s: &str) -> String {
    s.replace('|', "\\|")
}

fn markdown_table(out: &mut String, t: &Table) {
    let _ = writeln!(out, "## {}: {}\n", t.id, md_escape(&t.title));
    let header: Vec<String> = t
        .label_columns
        .iter()
        .chain(&t.columns)
        .map(|c| md_escape(c))
        .collect();
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for row in &t.rows {
        let cells: Vec<String> = row
            .labels
            .iter()
            .map(|l| md_escape(l))
            .chain(row.cells.iter().map(|c| md_escape(&c.display())))
            .collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    for note in &t.notes {
        let _ = writeln!(out, "\nNote: {}", md_escape(note));
    }
    out.push('\n');
}

impl Table {
    /// The table as a markdown section.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        markdown_table(&mut out, self);
        out
    }
}

fn emit_markdown(bundle: &ReportBundle) -> String {
    let mut out = String::from("# Reproduction report\n\n");
    for (k, v) in provenance_pairs(bundle) {
        let _ = writeln!(out, "- {k}: {v}");
    }
    out.push('\n');
    for t in bundle.tables.values() {
        markdown_table(&mut out, t);
    }
    for f in bundle.figures.values() {
        let _ = writeln!(out, "## {}: {}\n\n```text\n{}```\n", f.id, f.title, f.to_dat());
    }
    out
}

fn csv_record(fields: &[String]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(fields)
        .map_err(|e| Error::Numerical(format!("CSV write failed: {e}")))?;
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Numerical(format!("CSV write failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV writer emits UTF-8"))
}

/// One section per table: a `[ID] title` line, a header record, then rows
/// keyed by the row key. Numbers are written at full precision.
fn emit_csv(bundle: &ReportBundle) -> Result<String> {
    let mut out = String::from("[PROVENANCE] Provenance\n");
    out.push_str(&csv_record(&["key".into(), "value".into()])?);
    for (k, v) in provenance_pairs(bundle) {
        out.push_str(&csv_record(&[k.to_string(), v])?);
    }
    for t in bundle.tables.values() {
        let _ = write!(out, "\n[{}] {}\n", t.id, t.title);
        let header: Vec<String> = std::iter::once("key".to_string())
            .chain(t.label_columns.iter().cloned())
            .chain(t.columns.iter().cloned())
            .collect();
        out.push_str(&csv_record(&header)?);
        for row in &t.rows {
            let fields: Vec<String> = std::iter::once(row.key.clone())
                .chain(row.labels.iter().cloned())
                .chain(row.cells.iter().map(|c| c.raw()))
                .collect();
            out.push_str(&csv_record(&fields)?);
        }
    }
    Ok(out)
}

/// A table section read back from CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSection {
    pub id: String,
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvSection {
    pub fn field(&self, key: &str, column: &str) -> Option<&str> {
        let j = self.header.iter().position(|h| h == column)?;
        self.rows
            .iter()
            .find(|r| r.first().map(String::as_str) == Some(key))
            .map(|r| r[j].as_str())
    }
}

pub fn parse_csv_sections(text: &str) -> Result<IndexMap<String, CsvSection>> {
    let mut sections = IndexMap::new();
    for block in text.split("\n\n").filter(|b| !b.trim().is_empty()) {
        let (head, body) = block.split_once('\n').unwrap_or((block, ""));
        let head = head.trim_end();
        let (id, title) = head
            .strip_prefix('[')
            .and_then(|h| h.split_once("] "))
            .ok_or_else(|| Error::Parse {
                row: 0,
                column: String::new(),
                message: format!("expected a section header, found '{head}'"),
            })?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(body.as_bytes());
        let mut records = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                row: i + 1,
                column: id.to_string(),
                message: e.to_string(),
            })?;
            records.push(rec.iter().map(str::to_string).collect::<Vec<_>>());
        }
        let mut records = records.into_iter();
        let header = records.next().unwrap_or_default();
        sections.insert(
            id.to_string(),
            CsvSection {
                id: id.to_string(),
                title: title.to_string(),
                header,
                rows: records.collect(),
            },
        );
    }
    Ok(sections)
}
