//! Country-by-indicator datasets: CSV parsing, validation, column selection and
//! the bundled 29-country fixture.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};

pub const SII: &str = "SII";
pub const POLICY: &str = "Policy and institutional framework";
pub const FINANCING: &str = "Financing";
pub const ENTREPRENEURSHIP: &str = "Entrepreneurship";
pub const SOCIETY: &str = "Society";
pub const IDESI: &str = "I-DESI";
pub const CONNECTIVITY: &str = "Connectivity";
pub const HUMAN_CAPITAL: &str = "Human capital";
pub const USE_OF_INTERNET: &str = "Use of the internet";
pub const IDT: &str = "Integration of digital technology";
pub const DIGITAL_PUBLIC_SERVICES: &str = "Digital public services";

/// The four SII pillars in index order.
pub const SII_PILLARS: [&str; 4] = [POLICY, FINANCING, ENTREPRENEURSHIP, SOCIETY];

/// The five I-DESI dimensions in index order.
pub const IDESI_DIMENSIONS: [&str; 5] = [
    CONNECTIVITY,
    HUMAN_CAPITAL,
    USE_OF_INTERNET,
    IDT,
    DIGITAL_PUBLIC_SERVICES,
];

/// Column layout of the bundled fixture (after the leading `country` column).
pub const TABLE_A1_COLUMNS: [&str; 11] = [
    SII,
    POLICY,
    FINANCING,
    ENTREPRENEURSHIP,
    SOCIETY,
    IDESI,
    CONNECTIVITY,
    HUMAN_CAPITAL,
    USE_OF_INTERNET,
    IDT,
    DIGITAL_PUBLIC_SERVICES,
];

/// Lowest and highest admissible score.
pub const SCORE_RANGE: (f64, f64) = (0.0, 100.0);

const COUNTRY_HEADER: &str = "country";
const TABLE_A1_CSV: &str = include_str!("../data/table_a1.csv");

/// One country's scores, aligned to the owning dataset's column list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountryRecord {
    pub name: String,
    pub values: Vec<f64>,
}

/// A named numeric column, in dataset row order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Series {
            name: name.into(),
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Immutable table of countries × named score columns.
///
/// Row order is preserved from the source and is significant: serial
/// statistics such as Durbin-Watson depend on it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    columns: Vec<String>,
    records: Vec<CountryRecord>,
}

impl Dataset {
    /// Validates and assembles a dataset.
    pub fn new(columns: Vec<String>, records: Vec<CountryRecord>) -> Result<Self> {
        let mut seen_cols = HashSet::new();
        for c in &columns {
            if !seen_cols.insert(c.as_str()) {
                return Err(Error::Validation(format!("duplicate column '{c}'")));
            }
        }
        let mut seen = HashSet::new();
        for (i, rec) in records.iter().enumerate() {
            if !seen.insert(rec.name.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate country '{}' at row {}",
                    rec.name,
                    i + 1
                )));
            }
            if rec.values.len() != columns.len() {
                return Err(Error::Validation(format!(
                    "row {} ('{}') has {} values, expected {}",
                    i + 1,
                    rec.name,
                    rec.values.len(),
                    columns.len()
                )));
            }
            for (v, c) in rec.values.iter().zip(&columns) {
                check_score(*v, i + 1, c)?;
            }
        }
        Ok(Dataset { columns, records })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn records(&self) -> &[CountryRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn country_names(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.name.as_str()).collect()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c == name)
    }

    pub fn record(&self, country: &str) -> Option<&CountryRecord> {
        self.records.iter().find(|r| r.name == country)
    }

    /// Score of `country` in `column`.
    pub fn value(&self, country: &str, column: &str) -> Result<f64> {
        let j = self.column_index(column)?;
        self.record(country)
            .map(|r| r.values[j])
            .ok_or_else(|| Error::Argument(format!("unknown country '{country}'")))
    }

    pub fn column(&self, name: &str) -> Result<Series> {
        let j = self.column_index(name)?;
        Ok(Series::new(
            name,
            self.records.iter().map(|r| r.values[j]).collect(),
        ))
    }

    /// Extracts the named columns; names may repeat.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<Series>> {
        names.iter().map(|n| self.column(n.as_ref())).collect()
    }

    /// A copy with rows rearranged so that row `i` is `self` row `order[i]`.
    pub fn reordered(&self, order: &[usize]) -> Result<Dataset> {
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.len()).collect::<Vec<_>>() {
            return Err(Error::Argument("row order must be a permutation".into()));
        }
        Ok(Dataset {
            columns: self.columns.clone(),
            records: order.iter().map(|&i| self.records[i].clone()).collect(),
        })
    }

    /// Row indices that put the countries in byte-wise alphabetical order.
    pub fn alphabetical_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.records[a].name.cmp(&self.records[b].name));
        order
    }

    /// A copy without row `index`.
    pub fn without_row(&self, index: usize) -> Result<Dataset> {
        if index >= self.len() {
            return Err(Error::Argument(format!(
                "row {index} out of range for {} rows",
                self.len()
            )));
        }
        let mut records = self.records.clone();
        records.remove(index);
        Ok(Dataset {
            columns: self.columns.clone(),
            records,
        })
    }

    /// Appends a record, re-running validation.
    pub fn with_record(&self, record: CountryRecord) -> Result<Dataset> {
        let mut records = self.records.clone();
        records.push(record);
        Dataset::new(self.columns.clone(), records)
    }

    /// Builds a dataset from columns of equal length with generated row names.
    pub fn from_series(series: &[Series]) -> Result<Dataset> {
        let n = series.first().map_or(0, Series::len);
        if series.iter().any(|s| s.len() != n) {
            return Err(Error::Shape("series differ in length".into()));
        }
        let columns = series.iter().map(|s| s.name.clone()).collect();
        let records = (0..n)
            .map(|i| CountryRecord {
                name: format!("row{}", i + 1),
                values: series.iter().map(|s| s.values[i]).collect(),
            })
            .collect();
        Dataset::new(columns, records)
    }

    /// Serialises to the CSV schema read by [`parse_dataset`]. Values use the
    /// shortest representation that parses back to the same `f64`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header = vec![COUNTRY_HEADER.to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for rec in &self.records {
            let mut row = vec![rec.name.clone()];
            row.extend(rec.values.iter().map(|v| format_value(*v)));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    /// Checks that every column in `required` is present.
    pub fn require_columns(&self, required: &[&str]) -> Result<()> {
        let missing: Vec<String> = required
            .iter()
            .filter(|c| !self.has_column(c))
            .map(|c| c.to_string())
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::Schema { missing })
        }
    }
}

// Integral values keep one decimal so the export reads like the published table.
fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

fn check_score(v: f64, row: usize, column: &str) -> Result<()> {
    if !v.is_finite() || v < SCORE_RANGE.0 || v > SCORE_RANGE.1 {
        return Err(Error::Validation(format!(
            "row {row}, column '{column}': value {v} outside [{}, {}]",
            SCORE_RANGE.0, SCORE_RANGE.1
        )));
    }
    Ok(())
}

/// Parses a dataset from CSV text: a `country` column followed by numeric
/// score columns. Rows are numbered from 1 (the first data row) in errors.
pub fn parse_dataset(csv_text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());

    let header = reader
        .headers()
        .map_err(|e| Error::Validation(format!("unreadable header: {e}")))?
        .clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(Error::Validation("missing header row".into()));
    }
    let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::Parse {
            row: row_no,
            column: String::new(),
            message: e.to_string(),
        })?;
        if row.len() == 1 && row.get(0) == Some("") {
            continue;
        }
        let name = row.get(0).unwrap_or("").to_string();
        if name.is_empty() {
            return Err(Error::Validation(format!("row {row_no}: missing country name")));
        }
        if row.len() > columns.len() + 1 {
            return Err(Error::Validation(format!(
                "row {row_no} ('{name}') has {} cells, header has {}",
                row.len(),
                columns.len() + 1
            )));
        }
        let mut values = Vec::with_capacity(columns.len());
        for (j, column) in columns.iter().enumerate() {
            let cell = row.get(j + 1).unwrap_or("");
            if cell.is_empty() {
                return Err(Error::Validation(format!(
                    "row {row_no} ('{name}'), column '{column}': missing value"
                )));
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: row_no,
                column: column.clone(),
                message: format!("'{cell}' is not a number"),
            })?;
            values.push(v);
        }
        records.push(CountryRecord { name, values });
    }
    Dataset::new(columns, records)
}

/// The 29-country appendix dataset: SII with its four pillars and I-DESI with
/// its five dimensions, rows in descending SII order.
pub fn bundled_table_a1() -> Dataset {
    parse_dataset(TABLE_A1_CSV).expect("bundled fixture is valid")
}

/// Raw CSV text of the bundled fixture.
pub fn bundled_table_a1_csv() -> &'static str {
    TABLE_A1_CSV
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_shape_and_first_row() {
        let d = bundled_table_a1();
        assert_eq!(d.len(), 29);
        assert_eq!(d.columns().len(), 11);
        assert_eq!(d.records()[0].name, "USA");
        assert_eq!(d.value("USA", SII).unwrap(), 79.4);
    }

    #[test]
    fn bundled_spot_values() {
        let d = bundled_table_a1();
        assert_eq!(d.value("Turkey", SII).unwrap(), 36.2);
        assert_eq!(d.value("Turkey", IDESI).unwrap(), 26.0);
        assert_eq!(d.value("Turkey", IDT).unwrap(), 19.0);
        assert_eq!(d.value("Denmark", CONNECTIVITY).unwrap(), 72.0);
        assert_eq!(d.value("Denmark", HUMAN_CAPITAL).unwrap(), 55.0);
        assert_eq!(d.records()[27].name, "Turkey");
        assert_eq!(d.records()[3].name, "Denmark");
    }

    #[test]
    fn bundled_sorted_and_bounded() {
        let d = bundled_table_a1();
        let sii = d.column(SII).unwrap().values;
        assert!(sii.windows(2).all(|w| w[0] >= w[1]));
        for r in d.records() {
            assert!(r.values.iter().all(|&v| (19.0..=88.3).contains(&v)));
        }
    }

    #[test]
    fn header_only_is_empty_dataset() {
        let d = parse_dataset("country,SII,I-DESI\n").unwrap();
        assert!(d.is_empty());
        assert_eq!(d.columns(), &["SII".to_string(), "I-DESI".to_string()]);
    }

    #[test]
    fn bad_number_names_row_and_column() {
        let err = parse_dataset("country,SII,I-DESI\nA,50,40\nB,abc,30\n").unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "SII");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_cell_is_validation_error() {
        assert!(matches!(
            parse_dataset("country,SII,I-DESI\nA,50,\n"),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            parse_dataset("country,SII,I-DESI\nA,50\n"),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn duplicate_country_rejected() {
        assert!(matches!(
            parse_dataset("country,SII\nA,50\nA,40\n"),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(parse_dataset("country,SII\nA,100.5\n").is_err());
        assert!(parse_dataset("country,SII\nA,-1\n").is_err());
        assert!(parse_dataset("country,SII\nA,NaN\n").is_err());
    }

    #[test]
    fn select_columns() {
        let d = bundled_table_a1();
        let s = d.select(&[SII]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].len(), 29);
        assert_eq!(&s[0].values[..3], &[79.4, 77.3, 75.7]);
        assert!(d.select::<&str>(&[]).unwrap().is_empty());
        let twice = d.select(&[SII, SII]).unwrap();
        assert_eq!(twice[0], twice[1]);
        assert!(matches!(d.select(&["nope"]), Err(Error::UnknownColumn(_))));
    }

    #[test]
    fn csv_export_round_trips_bundled() {
        let d = bundled_table_a1();
        assert_eq!(parse_dataset(&d.to_csv()).unwrap(), d);
    }

    #[test]
    fn alphabetical_order_starts_with_australia() {
        let d = bundled_table_a1();
        let order = d.alphabetical_order();
        assert_eq!(d.records()[order[0]].name, "Australia");
        assert_eq!(d.records()[order[28]].name, "USA");
    }
}
