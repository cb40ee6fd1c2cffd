use indexlab::dataset::{bundled_table_a1, IDESI, IDT, SII};
use indexlab::report::{
    diff_golden, emit, parse_csv_sections, predict_country, reproduce_all, reproduce_with, Cell,
    Format, ModelChoice, PipelineConfig, ReportBundle,
};

fn quick(seed: u64) -> ReportBundle {
    let config = PipelineConfig {
        seed,
        replicates: 2000,
        ..PipelineConfig::default()
    };
    reproduce_with(&bundled_table_a1(), &config).unwrap()
}

#[test]
fn bundled_dataset_passes_golden_diff() {
    let bundle = reproduce_all(&bundled_table_a1(), 42).unwrap();
    let diff = diff_golden(&bundle);
    assert!(diff.all_passed(), "{}", diff.render());
    assert!(diff.passed > 200);
}

#[test]
fn deleting_a_row_is_detected() {
    let data = bundled_table_a1().without_row(0).unwrap();
    let config = PipelineConfig {
        replicates: 200,
        ..PipelineConfig::default()
    };
    let diff = diff_golden(&reproduce_with(&data, &config).unwrap());
    assert!(diff.failed > 10);
    assert!(diff.failures().any(|c| c.table == "T1" && c.row == "Maximum"));
}

#[test]
fn perturbation_is_local() {
    let mut bundle = quick(42);
    let key = format!("H1/{IDT}");
    let cell = bundle.tables["T9"].cell(&key, "Unstandardised").cloned().unwrap();
    let Cell::Num(v) = cell else { panic!("numeric cell expected") };
    *bundle.tables.get_mut("T9").unwrap().cell_mut(&key, "Unstandardised").unwrap() = Cell::Num(v + 0.1);
    let diff = diff_golden(&bundle);
    let failed: Vec<_> = diff.failures().collect();
    assert_eq!(failed.len(), 1, "{}", diff.render());
    assert_eq!((failed[0].table.as_str(), failed[0].column.as_str()), ("T9", "Unstandardised"));
}

#[test]
fn normality_gate_excludes_connectivity_only() {
    let bundle = quick(42);
    let gate = &bundle.tables["T7-GATE"];
    let excluded: Vec<&str> = gate
        .rows
        .iter()
        .filter(|r| r.cells[2] == Cell::Text("excluded".into()))
        .map(|r| r.key.as_str())
        .collect();
    assert_eq!(excluded, ["Connectivity"]);
}

#[test]
fn markdown_layout() {
    let md = emit(&quick(42), Format::Markdown).unwrap();
    assert!(md.contains("I-DESI | 0.858 | 0.150 | 0.740 | 5.711 | <0.001"), "{md}");
    assert!(md.contains("| H₀ |"));
    assert!(md.contains("0.816***"));
}

#[test]
fn empty_bundle_json() {
    let json = emit(&ReportBundle::default(), Format::Json).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(v["tables"].as_object().unwrap().is_empty());
}

#[test]
fn unknown_format_is_usage_error() {
    assert!(matches!(
        "xml".parse::<Format>(),
        Err(indexlab::Error::Usage(_))
    ));
}

#[test]
fn csv_round_trip() {
    let bundle = quick(42);
    let text = emit(&bundle, Format::Csv).unwrap();
    let sections = parse_csv_sections(&text).unwrap();
    assert_eq!(sections.len(), bundle.tables.len() + 1);
    assert_eq!(sections["PROVENANCE"].field("seed", "value"), Some("42"));
    for (id, table) in &bundle.tables {
        let s = &sections[id];
        assert_eq!(s.title, table.title);
        assert_eq!(s.rows.len(), table.rows.len());
        for row in &table.rows {
            for (col, cell) in table.columns.iter().zip(&row.cells) {
                let field = s.field(&row.key, col).unwrap();
                assert_eq!(field, cell.raw());
                if let (Cell::Num(v) | Cell::P(v), Ok(parsed)) = (cell, field.parse::<f64>()) {
                    assert_eq!(*v, parsed, "{id}[{}][{col}]", row.key);
                }
            }
        }
    }
}

#[test]
fn byte_identical_for_fixed_seed() {
    for format in [Format::Csv, Format::Markdown, Format::Json] {
        assert_eq!(emit(&quick(7), format).unwrap(), emit(&quick(7), format).unwrap());
    }
}

#[test]
fn seed_only_moves_bootstrap_p() {
    let a = quick(1);
    let b = quick(2);
    for (id, ta) in &a.tables {
        let tb = &b.tables[id];
        for (ra, rb) in ta.rows.iter().zip(&tb.rows) {
            for ((col, ca), cb) in ta.columns.iter().zip(&ra.cells).zip(&rb.cells) {
                if col != "Durbin-Watson p" {
                    assert_eq!(ca, cb, "{id}[{}][{col}]", ra.key);
                }
            }
        }
    }
    assert_eq!(a.figures, b.figures);
}

#[test]
fn cross_table_consistency() {
    for (what, left, right) in quick(3).consistency_checks() {
        assert!((left - right).abs() < 1e-12, "{what}: {left} vs {right}");
    }
}

#[test]
fn figure_residuals_sum_to_zero() {
    let bundle = quick(5);
    for id in ["F3", "F5"] {
        let f = &bundle.figures[id];
        let sum: f64 = f.series[0].rows.iter().map(|r| r[1]).sum();
        assert!(sum.abs() < 1e-9, "{id}: {sum}");
        let counted: f64 = f.series[1].rows.iter().map(|r| r[1]).sum();
        assert_eq!(counted, 29.0);
    }
    let f4 = bundle.figures["F4"].to_dat();
    assert!(f4.contains("# USA"));
    assert!(f4.contains(&format!("# {IDESI} {SII}")));
}

#[test]
fn predictions() {
    let p = predict_country(ModelChoice::Simple, 42.0).unwrap();
    assert!((p.predicted - 51.44).abs() < 0.005);
    assert_eq!(p.printed, Some(51.084));
    assert!(p.note.unwrap().contains("15.048"));

    let p = predict_country(ModelChoice::Simple, 49.103).unwrap();
    assert!((p.predicted - 57.534).abs() < 1e-3);
    assert_eq!(p.printed, None);

    let p = predict_country(ModelChoice::Stepwise, 19.0).unwrap();
    assert!((p.predicted - 40.13).abs() < 0.3);
    assert_eq!(p.predictor, IDT);

    assert!(predict_country(ModelChoice::Stepwise, -1.0).is_err());
}

#[test]
fn schema_mismatch_reports_columns() {
    let csv = "country,SII,I-DESI\nA,50,40\nB,60,45\nC,55,50\n";
    let data = indexlab::dataset::parse_dataset(csv).unwrap();
    match reproduce_all(&data, 1) {
        Err(indexlab::Error::Schema { missing }) => {
            assert!(missing.contains(&"Connectivity".to_string()));
            assert_eq!(missing.len(), 9);
        }
        other => panic!("unexpected {other:?}"),
    }
}
