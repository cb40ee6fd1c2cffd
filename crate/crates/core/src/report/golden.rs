//! Published table values with their comparison tolerances.

use serde::Serialize;

use super::{Cell, ReportBundle};
use crate::dataset::{
    CONNECTIVITY, DIGITAL_PUBLIC_SERVICES, ENTREPRENEURSHIP, FINANCING, HUMAN_CAPITAL, IDESI, IDT,
    POLICY, SII, SOCIETY, TABLE_A1_COLUMNS, USE_OF_INTERNET,
};
use crate::regression::INTERCEPT;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expected {
    Within { value: f64, tolerance: f64 },
    /// Printed as "<x": the actual value must be below `bound`.
    Below { bound: f64 },
    Stars { r: f64, tolerance: f64, stars: String },
    Text { text: String },
}

impl Expected {
    fn describe(&self) -> String {
        match self {
            Expected::Within { value, .. } => value.to_string(),
            Expected::Below { bound } => format!("<{bound}"),
            Expected::Stars { r, stars, .. } => format!("{r}{stars}"),
            Expected::Text { text } => text.clone(),
        }
    }

    fn tolerance(&self) -> Option<f64> {
        match self {
            Expected::Within { tolerance, .. } | Expected::Stars { tolerance, .. } => Some(*tolerance),
            _ => None,
        }
    }

    fn check(&self, cell: &Cell) -> bool {
        match (self, cell) {
            (Expected::Within { value, tolerance }, c) => {
                c.value().is_some_and(|v| (v - value).abs() <= *tolerance)
            }
            (Expected::Below { bound }, c) => c.value().is_some_and(|v| v < *bound),
            (Expected::Stars { r, tolerance, stars }, Cell::Stars { r: a, stars: s }) => {
                (a - r).abs() <= *tolerance && s == stars
            }
            (Expected::Text { text }, Cell::Text(t)) => t == text,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenCell {
    pub table: String,
    pub row: String,
    pub column: String,
    pub expected: Expected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellDiff {
    pub table: String,
    pub row: String,
    pub column: String,
    pub expected: String,
    /// Full-precision actual value, or "missing".
    pub actual: String,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct GoldenDiff {
    pub cells: Vec<CellDiff>,
    pub passed: usize,
    pub failed: usize,
}

impl GoldenDiff {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CellDiff> {
        self.cells.iter().filter(|c| !c.pass)
    }

    pub fn summary(&self) -> String {
        format!("{} of {} golden cells pass", self.passed, self.passed + self.failed)
    }

    /// One line per cell: `PASS|FAIL table[row][column] expected=.. actual=..`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.cells {
            let tol = c.tolerance.map(|t| format!(" ±{t}")).unwrap_or_default();
            out.push_str(&format!(
                "{} {}[{}][{}] expected={}{} actual={}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.table,
                c.row,
                c.column,
                c.expected,
                tol,
                c.actual
            ));
        }
        out.push_str(&self.summary());
        out.push('\n');
        out
    }
}

/// Compares every golden cell against the bundle. Missing tables, rows or
/// columns count as failures.
pub fn diff_golden(bundle: &ReportBundle) -> GoldenDiff {
    let mut diff = GoldenDiff::default();
    for g in golden_cells() {
        let cell = bundle.tables.get(&g.table).and_then(|t| t.cell(&g.row, &g.column));
        let pass = cell.is_some_and(|c| g.expected.check(c));
        let actual = match cell {
            None => "missing".to_string(),
            Some(c) => c.raw(),
        };
        if pass {
            diff.passed += 1;
        } else {
            diff.failed += 1;
        }
        diff.cells.push(CellDiff {
            table: g.table,
            row: g.row,
            column: g.column,
            expected: g.expected.describe(),
            actual,
            tolerance: g.expected.tolerance(),
            pass,
        });
    }
    diff
}

// Tolerances.
const DESCRIPTIVE: f64 = 0.001;
const SW_W: f64 = 0.005;
const SW_P: f64 = 0.02;
const COEF: f64 = 0.005;
const T_STAT: f64 = 0.01;
/// Three-decimal printed p-values.
const P3: f64 = 0.002;
const FIT: f64 = 0.001;
const DW_D: f64 = 0.005;
const DW_P: f64 = 0.10;
const SS: f64 = 0.5;
const F_STAT: f64 = 0.05;
const R: f64 = 0.001;
const EXACT: f64 = 0.0;

struct Builder(Vec<GoldenCell>);

impl Builder {
    fn push(&mut self, table: &str, row: &str, column: &str, expected: Expected) {
        self.0.push(GoldenCell {
            table: table.into(),
            row: row.into(),
            column: column.into(),
            expected,
        });
    }

    fn within(&mut self, table: &str, row: &str, column: &str, value: f64, tolerance: f64) {
        self.push(table, row, column, Expected::Within { value, tolerance });
    }

    fn below(&mut self, table: &str, row: &str, column: &str, bound: f64) {
        self.push(table, row, column, Expected::Below { bound });
    }

    fn text(&mut self, table: &str, row: &str, column: &str, text: &str) {
        self.push(table, row, column, Expected::Text { text: text.into() });
    }

    /// `None` is a printed "<0.001".
    fn p(&mut self, table: &str, row: &str, column: &str, printed: Option<f64>, tolerance: f64) {
        match printed {
            Some(v) => self.within(table, row, column, v, tolerance),
            None => self.below(table, row, column, 0.001),
        }
    }

    fn stars(&mut self, table: &str, row: &str, column: &str, r: f64, stars: &str) {
        self.push(
            table,
            row,
            column,
            Expected::Stars {
                r,
                tolerance: R,
                stars: stars.into(),
            },
        );
    }

    fn summary_row(&mut self, table: &str, row: &str, v: [f64; 7]) {
        let cols = [
            ("R", FIT),
            ("R²", FIT),
            ("Adjusted R²", FIT),
            ("RMSE", COEF),
            ("Durbin-Watson autocorrelation", DW_D),
            ("Durbin-Watson statistic", DW_D),
            ("Durbin-Watson p", DW_P),
        ];
        for ((col, tol), value) in cols.into_iter().zip(v) {
            self.within(table, row, col, value, tol);
        }
    }

    /// `v` is (estimate, se, t); `beta` is `None` where the cell is blank.
    #[allow(clippy::too_many_arguments)]
    fn coefficient_row(&mut self, table: &str, row: &str, v: [f64; 3], beta: Option<f64>, p: Option<f64>, t_tol: f64, p_tol: f64) {
        self.within(table, row, "Unstandardised", v[0], COEF);
        self.within(table, row, "Standard error", v[1], COEF);
        if let Some(b) = beta {
            self.within(table, row, "Standardised", b, COEF);
        }
        self.within(table, row, "t", v[2], t_tol);
        self.p(table, row, "p", p, p_tol);
    }

    fn anova(&mut self, table: &str, ss: f64, f: f64) {
        self.within(table, "Regression", "Sum of squares", ss, SS);
        self.within(table, "Regression", "df", 1.0, EXACT);
        self.within(table, "Regression", "Mean square", ss, SS);
        self.within(table, "Regression", "F", f, F_STAT);
        self.below(table, "Regression", "p", 0.001);
    }
}

/// The full golden set.
pub fn golden_cells() -> Vec<GoldenCell> {
    let mut b = Builder(Vec::new());
    let h0_int = format!("H0/{INTERCEPT}");
    let h1_int = format!("H1/{INTERCEPT}");

    // T1: descriptives for all columns, Shapiro-Wilk printed for SII and I-DESI.
    let t1: [(&str, [f64; 4]); 11] = [
        (SII, [57.534, 12.202, 33.8, 79.4]),
        (POLICY, [56.062, 16.210, 28.8, 86.6]),
        (FINANCING, [58.417, 14.540, 36.9, 82.0]),
        (ENTREPRENEURSHIP, [59.303, 8.118, 44.8, 76.2]),
        (SOCIETY, [58.576, 18.714, 24.0, 88.3]),
        (IDESI, [49.103, 10.520, 26.0, 65.0]),
        (CONNECTIVITY, [59.759, 9.425, 40.0, 72.0]),
        (HUMAN_CAPITAL, [39.690, 11.604, 19.0, 62.0]),
        (USE_OF_INTERNET, [45.517, 14.339, 19.0, 68.0]),
        (IDT, [44.379, 12.448, 19.0, 62.0]),
        (DIGITAL_PUBLIC_SERVICES, [56.310, 16.123, 24.0, 80.0]),
    ];
    for (col, v) in t1 {
        b.within("T1", "Valid", col, 29.0, EXACT);
        b.within("T1", "Missing", col, 0.0, EXACT);
        for (row, value) in ["Mean", "Std. deviation", "Minimum", "Maximum"].into_iter().zip(v) {
            b.within("T1", row, col, value, DESCRIPTIVE);
        }
    }
    for (col, w, p) in [(SII, 0.965, 0.427), (IDESI, 0.945, 0.135)] {
        b.within("T1", "Shapiro-Wilk", col, w, SW_W);
        b.within("T1", "P-value of Shapiro-Wilk", col, p, SW_P);
    }
    for col in TABLE_A1_COLUMNS {
        b.within("T1-OUTLIERS", col, "Outliers", 0.0, EXACT);
    }

    b.summary_row("T2", "H0", [0.0, 0.0, 0.0, 12.202, -0.165, 2.214, 0.559]);
    b.summary_row("T2", "H1", [0.740, 0.547, 0.530, 8.363, -0.233, 2.351, 0.338]);

    b.coefficient_row("T3", &h0_int, [57.534, 2.266, 25.392], None, None, T_STAT, P3);
    b.coefficient_row("T3", &h1_int, [15.408, 7.539, 2.044], None, Some(0.051), T_STAT, P3);
    b.coefficient_row("T3", &format!("H1/{IDESI}"), [0.858, 0.150, 5.711], Some(0.740), None, T_STAT, P3);
    b.anova("T3-ANOVA", 2280.665, 32.611);

    // T4: r and p, lower triangle. None = "< 0.001".
    let t4: [(&str, &str, f64, Option<f64>); 15] = [
        (CONNECTIVITY, SII, 0.658, None),
        (HUMAN_CAPITAL, SII, 0.530, Some(0.003)),
        (HUMAN_CAPITAL, CONNECTIVITY, 0.647, None),
        (USE_OF_INTERNET, SII, 0.680, None),
        (USE_OF_INTERNET, CONNECTIVITY, 0.663, None),
        (USE_OF_INTERNET, HUMAN_CAPITAL, 0.705, None),
        (IDT, SII, 0.700, None),
        (IDT, CONNECTIVITY, 0.698, None),
        (IDT, HUMAN_CAPITAL, 0.730, None),
        (IDT, USE_OF_INTERNET, 0.816, None),
        (DIGITAL_PUBLIC_SERVICES, SII, 0.606, None),
        (DIGITAL_PUBLIC_SERVICES, CONNECTIVITY, 0.614, None),
        (DIGITAL_PUBLIC_SERVICES, HUMAN_CAPITAL, 0.564, Some(0.001)),
        (DIGITAL_PUBLIC_SERVICES, USE_OF_INTERNET, 0.603, None),
        (DIGITAL_PUBLIC_SERVICES, IDT, 0.623, None),
    ];
    for (row, col, r, p) in t4 {
        b.within("T4", &format!("{row}/r"), col, r, R);
        b.p("T4", &format!("{row}/p"), col, p, P3);
    }

    // T5: every printed cell at one tolerance.
    b.coefficient_row("T5", &h0_int, [57.534, 2.266, 25.392], None, None, COEF, COEF);
    b.coefficient_row("T5", &h1_int, [12.662, 10.712, 1.182], None, Some(0.249), COEF, COEF);
    let t5: [(&str, [f64; 7]); 5] = [
        (CONNECTIVITY, [0.332, 0.264, 0.257, 1.259, 0.221, 0.429, 2.331]),
        (HUMAN_CAPITAL, [-0.145, 0.221, -0.137, -0.654, 0.519, 0.404, 2.476]),
        (USE_OF_INTERNET, [0.211, 0.209, 0.248, 1.009, 0.323, 0.296, 3.376]),
        (IDT, [0.295, 0.257, 0.301, 1.148, 0.263, 0.260, 3.844]),
        (DIGITAL_PUBLIC_SERVICES, [0.144, 0.139, 0.190, 1.036, 0.311, 0.532, 1.880]),
    ];
    for (pred, v) in t5 {
        let row = format!("H1/{pred}");
        let cols = ["Unstandardised", "Standard error", "Standardised", "t", "p", "Tolerance", "VIF"];
        for (col, value) in cols.into_iter().zip(v) {
            b.within("T5", &row, col, value, COEF);
        }
    }
    b.within("T5-CASEWISE", "Flagged rows", "Value", 0.0, EXACT);

    let t6 = [
        (CONNECTIVITY, 0.845),
        (HUMAN_CAPITAL, 0.853),
        (USE_OF_INTERNET, 0.889),
        (IDT, 0.908),
        (DIGITAL_PUBLIC_SERVICES, 0.786),
    ];
    for (var, loading) in t6 {
        b.within("T6", var, "Component 1", loading, COEF);
    }
    b.within("T6-STATS", "KMO", "Value", 0.881, COEF);
    b.within("T6-STATS", "Bartlett chi-square", "Value", 85.289, SS);
    b.within("T6-STATS", "Bartlett df", "Value", 10.0, EXACT);
    b.below("T6-STATS", "Bartlett p", "Value", 0.0005);
    b.within("T6-STATS", "Variance explained (%)", "Value", 73.468, F_STAT);
    b.within("T6-STATS", "Components retained", "Value", 1.0, EXACT);

    let t7: [(&str, [f64; 6]); 6] = [
        (SII, [57.534, 12.202, 0.965, 0.427, 33.8, 79.4]),
        (CONNECTIVITY, [59.759, 9.425, 0.915, 0.022, 40.0, 72.0]),
        (HUMAN_CAPITAL, [39.690, 11.604, 0.972, 0.616, 19.0, 62.0]),
        (USE_OF_INTERNET, [45.517, 14.339, 0.960, 0.332, 19.0, 68.0]),
        (IDT, [44.379, 12.448, 0.948, 0.166, 19.0, 62.0]),
        (DIGITAL_PUBLIC_SERVICES, [56.310, 16.123, 0.931, 0.059, 24.0, 80.0]),
    ];
    for (col, v) in t7 {
        b.within("T7", "Valid", col, 29.0, EXACT);
        b.within("T7", "Missing", col, 0.0, EXACT);
        let rows = [
            ("Mean", DESCRIPTIVE),
            ("Std. deviation", DESCRIPTIVE),
            ("Shapiro-Wilk", SW_W),
            ("P-value of Shapiro-Wilk", SW_P),
            ("Minimum", DESCRIPTIVE),
            ("Maximum", DESCRIPTIVE),
        ];
        for ((row, tol), value) in rows.into_iter().zip(v) {
            b.within("T7", row, col, value, tol);
        }
    }
    b.text("T7-GATE", CONNECTIVITY, "Decision", "excluded");
    for var in [HUMAN_CAPITAL, USE_OF_INTERNET, IDT, DIGITAL_PUBLIC_SERVICES] {
        b.text("T7-GATE", var, "Decision", "retained");
    }

    b.summary_row("T8", "H0", [0.0, 0.0, 0.0, 12.202, -0.165, 2.214, 0.559]);
    b.summary_row("T8", "H1", [0.700, 0.490, 0.471, 8.878, -0.071, 1.988, 0.997]);
    b.anova("T9-ANOVA", 2040.854, 25.894);
    b.coefficient_row("T9", &h0_int, [57.534, 2.266, 25.392], None, None, T_STAT, P3);
    b.coefficient_row("T9", &h1_int, [27.098, 6.204, 4.367], None, None, T_STAT, P3);
    let idt_row = format!("H1/{IDT}");
    b.coefficient_row("T9", &idt_row, [0.686, 0.135, 5.089], Some(0.700), None, T_STAT, P3);
    b.within("T9", &idt_row, "Tolerance", 1.0, COEF);
    b.within("T9", &idt_row, "VIF", 1.0, COEF);
    b.text("T9-TRACE", "selected", "Variable", IDT);

    let t10: [(&str, &str, f64, &str); 15] = [
        (CONNECTIVITY, SII, 0.658, "***"),
        (HUMAN_CAPITAL, SII, 0.530, "**"),
        (HUMAN_CAPITAL, CONNECTIVITY, 0.647, "***"),
        (USE_OF_INTERNET, SII, 0.680, "***"),
        (USE_OF_INTERNET, CONNECTIVITY, 0.663, "***"),
        (USE_OF_INTERNET, HUMAN_CAPITAL, 0.705, "***"),
        (IDT, SII, 0.700, "***"),
        (IDT, CONNECTIVITY, 0.698, "***"),
        (IDT, HUMAN_CAPITAL, 0.730, "***"),
        (IDT, USE_OF_INTERNET, 0.816, "***"),
        (DIGITAL_PUBLIC_SERVICES, SII, 0.606, "***"),
        (DIGITAL_PUBLIC_SERVICES, CONNECTIVITY, 0.614, "***"),
        (DIGITAL_PUBLIC_SERVICES, HUMAN_CAPITAL, 0.564, "**"),
        (DIGITAL_PUBLIC_SERVICES, USE_OF_INTERNET, 0.603, "***"),
        (DIGITAL_PUBLIC_SERVICES, IDT, 0.623, "***"),
    ];
    for (row, col, r, s) in t10 {
        b.stars("T10", row, col, r, s);
    }

    // T11: rows 2..9, columns in variable order, lower triangle only.
    let order = [
        CONNECTIVITY,
        HUMAN_CAPITAL,
        USE_OF_INTERNET,
        IDT,
        DIGITAL_PUBLIC_SERVICES,
        POLICY,
        FINANCING,
        ENTREPRENEURSHIP,
        SOCIETY,
    ];
    let t11: [&[(f64, &str)]; 8] = [
        &[(0.647, "***")],
        &[(0.663, "***"), (0.705, "***")],
        &[(0.698, "***"), (0.730, "***"), (0.816, "***")],
        &[(0.614, "***"), (0.564, "**"), (0.603, "***"), (0.623, "***")],
        &[(0.495, "**"), (0.262, ""), (0.425, "*"), (0.478, "**"), (0.431, "*")],
        &[(0.617, "***"), (0.494, "**"), (0.683, "***"), (0.656, "***"), (0.611, "***"), (0.631, "***")],
        &[(0.170, ""), (0.452, "*"), (0.274, ""), (0.308, ""), (0.282, ""), (0.174, ""), (0.376, "*")],
        &[
            (0.666, "***"),
            (0.709, "***"),
            (0.788, "***"),
            (0.760, "***"),
            (0.579, "**"),
            (0.355, ""),
            (0.738, "***"),
            (0.491, "**"),
        ],
    ];
    for (i, cells) in t11.iter().enumerate() {
        for (j, (r, s)) in cells.iter().enumerate() {
            b.stars("T11", order[i + 1], order[j], *r, s);
        }
    }
    b.0
}
