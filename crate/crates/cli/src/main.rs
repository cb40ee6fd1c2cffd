use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use indexlab::correlation::correlation_matrix;
use indexlab::dataset::{self, bundled_table_a1, parse_dataset, CountryRecord, Dataset};
use indexlab::descriptive::shapiro_wilk;
use indexlab::distributions::format_p;
use indexlab::index::{evaluate_dataset, parse_definition, preset, rank};
use indexlab::pca::run_pca;
use indexlab::regression::{
    anova, casewise_diagnostics, collinearity, durbin_watson_with_order, fit_ols, null_model,
    stepwise_fit, CollinearityReport, DEFAULT_P_ENTER, DEFAULT_P_REMOVE, DEFAULT_REPLICATES,
};
use indexlab::report::{
    self, diff_golden, emit, predict_country, reproduce_with, Format, ModelChoice, PipelineConfig,
};
use indexlab::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_GOLDEN: u8 = 2;

// Output is buffered so that a closed stdout never panics mid-write.
macro_rules! put {
    ($out:expr, $($arg:tt)*) => {{
        let _ = write!($out, $($arg)*);
    }};
}

macro_rules! putln {
    ($out:expr, $($arg:tt)*) => {{
        let _ = writeln!($out, $($arg)*);
    }};
}

#[derive(Parser)]
#[command(name = "indexlab", version, about = "Composite index construction and regression diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Export or validate a dataset
    Dataset {
        #[command(subcommand)]
        action: DatasetAction,
    },
    /// Evaluate a composite index definition
    Index {
        #[command(subcommand)]
        action: IndexAction,
    },
    /// Descriptive statistics per column
    Describe(ColumnArgs),
    /// Shapiro-Wilk test per column
    Normality(ColumnArgs),
    /// Pearson correlation matrix with significance stars
    Correlate(ColumnArgs),
    /// Ordinary least squares with diagnostics
    Regress(RegressArgs),
    /// Principal components of the correlation matrix
    Pca(PcaArgs),
    /// Run the full reproduction pipeline
    Reproduce(ReproduceArgs),
    /// Predict SII from a fitted model
    Predict(PredictArgs),
}

#[derive(Subcommand)]
enum DatasetAction {
    /// Write the dataset as CSV
    Export {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Check a CSV file and report its shape
    Validate {
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum IndexAction {
    /// Score every row of a dataset
    Compute(IndexArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["preset", "definition"])))]
struct IndexArgs {
    /// Built-in definition: sii-2016 or idesi-2020
    #[arg(long)]
    preset: Option<String>,
    /// Definition file (`name, weight[, lo, hi]` per line)
    #[arg(long)]
    definition: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    /// Also print competition ranks
    #[arg(long)]
    rank: bool,
}

#[derive(Args)]
struct ColumnArgs {
    /// CSV input; the bundled dataset when omitted
    #[arg(long)]
    input: Option<PathBuf>,
    /// Comma-separated column names; all numeric columns when omitted
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Rows,
    Alphabetical,
}

#[derive(Args)]
struct RegressArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = dataset::SII)]
    response: String,
    /// Comma-separated predictor names
    #[arg(long, value_delimiter = ',', required = true)]
    predictors: Vec<String>,
    /// Stepwise selection among the predictors
    #[arg(long)]
    stepwise: bool,
    #[arg(long, default_value_t = DEFAULT_P_ENTER)]
    p_enter: f64,
    #[arg(long, default_value_t = DEFAULT_P_REMOVE)]
    p_remove: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    replicates: usize,
    /// Residual order for Durbin-Watson
    #[arg(long, value_enum, default_value_t = Order::Rows)]
    order: Order,
}

#[derive(Args)]
struct PcaArgs {
    /// CSV input; the bundled dataset when omitted
    #[arg(long)]
    input: Option<PathBuf>,
    /// Comma-separated column names; the five I-DESI dimensions when omitted
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    /// Retain components with eigenvalue at or above this
    #[arg(long, default_value_t = 1.0)]
    threshold: f64,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "markdown")]
    format: String,
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    replicates: usize,
    /// Compare against the published tables; exit 2 on any failing cell
    #[arg(long)]
    golden_diff: bool,
    /// Directory for fig3.dat, fig4.dat and fig5.dat
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long, default_value = "simple")]
    model: String,
    #[arg(long)]
    score: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut out = String::new();
    let result = run(cli.command, &mut out);
    // A closed pipe (e.g. `| head`) is not an error.
    let mut stdout = io::stdout().lock();
    if let Err(e) = stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()) {
        if e.kind() != io::ErrorKind::BrokenPipe {
            eprintln!("error: cannot write output: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn load(input: Option<&Path>) -> Result<Dataset, Error> {
    match input {
        None => Ok(bundled_table_a1()),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
            parse_dataset(&text)
        }
    }
}

fn columns_or_all(data: &Dataset, columns: &[String]) -> Vec<String> {
    if columns.is_empty() {
        data.columns().to_vec()
    } else {
        columns.to_vec()
    }
}

fn run(command: Command, out: &mut String) -> Result<u8, Error> {
    match command {
        Command::Dataset { action } => match action {
            DatasetAction::Export { input } => put!(out, "{}", load(input.as_deref())?.to_csv()),
            DatasetAction::Validate { input } => {
                let data = load(input.as_deref())?;
                putln!(out, "ok: {} records, {} columns", data.len(), data.columns().len());
            }
        },
        Command::Index {
            action: IndexAction::Compute(args),
        } => index_compute(args, out)?,
        Command::Describe(args) => {
            let data = load(args.input.as_deref())?;
            let cols = columns_or_all(&data, &args.columns);
            let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
            put!(out, 
                "{}",
                report::descriptive_table("describe", "Descriptive statistics", &data, &cols, true)?
                    .to_markdown()
            );
        }
        Command::Normality(args) => {
            let data = load(args.input.as_deref())?;
            putln!(out, "column\tW\tp");
            for c in columns_or_all(&data, &args.columns) {
                let r = shapiro_wilk(&data.column(&c)?)?;
                putln!(out, "{c}\t{:.3}\t{}", r.w, format_p(r.p.value));
            }
        }
        Command::Correlate(args) => {
            let data = load(args.input.as_deref())?;
            let cols = columns_or_all(&data, &args.columns);
            put!(out, "{}", correlation_matrix(&data, &cols)?.render_lower_triangle());
        }
        Command::Regress(args) => regress(args, out)?,
        Command::Pca(args) => {
            let data = load(args.input.as_deref())?;
            let cols = if args.columns.is_empty() {
                dataset::IDESI_DIMENSIONS.iter().map(|c| c.to_string()).collect()
            } else {
                args.columns
            };
            let pca = run_pca(&data, &cols, args.threshold)?;
            put!(out, "{}", report::component_table(&pca).to_markdown());
            put!(out, "{}", report::eigen_table(&pca).to_markdown());
            put!(out, "{}", report::pca_stats_table(&pca).to_markdown());
        }
        Command::Reproduce(args) => return reproduce(args, out),
        Command::Predict(args) => {
            let model: ModelChoice = args.model.parse()?;
            let p = predict_country(model, args.score)?;
            putln!(out, "model\t{}", args.model);
            putln!(out, "{}\t{}", p.predictor, args.score);
            putln!(out, "predicted SII\t{:.3}", p.predicted);
            if let Some(printed) = p.printed {
                putln!(out, "published\t{printed}");
            }
            if let Some(note) = p.note {
                putln!(out, "note\t{note}");
            }
        }
    }
    Ok(0)
}

fn index_compute(args: IndexArgs, out: &mut String) -> Result<(), Error> {
    let definition = match (&args.preset, &args.definition) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
            parse_definition(&text)?
        }
        (None, None) => unreachable!("clap requires a source"),
    };
    let data = load(args.input.as_deref())?;
    let scores = evaluate_dataset(&definition, &data)?;
    if args.rank {
        let records = scores
            .iter()
            .zip(data.records())
            .map(|(s, r)| CountryRecord {
                name: r.name.clone(),
                values: vec![s.value],
            })
            .collect();
        let scored = Dataset::new(vec![definition.name.clone()], records)?;
        putln!(out, "rank,country,{}", definition.name);
        for entry in rank(&scored, &definition.name)? {
            putln!(out, "{},{},{:.4}", entry.rank, entry.country, entry.score);
        }
    } else {
        putln!(out, "country,{}", definition.name);
        for s in &scores {
            putln!(out, "{},{:.4}", s.country.as_deref().unwrap_or(""), s.value);
        }
    }
    Ok(())
}

fn regress(args: RegressArgs, out: &mut String) -> Result<(), Error> {
    let data = load(args.input.as_deref())?;
    let h0 = null_model(&data, &args.response)?;
    let (fit, trace) = if args.stepwise {
        let r = stepwise_fit(&data, &args.response, &args.predictors, args.p_enter, args.p_remove)?;
        (r.fit.clone(), Some(r))
    } else {
        (fit_ols(&data, &args.response, &args.predictors)?, None)
    };
    let order = match args.order {
        Order::Rows => (0..data.len()).collect::<Vec<_>>(),
        Order::Alphabetical => data.alphabetical_order(),
    };
    let dw0 = durbin_watson_with_order(&h0, &order, args.replicates, args.seed)?;
    let dw1 = durbin_watson_with_order(&fit, &order, args.replicates, args.seed)?;
    let coll = match fit.k() {
        0 => None,
        1 => Some(CollinearityReport::single(&fit.predictors[0])),
        _ => Some(collinearity(&data, &fit.predictors)?),
    };

    put!(out, 
        "{}",
        report::summary_table("summary", "Model summary", [(&h0, &dw0), (&fit, &dw1)]).to_markdown()
    );
    put!(out, 
        "{}",
        report::coefficient_table("coefficients", "Coefficients", &h0, &fit, coll.as_ref()).to_markdown()
    );
    if anova(&fit).is_ok() {
        put!(out, "{}", report::anova_table("anova", "ANOVA", &fit)?.to_markdown());
    }
    put!(out, "{}", report::casewise_table("casewise", &data, &fit).to_markdown());
    if let Some(r) = trace {
        put!(out, "{}", report::trace_table("trace", &r).to_markdown());
    }
    let flagged = casewise_diagnostics(&fit).flagged.len();
    putln!(out, "flagged rows: {flagged}");
    Ok(())
}

fn reproduce(args: ReproduceArgs, out: &mut String) -> Result<u8, Error> {
    let format: Format = args.format.parse()?;
    let data = load(args.input.as_deref())?;
    let config = PipelineConfig {
        seed: args.seed,
        replicates: args.replicates,
        ..PipelineConfig::default()
    };
    let bundle = reproduce_with(&data, &config)?;
    put!(out, "{}", emit(&bundle, format)?);

    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir)
            .map_err(|e| Error::Usage(format!("cannot create {}: {e}", dir.display())))?;
        for (id, figure) in &bundle.figures {
            let path = dir.join(format!("fig{}.dat", id.trim_start_matches('F')));
            fs::write(&path, figure.to_dat())
                .map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))?;
        }
    }

    if args.golden_diff {
        let diff = diff_golden(&bundle);
        put!(out, "\n{}", diff.render());
        if !diff.all_passed() {
            return Ok(EXIT_GOLDEN);
        }
    }
    Ok(0)
}
