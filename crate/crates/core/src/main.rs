use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use rmtlaw::format::{fmt_sig, round_sig};
use rmtlaw::moments::{limiting_moment, qform_moment};
use rmtlaw::sim::{predictions, DESK_MAX_CELLS};
use rmtlaw::{
    compare_reports, compare_to_prediction, count_nc_by_block_sizes, eigenvalue_histogram, enumerate_noncrossing,
    h_finite, h_limit, max_component_graphs, run_monte_carlo, AspectRatio, Budget, Error, HSequence, MomentReport,
    Partition, PredictionTarget, RunOptions, SimConfig, SimMode, StationaryModel, Verdict,
};

#[derive(Parser, Debug)]
#[command(name = "rmtlaw", version, about = "Spectral moments of sample covariance matrices with dependent columns")]
struct Cli {
    /// Suppress log lines on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Limiting moments from a model or an explicit H sequence.
    Predict(PredictArgs),
    /// Monte Carlo moments of W = (1/n) X Xᵀ.
    Simulate(SimulateArgs),
    /// Compare empirical moments against predictions or another report.
    Compare(CompareArgs),
    /// Histogram of pooled eigenvalues.
    Spectrum(SpectrumArgs),
    /// Non-crossing partition tools.
    Nc(NcArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Direct,
    Remark1,
}

impl From<ModeArg> for SimMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Direct => SimMode::Direct,
            ModeArg::Remark1 => SimMode::Remark1Gaussian,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TargetArg {
    Finite,
    Limit,
}

#[derive(Args, Debug)]
struct Output {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write to PATH instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long, conflicts_with = "h", required_unless_present = "h")]
    model: Option<String>,
    /// Comma-separated H_1, H_2, ...
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    h: Option<Vec<f64>>,
    /// Comma-separated H̃ sequence; switches to the quadratic-form moments.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    htilde: Option<Vec<f64>>,
    #[arg(long)]
    y: f64,
    /// Use H of the m×m covariance matrix instead of the limit.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 4)]
    kmax: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 4)]
    kmax: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "direct")]
    mode: ModeArg,
    /// Worker threads (default: available parallelism).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Skip the compute budget guard.
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Record wall time in the report (breaks byte-identical reruns).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// One report (against its predictions) or two reports (against each other).
    #[arg(num_args = 0..=2)]
    reports: Vec<PathBuf>,
    /// Run a simulation inline instead of reading a report.
    #[arg(long, conflicts_with = "reports")]
    model: Option<String>,
    #[arg(long, requires = "model")]
    m: Option<usize>,
    #[arg(long, requires = "model")]
    n: Option<usize>,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 4)]
    kmax: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "direct")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    force: bool,
    /// Recompute predictions at this aspect ratio.
    #[arg(long)]
    y: Option<f64>,
    #[arg(long, value_enum, default_value = "finite")]
    target: TargetArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    /// Histogram range as lo:hi.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    range: Option<(f64, f64)>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct NcArgs {
    #[command(subcommand)]
    action: NcAction,
}

#[derive(Subcommand, Debug)]
enum NcAction {
    /// List NC(k).
    Enumerate {
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        output: TextOrJson,
    },
    /// Kreweras complement of a partition such as "1,2,4|3|5".
    Complement {
        #[arg(long)]
        blocks: String,
        #[command(flatten)]
        output: TextOrJson,
    },
    /// Number of non-crossing partitions of [k] with a given block type.
    Count {
        #[arg(long)]
        k: usize,
        /// size:count pairs, e.g. "2:1,1:2". Omit for all of NC(k).
        #[arg(long)]
        sizes: Option<String>,
        #[command(flatten)]
        output: TextOrJson,
    },
    /// Consistent graphs with the most components.
    Graphs {
        #[arg(long)]
        blocks: String,
        #[command(flatten)]
        output: TextOrJson,
    },
}

#[derive(Args, Debug)]
struct TextOrJson {
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lo {lo:?}: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad hi {hi:?}: {e}"))?;
    Ok((lo, hi))
}

/// Failure of a subcommand, mapped to its exit code.
enum Failure {
    Usage(String),
    Numeric(String),
    /// Comparison ran but at least one row failed.
    Verdict,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Bound { .. } | Error::Domain(_) | Error::Budget(_) => Failure::Usage(e.to_string()),
            Error::Numeric(_) | Error::Range(_) | Error::Unsupported(_) => Failure::Numeric(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

struct Logger {
    quiet: bool,
}

impl Logger {
    fn log(&self, msg: &str) {
        if !self.quiet {
            eprintln!("rmtlaw: {msg}");
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Numeric(format!("stdout: {e}"))),
    }
}

fn to_json(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes")
}

fn budget_from_env(force: bool) -> CliResult<Budget> {
    if force {
        return Ok(Budget::Unlimited);
    }
    match std::env::var("RMTLAW_BUDGET") {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map(Budget::Cells)
            .map_err(|_| Failure::Usage(format!("RMTLAW_BUDGET must be a cell count, got {v:?}"))),
        Err(_) => Ok(Budget::Desk),
    }
}

fn sim_config(run: &RunArgs) -> CliResult<(SimConfig, RunOptions)> {
    let config = SimConfig {
        model: run.model.parse()?,
        m: run.m,
        n: run.n,
        replicates: run.reps,
        k_max: run.kmax,
        seed: run.seed,
        mode: run.mode.into(),
    };
    config.validate()?;
    let options = RunOptions {
        workers: run.workers,
        budget: budget_from_env(run.force)?,
    };
    Ok((config, options))
}

fn cmd_predict(args: &PredictArgs, log: &Logger) -> CliResult<()> {
    let y = AspectRatio::new(args.y)?;
    let h = match (&args.model, &args.h) {
        (_, Some(values)) => HSequence::user(values.clone())?,
        (Some(model), None) => {
            let model: StationaryModel = model.parse()?;
            match args.m {
                Some(m) => h_finite(&model, m, args.kmax)?,
                None => h_limit(&model, args.kmax)?,
            }
        }
        (None, None) => return Err(Failure::Usage("need --model or --h".into())),
    };
    h.require(args.kmax, "H")?;
    let htilde = args.htilde.clone().map(HSequence::user).transpose()?;
    if let Some(q) = &htilde {
        q.require(args.kmax, "H̃")?;
    }
    log.log(&format!("H from {}", h.origin()));

    let moments = (1..=args.kmax)
        .map(|k| match &htilde {
            Some(q) => qform_moment(k, y, &h, q),
            None => limiting_moment(k, y, &h),
        })
        .collect::<rmtlaw::Result<Vec<f64>>>()?;

    let text = match args.output.format {
        Format::Json => to_json(&json!({
            "y": round_sig(y.y()),
            "h_origin": h.origin().to_string(),
            "moments": (1..=args.kmax).map(|k| json!({
                "k": k,
                "h": round_sig(h.get(k)),
                "htilde": htilde.as_ref().map(|q| round_sig(q.get(k))),
                "moment": round_sig(moments[k - 1]),
            })).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut s = String::from("k,h,moment\n");
            for k in 1..=args.kmax {
                s.push_str(&format!("{k},{},{}\n", fmt_sig(h.get(k)), fmt_sig(moments[k - 1])));
            }
            s
        }
    };
    emit(args.output.out.as_deref(), &text)
}

fn report_csv(report: &MomentReport) -> String {
    let mut s = String::from("k,predicted_limit,predicted_finite,empirical_mean,empirical_stderr\n");
    for r in &report.moments {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.k,
            r.predicted_limit.map(fmt_sig).unwrap_or_default(),
            fmt_sig(r.predicted_finite),
            fmt_sig(r.empirical_mean),
            fmt_sig(r.empirical_stderr)
        ));
    }
    s
}

fn cmd_simulate(args: &SimulateArgs, log: &Logger) -> CliResult<()> {
    let (config, options) = sim_config(&args.run)?;
    let report = run_monte_carlo(&config, &options)?;
    log.log(&format!(
        "{} replicates of {}x{} in {:.2} s",
        config.replicates,
        config.m,
        config.n,
        report.runtime_seconds.unwrap_or(0.0)
    ));
    let text = match args.output.format {
        Format::Json => report.to_json(args.timing),
        Format::Csv => report_csv(&report),
    };
    emit(args.output.out.as_deref(), &text)
}

fn read_report(path: &Path) -> CliResult<MomentReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(MomentReport::from_json(&text)?)
}

fn with_predictions_at(report: &MomentReport, y: f64) -> CliResult<MomentReport> {
    let model: StationaryModel = report.config.model.parse()?;
    let pred = predictions(&model, report.config.m, AspectRatio::new(y)?, report.config.k_max)?;
    let mut out = report.clone();
    out.config.y = y;
    for (j, row) in out.moments.iter_mut().enumerate() {
        row.predicted_finite = pred.finite[j];
        row.predicted_limit = pred.limit.as_ref().map(|l| l[j]);
    }
    Ok(out)
}

fn cmd_compare(args: &CompareArgs, log: &Logger) -> CliResult<()> {
    let verdicts: Vec<Verdict> = match (args.reports.as_slice(), &args.model) {
        ([a, b], None) => {
            if args.y.is_some() {
                return Err(Failure::Usage("--y applies to a single report".into()));
            }
            let (a, b) = (read_report(a)?, read_report(b)?);
            compare_reports(&a, &b)?
        }
        (reports, model) => {
            let report = match (reports, model) {
                ([path], None) => read_report(path)?,
                ([], Some(model)) => {
                    let (Some(m), Some(n)) = (args.m, args.n) else {
                        return Err(Failure::Usage("inline compare needs --m and --n".into()));
                    };
                    let run = RunArgs {
                        model: model.clone(),
                        m,
                        n,
                        reps: args.reps,
                        kmax: args.kmax,
                        seed: args.seed,
                        mode: args.mode,
                        workers: args.workers,
                        force: args.force,
                    };
                    let (config, options) = sim_config(&run)?;
                    run_monte_carlo(&config, &options)?
                }
                _ => return Err(Failure::Usage("give one or two report paths, or --model".into())),
            };
            let report = match args.y {
                Some(y) => with_predictions_at(&report, y)?,
                None => report,
            };
            let target = match args.target {
                TargetArg::Finite => PredictionTarget::Finite,
                TargetArg::Limit => PredictionTarget::Limit,
            };
            compare_to_prediction(&report, target)?
        }
    };

    let all_pass = verdicts.iter().all(|v| v.pass);
    let text = match args.output.format {
        Format::Json => to_json(&json!({
            "pass": all_pass,
            "rows": verdicts.iter().map(|v| json!({
                "k": v.k,
                "empirical": round_sig(v.empirical),
                "reference": round_sig(v.reference),
                "stderr": round_sig(v.stderr),
                "z": if v.z.is_finite() { json!(round_sig(v.z)) } else { json!(null) },
                "relative_error": if v.relative_error.is_finite() { json!(round_sig(v.relative_error)) } else { json!(null) },
                "verdict": if v.pass { "PASS" } else { "FAIL" },
            })).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut s = String::from("k,empirical,reference,stderr,z,relative_error,verdict\n");
            for v in &verdicts {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    v.k,
                    fmt_sig(v.empirical),
                    fmt_sig(v.reference),
                    fmt_sig(v.stderr),
                    fmt_sig(v.z),
                    fmt_sig(v.relative_error),
                    if v.pass { "PASS" } else { "FAIL" }
                ));
            }
            s
        }
    };
    emit(args.output.out.as_deref(), &text)?;
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    if failed > 0 {
        log.log(&format!("{failed} of {} rows FAIL", verdicts.len()));
        Err(Failure::Verdict)
    } else {
        Ok(())
    }
}

fn cmd_spectrum(args: &SpectrumArgs, log: &Logger) -> CliResult<()> {
    let (config, options) = sim_config(&args.run)?;
    let hist = eigenvalue_histogram(&config, args.bins, args.range, &options)?;
    if hist.outside > 0 {
        log.log(&format!("{} eigenvalues outside the range were not binned", hist.outside));
    }
    let text = match args.format {
        Format::Csv => hist.to_csv(),
        Format::Json => to_json(&json!({
            "total": hist.total,
            "outside": hist.outside,
            "bins": hist.bins.iter().map(|b| json!({
                "bin_lo": round_sig(b.lo),
                "bin_hi": round_sig(b.hi),
                "count": b.count,
                "density": round_sig(b.density),
            })).collect::<Vec<_>>(),
        })),
    };
    emit(args.out.as_deref(), &text)
}

fn parse_sizes(s: &str) -> CliResult<BTreeMap<usize, usize>> {
    let mut sizes = BTreeMap::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (size, count) = item
            .split_once(':')
            .ok_or_else(|| Failure::Usage(format!("expected size:count, got {item:?}")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Failure::Usage(format!("bad integer {t:?} in --sizes")))
        };
        *sizes.entry(parse(size)?).or_insert(0) += parse(count)?;
    }
    Ok(sizes)
}

fn cmd_nc(action: &NcAction) -> CliResult<()> {
    let (text, out) = match action {
        NcAction::Enumerate { k, output } => {
            let all = enumerate_noncrossing(*k)?;
            let text = if output.json {
                to_json(&json!(all.iter().map(|p| p.to_string()).collect::<Vec<_>>()))
            } else {
                all.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("\n")
            };
            (text, &output.out)
        }
        NcAction::Complement { blocks, output } => {
            let p: Partition = blocks.parse()?;
            let kc = p.kreweras_complement()?;
            let text = if output.json {
                to_json(&json!({ "partition": p.to_string(), "complement": kc.to_string() }))
            } else {
                kc.to_string()
            };
            (text, &output.out)
        }
        NcAction::Count { k, sizes, output } => {
            let count = match sizes {
                Some(s) => count_nc_by_block_sizes(*k, &parse_sizes(s)?)?,
                None => rmtlaw::catalan(*k)?,
            };
            let text = if output.json {
                json!({ "k": k, "count": count.to_string() }).to_string()
            } else {
                count.to_string()
            };
            (text, &output.out)
        }
        NcAction::Graphs { blocks, output } => {
            let p: Partition = blocks.parse()?;
            let graphs = max_component_graphs(&p)?;
            let components: Vec<String> = graphs.iter().map(|g| g.component_partition().to_string()).collect();
            let text = if output.json {
                to_json(&json!({
                    "partition": p.to_string(),
                    "noncrossing": p.is_noncrossing(),
                    "max_component_graphs": graphs.len(),
                    "component_partitions": components,
                }))
            } else {
                std::iter::once(graphs.len().to_string()).chain(components).collect::<Vec<_>>().join("\n")
            };
            (text, &output.out)
        }
    };
    emit(out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let log = Logger { quiet: cli.quiet };
    let result = match &cli.command {
        Command::Predict(a) => cmd_predict(a, &log),
        Command::Simulate(a) => cmd_simulate(a, &log),
        Command::Compare(a) => cmd_compare(a, &log),
        Command::Spectrum(a) => cmd_spectrum(a, &log),
        Command::Nc(a) => cmd_nc(&a.action),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Numeric(msg)) => {
            eprintln!("rmtlaw: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("rmtlaw: {msg}");
            if msg.contains("budget") {
                eprintln!("rmtlaw: pass --force or set RMTLAW_BUDGET (default {DESK_MAX_CELLS} cells) to run larger jobs");
            }
            ExitCode::from(2)
        }
    }
}
