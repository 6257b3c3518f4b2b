use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mavmac::capacity::{format_sig12, linear_grid};
use mavmac::coding::{trial_trace, ExperimentRow};
use mavmac::correlation::{DeterministicModulator, ExtremalMap};
use mavmac::verify::{self, Suite};
use mavmac::{
    avcei_capacity, deterministic_correlation, effective_flip_prob, epr_correlation,
    estimate_success, local_correlation, pr_box, repetition_code, separation_sweep, BoxStrength,
    CapacityQuery, Correlation, JammerConfig, JammerKind, LocalCorrelationSpec,
};

#[derive(Parser, Debug)]
#[command(
    name = "mavmac",
    version,
    about = "Jammed binary MAC capacities and coding experiments"
)]
struct Cli {
    /// Worker threads for Monte Carlo trials (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the capacity for jammer budget LAMBDA and environment noise OMEGA.
    Capacity {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        omega: f64,
    },
    /// Write the classical / EPR / PR endpoint table over a grid of budgets.
    Sweep {
        #[arg(long, default_value_t = 0.0)]
        grid_start: f64,
        #[arg(long, default_value_t = 0.5)]
        grid_end: f64,
        #[arg(long, default_value_t = 51)]
        grid_steps: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo success rate of the repetition code.
    Simulate {
        /// det:A,B | local:FILE | epr | pr:T
        #[arg(long)]
        modulation: String,
        #[arg(long, value_enum, default_value_t = JammerArg::Greedy)]
        jammer: JammerArg,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Typical-set window half-width.
        #[arg(long)]
        eps: Option<f64>,
        /// Target flip rate inside the typical-set window.
        #[arg(long)]
        p_star: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append a row to this experiment CSV (header written on creation).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Dump per-block traces of the first COUNT trials as JSON lines.
        #[arg(long, requires = "trace_count")]
        trace: Option<PathBuf>,
        #[arg(long, requires = "trace")]
        trace_count: Option<u64>,
    },
    /// Run an invariant suite and report each check.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum JammerArg {
    None,
    Greedy,
    Typical,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug)]
enum Failure {
    Verification(Vec<String>),
    Usage(String),
    Io(String),
    Sizing(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
            Failure::Sizing(_) => 4,
        }
    }
}

impl From<mavmac::Error> for Failure {
    fn from(e: mavmac::Error) -> Self {
        match e {
            mavmac::Error::Sizing { .. } | mavmac::Error::TooLarge { .. } => {
                Failure::Sizing(e.to_string())
            }
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Verification(names) => {
                    eprintln!("verification failed:");
                    for n in names {
                        eprintln!("  {n}");
                    }
                }
                Failure::Usage(m) => eprintln!("error: {m}\n\nFor usage, try '--help'."),
                Failure::Io(m) => eprintln!("I/O error: {m}"),
                Failure::Sizing(m) => eprintln!("sizing error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Capacity { lambda, omega } => {
            let q = CapacityQuery::new(lambda, omega)?;
            println!("{}", format_sig12(avcei_capacity(q)));
            Ok(())
        }
        Command::Sweep {
            grid_start,
            grid_end,
            grid_steps,
            out,
        } => sweep(grid_start, grid_end, grid_steps, out.as_deref()),
        Command::Simulate {
            modulation,
            jammer,
            lambda,
            n,
            trials,
            seed,
            eps,
            p_star,
            format,
            out,
            csv,
            trace,
            trace_count,
        } => {
            let (label, corr) = parse_modulation(&modulation)?;
            let kind = match jammer {
                JammerArg::None => JammerKind::None,
                JammerArg::Greedy => JammerKind::Greedy,
                JammerArg::Typical => JammerKind::Typical,
            };
            let mut cfg = JammerConfig {
                kind,
                lambda,
                eps: 0.05,
                p_star,
            };
            if let Some(e) = eps {
                cfg.eps = e;
            }
            let code = repetition_code(n)?;
            let strategy = cfg.build(n, effective_flip_prob(&corr))?;
            let est = estimate_success(&code, &corr, &strategy, lambda, trials, seed)?;
            let row = ExperimentRow {
                n,
                trials,
                modulation: label,
                jammer: strategy.label().to_string(),
                lambda,
                rate: est.rate,
                ci_low: est.ci_low,
                ci_high: est.ci_high,
                empirical_flip_rate: est.empirical_flip_rate,
                seed,
            };
            let body = match format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&est).expect("estimate serializes");
                    s.push('\n');
                    s.into_bytes()
                }
                Format::Csv => csv_bytes(&row, true)?,
            };
            emit(out.as_deref(), &body)?;
            if let Some(path) = csv {
                append_row(&path, &row)?;
            }
            if let (Some(path), Some(count)) = (trace, trace_count) {
                let mut w = create(&path)?;
                for i in 0..count.min(trials) {
                    let (_, t) = trial_trace(&code, &corr, &strategy, lambda, seed, i)?;
                    let rec = t.to_record(mavmac::rng::derive_seed(seed, i));
                    serde_json::to_writer(&mut w, &rec).map_err(|e| io_err(&path, e))?;
                    writeln!(w).map_err(|e| io_err(&path, e))?;
                }
                w.flush().map_err(|e| io_err(&path, e))?;
            }
            Ok(())
        }
        Command::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            let checks = verify::run(suite);
            let mut failed = Vec::new();
            for c in &checks {
                println!("{c}");
                if !c.passed {
                    failed.push(c.name.clone());
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Verification(failed))
            }
        }
    }
}

fn sweep(start: f64, end: f64, steps: usize, out: Option<&Path>) -> Result<(), Failure> {
    let in_unit = |v: f64| (0.0..=1.0).contains(&v);
    if !in_unit(start) || !in_unit(end) {
        return Err(Failure::Usage("grid bounds must lie in [0, 1]".into()));
    }
    match steps {
        0 => return Err(Failure::Usage("--grid-steps must be at least 1".into())),
        1 if start > end => return Err(Failure::Usage("--grid-start exceeds --grid-end".into())),
        1 => {}
        _ if start >= end => {
            return Err(Failure::Usage(
                "--grid-start must be below --grid-end".into(),
            ))
        }
        _ => {}
    }
    let rows = separation_sweep(&linear_grid(start, end, steps))?;
    let mut buf = String::from("lambda,classical,epr,pr\n");
    for r in rows {
        buf.push_str(&format!(
            "{},{},{},{}\n",
            format_sig12(r.lambda),
            format_sig12(r.classical),
            format_sig12(r.epr),
            format_sig12(r.pr)
        ));
    }
    emit(out, buf.as_bytes())
}

fn parse_modulation(spec: &str) -> Result<(String, Correlation), Failure> {
    let bad = |why: &str| Failure::Usage(format!("invalid modulation {spec:?}: {why}"));
    if spec == "epr" {
        return Ok(("epr".into(), epr_correlation()));
    }
    if let Some(rest) = spec.strip_prefix("det:") {
        let (a, b) = rest
            .split_once(',')
            .ok_or_else(|| bad("expected det:A,B"))?;
        let a: ExtremalMap = a
            .trim()
            .parse()
            .map_err(|e: mavmac::Error| bad(&e.to_string()))?;
        let b: ExtremalMap = b
            .trim()
            .parse()
            .map_err(|e: mavmac::Error| bad(&e.to_string()))?;
        let m = DeterministicModulator::new(a, b);
        return Ok((m.label(), deterministic_correlation(m)));
    }
    if let Some(t) = spec.strip_prefix("pr:") {
        let t: f64 = t.parse().map_err(|_| bad("box strength is not a number"))?;
        let s = BoxStrength::new(t).map_err(|e| bad(&e.to_string()))?;
        return Ok((spec.to_string(), pr_box(s)));
    }
    if let Some(file) = spec.strip_prefix("local:") {
        let path = Path::new(file);
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let local: LocalCorrelationSpec =
            serde_json::from_str(&text).map_err(|e| bad(&e.to_string()))?;
        let corr = local_correlation(&local).map_err(|e| bad(&e.to_string()))?;
        return Ok(("local".into(), corr));
    }
    Err(bad("expected det:A,B | local:FILE | epr | pr:T"))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_err(path, e))
}

fn emit(out: Option<&Path>, body: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, body).map_err(|e| io_err(path, e)),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(body)
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Io(format!("stdout: {e}")))
        }
    }
}

fn csv_bytes(row: &ExperimentRow, header: bool) -> Result<Vec<u8>, Failure> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(header)
        .from_writer(Vec::new());
    w.serialize(row).map_err(|e| Failure::Io(e.to_string()))?;
    w.into_inner().map_err(|e| Failure::Io(e.to_string()))
}

fn append_row(path: &Path, row: &ExperimentRow) -> Result<(), Failure> {
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| io_err(path, e))?;
    f.write_all(&csv_bytes(row, fresh)?)
        .map_err(|e| io_err(path, e))
}
