use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hspace::experiments::{
    chernoff_large, chernoff_lower, chernoff_upper, hitting_time, hitting_time_csv, janson, load_pattern,
    min_f_csv, min_f_samples, pattern_report, sweep, varphi, ExperimentError, Recorded, Result, SweepConfig,
    DEFAULT_T_LIMIT,
};
use hspace::pattern::HPattern;
use hspace::spaces::{verify_kn, KN_VERIFY_LIMIT};

#[derive(Parser)]
#[command(name = "hspace", version, about = "Pattern spaces of graphs over GF(2), exact and sampled")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PatternArg {
    /// Corpus name (C3..C9, K4, K5, K4+pendant, K5+C7) or an edge-list file.
    #[arg(long)]
    pattern: String,
}

#[derive(Args)]
struct Output {
    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Automorphisms, densities, class and threshold scale of a pattern.
    Analyze {
        #[command(flatten)]
        pattern: PatternArg,
        /// Host orders for the threshold table.
        #[arg(long, value_delimiter = ',', default_values_t = [100usize, 1000, 10000])]
        n: Vec<usize>,
    },
    /// Compare the pattern space of K_n with its classified value.
    VerifyKn {
        #[command(flatten)]
        pattern: PatternArg,
        /// Orders to check; defaults to every order from |V(H)| to 9.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
    },
    /// Predicate frequencies over a grid of orders and threshold multiples.
    Sweep {
        #[command(flatten)]
        pattern: PatternArg,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Multiples of p*(n): a list `0.7,1.3` or a range `0.6:1.6:0.1`.
        #[arg(long = "p-mult", required = true)]
        p_mult: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Extra quantities to record besides Q.
        #[arg(long, value_delimiter = ',')]
        record: Vec<Quantity>,
        /// Largest n at which pattern spaces are computed.
        #[arg(long, default_value_t = DEFAULT_T_LIMIT)]
        t_limit: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Walk random edge orders of K_n and compare Q with the space equality.
    HittingTime {
        #[command(flatten)]
        pattern: PatternArg,
        #[arg(long)]
        n: usize,
        /// Number of random edge orders.
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Sample G(n, p) and report the lightest separating vector.
    MinF {
        #[command(flatten)]
        pattern: PatternArg,
        #[arg(long)]
        n: usize,
        #[arg(long = "p-mult", default_value_t = 1.0)]
        p_mult: f64,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Evaluate a deviation bound.
    TailBounds {
        #[arg(value_enum)]
        kind: BoundKind,
        /// Argument of varphi.
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        /// Deviation (or the factor K for `large`).
        #[arg(long)]
        t: Option<f64>,
        /// Correlation sum, diagonal included.
        #[arg(long)]
        delta: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Quantity {
    R,
    S,
    T,
    MinF,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundKind {
    Varphi,
    ChernoffUpper,
    ChernoffLower,
    Large,
    Janson,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn config(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Config(msg.into())
}

fn parse_multiples(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| config(format!("bad number `{t}` in --p-mult")));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [lo, hi, step] => {
            let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
            if !(step > 0.0) || hi < lo {
                return Err(config("range needs lo <= hi and a positive step"));
            }
            // Round to the step's precision so 0.6 + 3·0.1 prints as 0.9.
            let count = ((hi - lo) / step + 1e-9).floor() as usize;
            Ok((0..=count).map(|i| ((lo + i as f64 * step) * 1e9).round() / 1e9).collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(config("--p-mult takes a list a,b,c or a range lo:hi:step")),
    }
}

fn emit(csv: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

/// Summary lines go to stdout when the CSV goes to a file, else to stderr.
fn summary(out: &Option<PathBuf>, line: &str) {
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Analyze { pattern, n } => {
            let h = load_pattern(&pattern.pattern)?;
            print!("{}", pattern_report(&h, &n)?);
            Ok(0)
        }
        Command::VerifyKn { pattern, n } => verify(&load_pattern(&pattern.pattern)?, n),
        Command::Sweep { pattern, n, p_mult, trials, seed, record, t_limit, output } => {
            let mut cfg = SweepConfig::new(load_pattern(&pattern.pattern)?, n, parse_multiples(&p_mult)?, trials, seed);
            cfg.t_limit = t_limit;
            cfg.record = Recorded::default();
            for q in record {
                match q {
                    Quantity::R => cfg.record.r = true,
                    Quantity::S => cfg.record.s = true,
                    Quantity::T => cfg.record.t = true,
                    Quantity::MinF => cfg.record.min_f = true,
                }
            }
            let result = sweep(&cfg)?;
            emit(&result.to_csv(), &output.out)?;
            for c in &result.cells {
                summary(&output.out, &format!("n={} mult={} p={:.4e} freq_Q={:.3}", c.n, c.multiple, c.p, c.freq_q()));
            }
            Ok(0)
        }
        Command::HittingTime { pattern, n, trials, seed, output } => {
            let h = load_pattern(&pattern.pattern)?;
            let reports = hitting_time(&h, n, trials, seed)?;
            emit(&hitting_time_csv(&reports), &output.out)?;
            let violations: usize = reports.iter().map(|r| r.violations.len()).sum();
            let failures: usize = reports.iter().map(|r| r.containment_failures + r.checkpoint_mismatches).sum();
            summary(
                &output.out,
                &format!("{} walks, {violations} steps with Q but not T, {failures} consistency failures", reports.len()),
            );
            Ok(if failures > 0 { 1 } else { 0 })
        }
        Command::MinF { pattern, n, p_mult, trials, seed, output } => {
            let h = load_pattern(&pattern.pattern)?;
            let rows = min_f_samples(&h, n, p_mult, trials, seed)?;
            emit(&min_f_csv(&rows), &output.out)?;
            let with_f = rows.iter().filter(|r| r.weight.is_some()).count();
            let bad = rows.iter().filter(|r| r.exact == Some(true) && r.degree_bound == Some(false)).count();
            summary(&output.out, &format!("{} samples, {with_f} outside T, {bad} degree-bound failures", rows.len()));
            Ok(if bad > 0 { 1 } else { 0 })
        }
        Command::TailBounds { kind, x, mu, t, delta } => {
            let need = |v: Option<f64>, name: &str| v.ok_or_else(|| config(format!("--{name} is required")));
            match kind {
                BoundKind::Varphi => println!("{}", varphi(need(x, "x")?)?),
                BoundKind::ChernoffUpper => {
                    let (a, b) = chernoff_upper(need(mu, "mu")?, need(t, "t")?)?;
                    println!("{a} {b}");
                }
                BoundKind::ChernoffLower => {
                    let (a, b) = chernoff_lower(need(mu, "mu")?, need(t, "t")?)?;
                    println!("{a} {b}");
                }
                BoundKind::Large => println!("{}", chernoff_large(need(mu, "mu")?, need(t, "t")?)?),
                BoundKind::Janson => {
                    let (a, b) = janson(need(mu, "mu")?, need(t, "t")?, need(delta, "delta")?)?;
                    println!("{a} {b}");
                }
            }
            Ok(0)
        }
    }
}

fn verify(h: &HPattern, n: Vec<usize>) -> Result<u8> {
    let ns = if n.is_empty() { (h.v()..=KN_VERIFY_LIMIT).collect() } else { n };
    if let Some(&bad) = ns.iter().find(|&&k| k > KN_VERIFY_LIMIT) {
        return Err(ExperimentError::Budget(format!("n = {bad} exceeds the K_n limit {KN_VERIFY_LIMIT}")));
    }
    println!("{:>3} {:>8} {:>6} {:>6} {:>8} {}", "n", "in_range", "dim_H", "dim_W", "copies", "equal");
    let mut failed = false;
    for k in ns {
        let r = verify_kn(h, k)?;
        println!("{:>3} {:>8} {:>6} {:>6} {:>8} {}", r.n, r.in_range, r.dim_h, r.dim_w, r.copies, r.equal);
        failed |= r.in_range && !r.equal;
    }
    Ok(if failed { 1 } else { 0 })
}
