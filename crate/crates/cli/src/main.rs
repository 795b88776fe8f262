use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use supergeom::riesz::{gamma_closed, Family, GammaValue, ShiftDomain};
use supergeom::suite::{is_usage_error, run_case, run_suite, Case, SuiteConfig, SuiteReport};
use supergeom::{Error, MultiIndex};

#[derive(Parser, Debug)]
#[command(
    name = "supergeom",
    version,
    about = "Gamma values and numerical verification reports"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON suite configuration; quadrature settings apply to every command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the per-case tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    mc_samples: Option<u64>,
    /// Adds wall-clock times to the reports.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form gamma function of the cone.
    Gamma(GammaArgs),
    /// Gamma function by quadrature against the closed form.
    VerifyGamma(GammaArgs),
    /// Both sides of the super-bosonisation identity.
    VerifySbos {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: usize,
        /// `diag:a,b` or rows separated by `;`.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Number of external odd generators `t1, t2, …` available to `--x`.
        #[arg(long, default_value_t = 0)]
        odd_params: usize,
        /// Prefix expression replacing the Laplace kernel of `x`.
        #[arg(long)]
        f: Option<String>,
    },
    /// Laplace transform of a conical superfunction against its closed form.
    VerifyLaplace {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        m: Vec<f64>,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 0)]
        odd_params: usize,
    },
    /// Fourier inversion, derivative rules, convolution and Parseval.
    VerifyFourier {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
    },
    /// Invariance of the measure on the cone under random group elements.
    VerifyInvariance {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        odd_params: usize,
        #[arg(long)]
        f: Option<String>,
    },
    /// Nilpotent shifts of the integration cycle.
    VerifyShift {
        #[arg(long, value_enum)]
        domain: DomainArg,
        /// Matrix size on the domain.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Generators the random shifts are built from.
        #[arg(long, default_value_t = 4)]
        odd_params: usize,
        #[arg(long)]
        f: Option<String>,
    },
    /// Runs every case of the configuration (the default grid without `--config`).
    Suite,
}

#[derive(Args, Debug)]
struct GammaArgs {
    #[arg(long)]
    p: usize,
    #[arg(long)]
    q: usize,
    /// Multi-index, e.g. `3,2`.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    m: Vec<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    OddLower,
    OddUpper,
    BlockDiagonal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DomainArg {
    Unitary,
    Cone,
}

#[derive(Serialize)]
struct GammaOutput {
    command: &'static str,
    inputs: serde_json::Value,
    #[serde(flatten)]
    value: GammaValue,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if is_usage_error(&e) {
            Failure::Usage(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn load_config(common: &Common) -> Result<SuiteConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("malformed config: {e}")))?
        }
        None => SuiteConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(t) = common.tol {
        cfg.tol = Some(t);
    }
    if let Some(n) = common.mc_samples {
        cfg.mc_samples = n;
    }
    Ok(cfg)
}

fn to_case(command: Command) -> Case {
    match command {
        Command::Gamma(_) | Command::Suite => unreachable!("handled separately"),
        Command::VerifyGamma(g) => Case::Gamma {
            p: g.p,
            q: g.q,
            m: g.m,
        },
        Command::VerifySbos {
            p,
            q,
            n,
            x,
            odd_params,
            f,
        } => Case::Sbos {
            p,
            q,
            n,
            x,
            odd_params,
            f,
        },
        Command::VerifyLaplace {
            p,
            q,
            m,
            x,
            odd_params,
        } => Case::Laplace {
            p,
            q,
            m,
            x,
            odd_params,
        },
        Command::VerifyFourier { p, q } => Case::Fourier { p, q },
        Command::VerifyInvariance {
            family,
            count,
            odd_params,
            f,
        } => Case::Invariance {
            family: match family {
                FamilyArg::OddLower => Family::OddLower,
                FamilyArg::OddUpper => Family::OddUpper,
                FamilyArg::BlockDiagonal => Family::BlockDiagonal,
            },
            count,
            odd_params,
            f,
        },
        Command::VerifyShift {
            domain,
            k,
            count,
            odd_params,
            f,
        } => Case::Shift {
            domain: match domain {
                DomainArg::Unitary => ShiftDomain::Unitary(k),
                DomainArg::Cone => ShiftDomain::Cone(k),
            },
            count,
            n_gen: odd_params,
            f,
        },
    }
}

fn print_json<T: Serialize>(v: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("reports serialise")
    );
}

fn print_summary(r: &SuiteReport) {
    eprintln!(
        "{:<10} {:<16} {:>6} {:>12}",
        "criterion", "kind", "pass", "max rel err"
    );
    for c in &r.cases {
        let worst = c.report.as_ref().map(|r| {
            r.comparisons
                .iter()
                .map(|x| x.max_rel_err())
                .fold(0.0, f64::max)
        });
        eprintln!(
            "{:<10} {:<16} {:>6} {:>12}",
            c.criterion.map_or("-".to_string(), |n| n.to_string()),
            c.kind,
            if c.pass { "ok" } else { "FAIL" },
            match (worst, &c.error) {
                (Some(w), _) => format!("{w:.2e}"),
                (None, Some(_)) => "error".to_string(),
                _ => "-".to_string(),
            }
        );
        if let Some(e) = &c.error {
            eprintln!("    {e}");
        }
    }
}

fn run(cli: Cli) -> Result<i32, Failure> {
    let cfg = load_config(&cli.common)?;
    match cli.command {
        Command::Gamma(g) => {
            let m = MultiIndex::new(g.p, g.q, g.m.clone())?;
            let out = GammaOutput {
                command: "gamma",
                inputs: serde_json::json!({ "p": g.p, "q": g.q, "m": g.m }),
                value: gamma_closed(&m),
            };
            print_json(&out);
            Ok(0)
        }
        Command::Suite => {
            let r = run_suite(&cfg, cli.common.timing);
            print_summary(&r);
            print_json(&r);
            Ok(r.exit_code())
        }
        other => {
            let case = to_case(other);
            let start = Instant::now();
            let mut r = run_case(&case, &cfg)?;
            r.command = format!("verify-{}", case.kind());
            if cli.common.timing {
                r.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            print_json(&r);
            Ok(if r.pass { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(1)
        }
    }
}
