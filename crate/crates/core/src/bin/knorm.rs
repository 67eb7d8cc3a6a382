use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use knorm::harness::{self, Fault, ResultTable, SimulationConfig};
use knorm::linreg::{DataTable, PreprocessConfig};
use knorm::ordering::{compare_with, DEFAULT_DIRECTIONS, DEFAULT_VOLUME_SAMPLES};
use knorm::{MechanismConfig, NormBall, Result, RngStream};

#[derive(Parser)]
#[command(
    name = "knorm",
    version,
    about = "K-norm mechanism simulations and diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Privacy budgets, comma separated
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Rows per simulated dataset (draws for `sample`/`diagnostics`)
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    /// Mechanisms, comma separated
    #[arg(long, value_delimiter = ',')]
    mech: Option<Vec<String>>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; summaries go to `<stem>_summary.<ext>` alongside
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn apply(&self, mut cfg: SimulationConfig) -> SimulationConfig {
        if let Some(e) = &self.eps {
            cfg.epsilons = e.clone();
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(r) = self.reps {
            cfg.replicates = r;
        }
        if let Some(m) = &self.mech {
            cfg.mechanisms = m.iter().filter(|s| !s.is_empty()).cloned().collect();
        }
        if let Some(q) = self.q {
            cfg.q = q;
        }
        cfg.seed = self.seed;
        cfg.out = self.out.clone();
        cfg
    }
}

#[derive(Subcommand)]
enum Command {
    /// Private logistic regression by objective perturbation
    SimulateLogistic {
        #[command(flatten)]
        common: Common,
    },
    /// Confidence-interval coverage of private linear regression
    SimulateCoverage {
        #[command(flatten)]
        common: Common,
        /// Number of predictors
        #[arg(long)]
        p: Option<usize>,
    },
    /// Private linear regression on a CSV file, measured against the MLE
    RunRegression {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        /// Name of the response column
        #[arg(long)]
        response: String,
        /// Columns to log-transform, comma separated
        #[arg(long, value_delimiter = ',')]
        log: Vec<String>,
        #[arg(long, default_value_t = 0.0001)]
        lower_q: f64,
        #[arg(long, default_value_t = 0.9999)]
        upper_q: f64,
        /// Also write the MLE and one private estimate per (eps, mechanism)
        #[arg(long)]
        coef_out: Option<PathBuf>,
    },
    /// Compare two K-norm mechanisms
    Compare {
        #[command(flatten)]
        common: Common,
        /// First ball: a record (`kind=lp p=1 radius=1 dim=2 bound=1`) or a
        /// short name (l1, l2, linf, k2, k3, lp:<p>) used with --dim
        #[arg(long)]
        a: String,
        #[arg(long)]
        sens_a: f64,
        #[arg(long)]
        b: String,
        #[arg(long)]
        sens_b: f64,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_DIRECTIONS)]
        directions: usize,
        #[arg(long, default_value_t = DEFAULT_VOLUME_SAMPLES)]
        volume_samples: usize,
    },
    /// Draw noise from one mechanism as CSV (replicate, coordinates, gauge)
    Sample {
        #[command(flatten)]
        common: Common,
        /// Ball record or short name
        #[arg(long)]
        ball: String,
        #[arg(long, default_value_t = 1.0)]
        sens: f64,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Statistical self-tests of the samplers
    Diagnostics {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dim: Option<usize>,
        /// Inject a sampler fault (halved-laplace) to exercise failure paths
        #[arg(long, hide = true)]
        fault: Option<String>,
    },
}

fn parse_ball(text: &str, dim: Option<usize>) -> Result<NormBall> {
    if text.contains('=') {
        return text.parse();
    }
    let need_dim =
        || dim.ok_or_else(|| knorm::Error::InvalidParameter(format!("`{text}` needs --dim")));
    match text {
        "l1" => Ok(NormBall::l1(need_dim()?)),
        "l2" => Ok(NormBall::l2(need_dim()?)),
        "linf" => Ok(NormBall::linf(need_dim()?)),
        "k2" => Ok(NormBall::k2()),
        "k3" => Ok(NormBall::k3()),
        _ => match text.strip_prefix("lp:") {
            Some(p) => {
                let p = if p == "inf" {
                    f64::INFINITY
                } else {
                    p.parse().map_err(|_| {
                        knorm::Error::InvalidParameter(format!("bad exponent `{p}`"))
                    })?
                };
                NormBall::lp(p, 1.0, need_dim()?)
            }
            None => Err(knorm::Error::InvalidParameter(format!(
                "unknown ball `{text}`"
            ))),
        },
    }
}

fn single_eps(common: &Common) -> Result<f64> {
    match common.eps.as_deref() {
        None => Ok(1.0),
        Some([e]) => Ok(*e),
        Some(_) => Err(knorm::Error::InvalidParameter("give a single --eps".into())),
    }
}

fn emit_table(table: &ResultTable, out: &Option<PathBuf>) -> Result<()> {
    if let Some(path) = out {
        let (long, summary) = table.write(path)?;
        eprintln!("wrote {} and {}", long.display(), summary.display());
    }
    print!("{}", table.summary_csv());
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::SimulateLogistic { common } => {
            let cfg = common.apply(SimulationConfig::logistic());
            emit_table(&harness::simulate_logistic(&cfg)?, &cfg.out)?;
        }
        Command::SimulateCoverage { common, p } => {
            let mut cfg = common.apply(SimulationConfig::coverage());
            if let Some(p) = p {
                cfg.dim = p;
            }
            emit_table(&harness::simulate_coverage(&cfg)?, &cfg.out)?;
        }
        Command::RunRegression {
            common,
            data,
            response,
            log,
            lower_q,
            upper_q,
            coef_out,
        } => {
            let cfg = common.apply(SimulationConfig::regression_file());
            let pre = PreprocessConfig {
                lower_q,
                upper_q,
                ..PreprocessConfig::new(response)
            }
            .with_log_columns(log.into_iter().filter(|s| !s.is_empty()));
            let table = DataTable::from_csv_path(&data)?;
            emit_table(
                &harness::run_regression_table(&cfg, &table, &pre)?,
                &cfg.out,
            )?;
            if let Some(path) = coef_out {
                std::fs::write(path, harness::regression_coefficients(&cfg, &table, &pre)?)?;
            }
        }
        Command::Compare {
            common,
            a,
            sens_a,
            b,
            sens_b,
            dim,
            directions,
            volume_samples,
        } => {
            let eps = single_eps(&common)?;
            let ma = MechanismConfig::new(eps, sens_a, parse_ball(&a, dim)?)?;
            let mb = MechanismConfig::new(eps, sens_b, parse_ball(&b, dim)?)?;
            let report = compare_with(
                &ma,
                &mb,
                RngStream::new(common.seed, 0),
                directions,
                volume_samples,
            )?;
            let csv = harness::comparison_csv(&report);
            print!("{report}");
            println!();
            print!("{csv}");
            if let Some(path) = &common.out {
                std::fs::write(path, csv)?;
            }
        }
        Command::Sample {
            common,
            ball,
            sens,
            dim,
        } => {
            let cfg = MechanismConfig::new(single_eps(&common)?, sens, parse_ball(&ball, dim)?)?;
            let csv = harness::sample_csv(
                &cfg,
                common.n.unwrap_or(1000),
                RngStream::new(common.seed, 0),
            )?;
            match &common.out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Diagnostics { common, dim, fault } => {
            let mut cfg = common.apply(SimulationConfig::diagnostics());
            if let Some(d) = dim {
                cfg.dim = d;
            }
            let fault = match fault.as_deref() {
                None => Fault::None,
                Some("halved-laplace") => Fault::HalvedLaplaceScale,
                Some(f) => {
                    return Err(knorm::Error::InvalidParameter(format!(
                        "unknown fault `{f}`"
                    )))
                }
            };
            let report = harness::diagnostics(&cfg, fault)?;
            print!("{report}");
            let passed = report.passed();
            println!(
                "{}",
                if passed {
                    "all diagnostics passed"
                } else {
                    "diagnostics FAILED"
                }
            );
            if let Some(path) = &common.out {
                std::fs::write(path, report.to_string())?;
            }
            return Ok(passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
