use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use setinc_cli::commands::{self, Options, Restriction};
use setinc_cli::problem_file::{matrix_from_rows, Rows, TargetSpec};
use setinc_cli::{builders, load, parse_vector, parse_vectors, read_json_arg, CliError, ProblemFile};
use setinc_core::instances;

/// Solve and audit set inclusions F(x) ⊆ C.
#[derive(Parser)]
#[command(name = "setinc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RestrictionArg {
    Full,
    Cone,
}

#[derive(Args)]
struct Common {
    /// Builtin instance name (i1, i2, i2-fan, i3, i3-cone, i4) or problem file path.
    problem: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// "a,b" for [a, b]^n, or "l1,..,ln:u1,..,un".
    #[arg(long, allow_hyphen_values = true)]
    region: Option<String>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_enum)]
    restriction: Option<RestrictionArg>,
}

impl Common {
    fn options(&self) -> Options {
        Options {
            seed: self.seed,
            tol: self.tol,
            samples: self.samples,
            region: self.region.clone(),
            tau: self.tau,
            restriction: self.restriction.map(|r| match r {
                RestrictionArg::Full => Restriction::Full,
                RestrictionArg::Cone => Restriction::Cone,
            }),
            ..Options::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Merit value, witnesses, subgradient and a sampled dual cross-check.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Polyak subgradient solve.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long)]
        max_iter: Option<usize>,
        /// CSV trace with columns iter, nu, step, slope.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Certify F(x) ⊆ C by generator containment.
    Certify {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Estimate the error-bound constant, then audit dist(x, Solv) ≤ ν(x)/τ.
    Audit {
        #[command(flatten)]
        common: Common,
    },
    /// Tangent-cone verdicts at a solution.
    Tangent {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Directions separated by ';', e.g. "1,0;-1,2".
        #[arg(long, allow_hyphen_values = true)]
        dirs: Option<String>,
    },
    /// Check an operator fan as an outer prederivative at x0.
    Prederiv {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        /// JSON list of row-major matrices (inline or file); defaults to the map's own fan.
        #[arg(long)]
        fan: Option<String>,
    },
    /// Bconst and flat of an operator fan, compared with the sampled slope.
    Bconst {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        fan: Option<String>,
    },
    /// Dual and primal Banach constants of a matrix.
    Banach {
        /// Row-major JSON matrix, e.g. "[[1,0],[0,3]]".
        #[arg(long)]
        matrix: String,
    },
    /// Problem file for a robust constraint P(ω)x ∈ C over finitely many scenarios.
    BuildRobust {
        /// JSON list of row-major scenario matrices.
        #[arg(long)]
        scenarios: String,
        /// JSON target, e.g. {"kind":"box","lower":[-1],"upper":[1]}.
        #[arg(long)]
        target: String,
    },
    /// Problem file for the ideal point of f(R) with linear f.
    BuildIdeal {
        /// JSON list of points.
        #[arg(long)]
        points: String,
        /// Row-major JSON objective matrix; identity when omitted.
        #[arg(long)]
        objective: Option<String>,
    },
    /// Print a builtin instance as a problem file.
    Show { name: String },
}

fn run(cli: Cli) -> Result<String, CliError> {
    let report = match cli.command {
        Command::Eval { common, x } => commands::eval(&load(&common.problem)?, &parse_vector(&x)?, &common.options())?,
        Command::Solve { common, x0, max_iter, trace } => {
            let opts = Options { max_iter, trace, ..common.options() };
            commands::run_solve(&load(&common.problem)?, &parse_vector(&x0)?, &opts)?
        }
        Command::Certify { common, x } => {
            commands::certify(&load(&common.problem)?, &parse_vector(&x)?, &common.options())?
        }
        Command::Audit { common } => commands::audit(&load(&common.problem)?, &common.options())?,
        Command::Tangent { common, x, dirs } => {
            let dirs = dirs.as_deref().map(parse_vectors).transpose()?;
            commands::tangent(&load(&common.problem)?, &parse_vector(&x)?, dirs, &common.options())?
        }
        Command::Prederiv { common, x0, fan } => {
            let fan = fan.as_deref().map(read_matrices).transpose()?;
            commands::prederiv(&load(&common.problem)?, &parse_vector(&x0)?, fan, &common.options())?
        }
        Command::Bconst { common, fan } => {
            let fan = fan.as_deref().map(read_matrices).transpose()?;
            commands::run_bconst(&load(&common.problem)?, fan, &common.options())?
        }
        Command::Banach { matrix } => commands::banach(&matrix_from_rows(&read_json_arg::<Rows>(&matrix)?)?)?,
        Command::BuildRobust { scenarios, target } => {
            let target: TargetSpec = read_json_arg(&target)?;
            return Ok(builders::build_robust(read_matrices(&scenarios)?, &target)?.to_json() + "\n");
        }
        Command::BuildIdeal { points, objective } => {
            let points: Rows = read_json_arg(&points)?;
            let points: Vec<_> = points.iter().map(|p| setinc_core::Vector::from_column_slice(p)).collect();
            let n = points.first().map_or(0, |p| p.len());
            let objective = match objective {
                Some(o) => matrix_from_rows(&read_json_arg(&o)?)?,
                None => setinc_core::Matrix::identity(n, n),
            };
            return Ok(builders::build_ideal(&points, &objective)?.to_json() + "\n");
        }
        Command::Show { name } => {
            let inst = instances::by_name(&name)
                .ok_or_else(|| CliError::Parse(format!("unknown builtin {name:?}")))?;
            return Ok(ProblemFile::from_instance(&inst).to_json() + "\n");
        }
    };
    Ok(report.to_json())
}

fn read_matrices(arg: &str) -> Result<Vec<setinc_core::Matrix>, CliError> {
    let list: Vec<Rows> = read_json_arg(arg)?;
    list.iter().map(matrix_from_rows).collect()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("UsageError: {e}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}: {e}", e.category());
            ExitCode::from(1)
        }
    }
}
