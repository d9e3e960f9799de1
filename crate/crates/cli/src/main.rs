//! `qcspectra`: bounds, quasidisc constants, Jacobian norms, eigenvalues and
//! verification runs from the command line.
//!
//! Every run prints its JSON document to stdout and writes it to
//! `<out-dir>/<name>.json`; `--csv`, `--svg` and `--mesh` add further files.
//! Exit status: 0 success or pass, 1 verification failure, 2 usage or
//! parameter error, 3 numerical failure or non-convergence.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qcspectra::bounds::Beta;
use qcspectra::MapDescriptor;
use serde_json::json;

use config::{CommandKind, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Success,
    VerificationFailed,
    NotConverged,
}

impl ExitKind {
    fn code(self) -> u8 {
        match self {
            ExitKind::Success => 0,
            ExitKind::VerificationFailed => 1,
            ExitKind::NotConverged => 3,
        }
    }
}

/// A failure reported as a single diagnostic line.
#[derive(Debug)]
pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            message: config::one_line(&message.into()),
            code: 2,
        }
    }

    pub fn io(e: impl std::fmt::Display) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<qcspectra::Error> for CliError {
    fn from(e: qcspectra::Error) -> Self {
        use qcspectra::Error as E;
        let code = match e {
            E::Parameter(_) | E::Parse(_) | E::OutsideDisc(_) => 2,
            _ => 3,
        };
        CliError {
            message: config::one_line(&e.to_string()),
            code,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "qcspectra", version, about = "Neumann p-Laplacian eigenvalue bounds on quasiconformal images of the disc")]
struct Cli {
    /// Load the run from a TOML config file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Re-run the configuration stored in a saved JSON output.
    #[arg(long = "from-json", global = true, value_name = "FILE", conflicts_with = "config")]
    from_json: Option<PathBuf>,
    /// Output directory (default: $QCSPECTRA_OUT_DIR, else the working directory).
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Base name of the output files (default: the subcommand).
    #[arg(long, global = true)]
    name: Option<String>,
    /// Also write a flat CSV table.
    #[arg(long, global = true)]
    csv: bool,
    /// Also write an SVG plot.
    #[arg(long, global = true)]
    svg: bool,
    /// Do not echo the JSON document on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the catalog map kinds with their K and area formulas.
    Catalog,
    /// Lower bound for μ_p of a catalog domain.
    Bound {
        #[command(flatten)]
        domain: DomainArg,
        #[arg(long)]
        p: Option<f64>,
        /// Integrability exponent of the Jacobian, a number > 1 or `inf`.
        #[arg(long)]
        beta: Option<Beta>,
        /// `auto` or `intro-form`.
        #[arg(long)]
        variant: Option<String>,
        #[arg(long = "K")]
        k: Option<f64>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Quasidisc constants M_p(K), M_p*(K) and, given an area, the bound.
    Quasidisc {
        #[arg(long = "K")]
        k: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        area: Option<f64>,
        #[arg(long)]
        domain: Option<MapDescriptor>,
    },
    /// Area and L_β norm of the Jacobian of a catalog map.
    Norm {
        #[command(flatten)]
        domain: DomainArg,
        #[arg(long)]
        beta: Option<Beta>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// First non-trivial Neumann eigenvalue of the p-Laplacian.
    Eigen {
        #[command(flatten)]
        domain: DomainArg,
        #[arg(long)]
        p: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Compare a theoretical lower bound with the computed eigenvalue.
    Verify {
        #[command(flatten)]
        domain: DomainArg,
        #[arg(long)]
        p: Option<f64>,
        /// auto, inf-regular, quasidisc, beta-regular:<β>, measure-preserving[:<β|inf>], intro-form[:<β|inf>].
        #[arg(long)]
        variant: Option<String>,
        #[arg(long = "K")]
        k: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        quad: QuadArgs,
    },
}

#[derive(Args, Debug)]
struct DomainArg {
    /// Map descriptor, e.g. `identity`, `epicycloid:A=2,B=1,n=3`, `ellipse-shear:a=0.5`.
    #[arg(long)]
    domain: Option<MapDescriptor>,
}

#[derive(Args, Debug)]
struct QuadArgs {
    #[arg(long)]
    quad_radial: Option<usize>,
    #[arg(long)]
    quad_angular: Option<usize>,
}

#[derive(Args, Debug)]
struct SolverArgs {
    #[arg(long)]
    rings: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Also write the mesh and the eigenfunction as text tables.
    #[arg(long)]
    mesh: bool,
}

fn kind_of(c: &Command) -> CommandKind {
    match c {
        Command::Catalog => CommandKind::Catalog,
        Command::Bound { .. } => CommandKind::Bound,
        Command::Quasidisc { .. } => CommandKind::Quasidisc,
        Command::Norm { .. } => CommandKind::Norm,
        Command::Eigen { .. } => CommandKind::Eigen,
        Command::Verify { .. } => CommandKind::Verify,
    }
}

fn set<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

fn apply_quad(c: &mut RunConfig, q: QuadArgs) {
    if let Some(n) = q.quad_radial {
        c.quadrature.radial_nodes = n;
    }
    if let Some(n) = q.quad_angular {
        c.quadrature.angular_nodes = n;
    }
}

fn apply_solver(c: &mut RunConfig, s: SolverArgs) {
    if let Some(r) = s.rings {
        c.rings = r;
    }
    if let Some(t) = s.tol {
        c.eigen.tolerance = t;
    }
    if let Some(v) = s.seed {
        c.eigen.seed = v;
    }
    if let Some(v) = s.starts {
        c.eigen.starts = v;
    }
    if let Some(v) = s.max_iter {
        c.eigen.max_iter = v;
    }
    c.output.mesh |= s.mesh;
}

/// Loaded configuration (if any) overridden by explicit flags.
fn build_config(cli: Cli) -> Result<(RunConfig, Cli), CliError> {
    let loaded = match (&cli.config, &cli.from_json) {
        (Some(p), _) => Some(RunConfig::from_toml_file(p)?),
        (None, Some(p)) => Some(RunConfig::from_json_file(p)?),
        (None, None) => None,
    };
    let mut cli = cli;
    let command = cli.command.take();
    let mut config = match (loaded, &command) {
        (Some(c), Some(cmd)) if c.command != kind_of(cmd) => {
            return Err(CliError::usage(format!(
                "the loaded configuration is for '{}', not '{}'",
                c.command,
                kind_of(cmd)
            )))
        }
        (Some(c), _) => c,
        (None, Some(cmd)) => RunConfig::new(kind_of(cmd)),
        (None, None) => return Err(CliError::usage("a subcommand, --config or --from-json is required")),
    };
    match command {
        None | Some(Command::Catalog) => {}
        Some(Command::Bound {
            domain,
            p,
            beta,
            variant,
            k,
            quad,
        }) => {
            set(&mut config.domain, domain.domain);
            set(&mut config.p, p);
            set(&mut config.beta, beta);
            set(&mut config.variant, variant);
            set(&mut config.k, k);
            apply_quad(&mut config, quad);
        }
        Some(Command::Quasidisc { k, p, area, domain }) => {
            set(&mut config.k, k);
            set(&mut config.p, p);
            set(&mut config.area, area);
            set(&mut config.domain, domain);
        }
        Some(Command::Norm { domain, beta, quad }) => {
            set(&mut config.domain, domain.domain);
            set(&mut config.beta, beta);
            apply_quad(&mut config, quad);
        }
        Some(Command::Eigen { domain, p, solver }) => {
            set(&mut config.domain, domain.domain);
            set(&mut config.p, p);
            apply_solver(&mut config, solver);
        }
        Some(Command::Verify {
            domain,
            p,
            variant,
            k,
            solver,
            quad,
        }) => {
            set(&mut config.domain, domain.domain);
            set(&mut config.p, p);
            set(&mut config.variant, variant);
            set(&mut config.k, k);
            apply_solver(&mut config, solver);
            apply_quad(&mut config, quad);
        }
    }
    set(&mut config.output.name, cli.name.clone());
    config.output.csv |= cli.csv;
    config.output.svg |= cli.svg;
    Ok((config, cli))
}

fn execute(cli: Cli) -> Result<ExitKind, CliError> {
    let (config, cli) = build_config(cli)?;
    let outcome = commands::run(&config)?;
    let doc = json!({
        "command": config.command,
        "config": config,
        "result": outcome.result,
    });
    let text = serde_json::to_string_pretty(&doc).expect("JSON document") + "\n";
    let dir = output::output_dir(cli.out_dir.as_deref());
    let base = config.base_name();
    output::write_file(&dir, &format!("{base}.json"), &text)?;
    for a in &outcome.artifacts {
        output::write_file(&dir, &format!("{base}.{}", a.suffix), &a.contents)?;
    }
    if !cli.quiet {
        print!("{text}");
    }
    Ok(outcome.exit)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(kind) => ExitCode::from(kind.code()),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
