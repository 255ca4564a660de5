//! Command-line front end: single solves, refinement studies, and batch
//! regeneration of the reference convergence tables.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use fluxfem::error::{Error, Result};
use fluxfem::harness::{
    emit, load_config, run_study_1d, run_study_2d, run_study_2d_standard, ConvergenceTable,
    OutputFormat, ProblemId, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "fluxfem",
    version,
    about = "Immersed finite elements for 1D/2D elliptic interface problems with flux recovery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the 1D interface problem at one mesh size and report errors
    Solve1d(StudyArgs),
    /// Run the 1D grid-refinement study
    Study1d(StudyArgs),
    /// Solve a 2D interface problem at one mesh size and report errors
    Solve2d(StudyArgs),
    /// Run a 2D grid-refinement study
    Study2d(StudyArgs),
    /// Regenerate all reference convergence tables into a directory
    Tables(TablesArgs),
}

#[derive(Args, Default)]
struct StudyArgs {
    /// TOML study file with [[run]] sections; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem id: quartic (1D), trig or r2r4 (2D)
    #[arg(long)]
    problem: Option<String>,
    /// 1D interface position in (0, 1)
    #[arg(long)]
    alpha: Option<f64>,
    /// Diffusion coefficient on the minus side
    #[arg(long)]
    beta_minus: Option<f64>,
    /// Diffusion coefficient on the plus side
    #[arg(long)]
    beta_plus: Option<f64>,
    /// Reaction coefficient
    #[arg(long)]
    q: Option<f64>,
    /// 2D interface radius; 0 removes the interface
    #[arg(long)]
    r_gamma: Option<f64>,
    /// Tube half-width in units of h; 0 widens the tube to the whole domain
    #[arg(long)]
    eps_mult: Option<f64>,
    /// Comma-separated mesh ladder, e.g. 8,16,32,64
    #[arg(long)]
    n_list: Option<String>,
    /// Least-squares method: svd, sparse-qr, or normal-cg
    #[arg(long)]
    method: Option<String>,
    /// Output file for the rendered table
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or markdown
    #[arg(long)]
    format: Option<String>,
    /// 2D only: run the standard-FEM baseline instead of the augmented method
    #[arg(long)]
    standard: bool,
}

#[derive(Args)]
struct TablesArgs {
    /// Output directory for the table files
    #[arg(long, default_value = "tables")]
    out: PathBuf,
    /// Output format: csv or markdown
    #[arg(long, default_value = "csv")]
    format: String,
}

fn parse_n_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|part| !part.is_empty())
        .map(|part| {
            part.parse::<usize>()
                .map_err(|_| Error::Parameter(format!("invalid mesh size {part:?} in n_list")))
        })
        .collect()
}

impl StudyArgs {
    /// Applies the flag overrides on top of `config`.
    fn apply(&self, config: &mut RunConfig) -> Result<()> {
        if let Some(problem) = &self.problem {
            config.problem = problem.parse()?;
        }
        if let Some(alpha) = self.alpha {
            config.alpha = alpha;
        }
        if let Some(beta_minus) = self.beta_minus {
            config.beta_minus = beta_minus;
        }
        if let Some(beta_plus) = self.beta_plus {
            config.beta_plus = beta_plus;
        }
        if let Some(q) = self.q {
            config.q = q;
        }
        if let Some(r_gamma) = self.r_gamma {
            config.r_gamma = r_gamma;
        }
        if let Some(eps_mult) = self.eps_mult {
            config.eps_mult = eps_mult;
        }
        if let Some(n_list) = &self.n_list {
            config.n_list = parse_n_list(n_list)?;
        }
        if let Some(method) = &self.method {
            config.method = method.parse()?;
        }
        if let Some(out) = &self.out {
            config.out = Some(out.clone());
        }
        if let Some(format) = &self.format {
            config.format = format.parse()?;
        }
        Ok(())
    }

    /// The run list: every `[[run]]` of the config file with flag
    /// overrides applied, or a single run built from defaults and flags.
    fn runs(&self, default: RunConfig) -> Result<Vec<RunConfig>> {
        let mut runs = match &self.config {
            Some(path) => {
                let runs = load_config(path)?;
                if runs.is_empty() {
                    return Err(Error::Config(format!(
                        "{}: no [[run]] sections",
                        path.display()
                    )));
                }
                runs
            }
            None => vec![default],
        };
        for run in &mut runs {
            self.apply(run)?;
        }
        if runs.len() > 1 && self.out.is_some() {
            return Err(Error::Parameter(
                "--out names a single file but the config defines several runs; \
                 set per-run `out` keys in the file instead"
                    .into(),
            ));
        }
        Ok(runs)
    }
}

/// Prints the table to stdout unless the run wrote it to a file.
fn deliver(table: &ConvergenceTable, config: &RunConfig) {
    match &config.out {
        Some(path) => println!("wrote {}", path.display()),
        None => match config.format {
            OutputFormat::Csv => print!("{}", table.to_csv()),
            OutputFormat::Markdown => print!("{}", table.to_markdown()),
        },
    }
}

fn study(args: &StudyArgs, default: RunConfig, two_d: bool) -> Result<()> {
    for config in args.runs(default)? {
        let table = if !two_d {
            run_study_1d(&config)?
        } else if args.standard {
            run_study_2d_standard(&config)?
        } else {
            run_study_2d(&config)?
        };
        deliver(&table, &config);
    }
    Ok(())
}

/// Single-mesh variant: truncates the ladder to its first entry.
fn solve(args: &StudyArgs, default: RunConfig, two_d: bool) -> Result<()> {
    let mut runs = args.runs(default)?;
    let config = &mut runs[0];
    config.n_list.truncate(1);
    let table = if !two_d {
        run_study_1d(config)?
    } else if args.standard {
        run_study_2d_standard(config)?
    } else {
        run_study_2d(config)?
    };
    deliver(&table, config);
    Ok(())
}

fn tables(args: &TablesArgs) -> Result<()> {
    let format: OutputFormat = args.format.parse()?;
    let ext = match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Markdown => "md",
    };
    std::fs::create_dir_all(&args.out)?;

    let trig = |q: f64, r_gamma: f64, eps_mult: f64, ns: &[usize]| RunConfig {
        beta_minus: 100.0,
        beta_plus: 1.0,
        q,
        r_gamma,
        eps_mult,
        n_list: ns.to_vec(),
        format,
        ..RunConfig::default_2d(ProblemId::Trig)
    };
    let r2r4 = |beta_minus: f64, beta_plus: f64, eps_mult: f64, ns: &[usize]| RunConfig {
        beta_minus,
        beta_plus,
        eps_mult,
        n_list: ns.to_vec(),
        format,
        ..RunConfig::default_2d(ProblemId::R2r4)
    };

    enum Study {
        OneD,
        Augmented,
        Standard,
    }
    let full: &[usize] = &[8, 16, 32, 64, 128];
    let short: &[usize] = &[8, 16, 32, 64];
    let suite: Vec<(&str, RunConfig, Study)> = vec![
        (
            "table1",
            RunConfig {
                format,
                ..RunConfig::default()
            },
            Study::OneD,
        ),
        ("table2", trig(0.0, 0.9, 3.0, full), Study::Augmented),
        ("table3", trig(0.0, 0.9, 3.0, full), Study::Standard),
        ("table4_r09", trig(0.0, 0.9, 3.0, short), Study::Augmented),
        ("table4_r099", trig(0.0, 0.99, 3.0, short), Study::Augmented),
        ("table4_r0", trig(0.0, 0.0, 0.0, short), Study::Augmented),
        ("table5", trig(1.0, 0.9, 3.0, full), Study::Augmented),
        (
            "table6_eps3h",
            r2r4(1.0, 1000.0, 3.0, short),
            Study::Augmented,
        ),
        (
            "table6_eps10h",
            r2r4(1.0, 1000.0, 10.0, short),
            Study::Augmented,
        ),
        (
            "table6_whole",
            r2r4(1.0, 1000.0, 0.0, short),
            Study::Augmented,
        ),
        (
            "table6_jump_1_1000",
            r2r4(1.0, 1000.0, 3.0, full),
            Study::Augmented,
        ),
        (
            "table6_jump_1000_1",
            r2r4(1000.0, 1.0, 3.0, full),
            Study::Augmented,
        ),
    ];

    for (name, config, study) in suite {
        let table = match study {
            Study::OneD => run_study_1d(&config)?,
            Study::Augmented => run_study_2d(&config)?,
            Study::Standard => run_study_2d_standard(&config)?,
        };
        let path = args.out.join(format!("{name}.{ext}"));
        emit(&table, format, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve1d(args) => solve(
            &args,
            RunConfig {
                n_list: vec![64],
                ..RunConfig::default()
            },
            false,
        ),
        Command::Study1d(args) => study(&args, RunConfig::default(), false),
        Command::Solve2d(args) => solve(
            &args,
            RunConfig {
                n_list: vec![64],
                ..RunConfig::default_2d(ProblemId::Trig)
            },
            true,
        ),
        Command::Study2d(args) => study(&args, RunConfig::default_2d(ProblemId::Trig), true),
        Command::Tables(args) => tables(&args),
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
