use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sps_cli::config::{parse_config, ParsedConfig};
use sps_cli::emit::{emit, write_table, Format, Row};
use sps_cli::sweep::{evaluate, run_sweep, SweepPoint};
use sps_cli::verify::{self, VerifyOptions};
use sps_core::chart::{boundary_g2, boundary_gn};
use sps_core::dynamics::{
    emission_spectrum, solve_adaptive, two_time_g2, AdaptiveOptions, BuildOptions, SpectrumOptions, SteadySolution,
};
use sps_core::hilbert::{fock_annihilation, tls_lowering};
use sps_core::observables::{reduced_density_matrix, wigner, Mode};

#[derive(Parser)]
#[command(name = "sps", version, about = "Single-photon sources exciting a harmonic oscillator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// `key=value` system description.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: Format,
    /// Worker threads for sweeps; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Field {
    Source,
    Target,
}

#[derive(Subcommand)]
enum Command {
    /// Observables of the steady state of `--config`.
    Steady,
    /// Observables over the `sweep.*` grid of `--config`.
    Sweep,
    /// Incoherent emission spectrum, in the laser frame.
    Spectrum {
        #[arg(long, value_enum, default_value = "source")]
        of: Field,
        #[arg(long, default_value_t = 10.0)]
        omega_max: f64,
        #[arg(long, default_value_t = 801)]
        points: usize,
    },
    /// Two-time correlation `g⁽²⁾(τ)`.
    G2tau {
        #[arg(long, value_enum, default_value = "target")]
        of: Field,
        #[arg(long, default_value_t = 10.0)]
        tau_max: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Wigner function of the target on a square grid.
    Wigner {
        #[arg(long, default_value_t = 4.0)]
        half_width: f64,
        #[arg(long, default_value_t = 81)]
        points: usize,
    },
    /// Lowest `g⁽²⁾` and `g⁽³⁾` allowed at each population.
    Chart {
        #[arg(long, default_value_t = 6.0)]
        n_a_max: f64,
        #[arg(long, default_value_t = 121)]
        points: usize,
    },
    /// Runs the acceptance criteria and prints one line per criterion.
    Verify {
        /// A suite name or a comma list of criterion numbers.
        #[arg(long)]
        only: Option<String>,
        /// Scales the cascaded cross term; anything but 1 is a wrong model.
        #[arg(long, default_value_t = 1.0)]
        mutate_cross_term: f64,
    },
}

enum Failure {
    Usage(String),
    Config(String),
    Run(String),
    Verification,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Run(_) => 1,
            Failure::Config(_) => 2,
            Failure::Verification => 3,
        }
    }
}

fn run_err(e: impl std::fmt::Display) -> Failure {
    Failure::Run(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("usage error: {m}"),
                Failure::Config(m) => eprintln!("config error: {m}"),
                Failure::Run(m) => eprintln!("error: {m}"),
                Failure::Verification => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn load(cli: &Cli) -> Result<ParsedConfig, Failure> {
    let path = cli.config.as_ref().ok_or_else(|| Failure::Usage("--config is required".into()))?;
    parse_config(path).map_err(|e| Failure::Config(e.to_string()))
}

fn output(cli: &Cli) -> Result<Box<dyn Write>, Failure> {
    match &cli.out {
        Some(p) => File::create(p)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| Failure::Run(format!("cannot write {}: {e}", p.display()))),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, Failure> {
    if points < 2 || !(hi > lo) {
        return Err(Failure::Usage(format!("need at least 2 points on a nonempty range, got {points} on [{lo}, {hi}]")));
    }
    Ok((0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect())
}

fn steady(cli: &Cli) -> Result<SteadySolution, Failure> {
    solve_adaptive(&load(cli)?.system).map_err(run_err)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Steady => {
            let config = load(cli)?.system;
            let point = SweepPoint {
                param1: f64::NAN,
                param2: None,
                outcome: evaluate(&config, AdaptiveOptions::default()),
            };
            let row = Row {
                param1: None,
                ..Row::from_point(&point)
            };
            emit(&[row], cli.format, output(cli)?).map_err(run_err)
        }
        Command::Sweep => {
            let plan = load(cli)?
                .sweep
                .ok_or_else(|| Failure::Config("no sweep.* keys in the configuration".into()))?;
            let points = run_sweep(&plan, cli.jobs, AdaptiveOptions::default()).map_err(run_err)?;
            let rows: Vec<Row> = points.iter().map(Row::from_point).collect();
            emit(&rows, cli.format, output(cli)?).map_err(run_err)
        }
        Command::Spectrum { of, omega_max, points } => {
            let sol = steady(cli)?;
            let spec = sol.liouvillian.spec();
            let c = match of {
                Field::Source => tls_lowering(spec),
                Field::Target => fock_annihilation(spec),
            };
            let omega = grid(-omega_max, *omega_max, *points)?;
            let opts = SpectrumOptions::for_rates(sol.config.gamma_sigma, sol.config.gamma_a, *omega_max);
            let s = emission_spectrum(&sol.liouvillian, &sol.rho, &c, &omega, opts).map_err(run_err)?;
            eprintln!("coherent weight {}, population {}", s.coherent_weight, s.population);
            let rows: Vec<Vec<f64>> = s.omega.iter().zip(&s.density).map(|(&w, &d)| vec![w, d]).collect();
            write_table(&["omega", "density"], &rows, cli.format, output(cli)?).map_err(run_err)
        }
        Command::G2tau { of, tau_max, points } => {
            let sol = steady(cli)?;
            let spec = sol.liouvillian.spec();
            let c = match of {
                Field::Source => tls_lowering(spec),
                Field::Target => fock_annihilation(spec),
            };
            let tau = grid(0.0, *tau_max, *points)?;
            let g = two_time_g2(&sol.liouvillian, &sol.rho, &c, &tau).map_err(run_err)?;
            let rows: Vec<Vec<f64>> = tau.iter().zip(&g).map(|(&t, &v)| vec![t, v]).collect();
            write_table(&["tau", "g2"], &rows, cli.format, output(cli)?).map_err(run_err)
        }
        Command::Wigner { half_width, points } => {
            let sol = steady(cli)?;
            let rho = reduced_density_matrix(&sol.rho, Mode::Target).map_err(run_err)?;
            let axis = grid(-half_width, *half_width, *points)?;
            let w = wigner(&rho, &axis, &axis).map_err(run_err)?;
            eprintln!("integrated W over the grid {}", w.norm);
            let rows: Vec<Vec<f64>> = w
                .values
                .indexed_iter()
                .map(|((i, j), &v)| vec![w.x[i], w.p[j], v])
                .collect();
            write_table(&["x", "p", "w"], &rows, cli.format, output(cli)?).map_err(run_err)
        }
        Command::Chart { n_a_max, points } => {
            let n = grid(0.0, *n_a_max, *points + 1)?;
            let rows: Result<Vec<Vec<f64>>, _> = n[1..]
                .iter()
                .map(|&x| Ok::<_, sps_core::Error>(vec![x, boundary_g2(x)?, boundary_gn(3, x)?]))
                .collect();
            write_table(&["n_a", "g2_min", "g3_min"], &rows.map_err(run_err)?, cli.format, output(cli)?)
                .map_err(run_err)
        }
        Command::Verify { only, mutate_cross_term } => {
            let options = VerifyOptions {
                build: BuildOptions {
                    cross_term_scale: *mutate_cross_term,
                },
            };
            let mut out = output(cli)?;
            let results = verify::run(only.as_deref(), &options, |r| {
                let _ = writeln!(out, "{}", r.line());
                let _ = out.flush();
            })
            .map_err(Failure::Usage)?;
            let failed = results.iter().filter(|r| !r.passed).count();
            writeln!(out, "{} passed, {failed} failed", results.len() - failed).map_err(run_err)?;
            if failed > 0 {
                Err(Failure::Verification)
            } else {
                Ok(())
            }
        }
    }
}
