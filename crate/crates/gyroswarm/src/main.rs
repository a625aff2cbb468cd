use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gyroswarm::config::{emit_canonical, parse_config};
use gyroswarm::equilibria::{
    classify, equilibrium_family, helix_geometry, is_shape_equilibrium, rectilinear_equilibrium,
    twist_from_polar, EquilibriumSpec, FormationClass,
};
use gyroswarm::error::Error;
use gyroswarm::harness::{sweep, RunReport, SweepGrid};
use gyroswarm::laws::LawKind;
use gyroswarm::lie::Vec3;
use gyroswarm::output::{plot_svg, write_report_json, write_trajectory_csv};
use gyroswarm::verify::{algebra_suite, all_suites, circ_suite, rect_suite};

#[derive(Parser)]
#[command(
    name = "gyroswarm",
    about = "Unit-speed vehicle formation simulator on SE(3)",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a config file and write its outputs.
    Simulate {
        /// Path to a TOML scenario config.
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Print the canonical form of the parsed config and exit.
        #[arg(long)]
        print_canonical: bool,
    },
    /// Construct a relative equilibrium, classify it, and report geometry.
    Equilibria(EquilibriaArgs),
    /// Run the sampled verification suites.
    Verify {
        /// Which suite: rect, circ, algebra, or all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Samples per pure-inequality property.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a grid of scenarios and print aggregate convergence statistics.
    Sweep {
        /// Path to a TOML grid config.
        grid: PathBuf,
        /// Optional directory for per-cell JSON reports.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct EquilibriaArgs {
    #[arg(long, default_value_t = 0.0)]
    w: f64,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    #[arg(long, default_value_t = 0.0)]
    psi1: f64,
    #[arg(long, default_value_t = 0.0)]
    psi2: f64,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    #[arg(long, default_value_t = 0.0)]
    b3: f64,
    /// File with one spec per line: w a psi1 psi2 theta b3.
    #[arg(long)]
    sweep: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage and parse problems are validation errors (exit 1);
            // --help and --version print normally.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidParams(_) | Error::InvalidFrame(_) => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> gyroswarm::Result<ExitCode> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            print_canonical,
        } => simulate(&config, &out, print_canonical),
        Command::Equilibria(args) => equilibria(&args),
        Command::Verify {
            suite,
            samples,
            seed,
        } => verify(&suite, samples, seed),
        Command::Sweep { grid, out } => run_sweep(&grid, out.as_deref()),
    }
}

fn simulate(
    config_path: &Path,
    out_dir: &Path,
    print_canonical: bool,
) -> gyroswarm::Result<ExitCode> {
    let text = fs::read_to_string(config_path).map_err(|source| Error::Io {
        path: config_path.to_path_buf(),
        source,
    })?;
    let cfg = parse_config(&text)?;
    if print_canonical {
        print!("{}", emit_canonical(&cfg)?);
        return Ok(ExitCode::SUCCESS);
    }

    fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;

    let (trajectory, report) = gyroswarm::harness::run_scenario(&cfg.scenario)?;

    let prefix = &cfg.output.prefix;
    if cfg.output.csv {
        let path = out_dir.join(format!("{prefix}.csv"));
        write_trajectory_csv(&trajectory, &path)?;
        println!("wrote {}", path.display());
    }
    if cfg.output.json {
        let path = out_dir.join(format!("{prefix}.json"));
        write_report_json(&report, &path)?;
        println!("wrote {}", path.display());
    }
    if let Some(plane) = &cfg.output.svg {
        let path = out_dir.join(format!("{prefix}.svg"));
        plot_svg(&trajectory, plane, &path)?;
        println!("wrote {}", path.display());
    }

    print_report_summary(&report);
    Ok(ExitCode::SUCCESS)
}

fn print_report_summary(report: &RunReport) {
    println!(
        "converged: {} | class: {:?} | final separation: {:.6} m | min separation: {:.6} m | max V increase: {:.3e} | misalignment: {:.3e} | wall time: {:.2} s",
        report.converged,
        report.terminal_class,
        report.final_separation,
        report.min_separation,
        report.max_lyapunov_increase,
        report.alignment_metric,
        report.wall_time,
    );
}

fn equilibria(args: &EquilibriaArgs) -> gyroswarm::Result<ExitCode> {
    println!(
        "{:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>14} {:>10} {:>10} {:>12}",
        "w", "a", "psi1", "psi2", "theta", "b3", "class", "radius", "pitch", "residual"
    );
    let specs = match &args.sweep {
        None => vec![EquilibriumSpec {
            w: args.w,
            a: args.a,
            psi1: args.psi1,
            psi2: args.psi2,
            theta: args.theta,
            b3: args.b3,
        }],
        Some(path) => parse_spec_file(path)?,
    };
    for spec in specs {
        print_equilibrium_row(&spec)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_spec_file(path: &Path) -> gyroswarm::Result<Vec<EquilibriumSpec>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut specs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        if fields.len() != 6 {
            return Err(Error::Config(format!(
                "line {}: expected 6 fields (w a psi1 psi2 theta b3), got {}",
                lineno + 1,
                fields.len()
            )));
        }
        specs.push(EquilibriumSpec {
            w: fields[0],
            a: fields[1],
            psi1: fields[2],
            psi2: fields[3],
            theta: fields[4],
            b3: fields[5],
        });
    }
    Ok(specs)
}

fn print_equilibrium_row(spec: &EquilibriumSpec) -> gyroswarm::Result<()> {
    let class = classify(spec.w, spec.a);
    let g = if class == FormationClass::Rectilinear {
        rectilinear_equilibrium(spec.theta, &Vec3::new(0.0, 0.0, spec.b3))
    } else {
        equilibrium_family(spec)?
    };
    let xi1 = twist_from_polar(spec.w, spec.a, spec.psi1);
    let xi2 = twist_from_polar(spec.w, spec.a, spec.psi2);
    let (_, residual) = is_shape_equilibrium(&g, &xi1, &xi2, 1e-12);
    let (radius, pitch) = match helix_geometry(spec.w, spec.a) {
        Ok(h) => (format!("{:.6}", h.radius), format!("{:.6}", h.pitch_rate)),
        Err(_) => ("-".into(), "-".into()),
    };
    println!(
        "{:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>14} {:>10} {:>10} {:>12.3e}",
        spec.w,
        spec.a,
        spec.psi1,
        spec.psi2,
        spec.theta,
        spec.b3,
        format!("{class:?}"),
        radius,
        pitch,
        residual
    );
    Ok(())
}

fn verify(suite: &str, samples: usize, seed: u64) -> gyroswarm::Result<ExitCode> {
    let reports = match suite {
        "rect" => rect_suite(seed, samples),
        "circ" => circ_suite(seed, samples),
        "algebra" => algebra_suite(seed, samples),
        "all" => all_suites(seed, samples),
        other => {
            return Err(Error::Config(format!(
                "unknown suite {other:?}; expected rect, circ, algebra, or all"
            )))
        }
    };
    let mut failed = 0usize;
    for r in &reports {
        println!(
            "[{}] {:<40} samples={:<8} worst={:>10.3e} threshold={:>8.0e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.samples,
            r.worst,
            r.threshold
        );
        if !r.pass {
            failed += 1;
        }
    }
    println!(
        "suite {suite}: {}/{} properties passed",
        reports.len() - failed,
        reports.len()
    );
    if failed == 0 {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(2))
    }
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDoc {
    grid: GridSection,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    kind: String,
    alpha: Vec<f64>,
    r0: Vec<f64>,
    mu: Vec<f64>,
    eta: Vec<f64>,
    sign: Vec<f64>,
    seeds: Vec<u64>,
    #[serde(default = "default_n")]
    n: usize,
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default = "default_t_final")]
    t_final: f64,
    #[serde(default = "default_sample_every")]
    sample_every: usize,
}

fn default_n() -> usize {
    2
}
fn default_dt() -> f64 {
    1e-3
}
fn default_t_final() -> f64 {
    100.0
}
fn default_sample_every() -> usize {
    10
}

fn run_sweep(grid_path: &Path, out_dir: Option<&Path>) -> gyroswarm::Result<ExitCode> {
    let text = fs::read_to_string(grid_path).map_err(|source| Error::Io {
        path: grid_path.to_path_buf(),
        source,
    })?;
    let doc: GridDoc = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    let kind = match doc.grid.kind.as_str() {
        "rectilinear" => LawKind::Rectilinear,
        "circling" => LawKind::Circling,
        "none" => LawKind::None,
        other => {
            return Err(Error::Config(format!(
                "unknown law kind {other:?}; expected rectilinear, circling, or none"
            )))
        }
    };
    let grid = SweepGrid {
        kind,
        alphas: doc.grid.alpha,
        r0s: doc.grid.r0,
        mus: doc.grid.mu,
        etas: doc.grid.eta,
        signs: doc.grid.sign,
        seeds: doc.grid.seeds,
        n: doc.grid.n,
        dt: doc.grid.dt,
        t_final: doc.grid.t_final,
        sample_every: doc.grid.sample_every,
    };
    let result = sweep(&grid)?;

    println!(
        "{:>6} {:>6} {:>6} {:>6} {:>5} {:>6} {:>10} {:>22} {:>12} {:>12}",
        "alpha", "r0", "mu", "eta", "sign", "seed", "converged", "class", "final sep", "min sep"
    );
    for (idx, (cell, outcome)) in result.rows.iter().enumerate() {
        match outcome {
            Ok(report) => {
                println!(
                    "{:>6.2} {:>6.2} {:>6.2} {:>6.2} {:>5} {:>6} {:>10} {:>22} {:>12.6} {:>12.6}",
                    cell.law.alpha,
                    cell.law.r0,
                    cell.law.mu,
                    cell.law.eta,
                    cell.law.sign,
                    cell.seed,
                    report.converged,
                    format!("{:?}", report.terminal_class),
                    report.final_separation,
                    report.min_separation,
                );
                if let Some(dir) = out_dir {
                    fs::create_dir_all(dir).map_err(|source| Error::Io {
                        path: dir.to_path_buf(),
                        source,
                    })?;
                    write_report_json(report, &dir.join(format!("cell_{idx:04}.json")))?;
                }
            }
            Err(e) => println!(
                "{:>6.2} {:>6.2} {:>6.2} {:>6.2} {:>5} {:>6} failed: {e}",
                cell.law.alpha, cell.law.r0, cell.law.mu, cell.law.eta, cell.law.sign, cell.seed,
            ),
        }
    }
    println!(
        "converged {}/{} ({:.1}%)",
        result
            .rows
            .iter()
            .filter(|(_, r)| r.as_ref().map(|r| r.converged).unwrap_or(false))
            .count(),
        result.rows.len(),
        100.0 * result.converged_fraction()
    );
    for (class, count) in result.class_counts() {
        if count > 0 {
            println!("  {class:?}: {count}");
        }
    }
    Ok(ExitCode::SUCCESS)
}
