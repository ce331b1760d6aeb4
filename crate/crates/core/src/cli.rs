//! Command-line entry points.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::functionals::DiagnosticsRow;
use crate::io::{self, load_config, read_state, sibling_paths, simulate, RunConfig, RunSummary};
use crate::model::{Kinetics, Params, SigmaSpec};
use crate::verify::{
    apriori_bounds_suite, bundled_scenario, bundled_scenarios, default_workers,
    epsilon_limit_study, inequality_suite, load_scenarios, mms_suite, ode_oracle_check,
    run_indexed, sigma_class_suite, EpsilonStudy, MmsOptions, VerificationReport, DEFAULT_EPSILONS,
};

#[derive(Parser, Debug)]
#[command(
    name = "granuloma",
    version,
    about = "Granuloma chemotaxis simulator and verification harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate a configuration and write diagnostics and snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override the horizon of the configuration.
        #[arg(long)]
        t_end: Option<f64>,
        /// Output directory (default: from the configuration).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one verification suite or all of them.
    Verify(VerifyArgs),
    /// Manufactured-solution convergence study.
    Mms {
        #[arg(long, value_delimiter = ',', default_values_t = vec![32usize, 64, 128])]
        grids: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.02, 0.01, 0.005])]
        dts: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Run a configuration over a grid of parameter values.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `name=v1,v2,...`; repeat for a Cartesian product. Names are the
        /// seventeen constants or `epsilon`.
        #[arg(long = "set", required = true)]
        sets: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Recompute a diagnostics row from stored snapshots.
    Functionals {
        /// Either the `u` snapshot (siblings are found by name) or all four.
        #[arg(long = "snapshot", required = true, num_args = 1..=4)]
        snapshots: Vec<PathBuf>,
        /// Configuration supplying the constants and regularization.
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Suite {
    SigmaClass,
    OdeOracle,
    Inequality,
    AprioriBounds,
    EpsilonLimit,
    Mms,
    All,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    /// Bundled scenario name, a configuration file, or a directory of them.
    /// Repeatable; defaults to the bundled catalog.
    #[arg(long)]
    pub scenario: Vec<String>,
    /// Write the reports as JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Parses `args` and runs the command; the return value is the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Simulate { config, t_end, out } => {
            let mut cfg = load_config(&config)?;
            if let Some(t) = t_end {
                cfg.time.t_end = t;
                cfg.validate()?;
            }
            let name = config
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            let dir = out.unwrap_or_else(|| cfg.output.resolve_directory(&name));
            let summary = simulate(&cfg, &dir)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&summary).expect("summary serializes")
            );
            Ok(true)
        }
        Command::Verify(args) => verify(args),
        Command::Mms {
            grids,
            dts,
            dim,
            summary,
        } => {
            let opts = MmsOptions {
                grids,
                dim,
                dts,
                ..MmsOptions::default()
            };
            let report = mms_suite(&opts);
            finish(&[report], summary.as_deref())
        }
        Command::Sweep {
            config,
            sets,
            out,
            jobs,
        } => {
            let cfg = load_config(&config)?;
            sweep(&cfg, &sets, &out, jobs.unwrap_or_else(default_workers))
        }
        Command::Functionals { snapshots, config } => {
            let cfg = load_config(&config)?;
            let paths: [PathBuf; 4] = match snapshots.len() {
                1 => sibling_paths(&snapshots[0])?,
                4 => [0, 1, 2, 3].map(|i| snapshots[i].clone()),
                n => {
                    return Err(Error::validation(
                        "snapshot",
                        format!("expected 1 or 4 paths, got {n}"),
                    ))
                }
            };
            let (state, grid) = read_state(&paths)?;
            let row = DiagnosticsRow::compute(&state, &cfg.params, cfg.regularization, &grid, 0.0)?;
            println!("{}", io::header_line());
            println!("{}", io::format_row(&row));
            Ok(true)
        }
    }
}

fn resolve_scenarios(specs: &[String]) -> Result<Vec<(String, RunConfig)>> {
    if specs.is_empty() {
        return Ok(bundled_scenarios());
    }
    let mut out = Vec::new();
    for spec in specs {
        let path = Path::new(spec);
        if path.is_dir() {
            out.extend(load_scenarios(path)?);
        } else if path.is_file() {
            let name = path
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            out.push((name, load_config(path)?));
        } else {
            out.push((spec.clone(), bundled_scenario(spec)?));
        }
    }
    Ok(out)
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let workers = args.jobs.unwrap_or_else(default_workers);
    let wants = |s: Suite| args.suite == s || args.suite == Suite::All;
    let mut reports = Vec::new();
    if wants(Suite::SigmaClass) {
        reports.push(sigma_class_suite(&[0.01, 0.1, 0.5]));
    }
    if wants(Suite::OdeOracle) {
        reports.push(ode_oracle_check(
            &Params::unit(),
            Kinetics::Identity,
            [1.0; 4],
            5.0,
            1e-3,
        ));
    }
    if wants(Suite::Inequality) {
        reports.push(inequality_suite(&[64, 128]));
    }
    if wants(Suite::AprioriBounds) {
        let scenarios = resolve_scenarios(&args.scenario)?;
        reports.push(apriori_bounds_suite(&scenarios, workers));
    }
    if wants(Suite::EpsilonLimit) {
        let cfg = match args.scenario.first() {
            Some(_) => resolve_scenarios(&args.scenario[..1])?.remove(0).1,
            None => bundled_scenario("epsilon_limit")?,
        };
        let mut study = EpsilonStudy::from_config(&cfg, &DEFAULT_EPSILONS)?;
        study.workers = workers;
        reports.push(epsilon_limit_study(&study));
    }
    if wants(Suite::Mms) {
        reports.push(mms_suite(&MmsOptions::default()));
    }
    finish(&reports, args.summary.as_deref())
}

fn finish(reports: &[VerificationReport], summary: Option<&Path>) -> Result<bool> {
    for r in reports {
        print!("{}", r.render_text());
    }
    if let Some(path) = summary {
        let json = serde_json::to_string_pretty(reports).expect("reports serialize");
        fs::write(path, json).map_err(|e| Error::io(path, e))?;
    }
    Ok(reports.iter().all(VerificationReport::passed))
}

/// `name=v1,v2,...` into a name and its values.
fn parse_set(spec: &str) -> Result<(String, Vec<f64>)> {
    let (name, values) = spec.split_once('=').ok_or_else(|| {
        Error::validation("set", format!("expected name=v1,v2,..., got {spec:?}"))
    })?;
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::validation(name, format!("not a number: {v:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::validation(name, "no values"));
    }
    Ok((name.trim().to_string(), values))
}

fn apply_setting(cfg: &mut RunConfig, name: &str, value: f64) -> Result<()> {
    if name == "epsilon" {
        cfg.regularization = SigmaSpec::mollified(value)?;
        Ok(())
    } else {
        cfg.params.set(name, value)
    }
}

/// Cartesian product of the settings, last axis fastest.
fn sweep_points(axes: &[(String, Vec<f64>)]) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for (_, values) in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    points
}

fn sweep(base: &RunConfig, sets: &[String], out: &Path, workers: usize) -> Result<bool> {
    let axes = sets
        .iter()
        .map(|s| parse_set(s))
        .collect::<Result<Vec<_>>>()?;
    let points = sweep_points(&axes);
    let mut configs = Vec::new();
    for values in &points {
        let mut cfg = base.clone();
        for ((name, _), v) in axes.iter().zip(values) {
            apply_setting(&mut cfg, name, *v)?;
        }
        cfg.validate()?;
        configs.push(cfg);
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let jobs: Vec<_> = configs
        .iter()
        .enumerate()
        .map(|(k, cfg)| {
            let dir = out.join(format!("point_{k:04}"));
            move || simulate(cfg, &dir)
        })
        .collect();
    let results: Vec<Result<RunSummary>> = run_indexed(jobs, workers);

    let mut index = String::from("point");
    for (name, _) in &axes {
        write!(index, ",{name}").unwrap();
    }
    index.push_str(",status,final_t,steps,mass_u,mass_v,mass_w,mass_z\n");
    let mut all_ok = true;
    for (k, (values, result)) in points.iter().zip(&results).enumerate() {
        write!(index, "point_{k:04}").unwrap();
        for v in values {
            write!(index, ",{v:.16e}").unwrap();
        }
        match result {
            Ok(s) => {
                write!(index, ",ok,{:.16e},{}", s.final_t, s.steps).unwrap();
                for m in s.mass_final {
                    write!(index, ",{m:.16e}").unwrap();
                }
            }
            Err(e) => {
                all_ok = false;
                eprintln!("point_{k:04}: {e}");
                index.push_str(",failed,,,,,,");
            }
        }
        index.push('\n');
    }
    let path = out.join("index.csv");
    fs::write(&path, index).map_err(|e| Error::io(&path, e))?;
    println!("{} points written to {}", points.len(), out.display());
    Ok(all_ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_specs_parse() {
        assert_eq!(
            parse_set("chi_u=1,2.5").unwrap(),
            ("chi_u".into(), vec![1.0, 2.5])
        );
        assert!(parse_set("chi_u").is_err());
        assert!(parse_set("chi_u=a").is_err());
    }

    #[test]
    fn cartesian_product_order() {
        let axes = vec![
            ("a".to_string(), vec![1.0, 2.0]),
            ("b".to_string(), vec![3.0, 4.0, 5.0]),
        ];
        let p = sweep_points(&axes);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![1.0, 3.0]);
        assert_eq!(p[1], vec![1.0, 4.0]);
        assert_eq!(p[5], vec![2.0, 5.0]);
    }

    #[test]
    fn usage_errors_exit_nonzero() {
        assert_ne!(run(["granuloma", "bogus"]), 0);
        assert_ne!(run(["granuloma", "verify", "--suite", "nope"]), 0);
    }

    #[test]
    fn sigma_suite_exits_zero() {
        assert_eq!(run(["granuloma", "verify", "--suite", "sigma_class"]), 0);
    }
}
