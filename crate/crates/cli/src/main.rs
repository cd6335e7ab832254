use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use polyharm::bscroll::{CartanTrajectory, Direction, KSpec, SurfaceSample};
use polyharm::commands::{
    cmd_bscroll, cmd_check, cmd_lorentz3, cmd_p3, cmd_verify_catalog, parse_grid, CatalogReport, ChartSpec,
    CheckReport, ExpectationFile, Lorentz3Report, P3Report,
};

#[derive(Parser)]
#[command(name = "polyharm")]
#[command(about = "Numerical checks of r-harmonic hypersurfaces in pseudo-Riemannian space forms")]
#[command(version)]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write output here instead of stdout (a directory for `bscroll`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Classification tolerance
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    #[command(subcommand)]
    command: Commands,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Structured report document
    #[value(alias = "report-doc")]
    Json,
    /// Delimited text with fixed columns
    #[value(alias = "delimited-text")]
    Csv,
}

#[derive(Subcommand)]
enum Commands {
    /// Check every catalog family against its closed form and the expectations table
    VerifyCatalog {
        /// Comma separated orders r
        #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 3, 4, 5, 6, 7])]
        r: Vec<usize>,

        /// Expectations document (defaults to the bundled table)
        #[arg(long)]
        expectations: Option<PathBuf>,
    },

    /// Real roots of the product-hypersurface cubic
    P3 {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
    },

    /// Sample a chart document and classify it
    Check {
        /// Chart document (JSON)
        chart: PathBuf,
        #[arg(long)]
        r: usize,
        /// Samples per axis, e.g. 20x20
        #[arg(long, default_value = "20x20")]
        grid: String,
    },

    /// Integrate a B-scroll frame and check the surface
    Bscroll {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        /// const:v | poly:a0,a1,... | sin:amp,freq,phase
        #[arg(long, default_value = "const:1")]
        k_spec: String,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 5.0)]
        s_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Comma separated ruling parameters for the surface samples
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = vec![-0.5, 0.0, 0.5])]
        u: Vec<f64>,
        /// Integrate over [-s_max, 0]
        #[arg(long)]
        backward: bool,
    },

    /// Proper r-harmonic isoparametric surfaces of the three-dimensional Lorentz space forms
    Lorentz3 {
        #[arg(long)]
        r: usize,
    },
}

enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn outcome(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    if !(cli.tol > 0.0) {
        bail!("--tol must be positive");
    }
    match &cli.command {
        Commands::VerifyCatalog { r, expectations } => {
            let exp = match expectations {
                Some(p) => {
                    let src = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    ExpectationFile::parse(&src)?
                }
                None => ExpectationFile::bundled(),
            };
            let rep = cmd_verify_catalog(r, cli.tol, &exp)?;
            emit(cli, &rep, catalog_csv)?;
            Ok(outcome(rep.ok))
        }
        Commands::P3 { m, k, r } => {
            let rep = cmd_p3(*m, *k, *r, cli.tol)?;
            emit(cli, &rep, p3_csv)?;
            Ok(outcome(rep.ok))
        }
        Commands::Check { chart, r, grid } => {
            let src = fs::read_to_string(chart).with_context(|| format!("reading {}", chart.display()))?;
            let spec = ChartSpec::parse(&src)?;
            let dim = spec.build()?.dim();
            let rep = cmd_check(&spec, *r, &parse_grid(grid, dim)?, cli.tol)?;
            emit(cli, &rep, check_csv)?;
            Ok(outcome(rep.ok))
        }
        Commands::Bscroll {
            lambda,
            k_spec,
            r,
            s_max,
            step,
            u,
            backward,
        } => {
            let k: KSpec = k_spec.parse()?;
            let direction = if *backward {
                Direction::Backward
            } else {
                Direction::Forward
            };
            let run = cmd_bscroll(*lambda, &k, *r, *s_max, *step, u, direction, cli.tol)?;
            if let Some(dir) = &cli.out {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                fs::write(dir.join("report.json"), to_json(&run.report)?)?;
                fs::write(dir.join("trajectory.csv"), trajectory_csv(&run.trajectory)?)?;
                fs::write(dir.join("surface.csv"), surface_csv(&run.samples)?)?;
            }
            let text = match cli.format {
                Format::Json => to_json(&run.report)?,
                Format::Csv => surface_csv(&run.samples)?,
            };
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(outcome(run.report.ok))
        }
        Commands::Lorentz3 { r } => {
            let rep = cmd_lorentz3(*r, cli.tol)?;
            emit(cli, &rep, lorentz3_csv)?;
            Ok(outcome(rep.ok))
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn emit<T: serde::Serialize>(cli: &Cli, rep: &T, csv_of: fn(&T) -> Result<String>) -> Result<()> {
    let text = match cli.format {
        Format::Json => to_json(rep)?,
        Format::Csv => csv_of(rep)?,
    };
    match &cli.out {
        Some(p) => write_file(p, &text),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn write_file(p: &Path, text: &str) -> Result<()> {
    if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(p, text).with_context(|| format!("writing {}", p.display()))
}

fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Shortest round-trip representation.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn verdict_name<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn catalog_csv(rep: &CatalogReport) -> Result<String> {
    table(
        &["id", "r", "expected", "closed_form", "numeric", "residual_main", "passed"],
        rep.expectations.iter().map(|e| {
            vec![
                e.id.clone(),
                e.r.to_string(),
                verdict_name(&e.expected),
                verdict_name(&e.closed_form.verdict),
                verdict_name(&e.numeric.verdict),
                num(e.closed_form.residual_main),
                e.passed.to_string(),
            ]
        }),
    )
}

fn p3_csv(rep: &P3Report) -> Result<String> {
    table(
        &["root", "multiplicity", "admissible", "minimal", "residual"],
        rep.roots.iter().map(|p| {
            vec![
                num(p.root),
                p.multiplicity.to_string(),
                p.admissible.to_string(),
                p.minimal.to_string(),
                num(p.residual),
            ]
        }),
    )
}

fn check_csv(rep: &CheckReport) -> Result<String> {
    let (fs_, ts) = (rep.f_range, rep.tr_a2_range);
    table(
        &[
            "r", "samples", "epsilon", "f_min", "f_max", "tr_a2_min", "tr_a2_max", "verdict", "residual_main",
            "field_scalar_max", "field_vector_max", "ok",
        ],
        [vec![
            rep.r.to_string(),
            rep.samples.to_string(),
            num(rep.epsilon),
            num(fs_.0),
            num(fs_.1),
            num(ts.0),
            num(ts.1),
            verdict_name(&rep.harmonicity.verdict),
            num(rep.harmonicity.residual_main),
            rep.field_residuals.as_ref().map_or(String::new(), |f| num(f.max_scalar)),
            rep.field_residuals.as_ref().map_or(String::new(), |f| num(f.max_vector)),
            rep.ok.to_string(),
        ]],
    )
}

fn lorentz3_csv(rep: &Lorentz3Report) -> Result<String> {
    table(
        &["case", "description", "closed_form", "numeric", "verified"],
        rep.solutions.iter().map(|s| {
            vec![
                s.solution.case.clone(),
                s.solution.description.clone(),
                verdict_name(&s.closed_form.verdict),
                verdict_name(&s.numeric.verdict),
                s.verified.to_string(),
            ]
        }),
    )
}

/// Columns: `s, A1..A4, B1..B4, C1..C4, gamma1..gamma4, pairing_drift`.
fn trajectory_csv(t: &CartanTrajectory) -> Result<String> {
    let mut header = vec!["s".to_string()];
    for name in ["A", "B", "C", "gamma"] {
        for i in 1..=4 {
            header.push(format!("{name}{i}"));
        }
    }
    header.push("pairing_drift".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    table(
        &header,
        (0..t.len()).map(|i| {
            let x = t.frame(i);
            let mut row = vec![num(t.s[i])];
            for j in 0..4 {
                for r in &x {
                    row.push(num(r[j]));
                }
            }
            row.push(num(t.pairing_drift[i]));
            row
        }),
    )
}

/// Columns: `s, u, x1..x4, membership_residual`.
fn surface_csv(samples: &[SurfaceSample]) -> Result<String> {
    table(
        &["s", "u", "x1", "x2", "x3", "x4", "membership_residual"],
        samples.iter().map(|p| {
            let mut row = vec![num(p.s), num(p.u)];
            row.extend(p.x.iter().map(|v| num(*v)));
            row.push(num(p.membership));
            row
        }),
    )
}
