//! `urnkl` — exact divergences between sampling with and without
//! replacement, the closed-form bounds on them, and finite de Finetti
//! experiments, from the command line.
//!
//! Exit codes: 0 on success, 1 when `verify` finds an invariant violation,
//! 2 for usage, configuration, or I/O errors.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use urnkl::bounds::{bound_report, hm_bounds, prop12_upper, stam_bounds, thm1_upper};
use urnkl::definetti::{mixing_from_iid, monotonicity_experiment, MixingMeasure};
use urnkl::divergence::divergence_report;
use urnkl::oracle::certified_divergence;
use urnkl::urn::UrnSpec;

mod mixing;
mod output;
mod svg;
mod verify;

use output::{Cell, Table};

#[derive(Parser)]
#[command(
    name = "urnkl",
    version,
    about = "Divergences between drawing with and without replacement, their closed-form \
             bounds, and finite de Finetti experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format for tabular commands.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write the table here (atomic write-then-rename) instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads for sweeps; output is identical for any setting.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Fractional bits for certified-arithmetic paths.
    #[arg(long, global = true, value_name = "B", default_value_t = 128)]
    precision_bits: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyLevel {
    Fast,
    Full,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// Mix binomial urns: n fair-coin flips fill the urn, then draw.
    IidFairCoin,
    /// A single urn split as evenly as possible between two colours.
    PointMassBalanced,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a two-colour urn over ℓ = 1..n/2: exact divergence vs every bound.
    Figure {
        #[arg(long, default_value_t = 100)]
        n: u64,
        /// Draw count; must satisfy 1 ≤ k ≤ n/2 so all bound columns exist.
        #[arg(long, default_value_t = 30)]
        k: u64,
        /// Also render the sweep as a single-panel SVG.
        #[arg(long, value_name = "PATH")]
        plot: Option<PathBuf>,
    },
    /// Every applicable bound (and the exact value) for one urn.
    Bounds {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        /// Comma-separated colour counts, e.g. --ell 50,50.
        #[arg(long, value_delimiter = ',', required = true)]
        ell: Vec<u64>,
    },
    /// Exact relative entropy and total variation for one urn.
    Divergence {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        ell: Vec<u64>,
        /// Also compute a certified enclosure at --precision-bits.
        #[arg(long)]
        certify: bool,
    },
    /// Mixture-of-urns sweeps: the divergence chain over n and k.
    Definetti {
        /// Built-in mixing-measure family.
        #[arg(long, value_enum, conflicts_with = "model")]
        preset: Option<Preset>,
        /// Mixing-measure file: header `n c`, then `ℓ₁ … ℓ_c weight` lines.
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        k_max: u64,
        #[arg(long, default_value_t = 4)]
        n_min: u64,
        #[arg(long, default_value_t = 16)]
        n_max: u64,
    },
    /// Run the invariant suites and print a pass/fail line per suite.
    Verify {
        #[arg(long, value_enum, default_value_t = VerifyLevel::Fast)]
        level: VerifyLevel,
    },
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Some(threads) = cli.threads {
        // A second configuration attempt in the same process is harmless:
        // the pool is only sized once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

type AnyError = Box<dyn std::error::Error>;

fn dispatch(cli: &Cli) -> Result<i32, AnyError> {
    match &cli.command {
        Command::Figure { n, k, plot } => cmd_figure(cli, *n, *k, plot.as_deref()),
        Command::Bounds { n, k, ell } => cmd_bounds(cli, *n, *k, ell),
        Command::Divergence { n, k, ell, certify } => cmd_divergence(cli, *n, *k, ell, *certify),
        Command::Definetti {
            preset,
            model,
            k_max,
            n_min,
            n_max,
        } => cmd_definetti(cli, *preset, model.as_deref(), *k_max, *n_min, *n_max),
        Command::Verify { level } => {
            let level = match level {
                VerifyLevel::Fast => verify::Level::Fast,
                VerifyLevel::Full => verify::Level::Full,
            };
            Ok(verify::run(level, cli.precision_bits))
        }
    }
}

fn emit_table(cli: &Cli, table: &Table) -> Result<(), AnyError> {
    let text = match cli.format {
        Format::Csv => output::render_csv(table),
        Format::Json => output::render_json(table),
    };
    output::emit(&text, cli.out.as_deref())?;
    Ok(())
}

/// One row of the figure sweep; shared with the SVG renderer.
pub struct FigureRow {
    pub ell: u64,
    pub exact_d: f64,
    pub stam_upper: f64,
    pub stam_lower: f64,
    pub hm_upper: f64,
    pub hm_lower: f64,
    pub thm1_upper: f64,
    pub prop12_upper: f64,
}

fn cmd_figure(cli: &Cli, n: u64, k: u64, plot: Option<&std::path::Path>) -> Result<i32, AnyError> {
    if k < 1 || 2 * k > n {
        return Err(format!(
            "the figure needs 1 ≤ k ≤ n/2 so that every bound column is defined; \
             got n = {n}, k = {k}"
        )
        .into());
    }
    let (stam_upper, stam_lower) = stam_bounds(n, k, 2)?;
    let (hm_upper, hm_lower) = hm_bounds(n, k, 2)?;

    use rayon::prelude::*;
    let rows: Vec<FigureRow> = (1..=n / 2)
        .into_par_iter()
        .map(|ell| -> Result<FigureRow, urnkl::Error> {
            let spec = UrnSpec::new(n, k, vec![ell, n - ell])?;
            Ok(FigureRow {
                ell,
                exact_d: urnkl::divergence::relative_entropy(&spec)?,
                stam_upper,
                stam_lower,
                hm_upper,
                hm_lower,
                thm1_upper: thm1_upper(&spec)?,
                prop12_upper: prop12_upper(n, k, ell)?,
            })
        })
        .collect::<Result<_, _>>()?;

    let mut table = Table::new(vec![
        "ell",
        "exact_D",
        "stam_upper",
        "stam_lower",
        "hm_upper",
        "hm_lower",
        "thm1_upper",
        "prop12_upper",
    ]);
    for r in &rows {
        table.push(vec![
            Cell::Int(r.ell),
            Cell::Float(r.exact_d),
            Cell::Float(r.stam_upper),
            Cell::Float(r.stam_lower),
            Cell::Float(r.hm_upper),
            Cell::Float(r.hm_lower),
            Cell::Float(r.thm1_upper),
            Cell::Float(r.prop12_upper),
        ]);
    }
    emit_table(cli, &table)?;
    if let Some(path) = plot {
        output::emit(&svg::figure_svg(n, k, &rows), Some(path))?;
    }
    Ok(0)
}

fn cmd_bounds(cli: &Cli, n: u64, k: u64, ell: &[u64]) -> Result<i32, AnyError> {
    let spec = UrnSpec::new(n, k, ell.to_vec())?;
    let report = bound_report(&spec)?;
    let d = urnkl::divergence::relative_entropy(&spec)?;
    let mut table = Table::new(vec![
        "n",
        "k",
        "ell",
        "exact_D",
        "stam_upper",
        "stam_lower",
        "hm_upper",
        "hm_lower",
        "thm1_upper",
        "prop12_upper",
        "exact_binary",
        "sigma1",
        "sigma2",
        "df_tv",
        "thm1_would_hold",
    ]);
    table.push(vec![
        Cell::Int(n),
        Cell::Int(k),
        Cell::Str(join_counts(ell)),
        Cell::Float(d),
        Cell::Float(report.stam_upper),
        Cell::Float(report.stam_lower),
        Cell::Float(report.hm_upper),
        Cell::Float(report.hm_lower),
        Cell::MaybeFloat(report.thm1_upper),
        Cell::MaybeFloat(report.prop12_upper),
        Cell::MaybeFloat(report.exact_binary),
        Cell::Float(report.sigma1),
        Cell::Float(report.sigma2),
        Cell::Float(report.df_tv),
        Cell::MaybeBool(report.thm1_would_hold),
    ]);
    emit_table(cli, &table)?;
    Ok(0)
}

fn cmd_divergence(cli: &Cli, n: u64, k: u64, ell: &[u64], certify: bool) -> Result<i32, AnyError> {
    let spec = UrnSpec::new(n, k, ell.to_vec())?;
    let report = divergence_report(&spec)?;
    let mut columns = vec!["n", "k", "ell", "kl", "tv", "kl_via_u", "support_size"];
    let mut row = vec![
        Cell::Int(n),
        Cell::Int(k),
        Cell::Str(join_counts(ell)),
        Cell::Float(report.kl),
        Cell::Float(report.tv),
        Cell::Float(report.kl_via_u),
        Cell::Int(report.support_size),
    ];
    if certify {
        let enclosure = certified_divergence(&spec, cli.precision_bits)?;
        columns.extend(["certified_lo", "certified_hi", "certified_width"]);
        row.extend([
            Cell::Float(enclosure.lo),
            Cell::Float(enclosure.hi),
            Cell::Float(enclosure.width()),
        ]);
    }
    let mut table = Table::new(columns);
    table.push(row);
    emit_table(cli, &table)?;
    Ok(0)
}

fn join_counts(ell: &[u64]) -> String {
    ell.iter().map(u64::to_string).collect::<Vec<_>>().join(";")
}

/// A population size ↦ mixing measure map, as the experiment driver expects.
type Family = Box<dyn Fn(u64) -> urnkl::Result<MixingMeasure> + Sync>;

fn cmd_definetti(
    cli: &Cli,
    preset: Option<Preset>,
    model: Option<&std::path::Path>,
    k_max: u64,
    n_min: u64,
    n_max: u64,
) -> Result<i32, AnyError> {
    let (family, ns): (Family, Vec<u64>) = match (preset, model) {
        (_, Some(path)) => {
            let mu = mixing::load_model(path)?;
            let n = mu.n;
            (Box::new(move |_| Ok(mu.clone())), vec![n])
        }
        (Some(Preset::IidFairCoin), None) => (
            Box::new(|n| mixing_from_iid(&[0.5, 0.5], n)),
            (n_min..=n_max).collect(),
        ),
        (Some(Preset::PointMassBalanced), None) => (
            Box::new(|n| MixingMeasure::point_mass(n, vec![n / 2, n - n / 2])),
            (n_min..=n_max).collect(),
        ),
        (None, None) => {
            return Err("definetti needs either --preset or --model".into());
        }
    };
    if ns.is_empty() || n_min > n_max {
        return Err(format!("empty population range {n_min}..{n_max}").into());
    }
    if k_max < 1 {
        return Err("--k-max must be at least 1".into());
    }

    let mut rows = Vec::new();
    for k in 1..=k_max {
        let eligible: Vec<u64> = ns.iter().copied().filter(|&n| n >= k).collect();
        if eligible.is_empty() {
            continue;
        }
        rows.extend(monotonicity_experiment(&family, k, &eligible)?);
    }
    rows.sort_by_key(|r| (r.n, r.k));

    let mut table = Table::new(vec![
        "n",
        "k",
        "d",
        "chain_mid",
        "chain_max",
        "corollary",
        "gk_b",
        "k_monotone",
    ]);
    for r in &rows {
        table.push(vec![
            Cell::Int(r.n),
            Cell::Int(r.k),
            Cell::Float(r.d),
            Cell::Float(r.chain_mid),
            Cell::Float(r.chain_max),
            Cell::Float(r.corollary),
            Cell::MaybeFloat(r.gk_b),
            Cell::Bool(r.k_monotone),
        ]);
    }
    emit_table(cli, &table)?;
    Ok(0)
}
