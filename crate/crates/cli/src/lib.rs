//! Command-line front end: map files in, JSON reports and CSV tables out.

pub mod commands;
pub mod mapfile;
pub mod report;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use commands::{parse_pair, Common, SimulateArgs, TransformArgs};
use mapfile::{digest, MapFile};
use report::{Exit, Failure, Outcome};

#[derive(Debug, Parser)]
#[command(name = "plane-escape", version, about = "Escape dynamics of polynomial maps of C^2")]
pub struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Working precision in bits [default: 53, or option.precision_bits].
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Random seed [default: 0, or option.seed].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structure at infinity: indeterminacy points, exponents, degree, regime.
    Analyze { mapfile: PathBuf },
    /// Escape rates of random points in an annulus.
    Simulate {
        mapfile: PathBuf,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 25)]
        iters: usize,
        /// Radii `a,b` of the sampling annulus.
        #[arg(long, default_value = "10,100", value_parser = parse_pair)]
        annulus: (f64, f64),
        /// Steps used by the rate estimator.
        #[arg(long, default_value_t = 10)]
        tail: usize,
        /// Write the per-point table here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also keep the per-point rows in the JSON report.
        #[arg(long)]
        rows: bool,
    },
    /// Itinerary-constrained preimage measure of a vertical line on a slice.
    Transform {
        mapfile: PathBuf,
        /// Itinerary such as `12112`; sampled from nu when absent.
        #[arg(long)]
        word: Option<String>,
        /// Level `v0` as `re` or `re,im`.
        #[arg(long, value_parser = parse_pair)]
        level: Option<(f64, f64)>,
        /// Terminal line `u = c` as `re` or `re,im`.
        #[arg(long, value_parser = parse_pair)]
        terminal: Option<(f64, f64)>,
        /// Depth of the convergence table.
        #[arg(long)]
        kmax: Option<usize>,
        /// Side of the potential grid.
        #[arg(long, default_value_t = 9)]
        grid: usize,
    },
    /// Analyze, simulate and transform with defaults, in one document.
    Report {
        mapfile: PathBuf,
        /// Include Newton certificates and per-point rows.
        #[arg(long)]
        full: bool,
    },
}

fn load(path: &Path) -> Result<MapFile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::new(Exit::Validation, format!("{}: {e}", path.display())))?;
    MapFile::parse(&text).map_err(|e| Failure::new(Exit::Validation, e))
}

/// Runs a parsed command line without touching stdout.
pub fn run(cli: &Cli) -> Outcome {
    if let Some(n) = cli.threads {
        // Fails only when a pool already exists, which then stays in use.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let common = |mf: &MapFile| Common::resolve(mf, cli.precision, cli.seed);
    let single = |path: &Path, f: &dyn Fn(&MapFile, Common) -> Result<Outcome, Failure>| -> Outcome {
        let go = || -> Result<Outcome, Failure> {
            let mf = load(path)?;
            f(&mf, common(&mf)?)
        };
        go().unwrap_or_else(Outcome::from)
    };
    match &cli.command {
        Command::Analyze { mapfile } => single(mapfile, &commands::analyze),
        Command::Simulate { mapfile, samples, iters, annulus, tail, rows, .. } => {
            let args = SimulateArgs { samples: *samples, iters: *iters, annulus: *annulus, tail: *tail, rows: *rows };
            single(mapfile, &|mf, c| commands::simulate(mf, c, &args))
        }
        Command::Transform { mapfile, word, level, terminal, kmax, grid } => {
            let args = TransformArgs { word: word.clone(), level: *level, terminal: *terminal, kmax: *kmax, grid: *grid };
            single(mapfile, &|mf, c| commands::transform(mf, c, &args))
        }
        Command::Report { mapfile, full } => {
            let bytes = std::fs::read(mapfile).unwrap_or_default();
            let mf = load(mapfile);
            let fallback = Common { precision: cli.precision.unwrap_or(Common::DEFAULT_PRECISION), seed: cli.seed.unwrap_or(0) };
            let c = match &mf {
                Ok(m) => common(m),
                Err(_) => Ok(fallback),
            };
            match c {
                Ok(c) => commands::report(mf.as_ref().map_err(Clone::clone), &digest(&bytes), c, *full),
                Err(f) => commands::report(Err(f), &digest(&bytes), fallback, *full),
            }
        }
    }
}

/// Writes the report and CSV of `outcome`; returns the process exit code.
pub fn emit(cli: &Cli, outcome: &Outcome) -> i32 {
    let mut code = outcome.code;
    if let Some(msg) = &outcome.message {
        eprintln!("plane-escape: {msg}");
    }
    if let (Command::Simulate { csv: Some(path), .. }, Some(body)) = (&cli.command, &outcome.csv) {
        if let Err(e) = std::fs::write(path, body) {
            eprintln!("plane-escape: {}: {e}", path.display());
            code = code.max(Exit::Validation);
        }
    }
    if let Some(report) = &outcome.report {
        let text = report.to_json();
        match &cli.out {
            Some(path) => {
                if let Err(e) = std::fs::write(path, text) {
                    eprintln!("plane-escape: {}: {e}", path.display());
                    code = code.max(Exit::Validation);
                }
            }
            None => print!("{text}"),
        }
    }
    code as i32
}
