//! `pathpair`: generators, routers, the exact oracle, cut checks and the
//! verifier behind one command line.
//!
//! Exit codes: 0 success, 1 infeasible / violated / verify failure, 2 usage or
//! input error, 3 budget exceeded.

mod build;
mod check;
mod io;
mod route;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pathpair", version, about = "Edge-disjoint pair routing in product graphs")]
struct Cli {
    /// Only log errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph (and a pairing for adversarial instances).
    Gen(GenArgs),
    /// Cartesian product of two graph files.
    Product(ProductArgs),
    /// Seeded random terminal pairs.
    Pairs(PairsArgs),
    /// Route a pairing and verify the result.
    Route(RouteArgs),
    /// Check a path system against a graph and pairing.
    Verify(VerifyArgs),
    /// Exact feasibility / pairability search.
    Oracle(OracleArgs),
    /// Cut-condition checks.
    Cut(CutArgs),
    /// Time routers over a range of seeds.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FamilyArg {
    Complete,
    Bipartite,
    Path,
    Cycle,
    Star,
    Hypercube,
    Blownup,
    Kmm,
    Starblock,
    Cutexample,
    Torus,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Edges,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Matched,
    CliqueTail,
}

#[derive(Args)]
pub struct GenArgs {
    pub family: FamilyArg,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub a: Option<usize>,
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Cycle lengths of a torus, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub lens: Vec<usize>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    /// Clique size for the clique-tail cut example.
    #[arg(long)]
    pub clique: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the adversarial pairing here instead of embedding it.
    #[arg(long)]
    pub pairs_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ProductArgs {
    #[arg(long)]
    pub g: PathBuf,
    #[arg(long)]
    pub h: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct PairsArgs {
    #[arg(long, conflicts_with = "n")]
    pub graph: Option<PathBuf>,
    /// Vertex count, when no graph file is given.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, conflicts_with = "k")]
    pub full: bool,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Thm1,
    Thm2,
    Sweep,
    Kmm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Auto,
    Oracle,
    Complete,
    Sweep,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Encoding {
    Plain,
    Delta,
}

#[derive(Args)]
pub struct RouteArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    #[arg(long)]
    pub graph_g: Option<PathBuf>,
    #[arg(long)]
    pub graph_h: Option<PathBuf>,
    /// Whole graph, for `sweep` and `kmm`.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Random pairing of this many pairs (with `--seed`) instead of `--pairs`.
    #[arg(long, conflicts_with_all = ["pairs", "full"])]
    pub k: Option<usize>,
    /// Random full pairing (with `--seed`) instead of `--pairs`.
    #[arg(long, conflicts_with = "pairs")]
    pub full: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Declared capability of the first factor's solver. Default: n/2 for a
    /// complete factor, m² for G(k, m) with k >= 2m, otherwise 1; capped at
    /// n/8 (thm1) or n/4 (thm2).
    #[arg(long)]
    pub a: Option<usize>,
    /// Declared capability of the second factor's solver; defaults as for `--a`.
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    pub solver_g: SolverArg,
    #[arg(long, value_enum, default_value = "auto")]
    pub solver_h: SolverArg,
    /// Skip size/count preconditions and report what happens.
    #[arg(long)]
    pub unchecked: bool,
    /// Half-size of K_{m,m} □ K_{m,m}, for `kmm` without `--graph`.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, conflicts_with = "explore")]
    pub strict: bool,
    #[arg(long)]
    pub explore: bool,
    /// Oracle node budget for oracle-backed layer solvers.
    #[arg(long, env = "PATHPAIR_BUDGET")]
    pub budget: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "plain")]
    pub encoding: Encoding,
    #[arg(long)]
    pub gzip: bool,
    #[arg(long)]
    pub manifest_out: Option<PathBuf>,
    /// Phase records (thm1, thm2, sweep) as JSON.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    /// Phase metrics and per-vertex audit maxima (kmm) as JSON.
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub paths: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Decide this one pairing.
    #[arg(long, conflicts_with_all = ["k", "pp"])]
    pub pairs: Option<PathBuf>,
    /// Check every placement of k pairs.
    #[arg(long, conflicts_with = "pp")]
    pub k: Option<usize>,
    /// Scan k = 1..=n/2 for the path-pairability number.
    #[arg(long)]
    pub pp: bool,
    /// Node budget per search; the flag wins over PATHPAIR_BUDGET.
    #[arg(long, env = "PATHPAIR_BUDGET")]
    pub budget: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub manifest_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CutArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Check all subsets of size 1..=k.
    #[arg(long, conflicts_with_all = ["full", "set"])]
    pub k: Option<usize>,
    /// Check all proper subsets up to half the vertices.
    #[arg(long, conflicts_with = "set")]
    pub full: bool,
    /// Check one vertex set, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub set: Vec<usize>,
    /// Report the violating box of a d-dimensional cycle product.
    #[arg(long, conflicts_with = "graph")]
    pub grid_d: Option<usize>,
    /// Largest subset count to enumerate.
    #[arg(long)]
    pub cap: Option<u128>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchMethod {
    Kmm,
    Sweep,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub method: BenchMethod,
    /// `kmm`: half-size m. `sweep`: clique size m.
    #[arg(long)]
    pub m: usize,
    /// `sweep`: number of classes (default 2m).
    #[arg(long)]
    pub k: Option<usize>,
    /// Seeds `first-seed .. first-seed + seeds`.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub first_seed: u64,
    /// Worker threads; each instance stays deterministic.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub explore: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    io::QUIET.store(cli.quiet, std::sync::atomic::Ordering::Relaxed);
    let result = match &cli.command {
        Command::Gen(a) => build::gen(a),
        Command::Product(a) => build::product(a),
        Command::Pairs(a) => build::pairs(a),
        Command::Route(a) => route::route(a),
        Command::Verify(a) => route::verify(a),
        Command::Oracle(a) => check::oracle(a),
        Command::Cut(a) => check::cut(a),
        Command::Bench(a) => route::bench(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            io::log("error", e.kind(), serde_json::json!({ "message": e.to_string() }));
            e.exit_code()
        }
    }
}
