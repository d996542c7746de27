//! Command-line driver.
//!
//! Exit status: `0` success, `1` a checked inequality was violated, `2` usage
//! or input error, `3` resource limit.
//!
//! Corpus cases are derived from the seed `s` alone:
//!
//! * `|X| = 2^(1 + s mod 3)`, `d_B = 1 + ⌊s/3⌋ mod 4`, conditional rank
//!   `1 + ⌊s/7⌋ mod d_B`, state `random_cq(s, |X|, d_B, rank)`;
//! * `m = 1 + ⌊s/12⌋ mod log₂|X|` output bits for the GF(2) families, and
//!   `|S| = 2^min(m, ⌊16/|X|⌋)` for `all_functions`, keeping `|S|^|X| ≤ 2^16`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{corollary4_scan, Schedule};
use crate::cq::{random_bipartite, random_classical_cq, random_cq, CqState};
use crate::entropy::{collision_entropy_r, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::extension::{theorem2_lower_bound, verify_theorem2, THEOREM2_TOL};
use crate::extractor::{distances, extractable_length, theorem1_report, Mode, THEOREM1_TOL};
use crate::hashing::{FamilyKind, HashFamily};
use crate::io::{parse_family, read_state, state_to_json, to_json, State};

#[derive(Parser, Debug)]
#[command(name = "qrex", version, about = "Collision entropies, two-universal hashing and extraction bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a seeded random state.
    ///
    /// Conditional states are normalized complex Wishart matrices G·G†/Tr(G·G†) with G a
    /// d × rank matrix of standard complex Gaussians; symbol probabilities are normalized
    /// exponential draws. All randomness comes from a ChaCha20 stream seeded by --seed.
    Gen(GenArgs),
    /// Collision entropy R_ε(A|B) with its certificate.
    Entropy(EntropyArgs),
    /// Hash a cq state and check the key-length bound.
    Extract(ExtractArgs),
    /// Lower bound on the optimized collision entropy from sup/inf entropies.
    Bound(BoundArgs),
    /// Build the flagged extension and check the lower bound on it.
    Extension(ExtensionArgs),
    /// Per-copy bound for tensor powers against S(A|B), as CSV.
    Asymptotics(AsymptoticsArgs),
    /// Key-length bound over a seeded corpus, as CSV.
    Corpus(CorpusArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// Random cq state.
    Cq,
    /// Cq state with diagonal conditionals.
    Classical,
    /// Random bipartite state on A ⊗ B.
    Bipartite,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "cq")]
    pub kind: GenKind,
    /// Alphabet size (cq kinds).
    #[arg(long = "X", default_value_t = 2)]
    pub x: usize,
    /// Dimension of A (bipartite kind).
    #[arg(long = "dA", default_value_t = 2)]
    pub d_a: usize,
    #[arg(long = "dB", default_value_t = 2)]
    pub d_b: usize,
    /// Rank of each random density matrix; full rank by default.
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EntropyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Family descriptor JSON, e.g. '{"kind":"linear_gf2","n":2,"m":1}'; a path to a file also works.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    /// Average over this many sampled members instead of the whole family (estimate only).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report the longest key whose ε′ stays below this target instead of a single run.
    #[arg(long)]
    pub target: Option<f64>,
    /// Family kind used with --target.
    #[arg(long = "family-kind", value_parser = parse_kind, default_value = "linear_gf2")]
    pub family_kind: FamilyKind,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "eps-under")]
    pub eps_under: f64,
    #[arg(long = "eps-hat")]
    pub eps_hat: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExtensionArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "eps-under")]
    pub eps_under: f64,
    #[arg(long = "eps-hat")]
    pub eps_hat: f64,
    #[arg(long, default_value_t = THEOREM2_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AsymptoticsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "n-max", default_value_t = 20)]
    pub n_max: u32,
    #[arg(long = "k-gamma", default_value_t = 0.25)]
    pub k_gamma: f64,
    #[arg(long = "k-eps", default_value_t = 0.25)]
    pub k_eps: f64,
    /// Upper clamp on the scheduled smoothing parameters.
    #[arg(long, default_value_t = 0.05)]
    pub cap: f64,
    /// Constant ε̲ for every n (requires --eps-hat).
    #[arg(long = "eps-under", requires = "eps_hat")]
    pub eps_under: Option<f64>,
    #[arg(long = "eps-hat", requires = "eps_under")]
    pub eps_hat: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CorpusArgs {
    /// Inclusive range `a..b` or comma list.
    #[arg(long, value_parser = parse_seeds)]
    pub seeds: Seeds,
    /// Comma-separated smoothing parameters.
    #[arg(long, value_parser = parse_eps_list, default_value = "0,0.01,0.1")]
    pub eps: EpsList,
    #[arg(long, value_parser = parse_kind, default_value = "linear")]
    pub family: FamilyKind,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Seeds(pub Vec<u64>);

#[derive(Clone, Debug, PartialEq)]
pub struct EpsList(pub Vec<f64>);

pub fn parse_seeds(s: &str) -> std::result::Result<Seeds, String> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
        let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|e| format!("bad range end: {e}"))?;
        if a > b {
            return Err(format!("empty seed range {a}..{b}"));
        }
        return Ok(Seeds((a..=b).collect()));
    }
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|e| format!("bad seed `{t}`: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Seeds(v))
}

pub fn parse_eps_list(s: &str) -> std::result::Result<EpsList, String> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad epsilon `{t}`: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if let Some(e) = v.iter().find(|e| !(**e >= 0.0 && **e < 1.0)) {
        return Err(format!("epsilon {e} outside [0, 1)"));
    }
    Ok(EpsList(v))
}

pub fn parse_kind(s: &str) -> std::result::Result<FamilyKind, String> {
    match s {
        "linear" | "linear_gf2" => Ok(FamilyKind::LinearGf2),
        "toeplitz" | "toeplitz_gf2" => Ok(FamilyKind::ToeplitzGf2),
        "all" | "all_functions" => Ok(FamilyKind::AllFunctions),
        _ => Err(format!("unknown family `{s}` (linear, toeplitz, all_functions)")),
    }
}

fn kind_name(k: FamilyKind) -> &'static str {
    match k {
        FamilyKind::AllFunctions => "all_functions",
        FamilyKind::LinearGf2 => "linear_gf2",
        FamilyKind::ToeplitzGf2 => "toeplitz_gf2",
    }
}

/// State and family for one corpus seed.
pub fn corpus_case(seed: u64, kind: FamilyKind) -> Result<(CqState<f64>, HashFamily)> {
    let bits = 1 + (seed % 3) as u32;
    let nx = 1usize << bits;
    let d_b = 1 + ((seed / 3) % 4) as usize;
    let rank = 1 + ((seed / 7) % d_b as u64) as usize;
    let m = 1 + ((seed / 12) % bits as u64) as u32;
    let cq = random_cq(seed, nx, d_b, rank)?;
    let fam = match kind {
        FamilyKind::LinearGf2 => HashFamily::linear_gf2(bits, m)?,
        FamilyKind::ToeplitzGf2 => HashFamily::toeplitz_gf2(bits, m)?,
        FamilyKind::AllFunctions => HashFamily::all_functions(nx as u64, 1 << m.min(16 / nx as u32))?,
    };
    Ok((cq, fam))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusRow {
    pub seed: u64,
    #[serde(rename = "X")]
    pub x: usize,
    #[serde(rename = "dB")]
    pub d_b: usize,
    pub family: &'static str,
    pub m: u32,
    pub eps: f64,
    #[serde(rename = "delta_R")]
    pub delta_r: f64,
    /// Carried for the Pinsker check; not part of the CSV column set.
    #[serde(skip)]
    pub delta_d: f64,
    pub rhs: f64,
    pub margin: f64,
}

/// Exact-mode rows for every seed and `ε`, sorted by seed then by the order of `eps`.
pub fn corpus_rows(seeds: &[u64], eps: &[f64], kind: FamilyKind) -> Result<Vec<CorpusRow>> {
    let per_seed = seeds
        .par_iter()
        .map(|&seed| {
            let (cq, fam) = corpus_case(seed, kind)?;
            let dist = distances(&cq, &fam, Mode::Exact)?;
            eps.iter()
                .map(|&e| {
                    let rep = theorem1_report(&cq, &fam, e, &dist, Mode::Exact)?;
                    Ok(CorpusRow {
                        seed,
                        x: cq.alphabet_size(),
                        d_b: cq.d_b(),
                        family: kind_name(kind),
                        m: fam.range_size().trailing_zeros(),
                        eps: e,
                        delta_r: rep.delta_r,
                        delta_d: rep.delta_d,
                        rhs: rep.theorem1_rhs,
                        margin: rep.margin,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<CorpusRow> = per_seed.into_iter().flatten().collect();
    rows.sort_by_key(|r| r.seed);
    Ok(rows)
}

/// CSV text with header `seed,X,dB,family,m,eps,delta_R,rhs,margin`.
pub fn corpus_csv(rows: &[CorpusRow]) -> Result<String> {
    to_csv(rows)
}

fn to_csv<S: Serialize>(rows: &[S]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct AsymptoticsRow {
    n: u32,
    eps_n: f64,
    bound_per_n: f64,
    cond_vn: f64,
    gap: f64,
}

/// Outcome of one command.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    /// A checked inequality failed.
    pub violated: bool,
}

fn ok(text: String) -> Outcome {
    Outcome { text, violated: false }
}

fn check_unit(name: &str, v: f64, open_low: bool) -> Result<()> {
    let low_ok = if open_low { v > 0.0 } else { v >= 0.0 };
    if !(low_ok && v < 1.0) {
        let lo = if open_low { "(0" } else { "[0" };
        return Err(Error::Argument(format!("--{name} must lie in {lo}, 1), got {v}")));
    }
    Ok(())
}

fn read_family(spec: &str) -> Result<HashFamily> {
    let text = if spec.trim_start().starts_with('{') { spec.to_string() } else { std::fs::read_to_string(spec)? };
    HashFamily::from_descriptor(parse_family(&text)?)
}

fn require_cq(state: &State) -> Result<&CqState<f64>> {
    state.as_cq().ok_or_else(|| Error::Argument("this command needs a cq state (\"kind\":\"cq\")".into()))
}

fn default_family(cq: &CqState<f64>) -> Result<HashFamily> {
    let nx = cq.alphabet_size() as u64;
    if !nx.is_power_of_two() || nx < 2 {
        return Err(Error::Argument("--family is required when |X| is not a power of two".into()));
    }
    HashFamily::linear_gf2(nx.trailing_zeros(), 1)
}

/// Executes a parsed command and returns its output text.
pub fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Gen(a) => {
            let state = match a.kind {
                GenKind::Cq => State::Cq(random_cq(a.seed, a.x, a.d_b, a.rank.unwrap_or(a.d_b))?),
                GenKind::Classical => State::Cq(random_classical_cq(a.seed, a.x, a.d_b)?),
                GenKind::Bipartite => {
                    State::Bipartite(random_bipartite(a.seed, a.d_a, a.d_b, a.rank.unwrap_or(a.d_a * a.d_b))?)
                }
            };
            Ok(ok(state_to_json(&state)))
        }
        Command::Entropy(a) => {
            check_unit("eps", a.eps, false)?;
            if !(a.tol > 0.0) {
                return Err(Error::Argument("--tol must be positive".into()));
            }
            let rho = read_state(&a.input)?.to_bipartite()?;
            Ok(ok(to_json(&collision_entropy_r(&rho, a.eps, a.tol)?)))
        }
        Command::Extract(a) => {
            check_unit("eps", a.eps, false)?;
            let state = read_state(&a.input)?;
            let cq = require_cq(&state)?;
            if let Some(target) = a.target {
                if !(target >= 0.0) {
                    return Err(Error::Argument("--target must be nonnegative".into()));
                }
                return Ok(ok(to_json(&extractable_length(cq, a.eps, target, a.family_kind)?)));
            }
            let fam = match &a.family {
                Some(spec) => read_family(spec)?,
                None => default_family(cq)?,
            };
            let mode = match a.samples {
                Some(samples) => Mode::Sampled { samples, seed: a.seed },
                None => Mode::Exact,
            };
            let dist = distances(cq, &fam, mode)?;
            let rep = theorem1_report(cq, &fam, a.eps, &dist, mode)?;
            Ok(Outcome { violated: rep.violated(), text: to_json(&rep) })
        }
        Command::Bound(a) => {
            check_unit("eps-under", a.eps_under, true)?;
            check_unit("eps-hat", a.eps_hat, true)?;
            let rho = read_state(&a.input)?.to_bipartite()?;
            Ok(ok(to_json(&theorem2_lower_bound(&rho, a.eps_under, a.eps_hat)?)))
        }
        Command::Extension(a) => {
            check_unit("eps-under", a.eps_under, true)?;
            check_unit("eps-hat", a.eps_hat, true)?;
            if !(a.tol >= 0.0) {
                return Err(Error::Argument("--tol must be nonnegative".into()));
            }
            let rho = read_state(&a.input)?.to_bipartite()?;
            let rep = verify_theorem2(&rho, a.eps_under, a.eps_hat, a.tol)?;
            Ok(Outcome { violated: rep.holds == Some(false), text: to_json(&rep) })
        }
        Command::Asymptotics(a) => {
            let schedule = match (a.eps_under, a.eps_hat) {
                (Some(eps_under), Some(eps_hat)) => {
                    check_unit("eps-under", eps_under, true)?;
                    check_unit("eps-hat", eps_hat, true)?;
                    Schedule::Fixed { eps_under, eps_hat }
                }
                _ => Schedule::ProofShape { k_gamma: a.k_gamma, k_eps: a.k_eps, cap: a.cap },
            };
            schedule.validate()?;
            if a.n_max == 0 {
                return Err(Error::Argument("--n-max must be at least 1".into()));
            }
            let rho = read_state(&a.input)?.to_bipartite()?;
            let rows: Vec<AsymptoticsRow> = corollary4_scan(&rho, a.n_max, schedule)?
                .into_iter()
                .map(|r| AsymptoticsRow { n: r.n, eps_n: r.eps_n, bound_per_n: r.bound_per_n, cond_vn: r.cond_vn, gap: r.gap })
                .collect();
            Ok(ok(to_csv(&rows)?))
        }
        Command::Corpus(a) => {
            let rows = corpus_rows(&a.seeds.0, &a.eps.0, a.family)?;
            let violated = rows.iter().any(|r| r.margin < -THEOREM1_TOL);
            Ok(Outcome { text: corpus_csv(&rows)?, violated })
        }
    }
}

fn out_path(cmd: &Command) -> Option<&PathBuf> {
    match cmd {
        Command::Gen(a) => a.out.as_ref(),
        Command::Entropy(a) => a.out.as_ref(),
        Command::Extract(a) => a.out.as_ref(),
        Command::Bound(a) => a.out.as_ref(),
        Command::Extension(a) => a.out.as_ref(),
        Command::Asymptotics(a) => a.out.as_ref(),
        Command::Corpus(a) => a.out.as_ref(),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Resource(_) => 3,
        Error::NonConvergence { .. } => 3,
        Error::Argument(_) | Error::Parse(_) | Error::Io(_) => 2,
    }
}

/// Runs the command, writes its output, and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let outcome = match execute(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("qrex: {e}");
            return exit_code(&e);
        }
    };
    let written = match out_path(&cli.command) {
        Some(p) => std::fs::write(p, &outcome.text),
        None => std::io::stdout().write_all(outcome.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("qrex: {e}");
        return 2;
    }
    if outcome.violated {
        eprintln!("qrex: bound violated");
        return 1;
    }
    0
}
