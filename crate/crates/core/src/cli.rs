//! Command-line surface. `run` takes explicit streams so it can be tested.

use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};
use thiserror::Error;

use crate::atlas::{atlas_build, AtlasLimits};
use crate::diagram::{render, LegendrianGaussDiagram};
use crate::engine::{search_equivalence, EngineError, SearchBudget, Verdict};
use crate::invariants::{self, InvariantError};
use crate::io::{self, AtlasFileError, ParseError, PlanarParseError};
use crate::moves::selftest::{move_table_selftest, SelftestOptions};
use crate::moves::{self, MoveError, MoveInstance, MoveMode};
use crate::realization::{self, LayoutOptions, RealizationError};
use crate::vassiliev::{self, Hypothesis, InvariantTable, SignConvention, VassilievError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Planar(#[from] PlanarParseError),
    #[error(transparent)]
    Diagram(#[from] crate::diagram::DiagramError),
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Realization(#[from] RealizationError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Vassiliev(#[from] VassilievError),
    #[error(transparent)]
    Atlas(#[from] AtlasFileError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Failed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Isotopy,
    Homotopy,
    Flat,
}

impl From<ModeArg> for MoveMode {
    fn from(m: ModeArg) -> MoveMode {
        match m {
            ModeArg::Isotopy => MoveMode::LegendrianIsotopy,
            ModeArg::Homotopy => MoveMode::LegendrianHomotopy,
            ModeArg::Flat => MoveMode::FlatFramedHomotopy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    Plain,
    Stabilized,
}

impl From<ConventionArg> for SignConvention {
    fn from(c: ConventionArg) -> SignConvention {
        match c {
            ConventionArg::Plain => SignConvention::PlainPositive,
            ConventionArg::Stabilized => SignConvention::StabilizedPositive,
        }
    }
}

/// Gauss diagrams of virtual Legendrian knots.
///
/// A DIAGRAM argument is a Gauss code such as "@L C+ A1t C- A1h", a file
/// holding one, or "-" (the default) for standard input.
#[derive(Debug, Parser)]
#[command(name = "legknot", version)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Budget {
    #[arg(long, default_value_t = 16)]
    depth: usize,
    #[arg(long, default_value_t = 1_000_000)]
    nodes: usize,
    /// Longest word expanded (default: longer input + 6).
    #[arg(long)]
    word_length: Option<usize>,
}

impl Budget {
    fn budget(&self) -> SearchBudget {
        SearchBudget { max_depth: self.depth, max_nodes: self.nodes, max_word_length: self.word_length }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Canonical code.
    Canon { diagram: Option<String> },
    /// Maslov number, cusp counts, arrows, string, rho and genus.
    Invariants { diagram: Option<String> },
    /// Applicable move instances on the word as given.
    Moves {
        diagram: Option<String>,
        #[arg(long, value_enum, default_value = "homotopy")]
        mode: ModeArg,
    },
    /// Applies one move instance, e.g. "MV2.4.create@0,1".
    Apply {
        diagram: Option<String>,
        #[arg(long = "move")]
        instance: String,
        #[arg(long, value_enum, default_value = "homotopy")]
        mode: ModeArg,
    },
    /// Inserts positive and negative cusp pairs.
    Stabilize {
        diagram: Option<String>,
        #[arg(long, default_value_t = 0)]
        pos: usize,
        #[arg(long, default_value_t = 0)]
        neg: usize,
        /// Gap receiving the cusps.
        #[arg(long, default_value_t = 0)]
        at: usize,
    },
    /// Inserts Z self-tangency marks at one gap.
    Singular {
        diagram: Option<String>,
        #[arg(long)]
        z: usize,
        #[arg(long, default_value_t = 0)]
        at: usize,
    },
    /// Signed sum of all resolutions of the marks.
    Resolve {
        diagram: Option<String>,
        #[arg(long, value_enum, default_value = "plain")]
        convention: ConventionArg,
    },
    /// Planar front in the text file format (or SVG).
    RealizePlanar {
        diagram: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        shuffle: bool,
        #[arg(long)]
        svg: bool,
    },
    /// Disk-band surface of the underlying string and its genus.
    RealizeSurface { diagram: Option<String> },
    /// rho of a diagram's string, or of a planar front file.
    Rho {
        diagram: Option<String>,
        #[arg(long)]
        planar: Option<PathBuf>,
    },
    /// Bounded search for a move path from A to B.
    Search {
        a: String,
        b: String,
        #[arg(long, value_enum, default_value = "homotopy")]
        mode: ModeArg,
        #[command(flatten)]
        budget: Budget,
    },
    /// Builds or queries a catalogue of small diagrams.
    Atlas {
        #[command(subcommand)]
        action: AtlasAction,
    },
    /// Checks Σ_k (-1)^k C(p,k) C(k(z+1), i) = 0 for i < p, all p ≤ P, z ≤ Z.
    VerifyLemma {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        z: u64,
    },
    /// Checks resolve(K^z) = Σ_j (-1)^j C(z,j) K^{j,j} for z = 1..=Z.
    VerifyExpansion {
        diagram: Option<String>,
        #[arg(long)]
        z: usize,
        #[arg(long, value_enum, default_value = "plain")]
        convention: ConventionArg,
    },
    /// Checks the resolution chain for K and L with K^{p,p} isotopic to L^{p,p}.
    VerifyChain {
        k: String,
        l: String,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        z: u64,
        /// Find an isotopy witness by search when the codes differ.
        #[arg(long)]
        search: bool,
        #[command(flatten)]
        budget: Budget,
    },
    /// Continues an order-N invariant table by its recursion.
    PsiExtend {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        upto: i64,
        /// Comma-separated base values ψ(start), ψ(start+1), ...
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<BigInt>,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        start: i64,
    },
    /// Cross-checks the move table against planar drawings.
    SelftestMoves {
        #[arg(long, default_value_t = 8)]
        max_length: usize,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
enum AtlasAction {
    /// Enumerates diagrams, computes invariants and orbits, writes JSON.
    Build {
        #[arg(long, default_value_t = 12)]
        max_length: usize,
        #[arg(long, default_value_t = 3)]
        max_arrows: usize,
        #[arg(long, default_value_t = 4)]
        max_cusps: usize,
        #[arg(long, value_enum, default_value = "homotopy")]
        mode: ModeArg,
        /// Output file (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Looks up records in an atlas file.
    Query {
        file: PathBuf,
        /// Diagram whose canonical code to look up.
        #[arg(long)]
        code: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        maslov: Option<i64>,
        #[arg(long)]
        orbit: Option<usize>,
    },
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    out: &'a mut dyn Write,
    format: Format,
}

impl Io<'_> {
    fn diagram(&mut self, arg: Option<&str>) -> Result<LegendrianGaussDiagram, CliError> {
        let text = match arg {
            Some(t) if t.trim_start().starts_with('@') => t.to_string(),
            None | Some("-") => {
                let mut s = String::new();
                self.stdin.read_to_string(&mut s)?;
                s
            }
            Some(path) => std::fs::read_to_string(path)?,
        };
        let line = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#')).unwrap_or("");
        Ok(io::parse_gauss_code(line)?)
    }

    fn emit(&mut self, text: impl AsRef<str>, value: Value) -> Result<(), CliError> {
        match self.format {
            Format::Text => {
                let t = text.as_ref();
                self.out.write_all(t.as_bytes())?;
                if !t.ends_with('\n') {
                    self.out.write_all(b"\n")?;
                }
            }
            Format::Json => {
                serde_json::to_writer_pretty(&mut *self.out, &value).map_err(std::io::Error::from)?;
                self.out.write_all(b"\n")?;
            }
        }
        Ok(())
    }
}

fn code(d: &LegendrianGaussDiagram) -> Result<String, CliError> {
    Ok(d.canonical_code()?.0)
}

fn configure_threads() {
    if let Ok(v) = std::env::var("LEGKNOT_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            // a second configuration attempt in one process is harmless
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Runs the CLI; returns the exit code (0 success, 1 domain error, 2 usage).
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    configure_threads();
    let mut io = Io { stdin, out, format: cli.format };
    match execute(cli.command, &mut io, err) {
        Ok(()) => 0,
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn execute(cmd: Command, io: &mut Io<'_>, err: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Canon { diagram } => {
            let d = io.diagram(diagram.as_deref())?;
            let c = code(&d)?;
            io.emit(&c, json!({ "code": c }))
        }
        Command::Invariants { diagram } => {
            let d = io.diagram(diagram.as_deref())?;
            let v = invariants::invariant_vector(&d)?;
            let text = format!(
                "code {}\nmaslov {}\ncusps {} positive, {} negative\narrows {}\nstring {}\nrho {}\ngenus {}",
                code(&d)?,
                v.maslov,
                v.positive_cusps,
                v.negative_cusps,
                v.arrow_count,
                v.string_code,
                v.rho,
                v.genus
            );
            let mut value = serde_json::to_value(&v).map_err(std::io::Error::from)?;
            value["code"] = json!(code(&d)?);
            io.emit(text, value)
        }
        Command::Moves { diagram, mode } => {
            let d = io.diagram(diagram.as_deref())?;
            let list = moves::enumerate_moves(&d, mode.into())?;
            let names: Vec<String> = list.iter().map(ToString::to_string).collect();
            io.emit(names.join("\n"), json!({ "diagram": render(&d), "moves": names }))
        }
        Command::Apply { diagram, instance, mode } => {
            let d = io.diagram(diagram.as_deref())?;
            let m: MoveInstance = instance.parse()?;
            let r = moves::apply_move(&d, &m, mode.into())?;
            let c = code(&r)?;
            io.emit(format!("{}\n{}", render(&r), c), json!({ "result": render(&r), "code": c }))
        }
        Command::Stabilize { diagram, pos, neg, at } => {
            let d = io.diagram(diagram.as_deref())?;
            let r = moves::stabilize(&d, pos, neg, at)?;
            let c = code(&r)?;
            io.emit(&c, json!({ "code": c, "maslov": invariants::maslov(&r) }))
        }
        Command::Singular { diagram, z, at } => {
            let d = io.diagram(diagram.as_deref())?;
            let r = moves::insert_singular_n(&d, at, z)?;
            let c = code(&r)?;
            io.emit(&c, json!({ "code": c }))
        }
        Command::Resolve { diagram, convention } => {
            let d = io.diagram(diagram.as_deref())?;
            let sum = vassiliev::resolve_with(&d, convention.into())?;
            let terms: Vec<Value> =
                sum.iter().map(|(c, k)| json!({ "coefficient": k.to_string(), "code": c.0 })).collect();
            io.emit(sum.to_lines(), json!({ "terms": terms }))
        }
        Command::RealizePlanar { diagram, seed, shuffle, svg } => {
            let d = io.diagram(diagram.as_deref())?;
            let p = realization::realize_planar_with(&d, LayoutOptions { seed, shuffle })?;
            let text = if svg { io::planar_svg(&p) } else { io::emit_planar(&p) };
            io.emit(text, serde_json::to_value(&p).map_err(std::io::Error::from)?)
        }
        Command::RealizeSurface { diagram } => {
            let d = io.diagram(diagram.as_deref())?;
            let s = d.underlying_string()?;
            let r = realization::realize_surface(&s)?;
            let g = realization::surface_genus(&r)?;
            let ends: Vec<String> = r.band_end_order.iter().map(ToString::to_string).collect();
            let bands: Vec<String> = r.band_pairing.iter().map(|(t, h)| format!("{t}->{h}")).collect();
            let text = format!("band ends {}\nbands {}\ngenus {g}", ends.join(" "), bands.join(" "));
            io.emit(text, json!({ "band_end_order": r.band_end_order, "band_pairing": r.band_pairing, "genus": g }))
        }
        Command::Rho { diagram, planar } => {
            let rho = match planar {
                Some(path) => {
                    let p = io::parse_planar(&std::fs::read_to_string(path)?)?;
                    invariants::rho(&p.flat())?
                }
                None => invariants::rho_of_diagram(&io.diagram(diagram.as_deref())?)?,
            };
            io.emit(rho.to_string(), json!({ "rho": rho }))
        }
        Command::Search { a, b, mode, budget } => {
            let da = io.diagram(Some(&a))?;
            let db = io.diagram(Some(&b))?;
            let r = search_equivalence(&da, &db, mode.into(), budget.budget())?;
            let text = match &r.verdict {
                Verdict::Connected { path } => {
                    let steps: Vec<String> = path.iter().map(ToString::to_string).collect();
                    format!("connected in {} moves\n{}", path.len(), steps.join("\n"))
                }
                Verdict::Distinguished { by } => format!("distinguished by {by}"),
                Verdict::Exhausted { stats } => format!(
                    "exhausted after {} nodes (depth {}, word cap {})",
                    r.nodes_visited, stats.depth_reached, stats.word_length_cap
                ),
            };
            io.emit(text, serde_json::to_value(&r).map_err(std::io::Error::from)?)
        }
        Command::Atlas { action } => atlas(action, io, err),
        Command::VerifyLemma { p, z } => {
            let mut failures = Vec::new();
            for pp in 1..=p {
                for zz in 1..=z {
                    if !vassiliev::combo_lemma_check(pp, zz) {
                        failures.push(format!("p={pp} z={zz}"));
                    }
                }
            }
            verdict(io, failures, json!({ "p": p, "z": z }))
        }
        Command::VerifyExpansion { diagram, z, convention } => {
            let d = io.diagram(diagram.as_deref())?;
            let mut failures = Vec::new();
            for zz in 1..=z {
                if !vassiliev::expansion_identity_check_with(&d, zz, 0, convention.into())? {
                    failures.push(format!("z={zz}"));
                }
            }
            verdict(io, failures, json!({ "code": code(&d)?, "z": z }))
        }
        Command::VerifyChain { k, l, p, z, search, budget } => {
            let dk = io.diagram(Some(&k))?;
            let dl = io.diagram(Some(&l))?;
            let kp = moves::stabilize(&dk, p as usize, p as usize, 0)?;
            let lp = moves::stabilize(&dl, p as usize, p as usize, 0)?;
            let hypothesis = if kp.canonical_code()? == lp.canonical_code()? || !search {
                Hypothesis::CodeEquality
            } else {
                let r = search_equivalence(&kp, &lp, MoveMode::LegendrianIsotopy, budget.budget())?;
                match r.verdict {
                    Verdict::Connected { path } => Hypothesis::Witness(path),
                    _ => return Err(VassilievError::HypothesisNotEstablished.into()),
                }
            };
            let report = vassiliev::theorem_chain_report(&dk, &dl, p, z, &hypothesis)?;
            let mut failures = Vec::new();
            for (ok, name) in [
                (report.expansion_matches, "expansion"),
                (report.low_coefficients_vanish, "low coefficients"),
                (report.substitution_matches, "substitution"),
            ] {
                if !ok {
                    failures.push(name.to_string());
                }
            }
            verdict(io, failures, serde_json::to_value(&report).map_err(std::io::Error::from)?)
        }
        Command::PsiExtend { n, upto, values, start } => {
            let mut t = InvariantTable::new(start, values, n);
            vassiliev::psi_extend(&mut t, upto)?;
            let lines: Vec<String> = t.values.iter().map(|(l, v)| format!("{l} {v}")).collect();
            let pairs: Vec<Value> = t.values.iter().map(|(l, v)| json!([l, v.to_string()])).collect();
            io.emit(lines.join("\n"), json!({ "order": n, "values": pairs }))
        }
        Command::SelftestMoves { max_length, stride, seed } => {
            let r = move_table_selftest(SelftestOptions { max_word_length: max_length, stride, seed });
            let mut text = format!(
                "diagrams {}\ninstances {}\ngeometric moves {}\ntriangle drawings {}\ndangerous rejected {}/{}\nmismatches {}\nuncovered {}",
                r.diagrams,
                r.instances_checked,
                r.geometric_moves,
                r.triangle_drawings,
                r.dangerous_rejected,
                r.dangerous_attempts,
                r.mismatches.len(),
                r.uncovered.len()
            );
            for m in r.mismatches.iter().chain(&r.uncovered) {
                text.push('\n');
                text.push_str(m);
            }
            let passed = r.passed();
            io.emit(text, serde_json::to_value(&r).map_err(std::io::Error::from)?)?;
            if passed {
                Ok(())
            } else {
                Err(CliError::Failed("move table disagrees with the drawings".into()))
            }
        }
    }
}

fn verdict(io: &mut Io<'_>, failures: Vec<String>, mut value: Value) -> Result<(), CliError> {
    let ok = failures.is_empty();
    value["ok"] = json!(ok);
    value["failures"] = json!(failures);
    let text = if ok { "ok".to_string() } else { format!("failed: {}", failures.join(", ")) };
    io.emit(text, value)?;
    if ok {
        Ok(())
    } else {
        Err(CliError::Failed("check failed".into()))
    }
}

fn atlas(action: AtlasAction, io: &mut Io<'_>, err: &mut dyn Write) -> Result<(), CliError> {
    match action {
        AtlasAction::Build { max_length, max_arrows, max_cusps, mode, out, budget } => {
            let limits = AtlasLimits { max_word_length: max_length, max_arrows, max_cusps };
            let start = std::time::Instant::now();
            let a = atlas_build(limits, mode.into(), budget.budget())?;
            let _ = writeln!(
                err,
                "{} diagrams, {} orbits in {:.1}s",
                a.records.len(),
                a.orbit_count(),
                start.elapsed().as_secs_f64()
            );
            let text = io::atlas_to_json(&a.to_file());
            match out {
                Some(path) => {
                    std::fs::write(&path, text)?;
                    Ok(())
                }
                None => {
                    io.out.write_all(text.as_bytes())?;
                    Ok(())
                }
            }
        }
        AtlasAction::Query { file, code: wanted, maslov, orbit } => {
            let a = io::atlas_from_json(&std::fs::read_to_string(file)?)?;
            let wanted = match wanted {
                Some(c) => Some(io.diagram(Some(&c))?.canonical_code()?.0),
                None => None,
            };
            let hits: Vec<&io::AtlasFileRecord> = a
                .records
                .iter()
                .filter(|r| wanted.as_ref().is_none_or(|c| &r.code == c))
                .filter(|r| maslov.is_none_or(|m| r.maslov == m))
                .filter(|r| orbit.is_none_or(|o| r.orbit_id == o))
                .collect();
            let lines: Vec<String> = hits
                .iter()
                .map(|r| {
                    format!(
                        "{}\tmaslov {}\tarrows {}\tcusps {}\tgenus {}\trho {}\torbit {}",
                        r.code, r.maslov, r.arrows, r.cusps, r.genus, r.rho, r.orbit_id
                    )
                })
                .collect();
            if hits.is_empty() && wanted.is_some() {
                return Err(CliError::Failed("no such record".into()));
            }
            io.emit(lines.join("\n"), json!({ "records": hits }))
        }
    }
}
