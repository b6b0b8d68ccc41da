//! The `selfsim` command line.
//!
//! Exit codes: 0 success or certified, 1 negative answer or not certified,
//! 2 unknown or budget exhausted, 64 usage, 65 unreadable or invalid input,
//! 74 output error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::activity::{activity_class, activity_counts, pold_contraction_test, PoldOutcome};
use crate::backend::{order, BackendDescriptor, Group, Order, OrderOptions};
use crate::contraction::{
    compute_nucleus, dim_zero_test, verify_nucleus, ContractionStatus, DimZero, Nucleus, NucleusOptions,
};
use crate::dimension::{
    certificate_json, dimension_report, search_partition, verify_certificate, CertificateJson, GeneratingSet,
    SearchOptions, SearchOutcome, Strategy, DEFAULT_ARROW_CAP,
};
use crate::error::Error;
use crate::graphs::{
    export, level_transitive, schreier, self_replicating_check, tile_graph, ExportFormat, SelfReplication,
};
use crate::recursion::{GroupWord, RecursionSystem};
use crate::{dsl, par};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_IO: i32 = 74;

#[derive(Parser)]
#[command(name = "selfsim", version, about = "Computations with self-similar groups given by wreath recursions")]
struct Cli {
    /// Replace the backend declared in the file.
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendArg>,
    /// Worker threads (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Tree,
    Free,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a definition and print its canonical form.
    Parse { file: PathBuf },
    /// Compute the nucleus, or check a candidate set.
    Nucleus {
        file: PathBuf,
        /// Element budget of the candidate set.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        /// Comma-separated words to check instead of computing.
        #[arg(long, value_name = "SET")]
        verify_only: Option<String>,
    },
    /// Order of an element in the faithful quotient.
    Order {
        file: PathBuf,
        word: String,
        /// Cap on the states of the unrolled recursion.
        #[arg(long, default_value_t = 10_000)]
        cap: usize,
    },
    /// Decide whether a word is the identity.
    Trivial { file: PathBuf, word: String },
    /// Schreier graph of level n.
    Schreier(GraphArgs),
    /// Tile adjacency graph of level n.
    Tiles(GraphArgs),
    /// Orbit counts of levels 0..=N.
    Transitive {
        file: PathBuf,
        #[arg(long, default_value_t = 6)]
        levels: usize,
    },
    /// Check transitivity on the first level and surjectivity of sections.
    SelfReplicating {
        file: PathBuf,
        /// Longest product of stabilizer generators to try.
        #[arg(long, default_value_t = 4)]
        cap: usize,
    },
    /// Search or verify a level partition bounding the dimension.
    DimCert(DimCertArgs),
    /// Is the limit space zero-dimensional?
    DimZero {
        file: PathBuf,
        /// Cap on the enumerated subgroup.
        #[arg(long, default_value_t = 10_000)]
        cap: usize,
    },
    /// Activity class of each generator, or of one word.
    Activity { file: PathBuf, word: Option<String> },
    /// Contraction test for groups of polynomial activity.
    Pold {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ARROW_CAP)]
        cap: usize,
    },
    /// One-page summary.
    Report { file: PathBuf },
}

#[derive(Args)]
struct GraphArgs {
    file: PathBuf,
    #[arg(short = 'n')]
    level: usize,
    /// dot, graphml or json.
    #[arg(long, default_value = "dot")]
    format: ExportFormat,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
struct DimCertArgs {
    #[command(subcommand)]
    verify: Option<DimCertCommand>,
    #[arg(required = true)]
    file: Option<PathBuf>,
    #[arg(short = 'n', required = true)]
    level: Option<usize>,
    #[arg(short = 'd', required = true)]
    d: Option<usize>,
    /// exhaustive, greedy or random.
    #[arg(long, default_value = "exhaustive")]
    strategy: Strategy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the certificate to this file.
    #[arg(long)]
    emit: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_ARROW_CAP)]
    arrow_cap: usize,
}

#[derive(Subcommand)]
enum DimCertCommand {
    /// Recheck a certificate file on its own.
    Verify { cert: PathBuf },
}

struct Fail {
    code: i32,
    message: String,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => EXIT_UNKNOWN,
            Error::UnsupportedFormat(_) | Error::WrongBackend(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Self { code: EXIT_IO, message: e.to_string() }
    }
}

type Outcome = Result<i32, Fail>;

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    // worker threads only compute; all writing happens here
    let jobs = cli.jobs;
    let mut buf: Vec<u8> = Vec::new();
    let mut diag: Vec<u8> = Vec::new();
    let result = par::with_jobs(jobs, || dispatch(&cli, &mut buf, &mut diag));
    let _ = out.write_all(&buf);
    let _ = err.write_all(&diag);
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load(cli: &Cli, file: &Path) -> Result<RecursionSystem, Fail> {
    let doc = dsl::SourceDoc::read(file)
        .map_err(|e| Fail { code: EXIT_DATA, message: format!("{}: {e}", file.display()) })?;
    let sys = dsl::parse(&doc)?;
    Ok(match cli.backend {
        None => sys,
        Some(BackendArg::Tree) => sys.with_backend(BackendDescriptor::Tree).map_err(Error::from)?,
        Some(BackendArg::Free) => sys.with_backend(BackendDescriptor::Free).map_err(Error::from)?,
    })
}

fn load_group(cli: &Cli, file: &Path) -> Result<Group, Fail> {
    Ok(Group::new(load(cli, file)?)?)
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Nucleus or an exit-2 failure explaining why there is none.
fn require_nucleus(group: &Group) -> Result<Nucleus, Fail> {
    match compute_nucleus(group, &NucleusOptions::default())? {
        ContractionStatus::Contracting(n) => Ok(n),
        ContractionStatus::NotContracting(w) => {
            Err(Fail { code: EXIT_NEGATIVE, message: format!("not contracting: {} at {}", w.element, w.vertex) })
        }
        ContractionStatus::Unknown(r) => Err(Fail { code: EXIT_UNKNOWN, message: format!("no nucleus: {}", r.reason) }),
    }
}

fn dispatch(cli: &Cli, out: &mut Vec<u8>, err: &mut Vec<u8>) -> Outcome {
    match &cli.command {
        Command::Parse { file } => {
            let sys = load(cli, file)?;
            Group::new(sys.clone())?;
            write!(out, "{}", dsl::serialize(&sys))?;
            Ok(EXIT_OK)
        }
        Command::Nucleus { file, budget, verify_only } => {
            let group = load_group(cli, file)?;
            let sys = group.system();
            if let Some(set) = verify_only {
                let elems = set
                    .split(',')
                    .map(|w| group.normalize(&sys.parse_word(w.trim())?))
                    .collect::<crate::Result<Vec<_>>>()?;
                let check = verify_nucleus(&group, &elems, NucleusOptions::default().n_max * 4)?;
                match check.depth {
                    Some(k) => writeln!(out, "stable from level {k}")?,
                    None => writeln!(out, "not stable")?,
                }
                writeln!(out, "contains identity: {}", yes(check.contains_identity))?;
                writeln!(out, "symmetric: {}", yes(check.symmetric))?;
                writeln!(out, "section-closed: {}", yes(check.section_closed))?;
                return Ok(if check.holds() { EXIT_OK } else { EXIT_NEGATIVE });
            }
            let opts = NucleusOptions { max_elements: *budget, ..Default::default() };
            match compute_nucleus(&group, &opts)? {
                ContractionStatus::Contracting(n) => {
                    writeln!(out, "contracting: {} elements, stable from level {}", n.len(), n.depth_witness())?;
                    for w in n.format(sys) {
                        writeln!(out, "{w}")?;
                    }
                    Ok(EXIT_OK)
                }
                ContractionStatus::NotContracting(w) => {
                    writeln!(out, "not contracting: {} at {} ({})", w.element, w.vertex, w.detail)?;
                    Ok(EXIT_NEGATIVE)
                }
                ContractionStatus::Unknown(r) => {
                    writeln!(out, "unknown")?;
                    writeln!(err, "{} ({} elements, {} rounds)", r.reason, r.elements, r.rounds)?;
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        Command::Order { file, word, cap } => {
            let group = load_group(cli, file)?;
            let w = group.system().parse_word(word)?;
            match order(&group, &w, OrderOptions { max_elements: *cap, ..Default::default() })? {
                Order::Finite(k) => writeln!(out, "{k}")?,
                Order::Infinite => writeln!(out, "infinite")?,
                Order::Unknown => {
                    writeln!(out, "unknown")?;
                    return Ok(EXIT_UNKNOWN);
                }
            }
            Ok(EXIT_OK)
        }
        Command::Trivial { file, word } => {
            let group = load_group(cli, file)?;
            let w = group.system().parse_word(word)?;
            let t = group.is_trivial(&w)?;
            writeln!(out, "{t}")?;
            Ok(if t { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Schreier(g) => {
            let sys = load(cli, &g.file)?;
            emit_graph(&export(&schreier(&sys, g.level), g.format), g.output.as_deref(), out, err)
        }
        Command::Tiles(g) => {
            let group = load_group(cli, &g.file)?;
            let n = require_nucleus(&group)?;
            emit_graph(&export(&tile_graph(&group, &n, g.level), g.format), g.output.as_deref(), out, err)
        }
        Command::Transitive { file, levels } => {
            let group = load_group(cli, file)?;
            let nucleus = match compute_nucleus(&group, &NucleusOptions::default())? {
                ContractionStatus::Contracting(n) => Some(n),
                _ => {
                    writeln!(err, "no nucleus; tile connectivity omitted")?;
                    None
                }
            };
            let rows = level_transitive(&group, nucleus.as_ref(), *levels);
            for r in &rows {
                write!(out, "level {}: {} orbit(s), transitive {}", r.level, r.orbits, yes(r.transitive))?;
                if let Some(c) = r.tile_connected {
                    write!(out, ", tiles connected {}", yes(c))?;
                }
                writeln!(out)?;
            }
            Ok(if rows.iter().all(|r| r.transitive) { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::SelfReplicating { file, cap } => {
            let group = load_group(cli, file)?;
            let sys = group.system();
            match self_replicating_check(&group, *cap)? {
                SelfReplication::Yes { witnesses } => {
                    writeln!(out, "self-replicating")?;
                    for (g, w) in witnesses {
                        writeln!(out, "{g} = ({w})|_{}", sys.alphabet().symbol(0))?;
                    }
                    Ok(EXIT_OK)
                }
                SelfReplication::Intransitive { orbits } => {
                    writeln!(out, "not self-replicating: {orbits} orbits on the first level")?;
                    Ok(EXIT_NEGATIVE)
                }
                SelfReplication::NotSurjective { image_order, missing } => {
                    writeln!(
                        out,
                        "not self-replicating: sections at {} form a group of order {image_order} without {missing}",
                        sys.alphabet().symbol(0)
                    )?;
                    Ok(EXIT_NEGATIVE)
                }
                SelfReplication::Unknown => {
                    writeln!(out, "unknown")?;
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        Command::DimCert(args) => dim_cert(cli, args, out, err),
        Command::DimZero { file, cap } => {
            let group = load_group(cli, file)?;
            let n = require_nucleus(&group)?;
            match dim_zero_test(&group, &n, *cap)? {
                DimZero::Yes { order } => {
                    writeln!(out, "zero-dimensional: the nucleus generates a group of order {order}")?;
                    Ok(EXIT_OK)
                }
                DimZero::No { witness } => {
                    writeln!(out, "not zero-dimensional: {witness} has infinite order")?;
                    Ok(EXIT_NEGATIVE)
                }
                DimZero::Unknown => {
                    writeln!(out, "unknown")?;
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        Command::Activity { file, word } => {
            let group = load_group(cli, file)?;
            let sys = group.system();
            let targets: Vec<(String, GroupWord)> = match word {
                Some(w) => vec![(w.clone(), sys.parse_word(w)?)],
                None => (0..sys.generators().len()).map(|g| (sys.gen_name(g).to_string(), GroupWord::gen(g))).collect(),
            };
            for (name, w) in targets {
                let class = activity_class(&group, &w)?;
                let counts = activity_counts(&group, &w, 6)?;
                let counts: Vec<String> = counts.iter().map(u64::to_string).collect();
                writeln!(out, "{name}: {class}, activity {}", counts.join(" "))?;
            }
            Ok(EXIT_OK)
        }
        Command::Pold { file, cap } => {
            let sys = load(cli, file)?;
            let r = pold_contraction_test(&sys, *cap)?;
            for (g, c) in &r.classes {
                writeln!(out, "{g}: {c}")?;
            }
            if let Some(s) = &r.setup {
                writeln!(out, "level {}, returning words {}, arrows {}", s.level, s.fixed_words.join(" "), s.arrows)?;
            }
            match r.outcome {
                PoldOutcome::Contracting(n) => {
                    writeln!(out, "contracting: nucleus {}", n.format(&sys).join(" "))?;
                    Ok(EXIT_OK)
                }
                PoldOutcome::NotContracting(w) => {
                    let lens: Vec<String> = w.power_lengths.iter().map(usize::to_string).collect();
                    writeln!(
                        out,
                        "not contracting: loop at {} by {} of infinite order (power lengths {})",
                        w.vertex,
                        w.element,
                        lens.join(" ")
                    )?;
                    Ok(EXIT_NEGATIVE)
                }
                PoldOutcome::NotApplicable(why) => {
                    writeln!(out, "not applicable: {why}")?;
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        Command::Report { file } => report(cli, file, out),
    }
}

fn emit_graph(text: &str, path: Option<&Path>, out: &mut Vec<u8>, err: &mut Vec<u8>) -> Outcome {
    match path {
        Some(p) => {
            std::fs::write(p, text)?;
            writeln!(err, "wrote {}", p.display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn dim_cert(cli: &Cli, args: &DimCertArgs, out: &mut Vec<u8>, err: &mut Vec<u8>) -> Outcome {
    if let Some(DimCertCommand::Verify { cert }) = &args.verify {
        let text = std::fs::read_to_string(cert)
            .map_err(|e| Fail { code: EXIT_DATA, message: format!("{}: {e}", cert.display()) })?;
        let json: CertificateJson = serde_json::from_str(&text)
            .map_err(|e| Fail { code: EXIT_DATA, message: format!("{}: {e}", cert.display()) })?;
        let check = verify_certificate(&json, args.arrow_cap)?;
        if check.certified {
            writeln!(out, "certified: dimension at most {}", json.d)?;
            return Ok(EXIT_OK);
        }
        writeln!(out, "not certified")?;
        for p in &check.problems {
            writeln!(err, "{p}")?;
        }
        return Ok(EXIT_NEGATIVE);
    }
    let (Some(file), Some(level), Some(d)) = (&args.file, args.level, args.d) else {
        return Err(Fail { code: EXIT_USAGE, message: "dim-cert needs FILE, -n and -d".into() });
    };
    let group = load_group(cli, file)?;
    let nucleus = require_nucleus(&group)?;
    let mut opts = SearchOptions { strategy: args.strategy, seed: args.seed, ..Default::default() };
    opts.verify.arrow_cap = args.arrow_cap;
    match search_partition(&group, level, d, &GeneratingSet::nucleus(&nucleus), &opts)? {
        SearchOutcome::Certified(cert) => {
            let json = certificate_json(group.system(), &cert);
            let text = serde_json::to_string_pretty(&json).expect("certificate serializes") + "\n";
            if let Some(p) = &args.emit {
                std::fs::write(p, &text)?;
                writeln!(err, "wrote {}", p.display())?;
            }
            out.write_all(text.as_bytes())?;
            Ok(EXIT_OK)
        }
        SearchOutcome::NotFound { log } => {
            writeln!(out, "not certified")?;
            for line in log {
                writeln!(err, "{line}")?;
            }
            Ok(EXIT_NEGATIVE)
        }
    }
}

fn report(cli: &Cli, file: &Path, out: &mut Vec<u8>) -> Outcome {
    let group = load_group(cli, file)?;
    let sys = group.system();
    writeln!(out, "system: {} letters, {} generators", sys.degree(), sys.generators().len())?;
    let status = compute_nucleus(&group, &NucleusOptions::default())?;
    let nucleus = match &status {
        ContractionStatus::Contracting(n) => {
            writeln!(out, "contraction: contracting, nucleus of {} elements", n.len())?;
            writeln!(out, "nucleus: {}", n.format(sys).join(" "))?;
            Some(n)
        }
        ContractionStatus::NotContracting(w) => {
            writeln!(out, "contraction: not contracting ({} at {})", w.element, w.vertex)?;
            None
        }
        ContractionStatus::Unknown(r) => {
            writeln!(out, "contraction: unknown ({})", r.reason)?;
            None
        }
    };
    let levels = if sys.degree() > 4 { 3 } else { 5 };
    let rows = level_transitive(&group, nucleus, levels);
    let orbits: Vec<String> = rows.iter().map(|r| r.orbits.to_string()).collect();
    writeln!(out, "orbits on levels 0..={levels}: {}", orbits.join(" "))?;
    writeln!(out, "level-transitive up to {levels}: {}", yes(rows.iter().all(|r| r.transitive)))?;
    if let Some(n) = nucleus {
        let connected: Vec<&str> = rows.iter().filter_map(|r| r.tile_connected).map(yes).collect();
        writeln!(out, "tile graphs connected: {}", connected.join(" "))?;
        let dimension = dimension_report(&group, 1..=2, 0..=2, &GeneratingSet::nucleus(n), &SearchOptions::default())?;
        match dimension.best_bound {
            Some(d) => writeln!(out, "dimension: at most {d} (levels 1..=2, d 0..=2)")?,
            None => writeln!(out, "dimension: no certificate on levels 1..=2 with d <= 2")?,
        }
    }
    for g in 0..sys.generators().len() {
        writeln!(out, "activity {}: {}", sys.gen_name(g), activity_class(&group, &GroupWord::gen(g))?)?;
    }
    if !sys.generators().is_empty() {
        let pold = pold_contraction_test(sys, DEFAULT_ARROW_CAP)?;
        let verdict = match pold.outcome {
            PoldOutcome::Contracting(n) => format!("contracting, nucleus of {} elements", n.len()),
            PoldOutcome::NotContracting(w) => format!("not contracting, loop at {} by {}", w.vertex, w.element),
            PoldOutcome::NotApplicable(why) => format!("not applicable ({why})"),
        };
        writeln!(out, "polynomial-activity test: {verdict}")?;
    }
    Ok(EXIT_OK)
}
