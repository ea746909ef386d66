//! Command implementations behind the `wsdisco` binary.
//!
//! Each command writes to the given output and error streams and returns the
//! process exit code: 0 success, 1 invalid input, 2 a simulation that broke
//! one of its invariants (for example a stale result).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use wsdisco_core::adverts::{
    parse_advert, Advertisement, ModuleClassId, ModuleSpecAdvertisement, PeerId, ServiceSketch,
};
use wsdisco_core::index::{FieldWeights, IndexError, InvertedIndex, SearchResult, DEFAULT_K};
use wsdisco_core::scenario::{phone_relay_scenario, Action, ScenarioConfig, ServiceSpec, DEFAULT_CLASS_NAME};
use wsdisco_core::simnet::{render_trace, run_scenario, TraceStyle};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wsdisco", version, about = "Web service discovery over a simulated peer-to-peer overlay")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write its report.
    Run(RunArgs),
    /// Check a scenario file without running it.
    ValidateScenario(ValidateArgs),
    /// Index a directory of `*.msa.xml` files and query it.
    SearchCorpus(SearchArgs),
    /// Write the built-in evaluation scenario and its services as files.
    Example(ExampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceStyleArg {
    Event,
    Delivery,
}

impl From<TraceStyleArg> for TraceStyle {
    fn from(style: TraceStyleArg) -> Self {
        match style {
            TraceStyleArg::Event => TraceStyle::Event,
            TraceStyleArg::Delivery => TraceStyle::Delivery,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report destination; the text summary always goes to stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the event trace here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "event")]
    pub trace_style: TraceStyleArg,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long)]
    pub query: String,
    #[arg(short, long, default_value_t = DEFAULT_K)]
    pub k: usize,
    /// Field weights as `name,description,wsdl`.
    #[arg(long, value_parser = parse_weights, default_value = "3,2,1")]
    pub weights: FieldWeights,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    /// Directory that receives `scenarios/phone-relay.json` and `corpus/`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn parse_weights(s: &str) -> Result<FieldWeights, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [n, d, w] = parts.as_slice() else {
        return Err("expected three comma-separated numbers".into());
    };
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    FieldWeights::new(num(n)?, num(d)?, num(w)?).map_err(|e| e.to_string())
}

pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match cli.command {
        Command::Run(args) => cmd_run(&args, out, err),
        Command::ValidateScenario(args) => cmd_validate(&args, out, err),
        Command::SearchCorpus(args) => cmd_search_corpus(&args, out, err),
        Command::Example(args) => cmd_example(&args, out, err),
    }
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let scenario = match ScenarioConfig::load(&args.scenario) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "invalid scenario: {e}");
            return EXIT_INVALID;
        }
    };
    let output = match run_scenario(&scenario, args.seed) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "invalid scenario: {e}");
            return EXIT_INVALID;
        }
    };
    let report = output.report();
    if let Some(path) = &args.report {
        if let Err(e) = write_atomic(path, format!("{}\n", report.to_json()).as_bytes()) {
            let _ = writeln!(err, "cannot write report {}: {e}", path.display());
            return EXIT_INVALID;
        }
    }
    if let Some(path) = &args.trace {
        let text = render_trace(&output.trace, args.trace_style.into());
        if let Err(e) = write_atomic(path, text.as_bytes()) {
            let _ = writeln!(err, "cannot write trace {}: {e}", path.display());
            return EXIT_INVALID;
        }
    }
    let _ = write!(out, "{}", report.to_text());
    violation_exit(&output.metrics.violations(), err)
}

fn violation_exit(violations: &[String], err: &mut dyn Write) -> i32 {
    if violations.is_empty() {
        return EXIT_OK;
    }
    for v in violations {
        let _ = writeln!(err, "invariant violated: {v}");
    }
    EXIT_VIOLATION
}

pub fn cmd_validate(args: &ValidateArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let resolved = ScenarioConfig::load(&args.scenario).and_then(|s| s.resolve());
    match resolved {
        Ok(r) => {
            let _ = writeln!(
                out,
                "ok: {} peers, {} groups, {} scheduled actions, horizon {} ms",
                r.peers.len(),
                r.groups.len(),
                r.schedule.len(),
                r.horizon_ms
            );
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "invalid scenario: {e}");
            EXIT_INVALID
        }
    }
}

/// A parsed corpus: adverts in file-name order, plus warnings for files
/// that were skipped.
#[derive(Debug, Default)]
pub struct Corpus {
    pub adverts: Vec<ModuleSpecAdvertisement>,
    pub warnings: Vec<String>,
}

pub fn load_corpus(dir: &Path) -> io::Result<Corpus> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".msa.xml")))
        .collect();
    files.sort();
    let mut corpus = Corpus::default();
    for file in files {
        let shown = file.display();
        let text = match fs::read_to_string(&file) {
            Ok(t) => t,
            Err(e) => {
                corpus.warnings.push(format!("{shown}: {e}"));
                continue;
            }
        };
        match parse_advert(&text) {
            Ok(Advertisement::Spec(msa)) => {
                if corpus.adverts.iter().any(|a| a.msid == msa.msid) {
                    corpus.warnings.push(format!("{shown}: duplicate {}", msa.msid));
                } else {
                    corpus.adverts.push(msa);
                }
            }
            Ok(Advertisement::Class(_)) => corpus.warnings.push(format!("{shown}: not an MSA")),
            Err(e) => corpus.warnings.push(format!("{shown}: {e}")),
        }
    }
    Ok(corpus)
}

pub fn search_corpus(
    corpus: &Corpus,
    query: &str,
    k: usize,
    weights: &FieldWeights,
) -> Result<SearchResult, IndexError> {
    let mut index = InvertedIndex::new();
    for advert in &corpus.adverts {
        index.index_advert(advert, weights)?;
    }
    index.search(query, k)
}

pub fn cmd_search_corpus(args: &SearchArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let corpus = match load_corpus(&args.dir) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "cannot read {}: {e}", args.dir.display());
            return EXIT_INVALID;
        }
    };
    for w in &corpus.warnings {
        let _ = writeln!(err, "warning: skipping {w}");
    }
    match search_corpus(&corpus, &args.query, args.k, &args.weights) {
        Ok(result) => {
            for (rank, hit) in result.hits.iter().enumerate() {
                let name = corpus.adverts.iter().find(|a| a.msid == hit.msid).map_or("", |a| a.name.as_str());
                let _ = writeln!(out, "{} {:.6} {} {}", rank + 1, hit.score, hit.msid, name);
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}

/// The services published in the built-in scenario, built exactly as the
/// simulator builds them.
pub fn example_corpus() -> Vec<(String, ModuleSpecAdvertisement)> {
    let scenario = phone_relay_scenario();
    let class = ModuleClassId::derive(DEFAULT_CLASS_NAME);
    let mut adverts = Vec::new();
    for item in &scenario.schedule {
        let Action::Publish { peer, service: ServiceSpec::Inline { name, description, operations, .. }, .. } =
            &item.action
        else {
            continue;
        };
        let host = PeerId::derive(peer);
        let msa = ServiceSketch { class_id: &class, host: &host, name, description, operations }
            .build()
            .expect("built-in services are valid");
        let file = format!("{}.msa.xml", name.trim_end_matches("Service").to_lowercase());
        adverts.push((file, msa));
    }
    adverts
}

pub fn cmd_example(args: &ExampleArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let corpus_dir = args.out.join("corpus");
    let scenario_dir = args.out.join("scenarios");
    let result = fs::create_dir_all(&corpus_dir).and_then(|_| fs::create_dir_all(&scenario_dir)).and_then(|_| {
        write_atomic(
            &scenario_dir.join("phone-relay.json"),
            format!("{}\n", phone_relay_scenario().to_json()).as_bytes(),
        )?;
        for (file, msa) in example_corpus() {
            write_atomic(&corpus_dir.join(file), msa.to_xml().as_bytes())?;
        }
        Ok(())
    });
    match result {
        Ok(()) => {
            let _ = writeln!(out, "wrote {}", args.out.display());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "cannot write {}: {e}", args.out.display());
            EXIT_INVALID
        }
    }
}
