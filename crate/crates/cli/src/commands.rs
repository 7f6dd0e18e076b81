use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use esg_core::esg::{
    export_to_dir, import_from_dir, BuildOptions, EsgMeta, QueueDiscipline, StorageKind,
};
use esg_core::ingest::ntriples::parse_term;
use esg_core::ingest::{load_paths, Dictionary, IngestReport, Term, TripleStore};
use esg_core::metrics::{full_report, write_report_dir, EmptinessBasis, ExtensionParams};
use esg_core::pipeline::{run_entities, run_properties, Phase};
use esg_core::select::{expand_ground_terms, Denylist, GroundIds, GroundTerms, Mode};
use esg_core::EquivalenceSetGraph;
use serde::Serialize;

use crate::config::{Backend, Discipline, RunConfig, RunMode, Scope};
use crate::Failure;

/// Largest graph `export-dot` will draw.
pub const DOT_NODE_LIMIT: usize = 10_000;

#[derive(Serialize)]
struct IngestSummary<'a> {
    inputs: &'a [PathBuf],
    #[serde(flatten)]
    report: IngestReport,
    denylisted: usize,
    triples: usize,
}

fn load_store(
    inputs: &[PathBuf],
    scope: Scope,
    extra_deny: &[String],
    default_denylist: bool,
) -> Result<(TripleStore, IngestReport, usize), Failure> {
    let (mut store, report) = load_paths(inputs, scope.into())?;
    let mut deny = if default_denylist {
        Denylist::default()
    } else {
        Denylist::empty()
    };
    for line in extra_deny {
        deny.push_line(line)?;
    }
    let removed = deny.apply(&mut store);
    log::info!(
        "loaded {} triples ({} parsed, {} duplicates, {} malformed, {} denylisted)",
        store.triple_count(),
        report.parsed,
        report.deduplicated,
        report.skipped,
        removed
    );
    Ok((store, report, removed))
}

fn options(cfg: &RunConfig, dir: &Path, name: &str) -> BuildOptions {
    BuildOptions {
        discipline: match cfg.discipline {
            Discipline::Fifo => QueueDiscipline::Fifo,
            Discipline::Lifo => QueueDiscipline::Lifo,
        },
        storage: match cfg.storage {
            Backend::Memory => StorageKind::Memory,
            Backend::Disk => StorageKind::Disk(dir.join(format!(".{name}.redb"))),
        },
    }
}

fn write_phase(
    phase: &Phase,
    store: &TripleStore,
    mode: Mode,
    ground: &GroundTerms,
    dir: &Path,
) -> Result<(), Failure> {
    let log = phase.esg.log();
    log::info!(
        "{mode}: {} fixpoint cycles, {} sets, {} edges, {} merges, {} selected entities",
        log.cycles,
        phase.esg.set_count(),
        phase.esg.edge_count(),
        log.merges,
        phase.selection.len()
    );
    let meta = EsgMeta::describe(&phase.esg, store.dictionary(), mode, ground)?;
    export_to_dir(&phase.esg, store.dictionary(), dir, &meta)?;
    Ok(())
}

pub fn build(cfg: &RunConfig) -> Result<(), Failure> {
    let (mut store, report, denylisted) = load_store(
        &cfg.inputs,
        cfg.bnode_scope,
        &cfg.denylist,
        cfg.default_denylist,
    )?;
    let ids = GroundIds::resolve(&mut store, &cfg.ground);
    std::fs::create_dir_all(&cfg.output)?;

    let (prop_dir, class_dir) = match cfg.mode {
        RunMode::Both => (cfg.output.join("properties"), cfg.output.join("classes")),
        _ => (cfg.output.clone(), cfg.output.clone()),
    };

    let mut imported = None;
    let mut built = None;
    if matches!(cfg.mode, RunMode::Properties | RunMode::Both) {
        let phase = run_properties(&store, &ids, &options(cfg, &cfg.output, "properties"))?;
        write_phase(&phase, &store, Mode::Properties, &cfg.ground, &prop_dir)?;
        built = Some(phase);
    }
    if matches!(cfg.mode, RunMode::Classes | RunMode::Both) {
        let properties: &EquivalenceSetGraph = match &built {
            Some(phase) => &phase.esg,
            None => {
                let dir = cfg.property_esg.as_ref().expect("validated");
                let (esg, _) = import_from_dir(dir, store.dictionary_mut())?;
                &*imported.insert(esg)
            }
        };
        let phase = run_entities(
            &store,
            &ids,
            properties,
            Mode::Classes,
            &options(cfg, &cfg.output, "classes"),
        )?;
        write_phase(&phase, &store, Mode::Classes, &cfg.ground, &class_dir)?;
    }

    let summary = IngestSummary {
        inputs: &cfg.inputs,
        report,
        denylisted,
        triples: store.triple_count(),
    };
    let mut out = BufWriter::new(File::create(cfg.output.join("ingest.json"))?);
    serde_json::to_writer_pretty(&mut out, &summary)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// Directory written by `build` (one mode).
    #[arg(long, value_name = "DIR")]
    pub esg: PathBuf,
    /// The N-Triples the ESG was built from; repeatable.
    #[arg(short, long = "input", value_name = "PATH", required = true)]
    pub inputs: Vec<PathBuf>,
    /// Where to write report.json and the CSVs; defaults to the ESG directory.
    #[arg(short, long, value_name = "DIR")]
    pub output: Option<PathBuf>,
    /// Overrides the mode recorded in meta.json.
    #[arg(long, value_enum)]
    pub mode: Option<MetricsMode>,
    #[arg(long, value_enum, default_value = "indirect")]
    pub emptiness: Emptiness,
    #[arg(long, value_enum, default_value = "per-source")]
    pub bnode_scope: Scope,
    #[arg(long)]
    pub no_default_denylist: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MetricsMode {
    Classes,
    Properties,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emptiness {
    Direct,
    Indirect,
}

pub fn metrics(args: &MetricsArgs) -> Result<(), Failure> {
    let (mut store, _, _) = load_store(
        &args.inputs,
        args.bnode_scope,
        &[],
        !args.no_default_denylist,
    )?;
    let (esg, meta) = import_from_dir(&args.esg, store.dictionary_mut())?;
    let meta = meta.unwrap_or_default();
    let mode = match args.mode {
        Some(MetricsMode::Classes) => Mode::Classes,
        Some(MetricsMode::Properties) => Mode::Properties,
        None => meta.mode,
    };
    let ids = GroundIds::resolve(&mut store, &meta.ground);
    let type_closure = match mode {
        Mode::Properties => BTreeSet::new(),
        _ => expand_ground_terms(&store, &ids, Mode::Classes)?.type_predicates,
    };
    let params = ExtensionParams {
        mode,
        type_closure,
        emptiness: match args.emptiness {
            Emptiness::Direct => EmptinessBasis::Direct,
            Emptiness::Indirect => EmptinessBasis::Indirect,
        },
    };
    let full = full_report(&esg, &store, &params)?;
    let out = args.output.clone().unwrap_or_else(|| args.esg.clone());
    write_report_dir(&full, &out)?;
    log::info!(
        "{mode}: ES={} OE={} E={} H_max={}",
        full.report.es,
        full.report.oe,
        full.report.e,
        full.report.h_max
    );
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QueryOp {
    Set,
    Supers,
    Subs,
    Closure,
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    #[arg(long, value_name = "DIR")]
    pub esg: PathBuf,
    /// IRI, or any term in N-Triples syntax.
    #[arg(long, value_name = "TERM")]
    pub term: String,
    #[arg(long, value_enum, default_value = "set")]
    pub op: QueryOp,
}

fn parse_query_term(text: &str) -> Result<Term, Failure> {
    if text.starts_with('<') || text.starts_with("_:") || text.starts_with('"') {
        parse_term(text).map_err(|e| Failure::user("parse", format!("{text}: {e}")))
    } else {
        Ok(Term::iri(text))
    }
}

/// One line per term. Super and sub sets print as `set<TAB>term`.
pub fn query(args: &QueryArgs) -> Result<String, Failure> {
    let term = parse_query_term(&args.term)?;
    let mut dict = Dictionary::new();
    let (esg, _) = import_from_dir(&args.esg, &mut dict)?;
    let not_found = || Failure::user("not_found", format!("not found: {}", args.term));
    let id = dict.get(&term).ok_or_else(not_found)?;
    let set = esg.set_of(id)?.ok_or_else(not_found)?;

    let name = |t| dict.lookup(t).map(|r| r.to_string());
    let mut out = String::new();
    match args.op {
        QueryOp::Set | QueryOp::Closure => {
            let terms = match args.op {
                QueryOp::Set => esg.members(set)?.into_iter().collect::<BTreeSet<_>>(),
                _ => esg.closure_of(id)?,
            };
            let mut names = terms.into_iter().map(name).collect::<Result<Vec<_>, _>>()?;
            names.sort();
            for n in names {
                writeln!(out, "{n}").expect("write to string");
            }
        }
        QueryOp::Supers | QueryOp::Subs => {
            let sets = match args.op {
                QueryOp::Supers => esg.supers(set)?,
                _ => esg.subs(set)?,
            };
            for s in sets {
                let mut names = esg
                    .members(s)?
                    .into_iter()
                    .map(name)
                    .collect::<Result<Vec<_>, _>>()?;
                names.sort();
                for n in names {
                    writeln!(out, "{s}\t{n}").expect("write to string");
                }
            }
        }
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub struct DotArgs {
    #[arg(long, value_name = "DIR")]
    pub esg: PathBuf,
    /// Output file; stdout when absent.
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn export_dot(args: &DotArgs) -> Result<(), Failure> {
    let mut dict = Dictionary::new();
    let (esg, _) = import_from_dir(&args.esg, &mut dict)?;
    if esg.set_count() > DOT_NODE_LIMIT {
        return Err(Failure::user(
            "too_large",
            format!(
                "{} equivalence sets; DOT export is limited to {DOT_NODE_LIMIT}",
                esg.set_count()
            ),
        ));
    }
    let mut text = String::from("digraph esg {\n  node [shape=box];\n");
    for (set, members) in esg.partition()? {
        let mut names = members
            .into_iter()
            .map(|t| dict.lookup(t).map(|r| dot_escape(&r.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        names.sort();
        writeln!(text, "  {set} [label=\"{}\"];", names.join("\\n")).expect("write to string");
    }
    for (sub, sup) in esg.edges()? {
        writeln!(text, "  {sub} -> {sup};").expect("write to string");
    }
    text.push_str("}\n");
    match &args.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
