//! TSV export and import.
//!
//! Four tab-separated files, one entry per line, terms in N-Triples
//! syntax (tabs inside literals escaped as `\t`):
//!
//! * `id.tsv`: `term \t esid`
//! * `is.tsv`: `esid \t term`
//! * `h.tsv`, `hminus.tsv`: `esid \t esid`
//!
//! plus `meta.json` describing how the graph was built.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Adjacency, EquivalenceSetGraph, EsId};
use crate::error::{Error, Result};
use crate::ingest::ntriples::parse_term;
use crate::ingest::{Dictionary, TermId, TermKind, TermRef};
use crate::select::{GroundTerms, Mode};

pub const ID_FILE: &str = "id.tsv";
pub const IS_FILE: &str = "is.tsv";
pub const H_FILE: &str = "h.tsv";
pub const HMINUS_FILE: &str = "hminus.tsv";
pub const META_FILE: &str = "meta.json";

/// One reader or writer per map.
pub struct EsgFiles<T> {
    pub id: T,
    pub is: T,
    pub h: T,
    pub hminus: T,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaCycle {
    pub equivalence_predicates: Vec<String>,
    pub specialization_predicates: Vec<String>,
}

/// Contents of `meta.json`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EsgMeta {
    pub mode: Mode,
    pub ground: GroundTerms,
    /// Every predicate folded in as equivalence (`P′_e`).
    pub equivalence_predicates: Vec<String>,
    /// Every predicate folded in as specialization (`P′_s`).
    pub specialization_predicates: Vec<String>,
    pub cycles: usize,
    pub cycle_details: Vec<MetaCycle>,
    pub sets: usize,
    pub terms: usize,
    pub edges: usize,
    pub merges: usize,
    pub edges_added: usize,
    pub case_executions: usize,
    pub skipped_literal_triples: usize,
    pub singletons_materialized: usize,
    pub backend: String,
}

impl EsgMeta {
    pub fn describe(
        esg: &EquivalenceSetGraph,
        dict: &Dictionary,
        mode: Mode,
        ground: &GroundTerms,
    ) -> Result<Self> {
        let names = |ids: &mut dyn Iterator<Item = TermId>| -> Result<Vec<String>> {
            let mut v = ids
                .map(|t| dict.lookup(t).map(|r| r.to_string()))
                .collect::<Result<Vec<_>>>()?;
            v.sort();
            Ok(v)
        };
        let log = esg.log();
        let cycle_details = log
            .cycle_details
            .iter()
            .map(|c| {
                Ok(MetaCycle {
                    equivalence_predicates: names(&mut c.equivalence_predicates.iter().copied())?,
                    specialization_predicates: names(
                        &mut c.specialization_predicates.iter().copied(),
                    )?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(EsgMeta {
            mode,
            ground: ground.clone(),
            equivalence_predicates: names(&mut esg.processed_eq().iter().copied())?,
            specialization_predicates: names(&mut esg.processed_sub().iter().copied())?,
            cycles: log.cycles,
            cycle_details,
            sets: esg.set_count(),
            terms: esg.term_count(),
            edges: esg.edge_count(),
            merges: log.merges,
            edges_added: log.edges_added,
            case_executions: log.case_executions,
            skipped_literal_triples: log.skipped_literal_triples,
            singletons_materialized: log.singletons_materialized,
            backend: esg.backend_name().to_owned(),
        })
    }
}

fn tsv_term(term: TermRef<'_>) -> String {
    let text = term.to_string();
    if term.kind == TermKind::Literal && text.contains('\t') {
        text.replace('\t', "\\t")
    } else {
        text
    }
}

/// Writes the four maps. Lines are ordered by set id, then term text, so
/// equal graphs produce equal bytes.
pub fn export<W: Write>(
    esg: &EquivalenceSetGraph,
    dict: &Dictionary,
    files: EsgFiles<W>,
) -> Result<()> {
    let EsgFiles {
        mut id,
        mut is,
        mut h,
        mut hminus,
    } = files;
    for (set, members) in esg.partition()? {
        let mut names = members
            .into_iter()
            .map(|t| dict.lookup(t).map(tsv_term))
            .collect::<Result<Vec<_>>>()?;
        names.sort();
        for name in names {
            writeln!(id, "{name}\t{}", set.0)?;
            writeln!(is, "{}\t{name}", set.0)?;
        }
        for sup in esg.supers(set)? {
            writeln!(h, "{}\t{}", set.0, sup.0)?;
        }
        for sub in esg.subs(set)? {
            writeln!(hminus, "{}\t{}", set.0, sub.0)?;
        }
    }
    id.flush()?;
    is.flush()?;
    h.flush()?;
    hminus.flush()?;
    Ok(())
}

pub fn export_to_dir(
    esg: &EquivalenceSetGraph,
    dict: &Dictionary,
    dir: &Path,
    meta: &EsgMeta,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let open = |name: &str| -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(dir.join(name))?))
    };
    export(
        esg,
        dict,
        EsgFiles {
            id: open(ID_FILE)?,
            is: open(IS_FILE)?,
            h: open(H_FILE)?,
            hminus: open(HMINUS_FILE)?,
        },
    )?;
    let mut out = open(META_FILE)?;
    serde_json::to_writer_pretty(&mut out, meta)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn parse_err(file: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: PathBuf::from(file),
        line: line as u64,
        message: message.into(),
    }
}

/// Yields `(line number, left, right)` for every non-empty line.
fn tsv_rows<R: BufRead>(
    reader: R,
    file: &'static str,
) -> impl Iterator<Item = Result<(usize, String, String)>> {
    reader.lines().enumerate().filter_map(move |(i, line)| {
        let line_no = i + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(Error::Io(e))),
        };
        if line.trim().is_empty() {
            return None;
        }
        Some(match line.split_once('\t') {
            Some((a, b)) if !b.contains('\t') => Ok((line_no, a.to_owned(), b.to_owned())),
            _ => Err(parse_err(file, line_no, "expected exactly two tab-separated columns")),
        })
    })
}

fn parse_esid(text: &str, file: &str, line: usize) -> Result<EsId> {
    text.trim()
        .parse::<u64>()
        .map(EsId)
        .map_err(|_| parse_err(file, line, format!("invalid set id '{text}'")))
}

fn intern_tsv(text: &str, dict: &mut Dictionary, file: &str, line: usize) -> Result<TermId> {
    let term = parse_term(text).map_err(|e| parse_err(file, line, format!("invalid term: {e}")))?;
    Ok(dict.resolve(&term))
}

/// Reads the four maps back, interning terms into `dict`. The files must
/// agree with each other: ID must be the inverse of IS, and H⁻ the mirror
/// of H.
pub fn import<R: BufRead>(files: EsgFiles<R>, dict: &mut Dictionary) -> Result<EquivalenceSetGraph> {
    let mut sets: BTreeMap<EsId, Vec<TermId>> = BTreeMap::new();
    let mut owner: HashMap<TermId, EsId> = HashMap::new();
    for row in tsv_rows(files.is, IS_FILE) {
        let (line, set, term) = row?;
        let set = parse_esid(&set, IS_FILE, line)?;
        let term = intern_tsv(&term, dict, IS_FILE, line)?;
        if let Some(prev) = owner.insert(term, set) {
            return Err(parse_err(
                IS_FILE,
                line,
                format!("term already belongs to set {}", prev.0),
            ));
        }
        sets.entry(set).or_default().push(term);
    }

    let mut id_entries = 0usize;
    for row in tsv_rows(files.id, ID_FILE) {
        let (line, term, set) = row?;
        let term = intern_tsv(&term, dict, ID_FILE, line)?;
        let set = parse_esid(&set, ID_FILE, line)?;
        if owner.get(&term) != Some(&set) {
            return Err(parse_err(ID_FILE, line, "entry disagrees with is.tsv"));
        }
        id_entries += 1;
    }
    if id_entries != owner.len() {
        return Err(parse_err(
            ID_FILE,
            id_entries,
            format!("{id_entries} entries but is.tsv has {} terms", owner.len()),
        ));
    }

    let mut esg = EquivalenceSetGraph::new();
    let next = sets.keys().next_back().map_or(0, |id| id.0 + 1);
    for (&set, members) in &sets {
        esg.storage_mut().create_set(set, members)?;
    }

    for (reader, file, dir) in [
        (files.h, H_FILE, Adjacency::Supers),
        (files.hminus, HMINUS_FILE, Adjacency::Subs),
    ] {
        for row in tsv_rows(reader, file) {
            let (line, a, b) = row?;
            let a = parse_esid(&a, file, line)?;
            let b = parse_esid(&b, file, line)?;
            for x in [a, b] {
                if !sets.contains_key(&x) {
                    return Err(parse_err(file, line, format!("unknown set id {}", x.0)));
                }
            }
            esg.storage_mut().insert_adjacent(dir, a, b)?;
        }
    }

    for set in sets.keys() {
        for sup in esg.supers(*set)? {
            if !esg.subs(sup)?.contains(set) {
                return Err(parse_err(
                    HMINUS_FILE,
                    0,
                    format!("missing mirror entry {}\t{}", sup.0, set.0),
                ));
            }
        }
    }
    if esg.storage_mut().adjacency_len(Adjacency::Supers)
        != esg.storage_mut().adjacency_len(Adjacency::Subs)
    {
        return Err(parse_err(HMINUS_FILE, 0, "h.tsv and hminus.tsv differ in size"));
    }
    esg.set_next_id(next);
    Ok(esg)
}

/// Imports a directory written by [`export_to_dir`]. `meta.json` is
/// optional.
pub fn import_from_dir(
    dir: &Path,
    dict: &mut Dictionary,
) -> Result<(EquivalenceSetGraph, Option<EsgMeta>)> {
    let open = |name: &str| -> Result<BufReader<File>> {
        let path = dir.join(name);
        File::open(&path).map(BufReader::new).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
        })
    };
    let files = EsgFiles {
        id: open(ID_FILE)?,
        is: open(IS_FILE)?,
        h: open(H_FILE)?,
        hminus: open(HMINUS_FILE)?,
    };
    let mut esg = import(files, dict).map_err(|e| match e {
        Error::Parse {
            path,
            line,
            message,
        } => Error::Parse {
            path: dir.join(path),
            line,
            message,
        },
        other => other,
    })?;

    let meta_path = dir.join(META_FILE);
    let meta = if meta_path.exists() {
        let meta: EsgMeta = serde_json::from_reader(BufReader::new(File::open(&meta_path)?))?;
        for (names, equivalence) in [
            (&meta.equivalence_predicates, true),
            (&meta.specialization_predicates, false),
        ] {
            for name in names {
                if let Ok(term) = parse_term(name) {
                    let id = dict.resolve(&term);
                    esg.mark_processed(id, equivalence);
                }
            }
        }
        esg.log_mut().cycles = meta.cycles;
        Some(meta)
    } else {
        None
    };
    Ok((esg, meta))
}
