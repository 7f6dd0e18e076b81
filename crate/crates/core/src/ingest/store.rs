use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dictionary::{Dictionary, TermRef};
use super::ntriples::{self, RawTerm, RawTriple};
use super::term::{Term, TermId, TermKind};
use crate::error::{Error, Result};

const BATCH_LINES: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Ntriples,
    NtriplesGzip,
}

impl Format {
    /// `.gz` selects gzip decompression, anything else plain N-Triples.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("gz") => Format::NtriplesGzip,
            _ => Format::Ntriples,
        }
    }
}

/// How blank-node labels from different sources relate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlankNodeScope {
    /// Labels are standardized apart per source (RDF graph merge).
    #[default]
    PerSource,
    /// Labels are already global, e.g. a single pre-merged dump.
    Shared,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    /// Well-formed triple lines read.
    pub parsed: u64,
    /// Well-formed lines dropped because the triple was already stored.
    pub deduplicated: u64,
    /// Malformed lines skipped.
    pub skipped: u64,
    pub terms: u64,
    pub predicates: u64,
}

/// A subject/predicate/object triple of interned terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub s: TermId,
    pub p: TermId,
    pub o: TermId,
}

/// Deduplicated triple set with a predicate index.
///
/// Every triple lives in exactly one per-predicate bucket of `(s, o)` pairs
/// kept in insertion order, so fetching all triples of one predicate is a
/// single lookup.
#[derive(Debug, Default)]
pub struct TripleStore {
    dict: Dictionary,
    by_predicate: IndexMap<TermId, Vec<(TermId, TermId)>>,
    triple_count: usize,
}

impl TripleStore {
    pub fn builder() -> StoreBuilder {
        StoreBuilder::new(BlankNodeScope::PerSource)
    }

    pub fn triple_count(&self) -> usize {
        self.triple_count
    }

    pub fn term_count(&self) -> usize {
        self.dict.len()
    }

    pub fn predicate_count(&self) -> usize {
        self.by_predicate.len()
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn dictionary_mut(&mut self) -> &mut Dictionary {
        &mut self.dict
    }

    /// All `(s, o)` with `(s, p, o)` stored, in insertion order. Unknown
    /// predicates give an empty slice.
    pub fn triples_with_predicate(&self, p: TermId) -> &[(TermId, TermId)] {
        self.by_predicate.get(&p).map_or(&[], Vec::as_slice)
    }

    /// Predicates in first-seen order.
    pub fn predicates(&self) -> impl Iterator<Item = TermId> + '_ {
        self.by_predicate.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.by_predicate
            .iter()
            .flat_map(|(&p, pairs)| pairs.iter().map(move |&(s, o)| Triple { s, p, o }))
    }

    pub fn contains(&self, t: Triple) -> bool {
        self.triples_with_predicate(t.p)
            .iter()
            .any(|&(s, o)| s == t.s && o == t.o)
    }

    /// Interns `term` on first sight.
    pub fn resolve(&mut self, term: &Term) -> TermId {
        self.dict.resolve(term)
    }

    pub fn lookup(&self, id: TermId) -> Result<TermRef<'_>> {
        self.dict.lookup(id)
    }

    pub fn find_iri(&self, iri: &str) -> Option<TermId> {
        self.dict.find_iri(iri)
    }

    pub fn kind(&self, id: TermId) -> TermKind {
        self.dict.kind(id)
    }

    /// Drops every triple for which `keep` returns false; returns how many
    /// were removed. Terms stay interned.
    pub fn retain(&mut self, mut keep: impl FnMut(Triple) -> bool) -> usize {
        let mut removed = 0;
        for (&p, pairs) in self.by_predicate.iter_mut() {
            let before = pairs.len();
            pairs.retain(|&(s, o)| keep(Triple { s, p, o }));
            removed += before - pairs.len();
        }
        self.by_predicate.retain(|_, pairs| !pairs.is_empty());
        self.triple_count -= removed;
        removed
    }

    /// Serializes every triple as N-Triples, grouped by predicate.
    pub fn write_ntriples<W: Write>(&self, mut out: W) -> Result<()> {
        for t in self.iter() {
            writeln!(
                out,
                "{} {} {} .",
                self.dict.lookup(t.s)?,
                self.dict.lookup(t.p)?,
                self.dict.lookup(t.o)?
            )?;
        }
        Ok(())
    }
}

/// Accumulates triples from one or more sources into a [`TripleStore`].
pub struct StoreBuilder {
    store: TripleStore,
    seen: HashSet<Triple>,
    report: IngestReport,
    scope: BlankNodeScope,
    source: usize,
    blank_buf: String,
}

impl StoreBuilder {
    pub fn new(scope: BlankNodeScope) -> Self {
        StoreBuilder {
            store: TripleStore::default(),
            seen: HashSet::new(),
            report: IngestReport::default(),
            scope,
            source: 0,
            blank_buf: String::new(),
        }
    }

    pub fn report(&self) -> &IngestReport {
        &self.report
    }

    /// Inserts a triple of already-interned ids. Returns false for a
    /// duplicate.
    pub fn insert_ids(&mut self, s: TermId, p: TermId, o: TermId) -> bool {
        let triple = Triple { s, p, o };
        if !self.seen.insert(triple) {
            return false;
        }
        self.store.by_predicate.entry(p).or_default().push((s, o));
        self.store.triple_count += 1;
        true
    }

    pub fn insert(&mut self, s: &Term, p: &Term, o: &Term) -> bool {
        let s = self.store.dict.resolve(s);
        let p = self.store.dict.resolve(p);
        let o = self.store.dict.resolve(o);
        self.insert_ids(s, p, o)
    }

    /// Shorthand for an all-IRI triple.
    pub fn insert_iris(&mut self, s: &str, p: &str, o: &str) -> bool {
        self.insert(&Term::iri(s), &Term::iri(p), &Term::iri(o))
    }

    pub fn intern(&mut self, term: &Term) -> TermId {
        self.store.dict.resolve(term)
    }

    fn intern_raw(&mut self, term: &RawTerm<'_>) -> TermId {
        if term.kind == TermKind::BlankNode && self.scope == BlankNodeScope::PerSource {
            self.blank_buf.clear();
            use std::fmt::Write as _;
            let _ = write!(self.blank_buf, "f{}_{}", self.source, term.lexical);
            return self.store.dict.intern(TermKind::BlankNode, &self.blank_buf);
        }
        self.store.dict.intern(term.kind, &term.lexical)
    }

    fn insert_raw(&mut self, raw: &RawTriple<'_>) {
        self.report.parsed += 1;
        let s = self.intern_raw(&raw.subject);
        let p = self.intern_raw(&raw.predicate);
        let o = self.intern_raw(&raw.object);
        if !self.insert_ids(s, p, o) {
            self.report.deduplicated += 1;
        }
    }

    /// Reads one N-Triples source. Malformed lines are logged and counted;
    /// only I/O failures abort.
    pub fn ingest_reader<R: Read>(&mut self, source: R, format: Format, name: &str) -> Result<()> {
        let reader: Box<dyn BufRead> = match format {
            Format::Ntriples => Box::new(BufReader::with_capacity(1 << 16, source)),
            Format::NtriplesGzip => Box::new(BufReader::with_capacity(
                1 << 16,
                MultiGzDecoder::new(source),
            )),
        };
        let mut lines = reader.lines();
        let mut line_no: u64 = 0;
        let mut batch: Vec<String> = Vec::with_capacity(BATCH_LINES);
        loop {
            batch.clear();
            for line in lines.by_ref().take(BATCH_LINES) {
                batch.push(line?);
            }
            if batch.is_empty() {
                break;
            }
            let parsed: Vec<_> = batch.par_iter().map(|l| ntriples::parse_line(l)).collect();
            for (offset, result) in parsed.into_iter().enumerate() {
                match result {
                    Ok(Some(raw)) => self.insert_raw(&raw),
                    Ok(None) => {}
                    Err(err) => {
                        self.report.skipped += 1;
                        log::warn!("{name}:{}: skipping malformed line: {err}", line_no + offset as u64 + 1);
                    }
                }
            }
            line_no += batch.len() as u64;
        }
        self.source += 1;
        Ok(())
    }

    pub fn ingest_path(&mut self, path: &Path) -> Result<()> {
        let file = File::open(path).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
        })?;
        self.ingest_reader(file, Format::from_path(path), &path.display().to_string())
    }

    pub fn finish(mut self) -> (TripleStore, IngestReport) {
        self.report.terms = self.store.dict.len() as u64;
        self.report.predicates = self.store.by_predicate.len() as u64;
        (self.store, self.report)
    }
}

/// Parses one byte stream into a fresh store.
pub fn parse_stream<R: Read>(source: R, format: Format) -> Result<(TripleStore, IngestReport)> {
    let mut builder = StoreBuilder::new(BlankNodeScope::PerSource);
    builder.ingest_reader(source, format, "<stream>")?;
    Ok(builder.finish())
}

/// Ingests several files into one store, in order.
pub fn load_paths<P: AsRef<Path>>(
    paths: &[P],
    scope: BlankNodeScope,
) -> Result<(TripleStore, IngestReport)> {
    let mut builder = StoreBuilder::new(scope);
    for path in paths {
        builder.ingest_path(path.as_ref())?;
    }
    let (store, report) = builder.finish();
    log::info!(
        "ingested {} triples ({} duplicates, {} skipped), {} terms, {} predicates",
        store.triple_count(),
        report.deduplicated,
        report.skipped,
        report.terms,
        report.predicates
    );
    Ok((store, report))
}
