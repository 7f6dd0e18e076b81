//! Key-value layer behind the four ESG maps (ID, IS, H, H⁻).
//!
//! The builder only talks to [`EsgStorage`]; [`MemoryStorage`] is the
//! default, [`DiskStorage`] keeps the maps in a redb file for inputs whose
//! hierarchy does not fit in RAM.

use std::path::{Path, PathBuf};

use hashbrown::HashSet;
use smallvec::SmallVec;
use redb::{
    Database, Durability, MultimapTableDefinition, ReadableMultimapTable, ReadableTable,
    TableDefinition, WriteTransaction,
};

use super::EsId;
use crate::error::{Error, Result};
use crate::ingest::TermId;

/// Which adjacency multimap an operation addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Adjacency {
    /// `H`: set → explicit super sets.
    Supers,
    /// `H⁻`: set → explicit sub sets.
    Subs,
}

pub trait EsgStorage: Send {
    fn set_of(&self, term: TermId) -> Result<Option<EsId>>;
    /// Creates `set` with the given members and points ID at it for each.
    fn create_set(&mut self, set: EsId, members: &[TermId]) -> Result<()>;
    /// Adds one member to an existing set and points ID at it.
    fn add_member(&mut self, set: EsId, term: TermId) -> Result<()>;
    /// Removes the IS entry of `set`, returning its members. ID entries are
    /// left for the caller to overwrite.
    fn remove_set(&mut self, set: EsId) -> Result<Vec<TermId>>;
    fn members(&self, set: EsId) -> Result<Vec<TermId>>;
    fn contains_set(&self, set: EsId) -> Result<bool>;
    /// Live set ids, ascending.
    fn set_ids(&self) -> Result<Vec<EsId>>;
    fn set_count(&self) -> usize;
    fn term_count(&self) -> usize;

    fn adjacent(&self, dir: Adjacency, set: EsId) -> Result<Vec<EsId>>;
    /// Returns true if the entry was new.
    fn insert_adjacent(&mut self, dir: Adjacency, set: EsId, other: EsId) -> Result<bool>;
    fn remove_adjacent(&mut self, dir: Adjacency, set: EsId, other: EsId) -> Result<bool>;
    /// Removes and returns the whole adjacency entry of `set`.
    fn take_adjacent(&mut self, dir: Adjacency, set: EsId) -> Result<Vec<EsId>>;
    /// Number of `(set, other)` pairs in one adjacency map.
    fn adjacency_len(&self, dir: Adjacency) -> usize;

    fn backend_name(&self) -> &'static str;
}

const NO_SET: u64 = u64::MAX;

/// Neighbour set that stays a plain vector until it grows large.
#[derive(Clone, Debug)]
enum Neighbours {
    Few(SmallVec<[EsId; 2]>),
    Many(HashSet<EsId>),
}

const FEW: usize = 32;

impl Default for Neighbours {
    fn default() -> Self {
        Neighbours::Few(SmallVec::new())
    }
}

impl Neighbours {
    fn insert(&mut self, x: EsId) -> bool {
        match self {
            Neighbours::Few(v) => {
                if v.contains(&x) {
                    return false;
                }
                if v.len() < FEW {
                    v.push(x);
                } else {
                    let mut set: HashSet<EsId> = v.drain(..).collect();
                    set.insert(x);
                    *self = Neighbours::Many(set);
                }
                true
            }
            Neighbours::Many(set) => set.insert(x),
        }
    }

    fn remove(&mut self, x: EsId) -> bool {
        match self {
            Neighbours::Few(v) => match v.iter().position(|&y| y == x) {
                Some(i) => {
                    v.swap_remove(i);
                    true
                }
                None => false,
            },
            Neighbours::Many(set) => set.remove(&x),
        }
    }

    fn len(&self) -> usize {
        match self {
            Neighbours::Few(v) => v.len(),
            Neighbours::Many(set) => set.len(),
        }
    }

    fn sorted(self) -> Vec<EsId> {
        let mut v: Vec<EsId> = match self {
            Neighbours::Few(v) => v.into_vec(),
            Neighbours::Many(set) => set.into_iter().collect(),
        };
        v.sort_unstable();
        v
    }
}

/// Everything kept per set id.
#[derive(Clone, Debug, Default)]
struct Slot {
    members: Option<SmallVec<[TermId; 2]>>,
    supers: Neighbours,
    subs: Neighbours,
}

/// In-memory maps. Set ids index a vector directly, so ids should be
/// dense (the builder issues them sequentially).
#[derive(Default)]
pub struct MemoryStorage {
    id: Vec<u64>,
    terms: usize,
    slots: Vec<Slot>,
    sets: usize,
    supers_len: usize,
    subs_len: usize,
}

impl MemoryStorage {
    pub fn new() -> Self {
        Self::default()
    }

    fn point(&mut self, term: TermId, set: EsId) {
        let idx = term.index();
        if idx >= self.id.len() {
            self.id.resize(idx + 1, NO_SET);
        }
        if self.id[idx] == NO_SET {
            self.terms += 1;
        }
        self.id[idx] = set.0;
    }

    fn slot(&self, set: EsId) -> Option<&Slot> {
        usize::try_from(set.0).ok().and_then(|i| self.slots.get(i))
    }

    fn slot_mut(&mut self, set: EsId) -> &mut Slot {
        let i = usize::try_from(set.0).expect("set id exceeds address space");
        if i >= self.slots.len() {
            self.slots.resize_with(i + 1, Slot::default);
        }
        &mut self.slots[i]
    }

    fn live(&self, set: EsId) -> Result<&[TermId]> {
        self.slot(set)
            .and_then(|s| s.members.as_deref())
            .ok_or(Error::UnknownSet(set))
    }

    fn neighbours_mut(&mut self, dir: Adjacency, set: EsId) -> (&mut Neighbours, &mut usize) {
        let i = usize::try_from(set.0).expect("set id exceeds address space");
        if i >= self.slots.len() {
            self.slots.resize_with(i + 1, Slot::default);
        }
        let slot = &mut self.slots[i];
        match dir {
            Adjacency::Supers => (&mut slot.supers, &mut self.supers_len),
            Adjacency::Subs => (&mut slot.subs, &mut self.subs_len),
        }
    }
}

impl EsgStorage for MemoryStorage {
    fn set_of(&self, term: TermId) -> Result<Option<EsId>> {
        Ok(self
            .id
            .get(term.index())
            .copied()
            .filter(|&s| s != NO_SET)
            .map(EsId))
    }

    fn create_set(&mut self, set: EsId, members: &[TermId]) -> Result<()> {
        for &t in members {
            self.point(t, set);
        }
        let slot = self.slot_mut(set);
        let fresh = slot
            .members
            .replace(SmallVec::from_slice(members))
            .is_none();
        self.sets += fresh as usize;
        Ok(())
    }

    fn add_member(&mut self, set: EsId, term: TermId) -> Result<()> {
        self.live(set)?;
        self.slot_mut(set)
            .members
            .as_mut()
            .expect("checked live")
            .push(term);
        self.point(term, set);
        Ok(())
    }

    fn remove_set(&mut self, set: EsId) -> Result<Vec<TermId>> {
        self.live(set)?;
        self.sets -= 1;
        Ok(self
            .slot_mut(set)
            .members
            .take()
            .expect("checked live")
            .into_vec())
    }

    fn members(&self, set: EsId) -> Result<Vec<TermId>> {
        self.live(set).map(<[TermId]>::to_vec)
    }

    fn contains_set(&self, set: EsId) -> Result<bool> {
        Ok(self.live(set).is_ok())
    }

    fn set_ids(&self) -> Result<Vec<EsId>> {
        Ok(self
            .slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.members.is_some())
            .map(|(i, _)| EsId(i as u64))
            .collect())
    }

    fn set_count(&self) -> usize {
        self.sets
    }

    fn term_count(&self) -> usize {
        self.terms
    }

    fn adjacent(&self, dir: Adjacency, set: EsId) -> Result<Vec<EsId>> {
        Ok(self
            .slot(set)
            .map(|s| {
                match dir {
                    Adjacency::Supers => &s.supers,
                    Adjacency::Subs => &s.subs,
                }
                .clone()
                .sorted()
            })
            .unwrap_or_default())
    }

    fn insert_adjacent(&mut self, dir: Adjacency, set: EsId, other: EsId) -> Result<bool> {
        let (n, len) = self.neighbours_mut(dir, set);
        let fresh = n.insert(other);
        *len += fresh as usize;
        Ok(fresh)
    }

    fn remove_adjacent(&mut self, dir: Adjacency, set: EsId, other: EsId) -> Result<bool> {
        if self.slot(set).is_none() {
            return Ok(false);
        }
        let (n, len) = self.neighbours_mut(dir, set);
        let removed = n.remove(other);
        *len -= removed as usize;
        Ok(removed)
    }

    fn take_adjacent(&mut self, dir: Adjacency, set: EsId) -> Result<Vec<EsId>> {
        if self.slot(set).is_none() {
            return Ok(Vec::new());
        }
        let (n, len) = self.neighbours_mut(dir, set);
        let taken = std::mem::take(n);
        *len -= taken.len();
        Ok(taken.sorted())
    }

    fn adjacency_len(&self, dir: Adjacency) -> usize {
        match dir {
            Adjacency::Supers => self.supers_len,
            Adjacency::Subs => self.subs_len,
        }
    }

    fn backend_name(&self) -> &'static str {
        "memory"
    }
}

const ID_TABLE: TableDefinition<u32, u64> = TableDefinition::new("id");
const IS_TABLE: MultimapTableDefinition<u64, u32> = MultimapTableDefinition::new("is");
const H_TABLE: MultimapTableDefinition<u64, u64> = MultimapTableDefinition::new("h");
const HMINUS_TABLE: MultimapTableDefinition<u64, u64> = MultimapTableDefinition::new("hminus");

/// Mutations between intermediate commits. redb keeps uncommitted pages
/// in memory, so the transaction is rolled over periodically.
const COMMIT_EVERY: usize = 1 << 16;

/// redb-backed storage. The database file is scratch space and is deleted
/// when the storage is dropped.
pub struct DiskStorage {
    path: PathBuf,
    db: Database,
    txn: Option<WriteTransaction>,
    pending: usize,
    terms: usize,
    sets: usize,
    supers_len: usize,
    subs_len: usize,
}

impl DiskStorage {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let db = Database::create(&path).map_err(Error::storage)?;
        let txn = Self::begin(&db)?;
        Ok(DiskStorage {
            path,
            db,
            txn: Some(txn),
            pending: 0,
            terms: 0,
            sets: 0,
            supers_len: 0,
            subs_len: 0,
        })
    }

    fn begin(db: &Database) -> Result<WriteTransaction> {
        let mut txn = db.begin_write().map_err(Error::storage)?;
        txn.set_durability(Durability::None);
        // Make sure every table exists so reads never hit a missing table.
        txn.open_table(ID_TABLE).map_err(Error::storage)?;
        txn.open_multimap_table(IS_TABLE).map_err(Error::storage)?;
        txn.open_multimap_table(H_TABLE).map_err(Error::storage)?;
        txn.open_multimap_table(HMINUS_TABLE).map_err(Error::storage)?;
        Ok(txn)
    }

    fn txn(&self) -> &WriteTransaction {
        self.txn.as_ref().expect("transaction is always present outside roll_over")
    }

    fn touched(&mut self, n: usize) -> Result<()> {
        self.pending += n;
        if self.pending >= COMMIT_EVERY {
            self.pending = 0;
            let mut txn = self.txn.take().expect("live transaction");
            // An `Eventual` commit lets redb reclaim freed pages.
            txn.set_durability(Durability::Eventual);
            txn.commit().map_err(Error::storage)?;
            self.txn = Some(Self::begin(&self.db)?);
        }
        Ok(())
    }

    fn adjacency_table(dir: Adjacency) -> MultimapTableDefinition<'static, u64, u64> {
        match dir {
            Adjacency::Supers => H_TABLE,
            Adjacency::Subs => HMINUS_TABLE,
        }
    }

    fn point(&mut self, term: TermId, set: EsId) -> Result<()> {
        let fresh = {
            let mut table = self.txn().open_table(ID_TABLE).map_err(Error::storage)?;
            let previous = table.insert(term.0, set.0).map_err(Error::storage)?;
            previous.is_none()
        };
        if fresh {
            self.terms += 1;
        }
        Ok(())
    }
}

impl Drop for DiskStorage {
    fn drop(&mut self) {
        if let Some(txn) = self.txn.take() {
            let _ = txn.abort();
        }
        let _ = std::fs::remove_file(&self.path);
    }
}

impl EsgStorage for DiskStorage {
    fn set_of(&self, term: TermId) -> Result<Option<EsId>> {
        let table = self.txn().open_table(ID_TABLE).map_err(Error::storage)?;
        let found = table.get(term.0).map_err(Error::storage)?;
        Ok(found.map(|g| EsId(g.value())))
    }

    fn create_set(&mut self, set: EsId, members: &[TermId]) -> Result<()> {
        {
            let mut is = self.txn().open_multimap_table(IS_TABLE).map_err(Error::storage)?;
            for &t in members {
                is.insert(set.0, t.0).map_err(Error::storage)?;
            }
        }
        for &t in members {
            self.point(t, set)?;
        }
        self.sets += 1;
        self.touched(members.len() + 1)
    }

    fn add_member(&mut self, set: EsId, term: TermId) -> Result<()> {
        if !self.contains_set(set)? {
            return Err(Error::UnknownSet(set));
        }
        {
            let mut is = self.txn().open_multimap_table(IS_TABLE).map_err(Error::storage)?;
            is.insert(set.0, term.0).map_err(Error::storage)?;
        }
        self.point(term, set)?;
        self.touched(1)
    }

    fn remove_set(&mut self, set: EsId) -> Result<Vec<TermId>> {
        let members: Vec<TermId> = {
            let mut is = self.txn().open_multimap_table(IS_TABLE).map_err(Error::storage)?;
            let removed = is.remove_all(set.0).map_err(Error::storage)?;
            removed
                .map(|v| v.map(|g| TermId(g.value())).map_err(Error::storage))
                .collect::<Result<_>>()?
        };
        if members.is_empty() {
            return Err(Error::UnknownSet(set));
        }
        self.sets -= 1;
        self.touched(members.len())?;
        Ok(members)
    }

    fn members(&self, set: EsId) -> Result<Vec<TermId>> {
        let is = self.txn().open_multimap_table(IS_TABLE).map_err(Error::storage)?;
        let members: Vec<TermId> = is
            .get(set.0)
            .map_err(Error::storage)?
            .map(|v| v.map(|g| TermId(g.value())).map_err(Error::storage))
            .collect::<Result<_>>()?;
        if members.is_empty() {
            return Err(Error::UnknownSet(set));
        }
        Ok(members)
    }

    fn contains_set(&self, set: EsId) -> Result<bool> {
        let is = self.txn().open_multimap_table(IS_TABLE).map_err(Error::storage)?;
        let found = is.get(set.0).map_err(Error::storage)?.next().is_some();
        Ok(found)
    }

    fn set_ids(&self) -> Result<Vec<EsId>> {
        let is = self.txn().open_multimap_table(IS_TABLE).map_err(Error::storage)?;
        let mut ids = Vec::with_capacity(self.sets);
        for entry in is.iter().map_err(Error::storage)? {
            let (key, _) = entry.map_err(Error::storage)?;
            ids.push(EsId(key.value()));
        }
        Ok(ids)
    }

    fn set_count(&self) -> usize {
        self.sets
    }

    fn term_count(&self) -> usize {
        self.terms
    }

    fn adjacent(&self, dir: Adjacency, set: EsId) -> Result<Vec<EsId>> {
        let table = self
            .txn()
            .open_multimap_table(Self::adjacency_table(dir))
            .map_err(Error::storage)?;
        let values = table.get(set.0).map_err(Error::storage)?;
        values
            .map(|v| v.map(|g| EsId(g.value())).map_err(Error::storage))
            .collect()
    }

    fn insert_adjacent(&mut self, dir: Adjacency, set: EsId, other: EsId) -> Result<bool> {
        let existed = {
            let mut table = self
                .txn()
                .open_multimap_table(Self::adjacency_table(dir))
                .map_err(Error::storage)?;
            table.insert(set.0, other.0).map_err(Error::storage)?
        };
        if !existed {
            match dir {
                Adjacency::Supers => self.supers_len += 1,
                Adjacency::Subs => self.subs_len += 1,
            }
        }
        self.touched(1)?;
        Ok(!existed)
    }

    fn remove_adjacent(&mut self, dir: Adjacency, set: EsId, other: EsId) -> Result<bool> {
        let removed = {
            let mut table = self
                .txn()
                .open_multimap_table(Self::adjacency_table(dir))
                .map_err(Error::storage)?;
            table.remove(set.0, other.0).map_err(Error::storage)?
        };
        if removed {
            match dir {
                Adjacency::Supers => self.supers_len -= 1,
                Adjacency::Subs => self.subs_len -= 1,
            }
        }
        self.touched(1)?;
        Ok(removed)
    }

    fn take_adjacent(&mut self, dir: Adjacency, set: EsId) -> Result<Vec<EsId>> {
        let taken: Vec<EsId> = {
            let mut table = self
                .txn()
                .open_multimap_table(Self::adjacency_table(dir))
                .map_err(Error::storage)?;
            let removed = table.remove_all(set.0).map_err(Error::storage)?;
            removed
                .map(|v| v.map(|g| EsId(g.value())).map_err(Error::storage))
                .collect::<Result<_>>()?
        };
        match dir {
            Adjacency::Supers => self.supers_len -= taken.len(),
            Adjacency::Subs => self.subs_len -= taken.len(),
        }
        self.touched(taken.len())?;
        Ok(taken)
    }

    fn adjacency_len(&self, dir: Adjacency) -> usize {
        match dir {
            Adjacency::Supers => self.supers_len,
            Adjacency::Subs => self.subs_len,
        }
    }

    fn backend_name(&self) -> &'static str {
        "disk"
    }
}
