//! Dense, read-only copy of an ESG plus the graph algorithms the metrics
//! need: strong components, condensation heights and weak components.

use std::collections::HashMap;

use crate::error::Result;
use crate::esg::{EquivalenceSetGraph, EsId};
use crate::ingest::TermId;

/// Sets renumbered `0..n` in ascending id order.
#[derive(Clone, Debug, Default)]
pub struct Snapshot {
    pub ids: Vec<EsId>,
    pub members: Vec<Vec<TermId>>,
    /// Outgoing H edges (towards super sets).
    pub supers: Vec<Vec<u32>>,
    /// Outgoing H⁻ edges (towards sub sets).
    pub subs: Vec<Vec<u32>>,
}

impl Snapshot {
    pub fn new(esg: &EquivalenceSetGraph) -> Result<Self> {
        let partition = esg.partition()?;
        let index: HashMap<EsId, u32> = partition
            .iter()
            .enumerate()
            .map(|(i, (id, _))| (*id, i as u32))
            .collect();
        let n = partition.len();
        let mut snap = Snapshot {
            ids: Vec::with_capacity(n),
            members: Vec::with_capacity(n),
            supers: Vec::with_capacity(n),
            subs: Vec::with_capacity(n),
        };
        for (id, members) in partition {
            let dense = |v: Vec<EsId>| v.iter().map(|s| index[s]).collect::<Vec<u32>>();
            snap.supers.push(dense(esg.supers(id)?));
            snap.subs.push(dense(esg.subs(id)?));
            snap.ids.push(id);
            snap.members.push(members);
        }
        Ok(snap)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.supers.iter().map(Vec::len).sum()
    }
}

/// Strong components of the H digraph. `component[v]` is numbered in
/// reverse topological order: every edge `u → v` between different
/// components has `component[u] > component[v]`.
#[derive(Clone, Debug)]
pub struct Strong {
    pub component: Vec<u32>,
    pub count: usize,
}

/// Iterative Tarjan.
pub fn strong_components(adj: &[Vec<u32>]) -> Strong {
    const UNSEEN: u32 = u32::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut component = vec![UNSEEN; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut frames: Vec<(u32, usize)> = Vec::new();
    let mut next = 0u32;
    let mut count = 0u32;

    for root in 0..n as u32 {
        if index[root as usize] != UNSEEN {
            continue;
        }
        frames.push((root, 0));
        index[root as usize] = next;
        low[root as usize] = next;
        next += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some(&mut (v, ref mut cursor)) = frames.last_mut() {
            let vi = v as usize;
            if let Some(&w) = adj[vi].get(*cursor) {
                *cursor += 1;
                let wi = w as usize;
                if index[wi] == UNSEEN {
                    index[wi] = next;
                    low[wi] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[wi] = true;
                    frames.push((w, 0));
                } else if on_stack[wi] {
                    low[vi] = low[vi].min(index[wi]);
                }
                continue;
            }
            frames.pop();
            if let Some(&(parent, _)) = frames.last() {
                let pi = parent as usize;
                low[pi] = low[pi].min(low[vi]);
            }
            if low[vi] == index[vi] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w as usize] = false;
                    component[w as usize] = count;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    Strong {
        component,
        count: count as usize,
    }
}

/// Height of every node: the longest path, in the condensation, from a
/// component with no incoming edges. Nodes of one component share a height.
pub fn heights(adj: &[Vec<u32>], strong: &Strong) -> Vec<u64> {
    let mut comp_height = vec![0u64; strong.count];
    let mut by_comp: Vec<Vec<u32>> = vec![Vec::new(); strong.count];
    for (v, &c) in strong.component.iter().enumerate() {
        by_comp[c as usize].push(v as u32);
    }
    // Highest component number first is a topological order of H.
    for c in (0..strong.count).rev() {
        let h = comp_height[c];
        for &v in &by_comp[c] {
            for &w in &adj[v as usize] {
                let d = strong.component[w as usize] as usize;
                if d != c && comp_height[d] < h + 1 {
                    comp_height[d] = h + 1;
                }
            }
        }
    }
    strong
        .component
        .iter()
        .map(|&c| comp_height[c as usize])
        .collect()
}

/// Weak component label per node, ignoring edge direction.
pub fn weak_components(adj: &[Vec<u32>]) -> (Vec<u32>, usize) {
    let n = adj.len();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            let up = parent[parent[x as usize] as usize];
            parent[x as usize] = up;
            x = up;
        }
        x
    }
    for (v, targets) in adj.iter().enumerate() {
        for &w in targets {
            let a = find(&mut parent, v as u32);
            let b = find(&mut parent, w);
            if a != b {
                parent[a.max(b) as usize] = a.min(b);
            }
        }
    }
    let mut label = vec![u32::MAX; n];
    let mut count = 0u32;
    for v in 0..n as u32 {
        let root = find(&mut parent, v);
        if label[root as usize] == u32::MAX {
            label[root as usize] = count;
            count += 1;
        }
        label[v as usize] = label[root as usize];
    }
    (label, count as usize)
}
