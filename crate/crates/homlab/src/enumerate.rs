//! Enumeration of small structures up to isomorphism, restricted to the
//! resource-bounded classes the counting theorems quantify over.

use std::collections::{BTreeMap, BTreeSet};

use crate::cover::{compute_tree_depth, find_pebble_forest_cover};
use crate::error::{Error, Result};
use crate::structure::{PointedStructure, RelStructure, Signature};

/// Default size cap for enumerating loop-free symmetric graphs.
pub const DEFAULT_GRAPH_ENUM_CAP: usize = 7;
/// Default size cap for enumerating structures over richer signatures.
pub const DEFAULT_GENERAL_ENUM_CAP: usize = 5;

/// A class of structures to stream, one representative per isomorphism class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassKind {
    All,
    /// tree-depth at most n
    TreeDepth(usize),
    /// tree-width at most w (covers with w+1 pebbles)
    TreeWidth(usize),
    /// k-pebble forest cover of height at most n
    PebbleHeight(usize, usize),
    /// synchronization trees of height at most k (pointed)
    SyncTree(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSpec {
    pub kind: ClassKind,
    pub signature: Signature,
    /// loop-free symmetric interpretation of a single binary symbol
    pub simple_graphs: bool,
    /// carry a distinguished point
    pub pointed: bool,
    pub max_size: usize,
}

impl ClassSpec {
    pub fn simple_graphs(kind: ClassKind, max_size: usize) -> Self {
        ClassSpec { kind, signature: Signature::graph(), simple_graphs: true, pointed: false, max_size }
    }

    pub fn pointed(kind: ClassKind, signature: Signature, max_size: usize) -> Self {
        ClassSpec { kind, signature, simple_graphs: false, pointed: true, max_size }
    }

    pub fn general(kind: ClassKind, signature: Signature, max_size: usize) -> Self {
        ClassSpec { kind, signature, simple_graphs: false, pointed: false, max_size }
    }
}

/// One enumerated structure with a stable identifier.
#[derive(Debug, Clone)]
pub struct Enumerated {
    pub id: String,
    pub structure: RelStructure,
    pub point: Option<usize>,
}

impl Enumerated {
    pub fn pointed(&self) -> Result<PointedStructure> {
        match self.point {
            Some(p) => PointedStructure::new(self.structure.clone(), p),
            None => Err(Error::MalformedInput("structure carries no point".to_string())),
        }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    fn heap(k: usize, perm: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(perm.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, perm, out);
            if k % 2 == 0 {
                perm.swap(i, k - 1);
            } else {
                perm.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut perm, &mut out);
    out.sort();
    out
}

/// Canonical code of a structure (with an optional point): the minimum over
/// all relabellings of the tuple-list encoding.
pub fn canonical_code(a: &RelStructure, point: Option<usize>) -> Vec<u64> {
    let n = a.size();
    let mut best: Option<Vec<u64>> = None;
    for perm in permutations(n) {
        let mut code: Vec<u64> = vec![n as u64];
        if let Some(p) = point {
            code.push(perm[p] as u64);
        }
        for (_, tuples) in a.relations() {
            let mut relabelled: Vec<Vec<usize>> =
                tuples.iter().map(|t| t.iter().map(|&e| perm[e]).collect()).collect();
            relabelled.sort();
            code.push(u64::MAX); // relation separator
            for t in relabelled {
                for e in t {
                    code.push(e as u64);
                }
                code.push(u64::MAX - 1); // tuple separator
            }
        }
        if best.as_ref().is_none_or(|b| code < *b) {
            best = Some(code);
        }
    }
    best.unwrap_or_else(|| vec![0])
}

/// Enumerate loop-free symmetric graphs up to isomorphism by vertex
/// augmentation, sizes 1..=max.
fn enumerate_simple_graphs(max: usize) -> Vec<RelStructure> {
    // adjacency encoded as a bitmask over vertex pairs
    fn pair_bit(u: usize, v: usize) -> usize {
        let (lo, hi) = (u.min(v), u.max(v));
        hi * (hi - 1) / 2 + lo
    }
    fn code_of(mask: u64, n: usize, perms: &[Vec<usize>]) -> u64 {
        let mut best = u64::MAX;
        for perm in perms {
            let mut c = 0u64;
            for u in 0..n {
                for v in u + 1..n {
                    if mask >> pair_bit(u, v) & 1 == 1 {
                        c |= 1 << pair_bit(perm[u], perm[v]);
                    }
                }
            }
            if c < best {
                best = c;
            }
        }
        best
    }
    if max == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut level: Vec<u64> = vec![0]; // the one-vertex graph
    out.push((1usize, 0u64));
    for n in 2..=max {
        let perms = permutations(n);
        let mut seen = BTreeSet::new();
        for &g in &level {
            for nbrs in 0u64..(1 << (n - 1)) {
                let mut mask = g;
                for v in 0..n - 1 {
                    if nbrs >> v & 1 == 1 {
                        mask |= 1 << pair_bit(v, n - 1);
                    }
                }
                seen.insert(code_of(mask, n, &perms));
            }
        }
        level = seen.iter().copied().collect();
        out.extend(level.iter().map(|&m| (n, m)));
    }
    out.into_iter()
        .map(|(n, mask)| {
            let mut g = crate::graphs::edgeless(n);
            for u in 0..n {
                for v in u + 1..n {
                    if mask >> pair_bit(u, v) & 1 == 1 {
                        crate::graphs::add_edge(&mut g, u, v);
                    }
                }
            }
            g
        })
        .collect()
}

/// Enumerate structures over an arbitrary signature (optionally pointed) up
/// to isomorphism by element augmentation.
fn enumerate_general(
    sig: &Signature,
    pointed: bool,
    max: usize,
) -> Result<Vec<(RelStructure, Option<usize>)>> {
    // all tuples over 0..n involving element n-1
    fn new_tuples(sig: &Signature, n: usize) -> Vec<(String, Vec<usize>)> {
        let mut out = Vec::new();
        for sym in sig.symbols() {
            let mut tuple = vec![0usize; sym.arity];
            loop {
                if tuple.contains(&(n - 1)) {
                    out.push((sym.name.clone(), tuple.clone()));
                }
                let mut pos = sym.arity;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    tuple[pos] += 1;
                    if tuple[pos] < n {
                        break;
                    }
                    tuple[pos] = 0;
                }
                if tuple.iter().all(|&e| e == 0) {
                    break;
                }
            }
        }
        out
    }

    if max == 0 {
        return Ok(Vec::new());
    }
    let mut all: Vec<(RelStructure, Option<usize>)> = Vec::new();
    let base = RelStructure::discrete(sig.clone(), 1);
    let mut level: Vec<(RelStructure, Option<usize>)> = Vec::new();
    {
        let seeds = new_tuples(sig, 1);
        if seeds.len() > 24 {
            return Err(Error::CapExceeded {
                what: "tuple choices per enumeration step".to_string(),
                size: seeds.len(),
                cap: 24,
            });
        }
        let mut seen = BTreeSet::new();
        for mask in 0u64..(1 << seeds.len()) {
            let mut st = base.clone();
            for (bit, (name, t)) in seeds.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    st.insert_tuple(name, t.clone())?;
                }
            }
            let point = pointed.then_some(0);
            if seen.insert(canonical_code(&st, point)) {
                level.push((st, point));
            }
        }
    }
    all.extend(level.iter().cloned());
    for n in 2..=max {
        let seeds = new_tuples(sig, n);
        if seeds.len() > 24 {
            return Err(Error::CapExceeded {
                what: "tuple choices per enumeration step".to_string(),
                size: seeds.len(),
                cap: 24,
            });
        }
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for (g, point) in &level {
            // the new element is n-1; the point, when present, stays put
            let mut grown = RelStructure::discrete(sig.clone(), n);
            for (name, tuples) in g.relations() {
                for t in tuples {
                    grown.insert_tuple(name, t.clone())?;
                }
            }
            for mask in 0u64..(1 << seeds.len()) {
                let mut st = grown.clone();
                for (bit, (name, t)) in seeds.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        st.insert_tuple(name, t.clone())?;
                    }
                }
                if seen.insert(canonical_code(&st, *point)) {
                    next.push((st, *point));
                }
            }
        }
        level = next;
        all.extend(level.iter().cloned());
    }
    Ok(all)
}

/// Enumerate synchronization trees (pointed, edges labelled by the binary
/// symbols, unary decorations free) of height <= height_bound, sizes 1..=max,
/// up to isomorphism.
fn enumerate_sync_trees(
    sig: &Signature,
    height_bound: usize,
    max: usize,
) -> Result<Vec<PointedStructure>> {
    if sig.max_arity() > 2 {
        return Err(Error::MalformedInput("sync trees need arities <= 2".to_string()));
    }
    let binaries: Vec<String> =
        sig.symbols().iter().filter(|s| s.arity == 2).map(|s| s.name.clone()).collect();
    let unaries: Vec<String> =
        sig.symbols().iter().filter(|s| s.arity == 1).map(|s| s.name.clone()).collect();
    if binaries.is_empty() {
        return Err(Error::MalformedInput("sync trees need a binary symbol".to_string()));
    }

    /// canonical code of a rooted labelled tree: (unary mask, sorted child
    /// codes each prefixed by its edge label)
    fn tree_code(
        v: usize,
        parent: &[usize],
        edge_label: &[usize],
        unary_mask: &[u64],
        n: usize,
    ) -> String {
        let mut children: Vec<String> = (1..n)
            .filter(|&c| parent[c] == v)
            .map(|c| format!("{}:{}", edge_label[c], tree_code(c, parent, edge_label, unary_mask, n)))
            .collect();
        children.sort();
        format!("[u{};{}]", unary_mask[v], children.join(","))
    }

    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for n in 1..=max {
        // parent arrays with parent[i] < i, root 0; depth-bounded
        let mut parents = vec![0usize; n];
        let mut shapes: Vec<Vec<usize>> = Vec::new();
        // iteratively build parent arrays for elements 1..n-1
        fn gen_parents(i: usize, n: usize, parents: &mut Vec<usize>, shapes: &mut Vec<Vec<usize>>) {
            if i == n {
                shapes.push(parents[..n].to_vec());
                return;
            }
            for p in 0..i {
                parents[i] = p;
                gen_parents(i + 1, n, parents, shapes);
            }
        }
        if n == 1 {
            shapes.push(vec![0]);
        } else {
            gen_parents(1, n, &mut parents, &mut shapes);
        }
        for shape in shapes {
            // depth check
            let mut depth = vec![0usize; n];
            let mut ok = true;
            for i in 1..n {
                depth[i] = depth[shape[i]] + 1;
                if depth[i] > height_bound {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            // edge labels for elements 1..n-1, unary masks for all
            let label_count = binaries.len().max(1);
            let edge_choices = label_count.pow(n.saturating_sub(1) as u32);
            let unary_choices = 1u64 << (unaries.len() * n).min(24);
            if unaries.len() * n > 24 {
                return Err(Error::CapExceeded {
                    what: "unary decorations per sync tree".to_string(),
                    size: unaries.len() * n,
                    cap: 24,
                });
            }
            for labels in 0..edge_choices {
                let mut edge_label = vec![0usize; n];
                let mut rest = labels;
                for e in edge_label.iter_mut().skip(1) {
                    *e = rest % label_count;
                    rest /= label_count;
                }
                for umask in 0..unary_choices {
                    let unary_mask: Vec<u64> = (0..n)
                        .map(|v| {
                            (0..unaries.len())
                                .map(|u| umask >> (v * unaries.len() + u) & 1)
                                .fold(0u64, |acc, b| acc << 1 | b)
                        })
                        .collect();
                    let code = format!(
                        "{n}|{}",
                        tree_code(0, &shape, &edge_label, &unary_mask, n)
                    );
                    if !seen.insert(code) {
                        continue;
                    }
                    let mut st = RelStructure::discrete(sig.clone(), n);
                    for i in 1..n {
                        st.insert_tuple(&binaries[edge_label[i]], vec![shape[i], i])?;
                    }
                    for v in 0..n {
                        for (u, name) in unaries.iter().enumerate() {
                            if umask >> (v * unaries.len() + u) & 1 == 1 {
                                st.insert_tuple(name, vec![v])?;
                            }
                        }
                    }
                    out.push(PointedStructure::new(st, 0)?);
                }
            }
        }
    }
    Ok(out)
}

/// Stream the structures of a class, one canonical representative per
/// isomorphism class, deterministically ordered by size then canonical code.
pub fn enumerate_structures(spec: &ClassSpec, cap: usize) -> Result<Vec<Enumerated>> {
    if spec.max_size > cap {
        return Err(Error::CapExceeded {
            what: "enumeration size".to_string(),
            size: spec.max_size,
            cap,
        });
    }
    let candidates: Vec<(RelStructure, Option<usize>)> = match &spec.kind {
        ClassKind::SyncTree(k) => enumerate_sync_trees(&spec.signature, *k, spec.max_size)?
            .into_iter()
            .map(|p| (p.structure, Some(p.point)))
            .collect(),
        _ if spec.simple_graphs => {
            if spec.signature != Signature::graph() {
                return Err(Error::MalformedInput(
                    "simple-graph enumeration expects the single binary symbol E".to_string(),
                ));
            }
            enumerate_simple_graphs(spec.max_size).into_iter().map(|g| (g, None)).collect()
        }
        _ => enumerate_general(&spec.signature, spec.pointed, spec.max_size)?,
    };
    // class membership filter
    let search_cap = spec.max_size.max(1);
    let mut kept: Vec<(RelStructure, Option<usize>)> = Vec::new();
    for (st, point) in candidates {
        let keep = match &spec.kind {
            ClassKind::All | ClassKind::SyncTree(_) => true,
            ClassKind::TreeDepth(n) => compute_tree_depth(&st, search_cap)?.0 <= *n,
            ClassKind::TreeWidth(w) => {
                find_pebble_forest_cover(&st, w + 1, None, search_cap)?.is_some()
            }
            ClassKind::PebbleHeight(k, n) => {
                find_pebble_forest_cover(&st, *k, Some(*n), search_cap)?.is_some()
            }
        };
        if keep {
            kept.push((st, point));
        }
    }
    // deterministic order: size, then canonical code
    kept.sort_by_cached_key(|(st, point)| (st.size(), canonical_code(st, *point)));
    let mut per_size: BTreeMap<usize, usize> = BTreeMap::new();
    Ok(kept
        .into_iter()
        .map(|(st, point)| {
            let ord = per_size.entry(st.size()).or_insert(0);
            let id = format!("s{}_{}", st.size(), *ord);
            *ord += 1;
            Enumerated { id, structure: st, point }
        })
        .collect())
}
