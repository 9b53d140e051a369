//! Finite relational structures over explicit signatures.
//!
//! Elements are dense indices `0..size`. Relation tuples are kept in
//! `BTreeSet`s so every structure has a single canonical representation and
//! all derived constructions are deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reserved name of the equality-witness symbol used by extended signatures.
pub const EQ_SYMBOL: &str = "I";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelSymbol {
    pub name: String,
    pub arity: usize,
}

/// An ordered list of relation symbols with positive arities.
///
/// A symbol named `I` of arity 2 is treated as the equality witness of an
/// extended signature; at most one such symbol is permitted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    symbols: Vec<RelSymbol>,
}

impl Signature {
    pub fn new(symbols: Vec<(impl Into<String>, usize)>) -> Result<Self> {
        let symbols: Vec<RelSymbol> = symbols
            .into_iter()
            .map(|(name, arity)| RelSymbol { name: name.into(), arity })
            .collect();
        let mut seen = BTreeSet::new();
        for sym in &symbols {
            if sym.arity == 0 {
                return Err(Error::MalformedInput(format!(
                    "symbol {} has arity 0; arities must be positive",
                    sym.name
                )));
            }
            if !seen.insert(sym.name.clone()) {
                return Err(Error::NameClash(sym.name.clone()));
            }
            if sym.name == EQ_SYMBOL && sym.arity != 2 {
                return Err(Error::MalformedInput(format!(
                    "equality witness symbol {EQ_SYMBOL} must have arity 2"
                )));
            }
        }
        Ok(Signature { symbols })
    }

    /// Single binary symbol `E`; the signature of plain (di)graphs.
    pub fn graph() -> Self {
        Signature::new(vec![("E", 2)]).unwrap()
    }

    pub fn symbols(&self) -> &[RelSymbol] {
        &self.symbols
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.symbols.iter().find(|s| s.name == name).map(|s| s.arity)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.symbols.iter().any(|s| s.name == name)
    }

    /// The equality-witness symbol, if present.
    pub fn equality_symbol(&self) -> Option<&str> {
        self.symbols.iter().find(|s| s.name == EQ_SYMBOL).map(|s| s.name.as_str())
    }

    /// Extend by the equality witness `I`.
    pub fn extended(&self) -> Result<Signature> {
        if self.contains(EQ_SYMBOL) {
            return Err(Error::NameClash(EQ_SYMBOL.to_string()));
        }
        let mut symbols = self.symbols.clone();
        symbols.push(RelSymbol { name: EQ_SYMBOL.to_string(), arity: 2 });
        Ok(Signature { symbols })
    }

    /// Drop the equality witness `I`.
    pub fn reduct(&self) -> Result<Signature> {
        if !self.contains(EQ_SYMBOL) {
            return Err(Error::MissingSymbol(EQ_SYMBOL.to_string()));
        }
        let symbols = self.symbols.iter().filter(|s| s.name != EQ_SYMBOL).cloned().collect();
        Ok(Signature { symbols })
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }
}

/// A finite relational structure: universe `{0..size-1}` plus an
/// interpretation for every signature symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelStructure {
    signature: Signature,
    size: usize,
    relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
}

impl RelStructure {
    /// The structure with `size` elements and all relations empty.
    pub fn discrete(signature: Signature, size: usize) -> Self {
        let relations =
            signature.symbols().iter().map(|s| (s.name.clone(), BTreeSet::new())).collect();
        RelStructure { signature, size, relations }
    }

    pub fn new(
        signature: Signature,
        size: usize,
        tuples: Vec<(impl Into<String>, Vec<Vec<usize>>)>,
    ) -> Result<Self> {
        let mut st = RelStructure::discrete(signature, size);
        for (name, ts) in tuples {
            let name = name.into();
            for t in ts {
                st.insert_tuple(&name, t)?;
            }
        }
        Ok(st)
    }

    pub fn insert_tuple(&mut self, symbol: &str, tuple: Vec<usize>) -> Result<()> {
        let arity = self
            .signature
            .arity(symbol)
            .ok_or_else(|| Error::MissingSymbol(symbol.to_string()))?;
        if tuple.len() != arity {
            return Err(Error::MalformedInput(format!(
                "tuple {tuple:?} has length {}, symbol {symbol} has arity {arity}",
                tuple.len()
            )));
        }
        if let Some(&e) = tuple.iter().find(|&&e| e >= self.size) {
            return Err(Error::MalformedInput(format!(
                "tuple entry {e} out of range for universe of size {}",
                self.size
            )));
        }
        self.relations.get_mut(symbol).unwrap().insert(tuple);
        Ok(())
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.size
    }

    pub fn relation(&self, symbol: &str) -> Result<&BTreeSet<Vec<usize>>> {
        self.relations.get(symbol).ok_or_else(|| Error::MissingSymbol(symbol.to_string()))
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &BTreeSet<Vec<usize>>)> {
        // iterate in signature order, not map order
        self.signature
            .symbols()
            .iter()
            .map(move |s| (s.name.as_str(), self.relations.get(&s.name).unwrap()))
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.values().map(|ts| ts.len()).sum()
    }

    /// Undirected square-free adjacency: distinct elements co-occurring in a
    /// tuple of some relation.
    pub fn gaifman_edges(&self) -> BTreeSet<(usize, usize)> {
        let mut edges = BTreeSet::new();
        for (_, tuples) in self.relations() {
            for t in tuples {
                for (i, &a) in t.iter().enumerate() {
                    for &b in &t[i + 1..] {
                        if a != b {
                            edges.insert((a.min(b), a.max(b)));
                        }
                    }
                }
            }
        }
        edges
    }

    /// Gaifman adjacency lists, symmetric and loop-free.
    pub fn gaifman_neighbours(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.size];
        for (a, b) in self.gaifman_edges() {
            adj[a].insert(b);
            adj[b].insert(a);
        }
        adj
    }

    /// Connected components of the Gaifman graph, each sorted, in order of
    /// their minimal element.
    pub fn gaifman_components(&self) -> Vec<Vec<usize>> {
        let adj = self.gaifman_neighbours();
        let mut seen = vec![false; self.size];
        let mut comps = Vec::new();
        for start in 0..self.size {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            let mut comp = Vec::new();
            seen[start] = true;
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Relabel the universe along `perm` (element `i` becomes `perm[i]`).
    pub fn relabel(&self, perm: &[usize]) -> RelStructure {
        debug_assert_eq!(perm.len(), self.size);
        let mut out = RelStructure::discrete(self.signature.clone(), self.size);
        for (name, tuples) in self.relations() {
            let set: BTreeSet<Vec<usize>> =
                tuples.iter().map(|t| t.iter().map(|&e| perm[e]).collect()).collect();
            out.relations.insert(name.to_string(), set);
        }
        out
    }

    /// The substructure induced on `keep` (sorted, duplicate-free), with
    /// elements relabelled by their rank in `keep`.
    pub fn induced(&self, keep: &[usize]) -> RelStructure {
        let index: BTreeMap<usize, usize> =
            keep.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut out = RelStructure::discrete(self.signature.clone(), keep.len());
        for (name, tuples) in self.relations() {
            let set: BTreeSet<Vec<usize>> = tuples
                .iter()
                .filter(|t| t.iter().all(|e| index.contains_key(e)))
                .map(|t| t.iter().map(|e| index[e]).collect())
                .collect();
            out.relations.insert(name.to_string(), set);
        }
        out
    }
}

impl fmt::Display for RelStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "structure(|A|={}", self.size)?;
        for (name, tuples) in self.relations() {
            write!(f, ", {name}:{}", tuples.len())?;
        }
        write!(f, ")")
    }
}

/// A structure with a distinguished element; all arities must be at most 2
/// (the Kripke reading: unary symbols are propositions, binary ones are
/// accessibility relations).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedStructure {
    pub structure: RelStructure,
    pub point: usize,
}

impl PointedStructure {
    pub fn new(structure: RelStructure, point: usize) -> Result<Self> {
        if point >= structure.size() {
            return Err(Error::MalformedInput(format!(
                "point {point} out of range for universe of size {}",
                structure.size()
            )));
        }
        if structure.signature().max_arity() > 2 {
            return Err(Error::MalformedInput(
                "pointed structures require all arities <= 2".to_string(),
            ));
        }
        Ok(PointedStructure { structure, point })
    }
}

/// A function between universes, claimed to preserve every relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homomorphism {
    pub source: RelStructure,
    pub target: RelStructure,
    pub map: Vec<usize>,
}

impl Homomorphism {
    pub fn new(source: RelStructure, target: RelStructure, map: Vec<usize>) -> Self {
        Homomorphism { source, target, map }
    }

    pub fn identity(a: &RelStructure) -> Self {
        Homomorphism { source: a.clone(), target: a.clone(), map: (0..a.size()).collect() }
    }

    /// `other` after `self` (so `self.source -> other.target`).
    pub fn then(&self, other: &Homomorphism) -> Result<Homomorphism> {
        if self.target != other.source {
            return Err(Error::InvalidHomomorphism(
                "composition endpoints do not match".to_string(),
            ));
        }
        let map = self.map.iter().map(|&v| other.map[v]).collect();
        Ok(Homomorphism { source: self.source.clone(), target: other.target.clone(), map })
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.target.size()];
        for &v in &self.map {
            hit[v] = true;
        }
        hit.into_iter().all(|h| h)
    }

    pub fn is_injective(&self) -> bool {
        let mut hit = vec![false; self.target.size()];
        for &v in &self.map {
            if hit[v] {
                return false;
            }
            hit[v] = true;
        }
        true
    }
}

/// Check that `f` preserves every relation tuple.
///
/// A structurally broken map (wrong length, entries out of range) is a
/// malformed-input error, not `false`.
pub fn validate_hom(f: &Homomorphism) -> Result<bool> {
    if f.map.len() != f.source.size() {
        return Err(Error::MalformedInput(format!(
            "map length {} does not match source size {}",
            f.map.len(),
            f.source.size()
        )));
    }
    if let Some(&v) = f.map.iter().find(|&&v| v >= f.target.size()) {
        return Err(Error::MalformedInput(format!(
            "map value {v} out of range for target of size {}",
            f.target.size()
        )));
    }
    if f.source.signature() != f.target.signature() {
        return Err(Error::SignatureMismatch(
            "homomorphism endpoints have different signatures".to_string(),
        ));
    }
    for (name, tuples) in f.source.relations() {
        let target = f.target.relation(name)?;
        for t in tuples {
            let image: Vec<usize> = t.iter().map(|&e| f.map[e]).collect();
            if !target.contains(&image) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Check that `f` is a strong (induced) embedding: injective, preserving, and
/// reflecting every relation.
pub fn validate_strong_embedding(f: &Homomorphism) -> Result<bool> {
    if !validate_hom(f)? || !f.is_injective() {
        return Ok(false);
    }
    let image: BTreeMap<usize, usize> = f.map.iter().enumerate().map(|(a, &v)| (v, a)).collect();
    for (name, tuples) in f.target.relations() {
        let source = f.source.relation(name)?;
        for t in tuples {
            if t.iter().all(|e| image.contains_key(e)) {
                let preimage: Vec<usize> = t.iter().map(|e| image[e]).collect();
                if !source.contains(&preimage) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The Gaifman graph of `A` as a structure over the graph signature:
/// symmetric, loop-free edge relation between co-occurring elements.
pub fn gaifman(a: &RelStructure) -> RelStructure {
    let mut g = RelStructure::discrete(Signature::graph(), a.size());
    for (x, y) in a.gaifman_edges() {
        g.insert_tuple("E", vec![x, y]).unwrap();
        g.insert_tuple("E", vec![y, x]).unwrap();
    }
    g
}

/// Disjoint union `A + B`, with the two coprojections. `B`'s elements are
/// shifted up by `|A|`.
pub fn disjoint_union(
    a: &RelStructure,
    b: &RelStructure,
) -> Result<(RelStructure, Homomorphism, Homomorphism)> {
    if a.signature() != b.signature() {
        return Err(Error::SignatureMismatch(
            "disjoint union requires a common signature".to_string(),
        ));
    }
    let mut sum = RelStructure::discrete(a.signature().clone(), a.size() + b.size());
    for (name, tuples) in a.relations() {
        for t in tuples {
            sum.insert_tuple(name, t.clone())?;
        }
    }
    for (name, tuples) in b.relations() {
        for t in tuples {
            sum.insert_tuple(name, t.iter().map(|&e| e + a.size()).collect())?;
        }
    }
    let in_a = Homomorphism::new(a.clone(), sum.clone(), (0..a.size()).collect());
    let in_b =
        Homomorphism::new(b.clone(), sum.clone(), (a.size()..a.size() + b.size()).collect());
    Ok((sum, in_a, in_b))
}

/// Per-element incidence profile: for every (symbol, position) the number of
/// tuples holding the element there. Invariant under isomorphism.
fn incidence_profile(a: &RelStructure) -> Vec<Vec<usize>> {
    let mut prof = vec![Vec::new(); a.size()];
    for (name, tuples) in a.relations() {
        let arity = a.signature().arity(name).unwrap();
        for pos in 0..arity {
            let mut counts = vec![0usize; a.size()];
            for t in tuples {
                counts[t[pos]] += 1;
            }
            for (e, c) in counts.into_iter().enumerate() {
                prof[e].push(c);
            }
        }
    }
    prof
}

/// Search for an isomorphism `A -> B` (bijective, preserving and reflecting).
///
/// Deterministic: returns the first map found by lexicographic backtracking
/// over images of `0, 1, 2, ...`, pruned by incidence profiles.
pub fn iso_check(a: &RelStructure, b: &RelStructure) -> Option<Vec<usize>> {
    if a.signature() != b.signature() || a.size() != b.size() {
        return None;
    }
    for (name, tuples) in a.relations() {
        if tuples.len() != b.relation(name).unwrap().len() {
            return None;
        }
    }
    let n = a.size();
    let prof_a = incidence_profile(a);
    let prof_b = incidence_profile(b);
    {
        let mut sa = prof_a.clone();
        let mut sb = prof_b.clone();
        sa.sort_unstable();
        sb.sort_unstable();
        if sa != sb {
            return None;
        }
    }

    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    if iso_backtrack(a, b, &prof_a, &prof_b, &mut map, &mut used, 0) {
        Some(map)
    } else {
        None
    }
}

fn iso_backtrack(
    a: &RelStructure,
    b: &RelStructure,
    prof_a: &[Vec<usize>],
    prof_b: &[Vec<usize>],
    map: &mut Vec<usize>,
    used: &mut Vec<bool>,
    next: usize,
) -> bool {
    let n = a.size();
    if next == n {
        return iso_full_check(a, b, map);
    }
    for candidate in 0..n {
        if used[candidate] || prof_a[next] != prof_b[candidate] {
            continue;
        }
        map[next] = candidate;
        used[candidate] = true;
        if iso_partial_ok(a, b, map, next) && iso_backtrack(a, b, prof_a, prof_b, map, used, next + 1)
        {
            return true;
        }
        used[candidate] = false;
        map[next] = usize::MAX;
    }
    false
}

/// Tuples fully inside the assigned prefix must be preserved and reflected.
fn iso_partial_ok(a: &RelStructure, b: &RelStructure, map: &[usize], next: usize) -> bool {
    for (name, tuples) in a.relations() {
        let tb = b.relation(name).unwrap();
        for t in tuples {
            if t.iter().any(|&e| e > next) {
                continue;
            }
            if t.iter().all(|&e| e != next) {
                continue; // checked at an earlier level
            }
            let image: Vec<usize> = t.iter().map(|&e| map[e]).collect();
            if !tb.contains(&image) {
                return false;
            }
        }
    }
    // reflection on the assigned prefix, restricted to tuples touching the new image
    let inv: BTreeMap<usize, usize> =
        map.iter().take(next + 1).enumerate().map(|(x, &y)| (y, x)).collect();
    for (name, tuples) in b.relations() {
        let ta = a.relation(name).unwrap();
        for t in tuples {
            if !t.iter().any(|&e| e == map[next]) {
                continue;
            }
            if t.iter().all(|e| inv.contains_key(e)) {
                let pre: Vec<usize> = t.iter().map(|e| inv[e]).collect();
                if !ta.contains(&pre) {
                    return false;
                }
            }
        }
    }
    true
}

fn iso_full_check(a: &RelStructure, b: &RelStructure, map: &[usize]) -> bool {
    for (name, tuples) in a.relations() {
        let tb = b.relation(name).unwrap();
        if tuples.len() != tb.len() {
            return false;
        }
        for t in tuples {
            let image: Vec<usize> = t.iter().map(|&e| map[e]).collect();
            if !tb.contains(&image) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{cycle, edgeless, kn, path};

    #[test]
    fn validate_hom_identity_and_k2_into_k3() {
        let k2 = kn(2);
        let k3 = kn(3);
        assert!(validate_hom(&Homomorphism::identity(&k3)).unwrap());
        let f = Homomorphism::new(k2.clone(), k3, vec![0, 1]);
        assert!(validate_hom(&f).unwrap());
        // K2 -> 2*K1 breaks the edge
        let g = Homomorphism::new(k2, edgeless(2), vec![0, 1]);
        assert!(!validate_hom(&g).unwrap());
    }

    #[test]
    fn validate_hom_rejects_malformed_maps() {
        let k2 = kn(2);
        let bad_len = Homomorphism::new(k2.clone(), k2.clone(), vec![0]);
        assert!(matches!(validate_hom(&bad_len), Err(Error::MalformedInput(_))));
        let bad_range = Homomorphism::new(k2.clone(), k2, vec![0, 5]);
        assert!(matches!(validate_hom(&bad_range), Err(Error::MalformedInput(_))));
    }

    #[test]
    fn gaifman_of_single_tuples() {
        let sig = Signature::new(vec![("R", 2)]).unwrap();
        let a = RelStructure::new(sig, 2, vec![("R", vec![vec![0, 1]])]).unwrap();
        let g = gaifman(&a);
        assert_eq!(g.relation("E").unwrap().len(), 2);

        let sig3 = Signature::new(vec![("T", 3)]).unwrap();
        let b = RelStructure::new(sig3, 3, vec![("T", vec![vec![0, 1, 2]])]).unwrap();
        let g3 = gaifman(&b);
        assert_eq!(g3.relation("E").unwrap().len(), 6); // triangle

        let sig_loop = Signature::graph();
        let c = RelStructure::new(sig_loop, 2, vec![("E", vec![vec![0, 0], vec![1, 1]])]).unwrap();
        assert_eq!(gaifman(&c).relation("E").unwrap().len(), 0);
    }

    #[test]
    fn disjoint_union_counts() {
        let k3 = kn(3);
        let (sum, in_a, in_b) = disjoint_union(&k3, &k3).unwrap();
        assert_eq!(sum.size(), 6);
        assert_eq!(sum.relation("E").unwrap().len(), 12);
        assert!(validate_hom(&in_a).unwrap());
        assert!(validate_hom(&in_b).unwrap());

        let empty = edgeless(0);
        let (same, _, _) = disjoint_union(&k3, &empty).unwrap();
        assert!(iso_check(&same, &k3).is_some());

        let (two_k1, _, _) = disjoint_union(&edgeless(1), &edgeless(1)).unwrap();
        assert_eq!(two_k1.tuple_count(), 0);
    }

    #[test]
    fn iso_check_examples() {
        let k3 = kn(3);
        assert_eq!(iso_check(&k3, &k3), Some(vec![0, 1, 2]));
        // C3 relabelled
        let c3 = cycle(3).relabel(&[1, 2, 0]);
        assert!(iso_check(&kn(3), &c3).is_some());
        // C6 vs K3 + K3: different component structure
        let (two_k3, _, _) = disjoint_union(&kn(3), &kn(3)).unwrap();
        assert!(iso_check(&cycle(6), &two_k3).is_none());
        // P3 vs P3 reversed
        assert!(iso_check(&path(3), &path(3).relabel(&[2, 1, 0])).is_some());
    }

    #[test]
    fn strong_embedding_reflects() {
        let k3 = kn(3);
        let f = Homomorphism::new(kn(2), k3.clone(), vec![0, 2]);
        assert!(validate_strong_embedding(&f).unwrap());
        let g = Homomorphism::new(edgeless(2), k3, vec![0, 1]);
        assert!(!validate_strong_embedding(&g).unwrap());
    }

    #[test]
    fn empty_structure_is_permitted() {
        let empty = edgeless(0);
        let k1 = edgeless(1);
        let f = Homomorphism::new(empty.clone(), k1, vec![]);
        assert!(validate_hom(&f).unwrap());
        assert_eq!(iso_check(&empty, &empty), Some(vec![]));
    }

    #[test]
    fn gaifman_commutes_with_disjoint_union() {
        let a = cycle(3);
        let b = path(3);
        let (sum, _, _) = disjoint_union(&a, &b).unwrap();
        let (gsum, _, _) = disjoint_union(&gaifman(&a), &gaifman(&b)).unwrap();
        assert_eq!(gaifman(&sum), gsum);
    }
}
