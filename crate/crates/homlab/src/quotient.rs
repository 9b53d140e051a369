//! Quotients, pushouts, the (surjection, induced-embedding) factorisation and
//! the signature-extension adjunction between plain and `I`-extended
//! structures.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::structure::{validate_hom, Homomorphism, RelStructure, EQ_SYMBOL};

/// Default cap on structure size for quotient-object enumeration.
pub const DEFAULT_QUOTIENT_CAP: usize = 5;

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx != ry {
            // keep the smaller index as representative for determinism
            let (lo, hi) = (rx.min(ry), rx.max(ry));
            self.parent[hi] = lo;
        }
    }

    /// Blocks sorted by minimal element; returns (block index per element, blocks).
    fn blocks(&mut self, n: usize) -> (Vec<usize>, Vec<Vec<usize>>) {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..n {
            let r = self.find(x);
            by_root.entry(r).or_default().push(x);
        }
        let blocks: Vec<Vec<usize>> = by_root.into_values().collect();
        let mut index = vec![0usize; n];
        for (i, block) in blocks.iter().enumerate() {
            for &x in block {
                index[x] = i;
            }
        }
        (index, blocks)
    }
}

/// Quotient a structure by a partition given as a block index per element.
/// Relations are the pushforward of the base relations.
fn pushforward(base: &RelStructure, class_of: &[usize], classes: usize) -> RelStructure {
    let mut out = RelStructure::discrete(base.signature().clone(), classes);
    for (name, tuples) in base.relations() {
        for t in tuples {
            out.insert_tuple(name, t.iter().map(|&e| class_of[e]).collect()).unwrap();
        }
    }
    out
}

/// Pushout of `f: A -> B` and `g: A -> C`: the quotient of `B + C` by the
/// least equivalence with `f(a) ~ g(a)`, carrying exactly the images of `B`'s
/// and `C`'s relations.
pub fn pushout(
    f: &Homomorphism,
    g: &Homomorphism,
) -> Result<(RelStructure, Homomorphism, Homomorphism)> {
    if f.source != g.source {
        return Err(Error::MalformedInput("pushout legs must share their source".to_string()));
    }
    if !validate_hom(f)? || !validate_hom(g)? {
        return Err(Error::InvalidHomomorphism("pushout legs must be homomorphisms".to_string()));
    }
    let (sum, in_b, in_c) = crate::structure::disjoint_union(&f.target, &g.target)?;
    let mut uf = UnionFind::new(sum.size());
    for a in 0..f.source.size() {
        uf.union(in_b.map[f.map[a]], in_c.map[g.map[a]]);
    }
    let (class_of, blocks) = uf.blocks(sum.size());
    let d = pushforward(&sum, &class_of, blocks.len());
    let leg_b = Homomorphism::new(
        f.target.clone(),
        d.clone(),
        (0..f.target.size()).map(|x| class_of[in_b.map[x]]).collect(),
    );
    let leg_c = Homomorphism::new(
        g.target.clone(),
        d.clone(),
        (0..g.target.size()).map(|x| class_of[in_c.map[x]]).collect(),
    );
    Ok((d, leg_b, leg_c))
}

/// Factor `f = m . e` with `e` surjective and `m` a strong (induced)
/// embedding; the middle structure is the image of `f` with the structure
/// induced by the target.
pub fn epi_mono_factorize(f: &Homomorphism) -> Result<(Homomorphism, Homomorphism)> {
    if !validate_hom(f)? {
        return Err(Error::InvalidHomomorphism("cannot factor a non-homomorphism".to_string()));
    }
    let image: Vec<usize> = {
        let set: BTreeSet<usize> = f.map.iter().copied().collect();
        set.into_iter().collect()
    };
    let middle = f.target.induced(&image);
    let rank: BTreeMap<usize, usize> = image.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let e = Homomorphism::new(
        f.source.clone(),
        middle.clone(),
        f.map.iter().map(|v| rank[v]).collect(),
    );
    let m = Homomorphism::new(middle, f.target.clone(), image);
    Ok((e, m))
}

/// A surjection onto a quotient structure, considered up to isomorphisms
/// commuting with the surjection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientObject {
    pub base: RelStructure,
    pub partition: Vec<Vec<usize>>,
    pub codomain: RelStructure,
    pub surjection: Homomorphism,
    /// True when the surjection is not an isomorphism onto the base.
    pub strict: bool,
}

/// Enumerate all set partitions of `0..n`, blocks ordered by minimal element.
fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut current: Vec<Vec<usize>> = Vec::new();
    fn rec(x: usize, n: usize, current: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if x == n {
            out.push(current.clone());
            return;
        }
        for i in 0..current.len() {
            current[i].push(x);
            rec(x + 1, n, current, out);
            current[i].pop();
        }
        current.push(vec![x]);
        rec(x + 1, n, current, out);
        current.pop();
    }
    rec(0, n, &mut current, &mut out);
    out
}

/// All quotient objects of `c`: a partition of the universe together with any
/// codomain structure containing the pushforward relations. One
/// representative per equivalence class (blocks labelled by minimal element),
/// identity quotient included.
pub fn enumerate_quotient_objects(c: &RelStructure, cap: usize) -> Result<Vec<QuotientObject>> {
    if c.size() > cap {
        return Err(Error::CapExceeded {
            what: "quotient-object enumeration".to_string(),
            size: c.size(),
            cap,
        });
    }
    let mut out = Vec::new();
    for partition in set_partitions(c.size()) {
        let mut class_of = vec![0usize; c.size()];
        for (i, block) in partition.iter().enumerate() {
            for &x in block {
                class_of[x] = i;
            }
        }
        let m = partition.len();
        let floor = pushforward(c, &class_of, m);
        // free tuples: everything the pushforward does not already force
        let mut free: Vec<(String, Vec<usize>)> = Vec::new();
        if m > 0 {
            for (name, forced) in floor.relations() {
                let arity = c.signature().arity(name).unwrap();
                let mut tuple = vec![0usize; arity];
                loop {
                    if !forced.contains(&tuple) {
                        free.push((name.to_string(), tuple.clone()));
                    }
                    // advance odometer
                    let mut pos = arity;
                    loop {
                        if pos == 0 {
                            break;
                        }
                        pos -= 1;
                        tuple[pos] += 1;
                        if tuple[pos] < m {
                            break;
                        }
                        tuple[pos] = 0;
                    }
                    if tuple.iter().all(|&d| d == 0) {
                        break;
                    }
                }
            }
        }
        if free.len() > 30 {
            return Err(Error::CapExceeded {
                what: "free codomain tuples in quotient-object enumeration".to_string(),
                size: free.len(),
                cap: 30,
            });
        }
        let discrete = m == c.size();
        for mask in 0..(1u64 << free.len()) {
            let mut codomain = floor.clone();
            for (bit, (name, tuple)) in free.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    codomain.insert_tuple(name, tuple.clone())?;
                }
            }
            // the surjection is an isomorphism onto c iff the partition is
            // discrete and no extra tuple was added
            let strict = !(discrete && mask == 0);
            let surjection = Homomorphism::new(c.clone(), codomain.clone(), class_of.clone());
            out.push(QuotientObject {
                base: c.clone(),
                partition: partition.clone(),
                codomain,
                surjection,
                strict,
            });
        }
    }
    Ok(out)
}

/// Interpret a plain structure over the extended signature, reading `I` as
/// the identity relation.
pub fn functor_j(a: &RelStructure) -> Result<RelStructure> {
    let ext = a.signature().extended()?;
    let mut out = RelStructure::discrete(ext, a.size());
    for (name, tuples) in a.relations() {
        for t in tuples {
            out.insert_tuple(name, t.clone())?;
        }
    }
    for x in a.elements() {
        out.insert_tuple(EQ_SYMBOL, vec![x, x])?;
    }
    Ok(out)
}

/// Collapse an extended structure along the equivalence generated by `I` and
/// drop `I`; returns the quotient structure and the class of each element.
pub fn functor_h(d: &RelStructure) -> Result<(RelStructure, Vec<usize>)> {
    if !d.signature().contains(EQ_SYMBOL) {
        return Err(Error::MissingSymbol(EQ_SYMBOL.to_string()));
    }
    let mut uf = UnionFind::new(d.size());
    for t in d.relation(EQ_SYMBOL)? {
        uf.union(t[0], t[1]);
    }
    let (class_of, blocks) = uf.blocks(d.size());
    let reduct_sig = d.signature().reduct()?;
    let mut out = RelStructure::discrete(reduct_sig, blocks.len());
    for (name, tuples) in d.relations() {
        if name == EQ_SYMBOL {
            continue;
        }
        for t in tuples {
            out.insert_tuple(name, t.iter().map(|&e| class_of[e]).collect())?;
        }
    }
    Ok((out, class_of))
}

/// The sigma-reduct of an extended structure (relations unchanged, `I` dropped).
pub fn sigma_reduct(d: &RelStructure) -> Result<RelStructure> {
    let sig = d.signature().reduct()?;
    let mut out = RelStructure::discrete(sig, d.size());
    for (name, tuples) in d.relations() {
        if name == EQ_SYMBOL {
            continue;
        }
        for t in tuples {
            out.insert_tuple(name, t.clone())?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{edgeless, kn, path};
    use crate::structure::{iso_check, Signature};

    #[test]
    fn pushout_of_identities_is_identity() {
        let a = kn(3);
        let id = Homomorphism::identity(&a);
        let (d, _, _) = pushout(&id, &id).unwrap();
        assert!(iso_check(&d, &a).is_some());
    }

    #[test]
    fn pushout_glues_two_edges_into_a_path() {
        // K1 -> K2 picking endpoint 0 on both sides gives P3
        let k1 = edgeless(1);
        let k2 = kn(2);
        let f = Homomorphism::new(k1.clone(), k2.clone(), vec![0]);
        let g = Homomorphism::new(k1, k2, vec![0]);
        let (d, leg_b, leg_c) = pushout(&f, &g).unwrap();
        assert_eq!(d.size(), 3);
        assert!(iso_check(&d, &path(3)).is_some());
        assert!(validate_hom(&leg_b).unwrap());
        assert!(validate_hom(&leg_c).unwrap());
    }

    #[test]
    fn pushout_over_empty_is_disjoint_union() {
        let empty = edgeless(0);
        let b = kn(2);
        let c = path(3);
        let f = Homomorphism::new(empty.clone(), b.clone(), vec![]);
        let g = Homomorphism::new(empty, c.clone(), vec![]);
        let (d, _, _) = pushout(&f, &g).unwrap();
        let (sum, _, _) = crate::structure::disjoint_union(&b, &c).unwrap();
        assert!(iso_check(&d, &sum).is_some());
    }

    #[test]
    fn factorization_basic_cases() {
        let a = kn(3);
        let id = Homomorphism::identity(&a);
        let (e, m) = epi_mono_factorize(&id).unwrap();
        assert_eq!(e.map, m.map);
        assert_eq!(e.then(&m).unwrap(), id);

        // 2*K1 -> K1, both points to 0
        let f = Homomorphism::new(edgeless(2), edgeless(1), vec![0, 0]);
        let (e, m) = epi_mono_factorize(&f).unwrap();
        assert!(e.is_surjective());
        assert_eq!(m.map, vec![0]);

        // K2 + K1 -> K2, K2 identically, K1 to vertex 0: image is the full edge
        let (sum, _, _) = crate::structure::disjoint_union(&kn(2), &edgeless(1)).unwrap();
        let f = Homomorphism::new(sum, kn(2), vec![0, 1, 0]);
        let (e, m) = epi_mono_factorize(&f).unwrap();
        assert!(iso_check(&e.target, &kn(2)).is_some());
        assert!(crate::structure::validate_strong_embedding(&m).unwrap());
        assert_eq!(e.then(&m).unwrap(), f);
    }

    #[test]
    fn quotient_objects_of_a_point() {
        // one element, no relations, over {E binary}: E in {empty, loop}
        let c = edgeless(1);
        let objs = enumerate_quotient_objects(&c, DEFAULT_QUOTIENT_CAP).unwrap();
        assert_eq!(objs.len(), 2);
        assert_eq!(objs.iter().filter(|o| o.strict).count(), 1);
    }

    #[test]
    fn quotient_objects_of_a_directed_edge() {
        let c = crate::graphs::directed_edge();
        let objs = enumerate_quotient_objects(&c, DEFAULT_QUOTIENT_CAP).unwrap();
        assert_eq!(objs.len(), 9);
        assert_eq!(objs.iter().filter(|o| o.strict).count(), 8);
        for o in &objs {
            assert!(validate_hom(&o.surjection).unwrap());
            assert!(o.surjection.is_surjective());
        }
    }

    #[test]
    fn quotient_objects_of_empty() {
        let c = edgeless(0);
        let objs = enumerate_quotient_objects(&c, DEFAULT_QUOTIENT_CAP).unwrap();
        assert_eq!(objs.len(), 1);
        assert!(!objs[0].strict);
    }

    #[test]
    fn quotient_cap_is_enforced() {
        let c = edgeless(6);
        assert!(matches!(
            enumerate_quotient_objects(&c, 5),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn j_adds_the_diagonal() {
        let k2 = kn(2);
        let j = functor_j(&k2).unwrap();
        assert_eq!(j.relation(EQ_SYMBOL).unwrap().len(), 2);
        assert_eq!(j.relation("E").unwrap(), k2.relation("E").unwrap());
        // J on an extended signature is a name clash
        assert!(matches!(functor_j(&j), Err(Error::NameClash(_))));
    }

    #[test]
    fn h_collapses_generated_equivalence() {
        // two elements, I = {(0,1)}, E = {(0,0)} -> one element with a loop
        let sig = Signature::graph().extended().unwrap();
        let d = RelStructure::new(
            sig.clone(),
            2,
            vec![("I", vec![vec![0, 1]]), ("E", vec![vec![0, 0]])],
        )
        .unwrap();
        let (h, class_of) = functor_h(&d).unwrap();
        assert_eq!(h.size(), 1);
        assert_eq!(h.relation("E").unwrap().len(), 1);
        assert_eq!(class_of, vec![0, 0]);

        // transitve closure: I = {(0,1),(1,2)} on 3 elements
        let d2 = RelStructure::new(sig, 3, vec![("I", vec![vec![0, 1], vec![1, 2]])]).unwrap();
        let (h2, _) = functor_h(&d2).unwrap();
        assert_eq!(h2.size(), 1);
        assert_eq!(h2.tuple_count(), 0);
    }

    #[test]
    fn h_after_j_is_identity() {
        for a in [kn(3), kn(4), path(4), edgeless(2)] {
            let (back, _) = functor_h(&functor_j(&a).unwrap()).unwrap();
            assert!(iso_check(&back, &a).is_some());
        }
    }
}
