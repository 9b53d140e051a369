//! Shared helpers for the integration suites: deterministic randomness,
//! random valid instances, and small hom enumerators independent of the
//! library's counting path.

#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use homlab::comonad::ComonadStructure;
use homlab::cover::{ForestCover, PebbleForestCover};
use homlab::enumerate::{enumerate_structures, Enumerated, DEFAULT_GRAPH_ENUM_CAP};
use homlab::harness::{Theorem, TheoremParams, WitnessReport};
use homlab::structure::{PointedStructure, RelStructure, Signature};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn wrap(structure: RelStructure, id: &str) -> Enumerated {
    Enumerated { id: id.to_string(), structure, point: None }
}

/// Recover the structure behind a witness report by replaying the
/// deterministic enumeration.
pub fn witness_structure(
    theorem: Theorem,
    params: &TheoremParams,
    witness_cap: usize,
    witness: &WitnessReport,
) -> RelStructure {
    let class = theorem
        .witness_class(params, &Signature::graph(), true, witness_cap)
        .unwrap();
    let stream = enumerate_structures(&class, DEFAULT_GRAPH_ENUM_CAP).unwrap();
    assert_eq!(stream[witness.index].id, witness.id);
    stream[witness.index].structure.clone()
}

/// Enumerate all homomorphisms `x -> y` in lexicographic order, up to `cap`
/// many. Independent of the library's counting code.
pub fn all_homs(x: &RelStructure, y: &RelStructure, cap: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut map = vec![0usize; x.size()];
    fn ok_prefix(x: &RelStructure, y: &RelStructure, map: &[usize], upto: usize) -> bool {
        for (name, tuples) in x.relations() {
            let ty = y.relation(name).unwrap();
            for t in tuples {
                if t.iter().all(|&e| e < upto) {
                    let image: Vec<usize> = t.iter().map(|&e| map[e]).collect();
                    if !ty.contains(&image) {
                        return false;
                    }
                }
            }
        }
        true
    }
    fn rec(
        x: &RelStructure,
        y: &RelStructure,
        map: &mut Vec<usize>,
        pos: usize,
        cap: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if out.len() >= cap {
            return;
        }
        if pos == x.size() {
            out.push(map.clone());
            return;
        }
        for v in 0..y.size() {
            map[pos] = v;
            if ok_prefix(x, y, map, pos + 1) {
                rec(x, y, map, pos + 1, cap, out);
            }
        }
    }
    if x.size() == 0 {
        return vec![vec![]];
    }
    if y.size() == 0 {
        return vec![];
    }
    rec(x, y, &mut map, 0, cap, &mut out);
    out
}

/// A few homomorphisms from the carrier of `cs` into `target`: the first lex
/// homs plus counit composites with base-level homs.
pub fn some_carrier_maps(
    cs: &ComonadStructure,
    target: &RelStructure,
    cap: usize,
) -> Vec<Vec<usize>> {
    let mut maps = all_homs(&cs.carrier, target, cap);
    for h in all_homs(cs.base.structure(), target, 2) {
        let composite: Vec<usize> = cs.counit.iter().map(|&e| h[e]).collect();
        if !maps.contains(&composite) {
            maps.push(composite);
        }
    }
    maps
}

/// Random structure over the single binary symbol, sizes 1..=max.
pub fn random_structure(rng: &mut StdRng, max: usize) -> RelStructure {
    let n = rng.gen_range(1..=max);
    let mut st = RelStructure::discrete(Signature::graph(), n);
    for u in 0..n {
        for v in 0..n {
            if rng.gen_bool(0.4) {
                st.insert_tuple("E", vec![u, v]).unwrap();
            }
        }
    }
    st
}

/// A random valid instance for equality elimination: an extended structure
/// whose Gaifman edges all satisfy the sees relation of a random pebble
/// forest cover, with at least one non-diagonal I-pair.
pub fn random_extended_instance(rng: &mut StdRng) -> (RelStructure, PebbleForestCover) {
    let sig = Signature::graph().extended().unwrap();
    loop {
        let n = rng.gen_range(2..=6);
        let k = rng.gen_range(2..=3);
        let parent: Vec<Option<usize>> = (0..n)
            .map(|i| {
                if i == 0 || rng.gen_bool(0.25) {
                    None
                } else {
                    Some(rng.gen_range(0..i))
                }
            })
            .collect();
        let forest = ForestCover::new(parent).unwrap();
        let pebbles: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=k)).collect();
        let cover = PebbleForestCover::new(forest, pebbles, k).unwrap();
        // pairs that may carry relations without breaking validity
        let mut seeing: Vec<(usize, usize)> = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if homlab::cover::sees(&cover, a, b) {
                    seeing.push((a, b));
                }
            }
        }
        if seeing.is_empty() {
            continue;
        }
        let mut st = RelStructure::discrete(sig.clone(), n);
        for &(a, b) in &seeing {
            if rng.gen_bool(0.5) {
                let (x, y) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
                st.insert_tuple("E", vec![x, y]).unwrap();
            }
            if rng.gen_bool(0.35) {
                let (x, y) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
                st.insert_tuple("I", vec![x, y]).unwrap();
            }
        }
        for x in 0..n {
            if rng.gen_bool(0.2) {
                st.insert_tuple("E", vec![x, x]).unwrap();
            }
            if rng.gen_bool(0.15) {
                st.insert_tuple("I", vec![x, x]).unwrap();
            }
        }
        if st.relation("I").unwrap().iter().all(|t| t[0] == t[1]) {
            let &(a, b) = &seeing[rng.gen_range(0..seeing.len())];
            st.insert_tuple("I", vec![a, b]).unwrap();
        }
        debug_assert!(homlab::cover::validate_pebble_cover(
            &st,
            &cover,
            k,
            cover.cover.height()
        ));
        return (st, cover);
    }
}

/// Every element reachable from the point along the binary relations.
pub fn is_rooted(p: &PointedStructure) -> bool {
    let st = &p.structure;
    let mut seen = vec![false; st.size()];
    seen[p.point] = true;
    let mut stack = vec![p.point];
    while let Some(x) = stack.pop() {
        for (name, tuples) in st.relations() {
            if st.signature().arity(name) != Some(2) {
                continue;
            }
            for t in tuples {
                if t[0] == x && !seen[t[1]] {
                    seen[t[1]] = true;
                    stack.push(t[1]);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}
