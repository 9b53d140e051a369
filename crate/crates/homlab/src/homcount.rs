//! Exact homomorphism counting: plain, strong-embedding and pointed variants
//! by backtracking, plus a dynamic-programming path driven by a pebble forest
//! cover of the source.

use std::collections::{BTreeSet, HashMap};

use crate::cover::{sees, PebbleForestCover};
use crate::error::{Error, Result};
use crate::structure::{PointedStructure, RelStructure};

/// Hom counts from a fixed family of sources into one target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomVector {
    pub sources: Vec<String>,
    pub counts: Vec<u64>,
}

fn checked_add(a: u64, b: u64) -> Result<u64> {
    a.checked_add(b).ok_or(Error::Overflow)
}

fn checked_mul(a: u64, b: u64) -> Result<u64> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

/// Per-element assignment order and the tuples to check as each element is
/// assigned (those whose latest element in the order it is).
struct SearchPlan {
    order: Vec<usize>,
    /// checks[i]: tuples (symbol index, tuple) decided at assignment i
    checks: Vec<Vec<(usize, Vec<usize>)>>,
}

fn plan_backtracking(c: &RelStructure, forced_first: Option<usize>) -> SearchPlan {
    let adj = c.gaifman_neighbours();
    let mut order: Vec<usize> = Vec::with_capacity(c.size());
    for comp in c.gaifman_components() {
        let mut comp: Vec<usize> = comp;
        // descending Gaifman degree, ties by index
        comp.sort_by_key(|&v| (std::cmp::Reverse(adj[v].len()), v));
        if let Some(f) = forced_first {
            if let Some(pos) = comp.iter().position(|&v| v == f) {
                comp.remove(pos);
                comp.insert(0, f);
            }
        }
        order.extend(comp);
    }
    let rank = {
        let mut r = vec![0usize; c.size()];
        for (i, &v) in order.iter().enumerate() {
            r[v] = i;
        }
        r
    };
    let mut checks = vec![Vec::new(); c.size()];
    for (sym_idx, (_, tuples)) in c.relations().enumerate() {
        for t in tuples {
            let latest = t.iter().map(|&e| rank[e]).max().unwrap();
            checks[latest].push((sym_idx, t.clone()));
        }
    }
    SearchPlan { order, checks }
}

fn target_tuple_sets(a: &RelStructure) -> Vec<BTreeSet<Vec<usize>>> {
    a.relations().map(|(_, ts)| ts.clone()).collect()
}

fn count_maps(
    c: &RelStructure,
    a: &RelStructure,
    plan: &SearchPlan,
    forced: Option<(usize, usize)>,
) -> Result<u64> {
    let targets = target_tuple_sets(a);
    let mut assignment = vec![usize::MAX; c.size()];
    fn rec(
        plan: &SearchPlan,
        targets: &[BTreeSet<Vec<usize>>],
        a_size: usize,
        assignment: &mut Vec<usize>,
        level: usize,
        forced: Option<(usize, usize)>,
    ) -> Result<u64> {
        if level == plan.order.len() {
            return Ok(1);
        }
        let elem = plan.order[level];
        let candidates: Vec<usize> = match forced {
            Some((f, v)) if f == elem => vec![v],
            _ => (0..a_size).collect(),
        };
        let mut total = 0u64;
        'cand: for v in candidates {
            assignment[elem] = v;
            for (sym, tuple) in &plan.checks[level] {
                let image: Vec<usize> = tuple.iter().map(|&e| assignment[e]).collect();
                if !targets[*sym].contains(&image) {
                    continue 'cand;
                }
            }
            let below = rec(plan, targets, a_size, assignment, level + 1, forced)?;
            total = checked_add(total, below)?;
        }
        assignment[elem] = usize::MAX;
        Ok(total)
    }
    rec(plan, &targets, a.size(), &mut assignment, 0, forced)
}

/// Number of homomorphisms `C -> A`.
pub fn hom_count(c: &RelStructure, a: &RelStructure) -> Result<u64> {
    if c.signature() != a.signature() {
        return Err(Error::SignatureMismatch("hom counting needs a common signature".to_string()));
    }
    // components are independent; count each and multiply
    let mut total = 1u64;
    for comp in c.gaifman_components() {
        let sub = c.induced(&comp);
        let plan = plan_backtracking(&sub, None);
        total = checked_mul(total, count_maps(&sub, a, &plan, None)?)?;
    }
    Ok(total)
}

/// Number of strong (induced) embeddings `C -> A`: injective maps whose image
/// carries exactly the structure of `C`.
pub fn strong_emb_count(c: &RelStructure, a: &RelStructure) -> Result<u64> {
    if c.signature() != a.signature() {
        return Err(Error::SignatureMismatch("embedding counting needs a common signature".to_string()));
    }
    if c.size() > a.size() {
        return Ok(0);
    }
    // injectivity couples components, so run one global backtracking search
    let plan = plan_backtracking(c, None);
    let targets = target_tuple_sets(a);
    let mut assignment = vec![usize::MAX; c.size()];
    let mut used = vec![false; a.size()];
    fn rec(
        c: &RelStructure,
        a: &RelStructure,
        plan: &SearchPlan,
        targets: &[BTreeSet<Vec<usize>>],
        assignment: &mut Vec<usize>,
        used: &mut Vec<bool>,
        level: usize,
    ) -> Result<u64> {
        if level == plan.order.len() {
            return Ok(if reflects(c, a, assignment) { 1 } else { 0 });
        }
        let elem = plan.order[level];
        let mut total = 0u64;
        'cand: for v in 0..a.size() {
            if used[v] {
                continue;
            }
            assignment[elem] = v;
            for (sym, tuple) in &plan.checks[level] {
                let image: Vec<usize> = tuple.iter().map(|&e| assignment[e]).collect();
                if !targets[*sym].contains(&image) {
                    continue 'cand;
                }
            }
            used[v] = true;
            let below = rec(c, a, plan, targets, assignment, used, level + 1)?;
            total = checked_add(total, below)?;
            used[v] = false;
        }
        assignment[elem] = usize::MAX;
        Ok(total)
    }
    rec(c, a, &plan, &targets, &mut assignment, &mut used, 0)
}

/// Does the (injective, preserving) map also reflect every relation?
fn reflects(c: &RelStructure, a: &RelStructure, map: &[usize]) -> bool {
    let inv: HashMap<usize, usize> = map.iter().enumerate().map(|(x, &v)| (v, x)).collect();
    for (name, tuples) in a.relations() {
        let source = c.relation(name).unwrap();
        for t in tuples {
            if t.iter().all(|e| inv.contains_key(e)) {
                let pre: Vec<usize> = t.iter().map(|e| inv[e]).collect();
                if !source.contains(&pre) {
                    return false;
                }
            }
        }
    }
    true
}

/// Number of point-preserving homomorphisms between pointed structures.
pub fn pointed_hom_count(c: &PointedStructure, a: &PointedStructure) -> Result<u64> {
    if c.structure.signature() != a.structure.signature() {
        return Err(Error::SignatureMismatch("hom counting needs a common signature".to_string()));
    }
    let mut total = 1u64;
    for comp in c.structure.gaifman_components() {
        let sub = c.structure.induced(&comp);
        if let Some(pos) = comp.iter().position(|&v| v == c.point) {
            let plan = plan_backtracking(&sub, Some(pos));
            let n = count_maps(&sub, &a.structure, &plan, Some((pos, a.point)))?;
            total = checked_mul(total, n)?;
        } else {
            let plan = plan_backtracking(&sub, None);
            total = checked_mul(total, count_maps(&sub, &a.structure, &plan, None)?)?;
        }
    }
    Ok(total)
}

/// Count homomorphisms by dynamic programming over a pebble forest cover of
/// the source: tables are keyed by the assignment of the currently visible
/// (most recently pebbled) ancestors, so at most `k` elements at a time.
pub fn hom_count_treedec(
    c: &RelStructure,
    cover: &PebbleForestCover,
    a: &RelStructure,
) -> Result<u64> {
    if c.signature() != a.signature() {
        return Err(Error::SignatureMismatch("hom counting needs a common signature".to_string()));
    }
    if !crate::cover::validate_pebble_cover(c, cover, cover.k, c.size().max(1)) {
        return Err(Error::InvalidCover(
            "supplied cover does not validate for the source structure".to_string(),
        ));
    }
    let n = c.size();
    // children lists and roots, ordered by element index
    let mut children = vec![Vec::new(); n];
    let mut roots = Vec::new();
    for x in 0..n {
        match cover.cover.parent(x) {
            Some(p) => children[p].push(x),
            None => roots.push(x),
        }
    }
    // active(x): ancestors y <= x (inclusive) whose pebble does not recur on (y, x]
    let active: Vec<Vec<usize>> = (0..n)
        .map(|x| {
            let path = cover.cover.root_path(x);
            path.iter()
                .copied()
                .filter(|&y| sees(cover, y, x))
                .collect()
        })
        .collect();
    // tuples checked at their forest-deepest element
    let mut checks: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); n];
    for (sym, (_, tuples)) in c.relations().enumerate() {
        for t in tuples {
            let deepest = t
                .iter()
                .copied()
                .max_by_key(|&e| cover.cover.depth(e))
                .unwrap();
            checks[deepest].push((sym, t.clone()));
        }
    }
    let targets = target_tuple_sets(a);

    // memoised subtree counts: (element, assignment of active(x) minus x)
    let mut memo: HashMap<(usize, Vec<usize>), u64> = HashMap::new();

    fn subtree_count(
        x: usize,
        ctx: &HashMap<usize, usize>, // assignment of x's strict active ancestors
        a_size: usize,
        children: &[Vec<usize>],
        active: &[Vec<usize>],
        checks: &[Vec<(usize, Vec<usize>)>],
        targets: &[BTreeSet<Vec<usize>>],
        memo: &mut HashMap<(usize, Vec<usize>), u64>,
    ) -> Result<u64> {
        let key: Vec<usize> = active[x]
            .iter()
            .filter(|&&y| y != x)
            .map(|y| ctx[y])
            .collect();
        if let Some(&v) = memo.get(&(x, key.clone())) {
            return Ok(v);
        }
        let mut total = 0u64;
        'val: for v in 0..a_size {
            let mut env = ctx.clone();
            env.insert(x, v);
            for (sym, tuple) in &checks[x] {
                let image: Vec<usize> = tuple.iter().map(|e| env[e]).collect();
                if !targets[*sym].contains(&image) {
                    continue 'val;
                }
            }
            let mut prod = 1u64;
            for &ch in &children[x] {
                let child_ctx: HashMap<usize, usize> = active[ch]
                    .iter()
                    .filter(|&&y| y != ch)
                    .map(|&y| (y, env[&y]))
                    .collect();
                let sub = subtree_count(
                    ch, &child_ctx, a_size, children, active, checks, targets, memo,
                )?;
                prod = checked_mul(prod, sub)?;
            }
            total = checked_add(total, prod)?;
        }
        memo.insert((x, key), total);
        Ok(total)
    }

    let mut total = 1u64;
    for &r in &roots {
        let ctx = HashMap::new();
        let cnt = subtree_count(
            r, &ctx, a.size(), &children, &active, &checks, &targets, &mut memo,
        )?;
        total = checked_mul(total, cnt)?;
    }
    Ok(total)
}
