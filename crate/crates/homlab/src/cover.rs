//! Forest covers and pebble forest covers: the combinatorial certificates for
//! tree-depth, tree-width and height-bounded width, plus the two
//! equality-elimination quotient constructions on covers.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::quotient::{functor_h, sigma_reduct};
use crate::structure::{RelStructure, EQ_SYMBOL};

/// Default cap on structure size for exact tree-depth / cover search.
pub const DEFAULT_COVER_CAP: usize = 10;

/// A forest partial order on the universe of `base`, stored as a parent
/// array (`None` marks roots). Compatibility with the Gaifman graph is a
/// property checked by [`ForestCover::is_compatible`], not an invariant of
/// the representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestCover {
    parent: Vec<Option<usize>>,
    depth: Vec<usize>, // number of nodes on the root path, >= 1
}

impl ForestCover {
    pub fn new(parent: Vec<Option<usize>>) -> Result<Self> {
        let n = parent.len();
        let mut depth = vec![0usize; n];
        for start in 0..n {
            // walk up, detecting cycles by step count
            let mut steps = 0;
            let mut x = start;
            while let Some(p) = parent[x] {
                if p >= n {
                    return Err(Error::InvalidCover(format!("parent {p} out of range")));
                }
                x = p;
                steps += 1;
                if steps > n {
                    return Err(Error::InvalidCover("parent links contain a cycle".to_string()));
                }
            }
            depth[start] = steps + 1;
        }
        Ok(ForestCover { parent, depth })
    }

    pub fn size(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, x: usize) -> Option<usize> {
        self.parent[x]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    /// Number of nodes on the root path of `x`, root itself counting 1.
    pub fn depth(&self, x: usize) -> usize {
        self.depth[x]
    }

    /// Max root-path length in nodes; 0 for the empty forest.
    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Is `a <= b` in the forest order (`a` an ancestor of `b` or equal)?
    pub fn le(&self, a: usize, b: usize) -> bool {
        let mut x = b;
        loop {
            if x == a {
                return true;
            }
            match self.parent[x] {
                Some(p) => x = p,
                None => return false,
            }
        }
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.le(a, b) || self.le(b, a)
    }

    /// The root path of `x`, from the root down to `x` inclusive.
    pub fn root_path(&self, x: usize) -> Vec<usize> {
        let mut path = Vec::with_capacity(self.depth[x]);
        let mut cur = Some(x);
        while let Some(y) = cur {
            path.push(y);
            cur = self.parent[y];
        }
        path.reverse();
        path
    }

    /// Gaifman-adjacent elements must be comparable.
    pub fn is_compatible(&self, base: &RelStructure) -> bool {
        base.size() == self.size()
            && base.gaifman_edges().iter().all(|&(a, b)| self.comparable(a, b))
    }
}

/// A forest cover together with a pebbling function into `{1..k}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PebbleForestCover {
    pub cover: ForestCover,
    pub pebbles: Vec<usize>,
    pub k: usize,
}

impl PebbleForestCover {
    pub fn new(cover: ForestCover, pebbles: Vec<usize>, k: usize) -> Result<Self> {
        if pebbles.len() != cover.size() {
            return Err(Error::InvalidCover("pebble array length mismatch".to_string()));
        }
        if k == 0 || pebbles.iter().any(|&p| p == 0 || p > k) {
            return Err(Error::InvalidCover(format!("pebbles must lie in 1..={k}")));
        }
        Ok(PebbleForestCover { cover, pebbles, k })
    }
}

/// The sees relation: `a` and `b` are comparable and the pebble of the lower
/// one does not recur strictly between them (upper endpoint included).
pub fn sees(cover: &PebbleForestCover, a: usize, b: usize) -> bool {
    let (lo, hi) = if cover.cover.le(a, b) {
        (a, b)
    } else if cover.cover.le(b, a) {
        (b, a)
    } else {
        return false;
    };
    let p_lo = cover.pebbles[lo];
    let mut x = hi;
    while x != lo {
        if cover.pebbles[x] == p_lo {
            return false;
        }
        x = cover.cover.parent(x).expect("lo is an ancestor of hi");
    }
    true
}

/// Does `cover` witness a k-pebble forest cover of height at most `n` for `a`?
pub fn validate_pebble_cover(
    a: &RelStructure,
    cover: &PebbleForestCover,
    k: usize,
    n: usize,
) -> bool {
    cover.cover.size() == a.size()
        && cover.pebbles.iter().all(|&p| 1 <= p && p <= k)
        && cover.cover.height() <= n
        && a.gaifman_edges().iter().all(|&(x, y)| sees(cover, x, y))
}

/// Exact tree-depth with a witnessing compatible forest cover.
///
/// Recursion over the Gaifman graph: the tree-depth of a connected graph is
/// one more than the best vertex deletion, of a disconnected graph the max
/// over components. Memoised on vertex subsets.
pub fn compute_tree_depth(a: &RelStructure, cap: usize) -> Result<(usize, ForestCover)> {
    if a.size() > cap || a.size() > 31 {
        return Err(Error::CapExceeded {
            what: "tree-depth computation".to_string(),
            size: a.size(),
            cap: cap.min(31),
        });
    }
    let adj = a.gaifman_neighbours();
    let full: u32 = (1u32 << a.size()) - 1;
    let mut memo = std::collections::HashMap::new();
    let mut parent = vec![None; a.size()];
    let depth = td_rec(&adj, full, &mut memo, &mut parent, None);
    Ok((depth, ForestCover::new(parent)?))
}

/// Tree-depth of the sub-vertex-set `mask`; writes parents of the witness
/// into `parent` with everything hanging below `above`.
fn td_rec(
    adj: &[BTreeSet<usize>],
    mask: u32,
    memo: &mut std::collections::HashMap<u32, usize>,
    parent: &mut Vec<Option<usize>>,
    above: Option<usize>,
) -> usize {
    if mask == 0 {
        return 0;
    }
    let comps = mask_components(adj, mask);
    if comps.len() > 1 {
        return comps
            .into_iter()
            .map(|c| td_rec(adj, c, memo, parent, above))
            .max()
            .unwrap();
    }
    // connected: 1 + min over deleted vertices
    let comp = comps[0];
    let best_v = {
        let mut best = (usize::MAX, 0usize);
        for v in bits(comp) {
            let sub = comp & !(1 << v);
            let d = td_value(adj, sub, memo);
            if d + 1 < best.0 {
                best = (d + 1, v);
            }
        }
        best.1
    };
    parent[best_v] = above;
    1 + td_rec(adj, comp & !(1 << best_v), memo, parent, Some(best_v))
}

/// Value-only variant used inside the minimisation (no witness bookkeeping).
fn td_value(adj: &[BTreeSet<usize>], mask: u32, memo: &mut std::collections::HashMap<u32, usize>) -> usize {
    if mask == 0 {
        return 0;
    }
    if let Some(&d) = memo.get(&mask) {
        return d;
    }
    let comps = mask_components(adj, mask);
    let d = if comps.len() > 1 {
        comps.into_iter().map(|c| td_value(adj, c, memo)).max().unwrap()
    } else {
        1 + bits(comps[0])
            .map(|v| td_value(adj, comps[0] & !(1 << v), memo))
            .min()
            .unwrap()
    };
    memo.insert(mask, d);
    d
}

fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |&i| mask >> i & 1 == 1)
}

fn mask_components(adj: &[BTreeSet<usize>], mask: u32) -> Vec<u32> {
    let mut seen = 0u32;
    let mut comps = Vec::new();
    for start in bits(mask) {
        if seen >> start & 1 == 1 {
            continue;
        }
        let mut comp = 0u32;
        let mut stack = vec![start];
        seen |= 1 << start;
        while let Some(v) = stack.pop() {
            comp |= 1 << v;
            for &w in &adj[v] {
                if mask >> w & 1 == 1 && seen >> w & 1 == 0 {
                    seen |= 1 << w;
                    stack.push(w);
                }
            }
        }
        comps.push(comp);
    }
    comps
}

/// Search for a k-pebble forest cover of `a`, height-bounded when `n` is
/// given. Exhaustive branch-and-bound: elements are placed one at a time as a
/// new leaf (or root), with constraints checked incrementally. Returns the
/// first cover found in the deterministic search order, or `None` when the
/// search exhausts.
pub fn find_pebble_forest_cover(
    a: &RelStructure,
    k: usize,
    n: Option<usize>,
    cap: usize,
) -> Result<Option<PebbleForestCover>> {
    if a.size() > cap {
        return Err(Error::CapExceeded { what: "cover search".to_string(), size: a.size(), cap });
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".to_string()));
    }
    let height_bound = n.unwrap_or(a.size()).min(a.size());
    if a.size() > 0 && height_bound == 0 {
        return Ok(None);
    }
    let adj = a.gaifman_neighbours();
    let mut parent = vec![None; a.size()];
    let mut pebbles = vec![0usize; a.size()];
    let mut depth = vec![0usize; a.size()];

    // search each Gaifman component independently; adjacent elements must be
    // comparable, so a component always fits in a single tree
    for comp in a.gaifman_components() {
        if !place_component(&adj, &comp, height_bound, k, &mut parent, &mut pebbles, &mut depth) {
            return Ok(None);
        }
    }
    let cover = ForestCover::new(parent)?;
    let pfc = PebbleForestCover::new(cover, pebbles, k)?;
    debug_assert!(validate_pebble_cover(a, &pfc, k, height_bound));
    Ok(Some(pfc))
}

fn place_component(
    adj: &[BTreeSet<usize>],
    comp: &[usize],
    height_bound: usize,
    k: usize,
    parent: &mut Vec<Option<usize>>,
    pebbles: &mut Vec<usize>,
    depth: &mut Vec<usize>,
) -> bool {
    fn rec(
        adj: &[BTreeSet<usize>],
        comp: &[usize],
        placed: &mut Vec<usize>,
        height_bound: usize,
        k: usize,
        parent: &mut Vec<Option<usize>>,
        pebbles: &mut Vec<usize>,
        depth: &mut Vec<usize>,
    ) -> bool {
        if placed.len() == comp.len() {
            return true;
        }
        for &x in comp {
            if placed.contains(&x) {
                continue;
            }
            // candidate anchors: a new root (first element only), or a new
            // leaf below any placed element
            let mut anchors: Vec<Option<usize>> = Vec::with_capacity(placed.len() + 1);
            if placed.is_empty() {
                anchors.push(None);
            }
            for &y in placed.iter() {
                anchors.push(Some(y));
            }
            for anchor in anchors {
                let d = anchor.map_or(1, |y| depth[y] + 1);
                if d > height_bound {
                    continue;
                }
                parent[x] = anchor;
                depth[x] = d;
                // every already placed neighbour of x must be an ancestor;
                // the root path is fixed regardless of x's pebble
                let root_path: Vec<usize> = {
                    let mut path = Vec::new();
                    let mut cur = anchor;
                    while let Some(z) = cur {
                        path.push(z);
                        cur = parent[z];
                    }
                    path
                };
                let anchored = placed
                    .iter()
                    .filter(|y| adj[x].contains(y))
                    .all(|y| root_path.contains(y));
                if anchored {
                    'pebble: for p in 1..=k {
                        pebbles[x] = p;
                        // sees(y, x) for each placed neighbour y: y's pebble
                        // must not recur on (y, x]
                        for &y in adj[x].iter().filter(|y| placed.contains(y)) {
                            let mut z = x;
                            while z != y {
                                if pebbles[z] == pebbles[y] {
                                    continue 'pebble;
                                }
                                z = parent[z].unwrap();
                            }
                        }
                        placed.push(x);
                        if rec(adj, comp, placed, height_bound, k, parent, pebbles, depth) {
                            return true;
                        }
                        placed.pop();
                    }
                }
                parent[x] = None;
                pebbles[x] = 0;
                depth[x] = 0;
            }
        }
        false
    }
    let mut placed = Vec::new();
    rec(adj, comp, &mut placed, height_bound, k, parent, pebbles, depth)
}

/// Tree-width via cover search: the least `k` admitting a pebble forest cover,
/// minus one.
pub fn tree_width(a: &RelStructure, cap: usize) -> Result<usize> {
    if a.size() == 0 {
        return Ok(0);
    }
    for k in 1..=a.size() {
        if find_pebble_forest_cover(a, k, None, cap)?.is_some() {
            return Ok(k - 1);
        }
    }
    unreachable!("a chain cover with distinct pebbles always exists at k = |A|")
}

/// Transfer a forest cover of an extended structure to its `I`-quotient: each
/// class is mapped to its forest-minimal member, and the quotient order is
/// the restriction to those representatives.
pub fn quotient_forest_cover(d: &RelStructure, cover: &ForestCover) -> Result<ForestCover> {
    if cover.size() != d.size() {
        return Err(Error::InvalidCover("cover size does not match structure".to_string()));
    }
    if !cover.is_compatible(d) {
        return Err(Error::InvalidCover("cover is not compatible with the structure".to_string()));
    }
    let (h, class_of) = functor_h(d)?;
    let classes = h.size();
    // representative of each class: the forest-minimal member
    let mut reps = vec![usize::MAX; classes];
    for c in 0..classes {
        let members: Vec<usize> = (0..d.size()).filter(|&x| class_of[x] == c).collect();
        let min = members
            .iter()
            .copied()
            .find(|&m| members.iter().all(|&x| cover.le(m, x)))
            .ok_or_else(|| {
                Error::InvalidCover(
                    "equivalence class has no forest-minimal member; cover invalid".to_string(),
                )
            })?;
        reps[c] = min;
    }
    // parent of class c: the class of the nearest strict ancestor of reps[c]
    // that is itself a representative
    let is_rep = {
        let mut v = vec![false; d.size()];
        for &r in &reps {
            v[r] = true;
        }
        v
    };
    let mut parent = vec![None; classes];
    for c in 0..classes {
        let mut cur = cover.parent(reps[c]);
        while let Some(y) = cur {
            if is_rep[y] {
                parent[c] = Some(class_of[y]);
                break;
            }
            cur = cover.parent(y);
        }
    }
    let out = ForestCover::new(parent)?;
    if !out.is_compatible(&h) {
        return Err(Error::InvalidCover(
            "quotient cover failed compatibility; input cover invalid".to_string(),
        ));
    }
    Ok(out)
}

/// One step of equality elimination: identify `v` with `u` (where
/// `(u, v)` is in `I`, `u` strictly below `v` in the forest order), drop `v`,
/// and repair the pebbling so the result is again a valid cover.
///
/// Elements above `v` keep their relabelled identity: the result universe is
/// the old one with `v` removed and higher indices shifted down by one. The
/// returned map sends old elements (except `v`) to new indices.
pub fn one_step_quotient(
    a: &RelStructure,
    cover: &PebbleForestCover,
    u: usize,
    v: usize,
) -> Result<(RelStructure, PebbleForestCover, Vec<usize>)> {
    if !a.signature().contains(EQ_SYMBOL) {
        return Err(Error::MissingSymbol(EQ_SYMBOL.to_string()));
    }
    if u == v {
        return Err(Error::InvalidParameter("one-step quotient needs distinct elements".to_string()));
    }
    let i_rel = a.relation(EQ_SYMBOL)?;
    if !i_rel.contains(&vec![u, v]) && !i_rel.contains(&vec![v, u]) {
        return Err(Error::InvalidParameter(format!("({u}, {v}) is not an I-pair")));
    }
    let (u, v) = if cover.cover.le(u, v) {
        (u, v)
    } else if cover.cover.le(v, u) {
        (v, u)
    } else {
        return Err(Error::InvalidCover(
            "I-linked elements are incomparable; cover does not validate".to_string(),
        ));
    };

    let n = a.size();
    // new pebbling on the old index space, then relabel
    let mut new_pebbles = cover.pebbles.clone();
    for w in 0..n {
        if w == v || !cover.cover.le(v, w) {
            continue; // "otherwise" clause: p'(w) = p(w)
        }
        if cover.pebbles[w] != cover.pebbles[u] && cover.pebbles[w] != cover.pebbles[v] {
            continue;
        }
        // w_min: the least w' with v < w' <= w carrying w's pebble (w itself qualifies)
        let w_min = {
            let mut best = w;
            let mut x = w;
            while x != v {
                if cover.pebbles[x] == cover.pebbles[w] {
                    best = x;
                }
                x = cover.cover.parent(x).expect("v is an ancestor of w");
            }
            best
        };
        if cover.pebbles[w] == cover.pebbles[v] && !sees(cover, u, w_min) {
            new_pebbles[w] = cover.pebbles[u];
        } else if cover.pebbles[w] == cover.pebbles[u] && sees(cover, v, w_min) {
            new_pebbles[w] = cover.pebbles[v];
        }
    }

    // relabelling: drop v, shift higher indices down
    let rename = |x: usize| if x > v { x - 1 } else { x };
    let mut old_to_new = vec![usize::MAX; n];
    for x in 0..n {
        if x != v {
            old_to_new[x] = rename(x);
        }
    }
    let subst = |x: usize| rename(if x == v { u } else { x });

    let mut a2 = RelStructure::discrete(a.signature().clone(), n - 1);
    for (name, tuples) in a.relations() {
        for t in tuples {
            a2.insert_tuple(name, t.iter().map(|&e| subst(e)).collect())?;
        }
    }
    let mut parent = vec![None; n - 1];
    let mut pebbles = vec![0usize; n - 1];
    for x in 0..n {
        if x == v {
            continue;
        }
        // the order is the restriction of the old one: v's children hang from
        // v's parent, which is on their root path anyway
        let mut p = cover.cover.parent(x);
        if p == Some(v) {
            p = cover.cover.parent(v);
        }
        parent[rename(x)] = p.map(rename);
        pebbles[rename(x)] = new_pebbles[x];
    }
    let out = PebbleForestCover::new(ForestCover::new(parent)?, pebbles, cover.k)?;
    Ok((a2, out, old_to_new))
}

/// Iterate one-step quotients until no non-diagonal `I`-pair remains, then
/// drop `I`. Returns the plain-signature structure with a cover valid at the
/// input's parameters. The result is isomorphic to the `I`-quotient of the
/// input.
pub fn eliminate_equalities(
    a: &RelStructure,
    cover: &PebbleForestCover,
) -> Result<(RelStructure, PebbleForestCover)> {
    let mut cur = a.clone();
    let mut cov = cover.clone();
    loop {
        // smallest non-diagonal pair, oriented down the forest order
        let pair = cur
            .relation(EQ_SYMBOL)?
            .iter()
            .filter(|t| t[0] != t[1])
            .map(|t| {
                if cov.cover.le(t[0], t[1]) {
                    (t[0], t[1])
                } else {
                    (t[1], t[0])
                }
            })
            .min();
        match pair {
            Some((u, v)) => {
                let (next, next_cov, _) = one_step_quotient(&cur, &cov, u, v)?;
                cur = next;
                cov = next_cov;
            }
            None => break,
        }
    }
    Ok((sigma_reduct(&cur)?, cov))
}
