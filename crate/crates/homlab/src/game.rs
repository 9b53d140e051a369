//! Bijective-game deciders for counting-logic equivalences: bounded
//! quantifier depth, bounded variable width, or both, plus extraction of a
//! distinguishing counting formula from a lost game.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::formula::{CountingFormula, F};
use crate::structure::RelStructure;

/// Decide counting-logic equivalence: `depth` bounds quantifier depth,
/// `width` bounds the number of variables. At least one bound is required
/// (with neither, equivalence collapses to isomorphism and the game never
/// terminates).
pub fn equiv_counting(
    a: &RelStructure,
    b: &RelStructure,
    depth: Option<usize>,
    width: Option<usize>,
) -> Result<bool> {
    if a.signature() != b.signature() {
        return Err(Error::SignatureMismatch(
            "equivalence deciders need a common signature".to_string(),
        ));
    }
    match (depth, width) {
        (Some(n), None) => Ok(GrowingGame::new(a, b).wins(&[], &[], n)),
        (Some(n), Some(k)) => {
            if k == 0 {
                return Err(Error::InvalidParameter("width must be >= 1".to_string()));
            }
            Ok(SlotGame::new(a, b, k).wins_bounded(n))
        }
        (None, Some(k)) => {
            if k == 0 {
                return Err(Error::InvalidParameter("width must be >= 1".to_string()));
            }
            Ok(SlotGame::new(a, b, k).wins_unbounded())
        }
        (None, None) => Err(Error::InvalidParameter(
            "equivalence needs a depth bound or a width bound".to_string(),
        )),
    }
}

/// Partial-isomorphism check on paired tuples, equality included.
fn atomic_equivalent(a: &RelStructure, b: &RelStructure, xs: &[usize], ys: &[usize]) -> bool {
    debug_assert_eq!(xs.len(), ys.len());
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if (xs[i] == xs[j]) != (ys[i] == ys[j]) {
                return false;
            }
        }
    }
    if xs.is_empty() {
        return true;
    }
    for (name, ta) in a.relations() {
        let arity = a.signature().arity(name).unwrap();
        let tb = b.relation(name).unwrap();
        let mut idx = vec![0usize; arity];
        loop {
            let in_a = ta.contains(&idx.iter().map(|&i| xs[i]).collect::<Vec<_>>());
            let in_b = tb.contains(&idx.iter().map(|&i| ys[i]).collect::<Vec<_>>());
            if in_a != in_b {
                return false;
            }
            let mut pos = arity;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < xs.len() {
                    break;
                }
                idx[pos] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    true
}

/// Bipartite perfect-matching test on an n x n boolean adjacency matrix,
/// by augmenting paths. Returns the matching (B-side partner per A-side
/// vertex) or None.
fn perfect_matching(adj: &[Vec<bool>]) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut match_a = vec![usize::MAX; n];
    let mut match_b = vec![usize::MAX; n];
    fn augment(
        a: usize,
        adj: &[Vec<bool>],
        match_a: &mut [usize],
        match_b: &mut [usize],
        seen: &mut [bool],
    ) -> bool {
        for b in 0..adj.len() {
            if adj[a][b] && !seen[b] {
                seen[b] = true;
                if match_b[b] == usize::MAX
                    || augment(match_b[b], adj, match_a, match_b, seen)
                {
                    match_a[a] = b;
                    match_b[b] = a;
                    return true;
                }
            }
        }
        false
    }
    for a in 0..n {
        let mut seen = vec![false; n];
        if !augment(a, adj, &mut match_a, &mut match_b, &mut seen) {
            return None;
        }
    }
    Some(match_a)
}

/// A Hall violator: a set S of A-side vertices with |N(S)| < |S|, extracted
/// from a maximum matching that is not perfect.
fn hall_violator(adj: &[Vec<bool>]) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = adj.len();
    let mut match_a = vec![usize::MAX; n];
    let mut match_b = vec![usize::MAX; n];
    fn augment(
        a: usize,
        adj: &[Vec<bool>],
        match_a: &mut [usize],
        match_b: &mut [usize],
        seen: &mut [bool],
    ) -> bool {
        for b in 0..adj.len() {
            if adj[a][b] && !seen[b] {
                seen[b] = true;
                if match_b[b] == usize::MAX
                    || augment(match_b[b], adj, match_a, match_b, seen)
                {
                    match_a[a] = b;
                    match_b[b] = a;
                    return true;
                }
            }
        }
        false
    }
    let mut unmatched = None;
    for a in 0..n {
        let mut seen = vec![false; n];
        if !augment(a, adj, &mut match_a, &mut match_b, &mut seen) {
            unmatched = Some(a);
            // keep augmenting the rest to reach a maximum matching
        }
    }
    let start = unmatched?;
    // alternating reachability from the unmatched vertex
    let mut in_s = vec![false; n];
    let mut in_t = vec![false; n]; // B side
    in_s[start] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for a in 0..n {
            if !in_s[a] {
                continue;
            }
            for b in 0..n {
                if adj[a][b] && !in_t[b] {
                    in_t[b] = true;
                    changed = true;
                    if match_b[b] != usize::MAX && !in_s[match_b[b]] {
                        in_s[match_b[b]] = true;
                    }
                }
            }
        }
    }
    let s: Vec<usize> = (0..n).filter(|&a| in_s[a]).collect();
    let t: Vec<usize> = (0..n).filter(|&b| in_t[b]).collect();
    debug_assert!(t.len() < s.len());
    Some((s, t))
}

/// The depth-bounded game without a width bound: positions are growing
/// sequences.
struct GrowingGame<'a> {
    a: &'a RelStructure,
    b: &'a RelStructure,
    memo: HashMap<(Vec<usize>, Vec<usize>, usize), bool>,
}

impl<'a> GrowingGame<'a> {
    fn new(a: &'a RelStructure, b: &'a RelStructure) -> Self {
        GrowingGame { a, b, memo: HashMap::new() }
    }

    fn wins(&mut self, xs: &[usize], ys: &[usize], rounds: usize) -> bool {
        if !atomic_equivalent(self.a, self.b, xs, ys) {
            return false;
        }
        if rounds == 0 {
            return true;
        }
        if self.a.size() != self.b.size() {
            return false;
        }
        let key = (xs.to_vec(), ys.to_vec(), rounds);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let n = self.a.size();
        // Duplicator needs a bijection f with every extension winning:
        // a perfect matching in the "child position wins" graph
        let win = if n == 0 {
            true
        } else {
            let mut adj = vec![vec![false; n]; n];
            for x in 0..n {
                for y in 0..n {
                    let mut nxs = xs.to_vec();
                    nxs.push(x);
                    let mut nys = ys.to_vec();
                    nys.push(y);
                    adj[x][y] = self.wins(&nxs, &nys, rounds - 1);
                }
            }
            perfect_matching(&adj).is_some()
        };
        self.memo.insert(key, win);
        win
    }
}

/// The width-k game: positions are k slots, Spoiler chooses which slot to
/// refill each round.
struct SlotGame<'a> {
    a: &'a RelStructure,
    b: &'a RelStructure,
    k: usize,
}

/// A slot position: per slot, an optional pair of elements.
type SlotPos = Vec<Option<(usize, usize)>>;

impl<'a> SlotGame<'a> {
    fn new(a: &'a RelStructure, b: &'a RelStructure, k: usize) -> Self {
        SlotGame { a, b, k }
    }

    fn filled(pos: &SlotPos) -> (Vec<usize>, Vec<usize>) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for p in pos.iter().flatten() {
            xs.push(p.0);
            ys.push(p.1);
        }
        (xs, ys)
    }

    fn wins_bounded(&self, n: usize) -> bool {
        let mut memo: HashMap<(SlotPos, usize), bool> = HashMap::new();
        let empty: SlotPos = vec![None; self.k];
        self.wins_bounded_rec(&empty, n, &mut memo)
    }

    fn wins_bounded_rec(
        &self,
        pos: &SlotPos,
        rounds: usize,
        memo: &mut HashMap<(SlotPos, usize), bool>,
    ) -> bool {
        let (xs, ys) = Self::filled(pos);
        if !atomic_equivalent(self.a, self.b, &xs, &ys) {
            return false;
        }
        if rounds == 0 {
            return true;
        }
        if self.a.size() != self.b.size() {
            return false;
        }
        if let Some(&v) = memo.get(&(pos.clone(), rounds)) {
            return v;
        }
        let n = self.a.size();
        let win = if n == 0 {
            true
        } else {
            // Spoiler picks the slot; Duplicator answers with a bijection
            (0..self.k).all(|slot| {
                let mut adj = vec![vec![false; n]; n];
                for x in 0..n {
                    for y in 0..n {
                        let mut next = pos.clone();
                        next[slot] = Some((x, y));
                        adj[x][y] = self.wins_bounded_rec(&next, rounds - 1, memo);
                    }
                }
                perfect_matching(&adj).is_some()
            })
        };
        memo.insert((pos.clone(), rounds), win);
        win
    }

    /// Greatest fixpoint: start from atomic equivalence and repeatedly remove
    /// positions from which Duplicator cannot answer some slot choice.
    fn wins_unbounded(&self) -> bool {
        let na = self.a.size();
        let nb = self.b.size();
        if na != nb {
            return false;
        }
        if na == 0 {
            return true;
        }
        // encode positions in base (na*nb + 1) per slot
        let base = na * nb + 1;
        let total = base.pow(self.k as u32);
        let decode = |mut code: usize| -> SlotPos {
            let mut pos = vec![None; self.k];
            for slot in 0..self.k {
                let d = code % base;
                code /= base;
                if d > 0 {
                    pos[slot] = Some(((d - 1) / nb, (d - 1) % nb));
                }
            }
            pos
        };
        let encode_step = |code: usize, slot: usize, x: usize, y: usize| -> usize {
            // replace the digit at `slot`
            let weight = base.pow(slot as u32);
            let digit = (code / weight) % base;
            code - digit * weight + (x * nb + y + 1) * weight
        };
        let mut alive = vec![false; total];
        for code in 0..total {
            let pos = decode(code);
            let (xs, ys) = Self::filled(&pos);
            alive[code] = atomic_equivalent(self.a, self.b, &xs, &ys);
        }
        loop {
            let mut changed = false;
            for code in 0..total {
                if !alive[code] {
                    continue;
                }
                let ok = (0..self.k).all(|slot| {
                    let mut adj = vec![vec![false; na]; na];
                    for x in 0..na {
                        for y in 0..nb {
                            adj[x][y] = alive[encode_step(code, slot, x, y)];
                        }
                    }
                    perfect_matching(&adj).is_some()
                });
                if !ok {
                    alive[code] = false;
                    changed = true;
                }
            }
            if !alive[0] {
                return false; // the empty position died
            }
            if !changed {
                return alive[0];
            }
        }
    }
}

/// Extract a counting sentence of quantifier depth <= n (and width <= k, when
/// given) that holds in `a` but not in `b`. `None` when the structures are
/// equivalent at those bounds.
pub fn distinguishing_formula(
    a: &RelStructure,
    b: &RelStructure,
    n: usize,
    width: Option<usize>,
) -> Result<Option<F>> {
    if equiv_counting(a, b, Some(n), width)? {
        return Ok(None);
    }
    let phi = match width {
        None => {
            let mut game = GrowingGame::new(a, b);
            extract_growing(&mut game, &[], &[], n)
        }
        Some(k) => {
            let game = SlotGame::new(a, b, k);
            let mut memo = HashMap::new();
            let empty: SlotPos = vec![None; k];
            extract_slots(&game, &empty, n, &mut memo)
        }
    };
    Ok(Some(phi))
}

fn var_name(i: usize) -> String {
    format!("x{i}")
}

/// Distinguishing formula for an atomically inequivalent pair of tuples, over
/// variables named by `var_of` per position.
fn atomic_separator(
    a: &RelStructure,
    b: &RelStructure,
    xs: &[usize],
    ys: &[usize],
    var_of: &dyn Fn(usize) -> String,
) -> F {
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let eq = Arc::new(CountingFormula::Equal(var_of(i), var_of(j)));
            if xs[i] == xs[j] && ys[i] != ys[j] {
                return eq;
            }
            if xs[i] != xs[j] && ys[i] == ys[j] {
                return Arc::new(CountingFormula::Not(eq));
            }
        }
    }
    for (name, ta) in a.relations() {
        let arity = a.signature().arity(name).unwrap();
        let tb = b.relation(name).unwrap();
        if xs.is_empty() {
            continue;
        }
        let mut idx = vec![0usize; arity];
        loop {
            let in_a = ta.contains(&idx.iter().map(|&i| xs[i]).collect::<Vec<_>>());
            let in_b = tb.contains(&idx.iter().map(|&i| ys[i]).collect::<Vec<_>>());
            if in_a != in_b {
                let atom = Arc::new(CountingFormula::Atom(
                    name.to_string(),
                    idx.iter().map(|&i| var_of(i)).collect(),
                ));
                return if in_a { atom } else { Arc::new(CountingFormula::Not(atom)) };
            }
            let mut pos = arity;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < xs.len() {
                    break;
                }
                idx[pos] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    unreachable!("tuples were atomically inequivalent")
}

/// Formula asserting the size of the universe differs: holds in `a`, not `b`.
fn size_separator(a: &RelStructure, b: &RelStructure, var: String) -> F {
    let self_eq = Arc::new(CountingFormula::Equal(var.clone(), var.clone()));
    if a.size() > b.size() {
        Arc::new(CountingFormula::AtLeast(a.size() as u64, var, self_eq))
    } else {
        Arc::new(CountingFormula::Not(Arc::new(CountingFormula::AtLeast(
            b.size() as u64,
            var,
            self_eq,
        ))))
    }
}

/// Hella-style extraction for the growing game: at a lost position, some Hall
/// violator S yields a counting quantifier separating the structures.
fn extract_growing(game: &mut GrowingGame, xs: &[usize], ys: &[usize], rounds: usize) -> F {
    debug_assert!(!game.wins(xs, ys, rounds));
    let var_of = |i: usize| var_name(i);
    if !atomic_equivalent(game.a, game.b, xs, ys) {
        return atomic_separator(game.a, game.b, xs, ys, &var_of);
    }
    debug_assert!(rounds > 0);
    if game.a.size() != game.b.size() {
        return size_separator(game.a, game.b, var_name(xs.len()));
    }
    let n = game.a.size();
    let mut adj = vec![vec![false; n]; n];
    for x in 0..n {
        for y in 0..n {
            let mut nxs = xs.to_vec();
            nxs.push(x);
            let mut nys = ys.to_vec();
            nys.push(y);
            adj[x][y] = game.wins(&nxs, &nys, rounds - 1);
        }
    }
    let (s, t) = hall_violator(&adj).expect("position is lost, so no perfect matching");
    let fresh = var_name(xs.len());
    let mut disjuncts: Vec<F> = Vec::new();
    for &x in &s {
        let mut conj: Vec<F> = Vec::new();
        for y in 0..n {
            if t.contains(&y) {
                continue;
            }
            let mut nxs = xs.to_vec();
            nxs.push(x);
            let mut nys = ys.to_vec();
            nys.push(y);
            conj.push(extract_growing(game, &nxs, &nys, rounds - 1));
        }
        disjuncts.push(Arc::new(CountingFormula::And(conj)));
    }
    Arc::new(CountingFormula::AtLeast(
        s.len() as u64,
        fresh,
        Arc::new(CountingFormula::Or(disjuncts)),
    ))
}

/// Extraction for the width-bounded game; variables are reused per slot.
fn extract_slots(
    game: &SlotGame,
    pos: &SlotPos,
    rounds: usize,
    memo: &mut HashMap<(SlotPos, usize), bool>,
) -> F {
    let (xs, ys) = SlotGame::filled(pos);
    // variable of the i-th filled entry = its slot name
    let slots_filled: Vec<usize> =
        pos.iter().enumerate().filter(|(_, p)| p.is_some()).map(|(s, _)| s).collect();
    let var_of = |i: usize| var_name(slots_filled[i]);
    if !atomic_equivalent(game.a, game.b, &xs, &ys) {
        return atomic_separator(game.a, game.b, &xs, &ys, &var_of);
    }
    debug_assert!(rounds > 0);
    if game.a.size() != game.b.size() {
        return size_separator(game.a, game.b, var_name(0));
    }
    let n = game.a.size();
    // find a slot Spoiler can win with
    for slot in 0..game.k {
        let mut adj = vec![vec![false; n]; n];
        for x in 0..n {
            for y in 0..n {
                let mut next = pos.clone();
                next[slot] = Some((x, y));
                adj[x][y] = game.wins_bounded_rec(&next, rounds - 1, memo);
            }
        }
        if let Some((s, t)) = hall_violator(&adj) {
            let fresh = var_name(slot);
            let mut disjuncts: Vec<F> = Vec::new();
            for &x in &s {
                let mut conj: Vec<F> = Vec::new();
                for y in 0..n {
                    if t.contains(&y) {
                        continue;
                    }
                    let mut next = pos.clone();
                    next[slot] = Some((x, y));
                    conj.push(extract_slots(game, &next, rounds - 1, memo));
                }
                disjuncts.push(Arc::new(CountingFormula::And(conj)));
            }
            return Arc::new(CountingFormula::AtLeast(
                s.len() as u64,
                fresh,
                Arc::new(CountingFormula::Or(disjuncts)),
            ));
        }
    }
    unreachable!("position is lost, so some slot has no perfect matching")
}
