//! Game comonads built explicitly as finite structures: play carriers,
//! counits, coextension, the comonad and coalgebra laws, and the
//! translations between coalgebras and combinatorial covers.

use std::collections::HashMap;

use crate::cover::{validate_pebble_cover, ForestCover, PebbleForestCover};
use crate::error::{Error, Result};
use crate::structure::{PointedStructure, RelStructure};

/// Default bound on carrier size before materialisation is refused.
pub const DEFAULT_CARRIER_BOUND: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComonadKind {
    /// Plays of length at most `n`.
    Ef { n: usize },
    /// Pebbled plays: moves from `{1..k} x A`, length at most `n`.
    Pebble { k: usize, n: usize },
    /// Paths of length at most `k` from the distinguished point.
    Modal { k: usize },
}

impl ComonadKind {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ComonadKind::Ef { n } => n >= 1,
            ComonadKind::Pebble { k, n } => k >= 1 && n >= 1,
            ComonadKind::Modal { k } => k >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("comonad parameters must be >= 1".to_string()))
        }
    }
}

/// The object a comonad is applied to: a plain structure, or a pointed one
/// for the modal comonad.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Base {
    Plain(RelStructure),
    Pointed(PointedStructure),
}

impl Base {
    pub fn structure(&self) -> &RelStructure {
        match self {
            Base::Plain(s) => s,
            Base::Pointed(p) => &p.structure,
        }
    }

    pub fn point(&self) -> Option<usize> {
        match self {
            Base::Plain(_) => None,
            Base::Pointed(p) => Some(p.point),
        }
    }

    pub fn size(&self) -> usize {
        self.structure().size()
    }
}

/// One element of a comonad carrier, decoded.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Play {
    /// Non-empty element sequence.
    Ef(Vec<usize>),
    /// Non-empty sequence of (pebble, element) moves.
    Pebble(Vec<(usize, usize)>),
    /// (binary-symbol index, element) steps from the point; empty = trivial path.
    Modal(Vec<(usize, usize)>),
}

impl Play {
    pub fn len(&self) -> usize {
        match self {
            Play::Ef(s) => s.len(),
            Play::Pebble(s) => s.len(),
            Play::Modal(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn prefix(&self, len: usize) -> Play {
        match self {
            Play::Ef(s) => Play::Ef(s[..len].to_vec()),
            Play::Pebble(s) => Play::Pebble(s[..len].to_vec()),
            Play::Modal(s) => Play::Modal(s[..len].to_vec()),
        }
    }

    /// Last element of the play; the point for trivial modal paths.
    fn last_element(&self, point: Option<usize>) -> usize {
        match self {
            Play::Ef(s) => *s.last().expect("EF plays are non-empty"),
            Play::Pebble(s) => s.last().expect("pebble plays are non-empty").1,
            Play::Modal(s) => s.last().map_or_else(|| point.expect("modal base is pointed"), |m| m.1),
        }
    }
}

/// The structure `C(A)` for one of the game comonads, with its decoding data.
#[derive(Debug, Clone)]
pub struct ComonadStructure {
    pub kind: ComonadKind,
    pub base: Base,
    pub carrier: RelStructure,
    pub plays: Vec<Play>,
    /// counit: each play to its last base element
    pub counit: Vec<usize>,
    /// index of the trivial play (modal carriers only)
    pub point: Option<usize>,
    index: HashMap<Play, usize>,
}

impl ComonadStructure {
    pub fn play_index(&self, play: &Play) -> Option<usize> {
        self.index.get(play).copied()
    }

    /// The carrier as a pointed structure (modal kinds only).
    pub fn pointed_carrier(&self) -> Result<PointedStructure> {
        match self.point {
            Some(p) => PointedStructure::new(self.carrier.clone(), p),
            None => Err(Error::InvalidParameter("carrier is not pointed".to_string())),
        }
    }
}

/// Predicted carrier size: sum over play lengths.
pub fn carrier_size(kind: &ComonadKind, base: &Base) -> u64 {
    let s = base.size() as u64;
    match *kind {
        ComonadKind::Ef { n } => (1..=n as u32).map(|i| s.saturating_pow(i)).fold(0u64, u64::saturating_add),
        ComonadKind::Pebble { k, n } => {
            let m = s.saturating_mul(k as u64);
            (1..=n as u32).map(|i| m.saturating_pow(i)).fold(0u64, u64::saturating_add)
        }
        ComonadKind::Modal { k } => {
            // count paths by breadth-first expansion
            let st = base.structure();
            let point = base.point().unwrap_or(0);
            let succ: Vec<Vec<usize>> = (0..st.size())
                .map(|x| {
                    let mut out = Vec::new();
                    for (name, tuples) in st.relations() {
                        if st.signature().arity(name) == Some(2) {
                            for t in tuples {
                                if t[0] == x {
                                    out.push(t[1]);
                                }
                            }
                        }
                    }
                    out
                })
                .collect();
            let mut frontier: Vec<usize> = vec![point];
            let mut total: u64 = 1;
            for _ in 0..k {
                let mut next = Vec::new();
                for &x in &frontier {
                    next.extend(succ[x].iter().copied());
                }
                total = total.saturating_add(next.len() as u64);
                if total > DEFAULT_CARRIER_BOUND.saturating_mul(4) {
                    return total;
                }
                frontier = next;
            }
            total
        }
    }
}

/// Build the comonad structure on `base`, refusing carriers above `bound`.
pub fn build_comonad(kind: &ComonadKind, base: &Base, bound: u64) -> Result<ComonadStructure> {
    kind.validate()?;
    if matches!(kind, ComonadKind::Modal { .. }) {
        match base {
            Base::Pointed(_) => {}
            Base::Plain(_) => {
                return Err(Error::InvalidParameter(
                    "the modal comonad needs a pointed structure".to_string(),
                ))
            }
        }
    }
    let predicted = carrier_size(kind, base);
    if predicted > bound {
        return Err(Error::CapExceeded {
            what: "comonad carrier".to_string(),
            size: predicted as usize,
            cap: bound as usize,
        });
    }
    let st = base.structure();
    let plays = generate_plays(kind, base);
    let index: HashMap<Play, usize> = plays.iter().cloned().zip(0..).collect();
    let counit: Vec<usize> = plays.iter().map(|p| p.last_element(base.point())).collect();

    let mut carrier = RelStructure::discrete(st.signature().clone(), plays.len());
    match kind {
        ComonadKind::Ef { .. } | ComonadKind::Pebble { .. } => {
            for (name, tuples) in st.relations() {
                let arity = st.signature().arity(name).unwrap();
                // comparable tuples are exactly the prefix-tuples of their longest member
                for s in plays.iter() {
                    let len = s.len();
                    let mut lens = vec![1usize; arity];
                    loop {
                        if lens.iter().any(|&l| l == len) {
                            let images: Vec<usize> =
                                lens.iter().map(|&l| counit[index[&s.prefix(l)]]).collect();
                            if tuples.contains(&images) && pebble_clause_ok(s, &lens) {
                                let tuple: Vec<usize> =
                                    lens.iter().map(|&l| index[&s.prefix(l)]).collect();
                                carrier.insert_tuple(name, tuple)?;
                            }
                        }
                        // odometer over 1..=len per slot
                        let mut pos = arity;
                        loop {
                            if pos == 0 {
                                break;
                            }
                            pos -= 1;
                            lens[pos] += 1;
                            if lens[pos] <= len {
                                break;
                            }
                            lens[pos] = 1;
                        }
                        if lens.iter().all(|&l| l == 1) {
                            break;
                        }
                    }
                }
            }
        }
        ComonadKind::Modal { .. } => {
            let binaries: Vec<&str> = st
                .signature()
                .symbols()
                .iter()
                .filter(|s| s.arity == 2)
                .map(|s| s.name.as_str())
                .collect();
            for (name, tuples) in st.relations() {
                match st.signature().arity(name).unwrap() {
                    1 => {
                        for i in 0..plays.len() {
                            if tuples.contains(&vec![counit[i]]) {
                                carrier.insert_tuple(name, vec![i])?;
                            }
                        }
                    }
                    2 => {
                        let sym_idx =
                            binaries.iter().position(|&b| b == name).expect("binary symbol");
                        for (i, play) in plays.iter().enumerate() {
                            if let Play::Modal(steps) = play {
                                if let Some(&(sym, _)) = steps.last() {
                                    if sym == sym_idx {
                                        let parent = play.prefix(steps.len() - 1);
                                        carrier.insert_tuple(name, vec![index[&parent], i])?;
                                    }
                                }
                            }
                        }
                    }
                    _ => unreachable!("pointed structures have arities <= 2"),
                }
            }
        }
    }
    let point = match kind {
        ComonadKind::Modal { .. } => Some(index[&Play::Modal(vec![])]),
        _ => None,
    };
    Ok(ComonadStructure { kind: *kind, base: base.clone(), carrier, plays, counit, point, index })
}

/// Pebble-suffix clause: whenever one prefix sits inside a longer one, the
/// pebble of its last move must not recur in the strict suffix.
fn pebble_clause_ok(s: &Play, lens: &[usize]) -> bool {
    let moves = match s {
        Play::Pebble(m) => m,
        _ => return true,
    };
    for &li in lens {
        for &lj in lens {
            if li < lj {
                let pebble = moves[li - 1].0;
                if moves[li..lj].iter().any(|m| m.0 == pebble) {
                    return false;
                }
            }
        }
    }
    true
}

fn generate_plays(kind: &ComonadKind, base: &Base) -> Vec<Play> {
    let size = base.size();
    match *kind {
        ComonadKind::Ef { n } => {
            let mut plays: Vec<Play> = Vec::new();
            let mut level: Vec<Vec<usize>> = vec![vec![]];
            for _ in 0..n {
                let mut next = Vec::new();
                for seq in &level {
                    for x in 0..size {
                        let mut s = seq.clone();
                        s.push(x);
                        next.push(s);
                    }
                }
                for s in &next {
                    plays.push(Play::Ef(s.clone()));
                }
                level = next;
            }
            plays
        }
        ComonadKind::Pebble { k, n } => {
            let mut plays: Vec<Play> = Vec::new();
            let mut level: Vec<Vec<(usize, usize)>> = vec![vec![]];
            for _ in 0..n {
                let mut next = Vec::new();
                for seq in &level {
                    for p in 1..=k {
                        for x in 0..size {
                            let mut s = seq.clone();
                            s.push((p, x));
                            next.push(s);
                        }
                    }
                }
                for s in &next {
                    plays.push(Play::Pebble(s.clone()));
                }
                level = next;
            }
            plays
        }
        ComonadKind::Modal { k } => {
            let st = base.structure();
            let point = base.point().expect("modal base is pointed");
            let binaries: Vec<&str> = st
                .signature()
                .symbols()
                .iter()
                .filter(|s| s.arity == 2)
                .map(|s| s.name.as_str())
                .collect();
            let mut plays: Vec<Play> = vec![Play::Modal(vec![])];
            let mut level: Vec<(Vec<(usize, usize)>, usize)> = vec![(vec![], point)];
            for _ in 0..k {
                let mut next = Vec::new();
                for (steps, end) in &level {
                    for (sym_idx, name) in binaries.iter().enumerate() {
                        let tuples = st.relation(name).unwrap();
                        for t in tuples {
                            if t[0] == *end {
                                let mut s = steps.clone();
                                s.push((sym_idx, t[1]));
                                next.push((s, t[1]));
                            }
                        }
                    }
                }
                next.sort();
                next.dedup();
                for (s, _) in &next {
                    plays.push(Play::Modal(s.clone()));
                }
                level = next;
            }
            plays
        }
    }
}

/// Coextend a homomorphism `f: C(A) -> B` to `f*: C(A) -> C(B)` by applying
/// `f` prefix-wise; pebble indices and step labels are carried over.
///
/// Returns the comonad structure on the target together with the play map.
pub fn coextension(
    cs: &ComonadStructure,
    target: &Base,
    f: &[usize],
    bound: u64,
) -> Result<(ComonadStructure, Vec<usize>)> {
    validate_carrier_map(cs, target, f)?;
    let target_cs = build_comonad(&cs.kind, target, bound)?;
    let map = coextension_into(cs, &target_cs, f)?;
    Ok((target_cs, map))
}

/// As [`coextension`] but into an already-built target comonad structure.
pub fn coextension_into(
    cs: &ComonadStructure,
    target_cs: &ComonadStructure,
    f: &[usize],
) -> Result<Vec<usize>> {
    if target_cs.kind != cs.kind {
        return Err(Error::InvalidParameter("coextension must stay within one comonad".to_string()));
    }
    let mut out = Vec::with_capacity(cs.plays.len());
    for play in &cs.plays {
        let image = match play {
            Play::Ef(s) => {
                let mut b = Vec::with_capacity(s.len());
                for l in 1..=s.len() {
                    b.push(f[cs.index[&play.prefix(l)]]);
                }
                Play::Ef(b)
            }
            Play::Pebble(s) => {
                let mut b = Vec::with_capacity(s.len());
                for l in 1..=s.len() {
                    b.push((s[l - 1].0, f[cs.index[&play.prefix(l)]]));
                }
                Play::Pebble(b)
            }
            Play::Modal(s) => {
                let mut b = Vec::with_capacity(s.len());
                for l in 1..=s.len() {
                    b.push((s[l - 1].0, f[cs.index[&play.prefix(l)]]));
                }
                Play::Modal(b)
            }
        };
        let idx = target_cs.play_index(&image).ok_or_else(|| {
            Error::InvalidHomomorphism(
                "coextension image is not a play of the target carrier".to_string(),
            )
        })?;
        out.push(idx);
    }
    Ok(out)
}

/// Check that `f` is a homomorphism from the carrier of `cs` to `target`
/// (point-preserving in the modal case).
pub fn validate_carrier_map(cs: &ComonadStructure, target: &Base, f: &[usize]) -> Result<()> {
    let hom = crate::structure::Homomorphism::new(
        cs.carrier.clone(),
        target.structure().clone(),
        f.to_vec(),
    );
    if !crate::structure::validate_hom(&hom)? {
        return Err(Error::InvalidHomomorphism("map does not preserve relations".to_string()));
    }
    if let (Some(carrier_pt), Some(target_pt)) = (cs.point, target.point()) {
        if f[carrier_pt] != target_pt {
            return Err(Error::InvalidHomomorphism("map does not preserve the point".to_string()));
        }
    }
    Ok(())
}

/// The functor action `C(h) = (h . counit)*` for a base-level homomorphism
/// `h: A -> B`.
pub fn comonad_map(
    cs: &ComonadStructure,
    target: &Base,
    h: &[usize],
    bound: u64,
) -> Result<(ComonadStructure, Vec<usize>)> {
    let f: Vec<usize> = cs.counit.iter().map(|&e| h[e]).collect();
    coextension(cs, target, &f, bound)
}

/// All three comonad equations, checked pointwise:
/// counit coextends to the identity, the counit retracts every coextension,
/// and coextension distributes over Kleisli composition.
pub fn check_comonad_laws(
    kind: &ComonadKind,
    a: &Base,
    b: &Base,
    c: &Base,
    f: &[usize],
    g: &[usize],
    bound: u64,
) -> Result<bool> {
    let ca = build_comonad(kind, a, bound)?;
    let cb = build_comonad(kind, b, bound)?;
    validate_carrier_map(&ca, b, f)?;
    validate_carrier_map(&cb, c, g)?;

    // counit* = id
    let (_, eps_star) = coextension(&ca, a, &ca.counit, bound)?;
    if eps_star != (0..ca.plays.len()).collect::<Vec<_>>() {
        return Ok(false);
    }
    // counit . f* = f
    let f_star = coextension_into(&ca, &cb, f)?;
    let retracted: Vec<usize> = f_star.iter().map(|&s| cb.counit[s]).collect();
    if retracted != f {
        return Ok(false);
    }
    // (g . f*)* = g* . f*
    let cc = build_comonad(kind, c, bound)?;
    let g_star = coextension_into(&cb, &cc, g)?;
    let gf: Vec<usize> = f_star.iter().map(|&s| g[s]).collect();
    let gf_star = coextension_into(&ca, &cc, &gf)?;
    let composed: Vec<usize> = f_star.iter().map(|&s| g_star[s]).collect();
    Ok(gf_star == composed)
}

/// A coalgebra `alpha: A -> C(A)`, carried together with the comonad
/// structure it lands in.
#[derive(Debug, Clone)]
pub struct Coalgebra {
    pub cs: ComonadStructure,
    pub alpha: Vec<usize>,
}

/// Both coalgebra laws, pointwise: the counit retracts `alpha`, and
/// coextending the identity agrees with the functor action of `alpha`.
///
/// The comultiplication side is compared play by play (a prefix of an
/// alpha-image must be the alpha-image of its own last element), which avoids
/// materialising the doubly-iterated carrier.
pub fn check_coalgebra(c: &Coalgebra) -> Result<bool> {
    let base = &c.cs.base;
    if c.alpha.len() != base.size() {
        return Err(Error::InvalidCoalgebra("alpha has the wrong length".to_string()));
    }
    // alpha must be a homomorphism A -> C(A) (point-preserving when pointed)
    let hom = crate::structure::Homomorphism::new(
        base.structure().clone(),
        c.cs.carrier.clone(),
        c.alpha.clone(),
    );
    if !crate::structure::validate_hom(&hom)? {
        return Ok(false);
    }
    if let (Some(base_pt), Some(carrier_pt)) = (base.point(), c.cs.point) {
        if c.alpha[base_pt] != carrier_pt {
            return Ok(false);
        }
    }
    // counit . alpha = id
    for x in 0..base.size() {
        if c.cs.counit[c.alpha[x]] != x {
            return Ok(false);
        }
    }
    // id* . alpha = C(alpha) . alpha: the i-th entry of the left side is the
    // i-th prefix of alpha(x), of the right side alpha of that prefix's last
    // element; decorations agree on both sides by construction
    for x in 0..base.size() {
        let play = &c.cs.plays[c.alpha[x]];
        for i in 1..=play.len() {
            let prefix = play.prefix(i);
            let prefix_idx = c
                .cs
                .play_index(&prefix)
                .expect("prefixes of carrier plays are carrier plays");
            if c.alpha[c.cs.counit[prefix_idx]] != prefix_idx {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A synchronization-tree certificate: every element is reached by a unique
/// labelled path from the point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncTreeCertificate {
    /// height in edges
    pub height: usize,
    /// the unique path to each element, as (binary symbol index, element) steps
    pub paths: Vec<Vec<(usize, usize)>>,
}

/// Verify that a pointed structure is a synchronization tree and return the
/// unique point-paths. Requires the point to reach everything, no edge into
/// the point, and exactly one incoming edge elsewhere (counted across all
/// binary symbols).
pub fn sync_tree_certificate(p: &PointedStructure) -> Option<SyncTreeCertificate> {
    let st = &p.structure;
    let n = st.size();
    let binaries: Vec<&str> = st
        .signature()
        .symbols()
        .iter()
        .filter(|s| s.arity == 2)
        .map(|s| s.name.as_str())
        .collect();
    let mut in_edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n]; // (symbol, source)
    for (sym_idx, name) in binaries.iter().enumerate() {
        for t in st.relation(name).unwrap() {
            in_edges[t[1]].push((sym_idx, t[0]));
        }
    }
    if !in_edges[p.point].is_empty() {
        return None;
    }
    for (x, ins) in in_edges.iter().enumerate() {
        if x != p.point && ins.len() != 1 {
            return None;
        }
    }
    // unique in-edges: follow them back to the point
    let mut paths: Vec<Option<Vec<(usize, usize)>>> = vec![None; n];
    paths[p.point] = Some(vec![]);
    for x in 0..n {
        if paths[x].is_some() {
            continue;
        }
        // walk towards the point, guarding against cycles
        let mut chain = vec![x];
        let mut cur = x;
        loop {
            let (_, src) = in_edges[cur][0];
            if chain.contains(&src) {
                return None; // cycle never reaches the point
            }
            if paths[src].is_some() {
                break;
            }
            chain.push(src);
            cur = src;
        }
        for &y in chain.iter().rev() {
            let (sym, src) = in_edges[y][0];
            let mut path = paths[src].clone().unwrap();
            path.push((sym, y));
            paths[y] = Some(path);
        }
    }
    let paths: Vec<Vec<(usize, usize)>> = paths.into_iter().map(|p| p.unwrap()).collect();
    let height = paths.iter().map(|p| p.len()).max().unwrap_or(0);
    Some(SyncTreeCertificate { height, paths })
}

/// Build the coalgebra induced by a forest cover of height <= n: each element
/// is sent to its root path.
pub fn ef_cover_to_coalgebra(
    a: &RelStructure,
    cover: &ForestCover,
    n: usize,
    bound: u64,
) -> Result<Coalgebra> {
    if cover.size() != a.size() || !cover.is_compatible(a) || cover.height() > n {
        return Err(Error::InvalidCover(
            "not a compatible forest cover of the required height".to_string(),
        ));
    }
    let cs = build_comonad(&ComonadKind::Ef { n }, &Base::Plain(a.clone()), bound)?;
    let alpha: Vec<usize> = (0..a.size())
        .map(|x| cs.play_index(&Play::Ef(cover.root_path(x))).expect("root path within bound"))
        .collect();
    let c = Coalgebra { cs, alpha };
    if !check_coalgebra(&c)? {
        return Err(Error::InvalidCoalgebra("cover-induced map failed the coalgebra laws".to_string()));
    }
    Ok(c)
}

/// Build the coalgebra induced by a k-pebble forest cover of height <= n.
pub fn pebble_cover_to_coalgebra(
    a: &RelStructure,
    cover: &PebbleForestCover,
    k: usize,
    n: usize,
    bound: u64,
) -> Result<Coalgebra> {
    if !validate_pebble_cover(a, cover, k, n) {
        return Err(Error::InvalidCover("not a valid k-pebble forest cover".to_string()));
    }
    let cs = build_comonad(&ComonadKind::Pebble { k, n }, &Base::Plain(a.clone()), bound)?;
    let alpha: Vec<usize> = (0..a.size())
        .map(|x| {
            let moves: Vec<(usize, usize)> =
                cover.cover.root_path(x).into_iter().map(|y| (cover.pebbles[y], y)).collect();
            cs.play_index(&Play::Pebble(moves)).expect("root path within bound")
        })
        .collect();
    let c = Coalgebra { cs, alpha };
    if !check_coalgebra(&c)? {
        return Err(Error::InvalidCoalgebra("cover-induced map failed the coalgebra laws".to_string()));
    }
    Ok(c)
}

/// Build the coalgebra of a synchronization tree of height <= k: each element
/// goes to its unique point-path.
pub fn modal_cover_to_coalgebra(p: &PointedStructure, k: usize, bound: u64) -> Result<Coalgebra> {
    let cert = sync_tree_certificate(p).ok_or_else(|| {
        Error::InvalidCover("the pointed structure is not a synchronization tree".to_string())
    })?;
    if cert.height > k {
        return Err(Error::InvalidCover(format!(
            "synchronization tree has height {}, needed <= {k}",
            cert.height
        )));
    }
    let cs = build_comonad(&ComonadKind::Modal { k }, &Base::Pointed(p.clone()), bound)?;
    let alpha: Vec<usize> = cert
        .paths
        .iter()
        .map(|path| cs.play_index(&Play::Modal(path.clone())).expect("path within bound"))
        .collect();
    let c = Coalgebra { cs, alpha };
    if !check_coalgebra(&c)? {
        return Err(Error::InvalidCoalgebra("path map failed the coalgebra laws".to_string()));
    }
    Ok(c)
}

/// The cover extracted from a coalgebra.
#[derive(Debug, Clone)]
pub enum CoverFromCoalgebra {
    Forest(ForestCover),
    Pebble(PebbleForestCover),
    SyncTree(SyncTreeCertificate),
}

/// Read a combinatorial cover back off a valid coalgebra: the forest order is
/// the prefix order of the alpha-images, pebbles come from last moves.
pub fn coalgebra_to_cover(c: &Coalgebra) -> Result<CoverFromCoalgebra> {
    if !check_coalgebra(c)? {
        return Err(Error::InvalidCoalgebra("coalgebra laws fail".to_string()));
    }
    let base = &c.cs.base;
    match c.cs.kind {
        ComonadKind::Ef { .. } | ComonadKind::Pebble { .. } => {
            // parent of x: the element whose play is the longest strict prefix
            // of alpha(x); the coalgebra laws force prefixes of alpha-images
            // to be alpha-images
            let mut parent = vec![None; base.size()];
            for x in 0..base.size() {
                let play = &c.cs.plays[c.alpha[x]];
                if play.len() >= 2 {
                    let pre = play.prefix(play.len() - 1);
                    let pre_idx = c.cs.play_index(&pre).unwrap();
                    let y = c.cs.counit[pre_idx];
                    if c.alpha[y] != pre_idx {
                        return Err(Error::InvalidCoalgebra(
                            "play prefix is not an alpha-image".to_string(),
                        ));
                    }
                    parent[x] = Some(y);
                }
            }
            let forest = ForestCover::new(parent)?;
            match c.cs.kind {
                ComonadKind::Ef { .. } => Ok(CoverFromCoalgebra::Forest(forest)),
                ComonadKind::Pebble { k, .. } => {
                    let pebbles: Vec<usize> = (0..base.size())
                        .map(|x| match &c.cs.plays[c.alpha[x]] {
                            Play::Pebble(moves) => moves.last().unwrap().0,
                            _ => unreachable!(),
                        })
                        .collect();
                    Ok(CoverFromCoalgebra::Pebble(PebbleForestCover::new(forest, pebbles, k)?))
                }
                _ => unreachable!(),
            }
        }
        ComonadKind::Modal { k } => {
            let p = match base {
                Base::Pointed(p) => p,
                _ => unreachable!("modal bases are pointed"),
            };
            let cert = sync_tree_certificate(p).ok_or_else(|| {
                Error::InvalidCoalgebra(
                    "modal coalgebra exists only over synchronization trees".to_string(),
                )
            })?;
            if cert.height > k {
                return Err(Error::InvalidCoalgebra("tree higher than the modal bound".to_string()));
            }
            Ok(CoverFromCoalgebra::SyncTree(cert))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{compute_tree_depth, DEFAULT_COVER_CAP};
    use crate::graphs::{edgeless, kn, path};
    use crate::structure::Signature;

    const BOUND: u64 = DEFAULT_CARRIER_BOUND;

    fn plain(s: RelStructure) -> Base {
        Base::Plain(s)
    }

    #[test]
    fn ef_carrier_sizes() {
        let two = edgeless(2);
        let cs = build_comonad(&ComonadKind::Ef { n: 2 }, &plain(two), BOUND).unwrap();
        assert_eq!(cs.carrier.size(), 6); // |A| + |A|^2
        let three = edgeless(3);
        let cs = build_comonad(&ComonadKind::Ef { n: 3 }, &plain(three), BOUND).unwrap();
        assert_eq!(cs.carrier.size(), 3 + 9 + 27);
        // pebble carrier: sum (k|A|)^i
        let cs =
            build_comonad(&ComonadKind::Pebble { k: 2, n: 2 }, &plain(edgeless(2)), BOUND).unwrap();
        assert_eq!(cs.carrier.size(), 4 + 16);
    }

    #[test]
    fn ef_relations_require_comparability() {
        let edge = crate::graphs::directed_edge();
        let cs = build_comonad(&ComonadKind::Ef { n: 2 }, &plain(edge), BOUND).unwrap();
        let e = cs.carrier.relation("E").unwrap();
        let p0 = cs.play_index(&Play::Ef(vec![0])).unwrap();
        let p01 = cs.play_index(&Play::Ef(vec![0, 1])).unwrap();
        let p1 = cs.play_index(&Play::Ef(vec![1])).unwrap();
        assert!(e.contains(&vec![p0, p01]));
        assert!(!e.contains(&vec![p0, p1])); // incomparable
    }

    #[test]
    fn pebble_suffix_clause() {
        // one-point loop, P_{1,2}: only reflexive pairs survive
        let sig = Signature::graph();
        let loop1 = RelStructure::new(sig, 1, vec![("E", vec![vec![0, 0]])]).unwrap();
        let cs = build_comonad(&ComonadKind::Pebble { k: 1, n: 2 }, &plain(loop1), BOUND).unwrap();
        assert_eq!(cs.carrier.size(), 2);
        let e = cs.carrier.relation("E").unwrap();
        let s1 = cs.play_index(&Play::Pebble(vec![(1, 0)])).unwrap();
        let s2 = cs.play_index(&Play::Pebble(vec![(1, 0), (1, 0)])).unwrap();
        assert!(e.contains(&vec![s1, s1]));
        assert!(e.contains(&vec![s2, s2]));
        assert!(!e.contains(&vec![s1, s2]));
        assert!(!e.contains(&vec![s2, s1]));
        assert_eq!(e.len(), 2);
    }

    #[test]
    fn modal_carrier_is_the_path_set() {
        // chain a -> b -> c pointed at a
        let sig = Signature::graph();
        let chain =
            RelStructure::new(sig, 3, vec![("E", vec![vec![0, 1], vec![1, 2]])]).unwrap();
        let p = PointedStructure::new(chain, 0).unwrap();
        let cs = build_comonad(&ComonadKind::Modal { k: 2 }, &Base::Pointed(p), BOUND).unwrap();
        assert_eq!(cs.carrier.size(), 3);
        assert_eq!(cs.point, Some(0));
        assert_eq!(cs.counit, vec![0, 1, 2]);
    }

    #[test]
    fn counit_coextends_to_identity() {
        for a in [edgeless(2), kn(2), path(3)] {
            let cs = build_comonad(&ComonadKind::Ef { n: 2 }, &plain(a.clone()), BOUND).unwrap();
            let (_, eps_star) = coextension(&cs, &plain(a), &cs.counit, BOUND).unwrap();
            assert_eq!(eps_star, (0..cs.plays.len()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn coextension_unfolds_prefixwise() {
        // A = {0,1} discrete, B = {0}; the constant map
        let a = edgeless(2);
        let b = edgeless(1);
        let cs = build_comonad(&ComonadKind::Ef { n: 2 }, &plain(a), BOUND).unwrap();
        let f = vec![0; cs.plays.len()];
        let (target, f_star) = coextension(&cs, &plain(b), &f, BOUND).unwrap();
        let src = cs.play_index(&Play::Ef(vec![0, 1])).unwrap();
        let img = target.play_index(&Play::Ef(vec![0, 0])).unwrap();
        assert_eq!(f_star[src], img);
    }

    #[test]
    fn comonad_laws_hold_and_mutations_fail() {
        let a = kn(2);
        let b = path(3);
        let c = kn(2);
        let ca = build_comonad(&ComonadKind::Ef { n: 2 }, &plain(a.clone()), BOUND).unwrap();
        let cb = build_comonad(&ComonadKind::Ef { n: 2 }, &plain(b.clone()), BOUND).unwrap();
        // f: C(A) -> B via counit then the edge inclusion; g: C(B) -> C by
        // folding the path onto the edge
        let f: Vec<usize> = ca.counit.clone();
        let fold = [0usize, 1, 0];
        let g: Vec<usize> = cb.counit.iter().map(|&e| fold[e]).collect();
        assert!(check_comonad_laws(
            &ComonadKind::Ef { n: 2 },
            &plain(a.clone()),
            &plain(b.clone()),
            &plain(c.clone()),
            &f,
            &g,
            BOUND
        )
        .unwrap());
        // corrupt one entry of f; either the law check fails or the map stops
        // being a homomorphism
        let mut bad = f.clone();
        bad[0] = (bad[0] + 1) % b.size();
        let verdict = check_comonad_laws(
            &ComonadKind::Ef { n: 2 },
            &plain(a),
            &plain(b),
            &plain(c),
            &bad,
            &g,
            BOUND,
        );
        assert!(matches!(verdict, Ok(false) | Err(_)));
    }

    #[test]
    fn coalgebra_of_discrete_singletons() {
        let a = edgeless(2);
        let cs = build_comonad(&ComonadKind::Ef { n: 2 }, &plain(a.clone()), BOUND).unwrap();
        let alpha: Vec<usize> =
            (0..2).map(|x| cs.play_index(&Play::Ef(vec![x])).unwrap()).collect();
        let c = Coalgebra { cs, alpha };
        assert!(check_coalgebra(&c).unwrap());
    }

    #[test]
    fn singleton_alpha_fails_on_an_edge() {
        // K2 with alpha(x) = [x]: singleton plays are incomparable, so the
        // edge is not preserved
        let a = kn(2);
        let cs = build_comonad(&ComonadKind::Ef { n: 2 }, &plain(a), BOUND).unwrap();
        let alpha: Vec<usize> =
            (0..2).map(|x| cs.play_index(&Play::Ef(vec![x])).unwrap()).collect();
        let c = Coalgebra { cs, alpha };
        assert!(!check_coalgebra(&c).unwrap());
    }

    #[test]
    fn cover_coalgebra_roundtrip() {
        let a = path(3);
        let (td, cover) = compute_tree_depth(&a, DEFAULT_COVER_CAP).unwrap();
        assert_eq!(td, 2);
        let coalg = ef_cover_to_coalgebra(&a, &cover, 2, BOUND).unwrap();
        assert!(check_coalgebra(&coalg).unwrap());
        match coalgebra_to_cover(&coalg).unwrap() {
            CoverFromCoalgebra::Forest(f) => {
                assert_eq!(f.parents(), cover.parents());
            }
            _ => panic!("expected a forest cover"),
        }
    }

    #[test]
    fn modal_coalgebra_on_a_chain() {
        let sig = Signature::graph();
        let chain = RelStructure::new(sig, 2, vec![("E", vec![vec![0, 1]])]).unwrap();
        let p = PointedStructure::new(chain, 0).unwrap();
        let c = modal_cover_to_coalgebra(&p, 1, BOUND).unwrap();
        assert!(check_coalgebra(&c).unwrap());
        match coalgebra_to_cover(&c).unwrap() {
            CoverFromCoalgebra::SyncTree(cert) => assert_eq!(cert.height, 1),
            _ => panic!("expected a sync tree certificate"),
        }
        // a cycle is rooted but not a tree
        let sig = Signature::graph();
        let cyc = RelStructure::new(sig, 2, vec![("E", vec![vec![0, 1], vec![1, 0]])]).unwrap();
        let p = PointedStructure::new(cyc, 0).unwrap();
        assert!(modal_cover_to_coalgebra(&p, 3, BOUND).is_err());
    }
}
