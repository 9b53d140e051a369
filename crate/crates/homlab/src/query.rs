//! Canonical conjunctive queries and their counting-threshold lifts.
//!
//! The canonical query of a structure holds in exactly the homomorphism
//! targets; a cover layout bounds its variable count (pebbles) or quantifier
//! depth (forest height). The threshold lift turns a primitive positive
//! formula into a counting formula asserting at least `t` witness functions.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::cover::{validate_pebble_cover, ForestCover, PebbleForestCover};
use crate::error::{Error, Result};
use crate::formula::{CountingFormula, F};
use crate::structure::RelStructure;

/// A counting formula restricted to atoms, conjunction and plain existential
/// quantification (thresholds all 1); no negation, no equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitivePositiveFormula {
    formula: F,
}

impl PrimitivePositiveFormula {
    pub fn new(formula: F) -> Result<Self> {
        fn check(phi: &CountingFormula) -> bool {
            match phi {
                CountingFormula::Atom(..) => true,
                CountingFormula::And(fs) => fs.iter().all(|f| check(f)),
                CountingFormula::AtLeast(1, _, f) => check(f),
                _ => false,
            }
        }
        if check(&formula) {
            Ok(PrimitivePositiveFormula { formula })
        } else {
            Err(Error::MalformedInput(
                "primitive positive formulas allow only atoms, conjunction and plain existentials"
                    .to_string(),
            ))
        }
    }

    pub fn formula(&self) -> &F {
        &self.formula
    }

    pub fn free_variables(&self) -> Vec<String> {
        crate::formula::free_variables(&self.formula)
    }
}

/// How variables and quantifier nesting of a canonical query are laid out.
pub enum QueryLayout<'a> {
    /// One variable per element, quantifiers in a chain: width and depth |A|.
    Chain,
    /// One variable per element, nesting along a compatible forest cover:
    /// depth bounded by the cover height.
    Forest(&'a ForestCover),
    /// Variables reused per pebble index: width bounded by k, depth by the
    /// cover height.
    Pebble(&'a PebbleForestCover),
}

/// The canonical conjunctive query of `a`: a primitive positive sentence
/// satisfied by exactly the structures `a` maps into.
pub fn canonical_conjunctive_query(
    a: &RelStructure,
    layout: QueryLayout<'_>,
) -> Result<PrimitivePositiveFormula> {
    if a.size() == 0 {
        return Err(Error::MalformedInput(
            "the canonical query of the empty structure is not defined".to_string(),
        ));
    }
    // resolve the layout into a parent array and a variable name per element
    let (parent, var_of): (Vec<Option<usize>>, Vec<String>) = match layout {
        QueryLayout::Chain => (
            (0..a.size()).map(|i| if i == 0 { None } else { Some(i - 1) }).collect(),
            (0..a.size()).map(|i| format!("x{i}")).collect(),
        ),
        QueryLayout::Forest(cover) => {
            if cover.size() != a.size() || !cover.is_compatible(a) {
                return Err(Error::InvalidCover(
                    "layout must be a compatible forest cover of the structure".to_string(),
                ));
            }
            (
                (0..a.size()).map(|i| cover.parent(i)).collect(),
                (0..a.size()).map(|i| format!("x{i}")).collect(),
            )
        }
        QueryLayout::Pebble(cover) => {
            if !validate_pebble_cover(a, cover, cover.k, a.size()) {
                return Err(Error::InvalidCover(
                    "layout must be a valid pebble forest cover of the structure".to_string(),
                ));
            }
            (
                (0..a.size()).map(|i| cover.cover.parent(i)).collect(),
                (0..a.size()).map(|i| format!("p{}", cover.pebbles[i])).collect(),
            )
        }
    };
    let forest = ForestCover::new(parent.clone())?;
    // children and roots in element order
    let mut children = vec![Vec::new(); a.size()];
    let mut roots = Vec::new();
    for x in 0..a.size() {
        match parent[x] {
            Some(p) => children[p].push(x),
            None => roots.push(x),
        }
    }
    // each tuple is emitted at its forest-deepest element, where every
    // element of the tuple still has its variable in scope
    let mut atoms: Vec<Vec<F>> = vec![Vec::new(); a.size()];
    for (name, tuples) in a.relations() {
        for t in tuples {
            let deepest = t.iter().copied().max_by_key(|&e| forest.depth(e)).unwrap();
            if t.iter().any(|&e| !forest.comparable(e, deepest)) {
                return Err(Error::InvalidCover(
                    "tuple spans incomparable elements; cover is not compatible".to_string(),
                ));
            }
            atoms[deepest].push(Arc::new(CountingFormula::Atom(
                name.to_string(),
                t.iter().map(|&e| var_of[e].clone()).collect(),
            )));
        }
    }

    fn smart_and(mut fs: Vec<F>) -> F {
        if fs.len() == 1 {
            fs.pop().unwrap()
        } else {
            Arc::new(CountingFormula::And(fs))
        }
    }

    fn build(
        x: usize,
        children: &[Vec<usize>],
        atoms: &[Vec<F>],
        var_of: &[String],
    ) -> F {
        let mut parts = atoms[x].clone();
        for &c in &children[x] {
            parts.push(build(c, children, atoms, var_of));
        }
        Arc::new(CountingFormula::AtLeast(1, var_of[x].clone(), smart_and(parts)))
    }

    let sentence = smart_and(
        roots.iter().map(|&r| build(r, &children, &atoms, &var_of)).collect(),
    );
    PrimitivePositiveFormula::new(sentence)
}

/// Number of distinct quantifier-witness functions for a primitive positive
/// formula under `env`; for a canonical query with empty environment this is
/// the homomorphism count.
pub fn count_witnesses(
    b: &RelStructure,
    gamma: &PrimitivePositiveFormula,
    env: &BTreeMap<String, usize>,
) -> Result<u64> {
    for v in gamma.free_variables() {
        if !env.contains_key(&v) {
            return Err(Error::UnboundVariable(v));
        }
    }
    let mut env: BTreeMap<String, usize> = env.clone();
    count_rec(b, &gamma.formula, &mut env)
}

fn count_rec(b: &RelStructure, phi: &F, env: &mut BTreeMap<String, usize>) -> Result<u64> {
    match &**phi {
        CountingFormula::Atom(rel, vars) => {
            let tuple: Result<Vec<usize>> = vars
                .iter()
                .map(|v| env.get(v).copied().ok_or_else(|| Error::UnboundVariable(v.clone())))
                .collect();
            Ok(u64::from(b.relation(rel)?.contains(&tuple?)))
        }
        CountingFormula::And(fs) => {
            let mut product = 1u64;
            for f in fs {
                product = product
                    .checked_mul(count_rec(b, f, env)?)
                    .ok_or(Error::Overflow)?;
                if product == 0 {
                    return Ok(0);
                }
            }
            Ok(product)
        }
        CountingFormula::AtLeast(1, x, f) => {
            let saved = env.get(x).copied();
            let mut total = 0u64;
            for val in 0..b.size() {
                env.insert(x.clone(), val);
                total = total
                    .checked_add(count_rec(b, f, env)?)
                    .ok_or(Error::Overflow)?;
            }
            match saved {
                Some(v) => {
                    env.insert(x.clone(), v);
                }
                None => {
                    env.remove(x);
                }
            }
            Ok(total)
        }
        _ => Err(Error::MalformedInput("not a primitive positive formula".to_string())),
    }
}

/// A threshold staircase: conjuncts `at least m_i witnesses of gamma^{s_i}`,
/// with levels strictly increasing and thresholds strictly decreasing. Its
/// guaranteed witness count is the staircase area.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Staircase {
    /// (level s, threshold m), levels ascending, thresholds descending
    steps: Vec<(u64, u64)>,
}

impl Staircase {
    fn area(&self) -> u64 {
        let mut prev = 0u64;
        let mut total = 0u64;
        for &(s, m) in &self.steps {
            total += (s - prev) * m;
            prev = s;
        }
        total
    }

    /// Does satisfying `self` always satisfy `other`? Every step of `other`
    /// must be dominated by some step of `self`.
    fn implies(&self, other: &Staircase) -> bool {
        other
            .steps
            .iter()
            .all(|&(s2, m2)| self.steps.iter().any(|&(s1, m1)| s1 >= s2 && m1 >= m2))
    }
}

/// All implication-minimal staircases of area >= t with levels and thresholds
/// bounded by t. The disjunction over them characterises "at least t
/// witnesses of an existential" in terms of per-level counts.
fn minimal_staircases(t: u64) -> Vec<Staircase> {
    let mut candidates = Vec::new();
    fn rec(
        t: u64,
        next_level: u64,
        max_threshold: u64,
        steps: &mut Vec<(u64, u64)>,
        out: &mut Vec<Staircase>,
    ) {
        let cur = Staircase { steps: steps.clone() };
        let area = cur.area();
        if area >= t {
            out.push(cur);
            return; // extensions only strengthen an already sufficient staircase
        }
        for s in next_level..=t {
            for m in 1..=max_threshold {
                // remaining area gain is at most (t - s + 1) * m once we
                // commit to threshold m at level s; prune hopeless branches
                steps.push((s, m));
                rec(t, s + 1, m.saturating_sub(1), steps, out);
                steps.pop();
            }
        }
    }
    rec(t, 1, t, &mut Vec::new(), &mut candidates);
    candidates.sort();
    candidates.dedup();
    // keep only staircases not strictly stronger than another candidate
    let keep: Vec<bool> = candidates
        .iter()
        .map(|p| {
            !candidates
                .iter()
                .any(|q| q != p && p.implies(q))
        })
        .collect();
    candidates
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect()
}

/// Minimal pairs (t1, t2) with t1 * t2 >= t, componentwise.
fn minimal_pairs(t: u64) -> Vec<(u64, u64)> {
    let mut pairs: Vec<(u64, u64)> = (1..=t).map(|a| (a, t.div_ceil(a))).collect();
    pairs.sort();
    pairs.dedup();
    let keep: Vec<bool> = pairs
        .iter()
        .map(|&(a, b)| !pairs.iter().any(|&(c, d)| (c, d) != (a, b) && c <= a && d <= b))
        .collect();
    pairs.into_iter().zip(keep).filter_map(|(p, k)| k.then_some(p)).collect()
}

/// Threshold lifting with persistent memoisation: lifted subformulas are
/// shared across thresholds and across calls, which keeps repeated lifts of
/// one query tractable and lets evaluators reuse their per-node caches.
pub struct ThresholdLifter {
    memo: HashMap<(*const CountingFormula, u64), F>,
    tails: HashMap<*const CountingFormula, Vec<F>>,
    staircases: HashMap<u64, Vec<Staircase>>,
    // owners keep the Arc targets of the raw keys alive
    owners: Vec<F>,
}

impl Default for ThresholdLifter {
    fn default() -> Self {
        Self::new()
    }
}

impl ThresholdLifter {
    pub fn new() -> Self {
        ThresholdLifter {
            memo: HashMap::new(),
            tails: HashMap::new(),
            staircases: HashMap::new(),
            owners: Vec::new(),
        }
    }

    /// Lift `gamma` to assert at least `t` witness functions. Negation-free
    /// and equality-free; quantifier depth and variable set are those of the
    /// input.
    pub fn lift(&mut self, gamma: &PrimitivePositiveFormula, t: u64) -> Result<F> {
        if t == 0 {
            return Err(Error::InvalidParameter("threshold must be >= 1".to_string()));
        }
        self.owners.push(gamma.formula.clone());
        Ok(self.lift_rec(&gamma.formula, t))
    }

    fn lift_rec(&mut self, phi: &F, t: u64) -> F {
        let key = (Arc::as_ptr(phi), t);
        if let Some(f) = self.memo.get(&key) {
            return f.clone();
        }
        let out = match &**phi {
            CountingFormula::Atom(..) => {
                if t == 1 {
                    phi.clone()
                } else {
                    CountingFormula::falsity()
                }
            }
            CountingFormula::And(fs) => match fs.len() {
                0 => {
                    // the empty conjunction has exactly one witness
                    if t == 1 {
                        CountingFormula::truth()
                    } else {
                        CountingFormula::falsity()
                    }
                }
                1 => self.lift_rec(&fs[0].clone(), t),
                _ => {
                    // binary split: head and the (cached) tail conjunction
                    let head = fs[0].clone();
                    let rest = self
                        .tails
                        .entry(Arc::as_ptr(phi))
                        .or_insert_with(|| vec![Arc::new(CountingFormula::And(fs[1..].to_vec()))])
                        [0]
                    .clone();
                    let disjuncts: Vec<F> = minimal_pairs(t)
                        .into_iter()
                        .filter_map(|(t1, t2)| {
                            let lh = self.lift_rec(&head, t1);
                            let lr = self.lift_rec(&rest, t2);
                            if is_falsity(&lh) || is_falsity(&lr) {
                                return None;
                            }
                            Some(Arc::new(CountingFormula::And(vec![lh, lr])))
                        })
                        .collect();
                    smart_or(disjuncts)
                }
            },
            CountingFormula::AtLeast(1, x, body) => {
                // witnesses of the existential stack per element: if n_s
                // elements admit at least s witnesses each, the total is the
                // staircase area; disjoin over all minimal sufficient
                // staircases
                let x = x.clone();
                let body = body.clone();
                let stairs = self
                    .staircases
                    .entry(t)
                    .or_insert_with(|| minimal_staircases(t))
                    .clone();
                let mut disjuncts: Vec<F> = Vec::new();
                'stair: for stair in stairs {
                    let mut conj = Vec::with_capacity(stair.steps.len());
                    for &(s, m) in &stair.steps {
                        let inner = self.lift_rec(&body, s);
                        if is_falsity(&inner) {
                            continue 'stair; // no element reaches s witnesses
                        }
                        conj.push(Arc::new(CountingFormula::AtLeast(m, x.clone(), inner)));
                    }
                    disjuncts.push(smart_and_f(conj));
                }
                smart_or(disjuncts)
            }
            _ => unreachable!("validated primitive positive input"),
        };
        self.memo.insert(key, out.clone());
        out
    }
}

/// One-shot threshold lift; see [`ThresholdLifter`] for the reusable variant.
pub fn threshold_lift(gamma: &PrimitivePositiveFormula, t: u64) -> Result<F> {
    ThresholdLifter::new().lift(gamma, t)
}

fn is_falsity(f: &F) -> bool {
    matches!(&**f, CountingFormula::Or(fs) if fs.is_empty())
}

fn smart_or(mut fs: Vec<F>) -> F {
    if fs.len() == 1 {
        fs.pop().unwrap()
    } else {
        Arc::new(CountingFormula::Or(fs))
    }
}

fn smart_and_f(mut fs: Vec<F>) -> F {
    if fs.len() == 1 {
        fs.pop().unwrap()
    } else {
        Arc::new(CountingFormula::And(fs))
    }
}

/// A sentence without equality that, on structures with at most
/// `bound` ordered pairs in `E`, is equivalent to "some edge joins two
/// distinct vertices": at least `i` pairs but at most `i - 1` loops, for some
/// `i`.
pub fn distinct_edge_sentence(bound: u64) -> Result<F> {
    if bound == 0 {
        return Err(Error::InvalidParameter("bound must be >= 1".to_string()));
    }
    let edge_pair = PrimitivePositiveFormula::new(Arc::new(CountingFormula::AtLeast(
        1,
        "x".to_string(),
        Arc::new(CountingFormula::AtLeast(
            1,
            "y".to_string(),
            CountingFormula::atom("E", vec!["x", "y"]),
        )),
    )))?;
    let mut disjuncts = Vec::new();
    for i in 1..=bound {
        let at_least_i_pairs = threshold_lift(&edge_pair, i)?;
        let at_most_loops = Arc::new(CountingFormula::AtMost(
            i - 1,
            "x".to_string(),
            CountingFormula::atom("E", vec!["x", "x"]),
        ));
        disjuncts.push(Arc::new(CountingFormula::And(vec![at_least_i_pairs, at_most_loops])));
    }
    Ok(Arc::new(CountingFormula::Or(disjuncts)))
}
