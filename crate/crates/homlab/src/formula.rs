//! First-order logic with counting quantifiers and graded modal logic:
//! syntax, semantics, the prefix S-expression format, and the standard
//! translation.
//!
//! Counting formulas hold their children behind `Arc` so that constructions
//! like the threshold lift can share subformulas; the evaluator memoises on
//! node identity and the values of free variables.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::structure::{PointedStructure, RelStructure};

pub type F = Arc<CountingFormula>;

/// First-order formulas with counting quantifiers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CountingFormula {
    /// Relation symbol applied to variables.
    Atom(String, Vec<String>),
    Equal(String, String),
    Not(F),
    And(Vec<F>),
    Or(Vec<F>),
    /// At least `i` distinct witnesses for the bound variable.
    AtLeast(u64, String, F),
    /// At most `i` distinct witnesses for the bound variable.
    AtMost(u64, String, F),
}

impl CountingFormula {
    pub fn truth() -> F {
        Arc::new(CountingFormula::And(vec![]))
    }

    pub fn falsity() -> F {
        Arc::new(CountingFormula::Or(vec![]))
    }

    pub fn atom(rel: impl Into<String>, vars: Vec<&str>) -> F {
        Arc::new(CountingFormula::Atom(rel.into(), vars.into_iter().map(String::from).collect()))
    }

    pub fn exists(var: impl Into<String>, body: F) -> F {
        Arc::new(CountingFormula::AtLeast(1, var.into(), body))
    }
}

/// Maximum quantifier nesting.
pub fn quantifier_depth(phi: &F) -> usize {
    fn rec(phi: &CountingFormula, memo: &mut HashMap<*const CountingFormula, usize>) -> usize {
        let key = phi as *const CountingFormula;
        if let Some(&d) = memo.get(&key) {
            return d;
        }
        let d = match phi {
            CountingFormula::Atom(..) | CountingFormula::Equal(..) => 0,
            CountingFormula::Not(f) => rec(f, memo),
            CountingFormula::And(fs) | CountingFormula::Or(fs) => {
                fs.iter().map(|f| rec(f, memo)).max().unwrap_or(0)
            }
            CountingFormula::AtLeast(_, _, f) | CountingFormula::AtMost(_, _, f) => 1 + rec(f, memo),
        };
        memo.insert(key, d);
        d
    }
    rec(phi, &mut HashMap::new())
}

/// Number of distinct variable names occurring anywhere in the formula.
pub fn variable_width(phi: &F) -> usize {
    let mut vars = std::collections::BTreeSet::new();
    collect_vars(phi, &mut vars);
    vars.len()
}

fn collect_vars(phi: &CountingFormula, out: &mut std::collections::BTreeSet<String>) {
    match phi {
        CountingFormula::Atom(_, vs) => out.extend(vs.iter().cloned()),
        CountingFormula::Equal(x, y) => {
            out.insert(x.clone());
            out.insert(y.clone());
        }
        CountingFormula::Not(f) => collect_vars(f, out),
        CountingFormula::And(fs) | CountingFormula::Or(fs) => {
            for f in fs {
                collect_vars(f, out);
            }
        }
        CountingFormula::AtLeast(_, x, f) | CountingFormula::AtMost(_, x, f) => {
            out.insert(x.clone());
            collect_vars(f, out);
        }
    }
}

/// Free variables, in sorted order.
pub fn free_variables(phi: &F) -> Vec<String> {
    fn rec(
        phi: &CountingFormula,
        bound: &mut Vec<String>,
        out: &mut std::collections::BTreeSet<String>,
    ) {
        match phi {
            CountingFormula::Atom(_, vs) => {
                for v in vs {
                    if !bound.contains(v) {
                        out.insert(v.clone());
                    }
                }
            }
            CountingFormula::Equal(x, y) => {
                for v in [x, y] {
                    if !bound.contains(v) {
                        out.insert(v.clone());
                    }
                }
            }
            CountingFormula::Not(f) => rec(f, bound, out),
            CountingFormula::And(fs) | CountingFormula::Or(fs) => {
                for f in fs {
                    rec(f, bound, out);
                }
            }
            CountingFormula::AtLeast(_, x, f) | CountingFormula::AtMost(_, x, f) => {
                bound.push(x.clone());
                rec(f, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = std::collections::BTreeSet::new();
    rec(phi, &mut Vec::new(), &mut out);
    out.into_iter().collect()
}

pub fn equality_free(phi: &F) -> bool {
    match &**phi {
        CountingFormula::Equal(..) => false,
        CountingFormula::Atom(..) => true,
        CountingFormula::Not(f) => equality_free(f),
        CountingFormula::And(fs) | CountingFormula::Or(fs) => fs.iter().all(equality_free),
        CountingFormula::AtLeast(_, _, f) | CountingFormula::AtMost(_, _, f) => equality_free(f),
    }
}

/// An instruction-level view of one node of a compiled formula DAG.
#[derive(Debug, Clone)]
enum CompiledNode {
    /// relation symbol index into [`CompiledFormulas::symbols`], variable ids
    Atom(u32, Vec<u32>),
    Equal(u32, u32),
    Not(u32),
    And(Vec<u32>),
    Or(Vec<u32>),
    AtLeast(u64, u32, u32),
    AtMost(u64, u32, u32),
}

/// A formula DAG interned once so that many structures can be evaluated
/// against it. Shared subterms (`Arc` nodes) compile to shared node ids,
/// which is what makes threshold-lift families cheap to evaluate.
#[derive(Debug, Default, Clone)]
pub struct CompiledFormulas {
    nodes: Vec<CompiledNode>,
    /// sorted free-variable ids per node
    free: Vec<Vec<u32>>,
    symbols: Vec<String>,
    vars: Vec<String>,
    var_ids: HashMap<String, u32>,
    symbol_ids: HashMap<String, u32>,
    roots: HashMap<*const CountingFormula, u32>,
    /// keeps compiled formulas alive so interning pointers stay unique
    owners: Vec<F>,
}

// raw pointers are only used as interning keys
unsafe impl Send for CompiledFormulas {}
unsafe impl Sync for CompiledFormulas {}

impl CompiledFormulas {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var_name(&self, id: u32) -> &str {
        &self.vars[id as usize]
    }

    fn var_id(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.var_ids.get(name) {
            return id;
        }
        let id = self.vars.len() as u32;
        self.vars.push(name.to_string());
        self.var_ids.insert(name.to_string(), id);
        id
    }

    fn symbol_id(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.symbol_ids.get(name) {
            return id;
        }
        let id = self.symbols.len() as u32;
        self.symbols.push(name.to_string());
        self.symbol_ids.insert(name.to_string(), id);
        id
    }

    /// Intern a formula (and all shared descendants); returns its node id.
    pub fn compile(&mut self, phi: &F) -> u32 {
        let key = Arc::as_ptr(phi);
        if let Some(&id) = self.roots.get(&key) {
            return id;
        }
        let (node, free) = match &**phi {
            CountingFormula::Atom(rel, vs) => {
                let sym = self.symbol_id(rel);
                let vars: Vec<u32> = vs.iter().map(|v| self.var_id(v)).collect();
                let mut f = vars.clone();
                f.sort_unstable();
                f.dedup();
                (CompiledNode::Atom(sym, vars), f)
            }
            CountingFormula::Equal(x, y) => {
                let (vx, vy) = (self.var_id(x), self.var_id(y));
                let mut f = vec![vx, vy];
                f.sort_unstable();
                f.dedup();
                (CompiledNode::Equal(vx, vy), f)
            }
            CountingFormula::Not(g) => {
                let gid = self.compile(g);
                (CompiledNode::Not(gid), self.free[gid as usize].clone())
            }
            CountingFormula::And(gs) | CountingFormula::Or(gs) => {
                let ids: Vec<u32> = gs.iter().map(|g| self.compile(g)).collect();
                let mut f: Vec<u32> = ids
                    .iter()
                    .flat_map(|&g| self.free[g as usize].iter().copied())
                    .collect();
                f.sort_unstable();
                f.dedup();
                let node = if matches!(&**phi, CountingFormula::And(_)) {
                    CompiledNode::And(ids)
                } else {
                    CompiledNode::Or(ids)
                };
                (node, f)
            }
            CountingFormula::AtLeast(i, x, g) | CountingFormula::AtMost(i, x, g) => {
                let xid = self.var_id(x);
                let gid = self.compile(g);
                let f: Vec<u32> = self.free[gid as usize]
                    .iter()
                    .copied()
                    .filter(|&v| v != xid)
                    .collect();
                let node = if matches!(&**phi, CountingFormula::AtLeast(..)) {
                    CompiledNode::AtLeast(*i, xid, gid)
                } else {
                    CompiledNode::AtMost(*i, xid, gid)
                };
                (node, f)
            }
        };
        let id = self.nodes.len() as u32;
        self.nodes.push(node);
        self.free.push(free);
        self.roots.insert(key, id);
        self.owners.push(phi.clone());
        id
    }
}

/// Per-structure evaluation state over a compiled DAG: dense memo tables
/// indexed by (node, values of the node's free variables).
pub struct CompiledEvaluator<'c, 'a> {
    program: &'c CompiledFormulas,
    structure: &'a RelStructure,
    relations: Vec<Option<&'a std::collections::BTreeSet<Vec<usize>>>>,
    /// per node: 0 unknown, 1 false, 2 true, indexed by the env code
    memo: Vec<Option<Box<[u8]>>>,
    /// fallback for nodes whose env space is too large for a dense table
    spill: HashMap<(u32, u64), bool>,
}

const DENSE_MEMO_LIMIT: u64 = 1 << 14;

impl<'c, 'a> CompiledEvaluator<'c, 'a> {
    pub fn new(program: &'c CompiledFormulas, structure: &'a RelStructure) -> Self {
        let relations = program
            .symbols
            .iter()
            .map(|name| structure.relation(name).ok())
            .collect();
        CompiledEvaluator {
            program,
            structure,
            relations,
            memo: vec![None; program.nodes.len()],
            spill: HashMap::new(),
        }
    }

    /// Evaluate a compiled node under a full environment (indexed by the
    /// program's variable ids; entries may be None for unused variables).
    pub fn eval(&mut self, node: u32, env: &mut Vec<u32>) -> Result<bool> {
        if env.len() < self.program.vars.len() {
            env.resize(self.program.vars.len(), u32::MAX);
        }
        self.eval_rec(node, env)
    }

    fn env_code(&self, node: u32, env: &[u32]) -> u64 {
        let base = self.structure.size() as u64 + 1;
        let mut code = 0u64;
        for &v in &self.program.free[node as usize] {
            code = code * base + (env[v as usize] as u64 + 1);
        }
        code
    }

    fn env_space(&self, node: u32) -> u64 {
        let base = self.structure.size() as u64 + 1;
        let mut space = 1u64;
        for _ in &self.program.free[node as usize] {
            space = space.saturating_mul(base);
            if space > DENSE_MEMO_LIMIT {
                return space;
            }
        }
        space
    }

    fn eval_rec(&mut self, node: u32, env: &mut Vec<u32>) -> Result<bool> {
        let program = self.program;
        let space = self.env_space(node);
        let dense = space <= DENSE_MEMO_LIMIT;
        let code = self.env_code(node, env);
        if dense {
            let table =
                self.memo[node as usize].get_or_insert_with(|| vec![0u8; space as usize].into());
            match table[code as usize] {
                1 => return Ok(false),
                2 => return Ok(true),
                _ => {}
            }
        } else if let Some(&v) = self.spill.get(&(node, code)) {
            return Ok(v);
        }

        let value = match &program.nodes[node as usize] {
            CompiledNode::Atom(sym, vars) => {
                let rel = self.relations[*sym as usize].ok_or_else(|| {
                    Error::MissingSymbol(program.symbols[*sym as usize].clone())
                })?;
                let mut tuple = Vec::with_capacity(vars.len());
                for &v in vars {
                    let val = env[v as usize];
                    if val == u32::MAX {
                        return Err(Error::UnboundVariable(program.vars[v as usize].clone()));
                    }
                    tuple.push(val as usize);
                }
                rel.contains(&tuple)
            }
            CompiledNode::Equal(x, y) => {
                let (vx, vy) = (env[*x as usize], env[*y as usize]);
                if vx == u32::MAX || vy == u32::MAX {
                    let unbound = if vx == u32::MAX { *x } else { *y };
                    return Err(Error::UnboundVariable(program.vars[unbound as usize].clone()));
                }
                vx == vy
            }
            CompiledNode::Not(g) => !self.eval_rec(*g, env)?,
            CompiledNode::And(gs) => {
                let mut v = true;
                for &g in gs {
                    if !self.eval_rec(g, env)? {
                        v = false;
                        break;
                    }
                }
                v
            }
            CompiledNode::Or(gs) => {
                let mut v = false;
                for &g in gs {
                    if self.eval_rec(g, env)? {
                        v = true;
                        break;
                    }
                }
                v
            }
            CompiledNode::AtLeast(i, x, g) => {
                let (i, x, g) = (*i, *x as usize, *g);
                let n = self.structure.size() as u64;
                if i == 0 {
                    true
                } else if i > n {
                    false // thresholds above |A| are decided immediately
                } else {
                    let saved = env[x];
                    let mut count = 0u64;
                    for val in 0..self.structure.size() {
                        env[x] = val as u32;
                        if self.eval_rec(g, env)? {
                            count += 1;
                            if count >= i {
                                break;
                            }
                        }
                    }
                    env[x] = saved;
                    count >= i
                }
            }
            CompiledNode::AtMost(i, x, g) => {
                let (i, x, g) = (*i, *x as usize, *g);
                let n = self.structure.size() as u64;
                if i >= n {
                    true
                } else {
                    let saved = env[x];
                    let mut count = 0u64;
                    for val in 0..self.structure.size() {
                        env[x] = val as u32;
                        if self.eval_rec(g, env)? {
                            count += 1;
                            if count > i {
                                break;
                            }
                        }
                    }
                    env[x] = saved;
                    count <= i
                }
            }
        };
        if dense {
            let table = self.memo[node as usize].as_mut().unwrap();
            table[code as usize] = if value { 2 } else { 1 };
        } else {
            self.spill.insert((node, code), value);
        }
        Ok(value)
    }
}

/// Reusable evaluator for one structure: formulas are compiled into a shared
/// DAG on first sight, and results are cached per (node, free-variable
/// values), so families of formulas sharing subterms stay cheap.
pub struct FormulaEvaluator<'a> {
    structure: &'a RelStructure,
    program: CompiledFormulas,
    memo: Vec<Option<Box<[u8]>>>,
    spill: HashMap<(u32, u64), bool>,
}

impl<'a> FormulaEvaluator<'a> {
    pub fn new(structure: &'a RelStructure) -> Self {
        FormulaEvaluator {
            structure,
            program: CompiledFormulas::new(),
            memo: Vec::new(),
            spill: HashMap::new(),
        }
    }

    pub fn eval(&mut self, phi: &F, env: &BTreeMap<String, usize>) -> Result<bool> {
        // the public environment must cover the free variables
        for v in free_variables(phi) {
            if !env.contains_key(&v) {
                return Err(Error::UnboundVariable(v));
            }
        }
        let root = self.program.compile(phi);
        self.memo.resize(self.program.nodes.len(), None);
        let mut dense: Vec<u32> = vec![u32::MAX; self.program.vars.len()];
        for (name, &val) in env {
            if val >= self.structure.size() {
                return Err(Error::MalformedInput(format!(
                    "environment value {val} out of range"
                )));
            }
            if let Some(&id) = self.program.var_ids.get(name) {
                dense[id as usize] = val as u32;
            }
        }
        // borrow juggling: run a scoped evaluator sharing our caches
        let mut ev = CompiledEvaluator::new(&self.program, self.structure);
        std::mem::swap(&mut ev.memo, &mut self.memo);
        std::mem::swap(&mut ev.spill, &mut self.spill);
        let out = ev.eval(root, &mut dense);
        std::mem::swap(&mut ev.memo, &mut self.memo);
        std::mem::swap(&mut ev.spill, &mut self.spill);
        out
    }
}

/// One-shot evaluation of a counting formula.
pub fn eval_formula(a: &RelStructure, phi: &F, env: &BTreeMap<String, usize>) -> Result<bool> {
    FormulaEvaluator::new(a).eval(phi, env)
}

/// Graded modal formulas over unary propositions and binary accessibility
/// relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModalFormula {
    Prop(String),
    Not(Box<ModalFormula>),
    And(Vec<ModalFormula>),
    Or(Vec<ModalFormula>),
    /// At least `n` distinct successors along the relation satisfy the body.
    Diamond(String, u64, Box<ModalFormula>),
    /// All but fewer than `n` successors satisfy the body (the dual).
    Box(String, u64, Box<ModalFormula>),
}

impl ModalFormula {
    pub fn truth() -> ModalFormula {
        ModalFormula::And(vec![])
    }

    pub fn diamond(rel: impl Into<String>, n: u64, body: ModalFormula) -> ModalFormula {
        ModalFormula::Diamond(rel.into(), n, Box::new(body))
    }
}

/// Nesting depth of modalities.
pub fn modal_depth(phi: &ModalFormula) -> usize {
    match phi {
        ModalFormula::Prop(_) => 0,
        ModalFormula::Not(f) => modal_depth(f),
        ModalFormula::And(fs) | ModalFormula::Or(fs) => {
            fs.iter().map(modal_depth).max().unwrap_or(0)
        }
        ModalFormula::Diamond(_, _, f) | ModalFormula::Box(_, _, f) => 1 + modal_depth(f),
    }
}

fn eval_modal_at(a: &RelStructure, world: usize, phi: &ModalFormula) -> Result<bool> {
    match phi {
        ModalFormula::Prop(p) => {
            if a.signature().arity(p) != Some(1) {
                return Err(Error::MissingSymbol(format!("unary symbol {p}")));
            }
            Ok(a.relation(p)?.contains(&vec![world]))
        }
        ModalFormula::Not(f) => Ok(!eval_modal_at(a, world, f)?),
        ModalFormula::And(fs) => {
            for f in fs {
                if !eval_modal_at(a, world, f)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        ModalFormula::Or(fs) => {
            for f in fs {
                if eval_modal_at(a, world, f)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        ModalFormula::Diamond(rel, n, f) => {
            if a.signature().arity(rel) != Some(2) {
                return Err(Error::MissingSymbol(format!("binary symbol {rel}")));
            }
            let mut count = 0u64;
            for t in a.relation(rel)? {
                if t[0] == world && eval_modal_at(a, t[1], f)? {
                    count += 1;
                    if count >= *n {
                        return Ok(true);
                    }
                }
            }
            Ok(count >= *n)
        }
        ModalFormula::Box(rel, n, f) => {
            // Box^n phi = not Diamond^n not phi
            let dual = ModalFormula::Diamond(
                rel.clone(),
                *n,
                Box::new(ModalFormula::Not(f.clone())),
            );
            Ok(!eval_modal_at(a, world, &dual)?)
        }
    }
}

/// Kripke semantics with graded modalities at the distinguished point.
pub fn eval_modal(p: &PointedStructure, phi: &ModalFormula) -> Result<bool> {
    eval_modal_at(&p.structure, p.point, phi)
}

/// Standard translation into counting logic, with `v0` free for the point and
/// one fresh variable per modal nesting level.
pub fn standard_translation(phi: &ModalFormula) -> F {
    fn var(d: usize) -> String {
        format!("v{d}")
    }
    fn tr(phi: &ModalFormula, d: usize) -> F {
        match phi {
            ModalFormula::Prop(p) => {
                Arc::new(CountingFormula::Atom(p.clone(), vec![var(d)]))
            }
            ModalFormula::Not(f) => Arc::new(CountingFormula::Not(tr(f, d))),
            ModalFormula::And(fs) => {
                Arc::new(CountingFormula::And(fs.iter().map(|f| tr(f, d)).collect()))
            }
            ModalFormula::Or(fs) => {
                Arc::new(CountingFormula::Or(fs.iter().map(|f| tr(f, d)).collect()))
            }
            ModalFormula::Diamond(rel, n, f) => {
                let body = Arc::new(CountingFormula::And(vec![
                    Arc::new(CountingFormula::Atom(rel.clone(), vec![var(d), var(d + 1)])),
                    tr(f, d + 1),
                ]));
                Arc::new(CountingFormula::AtLeast(*n, var(d + 1), body))
            }
            ModalFormula::Box(rel, n, f) => {
                let body = Arc::new(CountingFormula::And(vec![
                    Arc::new(CountingFormula::Atom(rel.clone(), vec![var(d), var(d + 1)])),
                    Arc::new(CountingFormula::Not(tr(f, d + 1))),
                ]));
                Arc::new(CountingFormula::Not(Arc::new(CountingFormula::AtLeast(
                    *n,
                    var(d + 1),
                    body,
                ))))
            }
        }
    }
    tr(phi, 0)
}

/// The free variable used by [`standard_translation`] for the point.
pub const TRANSLATION_POINT_VAR: &str = "v0";

// ---------------------------------------------------------------------------
// prefix S-expression syntax

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(input: &str) -> Result<Vec<String>> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for ch in input.chars() {
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
                tokens.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    Ok(tokens)
}

fn parse_sexp(tokens: &[String], pos: &mut usize) -> Result<Sexp> {
    if *pos >= tokens.len() {
        return Err(Error::Parse("unexpected end of input".to_string()));
    }
    let tok = &tokens[*pos];
    *pos += 1;
    if tok == "(" {
        let mut items = Vec::new();
        loop {
            if *pos >= tokens.len() {
                return Err(Error::Parse("unbalanced parentheses".to_string()));
            }
            if tokens[*pos] == ")" {
                *pos += 1;
                return Ok(Sexp::List(items));
            }
            items.push(parse_sexp(tokens, pos)?);
        }
    } else if tok == ")" {
        Err(Error::Parse("unexpected )".to_string()))
    } else {
        Ok(Sexp::Atom(tok.clone()))
    }
}

fn sexp_of(input: &str) -> Result<Sexp> {
    let tokens = tokenize(input)?;
    let mut pos = 0;
    let out = parse_sexp(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(Error::Parse("trailing input after formula".to_string()));
    }
    Ok(out)
}

fn atom_name(s: &Sexp) -> Result<String> {
    match s {
        Sexp::Atom(a) => Ok(a.clone()),
        Sexp::List(_) => Err(Error::Parse("expected an atom".to_string())),
    }
}

fn parse_count(s: &Sexp) -> Result<u64> {
    atom_name(s)?.parse().map_err(|_| Error::Parse("expected a number".to_string()))
}

/// Parse a counting formula from its S-expression text.
pub fn parse_counting(input: &str) -> Result<F> {
    counting_of_sexp(&sexp_of(input)?)
}

fn counting_of_sexp(s: &Sexp) -> Result<F> {
    match s {
        Sexp::Atom(a) if a == "true" => Ok(CountingFormula::truth()),
        Sexp::Atom(a) if a == "false" => Ok(CountingFormula::falsity()),
        Sexp::Atom(a) => Err(Error::Parse(format!("unexpected bare atom {a}"))),
        Sexp::List(items) => {
            if items.is_empty() {
                return Err(Error::Parse("empty list".to_string()));
            }
            let head = atom_name(&items[0])?;
            match head.as_str() {
                "and" | "or" => {
                    let fs: Result<Vec<F>> = items[1..].iter().map(counting_of_sexp).collect();
                    let fs = fs?;
                    Ok(Arc::new(if head == "and" {
                        CountingFormula::And(fs)
                    } else {
                        CountingFormula::Or(fs)
                    }))
                }
                "not" => {
                    if items.len() != 2 {
                        return Err(Error::Parse("not takes one argument".to_string()));
                    }
                    Ok(Arc::new(CountingFormula::Not(counting_of_sexp(&items[1])?)))
                }
                "=" => {
                    if items.len() != 3 {
                        return Err(Error::Parse("= takes two variables".to_string()));
                    }
                    Ok(Arc::new(CountingFormula::Equal(
                        atom_name(&items[1])?,
                        atom_name(&items[2])?,
                    )))
                }
                "geq" | "leq" => {
                    if items.len() != 4 {
                        return Err(Error::Parse(format!("{head} takes (count var body)")));
                    }
                    let i = parse_count(&items[1])?;
                    let x = atom_name(&items[2])?;
                    let body = counting_of_sexp(&items[3])?;
                    Ok(Arc::new(if head == "geq" {
                        CountingFormula::AtLeast(i, x, body)
                    } else {
                        CountingFormula::AtMost(i, x, body)
                    }))
                }
                "prop" | "diamond" | "box" => {
                    Err(Error::Parse(format!("{head} is a modal operator; use the modal parser")))
                }
                rel => {
                    let vars: Result<Vec<String>> = items[1..].iter().map(atom_name).collect();
                    Ok(Arc::new(CountingFormula::Atom(rel.to_string(), vars?)))
                }
            }
        }
    }
}

/// Parse a graded modal formula from its S-expression text.
pub fn parse_modal(input: &str) -> Result<ModalFormula> {
    modal_of_sexp(&sexp_of(input)?)
}

fn modal_of_sexp(s: &Sexp) -> Result<ModalFormula> {
    match s {
        Sexp::Atom(a) if a == "true" => Ok(ModalFormula::And(vec![])),
        Sexp::Atom(a) if a == "false" => Ok(ModalFormula::Or(vec![])),
        Sexp::Atom(a) => Err(Error::Parse(format!("unexpected bare atom {a}"))),
        Sexp::List(items) => {
            if items.is_empty() {
                return Err(Error::Parse("empty list".to_string()));
            }
            let head = atom_name(&items[0])?;
            match head.as_str() {
                "and" | "or" => {
                    let fs: Result<Vec<ModalFormula>> =
                        items[1..].iter().map(modal_of_sexp).collect();
                    let fs = fs?;
                    Ok(if head == "and" { ModalFormula::And(fs) } else { ModalFormula::Or(fs) })
                }
                "not" => {
                    if items.len() != 2 {
                        return Err(Error::Parse("not takes one argument".to_string()));
                    }
                    Ok(ModalFormula::Not(Box::new(modal_of_sexp(&items[1])?)))
                }
                "prop" => {
                    if items.len() != 2 {
                        return Err(Error::Parse("prop takes a symbol".to_string()));
                    }
                    Ok(ModalFormula::Prop(atom_name(&items[1])?))
                }
                "diamond" | "box" => {
                    if items.len() != 4 {
                        return Err(Error::Parse(format!("{head} takes (relation count body)")));
                    }
                    let rel = atom_name(&items[1])?;
                    let n = parse_count(&items[2])?;
                    let body = Box::new(modal_of_sexp(&items[3])?);
                    Ok(if head == "diamond" {
                        ModalFormula::Diamond(rel, n, body)
                    } else {
                        ModalFormula::Box(rel, n, body)
                    })
                }
                other => Err(Error::Parse(format!("unknown modal operator {other}"))),
            }
        }
    }
}

/// Is this S-expression a modal formula (contains prop/diamond/box)?
pub fn looks_modal(input: &str) -> bool {
    input.contains("(prop")
        || input.contains("(diamond")
        || input.contains("(box")
}

/// Print a counting formula in the S-expression syntax.
pub fn print_counting(phi: &F) -> String {
    let mut out = String::new();
    write_counting(phi, &mut out);
    out
}

fn write_counting(phi: &CountingFormula, out: &mut String) {
    match phi {
        CountingFormula::Atom(rel, vars) => {
            write!(out, "({rel}").unwrap();
            for v in vars {
                write!(out, " {v}").unwrap();
            }
            out.push(')');
        }
        CountingFormula::Equal(x, y) => write!(out, "(= {x} {y})").unwrap(),
        CountingFormula::Not(f) => {
            out.push_str("(not ");
            write_counting(f, out);
            out.push(')');
        }
        CountingFormula::And(fs) | CountingFormula::Or(fs) => {
            let head = if matches!(phi, CountingFormula::And(_)) { "and" } else { "or" };
            write!(out, "({head}").unwrap();
            for f in fs {
                out.push(' ');
                write_counting(f, out);
            }
            out.push(')');
        }
        CountingFormula::AtLeast(i, x, f) | CountingFormula::AtMost(i, x, f) => {
            let head = if matches!(phi, CountingFormula::AtLeast(..)) { "geq" } else { "leq" };
            write!(out, "({head} {i} {x} ").unwrap();
            write_counting(f, out);
            out.push(')');
        }
    }
}

/// Print a modal formula in the S-expression syntax.
pub fn print_modal(phi: &ModalFormula) -> String {
    match phi {
        ModalFormula::Prop(p) => format!("(prop {p})"),
        ModalFormula::Not(f) => format!("(not {})", print_modal(f)),
        ModalFormula::And(fs) => {
            let inner: Vec<String> = fs.iter().map(print_modal).collect();
            if inner.is_empty() {
                "(and)".to_string()
            } else {
                format!("(and {})", inner.join(" "))
            }
        }
        ModalFormula::Or(fs) => {
            let inner: Vec<String> = fs.iter().map(print_modal).collect();
            if inner.is_empty() {
                "(or)".to_string()
            } else {
                format!("(or {})", inner.join(" "))
            }
        }
        ModalFormula::Diamond(rel, n, f) => format!("(diamond {rel} {n} {})", print_modal(f)),
        ModalFormula::Box(rel, n, f) => format!("(box {rel} {n} {})", print_modal(f)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::kn;
    use crate::structure::Signature;

    fn env(pairs: &[(&str, usize)]) -> BTreeMap<String, usize> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn counting_semantics_on_k3() {
        let k3 = kn(3);
        // no loops
        let loops = Arc::new(CountingFormula::AtLeast(
            1,
            "x".to_string(),
            CountingFormula::atom("E", vec!["x", "x"]),
        ));
        assert!(!eval_formula(&k3, &loops, &env(&[])).unwrap());
        // every vertex has two neighbours
        let phi = Arc::new(CountingFormula::AtLeast(
            3,
            "x".to_string(),
            Arc::new(CountingFormula::AtLeast(
                2,
                "y".to_string(),
                CountingFormula::atom("E", vec!["x", "y"]),
            )),
        ));
        assert!(eval_formula(&k3, &phi, &env(&[])).unwrap());
        // only three elements
        let four = Arc::new(CountingFormula::AtLeast(
            4,
            "x".to_string(),
            Arc::new(CountingFormula::Equal("x".to_string(), "x".to_string())),
        ));
        assert!(!eval_formula(&k3, &four, &env(&[])).unwrap());
    }

    #[test]
    fn unbound_variables_error() {
        let k3 = kn(3);
        let phi = CountingFormula::atom("E", vec!["x", "y"]);
        assert!(matches!(
            eval_formula(&k3, &phi, &env(&[("x", 0)])),
            Err(Error::UnboundVariable(_))
        ));
        assert!(eval_formula(&k3, &phi, &env(&[("x", 0), ("y", 1)])).unwrap());
    }

    #[test]
    fn at_most_semantics() {
        let k3 = kn(3);
        // at most 1 loop: vacuously true
        let phi = Arc::new(CountingFormula::AtMost(
            1,
            "x".to_string(),
            CountingFormula::atom("E", vec!["x", "x"]),
        ));
        assert!(eval_formula(&k3, &phi, &env(&[])).unwrap());
        // at most 2 vertices: false
        let phi = Arc::new(CountingFormula::AtMost(
            2,
            "x".to_string(),
            Arc::new(CountingFormula::Equal("x".to_string(), "x".to_string())),
        ));
        assert!(!eval_formula(&k3, &phi, &env(&[])).unwrap());
    }

    #[test]
    fn modal_eval_counts_successors() {
        let sig = Signature::new(vec![("R", 2), ("P", 1)]).unwrap();
        let a = RelStructure::new(
            sig,
            3,
            vec![("R", vec![vec![0, 1], vec![0, 2]]), ("P", vec![vec![1]])],
        )
        .unwrap();
        let p = PointedStructure::new(a, 0).unwrap();
        assert!(eval_modal(&p, &ModalFormula::diamond("R", 2, ModalFormula::truth())).unwrap());
        assert!(!eval_modal(&p, &ModalFormula::diamond("R", 3, ModalFormula::truth())).unwrap());
        assert!(eval_modal(&p, &ModalFormula::diamond("R", 1, ModalFormula::Prop("P".into())))
            .unwrap());
        assert!(!eval_modal(&p, &ModalFormula::diamond("R", 2, ModalFormula::Prop("P".into())))
            .unwrap());
        // top holds everywhere
        assert!(eval_modal(&p, &ModalFormula::truth()).unwrap());
    }

    #[test]
    fn standard_translation_shape() {
        let tr_p = standard_translation(&ModalFormula::Prop("P".into()));
        assert_eq!(print_counting(&tr_p), "(P v0)");
        let tr_dia =
            standard_translation(&ModalFormula::diamond("R", 1, ModalFormula::Prop("P".into())));
        assert_eq!(print_counting(&tr_dia), "(geq 1 v1 (and (R v0 v1) (P v1)))");
    }

    #[test]
    fn sexp_roundtrip() {
        let text = "(geq 3 x (geq 2 y (E x y)))";
        let phi = parse_counting(text).unwrap();
        assert_eq!(print_counting(&phi), text);
        assert_eq!(quantifier_depth(&phi), 2);
        assert_eq!(variable_width(&phi), 2);
        assert!(equality_free(&phi));

        let m = "(diamond alpha 2 (prop p))";
        let phi = parse_modal(m).unwrap();
        assert_eq!(print_modal(&phi), m);
        assert_eq!(modal_depth(&phi), 1);
    }

    #[test]
    fn depth_and_width_metrics() {
        let phi = parse_counting("(and (geq 1 x (E x y)) (not (= x y)))").unwrap();
        assert_eq!(quantifier_depth(&phi), 1);
        assert_eq!(variable_width(&phi), 2);
        assert!(!equality_free(&phi));
        assert_eq!(free_variables(&phi), vec!["x".to_string(), "y".to_string()]);
    }
}
