//! Arithmetic formula ASTs: parsing, validation, normalization and the
//! structural measures used by the rank experiments.
//!
//! Formulas are strictly binary trees stored in an arena (children always
//! precede parents), so every traversal here is iterative; chain-shaped
//! formulas on thousands of variables must not recurse.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::field::Field;

/// An input variable: either a plain `x<i>` or a grid cell `x<i>_<j>` as used
/// by n-by-n variable matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarId {
    Plain(u32),
    Grid(u16, u16),
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::Plain(i) => write!(f, "x{i}"),
            VarId::Grid(i, j) => write!(f, "x{i}_{j}"),
        }
    }
}

/// A leaf variable. Formulas start out over the input space `X`; applying a
/// partition rewrites leaves to fresh `Y`/`Z` targets (1-based indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X(VarId),
    Y(u32),
    Z(u32),
}

impl Var {
    pub fn is_target(self) -> bool {
        matches!(self, Var::Y(_) | Var::Z(_))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(v) => write!(f, "{v}"),
            Var::Y(k) => write!(f, "y{k}"),
            Var::Z(k) => write!(f, "z{k}"),
        }
    }
}

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Var(Var),
    Const(u64),
    Add(NodeId, NodeId),
    Mul(NodeId, NodeId),
}

impl Node {
    pub fn is_leaf(self) -> bool {
        matches!(self, Node::Var(_) | Node::Const(_))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("variable {0} labels more than one leaf")]
    DuplicateVariable(Var),
    #[error("node {0} is referenced by more than one parent")]
    NotATree(NodeId),
    #[error("empty formula")]
    Empty,
}

/// A binary arithmetic formula over named variables and field constants.
///
/// `nodes` is in topological order (children before parents) and `root` is
/// the final node. The variable universe is the sorted list of distinct leaf
/// variables; generators that want unused variables in the universe can widen
/// it with [`Formula::with_universe`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    nodes: Vec<Node>,
    root: NodeId,
    universe: Vec<Var>,
}

impl Formula {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id as usize]
    }

    /// Ordered list of distinct variables. Partitions must be total on this.
    pub fn universe(&self) -> &[Var] {
        &self.universe
    }

    pub fn leaf_var_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Var(_))).count()
    }

    /// Replaces the universe, e.g. to include variables that do not occur.
    pub fn with_universe(mut self, universe: Vec<Var>) -> Formula {
        let mut u = universe;
        u.sort_unstable();
        u.dedup();
        for n in &self.nodes {
            if let Node::Var(v) = n {
                debug_assert!(u.binary_search(v).is_ok(), "universe must cover all leaves");
            }
        }
        self.universe = u;
        self
    }

    /// Errors with the first variable labelling two or more leaves.
    pub fn validate_read_once(&self) -> Result<(), FormulaError> {
        let mut seen = HashMap::new();
        for n in &self.nodes {
            if let Node::Var(v) = n {
                if *seen.entry(*v).or_insert(0u32) == 1 {
                    return Err(FormulaError::DuplicateVariable(*v));
                }
                *seen.get_mut(v).unwrap() = 1;
            }
        }
        Ok(())
    }

    /// Post-order node ids (children before the node itself).
    pub fn postorder(&self) -> Vec<NodeId> {
        // nodes are already topological; order within is fine for folds
        (0..self.nodes.len() as NodeId).collect()
    }

    /// Evaluates the formula at a point.
    pub fn eval(&self, field: Field, point: &dyn Fn(Var) -> u64) -> u64 {
        let mut val = vec![0u64; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            val[i] = match *n {
                Node::Var(v) => point(v) % field.prime(),
                Node::Const(c) => c % field.prime(),
                Node::Add(l, r) => field.add(val[l as usize], val[r as usize]),
                Node::Mul(l, r) => field.mul(val[l as usize], val[r as usize]),
            };
        }
        val[self.root as usize]
    }

    /// Folds every gate whose two children are constants, repeatedly, so the
    /// result is constant-minimal. The computed polynomial is unchanged.
    pub fn normalize_constant_minimal(&self, field: Field) -> Formula {
        let mut b = FormulaBuilder::new();
        let mut out: Vec<NodeId> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let id = match *n {
                Node::Var(v) => b.var(v),
                Node::Const(c) => b.constant(c % field.prime()),
                Node::Add(l, r) | Node::Mul(l, r) => {
                    let (lc, rc) = (out[l as usize], out[r as usize]);
                    let is_add = matches!(n, Node::Add(..));
                    match (b.nodes[lc as usize], b.nodes[rc as usize]) {
                        (Node::Const(a), Node::Const(c)) => {
                            let v = if is_add { field.add(a, c) } else { field.mul(a, c) };
                            b.constant(v)
                        }
                        _ if is_add => b.add(lc, rc),
                        _ => b.mul(lc, rc),
                    }
                }
            };
            out.push(id);
        }
        let mut f = b.finish(out[self.root as usize]).expect("rebuild is a tree");
        f.universe = self.universe.clone();
        f
    }

    /// Fully parenthesized binary text form.
    pub fn to_text(&self) -> String {
        // iterative rendering; chains can be thousands of nodes deep
        let mut rendered: Vec<Option<String>> = vec![None; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            rendered[i] = Some(match *n {
                Node::Var(v) => v.to_string(),
                Node::Const(c) => c.to_string(),
                Node::Add(l, r) => format!(
                    "(+ {} {})",
                    rendered[l as usize].as_ref().unwrap(),
                    rendered[r as usize].as_ref().unwrap()
                ),
                Node::Mul(l, r) => format!(
                    "(* {} {})",
                    rendered[l as usize].as_ref().unwrap(),
                    rendered[r as usize].as_ref().unwrap()
                ),
            });
        }
        rendered[self.root as usize].take().unwrap()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Arena builder; `finish` checks the node graph really is a tree.
#[derive(Debug, Default)]
pub struct FormulaBuilder {
    nodes: Vec<Node>,
}

impl FormulaBuilder {
    pub fn new() -> Self {
        FormulaBuilder { nodes: Vec::new() }
    }

    fn push(&mut self, n: Node) -> NodeId {
        self.nodes.push(n);
        (self.nodes.len() - 1) as NodeId
    }

    pub fn var(&mut self, v: Var) -> NodeId {
        self.push(Node::Var(v))
    }

    pub fn x(&mut self, index: u32) -> NodeId {
        self.push(Node::Var(Var::X(VarId::Plain(index))))
    }

    pub fn constant(&mut self, c: u64) -> NodeId {
        self.push(Node::Const(c))
    }

    pub fn add(&mut self, l: NodeId, r: NodeId) -> NodeId {
        self.push(Node::Add(l, r))
    }

    pub fn mul(&mut self, l: NodeId, r: NodeId) -> NodeId {
        self.push(Node::Mul(l, r))
    }

    /// Right-fold a list into a binary chain: `[a, b, c]` becomes `a op (b op c)`.
    pub fn fold_right(&mut self, op: GateOp, items: &[NodeId]) -> NodeId {
        assert!(!items.is_empty());
        let mut acc = *items.last().unwrap();
        for &it in items[..items.len() - 1].iter().rev() {
            acc = match op {
                GateOp::Add => self.add(it, acc),
                GateOp::Mul => self.mul(it, acc),
            };
        }
        acc
    }

    pub fn finish(self, root: NodeId) -> Result<Formula, FormulaError> {
        if self.nodes.is_empty() {
            return Err(FormulaError::Empty);
        }
        let mut parents = vec![0u8; self.nodes.len()];
        for n in &self.nodes {
            if let Node::Add(l, r) | Node::Mul(l, r) = n {
                for c in [*l, *r] {
                    if parents[c as usize] == 1 {
                        return Err(FormulaError::NotATree(c));
                    }
                    parents[c as usize] = 1;
                }
            }
        }
        // keep reachable nodes only, preserving topological order
        let mut live = vec![false; self.nodes.len()];
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if live[id as usize] {
                continue;
            }
            live[id as usize] = true;
            if let Node::Add(l, r) | Node::Mul(l, r) = self.nodes[id as usize] {
                stack.push(l);
                stack.push(r);
            }
        }
        let mut remap = vec![u32::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        let mut universe = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if !live[i] {
                continue;
            }
            let n = match *n {
                Node::Add(l, r) => Node::Add(remap[l as usize], remap[r as usize]),
                Node::Mul(l, r) => Node::Mul(remap[l as usize], remap[r as usize]),
                other => other,
            };
            if let Node::Var(v) = n {
                universe.push(v);
            }
            remap[i] = nodes.len() as u32;
            nodes.push(n);
        }
        universe.sort_unstable();
        universe.dedup();
        Ok(Formula { nodes, root: remap[root as usize], universe })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateOp {
    Add,
    Mul,
}

// ---------------------------------------------------------------------------
// text format
// ---------------------------------------------------------------------------

/// Parses the S-expression formula grammar:
/// `expr := var | const | "(" op expr+ ")"` with `op` one of `+`/`*`,
/// `var := x<digits> | x<digits>_<digits> | y<digits> | z<digits>`,
/// `const := decimal integer` (reduced mod the field prime, sign allowed).
/// Wide gates fold to the right into binary gates.
pub fn parse_formula(text: &str, field: Field) -> Result<Formula, FormulaError> {
    Parser { text, pos: 0, line: 1, col: 1, field, builder: FormulaBuilder::new() }.run()
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    col: usize,
    field: Field,
    builder: FormulaBuilder,
}

impl<'a> Parser<'a> {
    fn run(mut self) -> Result<Formula, FormulaError> {
        self.skip_ws();
        let root = self.expr()?;
        self.skip_ws();
        if self.pos != self.text.len() {
            return Err(self.err("trailing input after formula"));
        }
        self.builder.finish(root)
    }

    fn err(&self, msg: &str) -> FormulaError {
        FormulaError::Parse { line: self.line, col: self.col, msg: msg.to_string() }
    }

    fn peek(&self) -> Option<u8> {
        self.text.as_bytes().get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.bump();
        }
    }

    fn expr(&mut self) -> Result<NodeId, FormulaError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => self.gate(),
            Some(b'x' | b'y' | b'z') => self.variable(),
            Some(c) if c == b'-' || c.is_ascii_digit() => self.number(),
            Some(c) => Err(self.err(&format!("unexpected character '{}'", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn gate(&mut self) -> Result<NodeId, FormulaError> {
        self.bump(); // '('
        self.skip_ws();
        let op = match self.bump() {
            Some(b'+') => GateOp::Add,
            Some(b'*') => GateOp::Mul,
            _ => return Err(self.err("expected '+' or '*' after '('")),
        };
        let mut args = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b')') => {
                    self.bump();
                    break;
                }
                None => return Err(self.err("unclosed '('")),
                _ => args.push(self.expr()?),
            }
        }
        if args.is_empty() {
            return Err(self.err("gate needs at least one argument"));
        }
        Ok(self.builder.fold_right(op, &args))
    }

    fn digits(&mut self) -> Result<u64, FormulaError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if self.pos == start {
            return Err(self.err("expected digits"));
        }
        self.text[start..self.pos]
            .parse::<u64>()
            .map_err(|_| self.err("integer literal out of range"))
    }

    fn variable(&mut self) -> Result<NodeId, FormulaError> {
        let kind = self.bump().unwrap();
        let first = self.digits()?;
        let v = match kind {
            b'x' => {
                if self.peek() == Some(b'_') {
                    self.bump();
                    let second = self.digits()?;
                    if first > u16::MAX as u64 || second > u16::MAX as u64 {
                        return Err(self.err("grid index out of range"));
                    }
                    Var::X(VarId::Grid(first as u16, second as u16))
                } else {
                    if first > u32::MAX as u64 {
                        return Err(self.err("variable index out of range"));
                    }
                    Var::X(VarId::Plain(first as u32))
                }
            }
            b'y' | b'z' => {
                if first > u32::MAX as u64 {
                    return Err(self.err("variable index out of range"));
                }
                if kind == b'y' {
                    Var::Y(first as u32)
                } else {
                    Var::Z(first as u32)
                }
            }
            _ => unreachable!(),
        };
        Ok(self.builder.var(v))
    }

    fn number(&mut self) -> Result<NodeId, FormulaError> {
        let neg = self.peek() == Some(b'-');
        if neg {
            self.bump();
        }
        let mag = self.digits()?;
        let c = if neg {
            self.field.neg(self.field.from_u64(mag))
        } else {
            self.field.from_u64(mag)
        };
        Ok(self.builder.constant(c))
    }
}

// ---------------------------------------------------------------------------
// gate census and s_F
// ---------------------------------------------------------------------------

/// Counts of the four gate shapes with a variable child.
///
/// For a read-once formula without constants in which every universe variable
/// occurs, `2a + 2b + c + d` equals the number of variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GateCensus {
    /// sum gates with two variable children
    pub a: usize,
    /// product gates with two variable children
    pub b: usize,
    /// sum gates with exactly one variable child
    pub c: usize,
    /// product gates with exactly one variable child
    pub d: usize,
    /// total variable leaves
    pub var_leaves: usize,
}

impl GateCensus {
    pub fn identity_holds(&self) -> bool {
        2 * self.a + 2 * self.b + self.c + self.d == self.var_leaves
    }
}

/// Classifies every gate with at least one variable child as type A/B/C/D.
pub fn classify_gates(f: &Formula) -> GateCensus {
    let mut census = GateCensus::default();
    census.var_leaves = f.leaf_var_count();
    for n in f.nodes() {
        if let Node::Add(l, r) | Node::Mul(l, r) = *n {
            let vars = [l, r]
                .iter()
                .filter(|&&c| matches!(f.node(c), Node::Var(_)))
                .count();
            let is_add = matches!(n, Node::Add(..));
            match (is_add, vars) {
                (true, 2) => census.a += 1,
                (false, 2) => census.b += 1,
                (true, 1) => census.c += 1,
                (false, 1) => census.d += 1,
                _ => {}
            }
        }
    }
    census
}

/// The type-A gates of a formula, as pairs of variable children.
pub fn type_a_gates(f: &Formula) -> Vec<(Var, Var)> {
    let mut out = Vec::new();
    for n in f.nodes() {
        if let Node::Add(l, r) = *n {
            if let (Node::Var(a), Node::Var(b)) = (f.node(l), f.node(r)) {
                out.push((a, b));
            }
        }
    }
    out
}

/// `s_F`: the maximum, over `+` gates outside the top sum layer, of the number
/// of variable leaves in the gate's subformula whose parent is a `+` gate.
/// Returns 0 when no eligible gate exists.
pub fn sum_fanin_measure(f: &Formula) -> usize {
    let n = f.nodes().len();
    // vars-with-+-parent count per subtree, bottom-up
    let mut cnt = vec![0usize; n];
    for (i, node) in f.nodes().iter().enumerate() {
        if let Node::Add(l, r) | Node::Mul(l, r) = *node {
            let mut c = cnt[l as usize] + cnt[r as usize];
            if matches!(node, Node::Add(..)) {
                for ch in [l, r] {
                    if matches!(f.node(ch), Node::Var(_)) {
                        c += 1;
                    }
                }
            }
            cnt[i] = c;
        }
    }
    // the top layer is the maximal +-connected component containing the root
    let mut top = vec![false; n];
    let mut stack = Vec::new();
    if matches!(f.node(f.root()), Node::Add(..)) {
        stack.push(f.root());
    }
    while let Some(id) = stack.pop() {
        if top[id as usize] {
            continue;
        }
        top[id as usize] = true;
        if let Node::Add(l, r) = f.node(id) {
            for ch in [l, r] {
                if matches!(f.node(ch), Node::Add(..)) {
                    stack.push(ch);
                }
            }
        }
    }
    f.nodes()
        .iter()
        .enumerate()
        .filter(|(i, node)| matches!(node, Node::Add(..)) && !top[*i])
        .map(|(i, _)| cnt[i])
        .max()
        .unwrap_or(0)
}

// ---------------------------------------------------------------------------
// generators
// ---------------------------------------------------------------------------

/// Configuration for the recursive-split read-once generator.
#[derive(Debug, Clone, Copy)]
pub struct RofGenConfig {
    pub num_vars: usize,
    /// probability, per subtree, of attaching a random constant via a random gate
    pub constant_prob: f64,
}

/// Random read-once formula: the (shuffled) variable set is split recursively,
/// gate types chosen uniformly. Read-once holds by construction.
pub fn random_rof<R: Rng>(cfg: RofGenConfig, field: Field, rng: &mut R) -> Formula {
    assert!(cfg.num_vars >= 1);
    let mut vars: Vec<u32> = (1..=cfg.num_vars as u32).collect();
    vars.shuffle(rng);
    let mut b = FormulaBuilder::new();
    // explicit stack of (range, slot) to avoid recursion on deep splits
    enum Task {
        Build(usize, usize),
        Join(GateOp),
        Wrap(GateOp, u64),
    }
    let mut tasks = vec![Task::Build(0, cfg.num_vars)];
    let mut out: Vec<NodeId> = Vec::new();
    while let Some(t) = tasks.pop() {
        match t {
            Task::Build(lo, hi) => {
                let wrap = cfg.constant_prob > 0.0 && rng.gen_bool(cfg.constant_prob);
                if wrap {
                    let op = if rng.gen_bool(0.5) { GateOp::Add } else { GateOp::Mul };
                    let c = field.rand_nonzero(rng);
                    tasks.push(Task::Wrap(op, c));
                }
                if hi - lo == 1 {
                    out.push(b.x(vars[lo]));
                } else {
                    let s = lo + 1 + rng.gen_range(0..hi - lo - 1);
                    let op = if rng.gen_bool(0.5) { GateOp::Add } else { GateOp::Mul };
                    tasks.push(Task::Join(op));
                    tasks.push(Task::Build(s, hi));
                    tasks.push(Task::Build(lo, s));
                }
            }
            Task::Join(op) => {
                let r = out.pop().unwrap();
                let l = out.pop().unwrap();
                out.push(match op {
                    GateOp::Add => b.add(l, r),
                    GateOp::Mul => b.mul(l, r),
                });
            }
            Task::Wrap(op, c) => {
                let inner = out.pop().unwrap();
                let k = b.constant(c);
                out.push(match op {
                    GateOp::Add => b.add(inner, k),
                    GateOp::Mul => b.mul(inner, k),
                });
            }
        }
    }
    debug_assert_eq!(out.len(), 1);
    b.finish(out[0]).expect("generator builds a tree")
}

/// Read-once formula with exactly `a` type-A gates and no other gates with
/// variable children: `a` disjoint pairs `(x_i + x_j)` combined by a random
/// binary tree of sum/product gates over internal children.
pub fn rof_with_type_a_pairs<R: Rng>(a: usize, rng: &mut R) -> Formula {
    assert!(a >= 1);
    let mut vars: Vec<u32> = (1..=2 * a as u32).collect();
    vars.shuffle(rng);
    let mut b = FormulaBuilder::new();
    let mut roots: Vec<NodeId> = vars
        .chunks(2)
        .map(|pair| {
            let l = b.x(pair[0]);
            let r = b.x(pair[1]);
            b.add(l, r)
        })
        .collect();
    while roots.len() > 1 {
        let i = rng.gen_range(0..roots.len());
        let x = roots.swap_remove(i);
        let j = rng.gen_range(0..roots.len());
        let y = roots.swap_remove(j);
        let joined = if rng.gen_bool(0.5) { b.add(x, y) } else { b.mul(x, y) };
        roots.push(joined);
    }
    b.finish(roots[0]).expect("generator builds a tree")
}

/// Configuration for sum-of-products-of-linear-forms formulas, the shape whose
/// `s_F` equals its maximum form width.
#[derive(Debug, Clone, Copy)]
pub struct SpsGenConfig {
    pub num_vars: usize,
    pub min_width: usize,
    pub max_width: usize,
    /// number of variable-disjoint products under the top sum
    pub top_fanin: usize,
    /// probability that a form carries a trailing `+ 1`
    pub plus_one_prob: f64,
}

/// Random sum of products of variable-disjoint linear forms. Every `+` gate
/// outside the top layer lives inside one form, so `s_F <= max_width`.
pub fn random_sps_rof<R: Rng>(cfg: SpsGenConfig, rng: &mut R) -> Formula {
    assert!(cfg.min_width >= 1 && cfg.min_width <= cfg.max_width);
    assert!(cfg.top_fanin >= 1 && cfg.num_vars >= cfg.top_fanin);
    let mut vars: Vec<u32> = (1..=cfg.num_vars as u32).collect();
    vars.shuffle(rng);
    // split variables into top_fanin contiguous chunks of similar size
    let mut b = FormulaBuilder::new();
    let mut products: Vec<NodeId> = Vec::new();
    let chunk = cfg.num_vars / cfg.top_fanin;
    let mut rest = cfg.num_vars % cfg.top_fanin;
    let mut pos = 0usize;
    for _ in 0..cfg.top_fanin {
        let mut take = chunk;
        if rest > 0 {
            take += 1;
            rest -= 1;
        }
        let slice = &vars[pos..pos + take];
        pos += take;
        let mut forms: Vec<NodeId> = Vec::new();
        let mut i = 0usize;
        while i < slice.len() {
            let remain = slice.len() - i;
            let mut w = rng.gen_range(cfg.min_width..=cfg.max_width).min(remain);
            // avoid a trailing form below min_width when possible
            if remain - w != 0 && remain - w < cfg.min_width && remain >= cfg.min_width {
                w = remain;
            }
            let leaves: Vec<NodeId> = slice[i..i + w].iter().map(|&v| b.x(v)).collect();
            i += w;
            let mut items = leaves;
            if cfg.plus_one_prob > 0.0 && rng.gen_bool(cfg.plus_one_prob) {
                items.push(b.constant(1));
            }
            forms.push(b.fold_right(GateOp::Add, &items));
        }
        products.push(b.fold_right(GateOp::Mul, &forms));
    }
    let root = b.fold_right(GateOp::Add, &products);
    b.finish(root).expect("generator builds a tree")
}
