//! Core syntax tree: terms, atoms, rules, and whole programs.
//!
//! Display impls render the same surface syntax the parser accepts, so
//! `parse -> to_string -> parse` is a fixpoint on the structure.

use std::collections::BTreeMap;
use std::fmt;

/// One argument position of an atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Variable(String),
    Constant(i64),
    /// `_`: matches anything, binds nothing. Never legal in a head.
    Placeholder,
}

impl Term {
    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Variable(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Variable(v) => write!(f, "{v}"),
            Term::Constant(c) => write!(f, "{c}"),
            Term::Placeholder => write!(f, "_"),
        }
    }
}

/// A relation occurrence `rel(t1, ..., tk)`, possibly negated in a body.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub relation: String,
    pub terms: Vec<Term>,
    pub negated: bool,
}

impl Atom {
    pub fn positive(relation: impl Into<String>, terms: Vec<Term>) -> Self {
        Atom { relation: relation.into(), terms, negated: false }
    }

    /// Distinct variables in term order; placeholders excluded.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        for t in &self.terms {
            if let Term::Variable(v) = t {
                if !out.iter().any(|o| o == v) {
                    out.push(v.clone());
                }
            }
        }
        out
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "!")?;
        }
        write!(f, "{}(", self.relation)?;
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AggregateFunc {
    Min,
    Max,
    Count,
    Sum,
}

impl AggregateFunc {
    pub fn name(self) -> &'static str {
        match self {
            AggregateFunc::Min => "MIN",
            AggregateFunc::Max => "MAX",
            AggregateFunc::Count => "COUNT",
            AggregateFunc::Sum => "SUM",
        }
    }

    /// MIN/MAX fold into lattice storage and may recurse; COUNT/SUM may not.
    pub fn is_lattice(self) -> bool {
        matches!(self, AggregateFunc::Min | AggregateFunc::Max)
    }
}

/// Argument of an aggregate: a variable, a constant (seed rules like
/// `MIN(0)`), or a small additive expression (`d + w`, `d + 1`), enough to
/// express weighted path costs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AggExpr {
    Var(String),
    Const(i64),
    AddVar(String, String),
    AddConst(String, i64),
}

impl AggExpr {
    pub fn variables(&self) -> Vec<&str> {
        match self {
            AggExpr::Var(v) | AggExpr::AddConst(v, _) => vec![v],
            AggExpr::AddVar(a, b) => vec![a, b],
            AggExpr::Const(_) => Vec::new(),
        }
    }
}

impl fmt::Display for AggExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AggExpr::Var(v) => write!(f, "{v}"),
            AggExpr::Const(c) => write!(f, "{c}"),
            AggExpr::AddVar(a, b) => write!(f, "{a} + {b}"),
            AggExpr::AddConst(a, c) => write!(f, "{a} + {c}"),
        }
    }
}

/// Head aggregate, always occupying the final head column.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AggregateSpec {
    pub func: AggregateFunc,
    pub over: AggExpr,
}

impl AggregateSpec {
    /// Head column index the aggregate value lands in.
    pub fn position(&self, rule: &Rule) -> usize {
        rule.head.terms.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn eval(self, l: i64, r: i64) -> bool {
        match self {
            CmpOp::Eq => l == r,
            CmpOp::Ne => l != r,
            CmpOp::Lt => l < r,
            CmpOp::Le => l <= r,
            CmpOp::Gt => l > r,
            CmpOp::Ge => l >= r,
        }
    }

    /// The comparison that holds when the operands swap sides.
    pub fn flipped(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Eq,
            CmpOp::Ne => CmpOp::Ne,
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
        }
    }
}

/// Comparison between two body terms; at least one side is a variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub left: Term,
    pub op: CmpOp,
    pub right: Term,
}

impl Constraint {
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        if let Term::Variable(v) = &self.left {
            out.push(v.as_str());
        }
        if let Term::Variable(v) = &self.right {
            if !out.contains(&v.as_str()) {
                out.push(v.as_str());
            }
        }
        out
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.left, self.op.symbol(), self.right)
    }
}

/// `head :- body.`  `head.terms` holds the group columns only when an
/// aggregate is present; the aggregate value is the implicit last column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: usize,
    pub head: Atom,
    pub aggregate: Option<AggregateSpec>,
    pub body: Vec<Atom>,
    pub constraints: Vec<Constraint>,
}

impl Rule {
    pub fn head_arity(&self) -> usize {
        self.head.terms.len() + usize::from(self.aggregate.is_some())
    }

    pub fn positive_atoms(&self) -> impl Iterator<Item = (usize, &Atom)> {
        self.body.iter().enumerate().filter(|(_, a)| !a.negated)
    }

    pub fn negated_atoms(&self) -> impl Iterator<Item = (usize, &Atom)> {
        self.body.iter().enumerate().filter(|(_, a)| a.negated)
    }

    /// A rule is recursive in its stratum context; syntactic self-reference
    /// is the degenerate case used before stratification exists.
    pub fn references(&self, relation: &str) -> bool {
        self.body.iter().any(|a| a.relation == relation)
    }

    /// Distinct variables of positive atoms, by first occurrence.
    pub fn positive_var_order(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (_, atom) in self.positive_atoms() {
            for t in &atom.terms {
                if let Term::Variable(v) = t {
                    if !out.iter().any(|o| o == v) {
                        out.push(v.clone());
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.head.relation)?;
        for (i, t) in self.head.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{t}")?;
        }
        if let Some(agg) = &self.aggregate {
            if !self.head.terms.is_empty() {
                write!(f, ", ")?;
            }
            write!(f, "{}({})", agg.func.name(), agg.over)?;
        }
        write!(f, ") :- ")?;
        let mut first = true;
        for atom in &self.body {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{atom}")?;
        }
        for c in &self.constraints {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{c}")?;
        }
        write!(f, ".")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationKind {
    /// Base relation: never a rule head, may be loaded from a fact file.
    Edb,
    /// Derived relation: head of at least one rule.
    Idb,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationInfo {
    pub arity: usize,
    pub kind: RelationKind,
    /// Declared parameter names, for diagnostics and unparse.
    pub params: Vec<String>,
    pub is_input: bool,
    /// Set when every defining rule carries this head aggregate.
    pub aggregate: Option<AggregateFunc>,
}

/// A validated program: declarations, rules in listing order, IO markers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub relations: BTreeMap<String, RelationInfo>,
    pub rules: Vec<Rule>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl Program {
    pub fn relation(&self, name: &str) -> &RelationInfo {
        &self.relations[name]
    }

    pub fn rules_defining<'a>(&'a self, relation: &'a str) -> impl Iterator<Item = &'a Rule> {
        self.rules.iter().filter(move |r| r.head.relation == relation)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, info) in &self.relations {
            write!(f, ".decl {name}(")?;
            for (i, p) in info.params.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{p}:number")?;
            }
            writeln!(f, ")")?;
        }
        for name in &self.inputs {
            writeln!(f, ".input {name}")?;
        }
        for name in &self.outputs {
            writeln!(f, ".output {name}")?;
        }
        for rule in &self.rules {
            writeln!(f, "{rule}")?;
        }
        Ok(())
    }
}
