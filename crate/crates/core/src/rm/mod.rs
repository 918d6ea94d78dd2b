//! The reactive modules language.
//!
//! A system is a list of modules, each owning bounded integer variables and
//! guarded commands `[label] guard -> act1 + ... + actk;`. This module holds
//! the syntax tree; [`parse_system`] builds it from source text, `Display`
//! prints it back, [`successors`] gives the global step semantics and
//! [`flatten_module`] turns one module into an [`crate::Automaton`].

mod eval;
mod flatten;
mod lexer;
mod parser;
mod print;
mod semantics;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub(crate) use eval::eval_bool;
pub use eval::EvalError;
pub use flatten::{flatten_module, FlatModule, FlattenError, FlattenOptions, LetterPool, ReadView};
pub use parser::{parse_expr, parse_system};
pub use semantics::{successors, CommandChoice, GlobalState, StepAction};

/// Source position, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {}, column {}: {kind}", pos.line, pos.column)]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("initial value {init} of `{variable}` is outside [{low}..{high}]")]
    RangeViolation {
        variable: String,
        init: i64,
        low: i64,
        high: i64,
    },
    #[error("empty range [{low}..{high}] for `{variable}`")]
    EmptyRange {
        variable: String,
        low: i64,
        high: i64,
    },
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate module `{0}`")]
    DuplicateModule(String),
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("ambiguous variable `{0}` is declared in several modules")]
    AmbiguousVariable(String),
    #[error("`{variable}` is not a local variable of module `{module}`")]
    ForeignAssignment { variable: String, module: String },
    #[error("type error: {0}")]
    Type(String),
}

/// Global variable index, in declaration order across all modules.
pub type VarIndex = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Or => "|",
            BinaryOp::And => "&",
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(VarIndex),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Variables read by this expression.
    pub fn variables(&self, out: &mut BTreeSet<VarIndex>) {
        match self {
            Expr::Int(_) | Expr::Bool(_) => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Unary(_, e) => e.variables(out),
            Expr::Binary(_, l, r) => {
                l.variables(out);
                r.variables(out);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub low: i64,
    pub high: i64,
    pub init: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub var: VarIndex,
    pub value: Expr,
}

/// One `act_j` alternative: simultaneous assignments (empty for `true`).
pub type Action = Vec<Assignment>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Command {
    pub label: Option<String>,
    pub guard: Expr,
    /// The `act1 + ... + actk` alternatives; never empty.
    pub actions: Vec<Action>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Module {
    pub name: String,
    pub variables: Vec<Variable>,
    pub commands: Vec<Command>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleSystem {
    pub modules: Vec<Module>,
}

impl ModuleSystem {
    /// Labels appearing in any `[label]` field, sorted.
    pub fn sync_labels(&self) -> BTreeSet<String> {
        self.modules
            .iter()
            .flat_map(|m| m.commands.iter().filter_map(|c| c.label.clone()))
            .collect()
    }

    pub fn num_variables(&self) -> usize {
        self.modules.iter().map(|m| m.variables.len()).sum()
    }

    /// Global index of the first variable of module `m`.
    pub fn offset(&self, m: usize) -> VarIndex {
        self.modules[..m].iter().map(|m| m.variables.len()).sum()
    }

    /// The module owning global variable `v` and the variable itself.
    pub fn variable(&self, v: VarIndex) -> (usize, &Variable) {
        let mut rest = v;
        for (i, m) in self.modules.iter().enumerate() {
            if rest < m.variables.len() {
                return (i, &m.variables[rest]);
            }
            rest -= m.variables.len();
        }
        panic!("variable index {v} out of range")
    }

    pub fn module_index(&self, name: &str) -> Option<usize> {
        self.modules.iter().position(|m| m.name == name)
    }

    /// Global index of the variable called `name`, local names of `module`
    /// taking precedence.
    pub fn lookup(&self, name: &str, module: Option<usize>) -> Result<VarIndex, ParseErrorKind> {
        if let Some(m) = module {
            if let Some(i) = self.modules[m]
                .variables
                .iter()
                .position(|v| v.name == name)
            {
                return Ok(self.offset(m) + i);
            }
        }
        let mut found = None;
        for (mi, m) in self.modules.iter().enumerate() {
            if let Some(i) = m.variables.iter().position(|v| v.name == name) {
                if found.is_some() {
                    return Err(ParseErrorKind::AmbiguousVariable(name.to_string()));
                }
                found = Some(self.offset(mi) + i);
            }
        }
        found.ok_or_else(|| ParseErrorKind::UndeclaredVariable(name.to_string()))
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}
