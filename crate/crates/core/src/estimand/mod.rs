//! Symbolic probability expressions over observed variables.
//!
//! An [`Estimand`] is a tree of conditional probabilities combined by sums,
//! products and quotients. Each variable slot inside a probability term
//! either stays free (the slot ranges over the variable's outcome values) or
//! refers to a value symbol. Value symbols are introduced by [`Estimand::Marginal`]
//! and [`Estimand::Fix`] binders and resolve lexically to the nearest
//! enclosing binder with the same symbol name; symbols bound nowhere are the
//! query's treatment symbols, whose values come from the caller.

mod compare;
mod eval;
mod table;
mod text;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use compare::{estimands_equal_numerically, JointSampler, UnrestrictedJoints};
pub use eval::{evaluate, Evaluation};
pub use table::{Assignment, JointTable, NORMALIZATION_TOLERANCE};
pub use text::{parse_estimand, print_estimand};

pub(crate) use table::{for_each_assignment, strides};

/// Sup-norm tolerance for equality of distributions.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimandError {
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("conditioning event has zero probability in {node} at {assignment}")]
    ZeroProbability { node: String, assignment: String },
    #[error("unbound symbol {0}")]
    UnboundSymbol(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("variable {0} appears twice")]
    DuplicateVariable(String),
    #[error("symbol {0} is bound twice on one path")]
    DoubleBinding(String),
    #[error("value {value} out of range for {variable} (cardinality {cardinality})")]
    ValueOutOfRange {
        variable: String,
        value: usize,
        cardinality: usize,
    },
    #[error("probability term without targets")]
    EmptyTargets,
    #[error("invalid table: {0}")]
    Table(String),
    #[error("estimands disagree on {0}")]
    Mismatch(String),
}

/// What a variable slot in a probability term is evaluated at.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    /// The slot ranges over the variable's outcome values.
    Free,
    /// The slot takes the value bound to this symbol.
    Symbol(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub var: String,
    pub value: Value,
}

impl Slot {
    pub fn free(var: impl Into<String>) -> Self {
        Self {
            var: var.into(),
            value: Value::Free,
        }
    }

    pub fn symbol(var: impl Into<String>, symbol: impl Into<String>) -> Self {
        Self {
            var: var.into(),
            value: Value::Symbol(symbol.into()),
        }
    }
}

/// Introduces a value symbol for a variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Binder {
    pub var: String,
    pub symbol: String,
}

impl Binder {
    pub fn new(var: impl Into<String>, symbol: impl Into<String>) -> Self {
        Self {
            var: var.into(),
            symbol: symbol.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Estimand {
    /// `p(targets | given)` of the observational distribution.
    Conditional { targets: Vec<Slot>, given: Vec<Slot> },
    /// Sum of `body` over every value of the bound symbols.
    Marginal { sum_over: Vec<Binder>, body: Box<Estimand> },
    /// Product of factors; the empty product is 1.
    Product(Vec<Estimand>),
    Quotient {
        numerator: Box<Estimand>,
        denominator: Box<Estimand>,
    },
    /// Binds `binder.symbol` to the caller-supplied value of `binder.var`.
    Fix { binder: Binder, body: Box<Estimand> },
}

impl Estimand {
    pub fn p(targets: Vec<Slot>, given: Vec<Slot>) -> Self {
        Estimand::Conditional { targets, given }
    }

    /// A marginal; an empty binder list returns `body` unchanged.
    pub fn sum(sum_over: Vec<Binder>, body: Estimand) -> Self {
        if sum_over.is_empty() {
            body
        } else {
            Estimand::Marginal {
                sum_over,
                body: Box::new(body),
            }
        }
    }

    /// A flattened product; a single factor is returned as is.
    pub fn product(factors: impl IntoIterator<Item = Estimand>) -> Self {
        let mut flat = Vec::new();
        for f in factors {
            match f {
                Estimand::Product(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Estimand::Product(flat)
        }
    }

    pub fn quotient(numerator: Estimand, denominator: Estimand) -> Self {
        Estimand::Quotient {
            numerator: Box::new(numerator),
            denominator: Box::new(denominator),
        }
    }

    pub fn fix(binder: Binder, body: Estimand) -> Self {
        Estimand::Fix {
            binder,
            body: Box::new(body),
        }
    }

    /// Variables in free slots, sorted by name.
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk_slots(&mut |slot, _| {
            if slot.value == Value::Free {
                out.insert(slot.var.clone());
            }
        });
        out
    }

    /// Symbols not bound by any enclosing binder, with their variables.
    pub fn free_symbols(&self) -> BTreeSet<(String, String)> {
        let mut out = BTreeSet::new();
        self.walk_slots(&mut |slot, bound| {
            if let Value::Symbol(s) = &slot.value {
                if !bound.iter().any(|b| &b.symbol == s) {
                    out.insert((slot.var.clone(), s.clone()));
                }
            }
        });
        out
    }

    /// Every variable mentioned in a slot or binder.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Estimand::Conditional { targets, given } => {
                out.extend(targets.iter().chain(given).map(|s| s.var.clone()));
            }
            Estimand::Marginal { sum_over, body } => {
                out.extend(sum_over.iter().map(|b| b.var.clone()));
                body.collect_variables(out);
            }
            Estimand::Product(fs) => fs.iter().for_each(|f| f.collect_variables(out)),
            Estimand::Quotient {
                numerator,
                denominator,
            } => {
                numerator.collect_variables(out);
                denominator.collect_variables(out);
            }
            Estimand::Fix { binder, body } => {
                out.insert(binder.var.clone());
                body.collect_variables(out);
            }
        }
    }

    /// Visits every slot together with the binders in scope (outermost first).
    fn walk_slots<'a>(&'a self, f: &mut impl FnMut(&'a Slot, &[&'a Binder])) {
        fn go<'a>(
            e: &'a Estimand,
            scope: &mut Vec<&'a Binder>,
            f: &mut impl FnMut(&'a Slot, &[&'a Binder]),
        ) {
            match e {
                Estimand::Conditional { targets, given } => {
                    for s in targets.iter().chain(given) {
                        f(s, scope);
                    }
                }
                Estimand::Marginal { sum_over, body } => {
                    let n = scope.len();
                    scope.extend(sum_over.iter());
                    go(body, scope, f);
                    scope.truncate(n);
                }
                Estimand::Fix { binder, body } => {
                    scope.push(binder);
                    go(body, scope, f);
                    scope.pop();
                }
                Estimand::Product(fs) => fs.iter().for_each(|x| go(x, scope, f)),
                Estimand::Quotient {
                    numerator,
                    denominator,
                } => {
                    go(numerator, scope, f);
                    go(denominator, scope, f);
                }
            }
        }
        go(self, &mut Vec::new(), f);
    }

    /// Checks the scoping invariants: no symbol bound twice on a path, no
    /// binder shadowing a free symbol, each symbol refers to a single
    /// variable, at most one free symbol per variable, and no variable twice
    /// in one probability term.
    pub fn validate(&self) -> Result<(), EstimandError> {
        let free = self.free_symbols();
        let mut free_vars: BTreeMap<&str, &str> = BTreeMap::new();
        for (var, sym) in &free {
            if let Some(prev) = free_vars.insert(var, sym) {
                return Err(EstimandError::UnboundSymbol(format!(
                    "{var} has free symbols {prev} and {sym}"
                )));
            }
        }
        let mut symbol_vars: BTreeMap<String, String> = BTreeMap::new();
        for (var, sym) in &free {
            if let Some(prev) = symbol_vars.insert(sym.clone(), var.clone()) {
                if &prev != var {
                    return Err(EstimandError::UnboundSymbol(format!(
                        "{sym} refers to both {prev} and {var}"
                    )));
                }
            }
        }
        let free_names: BTreeSet<&str> = free.iter().map(|(_, s)| s.as_str()).collect();
        self.validate_scope(&mut Vec::new(), &free_names)
    }

    fn validate_scope<'a>(
        &'a self,
        scope: &mut Vec<&'a Binder>,
        free: &BTreeSet<&str>,
    ) -> Result<(), EstimandError> {
        let bind = |scope: &mut Vec<&'a Binder>, b: &'a Binder| -> Result<(), EstimandError> {
            if free.contains(b.symbol.as_str()) || scope.iter().any(|s| s.symbol == b.symbol) {
                return Err(EstimandError::DoubleBinding(b.symbol.clone()));
            }
            scope.push(b);
            Ok(())
        };
        match self {
            Estimand::Conditional { targets, given } => {
                let mut seen = BTreeSet::new();
                for s in targets.iter().chain(given) {
                    if !seen.insert(&s.var) {
                        return Err(EstimandError::DuplicateVariable(s.var.clone()));
                    }
                    if let Value::Symbol(sym) = &s.value {
                        if let Some(b) = scope.iter().rev().find(|b| &b.symbol == sym) {
                            if b.var != s.var {
                                return Err(EstimandError::UnboundSymbol(format!(
                                    "{sym} is bound to {} but used for {}",
                                    b.var, s.var
                                )));
                            }
                        }
                    }
                }
                if targets.is_empty() {
                    return Err(EstimandError::EmptyTargets);
                }
                Ok(())
            }
            Estimand::Marginal { sum_over, body } => {
                let n = scope.len();
                for b in sum_over {
                    bind(scope, b)?;
                }
                body.validate_scope(scope, free)?;
                scope.truncate(n);
                Ok(())
            }
            Estimand::Fix { binder, body } => {
                bind(scope, binder)?;
                body.validate_scope(scope, free)?;
                scope.pop();
                Ok(())
            }
            Estimand::Product(fs) => fs.iter().try_for_each(|f| f.validate_scope(scope, free)),
            Estimand::Quotient {
                numerator,
                denominator,
            } => {
                numerator.validate_scope(scope, free)?;
                denominator.validate_scope(scope, free)
            }
        }
    }
}

impl fmt::Display for Estimand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_estimand(self))
    }
}

/// The default symbol for a variable: its lower-cased name.
pub fn default_symbol(var: &str) -> String {
    var.to_ascii_lowercase()
}
