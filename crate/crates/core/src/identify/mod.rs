//! Identification of `p(Y(a))` from the observational distribution.
//!
//! [`id_algorithm`] is complete: it returns an estimand whenever the query is
//! identifiable in the ADMG and a hedge otherwise. [`backdoor_adjustment`] and
//! [`frontdoor`] search for the two classical closed forms.

mod criteria;
mod id;

use std::collections::{BTreeMap, BTreeSet};

use crate::estimand::{default_symbol, Estimand};
use crate::graph::{is_identifier, Admg, VertexSet};

pub use criteria::{backdoor_adjustment, frontdoor, instrument_candidates};
pub use id::id_algorithm;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IdentifyError {
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("{0} is both a treatment and an outcome")]
    Overlap(String),
    #[error("{0} is listed twice")]
    Duplicate(String),
    #[error("query has no outcome")]
    NoOutcome,
    #[error("invalid value symbol {0:?}")]
    InvalidSymbol(String),
    #[error("value symbol {0} is used twice")]
    DuplicateSymbol(String),
    #[error("value symbol {0} collides with a vertex name")]
    SymbolIsVertex(String),
    #[error("this criterion needs a single {0}")]
    NotSingle(&'static str),
}

/// A treatment variable with its value symbol and, optionally, a concrete
/// value for numeric checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Treatment {
    pub var: String,
    pub symbol: String,
    pub value: Option<usize>,
}

impl Treatment {
    /// Treatment with the default symbol, the lower-cased name.
    pub fn new(var: &str) -> Self {
        Self {
            var: var.to_string(),
            symbol: default_symbol(var),
            value: None,
        }
    }

    /// Parses `A`, `A=sym` or `A=1`.
    pub fn parse(spec: &str) -> Result<Self, IdentifyError> {
        let (var, rhs) = match spec.split_once('=') {
            Some((v, r)) => (v, Some(r)),
            None => (spec, None),
        };
        if !is_identifier(var) {
            return Err(IdentifyError::UnknownVariable(var.to_string()));
        }
        let mut t = Treatment::new(var);
        match rhs {
            None => {}
            Some(r) if !r.is_empty() && r.bytes().all(|b| b.is_ascii_digit()) => {
                t.value = Some(r.parse().map_err(|_| IdentifyError::InvalidSymbol(r.to_string()))?);
            }
            Some(r) => {
                if !is_symbol(r) {
                    return Err(IdentifyError::InvalidSymbol(r.to_string()));
                }
                t.symbol = r.to_string();
            }
        }
        Ok(t)
    }
}

/// An identifier followed by zero or more primes.
pub fn is_symbol(s: &str) -> bool {
    is_identifier(s.trim_end_matches('\''))
}

/// The interventional distribution `p(outcomes(treatments))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub treatments: Vec<Treatment>,
    pub outcomes: Vec<String>,
}

impl Query {
    /// Query with default symbols.
    pub fn new(treatments: &[&str], outcomes: &[&str]) -> Self {
        Self {
            treatments: treatments.iter().map(|t| Treatment::new(t)).collect(),
            outcomes: outcomes.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Checks the query against `g` and resolves it to vertex sets.
    pub fn resolve(&self, g: &Admg) -> Result<(VertexSet, VertexSet), IdentifyError> {
        if self.outcomes.is_empty() {
            return Err(IdentifyError::NoOutcome);
        }
        let lookup = |name: &str| g.index_of(name).ok_or_else(|| IdentifyError::UnknownVariable(name.to_string()));
        let mut x = VertexSet::new();
        let mut symbols = BTreeSet::new();
        for t in &self.treatments {
            if !x.insert(lookup(&t.var)?) {
                return Err(IdentifyError::Duplicate(t.var.clone()));
            }
            if !is_symbol(&t.symbol) {
                return Err(IdentifyError::InvalidSymbol(t.symbol.clone()));
            }
            if g.index_of(&t.symbol).is_some() {
                return Err(IdentifyError::SymbolIsVertex(t.symbol.clone()));
            }
            if !symbols.insert(t.symbol.as_str()) {
                return Err(IdentifyError::DuplicateSymbol(t.symbol.clone()));
            }
        }
        let mut y = VertexSet::new();
        for o in &self.outcomes {
            let v = lookup(o)?;
            if x.contains(&v) {
                return Err(IdentifyError::Overlap(o.clone()));
            }
            if !y.insert(v) {
                return Err(IdentifyError::Duplicate(o.clone()));
            }
        }
        Ok((x, y))
    }
}

/// Outcome of identification.
#[derive(Debug, Clone, PartialEq)]
pub enum IdentifyResult {
    Estimand(Estimand),
    /// Nested vertex sets witnessing non-identifiability; `inner` is a proper
    /// subset of `outer`, both in vertex order.
    Hedge { inner: Vec<String>, outer: Vec<String> },
}

impl IdentifyResult {
    pub fn estimand(&self) -> Option<&Estimand> {
        match self {
            IdentifyResult::Estimand(e) => Some(e),
            IdentifyResult::Hedge { .. } => None,
        }
    }
}

/// Hands out bound symbols: the lower-cased variable name plus as many primes
/// as needed so the symbol is not in scope, is not a treatment symbol or a
/// vertex name, and never stands for two different variables.
struct Symbols<'a> {
    g: &'a Admg,
    reserved: BTreeSet<String>,
    owner: BTreeMap<String, String>,
}

impl<'a> Symbols<'a> {
    fn new(g: &'a Admg, q: &Query) -> Self {
        let mut owner = BTreeMap::new();
        for t in &q.treatments {
            owner.insert(t.symbol.clone(), t.var.clone());
        }
        Self {
            g,
            reserved: q.treatments.iter().map(|t| t.symbol.clone()).collect(),
            owner,
        }
    }

    fn fresh(&mut self, var: &str, in_scope: &[String]) -> String {
        let mut sym = default_symbol(var);
        loop {
            let clash = self.reserved.contains(&sym)
                || in_scope.contains(&sym)
                || self.g.index_of(&sym).is_some()
                || self.owner.get(&sym).is_some_and(|v| v != var);
            if !clash {
                self.owner.insert(sym.clone(), var.to_string());
                return sym;
            }
            sym.push('\'');
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::graph::{Admg, LatentDag};

    pub(crate) fn fig1b() -> Admg {
        Admg::from_names(&["C", "A", "Y"], &[("C", "A"), ("C", "Y"), ("A", "Y")], &[]).unwrap()
    }

    pub(crate) fn fig1d() -> Admg {
        LatentDag::from_names(&["A", "W", "Y"], &["C"], &[("A", "W"), ("W", "Y"), ("C", "A"), ("C", "Y")])
            .unwrap()
            .project()
    }

    pub(crate) fn bow() -> Admg {
        Admg::from_names(&["A", "Y"], &[("A", "Y")], &[("A", "Y")]).unwrap()
    }

    #[test]
    fn treatment_specs() {
        assert_eq!(Treatment::parse("A").unwrap(), Treatment::new("A"));
        let t = Treatment::parse("A=a'").unwrap();
        assert_eq!((t.symbol.as_str(), t.value), ("a'", None));
        let t = Treatment::parse("A=1").unwrap();
        assert_eq!((t.symbol.as_str(), t.value), ("a", Some(1)));
        assert!(Treatment::parse("A=").is_err());
        assert!(Treatment::parse("A=x-y").is_err());
        assert!(Treatment::parse("1A").is_err());
    }

    #[test]
    fn query_validation() {
        let g = fig1b();
        assert!(Query::new(&["A"], &["Y"]).resolve(&g).is_ok());
        assert_eq!(Query::new(&["A"], &[]).resolve(&g), Err(IdentifyError::NoOutcome));
        assert_eq!(Query::new(&["A"], &["A"]).resolve(&g), Err(IdentifyError::Overlap("A".into())));
        assert_eq!(
            Query::new(&["Q"], &["Y"]).resolve(&g),
            Err(IdentifyError::UnknownVariable("Q".into()))
        );
        let mut q = Query::new(&["A", "C"], &["Y"]);
        q.treatments[1].symbol = "a".into();
        assert_eq!(q.resolve(&g), Err(IdentifyError::DuplicateSymbol("a".into())));
        q.treatments[1].symbol = "Y".into();
        assert_eq!(q.resolve(&g), Err(IdentifyError::SymbolIsVertex("Y".into())));
    }

    #[test]
    fn fresh_symbols_avoid_clashes() {
        let g = Admg::from_names(&["A", "AB", "Ab", "ab"], &[], &[]).unwrap();
        let q = Query::new(&["A"], &["AB"]);
        let mut s = Symbols::new(&g, &q);
        assert_eq!(s.fresh("A", &[]), "a'");
        // "ab" is a vertex name.
        assert_eq!(s.fresh("AB", &[]), "ab'");
        // "ab'" already stands for AB.
        assert_eq!(s.fresh("Ab", &[]), "ab''");
        assert_eq!(s.fresh("A", &["a'".into()]), "a''");
    }
}
