//! The ID algorithm over ADMGs.
//!
//! The recursion builds an intermediate [`Term`] whose variables are scoped
//! lexically: a variable inside a `Sum` over it is the summation variable,
//! otherwise it takes whatever value the enclosing context gives it
//! (treatments of the current call). Lowering to an [`Estimand`] assigns
//! each `Sum` fresh value symbols.

use super::{IdentifyError, IdentifyResult, Query, Symbols};
use crate::estimand::{Binder, Estimand, Slot};
use crate::graph::{Admg, VertexSet};

#[derive(Debug, Clone)]
enum Term {
    /// Observational `p(targets | given)`.
    P { targets: Vec<usize>, given: Vec<usize> },
    Sum(Vec<usize>, Box<Term>),
    Prod(Vec<Term>),
    Quot(Box<Term>, Box<Term>),
}

impl Term {
    fn sum(vars: Vec<usize>, body: Term) -> Term {
        if vars.is_empty() {
            body
        } else {
            Term::Sum(vars, Box::new(body))
        }
    }

    fn unbound(&self, out: &mut VertexSet) {
        match self {
            Term::P { targets, given } => out.extend(targets.iter().chain(given)),
            Term::Sum(vars, body) => {
                let mut inner = VertexSet::new();
                body.unbound(&mut inner);
                out.extend(inner.into_iter().filter(|v| !vars.contains(v)));
            }
            Term::Prod(fs) => fs.iter().for_each(|f| f.unbound(out)),
            Term::Quot(n, d) => {
                n.unbound(out);
                d.unbound(out);
            }
        }
    }
}

/// The distribution a recursive call works on. Its domain is always the
/// current vertex set.
#[derive(Debug, Clone)]
enum Dist {
    /// Marginal of the observational joint.
    Observed,
    /// A normalized expression over the domain.
    Expr(Term),
}

struct Id<'a> {
    g: &'a Admg,
    order: Vec<usize>,
}

struct Failure {
    inner: VertexSet,
    outer: VertexSet,
}

impl Id<'_> {
    fn ordered(&self, set: &VertexSet) -> Vec<usize> {
        self.order.iter().copied().filter(|v| set.contains(v)).collect()
    }

    /// Marginal of `p` over `keep`.
    fn marginal(&self, p: &Dist, domain: &VertexSet, keep: &VertexSet) -> Term {
        match p {
            Dist::Observed => Term::P {
                targets: self.ordered(keep),
                given: vec![],
            },
            Dist::Expr(t) => Term::sum(self.ordered(&(domain - keep)), t.clone()),
        }
    }

    /// `p(v_i | v_1..v_{i-1})` in topological order of the domain.
    fn conditional(&self, p: &Dist, domain: &VertexSet, vi: usize) -> Term {
        let order = self.ordered(domain);
        let i = order.iter().position(|&v| v == vi).expect("vertex in domain");
        let prefix: VertexSet = order[..i].iter().copied().collect();
        match p {
            Dist::Observed => Term::P {
                targets: vec![vi],
                given: order[..i].to_vec(),
            },
            Dist::Expr(_) => {
                let mut upto = prefix.clone();
                upto.insert(vi);
                let numerator = self.marginal(p, domain, &upto);
                if prefix.is_empty() {
                    numerator
                } else {
                    Term::Quot(Box::new(numerator), Box::new(self.marginal(p, domain, &prefix)))
                }
            }
        }
    }

    fn id(&self, y: &VertexSet, x: &VertexSet, p: &Dist, v: &VertexSet) -> Result<Term, Failure> {
        // 1: no intervention left.
        if x.is_empty() {
            return Ok(self.marginal(p, v, y));
        }
        // 2: drop non-ancestors of the outcome.
        let an = self.g.ancestors_within(v, y);
        if &an != v {
            let p_an = match p {
                Dist::Observed => Dist::Observed,
                Dist::Expr(_) => Dist::Expr(self.marginal(p, v, &an)),
            };
            let x_an = x & &an;
            return self.id(y, &x_an, &p_an, &an);
        }
        // 3: intervene on vertices that cannot affect y once x is fixed.
        let cut = self.g.mutilate(x, &VertexSet::new());
        let w: VertexSet = &(v - x) - &cut.ancestors_within(v, y);
        if !w.is_empty() {
            let result = self.id(y, &(x | &w), p, v)?;
            // The result does not depend on w; average any leftover
            // occurrence against p(w) so it reads as a function of y and x.
            let mut free = VertexSet::new();
            result.unbound(&mut free);
            let used: VertexSet = &w & &free;
            if used.is_empty() {
                return Ok(result);
            }
            let weight = self.marginal(p, v, &used);
            return Ok(Term::sum(self.ordered(&used), Term::Prod(vec![result, weight])));
        }
        // 4: factorize over the districts of G \ X.
        let rest = v - x;
        let parts = self.g.districts_within(&rest);
        if parts.len() > 1 {
            let factors = parts
                .iter()
                .map(|s| self.id(s, &(v - s), p, v))
                .collect::<Result<Vec<_>, _>>()?;
            let bound = &rest - y;
            return Ok(Term::sum(self.ordered(&bound), Term::Prod(factors)));
        }
        let s = parts.into_iter().next().expect("non-empty outcome");
        let whole = self.g.districts_within(v);
        // 5: G is a single district.
        if whole.len() == 1 {
            return Err(Failure {
                inner: s,
                outer: v.clone(),
            });
        }
        // 6: s is itself a district of G.
        if whole.contains(&s) {
            let factors = self.ordered(&s).into_iter().map(|vi| self.conditional(p, v, vi)).collect();
            return Ok(Term::sum(self.ordered(&(&s - y)), Term::Prod(factors)));
        }
        // 7: recurse into the district containing s.
        let big = whole
            .into_iter()
            .find(|d| s.is_subset(d))
            .expect("districts of G \\ X nest in districts of G");
        let factors = self.ordered(&big).into_iter().map(|vi| self.conditional(p, v, vi)).collect();
        self.id(y, &(x & &big), &Dist::Expr(Term::Prod(factors)), &big)
    }
}

struct Lowering<'a> {
    g: &'a Admg,
    symbols: Symbols<'a>,
    /// Innermost binding last.
    scope: Vec<(usize, String)>,
    treatments: Vec<Option<String>>,
    outcomes: VertexSet,
}

impl Lowering<'_> {
    fn slot(&self, v: usize) -> Slot {
        let name = self.g.name(v);
        if let Some((_, sym)) = self.scope.iter().rev().find(|(u, _)| *u == v) {
            return Slot::symbol(name, sym.clone());
        }
        if let Some(sym) = &self.treatments[v] {
            return Slot::symbol(name, sym.clone());
        }
        debug_assert!(self.outcomes.contains(&v), "{name} is neither bound, treated nor an outcome");
        Slot::free(name)
    }

    fn lower(&mut self, t: &Term) -> Estimand {
        match t {
            Term::P { targets, given } => Estimand::p(
                targets.iter().map(|&v| self.slot(v)).collect(),
                given.iter().map(|&v| self.slot(v)).collect(),
            ),
            Term::Sum(vars, body) => {
                let depth = self.scope.len();
                let mut binders = Vec::new();
                for &v in vars {
                    let in_scope: Vec<String> = self.scope.iter().map(|(_, s)| s.clone()).collect();
                    let sym = self.symbols.fresh(self.g.name(v), &in_scope);
                    binders.push(Binder::new(self.g.name(v), sym.clone()));
                    self.scope.push((v, sym));
                }
                let body = self.lower(body);
                self.scope.truncate(depth);
                Estimand::sum(binders, body)
            }
            Term::Prod(fs) => Estimand::product(fs.iter().map(|f| self.lower(f))),
            Term::Quot(n, d) => Estimand::quotient(self.lower(n), self.lower(d)),
        }
    }
}

/// Runs the ID algorithm for `q` in `g`.
///
/// Districts are visited in order of their least member name, and ancestor
/// pruning precedes district factorization, so the output is a deterministic
/// function of the input graph and query.
pub fn id_algorithm(g: &Admg, q: &Query) -> Result<IdentifyResult, IdentifyError> {
    let (x, y) = q.resolve(g)?;
    let id = Id {
        g,
        order: g.topological_order(),
    };
    match id.id(&y, &x, &Dist::Observed, &g.all()) {
        Ok(term) => {
            let mut treatments = vec![None; g.len()];
            for t in &q.treatments {
                treatments[g.index_of(&t.var).expect("resolved")] = Some(t.symbol.clone());
            }
            let mut lowering = Lowering {
                g,
                symbols: Symbols::new(g, q),
                scope: Vec::new(),
                treatments,
                outcomes: y,
            };
            Ok(IdentifyResult::Estimand(lowering.lower(&term)))
        }
        Err(Failure { inner, outer }) => {
            let names = |s: &VertexSet| id.ordered(s).into_iter().map(|v| g.name(v).to_string()).collect();
            Ok(IdentifyResult::Hedge {
                inner: names(&inner),
                outer: names(&outer),
            })
        }
    }
}
