//! Back-door and front-door criteria, searched exhaustively over subsets in
//! size-then-lexicographic order.

use super::{IdentifyError, Query, Symbols};
use crate::estimand::{Binder, Estimand, Slot};
use crate::graph::{Admg, VertexSet};

/// Subsets of `pool` ordered by size, then by sorted member names.
fn subsets(g: &Admg, pool: &VertexSet) -> Vec<VertexSet> {
    let items: Vec<usize> = pool.iter().copied().collect();
    let mut out: Vec<VertexSet> = (0u32..1 << items.len())
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect();
    let key = |s: &VertexSet| {
        let mut names: Vec<&str> = s.iter().map(|&v| g.name(v)).collect();
        names.sort_unstable();
        (s.len(), names)
    };
    out.sort_by_cached_key(|s| {
        let (n, names) = key(s);
        (n, names.into_iter().map(String::from).collect::<Vec<_>>())
    });
    out
}

fn single_treatment(q: &Query) -> Result<(), IdentifyError> {
    match q.treatments.len() {
        1 => Ok(()),
        _ => Err(IdentifyError::NotSingle("treatment")),
    }
}

/// Binders for `set` in vertex order with fresh symbols.
fn binders(g: &Admg, symbols: &mut Symbols, set: &VertexSet, in_scope: &mut Vec<String>) -> Vec<Binder> {
    set.iter()
        .map(|&v| {
            let sym = symbols.fresh(g.name(v), in_scope);
            in_scope.push(sym.clone());
            Binder::new(g.name(v), sym)
        })
        .collect()
}

fn bound_slots(bs: &[Binder]) -> Vec<Slot> {
    bs.iter().map(|b| Slot::symbol(&b.var, &b.symbol)).collect()
}

/// The smallest set `Z` of non-descendants of the treatment that blocks every
/// back-door path to the outcomes, with the adjustment estimand
/// `sum_{z} p(Y | a, z) p(z)`.
pub fn backdoor_adjustment(g: &Admg, q: &Query) -> Result<Option<(Vec<String>, Estimand)>, IdentifyError> {
    single_treatment(q)?;
    let (x, y) = q.resolve(g)?;
    let pool = &(&g.all() - &g.descendants(&x)) - &y;
    let cut = g.mutilate(&VertexSet::new(), &x);
    for z in subsets(g, &pool) {
        if !cut.m_separated(&x, &y, &z).expect("disjoint sets") {
            continue;
        }
        let t = &q.treatments[0];
        let mut symbols = Symbols::new(g, q);
        let bs = binders(g, &mut symbols, &z, &mut Vec::new());
        let targets: Vec<Slot> = y.iter().map(|&v| Slot::free(g.name(v))).collect();
        let mut given = vec![Slot::symbol(&t.var, &t.symbol)];
        given.extend(bound_slots(&bs));
        let mut factors = vec![Estimand::p(targets, given)];
        if !bs.is_empty() {
            factors.push(Estimand::p(bound_slots(&bs), vec![]));
        }
        let e = Estimand::sum(bs, Estimand::product(factors));
        return Ok(Some((g.names_of(&z), e)));
    }
    Ok(None)
}

/// The smallest non-empty mediator set `W` satisfying the front-door
/// conditions, with `sum_{w} p(w | a) sum_{a'} p(Y | w, a') p(a')`.
pub fn frontdoor(g: &Admg, q: &Query) -> Result<Option<Estimand>, IdentifyError> {
    single_treatment(q)?;
    if q.outcomes.len() != 1 {
        return Err(IdentifyError::NotSingle("outcome"));
    }
    let (x, y) = q.resolve(g)?;
    let a = *x.iter().next().expect("one treatment");
    let pool = &(&g.all() - &x) - &y;
    let none = VertexSet::new();
    let treatment_cut = g.mutilate(&none, &x);
    for w in subsets(g, &pool) {
        if w.is_empty() {
            continue;
        }
        // W intercepts every directed path from A to Y.
        if !(&g.mutilate(&w, &none).descendants(&x) & &y).is_empty() {
            continue;
        }
        // No open back-door path from A to W.
        if !treatment_cut.m_separated(&x, &w, &none).expect("disjoint sets") {
            continue;
        }
        // A blocks every back-door path from W to Y.
        if !g.mutilate(&none, &w).m_separated(&w, &y, &x).expect("disjoint sets") {
            continue;
        }
        let t = &q.treatments[0];
        let mut symbols = Symbols::new(g, q);
        let mut scope = Vec::new();
        let ws = binders(g, &mut symbols, &w, &mut scope);
        let a_sum = binders(g, &mut symbols, &x, &mut scope);
        let a_slot = Slot::symbol(&t.var, &t.symbol);
        let mediator = Estimand::p(bound_slots(&ws), vec![a_slot]);
        let mut given = bound_slots(&ws);
        given.extend(bound_slots(&a_sum));
        let outcome = Estimand::p(vec![Slot::free(g.name(*y.iter().next().unwrap()))], given);
        let inner = Estimand::sum(
            a_sum.clone(),
            Estimand::product([outcome, Estimand::p(bound_slots(&a_sum), vec![])]),
        );
        debug_assert_eq!(a_sum[0].var, g.name(a));
        return Ok(Some(Estimand::sum(ws, Estimand::product([mediator, inner]))));
    }
    Ok(None)
}

/// Vertices other than the query's that are associated with the treatment
/// but m-separated from the outcomes once the treatment's outgoing edges are
/// cut.
pub fn instrument_candidates(g: &Admg, q: &Query) -> Result<Vec<String>, IdentifyError> {
    let (x, y) = q.resolve(g)?;
    let none = VertexSet::new();
    let cut = g.mutilate(&none, &x);
    let found: VertexSet = (&(&g.all() - &x) - &y)
        .into_iter()
        .filter(|&z| {
            let zs = VertexSet::from([z]);
            !g.m_separated(&zs, &x, &none).expect("disjoint sets")
                && cut.m_separated(&zs, &y, &none).expect("disjoint sets")
        })
        .collect();
    Ok(g.names_of(&found))
}
