//! Exact evaluation of estimands against a joint table.

use std::cell::RefCell;
use std::collections::HashMap;

use super::table::{for_each_assignment, strides};
use super::{
    print_estimand, Assignment, Estimand, EstimandError, JointTable, Slot, Value,
};

/// Values of an estimand for every assignment of its outcome variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    outcomes: Vec<String>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Evaluation {
    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cards
    }

    /// One value per outcome assignment, last outcome varying fastest.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Sup-norm distance to a table over the same variables (any order).
    pub fn sup_distance_to(&self, table: &JointTable) -> Result<f64, EstimandError> {
        let aligned = table.reorder(&self.outcomes)?;
        if aligned.cardinalities() != self.cards.as_slice() {
            return Err(EstimandError::Mismatch("outcome cardinalities".into()));
        }
        Ok(sup_distance(&self.values, aligned.mass()))
    }

    pub fn sup_distance(&self, other: &Evaluation) -> Result<f64, EstimandError> {
        if self.outcomes != other.outcomes || self.cards != other.cards {
            return Err(EstimandError::Mismatch("outcome variables".into()));
        }
        Ok(sup_distance(&self.values, &other.values))
    }
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

struct Evaluator<'a> {
    joint: &'a JointTable,
    marginals: RefCell<HashMap<Vec<usize>, Vec<f64>>>,
    free_symbols: HashMap<String, usize>,
    fixed: &'a Assignment,
    /// Current outcome value per joint position, for free slots.
    outcome_values: Vec<Option<usize>>,
}

impl Evaluator<'_> {
    fn position(&self, var: &str) -> Result<usize, EstimandError> {
        self.joint
            .position(var)
            .ok_or_else(|| EstimandError::UnknownVariable(var.to_string()))
    }

    fn slot_value(&self, slot: &Slot, env: &[(&str, usize)]) -> Result<usize, EstimandError> {
        match &slot.value {
            Value::Free => {
                let pos = self.position(&slot.var)?;
                self.outcome_values[pos]
                    .ok_or_else(|| EstimandError::UnboundSymbol(slot.var.clone()))
            }
            Value::Symbol(s) => env
                .iter()
                .rev()
                .find(|(name, _)| name == s)
                .map(|&(_, v)| v)
                .or_else(|| self.free_symbols.get(s).copied())
                .ok_or_else(|| EstimandError::UnboundSymbol(s.clone())),
        }
    }

    /// Marginal mass of the joint at the given (position, value) pairs.
    fn mass(&self, mut cells: Vec<(usize, usize)>) -> f64 {
        cells.sort_unstable();
        let positions: Vec<usize> = cells.iter().map(|c| c.0).collect();
        let cards: Vec<usize> = positions
            .iter()
            .map(|&p| self.joint.cardinalities()[p])
            .collect();
        let index: usize = cells
            .iter()
            .zip(strides(&cards))
            .map(|(&(_, v), s)| v * s)
            .sum();
        let mut cache = self.marginals.borrow_mut();
        let table = cache
            .entry(positions)
            .or_insert_with_key(|p| self.joint.marginal_cells(p));
        table[index]
    }

    fn check_range(&self, pos: usize, value: usize) -> Result<(), EstimandError> {
        let cardinality = self.joint.cardinalities()[pos];
        if value >= cardinality {
            return Err(EstimandError::ValueOutOfRange {
                variable: self.joint.variables()[pos].clone(),
                value,
                cardinality,
            });
        }
        Ok(())
    }

    fn eval<'e>(&self, e: &'e Estimand, env: &mut Vec<(&'e str, usize)>) -> Result<f64, EstimandError> {
        match e {
            Estimand::Conditional { targets, given } => {
                let mut all = Vec::with_capacity(targets.len() + given.len());
                let mut cond = Vec::with_capacity(given.len());
                for (i, slot) in targets.iter().chain(given).enumerate() {
                    let pos = self.position(&slot.var)?;
                    let value = self.slot_value(slot, env)?;
                    self.check_range(pos, value)?;
                    all.push((pos, value));
                    if i >= targets.len() {
                        cond.push((pos, value));
                    }
                }
                let numerator = self.mass(all);
                if cond.is_empty() {
                    return Ok(numerator);
                }
                let denominator = self.mass(cond.clone());
                if denominator == 0.0 {
                    return Err(self.zero_probability(e, &cond));
                }
                Ok(numerator / denominator)
            }
            Estimand::Marginal { sum_over, body } => {
                let mut cards = Vec::with_capacity(sum_over.len());
                for b in sum_over {
                    cards.push(self.joint.cardinalities()[self.position(&b.var)?]);
                }
                let base = env.len();
                let mut total = 0.0;
                let mut result = Ok(());
                for_each_assignment(&cards, |_, digits| {
                    if result.is_err() {
                        return;
                    }
                    env.truncate(base);
                    env.extend(sum_over.iter().zip(digits).map(|(b, &d)| (b.symbol.as_str(), d)));
                    match self.eval(body, env) {
                        Ok(v) => total += v,
                        Err(err) => result = Err(err),
                    }
                });
                env.truncate(base);
                result.map(|()| total)
            }
            Estimand::Product(factors) => {
                let mut acc = 1.0;
                for f in factors {
                    acc *= self.eval(f, env)?;
                }
                Ok(acc)
            }
            Estimand::Quotient {
                numerator,
                denominator,
            } => {
                let n = self.eval(numerator, env)?;
                let d = self.eval(denominator, env)?;
                if d == 0.0 {
                    let cells: Vec<(usize, usize)> = Vec::new();
                    return Err(self.zero_probability(e, &cells));
                }
                Ok(n / d)
            }
            Estimand::Fix { binder, body } => {
                let value = *self
                    .fixed
                    .get(&binder.var)
                    .ok_or_else(|| EstimandError::UnboundSymbol(binder.symbol.clone()))?;
                self.check_range(self.position(&binder.var)?, value)?;
                env.push((binder.symbol.as_str(), value));
                let out = self.eval(body, env);
                env.pop();
                out
            }
        }
    }

    fn zero_probability(&self, node: &Estimand, cells: &[(usize, usize)]) -> EstimandError {
        let mut parts: Vec<String> = cells
            .iter()
            .map(|&(p, v)| format!("{}={v}", self.joint.variables()[p]))
            .collect();
        for (p, v) in self.outcome_values.iter().enumerate() {
            if let Some(v) = v {
                let part = format!("{}={v}", self.joint.variables()[p]);
                if !parts.contains(&part) {
                    parts.push(part);
                }
            }
        }
        EstimandError::ZeroProbability {
            node: print_estimand(node),
            assignment: parts.join(", "),
        }
    }
}

/// Evaluates `e` on `joint` for every assignment of `outcomes`.
///
/// Treatment symbols (free symbols of `e`) and [`Estimand::Fix`] binders take
/// their values from `fixed`, keyed by variable. Conditional terms are ratios
/// of marginal masses; a zero-mass conditioning event is an error.
pub fn evaluate<S: AsRef<str>>(
    e: &Estimand,
    joint: &JointTable,
    fixed: &Assignment,
    outcomes: &[S],
) -> Result<Evaluation, EstimandError> {
    e.validate()?;
    let outcomes: Vec<String> = outcomes.iter().map(|s| s.as_ref().to_string()).collect();
    let mut outcome_positions = Vec::with_capacity(outcomes.len());
    for (i, o) in outcomes.iter().enumerate() {
        if outcomes[..i].contains(o) {
            return Err(EstimandError::DuplicateVariable(o.clone()));
        }
        outcome_positions.push(
            joint
                .position(o)
                .ok_or_else(|| EstimandError::UnknownVariable(o.clone()))?,
        );
    }
    if let Some(v) = e.free_variables().into_iter().find(|v| !outcomes.contains(v)) {
        return Err(EstimandError::UnboundSymbol(v));
    }
    let mut free_symbols = HashMap::new();
    for (var, sym) in e.free_symbols() {
        let value = *fixed
            .get(&var)
            .ok_or_else(|| EstimandError::UnboundSymbol(sym.clone()))?;
        free_symbols.insert(sym, value);
    }

    let cards: Vec<usize> = outcome_positions
        .iter()
        .map(|&p| joint.cardinalities()[p])
        .collect();
    let mut evaluator = Evaluator {
        joint,
        marginals: RefCell::new(HashMap::new()),
        free_symbols,
        fixed,
        outcome_values: vec![None; joint.variables().len()],
    };
    let mut values = Vec::with_capacity(cards.iter().product());
    let mut assignments = Vec::new();
    for_each_assignment(&cards, |_, digits| assignments.push(digits.to_vec()));
    for digits in assignments {
        for (&p, &d) in outcome_positions.iter().zip(&digits) {
            evaluator.outcome_values[p] = Some(d);
        }
        values.push(evaluator.eval(e, &mut Vec::new())?);
    }
    Ok(Evaluation {
        outcomes,
        cards,
        values,
    })
}
