//! Numerical equality of estimands on seeded random joints.

use std::collections::BTreeSet;

use super::table::for_each_assignment;
use super::{evaluate, Assignment, Estimand, EstimandError, JointTable, DISTRIBUTION_TOLERANCE};
use crate::rng;

/// A source of seeded, strictly positive joint tables.
pub trait JointSampler {
    fn sample(&self, seed: u64) -> Result<JointTable, EstimandError>;
}

/// Joints drawn from the flat Dirichlet over all cells, without any
/// graphical constraint.
#[derive(Debug, Clone)]
pub struct UnrestrictedJoints {
    variables: Vec<String>,
    cards: Vec<usize>,
}

impl UnrestrictedJoints {
    pub fn new(variables: Vec<String>, cards: Vec<usize>) -> Self {
        Self { variables, cards }
    }

    pub fn binary<S: AsRef<str>>(variables: &[S]) -> Self {
        Self::new(
            variables.iter().map(|v| v.as_ref().to_string()).collect(),
            vec![2; variables.len()],
        )
    }
}

impl JointSampler for UnrestrictedJoints {
    fn sample(&self, seed: u64) -> Result<JointTable, EstimandError> {
        let cells: usize = self.cards.iter().product();
        let mut stream = rng::substream(seed, "joint");
        let mut mass = rng::flat_dirichlet(&mut stream, cells);
        rng::apply_floor(&mut mass, 1e-3 / cells as f64);
        JointTable::new(self.variables.clone(), self.cards.clone(), mass)
    }
}

/// True iff `e1` and `e2` agree within 1e-9 (sup-norm over outcome
/// assignments) for every treatment value assignment on `trials` joints
/// drawn from `sampler` with seeds `seed, seed + 1, ...`.
///
/// Both estimands must have the same outcome variables and the same set of
/// variables carrying treatment symbols.
pub fn estimands_equal_numerically(
    e1: &Estimand,
    e2: &Estimand,
    sampler: &dyn JointSampler,
    trials: usize,
    seed: u64,
) -> Result<bool, EstimandError> {
    let outcomes = e1.free_variables();
    if outcomes != e2.free_variables() {
        return Err(EstimandError::Mismatch("outcome variables".into()));
    }
    let treated = |e: &Estimand| -> BTreeSet<String> {
        e.free_symbols().into_iter().map(|(v, _)| v).collect()
    };
    let treatments = treated(e1);
    if treatments != treated(e2) {
        return Err(EstimandError::Mismatch("treatment variables".into()));
    }
    let outcomes: Vec<String> = outcomes.into_iter().collect();
    let treatments: Vec<String> = treatments.into_iter().collect();

    for trial in 0..trials as u64 {
        let joint = sampler.sample(seed.wrapping_add(trial))?;
        let cards = treatments
            .iter()
            .map(|t| {
                joint
                    .cardinality(t)
                    .ok_or_else(|| EstimandError::UnknownVariable(t.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut assignments = Vec::new();
        for_each_assignment(&cards, |_, digits| {
            let a: Assignment = treatments.iter().cloned().zip(digits.iter().copied()).collect();
            assignments.push(a);
        });
        for fixed in &assignments {
            let v1 = evaluate(e1, &joint, fixed, &outcomes)?;
            let v2 = evaluate(e2, &joint, fixed, &outcomes)?;
            if v1.sup_distance(&v2)? > DISTRIBUTION_TOLERANCE {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimand::tests::front_door;
    use crate::estimand::{Binder, Slot};

    #[test]
    fn identical_estimands_are_equal() {
        let s = UnrestrictedJoints::binary(&["A", "W", "Y"]);
        assert!(estimands_equal_numerically(&front_door(), &front_door(), &s, 20, 3).unwrap());
    }

    #[test]
    fn reordered_factors_are_equal() {
        // sum_{w} p(w | a) sum_{a'} p(a') p(Y | w, a')
        let reordered = Estimand::sum(
            vec![Binder::new("W", "w")],
            Estimand::product([
                Estimand::sum(
                    vec![Binder::new("A", "a'")],
                    Estimand::product([
                        Estimand::p(vec![Slot::symbol("A", "a'")], vec![]),
                        Estimand::p(
                            vec![Slot::free("Y")],
                            vec![Slot::symbol("A", "a'"), Slot::symbol("W", "w")],
                        ),
                    ]),
                ),
                Estimand::p(vec![Slot::symbol("W", "w")], vec![Slot::symbol("A", "a")]),
            ]),
        );
        let s = UnrestrictedJoints::binary(&["A", "W", "Y"]);
        assert!(estimands_equal_numerically(&front_door(), &reordered, &s, 20, 9).unwrap());
    }

    #[test]
    fn different_estimands_differ() {
        let naive = Estimand::p(vec![Slot::free("Y")], vec![Slot::symbol("A", "a")]);
        let s = UnrestrictedJoints::binary(&["A", "W", "Y"]);
        assert!(!estimands_equal_numerically(&front_door(), &naive, &s, 5, 0).unwrap());
    }

    #[test]
    fn mismatched_outcomes_are_an_error() {
        let a = Estimand::p(vec![Slot::free("Y")], vec![]);
        let b = Estimand::p(vec![Slot::free("W")], vec![]);
        let s = UnrestrictedJoints::binary(&["W", "Y"]);
        assert!(estimands_equal_numerically(&a, &b, &s, 1, 0).is_err());
    }

    #[test]
    fn unrestricted_joints_are_positive() {
        let s = UnrestrictedJoints::new(vec!["A".into(), "B".into()], vec![3, 2]);
        let j = s.sample(4).unwrap();
        assert!(j.mass().iter().all(|&m| m > 0.0));
        assert_eq!(j, s.sample(4).unwrap());
    }
}
