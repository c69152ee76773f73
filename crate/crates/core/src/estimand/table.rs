//! Dense probability tables over finite variables.
//!
//! Cells are laid out in mixed-radix order over the variable list with the
//! last variable varying fastest.

use std::collections::BTreeMap;

use super::EstimandError;

/// Maps a variable name to a 0-based value index.
pub type Assignment = BTreeMap<String, usize>;

pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Iterates over every assignment of a mixed-radix index space.
pub(crate) fn for_each_assignment(cards: &[usize], mut f: impl FnMut(usize, &[usize])) {
    let total: usize = cards.iter().product();
    let mut digits = vec![0usize; cards.len()];
    for index in 0..total {
        f(index, &digits);
        for d in (0..cards.len()).rev() {
            digits[d] += 1;
            if digits[d] < cards[d] {
                break;
            }
            digits[d] = 0;
        }
    }
}

pub(crate) fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

/// An exact probability mass function over a finite set of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    variables: Vec<String>,
    cards: Vec<usize>,
    mass: Vec<f64>,
}

impl JointTable {
    pub fn new(
        variables: Vec<String>,
        cards: Vec<usize>,
        mass: Vec<f64>,
    ) -> Result<Self, EstimandError> {
        if variables.len() != cards.len() {
            return Err(EstimandError::Table(
                "one cardinality per variable required".into(),
            ));
        }
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].contains(v) {
                return Err(EstimandError::DuplicateVariable(v.clone()));
            }
            if cards[i] < 2 {
                return Err(EstimandError::Table(format!(
                    "cardinality of {v} must be at least 2"
                )));
            }
        }
        let cells: usize = cards.iter().product();
        if mass.len() != cells {
            return Err(EstimandError::Table(format!(
                "expected {cells} cells, found {}",
                mass.len()
            )));
        }
        if let Some(m) = mass.iter().find(|m| m.is_nan() || **m < 0.0) {
            return Err(EstimandError::Table(format!("negative or NaN mass {m}")));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(EstimandError::Table(format!(
                "masses sum to {total}, not 1"
            )));
        }
        Ok(Self {
            variables,
            cards,
            mass,
        })
    }

    pub fn uniform(variables: Vec<String>, cards: Vec<usize>) -> Result<Self, EstimandError> {
        let cells: usize = cards.iter().product();
        Self::new(variables, cards, vec![1.0 / cells as f64; cells])
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cards
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn cardinality(&self, name: &str) -> Option<usize> {
        self.position(name).map(|i| self.cards[i])
    }

    /// Mass of a full assignment given as one value per variable, in order.
    pub fn at(&self, values: &[usize]) -> f64 {
        let s = strides(&self.cards);
        self.mass[values.iter().zip(&s).map(|(v, s)| v * s).sum::<usize>()]
    }

    /// Exact marginal over `keep`; kept variables retain their table order.
    pub fn marginalize<S: AsRef<str>>(&self, keep: &[S]) -> Result<JointTable, EstimandError> {
        let mut positions = Vec::with_capacity(keep.len());
        for k in keep {
            let k = k.as_ref();
            let p = self
                .position(k)
                .ok_or_else(|| EstimandError::UnknownVariable(k.to_string()))?;
            positions.push(p);
        }
        positions.sort_unstable();
        positions.dedup();
        let mass = self.marginal_cells(&positions);
        Ok(JointTable {
            variables: positions.iter().map(|&p| self.variables[p].clone()).collect(),
            cards: positions.iter().map(|&p| self.cards[p]).collect(),
            mass,
        })
    }

    /// Marginal masses over the variables at `positions` (ascending), laid
    /// out in mixed-radix order over those positions.
    pub(crate) fn marginal_cells(&self, positions: &[usize]) -> Vec<f64> {
        let kept_cards: Vec<usize> = positions.iter().map(|&p| self.cards[p]).collect();
        let kept_strides = strides(&kept_cards);
        let mut out = vec![0.0; kept_cards.iter().product()];
        for_each_assignment(&self.cards, |index, digits| {
            let target: usize = positions
                .iter()
                .zip(&kept_strides)
                .map(|(&p, s)| digits[p] * s)
                .sum();
            out[target] += self.mass[index];
        });
        out
    }

    /// Largest absolute cell difference against a table over the same
    /// variables in the same order.
    pub fn sup_distance(&self, other: &JointTable) -> Option<f64> {
        if self.variables != other.variables || self.cards != other.cards {
            return None;
        }
        Some(
            self.mass
                .iter()
                .zip(&other.mass)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }

    /// Reorders the variables to `order`, which must be a permutation.
    pub fn reorder<S: AsRef<str>>(&self, order: &[S]) -> Result<JointTable, EstimandError> {
        if order.len() != self.variables.len() {
            return Err(EstimandError::Table("reorder needs a permutation".into()));
        }
        let positions = order
            .iter()
            .map(|n| {
                self.position(n.as_ref())
                    .ok_or_else(|| EstimandError::UnknownVariable(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let new_cards: Vec<usize> = positions.iter().map(|&p| self.cards[p]).collect();
        let mut mass = vec![0.0; self.mass.len()];
        let old_strides = strides(&self.cards);
        for_each_assignment(&new_cards, |index, digits| {
            let old: usize = positions
                .iter()
                .zip(digits)
                .map(|(&p, d)| d * old_strides[p])
                .sum();
            mass[index] = self.mass[old];
        });
        Ok(JointTable {
            variables: positions.iter().map(|&p| self.variables[p].clone()).collect(),
            cards: new_cards,
            mass,
        })
    }

    /// Builds a table without the normalization check. Callers guarantee the
    /// invariants by construction.
    pub(crate) fn from_parts(variables: Vec<String>, cards: Vec<usize>, mass: Vec<f64>) -> Self {
        debug_assert_eq!(mass.len(), cards.iter().product::<usize>());
        Self {
            variables,
            cards,
            mass,
        }
    }
}
