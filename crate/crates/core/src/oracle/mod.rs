//! Ground truth from discrete structural causal models.
//!
//! A [`DiscreteScm`] attaches a conditional probability table to every
//! vertex of a [`LatentDag`]. Observational and interventional joints over the
//! observed variables are computed exactly by enumerating every assignment of
//! every variable, in a fixed order, so results are bit-identical across runs.

mod fixture;
mod verify;

use std::collections::BTreeMap;

use crate::estimand::{for_each_assignment, strides, Assignment, EstimandError, JointTable};
use crate::graph::{GraphError, LatentDag};
use crate::rng;

pub use fixture::{parse_scm, print_scm};
pub use verify::{conditional_mutual_information, verify, ScmJoints, VerifyReport};

/// Every generated CPT entry is at least this large.
pub const POSITIVITY_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("line {line}: {message}")]
    Fixture { line: usize, message: String },
    #[error("invalid CPT for {variable}: {message}")]
    InvalidCpt { variable: String, message: String },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("cannot intervene on latent variable {0}")]
    LatentIntervention(String),
    #[error("value {value} out of range for {variable} (cardinality {cardinality})")]
    ValueOutOfRange {
        variable: String,
        value: usize,
        cardinality: usize,
    },
    #[error("cardinality of {0} must be at least 2")]
    Cardinality(String),
    #[error("{source}{}", seed.map(|s| format!(" (model seed {s})")).unwrap_or_default())]
    Estimand {
        seed: Option<u64>,
        #[source]
        source: EstimandError,
    },
}

impl From<EstimandError> for OracleError {
    fn from(source: EstimandError) -> Self {
        OracleError::Estimand { seed: None, source }
    }
}

/// Per-variable cardinalities with a default.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cardinalities {
    pub default: usize,
    pub overrides: BTreeMap<String, usize>,
}

impl Default for Cardinalities {
    fn default() -> Self {
        Self::uniform(2)
    }
}

impl Cardinalities {
    pub fn uniform(default: usize) -> Self {
        Self {
            default,
            overrides: BTreeMap::new(),
        }
    }

    pub fn with(mut self, var: &str, card: usize) -> Self {
        self.overrides.insert(var.to_string(), card);
        self
    }

    pub fn of(&self, var: &str) -> usize {
        self.overrides.get(var).copied().unwrap_or(self.default)
    }
}

/// Conditional probability table of one variable.
///
/// Rows are indexed in mixed-radix order over the parent values (parents in
/// vertex order, last parent fastest); each row is a distribution over the
/// variable's values.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    parents: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl Cpt {
    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// The row for the given parent values, listed in parent order.
    pub fn row(&self, parent_values: &[usize], cards: &[usize]) -> &[f64] {
        let pc: Vec<usize> = self.parents.iter().map(|&p| cards[p]).collect();
        let idx: usize = parent_values
            .iter()
            .zip(strides(&pc))
            .map(|(v, s)| v * s)
            .sum();
        &self.rows[idx]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteScm {
    dag: LatentDag,
    cards: Vec<usize>,
    cpts: Vec<Cpt>,
    seed: Option<u64>,
}

impl DiscreteScm {
    /// Builds a model from per-vertex cardinalities and CPT rows, both in
    /// vertex order.
    pub fn new(
        dag: LatentDag,
        cards: Vec<usize>,
        rows: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self, OracleError> {
        assert_eq!(cards.len(), dag.len(), "one cardinality per vertex");
        assert_eq!(rows.len(), dag.len(), "one CPT per vertex");
        for (v, &c) in cards.iter().enumerate() {
            if c < 2 {
                return Err(OracleError::Cardinality(dag.name(v).to_string()));
            }
        }
        let mut cpts = Vec::with_capacity(dag.len());
        for (v, table) in rows.into_iter().enumerate() {
            let parents = dag.parents(v).to_vec();
            let expected: usize = parents.iter().map(|&p| cards[p]).product();
            let invalid = |message: String| OracleError::InvalidCpt {
                variable: dag.name(v).to_string(),
                message,
            };
            if table.len() != expected {
                return Err(invalid(format!("expected {expected} rows, found {}", table.len())));
            }
            for row in &table {
                if row.len() != cards[v] {
                    return Err(invalid(format!("row has {} entries, expected {}", row.len(), cards[v])));
                }
                if row.iter().any(|p| p.is_nan() || *p < 0.0) {
                    return Err(invalid("negative or NaN entry".into()));
                }
                let total: f64 = row.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(invalid(format!("row sums to {total}")));
                }
            }
            cpts.push(Cpt {
                parents,
                rows: table,
            });
        }
        Ok(Self {
            dag,
            cards,
            cpts,
            seed: None,
        })
    }

    pub fn dag(&self) -> &LatentDag {
        &self.dag
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cards
    }

    pub fn cardinality(&self, var: &str) -> Option<usize> {
        self.dag.index_of(var).map(|v| self.cards[v])
    }

    pub fn cpt(&self, v: usize) -> &Cpt {
        &self.cpts[v]
    }

    /// Seed the model was generated from, if any.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Exact joint over the observed variables.
    pub fn observational_joint(&self) -> JointTable {
        self.joint(&BTreeMap::new())
    }

    /// Exact joint over the observed, non-intervened variables under
    /// `do(intervention)` by truncated factorization.
    pub fn interventional_joint(&self, intervention: &Assignment) -> Result<JointTable, OracleError> {
        let mut clamp = BTreeMap::new();
        for (name, &value) in intervention {
            let v = self
                .dag
                .index_of(name)
                .ok_or_else(|| OracleError::UnknownVariable(name.clone()))?;
            if self.dag.is_latent(v) {
                return Err(OracleError::LatentIntervention(name.clone()));
            }
            if value >= self.cards[v] {
                return Err(OracleError::ValueOutOfRange {
                    variable: name.clone(),
                    value,
                    cardinality: self.cards[v],
                });
            }
            clamp.insert(v, value);
        }
        Ok(self.joint(&clamp))
    }

    fn joint(&self, clamp: &BTreeMap<usize, usize>) -> JointTable {
        let n = self.dag.len();
        // Free variables are enumerated; clamped ones contribute a single value.
        let free: Vec<usize> = (0..n).filter(|v| !clamp.contains_key(v)).collect();
        let free_cards: Vec<usize> = free.iter().map(|&v| self.cards[v]).collect();
        let kept: Vec<usize> = free.iter().copied().filter(|&v| !self.dag.is_latent(v)).collect();
        let kept_cards: Vec<usize> = kept.iter().map(|&v| self.cards[v]).collect();
        let kept_strides = strides(&kept_cards);
        let mut kept_stride_of = vec![0usize; n];
        for (&v, &s) in kept.iter().zip(&kept_strides) {
            kept_stride_of[v] = s;
        }
        let factors: Vec<usize> = free.clone();
        let row_strides: Vec<Vec<usize>> = self
            .cpts
            .iter()
            .map(|c| strides(&c.parents.iter().map(|&p| self.cards[p]).collect::<Vec<_>>()))
            .collect();

        let mut values = vec![0usize; n];
        for (&v, &x) in clamp {
            values[v] = x;
        }
        let mut mass = vec![0.0; kept_cards.iter().product()];
        for_each_assignment(&free_cards, |_, digits| {
            for (&v, &d) in free.iter().zip(digits) {
                values[v] = d;
            }
            let mut p = 1.0;
            for &v in &factors {
                let cpt = &self.cpts[v];
                let row: usize = cpt
                    .parents
                    .iter()
                    .zip(&row_strides[v])
                    .map(|(&q, s)| values[q] * s)
                    .sum();
                p *= cpt.rows[row][values[v]];
            }
            let cell: usize = kept.iter().map(|&v| values[v] * kept_stride_of[v]).sum();
            mass[cell] += p;
        });
        JointTable::from_parts(
            kept.iter().map(|&v| self.dag.name(v).to_string()).collect(),
            kept_cards,
            mass,
        )
    }
}

/// Draws a model with flat-Dirichlet CPT rows floored at
/// [`POSITIVITY_FLOOR`]. Each variable's rows come from the stream keyed by
/// `(seed, variable name)`, row by row in parent-assignment order.
pub fn random_scm(
    dag: &LatentDag,
    seed: u64,
    cards: &Cardinalities,
) -> Result<DiscreteScm, OracleError> {
    let card_list: Vec<usize> = dag.names().iter().map(|n| cards.of(n)).collect();
    if let Some(v) = card_list.iter().position(|&c| c < 2) {
        return Err(OracleError::Cardinality(dag.name(v).to_string()));
    }
    let rows = (0..dag.len())
        .map(|v| {
            let n_rows: usize = dag.parents(v).iter().map(|&p| card_list[p]).product();
            let mut stream = rng::substream(seed, dag.name(v));
            (0..n_rows)
                .map(|_| {
                    let mut row = rng::flat_dirichlet(&mut stream, card_list[v]);
                    rng::apply_floor(&mut row, POSITIVITY_FLOOR);
                    row
                })
                .collect()
        })
        .collect();
    let mut scm = DiscreteScm::new(dag.clone(), card_list, rows)?;
    scm.seed = Some(seed);
    Ok(scm)
}
