use super::{random_scm, Cardinalities, DiscreteScm, OracleError};
use crate::estimand::{
    evaluate, for_each_assignment, Assignment, Estimand, EstimandError, JointSampler, JointTable,
};
use crate::graph::LatentDag;
use crate::identify::Query;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub max_abs_error: f64,
    pub pass: bool,
    /// Treatment values at which the largest error occurred.
    pub worst: Assignment,
}

/// Compares `e` evaluated on the observational joint of `m` with the true
/// interventional distribution, over every treatment value assignment (or
/// the values pinned in `q`).
pub fn verify(e: &Estimand, m: &DiscreteScm, q: &Query, tol: f64) -> Result<VerifyReport, OracleError> {
    let attach = |source: EstimandError| OracleError::Estimand { seed: m.seed(), source };
    let obs = m.observational_joint();
    let ranges = q
        .treatments
        .iter()
        .map(|t| match t.value {
            Some(v) => Ok(vec![v]),
            None => m
                .cardinality(&t.var)
                .map(|c| (0..c).collect())
                .ok_or_else(|| OracleError::UnknownVariable(t.var.clone())),
        })
        .collect::<Result<Vec<Vec<usize>>, _>>()?;
    let lens: Vec<usize> = ranges.iter().map(Vec::len).collect();
    let mut assignments = Vec::new();
    for_each_assignment(&lens, |_, digits| {
        let a: Assignment = q
            .treatments
            .iter()
            .zip(digits)
            .zip(&ranges)
            .map(|((t, &d), r)| (t.var.clone(), r[d]))
            .collect();
        assignments.push(a);
    });

    let mut report = VerifyReport {
        max_abs_error: 0.0,
        pass: true,
        worst: Assignment::new(),
    };
    for fixed in assignments {
        let estimate = evaluate(e, &obs, &fixed, &q.outcomes).map_err(attach)?;
        let truth = m.interventional_joint(&fixed)?.marginalize(&q.outcomes).map_err(attach)?;
        let err = estimate.sup_distance_to(&truth).map_err(attach)?;
        if report.worst.is_empty() || err > report.max_abs_error {
            report.max_abs_error = err;
            report.worst = fixed;
        }
    }
    report.pass = report.max_abs_error <= tol;
    Ok(report)
}

/// `I(X; Y | Z)` in nats. Requires disjoint, non-empty `x` and `y`.
pub fn conditional_mutual_information<S: AsRef<str>>(
    joint: &JointTable,
    x: &[S],
    y: &[S],
    z: &[S],
) -> Result<f64, EstimandError> {
    let order: Vec<&str> = x.iter().chain(y).chain(z).map(AsRef::as_ref).collect();
    let table = joint.marginalize(&order)?.reorder(&order)?;
    let cards = table.cardinalities();
    let nx: usize = cards[..x.len()].iter().product();
    let ny: usize = cards[x.len()..x.len() + y.len()].iter().product();
    let nz: usize = cards[x.len() + y.len()..].iter().product();
    let mass = table.mass();
    let at = |i: usize, j: usize, k: usize| mass[(i * ny + j) * nz + k];

    let mut pxz = vec![0.0; nx * nz];
    let mut pyz = vec![0.0; ny * nz];
    let mut pz = vec![0.0; nz];
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let p = at(i, j, k);
                pxz[i * nz + k] += p;
                pyz[j * nz + k] += p;
                pz[k] += p;
            }
        }
    }
    let mut total = 0.0;
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let p = at(i, j, k);
                if p > 0.0 {
                    total += p * (p * pz[k] / (pxz[i * nz + k] * pyz[j * nz + k])).ln();
                }
            }
        }
    }
    Ok(total)
}

/// Observational joints of random models over a fixed latent DAG, so that
/// every sample satisfies the graph's constraints.
#[derive(Debug, Clone)]
pub struct ScmJoints {
    dag: LatentDag,
    cards: Cardinalities,
}

impl ScmJoints {
    pub fn new(dag: LatentDag, cards: Cardinalities) -> Self {
        Self { dag, cards }
    }
}

impl JointSampler for ScmJoints {
    fn sample(&self, seed: u64) -> Result<JointTable, EstimandError> {
        random_scm(&self.dag, seed, &self.cards)
            .map(|m| m.observational_joint())
            .map_err(|e| EstimandError::Table(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimand::tests::front_door;
    use crate::estimand::{Slot, UnrestrictedJoints};

    fn fig1d() -> LatentDag {
        LatentDag::from_names(&["A", "W", "Y"], &["C"], &[("A", "W"), ("W", "Y"), ("C", "A"), ("C", "Y")]).unwrap()
    }

    #[test]
    fn front_door_passes() {
        let q = Query::new(&["A"], &["Y"]);
        for seed in 0..10 {
            let m = random_scm(&fig1d(), seed, &Cardinalities::default()).unwrap();
            let r = verify(&front_door(), &m, &q, 1e-9).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn naive_estimand_fails_under_confounding() {
        let q = Query::new(&["A"], &["Y"]);
        let naive = Estimand::p(vec![Slot::free("Y")], vec![Slot::symbol("A", "a")]);
        let worst = (0..20)
            .map(|s| {
                let m = random_scm(&fig1d(), s, &Cardinalities::default()).unwrap();
                verify(&naive, &m, &q, 1e-9).unwrap().max_abs_error
            })
            .fold(0.0, f64::max);
        assert!(worst > 1e-3);
    }

    #[test]
    fn pinned_values_restrict_the_check() {
        let mut q = Query::new(&["A"], &["Y"]);
        q.treatments[0].value = Some(1);
        let m = random_scm(&fig1d(), 0, &Cardinalities::default()).unwrap();
        let r = verify(&front_door(), &m, &q, 1e-9).unwrap();
        assert_eq!(r.worst, Assignment::from([("A".to_string(), 1)]));
    }

    #[test]
    fn evaluation_errors_carry_the_seed() {
        let q = Query::new(&["A"], &["Y"]);
        let m = random_scm(&fig1d(), 42, &Cardinalities::default()).unwrap();
        let bad = Estimand::p(vec![Slot::free("Y")], vec![Slot::symbol("Q", "q")]);
        let err = verify(&bad, &m, &q, 1e-9).unwrap_err();
        assert!(matches!(err, OracleError::Estimand { seed: Some(42), .. }), "{err:?}");
        assert!(err.to_string().contains("seed 42"));
    }

    #[test]
    fn cmi_of_independent_and_dependent_tables() {
        let u = JointTable::uniform(vec!["A".into(), "B".into(), "C".into()], vec![2, 3, 2]).unwrap();
        assert!(conditional_mutual_information(&u, &["A"], &["B"], &["C"]).unwrap().abs() < 1e-15);
        let copy = JointTable::new(vec!["A".into(), "B".into()], vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let i = conditional_mutual_information(&copy, &["A"], &["B"], &[] as &[&str]).unwrap();
        assert!((i - std::f64::consts::LN_2).abs() < 1e-15);
        let j = UnrestrictedJoints::binary(&["A", "B"]).sample(0).unwrap();
        assert!(conditional_mutual_information(&j, &["A"], &["B"], &[] as &[&str]).unwrap() > 1e-9);
    }

    #[test]
    fn scm_joints_are_reproducible() {
        let s = ScmJoints::new(fig1d(), Cardinalities::default());
        assert_eq!(s.sample(3).unwrap(), s.sample(3).unwrap());
        assert_eq!(s.sample(3).unwrap().variables(), ["A", "W", "Y"]);
    }
}
