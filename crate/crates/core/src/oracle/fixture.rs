//! Text fixtures for discrete models.
//!
//! ```text
//! scm v1
//! node A
//! node Y
//! latent U
//! U -> A
//! U -> Y
//! A -> Y
//! card A 2
//! cpt U : 0.5 0.5
//! cpt A | U=0 : 0.9 0.1
//! cpt A | U=1 : 0.2 0.8
//! cpt Y | A=0,U=0 : 0.7 0.3
//! ...
//! ```
//!
//! After the `scm v1` header come graph statements, `card` lines (default 2)
//! and one `cpt` line per parent assignment. A graph without `latent` lines
//! but with bidirected edges is read through its canonical DAG.

use std::collections::BTreeMap;

use super::{DiscreteScm, OracleError};
use crate::graph::{parse_graph, Graph, LatentDag};

const HEADER: &str = "scm v1";

fn strip(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn fixture_error(line: usize, message: impl Into<String>) -> OracleError {
    OracleError::Fixture {
        line,
        message: message.into(),
    }
}

struct CptLine {
    line: usize,
    var: String,
    parents: Vec<(String, usize)>,
    probs: Vec<f64>,
}

fn parse_cpt(line: usize, body: &str) -> Result<CptLine, OracleError> {
    let (head, probs) = body
        .split_once(':')
        .ok_or_else(|| fixture_error(line, "expected ':' before probabilities"))?;
    let (var, parents) = match head.split_once('|') {
        Some((v, p)) => (v.trim(), Some(p.trim())),
        None => (head.trim(), None),
    };
    let parents = match parents {
        None => vec![],
        Some(p) => p
            .split(',')
            .map(|item| {
                let (name, value) = item
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| fixture_error(line, format!("expected NAME=value, found {item:?}")))?;
                let value = value
                    .trim()
                    .parse()
                    .map_err(|_| fixture_error(line, format!("bad parent value {value:?}")))?;
                Ok((name.trim().to_string(), value))
            })
            .collect::<Result<_, OracleError>>()?,
    };
    let probs = probs
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| fixture_error(line, format!("bad probability {t:?}"))))
        .collect::<Result<_, _>>()?;
    Ok(CptLine {
        line,
        var: var.to_string(),
        parents,
        probs,
    })
}

/// Parses an `scm v1` fixture.
pub fn parse_scm(text: &str) -> Result<DiscreteScm, OracleError> {
    let mut graph_text = String::new();
    let mut cards: Vec<(usize, String, usize)> = Vec::new();
    let mut cpts = Vec::new();
    let mut header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip(raw);
        let keyword = body.split_whitespace().next().unwrap_or("");
        match keyword {
            "" => {}
            _ if !header => {
                if body.split_whitespace().collect::<Vec<_>>() != ["scm", "v1"] {
                    return Err(fixture_error(line, format!("expected header {HEADER:?}")));
                }
                header = true;
            }
            "card" => {
                let parts: Vec<&str> = body.split_whitespace().collect();
                let [_, var, card] = parts[..] else {
                    return Err(fixture_error(line, "expected `card NAME N`"));
                };
                let card = card.parse().map_err(|_| fixture_error(line, format!("bad cardinality {card:?}")))?;
                cards.push((line, var.to_string(), card));
            }
            "cpt" => cpts.push(parse_cpt(line, &body[3..])?),
            _ => {
                graph_text.push_str(raw);
            }
        }
        // Keep graph line numbers aligned with the fixture.
        graph_text.push('\n');
    }
    if !header {
        return Err(fixture_error(1, format!("missing header {HEADER:?}")));
    }
    let dag = match parse_graph(&graph_text)? {
        Graph::Latent(d) => d,
        Graph::Admg(g) => g.canonical_dag(),
    };

    let mut card_of = vec![2usize; dag.len()];
    for (line, var, card) in &cards {
        let v = dag
            .index_of(var)
            .ok_or_else(|| fixture_error(*line, format!("unknown variable {var}")))?;
        if *card < 2 {
            return Err(fixture_error(*line, format!("cardinality of {var} must be at least 2")));
        }
        card_of[v] = *card;
    }

    let mut rows: Vec<BTreeMap<usize, Vec<f64>>> = vec![BTreeMap::new(); dag.len()];
    for c in cpts {
        let v = dag
            .index_of(&c.var)
            .ok_or_else(|| fixture_error(c.line, format!("unknown variable {}", c.var)))?;
        let parents = dag.parents(v);
        let mut given: BTreeMap<usize, usize> = BTreeMap::new();
        for (name, value) in &c.parents {
            let p = dag
                .index_of(name)
                .filter(|p| parents.contains(p))
                .ok_or_else(|| fixture_error(c.line, format!("{name} is not a parent of {}", c.var)))?;
            if *value >= card_of[p] {
                return Err(fixture_error(c.line, format!("value {value} out of range for {name}")));
            }
            if given.insert(p, *value).is_some() {
                return Err(fixture_error(c.line, format!("{name} assigned twice")));
            }
        }
        if given.len() != parents.len() {
            return Err(fixture_error(c.line, format!("row must assign every parent of {}", c.var)));
        }
        let index = parents.iter().fold(0, |acc, p| acc * card_of[*p] + given[p]);
        if rows[v].insert(index, c.probs).is_some() {
            return Err(fixture_error(c.line, format!("duplicate row for {}", c.var)));
        }
    }
    let mut tables = Vec::with_capacity(dag.len());
    for (v, table) in rows.into_iter().enumerate() {
        let expected: usize = dag.parents(v).iter().map(|&p| card_of[p]).product();
        if table.len() != expected {
            return Err(OracleError::InvalidCpt {
                variable: dag.name(v).to_string(),
                message: format!("expected {expected} rows, found {}", table.len()),
            });
        }
        tables.push(table.into_values().collect());
    }
    DiscreteScm::new(dag, card_of, tables)
}

/// Prints a model as an `scm v1` fixture. Probabilities use the shortest
/// decimal form that reads back to the same double.
pub fn print_scm(m: &DiscreteScm) -> String {
    let dag: &LatentDag = m.dag();
    let cards = m.cardinalities();
    let mut out = format!("{HEADER}\n");
    out.push_str(&dag.to_dsl());
    for (v, card) in cards.iter().enumerate() {
        out.push_str(&format!("card {} {card}\n", dag.name(v)));
    }
    for v in 0..dag.len() {
        let parents = dag.parents(v);
        let parent_cards: Vec<usize> = parents.iter().map(|&p| cards[p]).collect();
        for (r, row) in m.cpt(v).rows().iter().enumerate() {
            out.push_str("cpt ");
            out.push_str(dag.name(v));
            if !parents.is_empty() {
                let mut rest = r;
                let mut values = vec![0; parents.len()];
                for (slot, c) in values.iter_mut().zip(&parent_cards).rev() {
                    *slot = rest % c;
                    rest /= c;
                }
                let given: Vec<String> =
                    parents.iter().zip(&values).map(|(&p, x)| format!("{}={x}", dag.name(p))).collect();
                out.push_str(" | ");
                out.push_str(&given.join(","));
            }
            out.push_str(" :");
            for p in row {
                out.push_str(&format!(" {p}"));
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{random_scm, Cardinalities};

    const BOW: &str = "scm v1
# confounded pair
A -> Y
U -> A
U -> Y
latent U
card Y 3
cpt U : 0.5 0.5
cpt A | U=0 : 0.9 0.1
cpt A | U=1 : 0.2 0.8
cpt Y | U=0,A=0 : 0.7 0.2 0.1
cpt Y | A=0,U=1 : 0.1 0.2 0.7
cpt Y | A=1,U=0 : 0.3 0.3 0.4
cpt Y | A=1,U=1 : 0.25 0.25 0.5
";

    #[test]
    fn parses_rows_in_any_parent_order() {
        let m = parse_scm(BOW).unwrap();
        let y = m.dag().index_of("Y").unwrap();
        assert_eq!(m.cardinality("Y"), Some(3));
        assert_eq!(m.cpt(y).row(&[0, 1], m.cardinalities()), [0.1, 0.2, 0.7]);
        assert_eq!(m.cpt(y).row(&[1, 0], m.cardinalities()), [0.3, 0.3, 0.4]);
    }

    #[test]
    fn print_parse_round_trip() {
        let m = parse_scm(BOW).unwrap();
        let text = print_scm(&m);
        assert_eq!(parse_scm(&text).unwrap(), m);
        assert_eq!(print_scm(&parse_scm(&text).unwrap()), text);
        let dag = LatentDag::from_names(&["A", "W", "Y"], &["C"], &[("A", "W"), ("W", "Y"), ("C", "A"), ("C", "Y")])
            .unwrap();
        let r = random_scm(&dag, 11, &Cardinalities::default().with("W", 3)).unwrap();
        let back = parse_scm(&print_scm(&r)).unwrap();
        assert_eq!(back.dag(), r.dag());
        assert_eq!(back.cardinalities(), r.cardinalities());
        for v in 0..dag.len() {
            assert_eq!(back.cpt(v), r.cpt(v));
        }
    }

    #[test]
    fn bidirected_edges_read_through_canonical_dag() {
        let text = "scm v1\nA -> Y\nA <-> Y\ncpt U_AY : 0.5 0.5\ncpt A | U_AY=0 : 0.5 0.5\ncpt A | U_AY=1 : 0.5 0.5\n\
                    cpt Y | A=0,U_AY=0 : 0.5 0.5\ncpt Y | A=0,U_AY=1 : 0.5 0.5\ncpt Y | A=1,U_AY=0 : 0.5 0.5\n\
                    cpt Y | A=1,U_AY=1 : 0.5 0.5\n";
        let m = parse_scm(text).unwrap();
        assert!(m.dag().is_latent(m.dag().index_of("U_AY").unwrap()));
    }

    fn line_of(text: &str) -> usize {
        match parse_scm(text).unwrap_err() {
            OracleError::Fixture { line, .. } => line,
            OracleError::Graph(crate::graph::GraphError::Syntax { line, .. }) => line,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_point_at_lines() {
        assert_eq!(line_of("\nscm v2\n"), 2);
        assert_eq!(line_of("scm v1\nX\ncpt X : 1\n"), 2);
        assert_eq!(line_of("scm v1\nnode X\ncpt X 0.5 0.5\n"), 3);
        assert_eq!(line_of("scm v1\nnode X\ncpt Q : 0.5 0.5\n"), 3);
        assert_eq!(line_of("scm v1\nnode X\ncard X 1\n"), 3);
        assert_eq!(line_of("scm v1\nnode X\ncpt X : 0.5 0.5\ncpt X : 0.5 0.5\n"), 4);
        assert_eq!(line_of("scm v1\nA -> B\ncpt B | A=2 : 0.5 0.5\n"), 3);
        assert_eq!(line_of("scm v1\nA -> B\ncpt B | C=0 : 0.5 0.5\n"), 3);
    }

    #[test]
    fn incomplete_or_invalid_tables_are_rejected() {
        assert!(matches!(
            parse_scm("scm v1\nA -> B\ncpt A : 0.5 0.5\ncpt B | A=0 : 0.5 0.5\n"),
            Err(OracleError::InvalidCpt { .. })
        ));
        assert!(matches!(parse_scm("scm v1\nnode X\ncpt X : 0.5 0.6\n"), Err(OracleError::InvalidCpt { .. })));
        assert!(parse_scm("").is_err());
    }
}
