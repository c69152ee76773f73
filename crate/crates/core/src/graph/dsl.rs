//! Line-oriented graph description language.
//!
//! ```text
//! # front-door graph
//! A -> W
//! W -> Y
//! C -> A
//! C -> Y
//! latent C
//! ```
//!
//! Statements are `node NAME`, `latent NAME`, `A -> B` and `A <-> B`, one per
//! line, tokens separated by spaces or tabs. `#` starts a comment. A file with
//! any `latent` statement describes a [`LatentDag`], otherwise an [`Admg`].

use std::collections::{BTreeSet, HashMap};

use super::{is_identifier, Admg, GraphError, LatentDag};

/// Result of parsing a graph file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Graph {
    Admg(Admg),
    Latent(LatentDag),
}

impl Graph {
    /// The ADMG over observed vertices; latent DAGs are projected.
    pub fn into_admg(self) -> Admg {
        match self {
            Graph::Admg(g) => g,
            Graph::Latent(g) => g.project(),
        }
    }

    pub fn to_dsl(&self) -> String {
        match self {
            Graph::Admg(g) => g.to_dsl(),
            Graph::Latent(g) => g.to_dsl(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Require every edge endpoint to be declared with `node` or `latent`.
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Node,
    Latent,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    let mut column = 0;
    let mut start_column = 0;
    for (i, c) in line.char_indices() {
        column += 1;
        if c == ' ' || c == '\t' {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &line[s..i],
                    column: start_column,
                });
            }
        } else if start.is_none() {
            start = Some(i);
            start_column = column;
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &line[s..],
            column: start_column,
        });
    }
    tokens
}

#[derive(Default)]
struct Builder {
    order: Vec<String>,
    index: HashMap<String, usize>,
    first_use: Vec<usize>,
    declared: HashMap<usize, Kind>,
    directed: BTreeSet<(usize, usize)>,
    bidirected: BTreeSet<(usize, usize)>,
    /// Line of the first bidirected edge, reported if the file turns out latent.
    first_bidirected: Option<(usize, usize)>,
}

impl Builder {
    fn intern(&mut self, name: &str, line: usize) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.order.push(name.to_string());
        self.first_use.push(line);
        self.index.insert(name.to_string(), self.order.len() - 1);
        self.order.len() - 1
    }
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> GraphError {
    GraphError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn name_token(tok: &Token<'_>, line: usize) -> Result<(), GraphError> {
    if is_identifier(tok.text) {
        Ok(())
    } else {
        Err(syntax(
            line,
            tok.column,
            format!("expected a vertex name, found {:?}", tok.text),
        ))
    }
}

/// Parses with default (lax) options.
pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    parse_graph_with(text, ParseOptions::default())
}

pub fn parse_graph_with(text: &str, options: ParseOptions) -> Result<Graph, GraphError> {
    let mut b = Builder::default();
    for (i, raw) in text.split('\n').enumerate() {
        let line = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let tokens = tokenize(content);
        match tokens.as_slice() {
            [] => {}
            [kw, name] if kw.text == "node" || kw.text == "latent" => {
                name_token(name, line)?;
                let kind = if kw.text == "node" { Kind::Node } else { Kind::Latent };
                let v = b.intern(name.text, line);
                match b.declared.insert(v, kind) {
                    Some(prev) if prev != kind => {
                        return Err(syntax(
                            line,
                            name.column,
                            format!("{} declared both observed and latent", name.text),
                        ));
                    }
                    _ => {}
                }
            }
            [from, arrow, to] if arrow.text == "->" || arrow.text == "<->" => {
                name_token(from, line)?;
                name_token(to, line)?;
                let a = b.intern(from.text, line);
                let c = b.intern(to.text, line);
                if a == c {
                    return Err(GraphError::SelfLoop(from.text.to_string()));
                }
                let (inserted, edge) = if arrow.text == "->" {
                    (b.directed.insert((a, c)), format!("{} -> {}", from.text, to.text))
                } else {
                    b.first_bidirected.get_or_insert((line, arrow.column));
                    (
                        b.bidirected.insert((a.min(c), a.max(c))),
                        format!("{} <-> {}", from.text, to.text),
                    )
                };
                if !inserted {
                    return Err(GraphError::DuplicateEdge { line, edge });
                }
            }
            [_, arrow, _, extra, ..] if arrow.text == "->" || arrow.text == "<->" => {
                return Err(syntax(line, extra.column, "unexpected trailing token"));
            }
            [first, ..] if first.text == "node" || first.text == "latent" => {
                let column = tokens.get(2).map_or(first.column, |t| t.column);
                return Err(syntax(line, column, format!("`{}` takes exactly one name", first.text)));
            }
            [first, second, ..] => {
                return Err(syntax(
                    line,
                    if is_identifier(first.text) { second.column } else { first.column },
                    "expected `node NAME`, `latent NAME`, `A -> B` or `A <-> B`",
                ));
            }
            [only] => {
                return Err(syntax(
                    line,
                    only.column,
                    "expected `node NAME`, `latent NAME`, `A -> B` or `A <-> B`",
                ));
            }
        }
    }

    if options.strict {
        if let Some(v) = (0..b.order.len()).find(|v| !b.declared.contains_key(v)) {
            return Err(GraphError::Undeclared {
                line: b.first_use[v],
                name: b.order[v].clone(),
            });
        }
    }

    let latent: Vec<bool> = (0..b.order.len())
        .map(|v| b.declared.get(&v) == Some(&Kind::Latent))
        .collect();
    if latent.iter().any(|&l| l) {
        if let Some((line, column)) = b.first_bidirected {
            return Err(syntax(
                line,
                column,
                "bidirected edges are not allowed in a graph with latent vertices",
            ));
        }
        LatentDag::new(b.order, latent, b.directed).map(Graph::Latent)
    } else {
        Admg::new(b.order, b.directed, b.bidirected).map(Graph::Admg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_graph() {
        let Graph::Admg(g) = parse_graph("A -> Y").unwrap() else {
            panic!("expected an ADMG");
        };
        assert_eq!(g.names(), ["A", "Y"]);
        assert_eq!(g.directed_edges().collect::<Vec<_>>(), [(0, 1)]);
    }

    #[test]
    fn front_door_latent_dag() {
        let g = parse_graph("A -> W\nW -> Y\nC -> A\nC -> Y\nlatent C").unwrap();
        let Graph::Latent(g) = g else {
            panic!("expected a latent DAG");
        };
        assert_eq!(g.names(), ["A", "W", "Y", "C"]);
        let latents: Vec<&str> = g.latents().iter().map(|&v| g.name(v)).collect();
        assert_eq!(latents, ["C"]);
        assert!(g.is_canonical());
    }

    #[test]
    fn cycle_rejected() {
        let err = parse_graph("A -> B\nB -> A").unwrap_err();
        assert!(matches!(err, GraphError::DirectedCycle(_)));
    }

    #[test]
    fn comments_blank_lines_and_crlf() {
        let text = "# header\r\n\r\n  A\t->   B # trailing\r\nnode C\r\n";
        let Graph::Admg(g) = parse_graph(text).unwrap() else {
            panic!()
        };
        assert_eq!(g.names(), ["A", "B", "C"]);
    }

    #[test]
    fn bow_has_both_edge_kinds() {
        let Graph::Admg(g) = parse_graph("A -> Y\nA <-> Y").unwrap() else {
            panic!()
        };
        assert!(g.has_directed(0, 1) && g.has_bidirected(1, 0));
    }

    #[test]
    fn duplicate_edges() {
        assert_eq!(
            parse_graph("A -> B\nA -> B").unwrap_err(),
            GraphError::DuplicateEdge {
                line: 2,
                edge: "A -> B".into()
            }
        );
        assert!(matches!(
            parse_graph("A <-> B\nB <-> A").unwrap_err(),
            GraphError::DuplicateEdge { line: 2, .. }
        ));
    }

    #[test]
    fn self_loop() {
        assert_eq!(
            parse_graph("A <-> A").unwrap_err(),
            GraphError::SelfLoop("A".into())
        );
    }

    #[test]
    fn syntax_errors_carry_position() {
        assert_eq!(
            parse_graph("A -> B\nA => B").unwrap_err(),
            GraphError::Syntax {
                line: 2,
                column: 3,
                message: "expected `node NAME`, `latent NAME`, `A -> B` or `A <-> B`".into()
            }
        );
        let err = parse_graph("A -> 9B").unwrap_err();
        assert!(matches!(err, GraphError::Syntax { line: 1, column: 6, .. }));
        let err = parse_graph("node").unwrap_err();
        assert!(matches!(err, GraphError::Syntax { line: 1, column: 1, .. }));
        let err = parse_graph("A->B").unwrap_err();
        assert!(matches!(err, GraphError::Syntax { line: 1, column: 1, .. }));
    }

    #[test]
    fn strict_declarations() {
        let strict = ParseOptions { strict: true };
        let err = parse_graph_with("node A\nA -> B", strict).unwrap_err();
        assert_eq!(
            err,
            GraphError::Undeclared {
                line: 2,
                name: "B".into()
            }
        );
        assert!(parse_graph_with("node A\nnode B\nA -> B", strict).is_ok());
    }

    #[test]
    fn node_lines_fix_order() {
        let Graph::Admg(g) = parse_graph("node Y\nnode A\nA -> Y").unwrap() else {
            panic!()
        };
        assert_eq!(g.names(), ["Y", "A"]);
    }

    #[test]
    fn latent_file_rejects_bidirected() {
        let err = parse_graph("A <-> B\nlatent U").unwrap_err();
        assert!(matches!(err, GraphError::Syntax { line: 1, column: 3, .. }));
    }

    #[test]
    fn conflicting_declarations() {
        assert!(parse_graph("node A\nlatent A").is_err());
    }
}
