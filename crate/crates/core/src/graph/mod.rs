//! Acyclic directed mixed graphs (ADMGs) and latent-variable DAGs.
//!
//! Vertices are stored in first-mention order and addressed by their index in
//! that order. Every deterministic iteration in the crate (topological order,
//! districts, edge printing) is keyed on this order.

mod dsl;
pub mod enumerate;
mod projection;
mod separation;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

pub use dsl::{parse_graph, parse_graph_with, Graph, ParseOptions};

/// A set of vertex indices, iterated in vertex order.
pub type VertexSet = BTreeSet<usize>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: duplicate edge {edge}")]
    DuplicateEdge { line: usize, edge: String },
    #[error("self-loop on vertex {0}")]
    SelfLoop(String),
    #[error("directed cycle through vertex {0}")]
    DirectedCycle(String),
    #[error("line {line}: vertex {name} is used but never declared")]
    Undeclared { line: usize, name: String },
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("invalid vertex name {0:?}")]
    InvalidName(String),
    #[error("duplicate vertex {0}")]
    DuplicateVertex(String),
    #[error("vertex sets overlap on {0}")]
    Overlapping(String),
}

/// Returns true if `name` matches `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Vertices {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vertices {
    fn new(names: Vec<String>) -> Result<Self, GraphError> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if !is_identifier(name) {
                return Err(GraphError::InvalidName(name.clone()));
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(name.clone()));
            }
        }
        Ok(Self { names, index })
    }

    fn resolve<I, S>(&self, names: I) -> Result<VertexSet, GraphError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        names
            .into_iter()
            .map(|n| {
                let n = n.as_ref();
                self.index
                    .get(n)
                    .copied()
                    .ok_or_else(|| GraphError::UnknownVertex(n.to_string()))
            })
            .collect()
    }
}

fn check_edges(
    n: usize,
    names: &[String],
    directed: &BTreeSet<(usize, usize)>,
    extra_pairs: &BTreeSet<(usize, usize)>,
) -> Result<Vec<Vec<usize>>, GraphError> {
    let mut parents = vec![Vec::new(); n];
    for &(p, c) in directed.iter().chain(extra_pairs) {
        if p >= n || c >= n {
            return Err(GraphError::UnknownVertex(format!("#{}", p.max(c))));
        }
        if p == c {
            return Err(GraphError::SelfLoop(names[p].clone()));
        }
    }
    for &(p, c) in directed {
        parents[c].push(p);
    }
    if let Some(v) = find_cycle(&parents) {
        return Err(GraphError::DirectedCycle(names[v].clone()));
    }
    Ok(parents)
}

/// Returns a vertex on a directed cycle, if any.
fn find_cycle(parents: &[Vec<usize>]) -> Option<usize> {
    let n = parents.len();
    let mut indegree: Vec<usize> = vec![0; n];
    let mut children = vec![Vec::new(); n];
    for (c, ps) in parents.iter().enumerate() {
        indegree[c] = ps.len();
        for &p in ps {
            children[p].push(c);
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = stack.pop() {
        seen += 1;
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                stack.push(c);
            }
        }
    }
    if seen == n {
        None
    } else {
        (0..n).find(|&v| indegree[v] > 0)
    }
}

/// Kahn's algorithm, always taking the smallest ready index.
fn topological_order(parents: &[Vec<usize>]) -> Vec<usize> {
    let n = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (c, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(c);
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    order
}

/// An acyclic directed mixed graph.
///
/// Directed edges encode direct causal influence, bidirected edges a hidden
/// common cause. A pair may carry both a directed and a bidirected edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Admg {
    vertices: Vertices,
    directed: BTreeSet<(usize, usize)>,
    /// Stored as `(min, max)`.
    bidirected: BTreeSet<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    spouses: Vec<Vec<usize>>,
}

impl Admg {
    /// Builds a graph from vertex names and index-based edge lists.
    pub fn new(
        names: Vec<String>,
        directed: impl IntoIterator<Item = (usize, usize)>,
        bidirected: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let vertices = Vertices::new(names)?;
        let n = vertices.names.len();
        let directed: BTreeSet<_> = directed.into_iter().collect();
        let bidirected: BTreeSet<_> = bidirected
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        let parents = check_edges(n, &vertices.names, &directed, &bidirected)?;
        let mut children = vec![Vec::new(); n];
        for &(p, c) in &directed {
            children[p].push(c);
        }
        let mut spouses = vec![Vec::new(); n];
        for &(a, b) in &bidirected {
            spouses[a].push(b);
            spouses[b].push(a);
        }
        for list in children.iter_mut().chain(spouses.iter_mut()) {
            list.sort_unstable();
        }
        let mut parents = parents;
        for list in &mut parents {
            list.sort_unstable();
        }
        Ok(Self {
            vertices,
            directed,
            bidirected,
            parents,
            children,
            spouses,
        })
    }

    /// Builds a graph from names. Vertex order is `names` followed by any
    /// edge endpoint not listed there, in order of appearance.
    pub fn from_names(
        names: &[&str],
        directed: &[(&str, &str)],
        bidirected: &[(&str, &str)],
    ) -> Result<Self, GraphError> {
        let mut order: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut intern = |name: &str| -> usize {
            if let Some(&i) = index.get(name) {
                return i;
            }
            order.push(name.to_string());
            index.insert(name.to_string(), order.len() - 1);
            order.len() - 1
        };
        for n in names {
            intern(n);
        }
        let d: Vec<_> = directed.iter().map(|(a, b)| (intern(a), intern(b))).collect();
        let b: Vec<_> = bidirected
            .iter()
            .map(|(a, b)| (intern(a), intern(b)))
            .collect();
        Self::new(order, d, b)
    }

    pub fn len(&self) -> usize {
        self.vertices.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.vertices.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.vertices.names[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vertices.index.get(name).copied()
    }

    /// Maps vertex names to a [`VertexSet`].
    pub fn resolve<I, S>(&self, names: I) -> Result<VertexSet, GraphError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.vertices.resolve(names)
    }

    pub fn names_of(&self, set: &VertexSet) -> Vec<String> {
        set.iter().map(|&v| self.name(v).to_string()).collect()
    }

    pub fn all(&self) -> VertexSet {
        (0..self.len()).collect()
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.directed.iter().copied()
    }

    pub fn bidirected_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bidirected.iter().copied()
    }

    pub fn has_directed(&self, from: usize, to: usize) -> bool {
        self.directed.contains(&(from, to))
    }

    pub fn has_bidirected(&self, a: usize, b: usize) -> bool {
        self.bidirected.contains(&(a.min(b), a.max(b)))
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn spouses(&self, v: usize) -> &[usize] {
        &self.spouses[v]
    }

    /// Deterministic topological order of the directed part.
    pub fn topological_order(&self) -> Vec<usize> {
        topological_order(&self.parents)
    }

    /// Reflexive ancestors of `s`.
    pub fn ancestors(&self, s: &VertexSet) -> VertexSet {
        self.ancestors_within(&self.all(), s)
    }

    /// Reflexive ancestors of `s` in the subgraph induced by `within`.
    pub fn ancestors_within(&self, within: &VertexSet, s: &VertexSet) -> VertexSet {
        closure(s, within, |v| &self.parents[v])
    }

    /// Reflexive descendants of `s`.
    pub fn descendants(&self, s: &VertexSet) -> VertexSet {
        closure(s, &self.all(), |v| &self.children[v])
    }

    /// Districts (bidirected-connected components), each sorted by vertex
    /// order, blocks ordered by their lexicographically least member name.
    pub fn districts(&self) -> Vec<VertexSet> {
        self.districts_within(&self.all())
    }

    /// Districts of the subgraph induced by `within`.
    pub fn districts_within(&self, within: &VertexSet) -> Vec<VertexSet> {
        let mut remaining = within.clone();
        let mut blocks = Vec::new();
        while let Some(start) = remaining.pop_first() {
            let mut block = VertexSet::new();
            block.insert(start);
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &s in &self.spouses[v] {
                    if remaining.remove(&s) {
                        block.insert(s);
                        stack.push(s);
                    }
                }
            }
            blocks.push(block);
        }
        blocks.sort_by(|a, b| self.least_name(a).cmp(self.least_name(b)));
        blocks
    }

    fn least_name(&self, set: &VertexSet) -> &str {
        set.iter()
            .map(|&v| self.name(v))
            .min()
            .unwrap_or_default()
    }

    /// Graph surgery: drops directed edges into `cut_incoming`, directed
    /// edges out of `cut_outgoing` and bidirected edges touching
    /// `cut_incoming`. Vertices are unchanged.
    pub fn mutilate(&self, cut_incoming: &VertexSet, cut_outgoing: &VertexSet) -> Admg {
        let directed = self
            .directed
            .iter()
            .copied()
            .filter(|(p, c)| !cut_incoming.contains(c) && !cut_outgoing.contains(p));
        let bidirected = self
            .bidirected
            .iter()
            .copied()
            .filter(|(a, b)| !cut_incoming.contains(a) && !cut_incoming.contains(b));
        Admg::new(self.vertices.names.clone(), directed, bidirected)
            .expect("edge removal preserves validity")
    }

    /// The subgraph induced by `keep`, with vertices renumbered in order.
    pub fn induced(&self, keep: &VertexSet) -> Admg {
        let remap: HashMap<usize, usize> =
            keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let names = keep.iter().map(|&v| self.name(v).to_string()).collect();
        let pick = |edges: &BTreeSet<(usize, usize)>| -> Vec<(usize, usize)> {
            edges
                .iter()
                .filter_map(|(a, b)| Some((*remap.get(a)?, *remap.get(b)?)))
                .collect()
        };
        Admg::new(names, pick(&self.directed), pick(&self.bidirected))
            .expect("induced subgraph of a valid graph is valid")
    }

    /// Returns a copy with an extra isolated vertex appended.
    pub fn with_isolated_vertex(&self, name: &str) -> Result<Admg, GraphError> {
        let mut names = self.vertices.names.clone();
        names.push(name.to_string());
        Admg::new(
            names,
            self.directed.iter().copied(),
            self.bidirected.iter().copied(),
        )
    }

    /// Emits the graph in the line-oriented DSL.
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        for name in self.names() {
            out.push_str(&format!("node {name}\n"));
        }
        for &(p, c) in &self.directed {
            out.push_str(&format!("{} -> {}\n", self.name(p), self.name(c)));
        }
        for &(a, b) in &self.bidirected {
            out.push_str(&format!("{} <-> {}\n", self.name(a), self.name(b)));
        }
        out
    }
}

impl fmt::Display for Admg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dsl())
    }
}

fn closure<'a>(
    seed: &VertexSet,
    within: &VertexSet,
    next: impl Fn(usize) -> &'a [usize],
) -> VertexSet {
    let mut out: VertexSet = seed.intersection(within).copied().collect();
    let mut stack: Vec<usize> = out.iter().copied().collect();
    while let Some(v) = stack.pop() {
        for &u in next(v) {
            if within.contains(&u) && out.insert(u) {
                stack.push(u);
            }
        }
    }
    out
}

/// A DAG over observed and latent vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatentDag {
    vertices: Vertices,
    latent: Vec<bool>,
    directed: BTreeSet<(usize, usize)>,
    parents: Vec<Vec<usize>>,
}

impl LatentDag {
    pub fn new(
        names: Vec<String>,
        latent: Vec<bool>,
        directed: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let vertices = Vertices::new(names)?;
        assert_eq!(latent.len(), vertices.names.len(), "one latent flag per vertex");
        let directed: BTreeSet<_> = directed.into_iter().collect();
        let mut parents = check_edges(vertices.names.len(), &vertices.names, &directed, &BTreeSet::new())?;
        for list in &mut parents {
            list.sort_unstable();
        }
        Ok(Self {
            vertices,
            latent,
            directed,
            parents,
        })
    }

    /// Builds a latent DAG from names; every vertex named in `latent` is
    /// hidden. Vertex order is first appearance across `observed`, the edge
    /// list, then `latent`.
    pub fn from_names(
        observed: &[&str],
        latent: &[&str],
        directed: &[(&str, &str)],
    ) -> Result<Self, GraphError> {
        let mut order: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut intern = |name: &str| -> usize {
            if let Some(&i) = index.get(name) {
                return i;
            }
            order.push(name.to_string());
            index.insert(name.to_string(), order.len() - 1);
            order.len() - 1
        };
        for n in observed {
            intern(n);
        }
        let d: Vec<_> = directed.iter().map(|(a, b)| (intern(a), intern(b))).collect();
        for n in latent {
            intern(n);
        }
        let flags = order.iter().map(|n| latent.contains(&n.as_str())).collect();
        Self::new(order, flags, d)
    }

    pub fn len(&self) -> usize {
        self.vertices.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.vertices.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.vertices.names[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vertices.index.get(name).copied()
    }

    pub fn is_latent(&self, v: usize) -> bool {
        self.latent[v]
    }

    /// Observed vertex indices in vertex order.
    pub fn observed(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| !self.latent[v]).collect()
    }

    /// Latent vertex indices in vertex order.
    pub fn latents(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.latent[v]).collect()
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.directed.iter().copied()
    }

    pub fn topological_order(&self) -> Vec<usize> {
        topological_order(&self.parents)
    }

    /// True if every latent has no parents and exactly two observed children.
    pub fn is_canonical(&self) -> bool {
        self.latents().into_iter().all(|l| {
            let children: Vec<usize> = self
                .directed
                .iter()
                .filter(|(p, _)| *p == l)
                .map(|&(_, c)| c)
                .collect();
            self.parents[l].is_empty()
                && children.len() == 2
                && children.iter().all(|&c| !self.latent[c])
        })
    }

    /// Emits the graph in the line-oriented DSL.
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        for (v, name) in self.names().iter().enumerate() {
            let kind = if self.latent[v] { "latent" } else { "node" };
            out.push_str(&format!("{kind} {name}\n"));
        }
        for &(p, c) in &self.directed {
            out.push_str(&format!("{} -> {}\n", self.name(p), self.name(c)));
        }
        out
    }
}

impl fmt::Display for LatentDag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dsl())
    }
}
