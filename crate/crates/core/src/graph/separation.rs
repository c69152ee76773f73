//! m-separation by reachability over (vertex, arrival mark) states.

use std::collections::HashSet;

use super::{Admg, GraphError, VertexSet};

impl Admg {
    /// True iff every path between `x` and `y` is blocked given `z`.
    ///
    /// Bidirected edges carry arrowheads at both ends. A collider is open iff
    /// it is an ancestor of `z`; a non-collider is open iff it is not in `z`.
    pub fn m_separated(
        &self,
        x: &VertexSet,
        y: &VertexSet,
        z: &VertexSet,
    ) -> Result<bool, GraphError> {
        for (a, b) in [(x, y), (x, z), (y, z)] {
            if let Some(&v) = a.intersection(b).next() {
                return Err(GraphError::Overlapping(self.name(v).to_string()));
            }
        }
        if let Some(&v) = x.iter().chain(y).chain(z).find(|&&v| v >= self.len()) {
            return Err(GraphError::UnknownVertex(format!("#{v}")));
        }
        let z_ancestors = self.ancestors(z);

        // State: (vertex, arrived through an arrowhead at this vertex).
        let mut seen: HashSet<(usize, bool)> = HashSet::new();
        let mut stack: Vec<(usize, bool)> = Vec::new();
        for &s in x {
            self.step_from(s, None, &mut stack);
        }
        while let Some(state) = stack.pop() {
            if !seen.insert(state) {
                continue;
            }
            let (v, head_in) = state;
            if y.contains(&v) {
                return Ok(false);
            }
            self.step_from(v, Some((head_in, z, &z_ancestors)), &mut stack);
        }
        Ok(true)
    }

    /// Pushes the states reachable in one edge from `v`. With `gate`, `v` is
    /// an interior vertex and the collider rules decide which edges may be
    /// taken.
    fn step_from(
        &self,
        v: usize,
        gate: Option<(bool, &VertexSet, &VertexSet)>,
        stack: &mut Vec<(usize, bool)>,
    ) {
        let open = |head_out: bool| match gate {
            None => true,
            Some((head_in, z, z_anc)) => {
                if head_in && head_out {
                    z_anc.contains(&v)
                } else {
                    !z.contains(&v)
                }
            }
        };
        if open(false) {
            for &c in self.children(v) {
                stack.push((c, true));
            }
        }
        if open(true) {
            for &p in self.parents(v) {
                stack.push((p, false));
            }
            for &s in self.spouses(v) {
                stack.push((s, true));
            }
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use crate::graph::enumerate::{all_admgs, all_triples};
    use crate::graph::{Admg, LatentDag, VertexSet};

    #[derive(Clone, Copy)]
    enum Edge {
        Directed(usize, usize),
        Bidirected(usize, usize),
    }

    impl Edge {
        fn other(self, v: usize) -> Option<usize> {
            match self {
                Edge::Directed(a, b) | Edge::Bidirected(a, b) if a == v => Some(b),
                Edge::Directed(a, b) | Edge::Bidirected(a, b) if b == v => Some(a),
                _ => None,
            }
        }

        fn head_at(self, v: usize) -> bool {
            match self {
                Edge::Directed(_, c) => c == v,
                Edge::Bidirected(..) => true,
            }
        }
    }

    /// Independent oracle: enumerate every simple path between x and y and
    /// apply the blocking rules to each one.
    pub(crate) fn m_separated_by_paths(
        g: &Admg,
        x: &VertexSet,
        y: &VertexSet,
        z: &VertexSet,
    ) -> bool {
        let edges: Vec<Edge> = g
            .directed_edges()
            .map(|(a, b)| Edge::Directed(a, b))
            .chain(g.bidirected_edges().map(|(a, b)| Edge::Bidirected(a, b)))
            .collect();
        // Descendant-of-z test done by brute force over directed paths.
        let in_an_z = |v: usize| -> bool {
            let mut stack = vec![v];
            let mut seen = vec![false; g.len()];
            while let Some(u) = stack.pop() {
                if z.contains(&u) {
                    return true;
                }
                if !seen[u] {
                    seen[u] = true;
                    stack.extend(g.directed_edges().filter(|e| e.0 == u).map(|e| e.1));
                }
            }
            false
        };
        fn walk(
            v: usize,
            visited: &mut Vec<usize>,
            path: &mut Vec<Edge>,
            edges: &[Edge],
            y: &VertexSet,
            open_path: &mut dyn FnMut(&[usize], &[Edge]) -> bool,
        ) -> bool {
            if y.contains(&v) && !path.is_empty() {
                return open_path(visited, path);
            }
            for &e in edges {
                if let Some(w) = e.other(v) {
                    if visited.contains(&w) {
                        continue;
                    }
                    visited.push(w);
                    path.push(e);
                    let found = walk(w, visited, path, edges, y, open_path);
                    path.pop();
                    visited.pop();
                    if found {
                        return true;
                    }
                }
            }
            false
        }
        let mut open_path = |nodes: &[usize], path: &[Edge]| -> bool {
            (1..nodes.len() - 1).all(|i| {
                let v = nodes[i];
                let collider = path[i - 1].head_at(v) && path[i].head_at(v);
                if collider {
                    in_an_z(v)
                } else {
                    !z.contains(&v)
                }
            })
        };
        for &s in x {
            let mut visited = vec![s];
            let mut path = Vec::new();
            if walk(s, &mut visited, &mut path, &edges, y, &mut open_path) {
                return false;
            }
        }
        true
    }

    fn set(g: &Admg, names: &[&str]) -> VertexSet {
        g.resolve(names).unwrap()
    }

    #[test]
    fn chain_blocked() {
        let g = Admg::from_names(&[], &[("A", "B"), ("B", "C")], &[]).unwrap();
        assert!(g.m_separated(&set(&g, &["A"]), &set(&g, &["C"]), &set(&g, &["B"])).unwrap());
        assert!(!g.m_separated(&set(&g, &["A"]), &set(&g, &["C"]), &VertexSet::new()).unwrap());
    }

    #[test]
    fn collider_opened_by_descendant() {
        let g = Admg::from_names(&[], &[("A", "B"), ("C", "B"), ("B", "D")], &[]).unwrap();
        let (a, c) = (set(&g, &["A"]), set(&g, &["C"]));
        assert!(g.m_separated(&a, &c, &VertexSet::new()).unwrap());
        assert!(!g.m_separated(&a, &c, &set(&g, &["D"])).unwrap());
    }

    #[test]
    fn instrument_projected() {
        let g = LatentDag::from_names(
            &["Z", "A", "Y"],
            &["C"],
            &[("Z", "A"), ("C", "A"), ("C", "Y"), ("A", "Y")],
        )
        .unwrap()
        .project();
        assert!(g.has_bidirected(1, 2));
        assert!(!g.m_separated(&set(&g, &["Z"]), &set(&g, &["Y"]), &set(&g, &["A"])).unwrap());
        assert!(!m_separated_by_paths(&g, &set(&g, &["Z"]), &set(&g, &["Y"]), &VertexSet::new()));
    }

    #[test]
    fn instrument_with_confounder_observed() {
        let g = Admg::from_names(&[], &[("Z", "A"), ("C", "A"), ("C", "Y"), ("A", "Y")], &[]).unwrap();
        assert!(g.m_separated(&set(&g, &["Z"]), &set(&g, &["C"]), &VertexSet::new()).unwrap());
    }

    #[test]
    fn overlapping_sets_rejected() {
        let g = Admg::from_names(&[], &[("A", "B")], &[]).unwrap();
        let a = set(&g, &["A"]);
        assert!(g.m_separated(&a, &a, &VertexSet::new()).is_err());
    }

    #[test]
    fn agrees_with_path_enumeration_up_to_four_vertices() {
        for n in 1..=4 {
            let triples = all_triples(n);
            for g in all_admgs(n) {
                for (x, y, z) in &triples {
                    let fast = g.m_separated(x, y, z).unwrap();
                    assert_eq!(fast, m_separated_by_paths(&g, x, y, z), "{g} {x:?} {y:?} {z:?}");
                    assert_eq!(fast, g.m_separated(y, x, z).unwrap());
                }
            }
        }
    }

    #[test]
    fn four_vertex_enumeration_size() {
        // 543 labelled DAGs times 64 bidirected subsets.
        assert_eq!(all_admgs(4).len(), 543 * 64);
        assert_eq!(all_admgs(3).len(), 25 * 8);
    }
}
