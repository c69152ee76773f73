//! Latent projection and its inverse, the canonical latent DAG.

use std::collections::{BTreeSet, HashSet};

use super::{Admg, LatentDag};

impl LatentDag {
    /// Observed vertices reachable from `start` along directed paths whose
    /// intermediate vertices are all latent.
    fn observed_reach(&self, start: usize, children: &[Vec<usize>]) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut seen = HashSet::new();
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &c in &children[v] {
                if self.is_latent(c) {
                    if seen.insert(c) {
                        stack.push(c);
                    }
                } else {
                    out.insert(c);
                }
            }
        }
        out
    }

    /// Projects out the latent vertices.
    ///
    /// `X -> Y` survives if some directed path from X to Y has only latent
    /// intermediates; `X <-> Y` appears if some latent reaches both X and Y
    /// through latent-only directed paths.
    pub fn project(&self) -> Admg {
        let mut children = vec![Vec::new(); self.len()];
        for (p, c) in self.directed_edges() {
            children[p].push(c);
        }
        let observed = self.observed();
        let mut position = vec![usize::MAX; self.len()];
        for (i, &v) in observed.iter().enumerate() {
            position[v] = i;
        }

        let mut directed = BTreeSet::new();
        for &x in &observed {
            for y in self.observed_reach(x, &children) {
                directed.insert((position[x], position[y]));
            }
        }
        let mut bidirected = BTreeSet::new();
        for l in self.latents() {
            let reach: Vec<usize> = self.observed_reach(l, &children).into_iter().collect();
            for (i, &a) in reach.iter().enumerate() {
                for &b in &reach[i + 1..] {
                    bidirected.insert((position[a], position[b]));
                }
            }
        }
        let names = observed.iter().map(|&v| self.name(v).to_string()).collect();
        Admg::new(names, directed, bidirected).expect("projection of a DAG is acyclic")
    }

    /// The same DAG with every vertex treated as observed.
    pub fn as_dag(&self) -> Admg {
        Admg::new(self.names().to_vec(), self.directed_edges(), []).expect("valid DAG")
    }
}

impl Admg {
    /// Replaces every bidirected edge `X <-> Y` by a fresh latent parent
    /// `U_XY` of X and Y.
    pub fn canonical_dag(&self) -> LatentDag {
        let mut names: Vec<String> = self.names().to_vec();
        let mut taken: HashSet<String> = names.iter().cloned().collect();
        let mut latent = vec![false; names.len()];
        let mut directed: Vec<(usize, usize)> = self.directed_edges().collect();
        for (a, b) in self.bidirected_edges() {
            let base = format!("U_{}{}", self.name(a), self.name(b));
            let mut name = base.clone();
            let mut k = 2;
            while taken.contains(&name) {
                name = format!("{base}_{k}");
                k += 1;
            }
            taken.insert(name.clone());
            names.push(name);
            latent.push(true);
            let u = names.len() - 1;
            directed.push((u, a));
            directed.push((u, b));
        }
        LatentDag::new(names, latent, directed).expect("canonical DAG of a valid ADMG is valid")
    }
}
