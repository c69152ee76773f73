//! Exhaustive enumeration of small ADMGs and separation queries.

use super::{Admg, VertexSet};

/// Every ADMG on `n` labelled vertices named A, B, C, ...
pub fn all_admgs(n: usize) -> Vec<Admg> {
    let names: Vec<String> = (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect();
    let ordered: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    let unordered: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let mut out = Vec::new();
    for dmask in 0u32..(1 << ordered.len()) {
        let directed: Vec<_> = (0..ordered.len())
            .filter(|i| dmask >> i & 1 == 1)
            .map(|i| ordered[i])
            .collect();
        for bmask in 0u32..(1 << unordered.len()) {
            let bidirected: Vec<_> = (0..unordered.len())
                .filter(|i| bmask >> i & 1 == 1)
                .map(|i| unordered[i])
                .collect();
            if let Ok(g) = Admg::new(names.clone(), directed.clone(), bidirected) {
                out.push(g);
            } else {
                break; // cyclic directed part; no bidirected set helps
            }
        }
    }
    out
}

/// Every (x, y, z) with x, y non-empty and pairwise disjoint.
pub fn all_triples(n: usize) -> Vec<(VertexSet, VertexSet, VertexSet)> {
    let mut out = Vec::new();
    for code in 0..4usize.pow(n as u32) {
        let mut sets = [VertexSet::new(), VertexSet::new(), VertexSet::new()];
        let mut c = code;
        for v in 0..n {
            let slot = c % 4;
            c /= 4;
            if slot < 3 {
                sets[slot].insert(v);
            }
        }
        if !sets[0].is_empty() && !sets[1].is_empty() {
            let [x, y, z] = sets;
            out.push((x, y, z));
        }
    }
    out
}
