//! Separation of vertex tuples by a separator tuple.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::formula::{var, Formula, Var};

/// Distances from `sources` in the graph with `blocked` removed, truncated
/// at `radius`; unreached vertices get `usize::MAX`.
pub fn distances_avoiding(adj: &[Vec<usize>], blocked: &[usize], sources: &[usize], radius: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if !blocked.contains(&s) && dist[s] == usize::MAX {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(w) = queue.pop_front() {
        if dist[w] >= radius {
            continue;
        }
        for &x in &adj[w] {
            if dist[x] == usize::MAX && !blocked.contains(&x) {
                dist[x] = dist[w] + 1;
                queue.push_back(x);
            }
        }
    }
    dist
}

/// Whether every path of length at most `radius` between entries of two
/// different parts meets `separator`. Empty parts are trivially separated.
pub fn r_separates(adj: &[Vec<usize>], separator: &[usize], parts: &[Vec<usize>], radius: usize) -> bool {
    for (i, a) in parts.iter().enumerate() {
        if parts[i + 1..].iter().all(Vec::is_empty) {
            break;
        }
        let dist = distances_avoiding(adj, separator, a, radius);
        for b in &parts[i + 1..] {
            if b.iter().any(|&v| dist[v] != usize::MAX) {
                return false;
            }
        }
    }
    true
}

/// Same as [`r_separates`] on the Gaifman graph of `g`.
pub fn r_separates_in(g: &crate::LabeledGraph, separator: &[usize], parts: &[Vec<usize>], radius: usize) -> bool {
    r_separates(&g.gaifman_adjacency(), separator, parts, radius)
}

/// Formula in the variables `x1..xk`, `y1..yl` and `z` that holds exactly
/// when `z` is within distance `t` of some `yi` along a path avoiding every
/// `xj`. Uses `t - 1` nested existential quantifiers.
pub fn neighborhood_formula(t: usize, separator_len: usize, block_len: usize) -> Formula {
    let avoid: Vec<Var> = (1..=separator_len).map(|i| format!("x{i}")).collect();
    let centers: Vec<Var> = (1..=block_len).map(|i| format!("y{i}")).collect();
    Formula::Near { radius: t, avoid, centers, target: var("z") }.expand_near()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::eval::eval_named;
    use crate::LabeledGraph;

    fn path(names: &[&str]) -> LabeledGraph {
        let mut g = LabeledGraph::with_vertices(names).unwrap();
        for i in 1..names.len() {
            g.add_edge(i - 1, i).unwrap();
        }
        g
    }

    #[test]
    fn path_separation() {
        let g = path(&["v1", "v2", "v3", "v4", "v5"]);
        let adj = g.gaifman_adjacency();
        assert!(r_separates(&adj, &[2], &[vec![0], vec![4]], 4));
        assert!(!r_separates(&adj, &[], &[vec![0], vec![4]], 4));
        assert!(r_separates(&adj, &[], &[vec![0], vec![4]], 3));
        assert!(r_separates(&adj, &[], &[vec![0], vec![]], 9));
        assert!(!r_separates(&adj, &[], &[vec![0, 1], vec![1]], 0));
        assert!(r_separates(&adj, &[1], &[vec![0, 1], vec![1]], 0));
    }

    #[test]
    fn neighborhood_formula_examples() {
        let g = path(&["a", "b", "c"]);
        let f1 = neighborhood_formula(1, 1, 1);
        assert!(!eval_named(&g, &f1, &[("x1", "b"), ("y1", "a"), ("z", "c")]).unwrap());
        let f2 = neighborhood_formula(2, 0, 1);
        assert!(eval_named(&g, &f2, &[("y1", "a"), ("z", "c")]).unwrap());
        let f0 = neighborhood_formula(0, 1, 2);
        assert!(eval_named(&g, &f0, &[("x1", "b"), ("y1", "a"), ("y2", "c"), ("z", "c")]).unwrap());
        assert!(!eval_named(&g, &f0, &[("x1", "c"), ("y1", "a"), ("y2", "c"), ("z", "c")]).unwrap());
        assert_eq!(neighborhood_formula(3, 1, 1).quantifier_rank(), 2);
    }
}
