//! Checks that the joint type of separated blocks is a function of the
//! types of the individual blocks.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::separation::r_separates;
use super::types::{TypeError, TypeId, TypeTable};
use crate::graph::LabeledGraph;
use crate::report::{Check, Report};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeterminationError {
    #[error("block rank {block_rank} is below the joint rank {joint_rank}")]
    RankOrder { joint_rank: u32, block_rank: u32 },
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// A separator tuple and blocks of vertices in some graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub separator: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
}

/// Every instance with a separator of length `separator_len` and `k`
/// blocks of length `block_len`, entries drawn with repetition.
pub fn all_instances(n: usize, separator_len: usize, k: usize, block_len: usize) -> Vec<Instance> {
    let width = separator_len + k * block_len;
    let total = n.checked_pow(width as u32).unwrap_or(0);
    (0..total)
        .map(|code| {
            let entries: Vec<usize> = (0..width).map(|i| code / n.pow(i as u32) % n).collect();
            let separator = entries[..separator_len].to_vec();
            let blocks = entries[separator_len..].chunks(block_len.max(1)).take(k).map(<[usize]>::to_vec).collect();
            Instance { separator, blocks: if block_len == 0 { alloc::vec![Vec::new(); k] } else { blocks } }
        })
        .collect()
}

struct Seen {
    joint: TypeId,
    witness: String,
}

fn describe(g: &LabeledGraph, inst: &Instance) -> String {
    let names = |t: &[usize]| t.iter().map(|&v| g.name(v)).collect::<Vec<_>>().join(",");
    let blocks: Vec<String> = inst.blocks.iter().map(|b| format!("({})", names(b))).collect();
    format!("graph {:?} separator ({}) blocks {}", g.named_edges(), names(&inst.separator), blocks.join(" "))
}

/// Over all instances in which the separator `4^joint_rank`-separates the
/// blocks, tests whether the rank-`block_rank` types of separator plus each
/// block determine the rank-`joint_rank` type of separator plus all blocks.
pub fn check_determination<'g>(
    joint_rank: u32,
    block_rank: u32,
    instances: impl IntoIterator<Item = (&'g LabeledGraph, Instance)>,
) -> Result<Report, DeterminationError> {
    if block_rank < joint_rank {
        return Err(DeterminationError::RankOrder { joint_rank, block_rank });
    }
    let radius = 4usize.pow(joint_rank);
    let mut table = TypeTable::new(block_rank.max(joint_rank));
    let mut map: BTreeMap<Vec<TypeId>, Seen> = BTreeMap::new();
    let mut check = Check::new("determination");
    let (mut considered, mut separated) = (0usize, 0usize);
    for (g, inst) in instances {
        considered += 1;
        if !r_separates(&g.gaifman_adjacency(), &inst.separator, &inst.blocks, radius) {
            continue;
        }
        separated += 1;
        let mut scope = table.scope(g);
        let mut key = Vec::with_capacity(inst.blocks.len());
        for b in &inst.blocks {
            let tuple: Vec<usize> = inst.separator.iter().chain(b).copied().collect();
            key.push(scope.type_of(&tuple, block_rank)?);
        }
        let all: Vec<usize> = inst.separator.iter().chain(inst.blocks.iter().flatten()).copied().collect();
        let joint = scope.type_of(&all, joint_rank)?;
        match map.get(&key) {
            None => {
                map.insert(key, Seen { joint, witness: describe(g, &inst) });
            }
            Some(seen) if seen.joint != joint => {
                check.fail(format!("{} and {} share block types but differ jointly", seen.witness, describe(g, &inst)));
            }
            Some(_) => {}
        }
    }
    check.metric("instances", considered);
    check.metric("separated", separated);
    check.metric("classes", map.len());
    let mut report = Report::new();
    report.push(check);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn graphs(n: usize) -> Vec<LabeledGraph> {
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        (0..1u32 << pairs.len())
            .map(|mask| {
                let mut g = LabeledGraph::with_vertices(&names).unwrap();
                for (k, &(a, b)) in pairs.iter().enumerate() {
                    if mask >> k & 1 == 1 {
                        g.add_edge(a, b).unwrap();
                    }
                }
                g
            })
            .collect()
    }

    fn run(q: u32, big_q: u32, sep: usize, k: usize) -> Report {
        let gs: Vec<LabeledGraph> = (1..=4).flat_map(graphs).collect();
        let inputs = gs.iter().flat_map(|g| all_instances(g.vertex_count(), sep, k, 1).into_iter().map(move |i| (g, i)));
        check_determination(q, big_q, inputs).unwrap()
    }

    #[test]
    fn rank_one_is_determined_on_small_graphs() {
        let r = run(1, 2, 1, 2);
        assert!(r.passed(), "{:?}", r.failures());
        let c = r.check("determination").unwrap();
        let get = |k: &str| c.metrics.iter().find(|m| m.0 == k).map(|m| m.1.clone());
        assert!(matches!(get("separated"), Some(crate::report::Metric::Int(n)) if n > 100));
        assert!(matches!(get("classes"), Some(crate::report::Metric::Int(n)) if n > 10));
    }

    #[test]
    fn single_block_is_trivial_and_rank_zero_composes() {
        assert!(run(1, 1, 1, 1).passed());
        assert!(run(0, 0, 1, 2).passed());
    }

    #[test]
    fn low_block_rank_is_rejected() {
        let g = LabeledGraph::with_vertices(&["a"]).unwrap();
        let inst = Instance { separator: vec![], blocks: vec![vec![0]] };
        assert_eq!(
            check_determination(2, 1, [(&g, inst)]).unwrap_err(),
            DeterminationError::RankOrder { joint_rank: 2, block_rank: 1 }
        );
    }

    #[test]
    fn instance_enumeration() {
        let all = all_instances(3, 1, 2, 1);
        assert_eq!(all.len(), 27);
        assert!(all.iter().all(|i| i.separator.len() == 1 && i.blocks.len() == 2));
        assert_eq!(all_instances(2, 0, 2, 0), vec![Instance { separator: vec![], blocks: vec![vec![], vec![]] }]);
    }
}
