//! Conversion of directed lacon-decompositions into undirected ones.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::{Arcs, Lacon, LaconError};
use crate::bitset::BitSet;
use crate::coloring::ReachMode;
use crate::graph::LinearOrder;
use crate::report::{Check, Report};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Converted {
    pub lacon: Lacon,
    /// For each output hidden vertex, the source hidden vertices it was
    /// derived from, strictly ascending in the source order.
    pub memories: Vec<Vec<usize>>,
}

impl Converted {
    /// Source hidden vertex an output hidden vertex was last derived from.
    pub fn corresponding(&self, h: usize) -> usize {
        *self.memories[h].last().expect("memories are non-empty")
    }
}

/// Undirected lacon-decomposition decoding to the same graph as `d`.
///
/// Source hidden vertices are processed in ascending order. Each one with a
/// nonempty neighborhood gets a copy joined to all its in- and out-neighbors,
/// followed by restricted copies of the vertices sharing a target with that
/// copy, which restore the earlier dominant vertices on pairs the copy must
/// not decide. Restricted copies of the new copy itself come first so that
/// the older vertices' copies override them.
pub fn directed_to_undirected(d: &Lacon) -> Result<Converted, LaconError> {
    convert(d, false)
}

/// Like [`directed_to_undirected`], but after each source vertex drops the
/// output vertices that are dominant for no pair. Copies of such a vertex
/// are never dominant either, so decoding is unchanged while the output
/// stays within one vertex per target pair plus the newest copies.
pub fn directed_to_undirected_pruned(d: &Lacon) -> Result<Converted, LaconError> {
    convert(d, true)
}

fn convert(d: &Lacon, prune: bool) -> Result<Converted, LaconError> {
    let Arcs::Directed { inbound, outbound } = d.arcs() else {
        return Err(LaconError::ExpectedKind("directed"));
    };
    let n = d.target_count();
    for t in 0..n {
        for u in t + 1..n {
            d.dominant(t, u)?;
        }
    }

    let mut neighborhoods: Vec<BitSet> = Vec::new();
    let mut labels: Vec<bool> = Vec::new();
    let mut memories: Vec<Vec<usize>> = Vec::new();
    for h in d.hidden_ascending() {
        let joined = inbound[h].union(&outbound[h]);
        if joined.is_empty() {
            continue;
        }
        let copy = neighborhoods.len();
        neighborhoods.push(joined);
        labels.push(d.label(h));
        memories.push(vec![h]);
        let only_out = outbound[h].difference(&inbound[h]);
        let only_in = inbound[h].difference(&outbound[h]);
        let snapshot: Vec<usize> = core::iter::once(copy)
            .chain((0..copy).filter(|&l| neighborhoods[l].intersects(&neighborhoods[copy])))
            .collect();
        for l in snapshot {
            for part in [&only_out, &only_in] {
                let restricted = neighborhoods[l].intersection(part);
                if restricted.is_empty() {
                    continue;
                }
                let mut memory = memories[l].clone();
                if l != copy {
                    memory.push(h);
                }
                neighborhoods.push(restricted);
                labels.push(labels[l]);
                memories.push(memory);
            }
        }
        if prune {
            let keep = dominant_mask(&neighborhoods, n);
            retain_marked(&mut neighborhoods, &keep);
            retain_marked(&mut labels, &keep);
            retain_marked(&mut memories, &keep);
        }
    }

    let mut out = Lacon::undirected();
    let mut taken: BTreeSet<String> = d.targets().iter().cloned().collect();
    for t in d.targets() {
        out.add_target(t)?;
    }
    let mut copies = vec![0usize; d.hidden_count()];
    for (i, memory) in memories.iter().enumerate() {
        let source = *memory.last().unwrap();
        let mut name = format!("{}_{}", d.hidden()[source], copies[source]);
        copies[source] += 1;
        while taken.contains(&name) {
            name.push('_');
        }
        taken.insert(name.clone());
        let h = out.add_hidden(&name, labels[i])?;
        for t in neighborhoods[i].iter() {
            out.connect(t, h)?;
        }
    }
    let mut seq: Vec<String> = out.hidden().to_vec();
    let mut targets: Vec<usize> = (0..n).collect();
    targets.sort_by_key(|&t| d.target_rank(t));
    seq.extend(targets.into_iter().map(|t| d.targets()[t].clone()));
    out.set_order(&LinearOrder::from_sequence(&seq)?)?;
    Ok(Converted { lacon: out, memories })
}

fn retain_marked<T>(items: &mut Vec<T>, keep: &[bool]) {
    let mut marks = keep.iter();
    items.retain(|_| *marks.next().unwrap());
}

/// Marks the neighborhoods that are the latest to contain some pair.
fn dominant_mask(neighborhoods: &[BitSet], n: usize) -> Vec<bool> {
    let mut covered = vec![BitSet::new(); n];
    let mut keep = vec![false; neighborhoods.len()];
    for (h, nb) in neighborhoods.iter().enumerate().rev() {
        for t in nb.iter() {
            if nb.iter().any(|u| u > t && !covered[t].contains(u)) {
                keep[h] = true;
                for u in nb.iter().filter(|&u| u > t) {
                    covered[t].insert(u);
                }
            }
        }
    }
    keep
}

/// Compares the coloring numbers of a converted lacon against
/// `4^col_2` times those of its source for radii `1..=r_max`, and checks the
/// per-vertex copy count, memory order, neighborhood containment and decode
/// equality.
pub fn check_lemma5_bounds(source: &Lacon, converted: &Converted, r_max: usize) -> Report {
    let before = source.ordered_graph();
    let after = converted.lacon.ordered_graph();
    let col2 = before.coloring_number(2, ReachMode::Strong);
    let factor = 4usize.saturating_pow(col2 as u32);
    let mut report = Report::new();

    for (mode, name) in [(ReachMode::Strong, "strong-coloring-bound"), (ReachMode::Weak, "weak-coloring-bound")] {
        let mut check = Check::new(name);
        let mut worst = 0.0f64;
        for r in 1..=r_max {
            let b = before.coloring_number(r, mode);
            let a = after.coloring_number(r, mode);
            if b > 0 {
                worst = worst.max(a as f64 / b as f64);
            }
            if a > factor.saturating_mul(b) {
                check.fail(format!("r={r}: {a} > {factor} * {b}"));
            }
        }
        check.metric("col2", col2);
        check.metric("factor", factor);
        check.metric("max_ratio", worst);
        report.push(check);
    }

    let mut multiplicity = Check::new("copy-multiplicity");
    let mut counts = vec![0usize; source.hidden_count()];
    for h in 0..converted.memories.len() {
        counts[converted.corresponding(h)] += 1;
    }
    for (h, &c) in counts.iter().enumerate() {
        if c > factor {
            multiplicity.fail(format!("{} has {c} copies, above {factor}", source.hidden()[h]));
        }
    }
    multiplicity.metric("max_copies", counts.iter().copied().max().unwrap_or(0));
    report.push(multiplicity);

    let mut memory = Check::new("memories");
    for (h, m) in converted.memories.iter().enumerate() {
        let name = &converted.lacon.hidden()[h];
        if m.is_empty() || m.windows(2).any(|w| source.hidden_rank(w[0]) >= source.hidden_rank(w[1])) {
            memory.fail(format!("{name}: memory is not strictly ascending"));
        }
        let own = converted.lacon.neighbors(h);
        if m.iter().any(|&s| !own.is_subset(&source.neighbors(s))) {
            memory.fail(format!("{name}: neighborhood leaves its sources' neighborhoods"));
        }
    }
    report.push(memory);

    let mut decode = Check::new("decode-preserved");
    match (source.decode(), converted.lacon.decode()) {
        (Ok(a), Ok(b)) => {
            for w in a.structural_difference(&b) {
                decode.fail(w);
            }
        }
        (Err(e), _) | (_, Err(e)) => decode.fail(e.to_string()),
    }
    report.push(decode);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k2() -> Lacon {
        let mut l = Lacon::directed();
        l.add_target("v1").unwrap();
        l.add_target("v2").unwrap();
        l.add_hidden("h", true).unwrap();
        l.arc_by_name("v1", "h").unwrap();
        l.arc_by_name("h", "v2").unwrap();
        l
    }

    fn members(l: &Lacon, h: usize) -> Vec<String> {
        l.neighbors(h).iter().map(|t| l.targets()[t].clone()).collect()
    }

    #[test]
    fn k2_gives_copy_and_two_restrictions() {
        let c = directed_to_undirected(&k2()).unwrap();
        let l = &c.lacon;
        assert_eq!(l.hidden_count(), 3);
        assert_eq!(members(l, 0), ["v1", "v2"]);
        assert_eq!(members(l, 1), ["v2"]);
        assert_eq!(members(l, 2), ["v1"]);
        assert!((0..3).all(|h| l.label(h)));
        assert_eq!(c.memories, vec![vec![0], vec![0], vec![0]]);
        assert_eq!(l.decode().unwrap().edge_count(), 1);
        let r = check_lemma5_bounds(&k2(), &c, 4);
        assert!(r.passed(), "{:?}", r.failures());
    }

    #[test]
    fn own_restrictions_do_not_override_older_vertices() {
        let mut l = Lacon::directed();
        for t in ["a", "b", "c"] {
            l.add_target(t).unwrap();
        }
        l.add_hidden("h0", false).unwrap();
        l.add_hidden("h1", true).unwrap();
        for t in ["a", "b", "c"] {
            l.arc_by_name(t, "h0").unwrap();
            l.arc_by_name("h0", t).unwrap();
        }
        l.arc_by_name("a", "h1").unwrap();
        l.arc_by_name("h1", "b").unwrap();
        l.arc_by_name("h1", "c").unwrap();
        let g = l.decode().unwrap();
        assert_eq!(g.edge_count(), 2);
        let c = directed_to_undirected(&l).unwrap();
        assert!(c.lacon.decode().unwrap().same_structure(&g));
        assert!(check_lemma5_bounds(&l, &c, 4).passed());
    }

    #[test]
    fn pruning_drops_shadowed_copies() {
        let c = directed_to_undirected_pruned(&k2()).unwrap();
        assert_eq!(c.lacon.hidden_count(), 1);
        assert_eq!(members(&c.lacon, 0), ["v1", "v2"]);
        let mut l = k2();
        l.add_hidden("late", false).unwrap();
        l.arc_by_name("v1", "late").unwrap();
        assert_eq!(l.pruned().hidden(), ["h"]);
    }

    #[test]
    fn hidden_free_input_has_ratio_one() {
        let mut l = Lacon::directed();
        l.add_target("only").unwrap();
        let c = directed_to_undirected(&l).unwrap();
        assert_eq!(c.lacon.hidden_count(), 0);
        let r = check_lemma5_bounds(&l, &c, 4);
        assert!(r.passed());
        let ratio = r.check("strong-coloring-bound").unwrap().metrics.iter().find(|m| m.0 == "max_ratio").unwrap().1.clone();
        assert_eq!(ratio, crate::report::Metric::Float(1.0));
    }

    #[test]
    fn empty_neighborhoods_are_skipped_and_undirected_input_rejected() {
        let mut l = k2();
        l.add_hidden("idle", false).unwrap();
        let c = directed_to_undirected(&l).unwrap();
        assert_eq!(c.lacon.hidden_count(), 3);
        assert_eq!(directed_to_undirected(&Lacon::undirected()), Err(LaconError::ExpectedKind("directed")));
    }

    /// Random directed lacon whose lowest hidden vertex joins every pair.
    pub(crate) fn random_directed(targets: usize, arcs: &[(bool, bool, bool)], hidden: usize) -> Lacon {
        let mut l = Lacon::directed();
        for t in 0..targets {
            l.add_target(&format!("t{t}")).unwrap();
        }
        for h in 0..hidden {
            let label = arcs[h * targets].2;
            l.add_hidden(&format!("h{h}"), label).unwrap();
            for t in 0..targets {
                let (i, o, _) = arcs[h * targets + t];
                if i || h == 0 {
                    l.arc_in(t, h).unwrap();
                }
                if o || h == 0 {
                    l.arc_out(h, t).unwrap();
                }
            }
        }
        l
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn conversion_preserves_decode(
            targets in 1usize..=5,
            hidden in 1usize..=4,
            arcs in proptest::collection::vec(any::<(bool, bool, bool)>(), 20),
        ) {
            let l = random_directed(targets, &arcs, hidden);
            let c = directed_to_undirected(&l).unwrap();
            let r = check_lemma5_bounds(&l, &c, 4);
            prop_assert!(r.passed(), "{:?}", r.failures());
            prop_assert!(c.lacon.verify(Some(&l.decode().unwrap())).passed());
            let p = directed_to_undirected_pruned(&l).unwrap();
            let r = check_lemma5_bounds(&l, &p, 4);
            prop_assert!(r.passed(), "{:?}", r.failures());
            prop_assert!(p.lacon.hidden_count() <= c.lacon.hidden_count());
            let smaller = l.pruned();
            prop_assert!(smaller.decode().unwrap().same_structure(&l.decode().unwrap()));
            prop_assert!(smaller.verify(None).passed());
        }
    }
}
