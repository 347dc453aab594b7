//! Enumeration of all small coherence spaces and all of their totalities.

use crate::bits::BitSet;
use crate::error::Result;
use crate::space::{Space, Token};
use crate::totality::TotalityView;
use std::collections::BTreeSet;
use std::sync::Arc;

fn edge_list(n: usize) -> Vec<(Token, Token)> {
    (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// Smallest edge mask among relabellings.
fn canonical_mask(n: usize, mask: u64, perms: &[Vec<usize>]) -> u64 {
    let edges = edge_list(n);
    let pos = |i: usize, j: usize| {
        edges
            .iter()
            .position(|&e| e == (i.min(j), i.max(j)))
            .unwrap()
    };
    perms
        .iter()
        .map(|p| {
            edges
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .fold(0u64, |m, (_, &(i, j))| m | 1 << pos(p[i], p[j]))
        })
        .min()
        .unwrap()
}

/// Coherence spaces on exactly `n` tokens named t0, t1, ..; one per
/// isomorphism class when `iso_classes` is set.
pub fn spaces_on(n: usize, iso_classes: bool) -> Vec<Arc<Space>> {
    let edges = edge_list(n);
    let perms = permutations(n);
    let labels: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0..(1u64 << edges.len()) {
        if iso_classes && !seen.insert(canonical_mask(n, mask, &perms)) {
            continue;
        }
        let pairs: Vec<(Token, Token)> = edges
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let name = format!("G{n}_{mask}");
        out.push(Space::atom(&name, labels.clone(), &pairs).expect("valid pairs"));
    }
    out
}

/// Spaces on 0..=max tokens.
pub fn spaces_up_to(max: usize, iso_classes: bool) -> Vec<Arc<Space>> {
    (0..=max).flat_map(|n| spaces_on(n, iso_classes)).collect()
}

/// Every nonempty totality on a finite space.
///
/// A clique and an anti-clique meet in at most one token, so B⊥ is the
/// intersection of the sets {a : a∩c ≠ ∅} over c ∈ B. The totalities are
/// therefore the intersection closure of these basic sets, starting from the
/// set of all cliques.
pub fn all_totalities(space: &Arc<Space>) -> Result<Vec<TotalityView>> {
    let cliques = space.cliques(usize::MAX);
    let basic: Vec<BitSet> = space
        .anti_cliques()
        .iter()
        .map(|c| {
            cliques
                .iter()
                .enumerate()
                .filter(|(_, a)| a.intersects(c))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let mut closed: BTreeSet<BitSet> = BTreeSet::new();
    let mut frontier = vec![BitSet::full(cliques.len())];
    while let Some(t) = frontier.pop() {
        if !closed.insert(t.clone()) {
            continue;
        }
        for b in &basic {
            let next = t.intersection(b);
            if !closed.contains(&next) {
                frontier.push(next);
            }
        }
    }
    closed
        .into_iter()
        .filter(|t| !t.is_empty())
        .map(|t| {
            let gens: Vec<BitSet> = t.iter().map(|i| cliques[i].clone()).collect();
            TotalityView::from_generators(space, &gens)
        })
        .collect()
}

/// All (space, nonempty totality) views on at most `max` tokens.
pub fn views_up_to(max: usize, iso_classes: bool) -> Result<Vec<TotalityView>> {
    let mut out = Vec::new();
    for s in spaces_up_to(max, iso_classes) {
        out.extend(all_totalities(&s)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_counts() {
        let labelled: Vec<usize> = (0..=4).map(|n| spaces_on(n, false).len()).collect();
        assert_eq!(labelled, vec![1, 1, 2, 8, 64]);
        // unlabelled simple graphs on 0..4 vertices
        let iso: Vec<usize> = (0..=4).map(|n| spaces_on(n, true).len()).collect();
        assert_eq!(iso, vec![1, 1, 2, 4, 11]);
    }

    #[test]
    fn totalities_are_closed_and_distinct() {
        for s in spaces_up_to(3, true) {
            let views = all_totalities(&s).unwrap();
            let distinct: BTreeSet<Vec<BitSet>> =
                views.iter().map(|v| v.total().to_vec()).collect();
            assert_eq!(distinct.len(), views.len());
            for v in &views {
                let again = TotalityView::from_generators(&s, v.total()).unwrap();
                assert_eq!(again.total(), v.total());
            }
        }
    }

    #[test]
    fn f2_totalities() {
        let s = Space::atom_named("F2", &["p", "q"], &[]).unwrap();
        let got: Vec<String> = all_totalities(&s)
            .unwrap()
            .iter()
            .map(|v| {
                v.total()
                    .iter()
                    .map(|a| s.set_label(a))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        // all cliques; {p} only; {q} only; {p},{q}
        let mut want = vec!["{} {p} {q}", "{p}", "{q}", "{p} {q}"];
        want.sort();
        let mut got = got;
        got.sort();
        assert_eq!(got, want);
    }
}
