//! Exhaustive enumeration of atoms (minimal zero-sum sequences) over a
//! support, and brute-force Davenport constants.
//!
//! The walker explores zero-sum-free sequences `T` whose support indices are
//! nondecreasing, carrying the subsequence-sum bitset incrementally. At each
//! node the unique closing element `g = −σ(T)` is looked up; `T·g` is emitted
//! as an atom iff `g`'s index is ≥ every index used in `T`. Removing one copy
//! of an atom's highest-indexed element recovers its unique generating `T`,
//! so each atom is produced exactly once and no hashing is needed.

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::seq::{Support, SupportCtx};
use crate::Limits;
use std::collections::BTreeMap;

/// All atoms over one support up to a length bound, grouped by length.
///
/// `complete == false` means the node budget ran out and the listing is a
/// subset; it is never silently truncated.
#[derive(Debug, Clone)]
pub struct AtomSet {
    support: Support,
    max_len: u32,
    complete: bool,
    nodes_visited: u64,
    atoms_by_length: BTreeMap<u32, Vec<Vec<u32>>>,
}

impl AtomSet {
    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn max_len(&self) -> u32 {
        self.max_len
    }

    pub fn complete(&self) -> bool {
        self.complete
    }

    pub fn nodes_visited(&self) -> u64 {
        self.nodes_visited
    }

    /// Atoms grouped by length; within a length, multiplicity vectors are in
    /// lexicographic order, so downstream output is reproducible.
    pub fn atoms_by_length(&self) -> &BTreeMap<u32, Vec<Vec<u32>>> {
        &self.atoms_by_length
    }

    pub fn total(&self) -> usize {
        self.atoms_by_length.values().map(Vec::len).sum()
    }

    pub fn max_length_present(&self) -> Option<u32> {
        self.atoms_by_length.keys().next_back().copied()
    }
}

enum Goal {
    /// Collect all atoms of length ≤ bound (bound on |T| is length − 1).
    Collect { max_len: u32 },
    /// Track only the longest closing (Davenport constant of the support).
    LongestAtom,
    /// Track only the longest zero-sum-free `T`.
    LongestZeroSumFree,
}

struct Walker<'a> {
    ctx: &'a SupportCtx,
    goal: Goal,
    budget: u64,
    nodes: u64,
    complete: bool,
    mult: Vec<u32>,
    atoms: BTreeMap<u32, Vec<Vec<u32>>>,
    best_atom_len: u32,
    best_zsf_len: u32,
}

impl<'a> Walker<'a> {
    fn new(ctx: &'a SupportCtx, goal: Goal, budget: u64) -> Walker<'a> {
        Walker {
            ctx,
            goal,
            budget,
            nodes: 0,
            complete: true,
            mult: vec![0; ctx.elem_idx.len()],
            atoms: BTreeMap::new(),
            best_atom_len: 0,
            best_zsf_len: 0,
        }
    }

    fn t_cap(&self) -> Option<u32> {
        match self.goal {
            Goal::Collect { max_len } => Some(max_len.saturating_sub(1)),
            _ => None,
        }
    }

    fn run(&mut self) {
        let sums = BitSet::new(self.ctx.order);
        self.node(0, &sums, 0, 0);
    }

    fn node(&mut self, frontier: usize, sums: &BitSet, sum_idx: usize, len: u32) {
        if self.nodes >= self.budget {
            self.complete = false;
            return;
        }
        self.nodes += 1;
        self.best_zsf_len = self.best_zsf_len.max(len);

        if len >= 1 {
            self.try_close(frontier, sum_idx, len);
        }

        if let Some(cap) = self.t_cap() {
            if len >= cap {
                return;
            }
        }
        for j in frontier..self.ctx.elem_idx.len() {
            // T·g stays zero-sum free iff −g is not already a subsequence sum.
            let neg_g = self.ctx.neg[self.ctx.elem_idx[j]] as usize;
            if sums.get(neg_g) {
                continue;
            }
            let mut with_zero = sums.clone();
            with_zero.set(0);
            let mut child = sums.clone();
            child.or_permuted(&with_zero, &self.ctx.perms[j]);
            let child_sum = self.ctx.perms[j][sum_idx] as usize;
            self.mult[j] += 1;
            self.node(j, &child, child_sum, len + 1);
            self.mult[j] -= 1;
            if !self.complete {
                return;
            }
        }
    }

    fn try_close(&mut self, frontier: usize, sum_idx: usize, len: u32) {
        let closing = self.ctx.neg[sum_idx] as usize;
        let Some(pos) = self.ctx.support_pos[closing] else {
            return;
        };
        let pos = pos as usize;
        if pos < frontier {
            return;
        }
        let atom_len = len + 1;
        match self.goal {
            Goal::Collect { max_len } => {
                if atom_len <= max_len {
                    let mut v = self.mult.clone();
                    v[pos] += 1;
                    self.atoms.entry(atom_len).or_default().push(v);
                }
            }
            Goal::LongestAtom => {
                self.best_atom_len = self.best_atom_len.max(atom_len);
            }
            Goal::LongestZeroSumFree => {}
        }
    }
}

/// Enumerates exactly the atoms over `support` of length ≤ `max_len`.
pub fn enumerate_atoms(support: &Support, max_len: u32, node_budget: u64) -> AtomSet {
    assert!(max_len >= 1, "max_len must be positive");
    let ctx = SupportCtx::new(support);
    let mut w = Walker::new(&ctx, Goal::Collect { max_len }, node_budget);
    w.run();
    let mut atoms = w.atoms;
    for v in atoms.values_mut() {
        v.sort_unstable();
    }
    AtomSet {
        support: support.clone(),
        max_len,
        complete: w.complete,
        nodes_visited: w.nodes,
        atoms_by_length: atoms,
    }
}

/// `D(G₀)`: the maximal atom length over the given support.
pub fn davenport_of_support(support: &Support, node_budget: u64) -> Result<u32> {
    let ctx = SupportCtx::new(support);
    let mut w = Walker::new(&ctx, Goal::LongestAtom, node_budget);
    w.run();
    if !w.complete {
        return Err(Error::BudgetExceeded { budget: node_budget });
    }
    Ok(w.best_atom_len)
}

/// Maximal length of a zero-sum-free sequence over `G ∖ {0}`.
pub fn max_zero_sum_free_length(group: &crate::Group, limits: &Limits) -> Result<u32> {
    let support = Support::full(group, limits.max_elements)?;
    let ctx = SupportCtx::new(&support);
    let mut w = Walker::new(&ctx, Goal::LongestZeroSumFree, limits.node_budget);
    w.run();
    if !w.complete {
        return Err(Error::BudgetExceeded { budget: limits.node_budget });
    }
    Ok(w.best_zsf_len)
}

/// Brute-force Davenport constant `D(G)`, one more than the longest
/// zero-sum-free sequence.
pub fn davenport(group: &crate::Group, limits: &Limits) -> Result<u32> {
    Ok(max_zero_sum_free_length(group, limits)? + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Group, GroupElement};
    use std::collections::BTreeSet;
    use std::sync::Arc;

    fn grp(factors: &[u64]) -> Group {
        Group::new(factors.to_vec()).unwrap()
    }

    fn support(g: &Group, coords: &[&[u64]]) -> Support {
        let elems = coords.iter().map(|c| g.element(c.to_vec()).unwrap()).collect();
        Support::new(g.clone(), elems).unwrap()
    }

    const BUDGET: u64 = 100_000_000;

    #[test]
    fn atoms_over_single_generator_of_c4() {
        let g = grp(&[4]);
        let s = support(&g, &[&[1]]);
        let set = enumerate_atoms(&s, 4, BUDGET);
        assert!(set.complete());
        assert_eq!(set.total(), 1);
        assert_eq!(set.atoms_by_length()[&4], vec![vec![4]]);
    }

    #[test]
    fn atoms_over_two_elements_of_c4() {
        let g = grp(&[4]);
        let s = support(&g, &[&[1], &[2]]);
        let set = enumerate_atoms(&s, 4, BUDGET);
        assert_eq!(set.atoms_by_length()[&2], vec![vec![0, 2]]);
        assert_eq!(set.atoms_by_length()[&3], vec![vec![2, 1]]);
        assert_eq!(set.atoms_by_length()[&4], vec![vec![4, 0]]);
        assert_eq!(set.total(), 3);
    }

    #[test]
    fn atoms_over_klein_four_triple() {
        let g = grp(&[2, 2]);
        let s = support(&g, &[&[1, 0], &[0, 1], &[1, 1]]);
        let set = enumerate_atoms(&s, 3, BUDGET);
        assert_eq!(
            set.atoms_by_length()[&2],
            vec![vec![0, 0, 2], vec![0, 2, 0], vec![2, 0, 0]]
        );
        assert_eq!(set.atoms_by_length()[&3], vec![vec![1, 1, 1]]);
        assert_eq!(set.total(), 4);
    }

    #[test]
    fn every_enumerated_atom_passes_is_atom() {
        let g = grp(&[3, 3]);
        let s = Support::full(&g, 4096).unwrap();
        let arc = Arc::new(s.clone());
        let set = enumerate_atoms(&s, 5, BUDGET);
        assert!(set.complete());
        for (len, atoms) in set.atoms_by_length() {
            for m in atoms {
                let z = crate::ZSequence::new(Arc::clone(&arc), m.clone()).unwrap();
                assert_eq!(z.length(), *len as u64);
                assert!(z.is_atom(), "{z}");
            }
        }
    }

    /// Completeness oracle: direct scan of all bounded multiplicity vectors
    /// through the definitional atom check.
    fn atoms_by_direct_filter(s: &Support, max_len: u32) -> BTreeSet<Vec<u32>> {
        let arc = Arc::new(s.clone());
        let k = s.len();
        let mut out = BTreeSet::new();
        let mut mult = vec![0u32; k];
        loop {
            let total: u32 = mult.iter().sum();
            if total >= 1 && total <= max_len {
                let z = crate::ZSequence::new(Arc::clone(&arc), mult.clone()).unwrap();
                if z.is_atom_by_exhaustion() {
                    out.insert(mult.clone());
                }
            }
            let mut j = 0;
            loop {
                if j == k {
                    return out;
                }
                if mult[j] < max_len {
                    mult[j] += 1;
                    if mult.iter().map(|&v| v as u64).sum::<u64>() <= max_len as u64 {
                        break;
                    }
                    mult[j] = 0;
                    j += 1;
                } else {
                    mult[j] = 0;
                    j += 1;
                }
            }
        }
    }

    #[test]
    fn enumeration_matches_direct_filter() {
        let cases: Vec<(Group, Vec<Vec<u64>>)> = vec![
            (grp(&[4]), vec![vec![1], vec![2], vec![3]]),
            (grp(&[2, 2]), vec![vec![1, 0], vec![0, 1], vec![1, 1]]),
            (grp(&[2, 4]), vec![vec![1, 0], vec![0, 1], vec![1, 2]]),
            (grp(&[9]), vec![vec![3], vec![6], vec![1]]),
        ];
        for (g, coords) in cases {
            let refs: Vec<&[u64]> = coords.iter().map(|c| c.as_slice()).collect();
            let s = support(&g, &refs);
            let max_len = crate::formulas::d_star(&g) as u32;
            let set = enumerate_atoms(&s, max_len, BUDGET);
            let got: BTreeSet<Vec<u32>> =
                set.atoms_by_length().values().flatten().cloned().collect();
            assert_eq!(got, atoms_by_direct_filter(&s, max_len), "G={g}");
        }
    }

    #[test]
    fn enumeration_invariant_under_support_permutation() {
        let g = grp(&[2, 4]);
        let orders: [&[&[u64]]; 2] = [
            &[&[1, 0], &[0, 1], &[1, 1]],
            &[&[1, 1], &[1, 0], &[0, 1]],
        ];
        let canonical = |s: &Support, set: &AtomSet| -> BTreeSet<Vec<(GroupElement, u32)>> {
            set.atoms_by_length()
                .values()
                .flatten()
                .map(|m| {
                    let mut terms: Vec<(GroupElement, u32)> = s
                        .elements()
                        .iter()
                        .cloned()
                        .zip(m.iter().copied())
                        .filter(|(_, v)| *v > 0)
                        .collect();
                    terms.sort();
                    terms
                })
                .collect()
        };
        let s0 = support(&g, orders[0]);
        let s1 = support(&g, orders[1]);
        let a0 = enumerate_atoms(&s0, 5, BUDGET);
        let a1 = enumerate_atoms(&s1, 5, BUDGET);
        assert_eq!(canonical(&s0, &a0), canonical(&s1, &a1));
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let g = grp(&[3, 3]);
        let s = Support::full(&g, 4096).unwrap();
        let set = enumerate_atoms(&s, 5, 10);
        assert!(!set.complete());
        assert!(set.nodes_visited() <= 10);
    }

    #[test]
    fn max_zero_sum_free_length_examples() {
        let limits = Limits::default();
        assert_eq!(max_zero_sum_free_length(&grp(&[4]), &limits).unwrap(), 3);
        assert_eq!(max_zero_sum_free_length(&grp(&[2, 2]), &limits).unwrap(), 2);
        assert_eq!(max_zero_sum_free_length(&grp(&[3, 3]), &limits).unwrap(), 4);
    }

    #[test]
    fn davenport_examples() {
        let limits = Limits::default();
        assert_eq!(davenport(&grp(&[5]), &limits).unwrap(), 5);
        assert_eq!(davenport(&grp(&[2, 2]), &limits).unwrap(), 3);
        assert_eq!(davenport(&grp(&[3, 3]), &limits).unwrap(), 5);
    }

    #[test]
    fn davenport_of_support_examples() {
        let g = grp(&[4]);
        assert_eq!(davenport_of_support(&support(&g, &[&[1]]), BUDGET).unwrap(), 4);
        assert_eq!(davenport_of_support(&support(&g, &[&[2]]), BUDGET).unwrap(), 2);
        assert_eq!(davenport_of_support(&support(&g, &[&[1], &[2]]), BUDGET).unwrap(), 4);
    }

    #[test]
    fn zero_sum_free_lengths_respect_davenport() {
        // |S| ≤ D(G) − 1 for zero-sum-free S: spot-check via enumeration.
        let limits = Limits::default();
        for factors in [vec![4u64], vec![2, 2], vec![6], vec![3, 3]] {
            let g = grp(&factors);
            let d = davenport(&g, &limits).unwrap();
            assert_eq!(max_zero_sum_free_length(&g, &limits).unwrap(), d - 1);
        }
    }

    #[test]
    fn group_too_large_for_brute_force() {
        let g = grp(&[2, 4096]);
        assert!(matches!(
            davenport(&g, &Limits::default()),
            Err(Error::GroupTooLarge { .. })
        ));
    }
}
