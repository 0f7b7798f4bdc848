//! Unordered sequences over a support, stored as exponent vectors, with
//! subsequence-sum sets and the zero-sum / atom predicates.

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::group::{Group, GroupElement, Indexer};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Hard ceiling on the order of groups whose elements we materialize as
/// bitset indices. Everything sequence-shaped lives below this.
pub const MAX_SUPPORT_GROUP_ORDER: u128 = 1 << 24;

/// An ordered set `G₀` of distinct nonzero group elements.
///
/// The identity is excluded: the only atom through 0 is the singleton `0`,
/// whose exponent vector never interacts with any other atom, so supports
/// containing it cannot realize a maximal separating atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Support {
    group: Group,
    elements: Vec<GroupElement>,
}

impl Support {
    pub fn new(group: Group, elements: Vec<GroupElement>) -> Result<Support> {
        let order = group.order();
        if order > MAX_SUPPORT_GROUP_ORDER {
            return Err(Error::GroupTooLarge { order, cap: MAX_SUPPORT_GROUP_ORDER });
        }
        let mut seen = BTreeSet::new();
        for e in &elements {
            if !group.contains(e) {
                return Err(Error::GroupMismatch { left: group.rank(), right: e.coords().len() });
            }
            if e.is_identity() {
                return Err(Error::InvalidSupport("identity element not allowed".into()));
            }
            if !seen.insert(e.clone()) {
                return Err(Error::InvalidSupport(format!("duplicate element {e}")));
            }
        }
        Ok(Support { group, elements })
    }

    /// The full support `G ∖ {0}` in lexicographic element order.
    pub fn full(group: &Group, cap: usize) -> Result<Support> {
        let elements = group
            .enumerate_elements(cap)?
            .into_iter()
            .filter(|e| !e.is_identity())
            .collect();
        Support::new(group.clone(), elements)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position(&self, e: &GroupElement) -> Option<usize> {
        self.elements.iter().position(|x| x == e)
    }
}

/// Precomputed index-space tables for one support: everything the DFS and
/// subsequence-sum kernels need, with group elements replaced by indices.
#[derive(Debug, Clone)]
pub(crate) struct SupportCtx {
    pub(crate) order: usize,
    pub(crate) indexer: Indexer,
    /// Group index of each support element.
    pub(crate) elem_idx: Vec<usize>,
    /// Order of each support element.
    pub(crate) elem_ord: Vec<u64>,
    /// `perms[j][i]` = index of `element_at(i) + support[j]`.
    pub(crate) perms: Vec<Vec<u32>>,
    /// `neg[i]` = index of `-element_at(i)`.
    pub(crate) neg: Vec<u32>,
    /// Group index → support position, for closing-element lookups.
    pub(crate) support_pos: Vec<Option<u16>>,
}

impl SupportCtx {
    pub(crate) fn new(support: &Support) -> SupportCtx {
        let group = support.group();
        let indexer = Indexer::new(group);
        let order = indexer.order();
        let elem_idx: Vec<usize> =
            support.elements.iter().map(|e| indexer.index_of(e)).collect();
        let elem_ord: Vec<u64> = support
            .elements
            .iter()
            .map(|e| group.element_order(e).expect("support element validated"))
            .collect();
        let perms: Vec<Vec<u32>> =
            support.elements.iter().map(|e| indexer.translation(group, e)).collect();
        let neg = indexer.neg_table(group);
        let mut support_pos = vec![None; order];
        for (j, &gi) in elem_idx.iter().enumerate() {
            support_pos[gi] = Some(u16::try_from(j).expect("support size fits u16"));
        }
        SupportCtx { order, indexer, elem_idx, elem_ord, perms, neg, support_pos }
    }

    /// Set of nonempty subsequence sums of the multiset `mult`, as a bitset
    /// over element indices. One folding pass per support position; copies of
    /// an element beyond its order cannot produce new sums and are skipped.
    pub(crate) fn subsums(&self, mult: &[u32]) -> BitSet {
        let mut sums = BitSet::new(self.order);
        for (j, &v) in mult.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let reps = (v as u64).min(self.elem_ord[j]);
            let mut carry = sums.clone();
            carry.set(0);
            for _ in 0..reps {
                let mut next = BitSet::new(self.order);
                next.or_permuted(&carry, &self.perms[j]);
                sums.or_with(&next);
                carry = next;
            }
        }
        sums
    }

    /// True iff no nonempty submultiset of `mult` sums to the identity.
    pub(crate) fn is_zero_sum_free(&self, mult: &[u32]) -> bool {
        !self.subsums(mult).get(0)
    }

    /// Group index of `σ(mult)`.
    pub(crate) fn sum_index(&self, mult: &[u32]) -> usize {
        let mut idx = 0usize;
        for (j, &v) in mult.iter().enumerate() {
            let reps = (v as u64 % self.elem_ord[j]) as u32;
            for _ in 0..reps {
                idx = self.perms[j][idx] as usize;
            }
        }
        idx
    }
}

/// A sequence `S ∈ F(G₀)` as a multiplicity vector aligned with its support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZSequence {
    support: Arc<Support>,
    mult: Vec<u32>,
}

impl ZSequence {
    pub fn new(support: Arc<Support>, mult: Vec<u32>) -> Result<ZSequence> {
        if mult.len() != support.len() {
            return Err(Error::ArityMismatch { expected: support.len(), got: mult.len() });
        }
        Ok(ZSequence { support, mult })
    }

    pub fn empty(support: Arc<Support>) -> ZSequence {
        let mult = vec![0; support.len()];
        ZSequence { support, mult }
    }

    pub fn support(&self) -> &Arc<Support> {
        &self.support
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.mult
    }

    pub fn length(&self) -> u64 {
        self.mult.iter().map(|&v| v as u64).sum()
    }

    pub fn is_trivial(&self) -> bool {
        self.mult.iter().all(|&v| v == 0)
    }

    /// The sum `σ(S) = Σ v_g(S)·g`.
    pub fn sigma(&self) -> GroupElement {
        let group = self.support.group();
        let mut acc = group.identity();
        for (e, &v) in self.support.elements().iter().zip(&self.mult) {
            let scaled = group.scale(v as i64, e).expect("support element valid");
            acc = group.add(&acc, &scaled).expect("same group");
        }
        acc
    }

    /// `Σ(S)`: sums of all nonempty subsequences.
    pub fn subsequence_sums(&self, max_sequence_len: u64) -> Result<BTreeSet<GroupElement>> {
        let len = self.length();
        if len > max_sequence_len {
            return Err(Error::SequenceTooLong { len, cap: max_sequence_len });
        }
        let ctx = SupportCtx::new(&self.support);
        let bits = ctx.subsums(&self.mult);
        Ok(bits.iter_ones().map(|i| ctx.indexer.element_at(i)).collect())
    }

    /// `0 ∉ Σ(S)`; the empty sequence is zero-sum free.
    pub fn is_zero_sum_free(&self) -> bool {
        SupportCtx::new(&self.support).is_zero_sum_free(&self.mult)
    }

    /// Minimal zero-sum test: `S` is nontrivial, `σ(S) = 0`, and removing one
    /// copy of one fixed occurring term leaves a zero-sum-free sequence.
    ///
    /// The single removal suffices: a proper nontrivial zero-sum subsequence
    /// either misses a copy of the fixed term or its complement does, and
    /// either way it embeds in the removed-copy sequence.
    pub fn is_atom(&self) -> bool {
        if self.is_trivial() || !self.sigma().is_identity() {
            return false;
        }
        let j = self
            .mult
            .iter()
            .rposition(|&v| v > 0)
            .expect("nontrivial sequence has a term");
        let mut rest = self.mult.clone();
        rest[j] -= 1;
        SupportCtx::new(&self.support).is_zero_sum_free(&rest)
    }

    /// Definitional atom test: checks every proper nonempty submultiset
    /// directly. Exponential; kept as the independent oracle for `is_atom`.
    pub fn is_atom_by_exhaustion(&self) -> bool {
        if self.is_trivial() {
            return false;
        }
        let ctx = SupportCtx::new(&self.support);
        if ctx.sum_index(&self.mult) != 0 {
            return false;
        }
        no_proper_zero_subsum(&ctx, &self.mult)
    }
}

/// Walks all submultisets of `mult` with incremental sums; rejects when a
/// proper nonempty one sums to zero.
fn no_proper_zero_subsum(ctx: &SupportCtx, mult: &[u32]) -> bool {
    fn rec(ctx: &SupportCtx, mult: &[u32], j: usize, sum_idx: usize, proper: bool, nonempty: bool) -> bool {
        if j == mult.len() {
            return !(proper && nonempty && sum_idx == 0);
        }
        let mut idx = sum_idx;
        for take in 0..=mult[j] {
            let p = proper || take < mult[j];
            let ne = nonempty || take > 0;
            if !rec(ctx, mult, j + 1, idx, p, ne) {
                return false;
            }
            if take < mult[j] {
                idx = ctx.perms[j][idx] as usize;
            }
        }
        true
    }
    rec(ctx, mult, 0, 0, false, false)
}

impl fmt::Display for ZSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "ε");
        }
        let mut first = true;
        for (e, &v) in self.support.elements().iter().zip(&self.mult) {
            if v == 0 {
                continue;
            }
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{e}^{v}")?;
            first = false;
        }
        Ok(())
    }
}

impl Serialize for Support {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.elements.serialize(s)
    }
}

impl Serialize for ZSequence {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ZSequence", 2)?;
        st.serialize_field("support", &self.support.elements())?;
        st.serialize_field("mult", &self.mult)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grp(factors: &[u64]) -> Group {
        Group::new(factors.to_vec()).unwrap()
    }

    fn support(g: &Group, coords: &[&[u64]]) -> Arc<Support> {
        let elems = coords.iter().map(|c| g.element(c.to_vec()).unwrap()).collect();
        Arc::new(Support::new(g.clone(), elems).unwrap())
    }

    fn zseq(s: &Arc<Support>, mult: &[u32]) -> ZSequence {
        ZSequence::new(Arc::clone(s), mult.to_vec()).unwrap()
    }

    #[test]
    fn support_rejects_identity_and_duplicates() {
        let g = grp(&[2, 2]);
        let id = g.identity();
        assert!(Support::new(g.clone(), vec![id]).is_err());
        let e = g.element(vec![0, 1]).unwrap();
        assert!(Support::new(g.clone(), vec![e.clone(), e]).is_err());
    }

    #[test]
    fn sigma_examples() {
        let g = grp(&[2, 2]);
        let s = support(&g, &[&[1, 0], &[0, 1]]);
        assert!(zseq(&s, &[0, 0]).sigma().is_identity());
        assert!(zseq(&s, &[2, 2]).sigma().is_identity());

        let c4 = grp(&[4]);
        let s4 = support(&c4, &[&[1]]);
        assert_eq!(zseq(&s4, &[3]).sigma(), c4.element(vec![3]).unwrap());
    }

    #[test]
    fn subsequence_sum_examples() {
        let c2 = grp(&[2]);
        let s = support(&c2, &[&[1]]);
        assert!(zseq(&s, &[0]).subsequence_sums(64).unwrap().is_empty());
        let sums = zseq(&s, &[2]).subsequence_sums(64).unwrap();
        assert_eq!(sums.len(), 2); // {1, 0}

        // Oracle for S = 1·2 over C₄: the three nonempty submultisets sum to
        // 1, 2 and 3.
        let c4 = grp(&[4]);
        let s = support(&c4, &[&[1], &[2]]);
        let sums = zseq(&s, &[1, 1]).subsequence_sums(64).unwrap();
        let expect: BTreeSet<_> =
            [1u64, 2, 3].iter().map(|&c| c4.element(vec![c]).unwrap()).collect();
        assert_eq!(sums, expect);
    }

    #[test]
    fn sequence_cap_enforced() {
        let c2 = grp(&[2]);
        let s = support(&c2, &[&[1]]);
        assert!(matches!(
            zseq(&s, &[65]).subsequence_sums(64),
            Err(Error::SequenceTooLong { len: 65, cap: 64 })
        ));
    }

    #[test]
    fn zero_sum_free_examples() {
        let c4 = grp(&[4]);
        let s = support(&c4, &[&[1]]);
        assert!(zseq(&s, &[3]).is_zero_sum_free());
        assert!(!zseq(&s, &[4]).is_zero_sum_free());
        assert!(zseq(&s, &[0]).is_zero_sum_free());
    }

    #[test]
    fn atom_examples() {
        let c4 = grp(&[4]);
        let s = support(&c4, &[&[1]]);
        assert!(zseq(&s, &[4]).is_atom());
        assert!(!zseq(&s, &[2]).is_atom());

        let v4 = grp(&[2, 2]);
        let s = support(&v4, &[&[1, 0], &[0, 1], &[1, 1]]);
        assert!(!zseq(&s, &[2, 2, 0]).is_atom());
        assert!(zseq(&s, &[1, 1, 1]).is_atom());
    }

    #[test]
    fn atom_definitional_oracle_agrees_on_small_sequences() {
        // Cross-validate is_atom against the exhaustive definition on every
        // multiplicity vector of length ≤ 8 over supports of size ≤ 4.
        let cases: Vec<(Group, Vec<Vec<u64>>)> = vec![
            (grp(&[4]), vec![vec![1], vec![2]]),
            (grp(&[2, 2]), vec![vec![1, 0], vec![0, 1], vec![1, 1]]),
            (grp(&[6]), vec![vec![1], vec![2], vec![3], vec![4]]),
            (grp(&[2, 4]), vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![1, 2]]),
            (grp(&[3, 3]), vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 1]]),
        ];
        for (g, coords) in cases {
            let elems: Vec<GroupElement> =
                coords.iter().map(|c| g.element(c.clone()).unwrap()).collect();
            let s = Arc::new(Support::new(g.clone(), elems).unwrap());
            let k = s.len();
            let mut mult = vec![0u32; k];
            'vectors: loop {
                let total: u32 = mult.iter().sum();
                if total <= 8 {
                    let z = ZSequence::new(Arc::clone(&s), mult.clone()).unwrap();
                    assert_eq!(z.is_atom(), z.is_atom_by_exhaustion(), "G={g} S={z}");
                }
                // odometer over [0,8]^k
                let mut j = 0;
                loop {
                    if j == k {
                        break 'vectors;
                    }
                    if mult[j] < 8 {
                        mult[j] += 1;
                        break;
                    }
                    mult[j] = 0;
                    j += 1;
                }
            }
        }
    }

    #[test]
    fn removing_any_copy_of_an_atom_is_zero_sum_free() {
        let g = grp(&[2, 4]);
        let s = support(&g, &[&[1, 0], &[0, 1], &[1, 1]]);
        // (1,0)¹(0,1)³(1,1)¹ sums to zero and is an atom.
        let atom = zseq(&s, &[1, 3, 1]);
        assert!(atom.is_atom());
        for j in 0..3 {
            let mut m = atom.multiplicities().to_vec();
            if m[j] == 0 {
                continue;
            }
            m[j] -= 1;
            assert!(zseq(&s, &m).is_zero_sum_free(), "removed position {j}");
        }
    }

    #[test]
    fn display_form() {
        let g = grp(&[2, 2]);
        let s = support(&g, &[&[1, 0], &[0, 1]]);
        assert_eq!(zseq(&s, &[2, 1]).to_string(), "(1,0)^2 (0,1)^1");
        assert_eq!(zseq(&s, &[0, 0]).to_string(), "ε");
    }

    #[test]
    fn json_form() {
        let g = grp(&[2, 2]);
        let s = support(&g, &[&[1, 0], &[0, 1]]);
        let j = serde_json::to_value(zseq(&s, &[2, 1])).unwrap();
        assert_eq!(j["support"], serde_json::json!([[1, 0], [0, 1]]));
        assert_eq!(j["mult"], serde_json::json!([2, 1]));
    }
}
