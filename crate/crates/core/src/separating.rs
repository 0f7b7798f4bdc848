//! Separating-atom detection and the β_sep search over supports.
//!
//! An atom `A` over `G₀` is separating when its exponent vector is not an
//! integer combination of the exponent vectors of strictly shorter atoms
//! over the same support. β_sep(G) is the maximal separating-atom length as
//! the support ranges over subsets of `G ∖ {0}` of size ≤ rank(G) + 1.

use crate::atoms::enumerate_atoms;
use crate::error::{Error, Result};
use crate::formulas;
use crate::group::{Group, GroupElement};
use crate::lattice::LatticeBasis;
use crate::seq::{Support, ZSequence};
use crate::Limits;
use num_bigint::BigInt;
use rayon::prelude::*;
use std::sync::Arc;
use std::time::{Duration, Instant};

/// Supports per work chunk. Fixed so that early exit happens at the same
/// boundary whatever the worker count, keeping results byte-identical.
const CHUNK: usize = 64;

/// An integer combination `target = Σ coeff_i · atom_i` over shorter atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Combination {
    pub atoms: Vec<Vec<u32>>,
    pub coeffs: Vec<BigInt>,
}

/// Answer of the separating test, with the witness combination when the atom
/// turned out to be generated by shorter ones.
#[derive(Debug, Clone)]
pub struct SeparatingDecision {
    pub separating: bool,
    /// Number of strictly shorter atoms fed into the membership test.
    pub basis_size: usize,
    pub witness: Option<Combination>,
}

fn to_i64(mult: &[u32]) -> Vec<i64> {
    mult.iter().map(|&v| v as i64).collect()
}

/// Decides whether `A ∉ q(B(G₀)_{|A|−1})` by enumerating all strictly
/// shorter atoms and testing lattice membership of the exponent vector.
pub fn is_separating_atom(seq: &ZSequence, node_budget: u64) -> Result<SeparatingDecision> {
    if !seq.is_atom() {
        return Err(Error::NotAnAtom);
    }
    let len = u32::try_from(seq.length()).expect("atom length fits u32");
    let support = seq.support();
    if len <= 1 {
        return Ok(SeparatingDecision { separating: true, basis_size: 0, witness: None });
    }
    let set = enumerate_atoms(support, len - 1, node_budget);
    if !set.complete() {
        return Err(Error::BudgetExceeded { budget: node_budget });
    }
    let gens: Vec<Vec<i64>> = set
        .atoms_by_length()
        .values()
        .flatten()
        .map(|m| to_i64(m))
        .collect();
    let basis = LatticeBasis::empty(support.len()).extended(&gens)?;
    match basis.witness(&to_i64(seq.multiplicities()))? {
        None => Ok(SeparatingDecision { separating: true, basis_size: gens.len(), witness: None }),
        Some(coeffs) => {
            let atoms_vecs: Vec<Vec<u32>> =
                set.atoms_by_length().values().flatten().cloned().collect();
            Ok(SeparatingDecision {
                separating: false,
                basis_size: gens.len(),
                witness: Some(prune_combination(&atoms_vecs, coeffs)),
            })
        }
    }
}

fn prune_combination(atoms: &[Vec<u32>], coeffs: Vec<BigInt>) -> Combination {
    use num_traits::Zero;
    let mut kept_atoms = Vec::new();
    let mut kept_coeffs = Vec::new();
    for (a, c) in atoms.iter().zip(coeffs) {
        if !c.is_zero() {
            kept_atoms.push(a.clone());
            kept_coeffs.push(c);
        }
    }
    Combination { atoms: kept_atoms, coeffs: kept_coeffs }
}

/// Longest separating atom found over one support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanHit {
    pub length: u32,
    pub atom: Vec<u32>,
    /// Shorter atoms in the membership basis for this length.
    pub basis_size: usize,
}

/// Result of scanning one support for its maximal separating-atom length.
#[derive(Debug, Clone)]
pub struct SupportScan {
    pub complete: bool,
    pub hit: Option<ScanHit>,
    /// First non-separating atom of the longest atom length, with its
    /// combination over shorter atoms; kept for auditability.
    pub non_separating_example: Option<(Vec<u32>, Combination)>,
    pub nodes_visited: u64,
}

/// Enumerates atoms of length ≤ `prune_above` once, then tests candidates in
/// decreasing length order against one incrementally built lattice snapshot
/// per length threshold. Returns 0-as-`None` when no atom exists.
pub fn scan_support(support: &Support, prune_above: u32, node_budget: u64) -> SupportScan {
    let set = enumerate_atoms(support, prune_above, node_budget);
    if !set.complete() {
        // A membership answer against an incomplete shorter-atom set proves
        // nothing; report the support unresolved rather than guessing.
        return SupportScan {
            complete: false,
            hit: None,
            non_separating_example: None,
            nodes_visited: set.nodes_visited(),
        };
    }
    let dim = support.len();
    let lengths: Vec<u32> = set.atoms_by_length().keys().copied().collect();

    // snapshots[j] spans all atoms of length < lengths[j]
    let mut snapshots: Vec<LatticeBasis> = Vec::with_capacity(lengths.len());
    let mut basis = LatticeBasis::empty(dim);
    for (j, &len) in lengths.iter().enumerate() {
        if j > 0 {
            let gens: Vec<Vec<i64>> =
                set.atoms_by_length()[&lengths[j - 1]].iter().map(|m| to_i64(m)).collect();
            basis = basis.extended(&gens).expect("atom vectors share the support arity");
        }
        let _ = len;
        snapshots.push(basis.clone());
    }

    let mut non_sep = None;
    for j in (0..lengths.len()).rev() {
        let len = lengths[j];
        let snapshot = &snapshots[j];
        for atom in &set.atoms_by_length()[&len] {
            match snapshot
                .witness(&to_i64(atom))
                .expect("atom vectors share the support arity")
            {
                None => {
                    // Separating atoms never exceed D*(G); enforced here so a
                    // future refactor cannot silently weaken the prune.
                    assert!(
                        len <= prune_above,
                        "separating atom of length {len} exceeds prune {prune_above}"
                    );
                    return SupportScan {
                        complete: true,
                        hit: Some(ScanHit {
                            length: len,
                            atom: atom.clone(),
                            basis_size: snapshot.generator_count(),
                        }),
                        non_separating_example: non_sep,
                        nodes_visited: set.nodes_visited(),
                    };
                }
                Some(coeffs) => {
                    if non_sep.is_none() {
                        let gens: Vec<Vec<u32>> = lengths[..j]
                            .iter()
                            .flat_map(|l| set.atoms_by_length()[l].iter().cloned())
                            .collect();
                        non_sep = Some((atom.clone(), prune_combination(&gens, coeffs)));
                    }
                }
            }
        }
    }
    SupportScan {
        complete: true,
        hit: None,
        non_separating_example: non_sep,
        nodes_visited: set.nodes_visited(),
    }
}

/// Maximal separating-atom length over one support, `0` when none exists.
pub fn max_separating_atom_length(
    support: &Support,
    prune_above: u32,
    node_budget: u64,
) -> Result<u32> {
    let scan = scan_support(support, prune_above, node_budget);
    if !scan.complete {
        return Err(Error::BudgetExceeded { budget: node_budget });
    }
    Ok(scan.hit.map_or(0, |h| h.length))
}

/// The maximal separating atom over all admissible supports.
#[derive(Debug, Clone)]
pub struct SeparatingWitness {
    pub support: Support,
    pub atom: Vec<u32>,
    pub length: u32,
    pub basis_size: usize,
}

#[derive(Debug, Clone)]
pub struct NonSeparatingExample {
    pub support: Support,
    pub atom: Vec<u32>,
    pub combination: Combination,
}

#[derive(Debug, Clone)]
pub struct BetaSepResult {
    pub group: Group,
    pub value: u32,
    pub witness: SeparatingWitness,
    /// When true the search covered every admissible support; otherwise the
    /// value is still a certified lower bound.
    pub complete: bool,
    pub supports_examined: u64,
    pub elapsed: Duration,
    pub non_separating_example: Option<NonSeparatingExample>,
}

#[derive(Debug, Clone)]
pub struct BetaSepConfig {
    pub threads: usize,
    pub node_budget: u64,
    /// Override of the default support-size bound rank+1. Experimental; the
    /// default is the proven one.
    pub max_support_size: Option<usize>,
    pub deadline: Option<Instant>,
    pub limits: Limits,
}

impl Default for BetaSepConfig {
    fn default() -> Self {
        BetaSepConfig {
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            node_budget: Limits::default().node_budget,
            max_support_size: None,
            deadline: None,
            limits: Limits::default(),
        }
    }
}

/// Candidate ordering: longer wins; ties prefer the lexicographically
/// smaller support index list, then the smaller multiplicity vector. A total
/// order, so the parallel merge is reduction-order independent.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Candidate {
    length: u32,
    indices: Vec<usize>,
    atom: Vec<u32>,
    basis_size: usize,
    non_sep: Option<(Vec<u32>, Combination)>,
}

fn better(a: Candidate, b: Candidate) -> Candidate {
    let key_a = (std::cmp::Reverse(a.length), a.indices.clone(), a.atom.clone());
    let key_b = (std::cmp::Reverse(b.length), b.indices.clone(), b.atom.clone());
    if key_a <= key_b {
        a
    } else {
        b
    }
}

/// All support index lists of size `1..=max_size` in sequence-lexicographic
/// order, which is exactly the tie-break order of [`better`].
fn support_index_lists(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    fn rec(out: &mut Vec<Vec<usize>>, prefix: &mut Vec<usize>, start: usize, n: usize, cap: usize) {
        for i in start..n {
            prefix.push(i);
            out.push(prefix.clone());
            if prefix.len() < cap {
                rec(out, prefix, i + 1, n, cap);
            }
            prefix.pop();
        }
    }
    rec(&mut out, &mut prefix, 0, n, max_size);
    out
}

/// Exhaustive β_sep(G) search: scans supports of size ≤ rank+1 drawn from
/// `G ∖ {0}`, merging per-support maxima. Stops early once a separating atom
/// of length `D*(G)` is found, which no support can beat.
pub fn beta_sep(group: &Group, cfg: &BetaSepConfig) -> Result<BetaSepResult> {
    let start = Instant::now();
    let order = group.order();
    if order > cfg.limits.max_elements as u128 {
        return Err(Error::GroupTooLarge { order, cap: cfg.limits.max_elements as u128 });
    }
    let elements: Vec<GroupElement> = group
        .enumerate_elements(cfg.limits.max_elements)?
        .into_iter()
        .filter(|e| !e.is_identity())
        .collect();
    let n = elements.len();
    let default_size = group.rank() + 1;
    let max_size = cfg.max_support_size.unwrap_or(default_size).clamp(1, n.max(1));
    let prune = u32::try_from(formulas::d_star(group)).expect("desk-scale D* fits u32");

    let combos = support_index_lists(n, max_size);
    let threads = cfg.threads.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool construction");

    let mut best: Option<Candidate> = None;
    let mut complete = true;
    let mut examined: u64 = 0;

    for chunk in combos.chunks(CHUNK) {
        if let Some(deadline) = cfg.deadline {
            if Instant::now() >= deadline {
                complete = false;
                break;
            }
        }
        let outcomes: Vec<(Option<Candidate>, bool)> = pool.install(|| {
            chunk
                .par_iter()
                .map(|indices| {
                    let support = Support::new(
                        group.clone(),
                        indices.iter().map(|&i| elements[i].clone()).collect(),
                    )
                    .expect("distinct nonzero elements");
                    let scan = scan_support(&support, prune, cfg.node_budget);
                    let cand = scan.hit.map(|h| Candidate {
                        length: h.length,
                        indices: indices.clone(),
                        atom: h.atom,
                        basis_size: h.basis_size,
                        non_sep: scan.non_separating_example,
                    });
                    (cand, scan.complete)
                })
                .collect()
        });
        examined += chunk.len() as u64;
        for (cand, scan_complete) in outcomes {
            if !scan_complete {
                complete = false;
            }
            best = match (best.take(), cand) {
                (None, c) => c,
                (Some(b), None) => Some(b),
                (Some(b), Some(c)) => Some(better(b, c)),
            };
        }
        if best.as_ref().is_some_and(|b| b.length == prune) {
            break;
        }
    }

    let best = best.expect("every complete support scan yields at least one separating atom");
    assert!(best.length <= prune, "separating length bound violated");
    let support = Support::new(
        group.clone(),
        best.indices.iter().map(|&i| elements[i].clone()).collect(),
    )
    .expect("validated above");
    let non_separating_example = best.non_sep.map(|(atom, combination)| NonSeparatingExample {
        support: support.clone(),
        atom,
        combination,
    });
    Ok(BetaSepResult {
        group: group.clone(),
        value: best.length,
        witness: SeparatingWitness {
            support,
            atom: best.atom,
            length: best.length,
            basis_size: best.basis_size,
        },
        complete,
        supports_examined: examined,
        elapsed: start.elapsed(),
        non_separating_example,
    })
}

/// Image of a sequence under term-wise multiplication by `m`: each block
/// `g^{m·y}` maps to `(mg)^y`. Terms whose image is the identity are dropped
/// (each is a zero-sum singleton) and counted.
#[derive(Debug, Clone)]
pub struct PhiProjection {
    pub sequence: ZSequence,
    pub dropped_terms: u32,
}

pub fn phi_project(seq: &ZSequence, m: u32) -> Result<PhiProjection> {
    assert!(m >= 1, "projection factor must be positive");
    for &v in seq.multiplicities() {
        if v % m != 0 {
            return Err(Error::MultiplicityNotDivisible { multiplicity: v, divisor: m });
        }
    }
    let group = seq.support().group().clone();
    let mut image_elems: Vec<GroupElement> = Vec::new();
    let mut image_mult: Vec<u32> = Vec::new();
    let mut dropped = 0u32;
    for (g, &v) in seq.support().elements().iter().zip(seq.multiplicities()) {
        let y = v / m;
        let img = group.scale(m as i64, g).expect("support element valid");
        if img.is_identity() {
            dropped += y;
            continue;
        }
        match image_elems.iter().position(|e| e == &img) {
            Some(k) => image_mult[k] += y,
            None => {
                image_elems.push(img);
                image_mult.push(y);
            }
        }
    }
    let support = Arc::new(Support::new(group, image_elems)?);
    let sequence = ZSequence::new(support, image_mult)?;
    Ok(PhiProjection { sequence, dropped_terms: dropped })
}
