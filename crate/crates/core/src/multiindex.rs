//! Multi-index bookkeeping and set-partition enumeration.
//!
//! A `MultiIndex` is a canonically sorted multiset of coordinate directions
//! `1..=n`; it stands for the symmetric index block `(j_1,...,j_k)` of a jet
//! coordinate. `SlotPartition` enumerates partitions of the *positions*
//! `0..k` of such an index, the combinatorial engine behind every chain-rule
//! identity in the crate (group composition, chart prolongation, invariants).
//!
//! Partitions are position-set partitions, not content-multiset partitions:
//! the third-order chain rule needs the multiplicity 3 of the shape
//! `{1}+{1,1}` inside `{1,1,1}`, which collapsing equal contents would lose.

use crate::error::{Error, Result};
use crate::ratio::{factorial, Rat};
use num_bigint::BigInt;
use num_traits::One;
use std::fmt;

/// Canonically sorted multiset of directions in `1..=n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    n: u16,
    entries: Vec<u16>,
}

impl MultiIndex {
    /// The empty index `∅` with ambient arity `n`.
    pub fn empty(n: u16) -> Self {
        MultiIndex { n, entries: Vec::new() }
    }

    /// Builds an index from arbitrary direction order; sorts canonically.
    pub fn new(n: u16, mut entries: Vec<u16>) -> Result<Self> {
        if entries.iter().any(|&d| d == 0 || d > n) {
            return Err(Error::IndexOutOfRange(format!(
                "direction out of 1..={n} in {entries:?}"
            )));
        }
        entries.sort_unstable();
        Ok(MultiIndex { n, entries })
    }

    /// Infallible constructor for directions known to be valid.
    pub fn of(n: u16, entries: &[u16]) -> Self {
        Self::new(n, entries.to_vec()).expect("valid directions")
    }

    pub fn n(&self) -> u16 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[u16] {
        &self.entries
    }

    /// Multiplicity vector `(r_1, ..., r_n)`.
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut r = vec![0usize; self.n as usize];
        for &d in &self.entries {
            r[(d - 1) as usize] += 1;
        }
        r
    }

    /// Juxtaposition `IJ`: canonical merge, degrees add.
    pub fn juxtapose(&self, other: &MultiIndex) -> Result<MultiIndex> {
        if self.n != other.n {
            return Err(Error::ArityMismatch(self.n, other.n));
        }
        let mut entries = Vec::with_capacity(self.degree() + other.degree());
        entries.extend_from_slice(&self.entries);
        entries.extend_from_slice(&other.entries);
        entries.sort_unstable();
        Ok(MultiIndex { n: self.n, entries })
    }

    /// The index `iI` for a single extra direction.
    pub fn prepend(&self, dir: u16) -> MultiIndex {
        let mut entries = self.entries.clone();
        let pos = entries.partition_point(|&d| d <= dir);
        entries.insert(pos, dir);
        MultiIndex { n: self.n, entries }
    }

    /// Splits off one copy of `dir`, if present.
    pub fn remove_one(&self, dir: u16) -> Option<MultiIndex> {
        let pos = self.entries.iter().position(|&d| d == dir)?;
        let mut entries = self.entries.clone();
        entries.remove(pos);
        Some(MultiIndex { n: self.n, entries })
    }

    /// The weight `r_1!···r_n!/|I|!` attached to the symmetric coordinate
    /// `x^A_I`; equals 1 for the empty index.
    pub fn weight(&self) -> Rat {
        let mut num = BigInt::one();
        for r in self.multiplicities() {
            num *= factorial(r);
        }
        Rat::new(num, factorial(self.degree()))
    }

    /// Number of distinct orderings `|I|!/(r_1!···r_n!)`, the reciprocal of
    /// [`MultiIndex::weight`].
    pub fn orderings(&self) -> usize {
        let w = self.weight();
        let inv = w.recip();
        debug_assert!(inv.is_integer());
        let digits = inv.to_integer().to_u64_digits();
        if digits.1.is_empty() {
            1
        } else {
            digits.1[0] as usize
        }
    }

    /// Every canonical index over `1..=n` with degree in `min_deg..=max_deg`,
    /// in (degree, lexicographic) order.
    pub fn all(n: u16, min_deg: usize, max_deg: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for k in min_deg..=max_deg {
            Self::push_degree(n, k, &mut out);
        }
        out
    }

    /// Every canonical index of exact degree `k`.
    pub fn of_degree(n: u16, k: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        Self::push_degree(n, k, &mut out);
        out
    }

    fn push_degree(n: u16, k: usize, out: &mut Vec<MultiIndex>) {
        fn rec(n: u16, k: usize, start: u16, cur: &mut Vec<u16>, out: &mut Vec<MultiIndex>) {
            if k == 0 {
                out.push(MultiIndex { n, entries: cur.clone() });
                return;
            }
            for d in start..=n {
                cur.push(d);
                rec(n, k - 1, d, cur, out);
                cur.pop();
            }
        }
        rec(n, k, 1, &mut Vec::new(), out);
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, d) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "}}")
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.entries.cmp(&other.entries))
            .then_with(|| self.n.cmp(&other.n))
    }
}

/// A partition of the positions `0..k` of a parent index into unordered,
/// disjoint, nonempty blocks. Blocks are stored sorted by smallest position,
/// positions sorted inside each block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotPartition {
    blocks: Vec<Vec<usize>>,
}

impl SlotPartition {
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// The sub-index of `parent` induced by block `b`.
    pub fn block_index(&self, parent: &MultiIndex, b: usize) -> MultiIndex {
        let entries: Vec<u16> = self.blocks[b]
            .iter()
            .map(|&pos| parent.entries()[pos])
            .collect();
        MultiIndex::new(parent.n(), entries).expect("positions index the parent")
    }

    /// All induced sub-indices, block by block.
    pub fn block_indices(&self, parent: &MultiIndex) -> Vec<MultiIndex> {
        (0..self.blocks.len())
            .map(|b| self.block_index(parent, b))
            .collect()
    }
}

/// Enumerates every partition of the position set of `index` exactly once,
/// in a deterministic order (restricted-growth strings; blocks ordered by
/// smallest position). The empty index yields an empty stream.
pub fn partitions(index: &MultiIndex) -> Vec<SlotPartition> {
    let k = index.degree();
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    // assignment[i] = block of position i, with the restricted-growth
    // condition assignment[i] <= max(assignment[..i]) + 1
    let mut assignment = vec![0usize; k];
    fn rec(pos: usize, max_used: usize, assignment: &mut Vec<usize>, out: &mut Vec<SlotPartition>) {
        let k = assignment.len();
        if pos == k {
            let nblocks = max_used + 1;
            let mut blocks = vec![Vec::new(); nblocks];
            for (i, &b) in assignment.iter().enumerate() {
                blocks[b].push(i);
            }
            out.push(SlotPartition { blocks });
            return;
        }
        for b in 0..=max_used + 1 {
            assignment[pos] = b;
            rec(pos + 1, max_used.max(b), assignment, out);
        }
    }
    assignment[0] = 0;
    rec(1, 0, &mut assignment, &mut out);
    out
}

/// Partitions with exactly `p` blocks.
pub fn partitions_into(index: &MultiIndex, p: usize) -> Vec<SlotPartition> {
    partitions(index)
        .into_iter()
        .filter(|pt| pt.block_count() == p)
        .collect()
}

/// All permutations of `0..k` with parity, in a deterministic order.
pub fn permutations_with_parity(k: usize) -> Vec<(Vec<usize>, i64)> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..k).collect();
    fn rec(depth: usize, perm: &mut Vec<usize>, parity: i64, out: &mut Vec<(Vec<usize>, i64)>) {
        let k = perm.len();
        if depth == k {
            out.push((perm.clone(), parity));
            return;
        }
        for i in depth..k {
            perm.swap(depth, i);
            let p = if i == depth { parity } else { -parity };
            rec(depth + 1, perm, p, out);
            perm.swap(depth, i);
        }
    }
    rec(0, &mut perm, 1, &mut out);
    out
}

/// Symmetrization sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `(1/k!) Σ_P ε_±(P) tensor(P(tuple))` — the (anti)symmetrization projector
/// applied to one tuple of a tuple-valued tensor.
pub fn symmetrized<T, F>(sign: Sign, tuple: &[u16], tensor: F) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<Rat, Output = T> + Default,
    F: Fn(&[u16]) -> T,
{
    let k = tuple.len();
    if k == 0 {
        return tensor(tuple);
    }
    let mut acc = T::default();
    for (perm, parity) in permutations_with_parity(k) {
        let permuted: Vec<u16> = perm.iter().map(|&p| tuple[p]).collect();
        let coeff = match sign {
            Sign::Plus => Rat::one(),
            Sign::Minus => crate::ratio::rat_int(parity),
        };
        acc = acc + tensor(&permuted) * coeff;
    }
    acc * Rat::new(BigInt::one(), factorial(k))
}

/// Every ordered tuple `(j_1,...,j_k)` with entries in `1..=n`; the implied
/// repeated-index summations of the jet formulas run over these.
pub fn ordered_tuples(n: u16, k: usize) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut cur = vec![0u16; k];
    fn rec(n: u16, pos: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for d in 1..=n {
            cur[pos] = d;
            rec(n, pos + 1, cur, out);
        }
    }
    rec(n, 0, &mut cur, &mut out);
    out
}
