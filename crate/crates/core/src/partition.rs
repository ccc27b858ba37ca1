//! Set partitions of `{1..k}`, non-crossing structure and the Kreweras complement.
//!
//! Elements are 1-based throughout. A [`Partition`] is always stored in
//! canonical form: blocks ordered by their least element and each block
//! sorted ascending, so structural equality is partition equality.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{check_bound, Error, Result};

/// Largest ground set for which all partitions are enumerated (Bell(12) = 4 213 597).
pub const MAX_ENUMERATE_K: usize = 12;
/// Largest ground set for direct non-crossing enumeration (Catalan(14) = 2 674 440).
pub const MAX_NONCROSSING_K: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    k: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Builds a partition from arbitrary blocks, validating coverage and
    /// bringing the blocks into canonical order.
    pub fn new(k: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("partition ground set must be nonempty".into()));
        }
        let mut seen = vec![false; k];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::Domain("partition blocks must be nonempty".into()));
            }
            for &e in block {
                if e == 0 || e > k {
                    return Err(Error::Domain(format!("element {e} is not in 1..={k}")));
                }
                if std::mem::replace(&mut seen[e - 1], true) {
                    return Err(Error::Domain(format!("element {e} appears twice")));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Domain(format!("element {} is not covered", missing + 1)));
        }
        Ok(Self::canonical(k, blocks))
    }

    fn canonical(k: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        for block in &mut blocks {
            block.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Self { k, blocks }
    }

    /// Groups `1..=labels.len()` by label value. Labels need not be contiguous.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Domain("partition ground set must be nonempty".into()));
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &label) in labels.iter().enumerate() {
            groups.entry(label).or_default().push(i + 1);
        }
        Ok(Self::canonical(labels.len(), groups.into_values().collect()))
    }

    pub fn single_block(k: usize) -> Result<Self> {
        Self::new(k, vec![(1..=k).collect()])
    }

    pub fn singletons(k: usize) -> Result<Self> {
        Self::new(k, (1..=k).map(|e| vec![e]).collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block index of every element; entry `l - 1` belongs to element `l`.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.k];
        for (s, block) in self.blocks.iter().enumerate() {
            for &e in block {
                labels[e - 1] = s;
            }
        }
        labels
    }

    /// Number of blocks of each size, keyed by size.
    pub fn block_type(&self) -> BTreeMap<usize, usize> {
        let mut counts = BTreeMap::new();
        for block in &self.blocks {
            *counts.entry(block.len()).or_insert(0) += 1;
        }
        counts
    }

    pub fn is_noncrossing(&self) -> bool {
        // Scan left to right keeping the stack of blocks that are open (seen
        // but not yet finished). Revisiting a block that is not on top means
        // a block opened in between is still open, which is a crossing.
        let labels = self.labels();
        let mut last = vec![0; self.blocks.len()];
        for (i, &b) in labels.iter().enumerate() {
            last[b] = i;
        }
        let mut open: Vec<usize> = Vec::new();
        let mut started = vec![false; self.blocks.len()];
        for (i, &b) in labels.iter().enumerate() {
            if started[b] {
                if open.last() != Some(&b) {
                    return false;
                }
            } else {
                started[b] = true;
                open.push(b);
            }
            if last[b] == i {
                open.pop();
            }
        }
        true
    }

    /// Kreweras complement on the interlaced circle `1 1' 2 2' ... k k'`,
    /// returned relabelled onto `{1..k}` (`l'` becomes `l`).
    ///
    /// Computed as the cycles of `P⁻¹ ∘ γ`, where `P` sends each element to
    /// the next element of its block and `γ` is the rotation `l ↦ l + 1`.
    pub fn kreweras_complement(&self) -> Result<Partition> {
        if !self.is_noncrossing() {
            return Err(Error::Domain(format!(
                "Kreweras complement requires a non-crossing partition, got {self}"
            )));
        }
        let k = self.k;
        let mut pred = vec![0; k + 1];
        for block in &self.blocks {
            for (j, &e) in block.iter().enumerate() {
                let next = block[(j + 1) % block.len()];
                pred[next] = e;
            }
        }
        let complement = |l: usize| pred[if l == k { 1 } else { l + 1 }];
        let mut visited = vec![false; k + 1];
        let mut blocks = Vec::new();
        for start in 1..=k {
            if visited[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut l = start;
            while !visited[l] {
                visited[l] = true;
                cycle.push(l);
                l = complement(l);
            }
            blocks.push(cycle);
        }
        Ok(Self::canonical(k, blocks))
    }

    pub fn closed_blocks(&self) -> ClosedBlockView {
        ClosedBlockView::new(self.clone())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, block) in self.blocks.iter().enumerate() {
            if s > 0 {
                f.write_str("|")?;
            }
            for (j, e) in block.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{e}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses the `"1,2,4|3|5"` text form; the ground set is `1..=max element`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty partition string".into()));
        }
        let mut blocks = Vec::new();
        for part in s.split('|') {
            let block = part
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Parse(format!("invalid element {tok:?} in {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            blocks.push(block);
        }
        let k = blocks.iter().flatten().copied().max().unwrap_or(0);
        Partition::new(k, blocks).map_err(|e| match e {
            Error::Domain(msg) => Error::Parse(format!("{msg} in {s:?}")),
            other => other,
        })
    }
}

/// Closed blocks `B̄ = B ∪ {l : l−1 ∈ B}` (cyclically, `0 ≡ k`) together with
/// the multiplicity of each element inside its closed blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedBlockView {
    partition: Partition,
    closed_blocks: Vec<Vec<usize>>,
    multiplicity: Vec<u8>,
}

impl ClosedBlockView {
    pub fn new(partition: Partition) -> Self {
        let k = partition.k();
        let labels = partition.labels();
        let prev = |l: usize| if l == 1 { k } else { l - 1 };
        let succ = |l: usize| if l == k { 1 } else { l + 1 };
        let multiplicity = (1..=k)
            .map(|l| if labels[l - 1] == labels[prev(l) - 1] { 2 } else { 1 })
            .collect();
        let closed_blocks = partition
            .blocks()
            .iter()
            .map(|block| {
                let mut closed: Vec<usize> =
                    block.iter().copied().chain(block.iter().map(|&l| succ(l))).collect();
                closed.sort_unstable();
                closed.dedup();
                closed
            })
            .collect();
        Self {
            partition,
            closed_blocks,
            multiplicity,
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn closed_blocks(&self) -> &[Vec<usize>] {
        &self.closed_blocks
    }

    /// Multiplicity (1 or 2) of element `l`.
    pub fn multiplicity(&self, l: usize) -> u8 {
        self.multiplicity[l - 1]
    }

    /// The closed block `s` with each vertex repeated by its multiplicity, ascending.
    pub fn slots(&self, s: usize) -> Vec<usize> {
        self.closed_blocks[s]
            .iter()
            .flat_map(|&l| std::iter::repeat_n(l, self.multiplicity(l) as usize))
            .collect()
    }
}

/// All set partitions of `{1..k}` in restricted-growth order.
pub fn enumerate_partitions(k: usize) -> Result<Vec<Partition>> {
    check_bound("k", k, 1, MAX_ENUMERATE_K)?;
    let mut out = Vec::new();
    let mut labels = vec![0usize; k];
    fn rec(i: usize, max_label: usize, labels: &mut [usize], out: &mut Vec<Partition>) {
        if i == labels.len() {
            out.push(Partition::from_labels(labels).expect("nonempty labels"));
            return;
        }
        for label in 0..=max_label + 1 {
            labels[i] = label;
            rec(i + 1, max_label.max(label), labels, out);
        }
    }
    // element 1 always opens block 0
    rec(1, 0, &mut labels, &mut out);
    Ok(out)
}

/// All non-crossing partitions of `{1..k}`, generated directly with pruning.
pub fn enumerate_noncrossing(k: usize) -> Result<Vec<Partition>> {
    check_bound("k", k, 1, MAX_NONCROSSING_K)?;
    struct State {
        labels: Vec<usize>,
        first: Vec<usize>,
        last: Vec<usize>,
        out: Vec<Partition>,
    }
    // Joining element i to block b (last element p) is crossing-free iff
    // every element strictly between p and i belongs to a block opened after p.
    fn rec(i: usize, st: &mut State) {
        let k = st.labels.len();
        if i == k {
            st.out.push(Partition::from_labels(&st.labels).expect("nonempty labels"));
            return;
        }
        let nblocks = st.first.len();
        for b in 0..nblocks {
            let p = st.last[b];
            if (p + 1..i).all(|j| st.first[st.labels[j]] > p) {
                st.labels[i] = b;
                st.last[b] = i;
                rec(i + 1, st);
                st.last[b] = p;
            }
        }
        st.labels[i] = nblocks;
        st.first.push(i);
        st.last.push(i);
        rec(i + 1, st);
        st.first.pop();
        st.last.pop();
    }
    let mut st = State {
        labels: vec![0; k],
        first: vec![0],
        last: vec![0],
        out: Vec::new(),
    };
    rec(1, &mut st);
    Ok(st.out)
}
