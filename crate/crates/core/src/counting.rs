//! Exact counts of non-crossing partitions and the composition index sets
//! that organize the moment formulas. All arithmetic is checked `u128`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

fn overflow(what: &str) -> Error {
    Error::Range(format!("{what} overflows 128-bit integers"))
}

pub fn factorial(n: usize) -> Result<u128> {
    (1..=n as u128).try_fold(1u128, |acc, x| acc.checked_mul(x).ok_or_else(|| overflow("factorial")))
}

pub fn binomial(n: usize, r: usize) -> Result<u128> {
    if r > n {
        return Ok(0);
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r as u128 {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc
            .checked_mul(n as u128 - i)
            .ok_or_else(|| overflow("binomial coefficient"))?
            / (i + 1);
    }
    Ok(acc)
}

/// Number of non-crossing partitions of `{1..k}` with `i + 1` blocks.
pub fn narayana(k: usize, i: usize) -> Result<u128> {
    if k == 0 || i >= k {
        return Err(Error::Domain(format!("narayana requires 0 <= i < k, got k={k}, i={i}")));
    }
    let a = binomial(k, i)?;
    let b = binomial(k, i + 1)?;
    Ok(a.checked_mul(b).ok_or_else(|| overflow("narayana number"))? / k as u128)
}

pub fn catalan(k: usize) -> Result<u128> {
    Ok(binomial(2 * k, k)? / (k as u128 + 1))
}

/// Number of non-crossing partitions of `{1..k}` with `counts[l]` blocks of
/// size `l`: `k! / ((k − q + 1)! · Π counts[l]!)` where `q` is the block count.
pub fn count_nc_by_block_sizes(k: usize, counts: &BTreeMap<usize, usize>) -> Result<u128> {
    if k == 0 {
        return Err(Error::Domain("k must be positive".into()));
    }
    if counts.keys().any(|&size| size == 0 || size > k) {
        return Err(Error::Domain(format!("block sizes must lie in 1..={k}")));
    }
    let total: usize = counts.iter().map(|(size, c)| size * c).sum();
    if total != k {
        return Err(Error::Domain(format!(
            "block sizes cover {total} elements, expected {k}"
        )));
    }
    let q: usize = counts.values().sum();
    // k!/(k-q+1)! as a falling product keeps intermediates small
    let mut acc: u128 = 1;
    for x in (k - q + 2)..=k {
        acc = acc.checked_mul(x as u128).ok_or_else(|| overflow("block-type count"))?;
    }
    for &c in counts.values() {
        let f = factorial(c)?;
        debug_assert_eq!(acc % f, 0);
        acc /= f;
    }
    Ok(acc)
}

/// A tuple `(i_1, …, i_s)` with `Σ i_l = k − s + 1` and `Σ l·i_l = k`: the
/// block type of a non-crossing partition of `{1..k}` with largest block at
/// most `s` and `k − s + 1` blocks.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Composition {
    pub k: usize,
    pub counts: Vec<usize>,
}

impl Composition {
    pub fn s(&self) -> usize {
        self.counts.len()
    }

    /// The composition as a size → multiplicity map, omitting zero entries.
    pub fn block_type(&self) -> BTreeMap<usize, usize> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(l, &c)| (l + 1, c))
            .collect()
    }
}

/// All solutions `(i_1..i_parts)` of `Σ i = count`, `Σ l·i_l = weight`, in
/// ascending lexicographic order.
pub(crate) fn weighted_compositions(parts: usize, count: usize, weight: usize) -> Vec<Vec<usize>> {
    fn rec(l: usize, parts: usize, count: usize, weight: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if l > parts {
            if count == 0 && weight == 0 {
                out.push(cur.clone());
            }
            return;
        }
        // the remaining sizes are at least l, so x copies of size l leave
        // count - x items with weight at least l·(count - x)
        let max = count.min(weight / l);
        for x in 0..=max {
            let (c, w) = (count - x, weight - l * x);
            if w < (l + 1) * c && c > 0 && l < parts {
                continue;
            }
            cur.push(x);
            rec(l + 1, parts, c, w, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        rec(1, parts, count, weight, &mut Vec::with_capacity(parts), &mut out);
    }
    out
}

pub fn enumerate_compositions(k: usize, s: usize) -> Result<Vec<Composition>> {
    if s == 0 || s > k {
        return Err(Error::Domain(format!("need 1 <= s <= k, got k={k}, s={s}")));
    }
    Ok(weighted_compositions(s, k - s + 1, k)
        .into_iter()
        .map(|counts| Composition { k, counts })
        .collect())
}
