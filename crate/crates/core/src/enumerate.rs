//! Exhaustive enumeration of set partitions and labeled assignments of items.

use crate::error::{Error, Result};
use crate::model::{Bundle, Limits};

/// Number of partitions of `m` items into at most `k` nonempty blocks (saturating).
pub fn partition_count(m: usize, k: usize) -> u128 {
    // s[j] = Stirling number S(i, j) for the current i.
    let mut s = vec![0u128; k + 1];
    s[0] = 1;
    for _ in 0..m {
        for j in (1..=k).rev() {
            s[j] = s[j].saturating_mul(j as u128).saturating_add(s[j - 1]);
        }
        s[0] = 0;
    }
    s.iter().fold(0u128, |acc, x| acc.saturating_add(*x))
}

pub fn check_partition_bound(m: usize, k: usize, limits: &Limits, what: &str) -> Result<()> {
    let count = partition_count(m, k);
    if count > limits.enumeration {
        return Err(Error::resource(format!("{what} over {m} items into {k} bundles"), count, limits.enumeration));
    }
    Ok(())
}

/// Calls `f` with every partition of items `0..m` into at most `max_blocks` nonempty blocks.
/// Blocks appear in order of their smallest item.
pub fn for_each_set_partition(m: usize, max_blocks: usize, mut f: impl FnMut(&[Bundle])) {
    let mut blocks: Vec<Bundle> = Vec::with_capacity(max_blocks);
    fn rec(e: usize, m: usize, max_blocks: usize, blocks: &mut Vec<Bundle>, f: &mut dyn FnMut(&[Bundle])) {
        if e == m {
            f(blocks);
            return;
        }
        for j in 0..blocks.len() {
            let saved = blocks[j];
            blocks[j] = saved.with(e);
            rec(e + 1, m, max_blocks, blocks, f);
            blocks[j] = saved;
        }
        if blocks.len() < max_blocks {
            blocks.push(Bundle::EMPTY.with(e));
            rec(e + 1, m, max_blocks, blocks, f);
            blocks.pop();
        }
    }
    rec(0, m, max_blocks, &mut blocks, &mut f);
}

pub fn check_assignment_bound(m: usize, n: usize, limits: &Limits, what: &str) -> Result<u128> {
    let count = (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if count > limits.enumeration {
        return Err(Error::resource(format!("{what}: {n}^{m} allocations"), count, limits.enumeration));
    }
    Ok(count)
}

/// Calls `f` with every assignment of items `0..m` to `n` labeled bundles, in
/// lexicographic order of the owner vector (item 0 most significant).
pub fn for_each_assignment(m: usize, n: usize, mut f: impl FnMut(&[usize], &[Bundle])) {
    if n == 0 {
        return;
    }
    let mut owner = vec![0usize; m];
    let mut bundles = vec![Bundle::EMPTY; n];
    bundles[0] = Bundle::full(m);
    loop {
        f(&owner, &bundles);
        // Odometer increment from the last item.
        let mut e = m;
        loop {
            if e == 0 {
                return;
            }
            e -= 1;
            let old = owner[e];
            bundles[old] = Bundle(bundles[old].0 & !(1u64 << e));
            if old + 1 < n {
                owner[e] = old + 1;
                bundles[old + 1] = bundles[old + 1].with(e);
                break;
            }
            owner[e] = 0;
            bundles[0] = bundles[0].with(e);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_enumeration() {
        for m in 0..7 {
            for k in 1..5 {
                let mut seen = 0u128;
                for_each_set_partition(m, k, |blocks| {
                    assert!(blocks.len() <= k);
                    assert!(blocks.iter().all(|b| !b.is_empty()));
                    let union = blocks.iter().fold(Bundle::EMPTY, |a, b| a.union(*b));
                    assert_eq!(union, Bundle::full(m));
                    seen += 1;
                });
                assert_eq!(seen, partition_count(m, k), "m={m} k={k}");
            }
        }
        // Bell(5) = 52
        assert_eq!(partition_count(5, 5), 52);
    }

    #[test]
    fn assignments_are_lexicographic_and_complete() {
        let mut all = Vec::new();
        for_each_assignment(3, 2, |owner, bundles| {
            let rebuilt = crate::model::Allocation::from_owners(owner, 2);
            assert_eq!(rebuilt.bundles, bundles);
            all.push(owner.to_vec());
        });
        assert_eq!(all.len(), 8);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
    }

    #[test]
    fn bound_is_reported() {
        let limits = Limits { enumeration: 100, ..Limits::default() };
        assert!(check_assignment_bound(5, 3, &limits, "test").is_err());
        assert!(check_assignment_bound(4, 3, &limits, "test").is_ok());
        assert!(check_partition_bound(36, 6, &Limits::default(), "mms").is_err());
    }
}
