//! Instrumented bubble sorts, inversion tables and exhaustive enumeration.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// A permutation of `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation(Vec<u32>);

impl Permutation {
    pub fn new(elements: Vec<u32>) -> Result<Self> {
        let n = elements.len();
        let mut seen = vec![false; n];
        for &e in &elements {
            let idx = (e as usize).wrapping_sub(1);
            if idx >= n || seen[idx] {
                return domain(format!("{elements:?} is not a permutation of 1..={n}"));
            }
            seen[idx] = true;
        }
        Ok(Permutation(elements))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((1..=n as u32).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn is_sorted(&self) -> bool {
        is_sorted(&self.0)
    }
}

fn is_sorted(a: &[u32]) -> bool {
    a.windows(2).all(|w| w[0] <= w[1])
}

/// `v[i]` counts the elements larger than rank `i+1` placed before it, so
/// `0 ≤ v[i] ≤ n-1-i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InversionTable(Vec<u32>);

impl InversionTable {
    pub fn new(v: Vec<u32>) -> Result<Self> {
        let n = v.len();
        for (i, &x) in v.iter().enumerate() {
            if x as usize > n - 1 - i {
                return domain(format!("entry v[{}] = {x} exceeds {}", i + 1, n - 1 - i));
            }
        }
        Ok(InversionTable(v))
    }

    pub(crate) fn from_raw(v: Vec<u32>) -> Self {
        InversionTable(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn max(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&x| x as u64).sum()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    pub comparisons: u64,
    pub swaps: u64,
    pub bool_assignments: u64,
    pub passes: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Fixed passes of lengths `n-1, n-2, …, 0`.
    Plain,
    /// Flag cleared per pass and set on every swap; stops after a pass
    /// without swaps.
    EarlyExit,
    /// Flag cleared per pass and set once, on the first swap of the pass.
    EarlyExitVariant,
}

pub fn bubble_sort_instrumented(p: &Permutation, variant: Variant) -> (Permutation, OpCounts) {
    let mut a = p.0.clone();
    let n = a.len();
    let mut c = OpCounts::default();
    match variant {
        Variant::Plain => {
            for i in 0..n {
                for j in 0..n - 1 - i {
                    c.comparisons += 1;
                    if a[j] > a[j + 1] {
                        a.swap(j, j + 1);
                        c.swaps += 1;
                    }
                }
                c.passes += 1;
            }
        }
        Variant::EarlyExit => {
            for i in 0..n {
                let mut flag = false;
                c.bool_assignments += 1;
                for j in 0..n - 1 - i {
                    c.comparisons += 1;
                    if a[j] > a[j + 1] {
                        a.swap(j, j + 1);
                        c.swaps += 1;
                        flag = true;
                        c.bool_assignments += 1;
                    }
                }
                c.passes += 1;
                if !flag {
                    break;
                }
            }
        }
        Variant::EarlyExitVariant => {
            for i in 0..n {
                let len = n - 1 - i;
                let mut flag = false;
                c.bool_assignments += 1;
                let mut j = 0;
                while j < len {
                    c.comparisons += 1;
                    if a[j] > a[j + 1] {
                        a.swap(j, j + 1);
                        c.swaps += 1;
                        flag = true;
                        c.bool_assignments += 1;
                        break;
                    }
                    j += 1;
                }
                for k in j + 1..len {
                    c.comparisons += 1;
                    if a[k] > a[k + 1] {
                        a.swap(k, k + 1);
                        c.swaps += 1;
                    }
                }
                c.passes += 1;
                if !flag {
                    break;
                }
            }
        }
    }
    (Permutation(a), c)
}

/// States of the sequence: `snapshots[i]` is the state after `i` plain
/// passes, ending at the first sorted state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassTrace {
    pub snapshots: Vec<Permutation>,
}

fn bubble_pass(a: &mut [u32], len: usize) {
    for j in 0..len {
        if a[j] > a[j + 1] {
            a.swap(j, j + 1);
        }
    }
}

pub fn pass_trace(p: &Permutation) -> PassTrace {
    let n = p.len();
    let mut a = p.0.clone();
    let mut snapshots = vec![p.clone()];
    let mut i = 0;
    while !is_sorted(&a) {
        bubble_pass(&mut a, n - 1 - i);
        i += 1;
        snapshots.push(Permutation(a.clone()));
    }
    PassTrace { snapshots }
}

/// `P_n`: one more than the number of passes needed to reach sorted order.
pub fn pass_count(p: &Permutation) -> u64 {
    pass_trace(p).snapshots.len() as u64
}

/// Pass count without materializing the trace.
fn pass_count_in_place(a: &mut [u32]) -> u64 {
    let n = a.len();
    let mut i = 0;
    while !is_sorted(a) {
        bubble_pass(a, n - 1 - i);
        i += 1;
    }
    i as u64 + 1
}

/// Fenwick tree over ranks for prefix counts.
struct Fenwick(Vec<u32>);

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick(vec![0; n + 1])
    }

    fn add(&mut self, mut i: usize) {
        while i < self.0.len() {
            self.0[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    fn prefix(&self, mut i: usize) -> u32 {
        let mut s = 0;
        while i > 0 {
            s += self.0[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

pub fn inversion_table(p: &Permutation) -> InversionTable {
    let n = p.len();
    let mut v = vec![0u32; n];
    let mut seen = Fenwick::new(n);
    for (pos, &e) in p.0.iter().enumerate() {
        // elements seen so far that exceed e
        v[e as usize - 1] = pos as u32 - seen.prefix(e as usize);
        seen.add(e as usize);
    }
    InversionTable(v)
}

/// Inverse of [`inversion_table`]: inserts ranks from largest to smallest,
/// rank `r` going to index `v[r-1]` among the larger ranks already placed.
pub fn permutation_from_inversion_table(t: &InversionTable) -> Permutation {
    let n = t.len();
    let mut out: Vec<u32> = Vec::with_capacity(n);
    for r in (1..=n).rev() {
        out.insert(t.0[r - 1] as usize, r as u32);
    }
    Permutation(out)
}

/// `P_n = max_i V_{n,i} + 1`.
pub fn max_inversion_pass_identity(p: &Permutation) -> bool {
    pass_count(p) == inversion_table(p).max() as u64 + 1
}

/// Largest `n` accepted by [`enumerate_pass_distribution`].
pub const MAX_PASS_ENUMERATION: usize = 10;
/// Largest `n` accepted by [`enumerate_birthday_distribution`].
pub const MAX_BIRTHDAY_ENUMERATION: u64 = 6;

/// Advances to the next permutation in lexicographic order.
pub(crate) fn next_permutation(a: &mut [u32]) -> bool {
    let n = a.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Calls `f` on every permutation of `1..=n` in lexicographic order.
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&Permutation)) {
    let mut p = Permutation::identity(n);
    loop {
        f(&p);
        if !next_permutation(&mut p.0) {
            break;
        }
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::from(1), |a, b| a * b)
}

/// Exact law of `P_n` by visiting all `n!` permutations.
pub fn enumerate_pass_distribution(n: usize) -> Result<BTreeMap<u64, BigRational>> {
    if n == 0 {
        return domain("n must be positive");
    }
    if n > MAX_PASS_ENUMERATION {
        return Err(Error::Resource(format!(
            "pass enumeration is limited to n <= {MAX_PASS_ENUMERATION}, got {n}"
        )));
    }
    let mut tally: BTreeMap<u64, u64> = BTreeMap::new();
    let mut scratch = vec![0u32; n];
    for_each_permutation(n, |p| {
        scratch.copy_from_slice(p.as_slice());
        *tally.entry(pass_count_in_place(&mut scratch)).or_default() += 1;
    });
    let total = factorial(n);
    Ok(tally
        .into_iter()
        .map(|(k, c)| (k, BigRational::new(BigInt::from(c), total.clone())))
        .collect())
}

/// Fraction of the `n^{m+1}` birthday tuples whose entries are all distinct.
pub fn enumerate_birthday_distribution(n: u64, m: u64) -> Result<BigRational> {
    if n == 0 {
        return domain("n must be positive");
    }
    if m > n {
        return domain(format!("m = {m} exceeds n = {n}"));
    }
    if n > MAX_BIRTHDAY_ENUMERATION {
        return Err(Error::Resource(format!(
            "birthday enumeration is limited to n <= {MAX_BIRTHDAY_ENUMERATION}, got {n}"
        )));
    }
    let len = (m + 1) as usize;
    let total = n.pow(len as u32);
    let mut distinct = 0u64;
    let mut digits = vec![0u64; len];
    for code in 0..total {
        let mut c = code;
        for d in digits.iter_mut() {
            *d = c % n;
            c /= n;
        }
        let mut mask = 0u64;
        let mut ok = true;
        for &d in &digits {
            if mask & (1 << d) != 0 {
                ok = false;
                break;
            }
            mask |= 1 << d;
        }
        distinct += ok as u64;
    }
    Ok(BigRational::new(BigInt::from(distinct), BigInt::from(total)))
}

/// Number of unordered position pairs holding equal values.
pub fn delta_statistic<T: Eq + std::hash::Hash>(values: &[T]) -> u64 {
    let mut counts: HashMap<&T, u64> = HashMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    counts.values().map(|&c| c * (c.saturating_sub(1)) / 2).sum()
}
