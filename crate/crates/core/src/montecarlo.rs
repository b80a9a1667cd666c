//! Seeded, reproducible samplers and empirical checks against the exact and
//! limiting laws.
//!
//! Trials are split into fixed-size chunks. Chunk `c` of a stream draws from
//! its own ChaCha8 substream (the stream id selects the ChaCha stream, the
//! chunk selects a disjoint word range), and chunk results are integer
//! histograms or sums merged in chunk order, so parallel and sequential runs
//! agree bit for bit.

use std::collections::HashSet;
use std::hash::{BuildHasherDefault, Hasher};

use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::optimization_deltas_approx;
use crate::distributions::RayleighLaw;
use crate::error::{domain, Result};
use crate::exact::lattice_survival;
use crate::poisson_approx::{family_bound, tv_to_poisson, FamilyKind};
use crate::sorters::{bubble_sort_instrumented, permutation_from_inversion_table, InversionTable, Variant};

/// Trials per chunk; fixed so results do not depend on the thread count.
pub const CHUNK_TRIALS: u64 = 1 << 12;

/// Each chunk owns `2^40` words of its ChaCha stream.
const CHUNK_WORD_SHIFT: u32 = 40;

/// Above this many comparisons per run, operation counts come from the
/// counting identities instead of executing the sorts.
pub const DIRECT_SORT_BUDGET: u64 = 500_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl SeededStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        SeededStream { seed, stream_id }
    }

    /// Generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        self.chunk_rng(0)
    }

    /// Generator positioned at the start of chunk `chunk`.
    pub fn chunk_rng(&self, chunk: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng.set_word_pos((chunk as u128) << CHUNK_WORD_SHIFT);
        rng
    }
}

/// How chunks are scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

fn run_chunks<T, F>(stream: SeededStream, trials: u64, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    let one = |c: u64| {
        let count = CHUNK_TRIALS.min(trials - c * CHUNK_TRIALS);
        f(&mut stream.chunk_rng(c), count)
    };
    match exec {
        Execution::Sequential => (0..chunks).map(one).collect(),
        Execution::Parallel => (0..chunks).into_par_iter().map(one).collect(),
    }
}

fn merge_histograms(parts: Vec<Vec<u64>>) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    for h in parts {
        if h.len() > out.len() {
            out.resize(h.len(), 0);
        }
        for (o, c) in out.iter_mut().zip(h) {
            *o += c;
        }
    }
    out
}

fn bump(hist: &mut Vec<u64>, i: usize) {
    if i >= hist.len() {
        hist.resize(i + 1, 0);
    }
    hist[i] += 1;
}

/// Multiplicative hasher for small integer keys.
#[derive(Default)]
struct IntHasher(u64);

impl Hasher for IntHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0.rotate_left(8) ^ b as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        }
    }

    fn write_u64(&mut self, x: u64) {
        self.0 = (x ^ (x >> 29)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    }
}

type Occupancy = HashSet<u64, BuildHasherDefault<IntHasher>>;

fn uniform_below(n: u64) -> Uniform<u64> {
    Uniform::new(0, n).expect("nonempty range")
}

fn first_collision_with<R: Rng + ?Sized>(days: &Uniform<u64>, seen: &mut Occupancy, rng: &mut R) -> u64 {
    seen.clear();
    loop {
        if !seen.insert(days.sample(rng)) {
            return seen.len() as u64 + 1;
        }
    }
}

/// Number of people drawn when a birthday first repeats (at least 2).
pub fn sample_first_collision<R: Rng + ?Sized>(n: u64, rng: &mut R) -> u64 {
    assert!(n >= 1, "n must be positive");
    first_collision_with(&uniform_below(n), &mut Occupancy::default(), rng)
}

/// Independent `V_i` uniform on `{0, …, n-i}` for `i = 1..=n`.
pub fn sample_inversion_table<R: Rng + ?Sized>(n: u64, rng: &mut R) -> InversionTable {
    let v = (0..n).map(|i| uniform_below(n - i).sample(rng) as u32).collect();
    InversionTable::from_raw(v)
}

/// `P_n = max V + 1`, drawing `V_1, V_2, …` in table order and stopping once
/// no later entry can exceed the running maximum. The draws consumed are a
/// prefix of those [`sample_inversion_table`] would consume, so both give
/// the same pass count from the same generator state.
pub fn sample_pass_count<R: Rng + ?Sized>(n: u64, rng: &mut R) -> u64 {
    let mut max = 0u64;
    for i in 0..n {
        // V_{i+1} ≤ n-1-i; stop when that cannot beat the maximum
        if n - 1 - i <= max {
            break;
        }
        max = max.max(uniform_below(n - i).sample(rng));
    }
    max + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    /// `X_n = (n - P_n)/√n`.
    Pass,
    /// `Z_n = (C_n - 1)/√n`.
    Collision,
}

impl std::str::FromStr for LawKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pass" => Ok(LawKind::Pass),
            "collision" | "birthday" => Ok(LawKind::Collision),
            _ => domain(format!("unknown law kind {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSummary {
    pub label: String,
    pub n: u64,
    pub sample_count: u64,
    pub mean: f64,
    pub variance: f64,
    pub mean_standard_error: f64,
    /// Exact or asymptotic value the mean is compared against.
    pub reference_mean: Option<f64>,
    /// Discrete KS distance to the exact finite-`n` law.
    pub ks_statistic: Option<f64>,
    /// KS distance to the standard Rayleigh law.
    pub ks_rayleigh: Option<f64>,
    pub tv_distance: Option<f64>,
    pub tv_standard_error: Option<f64>,
    pub tv_bound: Option<f64>,
}

impl EmpiricalSummary {
    fn moments(label: &str, n: u64, count: u64, sum: u128, sum_sq: u128, scale: f64) -> Self {
        let nf = count as f64;
        let mean = sum as f64 / nf * scale;
        let variance = if count > 1 {
            // exact integer numerator N Σx² - (Σx)²
            let num = count as u128 * sum_sq - sum * sum;
            num as f64 / (nf * (nf - 1.0)) * scale * scale
        } else {
            0.0
        };
        EmpiricalSummary {
            label: label.to_string(),
            n,
            sample_count: count,
            mean,
            variance,
            mean_standard_error: (variance / nf).sqrt(),
            reference_mean: None,
            ks_statistic: None,
            ks_rayleigh: None,
            tv_distance: None,
            tv_standard_error: None,
            tv_bound: None,
        }
    }

    fn from_histogram(label: &str, n: u64, hist: &[u64], scale: f64) -> Self {
        let (mut count, mut sum, mut sum_sq) = (0u64, 0u128, 0u128);
        for (i, &c) in hist.iter().enumerate() {
            count += c;
            sum += i as u128 * c as u128;
            sum_sq += (i * i) as u128 * c as u128;
        }
        Self::moments(label, n, count, sum, sum_sq, scale)
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return domain("trials must be positive");
    }
    Ok(())
}

/// Exact CDF of the lattice index: `F[i] = P{index ≤ i}` where the index is
/// `n - P_n` (pass) or `C_n - 1` (collision). Entries stop once the CDF is
/// within 1e-40 of one.
pub fn exact_lattice_cdf(kind: LawKind, n: u64) -> Vec<f64> {
    match kind {
        LawKind::Pass => {
            let surv = lattice_survival(n);
            // P{n-P ≤ i} = 1 - ϱ(i+1)
            (0..surv.len())
                .map(|i| 1.0 - surv.get(i + 1).map_or(0.0, |v| v.to_f64()))
                .collect()
        }
        LawKind::Collision => {
            let mut out = vec![0.0];
            let mut sf = crate::hp::HPReal::ONE;
            let year = crate::hp::HPReal::from_u64(n);
            for j in 1..=n {
                // P{C_n - 1 ≤ j} = 1 - P{C_n > j+1}
                sf = sf * crate::hp::HPReal::from_u64(n - j) / year;
                out.push(1.0 - sf.to_f64());
                if sf.to_f64() < 1e-40 {
                    break;
                }
            }
            out
        }
    }
}

fn cdf_at(cdf: &[f64], i: usize) -> f64 {
    cdf.get(i).copied().unwrap_or(1.0)
}

/// `sup_i |F(i) - G(i)|` over the lattice, both laws being step functions
/// with jumps on the same points.
fn ks_lattice(a: &[f64], b: &[f64]) -> f64 {
    (0..a.len().max(b.len()))
        .map(|i| (cdf_at(a, i) - cdf_at(b, i)).abs())
        .fold(0.0, f64::max)
}

/// `sup_x |F(x) - R(x)|` for a lattice step CDF against the continuous
/// standard Rayleigh CDF: checked on both sides of every jump.
fn ks_rayleigh(cdf: &[f64], n: u64) -> f64 {
    let rn = (n as f64).sqrt();
    let mut sup: f64 = 0.0;
    let mut left = 0.0;
    for (i, &f) in cdf.iter().enumerate() {
        let r = RayleighLaw::STANDARD.cdf(i as f64 / rn).expect("nonnegative argument");
        sup = sup.max((f - r).abs()).max((left - r).abs());
        left = f;
    }
    sup
}

/// Discrete KS distance between the exact finite-`n` law of `X_n` or `Z_n`
/// and the standard Rayleigh law, without sampling.
pub fn exact_ks_rayleigh(kind: LawKind, n: u64) -> Result<f64> {
    if n == 0 {
        return domain("n must be positive");
    }
    Ok(ks_rayleigh(&exact_lattice_cdf(kind, n), n))
}

fn empirical_cdf(hist: &[u64]) -> Vec<f64> {
    let total: u64 = hist.iter().sum();
    let mut acc = 0u64;
    hist.iter()
        .map(|&c| {
            acc += c;
            acc as f64 / total as f64
        })
        .collect()
}

/// Samples `X_n` (through inversion tables) or `Z_n` (through birthday
/// draws) and compares the sample with the exact and the Rayleigh law.
pub fn empirical_law(kind: LawKind, n: u64, trials: u64, stream: SeededStream) -> Result<EmpiricalSummary> {
    empirical_law_with(kind, n, trials, stream, Execution::Parallel)
}

pub fn empirical_law_with(
    kind: LawKind,
    n: u64,
    trials: u64,
    stream: SeededStream,
    exec: Execution,
) -> Result<EmpiricalSummary> {
    if n == 0 {
        return domain("n must be positive");
    }
    check_trials(trials)?;
    let parts = run_chunks(stream, trials, exec, |rng, count| {
        let mut hist = Vec::new();
        match kind {
            LawKind::Pass => {
                for _ in 0..count {
                    bump(&mut hist, (n - sample_pass_count(n, rng)) as usize);
                }
            }
            LawKind::Collision => {
                let days = uniform_below(n);
                let mut seen = Occupancy::default();
                for _ in 0..count {
                    bump(&mut hist, (first_collision_with(&days, &mut seen, rng) - 1) as usize);
                }
            }
        }
        hist
    });
    let hist = merge_histograms(parts);
    let label = match kind {
        LawKind::Pass => "pass",
        LawKind::Collision => "collision",
    };
    let mut s = EmpiricalSummary::from_histogram(label, n, &hist, 1.0 / (n as f64).sqrt());
    let exact = exact_lattice_cdf(kind, n);
    let emp = empirical_cdf(&hist);
    s.reference_mean = Some(exact.iter().map(|f| 1.0 - f).sum::<f64>() / (n as f64).sqrt());
    s.ks_statistic = Some(ks_lattice(&emp, &exact));
    s.ks_rayleigh = Some(ks_rayleigh(&emp, n));
    Ok(s)
}

/// `½ Σ|p̂ - q|` and its delta-method standard error.
fn tv_with_se(hist: &[u64], lambda: f64) -> Result<(f64, f64)> {
    let total: u64 = hist.iter().sum();
    let pmf: Vec<f64> = hist.iter().map(|&c| c as f64 / total as f64).collect();
    let tv = tv_to_poisson(&pmf, lambda)?;
    let law = crate::distributions::PoissonLaw::new(lambda)?;
    let (mut m1, mut m2) = (0.0, 0.0);
    for (k, &p) in pmf.iter().enumerate() {
        let g = 0.5 * (p - law.pmf(k as u64)).signum();
        m1 += g * p;
        m2 += g * g * p;
    }
    Ok((tv, ((m2 - m1 * m1).max(0.0) / total as f64).sqrt()))
}

/// Samples the number of equal pairs among the first `m+1` birthdays or
/// inversion-table entries and compares its law with `Poi(m(m+1)/(2n))`.
pub fn empirical_delta_poisson(
    kind: FamilyKind,
    n: u64,
    m: u64,
    trials: u64,
    stream: SeededStream,
) -> Result<EmpiricalSummary> {
    empirical_delta_poisson_with(kind, n, m, trials, stream, Execution::Parallel)
}

pub fn empirical_delta_poisson_with(
    kind: FamilyKind,
    n: u64,
    m: u64,
    trials: u64,
    stream: SeededStream,
    exec: Execution,
) -> Result<EmpiricalSummary> {
    check_trials(trials)?;
    let bound = family_bound(kind, n, m)?;
    let len = m as usize + 1;
    let parts = run_chunks(stream, trials, exec, |rng, count| {
        let mut hist = Vec::new();
        let mut values = vec![0u64; len];
        let dists: Vec<Uniform<u64>> = match kind {
            FamilyKind::Birthday => vec![uniform_below(n); len],
            FamilyKind::Inversion => (0..len as u64).map(|i| uniform_below(n - i)).collect(),
        };
        for _ in 0..count {
            for (v, d) in values.iter_mut().zip(&dists) {
                *v = d.sample(rng);
            }
            values.sort_unstable();
            let mut pairs = 0u64;
            let mut run = 1u64;
            for w in values.windows(2) {
                if w[0] == w[1] {
                    run += 1;
                } else {
                    pairs += run * (run - 1) / 2;
                    run = 1;
                }
            }
            pairs += run * (run - 1) / 2;
            bump(&mut hist, pairs as usize);
        }
        hist
    });
    let hist = merge_histograms(parts);
    let label = match kind {
        FamilyKind::Birthday => "delta_birthday",
        FamilyKind::Inversion => "delta_inversion",
    };
    let lambda = (m * (m + 1)) as f64 / (2 * n) as f64;
    let mut s = EmpiricalSummary::from_histogram(label, n, &hist, 1.0);
    let (tv, se) = tv_with_se(&hist, lambda)?;
    s.reference_mean = Some(lambda);
    s.tv_distance = Some(tv);
    s.tv_standard_error = Some(se);
    s.tv_bound = Some(bound.tv_bound);
    Ok(s)
}

/// Counter labels of [`opcount_expectation_mc`], in output order.
pub const OPCOUNT_LABELS: [&str; 4] = [
    "comparison_reduction",
    "comparison_reduction_variant",
    "bool_increase_opt",
    "bool_increase_variant",
];

/// Sums of one counter over a chunk.
#[derive(Clone, Copy, Default)]
struct Sums {
    sum: u128,
    sum_sq: u128,
}

impl Sums {
    fn add(&mut self, x: u64) {
        self.sum += x as u128;
        self.sum_sq += x as u128 * x as u128;
    }

    fn merge(&mut self, o: Sums) {
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }
}

/// Per-run operation-count deltas of both early-exit variants against the
/// plain sort on uniform random permutations.
///
/// Small runs execute the instrumented sorts. Larger ones use the counting
/// identities `n(n-1)/2 - Σ_{i≤P}(n-i) = (n-P-1)(n-P)/2`, flag writes
/// `P + ΣV` and `2P - 1`, which the exhaustive tests establish.
pub fn opcount_expectation_mc(n: u64, trials: u64, stream: SeededStream) -> Result<Vec<EmpiricalSummary>> {
    opcount_expectation_mc_with(n, trials, stream, Execution::Parallel)
}

pub fn opcount_expectation_mc_with(
    n: u64,
    trials: u64,
    stream: SeededStream,
    exec: Execution,
) -> Result<Vec<EmpiricalSummary>> {
    if n == 0 {
        return domain("n must be positive");
    }
    check_trials(trials)?;
    let direct = (n * n).saturating_mul(trials) <= DIRECT_SORT_BUDGET;
    let parts = run_chunks(stream, trials, exec, |rng, count| {
        let mut sums = [Sums::default(); 4];
        for _ in 0..count {
            let table = sample_inversion_table(n, rng);
            let row = if direct {
                let p = permutation_from_inversion_table(&table);
                let (_, plain) = bubble_sort_instrumented(&p, Variant::Plain);
                let (_, a3) = bubble_sort_instrumented(&p, Variant::EarlyExit);
                let (_, a4) = bubble_sort_instrumented(&p, Variant::EarlyExitVariant);
                [
                    plain.comparisons - a3.comparisons,
                    plain.comparisons - a4.comparisons,
                    a3.bool_assignments - plain.bool_assignments,
                    a4.bool_assignments - plain.bool_assignments,
                ]
            } else {
                let passes = table.max() as u64 + 1;
                let r = n - passes;
                let saved = r.saturating_sub(1) * r / 2;
                [saved, saved, passes + table.total(), 2 * passes - 1]
            };
            for (s, x) in sums.iter_mut().zip(row) {
                s.add(x);
            }
        }
        sums
    });
    let mut total = [Sums::default(); 4];
    for chunk in parts {
        for (t, s) in total.iter_mut().zip(chunk) {
            t.merge(s);
        }
    }
    let reference = if n >= 2 {
        let d = optimization_deltas_approx(n)?;
        [
            Some(d.comparison_reduction_expect),
            Some(d.comparison_reduction_expect),
            Some(d.bool_increase_opt),
            Some(d.bool_increase_variant),
        ]
    } else {
        [None; 4]
    };
    Ok(OPCOUNT_LABELS
        .iter()
        .zip(total)
        .zip(reference)
        .map(|((label, s), r)| {
            let mut out = EmpiricalSummary::moments(label, n, trials, s.sum, s.sum_sq, 1.0);
            out.reference_mean = r;
            out
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rational, zn_moment_exact};
    use crate::sorters::enumerate_pass_distribution;
    use num_traits::ToPrimitive;

    const SEED: u64 = 0x5EED_B0B5;

    fn stream(id: u64) -> SeededStream {
        SeededStream::new(SEED, id)
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..8).map(|_| stream(0).rng().random()).collect();
        let b: Vec<u64> = (0..8).map(|_| stream(0).rng().random()).collect();
        assert_eq!(a, b);
        let mut r0 = stream(0).rng();
        let mut r1 = stream(1).rng();
        let x: Vec<u64> = (0..4).map(|_| r0.random()).collect();
        let y: Vec<u64> = (0..4).map(|_| r1.random()).collect();
        assert_ne!(x, y);
        let mut c0 = stream(0).chunk_rng(0);
        let mut c1 = stream(0).chunk_rng(1);
        assert_ne!(c0.random::<u64>(), c1.random::<u64>());
    }

    #[test]
    fn first_collision_basics() {
        let mut rng = stream(0).rng();
        for _ in 0..100 {
            assert_eq!(sample_first_collision(1, &mut rng), 2);
        }
        let s1: Vec<u64> = {
            let mut r = stream(3).rng();
            (0..50).map(|_| sample_first_collision(365, &mut r)).collect()
        };
        let s2: Vec<u64> = {
            let mut r = stream(3).rng();
            (0..50).map(|_| sample_first_collision(365, &mut r)).collect()
        };
        assert_eq!(s1, s2);
        assert!(s1.iter().all(|&c| (2..=366).contains(&c)));
    }

    #[test]
    fn collision_mean_matches_exact() {
        let s = empirical_law(LawKind::Collision, 365, 1_000_000, stream(4)).unwrap();
        let exact = zn_moment_exact(365, 1).unwrap().to_f64();
        assert!(
            (s.mean - exact).abs() < 3.0 * s.mean_standard_error,
            "{} vs {exact}",
            s.mean
        );
        assert!((s.reference_mean.unwrap() - exact).abs() < 1e-12);
    }

    #[test]
    fn inversion_table_sampling() {
        let mut rng = stream(5).rng();
        assert_eq!(sample_inversion_table(1, &mut rng).as_slice(), &[0]);
        let trials = 100_000;
        let mut sorted = 0u64;
        for _ in 0..trials {
            let t = sample_inversion_table(3, &mut rng);
            assert!(InversionTable::new(t.as_slice().to_vec()).is_ok());
            sorted += (t.max() == 0) as u64;
        }
        let p = 1.0 / 6.0;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((sorted as f64 / trials as f64 - p).abs() < 3.0 * sigma);
        let a = sample_inversion_table(20, &mut stream(9).rng());
        let b = sample_inversion_table(20, &mut stream(9).rng());
        assert_eq!(a, b);
    }

    #[test]
    fn early_stopping_matches_full_table() {
        for n in [1u64, 2, 5, 50, 1000] {
            let mut r = stream(n).rng();
            for _ in 0..200 {
                let mut fork = r.clone();
                let full = sample_inversion_table(n, &mut fork).max() as u64 + 1;
                assert_eq!(sample_pass_count(n, &mut r), full);
            }
        }
    }

    #[test]
    fn parallel_equals_sequential() {
        let trials = 5 * CHUNK_TRIALS + 17;
        for kind in [LawKind::Pass, LawKind::Collision] {
            let a = empirical_law_with(kind, 500, trials, stream(6), Execution::Parallel).unwrap();
            let b = empirical_law_with(kind, 500, trials, stream(6), Execution::Sequential).unwrap();
            assert_eq!(a, b);
        }
        let a = empirical_delta_poisson_with(FamilyKind::Birthday, 365, 22, trials, stream(6), Execution::Parallel)
            .unwrap();
        let b = empirical_delta_poisson_with(FamilyKind::Birthday, 365, 22, trials, stream(6), Execution::Sequential)
            .unwrap();
        assert_eq!(a, b);
        let a = opcount_expectation_mc_with(30, trials, stream(6), Execution::Parallel).unwrap();
        let b = opcount_expectation_mc_with(30, trials, stream(6), Execution::Sequential).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pass_law_ks_and_degenerate_case() {
        let s = empirical_law(LawKind::Pass, 1, 1000, stream(0)).unwrap();
        assert_eq!((s.mean, s.variance), (0.0, 0.0));
        assert_eq!(s.ks_statistic, Some(0.0));
        let small = empirical_law(LawKind::Pass, 100, 100_000, stream(7)).unwrap();
        let large = empirical_law(LawKind::Pass, 10_000, 100_000, stream(7)).unwrap();
        assert!(large.ks_statistic.unwrap() < 1.63 / (1e5f64).sqrt());
        assert!(small.ks_rayleigh.unwrap() > large.ks_rayleigh.unwrap());
    }

    #[test]
    fn small_pass_laws_match_enumeration() {
        let trials = 1_000_000u64;
        for n in 2..=7u64 {
            let s = empirical_law_with(LawKind::Pass, n, trials, stream(n), Execution::Parallel).unwrap();
            let exact = enumerate_pass_distribution(n as usize).unwrap();
            // recover counts from the empirical CDF of n - P
            let parts = run_chunks(stream(n), trials, Execution::Parallel, |rng, count| {
                let mut h = Vec::new();
                for _ in 0..count {
                    bump(&mut h, sample_pass_count(n, rng) as usize);
                }
                h
            });
            let hist = merge_histograms(parts);
            for (passes, p) in exact {
                let p = p.to_f64().unwrap();
                let obs = hist.get(passes as usize).copied().unwrap_or(0) as f64 / trials as f64;
                let sigma = (p * (1.0 - p) / trials as f64).sqrt();
                assert!((obs - p).abs() <= 5.0 * sigma, "n={n} P={passes}");
            }
            assert!(s.ks_statistic.unwrap() < 5.0 / (trials as f64).sqrt());
        }
    }

    #[test]
    fn means_approach_rayleigh_mean() {
        let target = (std::f64::consts::PI / 2.0).sqrt();
        for kind in [LawKind::Pass, LawKind::Collision] {
            let mut prev = f64::INFINITY;
            for n in [100u64, 1000, 10_000] {
                let s = empirical_law(kind, n, 1_000_000, stream(11)).unwrap();
                let gap = (s.mean - target).abs();
                assert!(gap < prev, "{kind:?} n={n}");
                prev = gap;
            }
        }
    }

    #[test]
    fn exact_ks_to_rayleigh_decreases() {
        for kind in [LawKind::Pass, LawKind::Collision] {
            let mut prev = 1.0;
            for n in [100u64, 1000, 10_000] {
                let ks = exact_ks_rayleigh(kind, n).unwrap();
                assert!(ks < prev && ks <= 2.5 / (n as f64).sqrt(), "{kind:?} n={n} ks={ks}");
                prev = ks;
            }
        }
    }

    #[test]
    fn exact_cdf_matches_rational() {
        let cdf = exact_lattice_cdf(LawKind::Pass, 40);
        for (i, f) in cdf.iter().enumerate() {
            let m = i as u64 + 1;
            let expected = if m < 40 {
                1.0 - rational::pass_cdf(40, m).unwrap().to_f64().unwrap()
            } else {
                1.0
            };
            assert!((f - expected).abs() < 1e-15);
        }
        let cdf = exact_lattice_cdf(LawKind::Collision, 40);
        assert_eq!(cdf[0], 0.0);
        for (j, f) in cdf.iter().enumerate().skip(1) {
            let expected = 1.0 - rational::collision_sf(40, j as u64).unwrap().to_f64().unwrap();
            assert!((f - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn delta_poisson_examples() {
        let s = empirical_delta_poisson(FamilyKind::Birthday, 50, 0, 1000, stream(0)).unwrap();
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.tv_distance, Some(0.0));
        let s = empirical_delta_poisson(FamilyKind::Birthday, 365, 22, 1_000_000, stream(12)).unwrap();
        assert!(s.tv_distance.unwrap() <= s.tv_bound.unwrap() + 3.0 * s.tv_standard_error.unwrap());
        let s = empirical_delta_poisson(FamilyKind::Inversion, 365, 22, 200_000, stream(12)).unwrap();
        assert!(s.tv_distance.unwrap() <= s.tv_bound.unwrap() + 3.0 * s.tv_standard_error.unwrap());
    }

    #[test]
    fn delta_poisson_larger_family() {
        for kind in [FamilyKind::Birthday, FamilyKind::Inversion] {
            let s = empirical_delta_poisson(kind, 10_000, 100, 200_000, stream(13)).unwrap();
            assert!(
                s.tv_distance.unwrap() <= s.tv_bound.unwrap() + 3.0 * s.tv_standard_error.unwrap(),
                "{kind:?}"
            );
        }
    }

    #[test]
    fn tv_bound_ratio_under_quadrupling() {
        let a = empirical_delta_poisson(FamilyKind::Birthday, 4000, 22, 1_000_000, stream(14)).unwrap();
        let b = empirical_delta_poisson(FamilyKind::Birthday, 16_000, 22, 1_000_000, stream(15)).unwrap();
        assert!(a.tv_bound.unwrap() / b.tv_bound.unwrap() >= 2.0);
        for s in [&a, &b] {
            assert!(s.tv_distance.unwrap() <= s.tv_bound.unwrap() + 3.0 * s.tv_standard_error.unwrap());
        }
    }

    #[test]
    fn opcounts_small_and_direct_paths() {
        let rows = opcount_expectation_mc(2, 100, stream(0)).unwrap();
        assert_eq!(rows[0].mean, 0.0);
        assert_eq!(rows[1].mean, 0.0);
        assert_eq!(
            rows.iter().map(|r| r.label.as_str()).collect::<Vec<_>>(),
            OPCOUNT_LABELS
        );
        let again = opcount_expectation_mc(2, 100, stream(0)).unwrap();
        assert_eq!(rows, again);
        // direct sorts and identities must agree on the same tables
        let n = 40u64;
        let mut r1 = stream(21).rng();
        for _ in 0..500 {
            let t = sample_inversion_table(n, &mut r1);
            let p = permutation_from_inversion_table(&t);
            let (_, plain) = bubble_sort_instrumented(&p, Variant::Plain);
            let (_, a3) = bubble_sort_instrumented(&p, Variant::EarlyExit);
            let (_, a4) = bubble_sort_instrumented(&p, Variant::EarlyExitVariant);
            let passes = t.max() as u64 + 1;
            let r = n - passes;
            assert_eq!(plain.comparisons - a3.comparisons, r.saturating_sub(1) * r / 2);
            assert_eq!(a3.bool_assignments, passes + t.total());
            assert_eq!(a4.bool_assignments, 2 * passes - 1);
        }
    }

    #[test]
    fn opcount_means_near_moments() {
        // E(ΣV) = n(n-1)/4 exactly; the per-swap flag count carries it
        let n = 200u64;
        let rows = opcount_expectation_mc(n, 20_000, stream(22)).unwrap();
        let e_passes = n as f64 - (n as f64).sqrt() * crate::exact::xn_moment_exact(n, 1).unwrap().to_f64();
        let expected_opt = e_passes + (n * (n - 1)) as f64 / 4.0;
        assert!((rows[2].mean - expected_opt).abs() < 4.0 * rows[2].mean_standard_error);
        assert!((rows[3].mean - (2.0 * e_passes - 1.0)).abs() < 4.0 * rows[3].mean_standard_error);
    }
}
