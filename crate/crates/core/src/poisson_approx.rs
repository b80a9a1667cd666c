//! Stein–Chen total-variation bounds for dissociated pair-indexed indicator
//! families, with the birthday and inversion-table families built in.

use serde::{Deserialize, Serialize};

use crate::distributions::PoissonLaw;
use crate::error::{domain, Error, Result};
use crate::sorters::delta_statistic;

/// Indicators `D_{ij}` indexed by pairs of a base set `{1, …, T}` such that
/// collections over disjoint index sets are independent.
///
/// Indices are 1-based. Every unordered pair `i ≠ j` belongs to the family
/// unless [`DissociatedFamily::index_predicate`] says otherwise.
pub trait DissociatedFamily {
    fn base_set_size(&self) -> usize;

    /// `E(D_{ij})`.
    fn pair_mean(&self, i: usize, j: usize) -> f64;

    /// `E(D_{ij} D_{ik})` for distinct `i, j, k`.
    fn triple_mean(&self, i: usize, j: usize, k: usize) -> f64;

    fn index_predicate(&self, i: usize, j: usize) -> bool {
        i != j
    }

    /// The moment sums entering the bound. Families with closed forms
    /// override this; the default sums term by term.
    fn moment_sums(&self) -> MomentSums {
        moment_sums_by_summation(self)
    }
}

/// Sums over the family: `μ = Σ E D`, `Σ (E D)²`, `Σ_i (Σ_j E D_{ij})²` and
/// the triple sum `Σ_i Σ_{j≠i} Σ_{k≠i,j} E(D_{ij} D_{ik})`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MomentSums {
    pub pair_count: f64,
    pub mu: f64,
    pub squares: f64,
    pub row_squares: f64,
    pub triple: f64,
}

impl MomentSums {
    /// `Σ` over ordered overlapping pairs `D ≠ D'` of `E D · E D'`.
    pub fn cross(&self) -> f64 {
        self.row_squares - 2.0 * self.squares
    }
}

pub fn moment_sums_by_summation<F: DissociatedFamily + ?Sized>(f: &F) -> MomentSums {
    let t = f.base_set_size();
    let mut s = MomentSums::default();
    for i in 1..=t {
        let mut row = 0.0;
        for j in 1..=t {
            if !f.index_predicate(i, j) {
                continue;
            }
            let p = f.pair_mean(i, j);
            row += p;
            if i < j {
                s.pair_count += 1.0;
                s.mu += p;
                s.squares += p * p;
            }
            for k in 1..=t {
                if k != j && f.index_predicate(i, k) {
                    s.triple += f.triple_mean(i, j, k);
                }
            }
        }
        s.row_squares += row * row;
    }
    s
}

/// Pairwise birthday matches among `m+1` people and `n` equally likely days.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BirthdayFamily {
    pub n: u64,
    pub m: u64,
}

pub fn birthday_family(n: u64, m: u64) -> Result<BirthdayFamily> {
    if n == 0 {
        return domain("n must be positive");
    }
    Ok(BirthdayFamily { n, m })
}

impl DissociatedFamily for BirthdayFamily {
    fn base_set_size(&self) -> usize {
        self.m as usize + 1
    }

    fn pair_mean(&self, _i: usize, _j: usize) -> f64 {
        1.0 / self.n as f64
    }

    fn triple_mean(&self, _i: usize, _j: usize, _k: usize) -> f64 {
        1.0 / (self.n as f64 * self.n as f64)
    }

    fn moment_sums(&self) -> MomentSums {
        let t = self.m as f64 + 1.0;
        let n = self.n as f64;
        let pairs = t * (t - 1.0) / 2.0;
        MomentSums {
            pair_count: pairs,
            mu: pairs / n,
            squares: pairs / (n * n),
            row_squares: t * (t - 1.0) * (t - 1.0) / (n * n),
            triple: t * (t - 1.0) * (t - 2.0) / (n * n),
        }
    }
}

/// Pairwise matches among the first `m+1` inversion-table entries, where
/// `V_i` is uniform on `{0, …, n-i}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InversionFamily {
    pub n: u64,
    pub m: u64,
}

pub fn inversion_family(n: u64, m: u64) -> Result<InversionFamily> {
    if n == 0 {
        return domain("n must be positive");
    }
    if m + 1 > n {
        return domain(format!("inversion family needs m + 1 <= n, got m = {m}, n = {n}"));
    }
    Ok(InversionFamily { n, m })
}

impl InversionFamily {
    /// Support size of `V_i`.
    fn support(&self, i: usize) -> u64 {
        assert!(i >= 1 && i as u64 <= self.m + 1, "index {i} outside 1..={}", self.m + 1);
        self.n - i as u64 + 1
    }
}

impl DissociatedFamily for InversionFamily {
    fn base_set_size(&self) -> usize {
        self.m as usize + 1
    }

    fn pair_mean(&self, i: usize, j: usize) -> f64 {
        1.0 / self.support(i.min(j)) as f64
    }

    /// `Σ_v P{V_i=v} P{V_j=v} P{V_k=v}`: each common value carries the
    /// product of the three point masses, and the common values are the
    /// smallest support.
    fn triple_mean(&self, i: usize, j: usize, k: usize) -> f64 {
        let s = [self.support(i), self.support(j), self.support(k)];
        let common = *s.iter().min().unwrap() as f64;
        common / s.iter().map(|&x| x as f64).product::<f64>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteinChenReport {
    pub mu: f64,
    pub tv_bound: f64,
    /// `|T| Σ (E D)²`.
    pub hypothesis_sq: f64,
    /// `Σ_i Σ_{j≠i} Σ_{k≠i,j} E(D_{ij} D_{ik})`.
    pub hypothesis_triple: f64,
}

fn check_sums(s: &MomentSums) -> Result<()> {
    let vals = [s.mu, s.squares, s.row_squares, s.triple];
    if vals.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return domain(format!("family moments must be finite and nonnegative: {s:?}"));
    }
    Ok(())
}

/// `d_TV(Σ D, Poi(μ)) ≤ (1 - e^{-μ})/μ · [Σ(E D)² + Σ_{D~D'}(E D E D' + E(D D'))]`.
pub fn stein_chen_bound<F: DissociatedFamily + ?Sized>(f: &F) -> Result<SteinChenReport> {
    let s = f.moment_sums();
    check_sums(&s)?;
    let t = f.base_set_size() as f64;
    if s.mu == 0.0 {
        return Ok(SteinChenReport {
            mu: 0.0,
            tv_bound: 0.0,
            hypothesis_sq: t * s.squares,
            hypothesis_triple: s.triple,
        });
    }
    let factor = -(-s.mu).exp_m1() / s.mu;
    Ok(SteinChenReport {
        mu: s.mu,
        tv_bound: factor * (s.squares + s.cross() + s.triple),
        hypothesis_sq: t * s.squares,
        hypothesis_triple: s.triple,
    })
}

/// `Σ E D · E D'` over ordered overlapping pairs `D ≠ D'`, looping directly.
pub fn cross_mean_direct<F: DissociatedFamily + ?Sized>(f: &F) -> f64 {
    let t = f.base_set_size();
    let mut acc = 0.0;
    for i in 1..=t {
        for j in 1..=t {
            if !f.index_predicate(i, j) {
                continue;
            }
            for k in 1..=t {
                if k != j && f.index_predicate(i, k) {
                    acc += f.pair_mean(i, j) * f.pair_mean(i, k);
                }
            }
        }
    }
    acc
}

/// `(|T| Σ (E D)², triple sum)`; both vanish along `n` when the Poisson
/// limit applies. Also checks `Σ (E D)² ≥ μ² / |S|`.
pub fn hypothesis_functionals<F: DissociatedFamily + ?Sized>(f: &F) -> Result<(f64, f64)> {
    let s = f.moment_sums();
    check_sums(&s)?;
    if s.pair_count > 0.0 {
        let cs = s.mu * s.mu / s.pair_count;
        assert!(
            s.squares >= cs * (1.0 - 1e-12),
            "Cauchy–Schwarz violated: Σ(E D)² = {} < μ²/|S| = {cs}",
            s.squares
        );
    }
    Ok((f.base_set_size() as f64 * s.squares, s.triple))
}

/// `V(Σ D)`: individual variances plus covariances of overlapping pairs.
pub fn variance_of_sum<F: DissociatedFamily + ?Sized>(f: &F) -> f64 {
    let s = f.moment_sums();
    s.mu - s.squares + s.triple - s.cross()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Birthday,
    Inversion,
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "birthday" => Ok(FamilyKind::Birthday),
            "inversion" => Ok(FamilyKind::Inversion),
            _ => domain(format!("unknown family kind {s:?}")),
        }
    }
}

/// `μ = Σ E D` for the built-in family of the given kind.
pub fn family_mean(kind: FamilyKind, n: u64, m: u64) -> Result<f64> {
    Ok(match kind {
        FamilyKind::Birthday => birthday_family(n, m)?.moment_sums().mu,
        FamilyKind::Inversion => inversion_family(n, m)?.moment_sums().mu,
    })
}

pub fn family_bound(kind: FamilyKind, n: u64, m: u64) -> Result<SteinChenReport> {
    match kind {
        FamilyKind::Birthday => stein_chen_bound(&birthday_family(n, m)?),
        FamilyKind::Inversion => stein_chen_bound(&inversion_family(n, m)?),
    }
}

/// `½ Σ_k |p_k - Poi(λ)(k)|` for a pmf `p` on `0..p.len()`; Poisson mass
/// beyond the support is added in full.
pub fn tv_to_poisson(pmf: &[f64], lambda: f64) -> Result<f64> {
    let law = PoissonLaw::new(lambda)?;
    let mut covered = 0.0;
    let mut diff = 0.0;
    for (k, &p) in pmf.iter().enumerate() {
        let q = law.pmf(k as u64);
        covered += q;
        diff += (p - q).abs();
    }
    Ok(0.5 * (diff + (1.0 - covered).max(0.0)))
}

/// Bounds on the enumerable instances.
pub const MAX_BIRTHDAY_TV_N: u64 = 6;
pub const MAX_INVERSION_TV_N: u64 = 8;

/// Exact law of `Σ D` by enumerating the product space, and its TV distance
/// to `Poi(μ)`.
pub fn tv_exact_small(kind: FamilyKind, n: u64, m: u64) -> Result<f64> {
    let mu = family_mean(kind, n, m)?;
    let len = (m + 1) as usize;
    let radices: Vec<u64> = match kind {
        FamilyKind::Birthday => {
            if n > MAX_BIRTHDAY_TV_N || m > n {
                return Err(Error::Resource(format!(
                    "birthday enumeration needs n <= {MAX_BIRTHDAY_TV_N} and m <= n, got n = {n}, m = {m}"
                )));
            }
            vec![n; len]
        }
        FamilyKind::Inversion => {
            if n > MAX_INVERSION_TV_N {
                return Err(Error::Resource(format!(
                    "inversion enumeration needs n <= {MAX_INVERSION_TV_N}, got n = {n}"
                )));
            }
            (1..=len as u64).map(|i| n - i + 1).collect()
        }
    };
    let total: u64 = radices.iter().product();
    let max_pairs = len * (len - 1) / 2;
    let mut counts = vec![0u64; max_pairs + 1];
    let mut digits = vec![0u64; len];
    loop {
        counts[delta_statistic(&digits) as usize] += 1;
        let mut i = 0;
        while i < len {
            digits[i] += 1;
            if digits[i] < radices[i] {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == len {
            break;
        }
    }
    let pmf: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
    tv_to_poisson(&pmf, mu)
}
