//! Exact evaluation of the first-collision and pass-count laws.
//!
//! Production values are [`HPReal`] double-doubles; [`rational`] holds the
//! exact `BigRational` backend used as an oracle for moderate `n`.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::asymptotics::varrho_exact_at;
use crate::error::{domain, Error, Result};
use crate::hp::HPReal;

/// Largest power-sum exponent supported by the Faulhaber tables.
pub const MAX_SERIES_DEPTH: u32 = 64;

/// Survival factors below this end the moment sums; the tail is bounded and
/// charged to the error term.
pub const MOMENT_TRUNCATION: f64 = 1e-40;

/// Largest moment order accepted by the moment routines.
pub const MAX_MOMENT_ORDER: u32 = 8;

/// Year length / sequence length `n` together with the probe depth `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSize {
    n: u64,
    m: u64,
}

impl ProblemSize {
    pub fn new(n: u64, m: u64) -> Result<Self> {
        if n == 0 {
            return domain("n must be positive");
        }
        if m > n {
            return domain(format!("probe depth m = {m} exceeds n = {n}"));
        }
        Ok(ProblemSize { n, m })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }
}

/// A cross-estimate of the pass law by the collision law.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EstimateReport {
    /// Ratio of the collision survival to the pass CDF.
    pub exact_ratio: HPReal,
    /// Leading-order asymptotic value of `exact_ratio - 1`.
    pub asymptotic_formula_value: f64,
    /// `exact_ratio - 1`, subtracted in double-double before rounding.
    pub relative_error: f64,
}

impl EstimateReport {
    fn new(ratio: HPReal, formula: f64) -> Self {
        EstimateReport {
            exact_ratio: ratio,
            asymptotic_formula_value: formula,
            relative_error: (ratio - HPReal::ONE).to_f64(),
        }
    }
}

fn hp_int(x: u64) -> HPReal {
    HPReal::from_u64(x)
}

/// `P{C_n > m+1} = ∏_{k=1}^{m} (1 - k/n)`.
pub fn collision_sf(size: ProblemSize) -> HPReal {
    let n = hp_int(size.n);
    (1..=size.m).map(|k| hp_int(size.n - k) / n).product()
}

/// `P{P_n ≤ n-m} = ∏_{k=1}^{m} (1 - k/(n-m+k))`.
pub fn pass_cdf(size: ProblemSize) -> Result<HPReal> {
    if size.m >= size.n {
        return domain(format!(
            "pass CDF needs m < n (P_n >= 1), got m = {}, n = {}",
            size.m, size.n
        ));
    }
    Ok(pass_cdf_product(size.n, size.m))
}

pub(crate) fn pass_cdf_product(n: u64, m: u64) -> HPReal {
    let base = hp_int(n - m);
    (1..=m).map(|k| base / hp_int(n - m + k)).product()
}

fn bernoulli_table() -> &'static [BigRational] {
    static TABLE: OnceLock<Vec<BigRational>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // B_j with the B_1 = +1/2 convention, from Σ_{i<j+1} C(j+1, i) B_i^- = 0
        let len = MAX_SERIES_DEPTH as usize + 2;
        let mut b: Vec<BigRational> = Vec::with_capacity(len);
        b.push(BigRational::one());
        for j in 1..len {
            let mut acc = BigRational::zero();
            for (i, bi) in b.iter().enumerate() {
                acc += bi * BigRational::from_integer(binomial(BigInt::from(j + 1), BigInt::from(i)));
            }
            b.push(-acc / BigRational::from_integer(BigInt::from(j + 1)));
        }
        b[1] = -b[1].clone();
        b
    })
}

/// `1^k + 2^k + … + m^k` by Faulhaber's formula.
pub fn power_sum(k: u32, m: u64) -> BigRational {
    assert!(
        k <= MAX_SERIES_DEPTH,
        "power sums are tabulated up to k = {MAX_SERIES_DEPTH}"
    );
    if m == 0 {
        return BigRational::zero();
    }
    let b = bernoulli_table();
    let mm = BigInt::from(m);
    let mut acc = BigRational::zero();
    for j in 0..=k {
        let coef = binomial(BigInt::from(k + 1), BigInt::from(j));
        let pow = num_traits::pow(mm.clone(), (k + 1 - j) as usize);
        acc += &b[j as usize] * BigRational::from_integer(coef * pow);
    }
    acc / BigRational::from_integer(BigInt::from(k + 1))
}

/// `S_k(m) / m^{k+1}`, which lies in `(0, 1]` for `m ≥ 1`.
fn normalized_power_sum(k: u32, m: u64) -> HPReal {
    let s = power_sum(k, m);
    let scale = num_traits::pow(BigInt::from(m), (k + 1) as usize);
    HPReal::from_ratio(&(s / BigRational::from_integer(scale)))
}

/// How many terms of a logarithmic series to sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesDepth {
    Fixed(u32),
    /// Stop at the first depth whose next term is below `1e-16` of the
    /// running sum, capped at [`MAX_SERIES_DEPTH`].
    Auto,
}

/// Result of a series evaluation together with the depth actually used.
#[derive(Clone, Copy, Debug)]
pub struct SeriesValue {
    pub value: HPReal,
    pub depth: u32,
}

/// Sums `Σ_k sign^k · S_k(m) · ratio^k / (k m^k)` with `|ratio| = m / base`
/// and exponentiates. `alternating` selects the `ln(1+x)` sign pattern.
fn log_series(base: HPReal, m: u64, depth: SeriesDepth, alternating: bool) -> Result<SeriesValue> {
    if let SeriesDepth::Fixed(d) = depth {
        if d == 0 || d > MAX_SERIES_DEPTH {
            return domain(format!("series depth must be in 1..={MAX_SERIES_DEPTH}, got {d}"));
        }
    }
    if m == 0 {
        return Ok(SeriesValue {
            value: HPReal::ONE,
            depth: 1,
        });
    }
    let mm = hp_int(m);
    let r = mm / base;
    let rf = r.to_f64();
    if !(rf > 0.0 && rf < 1.0) {
        return domain(format!("series diverges: m / base = {rf} is not in (0, 1)"));
    }
    let cap = match depth {
        SeriesDepth::Fixed(d) => d,
        SeriesDepth::Auto => MAX_SERIES_DEPTH,
    };
    let term = |k: u32, rk: HPReal| -> HPReal {
        let t = normalized_power_sum(k, m) * mm * rk / (k as f64);
        if !alternating || k % 2 == 1 {
            -t
        } else {
            t
        }
    };
    let mut sum = HPReal::ZERO;
    let mut rk = HPReal::ONE;
    let mut used = 0;
    for k in 1..=cap {
        rk = rk * r;
        sum = sum + term(k, rk);
        used = k;
        if depth == SeriesDepth::Auto && k < cap {
            let next = term(k + 1, rk * r).to_f64().abs();
            if next < 1e-16 * sum.to_f64().abs() {
                break;
            }
        }
    }
    // every term is bounded by m r^k / k, so the dropped tail is at most
    // m r^{d+1} / ((d+1)(1-r))
    let tail = rf * m as f64 * rf.powi(used as i32) / ((used + 1) as f64 * (1.0 - rf));
    let value = sum.exp();
    let value = value.with_extra_err(value.to_f64() * tail.exp_m1());
    Ok(SeriesValue { value, depth: used })
}

/// `P{C_n > m+1} = exp Σ_k (1^k+…+m^k) / (-k n^k)` for real `n > m`.
pub fn collision_sf_series(n: HPReal, m: u64, depth: SeriesDepth) -> Result<SeriesValue> {
    if !(n.to_f64() > m as f64) {
        return domain(format!("collision series needs n > m, got n = {}, m = {m}", n.to_f64()));
    }
    log_series(n, m, depth, false)
}

/// `P{P_n ≤ n-m} = exp Σ_k (1^k+…+m^k) / ((-1)^k k (n-m)^k)` for real `n`.
///
/// The series converges only while `m < n - m`.
pub fn pass_cdf_series(n: HPReal, m: u64, depth: SeriesDepth) -> Result<SeriesValue> {
    if !(n.to_f64() > m as f64) {
        return domain(format!("pass series needs n > m, got n = {}, m = {m}", n.to_f64()));
    }
    let base = n - hp_int(m);
    log_series(base, m, depth, true)
}

/// `(P{C_{n-(m-1)} > m+1}, P{C_n > m+1})`, which bracket `P{P_n ≤ n-m}`.
pub fn sandwich_bounds(size: ProblemSize) -> Result<(HPReal, HPReal)> {
    let (n, m) = (size.n, size.m);
    if m == 0 || m >= n {
        return domain(format!("sandwich bounds need 1 <= m < n, got m = {m}, n = {n}"));
    }
    let shifted = n - (m - 1);
    if shifted < m + 1 {
        return domain(format!("lower bound degenerate: n-(m-1) = {shifted} < m+1 = {}", m + 1));
    }
    let lower = collision_sf(ProblemSize::new(shifted, m)?);
    let upper = collision_sf(size);
    Ok((lower, upper))
}

fn check_estimation_size(size: ProblemSize) -> Result<()> {
    if size.m == 0 || size.m >= size.n {
        return domain(format!("need 1 <= m < n, got m = {}, n = {}", size.m, size.n));
    }
    Ok(())
}

/// Relative error of estimating `P{P_n ≤ n-m}` by `P{C_n > m+1}`.
pub fn relative_error_common(size: ProblemSize) -> Result<EstimateReport> {
    check_estimation_size(size)?;
    let pass = pass_cdf(size)?;
    if pass.is_zero() {
        return Err(Error::DegenerateProbability("pass CDF is zero".into()));
    }
    let ratio = collision_sf(size) / pass;
    let (n, m) = (size.n as f64, size.m as f64);
    let half = n - m / 2.0;
    let formula = (m - 1.0) * m * (m + 1.0) / (6.0 * half * half);
    Ok(EstimateReport::new(ratio, formula))
}

/// Relative error of estimating `P{P_n ≤ n-m}` by `P{C_{n-(m-1)/3} > m+1}`.
/// The shifted year length is generally not an integer, so the numerator
/// comes from the series form with automatic depth.
pub fn relative_error_shifted(size: ProblemSize) -> Result<EstimateReport> {
    check_estimation_size(size)?;
    let shift = hp_int(size.m - 1) / 3.0;
    let shifted_n = hp_int(size.n) - shift;
    if !(shifted_n.to_f64() > size.m as f64) {
        return domain(format!(
            "shifted year length {} must exceed m = {}",
            shifted_n.to_f64(),
            size.m
        ));
    }
    let pass = pass_cdf(size)?;
    if pass.is_zero() {
        return Err(Error::DegenerateProbability("pass CDF is zero".into()));
    }
    let numerator = collision_sf_series(shifted_n, size.m, SeriesDepth::Auto)?.value;
    let (n, m) = (size.n as f64, size.m as f64);
    let d = n - (4.0 * m - 1.0) / 6.0;
    let formula = -(m - 1.0) * m * (m + 1.0) * (m + 2.0) * (2.0 * m + 1.0) / (270.0 * d.powi(4));
    Ok(EstimateReport::new(numerator / pass, formula))
}

/// Brute-force best integer shift `k ∈ [0, m)` for estimating the pass CDF by
/// `P{C_{n-k} > m+1}`, paired with the asymptotic optimum `(m-1)/3`.
pub fn optimal_shift(size: ProblemSize) -> Result<(u64, f64)> {
    check_estimation_size(size)?;
    let pass = pass_cdf(size)?;
    let mut best: Option<(u64, HPReal)> = None;
    for k in 0..size.m {
        let year = size.n - k;
        let est = if size.m <= year {
            collision_sf(ProblemSize::new(year, size.m)?)
        } else {
            HPReal::ZERO
        };
        let gap = (est / pass - HPReal::ONE).abs();
        if best.as_ref().is_none_or(|(_, b)| gap < *b) {
            best = Some((k, gap));
        }
    }
    let argmin = best.map(|(k, _)| k).unwrap_or(0);
    Ok((argmin, (size.m as f64 - 1.0) / 3.0))
}

fn u128_to_hp(x: u128) -> HPReal {
    let high = (x >> 64) as u64;
    let low = x as u64;
    let two64 = HPReal::from_f64(18446744073709551616.0);
    hp_int(high) * two64 + hp_int(low)
}

/// `j^k - (j-1)^k` for `j ≥ 0` (with `(-1)^k` when `j = 0`).
fn power_step(j: u64, k: u32) -> HPReal {
    if j == 0 {
        return if k == 0 {
            HPReal::ZERO
        } else if k.is_multiple_of(2) {
            -HPReal::ONE
        } else {
            HPReal::ONE
        };
    }
    let a = (j as u128).checked_pow(k);
    let b = ((j - 1) as u128).checked_pow(k);
    match (a, b) {
        (Some(a), Some(b)) => u128_to_hp(a - b),
        _ => {
            let big = num_traits::pow(BigInt::from(j), k as usize) - num_traits::pow(BigInt::from(j - 1), k as usize);
            HPReal::from_ratio(&BigRational::from_integer(big))
        }
    }
}

/// `(1/√n)^k` in double-double.
fn inv_sqrt_pow(n: u64, k: u32) -> HPReal {
    let inv_n = HPReal::ONE / hp_int(n);
    let mut out = inv_n.powi((k / 2) as u64);
    if k % 2 == 1 {
        out = out * inv_n.sqrt();
    }
    out
}

/// Bound on `Σ_{j≥1} k (M+j)^{k-1} r^j` for a ratio `r < 1`.
fn weighted_geometric_tail(last: u64, k: u32, r: f64) -> f64 {
    if !(r < 1.0) {
        return f64::INFINITY;
    }
    let mut total = 0.0;
    let mut rj = 1.0;
    for j in 1..100_000u64 {
        rj *= r;
        let t = k as f64 * ((last + j) as f64).powi(k as i32 - 1) * rj;
        total += t;
        if t < 1e-30 * total && j > 8 {
            break;
        }
    }
    total
}

fn check_moment_args(n: u64, k: u32) -> Result<()> {
    if n == 0 {
        return domain("n must be positive");
    }
    if k > MAX_MOMENT_ORDER {
        return domain(format!("moment order must be <= {MAX_MOMENT_ORDER}, got {k}"));
    }
    Ok(())
}

/// Exact survival values `ϱ_n(m/√n) = P{X_n ≥ m/√n}` for `m = 0, 1, …` until
/// they fall below [`MOMENT_TRUNCATION`] or `m` reaches `n-1`.
pub fn lattice_survival(n: u64) -> Vec<HPReal> {
    let mut out = Vec::new();
    for m in 0..n {
        let v = varrho_exact_at(n, m).expect("m < n is on the lattice");
        let stop = v.to_f64() < MOMENT_TRUNCATION;
        out.push(v);
        if stop {
            break;
        }
    }
    out
}

/// Sums `Σ_m step(m)·surv[m]`, adding the tail bound when truncated.
fn abel_sum(surv: &[HPReal], k: u32, step_index: impl Fn(usize) -> u64, ratio_after: f64, complete: bool) -> HPReal {
    let mut acc = HPReal::ZERO;
    for (i, s) in surv.iter().enumerate() {
        acc = acc + power_step(step_index(i), k) * *s;
    }
    if !complete {
        let last = surv.last().map(|v| v.to_f64()).unwrap_or(0.0);
        let last_index = step_index(surv.len() - 1);
        acc = acc.with_extra_err(last * weighted_geometric_tail(last_index, k, ratio_after));
    }
    acc
}

/// `E(X_n^k)` for `X_n = (n - P_n)/√n` by Abel summation over the exact
/// survival function.
pub fn xn_moment_exact(n: u64, k: u32) -> Result<HPReal> {
    check_moment_args(n, k)?;
    let surv = lattice_survival(n);
    Ok(xn_moment_from_survival(n, k, &surv))
}

fn xn_moment_from_survival(n: u64, k: u32, surv: &[HPReal]) -> HPReal {
    if k == 0 {
        return HPReal::ONE;
    }
    let last = (surv.len() - 1) as u64;
    let complete = last == n - 1;
    // survival ratio after the last kept index is ((n-m-1)/(n-m))^{m+1}
    let ratio = if complete {
        0.0
    } else {
        (1.0 - 1.0 / (n - last) as f64).powi((last + 1) as i32)
    };
    let boundary = if k.is_multiple_of(2) { HPReal::ONE } else { -HPReal::ONE };
    let body = abel_sum(surv, k, |i| i as u64, ratio, complete);
    // the m = 0 step is 0^k - (-1)^k = -(-1)^k, cancelling the boundary
    // term; both are kept explicitly to mirror the summation identity
    (boundary + body) * inv_sqrt_pow(n, k)
}

/// `V(X_n) = E(X_n²) - E(X_n)²`.
pub fn xn_variance_exact(n: u64) -> Result<HPReal> {
    check_moment_args(n, 2)?;
    let surv = lattice_survival(n);
    let e1 = xn_moment_from_survival(n, 1, &surv);
    let e2 = xn_moment_from_survival(n, 2, &surv);
    Ok(e2 - e1 * e1)
}

/// `E(Z_n^k)` for `Z_n = (C_n - 1)/√n`, summing `P{Z_n ≥ j/√n} =
/// P{C_n > j}` against `j^k - (j-1)^k`.
pub fn zn_moment_exact(n: u64, k: u32) -> Result<HPReal> {
    check_moment_args(n, k)?;
    if k == 0 {
        return Ok(HPReal::ONE);
    }
    let year = hp_int(n);
    let mut surv = Vec::new();
    let mut current = HPReal::ONE;
    for j in 1..=n {
        // current = P{C_n > j} = collision_sf(n, j-1)
        if j > 1 {
            current = current * (hp_int(n - (j - 1)) / year);
        }
        surv.push(current);
        if current.to_f64() < MOMENT_TRUNCATION {
            break;
        }
    }
    let last_j = surv.len() as u64;
    let complete = last_j == n;
    let ratio = if complete { 0.0 } else { 1.0 - last_j as f64 / n as f64 };
    let body = abel_sum(&surv, k, |i| i as u64 + 1, ratio, complete);
    Ok(body * inv_sqrt_pow(n, k))
}

/// Exact rational backend, used as an oracle for moderate sizes.
pub mod rational {
    use super::*;

    /// Largest `n` accepted by the rational routines.
    pub const MAX_N: u64 = 500;

    fn check(n: u64) -> Result<()> {
        if n == 0 || n > MAX_N {
            return Err(Error::Resource(format!(
                "rational backend supports 1 <= n <= {MAX_N}, got {n}"
            )));
        }
        Ok(())
    }

    fn int(x: u64) -> BigRational {
        BigRational::from_integer(BigInt::from(x))
    }

    pub fn collision_sf(n: u64, m: u64) -> Result<BigRational> {
        check(n)?;
        if m > n {
            return domain(format!("m = {m} exceeds n = {n}"));
        }
        Ok((1..=m)
            .map(|k| int(n - k) / int(n))
            .fold(BigRational::one(), |a, b| a * b))
    }

    pub fn pass_cdf(n: u64, m: u64) -> Result<BigRational> {
        check(n)?;
        if m >= n {
            return domain(format!("pass CDF needs m < n, got m = {m}, n = {n}"));
        }
        Ok((1..=m)
            .map(|k| int(n - m) / int(n - m + k))
            .fold(BigRational::one(), |a, b| a * b))
    }

    /// `(n-m)^m (n-m)! / n!`.
    pub fn pass_cdf_factorial(n: u64, m: u64) -> Result<BigRational> {
        check(n)?;
        if m >= n {
            return domain(format!("pass CDF needs m < n, got m = {m}, n = {n}"));
        }
        let fact = |x: u64| (1..=x).fold(BigInt::one(), |a, b| a * b);
        let num = num_traits::pow(BigInt::from(n - m), m as usize) * fact(n - m);
        Ok(BigRational::new(num, fact(n)))
    }
}
