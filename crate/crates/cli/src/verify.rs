use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use passcount::asymptotics::xn_stats_approx;
use passcount::exact::{self, rational, xn_moment_exact, xn_variance_exact, ProblemSize};
use passcount::poisson_approx::{family_bound, tv_exact_small, FamilyKind, MAX_BIRTHDAY_TV_N, MAX_INVERSION_TV_N};
use passcount::sorters::{
    bubble_sort_instrumented, enumerate_birthday_distribution, enumerate_pass_distribution, for_each_permutation,
    inversion_table, max_inversion_pass_identity, pass_count, permutation_from_inversion_table, Variant,
};
use serde_json::json;

use crate::table::{row, Row};
use crate::Outcome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    All,
    Enumeration,
    #[value(name = "paper-values")]
    PublishedValues,
    /// Set-once flag variant: observed `2P - 1` writes against the published `2P`.
    #[value(name = "lemma-8-4")]
    FlagOffset,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Note,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Note => "NOTE",
        }
    }
}

struct Claim {
    suite: &'static str,
    status: Status,
    observed: String,
    expected: String,
    tolerance: String,
    detail: String,
}

fn check(suite: &'static str, ok: bool, observed: String, expected: String, tolerance: &str, detail: &str) -> Claim {
    Claim {
        suite,
        status: if ok { Status::Pass } else { Status::Fail },
        observed,
        expected,
        tolerance: tolerance.to_string(),
        detail: detail.to_string(),
    }
}

const ENUM: &str = "enumeration";
const PUBLISHED: &str = "paper-values";
const OFFSET: &str = "lemma-8-4";

/// Largest `n` of the per-permutation sweeps.
const SWEEP_N: usize = 8;
const PASS_LAW_N: usize = 7;

pub fn run(suite: Suite) -> Outcome {
    let mut claims: BTreeMap<&'static str, Claim> = BTreeMap::new();
    if matches!(suite, Suite::All | Suite::PublishedValues) {
        published_values(&mut claims);
    }
    if matches!(suite, Suite::All | Suite::Enumeration) {
        enumeration(&mut claims);
    }
    if matches!(suite, Suite::All | Suite::FlagOffset) {
        claims.insert("SET-ONCE-FLAG-OFFSET", flag_offset());
    }
    let ok = claims.values().all(|c| c.status != Status::Fail);
    let rows: Vec<Row> = claims
        .into_iter()
        .map(|(id, c)| {
            row([
                ("claim_id", json!(id)),
                ("suite", json!(c.suite)),
                ("status", json!(c.status.label())),
                ("observed", json!(c.observed)),
                ("expected", json!(c.expected)),
                ("tolerance", json!(c.tolerance)),
                ("detail", json!(c.detail)),
            ])
        })
        .collect();
    Outcome { rows, ok }
}

fn size(n: u64, m: u64) -> ProblemSize {
    ProblemSize::new(n, m).expect("valid size")
}

fn abs_claim(observed: f64, expected: f64, tol: f64, detail: &str) -> Claim {
    check(
        PUBLISHED,
        (observed - expected).abs() <= tol,
        format!("{observed:.10}"),
        format!("{expected}"),
        &format!("abs {tol:e}"),
        detail,
    )
}

fn rel_claim(observed: f64, expected: f64, tol: f64, detail: &str) -> Claim {
    check(
        PUBLISHED,
        ((observed - expected) / expected).abs() <= tol,
        format!("{observed:.16}"),
        format!("{expected}"),
        &format!("rel {tol:e}"),
        detail,
    )
}

fn published_values(claims: &mut BTreeMap<&'static str, Claim>) {
    let csf365 = exact::collision_sf(size(365, 22)).to_f64();
    let csf358 = exact::collision_sf(size(358, 22)).to_f64();
    let pcdf = exact::pass_cdf(size(365, 22)).map(|v| v.to_f64()).unwrap_or(f64::NAN);
    claims.insert("P365-M22-CSF", abs_claim(csf365, 0.4927028, 5e-8, "P{C_365 > 23}"));
    claims.insert("P365-M22-PASSCDF", abs_claim(pcdf, 0.4857848, 5e-8, "P{P_365 <= 343}"));
    claims.insert("P358-M22-CSF", abs_claim(csf358, 0.4857834, 5e-8, "P{C_358 > 23}"));

    let moment = |k| xn_moment_exact(10_000, k).map(|v| v.to_f64()).unwrap_or(f64::NAN);
    let var = xn_variance_exact(10_000).map(|v| v.to_f64()).unwrap_or(f64::NAN);
    claims.insert(
        "N1E4-EXN",
        rel_claim(moment(1), 1.23670494307038, 1e-12, "E(X_n), n = 10^4"),
    );
    claims.insert(
        "N1E4-EXN2",
        rel_claim(moment(2), 1.950365345384, 1e-10, "E(X_n^2), n = 10^4"),
    );
    claims.insert("N1E4-VXN", rel_claim(var, 0.4209262291695, 1e-9, "V(X_n), n = 10^4"));

    let published = [1.23670494307065, 1.950365345354, 0.4209262291679];
    let stats = xn_stats_approx(10_000)
        .map(|s| [s.e_hat, s.e2_hat, s.v_hat])
        .unwrap_or([f64::NAN; 3]);
    let worst = stats
        .iter()
        .zip(published)
        .map(|(o, e)| ((o - e) / e).abs())
        .fold(0.0f64, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) });
    claims.insert(
        "N1E4-STATS-HAT",
        check(
            PUBLISHED,
            worst <= 1e-12,
            format!("{:.16} / {:.16} / {:.16}", stats[0], stats[1], stats[2]),
            format!("{} / {} / {}", published[0], published[1], published[2]),
            "rel 1e-12",
            "truncated expansions of E(X_n), E(X_n^2), V(X_n) at n = 10^4",
        ),
    );
}

fn enumeration(claims: &mut BTreeMap<&'static str, Claim>) {
    claims.insert("ENUM-PASS-LAW-N7", pass_law());
    claims.insert("ENUM-BIRTHDAY-N6", birthday_law());
    claims.insert("ENUM-TV-BOUND", tv_bound());

    let mut checked = 0u64;
    let mut bad = [0u64; 4];
    for n in 1..=SWEEP_N {
        for_each_permutation(n, |p| {
            checked += 1;
            bad[0] += !max_inversion_pass_identity(p) as u64;
            bad[1] += (permutation_from_inversion_table(&inversion_table(p)) != *p) as u64;
            let passes = pass_count(p);
            let (_, plain) = bubble_sort_instrumented(p, Variant::Plain);
            let (_, a3) = bubble_sort_instrumented(p, Variant::EarlyExit);
            let (_, a4) = bubble_sort_instrumented(p, Variant::EarlyExitVariant);
            let r = n as u64 - passes;
            let saved = r.saturating_sub(1) * r / 2;
            bad[2] +=
                (plain.comparisons - a3.comparisons != saved || plain.comparisons - a4.comparisons != saved) as u64;
            bad[3] += (a3.bool_assignments != passes + inversion_table(p).total()) as u64;
        });
    }
    let sweep = |ok: u64, detail: &str| {
        check(
            ENUM,
            ok == 0,
            format!("{ok} counterexamples in {checked} permutations"),
            "0 counterexamples".into(),
            "exact",
            detail,
        )
    };
    claims.insert(
        "ENUM-MAXV-N8",
        sweep(bad[0], "P_n = max V + 1 for every permutation, n <= 8"),
    );
    claims.insert(
        "ENUM-INVTABLE-ROUNDTRIP-N8",
        sweep(bad[1], "inversion table is a bijection, n <= 8"),
    );
    claims.insert(
        "ENUM-CMP-REDUCTION-N8",
        sweep(
            bad[2],
            "both early-exit variants save (n-P-1)(n-P)/2 comparisons, n <= 8",
        ),
    );
    claims.insert(
        "ENUM-PER-SWAP-FLAGS-N8",
        sweep(bad[3], "per-swap flag variant writes P + sum V flags, n <= 8"),
    );
}

fn pass_law() -> Claim {
    let mut mismatches = 0u64;
    let mut cases = 0u64;
    for n in 1..=PASS_LAW_N {
        let dist = match enumerate_pass_distribution(n) {
            Ok(d) => d,
            Err(_) => {
                mismatches += 1;
                continue;
            }
        };
        for m in 0..n as u64 {
            cases += 1;
            let bound = n as u64 - m;
            let cum = dist.range(..=bound).fold(BigRational::zero(), |acc, (_, p)| acc + p);
            if rational::pass_cdf(n as u64, m).map_or(true, |f| f != cum) {
                mismatches += 1;
            }
        }
    }
    check(
        ENUM,
        mismatches == 0,
        format!("{mismatches} mismatches in {cases} cases"),
        "0 mismatches".into(),
        "exact rational",
        "enumerated P{P_n <= n-m} equals the product formula, n <= 7",
    )
}

fn birthday_law() -> Claim {
    let mut mismatches = 0u64;
    let mut cases = 0u64;
    for n in 1..=6u64 {
        for m in 0..=n {
            cases += 1;
            let ok = matches!(
                (enumerate_birthday_distribution(n, m), rational::collision_sf(n, m)),
                (Ok(a), Ok(b)) if a == b
            );
            mismatches += !ok as u64;
        }
    }
    check(
        ENUM,
        mismatches == 0,
        format!("{mismatches} mismatches in {cases} cases"),
        "0 mismatches".into(),
        "exact rational",
        "enumerated P{C_n > m+1} equals the product formula, n <= 6",
    )
}

fn tv_bound() -> Claim {
    let mut cases = 0u64;
    let mut violations = 0u64;
    let mut check_one = |kind, n, m| {
        cases += 1;
        let ok = matches!(
            (tv_exact_small(kind, n, m), family_bound(kind, n, m)),
            (Ok(tv), Ok(b)) if tv <= b.tv_bound + 1e-12
        );
        violations += !ok as u64;
    };
    for n in 1..=MAX_BIRTHDAY_TV_N {
        for m in 0..=n {
            check_one(FamilyKind::Birthday, n, m);
        }
    }
    for n in 1..=MAX_INVERSION_TV_N {
        for m in 0..n {
            check_one(FamilyKind::Inversion, n, m);
        }
    }
    check(
        ENUM,
        violations == 0,
        format!("{violations} violations in {cases} instances"),
        "0 violations".into(),
        "1e-12",
        "exact TV to Poisson never exceeds the Stein-Chen bound",
    )
}

/// Reported as NOTE when the observed count is the constant offset `2P - 1`.
fn flag_offset() -> Claim {
    let mut checked = 0u64;
    let mut off = 0u64;
    for n in 1..=SWEEP_N {
        for_each_permutation(n, |p| {
            checked += 1;
            let (_, a4) = bubble_sort_instrumented(p, Variant::EarlyExitVariant);
            off += (a4.bool_assignments != 2 * pass_count(p) - 1) as u64;
        });
    }
    Claim {
        suite: OFFSET,
        status: if off == 0 { Status::Note } else { Status::Fail },
        observed: format!("2P-1 ({off} exceptions in {checked} permutations)"),
        expected: "2P (published)".into(),
        tolerance: "exact".into(),
        detail: "set-once flag variant: the flag is cleared once per pass and set on the first swap; \
                 the final pass has no swap, so writes are 2P-1"
            .into(),
    }
}
