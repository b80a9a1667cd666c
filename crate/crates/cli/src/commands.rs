use passcount::asymptotics::{
    birthday_cdf_approx, birthday_pmf_approx, bubble_cdf_approx, bubble_pmf_approx, euler_maclaurin_check,
    optimization_deltas_approx, varrho_exact, varrho_exact_at, varrho_expansion, xn_charfn_approx, xn_moment_approx,
    xn_stats_approx, Approximation,
};
use passcount::exact::{
    collision_sf, collision_sf_series, lattice_survival, optimal_shift, pass_cdf, pass_cdf_series,
    relative_error_common, relative_error_shifted, sandwich_bounds, xn_moment_exact, xn_variance_exact,
    zn_moment_exact, EstimateReport, ProblemSize, SeriesDepth,
};
use passcount::hp::HPReal;
use passcount::montecarlo::{
    empirical_delta_poisson, empirical_law, opcount_expectation_mc, EmpiricalSummary, LawKind, SeededStream,
    OPCOUNT_LABELS,
};
use passcount::poisson_approx::FamilyKind;
use serde_json::{json, Value};

use crate::table::{num, record, row, Row};
use crate::{ApproxTarget, CliError, CliResult, ExactTarget, Outcome, Params, SimulateTarget};

/// Significant digits of every printed double-double value.
pub const DECIMAL_DIGITS: usize = 25;

/// Largest `n` for which exact lattice moments are attached to approximations.
const EXACT_MAX_N: u64 = 10_000_000_000;

const DEFAULT_TRIALS: u64 = 10_000;

fn need<T: Copy>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("{flag} is required for this target")))
}

fn int_n(p: &Params) -> CliResult<u64> {
    let n = need(p.n, "--n")?;
    if n < 1.0 || n.fract() != 0.0 || n > 9_007_199_254_740_992.0 {
        return Err(CliError::Usage(format!("--n must be a positive integer here, got {n}")));
    }
    Ok(n as u64)
}

fn law_kind(p: &Params, default: LawKind) -> CliResult<LawKind> {
    match p.kind.as_deref() {
        None => Ok(default),
        Some(s) => s
            .parse()
            .map_err(|_| CliError::Usage(format!("--kind must be pass or collision, got {s:?}"))),
    }
}

fn family_kind(p: &Params) -> CliResult<FamilyKind> {
    match p.kind.as_deref() {
        None => Ok(FamilyKind::Birthday),
        Some(s) => s
            .parse()
            .map_err(|_| CliError::Usage(format!("--kind must be birthday or inversion, got {s:?}"))),
    }
}

fn kind_name(k: LawKind) -> &'static str {
    match k {
        LawKind::Pass => "pass",
        LawKind::Collision => "collision",
    }
}

fn hp(v: HPReal) -> Value {
    Value::String(v.to_decimal(DECIMAL_DIGITS))
}

/// Integral `n` prints as an integer.
fn real_n(n: f64) -> Value {
    if n.fract() == 0.0 && n.abs() < 9.0e15 {
        json!(n as i64)
    } else {
        num(n)
    }
}

fn hp_row(quantity: &str, n: u64, m: u64, v: HPReal) -> Row {
    row([
        ("quantity", json!(quantity)),
        ("n", json!(n)),
        ("m", json!(m)),
        ("value", hp(v)),
        ("err", num(v.err())),
    ])
}

pub fn exact(target: ExactTarget, p: &Params) -> CliResult<Vec<Row>> {
    Ok(match target {
        ExactTarget::CollisionSf => {
            let (n, m) = (int_n(p)?, need(p.m, "--m")?);
            vec![hp_row("collision_sf", n, m, collision_sf(ProblemSize::new(n, m)?))]
        }
        ExactTarget::PassCdf => {
            let (n, m) = (int_n(p)?, need(p.m, "--m")?);
            vec![hp_row("pass_cdf", n, m, pass_cdf(ProblemSize::new(n, m)?)?)]
        }
        ExactTarget::Series => {
            let (n, m) = (need(p.n, "--n")?, need(p.m, "--m")?);
            let kind = law_kind(p, LawKind::Collision)?;
            let depth = p.depth.unwrap_or(SeriesDepth::Auto);
            let s = match kind {
                LawKind::Collision => collision_sf_series(HPReal::from_f64(n), m, depth)?,
                LawKind::Pass => pass_cdf_series(HPReal::from_f64(n), m, depth)?,
            };
            let quantity = match kind {
                LawKind::Collision => "collision_sf_series",
                LawKind::Pass => "pass_cdf_series",
            };
            vec![row([
                ("quantity", json!(quantity)),
                ("n", real_n(n)),
                ("m", json!(m)),
                ("depth", json!(s.depth)),
                ("value", hp(s.value)),
                ("err", num(s.value.err())),
            ])]
        }
        ExactTarget::Sandwich => {
            let (n, m) = (int_n(p)?, need(p.m, "--m")?);
            let size = ProblemSize::new(n, m)?;
            let (lo, hi) = sandwich_bounds(size)?;
            let mid = pass_cdf(size)?;
            vec![row([
                ("quantity", json!("sandwich")),
                ("n", json!(n)),
                ("m", json!(m)),
                ("lower", hp(lo)),
                ("lower_err", num(lo.err())),
                ("pass_cdf", hp(mid)),
                ("pass_cdf_err", num(mid.err())),
                ("upper", hp(hi)),
                ("upper_err", num(hi.err())),
            ])]
        }
        ExactTarget::Relerr => {
            let (n, m) = (int_n(p)?, need(p.m, "--m")?);
            let size = ProblemSize::new(n, m)?;
            let est = |name: &str, r: EstimateReport| {
                row([
                    ("quantity", json!(name)),
                    ("n", json!(n)),
                    ("m", json!(m)),
                    ("exact_ratio", hp(r.exact_ratio)),
                    ("exact_ratio_err", num(r.exact_ratio.err())),
                    ("relative_error", num(r.relative_error)),
                    ("asymptotic_formula_value", num(r.asymptotic_formula_value)),
                ])
            };
            vec![
                est("relerr_common", relative_error_common(size)?),
                est("relerr_shifted", relative_error_shifted(size)?),
            ]
        }
        ExactTarget::OptimalShift => {
            let (n, m) = (int_n(p)?, need(p.m, "--m")?);
            let (k, asymptotic) = optimal_shift(ProblemSize::new(n, m)?)?;
            vec![row([
                ("quantity", json!("optimal_shift")),
                ("n", json!(n)),
                ("m", json!(m)),
                ("k", json!(k)),
                ("asymptotic_k", num(asymptotic)),
            ])]
        }
        ExactTarget::Moments => {
            let n = int_n(p)?;
            if n > EXACT_MAX_N {
                return Err(CliError::Lib(passcount::Error::Resource(format!(
                    "exact lattice moments are limited to n <= {EXACT_MAX_N}, got {n}"
                ))));
            }
            let kind = law_kind(p, LawKind::Pass)?;
            let moment = |k: u32| match kind {
                LawKind::Pass => xn_moment_exact(n, k),
                LawKind::Collision => zn_moment_exact(n, k),
            };
            let moment_row = |k: u32, v: HPReal| {
                row([
                    ("quantity", json!("moment")),
                    ("kind", json!(kind_name(kind))),
                    ("n", json!(n)),
                    ("k", json!(k)),
                    ("value", hp(v)),
                    ("err", num(v.err())),
                ])
            };
            if let Some(k) = p.k {
                vec![moment_row(k, moment(k)?)]
            } else {
                let (e1, e2) = (moment(1)?, moment(2)?);
                let var = match kind {
                    LawKind::Pass => xn_variance_exact(n)?,
                    LawKind::Collision => e2 - e1.square(),
                };
                let mut v = row([
                    ("quantity", json!("variance")),
                    ("kind", json!(kind_name(kind))),
                    ("n", json!(n)),
                ]);
                v.insert("value".into(), hp(var));
                v.insert("err".into(), num(var.err()));
                vec![moment_row(1, e1), moment_row(2, e2), v]
            }
        }
    })
}

/// Approximation columns followed by the exact value and errors when known.
fn compare(mut r: Row, a: &Approximation, exact: Option<HPReal>) -> Row {
    r.insert("approx".into(), num(a.value));
    r.insert("remainder_scale".into(), num(a.remainder_scale));
    r.insert("warning".into(), a.warning.clone().map_or(Value::Null, Value::String));
    attach_exact(r, a.value, exact)
}

fn attach_exact(mut r: Row, approx: f64, exact: Option<HPReal>) -> Row {
    match exact {
        Some(e) => {
            let diff = (HPReal::from_f64(approx) - e).to_f64();
            let ef = e.to_f64();
            r.insert("exact".into(), hp(e));
            r.insert("exact_err".into(), num(e.err()));
            r.insert("abs_error".into(), num(diff.abs()));
            r.insert(
                "rel_error".into(),
                if ef != 0.0 { num((diff / ef).abs()) } else { Value::Null },
            );
        }
        None => {
            for k in ["exact", "exact_err", "abs_error", "rel_error"] {
                r.insert(k.into(), Value::Null);
            }
        }
    }
    r
}

/// `ϱ_n(m/√n)` extended by zero past the lattice.
fn varrho_or_zero(n: u64, m: u64) -> CliResult<HPReal> {
    if m >= n {
        Ok(HPReal::ZERO)
    } else {
        Ok(varrho_exact_at(n, m)?)
    }
}

fn lattice_m(n: u64, x: f64) -> u64 {
    (x * (n as f64).sqrt()).round() as u64
}

pub fn approx(target: ApproxTarget, p: &Params) -> CliResult<Vec<Row>> {
    let n = int_n(p)?;
    let head = |q: &str| row([("quantity", json!(q)), ("n", json!(n))]);
    Ok(match target {
        ApproxTarget::Varrho => {
            let x = need(p.x, "--x")?;
            let a = varrho_expansion(n, x)?;
            let exact = varrho_exact(n, x).ok();
            let mut r = head("varrho");
            r.insert("x".into(), num(x));
            vec![compare(r, &a, exact)]
        }
        ApproxTarget::Cdf | ApproxTarget::Pmf => {
            let kind = law_kind(p, LawKind::Pass)?;
            let cdf = target == ApproxTarget::Cdf;
            let (arg_name, arg) = match kind {
                LawKind::Pass => ("x", need(p.x, "--x")?),
                LawKind::Collision => ("z", need(p.z, "--z")?),
            };
            let a = match (kind, cdf) {
                (LawKind::Pass, true) => bubble_cdf_approx(n, arg)?,
                (LawKind::Pass, false) => bubble_pmf_approx(n, arg)?,
                (LawKind::Collision, true) => birthday_cdf_approx(n, arg)?,
                (LawKind::Collision, false) => birthday_pmf_approx(n, arg)?,
            };
            let m = lattice_m(n, arg);
            let sf = |j: u64| collision_sf(ProblemSize::new(n, j.min(n)).expect("j <= n"));
            let exact = match (kind, cdf) {
                (LawKind::Pass, true) => HPReal::ONE - varrho_or_zero(n, m + 1)?,
                (LawKind::Pass, false) => varrho_or_zero(n, m)? - varrho_or_zero(n, m + 1)?,
                (LawKind::Collision, true) => HPReal::ONE - sf(m),
                (LawKind::Collision, false) => sf(m - 1) - sf(m),
            };
            let quantity = format!("{}_{}", kind_name(kind), if cdf { "cdf" } else { "pmf" });
            let mut r = head(&quantity);
            r.insert(arg_name.into(), num(arg));
            vec![compare(r, &a, Some(exact))]
        }
        ApproxTarget::Moments => {
            let orders: Vec<u32> = match p.k {
                Some(k) => vec![k],
                None => (1..=4).collect(),
            };
            let mut rows = Vec::new();
            for k in orders {
                let a = xn_moment_approx(n, k)?;
                let exact = if n <= EXACT_MAX_N {
                    Some(xn_moment_exact(n, k)?)
                } else {
                    None
                };
                let mut r = head("moment");
                r.insert("k".into(), json!(k));
                r.insert("approx".into(), num(a));
                rows.push(attach_exact(r, a, exact));
            }
            rows
        }
        ApproxTarget::Charfn => {
            let t = need(p.t, "--t")?;
            let a = xn_charfn_approx(n, t)?;
            let mut r = head("charfn");
            r.insert("t".into(), num(t));
            r.insert("approx_re".into(), num(a.re));
            r.insert("approx_im".into(), num(a.im));
            if n <= EXACT_MAX_N {
                let (re, im) = lattice_charfn(n, t);
                r.insert("exact_re".into(), num(re));
                r.insert("exact_im".into(), num(im));
                r.insert("abs_error".into(), num((a.re - re).hypot(a.im - im)));
            }
            vec![r]
        }
        ApproxTarget::Stats => {
            let s = xn_stats_approx(n)?;
            let exact = if n <= EXACT_MAX_N {
                [
                    Some(xn_moment_exact(n, 1)?),
                    Some(xn_moment_exact(n, 2)?),
                    Some(xn_variance_exact(n)?),
                ]
            } else {
                [None; 3]
            };
            [("mean", s.e_hat), ("second_moment", s.e2_hat), ("variance", s.v_hat)]
                .into_iter()
                .zip(exact)
                .map(|((name, a), e)| {
                    let mut r = head("stats");
                    r.insert("statistic".into(), json!(name));
                    r.insert("approx".into(), num(a));
                    attach_exact(r, a, e)
                })
                .collect()
        }
        ApproxTarget::OptDeltas => {
            let d = optimization_deltas_approx(n)?;
            let exact = if n <= EXACT_MAX_N {
                Some(exact_opcount_means(n)?)
            } else {
                None
            };
            [
                d.comparison_reduction_expect,
                d.bool_increase_opt,
                d.bool_increase_variant,
            ]
            .into_iter()
            .enumerate()
            .map(|(i, a)| {
                let name = ["comparison_reduction", "bool_increase_opt", "bool_increase_variant"][i];
                let mut r = head("opt_deltas");
                r.insert("statistic".into(), json!(name));
                r.insert("approx".into(), num(a));
                attach_exact(r, a, exact.map(|e| [e[0], e[2], e[3]][i]))
            })
            .collect()
        }
        ApproxTarget::EmCheck => {
            let eps = need(p.epsilon, "--epsilon")?;
            let residual = euler_maclaurin_check(n, eps)?;
            let mut r = head("em_check");
            r.insert("epsilon".into(), num(eps));
            r.insert("residual".into(), num(residual));
            r.insert("residual_times_n_squared".into(), num(residual * (n as f64).powi(2)));
            vec![r]
        }
    })
}

/// `E e^{itX_n}` from the exact lattice law.
fn lattice_charfn(n: u64, t: f64) -> (f64, f64) {
    let surv = lattice_survival(n);
    let rn = (n as f64).sqrt();
    let (mut re, mut im) = (0.0, 0.0);
    for (m, s) in surv.iter().enumerate() {
        let next = surv.get(m + 1).copied().unwrap_or(HPReal::ZERO);
        let pm = (*s - next).to_f64();
        let (sin, cos) = (t * m as f64 / rn).sin_cos();
        re += pm * cos;
        im += pm * sin;
    }
    (re, im)
}

/// Exact expectations of the four counters in [`OPCOUNT_LABELS`] order.
///
/// With `r = n - P = √n X`: saved comparisons `(r² - r)/2`, per-swap flag
/// writes `P + ΣV` with `E ΣV = n(n-1)/4`, set-once flag writes `2P - 1`.
pub fn exact_opcount_means(n: u64) -> CliResult<[HPReal; 4]> {
    let (e1, e2) = (xn_moment_exact(n, 1)?, xn_moment_exact(n, 2)?);
    let nh = HPReal::from_u64(n);
    let rn = nh.sqrt();
    let half = HPReal::from_f64(0.5);
    let saved = (nh * e2 - rn * e1) * half;
    let passes = nh - rn * e1;
    let inversions = HPReal::from_u64(n) * HPReal::from_u64(n - 1) * HPReal::from_f64(0.25);
    let two = HPReal::from_f64(2.0);
    Ok([saved, saved, passes + inversions, two * passes - HPReal::ONE])
}

fn summary_row(s: &EmpiricalSummary, kind: &str, seed: u64) -> Row {
    let mut r = row([("kind", json!(kind)), ("seed", json!(seed))]);
    r.extend(record(s));
    r
}

fn flag(r: &mut Row, ok: bool) -> bool {
    r.insert("within_tolerance".into(), json!(ok));
    ok
}

pub fn simulate(target: SimulateTarget, p: &Params, assert: bool) -> CliResult<Outcome> {
    let n = int_n(p)?;
    let trials = p.trials.unwrap_or(DEFAULT_TRIALS);
    let stream = SeededStream::new(p.seed, 0);
    let mut all_ok = true;
    let rows = match target {
        SimulateTarget::Law => {
            let kind = law_kind(p, LawKind::Pass)?;
            let s = empirical_law(kind, n, trials, stream)?;
            let mut r = summary_row(&s, kind_name(kind), p.seed);
            let critical = 1.63 / (trials as f64).sqrt();
            r.insert("ks_critical_1pct".into(), num(critical));
            all_ok &= flag(&mut r, s.ks_statistic.is_none_or(|d| d <= critical));
            vec![r]
        }
        SimulateTarget::Delta => {
            let kind = family_kind(p)?;
            let m = need(p.m, "--m")?;
            let s = empirical_delta_poisson(kind, n, m, trials, stream)?;
            let name = match kind {
                FamilyKind::Birthday => "birthday",
                FamilyKind::Inversion => "inversion",
            };
            let mut r = summary_row(&s, name, p.seed);
            r.insert("m".into(), json!(m));
            let ok = match (s.tv_distance, s.tv_bound, s.tv_standard_error) {
                (Some(tv), Some(b), Some(se)) => tv <= b + 3.0 * se,
                _ => true,
            };
            all_ok &= flag(&mut r, ok);
            vec![r]
        }
        SimulateTarget::Opcounts => {
            let summaries = opcount_expectation_mc(n, trials, stream)?;
            let exact = if (2..=EXACT_MAX_N).contains(&n) {
                Some(exact_opcount_means(n)?)
            } else {
                None
            };
            debug_assert_eq!(summaries.len(), OPCOUNT_LABELS.len());
            let mut rows = Vec::new();
            for (i, s) in summaries.iter().enumerate() {
                let mut r = summary_row(s, "opcounts", p.seed);
                let e = exact.map(|e| e[i].to_f64());
                r.insert("exact_mean".into(), e.map_or(Value::Null, num));
                let ok = e.is_none_or(|e| {
                    let slack = 4.0 * s.mean_standard_error;
                    (s.mean - e).abs() <= slack.max(1e-9 * e.abs().max(1.0))
                });
                all_ok &= flag(&mut r, ok);
                rows.push(r);
            }
            rows
        }
    };
    Ok(Outcome {
        rows,
        ok: all_ok || !assert,
    })
}
