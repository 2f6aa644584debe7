//! Ground-truth computations for tests and the `verify` command.
//!
//! Everything here is slow, exact, and guarded: subset enumeration refuses
//! more than 20 items, the profit DP refuses profit sums past 10^7. The
//! guards error out rather than truncate, because an oracle that silently
//! degrades is worse than none.

use crate::convolution::extract_from_reach;
use crate::stepfn::{MonotoneStepFn, INF_X};
use crate::{Error, Result};

const MAX_ENUM_ITEMS: usize = 20;
const MAX_DP_PROFIT: u64 = 10_000_000;

/// How an [`ExactCurve`] was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Enumeration,
    ProfitDp,
}

/// The exact profit curve `f(x) = max { sum p_i : sum w_i <= x }` of an
/// instance, together with the method that produced it.
#[derive(Debug, Clone)]
pub struct ExactCurve {
    pub curve: MonotoneStepFn,
    pub provenance: Provenance,
}

/// Exact curve by enumerating all `2^n` subsets. Items are `(weight, profit)`
/// pairs; capacities beyond `t` are out of scope.
pub fn brute_force_curve(items: &[(u64, u64)], t: u64) -> Result<ExactCurve> {
    if items.len() > MAX_ENUM_ITEMS {
        return Err(Error::OracleGuard(format!(
            "enumeration limited to {MAX_ENUM_ITEMS} items, got {}",
            items.len()
        )));
    }
    let mut cands: Vec<(u64, u64)> = Vec::with_capacity(1 << items.len());
    for mask in 0u32..(1u32 << items.len()) {
        let mut w = 0u64;
        let mut p = 0u64;
        for (i, &(wi, pi)) in items.iter().enumerate() {
            if mask >> i & 1 == 1 {
                w = w.saturating_add(wi);
                p += pi;
            }
        }
        if w <= t {
            cands.push((w, p));
        }
    }
    Ok(ExactCurve {
        curve: MonotoneStepFn::envelope(&cands, t, false),
        provenance: Provenance::Enumeration,
    })
}

/// Exact curve from the min-weight-per-total-profit table. Pseudo-polynomial
/// in the profit sum; agrees with [`brute_force_curve`] wherever both run.
pub fn exact_profit_dp(items: &[(u64, u64)], t: u64) -> Result<ExactCurve> {
    let total: u64 = items.iter().map(|&(_, p)| p).sum();
    if total > MAX_DP_PROFIT {
        return Err(Error::OracleGuard(format!(
            "profit DP limited to total profit {MAX_DP_PROFIT}, got {total}"
        )));
    }
    let mut minw = vec![INF_X; total as usize + 1];
    minw[0] = 0;
    for &(w, p) in items {
        for v in (p..=total).rev() {
            let from = minw[(v - p) as usize];
            if from < INF_X {
                let cand = from.saturating_add(w);
                if cand < minw[v as usize] {
                    minw[v as usize] = cand;
                }
            }
        }
    }
    Ok(ExactCurve {
        curve: extract_from_reach(minw, t, false),
        provenance: Provenance::ProfitDp,
    })
}

/// Exact capped min-profit-to-cover function
/// `h(x) = min { sum p_i : sum w_i >= x }`, with `b_cap` standing in for
/// infinity where no selection covers `x`. Enumeration-based, same item
/// guard as [`brute_force_curve`].
pub fn exact_h(items: &[(u64, u64)], b_cap: u64, domain_hi: u64) -> Result<MonotoneStepFn> {
    if items.len() > MAX_ENUM_ITEMS {
        return Err(Error::OracleGuard(format!(
            "enumeration limited to {MAX_ENUM_ITEMS} items, got {}",
            items.len()
        )));
    }
    // best[w] = min profit over subsets of total weight exactly w (weights
    // clamped to the domain, where coverage saturates anyway).
    let mut subsets: Vec<(u64, u64)> = Vec::with_capacity(1 << items.len());
    for mask in 0u32..(1u32 << items.len()) {
        let mut w = 0u64;
        let mut p = 0u64;
        for (i, &(wi, pi)) in items.iter().enumerate() {
            if mask >> i & 1 == 1 {
                w = w.saturating_add(wi).min(domain_hi);
                p += pi;
            }
        }
        subsets.push((w, p));
    }
    // h(x) = min { p : w >= x } is nondecreasing in x; sweep weights from the
    // top, tracking the running minimum profit of everything still covering.
    // The first iteration emits the uncovered-region boundary (value b_cap)
    // because the running minimum starts at infinity.
    subsets.sort_unstable_by(|a, b| b.0.cmp(&a.0));
    let mut pts: Vec<(u64, u64)> = Vec::new();
    let mut covered_down_to = domain_hi.saturating_add(1);
    let mut run_min = u64::MAX;
    for &(w, p) in &subsets {
        if p < run_min {
            // x in (w, covered_down_to) is covered only by the costlier
            // selections seen earlier; x <= w now costs at most p.
            if covered_down_to > w + 1 {
                pts.push((w + 1, run_min.min(b_cap)));
            }
            run_min = p;
            covered_down_to = w + 1;
        }
    }
    pts.push((0, run_min.min(b_cap)));
    Ok(MonotoneStepFn::running_max(&pts, domain_hi)?.cap(b_cap))
}

/// Outcome of comparing an approximation against an exact curve on a grid.
///
/// `max_gap` is the largest `exact - approx` seen; a negative entry anywhere
/// sets `violation` (the approximation overtook the truth somewhere, which
/// the pipeline must never do). `max_ratio` is the largest
/// `exact / max(approx, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub max_gap: i64,
    pub gap_x: u64,
    pub max_ratio: f64,
    pub ratio_x: u64,
    pub checked: usize,
    pub violation: bool,
}

impl std::fmt::Display for ErrorReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "max_gap={} gap_x={} max_ratio={:.6} ratio_x={} checked={} violation={}",
            self.max_gap,
            self.gap_x,
            self.max_ratio,
            self.ratio_x,
            self.checked,
            u8::from(self.violation)
        )
    }
}

/// Compares `approx` to `exact` at the given capacities.
pub fn measure_error(
    approx: &MonotoneStepFn,
    exact: &ExactCurve,
    grid: &[u64],
) -> ErrorReport {
    let mut report = ErrorReport {
        max_gap: 0,
        gap_x: 0,
        max_ratio: 1.0,
        ratio_x: 0,
        checked: 0,
        violation: false,
    };
    let mut max_gap: Option<i64> = None;
    for &x in grid {
        let e = exact.curve.eval0(x);
        let a = approx.eval0(x);
        let gap = e as i64 - a as i64;
        if max_gap.map_or(true, |g| gap > g) {
            max_gap = Some(gap);
            report.gap_x = x;
        }
        if gap < 0 {
            report.violation = true;
        }
        let ratio = e as f64 / (a.max(1) as f64);
        if ratio > report.max_ratio {
            report.max_ratio = ratio;
            report.ratio_x = x;
        }
        report.checked += 1;
    }
    report.max_gap = max_gap.unwrap_or(0);
    report
}

/// Default comparison grid: every breakpoint of the exact curve plus 64
/// uniformly spaced capacities (breakpoints are where step functions disagree
/// most).
pub fn default_grid(exact: &ExactCurve, t: u64) -> Vec<u64> {
    let mut grid: Vec<u64> = exact.curve.points().iter().map(|p| p.x).collect();
    for k in 0..=64u64 {
        grid.push(t / 64 * k);
    }
    grid.push(t);
    grid.sort_unstable();
    grid.dedup();
    grid.retain(|&x| x <= t);
    grid
}
