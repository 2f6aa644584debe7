//! Solver for profit classes with a large scale factor.
//!
//! A class routed here has scale `a > s = sqrt(q)`, which bounds its optimum
//! by `2 q^2 / a < 2 q s` class units: the whole curve is short relative to
//! its resolution. Short curves admit an exact treatment per group: order the
//! items by efficiency, cut the sequence where the running count of distinct
//! profits passes geometric thresholds, and compute each group's profit curve
//! exactly but value-capped. The capped group curves convolve back to the
//! class curve (an optimum never draws more than the cap from a group, so
//! capping loses nothing), and an approximate merge assembles them.

use crate::convolution::{approx_merge, conv_uniform_concave, UniformConcaveFn};
use crate::par::maybe_par_map;
use crate::preprocess::{greedy_pairs, ClassItem, Config, ReducedProblem};
use crate::stepfn::MonotoneStepFn;
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Where to cut the efficiency-sorted item sequence, and how to cap each
/// resulting group.
#[derive(Debug, Clone)]
pub struct PrefixThresholds {
    /// Cut positions as prefix lengths: group `j` (1-based) is
    /// `items[cuts[j-2]..cuts[j-1]]`, with an implicit 0 in front and a final
    /// group running to the end. `cuts[j-1]` is the least prefix length whose
    /// distinct-profit count reaches the j-th threshold.
    pub cuts: Vec<usize>,
    /// Value cap for group `j` at index `j - 1`; one entry more than `cuts`.
    pub caps: Vec<u64>,
    /// Bound coefficient the thresholds were built with.
    pub coeff: u64,
}

/// Running distinct-profit counts: entry `i` is the number of distinct
/// profits among the first `i` items. Profits must lie in `[q, 2q]`.
pub fn distinct_prefix_counts(items: &[ClassItem], q: u64) -> Vec<usize> {
    let mut seen = vec![false; q as usize + 2];
    let mut counts = Vec::with_capacity(items.len() + 1);
    let mut c = 0usize;
    counts.push(0);
    for it in items {
        debug_assert!(it.p >= q && it.p <= 2 * q);
        let idx = (it.p - q) as usize;
        if !seen[idx] {
            seen[idx] = true;
            c += 1;
        }
        counts.push(c);
    }
    counts
}

/// Builds the group cuts: threshold `j` is
/// `sqrt(2) * (2^j + 1) * coeff * s * log(2q)` distinct profits, cuts are the
/// least prefix lengths reaching each threshold that fits below the total
/// count, and group `j` is capped at `8 * coeff * q * s / 2^j`.
pub fn build_thresholds(
    items: &[ClassItem],
    q: u64,
    s: u64,
    coeff: u64,
    log_base: f64,
) -> PrefixThresholds {
    let counts = distinct_prefix_counts(items, q);
    let m = *counts.last().unwrap_or(&0);
    let log_term = ((2 * q) as f64).log(log_base);
    let base = std::f64::consts::SQRT_2 * coeff as f64 * s as f64 * log_term;
    let mut cuts = Vec::new();
    for j in 1u32..=40 {
        let t_j = base * ((1u64 << j) as f64 + 1.0);
        if t_j > m as f64 {
            break;
        }
        let need = t_j.ceil() as usize;
        cuts.push(counts.partition_point(|&c| c < need));
    }
    cuts.dedup();
    let caps = (1..=cuts.len() as u32 + 1)
        .map(|j| ((8u128 * coeff as u128 * q as u128 * s as u128) >> j).min(u64::MAX as u128) as u64)
        .collect();
    PrefixThresholds { cuts, caps, coeff }
}

/// Rebuilds the cuts and caps from the definitions with a fresh distinct
/// scan (a set instead of the builder's bitmap, a linear probe instead of
/// binary search) and describes every mismatch against `th`.
pub fn check_thresholds(
    items: &[ClassItem],
    q: u64,
    s: u64,
    th: &PrefixThresholds,
    log_base: f64,
) -> Vec<String> {
    let mut bad = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    let mut counts = vec![0usize];
    for it in items {
        seen.insert(it.p);
        counts.push(seen.len());
    }
    let m = seen.len();
    let log_term = ((2 * q) as f64).log(log_base);
    let base = std::f64::consts::SQRT_2 * th.coeff as f64 * s as f64 * log_term;
    let mut cuts = Vec::new();
    for j in 1u32..=40 {
        let t_j = base * ((1u64 << j) as f64 + 1.0);
        if t_j > m as f64 {
            break;
        }
        let need = t_j.ceil() as usize;
        match counts.iter().position(|&c| c >= need) {
            Some(cut) => cuts.push(cut),
            None => bad.push(format!("threshold {j} needs {need} of {m} distinct")),
        }
    }
    cuts.dedup();
    if cuts != th.cuts {
        bad.push(format!("cuts {:?} differ from rederived {:?}", th.cuts, cuts));
    }
    if th.caps.len() != th.cuts.len() + 1 {
        bad.push(format!(
            "{} caps for {} cuts",
            th.caps.len(),
            th.cuts.len()
        ));
    }
    for (k, &cap) in th.caps.iter().enumerate() {
        let want =
            ((8u128 * th.coeff as u128 * q as u128 * s as u128) >> (k + 1)).min(u64::MAX as u128);
        if cap as u128 != want {
            bad.push(format!("cap {k} is {cap}, definition gives {want}"));
        }
    }
    bad
}

/// Exact `min(f_group, cap)` for one item group.
///
/// Items of equal profit, taken greedily by weight, form a uniform
/// pseudo-concave staircase; the group curve is the fold of its per-profit
/// staircases under the exact kernel. Capping every intermediate at `cap` is
/// lossless (`min(min(u, cap) + v, cap) = min(u + v, cap)` for `v >= 0`) and
/// keeps each fold linear in `cap`.
pub fn capped_group_fn(group: &[ClassItem], cap: u64, t: u64) -> Result<MonotoneStepFn> {
    if cap == 0 {
        return Ok(MonotoneStepFn::zero(t));
    }
    let mut by_profit: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for it in group {
        by_profit.entry(it.p).or_default().push(it.w);
    }
    let mut acc = MonotoneStepFn::zero(t);
    for (p, ws) in by_profit {
        let stair = UniformConcaveFn::staircase(p, &ws, t)?;
        acc = conv_uniform_concave(&acc, &stair, cap);
    }
    Ok(acc)
}

/// Underestimates `min(f, value_cap)` for an efficiency-sorted class-unit
/// item set, within a `1 + O(log(q)/q)` factor at every capacity where `f`
/// stays below the cap. Near the ceiling the result may additionally lag by
/// one item profit; callers that read the curve only where the true value is
/// under the cap (which is how every pipeline call site uses it) never see
/// that lag.
pub(crate) fn capped_curve(
    items: &[ClassItem],
    t: u64,
    q: u64,
    s: u64,
    value_cap: u64,
    cfg: &Config,
) -> Result<MonotoneStepFn> {
    if cfg.cstar < 1 {
        return Err(Error::BoundCoefficient {
            got: cfg.cstar as u64,
            need: 1,
        });
    }
    if items.is_empty() || value_cap == 0 {
        return Ok(MonotoneStepFn::zero(t));
    }
    let qs = q as u128 * s as u128;
    let coeff = (cfg.cstar as u128).max((value_cap as u128).div_ceil(qs)) as u64;
    let th = build_thresholds(items, q, s, coeff, cfg.log_base);
    if cfg.debug_invariants {
        let bad = check_thresholds(items, q, s, &th, cfg.log_base);
        if !bad.is_empty() {
            return Err(Error::OracleGuard(bad.join("; ")));
        }
    }

    let mut bounds = vec![0usize];
    bounds.extend(&th.cuts);
    bounds.push(items.len());
    let mut groups: Vec<(&[ClassItem], u64)> = Vec::new();
    for (k, w) in bounds.windows(2).enumerate() {
        if w[1] > w[0] {
            // The geometric cap bounds a group's share of any optimum; the
            // requested cap is a second valid (often tighter) bound.
            groups.push((&items[w[0]..w[1]], th.caps[k].min(value_cap)));
        }
    }
    let computed = maybe_par_map(cfg.parallel, &groups, |&(g, cap)| {
        capped_group_fn(g, cap, t)
    });
    let mut fns = Vec::with_capacity(computed.len());
    for f in computed {
        fns.push(f?);
    }
    if fns.len() == 1 {
        // Degenerate single group: the capped table is already exact.
        return Ok(fns.pop().unwrap());
    }
    let eps_merge = 1.0 / (2.0 * q as f64);
    Ok(approx_merge(&fns, eps_merge, q, value_cap, false)?.cap(value_cap))
}

/// Class solver: underestimates the class profit curve within a
/// `1 + O(log(q)/q)` factor, in time near-linear in the item count plus
/// `q^2`.
///
/// The bound coefficient adapts to the measured greedy optimum (it is raised
/// until the curve provably fits under `coeff * q * s`), so the only hard
/// precondition is the dispatch itself: the class scale must exceed `s`.
pub fn approx_small_opt(rp: &ReducedProblem, cfg: &Config) -> Result<MonotoneStepFn> {
    if rp.a <= rp.s {
        return Err(Error::WrongBranch { a: rp.a, s: rp.s });
    }
    let c_greedy = greedy_pairs(rp.items.iter().map(|i| (i.w, i.p)), rp.t);
    // The greedy bound caps the whole curve: f <= 2 * c_greedy everywhere.
    let cap = (2 * c_greedy).min(u64::MAX as u128) as u64;
    capped_curve(&rp.items, rp.t, rp.q, rp.s, cap, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convolution::naive_conv;
    use crate::oracle::brute_force_curve;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ci(w: u64, p: u64, id: usize) -> ClassItem {
        ClassItem { w, p, id }
    }

    fn pts_of(g: &MonotoneStepFn) -> Vec<(u64, u64)> {
        g.points().iter().map(|p| (p.x, p.v)).collect()
    }

    fn brute(items: &[ClassItem], t: u64) -> MonotoneStepFn {
        let pairs: Vec<(u64, u64)> = items.iter().map(|i| (i.w, i.p)).collect();
        brute_force_curve(&pairs, t).unwrap().curve
    }

    #[test]
    fn capped_group_fn_builds_staircase_and_caps() {
        let group = [ci(1, 3, 0), ci(2, 3, 1)];
        let full = capped_group_fn(&group, 100, 10).unwrap();
        assert_eq!(pts_of(&full), vec![(0, 0), (1, 3), (3, 6)]);
        let truncated = capped_group_fn(&group, 4, 10).unwrap();
        assert_eq!(pts_of(&truncated), vec![(0, 0), (1, 3), (3, 4)]);
        let zeroed = capped_group_fn(&group, 0, 10).unwrap();
        assert_eq!(pts_of(&zeroed), vec![(0, 0)]);
    }

    #[test]
    fn capped_group_fn_equals_capped_enumeration_on_random_groups() {
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..200 {
            let n = rng.gen_range(1..=12);
            let t = rng.gen_range(1..=25);
            let group: Vec<ClassItem> = (0..n)
                .map(|id| ci(rng.gen_range(0..=t), rng.gen_range(1..=9), id))
                .collect();
            let cap = rng.gen_range(0..=40);
            let got = capped_group_fn(&group, cap, t).unwrap();
            assert_eq!(got, brute(&group, t).cap(cap), "group={group:?} cap={cap}");
        }
    }

    #[test]
    fn distinct_counts_find_first_index_reaching_a_target() {
        // Profits p,q,r,r,s: the third item completes three distinct values.
        let items = [ci(1, 4, 0), ci(1, 5, 1), ci(1, 6, 2), ci(1, 6, 3), ci(1, 7, 4)];
        let counts = distinct_prefix_counts(&items, 4);
        assert_eq!(counts, vec![0, 1, 2, 3, 3, 4]);
        assert_eq!(counts.partition_point(|&c| c < 3), 3);
    }

    #[test]
    fn thresholds_collapse_to_single_group_on_one_distinct_profit() {
        let items: Vec<ClassItem> = (0..30).map(|id| ci(id as u64 + 1, 5, id)).collect();
        let th = build_thresholds(&items, 4, 2, 2, 2.0);
        assert!(th.cuts.is_empty());
        assert_eq!(th.caps.len(), 1);
        assert_eq!(th.caps[0], 8 * 2 * 4 * 2 / 2);
    }

    #[test]
    fn thresholds_match_brute_force_distinct_recount() {
        let mut rng = StdRng::seed_from_u64(37);
        for _ in 0..50 {
            let q = 16u64;
            let n = rng.gen_range(1..=60);
            let items: Vec<ClassItem> = (0..n)
                .map(|id| ci(rng.gen_range(0..=10), rng.gen_range(q..=2 * q), id))
                .collect();
            // A tiny coefficient keeps thresholds low enough to be reachable.
            let th = build_thresholds(&items, q, 1, 1, 1024.0);
            let base = std::f64::consts::SQRT_2 * ((2 * q) as f64).log(1024.0);
            let mut expected = Vec::new();
            for j in 1u32..=12 {
                let t_j = base * ((1u64 << j) as f64 + 1.0);
                let mut distinct: Vec<u64> = Vec::new();
                let mut hit = None;
                for (i, it) in items.iter().enumerate() {
                    if !distinct.contains(&it.p) {
                        distinct.push(it.p);
                    }
                    if distinct.len() as f64 >= t_j {
                        hit = Some(i + 1);
                        break;
                    }
                }
                match hit {
                    Some(i) => expected.push(i),
                    None => break,
                }
            }
            expected.dedup();
            assert_eq!(th.cuts, expected);
        }
    }

    #[test]
    fn threshold_checker_accepts_fresh_builds_and_flags_tampering() {
        let mut rng = StdRng::seed_from_u64(41);
        let q = 16u64;
        let items: Vec<ClassItem> = (0..60)
            .map(|id| ci(rng.gen_range(0..=10), rng.gen_range(q..=2 * q), id))
            .collect();
        let th = build_thresholds(&items, q, 1, 1, 1024.0);
        assert!(!th.cuts.is_empty(), "corpus must actually produce cuts");
        assert!(check_thresholds(&items, q, 1, &th, 1024.0).is_empty());
        let mut wrong = th.clone();
        wrong.cuts[0] += 1;
        assert!(!check_thresholds(&items, q, 1, &wrong, 1024.0).is_empty());
        let mut wrong = th;
        wrong.caps[0] -= 1;
        assert!(!check_thresholds(&items, q, 1, &wrong, 1024.0).is_empty());
    }

    #[test]
    fn decomposition_identity_survives_forced_truncation() {
        // Group 2's standalone curve passes its cap, yet no optimum on [0, t]
        // draws more than the cap from it, so the capped convolution equals
        // the true curve exactly.
        let g1 = [ci(1, 4, 0), ci(1, 4, 1)];
        let g2 = [ci(1, 3, 2), ci(1, 3, 3), ci(1, 3, 4)];
        let t = 3u64;
        let f1 = capped_group_fn(&g1, 100, t).unwrap();
        let f2 = capped_group_fn(&g2, 4, t).unwrap();
        assert_eq!(pts_of(&f2), vec![(0, 0), (1, 3), (2, 4)]);
        let all: Vec<ClassItem> = g1.iter().chain(g2.iter()).copied().collect();
        assert_eq!(naive_conv(&f1, &f2), brute(&all, t));
    }

    #[test]
    fn approx_small_opt_rejects_misrouted_classes() {
        let rp = ReducedProblem {
            items: vec![ci(1, 5, 0)],
            t: 10,
            a: 2,
            q: 16,
            s: 4,
        };
        assert!(matches!(
            approx_small_opt(&rp, &Config::default()),
            Err(Error::WrongBranch { a: 2, s: 4 })
        ));
    }

    #[test]
    fn approx_small_opt_is_exact_for_a_single_group() {
        // One distinct profit keeps every threshold out of reach.
        let items: Vec<ClassItem> = (1..=6).map(|k| ci(k, 4, k as usize)).collect();
        let rp = ReducedProblem {
            items: items.clone(),
            t: 12,
            a: 4,
            q: 4,
            s: 2,
        };
        let got = approx_small_opt(&rp, &Config::default()).unwrap();
        assert_eq!(got, brute(&items, 12));
    }

    #[test]
    fn approx_small_opt_underestimates_within_measured_ratio() {
        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..100 {
            let q = 4u64;
            let n = rng.gen_range(1..=12);
            let t = rng.gen_range(1..=30);
            let items: Vec<ClassItem> = (0..n)
                .map(|id| ci(rng.gen_range(0..=t), rng.gen_range(q..=2 * q), id))
                .collect();
            let mut rp = ReducedProblem {
                items,
                t,
                a: 4,
                q,
                s: 2,
            };
            crate::preprocess::sort_class_items(&mut rp.items);
            let got = approx_small_opt(&rp, &Config::default()).unwrap();
            let exact = brute(&rp.items, t);
            for x in 0..=t {
                let e = exact.eval0(x);
                let a = got.eval0(x);
                assert!(a <= e, "x={x}");
                if e > 0 {
                    assert!(e as f64 <= 1.5 * a as f64, "x={x} e={e} a={a}");
                }
            }
        }
    }
}
