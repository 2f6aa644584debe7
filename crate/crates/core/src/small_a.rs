//! Solver for profit classes with a small scale factor (`a <= s`).
//!
//! A class routed here can have a long profit curve, so no single capped
//! table covers it. Instead the capacity axis is cut into proximity frames:
//! windows `[b_{j+1}, b_j]` paired with a three-way split of the
//! efficiency-sorted items (prefix, window run, suffix) chosen so that inside
//! the window, an optimal solution keeps all but a bounded slice of the
//! prefix and takes only a bounded slice of the suffix. On its window the
//! true curve then equals
//!
//!   max(f_prefix, p(prefix) - B) (+) f_window (+) min(f_suffix, B)
//!
//! with `B` a fixed value ceiling, which makes each part cheap: the prefix
//! and suffix reduce to capped dynamic programs whose tables are shared
//! across frames (each frame is a snapshot of one forward and one backward
//! pass), the window run folds as a handful of per-profit staircases, and the
//! far suffix tail is one capped-curve computation reused by every frame.
//! Stitching the per-frame results back together yields the class curve.

use crate::convolution::{approx_conv, approx_merge, UniformConcaveFn};
use crate::large_a;
use crate::par::maybe_par_map;
use crate::preprocess::{ClassItem, Config, ReducedProblem};
use crate::stepfn::MonotoneStepFn;
use crate::{Error, Result};
use std::collections::BTreeMap;

const UNREACHED: u128 = u128::MAX;

/// Window width parameter: the frame construction counts distinct profits in
/// runs of `2 delta` and `4 delta`. Larger `delta` widens the item runs that
/// separate consecutive windows, which is what the capture argument needs.
pub fn compute_delta(eps: f64, cstar: u32, log_base: f64) -> Result<u64> {
    if !(eps > 0.0) || eps > 1.0 {
        return Err(Error::BadEpsilon(eps));
    }
    if cstar < 1 {
        return Err(Error::BoundCoefficient {
            got: cstar as u64,
            need: 1,
        });
    }
    let two_over = 2.0 / eps;
    let d = (cstar as f64 * two_over.sqrt() * two_over.log(log_base)).ceil();
    Ok((d as u64).max(1))
}

/// One capacity window and its item split.
///
/// Item positions are 1-based counts into the efficiency-sorted class: the
/// prefix is `items[..ell-1]`, the window run is `items[ell-1..r]`, and the
/// suffix is `items[r..]`. `lambda` marks the end of the probe run that
/// defines the next window bound (`0` when the prefix is empty).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProximityFrame {
    pub j: usize,
    /// Window `[b_lo, b_hi]` on the capacity axis.
    pub b_hi: u64,
    pub b_lo: u64,
    /// Longest prefix whose total weight fits in `b_hi`.
    pub beta: usize,
    pub ell: usize,
    pub lambda: usize,
    pub r: usize,
}

struct DistinctScanner {
    seen: Vec<bool>,
    touched: Vec<usize>,
    base: u64,
}

impl DistinctScanner {
    fn new(q: u64) -> Self {
        Self {
            seen: vec![false; q as usize + 2],
            touched: Vec::new(),
            base: q,
        }
    }

    fn reset(&mut self) {
        for &i in &self.touched {
            self.seen[i] = false;
        }
        self.touched.clear();
    }

    fn add(&mut self, p: u64) -> bool {
        debug_assert!(p >= self.base && p <= 2 * self.base);
        let idx = (p - self.base) as usize;
        if self.seen[idx] {
            false
        } else {
            self.seen[idx] = true;
            self.touched.push(idx);
            true
        }
    }
}

/// Builds the frame list, top window first, down to the frame whose lower
/// bound is 0.
///
/// Within each iteration: `beta` is the longest prefix fitting the current
/// bound; `ell` is the largest start such that the items strictly before
/// position `beta` reach `4 delta` distinct profits (1 when unreachable);
/// `r` extends forward from `beta` until `2 delta` distinct profits
/// (falling back to `n`); and `lambda` extends forward from `ell` until
/// `2 delta` distinct profits, the weight before it becoming the next
/// bound. Each later frame reuses the previous probe run end as its prefix
/// cut, so the scans touch each item a bounded number of times.
pub fn proximity_frames(items: &[ClassItem], t: u64, delta: u64, q: u64) -> Vec<ProximityFrame> {
    let n = items.len();
    let delta = delta.max(1) as usize;
    let mut wsum: Vec<u128> = Vec::with_capacity(n + 1);
    wsum.push(0);
    for it in items {
        wsum.push(wsum.last().unwrap() + it.w as u128);
    }
    let mut sc = DistinctScanner::new(q);
    let mut frames = Vec::new();
    let mut b = t;
    let mut beta = wsum.partition_point(|&w| w <= b as u128) - 1;
    loop {
        let j = frames.len();

        sc.reset();
        let mut ell = 1usize;
        let mut cnt = 0usize;
        for i in (1..beta).rev() {
            if sc.add(items[i - 1].p) {
                cnt += 1;
            }
            if cnt >= 4 * delta {
                ell = i;
                break;
            }
        }

        let lambda = if ell > 1 {
            sc.reset();
            let mut cnt = 0usize;
            let mut lam = 0usize;
            for i in ell..=n {
                if sc.add(items[i - 1].p) {
                    cnt += 1;
                }
                if cnt >= 2 * delta {
                    lam = i;
                    break;
                }
            }
            debug_assert!(lam >= ell, "probe run must close inside the window");
            lam
        } else {
            0
        };

        sc.reset();
        let mut r = n;
        let mut cnt = 0usize;
        for i in beta.max(1)..=n {
            if sc.add(items[i - 1].p) {
                cnt += 1;
            }
            if cnt >= 2 * delta {
                r = i;
                break;
            }
        }

        let b_lo = wsum[lambda] as u64;
        frames.push(ProximityFrame {
            j,
            b_hi: b,
            b_lo,
            beta,
            ell,
            lambda,
            r,
        });
        if b_lo == 0 {
            break;
        }
        debug_assert!(b_lo < b, "window bounds must strictly descend");
        b = b_lo;
        // Zero-weight items sort to the front, so a positive bound puts the
        // probe run end right at the fitting-prefix cut of the next frame.
        beta = lambda;
        if frames.len() > n + 1 {
            debug_assert!(false, "frame recursion failed to terminate");
            break;
        }
    }
    frames
}

fn distinct_in(items: &[ClassItem], lo: usize, hi: usize) -> usize {
    // 1-based inclusive range, empty when lo > hi.
    let mut seen = std::collections::HashSet::new();
    for it in items.iter().take(hi).skip(lo.saturating_sub(1)) {
        seen.insert(it.p);
    }
    seen.len()
}

/// Recomputes every construction-level frame invariant from the definitions
/// and returns a description of each violation. These hold for any `delta`,
/// independent of the reduced-problem value bound.
pub fn check_frame_invariants(
    frames: &[ProximityFrame],
    items: &[ClassItem],
    t: u64,
    delta: u64,
) -> Vec<String> {
    let delta = delta.max(1) as usize;
    let n = items.len();
    let mut bad = Vec::new();
    let mut wsum: Vec<u128> = vec![0];
    for it in items {
        wsum.push(wsum.last().unwrap() + it.w as u128);
    }
    if frames.is_empty() {
        return vec!["no frames".into()];
    }
    if frames[0].b_hi != t {
        bad.push(format!("frame 0 window top {} != t {}", frames[0].b_hi, t));
    }
    if frames.last().unwrap().b_lo != 0 {
        bad.push("last window bottom != 0".into());
    }
    for f in frames {
        let j = f.j;
        let beta_ref = wsum.partition_point(|&w| w <= f.b_hi as u128) - 1;
        if f.beta != beta_ref {
            bad.push(format!("frame {j}: beta {} != recomputed {beta_ref}", f.beta));
        }
        let full_pre = distinct_in(items, 1, f.beta.saturating_sub(1));
        if full_pre >= 4 * delta {
            if distinct_in(items, f.ell, f.beta.saturating_sub(1)) != 4 * delta {
                bad.push(format!("frame {j}: window-left run is not exactly 4 delta"));
            }
            if f.ell + 1 <= f.beta.saturating_sub(1)
                && distinct_in(items, f.ell + 1, f.beta - 1) >= 4 * delta
            {
                bad.push(format!("frame {j}: ell {} is not maximal", f.ell));
            }
        } else if f.ell != 1 {
            bad.push(format!("frame {j}: ell {} despite unreachable 4 delta", f.ell));
        }
        if distinct_in(items, f.beta.max(1), n) >= 2 * delta {
            if distinct_in(items, f.beta.max(1), f.r) != 2 * delta {
                bad.push(format!("frame {j}: window-right run is not exactly 2 delta"));
            }
            if f.r > f.beta.max(1) && distinct_in(items, f.beta.max(1), f.r - 1) >= 2 * delta {
                bad.push(format!("frame {j}: r {} is not minimal", f.r));
            }
        } else if f.r != n {
            bad.push(format!("frame {j}: r {} despite unreachable 2 delta", f.r));
        }
        if f.ell > 1 {
            if distinct_in(items, f.ell, f.lambda) != 2 * delta {
                bad.push(format!("frame {j}: probe run is not exactly 2 delta"));
            }
            if f.lambda > f.ell && distinct_in(items, f.ell, f.lambda - 1) >= 2 * delta {
                bad.push(format!("frame {j}: lambda {} is not minimal", f.lambda));
            }
        } else if f.lambda != 0 {
            bad.push(format!("frame {j}: lambda {} with empty prefix", f.lambda));
        }
        if f.b_lo as u128 != wsum[f.lambda] {
            bad.push(format!("frame {j}: window bottom != weight before lambda"));
        }
    }
    for w in frames.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.b_lo != b.b_hi {
            bad.push(format!("frames {} and {}: windows do not tile", a.j, b.j));
        }
        if b.beta != a.lambda {
            bad.push(format!("frame {}: beta != previous lambda", b.j));
        }
        if b.r > a.beta {
            bad.push(format!("frame {}: r exceeds previous beta", b.j));
        }
        if b.lambda > a.ell {
            bad.push(format!("frame {}: lambda exceeds previous ell", b.j));
        }
        if b.j >= 2 && (b.r >= a.r || b.ell >= a.ell) {
            bad.push(format!("frame {}: run cuts fail to strictly descend", b.j));
        }
    }
    if frames.len() >= 2 {
        if frames[1].r > frames[0].beta {
            bad.push("frame 1: r exceeds the top fitting prefix".into());
        }
        if frames[1].ell >= frames[0].beta {
            bad.push("frame 1: ell reaches the top fitting prefix".into());
        }
        let span: u128 = frames[1..].iter().map(|f| (f.r - f.ell) as u128).sum();
        if span > 2 * frames[0].beta as u128 {
            bad.push(format!(
                "window runs span {span} > twice the top prefix {}",
                frames[0].beta
            ));
        }
    }
    bad
}

/// Bounds that additionally rely on the reduced-problem value guarantee
/// (curve at most `2 q^2 / a`): the top fitting prefix is short and the
/// window runs are short in total. Violations here flag an input outside
/// the reduction contract, not a construction bug.
pub fn check_reduced_bounds(frames: &[ProximityFrame], q: u64, a: u64) -> Vec<String> {
    let mut bad = Vec::new();
    let Some(top) = frames.first() else {
        return vec!["no frames".into()];
    };
    if top.beta as u128 * a as u128 >= 2 * q as u128 {
        bad.push(format!("top prefix {} reaches 2q/a", top.beta));
    }
    let span: u128 = frames[1..].iter().map(|f| (f.r - f.ell) as u128).sum();
    if span * a as u128 > 4 * q as u128 {
        bad.push(format!("window runs span {span} > 4q/a"));
    }
    bad
}

fn value_ceiling(cfg: &Config, q: u64, s: u64) -> u64 {
    4 * cfg.cstar as u64 * q * s
}

fn dp_ceiling(cfg: &Config, q: u64, a: u64) -> usize {
    (4 * cfg.cstar as u64 * a * q) as usize
}

/// Forward capped DP over the frame prefixes, snapshotting at each prefix
/// cut. Returns, per frame, a curve approximating
/// `max(f_prefix, p(prefix) - B)` together with its floor
/// `u = max(0, p(prefix) - B)`.
///
/// The DP state is the profit discarded from the full prefix, in units of
/// `s / a` class units rounded up, storing the largest weight that can be
/// freed for that price. Each table entry becomes the breakpoint "spend all
/// but `x` weight, keep all but roughly `v` profit"; entries past the table
/// cap only describe solutions below the floor, which the floor breakpoint
/// already covers.
pub fn prefix_family(
    rp: &ReducedProblem,
    frames: &[ProximityFrame],
    cfg: &Config,
) -> Result<Vec<(MonotoneStepFn, u64)>> {
    let (q, s, a, t) = (rp.q, rp.s, rp.a, rp.t);
    let b_cap = value_ceiling(cfg, q, s);
    let b_dp = dp_ceiling(cfg, q, a);
    let items = &rp.items;

    let mut psum: Vec<u128> = vec![0];
    let mut wsum: Vec<u128> = vec![0];
    for it in items {
        psum.push(psum.last().unwrap() + it.p as u128);
        wsum.push(wsum.last().unwrap() + it.w as u128);
    }

    let mut order: Vec<usize> = (0..frames.len()).collect();
    order.sort_by_key(|&j| frames[j].ell);

    let mut maxw = vec![UNREACHED; b_dp + 1];
    maxw[0] = 0;
    let mut done = 0usize;
    let mut out: Vec<Option<(MonotoneStepFn, u64)>> = vec![None; frames.len()];
    for &j in &order {
        let k = frames[j].ell - 1;
        while done < k {
            let it = &items[done];
            let pt = ((it.p * a).div_ceil(s)) as usize;
            if pt <= b_dp {
                for v in (pt..=b_dp).rev() {
                    if maxw[v - pt] != UNREACHED {
                        let cand = maxw[v - pt] + it.w as u128;
                        if maxw[v] == UNREACHED || cand > maxw[v] {
                            maxw[v] = cand;
                        }
                    }
                }
            }
            done += 1;
        }
        let u128_floor = psum[k].saturating_sub(b_cap as u128);
        let floor =
            u64::try_from(u128_floor).map_err(|_| Error::Overflow("prefix value floor"))?;
        let mut pts: Vec<(u64, u64)> = Vec::with_capacity(b_dp + 2);
        pts.push((0, floor));
        for (v, &w) in maxw.iter().enumerate() {
            if w == UNREACHED {
                continue;
            }
            debug_assert!(w <= wsum[k]);
            let x = wsum[k] - w;
            if x > t as u128 {
                continue;
            }
            let discarded = v as u128 * s as u128 / a as u128;
            let val = u64::try_from(psum[k].saturating_sub(discarded))
                .map_err(|_| Error::Overflow("prefix value"))?;
            pts.push((x as u64, val));
        }
        out[j] = Some((MonotoneStepFn::envelope(&pts, t, false), floor));
    }
    Ok(out.into_iter().map(|o| o.unwrap()).collect())
}

fn suffix_snapshot(minw: &[u128], s: u64, a: u64, t: u64) -> MonotoneStepFn {
    // Repair "exactly this much profit" to "at least this much", then emit
    // class-unit breakpoints.
    let mut repaired = vec![UNREACHED; minw.len()];
    let mut best = UNREACHED;
    for v in (0..minw.len()).rev() {
        best = best.min(minw[v]);
        repaired[v] = best;
    }
    let mut pts: Vec<(u64, u64)> = Vec::new();
    for (v, &w) in repaired.iter().enumerate() {
        if w > t as u128 {
            continue;
        }
        pts.push((w as u64, (v as u128 * s as u128 / a as u128) as u64));
    }
    MonotoneStepFn::envelope(&pts, t, false)
}

/// Per-frame suffix curves `min(f_suffix, B)`, top frame first.
///
/// The top frame's suffix starts past its own window run, beyond the reach
/// of the shared split below, so it gets a direct capped-curve computation.
/// Every later suffix splits at the top fitting prefix: the far tail is one
/// shared capped curve, and the near parts come from one backward capped DP
/// (profit units of `s / a` rounded down) snapshotted at each run end, with
/// the two parts convolved per frame.
pub fn suffix_family(
    rp: &ReducedProblem,
    frames: &[ProximityFrame],
    cfg: &Config,
) -> Result<Vec<MonotoneStepFn>> {
    let (q, s, a, t) = (rp.q, rp.s, rp.a, rp.t);
    let b_cap = value_ceiling(cfg, q, s);
    let b_dp = dp_ceiling(cfg, q, a);
    let items = &rp.items;
    let theta = frames.len() - 1;
    let beta0 = frames[0].beta;

    let mut out = Vec::with_capacity(theta + 1);
    out.push(large_a::capped_curve(
        &items[frames[0].r..],
        t,
        q,
        s,
        b_cap,
        cfg,
    )?);
    if theta == 0 {
        return Ok(out);
    }

    let tail = large_a::capped_curve(&items[beta0..], t, q, s, b_cap, cfg)?;
    let eps_conv = 1.0 / (8.0 * (s * a) as f64);
    let mut minw = vec![UNREACHED; b_dp + 1];
    minw[0] = 0;
    let mut start = beta0 + 1;
    for frame in &frames[1..=theta] {
        let target = frame.r + 1;
        debug_assert!(target <= start, "run ends must descend");
        while start > target {
            start -= 1;
            let it = &items[start - 1];
            let pt = (it.p * a / s) as usize;
            for v in (0..=b_dp).rev() {
                if minw[v] != UNREACHED {
                    let tgt = (v + pt).min(b_dp);
                    let cand = minw[v] + it.w as u128;
                    if cand < minw[tgt] {
                        minw[tgt] = cand;
                    }
                }
            }
        }
        let near = suffix_snapshot(&minw, s, a, t);
        let combined = if tail.max_value() == 0 {
            near
        } else if near.max_value() == 0 {
            tail.clone()
        } else {
            approx_conv(&near, &tail, eps_conv, 1, 2 * b_cap, None)?.cap(b_cap)
        };
        out.push(combined);
    }
    Ok(out)
}

/// Assembles one frame's curve: convolve the floored prefix with the capped
/// suffix (after shifting the floor out so the relative tolerance bites),
/// fold in the window run as per-profit staircases, and shift the floor
/// back.
pub fn combine_frame(
    prefix: &MonotoneStepFn,
    floor: u64,
    suffix: &MonotoneStepFn,
    window: &[ClassItem],
    eps_conv: f64,
    eps_fold: f64,
    t: u64,
) -> Result<MonotoneStepFn> {
    let shifted = prefix.shift_value(-(floor as i64))?;
    let span = shifted
        .max_value()
        .saturating_add(suffix.max_value())
        .max(1);
    let conv = approx_conv(&shifted, suffix, eps_conv, 1, span, None)?;

    let mut by_profit: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for it in window {
        by_profit.entry(it.p).or_default().push(it.w);
    }
    let mut fns = vec![conv];
    let mut reach = fns[0].max_value();
    for (p, ws) in by_profit {
        let stair = UniformConcaveFn::staircase(p, &ws, t)?;
        reach = reach.saturating_add(stair.max_value());
        fns.push(stair.to_step_fn());
    }
    let folded = if fns.len() == 1 {
        fns.pop().unwrap()
    } else {
        approx_merge(&fns, eps_fold, 1, reach.max(1), true)?
    };
    folded.shift_value(floor as i64)
}

/// Resolution floor for the greedy route in [`solve_reduced`]: below it the
/// one-item slack is a large fraction of the class range and the staircase
/// fold is both cheap and materially tighter.
const GREEDY_SPAN_MIN_Q: u64 = 64;

/// Prefix sums of the efficiency-sorted class, as an achievable step
/// function.
///
/// The fractional relaxation lies between this curve and the true one and
/// overshoots the prefix by less than one item, so the curve underestimates
/// `f` within one profit, at most `2q` class units.
fn greedy_span_curve(rp: &ReducedProblem, t: u64) -> Result<MonotoneStepFn> {
    let mut pts: Vec<(u64, u64)> = Vec::with_capacity(rp.items.len() + 1);
    pts.push((0, 0));
    let (mut w, mut v) = (0u128, 0u128);
    for it in &rp.items {
        w += it.w as u128;
        if w > t as u128 {
            break;
        }
        v += it.p as u128;
        let v64 = u64::try_from(v).map_err(|_| Error::Overflow("greedy span value"))?;
        pts.push((w as u64, v64));
    }
    let curve = MonotoneStepFn::envelope(&pts, t, false);
    let reach = curve.max_value().max(1);
    curve.sparsify(1.0 / (2.0 * rp.q as f64), rp.q, reach)
}

/// Class solver for the small-scale branch: builds the frames, runs both DP
/// families, combines each frame, and stitches the windows back into one
/// curve over `[0, t]`.
///
/// A scale-1 class whose single frame spans every item short-circuits to the
/// greedy prefix curve: its one-item slack already sits inside the additive
/// budget, which only a unit scale affords, and it avoids a staircase fold
/// whose cost grows with the class value range.
pub fn solve_reduced(rp: &ReducedProblem, cfg: &Config) -> Result<MonotoneStepFn> {
    if rp.a > rp.s {
        return Err(Error::WrongBranch { a: rp.a, s: rp.s });
    }
    if cfg.cstar < 1 {
        return Err(Error::BoundCoefficient {
            got: cfg.cstar as u64,
            need: 1,
        });
    }
    let (q, s, a, t) = (rp.q, rp.s, rp.a, rp.t);
    if rp.items.is_empty() || t == 0 {
        return Ok(MonotoneStepFn::zero(t));
    }
    let delta = match cfg.delta_override {
        Some(d) => d.max(1),
        None => compute_delta(1.0 / q as f64, cfg.cstar, cfg.log_base)?,
    };
    let frames = proximity_frames(&rp.items, t, delta, q);
    if cfg.debug_invariants {
        let mut bad = check_frame_invariants(&frames, &rp.items, t, delta);
        bad.extend(check_reduced_bounds(&frames, q, a));
        if !bad.is_empty() {
            return Err(Error::OracleGuard(bad.join("; ")));
        }
    }
    if a == 1
        && q >= GREEDY_SPAN_MIN_Q
        && frames.len() == 1
        && frames[0].ell == 1
        && frames[0].r == rp.items.len()
    {
        return greedy_span_curve(rp, t);
    }

    let prefixes = prefix_family(rp, &frames, cfg)?;
    let suffixes = suffix_family(rp, &frames, cfg)?;
    let eps_conv = 1.0 / (8.0 * (s * a) as f64);

    let jobs: Vec<usize> = (0..frames.len()).collect();
    let combined = maybe_par_map(cfg.parallel, &jobs, |&j| {
        let fr = &frames[j];
        let eps_fold = if j == 0 {
            1.0 / (2.0 * q as f64)
        } else {
            1.0 / (2.0 * a as f64 * (fr.r - fr.ell + 1) as f64)
        };
        combine_frame(
            &prefixes[j].0,
            prefixes[j].1,
            &suffixes[j],
            &rp.items[fr.ell - 1..fr.r],
            eps_conv,
            eps_fold,
            t,
        )
    });
    let mut curves = Vec::with_capacity(combined.len());
    for c in combined {
        curves.push(c?);
    }

    let mut pieces: Vec<(u64, u64, MonotoneStepFn)> = Vec::with_capacity(curves.len());
    for (fr, g) in frames.iter().zip(curves).rev() {
        pieces.push((fr.b_lo, fr.b_hi, g));
    }
    MonotoneStepFn::stitch(&pieces)
}
