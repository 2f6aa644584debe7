//! (max,+)-convolution of monotone step functions.
//!
//! The convolution `(f (+) g)(x) = max { f(x') + g(x - x') : 0 <= x' <= x }`
//! is the profit curve of the union of two independent item pools. Three
//! entry points cover the pipeline's needs:
//!
//! - [`naive_conv`]: exact, quadratic in breakpoint counts. Reference
//!   implementation and oracle for everything else.
//! - [`conv_uniform_concave`]: exact and linear in the value range when one
//!   operand is a uniform pseudo-concave staircase. Works on the dense
//!   inverse (least capacity per value) split by value residue; each residue
//!   class forms a totally monotone matrix whose row minima are found with
//!   SMAWK.
//! - [`approx_conv`] / [`approx_merge`]: `(1 + eps)`-style approximations
//!   that thin operands to geometric value levels first. The result `r`
//!   always satisfies `r <= f (+) g` and, on the advertised value range,
//!   `f (+) g <= (1 + C * eps) * r` with `C = 3` (one factor for thinning
//!   the operands, squared by re-thinning the output).

use crate::stepfn::{MonotoneStepFn, Point, INF_X};
use crate::{Error, Result};

const INF128: u128 = u128::MAX / 4;

/// Offset added per fabricated staircase step past the real top. Large enough
/// that no fabricated entry can beat a real one (real positions fit in a
/// u64), small enough that graded stacks of them stay far from `INF128`.
const TAIL_PENALTY: u128 = 1 << 80;

/// Staircase with jumps of one fixed height `p` at positions whose gaps never
/// shrink: the value at `x` is `p * |{k : breaks[k] <= x}|`, zero before the
/// first break. Equal-profit item groups taken greedily by weight produce
/// exactly this shape.
#[derive(Debug, Clone)]
pub struct UniformConcaveFn {
    p: u64,
    breaks: Vec<u64>,
    domain_hi: u64,
}

impl UniformConcaveFn {
    /// Validates the quantum, ordering, and the nondecreasing-gap rule
    /// (counting the leading gap from `x = 0`).
    pub fn new(p: u64, breaks: Vec<u64>, domain_hi: u64) -> Result<Self> {
        if p == 0 {
            return Err(Error::ZeroQuantum);
        }
        let mut prev_gap = 0u64;
        let mut prev_x = 0u64;
        for (k, &b) in breaks.iter().enumerate() {
            if b > domain_hi {
                return Err(Error::PointBeyondDomain { x: b, hi: domain_hi });
            }
            if b < prev_x {
                return Err(Error::NotPseudoConcave(k));
            }
            let gap = b - prev_x;
            if k > 0 && gap < prev_gap {
                return Err(Error::NotPseudoConcave(k));
            }
            prev_gap = gap;
            prev_x = b;
        }
        Ok(Self {
            p,
            breaks,
            domain_hi,
        })
    }

    /// Staircase of one equal-profit item group: weights are taken in
    /// nondecreasing order, breaks are their running sums. Breaks past the
    /// domain are dropped (those items can never fit).
    pub fn staircase(profit: u64, weights: &[u64], domain_hi: u64) -> Result<Self> {
        if profit == 0 {
            return Err(Error::ZeroQuantum);
        }
        let mut ws = weights.to_vec();
        ws.sort_unstable();
        let mut breaks = Vec::with_capacity(ws.len());
        let mut acc = 0u64;
        for w in ws {
            acc = acc.checked_add(w).ok_or(Error::Overflow("staircase"))?;
            if acc > domain_hi {
                break;
            }
            breaks.push(acc);
        }
        Self::new(profit, breaks, domain_hi)
    }

    /// Reads a plain step function back as a uniform staircase, rejecting
    /// bottom heads, off-quantum values, and shrinking gaps.
    ///
    /// The quantum is the gcd of all value jumps: a coarser guess (say, the
    /// first jump, which can be several coincident steps at once) would
    /// misread finer jumps later.
    pub fn from_step_fn(f: &MonotoneStepFn) -> Result<Self> {
        if f.is_bottom() {
            return Err(Error::UnexpectedBottom);
        }
        fn gcd(mut a: u64, mut b: u64) -> u64 {
            while b != 0 {
                (a, b) = (b, a % b);
            }
            a
        }
        let pts = f.points();
        let mut p = 0u64;
        let mut prev_v = 0u64;
        for (i, pt) in pts.iter().enumerate() {
            if i == 0 && pt.v == 0 {
                continue;
            }
            p = gcd(p, pt.v - prev_v);
            prev_v = pt.v;
        }
        if p == 0 {
            // Constant zero: an empty staircase with a unit quantum.
            return Self::new(1, Vec::new(), f.domain_hi());
        }
        let mut breaks = Vec::new();
        prev_v = 0;
        for (i, pt) in pts.iter().enumerate() {
            if i == 0 && pt.v == 0 {
                continue;
            }
            for _ in 0..(pt.v - prev_v) / p {
                breaks.push(pt.x);
            }
            prev_v = pt.v;
        }
        Self::new(p, breaks, f.domain_hi())
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn breaks(&self) -> &[u64] {
        &self.breaks
    }

    pub fn domain_hi(&self) -> u64 {
        self.domain_hi
    }

    /// Total height `p * breaks.len()`.
    pub fn max_value(&self) -> u64 {
        self.p * self.breaks.len() as u64
    }

    /// Step-function view.
    pub fn to_step_fn(&self) -> MonotoneStepFn {
        let mut pts: Vec<(u64, u64)> = vec![(0, 0)];
        for (k, &b) in self.breaks.iter().enumerate() {
            pts.push((b, self.p * (k as u64 + 1)));
        }
        MonotoneStepFn::make(&pts, self.domain_hi).expect("staircase points are canonical")
    }

    /// Least capacity reaching value `k * p` (the cumulative break position).
    fn y(&self, k: usize) -> u64 {
        if k == 0 {
            0
        } else {
            self.breaks[k - 1]
        }
    }
}

/// Exact convolution by enumerating breakpoint pairs. Quadratic; the oracle
/// for every faster path.
pub fn naive_conv(f: &MonotoneStepFn, g: &MonotoneStepFn) -> MonotoneStepFn {
    let dom = f.domain_hi().min(g.domain_hi());
    let bottom = f.is_bottom() || g.is_bottom();
    let mut cands: Vec<(u64, u64)> = Vec::with_capacity(f.complexity() * g.complexity());
    for a in f.points() {
        for b in g.points() {
            let x = a.x.saturating_add(b.x);
            if x <= dom {
                cands.push((x, a.v + b.v));
            }
        }
    }
    if cands.is_empty() {
        // Every pairing lands past the domain: nothing is feasible anywhere.
        return MonotoneStepFn::envelope(&[], dom, true);
    }
    MonotoneStepFn::envelope(&cands, dom, bottom)
}

/// Exact `min(f (+) g, value_cap)` for a uniform pseudo-concave `g`, in time
/// linear in the capped value range plus the staircase length.
///
/// With the `scan-conv` feature the quadratic reference scan replaces the
/// SMAWK path everywhere, which exists purely to differentially test the
/// kernel.
pub fn conv_uniform_concave(
    f: &MonotoneStepFn,
    g: &UniformConcaveFn,
    value_cap: u64,
) -> MonotoneStepFn {
    #[cfg(feature = "scan-conv")]
    {
        conv_uniform_concave_scan(f, g, value_cap)
    }
    #[cfg(not(feature = "scan-conv"))]
    {
        conv_uniform_concave_smawk(f, g, value_cap)
    }
}

/// SMAWK-backed implementation of [`conv_uniform_concave`].
pub fn conv_uniform_concave_smawk(
    f: &MonotoneStepFn,
    g: &UniformConcaveFn,
    value_cap: u64,
) -> MonotoneStepFn {
    let dom = f.domain_hi().min(g.domain_hi());
    let p = g.p();
    let kmax = g.breaks().len();
    let bf = f.max_value().min(value_cap);
    let b_out = value_cap.min(f.max_value().saturating_add(p.saturating_mul(kmax as u64)));
    let inv = f.invert(bf);

    // Graded extension of the break positions keeps the matrix Monge past the
    // staircase's top instead of introducing ties at a sentinel. The growing
    // penalty keeps the gaps nondecreasing across and beyond the seam while
    // pricing every fabricated step out of contention against real entries.
    let tail_gap = if kmax >= 1 {
        (g.y(kmax) - g.y(kmax - 1)).max(1)
    } else {
        1
    };
    let y_ext = |d: usize| -> u128 {
        if d <= kmax {
            g.y(d) as u128
        } else {
            let extra = (d - kmax) as u128;
            g.y(kmax) as u128
                + extra * TAIL_PENALTY
                + extra * (extra + 1) / 2 * tail_gap as u128
        }
    };

    let mut reach = vec![INF_X; b_out as usize + 1];
    let res_hi = p.min(b_out + 1);
    for rho in 0..res_hi {
        let cols = if rho <= bf {
            ((bf - rho) / p) as usize + 1
        } else {
            0
        };
        let rows = ((b_out - rho) / p) as usize + 1;
        if cols == 0 {
            continue;
        }
        let entry = |m: usize, k: usize| -> u128 {
            if k > m {
                return INF128;
            }
            match inv.min_x(k as u64 * p + rho) {
                Some(x) => x as u128 + y_ext(m - k),
                None => INF128,
            }
        };
        let argmin = smawk_row_minima(rows, cols, &entry);
        for (m, &k) in argmin.iter().enumerate() {
            let val = entry(m, k);
            if val < TAIL_PENALTY {
                reach[(m as u64 * p + rho) as usize] = val.min(INF_X as u128) as u64;
            }
        }
    }
    // The residue matrices enumerate exact-value decompositions, but the cap
    // also absorbs every solution whose uncapped value overshoots it. Those
    // witnesses live past the end of the array, so the top entry is
    // recomputed by a direct scan with saturating overshoot candidates.
    let mut best = reach[b_out as usize];
    for k in 0..=kmax.min((b_out / p) as usize + 1) {
        let v_needed = b_out.saturating_sub(k as u64 * p);
        if v_needed > bf {
            continue;
        }
        if let Some(x) = inv.min_x(v_needed) {
            best = best.min(x.saturating_add(g.y(k)));
        }
    }
    reach[b_out as usize] = best;
    extract_from_reach(reach, dom, f.is_bottom())
}

/// Quadratic reference scan for [`conv_uniform_concave`].
pub fn conv_uniform_concave_scan(
    f: &MonotoneStepFn,
    g: &UniformConcaveFn,
    value_cap: u64,
) -> MonotoneStepFn {
    let dom = f.domain_hi().min(g.domain_hi());
    let p = g.p();
    let kmax = g.breaks().len();
    let bf = f.max_value().min(value_cap);
    let b_out = value_cap.min(f.max_value().saturating_add(p.saturating_mul(kmax as u64)));
    let inv = f.invert(bf);
    let mut reach = vec![INF_X; b_out as usize + 1];
    for u in 0..=b_out {
        let mut best = INF_X;
        for k in 0..=kmax.min((u / p) as usize + 1) {
            let v_needed = u.saturating_sub(k as u64 * p);
            if v_needed > bf {
                continue;
            }
            if let Some(x) = inv.min_x(v_needed) {
                best = best.min(x.saturating_add(g.y(k)));
            }
        }
        reach[u as usize] = best;
    }
    extract_from_reach(reach, dom, f.is_bottom())
}

/// Turns a per-value least-capacity array into a step function: a suffix
/// minimum repairs entries where an exact value is unreachable but a larger
/// one is cheaper, then each distinct capacity keeps its largest value.
pub(crate) fn extract_from_reach(mut reach: Vec<u64>, dom: u64, bottom: bool) -> MonotoneStepFn {
    for u in (0..reach.len().saturating_sub(1)).rev() {
        reach[u] = reach[u].min(reach[u + 1]);
    }
    let mut pts: Vec<Point> = Vec::new();
    for (u, &x) in reach.iter().enumerate() {
        if x > dom {
            break;
        }
        match pts.last_mut() {
            Some(last) if last.x == x => last.v = u as u64,
            _ => pts.push(Point { x, v: u as u64 }),
        }
    }
    if pts.is_empty() {
        debug_assert!(bottom, "a non-bottom operand always reaches value 0 at x = 0");
        return MonotoneStepFn::envelope(&[], dom, true);
    }
    if !bottom && pts[0].x > 0 {
        pts.insert(0, Point { x: 0, v: 0 });
    }
    MonotoneStepFn::from_canonical(pts, dom, bottom)
}

/// Row minima (leftmost on ties) of an implicitly given totally monotone
/// matrix, in `O(rows + cols)` evaluations.
fn smawk_row_minima(rows: usize, cols: usize, m: &dyn Fn(usize, usize) -> u128) -> Vec<usize> {
    let mut out = vec![0usize; rows];
    let row_ids: Vec<usize> = (0..rows).collect();
    let col_ids: Vec<usize> = (0..cols).collect();
    smawk_rec(&row_ids, &col_ids, m, &mut out);
    out
}

fn smawk_rec(
    rows: &[usize],
    cols: &[usize],
    m: &dyn Fn(usize, usize) -> u128,
    out: &mut [usize],
) {
    if rows.is_empty() {
        return;
    }
    // Reduce: keep at most |rows| columns that can still hold a row minimum.
    let mut cand: Vec<usize> = Vec::with_capacity(rows.len());
    for &c in cols {
        loop {
            match cand.last() {
                Some(&top) => {
                    let r = rows[cand.len() - 1];
                    if m(r, top) > m(r, c) {
                        cand.pop();
                    } else {
                        if cand.len() < rows.len() {
                            cand.push(c);
                        }
                        break;
                    }
                }
                None => {
                    cand.push(c);
                    break;
                }
            }
        }
    }
    if rows.len() == 1 {
        let r = rows[0];
        let mut best = cand[0];
        let mut best_v = m(r, best);
        for &c in &cand[1..] {
            let v = m(r, c);
            if v < best_v {
                best_v = v;
                best = c;
            }
        }
        out[r] = best;
        return;
    }
    let odd_rows: Vec<usize> = rows.iter().copied().skip(1).step_by(2).collect();
    smawk_rec(&odd_rows, &cand, m, out);
    // Even rows: each minimum sits between its odd neighbours' minima.
    let mut j = 0usize;
    let mut i = 0usize;
    while i < rows.len() {
        let r = rows[i];
        let upper = if i + 1 < rows.len() {
            out[rows[i + 1]]
        } else {
            *cand.last().unwrap()
        };
        let mut best = cand[j];
        let mut best_v = m(r, best);
        while cand[j] != upper {
            j += 1;
            let v = m(r, cand[j]);
            if v < best_v {
                best_v = v;
                best = cand[j];
            }
        }
        out[r] = best;
        i += 2;
    }
}

/// Approximate convolution with guarantee `r <= f (+) g <= (1 + 3 eps) * r`
/// on `{x : (f (+) g)(x) >= a_lo}`.
///
/// When `concave_hint` is given it must describe `g`; the operand is then
/// used exactly and only `f` and the output are thinned, which drops the
/// cost to the value range instead of the level-pair product.
pub fn approx_conv(
    f: &MonotoneStepFn,
    g: &MonotoneStepFn,
    eps: f64,
    a_lo: u64,
    b_hi: u64,
    concave_hint: Option<&UniformConcaveFn>,
) -> Result<MonotoneStepFn> {
    if !(eps > 0.0) || eps > 1.0 {
        return Err(Error::BadEpsilon(eps));
    }
    if a_lo < 1 {
        return Err(Error::BadLowerRange(a_lo));
    }
    if let Some(uc) = concave_hint {
        let f_sp = f.sparsify(eps, a_lo, b_hi)?;
        let exact = conv_uniform_concave(&f_sp, uc, b_hi.saturating_add(uc.max_value()));
        return exact.sparsify(eps, a_lo, b_hi);
    }
    let f_sp = f.sparsify(eps, a_lo, b_hi)?;
    let g_sp = g.sparsify(eps, a_lo, b_hi)?;
    naive_conv(&f_sp, &g_sp).sparsify(eps, a_lo, b_hi)
}

/// Approximate m-way convolution.
///
/// Case `all_uniform_concave = false` merges along a balanced binary tree of
/// [`approx_conv`] calls at per-level parameter `eps / ceil(log2 m)`, so the
/// total factor compounds to at most `(1 + 3 eps') ^ ceil(log2 m)`.
///
/// Case `all_uniform_concave = true` requires every operand after the first
/// to be a uniform pseudo-concave staircase and left-folds them with the
/// exact kernel at per-fold parameter `eps / m`; values are clamped to
/// `b_hi`, which the caller asserts bounds the true merge on its domain.
pub fn approx_merge(
    fs: &[MonotoneStepFn],
    eps: f64,
    a_lo: u64,
    b_hi: u64,
    all_uniform_concave: bool,
) -> Result<MonotoneStepFn> {
    if !(eps > 0.0) || eps > 1.0 {
        return Err(Error::BadEpsilon(eps));
    }
    if a_lo < 1 {
        return Err(Error::BadLowerRange(a_lo));
    }
    let m = fs.len();
    if m == 0 {
        return Err(Error::EmptyMerge);
    }
    if m == 1 {
        return fs[0].sparsify(eps, a_lo, b_hi);
    }
    if all_uniform_concave {
        let eps_fold = eps / m as f64;
        let mut acc = fs[0].clone();
        for f in &fs[1..] {
            let uc = UniformConcaveFn::from_step_fn(f)?;
            let thin = acc.sparsify(eps_fold, a_lo, b_hi)?;
            acc = conv_uniform_concave(&thin, &uc, b_hi);
        }
        return acc.sparsify(eps_fold, a_lo, b_hi);
    }
    let eps_level = eps / (m as f64).log2().ceil();
    merge_tree(fs, eps_level, a_lo, b_hi)
}

fn merge_tree(fs: &[MonotoneStepFn], eps_level: f64, a_lo: u64, b_hi: u64) -> Result<MonotoneStepFn> {
    match fs.len() {
        1 => fs[0].sparsify(eps_level, a_lo, b_hi),
        n => {
            let (left, right) = fs.split_at(n / 2);
            let l = merge_tree(left, eps_level, a_lo, b_hi)?;
            let r = merge_tree(right, eps_level, a_lo, b_hi)?;
            approx_conv(&l, &r, eps_level, a_lo, b_hi, None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn f(points: &[(u64, u64)], hi: u64) -> MonotoneStepFn {
        MonotoneStepFn::make(points, hi).unwrap()
    }

    fn pts_of(g: &MonotoneStepFn) -> Vec<(u64, u64)> {
        g.points().iter().map(|p| (p.x, p.v)).collect()
    }

    #[test]
    fn naive_conv_matches_hand_computed_envelope() {
        let a = f(&[(0, 0), (1, 2)], 10);
        let b = f(&[(0, 0), (1, 1), (3, 2)], 10);
        let c = naive_conv(&a, &b);
        assert_eq!(pts_of(&c), vec![(0, 0), (1, 2), (2, 3), (4, 4)]);
    }

    #[test]
    fn naive_conv_with_zero_is_identity() {
        let a = f(&[(0, 0), (2, 5), (7, 9)], 10);
        let z = MonotoneStepFn::zero(10);
        assert_eq!(naive_conv(&a, &z), a);
        let point = f(&[(0, 0)], 10);
        assert_eq!(pts_of(&naive_conv(&point, &point)), vec![(0, 0)]);
    }

    #[test]
    fn uniform_concave_constructor_enforces_gap_rule() {
        assert!(UniformConcaveFn::new(1, vec![1, 3], 10).is_ok());
        assert!(matches!(
            UniformConcaveFn::new(1, vec![5, 6], 10),
            Err(Error::NotPseudoConcave(1))
        ));
        assert!(matches!(
            UniformConcaveFn::new(0, vec![], 10),
            Err(Error::ZeroQuantum)
        ));
    }

    #[test]
    fn exact_conv_matches_naive_on_spec_pair() {
        let a = f(&[(0, 0), (1, 2)], 10);
        let g = UniformConcaveFn::new(1, vec![1, 3], 10).unwrap();
        let got = conv_uniform_concave(&a, &g, u64::MAX / 8);
        assert_eq!(pts_of(&got), vec![(0, 0), (1, 2), (2, 3), (4, 4)]);
        assert_eq!(got, naive_conv(&a, &g.to_step_fn()));
    }

    #[test]
    fn exact_conv_with_flat_staircase_returns_f() {
        let a = f(&[(0, 0), (2, 5), (7, 9)], 20);
        let g = UniformConcaveFn::new(1, vec![], 20).unwrap();
        assert_eq!(conv_uniform_concave(&a, &g, 100), a);
        let point = f(&[(0, 0)], 5);
        assert_eq!(
            pts_of(&conv_uniform_concave(&point, &g, 100)),
            vec![(0, 0)]
        );
    }

    #[test]
    fn exact_conv_applies_value_cap() {
        let a = f(&[(0, 0), (1, 3), (2, 6)], 10);
        let g = UniformConcaveFn::new(3, vec![1, 2], 10).unwrap();
        let capped = conv_uniform_concave(&a, &g, 7);
        let full = naive_conv(&a, &g.to_step_fn()).cap(7);
        assert_eq!(capped, full);
    }

    fn random_fn(rng: &mut StdRng, bmax: u64, dom: u64) -> MonotoneStepFn {
        let n = rng.gen_range(1..=12);
        let pts: Vec<(u64, u64)> = (0..n)
            .map(|_| (rng.gen_range(0..=dom), rng.gen_range(0..=bmax)))
            .collect();
        MonotoneStepFn::envelope(&pts, dom, false)
    }

    fn random_staircase(rng: &mut StdRng, dom: u64) -> UniformConcaveFn {
        let p = rng.gen_range(1..=7);
        let steps = rng.gen_range(0..=50);
        let mut gap = rng.gen_range(0..=3);
        let mut x = 0u64;
        let mut breaks = Vec::new();
        for _ in 0..steps {
            x += gap;
            if x > dom {
                break;
            }
            breaks.push(x);
            gap += rng.gen_range(0..=2);
        }
        UniformConcaveFn::new(p, breaks, dom).unwrap()
    }

    #[test]
    fn exact_conv_agrees_with_naive_and_scan_on_random_pairs() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let a = random_fn(&mut rng, 200, 60);
            let g = random_staircase(&mut rng, 60);
            let cap = rng.gen_range(1..=500);
            let smawk = conv_uniform_concave_smawk(&a, &g, cap);
            let scan = conv_uniform_concave_scan(&a, &g, cap);
            let oracle = naive_conv(&a, &g.to_step_fn()).cap(cap);
            assert_eq!(smawk, oracle, "smawk vs naive on f={a:?} g={g:?} cap={cap}");
            assert_eq!(scan, oracle, "scan vs naive on f={a:?} g={g:?} cap={cap}");
        }
    }

    #[test]
    fn exact_conv_handles_bottom_f() {
        let a = MonotoneStepFn::make_bottom(&[(4, 2)], 10).unwrap();
        let g = UniformConcaveFn::new(1, vec![1, 3], 10).unwrap();
        let got = conv_uniform_concave(&a, &g, 100);
        assert!(got.is_bottom());
        assert_eq!(got, naive_conv(&a, &g.to_step_fn()));
    }

    #[test]
    fn approx_conv_sandwiches_spec_pair() {
        let a = f(&[(0, 0), (1, 1), (2, 20)], 4);
        let truth = naive_conv(&a, &a);
        let r = approx_conv(&a, &a, 0.5, 1, 40, None).unwrap();
        for x in 0..=4u64 {
            let t = truth.eval0(x);
            let got = r.eval0(x);
            assert!(got <= t);
            assert!((t as f64) <= 1.5 * (got as f64) + 1e-9);
        }
    }

    #[test]
    fn approx_conv_with_zero_reduces_to_sparsify() {
        let a = f(&[(0, 0), (1, 4), (3, 9), (5, 30)], 10);
        let z = MonotoneStepFn::zero(10);
        let r = approx_conv(&a, &z, 0.5, 1, 30, None).unwrap();
        assert_eq!(r, a.sparsify(0.5, 1, 30).unwrap());
    }

    #[test]
    fn approx_conv_is_exact_for_two_level_operands() {
        let a = f(&[(0, 0), (3, 7)], 10);
        let b = f(&[(0, 0), (2, 7)], 10);
        let r = approx_conv(&a, &b, 0.5, 1, 20, None).unwrap();
        assert_eq!(r, naive_conv(&a, &b));
    }

    #[test]
    fn approx_merge_single_operand_sparsifies() {
        let a = f(&[(0, 0), (1, 4), (3, 9), (5, 30)], 10);
        let r = approx_merge(std::slice::from_ref(&a), 0.25, 1, 30, false).unwrap();
        assert_eq!(r, a.sparsify(0.25, 1, 30).unwrap());
    }

    #[test]
    fn approx_merge_of_constant_zeroes_is_zero() {
        let fs: Vec<MonotoneStepFn> = (0..8).map(|_| MonotoneStepFn::zero(10)).collect();
        let r = approx_merge(&fs, 0.25, 1, 10, false).unwrap();
        assert_eq!(pts_of(&r), vec![(0, 0)]);
    }

    #[test]
    fn approx_merge_three_way_stays_within_compound_factor() {
        let eps = 0.25f64;
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let fs: Vec<MonotoneStepFn> =
                (0..3).map(|_| random_fn(&mut rng, 50, 30)).collect();
            let truth = naive_conv(&naive_conv(&fs[0], &fs[1]), &fs[2]);
            let r = approx_merge(&fs, eps, 1, 160, false).unwrap();
            let eps_level = eps / 2.0; // ceil(log2 3) levels
            let bound = (1.0 + 3.0 * eps_level).powi(2);
            for x in 0..=30u64 {
                let t = truth.eval0(x);
                let got = r.eval0(x);
                assert!(got <= t);
                if t >= 1 {
                    assert!((t as f64) <= bound * (got as f64) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn approx_merge_concave_fold_matches_naive_within_factor() {
        let eps = 0.25f64;
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..50 {
            let base = random_fn(&mut rng, 40, 40);
            let stairs: Vec<UniformConcaveFn> =
                (0..4).map(|_| random_staircase(&mut rng, 40)).collect();
            let mut fs = vec![base.clone()];
            fs.extend(stairs.iter().map(|s| s.to_step_fn()));
            let mut truth = base.clone();
            for s in &stairs {
                truth = naive_conv(&truth, &s.to_step_fn());
            }
            let b_hi = truth.max_value().max(1);
            let r = approx_merge(&fs, eps, 1, b_hi, true).unwrap();
            for x in 0..=40u64 {
                let t = truth.eval0(x);
                let got = r.eval0(x);
                assert!(got <= t);
                if t >= 1 {
                    assert!((t as f64) <= (1.0 + 3.0 * eps) * (got as f64) + 1e-9);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn naive_conv_is_commutative_and_monotone(
            pa in proptest::collection::vec((0u64..30, 0u64..40), 1..8),
            pb in proptest::collection::vec((0u64..30, 0u64..40), 1..8),
        ) {
            let a = MonotoneStepFn::envelope(&pa, 30, false);
            let b = MonotoneStepFn::envelope(&pb, 30, false);
            let ab = naive_conv(&a, &b);
            prop_assert_eq!(&ab, &naive_conv(&b, &a));
            for x in 0..=30u64 {
                prop_assert!(ab.eval0(x) >= a.eval0(x).max(b.eval0(x)));
            }
        }

        #[test]
        fn approx_conv_sandwich_on_random_pairs(
            pa in proptest::collection::vec((0u64..40, 0u64..200), 1..10),
            pb in proptest::collection::vec((0u64..40, 0u64..200), 1..10),
            eps in 0.05f64..0.9,
        ) {
            let a = MonotoneStepFn::envelope(&pa, 40, false);
            let b = MonotoneStepFn::envelope(&pb, 40, false);
            let truth = naive_conv(&a, &b);
            let r = approx_conv(&a, &b, eps, 1, 400, None).unwrap();
            for x in 0..=40u64 {
                let t = truth.eval0(x);
                let got = r.eval0(x);
                prop_assert!(got <= t);
                if t >= 1 {
                    prop_assert!((t as f64) <= (1.0 + 3.0 * eps) * (got as f64) + 1e-9);
                }
            }
        }
    }
}
