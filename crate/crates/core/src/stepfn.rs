//! Monotone step functions on integer capacities.
//!
//! A [`MonotoneStepFn`] maps every capacity `x` in `[0, domain_hi]` to a
//! nondecreasing integer value. It is stored as the sorted list of breakpoints
//! `(x_k, v_k)`: the value at `x` is the value of the last breakpoint with
//! `x_k <= x`. Functions may carry a "bottom" head, meaning the value is
//! minus infinity (no feasible assignment) strictly before the first
//! breakpoint; otherwise the value before the first breakpoint is 0 and the
//! canonical form pins an explicit breakpoint at `x = 0`.
//!
//! Canonical form: x strictly increasing, values strictly increasing. Equal-x
//! collisions keep the larger value, equal-value runs keep the leftmost
//! breakpoint. A bottom function with no breakpoints at all is minus infinity
//! on the entire domain (nothing is feasible); only bottom functions may be
//! empty.

use crate::{Error, Result};
use std::io::{self, Write};

/// Sentinel for "unreachable" capacities, safely addable without overflow.
pub(crate) const INF_X: u64 = u64::MAX / 4;

/// One breakpoint of a step function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Point {
    pub x: u64,
    pub v: u64,
}

/// Nondecreasing step function over `[0, domain_hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneStepFn {
    pts: Vec<Point>,
    domain_hi: u64,
    bottom: bool,
}

impl MonotoneStepFn {
    /// Builds a function from unsorted breakpoints.
    ///
    /// Points are sorted by x; among equal x the largest value wins. A value
    /// drop after that resolution is an error, not silently repaired (use
    /// [`MonotoneStepFn::running_max`] when the input is a raw candidate
    /// sequence). A breakpoint past `domain_hi` is rejected.
    pub fn make(points: &[(u64, u64)], domain_hi: u64) -> Result<Self> {
        Self::build(points, domain_hi, false, false)
    }

    /// Like [`MonotoneStepFn::make`], but the function is minus infinity
    /// before its first breakpoint.
    pub fn make_bottom(points: &[(u64, u64)], domain_hi: u64) -> Result<Self> {
        Self::build(points, domain_hi, true, false)
    }

    /// Upper envelope of an arbitrary breakpoint sequence: sorts by x and
    /// drops every point dominated by an earlier-or-equal one.
    pub fn running_max(points: &[(u64, u64)], domain_hi: u64) -> Result<Self> {
        Self::build(points, domain_hi, false, true)
    }

    /// Upper envelope with an explicit bottom flag. Infallible because
    /// dominated points are repaired rather than rejected; a bottom function
    /// may have no breakpoints at all (minus infinity on the whole domain).
    pub(crate) fn envelope(points: &[(u64, u64)], domain_hi: u64, bottom: bool) -> Self {
        Self::build(points, domain_hi, bottom, true)
            .expect("envelope needs a breakpoint unless bottom")
    }

    fn build(points: &[(u64, u64)], domain_hi: u64, bottom: bool, repair: bool) -> Result<Self> {
        if points.is_empty() {
            if bottom {
                return Ok(Self {
                    pts: Vec::new(),
                    domain_hi,
                    bottom,
                });
            }
            return Err(Error::EmptyFunction);
        }
        for &(x, _) in points {
            if x > domain_hi {
                return Err(Error::PointBeyondDomain { x, hi: domain_hi });
            }
        }
        let mut sorted: Vec<Point> = points.iter().map(|&(x, v)| Point { x, v }).collect();
        sorted.sort_unstable_by(|a, b| a.x.cmp(&b.x).then(a.v.cmp(&b.v)));
        // Resolve equal-x groups to their largest value first, then enforce
        // monotonicity and collapse equal-value runs to the leftmost point.
        let mut grouped: Vec<Point> = Vec::with_capacity(sorted.len());
        for p in sorted {
            match grouped.last_mut() {
                Some(last) if last.x == p.x => last.v = p.v,
                _ => grouped.push(p),
            }
        }
        let mut pts: Vec<Point> = Vec::with_capacity(grouped.len());
        for p in grouped {
            match pts.last() {
                Some(last) if p.v < last.v => {
                    if !repair {
                        return Err(Error::DecreasingValues {
                            x: p.x,
                            prev: last.v,
                            next: p.v,
                        });
                    }
                }
                Some(last) if p.v == last.v => {} // keep the leftmost witness
                _ => pts.push(p),
            }
        }
        if !bottom && pts[0].x > 0 {
            if pts[0].v == 0 {
                // Zero head already present in disguise, move it to x = 0.
                pts[0].x = 0;
            } else {
                pts.insert(0, Point { x: 0, v: 0 });
            }
        }
        Ok(Self {
            pts,
            domain_hi,
            bottom,
        })
    }

    /// The constant-`v` function on `[0, domain_hi]`.
    pub fn constant(v: u64, domain_hi: u64) -> Self {
        Self {
            pts: vec![Point { x: 0, v }],
            domain_hi,
            bottom: false,
        }
    }

    /// The all-zero function, the identity of (max,+)-convolution.
    pub fn zero(domain_hi: u64) -> Self {
        Self::constant(0, domain_hi)
    }

    pub fn points(&self) -> &[Point] {
        &self.pts
    }

    /// Number of stored breakpoints.
    pub fn complexity(&self) -> usize {
        self.pts.len()
    }

    pub fn domain_hi(&self) -> u64 {
        self.domain_hi
    }

    pub fn is_bottom(&self) -> bool {
        self.bottom
    }

    /// Largest value attained on the domain.
    pub fn max_value(&self) -> u64 {
        self.pts.last().map(|p| p.v).unwrap_or(0)
    }

    /// Value at `x`, or `None` in the minus-infinity head of a bottom
    /// function. Capacities past `domain_hi` clamp to the last value.
    pub fn eval(&self, x: u64) -> Option<u64> {
        debug_assert!(x <= self.domain_hi, "eval past domain_hi");
        match self.pts.partition_point(|p| p.x <= x) {
            0 => {
                if self.bottom {
                    None
                } else {
                    Some(0)
                }
            }
            k => Some(self.pts[k - 1].v),
        }
    }

    /// Value at `x` with the minus-infinity head reading as 0. Only used
    /// where a bottom head is impossible or where 0 is the intended floor.
    pub fn eval0(&self, x: u64) -> u64 {
        self.eval(x).unwrap_or(0)
    }

    /// Pointwise `min(f, b)`.
    pub fn cap(&self, b: u64) -> Self {
        let mut pts: Vec<Point> = Vec::with_capacity(self.pts.len());
        for p in &self.pts {
            let v = p.v.min(b);
            match pts.last() {
                Some(last) if last.v == v => {} // flattened run, keep leftmost
                _ => pts.push(Point { x: p.x, v }),
            }
        }
        Self {
            pts,
            domain_hi: self.domain_hi,
            bottom: self.bottom,
        }
    }

    /// Pointwise `max(f, c)`. The minus-infinity head, if any, is raised to
    /// `c` as well, so the result is never bottom.
    pub fn lift(&self, c: u64) -> Self {
        let mut pts: Vec<Point> = Vec::with_capacity(self.pts.len() + 1);
        if self.bottom && self.pts.first().map_or(true, |p| p.x > 0) {
            pts.push(Point { x: 0, v: c });
        }
        for p in &self.pts {
            let v = p.v.max(c);
            match pts.last() {
                Some(last) if last.v >= v => {}
                _ => {
                    let x = if pts.is_empty() { 0 } else { p.x };
                    pts.push(Point { x, v });
                }
            }
        }
        Self {
            pts,
            domain_hi: self.domain_hi,
            bottom: false,
        }
    }

    /// Multiplies every value by `k >= 1`. Strict value increase is preserved,
    /// so the breakpoint list stays canonical.
    pub fn scale_values(&self, k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroQuantum);
        }
        let mut pts = Vec::with_capacity(self.pts.len());
        for p in &self.pts {
            let v = p.v.checked_mul(k).ok_or(Error::Overflow("scale_values"))?;
            pts.push(Point { x: p.x, v });
        }
        Ok(Self {
            pts,
            domain_hi: self.domain_hi,
            bottom: self.bottom,
        })
    }

    /// Adds `shift` to every value. Negative shifts must not drive any value
    /// below zero; the head of a bottom function is unaffected.
    pub fn shift_value(&self, shift: i64) -> Result<Self> {
        let mut pts = Vec::with_capacity(self.pts.len());
        for p in &self.pts {
            let v = if shift >= 0 {
                p.v.checked_add(shift as u64)
                    .ok_or(Error::Overflow("shift_value"))?
            } else {
                p.v.checked_sub(shift.unsigned_abs())
                    .ok_or(Error::NegativeShift {
                        v: p.v,
                        shift,
                    })?
            };
            pts.push(Point { x: p.x, v });
        }
        Ok(Self {
            pts,
            domain_hi: self.domain_hi,
            bottom: self.bottom,
        })
    }

    /// Restriction of `self` to `[lo, hi)` as a breakpoint list: the entry
    /// value at `lo` (unless bottom there) followed by interior breakpoints.
    fn slice_points(&self, lo: u64, hi: u64, out: &mut Vec<(u64, u64)>) {
        if let Some(v) = self.eval(lo.min(self.domain_hi)) {
            out.push((lo, v));
        }
        for p in &self.pts {
            if p.x > lo && p.x < hi {
                out.push((p.x, p.v));
            }
        }
    }

    /// Assembles one function from pieces covering `[0, t]`.
    ///
    /// Each `(lo, hi, f)` contributes its values on `[lo, hi)`; the last piece
    /// is also read at its closed right end. Pieces must tile the domain in
    /// order with no gap. Downward jumps at seams are repaired by the running
    /// maximum, so the result dominates every piece on its own interval.
    pub fn stitch(pieces: &[(u64, u64, MonotoneStepFn)]) -> Result<Self> {
        let Some(&(first_lo, _, _)) = pieces.first() else {
            return Err(Error::EmptyFunction);
        };
        if first_lo != 0 {
            return Err(Error::CoverageGap(0));
        }
        let t = pieces.last().unwrap().1;
        let mut raw: Vec<(u64, u64)> = Vec::new();
        let mut cursor = 0u64;
        for (k, (lo, hi, f)) in pieces.iter().enumerate() {
            if *lo != cursor {
                return Err(Error::CoverageGap(cursor));
            }
            if hi < lo {
                return Err(Error::CoverageGap(*lo));
            }
            let hi_eff = if k + 1 == pieces.len() {
                hi.saturating_add(1)
            } else {
                *hi
            };
            f.slice_points(*lo, hi_eff, &mut raw);
            cursor = *hi;
        }
        let bottom = pieces[0].2.eval(0).is_none();
        Self::build(&raw, t, bottom, true)
    }

    /// Thins the function to one witness breakpoint per geometric value level.
    ///
    /// Levels start at `a_lo` and grow by at most a `(1 + eps)` factor per
    /// step (integer levels step by 1 where the geometric step would be
    /// smaller, which keeps the guarantee exact in that regime). Each kept
    /// breakpoint carries its true value, so the result `r` satisfies
    /// `r <= f` everywhere and `f(x) <= (1 + eps) * r(x)` wherever
    /// `f(x) >= a_lo`. `b_hi` only sizes the level walk estimate; values above
    /// it are still covered.
    pub fn sparsify(&self, eps: f64, a_lo: u64, b_hi: u64) -> Result<Self> {
        if !(eps > 0.0) || eps > 1.0 {
            return Err(Error::BadEpsilon(eps));
        }
        if a_lo < 1 {
            return Err(Error::BadLowerRange(a_lo));
        }
        let _ = b_hi;
        let mut pts: Vec<Point> = Vec::new();
        // The head breakpoint (value 0 or the first value of a bottom
        // function) anchors the below-range region exactly.
        let mut iter = self.pts.iter().peekable();
        if let Some(first) = iter.peek() {
            if first.v < a_lo {
                pts.push(**first);
            }
        }
        let mut level = a_lo;
        let max_v = self.max_value();
        let mut idx = self.pts.partition_point(|p| p.v < a_lo);
        while level <= max_v {
            while idx < self.pts.len() && self.pts[idx].v < level {
                idx += 1;
            }
            if idx >= self.pts.len() {
                break;
            }
            let w = self.pts[idx];
            match pts.last() {
                Some(last) if last.x == w.x => {}
                _ => pts.push(w),
            }
            // Next level: at least +1, at most a (1+eps) factor.
            let grown = ((w.v.max(level) as f64) * (1.0 + eps)).floor() as u64;
            level = grown.max(w.v.max(level) + 1);
        }
        if pts.is_empty() {
            if let Some(first) = self.pts.first() {
                // Never reaches a_lo and has no sub-range head (cannot happen
                // for canonical non-bottom input, kept for safety).
                pts.push(*first);
            }
        }
        Ok(Self {
            pts,
            domain_hi: self.domain_hi,
            bottom: self.bottom,
        })
    }

    /// Dense inverse over values `0..=b`: for each value the least capacity
    /// reaching it.
    pub fn invert(&self, b: u64) -> InverseView {
        let mut minx = vec![INF_X; b as usize + 2];
        let mut v_done = 0u64;
        if !self.bottom {
            minx[0] = 0;
            v_done = 1;
        }
        for p in &self.pts {
            let top = p.v.min(b);
            while v_done <= top {
                minx[v_done as usize] = p.x;
                v_done += 1;
            }
            if p.v >= b {
                break;
            }
        }
        InverseView {
            minx,
            domain_hi: self.domain_hi,
            bottom: self.bottom,
        }
    }

    /// Writes the debug dump: a header line then one `x<TAB>v` row per
    /// breakpoint.
    pub fn dump(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(
            w,
            "# domain_hi={} bottom={}",
            self.domain_hi,
            u8::from(self.bottom)
        )?;
        for p in &self.pts {
            writeln!(w, "{}\t{}", p.x, p.v)?;
        }
        Ok(())
    }

    /// Internal constructor for modules that produce already-canonical lists.
    pub(crate) fn from_canonical(pts: Vec<Point>, domain_hi: u64, bottom: bool) -> Self {
        debug_assert!(pts.windows(2).all(|w| w[0].x < w[1].x && w[0].v < w[1].v));
        debug_assert!(bottom || pts.first().map_or(false, |p| p.x == 0));
        Self {
            pts,
            domain_hi,
            bottom,
        }
    }
}

/// Dense least-capacity-per-value table produced by
/// [`MonotoneStepFn::invert`].
pub struct InverseView {
    minx: Vec<u64>,
    domain_hi: u64,
    bottom: bool,
}

impl InverseView {
    /// Least capacity with value at least `v`, or `None` if unreachable.
    pub fn min_x(&self, v: u64) -> Option<u64> {
        match self.minx.get(v as usize) {
            Some(&x) if x < INF_X => Some(x),
            _ => None,
        }
    }

    /// Number of table entries.
    pub fn len(&self) -> usize {
        self.minx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minx.is_empty()
    }

    /// Rebuilds the step function the table was computed from, up to the
    /// value bound of the table.
    pub fn extract(&self) -> MonotoneStepFn {
        let mut pts: Vec<Point> = Vec::new();
        for (v, &x) in self.minx.iter().enumerate() {
            if x >= INF_X {
                continue;
            }
            match pts.last_mut() {
                Some(last) if last.x == x => last.v = v as u64,
                _ => pts.push(Point { x, v: v as u64 }),
            }
        }
        MonotoneStepFn::from_canonical(pts, self.domain_hi, self.bottom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(points: &[(u64, u64)], hi: u64) -> MonotoneStepFn {
        MonotoneStepFn::make(points, hi).unwrap()
    }

    fn pts_of(f: &MonotoneStepFn) -> Vec<(u64, u64)> {
        f.points().iter().map(|p| (p.x, p.v)).collect()
    }

    #[test]
    fn eval_reads_last_breakpoint_at_or_before_x() {
        let g = f(&[(0, 0), (2, 5)], 10);
        assert_eq!(g.eval(1), Some(0));
        assert_eq!(g.eval(2), Some(5));
        assert_eq!(g.eval(10), Some(5));
    }

    #[test]
    fn make_keeps_larger_value_on_equal_x() {
        let g = f(&[(0, 0), (3, 4), (3, 7)], 10);
        assert_eq!(pts_of(&g), vec![(0, 0), (3, 7)]);
    }

    #[test]
    fn make_collapses_equal_values_to_leftmost() {
        let g = f(&[(0, 0), (1, 2), (4, 2)], 10);
        assert_eq!(pts_of(&g), vec![(0, 0), (1, 2)]);
    }

    #[test]
    fn make_rejects_value_drops_and_out_of_domain_points() {
        assert!(matches!(
            MonotoneStepFn::make(&[(0, 5), (1, 3)], 10),
            Err(Error::DecreasingValues { .. })
        ));
        assert!(matches!(
            MonotoneStepFn::make(&[(0, 0), (11, 1)], 10),
            Err(Error::PointBeyondDomain { .. })
        ));
        assert!(matches!(
            MonotoneStepFn::make(&[], 10),
            Err(Error::EmptyFunction)
        ));
    }

    #[test]
    fn cap_clamps_values_and_keeps_leftmost_of_flattened_runs() {
        let g = f(&[(0, 0), (1, 3), (2, 9)], 10);
        assert_eq!(pts_of(&g.cap(5)), vec![(0, 0), (1, 3), (2, 5)]);
        assert_eq!(pts_of(&g.cap(0)), vec![(0, 0)]);
    }

    #[test]
    fn lift_raises_low_values() {
        let g = f(&[(0, 0), (1, 3)], 10);
        assert_eq!(pts_of(&g.lift(2)), vec![(0, 2), (1, 3)]);
    }

    #[test]
    fn scale_values_multiplies_and_rejects_zero_factor() {
        let g = f(&[(0, 0), (2, 5), (4, 6)], 10);
        assert_eq!(pts_of(&g.scale_values(3).unwrap()), vec![(0, 0), (2, 15), (4, 18)]);
        assert_eq!(g.scale_values(1).unwrap(), g);
        assert!(matches!(g.scale_values(0), Err(Error::ZeroQuantum)));
    }

    #[test]
    fn shift_value_round_trips_and_zero_is_identity() {
        let g = f(&[(0, 0), (2, 5)], 10);
        assert_eq!(g.shift_value(0).unwrap(), g);
        let up = g.shift_value(1).unwrap();
        assert_eq!(pts_of(&up), vec![(0, 1), (2, 6)]);
        assert_eq!(up.shift_value(-1).unwrap(), g);
        assert!(matches!(
            g.shift_value(-1),
            Err(Error::NegativeShift { .. })
        ));
    }

    #[test]
    fn running_max_drops_dips() {
        let g = MonotoneStepFn::running_max(&[(0, 0), (1, 5), (2, 3)], 10).unwrap();
        assert_eq!(pts_of(&g), vec![(0, 0), (1, 5)]);
        let h = MonotoneStepFn::running_max(&[(0, 2), (1, 1), (2, 4)], 10).unwrap();
        assert_eq!(pts_of(&h), vec![(0, 2), (2, 4)]);
    }

    #[test]
    fn stitch_single_piece_is_identity() {
        let g = f(&[(0, 0), (2, 5)], 10);
        let s = MonotoneStepFn::stitch(&[(0, 10, g.clone())]).unwrap();
        assert_eq!(s, g);
    }

    #[test]
    fn stitch_concatenates_adjacent_pieces() {
        let a = MonotoneStepFn::zero(2);
        let b = MonotoneStepFn::constant(5, 2);
        let s = MonotoneStepFn::stitch(&[(0, 1, a), (1, 2, b)]).unwrap();
        assert_eq!(pts_of(&s), vec![(0, 0), (1, 5)]);
    }

    #[test]
    fn stitch_rejects_gaps_and_repairs_seam_dips() {
        let a = MonotoneStepFn::zero(3);
        let b = MonotoneStepFn::constant(5, 3);
        assert!(matches!(
            MonotoneStepFn::stitch(&[(0, 1, a.clone()), (2, 3, b.clone())]),
            Err(Error::CoverageGap(1))
        ));
        // A later piece dipping below an earlier one is raised at the seam.
        let hi = f(&[(0, 7)], 4);
        let lo = f(&[(0, 0), (3, 9)], 4);
        let s = MonotoneStepFn::stitch(&[(0, 2, hi), (2, 4, lo)]).unwrap();
        assert_eq!(pts_of(&s), vec![(0, 7), (3, 9)]);
    }

    #[test]
    fn sparsify_keeps_witness_values_within_factor() {
        // Values {0, 10..=20}; with eps = 0.5 only a few witnesses survive.
        let pts: Vec<(u64, u64)> = std::iter::once((0, 0))
            .chain((10..=20).map(|v| (v, v)))
            .collect();
        let g = f(&pts, 30);
        let s = g.sparsify(0.5, 1, 20).unwrap();
        assert!(s.complexity() <= ((20f64.ln() / 1.5f64.ln()).ceil() as usize) + 2);
        for x in 0..=30 {
            let full = g.eval0(x);
            let thin = s.eval0(x);
            assert!(thin <= full);
            if full >= 1 {
                assert!((full as f64) <= 1.5 * (thin as f64) + 1e-9);
            }
        }
    }

    #[test]
    fn dump_emits_header_then_tab_separated_rows() {
        let g = f(&[(0, 0), (2, 5)], 10);
        let mut buf = Vec::new();
        g.dump(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# domain_hi=10 bottom=0\n0\t0\n2\t5\n"
        );
    }

    #[test]
    fn bottom_head_evaluates_to_none() {
        let g = MonotoneStepFn::make_bottom(&[(3, 4)], 10).unwrap();
        assert_eq!(g.eval(2), None);
        assert_eq!(g.eval(3), Some(4));
        assert_eq!(g.eval0(2), 0);
    }

    #[test]
    fn empty_bottom_function_is_minus_infinity_everywhere() {
        let g = MonotoneStepFn::make_bottom(&[], 10).unwrap();
        assert!(g.is_bottom());
        assert_eq!(g.complexity(), 0);
        assert_eq!(g.eval(0), None);
        assert_eq!(g.eval(10), None);
        assert_eq!(g.max_value(), 0);
        assert_eq!(pts_of(&g.lift(3)), vec![(0, 3)]);
        assert_eq!(g.sparsify(0.5, 1, 10).unwrap(), g);
        assert!(matches!(
            MonotoneStepFn::make(&[], 10),
            Err(Error::EmptyFunction)
        ));
    }

    #[test]
    fn invert_extract_round_trips() {
        let g = f(&[(0, 0), (2, 5), (7, 9)], 10);
        let iv = g.invert(9);
        assert_eq!(iv.min_x(5), Some(2));
        assert_eq!(iv.min_x(6), Some(7));
        assert_eq!(iv.extract(), g);
    }

    fn arb_step_fn() -> impl Strategy<Value = MonotoneStepFn> {
        proptest::collection::vec((0u64..50, 0u64..100), 1..12)
            .prop_map(|pts| MonotoneStepFn::running_max(&pts, 50).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn running_max_is_idempotent_and_dominates(raw in proptest::collection::vec((0u64..50, 0u64..100), 1..12)) {
            let g = MonotoneStepFn::running_max(&raw, 50).unwrap();
            let again = MonotoneStepFn::running_max(&pts_of(&g), 50).unwrap();
            prop_assert_eq!(&again, &g);
            for &(x, v) in &raw {
                prop_assert!(g.eval0(x) >= v);
            }
        }

        #[test]
        fn eval_is_monotone_and_canonical_points_strictly_increase(g in arb_step_fn()) {
            let mut prev = None;
            for x in 0..=50u64 {
                let v = g.eval0(x);
                if let Some(p) = prev {
                    prop_assert!(v >= p);
                }
                prev = Some(v);
            }
            for w in g.points().windows(2) {
                prop_assert!(w[0].x < w[1].x && w[0].v < w[1].v);
            }
        }

        #[test]
        fn cap_then_lift_bounds_values(g in arb_step_fn(), b in 0u64..120, c in 0u64..120) {
            let h = g.cap(b).lift(c);
            for x in 0..=50u64 {
                let expect = g.eval0(x).min(b).max(c);
                prop_assert_eq!(h.eval0(x), expect);
            }
        }

        #[test]
        fn sparsify_sandwich_holds(g in arb_step_fn(), eps in 0.05f64..1.0) {
            let s = g.sparsify(eps, 1, 100).unwrap();
            for x in 0..=50u64 {
                let full = g.eval0(x);
                let thin = s.eval0(x);
                prop_assert!(thin <= full);
                if full >= 1 {
                    prop_assert!((full as f64) <= (1.0 + eps) * (thin as f64) + 1e-9);
                }
            }
        }

        #[test]
        fn invert_round_trip_and_inverse_relations(g in arb_step_fn()) {
            let b = g.max_value();
            let iv = g.invert(b);
            prop_assert_eq!(iv.extract(), g.clone());
            for v in 0..=b {
                if let Some(x) = iv.min_x(v) {
                    prop_assert!(g.eval0(x) >= v);
                    if x > 0 {
                        prop_assert!(g.eval0(x - 1) < v);
                    }
                }
            }
        }
    }
}
