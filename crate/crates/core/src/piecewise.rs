//! Piecewise-linear integrands against the Hilbert kernel `1/t`.

/// `f(t) = a + b·t` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub a: f64,
    pub b: f64,
}

impl Piece {
    pub fn at(&self, t: f64) -> f64 {
        self.a + self.b * t
    }

    /// `∫ f(t)/t dt` over `[lo, hi] ∩ [c, d]` where `[c, d]` does not straddle 0.
    fn integral_between(&self, c: f64, d: f64) -> f64 {
        let lo = self.lo.max(c);
        let hi = self.hi.min(d);
        if !(lo < hi) {
            return 0.0;
        }
        debug_assert!(lo >= 0.0 || hi <= 0.0);
        let log_term = if self.a == 0.0 { 0.0 } else { self.a * (hi.abs() / lo.abs()).ln() };
        log_term + self.b * (hi - lo)
    }

    /// `∫_{[lo,hi] \ (-eps, eps)} f(t)/t dt`.
    pub fn integral_outside(&self, eps: f64) -> f64 {
        self.integral_between(f64::NEG_INFINITY, -eps) + self.integral_between(eps, f64::INFINITY)
    }
}

/// Sorted, deduplicated breakpoints clipped to `[lo, hi]`, always containing both ends.
pub(crate) fn breakpoints(lo: f64, hi: f64, inner: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = inner.into_iter().filter(|&p| p > lo && p < hi).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Pieces between consecutive breakpoints, with the line supplied per cell.
pub(crate) fn pieces_from<F: FnMut(f64, f64) -> (f64, f64)>(breaks: &[f64], mut line: F) -> Vec<Piece> {
    breaks
        .windows(2)
        .filter(|w| w[0] < w[1])
        .map(|w| {
            let (a, b) = line(w[0], w[1]);
            Piece { lo: w[0], hi: w[1], a, b }
        })
        .collect()
}

/// `∫_{|t| > eps} f(t)/t dt` summed over pieces.
pub(crate) fn integral_outside(pieces: &[Piece], eps: f64) -> f64 {
    pieces.iter().map(|p| p.integral_outside(eps)).sum()
}

/// One-sided limits `f(0-)`, `f(0+)` and the distance to the nearest breakpoint other than 0.
pub(crate) fn local_structure(pieces: &[Piece]) -> (f64, f64, f64) {
    let mut left = 0.0;
    let mut right = 0.0;
    let mut delta = f64::INFINITY;
    for p in pieces {
        if p.hi == 0.0 {
            left = p.at(0.0);
            delta = delta.min(-p.lo);
        } else if p.lo == 0.0 {
            right = p.at(0.0);
            delta = delta.min(p.hi);
        } else if p.lo < 0.0 && p.hi > 0.0 {
            left = p.at(0.0);
            right = left;
            delta = delta.min(-p.lo).min(p.hi);
        }
    }
    (left, right, delta)
}
