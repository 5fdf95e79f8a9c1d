//! Percentile and midpoint search over monotone primitives.

use crate::primitive::OptPrimitive;

/// A partition selection primitive: a nondecreasing map from user count to
/// release probability.
pub trait SelectionPrimitive {
    fn prob(&self, n: u64) -> f64;

    /// A count past which the search gives up; at or beyond it the
    /// probability is one or numerically indistinguishable from it.
    fn search_cap(&self) -> u64;
}

impl SelectionPrimitive for OptPrimitive {
    fn prob(&self, n: u64) -> f64 {
        OptPrimitive::prob(self, n)
    }

    fn search_cap(&self) -> u64 {
        self.saturation_point().unwrap_or(1)
    }
}

impl<T: SelectionPrimitive + ?Sized> SelectionPrimitive for &T {
    fn prob(&self, n: u64) -> f64 {
        (**self).prob(n)
    }

    fn search_cap(&self) -> u64 {
        (**self).search_cap()
    }
}

/// Smallest `n >= 1` with `prob(n) >= q`, or `None` if no `n` up to the
/// primitive's search cap qualifies.
///
/// Exponential search for an upper bracket, then binary search.
pub fn percentile_n<P: SelectionPrimitive + ?Sized>(pi: &P, q: f64) -> Option<u64> {
    let cap = pi.search_cap().max(1);
    if pi.prob(1) >= q {
        return Some(1);
    }
    let mut lo = 1u64;
    let mut hi = 2u64.min(cap);
    while pi.prob(hi) < q {
        if hi == cap {
            return None;
        }
        lo = hi;
        hi = hi.saturating_mul(2).min(cap);
    }
    // invariant: prob(lo) < q <= prob(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pi.prob(mid) >= q {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Smallest `n` released with probability at least one half.
pub fn midpoint<P: SelectionPrimitive + ?Sized>(pi: &P) -> Option<u64> {
    percentile_n(pi, 0.5)
}
