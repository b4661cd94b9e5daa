//! Sound interval arithmetic on `f64` scalars, vectors, and matrices.
//!
//! Every operation returns an interval that contains the exact
//! real-arithmetic image of its operand sets. Outward rounding uses
//! error-free transformations: an endpoint is widened to the next
//! representable float only when the computed value is inexact, so
//! identities like adding zero or multiplying exact binary constants
//! keep point intervals at width zero. That exactness matters
//! downstream — entries of a Jacobian enclosure that are analytically
//! constant must stay degenerate so corner enumeration stays sparse.
//!
//! The empty interval is a distinct sentinel ([`Interval::EMPTY`]) and
//! propagates through every operation; `lo > hi` never occurs.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Exact sum with floating-point error term (Knuth two-sum).
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bv = s - a;
    let err = (a - (s - bv)) + (b - bv);
    (s, err)
}

/// Product with exact error term via fused multiply-add.
///
/// Returns a NaN error term (forcing outward widening) when the product
/// is infinite or subnormal, where the fma error is unreliable.
#[inline]
fn two_product(a: f64, b: f64) -> (f64, f64) {
    if a == 0.0 || b == 0.0 {
        // Exact by convention, including 0 * inf, which for the set
        // product {a*b} contributes only the zero endpoint.
        return (0.0, 0.0);
    }
    let p = a * b;
    if !p.is_normal() {
        return (p, f64::NAN);
    }
    (p, a.mul_add(b, -p))
}

/// Round a computed lower endpoint down when it is inexact.
#[inline]
fn round_down(value: f64, err: f64) -> f64 {
    if err.is_nan() || err < 0.0 {
        value.next_down()
    } else {
        value
    }
}

/// Round a computed upper endpoint up when it is inexact.
#[inline]
fn round_up(value: f64, err: f64) -> f64 {
    if err.is_nan() || err > 0.0 {
        value.next_up()
    } else {
        value
    }
}

/// Closed interval `[lo, hi]` of reals with outward-rounded endpoints.
#[derive(Clone, Copy, Debug)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    /// The empty interval; absorbs every operation.
    pub const EMPTY: Interval = Interval {
        lo: f64::NAN,
        hi: f64::NAN,
    };

    /// The whole real line.
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    /// Interval from ordered endpoints. Panics if `lo > hi` or either is NaN.
    pub fn new(lo: f64, hi: f64) -> Interval {
        assert!(!lo.is_nan() && !hi.is_nan(), "interval endpoint is NaN");
        assert!(lo <= hi, "interval endpoints out of order: [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// Degenerate interval containing a single value.
    pub fn point(value: f64) -> Interval {
        assert!(!value.is_nan(), "interval endpoint is NaN");
        Interval {
            lo: value,
            hi: value,
        }
    }

    #[inline]
    fn raw(lo: f64, hi: f64) -> Interval {
        debug_assert!(!lo.is_nan() && !hi.is_nan() && lo <= hi);
        Interval { lo, hi }
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.lo.is_nan()
    }

    #[inline]
    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// Lower endpoint (NaN for the empty interval).
    #[inline]
    pub fn inf(&self) -> f64 {
        self.lo
    }

    /// Upper endpoint (NaN for the empty interval).
    #[inline]
    pub fn sup(&self) -> f64 {
        self.hi
    }

    /// Upper bound on `hi - lo`; zero for empty or degenerate intervals.
    pub fn width(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let (w, e) = two_sum(self.hi, -self.lo);
        round_up(w, e)
    }

    /// A point inside the interval, at or near the middle.
    pub fn midpoint(&self) -> f64 {
        if self.is_empty() {
            return f64::NAN;
        }
        if self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY {
            return 0.0;
        }
        if self.lo == f64::NEG_INFINITY {
            return f64::MIN;
        }
        if self.hi == f64::INFINITY {
            return f64::MAX;
        }
        (0.5 * self.lo + 0.5 * self.hi).clamp(self.lo, self.hi)
    }

    /// Largest absolute value over the interval.
    pub fn mag(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.lo.abs().max(self.hi.abs())
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        !self.is_empty() && self.lo <= x && x <= self.hi
    }

    /// True when `other` is a subset of `self`.
    pub fn encloses(&self, other: &Interval) -> bool {
        if other.is_empty() {
            return true;
        }
        !self.is_empty() && self.lo <= other.lo && other.hi <= self.hi
    }

    /// Smallest interval containing both operands.
    pub fn hull(&self, other: &Interval) -> Interval {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        Interval::raw(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Tight square: `[x^2]` is nonnegative even when `0 ∈ x`.
    pub fn sqr(&self) -> Interval {
        if self.is_empty() {
            return Interval::EMPTY;
        }
        if self.lo >= 0.0 {
            let (pl, el) = two_product(self.lo, self.lo);
            let (ph, eh) = two_product(self.hi, self.hi);
            Interval::raw(round_down(pl, el), round_up(ph, eh))
        } else if self.hi <= 0.0 {
            let (pl, el) = two_product(self.hi, self.hi);
            let (ph, eh) = two_product(self.lo, self.lo);
            Interval::raw(round_down(pl, el), round_up(ph, eh))
        } else {
            let (pa, ea) = two_product(self.lo, self.lo);
            let (pb, eb) = two_product(self.hi, self.hi);
            Interval::raw(0.0, round_up(pa, ea).max(round_up(pb, eb)))
        }
    }

    /// Tight cube: odd powers are monotone, so the endpoints map
    /// directly (unlike `x * x * x`, which decorrelates the factors).
    pub fn cube(&self) -> Interval {
        if self.is_empty() {
            return Interval::EMPTY;
        }
        let endpoint = |v: f64| Interval::point(v).sqr() * Interval::point(v);
        let lo = endpoint(self.lo);
        let hi = endpoint(self.hi);
        Interval::raw(lo.inf(), hi.sup())
    }

    /// Reciprocal. Intervals straddling zero map to the whole line,
    /// which is the only sound closed-interval answer.
    pub fn recip(&self) -> Interval {
        if self.is_empty() {
            return Interval::EMPTY;
        }
        if self.lo > 0.0 || self.hi < 0.0 {
            Interval::raw((1.0 / self.hi).next_down(), (1.0 / self.lo).next_up())
        } else if self.lo == 0.0 && self.hi > 0.0 {
            Interval::raw((1.0 / self.hi).next_down(), f64::INFINITY)
        } else if self.hi == 0.0 && self.lo < 0.0 {
            Interval::raw(f64::NEG_INFINITY, (1.0 / self.lo).next_up())
        } else {
            Interval::ENTIRE
        }
    }

    /// Scale by an exact point factor.
    pub fn scale(&self, factor: f64) -> Interval {
        *self * Interval::point(factor)
    }
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        (self.is_empty() && other.is_empty()) || (self.lo == other.lo && self.hi == other.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "∅")
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

impl From<f64> for Interval {
    fn from(value: f64) -> Interval {
        Interval::point(value)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        if self.is_empty() || rhs.is_empty() {
            return Interval::EMPTY;
        }
        let (lo, el) = two_sum(self.lo, rhs.lo);
        let (hi, eh) = two_sum(self.hi, rhs.hi);
        Interval::raw(round_down(lo, el), round_up(hi, eh))
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        self + (-rhs)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        if self.is_empty() {
            return Interval::EMPTY;
        }
        Interval::raw(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        if self.is_empty() || rhs.is_empty() {
            return Interval::EMPTY;
        }
        let candidates = [
            two_product(self.lo, rhs.lo),
            two_product(self.lo, rhs.hi),
            two_product(self.hi, rhs.lo),
            two_product(self.hi, rhs.hi),
        ];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (p, e) in candidates {
            lo = lo.min(round_down(p, e));
            hi = hi.max(round_up(p, e));
        }
        Interval::raw(lo, hi)
    }
}

/// Nonempty axis-aligned box: a vector of intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalVector {
    elems: Vec<Interval>,
}

impl IntervalVector {
    pub fn new(elems: Vec<Interval>) -> IntervalVector {
        assert!(!elems.is_empty(), "interval vector must be nonempty");
        IntervalVector { elems }
    }

    /// Box from componentwise bounds; panics if `lo[i] > hi[i]`.
    pub fn from_bounds(lo: &[f64], hi: &[f64]) -> IntervalVector {
        assert_eq!(lo.len(), hi.len(), "bound lengths differ");
        IntervalVector::new(
            lo.iter()
                .zip(hi)
                .map(|(&l, &h)| Interval::new(l, h))
                .collect(),
        )
    }

    /// Degenerate box at a point.
    pub fn point(values: &[f64]) -> IntervalVector {
        IntervalVector::new(values.iter().map(|&v| Interval::point(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> Interval {
        self.elems[i]
    }

    pub fn set(&mut self, i: usize, value: Interval) {
        self.elems[i] = value;
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.elems.iter()
    }

    pub fn as_slice(&self) -> &[Interval] {
        &self.elems
    }

    /// Componentwise sum.
    pub fn add(&self, rhs: &IntervalVector) -> IntervalVector {
        assert_eq!(self.len(), rhs.len(), "vector lengths differ");
        IntervalVector::new(
            self.elems
                .iter()
                .zip(rhs.iter())
                .map(|(a, b)| *a + *b)
                .collect(),
        )
    }

    /// Componentwise subtraction of a point vector.
    pub fn sub_point(&self, p: &[f64]) -> IntervalVector {
        assert_eq!(self.len(), p.len(), "vector lengths differ");
        IntervalVector::new(
            self.elems
                .iter()
                .zip(p)
                .map(|(a, &b)| *a - Interval::point(b))
                .collect(),
        )
    }

    /// Translate the box by a point vector.
    pub fn shift_by(&self, p: &[f64]) -> IntervalVector {
        assert_eq!(self.len(), p.len(), "vector lengths differ");
        IntervalVector::new(
            self.elems
                .iter()
                .zip(p)
                .map(|(a, &b)| *a + Interval::point(b))
                .collect(),
        )
    }

    /// Componentwise hull with the origin; contains every segment from
    /// the origin to a point of the box.
    pub fn hull_with_zero(&self) -> IntervalVector {
        let zero = Interval::point(0.0);
        IntervalVector::new(self.elems.iter().map(|a| a.hull(&zero)).collect())
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.len() == x.len() && self.elems.iter().zip(x).all(|(iv, &v)| iv.contains(v))
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.elems.iter().map(|iv| iv.midpoint()).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.elems.iter().map(|iv| iv.width()).collect()
    }
}

/// Rectangular matrix of intervals: the set of real matrices whose
/// entries lie in the corresponding intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Interval>,
}

impl IntervalMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Interval) -> Self {
        assert!(rows > 0 && cols > 0, "interval matrix must be nonempty");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        IntervalMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Interval::point(0.0))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Interval {
        assert!(r < self.rows && c < self.cols, "index out of range");
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: Interval) {
        assert!(r < self.rows && c < self.cols, "index out of range");
        self.data[r * self.cols + c] = value;
    }

    /// Inclusion-isotone matrix-vector product.
    pub fn matvec(&self, v: &IntervalVector) -> IntervalVector {
        assert_eq!(
            self.cols,
            v.len(),
            "matvec dimension mismatch: {}x{} by {}",
            self.rows,
            self.cols,
            v.len()
        );
        IntervalVector::new(
            (0..self.rows)
                .map(|r| {
                    let mut acc = Interval::point(0.0);
                    for c in 0..self.cols {
                        acc = acc + self.get(r, c) * v.get(c);
                    }
                    acc
                })
                .collect(),
        )
    }

    /// Inclusion-isotone matrix product.
    pub fn matmul(&self, rhs: &IntervalMatrix) -> IntervalMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul dimension mismatch: {}x{} by {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        IntervalMatrix::from_fn(self.rows, rhs.cols, |r, c| {
            let mut acc = Interval::point(0.0);
            for k in 0..self.cols {
                acc = acc + self.get(r, k) * rhs.get(k, c);
            }
            acc
        })
    }

    pub fn add(&self, rhs: &IntervalMatrix) -> IntervalMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "matrix shapes differ"
        );
        IntervalMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c) + rhs.get(r, c))
    }

    pub fn transpose(&self) -> IntervalMatrix {
        IntervalMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    /// Scale every entry by an exact point factor.
    pub fn scale(&self, factor: f64) -> IntervalMatrix {
        let f = Interval::point(factor);
        IntervalMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c) * f)
    }

    /// Indices of entries with positive width.
    pub fn varying_entries(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c).width() > 0.0 {
                    out.push((r, c));
                }
            }
        }
        out
    }

    pub fn max_width(&self) -> f64 {
        self.data.iter().map(|iv| iv.width()).fold(0.0, f64::max)
    }
}
