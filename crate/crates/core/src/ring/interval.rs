//! Outward-rounded f64 intervals used as a fast path for exact sign decisions.

use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn entire() -> Self {
        Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    /// Encloses a rational; conversion error is covered by widening two ulps each way.
    pub fn from_rational(q: &BigRational) -> Self {
        if q.is_zero() {
            return Interval::point(0.0);
        }
        match q.to_f64() {
            Some(x) if x.is_finite() => Interval {
                lo: x.next_down().next_down(),
                hi: x.next_up().next_up(),
            },
            _ => Interval::entire(),
        }
    }

    pub fn mid(&self) -> f64 {
        if self.lo.is_finite() && self.hi.is_finite() {
            0.5 * (self.lo + self.hi)
        } else if self.lo.is_finite() {
            self.lo
        } else {
            self.hi
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_valid(&self) -> bool {
        !(self.lo.is_nan() || self.hi.is_nan())
    }

    pub fn strictly_positive(&self) -> bool {
        self.is_valid() && self.lo > 0.0
    }

    pub fn strictly_negative(&self) -> bool {
        self.is_valid() && self.hi < 0.0
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

fn down(x: f64) -> f64 {
    if x.is_nan() {
        f64::NEG_INFINITY
    } else {
        x.next_down()
    }
}

fn up(x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        x.next_up()
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval {
            lo: down(self.lo + o.lo),
            hi: up(self.hi + o.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval {
            lo: down(self.lo - o.hi),
            hi: up(self.hi - o.lo),
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let products = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        if products.iter().any(|p| p.is_nan()) {
            return Interval::entire();
        }
        let lo = products.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = products.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval {
            lo: down(lo),
            hi: up(hi),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn encloses_one_third() {
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        let iv = Interval::from_rational(&third);
        assert!(iv.lo < 1.0 / 3.0 && 1.0 / 3.0 < iv.hi);
        let sum = iv + iv + iv;
        assert!(sum.contains(1.0));
    }

    #[test]
    fn product_signs() {
        let a = Interval::new(-1.0, 2.0);
        let b = Interval::new(3.0, 4.0);
        let p = a * b;
        assert!(p.lo <= -4.0 && p.hi >= 8.0);
        assert!((b * b).strictly_positive());
    }
}
