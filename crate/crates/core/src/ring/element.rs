//! The coordinate ring: either Q(λ) for a real algebraic λ > 1 or the plain rationals.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::interval::Interval;
use super::poly::IntPoly;
use super::RingError;

/// Largest supported degree of the minimal polynomial.
pub const MAX_RING_DEGREE: usize = 10;

/// Monic irreducible integer polynomial together with a rational interval isolating a root λ > 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalPolynomial {
    poly: IntPoly,
    bracket: (BigRational, BigRational),
}

impl MinimalPolynomial {
    /// Validates monicity, irreducibility, and that the bracket isolates a single root above 1.
    pub fn new(poly: IntPoly, lo: BigRational, hi: BigRational) -> Result<Self, RingError> {
        let n = poly.degree();
        if poly.is_zero() || n == 0 {
            return Err(RingError::InvalidMinpoly(
                "polynomial must have degree at least 1".into(),
            ));
        }
        if n > MAX_RING_DEGREE {
            return Err(RingError::DegreeTooLarge(n));
        }
        if !poly.is_monic() {
            return Err(RingError::InvalidMinpoly(format!("{poly} is not monic")));
        }
        if let Some((f, g)) = poly.find_factor() {
            return Err(RingError::Reducible {
                poly: poly.to_string(),
                left: f.to_string(),
                right: g.to_string(),
            });
        }
        if lo >= hi {
            return Err(RingError::InvalidBracket(
                "bracket must satisfy lo < hi".into(),
            ));
        }
        if poly.eval_rational(&lo).is_zero() || poly.eval_rational(&hi).is_zero() {
            return Err(RingError::InvalidBracket(
                "bracket endpoint is a root".into(),
            ));
        }
        if poly.count_roots(&lo, &hi) != 1 {
            return Err(RingError::InvalidBracket(format!(
                "bracket [{lo}, {hi}] does not isolate exactly one root of {poly}"
            )));
        }
        let one = BigRational::one();
        let lo_eff = if lo < one { one.clone() } else { lo.clone() };
        if poly.eval_rational(&one).is_zero() || poly.count_roots(&lo_eff, &hi) != 1 {
            return Err(RingError::InvalidBracket(
                "isolated root does not exceed 1".into(),
            ));
        }
        Ok(MinimalPolynomial {
            poly,
            bracket: (lo, hi),
        })
    }

    pub fn poly(&self) -> &IntPoly {
        &self.poly
    }

    pub fn bracket(&self) -> (&BigRational, &BigRational) {
        (&self.bracket.0, &self.bracket.1)
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }
}

#[derive(Debug)]
struct AlgebraicData {
    minpoly: MinimalPolynomial,
    /// λ^n = Σ reduction[k]·λ^k
    reduction: Vec<BigRational>,
    /// Refined bracket around λ used as the starting point of exact refinement.
    tight: (BigRational, BigRational),
    /// Enclosures of λ^k for k < n.
    powers: Vec<Interval>,
    value: f64,
}

#[derive(Debug)]
enum RingKind {
    Rational,
    Algebraic(AlgebraicData),
}

/// Shared handle to a coordinate ring. Cheap to clone.
#[derive(Clone, Debug)]
pub struct Ring {
    kind: Arc<RingKind>,
}

impl PartialEq for Ring {
    fn eq(&self, other: &Ring) -> bool {
        if Arc::ptr_eq(&self.kind, &other.kind) {
            return true;
        }
        match (&*self.kind, &*other.kind) {
            (RingKind::Rational, RingKind::Rational) => true,
            (RingKind::Algebraic(a), RingKind::Algebraic(b)) => a.minpoly == b.minpoly,
            _ => false,
        }
    }
}

impl Eq for Ring {}

impl Ring {
    pub fn rational() -> Ring {
        Ring {
            kind: Arc::new(RingKind::Rational),
        }
    }

    pub fn algebraic(minpoly: MinimalPolynomial) -> Ring {
        let n = minpoly.degree();
        let coeffs = minpoly.poly.coeffs();
        let reduction: Vec<BigRational> = coeffs[..n]
            .iter()
            .map(|c| BigRational::from_integer(-c))
            .collect();
        let (mut lo, mut hi) = (minpoly.bracket.0.clone(), minpoly.bracket.1.clone());
        let two = BigRational::from_integer(BigInt::from(2));
        let sign_lo = minpoly.poly.eval_rational(&lo).is_positive();
        let target = BigRational::new(BigInt::one(), BigInt::from(1u64) << 70);
        while &hi - &lo > &target * &hi {
            let mid = (&lo + &hi) / &two;
            let v = minpoly.poly.eval_rational(&mid);
            if v.is_zero() {
                lo = mid.clone();
                hi = mid;
                break;
            }
            if v.is_positive() == sign_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = Interval::new(
            Interval::from_rational(&lo).lo,
            Interval::from_rational(&hi).hi,
        );
        let mut powers = Vec::with_capacity(n);
        let mut acc = Interval::point(1.0);
        for _ in 0..n {
            powers.push(acc);
            acc = acc * root;
        }
        let value = root.mid();
        Ring {
            kind: Arc::new(RingKind::Algebraic(AlgebraicData {
                minpoly,
                reduction,
                tight: (lo, hi),
                powers,
                value,
            })),
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(&*self.kind, RingKind::Rational)
    }

    pub fn minpoly(&self) -> Option<&MinimalPolynomial> {
        match &*self.kind {
            RingKind::Rational => None,
            RingKind::Algebraic(a) => Some(&a.minpoly),
        }
    }

    /// Number of rational coordinates per element.
    pub fn degree(&self) -> usize {
        match &*self.kind {
            RingKind::Rational => 1,
            RingKind::Algebraic(a) => a.minpoly.degree(),
        }
    }

    /// Float approximation of λ (None for the rational ring).
    pub fn lambda_f64(&self) -> Option<f64> {
        match &*self.kind {
            RingKind::Rational => None,
            RingKind::Algebraic(a) => Some(a.value),
        }
    }

    pub fn zero(&self) -> RingElement {
        RingElement {
            ring: self.clone(),
            coords: vec![BigRational::zero(); self.degree()],
        }
    }

    pub fn one(&self) -> RingElement {
        self.from_rational(BigRational::one())
    }

    pub fn from_int(&self, v: i64) -> RingElement {
        self.from_rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_rational(&self, v: BigRational) -> RingElement {
        let mut coords = vec![BigRational::zero(); self.degree()];
        coords[0] = v;
        RingElement {
            ring: self.clone(),
            coords,
        }
    }

    /// The generator λ.
    pub fn generator(&self) -> Result<RingElement, RingError> {
        match &*self.kind {
            RingKind::Rational => Err(RingError::NoGenerator),
            RingKind::Algebraic(a) => {
                let n = a.minpoly.degree();
                if n == 1 {
                    Ok(self.from_rational(a.reduction[0].clone()))
                } else {
                    let mut coords = vec![BigRational::zero(); n];
                    coords[1] = BigRational::one();
                    Ok(RingElement {
                        ring: self.clone(),
                        coords,
                    })
                }
            }
        }
    }

    /// Builds an element from coordinates, reducing longer inputs modulo the minimal polynomial.
    pub fn element(&self, coords: Vec<BigRational>) -> RingElement {
        RingElement {
            ring: self.clone(),
            coords: self.reduce(coords),
        }
    }

    fn reduce(&self, mut coords: Vec<BigRational>) -> Vec<BigRational> {
        let n = self.degree();
        if coords.len() <= n {
            coords.resize(n, BigRational::zero());
            return coords;
        }
        match &*self.kind {
            RingKind::Rational => {
                coords.truncate(1);
                coords
            }
            RingKind::Algebraic(a) => {
                for k in (n..coords.len()).rev() {
                    let t = std::mem::take(&mut coords[k]);
                    if t.is_zero() {
                        continue;
                    }
                    for (j, r) in a.reduction.iter().enumerate() {
                        if !r.is_zero() {
                            coords[k - n + j] += &t * r;
                        }
                    }
                }
                coords.truncate(n);
                coords
            }
        }
    }
}

/// Exact element of the coordinate ring.
#[derive(Clone)]
pub struct RingElement {
    ring: Ring,
    coords: Vec<BigRational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl RingElement {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// The value as a rational, when the element lies in Q.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.coords[1..].iter().all(|c| c.is_zero()) {
            Some(&self.coords[0])
        } else {
            None
        }
    }

    pub fn checked_add(&self, other: &RingElement) -> Result<RingElement, RingError> {
        self.same_ring(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn checked_sub(&self, other: &RingElement) -> Result<RingElement, RingError> {
        self.same_ring(other)?;
        Ok(self.sub_unchecked(other))
    }

    pub fn checked_mul(&self, other: &RingElement) -> Result<RingElement, RingError> {
        self.same_ring(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn same_ring(&self, other: &RingElement) -> Result<(), RingError> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(RingError::RingMismatch)
        }
    }

    fn add_unchecked(&self, other: &RingElement) -> RingElement {
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a + b)
            .collect();
        RingElement {
            ring: self.ring.clone(),
            coords,
        }
    }

    fn sub_unchecked(&self, other: &RingElement) -> RingElement {
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a - b)
            .collect();
        RingElement {
            ring: self.ring.clone(),
            coords,
        }
    }

    fn mul_unchecked(&self, other: &RingElement) -> RingElement {
        let n = self.coords.len();
        if n == 1 {
            return RingElement {
                ring: self.ring.clone(),
                coords: vec![&self.coords[0] * &other.coords[0]],
            };
        }
        let mut out = vec![BigRational::zero(); 2 * n - 1];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coords.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        RingElement {
            ring: self.ring.clone(),
            coords: self.ring.reduce(out),
        }
    }

    pub fn scale(&self, q: &BigRational) -> RingElement {
        RingElement {
            ring: self.ring.clone(),
            coords: self.coords.iter().map(|c| c * q).collect(),
        }
    }

    pub fn pow(&self, exp: u32) -> RingElement {
        let mut result = self.ring.one();
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_unchecked(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        result
    }

    /// Multiplicative inverse via the multiplication matrix; None for zero.
    pub fn inverse(&self) -> Option<RingElement> {
        if self.is_zero() {
            return None;
        }
        let n = self.coords.len();
        if n == 1 {
            return Some(self.ring.from_rational(self.coords[0].recip()));
        }
        // Column j holds the coordinates of self·λ^j.
        let lambda = self.ring.generator().ok()?;
        let mut columns = Vec::with_capacity(n);
        let mut current = self.clone();
        for _ in 0..n {
            columns.push(current.coords.clone());
            current = current.mul_unchecked(&lambda);
        }
        let mut aug: Vec<Vec<BigRational>> = (0..n)
            .map(|r| {
                let mut row: Vec<BigRational> = (0..n).map(|c| columns[c][r].clone()).collect();
                row.push(if r == 0 {
                    BigRational::one()
                } else {
                    BigRational::zero()
                });
                row
            })
            .collect();
        let solution = super::matrix::solve_augmented(&mut aug)?;
        Some(RingElement {
            ring: self.ring.clone(),
            coords: solution,
        })
    }

    pub fn checked_div(&self, other: &RingElement) -> Result<RingElement, RingError> {
        self.same_ring(other)?;
        let inv = other.inverse().ok_or(RingError::DivisionByZero)?;
        Ok(self.mul_unchecked(&inv))
    }

    /// Certified enclosure of the real value.
    pub fn enclosure(&self) -> Interval {
        match &*self.ring.kind {
            RingKind::Rational => Interval::from_rational(&self.coords[0]),
            RingKind::Algebraic(a) => {
                let mut acc = Interval::point(0.0);
                for (c, p) in self.coords.iter().zip(&a.powers) {
                    if c.is_zero() {
                        continue;
                    }
                    acc = acc + Interval::from_rational(c) * *p;
                }
                acc
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.coords[1..].iter().all(|c| c.is_zero()) {
            return num_traits::ToPrimitive::to_f64(&self.coords[0])
                .unwrap_or_else(|| self.enclosure().mid());
        }
        self.enclosure().mid()
    }

    /// Exact sign. Tries the float enclosure first and refines the root bracket when needed.
    pub fn sign(&self) -> Sign {
        if self.is_zero() {
            return Sign::Zero;
        }
        let iv = self.enclosure();
        if iv.strictly_positive() {
            return Sign::Positive;
        }
        if iv.strictly_negative() {
            return Sign::Negative;
        }
        match &*self.ring.kind {
            RingKind::Rational => {
                if self.coords[0].is_positive() {
                    Sign::Positive
                } else {
                    Sign::Negative
                }
            }
            RingKind::Algebraic(a) => exact_sign(&self.coords, a),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == Sign::Positive
    }

    pub fn is_negative(&self) -> bool {
        self.sign() == Sign::Negative
    }

    pub fn abs(&self) -> RingElement {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn min_of(a: &RingElement, b: &RingElement) -> RingElement {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn max_of(a: &RingElement, b: &RingElement) -> RingElement {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }
}

/// Sign by bisecting the rational bracket until an exact interval evaluation excludes zero.
fn exact_sign(coords: &[BigRational], a: &AlgebraicData) -> Sign {
    let (mut lo, mut hi) = a.tight.clone();
    let two = BigRational::from_integer(BigInt::from(2));
    let sign_lo = a.minpoly.poly.eval_rational(&lo).is_positive();
    loop {
        let (elo, ehi) = eval_rational_interval(coords, &lo, &hi);
        if elo.is_positive() {
            return Sign::Positive;
        }
        if ehi.is_negative() {
            return Sign::Negative;
        }
        if lo == hi {
            // λ is rational here; the evaluation is exact.
            return if elo.is_positive() {
                Sign::Positive
            } else if elo.is_negative() {
                Sign::Negative
            } else {
                Sign::Zero
            };
        }
        let mid = (&lo + &hi) / &two;
        let v = a.minpoly.poly.eval_rational(&mid);
        if v.is_zero() {
            lo = mid.clone();
            hi = mid;
        } else if v.is_positive() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Exact interval Horner evaluation of Σ c_k x^k over x ∈ [lo, hi].
fn eval_rational_interval(
    coords: &[BigRational],
    lo: &BigRational,
    hi: &BigRational,
) -> (BigRational, BigRational) {
    let mut alo = BigRational::zero();
    let mut ahi = BigRational::zero();
    for c in coords.iter().rev() {
        let products = [&alo * lo, &alo * hi, &ahi * lo, &ahi * hi];
        let mut pmin = products[0].clone();
        let mut pmax = products[0].clone();
        for p in &products[1..] {
            if *p < pmin {
                pmin = p.clone();
            }
            if *p > pmax {
                pmax = p.clone();
            }
        }
        alo = pmin + c;
        ahi = pmax + c;
    }
    (alo, ahi)
}

impl PartialEq for RingElement {
    fn eq(&self, other: &RingElement) -> bool {
        self.coords == other.coords && self.ring == other.ring
    }
}

impl Eq for RingElement {}

impl Hash for RingElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coords.hash(state);
    }
}

impl PartialOrd for RingElement {
    fn partial_cmp(&self, other: &RingElement) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by real value, which is a total order because the representation is canonical.
impl Ord for RingElement {
    fn cmp(&self, other: &RingElement) -> Ordering {
        if self.coords == other.coords {
            return Ordering::Equal;
        }
        let a = self.enclosure();
        let b = other.enclosure();
        if a.hi < b.lo {
            return Ordering::Less;
        }
        if a.lo > b.hi {
            return Ordering::Greater;
        }
        match self.sub_unchecked(other).sign() {
            Sign::Negative => Ordering::Less,
            Sign::Zero => Ordering::Equal,
            Sign::Positive => Ordering::Greater,
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl $trait<&RingElement> for &RingElement {
            type Output = RingElement;
            /// Panics when the operands come from different rings; use the `checked_*` form to get an error.
            fn $method(self, rhs: &RingElement) -> RingElement {
                assert!(self.ring == rhs.ring, "ring mismatch in arithmetic");
                self.$inner(rhs)
            }
        }
        impl $trait<RingElement> for RingElement {
            type Output = RingElement;
            fn $method(self, rhs: RingElement) -> RingElement {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&RingElement> for RingElement {
            type Output = RingElement;
            fn $method(self, rhs: &RingElement) -> RingElement {
                (&self).$method(rhs)
            }
        }
        impl $trait<RingElement> for &RingElement {
            type Output = RingElement;
            fn $method(self, rhs: RingElement) -> RingElement {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, add_unchecked);
binop!(Sub, sub, sub_unchecked);
binop!(Mul, mul, mul_unchecked);

impl Neg for &RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        RingElement {
            ring: self.ring.clone(),
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        -&self
    }
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Renders as a polynomial in `L`, e.g. `1 + L` or `-1/2*L^2`. Readable back by the spec parser.
impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let symbolic = !self.ring.is_rational() && self.coords.len() > 1;
        let mut first = true;
        for (k, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            let var = match (symbolic, k) {
                (_, 0) => None,
                (true, 1) => Some("L".to_string()),
                (true, _) => Some(format!("L^{k}")),
                (false, _) => None,
            };
            match var {
                None => write!(f, "{mag}")?,
                Some(v) if mag.is_one() => write!(f, "{v}")?,
                Some(v) => write!(f, "{mag}*{v}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn golden() -> Ring {
        let mp =
            MinimalPolynomial::new(IntPoly::from_i64(&[-1, -1, 1]), q(3, 2), q(17, 10)).unwrap();
        Ring::algebraic(mp)
    }

    #[test]
    fn lambda_squared_reduces() {
        let r = golden();
        let l = r.generator().unwrap();
        let sq = &l * &l;
        assert_eq!(sq.coords(), &[q(1, 1), q(1, 1)]);
    }

    #[test]
    fn difference_of_squares_is_lambda() {
        let r = golden();
        let l = r.generator().unwrap();
        let one = r.one();
        let p = (&l + &one) * (&l - &one);
        assert_eq!(p, l);
    }

    #[test]
    fn signs() {
        let r = golden();
        let l = r.generator().unwrap();
        let one = r.one();
        assert_eq!((&l - &one).sign(), Sign::Positive);
        assert_eq!(r.zero().sign(), Sign::Zero);
        let two = r.from_int(2);
        let e = &two - &l - &l * &(&l - &one);
        assert_eq!(e, &one - &l);
        assert_eq!(e.sign(), Sign::Negative);
    }

    #[test]
    fn exact_sign_for_tiny_values() {
        let r = golden();
        let l = r.generator().unwrap();
        // (λ − 1)^60 is about 3e-13 and positive; φ'^60 after conjugation sign test
        let small = (&l - &r.one()).pow(60);
        assert_eq!(small.sign(), Sign::Positive);
        let big = l.pow(60);
        let diff = &big - &(&big + &small);
        assert_eq!(diff.sign(), Sign::Negative);
        // a value whose float enclosure straddles zero
        let c = l.pow(80);
        let approx = r.from_rational(BigRational::from_float(c.to_f64()).unwrap());
        let d = &c - &approx;
        assert_ne!(d.sign(), Sign::Zero);
        assert_eq!(d.sign() == Sign::Positive, c > approx);
    }

    #[test]
    fn inverse_and_display() {
        let r = golden();
        let l = r.generator().unwrap();
        let inv = l.inverse().unwrap();
        assert_eq!(&inv * &l, r.one());
        assert_eq!(inv.to_string(), "-1 + L");
        assert_eq!(r.zero().to_string(), "0");
        assert_eq!(l.scale(&q(-3, 2)).to_string(), "-3/2*L");
    }

    #[test]
    fn rejects_reducible_and_bad_brackets() {
        let reducible = MinimalPolynomial::new(IntPoly::from_i64(&[2, -3, 1]), q(3, 2), q(5, 2));
        assert!(matches!(reducible, Err(RingError::Reducible { .. })));
        let wrong = MinimalPolynomial::new(IntPoly::from_i64(&[-1, -1, 1]), q(-1, 1), q(0, 1));
        assert!(wrong.is_err());
        let two_roots = MinimalPolynomial::new(IntPoly::from_i64(&[-1, -1, 1]), q(-1, 1), q(2, 1));
        assert!(two_roots.is_err());
    }

    #[test]
    fn integer_generator_ring() {
        let mp = MinimalPolynomial::new(IntPoly::from_i64(&[-2, 1]), q(3, 2), q(5, 2)).unwrap();
        let r = Ring::algebraic(mp);
        let l = r.generator().unwrap();
        assert_eq!(l, r.from_int(2));
        assert_eq!(l.to_string(), "2");
    }

    #[test]
    fn mixed_rings_error() {
        let a = golden().one();
        let b = Ring::rational().one();
        assert!(matches!(a.checked_add(&b), Err(RingError::RingMismatch)));
    }
}
