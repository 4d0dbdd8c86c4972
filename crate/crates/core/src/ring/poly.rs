//! Univariate polynomials with integer and rational coefficients.

use std::fmt;

use nalgebra::{Complex, DMatrix};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::RingError;

/// Integer polynomial, coefficients stored lowest degree first with no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial has degree 0 here as well.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    /// Parses expressions such as `x^3 - x^2 - x - 1` or `2*x + 3`.
    pub fn parse(text: &str) -> Result<Self, RingError> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(RingError::PolyParse("empty polynomial".into()));
        }
        let mut coeffs: Vec<BigInt> = Vec::new();
        let bytes: Vec<char> = compact.chars().collect();
        let mut pos = 0;
        while pos < bytes.len() {
            let mut negative = false;
            if bytes[pos] == '+' || bytes[pos] == '-' {
                negative = bytes[pos] == '-';
                pos += 1;
            } else if pos != 0 {
                return Err(RingError::PolyParse(format!(
                    "unexpected '{}' at {pos}",
                    bytes[pos]
                )));
            }
            let start = pos;
            while pos < bytes.len() && bytes[pos] != '+' && bytes[pos] != '-' {
                pos += 1;
            }
            let term: String = bytes[start..pos].iter().collect();
            if term.is_empty() {
                return Err(RingError::PolyParse(format!("missing term at {start}")));
            }
            let (coef, power) = parse_term(&term)?;
            if coeffs.len() <= power {
                coeffs.resize(power + 1, BigInt::zero());
            }
            if negative {
                coeffs[power] -= coef;
            } else {
                coeffs[power] += coef;
            }
        }
        let poly = IntPoly::new(coeffs);
        if poly.is_zero() {
            return Err(RingError::PolyParse(
                "polynomial is identically zero".into(),
            ));
        }
        Ok(poly)
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + BigRational::from_integer(c.clone());
        }
        acc
    }

    pub fn eval_complex(&self, z: Complex<f64>) -> Complex<f64> {
        let mut acc = Complex::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + Complex::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
        }
        acc
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigInt::from(k))
                .collect(),
        )
    }

    pub fn to_rational(&self) -> RatPoly {
        RatPoly::new(
            self.coeffs
                .iter()
                .cloned()
                .map(BigRational::from_integer)
                .collect(),
        )
    }

    /// Exact quotient by a divisor, if the division leaves no remainder and the quotient is integral.
    pub fn div_exact(&self, divisor: &IntPoly) -> Option<IntPoly> {
        let (q, r) = self.to_rational().div_rem(&divisor.to_rational());
        if !r.is_zero() {
            return None;
        }
        let mut out = Vec::with_capacity(q.coeffs.len());
        for c in q.coeffs {
            if !c.is_integer() {
                return None;
            }
            out.push(c.to_integer());
        }
        Some(IntPoly::new(out))
    }

    /// Primitive integer polynomial with the same roots, each with multiplicity one.
    pub fn square_free(&self) -> IntPoly {
        let p = self.to_rational();
        let g = p.gcd(&p.derivative());
        let (q, _) = p.div_rem(&g);
        q.to_primitive_integer()
    }

    /// Complex roots via companion-matrix eigenvalues, polished by Newton steps.
    pub fn complex_roots(&self) -> Vec<Complex<f64>> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let lead = self.leading().to_f64().unwrap_or(1.0);
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            companion[(i, n - 1)] = -self.coeffs[i].to_f64().unwrap_or(f64::NAN) / lead;
        }
        let deriv = self.derivative();
        companion
            .complex_eigenvalues()
            .iter()
            .map(|&z0| {
                let mut z = z0;
                for _ in 0..8 {
                    let d = deriv.eval_complex(z);
                    if d.norm() == 0.0 {
                        break;
                    }
                    let step = self.eval_complex(z) / d;
                    if !step.re.is_finite() || !step.im.is_finite() {
                        break;
                    }
                    z -= step;
                }
                z
            })
            .collect()
    }

    /// Number of distinct real roots in the half-open interval (a, b].
    pub fn count_roots(&self, a: &BigRational, b: &BigRational) -> usize {
        let chain = self.square_free().to_rational().sturm_chain();
        let va = sign_changes(&chain, a);
        let vb = sign_changes(&chain, b);
        va.saturating_sub(vb)
    }

    /// Monic integer factor of smallest degree that vanishes at `root`, found by combining
    /// conjugation-closed groups of complex roots and confirming each candidate by exact division.
    /// `budget` caps the number of root subsets examined.
    pub fn minimal_factor(&self, root: f64, max_degree: usize, budget: usize) -> Option<IntPoly> {
        let sf = self.square_free();
        let sf = if sf.leading().is_negative() {
            sf.neg()
        } else {
            sf
        };
        if !sf.is_monic() {
            return None;
        }
        let roots = sf.complex_roots();
        let target = roots
            .iter()
            .enumerate()
            .min_by(|a, b| {
                let da = (a.1 - Complex::new(root, 0.0)).norm();
                let db = (b.1 - Complex::new(root, 0.0)).norm();
                da.total_cmp(&db)
            })
            .map(|(k, _)| k)?;
        let groups = conjugate_groups(&roots);
        let target_group = groups.iter().position(|g| g.contains(&target))?;
        let others: Vec<&Vec<usize>> = groups
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != target_group)
            .map(|(_, g)| g)
            .collect();
        let base = &groups[target_group];
        let mut examined = 0usize;
        for extra in 0..=others.len() {
            let mut found = None;
            let mut chosen = Vec::new();
            let ok = for_each_subset(others.len(), extra, &mut chosen, &mut |subset| {
                examined += 1;
                if examined > budget {
                    return Some(false);
                }
                let mut idx: Vec<usize> = base.clone();
                for &s in subset {
                    idx.extend(others[s].iter().copied());
                }
                if idx.len() > max_degree {
                    return None;
                }
                let candidate = integer_poly_from_roots(idx.iter().map(|&k| roots[k]))?;
                if sf.div_exact(&candidate).is_some() {
                    found = Some(candidate);
                    return Some(true);
                }
                None
            });
            if let Some(f) = found {
                return Some(f);
            }
            if ok == Some(false) {
                return None;
            }
        }
        None
    }

    /// A nontrivial factorization `self = f·g` when one exists (monic input only).
    pub fn find_factor(&self) -> Option<(IntPoly, IntPoly)> {
        if self.degree() <= 1 || !self.is_monic() {
            return None;
        }
        let sf = self.square_free();
        if sf.degree() < self.degree() {
            let co = self.div_exact(&sf)?;
            return Some((sf, co));
        }
        let roots = self.complex_roots();
        let groups = conjugate_groups(&roots);
        let n = self.degree();
        for size in 1..groups.len() {
            let mut found = None;
            let mut chosen = Vec::new();
            for_each_subset(groups.len(), size, &mut chosen, &mut |subset| {
                let idx: Vec<usize> = subset
                    .iter()
                    .flat_map(|&g| groups[g].iter().copied())
                    .collect();
                if idx.len() * 2 > n {
                    return None;
                }
                let candidate = integer_poly_from_roots(idx.iter().map(|&k| roots[k]))?;
                if let Some(co) = self.div_exact(&candidate) {
                    found = Some((candidate, co));
                    return Some(true);
                }
                None
            });
            if found.is_some() {
                return found;
            }
        }
        None
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::new(Vec::new());
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
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
            match (k, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{mag}*x")?,
                (_, true) => write!(f, "x^{k}")?,
                (_, false) => write!(f, "{mag}*x^{k}")?,
            }
        }
        Ok(())
    }
}

fn parse_term(term: &str) -> Result<(BigInt, usize), RingError> {
    let bad = || RingError::PolyParse(format!("cannot read term '{term}'"));
    if let Some(xpos) = term.find('x') {
        let coef_part = term[..xpos].trim_end_matches('*');
        let coef = if coef_part.is_empty() {
            BigInt::one()
        } else {
            coef_part.parse::<BigInt>().map_err(|_| bad())?
        };
        let rest = &term[xpos + 1..];
        let power = if rest.is_empty() {
            1
        } else if let Some(p) = rest.strip_prefix('^') {
            p.parse::<usize>().map_err(|_| bad())?
        } else {
            return Err(bad());
        };
        Ok((coef, power))
    } else {
        Ok((term.parse::<BigInt>().map_err(|_| bad())?, 0))
    }
}

/// Groups root indices so that each real root stands alone and complex roots pair with their conjugates.
fn conjugate_groups(roots: &[Complex<f64>]) -> Vec<Vec<usize>> {
    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = 1e-7 * scale;
    let mut used = vec![false; roots.len()];
    let mut groups = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        if roots[i].im.abs() <= tol {
            groups.push(vec![i]);
            continue;
        }
        let partner = (0..roots.len()).filter(|&j| !used[j]).min_by(|&a, &b| {
            let da = (roots[a] - roots[i].conj()).norm();
            let db = (roots[b] - roots[i].conj()).norm();
            da.total_cmp(&db)
        });
        match partner {
            Some(j) => {
                used[j] = true;
                groups.push(vec![i, j]);
            }
            None => groups.push(vec![i]),
        }
    }
    groups
}

/// Expands Π(x − r) and rounds to integers when every coefficient is close to one.
fn integer_poly_from_roots(roots: impl Iterator<Item = Complex<f64>>) -> Option<IntPoly> {
    let mut coeffs = vec![Complex::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex::new(0.0, 0.0); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] += *c;
            next[k] -= *c * r;
        }
        coeffs = next;
    }
    let mut out = Vec::with_capacity(coeffs.len());
    for c in coeffs {
        let rounded = c.re.round();
        let tol = 1e-6 * rounded.abs().max(1.0);
        if (c.re - rounded).abs() > tol || c.im.abs() > tol || !rounded.is_finite() {
            return None;
        }
        out.push(BigInt::from(rounded as i128));
    }
    Some(IntPoly::new(out))
}

/// Calls `visit` on every `size`-subset of `0..n` in lexicographic order until it returns `Some`.
fn for_each_subset(
    n: usize,
    size: usize,
    chosen: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]) -> Option<bool>,
) -> Option<bool> {
    if chosen.len() == size {
        return visit(chosen);
    }
    let start = chosen.last().map_or(0, |&l| l + 1);
    for k in start..n {
        if n - k < size - chosen.len() {
            break;
        }
        chosen.push(k);
        let r = for_each_subset(n, size, chosen, visit);
        chosen.pop();
        if r.is_some() {
            return r;
        }
    }
    None
}

fn sign_changes(chain: &[RatPoly], x: &BigRational) -> usize {
    let mut count = 0;
    let mut last = 0i8;
    for p in chain {
        let v = p.eval(x);
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Rational polynomial, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> RatPoly {
        RatPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    pub fn div_rem(&self, divisor: &RatPoly) -> (RatPoly, RatPoly) {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        let mut rem = self.coeffs.clone();
        let dd = divisor.degree();
        let lead = divisor.coeffs.last().unwrap().clone();
        if rem.len() < divisor.coeffs.len() {
            return (RatPoly::new(Vec::new()), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] / &lead;
            if c.is_zero() {
                continue;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= &c * d;
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (RatPoly::new(quot), RatPoly::new(rem))
    }

    pub fn gcd(&self, other: &RatPoly) -> RatPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn monic(&self) -> RatPoly {
        match self.coeffs.last() {
            None => self.clone(),
            Some(lead) => RatPoly::new(self.coeffs.iter().map(|c| c / lead).collect()),
        }
    }

    /// Scales to an integer polynomial with coprime coefficients and positive leading term.
    pub fn to_primitive_integer(&self) -> IntPoly {
        if self.is_zero() {
            return IntPoly::new(Vec::new());
        }
        let den = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(den.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let mut out: Vec<BigInt> = ints.into_iter().map(|c| c / &g).collect();
        if out.last().is_some_and(|c| c.is_negative()) {
            out.iter_mut().for_each(|c| *c = -c.clone());
        }
        IntPoly::new(out)
    }

    /// Sturm chain p, p', −rem(p, p'), ...
    pub fn sturm_chain(&self) -> Vec<RatPoly> {
        let mut chain = vec![self.clone(), self.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            chain.push(RatPoly::new(r.coeffs.iter().map(|c| -c).collect()));
        }
        chain
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_and_prints() {
        let p = IntPoly::parse("x^3 - x^2 - x - 1").unwrap();
        assert_eq!(p, IntPoly::from_i64(&[-1, -1, -1, 1]));
        assert_eq!(p.to_string(), "x^3 - x^2 - x - 1");
        assert_eq!(IntPoly::parse("2*x+3").unwrap(), IntPoly::from_i64(&[3, 2]));
        assert_eq!(
            IntPoly::parse("-x^2 + 4").unwrap(),
            IntPoly::from_i64(&[4, 0, -1])
        );
        assert!(IntPoly::parse("x^").is_err());
        assert!(IntPoly::parse("x - x").is_err());
    }

    #[test]
    fn sturm_counts_golden_ratio() {
        let p = IntPoly::from_i64(&[-1, -1, 1]);
        assert_eq!(p.count_roots(&q(3, 2), &q(17, 10)), 1);
        assert_eq!(p.count_roots(&q(-2, 1), &q(2, 1)), 2);
        assert_eq!(p.count_roots(&q(0, 1), &q(3, 2)), 0);
    }

    #[test]
    fn factors_reducible_quadratic() {
        let p = IntPoly::from_i64(&[2, -3, 1]);
        let (f, g) = p.find_factor().unwrap();
        assert_eq!(f.mul(&g), p);
        assert!(IntPoly::from_i64(&[-1, -1, 1]).find_factor().is_none());
        assert!(IntPoly::from_i64(&[-1, -1, -1, 1]).find_factor().is_none());
    }

    #[test]
    fn minimal_factor_of_characteristic_polynomial() {
        // (x^2 - x - 1)(x - 2)
        let p = IntPoly::from_i64(&[-1, -1, 1]).mul(&IntPoly::from_i64(&[-2, 1]));
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let f = p.minimal_factor(phi, 10, 10_000).unwrap();
        assert_eq!(f, IntPoly::from_i64(&[-1, -1, 1]));
        let g = p.minimal_factor(2.0, 10, 10_000).unwrap();
        assert_eq!(g, IntPoly::from_i64(&[-2, 1]));
    }

    #[test]
    fn square_free_drops_repeated_roots() {
        let p = IntPoly::from_i64(&[-2, 1]).mul(&IntPoly::from_i64(&[-2, 1]));
        assert_eq!(p.square_free(), IntPoly::from_i64(&[-2, 1]));
    }
}
