//! Geometric realization of symbolic substitutions σ: A → A⁺.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::adjoint::perron_lengths;
use super::{check_primitivity, Primitivity, SubstitutionSpec, SystemError, MAX_COLOURS};
use crate::ring::matrix::characteristic_polynomial;
use crate::ring::{ExpansionMap, MinimalPolynomial, Ring, RingElement, MAX_RING_DEGREE};

/// Budget on root subsets examined while extracting the minimal polynomial.
const FACTOR_BUDGET: usize = 200_000;

/// Realizes words over the alphabet `a, b, c, …` (word k is the image of letter k).
pub fn word_to_spec(words: &[&str]) -> Result<SubstitutionSpec, SystemError> {
    if words.len() > 26 {
        return Err(SystemError::TooManyColours(words.len()));
    }
    let alphabet: Vec<String> = (0..words.len())
        .map(|k| ((b'a' + k as u8) as char).to_string())
        .collect();
    let owned: Vec<String> = words.iter().map(|w| w.to_string()).collect();
    word_to_spec_with_alphabet(&alphabet, &owned)
}

/// Realizes words whose letters are the single-character colour names in `alphabet`.
pub fn word_to_spec_with_alphabet(
    alphabet: &[String],
    words: &[String],
) -> Result<SubstitutionSpec, SystemError> {
    let m = alphabet.len();
    if m == 0 {
        return Err(SystemError::Invalid("empty alphabet".into()));
    }
    if m > MAX_COLOURS {
        return Err(SystemError::TooManyColours(m));
    }
    if words.len() != m {
        return Err(SystemError::Invalid(format!(
            "{} words given for {m} colours",
            words.len()
        )));
    }
    let letters: Vec<char> = alphabet
        .iter()
        .map(|a| {
            let mut cs = a.chars();
            match (cs.next(), cs.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(SystemError::Invalid(format!(
                    "colour '{a}' is not a single letter"
                ))),
            }
        })
        .collect::<Result<_, _>>()?;
    let mut encoded: Vec<Vec<usize>> = Vec::with_capacity(m);
    for (j, w) in words.iter().enumerate() {
        if w.is_empty() {
            return Err(SystemError::EmptyColumn(alphabet[j].clone()));
        }
        let mut seq = Vec::new();
        for c in w.chars() {
            let i = letters
                .iter()
                .position(|&l| l == c)
                .ok_or_else(|| SystemError::UnknownColour(c.to_string()))?;
            seq.push(i);
        }
        encoded.push(seq);
    }
    let mut s = vec![vec![0i64; m]; m];
    for (j, seq) in encoded.iter().enumerate() {
        for &i in seq {
            s[i][j] += 1;
        }
    }
    let mut warnings = Vec::new();
    let s_u: Vec<Vec<u64>> = s
        .iter()
        .map(|r| r.iter().map(|&v| v as u64).collect())
        .collect();
    if check_primitivity(&s_u) == Primitivity::NotPrimitive {
        warnings.push("substitution matrix is not primitive".to_string());
    }
    let ring = perron_ring(&s)?;
    let lambda = ring.generator()?;
    let s_rows: Vec<Vec<u64>> = s_u;
    let lengths = perron_lengths(&s_rows, &lambda)?;
    let mut digits = vec![vec![Vec::new(); m]; m];
    for (j, seq) in encoded.iter().enumerate() {
        let mut offset = ring.zero();
        for &i in seq {
            digits[i][j].push(vec![offset.clone()]);
            offset = offset + &lengths[i];
        }
    }
    Ok(SubstitutionSpec {
        dimension: 1,
        colours: alphabet.to_vec(),
        ring,
        expansion: ExpansionMap::Scalar(lambda),
        digits,
        prototiles: None,
        words: Some(words.to_vec()),
        warnings,
    })
}

/// Ring generated by the Perron eigenvalue of an integer matrix.
fn perron_ring(s: &[Vec<i64>]) -> Result<Ring, SystemError> {
    let f: Vec<Vec<f64>> = s
        .iter()
        .map(|r| r.iter().map(|&v| v as f64).collect())
        .collect();
    let rho = crate::ring::matrix::spectral_radius_f64(&f)?.value;
    if rho <= 1.0 + 1e-9 {
        return Err(SystemError::Invalid(format!(
            "Perron eigenvalue {rho} does not exceed 1"
        )));
    }
    let chi = characteristic_polynomial(s);
    let minpoly = chi
        .minimal_factor(rho, MAX_RING_DEGREE, FACTOR_BUDGET)
        .ok_or_else(|| {
            SystemError::NotRepresentable(format!(
                "no factor of degree ≤ {MAX_RING_DEGREE} of {chi} found"
            ))
        })?;
    // Isolating bracket around rho with rational endpoints.
    let mut delta = 0.25f64.min((rho - 1.0) / 2.0);
    for _ in 0..200 {
        let lo = BigRational::from_float(rho - delta).expect("finite");
        let hi = BigRational::from_float(rho + delta).expect("finite");
        let lo = simplify(&lo, &hi, true);
        let hi = simplify(&lo, &hi, false);
        if let Ok(mp) = MinimalPolynomial::new(minpoly.clone(), lo, hi) {
            return Ok(Ring::algebraic(mp));
        }
        delta /= 2.0;
    }
    Err(SystemError::NotRepresentable(
        "could not isolate the Perron root".into(),
    ))
}

/// Picks a short rational endpoint: the lower end rounded down, the upper end rounded up,
/// at the coarsest power-of-ten denominator that keeps them ordered.
fn simplify(lo: &BigRational, hi: &BigRational, lower: bool) -> BigRational {
    let mut den = BigInt::one();
    for _ in 0..30 {
        let scale = BigRational::from_integer(den.clone());
        let a = (lo * &scale).floor() / &scale;
        let b = (hi * &scale).ceil() / &scale;
        let width = hi - lo;
        if (&b - &a) <= &width * BigRational::from_integer(BigInt::from(2)) && a.is_positive() {
            return if lower { a } else { b };
        }
        den *= 10;
    }
    if lower {
        lo.clone()
    } else {
        hi.clone()
    }
}

/// One substitution step read back as words: the colours of the pieces of each inflated tile,
/// left to right. Only meaningful in dimension 1.
pub fn render_words(spec: &SubstitutionSpec) -> Vec<String> {
    let m = spec.colour_count();
    (0..m)
        .map(|j| {
            let mut pieces: Vec<(RingElement, usize)> = Vec::new();
            for i in 0..m {
                for p in &spec.digits[i][j] {
                    pieces.push((p[0].clone(), i));
                }
            }
            pieces.sort();
            pieces
                .iter()
                .map(|(_, i)| spec.colours[*i].as_str())
                .collect::<Vec<_>>()
                .concat()
        })
        .collect()
}
