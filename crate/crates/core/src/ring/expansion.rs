//! The expansive linear map Q: a scalar λ in one dimension or a rational matrix.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::element::{Ring, RingElement};
use super::matrix::{determinant, eigenvalue_moduli, mat_mul, solve_augmented};
use super::RingError;

/// Margin on |eigenvalue| − 1 below which a map is not accepted as expansive.
pub const EXPANSION_MARGIN: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum ExpansionMap {
    /// Multiplication by the ring generator λ (one dimension).
    Scalar(RingElement),
    /// Rational d×d matrix acting on column vectors.
    Matrix(Vec<Vec<BigRational>>),
}

impl ExpansionMap {
    pub fn dimension(&self) -> usize {
        match self {
            ExpansionMap::Scalar(_) => 1,
            ExpansionMap::Matrix(m) => m.len(),
        }
    }

    pub fn check_expansive(&self) -> Result<(), RingError> {
        let moduli = match self {
            ExpansionMap::Scalar(l) => vec![l.to_f64().abs()],
            ExpansionMap::Matrix(m) => {
                let n = m.len();
                if m.iter().any(|r| r.len() != n) || n == 0 {
                    return Err(RingError::NotSquare);
                }
                let f: Vec<Vec<f64>> = m
                    .iter()
                    .map(|r| r.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
                    .collect();
                eigenvalue_moduli(&f)
            }
        };
        let smallest = moduli.iter().copied().fold(f64::INFINITY, f64::min);
        if !(smallest - 1.0 > EXPANSION_MARGIN) {
            return Err(RingError::NotExpansive(smallest));
        }
        Ok(())
    }

    /// |det Q| as an element of `ring`.
    pub fn abs_det(&self, ring: &Ring) -> RingElement {
        match self {
            ExpansionMap::Scalar(l) => l.abs(),
            ExpansionMap::Matrix(m) => {
                let d = determinant(m);
                ring.from_rational(if d < BigRational::zero() { -d } else { d })
            }
        }
    }

    pub fn apply(&self, v: &[RingElement]) -> Vec<RingElement> {
        match self {
            ExpansionMap::Scalar(l) => v.iter().map(|x| l * x).collect(),
            ExpansionMap::Matrix(m) => {
                let ring = v[0].ring().clone();
                m.iter()
                    .map(|row| {
                        let mut acc = ring.zero();
                        for (q, x) in row.iter().zip(v) {
                            if !q.is_zero() {
                                acc = acc + x.scale(q);
                            }
                        }
                        acc
                    })
                    .collect()
            }
        }
    }

    pub fn pow(&self, n: u32) -> ExpansionMap {
        match self {
            ExpansionMap::Scalar(l) => ExpansionMap::Scalar(l.pow(n)),
            ExpansionMap::Matrix(m) => {
                let d = m.len();
                let mut acc: Vec<Vec<BigRational>> = (0..d)
                    .map(|i| {
                        (0..d)
                            .map(|j| {
                                if i == j {
                                    BigRational::one()
                                } else {
                                    BigRational::zero()
                                }
                            })
                            .collect()
                    })
                    .collect();
                for _ in 0..n {
                    acc = mat_mul(&acc, m);
                }
                ExpansionMap::Matrix(acc)
            }
        }
    }

    /// Diagonal entries when Q is diagonal (always true in one dimension).
    pub fn diagonal(&self) -> Option<Vec<RingElement>> {
        match self {
            ExpansionMap::Scalar(l) => Some(vec![l.clone()]),
            ExpansionMap::Matrix(m) => {
                let ring = Ring::rational();
                for (i, row) in m.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        if i != j && !v.is_zero() {
                            return None;
                        }
                    }
                }
                Some(
                    m.iter()
                        .enumerate()
                        .map(|(i, r)| ring.from_rational(r[i].clone()))
                        .collect(),
                )
            }
        }
    }

    /// Solves y = Q·y + e, i.e. y = (I − Q)⁻¹ e.
    pub fn fixed_point(&self, e: &[RingElement]) -> Result<Vec<RingElement>, RingError> {
        match self {
            ExpansionMap::Scalar(l) => {
                let denom = &l.ring().one() - l;
                Ok(vec![e[0].checked_div(&denom)?])
            }
            ExpansionMap::Matrix(m) => {
                let d = m.len();
                let mut aug: Vec<Vec<BigRational>> = (0..d)
                    .map(|i| {
                        let mut row: Vec<BigRational> = (0..d)
                            .map(|j| {
                                let id = if i == j {
                                    BigRational::one()
                                } else {
                                    BigRational::zero()
                                };
                                id - &m[i][j]
                            })
                            .collect();
                        let rhs = e[i].as_rational().cloned().ok_or(RingError::RingMismatch)?;
                        row.push(rhs);
                        Ok(row)
                    })
                    .collect::<Result<_, RingError>>()?;
                let sol = solve_augmented(&mut aug).ok_or(RingError::DivisionByZero)?;
                let ring = e[0].ring().clone();
                Ok(sol.into_iter().map(|q| ring.from_rational(q)).collect())
            }
        }
    }

    /// Float version of the map for geometric pruning.
    pub fn to_f64_matrix(&self) -> Vec<Vec<f64>> {
        match self {
            ExpansionMap::Scalar(l) => vec![vec![l.to_f64()]],
            ExpansionMap::Matrix(m) => m
                .iter()
                .map(|r| r.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
                .collect(),
        }
    }
}
