//! Substitution specifications: parsing, validation, substitution matrix, primitivity, and the
//! adjoint system for tile supports.

mod adjoint;
mod document;
pub mod expr;
mod words;

pub use adjoint::{
    show as adjoint_show, solve_adjoint, validate_disjointness, DisjointnessReport, DuplicatePoint,
    TileGeometry,
};
pub use document::{parse_spec, to_document};
pub use words::{render_words, word_to_spec, word_to_spec_with_alphabet};

use serde::{Deserialize, Serialize};

use crate::geometry::Support;
use crate::ring::{ExpansionMap, PerronEstimate, Point, Ring, RingElement, RingError};

/// Largest supported number of colours.
pub const MAX_COLOURS: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SystemError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid specification: {0}")]
    Invalid(String),
    #[error("unknown colour reference '{0}'")]
    UnknownColour(String),
    #[error("coordinate outside the declared ring: {0}")]
    OutsideRing(String),
    #[error("empty substitution column for colour '{0}'")]
    EmptyColumn(String),
    #[error("too many colours ({0}, maximum {MAX_COLOURS})")]
    TooManyColours(usize),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("Perron eigenvalue not representable exactly: {0}")]
    NotRepresentable(String),
    #[error("tile lengths not expressible in the declared ring: {0}")]
    LengthsNotExpressible(String),
    #[error("pieces of colour '{colour}' overlap: {first} and {second}")]
    PiecesOverlap {
        colour: String,
        first: String,
        second: String,
    },
    #[error("pieces fail to cover the inflated tile of colour '{0}'")]
    PiecesDoNotCover(String),
}

/// The input datum: colours, expansion map, and digit sets `digits[i][j] = D_ij`
/// (positions of colour-i tiles inside the inflated colour-j tile).
#[derive(Clone, Debug, PartialEq)]
pub struct SubstitutionSpec {
    pub dimension: usize,
    pub colours: Vec<String>,
    pub ring: Ring,
    pub expansion: ExpansionMap,
    pub digits: Vec<Vec<Vec<Point>>>,
    /// Explicit supports for d ≥ 2.
    pub prototiles: Option<Vec<Support>>,
    /// The symbolic words when the spec came from a word substitution.
    pub words: Option<Vec<String>>,
    pub warnings: Vec<String>,
}

impl SubstitutionSpec {
    pub fn colour_count(&self) -> usize {
        self.colours.len()
    }

    pub fn colour_index(&self, name: &str) -> Option<usize> {
        self.colours.iter().position(|c| c == name)
    }

    /// `S_ij = #D_ij`.
    pub fn substitution_matrix(&self) -> SubstitutionMatrix {
        let entries = self
            .digits
            .iter()
            .map(|row| row.iter().map(|d| d.len() as u64).collect())
            .collect();
        SubstitutionMatrix::new(entries)
    }

    /// Diagonal of Q (as ring elements).
    pub fn q_diagonal(&self) -> Vec<RingElement> {
        self.expansion
            .diagonal()
            .expect("validated specs have a diagonal expansion")
    }

    pub fn abs_det(&self) -> RingElement {
        self.expansion.abs_det(&self.ring)
    }

    pub fn apply_q(&self, p: &[RingElement]) -> Point {
        match &self.expansion {
            ExpansionMap::Scalar(l) => p.iter().map(|x| l * x).collect(),
            ExpansionMap::Matrix(_) => self
                .q_diagonal()
                .iter()
                .zip(p)
                .map(|(q, x)| q * x)
                .collect(),
        }
    }

    pub fn origin(&self) -> Point {
        vec![self.ring.zero(); self.dimension]
    }

    /// Common word length when the spec came from a constant-length word substitution.
    pub fn constant_length(&self) -> Option<usize> {
        let words = self.words.as_ref()?;
        let l = words.first()?.chars().count();
        words.iter().all(|w| w.chars().count() == l).then_some(l)
    }
}

/// Substitution matrix with its Perron data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubstitutionMatrix {
    pub entries: Vec<Vec<u64>>,
    pub perron: PerronEstimate,
}

impl SubstitutionMatrix {
    pub fn new(entries: Vec<Vec<u64>>) -> Self {
        let f: Vec<Vec<f64>> = entries
            .iter()
            .map(|r| r.iter().map(|&v| v as f64).collect())
            .collect();
        let perron =
            crate::ring::matrix::spectral_radius_f64(&f).expect("square nonnegative matrix");
        SubstitutionMatrix { entries, perron }
    }

    pub fn primitivity(&self) -> Primitivity {
        check_primitivity(&self.entries)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "power")]
pub enum Primitivity {
    /// Smallest k with S^k entrywise positive.
    Primitive(usize),
    NotPrimitive,
}

/// Smallest k ≤ (m−1)² + 1 with S^k > 0, using boolean powers.
pub fn check_primitivity(s: &[Vec<u64>]) -> Primitivity {
    let m = s.len();
    if m == 0 || m > MAX_COLOURS {
        return Primitivity::NotPrimitive;
    }
    let full: u64 = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let base: Vec<u64> = s
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &v)| v > 0)
                .fold(0u64, |acc, (j, _)| acc | (1 << j))
        })
        .collect();
    let mut power = base.clone();
    let bound = (m - 1) * (m - 1) + 1;
    for k in 1..=bound {
        if power.iter().all(|&r| r == full) {
            return Primitivity::Primitive(k);
        }
        power = power
            .iter()
            .map(|&row| {
                let mut out = 0u64;
                for (t, &b) in base.iter().enumerate() {
                    if row >> t & 1 == 1 {
                        out |= b;
                    }
                }
                out
            })
            .collect();
    }
    Primitivity::NotPrimitive
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitivity_examples() {
        assert_eq!(
            check_primitivity(&[vec![1, 1], vec![1, 0]]),
            Primitivity::Primitive(2)
        );
        assert_eq!(
            check_primitivity(&[vec![1, 0], vec![0, 1]]),
            Primitivity::NotPrimitive
        );
        assert_eq!(
            check_primitivity(&[vec![0, 1], vec![1, 0]]),
            Primitivity::NotPrimitive
        );
        assert_eq!(check_primitivity(&[vec![2]]), Primitivity::Primitive(1));
    }
}
