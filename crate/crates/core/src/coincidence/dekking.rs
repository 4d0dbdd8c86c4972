//! Dekking's coincidence for constant-length substitutions. The equivalence with pure point
//! spectrum holds for height 1.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::CoincidenceError;
use crate::ring::RingElement;
use crate::system::SubstitutionSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "result")]
pub enum DekkingResult {
    /// Some composition of `n` column maps is constant; `column` is its 1-based index in σⁿ.
    Coincidence {
        n: usize,
        column: u64,
    },
    None,
}

/// Breadth-first search over letter subsets under the column maps c_k(x) = σ(x)_k.
pub fn dekking_check(words: &[Vec<usize>]) -> Result<DekkingResult, CoincidenceError> {
    let m = words.len();
    let Some(len) = words.first().map(Vec::len) else {
        return Ok(DekkingResult::None);
    };
    if len == 0 || words.iter().any(|w| w.len() != len) {
        return Err(CoincidenceError::UnequalLengths);
    }
    let full: Vec<usize> = (0..m).collect();
    if m == 1 {
        return Ok(DekkingResult::Coincidence { n: 1, column: 1 });
    }
    // Each visited subset remembers (depth, 0-based column index of the composed map).
    let mut seen: HashMap<Vec<usize>, (usize, u64)> = HashMap::new();
    seen.insert(full.clone(), (0, 0));
    let mut queue = VecDeque::from([full]);
    while let Some(set) = queue.pop_front() {
        let (depth, index) = seen[&set];
        for k in 0..len {
            let mut image: Vec<usize> = set.iter().map(|&x| words[x][k]).collect();
            image.sort_unstable();
            image.dedup();
            if seen.contains_key(&image) {
                continue;
            }
            let next = (depth + 1, index * len as u64 + k as u64);
            if image.len() == 1 {
                return Ok(DekkingResult::Coincidence {
                    n: next.0,
                    column: next.1 + 1,
                });
            }
            seen.insert(image.clone(), next);
            queue.push_back(image);
        }
    }
    Ok(DekkingResult::None)
}

/// The symbolic substitution of a 1D spec: the colours of the pieces of each inflated tile,
/// left to right.
pub fn symbolic_words(spec: &SubstitutionSpec) -> Result<Vec<Vec<usize>>, CoincidenceError> {
    if spec.dimension != 1 {
        return Err(CoincidenceError::NotSymbolic);
    }
    let m = spec.colour_count();
    Ok((0..m)
        .map(|j| {
            let mut pieces: Vec<(&RingElement, usize)> = (0..m)
                .flat_map(|i| spec.digits[i][j].iter().map(move |p| (&p[0], i)))
                .collect();
            pieces.sort();
            pieces.into_iter().map(|(_, i)| i).collect()
        })
        .collect())
}

pub fn dekking_for_spec(spec: &SubstitutionSpec) -> Result<DekkingResult, CoincidenceError> {
    dekking_check(&symbolic_words(spec)?)
}

/// Prefix length of the fixed point used by [`height`].
const HEIGHT_PREFIX: usize = 1 << 14;

/// Height of a primitive constant-length substitution of length ℓ: the largest n coprime to ℓ
/// dividing every return time k of the first letter of a fixed point u (u_k = u_0).
pub fn height(words: &[Vec<usize>]) -> Result<usize, CoincidenceError> {
    let len = words.first().map_or(0, Vec::len);
    if len == 0 || words.iter().any(|w| w.len() != len) {
        return Err(CoincidenceError::UnequalLengths);
    }
    // A letter on a cycle of the first-letter map starts a fixed point of a power of σ.
    let mut start = 0;
    for _ in 0..words.len() {
        start = words[start][0];
    }
    let mut u = vec![start];
    while u.len() < HEIGHT_PREFIX {
        let next: Vec<usize> = u.iter().flat_map(|&x| words[x].iter().copied()).collect();
        if next.len() == u.len() {
            break;
        }
        u = next;
    }
    let g = u
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &x)| x == u[0])
        .fold(0, |g, (k, _)| num_integer::gcd(g, k));
    Ok((1..=g.max(1))
        .rev()
        .find(|&n| g % n == 0 && num_integer::gcd(n, len) == 1)
        .unwrap_or(1))
}
