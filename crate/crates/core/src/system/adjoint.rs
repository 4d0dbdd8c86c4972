//! Tile supports from the adjoint system Q·A_j = ∪_i (D_ij + A_i), and disjointness checks.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{SubstitutionSpec, SystemError};
use crate::geometry::Support;
use crate::ring::{Point, RingElement};

/// Prototile supports with exact volumes.
#[derive(Clone, Debug, PartialEq)]
pub struct TileGeometry {
    pub supports: Vec<Support>,
    pub volumes: Vec<RingElement>,
    /// Interval lengths in dimension 1.
    pub lengths: Option<Vec<RingElement>>,
    pub bboxes: Vec<(Vec<f64>, Vec<f64>)>,
}

impl TileGeometry {
    /// Largest sup-norm extent of any prototile.
    pub fn max_extent(&self) -> f64 {
        self.bboxes
            .iter()
            .flat_map(|(lo, hi)| lo.iter().zip(hi).map(|(l, h)| h - l))
            .fold(0.0, f64::max)
    }
}

/// Nullspace basis of a matrix over the coordinate field.
pub(crate) fn nullspace(mut rows: Vec<Vec<RingElement>>) -> Vec<Vec<RingElement>> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, |r| r.len());
    let ring = rows[0][0].ring().clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n_cols {
        let Some(p) = (r..n_rows).find(|&k| !rows[k][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].inverse().expect("nonzero pivot");
        rows[r] = rows[r].iter().map(|v| v * &inv).collect();
        for k in 0..n_rows {
            if k != r && !rows[k][c].is_zero() {
                let f = rows[k][c].clone();
                let pivot_row = rows[r].clone();
                rows[k] = rows[k]
                    .iter()
                    .zip(&pivot_row)
                    .map(|(a, b)| a - &(&f * b))
                    .collect();
            }
        }
        pivots.push(c);
        r += 1;
        if r == n_rows {
            break;
        }
    }
    let free: Vec<usize> = (0..n_cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![ring.zero(); n_cols];
            v[f] = ring.one();
            for (k, &pc) in pivots.iter().enumerate() {
                v[pc] = -&rows[k][f];
            }
            v
        })
        .collect()
}

/// Positive solution of S^T ℓ = λ ℓ, scaled so the shortest length is 1.
pub(crate) fn perron_lengths(
    s: &[Vec<u64>],
    lambda: &RingElement,
) -> Result<Vec<RingElement>, SystemError> {
    let ring = lambda.ring().clone();
    let m = s.len();
    let rows: Vec<Vec<RingElement>> = (0..m)
        .map(|j| {
            (0..m)
                .map(|k| {
                    let entry = ring.from_int(s[k][j] as i64);
                    if j == k {
                        &entry - lambda
                    } else {
                        entry
                    }
                })
                .collect()
        })
        .collect();
    let basis = nullspace(rows);
    if basis.is_empty() {
        return Err(SystemError::LengthsNotExpressible(
            "λ is not an eigenvalue of the substitution matrix".into(),
        ));
    }
    let mut v = basis[0].clone();
    for b in &basis[1..] {
        v = v.iter().zip(b).map(|(x, y)| x + y).collect();
    }
    if v.iter().all(|x| x.is_negative() || x.is_zero()) {
        v = v.iter().map(|x| -x).collect();
    }
    if !v.iter().all(|x| x.is_positive()) {
        return Err(SystemError::LengthsNotExpressible(
            "eigenvector is not positive".into(),
        ));
    }
    let shortest = v.iter().min().cloned().expect("nonempty");
    let inv = shortest.inverse().expect("positive");
    Ok(v.iter().map(|x| x * &inv).collect())
}

/// Solves (1D) or verifies (d ≥ 2) the adjoint system.
pub fn solve_adjoint(spec: &SubstitutionSpec) -> Result<TileGeometry, SystemError> {
    let m = spec.colour_count();
    let (supports, lengths) = match &spec.prototiles {
        None => {
            let lambda = spec.ring.generator()?;
            let lengths = perron_lengths(&spec.substitution_matrix().entries, &lambda)?;
            (
                lengths
                    .iter()
                    .cloned()
                    .map(Support::interval)
                    .collect::<Vec<_>>(),
                Some(lengths),
            )
        }
        Some(p) => (p.clone(), None),
    };
    let volumes: Vec<RingElement> = supports.iter().map(|s| s.volume()).collect();
    let q = spec.q_diagonal();
    let det = spec.abs_det();
    for j in 0..m {
        let big = supports[j].scale(&q);
        let mut pieces: Vec<(usize, &Point)> = Vec::new();
        for i in 0..m {
            for a in &spec.digits[i][j] {
                pieces.push((i, a));
            }
        }
        let mut total = spec.ring.zero();
        for (k, &(i, a)) in pieces.iter().enumerate() {
            let moved = supports[i].translate(a);
            if !moved.contained_in(&big) {
                return Err(SystemError::Invalid(format!(
                    "piece {} at {} sticks out of the inflated tile '{}'",
                    spec.colours[i],
                    show(a),
                    spec.colours[j]
                )));
            }
            for &(i2, b) in &pieces[k + 1..] {
                let offset: Point = a.iter().zip(b).map(|(x, y)| x - y).collect();
                if supports[i].interiors_meet(&offset, &supports[i2]) {
                    return Err(SystemError::PiecesOverlap {
                        colour: spec.colours[j].clone(),
                        first: format!("{}@{}", spec.colours[i], show(a)),
                        second: format!("{}@{}", spec.colours[i2], show(b)),
                    });
                }
            }
            total = total + &volumes[i];
        }
        if total != &det * &volumes[j] {
            return Err(SystemError::PiecesDoNotCover(spec.colours[j].clone()));
        }
    }
    let bboxes = supports.iter().map(|s| s.bbox_f64()).collect();
    Ok(TileGeometry {
        supports,
        volumes,
        lengths,
        bboxes,
    })
}

pub fn show(p: &[RingElement]) -> String {
    if p.len() == 1 {
        p[0].to_string()
    } else {
        format!(
            "({})",
            p.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DuplicatePoint {
    pub colour: String,
    pub location: String,
    pub parents: [String; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjointnessReport {
    pub radius: f64,
    pub points_checked: usize,
    pub disjoint: bool,
    pub violations: Vec<DuplicatePoint>,
}

const DISJOINTNESS_POINT_BUDGET: usize = 2_000_000;

/// Iterates the point substitution from a single point of each colour until the generated
/// supertile reaches `radius`, and reports any point produced twice.
pub fn validate_disjointness(spec: &SubstitutionSpec, radius: f64) -> DisjointnessReport {
    let m = spec.colour_count();
    let mut checked = 0usize;
    let mut violations = Vec::new();
    'colours: for start in 0..m {
        let mut level: Vec<(usize, Point)> = vec![(start, spec.origin())];
        loop {
            let extent = level
                .iter()
                .map(|(_, p)| p.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if extent >= radius || level.len() > DISJOINTNESS_POINT_BUDGET / 4 {
                break;
            }
            let mut next: Vec<(usize, Point)> = Vec::new();
            let mut seen: HashMap<(usize, Point), usize> = HashMap::new();
            for (j, x) in &level {
                let qx = spec.apply_q(x);
                for i in 0..m {
                    for a in &spec.digits[i][j.to_owned()] {
                        let p: Point = qx.iter().zip(a).map(|(u, v)| u + v).collect();
                        let key = (i, p);
                        if let Some(&prev) = seen.get(&key) {
                            violations.push(DuplicatePoint {
                                colour: spec.colours[i].clone(),
                                location: show(&key.1),
                                parents: [spec.colours[prev].clone(), spec.colours[*j].clone()],
                            });
                            if violations.len() >= 20 {
                                break 'colours;
                            }
                            continue;
                        }
                        seen.insert(key.clone(), *j);
                        next.push(key);
                    }
                }
            }
            checked += next.len();
            if !violations.is_empty() || next.len() > DISJOINTNESS_POINT_BUDGET {
                break;
            }
            level = next;
        }
        if !violations.is_empty() {
            break;
        }
    }
    DisjointnessReport {
        radius,
        points_checked: checked,
        disjoint: violations.is_empty(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::word_to_spec;

    #[test]
    fn fibonacci_lengths() {
        let spec = word_to_spec(&["ab", "a"]).unwrap();
        let g = solve_adjoint(&spec).unwrap();
        let l = spec.ring.generator().unwrap();
        let lengths = g.lengths.unwrap();
        assert_eq!(lengths, vec![l.clone(), spec.ring.one()]);
        assert_eq!(&l * &lengths[0], &lengths[0] + &lengths[1]);
    }

    #[test]
    fn duplicate_digit_is_reported() {
        let mut spec = word_to_spec(&["aa"]).unwrap();
        assert!(validate_disjointness(&spec, 100.0).disjoint);
        spec.digits[0][0] = vec![vec![spec.ring.zero()], vec![spec.ring.zero()]];
        let report = validate_disjointness(&spec, 100.0);
        assert!(!report.disjoint);
        assert!(solve_adjoint(&spec).is_err());
    }
}
