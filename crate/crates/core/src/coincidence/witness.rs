//! Algebraic coincidence witnesses ξ + Q^M(Ξ ∩ B_r) ⊂ Λ_i and locator sets T_F.

use serde::{Deserialize, Serialize};

use super::CoincidenceError;
use crate::geometry::Cuboid;
use crate::par::{self, Execution};
use crate::ring::Point;
use crate::system::{adjoint_show, SubstitutionSpec};
use crate::tiling::{radius_rational, sup_norm_f64, within_radius, xi_within, Patch, Tile};

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraicWitness {
    pub colour: usize,
    pub exponent: u32,
    pub xi: Point,
    /// Radius of the Ξ sample whose image was verified.
    pub xi_radius: f64,
    /// Every translate checked lies within this radius of the origin.
    pub verified_radius: f64,
    pub translates: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessSearch {
    pub witness: Option<AlgebraicWitness>,
    /// Exponents whose translates fit in the patch and were searched.
    pub tested: Vec<u32>,
    /// Exponents skipped because Q^M(Ξ ∩ B_r) reaches beyond the patch.
    pub skipped: Vec<u32>,
}

fn norm(p: &[crate::ring::RingElement]) -> f64 {
    sup_norm_f64(&p.iter().map(|x| x.to_f64()).collect::<Vec<_>>())
}

const CHUNK: usize = 64;

/// Smallest M ≤ `m_max`, then colour, then candidate ξ ordered by norm, with
/// ξ + Q^M(Ξ ∩ B_r) ⊂ Λ_i on the patch.
pub fn find_algebraic_witness(
    spec: &SubstitutionSpec,
    patch: &Patch,
    xi_radius: f64,
    m_max: u32,
    exec: Execution,
) -> WitnessSearch {
    let sample = xi_within(patch, xi_radius, exec);
    let complete = patch.complete_radius();
    let mut images = sample.clone();
    let mut tested = Vec::new();
    let mut skipped = Vec::new();
    for m in 0..=m_max {
        if m > 0 {
            images = images.iter().map(|y| spec.apply_q(y)).collect();
        }
        let reach = images.iter().map(|y| norm(y)).fold(0.0, f64::max);
        let room = complete - reach;
        if room < 0.0 || images.is_empty() {
            skipped.push(m);
            continue;
        }
        tested.push(m);
        let bound = radius_rational(room);
        for colour in 0..patch.colour_count() {
            let mut candidates: Vec<(f64, &Tile)> = patch
                .tiles()
                .iter()
                .filter(|t| t.colour == colour && within_radius(&t.position, &bound))
                .map(|t| (norm(&t.position), t))
                .collect();
            candidates.sort_by(|a, b| {
                a.0.total_cmp(&b.0)
                    .then_with(|| a.1.position.cmp(&b.1.position))
            });
            let chunks: Vec<&[(f64, &Tile)]> = candidates.chunks(CHUNK).collect();
            for group in chunks.chunks(16) {
                let hits = par::map(exec, group, |chunk| {
                    chunk.iter().find(|(_, t)| {
                        images.iter().all(|y| {
                            let p: Point = t.position.iter().zip(y).map(|(a, b)| a + b).collect();
                            patch.contains(colour, &p)
                        })
                    })
                });
                if let Some((n, t)) = hits.into_iter().flatten().next() {
                    return WitnessSearch {
                        witness: Some(AlgebraicWitness {
                            colour,
                            exponent: m,
                            xi: t.position.clone(),
                            xi_radius,
                            verified_radius: n + reach,
                            translates: images.len(),
                        }),
                        tested,
                        skipped,
                    };
                }
            }
        }
    }
    WitnessSearch {
        witness: None,
        tested,
        skipped,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocatorReport {
    pub radius: f64,
    /// T_F(Λ) ∩ B_radius, exact strings.
    pub vectors: Vec<String>,
    pub differences_checked: usize,
    /// Differences t₁ − t₂ with t₁ − t₂ + ξ ∉ Λ_j, for the supplied witness.
    pub violations: Vec<String>,
}

/// T_F(Λ) = {t : t + (Λ ∩ F) = Λ ∩ (t + F)} within `radius`, plus the inclusion
/// T_F − T_F ⊂ −ξ + Λ_j when a witness (j, ξ) is given.
pub fn locator_set(
    patch: &Patch,
    window: &Cuboid,
    radius: f64,
    witness: Option<(usize, &Point)>,
    exec: Execution,
) -> Result<(Vec<Point>, LocatorReport), CoincidenceError> {
    let (flo, fhi) = window.bbox_f64();
    let extent = flo.iter().chain(&fhi).fold(0.0f64, |a, x| a.max(x.abs()));
    let complete = patch.complete_radius();
    if radius + extent > complete {
        return Err(CoincidenceError::PatchTooSmall {
            needed: radius + extent,
            available: complete,
        });
    }
    let members = |shift: &[crate::ring::RingElement]| -> Vec<(usize, Point)> {
        let lo: Vec<f64> = flo.iter().zip(shift).map(|(a, t)| a + t.to_f64()).collect();
        let hi: Vec<f64> = fhi.iter().zip(shift).map(|(a, t)| a + t.to_f64()).collect();
        let mut out: Vec<(usize, Point)> = patch
            .tiles_near(&lo, &hi)
            .into_iter()
            .map(|k| &patch.tiles()[k])
            .filter(|t| {
                let back: Point = t.position.iter().zip(shift).map(|(a, b)| a - b).collect();
                window.contains_point(&back)
            })
            .map(|t| (t.colour, t.position.clone()))
            .collect();
        out.sort();
        out
    };
    let zero: Point = window.lo.iter().map(|x| x.ring().zero()).collect();
    let base = members(&zero);
    let Some((c0, p0)) = base.first().cloned() else {
        return Err(CoincidenceError::EmptyWindow);
    };
    let bound = radius_rational(radius);
    let candidates: Vec<Point> = patch
        .tiles()
        .iter()
        .filter(|t| t.colour == c0)
        .map(|t| {
            t.position
                .iter()
                .zip(&p0)
                .map(|(a, b)| a - b)
                .collect::<Point>()
        })
        .filter(|t| within_radius(t, &bound))
        .collect();
    let mut vectors: Vec<Point> = par::map(exec, &candidates, |t| {
        let moved: Vec<(usize, Point)> = base
            .iter()
            .map(|(c, x)| (*c, x.iter().zip(t).map(|(a, b)| a + b).collect()))
            .collect();
        (members(t) == moved).then(|| t.clone())
    })
    .into_iter()
    .flatten()
    .collect();
    vectors.sort();
    let mut violations = Vec::new();
    let mut checked = 0;
    if let Some((j, xi)) = witness {
        let inner = radius_rational(complete);
        for a in &vectors {
            for b in &vectors {
                let v: Point = a
                    .iter()
                    .zip(b)
                    .zip(xi)
                    .map(|((x, y), z)| &(x - y) + z)
                    .collect();
                if !within_radius(&v, &inner) {
                    continue;
                }
                checked += 1;
                if !patch.contains(j, &v) && violations.len() < 20 {
                    violations.push(adjoint_show(
                        &a.iter().zip(b).map(|(x, y)| x - y).collect::<Point>(),
                    ));
                }
            }
        }
    }
    let report = LocatorReport {
        radius,
        vectors: vectors.iter().map(|v| adjoint_show(v)).collect(),
        differences_checked: checked,
        violations,
    };
    Ok((vectors, report))
}
