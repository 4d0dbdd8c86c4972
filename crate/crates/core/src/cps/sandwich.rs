//! Finite-radius check of Λ(W°) ⊂ Λ_i ⊂ Λ(W) in coordinates anchored at the seed tile.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{CpsError, StarMap, WindowEstimate};
use crate::ring::matrix::lattice_basis;
use crate::ring::{Point, Ring, RingElement};
use crate::system::adjoint_show;
use crate::tiling::{radius_rational, within_radius, Patch};

const LATTICE_POINT_BUDGET: u64 = 5_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub colour: usize,
    /// `inner`: a point of L with ψ-image deep inside W_i that is not in Λ_i.
    /// `outer`: a point of Λ_i whose ψ-image misses the grown outer cover.
    pub kind: String,
    pub position: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub radius: f64,
    pub epsilon: f64,
    pub anchor: String,
    pub lattice_rank: usize,
    pub lattice_points: usize,
    pub members_checked: usize,
    pub violations: Vec<Violation>,
}

/// Z-basis of L = ⟨Λ − anchor⟩.
fn basis(patch: &Patch, anchor: &Point, ring: &Ring) -> Vec<RingElement> {
    let vectors: Vec<Vec<BigRational>> = patch
        .tiles()
        .iter()
        .map(|t| (&t.position[0] - &anchor[0]).coords().to_vec())
        .collect();
    lattice_basis(&vectors)
        .into_iter()
        .map(|c| ring.element(c))
        .collect()
}

/// Points x ∈ L with (x, ψ(x)) in `[lo, hi] × [zlo, zhi]`, enumerated through the Minkowski
/// embedding of a basis.
pub fn lattice_points(
    star: &StarMap,
    basis: &[RingElement],
    real: (f64, f64),
    internal: (&[f64], &[f64]),
) -> Option<Vec<RingElement>> {
    let n = basis.len();
    let images: Vec<Vec<f64>> = basis
        .iter()
        .map(|b| std::iter::once(b.to_f64()).chain(star.apply(b)).collect())
        .collect();
    if images.iter().any(|v| v.len() != n) {
        return None;
    }
    let e = DMatrix::from_fn(n, n, |r, c| images[c][r]);
    let inv = e.clone().try_inverse()?;
    let lo: Vec<f64> = std::iter::once(real.0)
        .chain(internal.0.iter().copied())
        .collect();
    let hi: Vec<f64> = std::iter::once(real.1)
        .chain(internal.1.iter().copied())
        .collect();
    let mut kmin = vec![f64::INFINITY; n];
    let mut kmax = vec![f64::NEG_INFINITY; n];
    for corner in 0..(1u32 << n) {
        let z: Vec<f64> = (0..n)
            .map(|a| if corner >> a & 1 == 1 { hi[a] } else { lo[a] })
            .collect();
        for b in 0..n {
            let k: f64 = (0..n).map(|a| inv[(b, a)] * z[a]).sum();
            kmin[b] = kmin[b].min(k);
            kmax[b] = kmax[b].max(k);
        }
    }
    let ranges: Vec<(i64, i64)> = kmin
        .iter()
        .zip(&kmax)
        .map(|(a, b)| (a.floor() as i64 - 1, b.ceil() as i64 + 1))
        .collect();
    let total: u64 = ranges.iter().map(|(a, b)| (b - a + 1) as u64).product();
    if total > LATTICE_POINT_BUDGET {
        return None;
    }
    let ring = basis[0].ring().clone();
    let mut out = Vec::new();
    let mut k: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        let zf: Vec<f64> = (0..n)
            .map(|r| (0..n).map(|c| e[(r, c)] * k[c] as f64).sum())
            .collect();
        let slack = 1e-9;
        if zf
            .iter()
            .enumerate()
            .all(|(a, v)| *v >= lo[a] - slack && *v <= hi[a] + slack)
        {
            let x = basis.iter().zip(&k).fold(ring.zero(), |acc, (b, &c)| {
                acc + &b.scale(&BigRational::from_integer(BigInt::from(c)))
            });
            out.push(x);
        }
        let mut a = 0;
        loop {
            if a == n {
                return Some(out);
            }
            k[a] += 1;
            if k[a] <= ranges[a].1 {
                break;
            }
            k[a] = ranges[a].0;
            a += 1;
        }
    }
}

/// Checks both inclusions on B_radius with margin `epsilon` in the internal space.
pub fn verify_sandwich(
    star: &StarMap,
    patch: &Patch,
    anchor: &Point,
    windows: &[WindowEstimate],
    radius: f64,
    epsilon: f64,
) -> Result<SandwichReport, CpsError> {
    if radius > patch.complete_radius() {
        return Err(CpsError::Unsupported(format!(
            "sandwich radius {radius} exceeds the complete patch radius {}",
            patch.complete_radius()
        )));
    }
    let ring = anchor[0].ring().clone();
    let basis = basis(patch, anchor, &ring);
    let dim = star.internal_dimension();
    let mut zlo = vec![f64::INFINITY; dim];
    let mut zhi = vec![f64::NEG_INFINITY; dim];
    for w in windows {
        for a in 0..dim {
            zlo[a] = zlo[a].min(w.bbox.0[a] - w.cell);
            zhi[a] = zhi[a].max(w.bbox.1[a] + w.cell);
        }
    }
    let a0 = anchor[0].to_f64();
    let bound = radius_rational(radius);
    let points = lattice_points(
        star,
        &basis,
        (-radius - a0 - 1.0, radius - a0 + 1.0),
        (&zlo, &zhi),
    )
    .ok_or_else(|| CpsError::Unsupported("lattice enumeration exceeded its budget".into()))?;
    let mut violations = Vec::new();
    let mut lattice_count = 0;
    for x in &points {
        let p: Point = vec![x + &anchor[0]];
        if !within_radius(&p, &bound) {
            continue;
        }
        lattice_count += 1;
        let z = star.apply(x);
        for w in windows {
            if w.in_inner_shrunk(&z, epsilon) && !patch.contains(w.colour, &p) {
                violations.push(Violation {
                    colour: w.colour,
                    kind: "inner".into(),
                    position: adjoint_show(&p),
                });
            }
        }
    }
    let mut members = 0;
    for t in patch.tiles() {
        if !within_radius(&t.position, &bound) {
            continue;
        }
        let Some(w) = windows.iter().find(|w| w.colour == t.colour) else {
            continue;
        };
        members += 1;
        let z = star.apply(&(&t.position[0] - &anchor[0]));
        if !w.in_outer_grown(&z, epsilon) {
            violations.push(Violation {
                colour: t.colour,
                kind: "outer".into(),
                position: adjoint_show(&t.position),
            });
        }
    }
    Ok(SandwichReport {
        radius,
        epsilon,
        anchor: adjoint_show(anchor),
        lattice_rank: basis.len(),
        lattice_points: lattice_count,
        members_checked: members,
        violations,
    })
}
