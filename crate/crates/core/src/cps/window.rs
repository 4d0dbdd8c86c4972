//! Window estimates: grid covers of the ψ-image of each colour class.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{CpsError, StarMap};
use crate::par::{self, Execution};
use crate::ring::Point;
use crate::tiling::{radius_rational, within_radius, Patch};

/// Cells per diameter at the starting resolution.
pub const WINDOW_CELLS_COARSE: f64 = 16.0;
/// Finest resolution, in cells per diameter.
pub const WINDOW_CELLS_FINE: f64 = 1024.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowEstimate {
    pub colour: usize,
    pub source_radius: f64,
    /// ψ(p − anchor) for p ∈ Λ_colour ∩ B_R.
    pub points: Vec<Vec<f64>>,
    pub bbox: (Vec<f64>, Vec<f64>),
    pub cell: f64,
    pub origin: Vec<f64>,
    pub occupied: BTreeSet<Vec<i64>>,
    /// Occupied cells whose whole neighbourhood is occupied.
    pub inner: BTreeSet<Vec<i64>>,
    /// Occupied cells grown by one cell.
    pub outer: BTreeSet<Vec<i64>>,
}

fn neighbourhood(key: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![key.to_vec()];
    for a in 0..key.len() {
        let mut next = Vec::with_capacity(out.len() * 3);
        for k in &out {
            for d in [-1, 0, 1] {
                let mut n = k.clone();
                n[a] += d;
                next.push(n);
            }
        }
        out = next;
    }
    out
}

type Covers = (BTreeSet<Vec<i64>>, BTreeSet<Vec<i64>>, BTreeSet<Vec<i64>>);

fn covers(points: &[Vec<f64>], origin: &[f64], cell: f64) -> Covers {
    let occupied: BTreeSet<Vec<i64>> = points
        .iter()
        .map(|z| {
            z.iter()
                .zip(origin)
                .map(|(x, o)| ((x - o) / cell).floor() as i64)
                .collect()
        })
        .collect();
    let inner = occupied
        .iter()
        .filter(|k| neighbourhood(k).iter().all(|n| occupied.contains(n)))
        .cloned()
        .collect();
    let outer = occupied.iter().flat_map(|k| neighbourhood(k)).collect();
    (occupied, inner, outer)
}

impl WindowEstimate {
    pub fn dimension(&self) -> usize {
        self.origin.len()
    }

    fn cell_volume(&self) -> f64 {
        self.cell.powi(self.dimension() as i32)
    }

    pub fn inner_volume(&self) -> f64 {
        self.inner.len() as f64 * self.cell_volume()
    }

    pub fn outer_volume(&self) -> f64 {
        self.outer.len() as f64 * self.cell_volume()
    }

    fn cells_meeting(&self, z: &[f64], eps: f64) -> Vec<Vec<i64>> {
        let lo: Vec<i64> = z
            .iter()
            .zip(&self.origin)
            .map(|(x, o)| ((x - eps - o) / self.cell).floor() as i64)
            .collect();
        let hi: Vec<i64> = z
            .iter()
            .zip(&self.origin)
            .map(|(x, o)| ((x + eps - o) / self.cell).floor() as i64)
            .collect();
        let mut out = vec![Vec::new()];
        for a in 0..lo.len() {
            out = out
                .into_iter()
                .flat_map(|k: Vec<i64>| {
                    (lo[a]..=hi[a]).map(move |v| {
                        let mut n = k.clone();
                        n.push(v);
                        n
                    })
                })
                .collect();
        }
        out
    }

    /// The box of half-width `eps` about `z` lies in the inner cover.
    pub fn in_inner_shrunk(&self, z: &[f64], eps: f64) -> bool {
        self.cells_meeting(z, eps)
            .iter()
            .all(|k| self.inner.contains(k))
    }

    /// The box of half-width `eps` about `z` meets the outer cover.
    pub fn in_outer_grown(&self, z: &[f64], eps: f64) -> bool {
        self.cells_meeting(z, eps)
            .iter()
            .any(|k| self.outer.contains(k))
    }

    /// Inner and outer covers as boxes `(lo, hi)`.
    pub fn cover_boxes(&self) -> (Vec<(Vec<f64>, Vec<f64>)>, Vec<(Vec<f64>, Vec<f64>)>) {
        let to_box = |k: &Vec<i64>| {
            let lo: Vec<f64> = k
                .iter()
                .zip(&self.origin)
                .map(|(&i, o)| o + i as f64 * self.cell)
                .collect();
            let hi: Vec<f64> = lo.iter().map(|x| x + self.cell).collect();
            (lo, hi)
        };
        (
            self.inner.iter().map(to_box).collect(),
            self.outer.iter().map(to_box).collect(),
        )
    }
}

/// Cloud ψ(Λ_i − anchor) on the complete part of the patch, covered at the resolution
/// (between diam/16 and diam/1024) with the smallest outer minus inner volume; coarser when no
/// inner cell exists.
pub fn estimate_window(
    star: &StarMap,
    patch: &Patch,
    anchor: &Point,
    colour: usize,
) -> Result<WindowEstimate, CpsError> {
    let source_radius = patch.complete_radius();
    let bound = radius_rational(source_radius);
    let points: Vec<Vec<f64>> = patch
        .tiles()
        .iter()
        .filter(|t| t.colour == colour && within_radius(&t.position, &bound))
        .map(|t| star.apply(&(&t.position[0] - &anchor[0])))
        .collect();
    if points.is_empty() {
        return Err(CpsError::EmptyColour(colour.to_string()));
    }
    let dim = points[0].len();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for z in &points {
        for a in 0..dim {
            lo[a] = lo[a].min(z[a]);
            hi[a] = hi[a].max(z[a]);
        }
    }
    let diam = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
    let diam = if diam > 0.0 { diam } else { 1.0 };
    let origin = lo.clone();
    let cell_volume = |c: f64| c.powi(dim as i32);
    let gap = |cv: &Covers, c: f64| (cv.2.len() - cv.1.len()) as f64 * cell_volume(c);
    let mut cell = diam / WINDOW_CELLS_COARSE;
    let mut current = covers(&points, &origin, cell);
    if current.1.is_empty() {
        while current.1.is_empty() && cell < diam {
            cell *= 2.0;
            current = covers(&points, &origin, cell);
        }
    } else {
        let mut c = cell;
        while c / 2.0 >= diam / WINDOW_CELLS_FINE {
            c /= 2.0;
            let finer = covers(&points, &origin, c);
            if finer.1.is_empty() {
                break;
            }
            if gap(&finer, c) < gap(&current, cell) {
                cell = c;
                current = finer;
            }
        }
    }
    let (occupied, inner, outer) = current;
    Ok(WindowEstimate {
        colour,
        source_radius,
        points,
        bbox: (lo, hi),
        cell,
        origin,
        occupied,
        inner,
        outer,
    })
}

pub fn estimate_windows(
    star: &StarMap,
    patch: &Patch,
    anchor: &Point,
    exec: Execution,
) -> Vec<Result<WindowEstimate, CpsError>> {
    let colours: Vec<usize> = (0..patch.colour_count()).collect();
    par::map(exec, &colours, |&c| estimate_window(star, patch, anchor, c))
}
