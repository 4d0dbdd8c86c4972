//! Defect densities of shifted colour classes and the grid estimate of the patch metric.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{radius_rational, sup_norm_f64, within_radius, Patch, TilingError};
use crate::ring::{Point, RingElement};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectSample {
    /// Half-width s of the window [−s, s]^d.
    pub window: f64,
    pub count: usize,
    pub density: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectEstimate {
    pub shift: String,
    pub samples: Vec<DefectSample>,
}

impl DefectEstimate {
    /// Density on the largest window.
    pub fn estimate(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.density)
    }
}

/// Σ_i #((Λ_i △ (t + Λ_i)) ∩ F) / Vol(F) for the centred cubes F = [−s, s]^d.
pub fn defect_density(
    patch: &Patch,
    shift: &[RingElement],
    windows: &[f64],
) -> Result<DefectEstimate, TilingError> {
    if windows.is_empty() || windows[0] <= 0.0 || windows.windows(2).any(|w| w[1] <= w[0]) {
        return Err(TilingError::InvalidWindows);
    }
    let t_norm = sup_norm_f64(&shift.iter().map(|x| x.to_f64()).collect::<Vec<_>>());
    let largest = *windows.last().expect("nonempty");
    if largest + t_norm > patch.complete_radius() {
        return Err(TilingError::NotCovered {
            needed: largest + t_norm,
            available: patch.complete_radius(),
        });
    }
    let d = patch.dimension() as i32;
    let mut samples = Vec::with_capacity(windows.len());
    for &s in windows {
        let bound = radius_rational(s);
        let mut count = 0usize;
        for tile in patch.tiles() {
            let p = &tile.position;
            if within_radius(p, &bound) {
                let back: Point = p.iter().zip(shift).map(|(a, b)| a - b).collect();
                if !patch.contains(tile.colour, &back) {
                    count += 1;
                }
            }
            let fwd: Point = p.iter().zip(shift).map(|(a, b)| a + b).collect();
            if within_radius(&fwd, &bound) && !patch.contains(tile.colour, &fwd) {
                count += 1;
            }
        }
        samples.push(DefectSample {
            window: s,
            count,
            density: count as f64 / (2.0 * s).powi(d),
        });
    }
    Ok(DefectEstimate {
        shift: crate::system::adjoint_show(shift),
        samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricEstimate {
    /// Upper bound for the distance on the ε-grid.
    pub value: f64,
    /// Ratio between consecutive grid values of ε.
    pub grid_ratio: f64,
    /// Smallest ε the common radius allows.
    pub resolution: f64,
    pub common_radius: f64,
    /// Relative shift δ of the witness pair x = −δ/2, y = δ/2.
    pub shift: Option<String>,
}

const METRIC_CAP: f64 = std::f64::consts::FRAC_1_SQRT_2;
const GRID_RATIO: f64 = 0.9;

fn shifted_in_ball(
    patch: &Patch,
    by: &[RingElement],
    rho: &BigRational,
    rho_f: f64,
) -> Vec<(usize, Point)> {
    let lo: Vec<f64> = by.iter().map(|x| -rho_f - x.to_f64()).collect();
    let hi: Vec<f64> = by.iter().map(|x| rho_f - x.to_f64()).collect();
    let mut out: Vec<(usize, Point)> = patch
        .tiles_near(&lo, &hi)
        .into_iter()
        .map(|k| &patch.tiles()[k])
        .map(|t| {
            (
                t.colour,
                t.position
                    .iter()
                    .zip(by)
                    .map(|(a, b)| a + b)
                    .collect::<Point>(),
            )
        })
        .filter(|(_, p)| within_radius(p, rho))
        .collect();
    out.sort();
    out
}

/// min{d̃, 2^{−1/2}} evaluated on the grid ε_k = 2^{−1/2}·0.9^k, with tiles compared by
/// reference point inside B_{1/ε}.
pub fn patch_metric(p1: &Patch, p2: &Patch) -> Result<MetricEstimate, TilingError> {
    let common = p1.radius.min(p2.radius);
    if p1.is_empty() || p2.is_empty() || common <= 0.0 {
        return Err(TilingError::NotCovered {
            needed: 1.0,
            available: common.max(0.0),
        });
    }
    let resolution = 1.0 / common;
    let ring = p1.tiles()[0].position[0].ring().clone();
    let zero: Point = vec![ring.zero(); p1.dimension()];
    let full = radius_rational(common);
    if shifted_in_ball(p1, &zero, &full, common) == shifted_in_ball(p2, &zero, &full, common) {
        return Ok(MetricEstimate {
            value: 0.0,
            grid_ratio: GRID_RATIO,
            resolution,
            common_radius: common,
            shift: Some(crate::system::adjoint_show(&zero)),
        });
    }
    let near = |p: &Patch| {
        let e = METRIC_CAP;
        let lo = vec![-e; p.dimension()];
        let hi = vec![e; p.dimension()];
        p.tiles_near(&lo, &hi)
            .into_iter()
            .map(|k| p.tiles()[k].clone())
            .collect::<Vec<_>>()
    };
    let mut deltas: Vec<Point> = Vec::new();
    for a in near(p1) {
        for b in near(p2) {
            if a.colour == b.colour {
                deltas.push(
                    b.position
                        .iter()
                        .zip(&a.position)
                        .map(|(x, y)| x - y)
                        .collect(),
                );
            }
        }
    }
    deltas.sort();
    deltas.dedup();
    let half = BigRational::new(1.into(), 2.into());
    let mut best = METRIC_CAP;
    let mut best_shift = None;
    for delta in deltas {
        let x: Point = delta.iter().map(|v| v.scale(&half)).collect();
        let minus_x: Point = x.iter().map(|v| -v).collect();
        let shift_norm = sup_norm_f64(&x.iter().map(|v| v.to_f64()).collect::<Vec<_>>());
        let mut k = 0;
        while best_shift.is_some() && METRIC_CAP * GRID_RATIO.powi(k) >= best {
            k += 1;
        }
        loop {
            let eps = METRIC_CAP * GRID_RATIO.powi(k);
            let rho_f = 1.0 / eps;
            if eps < shift_norm || eps < resolution || rho_f + shift_norm > common {
                break;
            }
            let rho = radius_rational(rho_f);
            if shifted_in_ball(p1, &x, &rho, rho_f) != shifted_in_ball(p2, &minus_x, &rho, rho_f) {
                break;
            }
            best = eps;
            best_shift = Some(crate::system::adjoint_show(&delta));
            k += 1;
        }
    }
    Ok(MetricEstimate {
        value: best,
        grid_ratio: GRID_RATIO,
        resolution,
        common_radius: common,
        shift: best_shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::par::Execution;
    use crate::system::{solve_adjoint, word_to_spec, SubstitutionSpec};
    use crate::tiling::{find_seed, generate_patch_with, Tile};

    fn fib(radius: f64) -> (SubstitutionSpec, Patch) {
        let spec = word_to_spec(&["ab", "a"]).unwrap();
        let g = solve_adjoint(&spec).unwrap();
        let s = find_seed(&spec, &g, 8).unwrap();
        let p =
            generate_patch_with(&spec, &g, &s, radius, 1_000_000, Execution::default()).unwrap();
        (spec, p)
    }

    #[test]
    fn zero_shift_has_no_defects() {
        let (spec, p) = fib(50.0);
        let est = defect_density(&p, &spec.origin(), &[10.0, 20.0, 40.0]).unwrap();
        assert!(est.samples.iter().all(|s| s.count == 0));
        assert!(defect_density(&p, &spec.origin(), &[20.0, 10.0]).is_err());
        assert!(defect_density(&p, &spec.origin(), &[60.0]).is_err());
    }

    #[test]
    fn metric_identical_and_shifted() {
        let (spec, p) = fib(60.0);
        assert_eq!(patch_metric(&p, &p).unwrap().value, 0.0);
        let l = spec.ring.generator().unwrap();
        let s = l.inverse().unwrap().pow(5);
        let g = solve_adjoint(&spec).unwrap();
        let moved: Vec<Tile> = p
            .tiles()
            .iter()
            .map(|t| Tile::new(t.colour, vec![&t.position[0] + &s]))
            .collect();
        let q = Patch::from_tiles(moved, &g, p.radius - s.to_f64());
        let m = patch_metric(&p, &q).unwrap();
        assert!(m.value > 0.0 && m.value <= s.to_f64(), "{m:?}");
    }
}
