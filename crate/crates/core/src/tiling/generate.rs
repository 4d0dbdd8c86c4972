//! Patch generation by iterating the substitution from a seed tile with outside pruning.

use super::{Patch, SeedCertificate, Tile, TilingError};
use crate::par::{self, Execution};
use crate::ring::Point;
use crate::system::{SubstitutionSpec, TileGeometry};

pub const DEFAULT_MAX_TILES: usize = 1_000_000;

/// Tile budget from `TESSELLA_MAX_TILES`, or the default.
pub fn max_tiles_budget() -> usize {
    std::env::var("TESSELLA_MAX_TILES")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&v: &usize| v > 0)
        .unwrap_or(DEFAULT_MAX_TILES)
}

/// One application of the tile substitution: x + T_j ↦ {Qx + a + T_i : a ∈ D_ij}.
pub fn substitute_tiles(spec: &SubstitutionSpec, tiles: &[Tile], exec: Execution) -> Vec<Tile> {
    let m = spec.colour_count();
    par::flat_map(exec, tiles, |t| {
        let qx = spec.apply_q(&t.position);
        let mut out = Vec::new();
        for i in 0..m {
            for a in &spec.digits[i][t.colour] {
                let p: Point = qx.iter().zip(a).map(|(u, v)| u + v).collect();
                out.push(Tile::new(i, p));
            }
        }
        out
    })
}

pub fn generate_patch(
    spec: &SubstitutionSpec,
    geometry: &TileGeometry,
    seed: &SeedCertificate,
    radius: f64,
) -> Result<Patch, TilingError> {
    generate_patch_with(
        spec,
        geometry,
        seed,
        radius,
        max_tiles_budget(),
        Execution::default(),
    )
}

/// Iterates Φ from the seed tile for K generations, K the smallest multiple of N with
/// r0·q_min^K > radius. Tiles whose descendants cannot reach the target box are dropped early.
pub fn generate_patch_with(
    spec: &SubstitutionSpec,
    geometry: &TileGeometry,
    seed: &SeedCertificate,
    radius: f64,
    max_tiles: usize,
    exec: Execution,
) -> Result<Patch, TilingError> {
    let d = spec.dimension;
    let q: Vec<f64> = spec.q_diagonal().iter().map(|v| v.to_f64().abs()).collect();
    let qmin = q.iter().cloned().fold(f64::INFINITY, f64::min);
    let r0 = geometry.supports[seed.colour]
        .translate(&seed.fixed_point)
        .inner_radius_at_origin()
        .ok_or(TilingError::NotCovered {
            needed: radius,
            available: 0.0,
        })?;
    let n = seed.iterate.max(1);
    let mut k = 0u32;
    while r0 * qmin.powi(k as i32) <= radius {
        k += n;
        if k > 10_000 {
            return Err(TilingError::NotCovered {
                needed: radius,
                available: r0 * qmin.powi(k as i32),
            });
        }
    }
    let delta = 1e-7 * (radius + 1.0);
    let target = radius + delta;
    let keep = |tiles: Vec<Tile>, remaining: u32| -> Vec<Tile> {
        let half: Vec<f64> = q
            .iter()
            .map(|qa| target / qa.powi(remaining as i32))
            .collect();
        tiles
            .into_iter()
            .filter(|t| {
                let (lo, hi) = &geometry.bboxes[t.colour];
                (0..d).all(|a| {
                    let x = t.position[a].to_f64();
                    x + lo[a] <= half[a] + 1e-9 && x + hi[a] >= -half[a] - 1e-9
                })
            })
            .collect()
    };
    let mut tiles = vec![Tile::new(seed.colour, seed.fixed_point.clone())];
    for step in 0..k {
        tiles = keep(tiles, k - step);
        tiles = substitute_tiles(spec, &tiles, exec);
        if tiles.len() > max_tiles {
            return Err(TilingError::Budget {
                tiles: tiles.len(),
                limit: max_tiles,
            });
        }
    }
    tiles = keep(tiles, 0);
    let mut patch = Patch::from_tiles(tiles, geometry, radius);
    patch.generations = k;
    patch.seed = Some(seed.clone());
    Ok(patch)
}

/// The level-`generations` supertile of the seed, unpruned. Its radius is the inner radius of
/// the inflated seed support.
pub fn generate_generations(
    spec: &SubstitutionSpec,
    geometry: &TileGeometry,
    seed: &SeedCertificate,
    generations: u32,
    max_tiles: usize,
    exec: Execution,
) -> Result<Patch, TilingError> {
    let qmin = spec
        .q_diagonal()
        .iter()
        .map(|v| v.to_f64().abs())
        .fold(f64::INFINITY, f64::min);
    let r0 = geometry.supports[seed.colour]
        .translate(&seed.fixed_point)
        .inner_radius_at_origin()
        .ok_or(TilingError::NotCovered {
            needed: 0.0,
            available: 0.0,
        })?;
    let mut tiles = vec![Tile::new(seed.colour, seed.fixed_point.clone())];
    for _ in 0..generations {
        tiles = substitute_tiles(spec, &tiles, exec);
        if tiles.len() > max_tiles {
            return Err(TilingError::Budget {
                tiles: tiles.len(),
                limit: max_tiles,
            });
        }
    }
    let mut patch = Patch::from_tiles(tiles, geometry, r0 * qmin.powi(generations as i32));
    patch.generations = generations;
    patch.seed = Some(seed.clone());
    Ok(patch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{solve_adjoint, word_to_spec};
    use crate::tiling::find_seed;

    fn patch(words: &[&str], radius: f64, exec: Execution) -> (SubstitutionSpec, Patch) {
        let spec = word_to_spec(words).unwrap();
        let g = solve_adjoint(&spec).unwrap();
        let s = find_seed(&spec, &g, 8).unwrap();
        let p = generate_patch_with(&spec, &g, &s, radius, 100_000, exec).unwrap();
        (spec, p)
    }

    #[test]
    fn fibonacci_patch_is_a_fibonacci_word() {
        let (spec, p) = patch(&["ab", "a"], 60.0, Execution::Parallel);
        assert!(p.overlapping_pair().is_none());
        let word: String = p
            .tiles()
            .iter()
            .map(|t| spec.colours[t.colour].as_str())
            .collect();
        assert!(!word.contains("bb") && !word.contains("aaa"));
        // Consecutive tiles abut exactly.
        let g = solve_adjoint(&spec).unwrap();
        let lengths = g.lengths.unwrap();
        for w in p.tiles().windows(2) {
            assert_eq!(&w[0].position[0] + &lengths[w[0].colour], w[1].position[0]);
        }
        let first = p.tiles().first().unwrap().position_f64()[0];
        let last = p.tiles().last().unwrap();
        assert!(first <= -60.0);
        assert!(last.position_f64()[0] + lengths[last.colour].to_f64() >= 60.0);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let (_, a) = patch(&["ab", "ac", "a"], 40.0, Execution::Parallel);
        let (_, b) = patch(&["ab", "ac", "a"], 40.0, Execution::Sequential);
        assert_eq!(a.tiles(), b.tiles());
    }

    #[test]
    fn budget_is_enforced() {
        let spec = word_to_spec(&["aa"]).unwrap();
        let g = solve_adjoint(&spec).unwrap();
        let s = find_seed(&spec, &g, 8).unwrap();
        let err =
            generate_patch_with(&spec, &g, &s, 1000.0, 50, Execution::Sequential).unwrap_err();
        assert!(matches!(err, TilingError::Budget { limit: 50, .. }));
    }
}
