//! Point-set data read off a patch: Ξ, legality, Meyer/FLC evidence and periods.

use std::collections::HashSet;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{radius_rational, sup_norm_f64, within_radius, DiffKey, Patch, Tile, TilingError};
use crate::par::{self, Execution};
use crate::ring::matrix::lattice_basis;
use crate::ring::{Point, RingElement};
use crate::system::SubstitutionSpec;

/// Φ^n applied to the single point 0 of colour `colour`.
pub fn supertile_points(
    spec: &SubstitutionSpec,
    colour: usize,
    n: u32,
    budget: usize,
) -> Result<Vec<(usize, Point)>, TilingError> {
    let m = spec.colour_count();
    let mut level = vec![(colour, spec.origin())];
    for _ in 0..n {
        let mut next = Vec::new();
        for (j, x) in &level {
            let qx = spec.apply_q(x);
            for i in 0..m {
                for a in &spec.digits[i][*j] {
                    next.push((i, qx.iter().zip(a).map(|(u, v)| u + v).collect()));
                }
            }
            if next.len() > budget {
                return Err(TilingError::Budget {
                    tiles: next.len(),
                    limit: budget,
                });
            }
        }
        level = next;
    }
    Ok(level)
}

fn diff(a: &[RingElement], b: &[RingElement]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

const XI_CHUNK: usize = 4096;

/// Ξ(patch) ∩ B_r: differences of same-colour positions with sup-norm at most `r`.
pub fn xi_within(patch: &Patch, r: f64, exec: Execution) -> Vec<Point> {
    xi_within_ball(patch, r, None, exec)
}

/// Ξ ∩ B_r computed from the tiles whose positions lie in B_ball (all tiles when `None`).
pub fn xi_within_ball(patch: &Patch, r: f64, ball: Option<f64>, exec: Execution) -> Vec<Point> {
    let Some(first) = patch.tiles().first() else {
        return Vec::new();
    };
    let ball = ball.map(radius_rational);
    let ring = first.position[0].ring().clone();
    let bound = radius_rational(r);
    let tiles = patch.tiles();
    let ints = patch.integer_positions();
    let mut by_colour: Vec<Vec<usize>> = vec![Vec::new(); patch.colour_count()];
    for (k, t) in tiles.iter().enumerate() {
        if ball.as_ref().is_none_or(|b| within_radius(&t.position, b)) {
            by_colour[t.colour].push(k);
        }
    }
    for list in &mut by_colour {
        list.sort_by(|&a, &b| patch.position_f64(a)[0].total_cmp(&patch.position_f64(b)[0]));
    }
    let starts: Vec<(usize, usize)> = by_colour
        .iter()
        .enumerate()
        .flat_map(|(c, l)| (0..l.len()).map(move |k| (c, k)))
        .collect();
    let slack = 1e-9 * (1.0 + r.abs());
    // Each unordered pair once; the negation is added after deduplication.
    let scan = |&(c, k): &(usize, usize)| -> Vec<DiffKey> {
        let list = &by_colour[c];
        let i0 = list[k];
        let x0 = patch.position_f64(i0);
        let mut out = Vec::new();
        for &i1 in &list[k..] {
            let x1 = patch.position_f64(i1);
            if x1[0] - x0[0] > r + slack {
                break;
            }
            let gap = x1
                .iter()
                .zip(x0)
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
            if gap > r + slack {
                continue;
            }
            if gap >= r - slack
                && !within_radius(&diff(&tiles[i1].position, &tiles[i0].position), &bound)
            {
                continue;
            }
            out.push(match ints {
                Some(ints) => ints.diff_key(i1, i0),
                None => DiffKey::Wide(vec![i0 as i128, i1 as i128]),
            });
        }
        out
    };
    let mut keys: HashSet<DiffKey> = HashSet::new();
    for chunk in starts.chunks(XI_CHUNK) {
        keys.extend(par::flat_map(exec, chunk, scan));
    }
    let points: HashSet<Point> = match ints {
        Some(ints) => keys
            .iter()
            .flat_map(|k| {
                [
                    ints.to_point(k, &ring),
                    ints.to_point(&ints.negate(k), &ring),
                ]
            })
            .collect(),
        None => keys
            .iter()
            .flat_map(|k| {
                let DiffKey::Wide(pair) = k else {
                    unreachable!()
                };
                let v = diff(
                    &tiles[pair[1] as usize].position,
                    &tiles[pair[0] as usize].position,
                );
                let neg: Point = v.iter().map(|x| -x).collect();
                [v, neg]
            })
            .collect(),
    };
    let mut set: Vec<Point> = points.into_iter().collect();
    set.sort();
    set
}

/// The full difference set Ξ(patch).
pub fn compute_xi(patch: &Patch, exec: Execution) -> Vec<Point> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for t in patch.tiles() {
        for x in t.position_f64() {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if patch.is_empty() {
        return Vec::new();
    }
    xi_within(patch, (hi - lo) + 1.0, exec)
}

/// Outcome of the legality search.
#[derive(Clone, Debug, PartialEq)]
pub enum Legality {
    /// `shift + cluster ⊂ Φ^level(0_colour)`.
    Legal {
        level: u32,
        colour: usize,
        shift: Point,
    },
    /// Nothing found up to `k_max`.
    Unknown { k_max: u32 },
}

const LEGALITY_POINT_BUDGET: usize = 2_000_000;

/// Breadth-first search over k ≤ `k_max` and colours for a supertile containing a translate
/// of `cluster`.
pub fn check_legal(spec: &SubstitutionSpec, cluster: &[Tile], k_max: u32) -> Legality {
    let Some(anchor) = cluster.first() else {
        return Legality::Legal {
            level: 0,
            colour: 0,
            shift: spec.origin(),
        };
    };
    let m = spec.colour_count();
    let mut levels: Vec<Vec<(usize, Point)>> = (0..m).map(|i| vec![(i, spec.origin())]).collect();
    for k in 0..=k_max {
        for (i, points) in levels.iter().enumerate() {
            let set: HashSet<(usize, &Point)> = points.iter().map(|(c, p)| (*c, p)).collect();
            let mut anchors: Vec<&Point> = points
                .iter()
                .filter(|(c, _)| *c == anchor.colour)
                .map(|(_, p)| p)
                .collect();
            anchors.sort();
            for p in anchors {
                let shift = diff(p, &anchor.position);
                let ok = cluster.iter().all(|t| {
                    let moved: Point = t.position.iter().zip(&shift).map(|(a, b)| a + b).collect();
                    set.contains(&(t.colour, &moved))
                });
                if ok {
                    return Legality::Legal {
                        level: k,
                        colour: i,
                        shift,
                    };
                }
            }
        }
        if k == k_max {
            break;
        }
        let mut next = Vec::with_capacity(m);
        for points in &levels {
            let mut out = Vec::new();
            for (j, x) in points {
                let qx = spec.apply_q(x);
                for c in 0..m {
                    for a in &spec.digits[c][*j] {
                        out.push((c, qx.iter().zip(a).map(|(u, v)| u + v).collect()));
                    }
                }
            }
            next.push(out);
        }
        if next.iter().map(Vec::len).sum::<usize>() > LEGALITY_POINT_BUDGET {
            return Legality::Unknown { k_max: k };
        }
        levels = next;
    }
    Legality::Unknown { k_max }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlcCount {
    pub radius: f64,
    pub centres: usize,
    pub classes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeyerReport {
    pub radius: f64,
    /// Minimal nonzero sup-norm of (Ξ ∩ B_R) − (Ξ ∩ B_R); `None` when there are no distinct pairs.
    pub min_gap: Option<f64>,
    pub min_gap_exact: Option<String>,
    pub xi_points: usize,
    pub flc: Vec<FlcCount>,
}

/// Finite-radius Meyer evidence plus FLC cluster counts for each radius in `flc_radii`.
pub fn meyer_certificate(
    patch: &Patch,
    radius: f64,
    flc_radii: &[f64],
    exec: Execution,
) -> MeyerReport {
    let xi = xi_within(patch, radius, exec);
    let floats: Vec<Vec<f64>> = xi
        .iter()
        .map(|p| p.iter().map(|x| x.to_f64()).collect())
        .collect();
    let indices: Vec<usize> = (0..xi.len()).collect();
    let gaps = par::map(exec, &indices, |&a| {
        let mut best: Option<(f64, usize)> = None;
        for b in 0..xi.len() {
            if b == a {
                continue;
            }
            let v: Vec<f64> = floats[b]
                .iter()
                .zip(&floats[a])
                .map(|(x, y)| x - y)
                .collect();
            let n = sup_norm_f64(&v);
            if best.is_none_or(|(m, _)| n < m) {
                best = Some((n, b));
            }
        }
        best.map(|(n, b)| (n, a, b))
    });
    let best = gaps
        .into_iter()
        .flatten()
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .map(|(n, a, b)| (n, diff(&xi[b], &xi[a])));
    let flc = flc_radii
        .iter()
        .map(|&r| flc_count(patch, radius, r))
        .collect();
    MeyerReport {
        radius,
        min_gap: best.as_ref().map(|b| b.0),
        min_gap_exact: best.map(|(_, v)| crate::system::adjoint_show(&v)),
        xi_points: xi.len(),
        flc,
    }
}

fn flc_count(patch: &Patch, radius: f64, r: f64) -> FlcCount {
    let inner = radius_rational(radius - r);
    let bound = radius_rational(r);
    let mut classes: HashSet<Vec<(usize, Point)>> = HashSet::new();
    let mut centres = 0;
    for t in patch.tiles() {
        if radius < r || !within_radius(&t.position, &inner) {
            continue;
        }
        centres += 1;
        let p = t.position_f64();
        let lo: Vec<f64> = p.iter().map(|x| x - r).collect();
        let hi: Vec<f64> = p.iter().map(|x| x + r).collect();
        let mut cluster: Vec<(usize, Point)> = patch
            .tiles_near(&lo, &hi)
            .into_iter()
            .map(|k| &patch.tiles()[k])
            .map(|s| (s.colour, diff(&s.position, &t.position)))
            .filter(|(_, v)| within_radius(v, &bound))
            .collect();
        cluster.sort();
        classes.insert(cluster);
    }
    FlcCount {
        radius: r,
        centres,
        classes: classes.len(),
    }
}

/// Translations preserving every colour class on the inner part of the patch.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodLattice {
    pub search_radius: f64,
    pub checked_radius: f64,
    /// Z-basis of the detected periods (empty: non-periodic at this radius).
    pub generators: Vec<Point>,
}

impl PeriodLattice {
    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }
}

/// Candidate periods are differences q − p0 to a same-colour tile near the origin, kept when
/// p ± t is a same-colour tile for every tile p in the checked region, a ball of radius at most
/// four times the search radius.
pub fn detect_periods(patch: &Patch, search_radius: f64, exec: Execution) -> PeriodLattice {
    let extent = patch
        .supports()
        .iter()
        .map(|s| {
            let (lo, hi) = s.bbox_f64();
            lo.iter().chain(&hi).fold(0.0f64, |a, x| a.max(x.abs()))
        })
        .fold(0.0, f64::max);
    let checked_radius = (patch.complete_radius() - search_radius - extent)
        .min(4.0 * search_radius)
        .max(0.0);
    let empty = PeriodLattice {
        search_radius,
        checked_radius,
        generators: Vec::new(),
    };
    let Some(p0) = patch
        .tiles()
        .iter()
        .min_by(|a, b| sup_norm_f64(&a.position_f64()).total_cmp(&sup_norm_f64(&b.position_f64())))
    else {
        return empty;
    };
    let bound = radius_rational(search_radius);
    let candidates: Vec<Point> = patch
        .tiles()
        .iter()
        .filter(|t| t.colour == p0.colour)
        .map(|t| diff(&t.position, &p0.position))
        .filter(|v| !v.iter().all(|x| x.is_zero()) && within_radius(v, &bound))
        .collect();
    let inner = radius_rational(checked_radius);
    let region: Vec<usize> = (0..patch.len())
        .filter(|&k| within_radius(&patch.tiles()[k].position, &inner))
        .collect();
    let periods: Vec<Point> = match patch.integer_positions() {
        Some(ints) => {
            let occupied: HashSet<(usize, &[i128])> = patch
                .tiles()
                .iter()
                .zip(&ints.rows)
                .map(|(t, row)| (t.colour, row.as_slice()))
                .collect();
            par::map(exec, &candidates, |v| {
                let Some(shift) = ints.row(v) else {
                    return None;
                };
                let mut buf = vec![0i128; shift.len()];
                let ok = region.iter().all(|&k| {
                    let (colour, row) = (patch.tiles()[k].colour, &ints.rows[k]);
                    [1i128, -1].iter().all(|&sign| {
                        for (b, (x, d)) in buf.iter_mut().zip(row.iter().zip(&shift)) {
                            *b = x + sign * d;
                        }
                        occupied.contains(&(colour, buf.as_slice()))
                    })
                });
                ok.then(|| v.clone())
            })
        }
        None => par::map(exec, &candidates, |v| {
            let ok = region.iter().all(|&k| {
                let t = &patch.tiles()[k];
                let plus: Point = t.position.iter().zip(v).map(|(a, b)| a + b).collect();
                let minus: Point = t.position.iter().zip(v).map(|(a, b)| a - b).collect();
                patch.contains(t.colour, &plus) && patch.contains(t.colour, &minus)
            });
            ok.then(|| v.clone())
        }),
    }
    .into_iter()
    .flatten()
    .collect();
    if periods.is_empty() || region.is_empty() {
        return empty;
    }
    let ring = periods[0][0].ring().clone();
    let deg = ring.degree();
    let flat: Vec<Vec<BigRational>> = periods
        .iter()
        .map(|p| p.iter().flat_map(|x| x.coords().iter().cloned()).collect())
        .collect();
    let generators = lattice_basis(&flat)
        .into_iter()
        .map(|row| row.chunks(deg).map(|c| ring.element(c.to_vec())).collect())
        .collect();
    PeriodLattice {
        search_radius,
        checked_radius,
        generators,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{solve_adjoint, word_to_spec};
    use crate::tiling::{find_seed, generate_patch_with};

    fn patch(words: &[&str], radius: f64) -> (SubstitutionSpec, Patch) {
        let spec = word_to_spec(words).unwrap();
        let g = solve_adjoint(&spec).unwrap();
        let s = find_seed(&spec, &g, 8).unwrap();
        let p =
            generate_patch_with(&spec, &g, &s, radius, 1_000_000, Execution::default()).unwrap();
        (spec, p)
    }

    #[test]
    fn xi_is_symmetric_and_monotone() {
        let (_, small) = patch(&["ab", "a"], 20.0);
        let (_, big) = patch(&["ab", "a"], 40.0);
        let xs = compute_xi(&small, Execution::default());
        let set: HashSet<Point> = xs.iter().cloned().collect();
        for v in &xs {
            assert!(set.contains(&v.iter().map(|x| -x).collect::<Point>()));
        }
        let xb: HashSet<Point> = compute_xi(&big, Execution::default()).into_iter().collect();
        assert!(set.is_subset(&xb));
    }

    #[test]
    fn doubling_periods_and_gap() {
        let (spec, p) = patch(&["aa"], 30.0);
        let periods = detect_periods(&p, 5.0, Execution::default());
        assert_eq!(periods.generators, vec![vec![spec.ring.one()]]);
        let meyer = meyer_certificate(&p, 10.0, &[2.0], Execution::default());
        assert_eq!(meyer.min_gap, Some(1.0));
        assert_eq!(meyer.flc[0].classes, 1);
    }

    #[test]
    fn fibonacci_is_not_periodic() {
        let (_, p) = patch(&["ab", "a"], 60.0);
        assert!(detect_periods(&p, 20.0, Execution::default()).is_empty());
    }

    #[test]
    fn legality() {
        let spec = word_to_spec(&["ab", "a"]).unwrap();
        let l = spec.ring.generator().unwrap();
        let single = [Tile::new(0, spec.origin())];
        assert!(matches!(
            check_legal(&spec, &single, 3),
            Legality::Legal {
                level: 0,
                colour: 0,
                ..
            }
        ));
        let ab = [Tile::new(0, spec.origin()), Tile::new(1, vec![l.clone()])];
        assert!(matches!(
            check_legal(&spec, &ab, 3),
            Legality::Legal {
                level: 1,
                colour: 0,
                ..
            }
        ));
        let bad = [
            Tile::new(0, spec.origin()),
            Tile::new(1, vec![spec.ring.from_int(2)]),
        ];
        assert_eq!(check_legal(&spec, &bad, 6), Legality::Unknown { k_max: 6 });
    }
}
