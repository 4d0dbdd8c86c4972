//! Self-reproducing seed tiles: a tile y + T_j with supp(y + T_j) ⊂ int(Q^N supp(y + T_j)),
//! where y is the fixed point of x ↦ Q^N x + e for some e ∈ (D^N)_jj.

use super::inspect::supertile_points;
use super::TilingError;
use crate::geometry::Support;
use crate::ring::{Point, RingElement};
use crate::system::{SubstitutionSpec, TileGeometry};

/// Point budget for supertile enumeration during the seed search.
const SEED_POINT_BUDGET: usize = 400_000;

#[derive(Clone, Debug, PartialEq)]
pub struct SeedCertificate {
    pub colour: usize,
    /// N: the seed is a fixed point of the N-fold substitution.
    pub iterate: u32,
    /// e ∈ (D^N)_jj.
    pub offset: Point,
    /// y = (I − Q^N)⁻¹ e.
    pub fixed_point: Point,
    /// The strict inclusions that were checked, rendered exactly.
    pub containment: Vec<String>,
}

fn render(p: &[RingElement]) -> String {
    crate::system::adjoint_show(p)
}

/// Smallest N ≤ `n_max` (then smallest colour, then smallest offset) giving a seed.
pub fn find_seed(
    spec: &SubstitutionSpec,
    geometry: &TileGeometry,
    n_max: u32,
) -> Result<SeedCertificate, TilingError> {
    let m = spec.colour_count();
    let q = spec.q_diagonal();
    let mut attempted = Vec::new();
    for n in 1..=n_max {
        let qn: Vec<RingElement> = q.iter().map(|v| v.pow(n)).collect();
        for j in 0..m {
            attempted.push((spec.colours[j].clone(), n));
            let Ok(points) = supertile_points(spec, j, n, SEED_POINT_BUDGET) else {
                return Err(TilingError::NoSeed { attempted });
            };
            let outer = geometry.supports[j].scale(&qn);
            let (olo, ohi) = outer.bbox_f64();
            let (blo, bhi) = &geometry.bboxes[j];
            let mut candidates: Vec<&Point> = points
                .iter()
                .filter(|(c, p)| {
                    *c == j
                        && p.iter().enumerate().all(|(a, x)| {
                            let xf = x.to_f64();
                            xf + blo[a] >= olo[a] - 1e-9 && xf + bhi[a] <= ohi[a] + 1e-9
                        })
                })
                .map(|(_, p)| p)
                .collect();
            candidates.sort();
            for e in candidates {
                let inner: Support = geometry.supports[j].translate(e);
                if !inner.strictly_inside(&outer) {
                    continue;
                }
                let y = spec.expansion.pow(n).fixed_point(e)?;
                let containment = if spec.dimension == 1 {
                    let len = &geometry.volumes[j];
                    let top = &qn[0] * len;
                    vec![
                        format!("0 < {}", e[0]),
                        format!("{} < {}", &e[0] + len, top),
                    ]
                } else {
                    vec![format!(
                        "{} + A_{} lies in the interior of Q^{} A_{}",
                        render(e),
                        spec.colours[j],
                        n,
                        spec.colours[j]
                    )]
                };
                return Ok(SeedCertificate {
                    colour: j,
                    iterate: n,
                    offset: e.clone(),
                    fixed_point: y,
                    containment,
                });
            }
        }
    }
    Err(TilingError::NoSeed { attempted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rational;
    use crate::system::{solve_adjoint, word_to_spec};

    fn seed(words: &[&str]) -> (SubstitutionSpec, SeedCertificate) {
        let spec = word_to_spec(words).unwrap();
        let g = solve_adjoint(&spec).unwrap();
        let s = find_seed(&spec, &g, 8).unwrap();
        (spec, s)
    }

    #[test]
    fn fibonacci_seed() {
        let (spec, s) = seed(&["ab", "a"]);
        assert_eq!((s.colour, s.iterate), (0, 3));
        let l = spec.ring.generator().unwrap();
        assert_eq!(s.offset, vec![&l + &spec.ring.one()]);
        assert_eq!(s.fixed_point, vec![l.scale(&rational(-1, 2))]);
    }

    #[test]
    fn constant_length_seeds() {
        let (spec, s) = seed(&["aa"]);
        assert_eq!(s.iterate, 2);
        assert_eq!(
            s.fixed_point,
            vec![spec.ring.from_rational(rational(-1, 3))]
        );
        let (spec, s) = seed(&["ab", "aa"]);
        assert_eq!((s.colour, s.iterate), (0, 2));
        assert_eq!(
            s.fixed_point,
            vec![spec.ring.from_rational(rational(-2, 3))]
        );
        let (spec, s) = seed(&["ab", "ba"]);
        assert_eq!(s.iterate, 3);
        assert_eq!(s.offset, vec![spec.ring.from_int(3)]);
    }

    #[test]
    fn no_seed_with_small_budget() {
        let spec = word_to_spec(&["ab", "a"]).unwrap();
        let g = solve_adjoint(&spec).unwrap();
        assert!(matches!(
            find_seed(&spec, &g, 1),
            Err(TilingError::NoSeed { .. })
        ));
    }
}
