//! Tile supports as finite unions of closed axis-aligned boxes with exact coordinates.

use crate::ring::{Point, Ring, RingElement};

/// Closed box `[lo, hi]` with `lo < hi` on every axis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cuboid {
    pub lo: Point,
    pub hi: Point,
}

impl Cuboid {
    pub fn new(lo: Point, hi: Point) -> Self {
        Cuboid { lo, hi }
    }

    pub fn dimension(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> RingElement {
        let ring = self.lo[0].ring().clone();
        self.lo
            .iter()
            .zip(&self.hi)
            .fold(ring.one(), |acc, (l, h)| acc * (h - l))
    }

    pub fn translate(&self, t: &[RingElement]) -> Cuboid {
        Cuboid {
            lo: self.lo.iter().zip(t).map(|(a, b)| a + b).collect(),
            hi: self.hi.iter().zip(t).map(|(a, b)| a + b).collect(),
        }
    }

    /// Image under a diagonal linear map; negative factors swap the bounds.
    pub fn scale(&self, factors: &[RingElement]) -> Cuboid {
        let mut lo = Vec::with_capacity(self.lo.len());
        let mut hi = Vec::with_capacity(self.lo.len());
        for ((l, h), f) in self.lo.iter().zip(&self.hi).zip(factors) {
            let a = f * l;
            let b = f * h;
            if f.is_negative() {
                lo.push(b);
                hi.push(a);
            } else {
                lo.push(a);
                hi.push(b);
            }
        }
        Cuboid { lo, hi }
    }

    /// Intersection when it has nonempty interior.
    pub fn intersect(&self, other: &Cuboid) -> Option<Cuboid> {
        let mut lo = Vec::with_capacity(self.lo.len());
        let mut hi = Vec::with_capacity(self.lo.len());
        for a in 0..self.lo.len() {
            let l = RingElement::max_of(&self.lo[a], &other.lo[a]);
            let h = RingElement::min_of(&self.hi[a], &other.hi[a]);
            if l >= h {
                return None;
            }
            lo.push(l);
            hi.push(h);
        }
        Some(Cuboid { lo, hi })
    }

    pub fn bbox_f64(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.lo.iter().map(|v| v.enclosure().lo).collect(),
            self.hi.iter().map(|v| v.enclosure().hi).collect(),
        )
    }

    pub fn contains_point(&self, p: &[RingElement]) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(p)
            .all(|((l, h), x)| l <= x && x <= h)
    }
}

/// A tile support: a union of boxes with pairwise disjoint interiors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Support {
    pub boxes: Vec<Cuboid>,
}

impl Support {
    pub fn new(boxes: Vec<Cuboid>) -> Self {
        Support { boxes }
    }

    /// The interval `[0, length]`.
    pub fn interval(length: RingElement) -> Self {
        let zero = length.ring().zero();
        Support {
            boxes: vec![Cuboid::new(vec![zero], vec![length])],
        }
    }

    pub fn dimension(&self) -> usize {
        self.boxes.first().map_or(0, |b| b.dimension())
    }

    pub fn ring(&self) -> &Ring {
        self.boxes[0].lo[0].ring()
    }

    pub fn volume(&self) -> RingElement {
        let ring = self.ring().clone();
        self.boxes
            .iter()
            .fold(ring.zero(), |acc, b| acc + b.volume())
    }

    pub fn translate(&self, t: &[RingElement]) -> Support {
        Support {
            boxes: self.boxes.iter().map(|b| b.translate(t)).collect(),
        }
    }

    pub fn scale(&self, factors: &[RingElement]) -> Support {
        Support {
            boxes: self.boxes.iter().map(|b| b.scale(factors)).collect(),
        }
    }

    pub fn bbox_f64(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dimension();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for b in &self.boxes {
            let (l, h) = b.bbox_f64();
            for a in 0..d {
                lo[a] = lo[a].min(l[a]);
                hi[a] = hi[a].max(h[a]);
            }
        }
        (lo, hi)
    }

    /// Volume of `(offset + self) ∩ other`, exact.
    pub fn intersection_volume(&self, offset: &[RingElement], other: &Support) -> RingElement {
        let ring = self.ring().clone();
        let mut acc = ring.zero();
        for a in &self.boxes {
            let moved = a.translate(offset);
            for b in &other.boxes {
                if let Some(c) = moved.intersect(b) {
                    acc = acc + c.volume();
                }
            }
        }
        acc
    }

    /// Whether `(offset + self)` and `other` share interior points.
    pub fn interiors_meet(&self, offset: &[RingElement], other: &Support) -> bool {
        self.boxes.iter().any(|a| {
            let moved = a.translate(offset);
            other.boxes.iter().any(|b| moved.intersect(b).is_some())
        })
    }

    pub fn contains_point(&self, p: &[RingElement]) -> bool {
        self.boxes.iter().any(|b| b.contains_point(p))
    }

    /// `self ⊆ outer` (as closed sets).
    pub fn contained_in(&self, outer: &Support) -> bool {
        let grid = Grid::new(&[self, outer]);
        grid.cells_of(0).into_iter().all(|c| grid.in_support(1, &c))
    }

    /// `self ⊆ interior(outer)`.
    pub fn strictly_inside(&self, outer: &Support) -> bool {
        let grid = Grid::new(&[self, outer]);
        let d = grid.coords.len();
        let offsets = neighbour_offsets(d);
        grid.cells_of(0).into_iter().all(|c| {
            offsets.iter().all(|off| {
                let mut n = Vec::with_capacity(d);
                for a in 0..d {
                    let v = c[a] as isize + off[a];
                    if v < 0 || v as usize >= grid.coords[a].len() - 1 {
                        return false;
                    }
                    n.push(v as usize);
                }
                grid.in_support(1, &n)
            })
        })
    }

    /// Radius r such that the open sup-norm ball of radius r about 0 lies in the support.
    /// None when 0 is not an interior point.
    pub fn inner_radius_at_origin(&self) -> Option<f64> {
        let d = self.dimension();
        let ring = self.ring().clone();
        let origin: Point = vec![ring.zero(); d];
        let tiny = Support::new(vec![Cuboid::new(origin.clone(), origin)]);
        let grid = Grid::new(&[self]);
        // All cells whose closure contains 0 must lie in the support.
        let mut around: Vec<Vec<usize>> = vec![Vec::new()];
        for a in 0..d {
            let coords = &grid.coords[a];
            let zero = &tiny.boxes[0].lo[a];
            if coords[0] >= *zero || coords[coords.len() - 1] <= *zero {
                return None;
            }
            let mut choices = Vec::new();
            for k in 0..coords.len() - 1 {
                if coords[k] <= tiny.boxes[0].lo[a] && tiny.boxes[0].lo[a] <= coords[k + 1] {
                    choices.push(k);
                }
            }
            if choices.is_empty() {
                return None;
            }
            around = around
                .into_iter()
                .flat_map(|p| {
                    choices.iter().map(move |&c| {
                        let mut q = p.clone();
                        q.push(c);
                        q
                    })
                })
                .collect();
        }
        if !around.iter().all(|c| grid.in_support(0, c)) {
            return None;
        }
        let mut r = f64::INFINITY;
        for b in &self.boxes {
            for v in b.lo.iter().chain(&b.hi) {
                if !v.is_zero() {
                    r = r.min(v.enclosure().lo.abs().min(v.enclosure().hi.abs()));
                }
            }
        }
        Some(r)
    }

    /// Coordinate-compressed decomposition into grid cells, each given by its lower corner
    /// and upper corner. Used for exporting and interior tests of pieces.
    pub fn cells(&self) -> Vec<Cuboid> {
        let grid = Grid::new(&[self]);
        grid.cells_of(0)
            .into_iter()
            .map(|c| {
                let lo = c
                    .iter()
                    .enumerate()
                    .map(|(a, &k)| grid.coords[a][k].clone())
                    .collect();
                let hi = c
                    .iter()
                    .enumerate()
                    .map(|(a, &k)| grid.coords[a][k + 1].clone())
                    .collect();
                Cuboid::new(lo, hi)
            })
            .collect()
    }
}

fn neighbour_offsets(d: usize) -> Vec<Vec<isize>> {
    let mut out: Vec<Vec<isize>> = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p| {
                [-1isize, 0, 1].into_iter().map(move |o| {
                    let mut q = p.clone();
                    q.push(o);
                    q
                })
            })
            .collect();
    }
    out
}

/// Axis-wise sorted breakpoints of several supports, with each box stored as index ranges.
/// Cell index k on axis a spans `[coords[a][k], coords[a][k+1]]`.
struct Grid {
    coords: Vec<Vec<RingElement>>,
    ranges: Vec<Vec<Vec<(usize, usize)>>>,
}

impl Grid {
    fn new(supports: &[&Support]) -> Grid {
        let d = supports[0].dimension();
        let mut coords: Vec<Vec<RingElement>> = vec![Vec::new(); d];
        for s in supports {
            for b in &s.boxes {
                for a in 0..d {
                    coords[a].push(b.lo[a].clone());
                    coords[a].push(b.hi[a].clone());
                }
            }
        }
        for c in coords.iter_mut() {
            c.sort();
            c.dedup();
        }
        let ranges = supports
            .iter()
            .map(|s| {
                s.boxes
                    .iter()
                    .map(|b| {
                        (0..d)
                            .map(|a| {
                                let lo = coords[a]
                                    .binary_search(&b.lo[a])
                                    .expect("breakpoint present");
                                let hi = coords[a]
                                    .binary_search(&b.hi[a])
                                    .expect("breakpoint present");
                                (lo, hi)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Grid { coords, ranges }
    }

    fn in_support(&self, which: usize, cell: &[usize]) -> bool {
        self.ranges[which]
            .iter()
            .any(|r| r.iter().zip(cell).all(|(&(lo, hi), &k)| lo <= k && k < hi))
    }

    fn cells_of(&self, which: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for r in &self.ranges[which] {
            let mut cells: Vec<Vec<usize>> = vec![Vec::new()];
            for &(lo, hi) in r {
                cells = cells
                    .into_iter()
                    .flat_map(|p| {
                        (lo..hi).map(move |k| {
                            let mut q = p.clone();
                            q.push(k);
                            q
                        })
                    })
                    .collect();
            }
            out.extend(cells);
        }
        out.sort();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(ring: &Ring, v: &[i64]) -> Point {
        v.iter().map(|&x| ring.from_int(x)).collect()
    }

    fn boxed(ring: &Ring, lo: &[i64], hi: &[i64]) -> Cuboid {
        Cuboid::new(pt(ring, lo), pt(ring, hi))
    }

    #[test]
    fn l_shape_volume_and_intersections() {
        let r = Ring::rational();
        let l = Support::new(vec![
            boxed(&r, &[0, 0], &[2, 1]),
            boxed(&r, &[0, 1], &[1, 2]),
        ]);
        assert_eq!(l.volume(), r.from_int(3));
        let unit = Support::new(vec![boxed(&r, &[0, 0], &[1, 1])]);
        assert!(!unit.interiors_meet(&pt(&r, &[1, 1]), &l));
        assert!(unit.interiors_meet(&pt(&r, &[1, 0]), &l));
        assert_eq!(
            unit.intersection_volume(&pt(&r, &[0, 1]), &l),
            r.from_int(1)
        );
    }

    #[test]
    fn strict_containment() {
        let r = Ring::rational();
        let inner = Support::new(vec![boxed(&r, &[1, 1], &[2, 2])]);
        let outer = Support::new(vec![boxed(&r, &[0, 0], &[3, 3])]);
        assert!(inner.strictly_inside(&outer));
        let touching = Support::new(vec![boxed(&r, &[0, 1], &[1, 2])]);
        assert!(!touching.strictly_inside(&outer));
        assert!(touching.contained_in(&outer));
        // outer split into two boxes still has the shared edge in its interior
        let split = Support::new(vec![
            boxed(&r, &[0, 0], &[3, 1]),
            boxed(&r, &[0, 1], &[3, 3]),
        ]);
        assert!(inner.strictly_inside(&split));
        let moved = Support::new(vec![boxed(&r, &[1, 0], &[2, 2])]);
        assert!(!moved.strictly_inside(&split));
    }

    #[test]
    fn inner_radius() {
        let r = Ring::rational();
        let s = Support::new(vec![boxed(&r, &[-1, -2], &[3, 2])]);
        assert!((s.inner_radius_at_origin().unwrap() - 1.0).abs() < 1e-12);
        let edge = Support::new(vec![boxed(&r, &[0, -2], &[3, 2])]);
        assert_eq!(edge.inner_radius_at_origin(), None);
        let halves = Support::new(vec![
            boxed(&r, &[-1, -1], &[0, 1]),
            boxed(&r, &[0, -1], &[1, 1]),
        ]);
        assert!((halves.inner_radius_at_origin().unwrap() - 1.0).abs() < 1e-12);
    }
}
