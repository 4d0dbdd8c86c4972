//! Test-side oracles shared by the integration tests. Nothing here calls the library's own
//! overlap, Ξ or intersection code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use rand::Rng;
use tessella_core::geometry::{Cuboid, Support};
use tessella_core::ring::{Point, RingElement};
use tessella_core::system::{solve_adjoint, SubstitutionSpec, TileGeometry};
use tessella_core::tiling::{find_seed, generate_patch_with, Patch};
use tessella_core::Execution;

pub type Class = (usize, usize, Point);

pub struct Setup {
    pub spec: SubstitutionSpec,
    pub geometry: TileGeometry,
    pub patch: Patch,
}

pub fn setup(spec: SubstitutionSpec, radius: f64) -> Setup {
    let geometry = solve_adjoint(&spec).expect("valid geometry");
    let seed = find_seed(&spec, &geometry, 8).expect("seed");
    let patch = generate_patch_with(
        &spec,
        &geometry,
        &seed,
        radius,
        2_000_000,
        Execution::default(),
    )
    .expect("patch");
    Setup {
        spec,
        geometry,
        patch,
    }
}

pub fn add(a: &[RingElement], b: &[RingElement]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[RingElement], b: &[RingElement]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn is_zero(p: &[RingElement]) -> bool {
    p.iter().all(|x| x.is_zero())
}

/// Exact sup-norm bound |p|∞ ≤ r.
pub fn within(p: &[RingElement], r: f64) -> bool {
    let Some(first) = p.first() else { return true };
    let bound = first
        .ring()
        .from_rational(BigRational::from_float(r).expect("finite radius"));
    p.iter().all(|x| x.abs() <= bound)
}

pub fn floats(p: &[RingElement]) -> Vec<f64> {
    p.iter().map(|x| x.to_f64()).collect()
}

/// Volume of the intersection of two closed boxes, exact.
pub fn box_overlap(a: &Cuboid, shift: &[RingElement], b: &Cuboid) -> Option<RingElement> {
    let ring = a.lo[0].ring().clone();
    let mut vol = ring.one();
    for k in 0..a.lo.len() {
        let lo = RingElement::max_of(&(&a.lo[k] + &shift[k]), &b.lo[k]);
        let hi = RingElement::min_of(&(&a.hi[k] + &shift[k]), &b.hi[k]);
        if hi <= lo {
            return None;
        }
        vol = vol * (hi - lo);
    }
    Some(vol)
}

/// (shift + A_i)° ∩ A_j° ≠ ∅ for box unions.
pub fn interiors_meet(geometry: &TileGeometry, i: usize, shift: &[RingElement], j: usize) -> bool {
    geometry.supports[i].boxes.iter().any(|a| {
        geometry.supports[j]
            .boxes
            .iter()
            .any(|b| box_overlap(a, shift, b).is_some())
    })
}

/// Vol((shift + a) ∩ b) for box unions whose boxes are interior-disjoint.
pub fn support_overlap(a: &Support, shift: &[RingElement], b: &Support) -> RingElement {
    let ring = a.boxes[0].lo[0].ring().clone();
    let mut total = ring.zero();
    for x in &a.boxes {
        for y in &b.boxes {
            if let Some(v) = box_overlap(x, shift, y) {
                total = total + v;
            }
        }
    }
    total
}

/// Vol((shift + A_i) ∩ A_j).
pub fn overlap_volume(
    geometry: &TileGeometry,
    i: usize,
    shift: &[RingElement],
    j: usize,
) -> RingElement {
    support_overlap(&geometry.supports[i], shift, &geometry.supports[j])
}

/// Same-colour differences of norm ≤ r, by a sweep over tiles sorted on the first coordinate.
pub fn brute_xi(patch: &Patch, r: f64) -> BTreeSet<Point> {
    let m = patch.colour_count();
    let mut out = BTreeSet::new();
    for c in 0..m {
        let mut tiles: Vec<(f64, &Point)> = patch
            .tiles()
            .iter()
            .filter(|t| t.colour == c)
            .map(|t| (t.position[0].to_f64(), &t.position))
            .collect();
        tiles.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (k, (x, p)) in tiles.iter().enumerate() {
            for (y, q) in &tiles[k..] {
                if *y > x + r + 1e-6 {
                    break;
                }
                let d = sub(q, p);
                if within(&d, r) {
                    out.insert(d.iter().map(|v| -v).collect());
                    out.insert(d);
                }
            }
        }
    }
    out
}

fn reach(geometry: &TileGeometry) -> f64 {
    geometry
        .supports
        .iter()
        .flat_map(|s| s.boxes.iter())
        .flat_map(|b| b.lo.iter().chain(&b.hi))
        .map(|x| x.to_f64().abs())
        .fold(0.0, f64::max)
}

/// Seed classes (i, j, y + p − q): every tile p of norm ≤ r, every y ∈ Ξ ∩ B_r, every tile q.
pub fn oracle_seeds(
    patch: &Patch,
    geometry: &TileGeometry,
    xi: &BTreeSet<Point>,
    r: f64,
) -> BTreeSet<Class> {
    let slack = 2.0 * reach(geometry) + 1e-6;
    let mut sorted: Vec<(Vec<f64>, usize)> = patch
        .tiles()
        .iter()
        .enumerate()
        .map(|(k, t)| (floats(&t.position), k))
        .collect();
    sorted.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]));
    let keys: Vec<f64> = sorted.iter().map(|s| s.0[0]).collect();
    let mut out = BTreeSet::new();
    let anchors: Vec<_> = patch
        .tiles()
        .iter()
        .filter(|t| within(&t.position, r))
        .collect();
    for t in anchors {
        for y in xi {
            let target = add(y, &t.position);
            let tf = floats(&target);
            let start = keys.partition_point(|&x| x < tf[0] - slack);
            for (sf, k) in &sorted[start..] {
                if sf[0] > tf[0] + slack {
                    break;
                }
                if tf.iter().zip(sf).any(|(a, b)| (a - b).abs() > slack) {
                    continue;
                }
                let s = &patch.tiles()[*k];
                let u = sub(&target, &s.position);
                if interiors_meet(geometry, t.colour, &u, s.colour) {
                    out.insert((t.colour, s.colour, u));
                }
            }
        }
    }
    out
}

/// Child overlaps of `(u + T_i, T_j)`: every pair of pieces of the two inflated tiles whose
/// interiors meet, counted with multiplicity.
pub fn oracle_children(
    spec: &SubstitutionSpec,
    geometry: &TileGeometry,
    c: &Class,
) -> BTreeMap<Class, u64> {
    let (i, j, u) = c;
    let qu = spec.apply_q(u);
    let m = spec.colour_count();
    let left: Vec<(usize, Point)> = (0..m)
        .flat_map(|k| spec.digits[k][*i].iter().map(move |a| (k, a.clone())))
        .map(|(k, a)| (k, add(&qu, &a)))
        .collect();
    let right: Vec<(usize, Point)> = (0..m)
        .flat_map(|l| spec.digits[l][*j].iter().map(move |b| (l, b.clone())))
        .collect();
    let mut out = BTreeMap::new();
    for (k, p) in &left {
        for (l, q) in &right {
            let w = sub(p, q);
            if interiors_meet(geometry, *k, &w, *l) {
                *out.entry((*k, *l, w)).or_insert(0) += 1;
            }
        }
    }
    out
}

/// Least closed class set containing `seeds`, with child multiplicities.
pub fn oracle_closure(
    spec: &SubstitutionSpec,
    geometry: &TileGeometry,
    seeds: &BTreeSet<Class>,
    limit: usize,
) -> Option<BTreeMap<Class, BTreeMap<Class, u64>>> {
    let mut graph: BTreeMap<Class, BTreeMap<Class, u64>> = BTreeMap::new();
    let mut stack: Vec<Class> = seeds.iter().cloned().collect();
    let mut known: BTreeSet<Class> = seeds.clone();
    while let Some(c) = stack.pop() {
        let kids = oracle_children(spec, geometry, &c);
        for k in kids.keys() {
            if known.insert(k.clone()) {
                stack.push(k.clone());
            }
        }
        graph.insert(c, kids);
        if known.len() > limit {
            return None;
        }
    }
    Some(graph)
}

pub fn is_coincidence(c: &Class) -> bool {
    c.0 == c.1 && is_zero(&c.2)
}

/// Irreducible with a positive power: some S^k > 0 for k ≤ (m−1)² + 1.
pub fn primitive(words: &[Vec<usize>]) -> bool {
    let m = words.len();
    let mut s = vec![vec![0u64; m]; m];
    for (j, w) in words.iter().enumerate() {
        for &i in w {
            s[i][j] = 1;
        }
    }
    let mut p = s.clone();
    for _ in 0..((m - 1) * (m - 1) + 1) {
        if p.iter().all(|r| r.iter().all(|&x| x > 0)) {
            return true;
        }
        p = (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| (0..m).any(|k| p[a][k] > 0 && s[k][b] > 0) as u64)
                    .collect()
            })
            .collect();
    }
    false
}

pub fn render(words: &[Vec<usize>]) -> Vec<String> {
    words
        .iter()
        .map(|w| w.iter().map(|&x| (b'a' + x as u8) as char).collect())
        .collect()
}

/// Random primitive expanding words over m ≤ `m_max` letters, each of length ≤ `len_max`.
pub fn random_primitive_words(rng: &mut impl Rng, m_max: usize, len_max: usize) -> Vec<Vec<usize>> {
    loop {
        let m = rng.random_range(1..=m_max);
        let words: Vec<Vec<usize>> = (0..m)
            .map(|_| {
                (0..rng.random_range(1..=len_max))
                    .map(|_| rng.random_range(0..m))
                    .collect()
            })
            .collect();
        let expanding = words.iter().map(Vec::len).sum::<usize>() > m;
        if expanding && primitive(&words) {
            return words;
        }
    }
}

/// Random primitive constant-length words, 2 ≤ m ≤ `m_max`, 2 ≤ length ≤ `len_max`.
pub fn random_constant_length(rng: &mut impl Rng, m_max: usize, len_max: usize) -> Vec<Vec<usize>> {
    loop {
        let m = rng.random_range(2..=m_max);
        let len = rng.random_range(2..=len_max);
        let words: Vec<Vec<usize>> = (0..m)
            .map(|_| (0..len).map(|_| rng.random_range(0..m)).collect())
            .collect();
        if primitive(&words) {
            return words;
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Height of a constant-length substitution from a long prefix of a fixed point of σ^p.
pub fn height_oracle(words: &[Vec<usize>]) -> usize {
    let len = words[0].len();
    let mut a = 0;
    let mut seen = vec![false; words.len()];
    while !seen[a] {
        seen[a] = true;
        a = words[a][0];
    }
    let mut u = vec![a];
    while u.len() < 5000 {
        u = u.iter().flat_map(|&x| words[x].clone()).collect();
    }
    let g = (1..u.len()).filter(|&k| u[k] == u[0]).fold(0, gcd);
    (1..=g)
        .rev()
        .find(|&n| g % n == 0 && gcd(n, len) == 1)
        .unwrap_or(1)
}
