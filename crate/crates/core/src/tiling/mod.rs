//! Patches of self-affine fixed-point tilings and the point-set data derived from them.

mod defects;
mod export;
mod generate;
mod inspect;
mod seed;

pub use defects::{defect_density, patch_metric, DefectEstimate, DefectSample, MetricEstimate};
pub use export::{patch_to_csv, patch_to_json, patch_to_svg, xi_to_csv};
pub use generate::{
    generate_generations, generate_patch, generate_patch_with, max_tiles_budget, substitute_tiles,
};
pub use inspect::{
    check_legal, compute_xi, detect_periods, meyer_certificate, supertile_points, xi_within,
    xi_within_ball, FlcCount, Legality, MeyerReport, PeriodLattice,
};
pub use seed::{find_seed, SeedCertificate};

use std::collections::HashMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::geometry::Support;
use crate::ring::{Point, Ring, RingElement, RingError};
use crate::system::TileGeometry;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TilingError {
    #[error("no seed found (tried {attempted:?})")]
    NoSeed { attempted: Vec<(String, u32)> },
    #[error("tile budget exceeded: {tiles} tiles, limit {limit}")]
    Budget { tiles: usize, limit: usize },
    #[error("patch of radius {available} does not cover the required radius {needed}")]
    NotCovered { needed: f64, available: f64 },
    #[error("window sizes must be positive and increasing")]
    InvalidWindows,
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// A placed tile `position + T_colour`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tile {
    pub colour: usize,
    pub position: Point,
}

impl Tile {
    pub fn new(colour: usize, position: Point) -> Self {
        Tile { colour, position }
    }

    pub fn position_f64(&self) -> Vec<f64> {
        self.position.iter().map(|v| v.to_f64()).collect()
    }
}

/// Finite set of tiles from a fixed-point tiling, covering the sup-norm ball of `radius`.
#[derive(Clone, Debug)]
pub struct Patch {
    tiles: Vec<Tile>,
    pub radius: f64,
    pub generations: u32,
    pub seed: Option<SeedCertificate>,
    supports: Vec<Support>,
    bboxes: Vec<(Vec<f64>, Vec<f64>)>,
    members: HashMap<(usize, Point), usize>,
    cell: f64,
    grid: HashMap<Vec<i64>, Vec<usize>>,
    floats: Vec<Vec<f64>>,
    integers: OnceLock<Option<IntegerPositions>>,
    slack: f64,
}

/// Positions scaled by a common denominator into flat integer vectors.
#[derive(Clone, Debug)]
pub(crate) struct IntegerPositions {
    pub den: BigInt,
    pub degree: usize,
    pub rows: Vec<Vec<i128>>,
}

/// Hash key for an exact difference of positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum DiffKey {
    Packed(u128),
    Wide(Vec<i128>),
}

impl IntegerPositions {
    fn new(tiles: &[Tile]) -> Option<Self> {
        let first = tiles.first()?;
        let degree = first.position[0].coords().len();
        let mut den = BigInt::one();
        for t in tiles {
            for x in &t.position {
                for c in x.coords() {
                    den = den.lcm(c.denom());
                }
            }
        }
        let limit = BigInt::from(i64::MAX >> 2);
        let rows = tiles
            .iter()
            .map(|t| {
                t.position
                    .iter()
                    .flat_map(|x| x.coords().iter())
                    .map(|c| {
                        let v = c.numer() * (&den / c.denom());
                        if v.abs() > limit {
                            None
                        } else {
                            v.to_i128()
                        }
                    })
                    .collect::<Option<Vec<i128>>>()
            })
            .collect::<Option<Vec<_>>>()?;
        Some(IntegerPositions { den, degree, rows })
    }

    /// Integer coordinates of `p` over the common denominator, when they exist and fit.
    pub fn row(&self, p: &Point) -> Option<Vec<i128>> {
        p.iter()
            .flat_map(|x| x.coords().iter())
            .map(|c| {
                let scaled = c * BigRational::from_integer(self.den.clone());
                if scaled.is_integer() {
                    scaled.to_integer().to_i128()
                } else {
                    None
                }
            })
            .collect()
    }

    /// Key of `position(i1) − position(i0)`.
    pub fn diff_key(&self, i1: usize, i0: usize) -> DiffKey {
        let a = &self.rows[i1];
        let b = &self.rows[i0];
        if a.len() <= 4 {
            let mut packed = 0u128;
            let mut fits = true;
            for (x, y) in a.iter().zip(b) {
                let d = x - y;
                if d.abs() >= 1 << 31 {
                    fits = false;
                    break;
                }
                packed = packed << 32 | (d as i32 as u32) as u128;
            }
            if fits {
                return DiffKey::Packed(packed);
            }
        }
        DiffKey::Wide(a.iter().zip(b).map(|(x, y)| x - y).collect())
    }

    pub fn negate(&self, key: &DiffKey) -> DiffKey {
        DiffKey::Wide(self.unpack(key).iter().map(|x| -x).collect()).normalized()
    }

    pub fn unpack(&self, key: &DiffKey) -> Vec<i128> {
        match key {
            DiffKey::Wide(v) => v.clone(),
            DiffKey::Packed(p) => {
                let len = self.rows[0].len();
                (0..len)
                    .map(|k| (((p >> (32 * (len - 1 - k))) as u32) as i32) as i128)
                    .collect()
            }
        }
    }

    pub fn to_point(&self, key: &DiffKey, ring: &Ring) -> Point {
        let v = self.unpack(key);
        v.chunks(self.degree)
            .map(|c| {
                ring.element(
                    c.iter()
                        .map(|n| BigRational::new(BigInt::from(*n), self.den.clone()))
                        .collect(),
                )
            })
            .collect()
    }
}

impl DiffKey {
    /// Canonical form: packed whenever the components fit.
    fn normalized(self) -> DiffKey {
        match self {
            DiffKey::Wide(v) if v.len() <= 4 && v.iter().all(|d| d.abs() < 1 << 31) => {
                DiffKey::Packed(
                    v.iter()
                        .fold(0u128, |acc, d| acc << 32 | (*d as i32 as u32) as u128),
                )
            }
            other => other,
        }
    }
}

impl Patch {
    /// Builds a patch from explicit tiles; ordering is normalized.
    pub fn from_tiles(mut tiles: Vec<Tile>, geometry: &TileGeometry, radius: f64) -> Patch {
        tiles.sort_by(|a, b| a.position.cmp(&b.position).then(a.colour.cmp(&b.colour)));
        tiles.dedup();
        let cell = geometry.max_extent().max(1e-9);
        let mut members = HashMap::with_capacity(tiles.len());
        let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        let floats: Vec<Vec<f64>> = tiles.iter().map(Tile::position_f64).collect();
        for (k, t) in tiles.iter().enumerate() {
            members.insert((t.colour, t.position.clone()), k);
            let lower = &geometry.bboxes[t.colour].0;
            let key: Vec<i64> = floats[k]
                .iter()
                .zip(lower)
                .map(|(x, l)| ((x + l) / cell).floor() as i64)
                .collect();
            grid.entry(key).or_default().push(k);
        }
        let origin_inside = geometry
            .bboxes
            .iter()
            .all(|(lo, hi)| lo.iter().zip(hi).all(|(l, h)| *l <= 0.0 && *h >= 0.0));
        let slack = if origin_inside {
            0.0
        } else {
            geometry.max_extent()
        };
        Patch {
            tiles,
            radius,
            generations: 0,
            seed: None,
            supports: geometry.supports.clone(),
            bboxes: geometry.bboxes.clone(),
            members,
            cell,
            grid,
            floats,
            integers: OnceLock::new(),
            slack,
        }
    }

    /// Every tile whose position lies in the ball of this radius belongs to the patch.
    pub fn complete_radius(&self) -> f64 {
        (self.radius - self.slack).max(0.0)
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.supports[0].dimension()
    }

    pub fn colour_count(&self) -> usize {
        self.supports.len()
    }

    pub fn supports(&self) -> &[Support] {
        &self.supports
    }

    pub fn contains(&self, colour: usize, position: &Point) -> bool {
        self.members.contains_key(&(colour, position.clone()))
    }

    pub fn index_of(&self, colour: usize, position: &Point) -> Option<usize> {
        self.members.get(&(colour, position.clone())).copied()
    }

    pub(crate) fn integer_positions(&self) -> Option<&IntegerPositions> {
        self.integers
            .get_or_init(|| IntegerPositions::new(&self.tiles))
            .as_ref()
    }

    /// Cached float position of tile `k`.
    pub fn position_f64(&self, k: usize) -> &[f64] {
        &self.floats[k]
    }

    pub fn support_of(&self, tile: &Tile) -> Support {
        self.supports[tile.colour].translate(&tile.position)
    }

    /// Float bounding box of a placed tile.
    pub fn tile_bbox(&self, tile: &Tile) -> (Vec<f64>, Vec<f64>) {
        let p = match self.index_of(tile.colour, &tile.position) {
            Some(k) => self.floats[k].clone(),
            None => tile.position_f64(),
        };
        let (lo, hi) = &self.bboxes[tile.colour];
        (
            lo.iter().zip(&p).map(|(l, x)| l + x).collect(),
            hi.iter().zip(&p).map(|(h, x)| h + x).collect(),
        )
    }

    /// Indices of tiles whose bounding box meets the float box `[lo, hi]` (conservative).
    pub fn tiles_near(&self, lo: &[f64], hi: &[f64]) -> Vec<usize> {
        let d = lo.len();
        let margin = 1e-9 * (1.0 + self.radius);
        // Tiles are keyed by the lower corner of their bounding box, at most one cell below `lo`.
        let lo_key: Vec<i64> = lo
            .iter()
            .map(|x| ((x - margin) / self.cell).floor() as i64 - 1)
            .collect();
        let hi_key: Vec<i64> = hi
            .iter()
            .map(|x| ((x + margin) / self.cell).floor() as i64 + 1)
            .collect();
        let span: i64 = lo_key.iter().zip(&hi_key).map(|(a, b)| b - a + 1).product();
        let mut out = Vec::new();
        if span as usize > self.grid.len() * 2 {
            for k in 0..self.tiles.len() {
                if self.bbox_meets(k, lo, hi, margin) {
                    out.push(k);
                }
            }
            return out;
        }
        let mut key = lo_key.clone();
        loop {
            if let Some(list) = self.grid.get(&key) {
                for &k in list {
                    if self.bbox_meets(k, lo, hi, margin) {
                        out.push(k);
                    }
                }
            }
            let mut a = 0;
            loop {
                if a == d {
                    out.sort_unstable();
                    return out;
                }
                key[a] += 1;
                if key[a] <= hi_key[a] {
                    break;
                }
                key[a] = lo_key[a];
                a += 1;
            }
        }
    }

    fn bbox_meets(&self, k: usize, lo: &[f64], hi: &[f64], margin: f64) -> bool {
        let p = &self.floats[k];
        let (bl, bh) = &self.bboxes[self.tiles[k].colour];
        (0..lo.len()).all(|a| p[a] + bl[a] <= hi[a] + margin && p[a] + bh[a] >= lo[a] - margin)
    }

    /// Positions of each colour.
    pub fn positions_by_colour(&self) -> Vec<Vec<Point>> {
        let mut out = vec![Vec::new(); self.colour_count()];
        for t in &self.tiles {
            out[t.colour].push(t.position.clone());
        }
        out
    }

    /// First pair of tiles whose supports share interior points, if any (exact test).
    pub fn overlapping_pair(&self) -> Option<(usize, usize)> {
        for (k, t) in self.tiles.iter().enumerate() {
            let (lo, hi) = self.tile_bbox(t);
            for n in self.tiles_near(&lo, &hi) {
                if n <= k {
                    continue;
                }
                let other = &self.tiles[n];
                let offset: Point = t
                    .position
                    .iter()
                    .zip(&other.position)
                    .map(|(a, b)| a - b)
                    .collect();
                if self.supports[t.colour].interiors_meet(&offset, &self.supports[other.colour]) {
                    return Some((k, n));
                }
            }
        }
        None
    }
}

/// Exact sup-norm test `|v|_∞ ≤ r`.
pub fn within_radius(v: &[RingElement], r: &BigRational) -> bool {
    v.iter().all(|x| {
        let iv = x.enclosure();
        let rf = num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::INFINITY);
        if iv.hi < rf && iv.lo > -rf {
            return true;
        }
        if iv.lo > rf || iv.hi < -rf {
            return false;
        }
        let bound = x.ring().from_rational(r.clone());
        x.abs() <= bound
    })
}

/// Exact rational for a float radius.
pub fn radius_rational(r: f64) -> BigRational {
    BigRational::from_float(r.max(0.0))
        .unwrap_or_else(|| BigRational::from_integer(i64::MAX.into()))
}

pub fn sup_norm_f64(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}
