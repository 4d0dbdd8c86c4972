//! Overlap enumeration and closure, the overlap-coincidence decision, decay rate, algebraic
//! coincidence witnesses, Dekking's column test and locator sets.

mod decide;
mod dekking;
mod witness;

pub use decide::{
    analyze_overlaps, decay_rate, decide, volume_fractions, volume_law_violations, DecayRate,
    Decision, OverlapAnalysis, Verdict,
};
pub use dekking::{dekking_check, dekking_for_spec, height, symbolic_words, DekkingResult};
pub use witness::{
    find_algebraic_witness, locator_set, AlgebraicWitness, LocatorReport, WitnessSearch,
};

use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use crate::par::{self, Execution};
use crate::ring::{Point, RingElement};
use crate::system::{adjoint_show, SubstitutionSpec, TileGeometry};
use crate::tiling::{sup_norm_f64, within_radius, xi_within_ball, DiffKey, Patch};

pub const DEFAULT_MAX_CLASSES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoincidenceError {
    #[error("overlap class budget exceeded: {classes} classes, limit {limit} (input is likely not Meyer)")]
    Budget { classes: usize, limit: usize },
    #[error("patch of radius {available} is too small, {needed} required")]
    PatchTooSmall { needed: f64, available: f64 },
    #[error("no point of the patch lies in the window")]
    EmptyWindow,
    #[error("words have unequal lengths")]
    UnequalLengths,
    #[error("the specification has no symbolic words")]
    NotSymbolic,
}

/// Class budget from `TESSELLA_MAX_CLASSES`, or the default.
pub fn max_classes_budget() -> usize {
    std::env::var("TESSELLA_MAX_CLASSES")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&v: &usize| v > 0)
        .unwrap_or(DEFAULT_MAX_CLASSES)
}

/// Canonical overlap `(u + T_left, T_right)` with the right tile at the origin.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OverlapClass {
    pub left: usize,
    pub right: usize,
    pub u: Point,
}

impl OverlapClass {
    pub fn is_coincidence(&self) -> bool {
        self.left == self.right && self.u.iter().all(|x| x.is_zero())
    }

    pub fn label(&self, spec: &SubstitutionSpec) -> String {
        format!(
            "({}, {}, {})",
            spec.colours[self.left],
            spec.colours[self.right],
            adjoint_show(&self.u)
        )
    }
}

/// Closed class set with child multiplicities.
#[derive(Clone, Debug)]
pub struct OverlapGraph {
    pub classes: Vec<OverlapClass>,
    /// `edges[c]` lists `(child, multiplicity)` sorted by child.
    pub edges: Vec<Vec<(usize, u64)>>,
    pub coincidence: Vec<bool>,
    /// Vol((u + A_i) ∩ A_j) per class.
    pub volumes: Vec<RingElement>,
    /// Indices of the seed classes.
    pub seeds: Vec<usize>,
    pub det: RingElement,
}

impl OverlapGraph {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn index_of(&self, class: &OverlapClass) -> Option<usize> {
        self.classes.binary_search(class).ok()
    }

    pub fn coincidence_count(&self) -> usize {
        self.coincidence.iter().filter(|&&c| c).count()
    }
}

struct Bounds {
    /// Largest |coordinate| of any support bounding box.
    reach: f64,
    bboxes: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Bounds {
    fn new(geometry: &TileGeometry) -> Self {
        let reach = geometry
            .bboxes
            .iter()
            .flat_map(|(lo, hi)| lo.iter().chain(hi).map(|x| x.abs()))
            .fold(0.0, f64::max);
        Bounds {
            reach,
            bboxes: geometry.bboxes.clone(),
        }
    }

    /// Float prefilter for `(u + A_i)° ∩ A_j° ≠ ∅`.
    fn may_meet(&self, i: usize, j: usize, u: &[f64]) -> bool {
        let (li, hi_) = &self.bboxes[i];
        let (lj, hj) = &self.bboxes[j];
        u.iter()
            .enumerate()
            .all(|(a, x)| x + li[a] < hj[a] + 1e-9 && x + hi_[a] > lj[a] - 1e-9)
    }
}

fn to_f64(p: &[RingElement]) -> Vec<f64> {
    p.iter().map(|x| x.to_f64()).collect()
}

/// Classes `(i, j, y + p − q)` over tiles p (colour i) with |p| ≤ `xi_radius`, tiles q (colour j)
/// and y ∈ Ξ(patch) ∩ B_{xi_radius}, kept when the interiors meet.
pub fn seed_overlaps(
    patch: &Patch,
    geometry: &TileGeometry,
    xi_radius: f64,
    exec: Execution,
) -> Result<Vec<OverlapClass>, CoincidenceError> {
    let bounds = Bounds::new(geometry);
    let needed = 2.0 * xi_radius + 2.0 * bounds.reach;
    if patch.complete_radius() < needed {
        return Err(CoincidenceError::PatchTooSmall {
            needed,
            available: patch.complete_radius(),
        });
    }
    let xi = xi_within_ball(patch, xi_radius, Some(needed), exec);
    let mut xi_sorted: Vec<(Vec<f64>, &Point)> = xi.iter().map(|y| (to_f64(y), y)).collect();
    xi_sorted.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]));
    let keys: Vec<f64> = xi_sorted.iter().map(|(f, _)| f[0]).collect();

    let anchor_bound = crate::tiling::radius_rational(xi_radius);
    let anchors: Vec<usize> = (0..patch.len())
        .filter(|&k| within_radius(&patch.tiles()[k].position, &anchor_bound))
        .collect();
    let reach = xi_radius + 2.0 * bounds.reach;
    // Distinct differences p − q per colour pair.
    let ring = patch.tiles().first().map(|t| t.position[0].ring().clone());
    let ints = patch.integer_positions();
    let mut keyed: HashSet<(usize, usize, DiffKey)> = HashSet::new();
    let mut exact: HashSet<(usize, usize, Point)> = HashSet::new();
    for &k in &anchors {
        let t = &patch.tiles()[k];
        let p = patch.position_f64(k);
        let lo: Vec<f64> = p.iter().map(|x| x - reach).collect();
        let hi: Vec<f64> = p.iter().map(|x| x + reach).collect();
        for n in patch.tiles_near(&lo, &hi) {
            let s = &patch.tiles()[n];
            match ints {
                Some(ints) => {
                    keyed.insert((t.colour, s.colour, ints.diff_key(k, n)));
                }
                None => {
                    let w: Point = t
                        .position
                        .iter()
                        .zip(&s.position)
                        .map(|(a, b)| a - b)
                        .collect();
                    exact.insert((t.colour, s.colour, w));
                }
            }
        }
    }
    if let (Some(ints), Some(ring)) = (ints, &ring) {
        exact.extend(
            keyed
                .into_iter()
                .map(|(i, j, key)| (i, j, ints.to_point(&key, ring))),
        );
    }
    let mut work: Vec<(usize, usize, Point)> = exact.into_iter().collect();
    work.sort();
    let tol = 1e-9 * (1.0 + xi_radius);
    let found = par::flat_map(exec, &work, |(i, j, w)| {
        let wf = to_f64(w);
        let lo = -wf[0] - 2.0 * bounds.reach - tol;
        let hi = -wf[0] + 2.0 * bounds.reach + tol;
        let start = keys.partition_point(|&x| x < lo);
        let mut out = Vec::new();
        for (yf, y) in &xi_sorted[start..] {
            if yf[0] > hi {
                break;
            }
            let uf: Vec<f64> = wf.iter().zip(yf).map(|(a, b)| a + b).collect();
            if !bounds.may_meet(*i, *j, &uf) {
                continue;
            }
            let u: Point = w.iter().zip(y.iter()).map(|(a, b)| a + b).collect();
            if geometry.supports[*i].interiors_meet(&u, &geometry.supports[*j]) {
                out.push(OverlapClass {
                    left: *i,
                    right: *j,
                    u,
                });
            }
        }
        out
    });
    let mut classes = found;
    classes.sort();
    classes.dedup();
    Ok(classes)
}

/// Children `(k, l, Qu + a − b)`, a ∈ D_ki, b ∈ D_lj, with multiplicities, in first-seen order.
fn children(
    spec: &SubstitutionSpec,
    geometry: &TileGeometry,
    bounds: &Bounds,
    c: &OverlapClass,
) -> Vec<(OverlapClass, u64)> {
    let m = spec.colour_count();
    let qu = spec.apply_q(&c.u);
    let quf = to_f64(&qu);
    let mut out: Vec<(OverlapClass, u64)> = Vec::new();
    let mut seen: HashMap<OverlapClass, usize> = HashMap::new();
    for k in 0..m {
        for l in 0..m {
            for a in &spec.digits[k][c.left] {
                let af = to_f64(a);
                for b in &spec.digits[l][c.right] {
                    let uf: Vec<f64> = quf
                        .iter()
                        .zip(&af)
                        .zip(b)
                        .map(|((x, y), z)| x + y - z.to_f64())
                        .collect();
                    if !bounds.may_meet(k, l, &uf) {
                        continue;
                    }
                    let u: Point = qu
                        .iter()
                        .zip(a)
                        .zip(b)
                        .map(|((x, y), z)| &(x + y) - z)
                        .collect();
                    if !geometry.supports[k].interiors_meet(&u, &geometry.supports[l]) {
                        continue;
                    }
                    let child = OverlapClass {
                        left: k,
                        right: l,
                        u,
                    };
                    match seen.get(&child) {
                        Some(&idx) => out[idx].1 += 1,
                        None => {
                            seen.insert(child.clone(), out.len());
                            out.push((child, 1));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Least class set containing `seeds` and closed under subdivision.
pub fn close_overlaps(
    spec: &SubstitutionSpec,
    geometry: &TileGeometry,
    seeds: &[OverlapClass],
    max_classes: usize,
    exec: Execution,
) -> Result<OverlapGraph, CoincidenceError> {
    let bounds = Bounds::new(geometry);
    let mut classes: Vec<OverlapClass> = Vec::new();
    let mut index: HashMap<OverlapClass, usize> = HashMap::new();
    for s in seeds {
        if !index.contains_key(s) {
            index.insert(s.clone(), classes.len());
            classes.push(s.clone());
        }
    }
    let mut raw_edges: Vec<Vec<(usize, u64)>> = Vec::new();
    let mut frontier: Vec<usize> = (0..classes.len()).collect();
    while !frontier.is_empty() {
        let batch: Vec<OverlapClass> = frontier.iter().map(|&c| classes[c].clone()).collect();
        let expanded = par::map(exec, &batch, |c| children(spec, geometry, &bounds, c));
        let mut next = Vec::new();
        for (&c, kids) in frontier.iter().zip(expanded) {
            let mut edges = Vec::with_capacity(kids.len());
            for (child, mult) in kids {
                let id = match index.get(&child) {
                    Some(&id) => id,
                    None => {
                        let id = classes.len();
                        index.insert(child.clone(), id);
                        classes.push(child);
                        next.push(id);
                        id
                    }
                };
                edges.push((id, mult));
            }
            if raw_edges.len() <= c {
                raw_edges.resize(c + 1, Vec::new());
            }
            raw_edges[c] = edges;
        }
        if classes.len() > max_classes {
            return Err(CoincidenceError::Budget {
                classes: classes.len(),
                limit: max_classes,
            });
        }
        frontier = next;
    }
    raw_edges.resize(classes.len(), Vec::new());

    // Canonical order: sort classes and relabel.
    let mut order: Vec<usize> = (0..classes.len()).collect();
    order.sort_by(|&a, &b| classes[a].cmp(&classes[b]));
    let mut relabel = vec![0; classes.len()];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new;
    }
    let sorted: Vec<OverlapClass> = order.iter().map(|&o| classes[o].clone()).collect();
    let edges: Vec<Vec<(usize, u64)>> = order
        .iter()
        .map(|&o| {
            let mut e: Vec<(usize, u64)> =
                raw_edges[o].iter().map(|&(t, m)| (relabel[t], m)).collect();
            e.sort_unstable();
            e
        })
        .collect();
    let coincidence = sorted.iter().map(|c| c.is_coincidence()).collect();
    let volumes = par::map(exec, &sorted, |c| {
        geometry.supports[c.left].intersection_volume(&c.u, &geometry.supports[c.right])
    });
    let mut seed_ids: Vec<usize> = seeds.iter().map(|s| relabel[index[s]]).collect();
    seed_ids.sort_unstable();
    seed_ids.dedup();
    Ok(OverlapGraph {
        classes: sorted,
        edges,
        coincidence,
        volumes,
        seeds: seed_ids,
        det: spec.abs_det(),
    })
}

/// DOT rendering: coincidences double-circled, edges labelled by multiplicity.
pub fn graph_to_dot(graph: &OverlapGraph, spec: &SubstitutionSpec) -> String {
    let mut out = String::from("digraph overlaps {\n  node [shape=circle];\n");
    for (k, c) in graph.classes.iter().enumerate() {
        let shape = if graph.coincidence[k] {
            "doublecircle"
        } else {
            "circle"
        };
        let _ = writeln!(
            out,
            "  n{k} [label=\"{}\", shape={shape}];",
            c.label(spec).replace('"', "'")
        );
    }
    for (k, edges) in graph.edges.iter().enumerate() {
        for &(t, m) in edges {
            let _ = writeln!(out, "  n{k} -> n{t} [label=\"{m}\"];");
        }
    }
    out.push_str("}\n");
    out
}

/// Largest sup-norm of any displacement in the graph.
pub fn max_displacement(graph: &OverlapGraph) -> f64 {
    graph
        .classes
        .iter()
        .map(|c| sup_norm_f64(&to_f64(&c.u)))
        .fold(0.0, f64::max)
}
