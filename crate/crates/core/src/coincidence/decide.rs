//! Reachability decision, decay rate and the two-radius stability check.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{close_overlaps, seed_overlaps, CoincidenceError, OverlapGraph};
use crate::par::Execution;
use crate::ring::matrix::{spectral_radius_sparse, SparseRows};
use crate::ring::RingElement;
use crate::system::{SubstitutionSpec, TileGeometry};
use crate::tiling::Patch;

/// Tolerance on ρ(N) against |det Q| in the decay-rate cross-check.
pub const DECAY_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    PurePoint,
    NotPurePoint,
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub decision: Decision,
    /// Maximum over classes of the shortest path length to a coincidence.
    pub uniform_l: Option<usize>,
    pub distance: Vec<Option<usize>>,
    /// Classes with no path to a coincidence; closed under subdivision.
    pub witness: Vec<usize>,
}

/// Every class reaches a coincidence ⟹ pure point; otherwise the unreachable classes are the
/// negative witness.
pub fn decide(graph: &OverlapGraph) -> Verdict {
    let n = graph.len();
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, edges) in graph.edges.iter().enumerate() {
        for &(t, _) in edges {
            reverse[t].push(c);
        }
    }
    let mut distance: Vec<Option<usize>> = vec![None; n];
    let mut queue = VecDeque::new();
    for c in 0..n {
        if graph.coincidence[c] {
            distance[c] = Some(0);
            queue.push_back(c);
        }
    }
    while let Some(c) = queue.pop_front() {
        let d = distance[c].expect("queued");
        for &p in &reverse[c] {
            if distance[p].is_none() {
                distance[p] = Some(d + 1);
                queue.push_back(p);
            }
        }
    }
    let witness: Vec<usize> = (0..n).filter(|&c| distance[c].is_none()).collect();
    if witness.is_empty() {
        let l = distance.iter().flatten().copied().max().unwrap_or(0);
        Verdict {
            decision: Decision::PurePoint,
            uniform_l: Some(l),
            distance,
            witness,
        }
    } else {
        Verdict {
            decision: Decision::NotPurePoint,
            uniform_l: None,
            distance,
            witness,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRate {
    /// r = ρ(N)/|det Q|.
    pub r: f64,
    pub r_lower: f64,
    pub r_upper: f64,
    pub rho: f64,
    pub det: f64,
    pub non_coincidence_classes: usize,
}

impl DecayRate {
    /// ρ(N) is below |det Q| by more than the tolerance.
    pub fn decays(&self) -> bool {
        self.rho < self.det * (1.0 - DECAY_TOLERANCE)
    }
}

/// Spectral radius of the multiplicity matrix on non-coincidence classes, over |det Q|.
pub fn decay_rate(graph: &OverlapGraph) -> DecayRate {
    let det = graph.det.to_f64();
    let ids: Vec<usize> = (0..graph.len())
        .filter(|&c| !graph.coincidence[c])
        .collect();
    let mut local = vec![usize::MAX; graph.len()];
    for (k, &c) in ids.iter().enumerate() {
        local[c] = k;
    }
    let rows: SparseRows = ids
        .iter()
        .map(|&c| {
            graph.edges[c]
                .iter()
                .filter(|(t, _)| local[*t] != usize::MAX)
                .map(|&(t, m)| (local[t], m as f64))
                .collect()
        })
        .collect();
    let est = spectral_radius_sparse(&rows);
    DecayRate {
        r: est.value / det,
        r_lower: est.lower / det,
        r_upper: est.upper / det,
        rho: est.value,
        det,
        non_coincidence_classes: ids.len(),
    }
}

/// Classes where Σ mult·Vol(child) ≠ |det Q|·Vol(class), exactly.
pub fn volume_law_violations(graph: &OverlapGraph) -> Vec<usize> {
    (0..graph.len())
        .filter(|&c| {
            let ring = graph.det.ring();
            let total = graph.edges[c].iter().fold(ring.zero(), |acc, &(t, m)| {
                acc + &(&graph.volumes[t] * &ring.from_int(m as i64))
            });
            total != &graph.det * &graph.volumes[c]
        })
        .collect()
}

/// Non-coincidence volume fraction after n = 0..=steps subdivisions of the seed classes.
pub fn volume_fractions(graph: &OverlapGraph, steps: usize) -> Vec<f64> {
    let vol: Vec<f64> = graph.volumes.iter().map(RingElement::to_f64).collect();
    let mut x = vec![0.0; graph.len()];
    for &s in &graph.seeds {
        x[s] = 1.0;
    }
    let mut out = Vec::with_capacity(steps + 1);
    for step in 0..=steps {
        let total = x.iter().zip(&vol).fold(0.0, |acc, (a, v)| acc + a * v);
        let bad = (0..graph.len())
            .filter(|&c| !graph.coincidence[c])
            .fold(0.0, |acc, c| acc + x[c] * vol[c]);
        out.push(if total > 0.0 { bad / total } else { 0.0 });
        if step == steps {
            break;
        }
        let mut y = vec![0.0; graph.len()];
        for (c, edges) in graph.edges.iter().enumerate() {
            if x[c] == 0.0 {
                continue;
            }
            for &(t, m) in edges {
                y[t] += x[c] * m as f64;
            }
        }
        x = y;
    }
    out
}

/// Overlap analysis at seed radius R with a rerun at 2R.
#[derive(Clone, Debug)]
pub struct OverlapAnalysis {
    pub graph: OverlapGraph,
    pub verdict: Verdict,
    pub decay: DecayRate,
    /// Final decision: positive only when stable; negative even when not.
    pub decision: Decision,
    pub stable: bool,
    pub seed_radius: f64,
    /// Class count of the rerun at 2R, when it ran.
    pub rerun_classes: Option<usize>,
    /// The reachability verdict and the decay rate agree.
    pub consistent: bool,
    pub volume_law_violations: Vec<usize>,
}

pub fn analyze_overlaps(
    spec: &SubstitutionSpec,
    geometry: &TileGeometry,
    patch: &Patch,
    xi_radius: f64,
    max_classes: usize,
    exec: Execution,
) -> Result<OverlapAnalysis, CoincidenceError> {
    let seeds = seed_overlaps(patch, geometry, xi_radius, exec)?;
    let graph = close_overlaps(spec, geometry, &seeds, max_classes, exec)?;
    let verdict = decide(&graph);
    let decay = decay_rate(&graph);
    let rerun = seed_overlaps(patch, geometry, 2.0 * xi_radius, exec)
        .ok()
        .and_then(|s| close_overlaps(spec, geometry, &s, max_classes, exec).ok());
    let stable = rerun.as_ref().is_some_and(|g| g.classes == graph.classes);
    let decision = match verdict.decision {
        Decision::PurePoint if stable => Decision::PurePoint,
        Decision::NotPurePoint => Decision::NotPurePoint,
        _ => Decision::Unknown,
    };
    let consistent = (verdict.decision == Decision::PurePoint) == decay.decays();
    let violations = volume_law_violations(&graph);
    Ok(OverlapAnalysis {
        rerun_classes: rerun.map(|g| g.len()),
        graph,
        verdict,
        decay,
        decision,
        stable,
        seed_radius: xi_radius,
        consistent,
        volume_law_violations: violations,
    })
}
