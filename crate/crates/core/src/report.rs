//! The full analysis pipeline and its JSON report.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coincidence::{
    analyze_overlaps, dekking_check, find_algebraic_witness, height, max_classes_budget,
    symbolic_words, volume_fractions, CoincidenceError, DecayRate, Decision, DekkingResult,
    OverlapAnalysis,
};
use crate::cps::{
    self, build_star_map, estimate_windows, verify_sandwich, SandwichReport, StarMap,
    WindowEstimate,
};
use crate::par::Execution;
use crate::ring::{ExpansionMap, PerronEstimate, Point};
use crate::system::{
    adjoint_show, solve_adjoint, to_document, validate_disjointness, DisjointnessReport,
    Primitivity, SubstitutionSpec, SystemError, TileGeometry,
};
use crate::tiling::{
    detect_periods, find_seed, generate_patch_with, max_tiles_budget, meyer_certificate,
    MeyerReport, Patch, SeedCertificate, TilingError,
};

/// Version of the JSON layout documented in docs/report-format.md.
pub const SCHEMA_VERSION: u32 = 1;

/// Largest N tried by the seed search.
pub const SEED_N_MAX: u32 = 8;

/// Extra length added to the witness patch radius beyond the largest translate.
pub const WITNESS_MARGIN: f64 = 64.0;

/// Estimated tile count above which the witness patch radius is cut back.
pub const WITNESS_MAX_TILES: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub radius: f64,
    pub xi_radius: f64,
    pub m_max: u32,
    /// Radius of the Ξ sample pushed forward by Q^M in the witness search.
    pub witness_radius: f64,
    pub cps: bool,
    pub epsilon: f64,
    /// Sandwich radius; λ^8 when absent.
    pub sandwich_radius: Option<f64>,
    pub disjointness_radius: f64,
    #[serde(skip)]
    pub exec: Execution,
    #[serde(skip)]
    pub max_tiles: usize,
    #[serde(skip)]
    pub max_classes: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            radius: 200.0,
            xi_radius: 20.0,
            m_max: 12,
            witness_radius: 2.0,
            cps: true,
            epsilon: 0.05,
            sandwich_radius: None,
            disjointness_radius: 50.0,
            exec: Execution::default(),
            max_tiles: max_tiles_budget(),
            max_classes: max_classes_budget(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecEcho {
    /// Canonical document re-rendered from the parsed spec.
    pub document: String,
    /// SHA-256 of `document`, hex.
    pub sha256: String,
    /// SHA-256 of the input file, when analysed from one.
    pub source_sha256: Option<String>,
    pub dimension: usize,
    pub colours: Vec<String>,
    pub words: Option<Vec<String>>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimitivityReport {
    pub matrix: Vec<Vec<u64>>,
    pub primitivity: Primitivity,
    pub perron: PerronEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactValue {
    pub exact: String,
    pub value: f64,
}

impl ExactValue {
    fn of(x: &crate::ring::RingElement) -> Self {
        ExactValue {
            exact: x.to_string(),
            value: x.to_f64(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub expansion: String,
    pub abs_det: ExactValue,
    /// Interval lengths in dimension 1.
    pub lengths: Option<Vec<ExactValue>>,
    pub volumes: Vec<ExactValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub colour: String,
    pub iterate: u32,
    pub offset: String,
    pub fixed_point: String,
    pub containment: Vec<String>,
}

impl SeedReport {
    fn of(seed: &SeedCertificate, spec: &SubstitutionSpec) -> Self {
        SeedReport {
            colour: spec.colours[seed.colour].clone(),
            iterate: seed.iterate,
            offset: adjoint_show(&seed.offset),
            fixed_point: adjoint_show(&seed.fixed_point),
            containment: seed.containment.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatchSummary {
    pub radius: f64,
    pub complete_radius: f64,
    pub generations: u32,
    pub tiles: usize,
}

impl PatchSummary {
    fn of(p: &Patch) -> Self {
        PatchSummary {
            radius: p.radius,
            complete_radius: p.complete_radius(),
            generations: p.generations,
            tiles: p.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    pub search_radius: f64,
    pub checked_radius: f64,
    pub rank: usize,
    pub generators: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    /// Final overlap decision: positive only when stable.
    pub decision: Decision,
    /// Reachability verdict on the class set seeded at `seed_radius`.
    pub graph_decision: Decision,
    pub uniform_l: Option<usize>,
    pub stable: bool,
    pub seed_radius: f64,
    pub classes: usize,
    pub rerun_classes: Option<usize>,
    pub coincidences: usize,
    pub decay: DecayRate,
    /// Graph decision and decay rate agree.
    pub consistent: bool,
    pub volume_law_holds: bool,
    /// Labels of classes with no path to a coincidence.
    pub negative_witness: Vec<String>,
    /// Non-coincidence volume fraction after n = 0..=6 subdivisions.
    pub non_coincidence_fractions: Vec<f64>,
}

impl OverlapReport {
    fn of(a: &OverlapAnalysis, spec: &SubstitutionSpec) -> Self {
        OverlapReport {
            decision: a.decision,
            graph_decision: a.verdict.decision,
            uniform_l: a.verdict.uniform_l,
            stable: a.stable,
            seed_radius: a.seed_radius,
            classes: a.graph.len(),
            rerun_classes: a.rerun_classes,
            coincidences: a.graph.coincidence_count(),
            decay: a.decay.clone(),
            consistent: a.consistent,
            volume_law_holds: a.volume_law_violations.is_empty(),
            negative_witness: a
                .verdict
                .witness
                .iter()
                .map(|&c| a.graph.classes[c].label(spec))
                .collect(),
            non_coincidence_fractions: volume_fractions(&a.graph, 6),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub colour: String,
    pub exponent: u32,
    pub xi: String,
    pub xi_radius: f64,
    pub verified_radius: f64,
    pub translates: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessSearchReport {
    pub patch: PatchSummary,
    pub witness: Option<WitnessReport>,
    pub tested: Vec<u32>,
    pub skipped: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub colour: String,
    pub points: usize,
    pub cell: f64,
    pub bbox_lo: Vec<f64>,
    pub bbox_hi: Vec<f64>,
    pub inner_cells: usize,
    pub outer_cells: usize,
    pub inner_volume: f64,
    pub outer_volume: f64,
}

impl WindowSummary {
    fn of(w: &WindowEstimate, spec: &SubstitutionSpec) -> Self {
        WindowSummary {
            colour: spec.colours[w.colour].clone(),
            points: w.points.len(),
            cell: w.cell,
            bbox_lo: w.bbox.0.clone(),
            bbox_hi: w.bbox.1.clone(),
            inner_cells: w.inner.len(),
            outer_cells: w.outer.len(),
            inner_volume: w.inner_volume(),
            outer_volume: w.outer_volume(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DekkingReport {
    #[serde(flatten)]
    pub result: DekkingResult,
    /// Coincidence decides pure point spectrum only at height 1.
    pub height: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CpsSection {
    Analysed {
        star: StarMap,
        windows: Vec<WindowSummary>,
        sandwich: SandwichReport,
    },
    Unsupported {
        reason: String,
    },
    Skipped {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyCheck {
    pub name: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
    /// A tile or class budget was exceeded.
    pub budget: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub spec: SpecEcho,
    pub options: AnalysisOptions,
    pub decision: Decision,
    pub primitivity: PrimitivityReport,
    pub geometry: GeometryReport,
    pub disjointness: DisjointnessReport,
    pub seed: Option<SeedReport>,
    pub patch: Option<PatchSummary>,
    pub meyer: Option<MeyerReport>,
    pub periods: Option<PeriodReport>,
    pub overlap: Option<OverlapReport>,
    pub algebraic_witness: Option<WitnessSearchReport>,
    pub dekking: Option<DekkingReport>,
    pub cps: CpsSection,
    pub consistency: Vec<ConsistencyCheck>,
    pub errors: Vec<StageError>,
    /// SHA-256 of the canonical form, which omits this field and `timings`.
    pub report_sha256: String,
    /// Milliseconds per stage. Excluded from the canonical form.
    pub timings: BTreeMap<String, f64>,
}

impl AnalysisReport {
    /// The report without its timings block and its own hash.
    pub fn canonical_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("timings");
            obj.remove("report_sha256");
        }
        serde_json::to_string_pretty(&value).expect("report serializes")
    }

    /// Records the source file hash and refreshes `report_sha256`.
    pub fn set_source(&mut self, source: &str) {
        self.spec.source_sha256 = Some(spec_hash(source));
        self.report_sha256 = self.canonical_hash();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// SHA-256 of the canonical form.
    pub fn canonical_hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn budget_exceeded(&self) -> bool {
        self.errors.iter().any(|e| e.budget)
    }
}

pub fn spec_hash(document: &str) -> String {
    hex::encode(Sha256::digest(document.as_bytes()))
}

/// Intermediate objects kept for side outputs (DOT, SVG, window exports).
#[derive(Debug, Default)]
pub struct Artifacts {
    pub geometry: Option<TileGeometry>,
    pub seed: Option<SeedCertificate>,
    pub patch: Option<Patch>,
    pub overlaps: Option<OverlapAnalysis>,
    pub windows: Vec<WindowEstimate>,
}

struct Clock(BTreeMap<String, f64>);

impl Clock {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0
            .insert(stage.to_string(), start.elapsed().as_secs_f64() * 1e3);
        out
    }
}

fn tiling_error(stage: &str, e: &TilingError) -> StageError {
    StageError {
        stage: stage.into(),
        message: e.to_string(),
        budget: matches!(e, TilingError::Budget { .. }),
    }
}

fn coincidence_error(stage: &str, e: &CoincidenceError) -> StageError {
    StageError {
        stage: stage.into(),
        message: e.to_string(),
        budget: matches!(e, CoincidenceError::Budget { .. }),
    }
}

fn expansion_text(spec: &SubstitutionSpec) -> String {
    match &spec.expansion {
        ExpansionMap::Scalar(l) => match spec.ring.minpoly() {
            Some(mp) => format!("L = {} (root of {})", l.to_f64(), mp.poly()),
            None => format!("L = {l}"),
        },
        ExpansionMap::Matrix(m) => {
            let rows: Vec<String> = m
                .iter()
                .map(|r| {
                    format!(
                        "[{}]",
                        r.iter()
                            .map(|v| v.to_string())
                            .collect::<Vec<_>>()
                            .join(", ")
                    )
                })
                .collect();
            format!("[{}]", rows.join(", "))
        }
    }
}

/// Radius of the witness patch: λ_max^{M_max}·r_w plus a margin, capped so that the estimated
/// tile count stays within [`WITNESS_MAX_TILES`] and half the tile budget.
fn witness_patch_radius(spec: &SubstitutionSpec, main: &Patch, options: &AnalysisOptions) -> f64 {
    let lambda = spec
        .q_diagonal()
        .iter()
        .map(|q| q.to_f64().abs())
        .fold(1.0, f64::max);
    let wanted = lambda.powi(options.m_max as i32) * options.witness_radius + WITNESS_MARGIN;
    let d = spec.dimension as i32;
    let density = main.len() as f64 / (2.0 * main.radius.max(1.0)).powi(d);
    let cap = 0.5
        * ((WITNESS_MAX_TILES.min(options.max_tiles / 2) as f64) / density.max(1e-12))
            .powf(1.0 / d as f64);
    wanted.min(cap).max(main.radius)
}

/// Runs every stage. Only an invalid spec is an error; stage failures are recorded in the report.
pub fn analyze(
    spec: &SubstitutionSpec,
    options: &AnalysisOptions,
) -> Result<(AnalysisReport, Artifacts), SystemError> {
    let mut clock = Clock(BTreeMap::new());
    let mut errors = Vec::new();
    let mut artifacts = Artifacts::default();
    let exec = options.exec;

    let document = to_document(spec);
    let echo = SpecEcho {
        sha256: spec_hash(&document),
        source_sha256: None,
        document,
        dimension: spec.dimension,
        colours: spec.colours.clone(),
        words: spec.words.clone(),
        warnings: spec.warnings.clone(),
    };
    let matrix = spec.substitution_matrix();
    let primitivity = PrimitivityReport {
        primitivity: matrix.primitivity(),
        perron: matrix.perron.clone(),
        matrix: matrix.entries,
    };

    let geometry = clock.time("geometry", || solve_adjoint(spec))?;
    let geometry_report = GeometryReport {
        expansion: expansion_text(spec),
        abs_det: ExactValue::of(&spec.abs_det()),
        lengths: geometry
            .lengths
            .as_ref()
            .map(|l| l.iter().map(ExactValue::of).collect()),
        volumes: geometry.volumes.iter().map(ExactValue::of).collect(),
    };
    let disjointness = clock.time("disjointness", || {
        validate_disjointness(spec, options.disjointness_radius)
    });

    let seed = clock.time("seed", || find_seed(spec, &geometry, SEED_N_MAX));
    let seed = match seed {
        Ok(s) => Some(s),
        Err(e) => {
            errors.push(tiling_error("seed", &e));
            None
        }
    };
    let patch = seed.as_ref().and_then(|s| {
        match clock.time("patch", || {
            generate_patch_with(spec, &geometry, s, options.radius, options.max_tiles, exec)
        }) {
            Ok(p) => Some(p),
            Err(e) => {
                errors.push(tiling_error("patch", &e));
                None
            }
        }
    });

    let meyer_radius = options.xi_radius.min(10.0);
    let meyer = patch.as_ref().map(|p| {
        let flc_radii = [1.0, 2.0, meyer_radius / 2.0];
        clock.time("meyer", || {
            meyer_certificate(p, meyer_radius, &flc_radii, exec)
        })
    });
    let periods = patch.as_ref().map(|p| {
        let lattice = clock.time("periods", || {
            detect_periods(p, options.xi_radius.min(8.0), exec)
        });
        PeriodReport {
            search_radius: lattice.search_radius,
            checked_radius: lattice.checked_radius,
            rank: lattice.rank(),
            generators: lattice.generators.iter().map(|g| adjoint_show(g)).collect(),
        }
    });

    let overlaps = patch.as_ref().and_then(|p| {
        match clock.time("overlap", || {
            analyze_overlaps(
                spec,
                &geometry,
                p,
                options.xi_radius,
                options.max_classes,
                exec,
            )
        }) {
            Ok(a) => Some(a),
            Err(e) => {
                errors.push(coincidence_error("overlap", &e));
                None
            }
        }
    });
    let overlap_report = overlaps.as_ref().map(|a| OverlapReport::of(a, spec));
    let decision = overlaps.as_ref().map_or(Decision::Unknown, |a| a.decision);

    let witness = match (&seed, &patch) {
        (Some(s), Some(main)) => {
            let radius = witness_patch_radius(spec, main, options);
            let wpatch = if radius <= main.radius {
                Ok(None)
            } else {
                clock
                    .time("witness_patch", || {
                        generate_patch_with(spec, &geometry, s, radius, options.max_tiles, exec)
                    })
                    .map(Some)
            };
            match wpatch {
                Ok(extra) => {
                    let wp = extra.as_ref().unwrap_or(main);
                    let search = clock.time("witness", || {
                        find_algebraic_witness(
                            spec,
                            wp,
                            options.witness_radius,
                            options.m_max,
                            exec,
                        )
                    });
                    Some(WitnessSearchReport {
                        patch: PatchSummary::of(wp),
                        witness: search.witness.map(|w| WitnessReport {
                            colour: spec.colours[w.colour].clone(),
                            exponent: w.exponent,
                            xi: adjoint_show(&w.xi),
                            xi_radius: w.xi_radius,
                            verified_radius: w.verified_radius,
                            translates: w.translates,
                        }),
                        tested: search.tested,
                        skipped: search.skipped,
                    })
                }
                Err(e) => {
                    errors.push(tiling_error("witness_patch", &e));
                    None
                }
            }
        }
        _ => None,
    };

    let dekking = clock
        .time("dekking", || {
            let words = symbolic_words(spec)?;
            Ok::<_, CoincidenceError>(DekkingReport {
                result: dekking_check(&words)?,
                height: height(&words)?,
            })
        })
        .ok();

    let cps = if !options.cps {
        CpsSection::Skipped {
            reason: "disabled".into(),
        }
    } else {
        match (build_star_map(spec), &seed, &patch) {
            (Err(e), _, _) => CpsSection::Unsupported {
                reason: e.to_string(),
            },
            (Ok(_), None, _) | (Ok(_), _, None) => CpsSection::Skipped {
                reason: "no patch".into(),
            },
            (Ok(star), Some(s), Some(p)) => {
                match clock.time("cps", || run_cps(&star, p, &s.fixed_point, options)) {
                    Ok((windows, sandwich)) => {
                        let summaries =
                            windows.iter().map(|w| WindowSummary::of(w, spec)).collect();
                        artifacts.windows = windows;
                        CpsSection::Analysed {
                            star,
                            windows: summaries,
                            sandwich,
                        }
                    }
                    Err(e) => {
                        errors.push(StageError {
                            stage: "cps".into(),
                            message: e.to_string(),
                            budget: false,
                        });
                        CpsSection::Skipped {
                            reason: e.to_string(),
                        }
                    }
                }
            }
        }
    };

    let mut consistency = Vec::new();
    if let Some(w) = &witness {
        if w.witness.is_some() {
            consistency.push(ConsistencyCheck {
                name: "witness found implies pure point".into(),
                holds: decision != Decision::NotPurePoint,
            });
        }
        if decision == Decision::NotPurePoint {
            consistency.push(ConsistencyCheck {
                name: "not pure point implies no witness".into(),
                holds: w.witness.is_none(),
            });
        }
    }
    if let Some(o) = &overlap_report {
        consistency.push(ConsistencyCheck {
            name: "reachability agrees with decay rate".into(),
            holds: o.consistent,
        });
        consistency.push(ConsistencyCheck {
            name: "volume law".into(),
            holds: o.volume_law_holds,
        });
    }
    if let Some(d) = &dekking {
        if decision != Decision::Unknown && d.height == 1 {
            consistency.push(ConsistencyCheck {
                name: "dekking agrees with overlap verdict".into(),
                holds: (d.result != DekkingResult::None) == (decision == Decision::PurePoint),
            });
        }
    }
    if let CpsSection::Analysed { sandwich, .. } = &cps {
        if decision == Decision::PurePoint {
            consistency.push(ConsistencyCheck {
                name: "sandwich holds for a pure point system".into(),
                holds: sandwich.violations.is_empty(),
            });
        }
    }

    let mut report = AnalysisReport {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        spec: echo,
        options: options.clone(),
        decision,
        primitivity,
        geometry: geometry_report,
        disjointness,
        seed: seed.as_ref().map(|s| SeedReport::of(s, spec)),
        patch: patch.as_ref().map(PatchSummary::of),
        meyer,
        periods,
        overlap: overlap_report,
        algebraic_witness: witness,
        dekking,
        cps,
        consistency,
        errors,
        report_sha256: String::new(),
        timings: clock.0,
    };
    report.report_sha256 = report.canonical_hash();
    artifacts.geometry = Some(geometry);
    artifacts.seed = seed;
    artifacts.patch = patch;
    artifacts.overlaps = overlaps;
    Ok((report, artifacts))
}

fn run_cps(
    star: &StarMap,
    patch: &Patch,
    anchor: &Point,
    options: &AnalysisOptions,
) -> Result<(Vec<WindowEstimate>, SandwichReport), cps::CpsError> {
    let windows: Vec<WindowEstimate> = estimate_windows(star, patch, anchor, options.exec)
        .into_iter()
        .collect::<Result<_, _>>()?;
    let radius = options
        .sandwich_radius
        .unwrap_or_else(|| star.lambda.powi(8))
        .min(patch.complete_radius());
    let sandwich = verify_sandwich(star, patch, anchor, &windows, radius, options.epsilon)?;
    Ok((windows, sandwich))
}
