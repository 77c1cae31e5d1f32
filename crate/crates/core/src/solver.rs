//! Simplicial fixed-point solver for decay points of monotone gain
//! operators.
//!
//! The solver follows a path of complete facets through the two-layered
//! triangulation of R^N × [0, 1]. Labels interpolate between the constant
//! map v ↦ c on the bottom layer and a cut-off map φ on the top layer whose
//! fixed points are decay points: φ adds a positive lift below norm κ_h/2,
//! equals the operator between κ_h/2 and κ_Γ/2, and scales the operator
//! down to zero (and below) past that, so complete facets stay in a compact
//! part of the orthant. Reaching a complete facet on the top layer yields
//! an approximate fixed point of φ; if its decay certificate Γ_μ(w) ≪ w
//! holds, the point is returned, otherwise the grid is refined and the path
//! restarted from the same center.
//!
//! Pivoting uses the lexicographic minimum-ratio rule on the maintained
//! inverse of the labeling matrix, so ties cannot cycle. The inverse is
//! kept up to date by rank-one pivot updates and re-factorized periodically.

use std::io::Write;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::gains::{GainError, MonotoneOperator};
use crate::linalg::DenseMatrix;
use crate::triangulation::{locate_simplex, Simplex, TriangulationError};
use crate::util::{euclidean_norm, strictly_dominated};

/// Pivots between full re-factorizations of the labeling inverse.
const REFRESH_INTERVAL: u32 = 50;
/// Threshold for treating an update coefficient as positive.
const LEX_PIVOT_EPS: f64 = 1e-12;
/// Condition estimate above which a labeling system counts as singular.
const CONDITION_LIMIT: f64 = 1e12;
/// Most negative barycentric coordinate tolerated at extraction.
const BARYCENTRIC_TOL: f64 = -1e-10;
/// Retries of the center perturbation on a degenerate start location.
const DEGENERATE_RETRIES: usize = 8;

#[derive(Debug, Error)]
pub enum SfpError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("gain matrix is reducible; strongly connected blocks: {components:?}")]
    NotIrreducible { components: Vec<Vec<usize>> },
    #[error(
        "no decay point certified after {refinements} grid refinements \
         ({pivots} pivots, final grid scale {final_delta:.3e}); last failure: {last_reason}. \
         The small gain condition may fail at this scale — try a smaller target norm."
    )]
    RefinementExhausted {
        refinements: u32,
        pivots: u64,
        final_delta: f64,
        last_reason: String,
    },
    #[error("pivot budget exceeded: {pivots} pivots at grid scale {delta:.3e}")]
    PivotBudgetExceeded { pivots: u64, delta: f64 },
    #[error(transparent)]
    Operator(#[from] GainError),
    #[error("trace sink error: {0}")]
    Trace(#[from] std::io::Error),
}

/// Failures that abort one grid level; the driver refines and restarts.
#[derive(Debug, Error)]
pub enum StepError {
    #[error("no positive pivot coefficient")]
    NoPositivePivot,
    #[error("labeling matrix numerically singular")]
    SingularLabeling,
    #[error("negative barycentric coordinate {value:.3e} at vertex {index}")]
    NegativeBarycentric { index: usize, value: f64 },
    #[error("path hit the strip boundary")]
    BoundaryExit,
    #[error("path left the positive orthant (component {index} = {value})")]
    LeftOrthant { index: usize, value: f64 },
    #[error("path left the tracked regions (vertex norm {norm:.4})")]
    LeftRegion { norm: f64 },
    #[error("degenerate start: {0}")]
    DegenerateStart(String),
    #[error(transparent)]
    Operator(#[from] GainError),
}

/// Solver parameters. `defaults` fills in the recommended values for a
/// target decay-point norm.
#[derive(Clone, Debug, Serialize)]
pub struct SfpConfig {
    /// Desired norm of the decay point; fixed points appear near κ_h/2.
    pub norm: f64,
    pub kappa_h: f64,
    pub kappa_gamma: f64,
    pub kappa_0: f64,
    /// Homotopy center; the path starts at (c, 0).
    pub c: Vec<f64>,
    /// Initial grid scale.
    pub delta: f64,
    /// Grid shrink factor per refinement, in (0, 1).
    pub refine_factor: f64,
    pub max_pivots_per_level: u64,
    pub max_refinements: u32,
    /// Strictness margin required of the decay certificate.
    pub dom_margin: f64,
}

impl SfpConfig {
    /// Recommended parameters: κ_h = 2·norm, κ_Γ = κ_h + 1, κ_0 = 1,
    /// c = 0.99·κ_h/(2√N)·e and δ = κ_h/N, refining by ½.
    pub fn defaults(norm: f64, n: usize) -> Self {
        let kappa_h = 2.0 * norm;
        SfpConfig {
            norm,
            kappa_h,
            kappa_gamma: kappa_h + 1.0,
            kappa_0: 1.0,
            c: vec![0.99 * kappa_h / (2.0 * (n as f64).sqrt()); n],
            delta: kappa_h / n as f64,
            refine_factor: 0.5,
            max_pivots_per_level: 1_000_000,
            max_refinements: 20,
            dom_margin: 0.0,
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), SfpError> {
        let fail = |msg: String| Err(SfpError::InvalidConfig(msg));
        if !(self.norm > 0.0) || !self.norm.is_finite() {
            return fail(format!("norm must be positive, got {}", self.norm));
        }
        if !(self.kappa_h > 0.0) || !(self.kappa_gamma > self.kappa_h) {
            return fail(format!(
                "need kappa_gamma > kappa_h > 0, got {} and {}",
                self.kappa_gamma, self.kappa_h
            ));
        }
        if !(self.kappa_0 > 0.0) {
            return fail(format!("kappa_0 must be positive, got {}", self.kappa_0));
        }
        if self.c.len() != n {
            return fail(format!("center has length {}, operator dimension is {n}", self.c.len()));
        }
        if self.c.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return fail("center must be strictly positive".into());
        }
        let c_norm = euclidean_norm(&self.c);
        if !(c_norm < self.kappa_gamma / 2.0) {
            return fail(format!(
                "center norm {c_norm} must be below kappa_gamma/2 = {}",
                self.kappa_gamma / 2.0
            ));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return fail(format!("delta must be positive, got {}", self.delta));
        }
        if !(self.refine_factor > 0.0 && self.refine_factor < 1.0) {
            return fail(format!(
                "refine_factor must lie in (0, 1), got {}",
                self.refine_factor
            ));
        }
        if self.max_pivots_per_level == 0 {
            return fail("max_pivots_per_level must be positive".into());
        }
        if !(self.dom_margin >= 0.0) || !self.dom_margin.is_finite() {
            return fail(format!("dom_margin must be nonnegative, got {}", self.dom_margin));
        }
        Ok(())
    }
}

/// Concentric norm regions of the positive orthant used by the cut-off map
/// and the path monitor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    I,
    II,
    III,
    IV,
    V,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
            Region::IV => "IV",
            Region::V => "V",
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies ‖v‖ into the half-open norm bands
/// [0, κ_h/2), [κ_h/2, κ_Γ/2), [κ_Γ/2, κ_Γ+κ_0), [κ_Γ+κ_0, κ_Γ+κ_0+δ], (…, ∞).
pub fn region(v: &[f64], cfg: &SfpConfig) -> Region {
    region_of_norm(euclidean_norm(v), cfg)
}

fn region_of_norm(r: f64, cfg: &SfpConfig) -> Region {
    let outer = cfg.kappa_gamma + cfg.kappa_0;
    if r < cfg.kappa_h / 2.0 {
        Region::I
    } else if r < cfg.kappa_gamma / 2.0 {
        Region::II
    } else if r < outer {
        Region::III
    } else if r <= outer + cfg.delta {
        Region::IV
    } else {
        Region::V
    }
}

/// The cut-off map whose fixed points are decay points:
///
/// ```text
/// φ(v) = Γ_μ(v) (1 + min{0, (κ_Γ − 2‖v‖)/(‖v‖ + κ_0)}) + max{0, κ_h − 2‖v‖} e
/// ```
pub fn phi(v: &[f64], cfg: &SfpConfig, op: &MonotoneOperator) -> Result<Vec<f64>, GainError> {
    let image = op.eval(v)?;
    let r = euclidean_norm(v);
    let shrink = 1.0 + ((cfg.kappa_gamma - 2.0 * r) / (r + cfg.kappa_0)).min(0.0);
    let lift = (cfg.kappa_h - 2.0 * r).max(0.0);
    Ok(image.iter().map(|g| g * shrink + lift).collect())
}

/// Label of a strip vertex (v, t): the homotopy value minus the projection,
/// i.e. c − v on the bottom layer and φ(v) − v on the top layer.
pub fn label(
    v: &[f64],
    layer: i64,
    cfg: &SfpConfig,
    op: &MonotoneOperator,
) -> Result<Vec<f64>, GainError> {
    label_with_center(v, layer, &cfg.c, cfg, op)
}

fn label_with_center(
    v: &[f64],
    layer: i64,
    center: &[f64],
    cfg: &SfpConfig,
    op: &MonotoneOperator,
) -> Result<Vec<f64>, GainError> {
    debug_assert!(layer == 0 || layer == 1);
    if layer == 0 {
        Ok(center.iter().zip(v).map(|(c, x)| c - x).collect())
    } else {
        Ok(phi(v, cfg, op)?.iter().zip(v).map(|(p, x)| p - x).collect())
    }
}

/// Certified output: a decay point with its recomputed image and the run
/// statistics.
#[derive(Clone, Debug)]
pub struct DecayResult {
    pub w: Vec<f64>,
    pub gamma_w: Vec<f64>,
    pub pivots: u64,
    pub refinements: u32,
    pub final_delta: f64,
    pub wall_time: Duration,
}

impl DecayResult {
    /// Componentwise certificate margins w − Γ_μ(w).
    pub fn margins(&self) -> Vec<f64> {
        self.w.iter().zip(&self.gamma_w).map(|(w, g)| w - g).collect()
    }
}

/// One vertex of the current facet, with its cached label.
#[derive(Clone, Debug)]
struct SlotVertex {
    lattice: Vec<i64>,
    v: Vec<f64>,
    layer: i64,
    label: Vec<f64>,
}

/// Path state: the current complete facet (slot h pairs with column h of
/// the labeling matrix and row h of its inverse), the full simplex around
/// it, and the entering vertex to be labeled next.
pub struct LabelState {
    n: usize,
    center: Vec<f64>,
    slots: Vec<SlotVertex>,
    w: DenseMatrix,
    eta: Simplex,
    entering: SlotVertex,
    pivots_since_refresh: u32,
}

/// Outcome of one path step.
#[derive(Debug)]
pub enum Step {
    /// Interior pivot; the path continues with a new entering vertex.
    Pivot(PivotRecord),
    /// The new complete facet lies on the top layer; extract the point.
    Terminal { dropped: Vec<i64> },
}

#[derive(Debug)]
pub struct PivotRecord {
    pub dropped: Vec<i64>,
    pub entering_norm: f64,
    pub entering_region: Region,
}

impl LabelState {
    /// Locates the start simplex around (c, 0), perturbing the center off
    /// grid faces if needed, and factorizes the initial labeling system.
    pub fn start(
        op: &MonotoneOperator,
        cfg: &SfpConfig,
        delta: f64,
    ) -> Result<LabelState, StepError> {
        let n = op.dim();
        let mut center = cfg.c.clone();
        let mut located = None;
        for _ in 0..=DEGENERATE_RETRIES {
            match locate_simplex(&center, delta) {
                Ok(s) => {
                    located = Some(s);
                    break;
                }
                Err(TriangulationError::DegenerateLocation(_)) => {
                    for (i, x) in center.iter_mut().enumerate() {
                        *x += delta * 1e-7 * (i + 1) as f64 / n as f64;
                    }
                }
                Err(e) => return Err(StepError::DegenerateStart(e.to_string())),
            }
        }
        let eta = located.ok_or_else(|| {
            StepError::DegenerateStart("center perturbation did not reach a simplex interior".into())
        })?;

        let lattice = eta.lattice_vertices();
        let mut slots = Vec::with_capacity(n + 1);
        for x in &lattice[..n + 1] {
            slots.push(make_vertex(x, &eta, &center, cfg, op)?);
        }
        let entering = make_vertex(&lattice[n + 1], &eta, &center, cfg, op)?;
        let mut state = LabelState {
            n,
            center,
            slots,
            w: DenseMatrix::identity(n + 1),
            eta,
            entering,
            pivots_since_refresh: 0,
        };
        state.refactorize()?;
        // The first inverse column holds the barycentric coordinates of the
        // center in the start facet; interiority makes them positive.
        for h in 0..=n {
            if !(state.w[(h, 0)] > 0.0) {
                return Err(StepError::DegenerateStart(format!(
                    "center not strictly interior to the start facet (coordinate {h} = {})",
                    state.w[(h, 0)]
                )));
            }
        }
        Ok(state)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn effective_center(&self) -> &[f64] {
        &self.center
    }

    pub fn eta(&self) -> &Simplex {
        &self.eta
    }

    /// Maintained inverse of the labeling matrix.
    pub fn inverse(&self) -> &DenseMatrix {
        &self.w
    }

    /// Current facet vertices as (projection, layer) pairs, slot order.
    pub fn facet_vertices(&self) -> Vec<(Vec<f64>, i64)> {
        self.slots.iter().map(|s| (s.v.clone(), s.layer)).collect()
    }

    pub fn entering_vertex(&self) -> (Vec<f64>, i64) {
        (self.entering.v.clone(), self.entering.layer)
    }

    /// True when the current facet lies entirely on the top layer.
    pub fn on_top_layer(&self) -> bool {
        self.slots.iter().all(|s| s.layer == 1)
    }

    /// One lexicographic pivot: brings the entering vertex into the facet,
    /// drops the unique vertex keeping the inverse lexicographically
    /// positive, and updates the inverse. Returns the slot index and the
    /// lattice coordinates of the dropped vertex.
    pub fn lex_pivot_step(&mut self) -> Result<(usize, Vec<i64>), StepError> {
        let dim = self.n + 1;
        let mut q = Vec::with_capacity(dim);
        q.push(1.0);
        q.extend_from_slice(&self.entering.label);
        let mut p = self.w.mul_vec(&q);
        let zeta = match lex_min_ratio(&self.w, &p) {
            Some(z) => z,
            None => {
                // One refresh before giving up: stale updates can flip the
                // sign of a near-zero coefficient.
                self.refactorize()?;
                p = self.w.mul_vec(&q);
                lex_min_ratio(&self.w, &p).ok_or(StepError::NoPositivePivot)?
            }
        };
        let pivot = p[zeta];
        for k in 0..dim {
            self.w[(zeta, k)] /= pivot;
        }
        for h in 0..dim {
            if h == zeta || p[h] == 0.0 {
                continue;
            }
            let factor = p[h];
            for k in 0..dim {
                self.w[(h, k)] -= factor * self.w[(zeta, k)];
            }
        }
        let dropped = std::mem::replace(&mut self.slots[zeta], self.entering.clone());
        self.pivots_since_refresh += 1;
        if self.pivots_since_refresh >= REFRESH_INTERVAL {
            self.refactorize()?;
        }
        Ok((zeta, dropped.lattice))
    }

    /// One full path step: lexicographic pivot, termination test, and the
    /// move to the adjacent full simplex.
    pub fn step(&mut self, op: &MonotoneOperator, cfg: &SfpConfig) -> Result<Step, StepError> {
        let (_, dropped) = self.lex_pivot_step()?;
        if self.on_top_layer() {
            return Ok(Step::Terminal { dropped });
        }
        let position = self
            .eta
            .lattice_vertices()
            .iter()
            .position(|x| *x == dropped)
            .expect("dropped vertex must belong to the current simplex");
        let (next, entering_idx) = self
            .eta
            .pivot(position)
            .map_err(|_| StepError::BoundaryExit)?;
        let entering_lattice = next.lattice_vertices().swap_remove(entering_idx);
        let real = next.to_real(&entering_lattice);
        let v = &real[..self.n];
        if let Some(index) = v.iter().position(|&x| x < 0.0) {
            return Err(StepError::LeftOrthant {
                index,
                value: v[index],
            });
        }
        let norm = euclidean_norm(v);
        // Leaving regions I'-III' means no complete facet ahead; restart
        // on a finer grid instead of chasing the path outward.
        if norm >= cfg.kappa_gamma + cfg.kappa_0 {
            return Err(StepError::LeftRegion { norm });
        }
        let entering_region = region_of_norm(norm, cfg);
        self.entering = make_vertex(&entering_lattice, &next, &self.center, cfg, op)?;
        self.eta = next;
        Ok(Step::Pivot(PivotRecord {
            dropped,
            entering_norm: norm,
            entering_region,
        }))
    }

    /// Approximate fixed point carried by a top-layer facet: the convex
    /// combination of the facet vertices weighted by the first inverse
    /// column. Round-off negatives are clamped to zero.
    pub fn extract_fixed_point(&mut self) -> Result<Vec<f64>, StepError> {
        self.refactorize()?;
        let dim = self.n + 1;
        let mut lambda: Vec<f64> = (0..dim).map(|h| self.w[(h, 0)]).collect();
        for (index, &value) in lambda.iter().enumerate() {
            if value < BARYCENTRIC_TOL {
                return Err(StepError::NegativeBarycentric { index, value });
            }
        }
        for l in &mut lambda {
            *l = l.max(0.0);
        }
        let total: f64 = lambda.iter().sum();
        if !(total > 0.0) {
            return Err(StepError::SingularLabeling);
        }
        let mut v = vec![0.0; self.n];
        for (weight, slot) in lambda.iter().zip(&self.slots) {
            for d in 0..self.n {
                v[d] += weight / total * slot.v[d];
            }
        }
        for x in &mut v {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        Ok(v)
    }

    /// Rebuilds the inverse from the cached labels.
    fn refactorize(&mut self) -> Result<(), StepError> {
        let dim = self.n + 1;
        let mut l = DenseMatrix::zeros(dim);
        for h in 0..dim {
            l[(0, h)] = 1.0;
            for d in 0..self.n {
                l[(1 + d, h)] = self.slots[h].label[d];
            }
        }
        let w = l.invert().ok_or(StepError::SingularLabeling)?;
        if l.norm_1() * w.norm_1() > CONDITION_LIMIT {
            return Err(StepError::SingularLabeling);
        }
        self.w = w;
        self.pivots_since_refresh = 0;
        Ok(())
    }
}

fn make_vertex(
    lattice: &[i64],
    simplex: &Simplex,
    center: &[f64],
    cfg: &SfpConfig,
    op: &MonotoneOperator,
) -> Result<SlotVertex, StepError> {
    let n = simplex.space_dim();
    let real = simplex.to_real(lattice);
    let v = real[..n].to_vec();
    let layer = *lattice.last().unwrap();
    let label = label_with_center(&v, layer, center, cfg, op)?;
    Ok(SlotVertex {
        lattice: lattice.to_vec(),
        v,
        layer,
        label,
    })
}

/// Lexicographic minimum-ratio rule: among rows with update coefficient
/// p_h > 0, pick the one whose ratio row W_h/p_h is lexicographically
/// smallest. Ties in a leading component fall through to the next one.
pub fn lex_min_ratio(w: &DenseMatrix, p: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for h in 0..p.len() {
        if !(p[h] > LEX_PIVOT_EPS) {
            continue;
        }
        best = match best {
            None => Some(h),
            Some(b) => {
                if ratio_row_less(w, p, h, b) {
                    Some(h)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

fn ratio_row_less(w: &DenseMatrix, p: &[f64], h: usize, b: usize) -> bool {
    for k in 0..w.dim() {
        let a = w[(h, k)] / p[h];
        let c = w[(b, k)] / p[b];
        if a < c {
            return true;
        }
        if a > c {
            return false;
        }
    }
    false
}

/// Trace records emitted as one JSON object per line.
#[derive(Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent<'a> {
    Level { delta: f64 },
    Pivot {
        step: u64,
        dropped: &'a [i64],
        region: &'a str,
        norm: f64,
    },
    Terminal { step: u64, dropped: &'a [i64] },
    Refine { delta: f64, reason: &'a str },
}

enum LevelOutcome {
    Certified { w: Vec<f64> },
    Refine { reason: String },
    Budget,
}

fn certificate_holds(w: &[f64], image: &[f64], cfg: &SfpConfig) -> bool {
    strictly_dominated(image, w, cfg.dom_margin) && euclidean_norm(w) < cfg.kappa_h / 2.0
}

fn emit(
    trace: &mut Option<&mut dyn Write>,
    event: &TraceEvent<'_>,
) -> Result<(), std::io::Error> {
    if let Some(sink) = trace {
        serde_json::to_writer(&mut **sink, event)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

fn run_level(
    op: &MonotoneOperator,
    cfg: &SfpConfig,
    delta: f64,
    trace: &mut Option<&mut dyn Write>,
    step_offset: u64,
) -> Result<(LevelOutcome, u64), SfpError> {
    emit(trace, &TraceEvent::Level { delta })?;
    let mut state = match LabelState::start(op, cfg, delta) {
        Ok(s) => s,
        Err(StepError::Operator(e)) => return Err(e.into()),
        Err(e) => return Ok((LevelOutcome::Refine { reason: e.to_string() }, 0)),
    };
    let mut pivots: u64 = 0;
    loop {
        if pivots >= cfg.max_pivots_per_level {
            return Ok((LevelOutcome::Budget, pivots));
        }
        match state.step(op, cfg) {
            Ok(Step::Pivot(record)) => {
                pivots += 1;
                emit(
                    trace,
                    &TraceEvent::Pivot {
                        step: step_offset + pivots,
                        dropped: &record.dropped,
                        region: record.entering_region.as_str(),
                        norm: record.entering_norm,
                    },
                )?;
            }
            Ok(Step::Terminal { dropped }) => {
                pivots += 1;
                emit(
                    trace,
                    &TraceEvent::Terminal {
                        step: step_offset + pivots,
                        dropped: &dropped,
                    },
                )?;
                return match state.extract_fixed_point() {
                    Ok(w) => {
                        let gamma_w = op.eval(&w)?;
                        if certificate_holds(&w, &gamma_w, cfg) {
                            Ok((LevelOutcome::Certified { w }, pivots))
                        } else {
                            Ok((
                                LevelOutcome::Refine {
                                    reason: "top-layer point not certified: margins not strictly positive"
                                        .into(),
                                },
                                pivots,
                            ))
                        }
                    }
                    Err(StepError::Operator(e)) => Err(e.into()),
                    Err(e) => Ok((LevelOutcome::Refine { reason: e.to_string() }, pivots)),
                };
            }
            Err(StepError::Operator(e)) => return Err(e.into()),
            Err(e) => return Ok((LevelOutcome::Refine { reason: e.to_string() }, pivots)),
        }
    }
}

/// Runs the solver with the given configuration.
pub fn sfp_run(op: &MonotoneOperator, cfg: &SfpConfig) -> Result<DecayResult, SfpError> {
    sfp_run_traced(op, cfg, None)
}

/// Runs the solver, optionally streaming one trace record per pivot as
/// line-delimited JSON.
pub fn sfp_run_traced(
    op: &MonotoneOperator,
    cfg: &SfpConfig,
    mut trace: Option<&mut dyn Write>,
) -> Result<DecayResult, SfpError> {
    cfg.validate(op.dim())?;
    if !op.gamma().is_irreducible() {
        return Err(SfpError::NotIrreducible {
            components: op.gamma().strongly_connected_components(),
        });
    }
    let started = Instant::now();
    let mut delta = cfg.delta;
    let mut total_pivots: u64 = 0;
    let mut last_reason = String::from("no level completed");
    for refinement in 0..=cfg.max_refinements {
        let (outcome, pivots) = run_level(op, cfg, delta, &mut trace, total_pivots)?;
        total_pivots += pivots;
        match outcome {
            LevelOutcome::Certified { w } => {
                // Re-evaluate the certificate instead of trusting the search.
                let gamma_w = op.eval(&w)?;
                if certificate_holds(&w, &gamma_w, cfg) {
                    return Ok(DecayResult {
                        w,
                        gamma_w,
                        pivots: total_pivots,
                        refinements: refinement,
                        final_delta: delta,
                        wall_time: started.elapsed(),
                    });
                }
                let reason = String::from("re-evaluated certificate failed");
                emit(&mut trace, &TraceEvent::Refine { delta, reason: &reason })?;
                last_reason = reason;
                delta *= cfg.refine_factor;
            }
            LevelOutcome::Budget => {
                return Err(SfpError::PivotBudgetExceeded {
                    pivots: total_pivots,
                    delta,
                })
            }
            LevelOutcome::Refine { reason } => {
                emit(&mut trace, &TraceEvent::Refine { delta, reason: &reason })?;
                last_reason = reason;
                delta *= cfg.refine_factor;
            }
        }
    }
    Err(SfpError::RefinementExhausted {
        refinements: cfg.max_refinements,
        pivots: total_pivots,
        final_delta: delta,
        last_reason,
    })
}

/// Grid scale with the convergence guarantee: computes
/// Γ_μ^max = Γ_μ((κ_Γ+κ_0)·e), the smallest k with Γ_μ^max/(2k−1) ≪ c, and
/// returns 99% of min{(κ_Γ−κ_h)/(2√N), (κ_Γ+2κ_0)/(2k√N)}.
///
/// The practical default δ = κ_h/N is usually much larger and refined on
/// demand; this bound is for callers wanting the a-priori guarantee.
pub fn provable_delta(op: &MonotoneOperator, cfg: &SfpConfig) -> Result<f64, SfpError> {
    cfg.validate(op.dim())?;
    let n = op.dim();
    let radius = cfg.kappa_gamma + cfg.kappa_0;
    let gmax = op.eval(&vec![radius; n])?;
    let mut k: u64 = 1;
    while !gmax
        .iter()
        .zip(&cfg.c)
        .all(|(g, c)| g / (2.0 * k as f64 - 1.0) < *c)
    {
        k += 1;
        if k > 1_000_000_000 {
            return Err(SfpError::InvalidConfig(
                "no finite k satisfies the center bound; center may be degenerate".into(),
            ));
        }
    }
    let sqrt_n = (n as f64).sqrt();
    let bound = ((cfg.kappa_gamma - cfg.kappa_h) / (2.0 * sqrt_n))
        .min((cfg.kappa_gamma + 2.0 * cfg.kappa_0) / (2.0 * k as f64 * sqrt_n));
    Ok(0.99 * bound)
}
