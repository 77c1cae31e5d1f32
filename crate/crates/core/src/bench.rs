//! Benchmark instance generators and the suite harness.
//!
//! Two families:
//!
//! * Quasi-monotone systems: a random nonnegative matrix P with spectral
//!   radius 0.8 drives the operator T(v) = S(P·S⁻¹(v)), where S is a
//!   componentwise exponential warp. Since S' > 0 is diagonal, w is a decay
//!   point of T exactly when z = S⁻¹(w) satisfies P·z ≪ z, i.e.
//!   (−I + P)·z ≪ 0, so every run carries a linear-algebra certificate.
//!
//! * Biochemical control circuit: a cyclic chain of N species with
//!   saturating (monod) production g(x) = b·x/(c + x), whose ISS gains fall
//!   in the log-exp family with parameters θ (closing gain) and ζ (chain
//!   gains). Includes the perturbed three-species instance with extra
//!   self-couplings and a cross gain.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::gains::{Aggregation, GainError, GainMatrix, GainSpec, MonotoneOperator};
use crate::omega::{iterate_decay, OmegaError};
use crate::solver::{sfp_run, SfpConfig, SfpError};
use crate::util::euclidean_norm;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("drew a reducible coupling pattern {attempts} times in a row")]
    ReducibleDraw { attempts: usize },
    #[error("invalid benchmark parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Gain(#[from] GainError),
}

// ---------------------------------------------------------------------------
// Quasi-monotone systems
// ---------------------------------------------------------------------------

/// Componentwise exponential warp: identity on [−1, 1], e^{x−1} above,
/// −e^{−x−1} below. Strictly increasing with S(0) = 0.
pub fn s_transform(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| s_scalar(x)).collect()
}

/// Inverse warp on the range of S.
pub fn s_inverse(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| s_inv_scalar(x)).collect()
}

pub fn s_scalar(x: f64) -> f64 {
    if x > 1.0 {
        (x - 1.0).exp()
    } else if x < -1.0 {
        -(-x - 1.0).exp()
    } else {
        x
    }
}

pub fn s_inv_scalar(y: f64) -> f64 {
    if y > 1.0 {
        1.0 + y.ln()
    } else if y < -1.0 {
        -1.0 - (-y).ln()
    } else {
        y
    }
}

/// Spectral radius of a nonnegative matrix by power iteration on M + I
/// (positive diagonal makes the iteration aperiodic), using the
/// Collatz-Wielandt ratio bounds with tolerance 1e-10.
pub fn spectral_radius(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 0.0;
    }
    let mut x = vec![1.0; n];
    let mut estimate = 1.0;
    for _ in 0..200_000 {
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = x[i]; // the +I part
            for j in 0..n {
                acc += m[i][j] * x[j];
            }
            y[i] = acc;
        }
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for i in 0..n {
            if x[i] > 0.0 {
                let ratio = y[i] / x[i];
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
        }
        estimate = 0.5 * (lo + hi);
        let scale = 1.0 / euclidean_norm(&y);
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi * scale;
        }
        if hi - lo <= 1e-10 * hi.max(1.0) {
            break;
        }
    }
    estimate - 1.0
}

/// A drawn quasi-monotone instance: the scaled matrix P with ρ(P) = 0.8.
#[derive(Clone, Debug)]
pub struct QmsInstance {
    pub n: usize,
    pub seed: u64,
    pub p: Vec<Vec<f64>>,
}

const QMS_TARGET_RADIUS: f64 = 0.8;
const QMS_ZERO_FRACTION: f64 = 0.3;
const REDRAW_LIMIT: usize = 100;

/// Draws P (uniform entries, 30% zeroed, rescaled to ρ(P) = 0.8, redrawn
/// while the pattern is reducible) and wraps it into the warped operator
/// T(v) = S(P·S⁻¹(v)).
pub fn gen_qms(n: usize, seed: u64) -> Result<(MonotoneOperator, QmsInstance), BenchError> {
    if n < 2 {
        return Err(BenchError::InvalidParameter(
            "quasi-monotone instances need dimension at least 2".into(),
        ));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _attempt in 0..REDRAW_LIMIT {
        let mut p = vec![vec![0.0; n]; n];
        for row in &mut p {
            for entry in row.iter_mut() {
                let value: f64 = rng.gen_range(0.0..1.0);
                let keep = rng.gen_range(0.0..1.0) >= QMS_ZERO_FRACTION;
                *entry = if keep { value } else { 0.0 };
            }
        }
        let adjacency: Vec<Vec<usize>> = (0..n)
            .map(|j| (0..n).filter(|&i| p[i][j] > 0.0).collect())
            .collect();
        if !crate::graph::is_strongly_connected(&adjacency) {
            continue;
        }
        let rho = spectral_radius(&p);
        if !(rho > 0.0) {
            continue;
        }
        let scale = QMS_TARGET_RADIUS / rho;
        for row in &mut p {
            for entry in row.iter_mut() {
                *entry *= scale;
            }
        }
        let instance = QmsInstance { n, seed, p };
        let op = qms_operator(&instance)?;
        return Ok((op, instance));
    }
    Err(BenchError::ReducibleDraw {
        attempts: REDRAW_LIMIT,
    })
}

/// Builds T(v) = S(P·S⁻¹(v)) as a gain matrix of warped linear gains
/// p_ij·S⁻¹ with the warped-sum aggregation S(Σ·).
pub fn qms_operator(instance: &QmsInstance) -> Result<MonotoneOperator, BenchError> {
    let n = instance.n;
    let gamma = GainMatrix::from_fn(n, |i, j| {
        let weight = instance.p[i][j];
        if weight == 0.0 {
            GainSpec::Zero
        } else {
            // p_ij · S⁻¹ is class K∞ on the nonnegative axis for p_ij > 0.
            GainSpec::Custom(std::sync::Arc::new(move |s: f64| weight * s_inv_scalar(s)))
        }
    })?;
    let mu = Aggregation::custom(|row: &[f64]| s_scalar(row.iter().sum()), n)?;
    Ok(MonotoneOperator::uniform(gamma, mu)?)
}

// ---------------------------------------------------------------------------
// Biochemical control circuit model
// ---------------------------------------------------------------------------

/// A control circuit instance: removal rates a_i, monod parameters (b, c),
/// gain parameters (θ, ζ), and optional extra gain entries.
#[derive(Clone, Debug)]
pub struct BccmInstance {
    pub n: usize,
    pub a: Vec<f64>,
    pub b: f64,
    pub c_monod: f64,
    pub theta: f64,
    pub zeta: f64,
    pub perturbations: Vec<(usize, usize, GainSpec)>,
}

impl BccmInstance {
    /// Product of the removal rates.
    pub fn a_product(&self) -> f64 {
        self.a.iter().product()
    }

    /// Positive equilibrium of the last species: (b − a·c)/a.
    pub fn x_star(&self) -> f64 {
        let a = self.a_product();
        (self.b - a * self.c_monod) / a
    }

    /// Monod contraction factor λ = c/(c + x*).
    pub fn lambda(&self) -> f64 {
        self.c_monod / (self.c_monod + self.x_star())
    }

    /// Admissible open interval for θ: (max{K/(K + x*), λ}, 1) with K = c.
    pub fn theta_window(&self) -> (f64, f64) {
        let x_star = self.x_star();
        let k = self.c_monod;
        ((k / (k + x_star)).max(self.lambda()), 1.0)
    }

    /// Admissible open interval for ζ: (1, θ^{−1/(N−1)}).
    pub fn zeta_window(&self) -> (f64, f64) {
        (1.0, self.theta.powf(-1.0 / (self.n as f64 - 1.0)))
    }

    /// The chain family used for dimension sweeps: a_i = (i+1)/i, b = 2N,
    /// c = 1, so a = N+1, x* = (N−1)/(N+1) and λ = (N+1)/(2N).
    pub fn chain(n: usize, theta: f64, zeta: f64) -> Result<Self, BenchError> {
        if n < 2 {
            return Err(BenchError::InvalidParameter(
                "the control circuit chain needs at least 2 species".into(),
            ));
        }
        let instance = BccmInstance {
            n,
            a: (1..=n).map(|i| (i as f64 + 1.0) / i as f64).collect(),
            b: 2.0 * n as f64,
            c_monod: 1.0,
            theta,
            zeta,
            perturbations: Vec::new(),
        };
        instance.validate()?;
        Ok(instance)
    }

    /// The perturbed three-species instance: rates (2, 1, 3), monod b = 8,
    /// c = 1, θ = 0.8, ζ = 1.1, plus small self-couplings on every species
    /// and a quadratic cross gain from species 1 to species 3.
    pub fn perturbed_3d() -> Self {
        BccmInstance {
            n: 3,
            a: vec![2.0, 1.0, 3.0],
            b: 8.0,
            c_monod: 1.0,
            theta: 0.8,
            zeta: 1.1,
            perturbations: vec![
                (0, 0, GainSpec::Linear { slope: 0.001 }),
                (1, 1, GainSpec::Power { coef: 0.001, exponent: 0.9 }),
                (2, 0, GainSpec::Power { coef: 0.0005, exponent: 2.0 }),
                (2, 2, GainSpec::Power { coef: 0.001, exponent: 2.0 }),
            ],
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.n < 2 {
            return Err(BenchError::InvalidParameter(
                "need at least 2 species".into(),
            ));
        }
        if self.a.len() != self.n || self.a.iter().any(|&a| !(a > 0.0)) {
            return Err(BenchError::InvalidParameter(
                "removal rates must be positive, one per species".into(),
            ));
        }
        let a = self.a_product();
        if !(self.b > a * self.c_monod) {
            return Err(BenchError::InvalidParameter(format!(
                "need b > a·c for a positive equilibrium, got b = {}, a·c = {}",
                self.b,
                a * self.c_monod
            )));
        }
        let (theta_lo, theta_hi) = self.theta_window();
        if !(self.theta > theta_lo && self.theta < theta_hi) {
            return Err(BenchError::InvalidParameter(format!(
                "θ = {} outside the admissible window ({theta_lo}, {theta_hi})",
                self.theta
            )));
        }
        let (zeta_lo, zeta_hi) = self.zeta_window();
        if !(self.zeta > zeta_lo && self.zeta < zeta_hi) {
            return Err(BenchError::InvalidParameter(format!(
                "ζ = {} outside the admissible window ({zeta_lo}, {zeta_hi})",
                self.zeta
            )));
        }
        Ok(())
    }

    /// The induced gain operator: log-exp gains θ on the closing edge
    /// (1, N) and ζ on the chain edges (i, i−1), perturbation entries added
    /// on top, sum aggregation on every row.
    pub fn operator(&self) -> Result<MonotoneOperator, BenchError> {
        self.validate()?;
        let mut gamma = GainMatrix::zero(self.n)?;
        gamma.set_entry(0, self.n - 1, GainSpec::log_exp(self.theta)?);
        for i in 1..self.n {
            gamma.set_entry(i, i - 1, GainSpec::log_exp(self.zeta)?);
        }
        for (i, j, gain) in &self.perturbations {
            if *i >= self.n || *j >= self.n {
                return Err(BenchError::InvalidParameter(format!(
                    "perturbation index ({i}, {j}) out of range"
                )));
            }
            gamma.set_entry(*i, *j, gain.clone());
        }
        Ok(MonotoneOperator::uniform(gamma, Aggregation::Sum)?)
    }
}

/// Convenience wrapper matching the instance method.
pub fn bccm_operator(instance: &BccmInstance) -> Result<MonotoneOperator, BenchError> {
    instance.operator()
}

// ---------------------------------------------------------------------------
// Suite harness
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchFamily {
    Qms,
    Bccm,
}

impl std::fmt::Display for BenchFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BenchFamily::Qms => f.write_str("qms"),
            BenchFamily::Bccm => f.write_str("bccm"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteParams {
    pub family: BenchFamily,
    pub dims: Vec<usize>,
    pub trials: u32,
    pub norm: f64,
    pub seed: u64,
    /// Worker threads for trial fan-out.
    pub jobs: usize,
    /// Chain gain parameters (ignored for the quasi-monotone family). When
    /// `zeta` is absent, 60% of the admissible window above 1 is used.
    pub theta: f64,
    pub zeta: Option<f64>,
    /// Orbit termination threshold for the decay-step count.
    pub orbit_tol: f64,
    pub max_orbit_steps: usize,
}

impl SuiteParams {
    pub fn new(family: BenchFamily, dims: Vec<usize>, trials: u32, norm: f64, seed: u64) -> Self {
        SuiteParams {
            family,
            dims,
            trials,
            norm,
            seed,
            jobs: 1,
            theta: 0.75,
            zeta: None,
            orbit_tol: 1e-9,
            max_orbit_steps: 1_000_000,
        }
    }

    fn zeta_for(&self, n: usize) -> f64 {
        self.zeta.unwrap_or_else(|| {
            let upper = self.theta.powf(-1.0 / (n as f64 - 1.0));
            1.0 + 0.6 * (upper - 1.0)
        })
    }
}

/// One solver run inside a suite.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub dim: usize,
    pub trial: u32,
    pub seed: u64,
    pub pivots: u64,
    pub refinements: u32,
    pub k_step: Option<usize>,
    pub wall_ms: f64,
    pub min_margin: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SuiteRow {
    pub dim: usize,
    pub trials: u32,
    pub failures: u32,
    pub mean_wall_ms: f64,
    pub mean_pivots: f64,
    pub mean_refinements: f64,
    pub mean_k_step: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub family: BenchFamily,
    pub norm: f64,
    pub rows: Vec<SuiteRow>,
    pub records: Vec<TrialRecord>,
}

impl SuiteReport {
    pub fn failures(&self) -> u32 {
        self.rows.iter().map(|r| r.failures).sum()
    }

    /// Text table with per-dimension averages.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "family = {}, norm = {}\n",
            self.family, self.norm
        ));
        let with_k = self.rows.iter().any(|r| r.mean_k_step.is_some());
        out.push_str(if with_k {
            "    N |  run time |  # iterations | k_step | simulations\n"
        } else {
            "    N |  run time |  # iterations | simulations\n"
        });
        for row in &self.rows {
            let time = format!("{:.4}s", row.mean_wall_ms / 1e3);
            if with_k {
                out.push_str(&format!(
                    "{:>5} | {:>9} | {:>13.1} | {:>6} | {}{}\n",
                    row.dim,
                    time,
                    row.mean_pivots,
                    row.mean_k_step.map(|k| format!("{k:.0}")).unwrap_or_default(),
                    row.trials,
                    if row.failures > 0 {
                        format!(" ({} failed)", row.failures)
                    } else {
                        String::new()
                    }
                ));
            } else {
                out.push_str(&format!(
                    "{:>5} | {:>9} | {:>13.1} | {}{}\n",
                    row.dim,
                    time,
                    row.mean_pivots,
                    row.trials,
                    if row.failures > 0 {
                        format!(" ({} failed)", row.failures)
                    } else {
                        String::new()
                    }
                ));
            }
        }
        out
    }

    /// Raw per-trial records, one comma-separated line each.
    pub fn records_csv(&self) -> String {
        let mut out = String::from("dim,trial,seed,pivots,refinements,k_step,wall_ms,min_margin,error\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.3},{:.6e},{}\n",
                r.dim,
                r.trial,
                r.seed,
                r.pivots,
                r.refinements,
                r.k_step.map(|k| k.to_string()).unwrap_or_default(),
                r.wall_ms,
                r.min_margin,
                r.error.as_deref().unwrap_or(""),
            ));
        }
        out
    }
}

/// SplitMix-style mixing for per-trial seeds.
pub fn split_seed(master: u64, dim: u64, trial: u64) -> u64 {
    let mut z = master
        .wrapping_add(dim.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(trial.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn run_trial(params: &SuiteParams, dim: usize, trial: u32) -> TrialRecord {
    let seed = split_seed(params.seed, dim as u64, trial as u64);
    let started = Instant::now();
    let mut record = TrialRecord {
        dim,
        trial,
        seed,
        pivots: 0,
        refinements: 0,
        k_step: None,
        wall_ms: 0.0,
        min_margin: f64::NAN,
        error: None,
    };
    let outcome: Result<(), String> = (|| {
        let op = match params.family {
            BenchFamily::Qms => {
                let (op, instance) = gen_qms(dim, seed).map_err(|e| e.to_string())?;
                let result = sfp_run(&op, &SfpConfig::defaults(params.norm, dim))
                    .map_err(|e| e.to_string())?;
                record.pivots = result.pivots;
                record.refinements = result.refinements;
                record.min_margin = min_margin(&result.w, &result.gamma_w);
                // Transfer certificate: (−I + P)·S⁻¹(w) ≪ 0.
                let z = s_inverse(&result.w);
                for i in 0..dim {
                    let pz: f64 = (0..dim).map(|j| instance.p[i][j] * z[j]).sum();
                    if pz >= z[i] {
                        return Err(format!(
                            "transfer certificate failed at component {i}: {pz} ≥ {}",
                            z[i]
                        ));
                    }
                }
                return Ok(());
            }
            BenchFamily::Bccm => {
                let instance = BccmInstance::chain(dim, params.theta, params.zeta_for(dim))
                    .map_err(|e| e.to_string())?;
                instance.operator().map_err(|e| e.to_string())?
            }
        };
        let result =
            sfp_run(&op, &SfpConfig::defaults(params.norm, dim)).map_err(|e| e.to_string())?;
        record.pivots = result.pivots;
        record.refinements = result.refinements;
        record.min_margin = min_margin(&result.w, &result.gamma_w);
        let path = iterate_decay(&op, &result.w, params.orbit_tol, params.max_orbit_steps)
            .map_err(|e: OmegaError| e.to_string())?;
        record.k_step = Some(path.k_step());
        Ok(())
    })();
    record.error = outcome.err();
    record.wall_ms = started.elapsed().as_secs_f64() * 1e3;
    record
}

fn min_margin(w: &[f64], gamma_w: &[f64]) -> f64 {
    w.iter()
        .zip(gamma_w)
        .map(|(a, b)| a - b)
        .fold(f64::INFINITY, f64::min)
}

/// Runs `trials` seeded solves per dimension, optionally fanned out over a
/// bounded worker pool, and aggregates per-dimension averages over the
/// successful trials. Individual failures are recorded, not fatal.
pub fn run_suite(params: &SuiteParams) -> Result<SuiteReport, SfpError> {
    if params.trials == 0 {
        return Err(SfpError::InvalidConfig("trials must be positive".into()));
    }
    if params.dims.is_empty() {
        return Err(SfpError::InvalidConfig("no dimensions given".into()));
    }
    let cells: Vec<(usize, u32)> = params
        .dims
        .iter()
        .flat_map(|&dim| (0..params.trials).map(move |t| (dim, t)))
        .collect();
    let records: Vec<TrialRecord> = if params.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(params.jobs)
            .build()
            .map_err(|e| SfpError::InvalidConfig(format!("worker pool: {e}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            cells
                .par_iter()
                .map(|&(dim, trial)| run_trial(params, dim, trial))
                .collect()
        })
    } else {
        cells
            .iter()
            .map(|&(dim, trial)| run_trial(params, dim, trial))
            .collect()
    };

    let mut rows = Vec::new();
    for &dim in &params.dims {
        let of_dim: Vec<&TrialRecord> = records.iter().filter(|r| r.dim == dim).collect();
        let ok: Vec<&&TrialRecord> = of_dim.iter().filter(|r| r.error.is_none()).collect();
        let count = ok.len().max(1) as f64;
        let k_steps: Vec<f64> = ok
            .iter()
            .filter_map(|r| r.k_step.map(|k| k as f64))
            .collect();
        rows.push(SuiteRow {
            dim,
            trials: of_dim.len() as u32,
            failures: (of_dim.len() - ok.len()) as u32,
            mean_wall_ms: ok.iter().map(|r| r.wall_ms).sum::<f64>() / count,
            mean_pivots: ok.iter().map(|r| r.pivots as f64).sum::<f64>() / count,
            mean_refinements: ok.iter().map(|r| r.refinements as f64).sum::<f64>() / count,
            mean_k_step: if k_steps.is_empty() {
                None
            } else {
                Some(k_steps.iter().sum::<f64>() / k_steps.len() as f64)
            },
        });
    }
    Ok(SuiteReport {
        family: params.family,
        norm: params.norm,
        rows,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn warp_fixes_zero_and_inverts() {
        assert_eq!(s_scalar(0.0), 0.0);
        assert_eq!(s_scalar(1.0), 1.0);
        assert!((s_scalar(2.0) - std::f64::consts::E).abs() < 1e-15);
        assert!((s_inv_scalar(std::f64::consts::E) - 2.0).abs() < 1e-15);
        assert_eq!(s_scalar(-1.0), -1.0);
        assert!((s_scalar(-2.0) + std::f64::consts::E).abs() < 1e-15);
        for &x in &[-5.0, -1.0, -0.3, 0.0, 0.7, 1.0, 4.2] {
            assert!((s_inv_scalar(s_scalar(x)) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_radius_of_known_matrices() {
        // Off-diagonal 0.5 swap matrix: eigenvalues ±0.5.
        let m = vec![vec![0.0, 0.5], vec![0.5, 0.0]];
        assert!((spectral_radius(&m) - 0.5).abs() < 1e-9);
        // Diagonal matrix: max entry.
        let d = vec![vec![0.3, 0.0], vec![0.0, 1.2]];
        assert!((spectral_radius(&d) - 1.2).abs() < 1e-9);
        // Rank-one all-ones 3x3: eigenvalue 3.
        let ones = vec![vec![1.0; 3]; 3];
        assert!((spectral_radius(&ones) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn qms_draw_is_scaled_irreducible_and_seeded() {
        let (_, a) = gen_qms(6, 42).unwrap();
        let (_, b) = gen_qms(6, 42).unwrap();
        assert_eq!(a.p, b.p);
        assert!((spectral_radius(&a.p) - 0.8).abs() < 1e-8);
        let (_, c) = gen_qms(6, 43).unwrap();
        assert!(a.p != c.p);
    }

    #[test]
    fn qms_operator_fixes_origin_and_is_linear_in_the_core() {
        let (op, instance) = gen_qms(4, 7).unwrap();
        assert_eq!(op.eval(&[0.0; 4]).unwrap(), vec![0.0; 4]);
        // For inputs small enough that both the gains and the row sums stay
        // inside [-1, 1], the warp is the identity and T(v) = P·v.
        let v = vec![0.05, 0.02, 0.03, 0.01];
        let tv = op.eval(&v).unwrap();
        for i in 0..4 {
            let pv: f64 = (0..4).map(|j| instance.p[i][j] * v[j]).sum();
            assert!((tv[i] - pv).abs() < 1e-14);
        }
    }

    #[test]
    fn monod_parameters_of_perturbed_instance() {
        let inst = BccmInstance::perturbed_3d();
        assert_eq!(inst.a_product(), 6.0);
        assert!((inst.x_star() - 1.0 / 3.0).abs() < 1e-15);
        assert!((inst.lambda() - 0.75).abs() < 1e-15);
        assert_eq!(inst.c_monod, 1.0);
        let (lo, hi) = inst.theta_window();
        assert!((lo - 0.75).abs() < 1e-15 && hi == 1.0);
        let (zlo, zhi) = inst.zeta_window();
        assert!(zlo == 1.0 && (zhi - 0.8f64.powf(-0.5)).abs() < 1e-15);
        inst.validate().unwrap();
    }

    #[test]
    fn chain_parameters_telescope() {
        let inst = BccmInstance::chain(10, 0.75, 1.02).unwrap();
        assert!((inst.a_product() - 11.0).abs() < 1e-12);
        assert!((inst.x_star() - 9.0 / 11.0).abs() < 1e-12);
        assert!((inst.lambda() - 11.0 / 20.0).abs() < 1e-12);
    }

    #[test]
    fn parameter_windows_are_enforced() {
        // θ below λ.
        assert!(BccmInstance::chain(10, 0.5, 1.01).is_err());
        // ζ above θ^{-1/(N-1)}.
        assert!(BccmInstance::chain(10, 0.75, 1.04).is_err());
        // ζ = 1 is outside the open window.
        assert!(BccmInstance::chain(10, 0.75, 1.0).is_err());
        // b ≤ a·c breaks the equilibrium.
        let mut bad = BccmInstance::perturbed_3d();
        bad.b = 5.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn perturbed_operator_pattern_matches_the_coupling_graph() {
        let op = BccmInstance::perturbed_3d().operator().unwrap();
        let gamma = op.gamma();
        let nonzero: Vec<(usize, usize)> = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|&(i, j)| !gamma.entry(i, j).is_zero())
            .collect();
        assert_eq!(
            nonzero,
            vec![(0, 0), (0, 2), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2)]
        );
        assert!(gamma.is_irreducible());
    }

    #[test]
    fn split_seed_is_stable_and_spreads() {
        assert_eq!(split_seed(1, 2, 3), split_seed(1, 2, 3));
        assert_ne!(split_seed(1, 2, 3), split_seed(1, 2, 4));
        assert_ne!(split_seed(1, 2, 3), split_seed(1, 3, 3));
        assert_ne!(split_seed(2, 2, 3), split_seed(1, 2, 3));
    }
}
