//! Ω-paths and composite Lyapunov values built from a decay point.
//!
//! Iterating the operator from a decay point w gives a strictly decreasing
//! orbit w, Γ_μ(w), Γ_μ²(w), …; interpolating the orbit linearly over the
//! breakpoints r = 1/k yields a continuous, componentwise strictly
//! increasing path σ from 0 to w that stays inside the decay set. The
//! componentwise inverses of σ aggregate subsystem Lyapunov values into the
//! composite value max_i σ_i⁻¹(V_i).

use thiserror::Error;

use crate::gains::{GainError, MonotoneOperator};
use crate::util::euclidean_norm;

#[derive(Debug, Error)]
pub enum OmegaError {
    #[error(
        "not a decay point: component {index} has image {image} ≥ value {value}"
    )]
    NotDecayPoint {
        index: usize,
        value: f64,
        image: f64,
    },
    #[error(
        "orbit did not reach the tolerance after {iterations} steps \
         (last norms {previous:.3e}, {current:.3e}); the orbit limit may be nonzero"
    )]
    NoConvergence {
        iterations: usize,
        previous: f64,
        current: f64,
    },
    #[error("strict orbit decrease failed at step {step}, component {index}")]
    DecreaseStalled { step: usize, index: usize },
    #[error("value {value} out of range for component {index}: path tops out at {max}")]
    OutOfRange {
        index: usize,
        value: f64,
        max: f64,
    },
    #[error("path parameter {0} outside [0, 1]")]
    BadParameter(f64),
    #[error("component index {index} out of range for dimension {dim}")]
    BadIndex { index: usize, dim: usize },
    #[error(transparent)]
    Operator(#[from] GainError),
}

/// The stored orbit [w, Γ_μ(w), …, Γ_μ^K(w)] with ‖Γ_μ^K(w)‖ < tol, plus
/// the interpolated path σ and its componentwise inverses.
#[derive(Clone, Debug)]
pub struct OmegaPath {
    points: Vec<Vec<f64>>,
    tol: f64,
    n: usize,
}

/// Iterates the operator from a verified decay point until the orbit norm
/// drops below `tol` (or errors out after `max_k` steps).
pub fn iterate_decay(
    op: &MonotoneOperator,
    w: &[f64],
    tol: f64,
    max_k: usize,
) -> Result<OmegaPath, OmegaError> {
    let image = op.eval(w)?;
    for (index, (&value, &image_i)) in w.iter().zip(&image).enumerate() {
        if image_i >= value {
            return Err(OmegaError::NotDecayPoint {
                index,
                value,
                image: image_i,
            });
        }
    }
    let n = w.len();
    let mut points = vec![w.to_vec()];
    let mut current = image;
    loop {
        // Strict decrease of the whole orbit, not just the first step.
        let previous = points.last().unwrap();
        if let Some(index) = (0..n).find(|&d| current[d] >= previous[d]) {
            return Err(OmegaError::DecreaseStalled {
                step: points.len(),
                index,
            });
        }
        points.push(current.clone());
        if euclidean_norm(&current) < tol {
            break;
        }
        if points.len() > max_k {
            let previous = euclidean_norm(&points[points.len() - 2]);
            return Err(OmegaError::NoConvergence {
                iterations: points.len() - 1,
                previous,
                current: euclidean_norm(&current),
            });
        }
        current = op.eval(&current)?;
    }
    Ok(OmegaPath { points, tol, n })
}

impl OmegaPath {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// The orbit points, starting at the decay point itself.
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// First k with ‖Γ_μ^k(w)‖ < tol.
    pub fn k_step(&self) -> usize {
        self.points.len() - 1
    }

    pub fn decay_point(&self) -> &[f64] {
        &self.points[0]
    }

    /// The interpolated path: σ(0) = 0, σ(1/k) = Γ_μ^{k−1}(w), affine in
    /// between:
    ///
    /// ```text
    /// σ(r) = (k²+k) ([1/k − r] Γ_μ^k(w) + [r − 1/(k+1)] Γ_μ^{k−1}(w))
    /// ```
    ///
    /// for r in (1/(k+1), 1/k]. Below the stored orbit (r < 1/(K+1)) the
    /// tail is one affine piece from 0 to Γ_μ^K(w); the truncation error is
    /// below `tol`.
    pub fn sigma(&self, r: f64) -> Result<Vec<f64>, OmegaError> {
        if !(0.0..=1.0).contains(&r) || r.is_nan() {
            return Err(OmegaError::BadParameter(r));
        }
        if r == 0.0 {
            return Ok(vec![0.0; self.n]);
        }
        let last = self.points.len() - 1; // K
        if r <= 1.0 / (last as f64 + 1.0) {
            let scale = r * (last as f64 + 1.0);
            return Ok(self.points[last].iter().map(|x| x * scale).collect());
        }
        let k = ((1.0 / r).floor() as usize).clamp(1, last);
        let kf = k as f64;
        let weight = kf * kf + kf;
        let lower = (1.0 / kf - r) * weight;
        let upper = (r - 1.0 / (kf + 1.0)) * weight;
        Ok(self.points[k]
            .iter()
            .zip(&self.points[k - 1])
            .map(|(a, b)| lower * a + upper * b)
            .collect())
    }

    /// One component of σ.
    pub fn sigma_component(&self, i: usize, r: f64) -> Result<f64, OmegaError> {
        self.check_index(i)?;
        Ok(self.sigma(r)?[i])
    }

    /// Inverse of the strictly increasing component function σ_i, found by
    /// locating the breakpoint interval and inverting the affine piece in
    /// closed form.
    pub fn sigma_inverse(&self, i: usize, value: f64) -> Result<f64, OmegaError> {
        self.check_index(i)?;
        let w_i = self.points[0][i];
        if !(0.0..=w_i).contains(&value) || value.is_nan() {
            return Err(OmegaError::OutOfRange {
                index: i,
                value,
                max: w_i,
            });
        }
        if value == 0.0 {
            return Ok(0.0);
        }
        let last = self.points.len() - 1;
        if value < self.points[last][i] {
            // Tail piece: σ_i(r) = r (K+1) Γ_μ^K(w)_i on (0, 1/(K+1)].
            return Ok(value / ((last as f64 + 1.0) * self.points[last][i]));
        }
        // Breakpoint values σ_i(1/k) = points[k−1][i] decrease in k; binary
        // search for the piece with points[k][i] ≤ value ≤ points[k−1][i].
        let (mut lo, mut hi) = (1usize, last);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.points[mid][i] <= value {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let k = lo;
        let kf = k as f64;
        let a = self.points[k][i]; // σ_i at r = 1/(k+1)
        let b = self.points[k - 1][i]; // σ_i at r = 1/k
        let slope = (kf * kf + kf) * (b - a);
        Ok(1.0 / (kf + 1.0) + (value - a) / slope)
    }

    /// Composite Lyapunov value max_i σ_i⁻¹(values[i]).
    pub fn lyapunov_value(&self, values: &[f64]) -> Result<f64, OmegaError> {
        if values.len() != self.n {
            return Err(OmegaError::Operator(GainError::DimensionMismatch {
                expected: self.n,
                got: values.len(),
            }));
        }
        let mut best = 0.0_f64;
        for (i, &value) in values.iter().enumerate() {
            best = best.max(self.sigma_inverse(i, value)?);
        }
        Ok(best)
    }

    fn check_index(&self, i: usize) -> Result<(), OmegaError> {
        if i >= self.n {
            return Err(OmegaError::BadIndex {
                index: i,
                dim: self.n,
            });
        }
        Ok(())
    }
}

/// Samples the straight segment t·w on a parameter grid and reports every t
/// where the segment leaves the decay set, i.e. Γ_μ(t·w) ≪ t·w fails. The
/// interpolated path exists precisely because this list is usually
/// nonempty.
pub fn straight_line_violations(
    op: &MonotoneOperator,
    w: &[f64],
    grid: &[f64],
) -> Result<Vec<f64>, OmegaError> {
    let mut violations = Vec::new();
    for &t in grid {
        let point: Vec<f64> = w.iter().map(|x| x * t).collect();
        let image = op.eval(&point)?;
        if !image.iter().zip(&point).all(|(g, s)| g < s) {
            violations.push(t);
        }
    }
    Ok(violations)
}
