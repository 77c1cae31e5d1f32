//! Tiny vector helpers shared across modules.

pub(crate) fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// a ≪ b with the given strictness margin: b_i - a_i > 0 and ≥ margin.
pub(crate) fn strictly_dominated(a: &[f64], b: &[f64], margin: f64) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| y - x > 0.0 && y - x >= margin)
}
