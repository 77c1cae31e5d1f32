//! Two-layered Freudenthal triangulation of the strip R^N × [0, 1].
//!
//! A full simplex is stored exactly as an integer base vertex plus a
//! coordinate permutation: vertex i+1 is vertex i plus the π(i)-th unit
//! vector, so the N+2 vertices are totally ordered componentwise. Real
//! coordinates are derived on demand by scaling the first N lattice axes by
//! δ and keeping the strip axis at scale 1. Storing the lattice data keeps
//! pivoting exact over arbitrarily many steps.
//!
//! The strip axis is pinned as the last lattice coordinate and bases live
//! on layer 0, so every vertex has last coordinate 0 or 1. Pivots that
//! would move a vertex outside the strip report [`TriangulationError::BoundaryExit`]
//! instead of clamping.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TriangulationError {
    #[error("degenerate location: {0}")]
    DegenerateLocation(String),
    #[error("pivot leaves the strip (vertex layer outside {{0, 1}})")]
    BoundaryExit,
    #[error("point must be strictly positive, got component {index} = {value}")]
    NonPositivePoint { index: usize, value: f64 },
    #[error("grid scale must be positive and finite, got {0}")]
    BadDelta(f64),
    #[error("vertex index {index} out of range for {count} vertices")]
    BadVertexIndex { index: usize, count: usize },
    #[error("invalid simplex data: {0}")]
    InvalidSimplex(String),
}

/// One full (N+1)-dimensional simplex of the strip triangulation.
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    /// Base vertex x¹ in lattice coordinates; last entry is the layer and
    /// must be 0.
    base: Vec<i64>,
    /// Permutation of the lattice axes 0..=N; step i adds the unit vector
    /// of axis perm[i].
    perm: Vec<usize>,
    /// Real-space scale of the first N axes.
    delta: f64,
}

impl Simplex {
    pub fn new(base: Vec<i64>, perm: Vec<usize>, delta: f64) -> Result<Self, TriangulationError> {
        let dim = base.len();
        if dim < 2 {
            return Err(TriangulationError::InvalidSimplex(
                "need at least one space axis plus the strip axis".into(),
            ));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(TriangulationError::BadDelta(delta));
        }
        if perm.len() != dim {
            return Err(TriangulationError::InvalidSimplex(format!(
                "permutation length {} does not match lattice dimension {dim}",
                perm.len()
            )));
        }
        let mut seen = vec![false; dim];
        for &axis in &perm {
            if axis >= dim || seen[axis] {
                return Err(TriangulationError::InvalidSimplex(format!(
                    "perm {perm:?} is not a permutation of 0..{dim}"
                )));
            }
            seen[axis] = true;
        }
        if *base.last().unwrap() != 0 {
            return Err(TriangulationError::InvalidSimplex(
                "base vertex must lie on layer 0".into(),
            ));
        }
        Ok(Simplex { base, perm, delta })
    }

    /// Lattice dimension N+1.
    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    /// Operator dimension N.
    pub fn space_dim(&self) -> usize {
        self.base.len() - 1
    }

    /// N+2 vertices.
    pub fn vertex_count(&self) -> usize {
        self.base.len() + 1
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn base(&self) -> &[i64] {
        &self.base
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Ordered lattice vertices x¹ < x² < … < x^{N+2}.
    pub fn lattice_vertices(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::with_capacity(self.vertex_count());
        let mut current = self.base.clone();
        out.push(current.clone());
        for &axis in &self.perm {
            current[axis] += 1;
            out.push(current.clone());
        }
        out
    }

    /// Real coordinates of a lattice point: first N axes scaled by δ, strip
    /// axis kept at scale 1.
    pub fn to_real(&self, lattice: &[i64]) -> Vec<f64> {
        let n = self.space_dim();
        lattice
            .iter()
            .enumerate()
            .map(|(axis, &x)| {
                if axis < n {
                    x as f64 * self.delta
                } else {
                    x as f64
                }
            })
            .collect()
    }

    /// Ordered real-space vertices.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        self.lattice_vertices()
            .iter()
            .map(|x| self.to_real(x))
            .collect()
    }

    /// Neighbor across the facet opposite vertex `j` (0-based), together
    /// with the index of the entering vertex in the neighbor's ordering.
    ///
    /// Replacement rules on (base, perm): dropping the first vertex
    /// advances the base along perm[0] and rotates the permutation left;
    /// dropping the last retreats the base along perm[last] and rotates
    /// right; dropping an interior vertex swaps the two adjacent axes.
    pub fn pivot(&self, j: usize) -> Result<(Simplex, usize), TriangulationError> {
        let count = self.vertex_count();
        if j >= count {
            return Err(TriangulationError::BadVertexIndex { index: j, count });
        }
        let strip_axis = self.ambient_dim() - 1;
        let mut base = self.base.clone();
        let mut perm = self.perm.clone();
        let entering;
        if j == 0 {
            let axis = perm[0];
            base[axis] += 1;
            perm.rotate_left(1);
            entering = count - 1;
        } else if j == count - 1 {
            let axis = perm[perm.len() - 1];
            base[axis] -= 1;
            perm.rotate_right(1);
            entering = 0;
        } else {
            perm.swap(j - 1, j);
            entering = j;
        }
        if base[strip_axis] != 0 {
            return Err(TriangulationError::BoundaryExit);
        }
        Ok((
            Simplex {
                base,
                perm,
                delta: self.delta,
            },
            entering,
        ))
    }

    /// The facet opposite vertex `j`.
    pub fn facet(&self, opposite: usize) -> Result<Facet, TriangulationError> {
        let count = self.vertex_count();
        if opposite >= count {
            return Err(TriangulationError::BadVertexIndex {
                index: opposite,
                count,
            });
        }
        Ok(Facet {
            parent: self.clone(),
            opposite,
        })
    }
}

/// A facet of a full strip simplex: the parent's vertices with one removed.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    pub parent: Simplex,
    pub opposite: usize,
}

impl Facet {
    pub fn lattice_vertices(&self) -> Vec<Vec<i64>> {
        let mut v = self.parent.lattice_vertices();
        v.remove(self.opposite);
        v
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let mut v = self.parent.vertices();
        v.remove(self.opposite);
        v
    }

    /// True iff every vertex lies on the given layer.
    pub fn on_layer(&self, layer: i64) -> bool {
        self.lattice_vertices()
            .iter()
            .all(|x| *x.last().unwrap() == layer)
    }
}

/// Projected mesh size of the δ-scaled triangulation: δ√N.
pub fn mesh_p(delta: f64, n: usize) -> f64 {
    delta * (n as f64).sqrt()
}

/// Finds the full strip simplex whose layer-0 facet contains (c, 0) in its
/// relative interior: base = floor(c/δ) on layer 0, permutation sorting the
/// fractional parts of c/δ strictly decreasing, strip axis last.
///
/// Points on a grid face (an integer component of c/δ, or two tied
/// fractional parts) are rejected; callers perturb and retry.
pub fn locate_simplex(c: &[f64], delta: f64) -> Result<Simplex, TriangulationError> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(TriangulationError::BadDelta(delta));
    }
    let n = c.len();
    if let Some(index) = c.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(TriangulationError::NonPositivePoint {
            index,
            value: c[index],
        });
    }
    let mut base = Vec::with_capacity(n + 1);
    let mut frac = Vec::with_capacity(n);
    for (i, &x) in c.iter().enumerate() {
        let scaled = x / delta;
        let floor = scaled.floor();
        let f = scaled - floor;
        if f == 0.0 {
            return Err(TriangulationError::DegenerateLocation(format!(
                "component {i}: {x}/{delta} is an integer"
            )));
        }
        base.push(floor as i64);
        frac.push(f);
    }
    base.push(0);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| frac[b].total_cmp(&frac[a]));
    for pair in order.windows(2) {
        if frac[pair[0]] == frac[pair[1]] {
            return Err(TriangulationError::DegenerateLocation(format!(
                "components {} and {} have equal fractional parts {}",
                pair[0], pair[1], frac[pair[0]]
            )));
        }
    }
    order.push(n);
    Simplex::new(base, order, delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simplex(base: &[i64], perm: &[usize], delta: f64) -> Simplex {
        Simplex::new(base.to_vec(), perm.to_vec(), delta).unwrap()
    }

    #[test]
    fn unit_line_vertices() {
        let s = simplex(&[0, 0], &[0, 1], 1.0);
        assert_eq!(
            s.vertices(),
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]]
        );
    }

    #[test]
    fn scaled_vertices_with_strip_step_first() {
        // Base (2, 0) at δ = 0.5 projects to 1; stepping the strip axis
        // first gives (1,0), (1,1), (1.5,1).
        let s = simplex(&[2, 0], &[1, 0], 0.5);
        assert_eq!(
            s.vertices(),
            vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![1.5, 1.0]]
        );
    }

    #[test]
    fn vertices_strictly_increase_componentwise() {
        let s = simplex(&[3, 0, 5, 0], &[2, 0, 3, 1], 0.25);
        let v = s.lattice_vertices();
        for pair in v.windows(2) {
            assert!(pair[0].iter().zip(&pair[1]).all(|(a, b)| a <= b));
            assert!(pair[0] != pair[1]);
        }
        // Layers are 0/1 and split N+2 vertices between the layers.
        let layer0 = v.iter().filter(|x| *x.last().unwrap() == 0).count();
        let layer1 = v.iter().filter(|x| *x.last().unwrap() == 1).count();
        assert_eq!(layer0 + layer1, s.vertex_count());
        assert!(layer0 >= 1 && layer1 >= 1);
    }

    #[test]
    fn locate_orders_fractional_parts_decreasing() {
        let s = locate_simplex(&[0.7, 0.3], 1.0).unwrap();
        assert_eq!(s.base(), &[0, 0, 0]);
        assert_eq!(s.perm(), &[0, 1, 2]);
    }

    #[test]
    fn locate_scales_before_flooring() {
        let s = locate_simplex(&[1.4, 0.6], 2.0).unwrap();
        assert_eq!(s.base(), &[0, 0, 0]);
        assert_eq!(s.perm(), &[0, 1, 2]);
    }

    #[test]
    fn locate_rejects_grid_points_and_ties() {
        assert!(matches!(
            locate_simplex(&[1.0, 0.3], 1.0),
            Err(TriangulationError::DegenerateLocation(_))
        ));
        assert!(matches!(
            locate_simplex(&[0.3, 0.3], 1.0),
            Err(TriangulationError::DegenerateLocation(_))
        ));
        assert!(matches!(
            locate_simplex(&[-0.5, 0.3], 1.0),
            Err(TriangulationError::NonPositivePoint { index: 0, .. })
        ));
    }

    #[test]
    fn pivot_drop_first_vertex_of_unit_cell() {
        let s = simplex(&[0, 0], &[0, 1], 1.0);
        let (t, entering) = s.pivot(0).unwrap();
        assert_eq!(t.base(), &[1, 0]);
        assert_eq!(t.perm(), &[1, 0]);
        assert_eq!(entering, 2);
        // Shared facet: both contain (1,0) and (1,1).
        let tv = t.vertices();
        assert!(tv.contains(&vec![1.0, 0.0]) && tv.contains(&vec![1.0, 1.0]));
    }

    #[test]
    fn pivot_roundtrip_through_entering_vertex() {
        let s = simplex(&[4, 7, 0], &[1, 2, 0], 0.5);
        for j in 0..s.vertex_count() {
            match s.pivot(j) {
                Ok((t, entering)) => {
                    let (back, _) = t.pivot(entering).unwrap();
                    assert_eq!(back, s, "pivot at {j} is not an involution");
                }
                Err(TriangulationError::BoundaryExit) => {}
                Err(e) => panic!("unexpected error {e:?}"),
            }
        }
    }

    #[test]
    fn pivot_exits_strip_at_top_and_bottom() {
        // Vertices (0,0), (0,1), (1,1): dropping the base steps the strip
        // axis past layer 1.
        let s = simplex(&[0, 0], &[1, 0], 1.0);
        assert_eq!(s.pivot(0), Err(TriangulationError::BoundaryExit));
        // Dropping the last vertex of (0,0),(1,0),(1,1) retreats below 0.
        let s = simplex(&[0, 0], &[0, 1], 1.0);
        assert_eq!(s.pivot(2), Err(TriangulationError::BoundaryExit));
    }

    #[test]
    fn shared_facet_has_all_but_one_vertex_in_common() {
        let s = simplex(&[2, 1, 3, 0], &[2, 0, 3, 1], 1.0);
        for j in 0..s.vertex_count() {
            if let Ok((t, entering)) = s.pivot(j) {
                let sv = s.lattice_vertices();
                let tv = t.lattice_vertices();
                let shared = sv.iter().filter(|v| tv.contains(v)).count();
                assert_eq!(shared, s.vertex_count() - 1, "pivot at {j}");
                assert!(!sv.contains(&tv[entering]));
            }
        }
    }

    #[test]
    fn mesh_p_is_delta_sqrt_n() {
        assert_eq!(mesh_p(1.0, 4), 2.0);
        assert_eq!(mesh_p(0.5, 1), 0.5);
        let delta = 24.0 / 3.0;
        assert!((mesh_p(delta, 3) - 8.0 * 3.0_f64.sqrt()).abs() < 1e-12);
        assert!((mesh_p(delta, 3) - 13.8564).abs() < 1e-3);
    }

    #[test]
    fn facet_opposite_strips_one_vertex() {
        let s = simplex(&[0, 0, 0], &[0, 1, 2], 1.0);
        let f = s.facet(3).unwrap();
        assert_eq!(f.lattice_vertices().len(), 3);
        assert!(f.on_layer(0));
        let top = s.facet(0).unwrap();
        assert!(!top.on_layer(0) && !top.on_layer(1));
    }
}
