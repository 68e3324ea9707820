//! Combinatorics of closed triangulated surfaces.
//!
//! A [`TriangulatedSurface`] stores faces as unordered vertex triples and
//! derives edges, adjacency, degrees and the Euler characteristic. Building
//! one validates that the complex is a closed surface: every edge lies in
//! exactly two faces, faces are distinct non-degenerate triples, and every
//! vertex has degree at least three. No global orientation is kept; all
//! downstream formulas are orientation-free.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

/// Validation failure while building a surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeshError {
    /// The face list is empty.
    NoFaces,
    /// A face references a vertex outside `[0, vertex_count)`.
    IndexOutOfRange { face: usize, vertex: usize },
    /// A face repeats a vertex.
    DegenerateFace { face: usize },
    /// Two faces are equal as vertex sets.
    DuplicateFace { face: usize },
    /// An edge with exactly one incident face (the surface has boundary).
    BoundaryEdge { a: usize, b: usize },
    /// An edge with more than two incident faces.
    NonManifoldEdge { a: usize, b: usize, count: usize },
    /// A vertex of degree < 3 (isolated vertices included).
    LowDegree { vertex: usize, degree: usize },
}

impl fmt::Display for MeshError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshError::NoFaces => write!(f, "face list is empty"),
            MeshError::IndexOutOfRange { face, vertex } => {
                write!(f, "face {face} references out-of-range vertex {vertex}")
            }
            MeshError::DegenerateFace { face } => write!(f, "face {face} repeats a vertex"),
            MeshError::DuplicateFace { face } => write!(f, "face {face} duplicates an earlier face"),
            MeshError::BoundaryEdge { a, b } => {
                write!(f, "edge ({a},{b}) has one incident face; surface has boundary")
            }
            MeshError::NonManifoldEdge { a, b, count } => {
                write!(f, "edge ({a},{b}) has {count} incident faces")
            }
            MeshError::LowDegree { vertex, degree } => {
                write!(f, "vertex {vertex} has degree {degree} (< 3)")
            }
        }
    }
}

impl core::error::Error for MeshError {}

/// A closed triangulated surface: combinatorics only.
#[derive(Debug, Clone)]
pub struct TriangulatedSurface {
    vertex_count: usize,
    /// Faces as sorted vertex triples.
    faces: Vec<[usize; 3]>,
    /// Edges as sorted pairs, in lexicographic order.
    edges: Vec<[usize; 2]>,
    edge_index: BTreeMap<(usize, usize), usize>,
    /// The two faces flanking each edge.
    edge_faces: Vec<[usize; 2]>,
    /// Faces as sorted triples in lexicographic order, for membership tests.
    sorted_faces: Vec<[usize; 3]>,
    /// Faces incident to each vertex.
    vertex_faces: Vec<Vec<usize>>,
    /// Edges incident to each vertex, as (edge index, other endpoint), sorted
    /// by the other endpoint.
    vertex_edges: Vec<Vec<(usize, usize)>>,
    euler_characteristic: i64,
}

impl TriangulatedSurface {
    /// Builds and validates a surface from a face list over `vertex_count`
    /// vertices.
    pub fn build(vertex_count: usize, face_list: &[[usize; 3]]) -> Result<Self, MeshError> {
        if face_list.is_empty() {
            return Err(MeshError::NoFaces);
        }
        let mut faces: Vec<[usize; 3]> = Vec::with_capacity(face_list.len());
        let mut seen: BTreeMap<[usize; 3], usize> = BTreeMap::new();
        for (fi, raw) in face_list.iter().enumerate() {
            for &v in raw {
                if v >= vertex_count {
                    return Err(MeshError::IndexOutOfRange { face: fi, vertex: v });
                }
            }
            let mut tri = *raw;
            tri.sort_unstable();
            if tri[0] == tri[1] || tri[1] == tri[2] {
                return Err(MeshError::DegenerateFace { face: fi });
            }
            if seen.insert(tri, fi).is_some() {
                return Err(MeshError::DuplicateFace { face: fi });
            }
            faces.push(tri);
        }

        let mut incident: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (fi, tri) in faces.iter().enumerate() {
            for (a, b) in [(tri[0], tri[1]), (tri[0], tri[2]), (tri[1], tri[2])] {
                incident.entry((a, b)).or_default().push(fi);
            }
        }
        let mut edges = Vec::with_capacity(incident.len());
        let mut edge_faces = Vec::with_capacity(incident.len());
        let mut edge_index = BTreeMap::new();
        for (&(a, b), fl) in &incident {
            match fl.len() {
                2 => {}
                1 => return Err(MeshError::BoundaryEdge { a, b }),
                n => return Err(MeshError::NonManifoldEdge { a, b, count: n }),
            }
            edge_index.insert((a, b), edges.len());
            edges.push([a, b]);
            edge_faces.push([fl[0], fl[1]]);
        }

        let mut vertex_faces = alloc::vec![Vec::new(); vertex_count];
        for (fi, tri) in faces.iter().enumerate() {
            for &v in tri {
                vertex_faces[v].push(fi);
            }
        }
        let mut vertex_edges = alloc::vec![Vec::new(); vertex_count];
        for (ei, &[a, b]) in edges.iter().enumerate() {
            vertex_edges[a].push((ei, b));
            vertex_edges[b].push((ei, a));
        }
        for list in &mut vertex_edges {
            list.sort_unstable_by_key(|&(_, other)| other);
        }
        for (v, list) in vertex_edges.iter().enumerate() {
            let degree = list.len();
            if degree < 3 {
                return Err(MeshError::LowDegree { vertex: v, degree });
            }
        }

        let euler_characteristic =
            vertex_count as i64 - edges.len() as i64 + faces.len() as i64;
        let mut sorted_faces = faces.clone();
        sorted_faces.sort_unstable();
        Ok(Self {
            vertex_count,
            faces,
            edges,
            edge_index,
            edge_faces,
            sorted_faces,
            vertex_faces,
            vertex_edges,
            euler_characteristic,
        })
    }

    /// Builds a surface inferring the vertex count as `max index + 1`.
    pub fn from_faces(face_list: &[[usize; 3]]) -> Result<Self, MeshError> {
        let n = face_list
            .iter()
            .flat_map(|f| f.iter().copied())
            .max()
            .map_or(0, |m| m + 1);
        Self::build(n, face_list)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.euler_characteristic
    }

    /// Faces as sorted vertex triples.
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Edges as sorted pairs in lexicographic order.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Index of edge `{a, b}` in [`Self::edges`], if present.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edge_index.get(&key).copied()
    }

    /// The two faces flanking an edge.
    pub fn edge_faces(&self, edge: usize) -> [usize; 2] {
        self.edge_faces[edge]
    }

    /// Faces incident to a vertex.
    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    /// Incident edges of a vertex as `(edge index, other endpoint)`.
    pub fn vertex_edges(&self, v: usize) -> &[(usize, usize)] {
        &self.vertex_edges[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.vertex_edges[v].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.vertex_count).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    fn is_face(&self, mut tri: [usize; 3]) -> bool {
        tri.sort_unstable();
        self.sorted_faces.binary_search(&tri).is_ok()
    }
}

/// Per-edge intersection-angle weights in `[0, pi/2]`, indexed like
/// [`TriangulatedSurface::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightAssignment {
    phi: Vec<f64>,
}

/// Invalid weight input.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightError {
    OutOfRange { a: usize, b: usize, value: f64 },
    UnknownEdge { a: usize, b: usize },
    LengthMismatch { expected: usize, got: usize },
}

impl fmt::Display for WeightError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightError::OutOfRange { a, b, value } => {
                write!(f, "weight {value} on edge ({a},{b}) outside [0, pi/2]")
            }
            WeightError::UnknownEdge { a, b } => write!(f, "({a},{b}) is not an edge"),
            WeightError::LengthMismatch { expected, got } => {
                write!(f, "expected {expected} edge weights, got {got}")
            }
        }
    }
}

impl core::error::Error for WeightError {}

fn weight_in_range(phi: f64) -> bool {
    phi.is_finite() && (0.0..=core::f64::consts::FRAC_PI_2).contains(&phi)
}

impl WeightAssignment {
    /// The zero weight (every edge weight 0).
    pub fn zero(surface: &TriangulatedSurface) -> Self {
        Self { phi: alloc::vec![0.0; surface.edge_count()] }
    }

    /// The same weight on every edge.
    pub fn uniform(surface: &TriangulatedSurface, phi: f64) -> Result<Self, WeightError> {
        if !weight_in_range(phi) {
            return Err(WeightError::OutOfRange { a: 0, b: 0, value: phi });
        }
        Ok(Self { phi: alloc::vec![phi; surface.edge_count()] })
    }

    /// Weights from explicit `(i, j, phi)` entries; unlisted edges get 0.
    pub fn from_edge_values(
        surface: &TriangulatedSurface,
        values: &[(usize, usize, f64)],
    ) -> Result<Self, WeightError> {
        let mut phi = alloc::vec![0.0; surface.edge_count()];
        for &(a, b, value) in values {
            let ei = surface
                .edge_index(a, b)
                .ok_or(WeightError::UnknownEdge { a, b })?;
            if !weight_in_range(value) {
                return Err(WeightError::OutOfRange { a, b, value });
            }
            phi[ei] = value;
        }
        Ok(Self { phi })
    }

    /// Weights from a full per-edge vector in edge-index order.
    pub fn from_vec(surface: &TriangulatedSurface, phi: Vec<f64>) -> Result<Self, WeightError> {
        if phi.len() != surface.edge_count() {
            return Err(WeightError::LengthMismatch {
                expected: surface.edge_count(),
                got: phi.len(),
            });
        }
        for (ei, &p) in phi.iter().enumerate() {
            if !weight_in_range(p) {
                let [a, b] = surface.edges()[ei];
                return Err(WeightError::OutOfRange { a, b, value: p });
            }
        }
        Ok(Self { phi })
    }

    pub fn phi(&self, edge: usize) -> f64 {
        self.phi[edge]
    }

    pub fn values(&self) -> &[f64] {
        &self.phi
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// True when every weight is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.phi.iter().all(|&p| p == 0.0)
    }
}

/// A short cycle in the 1-skeleton that trips one of the combinatorial
/// obstruction thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleViolation {
    /// Vertices in cycle order (length 3 or 4).
    pub vertices: Vec<usize>,
    /// Sum of the edge weights along the cycle.
    pub weight_sum: f64,
}

/// Outcome of [`check_thurston_conditions`].
///
/// The checker is conservative: it cannot decide null-homotopy from the
/// combinatorics alone, so it flags every 3- or 4-cycle meeting the weight
/// threshold that is not a face boundary (resp. the boundary of two adjacent
/// faces). Flagged cycles may be essential loops on surfaces of negative
/// Euler characteristic, in which case they are false positives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObstructionReport {
    /// Non-facial 3-cycles with weight sum >= pi.
    pub triangle_violations: Vec<CycleViolation>,
    /// 4-cycles with weight sum >= 2*pi that do not bound two adjacent faces.
    pub quad_violations: Vec<CycleViolation>,
}

impl ObstructionReport {
    pub fn pass(&self) -> bool {
        self.triangle_violations.is_empty() && self.quad_violations.is_empty()
    }

    /// Caveat attached to every report.
    pub fn note(&self) -> &'static str {
        "conservative check: flagged cycles may be essential on surfaces with negative Euler characteristic"
    }
}

/// Checks the two combinatorial obstruction conditions for the existence of
/// a zero-curvature packing: a non-facial 3-edge loop must have weight sum
/// < pi, and a 4-edge loop that is not the boundary of two adjacent faces
/// must have weight sum < 2*pi. Cycle enumeration is exact for lengths 3 and
/// 4; no longer loops enter the conditions.
pub fn check_thurston_conditions(
    surface: &TriangulatedSurface,
    weights: &WeightAssignment,
) -> ObstructionReport {
    let mut report = ObstructionReport::default();
    let phi_of = |a: usize, b: usize| -> f64 {
        weights.phi(surface.edge_index(a, b).expect("adjacent vertices"))
    };

    // 3-cycles: edge (a,b) plus a common neighbor c > b (a < b < c canonical).
    for &[a, b] in surface.edges() {
        for &(_, c) in surface.vertex_edges(a) {
            if c <= b || surface.edge_index(b, c).is_none() {
                continue;
            }
            if surface.is_face([a, b, c]) {
                continue;
            }
            let sum = phi_of(a, b) + phi_of(b, c) + phi_of(a, c);
            if sum >= core::f64::consts::PI {
                report.triangle_violations.push(CycleViolation {
                    vertices: alloc::vec![a, b, c],
                    weight_sum: sum,
                });
            }
        }
    }

    // 4-cycles a-b-c-d with a = min and b < d canonical.
    let n = surface.vertex_count();
    for a in 0..n {
        let nbrs_a: Vec<usize> = surface.vertex_edges(a).iter().map(|&(_, v)| v).collect();
        for (bi, &b) in nbrs_a.iter().enumerate() {
            if b <= a {
                continue;
            }
            for &d in &nbrs_a[bi + 1..] {
                // b < d by the sort order of vertex_edges
                for &(_, c) in surface.vertex_edges(b) {
                    if c <= a || c == b || c == d || surface.edge_index(c, d).is_none() {
                        continue;
                    }
                    let sum = phi_of(a, b) + phi_of(b, c) + phi_of(c, d) + phi_of(d, a);
                    if sum < 2.0 * core::f64::consts::PI {
                        continue;
                    }
                    let bounds_two_faces = (surface.is_face([a, b, c])
                        && surface.is_face([a, c, d]))
                        || (surface.is_face([a, b, d]) && surface.is_face([b, c, d]));
                    if !bounds_two_faces {
                        report.quad_violations.push(CycleViolation {
                            vertices: alloc::vec![a, b, c, d],
                            weight_sum: sum,
                        });
                    }
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const TETRA: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    pub(crate) const OCTA: [[usize; 3]; 8] = [
        [0, 1, 2],
        [0, 2, 3],
        [0, 3, 4],
        [0, 4, 1],
        [5, 2, 1],
        [5, 3, 2],
        [5, 4, 3],
        [5, 1, 4],
    ];

    #[test]
    fn tetrahedron_counts() {
        let s = TriangulatedSurface::build(4, &TETRA).unwrap();
        assert_eq!(s.vertex_count(), 4);
        assert_eq!(s.edge_count(), 6);
        assert_eq!(s.face_count(), 4);
        assert_eq!(s.euler_characteristic(), 2);
        assert_eq!(s.max_degree(), 3);
    }

    #[test]
    fn octahedron_counts() {
        let s = TriangulatedSurface::build(6, &OCTA).unwrap();
        assert_eq!(s.euler_characteristic(), 2);
        for v in 0..6 {
            assert_eq!(s.degree(v), 4);
        }
    }

    #[test]
    fn handshake_identities() {
        for s in [
            TriangulatedSurface::build(4, &TETRA).unwrap(),
            TriangulatedSurface::build(6, &OCTA).unwrap(),
        ] {
            let deg_sum: usize = (0..s.vertex_count()).map(|v| s.degree(v)).sum();
            assert_eq!(deg_sum, 2 * s.edge_count());
            assert_eq!(3 * s.face_count(), 2 * s.edge_count());
        }
    }

    #[test]
    fn boundary_edge_detected() {
        let err = TriangulatedSurface::build(3, &[[0, 1, 2]]).unwrap_err();
        assert!(matches!(err, MeshError::BoundaryEdge { .. }));
    }

    #[test]
    fn degenerate_face_detected() {
        let err = TriangulatedSurface::build(3, &[[0, 0, 1]]).unwrap_err();
        assert_eq!(err, MeshError::DegenerateFace { face: 0 });
    }

    #[test]
    fn duplicate_face_detected() {
        let err = TriangulatedSurface::build(3, &[[0, 1, 2], [2, 1, 0]]).unwrap_err();
        assert_eq!(err, MeshError::DuplicateFace { face: 1 });
    }

    #[test]
    fn nonmanifold_edge_detected() {
        let faces = [[0, 1, 2], [0, 1, 3], [0, 1, 4]];
        let err = TriangulatedSurface::build(5, &faces).unwrap_err();
        assert!(matches!(err, MeshError::NonManifoldEdge { count: 3, .. }));
    }

    #[test]
    fn isolated_vertex_detected() {
        let err = TriangulatedSurface::build(5, &TETRA).unwrap_err();
        assert_eq!(err, MeshError::LowDegree { vertex: 4, degree: 0 });
    }

    #[test]
    fn out_of_range_detected() {
        let err = TriangulatedSurface::build(3, &[[0, 1, 7]]).unwrap_err();
        assert_eq!(err, MeshError::IndexOutOfRange { face: 0, vertex: 7 });
    }

    #[test]
    fn weight_range_enforced() {
        let s = TriangulatedSurface::build(4, &TETRA).unwrap();
        assert!(WeightAssignment::uniform(&s, 2.0).is_err());
        assert!(WeightAssignment::uniform(&s, -0.1).is_err());
        let w = WeightAssignment::uniform(&s, core::f64::consts::FRAC_PI_2).unwrap();
        assert!(!w.is_zero());
        assert!(WeightAssignment::zero(&s).is_zero());
        assert!(matches!(
            WeightAssignment::from_edge_values(&s, &[(0, 0, 0.1)]),
            Err(WeightError::UnknownEdge { .. })
        ));
    }

    #[test]
    fn zero_weights_pass_everywhere() {
        for s in [
            TriangulatedSurface::build(4, &TETRA).unwrap(),
            TriangulatedSurface::build(6, &OCTA).unwrap(),
        ] {
            let report = check_thurston_conditions(&s, &WeightAssignment::zero(&s));
            assert!(report.pass());
        }
    }

    #[test]
    fn tetrahedron_right_angle_weights_pass() {
        // every 3-cycle of K4 bounds a face and every 4-cycle bounds two
        // adjacent faces, so even the extreme weight passes
        let s = TriangulatedSurface::build(4, &TETRA).unwrap();
        let w = WeightAssignment::uniform(&s, core::f64::consts::FRAC_PI_2).unwrap();
        let report = check_thurston_conditions(&s, &w);
        assert!(report.triangle_violations.is_empty());
        assert!(report.quad_violations.is_empty());
    }

    #[test]
    fn octahedron_right_angle_weights_flag_equators() {
        let s = TriangulatedSurface::build(6, &OCTA).unwrap();
        let w = WeightAssignment::uniform(&s, core::f64::consts::FRAC_PI_2).unwrap();
        let report = check_thurston_conditions(&s, &w);
        assert!(report.triangle_violations.is_empty());
        // the three equatorial squares, one per antipodal pair left out
        assert_eq!(report.quad_violations.len(), 3);
        for v in &report.quad_violations {
            assert!((v.weight_sum - 2.0 * core::f64::consts::PI).abs() < 1e-15);
        }
        assert!(!report.pass());
    }
}
