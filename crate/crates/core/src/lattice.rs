//! Discretized rectangle `(0, L) x (0, 1)` sampled on the mesh `delta * Z^2`.
//!
//! Vertices are the mesh points strictly inside the open rectangle. In lattice
//! units the vertex at grid position `(i, j)`, `1 <= i <= nx`, `1 <= j <= ny`,
//! sits at `(i * delta, j * delta)` and has id `(j - 1) * nx + (i - 1)`.
//!
//! The boundary `∂V` is the outer frame of this grid (vertices with a neighbor
//! outside the rectangle). It is cut into four half-open arcs, traversed
//! counter-clockwise starting from the corner `b` nearest the origin:
//!
//! ```text
//!   a ◄────── TOP ─────── d
//!   │                     ▲
//!  LEFT                 RIGHT
//!   ▼                     │
//!   b ─────── BOTTOM ───► c
//! ```
//!
//! Each arc contains the corner it starts from and excludes the one it ends at.

use std::fmt;

use crate::error::LatticeError;

pub type VertexId = usize;
pub type EdgeId = usize;

/// One of the four boundary arcs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arc {
    /// `[a, b)`
    Left,
    /// `[b, c)`
    Bottom,
    /// `[c, d)`
    Right,
    /// `[d, a)`
    Top,
}

impl Arc {
    pub const ALL: [Arc; 4] = [Arc::Left, Arc::Bottom, Arc::Right, Arc::Top];
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Arc::Left => "LEFT",
            Arc::Bottom => "BOTTOM",
            Arc::Right => "RIGHT",
            Arc::Top => "TOP",
        };
        f.write_str(s)
    }
}

/// Selects a boundary arc or one of the two inner arcs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArcSelector {
    Left,
    Bottom,
    Right,
    Top,
    /// Interior vertices adjacent to the LEFT arc.
    InnerLeft,
    /// Interior vertices adjacent to the RIGHT arc.
    InnerRight,
}

impl From<Arc> for ArcSelector {
    fn from(arc: Arc) -> Self {
        match arc {
            Arc::Left => ArcSelector::Left,
            Arc::Bottom => ArcSelector::Bottom,
            Arc::Right => ArcSelector::Right,
            Arc::Top => ArcSelector::Top,
        }
    }
}

/// The four corners of the vertex frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Corners {
    /// Top-left.
    pub a: VertexId,
    /// Bottom-left, nearest the origin.
    pub b: VertexId,
    /// Bottom-right.
    pub c: VertexId,
    /// Top-right.
    pub d: VertexId,
}

/// The lattice `V_delta` with its boundary arcs and nearest-neighbor edges.
///
/// Immutable once built.
#[derive(Debug, Clone)]
pub struct LatticeRect {
    width: f64,
    delta: f64,
    nx: usize,
    ny: usize,
    corners: Corners,
    arc_of: Vec<Option<Arc>>,
    interior_index: Vec<Option<usize>>,
    interior_vertices: Vec<VertexId>,
    edges: Vec<(VertexId, VertexId)>,
}

/// Number of mesh points `k * delta` (k >= 1) strictly below `extent`.
fn points_strictly_inside(extent: f64, delta: f64) -> usize {
    let ratio = extent / delta;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
        nearest as usize - 1
    } else {
        ratio.floor() as usize
    }
}

impl LatticeRect {
    /// Builds `V_delta` for the rectangle `(0, width) x (0, 1)`.
    ///
    /// Requires `0 < delta <= min(width, 1) / 3`.
    pub fn new(width: f64, delta: f64) -> Result<Self, LatticeError> {
        if !(width.is_finite() && width > 0.0) {
            return Err(LatticeError::NonPositiveWidth(width));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(LatticeError::NonPositiveMesh(delta));
        }
        let max_delta = width.min(1.0) / 3.0;
        if delta > max_delta * (1.0 + 1e-12) {
            return Err(LatticeError::MeshTooCoarse { delta, max_delta });
        }

        let nx = points_strictly_inside(width, delta);
        let ny = points_strictly_inside(1.0, delta);
        debug_assert!(nx >= 2 && ny >= 2);

        let id = |i: usize, j: usize| (j - 1) * nx + (i - 1);
        let corners = Corners {
            a: id(1, ny),
            b: id(1, 1),
            c: id(nx, 1),
            d: id(nx, ny),
        };

        let n = nx * ny;
        let mut arc_of = vec![None; n];
        for i in 1..nx {
            arc_of[id(i, 1)] = Some(Arc::Bottom);
        }
        for j in 1..ny {
            arc_of[id(nx, j)] = Some(Arc::Right);
        }
        for i in 2..=nx {
            arc_of[id(i, ny)] = Some(Arc::Top);
        }
        for j in 2..=ny {
            arc_of[id(1, j)] = Some(Arc::Left);
        }

        let mut interior_index = vec![None; n];
        let mut interior_vertices = Vec::new();
        for (v, slot) in interior_index.iter_mut().enumerate() {
            if arc_of[v].is_none() {
                *slot = Some(interior_vertices.len());
                interior_vertices.push(v);
            }
        }

        let mut edges = Vec::with_capacity(ny * (nx - 1) + nx * (ny - 1));
        for j in 1..=ny {
            for i in 1..nx {
                edges.push((id(i, j), id(i + 1, j)));
            }
        }
        for j in 1..ny {
            for i in 1..=nx {
                edges.push((id(i, j), id(i, j + 1)));
            }
        }

        Ok(Self {
            width,
            delta,
            nx,
            ny,
            corners,
            arc_of,
            interior_index,
            interior_vertices,
            edges,
        })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of vertex columns.
    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Number of vertex rows.
    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Columns of the interior grid.
    pub fn interior_nx(&self) -> usize {
        self.nx.saturating_sub(2)
    }

    /// Rows of the interior grid.
    pub fn interior_ny(&self) -> usize {
        self.ny.saturating_sub(2)
    }

    pub fn num_vertices(&self) -> usize {
        self.nx * self.ny
    }

    pub fn num_interior(&self) -> usize {
        self.interior_vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn corners(&self) -> Corners {
        self.corners
    }

    /// Vertex id of grid position `(i, j)` (1-based).
    pub fn vertex(&self, i: usize, j: usize) -> VertexId {
        debug_assert!((1..=self.nx).contains(&i) && (1..=self.ny).contains(&j));
        (j - 1) * self.nx + (i - 1)
    }

    /// Grid position `(i, j)` (1-based) of a vertex.
    pub fn grid_pos(&self, v: VertexId) -> (usize, usize) {
        (v % self.nx + 1, v / self.nx + 1)
    }

    /// Physical coordinates `(i * delta, j * delta)`.
    pub fn coords(&self, v: VertexId) -> (f64, f64) {
        let (i, j) = self.grid_pos(v);
        (i as f64 * self.delta, j as f64 * self.delta)
    }

    pub fn arc_of(&self, v: VertexId) -> Option<Arc> {
        self.arc_of[v]
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.arc_of[v].is_some()
    }

    /// Position of `v` in the row-major interior ordering, if interior.
    pub fn interior_index(&self, v: VertexId) -> Option<usize> {
        self.interior_index[v]
    }

    /// Interior vertices in row-major order.
    pub fn interior_vertices(&self) -> &[VertexId] {
        &self.interior_vertices
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e]
    }

    /// Id of the edge from `(i, j)` to `(i + 1, j)`.
    pub fn horizontal_edge(&self, i: usize, j: usize) -> EdgeId {
        debug_assert!(i < self.nx);
        (j - 1) * (self.nx - 1) + (i - 1)
    }

    /// Id of the edge from `(i, j)` to `(i, j + 1)`.
    pub fn vertical_edge(&self, i: usize, j: usize) -> EdgeId {
        debug_assert!(j < self.ny);
        self.ny * (self.nx - 1) + (j - 1) * self.nx + (i - 1)
    }

    /// Nearest neighbors of `v` inside the lattice.
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        let (i, j) = self.grid_pos(v);
        let nx = self.nx;
        let ny = self.ny;
        [
            (i > 1).then(|| v - 1),
            (i < nx).then(|| v + 1),
            (j > 1).then(|| v - nx),
            (j < ny).then(|| v + nx),
        ]
        .into_iter()
        .flatten()
    }

    /// Edges incident to `v`, paired with the opposite endpoint.
    pub fn incident_edges(&self, v: VertexId) -> impl Iterator<Item = (EdgeId, VertexId)> + '_ {
        let (i, j) = self.grid_pos(v);
        let nx = self.nx;
        let ny = self.ny;
        [
            (i > 1).then(|| (self.horizontal_edge(i - 1, j), v - 1)),
            (i < nx).then(|| (self.horizontal_edge(i, j), v + 1)),
            (j > 1).then(|| (self.vertical_edge(i, j - 1), v - nx)),
            (j < ny).then(|| (self.vertical_edge(i, j), v + nx)),
        ]
        .into_iter()
        .flatten()
    }

    /// Vertices of the requested arc in counter-clockwise order.
    pub fn arc_vertices(&self, which: ArcSelector) -> Vec<VertexId> {
        let (nx, ny) = (self.nx, self.ny);
        match which {
            ArcSelector::Bottom => (1..nx).map(|i| self.vertex(i, 1)).collect(),
            ArcSelector::Right => (1..ny).map(|j| self.vertex(nx, j)).collect(),
            ArcSelector::Top => (2..=nx).rev().map(|i| self.vertex(i, ny)).collect(),
            ArcSelector::Left => (2..=ny).rev().map(|j| self.vertex(1, j)).collect(),
            ArcSelector::InnerLeft => self.inner_arc(Arc::Left, (2..ny).rev().map(|j| (2, j))),
            ArcSelector::InnerRight => self.inner_arc(Arc::Right, (2..ny).map(|j| (nx - 1, j))),
        }
    }

    fn inner_arc(
        &self,
        arc: Arc,
        candidates: impl Iterator<Item = (usize, usize)>,
    ) -> Vec<VertexId> {
        candidates
            .map(|(i, j)| self.vertex(i, j))
            .filter(|&v| !self.is_boundary(v))
            .filter(|&v| self.neighbors(v).any(|u| self.arc_of(u) == Some(arc)))
            .collect()
    }

    /// The whole boundary, counter-clockwise from `b`.
    pub fn boundary_vertices(&self) -> Vec<VertexId> {
        [Arc::Bottom, Arc::Right, Arc::Top, Arc::Left]
            .into_iter()
            .flat_map(|arc| self.arc_vertices(arc.into()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn smallest_square() {
        let lat = LatticeRect::new(1.0, 0.25).unwrap();
        assert_eq!((lat.nx(), lat.ny()), (3, 3));
        assert_eq!(lat.num_interior(), 1);
        assert_eq!(lat.boundary_vertices().len(), 8);
        for arc in Arc::ALL {
            assert!(!lat.arc_vertices(arc.into()).is_empty());
        }
        assert_eq!(lat.interior_vertices(), &[lat.vertex(2, 2)]);
    }

    #[test]
    fn wide_rectangle_counts() {
        let lat = LatticeRect::new(2.0, 1.0 / 3.0).unwrap();
        assert_eq!((lat.nx(), lat.ny()), (5, 2));
        let (x, y) = lat.coords(lat.corners().b);
        assert!((x - 1.0 / 3.0).abs() < 1e-15 && (y - 1.0 / 3.0).abs() < 1e-15);
        // [c, d) with ny = 2 holds c only.
        assert_eq!(lat.arc_vertices(ArcSelector::Right), vec![lat.corners().c]);
        assert_eq!(lat.num_interior(), 0);
    }

    #[test]
    fn rejects_coarse_or_bad_mesh() {
        assert!(matches!(
            LatticeRect::new(1.0, 0.5),
            Err(LatticeError::MeshTooCoarse { .. })
        ));
        assert!(LatticeRect::new(1.0, 0.0).is_err());
        assert!(LatticeRect::new(-1.0, 0.1).is_err());
        assert!(LatticeRect::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn non_integral_ratio_uses_floor() {
        let lat = LatticeRect::new(1.0, 0.3).unwrap();
        assert_eq!((lat.nx(), lat.ny()), (3, 3));
        let lat = LatticeRect::new(2.5, 0.2).unwrap();
        assert_eq!((lat.nx(), lat.ny()), (12, 4));
    }

    #[test]
    fn left_arc_runs_from_a_down_to_b_exclusive() {
        let lat = LatticeRect::new(1.0, 0.25).unwrap();
        let c = lat.corners();
        assert_eq!(lat.arc_vertices(ArcSelector::Left), vec![c.a, lat.vertex(1, 2)]);
        assert_eq!(lat.arc_vertices(ArcSelector::Bottom)[0], c.b);
        assert_eq!(lat.arc_vertices(ArcSelector::Right)[0], c.c);
        assert_eq!(lat.arc_vertices(ArcSelector::Top)[0], c.d);
    }

    #[test]
    fn inner_arcs_touch_their_arc() {
        for &(w, d) in &[(1.0, 0.25), (2.0, 0.125), (1.5, 0.1), (0.5, 0.05)] {
            let lat = LatticeRect::new(w, d).unwrap();
            for (sel, arc) in [(ArcSelector::InnerLeft, Arc::Left), (ArcSelector::InnerRight, Arc::Right)] {
                let inner = lat.arc_vertices(sel);
                assert_eq!(inner.len(), lat.interior_ny());
                for v in inner {
                    assert!(!lat.is_boundary(v));
                    assert!(lat.neighbors(v).any(|u| lat.arc_of(u) == Some(arc)));
                }
            }
        }
    }

    #[test]
    fn arcs_partition_boundary() {
        for &w in &[0.5f64, 1.0, 1.3, 2.0, 3.7] {
            for k in 3..=20 {
                let d = w.min(1.0) / k as f64;
                let lat = LatticeRect::new(w, d).unwrap();
                let mut seen = HashSet::new();
                let mut total = 0;
                for arc in Arc::ALL {
                    for v in lat.arc_vertices(arc.into()) {
                        assert_eq!(lat.arc_of(v), Some(arc));
                        assert!(seen.insert(v));
                        total += 1;
                    }
                }
                let frame = (0..lat.num_vertices())
                    .filter(|&v| {
                        let (i, j) = lat.grid_pos(v);
                        i == 1 || j == 1 || i == lat.nx() || j == lat.ny()
                    })
                    .count();
                assert_eq!(total, frame);
                assert_eq!(total + lat.num_interior(), lat.num_vertices());
            }
        }
    }

    #[test]
    fn boundary_walk_is_counter_clockwise_and_adjacent() {
        let lat = LatticeRect::new(1.7, 0.1).unwrap();
        let walk = lat.boundary_vertices();
        assert_eq!(walk[0], lat.corners().b);
        for pair in walk.windows(2).chain(std::iter::once(&[walk[walk.len() - 1], walk[0]][..])) {
            let (i0, j0) = lat.grid_pos(pair[0]);
            let (i1, j1) = lat.grid_pos(pair[1]);
            assert_eq!(i0.abs_diff(i1) + j0.abs_diff(j1), 1);
        }
    }

    #[test]
    fn edges_match_brute_force_adjacency() {
        for nx in 3..=20usize {
            for ny in [3usize, 7, 20] {
                let w = nx as f64 + 1.0;
                let lat = LatticeRect::new(w / (ny as f64 + 1.0), 1.0 / (ny as f64 + 1.0)).unwrap();
                assert_eq!((lat.nx(), lat.ny()), (nx, ny));
                let mut brute = HashSet::new();
                for u in 0..lat.num_vertices() {
                    for v in (u + 1)..lat.num_vertices() {
                        let (i0, j0) = lat.grid_pos(u);
                        let (i1, j1) = lat.grid_pos(v);
                        if i0.abs_diff(i1) + j0.abs_diff(j1) == 1 {
                            brute.insert((u, v));
                        }
                    }
                }
                let listed: HashSet<_> = lat.edges().iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
                assert_eq!(listed.len(), lat.num_edges());
                assert_eq!(listed, brute);
            }
        }
    }

    #[test]
    fn edge_ids_are_consistent() {
        let lat = LatticeRect::new(1.3, 0.1).unwrap();
        for v in 0..lat.num_vertices() {
            for (e, u) in lat.incident_edges(v) {
                let (p, q) = lat.edge(e);
                assert!((p, q) == (u, v) || (p, q) == (v, u));
            }
            assert_eq!(lat.incident_edges(v).count(), lat.neighbors(v).count());
        }
    }

    #[test]
    fn mirror_swaps_left_and_right() {
        let lat = LatticeRect::new(1.4, 0.1).unwrap();
        let mirror = |v: VertexId| {
            let (i, j) = lat.grid_pos(v);
            lat.vertex(lat.nx() + 1 - i, j)
        };
        let left: HashSet<_> = lat.arc_vertices(ArcSelector::Left).into_iter().map(mirror).collect();
        let right: HashSet<_> = lat.arc_vertices(ArcSelector::Right).into_iter().collect();
        assert_eq!(left.len(), right.len());
        // Half-open arcs disagree only at the corners.
        let c = lat.corners();
        let corners: HashSet<_> = [c.c, c.d].into_iter().collect();
        assert!(left.symmetric_difference(&right).all(|v| corners.contains(v)));

        let inner_l: HashSet<_> = lat.arc_vertices(ArcSelector::InnerLeft).into_iter().map(mirror).collect();
        let inner_r: HashSet<_> = lat.arc_vertices(ArcSelector::InnerRight).into_iter().collect();
        assert_eq!(inner_l, inner_r);

        let mirrored: HashSet<_> = lat
            .edges()
            .iter()
            .map(|&(u, v)| {
                let (p, q) = (mirror(u), mirror(v));
                (p.min(q), p.max(q))
            })
            .collect();
        assert_eq!(mirrored.len(), lat.num_edges());
    }
}
