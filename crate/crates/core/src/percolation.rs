//! Crossing events, first-passage sets, closed pivotal edges and the discrete
//! level line.

use std::collections::VecDeque;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::PercolationError;
use crate::gff::Field;
use crate::lattice::{Arc, ArcSelector, EdgeId, LatticeRect, VertexId};
use crate::metric::EdgeStates;
use crate::union_find::UnionFind;

/// Which crossing event to decide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CrossingMode {
    /// `phi >= 0` vertex path from LEFT to RIGHT.
    DiscreteAlt,
    /// `phi > 0` interior vertex path from INNER_LEFT to INNER_RIGHT.
    DiscreteZero,
    /// Open-edge path from LEFT to RIGHT.
    MetricAlt,
    /// Open path of interior-interior edges from INNER_LEFT to INNER_RIGHT.
    MetricZero,
}

impl CrossingMode {
    pub const ALL: [CrossingMode; 4] = [
        CrossingMode::DiscreteAlt,
        CrossingMode::DiscreteZero,
        CrossingMode::MetricAlt,
        CrossingMode::MetricZero,
    ];

    pub fn is_metric(self) -> bool {
        matches!(self, CrossingMode::MetricAlt | CrossingMode::MetricZero)
    }

    pub fn name(self) -> &'static str {
        match self {
            CrossingMode::DiscreteAlt => "discrete_alt",
            CrossingMode::DiscreteZero => "discrete_zero",
            CrossingMode::MetricAlt => "metric_alt",
            CrossingMode::MetricZero => "metric_zero",
        }
    }

    fn arcs(self) -> (ArcSelector, ArcSelector) {
        match self {
            CrossingMode::DiscreteAlt | CrossingMode::MetricAlt => (ArcSelector::Left, ArcSelector::Right),
            CrossingMode::DiscreteZero | CrossingMode::MetricZero => {
                (ArcSelector::InnerLeft, ArcSelector::InnerRight)
            }
        }
    }
}

impl fmt::Display for CrossingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CrossingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        CrossingMode::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| format!("unknown crossing mode '{s}'"))
    }
}

/// Input to [`crossing`]: a vertex field for discrete modes, edge states for metric ones.
#[derive(Debug, Clone, Copy)]
pub enum CrossingInput<'a> {
    Field(&'a Field),
    Edges(&'a EdgeStates),
}

pub fn crossing(lat: &LatticeRect, input: CrossingInput<'_>, mode: CrossingMode) -> Result<bool, PercolationError> {
    match (input, mode.is_metric()) {
        (CrossingInput::Field(f), false) => discrete_crossing(lat, f, mode),
        (CrossingInput::Edges(w), true) => metric_crossing(lat, w, mode),
        (_, metric) => Err(PercolationError::ModeMismatch {
            mode: mode.to_string(),
            expected: if metric { "edge states" } else { "field" },
        }),
    }
}

fn check_field(lat: &LatticeRect, field: &Field) -> Result<(), PercolationError> {
    if field.len() != lat.num_vertices() {
        return Err(PercolationError::SizeMismatch { expected: lat.num_vertices(), got: field.len() });
    }
    Ok(())
}

fn check_edges(lat: &LatticeRect, edges: &EdgeStates) -> Result<(), PercolationError> {
    if edges.len() != lat.num_edges() {
        return Err(PercolationError::SizeMismatch { expected: lat.num_edges(), got: edges.len() });
    }
    Ok(())
}

/// Breadth-first search from `sources` over vertices accepted by `allowed`.
fn flood(lat: &LatticeRect, sources: &[VertexId], allowed: impl Fn(VertexId) -> bool) -> Vec<bool> {
    let mut seen = vec![false; lat.num_vertices()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if allowed(s) && !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for u in lat.neighbors(v) {
            if !seen[u] && allowed(u) {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    seen
}

/// Discrete crossing by BFS. `DiscreteAlt` uses `phi >= 0` over all vertices;
/// `DiscreteZero` uses `phi > 0` over interior vertices. When the interior is a
/// single column the inner arcs coincide and the crossing holds trivially.
pub fn discrete_crossing(lat: &LatticeRect, field: &Field, mode: CrossingMode) -> Result<bool, PercolationError> {
    check_field(lat, field)?;
    let phi = field.values();
    let (from, to) = mode.arcs();
    let sources = lat.arc_vertices(from);
    let targets = lat.arc_vertices(to);
    // A vertex on both arcs is a crossing of length zero, as in the metric modes.
    if sources.iter().any(|v| targets.contains(v)) {
        return Ok(true);
    }
    let reached = match mode {
        CrossingMode::DiscreteAlt => flood(lat, &sources, |v| phi[v] >= 0.0),
        CrossingMode::DiscreteZero => flood(lat, &sources, |v| !lat.is_boundary(v) && phi[v] > 0.0),
        _ => {
            return Err(PercolationError::ModeMismatch { mode: mode.to_string(), expected: "edge states" });
        }
    };
    Ok(targets.into_iter().any(|v| reached[v]))
}

/// Union-find over open edges plus two virtual terminals.
struct Clusters {
    uf: UnionFind,
    source: usize,
    target: usize,
}

impl Clusters {
    fn build(lat: &LatticeRect, edges: &EdgeStates, mode: CrossingMode) -> Self {
        let n = lat.num_vertices();
        let (source, target) = (n, n + 1);
        let mut uf = UnionFind::new(n + 2);
        let interior_only = mode == CrossingMode::MetricZero;
        for (e, &(u, v)) in lat.edges().iter().enumerate() {
            if edges.is_open(e) && !(interior_only && (lat.is_boundary(u) || lat.is_boundary(v))) {
                uf.union(u, v);
            }
        }
        let (from, to) = mode.arcs();
        for v in lat.arc_vertices(from) {
            uf.union(source, v);
        }
        for v in lat.arc_vertices(to) {
            uf.union(target, v);
        }
        Self { uf, source, target }
    }

    fn crosses(&mut self) -> bool {
        self.uf.same(self.source, self.target)
    }
}

/// Metric crossing by union-find over open edges.
///
/// `MetricZero` ignores every edge with a boundary endpoint.
pub fn metric_crossing(lat: &LatticeRect, edges: &EdgeStates, mode: CrossingMode) -> Result<bool, PercolationError> {
    check_edges(lat, edges)?;
    if !mode.is_metric() {
        return Err(PercolationError::ModeMismatch { mode: mode.to_string(), expected: "field" });
    }
    Ok(Clusters::build(lat, edges, mode).crosses())
}

/// First-passage sets of a vertex field, as vertex masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstPassageSets {
    /// Components of `{phi >= 0}` meeting LEFT.
    pub left: Vec<bool>,
    /// Components of `{phi >= 0}` meeting RIGHT.
    pub right: Vec<bool>,
    /// Components of `{phi <= 0}` meeting BOTTOM.
    pub bottom: Vec<bool>,
    /// Components of `{phi <= 0}` meeting TOP.
    pub top: Vec<bool>,
}

impl FirstPassageSets {
    /// True iff the left and right positive sets share a vertex.
    pub fn left_meets_right(&self) -> bool {
        self.left.iter().zip(&self.right).any(|(&l, &r)| l && r)
    }
}

pub fn first_passage_sets(lat: &LatticeRect, field: &Field) -> Result<FirstPassageSets, PercolationError> {
    check_field(lat, field)?;
    let phi = field.values();
    let nonneg = |v: VertexId| phi[v] >= 0.0;
    let nonpos = |v: VertexId| phi[v] <= 0.0;
    Ok(FirstPassageSets {
        left: flood(lat, &lat.arc_vertices(ArcSelector::Left), nonneg),
        right: flood(lat, &lat.arc_vertices(ArcSelector::Right), nonneg),
        bottom: flood(lat, &lat.arc_vertices(ArcSelector::Bottom), nonpos),
        top: flood(lat, &lat.arc_vertices(ArcSelector::Top), nonpos),
    })
}

/// Metric first-passage sets above zero: clusters of open edges attached to
/// the nonnegative vertices of LEFT (resp. RIGHT).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricFirstPassageSets {
    pub left_vertices: Vec<bool>,
    pub right_vertices: Vec<bool>,
    pub left_edges: Vec<bool>,
    pub right_edges: Vec<bool>,
}

pub fn metric_first_passage_sets(
    lat: &LatticeRect,
    field: &Field,
    edges: &EdgeStates,
) -> Result<MetricFirstPassageSets, PercolationError> {
    check_field(lat, field)?;
    check_edges(lat, edges)?;
    let spread = |arc: ArcSelector| {
        let sources: Vec<_> = lat.arc_vertices(arc).into_iter().filter(|&v| field.value(v) >= 0.0).collect();
        let mut seen = vec![false; lat.num_vertices()];
        let mut queue: VecDeque<_> = sources.iter().copied().collect();
        for &s in &sources {
            seen[s] = true;
        }
        while let Some(v) = queue.pop_front() {
            for (e, u) in lat.incident_edges(v) {
                if edges.is_open(e) && !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        let edge_mask = lat
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(u, v))| edges.is_open(e) && seen[u] && seen[v])
            .collect();
        (seen, edge_mask)
    };
    let (left_vertices, left_edges) = spread(ArcSelector::Left);
    let (right_vertices, right_edges) = spread(ArcSelector::Right);
    Ok(MetricFirstPassageSets { left_vertices, right_vertices, left_edges, right_edges })
}

/// Closed edges whose opening would create an open LEFT-RIGHT crossing.
///
/// Returns `(false, [])` when `edges` already crosses.
pub fn closed_pivotal_exists(
    lat: &LatticeRect,
    edges: &EdgeStates,
) -> Result<(bool, Vec<EdgeId>), PercolationError> {
    check_edges(lat, edges)?;
    let mut clusters = Clusters::build(lat, edges, CrossingMode::MetricAlt);
    if clusters.crosses() {
        return Ok((false, Vec::new()));
    }
    let left = clusters.uf.find(clusters.source);
    let right = clusters.uf.find(clusters.target);
    let mut pivotal = Vec::new();
    for (e, &(u, v)) in lat.edges().iter().enumerate() {
        if edges.is_open(e) {
            continue;
        }
        let (ru, rv) = (clusters.uf.find(u), clusters.uf.find(v));
        if (ru == left && rv == right) || (ru == right && rv == left) {
            pivotal.push(e);
        }
    }
    Ok((!pivotal.is_empty(), pivotal))
}

/// A vertex of the dual lattice, centered at `((p + 1/2) delta, (q + 1/2) delta)`.
///
/// It is surrounded by the primal grid positions `(p, q)`, `(p + 1, q)`,
/// `(p, q + 1)` and `(p + 1, q + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DualVertex {
    pub p: i64,
    pub q: i64,
}

impl DualVertex {
    pub fn coords(self, delta: f64) -> (f64, f64) {
        ((self.p as f64 + 0.5) * delta, (self.q as f64 + 0.5) * delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Heading {
    East,
    North,
    West,
    South,
}

impl Heading {
    fn left(self) -> Self {
        match self {
            Heading::East => Heading::North,
            Heading::North => Heading::West,
            Heading::West => Heading::South,
            Heading::South => Heading::East,
        }
    }

    fn right(self) -> Self {
        self.left().left().left()
    }

    fn step(self) -> (i64, i64) {
        match self {
            Heading::East => (1, 0),
            Heading::North => (0, 1),
            Heading::West => (-1, 0),
            Heading::South => (0, -1),
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Dual path from `b` separating nonnegative vertices (on its left) from
/// negative ones (on its right).
#[derive(Debug, Clone, PartialEq)]
pub struct LevelLinePath {
    /// Dual vertices in order. The first is `(0, 1)`, just outside the frame
    /// next to `b`; the last lies just outside the frame where the line leaves.
    pub vertices: Vec<DualVertex>,
    /// [`Arc::Right`] if the line leaves next to `c`, [`Arc::Top`] if next to `a`.
    pub terminal: Arc,
}

impl LevelLinePath {
    /// Physical coordinates of the path, starting from `(0, 3 delta / 2)` on the
    /// rectangle side.
    pub fn points(&self, delta: f64) -> Vec<(f64, f64)> {
        std::iter::once((0.0, 1.5 * delta))
            .chain(self.vertices.iter().skip(1).map(|d| d.coords(delta)))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, delta: f64, w: W) -> Result<(), PercolationError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["step", "x", "y"])?;
        for (k, (x, y)) in self.points(delta).into_iter().enumerate() {
            out.write_record([k.to_string(), x.to_string(), y.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Traces the level line of `field` from `b`.
///
/// Frame vertices on LEFT count as positive and those on BOTTOM as negative;
/// every other vertex is positive iff `phi >= 0`. At each dual vertex the line
/// turns left if the vertex ahead-left is negative, goes straight if ahead-left
/// is positive and ahead-right negative, and turns right otherwise. The saddle
/// case where both turns are admissible thus resolves to the left turn.
pub fn trace_level_line(lat: &LatticeRect, field: &Field) -> Result<LevelLinePath, PercolationError> {
    check_field(lat, field)?;
    let (nx, ny) = (lat.nx() as i64, lat.ny() as i64);
    let positive = |i: i64, j: i64| -> bool {
        debug_assert!(i >= 1 && j >= 1 && i <= nx && j <= ny);
        let v = lat.vertex(i as usize, j as usize);
        match lat.arc_of(v) {
            Some(Arc::Left) => true,
            Some(Arc::Bottom) => false,
            _ => field.value(v) >= 0.0,
        }
    };
    let inside = |d: DualVertex| d.p >= 1 && d.q >= 1 && d.p < nx && d.q < ny;

    // Directed dual edges, indexed by (start vertex, heading) on the padded dual grid.
    let width = (nx + 1) as usize;
    let mut used = vec![false; width * (ny + 1) as usize * 4];
    let slot = |d: DualVertex, h: Heading| ((d.q as usize) * width + d.p as usize) * 4 + h.index();
    let max_steps = 4 * lat.num_edges() + 4;

    let mut at = DualVertex { p: 0, q: 1 };
    let mut heading = Heading::East;
    let mut vertices = vec![at];
    loop {
        if vertices.len() > max_steps {
            return Err(PercolationError::Runaway(max_steps));
        }
        let s = slot(at, heading);
        if used[s] {
            return Err(PercolationError::RevisitedEdge);
        }
        used[s] = true;
        let (dp, dq) = heading.step();
        at = DualVertex { p: at.p + dp, q: at.q + dq };
        vertices.push(at);
        if !inside(at) {
            break;
        }
        // Primal corners of the plaquette ahead, relative to the heading.
        let (ahead_left, ahead_right) = ahead_corners(at, heading);
        heading = if !positive(ahead_left.0, ahead_left.1) {
            heading.left()
        } else if !positive(ahead_right.0, ahead_right.1) {
            heading
        } else {
            heading.right()
        };
    }
    let terminal = if at.q == 0 || at.p == nx { Arc::Right } else { Arc::Top };
    Ok(LevelLinePath { vertices, terminal })
}

/// Grid positions of the ahead-left and ahead-right primal vertices when
/// standing on dual vertex `d` facing `h`.
fn ahead_corners(d: DualVertex, h: Heading) -> ((i64, i64), (i64, i64)) {
    let (p, q) = (d.p, d.q);
    match h {
        Heading::East => ((p + 1, q + 1), (p + 1, q)),
        Heading::North => ((p, q + 1), (p + 1, q + 1)),
        Heading::West => ((p, q), (p, q + 1)),
        Heading::South => ((p + 1, q), (p, q)),
    }
}

/// Writes per-vertex first-passage masks as CSV.
pub fn write_masks_csv<W: Write>(lat: &LatticeRect, sets: &FirstPassageSets, w: W) -> Result<(), PercolationError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["vertex", "i", "j", "x", "y", "left", "right", "bottom", "top"])?;
    let bit = |b: bool| if b { "1" } else { "0" }.to_string();
    for v in 0..lat.num_vertices() {
        let (i, j) = lat.grid_pos(v);
        let (x, y) = lat.coords(v);
        out.write_record([
            v.to_string(),
            i.to_string(),
            j.to_string(),
            x.to_string(),
            y.to_string(),
            bit(sets.left[v]),
            bit(sets.right[v]),
            bit(sets.bottom[v]),
            bit(sets.top[v]),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gff::{BoundaryCondition, GffSampler};
    use crate::metric::sample_edge_states;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn constant_interior(lat: &LatticeRect, value: f64) -> Field {
        let interior = vec![value; lat.num_interior()];
        Field::from_interior(lat, BoundaryCondition::Alternating(1.0), &interior)
    }

    #[test]
    fn all_positive_field_crosses() {
        let lat = LatticeRect::new(1.0, 0.1).unwrap();
        let f = Field::synthetic(vec![1.0; lat.num_vertices()]);
        assert!(crossing(&lat, CrossingInput::Field(&f), CrossingMode::DiscreteAlt).unwrap());
        assert!(crossing(&lat, CrossingInput::Field(&f), CrossingMode::DiscreteZero).unwrap());
        let sets = first_passage_sets(&lat, &f).unwrap();
        assert!(sets.left.iter().all(|&b| b) && sets.right.iter().all(|&b| b));
        assert!(sets.bottom.iter().all(|&b| !b) && sets.top.iter().all(|&b| !b));
    }

    #[test]
    fn closed_edges_do_not_cross() {
        let lat = LatticeRect::new(1.0, 0.1).unwrap();
        let w = EdgeStates::all_closed(lat.num_edges());
        assert!(!crossing(&lat, CrossingInput::Edges(&w), CrossingMode::MetricAlt).unwrap());
        assert!(!crossing(&lat, CrossingInput::Edges(&w), CrossingMode::MetricZero).unwrap());
        let w = EdgeStates::all_open(lat.num_edges());
        assert!(crossing(&lat, CrossingInput::Edges(&w), CrossingMode::MetricAlt).unwrap());
    }

    #[test]
    fn mode_input_mismatch_is_an_error() {
        let lat = LatticeRect::new(1.0, 0.25).unwrap();
        let f = Field::synthetic(vec![1.0; lat.num_vertices()]);
        let w = EdgeStates::all_open(lat.num_edges());
        assert!(crossing(&lat, CrossingInput::Field(&f), CrossingMode::MetricAlt).is_err());
        assert!(crossing(&lat, CrossingInput::Edges(&w), CrossingMode::DiscreteAlt).is_err());
        let short = EdgeStates::all_open(3);
        assert!(metric_crossing(&lat, &short, CrossingMode::MetricAlt).is_err());
    }

    #[test]
    fn metric_zero_ignores_boundary_edges() {
        let lat = LatticeRect::new(1.0, 0.1).unwrap();
        let mut w = EdgeStates::all_closed(lat.num_edges());
        // Open the whole bottom frame row and the two columns linking it to the inner arcs.
        for i in 1..lat.nx() {
            w.set(lat.horizontal_edge(i, 1), true);
        }
        w.set(lat.vertical_edge(2, 1), true);
        w.set(lat.vertical_edge(lat.nx() - 1, 1), true);
        assert!(!metric_crossing(&lat, &w, CrossingMode::MetricZero).unwrap());
        // A straight interior row does cross.
        for i in 2..lat.nx() - 1 {
            w.set(lat.horizontal_edge(i, 4), true);
        }
        assert!(metric_crossing(&lat, &w, CrossingMode::MetricZero).unwrap());
    }

    #[test]
    fn single_gap_is_the_only_closed_pivotal() {
        let lat = LatticeRect::new(1.0, 0.1).unwrap();
        let j = 5;
        let gap = lat.horizontal_edge(4, j);
        let mut w = EdgeStates::all_closed(lat.num_edges());
        for i in 1..lat.nx() {
            w.set(lat.horizontal_edge(i, j), i != 4);
        }
        let (exists, edges) = closed_pivotal_exists(&lat, &w).unwrap();
        assert!(exists);
        assert_eq!(edges, vec![gap]);

        w.set(gap, true);
        assert_eq!(closed_pivotal_exists(&lat, &w).unwrap(), (false, vec![]));
    }

    #[test]
    fn pivotality_ignores_own_state() {
        let lat = LatticeRect::new(1.0, 1.0 / 6.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..300 {
            let w = EdgeStates::from_bits((0..lat.num_edges()).map(|_| rng.random_bool(0.55)).collect());
            for e in 0..lat.num_edges() {
                let mut up = w.clone();
                up.set(e, true);
                let mut down = w.clone();
                down.set(e, false);
                let pivotal = metric_crossing(&lat, &up, CrossingMode::MetricAlt).unwrap()
                    && !metric_crossing(&lat, &down, CrossingMode::MetricAlt).unwrap();
                // The classification of e from the closed configuration matches.
                let (_, list) = closed_pivotal_exists(&lat, &down).unwrap();
                assert_eq!(list.contains(&e), pivotal);
            }
        }
    }

    #[test]
    fn opening_edges_never_destroys_crossing() {
        let lat = LatticeRect::new(1.3, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..500 {
            let mut w = EdgeStates::from_bits((0..lat.num_edges()).map(|_| rng.random_bool(0.5)).collect());
            let before: Vec<bool> = [CrossingMode::MetricAlt, CrossingMode::MetricZero]
                .iter()
                .map(|&m| metric_crossing(&lat, &w, m).unwrap())
                .collect();
            for _ in 0..10 {
                let e = rng.random_range(0..lat.num_edges());
                w.set(e, true);
            }
            for (k, &m) in [CrossingMode::MetricAlt, CrossingMode::MetricZero].iter().enumerate() {
                if before[k] {
                    assert!(metric_crossing(&lat, &w, m).unwrap());
                }
            }
        }
    }

    #[test]
    fn level_line_on_positive_interior_exits_right() {
        let lat = LatticeRect::new(1.0, 1.0 / 6.0).unwrap();
        let f = constant_interior(&lat, 1.0);
        let path = trace_level_line(&lat, &f).unwrap();
        assert_eq!(path.terminal, Arc::Right);
        // Hugs the bottom: dual row q = 1 until the last column, then steps down.
        let nx = lat.nx() as i64;
        let expected: Vec<DualVertex> = (0..nx)
            .map(|p| DualVertex { p, q: 1 })
            .chain(std::iter::once(DualVertex { p: nx - 1, q: 0 }))
            .collect();
        assert_eq!(path.vertices, expected);
    }

    #[test]
    fn level_line_on_negative_interior_exits_top() {
        let lat = LatticeRect::new(1.0, 1.0 / 6.0).unwrap();
        let f = constant_interior(&lat, -1.0);
        let path = trace_level_line(&lat, &f).unwrap();
        assert_eq!(path.terminal, Arc::Top);
        let ny = lat.ny() as i64;
        let expected: Vec<DualVertex> = std::iter::once(DualVertex { p: 0, q: 1 })
            .chain((1..=ny).map(|q| DualVertex { p: 1, q }))
            .collect();
        assert_eq!(path.vertices, expected);
    }

    #[test]
    fn level_line_separates_signs() {
        let lat = LatticeRect::new(1.5, 1.0 / 12.0).unwrap();
        let sampler = GffSampler::new(&lat, BoundaryCondition::Alternating(1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..300 {
            let f = sampler.sample(&lat, &mut rng);
            let path = trace_level_line(&lat, &f).unwrap();
            let mut seen = std::collections::HashSet::new();
            for w in path.vertices.windows(2) {
                let (a, b) = (w[0], w[1]);
                assert_eq!((a.p - b.p).abs() + (a.q - b.q).abs(), 1);
                let key = ((a.p.min(b.p), a.q.min(b.q)), a.p == b.p);
                assert!(seen.insert(key), "dual edge reused");
                // Primal pair across the dual edge, as (left, right) of the motion.
                let (l, r) = match (b.p - a.p, b.q - a.q) {
                    (1, 0) => ((b.p, b.q + 1), (b.p, b.q)),
                    (-1, 0) => ((a.p, a.q), (a.p, a.q + 1)),
                    (0, 1) => ((b.p, b.q), (b.p + 1, b.q)),
                    _ => ((a.p + 1, a.q), (a.p, a.q)),
                };
                let val = |(i, j): (i64, i64)| f.value(lat.vertex(i as usize, j as usize));
                assert!(val(l) >= 0.0, "left side negative");
                assert!(val(r) < 0.0, "right side nonnegative");
            }
            let crosses = discrete_crossing(&lat, &f, CrossingMode::DiscreteAlt).unwrap();
            assert_eq!(path.terminal == Arc::Right, crosses);
        }
    }

    #[test]
    fn first_passage_sets_track_crossing() {
        let lat = LatticeRect::new(1.0, 1.0 / 10.0).unwrap();
        let sampler = GffSampler::new(&lat, BoundaryCondition::Alternating(0.8)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..500 {
            let f = sampler.sample(&lat, &mut rng);
            let sets = first_passage_sets(&lat, &f).unwrap();
            for v in 0..lat.num_vertices() {
                if sets.left[v] || sets.right[v] {
                    assert!(f.value(v) >= 0.0);
                }
                if sets.bottom[v] || sets.top[v] {
                    assert!(f.value(v) <= 0.0);
                }
            }
            let crosses = discrete_crossing(&lat, &f, CrossingMode::DiscreteAlt).unwrap();
            assert_eq!(sets.left_meets_right(), crosses);
            assert_eq!(sets.left == sets.right, crosses);
        }
    }

    #[test]
    fn metric_sets_agree_with_metric_crossing() {
        let lat = LatticeRect::new(1.0, 1.0 / 10.0).unwrap();
        let sampler = GffSampler::new(&lat, BoundaryCondition::Alternating(1.5)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..300 {
            let f = sampler.sample(&lat, &mut rng);
            let w = sample_edge_states(&lat, &f, &mut rng).unwrap();
            let sets = metric_first_passage_sets(&lat, &f, &w).unwrap();
            let overlap = sets.left_vertices.iter().zip(&sets.right_vertices).any(|(&a, &b)| a && b);
            assert_eq!(overlap, metric_crossing(&lat, &w, CrossingMode::MetricAlt).unwrap());
            for (e, &(u, v)) in lat.edges().iter().enumerate() {
                if sets.left_edges[e] {
                    assert!(w.is_open(e) && sets.left_vertices[u] && sets.left_vertices[v]);
                }
            }
        }
    }

    #[test]
    fn csv_exports() {
        let lat = LatticeRect::new(1.0, 0.25).unwrap();
        let f = constant_interior(&lat, 1.0);
        let path = trace_level_line(&lat, &f).unwrap();
        let mut buf = Vec::new();
        path.write_csv(lat.delta(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("step,x,y\n0,0,0.375\n"));
        let sets = first_passage_sets(&lat, &f).unwrap();
        let mut buf = Vec::new();
        write_masks_csv(&lat, &sets, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + lat.num_vertices());
    }

    #[test]
    fn mode_names_round_trip() {
        for m in CrossingMode::ALL {
            assert_eq!(m.to_string().parse::<CrossingMode>().unwrap(), m);
        }
        assert!("sideways".parse::<CrossingMode>().is_err());
    }
}
