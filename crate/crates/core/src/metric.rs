//! Metric-graph layer: edge percolation induced by the metric-graph field.
//!
//! Conditionally on the vertex values, the field on each unit lattice edge is
//! an independent Brownian bridge of duration 2 with diffusivity 2 between its
//! endpoint values. Such a bridge from `x > 0` to `y > 0` stays positive with
//! probability `1 - exp(-x y / 2)`. Only this indicator is ever sampled; it is
//! all the crossing and pivotality events depend on.

use rand::Rng;

use crate::error::MetricError;
use crate::gff::{Field, GreenMatrix};
use crate::lattice::{EdgeId, LatticeRect};

/// Probability that the bridge between endpoint values `phi_u`, `phi_v` stays
/// nonnegative on the whole edge.
///
/// An endpoint at exactly zero closes the edge.
pub fn edge_open_probability(phi_u: f64, phi_v: f64) -> Result<f64, MetricError> {
    if phi_u.is_nan() || phi_v.is_nan() {
        return Err(MetricError::NanInput);
    }
    if phi_u <= 0.0 || phi_v <= 0.0 {
        return Ok(0.0);
    }
    Ok(-(-0.5 * phi_u * phi_v).exp_m1())
}

/// Open/closed bit per lattice edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeStates {
    open: Vec<bool>,
}

impl EdgeStates {
    pub fn all_closed(num_edges: usize) -> Self {
        Self { open: vec![false; num_edges] }
    }

    pub fn all_open(num_edges: usize) -> Self {
        Self { open: vec![true; num_edges] }
    }

    pub fn from_bits(open: Vec<bool>) -> Self {
        Self { open }
    }

    pub fn len(&self) -> usize {
        self.open.len()
    }

    pub fn is_empty(&self) -> bool {
        self.open.is_empty()
    }

    pub fn is_open(&self, e: EdgeId) -> bool {
        self.open[e]
    }

    pub fn set(&mut self, e: EdgeId, open: bool) {
        self.open[e] = open;
    }

    pub fn bits(&self) -> &[bool] {
        &self.open
    }

    pub fn count_open(&self) -> usize {
        self.open.iter().filter(|&&b| b).count()
    }
}

/// Samples `omega` from a vertex field: each edge is open independently with
/// [`edge_open_probability`] of its endpoint values.
pub fn sample_edge_states<R: Rng + ?Sized>(
    lat: &LatticeRect,
    field: &Field,
    rng: &mut R,
) -> Result<EdgeStates, MetricError> {
    if field.len() != lat.num_vertices() {
        return Err(MetricError::FieldSize { expected: lat.num_vertices(), got: field.len() });
    }
    let values = field.values();
    let mut open = Vec::with_capacity(lat.num_edges());
    for &(u, v) in lat.edges() {
        let p = edge_open_probability(values[u], values[v])?;
        // Closed edges consume no randomness, so an all-negative region leaves
        // the stream untouched; the draw is `u < p` with `u` uniform on [0, 1).
        open.push(p > 0.0 && rng.random::<f64>() < p);
    }
    Ok(EdgeStates { open })
}

/// A point on an edge at fraction `r` of the way from its first endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePoint {
    pub edge: EdgeId,
    pub r: f64,
}

impl EdgePoint {
    pub fn new(edge: EdgeId, r: f64) -> Result<Self, MetricError> {
        if !(0.0..=1.0).contains(&r) {
            return Err(MetricError::BadPosition(r));
        }
        Ok(Self { edge, r })
    }
}

/// Green's function of the metric graph between two edge points, by bilinear
/// interpolation of the vertex Green's function plus the on-edge bridge term
/// `4 (r1 ∧ r2 - r1 r2)` when both points lie on the same edge.
pub fn metric_green(
    lat: &LatticeRect,
    green: &GreenMatrix,
    w1: EdgePoint,
    w2: EdgePoint,
) -> Result<f64, MetricError> {
    if green.dim() != lat.num_interior() {
        return Err(MetricError::GreenMismatch { expected: lat.num_interior(), got: green.dim() });
    }
    for w in [w1, w2] {
        if w.edge >= lat.num_edges() {
            return Err(MetricError::BadEdge { edge: w.edge, edges: lat.num_edges() });
        }
        if !(0.0..=1.0).contains(&w.r) {
            return Err(MetricError::BadPosition(w.r));
        }
    }
    let (u1, v1) = lat.edge(w1.edge);
    let (u2, v2) = lat.edge(w2.edge);
    let (r1, r2) = (w1.r, w2.r);
    let g = |a, b| green.vertex(lat, a, b);
    let mut total = (1.0 - r1) * (1.0 - r2) * g(u1, u2)
        + r1 * r2 * g(v1, v2)
        + (1.0 - r1) * r2 * g(u1, v2)
        + r1 * (1.0 - r2) * g(v1, u2);
    if w1.edge == w2.edge {
        total += 4.0 * (r1.min(r2) - r1 * r2);
    }
    Ok(total)
}
