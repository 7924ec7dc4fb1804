//! Slow reference implementations used to cross-check the fast paths.
//!
//! Nothing here is used by the estimators; these routines exist for tests and
//! the `selftest` command.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::lattice::{EdgeId, LatticeRect};
use crate::percolation::CrossingMode;

/// Terminal predicates on 1-based grid positions, written out from the arc
/// definitions rather than taken from [`LatticeRect::arc_vertices`].
fn terminals(lat: &LatticeRect, mode: CrossingMode) -> (Vec<bool>, Vec<bool>) {
    let (nx, ny) = (lat.nx(), lat.ny());
    let mut from = vec![false; lat.num_vertices()];
    let mut to = vec![false; lat.num_vertices()];
    for j in 1..=ny {
        for i in 1..=nx {
            let v = (j - 1) * nx + (i - 1);
            match mode {
                CrossingMode::DiscreteAlt | CrossingMode::MetricAlt => {
                    from[v] = i == 1 && j >= 2;
                    to[v] = i == nx && j < ny;
                }
                CrossingMode::DiscreteZero | CrossingMode::MetricZero => {
                    let inner_row = j >= 2 && j < ny;
                    from[v] = inner_row && i == 2 && nx >= 3;
                    to[v] = inner_row && i + 1 == nx && nx >= 3;
                }
            }
        }
    }
    (from, to)
}

fn grid_neighbours(nx: usize, ny: usize, v: usize) -> impl Iterator<Item = usize> {
    let (i, j) = (v % nx, v / nx);
    let mut out = [usize::MAX; 4];
    if i > 0 {
        out[0] = v - 1;
    }
    if i + 1 < nx {
        out[1] = v + 1;
    }
    if j > 0 {
        out[2] = v - nx;
    }
    if j + 1 < ny {
        out[3] = v + nx;
    }
    out.into_iter().filter(|&u| u != usize::MAX)
}

fn is_frame(nx: usize, ny: usize, v: usize) -> bool {
    let (i, j) = (v % nx, v / nx);
    i == 0 || j == 0 || i + 1 == nx || j + 1 == ny
}

/// Depth-first labelling of the sites accepted by `open_site`, with bonds
/// accepted by `open_bond`; true iff a `from` site shares a label with a `to` site.
fn labelled_crossing(
    lat: &LatticeRect,
    mode: CrossingMode,
    open_site: impl Fn(usize) -> bool,
    open_bond: impl Fn(usize, usize) -> bool,
) -> bool {
    let (nx, ny) = (lat.nx(), lat.ny());
    let n = nx * ny;
    let (from, to) = terminals(lat, mode);
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if label[start] != usize::MAX || !open_site(start) {
            continue;
        }
        label[start] = next;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for u in grid_neighbours(nx, ny, v) {
                if label[u] == usize::MAX && open_site(u) && open_bond(v, u) {
                    label[u] = next;
                    stack.push(u);
                }
            }
        }
        next += 1;
    }
    if (0..n).any(|v| from[v] && to[v]) {
        return true;
    }
    let mut hit = vec![false; next];
    for v in 0..n {
        if from[v] && label[v] != usize::MAX {
            hit[label[v]] = true;
        }
    }
    (0..n).any(|v| to[v] && label[v] != usize::MAX && hit[label[v]])
}

/// Reference vertex-field crossing for the discrete modes.
pub fn flood_fill_field_crossing(lat: &LatticeRect, phi: &[f64], mode: CrossingMode) -> bool {
    let (nx, ny) = (lat.nx(), lat.ny());
    match mode {
        CrossingMode::DiscreteAlt => labelled_crossing(lat, mode, |v| phi[v] >= 0.0, |_, _| true),
        CrossingMode::DiscreteZero => {
            labelled_crossing(lat, mode, |v| !is_frame(nx, ny, v) && phi[v] > 0.0, |_, _| true)
        }
        _ => panic!("flood_fill_field_crossing called with metric mode {mode}"),
    }
}

/// Reference open-edge crossing for the metric modes.
pub fn flood_fill_edge_crossing(lat: &LatticeRect, open: &[bool], mode: CrossingMode) -> bool {
    let (nx, ny) = (lat.nx(), lat.ny());
    let bond = |u: usize, v: usize| open[edge_between(nx, ny, u, v)];
    match mode {
        CrossingMode::MetricAlt => labelled_crossing(lat, mode, |_| true, bond),
        CrossingMode::MetricZero => labelled_crossing(lat, mode, |v| !is_frame(nx, ny, v), bond),
        _ => panic!("flood_fill_edge_crossing called with discrete mode {mode}"),
    }
}

/// Edge id of the bond between grid neighbours `u` and `v`.
fn edge_between(nx: usize, ny: usize, u: usize, v: usize) -> usize {
    let (a, b) = (u.min(v), u.max(v));
    let (i, j) = (a % nx, a / nx);
    if b == a + 1 {
        j * (nx - 1) + i
    } else {
        ny * (nx - 1) + j * nx + i
    }
}

/// Closed pivotal edges found by opening each closed edge in turn.
pub fn brute_force_pivotal(lat: &LatticeRect, open: &[bool]) -> (bool, Vec<EdgeId>) {
    if flood_fill_edge_crossing(lat, open, CrossingMode::MetricAlt) {
        return (false, Vec::new());
    }
    let mut toggled = open.to_vec();
    let mut pivotal = Vec::new();
    for e in 0..open.len() {
        if open[e] {
            continue;
        }
        toggled[e] = true;
        if flood_fill_edge_crossing(lat, &toggled, CrossingMode::MetricAlt) {
            pivotal.push(e);
        }
        toggled[e] = false;
    }
    (!pivotal.is_empty(), pivotal)
}

/// Tanh-sinh quadrature of `f` over `[a, b]`. The integrand receives
/// `(x, x - a, b - x)` with both distances computed without cancellation, so
/// inverse square-root endpoint singularities are integrated to near machine precision.
pub fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let t_max = 4.5;
    let eval = |h: f64| {
        let mut sum = 0.0;
        let n = (t_max / h).ceil() as i64;
        for k in -n..=n {
            let t = k as f64 * h;
            let u = FRAC_PI_2 * t.sinh();
            let cosh_u = u.cosh();
            let w = half * FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
            // 1 - tanh(u) and 1 + tanh(u) in stable form.
            let (da, db) = if u >= 0.0 {
                (half * (1.0 + u.tanh()), half * 2.0 / ((2.0 * u).exp() + 1.0))
            } else {
                (half * 2.0 / ((-2.0 * u).exp() + 1.0), half * (1.0 - u.tanh()))
            };
            if da <= 0.0 || db <= 0.0 || w == 0.0 {
                continue;
            }
            let x = if u >= 0.0 { b - db } else { a + da };
            sum += w * f(x, da, db);
        }
        h * sum
    };
    let mut h = 0.5;
    let mut prev = eval(h);
    for _ in 0..10 {
        h *= 0.5;
        let cur = eval(h);
        if (cur - prev).abs() <= tol * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// `K(k) = ∫_0^{π/2} dθ / sqrt(1 - k^2 sin^2 θ)` by quadrature.
pub fn elliptic_k_quadrature(k: f64) -> f64 {
    tanh_sinh(|t, _, _| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2, 1e-14)
}

/// Aspect ratio of the rectangle that is the image of the upper half-plane
/// under the Schwarz-Christoffel map with prevertices `(ya, 0, 1, ∞)`.
fn schwarz_christoffel_aspect(ya: f64) -> f64 {
    // Side b-c is the image of [0, 1]; side a-b of [ya, 0].
    let bottom = tanh_sinh(|t, d0, d1| 1.0 / (d0 * d1 * (t - ya)).sqrt(), 0.0, 1.0, 1e-14);
    let left = tanh_sinh(|t, da, d0| 1.0 / (d0 * (1.0 - t) * da).sqrt(), ya, 0.0, 1e-14);
    bottom / left
}

/// Prevertex `ya < 0` for which the half-plane maps onto `(0, L) x (0, 1)`,
/// found by bisection on `ln(-ya)`.
pub fn schwarz_christoffel_prevertex(width: f64) -> f64 {
    // The aspect decreases as -ya grows.
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if schwarz_christoffel_aspect(-mid.exp()) > width {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    -(0.5 * (lo + hi)).exp()
}

/// Crossing limit from the quadrature conformal map: the cross-ratio of
/// `(ya, 0, 1, ∞)`, which is `-ya / (1 - ya)`.
pub fn schwarz_christoffel_crossing_limit(width: f64) -> f64 {
    let ya = schwarz_christoffel_prevertex(width);
    -ya / (1.0 - ya)
}

/// Sample mean and standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanEstimate {
    fn from_moments(sum: f64, sum_sq: f64, n: usize) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
        Self { mean, se: (var / nf).sqrt(), n }
    }
}

/// Walks a simple random walk from `start` until it reaches the frame,
/// calling `visit` on every interior site occupied (including the start).
/// Returns the exit site.
fn walk_to_frame<R: Rng + ?Sized>(lat: &LatticeRect, start: usize, rng: &mut R, mut visit: impl FnMut(usize)) -> usize {
    let (nx, ny) = (lat.nx(), lat.ny());
    let mut v = start;
    while !is_frame(nx, ny, v) {
        visit(v);
        v = match rng.random_range(0..4) {
            0 => v - 1,
            1 => v + 1,
            2 => v - nx,
            _ => v + nx,
        };
    }
    v
}

/// Green's function `G(x, y)` as the expected number of visits to `y` by a
/// rate-one walk from `x` killed on the frame.
pub fn random_walk_green<R: Rng + ?Sized>(lat: &LatticeRect, x: usize, y: usize, walks: usize, rng: &mut R) -> MeanEstimate {
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..walks {
        let mut visits = 0u64;
        walk_to_frame(lat, x, rng, |v| visits += u64::from(v == y));
        let c = visits as f64;
        sum += c;
        sum_sq += c * c;
    }
    MeanEstimate::from_moments(sum, sum_sq, walks)
}

/// Harmonic extension at `x` as the mean boundary value at the exit site.
pub fn random_walk_exit_mean<R: Rng + ?Sized>(
    lat: &LatticeRect,
    boundary: &[f64],
    x: usize,
    walks: usize,
    rng: &mut R,
) -> MeanEstimate {
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..walks {
        let f = boundary[walk_to_frame(lat, x, rng, |_| {})];
        sum += f;
        sum_sq += f * f;
    }
    MeanEstimate::from_moments(sum, sum_sq, walks)
}

/// Positivity counts of a discretized Brownian bridge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BridgeCounts {
    pub n: usize,
    /// Paths positive at every one of the `steps + 1` grid points.
    pub positive_fine: usize,
    /// Paths positive at every fourth grid point.
    pub positive_coarse: usize,
}

/// Brownian bridge from `a` to `b` over `[0, length]` with variance
/// `variance` per unit time, sampled at `steps` equal steps. `steps` must be
/// a multiple of 4.
pub fn bridge_positivity<R: Rng + ?Sized>(
    a: f64,
    b: f64,
    length: f64,
    variance: f64,
    steps: usize,
    n: usize,
    rng: &mut R,
) -> BridgeCounts {
    assert!(steps.is_multiple_of(4) && steps > 0);
    let dt = length / steps as f64;
    let mut counts = BridgeCounts { n, positive_fine: 0, positive_coarse: 0 };
    if a <= 0.0 || b <= 0.0 {
        return counts;
    }
    for _ in 0..n {
        let mut x = a;
        let (mut fine_ok, mut coarse_ok) = (true, true);
        for k in 0..steps {
            let remaining = length - k as f64 * dt;
            let mean = x + (b - x) * dt / remaining;
            let var = variance * dt * (remaining - dt) / remaining;
            let z: f64 = rng.sample(StandardNormal);
            x = mean + var.sqrt() * z;
            if x <= 0.0 {
                fine_ok = false;
                if (k + 1) % 4 == 0 {
                    coarse_ok = false;
                    break;
                }
            }
        }
        counts.positive_fine += usize::from(fine_ok);
        counts.positive_coarse += usize::from(coarse_ok);
    }
    counts
}

/// Monte Carlo of `P(B_t <= m t - b for some t <= T)` on a grid of step `dt`,
/// with the Brownian-bridge crossing probability `exp(-2 x y / dt)` between
/// grid points, which makes the estimator exact for every `dt`.
pub fn line_hitting_monte_carlo<R: Rng + ?Sized>(
    m: f64,
    b: f64,
    horizon: f64,
    dt: f64,
    n: usize,
    rng: &mut R,
) -> (usize, usize) {
    let steps = (horizon / dt).round() as usize;
    let sd = dt.sqrt();
    let mut hits = 0;
    for _ in 0..n {
        // Distance to the barrier: X_t = B_t - m t + b.
        let mut x = b;
        for _ in 0..steps {
            let z: f64 = rng.sample(StandardNormal);
            let y = x - m * dt + sd * z;
            if y <= 0.0 || rng.random::<f64>() < (-2.0 * x * y / dt).exp() {
                hits += 1;
                break;
            }
            x = y;
        }
    }
    (hits, n)
}

/// `1 - Phi(x)` by quadrature of the normal density, for cross-checking the erfc route.
pub fn normal_tail_quadrature(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - normal_tail_quadrature(-x);
    }
    // Substitute t = x + s / (1 - s) on s in [0, 1).
    let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
    tanh_sinh(
        |s, _, one_minus_s| {
            let t = x + s / one_minus_s;
            density(t) / (one_minus_s * one_minus_s)
        },
        0.0,
        1.0,
        1e-14,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_reference_values() {
        assert!((tanh_sinh(|x, _, _| x * x, 0.0, 1.0, 1e-14) - 1.0 / 3.0).abs() < 1e-14);
        let arcsine = tanh_sinh(|_, da, db| 1.0 / (da * db).sqrt(), 0.0, 1.0, 1e-14);
        assert!((arcsine - PI).abs() < 1e-12);
        assert!((elliptic_k_quadrature(0.0) - FRAC_PI_2).abs() < 1e-14);
        assert!((normal_tail_quadrature(0.0) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn square_prevertex_is_symmetric() {
        assert!((schwarz_christoffel_prevertex(1.0) + 1.0).abs() < 1e-10);
        assert!((schwarz_christoffel_crossing_limit(1.0) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn edge_ids_match_lattice() {
        let lat = LatticeRect::new(1.5, 0.25).unwrap();
        for (e, &(u, v)) in lat.edges().iter().enumerate() {
            assert_eq!(edge_between(lat.nx(), lat.ny(), u, v), e);
        }
    }
}
