//! Fast cross-checks of the production routines against the reference
//! implementations in [`crate::oracle`].

use rand::Rng;

use crate::gff::{dirichlet_green_dense, harmonic_extension, sample_with_boundary, BoundaryCondition};
use crate::harness::replica_rng;
use crate::lattice::LatticeRect;
use crate::limits::{bm_line_hitting_cdf, crossing_limit, elliptic_k_complete, normal_tail};
use crate::metric::{sample_edge_states, EdgeStates};
use crate::oracle;
use crate::percolation::{closed_pivotal_exists, crossing, CrossingInput, CrossingMode};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn random_edges<R: Rng>(lat: &LatticeRect, p: f64, rng: &mut R) -> EdgeStates {
    EdgeStates::from_bits((0..lat.num_edges()).map(|_| rng.random_bool(p)).collect())
}

/// Runs every check; deterministic in `seed`.
pub fn run(seed: u64) -> Vec<Check> {
    let mut rng = replica_rng(seed, 0);
    let mut out = Vec::new();

    let mut mismatches = 0;
    for t in 0..400 {
        let lat = LatticeRect::new(1.0 + (t % 3) as f64 * 0.5, 1.0 / (4 + t % 9) as f64).expect("valid lattice");
        let edges = random_edges(&lat, rng.random_range(0.3..0.7), &mut rng);
        let phi: Vec<f64> = (0..lat.num_vertices()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let field = crate::gff::Field::synthetic(phi.clone());
        for mode in CrossingMode::ALL {
            let fast = if mode.is_metric() {
                crossing(&lat, CrossingInput::Edges(&edges), mode)
            } else {
                crossing(&lat, CrossingInput::Field(&field), mode)
            }
            .expect("sizes match");
            let slow = if mode.is_metric() {
                oracle::flood_fill_edge_crossing(&lat, edges.bits(), mode)
            } else {
                oracle::flood_fill_field_crossing(&lat, &phi, mode)
            };
            mismatches += usize::from(fast != slow);
        }
    }
    out.push(check("crossing vs flood fill", mismatches == 0, format!("{mismatches} mismatches in 1600 cases")));

    let mut mismatches = 0;
    for t in 0..100 {
        let lat = LatticeRect::new(1.0, 1.0 / (4 + t % 4) as f64).expect("valid lattice");
        let edges = random_edges(&lat, 0.5, &mut rng);
        let fast = closed_pivotal_exists(&lat, &edges).expect("sizes match");
        mismatches += usize::from(fast != oracle::brute_force_pivotal(&lat, edges.bits()));
    }
    out.push(check("closed pivotal vs brute force", mismatches == 0, format!("{mismatches} mismatches in 100 cases")));

    let k = std::f64::consts::FRAC_1_SQRT_2;
    let err = (elliptic_k_complete(k).expect("k < 1") - oracle::elliptic_k_quadrature(k)).abs();
    out.push(check("K(1/sqrt 2) vs quadrature", err < 1e-10, format!("|diff| = {err:.2e}")));

    let err = (crossing_limit(2.0).expect("L > 0") - oracle::schwarz_christoffel_crossing_limit(2.0)).abs();
    out.push(check("crossing limit L=2 vs Schwarz-Christoffel", err < 1e-8, format!("|diff| = {err:.2e}")));

    let err = [-2.0, -0.3, 0.0, 0.7, 3.0, 6.0]
        .iter()
        .map(|&x| ((normal_tail(x) - oracle::normal_tail_quadrature(x)) / normal_tail(x)).abs())
        .fold(0.0, f64::max);
    out.push(check("normal tail vs quadrature", err < 1e-11, format!("max rel diff = {err:.2e}")));

    let lat = LatticeRect::new(1.0, 1.0 / 6.0).expect("valid lattice");
    let green = dirichlet_green_dense(&lat).expect("small lattice");
    let centre = lat.vertex(3, 3);
    let mc = oracle::random_walk_green(&lat, centre, centre, 100_000, &mut rng);
    let exact = green.vertex(&lat, centre, centre);
    out.push(check(
        "Green diagonal vs random walk",
        (mc.mean - exact).abs() < 5.0 * mc.se,
        format!("exact {exact:.5}, walk {:.5} +- {:.5}", mc.mean, mc.se),
    ));

    let lat = LatticeRect::new(2.0, 0.125).expect("valid lattice");
    let data = BoundaryCondition::Alternating(1.0).boundary_data(&lat);
    let ext = harmonic_extension(&lat, &data).expect("extension converges");
    let x = lat.vertex(4, 3);
    let mc = oracle::random_walk_exit_mean(&lat, &data, x, 100_000, &mut rng);
    out.push(check(
        "harmonic extension vs exit distribution",
        (mc.mean - ext.value(x)).abs() < 5.0 * mc.se,
        format!("exact {:.5}, walk {:.5} +- {:.5}", ext.value(x), mc.mean, mc.se),
    ));

    let (m, b, t) = (0.3, 1.0, 2.0);
    let (hits, n) = oracle::line_hitting_monte_carlo(m, b, t, 1e-2, 20_000, &mut rng);
    let p_mc = hits as f64 / n as f64;
    let se = (p_mc * (1.0 - p_mc) / n as f64).sqrt();
    let p = bm_line_hitting_cdf(m, b, t).expect("valid arguments");
    out.push(check(
        "line hitting formula vs path Monte Carlo",
        (p_mc - p).abs() < 4.0 * se,
        format!("formula {p:.5}, paths {p_mc:.5} +- {se:.5}"),
    ));

    let lat = LatticeRect::new(1.0, 0.125).expect("valid lattice");
    let mut violations = 0;
    for _ in 0..200 {
        let field = sample_with_boundary(&lat, BoundaryCondition::Alternating(1.0), &mut rng).expect("valid bc");
        let edges = sample_edge_states(&lat, &field, &mut rng).expect("finite field");
        let metric = crossing(&lat, CrossingInput::Edges(&edges), CrossingMode::MetricAlt).expect("sizes match");
        let discrete = crossing(&lat, CrossingInput::Field(&field), CrossingMode::DiscreteAlt).expect("sizes match");
        violations += usize::from(metric && !discrete);
    }
    out.push(check("metric crossing implies discrete", violations == 0, format!("{violations} violations in 200 samples")));

    out
}
