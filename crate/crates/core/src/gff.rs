//! Discrete Gaussian free field on `V_delta`.
//!
//! Covariance is the Dirichlet Green's function of the continuous-time simple
//! random walk with unit mean holding time, `G = 4 * Δ⁻¹` with `Δ` the
//! combinatorial Laplacian of the interior. The mean is the discrete harmonic
//! extension of the boundary data. Values are kept in lattice units; the mesh
//! size only enters through the grid extents.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::GffError;
use crate::lattice::{Arc, LatticeRect, VertexId};
use crate::spectral::{generator_eigenvalue, generator_eigenvalues, Dst2};

/// Interior size above which [`dirichlet_green_dense`] refuses to run.
pub const DENSE_GREEN_LIMIT: usize = 10_000;

/// Boundary condition of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    Zero,
    /// `+lambda` on LEFT and RIGHT, `-lambda` on BOTTOM and TOP.
    Alternating(f64),
}

impl BoundaryCondition {
    pub fn validate(self) -> Result<Self, GffError> {
        match self {
            BoundaryCondition::Alternating(l) if !(l.is_finite() && l > 0.0) => {
                Err(GffError::InvalidLambda(l))
            }
            bc => Ok(bc),
        }
    }

    /// Value prescribed on a boundary arc.
    pub fn value_on(self, arc: Arc) -> f64 {
        match self {
            BoundaryCondition::Zero => 0.0,
            BoundaryCondition::Alternating(l) => match arc {
                Arc::Left | Arc::Right => l,
                Arc::Bottom | Arc::Top => -l,
            },
        }
    }

    /// Boundary data as a full vertex array (interior entries zero).
    pub fn boundary_data(self, lat: &LatticeRect) -> Vec<f64> {
        (0..lat.num_vertices())
            .map(|v| lat.arc_of(v).map_or(0.0, |arc| self.value_on(arc)))
            .collect()
    }
}

/// Real values on every vertex of the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
    bc: Option<BoundaryCondition>,
}

impl Field {
    /// Field with boundary entries set exactly to `bc` and the given interior
    /// values (row-major interior order).
    pub fn from_interior(lat: &LatticeRect, bc: BoundaryCondition, interior: &[f64]) -> Self {
        assert_eq!(interior.len(), lat.num_interior());
        let mut values = bc.boundary_data(lat);
        for (&v, &x) in lat.interior_vertices().iter().zip(interior) {
            values[v] = x;
        }
        Self { values, bc: Some(bc) }
    }

    /// Arbitrary vertex values with no declared boundary condition.
    pub fn synthetic(values: Vec<f64>) -> Self {
        Self { values, bc: None }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, v: VertexId) -> f64 {
        self.values[v]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn bc(&self) -> Option<BoundaryCondition> {
        self.bc
    }

    pub fn interior_values(&self, lat: &LatticeRect) -> Vec<f64> {
        lat.interior_vertices().iter().map(|&v| self.values[v]).collect()
    }
}

const DUMP_MAGIC: &[u8; 8] = b"GFFFIELD";

impl Field {
    /// Writes the field as a 32-byte header followed by little-endian `f64`
    /// values in row-major vertex order.
    ///
    /// Header: magic `GFFFIELD`, `nx: u32`, `ny: u32`, bc tag `u32`
    /// (0 zero, 1 alternating, 2 unspecified), 4 reserved bytes, `lambda: f64`.
    pub fn write_binary<W: Write>(&self, lat: &LatticeRect, mut w: W) -> Result<(), GffError> {
        if self.values.len() != lat.num_vertices() {
            return Err(GffError::BoundaryLength { expected: lat.num_vertices(), got: self.values.len() });
        }
        let (tag, lambda) = match self.bc {
            Some(BoundaryCondition::Zero) => (0u32, 0.0),
            Some(BoundaryCondition::Alternating(l)) => (1, l),
            None => (2, 0.0),
        };
        let mut header = Vec::with_capacity(32);
        header.extend_from_slice(DUMP_MAGIC);
        header.extend_from_slice(&(lat.nx() as u32).to_le_bytes());
        header.extend_from_slice(&(lat.ny() as u32).to_le_bytes());
        header.extend_from_slice(&tag.to_le_bytes());
        header.extend_from_slice(&[0u8; 4]);
        header.extend_from_slice(&lambda.to_le_bytes());
        w.write_all(&header)?;
        let mut body = Vec::with_capacity(8 * self.values.len());
        for x in &self.values {
            body.extend_from_slice(&x.to_le_bytes());
        }
        w.write_all(&body)?;
        Ok(())
    }

    /// Reads a dump written by [`Field::write_binary`], returning `(nx, ny, field)`.
    pub fn read_binary<R: Read>(mut r: R) -> Result<(usize, usize, Field), GffError> {
        let mut header = [0u8; 32];
        r.read_exact(&mut header)?;
        if &header[..8] != DUMP_MAGIC {
            return Err(GffError::Format("bad magic".into()));
        }
        let word = |at: usize| u32::from_le_bytes(header[at..at + 4].try_into().unwrap());
        let (nx, ny, tag) = (word(8) as usize, word(12) as usize, word(16));
        let lambda = f64::from_le_bytes(header[24..32].try_into().unwrap());
        let bc = match tag {
            0 => Some(BoundaryCondition::Zero),
            1 => Some(BoundaryCondition::Alternating(lambda)),
            2 => None,
            t => return Err(GffError::Format(format!("unknown bc tag {t}"))),
        };
        let mut body = vec![0u8; 8 * nx * ny];
        r.read_exact(&mut body)?;
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok((nx, ny, Field { values, bc }))
    }
}

/// Dense Dirichlet Green's function indexed by interior position.
#[derive(Debug, Clone)]
pub struct GreenMatrix {
    matrix: DMatrix<f64>,
}

impl GreenMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `G(p, q)` for interior positions `p, q`.
    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.matrix[(p, q)]
    }

    /// `G(u, v)` for vertex ids; zero when either vertex is on the boundary.
    pub fn vertex(&self, lat: &LatticeRect, u: VertexId, v: VertexId) -> f64 {
        match (lat.interior_index(u), lat.interior_index(v)) {
            (Some(p), Some(q)) => self.matrix[(p, q)],
            _ => 0.0,
        }
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// `G = 4 Δ⁻¹` by dense Cholesky inversion.
pub fn dirichlet_green_dense(lat: &LatticeRect) -> Result<GreenMatrix, GffError> {
    let n = lat.num_interior();
    if n > DENSE_GREEN_LIMIT {
        return Err(GffError::TooLarge { interior: n, limit: DENSE_GREEN_LIMIT });
    }
    let mut lap = DMatrix::<f64>::zeros(n, n);
    for (p, &v) in lat.interior_vertices().iter().enumerate() {
        lap[(p, p)] = 4.0;
        for u in lat.neighbors(v) {
            if let Some(q) = lat.interior_index(u) {
                lap[(p, q)] = -1.0;
            }
        }
    }
    let chol = lap.cholesky().expect("Dirichlet Laplacian is positive definite");
    let mut g = chol.inverse();
    g *= 4.0;
    // Symmetrize away rounding.
    let gt = g.transpose();
    g = (g + gt) * 0.5;
    Ok(GreenMatrix { matrix: g })
}

/// `G(v, v)` by summing the sine expansion; exact for any lattice size.
/// Zero for boundary vertices.
pub fn green_diagonal(lat: &LatticeRect, v: VertexId) -> f64 {
    let Some(p) = lat.interior_index(v) else {
        return 0.0;
    };
    let (nx, ny) = (lat.interior_nx(), lat.interior_ny());
    let (a, b) = ((p % nx + 1) as f64, (p / nx + 1) as f64);
    let (mx, my) = (nx as f64 + 1.0, ny as f64 + 1.0);
    let sx: Vec<f64> = (1..=nx).map(|j| (std::f64::consts::PI * j as f64 * a / mx).sin().powi(2)).collect();
    let sy: Vec<f64> = (1..=ny).map(|k| (std::f64::consts::PI * k as f64 * b / my).sin().powi(2)).collect();
    let mut sum = 0.0;
    for (k, &y) in sy.iter().enumerate() {
        for (j, &x) in sx.iter().enumerate() {
            sum += x * y / generator_eigenvalue(j + 1, k + 1, nx, ny);
        }
    }
    4.0 * sum / (mx * my)
}

/// Spectral sampler of the zero-boundary field on one lattice.
///
/// `phi = S (xi / sqrt(eig))`, with `S` the orthonormal product sine basis of
/// the interior grid and `eig` the generator eigenvalues, so `Cov = G`.
#[derive(Debug, Clone)]
pub struct SpectralSampler {
    dst: Dst2,
    inv_sqrt_eig: Vec<f64>,
    inv_four_eig: Vec<f64>,
}

impl SpectralSampler {
    pub fn new(lat: &LatticeRect) -> Self {
        Self::with_transform(lat, Dst2::new(lat.interior_nx(), lat.interior_ny()))
    }

    /// Uses the given transform routes (for cross-checking the dense and FFT paths).
    pub fn with_transform(lat: &LatticeRect, dst: Dst2) -> Self {
        let (mx, my) = (lat.interior_nx(), lat.interior_ny());
        assert_eq!((dst.nx(), dst.ny()), (mx, my));
        let eig = generator_eigenvalues(mx, my);
        Self {
            dst,
            inv_sqrt_eig: eig.iter().map(|l| l.sqrt().recip()).collect(),
            inv_four_eig: eig.iter().map(|l| (4.0 * l).recip()).collect(),
        }
    }

    /// Interior values (row-major) of a centered sample with covariance `G`.
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut grid: Vec<f64> = self
            .inv_sqrt_eig
            .iter()
            .map(|s| s * rng.sample::<f64, _>(StandardNormal))
            .collect();
        self.dst.apply(&mut grid);
        grid
    }

    /// Same as [`sample_interior`](Self::sample_interior) but with the normals supplied.
    pub fn colour(&self, white: &[f64]) -> Vec<f64> {
        let mut grid: Vec<f64> = self.inv_sqrt_eig.iter().zip(white).map(|(s, x)| s * x).collect();
        self.dst.apply(&mut grid);
        grid
    }

    /// Solves `Δ u = rhs` on the interior grid.
    fn solve_laplacian(&self, rhs: &[f64]) -> Vec<f64> {
        let mut u = rhs.to_vec();
        self.dst.apply(&mut u);
        for (x, s) in u.iter_mut().zip(&self.inv_four_eig) {
            *x *= s;
        }
        self.dst.apply(&mut u);
        u
    }
}

/// Zero-boundary field sample.
pub fn sample_zero_boundary<R: Rng + ?Sized>(lat: &LatticeRect, rng: &mut R) -> Field {
    let interior = SpectralSampler::new(lat).sample_interior(rng);
    Field::from_interior(lat, BoundaryCondition::Zero, &interior)
}

/// Maximum over interior vertices of `|u(v) - mean of its 4 neighbors|`.
pub fn harmonic_residual(lat: &LatticeRect, values: &[f64]) -> f64 {
    lat.interior_vertices()
        .iter()
        .map(|&v| {
            let avg: f64 = lat.neighbors(v).map(|u| values[u]).sum::<f64>() / 4.0;
            (values[v] - avg).abs()
        })
        .fold(0.0, f64::max)
}

fn harmonic_extension_with(
    lat: &LatticeRect,
    sampler: &SpectralSampler,
    boundary: &[f64],
) -> Result<Vec<f64>, GffError> {
    if boundary.len() != lat.num_vertices() {
        return Err(GffError::BoundaryLength { expected: lat.num_vertices(), got: boundary.len() });
    }
    let mut scale = 1.0f64;
    for v in lat.boundary_vertices() {
        if !boundary[v].is_finite() {
            return Err(GffError::NonFiniteBoundary(v));
        }
        scale = scale.max(boundary[v].abs());
    }
    let mut values: Vec<f64> = (0..lat.num_vertices())
        .map(|v| if lat.is_boundary(v) { boundary[v] } else { 0.0 })
        .collect();
    let interior = lat.interior_vertices();
    let tol = 1e-10 * scale;
    for _ in 0..4 {
        // Residual of Δ u = 0 in the 4 * (u - avg) form.
        let rhs: Vec<f64> = interior
            .iter()
            .map(|&v| lat.neighbors(v).map(|u| values[u]).sum::<f64>() - 4.0 * values[v])
            .collect();
        let correction = sampler.solve_laplacian(&rhs);
        for (&v, c) in interior.iter().zip(correction) {
            values[v] += c;
        }
        if harmonic_residual(lat, &values) < tol {
            return Ok(values);
        }
    }
    Err(GffError::NotConverged(harmonic_residual(lat, &values)))
}

/// Discrete harmonic extension of the boundary entries of `boundary` (a full
/// vertex array; interior entries are ignored). Solved spectrally and refined
/// until the max-norm harmonicity residual is below `1e-10 * max(1, max|f|)`.
pub fn harmonic_extension(lat: &LatticeRect, boundary: &[f64]) -> Result<Field, GffError> {
    let sampler = SpectralSampler::new(lat);
    let values = harmonic_extension_with(lat, &sampler, boundary)?;
    Ok(Field::synthetic(values))
}

/// Reusable sampler for a lattice and boundary condition.
#[derive(Debug, Clone)]
pub struct GffSampler {
    bc: BoundaryCondition,
    spectral: SpectralSampler,
    mean: Vec<f64>,
}

impl GffSampler {
    pub fn new(lat: &LatticeRect, bc: BoundaryCondition) -> Result<Self, GffError> {
        let bc = bc.validate()?;
        let spectral = SpectralSampler::new(lat);
        let mean = match bc {
            BoundaryCondition::Zero => vec![0.0; lat.num_vertices()],
            BoundaryCondition::Alternating(_) => {
                harmonic_extension_with(lat, &spectral, &bc.boundary_data(lat))?
            }
        };
        Ok(Self { bc, spectral, mean })
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    /// Harmonic extension of the boundary data.
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn sample<R: Rng + ?Sized>(&self, lat: &LatticeRect, rng: &mut R) -> Field {
        let fluct = self.spectral.sample_interior(rng);
        let mut values = self.mean.clone();
        for (&v, x) in lat.interior_vertices().iter().zip(fluct) {
            values[v] += x;
        }
        Field { values, bc: Some(self.bc) }
    }
}

/// Field with boundary condition `bc`: harmonic extension plus a zero-boundary sample.
pub fn sample_with_boundary<R: Rng + ?Sized>(
    lat: &LatticeRect,
    bc: BoundaryCondition,
    rng: &mut R,
) -> Result<Field, GffError> {
    Ok(GffSampler::new(lat, bc)?.sample(lat, rng))
}
