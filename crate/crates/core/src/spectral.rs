//! Orthonormal type-I discrete sine transform on the interior grid.
//!
//! The transform `S[j][k] = sqrt(2 / (n + 1)) * sin(pi * j * k / (n + 1))` is
//! symmetric and its own inverse. Its columns diagonalize the 1D Dirichlet
//! Laplacian, so the product basis diagonalizes the interior 5-point operator.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Axis length from which the FFT route is used.
pub const FFT_THRESHOLD: usize = 64;

#[derive(Clone)]
enum Route {
    Dense(Vec<f64>),
    Fft(Arc<dyn Fft<f64>>),
}

/// DST-I of a fixed length.
#[derive(Clone)]
pub struct Dst1 {
    n: usize,
    route: Route,
}

impl std::fmt::Debug for Dst1 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let route = match self.route {
            Route::Dense(_) => "dense",
            Route::Fft(_) => "fft",
        };
        f.debug_struct("Dst1").field("n", &self.n).field("route", &route).finish()
    }
}

impl Dst1 {
    pub fn new(n: usize) -> Self {
        if n >= FFT_THRESHOLD {
            Self::fft(n)
        } else {
            Self::dense(n)
        }
    }

    pub fn dense(n: usize) -> Self {
        let scale = (2.0 / (n as f64 + 1.0)).sqrt();
        let mut m = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                // (j+1)(k+1) mod 2(n+1) keeps the sine argument small.
                let p = ((j + 1) * (k + 1)) % (2 * (n + 1));
                m[j * n + k] = scale * (PI * p as f64 / (n as f64 + 1.0)).sin();
            }
        }
        Self { n, route: Route::Dense(m) }
    }

    pub fn fft(n: usize) -> Self {
        let plan = FftPlanner::new().plan_fft_forward(2 * (n + 1));
        Self { n, route: Route::Fft(plan) }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place transform of `x` (length `n`). `work` is resized as needed.
    pub fn apply(&self, x: &mut [f64], work: &mut Vec<Complex<f64>>) {
        let n = self.n;
        debug_assert_eq!(x.len(), n);
        match &self.route {
            Route::Dense(m) => {
                work.clear();
                work.extend(x.iter().map(|&v| Complex::new(v, 0.0)));
                for (k, out) in x.iter_mut().enumerate() {
                    let row = &m[k * n..(k + 1) * n];
                    *out = row.iter().zip(work.iter()).map(|(a, b)| a * b.re).sum();
                }
            }
            Route::Fft(plan) => {
                // Odd extension: a = [0, x_1..x_n, 0, -x_n..-x_1]; FFT gives -2i * DST.
                let len = 2 * (n + 1);
                work.clear();
                work.resize(len, Complex::new(0.0, 0.0));
                for (i, &v) in x.iter().enumerate() {
                    work[i + 1].re = v;
                    work[len - 1 - i].re = -v;
                }
                plan.process(work);
                let scale = -0.5 * (2.0 / (n as f64 + 1.0)).sqrt();
                for (k, out) in x.iter_mut().enumerate() {
                    *out = scale * work[k + 1].im;
                }
            }
        }
    }
}

/// Separable 2D DST-I on a row-major `nx x ny` grid.
#[derive(Debug, Clone)]
pub struct Dst2 {
    x: Dst1,
    y: Dst1,
}

impl Dst2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        Self { x: Dst1::new(nx), y: Dst1::new(ny) }
    }

    pub fn with_routes(x: Dst1, y: Dst1) -> Self {
        Self { x, y }
    }

    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn ny(&self) -> usize {
        self.y.len()
    }

    pub fn apply(&self, grid: &mut [f64]) {
        let (nx, ny) = (self.x.len(), self.y.len());
        debug_assert_eq!(grid.len(), nx * ny);
        if nx == 0 || ny == 0 {
            return;
        }
        let mut work = Vec::new();
        for row in grid.chunks_exact_mut(nx) {
            self.x.apply(row, &mut work);
        }
        let mut column = vec![0.0; ny];
        for i in 0..nx {
            for (j, c) in column.iter_mut().enumerate() {
                *c = grid[j * nx + i];
            }
            self.y.apply(&mut column, &mut work);
            for (j, c) in column.iter().enumerate() {
                grid[j * nx + i] = *c;
            }
        }
    }
}

/// Eigenvalue of the rate-1 walk generator (negated) for mode `(j, k)`, 1-based:
/// `1 - (cos(j pi/(nx+1)) + cos(k pi/(ny+1))) / 2`.
pub fn generator_eigenvalue(j: usize, k: usize, nx: usize, ny: usize) -> f64 {
    let sx = (0.5 * PI * j as f64 / (nx as f64 + 1.0)).sin();
    let sy = (0.5 * PI * k as f64 / (ny as f64 + 1.0)).sin();
    sx * sx + sy * sy
}

/// All eigenvalues in row-major mode order (mode `(j, k)` at `(k-1)*nx + (j-1)`).
pub fn generator_eigenvalues(nx: usize, ny: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(nx * ny);
    for k in 1..=ny {
        for j in 1..=nx {
            out.push(generator_eigenvalue(j, k, nx, ny));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dense_and_fft_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1usize, 2, 5, 17, 63, 64, 90] {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut a = x.clone();
            let mut b = x.clone();
            let mut work = Vec::new();
            Dst1::dense(n).apply(&mut a, &mut work);
            Dst1::fft(n).apply(&mut b, &mut work);
            for (p, q) in a.iter().zip(&b) {
                assert!((p - q).abs() < 1e-12, "n={n}: {p} vs {q}");
            }
        }
    }

    #[test]
    fn transform_is_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (nx, ny) in [(3, 5), (64, 7), (10, 70)] {
            let dst = Dst2::new(nx, ny);
            let x: Vec<f64> = (0..nx * ny).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut y = x.clone();
            dst.apply(&mut y);
            dst.apply(&mut y);
            for (p, q) in x.iter().zip(&y) {
                assert!((p - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn modes_diagonalize_laplacian() {
        let (nx, ny) = (6, 4);
        let dst = Dst2::new(nx, ny);
        let eig = generator_eigenvalues(nx, ny);
        for mode in [0, 5, 13, 23] {
            let mut e = vec![0.0; nx * ny];
            e[mode] = 1.0;
            dst.apply(&mut e);
            // (I - P) e = eig * e, P the 4-neighbor average with Dirichlet loss.
            for j in 0..ny {
                for i in 0..nx {
                    let at = |ii: isize, jj: isize| {
                        if ii < 0 || jj < 0 || ii >= nx as isize || jj >= ny as isize {
                            0.0
                        } else {
                            e[jj as usize * nx + ii as usize]
                        }
                    };
                    let (ii, jj) = (i as isize, j as isize);
                    let avg = (at(ii - 1, jj) + at(ii + 1, jj) + at(ii, jj - 1) + at(ii, jj + 1)) / 4.0;
                    let lhs = at(ii, jj) - avg;
                    assert!((lhs - eig[mode] * at(ii, jj)).abs() < 1e-13);
                }
            }
        }
    }
}
