//! Continuum side: the conformal crossing limit of the rectangle, the
//! SLE₄(-2; -2) driving diffusion in its time-changed form, and the
//! Brownian first-passage formula for a linear barrier.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use libm::erfc;

use crate::error::LimitsError;

/// Complete elliptic integral of the first kind `K(k)` (modulus convention),
/// via the arithmetic-geometric mean `K = pi / (2 agm(1, sqrt(1 - k^2)))`.
pub fn elliptic_k_complete(k: f64) -> Result<f64, LimitsError> {
    if !(0.0..1.0).contains(&k) {
        return Err(LimitsError::ModulusOutOfRange(k));
    }
    Ok(elliptic_k_from_complement(((1.0 - k) * (1.0 + k)).sqrt()))
}

/// `K` expressed through the complementary modulus `k' = sqrt(1 - k^2)`.
fn elliptic_k_from_complement(k_prime: f64) -> f64 {
    PI / (2.0 * agm(1.0, k_prime))
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Images of the rectangle corners under the canonical elliptic map onto the
/// upper half-plane: `(a, b, c, d) -> (-1/k, -1, 1, 1/k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalImages {
    pub ya: f64,
    pub yb: f64,
    pub yc: f64,
    pub yd: f64,
    /// Elliptic modulus.
    pub k: f64,
    /// Complementary modulus `sqrt(1 - k^2)`, kept to avoid cancellation near `k = 1`.
    pub k_prime: f64,
}

impl ConformalImages {
    fn from_modulus(k: f64, k_prime: f64) -> Self {
        Self { ya: -1.0 / k, yb: -1.0, yc: 1.0, yd: 1.0 / k, k, k_prime }
    }

    /// `(yb - ya)(yd - yc) / ((yc - ya)(yd - yb))`.
    pub fn cross_ratio(&self) -> f64 {
        cross_ratio(self.ya, self.yb, self.yc, self.yd)
    }
}

pub fn cross_ratio(ya: f64, yb: f64, yc: f64, yd: f64) -> f64 {
    (yb - ya) * (yd - yc) / ((yc - ya) * (yd - yb))
}

/// Modulus `k` for which the canonical map sends `(0, L) x (0, 1)` onto the
/// half-plane, i.e. `K(k') / K(k) = 2 / L`, found by bisection.
pub fn modulus_for_aspect(width: f64) -> Result<ConformalImages, LimitsError> {
    if !(width.is_finite() && width > 0.0) {
        return Err(LimitsError::BadAspect(width));
    }
    let target = 2.0 / width;
    let pair = |k: f64| {
        let k_prime = ((1.0 - k) * (1.0 + k)).sqrt();
        (k_prime, elliptic_k_from_complement(k) / elliptic_k_from_complement(k_prime))
    };
    // K(k')/K(k) decreases from +inf to 0 on (0, 1).
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut k = 0.5;
    for _ in 0..200 {
        k = 0.5 * (lo + hi);
        let (_, ratio) = pair(k);
        let residual = ratio - target;
        if residual.abs() < 1e-13 * target.max(1.0) || hi - lo <= f64::EPSILON * k {
            break;
        }
        if residual > 0.0 {
            lo = k;
        } else {
            hi = k;
        }
    }
    let (k_prime, _) = pair(k);
    Ok(ConformalImages::from_modulus(k, k_prime))
}

/// Limit of the alternating-boundary discrete crossing probability of the
/// rectangle of width `L`: the cross-ratio of the corner images, which for the
/// canonical map equals `((1 - k) / (1 + k))^2`.
pub fn crossing_limit(width: f64) -> Result<f64, LimitsError> {
    let images = modulus_for_aspect(width)?;
    let (k, kp) = (images.k, images.k_prime);
    // 1 - k = k'^2 / (1 + k) stays accurate as k -> 1.
    let one_minus_k = kp * kp / (1.0 + k);
    let ratio = one_minus_k / (1.0 + k);
    Ok(ratio * ratio)
}

/// Probability that SLE₄(-2; -2) from 0 with force points `(yL; yR)` ends at `yR`.
pub fn sle_hitting_probability(y_left: f64, y_right: f64) -> Result<f64, LimitsError> {
    if !(y_left < 0.0 && y_right > 0.0) {
        return Err(LimitsError::ForcePointOrder(y_left, y_right));
    }
    Ok(-y_left / (y_right - y_left))
}

/// Absorption tolerance of [`simulate_sle_diffusion`].
pub const SLE_ABSORPTION_EPS: f64 = 1e-6;

/// Diffusion coefficient `q(x) = sqrt(2 (1 - x^2))`.
pub fn sle_diffusion_coefficient(x: f64) -> f64 {
    (2.0 * (1.0 - x) * (1.0 + x)).max(0.0).sqrt()
}

/// Trajectory of `dW = q(W) dB` started in `(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionPath {
    pub x0: f64,
    pub dt: f64,
    /// Values at times `0, dt, 2 dt, ...`; the last entry is the snapped endpoint
    /// when absorbed.
    pub values: Vec<f64>,
    /// `+1` or `-1` if absorbed, at step `values.len() - 1`.
    pub absorbed_at: Option<f64>,
}

impl DiffusionPath {
    pub fn absorption_step(&self) -> Option<usize> {
        self.absorbed_at.map(|_| self.values.len() - 1)
    }
}

/// Euler-Maruyama parameters for the time-changed SLE driving process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SleScheme {
    pub dt: f64,
    pub eps_abs: f64,
    /// Time horizon after which an unabsorbed path is reported as such.
    pub max_time: f64,
}

impl SleScheme {
    pub fn new(dt: f64) -> Result<Self, LimitsError> {
        if !(dt > 0.0 && dt <= 1e-3) {
            return Err(LimitsError::BadStep(dt));
        }
        Ok(Self { dt, eps_abs: SLE_ABSORPTION_EPS, max_time: 200.0 })
    }

    pub fn with_eps(self, eps_abs: f64) -> Self {
        Self { eps_abs, ..self }
    }

    fn max_steps(&self) -> usize {
        (self.max_time / self.dt).ceil() as usize
    }

    /// One Euler step from `x` with standard normal `z`, clamped to `[-1, 1]`;
    /// returns the new value and the absorbing side, if any.
    #[inline]
    pub fn step(&self, x: f64, z: f64) -> (f64, Option<f64>) {
        let next = (x + sle_diffusion_coefficient(x) * self.dt.sqrt() * z).clamp(-1.0, 1.0);
        self.absorb(next)
    }

    #[inline]
    fn absorb(&self, x: f64) -> (f64, Option<f64>) {
        if x.abs() >= 1.0 - self.eps_abs {
            let side = x.signum();
            (side, Some(side))
        } else {
            (x, None)
        }
    }

    /// Runs one path without storing it; returns the absorbing side and step count.
    pub fn hit<R: Rng + ?Sized>(&self, x0: f64, rng: &mut R) -> (Option<f64>, usize) {
        let (mut x, side) = self.absorb(x0);
        if side.is_some() {
            return (side, 0);
        }
        let sd = self.dt.sqrt();
        for n in 1..=self.max_steps() {
            let z: f64 = rng.sample(StandardNormal);
            let next = (x + sle_diffusion_coefficient(x) * sd * z).clamp(-1.0, 1.0);
            let (y, side) = self.absorb(next);
            if side.is_some() {
                return (side, n);
            }
            x = y;
        }
        (None, self.max_steps())
    }

    /// Runs the scheme at step `dt` and at `dt / 2` on the same Brownian path
    /// (each coarse increment is the sum of two fine ones). Returns the
    /// absorbing sides `(coarse, fine)`.
    pub fn hit_coupled<R: Rng + ?Sized>(&self, x0: f64, rng: &mut R) -> (Option<f64>, Option<f64>) {
        let fine = SleScheme { dt: 0.5 * self.dt, ..*self };
        let (mut xc, mut side_c) = self.absorb(x0);
        let (mut xf, mut side_f) = fine.absorb(x0);
        let sd_f = fine.dt.sqrt();
        let sd_c = self.dt.sqrt();
        let mut steps = 0;
        while (side_c.is_none() || side_f.is_none()) && steps < self.max_steps() {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            if side_f.is_none() {
                for z in [z1, z2] {
                    if side_f.is_none() {
                        let next = (xf + sle_diffusion_coefficient(xf) * sd_f * z).clamp(-1.0, 1.0);
                        (xf, side_f) = fine.absorb(next);
                    }
                }
            }
            if side_c.is_none() {
                let z = (z1 + z2) / std::f64::consts::SQRT_2;
                let next = (xc + sle_diffusion_coefficient(xc) * sd_c * z).clamp(-1.0, 1.0);
                (xc, side_c) = self.absorb(next);
            }
            steps += 1;
        }
        (side_c, side_f)
    }
}

/// Euler-Maruyama path of `dW = q(W) dB` from `x0`, absorbed once
/// `|W| >= 1 - 1e-6` and snapped to the nearer endpoint.
pub fn simulate_sle_diffusion<R: Rng + ?Sized>(x0: f64, dt: f64, rng: &mut R) -> Result<DiffusionPath, LimitsError> {
    simulate_sle_diffusion_with(x0, SleScheme::new(dt)?, rng)
}

pub fn simulate_sle_diffusion_with<R: Rng + ?Sized>(
    x0: f64,
    scheme: SleScheme,
    rng: &mut R,
) -> Result<DiffusionPath, LimitsError> {
    if !(x0 > -1.0 && x0 < 1.0) {
        return Err(LimitsError::BadStart(x0));
    }
    let (mut x, mut absorbed_at) = scheme.absorb(x0);
    let mut values = vec![x];
    let limit = scheme.max_steps();
    while absorbed_at.is_none() && values.len() <= limit {
        let z: f64 = rng.sample(StandardNormal);
        (x, absorbed_at) = scheme.step(x, z);
        values.push(x);
    }
    Ok(DiffusionPath { x0, dt: scheme.dt, values, absorbed_at })
}

/// A diffusion path mapped back to SLE₄(-2; -2) capacity time.
///
/// Entry `n` corresponds to time-changed time `s_n = n ds` of the source path.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateChangedPath {
    /// `s_n`.
    pub s: Vec<f64>,
    /// Capacity time `t(s_n) = (1/8) ∫_0^{s_n} e^{2u} (1 - Y~_u^2) du`.
    pub t: Vec<f64>,
    /// Driving function `Y_t`.
    pub y: Vec<f64>,
    pub v_left: Vec<f64>,
    pub v_right: Vec<f64>,
    source: Vec<f64>,
}

impl CoordinateChangedPath {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// `(2 Y - V^L - V^R) / (V^R - V^L)` at each grid point.
    pub fn normalized_driver(&self) -> Vec<f64> {
        self.y
            .iter()
            .zip(self.v_left.iter().zip(&self.v_right))
            .map(|(&y, (&l, &r))| (2.0 * y - l - r) / (r - l))
            .collect()
    }

    /// Index of `s(t) = sup{s : t(s) <= t}` on the grid.
    pub fn index_at_time(&self, t: f64) -> usize {
        self.t.partition_point(|&ti| ti <= t).saturating_sub(1)
    }

    /// Source path value `Y~_{s(t)}`.
    pub fn source_at_time(&self, t: f64) -> f64 {
        self.source[self.index_at_time(t)]
    }
}

/// Maps a time-changed path back to the Loewner parametrization. The integrals
/// in `t(s)`, `Y`, `V^L`, `V^R` use the trapezoidal rule on the path grid.
pub fn coordinate_change_path(path: &DiffusionPath) -> Result<CoordinateChangedPath, LimitsError> {
    let w = &path.values;
    if w.is_empty() {
        return Err(LimitsError::EmptyPath);
    }
    let ds = path.dt;
    let y0 = w[0];
    let n = w.len();
    let mut s = Vec::with_capacity(n);
    let mut t = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut v_left = Vec::with_capacity(n);
    let mut v_right = Vec::with_capacity(n);
    let (vl0, vr0) = (-0.5 * (1.0 + y0), 0.5 * (1.0 - y0));

    let (mut time, mut int_ey, mut int_e) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let sk = k as f64 * ds;
        if k > 0 {
            let (a, b) = (w[k - 1], w[k]);
            let (ea, eb) = (((k - 1) as f64 * ds).exp(), sk.exp());
            time += 0.5 * ds * (ea * ea * (1.0 - a * a) + eb * eb * (1.0 - b * b)) / 8.0;
            int_ey += 0.5 * ds * (ea * a + eb * b);
            int_e += 0.5 * ds * (ea + eb);
        }
        s.push(sk);
        t.push(time);
        y.push(0.5 * sk.exp() * w[k] + 0.5 * int_ey - 0.5 * y0);
        v_left.push(vl0 - 0.5 * (int_e - int_ey));
        v_right.push(vr0 + 0.5 * (int_e + int_ey));
    }
    Ok(CoordinateChangedPath { s, t, y, v_left, v_right, source: w.clone() })
}

/// Standard normal upper tail `1 - Phi(x)`.
pub fn normal_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `P(tau <= T)` for `tau = inf{t >= 0 : B_t <= m t - b}`:
/// `Phi̅(b/√T - m√T) + exp(2bm) Phi̅(b/√T + m√T)`.
pub fn bm_line_hitting_cdf(m: f64, b: f64, horizon: f64) -> Result<f64, LimitsError> {
    if !(b > 0.0 && horizon > 0.0) || !m.is_finite() {
        return Err(LimitsError::BadHitting(b, horizon));
    }
    let rt = horizon.sqrt();
    let first = normal_tail(b / rt - m * rt);
    let arg = b / rt + m * rt;
    let growth = 2.0 * b * m;
    let second = if growth < 600.0 {
        growth.exp() * normal_tail(arg)
    } else {
        // Both factors are extreme; combine in log space using the Mills ratio.
        let log_tail = -0.5 * arg * arg - (arg * (2.0 * PI).sqrt()).ln() + (1.0 - 1.0 / (arg * arg)).ln();
        (growth + log_tail).exp()
    };
    Ok((first + second).clamp(0.0, 1.0))
}
