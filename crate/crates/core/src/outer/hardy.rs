use std::f64::consts::{PI, TAU};

use rustfft::FftPlanner;

use super::{BoundaryFunction, OuterError};
use crate::linalg::{C64, ZERO};

/// Smallest admissible boundary value.
pub const MIN_POSITIVE: f64 = 1e-6;
/// Largest grid tried by the witness search.
pub const MAX_WITNESS_LOG2: u32 = 16;

/// Outer factor `a = exp((u + iũ)/2)` of a positive boundary function.
///
/// Stored as the analytic Taylor coefficients of `log a`, which determine
/// `a` everywhere on the circle, together with its grid values.
#[derive(Clone, Debug, PartialEq)]
pub struct OuterFactor {
    grid_log2: u32,
    /// `ℓ_0, …, ℓ_{N/2}` with `log a(θ) = Σ ℓ_k e^{ikθ}`.
    log_coeffs: Vec<C64>,
    values: Vec<C64>,
}

impl OuterFactor {
    pub fn grid_log2(&self) -> u32 {
        self.grid_log2
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn log_coeffs(&self) -> &[C64] {
        &self.log_coeffs
    }

    pub fn to_boundary(&self) -> BoundaryFunction {
        BoundaryFunction::new(self.grid_log2, self.values.clone()).expect("grid sized at construction")
    }

    /// `a(e^{iθ})` at an arbitrary angle.
    pub fn eval(&self, theta: f64) -> C64 {
        let s: C64 = self.log_coeffs.iter().enumerate().map(|(k, &l)| l * C64::from_polar(1.0, k as f64 * theta)).sum();
        s.exp()
    }

    /// `a(0)`, the value at the center of the disk; always real positive.
    pub fn center_value(&self) -> C64 {
        self.log_coeffs[0].exp()
    }

    /// Values at the midpoints `θ_j + π/N`.
    pub fn midpoint_values(&self) -> Vec<C64> {
        let n = self.len();
        let mut buf = vec![ZERO; n];
        for (k, &l) in self.log_coeffs.iter().enumerate() {
            buf[k % n] += l * C64::from_polar(1.0, k as f64 * PI / n as f64);
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        buf.into_iter().map(|z| z.exp()).collect()
    }

    /// `1/a`, itself outer (negate the logarithm).
    pub fn inverse(&self) -> Self {
        Self {
            grid_log2: self.grid_log2,
            log_coeffs: self.log_coeffs.iter().map(|z| -z).collect(),
            values: self.values.iter().map(|z| z.inv()).collect(),
        }
    }

    /// Winding number of the sampled curve about the origin.
    pub fn winding_number(&self) -> i64 {
        let n = self.len();
        let total: f64 = (0..n).map(|j| (self.values[(j + 1) % n] / self.values[j]).arg()).sum();
        (total / TAU).round() as i64
    }

    /// `max_j | |a(θ_j)|² − f(θ_j) |` on the construction grid.
    pub fn grid_error(&self, f: &BoundaryFunction) -> f64 {
        self.values.iter().zip(f.values()).map(|(a, v)| (a.norm_sqr() - v.re).abs()).fold(0.0, f64::max)
    }

    /// `max | |a|² − f |` at the midpoints, against the true function.
    pub fn midpoint_error(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.len();
        self.midpoint_values()
            .iter()
            .enumerate()
            .map(|(j, a)| (a.norm_sqr() - f(TAU * (j as f64 + 0.5) / n as f64)).abs())
            .fold(0.0, f64::max)
    }

    /// Midpoint error against the trigonometric interpolant of the samples.
    pub fn interpolation_error(&self, f: &BoundaryFunction) -> Result<f64, OuterError> {
        let mid = midpoint_samples(f)?;
        Ok(self.midpoint_values().iter().zip(&mid).map(|(a, v)| (a.norm_sqr() - v).abs()).fold(0.0, f64::max))
    }
}

/// Outer factor of a real boundary function with minimum at least
/// [`MIN_POSITIVE`]. The conjugate function uses the multiplier `−i·sgn(k)`
/// with the zero and Nyquist bins set to zero.
pub fn outer_function(f: &BoundaryFunction) -> Result<OuterFactor, OuterError> {
    let real = f.real_values()?;
    let min = real.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min >= MIN_POSITIVE) {
        return Err(OuterError::NotPositive { min, floor: MIN_POSITIVE });
    }
    let n = real.len();
    let mut spectrum: Vec<C64> = real.iter().map(|v| C64::new(v.ln(), 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut spectrum);

    let nf = n as f64;
    let half = n / 2;
    let mut log_coeffs = Vec::with_capacity(half + 1);
    log_coeffs.push(spectrum[0] / (2.0 * nf));
    for k in 1..half {
        log_coeffs.push(spectrum[k] / nf);
    }
    if n > 1 {
        log_coeffs.push(spectrum[half] / (2.0 * nf));
    }
    // The constant term is the mean of u/2 and must be real.
    log_coeffs[0] = C64::new(log_coeffs[0].re, 0.0);

    let mut buf = vec![ZERO; n];
    for (k, &l) in log_coeffs.iter().enumerate() {
        buf[k % n] += l;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let values = buf.into_iter().map(|z| z.exp()).collect();
    Ok(OuterFactor { grid_log2: f.grid_log2(), log_coeffs, values })
}

/// Trigonometric interpolant of the real parts at the midpoints.
fn midpoint_samples(f: &BoundaryFunction) -> Result<Vec<f64>, OuterError> {
    let real = f.real_values()?;
    let n = real.len();
    let mut spec: Vec<C64> = real.iter().map(|&v| C64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut spec);
    for (k, z) in spec.iter_mut().enumerate() {
        let freq = signed_frequency(k, n);
        let shift = C64::from_polar(1.0, freq * PI / n as f64);
        *z *= if n > 1 && k == n / 2 { C64::new(shift.re, 0.0) } else { shift };
    }
    planner.plan_fft_inverse(n).process(&mut spec);
    Ok(spec.into_iter().map(|z| z.re / n as f64).collect())
}

fn signed_frequency(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Trigonometric interpolation onto the grid of twice the size.
pub fn upsample(f: &BoundaryFunction) -> Result<BoundaryFunction, OuterError> {
    let n = f.len();
    let mut spec = f.values().to_vec();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut spec);
    let mut wide = vec![ZERO; 2 * n];
    if n == 1 {
        wide[0] = spec[0];
    } else {
        let half = n / 2;
        wide[..half].copy_from_slice(&spec[..half]);
        wide[half + 1 + n..].copy_from_slice(&spec[half + 1..]);
        // Split the Nyquist bin symmetrically so real data stays real.
        wide[half] = spec[half] * 0.5;
        wide[half + n] = spec[half] * 0.5;
    }
    planner.plan_fft_inverse(2 * n).process(&mut wide);
    let values = wide.into_iter().map(|z| z / n as f64).collect();
    BoundaryFunction::new(f.grid_log2() + 1, values)
}

/// Outer factor reproducing the band-limited extension of the samples to
/// within `eps` at the midpoints, refining by trigonometric interpolation up
/// to a grid of `2^16`.
pub fn logmodular_witness(f: &BoundaryFunction, eps: f64) -> Result<OuterFactor, OuterError> {
    let mut current = f.clone();
    let mut best = (f64::INFINITY, f.grid_log2());
    loop {
        let a = outer_function(&current)?;
        let err = a.interpolation_error(&current)?;
        if err <= eps {
            return Ok(a);
        }
        if err < best.0 {
            best = (err, current.grid_log2());
        }
        if current.grid_log2() >= MAX_WITNESS_LOG2 {
            return Err(OuterError::PrecisionUnreachable { error: best.0, eps, grid_log2: best.1 });
        }
        current = upsample(&current)?;
    }
}

/// As [`logmodular_witness`] but resampling the true function on each grid
/// and measuring the midpoint error against it.
pub fn logmodular_witness_fn(f: impl Fn(f64) -> f64, start_log2: u32, eps: f64) -> Result<OuterFactor, OuterError> {
    let mut best = (f64::INFINITY, start_log2);
    let mut k = start_log2;
    loop {
        let samples = BoundaryFunction::from_fn(k, &f)?;
        let a = outer_function(&samples)?;
        let err = a.midpoint_error(&f);
        if err <= eps {
            return Ok(a);
        }
        if err < best.0 {
            best = (err, k);
        }
        if k >= MAX_WITNESS_LOG2 {
            return Err(OuterError::PrecisionUnreachable { error: best.0, eps, grid_log2: best.1 });
        }
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_one() {
        let f = BoundaryFunction::from_fn(6, |_| 1.0).unwrap();
        let a = outer_function(&f).unwrap();
        assert!(a.values().iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-15));
        assert_eq!(a.winding_number(), 0);
    }

    #[test]
    fn exp_cos_has_closed_form() {
        let f = BoundaryFunction::from_fn(12, |t| t.cos().exp()).unwrap();
        let a = outer_function(&f).unwrap();
        for j in (0..f.len()).step_by(97) {
            let exact = (C64::from_polar(1.0, f.theta(j)) * 0.5).exp();
            assert!((a.values()[j] - exact).norm() < 1e-12);
        }
        assert!(a.midpoint_error(|t| t.cos().exp()) <= 1e-9);
        assert!((a.center_value() - C64::new(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn not_positive() {
        let f = BoundaryFunction::from_fn(4, |t| if t == 0.0 { 1e-9 } else { 1.0 }).unwrap();
        assert!(matches!(outer_function(&f), Err(OuterError::NotPositive { .. })));
    }

    #[test]
    fn inverse_multiplies_to_one() {
        let f = BoundaryFunction::from_fn(8, |t| 2.0 + t.sin()).unwrap();
        let a = outer_function(&f).unwrap();
        let b = a.inverse();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x * y - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
        assert!((a.eval(0.3) * b.eval(0.3) - C64::new(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn upsample_keeps_trig_polynomials() {
        let f = BoundaryFunction::from_fn(4, |t| 3.0 + (2.0 * t).cos() - 0.5 * (3.0 * t).sin()).unwrap();
        let g = upsample(&f).unwrap();
        for j in 0..g.len() {
            let t = g.theta(j);
            let exact = 3.0 + (2.0 * t).cos() - 0.5 * (3.0 * t).sin();
            assert!((g.values()[j].re - exact).abs() < 1e-13);
            assert!(g.values()[j].im.abs() < 1e-13);
        }
    }

    #[test]
    fn constant_four_witness() {
        let f = BoundaryFunction::from_fn(3, |_| 4.0).unwrap();
        let a = logmodular_witness(&f, 1e-10).unwrap();
        assert!(a.values().iter().all(|z| (z - C64::new(2.0, 0.0)).norm() < 1e-14));
    }
}
