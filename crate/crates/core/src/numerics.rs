//! Uniform grids on the real line, rectangle-rule inner products, the unitary
//! angular-frequency Fourier transform, and seeded test-signal batteries.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};

/// `n_points` samples at `x_min + i·dx`, `dx = (x_max − x_min)/n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(FrameError::InvalidGrid(format!(
                "need x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < 2 {
            return Err(FrameError::InvalidGrid(format!(
                "need at least 2 points, got {n_points}"
            )));
        }
        Ok(Grid { x_min, x_max, n_points })
    }

    /// Domain [−16, 16] with 2¹³ points (dx = 1/256).
    pub fn default_acceptance() -> Self {
        Grid { x_min: -16.0, x_max: 16.0, n_points: 1 << 13 }
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn abscissae(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.x(i))
    }

    /// Half-open index range `[start, end)` of samples with `x ∈ (lo, hi]`.
    pub fn index_range(&self, lo: f64, hi: f64) -> (usize, usize) {
        let dx = self.dx();
        let first = ((lo - self.x_min) / dx).floor() as i64 + 1;
        let last = ((hi - self.x_min) / dx).floor() as i64;
        let clamp = |v: i64| v.clamp(0, self.n_points as i64) as usize;
        let (mut s, mut e) = (clamp(first), clamp(last + 1));
        // floor() can misplace a sample lying exactly on an endpoint
        while s > 0 && self.x(s - 1) > lo {
            s -= 1;
        }
        while s < self.n_points && self.x(s) <= lo {
            s += 1;
        }
        while e < self.n_points && self.x(e) <= hi {
            e += 1;
        }
        while e > s && self.x(e - 1) > hi {
            e -= 1;
        }
        (s, e.max(s))
    }

    /// Whether the grids have identical layout.
    pub fn same_as(&self, other: &Grid) -> bool {
        self == other
    }
}

/// Complex samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridSignal {
    grid: Grid,
    samples: Vec<Complex64>,
}

impl GridSignal {
    pub fn new(grid: Grid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(FrameError::InvalidGrid(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.len()
            )));
        }
        Ok(GridSignal { grid, samples })
    }

    pub fn zeros(grid: Grid) -> Self {
        GridSignal { grid, samples: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: Grid, f: F) -> Self {
        GridSignal { grid, samples: grid.abscissae().map(f).collect() }
    }

    pub fn from_real_fn<F: Fn(f64) -> f64>(grid: Grid, f: F) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn scaled(&self, s: Complex64) -> GridSignal {
        GridSignal { grid: self.grid, samples: self.samples.iter().map(|v| v * s).collect() }
    }

    pub fn sub(&self, other: &GridSignal) -> Result<GridSignal> {
        if !self.grid.same_as(&other.grid) {
            return Err(FrameError::GridMismatch);
        }
        Ok(GridSignal {
            grid: self.grid,
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect(),
        })
    }
}

/// `⟨f|g⟩ = Σ_i conj(f_i)·g_i·dx`, summed in ascending index order.
pub fn inner_product(f: &GridSignal, g: &GridSignal) -> Result<Complex64> {
    if !f.grid.same_as(&g.grid) {
        return Err(FrameError::GridMismatch);
    }
    let s: Complex64 = f.samples.iter().zip(&g.samples).map(|(a, b)| a.conj() * b).sum();
    Ok(s * f.grid.dx())
}

/// `⟨f|f⟩`, the squared norm that every frame inequality multiplies.
pub fn norm_sq(f: &GridSignal) -> f64 {
    f.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * f.grid.dx()
}

/// Angular-frequency grid paired with a spatial grid: `ω_k = (k − N/2)·2π/(N dx)`.
pub fn frequency_grid(grid: &Grid) -> Grid {
    let n = grid.len();
    let dw = 2.0 * PI / (n as f64 * grid.dx());
    let w_min = -((n / 2) as f64) * dw;
    Grid { x_min: w_min, x_max: w_min + n as f64 * dw, n_points: n }
}

/// Discrete version of `f̂(ω) = (1/√(2π)) ∫ f(x) e^{−iωx} dx` on
/// [`frequency_grid`], computed with an FFT and the phase correction for the
/// grid offset. Unitary with respect to the rectangle-rule norms.
pub fn fourier_transform(f: &GridSignal) -> GridSignal {
    let grid = f.grid;
    let n = grid.len();
    let half = n / 2;
    let dx = grid.dx();
    let fgrid = frequency_grid(&grid);
    let mut buf = f.samples.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = dx / (2.0 * PI).sqrt();
    // output bin j holds FFT index k = j − N/2 (mod N)
    let samples = (0..n)
        .map(|j| {
            let k = (j + n - half) % n;
            let w = fgrid.x(j);
            buf[k] * Complex64::from_polar(scale, -w * grid.x_min)
        })
        .collect();
    GridSignal { grid: fgrid, samples }
}

/// Inverse of [`fourier_transform`]: rebuilds samples on `spatial` from a
/// spectrum on `frequency_grid(spatial)`.
pub fn inverse_fourier_transform(spectrum: &GridSignal, spatial: &Grid) -> Result<GridSignal> {
    let fgrid = frequency_grid(spatial);
    if !spectrum.grid.same_as(&fgrid) {
        return Err(FrameError::GridMismatch);
    }
    let n = spatial.len();
    let half = n / 2;
    let dx = spatial.dx();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        let k = (j + n - half) % n;
        let w = fgrid.x(j);
        buf[k] = spectrum.samples[j] * Complex64::from_polar(1.0, w * spatial.x_min);
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = (2.0 * PI).sqrt() / (n as f64 * dx);
    Ok(GridSignal { grid: *spatial, samples: buf.into_iter().map(|v| v * scale).collect() })
}

/// `f̂(ω)` at arbitrary angular frequencies by direct rectangle-rule
/// quadrature of the transform integral. Phases are advanced by recurrence.
pub fn fourier_at(f: &GridSignal, omegas: &[f64]) -> Vec<Complex64> {
    let grid = f.grid;
    let dx = grid.dx();
    let scale = dx / (2.0 * PI).sqrt();
    omegas
        .par_iter()
        .map(|&w| {
            let step = Complex64::from_polar(1.0, -w * dx);
            let mut phase = Complex64::from_polar(1.0, -w * grid.x_min);
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, v) in f.samples.iter().enumerate() {
                acc += v * phase;
                phase *= step;
                if i % 256 == 255 {
                    // renormalize against drift of the recurrence
                    phase = Complex64::from_polar(1.0, -w * grid.x(i + 1));
                }
            }
            acc * scale
        })
        .collect()
}

/// Fraction of spectral energy at negative angular frequencies.
pub fn negative_frequency_fraction(f: &GridSignal) -> f64 {
    let spec = fourier_transform(f);
    let total: f64 = spec.samples.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let neg: f64 = spec
        .grid
        .abscissae()
        .zip(&spec.samples)
        .filter(|(w, _)| *w < 0.0)
        .map(|(_, v)| v.norm_sqr())
        .sum();
    neg / total
}

/// Families produced by [`random_test_signals`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    /// Gaussian wave packets with carriers in `[−0.25, 0.25]` and envelope
    /// widths in `[2, 2.5]`: spectrally concentrated in `|ω| ≲ 2`.
    Bandlimited,
    /// Randomly modulated smooth bumps supported inside the central half of
    /// the grid.
    Compact,
    /// Wave packets with carriers in `[3, 4]` and envelope width 1.5, with
    /// every negative-frequency bin masked to zero.
    Hardy,
}

/// A deterministic battery of test signals. Each signal is rescaled so that
/// its squared norm is drawn uniformly from `[0.5, 2]`.
pub fn random_test_signals(
    grid: &Grid,
    count: usize,
    seed: u64,
    kind: SignalKind,
) -> Vec<GridSignal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ kind_salt(kind));
    (0..count)
        .map(|_| {
            let raw = match kind {
                SignalKind::Bandlimited => wave_packets(grid, &mut rng, (-0.25, 0.25), (2.0, 2.5), 1.0),
                SignalKind::Compact => compact_bump(grid, &mut rng),
                SignalKind::Hardy => {
                    let s = wave_packets(grid, &mut rng, (3.0, 4.0), (1.5, 1.5), 1.0);
                    mask_negative_frequencies(&s)
                }
            };
            let target = rng.random_range(0.5..=2.0);
            let scale = (target / norm_sq(&raw)).sqrt();
            raw.scaled(Complex64::new(scale, 0.0))
        })
        .collect()
}

fn kind_salt(kind: SignalKind) -> u64 {
    match kind {
        SignalKind::Bandlimited => 0x0b1a_0000,
        SignalKind::Compact => 0x0c0f_0000,
        SignalKind::Hardy => 0x0a5d_0000,
    }
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn wave_packets(
    grid: &Grid,
    rng: &mut ChaCha8Rng,
    carriers: (f64, f64),
    widths: (f64, f64),
    center_span: f64,
) -> GridSignal {
    let count = rng.random_range(1..=4);
    let packets: Vec<(Complex64, f64, f64, f64)> = (0..count)
        .map(|_| {
            let c = complex_normal(rng);
            let w = if carriers.0 < carriers.1 { rng.random_range(carriers.0..carriers.1) } else { carriers.0 };
            let sigma = if widths.0 < widths.1 { rng.random_range(widths.0..widths.1) } else { widths.0 };
            let t = rng.random_range(-center_span..=center_span);
            (c, w, sigma, t)
        })
        .collect();
    GridSignal::from_fn(*grid, |x| {
        packets
            .iter()
            .map(|&(c, w, sigma, t)| {
                let u = (x - t) / sigma;
                c * Complex64::from_polar((-0.5 * u * u).exp(), w * (x - t))
            })
            .sum()
    })
}

fn compact_bump(grid: &Grid, rng: &mut ChaCha8Rng) -> GridSignal {
    let quarter = 0.25 * grid.width();
    let (inner_lo, inner_hi) = (grid.x_min() + quarter, grid.x_max() - quarter);
    let half_width = rng.random_range(1.0..=(0.5 * (inner_hi - inner_lo)).min(4.0));
    let center = rng.random_range((inner_lo + half_width)..=(inner_hi - half_width));
    let modes: Vec<(Complex64, f64)> = (0..rng.random_range(1..=5))
        .map(|_| (complex_normal(rng), rng.random_range(-4.0..=4.0)))
        .collect();
    GridSignal::from_fn(*grid, |x| {
        let t = (x - center) / half_width;
        if t.abs() >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        let env = (1.0 - 1.0 / (1.0 - t * t)).exp();
        modes.iter().map(|&(c, w)| c * Complex64::from_polar(env, w * x)).sum()
    })
}

/// Zeroes every spectral bin with `ω < 0`.
pub fn mask_negative_frequencies(f: &GridSignal) -> GridSignal {
    let mut spec = fourier_transform(f);
    let fgrid = spec.grid;
    for (j, v) in spec.samples.iter_mut().enumerate() {
        if fgrid.x(j) < 0.0 {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    inverse_fourier_transform(&spec, &f.grid).expect("spectrum lives on the paired grid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(1.0, 0.0, 10).is_err());
        assert!(Grid::new(0.0, 1.0, 1).is_err());
        let g = Grid::new(-1.0, 2.0, 3 * 64).unwrap();
        assert_eq!(g.dx(), 1.0 / 64.0);
    }

    #[test]
    fn unit_box_inner_product() {
        let g = Grid::new(-1.0, 2.0, 3 * 128).unwrap();
        let f = GridSignal::from_real_fn(g, |x| if (0.0..1.0).contains(&x) { 1.0 } else { 0.0 });
        assert!((inner_product(&f, &f).unwrap() - c(1.0, 0.0)).norm() < 1e-14);
        let g2 = f.scaled(c(0.0, 1.0));
        assert!((inner_product(&f, &g2).unwrap() - c(0.0, 1.0)).norm() < 1e-14);
        assert!((norm_sq(&f) - 1.0).abs() < 1e-14);
        assert_eq!(norm_sq(&GridSignal::zeros(g)), 0.0);
    }

    #[test]
    fn grid_mismatch_detected() {
        let a = GridSignal::zeros(Grid::new(0.0, 1.0, 8).unwrap());
        let b = GridSignal::zeros(Grid::new(0.0, 1.0, 16).unwrap());
        assert_eq!(inner_product(&a, &b), Err(FrameError::GridMismatch));
    }

    #[test]
    fn sine_cosine_orthogonal_on_period() {
        let g = Grid::new(0.0, 1.0, 1024).unwrap();
        let s = GridSignal::from_real_fn(g, |x| (2.0 * PI * x).sin());
        let co = GridSignal::from_real_fn(g, |x| (2.0 * PI * x).cos());
        assert!(inner_product(&s, &co).unwrap().norm() < 1e-12);
    }

    #[test]
    fn phi1_norm_converges() {
        let g = Grid::new(-1.0, 3.0, 40_000).unwrap();
        let f = GridSignal::from_real_fn(g, |x| {
            if x > 0.0 && x <= 1.0 {
                1.0 + x
            } else if x > 1.0 && x <= 2.0 {
                x
            } else {
                0.0
            }
        });
        assert!((norm_sq(&f) - 14.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn spike_has_flat_spectrum() {
        let g = Grid::default_acceptance();
        let mut f = GridSignal::zeros(g);
        let i0 = g.index_range(-g.dx() / 2.0, g.dx() / 2.0).0;
        assert!(g.x(i0).abs() < 1e-12);
        f.samples_mut()[i0] = c(1.0 / g.dx(), 0.0);
        let spec = fourier_transform(&f);
        let expected = 1.0 / (2.0 * PI).sqrt();
        for v in spec.samples() {
            assert!((v.norm() - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn gaussian_is_self_dual() {
        let g = Grid::new(-20.0, 20.0, 1 << 14).unwrap();
        let f = GridSignal::from_real_fn(g, |x| (-0.5 * x * x).exp());
        let spec = fourier_transform(&f);
        for (w, v) in spec.grid().abscissae().zip(spec.samples()) {
            if w.abs() <= 5.0 {
                assert!((v - c((-0.5 * w * w).exp(), 0.0)).norm() < 1e-6, "w = {w}");
            }
        }
    }

    #[test]
    fn direct_transform_matches_fft_on_bins() {
        let g = Grid::default_acceptance();
        let f = &random_test_signals(&g, 1, 3, SignalKind::Bandlimited)[0];
        let spec = fourier_transform(f);
        let picks = [100usize, 4000, 4096, 4200, 8000];
        let ws: Vec<f64> = picks.iter().map(|&j| spec.grid().x(j)).collect();
        let direct = fourier_at(f, &ws);
        for (d, &j) in direct.iter().zip(&picks) {
            assert!((d - spec.samples()[j]).norm() < 1e-10);
        }
    }

    #[test]
    fn inverse_round_trip() {
        let g = Grid::default_acceptance();
        let f = &random_test_signals(&g, 1, 5, SignalKind::Compact)[0];
        let back = inverse_fourier_transform(&fourier_transform(f), &g).unwrap();
        let err = norm_sq(&back.sub(f).unwrap());
        assert!(err < 1e-20);
    }

    #[test]
    fn batteries_are_deterministic_and_normalized() {
        let g = Grid::default_acceptance();
        for kind in [SignalKind::Bandlimited, SignalKind::Compact, SignalKind::Hardy] {
            let a = random_test_signals(&g, 3, 7, kind);
            let b = random_test_signals(&g, 3, 7, kind);
            assert_eq!(a, b);
            for s in &a {
                let n = norm_sq(s);
                assert!((0.5 - 1e-12..=2.0 + 1e-12).contains(&n), "{kind:?}: {n}");
            }
        }
    }

    #[test]
    fn hardy_signals_have_no_negative_frequencies() {
        let g = Grid::default_acceptance();
        for s in random_test_signals(&g, 5, 11, SignalKind::Hardy) {
            assert!(negative_frequency_fraction(&s) < 1e-10);
        }
    }

    #[test]
    fn compact_signals_vanish_outside_central_half() {
        let g = Grid::default_acceptance();
        for s in random_test_signals(&g, 10, 2, SignalKind::Compact) {
            for (x, v) in g.abscissae().zip(s.samples()) {
                if x.abs() >= 8.0 {
                    assert_eq!(*v, c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn index_range_is_half_open() {
        let g = Grid::new(0.0, 4.0, 4).unwrap(); // samples 0,1,2,3
        assert_eq!(g.index_range(0.0, 2.0), (1, 3));
        assert_eq!(g.index_range(-1.0, 10.0), (0, 4));
        assert_eq!(g.index_range(5.0, 10.0).0, g.index_range(5.0, 10.0).1);
    }
}
