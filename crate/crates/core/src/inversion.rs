//! Noisy-sinogram inversion: multiplicative Gaussian noise, unfiltered
//! and filtered back-projection, the thresholded Hough trace-back, and
//! Frobenius-error evaluation of the results.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::images::{PixelImage, Rect};
use crate::par::for_each_row_chunk;
use crate::radon::{Provenance, Sinogram};
use crate::{Error, Result};

/// Noise model `S_n = S_t (1 + ℓ ε)`, `ε` i.i.d. standard normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Noise level; 1.0 means 100%.
    pub level: f64,
    /// Seed of the ChaCha8 generator.
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(level: f64, seed: u64) -> Result<Self> {
        if !(level >= 0.0) || !level.is_finite() {
            return Err(Error::Domain("noise level must be finite and >= 0".into()));
        }
        Ok(Self { level, seed })
    }
}

/// One standard-normal draw by the Box–Muller transform of two uniforms.
/// No rejection step, so the draw count per sample is fixed and seeded
/// runs reproduce bit-for-bit across platforms.
fn standard_normal(rng: &mut impl RngCore) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * SCALE; // (0, 1]
    let u2 = (rng.next_u64() >> 11) as f64 * SCALE; // [0, 1)
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Corrupts every sample independently: `S_n(i,j) = S_t(i,j) (1 + ℓ ε_ij)`
/// with row-major draw order. Deterministic for a fixed (level, seed).
///
/// Generator: ChaCha8, normal variates via Box–Muller.
pub fn add_noise(s: &Sinogram, spec: NoiseSpec) -> Sinogram {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut values = s.values.clone();
    for v in values.iter_mut() {
        let eps = standard_normal(&mut rng);
        *v += spec.level * eps * *v;
    }
    Sinogram { disc: s.disc.clone(), values, provenance: Provenance::Noisy }
}

/// Crude unfiltered back-projection:
/// `pixel(x) = Σ_i s(θ_i, γ = x·ω_i) Δθ` with linear interpolation in γ.
/// Samples outside the γ-range contribute nothing.
pub fn backproject(
    s: &Sinogram,
    width: usize,
    height: usize,
    window: Rect,
    threads: usize,
) -> Result<PixelImage> {
    if s.disc.dim() != 2 {
        return Err(Error::Domain("backproject needs a (theta, gamma) sinogram".into()));
    }
    let rows = s.rows();
    let cols = s.cols();
    let d_theta = s.disc.step(0);
    let d_gamma = s.disc.step(1);
    let gamma0 = s.disc.axis_center(1, s.disc.bounds().0[1]);
    let trig: Vec<(f64, f64)> = (0..rows)
        .map(|i| s.disc.axis_center(0, s.disc.bounds().0[0] + i as i64).sin_cos())
        .collect();

    let mut out = PixelImage::filled(width, height, window, 0.0)?;
    let px = out.pixel_size();
    let x0 = window.x_min + 0.5 * px;
    let y0 = window.y_max - 0.5 * px;
    for_each_row_chunk(out.values_mut(), width, threads, |row, line| {
        let y = y0 - row as f64 * px;
        for (col, cell) in line.iter_mut().enumerate() {
            let x = x0 + col as f64 * px;
            let mut acc = 0.0;
            for (i, &(sin_t, cos_t)) in trig.iter().enumerate() {
                let gamma = x * cos_t + y * sin_t;
                let p = (gamma - gamma0) / d_gamma;
                let j0 = p.floor();
                let frac = p - j0;
                let j0 = j0 as i64;
                if j0 >= 0 && (j0 as usize) < cols {
                    acc += (1.0 - frac) * s.values[i * cols + j0 as usize];
                }
                let j1 = j0 + 1;
                if j1 >= 0 && (j1 as usize) < cols {
                    acc += frac * s.values[i * cols + j1 as usize];
                }
            }
            *cell = acc * d_theta;
        }
    });
    Ok(out)
}

/// Frequency-domain filters for [`fbp`]. `RamLak` is the bare ramp; the
/// others multiply the ramp by an even window that tapers toward the
/// Nyquist cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    /// No filtering at all: plain back-projection.
    Unfiltered,
    RamLak,
    SheppLogan,
    Cosine,
    Hamming,
    Hann,
}

impl FilterKind {
    pub const ALL: [FilterKind; 6] = [
        FilterKind::Unfiltered,
        FilterKind::RamLak,
        FilterKind::SheppLogan,
        FilterKind::Cosine,
        FilterKind::Hamming,
        FilterKind::Hann,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FilterKind::Unfiltered => "none",
            FilterKind::RamLak => "ramlak",
            FilterKind::SheppLogan => "shepplogan",
            FilterKind::Cosine => "cosine",
            FilterKind::Hamming => "hamming",
            FilterKind::Hann => "hann",
        }
    }
}

impl std::str::FromStr for FilterKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(FilterKind::Unfiltered),
            "ramlak" => Ok(FilterKind::RamLak),
            "shepplogan" => Ok(FilterKind::SheppLogan),
            "cosine" => Ok(FilterKind::Cosine),
            "hamming" => Ok(FilterKind::Hamming),
            "hann" => Ok(FilterKind::Hann),
            other => Err(Error::Domain(format!(
                "unknown filter `{other}` (none, ramlak, shepplogan, cosine, hamming, hann)"
            ))),
        }
    }
}

/// Raised-cosine window `a0 + (1−a0) cos(πν/ν_N)`; Hamming and Hann are
/// the (0.54, 0.46) and (0.5, 0.5) constants of the same formula.
fn raised_cosine(a0: f64, x: f64) -> f64 {
    a0 + (1.0 - a0) * (std::f64::consts::PI * x).cos()
}

fn window_gain(kind: FilterKind, x: f64) -> f64 {
    // x = |nu| / nu_Nyquist in [0, 1]
    match kind {
        FilterKind::Unfiltered => 1.0,
        FilterKind::RamLak => 1.0,
        FilterKind::SheppLogan => {
            let u = 0.5 * std::f64::consts::PI * x;
            if u.abs() < 1e-12 {
                1.0
            } else {
                u.sin() / u
            }
        }
        FilterKind::Cosine => (0.5 * std::f64::consts::PI * x).cos(),
        FilterKind::Hamming => raised_cosine(0.54, x),
        FilterKind::Hann => raised_cosine(0.5, x),
    }
}

/// Filtered back-projection. Per θ-row: zero-pad to the next power of two
/// `≥ 2J`, forward DFT, multiply by `|ν| w(ν)`, inverse DFT, truncate,
/// then back-project the filtered rows.
pub fn fbp(
    s: &Sinogram,
    filter: FilterKind,
    width: usize,
    height: usize,
    window: Rect,
    threads: usize,
) -> Result<PixelImage> {
    if s.disc.dim() != 2 {
        return Err(Error::Domain("fbp needs a (theta, gamma) sinogram".into()));
    }
    if filter == FilterKind::Unfiltered {
        return backproject(s, width, height, window, threads);
    }
    let rows = s.rows();
    let cols = s.cols();
    let d_gamma = s.disc.step(1);
    let n = (2 * cols).next_power_of_two();
    let nyquist = 0.5 / d_gamma;

    let mut gains = vec![0.0f64; n];
    for (k, g) in gains.iter_mut().enumerate() {
        let nu = if k <= n / 2 {
            k as f64 / (n as f64 * d_gamma)
        } else {
            (k as f64 - n as f64) / (n as f64 * d_gamma)
        };
        *g = nu.abs() * window_gain(filter, nu.abs() / nyquist);
    }

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut filtered = Sinogram::zeros(s.disc.clone(), s.provenance);
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for i in 0..rows {
        buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
        for j in 0..cols {
            buf[j].re = s.values[i * cols + j];
        }
        fwd.process(&mut buf);
        for (c, &g) in buf.iter_mut().zip(&gains) {
            *c *= g;
        }
        inv.process(&mut buf);
        let scale = 1.0 / n as f64;
        for j in 0..cols {
            filtered.values[i * cols + j] = buf[j].re * scale;
        }
    }
    backproject(&filtered, width, height, window, threads)
}

/// Visits every pixel whose closed square the line
/// `γ − x₁cosθ − x₂sinθ = 0` intersects, exactly once (supercover
/// traversal). Iteration is band-wise along the dominant line direction.
fn supercover_visit(
    width: usize,
    height: usize,
    window: Rect,
    cos_t: f64,
    sin_t: f64,
    gamma: f64,
    mut visit: impl FnMut(usize, usize),
) {
    let px = (window.x_max - window.x_min) / width as f64;
    // direction of the line is (-sin, cos)
    if sin_t.abs() >= cos_t.abs() {
        // closer to horizontal: walk pixel columns, solve x2(x1)
        for col in 0..width {
            let xl = window.x_min + col as f64 * px;
            let xr = xl + px;
            let ya = (gamma - xl * cos_t) / sin_t;
            let yb = (gamma - xr * cos_t) / sin_t;
            let (ylo, yhi) = (ya.min(yb), ya.max(yb));
            // rows whose closed y-interval meets [ylo, yhi]
            let rlo = ((window.y_max - yhi) / px - 1.0).ceil().max(0.0) as usize;
            let rhi = ((window.y_max - ylo) / px).floor();
            if rhi < 0.0 || rlo >= height {
                continue;
            }
            let rhi = (rhi as usize).min(height - 1);
            for row in rlo..=rhi {
                visit(row, col);
            }
        }
    } else {
        // closer to vertical: walk pixel rows, solve x1(x2)
        for row in 0..height {
            let yt = window.y_max - row as f64 * px;
            let yb = yt - px;
            let xa = (gamma - yt * sin_t) / cos_t;
            let xb = (gamma - yb * sin_t) / cos_t;
            let (xlo, xhi) = (xa.min(xb), xa.max(xb));
            let clo = ((xlo - window.x_min) / px - 1.0).ceil().max(0.0) as usize;
            let chi = ((xhi - window.x_min) / px).floor();
            if chi < 0.0 || clo >= width {
                continue;
            }
            let chi = (chi as usize).min(width - 1);
            for col in clo..=chi {
                visit(row, col);
            }
        }
    }
}

/// Hough-threshold inversion of a (noisy) sinogram.
///
/// All pixels start at zero; every cell whose value passes the threshold
/// traces its line back into the image, adding `d₂ · S_n(θ_i, γ_j)` to
/// each crossed pixel. `threshold_fraction = 0` means "no threshold":
/// every cell with positive value is traced. For positive fractions the
/// cut is `value ≥ fraction · max(values)` with signed comparison, so at
/// fraction 1 exactly the maximal cells trace, and a negative cell never
/// passes a positive threshold. Traced increments keep their sign.
pub fn hough_invert(
    s: &Sinogram,
    width: usize,
    height: usize,
    window: Rect,
    threshold_fraction: f64,
    threads: usize,
) -> Result<PixelImage> {
    if s.disc.dim() != 2 {
        return Err(Error::Domain("hough_invert needs a (theta, gamma) sinogram".into()));
    }
    if !(0.0..=1.0).contains(&threshold_fraction) {
        return Err(Error::Domain("threshold fraction must lie in [0, 1]".into()));
    }
    let rows = s.rows();
    let cols = s.cols();
    let d_gamma = s.disc.step(1);
    let (lo0, lo1) = (s.disc.bounds().0[0], s.disc.bounds().0[1]);
    let max_v = s.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let traced = |v: f64| -> bool {
        if threshold_fraction == 0.0 {
            v > 0.0
        } else {
            v >= threshold_fraction * max_v
        }
    };

    let run_rows = |row_range: std::ops::Range<usize>, img: &mut PixelImage| {
        for i in row_range {
            let theta = s.disc.axis_center(0, lo0 + i as i64);
            let (sin_t, cos_t) = theta.sin_cos();
            for j in 0..cols {
                let v = s.values[i * cols + j];
                if !traced(v) {
                    continue;
                }
                let gamma = s.disc.axis_center(1, lo1 + j as i64);
                let add = d_gamma * v;
                supercover_visit(width, height, window, cos_t, sin_t, gamma, |r, c| {
                    let cur = img.get(r, c);
                    img.set(r, c, cur + add);
                });
            }
        }
    };

    if threads <= 1 || rows <= 1 {
        let mut img = PixelImage::filled(width, height, window, 0.0)?;
        run_rows(0..rows, &mut img);
        return Ok(img);
    }
    // per-thread partial images over contiguous row chunks, merged in
    // chunk order: deterministic for a fixed thread count, and within
    // rounding across thread counts
    let chunk = rows.div_ceil(threads.min(rows));
    let mut partials: Vec<PixelImage> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        let run_rows = &run_rows;
        let mut start = 0usize;
        while start < rows {
            let end = (start + chunk).min(rows);
            handles.push(scope.spawn(move || {
                let mut img = PixelImage::filled(width, height, window, 0.0).expect("valid dims");
                run_rows(start..end, &mut img);
                img
            }));
            start = end;
        }
        for h in handles {
            partials.push(h.join().expect("tracer thread panicked"));
        }
    });
    let mut img = partials.remove(0);
    for p in partials {
        for (dst, src) in img.values_mut().iter_mut().zip(p.values()) {
            *dst += src;
        }
    }
    Ok(img)
}

/// Evaluation record for one reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub method: String,
    /// Threshold fraction for Hough runs; absent for BP/FBP rows.
    pub threshold: Option<f64>,
    pub seed: Option<u64>,
    /// Frobenius norm of the masked difference after grey rescaling.
    pub error: f64,
    /// Set when the reconstruction had no dynamic range on the mask; the
    /// rescaled image is then defined as all zeros.
    pub constant_input: bool,
    /// Min/max actually used for the grey rescale.
    pub rescale_min: f64,
    pub rescale_max: f64,
}

/// Grey-rescales the reconstruction to [0, 1] over the masked-in pixels
/// (min-max), then reports `sqrt(Σ_masked (recon − truth)²)`. The rescale
/// makes the error invariant under positive affine maps of the input.
pub fn evaluate(
    recon: &PixelImage,
    truth: &PixelImage,
    mask: impl Fn(f64, f64) -> bool,
    method: &str,
) -> Result<ErrorReport> {
    if recon.width() != truth.width() || recon.height() != truth.height() {
        return Err(Error::Domain("evaluate: image dimensions differ".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for row in 0..recon.height() {
        for col in 0..recon.width() {
            let (x, y) = recon.pixel_center(row, col);
            if mask(x, y) {
                let v = recon.get(row, col);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    if !lo.is_finite() {
        return Err(Error::Domain("evaluate: mask selects no pixels".into()));
    }
    let constant = !(hi - lo > 0.0);
    let span = if constant { 1.0 } else { hi - lo };
    let mut sum_sq = 0.0;
    for row in 0..recon.height() {
        for col in 0..recon.width() {
            let (x, y) = recon.pixel_center(row, col);
            if mask(x, y) {
                let r = if constant { 0.0 } else { (recon.get(row, col) - lo) / span };
                let d = r - truth.get(row, col);
                sum_sq += d * d;
            }
        }
    }
    Ok(ErrorReport {
        method: method.to_string(),
        threshold: None,
        seed: None,
        error: sum_sq.sqrt(),
        constant_input: constant,
        rescale_min: lo,
        rescale_max: hi,
    })
}

/// Sweep settings: noise level, thresholds, seeds, output raster.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub level: f64,
    pub thresholds: Vec<f64>,
    pub seeds: Vec<u64>,
    pub out_width: usize,
    pub out_height: usize,
    pub threads: usize,
}

/// Full experiment grid: for every seed, a fresh noise realization of the
/// true sinogram, one Hough inversion per threshold, plus the six BP/FBP
/// baselines. Output order is seeds-outer, thresholds-then-filters inner,
/// and is part of the CSV contract.
pub fn threshold_sweep(
    s_true: &Sinogram,
    truth: &PixelImage,
    mask: impl Fn(f64, f64) -> bool,
    cfg: &SweepConfig,
) -> Result<Vec<ErrorReport>> {
    if cfg.thresholds.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::Domain("thresholds must lie in [0, 1]".into()));
    }
    let window = truth.window();
    let mut out = Vec::new();
    for &seed in &cfg.seeds {
        let noisy = add_noise(s_true, NoiseSpec::new(cfg.level, seed)?);
        for &tau in &cfg.thresholds {
            let recon =
                hough_invert(&noisy, cfg.out_width, cfg.out_height, window, tau, cfg.threads)?;
            let mut rep = evaluate(&recon, truth, &mask, "hough")?;
            rep.threshold = Some(tau);
            rep.seed = Some(seed);
            out.push(rep);
        }
        for filter in FilterKind::ALL {
            let recon = fbp(&noisy, filter, cfg.out_width, cfg.out_height, window, cfg.threads)?;
            let label =
                if filter == FilterKind::Unfiltered { "bp-none".to_string() } else { format!("fbp-{}", filter.name()) };
            let mut rep = evaluate(&recon, truth, &mask, &label)?;
            rep.seed = Some(seed);
            out.push(rep);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Discretization;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn grid(i: usize, j: usize) -> Discretization {
        Discretization::span(&[0.0, -SQRT_2], &[PI, SQRT_2], &[i, j]).unwrap()
    }

    fn disc_sinogram(i: usize, j: usize, radius: f64) -> Sinogram {
        let disc = grid(i, j);
        let mut s = Sinogram::zeros(disc.clone(), Provenance::RadonExact);
        for jj in 0..j {
            let gamma = disc.axis_center(1, jj as i64);
            let v = (radius * radius - gamma * gamma).max(0.0).sqrt() * 2.0;
            for ii in 0..i {
                *s.at_mut(ii, jj) = v;
            }
        }
        s
    }

    #[test]
    fn noise_level_zero_is_identity() {
        let s = disc_sinogram(16, 16, 0.5);
        let n = add_noise(&s, NoiseSpec::new(0.0, 42).unwrap());
        assert_eq!(n.values, s.values);
        assert_eq!(n.provenance, Provenance::Noisy);
    }

    #[test]
    fn noise_is_multiplicative_and_deterministic() {
        let disc = grid(8, 8);
        let zero = Sinogram::zeros(disc, Provenance::RadonExact);
        let noisy = add_noise(&zero, NoiseSpec::new(1.0, 3).unwrap());
        assert!(noisy.values.iter().all(|&v| v == 0.0), "zero sinogram stays zero");
        let s = disc_sinogram(16, 16, 0.5);
        let a = add_noise(&s, NoiseSpec::new(1.0, 7).unwrap());
        let b = add_noise(&s, NoiseSpec::new(1.0, 7).unwrap());
        assert_eq!(a.values, b.values);
        let c = add_noise(&s, NoiseSpec::new(1.0, 8).unwrap());
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn noise_relative_deviation_is_standard_normal() {
        let disc = Discretization::span(&[0.0, -1.0], &[PI, 1.0], &[320, 320]).unwrap();
        let mut s = Sinogram::zeros(disc, Provenance::RadonExact);
        s.values.iter_mut().for_each(|v| *v = 2.5);
        let n = add_noise(&s, NoiseSpec::new(1.0, 11).unwrap());
        let devs: Vec<f64> = n.values.iter().map(|&v| (v - 2.5) / 2.5).collect();
        let count = devs.len() as f64;
        let mean = devs.iter().sum::<f64>() / count;
        let var = devs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (count - 1.0);
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var.sqrt() - 1.0).abs() < 0.05, "std {}", var.sqrt());
    }

    #[test]
    fn backproject_zero_and_linearity() {
        let zero = Sinogram::zeros(grid(12, 12), Provenance::RadonExact);
        let img = backproject(&zero, 16, 16, Rect::unit(), 1).unwrap();
        assert!(img.values().iter().all(|&v| v == 0.0));

        let mut s1 = Sinogram::zeros(grid(12, 12), Provenance::RadonExact);
        let mut s2 = Sinogram::zeros(grid(12, 12), Provenance::RadonExact);
        for k in 0..s1.values.len() {
            s1.values[k] = (k as f64 * 0.7).sin();
            s2.values[k] = (k as f64 * 0.3).cos();
        }
        let mut s12 = s1.clone();
        for k in 0..s12.values.len() {
            s12.values[k] = 2.0 * s1.values[k] - 3.0 * s2.values[k];
        }
        let b1 = backproject(&s1, 8, 8, Rect::unit(), 1).unwrap();
        let b2 = backproject(&s2, 8, 8, Rect::unit(), 1).unwrap();
        let b12 = backproject(&s12, 8, 8, Rect::unit(), 1).unwrap();
        for k in 0..b12.values().len() {
            let lin = 2.0 * b1.values()[k] - 3.0 * b2.values()[k];
            assert!((b12.values()[k] - lin).abs() < 1e-10);
        }
    }

    #[test]
    fn backproject_disc_is_radially_symmetric() {
        let s = disc_sinogram(128, 129, 0.5);
        let img = backproject(&s, 65, 65, Rect::unit(), 1).unwrap();
        let peak = img.get(32, 32);
        // probe a ring of radius ~0.4 through pixel centers
        let probes = [(32usize, 45usize), (45, 32), (32, 19), (19, 32)];
        let vals: Vec<f64> = probes.iter().map(|&(r, c)| img.get(r, c)).collect();
        let spread = vals.iter().cloned().fold(f64::MIN, f64::max)
            - vals.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 0.01 * peak, "asymmetry {spread} vs peak {peak}");
    }

    #[test]
    fn hann_is_hamming_with_half_constants() {
        for k in 0..=10 {
            let x = k as f64 / 10.0;
            assert_eq!(window_gain(FilterKind::Hann, x), raised_cosine(0.5, x));
            assert_eq!(window_gain(FilterKind::Hamming, x), raised_cosine(0.54, x));
        }
        // Hann vanishes at the cutoff, all windows are even by |nu| use
        assert!(window_gain(FilterKind::Hann, 1.0).abs() < 1e-15);
    }

    #[test]
    fn fbp_zero_is_zero_and_linear() {
        let zero = Sinogram::zeros(grid(12, 16), Provenance::RadonExact);
        let img = fbp(&zero, FilterKind::RamLak, 8, 8, Rect::unit(), 1).unwrap();
        assert!(img.values().iter().all(|&v| v == 0.0));

        let mut s1 = Sinogram::zeros(grid(10, 16), Provenance::RadonExact);
        let mut s2 = Sinogram::zeros(grid(10, 16), Provenance::RadonExact);
        for k in 0..s1.values.len() {
            s1.values[k] = (k as f64 * 0.11).sin();
            s2.values[k] = (k as f64 * 0.23).cos();
        }
        let mut s12 = s1.clone();
        for k in 0..s12.values.len() {
            s12.values[k] = 0.5 * s1.values[k] + 1.5 * s2.values[k];
        }
        let f1 = fbp(&s1, FilterKind::Hann, 8, 8, Rect::unit(), 1).unwrap();
        let f2 = fbp(&s2, FilterKind::Hann, 8, 8, Rect::unit(), 1).unwrap();
        let f12 = fbp(&s12, FilterKind::Hann, 8, 8, Rect::unit(), 1).unwrap();
        for k in 0..f12.values().len() {
            let lin = 0.5 * f1.values()[k] + 1.5 * f2.values()[k];
            assert!((f12.values()[k] - lin).abs() < 1e-8);
        }
    }

    #[test]
    fn hough_invert_single_cell_traces_one_row() {
        // 5 theta cells put a center exactly at pi/2; odd raster keeps the
        // traced horizontal line strictly inside the middle pixel row
        let disc = grid(5, 9);
        let mut s = Sinogram::zeros(disc.clone(), Provenance::Noisy);
        let (i, j) = (2usize, 4usize);
        assert!((disc.axis_center(0, 2) - FRAC_PI_2).abs() < 1e-15);
        assert!(disc.axis_center(1, 4).abs() < 1e-15);
        *s.at_mut(i, j) = 2.0;
        let img = hough_invert(&s, 9, 9, Rect::unit(), 0.0, 1).unwrap();
        let d2 = disc.step(1);
        for row in 0..9 {
            for col in 0..9 {
                let v = img.get(row, col);
                if row == 4 {
                    assert!((v - d2 * 2.0).abs() < 1e-12, "center row gains exactly d2*v");
                } else {
                    assert_eq!(v, 0.0, "row {row} col {col}");
                }
            }
        }
    }

    #[test]
    fn hough_invert_threshold_boundaries() {
        let disc = grid(6, 7);
        let mut s = Sinogram::zeros(disc, Provenance::Noisy);
        s.values[3] = 1.0;
        s.values[10] = 5.0;
        s.values[20] = -2.0;
        // threshold 1: only the maximal cell traces
        let only_max = hough_invert(&s, 7, 7, Rect::unit(), 1.0, 1).unwrap();
        let total: f64 = only_max.values().iter().sum();
        let d2 = 2.0 * SQRT_2 / 7.0;
        let cells = (total / (5.0 * d2)).round();
        assert!(total > 0.0 && cells >= 1.0);
        // all-zero sinogram maps to the zero image
        let zero = Sinogram::zeros(grid(6, 7), Provenance::Noisy);
        let img = hough_invert(&zero, 7, 7, Rect::unit(), 0.3, 1).unwrap();
        assert!(img.values().iter().all(|&v| v == 0.0));
        // negative cells never pass a positive threshold
        let neg_only = hough_invert(&s, 7, 7, Rect::unit(), 0.9, 1).unwrap();
        assert!(neg_only.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn traced_cell_set_grows_as_threshold_decreases() {
        let s = add_noise(&disc_sinogram(24, 25, 0.6), NoiseSpec::new(1.0, 5).unwrap());
        let max_v = s.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let count = |tau: f64| {
            s.values
                .iter()
                .filter(|&&v| if tau == 0.0 { v > 0.0 } else { v >= tau * max_v })
                .count()
        };
        let mut prev = 0usize;
        for tau in [0.9, 0.6, 0.3, 0.0] {
            let c = count(tau);
            assert!(c >= prev, "tau {tau}: {c} < {prev}");
            prev = c;
        }
        assert!(count(0.0) > count(0.9));
    }

    #[test]
    fn supercover_matches_bruteforce_on_random_lines() {
        let window = Rect::unit();
        let (w, h) = (17usize, 17usize);
        let a = 1.0 / w as f64;
        let mut state = 99u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let theta = next() * PI;
            let gamma = (next() - 0.5) * 2.0 * SQRT_2;
            let (sin_t, cos_t) = theta.sin_cos();
            let mut visited = vec![false; w * h];
            let mut dup = false;
            supercover_visit(w, h, window, cos_t, sin_t, gamma, |r, c| {
                if visited[r * w + c] {
                    dup = true;
                }
                visited[r * w + c] = true;
            });
            assert!(!dup, "pixel visited twice");
            let probe = PixelImage::filled(w, h, window, 0.0).unwrap();
            for row in 0..h {
                for col in 0..w {
                    let (cx, cy) = probe.pixel_center(row, col);
                    let dist = (gamma - cx * cos_t - cy * sin_t).abs();
                    let brute = dist <= a * (cos_t.abs() + sin_t.abs());
                    assert_eq!(
                        visited[row * w + col],
                        brute,
                        "theta={theta} gamma={gamma} row={row} col={col} dist={dist}"
                    );
                }
            }
        }
    }

    #[test]
    fn evaluate_properties() {
        let truth = crate::images::shepp_logan(32, 32).unwrap();
        let mask = |x: f64, y: f64| crate::images::shepp_logan_inside(x, y);
        let perfect = evaluate(&truth, &truth, mask, "self").unwrap();
        assert!(perfect.error < 1e-12);
        // affine rescales of the input change nothing
        let mut scaled = truth.clone();
        scaled.values_mut().iter_mut().for_each(|v| *v = 3.0 * *v + 0.2);
        let same = evaluate(&scaled, &truth, mask, "affine").unwrap();
        assert!(same.error < 1e-10, "{}", same.error);
        // constant reconstruction flags and compares as zeros
        let flat = PixelImage::filled(32, 32, Rect::unit(), 0.7).unwrap();
        let rep = evaluate(&flat, &truth, mask, "flat").unwrap();
        assert!(rep.constant_input);
        let mut zero_err = 0.0;
        for row in 0..32 {
            for col in 0..32 {
                let (x, y) = truth.pixel_center(row, col);
                if mask(x, y) {
                    zero_err += truth.get(row, col).powi(2);
                }
            }
        }
        assert!((rep.error - zero_err.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn invert_is_stable_across_thread_counts() {
        let s = add_noise(&disc_sinogram(40, 41, 0.5), NoiseSpec::new(1.0, 2).unwrap());
        let one = hough_invert(&s, 33, 33, Rect::unit(), 0.2, 1).unwrap();
        let four = hough_invert(&s, 33, 33, Rect::unit(), 0.2, 4).unwrap();
        let scale = one.values().iter().cloned().fold(f64::MIN, f64::max).max(1e-300);
        for k in 0..one.values().len() {
            let d = (one.values()[k] - four.values()[k]).abs();
            assert!(d <= 1e-9 * scale, "pixel {k}: {d}");
        }
    }
}
