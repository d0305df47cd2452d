//! Browser bindings for the interactive demo page in `www/`.
//!
//! Three explorable operations:
//! * phantom → exact Radon sinogram → noisy sinogram,
//! * inversion of the noisy sinogram (FBP filters vs Hough threshold)
//!   with live Frobenius errors,
//! * accumulator-based detection of a Weierstrass cubic from noisy
//!   points.
//!
//! All images cross the boundary as RGBA byte buffers; the JS side only
//! blits them into canvases.

use wasm_bindgen::prelude::*;

use sinolab::convergence::TestFunction;
use sinolab::families::weierstrass_cubic;
use sinolab::grid::Discretization;
use sinolab::hough::{accumulate_discrete, detect_peaks, HoughCounter};
use sinolab::images::{shepp_logan, shepp_logan_inside, DiscreteImage, PixelImage, Rect};
use sinolab::inversion::{add_noise, evaluate, fbp, hough_invert, FilterKind, NoiseSpec};
use sinolab::radon::{sinogram_pixel, Normalization, Sinogram};

const PI: f64 = std::f64::consts::PI;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn err_js(e: sinolab::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Min-max normalized grayscale RGBA buffer.
fn rgba(values: impl Iterator<Item = f64>, len: usize) -> Vec<u8> {
    let vals: Vec<f64> = values.collect();
    debug_assert_eq!(vals.len(), len);
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = Vec::with_capacity(len * 4);
    for v in vals {
        let g = (((v - lo) / span).clamp(0.0, 1.0) * 255.0).round() as u8;
        out.extend_from_slice(&[g, g, g, 255]);
    }
    out
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn normal(state: &mut u64) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let u1 = ((splitmix(state) >> 11) + 1) as f64 * SCALE;
    let u2 = (splitmix(state) >> 11) as f64 * SCALE;
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Phantom + sinogram + inversion playground.
#[wasm_bindgen]
pub struct TomoDemo {
    truth: PixelImage,
    sino: Sinogram,
    noisy: Sinogram,
    noise_key: (u64, u64),
    last_error: f64,
}

#[wasm_bindgen]
impl TomoDemo {
    /// Builds the phantom at `size`² and its exact sinogram on an
    /// `i_count × j_count` grid over `θ ∈ [0, π)`, `γ ∈ [−√2, √2]`.
    #[wasm_bindgen(constructor)]
    pub fn new(size: u32, i_count: u32, j_count: u32) -> Result<TomoDemo, JsValue> {
        let truth = shepp_logan(size as usize, size as usize).map_err(err_js)?;
        let disc = Discretization::span(
            &[0.0, -SQRT_2],
            &[PI, SQRT_2],
            &[i_count as usize, j_count as usize],
        )
        .map_err(err_js)?;
        let sino = sinogram_pixel(&truth, &disc, Normalization::UnitGradient, 1).map_err(err_js)?;
        let noisy = sino.clone();
        Ok(TomoDemo { truth, sino, noisy, noise_key: (0, 0), last_error: 0.0 })
    }

    pub fn phantom_size(&self) -> u32 {
        self.truth.width() as u32
    }

    pub fn sino_width(&self) -> u32 {
        self.sino.rows() as u32 // theta axis, drawn horizontally
    }

    pub fn sino_height(&self) -> u32 {
        self.sino.cols() as u32
    }

    pub fn phantom_rgba(&self) -> Vec<u8> {
        let n = self.truth.width() * self.truth.height();
        rgba(self.truth.values().iter().copied(), n)
    }

    fn sino_rgba(s: &Sinogram) -> Vec<u8> {
        let (w, h) = (s.rows(), s.cols());
        // gamma runs upward on screen
        let it = (0..h).flat_map(move |r| (0..w).map(move |i| s.at(i, h - 1 - r)));
        rgba(it, w * h)
    }

    pub fn sinogram_rgba(&self) -> Vec<u8> {
        Self::sino_rgba(&self.sino)
    }

    fn ensure_noisy(&mut self, level: f64, seed: u64) {
        let key = (level.to_bits(), seed);
        if self.noise_key != key {
            self.noisy = add_noise(&self.sino, NoiseSpec { level, seed });
            self.noise_key = key;
        }
    }

    pub fn noisy_sinogram_rgba(&mut self, level: f64, seed: u32) -> Vec<u8> {
        self.ensure_noisy(level, seed as u64);
        Self::sino_rgba(&self.noisy)
    }

    fn record_error(&mut self, recon: &PixelImage, method: &str) -> Result<(), JsValue> {
        let rep = evaluate(recon, &self.truth, shepp_logan_inside, method).map_err(err_js)?;
        self.last_error = rep.error;
        Ok(())
    }

    /// FBP reconstruction of the current noisy sinogram; `filter` is one
    /// of none, ramlak, shepplogan, cosine, hamming, hann.
    pub fn reconstruct_fbp(
        &mut self,
        level: f64,
        seed: u32,
        filter: &str,
        out_size: u32,
    ) -> Result<Vec<u8>, JsValue> {
        self.ensure_noisy(level, seed as u64);
        let kind: FilterKind = filter.parse().map_err(err_js)?;
        let n = out_size as usize;
        let recon = fbp(&self.noisy, kind, n, n, Rect::unit(), 1).map_err(err_js)?;
        self.record_error(&recon, "fbp")?;
        Ok(rgba(recon.values().iter().copied(), n * n))
    }

    /// Hough trace-back reconstruction at the given threshold fraction.
    pub fn reconstruct_hough(
        &mut self,
        level: f64,
        seed: u32,
        threshold: f64,
        out_size: u32,
    ) -> Result<Vec<u8>, JsValue> {
        self.ensure_noisy(level, seed as u64);
        let n = out_size as usize;
        let recon =
            hough_invert(&self.noisy, n, n, Rect::unit(), threshold, 1).map_err(err_js)?;
        self.record_error(&recon, "hough")?;
        Ok(rgba(recon.values().iter().copied(), n * n))
    }

    /// Frobenius error (masked, grey-rescaled) of the last reconstruction.
    pub fn last_error(&self) -> f64 {
        self.last_error
    }

    /// Pairs the current noisy sinogram against a bump test function
    /// centered at (θc, γc); exposes the weak pairing used by the
    /// convergence studies.
    pub fn pair_bump(&self, tc: f64, gc: f64, tr: f64, gr: f64) -> Result<f64, JsValue> {
        let psi = TestFunction::bump(vec![tc, gc], vec![tr, gr]).map_err(err_js)?;
        Ok(sinolab::convergence::pair_grid(&self.noisy, &psi))
    }
}

/// Accumulator detection of `y² = x³ + a x + b` from sampled points.
#[wasm_bindgen]
pub struct CubicDemo {
    counter: HoughCounter,
    points: Vec<f64>,
    peak: Vec<f64>,
}

#[wasm_bindgen]
impl CubicDemo {
    /// Samples `n_points` on the cubic with parameters `(a, b)`, perturbs
    /// them by gaussian noise of the given scale, and accumulates over an
    /// 81×81 grid on `(a, b) ∈ [−2, 2]²` with steps 0.05.
    #[wasm_bindgen(constructor)]
    pub fn new(a: f64, b: f64, n_points: u32, noise: f64, seed: u32) -> Result<CubicDemo, JsValue> {
        let fam = weierstrass_cubic();
        let n = n_points.max(2) as usize;
        let mut xs = Vec::new();
        let mut probe = -2.0;
        while probe <= 2.0 {
            if probe * probe * probe + a * probe + b >= 0.0 {
                xs.push(probe);
            }
            probe += 0.002;
        }
        if xs.len() < n {
            return Err(JsValue::from_str("curve has too few real points in [-2, 2]"));
        }
        let mut state = seed as u64 ^ 0xdeadbeef;
        let mut pts = Vec::with_capacity(n);
        for k in 0..n {
            let x1 = xs[k * (xs.len() - 1) / (n - 1)];
            let y2 = x1 * x1 * x1 + a * x1 + b;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let (px, py) = (x1 + noise * normal(&mut state), sign * y2.sqrt() + noise * normal(&mut state));
            pts.push(vec![px, py]);
        }
        let flat: Vec<f64> = pts.iter().flatten().copied().collect();
        let img = DiscreteImage::new(pts, vec![1.0; n]).map_err(err_js)?;
        let disc = Discretization::new(vec![-2.0, -2.0], vec![0.05, 0.05], vec![0, 0], vec![80, 80])
            .map_err(err_js)?;
        let counter = accumulate_discrete(&fam, &img, &disc).map_err(err_js)?;
        let top = detect_peaks(&counter, 1, 1).map_err(err_js)?;
        let peak = vec![top[0].center[0], top[0].center[1], top[0].value];
        Ok(CubicDemo { counter, points: flat, peak })
    }

    pub fn acc_cells(&self) -> u32 {
        81
    }

    /// Accumulator as RGBA; a-axis horizontal, b-axis upward.
    pub fn accumulator_rgba(&self) -> Vec<u8> {
        let it = (0..81usize)
            .flat_map(move |r| (0..81usize).map(move |ia| self.counter.values[ia * 81 + (80 - r)]));
        rgba(it, 81 * 81)
    }

    /// `[a, b, votes]` of the winning cell.
    pub fn peak(&self) -> Vec<f64> {
        self.peak.clone()
    }

    /// Flat `[x0, y0, x1, y1, …]` of the sampled points.
    pub fn points(&self) -> Vec<f64> {
        self.points.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_buffers_have_expected_shapes() {
        let mut demo = TomoDemo::new(48, 60, 41).unwrap();
        assert_eq!(demo.phantom_rgba().len(), 48 * 48 * 4);
        assert_eq!(demo.sinogram_rgba().len(), 60 * 41 * 4);
        let noisy = demo.noisy_sinogram_rgba(1.0, 7);
        assert_eq!(noisy.len(), 60 * 41 * 4);
        let f = demo.reconstruct_fbp(1.0, 7, "hann", 48).unwrap();
        assert_eq!(f.len(), 48 * 48 * 4);
        let e_fbp = demo.last_error();
        assert!(e_fbp > 0.0);
        let h = demo.reconstruct_hough(1.0, 7, 0.2, 48).unwrap();
        assert_eq!(h.len(), 48 * 48 * 4);
        assert!(demo.last_error() > 0.0);
        // the JsValue error path only exists on wasm; check the parse here
        assert!("bogus".parse::<FilterKind>().is_err());
    }

    #[test]
    fn cubic_demo_finds_the_planted_curve() {
        let demo = CubicDemo::new(-1.0, 1.0, 40, 0.0, 5).unwrap();
        let p = demo.peak();
        assert!((p[0] + 1.0).abs() < 1e-12 && (p[1] - 1.0).abs() < 1e-12, "peak at {p:?}");
        assert_eq!(p[2], 40.0);
        assert_eq!(demo.accumulator_rgba().len(), 81 * 81 * 4);
        assert_eq!(demo.points().len(), 80);
    }
}
