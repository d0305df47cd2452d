//! Forward transforms.
//!
//! The workhorse is the closed-form Radon transform of a single square
//! pixel; linearity and translation extend it to any square-pixel image,
//! so dense sinograms carry no quadrature error. A midpoint quadrature
//! along the integration locus ([`radon_numeric`]) serves as the
//! independent oracle the closed forms are checked against, and the
//! cumulative mass function ([`charge`]) ties the transform to its
//! derivative identity.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::families::SolvableFamily;
use crate::geom::halfplane_square_area;
use crate::grid::Discretization;
use crate::images::PixelImage;
use crate::par::for_each_row_chunk;
use crate::{Error, Result};

/// How a sinogram was produced; recorded in CSV headers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    RadonExact,
    RadonNumeric,
    HoughRescaled,
    Noisy,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Provenance::RadonExact => "radon-exact",
            Provenance::RadonNumeric => "radon-numeric",
            Provenance::HoughRescaled => "hough-rescaled",
            Provenance::Noisy => "noisy",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "radon-exact" => Ok(Provenance::RadonExact),
            "radon-numeric" => Ok(Provenance::RadonNumeric),
            "hough-rescaled" => Ok(Provenance::HoughRescaled),
            "noisy" => Ok(Provenance::Noisy),
            other => Err(Error::Format(format!("unknown provenance `{other}`"))),
        }
    }
}

/// Dense matrix of intensity values over a parameter grid. Shared by the
/// exact Radon output, the rescaled Hough counter and noisy data; the
/// provenance tag tells them apart.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    pub disc: Discretization,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl Sinogram {
    pub fn zeros(disc: Discretization, provenance: Provenance) -> Self {
        let n = disc.total_cells();
        Self { disc, values: vec![0.0; n], provenance }
    }

    /// Number of cells along the first axis (θ for plane sinograms).
    pub fn rows(&self) -> usize {
        self.disc.len(0)
    }

    /// Number of cells along the last axis (γ for plane sinograms).
    pub fn cols(&self) -> usize {
        self.disc.len(self.disc.dim() - 1)
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        debug_assert_eq!(self.disc.dim(), 2);
        self.values[i * self.cols() + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        debug_assert_eq!(self.disc.dim(), 2);
        let cols = self.cols();
        &mut self.values[i * cols + j]
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Writes the CSV form: `#`-prefixed metadata, one structured grid
    /// header, then row-major values (one line per leading multi-index).
    pub fn write_csv(&self, out: &mut impl Write, extra_meta: &[String]) -> Result<()> {
        for line in extra_meta {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "# {} provenance={}", self.disc.header_string(), self.provenance)?;
        let line_len = self.cols();
        for chunk in self.values.chunks(line_len) {
            let line: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv(reader: impl BufRead) -> Result<Self> {
        let mut disc = None;
        let mut provenance = Provenance::RadonExact;
        let mut values = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                if rest.contains("t=") && rest.contains("lambda_star=") {
                    disc = Some(Discretization::from_header_string(rest)?);
                    if let Some(tok) = rest.split_whitespace().find_map(|t| t.strip_prefix("provenance=")) {
                        provenance = tok.parse()?;
                    }
                }
                continue;
            }
            for tok in trimmed.split(',') {
                values.push(
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Format(format!("bad value `{tok}`: {e}")))?,
                );
            }
        }
        let disc = disc.ok_or_else(|| Error::Format("missing grid header line".into()))?;
        if values.len() != disc.total_cells() {
            return Err(Error::Format(format!(
                "expected {} values, found {}",
                disc.total_cells(),
                values.len()
            )));
        }
        Ok(Self { disc, values, provenance })
    }

    pub fn save_csv(&self, path: impl AsRef<Path>, extra_meta: &[String]) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, extra_meta)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    /// Min-max normalized grey-scale dump for visual comparison. The first
    /// grid axis runs horizontally, the second vertically (top = high).
    pub fn write_pgm_normalized(&self, out: &mut impl Write, maxval: u16) -> Result<()> {
        if self.disc.dim() != 2 {
            return Err(Error::Domain("PGM export needs a t=2 sinogram".into()));
        }
        let (lo, hi) = self.min_max();
        let span = if hi > lo { hi - lo } else { 1.0 };
        let (w, h) = (self.rows(), self.cols());
        writeln!(out, "P5")?;
        writeln!(out, "# sinolab sinogram provenance={} min={} max={}", self.provenance, lo, hi)?;
        writeln!(out, "{w} {h}")?;
        writeln!(out, "{maxval}")?;
        let mut buf = Vec::with_capacity(w * h * 2);
        for r in 0..h {
            let j = h - 1 - r;
            for i in 0..w {
                let q = (((self.at(i, j) - lo) / span).clamp(0.0, 1.0) * maxval as f64).round() as u16;
                if maxval > 255 {
                    buf.extend_from_slice(&q.to_be_bytes());
                } else {
                    buf.push(q as u8);
                }
            }
        }
        out.write_all(&buf)?;
        Ok(())
    }
}

/// Radon transform of the characteristic function of the square
/// `[−a, a]²` along the line `γ − ω₁x₁ − x₂ = 0`, as a single algebraic
/// expression. The returned value is the x₁-extent of the chord.
pub fn radon_square_slope(a: f64, omega1: f64, gamma: f64) -> Result<f64> {
    if !(a > 0.0) || !omega1.is_finite() || !gamma.is_finite() {
        return Err(Error::Domain("radon_square_slope: need a > 0 and finite inputs".into()));
    }
    if omega1 == 0.0 {
        return Err(Error::Singular(
            "radon_square_slope: omega1 = 0 (use the angle form for axis-parallel lines)".into(),
        ));
    }
    let num = (a - a * omega1 - gamma).abs() + (a - a * omega1 + gamma).abs()
        - (a + a * omega1 - gamma).abs()
        - (a + a * omega1 + gamma).abs();
    Ok(num / (-2.0 * omega1))
}

/// Arc-length (unit-gradient) Radon transform of a square pixel with the
/// given center and half-side `a`, along `γ − x₁cosθ − x₂sinθ = 0`.
///
/// For `|sinθ|` above the cutoff this is the slope form under the
/// substitutions `ω₁ ↦ cotθ`, `γ ↦ γ/sinθ`, divided by `|sinθ|`; the
/// division restores the Euclidean surface measure (`δ(c·g) = δ(g)/|c|`).
/// Near-axis lines switch to the direct chord computation instead.
pub fn radon_square_angle(a: f64, center: (f64, f64), theta: f64, gamma: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let g = gamma - center.0 * c - center.1 * s;
    if s.abs() < 1e-6 {
        // vertical line x1 = g/c: the chord is the full pixel height
        return if (g / c).abs() <= a { 2.0 * a } else { 0.0 };
    }
    let w1 = c / s;
    if w1.abs() < 1e-9 {
        // near-horizontal: the slope formula would divide by ~0
        return if (g / s).abs() <= a { 2.0 * a / s.abs() } else { 0.0 };
    }
    radon_square_slope(a, w1, g / s).expect("nonzero omega1") / s.abs()
}

/// x₁-extent of the chord of `γ − ω₁x₁ − ω₂x₂ = 0` (solved for the axis
/// named by the caller) inside `[−a, a]²`, by interval intersection.
fn chord_extent(a: f64, w_solve: f64, w_free: f64, g: f64) -> f64 {
    // extent over the free coordinate u of {u in [-a,a] : (g - w_free*u)/w_solve in [-a,a]}
    let half = a * w_solve.abs();
    if w_free == 0.0 {
        return if g.abs() <= half { 2.0 * a } else { 0.0 };
    }
    let (u0, u1) = ((g - half) / w_free, (g + half) / w_free);
    let (lo, hi) = (u0.min(u1).max(-a), u0.max(u1).min(a));
    (hi - lo).max(0.0)
}

/// Slope-form Radon transform of a pixel image at a general (not
/// normalized) direction `ω`: `(Rm)(ω, γ) = ∫ δ(γ − ω·x) m(x) dx`.
/// Exactly `|a|⁻¹`-homogeneous under `(ω, γ) ↦ (aω, aγ)`, with
/// `(Rm)(0, γ) := 0` for `γ ≠ 0`.
pub fn radon_pixel_slope(img: &PixelImage, omega: (f64, f64), gamma: f64) -> Result<f64> {
    let (w1, w2) = omega;
    if w1 == 0.0 && w2 == 0.0 {
        if gamma != 0.0 {
            return Ok(0.0);
        }
        return Err(Error::Domain("radon_pixel_slope: (omega, gamma) = 0 is undefined".into()));
    }
    let a = img.pixel_half_side();
    let mut total = 0.0;
    for row in 0..img.height() {
        for col in 0..img.width() {
            let v = img.get(row, col);
            if v == 0.0 {
                continue;
            }
            let (cx, cy) = img.pixel_center(row, col);
            let g = gamma - w1 * cx - w2 * cy;
            let contrib = if w2.abs() >= w1.abs() {
                chord_extent(a, w2, w1, g) / w2.abs()
            } else {
                chord_extent(a, w1, w2, g) / w1.abs()
            };
            total += v * contrib;
        }
    }
    Ok(total)
}

/// Which per-cell value a dense sinogram stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Euclidean arc-length weight (`|∇_x f| = 1` lines). Default.
    UnitGradient,
    /// Raw slope-form values, i.e. unit-gradient times `|sinθ|`.
    Slope,
}

/// Exact sinogram of a square-pixel image over a `(θ, γ)` grid: each cell
/// holds `Σ_pixels value · radon_square_angle(a, center, θ_i, γ_j)`.
///
/// θ-rows are independent; per-row accumulation runs over pixels in
/// row-major order, so the output is bit-identical for any thread count.
pub fn sinogram_pixel(
    img: &PixelImage,
    disc: &Discretization,
    norm: Normalization,
    threads: usize,
) -> Result<Sinogram> {
    if disc.dim() != 2 {
        return Err(Error::Domain("sinogram_pixel needs a t=2 grid (theta, gamma)".into()));
    }
    let a = img.pixel_half_side();
    let (n_lo, n_hi) = disc.bounds();
    let (lo0, lo1, hi1) = (n_lo[0], n_lo[1], n_hi[1]);
    let cols = disc.len(1);

    let mut pixels: Vec<(f64, f64, f64)> = Vec::new();
    for row in 0..img.height() {
        for col in 0..img.width() {
            let v = img.get(row, col);
            if v != 0.0 {
                let (cx, cy) = img.pixel_center(row, col);
                pixels.push((cx, cy, v));
            }
        }
    }

    let mut out = Sinogram::zeros(disc.clone(), Provenance::RadonExact);
    for_each_row_chunk(&mut out.values, cols, threads, |i, row| {
        let theta = disc.axis_center(0, lo0 + i as i64);
        let (s, c) = theta.sin_cos();
        let band = a * (c.abs() + s.abs()) + 1e-12;
        let mul = match norm {
            Normalization::UnitGradient => 1.0,
            Normalization::Slope => s.abs(),
        };
        for &(cx, cy, v) in &pixels {
            let proj = cx * c + cy * s;
            let jlo = disc.component_index(1, proj - band).max(lo1);
            let jhi = disc.component_index(1, proj + band).min(hi1);
            for j in jlo..=jhi {
                let gamma = disc.axis_center(1, j);
                let r = radon_square_angle(a, (cx, cy), theta, gamma);
                if r != 0.0 {
                    row[(j - lo1) as usize] += v * r * mul;
                }
            }
        }
    });
    Ok(out)
}

/// Sample budget for the quadrature routines.
#[derive(Debug, Clone, Copy)]
pub struct QuadSpec {
    /// Midpoint sample count (per line for [`radon_numeric`], per axis for
    /// the generic fallback of [`charge`]).
    pub samples: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self { samples: 2048 }
    }
}

/// Quadrature oracle for the generalized Radon transform of a pixel
/// image: composite midpoint rule along the graph parametrization of the
/// integration locus, with the coarea weight `√(1+|∇F|²)/|∇_x f|`.
///
/// The parametrization interval is clipped to the image window first, so
/// for a single uniform pixel the integrand is constant and the rule is
/// exact to rounding. Requires a family exposing an affine form (lines,
/// hyperplanes in the plane).
pub fn radon_numeric(
    fam: &SolvableFamily,
    m: &PixelImage,
    lambda: &[f64],
    quad: QuadSpec,
) -> Result<f64> {
    let t = fam.param_dim();
    if lambda.len() != t {
        return Err(Error::Domain(format!("lambda must have {t} components")));
    }
    if fam.image_dim() != 2 {
        return Err(Error::Unsupported { op: "radon_numeric", family: fam.name().into() });
    }
    let (lp, lt) = (&lambda[..t - 1], lambda[t - 1]);
    let (omega, b) = fam
        .affine_form(lp)
        .ok_or(Error::Unsupported { op: "radon_numeric", family: fam.name().into() })?;
    let grad_norm = (omega[0] * omega[0] + omega[1] * omega[1]).sqrt();
    if grad_norm < 1e-12 {
        return Err(Error::Singular(format!(
            "|grad_x f| = {grad_norm:e} < 1e-12 on the locus of `{}`",
            fam.name()
        )));
    }

    let w = m.window();
    // Solve the better-conditioned coordinate: x_solve = alpha + beta * u.
    let (solve_y, beta, alpha) = if omega[1].abs() >= omega[0].abs() {
        (true, -omega[0] / omega[1], (lt - b) / omega[1])
    } else {
        (false, -omega[1] / omega[0], (lt - b) / omega[0])
    };
    let (u_min, u_max, s_min, s_max) = if solve_y {
        (w.x_min, w.x_max, w.y_min, w.y_max)
    } else {
        (w.y_min, w.y_max, w.x_min, w.x_max)
    };
    // Clip {u : alpha + beta u in [s_min, s_max]} against [u_min, u_max].
    let (mut lo, mut hi) = (u_min, u_max);
    if beta != 0.0 {
        let (b0, b1) = ((s_min - alpha) / beta, (s_max - alpha) / beta);
        lo = lo.max(b0.min(b1));
        hi = hi.min(b0.max(b1));
    } else if !(alpha >= s_min && alpha <= s_max) {
        return Ok(0.0);
    }
    if !(hi > lo) {
        return Ok(0.0);
    }

    let weight = (1.0 + beta * beta).sqrt() / grad_norm;
    let n = quad.samples.max(1);
    let h = (hi - lo) / n as f64;
    let mut sum = 0.0;
    for k in 0..n {
        let u = lo + (k as f64 + 0.5) * h;
        let s = alpha + beta * u;
        let (x, y) = if solve_y { (u, s) } else { (s, u) };
        sum += m.sample(x, y);
    }
    Ok(sum * weight * h)
}

/// The cumulative mass ("charge") function
/// `M(λ′, λ_t) = ∫ Θ(λ_t − F(x; λ′)) m(x) dx`: the mass of the image in
/// the sublevel region `{F ≤ λ_t}`. Its `λ_t`-derivative is the
/// generalized Radon transform.
///
/// For families with an affine form the per-pixel integral is the clipped
/// half-plane area, evaluated in closed form; other families fall back to
/// a 2-D midpoint rule with `quad.samples` points per axis.
pub fn charge(
    fam: &SolvableFamily,
    m: &PixelImage,
    lambda_prime: &[f64],
    lambda_t: f64,
    quad: QuadSpec,
) -> Result<f64> {
    if fam.image_dim() != 2 {
        return Err(Error::Unsupported { op: "charge", family: fam.name().into() });
    }
    if let Some((omega, b)) = fam.affine_form(lambda_prime) {
        let norm = (omega[0] * omega[0] + omega[1] * omega[1]).sqrt();
        if norm < 1e-12 {
            return Err(Error::Singular("charge: |grad F| vanishes".into()));
        }
        let (nx, ny) = (omega[0] / norm, omega[1] / norm);
        let a = m.pixel_half_side();
        let mut total = 0.0;
        for row in 0..m.height() {
            for col in 0..m.width() {
                let v = m.get(row, col);
                if v == 0.0 {
                    continue;
                }
                let (cx, cy) = m.pixel_center(row, col);
                let vloc = (lambda_t - b - omega[0] * cx - omega[1] * cy) / norm;
                total += v * halfplane_square_area(a, nx, ny, vloc);
            }
        }
        return Ok(total);
    }
    // generic sublevel quadrature
    let n = quad.samples.max(1);
    let w = m.window();
    let hx = (w.x_max - w.x_min) / n as f64;
    let hy = (w.y_max - w.y_min) / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        let x = w.x_min + (i as f64 + 0.5) * hx;
        for j in 0..n {
            let y = w.y_min + (j as f64 + 0.5) * hy;
            if lambda_t - fam.eval_f(&[x, y], lambda_prime) >= 0.0 {
                total += m.sample(x, y);
            }
        }
    }
    Ok(total * hx * hy)
}

/// Pairing `⟨δ(f), φ⟩ = Σ_i φ(x₀(i)) / |f′(x₀(i))|` over the simple zeros
/// of a scalar C¹ function in an interval. Zeros are located by sign
/// changes on a 1024-interval bracketing grid, then refined by bisection.
pub fn dirac_pair_1d(
    f: impl Fn(f64) -> f64,
    f_prime: impl Fn(f64) -> f64,
    phi: impl Fn(f64) -> f64,
    interval: (f64, f64),
) -> Result<f64> {
    let (a, b) = interval;
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain("dirac_pair_1d: need a finite interval (a, b)".into()));
    }
    const GRID: usize = 1024;
    let h = (b - a) / GRID as f64;
    let mut roots: Vec<f64> = Vec::new();
    let push_root = |r: f64, roots: &mut Vec<f64>| {
        if !roots.iter().any(|&q| (q - r).abs() < 1e-10 * (1.0 + r.abs())) {
            roots.push(r);
        }
    };
    let mut v0 = f(a);
    for k in 0..GRID {
        let x1 = if k + 1 == GRID { b } else { a + (k + 1) as f64 * h };
        let v1 = f(x1);
        let x0 = a + k as f64 * h;
        if v0 == 0.0 {
            push_root(x0, &mut roots);
        } else if v0 * v1 < 0.0 {
            // bisection to 1e-12
            let (mut lo, mut hi) = (x0, x1);
            let (mut flo, _fhi) = (v0, v1);
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if flo * fm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            push_root(0.5 * (lo + hi), &mut roots);
        }
        v0 = v1;
    }
    let mut sum = 0.0;
    for r in roots {
        let d = f_prime(r).abs();
        if d < 1e-9 {
            return Err(Error::NonSimpleZero { x: r, deriv: d });
        }
        sum += phi(r) / d;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::line_angle;
    use crate::images::Rect;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

    fn unit_square_image() -> PixelImage {
        PixelImage::filled(1, 1, Rect::unit(), 1.0).unwrap()
    }

    #[test]
    fn slope_form_worked_values() {
        assert!((radon_square_slope(1.0, 1.0, 0.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((radon_square_slope(1.0, 2.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(radon_square_slope(1.0, 1.0, 5.0).unwrap(), 0.0);
        assert!(matches!(radon_square_slope(1.0, 0.0, 0.0), Err(Error::Singular(_))));
        assert!(radon_square_slope(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn slope_formula_equals_interval_intersection() {
        // the single algebraic expression vs a direct chord computation
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..2000 {
            let a = 0.25 + next() * 2.0;
            let w1 = (next() - 0.5) * 6.0;
            if w1.abs() < 1e-3 {
                continue;
            }
            let g = (next() - 0.5) * 8.0;
            let formula = radon_square_slope(a, w1, g).unwrap();
            let direct = chord_extent(a, 1.0, w1, g);
            assert!((formula - direct).abs() < 1e-10, "a={a} w1={w1} g={g}");
        }
    }

    #[test]
    fn angle_form_worked_values() {
        assert!((radon_square_angle(1.0, (0.0, 0.0), FRAC_PI_2, 0.0) - 2.0).abs() < 1e-12);
        let diag = radon_square_angle(1.0, (0.0, 0.0), FRAC_PI_4, 0.0);
        assert!((diag - 2.0 * SQRT_2).abs() < 1e-12, "diagonal chord: {diag}");
        assert_eq!(radon_square_angle(1.0, (0.0, 0.0), FRAC_PI_4, 2.0), 0.0);
        // vertical line through a translated pixel
        assert!((radon_square_angle(0.5, (2.0, 0.0), 0.0, 2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn angle_form_is_even_under_theta_shift() {
        for (theta, gamma) in [(0.3, 0.4), (1.1, -0.2), (2.6, 0.9)] {
            let a = radon_square_angle(1.0, (0.2, -0.3), theta, gamma);
            let b = radon_square_angle(1.0, (0.2, -0.3), theta + PI, -gamma);
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn sinogram_single_pixel_matches_pointwise() {
        let img = unit_square_image();
        let disc = Discretization::span(&[0.0, -SQRT_2], &[PI, SQRT_2], &[16, 24]).unwrap();
        let sino = sinogram_pixel(&img, &disc, Normalization::UnitGradient, 1).unwrap();
        for (idx, center) in disc.iter_cells() {
            let expect = radon_square_angle(1.0, (0.0, 0.0), center[0], center[1]);
            let got = sino.at((idx[0]) as usize, (idx[1]) as usize);
            assert!((got - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn sinogram_is_linear_and_thread_invariant() {
        let w = Rect::unit();
        let mut im1 = PixelImage::filled(4, 4, w, 0.0).unwrap();
        let mut im2 = PixelImage::filled(4, 4, w, 0.0).unwrap();
        im1.set(0, 1, 1.0);
        im2.set(3, 2, 1.0);
        let mut both = PixelImage::filled(4, 4, w, 0.0).unwrap();
        both.set(0, 1, 2.0);
        both.set(3, 2, 3.0);
        let disc = Discretization::span(&[0.0, -SQRT_2], &[PI, SQRT_2], &[12, 20]).unwrap();
        let s1 = sinogram_pixel(&im1, &disc, Normalization::UnitGradient, 1).unwrap();
        let s2 = sinogram_pixel(&im2, &disc, Normalization::UnitGradient, 1).unwrap();
        let sb = sinogram_pixel(&both, &disc, Normalization::UnitGradient, 1).unwrap();
        for k in 0..sb.values.len() {
            assert!((sb.values[k] - (2.0 * s1.values[k] + 3.0 * s2.values[k])).abs() < 1e-12);
        }
        let sb4 = sinogram_pixel(&both, &disc, Normalization::UnitGradient, 4).unwrap();
        assert_eq!(sb.values, sb4.values, "thread count must not change bits");
    }

    #[test]
    fn sinogram_mass_and_support() {
        let img = crate::images::shepp_logan(64, 64).unwrap();
        let disc = Discretization::span(&[0.0, -SQRT_2], &[PI, SQRT_2], &[7, 1001]).unwrap();
        let sino = sinogram_pixel(&img, &disc, Normalization::UnitGradient, 1).unwrap();
        let mass = img.total_mass();
        let d2 = disc.step(1);
        for i in 0..7 {
            let line_sum: f64 = (0..1001).map(|j| sino.at(i, j)).sum::<f64>() * d2;
            assert!(
                (line_sum - mass).abs() <= 0.005 * mass,
                "theta row {i}: {line_sum} vs {mass}"
            );
        }
        // support: no intensity beyond the circumradius of the support
        let far = radon_square_angle(1.0, (0.0, 0.0), 0.7, 1.0 + SQRT_2 + 0.01);
        assert_eq!(far, 0.0);
    }

    #[test]
    fn numeric_oracle_on_constant_chord() {
        let fam = line_angle();
        let img = unit_square_image();
        let v = radon_numeric(&fam, &img, &[FRAC_PI_2, 0.0], QuadSpec { samples: 4096 }).unwrap();
        assert!((v - 2.0).abs() < 1e-6, "{v}");
        let zero = PixelImage::filled(1, 1, Rect::unit(), 0.0).unwrap();
        let z = radon_numeric(&fam, &zero, &[1.0, 0.3], QuadSpec::default()).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn numeric_oracle_rejects_unsupported() {
        let fam = crate::families::weierstrass_cubic();
        let img = unit_square_image();
        assert!(matches!(
            radon_numeric(&fam, &img, &[1.0, 1.0], QuadSpec::default()),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn charge_worked_values() {
        let fam = line_angle();
        let img = unit_square_image();
        // half-plane {y <= 0} cuts the square in half
        let half = charge(&fam, &img, &[FRAC_PI_2], 0.0, QuadSpec::default()).unwrap();
        assert!((half - 2.0).abs() < 1e-12);
        // below the minimum of F over the support: empty region
        let empty = charge(&fam, &img, &[0.3], -3.0, QuadSpec::default()).unwrap();
        assert_eq!(empty, 0.0);
        // above the maximum: everything
        let full = charge(&fam, &img, &[0.3], 3.0, QuadSpec::default()).unwrap();
        assert!((full - 4.0).abs() < 1e-12);
    }

    #[test]
    fn charge_derivative_matches_radon() {
        let fam = line_angle();
        let img = crate::images::shepp_logan(16, 16).unwrap();
        let h = 1e-3;
        for (theta, gamma) in [(0.9, 0.2), (1.9, -0.4), (0.5, 0.0)] {
            let mp = charge(&fam, &img, &[theta], gamma + h, QuadSpec::default()).unwrap();
            let mm = charge(&fam, &img, &[theta], gamma - h, QuadSpec::default()).unwrap();
            let fd = (mp - mm) / (2.0 * h);
            let rn = radon_numeric(&fam, &img, &[theta, gamma], QuadSpec { samples: 1 << 18 }).unwrap();
            assert!((fd - rn).abs() <= 1e-3 * rn.abs().max(1e-6), "fd={fd} rn={rn}");
        }
    }

    #[test]
    fn dirac_pairing_examples() {
        // roots +-1, |f'| = 2, phi = x^2
        let v = dirac_pair_1d(|x| x * x - 1.0, |x| 2.0 * x, |x| x * x, (-2.0, 2.0)).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        let c = dirac_pair_1d(|x| x, |_| 1.0, |_| 7.5, (-1.0, 1.0)).unwrap();
        assert!((c - 7.5).abs() < 1e-9);
        let none = dirac_pair_1d(|x| x + 10.0, |_| 1.0, |x| x, (-1.0, 1.0)).unwrap();
        assert_eq!(none, 0.0);
        // double zero at the origin is caught
        assert!(matches!(
            dirac_pair_1d(|x| x * x, |x| 2.0 * x, |x| x, (-2.0, 2.0)),
            Err(Error::NonSimpleZero { .. })
        ));
    }

    #[test]
    fn csv_roundtrip_preserves_bits() {
        let disc = Discretization::span(&[0.0, -1.0], &[PI, 1.0], &[3, 5]).unwrap();
        let mut s = Sinogram::zeros(disc, Provenance::Noisy);
        for (k, v) in s.values.iter_mut().enumerate() {
            *v = (k as f64 * 0.37).sin() * 1e-3;
        }
        let mut buf = Vec::new();
        s.write_csv(&mut buf, &["cmd=test run=1".into()]).unwrap();
        let back = Sinogram::read_csv(&buf[..]).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn slope_pixel_transform_homogeneity_spot() {
        let img = crate::images::shepp_logan(8, 8).unwrap();
        let (w, g) = ((0.7, -1.2), 0.35);
        let base = radon_pixel_slope(&img, w, g).unwrap();
        for aa in [-2.0, -1.0, 2.0, 3.0] {
            let scaled = radon_pixel_slope(&img, (aa * w.0, aa * w.1), aa * g).unwrap();
            assert!((scaled - base / aa.abs()).abs() < 1e-12);
        }
        assert_eq!(radon_pixel_slope(&img, (0.0, 0.0), 1.0).unwrap(), 0.0);
        assert!(radon_pixel_slope(&img, (0.0, 0.0), 0.0).is_err());
    }
}
