//! The Hough side: solvability-aware kernel, weighted accumulators,
//! rescaling, and peak detection.
//!
//! λ_t-solvability makes the accumulator column-driven: for each
//! λ′-column the kernel selects at most one γ-cell (the one whose center
//! is nearest the graph value), so accumulation never scans the γ-axis.

use crate::families::SolvableFamily;
use crate::geom::halfplane_square_area;
use crate::grid::Discretization;
use crate::images::{DiscreteImage, PixelImage};
use crate::radon::{Provenance, Sinogram};
use crate::{Error, Result};

/// Weighted Hough accumulator over a parameter grid.
///
/// When built from a discrete image with unit grey levels the values are
/// integers; grey levels are real in general, so the storage is `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoughCounter {
    pub disc: Discretization,
    pub values: Vec<f64>,
    pub rescaled: bool,
    /// Votes dropped because the graph value left the λ_t-range for a
    /// column. Dropped, not clamped: clamping would corrupt border cells.
    pub skipped: u64,
}

impl HoughCounter {
    pub fn zeros(disc: Discretization) -> Self {
        let n = disc.total_cells();
        Self { disc, values: vec![0.0; n], rescaled: false, skipped: 0 }
    }

    pub fn at(&self, index: &[i64]) -> f64 {
        self.values[self.disc.linear_index(index)]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// The solvable-form kernel: 1 exactly when
/// `−d_t/2 ≤ λ_t − F(x; c′(λ′)) < d_t/2`,
/// i.e. when λ's cell is the minimum-distance cell of its λ′-column.
///
/// The half-open bracket is evaluated literally, so at the exact boundary
/// `λ_t − F = −d_t/2` the kernel is 1 and at `+d_t/2` it is 0.
pub fn kernel(fam: &SolvableFamily, x: &[f64], lambda: &[f64], disc: &Discretization) -> bool {
    let t = disc.dim();
    debug_assert_eq!(lambda.len(), t);
    let snapped: Vec<f64> = if t >= 2 {
        disc.snap_prefix(&lambda[..t - 1]).expect("t >= 2")
    } else {
        Vec::new()
    };
    let r = lambda[t - 1] - fam.eval_f(x, &snapped);
    let half = 0.5 * disc.step(t - 1);
    -half <= r && r < half
}

/// Index of the (unique) λ_t-cell selected by the kernel for the graph
/// value `f_value`, before bounds checking. Ties at exact half-way points
/// go to the lower cell, matching the half-open kernel bracket.
fn kernel_target(disc: &Discretization, f_value: f64) -> i64 {
    let t = disc.dim();
    let u = (f_value - disc.lambda_star()[t - 1]) / disc.step(t - 1);
    (u - 0.5).ceil() as i64
}

/// Iterates λ′-columns in row-major order, yielding the ordinal of the
/// column (its linear prefix index) and the λ′ cell centers. For `t = 1`
/// there is a single empty column.
fn for_each_column(disc: &Discretization, mut body: impl FnMut(usize, &[f64])) {
    let t = disc.dim();
    if t == 1 {
        body(0, &[]);
        return;
    }
    let (n_lo, n_hi) = (disc.bounds().0.to_vec(), disc.bounds().1.to_vec());
    let mut idx = n_lo.clone();
    let mut centers: Vec<f64> = (0..t - 1).map(|k| disc.axis_center(k, idx[k])).collect();
    let mut ordinal = 0usize;
    loop {
        body(ordinal, &centers);
        ordinal += 1;
        let mut k = t - 1;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] <= n_hi[k] {
                centers[k] = disc.axis_center(k, idx[k]);
                break;
            }
            idx[k] = n_lo[k];
            centers[k] = disc.axis_center(k, idx[k]);
        }
    }
}

/// Weighted Hough counter of a discrete image:
/// `H(λ) = Σ_j μ_j p(x(P_j), λ)`.
///
/// Column-driven: for each point and each λ′-column exactly one cell
/// receives the weight (or the vote is skipped when the graph value falls
/// outside the λ_t-range). Accumulation order is columns row-major, then
/// points ascending, so output is deterministic.
pub fn accumulate_discrete(
    fam: &SolvableFamily,
    img: &DiscreteImage,
    disc: &Discretization,
) -> Result<HoughCounter> {
    if disc.dim() != fam.param_dim() {
        return Err(Error::Domain(format!(
            "grid has t = {}, family `{}` has t = {}",
            disc.dim(),
            fam.name(),
            fam.param_dim()
        )));
    }
    if img.dim() != fam.image_dim() {
        return Err(Error::Domain("image dimension does not match the family".into()));
    }
    for (p, _) in img.iter() {
        if !fam.window().contains(p) {
            return Err(Error::Domain(format!("point {p:?} lies outside the family window")));
        }
    }
    let t = disc.dim();
    let (lo_t, hi_t) = (disc.bounds().0[t - 1], disc.bounds().1[t - 1]);
    let last_len = disc.len(t - 1);
    let mut counter = HoughCounter::zeros(disc.clone());
    let values = &mut counter.values;
    let mut skipped = 0u64;
    for_each_column(disc, |ordinal, lambda_prime| {
        let base = ordinal * last_len;
        for (p, w) in img.iter() {
            let f_val = fam.eval_f(p, lambda_prime);
            let target = kernel_target(disc, f_val);
            if target < lo_t || target > hi_t {
                skipped += 1;
                continue;
            }
            values[base + (target - lo_t) as usize] += w;
        }
    });
    counter.skipped = skipped;
    Ok(counter)
}

/// Accumulation strategy for piecewise-constant images.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelStrategy {
    /// Exact per-cell strip mass via clipped half-plane areas. Available
    /// for families whose `F(·; λ′)` is affine in `x` (the line families).
    ExactStrip,
    /// Evaluate the kernel at `s × s` sub-pixel centers, each carrying
    /// `value × sub-area`.
    Supersample(usize),
}

/// Hough counter of a pixel image: `H(λ) = ∫ m(x) p(x, λ) dx`.
pub fn accumulate_pixel(
    fam: &SolvableFamily,
    img: &PixelImage,
    disc: &Discretization,
    strategy: PixelStrategy,
) -> Result<HoughCounter> {
    if fam.image_dim() != 2 {
        return Err(Error::Domain("pixel accumulation needs a plane family".into()));
    }
    if disc.dim() != fam.param_dim() {
        return Err(Error::Domain("grid dimension does not match the family".into()));
    }
    match strategy {
        PixelStrategy::ExactStrip => accumulate_pixel_exact(fam, img, disc),
        PixelStrategy::Supersample(s) => accumulate_pixel_super(fam, img, disc, s),
    }
}

fn accumulate_pixel_exact(
    fam: &SolvableFamily,
    img: &PixelImage,
    disc: &Discretization,
) -> Result<HoughCounter> {
    if fam.affine_form(&vec![0.0; fam.param_dim() - 1]).is_none() {
        return Err(Error::Unsupported { op: "accumulate_pixel(exact-strip)", family: fam.name().into() });
    }
    let t = disc.dim();
    let (lo_t, hi_t) = (disc.bounds().0[t - 1], disc.bounds().1[t - 1]);
    let last_len = disc.len(t - 1);
    let half = 0.5 * disc.step(t - 1);
    let a = img.pixel_half_side();

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

    let mut counter = HoughCounter::zeros(disc.clone());
    let values = &mut counter.values;
    for_each_column(disc, |ordinal, lambda_prime| {
        let base = ordinal * last_len;
        let (omega, b) = fam.affine_form(lambda_prime).expect("checked above");
        let norm = (omega[0] * omega[0] + omega[1] * omega[1]).sqrt();
        if norm < 1e-12 {
            // degenerate column: F is constant, all mass votes for one cell
            let target = kernel_target(disc, b);
            if target >= lo_t && target <= hi_t {
                values[base + (target - lo_t) as usize] += img.total_mass();
            }
            return;
        }
        let (nx, ny) = (omega[0] / norm, omega[1] / norm);
        let hw = a * (omega[0].abs() + omega[1].abs());
        for &(cx, cy, v) in &pixels {
            let proj = omega[0] * cx + omega[1] * cy + b;
            let jlo = (disc.component_index(t - 1, proj - hw) - 1).max(lo_t);
            let jhi = (disc.component_index(t - 1, proj + hw) + 1).min(hi_t);
            for j in jlo..=jhi {
                let center = disc.axis_center(t - 1, j);
                let tau_hi = (center + half - proj) / norm;
                let tau_lo = (center - half - proj) / norm;
                let mass = v
                    * (halfplane_square_area(a, nx, ny, tau_hi)
                        - halfplane_square_area(a, nx, ny, tau_lo));
                if mass != 0.0 {
                    values[base + (j - lo_t) as usize] += mass;
                }
            }
        }
    });
    Ok(counter)
}

fn accumulate_pixel_super(
    fam: &SolvableFamily,
    img: &PixelImage,
    disc: &Discretization,
    s: usize,
) -> Result<HoughCounter> {
    if s == 0 {
        return Err(Error::Domain("supersample factor must be >= 1".into()));
    }
    let t = disc.dim();
    let (lo_t, hi_t) = (disc.bounds().0[t - 1], disc.bounds().1[t - 1]);
    let last_len = disc.len(t - 1);
    let sub = img.pixel_size() / s as f64;
    let sub_area = sub * sub;

    let mut samples: Vec<(f64, f64, f64)> = Vec::new();
    for row in 0..img.height() {
        for col in 0..img.width() {
            let v = img.get(row, col);
            if v == 0.0 {
                continue;
            }
            let (cx, cy) = img.pixel_center(row, col);
            let corner_x = cx - 0.5 * img.pixel_size();
            let corner_y = cy - 0.5 * img.pixel_size();
            for si in 0..s {
                for sj in 0..s {
                    samples.push((
                        corner_x + (si as f64 + 0.5) * sub,
                        corner_y + (sj as f64 + 0.5) * sub,
                        v * sub_area,
                    ));
                }
            }
        }
    }

    let mut counter = HoughCounter::zeros(disc.clone());
    let values = &mut counter.values;
    let mut skipped = 0u64;
    for_each_column(disc, |ordinal, lambda_prime| {
        let base = ordinal * last_len;
        for &(x, y, w) in &samples {
            let f_val = fam.eval_f(&[x, y], lambda_prime);
            let target = kernel_target(disc, f_val);
            if target < lo_t || target > hi_t {
                skipped += 1;
                continue;
            }
            values[base + (target - lo_t) as usize] += w;
        }
    });
    counter.skipped = skipped;
    Ok(counter)
}

/// Divides the counter by `d_t`, producing the rescaled counter (a Hough
/// sinogram). Rescaling twice is an error.
pub fn rescale(counter: HoughCounter) -> Result<Sinogram> {
    if counter.rescaled {
        return Err(Error::Domain("counter is already rescaled".into()));
    }
    let t = counter.disc.dim();
    let dt = counter.disc.step(t - 1);
    let values = counter.values.iter().map(|v| v / dt).collect();
    Ok(Sinogram { disc: counter.disc, values, provenance: Provenance::HoughRescaled })
}

/// A detected accumulator peak.
#[derive(Debug, Clone, PartialEq)]
pub struct Peak {
    pub index: Vec<i64>,
    pub center: Vec<f64>,
    pub value: f64,
}

/// Top-`k` cells by value with non-maximum suppression over a Chebyshev
/// cell radius. Ties break toward the lexicographically smallest index,
/// so the result is deterministic.
pub fn detect_peaks(counter: &HoughCounter, k: usize, min_separation_cells: usize) -> Result<Vec<Peak>> {
    if k == 0 {
        return Err(Error::Domain("detect_peaks: k must be >= 1".into()));
    }
    if counter.values.is_empty() {
        return Err(Error::Domain("detect_peaks: empty counter".into()));
    }
    let disc = &counter.disc;
    let mut order: Vec<usize> = (0..counter.values.len()).collect();
    order.sort_by(|&a, &b| {
        counter.values[b]
            .partial_cmp(&counter.values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let decode = |mut lin: usize| -> Vec<i64> {
        let t = disc.dim();
        let mut idx = vec![0i64; t];
        for kk in (0..t).rev() {
            let len = disc.len(kk);
            idx[kk] = disc.bounds().0[kk] + (lin % len) as i64;
            lin /= len;
        }
        idx
    };
    let mut peaks: Vec<Peak> = Vec::new();
    for lin in order {
        if peaks.len() == k {
            break;
        }
        let idx = decode(lin);
        let sep = peaks.iter().all(|p| {
            p.index
                .iter()
                .zip(&idx)
                .map(|(a, b)| (a - b).unsigned_abs())
                .max()
                .unwrap_or(0)
                > min_separation_cells as u64
        });
        if sep {
            let center = disc.cell_center(&idx);
            peaks.push(Peak { index: idx, center, value: counter.values[lin] });
        }
    }
    Ok(peaks)
}
