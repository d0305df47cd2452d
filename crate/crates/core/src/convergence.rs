//! Numerical verification of the accumulator-to-sinogram limit.
//!
//! The claim under test: pairing the rescaled Hough counter against a C¹
//! compactly supported test function converges to the pairing of the
//! generalized Radon transform as the grid step `D = max d_k` goes to 0,
//! for discrete images and for piecewise-constant images alike. The limit
//! promises convergence but no rate; the study reports the empirical
//! log-log slope, and callers gate on "error shrinks by a factor in a
//! fixed window per halving" as an engineering proxy.

use crate::families::SolvableFamily;
use crate::grid::Discretization;
use crate::hough::{accumulate_discrete, accumulate_pixel, rescale, PixelStrategy};
use crate::images::{DiscreteImage, PixelImage};
use crate::radon::{sinogram_pixel, Normalization, Sinogram};
use crate::{Error, Result};

/// Polynomial bump test function
/// `ψ(λ) = ∏_k max(0, 1 − ((λ_k − c_k)/r_k)²)²`.
///
/// C¹ with compact support `∏ [c_k − r_k, c_k + r_k]`; each factor and its
/// derivative vanish on the support boundary. Polynomial so its integral
/// has a closed form usable as an oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    center: Vec<f64>,
    radius: Vec<f64>,
}

impl TestFunction {
    pub fn bump(center: Vec<f64>, radius: Vec<f64>) -> Result<Self> {
        if center.len() != radius.len() || center.is_empty() {
            return Err(Error::Domain("bump: center and radius sizes must match".into()));
        }
        if !center.iter().all(|v| v.is_finite()) || !radius.iter().all(|&r| r.is_finite() && r > 0.0)
        {
            return Err(Error::Domain("bump: need finite center and positive radius".into()));
        }
        Ok(Self { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn eval(&self, lambda: &[f64]) -> f64 {
        debug_assert_eq!(lambda.len(), self.dim());
        let mut prod = 1.0;
        for k in 0..self.dim() {
            let u = (lambda[k] - self.center[k]) / self.radius[k];
            let f = 1.0 - u * u;
            if f <= 0.0 {
                return 0.0;
            }
            prod *= f * f;
        }
        prod
    }

    /// Support box `(lo, hi)`.
    pub fn support(&self) -> (Vec<f64>, Vec<f64>) {
        let lo = self.center.iter().zip(&self.radius).map(|(c, r)| c - r).collect();
        let hi = self.center.iter().zip(&self.radius).map(|(c, r)| c + r).collect();
        (lo, hi)
    }

    /// `∫ψ = ∏_k (16/15) r_k` (each factor integrates to `16r/15`).
    pub fn integral(&self) -> f64 {
        self.radius.iter().map(|r| 16.0 / 15.0 * r).product()
    }

    /// True when the support box sits inside the covered domain of `disc`.
    pub fn supported_inside(&self, disc: &Discretization) -> bool {
        if disc.dim() != self.dim() {
            return false;
        }
        (0..self.dim()).all(|k| {
            let (lo, hi) = disc.axis_range(k);
            self.center[k] - self.radius[k] >= lo && self.center[k] + self.radius[k] <= hi
        })
    }
}

/// Riemann-sum pairing of a grid function against ψ:
/// `Σ_cells value(cell) · ψ(center) · ∏ d_k`.
pub fn pair_grid(s: &Sinogram, psi: &TestFunction) -> f64 {
    let cell_volume: f64 = s.disc.steps().iter().product();
    let mut sum = 0.0;
    let mut ordinal = 0usize;
    let disc = s.disc.clone();
    for (_, center) in disc.iter_cells() {
        let v = s.values[ordinal];
        ordinal += 1;
        if v != 0.0 {
            let p = psi.eval(&center);
            if p != 0.0 {
                sum += v * p;
            }
        }
    }
    sum * cell_volume
}

/// Adaptive midpoint quadrature with interval-doubling until two
/// successive refinements agree.
fn adaptive_midpoint(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    let mut n = 64usize;
    let eval = |n: usize| -> f64 {
        let h = (hi - lo) / n as f64;
        let mut s = 0.0;
        for k in 0..n {
            s += g(lo + (k as f64 + 0.5) * h);
        }
        s * h
    };
    let mut prev = eval(n);
    loop {
        n *= 2;
        let cur = eval(n);
        if (cur - prev).abs() <= 1e-12 + 1e-10 * cur.abs() {
            return Ok(cur);
        }
        if n >= (1 << 22) {
            return Err(Error::QuadratureDiverged(format!(
                "midpoint rule still moving after {n} samples: {prev} vs {cur}"
            )));
        }
        prev = cur;
    }
}

/// Exact side of the limit for a discrete image and `t = 2`:
/// `⟨R_f m, ψ⟩ = Σ_j μ_j ∫ ψ(λ′, F(x_j; λ′)) dλ′`,
/// integrated adaptively over the λ′-support of ψ.
pub fn pair_radon_discrete(
    fam: &SolvableFamily,
    img: &DiscreteImage,
    psi: &TestFunction,
) -> Result<f64> {
    if fam.param_dim() != 2 {
        return Err(Error::Unsupported { op: "pair_radon_discrete", family: fam.name().into() });
    }
    if psi.dim() != 2 {
        return Err(Error::Domain("psi must be 2-dimensional".into()));
    }
    let (lo, hi) = psi.support();
    let mut total = 0.0;
    for (p, w) in img.iter() {
        let g = |lp: f64| psi.eval(&[lp, fam.eval_f(p, &[lp])]);
        total += w * adaptive_midpoint(g, lo[0], hi[0])?;
    }
    Ok(total)
}

/// The `t = 1` limit degenerates to a finite sum: `Σ_j μ_j ψ(F(x_j))`.
pub fn pair_radon_discrete_1d(
    fam: &SolvableFamily,
    img: &DiscreteImage,
    psi: &TestFunction,
) -> Result<f64> {
    if fam.param_dim() != 1 {
        return Err(Error::Unsupported { op: "pair_radon_discrete_1d", family: fam.name().into() });
    }
    if psi.dim() != 1 {
        return Err(Error::Domain("psi must be 1-dimensional".into()));
    }
    Ok(img.iter().map(|(p, w)| w * psi.eval(&[fam.eval_f(p, &[])])).sum())
}

/// One refinement level of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceEntry {
    pub d_max: f64,
    pub hough_pairing: f64,
    pub reference_pairing: f64,
    pub abs_error: f64,
}

/// Study outcome: per-level pairings, the fitted log-log slope, and the
/// raw decrease data callers gate on.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub entries: Vec<ConvergenceEntry>,
    /// Least-squares slope of `ln(error)` against `ln(D)`.
    pub slope: f64,
    /// Errors strictly decrease level over level.
    pub monotone: bool,
    /// Successive error ratios `e_i / e_{i+1}`.
    pub ratios: Vec<f64>,
}

impl ConvergenceReport {
    fn from_entries(entries: Vec<ConvergenceEntry>) -> Result<Self> {
        let usable: Vec<(f64, f64)> = entries
            .iter()
            .filter(|e| e.abs_error > 0.0)
            .map(|e| (e.d_max.ln(), e.abs_error.ln()))
            .collect();
        if usable.len() < 3 {
            return Err(Error::Domain(format!(
                "slope fit needs >= 3 usable points, have {}",
                usable.len()
            )));
        }
        let n = usable.len() as f64;
        let sx: f64 = usable.iter().map(|p| p.0).sum();
        let sy: f64 = usable.iter().map(|p| p.1).sum();
        let sxx: f64 = usable.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = usable.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let monotone = entries.windows(2).all(|w| w[1].abs_error < w[0].abs_error);
        let ratios = entries
            .windows(2)
            .map(|w| if w[1].abs_error > 0.0 { w[0].abs_error / w[1].abs_error } else { f64::INFINITY })
            .collect();
        Ok(Self { entries, slope, monotone, ratios })
    }
}

/// Image flavor under study.
#[derive(Debug, Clone, Copy)]
pub enum StudyImage<'a> {
    Discrete(&'a DiscreteImage),
    Pixel(&'a PixelImage),
}

/// Runs the weak-pairing comparison over a halving grid sequence.
///
/// For discrete images the reference is the exact pairing
/// ([`pair_radon_discrete`], or the finite sum for `t = 1`), computed
/// once. For pixel images the reference pairs ψ against an exact Radon
/// sinogram on a 4×-refined grid: the forward model is exact per cell
/// center, leaving only a Riemann residual that the level fit absorbs.
pub fn convergence_study(
    fam: &SolvableFamily,
    img: StudyImage<'_>,
    psi: &TestFunction,
    discs: &[Discretization],
) -> Result<ConvergenceReport> {
    if discs.len() < 4 {
        return Err(Error::Domain("need at least 4 refinement levels".into()));
    }
    for pair in discs.windows(2) {
        let ratio = pair[0].max_step() / pair[1].max_step();
        if (ratio - 2.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "levels must halve D: got ratio {ratio}"
            )));
        }
    }
    if !psi.supported_inside(&discs[0]) {
        return Err(Error::Domain("psi support must sit inside the grid domain".into()));
    }

    let reference_once = match img {
        StudyImage::Discrete(d) => Some(if fam.param_dim() == 1 {
            pair_radon_discrete_1d(fam, d, psi)?
        } else {
            pair_radon_discrete(fam, d, psi)?
        }),
        StudyImage::Pixel(_) => None,
    };

    let mut entries = Vec::with_capacity(discs.len());
    for disc in discs {
        let counter = match img {
            StudyImage::Discrete(d) => accumulate_discrete(fam, d, disc)?,
            StudyImage::Pixel(p) => accumulate_pixel(fam, p, disc, PixelStrategy::ExactStrip)?,
        };
        let hough_pairing = pair_grid(&rescale(counter)?, psi);
        let reference_pairing = match (reference_once, img) {
            (Some(r), _) => r,
            (None, StudyImage::Pixel(p)) => {
                let fine = sinogram_pixel(p, &disc.refined(4), Normalization::UnitGradient, 1)?;
                pair_grid(&fine, psi)
            }
            (None, StudyImage::Discrete(_)) => unreachable!(),
        };
        entries.push(ConvergenceEntry {
            d_max: disc.max_step(),
            hough_pairing,
            reference_pairing,
            abs_error: (hough_pairing - reference_pairing).abs(),
        });
    }
    ConvergenceReport::from_entries(entries)
}

/// Builds the halving grid chain `base, base/2, …` (levels entries).
pub fn halving_chain(base: &Discretization, levels: usize) -> Vec<Discretization> {
    (0..levels).map(|k| base.refined(1 << k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{line_angle, Region, SolvableFamily};
    use crate::radon::Provenance;
    use std::f64::consts::{PI, SQRT_2};

    fn circle_family() -> SolvableFamily {
        // t = 1: f(x; lambda) = lambda - (x1^2 + x2^2)
        SolvableFamily::from_parts(
            "circle-r2",
            2,
            1,
            Region::all(2),
            Region::all(1),
            |x, _| x[0] * x[0] + x[1] * x[1],
            |x, _, out| {
                out[0] = 2.0 * x[0];
                out[1] = 2.0 * x[1];
            },
        )
    }

    #[test]
    fn bump_shape_and_integral() {
        let psi = TestFunction::bump(vec![0.5], vec![0.25]).unwrap();
        assert_eq!(psi.eval(&[0.5]), 1.0);
        assert_eq!(psi.eval(&[0.75]), 0.0);
        assert_eq!(psi.eval(&[0.76]), 0.0);
        // C1 matching at the boundary: the factor vanishes to second order
        let h = 1e-8;
        let d = (psi.eval(&[0.75 - h]) - psi.eval(&[0.75])) / h;
        assert!(d.abs() < 1e-5, "one-sided slope at the support edge: {d}");
        // closed-form integral vs a Riemann oracle
        let n = 200000;
        let step = 0.5 / n as f64;
        let riemann: f64 =
            (0..n).map(|k| psi.eval(&[0.25 + (k as f64 + 0.5) * step])).sum::<f64>() * step;
        assert!((riemann - psi.integral()).abs() < 1e-9);
        assert!((psi.integral() - 16.0 / 15.0 * 0.25).abs() < 1e-15);
        assert!(TestFunction::bump(vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn pair_grid_basics() {
        let disc = Discretization::span(&[0.0, -1.0], &[PI, 1.0], &[64, 64]).unwrap();
        let psi = TestFunction::bump(vec![1.5, 0.0], vec![0.8, 0.6]).unwrap();
        let zero = Sinogram::zeros(disc.clone(), Provenance::RadonExact);
        assert_eq!(pair_grid(&zero, &psi), 0.0);
        let mut c = Sinogram::zeros(disc.clone(), Provenance::RadonExact);
        c.values.iter_mut().for_each(|v| *v = 3.0);
        let got = pair_grid(&c, &psi);
        let expect = 3.0 * psi.integral();
        assert!((got - expect).abs() < 0.01 * expect, "{got} vs {expect}");
        // linearity in the sinogram
        let mut c2 = c.clone();
        c2.values.iter_mut().for_each(|v| *v *= -0.5);
        assert!((pair_grid(&c2, &psi) + 0.5 * got).abs() < 1e-12);
    }

    #[test]
    fn discrete_reference_pairing() {
        let fam = line_angle();
        let psi = TestFunction::bump(vec![1.5, 0.0], vec![0.7, 0.5]).unwrap();
        let origin = DiscreteImage::from_xy_unit(&[(0.0, 0.0)]).unwrap();
        // F(0; theta) = 0, so the pairing reduces to the theta-integral of
        // psi(theta, 0)
        let got = pair_radon_discrete(&fam, &origin, &psi).unwrap();
        let oracle = adaptive_midpoint(|th| psi.eval(&[th, 0.0]), 0.8, 2.2).unwrap();
        assert!((got - oracle).abs() < 1e-9);
        // doubling the weights doubles the pairing
        let heavier = DiscreteImage::new(vec![vec![0.0, 0.0]], vec![2.0]).unwrap();
        let got2 = pair_radon_discrete(&fam, &heavier, &psi).unwrap();
        assert!((got2 - 2.0 * got).abs() < 1e-9);
    }

    #[test]
    fn one_dimensional_pairing_is_a_sum() {
        let fam = circle_family();
        let psi = TestFunction::bump(vec![0.8], vec![0.5]).unwrap();
        let img = DiscreteImage::new(vec![vec![0.6, 0.4], vec![0.9, 0.0]], vec![1.0, 3.0]).unwrap();
        let expect = psi.eval(&[0.6 * 0.6 + 0.4 * 0.4]) + 3.0 * psi.eval(&[0.81]);
        let got = pair_radon_discrete_1d(&fam, &img, &psi).unwrap();
        assert!((got - expect).abs() < 1e-15);
        // support away from all F values
        let far = TestFunction::bump(vec![10.0], vec![0.5]).unwrap();
        assert_eq!(pair_radon_discrete_1d(&fam, &img, &far).unwrap(), 0.0);
    }

    #[test]
    fn point_mass_is_preserved_before_the_limit() {
        // the t=1 counter holds the full weight at every refinement
        let fam = circle_family();
        let img = DiscreteImage::new(vec![vec![0.3, 0.2], vec![0.5, 0.5]], vec![2.0, 5.0]).unwrap();
        for k in 0..5 {
            let disc = Discretization::span(&[0.0], &[2.0], &[16 << k]).unwrap();
            let counter = accumulate_discrete(&fam, &img, &disc).unwrap();
            assert_eq!(counter.total(), 7.0);
        }
    }

    #[test]
    fn study_errors_shrink() {
        let fam = line_angle();
        let img = DiscreteImage::from_xy_unit(&[(0.4, -0.2), (-0.7, 0.5), (0.1, 0.9)]).unwrap();
        let psi = TestFunction::bump(vec![PI / 2.0, 0.2], vec![0.9, 0.7]).unwrap();
        let base = Discretization::span(&[0.0, -SQRT_2], &[PI, SQRT_2], &[32, 32]).unwrap();
        let report =
            convergence_study(&fam, StudyImage::Discrete(&img), &psi, &halving_chain(&base, 4))
                .unwrap();
        assert!(report.entries[3].abs_error < report.entries[0].abs_error);
        assert!(report.slope > 0.0, "slope = {}", report.slope);
    }

    #[test]
    fn study_validates_inputs() {
        let fam = line_angle();
        let img = DiscreteImage::from_xy_unit(&[(0.0, 0.0)]).unwrap();
        let psi = TestFunction::bump(vec![PI / 2.0, 0.0], vec![0.5, 0.5]).unwrap();
        let base = Discretization::span(&[0.0, -1.0], &[PI, 1.0], &[16, 16]).unwrap();
        // too few levels
        assert!(convergence_study(&fam, StudyImage::Discrete(&img), &psi, &halving_chain(&base, 2))
            .is_err());
        // psi support outside the domain
        let wide = TestFunction::bump(vec![PI / 2.0, 0.0], vec![0.5, 5.0]).unwrap();
        assert!(convergence_study(&fam, StudyImage::Discrete(&img), &wide, &halving_chain(&base, 4))
            .is_err());
        // non-halving chain
        let bad = vec![base.clone(), base.refined(3), base.refined(9), base.refined(27)];
        assert!(convergence_study(&fam, StudyImage::Discrete(&img), &psi, &bad).is_err());
    }
}
