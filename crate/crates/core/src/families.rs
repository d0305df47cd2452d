//! Solvable curve and surface families.
//!
//! A family is *λ_t-solvable* when its defining function splits as
//! `f(x; λ) = λ_t − F(x; λ′)` with `F` continuously differentiable. Both
//! transforms only ever need to evaluate `F` and `∇_x F`, so families are
//! plain objects carrying closures, not symbolic expressions.
//!
//! The last component of `∇_λ f` is identically 1 for every accepted
//! family, which is what guarantees one accumulator vote per λ′-column.

use std::sync::Arc;

use crate::{Error, Result};

type EvalFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;
type AffineFn = Arc<dyn Fn(&[f64]) -> (Vec<f64>, f64) + Send + Sync>;
type PredFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Axis-aligned box with an optional exclusion predicate, used for both
/// the image window `W` and the parameter domain `E`.
#[derive(Clone)]
pub struct Region {
    lo: Vec<f64>,
    hi: Vec<f64>,
    exclude: Option<PredFn>,
}

impl Region {
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        Self { lo, hi, exclude: None }
    }

    /// Unbounded region of the given dimension.
    pub fn all(dim: usize) -> Self {
        Self::boxed(vec![f64::NEG_INFINITY; dim], vec![f64::INFINITY; dim])
    }

    pub fn with_exclusion(mut self, pred: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        self.exclude = Some(Arc::new(pred));
        self
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&v, (&lo, &hi))| v >= lo && v <= hi)
            && self.exclude.as_ref().map_or(true, |e| !e(p))
    }
}

impl std::fmt::Debug for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Region")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("exclude", &self.exclude.is_some())
            .finish()
    }
}

/// A λ_t-solvable family `f(x; λ) = λ_t − F(x; λ′)`.
///
/// `eval_f` and `grad_x_f` evaluate `F` and `∇_x F`; `∇_x f = −∇_x F`.
/// Base points (points whose graph fills the whole parameter space) are
/// the caller's responsibility to exclude; the library does not detect
/// them.
#[derive(Clone)]
pub struct SolvableFamily {
    name: String,
    n: usize,
    t: usize,
    eval: EvalFn,
    grad: GradFn,
    window: Region,
    params: Region,
    affine: Option<AffineFn>,
}

impl std::fmt::Debug for SolvableFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolvableFamily")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("t", &self.t)
            .finish()
    }
}

impl SolvableFamily {
    /// Registers a family from its solvable-form pieces.
    pub fn from_parts(
        name: impl Into<String>,
        n: usize,
        t: usize,
        window: Region,
        params: Region,
        eval: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            n,
            t,
            eval: Arc::new(eval),
            grad: Arc::new(grad),
            window,
            params,
            affine: None,
        }
    }

    fn with_affine(mut self, affine: impl Fn(&[f64]) -> (Vec<f64>, f64) + Send + Sync + 'static) -> Self {
        self.affine = Some(Arc::new(affine));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Image-space dimension `n`.
    pub fn image_dim(&self) -> usize {
        self.n
    }

    /// Parameter-space dimension `t`.
    pub fn param_dim(&self) -> usize {
        self.t
    }

    pub fn window(&self) -> &Region {
        &self.window
    }

    pub fn param_region(&self) -> &Region {
        &self.params
    }

    /// `F(x; λ′)`.
    pub fn eval_f(&self, x: &[f64], lambda_prime: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(lambda_prime.len(), self.t - 1);
        (self.eval)(x, lambda_prime)
    }

    /// `f(x; λ) = λ_t − F(x; λ′)`.
    pub fn eval_full(&self, x: &[f64], lambda: &[f64]) -> f64 {
        debug_assert_eq!(lambda.len(), self.t);
        lambda[self.t - 1] - self.eval_f(x, &lambda[..self.t - 1])
    }

    /// `∇_x F(x; λ′)` written into `out`.
    pub fn grad_x_f(&self, x: &[f64], lambda_prime: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n);
        (self.grad)(x, lambda_prime, out)
    }

    /// `|∇_x f(x; λ)| = |∇_x F(x; λ′)|`.
    pub fn grad_norm(&self, x: &[f64], lambda_prime: &[f64]) -> f64 {
        let mut g = vec![0.0; self.n];
        self.grad_x_f(x, lambda_prime, &mut g);
        g.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// When `F(x; λ′) = ω(λ′)·x + b(λ′)` this returns `(ω, b)`; the exact
    /// strip/charge computations and the quadrature oracle need it.
    pub fn affine_form(&self, lambda_prime: &[f64]) -> Option<(Vec<f64>, f64)> {
        self.affine.as_ref().map(|a| a(lambda_prime))
    }

    /// The Hough transform of an image point: the graph `λ_t = F(x; λ′)`
    /// in parameter space, returned as an evaluatable object.
    pub fn hough_transform_of_point(&self, x: &[f64]) -> Result<PointGraph> {
        if !self.window.contains(x) {
            return Err(Error::Domain(format!(
                "point {x:?} lies outside the window of family `{}`",
                self.name
            )));
        }
        Ok(PointGraph { family: self.clone(), x: x.to_vec() })
    }
}

/// Graph representation of the Hough transform `ℋ(x)` of one point: the
/// map `λ′ ↦ F(x; λ′)` whose graph is the zero locus of `λ ↦ f(x; λ)`.
#[derive(Clone, Debug)]
pub struct PointGraph {
    family: SolvableFamily,
    x: Vec<f64>,
}

impl PointGraph {
    /// Height of the graph above `λ′`.
    pub fn value(&self, lambda_prime: &[f64]) -> f64 {
        self.family.eval_f(&self.x, lambda_prime)
    }

    /// Duality check: `λ ∈ ℋ(x) ⇔ x ∈ S(λ)`, both of which reduce to
    /// `f(x; λ) = 0`.
    pub fn contains(&self, lambda: &[f64], tol: f64) -> bool {
        self.family.eval_full(&self.x, lambda).abs() <= tol
    }
}

/// A family candidate handed to [`validate_solvability`]. Only candidates
/// declared in solvable form can be accepted; a general implicit `f` is
/// rejected with a diagnostic naming the missing structure.
pub enum CandidateFamily {
    /// Already in the form `f(x; λ) = λ_t − F(x; λ′)`.
    Solvable(SolvableFamily),
    /// Only the implicit map `(x, λ) ↦ f(x; λ)` is known.
    Implicit {
        name: String,
        n: usize,
        t: usize,
        f: EvalFn,
        /// Optional note on why no solvable form exists, surfaced in the
        /// rejection diagnostic.
        obstruction: Option<String>,
    },
}

/// Accepts a candidate family if and only if it is declared in the
/// λ_t-solvable form. Rejection is a typed error, never a panic.
pub fn validate_solvability(candidate: CandidateFamily) -> Result<SolvableFamily> {
    match candidate {
        CandidateFamily::Solvable(fam) => Ok(fam),
        CandidateFamily::Implicit { name, obstruction, .. } => {
            let reason = match obstruction {
                Some(o) => o,
                None => "only an implicit zero locus f(x; lambda) = 0 was supplied; \
                         the form lambda_t - F(x; lambda') is required"
                    .to_string(),
            };
            Err(Error::NotSolvable { family: name, reason })
        }
    }
}

/// Lines in angle/offset form: `λ = (θ, γ)`, `F(x; θ) = x₁cosθ + x₂sinθ`.
/// The gradient has unit norm everywhere, so the generalized transform
/// coincides with arc-length integration.
pub fn line_angle() -> SolvableFamily {
    SolvableFamily::from_parts(
        "line-angle",
        2,
        2,
        Region::all(2),
        Region::all(2),
        |x, lp| x[0] * lp[0].cos() + x[1] * lp[0].sin(),
        |_x, lp, out| {
            out[0] = lp[0].cos();
            out[1] = lp[0].sin();
        },
    )
    .with_affine(|lp| (vec![lp[0].cos(), lp[0].sin()], 0.0))
}

/// Lines in slope form: `λ = (ω₁, γ)`, `F(x; ω₁) = ω₁x₁ + x₂`.
pub fn line_slope() -> SolvableFamily {
    SolvableFamily::from_parts(
        "line-slope",
        2,
        2,
        Region::all(2),
        Region::all(2),
        |x, lp| lp[0] * x[0] + x[1],
        |_x, lp, out| {
            out[0] = lp[0];
            out[1] = 1.0;
        },
    )
    .with_affine(|lp| (vec![lp[0], 1.0], 0.0))
}

/// Hyperplanes in `ℝⁿ`: `λ = (ω₁, …, ω_n, γ)`, `F(x; ω) = ω·x`.
pub fn hyperplane(n: usize) -> SolvableFamily {
    assert!(n >= 2, "hyperplane family needs n >= 2");
    SolvableFamily::from_parts(
        "hyperplane",
        n,
        n + 1,
        Region::all(n),
        Region::all(n + 1),
        |x, lp| x.iter().zip(lp).map(|(a, b)| a * b).sum(),
        |_x, lp, out| out.copy_from_slice(lp),
    )
    .with_affine(|lp| (lp.to_vec(), 0.0))
}

/// Cubics in canonical Weierstrass form `x₂² = x₁³ + a x₁ + b`, which is
/// b-solvable: `λ = (a, b)`, `F(x; a) = x₂² − x₁³ − a x₁`. Hough
/// transforms of points are straight lines in the `(a, b)` plane.
/// `∇_x f = (3x₁² + a, −2x₂)` vanishes only at critical points of the
/// curve; singular members must be kept out of the window by the caller.
pub fn weierstrass_cubic() -> SolvableFamily {
    SolvableFamily::from_parts(
        "weierstrass",
        2,
        2,
        Region::all(2),
        Region::all(2),
        |x, lp| x[1] * x[1] - x[0] * x[0] * x[0] - lp[0] * x[0],
        |x, lp, out| {
            out[0] = -3.0 * x[0] * x[0] - lp[0];
            out[1] = 2.0 * x[1];
        },
    )
}

/// The conchoid of Slüse, `a(x₁−a)(x₁²+x₂²) = b²x₁²`, as an implicit
/// candidate. Neither parameter can be isolated, so
/// [`validate_solvability`] rejects it; it exists as the canonical
/// negative test for the validator.
pub fn conchoid_of_sluse() -> CandidateFamily {
    CandidateFamily::Implicit {
        name: "conchoid-of-sluse".into(),
        n: 2,
        t: 2,
        f: Arc::new(|x, l| {
            let (a, b) = (l[0], l[1]);
            a * (x[0] - a) * (x[0] * x[0] + x[1] * x[1]) - b * b * x[0] * x[0]
        }),
        obstruction: Some(
            "both a and b enter through a(x1-a)(x1^2+x2^2) and b^2 x1^2; neither is an \
             isolated additive parameter, so f is neither a- nor b-solvable"
                .to_string(),
        ),
    }
}

/// CLI/config lookup by name.
pub fn by_name(name: &str) -> Result<SolvableFamily> {
    match name {
        "line-angle" => Ok(line_angle()),
        "line-slope" => Ok(line_slope()),
        "hyperplane" => Ok(hyperplane(2)),
        "weierstrass" => Ok(weierstrass_cubic()),
        other => Err(Error::Domain(format!(
            "unknown family `{other}` (expected line-angle, line-slope, hyperplane, weierstrass)"
        ))),
    }
}
