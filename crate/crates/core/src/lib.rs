//! Radon and Hough transforms on a shared parameter-space grid.
//!
//! Both transforms take an image and produce an intensity map over the
//! parameters of a curve family (a *sinogram*). This crate implements the
//! two routes side by side and the machinery to compare them:
//!
//! * [`grid`] — the parameter-space discretization: half-open rectangular
//!   cells, their centers, and the snap maps the accumulator kernel uses.
//! * [`families`] — solvable curve families `f(x; λ) = λ_t − F(x; λ′)`
//!   (lines in angle and slope form, hyperplanes, Weierstrass cubics) with
//!   a validator that rejects families not in solvable form.
//! * [`images`] — weighted point sets, square-pixel images, the Shepp–Logan
//!   head phantom, and PGM I/O.
//! * [`radon`] — exact closed-form Radon transforms of square pixels,
//!   dense sinograms, quadrature oracles, the cumulative mass ("charge")
//!   function, and a 1-D Dirac pairing.
//! * [`hough`] — the solvability-aware accumulator kernel, weighted
//!   counters for point and pixel images, rescaling, and peak detection.
//! * [`convergence`] — numerical verification that the rescaled counter
//!   converges weakly to the Radon sinogram as the grid is refined.
//! * [`inversion`] — noisy-sinogram inversion: unfiltered/filtered
//!   back-projection and the thresholded Hough trace-back, with Frobenius
//!   error reports.
//!
//! The `sinolab` binary (see [`cli`]) chains these into reproducible,
//! parameter-echoing pipeline runs.

pub mod convergence;
pub mod families;
mod geom;
pub mod grid;
pub mod hough;
pub mod images;
pub mod inversion;
mod par;
pub mod radon;

#[cfg(feature = "cli")]
pub mod cli;

pub use families::SolvableFamily;
pub use grid::Discretization;
pub use images::{DiscreteImage, PixelImage};
pub use radon::Sinogram;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A candidate family could not be accepted in solvable form.
    #[error("family `{family}` is not lambda_t-solvable: {reason}")]
    NotSolvable { family: String, reason: String },

    /// Input that makes the requested formula singular (e.g. zero slope).
    #[error("singular input: {0}")]
    Singular(String),

    /// The operation is not available for this family.
    #[error("{op}: not supported for family `{family}`")]
    Unsupported { op: &'static str, family: String },

    /// An adaptive quadrature did not reach its tolerance.
    #[error("quadrature did not converge: {0}")]
    QuadratureDiverged(String),

    /// A located zero of `f` failed the simple-zero requirement.
    #[error("zero at x = {x} is not simple: |f'(x)| = {deriv:e}")]
    NonSimpleZero { x: f64, deriv: f64 },

    /// Malformed file contents (PGM or CSV headers).
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
