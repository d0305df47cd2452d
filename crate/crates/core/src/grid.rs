//! Parameter-space discretization.
//!
//! A discretization is an initialization point `λ*`, per-axis sampling
//! distances `d_k`, and inclusive integer index bounds. Cell `n` is the
//! half-open box `∏_k [λ*_k + n_k d_k − d_k/2, λ*_k + n_k d_k + d_k/2)`,
//! so every covered point lies in exactly one cell. Cells are never
//! materialized; everything is index arithmetic.

use crate::{Error, Result};

/// Rectangular grid `{λ*, d}` over a bounded investigation domain.
///
/// Immutable after construction; all operations are pure.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    lambda_star: Vec<f64>,
    d: Vec<f64>,
    n_lo: Vec<i64>,
    n_hi: Vec<i64>,
}

impl Discretization {
    /// Builds a grid from an initialization point, sampling distances and
    /// inclusive index bounds. Index bounds are inclusive integers rather
    /// than symmetric `±N_k`, so asymmetric domains like `θ ∈ [0, π)` are
    /// expressible directly.
    pub fn new(lambda_star: Vec<f64>, d: Vec<f64>, n_lo: Vec<i64>, n_hi: Vec<i64>) -> Result<Self> {
        let t = lambda_star.len();
        if t == 0 {
            return Err(Error::Domain("parameter space must have t >= 1".into()));
        }
        if d.len() != t || n_lo.len() != t || n_hi.len() != t {
            return Err(Error::Domain(format!(
                "inconsistent dimensions: lambda_star has {t}, d has {}, bounds have {}/{}",
                d.len(),
                n_lo.len(),
                n_hi.len()
            )));
        }
        if !lambda_star.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("lambda_star must be finite".into()));
        }
        if !d.iter().all(|&v| v.is_finite() && v > 0.0) {
            return Err(Error::Domain("sampling distances d_k must be positive".into()));
        }
        if n_lo.iter().zip(&n_hi).any(|(lo, hi)| lo > hi) {
            return Err(Error::Domain("index bounds must satisfy n_lo <= n_hi".into()));
        }
        Ok(Self { lambda_star, d, n_lo, n_hi })
    }

    /// Grid whose cells exactly tile `∏_k [lo_k, hi_k)` with `counts_k`
    /// cells per axis; centers sit at `lo_k + (i + 1/2) d_k`.
    pub fn span(lo: &[f64], hi: &[f64], counts: &[usize]) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() != counts.len() {
            return Err(Error::Domain("span: mismatched lengths".into()));
        }
        if counts.iter().any(|&c| c == 0) {
            return Err(Error::Domain("span: counts must be >= 1".into()));
        }
        let mut lambda_star = Vec::with_capacity(lo.len());
        let mut d = Vec::with_capacity(lo.len());
        let mut n_hi = Vec::with_capacity(lo.len());
        for k in 0..lo.len() {
            if !(hi[k] > lo[k]) {
                return Err(Error::Domain("span: need hi > lo".into()));
            }
            let step = (hi[k] - lo[k]) / counts[k] as f64;
            d.push(step);
            lambda_star.push(lo[k] + 0.5 * step);
            n_hi.push(counts[k] as i64 - 1);
        }
        let n_lo = vec![0i64; lo.len()];
        Self::new(lambda_star, d, n_lo, n_hi)
    }

    /// Same covered domain with every cell split `factor` times per axis.
    pub fn refined(&self, factor: usize) -> Self {
        assert!(factor >= 1);
        let f = factor as f64;
        let t = self.dim();
        let mut lambda_star = Vec::with_capacity(t);
        let mut d = Vec::with_capacity(t);
        let mut n_hi = Vec::with_capacity(t);
        for k in 0..t {
            let lo_edge = self.lambda_star[k] + (self.n_lo[k] as f64 - 0.5) * self.d[k];
            let step = self.d[k] / f;
            d.push(step);
            lambda_star.push(lo_edge + 0.5 * step);
            n_hi.push(self.len(k) as i64 * factor as i64 - 1);
        }
        Self { lambda_star, d, n_lo: vec![0; t], n_hi }
    }

    pub fn dim(&self) -> usize {
        self.lambda_star.len()
    }

    pub fn lambda_star(&self) -> &[f64] {
        &self.lambda_star
    }

    pub fn steps(&self) -> &[f64] {
        &self.d
    }

    pub fn step(&self, k: usize) -> f64 {
        self.d[k]
    }

    /// `D := max{d_1, …, d_t}`.
    pub fn max_step(&self) -> f64 {
        self.d.iter().cloned().fold(f64::MIN, f64::max)
    }

    pub fn bounds(&self) -> (&[i64], &[i64]) {
        (&self.n_lo, &self.n_hi)
    }

    /// Number of cells along axis `k`.
    pub fn len(&self, k: usize) -> usize {
        (self.n_hi[k] - self.n_lo[k] + 1) as usize
    }

    pub fn total_cells(&self) -> usize {
        (0..self.dim()).map(|k| self.len(k)).product()
    }

    /// Covered interval `[lo, hi)` of axis `k` (outer cell edges).
    pub fn axis_range(&self, k: usize) -> (f64, f64) {
        (
            self.lambda_star[k] + (self.n_lo[k] as f64 - 0.5) * self.d[k],
            self.lambda_star[k] + (self.n_hi[k] as f64 + 0.5) * self.d[k],
        )
    }

    /// Closest sampling value on axis `k`:
    /// `c_k(v) = λ*_k + ⌊1/2 + (v − λ*_k)/d_k⌋ d_k`.
    /// Half-way points round to the larger value, matching the half-open
    /// cell convention. The floor formula is used exactly as written; no
    /// epsilon adjustment.
    pub fn snap_component(&self, k: usize, value: f64) -> Result<f64> {
        if k >= self.dim() {
            return Err(Error::Domain(format!("axis {k} out of range (t = {})", self.dim())));
        }
        if !value.is_finite() {
            return Err(Error::Domain("snap_component: value must be finite".into()));
        }
        let l = self.lambda_star[k];
        let d = self.d[k];
        Ok(l + (0.5 + (value - l) / d).floor() * d)
    }

    /// Componentwise snap of the first `t − 1` coordinates (the map `c′`).
    pub fn snap_prefix(&self, lambda_prime: &[f64]) -> Result<Vec<f64>> {
        if self.dim() < 2 {
            return Err(Error::Domain("snap_prefix requires t >= 2".into()));
        }
        if lambda_prime.len() != self.dim() - 1 {
            return Err(Error::Domain(format!(
                "snap_prefix: expected {} components, got {}",
                self.dim() - 1,
                lambda_prime.len()
            )));
        }
        lambda_prime
            .iter()
            .enumerate()
            .map(|(k, &v)| self.snap_component(k, v))
            .collect()
    }

    /// Unbounded cell index along axis `k` (may fall outside the bounds).
    pub fn component_index(&self, k: usize, value: f64) -> i64 {
        ((value - self.lambda_star[k]) / self.d[k] + 0.5).floor() as i64
    }

    /// Index of the cell containing `lambda`, or `None` when the point is
    /// outside the covered domain. The caller decides whether that is an
    /// error or a skip.
    pub fn cell_index(&self, lambda: &[f64]) -> Option<Vec<i64>> {
        assert_eq!(lambda.len(), self.dim());
        let mut idx = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            if !lambda[k].is_finite() {
                return None;
            }
            let n = self.component_index(k, lambda[k]);
            if n < self.n_lo[k] || n > self.n_hi[k] {
                return None;
            }
            idx.push(n);
        }
        Some(idx)
    }

    pub fn cell_center(&self, index: &[i64]) -> Vec<f64> {
        assert_eq!(index.len(), self.dim());
        index
            .iter()
            .enumerate()
            .map(|(k, &n)| self.lambda_star[k] + n as f64 * self.d[k])
            .collect()
    }

    /// Center coordinate of cell `n` along a single axis.
    pub fn axis_center(&self, k: usize, n: i64) -> f64 {
        self.lambda_star[k] + n as f64 * self.d[k]
    }

    /// All cells in row-major order over `(n_1, …, n_t)`. The order is part
    /// of the external contract: output files are written in it.
    pub fn iter_cells(&self) -> CellIter<'_> {
        CellIter { disc: self, current: self.n_lo.clone(), done: false }
    }

    /// Row-major linear offset of a (bounded) multi-index.
    pub fn linear_index(&self, index: &[i64]) -> usize {
        let mut off = 0usize;
        for k in 0..self.dim() {
            off = off * self.len(k) + (index[k] - self.n_lo[k]) as usize;
        }
        off
    }

    /// One-line text form used as a header for CSV sinogram files.
    pub fn header_string(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let bounds = self
            .n_lo
            .iter()
            .zip(&self.n_hi)
            .map(|(lo, hi)| format!("{lo}:{hi}"))
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "t={} lambda_star={} d={} bounds={}",
            self.dim(),
            join(&self.lambda_star),
            join(&self.d),
            bounds
        )
    }

    /// Parses the output of [`Self::header_string`].
    pub fn from_header_string(s: &str) -> Result<Self> {
        let mut t = None;
        let mut lambda_star = None;
        let mut d = None;
        let mut bounds = None;
        for tok in s.split_whitespace() {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("bad grid header token `{tok}`")))?;
            match key {
                "t" => t = Some(val.parse::<usize>().map_err(|e| Error::Format(e.to_string()))?),
                "lambda_star" => lambda_star = Some(parse_f64_list(val)?),
                "d" => d = Some(parse_f64_list(val)?),
                "bounds" => bounds = Some(parse_bounds(val)?),
                _ => {}
            }
        }
        let (t, lambda_star, d, (n_lo, n_hi)) = match (t, lambda_star, d, bounds) {
            (Some(a), Some(b), Some(c), Some(e)) => (a, b, c, e),
            _ => return Err(Error::Format("incomplete grid header".into())),
        };
        if lambda_star.len() != t {
            return Err(Error::Format("grid header: t does not match lambda_star".into()));
        }
        Self::new(lambda_star, d, n_lo, n_hi)
    }
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Format(e.to_string())))
        .collect()
}

fn parse_bounds(s: &str) -> Result<(Vec<i64>, Vec<i64>)> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for part in s.split(',') {
        let (a, b) = part
            .split_once(':')
            .ok_or_else(|| Error::Format(format!("bad bounds `{part}`")))?;
        lo.push(a.trim().parse::<i64>().map_err(|e| Error::Format(e.to_string()))?);
        hi.push(b.trim().parse::<i64>().map_err(|e| Error::Format(e.to_string()))?);
    }
    Ok((lo, hi))
}

/// Row-major cell iterator; yields `(index, center)`.
pub struct CellIter<'a> {
    disc: &'a Discretization,
    current: Vec<i64>,
    done: bool,
}

impl Iterator for CellIter<'_> {
    type Item = (Vec<i64>, Vec<f64>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let idx = self.current.clone();
        let center = self.disc.cell_center(&idx);
        // odometer increment, last axis fastest
        let mut k = self.disc.dim();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.current[k] += 1;
            if self.current[k] <= self.disc.n_hi[k] {
                break;
            }
            self.current[k] = self.disc.n_lo[k];
        }
        Some((idx, center))
    }
}
