//! Small exact-geometry helpers shared by the strip accumulator and the
//! charge function.

/// Area of `{x ∈ [−a, a]² : n·x ≤ v}` for a unit normal `n = (nx, ny)`.
///
/// Piecewise quadratic in `v` with breakpoints at the projections of the
/// square's corners onto `n`; the middle band is linear. Closed form, no
/// quadrature.
pub(crate) fn halfplane_square_area(a: f64, nx: f64, ny: f64, v: f64) -> f64 {
    debug_assert!((nx * nx + ny * ny - 1.0).abs() < 1e-9, "normal must be unit");
    // reflecting an axis negates the matching normal component and
    // preserves area, so only the absolute components matter
    let c = nx.abs();
    let s = ny.abs();
    let p1 = -a * (c + s);
    let p2 = -a * (c - s).abs();
    let full = 4.0 * a * a;
    if v <= p1 {
        return 0.0;
    }
    if v >= -p1 {
        return full;
    }
    let den = 2.0 * c * s;
    if den < 1e-300 {
        // axis-aligned: the area grows linearly across the band
        return full * (v - p1) / (-2.0 * p1);
    }
    if v <= p2 {
        // corner triangle
        return (v - p1) * (v - p1) / den;
    }
    if v < -p2 {
        // middle band: constant chord 2a / max(c, s)
        let m = c.max(s);
        let lo = c.min(s);
        return 2.0 * a * a * lo / m + (v - p2) * 2.0 * a / m;
    }
    // complement of the opposite corner triangle
    full - (-p1 - v) * (-p1 - v) / den
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mc_area(a: f64, nx: f64, ny: f64, v: f64, n: usize) -> f64 {
        // deterministic midpoint grid as the oracle
        let h = 2.0 * a / n as f64;
        let mut hits = 0usize;
        for i in 0..n {
            for j in 0..n {
                let x = -a + (i as f64 + 0.5) * h;
                let y = -a + (j as f64 + 0.5) * h;
                if nx * x + ny * y <= v {
                    hits += 1;
                }
            }
        }
        hits as f64 * h * h
    }

    #[test]
    fn matches_grid_oracle() {
        let cases = [
            (1.0, 0.6, 0.8),
            (0.5, 1.0, 0.0),
            (0.5, 0.0, -1.0),
            (1.0, std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
            (0.25, -0.28, 0.96),
        ];
        for (a, nx, ny) in cases {
            for k in -8..=8 {
                let v = k as f64 * 0.2 * a;
                let exact = halfplane_square_area(a, nx, ny, v);
                let approx = mc_area(a, nx, ny, v, 700);
                assert!(
                    (exact - approx).abs() < 4.0 * a * a * 4e-3,
                    "a={a} n=({nx},{ny}) v={v}: {exact} vs {approx}"
                );
            }
        }
    }

    #[test]
    fn monotone_and_saturating() {
        let a = 0.75;
        let (nx, ny) = (0.6, -0.8);
        let mut prev = -1.0;
        for k in 0..200 {
            let v = -2.0 + k as f64 * 0.02;
            let area = halfplane_square_area(a, nx, ny, v);
            assert!(area >= prev - 1e-12);
            assert!((0.0..=4.0 * a * a + 1e-12).contains(&area));
            prev = area;
        }
        assert_eq!(halfplane_square_area(a, nx, ny, -3.0), 0.0);
        assert_eq!(halfplane_square_area(a, nx, ny, 3.0), 4.0 * a * a);
    }

    #[test]
    fn derivative_is_chord_length() {
        // d(area)/dv equals the Euclidean chord length of the level line
        let a = 1.0;
        let (nx, ny) = (0.8, 0.6);
        let h = 1e-6;
        for v in [-1.0, -0.5, 0.0, 0.3, 1.1] {
            let d = (halfplane_square_area(a, nx, ny, v + h) - halfplane_square_area(a, nx, ny, v - h))
                / (2.0 * h);
            // chord of the line {0.8x + 0.6y = v} inside the square
            let chord = mc_chord(a, nx, ny, v);
            assert!((d - chord).abs() < 1e-3, "v={v}: {d} vs {chord}");
        }
    }

    fn mc_chord(a: f64, nx: f64, ny: f64, v: f64) -> f64 {
        // sample along the line and count the inside fraction
        let dirx = -ny;
        let diry = nx;
        let (px, py) = (nx * v, ny * v);
        let lim = 4.0 * a;
        let n = 400000;
        let mut inside = 0usize;
        for i in 0..n {
            let t = -lim + (i as f64 + 0.5) * (2.0 * lim / n as f64);
            let x = px + t * dirx;
            let y = py + t * diry;
            if x.abs() <= a && y.abs() <= a {
                inside += 1;
            }
        }
        inside as f64 * (2.0 * lim / n as f64)
    }
}
