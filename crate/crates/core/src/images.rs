//! Image models: weighted point sets, square-pixel grids, the Shepp–Logan
//! head phantom, and PGM I/O.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::{Error, Result};

/// Axis-aligned window `[x_min, x_max] × [y_min, y_max]` in image units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self { x_min, x_max, y_min, y_max }
    }

    /// The unit window `[−1, 1]²`.
    pub fn unit() -> Self {
        Self::new(-1.0, 1.0, -1.0, 1.0)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    /// Radius of the smallest origin-centered disc containing the window.
    pub fn circumradius(&self) -> f64 {
        let xm = self.x_min.abs().max(self.x_max.abs());
        let ym = self.y_min.abs().max(self.y_max.abs());
        (xm * xm + ym * ym).sqrt()
    }
}

/// Piecewise-constant image on square pixels. Row 0 is the top of the
/// window (`y = y_max`), matching PGM layout; values are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelImage {
    width: usize,
    height: usize,
    window: Rect,
    values: Vec<f64>,
}

impl PixelImage {
    pub fn new(width: usize, height: usize, window: Rect, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Domain("image dimensions must be >= 1".into()));
        }
        if values.len() != width * height {
            return Err(Error::Domain(format!(
                "value buffer has {} entries for {}x{} image",
                values.len(),
                width,
                height
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("image values must be finite".into()));
        }
        let dx = (window.x_max - window.x_min) / width as f64;
        let dy = (window.y_max - window.y_min) / height as f64;
        if !(dx > 0.0 && dy > 0.0) {
            return Err(Error::Domain("window must have positive extent".into()));
        }
        if (dx - dy).abs() > 1e-9 * dx.max(dy) {
            return Err(Error::Domain(format!(
                "pixels must be square: dx = {dx}, dy = {dy}"
            )));
        }
        Ok(Self { width, height, window, values })
    }

    pub fn filled(width: usize, height: usize, window: Rect, value: f64) -> Result<Self> {
        Self::new(width, height, window, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn window(&self) -> Rect {
        self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.values[row * self.width + col] = v;
    }

    /// Pixel side length.
    pub fn pixel_size(&self) -> f64 {
        (self.window.x_max - self.window.x_min) / self.width as f64
    }

    /// Pixel half-side `a` (the side length is `2a`).
    pub fn pixel_half_side(&self) -> f64 {
        0.5 * self.pixel_size()
    }

    pub fn pixel_center(&self, row: usize, col: usize) -> (f64, f64) {
        let s = self.pixel_size();
        (
            self.window.x_min + (col as f64 + 0.5) * s,
            self.window.y_max - (row as f64 + 0.5) * s,
        )
    }

    /// Value of the piecewise-constant function at `(x, y)`; 0 outside the
    /// window. Points exactly on the right/bottom window edge are assigned
    /// to the last pixel.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        if !self.window.contains(x, y) {
            return 0.0;
        }
        let s = self.pixel_size();
        let mut col = ((x - self.window.x_min) / s).floor() as isize;
        let mut row = ((self.window.y_max - y) / s).floor() as isize;
        col = col.clamp(0, self.width as isize - 1);
        row = row.clamp(0, self.height as isize - 1);
        self.get(row as usize, col as usize)
    }

    /// `∫ m dx` (sum of value × pixel area).
    pub fn total_mass(&self) -> f64 {
        let area = self.pixel_size() * self.pixel_size();
        self.values.iter().sum::<f64>() * area
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
}

/// Weighted point set: `m = Σ_j μ_j δ(x − x(P_j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteImage {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl DiscreteImage {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("discrete image needs at least one point".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::Domain("points and weights length mismatch".into()));
        }
        let n = points[0].len();
        if n == 0 || points.iter().any(|p| p.len() != n) {
            return Err(Error::Domain("points must share a positive dimension".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) || weights.iter().any(|w| !w.is_finite())
        {
            return Err(Error::Domain("points and weights must be finite".into()));
        }
        Ok(Self { points, weights })
    }

    /// Convenience constructor for plane images with unit grey levels.
    pub fn from_xy_unit(points: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            points.iter().map(|&(x, y)| vec![x, y]).collect(),
            vec![1.0; points.len()],
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.points[j]
    }

    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j]
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points.iter().map(|p| p.as_slice()).zip(self.weights.iter().copied())
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Bins point weights into pixels. Intended for visual inspection only;
/// points outside the window are dropped.
pub fn rasterize_points(img: &DiscreteImage, width: usize, height: usize, window: Rect) -> Result<PixelImage> {
    let mut out = PixelImage::filled(width, height, window, 0.0)?;
    let s = out.pixel_size();
    for (p, w) in img.iter() {
        if p.len() != 2 || !window.contains(p[0], p[1]) {
            continue;
        }
        let col = (((p[0] - window.x_min) / s).floor() as isize).clamp(0, width as isize - 1);
        let row = (((window.y_max - p[1]) / s).floor() as isize).clamp(0, height as isize - 1);
        let v = out.get(row as usize, col as usize);
        out.set(row as usize, col as usize, v + w);
    }
    Ok(out)
}

/// One ellipse of the head phantom: additive intensity, semi-axes,
/// center, and rotation (degrees, counter-clockwise).
#[derive(Debug, Clone, Copy)]
pub struct PhantomEllipse {
    pub intensity: f64,
    pub semi_x: f64,
    pub semi_y: f64,
    pub center_x: f64,
    pub center_y: f64,
    pub rotation_deg: f64,
}

impl PhantomEllipse {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let phi = self.rotation_deg.to_radians();
        let (s, c) = phi.sin_cos();
        let dx = x - self.center_x;
        let dy = y - self.center_y;
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        (u / self.semi_x).powi(2) + (v / self.semi_y).powi(2) <= 1.0
    }
}

/// The ten-ellipse Shepp–Logan head phantom table, with the intensity
/// column that keeps summed values inside [0, 1] (head ellipse 1.0).
pub const SHEPP_LOGAN: [PhantomEllipse; 10] = [
    PhantomEllipse { intensity: 1.0,   semi_x: 0.69,   semi_y: 0.92,  center_x: 0.0,   center_y: 0.0,    rotation_deg: 0.0 },
    PhantomEllipse { intensity: -0.98, semi_x: 0.6624, semi_y: 0.874, center_x: 0.0,   center_y: -0.0184, rotation_deg: 0.0 },
    PhantomEllipse { intensity: -0.02, semi_x: 0.11,   semi_y: 0.31,  center_x: 0.22,  center_y: 0.0,    rotation_deg: -18.0 },
    PhantomEllipse { intensity: -0.02, semi_x: 0.16,   semi_y: 0.41,  center_x: -0.22, center_y: 0.0,    rotation_deg: 18.0 },
    PhantomEllipse { intensity: 0.01,  semi_x: 0.21,   semi_y: 0.25,  center_x: 0.0,   center_y: 0.35,   rotation_deg: 0.0 },
    PhantomEllipse { intensity: 0.01,  semi_x: 0.046,  semi_y: 0.046, center_x: 0.0,   center_y: 0.1,    rotation_deg: 0.0 },
    PhantomEllipse { intensity: 0.01,  semi_x: 0.046,  semi_y: 0.046, center_x: 0.0,   center_y: -0.1,   rotation_deg: 0.0 },
    PhantomEllipse { intensity: 0.01,  semi_x: 0.046,  semi_y: 0.023, center_x: -0.08, center_y: -0.605, rotation_deg: 0.0 },
    PhantomEllipse { intensity: 0.01,  semi_x: 0.023,  semi_y: 0.023, center_x: 0.0,   center_y: -0.606, rotation_deg: 0.0 },
    PhantomEllipse { intensity: 0.01,  semi_x: 0.023,  semi_y: 0.046, center_x: 0.06,  center_y: -0.605, rotation_deg: 0.0 },
];

/// Phantom intensity at a point: sum of the intensities of the ellipses
/// containing it, clamped to [0, 1].
pub fn shepp_logan_value(x: f64, y: f64) -> f64 {
    let mut v = 0.0;
    for e in &SHEPP_LOGAN {
        if e.contains(x, y) {
            v += e.intensity;
        }
    }
    v.clamp(0.0, 1.0)
}

/// True inside the outer (head) ellipse; the background mask used when
/// scoring reconstructions.
pub fn shepp_logan_inside(x: f64, y: f64) -> bool {
    SHEPP_LOGAN[0].contains(x, y)
}

/// Rasterizes the phantom on `[−1, 1]²`. Each pixel takes the phantom
/// value at its center (no anti-aliasing), so the exact per-pixel Radon
/// formula and the image model stay consistent.
pub fn shepp_logan(width: usize, height: usize) -> Result<PixelImage> {
    if width == 0 || height == 0 {
        return Err(Error::Domain("phantom dimensions must be >= 1".into()));
    }
    let window = Rect::unit();
    let mut img = PixelImage::filled(width, height, window, 0.0)?;
    for row in 0..height {
        for col in 0..width {
            let (x, y) = img.pixel_center(row, col);
            let v = shepp_logan_value(x, y);
            img.set(row, col, v);
        }
    }
    Ok(img)
}

const WINDOW_COMMENT: &str = "# window=";

/// Writes a binary (P5) PGM. Values are clamped to [0, 1] and quantized
/// to `maxval` (16-bit big-endian when `maxval > 255`). The image window
/// is recorded in a comment so load/save round-trips keep coordinates.
pub fn save_pgm(img: &PixelImage, path: impl AsRef<Path>, maxval: u16) -> Result<()> {
    save_pgm_with_comments(img, path, maxval, &[])
}

/// Like [`save_pgm`] with extra `#` comment lines (parameter echoes).
pub fn save_pgm_with_comments(
    img: &PixelImage,
    path: impl AsRef<Path>,
    maxval: u16,
    comments: &[String],
) -> Result<()> {
    let mut out = Vec::new();
    write_pgm(img, &mut out, maxval, true, comments)?;
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes an ASCII (P2) PGM.
pub fn save_pgm_ascii(img: &PixelImage, path: impl AsRef<Path>, maxval: u16) -> Result<()> {
    let mut out = Vec::new();
    write_pgm(img, &mut out, maxval, false, &[])?;
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_pgm(
    img: &PixelImage,
    out: &mut impl Write,
    maxval: u16,
    binary: bool,
    comments: &[String],
) -> Result<()> {
    if maxval == 0 {
        return Err(Error::Domain("maxval must be >= 1".into()));
    }
    let w = img.window();
    writeln!(out, "{}", if binary { "P5" } else { "P2" })?;
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{WINDOW_COMMENT}{}:{}:{}:{}", w.x_min, w.x_max, w.y_min, w.y_max)?;
    writeln!(out, "{} {}", img.width(), img.height())?;
    writeln!(out, "{maxval}")?;
    let quant = |v: f64| -> u16 { (v.clamp(0.0, 1.0) * maxval as f64).round() as u16 };
    if binary {
        let mut buf = Vec::with_capacity(img.values().len() * 2);
        for &v in img.values() {
            let q = quant(v);
            if maxval > 255 {
                buf.extend_from_slice(&q.to_be_bytes());
            } else {
                buf.push(q as u8);
            }
        }
        out.write_all(&buf)?;
    } else {
        for row in 0..img.height() {
            let line: Vec<String> =
                (0..img.width()).map(|c| quant(img.get(row, c)).to_string()).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
    }
    Ok(())
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<PixelImage> {
    let file = std::fs::File::open(path)?;
    read_pgm(BufReader::new(file))
}

pub fn read_pgm(mut reader: impl BufRead) -> Result<PixelImage> {
    let mut header_fields: Vec<u64> = Vec::new();
    let mut magic = String::new();
    let mut window = Rect::unit();

    // magic line
    reader.read_line(&mut magic)?;
    let magic = magic.trim().to_string();
    if magic != "P2" && magic != "P5" {
        return Err(Error::Format(format!("unsupported PGM magic `{magic}`")));
    }

    // width, height, maxval; comments may carry the window
    while header_fields.len() < 3 {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            return Err(Error::Format("truncated PGM header".into()));
        }
        let trimmed = line.trim_end();
        if let Some(rest) = trimmed.strip_prefix(WINDOW_COMMENT) {
            let parts: Vec<f64> = rest
                .split(':')
                .map(|p| p.trim().parse::<f64>().map_err(|e| Error::Format(e.to_string())))
                .collect::<Result<_>>()?;
            if parts.len() == 4 {
                window = Rect::new(parts[0], parts[1], parts[2], parts[3]);
            }
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        for tok in trimmed.split_whitespace() {
            header_fields.push(tok.parse::<u64>().map_err(|e| Error::Format(e.to_string()))?);
        }
    }
    let (width, height, maxval) =
        (header_fields[0] as usize, header_fields[1] as usize, header_fields[2]);
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("bad maxval {maxval}")));
    }

    let npix = width * height;
    let mut values = Vec::with_capacity(npix);
    if magic == "P5" {
        let bytes_per = if maxval > 255 { 2 } else { 1 };
        let mut data = vec![0u8; npix * bytes_per];
        reader.read_exact(&mut data).map_err(|_| Error::Format("truncated PGM data".into()))?;
        for chunk in data.chunks(bytes_per) {
            let q = if bytes_per == 2 {
                u16::from_be_bytes([chunk[0], chunk[1]]) as f64
            } else {
                chunk[0] as f64
            };
            values.push(q / maxval as f64);
        }
    } else {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        for tok in text.split_whitespace() {
            if values.len() == npix {
                break;
            }
            let q: f64 = tok.parse().map_err(|e: std::num::ParseFloatError| Error::Format(e.to_string()))?;
            values.push(q / maxval as f64);
        }
        if values.len() != npix {
            return Err(Error::Format("truncated PGM data".into()));
        }
    }
    PixelImage::new(width, height, window, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phantom_values_stay_in_unit_range() {
        let img = shepp_logan(128, 128).unwrap();
        let (lo, hi) = img.min_max();
        assert!(lo >= 0.0 && hi <= 1.0);
        assert!(hi > 0.9, "head rim should be bright");
        // corner pixels are background
        assert_eq!(img.get(0, 0), 0.0);
        assert_eq!(img.get(127, 127), 0.0);
    }

    #[test]
    fn phantom_center_matches_point_in_ellipse_oracle() {
        // independent oracle: quadratic-form membership per table entry
        let mut expected = 0.0;
        for e in &SHEPP_LOGAN {
            let phi = e.rotation_deg.to_radians();
            let u = (0.0 - e.center_x) * phi.cos() + (0.0 - e.center_y) * phi.sin();
            let v = -(0.0 - e.center_x) * phi.sin() + (0.0 - e.center_y) * phi.cos();
            if (u / e.semi_x).powi(2) + (v / e.semi_y).powi(2) <= 1.0 {
                expected += e.intensity;
            }
        }
        assert!((expected - 0.02).abs() < 1e-12);
        let img = shepp_logan(129, 129).unwrap();
        // odd size puts a pixel center exactly at the origin
        assert!((img.get(64, 64) - expected).abs() < 1e-12);
    }

    #[test]
    fn phantom_mass_is_resolution_stable() {
        let m256 = shepp_logan(256, 256).unwrap().total_mass();
        let m512 = shepp_logan(512, 512).unwrap().total_mass();
        assert!((m256 - m512).abs() <= 0.01 * m512.abs(), "m256={m256} m512={m512}");
    }

    #[test]
    fn phantom_downsample_consistency() {
        // center-rule rasterization at 2x, box-downsampled, only differs
        // near ellipse boundaries
        let fine = shepp_logan(256, 256).unwrap();
        let coarse = shepp_logan(128, 128).unwrap();
        let mut sum_abs = 0.0;
        for row in 0..128 {
            for col in 0..128 {
                let avg = 0.25
                    * (fine.get(2 * row, 2 * col)
                        + fine.get(2 * row + 1, 2 * col)
                        + fine.get(2 * row, 2 * col + 1)
                        + fine.get(2 * row + 1, 2 * col + 1));
                sum_abs += (avg - coarse.get(row, col)).abs();
            }
        }
        let mean_abs = sum_abs / (128.0 * 128.0);
        assert!(mean_abs < 0.01, "mean |diff| = {mean_abs}");
    }

    #[test]
    fn pgm_roundtrip_within_quantization() {
        let img = shepp_logan(64, 64).unwrap();
        let dir = std::env::temp_dir().join("sinolab-pgm-test");
        std::fs::create_dir_all(&dir).unwrap();
        for (maxval, name) in [(255u16, "a.pgm"), (65535u16, "b.pgm")] {
            let p = dir.join(name);
            save_pgm(&img, &p, maxval).unwrap();
            let back = load_pgm(&p).unwrap();
            assert_eq!(back.window(), img.window());
            let tol = 0.5 / maxval as f64 + 1e-12;
            let worst = img
                .values()
                .iter()
                .zip(back.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(worst <= tol, "maxval {maxval}: worst {worst} > {tol}");
        }
    }

    #[test]
    fn pgm_uniform_image_roundtrips_exactly() {
        let img = PixelImage::filled(7, 7, Rect::unit(), 64.0 / 255.0).unwrap();
        let p = std::env::temp_dir().join("sinolab-pgm-uniform.pgm");
        save_pgm_ascii(&img, &p, 255).unwrap();
        let back = load_pgm(&p).unwrap();
        assert_eq!(back.values(), img.values());
    }

    #[test]
    fn pgm_16bit_preserves_small_contrast() {
        let mut img = PixelImage::filled(2, 1, Rect::new(-1.0, 1.0, -0.5, 0.5), 0.5).unwrap();
        img.set(0, 1, 0.5 + 1e-4);
        let p = std::env::temp_dir().join("sinolab-pgm-16bit.pgm");
        save_pgm(&img, &p, 65535).unwrap();
        let back = load_pgm(&p).unwrap();
        assert!(back.get(0, 1) > back.get(0, 0));
    }

    #[test]
    fn pgm_rejects_malformed() {
        assert!(read_pgm(&b"P7\n2 2\n255\n"[..]).is_err());
        assert!(read_pgm(&b"P5\n2 2\n255\nab"[..]).is_err()); // short data
        assert!(read_pgm(&b"P2\n2 1\n255\n3"[..]).is_err());
    }

    #[test]
    fn rasterize_points_bins_weights() {
        let img = DiscreteImage::new(
            vec![vec![-0.5, 0.5], vec![-0.5, 0.5], vec![0.5, -0.5], vec![5.0, 5.0]],
            vec![1.0, 2.0, 4.0, 9.0],
        )
        .unwrap();
        let px = rasterize_points(&img, 2, 2, Rect::unit()).unwrap();
        assert_eq!(px.get(0, 0), 3.0);
        assert_eq!(px.get(1, 1), 4.0);
        assert_eq!(px.get(0, 1), 0.0);
        // the out-of-window point is dropped
        assert_eq!(px.values().iter().sum::<f64>(), 7.0);
    }

    #[test]
    fn constructors_validate() {
        assert!(PixelImage::new(0, 4, Rect::unit(), vec![]).is_err());
        assert!(PixelImage::new(2, 2, Rect::unit(), vec![0.0; 3]).is_err());
        // non-square pixels
        assert!(PixelImage::new(4, 2, Rect::unit(), vec![0.0; 8]).is_err());
        assert!(DiscreteImage::new(vec![], vec![]).is_err());
        assert!(DiscreteImage::new(vec![vec![0.0]], vec![f64::NAN]).is_err());
        assert!(shepp_logan(0, 10).is_err());
    }
}
