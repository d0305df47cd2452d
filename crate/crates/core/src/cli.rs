//! Command-line front end.
//!
//! Every subcommand echoes its full parameter set (plus the library
//! version) into the output files as `#` comment lines, and every output
//! is deterministic given the flags, including the seeded noise path.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::convergence::{self, StudyImage, TestFunction};
use crate::families;
use crate::grid::Discretization;
use crate::hough::{self};
use crate::images::{self, PixelImage, Rect};
use crate::inversion::{self, FilterKind, NoiseSpec, SweepConfig};
use crate::radon::{self, Normalization, Sinogram};
use crate::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const PI: f64 = std::f64::consts::PI;

#[derive(Parser, Debug)]
#[command(name = "sinolab", version, about = "Radon/Hough sinogram toolbox")]
pub struct Cli {
    /// Worker threads for the heavy kernels.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Rasterize the head phantom to a PGM image.
    Phantom {
        /// Output raster, e.g. 256x256.
        #[arg(long, default_value = "256x256", value_parser = parse_size)]
        size: (usize, usize),
        #[arg(long, default_value_t = 65535)]
        maxval: u16,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Exact Radon sinogram of a PGM image on a (theta, gamma) grid.
    Radon {
        #[arg(long = "in")]
        input: PathBuf,
        /// Number of theta samples over [0, pi).
        #[arg(long = "I", default_value_t = 629)]
        theta_count: usize,
        /// Number of gamma samples over [-gamma-max, gamma-max].
        #[arg(long = "J", default_value_t = 287)]
        gamma_count: usize,
        #[arg(long, default_value_t = SQRT_2)]
        gamma_max: f64,
        /// unit-gradient (arc length) or slope values.
        #[arg(long, default_value = "unit-gradient", value_parser = parse_normalization)]
        normalization: Normalization,
        #[arg(short, long)]
        out: PathBuf,
        /// Optional min-max normalized PGM dump for visual checks.
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Corrupt a sinogram with multiplicative Gaussian noise.
    Noise {
        #[arg(long = "in")]
        input: PathBuf,
        /// Noise level; 1.0 = 100%.
        #[arg(long, default_value_t = 1.0)]
        level: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Back-project a sinogram (optionally ramp-filtered) to an image.
    Fbp {
        #[arg(long = "in")]
        input: PathBuf,
        /// none, ramlak, shepplogan, cosine, hamming, hann.
        #[arg(long, default_value = "ramlak")]
        filter: FilterKind,
        #[arg(long, default_value = "256x256", value_parser = parse_size)]
        size: (usize, usize),
        #[arg(long, default_value = "-1:1:-1:1", value_parser = parse_window)]
        window: Rect,
        #[arg(long, default_value_t = 65535)]
        maxval: u16,
        #[arg(short, long)]
        out: PathBuf,
        /// Optional raw float dump (CSV) of the reconstruction.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Trace back every above-threshold sinogram cell as a line.
    HoughInvert {
        #[arg(long = "in")]
        input: PathBuf,
        /// Threshold as a fraction of the maximum cell value; 0 = none.
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
        #[arg(long, default_value = "256x256", value_parser = parse_size)]
        size: (usize, usize),
        #[arg(long, default_value = "-1:1:-1:1", value_parser = parse_window)]
        window: Rect,
        #[arg(long, default_value_t = 65535)]
        maxval: u16,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Full noisy-inversion experiment: Hough thresholds vs BP/FBP.
    Sweep {
        #[arg(long, default_value = "256x256", value_parser = parse_size)]
        size: (usize, usize),
        #[arg(long = "I", default_value_t = 629)]
        theta_count: usize,
        #[arg(long = "J", default_value_t = 287)]
        gamma_count: usize,
        #[arg(long, default_value_t = 1.0)]
        level: f64,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.2, 0.4, 0.6, 0.8, 0.9])]
        thresholds: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 3, 5, 8])]
        seeds: Vec<u64>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Grid-refinement study: rescaled counter vs Radon pairing.
    SweepConvergence {
        /// discrete (random points) or pixel (single-pixel image).
        #[arg(long, default_value = "discrete")]
        image: String,
        /// Point count for the discrete study.
        #[arg(long, default_value_t = 5)]
        points: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of grids in the halving chain.
        #[arg(long, default_value_t = 6)]
        levels: usize,
        /// Cells per axis of the coarsest grid.
        #[arg(long, default_value_t = 64)]
        base_count: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Detect curve parameters from a point cloud via the accumulator.
    Detect {
        /// line-angle, line-slope, hyperplane, weierstrass.
        #[arg(long, default_value = "weierstrass")]
        family: String,
        /// CSV of points: x,y[,weight] per line.
        #[arg(long)]
        points: PathBuf,
        /// Grid initialization point, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![-2.0, -2.0])]
        lambda_star: Vec<f64>,
        /// Sampling distances, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.05, 0.05])]
        d: Vec<f64>,
        /// Cells per axis.
        #[arg(long, value_delimiter = ',', default_values_t = vec![81, 81])]
        counts: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        top: usize,
        #[arg(long, default_value_t = 1)]
        min_sep: usize,
        /// Optional rescaled-accumulator CSV dump.
        #[arg(long)]
        accumulator: Option<PathBuf>,
    },
    /// Pair a sinogram against a polynomial bump test function.
    Pair {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        center: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        radius: Vec<f64>,
    },
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s.split_once('x').ok_or_else(|| format!("expected WxH, got `{s}`"))?;
    let w = w.parse().map_err(|e| format!("{e}"))?;
    let h = h.parse().map_err(|e| format!("{e}"))?;
    if w == 0 || h == 0 {
        return Err("size components must be >= 1".into());
    }
    Ok((w, h))
}

fn parse_window(s: &str) -> std::result::Result<Rect, String> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.parse::<f64>().map_err(|e| format!("{e}")))
        .collect::<std::result::Result<_, _>>()?;
    if parts.len() != 4 {
        return Err("expected x_min:x_max:y_min:y_max".into());
    }
    Ok(Rect::new(parts[0], parts[1], parts[2], parts[3]))
}

fn parse_normalization(s: &str) -> std::result::Result<Normalization, String> {
    match s {
        "unit-gradient" => Ok(Normalization::UnitGradient),
        "slope" => Ok(Normalization::Slope),
        other => Err(format!("unknown normalization `{other}`")),
    }
}

fn version_line() -> String {
    format!("sinolab v{}", env!("CARGO_PKG_VERSION"))
}

fn theta_gamma_grid(i: usize, j: usize, gamma_max: f64) -> Result<Discretization> {
    Discretization::span(&[0.0, -gamma_max], &[PI, gamma_max], &[i, j])
}

fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

pub fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads.max(1);
    match cli.cmd {
        Cmd::Phantom { size, maxval, out } => {
            let img = images::shepp_logan(size.0, size.1)?;
            let meta = vec![
                version_line(),
                format!("cmd=phantom size={}x{} maxval={maxval}", size.0, size.1),
            ];
            images::save_pgm_with_comments(&img, &out, maxval, &meta)?;
        }
        Cmd::Radon { input, theta_count, gamma_count, gamma_max, normalization, out, pgm } => {
            let img = images::load_pgm(&input)?;
            let disc = theta_gamma_grid(theta_count, gamma_count, gamma_max)?;
            let sino = radon::sinogram_pixel(&img, &disc, normalization, threads)?;
            let meta = vec![
                version_line(),
                format!(
                    "cmd=radon in={} I={theta_count} J={gamma_count} gamma_max={gamma_max} normalization={} threads={threads}",
                    input.display(),
                    match normalization {
                        Normalization::UnitGradient => "unit-gradient",
                        Normalization::Slope => "slope",
                    }
                ),
            ];
            sino.save_csv(&out, &meta)?;
            if let Some(p) = pgm {
                let mut buf = Vec::new();
                sino.write_pgm_normalized(&mut buf, 255)?;
                std::fs::write(p, buf)?;
            }
        }
        Cmd::Noise { input, level, seed, out } => {
            let sino = Sinogram::load_csv(&input)?;
            let noisy = inversion::add_noise(&sino, NoiseSpec::new(level, seed)?);
            let meta = vec![
                version_line(),
                format!(
                    "cmd=noise in={} level={level} seed={seed} rng=chacha8+box-muller",
                    input.display()
                ),
            ];
            noisy.save_csv(&out, &meta)?;
        }
        Cmd::Fbp { input, filter, size, window, maxval, out, csv } => {
            let sino = Sinogram::load_csv(&input)?;
            let img = inversion::fbp(&sino, filter, size.0, size.1, window, threads)?;
            let meta = vec![
                version_line(),
                format!(
                    "cmd=fbp in={} filter={} size={}x{} threads={threads}",
                    input.display(),
                    filter.name(),
                    size.0,
                    size.1
                ),
            ];
            save_image_outputs(&img, &out, csv.as_deref(), maxval, &meta)?;
        }
        Cmd::HoughInvert { input, threshold, size, window, maxval, out, csv } => {
            let sino = Sinogram::load_csv(&input)?;
            let img = inversion::hough_invert(&sino, size.0, size.1, window, threshold, threads)?;
            let meta = vec![
                version_line(),
                format!(
                    "cmd=hough-invert in={} threshold={threshold} size={}x{} rasterization=supercover threads={threads}",
                    input.display(),
                    size.0,
                    size.1
                ),
            ];
            save_image_outputs(&img, &out, csv.as_deref(), maxval, &meta)?;
        }
        Cmd::Sweep { size, theta_count, gamma_count, level, thresholds, seeds, out } => {
            let truth = images::shepp_logan(size.0, size.1)?;
            let disc = theta_gamma_grid(theta_count, gamma_count, SQRT_2)?;
            let sino = radon::sinogram_pixel(&truth, &disc, Normalization::UnitGradient, threads)?;
            let cfg = SweepConfig {
                level,
                thresholds: thresholds.clone(),
                seeds: seeds.clone(),
                out_width: size.0,
                out_height: size.1,
                threads,
            };
            let reports =
                inversion::threshold_sweep(&sino, &truth, images::shepp_logan_inside, &cfg)?;
            let mut buf = Vec::new();
            writeln!(buf, "# {}", version_line())?;
            writeln!(
                buf,
                "# cmd=sweep size={}x{} I={theta_count} J={gamma_count} level={level} thresholds={thresholds:?} seeds={seeds:?} mask=inside-outer-ellipse rng=chacha8+box-muller threads={threads}",
                size.0, size.1
            )?;
            writeln!(buf, "method,threshold,seed,error,constant_input,rescale_min,rescale_max")?;
            for r in &reports {
                writeln!(
                    buf,
                    "{},{},{},{},{},{},{}",
                    r.method,
                    r.threshold.map(|t| t.to_string()).unwrap_or_default(),
                    r.seed.map(|s| s.to_string()).unwrap_or_default(),
                    r.error,
                    r.constant_input,
                    r.rescale_min,
                    r.rescale_max
                )?;
            }
            std::fs::write(&out, buf)?;
        }
        Cmd::SweepConvergence { image, points, seed, levels, base_count, out } => {
            let fam = families::line_angle();
            let base = theta_gamma_grid(base_count, base_count, SQRT_2)?;
            let chain = convergence::halving_chain(&base, levels);
            let psi = TestFunction::bump(vec![PI / 2.0, 0.3], vec![0.9, 0.7])?;
            let report = match image.as_str() {
                "discrete" => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let pts: Vec<(f64, f64)> = (0..points.max(1))
                        .map(|_| (uniform01(&mut rng) * 2.0 - 1.0, uniform01(&mut rng) * 2.0 - 1.0))
                        .collect();
                    let img = images::DiscreteImage::from_xy_unit(&pts)?;
                    convergence::convergence_study(&fam, StudyImage::Discrete(&img), &psi, &chain)?
                }
                "pixel" => {
                    let img = PixelImage::filled(1, 1, Rect::new(-0.5, 0.5, -0.5, 0.5), 1.0)?;
                    convergence::convergence_study(&fam, StudyImage::Pixel(&img), &psi, &chain)?
                }
                other => {
                    return Err(Error::Domain(format!(
                        "unknown image kind `{other}` (discrete or pixel)"
                    )))
                }
            };
            let verdict = format!(
                "verdict slope={:.4} monotone={} ratios={:?}",
                report.slope, report.monotone, report.ratios
            );
            let mut buf = Vec::new();
            writeln!(buf, "# {}", version_line())?;
            writeln!(
                buf,
                "# cmd=sweep-convergence image={image} points={points} seed={seed} levels={levels} base_count={base_count}"
            )?;
            writeln!(buf, "D,hough_pairing,radon_pairing,error")?;
            for e in &report.entries {
                writeln!(buf, "{},{},{},{}", e.d_max, e.hough_pairing, e.reference_pairing, e.abs_error)?;
            }
            writeln!(buf, "# {verdict}")?;
            std::fs::write(&out, buf)?;
            println!("{verdict}");
        }
        Cmd::Detect { family, points, lambda_star, d, counts, top, min_sep, accumulator } => {
            let fam = families::by_name(&family)?;
            let img = read_points_csv(&points)?;
            let t = lambda_star.len();
            if d.len() != t || counts.len() != t {
                return Err(Error::Domain(
                    "lambda-star, d and counts must have matching lengths".into(),
                ));
            }
            let n_hi: Vec<i64> = counts.iter().map(|&c| c as i64 - 1).collect();
            let disc = Discretization::new(lambda_star, d, vec![0; t], n_hi)?;
            let counter = hough::accumulate_discrete(&fam, &img, &disc)?;
            let peaks = hough::detect_peaks(&counter, top, min_sep)?;
            for p in &peaks {
                let coords: Vec<String> = p.center.iter().map(|c| c.to_string()).collect();
                println!("{},{}", coords.join(","), p.value);
            }
            if let Some(path) = accumulator {
                let meta = vec![
                    version_line(),
                    format!("cmd=detect family={family} points={} top={top}", points.display()),
                ];
                hough::rescale(counter)?.save_csv(&path, &meta)?;
            }
        }
        Cmd::Pair { input, center, radius } => {
            let sino = Sinogram::load_csv(&input)?;
            let psi = TestFunction::bump(center, radius)?;
            let v = convergence::pair_grid(&sino, &psi);
            println!("{v}");
        }
    }
    Ok(())
}

fn save_image_outputs(
    img: &PixelImage,
    pgm_path: &std::path::Path,
    csv_path: Option<&std::path::Path>,
    maxval: u16,
    meta: &[String],
) -> Result<()> {
    // reconstructions are unnormalized; rescale for the quantized dump
    let (lo, hi) = img.min_max();
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut shown = img.clone();
    shown.values_mut().iter_mut().for_each(|v| *v = (*v - lo) / span);
    let mut meta = meta.to_vec();
    meta.push(format!("rescale_min={lo} rescale_max={hi}"));
    images::save_pgm_with_comments(&shown, pgm_path, maxval, &meta)?;
    if let Some(p) = csv_path {
        let mut buf = Vec::new();
        for line in &meta {
            writeln!(buf, "# {line}")?;
        }
        for row in 0..img.height() {
            let cells: Vec<String> =
                (0..img.width()).map(|c| img.get(row, c).to_string()).collect();
            writeln!(buf, "{}", cells.join(","))?;
        }
        std::fs::write(p, buf)?;
    }
    Ok(())
}

fn read_points_csv(path: &std::path::Path) -> Result<images::DiscreteImage> {
    let text = std::fs::read_to_string(path)?;
    let mut pts = Vec::new();
    let mut weights = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<f64> = line
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| Error::Format(e.to_string())))
            .collect::<Result<_>>()?;
        match parts.len() {
            2 => {
                pts.push(vec![parts[0], parts[1]]);
                weights.push(1.0);
            }
            3 => {
                pts.push(vec![parts[0], parts[1]]);
                weights.push(parts[2]);
            }
            n => return Err(Error::Format(format!("expected 2 or 3 fields, got {n}"))),
        }
    }
    images::DiscreteImage::new(pts, weights)
}
