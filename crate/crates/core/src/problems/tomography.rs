//! Parallel-beam straight-ray tomography on a square pixel grid.
//!
//! This is a small stand-in for seismic travel-time test problems: row `i`
//! of `A` holds the length of ray `i` inside each pixel, `x⋆` is a
//! rasterized phantom and `b = A x⋆`. Pixels have side 1 and the grid
//! occupies `[0, N] × [0, N]`; pixel `(ix, iy)` has column index
//! `iy · N + ix`.

use super::{ProblemError, ProblemInstance};
use crate::matrix::SparseMatrixCsc;
use crate::rng::{stream, stream_rng};
use rand::Rng;

/// Segments shorter than this (in pixel units) are rounding artifacts of
/// rays passing through grid corners and are skipped.
const MIN_SEGMENT: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct TomoGeometry {
    /// Pixels per side.
    pub grid: usize,
    /// Projection angles in degrees.
    pub angles_deg: Vec<f64>,
    /// Parallel rays per angle.
    pub detectors: usize,
    /// Offset between neighbouring rays, in pixel units.
    pub detector_spacing: f64,
}

impl TomoGeometry {
    /// `angles` equispaced over `[0°, 180°)` with the detector row spanning
    /// the grid diagonal.
    pub fn parallel(grid: usize, angles: usize, detectors: usize) -> Self {
        Self {
            grid,
            angles_deg: (0..angles)
                .map(|k| k as f64 * 180.0 / angles as f64)
                .collect(),
            detectors,
            detector_spacing: grid as f64 * std::f64::consts::SQRT_2 / detectors.max(1) as f64,
        }
    }

    pub fn ray_count(&self) -> usize {
        self.angles_deg.len() * self.detectors
    }

    /// Origin and direction of every ray, angle-major.
    pub fn rays(&self) -> Vec<((f64, f64), (f64, f64))> {
        let c = self.grid as f64 / 2.0;
        let mid = (self.detectors as f64 - 1.0) / 2.0;
        let mut out = Vec::with_capacity(self.ray_count());
        for &deg in &self.angles_deg {
            let (sin, cos) = deg.to_radians().sin_cos();
            for i in 0..self.detectors {
                let t = (i as f64 - mid) * self.detector_spacing;
                out.push(((c - t * sin, c + t * cos), (cos, sin)));
            }
        }
        out
    }
}

/// Pixel lengths of the line `origin + α · dir` through an `nx × ny` grid
/// of unit pixels, in order of traversal. Consecutive segments in the same
/// pixel are merged.
pub fn trace_ray(nx: usize, ny: usize, origin: (f64, f64), dir: (f64, f64)) -> Vec<(usize, f64)> {
    let speed = (dir.0 * dir.0 + dir.1 * dir.1).sqrt();
    if speed == 0.0 {
        return Vec::new();
    }
    let slab = |o: f64, d: f64, size: f64| -> Option<(f64, f64)> {
        if d != 0.0 {
            let a0 = (0.0 - o) / d;
            let a1 = (size - o) / d;
            Some((a0.min(a1), a0.max(a1)))
        } else if (0.0..=size).contains(&o) {
            Some((f64::NEG_INFINITY, f64::INFINITY))
        } else {
            None
        }
    };
    let (Some((xl, xh)), Some((yl, yh))) = (
        slab(origin.0, dir.0, nx as f64),
        slab(origin.1, dir.1, ny as f64),
    ) else {
        return Vec::new();
    };
    let (amin, amax) = (xl.max(yl), xh.min(yh));
    if !(amax > amin) {
        return Vec::new();
    }

    let mut alphas = vec![amin, amax];
    let mut planes = |o: f64, d: f64, count: usize| {
        if d != 0.0 {
            for i in 0..=count {
                let a = (i as f64 - o) / d;
                if a > amin && a < amax {
                    alphas.push(a);
                }
            }
        }
    };
    planes(origin.0, dir.0, nx);
    planes(origin.1, dir.1, ny);
    alphas.sort_by(|p, q| p.total_cmp(q));

    let mut out: Vec<(usize, f64)> = Vec::new();
    for w in alphas.windows(2) {
        let len = (w[1] - w[0]) * speed;
        if len <= MIN_SEGMENT {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        let px = origin.0 + mid * dir.0;
        let py = origin.1 + mid * dir.1;
        let (ix, iy) = (px.floor(), py.floor());
        if ix < 0.0 || iy < 0.0 || ix >= nx as f64 || iy >= ny as f64 {
            continue;
        }
        let pixel = iy as usize * nx + ix as usize;
        match out.last_mut() {
            Some((p, l)) if *p == pixel => *l += len,
            _ => out.push((pixel, len)),
        }
    }
    out
}

/// Test images on `[-1, 1]²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phantom {
    /// The modified Shepp–Logan head.
    SheppLogan,
    /// Three overlapping rectangles.
    Blocks,
    /// Six random ellipses.
    RandomEllipses { seed: u64 },
}

/// `(value, semi-axis a, semi-axis b, centre x, centre y, rotation °)`
type Ellipse = (f64, f64, f64, f64, f64, f64);

const SHEPP_LOGAN: [Ellipse; 10] = [
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
];

fn ellipse_value(e: &Ellipse, u: f64, v: f64) -> f64 {
    let (val, a, b, x0, y0, deg) = *e;
    let (s, c) = deg.to_radians().sin_cos();
    let (du, dv) = (u - x0, v - y0);
    let p = du * c + dv * s;
    let q = -du * s + dv * c;
    if (p / a).powi(2) + (q / b).powi(2) <= 1.0 {
        val
    } else {
        0.0
    }
}

impl Phantom {
    pub fn name(&self) -> String {
        match self {
            Phantom::SheppLogan => "shepp-logan".into(),
            Phantom::Blocks => "blocks".into(),
            Phantom::RandomEllipses { seed } => format!("ellipses-{seed}"),
        }
    }

    /// `N × N` image sampled at pixel centres, in column-index order.
    pub fn rasterize(&self, n: usize) -> Vec<f64> {
        let ellipses: Vec<Ellipse> = match self {
            Phantom::SheppLogan => SHEPP_LOGAN.to_vec(),
            Phantom::Blocks => Vec::new(),
            Phantom::RandomEllipses { seed } => {
                let mut rng = stream_rng(*seed, stream::PHANTOM);
                (0..6)
                    .map(|_| {
                        (
                            rng.random_range(0.2..1.0),
                            rng.random_range(0.1..0.5),
                            rng.random_range(0.1..0.5),
                            rng.random_range(-0.5..0.5),
                            rng.random_range(-0.5..0.5),
                            rng.random_range(0.0..180.0),
                        )
                    })
                    .collect()
            }
        };
        let mut img = vec![0.0; n * n];
        for iy in 0..n {
            for ix in 0..n {
                let u = (ix as f64 + 0.5) / n as f64 * 2.0 - 1.0;
                let v = (iy as f64 + 0.5) / n as f64 * 2.0 - 1.0;
                img[iy * n + ix] = match self {
                    Phantom::Blocks => blocks_value(u, v),
                    _ => ellipses.iter().map(|e| ellipse_value(e, u, v)).sum(),
                };
            }
        }
        img
    }
}

fn blocks_value(u: f64, v: f64) -> f64 {
    let inside = |x0: f64, x1: f64, y0: f64, y1: f64| u >= x0 && u <= x1 && v >= y0 && v <= y1;
    let mut val = 0.0;
    if inside(-0.7, -0.1, -0.6, 0.4) {
        val += 1.0;
    }
    if inside(-0.3, 0.6, 0.2, 0.7) {
        val += 0.5;
    }
    if inside(0.1, 0.5, -0.7, -0.1) {
        val += 0.8;
    }
    val
}

#[derive(Clone, Debug)]
pub struct TomographyInstance {
    pub problem: ProblemInstance,
    /// Rays that missed the grid and were left out of `A`.
    pub dropped_rays: usize,
}

pub fn gen_tomography(
    geom: &TomoGeometry,
    phantom: Phantom,
) -> Result<TomographyInstance, ProblemError> {
    let n = geom.grid;
    if n < 4 {
        return Err(ProblemError::InvalidParameter(format!("grid side {n} < 4")));
    }
    if geom.detectors == 0 || geom.angles_deg.is_empty() || !(geom.detector_spacing > 0.0) {
        return Err(ProblemError::InvalidParameter(
            "empty detector geometry".into(),
        ));
    }
    let mut triplets = Vec::new();
    let mut row = 0;
    let mut dropped = 0;
    for (origin, dir) in geom.rays() {
        let hits = trace_ray(n, n, origin, dir);
        if hits.is_empty() {
            dropped += 1;
            continue;
        }
        triplets.extend(hits.into_iter().map(|(p, l)| (row, p, l)));
        row += 1;
    }
    if dropped > 0 {
        log::warn!("tomography N={n}: dropped {dropped} rays that miss the grid");
    }
    if row <= n * n {
        return Err(ProblemError::Underdetermined {
            rows: row,
            cols: n * n,
        });
    }
    let a = SparseMatrixCsc::from_triplets(row, n * n, &triplets)?;
    let a = crate::matrix::Matrix::from(a);
    let x_star = phantom.rasterize(n);
    let b = a.matvec(&x_star)?;
    let problem = ProblemInstance::new(
        a,
        b,
        Some(x_star),
        format!("tomo{n}-{}", phantom.name()),
        format!(
            "parallel-beam tomography N={n}, {} angles x {} detectors, spacing {}",
            geom.angles_deg.len(),
            geom.detectors,
            geom.detector_spacing
        ),
        true,
    )?;
    Ok(TomographyInstance {
        problem,
        dropped_rays: dropped,
    })
}
