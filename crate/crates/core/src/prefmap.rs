//! Preference maps: weighted kernel density estimates of where a strategy
//! queries in two-dimensional feature space.
//!
//! Two weighting schemes are supported. `first_query` keeps only each
//! trial's first query with unit weight, showing where a strategy starts.
//! `exp_decay` keeps every query, down-weighting round r of a budget-B
//! trial by exp(−r/B), so early queries dominate but the whole trajectory
//! contributes. Densities are unnormalized: the grid integrates to roughly
//! the total weight, not to one.

use crate::engine::QueryRecord;
use crate::error::{Error, Result};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Smallest per-axis kernel bandwidth; guards degenerate point sets.
pub const MIN_BANDWIDTH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightScheme {
    FirstQuery,
    ExpDecay,
}

impl WeightScheme {
    pub const ALL: [WeightScheme; 2] = [WeightScheme::FirstQuery, WeightScheme::ExpDecay];

    pub fn id(self) -> &'static str {
        match self {
            WeightScheme::FirstQuery => "first_query",
            WeightScheme::ExpDecay => "exp_decay",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        WeightScheme::ALL
            .into_iter()
            .find(|s| s.id() == id)
            .ok_or_else(|| Error::Config(format!("unknown weight scheme '{id}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedPoint {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

/// Extracts weighted query locations from per-trial query logs.
///
/// `budget` is the trial budget B used by the decay scheme. Fails with
/// [`Error::NotTwoDimensional`] when any query lacks coordinates.
pub fn collect_locations(
    dataset: &str,
    trials: &[&[QueryRecord]],
    scheme: WeightScheme,
    budget: usize,
) -> Result<Vec<WeightedPoint>> {
    assert!(budget > 0, "budget must be positive");
    let mut points = Vec::new();
    for queries in trials {
        match scheme {
            WeightScheme::FirstQuery => {
                if let Some(q) = queries.first() {
                    points.push(weighted(dataset, q, 1.0)?);
                }
            }
            WeightScheme::ExpDecay => {
                for q in *queries {
                    let w = (-(q.round as f64) / budget as f64).exp();
                    points.push(weighted(dataset, q, w)?);
                }
            }
        }
    }
    Ok(points)
}

fn weighted(dataset: &str, q: &QueryRecord, weight: f64) -> Result<WeightedPoint> {
    let [x, y] = q
        .location
        .ok_or_else(|| Error::NotTwoDimensional(dataset.to_string()))?;
    Ok(WeightedPoint { x, y, weight })
}

/// A regular evaluation grid: `nx`×`ny` points including both endpoints on
/// each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// Axis-aligned bounding box of the points, padded by `margin_frac` of
    /// each axis range (or ±1 for a degenerate axis).
    pub fn covering(points: &[WeightedPoint], nx: usize, ny: usize, margin_frac: f64) -> Self {
        assert!(!points.is_empty(), "need at least one point");
        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for p in points {
            x_min = x_min.min(p.x);
            x_max = x_max.max(p.x);
            y_min = y_min.min(p.y);
            y_max = y_max.max(p.y);
        }
        let pad = |lo: f64, hi: f64| {
            let range = hi - lo;
            if range > 0.0 {
                (lo - margin_frac * range, hi + margin_frac * range)
            } else {
                (lo - 1.0, hi + 1.0)
            }
        };
        let (x_min, x_max) = pad(x_min, x_max);
        let (y_min, y_max) = pad(y_min, y_max);
        GridSpec {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
        }
    }

    pub fn x_at(&self, ix: usize) -> f64 {
        self.x_min + (self.x_max - self.x_min) * ix as f64 / (self.nx - 1) as f64
    }

    pub fn y_at(&self, iy: usize) -> f64 {
        self.y_min + (self.y_max - self.y_min) * iy as f64 / (self.ny - 1) as f64
    }

    fn validate(&self) {
        assert!(self.nx >= 2 && self.ny >= 2, "grid needs at least 2x2 points");
        assert!(
            self.x_max > self.x_min && self.y_max > self.y_min,
            "grid extents must be nonempty"
        );
    }
}

/// An evaluated density surface. Values are stored row-major with y
/// ascending: index `iy * nx + ix`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    /// Per-axis Gaussian bandwidths actually used.
    pub bandwidth: (f64, f64),
}

/// Weighted product-Gaussian KDE over the grid.
///
/// Bandwidths follow the per-axis Silverman rule on the weighted sample,
/// h = σ̂ · n_eff^(−1/6) with the effective sample size n_eff =
/// (Σw)²/Σw², floored at [`MIN_BANDWIDTH`].
pub fn kde_grid(points: &[WeightedPoint], spec: GridSpec) -> DensityGrid {
    assert!(!points.is_empty(), "need at least one point");
    spec.validate();
    let w_sum: f64 = points.iter().map(|p| p.weight).sum();
    let w_sq: f64 = points.iter().map(|p| p.weight * p.weight).sum();
    assert!(w_sum > 0.0, "total weight must be positive");
    let n_eff = w_sum * w_sum / w_sq;

    let sigma = |get: fn(&WeightedPoint) -> f64| {
        let mean: f64 = points.iter().map(|p| p.weight * get(p)).sum::<f64>() / w_sum;
        let var: f64 = points
            .iter()
            .map(|p| p.weight * (get(p) - mean) * (get(p) - mean))
            .sum::<f64>()
            / w_sum;
        var.sqrt()
    };
    let hx = (sigma(|p| p.x) * n_eff.powf(-1.0 / 6.0)).max(MIN_BANDWIDTH);
    let hy = (sigma(|p| p.y) * n_eff.powf(-1.0 / 6.0)).max(MIN_BANDWIDTH);

    let norm = 1.0 / (2.0 * std::f64::consts::PI * hx * hy);
    let mut values = vec![0.0; spec.nx * spec.ny];
    for iy in 0..spec.ny {
        let gy = spec.y_at(iy);
        for ix in 0..spec.nx {
            let gx = spec.x_at(ix);
            let mut acc = 0.0;
            for p in points {
                let dx = (gx - p.x) / hx;
                let dy = (gy - p.y) / hy;
                acc += p.weight * (-0.5 * (dx * dx + dy * dy)).exp();
            }
            values[iy * spec.nx + ix] = norm * acc;
        }
    }
    DensityGrid {
        spec,
        values,
        bandwidth: (hx, hy),
    }
}

/// Writes `x,y,density` rows, y-major with x varying fastest.
pub fn write_prefmap_csv(grid: &DensityGrid, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    (|| -> std::io::Result<()> {
        writeln!(w, "x,y,density")?;
        for iy in 0..grid.spec.ny {
            for ix in 0..grid.spec.nx {
                writeln!(
                    w,
                    "{},{},{}",
                    grid.spec.x_at(ix),
                    grid.spec.y_at(iy),
                    grid.values[iy * grid.spec.nx + ix]
                )?;
            }
        }
        w.flush()
    })()
    .map_err(|e| Error::io(path, e))
}

/// Writes an 8-bit binary PGM (P5) image of the grid, min-max normalized.
/// Row 0 of the image is the maximum-y grid row; a constant grid maps to
/// all zeros.
pub fn write_prefmap_pgm(grid: &DensityGrid, path: &Path) -> Result<()> {
    let lo = grid.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = grid.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let mut bytes = Vec::with_capacity(grid.values.len());
    for iy in (0..grid.spec.ny).rev() {
        for ix in 0..grid.spec.nx {
            let v = grid.values[iy * grid.spec.nx + ix];
            let level = if range > 0.0 {
                ((v - lo) / range * 255.0).round() as u8
            } else {
                0
            };
            bytes.push(level);
        }
    }
    let mut out = format!("P5\n{} {}\n255\n", grid.spec.nx, grid.spec.ny).into_bytes();
    out.extend_from_slice(&bytes);
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
