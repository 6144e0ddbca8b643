//! Initial genotype estimate by projecting skeleton ink onto the axes
//! (flat, single-table xy-cut).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{sample_genotype, PageSpec, TableConfig, TableGenotype};
use crate::raster::RasterImage;
use crate::rng::derive_seed;
use crate::skeleton::SkeletonTarget;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

/// Summed darkness per column (`Axis::X`) or per row (`Axis::Y`).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionProfile {
    pub axis: Axis,
    pub values: Vec<f64>,
}

pub fn project(img: &RasterImage, axis: Axis) -> ProjectionProfile {
    let (w, h) = img.dims();
    let values = match axis {
        Axis::X => {
            let mut v = vec![0f64; w];
            for y in 0..h {
                for (acc, &p) in v.iter_mut().zip(img.row(y)) {
                    *acc += 1.0 - p as f64;
                }
            }
            v
        }
        Axis::Y => (0..h)
            .map(|y| img.row(y).iter().map(|&p| 1.0 - p as f64).sum())
            .collect(),
    };
    ProjectionProfile { axis, values }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Peaks below this fraction of the profile maximum are ignored.
    pub peak_threshold_frac: f64,
    /// Peaks closer than this (profile samples) are merged.
    pub min_gap_px: f64,
    /// Half-width of the running minimum subtracted from profiles before
    /// detection (removes the floor laid down by perpendicular lines).
    pub background_radius: usize,
    /// Half-width of the moving sum applied after background removal.
    pub smoothing_radius: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            peak_threshold_frac: 0.3,
            min_gap_px: 4.0,
            background_radius: 3,
            smoothing_radius: 1,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.peak_threshold_frac > 0.0 && self.peak_threshold_frac <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "peak_threshold_frac {} outside (0, 1]",
                self.peak_threshold_frac
            )));
        }
        if !(self.min_gap_px >= 0.0) {
            return Err(Error::InvalidConfig("min_gap_px must be non-negative".into()));
        }
        Ok(())
    }
}

/// Profile minus its running minimum over `[i − radius, i + radius]`.
///
/// Perpendicular dividers add a constant floor between the dividers being
/// looked for; this removes it while leaving peaks narrower than the window
/// intact. Radius 0 returns zeros.
pub fn remove_background(profile: &ProjectionProfile, radius: usize) -> ProjectionProfile {
    let v = &profile.values;
    let values = (0..v.len())
        .map(|i| {
            let a = i.saturating_sub(radius);
            let b = (i + radius + 1).min(v.len());
            let floor = v[a..b].iter().copied().fold(f64::INFINITY, f64::min);
            v[i] - floor
        })
        .collect();
    ProjectionProfile {
        axis: profile.axis,
        values,
    }
}

/// Moving sum over `[i − radius, i + radius]`, truncated at the ends.
///
/// A thin line whose darkness straddles two samples keeps its full height
/// after smoothing, so peak heights stop depending on sub-pixel phase.
pub fn smooth(profile: &ProjectionProfile, radius: usize) -> ProjectionProfile {
    let v = &profile.values;
    let mut prefix = vec![0f64; v.len() + 1];
    for (i, x) in v.iter().enumerate() {
        prefix[i + 1] = prefix[i] + x;
    }
    let values = (0..v.len())
        .map(|i| {
            let a = i.saturating_sub(radius);
            let b = (i + radius + 1).min(v.len());
            (prefix[b] - prefix[a]).max(0.0)
        })
        .collect();
    ProjectionProfile {
        axis: profile.axis,
        values,
    }
}

/// Divider positions (sub-sample, in profile index units) found as peaks of
/// the profile.
///
/// Samples at or above `peak_threshold_frac × max` form runs; a run is split
/// at interior valleys so that every segment holds exactly one local maximum.
/// Each segment is located at its darkness-weighted centroid, and centroids
/// closer than `min_gap_px` are merged into their combined centroid. An
/// all-zero profile yields no dividers.
pub fn detect_dividers(profile: &ProjectionProfile, peak_threshold_frac: f64, min_gap_px: f64) -> Vec<f64> {
    let v = &profile.values;
    let max = v.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let thr = peak_threshold_frac * max;

    // (position, mass) per single-maximum segment.
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    let mut seg: Option<(f64, f64, bool)> = None; // (Σ i·v, Σ v, descending)
    let flush = |seg: &mut Option<(f64, f64, bool)>, peaks: &mut Vec<(f64, f64)>| {
        if let Some((m1, m0, _)) = seg.take() {
            peaks.push((m1 / m0, m0));
        }
    };
    for i in 0..v.len() {
        if v[i] < thr {
            flush(&mut seg, &mut peaks);
            continue;
        }
        if let Some((_, _, descending)) = seg {
            if descending && v[i] > v[i - 1] {
                flush(&mut seg, &mut peaks);
            }
        }
        let s = seg.get_or_insert((0.0, 0.0, false));
        if i > 0 && v[i] < v[i - 1] {
            s.2 = true;
        }
        s.0 += i as f64 * v[i];
        s.1 += v[i];
    }
    flush(&mut seg, &mut peaks);

    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(peaks.len());
    for (pos, mass) in peaks {
        match merged.last_mut() {
            Some(last) if pos - last.0 < min_gap_px => {
                let m = last.1 + mass;
                last.0 = (last.0 * last.1 + pos * mass) / m;
                last.1 = m;
            }
            _ => merged.push((pos, mass)),
        }
    }
    merged.into_iter().map(|(p, _)| p).collect()
}

/// Projection with background removal (when `background_radius > 0`) and
/// smoothing applied.
pub fn profile_for_detection(img: &RasterImage, axis: Axis, thresholds: &Thresholds) -> ProjectionProfile {
    let mut p = project(img, axis);
    if thresholds.background_radius > 0 {
        p = remove_background(&p, thresholds.background_radius);
    }
    smooth(&p, thresholds.smoothing_radius)
}

/// Maps model-pixel divider centroids to integer page coordinates, dropping
/// collisions so the result is strictly increasing.
fn to_page_coords(positions: &[f64], scale: f64, line_width: u32, limit: u32) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::with_capacity(positions.len());
    for &c in positions {
        // Model pixel k covers page [k·s, (k+1)·s); a line at page p has its
        // centre at p + lw/2.
        let p = ((c + 0.5) * scale - line_width as f64 / 2.0).round();
        let p = p.clamp(0.0, (limit - 1) as f64) as u32;
        if out.last().is_none_or(|&last| p > last) {
            out.push(p);
        }
    }
    out
}

/// Genotype read off a skeleton: first divider is the origin, gaps between
/// consecutive dividers are the sizes. Result is canonical.
pub fn initial_genotype(target: &SkeletonTarget, page: &PageSpec, thresholds: &Thresholds) -> Result<TableGenotype> {
    thresholds.validate()?;
    let img = &target.image;
    // Targets are square at model resolution; the padded page is scaled onto it.
    let scale = page.padded_side() as f64 / img.width() as f64;
    let axis_dividers = |axis: Axis, limit: u32| -> Result<Vec<u32>> {
        let found = detect_dividers(
            &profile_for_detection(img, axis, thresholds),
            thresholds.peak_threshold_frac,
            thresholds.min_gap_px,
        );
        let coords = to_page_coords(&found, scale, 1, limit);
        if coords.len() < 2 {
            return Err(Error::InsufficientStructure {
                axis,
                found: coords.len(),
            });
        }
        Ok(coords)
    };
    let xs = axis_dividers(Axis::X, page.width)?;
    let ys = axis_dividers(Axis::Y, page.height)?;
    let sizes = |ps: &[u32]| ps.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>();
    Ok(TableGenotype::new(xs[0], ys[0], sizes(&ys), sizes(&xs)))
}

/// Uniform Monte-Carlo starting population: `size` independent draws.
pub fn random_initial_population(
    config: &TableConfig,
    page: &PageSpec,
    size: usize,
    seed: u64,
) -> Result<Vec<TableGenotype>> {
    (0..size as u64)
        .map(|i| sample_genotype(config, page, derive_seed(seed, i)))
        .collect()
}
