//! Target skeletons for fitting, and the patch discriminator interface.
//!
//! A target comes from one of three places: the exact rendering of a known
//! genotype (`oracle`), that rendering corrupted by a seeded degradation
//! model (`degraded`), or a PNG produced by an external image-to-skeleton
//! model (`external`).

use std::fmt;
use std::path::{Path, PathBuf};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PageSpec, TableGenotype};
use crate::raster::{render_skeleton_model, resize, Canvas, RasterImage, RenderStyle};
use crate::rng::rng_from_seed;

/// Side of the discriminator's score grid.
pub const PATCH_GRID: usize = 30;
/// Receptive field of one patch score, in model pixels.
pub const PATCH_SIZE: usize = 70;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Oracle,
    Degraded,
    External,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonTarget {
    pub image: RasterImage,
    pub provenance: Provenance,
}

impl SkeletonTarget {
    pub fn new(image: RasterImage, provenance: Provenance, page: &PageSpec) -> Result<Self> {
        let r = page.model_resolution as usize;
        if image.dims() != (r, r) {
            return Err(Error::InvalidImage(format!(
                "target must be {r}x{r}, got {}x{}",
                image.width(),
                image.height()
            )));
        }
        Ok(SkeletonTarget { image, provenance })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DegradationParams {
    /// Maximum shift of each divider line, page pixels.
    pub divider_jitter_px: u32,
    /// Probability that one cell-boundary span of a line is erased.
    pub segment_dropout_prob: f64,
    /// Box blur radius, page pixels.
    pub blur_radius: u32,
    /// Per-page-pixel probability of inverting the intensity.
    pub speckle_prob: f64,
}

impl Default for DegradationParams {
    fn default() -> Self {
        DegradationParams {
            divider_jitter_px: 3,
            segment_dropout_prob: 0.1,
            blur_radius: 1,
            speckle_prob: 0.001,
        }
    }
}

impl DegradationParams {
    pub fn none() -> Self {
        DegradationParams {
            divider_jitter_px: 0,
            segment_dropout_prob: 0.0,
            blur_radius: 0,
            speckle_prob: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("segment_dropout_prob", self.segment_dropout_prob),
            ("speckle_prob", self.speckle_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Ideal skeleton: the genotype's skeleton rendered at model resolution.
pub fn oracle_skeleton(g: &TableGenotype, page: &PageSpec) -> SkeletonTarget {
    SkeletonTarget {
        image: render_skeleton_model(g, page, &RenderStyle::default()),
        provenance: Provenance::Oracle,
    }
}

/// Skeleton rendered with jittered, partially erased dividers, blurred and
/// speckled on the page raster, then resized to model resolution.
///
/// All distances are page pixels. All-zero parameters reproduce
/// `oracle_skeleton` pixel for pixel.
pub fn degraded_skeleton(
    g: &TableGenotype,
    page: &PageSpec,
    params: &DegradationParams,
    seed: u64,
) -> Result<SkeletonTarget> {
    params.validate()?;
    if *params == DegradationParams::none() {
        return Ok(SkeletonTarget {
            provenance: Provenance::Degraded,
            ..oracle_skeleton(g, page)
        });
    }
    let mut rng = rng_from_seed(seed);
    let style = RenderStyle::default();
    let mut canvas = Canvas::new(page);
    if g.effective_rows() > 0 && g.effective_cols() > 0 {
        let d = g.divider_positions();
        let lw = style.line_width as i64;
        let j = params.divider_jitter_px as i64;
        let mut shift = |n: usize| -> Vec<i64> {
            (0..n).map(|_| rng.random_range(-j..=j)).collect()
        };
        let dx = shift(d.x.len());
        let dy = shift(d.y.len());

        // Spans between consecutive perpendicular dividers; the last one
        // also covers the closing line's thickness.
        let spans = |ps: &[u32]| -> Vec<(i64, i64)> {
            ps.windows(2)
                .enumerate()
                .map(|(k, w)| {
                    let end = if k == ps.len() - 2 {
                        w[1] as i64 + lw
                    } else {
                        w[1] as i64
                    };
                    (w[0] as i64, end)
                })
                .collect()
        };
        let y_spans = spans(&d.y);
        let x_spans = spans(&d.x);

        for (k, &x) in d.x.iter().enumerate() {
            let x = x as i64 + dx[k];
            for &(a, b) in &y_spans {
                if !rng.random_bool(params.segment_dropout_prob) {
                    canvas.fill_rect(x, a, x + lw, b);
                }
            }
        }
        for (k, &y) in d.y.iter().enumerate() {
            let y = y as i64 + dy[k];
            for &(a, b) in &x_spans {
                if !rng.random_bool(params.segment_dropout_prob) {
                    canvas.fill_rect(a, y, b, y + lw);
                }
            }
        }
    }
    let mut image = canvas.into_image();
    if params.blur_radius > 0 {
        image = box_blur(&image, params.blur_radius as usize);
    }
    if params.speckle_prob > 0.0 {
        let (w, h) = image.dims();
        let px = image
            .pixels()
            .iter()
            .map(|&v| {
                if rng.random_bool(params.speckle_prob) {
                    1.0 - v
                } else {
                    v
                }
            })
            .collect();
        image = RasterImage::from_raw(w, h, px);
    }
    Ok(SkeletonTarget {
        image: resize(&image, page.model_resolution as usize),
        provenance: Provenance::Degraded,
    })
}

/// Separable mean filter over a `(2r+1)²` window, averaging only the
/// in-bounds pixels so a white border stays white.
pub fn box_blur(img: &RasterImage, radius: usize) -> RasterImage {
    let (w, h) = img.dims();
    let pass = |src: &[f64], len: usize, stride: usize, lines: usize, line_stride: usize| {
        let mut out = vec![0f64; src.len()];
        for l in 0..lines {
            let base = l * line_stride;
            let mut prefix = vec![0f64; len + 1];
            for i in 0..len {
                prefix[i + 1] = prefix[i] + src[base + i * stride];
            }
            for i in 0..len {
                let a = i.saturating_sub(radius);
                let b = (i + radius + 1).min(len);
                out[base + i * stride] = (prefix[b] - prefix[a]) / (b - a) as f64;
            }
        }
        out
    };
    let src: Vec<f64> = img.pixels().iter().map(|&v| v as f64).collect();
    let horiz = pass(&src, w, 1, h, w);
    let both = pass(&horiz, h, w, w, 1);
    RasterImage::from_raw(
        w,
        h,
        both.into_iter()
            .map(|v| v.clamp(0.0, 1.0) as f32)
            .collect(),
    )
}

/// Loads an externally produced skeleton PNG (8-bit grayscale), resampling
/// it to model resolution when needed.
pub fn load_external_skeleton(path: &Path, page: &PageSpec) -> Result<SkeletonTarget> {
    let img = RasterImage::load_png(path)?;
    let r = page.model_resolution as usize;
    let img = if img.dims() == (r, r) {
        img
    } else {
        resize(&img, r)
    };
    SkeletonTarget::new(img, Provenance::External, page)
}

/// Sample id of a skeleton file: `000042.skel.png` and `000042.png` both
/// map to `000042`.
pub fn skeleton_id(path: &Path) -> Option<String> {
    let name = path.file_name()?.to_str()?;
    let stem = name.strip_suffix(".png")?;
    Some(stem.strip_suffix(".skel").unwrap_or(stem).to_string())
}

/// Every `*.png` in `dir`, sorted by file name.
pub fn load_external_dir(dir: &Path, page: &PageSpec) -> Result<Vec<(String, SkeletonTarget)>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "png"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let id = skeleton_id(&p).expect("png path has a stem");
            load_external_skeleton(&p, page).map(|t| (id, t))
        })
        .collect()
}

/// Square grid of per-patch probabilities that a candidate is real.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreGrid {
    size: usize,
    values: Vec<f64>,
}

impl ScoreGrid {
    pub fn new(size: usize, values: Vec<f64>) -> Result<Self> {
        if size == 0 || values.len() != size * size {
            return Err(Error::Discriminator(format!(
                "{} scores do not form a {size}x{size} grid",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Discriminator(format!("score {v} outside [0, 1]")));
        }
        Ok(ScoreGrid { size, values })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.size + col]
    }

    /// Mean of `ln(max(score, eps))` over the grid.
    pub fn mean_log(&self, eps: f64) -> f64 {
        let floor = eps.ln();
        self.values
            .iter()
            .map(|&s| if s > eps { s.ln() } else { floor })
            .sum::<f64>()
            / self.values.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.values.chunks(self.size) {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses a `PATCH_GRID × PATCH_GRID` comma-separated grid.
    pub fn from_csv(text: &str, origin: &Path) -> Result<Self> {
        let fmt_err = |reason: String| Error::Format {
            path: origin.to_path_buf(),
            reason,
        };
        let mut values = Vec::with_capacity(PATCH_GRID * PATCH_GRID);
        let mut rows = 0;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            rows += 1;
            let before = values.len();
            for cell in line.split(',') {
                let v: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|_| fmt_err(format!("line {}: `{}` is not a number", ln + 1, cell)))?;
                values.push(v);
            }
            if values.len() - before != PATCH_GRID {
                return Err(fmt_err(format!(
                    "line {}: {} columns, expected {PATCH_GRID}",
                    ln + 1,
                    values.len() - before
                )));
            }
        }
        if rows != PATCH_GRID {
            return Err(fmt_err(format!("{rows} rows, expected {PATCH_GRID}")));
        }
        ScoreGrid::new(PATCH_GRID, values).map_err(|e| fmt_err(e.to_string()))
    }
}

/// Patch discriminator `D(x, u)`: per-patch probabilities that `candidate`
/// is a real skeleton for `input`. Implementations must be pure.
pub trait Discriminator: Send + Sync + fmt::Debug {
    fn scores(&self, input: &RasterImage, candidate: &RasterImage) -> Result<ScoreGrid>;
}

/// Scores each patch as one minus the mean absolute intensity difference
/// between `input` and `candidate` over the patch window.
#[derive(Debug, Clone, Copy)]
pub struct StubDiscriminator {
    pub grid: usize,
    pub patch: usize,
}

pub fn stub_discriminator() -> StubDiscriminator {
    StubDiscriminator {
        grid: PATCH_GRID,
        patch: PATCH_SIZE,
    }
}

/// Start offsets of `grid` windows of length `patch` spread evenly over `len`.
fn window_starts(len: usize, patch: usize, grid: usize) -> Vec<usize> {
    let span = len - patch;
    (0..grid)
        .map(|k| {
            if grid == 1 {
                0
            } else {
                ((k * span) as f64 / (grid - 1) as f64).round() as usize
            }
        })
        .collect()
}

impl Discriminator for StubDiscriminator {
    fn scores(&self, input: &RasterImage, candidate: &RasterImage) -> Result<ScoreGrid> {
        if input.dims() != candidate.dims() {
            return Err(Error::DimensionMismatch {
                left: input.dims(),
                right: candidate.dims(),
            });
        }
        let (w, h) = input.dims();
        let (pw, ph) = (self.patch.min(w), self.patch.min(h));

        // Summed-area table of |input - candidate|.
        let mut sat = vec![0f64; (w + 1) * (h + 1)];
        for y in 0..h {
            let (a, b) = (input.row(y), candidate.row(y));
            let mut run = 0.0;
            for x in 0..w {
                run += (a[x] - b[x]).abs() as f64;
                sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1] + run;
            }
        }
        let area = |x0: usize, y0: usize| {
            let (x1, y1) = (x0 + pw, y0 + ph);
            sat[y1 * (w + 1) + x1] - sat[y0 * (w + 1) + x1] - sat[y1 * (w + 1) + x0]
                + sat[y0 * (w + 1) + x0]
        };
        let xs = window_starts(w, pw, self.grid);
        let ys = window_starts(h, ph, self.grid);
        let n = (pw * ph) as f64;
        let mut values = Vec::with_capacity(self.grid * self.grid);
        for &y0 in &ys {
            for &x0 in &xs {
                values.push((1.0 - area(x0, y0) / n).clamp(0.0, 1.0));
            }
        }
        ScoreGrid::new(self.grid, values)
    }
}

/// FNV-1a over the dimensions and 8-bit quantized pixels.
pub fn image_fingerprint(img: &RasterImage) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |b: u8| {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    };
    for b in (img.width() as u32)
        .to_le_bytes()
        .into_iter()
        .chain((img.height() as u32).to_le_bytes())
    {
        eat(b);
    }
    for b in img.to_luma8() {
        eat(b);
    }
    format!("{h:016x}")
}

/// Externally computed score grids, one CSV per candidate, stored as
/// `<dir>/<image_fingerprint(candidate)>.csv`.
#[derive(Debug, Clone)]
pub struct PrecomputedScores {
    dir: PathBuf,
}

impl PrecomputedScores {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        if !dir.is_dir() {
            return Err(Error::io(
                &dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "scores directory not found"),
            ));
        }
        Ok(PrecomputedScores { dir })
    }

    pub fn path_for(&self, candidate: &RasterImage) -> PathBuf {
        self.dir.join(format!("{}.csv", image_fingerprint(candidate)))
    }
}

impl Discriminator for PrecomputedScores {
    fn scores(&self, _input: &RasterImage, candidate: &RasterImage) -> Result<ScoreGrid> {
        let path = self.path_for(candidate);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        ScoreGrid::from_csv(&text, &path)
    }
}
