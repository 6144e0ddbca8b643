use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Alignment, PageSpec, TableConfig, TableGenotype};
use crate::raster::font::FontMetrics;
use crate::raster::image::{area_footprints, RasterImage};
use crate::rng::{rng_from_seed, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderStyle {
    pub line_width: u32,
    /// Probability that any one divider is drawn on a scan.
    pub separator_visibility_prob: f64,
    /// Glyph box height override; `None` uses the configuration's font size.
    pub glyph_height: Option<u32>,
    /// Gap between words; `None` uses one glyph advance.
    pub word_gap: Option<u32>,
    pub cell_padding: u32,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            line_width: 1,
            separator_visibility_prob: 0.5,
            glyph_height: None,
            word_gap: None,
            cell_padding: 2,
        }
    }
}

impl RenderStyle {
    pub fn validate(&self) -> Result<()> {
        if self.line_width == 0 {
            return Err(Error::InvalidConfig("line_width must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.separator_visibility_prob) {
            return Err(Error::InvalidConfig(format!(
                "separator_visibility_prob {} outside [0, 1]",
                self.separator_visibility_prob
            )));
        }
        Ok(())
    }
}

/// Binary page-sized canvas used by the renderers.
pub(crate) struct Canvas {
    width: usize,
    height: usize,
    ink: Vec<bool>,
}

impl Canvas {
    pub(crate) fn new(page: &PageSpec) -> Self {
        Canvas {
            width: page.width as usize,
            height: page.height as usize,
            ink: vec![false; page.width as usize * page.height as usize],
        }
    }

    /// Fills `[x0, x1) × [y0, y1)` clipped to the canvas.
    pub(crate) fn fill_rect(&mut self, x0: i64, y0: i64, x1: i64, y1: i64) {
        let xa = x0.clamp(0, self.width as i64) as usize;
        let xb = x1.clamp(0, self.width as i64) as usize;
        let ya = y0.clamp(0, self.height as i64) as usize;
        let yb = y1.clamp(0, self.height as i64) as usize;
        for y in ya..yb {
            self.ink[y * self.width + xa..y * self.width + xb].fill(true);
        }
    }

    fn set(&mut self, x: usize, y: usize) {
        if x < self.width && y < self.height {
            self.ink[y * self.width + x] = true;
        }
    }

    pub(crate) fn into_image(self) -> RasterImage {
        let px = self
            .ink
            .into_iter()
            .map(|b| if b { 0.0 } else { 1.0 })
            .collect();
        RasterImage::from_raw(self.width, self.height, px)
    }
}

fn has_cells(g: &TableGenotype) -> bool {
    g.effective_rows() > 0 && g.effective_cols() > 0
}

fn draw_vertical(c: &mut Canvas, x: u32, ys: &[u32], lw: u32) {
    let (top, bottom) = (ys[0] as i64, *ys.last().unwrap() as i64 + lw as i64);
    c.fill_rect(x as i64, top, x as i64 + lw as i64, bottom);
}

fn draw_horizontal(c: &mut Canvas, y: u32, xs: &[u32], lw: u32) {
    let (left, right) = (xs[0] as i64, *xs.last().unwrap() as i64 + lw as i64);
    c.fill_rect(left, y as i64, right, y as i64 + lw as i64);
}

/// All dividers, no text, at page resolution. Each divider at `p` inks
/// `[p, p + line_width)` across the table's bounding box.
pub fn render_skeleton(g: &TableGenotype, page: &PageSpec, style: &RenderStyle) -> RasterImage {
    let mut canvas = Canvas::new(page);
    if has_cells(g) {
        let d = g.divider_positions();
        for &x in &d.x {
            draw_vertical(&mut canvas, x, &d.y, style.line_width);
        }
        for &y in &d.y {
            draw_horizontal(&mut canvas, y, &d.x, style.line_width);
        }
    }
    canvas.into_image()
}

/// Ink mask of a set of half-open intervals on `[0, len)`.
fn interval_mask(len: usize, limit: usize, intervals: impl IntoIterator<Item = (u64, u64)>) -> Vec<f64> {
    let mut mask = vec![0.0; len];
    for (a, b) in intervals {
        let a = (a as usize).min(limit);
        let b = (b as usize).min(limit);
        for m in &mut mask[a..b] {
            *m = 1.0;
        }
    }
    mask
}

fn coverage(mask: &[f64], target: usize) -> Vec<f64> {
    area_footprints(mask.len(), target)
        .into_iter()
        .map(|f| {
            f.weights
                .iter()
                .enumerate()
                .map(|(k, w)| w * mask[f.start + k])
                .sum()
        })
        .collect()
}

/// `resize(render_skeleton(g), model_resolution)` computed in closed form.
///
/// The skeleton's ink is `(Xc × Ys) ∪ (Xs × Yc)` with `Xc ⊂ Xs`, `Yc ⊂ Ys`
/// (line columns/rows inside the table span), so its indicator is
/// `Xc·Ys + Xs·Yc − Xc·Yc`. Every term is separable, and area averaging of a
/// separable product is the product of the 1-D averages.
pub fn render_skeleton_model(g: &TableGenotype, page: &PageSpec, style: &RenderStyle) -> RasterImage {
    let t = page.model_resolution as usize;
    if !has_cells(g) {
        return RasterImage::white(t, t);
    }
    let side = page.padded_side() as usize;
    let lw = style.line_width as u64;
    let d = g.divider_positions();
    let (w, h) = (page.width as usize, page.height as usize);

    let lines = |ps: &[u32]| ps.iter().map(|&p| (p as u64, p as u64 + lw)).collect::<Vec<_>>();
    let span = |ps: &[u32]| [(ps[0] as u64, *ps.last().unwrap() as u64 + lw)];

    let cx_lines = coverage(&interval_mask(side, w, lines(&d.x)), t);
    let cx_span = coverage(&interval_mask(side, w, span(&d.x)), t);
    let cy_lines = coverage(&interval_mask(side, h, lines(&d.y)), t);
    let cy_span = coverage(&interval_mask(side, h, span(&d.y)), t);

    let mut px = Vec::with_capacity(t * t);
    for j in 0..t {
        let (ys, yc) = (cy_span[j], cy_lines[j]);
        for i in 0..t {
            let ink = cx_lines[i] * ys + cx_span[i] * yc - cx_lines[i] * yc;
            px.push((1.0 - ink).clamp(0.0, 1.0) as f32);
        }
    }
    RasterImage::from_raw(t, t, px)
}

fn random_word(rng: &mut Rng, len: usize) -> String {
    (0..len)
        .map(|_| (b'a' + rng.random_range(0..26u8)) as char)
        .collect()
}

struct CellBox {
    x: usize,
    y: usize,
    w: usize,
    h: usize,
}

fn draw_cell_text(
    canvas: &mut Canvas,
    cell: &CellBox,
    words: &[String],
    font: &FontMetrics,
    word_gap: usize,
    padding: usize,
    alignment: Alignment,
) {
    if words.is_empty() {
        return;
    }
    let avail_w = cell.w.saturating_sub(2 * padding);
    let avail_h = cell.h.saturating_sub(2 * padding);
    if font.glyph_width > avail_w || font.glyph_height > avail_h {
        return;
    }

    // Greedy wrap; an over-long word gets its own line and is clipped.
    let mut lines: Vec<(Vec<&str>, usize)> = Vec::new();
    for word in words {
        let ww = font.word_width(word.len());
        match lines.last_mut() {
            Some((line, width)) if *width + word_gap + ww <= avail_w => {
                line.push(word);
                *width += word_gap + ww;
            }
            _ => lines.push((vec![word], ww)),
        }
    }

    let block_h = lines.len() * font.line_height - (font.line_height - font.glyph_height);
    let top = cell.y + padding + avail_h.saturating_sub(block_h) / 2;
    let (clip_x1, clip_y1) = (cell.x + cell.w, cell.y + cell.h);

    for (li, (line, width)) in lines.iter().enumerate() {
        let slack = avail_w.saturating_sub(*width);
        let mut x = cell.x
            + padding
            + match alignment {
                Alignment::Left => 0,
                Alignment::Center => slack / 2,
                Alignment::Right => slack,
            };
        let y = top + li * font.line_height;
        for word in line {
            for ch in word.chars() {
                font.for_each_ink(ch, |dx, dy| {
                    let (px, py) = (x + dx, y + dy);
                    if px >= cell.x && px < clip_x1 && py >= cell.y && py < clip_y1 {
                        canvas.set(px, py);
                    }
                });
                x += font.advance();
            }
            x = x - font.letter_spacing + word_gap;
        }
    }
}

/// Scan image: random lowercase words in every cell and each divider drawn
/// independently with `separator_visibility_prob`.
///
/// Random draws happen in a fixed order (vertical dividers, horizontal
/// dividers, then cells row by row) so the same seed always yields the same
/// bytes.
pub fn render_scan(
    g: &TableGenotype,
    config: &TableConfig,
    page: &PageSpec,
    style: &RenderStyle,
    seed: u64,
) -> RasterImage {
    let mut rng = rng_from_seed(seed);
    let mut canvas = Canvas::new(page);
    if !has_cells(g) {
        return canvas.into_image();
    }
    let d = g.divider_positions();
    let lw = style.line_width;
    let p = style.separator_visibility_prob;

    for &x in &d.x {
        if rng.random_bool(p) {
            draw_vertical(&mut canvas, x, &d.y, lw);
        }
    }
    for &y in &d.y {
        if rng.random_bool(p) {
            draw_horizontal(&mut canvas, y, &d.x, lw);
        }
    }

    let size = style.glyph_height.unwrap_or(config.font_size);
    let font = FontMetrics::new(size, config.font_family);
    let gap = style.word_gap.map(|g| g as usize).unwrap_or(font.advance());

    for r in 0..d.y.len() - 1 {
        for c in 0..d.x.len() - 1 {
            let n_words = config.words_per_cell.sample(&mut rng) as usize;
            let words: Vec<String> = (0..n_words)
                .map(|_| {
                    let len = config.word_len.sample(&mut rng) as usize;
                    random_word(&mut rng, len)
                })
                .collect();
            let x = (d.x[c] + lw) as usize;
            let y = (d.y[r] + lw) as usize;
            let cell = CellBox {
                x,
                y,
                w: (d.x[c + 1] as usize).saturating_sub(x),
                h: (d.y[r + 1] as usize).saturating_sub(y),
            };
            draw_cell_text(
                &mut canvas,
                &cell,
                &words,
                &font,
                gap,
                style.cell_padding as usize,
                config.alignment,
            );
        }
    }
    canvas.into_image()
}
