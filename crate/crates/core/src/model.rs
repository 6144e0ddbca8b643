//! Table genotype, generator configurations and random genotype sampling.
//!
//! A genotype is the latent description of a simple (merge-free) table: the
//! slot counts `n`/`m`, the upper-left corner and one height per row slot and
//! one width per column slot. Zero-sized slots are absent rows/columns, so a
//! genotype sampled with `n = 10` may describe a 3-row table.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};

/// Default number of row and column slots in a sampled genotype.
pub const DEFAULT_MAX_CARDINALITY: usize = 10;

/// Number of whole-axis redraws before a configuration is declared infeasible.
pub const FIT_RETRIES: usize = 100;

/// Inclusive integer interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub min: u32,
    pub max: u32,
}

impl IntRange {
    pub const fn new(min: u32, max: u32) -> Self {
        IntRange { min, max }
    }

    pub const fn single(v: u32) -> Self {
        IntRange { min: v, max: v }
    }

    pub fn is_valid(&self) -> bool {
        self.min <= self.max
    }

    pub fn contains(&self, v: u32) -> bool {
        (self.min..=self.max).contains(&v)
    }

    pub fn sample(&self, rng: &mut Rng) -> u32 {
        rng.random_range(self.min..=self.max)
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.min == self.max {
            write!(f, "{}", self.min)
        } else {
            write!(f, "{}-{}", self.min, self.max)
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    Left,
    #[default]
    Center,
    Right,
}

/// Typeface stand-ins. The bitmap font has one glyph set; families differ in
/// glyph width, letter spacing and stroke weight.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FontFamily {
    /// Arial-like proportions.
    #[default]
    Sans,
    /// Times-like: narrower glyphs, tighter spacing, heavier strokes.
    Serif,
    /// Courier-like: wide fixed advance.
    Mono,
}

/// Parameter ranges of the random table generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    pub name: String,
    pub rows: IntRange,
    pub cols: IntRange,
    pub x_offset: IntRange,
    pub y_offset: IntRange,
    pub row_height: IntRange,
    pub col_width: IntRange,
    pub word_len: IntRange,
    pub words_per_cell: IntRange,
    #[serde(default)]
    pub font_family: FontFamily,
    pub font_size: u32,
    #[serde(default)]
    pub alignment: Alignment,
}

/// Names of the built-in presets, in table order.
pub const PRESET_NAMES: [&str; 10] = [
    "base",
    "font-1",
    "font-2",
    "larger-font-1",
    "larger-font-2",
    "smaller-font",
    "skinny-long-cells",
    "short-cells",
    "align-left",
    "align-right",
];

/// Lower-cases and maps spaces/underscores to dashes, so "Larger font 2",
/// "larger_font_2" and "larger-font-2" all name the same preset.
pub fn normalize_preset_name(name: &str) -> String {
    name.trim()
        .to_ascii_lowercase()
        .chars()
        .map(|c| if c == ' ' || c == '_' { '-' } else { c })
        .collect()
}

impl TableConfig {
    pub fn base() -> Self {
        TableConfig {
            name: "base".into(),
            rows: IntRange::new(2, 6),
            cols: IntRange::new(2, 6),
            x_offset: IntRange::new(0, 70),
            y_offset: IntRange::new(0, 70),
            row_height: IntRange::new(40, 90),
            col_width: IntRange::new(70, 100),
            word_len: IntRange::new(5, 9),
            words_per_cell: IntRange::new(2, 4),
            font_family: FontFamily::Sans,
            font_size: 10,
            alignment: Alignment::Center,
        }
    }

    /// Built-in preset by (normalized) name.
    pub fn preset(name: &str) -> Option<Self> {
        let key = normalize_preset_name(name);
        let base = Self::base();
        let cfg = match key.as_str() {
            "base" => base,
            "font-1" => TableConfig {
                font_family: FontFamily::Serif,
                ..base
            },
            "font-2" => TableConfig {
                font_family: FontFamily::Mono,
                ..base
            },
            "larger-font-1" => TableConfig {
                font_size: 14,
                ..base
            },
            "larger-font-2" => TableConfig {
                font_size: 18,
                ..base
            },
            "smaller-font" => TableConfig {
                font_size: 6,
                ..base
            },
            "skinny-long-cells" => TableConfig {
                row_height: IntRange::single(20),
                col_width: IntRange::new(120, 200),
                words_per_cell: IntRange::new(3, 7),
                ..base
            },
            "short-cells" => TableConfig {
                rows: IntRange::new(4, 10),
                cols: IntRange::new(4, 10),
                row_height: IntRange::single(20),
                col_width: IntRange::new(40, 60),
                word_len: IntRange::new(1, 4),
                words_per_cell: IntRange::single(1),
                ..base
            },
            "align-left" => TableConfig {
                alignment: Alignment::Left,
                ..base
            },
            "align-right" => TableConfig {
                alignment: Alignment::Right,
                ..base
            },
            _ => return None,
        };
        Some(TableConfig { name: key, ..cfg })
    }

    pub fn presets() -> Vec<Self> {
        PRESET_NAMES
            .iter()
            .map(|n| Self::preset(n).expect("built-in preset"))
            .collect()
    }

    /// Loads a JSON object mapping preset names to configurations. The map key
    /// wins over any `name` field inside the entry.
    pub fn load_presets(path: &Path) -> Result<BTreeMap<String, TableConfig>> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: BTreeMap<String, TableConfig> =
            serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
        let mut out = BTreeMap::new();
        for (k, mut cfg) in raw {
            let key = normalize_preset_name(&k);
            cfg.name = key.clone();
            cfg.validate()?;
            out.insert(key, cfg);
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("rows", self.rows),
            ("cols", self.cols),
            ("x_offset", self.x_offset),
            ("y_offset", self.y_offset),
            ("row_height", self.row_height),
            ("col_width", self.col_width),
            ("word_len", self.word_len),
            ("words_per_cell", self.words_per_cell),
        ];
        for (field, r) in ranges {
            if !r.is_valid() {
                return Err(Error::InvalidConfig(format!(
                    "{}: range {field} has min {} > max {}",
                    self.name, r.min, r.max
                )));
            }
        }
        if self.rows.min == 0 || self.cols.min == 0 {
            return Err(Error::InvalidConfig(format!(
                "{}: a table needs at least one row and one column",
                self.name
            )));
        }
        if self.row_height.min == 0 || self.col_width.min == 0 {
            return Err(Error::InvalidConfig(format!(
                "{}: row heights and column widths must be positive",
                self.name
            )));
        }
        if self.font_size == 0 {
            return Err(Error::InvalidConfig(format!("{}: font_size is 0", self.name)));
        }
        Ok(())
    }
}

/// Page geometry: genotypes live in page pixels, models see a square
/// `model_resolution` image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageSpec {
    pub width: u32,
    pub height: u32,
    pub model_resolution: u32,
}

impl Default for PageSpec {
    fn default() -> Self {
        // A4 at 72 ppi.
        PageSpec {
            width: 595,
            height: 842,
            model_resolution: 256,
        }
    }
}

impl PageSpec {
    /// Side of the white-padded square the page is embedded in before scaling.
    pub fn padded_side(&self) -> u32 {
        self.width.max(self.height)
    }

    /// Page pixels per model pixel.
    pub fn model_scale(&self) -> f64 {
        self.padded_side() as f64 / self.model_resolution as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.model_resolution == 0 {
            return Err(Error::InvalidConfig("page dimensions must be positive".into()));
        }
        Ok(())
    }
}

/// Latent table structure in page pixels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GenotypeRepr", into = "GenotypeRepr")]
pub struct TableGenotype {
    max_rows: usize,
    max_cols: usize,
    origin_x: u32,
    origin_y: u32,
    row_heights: Vec<u32>,
    col_widths: Vec<u32>,
}

/// Flat wire form: `{n, m, x0, y0, row_heights, col_widths}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenotypeRepr {
    n: usize,
    m: usize,
    x0: u32,
    y0: u32,
    row_heights: Vec<u32>,
    col_widths: Vec<u32>,
}

impl TryFrom<GenotypeRepr> for TableGenotype {
    type Error = Error;

    fn try_from(r: GenotypeRepr) -> Result<Self> {
        if r.row_heights.len() != r.n {
            return Err(Error::InvalidGenotype(format!(
                "n = {} but {} row heights",
                r.n,
                r.row_heights.len()
            )));
        }
        if r.col_widths.len() != r.m {
            return Err(Error::InvalidGenotype(format!(
                "m = {} but {} column widths",
                r.m,
                r.col_widths.len()
            )));
        }
        Ok(TableGenotype::new(r.x0, r.y0, r.row_heights, r.col_widths))
    }
}

impl From<TableGenotype> for GenotypeRepr {
    fn from(g: TableGenotype) -> Self {
        GenotypeRepr {
            n: g.max_rows,
            m: g.max_cols,
            x0: g.origin_x,
            y0: g.origin_y,
            row_heights: g.row_heights,
            col_widths: g.col_widths,
        }
    }
}

/// Absolute divider coordinates of a genotype.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dividers {
    pub x: Vec<u32>,
    pub y: Vec<u32>,
}

impl TableGenotype {
    /// Slot counts are taken from the vector lengths.
    pub fn new(origin_x: u32, origin_y: u32, row_heights: Vec<u32>, col_widths: Vec<u32>) -> Self {
        TableGenotype {
            max_rows: row_heights.len(),
            max_cols: col_widths.len(),
            origin_x,
            origin_y,
            row_heights,
            col_widths,
        }
    }

    pub fn max_rows(&self) -> usize {
        self.max_rows
    }

    pub fn max_cols(&self) -> usize {
        self.max_cols
    }

    pub fn origin_x(&self) -> u32 {
        self.origin_x
    }

    pub fn origin_y(&self) -> u32 {
        self.origin_y
    }

    pub fn row_heights(&self) -> &[u32] {
        &self.row_heights
    }

    pub fn col_widths(&self) -> &[u32] {
        &self.col_widths
    }

    pub fn effective_rows(&self) -> usize {
        self.row_heights.iter().filter(|&&h| h > 0).count()
    }

    pub fn effective_cols(&self) -> usize {
        self.col_widths.iter().filter(|&&w| w > 0).count()
    }

    pub fn total_width(&self) -> u32 {
        self.col_widths.iter().sum()
    }

    pub fn total_height(&self) -> u32 {
        self.row_heights.iter().sum()
    }

    /// True when the closing divider on each axis lands on a page pixel,
    /// i.e. `x0 + Σw < width` and `y0 + Σh < height`.
    pub fn fits(&self, page: &PageSpec) -> bool {
        (self.origin_x as u64 + self.total_width() as u64) < page.width as u64
            && (self.origin_y as u64 + self.total_height() as u64) < page.height as u64
    }

    pub fn is_canonical(&self) -> bool {
        self.row_heights.iter().all(|&h| h > 0) && self.col_widths.iter().all(|&w| w > 0)
    }

    /// Strips zero-sized slots. Divider coordinates are unchanged.
    pub fn canonicalize(&self) -> TableGenotype {
        TableGenotype::new(
            self.origin_x,
            self.origin_y,
            self.row_heights.iter().copied().filter(|&h| h > 0).collect(),
            self.col_widths.iter().copied().filter(|&w| w > 0).collect(),
        )
    }

    /// Prefix sums over the positive slots, starting at the origin.
    pub fn divider_positions(&self) -> Dividers {
        Dividers {
            x: prefix_positions(self.origin_x, &self.col_widths),
            y: prefix_positions(self.origin_y, &self.row_heights),
        }
    }

    /// Same structure, every slot present.
    pub fn structurally_eq(&self, other: &TableGenotype) -> bool {
        self.canonicalize() == other.canonicalize()
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut u32, &mut u32, &mut Vec<u32>, &mut Vec<u32>) {
        (
            &mut self.origin_x,
            &mut self.origin_y,
            &mut self.row_heights,
            &mut self.col_widths,
        )
    }

    /// Re-syncs `n`/`m` with the slot vectors after in-place edits.
    pub(crate) fn sync_counts(&mut self) {
        self.max_rows = self.row_heights.len();
        self.max_cols = self.col_widths.len();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("genotype serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json("genotype", e))
    }
}

fn prefix_positions(origin: u32, sizes: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(sizes.len() + 1);
    let mut pos = origin;
    out.push(pos);
    for &s in sizes.iter().filter(|&&s| s > 0) {
        pos += s;
        out.push(pos);
    }
    out
}

/// Draws `(offset, sizes)` for one axis, redrawing the whole axis until the
/// closing divider lands on the page.
fn sample_axis(
    rng: &mut Rng,
    count: IntRange,
    size: IntRange,
    offset: IntRange,
    page_extent: u32,
    slots: usize,
    config: &str,
    axis: &str,
) -> Result<(u32, Vec<u32>)> {
    let min_extent = offset.min as u64 + count.min as u64 * size.min as u64;
    if min_extent >= page_extent as u64 {
        return Err(Error::Infeasible {
            config: config.to_string(),
            reason: format!(
                "smallest {axis} extent {min_extent} px does not fit the {page_extent} px page"
            ),
        });
    }
    if count.max as usize > slots {
        return Err(Error::Infeasible {
            config: config.to_string(),
            reason: format!("up to {} {axis} requested but only {slots} slots", count.max),
        });
    }
    for _ in 0..FIT_RETRIES {
        let k = count.sample(rng) as usize;
        let mut sizes = vec![0u32; slots];
        for s in sizes.iter_mut().take(k) {
            *s = size.sample(rng);
        }
        let off = offset.sample(rng);
        let extent: u64 = off as u64 + sizes.iter().map(|&s| s as u64).sum::<u64>();
        if extent < page_extent as u64 {
            return Ok((off, sizes));
        }
    }
    Err(Error::Infeasible {
        config: config.to_string(),
        reason: format!("no {axis} draw fit the page in {FIT_RETRIES} attempts"),
    })
}

/// Samples a genotype with `max(DEFAULT_MAX_CARDINALITY, range max)` slots per
/// axis. Columns are drawn before rows.
pub fn sample_genotype(config: &TableConfig, page: &PageSpec, seed: u64) -> Result<TableGenotype> {
    let mut rng = rng_from_seed(seed);
    sample_genotype_with(config, page, &mut rng)
}

pub fn sample_genotype_with(
    config: &TableConfig,
    page: &PageSpec,
    rng: &mut Rng,
) -> Result<TableGenotype> {
    config.validate()?;
    let n = DEFAULT_MAX_CARDINALITY.max(config.rows.max as usize);
    let m = DEFAULT_MAX_CARDINALITY.max(config.cols.max as usize);
    let (x0, widths) = sample_axis(
        rng,
        config.cols,
        config.col_width,
        config.x_offset,
        page.width,
        m,
        &config.name,
        "column",
    )?;
    let (y0, heights) = sample_axis(
        rng,
        config.rows,
        config.row_height,
        config.y_offset,
        page.height,
        n,
        &config.name,
        "row",
    )?;
    Ok(TableGenotype::new(x0, y0, heights, widths))
}
