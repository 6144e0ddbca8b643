//! Batch generation of (scan, skeleton, genotype) triples.
//!
//! Layout: `<out>/<config>/<id>.scan.png`, `<id>.skel.png`,
//! `<id>.genotype.json`, plus `<out>/manifest.json`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_json, write_atomic, write_json};
use crate::model::{sample_genotype, PageSpec, TableConfig, TableGenotype};
use crate::raster::{render_scan, render_skeleton, RasterImage, RenderStyle};
use crate::rng::derive_seed;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Train and test samples draw from disjoint per-sample seed index ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Train,
    Test,
}

impl Split {
    pub fn seed_offset(self) -> u64 {
        match self {
            Split::Train => 0,
            Split::Test => 1 << 32,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidConfig(format!("unknown split {other:?} (train|test)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEntry {
    pub name: String,
    pub count: usize,
    pub config: TableConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub id: String,
    pub config: String,
    pub seed: u64,
    /// Paths relative to the dataset root.
    pub scan: PathBuf,
    pub skeleton: PathBuf,
    pub genotype: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub split: Split,
    /// Start of this split's per-sample seed index range.
    pub seed_offset: u64,
    pub page: PageSpec,
    pub style: RenderStyle,
    pub configs: Vec<ConfigEntry>,
    pub samples: Vec<SampleEntry>,
}

impl DatasetManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        read_json(&dir.join(MANIFEST_FILE))
    }

    pub fn count_for(&self, config: &str) -> usize {
        self.samples.iter().filter(|s| s.config == config).count()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetOptions {
    pub seed: u64,
    pub split: Split,
    pub page: PageSpec,
    pub style: RenderStyle,
}

/// FNV-1a of the config name, so a config's samples do not depend on its
/// position in the request.
fn config_seed(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    derive_seed(seed, h)
}

/// Seed of sample `index` of `config` in `split`.
pub fn sample_seed(seed: u64, split: Split, config: &str, index: usize) -> u64 {
    derive_seed(config_seed(seed, config), split.seed_offset() + index as u64)
}

pub fn sample_id(split: Split, index: usize) -> String {
    format!("{}-{index:06}", split.as_str())
}

/// Genotype, scan and skeleton for one sample seed.
pub fn render_sample(
    config: &TableConfig,
    page: &PageSpec,
    style: &RenderStyle,
    seed: u64,
) -> Result<(TableGenotype, RasterImage, RasterImage)> {
    let g = sample_genotype(config, page, seed)?;
    let scan = render_scan(&g, config, page, style, derive_seed(seed, 1));
    let skel = render_skeleton(&g, page, style);
    Ok((g, scan, skel))
}

/// Every dark scan pixel lying on a divider line must also be dark in the
/// skeleton: the scan's visible separators are a subset of the skeleton's.
pub fn check_pair(g: &TableGenotype, scan: &RasterImage, skel: &RasterImage, style: &RenderStyle) -> Result<()> {
    if scan.dims() != skel.dims() {
        return Err(Error::DimensionMismatch {
            left: scan.dims(),
            right: skel.dims(),
        });
    }
    let d = g.divider_positions();
    let lw = style.line_width;
    let on_line = |ps: &[u32], v: usize| ps.iter().any(|&p| (p as usize..(p + lw) as usize).contains(&v));
    let (w, h) = scan.dims();
    for y in 0..h {
        let y_line = on_line(&d.y, y);
        for x in 0..w {
            if scan.get(x, y) < 0.5 && (y_line || on_line(&d.x, x)) && skel.get(x, y) >= 0.5 {
                return Err(Error::InvalidImage(format!(
                    "scan separator pixel ({x}, {y}) missing from skeleton"
                )));
            }
        }
    }
    Ok(())
}

/// Renders and writes every requested sample, then the manifest. Samples
/// are generated in parallel on the current rayon pool; output bytes do not
/// depend on scheduling.
pub fn generate_dataset(
    configs: &[(TableConfig, usize)],
    out_dir: &Path,
    opts: &DatasetOptions,
) -> Result<DatasetManifest> {
    opts.page.validate()?;
    opts.style.validate()?;
    for (config, _) in configs {
        config.validate()?;
    }

    let mut jobs = Vec::new();
    for (config, count) in configs {
        for i in 0..*count {
            jobs.push((config, i, sample_seed(opts.seed, opts.split, &config.name, i)));
        }
    }

    let samples = jobs
        .par_iter()
        .map(|&(config, i, seed)| -> Result<SampleEntry> {
            let (g, scan, skel) = render_sample(config, &opts.page, &opts.style, seed)?;
            if i == 0 {
                check_pair(&g, &scan, &skel, &opts.style)?;
            }
            let id = sample_id(opts.split, i);
            let rel = |suffix: &str| PathBuf::from(&config.name).join(format!("{id}.{suffix}"));
            let entry = SampleEntry {
                id: id.clone(),
                config: config.name.clone(),
                seed,
                scan: rel("scan.png"),
                skeleton: rel("skel.png"),
                genotype: rel("genotype.json"),
            };
            scan.save_png(&out_dir.join(&entry.scan))?;
            skel.save_png(&out_dir.join(&entry.skeleton))?;
            write_atomic(&out_dir.join(&entry.genotype), format!("{}\n", g.to_json()).as_bytes())?;
            Ok(entry)
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = DatasetManifest {
        seed: opts.seed,
        split: opts.split,
        seed_offset: opts.split.seed_offset(),
        page: opts.page,
        style: opts.style.clone(),
        configs: configs
            .iter()
            .map(|(c, n)| ConfigEntry {
                name: c.name.clone(),
                count: *n,
                config: c.clone(),
            })
            .collect(),
        samples,
    };
    write_json(&out_dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

/// Ground-truth genotype of a manifest sample.
pub fn load_genotype(root: &Path, entry: &SampleEntry) -> Result<TableGenotype> {
    let path = root.join(&entry.genotype);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    TableGenotype::from_json(&text)
}
