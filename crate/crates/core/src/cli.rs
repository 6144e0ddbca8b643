//! `tablegene generate | fit | eval`.
//!
//! Every knob lives in [`RunConfig`], loadable from one JSON file
//! (`--run-config`); flags given on the command line override it. Each run
//! directory receives `run_config.json` (the resolved settings, minus the
//! output path) and `errors.json`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{
    generate_dataset, load_genotype, sample_id, sample_seed, DatasetManifest, DatasetOptions, Split,
};
use crate::error::Error;
use crate::eval::{aggregate, compare, format_table, histograms_to_csv, reports_to_csv, EvalReport};
use crate::ga::{evolve_observed, FitResult, GaParams};
use crate::io::{read_json, write_atomic, write_json};
use crate::model::{normalize_preset_name, sample_genotype, PageSpec, TableConfig, TableGenotype};
use crate::objectives::{candidate_phenotype, ObjectiveKind, ObjectiveSpec, DEFAULT_LAMBDA};
use crate::raster::{overlay_png, resize, RasterImage, RenderStyle};
use crate::rng::derive_seed;
use crate::skeleton::{
    degraded_skeleton, load_external_dir, oracle_skeleton, stub_discriminator, DegradationParams, Discriminator,
    PrecomputedScores, SkeletonTarget,
};
use crate::xyinit::{initial_genotype, random_initial_population, Thresholds};

pub const RUN_CONFIG_FILE: &str = "run_config.json";
pub const ERRORS_FILE: &str = "errors.json";
pub const FIT_SUFFIX: &str = ".fit.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    #[default]
    Oracle,
    Degraded,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Initial,
    Ga,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Initial => "initial",
            Stage::Ga => "ga",
        }
    }
}

/// All settings of all subcommands. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Preset names (or names from `presets`).
    pub configs: Vec<String>,
    pub count: usize,
    pub seed: u64,
    pub split: Split,
    /// JSON file of extra/overriding presets keyed by name.
    pub presets: Option<PathBuf>,
    pub page: PageSpec,
    pub style: RenderStyle,

    pub source: Source,
    /// Generated dataset to fit (ground truth and scans come from here).
    pub dataset: Option<PathBuf>,
    /// Directory of externally produced skeleton PNGs.
    pub skeletons: Option<PathBuf>,
    pub degradation: DegradationParams,
    pub thresholds: Thresholds,
    pub objective: ObjectiveKind,
    pub lambda: f64,
    /// Directory of precomputed 30×30 discriminator score CSVs.
    pub scores: Option<PathBuf>,
    pub ga: GaParams,
    pub no_ga: bool,
    pub overlays: bool,
    pub snapshots: bool,

    /// Fit run directories to evaluate.
    pub fits: Vec<PathBuf>,
    /// Dataset (or `<config>/<id>.genotype.json` tree) holding ground truth.
    pub truth: Option<PathBuf>,

    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            configs: Vec::new(),
            count: 100,
            seed: 0,
            split: Split::Train,
            presets: None,
            page: PageSpec::default(),
            style: RenderStyle::default(),
            source: Source::Oracle,
            dataset: None,
            skeletons: None,
            degradation: DegradationParams::default(),
            thresholds: Thresholds::default(),
            objective: ObjectiveKind::Nonoverlap,
            lambda: DEFAULT_LAMBDA,
            scores: None,
            ga: GaParams::default(),
            no_ga: false,
            overlays: false,
            snapshots: false,
            fits: Vec::new(),
            truth: None,
            jobs: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> crate::Result<Self> {
        read_json(path)
    }

    /// Table configs named in `configs`, defaulting to `base`.
    pub fn table_configs(&self) -> crate::Result<Vec<TableConfig>> {
        let extra = match &self.presets {
            Some(p) => TableConfig::load_presets(p)?,
            None => BTreeMap::new(),
        };
        let names = if self.configs.is_empty() {
            vec!["base".to_string()]
        } else {
            self.configs.clone()
        };
        names
            .iter()
            .map(|name| {
                let key = normalize_preset_name(name);
                extra
                    .get(&key)
                    .cloned()
                    .or_else(|| TableConfig::preset(&key))
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown table config `{name}`")))
            })
            .collect()
    }
}

#[derive(Debug, Parser)]
#[command(name = "tablegene", version, about = "Table structure recovery by genotype fitting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a dataset of scan/skeleton/genotype triples.
    Generate(GenerateArgs),
    /// Estimate genotypes from skeletons, optionally refined by the GA.
    Fit(FitArgs),
    /// Score fit results against ground truth.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub run_config: Option<PathBuf>,
    /// Output run directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Table config name; repeat for several.
    #[arg(long = "config")]
    pub configs: Vec<String>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub split: Option<Split>,
    /// JSON file of presets keyed by name.
    #[arg(long)]
    pub presets: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub sample: SampleArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub sample: SampleArgs,
    #[arg(long, value_enum)]
    pub source: Option<Source>,
    /// Dataset directory written by `generate`.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Directory of skeleton PNGs for `--source external`.
    #[arg(long)]
    pub skeletons: Option<PathBuf>,
    /// Stop after the projection estimate.
    #[arg(long)]
    pub no_ga: bool,
    #[arg(long)]
    pub objective: Option<ObjectiveKind>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Directory of precomputed discriminator score CSVs.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[arg(long)]
    pub jitter: Option<u32>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub blur: Option<u32>,
    #[arg(long)]
    pub speckle: Option<f64>,
    #[arg(long)]
    pub peak_frac: Option<f64>,
    #[arg(long)]
    pub min_gap: Option<f64>,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub ga_seed: Option<u64>,
    /// Write a target/estimate overlay PNG per sample.
    #[arg(long)]
    pub overlays: bool,
    /// Write an overlay PNG per GA epoch.
    #[arg(long)]
    pub snapshots: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Fit run directory; repeat to compare stages.
    #[arg(long = "fits")]
    pub fits: Vec<PathBuf>,
    /// Ground truth: dataset directory or `<config>/<id>.genotype.json` tree.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

fn base_config(common: &CommonArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.run_config {
        Some(p) => RunConfig::load(p).with_context(|| format!("loading run config {}", p.display()))?,
        None => RunConfig::default(),
    };
    if let Some(j) = common.jobs {
        cfg.jobs = j;
    }
    Ok(cfg)
}

fn apply_sample(cfg: &mut RunConfig, a: &SampleArgs) {
    if !a.configs.is_empty() {
        cfg.configs = a.configs.clone();
    }
    if let Some(v) = a.count {
        cfg.count = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.split {
        cfg.split = v;
    }
    if let Some(v) = &a.presets {
        cfg.presets = Some(v.clone());
    }
}

pub fn resolve_generate(a: &GenerateArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = base_config(&a.common)?;
    apply_sample(&mut cfg, &a.sample);
    Ok(cfg)
}

pub fn resolve_fit(a: &FitArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = base_config(&a.common)?;
    apply_sample(&mut cfg, &a.sample);
    macro_rules! set {
        ($field:expr, $flag:expr) => {
            if let Some(v) = $flag.clone() {
                $field = v;
            }
        };
    }
    set!(cfg.source, a.source);
    if a.dataset.is_some() {
        cfg.dataset = a.dataset.clone();
    }
    if a.skeletons.is_some() {
        cfg.skeletons = a.skeletons.clone();
    }
    if a.scores.is_some() {
        cfg.scores = a.scores.clone();
    }
    cfg.no_ga |= a.no_ga;
    cfg.overlays |= a.overlays;
    cfg.snapshots |= a.snapshots;
    set!(cfg.objective, a.objective);
    set!(cfg.lambda, a.lambda);
    set!(cfg.degradation.divider_jitter_px, a.jitter);
    set!(cfg.degradation.segment_dropout_prob, a.dropout);
    set!(cfg.degradation.blur_radius, a.blur);
    set!(cfg.degradation.speckle_prob, a.speckle);
    set!(cfg.thresholds.peak_threshold_frac, a.peak_frac);
    set!(cfg.thresholds.min_gap_px, a.min_gap);
    set!(cfg.ga.population_size, a.population);
    set!(cfg.ga.max_epochs, a.max_epochs);
    set!(cfg.ga.seed, a.ga_seed);
    Ok(cfg)
}

pub fn resolve_eval(a: &EvalArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = base_config(&a.common)?;
    if !a.fits.is_empty() {
        cfg.fits = a.fits.clone();
    }
    if a.truth.is_some() {
        cfg.truth = a.truth.clone();
    }
    Ok(cfg)
}

/// A sample-level failure, collected into `errors.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleError {
    pub config: String,
    pub id: String,
    pub error: String,
}

fn pool(jobs: usize) -> anyhow::Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("building worker pool")
}

fn start_run(out: &Path, cfg: &RunConfig) -> anyhow::Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_json(&out.join(RUN_CONFIG_FILE), cfg)?;
    Ok(())
}

pub fn cmd_generate(cfg: &RunConfig, out: &Path) -> anyhow::Result<DatasetManifest> {
    let configs = cfg.table_configs()?;
    start_run(out, cfg)?;
    let opts = DatasetOptions {
        seed: cfg.seed,
        split: cfg.split,
        page: cfg.page,
        style: cfg.style.clone(),
    };
    let requests: Vec<(TableConfig, usize)> = configs.into_iter().map(|c| (c, cfg.count)).collect();
    let manifest = pool(cfg.jobs)?.install(|| generate_dataset(&requests, out, &opts))?;
    write_json(&out.join(ERRORS_FILE), &Vec::<SampleError>::new())?;
    Ok(manifest)
}

/// Per-sample output of `fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub id: String,
    pub config: String,
    pub stage: Stage,
    pub source: Source,
    /// Seed of the sample (genotype, degradation and GA seeds derive from it).
    pub seed: u64,
    /// `projection`, or `random` when the projection found too little structure.
    pub initialization: String,
    pub initial_genotype: Option<TableGenotype>,
    pub predicted: TableGenotype,
    pub truth: Option<TableGenotype>,
    pub fit: Option<FitResult>,
}

struct FitJob {
    config: TableConfig,
    id: String,
    seed: u64,
    truth: Option<TableGenotype>,
    scan: Option<RasterImage>,
    external: Option<SkeletonTarget>,
}

fn fit_jobs(cfg: &RunConfig) -> anyhow::Result<Vec<FitJob>> {
    let page = &cfg.page;
    if cfg.source == Source::External {
        let Some(dir) = &cfg.skeletons else {
            bail!("--source external requires --skeletons DIR");
        };
        if !dir.is_dir() {
            bail!("skeleton directory {} does not exist", dir.display());
        }
        // Optional ground truth by id from a dataset manifest.
        let manifest = match &cfg.dataset {
            Some(d) => Some(DatasetManifest::load(d)?),
            None => None,
        };
        let fallback = cfg.table_configs()?.remove(0);
        let mut jobs = Vec::new();
        for (i, (id, target)) in load_external_dir(dir, page)?.into_iter().enumerate() {
            let entry = manifest.as_ref().and_then(|m| m.samples.iter().find(|s| s.id == id));
            let (config, truth, seed) = match (entry, &manifest, &cfg.dataset) {
                (Some(e), Some(m), Some(root)) => {
                    let c = m
                        .configs
                        .iter()
                        .find(|c| c.name == e.config)
                        .map(|c| c.config.clone())
                        .unwrap_or_else(|| fallback.clone());
                    (c, Some(load_genotype(root, e)?), e.seed)
                }
                _ => (fallback.clone(), None, derive_seed(cfg.seed, i as u64)),
            };
            jobs.push(FitJob {
                config,
                id,
                seed,
                truth,
                scan: None,
                external: Some(target),
            });
        }
        return Ok(jobs);
    }

    if let Some(root) = &cfg.dataset {
        if !root.is_dir() {
            bail!("dataset directory {} does not exist", root.display());
        }
        let manifest = DatasetManifest::load(root)?;
        let wants_scan = cfg.objective.needs_discriminator();
        return manifest
            .samples
            .iter()
            .map(|e| {
                let config = manifest
                    .configs
                    .iter()
                    .find(|c| c.name == e.config)
                    .map(|c| c.config.clone())
                    .ok_or_else(|| anyhow::anyhow!("manifest lacks config {}", e.config))?;
                let scan = if wants_scan {
                    let img = RasterImage::load_png(&root.join(&e.scan))?;
                    Some(resize(&img, page.model_resolution as usize))
                } else {
                    None
                };
                Ok(FitJob {
                    config,
                    id: e.id.clone(),
                    seed: e.seed,
                    truth: Some(load_genotype(root, e)?),
                    scan,
                    external: None,
                })
            })
            .collect();
    }

    let mut jobs = Vec::new();
    for config in cfg.table_configs()? {
        for i in 0..cfg.count {
            let seed = sample_seed(cfg.seed, cfg.split, &config.name, i);
            let truth = sample_genotype(&config, page, seed)?;
            jobs.push(FitJob {
                config: config.clone(),
                id: sample_id(cfg.split, i),
                seed,
                truth: Some(truth),
                scan: None,
                external: None,
            });
        }
    }
    Ok(jobs)
}

fn discriminator(cfg: &RunConfig) -> anyhow::Result<Option<Arc<dyn Discriminator>>> {
    if !cfg.objective.needs_discriminator() {
        return Ok(None);
    }
    Ok(Some(match &cfg.scores {
        Some(dir) => Arc::new(PrecomputedScores::new(dir)?),
        None => Arc::new(stub_discriminator()),
    }))
}

fn fit_one(cfg: &RunConfig, spec: &ObjectiveSpec, job: &FitJob, out: &Path) -> crate::Result<FitRecord> {
    let page = &cfg.page;
    let target = match (&job.external, cfg.source) {
        (Some(t), _) => t.clone(),
        (None, Source::Degraded) => {
            let truth = job.truth.as_ref().expect("generated jobs carry truth");
            degraded_skeleton(truth, page, &cfg.degradation, derive_seed(job.seed, 2))?
        }
        (None, _) => oracle_skeleton(job.truth.as_ref().expect("generated jobs carry truth"), page),
    };
    let stem = out.join(&job.config.name).join(&job.id);
    let with_suffix = |s: &str| {
        let mut p = stem.clone().into_os_string();
        p.push(s);
        PathBuf::from(p)
    };

    let estimate = initial_genotype(&target, page, &cfg.thresholds);
    let record = if cfg.no_ga {
        let g = estimate?;
        FitRecord {
            id: job.id.clone(),
            config: job.config.name.clone(),
            stage: Stage::Initial,
            source: cfg.source,
            seed: job.seed,
            initialization: "projection".into(),
            initial_genotype: Some(g.clone()),
            predicted: g,
            truth: job.truth.clone(),
            fit: None,
        }
    } else {
        let (init, initialization) = match estimate {
            Ok(g) => (vec![g], "projection"),
            Err(Error::InsufficientStructure { .. }) => (
                random_initial_population(&job.config, page, cfg.ga.population_size, derive_seed(job.seed, 3))?,
                "random",
            ),
            Err(e) => return Err(e),
        };
        let params = GaParams {
            seed: derive_seed(cfg.ga.seed, job.seed),
            ..cfg.ga.clone()
        };
        let mut snapshot_err = None;
        let result = evolve_observed(&target, job.scan.as_ref(), spec, &init, page, &params, |view| {
            if cfg.snapshots && snapshot_err.is_none() {
                let u = candidate_phenotype(&view.population[view.best], page);
                let path = with_suffix(&format!(".epoch-{:03}.png", view.epoch));
                if let Err(e) = overlay_png(&target.image, &u, &path) {
                    snapshot_err = Some(e);
                }
            }
        })?;
        if let Some(e) = snapshot_err {
            return Err(e);
        }
        FitRecord {
            id: job.id.clone(),
            config: job.config.name.clone(),
            stage: Stage::Ga,
            source: cfg.source,
            seed: job.seed,
            initialization: initialization.into(),
            initial_genotype: (initialization == "projection").then(|| init[0].clone()),
            predicted: result.best_genotype.clone(),
            truth: job.truth.clone(),
            fit: Some(result),
        }
    };
    if cfg.overlays {
        overlay_png(
            &target.image,
            &candidate_phenotype(&record.predicted, page),
            &with_suffix(".overlay.png"),
        )?;
    }
    write_json(&with_suffix(FIT_SUFFIX), &record)?;
    Ok(record)
}

/// Result of a `fit` run: successful records and per-sample failures.
#[derive(Debug, Default)]
pub struct FitRun {
    pub records: Vec<FitRecord>,
    pub errors: Vec<SampleError>,
}

pub fn cmd_fit(cfg: &RunConfig, out: &Path) -> anyhow::Result<FitRun> {
    cfg.thresholds.validate()?;
    cfg.ga.validate()?;
    cfg.degradation.validate()?;
    let mut spec = ObjectiveSpec::new(cfg.objective).with_lambda(cfg.lambda);
    if let Some(d) = discriminator(cfg)? {
        spec = spec.with_discriminator(d);
    }
    spec.validate()?;
    let jobs = fit_jobs(cfg)?;
    start_run(out, cfg)?;

    let outcomes: Vec<Result<FitRecord, SampleError>> = pool(cfg.jobs)?.install(|| {
        jobs.par_iter()
            .map(|job| {
                fit_one(cfg, &spec, job, out).map_err(|e| SampleError {
                    config: job.config.name.clone(),
                    id: job.id.clone(),
                    error: e.to_string(),
                })
            })
            .collect()
    });
    let mut run = FitRun::default();
    for o in outcomes {
        match o {
            Ok(r) => run.records.push(r),
            Err(e) => run.errors.push(e),
        }
    }
    write_json(&out.join(ERRORS_FILE), &run.errors)?;
    Ok(run)
}

/// All `*.fit.json` files under `dir`, sorted by path.
pub fn find_fit_records(dir: &Path) -> crate::Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| Error::io(&d, e))? {
            let path = entry.map_err(|e| Error::io(&d, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.to_string_lossy().ends_with(FIT_SUFFIX) {
                found.push(path);
            }
        }
    }
    found.sort();
    Ok(found)
}

fn truth_for(root: &Path, record: &FitRecord) -> crate::Result<Option<TableGenotype>> {
    let path = root.join(&record.config).join(format!("{}.genotype.json", record.id));
    if !path.is_file() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    TableGenotype::from_json(&text).map(Some)
}

#[derive(Debug, Default)]
pub struct EvalRun {
    pub reports: Vec<EvalReport>,
    /// Records without ground truth; excluded from the reports.
    pub unmatched: Vec<SampleError>,
}

pub fn cmd_eval(cfg: &RunConfig, out: &Path) -> anyhow::Result<EvalRun> {
    if cfg.fits.is_empty() {
        bail!("eval needs at least one --fits directory");
    }
    for d in cfg.fits.iter().chain(cfg.truth.iter()) {
        if !d.is_dir() {
            bail!("directory {} does not exist", d.display());
        }
    }
    start_run(out, cfg)?;

    // (config, stage) -> errors; configs keep first-seen order.
    let mut order: Vec<(String, Stage)> = Vec::new();
    let mut groups: BTreeMap<(String, &'static str), Vec<_>> = BTreeMap::new();
    let mut run = EvalRun::default();
    for dir in &cfg.fits {
        for path in find_fit_records(dir)? {
            let record: FitRecord = read_json(&path)?;
            let truth = match &cfg.truth {
                Some(root) => truth_for(root, &record)?,
                None => record.truth.clone(),
            };
            let Some(truth) = truth else {
                eprintln!("warning: no ground truth for {}/{}; excluded", record.config, record.id);
                run.unmatched.push(SampleError {
                    config: record.config.clone(),
                    id: record.id.clone(),
                    error: "no matching ground-truth genotype".into(),
                });
                continue;
            };
            let key = (record.config.clone(), record.stage);
            if !order.contains(&key) {
                order.push(key);
            }
            groups
                .entry((record.config.clone(), record.stage.as_str()))
                .or_default()
                .push(compare(&truth, &record.predicted));
        }
    }
    if groups.is_empty() {
        bail!("no fit records with ground truth found");
    }
    // Stable presentation: configs in the order the run config lists them,
    // unlisted ones after in first-seen order; initial before ga.
    let mut configs: Vec<String> = Vec::new();
    for (c, _) in &order {
        if !configs.contains(c) {
            configs.push(c.clone());
        }
    }
    let listed: Vec<String> = cfg.configs.iter().map(|c| normalize_preset_name(c)).collect();
    configs.sort_by_key(|c| listed.iter().position(|l| l == c).unwrap_or(listed.len()));
    for c in &configs {
        for stage in [Stage::Initial, Stage::Ga] {
            if let Some(errs) = groups.get(&(c.clone(), stage.as_str())) {
                run.reports.push(aggregate(c, stage.as_str(), errs)?);
            }
        }
    }

    write_json(&out.join("report.json"), &run.reports)?;
    write_atomic(&out.join("report.csv"), reports_to_csv(&run.reports).as_bytes())?;
    write_atomic(&out.join("histograms.csv"), histograms_to_csv(&run.reports).as_bytes())?;
    write_json(&out.join(ERRORS_FILE), &run.unmatched)?;
    Ok(run)
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Generate(a) => {
            let cfg = resolve_generate(&a)?;
            let m = cmd_generate(&cfg, &a.common.out)?;
            println!("wrote {} samples to {}", m.samples.len(), a.common.out.display());
            Ok(0)
        }
        Command::Fit(a) => {
            let cfg = resolve_fit(&a)?;
            let r = cmd_fit(&cfg, &a.common.out)?;
            println!(
                "fitted {} samples ({} failed) into {}",
                r.records.len(),
                r.errors.len(),
                a.common.out.display()
            );
            for e in &r.errors {
                eprintln!("error: {}/{}: {}", e.config, e.id, e.error);
            }
            Ok(if r.errors.is_empty() { 0 } else { 1 })
        }
        Command::Eval(a) => {
            let cfg = resolve_eval(&a)?;
            let r = cmd_eval(&cfg, &a.common.out)?;
            print!("{}", format_table(&r.reports));
            Ok(0)
        }
    }
}
