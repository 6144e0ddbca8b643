//! Genetic refinement of a table genotype against a target skeleton.
//!
//! Each epoch keeps the fittest genotype unchanged, refills a `survival_rate`
//! share of the remaining slots with mutated rank-selected members, and fills
//! the rest with mutated crossover children of two rank-selected parents.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PageSpec, TableGenotype, DEFAULT_MAX_CARDINALITY};
use crate::objectives::{candidate_phenotype, ObjectiveSpec};
use crate::raster::RasterImage;
use crate::rng::{rng_from_seed, Rng};
use crate::skeleton::SkeletonTarget;

/// Denominator guard for the relative-improvement convergence test.
const REL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub population_size: usize,
    /// Share of the non-elite slots filled by mutated survivors; the rest
    /// are crossover offspring.
    pub survival_rate: f64,
    /// Probability of perturbing each of x0, y0, every row height and every
    /// column width.
    pub per_entry_mutation_prob: f64,
    /// Probability, per dimension, of one add/merge/remove operation.
    pub structural_mutation_prob: f64,
    pub convergence_epsilon: f64,
    pub convergence_window: usize,
    pub max_epochs: usize,
    /// Largest geometric perturbation, page pixels.
    pub geometry_mutation_step: u32,
    /// Cardinality cap for structural `add`.
    pub max_rows: usize,
    pub max_cols: usize,
    pub seed: u64,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population_size: 50,
            survival_rate: 0.7,
            per_entry_mutation_prob: 0.1,
            structural_mutation_prob: 0.1,
            convergence_epsilon: 0.01,
            convergence_window: 3,
            max_epochs: 200,
            geometry_mutation_step: 10,
            max_rows: DEFAULT_MAX_CARDINALITY,
            max_cols: DEFAULT_MAX_CARDINALITY,
            seed: 0,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.population_size == 0 {
            return bad("population_size must be at least 1".into());
        }
        if !(self.survival_rate > 0.0 && self.survival_rate < 1.0) {
            return bad(format!("survival_rate {} outside (0, 1)", self.survival_rate));
        }
        for (name, p) in [
            ("per_entry_mutation_prob", self.per_entry_mutation_prob),
            ("structural_mutation_prob", self.structural_mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} {p} outside [0, 1]"));
            }
        }
        if self.convergence_window == 0 {
            return bad("convergence_window must be at least 1".into());
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1".into());
        }
        if self.max_rows == 0 || self.max_cols == 0 {
            return bad("cardinality caps must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub best_genotype: TableGenotype,
    pub best_fitness: f64,
    pub best_objective: f64,
    /// Objective of the first initial genotype (the estimate being refined).
    pub seed_objective: f64,
    pub epochs_run: usize,
    pub per_epoch_best: Vec<f64>,
    pub per_epoch_objective: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructuralOp {
    Add,
    Merge,
    Remove,
}

/// Splits, merges or removes one slot of `sizes`. Returns false (and leaves
/// `sizes` untouched) when the operation would break an invariant.
pub fn apply_structural(sizes: &mut Vec<u32>, op: StructuralOp, cap: usize, rng: &mut Rng) -> bool {
    let n = sizes.len();
    match op {
        StructuralOp::Add => {
            if n >= cap {
                return false;
            }
            let splittable: Vec<usize> = (0..n).filter(|&i| sizes[i] >= 2).collect();
            if splittable.is_empty() {
                return false;
            }
            let j = splittable[rng.random_range(0..splittable.len())];
            let left = sizes[j] / 2;
            let right = sizes[j] - left;
            sizes[j] = left;
            sizes.insert(j + 1, right);
            true
        }
        StructuralOp::Merge => {
            if n < 2 {
                return false;
            }
            let j = rng.random_range(0..n - 1);
            sizes[j] += sizes[j + 1];
            sizes.remove(j + 1);
            true
        }
        StructuralOp::Remove => {
            if n < 2 {
                return false;
            }
            let j = rng.random_range(0..n);
            let neighbour = if j == 0 {
                1
            } else if j == n - 1 {
                n - 2
            } else if rng.random_bool(0.5) {
                j - 1
            } else {
                j + 1
            };
            sizes[neighbour] += sizes[j];
            sizes.remove(j);
            true
        }
    }
}

/// Moves the origin, then shrinks trailing sizes, until `origin + Σsizes < limit`.
fn fit_axis(origin: &mut u32, sizes: &mut Vec<u32>, limit: u32) {
    let extent = |o: u32, s: &[u32]| o as u64 + s.iter().map(|&v| v as u64).sum::<u64>();
    let max_end = limit.saturating_sub(1) as u64;
    let mut over = extent(*origin, sizes).saturating_sub(max_end);
    if over == 0 {
        return;
    }
    let shift = over.min(*origin as u64);
    *origin -= shift as u32;
    over -= shift;
    for s in sizes.iter_mut().rev() {
        if over == 0 {
            break;
        }
        let cut = over.min(*s as u64 - 1);
        *s -= cut as u32;
        over -= cut;
    }
    while over > 0 && sizes.len() > 1 {
        over = over.saturating_sub(sizes.pop().unwrap() as u64);
    }
}

pub fn fit_to_page(g: &mut TableGenotype, page: &PageSpec) {
    let (x0, y0, rows, cols) = g.parts_mut();
    fit_axis(x0, cols, page.width);
    fit_axis(y0, rows, page.height);
    g.sync_counts();
}

fn nonzero_step(rng: &mut Rng, step: u32) -> i64 {
    let s = step as i64;
    let d = rng.random_range(1..=s);
    if rng.random_bool(0.5) {
        d
    } else {
        -d
    }
}

/// Geometric and structural mutation of a canonical copy of `g`.
///
/// Every entry (x0, y0, each height, each width) is independently moved by a
/// non-zero uniform step in `[-step, step]` with `per_entry_mutation_prob`;
/// origins clamp at 0 and sizes at 1, so cardinality only changes through
/// the structural operations. Then, per dimension (rows, then columns), one
/// equiprobable add/merge/remove is applied with `structural_mutation_prob`.
pub fn mutate(g: &TableGenotype, params: &GaParams, page: &PageSpec, rng: &mut Rng) -> TableGenotype {
    let mut out = g.canonicalize();
    let p = params.per_entry_mutation_prob;
    let step = params.geometry_mutation_step;
    {
        let (x0, y0, rows, cols) = out.parts_mut();
        if step > 0 {
            for origin in [x0, y0] {
                if rng.random_bool(p) {
                    *origin = (*origin as i64 + nonzero_step(rng, step)).max(0) as u32;
                }
            }
            for v in rows.iter_mut().chain(cols.iter_mut()) {
                if rng.random_bool(p) {
                    *v = (*v as i64 + nonzero_step(rng, step)).max(1) as u32;
                }
            }
        }
        for (sizes, cap) in [(rows, params.max_rows), (cols, params.max_cols)] {
            if rng.random_bool(params.structural_mutation_prob) {
                let op = match rng.random_range(0..3) {
                    0 => StructuralOp::Add,
                    1 => StructuralOp::Merge,
                    _ => StructuralOp::Remove,
                };
                apply_structural(sizes, op, cap, rng);
            }
        }
    }
    out.sync_counts();
    fit_to_page(&mut out, page);
    out
}

/// Columns and x0 from `a`, rows and y0 from `b`.
pub fn crossover(a: &TableGenotype, b: &TableGenotype, page: &PageSpec) -> TableGenotype {
    let a = a.canonicalize();
    let b = b.canonicalize();
    let mut child = TableGenotype::new(
        a.origin_x(),
        b.origin_y(),
        b.row_heights().to_vec(),
        a.col_widths().to_vec(),
    );
    fit_to_page(&mut child, page);
    child
}

/// Snapshot handed to an observer after each epoch's evaluation.
pub struct EpochView<'a> {
    pub epoch: usize,
    pub population: &'a [TableGenotype],
    pub fitness: &'a [f64],
    pub best: usize,
}

pub fn evolve(
    target: &SkeletonTarget,
    scan: Option<&RasterImage>,
    spec: &ObjectiveSpec,
    init: &[TableGenotype],
    page: &PageSpec,
    params: &GaParams,
) -> Result<FitResult> {
    evolve_observed(target, scan, spec, init, page, params, |_| {})
}

/// `evolve` with a callback after every epoch's evaluation.
pub fn evolve_observed(
    target: &SkeletonTarget,
    scan: Option<&RasterImage>,
    spec: &ObjectiveSpec,
    init: &[TableGenotype],
    page: &PageSpec,
    params: &GaParams,
    mut observer: impl FnMut(&EpochView<'_>),
) -> Result<FitResult> {
    params.validate()?;
    spec.validate()?;
    if init.is_empty() {
        return Err(Error::Empty("initial population"));
    }
    let input = scan.unwrap_or(&target.image);
    let evaluate = |g: &TableGenotype| spec.evaluate(input, &target.image, &candidate_phenotype(g, page));

    let mut rng = rng_from_seed(params.seed);
    let n = params.population_size;
    let mut pop: Vec<TableGenotype> = init
        .iter()
        .take(n)
        .map(|g| {
            let mut g = g.canonicalize();
            fit_to_page(&mut g, page);
            g
        })
        .collect();
    let seeds = pop.len();
    let mut k = 0;
    while pop.len() < n {
        let child = mutate(&pop[k % seeds], params, page, &mut rng);
        pop.push(child);
        k += 1;
    }
    let seed_objective = evaluate(&pop[0])?;

    let non_elite = n - 1;
    let survivors = ((params.survival_rate * non_elite as f64).round() as usize).min(non_elite);
    let offspring = non_elite - survivors;
    // Rank weights: best gets n, worst gets 1.
    let rank_pick = WeightedIndex::new((0..n).map(|r| (n - r) as f64)).expect("positive weights");

    let mut per_epoch_best = Vec::new();
    let mut per_epoch_objective = Vec::new();
    let mut best_genotype = pop[0].clone();
    let mut converged = false;

    for epoch in 0..params.max_epochs {
        let scores: Vec<f64> = pop.par_iter().map(evaluate).collect::<Result<_>>()?;
        let fitness: Vec<f64> = scores.iter().map(|&s| spec.fitness(s)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
        let best = order[0];

        per_epoch_best.push(fitness[best]);
        per_epoch_objective.push(scores[best]);
        best_genotype = pop[best].clone();
        observer(&EpochView {
            epoch,
            population: &pop,
            fitness: &fitness,
            best,
        });

        if has_converged(&per_epoch_best, params) {
            converged = true;
            break;
        }
        if epoch + 1 == params.max_epochs {
            break;
        }

        let mut next = Vec::with_capacity(n);
        next.push(pop[best].clone());
        for _ in 0..survivors {
            let pick = order[rank_pick.sample(&mut rng)];
            next.push(mutate(&pop[pick], params, page, &mut rng));
        }
        for _ in 0..offspring {
            let a = order[rank_pick.sample(&mut rng)];
            let b = order[rank_pick.sample(&mut rng)];
            let child = crossover(&pop[a], &pop[b], page);
            next.push(mutate(&child, params, page, &mut rng));
        }
        pop = next;
    }

    Ok(FitResult {
        best_genotype,
        best_fitness: *per_epoch_best.last().expect("at least one epoch"),
        best_objective: *per_epoch_objective.last().expect("at least one epoch"),
        seed_objective,
        epochs_run: per_epoch_best.len(),
        per_epoch_best,
        per_epoch_objective,
        converged,
    })
}

/// True once each of the last `window` epoch-over-epoch relative
/// improvements of the best fitness is below `epsilon`.
pub fn has_converged(trace: &[f64], params: &GaParams) -> bool {
    let w = params.convergence_window;
    if trace.len() <= w {
        return false;
    }
    trace[trace.len() - w - 1..].windows(2).all(|p| {
        let rel = (p[1] - p[0]) / p[0].abs().max(REL_EPS);
        rel < params.convergence_epsilon
    })
}
