use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng as _;
use tablegene::ga::{mutate, GaParams};
use tablegene::model::sample_genotype;
use tablegene::objectives::{
    candidate_phenotype, obj_discriminator, obj_l1, obj_nonoverlap, obj_weighted, ObjectiveKind, ObjectiveSpec,
};
use tablegene::raster::{render_skeleton, resize};
use tablegene::rng::rng_from_seed;
use tablegene::skeleton::{stub_discriminator, Discriminator, ScoreGrid};
use tablegene::{Error, PageSpec, RasterImage, RenderStyle, TableConfig, TableGenotype};

fn page() -> PageSpec {
    PageSpec::default()
}

fn bits(mask: u16) -> RasterImage {
    let px = (0..16).map(|i| if mask >> i & 1 == 1 { 0.0 } else { 1.0 }).collect();
    RasterImage::from_pixels(4, 4, px).unwrap()
}

fn nonoverlap_oracle(g: &[f32], u: &[f32]) -> f64 {
    let diff: f64 = g.iter().zip(u).map(|(a, b)| (a - b).abs() as f64).sum();
    let ink_g: f64 = g.iter().map(|&v| 1.0 - v as f64).sum();
    let ink_u: f64 = u.iter().map(|&v| 1.0 - v as f64).sum();
    if ink_g == 0.0 || ink_u == 0.0 {
        1.0
    } else {
        diff / (ink_g * ink_u)
    }
}

#[test]
fn nonoverlap_zero_only_on_identical_nonblank_4x4() {
    // Every 4×4 binary image against itself and against each one-pixel edit.
    for a in 0..=u16::MAX {
        let ia = bits(a);
        let same = obj_nonoverlap(&ia, &ia).unwrap();
        assert_eq!(same, if a == 0 { 1.0 } else { 0.0 }, "mask {a:#06x}");
        for k in 0..16 {
            let b = a ^ (1 << k);
            let v = obj_nonoverlap(&ia, &bits(b)).unwrap();
            assert!(v > 0.0, "{a:#06x} vs {b:#06x}");
        }
    }
}

#[test]
fn nonoverlap_matches_oracle_on_every_overlap_composition() {
    // The value depends only on the counts (both, target only, candidate
    // only, neither); enumerate all of them for 16 pixels.
    let mut rng = rng_from_seed(7);
    let mut classes = 0;
    for both in 0..=16usize {
        for g_only in 0..=16 - both {
            for u_only in 0..=16 - both - g_only {
                let mut g = vec![1.0f32; 16];
                let mut u = vec![1.0f32; 16];
                for i in 0..both {
                    g[i] = 0.0;
                    u[i] = 0.0;
                }
                for i in both..both + g_only {
                    g[i] = 0.0;
                }
                for i in both + g_only..both + g_only + u_only {
                    u[i] = 0.0;
                }
                let mut perm: Vec<usize> = (0..16).collect();
                perm.shuffle(&mut rng);
                let g: Vec<f32> = perm.iter().map(|&i| g[i]).collect();
                let u: Vec<f32> = perm.iter().map(|&i| u[i]).collect();
                let v = obj_nonoverlap(
                    &RasterImage::from_pixels(4, 4, g.clone()).unwrap(),
                    &RasterImage::from_pixels(4, 4, u.clone()).unwrap(),
                )
                .unwrap();
                assert_eq!(v, nonoverlap_oracle(&g, &u));
                let identical_nonblank = g_only == 0 && u_only == 0 && both > 0;
                assert_eq!(v == 0.0, identical_nonblank, "({both}, {g_only}, {u_only})");
                classes += 1;
            }
        }
    }
    assert_eq!(classes, 969);
}

#[test]
fn l1_metric_axioms_on_random_triples() {
    let mut rng = rng_from_seed(11);
    let mut img = || {
        let px = (0..64).map(|_| rng.random::<f32>()).collect();
        RasterImage::from_pixels(8, 8, px).unwrap()
    };
    for _ in 0..1000 {
        let (a, b, c) = (img(), img(), img());
        let ab = obj_l1(&a, &b).unwrap();
        let oracle: f64 = a.pixels().iter().zip(b.pixels()).map(|(x, y)| (x - y).abs() as f64).sum();
        assert!((ab - oracle).abs() < 1e-9);
        assert_eq!(ab, obj_l1(&b, &a).unwrap());
        assert!(obj_l1(&a, &c).unwrap() <= ab + obj_l1(&b, &c).unwrap() + 1e-9);
    }
}

fn candidates(seed: u64) -> (RasterImage, Vec<RasterImage>) {
    let truth = sample_genotype(&TableConfig::base(), &page(), seed).unwrap();
    let params = GaParams {
        per_entry_mutation_prob: 0.3,
        ..GaParams::default()
    };
    let mut rng = rng_from_seed(seed);
    let target = candidate_phenotype(&truth, &page());
    let us = (0..30)
        .map(|_| candidate_phenotype(&mutate(&truth, &params, &page(), &mut rng), &page()))
        .collect();
    (target, us)
}

fn ranking(scores: &[f64], descending: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        let o = scores[a].total_cmp(&scores[b]);
        if descending {
            o.reverse()
        } else {
            o
        }
    });
    idx
}

#[test]
fn weighted_ranking_degenerates_at_extreme_lambda() {
    let stub = Arc::new(stub_discriminator());
    for seed in 0..5 {
        let (target, us) = candidates(seed);
        let l1: Vec<f64> = us.iter().map(|u| obj_l1(&target, u).unwrap()).collect();
        let d_spec = ObjectiveSpec::new(ObjectiveKind::DiscriminatorLogprob).with_discriminator(stub.clone());
        let d: Vec<f64> = us.iter().map(|u| obj_discriminator(&d_spec, &target, u).unwrap()).collect();

        let big = ObjectiveSpec::new(ObjectiveKind::Weighted)
            .with_lambda(1e9)
            .with_discriminator(stub.clone());
        let w: Vec<f64> = us.iter().map(|u| obj_weighted(&big, &target, &target, u).unwrap()).collect();
        // Ties in L1 may be broken by D; strict L1 order must be kept.
        let mut ordered = 0;
        for i in 0..us.len() {
            for j in 0..us.len() {
                if l1[i] < l1[j] {
                    assert!(w[i] > w[j], "{i} vs {j}");
                    ordered += 1;
                }
            }
        }
        assert!(ordered > 100);

        let zero = ObjectiveSpec::new(ObjectiveKind::Weighted)
            .with_lambda(0.0)
            .with_discriminator(stub.clone());
        let w0: Vec<f64> = us.iter().map(|u| obj_weighted(&zero, &target, &target, u).unwrap()).collect();
        assert_eq!(w0, d);
    }
}

#[test]
fn stub_discriminator_is_zero_at_perfect_match() {
    let spec = ObjectiveSpec::new(ObjectiveKind::DiscriminatorLogprob).with_discriminator(Arc::new(stub_discriminator()));
    let (target, us) = candidates(3);
    assert_eq!(obj_discriminator(&spec, &target, &target).unwrap(), 0.0);
    for u in us.iter().filter(|u| **u != target) {
        assert!(obj_discriminator(&spec, &target, u).unwrap() < 0.0);
    }
    // Identical inputs score 1 in every one of the 30×30 patches.
    let grid = stub_discriminator().scores(&target, &target).unwrap();
    assert_eq!(grid.size(), 30);
    assert!(grid.values().iter().all(|&v| v == 1.0));
}

#[test]
fn discriminator_objective_floors_zero_scores() {
    let grid = ScoreGrid::new(2, vec![0.0, 1.0, 1.0, 1.0]).unwrap();
    assert!((grid.mean_log(1e-12) - (1e-12f64).ln() / 4.0).abs() < 1e-12);
    assert!(ScoreGrid::new(2, vec![1.0; 3]).is_err());
    assert!(ScoreGrid::new(1, vec![1.5]).is_err());
}

#[test]
fn discriminator_objectives_need_a_discriminator() {
    let t = RasterImage::white(4, 4);
    for kind in [ObjectiveKind::DiscriminatorLogprob, ObjectiveKind::Weighted] {
        let spec = ObjectiveSpec::new(kind);
        assert!(matches!(spec.evaluate(&t, &t, &t), Err(Error::MissingDiscriminator(_))));
    }
    assert!(matches!(
        obj_l1(&t, &RasterImage::white(4, 5)),
        Err(Error::DimensionMismatch { .. })
    ));
}

// Page skeleton drawn directly from the divider definition.
fn page_skeleton_oracle(g: &TableGenotype, page: &PageSpec) -> Vec<f32> {
    let d = g.divider_positions();
    let (w, h) = (page.width as usize, page.height as usize);
    let on = |ps: &[u32], v: usize| ps.iter().any(|&p| p as usize == v);
    let inside = |ps: &[u32], v: usize| v >= ps[0] as usize && v <= *ps.last().unwrap() as usize;
    let mut px = vec![1.0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            if (on(&d.x, x) && inside(&d.y, y)) || (on(&d.y, y) && inside(&d.x, x)) {
                px[y * w + x] = 0.0;
            }
        }
    }
    px
}

// Area average of the white-padded square page onto a `t × t` grid.
fn downsample_oracle(px: &[f32], w: usize, h: usize, t: usize) -> Vec<f64> {
    let side = w.max(h);
    let s = side as f64 / t as f64;
    let weights = |i: usize| -> Vec<(usize, f64)> {
        let (lo, hi) = (i as f64 * s, (i + 1) as f64 * s);
        (lo.floor() as usize..(hi.ceil() as usize).min(side))
            .map(|k| (k, (hi.min(k as f64 + 1.0) - lo.max(k as f64)) / s))
            .filter(|&(_, f)| f > 0.0)
            .collect()
    };
    let mut out = vec![0.0; t * t];
    for j in 0..t {
        let wy = weights(j);
        for i in 0..t {
            let wx = weights(i);
            let mut acc = 0.0;
            for &(y, fy) in &wy {
                for &(x, fx) in &wx {
                    let v = if x < w && y < h { px[y * w + x] as f64 } else { 1.0 };
                    acc += fx * fy * v;
                }
            }
            out[j * t + i] = acc;
        }
    }
    out
}

#[test]
fn skeleton_rendering_matches_independent_oracle() {
    let page = page();
    let style = RenderStyle::default();
    for (name, seed) in [("base", 1), ("short-cells", 2), ("skinny-long-cells", 3)] {
        let g = sample_genotype(&TableConfig::preset(name).unwrap(), &page, seed).unwrap();
        let full = render_skeleton(&g, &page, &style);
        let expect = page_skeleton_oracle(&g, &page);
        assert_eq!(full.pixels(), &expect[..], "{name}");

        let model = candidate_phenotype(&g, &page);
        let down = downsample_oracle(&expect, 595, 842, 256);
        let worst = model
            .pixels()
            .iter()
            .zip(&down)
            .map(|(&a, &b)| (a as f64 - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-4, "{name}: {worst}");
        let via_resize = resize(&full, 256);
        let worst = model
            .pixels()
            .iter()
            .zip(via_resize.pixels())
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0, f32::max);
        assert!(worst < 1e-4, "{name}: {worst}");
    }
}
