use std::sync::Arc;

use tablegene::eval::{aggregate, compare, format_table, histograms_to_csv, reports_to_csv};
use tablegene::ga::{evolve, evolve_observed, GaParams};
use tablegene::model::sample_genotype;
use tablegene::objectives::{candidate_phenotype, ObjectiveKind, ObjectiveSpec};
use tablegene::skeleton::{
    degraded_skeleton, image_fingerprint, load_external_dir, oracle_skeleton, DegradationParams, Discriminator,
    PrecomputedScores, ScoreGrid, PATCH_GRID,
};
use tablegene::xyinit::{initial_genotype, random_initial_population, Thresholds};
use tablegene::{Error, PageSpec, RasterImage, TableConfig, TableGenotype};

fn page() -> PageSpec {
    PageSpec::default()
}

#[test]
fn projection_recovers_counts_on_every_preset() {
    for name in tablegene::model::PRESET_NAMES {
        let cfg = TableConfig::preset(name).unwrap();
        for seed in 0..20 {
            let g = sample_genotype(&cfg, &page(), seed).unwrap();
            let est = initial_genotype(&oracle_skeleton(&g, &page()), &page(), &Thresholds::default()).unwrap();
            let e = compare(&g, &est);
            assert_eq!((e.row_count_error, e.col_count_error), (0, 0), "{name} seed {seed}");
            assert!(e.divider_abs_errors.iter().all(|&d| d <= 3), "{name} seed {seed}: {e:?}");
        }
    }
}

#[test]
fn blank_target_has_insufficient_structure() {
    let target = tablegene::skeleton::SkeletonTarget::new(
        RasterImage::white(256, 256),
        tablegene::skeleton::Provenance::External,
        &page(),
    )
    .unwrap();
    assert!(matches!(
        initial_genotype(&target, &page(), &Thresholds::default()),
        Err(Error::InsufficientStructure { .. })
    ));
}

#[test]
fn random_population_is_seeded_and_sized() {
    let cfg = TableConfig::base();
    let a = random_initial_population(&cfg, &page(), 50, 9).unwrap();
    assert_eq!(a.len(), 50);
    assert_eq!(a, random_initial_population(&cfg, &page(), 50, 9).unwrap());
    assert_ne!(a, random_initial_population(&cfg, &page(), 50, 10).unwrap());
}

#[test]
fn ga_from_random_start_improves_and_is_elitist() {
    let cfg = TableConfig::base();
    let truth = sample_genotype(&cfg, &page(), 5).unwrap();
    let target = oracle_skeleton(&truth, &page());
    let init = random_initial_population(&cfg, &page(), 50, 1).unwrap();
    let spec = ObjectiveSpec::new(ObjectiveKind::Nonoverlap);
    let params = GaParams {
        seed: 4,
        ..GaParams::default()
    };
    let mut sizes = Vec::new();
    let r = evolve_observed(&target, None, &spec, &init, &page(), &params, |v| {
        sizes.push(v.population.len());
        assert!(v.fitness.iter().all(|&f| f <= v.fitness[v.best]));
    })
    .unwrap();
    assert!(sizes.iter().all(|&n| n == 50));
    assert_eq!(r.per_epoch_best.len(), r.epochs_run);
    assert!(r.per_epoch_best.windows(2).all(|w| w[1] >= w[0]));
    assert!(r.best_objective <= r.seed_objective);
    assert_eq!(r.best_fitness, -r.best_objective);

    let again = evolve(&target, None, &spec, &init, &page(), &params).unwrap();
    assert_eq!(again, r);
}

#[test]
fn ga_with_discriminator_objective_runs_on_scan_input() {
    let truth = sample_genotype(&TableConfig::base(), &page(), 8).unwrap();
    let target = oracle_skeleton(&truth, &page());
    let est = initial_genotype(&target, &page(), &Thresholds::default()).unwrap();
    let spec = ObjectiveSpec::new(ObjectiveKind::Weighted)
        .with_lambda(1.0)
        .with_discriminator(Arc::new(tablegene::skeleton::stub_discriminator()));
    let params = GaParams {
        population_size: 12,
        max_epochs: 5,
        seed: 1,
        ..GaParams::default()
    };
    let r = evolve(&target, Some(&target.image), &spec, &[est], &page(), &params).unwrap();
    assert!(r.best_objective >= r.seed_objective);
    assert!(r.epochs_run <= 5);
}

#[test]
fn degraded_skeleton_is_seeded_and_zero_params_match_oracle() {
    let g = sample_genotype(&TableConfig::base(), &page(), 2).unwrap();
    let p = DegradationParams::default();
    let a = degraded_skeleton(&g, &page(), &p, 1).unwrap();
    assert_eq!(a, degraded_skeleton(&g, &page(), &p, 1).unwrap());
    assert_ne!(a.image, degraded_skeleton(&g, &page(), &p, 2).unwrap().image);
    let none = degraded_skeleton(&g, &page(), &DegradationParams::none(), 1).unwrap();
    assert_eq!(none.image, oracle_skeleton(&g, &page()).image);
    let bad = DegradationParams {
        segment_dropout_prob: 1.5,
        ..DegradationParams::none()
    };
    assert!(degraded_skeleton(&g, &page(), &bad, 1).is_err());
}

#[test]
fn external_skeleton_pngs_load_at_any_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let g = sample_genotype(&TableConfig::base(), &page(), 4).unwrap();
    let model = oracle_skeleton(&g, &page()).image;
    model.save_png(&dir.path().join("000001.skel.png")).unwrap();
    let page_img = tablegene::raster::render_skeleton(&g, &page(), &Default::default());
    page_img.save_png(&dir.path().join("000002.png")).unwrap();
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();

    let loaded = load_external_dir(dir.path(), &page()).unwrap();
    let ids: Vec<&str> = loaded.iter().map(|(id, _)| id.as_str()).collect();
    assert_eq!(ids, ["000001", "000002"]);
    for (_, t) in &loaded {
        assert_eq!(t.image.dims(), (256, 256));
        let est = initial_genotype(t, &page(), &Thresholds::default()).unwrap();
        assert_eq!(compare(&g, &est).row_count_error, 0);
    }
}

#[test]
fn precomputed_score_grids_are_read_by_fingerprint() {
    let dir = tempfile::tempdir().unwrap();
    let scores = PrecomputedScores::new(dir.path()).unwrap();
    let g = sample_genotype(&TableConfig::base(), &page(), 1).unwrap();
    let u = candidate_phenotype(&g, &page());
    let values: Vec<f64> = (0..PATCH_GRID * PATCH_GRID).map(|i| if i % 2 == 0 { 0.5 } else { 1.0 }).collect();
    let grid = ScoreGrid::new(PATCH_GRID, values).unwrap();
    let path = scores.path_for(&u);
    assert_eq!(path, dir.path().join(format!("{}.csv", image_fingerprint(&u))));
    std::fs::write(&path, grid.to_csv()).unwrap();

    let read = scores.scores(&u, &u).unwrap();
    assert_eq!(read, grid);
    let spec = ObjectiveSpec::new(ObjectiveKind::DiscriminatorLogprob).with_discriminator(Arc::new(scores.clone()));
    let v = spec.evaluate(&u, &u, &u).unwrap();
    assert!((v - 0.5f64.ln() / 2.0).abs() < 1e-12);

    // Unknown candidates and malformed grids are errors, not silent zeros.
    assert!(scores.scores(&u, &RasterImage::white(256, 256)).is_err());
    std::fs::write(&path, "1,1\n1,1\n").unwrap();
    assert!(scores.scores(&u, &u).is_err());
    assert!(PrecomputedScores::new(dir.path().join("missing")).is_err());
}

#[test]
fn compare_matches_hand_computed_errors() {
    let truth = TableGenotype::new(10, 20, vec![30, 40], vec![50, 60, 70]);
    let pred = TableGenotype::new(12, 17, vec![33, 40, 10], vec![50, 0, 65]);
    let e = compare(&truth, &pred);
    assert_eq!(e.row_count_error, -1);
    assert_eq!(e.col_count_error, 1);
    assert_eq!((e.x0_abs_error, e.y0_abs_error), (2, 3));
    assert_eq!(e.col_width_abs_errors, [0, 5]);
    assert_eq!(e.row_height_abs_errors, [3, 0]);
    // x: [10, 60, 120, 190] vs [12, 62, 127]; y: [20, 50, 90] vs [17, 50, 90, 100].
    assert_eq!(e.divider_abs_errors, [2, 2, 7, 3, 0, 0]);
    assert!(e.prefix_aligned());
}

#[test]
fn aggregate_matches_hand_computed_report() {
    let truth = TableGenotype::new(10, 20, vec![30, 40], vec![50, 60]);
    let preds = [
        TableGenotype::new(10, 20, vec![30, 40], vec![50, 60]),
        TableGenotype::new(14, 20, vec![30, 40], vec![50, 60, 20]),
        TableGenotype::new(10, 26, vec![70], vec![50, 60]),
        TableGenotype::new(12, 20, vec![30, 40], vec![50, 60]),
    ];
    let errors: Vec<_> = preds.iter().map(|p| compare(&truth, p)).collect();
    let r = aggregate("base", "ga", &errors).unwrap();
    assert_eq!(r.n_samples, 4);
    assert_eq!(r.pct_correct_row_count, 75.0);
    assert_eq!(r.pct_correct_col_count, 75.0);
    assert_eq!(r.n_prefix_aligned, 2);
    // x0 errors 0, 4, 0, 2: mean 1.5, population variance 2.75.
    let x0 = r.stat("x0_abs_error");
    assert_eq!(x0.mean, 1.5);
    assert!((x0.std - 2.75f64.sqrt()).abs() < 1e-12);
    // col count errors 0, -1, 0, 0.
    assert_eq!(r.stat("col_count_error").mean, -0.25);
    assert_eq!(r.histograms["col_count_error"].bins.get(&-1), Some(&1));
    assert_eq!(r.histograms["x0_abs_error"].bins.get(&2), Some(&1));
    assert_eq!(r.histograms["x0_abs_error"].bins.get(&0), Some(&2));

    let csv = reports_to_csv(&[r.clone()]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("base,ga,4,75.00,75.00,"));
    assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
    assert!(histograms_to_csv(&[r.clone()]).contains("base,ga,x0_abs_error,4,6,1"));
    assert!(format_table(&[r]).contains("% correct row count"));
    assert!(matches!(aggregate("base", "ga", &[]), Err(Error::Empty(_))));
}

#[test]
fn profile_mass_equals_total_darkness() {
    use tablegene::xyinit::{project, Axis};
    for seed in 0..10 {
        let g = sample_genotype(&TableConfig::base(), &page(), seed).unwrap();
        let img = degraded_skeleton(&g, &page(), &DegradationParams::default(), seed).unwrap().image;
        let direct: f64 = img.pixels().iter().map(|&v| 1.0 - v as f64).sum();
        for axis in [Axis::X, Axis::Y] {
            let mass: f64 = project(&img, axis).values.iter().sum();
            assert!((mass - direct).abs() < 1e-6 * direct.max(1.0), "{axis}");
        }
    }
}

#[test]
fn jittered_dividers_are_detected_within_jitter_plus_line_width() {
    let params = DegradationParams {
        divider_jitter_px: 3,
        ..DegradationParams::none()
    };
    let tol = 3 + 1;
    let trials = 1000;
    let mut good = 0;
    for seed in 0..trials {
        let g = sample_genotype(&TableConfig::base(), &page(), seed).unwrap();
        let target = degraded_skeleton(&g, &page(), &params, seed + 1).unwrap();
        let Ok(est) = initial_genotype(&target, &page(), &Thresholds::default()) else {
            continue;
        };
        let e = compare(&g, &est);
        if e.row_count_error == 0 && e.col_count_error == 0 && e.divider_abs_errors.iter().all(|&d| d <= tol) {
            good += 1;
        }
    }
    assert!(good * 100 >= trials * 95, "{good}/{trials}");
}

#[test]
fn ga_refines_projection_estimates_on_oracle_targets() {
    let spec = ObjectiveSpec::new(ObjectiveKind::Nonoverlap);
    let mut within = 0;
    let mut epochs = Vec::new();
    for seed in 0..100 {
        let g = sample_genotype(&TableConfig::base(), &page(), 1000 + seed).unwrap();
        let target = oracle_skeleton(&g, &page());
        let est = initial_genotype(&target, &page(), &Thresholds::default()).unwrap();
        let params = GaParams {
            seed,
            ..GaParams::default()
        };
        let r = evolve(&target, None, &spec, &[est], &page(), &params).unwrap();
        let e = compare(&g, &r.best_genotype);
        if e.row_count_error == 0 && e.col_count_error == 0 && e.divider_abs_errors.iter().all(|&d| d <= 2) {
            within += 1;
        }
        epochs.push(r.epochs_run);
    }
    epochs.sort();
    assert!(within >= 95, "{within}/100");
    assert!(epochs[50] <= 10, "median epochs {}", epochs[50]);
}

#[test]
fn fittest_member_has_lowest_nonoverlap() {
    let cfg = TableConfig::base();
    let spec = ObjectiveSpec::new(ObjectiveKind::Nonoverlap);
    for seed in 0..5 {
        let g = sample_genotype(&cfg, &page(), seed).unwrap();
        let target = oracle_skeleton(&g, &page()).image;
        let pop = random_initial_population(&cfg, &page(), 50, seed + 100).unwrap();
        let scores: Vec<f64> = pop
            .iter()
            .map(|m| spec.evaluate(&target, &target, &candidate_phenotype(m, &page())).unwrap())
            .collect();
        let fit: Vec<f64> = scores.iter().map(|&s| spec.fitness(s)).collect();
        let argmax = (0..50).max_by(|&a, &b| fit[a].total_cmp(&fit[b])).unwrap();
        let argmin = (0..50).min_by(|&a, &b| scores[a].total_cmp(&scores[b])).unwrap();
        assert_eq!(scores[argmax], scores[argmin]);
    }
}
