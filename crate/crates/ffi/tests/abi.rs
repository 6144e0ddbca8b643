use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use tablegene_ffi::*;

fn last_error() -> String {
    let p = tg_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn genotype_round_trip_through_json() {
    unsafe {
        let rows = [40u32, 0, 55];
        let cols = [70u32, 80];
        let mut g = ptr::null_mut();
        assert_eq!(tg_genotype_new(10, 20, rows.as_ptr(), 3, cols.as_ptr(), 2, &mut g), TgStatus::Ok);
        assert_eq!((tg_genotype_rows(g), tg_genotype_cols(g)), (2, 2));

        let mut json = ptr::null_mut();
        assert_eq!(tg_genotype_to_json(g, &mut json), TgStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(tg_genotype_from_json(json, &mut back), TgStatus::Ok);
        tg_string_free(json);

        let mut len = 0usize;
        assert_eq!(tg_genotype_dividers(back, TgAxis::X, ptr::null_mut(), 0, &mut len), TgStatus::Ok);
        assert_eq!(len, 3);
        let mut xs = [0u32; 3];
        assert_eq!(tg_genotype_dividers(back, TgAxis::X, xs.as_mut_ptr(), 3, &mut len), TgStatus::Ok);
        assert_eq!(xs, [10, 80, 160]);
        tg_genotype_free(g);
        tg_genotype_free(back);
    }
}

#[test]
fn null_and_bad_arguments_report_status() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(tg_genotype_sample(ptr::null(), 1, &mut g), TgStatus::NullPointer);
        assert!(g.is_null());
        let name = CString::new("nope").unwrap();
        assert_eq!(tg_genotype_sample(name.as_ptr(), 1, &mut g), TgStatus::InvalidArgument);
        assert!(last_error().contains("nope"));
        let bad = CString::new("{\"n\": 1}").unwrap();
        assert_eq!(tg_genotype_from_json(bad.as_ptr(), &mut g), TgStatus::Format);
        let wide = [700u32];
        assert_eq!(
            tg_genotype_new(0, 0, wide.as_ptr(), 1, wide.as_ptr(), 1, &mut g),
            TgStatus::InvalidArgument
        );
        // Null handles are tolerated by accessors and free functions.
        assert_eq!(tg_genotype_rows(ptr::null()), 0);
        tg_genotype_free(ptr::null_mut());
        tg_image_free(ptr::null_mut());
        tg_fit_result_free(ptr::null_mut());
        tg_string_free(ptr::null_mut());
    }
}

#[test]
fn objective_rejects_mismatched_sizes() {
    unsafe {
        let name = CString::new("base").unwrap();
        let mut g = ptr::null_mut();
        assert_eq!(tg_genotype_sample(name.as_ptr(), 2, &mut g), TgStatus::Ok);
        let mut skel = ptr::null_mut();
        assert_eq!(tg_skeleton_oracle(g, &mut skel), TgStatus::Ok);
        let mut scan = ptr::null_mut();
        assert_eq!(tg_render_scan(g, name.as_ptr(), 1, &mut scan), TgStatus::Ok);
        let mut v = 0.0;
        assert_eq!(tg_objective(TgObjective::L1, skel, scan, &mut v), TgStatus::DimensionMismatch);
        assert!(!last_error().is_empty());
        let mut deg = ptr::null_mut();
        assert_eq!(tg_skeleton_degraded(g, 2, 0.1, 1, 0.0, 5, &mut deg), TgStatus::Ok);
        assert_eq!(tg_objective(TgObjective::L1, skel, deg, &mut v), TgStatus::Ok);
        assert!(v > 0.0);
        for img in [skel, scan, deg] {
            tg_image_free(img);
        }
        tg_genotype_free(g);
    }
}

#[test]
fn fit_recovers_oracle_counts_and_objective_zero_at_truth() {
    unsafe {
        let name = CString::new("base").unwrap();
        let mut truth = ptr::null_mut();
        assert_eq!(tg_genotype_sample(name.as_ptr(), 3, &mut truth), TgStatus::Ok);
        let mut skel = ptr::null_mut();
        assert_eq!(tg_skeleton_oracle(truth, &mut skel), TgStatus::Ok);
        let mut u = ptr::null_mut();
        assert_eq!(tg_candidate_phenotype(truth, &mut u), TgStatus::Ok);
        let mut v = f64::NAN;
        assert_eq!(tg_objective(TgObjective::Nonoverlap, skel, u, &mut v), TgStatus::Ok);
        assert_eq!(v, 0.0);

        let mut fit = ptr::null_mut();
        assert_eq!(tg_fit(skel, ptr::null(), TgObjective::Nonoverlap, 0, 5, &mut fit), TgStatus::Ok);
        let mut best = ptr::null_mut();
        assert_eq!(tg_fit_result_best(fit, &mut best), TgStatus::Ok);
        assert_eq!(tg_genotype_rows(best), tg_genotype_rows(truth));
        assert_eq!(tg_genotype_cols(best), tg_genotype_cols(truth));
        assert!(tg_fit_result_epochs(fit) >= 1);
        tg_fit_result_free(fit);
        tg_genotype_free(best);
        tg_genotype_free(truth);
        tg_image_free(skel);
        tg_image_free(u);
    }
}

#[test]
fn png_round_trip_and_wrong_resolution_target() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("scan.png").to_str().unwrap()).unwrap();
    unsafe {
        let name = CString::new("base").unwrap();
        let mut g = ptr::null_mut();
        assert_eq!(tg_genotype_sample(name.as_ptr(), 1, &mut g), TgStatus::Ok);
        let mut scan = ptr::null_mut();
        assert_eq!(tg_render_scan(g, name.as_ptr(), 9, &mut scan), TgStatus::Ok);
        assert_eq!((tg_image_width(scan), tg_image_height(scan)), (595, 842));
        assert_eq!(tg_image_save_png(scan, path.as_ptr()), TgStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(tg_image_load_png(path.as_ptr(), &mut back), TgStatus::Ok);
        let a = std::slice::from_raw_parts(tg_image_pixels(scan), 595 * 842);
        let b = std::slice::from_raw_parts(tg_image_pixels(back), 595 * 842);
        assert_eq!(a, b);
        // A page-sized image is not a model-resolution target.
        let mut est = ptr::null_mut();
        assert_eq!(tg_initial_genotype(back, &mut est), TgStatus::InvalidArgument);
        tg_image_free(scan);
        tg_image_free(back);
        tg_genotype_free(g);
    }
}

fn target_dir() -> PathBuf {
    // <target>/<profile>/deps/<test-binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_static_library() {
    let Ok(cc) = which_cc() else {
        eprintln!("skipping: no C compiler found");
        return;
    };
    let lib = target_dir().join("libtablegene_ffi.a");
    if !lib.is_file() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = tempfile::tempdir().unwrap();
    let exe = out.path().join("smoke");
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "smoke failed: {stdout} {}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout.starts_with("ok "), "{stdout}");
}

fn which_cc() -> Result<String, ()> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc)
        .arg("--version")
        .output()
        .map(|_| cc)
        .map_err(|_| ())
}
