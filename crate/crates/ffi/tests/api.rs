use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use mminf::moments::{MomentTable, Weighting};
use mminf_ffi::*;

fn model_text(name: &str) -> CString {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/models")
        .join(name);
    CString::new(std::fs::read_to_string(path).unwrap()).unwrap()
}

fn load(name: &str) -> *mut MminfModel {
    let mut handle = ptr::null_mut();
    let status =
        unsafe { mminf_model_from_str(model_text(name).as_ptr(), MminfFormat::Toml, &mut handle) };
    assert_eq!(status, MminfStatus::Ok);
    assert!(!handle.is_null());
    handle
}

fn last_error() -> String {
    let p = mminf_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn moments_match_the_library() {
    let h = load("reference.toml");
    let text = model_text("reference.toml");
    let file = mminf::cli::ModelFile::from_toml_str(text.to_str().unwrap()).unwrap();
    let model = file.to_model().unwrap();
    let st = mminf::chain_statics(&model).unwrap();
    let table = MomentTable::compute(&model, &st, 6).unwrap();

    let mut k = 0usize;
    assert_eq!(
        unsafe { mminf_model_state_count(h, &mut k) },
        MminfStatus::Ok
    );
    assert_eq!(k, 3);
    for (w, lib) in [
        (MminfWeighting::Embedded, Weighting::Embedded),
        (MminfWeighting::Occupancy, Weighting::Occupancy),
    ] {
        let mut f = [0.0; 8];
        let mut r = [0.0; 7];
        unsafe {
            assert_eq!(
                mminf_factorial_moments(h, 6, w, f.as_mut_ptr(), f.len()),
                MminfStatus::Ok
            );
            assert_eq!(
                mminf_raw_moments(h, 6, w, r.as_mut_ptr(), r.len()),
                MminfStatus::Ok
            );
        }
        assert_eq!(&f[..7], table.weighted(lib).factorial.as_slice());
        assert_eq!(f[7], 0.0, "writes stop at order + 1");
        assert_eq!(&r[..], table.weighted(lib).raw.as_slice());
    }
    unsafe { mminf_model_free(h) };
}

#[test]
fn json_models_load() {
    let toml_text = model_text("markov3.toml");
    let file = mminf::cli::ModelFile::from_toml_str(toml_text.to_str().unwrap()).unwrap();
    let json = CString::new(serde_json::to_string(&file).unwrap()).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { mminf_model_from_str(json.as_ptr(), MminfFormat::Json, &mut h) },
        MminfStatus::Ok
    );
    unsafe { mminf_model_free(h) };
}

#[test]
fn bad_input_reports_status_and_message() {
    let mut h = ptr::null_mut();
    let status = unsafe {
        mminf_model_from_str(
            model_text("invalid.toml").as_ptr(),
            MminfFormat::Toml,
            &mut h,
        )
    };
    assert_eq!(status, MminfStatus::InvalidInput);
    assert!(h.is_null());
    assert!(last_error().contains("routing row 0"), "{}", last_error());

    let garbage = CString::new("mu = ").unwrap();
    assert_eq!(
        unsafe { mminf_model_from_str(garbage.as_ptr(), MminfFormat::Toml, &mut h) },
        MminfStatus::InvalidInput
    );
    assert_eq!(
        unsafe { mminf_model_from_str(ptr::null(), MminfFormat::Toml, &mut h) },
        MminfStatus::NullPointer
    );
    assert_eq!(
        unsafe { mminf_model_from_str(garbage.as_ptr(), MminfFormat::Toml, ptr::null_mut()) },
        MminfStatus::NullPointer
    );
}

#[test]
fn buffers_and_handles_are_checked() {
    let h = load("markov3.toml");
    let mut f = [0.0; 4];
    unsafe {
        assert_eq!(
            mminf_factorial_moments(h, 4, MminfWeighting::Occupancy, f.as_mut_ptr(), f.len()),
            MminfStatus::BufferTooSmall
        );
        assert!(last_error().contains("5 needed"));
        assert_eq!(
            mminf_factorial_moments(h, 3, MminfWeighting::Occupancy, ptr::null_mut(), 4),
            MminfStatus::NullPointer
        );
        assert_eq!(
            mminf_raw_moments(ptr::null(), 3, MminfWeighting::Occupancy, f.as_mut_ptr(), 4),
            MminfStatus::NullPointer
        );
        let mut big = vec![0.0; 30];
        assert_eq!(
            mminf_factorial_moments(
                h,
                25,
                MminfWeighting::Occupancy,
                big.as_mut_ptr(),
                big.len()
            ),
            MminfStatus::InvalidInput
        );
        // a successful call clears the previous message
        assert_eq!(
            mminf_factorial_moments(h, 3, MminfWeighting::Occupancy, f.as_mut_ptr(), 4),
            MminfStatus::Ok
        );
        assert!(mminf_last_error_message().is_null());
        mminf_model_free(h);
        mminf_model_free(ptr::null_mut());
    }
}

#[test]
fn validate_passes_on_shipped_models() {
    for name in ["reference.toml", "two_state_gamma.toml", "markov3.toml"] {
        let h = load(name);
        let mut failed = 99u32;
        assert_eq!(
            unsafe { mminf_validate(h, 8, &mut failed) },
            MminfStatus::Ok,
            "{name}"
        );
        assert_eq!(failed, 0);
        unsafe { mminf_model_free(h) };
    }
}

#[test]
fn simulation_is_reproducible_and_checked() {
    let h = load("markov3.toml");
    let mut cfg = std::mem::MaybeUninit::<MminfSimConfig>::uninit();
    assert_eq!(
        unsafe { mminf_sim_config_default(h, cfg.as_mut_ptr()) },
        MminfStatus::Ok
    );
    let mut cfg = unsafe { cfg.assume_init() };
    cfg.replications = 4;
    cfg.horizon = cfg.warmup + 500.0;
    cfg.max_order = 3;
    cfg.seed = 11;

    let run = |cfg: &MminfSimConfig| {
        let (mut e, mut s) = ([0.0; 3], [0.0; 3]);
        let status = unsafe { mminf_simulate(h, cfg, e.as_mut_ptr(), s.as_mut_ptr(), 3) };
        (status, e, s)
    };
    let a = run(&cfg);
    assert_eq!(a.0, MminfStatus::Ok, "{}", last_error());
    assert_eq!(a, run(&cfg));
    assert!(a.1[0] > 0.0 && a.2.iter().all(|s| *s > 0.0));

    let mut bad = cfg;
    bad.horizon = bad.warmup / 2.0;
    assert_eq!(run(&bad).0, MminfStatus::InvalidInput);
    let mut short = cfg;
    short.max_order = 4;
    assert_eq!(run(&short).0, MminfStatus::BufferTooSmall);
    unsafe { mminf_model_free(h) };
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(mminf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
