use std::ffi::CStr;
use std::ptr;

use treecount_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(tc_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn model_round_trip() {
    let params = tc_model_params_default(1000.0, 8.0, 10.0);
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(tc_model_predict(&params, &mut m), TcStatus::Ok);
        let n = tc_model_num_levels(m);
        assert!(n > 3);
        let expected = treecount::predict(&treecount::ModelParams::new(1000.0, 8.0, 10.0)).unwrap();
        assert_eq!(tc_model_a0(m), expected.a0);
        assert_eq!(tc_model_residual(m), expected.profile.residual);
        let mut level = TcModelLevel::default();
        assert_eq!(tc_model_level(m, 1, &mut level), TcStatus::Ok);
        assert_eq!(level.ax, expected.ax[1]);
        assert_eq!(level.pmin, expected.profile.pmin[1]);
        assert_eq!(tc_model_level(m, n, &mut level), TcStatus::OutOfRange);
        assert!(last_error().contains("out of range"));
        tc_model_free(m);
    }
}

#[test]
fn invalid_parameters_are_reported() {
    let params = tc_model_params_default(1000.0, 8.0, -1.0);
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(tc_model_predict(&params, &mut m), TcStatus::InvalidConfig);
        assert!(m.is_null());
        assert!(last_error().contains("ratio"));
        assert_eq!(tc_model_predict(ptr::null(), &mut m), TcStatus::NullPointer);
    }
}

#[test]
fn non_convergence_yields_no_handle() {
    let mut params = tc_model_params_default(1000.0, 8.0, 5.0);
    params.max_iter = 1;
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(tc_model_predict(&params, &mut m), TcStatus::NotConverged);
        assert!(m.is_null());
    }
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        assert!(tc_model_a0(ptr::null()).is_nan());
        assert_eq!(tc_model_num_levels(ptr::null()), 0);
        assert_eq!(tc_sim_num_levels(ptr::null()), 0);
        assert!(tc_sim_a0(ptr::null(), ptr::null_mut()).is_nan());
        tc_model_free(ptr::null_mut());
        tc_sim_free(ptr::null_mut());
    }
}

#[test]
fn simulation_matches_core() {
    let mut cfg = tc_sim_config_default(100, 4.0, 5.0);
    cfg.num_samples = 40;
    cfg.warmup_time = 5.0;
    cfg.sample_interval = 0.5;
    cfg.seed = 9;
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(tc_simulate(&cfg, &mut s), TcStatus::Ok);
        let core = treecount::sim::run(&treecount::SimConfig {
            num_samples: 40,
            warmup_time: 5.0,
            sample_interval: 0.5,
            seed: 9,
            ..treecount::SimConfig::new(100, 4.0, 5.0)
        })
        .unwrap();
        let mut se = 0.0;
        let a0 = tc_sim_a0(s, &mut se);
        assert_eq!((a0, se), core.summary.a0());
        assert_eq!(tc_sim_mean_size(s), core.summary.mean_size);
        assert_eq!(tc_sim_num_levels(s), core.summary.levels.len());
        let mut l = TcSimLevel::default();
        assert_eq!(tc_sim_level(s, 2, &mut l), TcStatus::Ok);
        assert_eq!(l.nx_mean, core.summary.levels[2].nx_mean);
        tc_sim_free(s);
    }
}

#[test]
fn bad_simulation_config() {
    let mut cfg = tc_sim_config_default(100, 4.0, 5.0);
    cfg.num_samples = 0;
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(tc_simulate(&cfg, &mut s), TcStatus::InvalidConfig);
        assert!(s.is_null());
    }
}

#[test]
fn version_matches_core() {
    let v = unsafe { CStr::from_ptr(tc_version()) };
    assert_eq!(v.to_str().unwrap(), treecount::VERSION);
}

#[test]
fn header_declares_every_entry_point() {
    let header = include_str!("../include/treecount.h");
    for f in [
        "tc_model_params_default",
        "tc_model_predict",
        "tc_model_a0",
        "tc_model_residual",
        "tc_model_num_levels",
        "tc_model_level",
        "tc_model_free",
        "tc_sim_config_default",
        "tc_simulate",
        "tc_sim_a0",
        "tc_sim_mean_size",
        "tc_sim_num_levels",
        "tc_sim_level",
        "tc_sim_free",
        "tc_last_error_message",
        "tc_version",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(header.contains("typedef struct TcModel TcModel;"));
}

/// Compiles and runs the C example against the static library when a C
/// compiler is on the path.
#[test]
fn c_example_links_and_runs() {
    use std::path::PathBuf;
    use std::process::Command;

    let Ok(probe) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(probe.status.success());
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = [
        exe_dir.join("libtreecount_ffi.a"),
        exe_dir.join("../libtreecount_ffi.a"),
    ]
    .into_iter()
    .find(|p| p.exists())
    .expect("static library not built");
    let dir = std::env::temp_dir().join(format!("treecount-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let exe = dir.join("predict");
    let status = Command::new("cc")
        .arg(crate_dir.join("examples/predict.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("model a0 "), "{text}");
    assert!(text.contains("rejected: invalid configuration"), "{text}");
    let _ = std::fs::remove_dir_all(&dir);
}
