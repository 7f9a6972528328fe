use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use cnslab_ffi::*;

fn last_error() -> String {
    let p = cns_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn params() -> *mut CnsParams {
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { cns_params_new(1.0, 0.0, 1.0, 1.4, &mut p) },
        CnsStatus::Ok
    );
    p
}

fn gaussian(n: usize, length: f64, amp: f64) -> Vec<f64> {
    let dx = length / n as f64;
    (0..n * n)
        .map(|idx| {
            let x = -0.5 * length + (idx / n) as f64 * dx;
            let y = -0.5 * length + (idx % n) as f64 * dx;
            amp * (-(x * x + (y - 1.0) * (y - 1.0)) / 8.0).exp()
        })
        .collect()
}

fn state(n: usize, length: f64, rho: &[f64], m1: &[f64], m2: &[f64]) -> *mut CnsState {
    let mut s = ptr::null_mut();
    let st = unsafe { cns_state_new(n, length, rho.as_ptr(), m1.as_ptr(), m2.as_ptr(), &mut s) };
    assert_eq!(st, CnsStatus::Ok);
    s
}

fn values(s: *const CnsState, len: usize) -> [Vec<f64>; 3] {
    let mut out = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    let [a, b, c] = &mut out;
    let st = unsafe { cns_state_values(s, a.as_mut_ptr(), b.as_mut_ptr(), c.as_mut_ptr(), len) };
    assert_eq!(st, CnsStatus::Ok);
    out
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn version_and_registry() {
    let v = unsafe { CStr::from_ptr(cns_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    assert_eq!(cns_experiment_count(), 9);
    let names: Vec<String> = (0..9)
        .map(|i| {
            unsafe { CStr::from_ptr(cns_experiment_name(i)) }
                .to_string_lossy()
                .into_owned()
        })
        .collect();
    assert!(names.contains(&"kernel-rates".to_string()));
    assert!(cns_experiment_name(9).is_null());
}

#[test]
fn params_errors() {
    std::thread::spawn(|| assert!(cns_last_error_message().is_null()))
        .join()
        .unwrap();
    let p = params();
    let mut c = 0.0;
    assert_eq!(unsafe { cns_params_sound_speed(p, &mut c) }, CnsStatus::Ok);
    assert!((c - 1.0).abs() < 1e-15);
    unsafe { cns_params_free(p) };

    let mut q = ptr::null_mut();
    assert_eq!(
        unsafe { cns_params_new(-1.0, 0.0, 1.0, 1.4, &mut q) },
        CnsStatus::InvalidArgument
    );
    assert!(q.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(
        unsafe { cns_params_new(1.0, 0.0, 1.0, 0.5, &mut q) },
        CnsStatus::InvalidArgument
    );
    assert!(last_error().contains("exponent"));
    assert_eq!(
        unsafe { cns_params_new(1.0, 0.0, 1.0, 1.4, ptr::null_mut()) },
        CnsStatus::NullPointer
    );
    assert_eq!(
        unsafe { cns_params_sound_speed(ptr::null(), &mut c) },
        CnsStatus::NullPointer
    );
    unsafe {
        cns_params_free(ptr::null_mut());
        cns_state_free(ptr::null_mut());
    }
}

#[test]
fn state_round_trip() {
    let (n, l) = (32, 24.0);
    let rho = gaussian(n, l, 0.02);
    let m1 = gaussian(n, l, -0.01);
    let m2 = vec![0.0; n * n];
    let s = state(n, l, &rho, &m1, &m2);
    let (mut gn, mut gl) = (0, 0.0);
    assert_eq!(
        unsafe { cns_state_grid(s, &mut gn, &mut gl) },
        CnsStatus::Ok
    );
    assert_eq!((gn, gl), (n, l));
    let [a, b, c] = values(s, n * n);
    assert!(max_diff(&a, &rho) < 1e-15 && max_diff(&b, &m1) < 1e-15 && max_diff(&c, &m2) < 1e-15);

    let mut buf = vec![0.0; 10];
    let st = unsafe { cns_state_values(s, buf.as_mut_ptr(), ptr::null_mut(), ptr::null_mut(), 10) };
    assert_eq!(st, CnsStatus::InvalidArgument);
    let mut bad = ptr::null_mut();
    let st = unsafe { cns_state_new(24, l, rho.as_ptr(), m1.as_ptr(), m2.as_ptr(), &mut bad) };
    assert_eq!(st, CnsStatus::InvalidArgument);
    assert!(last_error().contains("power of two"));
    let st = unsafe { cns_state_new(n, l, rho.as_ptr(), ptr::null(), m2.as_ptr(), &mut bad) };
    assert_eq!(st, CnsStatus::NullPointer);
    unsafe { cns_state_free(s) };
}

#[test]
fn evolution_matches_the_library() {
    let (n, l) = (32, 24.0);
    let p = params();
    let rho = gaussian(n, l, 0.02);
    let zero = vec![0.0; n * n];
    let s = state(n, l, &rho, &zero, &zero);

    let mut lin = ptr::null_mut();
    assert_eq!(
        unsafe { cns_linear_evolution(s, p, 2.0, &mut lin) },
        CnsStatus::Ok
    );
    let mut sim = ptr::null_mut();
    assert_eq!(
        unsafe { cns_simulate(s, p, 2.0, 0.0, false, &mut sim) },
        CnsStatus::Ok
    );
    let (a, b) = (values(lin, n * n), values(sim, n * n));

    let grid = cnslab::spectral::Grid::new(n, l).unwrap();
    let mut x = cnslab::spectral::State::new(
        cnslab::spectral::transform(grid, &rho).unwrap(),
        [
            cnslab::spectral::SpectralField::zeros(grid),
            cnslab::spectral::SpectralField::zeros(grid),
        ],
    )
    .unwrap();
    let fp = cnslab::profiles::FluidParams::default();
    let want = cnslab::solver::linear_evolution(&x, 2.0, &fp).unwrap();
    assert!(max_diff(&a[0], &want.rho.values()) < 1e-15);
    // The solver dealiases its initial data.
    x.dealias();
    let want = cnslab::solver::linear_evolution(&x, 2.0, &fp).unwrap();
    for (got, f) in b.iter().zip(want.fields()) {
        assert!(max_diff(got, &f.values()) < 1e-14);
    }

    let mut nl = ptr::null_mut();
    assert_eq!(
        unsafe { cns_simulate(s, p, 2.0, 0.0, true, &mut nl) },
        CnsStatus::Ok
    );
    let c = values(nl, n * n);
    let mass = |v: &[f64]| v.iter().sum::<f64>();
    assert!((mass(&c[0]) - mass(&rho)).abs() < 1e-12);

    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { cns_simulate(s, p, 2.0, 5.0, true, &mut out) },
        CnsStatus::Cfl
    );
    assert_eq!(
        unsafe { cns_linear_evolution(s, p, -1.0, &mut out) },
        CnsStatus::InvalidArgument
    );
    let vac = gaussian(n, l, -0.8);
    let v = state(n, l, &vac, &zero, &zero);
    assert_eq!(
        unsafe { cns_simulate(v, p, 1.0, 0.0, true, &mut out) },
        CnsStatus::Aborted
    );
    assert!(last_error().contains("vacuum"));
    assert!(out.is_null());
    unsafe {
        for h in [s, lin, sim, nl, v] {
            cns_state_free(h);
        }
        cns_params_free(p);
    }
}

#[test]
fn run_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "experiments = kernel-algebra\nn = 64\nL = 40\noutput = {}\n",
        dir.path().display()
    );
    let c = CString::new(text).unwrap();
    let mut ok = false;
    assert_eq!(unsafe { cns_run(c.as_ptr(), &mut ok) }, CnsStatus::Ok);
    assert!(ok);
    assert!(dir.path().join("reports.csv").exists());

    let bad = CString::new("n = 100").unwrap();
    assert_eq!(unsafe { cns_run(bad.as_ptr(), &mut ok) }, CnsStatus::Config);
    assert!(last_error().contains("`n`"));
    let unknown = CString::new("experiments = nope").unwrap();
    assert_eq!(
        unsafe { cns_run(unknown.as_ptr(), &mut ok) },
        CnsStatus::Config
    );
    assert_eq!(
        unsafe { cns_run(ptr::null(), &mut ok) },
        CnsStatus::NullPointer
    );
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn have(tool: &str) -> bool {
    Command::new(tool).arg("--version").output().is_ok()
}

#[test]
fn header_compiles_as_c_and_cpp() {
    if !have("cc") || !have("c++") {
        eprintln!("skipping: no C toolchain");
        return;
    }
    let include = crate_dir().join("include");
    let src = crate_dir().join("tests/c/smoke.c");
    for (tool, extra) in [
        ("cc", vec!["-std=c99"]),
        ("c++", vec!["-x", "c++", "-std=c++11"]),
    ] {
        let out = Command::new(tool)
            .args(&extra)
            .args(["-Wall", "-Werror", "-fsyntax-only", "-I"])
            .arg(&include)
            .arg(&src)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{tool}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

fn static_lib() -> Option<PathBuf> {
    let deps = std::env::current_exe().ok()?.parent()?.to_path_buf();
    [
        deps.join("libcnslab_ffi.a"),
        deps.parent()?.join("libcnslab_ffi.a"),
    ]
    .into_iter()
    .find(|p| p.exists())
}

#[test]
fn c_program_links_and_runs() {
    let Some(lib) = static_lib().filter(|_| have("cc")) else {
        eprintln!("skipping: static library or C compiler unavailable");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let out = Command::new("cc")
        .args(["-std=c99", "-O1", "-I"])
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = Command::new(Path::new(&exe)).output().unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
