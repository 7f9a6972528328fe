use cnslab::config::{parse_config, run};
use cnslab::harness::*;
use cnslab::spectral::MultiIndex;
use cnslab::Error;
use proptest::prelude::*;

fn series(ts: &[f64], f: impl Fn(f64) -> f64) -> RateSeries {
    RateSeries::new(ts.iter().map(|&t| (t, f(t))).collect()).unwrap()
}

fn geometric(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2f64.powf(0.5 * k as f64)).collect()
}

#[test]
fn fit_examples() {
    let ts = geometric(8);
    let fit = fit_rate(&series(&ts, |t| t.powf(-1.5)), false).unwrap();
    assert!((fit.slope + 1.5).abs() < 1e-12);
    let fit = fit_rate(&series(&ts, |t| t.ln_1p() / t), true).unwrap();
    assert!((fit.slope + 1.0).abs() < 0.02);
    let fit = fit_rate(&series(&ts, |_| 4.0), false).unwrap();
    assert!(fit.slope.abs() < 1e-12);
    assert!(fit.reliable());
}

#[test]
fn noisy_series_is_flagged() {
    let ts = geometric(8);
    let fit = fit_rate(
        &series(&ts, |t| {
            if (t.log2() * 2.0).round() as i64 % 2 == 0 {
                1.0
            } else {
                10.0
            }
        }),
        false,
    )
    .unwrap();
    assert!(!fit.reliable());
}

#[test]
fn series_validation() {
    let bad = |s: Vec<(f64, f64)>| matches!(RateSeries::new(s), Err(Error::Series(_)));
    let ok: Vec<(f64, f64)> = (1..=6).map(|k| (k as f64, 1.0)).collect();
    assert!(RateSeries::new(ok.clone()).is_ok());
    assert!(bad(ok[..5].to_vec()));
    let mut neg = ok.clone();
    neg[2].1 = -1.0;
    assert!(bad(neg));
    let mut zero = ok.clone();
    zero[0].1 = 0.0;
    assert!(bad(zero));
    let mut back = ok.clone();
    back.swap(1, 2);
    assert!(bad(back));
    assert!(matches!(
        RateSeries::with_window(ok, (2.0, 6.0)),
        Err(Error::Series(_))
    ));
}

#[test]
fn window_restricts_the_fit() {
    let ts: Vec<f64> = (1..=12).map(|k| k as f64).collect();
    // A transient before t = 4, then an exact t^{-2}.
    let samples = ts
        .iter()
        .map(|&t| (t, if t < 4.0 { 1.0 } else { t.powi(-2) }))
        .collect();
    let s = RateSeries::with_window(samples, (4.0, 12.0)).unwrap();
    assert!((fit_rate(&s, false).unwrap().slope + 2.0).abs() < 1e-12);
}

#[test]
fn exponential_fit() {
    let ts: Vec<f64> = (1..=10).map(|k| k as f64).collect();
    let fit = fit_exponential(&series(&ts, |t| 3.0 * (-0.7 * t).exp())).unwrap();
    assert!((fit.slope + 0.7).abs() < 1e-12);
}

#[test]
fn formula_table() {
    let inf = f64::INFINITY;
    let cases = [
        (Estimate::SSparLp, 2.0, 0, -0.5),
        (Estimate::SSparLp, inf, 0, -1.25),
        (Estimate::SSparLp, 1.0, 0, 0.25),
        (Estimate::SSparLp, 2.0, 1, -1.0),
        (Estimate::BfDiff, 2.0, 0, -1.0),
        (Estimate::PerpLp1, inf, 0, -1.0),
        (Estimate::PerpLp2, 2.0, 0, -1.0),
        (Estimate::PerpLpPetit, 1.5, 0, -5.0 / 6.0),
        (Estimate::Sound, 2.0, 0, -0.5),
        (Estimate::Sound, inf, 0, -1.25),
        (Estimate::NonlinearEps, 2.0, 0, 2.0),
        (Estimate::OseenVorticity, 2.0, 0, -0.5),
    ];
    for (e, p, s, want) in cases {
        let got = predicted_exponent(e, p, s);
        assert!((got - want).abs() < 1e-15, "{e:?} p={p} |σ|={s}: {got}");
    }
}

#[test]
fn report_pass_rules() {
    let fit = Fit {
        slope: -0.55,
        intercept: 0.0,
        r2: 0.999,
    };
    let r = ExperimentReport::rate(
        "x",
        Estimate::Sound,
        2.0,
        MultiIndex::ZERO,
        &fit,
        0.1,
        Check::Sharp,
    );
    assert!(r.pass && r.predicted == -0.5);
    let r = ExperimentReport::rate(
        "x",
        Estimate::Sound,
        2.0,
        MultiIndex::ZERO,
        &fit,
        0.01,
        Check::Sharp,
    );
    assert!(!r.pass);
    assert!(ExperimentReport::decay("d", &[1.0, 0.9, 0.5, 0.3, 0.1], 0.2).pass);
    assert!(!ExperimentReport::decay("d", &[1.0, 0.9, 0.05, 0.1, 0.05], 0.2).pass);
    assert!(!ExperimentReport::decay("d", &[1.0, 0.8, 0.6, 0.5, 0.4], 0.2).pass);
    assert!(ExperimentReport::bounded_ratio("b", &[1.0, 2.5, 1.2], 3.0).pass);
    assert!(!ExperimentReport::bounded_ratio("b", &[1.0, 3.5], 3.0).pass);
    assert!(!ExperimentReport::below("n", f64::NAN, 1.0).pass);
}

#[test]
fn csv_layout() {
    let fit = Fit {
        slope: -0.49,
        intercept: 0.0,
        r2: 0.9999,
    };
    let mut r = ExperimentReport::rate(
        "sound",
        Estimate::Sound,
        f64::INFINITY,
        MultiIndex::new(1, 0).unwrap(),
        &fit,
        0.15,
        Check::Sharp,
    );
    r.experiment = "demo".into();
    let csv = reports_csv(&[r]);
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with('#'));
    assert_eq!(
        lines[1],
        "experiment,p,sigma,predicted,fitted,r2,tolerance,pass"
    );
    assert!(
        lines[2].starts_with("demo/sound,inf,\"(1,0)\","),
        "{}",
        lines[2]
    );
    assert!(lines[2].ends_with(",0.15,false"));

    let s = series_csv(&[NamedSeries::new("a, b", vec![(1.0, 2.0)])]);
    assert_eq!(
        s.lines().nth(2).unwrap(),
        "\"a, b\",1.000000000e0,2.000000000e0"
    );
}

fn run_to_dir(threads: usize) -> (bool, Vec<(String, Vec<u8>)>) {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "experiments = kernel-algebra, hf-decay, oseen-exactness\nn = 64\nL = 60\nthreads = {threads}\noutput = {}\n",
        dir.path().display()
    );
    let manifest = parse_config(&text).unwrap();
    let mut log = Vec::new();
    let ok = run(&manifest, &mut log).unwrap();
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    (ok, files)
}

#[test]
fn runs_are_reproducible() {
    let (ok, a) = run_to_dir(2);
    let (_, b) = run_to_dir(2);
    let names: Vec<&str> = a.iter().map(|f| f.0.as_str()).collect();
    assert!(names.contains(&"reports.csv") && names.contains(&"summary.json"));
    for ((na, da), (nb, db)) in a.iter().zip(&b) {
        assert_eq!(na, nb);
        if na.ends_with(".csv") {
            assert!(da == db, "{na} differs between runs");
        }
    }
    let summary: serde_json::Value =
        serde_json::from_slice(&a.iter().find(|f| f.0 == "summary.json").unwrap().1).unwrap();
    assert_eq!(summary["metadata"]["threads"], 2);
    assert_eq!(summary["all_pass"], ok);
}

#[test]
fn registry_lookup() {
    let names: Vec<&str> = registry().iter().map(|e| e.name).collect();
    assert_eq!(names.len(), 9);
    assert!(names.contains(&"sound-part-decay"));
    assert!(matches!(find("sound"), Err(Error::UnknownExperiment(_))));
}

proptest! {
    #[test]
    fn power_laws_are_recovered(a in -3.0f64..3.0, c in 0.01f64..100.0, t0 in 0.5f64..4.0) {
        let ts: Vec<f64> = (0..8).map(|k| t0 * 1.5f64.powi(k)).collect();
        let fit = fit_rate(&series(&ts, |t| c * t.powf(a)), false).unwrap();
        prop_assert!((fit.slope - a).abs() < 1e-10);
        prop_assert!((fit.intercept - c.ln()).abs() < 1e-9);
    }
}
