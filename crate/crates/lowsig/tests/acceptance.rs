//! Acceptance suite: one test per release criterion, each printing a
//! single pass/fail line with the measured values (run with
//! `cargo test --test acceptance -- --nocapture` to see them).
//!
//! Criteria 4, 6 and 7 share one full study run (water + bone insert at
//! i0 = 2e4, seed 42, 512 channels x 720 views) so the suite exercises
//! the same code path as `lowsig repro`.

use std::path::Path;
use std::sync::LazyLock;
use std::time::{Duration, Instant};

use lowsig::af::{vst_forward, vst_inverse_scalar, AdaptiveParams};
use lowsig::commands::{cmd_correct, cmd_recon, cmd_simulate, cmd_repro, Method, StudySummary};
use lowsig::config::RunConfig;
use lowsig::io::read_image;
use lowsig::metrics::{mtf_from_wire, nps_radial, Patch};
use lowsig::af::bilateral_filter;
use lowsig::sim::rng::CellRng;
use lowsig::{Dims, Image, SinogramGrid, Stage, WindowSpec};

fn report(criterion: u32, name: &str, pass: bool, detail: &str, elapsed: Duration) {
    println!(
        "criterion {criterion} ({name}): {} — {detail} [{:.2}s]",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(pass, "criterion {criterion} ({name}) failed: {detail}");
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}

/// Poisson draws pushed through the forward transform.
fn vst_draws(lambda: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = CellRng::from_seed(seed, lambda.to_bits());
    let draws: Vec<f64> = (0..n).map(|_| rng.poisson(lambda) as f64).collect();
    let grid = SinogramGrid::from_vec(Dims::new(n, 1, 1), Stage::Counts, draws);
    vst_forward(&grid).into_data()
}

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[test]
fn criterion_1_vst_stabilization() {
    let t0 = Instant::now();
    let mut detail = String::new();
    let mut pass = true;
    for &lambda in &[5.0, 10.0, 100.0, 1000.0] {
        let std = sample_std(&vst_draws(lambda, 100_000, 0xACCE_0001));
        pass &= (0.90..=1.10).contains(&std);
        detail.push_str(&format!("std(vst(Poisson({lambda})))={std:.4} "));
    }
    let elapsed = t0.elapsed();
    pass &= elapsed < Duration::from_secs(5);
    report(1, "vst stabilization", pass, detail.trim(), elapsed);
}

#[test]
fn criterion_2_unbiased_inverse() {
    let t0 = Instant::now();
    let mut detail = String::new();
    let mut pass = true;
    for &lambda in &[5.0, 20.0, 100.0] {
        let draws = vst_draws(lambda, 1_000_000, 0xACCE_0002);
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let back = vst_inverse_scalar(mean);
        let rel = (back - lambda).abs() / lambda;
        pass &= rel <= 0.02;
        detail.push_str(&format!("inv(E[vst],λ={lambda})={back:.4} (rel {rel:.2e}) "));
    }
    let at_floor = vst_inverse_scalar(2.0 * (3.0f64 / 8.0).sqrt()).abs();
    pass &= at_floor <= 1e-12;
    detail.push_str(&format!("|inv(2√(3/8))|={at_floor:.2e}"));
    let elapsed = t0.elapsed();
    pass &= elapsed < Duration::from_secs(30);
    report(2, "unbiased inverse", pass, &detail, elapsed);
}

/// Direct-summation spatial exponential filter, written independently of
/// the library path (own bounds handling, own distance computation).
fn spatial_filter_oracle(
    data: &[f64],
    dims: (usize, usize, usize),
    sigma_d: &[f64],
    half: (usize, usize, usize),
) -> Vec<f64> {
    let (nc, nr, nv) = dims;
    let idx = |c: usize, r: usize, v: usize| c + nc * (r + nr * v);
    let mut out = vec![0.0; data.len()];
    for v in 0..nv {
        for r in 0..nr {
            for c in 0..nc {
                let i = idx(c, r, v);
                let mut num = 0.0;
                let mut den = 0.0;
                for vj in v.saturating_sub(half.2)..=(v + half.2).min(nv - 1) {
                    for rj in r.saturating_sub(half.1)..=(r + half.1).min(nr - 1) {
                        for cj in c.saturating_sub(half.0)..=(c + half.0).min(nc - 1) {
                            let dc = cj as f64 - c as f64;
                            let dr = rj as f64 - r as f64;
                            let dv = vj as f64 - v as f64;
                            let dist = (dc * dc + dr * dr + dv * dv).sqrt();
                            let w = (-dist / sigma_d[i]).exp();
                            num += w * data[idx(cj, rj, vj)];
                            den += w;
                        }
                    }
                }
                out[i] = num / den;
            }
        }
    }
    out
}

#[test]
fn criterion_3_bilateral_oracle_equivalence() {
    let t0 = Instant::now();
    let dims = Dims::new(64, 16, 8);
    let mut rng = CellRng::from_seed(0xACCE_0003, 0);
    let data: Vec<f64> = (0..dims.len()).map(|_| 10.0 + 100.0 * rng.next_f64()).collect();
    let sigma_d: Vec<f64> = (0..dims.len()).map(|_| 0.5 + 3.5 * rng.next_f64()).collect();

    let x = SinogramGrid::from_vec(dims, Stage::Vst, data.clone());
    let params = AdaptiveParams {
        sigma_d: SinogramGrid::from_vec(dims, Stage::Counts, sigma_d.clone()),
        sigma_r: SinogramGrid::filled(dims, Stage::Vst, f64::INFINITY),
    };
    let w = WindowSpec::new(6, 3, 1);
    let got = bilateral_filter(&x, &params, w);
    let want = spatial_filter_oracle(&data, (64, 16, 8), &sigma_d, (6, 3, 1));
    let max_rel = got
        .data()
        .iter()
        .zip(want.iter())
        .map(|(a, b)| (a - b).abs() / b.abs())
        .fold(0.0f64, f64::max);

    let identity = bilateral_filter(&x, &params, WindowSpec::new(0, 0, 0));
    let identity_exact = identity.data() == &data[..];

    let elapsed = t0.elapsed();
    let pass = max_rel <= 1e-9 && identity_exact && elapsed < Duration::from_secs(10);
    report(
        3,
        "bilateral oracle equivalence",
        pass,
        &format!("max rel dev {max_rel:.2e}, identity window bit-exact: {identity_exact}"),
        elapsed,
    );
}

struct Study {
    summary: StudySummary,
    elapsed: Duration,
    _dir: tempfile::TempDir,
}

static STUDY: LazyLock<Study> = LazyLock::new(|| {
    let dir = tempfile::tempdir().expect("create study tempdir");
    let t0 = Instant::now();
    let summary = cmd_repro(&RunConfig::default(), dir.path()).expect("study runs");
    Study {
        summary,
        elapsed: t0.elapsed(),
        _dir: dir,
    }
});

fn golden() -> StudySummary {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/study_summary.json");
    let text = std::fs::read_to_string(path).expect("golden summary present");
    serde_json::from_str(&text).expect("golden summary parses")
}

#[test]
fn criterion_4_streak_and_bias_reduction() {
    let study = &*STUDY;
    let s = &study.summary;
    let gold = golden();

    let reduction_ok = s.af.roi_std <= 0.70 * s.uncorrected.roi_std;
    let bias_ok = s.af.roi_mean_abs_error <= s.uncorrected.roi_mean_abs_error;

    // Regression against the committed first verified run.
    let tol = 1e-6;
    let fields = [
        (s.uncorrected.roi_mean, gold.uncorrected.roi_mean),
        (s.uncorrected.roi_std, gold.uncorrected.roi_std),
        (s.ft.roi_mean, gold.ft.roi_mean),
        (s.ft.roi_std, gold.ft.roi_std),
        (s.af.roi_mean, gold.af.roi_mean),
        (s.af.roi_std, gold.af.roi_std),
        (s.uncorrected.nps_integral, gold.uncorrected.nps_integral),
        (s.ft.nps_integral, gold.ft.nps_integral),
        (s.af.nps_integral, gold.af.nps_integral),
        (
            s.roi_std_reduction_af_vs_uncorrected_percent,
            gold.roi_std_reduction_af_vs_uncorrected_percent,
        ),
    ];
    let golden_ok = fields.iter().all(|&(a, b)| rel_close(a, b, tol));

    let pass =
        reduction_ok && bias_ok && golden_ok && study.elapsed < Duration::from_secs(300);
    report(
        4,
        "streak/bias reduction",
        pass,
        &format!(
            "ROI std {:.4}→{:.4} ({:.1}% reduction, need ≥30%), |mean err| {:.5}→{:.5}, golden match: {golden_ok}",
            s.uncorrected.roi_std,
            s.af.roi_std,
            s.roi_std_reduction_af_vs_uncorrected_percent,
            s.uncorrected.roi_mean_abs_error,
            s.af.roi_mean_abs_error
        ),
        study.elapsed,
    );
}

#[test]
fn criterion_5_high_signal_passthrough() {
    let t0 = Instant::now();
    let mut cfg = RunConfig::default();
    cfg.noise.i0 = 2.0e6;

    let dir = tempfile::tempdir().unwrap();
    let phantom_path = dir.path().join("water.json");
    // Water-only cylinder: minimum counts ≈ 2e6·e^-4 ≈ 36.6k — no
    // starvation anywhere.
    std::fs::write(
        &phantom_path,
        r#"{"version":1,"name":"water","ellipses":[{"center":[0.0,0.0],"semi_axes":[10.0,10.0],"rotation_rad":0.0,"mu":0.2}],"wire":null}"#,
    )
    .unwrap();

    let sim = cmd_simulate(&phantom_path, &cfg, dir.path()).unwrap();
    let mut images = Vec::new();
    for method in [Method::None, Method::Af] {
        let corrected = cmd_correct(&sim.counts_noisy, method, &cfg, dir.path()).unwrap();
        let imgs = cmd_recon(&corrected, &cfg, dir.path(), Some(2..3), &method.to_string()).unwrap();
        images.push(read_image(&imgs[0]).unwrap());
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in images[1].data().iter().zip(images[0].data().iter()) {
        num += (a - b) * (a - b);
        den += b * b;
    }
    let rms_rel = (num / den).sqrt();
    let elapsed = t0.elapsed();
    let pass = rms_rel <= 0.01 && elapsed < Duration::from_secs(300);
    report(
        5,
        "high-signal passthrough",
        pass,
        &format!("AF vs uncorrected recon RMS relative diff {rms_rel:.2e} (≤ 1e-2)"),
        elapsed,
    );
}

#[test]
fn criterion_6_mtf_table_analog() {
    let study = &*STUDY;
    let s = &study.summary;
    let all_exist = [
        s.mtf_ft.f50, s.mtf_ft.f10, s.mtf_ft.f04,
        s.mtf_af.f50, s.mtf_af.f10, s.mtf_af.f04,
    ]
    .iter()
    .all(Option::is_some);
    let fmt = |x: Option<f64>| x.map_or("n/a".into(), |f| format!("{f:.2}"));
    // Ordering is documented, not asserted: the synthetic phantom cannot
    // reproduce the published absolute values.
    report(
        6,
        "MTF table analog",
        all_exist,
        &format!(
            "measured 50/10/4% — FT {}/{}/{} vs AF {}/{}/{} cy/cm; published reference FT {:?} AF {:?}; AF≥FT: {:?}",
            fmt(s.mtf_ft.f50), fmt(s.mtf_ft.f10), fmt(s.mtf_ft.f04),
            fmt(s.mtf_af.f50), fmt(s.mtf_af.f10), fmt(s.mtf_af.f04),
            s.mtf_reference_ft, s.mtf_reference_af, s.af_crossing_at_least_ft
        ),
        study.elapsed,
    );
}

#[test]
fn criterion_7_nps_ordering() {
    let study = &*STUDY;
    let s = &study.summary;
    let pass = s.af.nps_integral <= s.ft.nps_integral
        && s.ft.nps_integral <= s.uncorrected.nps_integral
        && study.elapsed < Duration::from_secs(300);
    report(
        7,
        "NPS ordering",
        pass,
        &format!(
            "NPS integral af {:.3e} ≤ ft {:.3e} ≤ uncorrected {:.3e}",
            s.af.nps_integral, s.ft.nps_integral, s.uncorrected.nps_integral
        ),
        study.elapsed,
    );
}

#[test]
fn criterion_8_metric_self_tests() {
    let t0 = Instant::now();

    // Gaussian point response: measured 50% crossing within 3% of the
    // closed-form value.
    let n = 128;
    let pitch = 0.05;
    let sigma_px = 2.0;
    let mut img = Image::filled(n, pitch, 0.0);
    for iy in 0..n {
        for ix in 0..n {
            let dx = ix as f64 - 64.0;
            let dy = iy as f64 - 64.0;
            img.data_mut()[iy * n + ix] =
                (-(dx * dx + dy * dy) / (2.0 * sigma_px * sigma_px)).exp();
        }
    }
    let res = mtf_from_wire(&img, [64.0, 64.0], pitch).unwrap();
    let sigma_cm = sigma_px * pitch;
    let analytic =
        ((2.0f64).ln() / (2.0 * std::f64::consts::PI.powi(2) * sigma_cm * sigma_cm)).sqrt();
    let measured = res.crossings.f50.expect("crossing exists");
    let mtf_rel = (measured - analytic).abs() / analytic;

    // White-noise NPS: 2-D integral within 10% of the sample variance.
    let patch_n = 64;
    let patches: Vec<Patch> = (0..64)
        .map(|k| {
            let mut rng = CellRng::from_seed(0xACCE_0008, k);
            Patch {
                width: patch_n,
                height: patch_n,
                data: (0..patch_n * patch_n).map(|_| rng.next_gaussian()).collect(),
            }
        })
        .collect();
    let all: Vec<f64> = patches.iter().flat_map(|p| p.data.iter().copied()).collect();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let var = all.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / all.len() as f64;
    let prof = nps_radial(&patches, pitch).unwrap();
    let integral = prof.integral_2d(1.0 / (patch_n as f64 * pitch));
    let parseval_rel = (integral - var).abs() / var;

    let elapsed = t0.elapsed();
    let pass = mtf_rel <= 0.03 && parseval_rel <= 0.10;
    report(
        8,
        "metric self-tests",
        pass,
        &format!(
            "Gaussian MTF50 {measured:.4} vs {analytic:.4} (rel {mtf_rel:.2e}); NPS integral {integral:.4} vs variance {var:.4} (rel {parseval_rel:.2e})"
        ),
        elapsed,
    );
}
