//! End-to-end tests of the `lowsig` binary: exit codes, file contracts,
//! determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lowsig::grid::Stage;
use lowsig::io::read_grid;

fn lowsig() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lowsig"))
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(
        &path,
        r#"{
            "geometry": {"channels": 96, "pitch_cm": 0.25, "rows": 3, "views": 60, "fov_radius_cm": 12.0},
            "noise": {"i0": 2e4, "sigma_e": 5.0, "seed": 42},
            "recon": {"n": 96}
        }"#,
    )
    .unwrap();
    path
}

fn write_disc_phantom(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("disc.json");
    fs::write(
        &path,
        r#"{"version":1,"name":"disc","ellipses":[{"center":[0.0,0.0],"semi_axes":[8.0,8.0],"rotation_rad":0.0,"mu":0.2}],"wire":null}"#,
    )
    .unwrap();
    path
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn missing_phantom_file_is_a_data_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = run(lowsig()
        .args(["simulate", "--phantom", "no_such_phantom.json", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path()));
    assert!(!out.status.success());
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no_such_phantom.json"), "stderr was: {stderr}");
}

#[test]
fn unknown_method_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(lowsig()
        .args(["correct", "--input", "x.grid", "--method", "bogus", "--out"])
        .arg(dir.path()));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"geometry": {"channels": "many"}}"#).unwrap();
    let phantom = write_disc_phantom(dir.path());
    let out = run(lowsig()
        .args(["simulate", "--phantom"])
        .arg(&phantom)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path()));
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line"), "diagnostics should cite a location: {stderr}");
}

#[test]
fn simulate_writes_sized_grids_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let phantom = write_disc_phantom(dir.path());
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for out in [&out1, &out2] {
        let res = run(lowsig()
            .args(["simulate", "--phantom"])
            .arg(&phantom)
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(out));
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    // f32 grid body: channels*rows*views*4 bytes.
    let body = fs::metadata(out1.join("counts_noisy.grid")).unwrap();
    assert_eq!(body.len(), 96 * 3 * 60 * 4);
    assert!(out1.join("counts_noisy.grid.json").exists());
    assert!(out1.join("manifest.json").exists());
    // Same seed, same bytes.
    assert_eq!(
        fs::read(out1.join("counts_noisy.grid")).unwrap(),
        fs::read(out2.join("counts_noisy.grid")).unwrap()
    );
    // Different seed, different bytes.
    let out3 = dir.path().join("c");
    let res = run(lowsig()
        .args(["simulate", "--phantom"])
        .arg(&phantom)
        .arg("--config")
        .arg(&cfg)
        .args(["--seed", "43", "--out"])
        .arg(&out3));
    assert!(res.status.success());
    assert_ne!(
        fs::read(out1.join("counts_noisy.grid")).unwrap(),
        fs::read(out3.join("counts_noisy.grid")).unwrap()
    );
}

#[test]
fn correct_recon_metrics_chain_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = small_config(dir.path());
    let phantom = write_disc_phantom(dir.path());
    let out = dir.path().join("run");
    let res = run(lowsig()
        .args(["simulate", "--phantom"])
        .arg(&phantom)
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out));
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    for method in ["af", "ft", "none"] {
        let res = run(lowsig()
            .arg("correct")
            .arg("--input")
            .arg(out.join("counts_noisy.grid"))
            .args(["--method", method, "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(&out));
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        let grid = read_grid(&out.join(format!("counts_{method}.grid"))).unwrap();
        assert_eq!(grid.stage(), Stage::Counts);
        assert!(grid.data().iter().all(|&x| x > 0.0), "{method} output positive");
    }

    // Reconstruct one row of the af-corrected counts.
    let res = run(lowsig()
        .arg("recon")
        .arg("--input")
        .arg(out.join("counts_af.grid"))
        .args(["--rows", "1", "--tag", "af", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out));
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let img = out.join("image_af_row1.img");
    assert!(img.exists());
    assert_eq!(fs::metadata(&img).unwrap().len(), 96 * 96 * 4);

    // Rerun bit-identically.
    let out_b = dir.path().join("run_b");
    let res = run(lowsig()
        .arg("recon")
        .arg("--input")
        .arg(out.join("counts_af.grid"))
        .args(["--rows", "1", "--tag", "af", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out_b));
    assert!(res.status.success());
    assert_eq!(
        fs::read(&img).unwrap(),
        fs::read(out_b.join("image_af_row1.img")).unwrap()
    );

    // ROI metrics over the reconstructed image.
    let metrics_cfg = dir.path().join("metrics.json");
    fs::write(
        &metrics_cfg,
        r#"{
            "geometry": {"channels": 96, "pitch_cm": 0.25, "rows": 3, "views": 60, "fov_radius_cm": 12.0},
            "metrics": {"roi": {"shape": "disc", "center": [47.5, 47.5], "radius": 10.0}}
        }"#,
    )
    .unwrap();
    let res = run(lowsig()
        .arg("metrics")
        .arg("--images")
        .arg(&img)
        .arg("--config")
        .arg(&metrics_cfg)
        .arg("--out")
        .arg(&out));
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(out.join("roi_image_af_row1.csv").exists());
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("roi_mean"), "stdout: {stdout}");
}

#[test]
fn recon_rejects_out_of_range_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let phantom = write_disc_phantom(dir.path());
    let out = dir.path().join("run");
    let res = run(lowsig()
        .args(["simulate", "--phantom"])
        .arg(&phantom)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out));
    assert!(res.status.success());
    let res = run(lowsig()
        .arg("recon")
        .arg("--input")
        .arg(out.join("counts_noisy.grid"))
        .args(["--rows", "7", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out));
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn repro_small_study_is_bit_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(
        &cfg,
        r#"{
            "geometry": {"channels": 128, "pitch_cm": 0.1875, "rows": 3, "views": 180, "fov_radius_cm": 12.0},
            "noise": {"i0": 2e4, "sigma_e": 5.0, "seed": 7},
            "recon": {"n": 128}
        }"#,
    )
    .unwrap();
    let out1 = dir.path().join("r1");
    let out2 = dir.path().join("r2");
    for out in [&out1, &out2] {
        let res = run(lowsig().arg("repro").arg("--config").arg(&cfg).arg("--out").arg(out));
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    for file in ["summary.json", "summary.csv", "summary.txt"] {
        assert_eq!(
            fs::read(out1.join(file)).unwrap(),
            fs::read(out2.join(file)).unwrap(),
            "{file} differs between reruns"
        );
    }
    // The study writes every intermediate.
    assert!(out1.join("streak/counts_noisy.grid").exists());
    assert!(out1.join("streak/counts_af.grid").exists());
    assert!(out1.join("streak/image_af_row1.img").exists());
    assert!(out1.join("wire/mtf_crossings_af.csv").exists());
    assert!(out1.join("phantoms/water_bone.json").exists());
}

#[test]
fn threads_env_var_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let phantom = write_disc_phantom(dir.path());
    let out1 = dir.path().join("t1");
    let out2 = dir.path().join("t2");
    for (out, threads) in [(&out1, "1"), (&out2, "4")] {
        let res = run(lowsig()
            .env("LOWSIG_THREADS", threads)
            .args(["simulate", "--phantom"])
            .arg(&phantom)
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(out));
        assert!(res.status.success());
    }
    assert_eq!(
        fs::read(out1.join("counts_noisy.grid")).unwrap(),
        fs::read(out2.join("counts_noisy.grid")).unwrap()
    );
}
