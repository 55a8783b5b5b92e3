//! Radially averaged noise power spectrum of a flat-region ensemble.
//!
//! Cuts 32 patches from the uniform water region of a low-dose
//! reconstruction for each correction method and prints the NPS totals
//! (the 2-D integral approximates the noise variance) plus a few profile
//! bins. Also verifies the Parseval relation on synthetic white noise.
//!
//! ```bash
//! cargo run --release --example noise_nps
//! ```

use lowsig::commands::{study_nps_centers, STUDY_NPS_PATCH};
use lowsig::metrics::{nps_radial, Patch};
use lowsig::sim::rng::CellRng;
use lowsig::{
    add_noise, af_lsc, counts_from_projection, fbp, forward_project, ft_lsc, neg_log,
    neg_log_clamped, AfConfig, FtConfig, Geometry, NoiseModel, Phantom, ReconConfig,
};

fn main() -> lowsig::Result<()> {
    // White-noise self check first: integral of the NPS ~ variance.
    let n = 64;
    let pitch = 0.05;
    let patches: Vec<Patch> = (0..32)
        .map(|k| {
            let mut rng = CellRng::from_seed(1234, k);
            Patch {
                width: n,
                height: n,
                data: (0..n * n).map(|_| rng.next_gaussian()).collect(),
            }
        })
        .collect();
    let prof = nps_radial(&patches, pitch)?;
    println!(
        "white noise: NPS integral {:.4} vs unit variance (Parseval check)",
        prof.integral_2d(1.0 / (n as f64 * pitch))
    );

    // Now the imaging chain.
    let phantom = Phantom::bundled("water_bone")?;
    let geometry = Geometry::default();
    let noise = NoiseModel {
        i0: 2.0e4,
        sigma_e: 5.0,
        seed: 42,
    };
    let proj = forward_project(&phantom, &geometry)?;
    let noisy = add_noise(&counts_from_projection(&proj, noise.i0), &noise);

    println!("flat-region NPS by method (32 patches of {STUDY_NPS_PATCH}x{STUDY_NPS_PATCH}):");
    for method in ["uncorrected", "ft", "af"] {
        let p_hat = match method {
            "uncorrected" => neg_log_clamped(&noisy, noise.i0, 1e-3),
            "ft" => neg_log(&ft_lsc(&noisy, &FtConfig::default()), noise.i0)?,
            _ => neg_log(&af_lsc(&noisy, &AfConfig::default()), noise.i0)?,
        };
        let img = fbp(&p_hat, 2, &geometry, &ReconConfig::default())?;
        let patches: Vec<Patch> = study_nps_centers(&img)
            .iter()
            .map(|&[cx, cy]| {
                Patch::from_image(
                    &img,
                    cx - STUDY_NPS_PATCH / 2,
                    cy - STUDY_NPS_PATCH / 2,
                    STUDY_NPS_PATCH,
                    STUDY_NPS_PATCH,
                )
            })
            .collect::<lowsig::Result<_>>()?;
        let prof = nps_radial(&patches, img.pitch_cm())?;
        let step = 1.0 / (STUDY_NPS_PATCH as f64 * img.pitch_cm());
        let head: Vec<String> = prof
            .values
            .iter()
            .take(6)
            .map(|v| format!("{v:.2e}"))
            .collect();
        println!(
            "  {method:<12} integral {:.3e}   first bins [{}]",
            prof.integral_2d(step),
            head.join(", ")
        );
    }
    Ok(())
}
