//! Filtered backprojection sanity run.
//!
//! Reconstructs a noiseless water disc and checks that the recovered
//! attenuation matches the phantom, then reconstructs low-dose corrected
//! counts to show the negative-log path.
//!
//! ```bash
//! cargo run --release --example reconstruct
//! ```

use lowsig::metrics::{roi_stats, RoiSpec};
use lowsig::{
    add_noise, af_lsc, counts_from_projection, fbp, forward_project, neg_log, AfConfig, Geometry,
    NoiseModel, Phantom, ReconConfig,
};

fn main() -> lowsig::Result<()> {
    let phantom = Phantom::bundled("water_bone")?;
    let geometry = Geometry {
        channels: 256,
        pitch_cm: 24.0 / 256.0,
        rows: 3,
        views: 360,
        ..Geometry::default()
    };
    let recon_cfg = ReconConfig {
        n: 256,
        ..ReconConfig::default()
    };

    // Noiseless path: projection -> image.
    let proj = forward_project(&phantom, &geometry)?;
    let img = fbp(&proj, 1, &geometry, &recon_cfg)?;
    let (px, py) = img.pixel_of(-5.0, 0.0);
    let (mean, std) = roi_stats(
        &img,
        &RoiSpec::Disc {
            center: [px, py],
            radius: 1.5 / img.pitch_cm(),
        },
    )?;
    println!("noiseless water ROI: mean {mean:.5} /cm (target 0.2), std {std:.2e}");

    // Low-dose path: counts -> correction -> log -> image.
    let noise = NoiseModel {
        i0: 2.0e4,
        sigma_e: 5.0,
        seed: 42,
    };
    let noisy = add_noise(&counts_from_projection(&proj, noise.i0), &noise);
    let corrected = af_lsc(&noisy, &AfConfig::default());
    let p_hat = neg_log(&corrected, noise.i0)?;
    let img_ld = fbp(&p_hat, 1, &geometry, &recon_cfg)?;
    let (mean_ld, std_ld) = roi_stats(
        &img_ld,
        &RoiSpec::Disc {
            center: [px, py],
            radius: 1.5 / img.pitch_cm(),
        },
    )?;
    println!("low-dose corrected ROI: mean {mean_ld:.5} /cm, std {std_ld:.5}");

    lowsig::io::write_image(std::path::Path::new("out/reconstruct_example/water_bone.img"), &img_ld)?;
    println!("wrote out/reconstruct_example/water_bone.img");
    Ok(())
}
