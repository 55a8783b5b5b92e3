//! Property tests for the library invariants that hold on arbitrary
//! inputs, not just the hand-picked fixtures.

use proptest::prelude::*;

use lowsig::af::{bilateral_filter, positivity_map_scalar, vst_inverse_scalar, AdaptiveParams};
use lowsig::ft::{ft_lsc, FtConfig};
use lowsig::stats::{local_mean, local_std, window_indices};
use lowsig::{Dims, SinogramGrid, Stage, WindowSpec};

fn arb_grid(max_side: usize) -> impl Strategy<Value = SinogramGrid> {
    (1..=max_side, 1..=3usize, 1..=max_side).prop_flat_map(|(c, r, v)| {
        let dims = Dims::new(c, r, v);
        proptest::collection::vec(-1.0e4..1.0e4f64, dims.len())
            .prop_map(move |data| SinogramGrid::from_vec(dims, Stage::Counts, data))
    })
}

fn arb_window() -> impl Strategy<Value = WindowSpec> {
    (0..=3usize, 0..=2usize, 0..=2usize).prop_map(|(c, r, v)| WindowSpec::new(c, r, v))
}

proptest! {
    #[test]
    fn local_mean_bounded_by_input_range(grid in arb_grid(12), w in arb_window()) {
        let lo = grid.data().iter().cloned().fold(f64::MAX, f64::min);
        let hi = grid.data().iter().cloned().fold(f64::MIN, f64::max);
        let m = local_mean(&grid, w);
        for &x in m.data() {
            prop_assert!(x >= lo - 1e-9 && x <= hi + 1e-9);
        }
    }

    #[test]
    fn local_std_non_negative_and_zero_for_point_window(grid in arb_grid(10)) {
        let s = local_std(&grid, WindowSpec::new(1, 1, 1));
        for &x in s.data() {
            prop_assert!(x >= 0.0);
        }
        let point = local_std(&grid, WindowSpec::new(0, 0, 0));
        for &x in point.data() {
            prop_assert_eq!(x, 0.0);
        }
    }

    #[test]
    fn window_cardinality_on_interior_cells(w in arb_window()) {
        let dims = Dims::new(9, 7, 7);
        let center = (4, 3, 3);
        // Center is interior for every generated half-width.
        let idxs = window_indices(dims, center, w);
        prop_assert_eq!(idxs.len(), w.volume());
    }

    #[test]
    fn bilateral_is_convex_combination(grid in arb_grid(8), w in arb_window(),
                                        sd in 0.1..10.0f64, sr in 0.01..100.0f64) {
        let dims = grid.dims();
        let x = SinogramGrid::from_vec(dims, Stage::Vst, grid.data().to_vec());
        let params = AdaptiveParams {
            sigma_d: SinogramGrid::filled(dims, Stage::Counts, sd),
            sigma_r: SinogramGrid::filled(dims, Stage::Vst, sr),
        };
        let y = bilateral_filter(&x, &params, w);
        for v in 0..dims.views {
            for r in 0..dims.rows {
                for c in 0..dims.channels {
                    let idxs = window_indices(dims, (c, r, v), w);
                    let lo = idxs.iter().map(|&(i, _)| x.data()[i]).fold(f64::MAX, f64::min);
                    let hi = idxs.iter().map(|&(i, _)| x.data()[i]).fold(f64::MIN, f64::max);
                    let out = y.get(c, r, v);
                    prop_assert!(out >= lo - 1e-9 && out <= hi + 1e-9);
                }
            }
        }
    }

    #[test]
    fn positivity_map_outputs_positive_and_monotone(
        knee in 0.01..100.0f64,
        a in -1.0e3..1.0e3f64,
        b in -1.0e3..1.0e3f64,
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let ya = positivity_map_scalar(lo, knee);
        let yb = positivity_map_scalar(hi, knee);
        prop_assert!(ya > 0.0 && yb > 0.0);
        prop_assert!(ya <= yb);
    }

    #[test]
    fn vst_inverse_monotone_above_floor(y in 1.3..1.0e3f64, dy in 0.001..10.0f64) {
        prop_assert!(vst_inverse_scalar(y + dy) > vst_inverse_scalar(y));
    }

    #[test]
    fn ft_passthrough_band_is_bit_identical(grid in arb_grid(10)) {
        let cfg = FtConfig::default();
        let out = ft_lsc(&grid, &cfg);
        for (i, (&x, &y)) in grid.data().iter().zip(out.data().iter()).enumerate() {
            if (cfg.lower_th..=cfg.upper_th).contains(&x) {
                prop_assert!(x == y, "cell {i}: {x} changed to {y}");
            }
        }
    }

    #[test]
    fn grid_file_round_trip_f64(grid in arb_grid(8)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.grid");
        lowsig::io::write_grid(&path, &grid, lowsig::io::Dtype::F64).unwrap();
        let back = lowsig::io::read_grid(&path).unwrap();
        prop_assert_eq!(back.dims(), grid.dims());
        prop_assert_eq!(back.stage(), grid.stage());
        prop_assert_eq!(back.data(), grid.data());
    }
}
