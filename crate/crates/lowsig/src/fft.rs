//! Small FFT helpers shared by the reconstructor and the metrics.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Unnormalized forward 2-D DFT of a row-major real array.
pub fn dft2_forward(data: &[f64], width: usize, height: usize) -> Vec<Complex<f64>> {
    assert_eq!(data.len(), width * height);
    let mut planner = FftPlanner::new();
    let fft_row = planner.plan_fft_forward(width);
    let fft_col = planner.plan_fft_forward(height);

    let mut buf: Vec<Complex<f64>> = data.iter().map(|&x| Complex::new(x, 0.0)).collect();
    for row in buf.chunks_mut(width) {
        fft_row.process(row);
    }
    let mut col = vec![Complex::new(0.0, 0.0); height];
    for x in 0..width {
        for y in 0..height {
            col[y] = buf[y * width + x];
        }
        fft_col.process(&mut col);
        for y in 0..height {
            buf[y * width + x] = col[y];
        }
    }
    buf
}

/// Signed DFT frequency index: k for k <= n/2, k - n above.
#[inline]
pub fn signed_freq_index(k: usize, n: usize) -> isize {
    if k <= n / 2 {
        k as isize
    } else {
        k as isize - n as isize
    }
}
