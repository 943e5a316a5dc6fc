use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place unnormalized DFT over a `dims`-dimensional cube of side `n`,
/// stored row-major (last index fastest).
pub(crate) fn fft_cube(data: &mut [Complex64], n: usize, dims: usize, inverse: bool) {
    debug_assert_eq!(data.len(), n.pow(dims as u32));
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..dims {
        let stride = n.pow((dims - 1 - axis) as u32);
        let total = data.len();
        for start in 0..total {
            // visit each line once: its first element has index 0 along `axis`
            if !(start / stride).is_multiple_of(n) {
                continue;
            }
            for (i, slot) in line.iter_mut().enumerate() {
                *slot = data[start + i * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (i, v) in line.iter().enumerate() {
                data[start + i * stride] = *v;
            }
        }
    }
}

/// Signed wavenumber of DFT index `i` on `n` points; the Nyquist index maps
/// to `-n/2`.
#[inline]
pub(crate) fn wavenumber(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Largest wavenumber retained by the 2/3 dealiasing rule.
#[inline]
pub fn dealias_cutoff(n: usize) -> i64 {
    ((n - 1) / 3) as i64
}
