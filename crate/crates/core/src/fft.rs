//! Cached FFT plans and spectral derivatives on the 2D grid.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};

use crate::grid::GridSpec;

static PLANS: Lazy<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Shared plan for a forward (`inverse = false`) or inverse FFT of length n.
/// rustfft does not normalize; callers divide by n after a round trip.
pub fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = PLANS.lock().unwrap();
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

pub fn fft_inplace(buf: &mut [Complex64], inverse: bool) {
    plan(buf.len(), inverse).process(buf);
}

/// Apply `op` to every x2-row (contiguous) of the row-major field.
pub fn for_each_row(values: &mut [Complex64], grid: &GridSpec, mut op: impl FnMut(&mut [Complex64])) {
    for row in values.chunks_mut(grid.n2) {
        op(row);
    }
}

/// Apply `op` to every x1-column (strided) of the row-major field.
pub fn for_each_col(values: &mut [Complex64], grid: &GridSpec, mut op: impl FnMut(&mut [Complex64])) {
    let (n1, n2) = (grid.n1, grid.n2);
    let mut buf = vec![Complex64::default(); n1];
    for j in 0..n2 {
        for i in 0..n1 {
            buf[i] = values[i * n2 + j];
        }
        op(&mut buf);
        for i in 0..n1 {
            values[i * n2 + j] = buf[i];
        }
    }
}

/// Spectral partial derivative along x1 (axis = 1) or x2 (axis = 2).
pub fn spectral_derivative(values: &[Complex64], grid: &GridSpec, axis: u8) -> Vec<Complex64> {
    let mut out = values.to_vec();
    match axis {
        1 => {
            let k = grid.k1_fft();
            let scale = 1.0 / grid.n1 as f64;
            for_each_col(&mut out, grid, |col| {
                fft_inplace(col, false);
                for (c, km) in col.iter_mut().zip(&k) {
                    *c *= Complex64::new(0.0, *km);
                }
                fft_inplace(col, true);
                for c in col.iter_mut() {
                    *c *= scale;
                }
            });
        }
        2 => {
            let k = grid.k2_fft();
            let scale = 1.0 / grid.n2 as f64;
            for_each_row(&mut out, grid, |row| {
                fft_inplace(row, false);
                for (c, km) in row.iter_mut().zip(&k) {
                    *c *= Complex64::new(0.0, *km);
                }
                fft_inplace(row, true);
                for c in row.iter_mut() {
                    *c *= scale;
                }
            });
        }
        _ => panic!("axis must be 1 or 2"),
    }
    out
}
