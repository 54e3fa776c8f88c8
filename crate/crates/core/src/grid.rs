//! Periodic rectangular grid on [-L1, L1) x [-L2, L2) and its dual.

use serde::{Deserialize, Serialize};

use crate::error::{NcError, Result};

/// Grid geometry. Samples live at x_i = -L + i*h with h = 2L/n, row-major
/// with the x1 index outermost: `values[i1 * n2 + i2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n1: usize,
    pub n2: usize,
    pub l1: f64,
    pub l2: f64,
}

impl GridSpec {
    pub fn new(n1: usize, n2: usize, l1: f64, l2: f64) -> Result<Self> {
        if n1 < 4 || n2 < 4 || n1 % 2 != 0 || n2 % 2 != 0 {
            return Err(NcError::Grid(format!(
                "grid dimensions must be even and >= 4, got {n1} x {n2}"
            )));
        }
        if !(l1 > 0.0) || !(l2 > 0.0) {
            return Err(NcError::Grid(format!("half-widths must be positive, got {l1}, {l2}")));
        }
        Ok(Self { n1, n2, l1, l2 })
    }

    /// Square grid, n points per axis on [-l, l)^2.
    pub fn square(n: usize, l: f64) -> Result<Self> {
        Self::new(n, n, l, l)
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn h1(&self) -> f64 {
        2.0 * self.l1 / self.n1 as f64
    }

    pub fn h2(&self) -> f64 {
        2.0 * self.l2 / self.n2 as f64
    }

    /// Quadrature cell area h1*h2.
    pub fn cell(&self) -> f64 {
        self.h1() * self.h2()
    }

    pub fn x1(&self, i: usize) -> f64 {
        -self.l1 + i as f64 * self.h1()
    }

    pub fn x2(&self, j: usize) -> f64 {
        -self.l2 + j as f64 * self.h2()
    }

    pub fn x1_axis(&self) -> Vec<f64> {
        (0..self.n1).map(|i| self.x1(i)).collect()
    }

    pub fn x2_axis(&self) -> Vec<f64> {
        (0..self.n2).map(|j| self.x2(j)).collect()
    }

    /// Spectral wavenumbers along axis 1 in FFT order; the Nyquist mode is
    /// zeroed so that the first derivative stays Hermitian and real-to-real.
    pub fn k1_fft(&self) -> Vec<f64> {
        fft_wavenumbers(self.n1, self.l1)
    }

    pub fn k2_fft(&self) -> Vec<f64> {
        fft_wavenumbers(self.n2, self.l2)
    }

    /// Dual grid carrying the Fourier transform: same point counts,
    /// half-width pi*n/(2L), spacing pi/L.
    pub fn dual(&self) -> GridSpec {
        GridSpec {
            n1: self.n1,
            n2: self.n2,
            l1: std::f64::consts::PI * self.n1 as f64 / (2.0 * self.l1),
            l2: std::f64::consts::PI * self.n2 as f64 / (2.0 * self.l2),
        }
    }

    pub fn same_geometry(&self, other: &GridSpec) -> bool {
        self.n1 == other.n1
            && self.n2 == other.n2
            && (self.l1 - other.l1).abs() <= 1e-12 * self.l1.abs().max(1.0)
            && (self.l2 - other.l2).abs() <= 1e-12 * self.l2.abs().max(1.0)
    }

    pub fn check_match(&self, other: &GridSpec, what: &str) -> Result<()> {
        if self.same_geometry(other) {
            Ok(())
        } else {
            Err(NcError::GridMismatch(format!(
                "{what}: {}x{} L=({},{}) vs {}x{} L=({},{})",
                self.n1, self.n2, self.l1, self.l2, other.n1, other.n2, other.l1, other.l2
            )))
        }
    }
}

fn fft_wavenumbers(n: usize, l: f64) -> Vec<f64> {
    let base = std::f64::consts::PI / l;
    (0..n)
        .map(|m| {
            if m < n / 2 {
                base * m as f64
            } else if m == n / 2 {
                0.0
            } else {
                base * (m as f64 - n as f64)
            }
        })
        .collect()
}
