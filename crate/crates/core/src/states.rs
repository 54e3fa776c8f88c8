//! Grid states: construction, Fourier transform, dilation, translation,
//! random smooth test states and the on-disk state format.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NcError, Result};
use crate::fft::{fft_inplace, for_each_col, for_each_row};
use crate::grid::GridSpec;

const SQRT_2PI: f64 = 2.5066282746310002;

/// Complex field sampled on a [`GridSpec`]. Immutable by convention: every
/// operation returns a fresh state.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
    norm_cache: Option<f64>,
}

impl WaveFunction {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(NcError::Grid(format!(
                "value count {} does not match grid {}x{}",
                values.len(),
                grid.n1,
                grid.n2
            )));
        }
        let mut f = Self { grid, values, norm_cache: None };
        f.norm_cache = Some(f.compute_norm());
        Ok(f)
    }

    pub fn zero(grid: GridSpec) -> Self {
        Self { grid, values: vec![Complex64::default(); grid.len()], norm_cache: Some(0.0) }
    }

    /// Build from a pointwise function of (x1, x2).
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n1 {
            let x1 = grid.x1(i);
            for j in 0..grid.n2 {
                values.push(f(x1, grid.x2(j)));
            }
        }
        Self::new(grid, values).expect("length matches by construction")
    }

    fn compute_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s * self.grid.cell()).sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.norm_cache.unwrap_or_else(|| self.compute_norm())
    }

    pub fn norm_sq(&self) -> f64 {
        let n = self.norm();
        n * n
    }

    /// Discrete inner product h1*h2*sum f * conj(g).
    pub fn inner(&self, g: &WaveFunction) -> Result<Complex64> {
        self.grid.check_match(&g.grid, "inner product")?;
        let s: Complex64 = self.values.iter().zip(&g.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.grid.cell())
    }

    pub fn normalize(&self) -> Result<WaveFunction> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(NcError::Domain(format!("cannot normalize state with norm {n}")));
        }
        let inv = 1.0 / n;
        let values = self.values.iter().map(|v| v * inv).collect();
        Ok(WaveFunction { grid: self.grid, values, norm_cache: Some(1.0) })
    }

    pub fn require_normalized(&self, tol: f64) -> Result<()> {
        let defect = (self.norm() - 1.0).abs();
        if defect > tol {
            Err(NcError::NotNormalized(defect))
        } else {
            Ok(())
        }
    }

    /// Mass fraction within 4h of the domain edge; a proxy for aliasing risk.
    pub fn boundary_mass(&self) -> f64 {
        let g = &self.grid;
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let (m1, m2) = (4.min(g.n1 / 2), 4.min(g.n2 / 2));
        let mut edge = 0.0;
        for i in 0..g.n1 {
            for j in 0..g.n2 {
                if i < m1 || i >= g.n1 - m1 || j < m2 || j >= g.n2 - m2 {
                    edge += self.values[i * g.n2 + j].norm_sqr();
                }
            }
        }
        edge / total
    }

    pub fn scaled(&self, c: Complex64) -> WaveFunction {
        let values = self.values.iter().map(|v| c * v).collect();
        WaveFunction { grid: self.grid, values, norm_cache: self.norm_cache.map(|n| n * c.norm()) }
    }

    pub fn add_scaled(&self, c: Complex64, g: &WaveFunction) -> Result<WaveFunction> {
        self.grid.check_match(&g.grid, "state sum")?;
        let values = self.values.iter().zip(&g.values).map(|(a, b)| a + c * b).collect();
        WaveFunction::new(self.grid, values)
    }

    pub fn sub(&self, g: &WaveFunction) -> Result<WaveFunction> {
        self.add_scaled(Complex64::new(-1.0, 0.0), g)
    }
}

/// Gaussian (4/(pi^2 a b))^{1/4} exp(-(x1-x1_0)^2/a - (x2-x2_0)^2/b).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub a: f64,
    pub b: f64,
    pub x1_0: f64,
    pub x2_0: f64,
}

impl GaussianSpec {
    pub fn centered(a: f64, b: f64) -> Self {
        Self { a, b, x1_0: 0.0, x2_0: 0.0 }
    }

    /// Centers moved to the nearest grid points; makes translation
    /// covariance identities exact on the grid.
    pub fn snapped(&self, grid: &GridSpec) -> GaussianSpec {
        let snap = |x: f64, l: f64, h: f64| -l + ((x + l) / h).round() * h;
        GaussianSpec {
            a: self.a,
            b: self.b,
            x1_0: snap(self.x1_0, grid.l1, grid.h1()),
            x2_0: snap(self.x2_0, grid.l2, grid.h2()),
        }
    }
}

/// Sample the Gaussian on the grid. Widths must satisfy
/// 2h <= sqrt(a/2) <= L/4 per axis and the center must sit at least four
/// width units inside the domain; the centers are snapped to grid points.
pub fn gaussian(grid: &GridSpec, spec: &GaussianSpec) -> Result<WaveFunction> {
    if !(spec.a > 0.0) || !(spec.b > 0.0) {
        return Err(NcError::Domain(format!("gaussian widths must be positive: a={}, b={}", spec.a, spec.b)));
    }
    let spec = spec.snapped(grid);
    check_width(spec.a, spec.x1_0, grid.h1(), grid.l1, "x1")?;
    check_width(spec.b, spec.x2_0, grid.h2(), grid.l2, "x2")?;
    let c = (4.0 / (std::f64::consts::PI.powi(2) * spec.a * spec.b)).powf(0.25);
    Ok(WaveFunction::from_fn(*grid, |x1, x2| {
        let u = x1 - spec.x1_0;
        let v = x2 - spec.x2_0;
        Complex64::new(c * (-u * u / spec.a - v * v / spec.b).exp(), 0.0)
    }))
}

fn check_width(a: f64, x0: f64, h: f64, l: f64, axis: &str) -> Result<()> {
    let w = (a / 2.0).sqrt();
    if w < 2.0 * h {
        return Err(NcError::Resolution(format!(
            "{axis} width {w:.4e} under 2h = {:.4e}",
            2.0 * h
        )));
    }
    if w > l / 4.0 {
        return Err(NcError::Resolution(format!("{axis} width {w:.4e} over L/4 = {:.4e}", l / 4.0)));
    }
    if x0.abs() + 4.0 * w > l {
        return Err(NcError::Resolution(format!(
            "{axis} center {x0:.4} leaves under 4 widths of margin on L = {l}"
        )));
    }
    Ok(())
}

/// One axis of the unitary transform f~(xi) = (2pi)^{-1/2} int f e^{-i x xi} dx
/// on the symmetric grid: pre/post checkerboard phases reduce it to a plain
/// DFT, and the scale `step/sqrt(2pi)` makes the discrete map unitary
/// against the dual-grid quadrature.
fn fourier_axis(buf: &mut [Complex64], step: f64, inverse: bool) {
    let n = buf.len();
    for (j, c) in buf.iter_mut().enumerate() {
        if j % 2 == 1 {
            *c = -*c;
        }
    }
    fft_inplace(buf, inverse);
    // e^{-i pi n / 2} for even n is exactly +-1
    let corner = if n % 4 == 0 { 1.0 } else { -1.0 };
    let scale = step / SQRT_2PI * corner;
    for (k, c) in buf.iter_mut().enumerate() {
        let s = if k % 2 == 1 { -scale } else { scale };
        *c *= s;
    }
}

/// Fourier transform onto the dual grid.
pub fn fourier(f: &WaveFunction) -> WaveFunction {
    let g = f.grid;
    let mut v = f.values.clone();
    for_each_row(&mut v, &g, |row| fourier_axis(row, g.h2(), false));
    for_each_col(&mut v, &g, |col| fourier_axis(col, g.h1(), false));
    WaveFunction::new(g.dual(), v).expect("dual grid has the same point count")
}

/// Inverse of [`fourier`]: takes a state on a dual grid back to the primal.
pub fn inverse_fourier(ft: &WaveFunction) -> WaveFunction {
    let g = ft.grid;
    let mut v = ft.values.clone();
    for_each_row(&mut v, &g, |row| fourier_axis(row, g.h2(), true));
    for_each_col(&mut v, &g, |col| fourier_axis(col, g.h1(), true));
    WaveFunction::new(g.dual(), v).expect("dual grid has the same point count")
}

/// Dilation (D_s f)(x) = |s|^{-1} f(x/s), resampled by evaluating the
/// trigonometric interpolant of f at x/s. Points with |x/s| outside the
/// domain read zero; the resulting mass loss is guarded.
pub fn dilate(f: &WaveFunction, s: f64) -> Result<WaveFunction> {
    if s == 0.0 || !s.is_finite() {
        return Err(NcError::Domain(format!("dilation scale must be finite nonzero, got {s}")));
    }
    if s == 1.0 {
        return Ok(f.clone());
    }
    let g = f.grid;
    let mut v = f.values.clone();
    let m1 = dilation_matrix(g.n1, g.l1, s);
    let m2 = dilation_matrix(g.n2, g.l2, s);
    for_each_col(&mut v, &g, |col| apply_dense(&m1, col));
    for_each_row(&mut v, &g, |row| apply_dense(&m2, row));
    let amp = 1.0 / s.abs();
    for c in v.iter_mut() {
        *c *= amp;
    }
    let out = WaveFunction::new(g, v)?;
    let drift = (out.norm() - f.norm()).abs() / f.norm().max(1e-300);
    if drift > 1e-6 {
        return Err(NcError::Resolution(format!(
            "dilation by {s} loses mass off the grid (norm drift {drift:.3e})"
        )));
    }
    if out.boundary_mass() > 1e-9 {
        return Err(NcError::Resolution(format!(
            "dilation by {s} pushes mass to the boundary ({:.3e})",
            out.boundary_mass()
        )));
    }
    Ok(out)
}

/// Dense n x n map taking samples f(x_j) to interpolant values f(x_j / s).
/// Rows for |x_j / s| > L are zero.
fn dilation_matrix(n: usize, l: f64, s: f64) -> Vec<Complex64> {
    let h = 2.0 * l / n as f64;
    let base = std::f64::consts::PI / l;
    let inv_n = 1.0 / n as f64;
    let mut m = vec![Complex64::default(); n * n];
    for j in 0..n {
        let y = (-l + j as f64 * h) / s;
        if y.abs() > l {
            continue;
        }
        for k in 0..n {
            // FFT-order wavenumber, Nyquist zeroed (matches the derivative
            // convention; the dropped mode is negligible for smooth states)
            let km = if k < n / 2 {
                base * k as f64
            } else if k == n / 2 {
                0.0
            } else {
                base * (k as f64 - n as f64)
            };
            // DFT coefficients carry an implicit e^{-i k x_0} reference to
            // the first sample; shift the evaluation accordingly
            m[j * n + k] = Complex64::new(0.0, km * (y + l)).exp() * inv_n;
        }
    }
    m
}

/// buf <- M * DFT(buf), i.e. evaluate the interpolant rows of M.
fn apply_dense(m: &[Complex64], buf: &mut [Complex64]) {
    let n = buf.len();
    let mut hat = buf.to_vec();
    fft_inplace(&mut hat, false);
    for j in 0..n {
        let row = &m[j * n..(j + 1) * n];
        buf[j] = row.iter().zip(&hat).map(|(a, b)| a * b).sum();
    }
}

/// Phase-space translation f(x - x0) e^{i xi0 . x}. The spatial shift is
/// spectral (exact on trigonometric interpolants); the modulation is a
/// pointwise phase.
pub fn translate(f: &WaveFunction, x0: [f64; 2], xi0: [f64; 2]) -> Result<WaveFunction> {
    let g = f.grid;
    let mut v = f.values.clone();
    if x0[0] != 0.0 {
        let k = g.k1_fft();
        let scale = 1.0 / g.n1 as f64;
        for_each_col(&mut v, &g, |col| {
            fft_inplace(col, false);
            for (c, km) in col.iter_mut().zip(&k) {
                *c *= Complex64::new(0.0, -km * x0[0]).exp() * scale;
            }
            fft_inplace(col, true);
        });
    }
    if x0[1] != 0.0 {
        let k = g.k2_fft();
        let scale = 1.0 / g.n2 as f64;
        for_each_row(&mut v, &g, |row| {
            fft_inplace(row, false);
            for (c, km) in row.iter_mut().zip(&k) {
                *c *= Complex64::new(0.0, -km * x0[1]).exp() * scale;
            }
            fft_inplace(row, true);
        });
    }
    if xi0 != [0.0, 0.0] {
        for i in 0..g.n1 {
            let x1 = g.x1(i);
            for j in 0..g.n2 {
                let phase = xi0[0] * x1 + xi0[1] * g.x2(j);
                v[i * g.n2 + j] *= Complex64::new(0.0, phase).exp();
            }
        }
    }
    let out = WaveFunction::new(g, v)?;
    if out.boundary_mass() > 1e-9 {
        return Err(NcError::Resolution(format!(
            "translation by ({}, {}) pushes mass to the boundary ({:.3e})",
            x0[0],
            x0[1],
            out.boundary_mass()
        )));
    }
    Ok(out)
}

/// Hermite function values h_0..h_{deg}(x) (orthonormal on the line).
pub fn hermite_functions(deg: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(deg + 1);
    let h0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    h.push(h0);
    if deg >= 1 {
        h.push(std::f64::consts::SQRT_2 * x * h0);
    }
    for k in 1..deg {
        let next = ((2.0 / (k as f64 + 1.0)).sqrt() * x * h[k])
            - ((k as f64 / (k as f64 + 1.0)).sqrt() * h[k - 1]);
        h.push(next);
    }
    h
}

/// Random normalized superposition of 2D Hermite functions up to `deg`
/// per axis, with complex standard-normal coefficients. Deterministic in
/// the seed; Schwartz-class, so safely supported on L >= 12 grids.
pub fn random_smooth_state(grid: &GridSpec, deg: usize, seed: u64) -> WaveFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = (deg + 1) * (deg + 1);
    let coeffs: Vec<Complex64> = (0..dim)
        .map(|_| {
            Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
        })
        .collect();
    let h1: Vec<Vec<f64>> = (0..grid.n1).map(|i| hermite_functions(deg, grid.x1(i))).collect();
    let h2: Vec<Vec<f64>> = (0..grid.n2).map(|j| hermite_functions(deg, grid.x2(j))).collect();
    let mut values = vec![Complex64::default(); grid.len()];
    for i in 0..grid.n1 {
        for j in 0..grid.n2 {
            let mut acc = Complex64::default();
            for p in 0..=deg {
                let hp = h1[i][p];
                for q in 0..=deg {
                    acc += coeffs[p * (deg + 1) + q] * (hp * h2[j][q]);
                }
            }
            values[i * grid.n2 + j] = acc;
        }
    }
    WaveFunction::new(*grid, values)
        .expect("length matches")
        .normalize()
        .expect("random coefficients are almost surely nonzero")
}

/// 1D complex field on [-l, l), used by the entropy check and the
/// minisuperspace solver's separated factors.
#[derive(Debug, Clone, PartialEq)]
pub struct Wave1d {
    pub n: usize,
    pub l: f64,
    pub values: Vec<Complex64>,
}

impl Wave1d {
    pub fn new(n: usize, l: f64, values: Vec<Complex64>) -> Result<Self> {
        if n < 4 || n % 2 != 0 || values.len() != n {
            return Err(NcError::Grid(format!("bad 1d grid: n = {n}, len = {}", values.len())));
        }
        if !(l > 0.0) {
            return Err(NcError::Grid(format!("bad 1d half-width {l}")));
        }
        Ok(Self { n, l, values })
    }

    pub fn from_fn(n: usize, l: f64, mut f: impl FnMut(f64) -> Complex64) -> Result<Self> {
        let h = 2.0 * l / n as f64;
        Self::new(n, l, (0..n).map(|j| f(-l + j as f64 * h)).collect())
    }

    pub fn h(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.l + j as f64 * self.h()
    }

    pub fn norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s * self.h()).sqrt()
    }

    pub fn normalize(&self) -> Result<Wave1d> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(NcError::Domain(format!("cannot normalize 1d state with norm {n}")));
        }
        let inv = 1.0 / n;
        Wave1d::new(self.n, self.l, self.values.iter().map(|v| v * inv).collect())
    }

    /// Unitary 1D Fourier transform onto the dual grid of half-width
    /// pi*n/(2l).
    pub fn fourier(&self) -> Wave1d {
        let mut v = self.values.clone();
        fourier_axis(&mut v, self.h(), false);
        Wave1d {
            n: self.n,
            l: std::f64::consts::PI * self.n as f64 / (2.0 * self.l),
            values: v,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct StateHeader {
    n1: usize,
    n2: usize,
    #[serde(rename = "L1")]
    l1: f64,
    #[serde(rename = "L2")]
    l2: f64,
}

/// Write the state file: one JSON header line, then raw little-endian
/// (re, im) f64 pairs in row-major order.
pub fn write_state(path: &Path, f: &WaveFunction) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    let header = StateHeader { n1: f.grid.n1, n2: f.grid.n2, l1: f.grid.l1, l2: f.grid.l2 };
    let line = serde_json::to_string(&header).map_err(|e| NcError::Format(e.to_string()))?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    for v in &f.values {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_state(path: &Path) -> Result<WaveFunction> {
    let file = std::fs::File::open(path)?;
    let mut r = BufReader::new(file);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: StateHeader =
        serde_json::from_str(line.trim()).map_err(|e| NcError::Format(e.to_string()))?;
    let grid = GridSpec::new(header.n1, header.n2, header.l1, header.l2)?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != grid.len() * 16 {
        return Err(NcError::Format(format!(
            "payload holds {} bytes, expected {}",
            bytes.len(),
            grid.len() * 16
        )));
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    WaveFunction::new(grid, values)
}
