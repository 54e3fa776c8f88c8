//! Short-time Fourier transform, the phase-space weight m, modulation norms,
//! and the reports tying the graph norms of the operator pairs to the
//! weighted-space norm they are all equivalent to.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::AlgebraParams;
use crate::error::{NcError, Result};
use crate::fft::{fft_inplace, for_each_col, for_each_row};
use crate::grid::GridSpec;
use crate::operators::{assemble, OperatorHandle};
use crate::states::{fourier, WaveFunction};
use crate::uncertainty::PairAlpha;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Window recorded with every report: equivalence constants are window
/// dependent, so the choice must travel with the numbers.
pub const DEFAULT_WINDOW: &str = "normalized standard gaussian";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeightKind {
    /// psi(x) = sqrt(1 + (x1 + E x1^2 / lambda)^2 + x2^2), configuration part.
    Psi,
    /// phi(omega) = sqrt(1 + 4 pi^2 |omega|^2), frequency part (xi = 2 pi omega).
    Phi,
    /// m = sqrt(psi^2 + phi^2), the full phase-space weight; m >= sqrt(2).
    M,
    /// Constant 1; turns the weighted norm into the plain L2 norm.
    One,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Weight {
    pub kind: WeightKind,
    pub params: AlgebraParams,
}

fn psi_sq(p: &AlgebraParams, x: [f64; 2]) -> f64 {
    let w = x[0] + p.e * x[0] * x[0] / p.lambda;
    1.0 + w * w + x[1] * x[1]
}

fn phi_sq(omega: [f64; 2]) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    1.0 + two_pi * two_pi * (omega[0] * omega[0] + omega[1] * omega[1])
}

pub fn weight_eval(w: &Weight, x: [f64; 2], omega: [f64; 2]) -> f64 {
    match w.kind {
        WeightKind::Psi => psi_sq(&w.params, x).sqrt(),
        WeightKind::Phi => phi_sq(omega).sqrt(),
        WeightKind::M => (psi_sq(&w.params, x) + phi_sq(omega) - 1.0 + 1.0).sqrt(),
        WeightKind::One => 1.0,
    }
}

/// V_g f sampled on the x-lattice (state grid downsampled by `stride`) times
/// the full FFT frequency lattice omega_k = k / (2 L). Samples are stored
/// row-major over (ix1, ix2, k1, k2) with k in FFT order.
#[derive(Debug, Clone)]
pub struct StftGrid {
    pub grid: GridSpec,
    pub stride: usize,
    pub samples: Vec<Complex64>,
}

impl StftGrid {
    pub fn nx1(&self) -> usize {
        self.grid.n1 / self.stride
    }

    pub fn nx2(&self) -> usize {
        self.grid.n2 / self.stride
    }

    /// Lattice point of the x-slice (i1, i2).
    pub fn x_point(&self, i1: usize, i2: usize) -> [f64; 2] {
        [
            self.grid.x1(i1 * self.stride),
            self.grid.x2(i2 * self.stride),
        ]
    }

    /// Signed frequency of FFT bin k along axis 1 or 2.
    pub fn omega(&self, axis: u8, k: usize) -> f64 {
        let (n, l) = if axis == 1 {
            (self.grid.n1, self.grid.l1)
        } else {
            (self.grid.n2, self.grid.l2)
        };
        let signed = if k < n / 2 { k as isize } else { k as isize - n as isize };
        signed as f64 / (2.0 * l)
    }

    pub fn slice(&self, i1: usize, i2: usize) -> &[Complex64] {
        let len = self.grid.len();
        let off = (i1 * self.nx2() + i2) * len;
        &self.samples[off..off + len]
    }

    /// Phase-space cell volume of one sample: x-lattice cell times the exact
    /// FFT frequency cell 1/(2 L1) * 1/(2 L2).
    pub fn cell(&self) -> f64 {
        let sx = (self.stride * self.stride) as f64 * self.grid.cell();
        sx / (4.0 * self.grid.l1 * self.grid.l2)
    }

    /// l2 norm of the samples under the cell quadrature; the discrete Moyal
    /// identity makes this ||f|| ||g||.
    pub fn norm(&self) -> f64 {
        let s: f64 = self.samples.iter().map(|z| z.norm_sqr()).sum();
        (s * self.cell()).sqrt()
    }
}

/// V_g f(x, omega) = integral f(t) conj(g(t - x)) e^{-2 pi i t omega} dt,
/// one shifted product and one 2D FFT per x-slice. g is taken as zero
/// outside the grid, which is what the coverage precondition licenses.
pub fn stft(f: &WaveFunction, g: &WaveFunction, stride: usize) -> Result<StftGrid> {
    f.grid.check_match(&g.grid, "stft window")?;
    if g.norm() == 0.0 {
        return Err(NcError::EmptyWindow);
    }
    let mass = f.boundary_mass();
    if mass > 1e-8 {
        return Err(NcError::Coverage(mass));
    }
    let grid = f.grid;
    if stride == 0 || grid.n1 % stride != 0 || grid.n2 % stride != 0 {
        return Err(NcError::Grid("stft stride must divide the grid".into()));
    }
    let (n1, n2) = (grid.n1, grid.n2);
    let len = grid.len();
    let (nx1, nx2) = (n1 / stride, n2 / stride);
    let amp = grid.cell();
    let mut samples = vec![Complex64::default(); nx1 * nx2 * len];
    let mut buf = vec![Complex64::default(); len];
    for i1 in 0..nx1 {
        let a1 = i1 * stride;
        for i2 in 0..nx2 {
            let a2 = i2 * stride;
            // product f(t) conj(g(t - x)): t_j - x_a = (j - a) h, which sits
            // at index j - a + n/2 of the window's grid; g vanishes off it.
            for j1 in 0..n1 {
                let g1 = j1 as isize - a1 as isize + (n1 / 2) as isize;
                for j2 in 0..n2 {
                    let g2 = j2 as isize - a2 as isize + (n2 / 2) as isize;
                    let idx = j1 * n2 + j2;
                    buf[idx] = if (0..n1 as isize).contains(&g1) && (0..n2 as isize).contains(&g2)
                    {
                        f.values[idx] * g.values[g1 as usize * n2 + g2 as usize].conj()
                    } else {
                        Complex64::default()
                    };
                }
            }
            for_each_row(&mut buf, &grid, |row| fft_inplace(row, false));
            for_each_col(&mut buf, &grid, |col| fft_inplace(col, false));
            // t starts at -L, so bin k carries the phase e^{2 pi i L omega_k}
            // = (-1)^k per axis.
            let out = &mut samples[(i1 * nx2 + i2) * len..][..len];
            for k1 in 0..n1 {
                for k2 in 0..n2 {
                    let sign = if (k1 + k2) % 2 == 0 { 1.0 } else { -1.0 };
                    out[k1 * n2 + k2] = buf[k1 * n2 + k2] * (amp * sign);
                }
            }
        }
    }
    Ok(StftGrid { grid, stride, samples })
}

/// ( sum |V_g f|^2 m^2 cell )^{1/2}, the discrete M^2_m norm.
pub fn modulation_norm(
    f: &WaveFunction,
    g: &WaveFunction,
    w: &Weight,
    stride: usize,
) -> Result<f64> {
    let v = stft(f, g, stride)?;
    Ok(weighted_norm(&v, w))
}

pub fn weighted_norm(v: &StftGrid, w: &Weight) -> f64 {
    let (n1, n2) = (v.grid.n1, v.grid.n2);
    let mut acc = 0.0;
    for i1 in 0..v.nx1() {
        for i2 in 0..v.nx2() {
            let x = v.x_point(i1, i2);
            let s = v.slice(i1, i2);
            for k1 in 0..n1 {
                let o1 = v.omega(1, k1);
                for k2 in 0..n2 {
                    let m = weight_eval(w, x, [o1, v.omega(2, k2)]);
                    acc += s[k1 * n2 + k2].norm_sqr() * m * m;
                }
            }
        }
    }
    (acc * v.cell()).sqrt()
}

/// Normalized standard Gaussian window on the grid.
pub fn default_window(grid: &GridSpec) -> Result<WaveFunction> {
    let c = 1.0 / std::f64::consts::PI.sqrt();
    let g = WaveFunction::from_fn(*grid, |x1, x2| {
        Complex64::new(c * (-(x1 * x1 + x2 * x2) / 2.0).exp(), 0.0)
    });
    Ok(g)
}

/// Pointwise bounds of the p2 configuration factor against the weight's:
/// rho(x1) = ((eta/2mu) x1 - F x1^2)^2 / (x1 + E x1^2 / lambda)^2 over the
/// grid's x1 range. Finite as long as the zero -lambda/E of the denominator
/// lies off the grid; at x1 = 0 both vanish and the limit is (eta/2mu)^2.
fn p2_ratio_bounds(params: &AlgebraParams, grid: &GridSpec) -> (f64, f64) {
    let base = params.eta / (2.0 * params.mu);
    let mut lo = base * base;
    let mut hi = base * base;
    for &x1 in &grid.x1_axis() {
        let den = x1 + params.e * x1 * x1 / params.lambda;
        if den.abs() < 1e-12 {
            continue;
        }
        let num = base * x1 - params.f * x1 * x1;
        let r = (num / den) * (num / den);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (lo, hi)
}

/// Sandwich constants K, C with K^2 ||f||_B^2 <= ||f||_alpha^2 <= C ||f||_B^2
/// for real f. The (Q1,Q2) pair carries the triangle-inequality constants
/// C = max{2 lambda^2, theta^2/(2 lambda^2), 1}, K = min{|lambda|,
/// |theta/(2 lambda)|, 1}; the other pairs are derived the same way, with mu
/// and eta/(2 mu) in place of lambda and theta/(2 lambda), and the p2
/// quadratic factor bounded pointwise against the weight's over the grid.
pub fn sandwich_constants(
    alpha: PairAlpha,
    params: &AlgebraParams,
    grid: &GridSpec,
) -> (f64, f64) {
    let l2 = params.lambda * params.lambda;
    let tq = params.theta / (2.0 * params.lambda);
    let m2 = params.mu * params.mu;
    let eq = params.eta / (2.0 * params.mu);
    let (p2_lo, p2_hi) = p2_ratio_bounds(params, grid);
    let (k, c) = match alpha {
        PairAlpha::Q1Q2 => (
            params.lambda.abs().min(tq.abs()).min(1.0),
            (2.0 * l2).max(tq * tq * 2.0).max(1.0),
        ),
        PairAlpha::P1P2 => (
            params.mu.abs().min(eq.abs()).min(1.0).min(p2_lo.sqrt()),
            (2.0 * m2).max(eq * eq * 2.0).max(1.0).max(2.0 * p2_hi),
        ),
        PairAlpha::Q1P1 => (
            params
                .lambda
                .abs()
                .min(tq.abs())
                .min(params.mu.abs())
                .min(eq.abs())
                .min(1.0),
            (2.0 * l2)
                .max(tq * tq * 2.0)
                .max(2.0 * m2)
                .max(eq * eq * 2.0)
                .max(1.0),
        ),
        PairAlpha::Q2P2 => (
            params
                .lambda
                .abs()
                .min(tq.abs())
                .min(params.mu.abs())
                .min(1.0)
                .min(p2_lo.sqrt()),
            (2.0 * l2)
                .max(tq * tq * 2.0)
                .max(2.0 * m2)
                .max(1.0)
                .max(2.0 * p2_hi),
        ),
    };
    (k, c)
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaNormRow {
    pub alpha: PairAlpha,
    pub norm_alpha_sq: f64,
    pub k: f64,
    pub c: f64,
    pub sandwich_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormEquivalenceReport {
    pub rows: Vec<AlphaNormRow>,
    pub norm_b_sq: f64,
    pub norm_mm: f64,
    pub mm_over_b: f64,
    pub real_input: bool,
    pub window: &'static str,
}

fn graph_norm_sq(
    alpha: PairAlpha,
    params: &AlgebraParams,
    f: &WaveFunction,
) -> Result<f64> {
    let u = assemble(
        crate::algebra::OperatorSymbol::Base(alpha.u()),
        *params,
        f.grid,
    )?;
    let v = assemble(
        crate::algebra::OperatorSymbol::Base(alpha.v()),
        *params,
        f.grid,
    )?;
    let uf = OperatorHandle::apply(&u, f)?;
    let vf = OperatorHandle::apply(&v, f)?;
    Ok(2.0 * f.norm_sq() + uf.norm_sq() + vf.norm_sq())
}

/// ||f||_B^2 = int (1 + (x1 + E x1^2/lambda)^2 + x2^2) |f|^2
///           + int (1 + |xi|^2) |f~|^2, with the unitary transform so that
/// the first "1" and the second "1" each contribute ||f||^2.
pub fn b_norm_sq(params: &AlgebraParams, f: &WaveFunction) -> f64 {
    let grid = &f.grid;
    let mut acc = 0.0;
    for i1 in 0..grid.n1 {
        let x1 = grid.x1(i1);
        let w1 = x1 + params.e * x1 * x1 / params.lambda;
        for i2 in 0..grid.n2 {
            let x2 = grid.x2(i2);
            acc += (1.0 + w1 * w1 + x2 * x2) * f.values[i1 * grid.n2 + i2].norm_sqr();
        }
    }
    acc *= grid.cell();
    let ft = fourier(f);
    let dg = &ft.grid;
    let mut facc = 0.0;
    for i1 in 0..dg.n1 {
        let xi1 = dg.x1(i1);
        for i2 in 0..dg.n2 {
            let xi2 = dg.x2(i2);
            facc += (1.0 + xi1 * xi1 + xi2 * xi2) * ft.values[i1 * dg.n2 + i2].norm_sqr();
        }
    }
    acc + facc * dg.cell()
}

pub fn norm_equivalence_report(
    f: &WaveFunction,
    params: &AlgebraParams,
) -> Result<NormEquivalenceReport> {
    let peak = f
        .values
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max);
    let imag = f
        .values
        .iter()
        .map(|z| z.im.abs())
        .fold(0.0_f64, f64::max);
    let real_input = imag <= 1e-12 * peak.max(1e-300);
    let norm_b_sq = b_norm_sq(params, f);
    let mut rows = Vec::new();
    for alpha in PairAlpha::ALL {
        let na = graph_norm_sq(alpha, params, f)?;
        let (k, c) = sandwich_constants(alpha, params, &f.grid);
        let ok = k * k * norm_b_sq <= na * (1.0 + 1e-12) && na <= c * norm_b_sq * (1.0 + 1e-12);
        rows.push(AlphaNormRow {
            alpha,
            norm_alpha_sq: na,
            k,
            c,
            sandwich_ok: ok,
        });
    }
    let g = default_window(&f.grid)?;
    let w = Weight {
        kind: WeightKind::M,
        params: *params,
    };
    let norm_mm = modulation_norm(f, &g, &w, 2)?;
    let mm_over_b = norm_mm / norm_b_sq.sqrt();
    Ok(NormEquivalenceReport {
        rows,
        norm_b_sq,
        norm_mm,
        mm_over_b,
        real_input,
        window: DEFAULT_WINDOW,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRow {
    pub r: f64,
    pub min_m: f64,
    pub bound: f64,
    pub sup_inv_m: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightChecks {
    /// Empirical moderateness constant over the sampled pairs, and the same
    /// with twice the sample count; both finite and close = stable.
    pub moderate_c: f64,
    pub moderate_c_doubled: f64,
    pub decay: Vec<DecayRow>,
}

fn m_of(params: &AlgebraParams, z: [f64; 4]) -> f64 {
    // z mixes x with xi; the weight's frequency part is written in omega,
    // xi = 2 pi omega.
    let two_pi = 2.0 * std::f64::consts::PI;
    let w = Weight {
        kind: WeightKind::M,
        params: *params,
    };
    weight_eval(&w, [z[0], z[1]], [z[2] / two_pi, z[3] / two_pi])
}

fn v_poly(params: &AlgebraParams, z: [f64; 4]) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    1.0 + psi_sq(params, [z[0], z[1]]).sqrt() + phi_sq([z[2] / two_pi, z[3] / two_pi]).sqrt()
}

fn moderate_constant(params: &AlgebraParams, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c: f64 = 0.0;
    for _ in 0..samples {
        let mut z = [0.0; 4];
        let mut dz = [0.0; 4];
        for i in 0..4 {
            z[i] = rng.gen_range(-10.0..10.0);
            dz[i] = rng.gen_range(-10.0..10.0);
        }
        let sum = [z[0] + dz[0], z[1] + dz[1], z[2] + dz[2], z[3] + dz[3]];
        c = c.max(m_of(params, sum) / (m_of(params, z) * v_poly(params, dz)));
    }
    c
}

/// min of m over the sphere |z| = r in (x, xi) coordinates, by a dense
/// hyperspherical angle sweep.
fn sphere_min_m(params: &AlgebraParams, r: f64, steps: usize) -> f64 {
    let pi = std::f64::consts::PI;
    let mut best = f64::INFINITY;
    for ia in 0..=steps {
        let a = pi * ia as f64 / steps as f64;
        let (sa, ca) = a.sin_cos();
        for ib in 0..=steps {
            let b = pi * ib as f64 / steps as f64;
            let (sb, cb) = b.sin_cos();
            for ic in 0..2 * steps {
                let g = pi * ic as f64 / steps as f64;
                let (sg, cg) = g.sin_cos();
                let z = [r * ca, r * sa * cb, r * sa * sb * cg, r * sa * sb * sg];
                best = best.min(m_of(params, z));
            }
        }
    }
    best
}

/// Moderateness sampling plus the large-|z| lower bound on m: for E != 0 and
/// R >= 2 lambda / E, min_{|z| = R} m >= sqrt(R^2 + 2 - 27 lambda^2 /
/// (16 E^2)); for E = 0 the quadratic term is absent and the isotropic bound
/// sqrt couples only the worst x1 dip, which vanishes: m >= sqrt(... R^2 + 2)
/// fails only through the (x1 + E x1^2/lambda) dip, so at E = 0 the bound is
/// exact.
pub fn weight_checks(params: &AlgebraParams, r_schedule: &[f64]) -> Result<WeightChecks> {
    let moderate_c = moderate_constant(params, 4000, 11);
    let moderate_c_doubled = moderate_constant(params, 8000, 11);
    let mut decay = Vec::new();
    for &r in r_schedule {
        let bound_sq = if params.e == 0.0 {
            r * r + 2.0
        } else {
            if r < 2.0 * params.lambda / params.e.abs() {
                return Err(NcError::Domain(format!(
                    "decay bound needs R >= 2 lambda / E, got R = {r}"
                )));
            }
            r * r + 2.0 - 27.0 * params.lambda * params.lambda / (16.0 * params.e * params.e)
        };
        if bound_sq <= 0.0 {
            return Err(NcError::Domain("decay bound degenerate at this R".into()));
        }
        let min_m = sphere_min_m(params, r, 48);
        let bound = bound_sq.sqrt();
        decay.push(DecayRow {
            r,
            min_m,
            bound,
            sup_inv_m: 1.0 / min_m,
            holds: min_m >= bound,
        });
    }
    Ok(WeightChecks {
        moderate_c,
        moderate_c_doubled,
        decay,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::derive_constants;
    use crate::states::{gaussian, random_smooth_state, translate, GaussianSpec};

    fn grid64() -> GridSpec {
        GridSpec::new(64, 64, 12.0, 12.0).unwrap()
    }

    #[test]
    fn weight_point_values() {
        let p = derive_constants(0.2, 0.2, 0.1, None).unwrap();
        let undeformed = AlgebraParams {
            e: 0.0,
            lambda: 1.0,
            ..p
        };
        let m = Weight {
            kind: WeightKind::M,
            params: undeformed,
        };
        assert!((weight_eval(&m, [0.0, 0.0], [0.0, 0.0]) - 2.0_f64.sqrt()).abs() < 1e-14);
        let psi = Weight {
            kind: WeightKind::Psi,
            params: undeformed,
        };
        assert!((weight_eval(&psi, [1.0, 0.0], [0.0, 0.0]) - 2.0_f64.sqrt()).abs() < 1e-14);
        let psi_def = Weight {
            kind: WeightKind::Psi,
            params: p,
        };
        let w = 1.0 + p.e / p.lambda;
        let expect = (1.0 + w * w).sqrt();
        assert!((weight_eval(&psi_def, [1.0, 0.0], [0.0, 0.0]) - expect).abs() < 1e-14);
        assert!((expect - 1.4280).abs() < 1e-3);
    }

    #[test]
    fn stft_gaussian_peaks_at_origin() {
        let grid = grid64();
        let f = gaussian(&grid, &GaussianSpec::centered(2.0, 2.0)).unwrap();
        let g = default_window(&grid).unwrap();
        let v = stft(&f, &g, 2).unwrap();
        let mut best = (0.0, 0, 0, 0, 0);
        for i1 in 0..v.nx1() {
            for i2 in 0..v.nx2() {
                let s = v.slice(i1, i2);
                for k1 in 0..grid.n1 {
                    for k2 in 0..grid.n2 {
                        let a = s[k1 * grid.n2 + k2].norm();
                        if a > best.0 {
                            best = (a, i1, i2, k1, k2);
                        }
                    }
                }
            }
        }
        let x = v.x_point(best.1, best.2);
        assert!(x[0].abs() <= grid.h1() * 2.0 && x[1].abs() <= grid.h2() * 2.0);
        assert!(v.omega(1, best.3).abs() <= 1.0 / (2.0 * grid.l1) + 1e-15);
        assert!(v.omega(2, best.4).abs() <= 1.0 / (2.0 * grid.l2) + 1e-15);
    }

    #[test]
    fn moyal_identity() {
        let grid = grid64();
        let g = default_window(&grid).unwrap();
        let f = gaussian(&grid, &GaussianSpec::centered(2.0, 1.5)).unwrap();
        let v = stft(&f, &g, 2).unwrap();
        let rel = (v.norm() - f.norm() * g.norm()).abs() / (f.norm() * g.norm());
        assert!(rel < 1e-6, "moyal defect {rel}");
        for seed in 0..3 {
            let f = random_smooth_state(&grid, 3, 100 + seed);
            let v = stft(&f, &g, 2).unwrap();
            let rel = (v.norm() - f.norm() * g.norm()).abs() / (f.norm() * g.norm());
            assert!(rel < 1e-6, "moyal defect {rel} seed {seed}");
        }
    }

    #[test]
    fn stft_translation_covariance() {
        let grid = grid64();
        let g = default_window(&grid).unwrap();
        let f = gaussian(&grid, &GaussianSpec::centered(2.0, 2.0)).unwrap();
        // shift by two lattice cells so slices align exactly
        let x0 = [4.0 * grid.h1(), 0.0];
        let ft = translate(&f, x0, [0.0, 0.0]).unwrap();
        let v = stft(&f, &g, 2).unwrap();
        let vt = stft(&ft, &g, 2).unwrap();
        let mut worst = 0.0_f64;
        let shift = 2; // x0 / (stride * h1)
        for i1 in 0..v.nx1() - shift {
            for i2 in 0..v.nx2() {
                let a = v.slice(i1, i2);
                let b = vt.slice(i1 + shift, i2);
                for k in 0..grid.len() {
                    worst = worst.max((a[k].norm() - b[k].norm()).abs());
                }
            }
        }
        let peak = v.samples.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        assert!(worst / peak < 1e-6, "covariance defect {}", worst / peak);
    }

    #[test]
    fn modulation_norm_flat_weight_is_l2() {
        let grid = grid64();
        let g = default_window(&grid).unwrap();
        let f = gaussian(&grid, &GaussianSpec::centered(2.0, 2.0)).unwrap();
        let p = derive_constants(0.2, 0.2, 0.1, None).unwrap();
        let one = Weight {
            kind: WeightKind::One,
            params: p,
        };
        let n = modulation_norm(&f, &g, &one, 2).unwrap();
        let rel = (n - f.norm() * g.norm()).abs() / (f.norm() * g.norm());
        assert!(rel < 1e-6, "flat-weight defect {rel}");
        let m = Weight {
            kind: WeightKind::M,
            params: p,
        };
        let nm = modulation_norm(&f, &g, &m, 2).unwrap();
        assert!(nm >= 2.0_f64.sqrt() * f.norm() * g.norm());
    }

    #[test]
    fn modulation_norm_grows_with_dilation() {
        let grid = grid64();
        let g = default_window(&grid).unwrap();
        let p = derive_constants(0.2, 0.2, 0.1, None).unwrap();
        let m = Weight {
            kind: WeightKind::M,
            params: p,
        };
        // widening Gaussians: the psi moment grows without bound
        let mut last = 0.0;
        for &a in &[2.0, 4.0, 8.0] {
            let f = gaussian(&grid, &GaussianSpec::centered(a, a))
                .unwrap()
                .normalize()
                .unwrap();
            let n = modulation_norm(&f, &g, &m, 2).unwrap();
            assert!(n > last, "norm not growing at a = {a}");
            last = n;
        }
    }

    #[test]
    fn sandwich_holds_for_real_states() {
        let grid = grid64();
        let p = derive_constants(0.2, 0.2, 0.1, None).unwrap();
        let f = gaussian(&grid, &GaussianSpec::centered(2.0, 2.0)).unwrap();
        let rep = norm_equivalence_report(&f, &p).unwrap();
        assert!(rep.real_input);
        for row in &rep.rows {
            assert!(
                row.sandwich_ok,
                "sandwich fails for {:?}: k = {}, c = {}, alpha = {}, b = {}",
                row.alpha, row.k, row.c, row.norm_alpha_sq, rep.norm_b_sq
            );
        }
        assert!(rep.norm_mm.is_finite() && rep.norm_mm > 0.0);
    }

    #[test]
    fn undeformed_graph_norm_equals_b_norm() {
        // lambda = mu = 1, E = F = 0, theta = eta = 2 makes every factor of
        // the mixed pairs coincide with a weight factor. This parameter set
        // is outside the closure domain and exercises only the norms.
        let p = AlgebraParams {
            theta: 2.0,
            eta: 2.0,
            epsilon: 0.0,
            xi: 0.0,
            lambda: 1.0,
            mu: 1.0,
            e: 0.0,
            f: 0.0,
        };
        let grid = grid64();
        let f = gaussian(&grid, &GaussianSpec::centered(2.0, 1.5)).unwrap();
        let b = b_norm_sq(&p, &f);
        for alpha in [PairAlpha::Q1P1, PairAlpha::Q2P2] {
            let na = graph_norm_sq(alpha, &p, &f).unwrap();
            assert!(
                (na - b).abs() / b < 1e-10,
                "{:?}: alpha {} vs b {}",
                alpha,
                na,
                b
            );
        }
    }

    #[test]
    fn weight_decay_bound_on_schedule() {
        let p = derive_constants(0.2, 0.2, 0.1, None).unwrap();
        let r0 = 2.0 * p.lambda / p.e;
        let checks = weight_checks(&p, &[r0, 2.0 * r0, 4.0 * r0]).unwrap();
        let mut last_sup = f64::INFINITY;
        for row in &checks.decay {
            assert!(row.holds, "bound fails at R = {}", row.r);
            assert!(row.sup_inv_m < last_sup, "sup 1/m not decreasing");
            last_sup = row.sup_inv_m;
        }
        assert!(checks.moderate_c.is_finite() && checks.moderate_c > 0.0);
        assert!(checks.moderate_c_doubled <= 1.5 * checks.moderate_c);
        assert!(checks.moderate_c_doubled >= checks.moderate_c);
    }
}
