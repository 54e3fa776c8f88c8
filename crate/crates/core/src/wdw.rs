//! Reduced 1D minisuperspace wave equation: effective potentials, zero-energy
//! integration of -phi'' + V phi = 0, stable-minimum search, and envelope
//! decay fits that separate the normalizable case from the non-normalizable
//! one.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::AlgebraParams;
use crate::error::{NcError, Result};
use crate::grid::GridSpec;
use crate::states::WaveFunction;

const SQRT3: f64 = 1.7320508075688772;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PotentialKind {
    Canonical,
    NonCanonical,
}

/// Effective 1D potential. `c_or_a` is the constant c of the canonical
/// potential and the separation constant a of the non-canonical one.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub params: AlgebraParams,
    pub c_or_a: f64,
}

/// Closed-form evaluation; errors once the exponential argument leaves
/// [-700, 700], where f64 overflows or truncates.
pub fn potential_eval(spec: &PotentialSpec, x: f64) -> Result<f64> {
    let p = &spec.params;
    let arg = match spec.kind {
        PotentialKind::Canonical => -2.0 * SQRT3 * x,
        PotentialKind::NonCanonical => {
            -2.0 * SQRT3 * x - 2.0 * SQRT3 * p.mu * p.mu * p.e * x * x
                + SQRT3 * p.theta * spec.c_or_a / (p.mu * p.lambda)
        }
    };
    if arg.abs() > 700.0 {
        return Err(NcError::Domain(format!(
            "potential exponent {arg:.1} out of the f64-safe range at x = {x}"
        )));
    }
    Ok(match spec.kind {
        PotentialKind::Canonical => {
            let w = p.eta * x - spec.c_or_a;
            48.0 * arg.exp() - w * w
        }
        PotentialKind::NonCanonical => {
            let w = p.eta * x - spec.c_or_a;
            let m2 = p.mu * p.mu;
            -w * w - p.f * p.f * m2 * m2 * x.powi(4) - 2.0 * p.f * m2 * w * x * x
                + 48.0 * arg.exp()
        }
    })
}

/// Local minimum in the bracket: coarse scan for an interior dip, golden
/// section refinement, curvature by central second difference. Stability
/// means curvature > 0.
pub fn find_minimum(spec: &PotentialSpec, lo: f64, hi: f64) -> Result<(f64, f64, f64)> {
    if !(lo < hi) {
        return Err(NcError::Domain("empty bracket".into()));
    }
    let n = 4000;
    let step = (hi - lo) / n as f64;
    let vals: Vec<f64> = (0..=n)
        .map(|i| potential_eval(spec, lo + i as f64 * step))
        .collect::<Result<_>>()?;
    let mut best: Option<usize> = None;
    for i in 1..n {
        if vals[i] < vals[i - 1] && vals[i] <= vals[i + 1] {
            if best.map_or(true, |b| vals[i] < vals[b]) {
                best = Some(i);
            }
        }
    }
    let i = best.ok_or_else(|| NcError::NoBracket("no interior dip in the bracket".into()))?;
    let (mut a, mut b) = (lo + (i - 1) as f64 * step, lo + (i + 1) as f64 * step);
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = potential_eval(spec, x1)?;
    let mut f2 = potential_eval(spec, x2)?;
    for _ in 0..200 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = potential_eval(spec, x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = potential_eval(spec, x2)?;
        }
        if b - a < 1e-12 * (1.0 + a.abs()) {
            break;
        }
    }
    let xm = 0.5 * (a + b);
    let vm = potential_eval(spec, xm)?;
    let h = step.max(1e-6);
    let curv =
        (potential_eval(spec, xm + h)? - 2.0 * vm + potential_eval(spec, xm - h)?) / (h * h);
    Ok((xm, vm, curv))
}

/// One integration of -phi'' + V phi = 0. `residual` is the maximum of
/// |-phi'' + V phi| over interior sample points relative to max|phi|;
/// `residual_kind` says how it was obtained.
#[derive(Debug, Clone, Serialize)]
pub struct OdeSolution {
    pub xs: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_prime: Vec<f64>,
    pub method: String,
    pub residual: f64,
    pub residual_kind: String,
    pub steps: usize,
    pub rejected: usize,
}

// Dormand-Prince 5(4) on (phi, phi'), error-controlled steps.
fn rk45<V: Fn(f64) -> Result<f64>>(
    v: V,
    x0: f64,
    x1: f64,
    ic: (f64, f64),
    rtol: f64,
) -> Result<OdeSolution> {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    // difference of the 5th and embedded 4th order weights
    const ERR: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    if !(x0 < x1) {
        return Err(NcError::Domain("integration range must be increasing".into()));
    }
    let f = |x: f64, y: [f64; 2]| -> Result<[f64; 2]> { Ok([y[1], v(x)? * y[0]]) };
    let mut x = x0;
    let mut y = [ic.0, ic.1];
    let mut h = (x1 - x0) / 1000.0;
    let mut xs = vec![x];
    let mut phi = vec![y[0]];
    let mut dphi = vec![y[1]];
    let mut k0 = f(x, y)?;
    let (mut steps, mut rejected) = (0usize, 0usize);
    let mut defect: f64 = 0.0;
    while x < x1 {
        if steps + rejected > 40_000_000 {
            return Err(NcError::StepFailure {
                x,
                msg: "step budget exhausted".into(),
            });
        }
        h = h.min(x1 - x);
        let mut k = [[0.0; 2]; 7];
        k[0] = k0;
        let mut failed_eval = None;
        for s in 0..6 {
            let mut ys = y;
            for j in 0..=s {
                ys[0] += h * A[s][j] * k[j][0];
                ys[1] += h * A[s][j] * k[j][1];
            }
            match f(x + C[s] * h, ys) {
                Ok(ks) => k[s + 1] = ks,
                Err(e) => {
                    failed_eval = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = failed_eval {
            return Err(NcError::StepFailure { x, msg: e.to_string() });
        }
        let mut err = [0.0, 0.0];
        for s in 0..7 {
            err[0] += ERR[s] * k[s][0];
            err[1] += ERR[s] * k[s][1];
        }
        let scale0 = 1e-12 + rtol * y[0].abs().max(1.0);
        let scale1 = 1e-12 + rtol * y[1].abs().max(1.0);
        let enorm = ((h * err[0] / scale0).powi(2) + (h * err[1] / scale1).powi(2))
            .sqrt()
            / 2.0_f64.sqrt();
        if enorm <= 1.0 {
            // FSAL: stage 7 is the derivative at the accepted point
            let mut ynew = y;
            for s in 0..6 {
                ynew[0] += h * A[5][s] * k[s][0];
                ynew[1] += h * A[5][s] * k[s][1];
            }
            x += h;
            y = ynew;
            k0 = k[6];
            xs.push(x);
            phi.push(y[0]);
            dphi.push(y[1]);
            steps += 1;
            defect = defect.max((h * err[0]).abs() / (h * h));
        } else {
            rejected += 1;
        }
        let fac = (0.9 * enorm.powf(-0.2)).clamp(0.2, 5.0);
        h *= fac;
        if h < 1e-14 * (1.0 + x.abs()) {
            return Err(NcError::StepFailure {
                x,
                msg: "step size underflow".into(),
            });
        }
    }
    let peak = phi.iter().fold(0.0_f64, |m, &p| m.max(p.abs())).max(1e-300);
    Ok(OdeSolution {
        xs,
        phi,
        phi_prime: dphi,
        method: "dormand-prince 5(4), adaptive".into(),
        residual: defect / peak,
        residual_kind: "embedded defect estimate".into(),
        steps,
        rejected,
    })
}

/// Adaptive 5(4) integration. The residual field carries the embedded defect
/// estimate; for the lattice-verified residual use [`solve_verified`].
pub fn solve_zero_energy(
    spec: &PotentialSpec,
    x0: f64,
    x1: f64,
    ic: (f64, f64),
    rtol: f64,
) -> Result<OdeSolution> {
    rk45(|x| potential_eval(spec, x), x0, x1, ic, rtol)
}

// Two-grid Numerov: a fine step keeps the per-step defect (which divides by
// h^2 in the residual) under tol, a coarser lattice keeps the verification
// stencil's own truncation under tol. Both budgets come from the largest
// local wavenumber on the range.
fn numerov_verified<V: Fn(f64) -> Result<f64>>(
    v: V,
    x0: f64,
    x1: f64,
    ic: (f64, f64),
    tol: f64,
) -> Result<OdeSolution> {
    let mut kmax: f64 = 1.0;
    for i in 0..=10_000 {
        let x = x0 + (x1 - x0) * i as f64 / 10_000.0;
        kmax = kmax.max(v(x)?.abs().sqrt());
    }
    // defect h^4 k^6 / 240 <= tol and stencil H^6 k^8 / 560 <= tol, each
    // with a safety factor
    let hf = (240.0 * tol / kmax.powi(6)).powf(0.25) / 2.0;
    let hc = (560.0 * tol / kmax.powi(8)).powf(1.0 / 6.0) / 1.5;
    let r = ((hc / hf).ceil() as usize).max(7);
    let len = x1 - x0;
    let nc = ((len / hc).ceil() as usize).max(16);
    let n = nc * r;
    let h = len / n as f64;
    if n > 200_000_000 {
        return Err(NcError::Resolution(format!(
            "verified lattice needs {n} points; potential oscillates too fast"
        )));
    }
    let xat = |i: usize| x0 + len * i as f64 / n as f64;
    // start value by sub-stepped RK4: its error enters the residual as a
    // one-off defect and must sit far below tol * h^2
    let mut s = [ic.0, ic.1];
    let m = 200;
    let hh = h / m as f64;
    for j in 0..m {
        let x = x0 + j as f64 * hh;
        let fy = |x: f64, y: [f64; 2]| -> Result<[f64; 2]> { Ok([y[1], v(x)? * y[0]]) };
        let k1 = fy(x, s)?;
        let k2 = fy(x + hh / 2.0, [s[0] + hh / 2.0 * k1[0], s[1] + hh / 2.0 * k1[1]])?;
        let k3 = fy(x + hh / 2.0, [s[0] + hh / 2.0 * k2[0], s[1] + hh / 2.0 * k2[1]])?;
        let k4 = fy(x + hh, [s[0] + hh * k3[0], s[1] + hh * k3[1]])?;
        s[0] += hh / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        s[1] += hh / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    }
    // Numerov recurrence, keeping only the current pair plus the decimated
    // output lattice
    let c = h * h / 12.0;
    let mut y_prev = ic.0;
    let mut y_cur = s[0];
    let mut v_prev = v(xat(0))?;
    let mut v_cur = v(xat(1))?;
    let mut coarse = Vec::with_capacity(nc + 1);
    coarse.push(y_prev);
    for i in 1..n {
        if i % r == 0 {
            coarse.push(y_cur);
        }
        let v_next = v(xat(i + 1))?;
        let y_next = (2.0 * (1.0 + 5.0 * c * v_cur) * y_cur - (1.0 - c * v_prev) * y_prev)
            / (1.0 - c * v_next);
        y_prev = y_cur;
        y_cur = y_next;
        v_prev = v_cur;
        v_cur = v_next;
        if !y_cur.is_finite() {
            return Err(NcError::StepFailure {
                x: xat(i + 1),
                msg: "solution blew up".into(),
            });
        }
    }
    if n % r == 0 {
        coarse.push(y_cur);
    }
    let hc = h * r as f64;
    let xs: Vec<f64> = (0..coarse.len()).map(|i| x0 + i as f64 * hc).collect();
    // 6th-order symmetric stencils for the residual and the reported phi'
    const W2: [f64; 7] = [
        1.0 / 90.0,
        -3.0 / 20.0,
        1.5,
        -49.0 / 18.0,
        1.5,
        -3.0 / 20.0,
        1.0 / 90.0,
    ];
    const W1: [f64; 7] = [
        -1.0 / 60.0,
        3.0 / 20.0,
        -0.75,
        0.0,
        0.75,
        -3.0 / 20.0,
        1.0 / 60.0,
    ];
    let peak = coarse.iter().fold(0.0_f64, |m, &p| m.max(p.abs())).max(1e-300);
    let mut residual: f64 = 0.0;
    let mut dphi = vec![0.0; coarse.len()];
    for i in 3..coarse.len() - 3 {
        let mut d2 = 0.0;
        let mut d1 = 0.0;
        for j in 0..7 {
            d2 += W2[j] * coarse[i - 3 + j];
            d1 += W1[j] * coarse[i - 3 + j];
        }
        residual = residual.max((-d2 / (hc * hc) + v(xs[i])? * coarse[i]).abs());
        dphi[i] = d1 / hc;
    }
    for i in 0..3 {
        dphi[i] = dphi[3];
        dphi[coarse.len() - 1 - i] = dphi[coarse.len() - 4];
    }
    Ok(OdeSolution {
        xs,
        phi: coarse,
        phi_prime: dphi,
        method: format!("numerov, fine step {h:.3e}, lattice step {hc:.3e}"),
        residual: residual / peak,
        residual_kind: "6th-order central stencil on the lattice".into(),
        steps: n,
        rejected: 0,
    })
}

/// Fixed-lattice integration with a measured interior residual, sized so the
/// stencil check clears `tol * max|phi|`.
pub fn solve_verified(
    spec: &PotentialSpec,
    x0: f64,
    x1: f64,
    ic: (f64, f64),
    tol: f64,
) -> Result<OdeSolution> {
    numerov_verified(|x| potential_eval(spec, x), x0, x1, ic, tol)
}

/// Oscillation extrema in [lo, hi]: sign change of the discrete slope with a
/// parabolic refinement of position and amplitude.
fn extrema(sol: &OdeSolution, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 1..sol.phi.len() - 1 {
        if sol.xs[i] < lo || sol.xs[i] > hi {
            continue;
        }
        let d0 = sol.phi[i] - sol.phi[i - 1];
        let d1 = sol.phi[i + 1] - sol.phi[i];
        if d0 * d1 < 0.0 {
            let (y0, y1, y2) = (sol.phi[i - 1], sol.phi[i], sol.phi[i + 1]);
            let den = y0 - 2.0 * y1 + y2;
            let delta = if den != 0.0 { 0.5 * (y0 - y2) / den } else { 0.0 };
            let amp = (y1 - 0.25 * (y0 - y2) * delta).abs();
            let x = sol.xs[i] + delta * (sol.xs[i + 1] - sol.xs[i]);
            if amp > 0.0 {
                out.push((x, amp));
            }
        }
    }
    out
}

/// Least-squares slope of log(amplitude) against log(x) over the tail's
/// oscillation extrema: amplitude ~ x^p. Needs at least 10 extrema.
pub fn envelope_exponent(sol: &OdeSolution, lo: f64, hi: f64) -> Result<f64> {
    let pts = extrema(sol, lo, hi);
    if pts.len() < 10 {
        return Err(NcError::TooFewExtrema {
            found: pts.len(),
            need: 10,
        });
    }
    let n = pts.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, a) in &pts {
        let (lx, la) = (x.ln(), a.ln());
        sx += lx;
        sy += la;
        sxx += lx * lx;
        sxy += lx * la;
    }
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// Partial integrals int_{x0}^{X} phi^2 at the checkpoints, trapezoidal on
/// the solution lattice. Cauchy increments of these separate a convergent
/// tail (increments ~ 1/X) from a log-divergent one.
pub fn tail_mass(sol: &OdeSolution, checkpoints: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(checkpoints.len());
    for &cp in checkpoints {
        let mut acc = 0.0;
        for i in 1..sol.xs.len() {
            if sol.xs[i] > cp {
                break;
            }
            let dx = sol.xs[i] - sol.xs[i - 1];
            acc += 0.5 * dx * (sol.phi[i] * sol.phi[i] + sol.phi[i - 1] * sol.phi[i - 1]);
        }
        out.push(acc);
    }
    out
}

/// psi_a(x1, x2) = R_a(x2) exp[(i x1 / mu)(a - (eta / 2 mu) x2)] on the 2D
/// grid; x1 enters only through the phase.
pub fn assemble_separated(
    params: &AlgebraParams,
    a: f64,
    r_a: &[Complex64],
    grid: &GridSpec,
) -> Result<WaveFunction> {
    if r_a.len() != grid.n2 {
        return Err(NcError::GridMismatch(format!(
            "radial profile has {} samples, x2 axis has {}",
            r_a.len(),
            grid.n2
        )));
    }
    let mut values = vec![Complex64::default(); grid.len()];
    for i1 in 0..grid.n1 {
        let x1 = grid.x1(i1);
        for i2 in 0..grid.n2 {
            let x2 = grid.x2(i2);
            let phase = (x1 / params.mu) * (a - params.eta / (2.0 * params.mu) * x2);
            values[i1 * grid.n2 + i2] = r_a[i2] * Complex64::new(0.0, phase).exp();
        }
    }
    WaveFunction::new(*grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::derive_constants;

    fn canonical(eta: f64, c: f64) -> PotentialSpec {
        let mut p = derive_constants(0.2, eta.max(1e-12), 0.0, None).unwrap();
        p.eta = eta;
        PotentialSpec {
            kind: PotentialKind::Canonical,
            params: p,
            c_or_a: c,
        }
    }

    fn noncanonical(eps: f64, a: f64) -> PotentialSpec {
        let p = derive_constants(0.2, 0.2, eps, None).unwrap();
        PotentialSpec {
            kind: PotentialKind::NonCanonical,
            params: p,
            c_or_a: a,
        }
    }

    #[test]
    fn potential_point_values() {
        let c00 = canonical(0.0, 0.0);
        assert!((potential_eval(&c00, 0.0).unwrap() - 48.0).abs() < 1e-12);
        let c1 = canonical(0.2, 1.0);
        let v5 = potential_eval(&c1, 5.0).unwrap();
        assert!((v5 - 1.442248700574486e-6).abs() < 1e-15, "V(5) = {v5}");
        // far out the quartic term dominates
        let nc = noncanonical(0.1, 0.0);
        let p = nc.params;
        let x = 50.0;
        let v = potential_eval(&nc, x).unwrap();
        let quartic = -p.f * p.f * p.mu.powi(4) * x.powi(4);
        assert!(v < 0.0 && ((v - quartic) / quartic).abs() < 0.1);
        assert!(potential_eval(&nc, -1000.0).is_err());
    }

    #[test]
    fn minima_and_brackets() {
        // c = 1 puts a dip before the quadratic rolls the potential over
        let (x, v, curv) = find_minimum(&canonical(0.2, 1.0), 0.0, 3.0).unwrap();
        assert!((x - 1.8765).abs() < 1e-3, "x_min = {x}");
        assert!((v + 0.318113).abs() < 1e-4, "V_min = {v}");
        assert!(curv > 0.0);
        // eta = 0 is monotone: decaying exponential minus a constant
        assert!(matches!(
            find_minimum(&canonical(0.0, 0.0), 0.0, 20.0),
            Err(NcError::NoBracket(_))
        ));
        let (x, _, curv) = find_minimum(&noncanonical(0.01, 1.0), 0.0, 8.0).unwrap();
        assert!((x - 2.1029).abs() < 1e-3, "x_min = {x}");
        assert!(curv > 0.0);
    }

    #[test]
    fn rk45_constant_potential_oracles() {
        let sol = rk45(|_| Ok(0.0), 0.0, 1.0, (0.0, 1.0), 1e-10).unwrap();
        let end = *sol.phi.last().unwrap();
        assert!((end - 1.0).abs() < 1e-9, "phi(1) = {end}");
        let sol = rk45(|_| Ok(1.0), 0.0, 1.0, (1.0, -1.0), 1e-10).unwrap();
        let end = *sol.phi.last().unwrap();
        assert!((end - (-1.0_f64).exp()).abs() < 1e-8, "phi(1) = {end}");
    }

    #[test]
    fn adaptive_steps_shrink_on_the_quartic_tail() {
        let nc = noncanonical(0.1, 0.0);
        let sol = solve_zero_energy(&nc, 0.0, 30.0, (1.0, 0.0), 1e-8).unwrap();
        let step_near = |x: f64| {
            let i = sol.xs.partition_point(|&t| t < x);
            sol.xs[i + 1] - sol.xs[i]
        };
        assert!(step_near(25.0) < 0.5 * step_near(8.0));
    }

    #[test]
    fn flat_potential_envelope_is_flat() {
        let sol = numerov_verified(|_| Ok(-1.0), 0.0, 120.0, (1.0, 0.0), 1e-6).unwrap();
        assert!(sol.residual <= 1e-6, "residual {}", sol.residual);
        let p = envelope_exponent(&sol, 10.0, 120.0).unwrap();
        assert!(p.abs() < 0.05, "exponent {p}");
    }

    #[test]
    fn envelope_contrast() {
        // canonical tail V ~ -(eta x)^2: amplitude ~ x^{-1/2}
        let can = canonical(0.2, 0.0);
        let sol = solve_verified(&can, 0.0, 60.0, (1.0, 0.0), 1e-6).unwrap();
        assert!(sol.residual <= 1e-6, "canonical residual {}", sol.residual);
        let pc = envelope_exponent(&sol, 20.0, 60.0).unwrap();
        assert!((pc + 0.5).abs() < 0.1, "canonical exponent {pc}");
        let mass_c = tail_mass(&sol, &[20.0, 40.0, 60.0]);
        // non-canonical tail V ~ -F^2 mu^4 x^4: amplitude ~ x^{-1}
        let nc = noncanonical(0.1, 0.0);
        let sol = solve_verified(&nc, 0.0, 30.0, (1.0, 0.0), 1e-6).unwrap();
        assert!(sol.residual <= 1e-6, "quartic residual {}", sol.residual);
        let pn = envelope_exponent(&sol, 10.0, 30.0).unwrap();
        assert!((pn + 1.0).abs() < 0.1, "quartic exponent {pn}");
        assert!((pc - pn).abs() >= 0.3);
        // square-integrability proxy: quartic increments fall, canonical
        // increments persist
        let mass_n = tail_mass(&sol, &[10.0, 20.0, 30.0]);
        let incr_n = [mass_n[1] - mass_n[0], mass_n[2] - mass_n[1]];
        assert!(incr_n[1] < incr_n[0]);
        let incr_c = [mass_c[1] - mass_c[0], mass_c[2] - mass_c[1]];
        assert!(incr_c[1] > 0.5 * incr_c[0]);
    }

    #[test]
    fn separated_state_shape() {
        let grid = GridSpec::new(32, 32, 6.0, 6.0).unwrap();
        let p = derive_constants(0.2, 0.2, 0.1, None).unwrap();
        let r_a: Vec<Complex64> = (0..grid.n2)
            .map(|i| {
                let x2 = grid.x2(i);
                Complex64::new((-x2 * x2 / 2.0).exp(), 0.0)
            })
            .collect();
        let a = 0.7;
        let psi = assemble_separated(&p, a, &r_a, &grid).unwrap();
        // |psi| cannot depend on x1
        for i2 in 0..grid.n2 {
            let m0 = psi.values[i2].norm();
            for i1 in 1..grid.n1 {
                assert!((psi.values[i1 * grid.n2 + i2].norm() - m0).abs() < 1e-12);
            }
        }
        // the x1 phase gradient is a - (eta / 2 mu) x2, linear in x2
        for i2 in [4, 16, 27] {
            let x2 = grid.x2(i2);
            let z0 = psi.values[10 * grid.n2 + i2];
            let z1 = psi.values[11 * grid.n2 + i2];
            let dphase = (z1 / z0).arg() / grid.h1();
            let expect = (a - p.eta / (2.0 * p.mu) * x2) / p.mu;
            assert!((dphase - expect).abs() < 1e-9, "x2 = {x2}: {dphase} vs {expect}");
        }
        // flat phase when eta = 0 and a = 0
        let mut p0 = p;
        p0.eta = 0.0;
        let psi0 = assemble_separated(&p0, 0.0, &r_a, &grid).unwrap();
        for z in &psi0.values {
            assert!(z.im.abs() < 1e-15);
        }
        assert!(matches!(
            assemble_separated(&p, 0.0, &r_a[..10], &grid),
            Err(NcError::GridMismatch(_))
        ));
    }
}
