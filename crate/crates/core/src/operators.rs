//! Matrix-free operator actions of the differential representation on the
//! periodic grid, plus commutator and hermiticity diagnostics.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{commutator_closure, AlgebraParams, BaseSymbol, OperatorSymbol};
use crate::error::{NcError, Result};
use crate::fft::spectral_derivative;
use crate::grid::GridSpec;
use crate::states::WaveFunction;

/// A symbol bound to parameters and a grid. Applying it is matrix-free:
/// multiplications are pointwise, derivatives are spectral, composites go
/// factor by factor right-to-left.
#[derive(Debug, Clone)]
pub struct OperatorHandle {
    pub symbol: OperatorSymbol,
    pub params: AlgebraParams,
    pub grid: GridSpec,
}

pub fn assemble(
    symbol: OperatorSymbol,
    params: AlgebraParams,
    grid: GridSpec,
) -> Result<OperatorHandle> {
    if let OperatorSymbol::Composite(terms) = &symbol {
        for t in terms {
            if t.factors.is_empty() {
                return Err(NcError::UnsupportedSymbol(
                    "composite term with no factors; use Identity".into(),
                ));
            }
        }
    }
    Ok(OperatorHandle { symbol, params, grid })
}

impl OperatorHandle {
    pub fn apply(&self, f: &WaveFunction) -> Result<WaveFunction> {
        self.grid.check_match(&f.grid, "operator application")?;
        let out = apply_symbol(&self.symbol, &self.params, &self.grid, &f.values);
        WaveFunction::new(self.grid, out)
    }
}

fn apply_symbol(
    symbol: &OperatorSymbol,
    params: &AlgebraParams,
    grid: &GridSpec,
    values: &[Complex64],
) -> Vec<Complex64> {
    match symbol {
        OperatorSymbol::Base(b) => apply_base(*b, params, grid, values),
        OperatorSymbol::Composite(terms) => {
            let mut acc = vec![Complex64::default(); values.len()];
            for term in terms {
                let mut v = values.to_vec();
                for factor in term.factors.iter().rev() {
                    v = apply_base(*factor, params, grid, &v);
                }
                for (a, x) in acc.iter_mut().zip(&v) {
                    *a += term.coeff * x;
                }
            }
            acc
        }
    }
}

/// The differential representation:
///   q1 = (lambda x1 + E x1^2) + (i theta / 2 lambda) d/dx2
///   q2 = lambda x2 - (i theta / 2 lambda) d/dx1
///   p1 = -i mu d/dx1 + (eta / 2 mu) x2
///   p2 = -i mu d/dx2 - (eta / 2 mu) x1 + F x1^2
/// and R is multiplication by r_coef * x1 (the derivative and x1^2 parts of
/// epsilon (q1 + theta/(1+sqrt(1-xi)) p2) cancel identically).
fn apply_base(
    b: BaseSymbol,
    p: &AlgebraParams,
    grid: &GridSpec,
    values: &[Complex64],
) -> Vec<Complex64> {
    use BaseSymbol::*;
    match b {
        Identity => values.to_vec(),
        X1 => mul_x1(grid, values, |x1| Complex64::new(x1, 0.0)),
        X2 => mul_x2(grid, values, |x2| Complex64::new(x2, 0.0)),
        Xi1 => scale(spectral_derivative(values, grid, 1), Complex64::new(0.0, -1.0)),
        Xi2 => scale(spectral_derivative(values, grid, 2), Complex64::new(0.0, -1.0)),
        R => {
            let r = p.r_coef();
            mul_x1(grid, values, |x1| Complex64::new(r * x1, 0.0))
        }
        Q1 => {
            let mut out = mul_x1(grid, values, |x1| Complex64::new(p.lambda * x1 + p.e * x1 * x1, 0.0));
            let d2 = spectral_derivative(values, grid, 2);
            let c = Complex64::new(0.0, p.theta / (2.0 * p.lambda));
            axpy(&mut out, c, &d2);
            out
        }
        Q2 => {
            let mut out = mul_x2(grid, values, |x2| Complex64::new(p.lambda * x2, 0.0));
            let d1 = spectral_derivative(values, grid, 1);
            let c = Complex64::new(0.0, -p.theta / (2.0 * p.lambda));
            axpy(&mut out, c, &d1);
            out
        }
        P1 => {
            let mut out = mul_x2(grid, values, |x2| Complex64::new(p.eta / (2.0 * p.mu) * x2, 0.0));
            let d1 = spectral_derivative(values, grid, 1);
            axpy(&mut out, Complex64::new(0.0, -p.mu), &d1);
            out
        }
        P2 => {
            let mut out = mul_x1(grid, values, |x1| {
                Complex64::new(-p.eta / (2.0 * p.mu) * x1 + p.f * x1 * x1, 0.0)
            });
            let d2 = spectral_derivative(values, grid, 2);
            axpy(&mut out, Complex64::new(0.0, -p.mu), &d2);
            out
        }
    }
}

fn mul_x1(grid: &GridSpec, values: &[Complex64], g: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
    let mut out = values.to_vec();
    for i in 0..grid.n1 {
        let c = g(grid.x1(i));
        for v in &mut out[i * grid.n2..(i + 1) * grid.n2] {
            *v *= c;
        }
    }
    out
}

fn mul_x2(grid: &GridSpec, values: &[Complex64], g: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
    let mut out = values.to_vec();
    let col: Vec<Complex64> = (0..grid.n2).map(|j| g(grid.x2(j))).collect();
    for row in out.chunks_mut(grid.n2) {
        for (v, c) in row.iter_mut().zip(&col) {
            *v *= c;
        }
    }
    out
}

fn scale(mut v: Vec<Complex64>, c: Complex64) -> Vec<Complex64> {
    for x in &mut v {
        *x *= c;
    }
    v
}

fn axpy(acc: &mut [Complex64], c: Complex64, v: &[Complex64]) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += c * x;
    }
}

/// a(b f) - b(a f).
pub fn commutator_apply(
    a: &OperatorHandle,
    b: &OperatorHandle,
    f: &WaveFunction,
) -> Result<WaveFunction> {
    a.grid.check_match(&b.grid, "commutator")?;
    let ab = a.apply(&b.apply(f)?)?;
    let ba = b.apply(&a.apply(f)?)?;
    ab.sub(&ba)
}

/// <op f, f> with a normalization guard. Returns the complex value; pair it
/// with [`realness_defect`] when the handle is expected Hermitian.
pub fn expectation(op: &OperatorHandle, f: &WaveFunction) -> Result<Complex64> {
    op.grid.check_match(&f.grid, "expectation")?;
    f.require_normalized(1e-8)?;
    op.apply(f)?.inner(f)
}

/// |Im z| relative to |z|; a discretization diagnostic for Hermitian
/// expectations.
pub fn realness_defect(z: Complex64) -> f64 {
    z.im.abs() / z.norm().max(1e-300)
}

/// ||(op - center I) f||; with center = <op> this is the dispersion.
pub fn dispersion(op: &OperatorHandle, f: &WaveFunction, center: f64) -> Result<f64> {
    op.grid.check_match(&f.grid, "dispersion")?;
    f.require_normalized(1e-8)?;
    let shifted = op.apply(f)?.add_scaled(Complex64::new(-center, 0.0), f)?;
    Ok(shifted.norm())
}

/// |<op f, g> - <f, op g>| / (||f|| ||g||).
pub fn hermiticity_defect(
    op: &OperatorHandle,
    f: &WaveFunction,
    g: &WaveFunction,
) -> Result<f64> {
    op.grid.check_match(&f.grid, "hermiticity")?;
    f.grid.check_match(&g.grid, "hermiticity")?;
    let lhs = op.apply(f)?.inner(g)?;
    let rhs = f.inner(&op.apply(g)?)?;
    Ok((lhs - rhs).norm() / (f.norm() * g.norm()).max(1e-300))
}

/// One fundamental pair's commutator residual.
#[derive(Debug, Clone, Serialize)]
pub struct PairResidual {
    pub pair: (BaseSymbol, BaseSymbol),
    pub max_rel_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgebraReport {
    pub residuals: Vec<PairResidual>,
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
}

const FUNDAMENTAL_PAIRS: [(BaseSymbol, BaseSymbol); 6] = [
    (BaseSymbol::Q1, BaseSymbol::Q2),
    (BaseSymbol::Q1, BaseSymbol::P1),
    (BaseSymbol::Q1, BaseSymbol::P2),
    (BaseSymbol::Q2, BaseSymbol::P1),
    (BaseSymbol::Q2, BaseSymbol::P2),
    (BaseSymbol::P1, BaseSymbol::P2),
];

/// Check the commutation relations on the given states: for each of the six
/// fundamental pairs, compare [a, b] f against the assembled closure
/// composite. Errors are L2, relative to max(||rhs||, ||f||).
pub fn verify_algebra(
    params: &AlgebraParams,
    grid: &GridSpec,
    states: &[WaveFunction],
    tolerance: f64,
) -> Result<AlgebraReport> {
    let mut residuals = Vec::with_capacity(6);
    let mut worst: f64 = 0.0;
    for (i, j) in FUNDAMENTAL_PAIRS {
        let a = assemble(i.into(), *params, *grid)?;
        let b = assemble(j.into(), *params, *grid)?;
        let closure = assemble(commutator_closure(params, i, j)?, *params, *grid)?;
        let mut pair_err: f64 = 0.0;
        for f in states {
            let lhs = commutator_apply(&a, &b, f)?;
            let rhs = closure.apply(f)?;
            let denom = rhs.norm().max(f.norm()).max(1e-300);
            pair_err = pair_err.max(lhs.sub(&rhs)?.norm() / denom);
        }
        worst = worst.max(pair_err);
        residuals.push(PairResidual { pair: (i, j), max_rel_err: pair_err });
    }
    Ok(AlgebraReport { residuals, max_rel_err: worst, tolerance, pass: worst <= tolerance })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionReport {
    /// Relative deviations for x1, x2, xi1, xi2 in that order.
    pub deviations: [f64; 4],
    pub max_deviation: f64,
}

/// Apply the inverse-map composites (deformed variables, including the R^2
/// correction in xi2) and compare against the direct Heisenberg-Weyl
/// actions on f.
pub fn reconstruct_hw(
    params: &AlgebraParams,
    grid: &GridSpec,
    f: &WaveFunction,
) -> Result<ReconstructionReport> {
    use BaseSymbol::*;
    let mut deviations = [0.0; 4];
    for (slot, sym) in [X1, X2, Xi1, Xi2].into_iter().enumerate() {
        let direct = assemble(sym.into(), *params, *grid)?.apply(f)?;
        let composite = crate::algebra::inverse_map(params, sym)?;
        let rebuilt = assemble(composite, *params, *grid)?.apply(f)?;
        let denom = direct.norm().max(f.norm()).max(1e-300);
        deviations[slot] = rebuilt.sub(&direct)?.norm() / denom;
    }
    let max_deviation = deviations.iter().cloned().fold(0.0, f64::max);
    Ok(ReconstructionReport { deviations, max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::derive_constants;
    use crate::states::{gaussian, random_smooth_state, GaussianSpec};
    use BaseSymbol::*;

    fn grid() -> GridSpec {
        GridSpec::square(128, 12.0).unwrap()
    }

    fn params() -> AlgebraParams {
        derive_constants(0.2, 0.2, 0.1, None).unwrap()
    }

    #[test]
    fn x1_is_pointwise_multiplication() {
        let g = grid();
        let f = gaussian(&g, &GaussianSpec::centered(1.0, 1.0)).unwrap();
        let h = assemble(X1.into(), params(), g).unwrap().apply(&f).unwrap();
        for i in 0..g.n1 {
            let x1 = g.x1(i);
            for j in 0..g.n2 {
                let want = Complex64::new(x1, 0.0) * f.values[i * g.n2 + j];
                assert!((h.values[i * g.n2 + j] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn canonical_pairs() {
        let g = grid();
        let p = params();
        let f = gaussian(&g, &GaussianSpec::centered(1.0, 1.0)).unwrap();
        // [x1, x2] = 0
        let a = assemble(X1.into(), p, g).unwrap();
        let b = assemble(X2.into(), p, g).unwrap();
        assert!(commutator_apply(&a, &b, &f).unwrap().norm() < 1e-10);
        // [x1, xi1] = i
        let xi = assemble(Xi1.into(), p, g).unwrap();
        let c = commutator_apply(&a, &xi, &f).unwrap();
        let err = c.sub(&f.scaled(Complex64::new(0.0, 1.0))).unwrap().norm();
        assert!(err < 1e-8, "canonical pair error {err}");
    }

    #[test]
    fn deformed_commutator_matches_closure() {
        let g = grid();
        let p = params();
        let f = gaussian(&g, &GaussianSpec::centered(1.5, 1.5)).unwrap();
        let q1 = assemble(Q1.into(), p, g).unwrap();
        let q2 = assemble(Q2.into(), p, g).unwrap();
        let lhs = commutator_apply(&q1, &q2, &f).unwrap();
        let closure = commutator_closure(&p, Q1, Q2).unwrap();
        let rhs = assemble(closure, p, g).unwrap().apply(&f).unwrap();
        let err = lhs.sub(&rhs).unwrap().norm() / rhs.norm();
        assert!(err < 1e-6, "closure error {err}");
    }

    #[test]
    fn verify_algebra_reports() {
        let g = grid();
        // canonical limit: [q1, p1] = i exactly, spectrally accurate
        let p0 = derive_constants(0.0, 0.0, 0.0, None).unwrap();
        let states = vec![gaussian(&g, &GaussianSpec::centered(1.0, 1.0)).unwrap()];
        let rep = verify_algebra(&p0, &g, &states, 1e-8).unwrap();
        assert!(rep.pass, "canonical residual {}", rep.max_rel_err);

        // pure noncommutative momentum deformation: [p1, p2] = 4 i eps q1
        let pe = derive_constants(0.0, 0.0, 0.1, None).unwrap();
        let rep = verify_algebra(&pe, &g, &states, 1e-6).unwrap();
        assert!(rep.pass, "eps-only residual {}", rep.max_rel_err);

        // full deformation on random smooth states
        let p = params();
        let states: Vec<_> = (0..10).map(|s| random_smooth_state(&g, 6, s)).collect();
        let rep = verify_algebra(&p, &g, &states, 1e-6).unwrap();
        assert!(rep.pass, "deformed residual {}", rep.max_rel_err);
    }

    #[test]
    fn residual_shrinks_with_resolution() {
        let p = params();
        let coarse = GridSpec::square(64, 12.0).unwrap();
        let fine = GridSpec::square(128, 12.0).unwrap();
        let sc = vec![random_smooth_state(&coarse, 6, 3)];
        let sf = vec![random_smooth_state(&fine, 6, 3)];
        let rc = verify_algebra(&p, &coarse, &sc, 1.0).unwrap();
        let rf = verify_algebra(&p, &fine, &sf, 1.0).unwrap();
        assert!(
            rf.max_rel_err <= rc.max_rel_err.max(1e-12),
            "coarse {} fine {}",
            rc.max_rel_err,
            rf.max_rel_err
        );
    }

    #[test]
    fn reconstruction_undeformed_is_identity() {
        let g = grid();
        let p = derive_constants(0.0, 0.0, 0.0, None).unwrap();
        let f = gaussian(&g, &GaussianSpec::centered(1.0, 1.0)).unwrap();
        let rep = reconstruct_hw(&p, &g, &f).unwrap();
        assert!(rep.max_deviation < 1e-12, "identity deviation {}", rep.max_deviation);
    }

    #[test]
    fn reconstruction_deformed() {
        let g = grid();
        let f = gaussian(&g, &GaussianSpec::centered(1.0, 1.0)).unwrap();
        for (t, e) in [(0.2, 0.2), (0.6, 0.6)] {
            let p = derive_constants(t, e, 0.1, None).unwrap();
            let rep = reconstruct_hw(&p, &g, &f).unwrap();
            assert!(rep.max_deviation < 1e-6, "({t},{e}) deviation {}", rep.max_deviation);
        }
    }

    #[test]
    fn fundamental_handles_are_hermitian() {
        let g = grid();
        let p = params();
        let f = random_smooth_state(&g, 5, 11);
        let h = random_smooth_state(&g, 5, 12);
        for sym in [Q1, Q2, P1, P2, X1, X2, Xi1, Xi2, R] {
            let op = assemble(sym.into(), p, g).unwrap();
            let d = hermiticity_defect(&op, &f, &h).unwrap();
            assert!(d < 1e-10, "{sym:?} defect {d}");
        }
        // x1 followed by d/dx1 is not symmetric; the defect is order one
        let ns = OperatorSymbol::Composite(vec![crate::algebra::Term::real(
            1.0,
            vec![X1, Xi1],
        )]);
        let op = assemble(ns, p, g).unwrap();
        assert!(hermiticity_defect(&op, &f, &h).unwrap() > 0.1);
    }

    #[test]
    fn linearity_and_expectation() {
        let g = grid();
        let p = params();
        let f = random_smooth_state(&g, 5, 21);
        let h = random_smooth_state(&g, 5, 22);
        let op = assemble(Q1.into(), p, g).unwrap();
        let alpha = Complex64::new(0.3, -0.7);
        let combo = f.add_scaled(alpha, &h).unwrap();
        let lhs = op.apply(&combo).unwrap();
        let rhs = op.apply(&f).unwrap().add_scaled(alpha, &op.apply(&h).unwrap()).unwrap();
        assert!(lhs.sub(&rhs).unwrap().norm() < 1e-12);

        // <q1> on a centered Gaussian is E a / 4
        let gsn = gaussian(&g, &GaussianSpec::centered(1.0, 1.0)).unwrap();
        let e = expectation(&op, &gsn).unwrap();
        assert!(realness_defect(e) < 1e-10);
        assert!((e.re - p.e * 0.25).abs() < 1e-8, "<q1> = {e}");
        // guard trips on unnormalized states
        let bad = gsn.scaled(Complex64::new(2.0, 0.0));
        assert!(matches!(expectation(&op, &bad), Err(NcError::NotNormalized(_))));
    }

    #[test]
    fn gaussian_dispersions() {
        let g = grid();
        let p = params();
        // undeformed x1 dispersion on a = 2 Gaussian: sqrt(a)/2
        let f = gaussian(&g, &GaussianSpec::centered(2.0, 2.0)).unwrap();
        let x1 = assemble(X1.into(), p, g).unwrap();
        let d = dispersion(&x1, &f, 0.0).unwrap();
        assert!((d - (2.0f64).sqrt() / 2.0).abs() < 1e-10, "x1 dispersion {d}");
        // p1 dispersion closed form: (mu/sqrt(a)) sqrt(1 + (eta/(4 mu^2))^2 a b)
        let (a, b) = (1.0, 1.5);
        let f = gaussian(&g, &GaussianSpec::centered(a, b)).unwrap();
        let p1 = assemble(P1.into(), p, g).unwrap();
        let c = expectation(&p1, &f).unwrap().re;
        assert!(c.abs() < 1e-10, "<p1> = {c}");
        let d = dispersion(&p1, &f, c).unwrap();
        let want = p.mu / a.sqrt() * (1.0 + (p.eta / (4.0 * p.mu * p.mu)).powi(2) * a * b).sqrt();
        assert!((d - want).abs() < 1e-8, "p1 dispersion {d} vs {want}");
    }

    #[test]
    fn dilation_scaling_of_dispersions() {
        let g = grid();
        let p = params();
        let f = gaussian(&g, &GaussianSpec::centered(1.0, 1.0)).unwrap();
        let d = dilate(&f, 1.5).unwrap();
        let x1sq = OperatorSymbol::Composite(vec![crate::algebra::Term::real(1.0, vec![X1, X1])]);
        let op = assemble(x1sq, p, g).unwrap();
        let before = dispersion(&op, &f, 0.0).unwrap();
        let after = dispersion(&op, &d, 0.0).unwrap();
        assert!((after - 1.5f64.powi(2) * before).abs() < 1e-8);
        let xi1 = assemble(Xi1.into(), p, g).unwrap();
        let before = dispersion(&xi1, &f, 0.0).unwrap();
        let after = dispersion(&xi1, &d, 0.0).unwrap();
        assert!((after - before / 1.5).abs() < 1e-8);
    }

    use crate::states::dilate;
}
