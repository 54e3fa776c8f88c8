//! Deformation parameters and the symbolic structure of the non-canonical
//! algebra: commutation relations, and the maps to and from the
//! Heisenberg-Weyl variables.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NcError, Result};

/// Deformation constants theta, eta, epsilon and the derived constants
/// xi = theta*eta, lambda, mu (with 2*lambda*mu = 1 + sqrt(1 - xi)) and
/// the quadratic-correction coefficients E, F.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraParams {
    pub theta: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub xi: f64,
    pub lambda: f64,
    pub mu: f64,
    pub e: f64,
    pub f: f64,
}

impl AlgebraParams {
    /// sqrt(1 - xi), used all over the closure constants.
    pub fn root(&self) -> f64 {
        (1.0 - self.xi).sqrt()
    }

    /// 1 + sqrt(1 - xi).
    pub fn one_plus_root(&self) -> f64 {
        1.0 + self.root()
    }

    /// R acts as multiplication by `r_coef * x1` in the Heisenberg-Weyl
    /// representation: the x1^2 parts of q1 and p2 cancel because
    /// E = -theta*F/(1 + sqrt(1-xi)), and the derivative parts cancel
    /// because 2*lambda*mu = 1 + sqrt(1-xi).
    pub fn r_coef(&self) -> f64 {
        2.0 * self.epsilon * self.lambda * self.root() / self.one_plus_root()
    }
}

/// Derive the full parameter set from (theta, eta, epsilon). `split` is the
/// ratio lambda/mu, defaulting to the symmetric choice lambda = mu.
pub fn derive_constants(
    theta: f64,
    eta: f64,
    epsilon: f64,
    split: Option<f64>,
) -> Result<AlgebraParams> {
    if theta < 0.0 || eta < 0.0 || epsilon < 0.0 {
        return Err(NcError::Domain(format!(
            "theta, eta, epsilon must be nonnegative, got ({theta}, {eta}, {epsilon})"
        )));
    }
    let xi = theta * eta;
    if xi >= 1.0 {
        return Err(NcError::Domain(format!("theta*eta = {xi} must be < 1")));
    }
    let split = split.unwrap_or(1.0);
    if !(split > 0.0) || !split.is_finite() {
        return Err(NcError::Domain(format!("split = lambda/mu must be positive, got {split}")));
    }
    let s = (1.0 - xi).sqrt();
    // 2*lambda*mu = 1 + s and lambda/mu = split
    let lambda = (split * (1.0 + s) / 2.0).sqrt();
    let mu = lambda / split;
    let f = -(lambda / mu) * epsilon * s * (1.0 + s);
    let e = -theta * f / (1.0 + s);
    Ok(AlgebraParams { theta, eta, epsilon, xi, lambda, mu, e, f })
}

/// Fundamental generators and helper symbols of the representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaseSymbol {
    /// Deformed positions and momenta.
    Q1,
    Q2,
    P1,
    P2,
    /// Heisenberg-Weyl positions and momenta (x, -i d/dx).
    X1,
    X2,
    Xi1,
    Xi2,
    /// The operator-valued part of the deformed commutators.
    R,
    Identity,
}

impl BaseSymbol {
    pub fn is_fundamental(&self) -> bool {
        matches!(self, BaseSymbol::Q1 | BaseSymbol::Q2 | BaseSymbol::P1 | BaseSymbol::P2)
    }

    pub fn is_hw(&self) -> bool {
        matches!(self, BaseSymbol::X1 | BaseSymbol::X2 | BaseSymbol::Xi1 | BaseSymbol::Xi2)
    }
}

/// One summand of a composite: coefficient times an ordered product of
/// base symbols, applied right-to-left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: Complex64,
    pub factors: Vec<BaseSymbol>,
}

impl Term {
    pub fn new(coeff: Complex64, factors: Vec<BaseSymbol>) -> Self {
        Self { coeff, factors }
    }

    pub fn real(c: f64, factors: Vec<BaseSymbol>) -> Self {
        Self::new(Complex64::new(c, 0.0), factors)
    }

    pub fn imag(c: f64, factors: Vec<BaseSymbol>) -> Self {
        Self::new(Complex64::new(0.0, c), factors)
    }
}

/// A base symbol or a finite linear combination of finite products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OperatorSymbol {
    Base(BaseSymbol),
    Composite(Vec<Term>),
}

impl OperatorSymbol {
    pub fn zero() -> Self {
        OperatorSymbol::Composite(Vec::new())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, OperatorSymbol::Composite(t) if t.is_empty())
    }

    pub fn terms(&self) -> Vec<Term> {
        match self {
            OperatorSymbol::Base(b) => vec![Term::real(1.0, vec![*b])],
            OperatorSymbol::Composite(terms) => terms.clone(),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let terms = self
            .terms()
            .into_iter()
            .map(|t| Term::new(c * t.coeff, t.factors))
            .collect();
        OperatorSymbol::Composite(terms)
    }
}

impl From<BaseSymbol> for OperatorSymbol {
    fn from(b: BaseSymbol) -> Self {
        OperatorSymbol::Base(b)
    }
}

/// Right-hand side of the commutator [i, j] of two fundamental symbols,
/// as a composite over {Identity, R}:
///   [q1, q2] = i theta (I + theta R)
///   [p1, p2] = i (eta I + (1 + sqrt(1-xi))^2 R)
///   [q1, p1] = [q2, p2] = i (I + theta (1 + sqrt(1-xi)) R)
/// and every remaining pair vanishes.
pub fn commutator_closure(
    params: &AlgebraParams,
    i: BaseSymbol,
    j: BaseSymbol,
) -> Result<OperatorSymbol> {
    use BaseSymbol::*;
    if !i.is_fundamental() || !j.is_fundamental() {
        return Err(NcError::UnsupportedSymbol(format!(
            "commutator closure is defined for fundamental pairs, got [{i:?}, {j:?}]"
        )));
    }
    let plus = params.one_plus_root();
    // at epsilon = 0 the operator R is identically zero; drop its term
    let r_alive = params.epsilon > 0.0;
    let closure = |a: f64, b: f64| {
        let mut terms = vec![Term::imag(a, vec![Identity])];
        if r_alive {
            terms.push(Term::imag(b, vec![R]));
        }
        OperatorSymbol::Composite(terms)
    };
    let (sign, pair) = ordered_pair(i, j);
    let rhs = match pair {
        (Q1, Q2) => closure(params.theta, params.theta * params.theta),
        (P1, P2) => closure(params.eta, plus * plus),
        (Q1, P1) | (Q2, P2) => closure(1.0, params.theta * plus),
        _ => return Ok(OperatorSymbol::zero()),
    };
    let rhs = prune(rhs);
    Ok(if sign < 0 { rhs.scaled(Complex64::new(-1.0, 0.0)) } else { rhs })
}

fn ordered_pair(i: BaseSymbol, j: BaseSymbol) -> (i32, (BaseSymbol, BaseSymbol)) {
    use BaseSymbol::*;
    let rank = |s: BaseSymbol| match s {
        Q1 => 0,
        Q2 => 1,
        P1 => 2,
        P2 => 3,
        _ => 4,
    };
    if rank(i) <= rank(j) {
        (1, (i, j))
    } else {
        (-1, (j, i))
    }
}

/// Express a deformed symbol in the Heisenberg-Weyl variables:
///   q1 = lambda x1 - (theta/2lambda) xi2 + E x1^2
///   q2 = lambda x2 + (theta/2lambda) xi1
///   p1 = mu xi1 + (eta/2mu) x2
///   p2 = mu xi2 - (eta/2mu) x1 + F x1^2
pub fn forward_map(params: &AlgebraParams, s: BaseSymbol) -> Result<OperatorSymbol> {
    use BaseSymbol::*;
    let p = params;
    let sym = match s {
        Q1 => OperatorSymbol::Composite(vec![
            Term::real(p.lambda, vec![X1]),
            Term::real(-p.theta / (2.0 * p.lambda), vec![Xi2]),
            Term::real(p.e, vec![X1, X1]),
        ]),
        Q2 => OperatorSymbol::Composite(vec![
            Term::real(p.lambda, vec![X2]),
            Term::real(p.theta / (2.0 * p.lambda), vec![Xi1]),
        ]),
        P1 => OperatorSymbol::Composite(vec![
            Term::real(p.mu, vec![Xi1]),
            Term::real(p.eta / (2.0 * p.mu), vec![X2]),
        ]),
        P2 => OperatorSymbol::Composite(vec![
            Term::real(p.mu, vec![Xi2]),
            Term::real(-p.eta / (2.0 * p.mu), vec![X1]),
            Term::real(p.f, vec![X1, X1]),
        ]),
        other => {
            return Err(NcError::UnsupportedSymbol(format!(
                "forward map takes fundamental symbols, got {other:?}"
            )))
        }
    };
    Ok(prune(sym))
}

/// Express a Heisenberg-Weyl symbol in the deformed variables:
///   x1  = (mu q1 + (theta/2lambda) p2) / sqrt(1-xi)
///   x2  = (mu q2 - (theta/2lambda) p1) / sqrt(1-xi)
///   xi1 = (lambda p1 - (eta/2mu) q2) / sqrt(1-xi)
///   xi2 = (lambda p2 + (eta/2mu) q1 - F mu/(eps^2 sqrt(1-xi)) R^2) / sqrt(1-xi)
/// At epsilon = 0 the R^2 coefficient is the removable 0/0 form; since
/// F is proportional to epsilon the term is exactly zero and is dropped.
pub fn inverse_map(params: &AlgebraParams, s: BaseSymbol) -> Result<OperatorSymbol> {
    use BaseSymbol::*;
    let p = params;
    let root = p.root();
    if !(root > 0.0) {
        return Err(NcError::Domain("inverse map requires xi < 1".into()));
    }
    let sym = match s {
        X1 => OperatorSymbol::Composite(vec![
            Term::real(p.mu / root, vec![Q1]),
            Term::real(p.theta / (2.0 * p.lambda * root), vec![P2]),
        ]),
        X2 => OperatorSymbol::Composite(vec![
            Term::real(p.mu / root, vec![Q2]),
            Term::real(-p.theta / (2.0 * p.lambda * root), vec![P1]),
        ]),
        Xi1 => OperatorSymbol::Composite(vec![
            Term::real(p.lambda / root, vec![P1]),
            Term::real(-p.eta / (2.0 * p.mu * root), vec![Q2]),
        ]),
        Xi2 => {
            let mut terms = vec![
                Term::real(p.lambda / root, vec![P2]),
                Term::real(p.eta / (2.0 * p.mu * root), vec![Q1]),
            ];
            if p.epsilon > 0.0 {
                let c = -p.f * p.mu / (p.epsilon * p.epsilon * root * root);
                terms.push(Term::real(c, vec![R, R]));
            }
            OperatorSymbol::Composite(terms)
        }
        other => {
            return Err(NcError::UnsupportedSymbol(format!(
                "inverse map takes Heisenberg-Weyl symbols, got {other:?}"
            )))
        }
    };
    Ok(prune(sym))
}

fn prune(sym: OperatorSymbol) -> OperatorSymbol {
    match sym {
        OperatorSymbol::Composite(terms) => OperatorSymbol::Composite(
            terms.into_iter().filter(|t| t.coeff.norm() > 0.0).collect(),
        ),
        base => base,
    }
}
