//! Orthogonal polynomials straight from the moments: Toeplitz recursion
//! with a dense fallback, companion-matrix zeros, and the quadratic
//! identity that ties the polynomial to the split weight factors.

use num_complex::Complex64;
use thiserror::Error;

use crate::poly::CPoly;
use crate::weight::{MomentTable, WeightError, WeightModel};

#[derive(Debug, Error)]
pub enum OrthoError {
    #[error("Toeplitz section {index} is singular or indefinite; the functional is not definite there")]
    SingularSection { index: usize },
    #[error("need moments through index {needed}, table holds {have}")]
    MomentsExhausted { needed: usize, have: usize },
    #[error("eigenvalue iteration failed on the companion matrix")]
    RootsFailed,
    #[error(transparent)]
    Weight(#[from] WeightError),
}

/// Monic polynomial: leading coefficient exactly one.
#[derive(Debug, Clone)]
pub struct MonicPolynomial {
    poly: CPoly,
}

impl MonicPolynomial {
    /// Normalizes by the leading coefficient, which must be nonzero.
    pub fn new(poly: CPoly) -> Self {
        let lead = poly.leading();
        assert!(lead.norm() > 0.0, "cannot normalize the zero polynomial");
        Self {
            poly: poly.scale(1.0 / lead),
        }
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.poly.eval(z)
    }

    pub fn poly(&self) -> &CPoly {
        &self.poly
    }

    pub fn coeffs(&self) -> &[Complex64] {
        self.poly.coeffs()
    }
}

/// Roots of a polynomial with the worst polished residual, relative to
/// the largest coefficient. The cluster flag warns that two roots sit
/// close enough for multiplicity to be numerically ambiguous.
#[derive(Debug, Clone)]
pub struct ZeroSet {
    pub zeros: Vec<Complex64>,
    pub residual_bound: f64,
    pub clustered: bool,
}

/// Outcome of checking the quadratic relation between P, Q and the split
/// factors: the extracted linear factor g, the multiplicity of P's zero
/// at the origin, and the worst relative coefficient residual.
#[derive(Debug, Clone)]
pub struct QuadraticIdentityReport {
    pub q: CPoly,
    pub g0: Complex64,
    pub g1: Complex64,
    pub p_zero_mult: usize,
    pub residual: f64,
}

/// Residuals of the side conditions that pin Q against P: the worst
/// mismatch of V Q = lambda sqrt(R) P over the weight factor zeros, the
/// ratio of the two sides at the origin (must be 1), and the mismatch of
/// the reversed-coefficient normalization.
#[derive(Debug, Clone)]
pub struct MatchingReport {
    pub factor_max: f64,
    pub origin_ratio: Complex64,
    pub reciprocal_residual: f64,
}

/// L applied to z^{-k} p(z): sum of p_j c_{k-j}.
pub fn apply_functional(table: &MomentTable, p: &CPoly, k: i64) -> Complex64 {
    p.coeffs()
        .iter()
        .enumerate()
        .map(|(j, pj)| pj * table.moment(k - j as i64))
        .sum()
}

/// Largest orthogonality defect of p against z^0 .. z^{n-1}.
pub fn orthogonality_residual(table: &MomentTable, p: &MonicPolynomial) -> f64 {
    (0..p.degree() as i64)
        .map(|k| apply_functional(table, p.poly(), k).norm())
        .fold(0.0, f64::max)
}

/// Monic orthogonal polynomial of degree n by the reflection-coefficient
/// recursion on the Toeplitz moment matrix, falling back to a dense
/// solve when a reflection coefficient approaches the unit circle.
pub fn orthogonal_polynomial(
    table: &MomentTable,
    n: usize,
) -> Result<MonicPolynomial, OrthoError> {
    if table.max_index() < n {
        return Err(OrthoError::MomentsExhausted {
            needed: n,
            have: table.max_index(),
        });
    }
    let mut p = CPoly::one();
    for m in 0..n {
        // Squared norm of the current polynomial under the functional;
        // positive when the section is definite.
        let energy = apply_functional(table, &p, m as i64);
        if !(energy.re > 0.0) || !energy.re.is_finite() {
            // The recursion lost definiteness; the dense path still works
            // whenever the order-n minor itself is nonsingular.
            return dense_orthogonal(table, n).ok_or(OrthoError::SingularSection { index: n });
        }
        let eta = apply_functional(table, &p, -1);
        let rho = eta / energy.re;
        if rho.norm() > 1.0 - 1e-12 {
            return dense_orthogonal(table, n).ok_or(OrthoError::SingularSection { index: n });
        }
        // p has exact degree m with unit leading coefficient, so the
        // plain coefficient reversal is the degree-m star.
        let star = p.reversed_conjugate();
        p = p.shift_up(1).sub(&star.scale(rho));
    }
    Ok(MonicPolynomial::new(p))
}

/// Same polynomial from the normal equations, solved densely. Returns
/// None when the section is singular.
pub fn dense_orthogonal(table: &MomentTable, n: usize) -> Option<MonicPolynomial> {
    if n == 0 {
        return Some(MonicPolynomial::new(CPoly::one()));
    }
    if table.max_index() < n {
        return None;
    }
    let m = nalgebra::DMatrix::from_fn(n, n, |k, j| table.moment(k as i64 - j as i64));
    let b = nalgebra::DVector::from_fn(n, |k, _| -table.moment(k as i64 - n as i64));
    let sol = m.lu().solve(&b)?;
    let mut coeffs: Vec<Complex64> = sol.iter().copied().collect();
    coeffs.push(Complex64::ONE);
    Some(MonicPolynomial::new(CPoly::new(coeffs)))
}

/// All roots via the companion matrix, each polished by a couple of
/// Newton steps.
pub fn polynomial_zeros(p: &MonicPolynomial) -> Result<ZeroSet, OrthoError> {
    let n = p.degree();
    assert!(n >= 1, "constants have no zeros to find");
    let c = p.coeffs();
    let companion = nalgebra::DMatrix::from_fn(n, n, |r, col| {
        if col == n - 1 {
            -c[r]
        } else if r == col + 1 {
            Complex64::ONE
        } else {
            Complex64::ZERO
        }
    });
    let eig = companion
        .schur()
        .eigenvalues()
        .ok_or(OrthoError::RootsFailed)?;
    let deriv = p.poly().derivative();
    let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut zeros = Vec::with_capacity(n);
    let mut worst = 0.0f64;
    for &e in eig.iter() {
        let mut z = e;
        for _ in 0..3 {
            let val = p.eval(z);
            if val.norm() <= 1e-14 * scale {
                break;
            }
            let d = deriv.eval(z);
            if d.norm() == 0.0 {
                break;
            }
            let step = val / d;
            let candidate = z - step;
            if p.eval(candidate).norm() < val.norm() {
                z = candidate;
            } else {
                break;
            }
        }
        worst = worst.max(p.eval(z).norm() / scale);
        zeros.push(z);
    }
    let mut clustered = false;
    for i in 0..zeros.len() {
        for j in i + 1..zeros.len() {
            if (zeros[i] - zeros[j]).norm() < 1e-7 * (1.0 + zeros[i].norm()) {
                clustered = true;
            }
        }
    }
    Ok(ZeroSet {
        zeros,
        residual_bound: worst,
        clustered,
    })
}

/// Checks W P^2 - V Q^2 = z^(n+p-(a+1-w)) A g with g linear, extracting
/// g from the two lowest surviving coefficients and reporting the worst
/// relative coefficient mismatch.
pub fn verify_quadratic_identity(
    model: &WeightModel,
    p: &MonicPolynomial,
    q: &CPoly,
    n: usize,
) -> QuadraticIdentityReport {
    let p_sq = p.poly().mul(p.poly());
    let q_sq = q.mul(q);
    let lhs = model
        .split
        .w_lift()
        .mul(&p_sq)
        .sub(&model.split.v_lift().mul(&q_sq));
    let p_zero_mult = if p.eval(Complex64::ZERO).norm() < 1e-9 { 1 } else { 0 };
    let pow = (n as i32 + p_zero_mult as i32 - model.a_minus_w() - 1).max(0) as usize;
    let a = model.a_factor.lift();
    let a0 = a.coeff(0);
    let g0 = lhs.coeff(pow) / a0;
    let g1 = (lhs.coeff(pow + 1) - a.coeff(1) * g0) / a0;
    let g = CPoly::new(vec![g0, g1]);
    let rhs = a.mul(&g).shift_up(pow);
    let residual = lhs.sub(&rhs).inf_norm() / lhs.inf_norm().max(f64::MIN_POSITIVE);
    QuadraticIdentityReport {
        q: q.clone(),
        g0,
        g1,
        p_zero_mult,
        residual,
    }
}

/// Residuals of the conditions that select Q among the two square roots:
/// agreement with lambda sqrt(R) P at every weight factor zero, the unit
/// ratio at the origin, and the reversed-coefficient normalization
/// V(0) conj(lead Q) = sqrt(R)(0).
pub fn verify_matching_conditions(
    model: &WeightModel,
    p: &MonicPolynomial,
    q: &CPoly,
) -> Result<MatchingReport, OrthoError> {
    let v = model.split.v_lift();
    let mut factor_max = 0.0f64;
    for f in &model.a_factor.factors {
        let zj = f.z();
        let lhs = v.eval(zj) * q.eval(zj);
        let rhs = f.lambda as f64 * model.sqrt_r(zj)? * p.eval(zj);
        let scale = lhs.norm().max(rhs.norm()).max(1e-300);
        factor_max = factor_max.max((lhs - rhs).norm() / scale);
    }
    let sr0 = model.sqrt_r(Complex64::ZERO)?;
    let origin_ratio = v.eval(Complex64::ZERO) * q.eval(Complex64::ZERO)
        / (sr0 * p.eval(Complex64::ZERO));
    let q_nominal_degree = p.degree() + 2 - model.split.two_v as usize;
    let lead = q.coeff(q_nominal_degree);
    let lhs = v.eval(Complex64::ZERO) * lead.conj();
    let reciprocal_residual = (lhs - sr0).norm() / sr0.norm();
    Ok(MatchingReport {
        factor_max,
        origin_ratio,
        reciprocal_residual,
    })
}
