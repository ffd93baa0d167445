//! Dense univariate polynomials over the complex numbers, used for the
//! algebraic lifts of trigonometric weights and for the orthogonal
//! polynomials themselves. Coefficients are stored in ascending order.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct CPoly {
    coeffs: Vec<Complex64>,
}

impl CPoly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::ONE)
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// Monic polynomial with the given roots, times `scale`.
    pub fn from_roots(roots: &[Complex64], scale: Complex64) -> Self {
        let mut c = vec![scale];
        for r in roots {
            let mut next = vec![Complex64::ZERO; c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= ci * r;
            }
            c = next;
        }
        Self::new(c)
    }

    fn trim(&mut self) {
        while let Some(last) = self.coeffs.last() {
            if last.norm() == 0.0 && self.coeffs.len() > 0 {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the polynomial; the zero polynomial reports degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Complex64 {
        self.coeffs.get(i).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or(Complex64::ZERO)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * (i + 1) as f64)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut c = vec![Complex64::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut c = vec![Complex64::ZERO; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            c[i] += a;
        }
        for (i, &b) in other.coeffs.iter().enumerate() {
            c[i] += b;
        }
        Self::new(c)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-Complex64::ONE))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Multiplies by `z^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = vec![Complex64::ZERO; k];
        c.extend_from_slice(&self.coeffs);
        Self::new(c)
    }

    /// Largest coefficient magnitude.
    pub fn inf_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Conjugate-reversed polynomial `z^n conj(p(1/conj(z)))` for `n = deg p`.
    pub fn reversed_conjugate(&self) -> Self {
        Self::new(self.coeffs.iter().rev().map(|c| c.conj()).collect())
    }

    /// Euclidean division, returning `(quotient, remainder)` with
    /// `self = quotient * divisor + remainder` and `deg remainder < deg divisor`.
    ///
    /// Panics if the divisor is zero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let d = divisor.degree();
        if self.degree() < d {
            return (Self::zero(), self.clone());
        }
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Complex64::ZERO; rem.len() - d];
        for i in (d..rem.len()).rev() {
            let q = rem[i] / lead;
            quot[i - d] = q;
            for (j, &b) in divisor.coeffs.iter().enumerate() {
                rem[i - d + j] -= q * b;
            }
        }
        rem.truncate(d);
        (Self::new(quot), Self::new(rem))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn from_roots_and_eval() {
        let roots = [c(1.0, 0.0), c(0.0, 2.0), c(-0.5, -0.5)];
        let p = CPoly::from_roots(&roots, Complex64::ONE);
        assert_eq!(p.degree(), 3);
        assert!((p.leading() - Complex64::ONE).norm() < 1e-15);
        for r in &roots {
            assert!(p.eval(*r).norm() < 1e-14);
        }
        assert!(p.eval(c(2.0, 0.0)).norm() > 0.1);
    }

    #[test]
    fn arithmetic_consistency() {
        let p = CPoly::new(vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0)]);
        let q = CPoly::new(vec![c(-1.0, 0.5), c(3.0, 0.0)]);
        let z = c(0.7, -0.3);
        let pq = p.mul(&q);
        assert!((pq.eval(z) - p.eval(z) * q.eval(z)).norm() < 1e-13);
        let sum = p.add(&q);
        assert!((sum.eval(z) - p.eval(z) - q.eval(z)).norm() < 1e-13);
        let diff = p.sub(&q);
        assert!((diff.eval(z) - p.eval(z) + q.eval(z)).norm() < 1e-13);
        assert!((p.shift_up(2).eval(z) - z * z * p.eval(z)).norm() < 1e-13);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let p = CPoly::new(vec![c(0.3, 0.1), c(-1.0, 0.0), c(0.0, 2.0), c(1.5, 0.5)]);
        let z = c(0.4, 0.9);
        let h = 1e-6;
        let num = (p.eval(z + c(h, 0.0)) - p.eval(z - c(h, 0.0))) / (2.0 * h);
        assert!((p.derivative().eval(z) - num).norm() < 1e-7);
    }

    #[test]
    fn reversed_conjugate_on_circle() {
        // For z on the unit circle, p*(z) = z^n conj(p(z)) when conj(1/conj z) = z.
        let p = CPoly::new(vec![c(1.0, -0.5), c(0.2, 0.0), c(0.0, 1.0)]);
        let z = Complex64::from_polar(1.0, 0.77);
        let lhs = p.reversed_conjugate().eval(z);
        let rhs = z.powu(2) * p.eval(z).conj();
        // conj(p(1/conj z)) = conj(p(z)) on |z| = 1
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn trim_handles_zero() {
        let p = CPoly::new(vec![c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(p.is_zero());
        assert_eq!(p.degree(), 0);
        assert_eq!(p.eval(c(1.0, 1.0)), Complex64::ZERO);
    }

    #[test]
    fn division_reassembles_the_dividend() {
        let a = CPoly::new(vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(1.0, -1.0)]);
        let b = CPoly::new(vec![c(0.3, -0.2), c(0.0, 0.0), c(1.5, 0.5)]);
        let (q, r) = a.div_rem(&b);
        assert!(r.degree() < b.degree());
        let back = q.mul(&b).add(&r);
        assert!(back.sub(&a).inf_norm() < 1e-13);

        // Exact division leaves no remainder.
        let prod = a.mul(&b);
        let (q2, r2) = prod.div_rem(&a);
        assert!(r2.inf_norm() < 1e-12);
        assert!(q2.sub(&b).inf_norm() < 1e-12);

        // Short dividends pass through as the remainder.
        let (q3, r3) = b.div_rem(&a);
        assert!(q3.is_zero());
        assert!(r3.sub(&b).inf_norm() == 0.0);
    }
}
