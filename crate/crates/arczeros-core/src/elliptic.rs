//! Complete elliptic integrals, Jacobi elliptic functions for complex
//! argument, and the two Jacobi theta-like functions `H` and `theta`
//! built on the nome of the modulus.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EllipticError {
    #[error("modulus k = {0} outside the open interval (0, 1)")]
    ModulusOutOfRange(f64),
    #[error("argument within {dist:.3e} of a pole of sn/cn/dn")]
    PoleProximity { dist: f64 },
    #[error("theta series needs more than {terms} terms for tail {tail:.3e}")]
    TruncationFailure { terms: usize, tail: f64 },
}

/// Square modulus data shared by every elliptic evaluation: `k`, the
/// complementary `k'`, quarter periods `K`, `K'`, and the nome `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus {
    pub k: f64,
    pub k_prime: f64,
    pub big_k: f64,
    pub big_k_prime: f64,
    pub q: f64,
}

impl EllipticModulus {
    /// Builds the modulus data from `k` in (0, 1) via AGM evaluations of
    /// both quarter periods.
    pub fn new(k: f64) -> Result<Self, EllipticError> {
        if !(k > 0.0 && k < 1.0) || !k.is_finite() {
            return Err(EllipticError::ModulusOutOfRange(k));
        }
        let k_prime = (1.0 - k * k).sqrt();
        let big_k = complete_elliptic_k(k)?;
        let big_k_prime = complete_elliptic_k(k_prime)?;
        let q = (-std::f64::consts::PI * big_k_prime / big_k).exp();
        Ok(Self {
            k,
            k_prime,
            big_k,
            big_k_prime,
            q,
        })
    }

    /// True when the nome is large enough that theta-series conditioning
    /// starts to degrade; callers surface this as a warning.
    pub fn poorly_conditioned(&self) -> bool {
        self.q > 0.95
    }
}

/// Complete elliptic integral of the first kind via the arithmetic
/// geometric mean, `K(k) = pi / (2 agm(1, k'))`.
pub fn complete_elliptic_k(k: f64) -> Result<f64, EllipticError> {
    if !(k >= 0.0 && k < 1.0) || !k.is_finite() {
        return Err(EllipticError::ModulusOutOfRange(k));
    }
    let mut a = 1.0_f64;
    let mut b = (1.0 - k * k).sqrt();
    for _ in 0..64 {
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    Ok(std::f64::consts::FRAC_PI_2 / a)
}

/// Jacobi sn, cn, dn for real argument: descending Landen scale down to
/// the circular limit, then a backward pass that carries all three
/// functions together (stable at `x = K` where the naive phi recurrence
/// for dn degenerates to 0/0).
fn jacobi_real(x: f64, k: f64) -> (f64, f64, f64) {
    debug_assert!((0.0..1.0).contains(&k));
    if k < 1e-14 {
        return (x.sin(), x.cos(), 1.0);
    }
    let mut emc = (1.0 - k) * (1.0 + k);
    let mut a = 1.0_f64;
    let mut dn = 1.0_f64;
    let mut em = [0.0_f64; 24];
    let mut en = [0.0_f64; 24];
    let mut level = 0usize;
    let mut c = 0.0_f64;
    for i in 0..24 {
        level = i;
        em[i] = a;
        emc = emc.sqrt();
        en[i] = emc;
        c = 0.5 * (a + emc);
        if (a - emc).abs() <= 2.0 * f64::EPSILON * a {
            break;
        }
        emc *= a;
        a = c;
    }
    let u = x * c;
    let mut sn = u.sin();
    let mut cn = u.cos();
    if sn != 0.0 {
        a = cn / sn;
        c *= a;
        for i in (0..=level).rev() {
            let b = em[i];
            a *= c;
            c *= dn;
            dn = (en[i] + a) / (b + a);
            a = c / b;
        }
        a = 1.0 / (c * c + 1.0).sqrt();
        sn = if sn >= 0.0 { a } else { -a };
        cn = c * sn;
    }
    (sn, cn, dn)
}

/// Jacobi elliptic functions sn, cn, dn of a complex argument, computed
/// from the real/imaginary addition split
/// `sn(x+iy, k) = (s d1 + i c d s1 c1) / (c1^2 + k^2 s^2 s1^2)`
/// with `s1 = sn(y, k')` and friends. Arguments are first reduced by the
/// real periods of each real-axis factor. Fails when the argument is too
/// close to a pole (`u = i K'` modulo periods).
pub fn jacobi_sn_cn_dn(
    u: Complex64,
    m: &EllipticModulus,
) -> Result<(Complex64, Complex64, Complex64), EllipticError> {
    let (kk, kp) = (m.big_k, m.big_k_prime);
    // Reduce x modulo 4K and y modulo 4K' exactly through sign bookkeeping:
    // sn(x + 2K) = -sn(x), cn(x + 2K) = -cn(x), dn(x + 2K) = dn(x).
    let mut x = u.re;
    let mut y = u.im;
    let mx = (x / (2.0 * kk)).round();
    x -= 2.0 * kk * mx;
    let sign_x = if (mx as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let my = (y / (2.0 * kp)).round();
    y -= 2.0 * kp * my;
    let sign_y = if (my as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };

    let (s, c, d) = jacobi_real(x, m.k);
    let (s1_, c1_, d1) = jacobi_real(y, m.k_prime);
    let (s1, c1) = (sign_y * s1_, sign_y * c1_);
    let (s, c) = (sign_x * s, sign_x * c);

    let denom = c1 * c1 + m.k * m.k * s * s * s1 * s1;
    if denom.abs() < 1e-30 {
        return Err(EllipticError::PoleProximity { dist: denom.abs().sqrt() });
    }
    let i = Complex64::I;
    let sn = (Complex64::new(s * d1, 0.0) + i * (c * d * s1 * c1)) / denom;
    let cn = (Complex64::new(c * c1, 0.0) - i * (s * d * s1 * d1)) / denom;
    let dn = (Complex64::new(d * c1 * d1, 0.0) - i * (m.k * m.k * s * c * s1)) / denom;
    Ok((sn, cn, dn))
}

/// Truncation policy for the `H`/`theta` series.
#[derive(Debug, Clone, Copy)]
pub struct ThetaConfig {
    /// Hard cap on the number of series terms.
    pub truncation: usize,
    /// Target bound for the neglected tail.
    pub tolerance: f64,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        Self {
            truncation: 64,
            tolerance: 1e-14,
        }
    }
}

/// Reduces `t` to `t - 2K m - 2i K' n` with real part in [-K, K) and
/// imaginary part in (-K', K'], returning the reduced argument and the
/// integer shifts `(m, n)`.
pub(crate) fn reduce_argument(t: Complex64, md: &EllipticModulus) -> (Complex64, i64, i64) {
    let n = ((t.im + md.big_k_prime) / (2.0 * md.big_k_prime)).ceil() - 1.0;
    let m = ((t.re + md.big_k) / (2.0 * md.big_k)).floor();
    let reduced = Complex64::new(
        t.re - 2.0 * md.big_k * m,
        t.im - 2.0 * md.big_k_prime * n,
    );
    (reduced, m as i64, n as i64)
}

/// Multiplier picked up by `H` and `theta` under the lattice shift that
/// `reduce_argument` undoes: both satisfy
/// `F(t + 2iK' n) = (-1)^n q^{-n^2} e^{-i pi n t / K} F(t)`,
/// while the real shift contributes `(-1)^m` for `H` and `1` for `theta`.
fn shift_factor(reduced: Complex64, m: i64, n: i64, md: &EllipticModulus, odd_real: bool) -> Complex64 {
    // exp of  n^2 * pi K'/K  - i pi n t / K, assembled in log space.
    let log_mag = (n * n) as f64 * std::f64::consts::PI * md.big_k_prime / md.big_k
        + std::f64::consts::PI * n as f64 * reduced.im / md.big_k;
    let phase = -std::f64::consts::PI * n as f64 * reduced.re / md.big_k;
    let mut f = Complex64::from_polar(log_mag.exp(), phase);
    if n.rem_euclid(2) == 1 {
        f = -f;
    }
    if odd_real && m.rem_euclid(2) == 1 {
        f = -f;
    }
    f
}

/// The odd theta-like function
/// `H(t) = 2 sum_{j>=0} (-1)^j q^{(j+1/2)^2} sin((2j+1) pi t / (2K))`.
///
/// Arguments are reduced into the fundamental rectangle first, so the
/// series converges fast for any `t`; the quasi-periodicity factors are
/// restored exactly afterwards.
pub fn theta_h(t: Complex64, md: &EllipticModulus, cfg: &ThetaConfig) -> Result<Complex64, EllipticError> {
    let (red, m, n) = reduce_argument(t, md);
    let factor = shift_factor(red, m, n, md, true);
    let half_pi_over_k = std::f64::consts::PI / (2.0 * md.big_k);
    let mut sum = Complex64::ZERO;
    let cut = cfg.tolerance * 1e-2;
    let mut converged = false;
    let mut tail = f64::INFINITY;
    for j in 0..cfg.truncation {
        let jh = j as f64 + 0.5;
        let coeff = md.q.powf(jh * jh) * if j % 2 == 0 { 2.0 } else { -2.0 };
        let arg = red * ((2 * j + 1) as f64 * half_pi_over_k);
        sum += coeff * arg.sin();
        // |sin| grows at most like q^{-(j+1/2)} once |Im red| <= K'.
        tail = md.q.powf(jh * jh - jh).abs() * 2.0;
        if tail < cut {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(EllipticError::TruncationFailure {
            terms: cfg.truncation,
            tail,
        });
    }
    Ok(factor * sum)
}

/// The even companion
/// `theta(t) = 1 + 2 sum_{j>=1} (-1)^j q^{j^2} cos(j pi t / K)`,
/// with the same argument reduction strategy as `theta_h`.
pub fn theta_t(t: Complex64, md: &EllipticModulus, cfg: &ThetaConfig) -> Result<Complex64, EllipticError> {
    let (red, m, n) = reduce_argument(t, md);
    let factor = shift_factor(red, m, n, md, false);
    let pi_over_k = std::f64::consts::PI / md.big_k;
    let mut sum = Complex64::ONE;
    let cut = cfg.tolerance * 1e-2;
    let mut converged = false;
    let mut tail = f64::INFINITY;
    for j in 1..=cfg.truncation {
        let jf = j as f64;
        let coeff = md.q.powf(jf * jf) * if j % 2 == 0 { 2.0 } else { -2.0 };
        let arg = red * (jf * pi_over_k);
        sum += coeff * arg.cos();
        tail = md.q.powf(jf * jf - jf) * 2.0;
        if tail < cut {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(EllipticError::TruncationFailure {
            terms: cfg.truncation,
            tail,
        });
    }
    Ok(factor * sum)
}
