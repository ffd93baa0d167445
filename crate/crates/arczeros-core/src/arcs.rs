//! Two arcs on the unit circle and the conformal map from the rectangle
//! onto the complement of the arcs, together with the potential theory
//! read off from that map: Green's function, harmonic measure of the
//! second arc, logarithmic capacity, and the interior curve toward which
//! zeros of the orthogonal polynomials are drawn.

use num_complex::Complex64;
use thiserror::Error;

use crate::elliptic::{
    jacobi_sn_cn_dn, reduce_argument, theta_h, EllipticError, EllipticModulus, ThetaConfig,
};

const TAU: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum ArcError {
    #[error("arc endpoints must be strictly increasing within one period, got {angles:?}")]
    OrderingViolation { angles: [f64; 4] },
    #[error("cross ratio of the arc endpoints is {value}, not a real number in (0, 1)")]
    ModulusNotReal { value: Complex64 },
    #[error("Moebius images of the endpoints fall outside -1 < alpha < beta < 1: alpha = {alpha}, beta = {beta}")]
    EndpointImagesOutOfRange { alpha: f64, beta: f64 },
    #[error("the two closed forms for beta disagree by {discrepancy:.3e}")]
    BetaMismatch { discrepancy: f64 },
    #[error("pole solve did not converge: residual {residual:.3e}")]
    PoleNotFound { residual: f64 },
    #[error("inversion of the conformal map failed for z = {z}: residual {residual:.3e}")]
    InversionFailure { z: Complex64, residual: f64 },
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
}

/// Four arc endpoints in working coordinates, where the outer pair is
/// symmetric about the real axis: phi1 + phi4 = 2 pi. The rotation that
/// was applied to get here is retained so callers can convert results
/// back to the coordinates they supplied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcConfiguration {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
    pub phi4: f64,
    /// Working angle = supplied angle - rotation_psi.
    pub rotation_psi: f64,
}

impl ArcConfiguration {
    /// Rotates the supplied endpoints so that phi1 + phi4 = 2 pi. The
    /// input only needs strict ordering within one period; the rotation
    /// psi = (raw1 + raw4)/2 - pi is recorded for round trips.
    pub fn normalize(raw: [f64; 4]) -> Result<Self, ArcError> {
        let ordered = raw.iter().all(|a| a.is_finite())
            && raw[0] < raw[1]
            && raw[1] < raw[2]
            && raw[2] < raw[3]
            && raw[3] < raw[0] + TAU;
        if !ordered {
            return Err(ArcError::OrderingViolation { angles: raw });
        }
        let psi = (raw[0] + raw[3]) / 2.0 - std::f64::consts::PI;
        Ok(Self {
            phi1: raw[0] - psi,
            phi2: raw[1] - psi,
            phi3: raw[2] - psi,
            phi4: raw[3] - psi,
            rotation_psi: psi,
        })
    }

    pub fn angles(&self) -> [f64; 4] {
        [self.phi1, self.phi2, self.phi3, self.phi4]
    }

    /// Endpoints as supplied before normalization.
    pub fn original_angles(&self) -> [f64; 4] {
        [
            self.phi1 + self.rotation_psi,
            self.phi2 + self.rotation_psi,
            self.phi3 + self.rotation_psi,
            self.phi4 + self.rotation_psi,
        ]
    }

    /// Endpoint e^{i phi_j} in working coordinates, j in 1..=4.
    pub fn endpoint(&self, j: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.angles()[j - 1])
    }

    /// Working coordinates -> supplied coordinates.
    pub fn to_original(&self, z: Complex64) -> Complex64 {
        z * Complex64::from_polar(1.0, self.rotation_psi)
    }

    /// Supplied coordinates -> working coordinates.
    pub fn from_original(&self, z: Complex64) -> Complex64 {
        z * Complex64::from_polar(1.0, -self.rotation_psi)
    }

    /// True when the second arc mirrors the first across the real axis,
    /// which is the fully symmetric configuration.
    pub fn is_symmetric(&self) -> bool {
        (self.phi2 + self.phi3 - TAU).abs() <= 1e-12
    }

    /// Which arc, if any, contains the working angle: 1, 2, or None for
    /// the gaps. Endpoints count as on the arc.
    pub fn arc_of_angle(&self, theta: f64) -> Option<usize> {
        let t = theta.rem_euclid(TAU);
        if t >= self.phi1 && t <= self.phi2 {
            Some(1)
        } else if t >= self.phi3 && t <= self.phi4 {
            Some(2)
        } else {
            None
        }
    }
}

/// Double relation (z4 - z1)(z3 - z2) / ((z4 - z2)(z3 - z1)).
fn cross_ratio(z: [Complex64; 4]) -> Complex64 {
    ((z[3] - z[0]) / (z[3] - z[1])) / ((z[2] - z[0]) / (z[2] - z[1]))
}

/// The elliptic modulus of the exterior domain: k^2 is the double
/// relation of the four endpoints, which is real in (0, 1) for every
/// admissible pair of disjoint arcs.
pub fn modulus_from_cross_ratio(cfg: &ArcConfiguration) -> Result<EllipticModulus, ArcError> {
    let k_sq = cross_ratio([
        cfg.endpoint(1),
        cfg.endpoint(2),
        cfg.endpoint(3),
        cfg.endpoint(4),
    ]);
    if k_sq.im.abs() > 1e-10 || !(k_sq.re > 0.0 && k_sq.re < 1.0) {
        return Err(ArcError::ModulusNotReal { value: k_sq });
    }
    Ok(EllipticModulus::new(k_sq.re.sqrt())?)
}

/// Sampled trace of the interior critical curve: the image of the
/// horizontal line Im u = Im zeta + K' under the conformal map.
#[derive(Debug, Clone)]
pub struct CurveS {
    /// Height of the preimage line inside the rectangle.
    pub level: f64,
    /// Samples ordered from the arc-1 end to the arc-2 end.
    pub samples: Vec<Complex64>,
}

/// Everything derived from the arc endpoints that the conformal map
/// needs: modulus, Moebius data, the pole zeta of the map, and a coarse
/// seed grid for numeric inversion. Immutable after construction.
#[derive(Debug, Clone)]
pub struct EllipticFrame {
    pub cfg: ArcConfiguration,
    pub modulus: EllipticModulus,
    /// Pole of the map inside the rectangle: the preimage of infinity.
    pub zeta: Complex64,
    /// Moebius image of e^{i phi2}; alpha = 1 - 2 sn^2 a.
    pub alpha: f64,
    /// Moebius image of e^{i phi3}.
    pub beta: f64,
    /// sn^2 of the real parameter a encoding alpha.
    pub sn_a_sq: Complex64,
    pub tan_half_phi1: f64,
    /// Residual between the two closed forms available for beta; kept as
    /// a diagnostic of how consistent the modulus is with the endpoints.
    pub beta_discrepancy: f64,
    theta_cfg: ThetaConfig,
    /// z = (mob_a s + mob_b)/(conj(mob_a) s + conj(mob_b)) with s = sn^2 u.
    mob_a: Complex64,
    mob_b: Complex64,
    /// Value of sn^2 at the pole zeta.
    sn_sq_zeta: Complex64,
    /// (u, sn^2 u) over a 64x64 grid covering the rectangle, used to seed
    /// Newton iterations; computed once and read-only afterwards.
    seeds: Vec<(Complex64, Complex64)>,
}

const SEED_GRID: usize = 64;
const NEWTON_CAP: usize = 80;

fn chordal(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
}

impl EllipticFrame {
    pub fn build(cfg: ArcConfiguration) -> Result<Self, ArcError> {
        let modulus = modulus_from_cross_ratio(&cfg)?;
        let half1 = cfg.phi1 / 2.0;
        let half2 = cfg.phi2 / 2.0;
        let half3 = cfg.phi3 / 2.0;
        let tan_half_phi1 = half1.tan();
        let alpha = -tan_half_phi1 * half2.cos() / half2.sin();
        let beta = -tan_half_phi1 * half3.cos() / half3.sin();
        if !(-1.0 < alpha && alpha < beta && beta < 1.0) {
            return Err(ArcError::EndpointImagesOutOfRange { alpha, beta });
        }
        let sn_a_sq = (1.0 - alpha) / 2.0;
        let cn_a_sq = 1.0 - sn_a_sq;
        let dn_a_sq = 1.0 - modulus.k * modulus.k * sn_a_sq;
        // Second closed form for beta; its agreement with the Moebius
        // image of e^{i phi3} is what ties the cross-ratio modulus to
        // the arc endpoints, so treat disagreement as a hard error.
        let beta_from_a = 2.0 * cn_a_sq / dn_a_sq - 1.0;
        let beta_discrepancy = (beta_from_a - beta).abs();
        if beta_discrepancy > 1e-8 {
            return Err(ArcError::BetaMismatch {
                discrepancy: beta_discrepancy,
            });
        }

        let mob_a = 2.0 * half1.sin() * Complex64::from_polar(1.0, half2);
        let mob_b = (alpha - 1.0) * half2.sin() * Complex64::from_polar(1.0, half1);
        // Pole of the map: the denominator conj(mob_a) s + conj(mob_b)
        // vanishes at s = -conj(mob_b)/conj(mob_a).
        let sn_sq_zeta = -(mob_b.conj()) / (mob_a.conj());

        let mut frame = Self {
            cfg,
            modulus,
            zeta: Complex64::ZERO,
            alpha,
            beta,
            sn_a_sq: Complex64::new(sn_a_sq, 0.0),
            tan_half_phi1,
            beta_discrepancy,
            theta_cfg: ThetaConfig::default(),
            mob_a,
            mob_b,
            sn_sq_zeta,
            seeds: Vec::new(),
        };
        frame.seeds = frame.build_seed_grid();
        let zeta = frame.solve_sn_sq(sn_sq_zeta)?;
        // The preimage of infinity sits in the open lower half of the
        // rectangle, because the lower half carries the exterior of the
        // unit circle.
        let k_big = modulus.big_k;
        let kp_big = modulus.big_k_prime;
        if !(zeta.re > -k_big && zeta.re < 0.0 && zeta.im > -kp_big && zeta.im < 0.0) {
            return Err(ArcError::PoleNotFound {
                residual: chordal(frame.sn_sq(zeta)?, sn_sq_zeta),
            });
        }
        let residual = (frame.sn_sq(zeta)? - sn_sq_zeta).norm();
        if residual > 1e-10 * (1.0 + sn_sq_zeta.norm()) {
            return Err(ArcError::PoleNotFound { residual });
        }
        frame.zeta = zeta;
        Ok(frame)
    }

    fn build_seed_grid(&self) -> Vec<(Complex64, Complex64)> {
        let k_big = self.modulus.big_k;
        let kp_big = self.modulus.big_k_prime;
        let n = SEED_GRID;
        let mut seeds = Vec::with_capacity(n * n);
        for i in 0..n {
            let re = -k_big * (i as f64 + 0.5) / n as f64;
            for j in 0..n {
                let im = -kp_big + 2.0 * kp_big * (j as f64 + 0.5) / n as f64;
                let u = Complex64::new(re, im);
                if let Ok((sn, _, _)) = jacobi_sn_cn_dn(u, &self.modulus) {
                    seeds.push((u, sn * sn));
                }
            }
        }
        seeds
    }

    pub(crate) fn sn_sq(&self, u: Complex64) -> Result<Complex64, EllipticError> {
        let (sn, _, _) = jacobi_sn_cn_dn(u, &self.modulus)?;
        Ok(sn * sn)
    }

    /// Solves sn^2 u = target for the representative u in the rectangle,
    /// seeding a damped Newton iteration from the coarse grid. Targets of
    /// modulus above one are solved through the reciprocal to keep the
    /// iteration conditioned near the pole of sn.
    fn solve_sn_sq(&self, target: Complex64) -> Result<Complex64, ArcError> {
        let mut best = (f64::INFINITY, Complex64::new(-self.modulus.big_k / 2.0, 0.0));
        for &(u, s) in &self.seeds {
            let d = chordal(s, target);
            if d < best.0 {
                best = (d, u);
            }
        }
        let mut u = best.1;
        let recip = target.norm() > 1.0;
        let t_eff = if recip { target.inv() } else { target };
        let tol = 1e-14 * (1.0 + t_eff.norm());

        let eval = |u: Complex64| -> Result<(Complex64, Complex64), EllipticError> {
            let (sn, cn, dn) = jacobi_sn_cn_dn(u, &self.modulus)?;
            if recip {
                let s = sn * sn;
                Ok(((s.inv() - t_eff), -2.0 * cn * dn / (sn * sn * sn)))
            } else {
                Ok((sn * sn - t_eff, 2.0 * sn * cn * dn))
            }
        };

        let fold = |u: Complex64| reduce_argument(u, &self.modulus).0;

        let mut res = f64::INFINITY;
        for _ in 0..NEWTON_CAP {
            let (f, df) = match eval(u) {
                Ok(pair) => pair,
                Err(_) => {
                    // Stepped onto a lattice pole of sn; nudge inward.
                    u = fold(u + Complex64::new(1e-6 * self.modulus.big_k, 1e-6));
                    continue;
                }
            };
            res = f.norm();
            if res <= tol {
                break;
            }
            if df.norm() < 1e-280 {
                u = fold(u + Complex64::new(1e-6 * self.modulus.big_k, 1e-6));
                continue;
            }
            let step = f / df;
            let mut accepted = None;
            let mut lambda = 1.0;
            for _ in 0..8 {
                let cand = fold(u - lambda * step);
                if let Ok((fc, _)) = eval(cand) {
                    if fc.norm() < res {
                        accepted = Some(cand);
                        break;
                    }
                }
                lambda *= 0.5;
            }
            u = accepted.unwrap_or_else(|| fold(u - step));
        }

        // Fold onto the left half of the parallelogram: sn^2 is even, so
        // u and -u are interchangeable and exactly one has Re u <= 0.
        let mut u = fold(u);
        if u.re > 0.0 {
            u = fold(-u);
        }
        if res > 1e3 * tol {
            return Err(ArcError::PoleNotFound { residual: res });
        }
        Ok(u)
    }

    /// The conformal map itself: a Moebius function of sn^2 u. Evaluates
    /// anywhere in the plane through the periodicity of sn.
    pub fn phi(&self, u: Complex64) -> Result<Complex64, ArcError> {
        let s = match self.sn_sq(u) {
            Ok(s) => s,
            // Landing on a lattice translate of iK' means sn^2 = infinity,
            // where the Moebius function takes the corner value e^{i phi2}.
            Err(EllipticError::PoleProximity { .. }) => {
                return Ok(Complex64::from_polar(1.0, self.cfg.phi2));
            }
            Err(e) => return Err(e.into()),
        };
        let (num, den) = if s.norm() > 1.0 {
            let r = s.inv();
            (self.mob_a + self.mob_b * r, self.mob_a.conj() + self.mob_b.conj() * r)
        } else {
            (self.mob_a * s + self.mob_b, self.mob_a.conj() * s + self.mob_b.conj())
        };
        if den.norm() < 1e-280 {
            return Err(ArcError::Elliptic(EllipticError::PoleProximity {
                dist: (u - self.zeta).norm().min((u + self.zeta).norm()),
            }));
        }
        Ok(num / den)
    }

    /// Inverse of the conformal map: the unique preimage in the
    /// rectangle. The Moebius part is inverted exactly, the elliptic part
    /// numerically.
    pub fn phi_inverse(&self, z: Complex64) -> Result<Complex64, ArcError> {
        let s_target = (self.mob_b - z * self.mob_b.conj()) / (z * self.mob_a.conj() - self.mob_a);
        let u = self.solve_sn_sq(s_target).map_err(|e| match e {
            ArcError::PoleNotFound { residual } => ArcError::InversionFailure { z, residual },
            other => other,
        })?;
        // Round trip in the plane as the acceptance check, measured in
        // the chordal metric: near the pole of the map the planar error
        // scales like |z|^2 even when u carries machine accuracy.
        let back = self.phi(u)?;
        let residual = chordal(back, z);
        if residual > 5e-10 {
            return Err(ArcError::InversionFailure { z, residual });
        }
        Ok(self.snap_to_box(u))
    }

    /// Boundary convention: preimages that land numerically on an arc
    /// edge are snapped onto it with nonnegative imaginary part.
    fn snap_to_box(&self, u: Complex64) -> Complex64 {
        let k_big = self.modulus.big_k;
        let eps = 1e-12 * k_big;
        let mut u = u;
        if u.re.abs() <= eps {
            u = Complex64::new(0.0, u.im.abs());
        } else if (u.re + k_big).abs() <= eps {
            u = Complex64::new(-k_big, u.im.abs());
        }
        u
    }

    pub fn theta_big_h(&self, t: Complex64) -> Result<Complex64, EllipticError> {
        theta_h(t, &self.modulus, &self.theta_cfg)
    }

    /// Green's function of the arc complement with pole at c0, evaluated
    /// through preimages of both arguments.
    pub fn greens_function(&self, z: Complex64, c0: Complex64) -> Result<f64, ArcError> {
        let u = self.phi_inverse(z)?;
        let gamma = self.phi_inverse(c0)?;
        self.green_from_preimages(u, gamma)
    }

    /// Green's function with pole at infinity, whose preimage is zeta.
    pub fn green_at_infinity(&self, z: Complex64) -> Result<f64, ArcError> {
        let u = self.phi_inverse(z)?;
        self.green_from_preimages(u, self.zeta)
    }

    fn green_from_preimages(&self, u: Complex64, gamma: Complex64) -> Result<f64, ArcError> {
        let num = self.theta_big_h(u + gamma.conj())?;
        let den = self.theta_big_h(u - gamma)?;
        Ok(num.norm().ln() - den.norm().ln())
    }

    /// Harmonic measure of the second arc seen from infinity.
    pub fn harmonic_measure_omega2(&self) -> f64 {
        -self.zeta.re / self.modulus.big_k
    }

    /// Logarithmic capacity of the two-arc set.
    pub fn capacity(&self) -> Result<f64, ArcError> {
        let num = self.theta_big_h(Complex64::new(0.0, 2.0 * self.zeta.im))?;
        let den = self.theta_big_h(2.0 * self.zeta)?;
        Ok(num.norm() / den.norm())
    }

    /// Samples the critical curve, clustering points toward both ends
    /// where it meets the arcs.
    pub fn curve_s(&self, n_samples: usize) -> Result<CurveS, ArcError> {
        let level = self.zeta.im + self.modulus.big_k_prime;
        let k_big = self.modulus.big_k;
        let n = n_samples.max(2);
        let mut samples = Vec::with_capacity(n);
        for j in 0..n {
            let c = (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos();
            let t = -k_big * (1.0 - c) / 2.0;
            samples.push(self.phi(Complex64::new(t, level))?);
        }
        Ok(CurveS { level, samples })
    }

    /// The point of the critical curve over the rectangle midline, where
    /// a solitary zero settles in symmetric configurations.
    pub fn curve_midpoint(&self) -> Result<Complex64, ArcError> {
        let level = self.zeta.im + self.modulus.big_k_prime;
        self.phi(Complex64::new(-self.modulus.big_k / 2.0, level))
    }
}
