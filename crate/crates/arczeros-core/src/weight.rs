//! The orthogonality functional: the endpoint polynomial and its
//! splittings, the trigonometric factor with its point-mass flags, the
//! algebraic lifts, the single-valued square-root branch, quadrature
//! moments, and the positive-definiteness test.

use num_complex::Complex64;
use thiserror::Error;

use crate::arcs::{ArcConfiguration, ArcError, EllipticFrame};
use crate::poly::CPoly;

const TAU: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("factor angle {xi} lies on the arcs, where the weight may not vanish")]
    FactorOnArcs { xi: Complex64 },
    #[error("nonreal factor angle {xi} has no conjugate partner with equal multiplicity and flag")]
    ConjugatePartnerMissing { xi: Complex64 },
    #[error("mass flag set on a factor of multiplicity {multiplicity} at {xi}; only simple factors carry masses")]
    MassOnMultipleFactor { xi: Complex64, multiplicity: u32 },
    #[error("factor angles must be distinct, found a repeat near {xi}")]
    RepeatedFactor { xi: Complex64 },
    #[error("factor scale must be nonzero")]
    ZeroScale,
    #[error("degree bookkeeping violated: 2a = {two_a}, 2w = {two_w} must have an even, >= -2 difference")]
    DegreeSupposition { two_a: i32, two_w: i32 },
    #[error("split endpoints {endpoints:?} invalid: each of 1..=4 must appear exactly once across the two factors")]
    SplitInvalid { endpoints: Vec<usize> },
    #[error("square root requested on the cut at z = {z}")]
    OnCut { z: Complex64 },
    #[error("angle {phi} is not interior to either arc")]
    NotOnArcs { phi: f64 },
    #[error("moment quadrature did not converge: node-doubling still moves a moment by {delta:.3e}")]
    QuadratureDivergence { delta: f64 },
    #[error(transparent)]
    Arc(#[from] ArcError),
}

/// One factor sin^m((phi - xi)/2) of the trigonometric weight, with the
/// flag that decides whether the factor contributes a point mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightFactor {
    /// Angle of the factor zero; nonreal angles put the zero off the
    /// circle and must come in conjugate pairs.
    pub xi: Complex64,
    pub multiplicity: u32,
    /// +1 for a plain factor, -1 to add the point mass at e^{i xi}.
    pub lambda: i8,
}

impl WeightFactor {
    pub fn plain(xi: f64, multiplicity: u32) -> Self {
        Self {
            xi: Complex64::new(xi, 0.0),
            multiplicity,
            lambda: 1,
        }
    }

    pub fn with_mass(xi: f64) -> Self {
        Self {
            xi: Complex64::new(xi, 0.0),
            multiplicity: 1,
            lambda: -1,
        }
    }

    /// The factor zero lifted to the plane, e^{i xi}.
    pub fn z(&self) -> Complex64 {
        (Complex64::I * self.xi).exp()
    }
}

/// The trigonometric factor of the weight denominator together with its
/// algebraic lift. Degrees are kept doubled so half-integer degrees stay
/// exact integers.
#[derive(Debug, Clone)]
pub struct TrigFactorization {
    pub c_a: f64,
    pub factors: Vec<WeightFactor>,
    /// Twice the trigonometric degree: sum of all multiplicities.
    pub two_a: i32,
    lift: CPoly,
    lift_scale: Complex64,
}

impl TrigFactorization {
    pub fn new(c_a: f64, factors: Vec<WeightFactor>, cfg: &ArcConfiguration) -> Result<Self, WeightError> {
        if c_a == 0.0 || !c_a.is_finite() {
            return Err(WeightError::ZeroScale);
        }
        for (i, f) in factors.iter().enumerate() {
            if f.lambda == -1 && f.multiplicity != 1 {
                return Err(WeightError::MassOnMultipleFactor {
                    xi: f.xi,
                    multiplicity: f.multiplicity,
                });
            }
            if f.xi.im == 0.0 {
                if cfg.arc_of_angle(f.xi.re).is_some() {
                    return Err(WeightError::FactorOnArcs { xi: f.xi });
                }
            } else {
                let partner = factors.iter().any(|g| {
                    (g.xi - f.xi.conj()).norm() < 1e-12
                        && g.multiplicity == f.multiplicity
                        && g.lambda == f.lambda
                });
                if !partner {
                    return Err(WeightError::ConjugatePartnerMissing { xi: f.xi });
                }
            }
            for g in factors.iter().skip(i + 1) {
                if (g.xi - f.xi).norm() < 1e-12 {
                    return Err(WeightError::RepeatedFactor { xi: f.xi });
                }
            }
        }
        let two_a: i32 = factors.iter().map(|f| f.multiplicity as i32).sum();
        // Lift scale: each sine factor contributes 1/(2i) e^{-i xi/2} when
        // rewritten in the plane variable, and e^{i a phi} soaks up the
        // leftover half powers of z.
        let mut xi_sum = Complex64::ZERO;
        let mut roots = Vec::new();
        for f in &factors {
            xi_sum += f.xi * f.multiplicity as f64;
            for _ in 0..f.multiplicity {
                roots.push(f.z());
            }
        }
        let two_i = Complex64::new(0.0, 2.0);
        let lift_scale = c_a * two_i.powi(-two_a) * (-Complex64::I * xi_sum / 2.0).exp();
        let lift = CPoly::from_roots(&roots, lift_scale);
        Ok(Self {
            c_a,
            factors,
            two_a,
            lift,
            lift_scale,
        })
    }

    /// Constant weight factor, identically one.
    pub fn one(cfg: &ArcConfiguration) -> Self {
        Self::new(1.0, Vec::new(), cfg).expect("constant factor is always valid")
    }

    /// Trigonometric value; real for real angles by the conjugate-pair
    /// requirement, up to rounding.
    pub fn eval_trig(&self, phi: f64) -> f64 {
        let mut acc = Complex64::new(self.c_a, 0.0);
        for f in &self.factors {
            let s = ((Complex64::new(phi, 0.0) - f.xi) / 2.0).sin();
            acc *= s.powu(f.multiplicity);
        }
        acc.re
    }

    /// The lifted polynomial A with A(e^{i phi}) = e^{i a phi} A_trig(phi).
    pub fn lift(&self) -> &CPoly {
        &self.lift
    }

    /// A with the factor at index j divided out, evaluated at that
    /// factor's own zero; for simple factors this equals A'(z_j).
    pub fn cofactor_at(&self, j: usize) -> Complex64 {
        let zj = self.factors[j].z();
        let mut acc = self.lift_scale;
        for (i, f) in self.factors.iter().enumerate() {
            if i == j {
                continue;
            }
            acc *= (zj - f.z()).powu(f.multiplicity);
        }
        acc
    }
}

/// How the endpoint polynomial is distributed over the two weight
/// factors. Every splitting within trigonometric polynomials must route
/// each endpoint factor to one side, possibly with a scale.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitKind {
    /// All four endpoint factors in the denominator-side factor V; W = 1.
    VFull,
    /// All four endpoint factors in W; V = 1.
    WFull,
    /// One endpoint of each arc in W: the outer pair {1, 3}.
    Mixed,
    /// Explicit choice of which endpoints 1..=4 go into W, with a scale
    /// on W (and its reciprocal on V).
    Custom { w_endpoints: Vec<usize>, scale: f64 },
}

/// The two split factors with their lifts and arcwise zero counts.
#[derive(Debug, Clone)]
pub struct RSplit {
    pub w_endpoints: Vec<usize>,
    pub v_endpoints: Vec<usize>,
    pub scale_w: f64,
    pub two_v: i32,
    pub two_w: i32,
    /// Zeros of the W factor on the first and second arc.
    pub w1: usize,
    pub w2: usize,
    v_lift: CPoly,
    w_lift: CPoly,
}

fn lift_of_endpoints(cfg: &ArcConfiguration, endpoints: &[usize], scale: f64) -> CPoly {
    let angles = cfg.angles();
    let mut roots = Vec::new();
    let mut xi_sum = 0.0;
    for &k in endpoints {
        let phi = angles[k - 1];
        xi_sum += phi;
        roots.push(Complex64::from_polar(1.0, phi));
    }
    let two_i = Complex64::new(0.0, 2.0);
    let c = scale * two_i.powi(-(endpoints.len() as i32)) * (-Complex64::I * xi_sum / 2.0).exp();
    CPoly::from_roots(&roots, c)
}

impl RSplit {
    pub fn new(cfg: &ArcConfiguration, kind: &SplitKind) -> Result<Self, WeightError> {
        let (w_endpoints, scale_w): (Vec<usize>, f64) = match kind {
            SplitKind::VFull => (vec![], 1.0),
            SplitKind::WFull => (vec![1, 2, 3, 4], 1.0),
            SplitKind::Mixed => (vec![1, 3], 1.0),
            SplitKind::Custom { w_endpoints, scale } => (w_endpoints.clone(), *scale),
        };
        let mut seen = [false; 5];
        for &k in &w_endpoints {
            if k < 1 || k > 4 || seen[k] {
                return Err(WeightError::SplitInvalid {
                    endpoints: w_endpoints.clone(),
                });
            }
            seen[k] = true;
        }
        if scale_w == 0.0 || !scale_w.is_finite() {
            return Err(WeightError::ZeroScale);
        }
        let v_endpoints: Vec<usize> = (1..=4).filter(|k| !seen[*k]).collect();
        let w1 = w_endpoints.iter().filter(|&&k| k <= 2).count();
        let w2 = w_endpoints.len() - w1;
        let w_lift = lift_of_endpoints(cfg, &w_endpoints, scale_w);
        let v_lift = lift_of_endpoints(cfg, &v_endpoints, 1.0 / scale_w);
        Ok(Self {
            two_v: v_endpoints.len() as i32,
            two_w: w_endpoints.len() as i32,
            w_endpoints,
            v_endpoints,
            scale_w,
            w1,
            w2,
            v_lift,
            w_lift,
        })
    }

    pub fn v_lift(&self) -> &CPoly {
        &self.v_lift
    }

    pub fn w_lift(&self) -> &CPoly {
        &self.w_lift
    }
}

/// A point mass of the functional: location, angle, and weight.
#[derive(Debug, Clone, Copy)]
pub struct MassPoint {
    pub xi: Complex64,
    pub z: Complex64,
    pub mass: Complex64,
}

/// Hermitian moment table: only indices j >= 0 are stored, negative ones
/// are conjugates by construction.
#[derive(Debug, Clone)]
pub struct MomentTable {
    moments: Vec<Complex64>,
    pub quadrature_nodes: usize,
    pub mass_contributions: Vec<MassPoint>,
    /// True when the raw functional came out negative and was flipped to
    /// make c_0 positive; the orthogonal polynomials are unchanged.
    pub negated: bool,
}

impl MomentTable {
    /// Wraps a raw hermitian moment sequence `c_0, c_1, ..., c_n`.
    ///
    /// Useful for driving the solver with moments that did not come from a
    /// weight model, e.g. hand-built degenerate sequences in tests.
    pub fn from_moments(moments: Vec<Complex64>) -> Self {
        assert!(!moments.is_empty(), "need at least c_0");
        Self {
            moments,
            quadrature_nodes: 0,
            mass_contributions: Vec::new(),
            negated: false,
        }
    }

    pub fn max_index(&self) -> usize {
        self.moments.len() - 1
    }

    pub fn moment(&self, j: i64) -> Complex64 {
        if j >= 0 {
            self.moments[j as usize]
        } else {
            self.moments[(-j) as usize].conj()
        }
    }
}

/// The full weight model: arcs, trigonometric factor, split, and lifts.
#[derive(Debug, Clone)]
pub struct WeightModel {
    pub cfg: ArcConfiguration,
    pub a_factor: TrigFactorization,
    pub split: RSplit,
    r_lift: CPoly,
}

/// Preimages of the mass points in the rectangle, with the mass values.
#[derive(Debug, Clone)]
pub struct ConformalWeightFrame {
    pub v_points: Vec<Complex64>,
    pub mass_values: Vec<Complex64>,
}

impl WeightModel {
    pub fn new(
        cfg: ArcConfiguration,
        a_factor: TrigFactorization,
        kind: &SplitKind,
    ) -> Result<Self, WeightError> {
        let split = RSplit::new(&cfg, kind)?;
        // The difference a - w must be a whole number or the companion
        // identity's exponents go half-integral. The stronger requirement
        // a - w + 1 >= 0 is needed by the mass formula's z^(a-w) closed
        // forms, so it binds only when a factor actually carries a mass;
        // mass-free splits like W = R against a constant factor are fine.
        let diff = a_factor.two_a - split.two_w;
        let has_mass = a_factor.factors.iter().any(|f| f.lambda == -1);
        if diff % 2 != 0 || (has_mass && diff < -2) {
            return Err(WeightError::DegreeSupposition {
                two_a: a_factor.two_a,
                two_w: split.two_w,
            });
        }
        let r_lift = lift_of_endpoints(&cfg, &[1, 2, 3, 4], 1.0);
        Ok(Self {
            cfg,
            a_factor,
            split,
            r_lift,
        })
    }

    /// Product of the four endpoint sines.
    pub fn r_trig(&self, phi: f64) -> f64 {
        self.cfg
            .angles()
            .iter()
            .map(|pk| ((phi - pk) / 2.0).sin())
            .product()
    }

    pub fn w_trig(&self, phi: f64) -> f64 {
        let angles = self.cfg.angles();
        self.split.scale_w
            * self
                .split
                .w_endpoints
                .iter()
                .map(|&k| ((phi - angles[k - 1]) / 2.0).sin())
                .product::<f64>()
    }

    pub fn v_trig(&self, phi: f64) -> f64 {
        let angles = self.cfg.angles();
        (1.0 / self.split.scale_w)
            * self
                .split
                .v_endpoints
                .iter()
                .map(|&k| ((phi - angles[k - 1]) / 2.0).sin())
                .product::<f64>()
    }

    pub fn r_lift(&self) -> &CPoly {
        &self.r_lift
    }

    /// Exponent difference a - w as a plain integer.
    pub fn a_minus_w(&self) -> i32 {
        (self.a_factor.two_a - self.split.two_w) / 2
    }

    /// Weight density on the arcs: positive-root reciprocal with the arc
    /// sign alternation, minus on the first arc and plus on the second.
    pub fn f_weight(&self, phi: f64) -> Result<f64, WeightError> {
        let t = phi.rem_euclid(TAU);
        let arc = self
            .cfg
            .arc_of_angle(t)
            .ok_or(WeightError::NotOnArcs { phi })?;
        if self
            .cfg
            .angles()
            .iter()
            .any(|pk| (t - pk).abs() < 1e-12)
        {
            // The density is unbounded at endpoints unless W vanishes
            // there; direct endpoint evaluation is rejected either way.
            return Err(WeightError::NotOnArcs { phi });
        }
        // Alternating arc sign: minus on the first arc, plus on the
        // second. The relative sign against the point masses is rigid;
        // the companion-polynomial identity only closes with this layout.
        let sigma = if arc == 1 { -1.0 } else { 1.0 };
        Ok(sigma * self.w_trig(t) / (self.a_factor.eval_trig(t) * self.r_trig(t).abs().sqrt()))
    }

    /// Single-valued branch of sqrt(R) on the arc complement, pinned on
    /// the gap between the arcs by arg sqrt(R(e^{i phi})) = arg(-e^{i phi})
    /// and carried to z by analytic continuation along cut-avoiding paths.
    pub fn sqrt_r(&self, z: Complex64) -> Result<Complex64, WeightError> {
        if (z.norm() - 1.0).abs() < 1e-12 {
            let angle = z.arg().rem_euclid(TAU);
            let clear_of_endpoints = self.cfg.angles().iter().all(|p| (p - angle).abs() > 1e-9);
            if clear_of_endpoints && self.cfg.arc_of_angle(angle).is_some() {
                return Err(WeightError::OnCut { z });
            }
        }
        let mid2 = (self.cfg.phi2 + self.cfg.phi3) / 2.0;
        let anchor = Complex64::from_polar(1.0, mid2);
        let anchor_val = -anchor * self.r_trig(mid2).sqrt();

        let mut pts = Vec::new();
        if z.norm() <= 1.0 {
            // Into the disk through the center: both legs stay clear of
            // the arcs because the open disk never meets them.
            push_segment(&mut pts, anchor, Complex64::ZERO, 48);
            push_segment(&mut pts, Complex64::ZERO, z, 48);
        } else {
            // Around the outside at radius 2, then radially to z.
            let out = 2.0 * anchor;
            push_segment(&mut pts, anchor, out, 24);
            let a0 = anchor.arg();
            let mut a1 = z.arg();
            while a1 - a0 > std::f64::consts::PI {
                a1 -= TAU;
            }
            while a1 - a0 < -std::f64::consts::PI {
                a1 += TAU;
            }
            let steps = ((a1 - a0).abs() / 0.05).ceil().max(1.0) as usize;
            for s in 1..=steps {
                let a = a0 + (a1 - a0) * s as f64 / steps as f64;
                pts.push(Complex64::from_polar(2.0, a));
            }
            push_segment(&mut pts, Complex64::from_polar(2.0, a1), z, 32);
        }

        let mut w = anchor_val;
        let mut prev = anchor;
        let mut r_prev = self.r_lift.eval(anchor);
        for &p in &pts {
            self.continue_step(&mut w, prev, &mut r_prev, p, 0);
            prev = p;
        }
        Ok(w)
    }

    /// Carry the branch value from `prev` (where R = r_prev and the
    /// current branch value is w) to `p`, bisecting the chord while R
    /// moves too fast for safe sign matching.
    fn continue_step(
        &self,
        w: &mut Complex64,
        prev: Complex64,
        r_prev: &mut Complex64,
        p: Complex64,
        depth: usize,
    ) {
        let r = self.r_lift.eval(p);
        if depth < 40 && (r - *r_prev).norm() > 0.5 * r_prev.norm().max(r.norm()) {
            let mid = (prev + p) / 2.0;
            self.continue_step(w, prev, r_prev, mid, depth + 1);
            self.continue_step(w, mid, r_prev, p, depth + 1);
            return;
        }
        let mut s = r.sqrt();
        if (s - *w).norm() < (s + *w).norm() {
            *w = s;
        } else {
            s = -s;
            *w = s;
        }
        *r_prev = r;
    }

    /// Point masses of the functional, one per factor with the mass flag.
    /// A flagged simple factor at z_j contributes
    /// z_j^(a-w) W(z_j) / (i A_j(z_j) sqrt(R)(z_j)) on test values h(z_j),
    /// where A_j strips that factor from the lift.
    pub fn point_masses(&self) -> Result<Vec<MassPoint>, WeightError> {
        let mut out = Vec::new();
        for (j, f) in self.a_factor.factors.iter().enumerate() {
            if f.lambda != -1 {
                continue;
            }
            let zj = f.z();
            let cof = self.a_factor.cofactor_at(j);
            let sr = self.sqrt_r(zj)?;
            let pow = zj.powi(self.a_minus_w());
            let mass = pow * self.split.w_lift.eval(zj) / (Complex64::I * cof * sr);
            out.push(MassPoint {
                xi: f.xi,
                z: zj,
                mass,
            });
        }
        Ok(out)
    }

    /// Moments c_j of the functional on monomials z^{-j}, j = 0..=n_max,
    /// by endpoint-absorbing quadrature on each arc plus the point
    /// masses. Node counts double until the whole table is stable to the
    /// requested tolerance. A negative c_0 flips the functional's sign so
    /// the definite case always presents with c_0 > 0.
    pub fn moments(&self, n_max: usize, nodes: usize, tol: f64) -> Result<MomentTable, WeightError> {
        let masses = self.point_masses()?;
        let mut n_nodes = nodes.max(32);
        let mut current = self.moment_pass(n_max, n_nodes, &masses);
        loop {
            let doubled = self.moment_pass(n_max, n_nodes * 2, &masses);
            let delta = current
                .iter()
                .zip(&doubled)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max);
            n_nodes *= 2;
            current = doubled;
            if delta <= tol {
                break;
            }
            if n_nodes > 16384 {
                return Err(WeightError::QuadratureDivergence { delta });
            }
        }
        let mut negated = false;
        let mut mass_contributions = masses;
        if current[0].re < 0.0 {
            negated = true;
            for c in &mut current {
                *c = -*c;
            }
            for m in &mut mass_contributions {
                m.mass = -m.mass;
            }
        }
        Ok(MomentTable {
            moments: current,
            quadrature_nodes: n_nodes,
            mass_contributions,
            negated,
        })
    }

    fn moment_pass(&self, n_max: usize, n_nodes: usize, masses: &[MassPoint]) -> Vec<Complex64> {
        let mut c = vec![Complex64::ZERO; n_max + 1];
        let angles = self.cfg.angles();
        for arc in 0..2 {
            let (lo, hi) = if arc == 0 {
                (angles[0], angles[1])
            } else {
                (angles[2], angles[3])
            };
            let half = (hi - lo) / 2.0;
            // Same alternating sign as f_weight: minus on arc one.
            let sigma = if arc == 0 { -1.0 } else { 1.0 };
            let base = sigma / (2.0 * n_nodes as f64);
            let far: Vec<f64> = angles
                .iter()
                .filter(|p| (**p - lo).abs() > 1e-14 && (**p - hi).abs() > 1e-14)
                .copied()
                .collect();
            for i in 0..n_nodes {
                let theta = std::f64::consts::PI * (i as f64 + 0.5) / n_nodes as f64;
                let co2 = (theta / 2.0).cos().powi(2);
                let si2 = (theta / 2.0).sin().powi(2);
                let phi = lo + 2.0 * half * co2;
                // The half-circle factor of the node weights cancels the
                // endpoint roots of the quartic exactly: with the arc's
                // own two sine factors written through co2 and si2, the
                // vanishing pieces divide out before any subtraction can
                // lose digits.
                let g_lo = (half * co2).sin() / co2;
                let g_hi = (half * si2).sin() / si2;
                let rest: f64 = far
                    .iter()
                    .map(|p| ((phi - p) / 2.0).sin().abs())
                    .product();
                let h = 2.0 * half / (g_lo * g_hi * rest).sqrt();
                let weight = base * h * self.w_trig(phi) / self.a_factor.eval_trig(phi);
                let e = Complex64::from_polar(1.0, -phi);
                let mut p = Complex64::new(weight, 0.0);
                c[0] += p;
                for cj in c.iter_mut().skip(1) {
                    p *= e;
                    *cj += p;
                }
            }
        }
        for m in masses {
            let zinv = 1.0 / m.z;
            let mut p = m.mass;
            c[0] += p;
            for cj in c.iter_mut().skip(1) {
                p *= zinv;
                *cj += p;
            }
        }
        c
    }

    /// Preimages of the mass points under the arc map, paired with their
    /// (sign-normalized) mass values.
    pub fn conformal_frame(
        &self,
        frame: &EllipticFrame,
        table: &MomentTable,
    ) -> Result<ConformalWeightFrame, WeightError> {
        let mut v_points = Vec::new();
        let mut mass_values = Vec::new();
        for m in &table.mass_contributions {
            v_points.push(frame.phi_inverse(m.z)?);
            mass_values.push(m.mass);
        }
        Ok(ConformalWeightFrame {
            v_points,
            mass_values,
        })
    }
}

fn push_segment(pts: &mut Vec<Complex64>, from: Complex64, to: Complex64, steps: usize) {
    for s in 1..=steps {
        pts.push(from + (to - from) * (s as f64 / steps as f64));
    }
}

/// Positive definiteness of the functional restricted to degree n: every
/// leading section of the Hermitian Toeplitz matrix with entries c_{k-j}
/// must have a positive smallest eigenvalue, which is the same as all
/// leading principal minors being positive. Returns the verdict together
/// with the smallest eigenvalue seen across the sections.
pub fn is_positive_definite(table: &MomentTable, n: usize) -> (bool, f64) {
    let mut worst = f64::INFINITY;
    for dim in 1..=n + 1 {
        let t = nalgebra::DMatrix::from_fn(dim, dim, |r, c| table.moment(r as i64 - c as i64));
        let min_eig = t
            .schur()
            .eigenvalues()
            .map(|ev| ev.iter().map(|e| e.re).fold(f64::INFINITY, f64::min))
            .unwrap_or(f64::NAN);
        if !(min_eig > 0.0) {
            return (false, min_eig);
        }
        worst = worst.min(min_eig);
    }
    (true, worst)
}
