//! Smooth compactly supported cutoffs in time and space.
//!
//! Both cutoffs are powered quintic smoothsteps: raising the ramp to the
//! power m = ceil(1/(1-rho)) makes the normalized ratios |eta'|/eta^rho1,
//! |grad psi|/psi^rho2 and |lap psi|/psi^(2 rho2 - 1) bounded right up to
//! the support edge. The bound constants are not prescribed anywhere; they
//! are measured by dense sampling and reported.

use crate::error::{Error, Result};
use crate::fields::field::{HasGrid, ScalarField};
use crate::fields::grid::MAX_DIM;
use serde::{Deserialize, Serialize};

/// Quintic smoothstep: 0 for t <= 0, 1 for t >= 1, C^2 across both joints.
fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

fn smoothstep_d1(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        let u = 1.0 - t;
        30.0 * t * t * u * u
    }
}

fn smoothstep_d2(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
    }
}

fn power_for(rho: f64, what: &str) -> Result<u32> {
    if !(rho > 0.5 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "{what} = {rho} must lie strictly between 1/2 and 1"
        )));
    }
    let m = (1.0 / (1.0 - rho)).ceil();
    if m > 10_000.0 {
        return Err(Error::InvalidParameter(format!(
            "{what} = {rho} is too close to 1 (power {m})"
        )));
    }
    Ok(m as u32)
}

/// Temporal cutoff: 0 on [0, T/3], smooth ramp, 1 on [2T/3, T].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalCutoff {
    t_horizon: f64,
    rho1: f64,
    m: u32,
}

/// Builds the powered temporal ramp for exponent `rho1` in (1/2, 1).
pub fn build_eta(t_horizon: f64, rho1: f64) -> Result<TemporalCutoff> {
    if !(t_horizon > 0.0) || !t_horizon.is_finite() {
        return Err(Error::InvalidParameter(format!("time horizon {t_horizon} must be positive")));
    }
    let m = power_for(rho1, "rho1")?;
    Ok(TemporalCutoff { t_horizon, rho1, m })
}

impl TemporalCutoff {
    pub fn t_horizon(&self) -> f64 {
        self.t_horizon
    }

    pub fn rho1(&self) -> f64 {
        self.rho1
    }

    pub fn power(&self) -> u32 {
        self.m
    }

    /// Ramp coordinate: 0 at T/3, 1 at 2T/3.
    fn ramp(&self, t: f64) -> f64 {
        3.0 * t / self.t_horizon - 1.0
    }

    pub fn eta(&self, t: f64) -> f64 {
        smoothstep(self.ramp(t)).powi(self.m as i32)
    }

    pub fn eta_prime(&self, t: f64) -> f64 {
        let u = self.ramp(t);
        let s = smoothstep(u);
        if s == 0.0 {
            return 0.0;
        }
        self.m as f64 * s.powi(self.m as i32 - 1) * smoothstep_d1(u) * 3.0 / self.t_horizon
    }

    /// sup |eta'| T / eta^rho1 over the ramp, by dense sampling of the
    /// normalized coordinate. The exponent m - 1 - m rho1 is nonnegative by
    /// construction, so the ratio is evaluated in log space without any
    /// 0/0 at the support edge.
    pub fn measured_c0(&self, samples: usize) -> f64 {
        let e = self.m as f64 - 1.0 - self.m as f64 * self.rho1;
        let mut sup: f64 = 0.0;
        for i in 0..samples {
            let u = (i as f64 + 0.5) / samples as f64;
            let s = smoothstep(u);
            if s <= 0.0 {
                continue;
            }
            let ratio = 3.0 * self.m as f64 * (e * s.ln()).exp() * smoothstep_d1(u);
            sup = sup.max(ratio);
        }
        sup
    }
}

/// Radial profile family for the spatial cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Powered smoothstep: 1 on [0, R], ramp down, 0 outside 2R.
    Smoothstep,
    /// Constant one everywhere; a control case with no decay at all.
    Const,
}

/// Spatial cutoff psi: 1 on B(x0, R), 0 outside B(x0, 2R), radially
/// monotone in between so the gradient points inward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialCutoff {
    x0: [f64; MAX_DIM],
    r: f64,
    rho2: f64,
    m: u32,
    dim: usize,
    profile: Profile,
}

/// Builds the powered spatial cutoff for exponent `rho2` in (1/2, 1).
pub fn build_psi(x0: [f64; MAX_DIM], r: f64, rho2: f64, dim: usize) -> Result<SpatialCutoff> {
    let m = power_for(rho2, "rho2")?;
    build_psi_with_power(x0, r, rho2, dim, m)
}

/// Same profile with an explicit power; m = 1 reproduces the naive
/// un-powered smoothstep whose gradient ratio diverges at the edge.
pub fn build_psi_with_power(
    x0: [f64; MAX_DIM],
    r: f64,
    rho2: f64,
    dim: usize,
    m: u32,
) -> Result<SpatialCutoff> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("scale {r} must be positive")));
    }
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidParameter(format!("dimension {dim} out of range")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("power must be at least 1".into()));
    }
    Ok(SpatialCutoff { x0, r, rho2, m, dim, profile: Profile::Smoothstep })
}

/// The constant-one control cutoff (never decays, ratios all zero).
pub fn constant_cutoff(x0: [f64; MAX_DIM], r: f64, dim: usize) -> SpatialCutoff {
    SpatialCutoff { x0, r, rho2: 0.75, m: 1, dim, profile: Profile::Const }
}

/// chi(r): 1 on [0,1], smoothstep down on (1,2), 0 on [2, inf).
fn chi(r: f64) -> f64 {
    smoothstep(2.0 - r)
}

fn chi_d1(r: f64) -> f64 {
    -smoothstep_d1(2.0 - r)
}

fn chi_d2(r: f64) -> f64 {
    smoothstep_d2(2.0 - r)
}

impl SpatialCutoff {
    pub fn center(&self) -> [f64; MAX_DIM] {
        self.x0
    }

    pub fn scale(&self) -> f64 {
        self.r
    }

    pub fn rho2(&self) -> f64 {
        self.rho2
    }

    pub fn power(&self) -> u32 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    /// Radius beyond which psi vanishes identically.
    pub fn support_radius(&self) -> f64 {
        2.0 * self.r
    }

    fn dist(&self, x: [f64; MAX_DIM]) -> f64 {
        let mut s = 0.0;
        for a in 0..self.dim {
            let d = x[a] - self.x0[a];
            s += d * d;
        }
        s.sqrt()
    }

    /// psi as a function of Euclidean distance from the center.
    pub fn psi_at_dist(&self, dist: f64) -> f64 {
        match self.profile {
            Profile::Const => 1.0,
            Profile::Smoothstep => chi(dist / self.r).powi(self.m as i32),
        }
    }

    /// Signed radial derivative d psi / d dist (nonpositive).
    pub fn radial_derivative_at_dist(&self, dist: f64) -> f64 {
        match self.profile {
            Profile::Const => 0.0,
            Profile::Smoothstep => {
                let q = dist / self.r;
                let c = chi(q);
                if c == 0.0 {
                    return 0.0;
                }
                self.m as f64 * c.powi(self.m as i32 - 1) * chi_d1(q) / self.r
            }
        }
    }

    /// Laplacian of psi at a given distance; uses the radial formula
    /// g'' + (dim-1) g' / dist, zero on both plateaus.
    pub fn laplacian_at_dist(&self, dist: f64) -> f64 {
        match self.profile {
            Profile::Const => 0.0,
            Profile::Smoothstep => {
                let q = dist / self.r;
                let c = chi(q);
                let c1 = chi_d1(q);
                if c == 0.0 || (c1 == 0.0 && q <= 1.0) {
                    return 0.0;
                }
                let m = self.m as f64;
                let r2 = self.r * self.r;
                let second = m
                    * ((m - 1.0) * c.powi(self.m as i32 - 2) * c1 * c1
                        + c.powi(self.m as i32 - 1) * chi_d2(q))
                    / r2;
                let first = m * c.powi(self.m as i32 - 1) * c1 / (self.r * dist);
                second + (self.dim as f64 - 1.0) * first
            }
        }
    }

    pub fn psi(&self, x: [f64; MAX_DIM]) -> f64 {
        self.psi_at_dist(self.dist(x))
    }

    /// Gradient vector; radial derivative times the outward unit vector.
    pub fn grad_psi(&self, x: [f64; MAX_DIM]) -> [f64; MAX_DIM] {
        let dist = self.dist(x);
        let mut g = [0.0; MAX_DIM];
        if dist == 0.0 {
            return g;
        }
        let d = self.radial_derivative_at_dist(dist);
        if d == 0.0 {
            return g;
        }
        for a in 0..self.dim {
            g[a] = d * (x[a] - self.x0[a]) / dist;
        }
        g
    }

    pub fn laplacian_psi(&self, x: [f64; MAX_DIM]) -> f64 {
        self.laplacian_at_dist(self.dist(x))
    }

    /// sup |grad psi| R / psi^rho2 by dense radial sampling, computed in
    /// log space so the edge limit never degenerates to 0/0.
    pub fn measured_c0_grad(&self, samples: usize) -> f64 {
        if self.profile == Profile::Const {
            return 0.0;
        }
        let m = self.m as f64;
        let e = m - 1.0 - m * self.rho2;
        let mut sup: f64 = 0.0;
        for i in 0..samples {
            let q = 2.0 * (i as f64 + 0.5) / samples as f64;
            let c = chi(q);
            if c <= 0.0 {
                continue;
            }
            let ratio = m * (e * c.ln()).exp() * chi_d1(q).abs();
            sup = sup.max(ratio);
        }
        sup
    }

    /// sup |lap psi| R^2 / psi^(2 rho2 - 1), same sampling scheme. Both
    /// power exponents are nonnegative for the built cutoff; for a naive
    /// power they go negative and the measured value grows with `samples`.
    pub fn measured_c0_lap(&self, samples: usize) -> f64 {
        if self.profile == Profile::Const {
            return 0.0;
        }
        let m = self.m as f64;
        let a = m - 2.0 - m * (2.0 * self.rho2 - 1.0);
        let b = a + 1.0;
        let mut sup: f64 = 0.0;
        for i in 0..samples {
            let q = 2.0 * (i as f64 + 0.5) / samples as f64;
            let c = chi(q);
            if c <= 0.0 {
                continue;
            }
            let c1 = chi_d1(q);
            let c2 = chi_d2(q);
            let lnc = c.ln();
            let term2 = (m - 1.0) * (a * lnc).exp() * c1 * c1 + (b * lnc).exp() * c2;
            let term1 = (b * lnc).exp() * c1 / q;
            let ratio = m * (term2 + (self.dim as f64 - 1.0) * term1).abs();
            sup = sup.max(ratio);
        }
        sup
    }
}

/// Measured normalized suprema and, when a field comparison ran, the
/// observed constants of the derivative-transfer inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffCheckReport {
    pub measured_c0_eta: Option<f64>,
    pub measured_c0_grad: Option<f64>,
    pub measured_c0_lap: Option<f64>,
    pub c_alpha: Option<f64>,
    pub delta_alpha: Option<f64>,
    pub degenerate: bool,
    pub bound_satisfied: Option<bool>,
    pub samples: usize,
}

impl CutoffCheckReport {
    fn empty(samples: usize) -> Self {
        CutoffCheckReport {
            measured_c0_eta: None,
            measured_c0_grad: None,
            measured_c0_lap: None,
            c_alpha: None,
            delta_alpha: None,
            degenerate: false,
            bound_satisfied: None,
            samples,
        }
    }
}

/// Dense-sampling verification of the temporal ratio bound.
pub fn verify_eta_bounds(eta: &TemporalCutoff, samples: usize) -> CutoffCheckReport {
    let mut report = CutoffCheckReport::empty(samples);
    report.measured_c0_eta = Some(eta.measured_c0(samples));
    report
}

/// Dense-sampling verification of both spatial ratio bounds.
pub fn verify_psi_bounds(psi: &SpatialCutoff, samples: usize) -> CutoffCheckReport {
    let mut report = CutoffCheckReport::empty(samples);
    report.measured_c0_grad = Some(psi.measured_c0_grad(samples));
    report.measured_c0_lap = Some(psi.measured_c0_lap(samples));
    report
}

/// Measures the constant in the derivative-transfer inequality of order
/// `alpha` for a gridded field f: derivatives are moved onto psi by parts,
/// so f itself is never differentiated.
///
/// alpha = 1 compares |integral of f grad psi| R against
/// integral of |f| psi^rho2; alpha = 2 uses the Laplacian and exponent
/// 2 rho2 - 1. Returns the measured constant and whether it sits below the
/// sampled ratio supremum.
pub fn check_scale_inequality(
    f: &ScalarField,
    psi: &SpatialCutoff,
    alpha: u32,
    samples: usize,
) -> Result<CutoffCheckReport> {
    if alpha != 1 && alpha != 2 {
        return Err(Error::InvalidParameter(format!("derivative order {alpha} not supported")));
    }
    let grid = f.grid();
    if grid.dim() != psi.dim() {
        return Err(Error::GridMismatch(format!(
            "field dimension {} != cutoff dimension {}",
            grid.dim(),
            psi.dim()
        )));
    }
    grid.check_support(psi.center(), psi.support_radius())?;
    let delta = if alpha == 1 { psi.rho2() } else { 2.0 * psi.rho2() - 1.0 };
    let vol = grid.cell_volume();
    let mut lhs_vec = [0.0; MAX_DIM];
    let mut lhs_lap = 0.0;
    let mut denom = 0.0;
    grid.for_each_window_cell(psi.center(), psi.support_radius(), |lin, offset| {
        let mut d2 = 0.0;
        for a in 0..grid.dim() {
            d2 += offset[a] * offset[a];
        }
        let dist = d2.sqrt();
        let value = f.get(lin);
        if alpha == 1 {
            let rad = psi.radial_derivative_at_dist(dist);
            if rad != 0.0 && dist > 0.0 {
                for a in 0..grid.dim() {
                    lhs_vec[a] += value * rad * offset[a] / dist * vol;
                }
            }
        } else {
            lhs_lap += value * psi.laplacian_at_dist(dist) * vol;
        }
        denom += value.abs() * psi.psi_at_dist(dist).powf(delta) * vol;
    });
    let mut report = CutoffCheckReport::empty(samples);
    report.delta_alpha = Some(delta);
    if denom == 0.0 {
        report.degenerate = true;
        return Ok(report);
    }
    let lhs = if alpha == 1 {
        let mut s = 0.0;
        for v in lhs_vec.iter().take(grid.dim()) {
            s += v * v;
        }
        s.sqrt()
    } else {
        lhs_lap.abs()
    };
    let c = lhs * psi.scale().powi(alpha as i32) / denom;
    let c0 = if alpha == 1 {
        psi.measured_c0_grad(samples)
    } else {
        psi.measured_c0_lap(samples)
    };
    if alpha == 1 {
        report.measured_c0_grad = Some(c0);
    } else {
        report.measured_c0_lap = Some(c0);
    }
    report.c_alpha = Some(c);
    report.bound_satisfied = Some(c <= c0 * (1.0 + 1e-9));
    Ok(report)
}

/// Minimum of (outer - inner) over the grid; nonnegative when the outer
/// cutoff dominates the inner one pointwise.
pub fn domination_margin(
    outer: &SpatialCutoff,
    inner: &SpatialCutoff,
    grid: &crate::fields::grid::Grid,
) -> f64 {
    let mut margin = f64::INFINITY;
    for lin in 0..grid.num_cells() {
        let x = grid.cell_center(grid.unlinear(lin));
        margin = margin.min(outer.psi(x) - inner.psi(x));
    }
    margin
}
