//! Analytic field generators, including exact decaying-flow solutions.
//!
//! Every generator is a deterministic function of its parameters, the grid,
//! the sample time, and (for the random one) the seed. Viscosity is fixed to
//! one throughout, so Taylor-Green decays as e^{-2t} and the ABC flow as
//! e^{-t}.

use crate::error::{Error, Result};
use crate::fields::field::{ScalarField, VectorField};
use crate::fields::grid::Grid;
use crate::fields::spectral;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which field of a flow generator to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FlowPart {
    #[default]
    Velocity,
    Vorticity,
}

/// A named analytic field with parameters, ready to sample on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum Generator {
    /// f(x) = cos^2(x+5) sin((x-1)^2 / 2), the oscillatory 1D demo profile.
    Demo1d,
    /// z-independent Taylor-Green cell embedded in a 3D box, decay e^{-2t}.
    TaylorGreen2d3d {
        #[serde(default)]
        part: FlowPart,
    },
    /// Beltrami ABC flow with decay e^{-t}; vorticity equals velocity.
    AbcFlow {
        a: f64,
        b: f64,
        c: f64,
        #[serde(default)]
        part: FlowPart,
    },
    /// One Fourier mode of vorticity, omega = (0, 0, A sin(k_phys x)).
    SingleMode { amplitude: f64, wavenumber: usize },
    /// Divergence-free random Fourier superposition with per-mode energy
    /// proportional to |k|^slope, decaying like a Stokes flow.
    RandomMultiscale {
        kmin: usize,
        kmax: usize,
        slope: f64,
        seed: u64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
}

fn default_amplitude() -> f64 {
    1.0
}

/// Output of a generator: scalar or vector depending on the generator.
#[derive(Debug, Clone)]
pub enum Sampled {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl Sampled {
    pub fn into_scalar(self) -> Result<ScalarField> {
        match self {
            Sampled::Scalar(f) => Ok(f),
            Sampled::Vector(_) => {
                Err(Error::InvalidParameter("expected a scalar field".into()))
            }
        }
    }

    pub fn into_vector(self) -> Result<VectorField> {
        match self {
            Sampled::Vector(f) => Ok(f),
            Sampled::Scalar(_) => {
                Err(Error::InvalidParameter("expected a vector field".into()))
            }
        }
    }
}

/// The 1D demo profile, exactly zero at x = 1.
pub fn demo1d_value(x: f64) -> f64 {
    let c = (x + 5.0).cos();
    c * c * (0.5 * (x - 1.0) * (x - 1.0)).sin()
}

/// Sample the demo profile on a 1D grid.
pub fn demo1d_field(grid: &Grid) -> Result<ScalarField> {
    if grid.dim() != 1 {
        return Err(Error::InvalidParameter("demo1d needs a 1D grid".into()));
    }
    ScalarField::sample(grid.clone(), |x| demo1d_value(x[0]))
}

fn require_3d(grid: &Grid, name: &str) -> Result<()> {
    if grid.dim() != 3 {
        return Err(Error::InvalidParameter(format!("{name} needs a 3D grid")));
    }
    Ok(())
}

/// Taylor-Green velocity u = (cos x sin y, -sin x cos y, 0) e^{-2t}.
pub fn taylor_green_velocity(grid: &Grid, t: f64) -> Result<VectorField> {
    require_3d(grid, "taylor_green_2d3d")?;
    let decay = (-2.0 * t).exp();
    VectorField::sample(grid.clone(), |x| {
        [
            decay * x[0].cos() * x[1].sin(),
            -decay * x[0].sin() * x[1].cos(),
            0.0,
        ]
    })
}

/// Taylor-Green vorticity omega = (0, 0, -2 cos x cos y) e^{-2t}.
pub fn taylor_green_vorticity(grid: &Grid, t: f64) -> Result<VectorField> {
    require_3d(grid, "taylor_green_2d3d")?;
    let decay = (-2.0 * t).exp();
    VectorField::sample(grid.clone(), |x| {
        [0.0, 0.0, -2.0 * decay * x[0].cos() * x[1].cos()]
    })
}

/// ABC velocity; with unit viscosity the whole field decays as e^{-t}.
pub fn abc_velocity(grid: &Grid, t: f64, a: f64, b: f64, c: f64) -> Result<VectorField> {
    require_3d(grid, "abc_flow")?;
    let decay = (-t).exp();
    VectorField::sample(grid.clone(), |x| {
        [
            decay * (a * x[2].sin() + c * x[1].cos()),
            decay * (b * x[0].sin() + a * x[2].cos()),
            decay * (c * x[1].sin() + b * x[0].cos()),
        ]
    })
}

/// ABC vorticity; curl u = u for this Beltrami field, any (A, B, C).
pub fn abc_vorticity(grid: &Grid, t: f64, a: f64, b: f64, c: f64) -> Result<VectorField> {
    abc_velocity(grid, t, a, b, c)
}

/// Single-mode vorticity (0, 0, A sin(k_phys x)), k_phys = 2 pi k / L_x.
pub fn single_mode_vorticity(grid: &Grid, amplitude: f64, k: usize) -> Result<VectorField> {
    require_3d(grid, "single_mode")?;
    if k == 0 || k >= grid.resolution(0) / 2 {
        return Err(Error::InvalidParameter(format!(
            "single_mode wavenumber {k} must lie in 1..{}",
            grid.resolution(0) / 2
        )));
    }
    let k_phys = 2.0 * PI * k as f64 / grid.extent(0);
    VectorField::sample(grid.clone(), |x| [0.0, 0.0, amplitude * (k_phys * x[0]).sin()])
}

/// Divergence-free random velocity built mode by mode in Fourier space.
///
/// Modes with integer wavevector norm in [kmin, kmax] get independent
/// complex Gaussian amplitudes of standard deviation |k_phys|^{slope/2},
/// projected orthogonal to k; each decays by e^{-|k_phys|^2 t}. The mode
/// loop runs in a fixed order from a ChaCha stream, so a seed pins the
/// field bitwise.
pub fn random_multiscale(
    grid: &Grid,
    kmin: usize,
    kmax: usize,
    slope: f64,
    seed: u64,
    amplitude: f64,
    t: f64,
) -> Result<VectorField> {
    require_3d(grid, "random_multiscale")?;
    for a in 0..3 {
        if !grid.periodic(a) || grid.resolution(a) % 2 != 0 {
            return Err(Error::InvalidParameter(
                "random_multiscale needs periodic axes with even resolution".into(),
            ));
        }
    }
    let half = grid.resolution(0).min(grid.resolution(1)).min(grid.resolution(2)) / 2;
    if kmin == 0 || kmax < kmin || kmax > half - 1 {
        return Err(Error::InvalidParameter(format!(
            "random_multiscale needs 1 <= kmin <= kmax <= {}",
            half - 1
        )));
    }
    let n = grid.num_cells();
    let mut hats = vec![vec![Complex::new(0.0, 0.0); n]; 3];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let res = [grid.resolution(0), grid.resolution(1), grid.resolution(2)];
    let lim = kmax as i64;
    let norm = (n as f64).sqrt();
    for fi in -lim..=lim {
        for fj in -lim..=lim {
            for fk in -lim..=lim {
                // one representative per conjugate pair: first nonzero positive
                if (fi, fj, fk) <= (0, 0, 0) {
                    continue;
                }
                let f = [fi, fj, fk];
                let mag2 = (fi * fi + fj * fj + fk * fk) as f64;
                let mag = mag2.sqrt();
                if mag < kmin as f64 || mag > kmax as f64 {
                    continue;
                }
                let mut k = [0.0_f64; 3];
                for a in 0..3 {
                    k[a] = 2.0 * PI * f[a] as f64 / grid.extent(a);
                }
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                let std = amplitude * k2.sqrt().powf(0.5 * slope) * (-k2 * t).exp();
                let mut coef = [Complex::new(0.0, 0.0); 3];
                let mut dot = Complex::new(0.0, 0.0);
                for c in coef.iter_mut() {
                    let re: f64 = sample_standard_normal(&mut rng);
                    let im: f64 = sample_standard_normal(&mut rng);
                    *c = Complex::new(re, im) * std;
                }
                for a in 0..3 {
                    dot += coef[a] * k[a];
                }
                for a in 0..3 {
                    coef[a] -= dot * k[a] / k2;
                }
                let mut idx = [0usize; 3];
                let mut mir = [0usize; 3];
                for a in 0..3 {
                    idx[a] = f[a].rem_euclid(res[a] as i64) as usize;
                    mir[a] = (-f[a]).rem_euclid(res[a] as i64) as usize;
                }
                let lin = grid.linear(idx);
                let lin_m = grid.linear(mir);
                for a in 0..3 {
                    hats[a][lin] = coef[a] * norm;
                    hats[a][lin_m] = coef[a].conj() * norm;
                }
            }
        }
    }
    let comps: Result<Vec<ScalarField>> = hats
        .into_iter()
        .map(|h| ScalarField::from_data(grid.clone(), spectral::inverse_real(grid, h)))
        .collect();
    VectorField::from_components(comps?)
}

/// Box-Muller draw; two uniforms per call keeps the stream layout obvious.
fn sample_standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Sample any generator at one time point.
pub fn sample_analytic(gen: &Generator, grid: &Grid, t: f64) -> Result<Sampled> {
    match gen {
        Generator::Demo1d => Ok(Sampled::Scalar(demo1d_field(grid)?)),
        Generator::TaylorGreen2d3d { part } => Ok(Sampled::Vector(match part {
            FlowPart::Velocity => taylor_green_velocity(grid, t)?,
            FlowPart::Vorticity => taylor_green_vorticity(grid, t)?,
        })),
        Generator::AbcFlow { a, b, c, part } => Ok(Sampled::Vector(match part {
            FlowPart::Velocity => abc_velocity(grid, t, *a, *b, *c)?,
            FlowPart::Vorticity => abc_vorticity(grid, t, *a, *b, *c)?,
        })),
        Generator::SingleMode { amplitude, wavenumber } => {
            Ok(Sampled::Vector(single_mode_vorticity(grid, *amplitude, *wavenumber)?))
        }
        Generator::RandomMultiscale { kmin, kmax, slope, seed, amplitude } => {
            Ok(Sampled::Vector(random_multiscale(
                grid, *kmin, *kmax, *slope, *seed, *amplitude, t,
            )?))
        }
    }
}
