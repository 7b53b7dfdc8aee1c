//! Particle swarm update rules.
//!
//! Each particle moves by `v <- w v + U(0, phi_p) * (p_i - x) + U(0, phi_g) * (p_g - x)`
//! then `x <- x + v`, with componentwise products. The inertia `w` is either
//! constant, decreases linearly with the iteration count, or is set per
//! particle from its relative improvement `m_i`.
//!
//! Fitness evaluation and global-best reduction belong to the engine; the
//! functions here are pure per-particle transforms.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::Genome;

pub const DEFAULT_PHI: f64 = 2.0;
pub const DEFAULT_CONSTANT_INERTIA: f64 = 0.729;
pub const DEFAULT_INERTIA_START: f64 = 0.9;
pub const DEFAULT_INERTIA_END: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Inertia {
    Constant(f64),
    LinearDecreasing { start: f64, end: f64 },
    NonlinearDecreasing { start: f64, end: f64 },
}

impl Default for Inertia {
    fn default() -> Self {
        Inertia::LinearDecreasing {
            start: DEFAULT_INERTIA_START,
            end: DEFAULT_INERTIA_END,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsoParams {
    pub phi_p: f64,
    pub phi_g: f64,
    pub inertia: Inertia,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            phi_p: DEFAULT_PHI,
            phi_g: DEFAULT_PHI,
            inertia: Inertia::default(),
        }
    }
}

impl PsoParams {
    /// All bound violations, empty when valid. Negated comparisons also
    /// reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.phi_p >= 0.0 && self.phi_p.is_finite()) {
            out.push(format!("pso.phi_p = {} violates φ_p ≥ 0", self.phi_p));
        }
        if !(self.phi_g >= 0.0 && self.phi_g.is_finite()) {
            out.push(format!("pso.phi_g = {} violates φ_g ≥ 0", self.phi_g));
        }
        match self.inertia {
            Inertia::Constant(w) if !w.is_finite() => {
                out.push(format!("pso.w = {w} must be finite"));
            }
            Inertia::LinearDecreasing { start, end } if !(start > end) => {
                out.push(format!(
                    "linear inertia w_start = {start}, w_end = {end} violates ω(0) > ω(T_max)"
                ));
            }
            Inertia::NonlinearDecreasing { start, end } => {
                if !(start < 1.0) {
                    out.push(format!(
                        "nonlinear inertia w_start = {start} violates ω(0) < 1"
                    ));
                }
                if !end.is_finite() {
                    out.push(format!("nonlinear inertia w_end = {end} must be finite"));
                }
            }
            _ => {}
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Genome,
    pub velocity: Vec<f64>,
    pub personal_best: Genome,
    pub personal_best_fitness: f64,
    /// Relative improvement from the previous evaluation; drives nonlinear inertia.
    pub relative_improvement: f64,
}

impl Particle {
    /// A freshly evaluated particle is its own personal best with `m = 0`.
    pub fn new(position: Genome, velocity: Vec<f64>, fitness: f64) -> Self {
        Particle {
            personal_best: position.clone(),
            position,
            velocity,
            personal_best_fitness: fitness,
            relative_improvement: 0.0,
        }
    }
}

#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn inertia_linear(t: usize, t_max: usize, start: f64, end: f64) -> Result<f64> {
    if !(start > end) {
        return Err(Error::InvalidConfig(vec![format!(
            "linear inertia w_start = {start}, w_end = {end} violates ω(0) > ω(T_max)"
        )]));
    }
    if t_max == 0 {
        return Ok(start);
    }
    let remaining = t_max.saturating_sub(t) as f64 / t_max as f64;
    Ok((start - end) * remaining + end)
}

/// `(f(p_i) - f(x)) / (f(p_i) + f(x))`, or 0 when both are zero.
pub fn relative_improvement(pbest_fitness: f64, current_fitness: f64) -> f64 {
    let denom = pbest_fitness + current_fitness;
    if denom == 0.0 {
        0.0
    } else {
        (pbest_fitness - current_fitness) / denom
    }
}

pub fn inertia_nonlinear(m: f64, start: f64, end: f64) -> f64 {
    // (e^m - 1) / (e^m + 1) overflows to NaN for large m; tanh(m/2) is the same ratio.
    let ratio = if m.is_infinite() {
        m.signum()
    } else {
        (m / 2.0).tanh()
    };
    start + (end - start) * ratio
}

fn inertia_for(particle: &Particle, params: &PsoParams, t: usize, t_max: usize) -> Result<f64> {
    match params.inertia {
        Inertia::Constant(w) => Ok(w),
        Inertia::LinearDecreasing { start, end } => inertia_linear(t, t_max, start, end),
        Inertia::NonlinearDecreasing { start, end } => {
            Ok(inertia_nonlinear(particle.relative_improvement, start, end))
        }
    }
}

/// Moves one particle. Draws the full `U(0, phi_p)` vector first, then the
/// full `U(0, phi_g)` vector, from `rng`.
pub fn pso_update<R: Rng + ?Sized>(
    particle: &Particle,
    global_best: &[f64],
    params: &PsoParams,
    t: usize,
    t_max: usize,
    rng: &mut R,
) -> Result<Particle> {
    let n = particle.position.len();
    for (what, len) in [
        ("velocity", particle.velocity.len()),
        ("personal best", particle.personal_best.len()),
        ("global best", global_best.len()),
    ] {
        if len != n {
            return Err(Error::DimensionMismatch {
                what,
                expected: n,
                actual: len,
            });
        }
    }

    let w = inertia_for(particle, params, t, t_max)?;
    let u_p: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * params.phi_p).collect();
    let u_g: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * params.phi_g).collect();

    let mut next = particle.clone();
    for j in 0..n {
        let x = particle.position[j];
        let v = w * particle.velocity[j]
            + u_p[j] * (particle.personal_best[j] - x)
            + u_g[j] * (global_best[j] - x);
        next.velocity[j] = v;
        next.position[j] = x + v;
    }
    Ok(next)
}

/// Records the fitness of the particle's new position. Returns the updated
/// particle and whether the position strictly beats `global_best_fitness`.
pub fn pso_post_evaluate(
    particle: Particle,
    new_fitness: f64,
    global_best_fitness: f64,
) -> (Particle, bool) {
    let mut particle = particle;
    if new_fitness > particle.personal_best_fitness {
        particle.personal_best = particle.position.clone();
        particle.personal_best_fitness = new_fitness;
    }
    particle.relative_improvement =
        relative_improvement(particle.personal_best_fitness, new_fitness);
    (particle, new_fitness > global_best_fitness)
}
