//! Exact steady states and travelling pulses.

mod asymptotics;
mod batman;
mod pulses;
mod second_kind;
mod segregated;
mod verify;

pub use asymptotics::{small_eps_support, small_eps_support_cot, AsymptoticSupport};
pub use batman::{batman_residuals, solve_batman, BatmanProfile};
pub use pulses::{
    adjacent_pulse_support, three_pulse, three_pulse_m2_range, two_pulse, M2Range, ThreePulseProfile,
    TwoPulseProfile,
};
pub use second_kind::{
    bifurcation_scan, envelope_range, second_kind_residuals, solve_second_kind, BifurcationScan, EnvelopeRange,
    SecondKindProfile, SecondKindResiduals,
};
pub use segregated::{
    critical_epsilon, max_m2, segregated_state, vanishing_diffusion_limit, CriticalValues, DiracLimit,
    SegregatedProfile,
};
pub use verify::{verify_comoving_state, verify_steady_state, SteadyStateResidual};

use crate::error::Result;
use crate::grid::Grid;
use crate::projection::{project_density, Density};
use crate::state::SystemState;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Closed intervals where each species is positive.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Supports {
    pub rho: Vec<(f64, f64)>,
    pub eta: Vec<(f64, f64)>,
}

/// A closed-form stationary or co-moving pair `(rho, eta)`.
pub trait Profile {
    fn family(&self) -> &'static str;

    /// Densities at `x` at time zero.
    fn eval(&self, x: f64) -> (f64, f64);

    fn supports(&self) -> Supports;

    /// Travelling speed; zero for steady states.
    fn speed(&self) -> f64 {
        0.0
    }

    fn document(&self) -> ProfileDocument;

    /// Densities at `x` after translating with the profile speed for time `t`.
    fn eval_at(&self, x: f64, t: f64) -> (f64, f64) {
        self.eval(x - self.speed() * t)
    }

    /// All points where either density may jump or kink.
    fn breakpoints(&self) -> Vec<f64> {
        let s = self.supports();
        let mut v: Vec<f64> = s
            .rho
            .iter()
            .chain(&s.eta)
            .flat_map(|&(a, b)| [a, b])
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    fn masses(&self) -> (f64, f64);
}

/// Serializable summary of a constructed profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub family: String,
    pub parameters: BTreeMap<String, f64>,
    pub supports: Supports,
    pub amplitudes: BTreeMap<String, f64>,
    pub residuals: BTreeMap<String, f64>,
    pub speed: f64,
}

impl ProfileDocument {
    pub(crate) fn new(family: &str, supports: Supports, speed: f64) -> Self {
        Self {
            family: family.to_string(),
            parameters: BTreeMap::new(),
            supports,
            amplitudes: BTreeMap::new(),
            residuals: BTreeMap::new(),
            speed,
        }
    }

    pub(crate) fn param(mut self, k: &str, v: f64) -> Self {
        self.parameters.insert(k.into(), v);
        self
    }

    pub(crate) fn amplitude(mut self, k: &str, v: f64) -> Self {
        self.amplitudes.insert(k.into(), v);
        self
    }

    pub(crate) fn residual(mut self, k: &str, v: f64) -> Self {
        self.residuals.insert(k.into(), v);
        self
    }
}

/// One species of a profile, translated by `shift`, as a projectable density.
pub struct SpeciesDensity<P> {
    pub profile: P,
    pub eta: bool,
    pub shift: f64,
}

/// Borrowed or shared access to a profile.
pub trait ProfileRef {
    fn get(&self) -> &dyn Profile;
}

impl ProfileRef for &dyn Profile {
    fn get(&self) -> &dyn Profile {
        *self
    }
}

impl ProfileRef for SharedProfile {
    fn get(&self) -> &dyn Profile {
        self.as_ref()
    }
}

impl<P: ProfileRef> Density for SpeciesDensity<P> {
    fn value(&self, x: f64) -> f64 {
        let (r, e) = self.profile.get().eval(x - self.shift);
        if self.eta {
            e
        } else {
            r
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.profile.get().breakpoints().into_iter().map(|b| b + self.shift).collect()
    }
}

/// Shared handle usable as initial data.
pub type SharedProfile = Arc<dyn Profile + Send + Sync>;

/// Cell averages of both species, translated by `shift`.
pub fn project_profile(profile: &dyn Profile, grid: &Grid, shift: f64) -> Result<SystemState> {
    let rho = project_density(
        &SpeciesDensity {
            profile,
            eta: false,
            shift,
        },
        grid,
    )?;
    let eta = project_density(
        &SpeciesDensity {
            profile,
            eta: true,
            shift,
        },
        grid,
    )?;
    SystemState::new(grid.clone(), rho, eta, 0.0)
}

/// Projection of `profile` as it stands at time `t`.
pub fn project_profile_at(profile: &dyn Profile, grid: &Grid, t: f64) -> Result<SystemState> {
    let mut s = project_profile(profile, grid, profile.speed() * t)?;
    s.time = t;
    Ok(s)
}

/// Parabola piece `k (x - lo)(hi - x)` clipped to `[lo, hi]`.
#[inline]
pub(crate) fn bump(k: f64, lo: f64, hi: f64, x: f64) -> f64 {
    if x >= lo && x <= hi {
        (k * (x - lo) * (hi - x)).max(0.0)
    } else {
        0.0
    }
}

pub(crate) fn positive_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(crate::error::invalid(format!("{name} must be positive, got {v}")))
    }
}
