//! Quadrature check that a closed-form profile balances its potentials.

use super::Profile;
use crate::potential::{ModelParams, PotentialSpec};
use crate::quadrature::integrate_piecewise;
use serde::{Deserialize, Serialize};

/// Fitted constants per support component and the worst deviation from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateResidual {
    /// One constant per component of `supp(rho)`.
    pub c1: Vec<f64>,
    /// One constant per component of `supp(eta)`.
    pub c2: Vec<f64>,
    pub max_deviation: f64,
}

const SAMPLES: usize = 41;
const QUAD_TOL: f64 = 1e-13;

fn convolve(profile: &dyn Profile, w: &PotentialSpec, eta: bool, x: f64, span: (f64, f64), breaks: &[f64]) -> f64 {
    let mut br = breaks.to_vec();
    br.push(x);
    integrate_piecewise(
        |y| {
            let (r, e) = profile.eval(y);
            w.eval(x - y) * if eta { e } else { r }
        },
        span.0,
        span.1,
        &br,
        QUAD_TOL,
    )
}

fn check(profile: &dyn Profile, params: &ModelParams, speed: f64) -> SteadyStateResidual {
    let sup = profile.supports();
    let breaks = profile.breakpoints();
    let all: Vec<(f64, f64)> = sup.rho.iter().chain(&sup.eta).copied().collect();
    if all.is_empty() {
        return SteadyStateResidual {
            c1: Vec::new(),
            c2: Vec::new(),
            max_deviation: 0.0,
        };
    }
    let span = all
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(a, b)| (lo.min(a), hi.max(b)));
    let eps = params.epsilon;
    let mut worst: f64 = 0.0;
    let mut fit = |comps: &[(f64, f64)], self_w: &PotentialSpec, cross_w: &PotentialSpec, is_eta: bool| -> Vec<f64> {
        comps
            .iter()
            .filter(|(a, b)| b > a)
            .map(|&(a, b)| {
                let vals: Vec<f64> = (0..SAMPLES)
                    .map(|j| {
                        let x = a + (b - a) * (j as f64 + 0.5) / SAMPLES as f64;
                        let (r, e) = profile.eval(x);
                        convolve(profile, self_w, is_eta, x, span, &breaks)
                            + convolve(profile, cross_w, !is_eta, x, span, &breaks)
                            + eps * (r + e)
                            + speed * x
                    })
                    .collect();
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                worst = worst.max(0.5 * (hi - lo));
                0.5 * (hi + lo)
            })
            .collect()
    };
    let c1 = fit(&sup.rho, &params.w11, &params.w12, false);
    let c2 = fit(&sup.eta, &params.w22, &params.w21, true);
    SteadyStateResidual {
        c1,
        c2,
        max_deviation: worst,
    }
}

/// `W11*rho + W12*eta + eps(rho + eta)` and its `eta` counterpart must be
/// constant on each support component.
pub fn verify_steady_state(profile: &dyn Profile, params: &ModelParams) -> SteadyStateResidual {
    check(profile, params, 0.0)
}

/// Same balance in the frame moving with the profile, where the potentials
/// pick up the term `v z`.
pub fn verify_comoving_state(profile: &dyn Profile, params: &ModelParams) -> SteadyStateResidual {
    check(profile, params, profile.speed())
}
