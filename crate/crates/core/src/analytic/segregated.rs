//! Attractive-repulsive steady states: `rho` in the middle, `eta` split into
//! two bumps on either side.

use super::{bump, positive_finite, Profile, ProfileDocument, Supports};
use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Slack allowed on the touching inequalities so boundary moments are representable.
pub(crate) const ORDER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegregatedProfile {
    pub m1: f64,
    pub m2: f64,
    /// First moment of `eta`.
    pub big_m2: f64,
    pub epsilon: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    /// First moment of `rho`, zero by the centring convention.
    pub big_m1: f64,
}

pub(crate) fn check_order(a: f64, b: f64, c: f64, d: f64, e: f64) -> Result<()> {
    check_order_sides(a, b, c, d, e, true, true)
}

/// Ordering check skipping the contact inequality of a side that carries no mass.
pub(crate) fn check_order_sides(a: f64, b: f64, c: f64, d: f64, e: f64, left: bool, right: bool) -> Result<()> {
    let slack = ORDER_TOL * (1.0 + a.abs().max(e.abs()));
    if !(a <= b) {
        return Err(invalid(format!("a <= b fails: a = {a}, b = {b}")));
    }
    if left && b > -c + slack {
        return Err(invalid(format!(
            "b <= -c fails: b = {b}, -c = {} (left eta bump overlaps rho)",
            -c
        )));
    }
    if right && c > d + slack {
        return Err(invalid(format!("c <= d fails: c = {c}, d = {d} (right eta bump overlaps rho)")));
    }
    if !(d <= e) {
        return Err(invalid(format!("d <= e fails: d = {d}, e = {e}")));
    }
    Ok(())
}

pub fn segregated_state(m1: f64, m2: f64, big_m2: f64, epsilon: f64) -> Result<SegregatedProfile> {
    positive_finite("m1", m1)?;
    positive_finite("m2", m2)?;
    positive_finite("epsilon", epsilon)?;
    if !big_m2.is_finite() {
        return Err(invalid("M2 must be finite"));
    }
    let c = (1.5 * epsilon).cbrt();
    let h = 0.5 * (6.0 * epsilon).cbrt();
    let b = (big_m2 - m1) / m2 + h;
    let a = 2.0 * (big_m2 - m1) / m2 - b;
    let d = (big_m2 + m1) / m2 - h;
    let e = 2.0 * (big_m2 + m1) / m2 - d;
    check_order(a, b, c, d, e)?;
    Ok(SegregatedProfile {
        m1,
        m2,
        big_m2,
        epsilon,
        a,
        b,
        c,
        d,
        e,
        big_m1: 0.0,
    })
}

impl Profile for SegregatedProfile {
    fn family(&self) -> &'static str {
        "segregated"
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        let kr = self.m1 / (2.0 * self.epsilon);
        let ke = self.m2 / (2.0 * self.epsilon);
        let rho = bump(kr, -self.c, self.c, x);
        let eta = bump(ke, self.a, self.b, x) + bump(ke, self.d, self.e, x);
        (rho, eta)
    }

    fn supports(&self) -> Supports {
        Supports {
            rho: vec![(-self.c, self.c)],
            eta: vec![(self.a, self.b), (self.d, self.e)],
        }
    }

    fn masses(&self) -> (f64, f64) {
        (self.m1, self.m2)
    }

    fn document(&self) -> ProfileDocument {
        ProfileDocument::new("segregated", self.supports(), 0.0)
            .param("m1", self.m1)
            .param("m2", self.m2)
            .param("M2", self.big_m2)
            .param("epsilon", self.epsilon)
            .param("a", self.a)
            .param("b", self.b)
            .param("c", self.c)
            .param("d", self.d)
            .param("e", self.e)
            .amplitude("rho_peak", self.m1 * self.c * self.c / (2.0 * self.epsilon))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    pub eps_c: f64,
    /// Largest admissible `|M2|` at the requested `eps`; negative when none is.
    pub m2_max: f64,
}

/// `eps_c = (4/9) m1^3 (2^(1/3) - 1) / m2^3`.
pub fn critical_epsilon(m1: f64, m2: f64) -> f64 {
    (4.0 / 9.0) * m1.powi(3) * (2f64.cbrt() - 1.0) / m2.powi(3)
}

/// `M2_max = m1 - (m2/2) eps^(1/3) (12^(1/3) + 6^(1/3))`.
pub fn max_m2(m1: f64, m2: f64, epsilon: f64) -> CriticalValues {
    CriticalValues {
        eps_c: critical_epsilon(m1, m2),
        m2_max: m1 - 0.5 * m2 * epsilon.cbrt() * (12f64.cbrt() + 6f64.cbrt()),
    }
}

/// Point masses reached as `eps -> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracLimit {
    pub rho_location: f64,
    pub eta_locations: (f64, f64),
    /// `(m1, m2/2, m2/2)`.
    pub weights: (f64, f64, f64),
    /// Velocities of the three particles under the interaction forces.
    pub particle_residuals: [f64; 3],
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn vanishing_diffusion_limit(m1: f64, m2: f64, big_m2: f64) -> Result<DiracLimit> {
    positive_finite("m1", m1)?;
    positive_finite("m2", m2)?;
    if !(big_m2.abs() < m1) {
        return Err(invalid(format!("need |M2| < m1, got M2 = {big_m2}, m1 = {m1}")));
    }
    let x = 0.0;
    let y1 = (big_m2 - m1) / m2;
    let y2 = (big_m2 + m1) / m2;
    let w = 0.5 * m2;
    // W11 = W22 = x^2/2, W12 = |x|, W21 = -|x|; each particle moves with minus the summed force.
    let vx = -(w * sgn(x - y1) + w * sgn(x - y2));
    let vy1 = -(w * (y1 - y2) - m1 * sgn(y1 - x));
    let vy2 = -(w * (y2 - y1) - m1 * sgn(y2 - x));
    Ok(DiracLimit {
        rho_location: x,
        eta_locations: (y1, y2),
        weights: (m1, w, w),
        particle_residuals: [vx, vy1, vy2],
    })
}
