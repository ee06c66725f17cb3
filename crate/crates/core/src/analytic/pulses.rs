//! Travelling pulses of the attractive-repulsive system.

use super::segregated::check_order_sides;
use super::{bump, positive_finite, Profile, ProfileDocument, Supports};
use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// `eta` centred at 0 running ahead of `rho` centred at `-x0`, both of mass `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPulseProfile {
    pub m: f64,
    pub epsilon: f64,
    pub a: f64,
    pub x0: f64,
    pub v: f64,
}

pub fn two_pulse(m: f64, epsilon: f64, x0: f64) -> Result<TwoPulseProfile> {
    positive_finite("m", m)?;
    positive_finite("epsilon", epsilon)?;
    let a = (1.5 * epsilon).cbrt();
    if !(x0.is_finite() && x0 >= 2.0 * a * (1.0 - 1e-12)) {
        return Err(invalid(format!("x0 = {x0} is below the no-overlap separation 2a = {}", 2.0 * a)));
    }
    Ok(TwoPulseProfile {
        m,
        epsilon,
        a,
        x0,
        v: m,
    })
}

/// Half-width obtained when the two pulses are assumed adjacent.
pub fn adjacent_pulse_support(epsilon: f64) -> f64 {
    (12.0 * epsilon).cbrt()
}

impl Profile for TwoPulseProfile {
    fn family(&self) -> &'static str {
        "two_pulse"
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        let k = self.m / (2.0 * self.epsilon);
        (bump(k, -self.x0 - self.a, -self.x0 + self.a, x), bump(k, -self.a, self.a, x))
    }

    fn supports(&self) -> Supports {
        Supports {
            rho: vec![(-self.x0 - self.a, -self.x0 + self.a)],
            eta: vec![(-self.a, self.a)],
        }
    }

    fn speed(&self) -> f64 {
        self.v
    }

    fn masses(&self) -> (f64, f64) {
        (self.m, self.m)
    }

    fn document(&self) -> ProfileDocument {
        ProfileDocument::new("two_pulse", self.supports(), self.v)
            .param("m", self.m)
            .param("epsilon", self.epsilon)
            .param("a", self.a)
            .param("x0", self.x0)
            .amplitude("peak", self.m * self.a * self.a / (2.0 * self.epsilon))
    }
}

/// `rho` of mass `m` centred at 0 between two `eta` bumps of masses `m_l` and `m_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreePulseProfile {
    pub m: f64,
    pub m_l: f64,
    pub m_r: f64,
    /// First moment of `eta` in the co-moving frame.
    pub big_m2: f64,
    pub epsilon: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub v: f64,
}

fn validate_three(m: f64, m_l: f64, m_r: f64, epsilon: f64) -> Result<()> {
    positive_finite("m", m)?;
    positive_finite("epsilon", epsilon)?;
    if !(m_l.is_finite() && m_r.is_finite() && m_l >= 0.0 && m_r >= 0.0 && m_l + m_r > 0.0) {
        return Err(invalid(format!("side masses must be non-negative and not both zero, got {m_l}, {m_r}")));
    }
    // The first moment of eta only stays consistent with a moving frame when the masses balance.
    if m_l != m_r && (m - (m_l + m_r)).abs() > 1e-12 * m {
        return Err(invalid(format!(
            "unequal side masses need m = m_l + m_r, got m = {m}, m_l + m_r = {}",
            m_l + m_r
        )));
    }
    Ok(())
}

pub fn three_pulse(m: f64, m_l: f64, m_r: f64, big_m2: f64, epsilon: f64) -> Result<ThreePulseProfile> {
    validate_three(m, m_l, m_r, epsilon)?;
    if !big_m2.is_finite() {
        return Err(invalid("M2 must be finite"));
    }
    let m2 = m_l + m_r;
    let v = m_r - m_l;
    let c = (1.5 * epsilon).cbrt();
    let hl = (1.5 * epsilon * m_l / m2).cbrt();
    let hr = (1.5 * epsilon * m_r / m2).cbrt();
    let cl = (big_m2 - m - v) / m2;
    let cr = (big_m2 + m - v) / m2;
    let b = cl + hl;
    let a = 2.0 * cl - b;
    let d = cr - hr;
    let e = 2.0 * cr - d;
    check_order_sides(a, b, c, d, e, m_l > 0.0, m_r > 0.0)?;
    Ok(ThreePulseProfile {
        m,
        m_l,
        m_r,
        big_m2,
        epsilon,
        a,
        b,
        c,
        d,
        e,
        v,
    })
}

impl Profile for ThreePulseProfile {
    fn family(&self) -> &'static str {
        "three_pulse"
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        let kr = self.m / (2.0 * self.epsilon);
        let ke = (self.m_l + self.m_r) / (2.0 * self.epsilon);
        let mut eta = 0.0;
        if self.m_l > 0.0 {
            eta += bump(ke, self.a, self.b, x);
        }
        if self.m_r > 0.0 {
            eta += bump(ke, self.d, self.e, x);
        }
        (bump(kr, -self.c, self.c, x), eta)
    }

    fn supports(&self) -> Supports {
        let mut eta = Vec::new();
        if self.m_l > 0.0 {
            eta.push((self.a, self.b));
        }
        if self.m_r > 0.0 {
            eta.push((self.d, self.e));
        }
        Supports {
            rho: vec![(-self.c, self.c)],
            eta,
        }
    }

    fn speed(&self) -> f64 {
        self.v
    }

    fn masses(&self) -> (f64, f64) {
        (self.m, self.m_l + self.m_r)
    }

    fn document(&self) -> ProfileDocument {
        ProfileDocument::new("three_pulse", self.supports(), self.v)
            .param("m", self.m)
            .param("m_l", self.m_l)
            .param("m_r", self.m_r)
            .param("M2", self.big_m2)
            .param("epsilon", self.epsilon)
            .param("a", self.a)
            .param("b", self.b)
            .param("c", self.c)
            .param("d", self.d)
            .param("e", self.e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct M2Range {
    pub m2_min: f64,
    pub m2_max: f64,
}

/// Moments at which the left bump touches `rho` (`b = -c`, upper end) or the
/// right bump does (`c = d`, lower end).
pub fn three_pulse_m2_range(m: f64, m_l: f64, m_r: f64, epsilon: f64) -> Result<M2Range> {
    validate_three(m, m_l, m_r, epsilon)?;
    let m2 = m_l + m_r;
    let v = m_r - m_l;
    let c = (1.5 * epsilon).cbrt();
    let m2_max = m + v - m2 * c - (1.5 * epsilon * m_l * m2 * m2).cbrt();
    let m2_min = v - m + m2 * c + (1.5 * epsilon * m_r * m2 * m2).cbrt();
    Ok(M2Range { m2_min, m2_max })
}
