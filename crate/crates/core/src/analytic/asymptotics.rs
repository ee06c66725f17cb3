//! Leading-order support radii of Batman profiles as `eps -> 0`, where
//! `b ~ b0 sqrt(eps)` and `c ~ c0 sqrt(eps)`.

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSupport {
    pub b0: f64,
    pub c0: f64,
}

fn ratio(m1: f64, m2: f64) -> Result<f64> {
    if !(m1.is_finite() && m2.is_finite() && m2 > 0.0) {
        return Err(invalid("masses must be finite with m2 > 0"));
    }
    let q = (m1 - m2) / m2;
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid(format!("(m1 - m2)/m2 = {q} lies outside [0, 1]")));
    }
    Ok(q.sqrt())
}

/// `b0 = arccos(sqrt((m1 - m2)/m2))`, `c0 = sqrt((m1 - m2)/m2) + b0`.
pub fn small_eps_support(m1: f64, m2: f64) -> Result<AsymptoticSupport> {
    let k = ratio(m1, m2)?;
    let b0 = k.acos();
    Ok(AsymptoticSupport { b0, c0: k + b0 })
}

/// Leading-order balance of the continuity relation, `b0 - c0 + cot(b0) = 0`,
/// which gives `b0 = arccot(sqrt((m1 - m2)/m2))`. This is the value the numeric
/// roots approach; the arccos form above differs from it except at `m1 = m2`.
pub fn small_eps_support_cot(m1: f64, m2: f64) -> Result<AsymptoticSupport> {
    let k = ratio(m1, m2)?;
    let b0 = std::f64::consts::FRAC_PI_2 - k.atan();
    Ok(AsymptoticSupport { b0, c0: k + b0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::solve_batman;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn closed_form_values() {
        let a = small_eps_support(1.5, 1.0).unwrap();
        assert!((a.b0 - FRAC_PI_4).abs() < 1e-15);
        assert!((a.c0 - (0.5f64.sqrt() + FRAC_PI_4)).abs() < 1e-15);
        assert!((a.c0 - 1.492468).abs() < 1e-4);
        let a = small_eps_support(1.0, 1.0).unwrap();
        assert_eq!(a.b0, FRAC_PI_2);
        assert_eq!(a.c0, FRAC_PI_2);
        assert!(small_eps_support(3.0, 1.0).is_err());
        assert!(small_eps_support(0.5, 1.0).is_err());
    }

    #[test]
    fn cotangent_form_tracks_numeric_roots() {
        let a = small_eps_support_cot(1.5, 1.0).unwrap();
        assert!((a.b0 - 2f64.sqrt().atan()).abs() < 1e-15);
        let eps: f64 = 1e-4;
        let p = solve_batman(1.5, 1.0, eps).unwrap();
        let bs = p.b / eps.sqrt();
        let cs = p.c / eps.sqrt();
        assert!((bs - a.b0).abs() / a.b0 < 0.01, "{bs} vs {}", a.b0);
        assert!((cs - a.c0).abs() / a.c0 < 0.02, "{cs} vs {}", a.c0);
    }
}
