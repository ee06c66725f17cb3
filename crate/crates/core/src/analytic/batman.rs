use super::{positive_finite, Profile, ProfileDocument, Supports};
use crate::error::{invalid, Error, Result};
use crate::newton::{self, NewtonOptions};
use crate::roots::{all_roots, brent};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Symmetric attractive-attractive steady state: cosine core on `[-b, b]`
/// where both species coexist, parabolic wings of `rho` on `b < |x| < c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatmanProfile {
    pub m1: f64,
    pub m2: f64,
    pub epsilon: f64,
    pub b: f64,
    pub c: f64,
    pub u_hat2: f64,
    pub r1: f64,
    pub r2: f64,
}

pub(crate) fn check_pole(b: f64, eps: f64) -> Result<f64> {
    let t = b / eps.sqrt();
    let k = (t / PI).round();
    if k != 0.0 && (t - k * PI).abs() <= 1e-12 * t.abs().max(1.0) || t == 0.0 {
        return Err(Error::Pole(format!("b/sqrt(eps) = {t} is a multiple of pi")));
    }
    Ok(t)
}

/// Residuals of the mass relation and of sum continuity at `x = b`.
pub fn batman_residuals(b: f64, c: f64, m1: f64, m2: f64, epsilon: f64) -> Result<(f64, f64)> {
    if !(b > 0.0 && c >= b) {
        return Err(invalid(format!("need 0 < b <= c, got b = {b}, c = {c}")));
    }
    let t = check_pole(b, epsilon)?;
    let s = epsilon.sqrt();
    let w = c - b;
    let r1 = 3.0 * epsilon * m1 + 3.0 * epsilon * m2 * b
        - 3.0 * epsilon * (m2 + m1 * b)
        - w * w * (3.0 * m2 + 2.0 * c * m1 + m1 * b);
    let r2 = m1 * (c * c - b * b) + epsilon * (m1 + m2) + 2.0 * m2 * w - 2.0 * s * (m2 + m1 * b) * t.cos() / t.sin();
    Ok((r1, r2))
}

/// Amplitude fixed by the mass of `eta`.
pub(crate) fn u_hat2(b: f64, m1: f64, m2: f64, epsilon: f64) -> f64 {
    let s = epsilon.sqrt();
    (m2 + m1 * b) / (s * (b / s).sin())
}

/// Support radius `c > b` on the zero set of the mass relation; needs `b < 1` when `m1 > m2`.
fn c_of_b(b: f64, m1: f64, m2: f64, eps: f64) -> Option<f64> {
    let r1 = |c: f64| {
        let w = c - b;
        3.0 * eps * (m1 - m2) * (1.0 - b) - w * w * (3.0 * m2 + 2.0 * c * m1 + m1 * b)
    };
    if r1(b) <= 0.0 {
        return None;
    }
    let mut hi = b + 1.0;
    while r1(hi) > 0.0 {
        hi = b + 2.0 * (hi - b);
    }
    brent(r1, b, hi, 1e-16).ok()
}

fn validate_masses(m1: f64, m2: f64, epsilon: f64) -> Result<()> {
    positive_finite("m1", m1)?;
    positive_finite("m2", m2)?;
    positive_finite("epsilon", epsilon)?;
    if m1 < m2 {
        return Err(invalid(format!(
            "Batman profiles need m1 >= m2 (rho is the wider species), got m1 = {m1}, m2 = {m2}"
        )));
    }
    Ok(())
}

/// Every root `(b, c)` with `b` on the first cotangent branch, admissible or not.
pub(crate) fn batman_roots(m1: f64, m2: f64, epsilon: f64) -> Result<Vec<BatmanProfile>> {
    validate_masses(m1, m2, epsilon)?;
    let s = epsilon.sqrt();
    let mut b_hi = PI * s;
    let equal = m1 == m2;
    if !equal {
        b_hi = b_hi.min(1.0);
    }
    let g = |b: f64| -> f64 {
        let c = if equal { Some(b) } else { c_of_b(b, m1, m2, epsilon) };
        match c {
            Some(c) => batman_residuals(b, c, m1, m2, epsilon).map_or(f64::NAN, |r| r.1),
            None => f64::NAN,
        }
    };
    let mut out = Vec::new();
    for b in all_roots(g, 0.0, b_hi, 400, 1e-16) {
        let c = if equal {
            b
        } else {
            match c_of_b(b, m1, m2, epsilon) {
                Some(c) => c,
                None => continue,
            }
        };
        let (b, c) = if equal {
            (b, c)
        } else {
            let opts = NewtonOptions {
                tol: 1e-13,
                ..NewtonOptions::default()
            };
            match newton::solve(
                |v| batman_residuals(v[0], v[1], m1, m2, epsilon).map(|r| vec![r.0, r.1]),
                &[b, c],
                opts,
            ) {
                Ok(rep) => (rep.x[0], rep.x[1]),
                Err(_) => (b, c),
            }
        };
        let (r1, r2) = batman_residuals(b, c, m1, m2, epsilon)?;
        out.push(BatmanProfile {
            m1,
            m2,
            epsilon,
            b,
            c,
            u_hat2: u_hat2(b, m1, m2, epsilon),
            r1: if equal { 0.0 } else { r1 },
            r2,
        });
    }
    Ok(out)
}

/// The admissible Batman profile for masses `m1 >= m2`.
pub fn solve_batman(m1: f64, m2: f64, epsilon: f64) -> Result<BatmanProfile> {
    let roots = batman_roots(m1, m2, epsilon)?;
    roots
        .into_iter()
        .find(|p| p.is_admissible())
        .ok_or_else(|| Error::NotFound(format!("no admissible Batman profile for m1 = {m1}, m2 = {m2}, eps = {epsilon}")))
}

impl BatmanProfile {
    /// `eta` at the edge of the coexistence region; its minimum over the support.
    pub fn eta_at_b(&self) -> f64 {
        0.5 * self.u_hat2 * (self.b / self.epsilon.sqrt()).cos() - 0.5 * self.m1
    }

    pub fn is_admissible(&self) -> bool {
        self.u_hat2 > 0.0 && self.eta_at_b() >= -1e-12 && self.c >= self.b
    }

    /// `sigma(b+) - sigma(b-)`.
    pub fn sum_jump_at_b(&self) -> f64 {
        let (m1, m2, eps) = (self.m1, self.m2, self.epsilon);
        let inner = self.u_hat2 * (self.b / eps.sqrt()).cos() - 0.5 * (m1 + m2);
        let outer = (self.c - self.b) * (0.5 * m1 * (self.b + self.c) + m2) / eps;
        outer - inner
    }

    /// Velocity of `eta` at `x = c` when a vanishing corner is attached there.
    pub fn eta_velocity_at_c(&self) -> f64 {
        (self.m1 - self.m2) * (self.c - 1.0)
    }
}

impl Profile for BatmanProfile {
    fn family(&self) -> &'static str {
        "batman"
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        let (m1, m2, eps) = (self.m1, self.m2, self.epsilon);
        let ax = x.abs();
        if ax <= self.b {
            let k = 0.5 * self.u_hat2 * (x / eps.sqrt()).cos();
            ((k - 0.5 * m2).max(0.0), (k - 0.5 * m1).max(0.0))
        } else if ax <= self.c {
            let r = (self.c - ax) * (0.5 * m1 * (ax + self.c) + m2) / eps;
            (r.max(0.0), 0.0)
        } else {
            (0.0, 0.0)
        }
    }

    fn supports(&self) -> Supports {
        let rho = vec![(-self.c, self.c)];
        let eta = vec![(-self.b, self.b)];
        Supports { rho, eta }
    }

    fn masses(&self) -> (f64, f64) {
        (self.m1, self.m2)
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![-self.c, -self.b, self.b, self.c]
    }

    fn document(&self) -> ProfileDocument {
        ProfileDocument::new("batman", self.supports(), 0.0)
            .param("m1", self.m1)
            .param("m2", self.m2)
            .param("epsilon", self.epsilon)
            .param("b", self.b)
            .param("c", self.c)
            .amplitude("u_hat2", self.u_hat2)
            .residual("r1", self.r1)
            .residual("r2", self.r2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_piecewise;

    #[test]
    fn fig_parameters_solve_to_tight_residuals() {
        let p = solve_batman(0.6, 0.1, 0.12).unwrap();
        assert!(p.r1.abs() < 1e-10 && p.r2.abs() < 1e-10, "{p:?}");
        assert!((p.b - 0.1272936491).abs() < 1e-8, "{}", p.b);
        assert!((p.c - 0.5228788679).abs() < 1e-8, "{}", p.c);
        let (r1, r2) = batman_residuals(p.b, p.c, 0.6, 0.1, 0.12).unwrap();
        assert!(r1.abs() < 1e-10 && r2.abs() < 1e-10);
    }

    #[test]
    fn equal_masses_overlap_completely() {
        let p = solve_batman(1.0, 1.0, 1.0).unwrap();
        assert!((p.b - p.c).abs() < 1e-10);
        assert!((p.b - 1.132).abs() < 1e-3);
        let (r, e) = p.eval(0.0);
        assert!((r - (0.5 * p.u_hat2 - 0.5)).abs() < 1e-14 && r > 0.0);
        assert_eq!(r, e);
        assert_eq!(batman_residuals(0.7, 0.7, 1.0, 1.0, 0.3).unwrap().0, 0.0);
    }

    #[test]
    fn heavier_eta_is_rejected() {
        assert!(matches!(solve_batman(1.0, 2.0, 0.5), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn pole_is_reported() {
        let eps: f64 = 0.25;
        assert!(matches!(batman_residuals(PI * eps.sqrt(), 2.0, 0.6, 0.1, eps), Err(Error::Pole(_))));
    }

    #[test]
    fn off_locus_point_has_nonzero_residual() {
        let (r1, r2) = batman_residuals(0.2, 0.9, 0.6, 0.1, 0.12).unwrap();
        assert!(r1.abs() > 1e-3 || r2.abs() > 1e-3);
    }

    #[test]
    fn admissible_root_is_chosen_and_missing_root_reported() {
        let p = solve_batman(0.6, 0.1, 1.0).unwrap();
        assert!((p.b - 0.547).abs() < 2e-3, "{}", p.b);
        assert!(p.eta_at_b() > 0.0);
        assert!(matches!(solve_batman(0.6, 0.1, 3.0), Err(Error::NotFound(_))));
    }

    #[test]
    fn profile_closes_masses_and_sum_is_continuous() {
        for &(m1, m2, eps) in &[(0.6, 0.1, 0.12), (1.0, 1.0, 1.0), (0.6, 0.1, 0.5), (1.5, 1.0, 0.01)] {
            let p = solve_batman(m1, m2, eps).unwrap();
            let br = p.breakpoints();
            let rho = integrate_piecewise(|x| p.eval(x).0, -p.c - 1.0, p.c + 1.0, &br, 1e-13);
            let eta = integrate_piecewise(|x| p.eval(x).1, -p.c - 1.0, p.c + 1.0, &br, 1e-13);
            assert!((rho - m1).abs() < 1e-8, "{rho} vs {m1}");
            assert!((eta - m2).abs() < 1e-8, "{eta} vs {m2}");
            let first = integrate_piecewise(|x| x * p.eval(x).0, -p.c, p.c, &br, 1e-13);
            assert!(first.abs() < 1e-10);
            assert!(p.sum_jump_at_b().abs() < 1e-12, "{}", p.sum_jump_at_b());
            assert_eq!(p.eval(p.c).0, 0.0);
            assert_eq!(p.eval(0.3), p.eval(-0.3));
        }
    }
}
