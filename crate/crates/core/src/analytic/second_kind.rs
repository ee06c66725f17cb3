//! Symmetric attractive-attractive steady states in which part of the lighter
//! species sits in two corners `c < |x| < d` outside the wider species.
//!
//! Internally the wider (heavier) species is called `rho` with mass `m1` and
//! the cornered one `eta` with mass `m2`. When the caller's `m1 < m2` the two
//! are exchanged and the profile records `swapped = true`.

use super::batman::check_pole;
use super::{positive_finite, Profile, ProfileDocument, Supports};
use crate::error::{invalid, Error, Result};
use crate::newton::{self, NewtonOptions};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondKindResiduals {
    /// Corner mass, middle mass, mass of the wide species, sum continuity at `b`.
    pub residuals: [f64; 4],
    /// Sum continuity at `c`; not imposed.
    pub continuity_check_at_c: f64,
}

impl SecondKindResiduals {
    pub fn max_abs(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondKindProfile {
    /// Masses as requested by the caller.
    pub m1: f64,
    pub m2: f64,
    pub epsilon: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Cosine amplitude on `[-b, b]`.
    pub big_b: f64,
    /// Fraction of the cornered species' mass in the two corners.
    pub p: f64,
    pub residuals: [f64; 4],
    pub continuity_check_at_c: f64,
    pub swapped: bool,
}

#[derive(Debug, Clone, Copy)]
struct Canon {
    m1: f64,
    m2: f64,
    eps: f64,
    s: f64,
}

impl Canon {
    fn new(m1: f64, m2: f64, eps: f64) -> (Self, bool) {
        let swapped = m1 < m2;
        let (w, n) = if swapped { (m2, m1) } else { (m1, m2) };
        (
            Canon {
                m1: w,
                m2: n,
                eps,
                s: eps.sqrt(),
            },
            swapped,
        )
    }

    fn residuals(&self, b: f64, c: f64, d: f64, big_b: f64, p: f64) -> Result<SecondKindResiduals> {
        if !(b > 0.0 && c >= b && d >= c) {
            return Err(invalid(format!("need 0 < b <= c <= d, got {b}, {c}, {d}")));
        }
        if !p.is_finite() || !big_b.is_finite() {
            return Err(invalid("non-finite p or B"));
        }
        let t = check_pole(b, self.eps)?;
        let Canon { m1, m2, eps, s } = *self;
        let w = c - b;
        let k = 0.5 * m2 * (d * d - c * c) + m1 * (d - c);
        let wing = (k * w + 0.5 * m1 * (c * c * w - (c * c * c - b * b * b) / 3.0) + (1.0 - p) * m2 * w * w / 2.0) / eps;
        let rho_mass = 2.0 * wing + s * big_b * t.sin() - m2 * b;
        let sd = d - c;
        let corner = sd * sd * (m2 * (2.0 * d + c) / 3.0 + m1) / (2.0 * eps);
        let rho_r_b = (k + 0.5 * m1 * (c * c - b * b) + (1.0 - p) * m2 * w) / eps;
        let sigma_in = big_b * t.cos() - 0.5 * (m1 + m2);
        let eta_r_c = (0.5 * m2 * (d * d - c * c) + m1 * (d - c)) / eps;
        let rho_r_c = k / eps;
        Ok(SecondKindResiduals {
            residuals: [
                p * m2 - 2.0 * corner,
                (1.0 - p) * m2 - (s * big_b * t.sin() - m1 * b),
                3.0 * eps * (m1 - rho_mass),
                2.0 * eps * (rho_r_b - sigma_in),
            ],
            continuity_check_at_c: rho_r_c - eta_r_c,
        })
    }

    /// Corner width `d - c` carrying corner mass `p m2`.
    fn corner_width(&self, c: f64, p: f64) -> f64 {
        let Canon { m1, m2, eps, .. } = *self;
        if p <= 0.0 {
            return 0.0;
        }
        let target = eps * p * m2;
        let a2 = m2 * c + m1;
        let a3 = 2.0 * m2 / 3.0;
        let mut x = (target / a2).sqrt();
        for _ in 0..100 {
            let f = (a3 * x + a2) * x * x - target;
            let df = (3.0 * a3 * x + 2.0 * a2) * x;
            let nx = x - f / df;
            if !(nx > 0.0) {
                x *= 0.5;
                continue;
            }
            if (nx - x).abs() <= 1e-16 * x {
                x = nx;
                break;
            }
            x = nx;
        }
        x
    }

    fn amplitude(&self, b: f64, p: f64) -> f64 {
        ((1.0 - p) * self.m2 + self.m1 * b) / (self.s * (b / self.s).sin())
    }

    /// The two unimposed-by-construction residuals with `d` and `B` eliminated.
    fn reduced(&self, b: f64, c: f64, p: f64) -> Result<[f64; 2]> {
        let d = c + self.corner_width(c, p);
        let r = self.residuals(b, c, d, self.amplitude(b, p), p)?;
        Ok([r.residuals[2], r.residuals[3]])
    }

    fn eta_at_b(&self, b: f64, big_b: f64) -> f64 {
        0.5 * big_b * (b / self.s).cos() - 0.5 * self.m1
    }

    fn u2_at_c(&self, c: f64, p: f64) -> f64 {
        (1.0 - p) * self.m2 - self.m1 + (self.m1 - self.m2) * c
    }

    fn profile(&self, x: &[f64; 5], m1: f64, m2: f64, swapped: bool) -> Result<SecondKindProfile> {
        let [b, c, d, big_b, p] = *x;
        let r = self.residuals(b, c, d, big_b, p)?;
        Ok(SecondKindProfile {
            m1,
            m2,
            epsilon: self.eps,
            b,
            c,
            d,
            big_b,
            p,
            residuals: r.residuals,
            continuity_check_at_c: r.continuity_check_at_c,
            swapped,
        })
    }

    /// Polishes `(b, c, d, B)` at fixed `p`.
    fn polish(&self, b: f64, c: f64, d: f64, big_b: f64, p: f64) -> Result<[f64; 5]> {
        let rep = newton::solve(
            |v| self.residuals(v[0], v[1], v[2], v[3], p).map(|r| r.residuals.to_vec()),
            &[b, c, d, big_b],
            NewtonOptions {
                tol: 1e-13,
                ..NewtonOptions::default()
            },
        )?;
        Ok([rep.x[0], rep.x[1], rep.x[2], rep.x[3], p])
    }

    fn admissible(&self, x: &[f64; 5]) -> bool {
        let [b, c, d, big_b, p] = *x;
        big_b > 0.0
            && b > 0.0
            && b < PI * self.s
            && c > b
            && d >= c
            && (-1e-12..=1.0 + 1e-12).contains(&p)
            && self.eta_at_b(b, big_b) >= -1e-10
    }

    /// All roots at fixed `p` found from a residual sign scan over `(b, c)`.
    fn roots(&self, p: f64) -> Vec<[f64; 5]> {
        const NB: usize = 200;
        const NC: usize = 200;
        let b_hi = PI * self.s;
        let w_hi = 2.0f64.max(3.0 * self.s);
        let bs: Vec<f64> = (0..NB).map(|i| b_hi * (i as f64 + 0.5) / NB as f64).collect();
        let ws: Vec<f64> = (0..NC).map(|j| w_hi * (j as f64 + 0.5) / NC as f64).collect();
        let mut grid = vec![[f64::NAN; 2]; NB * NC];
        for (i, &b) in bs.iter().enumerate() {
            for (j, &w) in ws.iter().enumerate() {
                if let Ok(r) = self.reduced(b, b + w, p) {
                    grid[i * NC + j] = r;
                }
            }
        }
        let mut out: Vec<[f64; 5]> = Vec::new();
        for i in 0..NB - 1 {
            for j in 0..NC - 1 {
                let q = [grid[i * NC + j], grid[i * NC + j + 1], grid[(i + 1) * NC + j], grid[(i + 1) * NC + j + 1]];
                if q.iter().any(|r| !r[0].is_finite() || !r[1].is_finite()) {
                    continue;
                }
                let changes = |k: usize| {
                    let lo = q.iter().map(|r| r[k]).fold(f64::INFINITY, f64::min);
                    let hi = q.iter().map(|r| r[k]).fold(f64::NEG_INFINITY, f64::max);
                    lo <= 0.0 && hi >= 0.0
                };
                if !(changes(0) && changes(1)) {
                    continue;
                }
                let b0 = 0.5 * (bs[i] + bs[i + 1]);
                let c0 = b0 + 0.5 * (ws[j] + ws[j + 1]);
                let Ok(rep) = newton::solve(
                    |v| self.reduced(v[0], v[1], p).map(|r| r.to_vec()),
                    &[b0, c0],
                    NewtonOptions {
                        tol: 1e-13,
                        ..NewtonOptions::default()
                    },
                ) else {
                    continue;
                };
                let (b, c) = (rep.x[0], rep.x[1]);
                if out.iter().any(|o| (o[0] - b).abs() < 1e-8 && (o[1] - c).abs() < 1e-8) {
                    continue;
                }
                let d = c + self.corner_width(c, p);
                let big_b = self.amplitude(b, p);
                let x = self.polish(b, c, d, big_b, p).unwrap_or([b, c, d, big_b, p]);
                out.push(x);
            }
        }
        out.sort_by(|a, b| a[0].total_cmp(&b[0]));
        out
    }

    /// Solves the four conditions plus `extra = 0` for `(b, c, d, B, p)`.
    fn extended(&self, seed: &[f64; 5], extra: impl Fn(&Canon, &[f64]) -> f64) -> Result<[f64; 5]> {
        let rep = newton::solve(
            |v| {
                let r = self.residuals(v[0], v[1], v[2], v[3], v[4])?;
                let mut out = r.residuals.to_vec();
                out.push(extra(self, v));
                Ok(out)
            },
            seed,
            NewtonOptions {
                tol: 1e-13,
                ..NewtonOptions::default()
            },
        )?;
        Ok([rep.x[0], rep.x[1], rep.x[2], rep.x[3], rep.x[4]])
    }
}

fn validate(p: f64, m1: f64, m2: f64, eps: f64) -> Result<()> {
    positive_finite("m1", m1)?;
    positive_finite("m2", m2)?;
    positive_finite("epsilon", eps)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("corner fraction p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// Residuals of the four imposed conditions and the continuity check at `c`,
/// with `rho` the wide species of mass `m1` and `eta` the cornered one.
#[allow(clippy::too_many_arguments)]
pub fn second_kind_residuals(
    b: f64,
    c: f64,
    d: f64,
    big_b: f64,
    p: f64,
    m1: f64,
    m2: f64,
    epsilon: f64,
) -> Result<SecondKindResiduals> {
    let canon = Canon {
        m1,
        m2,
        eps: epsilon,
        s: epsilon.sqrt(),
    };
    canon.residuals(b, c, d, big_b, p)
}

/// The admissible profile with corner fraction `p`.
pub fn solve_second_kind(p: f64, m1: f64, m2: f64, epsilon: f64) -> Result<SecondKindProfile> {
    validate(p, m1, m2, epsilon)?;
    let (canon, swapped) = Canon::new(m1, m2, epsilon);
    let roots = canon.roots(p);
    if let Some(x) = roots.iter().find(|x| canon.admissible(x)) {
        return canon.profile(x, m1, m2, swapped);
    }
    // At the lower envelope the two branches meet in a double root that a sign scan cannot see.
    if let Ok(env) = envelope_range(m1, m2, epsilon) {
        if (env.p_min - p).abs() <= 1e-9 {
            return Ok(env.lower);
        }
    }
    Err(Error::NotFound(format!(
        "no admissible second-kind profile for p = {p}, m1 = {m1}, m2 = {m2}, eps = {epsilon}"
    )))
}

impl SecondKindProfile {
    fn canon(&self) -> Canon {
        Canon::new(self.m1, self.m2, self.epsilon).0
    }

    /// Cornered species at `x = b`, the lower-envelope quantity.
    pub fn eta_at_b(&self) -> f64 {
        self.canon().eta_at_b(self.b, self.big_b)
    }

    /// Velocity of the cornered species just inside `c`, the upper-envelope quantity.
    pub fn u2_at_c(&self) -> f64 {
        self.canon().u2_at_c(self.c, self.p)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// `(wide, cornered)` densities at `x`.
    fn eval_canonical(&self, x: f64) -> (f64, f64) {
        let Canon { m1, m2, eps, s } = self.canon();
        let ax = x.abs();
        let (b, c, d, p) = (self.b, self.c, self.d, self.p);
        if ax <= b {
            let k = 0.5 * self.big_b * (x / s).cos();
            ((k - 0.5 * m2).max(0.0), (k - 0.5 * m1).max(0.0))
        } else if ax <= c {
            let k = 0.5 * m2 * (d * d - c * c) + m1 * (d - c);
            let r = (k + 0.5 * m1 * (c - ax) * (c + ax) + (1.0 - p) * m2 * (c - ax)) / eps;
            (r.max(0.0), 0.0)
        } else if ax <= d {
            let e = (d - ax) * (0.5 * m2 * (d + ax) + m1) / eps;
            (0.0, e.max(0.0))
        } else {
            (0.0, 0.0)
        }
    }
}

impl Profile for SecondKindProfile {
    fn family(&self) -> &'static str {
        "second_kind"
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        let (w, n) = self.eval_canonical(x);
        if self.swapped {
            (n, w)
        } else {
            (w, n)
        }
    }

    fn supports(&self) -> Supports {
        let wide = vec![(-self.c, self.c)];
        let mut corner = vec![(-self.b, self.b)];
        if self.d > self.c {
            corner.insert(0, (-self.d, -self.c));
            corner.push((self.c, self.d));
        }
        if self.swapped {
            Supports { rho: corner, eta: wide }
        } else {
            Supports { rho: wide, eta: corner }
        }
    }

    fn masses(&self) -> (f64, f64) {
        (self.m1, self.m2)
    }

    fn document(&self) -> ProfileDocument {
        ProfileDocument::new("second_kind", self.supports(), 0.0)
            .param("m1", self.m1)
            .param("m2", self.m2)
            .param("epsilon", self.epsilon)
            .param("p", self.p)
            .param("b", self.b)
            .param("c", self.c)
            .param("d", self.d)
            .param("swapped", if self.swapped { 1.0 } else { 0.0 })
            .amplitude("B", self.big_b)
            .residual("corner_mass", self.residuals[0])
            .residual("middle_mass", self.residuals[1])
            .residual("wide_mass", self.residuals[2])
            .residual("sum_continuity_b", self.residuals[3])
            .residual("sum_continuity_c", self.continuity_check_at_c)
    }
}

/// Admissible corner fractions at one `eps`, with the two boundary profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRange {
    pub epsilon: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub lower: SecondKindProfile,
    pub upper: SecondKindProfile,
}

/// Lower envelope: the cornered species vanishes at `x = b` (clamped at `p = 0`).
/// Upper envelope: its velocity at `x = c` vanishes (clamped at `p = 1`).
pub fn envelope_range(m1: f64, m2: f64, epsilon: f64) -> Result<EnvelopeRange> {
    validate(0.0, m1, m2, epsilon)?;
    let (canon, swapped) = Canon::new(m1, m2, epsilon);
    let empty = || Error::NotFound(format!("no second-kind window for m1 = {m1}, m2 = {m2}, eps = {epsilon}"));
    if canon.m1 == canon.m2 {
        // With equal masses the corner velocity is -p m2, never positive.
        return Err(empty());
    }
    const STEPS: usize = 40;
    let mut found: Vec<[f64; 5]> = Vec::new();
    let mut prev: Option<[f64; 5]> = None;
    for k in 0..=STEPS {
        let p = k as f64 / STEPS as f64;
        let cont = prev.and_then(|x| canon.polish(x[0], x[1], x[2], x[3], p).ok()).filter(|x| canon.admissible(x));
        let x = match cont {
            Some(x) => Some(x),
            None => canon.roots(p).into_iter().find(|x| canon.admissible(x)),
        };
        if let Some(x) = x {
            found.push(x);
        }
        prev = x;
    }
    let first = *found.first().ok_or_else(empty)?;
    let lower = if first[4] == 0.0 {
        first
    } else {
        let x = canon.extended(&first, |c, v| c.eta_at_b(v[0], v[3]))?;
        if !(x[4] >= 0.0 && x[4] <= first[4] + 1e-9) {
            return Err(Error::NotFound(format!("lower envelope solve left the family at p = {}", x[4])));
        }
        x
    };
    if canon.u2_at_c(first[1], first[4]) < 0.0 {
        return Err(empty());
    }
    let mut seed = first;
    let mut crossed = false;
    for w in found.windows(2) {
        let contiguous = w[1][4] - w[0][4] < 1.5 / STEPS as f64;
        if !contiguous || canon.u2_at_c(w[1][1], w[1][4]) < 0.0 {
            seed = w[0];
            crossed = true;
            break;
        }
        seed = w[1];
    }
    let upper = if crossed || seed[4] < 1.0 {
        let x = canon.extended(&seed, |c, v| c.u2_at_c(v[1], v[4]))?;
        if !canon.admissible(&x) {
            return Err(Error::NotFound(format!("upper envelope solve left the admissible branch at p = {}", x[4])));
        }
        x
    } else {
        seed
    };
    if upper[4] + 1e-12 < lower[4] {
        return Err(empty());
    }
    Ok(EnvelopeRange {
        epsilon,
        p_min: lower[4],
        p_max: upper[4],
        lower: canon.profile(&lower, m1, m2, swapped)?,
        upper: canon.profile(&upper, m1, m2, swapped)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationScan {
    pub m1: f64,
    pub m2: f64,
    pub eps_grid: Vec<f64>,
    pub batman_exists: Vec<bool>,
    pub second_kind_exists: Vec<bool>,
    pub p_min: Vec<Option<f64>>,
    pub p_max: Vec<Option<f64>>,
    /// Smallest `eps` with a second-kind profile carrying corner mass.
    pub eps1: Option<f64>,
    /// Largest `eps` with an admissible Batman profile.
    pub eps2: Option<f64>,
}

fn batman_flag(m1: f64, m2: f64, eps: f64) -> bool {
    let (w, n) = if m1 < m2 { (m2, m1) } else { (m1, m2) };
    super::solve_batman(w, n, eps).is_ok()
}

fn second_kind_flag(m1: f64, m2: f64, eps: f64) -> Option<EnvelopeRange> {
    envelope_range(m1, m2, eps).ok().filter(|e| e.p_max > 0.0)
}

/// Bisects a flag change between `lo` and `hi` down to `tol`.
fn refine(mut lo: f64, mut hi: f64, tol: f64, flag: impl Fn(f64) -> bool) -> (f64, f64) {
    let at_lo = flag(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if flag(mid) == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Existence of Batman and second-kind profiles over an `eps` grid.
pub fn bifurcation_scan(m1: f64, m2: f64, eps_range: (f64, f64), steps: usize) -> Result<BifurcationScan> {
    let (lo, hi) = eps_range;
    positive_finite("eps_range start", lo)?;
    if !(hi.is_finite() && hi >= lo) || steps < 2 {
        return Err(invalid("eps_range must be increasing with at least two steps"));
    }
    positive_finite("m1", m1)?;
    positive_finite("m2", m2)?;
    let eps_grid: Vec<f64> = (0..steps)
        .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
        .collect();
    let mut batman_exists = Vec::with_capacity(steps);
    let mut second_kind_exists = Vec::with_capacity(steps);
    let mut p_min = Vec::with_capacity(steps);
    let mut p_max = Vec::with_capacity(steps);
    for &eps in &eps_grid {
        batman_exists.push(batman_flag(m1, m2, eps));
        let env = second_kind_flag(m1, m2, eps);
        second_kind_exists.push(env.is_some());
        p_min.push(env.as_ref().map(|e| e.p_min));
        p_max.push(env.as_ref().map(|e| e.p_max));
    }
    let h = (hi - lo) / (steps - 1) as f64;
    let tol = (h * 1e-3).max(1e-9);
    let eps1 = second_kind_exists.iter().position(|&f| f).map(|k| {
        if k == 0 {
            eps_grid[0]
        } else {
            refine(eps_grid[k - 1], eps_grid[k], tol, |e| second_kind_flag(m1, m2, e).is_some()).1
        }
    });
    let eps2 = batman_exists.iter().rposition(|&f| f).map(|k| {
        if k + 1 == steps {
            eps_grid[k]
        } else {
            refine(eps_grid[k], eps_grid[k + 1], tol, |e| batman_flag(m1, m2, e)).0
        }
    });
    Ok(BifurcationScan {
        m1,
        m2,
        eps_grid,
        batman_exists,
        second_kind_exists,
        p_min,
        p_max,
        eps1,
        eps2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{batman_residuals, solve_batman};
    use crate::quadrature::integrate_piecewise;

    #[test]
    fn degenerate_corner_reduces_to_batman() {
        let bp = solve_batman(0.6, 0.1, 0.12).unwrap();
        let r = second_kind_residuals(bp.b, bp.c, bp.c, bp.u_hat2, 0.0, 0.6, 0.1, 0.12).unwrap();
        let (r1, r2) = batman_residuals(bp.b, bp.c, 0.6, 0.1, 0.12).unwrap();
        let (g1, g2) = batman_residuals(0.3, 0.7, 0.6, 0.1, 0.12).unwrap();
        let rg = second_kind_residuals(0.3, 0.7, 0.7, crate::analytic::batman::u_hat2(0.3, 0.6, 0.1, 0.12), 0.0, 0.6, 0.1, 0.12)
            .unwrap();
        assert!((r.residuals[2] - r1).abs() < 1e-10 && (r.residuals[3] - r2).abs() < 1e-10);
        assert!((rg.residuals[2] - g1).abs() < 1e-10 && (rg.residuals[3] - g2).abs() < 1e-10);
        assert!(rg.residuals[0].abs() < 1e-15 && rg.residuals[1].abs() < 1e-15);
    }

    #[test]
    fn interior_fraction_solves_and_closes_masses() {
        let prof = solve_second_kind(0.4, 0.1, 0.6, 1.7).unwrap();
        assert!(prof.swapped);
        assert!(prof.max_residual() < 1e-10, "{prof:?}");
        assert!(prof.continuity_check_at_c.abs() < 1e-8);
        assert!(prof.b < prof.c && prof.c < prof.d);
        let br = prof.breakpoints();
        let l = prof.d + 1.0;
        let rho = integrate_piecewise(|x| prof.eval(x).0, -l, l, &br, 1e-13);
        let eta = integrate_piecewise(|x| prof.eval(x).1, -l, l, &br, 1e-13);
        assert!((rho - 0.1).abs() < 1e-8 && (eta - 0.6).abs() < 1e-8, "{rho} {eta}");
        let corner = integrate_piecewise(|x| prof.eval(x).0, prof.c, prof.d, &[], 1e-13);
        assert!((2.0 * corner - 0.4 * 0.1).abs() < 1e-9);
    }

    #[test]
    fn envelopes_at_large_eps() {
        let env = envelope_range(0.1, 0.6, 1.7).unwrap();
        assert!(0.0 < env.p_min && env.p_min < env.p_max && env.p_max < 1.0, "{} {}", env.p_min, env.p_max);
        assert!((env.p_min - 0.3005).abs() < 1e-3, "{}", env.p_min);
        assert!((env.p_max - 0.471280).abs() < 1e-5, "{}", env.p_max);
        assert!(env.lower.eta_at_b().abs() < 1e-10);
        assert!(env.upper.u2_at_c().abs() < 1e-8);
        assert!(env.lower.max_residual() < 1e-10 && env.upper.max_residual() < 1e-10);
        let at_min = solve_second_kind(env.p_min, 0.1, 0.6, 1.7).unwrap();
        assert!(at_min.max_residual() < 1e-10);
        // Outside the window the admissible branch breaks a constraint.
        if let Ok(p) = solve_second_kind((env.p_max + 0.1).min(1.0), 0.1, 0.6, 1.7) {
            assert!(p.u2_at_c() < 0.0);
        }
        assert!(solve_second_kind(env.p_min * 0.5, 0.1, 0.6, 1.7).is_err());
    }

    #[test]
    fn equal_masses_have_no_window() {
        assert!(envelope_range(1.0, 1.0, 1.0).is_err());
    }
}
