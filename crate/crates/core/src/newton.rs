//! Damped Newton iteration with a finite-difference Jacobian.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Converged once the residual max-norm drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative central-difference step.
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 80,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub x: Vec<f64>,
    pub residual: Vec<f64>,
    pub iterations: usize,
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `f(x) = 0` from `x0`.
///
/// `f` may return an error to signal that a trial point left its domain; the
/// step is then shortened.
pub fn solve<F>(mut f: F, x0: &[f64], opts: NewtonOptions) -> Result<NewtonReport>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = f(&x)?;
    if r.len() != n {
        return Err(crate::error::invalid("residual and unknown counts differ"));
    }
    let mut rn = norm_inf(&r);
    for iter in 0..opts.max_iter {
        if rn < opts.tol {
            return Ok(NewtonReport {
                x,
                residual: r,
                iterations: iter,
            });
        }
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let h = opts.fd_step * x[j].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let col = match (f(&xp), f(&xm)) {
                (Ok(rp), Ok(rm)) => rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>(),
                (Ok(rp), Err(_)) => rp.iter().zip(&r).map(|(a, b)| (a - b) / h).collect(),
                (Err(_), Ok(rm)) => r.iter().zip(&rm).map(|(a, b)| (a - b) / h).collect(),
                (Err(e), Err(_)) => return Err(e),
            };
            for i in 0..n {
                jac[(i, j)] = col[i];
            }
        }
        let rhs = DVector::from_iterator(n, r.iter().map(|v| -v));
        let delta = jac
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::NotFound("singular Jacobian in Newton iteration".into()))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a + lambda * d).collect();
            if let Ok(rt) = f(&trial) {
                let tn = norm_inf(&rt);
                if tn.is_finite() && (tn < rn || tn < opts.tol) {
                    x = trial;
                    r = rt;
                    rn = tn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            if rn < opts.tol * 1e2 {
                // Stalled at rounding level just above the target.
                break;
            }
            return Err(Error::NotFound(format!("Newton stalled at residual {rn:e}")));
        }
    }
    if rn < opts.tol {
        Ok(NewtonReport {
            x,
            residual: r,
            iterations: opts.max_iter,
        })
    } else {
        Err(Error::NotFound(format!("Newton did not converge, residual {rn:e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_nonlinear_system() {
        let rep = solve(
            |x| Ok(vec![x[0] * x[0] + x[1] * x[1] - 4.0, x[0] - x[1]]),
            &[1.0, 0.5],
            NewtonOptions::default(),
        )
        .unwrap();
        assert!((rep.x[0] - 2f64.sqrt()).abs() < 1e-12);
        assert!((rep.x[1] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn backs_off_from_domain_errors() {
        // sqrt(x) = 1 starting far right; full steps would go negative.
        let rep = solve(
            |x| {
                if x[0] < 0.0 {
                    Err(Error::InvalidArgument("negative".into()))
                } else {
                    Ok(vec![x[0].ln() ])
                }
            },
            &[8.0],
            NewtonOptions::default(),
        )
        .unwrap();
        assert!((rep.x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reports_failure_without_root() {
        assert!(solve(|x| Ok(vec![x[0] * x[0] + 1.0]), &[0.3], NewtonOptions::default()).is_err());
    }
}
