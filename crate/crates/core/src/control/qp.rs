//! Dense convex QP `min ½xᵀHx + fᵀx  s.t.  Mx ≤ γ` solved by projected coordinate descent on the dual.
//!
//! Rows with a finite multiplier cap are soft: a cap of ρ is the dual of an L1 slack penalty ρ·σ.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QpError {
    #[error("Hessian is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch")]
    Dimensions,
    #[error("solver diverged")]
    Diverged,
}

#[derive(Debug, Clone)]
pub struct QpProblem {
    pub h: DMatrix<f64>,
    pub f: DVector<f64>,
    pub m: DMatrix<f64>,
    pub gamma: DVector<f64>,
    /// Multiplier cap per row; `f64::INFINITY` for hard rows.
    pub cap: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    pub multipliers: DVector<f64>,
    pub iterations: usize,
    /// Largest projected dual-gradient entry; zero at a KKT point.
    pub residual: f64,
    pub converged: bool,
    /// Dual objective after every sweep. Non-increasing.
    pub dual_objective: Vec<f64>,
}

pub fn solve_qp(p: &QpProblem, max_sweeps: usize, tol: f64) -> Result<QpSolution, QpError> {
    let n = p.h.nrows();
    let rows = p.m.nrows();
    if p.h.ncols() != n || p.f.len() != n || p.m.ncols() != n || p.gamma.len() != rows || p.cap.len() != rows {
        return Err(QpError::Dimensions);
    }
    let chol = p.h.clone().cholesky().ok_or(QpError::NotPositiveDefinite)?;
    let hinv_f = chol.solve(&p.f);
    if rows == 0 {
        return Ok(QpSolution {
            x: -hinv_f,
            multipliers: DVector::zeros(0),
            iterations: 0,
            residual: 0.0,
            converged: true,
            dual_objective: Vec::new(),
        });
    }
    let hinv_mt = chol.solve(&p.m.transpose());
    let k = &p.m * &hinv_mt;
    let d = &p.gamma + &p.m * &hinv_f;
    let mut mu = DVector::<f64>::zeros(rows);
    // Dual gradient K·μ + d, kept in sync with μ.
    let mut w = d.clone();
    let dual = |mu: &DVector<f64>, w: &DVector<f64>| 0.5 * mu.dot(&(w + &d));
    let projected_residual = |mu: &DVector<f64>, w: &DVector<f64>| {
        (0..rows)
            .map(|i| (mu[i] - (mu[i] - w[i]).clamp(0.0, p.cap[i])).abs())
            .fold(0.0, f64::max)
    };
    let mut trace = Vec::new();
    let mut residual = projected_residual(&mu, &w);
    let mut sweeps = 0;
    while residual >= tol && sweeps < max_sweeps {
        for i in 0..rows {
            let kii = k[(i, i)];
            if kii <= 1e-14 {
                continue;
            }
            let next = (mu[i] - w[i] / kii).clamp(0.0, p.cap[i]);
            let delta = next - mu[i];
            if delta != 0.0 {
                mu[i] = next;
                w.axpy(delta, &k.column(i), 1.0);
            }
        }
        sweeps += 1;
        trace.push(dual(&mu, &w));
        residual = projected_residual(&mu, &w);
        if !residual.is_finite() {
            return Err(QpError::Diverged);
        }
    }
    let x = -(hinv_f + hinv_mt * &mu);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(QpError::Diverged);
    }
    Ok(QpSolution {
        x,
        multipliers: mu,
        iterations: sweeps,
        residual,
        converged: residual < tol,
        dual_objective: trace,
    })
}
