//! Condensed sequential QP: the input sequence is re-linearized around its own nonlinear rollout.

use nalgebra::{DMatrix, DVector, Matrix3x2, Matrix3xX};

use super::qp::{solve_qp, QpProblem};
use super::{linearize, step_dynamics, ControlError, ControlInput, MpcConfig, VehicleState};
use crate::geometry::{normalize_angle, Point2};
use crate::worldmodel::Obstacle;

#[derive(Debug, Clone, PartialEq)]
pub struct MpcSolution {
    /// First input of the optimized sequence, or a stop command after a failed solve.
    pub input: ControlInput,
    pub inputs: Vec<ControlInput>,
    /// Nonlinear rollout of `inputs` from the current state, `H + 1` states.
    pub predicted: Vec<VehicleState>,
    /// Dual sweeps summed over outer iterations.
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub safe_stop: bool,
    /// Dual objective per sweep of the final outer iteration.
    pub dual_objective: Vec<f64>,
}

impl MpcSolution {
    /// Warm start for the next tick: the tail of this sequence with the last input repeated.
    pub fn shifted_inputs(&self) -> Vec<ControlInput> {
        let mut out: Vec<ControlInput> = self.inputs.iter().skip(1).copied().collect();
        if let Some(last) = self.inputs.last() {
            out.push(*last);
        }
        out
    }
}

/// Inputs that reproduce the spacing and heading changes of a reference trajectory.
pub fn reference_inputs(s_star: &[VehicleState], dt: f64) -> Vec<ControlInput> {
    s_star
        .windows(2)
        .map(|w| {
            let v = w[0].position().distance(w[1].position()) / dt;
            let omega = normalize_angle(w[1].yaw - w[0].yaw) / dt;
            ControlInput::new(v, omega)
        })
        .collect()
}

pub fn rollout(state: &VehicleState, inputs: &[ControlInput], dt: f64) -> Vec<VehicleState> {
    let mut out = Vec::with_capacity(inputs.len() + 1);
    out.push(*state);
    for u in inputs {
        let next = step_dynamics(out.last().unwrap(), u, dt);
        out.push(next);
    }
    out
}

/// Tracks `s_star` (length `H + 1`) from `state` while keeping `d0` clearance from `obstacles`.
///
/// `warm` seeds the nominal sequence; the reference inputs are used without it.
pub fn solve_mpc(
    state: &VehicleState,
    s_star: &[VehicleState],
    obstacles: &[Obstacle],
    cfg: &MpcConfig,
    warm: Option<&[ControlInput]>,
) -> Result<MpcSolution, ControlError> {
    cfg.validate()?;
    let h_len = cfg.horizon;
    if s_star.len() != h_len + 1 {
        return Err(ControlError::ReferenceLength {
            got: s_star.len(),
            want: h_len + 1,
        });
    }
    let u_ref = reference_inputs(s_star, cfg.dt);
    let mut nominal: Vec<ControlInput> = match warm {
        Some(w) if w.len() == h_len => w.to_vec(),
        _ => u_ref.clone(),
    };
    for u in &mut nominal {
        *u = u.clamped(cfg);
    }

    let n = 2 * h_len;
    let mut iterations = 0;
    let mut residual = 0.0;
    let mut converged = true;
    let mut trace = Vec::new();
    for _ in 0..cfg.outer_iterations.max(1) {
        let states = rollout(state, &nominal, cfg.dt);
        let problem = build_qp(&states, &nominal, &u_ref, s_star, obstacles, cfg);
        let sol = match solve_qp(&problem, cfg.max_sweeps, cfg.tolerance) {
            Ok(s) => s,
            Err(e) => {
                log::warn!("MPC solve failed, stopping: {e}");
                return Ok(safe_stop(state, cfg, iterations));
            }
        };
        iterations += sol.iterations;
        residual = sol.residual;
        converged = sol.converged;
        trace = sol.dual_objective;
        for k in 0..h_len {
            nominal[k] = ControlInput::new(nominal[k].v + sol.x[2 * k], nominal[k].omega + sol.x[2 * k + 1]).clamped(cfg);
        }
        debug_assert_eq!(sol.x.len(), n);
    }
    let predicted = rollout(state, &nominal, cfg.dt);
    if predicted.iter().any(|s| !(s.x.is_finite() && s.y.is_finite() && s.yaw.is_finite())) {
        return Ok(safe_stop(state, cfg, iterations));
    }
    Ok(MpcSolution {
        input: nominal[0],
        inputs: nominal,
        predicted,
        iterations,
        residual,
        converged,
        safe_stop: false,
        dual_objective: trace,
    })
}

fn safe_stop(state: &VehicleState, cfg: &MpcConfig, iterations: usize) -> MpcSolution {
    let inputs = vec![ControlInput::STOP; cfg.horizon];
    MpcSolution {
        input: ControlInput::STOP,
        predicted: rollout(state, &inputs, cfg.dt),
        inputs,
        iterations,
        residual: f64::INFINITY,
        converged: false,
        safe_stop: true,
        dual_objective: Vec::new(),
    }
}

/// QP in the input correction `δU` around the nominal rollout `states`.
fn build_qp(
    states: &[VehicleState],
    nominal: &[ControlInput],
    u_ref: &[ControlInput],
    s_star: &[VehicleState],
    obstacles: &[Obstacle],
    cfg: &MpcConfig,
) -> QpProblem {
    let h_len = cfg.horizon;
    let n = 2 * h_len;
    let mut hess = DMatrix::<f64>::zeros(n, n);
    let mut grad = DVector::<f64>::zeros(n);

    // Position sensitivities J_h = ∂p_h/∂U, built by the recurrence S_{h+1} = A_h S_h + B_h E_h.
    let mut sens = Matrix3xX::<f64>::zeros(n);
    let mut jacobians = Vec::with_capacity(h_len);
    for h in 0..h_len {
        let (a, b, _) = linearize(&states[h], &nominal[h], cfg.dt);
        let mut next = a * &sens;
        add_block(&mut next, &b, 2 * h);
        sens = next;
        let j = sens.rows(0, 2).into_owned();
        let e = DVector::from_vec(vec![states[h + 1].x - s_star[h + 1].x, states[h + 1].y - s_star[h + 1].y]);
        let jt = j.transpose();
        hess += (&jt * &j) * (2.0 * cfg.w_s);
        grad += (&jt * e) * (2.0 * cfg.w_s);
        jacobians.push(j);
    }
    for k in 0..h_len {
        hess[(2 * k, 2 * k)] += 2.0 * cfg.lambda;
        hess[(2 * k + 1, 2 * k + 1)] += 2.0 * cfg.lambda;
        grad[2 * k] += 2.0 * cfg.lambda * (nominal[k].v - u_ref[k].v);
        grad[2 * k + 1] += 2.0 * cfg.lambda * (nominal[k].omega - u_ref[k].omega);
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut gamma = Vec::new();
    let mut cap = Vec::new();
    for k in 0..h_len {
        let bounds = [
            (2 * k, nominal[k].v, 0.0, cfg.v_max, TR_V),
            (2 * k + 1, nominal[k].omega, -cfg.omega_max, cfg.omega_max, TR_W),
        ];
        for (idx, value, lo, hi, tr) in bounds {
            let mut up = vec![0.0; n];
            up[idx] = 1.0;
            rows.push(up);
            gamma.push((hi - value).min(tr));
            cap.push(f64::INFINITY);
            let mut down = vec![0.0; n];
            down[idx] = -1.0;
            rows.push(down);
            gamma.push((value - lo).min(tr));
            cap.push(f64::INFINITY);
        }
    }
    // Constrain every predicted point and every segment midpoint; the first midpoint is the state
    // reached after one control tick at half the prediction step.
    let zero = DMatrix::<f64>::zeros(2, n);
    for h in 0..h_len {
        let prev = if h == 0 { &zero } else { &jacobians[h - 1] };
        let here = &jacobians[h];
        let mid_j = (prev + here) * 0.5;
        let (a, b) = (states[h].position(), states[h + 1].position());
        let mid_p = Point2::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y));
        for (p, j) in [(mid_p, &mid_j), (b, here)] {
            for o in obstacles {
                if p.distance(o.center) - o.radius > cfg.constraint_range {
                    continue;
                }
                let Some(normal) = unit(p, o.center) else { continue };
                let required = o.radius + cfg.r_v + cfg.d0 + cfg.margin;
                rows.push((0..n).map(|c| -(normal.x * j[(0, c)] + normal.y * j[(1, c)])).collect());
                gamma.push(normal.dot(Point2::new(p.x - o.center.x, p.y - o.center.y)) - required);
                cap.push(cfg.slack_weight);
            }
        }
    }
    let m = DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]);
    QpProblem {
        h: hess,
        f: grad,
        m,
        gamma: DVector::from_vec(gamma),
        cap,
    }
}

const TR_V: f64 = 1.0;
const TR_W: f64 = 0.3;

fn add_block(target: &mut Matrix3xX<f64>, b: &Matrix3x2<f64>, col: usize) {
    for r in 0..3 {
        for c in 0..2 {
            target[(r, col + c)] += b[(r, c)];
        }
    }
}

fn unit(p: Point2, c: Point2) -> Option<Point2> {
    let d = Point2::new(p.x - c.x, p.y - c.y);
    let len = d.norm();
    (len > 1e-9).then(|| Point2::new(d.x / len, d.y / len))
}
