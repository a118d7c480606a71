//! Godunov scheme with Roe linearization for the augmented system
//! `u_t + (h f_r(u) + (1-h) f_l(u))_x = 0`, `h_t = 0`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::fluxlang::FluxExpr;
use crate::problem::ProblemSetup;
use crate::{Error, Result};

const DEGENERATE: f64 = 1e-12;
const MIN_SPEED: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridState {
    pub x0: f64,
    pub dx: f64,
    pub u: Vec<f64>,
    pub h: Vec<f64>,
    pub t: f64,
}

impl GridState {
    pub fn new(x0: f64, dx: f64, u: Vec<f64>, h: Vec<f64>, t: f64) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite() && x0.is_finite() && t >= 0.0) {
            return Err(Error::invalid("grid needs finite x0, dx > 0 and t >= 0"));
        }
        if u.len() != h.len() || u.len() < 4 {
            return Err(Error::invalid(format!(
                "u and h must have equal length >= 4, got {} and {}",
                u.len(),
                h.len()
            )));
        }
        let heaviside = h.iter().all(|&v| v == 0.0 || v == 1.0) && h.windows(2).all(|w| w[0] <= w[1]);
        if !heaviside {
            return Err(Error::invalid("h must be a non-decreasing 0/1 step"));
        }
        Ok(GridState { x0, dx, u, h, t })
    }

    /// Riemann data on `[x_min, x_max]`: `u_l`, `h = 0` for centres left of
    /// the origin, `u_r`, `h = 1` otherwise.
    pub fn riemann(x_min: f64, x_max: f64, dx: f64, u_l: f64, u_r: f64) -> Result<Self> {
        if !(x_min < 0.0 && x_max > 0.0) {
            return Err(Error::invalid(format!(
                "x-domain [{x_min}, {x_max}] must contain the interface x = 0"
            )));
        }
        let width = x_max - x_min;
        let n = (width / dx).round();
        if !(dx > 0.0) || (n * dx - width).abs() > 1e-9 * width || n < 4.0 {
            return Err(Error::invalid(format!(
                "dx = {dx} must divide [{x_min}, {x_max}] into at least 4 cells"
            )));
        }
        let n = n as usize;
        let mut u = Vec::with_capacity(n);
        let mut h = Vec::with_capacity(n);
        for j in 0..n {
            let x = x_min + (j as f64 + 0.5) * dx;
            let left = x < 0.0;
            u.push(if left { u_l } else { u_r });
            h.push(if left { 0.0 } else { 1.0 });
        }
        GridState::new(x_min, dx, u, h, 0.0)
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + (j as f64 + 0.5) * self.dx
    }

    /// CSV with header `x,u,h,t`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,u,h,t\n");
        for j in 0..self.len() {
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.x(j),
                self.u[j],
                self.h[j],
                self.t
            );
        }
        s
    }
}

/// Interface matrix `[[γ, ρ], [0, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoeMatrix {
    pub gamma: f64,
    pub rho: f64,
}

fn big_f(f_l: &FluxExpr, f_r: &FluxExpr, u: f64, h: f64) -> Result<f64> {
    Ok(h * f_r.eval(u)? + (1.0 - h) * f_l.eval(u)?)
}

/// Split divided differences: `γ` across `u` at the left `h`, `ρ` across
/// `h` at the right `u`, so that `γΔu + ρΔh = ΔF` exactly.
pub fn roe_matrix(u_l: f64, h_l: f64, u_r: f64, h_r: f64, f_l: &FluxExpr, f_r: &FluxExpr) -> Result<RoeMatrix> {
    let gamma = if (u_r - u_l).abs() > DEGENERATE {
        (big_f(f_l, f_r, u_r, h_l)? - big_f(f_l, f_r, u_l, h_l)?) / (u_r - u_l)
    } else {
        h_l * f_r.derivative(u_l)? + (1.0 - h_l) * f_l.derivative(u_l)?
    };
    let rho = if (h_r - h_l).abs() > DEGENERATE {
        (big_f(f_l, f_r, u_r, h_r)? - big_f(f_l, f_r, u_r, h_l)?) / (h_r - h_l)
    } else {
        f_r.eval(u_r)? - f_l.eval(u_r)?
    };
    Ok(RoeMatrix { gamma, rho })
}

/// First rows `(γ±, ρ±)` of `Â±`; second rows are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Split {
    pub plus: [f64; 2],
    pub minus: [f64; 2],
}

/// Eigen-splitting of `Â`. For `|γ| < δ` the magnitude of `γ` is replaced
/// by `(γ²/δ + δ)/2`; `ρ` is shared in proportion to `|γ±|`, so the two
/// parts always add up to `Â` except when `γ = δ = 0`.
pub fn split(m: RoeMatrix, entropy_delta: f64) -> Split {
    let g = m.gamma;
    let mag = if g.abs() < entropy_delta {
        0.5 * (g * g / entropy_delta + entropy_delta)
    } else {
        g.abs()
    };
    if mag == 0.0 {
        return Split {
            plus: [0.0, 0.0],
            minus: [0.0, 0.0],
        };
    }
    if g.abs() >= entropy_delta {
        let (full, zero) = ([g, m.rho], [0.0, 0.0]);
        return if g > 0.0 {
            Split { plus: full, minus: zero }
        } else {
            Split { plus: zero, minus: full }
        };
    }
    let (gp, gm) = (0.5 * (g + mag), 0.5 * (g - mag));
    Split {
        plus: [gp, m.rho * gp / mag],
        minus: [gm, -m.rho * gm / mag],
    }
}

fn interfaces(s: &GridState, f_l: &FluxExpr, f_r: &FluxExpr) -> Result<Vec<RoeMatrix>> {
    (0..s.len() - 1)
        .map(|j| roe_matrix(s.u[j], s.h[j], s.u[j + 1], s.h[j + 1], f_l, f_r))
        .collect()
}

fn max_speed(ms: &[RoeMatrix]) -> f64 {
    ms.iter().fold(0.0_f64, |a, m| a.max(m.gamma.abs()))
}

fn apply(s: &GridState, ms: &[RoeMatrix], dt: f64, entropy_delta: f64) -> Result<GridState> {
    let n = s.len();
    // fluctuations entering cell j from its right (A⁻Δv) and left (A⁺Δv)
    let mut from_right = vec![[0.0; 2]; n];
    let mut from_left = vec![[0.0; 2]; n];
    for (k, m) in ms.iter().enumerate() {
        let du = s.u[k + 1] - s.u[k];
        let dh = s.h[k + 1] - s.h[k];
        let sp = split(*m, entropy_delta);
        from_right[k] = [sp.minus[0] * du + sp.minus[1] * dh, 0.0];
        from_left[k + 1] = [sp.plus[0] * du + sp.plus[1] * dh, 0.0];
    }
    let c = dt / s.dx;
    let t = s.t + dt;
    let mut u = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    for j in 0..n {
        let v = s.u[j] - c * (from_right[j][0] + from_left[j][0]);
        if !v.is_finite() {
            return Err(Error::NonFinite { cell: j, t });
        }
        u.push(v);
        h.push(s.h[j] - c * (from_right[j][1] + from_left[j][1]));
    }
    Ok(GridState {
        x0: s.x0,
        dx: s.dx,
        u,
        h,
        t,
    })
}

/// One Godunov step with outflow boundaries.
pub fn step(s: &GridState, dt: f64, f_l: &FluxExpr, f_r: &FluxExpr, entropy_delta: f64) -> Result<GridState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    let ms = interfaces(s, f_l, f_r)?;
    let speed = max_speed(&ms);
    let courant = dt * speed / s.dx;
    if courant > 1.0 + 1e-12 {
        return Err(Error::Cfl {
            courant,
            max_speed: speed,
        });
    }
    apply(s, &ms, dt, entropy_delta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationParams {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub t_end: f64,
    pub cfl: f64,
    pub snapshot_times: Vec<f64>,
    pub entropy_delta: f64,
}

impl Default for SimulationParams {
    fn default() -> Self {
        SimulationParams {
            x_min: -1.0,
            x_max: 1.0,
            dx: 0.01,
            t_end: 1.0,
            cfl: 0.9,
            snapshot_times: Vec::new(),
            entropy_delta: 0.0,
        }
    }
}

impl SimulationParams {
    /// Requested output times in increasing order, always ending at
    /// `t_end`.
    pub fn output_times(&self) -> Result<Vec<f64>> {
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::invalid(format!("cfl must be in (0, 1], got {}", self.cfl)));
        }
        if !(self.entropy_delta >= 0.0 && self.entropy_delta.is_finite()) {
            return Err(Error::invalid("entropy_delta must be >= 0"));
        }
        let mut ts = Vec::with_capacity(self.snapshot_times.len() + 1);
        for &t in &self.snapshot_times {
            if !(t >= 0.0 && t <= self.t_end) {
                return Err(Error::invalid(format!(
                    "snapshot time {t} is outside [0, {}]",
                    self.t_end
                )));
            }
            ts.push(t);
        }
        ts.push(self.t_end);
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        Ok(ts)
    }
}

/// Evolve the Riemann data of `setup` and return the state at each output
/// time.
pub fn run(setup: &ProblemSetup, params: &SimulationParams) -> Result<Vec<GridState>> {
    run_observed(setup, params, |_| {})
}

/// As [`run`], calling `on_step` with the initial state and after every
/// time step.
pub fn run_observed(
    setup: &ProblemSetup,
    params: &SimulationParams,
    mut on_step: impl FnMut(&GridState),
) -> Result<Vec<GridState>> {
    let times = params.output_times()?;
    let (f_l, f_r) = (&setup.f_l, &setup.f_r);
    let mut state = GridState::riemann(params.x_min, params.x_max, params.dx, setup.u_l, setup.u_r)?;
    on_step(&state);
    let mut out = Vec::with_capacity(times.len());
    for target in times {
        while state.t < target {
            let ms = interfaces(&state, f_l, f_r)?;
            let mut dt = params.cfl * state.dx / max_speed(&ms).max(MIN_SPEED);
            let last = state.t + dt >= target;
            if last {
                dt = target - state.t;
            }
            state = apply(&state, &ms, dt, params.entropy_delta)?;
            if last {
                state.t = target;
            }
            on_step(&state);
        }
        out.push(state.clone());
    }
    Ok(out)
}
