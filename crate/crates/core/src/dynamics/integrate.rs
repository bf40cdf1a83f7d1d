//! Adaptive integration: Dormand–Prince 5(4) with dense output and stiffness
//! detection, and a three-stage Radau IIA (order 5) implicit method with
//! simplified Newton iterations and step-doubling error control. Explicit
//! runs switch to Radau when stiffness is detected or steps keep failing.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::kinetics::OdeSystem;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_time: f64,
    pub max_steps: usize,
    /// Start with the implicit method.
    pub stiff: bool,
    /// Allow the explicit method to hand over to the implicit one.
    pub fallback: bool,
    /// Max-norm above which a trajectory is declared unbounded.
    pub bound: f64,
    /// Stop once ‖F(x)‖∞ ≤ tol·(1 + ‖x‖∞) has held for `steady_window` time units.
    pub steady_tol: Option<f64>,
    pub steady_window: f64,
    /// Only record states with t ≥ this time (the final state is always kept).
    pub record_from: f64,
    /// Constant step size with no error control (order studies).
    pub fixed_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self::certification()
    }
}

impl IntegratorConfig {
    pub fn certification() -> Self {
        IntegratorConfig {
            rtol: 1e-8,
            atol: 1e-10,
            max_time: 1e3,
            max_steps: 2_000_000,
            stiff: false,
            fallback: true,
            bound: 1e6,
            steady_tol: None,
            steady_window: 0.0,
            record_from: 0.0,
            fixed_step: None,
        }
    }

    pub fn screening() -> Self {
        IntegratorConfig {
            rtol: 1e-6,
            atol: 1e-8,
            max_steps: 200_000,
            ..Self::certification()
        }
    }

    pub fn with_tolerances(self, rtol: f64, atol: f64) -> Self {
        IntegratorConfig { rtol, atol, ..self }
    }

    pub fn with_max_time(self, max_time: f64) -> Self {
        IntegratorConfig { max_time, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrajectoryStatus {
    Completed,
    /// Stopped early at an apparent equilibrium.
    SteadyState,
    Unbounded,
    StepLimit,
    /// Step size underflow, non-finite values or leaving the domain.
    Failed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub switched_to_implicit: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub status: TrajectoryStatus,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn last_state(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }

    pub fn last_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Dopri5,
    Radau5,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepError {
    StepLimit,
    Failed,
}

// Dormand–Prince coefficients (the system is autonomous, so the nodes are unused).
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct RadauTableau {
    a: [[f64; 3]; 3],
}

fn radau_tableau() -> RadauTableau {
    let s6 = 6f64.sqrt();
    RadauTableau {
        a: [
            [
                (88.0 - 7.0 * s6) / 360.0,
                (296.0 - 169.0 * s6) / 1800.0,
                (-2.0 + 3.0 * s6) / 225.0,
            ],
            [
                (296.0 + 169.0 * s6) / 1800.0,
                (88.0 + 7.0 * s6) / 360.0,
                (-2.0 - 3.0 * s6) / 225.0,
            ],
            [(16.0 - s6) / 36.0, (16.0 + s6) / 36.0, 1.0 / 9.0],
        ],
    }
}

enum Dense {
    None,
    Dopri([Vec<f64>; 5]),
    Hermite {
        x0: Vec<f64>,
        f0: Vec<f64>,
        x1: Vec<f64>,
        f1: Vec<f64>,
    },
}

/// Step-by-step integrator with dense output over the last accepted step.
pub struct Stepper<'a, S: OdeSystem + ?Sized> {
    sys: &'a S,
    cfg: IntegratorConfig,
    method: Method,
    n: usize,
    t: f64,
    x: Vec<f64>,
    f: Vec<f64>,
    h: f64,
    t_prev: f64,
    dense: Dense,
    stiff_hits: usize,
    nonstiff_hits: usize,
    failures_in_row: usize,
    pub stats: StepStats,
    tableau: RadauTableau,
    k: Vec<Vec<f64>>,
}

impl<'a, S: OdeSystem + ?Sized> Stepper<'a, S> {
    pub fn new(sys: &'a S, x0: &[f64], cfg: IntegratorConfig) -> Self {
        let n = sys.dim();
        let mut f = vec![0.0; n];
        sys.rhs(x0, &mut f);
        let method = if cfg.stiff {
            Method::Radau5
        } else {
            Method::Dopri5
        };
        let mut s = Stepper {
            sys,
            cfg,
            method,
            n,
            t: 0.0,
            x: x0.to_vec(),
            f,
            h: 0.0,
            t_prev: 0.0,
            dense: Dense::None,
            stiff_hits: 0,
            nonstiff_hits: 0,
            failures_in_row: 0,
            stats: StepStats::default(),
            tableau: radau_tableau(),
            k: vec![vec![0.0; n]; 7],
        };
        s.h = cfg.fixed_step.unwrap_or_else(|| s.initial_step());
        s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn t_prev(&self) -> f64 {
        self.t_prev
    }

    pub fn method(&self) -> Method {
        self.method
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.cfg.atol + self.cfg.rtol * a.abs().max(b.abs())
    }

    fn initial_step(&self) -> f64 {
        let n = self.n as f64;
        let d0 = (self
            .x
            .iter()
            .map(|&v| (v / self.scale(v, v)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let d1 = (self
            .x
            .iter()
            .zip(&self.f)
            .map(|(&v, &g)| (g / self.scale(v, v)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0.min(self.cfg.max_time.max(1e-12))
    }

    /// Advance by one accepted step, never past `t_end`.
    pub fn step(&mut self, t_end: f64) -> Result<(), StepError> {
        loop {
            if self.stats.accepted + self.stats.rejected >= self.cfg.max_steps {
                return Err(StepError::StepLimit);
            }
            let remaining = t_end - self.t;
            if remaining <= 0.0 {
                return Ok(());
            }
            let mut h = self.h.min(remaining);
            if remaining - h < 1e-12 * remaining.max(1.0) {
                h = remaining;
            }
            if h < 1e-14 * self.t.abs().max(1.0) {
                return Err(StepError::Failed);
            }
            let outcome = match self.method {
                Method::Dopri5 => self.try_dopri(h),
                Method::Radau5 => self.try_radau(h),
            };
            match outcome {
                Some(h_next) => {
                    self.stats.accepted += 1;
                    self.failures_in_row = 0;
                    if self.cfg.fixed_step.is_none() {
                        self.h = h_next;
                    }
                    return Ok(());
                }
                None => {
                    self.stats.rejected += 1;
                    self.failures_in_row += 1;
                    if self.cfg.fixed_step.is_some() {
                        return Err(StepError::Failed);
                    }
                    if self.method == Method::Dopri5
                        && self.cfg.fallback
                        && self.failures_in_row >= 20
                    {
                        self.switch_to_implicit();
                    }
                    if self.failures_in_row > 60 {
                        return Err(StepError::Failed);
                    }
                }
            }
        }
    }

    fn switch_to_implicit(&mut self) {
        self.method = Method::Radau5;
        self.stats.switched_to_implicit = true;
        self.failures_in_row = 0;
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) -> bool {
        if !self.sys.in_domain(x) {
            return false;
        }
        self.sys.rhs(x, out);
        out.iter().all(|v| v.is_finite())
    }

    /// One Dormand–Prince attempt; returns the next step size on acceptance
    /// or `None` after shrinking `self.h`.
    fn try_dopri(&mut self, h: f64) -> Option<f64> {
        let n = self.n;
        let x = self.x.clone();
        let mut k = std::mem::take(&mut self.k);
        k[0].copy_from_slice(&self.f);
        let mut y = vec![0.0; n];
        let stages: [(&[f64], usize); 5] = [
            (&[A21], 1),
            (&[A31, A32], 2),
            (&[A41, A42, A43], 3),
            (&[A51, A52, A53, A54], 4),
            (&[A61, A62, A63, A64, A65], 5),
        ];
        let mut ok = true;
        for (coeffs, s) in stages {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, c) in coeffs.iter().enumerate() {
                    acc += c * k[j][i];
                }
                y[i] = x[i] + h * acc;
            }
            if !self.eval(&y, &mut k[s]) {
                ok = false;
                break;
            }
        }
        let y_stiff = y.clone();
        let mut x1 = vec![0.0; n];
        if ok {
            for i in 0..n {
                x1[i] = x[i]
                    + h * (A71 * k[0][i]
                        + A73 * k[2][i]
                        + A74 * k[3][i]
                        + A75 * k[4][i]
                        + A76 * k[5][i]);
            }
            ok = self.eval(&x1, &mut k[6]);
        }
        if !ok {
            self.k = k;
            self.h = h * 0.25;
            return None;
        }
        let err = if self.cfg.fixed_step.is_some() {
            0.0
        } else {
            let mut sum = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * k[0][i]
                        + E3 * k[2][i]
                        + E4 * k[3][i]
                        + E5 * k[4][i]
                        + E6 * k[5][i]
                        + E7 * k[6][i]);
                let sc = self.scale(x[i], x1[i]);
                sum += (e / sc).powi(2);
            }
            (sum / n as f64).sqrt()
        };
        if err > 1.0 {
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            self.k = k;
            self.h = h * fac;
            return None;
        }
        // Stiffness detection on accepted steps.
        if self.cfg.fallback && self.cfg.fixed_step.is_none() {
            let stnum: f64 = (0..n).map(|i| (k[6][i] - k[5][i]).powi(2)).sum();
            let stden: f64 = (0..n).map(|i| (x1[i] - y_stiff[i]).powi(2)).sum();
            if stden > 0.0 && h * (stnum / stden).sqrt() > 3.25 {
                self.nonstiff_hits = 0;
                self.stiff_hits += 1;
                if self.stiff_hits >= 15 {
                    self.stiff_hits = 0;
                    self.switch_to_implicit();
                }
            } else {
                self.nonstiff_hits += 1;
                if self.nonstiff_hits >= 6 {
                    self.stiff_hits = 0;
                }
            }
        }
        let mut rc: [Vec<f64>; 5] = Default::default();
        rc[0] = x.clone();
        rc[1] = (0..n).map(|i| x1[i] - x[i]).collect();
        rc[2] = (0..n).map(|i| h * k[0][i] - rc[1][i]).collect();
        rc[3] = (0..n).map(|i| rc[1][i] - h * k[6][i] - rc[2][i]).collect();
        rc[4] = (0..n)
            .map(|i| {
                h * (D1 * k[0][i]
                    + D3 * k[2][i]
                    + D4 * k[3][i]
                    + D5 * k[4][i]
                    + D6 * k[5][i]
                    + D7 * k[6][i])
            })
            .collect();
        self.dense = Dense::Dopri(rc);
        self.t_prev = self.t;
        self.t += h;
        self.x = x1;
        self.f.copy_from_slice(&k[6]);
        self.k = k;
        let fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        Some(h * fac)
    }

    /// One Radau IIA step of size `h` from `x` using Jacobian `jac`.
    fn radau_solve(&self, x: &[f64], h: f64, jac: &DMatrix<f64>) -> Option<Vec<f64>> {
        let n = self.n;
        let a = &self.tableau.a;
        let dim = 3 * n;
        let mut m = DMatrix::<f64>::identity(dim, dim);
        for p in 0..3 {
            for q in 0..3 {
                let c = h * a[p][q];
                for i in 0..n {
                    for j in 0..n {
                        m[(p * n + i, q * n + j)] -= c * jac[(i, j)];
                    }
                }
            }
        }
        let lu = m.lu();
        let mut z = vec![0.0; dim];
        let mut fz = vec![vec![0.0; n]; 3];
        let mut y = vec![0.0; n];
        let mut prev_norm = f64::INFINITY;
        for _ in 0..10 {
            for p in 0..3 {
                for i in 0..n {
                    y[i] = x[i] + z[p * n + i];
                }
                if !self.eval(&y, &mut fz[p]) {
                    return None;
                }
            }
            let mut rhs = DVector::<f64>::zeros(dim);
            for p in 0..3 {
                for i in 0..n {
                    let mut acc = 0.0;
                    for q in 0..3 {
                        acc += a[p][q] * fz[q][i];
                    }
                    rhs[p * n + i] = -z[p * n + i] + h * acc;
                }
            }
            let dz = lu.solve(&rhs)?;
            let mut norm = 0.0;
            for p in 0..3 {
                for i in 0..n {
                    z[p * n + i] += dz[p * n + i];
                    let sc = self.scale(x[i], x[i] + z[p * n + i]);
                    norm += (dz[p * n + i] / sc).powi(2);
                }
            }
            let norm = (norm / dim as f64).sqrt();
            if !norm.is_finite() || norm > 2.0 * prev_norm && prev_norm < f64::INFINITY {
                return None;
            }
            prev_norm = norm;
            if norm < 1e-3 {
                let x1: Vec<f64> = (0..n).map(|i| x[i] + z[2 * n + i]).collect();
                return x1.iter().all(|v| v.is_finite()).then_some(x1);
            }
        }
        None
    }

    fn try_radau(&mut self, h: f64) -> Option<f64> {
        let n = self.n;
        let mut jac = DMatrix::zeros(n, n);
        self.sys.jacobian(&self.x, &mut jac);
        let x = self.x.clone();
        let big = self.radau_solve(&x, h, &jac);
        if self.cfg.fixed_step.is_some() {
            let x1 = big?;
            return self.accept_implicit(h, x1, 0.0);
        }
        let half = self.radau_solve(&x, 0.5 * h, &jac).and_then(|mid| {
            let mut jm = DMatrix::zeros(n, n);
            self.sys.jacobian(&mid, &mut jm);
            self.radau_solve(&mid, 0.5 * h, &jm)
        });
        let (Some(big), Some(small)) = (big, half) else {
            self.h = h * 0.3;
            return None;
        };
        let mut sum = 0.0;
        for i in 0..n {
            let sc = self.scale(x[i], small[i]);
            sum += ((small[i] - big[i]) / (31.0 * sc)).powi(2);
        }
        let err = (sum / n as f64).sqrt();
        if err > 1.0 {
            self.h = h * (0.9 * err.powf(-1.0 / 6.0)).clamp(0.2, 1.0);
            return None;
        }
        self.accept_implicit(h, small, err)
    }

    fn accept_implicit(&mut self, h: f64, x1: Vec<f64>, err: f64) -> Option<f64> {
        let mut f1 = vec![0.0; self.n];
        if !self.eval(&x1, &mut f1) {
            self.h = h * 0.3;
            return None;
        }
        self.dense = Dense::Hermite {
            x0: self.x.clone(),
            f0: self.f.clone(),
            x1: x1.clone(),
            f1: f1.clone(),
        };
        self.t_prev = self.t;
        self.t += h;
        self.x = x1;
        self.f = f1;
        let fac = if err == 0.0 {
            4.0
        } else {
            (0.9 * err.powf(-1.0 / 6.0)).clamp(0.2, 4.0)
        };
        Some(h * fac)
    }

    /// State at time `t` within the last accepted step.
    pub fn interpolate(&self, t: f64) -> Vec<f64> {
        let h = self.t - self.t_prev;
        if h <= 0.0 {
            return self.x.clone();
        }
        let th = (t - self.t_prev) / h;
        let th1 = 1.0 - th;
        match &self.dense {
            Dense::None => self.x.clone(),
            Dense::Dopri(rc) => (0..self.n)
                .map(|i| {
                    rc[0][i] + th * (rc[1][i] + th1 * (rc[2][i] + th * (rc[3][i] + th1 * rc[4][i])))
                })
                .collect(),
            Dense::Hermite { x0, f0, x1, f1 } => {
                let h00 = (1.0 + 2.0 * th) * th1 * th1;
                let h10 = th * th1 * th1;
                let h01 = th * th * (3.0 - 2.0 * th);
                let h11 = -th * th * th1;
                (0..self.n)
                    .map(|i| h00 * x0[i] + h10 * h * f0[i] + h01 * x1[i] + h11 * h * f1[i])
                    .collect()
            }
        }
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Integrate from `x0` over `[0, cfg.max_time]`, recording every accepted step.
pub fn integrate<S: OdeSystem + ?Sized>(sys: &S, x0: &[f64], cfg: &IntegratorConfig) -> Trajectory {
    let mut st = Stepper::new(sys, x0, *cfg);
    let mut times = Vec::new();
    let mut states = Vec::new();
    if cfg.record_from <= 0.0 {
        times.push(0.0);
        states.push(x0.to_vec());
    }
    let mut steady_since: Option<f64> = None;
    let status = loop {
        if st.t() >= cfg.max_time {
            break TrajectoryStatus::Completed;
        }
        match st.step(cfg.max_time) {
            Ok(()) => {}
            Err(StepError::StepLimit) => break TrajectoryStatus::StepLimit,
            Err(StepError::Failed) => break TrajectoryStatus::Failed,
        }
        if st.t() >= cfg.record_from {
            times.push(st.t());
            states.push(st.x().to_vec());
        }
        let xn = max_norm(st.x());
        if xn > cfg.bound || !xn.is_finite() {
            break TrajectoryStatus::Unbounded;
        }
        if let Some(tol) = cfg.steady_tol {
            if max_norm(st.f()) <= tol * (1.0 + xn) {
                let since = *steady_since.get_or_insert(st.t_prev());
                if st.t() - since >= cfg.steady_window {
                    break TrajectoryStatus::SteadyState;
                }
            } else {
                steady_since = None;
            }
        }
    };
    if times.last() != Some(&st.t()) {
        times.push(st.t());
        states.push(st.x().to_vec());
    }
    Trajectory {
        times,
        states,
        status,
        stats: st.stats,
    }
}

/// State at exactly time `t`, or the failure status.
pub fn flow_to<S: OdeSystem + ?Sized>(
    sys: &S,
    x0: &[f64],
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<f64>, TrajectoryStatus> {
    let mut st = Stepper::new(sys, x0, *cfg);
    while st.t() < t {
        match st.step(t) {
            Ok(()) => {}
            Err(StepError::StepLimit) => return Err(TrajectoryStatus::StepLimit),
            Err(StepError::Failed) => return Err(TrajectoryStatus::Failed),
        }
        if max_norm(st.x()) > cfg.bound {
            return Err(TrajectoryStatus::Unbounded);
        }
    }
    Ok(st.x().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Linear(f64);
    impl OdeSystem for Linear {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, x: &[f64], dx: &mut [f64]) {
            dx[0] = self.0 * x[0];
        }
        fn jacobian(&self, _x: &[f64], jac: &mut DMatrix<f64>) {
            jac[(0, 0)] = self.0;
        }
    }

    struct Harmonic;
    impl OdeSystem for Harmonic {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, x: &[f64], dx: &mut [f64]) {
            dx[0] = -x[1];
            dx[1] = x[0];
        }
    }

    #[test]
    fn exponential_decay() {
        let cfg = IntegratorConfig::certification().with_max_time(5.0);
        for stiff in [false, true] {
            let cfg = IntegratorConfig { stiff, ..cfg };
            let tr = integrate(&Linear(-1.0), &[1.0], &cfg);
            assert_eq!(tr.status, TrajectoryStatus::Completed);
            let x5 = tr.last_state().unwrap()[0];
            assert!((x5 - (-5f64).exp()).abs() < 1e-7, "stiff={stiff}: {x5}");
            assert!((tr.last_time() - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn implicit_is_stable_for_huge_stiffness() {
        // Steps far larger than 1/|λ| stay bounded and decay.
        let cfg = IntegratorConfig {
            fixed_step: Some(1.0),
            stiff: true,
            ..IntegratorConfig::certification()
        };
        let x = flow_to(&Linear(-1e8), &[1.0], 10.0, &cfg).unwrap();
        assert!(x[0].abs() < 1e-6);
    }

    #[test]
    fn stiff_problem_switches_to_implicit() {
        let cfg = IntegratorConfig::screening().with_max_time(100.0);
        let tr = integrate(&Linear(-1e5), &[1.0], &cfg);
        assert_eq!(tr.status, TrajectoryStatus::Completed);
        assert!(tr.stats.switched_to_implicit);
        assert!(tr.stats.accepted < 20_000);
    }

    #[test]
    fn dense_output_matches_solution() {
        let cfg = IntegratorConfig::certification();
        let mut st = Stepper::new(&Harmonic, &[1.0, 0.0], cfg);
        while st.t() < 3.0 {
            st.step(10.0).unwrap();
            let tm = 0.5 * (st.t_prev() + st.t());
            let x = st.interpolate(tm);
            assert!((x[0] - tm.cos()).abs() < 1e-7);
            assert!((x[1] - tm.sin()).abs() < 1e-7);
        }
    }

    #[test]
    fn fixed_step_convergence_order() {
        for method_stiff in [false, true] {
            let err = |h: f64| {
                let cfg = IntegratorConfig {
                    fixed_step: Some(h),
                    stiff: method_stiff,
                    fallback: false,
                    ..IntegratorConfig::certification()
                };
                let x = flow_to(&Harmonic, &[1.0, 0.0], 2.0, &cfg).unwrap();
                ((x[0] - 2f64.cos()).powi(2) + (x[1] - 2f64.sin()).powi(2)).sqrt()
            };
            let (e1, e2) = (err(0.2), err(0.1));
            let order = (e1 / e2).log2();
            assert!(order > 4.5, "stiff={method_stiff}: observed order {order}");
        }
    }

    #[test]
    fn tolerance_proportionality() {
        let err = |tol: f64| {
            let cfg = IntegratorConfig::certification()
                .with_tolerances(tol, tol * 1e-2)
                .with_max_time(5.0);
            let x = flow_to(&Harmonic, &[1.0, 0.0], 5.0, &cfg).unwrap();
            ((x[0] - 5f64.cos()).powi(2) + (x[1] - 5f64.sin()).powi(2)).sqrt()
        };
        let (a, b, c) = (err(1e-4), err(1e-6), err(1e-8));
        assert!(a > b && b > c, "{a} {b} {c}");
    }

    #[test]
    fn unbounded_detection() {
        let cfg = IntegratorConfig::screening().with_max_time(100.0);
        let tr = integrate(&Linear(1.0), &[1.0], &cfg);
        assert_eq!(tr.status, TrajectoryStatus::Unbounded);
    }

    #[test]
    fn steady_state_stop() {
        let cfg = IntegratorConfig {
            steady_tol: Some(1e-9),
            steady_window: 1.0,
            ..IntegratorConfig::screening()
        };
        let tr = integrate(&Linear(-1.0), &[1.0], &cfg);
        assert_eq!(tr.status, TrajectoryStatus::SteadyState);
        assert!(tr.last_time() < 100.0);
    }
}
