use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::floquet::{certify, monodromy, reduced_multipliers, Margins, Verdict};
use super::integrate::{flow_to, integrate, IntegratorConfig, Stepper};
use super::linalg::{as_pairs, eig};
use super::reduced::ReducedSystem;
use crate::canon::canonical_key;
use crate::error::{CrnError, Result};
use crate::kinetics::{KineticsSpec, OdeSystem, VectorField};
use crate::model::{basis_factorization, left_null_space, stoich_matrices};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitConfig {
    pub integ: IntegratorConfig,
    /// Shooting residual ‖Φ_T(p) − p‖∞ required for convergence.
    pub orbit_tol: f64,
    pub max_newton: usize,
    /// Return-map iterations before shooting.
    pub max_returns: usize,
    /// Return-map iteration stops once successive returns differ by less.
    pub return_tol: f64,
    /// Give up if no return to the section within this time.
    pub max_return_time: f64,
    /// Orbits whose max-norm amplitude is below this are trivial.
    pub min_amplitude: f64,
    pub margins: Margins,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig {
            integ: IntegratorConfig::certification().with_tolerances(1e-11, 1e-13),
            orbit_tol: 1e-8,
            max_newton: 30,
            max_returns: 400,
            return_tol: 1e-7,
            max_return_time: 1e3,
            min_amplitude: 1e-6,
            margins: Margins::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicOrbit {
    pub point: Vec<f64>,
    pub period: f64,
    pub residual: f64,
    pub amplitude: f64,
}

#[derive(Clone, Debug)]
struct Section {
    p0: Vec<f64>,
    nrm: Vec<f64>,
}

impl Section {
    fn through<S: OdeSystem + ?Sized>(sys: &S, p: &[f64]) -> Option<Section> {
        let mut f = vec![0.0; p.len()];
        sys.rhs(p, &mut f);
        let len = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        (len > 1e-12 * (1.0 + max_norm(p))).then(|| Section {
            p0: p.to_vec(),
            nrm: f.iter().map(|v| v / len).collect(),
        })
    }

    fn eval(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.p0)
            .zip(&self.nrm)
            .map(|((a, b), c)| (a - b) * c)
            .sum()
    }

    /// Cosine between the flow at `x` and the normal.
    fn crossing_cos<S: OdeSystem + ?Sized>(&self, sys: &S, x: &[f64]) -> f64 {
        let mut f = vec![0.0; x.len()];
        sys.rhs(x, &mut f);
        let len = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        f.iter().zip(&self.nrm).map(|(a, b)| a * b).sum::<f64>() / len
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn not_periodic(msg: impl Into<String>) -> CrnError {
    CrnError::NotPeriodic(msg.into())
}

/// Next upward crossing of the section after leaving it, located on the dense output.
fn first_return<S: OdeSystem + ?Sized>(
    sys: &S,
    x: &[f64],
    sec: &Section,
    cfg: &OrbitConfig,
) -> Result<(Vec<f64>, f64)> {
    let mut st = Stepper::new(sys, x, cfg.integ);
    let mut g_prev = sec.eval(x);
    let mut armed = false;
    while st.t() < cfg.max_return_time {
        st.step(cfg.max_return_time)
            .map_err(|e| CrnError::Integration(format!("{e:?}")))?;
        if max_norm(st.x()) > cfg.integ.bound {
            return Err(not_periodic("trajectory left the bounded region"));
        }
        let g = sec.eval(st.x());
        if armed && g_prev < 0.0 && g >= 0.0 {
            let (mut a, mut b, mut ga, mut gb) = (st.t_prev(), st.t(), g_prev, g);
            for _ in 0..200 {
                if gb == 0.0 || (b - a).abs() <= 4.0 * f64::EPSILON * b.abs() {
                    break;
                }
                let c = b - gb * (b - a) / (gb - ga);
                let gc = sec.eval(&st.interpolate(c));
                if gc * gb < 0.0 {
                    a = b;
                    ga = gb;
                } else {
                    ga /= 2.0;
                }
                b = c;
                gb = gc;
            }
            return Ok((st.interpolate(b), b));
        }
        if g < 0.0 {
            armed = true;
        }
        g_prev = g;
    }
    Err(not_periodic("no return to the section"))
}

fn shooting_residual<S: OdeSystem + ?Sized>(
    sys: &S,
    p: &[f64],
    t: f64,
    sec: &Section,
    cfg: &IntegratorConfig,
) -> Option<f64> {
    let end = flow_to(sys, p, t, cfg).ok()?;
    let r = end
        .iter()
        .zip(p)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Some(r.max(sec.eval(p).abs()))
}

/// Periodic orbit near `seed`: return-map iteration on the section through
/// `seed` normal to the flow, then damped Newton shooting on (p, T) with the
/// phase condition that p stays on the section.
pub fn locate_orbit<S: OdeSystem + ?Sized>(
    sys: &S,
    seed: &[f64],
    cfg: &OrbitConfig,
) -> Result<PeriodicOrbit> {
    let n = sys.dim();
    if seed.len() != n {
        return Err(CrnError::LengthMismatch {
            expected: n,
            got: seed.len(),
        });
    }
    let mut sec =
        Section::through(sys, seed).ok_or_else(|| not_periodic("seed is an equilibrium"))?;
    let mut p = seed.to_vec();
    let mut t = 0.0;
    for _ in 0..cfg.max_returns {
        let (q, tq) = first_return(sys, &p, &sec, cfg)?;
        let d = q
            .iter()
            .zip(&p)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        p = q;
        t = tq;
        if d < cfg.return_tol * (1.0 + max_norm(&p)) {
            break;
        }
        if sec.crossing_cos(sys, &p) < 0.3 {
            sec = Section::through(sys, &p)
                .ok_or_else(|| not_periodic("returns collapsed to an equilibrium"))?;
        }
    }
    sec = Section::through(sys, &p)
        .ok_or_else(|| not_periodic("returns collapsed to an equilibrium"))?;

    let mut res = shooting_residual(sys, &p, t, &sec, &cfg.integ)
        .ok_or_else(|| not_periodic("flow failed"))?;
    let mut iters = 0;
    while res >= cfg.orbit_tol {
        if iters == cfg.max_newton {
            return Err(not_periodic(format!(
                "shooting did not converge (residual {res:e})"
            )));
        }
        iters += 1;
        let mono = monodromy(sys, &p, t, &cfg.integ)?;
        let mut f_end = vec![0.0; n];
        sys.rhs(&mono.end, &mut f_end);
        let mut a = DMatrix::zeros(n + 1, n + 1);
        a.view_mut((0, 0), (n, n))
            .copy_from(&(mono.matrix - DMatrix::identity(n, n)));
        for i in 0..n {
            a[(i, n)] = f_end[i];
            a[(n, i)] = sec.nrm[i];
        }
        let mut rhs = DVector::zeros(n + 1);
        for i in 0..n {
            rhs[i] = p[i] - mono.end[i];
        }
        rhs[n] = -sec.eval(&p);
        let step = a
            .svd(true, true)
            .solve(&rhs, 1e-13)
            .map_err(|e| not_periodic(e.to_string()))?;
        let mut lambda = 1.0;
        loop {
            let pn: Vec<f64> = (0..n).map(|i| p[i] + lambda * step[i]).collect();
            let tn = t + lambda * step[n];
            let rn = if tn > 0.0 && sys.in_domain(&pn) {
                shooting_residual(sys, &pn, tn, &sec, &cfg.integ)
            } else {
                None
            };
            match rn {
                Some(r) if r < res || lambda < 1.0 / 64.0 => {
                    p = pn;
                    t = tn;
                    res = r;
                    break;
                }
                _ if lambda < 1.0 / 64.0 => return Err(not_periodic("line search failed")),
                _ => lambda /= 2.0,
            }
        }
    }

    // Least period.
    let mut changed = true;
    while changed {
        changed = false;
        for d in [2.0, 3.0] {
            if let Ok(x) = flow_to(sys, &p, t / d, &cfg.integ) {
                let gap = x
                    .iter()
                    .zip(&p)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                if gap < 100.0 * cfg.orbit_tol {
                    t /= d;
                    changed = true;
                    break;
                }
            }
        }
    }

    let traj = integrate(sys, &p, &cfg.integ.with_max_time(t));
    let amplitude = (0..n)
        .map(|i| {
            let (lo, hi) = traj
                .states
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(x[i]), hi.max(x[i]))
                });
            hi - lo
        })
        .fold(0.0, f64::max);
    if !(amplitude >= cfg.min_amplitude) {
        return Err(not_periodic(format!(
            "amplitude {amplitude:e} below threshold"
        )));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(not_periodic("non-positive period"));
    }
    Ok(PeriodicOrbit {
        point: p,
        period: t,
        residual: res,
        amplitude,
    })
}

/// Orbit of a network's vector field, located on the seed's stoichiometry
/// class in reduced coordinates when the rank is deficient.
pub fn locate_crn_orbit(
    vf: &VectorField,
    seed: &[f64],
    cfg: &OrbitConfig,
) -> Result<PeriodicOrbit> {
    let sm = stoich_matrices(vf.crn());
    if sm.rank == vf.n_species() {
        return locate_orbit(vf, seed, cfg);
    }
    let bf = basis_factorization(&sm)?;
    let sys = ReducedSystem::new(vf, bf.gamma0_f64(), bf.q_f64(), seed)?;
    let z = locate_orbit(&sys, &vec![0.0; sm.rank], cfg)?;
    Ok(PeriodicOrbit {
        point: sys.to_full(&z.point),
        ..z
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub shooting: f64,
    /// Distance of the nearest reduced multiplier to 1.
    pub trivial: f64,
    pub liouville: f64,
}

/// A periodic orbit with its multipliers and verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub network: String,
    pub kinetics: KineticsSpec,
    pub rtol: f64,
    pub atol: f64,
    pub point: Vec<f64>,
    pub period: f64,
    pub rank: usize,
    pub full_multipliers: Vec<(f64, f64)>,
    pub reduced_multipliers: Vec<(f64, f64)>,
    pub verdict: Verdict,
    pub residuals: Residuals,
    pub note: Option<String>,
}

impl OrbitRecord {
    pub fn reduced(&self) -> Vec<Complex64> {
        self.reduced_multipliers
            .iter()
            .map(|&(re, im)| Complex64::new(re, im))
            .collect()
    }

    pub fn full(&self) -> Vec<Complex64> {
        self.full_multipliers
            .iter()
            .map(|&(re, im)| Complex64::new(re, im))
            .collect()
    }

    pub fn is_certified(&self) -> bool {
        matches!(self.verdict, Verdict::Sppo | Verdict::Nppo)
    }
}

fn blank_record(vf: &VectorField, cfg: &OrbitConfig, note: String) -> OrbitRecord {
    OrbitRecord {
        network: canonical_key(vf.crn()).to_hex(),
        kinetics: vf.spec().clone(),
        rtol: cfg.integ.rtol,
        atol: cfg.integ.atol,
        point: Vec::new(),
        period: 0.0,
        rank: stoich_matrices(vf.crn()).rank,
        full_multipliers: Vec::new(),
        reduced_multipliers: Vec::new(),
        verdict: Verdict::NotPeriodic,
        residuals: Residuals {
            shooting: f64::NAN,
            trivial: f64::NAN,
            liouville: f64::NAN,
        },
        note: Some(note),
    }
}

/// Full and reduced multipliers of a located orbit, and the verdict.
pub fn certify_orbit(
    vf: &VectorField,
    orbit: &PeriodicOrbit,
    cfg: &OrbitConfig,
) -> Result<OrbitRecord> {
    let mono = monodromy(vf, &orbit.point, orbit.period, &cfg.integ)?;
    let full = eig(&mono.matrix)?;
    let sm = stoich_matrices(vf.crn());
    let bf = basis_factorization(&sm)?;
    let reduced = reduced_multipliers(
        vf,
        &orbit.point,
        orbit.period,
        &bf.gamma0_f64(),
        &bf.q_f64(),
        &orbit.point,
        &cfg.integ,
    )?;
    let trivial = reduced
        .iter()
        .map(|z| (z - 1.0).norm())
        .fold(f64::INFINITY, f64::min);
    Ok(OrbitRecord {
        point: orbit.point.clone(),
        period: orbit.period,
        full_multipliers: as_pairs(&full),
        reduced_multipliers: as_pairs(&reduced),
        verdict: certify(&reduced, &cfg.margins),
        residuals: Residuals {
            shooting: orbit.residual,
            trivial,
            liouville: mono.liouville_residual(),
        },
        note: None,
        ..blank_record(vf, cfg, String::new())
    })
}

/// Locate and certify; a failure to locate gives a `NotPeriodic` record.
pub fn analyze_orbit(vf: &VectorField, seed: &[f64], cfg: &OrbitConfig) -> Result<OrbitRecord> {
    match locate_crn_orbit(vf, seed, cfg) {
        Ok(orbit) => certify_orbit(vf, &orbit, cfg),
        Err(CrnError::NotPeriodic(msg)) => Ok(blank_record(vf, cfg, msg)),
        Err(CrnError::Integration(msg)) => {
            Ok(blank_record(vf, cfg, format!("integration failed: {msg}")))
        }
        Err(e) => Err(e),
    }
}

/// `samples` states at uniform times over one period, from dense output.
pub fn sample_orbit<S: OdeSystem + ?Sized>(
    sys: &S,
    point: &[f64],
    period: f64,
    samples: usize,
    cfg: &IntegratorConfig,
) -> Result<Vec<Vec<f64>>> {
    let mut st = Stepper::new(sys, point, *cfg);
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = period * i as f64 / samples as f64;
        while st.t() < t {
            st.step(period)
                .map_err(|e| CrnError::Integration(format!("{e:?}")))?;
        }
        out.push(if t == st.t() {
            st.x().to_vec()
        } else {
            st.interpolate(t)
        });
    }
    Ok(out)
}

/// Largest relative drift of the linear first integrals u·x over one period.
pub fn first_integral_drift(
    vf: &VectorField,
    orbit: &PeriodicOrbit,
    cfg: &IntegratorConfig,
) -> f64 {
    let sm = stoich_matrices(vf.crn());
    let null = left_null_space(&sm);
    if null.is_empty() {
        return 0.0;
    }
    let traj = integrate(vf, &orbit.point, &cfg.with_max_time(orbit.period));
    let x0 = &orbit.point;
    let scale = 1.0 + max_norm(x0);
    let mut worst = 0.0f64;
    for u in &null {
        let un = u.iter().map(|&a| (a * a) as f64).sum::<f64>().sqrt();
        for x in &traj.states {
            let d: f64 = u
                .iter()
                .zip(x.iter().zip(x0))
                .map(|(&a, (b, c))| a as f64 * (b - c))
                .sum();
            worst = worst.max(d.abs() / (un * scale));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

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

    // ṙ = r(1 − r²), θ̇ = 2: a stable circle of period π.
    struct Circle;
    impl OdeSystem for Circle {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, x: &[f64], dx: &mut [f64]) {
            let r2 = x[0] * x[0] + x[1] * x[1];
            dx[0] = x[0] * (1.0 - r2) - 2.0 * x[1];
            dx[1] = x[1] * (1.0 - r2) + 2.0 * x[0];
        }
    }

    #[test]
    fn harmonic_period() {
        let o = locate_orbit(&Harmonic, &[1.0, 0.0], &OrbitConfig::default()).unwrap();
        assert!(
            (o.period - std::f64::consts::TAU).abs() < 1e-8,
            "{}",
            o.period
        );
    }

    #[test]
    fn circle_orbit_and_multipliers() {
        let cfg = OrbitConfig::default();
        let o = locate_orbit(&Circle, &[0.5, 0.1], &cfg).unwrap();
        assert!((o.period - std::f64::consts::PI).abs() < 1e-8);
        let r = (o.point[0].powi(2) + o.point[1].powi(2)).sqrt();
        assert!((r - 1.0).abs() < 1e-8);
        let mono = monodromy(&Circle, &o.point, o.period, &cfg.integ).unwrap();
        let ev = eig(&mono.matrix).unwrap();
        // Radial multiplier e^{−2T}.
        let want = (-2.0 * o.period).exp();
        assert!(ev.iter().any(|z| (z - want).norm() < 1e-6), "{ev:?}");
        assert!(ev.iter().any(|z| (z - 1.0).norm() < 1e-6));
        assert!(mono.liouville_residual() < 1e-6);
        assert_eq!(certify(&ev, &Margins::default()), Verdict::Sppo);
    }

    #[test]
    fn equilibrium_seed_rejected() {
        assert!(matches!(
            locate_orbit(&Circle, &[0.0, 0.0], &OrbitConfig::default()),
            Err(CrnError::NotPeriodic(_))
        ));
    }
}
