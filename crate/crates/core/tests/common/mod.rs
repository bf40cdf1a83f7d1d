#![allow(dead_code)]

use crn_osc::catalog::xiv_set;
use crn_osc::dynamics::{
    certify_orbit, integrate, locate_crn_orbit, reduced_multipliers, IntegratorConfig, OrbitConfig,
    OrbitRecord, PeriodicOrbit,
};
use crn_osc::inherit::{apply, lift_point, Transformation};
use crn_osc::kinetics::VectorField;
use crn_osc::model::{basis_factorization, stoich_matrices};
use crn_osc::Reaction;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct Certified {
    pub name: String,
    pub vf: VectorField,
    pub orbit: PeriodicOrbit,
    pub record: OrbitRecord,
}

pub fn xiv_field(k: f64) -> VectorField {
    let (crn, spec) = xiv_set(k).unwrap();
    VectorField::new(&crn, &spec).unwrap()
}

pub fn xiv_periodic(k: f64, cfg: &OrbitConfig) -> (VectorField, PeriodicOrbit) {
    let vf = xiv_field(k);
    let traj = integrate(
        &vf,
        &[1.02, 1.0],
        &IntegratorConfig::screening().with_max_time(400.0),
    );
    let orbit = locate_crn_orbit(&vf, traj.last_state().unwrap(), cfg).unwrap();
    (vf, orbit)
}

pub fn catalyst() -> Transformation {
    Transformation::AddTrivialSpecies {
        stoich: vec![1, 0, 0, 0, 0],
    }
}

pub fn reverse_reaction(eps: f64) -> Transformation {
    Transformation::AddDependentReaction {
        reaction: Reaction::from_stoich(&[0, 2], &[1, 1]).unwrap(),
        epsilon: eps,
    }
}

fn extend(
    name: &str,
    base: &VectorField,
    orbit: &PeriodicOrbit,
    t: &Transformation,
    cfg: &OrbitConfig,
) -> Certified {
    let (crn, spec) = apply(t, base.crn(), base.spec()).unwrap();
    let vf = VectorField::new(&crn, &spec).unwrap();
    let orbit = locate_crn_orbit(&vf, &lift_point(t, &orbit.point), cfg).unwrap();
    let record = certify_orbit(&vf, &orbit, cfg).unwrap();
    Certified {
        name: name.into(),
        vf,
        orbit,
        record,
    }
}

/// Certified orbits used by the Floquet checks: two planar ones, one with
/// an extra dependent reaction and one rank-deficient.
pub fn corpus() -> Vec<Certified> {
    let cfg = OrbitConfig::default();
    let mut out = Vec::new();
    for k in [0.05, 0.09] {
        let (vf, orbit) = xiv_periodic(k, &cfg);
        let record = certify_orbit(&vf, &orbit, &cfg).unwrap();
        out.push(Certified {
            name: format!("power-law set k={k}"),
            vf,
            orbit,
            record,
        });
    }
    let (vf, orbit) = xiv_periodic(0.05, &cfg);
    out.push(extend(
        "with 2Y -> X+Y",
        &vf,
        &orbit,
        &reverse_reaction(1e-3),
        &cfg,
    ));
    out.push(extend("with catalyst", &vf, &orbit, &catalyst(), &cfg));
    out
}

/// Reduced multipliers in the basis Γ₀A, Q' = A⁻¹Q, with the anchor moved
/// along the class by Γ₀w. A and w come from `seed`.
pub fn random_basis_multipliers(c: &Certified, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bf = basis_factorization(&stoich_matrices(c.vf.crn())).unwrap();
    let (g0, q) = (bf.gamma0_f64(), bf.q_f64());
    let r = g0.ncols();
    let a = loop {
        let a = DMatrix::<f64>::from_fn(r, r, |i, j| {
            rng.gen_range(-1.0..1.0) + if i == j { 2.0 } else { 0.0 }
        });
        if a.determinant().abs() > 0.5 {
            break a;
        }
    };
    let ainv = a.clone().try_inverse().unwrap();
    let w = DVector::from_fn(r, |_, _| rng.gen_range(-0.1..0.1));
    let anchor: Vec<f64> = (DVector::from_column_slice(&c.orbit.point) + &g0 * w)
        .iter()
        .copied()
        .collect();
    reduced_multipliers(
        &c.vf,
        &c.orbit.point,
        c.orbit.period,
        &(&g0 * &a),
        &(&ainv * &q),
        &anchor,
        &OrbitConfig::default().integ,
    )
    .unwrap()
}

/// Largest distance from each multiplier of `a` to the nearest one of `b`.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| {
                y.iter()
                    .map(|q| (p - q).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    one(a, b).max(one(b, a))
}
