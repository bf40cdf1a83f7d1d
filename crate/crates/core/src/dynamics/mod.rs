//! Integration, trajectory classification, periodic orbits, Floquet
//! multipliers and Hopf checks.

mod classify;
mod floquet;
mod hopf;
mod integrate;
mod linalg;
mod orbit;
mod reduced;

pub use classify::{classify, TrajectoryClass, MIN_CROSSINGS};
pub use floquet::{certify, monodromy, reduced_multipliers, Margins, Monodromy, Verdict};
pub use hopf::{
    hopf_screen, hopf_screen_points, lyapunov_coefficient, near_imaginary_pair, transversality,
    HopfPoint,
};
pub use integrate::{
    flow_to, integrate, IntegratorConfig, Method, StepError, StepStats, Stepper, Trajectory,
    TrajectoryStatus,
};
pub use linalg::eig;
pub use orbit::{
    analyze_orbit, certify_orbit, first_integral_drift, locate_crn_orbit, locate_orbit,
    sample_orbit, OrbitConfig, OrbitRecord, PeriodicOrbit, Residuals,
};
pub use reduced::ReducedSystem;
