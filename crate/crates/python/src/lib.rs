//! Python bindings. Results with nested structure come back as plain
//! dicts and lists (via JSON), networks as `Crn` objects.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use crn_osc::canon::{canonical_key, contains_induced, core_key, CanonicalKey};
use crn_osc::dynamics::{classify, OrbitConfig};
use crn_osc::enumerate::{count_crns, enumerate_crns, EnumSpec, DEFAULT_CEILING};
use crn_osc::inherit::{closure_step, motif_frequency};
use crn_osc::kinetics::KineticsClass;
use crn_osc::model::{parse_crn, print_crn};
use crn_osc::workbench::{
    search_sppo, simulate_draw, table1, verify_appendix_b, xiv_orbit, AppendixBConfig,
    ScreenConfig, Table1Config,
};
use crn_osc::CrnError;

fn err(e: CrnError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py(py: Python<'_>, value: &impl Serialize) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn class_of(name: &str) -> PyResult<KineticsClass> {
    match name.to_ascii_lowercase().as_str() {
        "ma" | "mass_action" => Ok(KineticsClass::MassAction),
        "pl" | "power_law" => Ok(KineticsClass::PhysicalPowerLaw),
        _ => Err(PyValueError::new_err(format!(
            "unknown kinetics class `{name}` (use \"ma\" or \"pl\")"
        ))),
    }
}

/// A reaction network.
#[pyclass(name = "Crn", frozen, from_py_object)]
#[derive(Clone)]
struct PyCrn(crn_osc::Crn);

#[pymethods]
impl PyCrn {
    /// Parse the text format (`X1 + X2 -> 2 X2`, one reaction per line).
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        parse_crn(text).map(PyCrn).map_err(err)
    }

    /// Network encoded by a canonical key.
    #[staticmethod]
    fn from_key(key: &str) -> PyResult<Self> {
        CanonicalKey::from_hex(key)
            .and_then(|k| k.to_crn())
            .map(PyCrn)
            .map_err(err)
    }

    fn to_text(&self) -> String {
        print_crn(&self.0)
    }

    #[getter]
    fn n_species(&self) -> usize {
        self.0.n_species()
    }

    #[getter]
    fn n_reactions(&self) -> usize {
        self.0.n_reactions()
    }

    fn is_fully_open(&self) -> bool {
        self.0.is_fully_open()
    }

    fn fully_open(&self) -> Self {
        PyCrn(self.0.fully_open_extension())
    }

    fn core(&self) -> Self {
        PyCrn(self.0.core())
    }

    /// Canonical key of this network as given.
    fn key(&self) -> String {
        canonical_key(&self.0).to_hex()
    }

    /// Canonical key of the non-flow part.
    fn core_key(&self) -> String {
        core_key(&self.0).to_hex()
    }

    /// Whether `other` is an induced subnetwork of this one.
    fn contains(&self, other: &PyCrn) -> bool {
        contains_induced(&self.0, &other.0)
    }

    fn __repr__(&self) -> String {
        format!("Crn({})", self.0)
    }

    fn __eq__(&self, other: &PyCrn) -> bool {
        self.0 == other.0
    }
}

/// Number of nonisomorphic (k, l) networks.
#[pyfunction]
fn count(k: usize, l: usize) -> PyResult<u64> {
    count_crns(EnumSpec::new(k, l).map_err(err)?, DEFAULT_CEILING).map_err(err)
}

/// All nonisomorphic (k, l) networks (cores; flows are implicit).
#[pyfunction]
fn enumerate(k: usize, l: usize) -> PyResult<Vec<PyCrn>> {
    let spec = EnumSpec::new(k, l).map_err(err)?;
    Ok(enumerate_crns(spec, DEFAULT_CEILING)
        .map_err(err)?
        .into_iter()
        .map(|(c, _)| PyCrn(c))
        .collect())
}

/// Inheritors at `target` from (k, l−1) seeds by adding a reaction and
/// (k−1, l) seeds by inserting a species. Returns the closure report.
#[pyfunction]
#[pyo3(signature = (target, add_seeds = Vec::new(), insert_seeds = Vec::new()))]
fn closure(
    py: Python<'_>,
    target: (usize, usize),
    add_seeds: Vec<PyCrn>,
    insert_seeds: Vec<PyCrn>,
) -> PyResult<Py<PyAny>> {
    let add: Vec<_> = add_seeds.into_iter().map(|c| c.0.core()).collect();
    let ins: Vec<_> = insert_seeds.into_iter().map(|c| c.0.core()).collect();
    let rep = py
        .detach(|| closure_step(&add, &ins, target))
        .map_err(err)?;
    to_py(py, &rep)
}

/// Fraction of `population` containing any of `motifs` as an induced subnetwork.
#[pyfunction]
fn motif_fraction(motifs: Vec<PyCrn>, population: Vec<PyCrn>) -> f64 {
    let m: Vec<_> = motifs.into_iter().map(|c| c.0).collect();
    let p: Vec<_> = population.into_iter().map(|c| c.0).collect();
    motif_frequency(&m, &p)
}

/// One seeded draw: returns (rate constants, times, states, classification).
#[pyfunction]
#[pyo3(signature = (crn, kinetics = "ma", seed = 0, draw = 0))]
#[allow(clippy::type_complexity)]
fn simulate(
    py: Python<'_>,
    crn: &PyCrn,
    kinetics: &str,
    seed: u64,
    draw: u64,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>, String)> {
    let class = class_of(kinetics)?;
    let cfg = ScreenConfig::default();
    let (spec, _, traj) = py
        .detach(|| simulate_draw(&crn.0, class, seed, draw, &cfg))
        .map_err(err)?;
    let c = classify(&traj, cfg.tail_window, cfg.conv_tol);
    Ok((spec.k, traj.times, traj.states, format!("{c:?}")))
}

/// Sample up to `draws` parameter sets and certify the first oscillatory one.
#[pyfunction]
#[pyo3(signature = (crn, kinetics = "ma", seed = 0, draws = 1000))]
fn search(
    py: Python<'_>,
    crn: &PyCrn,
    kinetics: &str,
    seed: u64,
    draws: u64,
) -> PyResult<Py<PyAny>> {
    let class = class_of(kinetics)?;
    let cfg = ScreenConfig::default();
    let out = py
        .detach(|| search_sppo(&crn.0, class, seed, draws, &cfg))
        .map_err(err)?;
    to_py(py, &out)
}

/// Orbit record of the planar power-law set at parameter k.
#[pyfunction]
fn certify_power_law_set(py: Python<'_>, k: f64) -> PyResult<Py<PyAny>> {
    let rec = py
        .detach(|| xiv_orbit(k, &OrbitConfig::default()))
        .map_err(err)?;
    to_py(py, &rec)
}

/// The two-species one-reaction checks and the Hopf suite.
#[pyfunction]
#[pyo3(signature = (draws = 100, seed = 0))]
fn appendix_checks(py: Python<'_>, draws: u64, seed: u64) -> PyResult<Py<PyAny>> {
    let cfg = AppendixBConfig {
        draws,
        seed,
        ..AppendixBConfig::default()
    };
    let rep = py.detach(|| verify_appendix_b(&cfg)).map_err(err)?;
    to_py(py, &rep)
}

/// Totals and inheritance counts per (k, l); `budget` draws per network
/// for the simulation search (0 skips it).
#[pyfunction]
#[pyo3(signature = (max_k = 3, max_l = 3, budget = 0, seed = 0))]
fn table(
    py: Python<'_>,
    max_k: usize,
    max_l: usize,
    budget: u64,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let cfg = Table1Config {
        max_k,
        max_l,
        budget,
        seed,
        ..Table1Config::default()
    };
    let t = py.detach(|| table1(&cfg)).map_err(err)?;
    to_py(py, &t)
}

#[pymodule]
fn crn_osc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCrn>()?;
    m.add_function(wrap_pyfunction!(count, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(closure, m)?)?;
    m.add_function(wrap_pyfunction!(motif_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    m.add_function(wrap_pyfunction!(certify_power_law_set, m)?)?;
    m.add_function(wrap_pyfunction!(appendix_checks, m)?)?;
    m.add_function(wrap_pyfunction!(table, m)?)?;
    Ok(())
}
