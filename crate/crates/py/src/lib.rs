use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nrsense::harness::metrics::{algorithm_label, method_label};
use nrsense::harness::{run_scenario, summarize, trial_seeds, write_outputs, Manifest, Scenario};
use nrsense::periodogram::{estimate_delay, estimate_doppler, PeriodogramOptions};
use nrsense::subspace::{delay_rayleigh, delay_split, doppler_rayleigh, doppler_split, esprit, music_search, MusicOptions};
use nrsense::{c64, CpMethod, Error, NoiseSpec, Target, TargetSet};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::Csv(_) | Error::EigenFailure => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn method(s: &str) -> PyResult<CpMethod> {
    s.parse().map_err(py_err)
}

#[pyclass(name = "Numerology", module = "nrsense_py", frozen)]
#[derive(Clone)]
struct PyNumerology {
    inner: nrsense::Numerology,
}

#[pymethods]
impl PyNumerology {
    #[new]
    #[pyo3(signature = (mu = 3, n_rb = 264, n_symb = None, carrier_hz = None, c0 = None))]
    fn new(mu: u32, n_rb: usize, n_symb: Option<usize>, carrier_hz: Option<f64>, c0: Option<f64>) -> PyResult<Self> {
        let n_symb = n_symb.unwrap_or_else(|| nrsense::Numerology::symbols_per_frame(mu));
        let mut inner = nrsense::Numerology::new(mu, n_rb, n_symb).map_err(py_err)?;
        if let Some(f) = carrier_hz {
            inner = inner.with_carrier(f);
        }
        if let Some(c) = c0 {
            inner = inner.with_c0(c);
        }
        Ok(Self { inner })
    }

    #[getter]
    fn n_sc(&self) -> usize {
        self.inner.n_sc()
    }
    #[getter]
    fn n_symb(&self) -> usize {
        self.inner.n_symb()
    }
    #[getter]
    fn delta_f(&self) -> f64 {
        self.inner.delta_f()
    }
    #[getter]
    fn t_c(&self) -> f64 {
        self.inner.t_c()
    }

    fn frame_samples(&self) -> u64 {
        self.inner.frame_samples()
    }

    fn start_sample(&self, l: usize) -> PyResult<u64> {
        self.inner.start_sample(l).map_err(py_err)
    }

    fn is_long_cp(&self, l: usize) -> bool {
        self.inner.is_long_cp(l)
    }

    #[pyo3(signature = (method = "III"))]
    fn symbol_times(&self, method: &str) -> PyResult<Vec<f64>> {
        self.inner.symbol_times(self.inner.n_symb(), self::method(method)?).map_err(py_err)
    }

    fn excess_phase(&self, doppler_hz: f64, l: usize) -> PyResult<f64> {
        self.inner.excess_phase(doppler_hz, l).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Numerology(mu={}, n_rb={}, n_symb={})",
            self.inner.mu(),
            self.inner.n_rb(),
            self.inner.n_symb()
        )
    }
}

/// Radar data matrix: subcarriers along rows, symbols along columns.
#[pyclass(name = "RadarMatrix", module = "nrsense_py", frozen)]
struct PyRadarMatrix {
    inner: nrsense::RadarDataMatrix,
}

#[pymethods]
impl PyRadarMatrix {
    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.n_subcarriers(), self.inner.n_symbols())
    }

    fn get(&self, k: usize, l: usize) -> PyResult<c64> {
        let (rows, cols) = self.shape();
        if k >= rows || l >= cols {
            return Err(PyValueError::new_err(format!("index ({k}, {l}) outside {rows}x{cols}")));
        }
        Ok(self.inner.data[(k, l)])
    }

    /// Row-major nested lists of complex numbers.
    fn to_list(&self) -> Vec<Vec<c64>> {
        let (rows, cols) = self.shape();
        (0..rows).map(|k| (0..cols).map(|l| self.inner.data[(k, l)]).collect()).collect()
    }
}

/// Noisy symbol-domain observation. `targets` holds `(delay_s, doppler_hz)`
/// or `(delay_s, doppler_hz, alpha)` tuples.
#[pyfunction]
#[pyo3(signature = (numerology, targets, snr_db = None, seed = 0))]
fn synthesize(
    numerology: &PyNumerology,
    targets: Vec<Bound<'_, PyAny>>,
    snr_db: Option<f64>,
    seed: u64,
) -> PyResult<PyRadarMatrix> {
    let mut set = Vec::with_capacity(targets.len());
    for t in targets {
        let target = if let Ok((d, f, a)) = t.extract::<(f64, f64, c64)>() {
            Target::new(a, d, f)
        } else {
            let (d, f): (f64, f64) = t.extract()?;
            Target::unit(d, f)
        };
        set.push(target);
    }
    let set = TargetSet::new(set);
    let num = &numerology.inner;
    let y = nrsense::synthesize_symbol_domain(num, &set, num.n_sc(), num.n_symb()).map_err(py_err)?;
    let noise = match snr_db {
        Some(s) => NoiseSpec::new(s, seed),
        None => NoiseSpec::noiseless(),
    };
    let inner = nrsense::add_awgn(&y, &noise, set.total_power()).map_err(py_err)?;
    Ok(PyRadarMatrix { inner })
}

/// `(axis, values)` of the Doppler periodogram.
#[pyfunction]
#[pyo3(signature = (matrix, method = "III", n_fft = None))]
fn doppler_periodogram(matrix: &PyRadarMatrix, method: &str, n_fft: Option<usize>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let s = nrsense::doppler_periodogram(&matrix.inner, self::method(method)?, n_fft).map_err(py_err)?;
    Ok((s.axis, s.values))
}

#[pyfunction]
#[pyo3(signature = (matrix, n_fft = None))]
fn delay_periodogram(matrix: &PyRadarMatrix, n_fft: Option<usize>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let s = nrsense::delay_periodogram(&matrix.inner, n_fft).map_err(py_err)?;
    Ok((s.axis, s.values))
}

/// Estimates along `axis` ("doppler" or "delay") with `algorithm`
/// ("periodogram", "music" or "esprit"), in Hz or seconds.
#[pyfunction]
#[pyo3(signature = (matrix, algorithm, axis, p, method = "III", rho = 0.4))]
fn estimate(matrix: &PyRadarMatrix, algorithm: &str, axis: &str, p: usize, method: &str, rho: f64) -> PyResult<Vec<f64>> {
    let y = &matrix.inner;
    let num = &y.numerology;
    let doppler = match axis.to_ascii_lowercase().as_str() {
        "doppler" => true,
        "delay" => false,
        other => return Err(PyValueError::new_err(format!("unknown axis {other:?}"))),
    };
    let m = if doppler { Some(self::method(method)?) } else { None };
    let opts = PeriodogramOptions::default();
    let coarse = || match m {
        Some(m) => estimate_doppler(y, m, p, &opts),
        None => estimate_delay(y, p, &opts),
    };
    let split = || if doppler { doppler_split(y, p) } else { delay_split(y, p, rho, false) };
    let values = match algorithm.to_ascii_lowercase().as_str() {
        "periodogram" => coarse().map(|e| e.peaks.positions()),
        "esprit" => split().and_then(|s| esprit(&s, num, m)),
        "music" => coarse().and_then(|c| {
            let rayleigh = match m {
                Some(m) => doppler_rayleigh(num, y.n_symbols(), m),
                None => delay_rayleigh(num, y.n_subcarriers()),
            };
            let mut positions = c.peaks.positions();
            if positions.is_empty() {
                positions.push(0.0);
            }
            let s = split()?;
            music_search(&s, num, m, &positions, p, rayleigh, &MusicOptions::default()).map(|e| e.peaks.positions())
        }),
        other => return Err(PyValueError::new_err(format!("unknown algorithm {other:?}"))),
    };
    values.map_err(py_err)
}

/// Run a scenario file; returns the metrics rows as dicts and, when `out`
/// is given, writes metrics.csv, trials.csv and manifest.json there.
#[pyfunction]
#[pyo3(signature = (path, trials = None, seed = None, out = None))]
fn simulate<'py>(
    py: Python<'py>,
    path: PathBuf,
    trials: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut s = Scenario::from_path(&path).map_err(py_err)?;
    if let Some(n) = trials {
        s.n_trials = n.max(1);
    }
    if let Some(seed) = seed {
        s.seed = seed;
    }
    let records = py.detach(|| run_scenario(&s, false)).map_err(py_err)?;
    let summary = summarize(&records, &s).map_err(py_err)?;
    if let Some(dir) = out {
        let command = vec!["nrsense.simulate".to_string(), path.display().to_string()];
        write_outputs(&dir, &summary, &records, &s, |files| {
            Manifest::new(&s, Some(&path), command, trial_seeds(&s), files)
        })
        .map_err(py_err)?;
    }
    summary
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("scenario", &r.scenario)?;
            d.set_item("algorithm", algorithm_label(r.algorithm, r.axis))?;
            d.set_item("method", method_label(r.method))?;
            d.set_item("snr_db", r.snr_db)?;
            d.set_item("target_idx", r.target_idx)?;
            d.set_item("truth", r.truth)?;
            d.set_item("bias", r.bias)?;
            d.set_item("rmse", r.rmse)?;
            d.set_item("resolution_prob", r.resolution_prob)?;
            d.set_item("n_trials", r.n_trials)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn nrsense_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNumerology>()?;
    m.add_class::<PyRadarMatrix>()?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(doppler_periodogram, m)?)?;
    m.add_function(wrap_pyfunction!(delay_periodogram, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
