//! Python bindings. Problems and reports cross the boundary as JSON text in
//! the same schema as the command line.

use hyperasym::io::{self, ProblemFile, RunError, RunOptions};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(hyperasym_py, HyperasymError, PyException);
create_exception!(hyperasym_py, InputError, HyperasymError);
create_exception!(hyperasym_py, NonGenericUnsupported, HyperasymError);
create_exception!(hyperasym_py, Undecidable, HyperasymError);

fn to_py(e: RunError) -> PyErr {
    let msg = e.to_string();
    match e {
        RunError::Input(_) => InputError::new_err(msg),
        RunError::NonGenericUnsupported(_) => NonGenericUnsupported::new_err(msg),
        RunError::Undecidable(_) => Undecidable::new_err(msg),
        RunError::Failed(_) => HyperasymError::new_err(msg),
    }
}

fn options(precision: u32, max_precision: u32) -> RunOptions {
    RunOptions {
        precision,
        max_precision,
        ..RunOptions::default()
    }
}

pub fn parse(problem: &str) -> Result<ProblemFile, RunError> {
    Ok(ProblemFile::parse(problem)?)
}

/// Full analysis; returns the report as canonical JSON.
#[pyfunction]
#[pyo3(signature = (problem, precision = 256, max_precision = 4096))]
fn analyze(problem: &str, precision: u32, max_precision: u32) -> PyResult<String> {
    let file = parse(problem).map_err(to_py)?;
    let report = io::analyze(&file, &options(precision, max_precision)).map_err(to_py)?;
    Ok(report.to_json())
}

#[pyfunction]
#[pyo3(signature = (problem, precision = 256, max_precision = 4096))]
fn critical_points(problem: &str, precision: u32, max_precision: u32) -> PyResult<String> {
    let file = parse(problem).map_err(to_py)?;
    let report = io::critical_points(&file, &options(precision, max_precision)).map_err(to_py)?;
    Ok(report.to_json())
}

#[pyfunction]
#[pyo3(signature = (problem, verify_degree = 10))]
fn decompose(problem: &str, verify_degree: usize) -> PyResult<String> {
    let file = parse(problem).map_err(to_py)?;
    let opts = RunOptions {
        verify_degree,
        ..RunOptions::default()
    };
    Ok(io::decompose(&file, &opts).map_err(to_py)?.to_json())
}

/// Exact Taylor coefficient as a `"p/q"` string (without any `exp(c0)` factor).
#[pyfunction]
fn coeff(problem: &str, index: Vec<usize>) -> PyResult<String> {
    let file = parse(problem).map_err(to_py)?;
    let report = io::coeff(&file, &index, &RunOptions::default()).map_err(to_py)?;
    Ok(report.coefficient.map(|c| c.coefficient).unwrap_or_default())
}

#[pyfunction]
#[pyo3(signature = (problem, nmax = 40, tolerance = 0.15))]
fn verify(problem: &str, nmax: usize, tolerance: f64) -> PyResult<String> {
    let file = parse(problem).map_err(to_py)?;
    let opts = RunOptions {
        nmax,
        tolerance,
        ..RunOptions::default()
    };
    Ok(io::verify(&file, &opts).map_err(to_py)?.to_json())
}

/// Plot document as JSON; `bbox` is `[x_min, x_max, y_min, y_max]` as strings.
#[pyfunction]
#[pyo3(signature = (problem, bbox = None))]
fn plot_data(problem: &str, bbox: Option<Vec<String>>) -> PyResult<String> {
    let file = parse(problem).map_err(to_py)?;
    let bbox = match bbox {
        Some(v) if v.len() == 4 => {
            let q = v
                .iter()
                .map(|s| io::commands::parse_rational_arg(s))
                .collect::<Result<Vec<_>, _>>()
                .map_err(to_py)?;
            Some([q[0].clone(), q[1].clone(), q[2].clone(), q[3].clone()])
        }
        Some(_) => return Err(InputError::new_err("bbox needs four values")),
        None => None,
    };
    Ok(io::plot_data(&file, bbox, &RunOptions::default()).map_err(to_py)?.to_json())
}

/// `∫ (x + i)^{-k} e^{-a x²/2} dx` as a complex number.
#[pyfunction]
fn neg_gauss_moment(k: u32, a: f64) -> PyResult<(f64, f64)> {
    let z = hyperasym::nongeneric::neg_gauss_moment(k, a).map_err(|e| InputError::new_err(e.to_string()))?;
    Ok((z.re, z.im))
}

#[pymodule]
fn hyperasym_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(critical_points, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(coeff, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(plot_data, m)?)?;
    m.add_function(wrap_pyfunction!(neg_gauss_moment, m)?)?;
    m.add("HyperasymError", m.py().get_type::<HyperasymError>())?;
    m.add("InputError", m.py().get_type::<InputError>())?;
    m.add("NonGenericUnsupported", m.py().get_type::<NonGenericUnsupported>())?;
    m.add("Undecidable", m.py().get_type::<Undecidable>())?;
    Ok(())
}
