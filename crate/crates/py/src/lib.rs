use pyo3::prelude::*;

#[pymodule]
fn c2plus_py(_py: Python<'_>, _m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
