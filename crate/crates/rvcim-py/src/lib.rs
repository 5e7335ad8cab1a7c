use pyo3::prelude::*;

#[pymodule]
fn rvcim_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
