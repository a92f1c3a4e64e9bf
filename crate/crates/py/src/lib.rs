use pyo3::prelude::*;

#[pymodule]
fn envloc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let _ = m;
    Ok(())
}
