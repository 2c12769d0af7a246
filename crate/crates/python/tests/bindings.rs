use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<F: FnOnce(&Bound<'_, PyDict>)>(f: F) {
    Python::initialize();
    Python::attach(|py| {
        let m = pyo3::wrap_pymodule!(buchstab_bounds_py::buchstab_bounds_py)(py);
        let globals = PyDict::new(py);
        globals.set_item("bb", m).unwrap();
        f(&globals);
    });
}

fn run(globals: &Bound<'_, PyDict>, code: &str) {
    let py = globals.py();
    let code = std::ffi::CString::new(code).unwrap();
    if let Err(e) = py.run(&code, Some(globals), None) {
        e.print(py);
        panic!("python snippet failed");
    }
}

#[test]
fn enclosures_and_table() {
    with_module(|g| {
        run(
            g,
            r#"
t = bb.Enclosure.ratio(1, 3)
assert t.contains(1 / 3) and 0 < t.width <= 2 * 2.0**-54
assert (bb.Enclosure(1.0) + bb.Enclosure(2.0)) == bb.Enclosure(3.0)
try:
    bb.Enclosure(1.0) / bb.Enclosure(-1.0, 1.0)
    raise AssertionError
except ZeroDivisionError:
    pass
table = bb.BuchstabTable(10.0, 1e-3)
assert table.omega(1.5).contains(2 / 3)
try:
    table.omega(11.0)
    raise AssertionError
except ValueError:
    pass
"#,
        )
    });
}

#[test]
fn terms_and_aggregates() {
    with_module(|g| {
        run(
            g,
            r#"
table = bb.BuchstabTable()
rs = [bb.compute_term(t, table, width=1e-8, width_4d=1e-5) for t in bb.term_ids()]
assert len(rs) == 16 and all(r.certified for r in rs)
assert bb.total_s(1.317, rs).hi < 1.0
assert bb.rho_coefficient(1.317, rs).hi < 0.838
tau, adm = bb.solve_tau(rs)
assert adm.startswith("1.31")
assert '"schema_version": 1' in bb.report_json(rs)
try:
    bb.compute_term("G9", table)
    raise AssertionError
except ValueError:
    pass
assert bb.empirical_rho(7) == 4
"#,
        )
    });
}
