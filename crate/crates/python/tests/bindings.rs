use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::wrap_pymodule;

#[test]
fn module_exposes_systems_and_census() {
    Python::initialize();
    Python::attach(|py| {
        let module = wrap_pymodule!(maltsev_py::maltsev_py)(py);
        let locals = PyDict::new(py);
        locals.set_item("m", module).unwrap();
        let code = c"
s = m.System.builtin('maltsev')
ok = s.p_of_k(2) == 2 and s.entails('f(x,x,y) = y') and not s.almost_surely_idemprimal()
alg = s.sample(3, 1)[0]
ok = ok and alg.n == 3 and alg.is_subuniverse([0, 1, 2])
csv = m.census(s, [4], 50, 1, 'subalg2')
ok = ok and csv.count('\\n') == 2
";
        py.run(code, None, Some(&locals)).unwrap();
        let ok: bool = locals.get_item("ok").unwrap().unwrap().extract().unwrap();
        assert!(ok);
    });
}
