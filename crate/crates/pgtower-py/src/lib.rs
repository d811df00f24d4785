//! Python bindings: presentations, descendant trees, covers and field identification.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use pgtower::artin::{artin_pattern, ipad2, tkt_by_name};
use pgtower::fields;
use pgtower::pcgroup::{invariants, Element, PcPresentation};
use pgtower::pgen::{self, build_tree, coclass_two_root, p_cover, to_dot, PruneSpec, TreeMode, TreeOptions};
use pgtower::tower::{self, FieldContext};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Converts any serializable value into plain Python objects.
fn to_py<T: serde::Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let s = serde_json::to_string(v).map_err(err)?;
    Ok(py.import("json")?.call_method1("loads", (s,))?.unbind())
}

/// A finite p-group given by a consistent power-commutator presentation.
#[pyclass(name = "PcGroup", module = "pgtower", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPcGroup {
    inner: PcPresentation,
}

impl PyPcGroup {
    fn element(&self, exps: Vec<u32>) -> PyResult<Element> {
        let n = self.inner.ngens();
        if exps.len() != n {
            return Err(PyValueError::new_err(format!("expected {n} exponents, got {}", exps.len())));
        }
        let p = self.inner.prime();
        if exps.iter().any(|&e| e >= p) {
            return Err(PyValueError::new_err(format!("exponents must lie in 0..{p}")));
        }
        Ok(Element(exps))
    }
}

#[pymethods]
impl PyPcGroup {
    #[staticmethod]
    fn elementary_abelian(p: u32, rank: usize) -> PyResult<Self> {
        Ok(Self { inner: PcPresentation::elementary_abelian(p, rank).map_err(err)? })
    }

    #[staticmethod]
    fn abelian(p: u32, exponents: Vec<u32>) -> PyResult<Self> {
        Ok(Self { inner: PcPresentation::abelian(p, &exponents).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: PcPresentation::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn prime(&self) -> u32 {
        self.inner.prime()
    }

    #[getter]
    fn ngens(&self) -> usize {
        self.inner.ngens()
    }

    /// Group order as `p^n`.
    fn order(&self) -> u128 {
        (self.inner.prime() as u128).pow(self.inner.ngens() as u32)
    }

    fn is_consistent(&self) -> bool {
        self.inner.consistency_check()
    }

    /// Product of two elements given by normal-form exponent vectors.
    fn multiply(&self, x: Vec<u32>, y: Vec<u32>) -> PyResult<Vec<u32>> {
        let (x, y) = (self.element(x)?, self.element(y)?);
        Ok(self.inner.mul(&x, &y).map_err(err)?.0)
    }

    fn inverse(&self, x: Vec<u32>) -> PyResult<Vec<u32>> {
        let x = self.element(x)?;
        Ok(self.inner.inverse(&x).map_err(err)?.0)
    }

    /// Class, coclass, derived length, center, Artin pattern and fingerprint as a dict.
    fn invariants(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let inv = invariants(&self.inner).map_err(err)?;
        let val = serde_json::json!({
            "class": inv.series.class,
            "coclass": inv.series.coclass,
            "derived_length": inv.series.derived_length,
            "center_type": inv.series.center_type.digits(),
            "tkt": inv.pattern.tkt().to_string(),
            "ipad1": inv.pattern.ipad1_string(),
            "ipad2": inv.ipad2.render(),
            "fingerprint": inv.fingerprint,
        });
        to_py(py, &val)
    }

    /// `(kappa, tau1)` as strings, in subgroup order.
    fn artin_pattern(&self) -> PyResult<(String, Vec<String>)> {
        let pat = artin_pattern(&self.inner).map_err(err)?;
        let tau1 = pat.tau_ordered.get(1).cloned().unwrap_or_default();
        Ok((pat.tkt().to_string(), tau1.iter().map(|t| t.digits()).collect()))
    }

    fn ipad1(&self) -> PyResult<String> {
        Ok(artin_pattern(&self.inner).map_err(err)?.ipad1_string())
    }

    fn ipad2(&self) -> PyResult<String> {
        Ok(ipad2(&self.inner).map_err(err)?.render())
    }

    /// `(mu, nu)`: relation rank and nuclear rank.
    fn p_cover_ranks(&self) -> PyResult<(usize, usize)> {
        let c = p_cover(&self.inner).map_err(err)?;
        Ok((c.mu, c.nu))
    }

    fn gi_automorphism_exists(&self) -> PyResult<bool> {
        tower::gi_automorphism_exists(&self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("PcGroup(order={}^{})", self.inner.prime(), self.inner.ngens())
    }
}

/// A descendant tree of finite p-groups.
#[pyclass(name = "DescendantTree", module = "pgtower", frozen)]
struct PyTree {
    inner: pgen::DescendantTree,
}

#[pymethods]
impl PyTree {
    /// Builds the tree of `root` up to order `p^max_order`.
    #[staticmethod]
    #[pyo3(signature = (root, max_order, mode = "full", root_label = "R", max_nodes = None))]
    fn build(root: &PyPcGroup, max_order: usize, mode: &str, root_label: &str, max_nodes: Option<usize>) -> PyResult<Self> {
        let mut opts = TreeOptions::new(root_label, max_order);
        opts.mode = parse_mode(mode)?;
        opts.max_nodes = max_nodes;
        Ok(Self { inner: build_tree(&root.inner, &opts).map_err(err)? })
    }

    /// The pruned tree rooted at the coclass-2 vertex of order `p^5` with the named kernel type.
    #[staticmethod]
    #[pyo3(signature = (tkt, max_order, p = 3, mode = "full"))]
    fn pruned(tkt: &str, max_order: usize, p: u32, mode: &str) -> PyResult<Self> {
        let k = tkt_by_name(tkt).map_err(err)?;
        let root = coclass_two_root(p, &k).map_err(err)?;
        let mut opts = TreeOptions::new("R", max_order);
        opts.mode = parse_mode(mode)?;
        opts.prune = PruneSpec::by_tkt(k, 0);
        Ok(Self { inner: build_tree(&root.presentation, &opts).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: pgen::DescendantTree::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    fn to_dot(&self) -> String {
        to_dot(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn truncated(&self) -> bool {
        self.inner.truncated
    }

    fn labels(&self) -> Vec<String> {
        self.inner.nodes.iter().map(|v| v.label.clone()).collect()
    }

    fn edges(&self) -> Vec<(String, String)> {
        self.inner.edges().into_iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    fn mainline(&self) -> Vec<String> {
        pgen::mainline(&self.inner)
    }

    /// Vertex data without the presentation.
    fn node(&self, py: Python<'_>, label: &str) -> PyResult<Py<PyAny>> {
        let v = self.inner.node(label).map_err(err)?;
        let val = serde_json::json!({
            "label": v.label,
            "parent": v.parent,
            "order_exponent": v.order_exponent,
            "class": v.class,
            "coclass": v.coclass,
            "derived_length": v.derived_length,
            "center_type": v.center_type.digits(),
            "tkt": v.tkt.to_string(),
            "tkt_name": v.tkt_name,
            "tau1": v.tau1.iter().map(|t| t.digits()).collect::<Vec<_>>(),
            "mu": v.mu,
            "nu": v.nu,
            "mainline": v.mainline,
            "children": v.children,
            "vertex_class": pgen::VertexClass::of(v).name(),
        });
        to_py(py, &val)
    }

    fn group(&self, label: &str) -> PyResult<PyPcGroup> {
        Ok(PyPcGroup { inner: self.inner.node(label).map_err(err)?.presentation.clone() })
    }

    /// Members of the cover of `anchor`, optionally restricted by a field context.
    #[pyo3(signature = (anchor, max_order = None, ctx = None))]
    fn cover(&self, py: Python<'_>, anchor: &str, max_order: Option<usize>, ctx: Option<&str>) -> PyResult<Py<PyAny>> {
        let mut c = tower::cover(anchor, &self.inner, max_order.unwrap_or(self.inner.max_order)).map_err(err)?;
        if let Some(ctx) = ctx {
            c = tower::shafarevich_cover(&c, &FieldContext::parse(ctx).map_err(err)?);
        }
        to_py(py, &c)
    }

    /// Identifies every record of a dataset (`bundled/<name>` or a file path).
    fn identify(&self, py: Python<'_>, dataset: &str) -> PyResult<Py<PyAny>> {
        let ds = load(dataset)?;
        let rows = fields::identify_all(&ds.records, &self.inner).map_err(err)?;
        let rows: Vec<_> = rows.into_iter().map(|(r, res)| serde_json::json!({"record": r, "result": res})).collect();
        to_py(py, &rows)
    }

    fn __repr__(&self) -> String {
        format!("DescendantTree(root={:?}, vertices={}, max_order={})", self.inner.root, self.inner.len(), self.inner.max_order)
    }
}

fn parse_mode(mode: &str) -> PyResult<TreeMode> {
    match mode {
        "full" => Ok(TreeMode::Full),
        "coclass" => Ok(TreeMode::Coclass),
        _ => Err(PyValueError::new_err(format!("mode must be 'full' or 'coclass', got {mode:?}"))),
    }
}

fn load(spec: &str) -> PyResult<fields::Dataset> {
    match spec.strip_prefix("bundled/") {
        Some(name) => fields::bundled(name).map_err(err),
        None => fields::load_dataset(std::path::Path::new(spec), false).map_err(err),
    }
}

/// Records of a dataset as dicts, with rejected-row diagnostics.
#[pyfunction]
fn load_fields(py: Python<'_>, spec: &str) -> PyResult<Py<PyAny>> {
    to_py(py, &load(spec)?)
}

/// Canonical kernel type for a name such as `"c.18"`.
#[pyfunction]
fn tkt(name: &str) -> PyResult<String> {
    Ok(tkt_by_name(name).map_err(err)?.to_string())
}

/// Admissible relation ranks `(lo, hi)` for a tower group of generator rank `d1` in the given context.
#[pyfunction]
fn shafarevich_bound(ctx: &str, d1: usize) -> PyResult<(usize, usize)> {
    let r = tower::shafarevich_bound(&FieldContext::parse(ctx).map_err(err)?, d1);
    Ok((*r.start(), *r.end()))
}

#[pyfunction]
fn gs_infinite_test(d1: usize, d2: usize) -> bool {
    tower::gs_infinite_test(d1, d2)
}

#[pymodule]
#[pyo3(name = "pgtower")]
fn pgtower_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPcGroup>()?;
    m.add_class::<PyTree>()?;
    m.add_function(wrap_pyfunction!(load_fields, m)?)?;
    m.add_function(wrap_pyfunction!(tkt, m)?)?;
    m.add_function(wrap_pyfunction!(shafarevich_bound, m)?)?;
    m.add_function(wrap_pyfunction!(gs_infinite_test, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
