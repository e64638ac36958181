//! Python bindings for cubic-core. Rationals cross the boundary as `"p/q"` strings;
//! any object whose `str()` parses as a rational (ints, `Fraction`) is accepted.

use cubic_core::abelian::{self, CubeGroupSpec, FiniteAbelianGroup};
use cubic_core::coupling::{self, Coupling};
use cubic_core::cubic::{verify_axioms_v1, verify_axioms_v2, CubicCoupling};
use cubic_core::exchange::{self, KernelMap, Pattern};
use cubic_core::host_kra::{self, FilteredAction};
use cubic_core::measure::{FiniteProbSpace, FunctionOnSpace, Partition};
use cubic_core::report::Report;
use cubic_core::scalar::{fmt_q, parse_q, ExactComplex, Scalar, Q};
use cubic_core::uniformity;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyTuple;

fn core_err(e: cubic_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rational(obj: &Bound<'_, PyAny>) -> PyResult<Q> {
    let s = obj.str()?.to_string();
    parse_q(&s).ok_or_else(|| PyValueError::new_err(format!("`{}` is not a rational", s)))
}

fn rationals(objs: &[Bound<'_, PyAny>]) -> PyResult<Vec<Q>> {
    objs.iter().map(rational).collect()
}

/// A value is a rational or a `(re, im)` pair of rationals.
fn scalar(obj: &Bound<'_, PyAny>) -> PyResult<ExactComplex> {
    if let Ok(t) = obj.cast::<PyTuple>() {
        if t.len() == 2 {
            return Ok(ExactComplex::new(rational(&t.get_item(0)?)?, rational(&t.get_item(1)?)?));
        }
    }
    Ok(ExactComplex::from_q(&rational(obj)?))
}

fn function(values: &[Bound<'_, PyAny>]) -> PyResult<FunctionOnSpace<ExactComplex>> {
    Ok(FunctionOnSpace::new(values.iter().map(scalar).collect::<PyResult<_>>()?))
}

fn scalar_out(v: &ExactComplex) -> String {
    match v.to_value() {
        serde_json::Value::String(s) => s,
        other => other.to_string(),
    }
}

fn space(weights: &[Bound<'_, PyAny>]) -> PyResult<FiniteProbSpace> {
    FiniteProbSpace::new(rationals(weights)?).map_err(core_err)
}

fn report_json(r: &Report) -> String {
    serde_json::to_string(&r.checks).expect("report serializes")
}

fn measure(mu: &Coupling) -> Vec<(Vec<u32>, String)> {
    mu.iter().map(|(t, m)| (t.clone(), fmt_q(m))).collect()
}

/// Finite abelian group `Z_{n_1} × ... × Z_{n_k}`.
#[pyclass(name = "Group", frozen)]
struct PyGroup {
    inner: FiniteAbelianGroup,
}

#[pymethods]
impl PyGroup {
    #[new]
    fn new(orders: Vec<u32>) -> PyResult<Self> {
        Ok(PyGroup { inner: FiniteAbelianGroup::new(orders).map_err(core_err)? })
    }

    #[getter]
    fn orders(&self) -> Vec<u32> {
        self.inner.orders().to_vec()
    }

    #[getter]
    fn order(&self) -> u32 {
        self.inner.order()
    }

    fn add(&self, a: u32, b: u32) -> u32 {
        self.inner.add(a, b)
    }

    fn __repr__(&self) -> String {
        format!("Group({:?})", self.inner.orders())
    }
}

/// A cubic coupling with lazily built levels `μ^⟦n⟧`.
#[pyclass(name = "CubicCoupling", frozen)]
struct PyCubicCoupling {
    inner: CubicCoupling,
}

#[pymethods]
impl PyCubicCoupling {
    /// The standard cube coupling of a group up to `horizon`.
    #[staticmethod]
    fn standard(group: &PyGroup, horizon: usize) -> Self {
        PyCubicCoupling { inner: CubicCoupling::standard(&group.inner, horizon) }
    }

    /// The Host-Kra coupling of a filtered system; `levels[j]` holds generators of `G_{j+1}`.
    #[staticmethod]
    fn host_kra(weights: Vec<Bound<'_, PyAny>>, levels: Vec<Vec<Vec<u32>>>, n_max: usize) -> PyResult<Self> {
        let action = FilteredAction::new(space(&weights)?, levels).map_err(core_err)?;
        Ok(PyCubicCoupling { inner: host_kra::host_kra_coupling(&action, n_max).map_err(core_err)? })
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    /// Support of `μ^⟦n⟧` as `(tuple, "p/q")` pairs, tuples in vertex mask order.
    fn level(&self, n: usize) -> PyResult<Vec<(Vec<u32>, String)>> {
        Ok(measure(self.inner.level(n).map_err(core_err)?.as_ref()))
    }

    /// Report of the chosen axiom system as a JSON string.
    #[pyo3(signature = (n_max, variant = "v1"))]
    fn verify_axioms(&self, n_max: usize, variant: &str) -> PyResult<(bool, String)> {
        let r = match variant {
            "v1" => verify_axioms_v1(&self.inner, n_max),
            "v2" => verify_axioms_v2(&self.inner, n_max),
            _ => return Err(PyValueError::new_err("variant must be \"v1\" or \"v2\"")),
        }
        .map_err(core_err)?;
        Ok((r.passed(), report_json(&r)))
    }

    /// Powered seminorm `‖f‖^{2^d}` as a string, and its root.
    fn u_seminorm(&self, values: Vec<Bound<'_, PyAny>>, d: usize) -> PyResult<(String, f64)> {
        let f = function(&values)?;
        let pow = uniformity::u_seminorm_pow(&self.inner, d, &f).map_err(core_err)?;
        Ok((scalar_out(&pow), uniformity::display_root(&pow, d)))
    }

    /// Convolution of corner functions listed in vertex mask order.
    fn u_convolution(&self, corner: Vec<Vec<Bound<'_, PyAny>>>, d: usize) -> PyResult<Vec<String>> {
        let fs = corner.iter().map(|v| function(v)).collect::<PyResult<Vec<_>>>()?;
        let c = uniformity::u_convolution(&self.inner, d, &fs).map_err(core_err)?;
        Ok(c.values.iter().map(scalar_out).collect())
    }

    /// Blocks of the Fourier factor `F_{d-1}`.
    fn fourier_factor(&self, d: usize) -> PyResult<Vec<Vec<usize>>> {
        Ok(uniformity::fourier_factor(&self.inner, d).map_err(core_err)?.blocks().to_vec())
    }
}

/// `t(S1, S2, f)` for the even/odd pattern on `⟦k⟧`.
#[pyfunction]
fn pattern_density(group: &PyGroup, values: Vec<Bound<'_, PyAny>>, k: usize) -> PyResult<String> {
    let p = Pattern::even_odd(k).map_err(core_err)?;
    Ok(scalar_out(&exchange::pattern_density(&group.inner, &function(&values)?, &p).map_err(core_err)?))
}

/// Support tuples with their masses as rational strings.
type Measure = Vec<(Vec<u32>, String)>;

/// Relative square of a partition: `(measure, idempotent, recovered blocks)`.
#[pyfunction]
fn relative_square(weights: Vec<Bound<'_, PyAny>>, blocks: Vec<Vec<usize>>) -> PyResult<(Measure, bool, Vec<Vec<usize>>)> {
    let s = space(&weights)?;
    let p = Partition::from_blocks(&s, &blocks).map_err(core_err)?;
    let mu = coupling::relative_square(&s, &p).map_err(core_err)?;
    let ok = coupling::is_idempotent(&mu).map_err(core_err)?;
    let rec = if ok { coupling::recover_factor(&mu).map_err(core_err)?.blocks().to_vec() } else { Vec::new() };
    Ok((measure(&mu), ok, rec))
}

/// Whether the character tuple `eta` annihilates the cube group, and the dual criterion.
#[pyfunction]
#[pyo3(signature = (group, n, k, eta, rooted = false))]
fn annihilator(group: &PyGroup, n: usize, k: i64, eta: Vec<u32>, rooted: bool) -> PyResult<(bool, bool)> {
    let spec = CubeGroupSpec::new(group.inner.clone(), n, k, rooted);
    Ok((abelian::annihilates(&eta, &spec).map_err(core_err)?, abelian::dual_criterion(&eta, &spec).map_err(core_err)?))
}

/// Samples of `(Y_v)_{v ∈ ⟦n⟧}` for the kernel `table[x][b]`.
#[pyfunction]
#[pyo3(signature = (group, table, window, samples, seed = 0))]
fn sample_zeta(group: &PyGroup, table: Vec<Vec<Bound<'_, PyAny>>>, window: usize, samples: usize, seed: u64) -> PyResult<Vec<Vec<u32>>> {
    let rows = table.iter().map(|r| rationals(r)).collect::<PyResult<Vec<_>>>()?;
    let kernel = KernelMap::new(group.inner.clone(), rows).map_err(core_err)?;
    Ok(exchange::sample_zeta(&kernel, window, samples, seed).map_err(core_err)?.samples)
}

#[pymodule]
fn cubic(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGroup>()?;
    m.add_class::<PyCubicCoupling>()?;
    m.add_function(wrap_pyfunction!(pattern_density, m)?)?;
    m.add_function(wrap_pyfunction!(relative_square, m)?)?;
    m.add_function(wrap_pyfunction!(annihilator, m)?)?;
    m.add_function(wrap_pyfunction!(sample_zeta, m)?)?;
    Ok(())
}
