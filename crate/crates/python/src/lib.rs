//! Python bindings: homomorphism enumeration, classification, the degeneracy
//! formula and a `Model` class wrapping the exact numerics.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qdlab::lattice::FaceOrder;
use qdlab::models::{Model as CoreModel, ModelSpec};
use qdlab::spectra::{self, StringKind};
use qdlab::{groups, Homomorphism};

create_exception!(qdlab, QdlabError, PyValueError);

fn err(e: qdlab::Error) -> PyErr {
    QdlabError::new_err(e.to_string())
}

/// Multipliers `n` of all homomorphisms `Z_matter -> Z_gauge`, `f(x) = n x`.
#[pyfunction]
fn enumerate_homomorphisms(matter: usize, gauge: usize) -> PyResult<Vec<usize>> {
    let homs = groups::enumerate_homomorphisms(matter, gauge).map_err(err)?;
    Ok(homs.iter().map(Homomorphism::multiplier).collect())
}

/// Class label and the kernel, image and cokernel orders of a coupling.
#[pyfunction]
fn classify<'py>(
    py: Python<'py>,
    gauge: usize,
    matter: usize,
    hom: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let c = groups::classify(gauge, matter, hom).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("class", format!("{:?}", c.class))?;
    d.set_item("kernel", c.kernel_order)?;
    d.set_item("image", c.image_order)?;
    d.set_item("cokernel", c.cokernel_order)?;
    d.set_item("deconfined_charges", c.deconfined_charges)?;
    Ok(d)
}

/// Predicted ground-space dimension `|ker f| |coker f|^(2 genus)`.
#[pyfunction]
#[pyo3(signature = (gauge, matter, hom, genus = 1))]
fn gsd_formula(gauge: usize, matter: usize, hom: usize, genus: u32) -> PyResult<u64> {
    let f = Homomorphism::new(matter, gauge, hom).map_err(err)?;
    Ok(groups::gsd_formula(&f, genus))
}

/// A quantum double model on a `rows x cols` torus.
#[pyclass(name = "Model", module = "qdlab", frozen)]
struct PyModel {
    inner: CoreModel,
}

impl PyModel {
    fn from_spec(spec: ModelSpec, right_first: bool) -> PyResult<Self> {
        let spec = if right_first {
            spec.with_face_order(FaceOrder::RightFirst)
        } else {
            spec
        };
        Ok(PyModel {
            inner: CoreModel::build(&spec).map_err(err)?,
        })
    }
}

#[pymethods]
impl PyModel {
    /// `D(Z_gauge)` without matter.
    #[staticmethod]
    #[pyo3(signature = (gauge, rows = 2, cols = 2))]
    fn double(gauge: usize, rows: usize, cols: usize) -> PyResult<Self> {
        Self::from_spec(ModelSpec::double(gauge, rows, cols), false)
    }

    /// `D^matter(Z_gauge)` with face matter coupled by `f(x) = hom * x`.
    #[staticmethod]
    #[pyo3(signature = (gauge, matter, hom, rows = 2, cols = 2, right_first = false))]
    fn dual(
        gauge: usize,
        matter: usize,
        hom: usize,
        rows: usize,
        cols: usize,
        right_first: bool,
    ) -> PyResult<Self> {
        Self::from_spec(ModelSpec::dual(gauge, matter, hom, rows, cols), right_first)
    }

    /// `D_matter(Z_gauge)` with vertex matter; `theta` is `trivial`, `regular` or `block:B:F`.
    #[staticmethod]
    #[pyo3(signature = (gauge, matter, theta = "trivial", rows = 2, cols = 2))]
    fn vertex(
        gauge: usize,
        matter: usize,
        theta: &str,
        rows: usize,
        cols: usize,
    ) -> PyResult<Self> {
        let theta = theta.parse().map_err(err)?;
        Self::from_spec(ModelSpec::vertex(gauge, matter, theta, rows, cols), false)
    }

    #[getter]
    fn hilbert_dimension(&self) -> u128 {
        self.inner.spec().dimension()
    }

    #[getter]
    fn ground_energy(&self) -> PyResult<f64> {
        Ok(self.inner.hamiltonian().map_err(err)?.ground_energy())
    }

    /// Exact ground-space dimension; refuses models above `cap`.
    #[pyo3(signature = (cap = spectra::DEFAULT_CAP))]
    fn ground_space_dimension(&self, py: Python<'_>, cap: usize) -> PyResult<u64> {
        py.detach(|| spectra::ground_space_dimension(&self.inner, cap))
            .map_err(err)
    }

    /// Largest commutator norm and projector defect over all terms.
    fn verify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = py.detach(|| self.inner.solvability_check()).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("terms", r.terms)?;
        d.set_item("pairs_checked", r.pairs_checked)?;
        d.set_item("max_commutator_norm", r.max_commutator_norm)?;
        d.set_item("max_projector_defect", r.max_projector_defect)?;
        d.set_item("max_hermiticity_defect", r.max_hermiticity_defect)?;
        d.set_item("solvable", r.is_solvable(qdlab::models::OPERATOR_TOL))?;
        Ok(d)
    }

    /// Energy above the ground state of open strings of charge `g`.
    #[pyo3(signature = (g, lengths, kind = "z"))]
    fn confinement(
        &self,
        py: Python<'_>,
        g: usize,
        lengths: Vec<usize>,
        kind: &str,
    ) -> PyResult<Vec<f64>> {
        let kind = match kind {
            "z" => StringKind::Z,
            "x" => StringKind::X,
            _ => {
                return Err(QdlabError::new_err(format!(
                    "unknown string kind '{kind}' (z, x)"
                )))
            }
        };
        let p = py
            .detach(|| spectra::string_profile(&self.inner, kind, g, &lengths))
            .map_err(err)?;
        Ok(p.energies())
    }

    /// Sorted eigenvalues of the Hamiltonian (dimension at most 4096).
    fn spectrum(&self, py: Python<'_>) -> PyResult<Vec<f64>> {
        let h = self.inner.hamiltonian().map_err(err)?;
        py.detach(|| h.dense_spectrum()).map_err(err)
    }

    /// `{(gauge_label, matter_label): [operator names]}` for face 0.
    fn w_operators<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let t = spectra::solve_w_operators(&self.inner).map_err(err)?;
        let d = PyDict::new(py);
        for e in &t.entries {
            let names: Vec<String> = e.monomials.iter().map(|m| m.name(t.matter)).collect();
            d.set_item((e.gauge_label, e.matter_label), names)?;
        }
        Ok(d)
    }

    /// Largest off-diagonal entry and formula error of edge `j` in the character basis.
    fn fourier<'py>(&self, py: Python<'py>, j: usize) -> PyResult<Bound<'py, PyDict>> {
        let r = spectra::diagonalize_edge_op(&self.inner, j).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("edge", r.edge)?;
        d.set_item("max_off_diagonal", r.max_off_diagonal)?;
        d.set_item("max_formula_error", r.max_formula_error)?;
        d.set_item(
            "eigenvalues",
            r.entries.iter().map(|e| e.value.re).collect::<Vec<f64>>(),
        )?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Model({})", self.inner.spec())
    }
}

#[pymodule]
#[pyo3(name = "qdlab")]
pub fn qdlab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QdlabError", m.py().get_type::<QdlabError>())?;
    m.add_function(wrap_pyfunction!(enumerate_homomorphisms, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(gsd_formula, m)?)?;
    m.add_class::<PyModel>()?;
    Ok(())
}
