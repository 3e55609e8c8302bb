use std::path::PathBuf;
use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use sdb_core::database::{canonicalize_table_keys, global_table, is_isomorphic, violations, Database};
use sdb_core::keysheaf::CylinderSheaf;
use sdb_core::schema::{enumerate_subschemas, Schema, SchemaMorphism};
use sdb_core::script::{self, Op, OpArgs, RunOptions};
use sdb_core::storage::{self, Document};
use sdb_core::table::{project_table, select_table, union_all, Table};
use sdb_core::typespec::TypeSpec;

fn py_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse(text: &str) -> PyResult<Document> {
    Document::from_text(text).map_err(py_err)
}

/// Wraps any document in its Python class.
fn wrap(py: Python<'_>, doc: Document) -> PyResult<Py<PyAny>> {
    Ok(match doc {
        Document::TypeSpec(t) => Py::new(py, PyTypeSpec(t))?.into_any(),
        Document::Schema(x) => Py::new(py, PySchema(x))?.into_any(),
        Document::Table(t) => Py::new(py, PyTable(t))?.into_any(),
        Document::Database(d) => Py::new(py, PyDatabase(d))?.into_any(),
        Document::Cylinder(c) => Py::new(py, PyCylinder(c))?.into_any(),
        Document::Morphism(m) => Py::new(py, PyMorphism(m))?.into_any(),
    })
}

fn apply(py: Python<'_>, op: Op, operands: &[Document], args: OpArgs) -> PyResult<Py<PyAny>> {
    let refs: Vec<&Document> = operands.iter().collect();
    wrap(py, script::apply(op, &refs, &args).map_err(py_err)?)
}

#[pyclass(name = "TypeSpec", frozen)]
struct PyTypeSpec(Arc<TypeSpec>);

#[pymethods]
impl PyTypeSpec {
    /// Int, Str, Bool.
    #[staticmethod]
    fn standard() -> Self {
        PyTypeSpec(Arc::new(TypeSpec::standard()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match parse(text)? {
            Document::TypeSpec(t) => Ok(PyTypeSpec(t)),
            other => Err(py_err(format!("expected a typespec, found a {}", other.kind()))),
        }
    }

    fn to_json(&self) -> String {
        Document::TypeSpec(self.0.clone()).to_text()
    }

    fn type_names(&self) -> Vec<String> {
        self.0.types().map(|(n, _)| n.to_string()).collect()
    }
}

#[pyclass(name = "Schema", frozen)]
struct PySchema(Arc<Schema>);

#[pymethods]
impl PySchema {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match parse(text)? {
            Document::Schema(x) => Ok(PySchema(x)),
            other => Err(py_err(format!("expected a schema, found a {}", other.kind()))),
        }
    }

    fn to_json(&self) -> String {
        Document::Schema(self.0.clone()).to_text()
    }

    fn ids(&self) -> Vec<String> {
        (0..self.0.len()).map(|s| self.0.id(s).to_string()).collect()
    }

    fn dim(&self, id: &str) -> PyResult<usize> {
        Ok(self.0.dim(self.0.index_of(id).map_err(py_err)?))
    }

    fn subschema_count(&self) -> PyResult<usize> {
        Ok(enumerate_subschemas(&self.0).map_err(py_err)?.len())
    }

    fn to_dot(&self) -> String {
        storage::render_schema(&self.0)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "Table", frozen)]
struct PyTable(Table);

#[pymethods]
impl PyTable {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match parse(text)? {
            Document::Table(t) => Ok(PyTable(t)),
            other => Err(py_err(format!("expected a table, found a {}", other.kind()))),
        }
    }

    /// Header cells are `name:type`.
    #[staticmethod]
    #[pyo3(signature = (text, typespec, key_column=None))]
    fn from_csv(text: &str, typespec: PyRef<'_, PyTypeSpec>, key_column: Option<&str>) -> PyResult<Self> {
        storage::import_csv(text.as_bytes(), &typespec.0, key_column).map(PyTable).map_err(py_err)
    }

    fn to_json(&self) -> String {
        Document::Table(self.0.clone()).to_text()
    }

    fn keys(&self) -> Vec<String> {
        self.0.keys().cloned().collect()
    }

    fn columns(&self) -> Vec<(String, String)> {
        self.0.schema().attributes().iter().map(|a| (a.name.clone(), a.type_name.clone())).collect()
    }

    /// Rows as display strings, in key order.
    fn rows(&self) -> Vec<(String, Vec<String>)> {
        self.0
            .rows()
            .iter()
            .map(|(k, r)| (k.clone(), r.values().iter().map(|v| v.to_string()).collect()))
            .collect()
    }

    fn select(&self, attrs: Vec<String>, selection: PyRef<'_, PyTable>) -> PyResult<Self> {
        let attrs: Vec<&str> = attrs.iter().map(String::as_str).collect();
        select_table(&self.0, &attrs, &selection.0).map(PyTable).map_err(py_err)
    }

    fn project(&self, attrs: Vec<String>) -> PyResult<Self> {
        let attrs: Vec<&str> = attrs.iter().map(String::as_str).collect();
        project_table(&self.0, &attrs).map(PyTable).map_err(py_err)
    }

    fn union_all(&self, other: PyRef<'_, PyTable>) -> PyResult<Self> {
        union_all(&self.0, &other.0).map(PyTable).map_err(py_err)
    }

    fn is_relational(&self) -> bool {
        self.0.is_relational()
    }

    /// Same rows, keys renamed k0, k1, ...
    fn canonical(&self) -> PyResult<Self> {
        canonicalize_table_keys(&self.0).map(|(t, _)| PyTable(t)).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

#[pyclass(name = "Morphism", frozen)]
struct PyMorphism(SchemaMorphism);

#[pymethods]
impl PyMorphism {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match parse(text)? {
            Document::Morphism(m) => Ok(PyMorphism(m)),
            other => Err(py_err(format!("expected a morphism, found a {}", other.kind()))),
        }
    }

    fn to_json(&self) -> String {
        Document::Morphism(self.0.clone()).to_text()
    }
}

/// A pushforward whose rows still have free coordinates over infinite types.
#[pyclass(name = "Cylinder", frozen)]
struct PyCylinder(CylinderSheaf);

#[pymethods]
impl PyCylinder {
    fn to_json(&self) -> String {
        Document::Cylinder(self.0.clone()).to_text()
    }
}

#[pyclass(name = "Database", frozen)]
struct PyDatabase(Database);

impl PyDatabase {
    fn doc(&self) -> Document {
        Document::Database(self.0.clone())
    }
}

#[pymethods]
impl PyDatabase {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match parse(text)? {
            Document::Database(d) => Ok(PyDatabase(d)),
            other => Err(py_err(format!("expected a database, found a {}", other.kind()))),
        }
    }

    fn to_json(&self) -> String {
        self.doc().to_text()
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        storage::save(&path, &self.doc()).map_err(py_err)
    }

    fn schema(&self) -> PySchema {
        PySchema(self.0.schema().clone())
    }

    fn keys(&self, id: &str) -> PyResult<Vec<String>> {
        let s = self.0.schema().index_of(id).map_err(py_err)?;
        Ok(self.0.keys(s).iter().cloned().collect())
    }

    fn global_table(&self) -> PyResult<PyTable> {
        global_table(&self.0).map(PyTable).map_err(py_err)
    }

    /// Pairs are `(left id, right id)`; the right simplices are glued onto the left ones.
    fn join(&self, py: Python<'_>, other: PyRef<'_, PyDatabase>, on: Vec<(String, String)>) -> PyResult<Py<PyAny>> {
        apply(py, Op::Join, &[self.doc(), other.doc()], OpArgs { on, keep: vec![] })
    }

    fn select(&self, py: Python<'_>, selection: PyRef<'_, PyDatabase>) -> PyResult<Py<PyAny>> {
        apply(py, Op::Select, &[self.doc(), selection.doc()], OpArgs::default())
    }

    fn delete(&self, py: Python<'_>, selection: PyRef<'_, PyDatabase>) -> PyResult<Py<PyAny>> {
        apply(py, Op::Delete, &[self.doc(), selection.doc()], OpArgs::default())
    }

    fn project(&self, py: Python<'_>, keep: Vec<String>) -> PyResult<Py<PyAny>> {
        apply(py, Op::Project, &[self.doc()], OpArgs { on: vec![], keep })
    }

    fn union(&self, py: Python<'_>, other: PyRef<'_, PyDatabase>) -> PyResult<Py<PyAny>> {
        apply(py, Op::Union, &[self.doc(), other.doc()], OpArgs::default())
    }

    fn union_all(&self, py: Python<'_>, other: PyRef<'_, PyDatabase>) -> PyResult<Py<PyAny>> {
        apply(py, Op::UnionAll, &[self.doc(), other.doc()], OpArgs::default())
    }

    fn insert(&self, py: Python<'_>, rows: PyRef<'_, PyDatabase>) -> PyResult<Py<PyAny>> {
        apply(py, Op::Insert, &[self.doc(), rows.doc()], OpArgs::default())
    }

    fn pullback(&self, py: Python<'_>, along: PyRef<'_, PyMorphism>) -> PyResult<Py<PyAny>> {
        apply(py, Op::Pullback, &[self.doc(), Document::Morphism(along.0.clone())], OpArgs::default())
    }

    /// Returns a `Cylinder` when the result cannot be listed row by row.
    fn pushforward(&self, py: Python<'_>, along: PyRef<'_, PyMorphism>) -> PyResult<Py<PyAny>> {
        apply(py, Op::Pushforward, &[self.doc(), Document::Morphism(along.0.clone())], OpArgs::default())
    }

    fn extend(&self, py: Python<'_>, along: PyRef<'_, PyMorphism>) -> PyResult<Py<PyAny>> {
        apply(py, Op::Extend, &[self.doc(), Document::Morphism(along.0.clone())], OpArgs::default())
    }

    fn to_relational(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        apply(py, Op::ToRelational, &[self.doc()], OpArgs::default())
    }

    /// Same database with keys renamed k0, k1, ... per simplex.
    fn canonical(&self) -> PyResult<Self> {
        match script::canonical(self.doc()).map_err(py_err)? {
            Document::Database(d) => Ok(PyDatabase(d)),
            _ => unreachable!("canonical keeps the document kind"),
        }
    }

    fn is_isomorphic(&self, other: PyRef<'_, PyDatabase>) -> PyResult<bool> {
        is_isomorphic(&self.0, &other.0).map_err(py_err)
    }

    fn is_valid(&self) -> bool {
        violations(&self.0).is_empty()
    }

    fn __str__(&self) -> String {
        script::show(&self.doc())
    }
}

/// Loads any document; the return type follows the file's `kind`.
#[pyfunction]
fn load(py: Python<'_>, path: PathBuf) -> PyResult<Py<PyAny>> {
    wrap(py, storage::load(&path).map_err(py_err)?)
}

#[pyfunction]
fn loads(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    wrap(py, parse(text)?)
}

/// Runs a query script and returns whatever it `show`s.
#[pyfunction]
#[pyo3(signature = (text, input_dir=PathBuf::from("."), output_dir=PathBuf::from("."), canonical_keys=false))]
fn run_script(text: &str, input_dir: PathBuf, output_dir: PathBuf, canonical_keys: bool) -> PyResult<String> {
    let opts = RunOptions { input_dir, output_dir, canonical_keys };
    script::run_script(text, &opts).map(|out| out.shown).map_err(py_err)
}

#[pymodule]
fn simplicial_db(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTypeSpec>()?;
    m.add_class::<PySchema>()?;
    m.add_class::<PyTable>()?;
    m.add_class::<PyMorphism>()?;
    m.add_class::<PyCylinder>()?;
    m.add_class::<PyDatabase>()?;
    m.add_function(wrap_pyfunction!(load, m)?)?;
    m.add_function(wrap_pyfunction!(loads, m)?)?;
    m.add_function(wrap_pyfunction!(run_script, m)?)?;
    Ok(())
}
