//! Tensor-product state spaces, sparse states and sparse local operators.
//!
//! A [`SiteLayout`] fixes the ordered list of qunits. Basis indices are
//! mixed-radix numbers with site 0 as the most significant digit. A
//! [`LinearOp`] stores only the sites it acts on together with a sparse
//! matrix on their joint space, and acts as the identity elsewhere, so terms
//! of a lattice Hamiltonian stay small no matter how large the full space is.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::groups::root_of_unity;
use crate::lattice::{EdgeId, FaceId, TorusLattice, VertexId};

/// Entries with modulus below this are treated as exact zeros.
pub const ZERO_TOL: f64 = 1e-14;

/// Largest full-space dimension for which dense matrices are formed.
pub const DENSE_LIMIT: usize = 4096;

const PARALLEL_THRESHOLD: usize = 1 << 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SiteKind {
    Edge(EdgeId),
    Face(FaceId),
    Vertex(VertexId),
    /// A site not tied to a lattice element.
    Free(usize),
}

impl fmt::Display for SiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SiteKind::Edge(j) => write!(f, "e{j}"),
            SiteKind::Face(p) => write!(f, "p{p}"),
            SiteKind::Vertex(v) => write!(f, "v{v}"),
            SiteKind::Free(s) => write!(f, "s{s}"),
        }
    }
}

/// Ordered qunits with their local dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiteLayout {
    kinds: Vec<SiteKind>,
    dims: Vec<usize>,
    /// `None` when the full dimension does not fit in `usize`.
    strides: Option<Vec<usize>>,
    edge_sites: Vec<Option<usize>>,
    face_sites: Vec<Option<usize>>,
    vertex_sites: Vec<Option<usize>>,
}

impl SiteLayout {
    pub fn new(sites: Vec<(SiteKind, usize)>) -> Result<Self> {
        let mut edge_sites = Vec::new();
        let mut face_sites = Vec::new();
        let mut vertex_sites = Vec::new();
        let mut free_seen = Vec::new();
        for (s, &(kind, dim)) in sites.iter().enumerate() {
            if dim == 0 {
                return Err(Error::EmptyGroup);
            }
            let (table, id) = match kind {
                SiteKind::Edge(j) => (&mut edge_sites, j),
                SiteKind::Face(p) => (&mut face_sites, p),
                SiteKind::Vertex(v) => (&mut vertex_sites, v),
                SiteKind::Free(k) => (&mut free_seen, k),
            };
            if table.len() <= id {
                table.resize(id + 1, None);
            }
            if table[id].replace(s).is_some() {
                return Err(Error::InvalidModel(format!("site {kind} listed twice")));
            }
        }
        let dims: Vec<usize> = sites.iter().map(|s| s.1).collect();
        let mut strides = vec![1usize; dims.len()];
        let mut acc: Option<usize> = Some(1);
        for s in (0..dims.len()).rev() {
            if let Some(a) = acc {
                strides[s] = a;
            }
            acc = acc.and_then(|a| a.checked_mul(dims[s]));
        }
        Ok(Self {
            kinds: sites.into_iter().map(|s| s.0).collect(),
            dims,
            strides: acc.map(|_| strides),
            edge_sites,
            face_sites,
            vertex_sites,
        })
    }

    /// A one-site layout, used for single-qunit operators.
    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![(SiteKind::Free(0), dim)])
    }

    /// Edges with dimension `gauge`, then faces, then vertices, each block in id order.
    pub fn for_lattice(
        lattice: &TorusLattice,
        gauge: usize,
        face_dim: Option<usize>,
        vertex_dim: Option<usize>,
    ) -> Result<Self> {
        let mut sites: Vec<(SiteKind, usize)> = (0..lattice.edge_count())
            .map(|j| (SiteKind::Edge(j), gauge))
            .collect();
        if let Some(k) = face_dim {
            sites.extend((0..lattice.face_count()).map(|p| (SiteKind::Face(p), k)));
        }
        if let Some(m) = vertex_dim {
            sites.extend((0..lattice.vertex_count()).map(|v| (SiteKind::Vertex(v), m)));
        }
        Self::new(sites)
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dim(&self, site: usize) -> usize {
        self.dims[site]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn kind(&self, site: usize) -> SiteKind {
        self.kinds[site]
    }

    pub fn kinds(&self) -> &[SiteKind] {
        &self.kinds
    }

    /// Full Hilbert-space dimension, exact even when it overflows `usize`.
    pub fn dimension(&self) -> u128 {
        self.dims
            .iter()
            .try_fold(1u128, |a, &d| a.checked_mul(d as u128))
            .unwrap_or(u128::MAX)
    }

    /// Full dimension, or an error when it exceeds `cap`.
    pub fn checked_dimension(&self, cap: usize) -> Result<usize> {
        let dimension = self.dimension();
        if dimension > cap as u128 {
            return Err(Error::DimensionCap { dimension, cap });
        }
        Ok(dimension as usize)
    }

    pub fn strides(&self) -> Result<&[usize]> {
        self.strides.as_deref().ok_or(Error::DimensionCap {
            dimension: self.dimension(),
            cap: usize::MAX,
        })
    }

    pub fn edge_site(&self, j: EdgeId) -> Option<usize> {
        self.edge_sites.get(j).copied().flatten()
    }

    pub fn face_site(&self, p: FaceId) -> Option<usize> {
        self.face_sites.get(p).copied().flatten()
    }

    pub fn vertex_site(&self, v: VertexId) -> Option<usize> {
        self.vertex_sites.get(v).copied().flatten()
    }

    fn require(&self, site: Option<usize>, kind: &'static str, id: usize) -> Result<usize> {
        site.ok_or(Error::InvalidId {
            kind,
            id,
            count: match kind {
                "edge" => self.edge_sites.len(),
                "face" => self.face_sites.len(),
                _ => self.vertex_sites.len(),
            },
        })
    }

    pub fn require_edge(&self, j: EdgeId) -> Result<usize> {
        self.require(self.edge_site(j), "edge", j)
    }

    pub fn require_face(&self, p: FaceId) -> Result<usize> {
        self.require(self.face_site(p), "face", p)
    }

    pub fn require_vertex(&self, v: VertexId) -> Result<usize> {
        self.require(self.vertex_site(v), "vertex", v)
    }

    pub fn index_of(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: digits.len(),
            });
        }
        let strides = self.strides()?;
        let mut index = 0;
        for (s, &d) in digits.iter().enumerate() {
            if d >= self.dims[s] {
                return Err(Error::DimensionMismatch {
                    expected: self.dims[s],
                    found: d,
                });
            }
            index += d * strides[s];
        }
        Ok(index)
    }

    pub fn digits_of(&self, index: usize) -> Result<Vec<usize>> {
        let strides = self.strides()?;
        if index as u128 >= self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension().min(usize::MAX as u128) as usize,
                found: index,
            });
        }
        Ok(strides
            .iter()
            .zip(&self.dims)
            .map(|(&st, &d)| (index / st) % d)
            .collect())
    }

    /// Digit of `site` in the basis index `index`.
    #[inline]
    pub fn digit(&self, index: usize, site: usize) -> usize {
        let strides = self
            .strides
            .as_ref()
            .expect("layout dimension overflows usize");
        (index / strides[site]) % self.dims[site]
    }
}

fn same_layout(a: &Arc<SiteLayout>, b: &Arc<SiteLayout>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// One group value per site.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisState {
    digits: Vec<usize>,
}

impl BasisState {
    pub fn new(layout: &SiteLayout, digits: Vec<usize>) -> Result<Self> {
        if digits.len() != layout.len() {
            return Err(Error::DimensionMismatch {
                expected: layout.len(),
                found: digits.len(),
            });
        }
        for (s, &d) in digits.iter().enumerate() {
            if d >= layout.dim(s) {
                return Err(Error::DimensionMismatch {
                    expected: layout.dim(s),
                    found: d,
                });
            }
        }
        Ok(Self { digits })
    }

    pub fn zero(layout: &SiteLayout) -> Self {
        Self {
            digits: vec![0; layout.len()],
        }
    }

    pub fn from_index(layout: &SiteLayout, index: usize) -> Result<Self> {
        Ok(Self {
            digits: layout.digits_of(index)?,
        })
    }

    pub fn index(&self, layout: &SiteLayout) -> Result<usize> {
        layout.index_of(&self.digits)
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    pub fn get(&self, site: usize) -> usize {
        self.digits[site]
    }

    pub fn set(&mut self, layout: &SiteLayout, site: usize, value: usize) -> Result<()> {
        if value >= layout.dim(site) {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(site),
                found: value,
            });
        }
        self.digits[site] = value;
        Ok(())
    }
}

/// Sparse state: amplitudes sorted by basis index, without duplicates.
#[derive(Clone, Debug)]
pub struct StateVector {
    layout: Arc<SiteLayout>,
    entries: Vec<(usize, C64)>,
}

impl StateVector {
    pub fn zero(layout: Arc<SiteLayout>) -> Self {
        Self {
            layout,
            entries: Vec::new(),
        }
    }

    pub fn basis(layout: Arc<SiteLayout>, index: usize) -> Result<Self> {
        if index as u128 >= layout.dimension() {
            return Err(Error::DimensionMismatch {
                expected: layout.dimension().min(usize::MAX as u128) as usize,
                found: index,
            });
        }
        Ok(Self {
            layout,
            entries: vec![(index, C64::new(1.0, 0.0))],
        })
    }

    pub fn from_basis_state(layout: Arc<SiteLayout>, state: &BasisState) -> Result<Self> {
        let index = state.index(&layout)?;
        Self::basis(layout, index)
    }

    /// Duplicated indices are summed.
    pub fn from_entries(layout: Arc<SiteLayout>, entries: Vec<(usize, C64)>) -> Result<Self> {
        let dimension = layout.dimension();
        if let Some(&(i, _)) = entries.iter().find(|(i, _)| *i as u128 >= dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension.min(usize::MAX as u128) as usize,
                found: i,
            });
        }
        Ok(Self {
            layout,
            entries: merge_sorted(entries),
        })
    }

    pub fn from_dense(layout: Arc<SiteLayout>, amplitudes: &[C64]) -> Result<Self> {
        if amplitudes.len() as u128 != layout.dimension() {
            return Err(Error::DimensionMismatch {
                expected: layout.dimension().min(usize::MAX as u128) as usize,
                found: amplitudes.len(),
            });
        }
        let entries = amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() >= ZERO_TOL)
            .map(|(i, &a)| (i, a))
            .collect();
        Ok(Self { layout, entries })
    }

    pub fn to_dense(&self) -> Result<Vec<C64>> {
        let dim = self.layout.checked_dimension(usize::MAX >> 8)?;
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for &(i, a) in &self.entries {
            out[i] = a;
        }
        Ok(out)
    }

    pub fn layout(&self) -> &Arc<SiteLayout> {
        &self.layout
    }

    pub fn entries(&self) -> &[(usize, C64)] {
        &self.entries
    }

    /// Number of stored (non-zero) amplitudes.
    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        match self.entries.binary_search_by_key(&index, |e| e.0) {
            Ok(k) => self.entries[k].1,
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    /// Unit vector along `self`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n <= ZERO_TOL {
            return None;
        }
        Some(self.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Self {
        let entries = if c.norm() < ZERO_TOL {
            Vec::new()
        } else {
            self.entries.iter().map(|&(i, a)| (i, a * c)).collect()
        };
        Self {
            layout: self.layout.clone(),
            entries,
        }
    }

    fn check_layout(&self, other: &StateVector) -> Result<()> {
        if same_layout(&self.layout, &other.layout) {
            Ok(())
        } else {
            Err(Error::LayoutMismatch)
        }
    }

    pub fn add(&self, other: &StateVector) -> Result<Self> {
        self.axpy(C64::new(1.0, 0.0), other)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: C64, other: &StateVector) -> Result<Self> {
        self.check_layout(other)?;
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut k) = (0, 0);
        while i < self.entries.len() || k < other.entries.len() {
            let a = self.entries.get(i);
            let b = other.entries.get(k);
            let next = match (a, b) {
                (Some(&(ia, va)), Some(&(ib, vb))) if ia == ib => {
                    i += 1;
                    k += 1;
                    (ia, va + c * vb)
                }
                (Some(&(ia, va)), Some(&(ib, _))) if ia < ib => {
                    i += 1;
                    (ia, va)
                }
                (Some(&(ia, va)), None) => {
                    i += 1;
                    (ia, va)
                }
                (_, Some(&(ib, vb))) => {
                    k += 1;
                    (ib, c * vb)
                }
                (None, None) => unreachable!(),
            };
            if next.1.norm() >= ZERO_TOL {
                out.push(next);
            }
        }
        Ok(Self {
            layout: self.layout.clone(),
            entries: out,
        })
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_layout(other)?;
        let (mut i, mut k) = (0, 0);
        let mut acc = C64::new(0.0, 0.0);
        while i < self.entries.len() && k < other.entries.len() {
            let (ia, va) = self.entries[i];
            let (ib, vb) = other.entries[k];
            match ia.cmp(&ib) {
                std::cmp::Ordering::Equal => {
                    acc += va.conj() * vb;
                    i += 1;
                    k += 1;
                }
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => k += 1,
            }
        }
        Ok(acc)
    }

    /// Largest amplitude difference.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        let diff = self.axpy(C64::new(-1.0, 0.0), other)?;
        Ok(diff
            .entries
            .iter()
            .map(|(_, a)| a.norm())
            .fold(0.0, f64::max))
    }
}

/// Sort by index (stably, so sums are reproducible) and merge duplicates.
fn merge_sorted(mut entries: Vec<(usize, C64)>) -> Vec<(usize, C64)> {
    if entries.len() >= PARALLEL_THRESHOLD {
        entries.par_sort_by_key(|e| e.0);
    } else {
        entries.sort_by_key(|e| e.0);
    }
    let mut out: Vec<(usize, C64)> = Vec::with_capacity(entries.len());
    for (i, a) in entries {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 += a,
            _ => {
                if let Some(last) = out.last() {
                    if last.1.norm() < ZERO_TOL {
                        out.pop();
                    }
                }
                out.push((i, a));
            }
        }
    }
    if out.last().is_some_and(|l| l.1.norm() < ZERO_TOL) {
        out.pop();
    }
    out
}

/// Sparse square matrix in compressed-column form.
#[derive(Clone, Debug, PartialEq)]
struct Csc {
    dim: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<C64>,
}

impl Csc {
    fn from_column_fn(dim: usize, mut column: impl FnMut(usize) -> Vec<(usize, C64)>) -> Self {
        let mut col_ptr = Vec::with_capacity(dim + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for c in 0..dim {
            for (r, v) in merge_sorted(column(c)) {
                row_idx.push(r);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            dim,
            col_ptr,
            row_idx,
            values,
        }
    }

    #[inline]
    fn column(&self, c: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let range = self.col_ptr[c]..self.col_ptr[c + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    fn nnz(&self) -> usize {
        self.values.len()
    }
}

/// Sparse operator acting on a few sites of a layout and as the identity elsewhere.
#[derive(Clone, Debug)]
pub struct LinearOp {
    layout: Arc<SiteLayout>,
    /// Sorted site indices; the first is the most significant local digit.
    support: Vec<usize>,
    matrix: Csc,
}

impl LinearOp {
    /// Build from its action on basis states of `sites`.
    ///
    /// `column` receives the digits of the input state in the order of `sites`
    /// and returns output digit vectors in the same order with amplitudes.
    pub fn from_columns<F>(layout: Arc<SiteLayout>, sites: &[usize], column: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> Vec<(Vec<usize>, C64)>,
    {
        for &s in sites {
            if s >= layout.len() {
                return Err(Error::InvalidId {
                    kind: "site",
                    id: s,
                    count: layout.len(),
                });
            }
        }
        let mut order: Vec<usize> = (0..sites.len()).collect();
        order.sort_by_key(|&k| sites[k]);
        let support: Vec<usize> = order.iter().map(|&k| sites[k]).collect();
        if support.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidModel(
                "operator support lists a site twice".into(),
            ));
        }
        let dims: Vec<usize> = support.iter().map(|&s| layout.dim(s)).collect();
        let dim: usize = dims.iter().product();
        let mut caller_digits = vec![0; sites.len()];
        let matrix = Csc::from_column_fn(dim, |c| {
            let sorted = decode(c, &dims);
            for (pos, &k) in order.iter().enumerate() {
                caller_digits[k] = sorted[pos];
            }
            column(&caller_digits)
                .into_iter()
                .map(|(out, v)| {
                    assert_eq!(
                        out.len(),
                        sites.len(),
                        "output digits have the wrong length"
                    );
                    let mut idx = 0;
                    for (pos, &k) in order.iter().enumerate() {
                        assert!(out[k] < dims[pos], "output digit out of range");
                        idx = idx * dims[pos] + out[k];
                    }
                    (idx, v)
                })
                .collect()
        });
        Ok(Self {
            layout,
            support,
            matrix,
        })
    }

    /// Diagonal operator with entries given by `value(digits)`.
    pub fn diagonal<F>(layout: Arc<SiteLayout>, sites: &[usize], value: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> C64,
    {
        Self::from_columns(layout, sites, |d| vec![(d.to_vec(), value(d))])
    }

    /// Dense local matrix on `sites` (in the given order).
    pub fn from_matrix(layout: Arc<SiteLayout>, sites: &[usize], m: &DMatrix<C64>) -> Result<Self> {
        let dims: Vec<usize> = sites
            .iter()
            .map(|&s| layout.dims().get(s).copied().unwrap_or(0))
            .collect();
        let dim: usize = dims.iter().product();
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: m.nrows(),
            });
        }
        Self::from_columns(layout, sites, |d| {
            let c = encode(d, &dims);
            (0..dim)
                .filter(|&r| m[(r, c)].norm() >= ZERO_TOL)
                .map(|r| (decode(r, &dims), m[(r, c)]))
                .collect()
        })
    }

    pub fn identity(layout: Arc<SiteLayout>) -> Self {
        Self::scalar(layout, C64::new(1.0, 0.0))
    }

    pub fn scalar(layout: Arc<SiteLayout>, c: C64) -> Self {
        let entries = if c.norm() < ZERO_TOL {
            vec![]
        } else {
            vec![(0, c)]
        };
        Self {
            layout,
            support: Vec::new(),
            matrix: Csc::from_column_fn(1, |_| entries.clone()),
        }
    }

    pub fn layout(&self) -> &Arc<SiteLayout> {
        &self.layout
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Dimension of the joint space of the support sites.
    pub fn local_dimension(&self) -> usize {
        self.matrix.dim
    }

    /// Stored non-zeros of the local matrix.
    pub fn local_nnz(&self) -> usize {
        self.matrix.nnz()
    }

    /// Non-zeros of the operator written out on the full space.
    pub fn nnz(&self) -> u128 {
        self.matrix.nnz() as u128 * (self.layout.dimension() / self.matrix.dim as u128)
    }

    fn local_dims(&self) -> Vec<usize> {
        self.support.iter().map(|&s| self.layout.dim(s)).collect()
    }

    /// Dense matrix on the support sites.
    pub fn local_matrix(&self) -> DMatrix<C64> {
        let dim = self.matrix.dim;
        let mut m = DMatrix::zeros(dim, dim);
        for c in 0..dim {
            for (r, v) in self.matrix.column(c) {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Dense matrix on the full space (at most [`DENSE_LIMIT`] states).
    pub fn to_dense(&self) -> Result<DMatrix<C64>> {
        let dim = self.layout.checked_dimension(DENSE_LIMIT)?;
        let mut m = DMatrix::zeros(dim, dim);
        for c in 0..dim {
            for &(r, v) in self
                .apply(&StateVector::basis(self.layout.clone(), c)?)?
                .entries()
            {
                m[(r, c)] = v;
            }
        }
        Ok(m)
    }

    /// The same operator with its support enlarged to `sites` (a sorted superset).
    fn lift(&self, sites: &[usize]) -> Csc {
        if sites == self.support.as_slice() {
            return self.matrix.clone();
        }
        let dims: Vec<usize> = sites.iter().map(|&s| self.layout.dim(s)).collect();
        let dim: usize = dims.iter().product();
        // Stride of each of our support sites inside the enlarged local index.
        let mut strides = vec![0; self.support.len()];
        let mut acc = 1;
        let mut k = self.support.len();
        for (pos, &s) in sites.iter().enumerate().rev() {
            if k > 0 && self.support[k - 1] == s {
                k -= 1;
                strides[k] = acc;
            }
            acc *= dims[pos];
        }
        assert_eq!(k, 0, "lift target must contain the support");
        let own_dims = self.local_dims();
        let offsets: Vec<usize> = (0..self.matrix.dim)
            .map(|l| {
                decode(l, &own_dims)
                    .iter()
                    .zip(&strides)
                    .map(|(d, s)| d * s)
                    .sum()
            })
            .collect();
        Csc::from_column_fn(dim, |u| {
            let mut l = 0;
            for (pos, &st) in strides.iter().enumerate() {
                l = l * own_dims[pos] + (u / st) % own_dims[pos];
            }
            let base = u - offsets[l];
            self.matrix
                .column(l)
                .map(|(r, v)| (base + offsets[r], v))
                .collect()
        })
    }

    fn lifted(&self, sites: &[usize]) -> LinearOp {
        LinearOp {
            layout: self.layout.clone(),
            support: sites.to_vec(),
            matrix: self.lift(sites),
        }
    }

    fn union_support(&self, other: &LinearOp) -> Result<Vec<usize>> {
        if !same_layout(&self.layout, &other.layout) {
            return Err(Error::LayoutMismatch);
        }
        let mut u: Vec<usize> = self.support.iter().chain(&other.support).copied().collect();
        u.sort_unstable();
        u.dedup();
        Ok(u)
    }

    /// `self * other` (apply `other` first).
    pub fn compose(&self, other: &LinearOp) -> Result<LinearOp> {
        let sites = self.union_support(other)?;
        let a = self.lift(&sites);
        let b = other.lift(&sites);
        let matrix = Csc::from_column_fn(a.dim, |c| {
            let mut out = Vec::new();
            for (k, bv) in b.column(c) {
                out.extend(a.column(k).map(|(r, av)| (r, av * bv)));
            }
            out
        });
        Ok(LinearOp {
            layout: self.layout.clone(),
            support: sites,
            matrix,
        })
    }

    /// `a * self + b * other`.
    pub fn linear_combination(&self, a: C64, other: &LinearOp, b: C64) -> Result<LinearOp> {
        let sites = self.union_support(other)?;
        let x = self.lift(&sites);
        let y = other.lift(&sites);
        let matrix = Csc::from_column_fn(x.dim, |c| {
            x.column(c)
                .map(|(r, v)| (r, a * v))
                .chain(y.column(c).map(|(r, v)| (r, b * v)))
                .collect()
        });
        Ok(LinearOp {
            layout: self.layout.clone(),
            support: sites,
            matrix,
        })
    }

    pub fn add(&self, other: &LinearOp) -> Result<LinearOp> {
        let one = C64::new(1.0, 0.0);
        self.linear_combination(one, other, one)
    }

    pub fn sub(&self, other: &LinearOp) -> Result<LinearOp> {
        self.linear_combination(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: C64) -> LinearOp {
        let mut out = self.clone();
        if c.norm() < ZERO_TOL {
            out.matrix = Csc::from_column_fn(out.matrix.dim, |_| Vec::new());
        } else {
            out.matrix.values.iter_mut().for_each(|v| *v *= c);
        }
        out
    }

    pub fn adjoint(&self) -> LinearOp {
        let dim = self.matrix.dim;
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for c in 0..dim {
            for (r, v) in self.matrix.column(c) {
                rows[r].push((c, v.conj()));
            }
        }
        LinearOp {
            layout: self.layout.clone(),
            support: self.support.clone(),
            matrix: Csc::from_column_fn(dim, |c| std::mem::take(&mut rows[c])),
        }
    }

    pub fn pow(&self, k: usize) -> LinearOp {
        let mut out = LinearOp::identity(self.layout.clone()).lifted(&self.support);
        for _ in 0..k {
            out = self.compose(&out).expect("same layout");
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_abs_entry(&self) -> f64 {
        self.matrix
            .values
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry modulus of `self - other`.
    pub fn distance(&self, other: &LinearOp) -> Result<f64> {
        Ok(self.sub(other)?.max_abs_entry())
    }

    pub fn commutator(&self, other: &LinearOp) -> Result<LinearOp> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// `max |(AB - BA)_xy|`; zero exactly when the operators commute.
    pub fn commutator_norm(&self, other: &LinearOp) -> Result<f64> {
        Ok(self.commutator(other)?.max_abs_entry())
    }

    /// `max |(P^2 - P)_xy|`.
    pub fn projector_defect(&self) -> f64 {
        self.compose(self)
            .and_then(|sq| sq.distance(self))
            .expect("same layout")
    }

    /// `max |(A - A^dagger)_xy|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.distance(&self.adjoint()).expect("same layout")
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        self.projector_defect() < tol && self.hermiticity_defect() < tol
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.matrix.dim).all(|c| self.matrix.column(c).all(|(r, _)| r == c))
    }

    /// Local diagonal entries, indexed by local basis index.
    pub fn local_diagonal(&self) -> Vec<C64> {
        (0..self.matrix.dim)
            .map(|c| {
                self.matrix
                    .column(c)
                    .find(|&(r, _)| r == c)
                    .map_or(C64::new(0.0, 0.0), |e| e.1)
            })
            .collect()
    }

    /// When the local matrix is a permutation matrix, the image of each local index.
    pub fn local_permutation(&self) -> Option<Vec<usize>> {
        let mut image = Vec::with_capacity(self.matrix.dim);
        let mut hit = vec![false; self.matrix.dim];
        for c in 0..self.matrix.dim {
            let mut col = self.matrix.column(c);
            let (r, v) = col.next()?;
            if col.next().is_some() || (v - C64::new(1.0, 0.0)).norm() > ZERO_TOL || hit[r] {
                return None;
            }
            hit[r] = true;
            image.push(r);
        }
        Some(image)
    }

    /// Mixed-radix offsets of every local basis state within the full index.
    pub(crate) fn full_offsets(&self) -> Result<Vec<usize>> {
        let strides = self.layout.strides()?;
        let dims = self.local_dims();
        Ok((0..self.matrix.dim)
            .map(|l| {
                decode(l, &dims)
                    .iter()
                    .zip(&self.support)
                    .map(|(d, &s)| d * strides[s])
                    .sum()
            })
            .collect())
    }

    /// Local index of the full basis index `i`.
    #[inline]
    pub(crate) fn local_index(&self, i: usize, strides: &[usize]) -> usize {
        let mut l = 0;
        for &s in &self.support {
            let d = self.layout.dims()[s];
            l = l * d + (i / strides[s]) % d;
        }
        l
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if !same_layout(&self.layout, &psi.layout) {
            return Err(Error::LayoutMismatch);
        }
        let strides = self.layout.strides()?;
        let offsets = &self.full_offsets()?;
        let image = |&(i, a): &(usize, C64)| {
            let l = self.local_index(i, strides);
            let base = i - offsets[l];
            self.matrix
                .column(l)
                .map(move |(r, v)| (base + offsets[r], a * v))
        };
        let out: Vec<(usize, C64)> = if psi.entries.len() >= PARALLEL_THRESHOLD {
            psi.entries.par_iter().flat_map_iter(image).collect()
        } else {
            psi.entries.iter().flat_map(image).collect()
        };
        Ok(StateVector {
            layout: self.layout.clone(),
            entries: merge_sorted(out),
        })
    }

    /// `<psi| A |psi>`.
    pub fn expectation(&self, psi: &StateVector) -> Result<C64> {
        psi.inner(&self.apply(psi)?)
    }

    /// Place this operator into `layout`, sending our site `k` to `sites[k]`.
    pub fn embed_into(&self, layout: Arc<SiteLayout>, sites: &[usize]) -> Result<LinearOp> {
        if sites.len() != self.layout.len() {
            return Err(Error::DimensionMismatch {
                expected: self.layout.len(),
                found: sites.len(),
            });
        }
        for (k, &s) in sites.iter().enumerate() {
            let target = layout.dims().get(s).copied().ok_or(Error::InvalidId {
                kind: "site",
                id: s,
                count: layout.len(),
            })?;
            if target != self.layout.dim(k) {
                return Err(Error::DimensionMismatch {
                    expected: target,
                    found: self.layout.dim(k),
                });
            }
        }
        let targets: Vec<usize> = self.support.iter().map(|&k| sites[k]).collect();
        let dims = self.local_dims();
        LinearOp::from_columns(layout, &targets, |d| {
            let c = encode(d, &dims);
            self.matrix
                .column(c)
                .map(|(r, v)| (decode(r, &dims), v))
                .collect()
        })
    }
}

/// Place a single-site operator on `site` of `layout`.
pub fn embed(op: &LinearOp, site: usize, layout: Arc<SiteLayout>) -> Result<LinearOp> {
    op.embed_into(layout, &[site])
}

fn decode(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        digits[k] = index % dims[k];
        index /= dims[k];
    }
    digits
}

fn encode(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (d, n)| acc * n + d)
}

/// Shift `X|h> = |h+1>` and clock `Z|h> = w^h |h>` on one `n`-level site.
pub fn clock_shift(n: usize) -> Result<(LinearOp, LinearOp)> {
    let layout = Arc::new(SiteLayout::single(n)?);
    let x = LinearOp::from_columns(layout.clone(), &[0], |d| {
        vec![(vec![(d[0] + 1) % n], C64::new(1.0, 0.0))]
    })?;
    let z = LinearOp::diagonal(layout, &[0], |d| root_of_unity(n, d[0]))?;
    Ok((x, z))
}

/// Shift `site` by `+k`.
pub fn shift_on(layout: &Arc<SiteLayout>, site: usize, k: i64) -> Result<LinearOp> {
    let n = layout.dims().get(site).copied().ok_or(Error::InvalidId {
        kind: "site",
        id: site,
        count: layout.len(),
    })?;
    let k = k.rem_euclid(n as i64) as usize;
    LinearOp::from_columns(layout.clone(), &[site], |d| {
        vec![(vec![(d[0] + k) % n], C64::new(1.0, 0.0))]
    })
}

/// Clock power `Z^k` on `site`.
pub fn clock_on(layout: &Arc<SiteLayout>, site: usize, k: i64) -> Result<LinearOp> {
    let n = layout.dims().get(site).copied().ok_or(Error::InvalidId {
        kind: "site",
        id: site,
        count: layout.len(),
    })?;
    let k = k.rem_euclid(n as i64) as usize;
    LinearOp::diagonal(layout.clone(), &[site], |d| root_of_unity(n, k * d[0]))
}

/// Product of per-site Fourier unitaries.
///
/// Gauge sites use `|g'> = d^(-1/2) sum_g w^(g' g) |g>`, matter sites the
/// conjugate characters `|a'> = d^(-1/2) sum_a conj(chi_a'(a)) |a>`.
#[derive(Clone, Debug)]
pub struct CharacterBasis {
    layout: Arc<SiteLayout>,
    factors: Vec<DMatrix<C64>>,
}

/// Single-site character unitary; column `k` holds the `k`-th new basis vector.
pub fn character_matrix(dim: usize, conjugate: bool) -> DMatrix<C64> {
    let norm = 1.0 / (dim as f64).sqrt();
    DMatrix::from_fn(dim, dim, |g, k| {
        let w = root_of_unity(dim, g * k) * norm;
        if conjugate {
            w.conj()
        } else {
            w
        }
    })
}

pub fn character_basis(layout: Arc<SiteLayout>) -> CharacterBasis {
    let factors = (0..layout.len())
        .map(|s| {
            let conjugate = matches!(layout.kind(s), SiteKind::Face(_) | SiteKind::Vertex(_));
            character_matrix(layout.dim(s), conjugate)
        })
        .collect();
    CharacterBasis { layout, factors }
}

impl CharacterBasis {
    pub fn layout(&self) -> &Arc<SiteLayout> {
        &self.layout
    }

    pub fn factor(&self, site: usize) -> &DMatrix<C64> {
        &self.factors[site]
    }

    /// Largest deviation of any factor from unitarity.
    pub fn unitarity_defect(&self) -> f64 {
        self.factors
            .iter()
            .map(|u| {
                let id = DMatrix::<C64>::identity(u.nrows(), u.ncols());
                (u * u.adjoint() - id)
                    .iter()
                    .map(|v| v.norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// The unitary restricted to `sites`, as an operator.
    pub fn restrict(&self, sites: &[usize]) -> Result<LinearOp> {
        let mut sorted = sites.to_vec();
        sorted.sort_unstable();
        let mut m = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for &s in &sorted {
            m = m.kronecker(&self.factors[s]);
        }
        LinearOp::from_matrix(self.layout.clone(), &sorted, &m)
    }

    /// The full unitary (at most [`DENSE_LIMIT`] states).
    pub fn to_linear_op(&self) -> Result<LinearOp> {
        self.layout.checked_dimension(DENSE_LIMIT)?;
        let all: Vec<usize> = (0..self.layout.len()).collect();
        self.restrict(&all)
    }

    /// `U v` (or `U^dagger v`) on a dense vector, one site at a time.
    pub fn apply_dense(&self, v: &[C64], adjoint: bool) -> Result<Vec<C64>> {
        let dim = self.layout.checked_dimension(usize::MAX >> 8)?;
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        let strides = self.layout.strides()?;
        let mut cur = v.to_vec();
        let mut next = vec![C64::new(0.0, 0.0); dim];
        for (s, u) in self.factors.iter().enumerate() {
            let u = if adjoint { u.adjoint() } else { u.clone() };
            let (d, st) = (self.layout.dim(s), strides[s]);
            for (i, out) in next.iter_mut().enumerate() {
                let digit = (i / st) % d;
                let base = i - digit * st;
                *out = (0..d).map(|k| u[(digit, k)] * cur[base + k * st]).sum();
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }
}
