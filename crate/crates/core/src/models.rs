//! Builders for the three model families and their Hamiltonians.
//!
//! * [`Family::DoubleOnly`]: the plain quantum double `D(Z_N)`, edges only.
//! * [`Family::DualMatter`]: `D^K(Z_N)`, `Z_K` matter on faces coupled to the
//!   gauge field through `f(x) = n x mod N`.
//! * [`Family::VertexMatter`]: `D_M(Z_N)`, `M`-level matter on vertices on
//!   which `Z_N` acts by permutations.
//!
//! Every term is a projector. Vertex and dual edge terms are group averages
//! of permutation operators; face terms and vertex-matter comparators are
//! diagonal constraints. [`Term::structure`] records which, so that the
//! spectra module can count ground states exactly.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::groups::{root_of_unity, CyclicGroup, GroupElement, Homomorphism};
use crate::hilbert::{BasisState, LinearOp, SiteLayout, StateVector, DENSE_LIMIT};
use crate::lattice::{Circulation, EdgeId, FaceId, FaceOrder, TorusLattice, VertexId};

/// Default tolerance for operator identities.
pub const OPERATOR_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    DoubleOnly,
    DualMatter,
    VertexMatter,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::DoubleOnly => "double",
            Family::DualMatter => "dual",
            Family::VertexMatter => "vertex",
        })
    }
}

/// Action of `Z_N` on the `M` vertex-matter levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ThetaAction {
    /// Every group element acts as the identity.
    Trivial,
    /// `M = N` and `g` shifts the level by `g`.
    Regular,
    /// `M = blocks * N + fixed`: each block of `N` levels is shifted cyclically,
    /// the last `fixed` levels are left alone.
    BlockShift { blocks: usize, fixed: usize },
    /// Explicit table, `table[g][a]` is the image of level `a` under `g`.
    Table(Vec<Vec<usize>>),
}

impl fmt::Display for ThetaAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThetaAction::Trivial => f.write_str("trivial"),
            ThetaAction::Regular => f.write_str("regular"),
            ThetaAction::BlockShift { blocks, fixed } => write!(f, "block:{blocks}:{fixed}"),
            ThetaAction::Table(_) => f.write_str("table"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    /// `double`, `dual` or `vertex`, matching `Display`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double" => Ok(Family::DoubleOnly),
            "dual" => Ok(Family::DualMatter),
            "vertex" => Ok(Family::VertexMatter),
            _ => Err(Error::InvalidModel(format!(
                "unknown family '{s}' (double, dual, vertex)"
            ))),
        }
    }
}

impl FromStr for ThetaAction {
    type Err = Error;

    /// `trivial`, `regular` or `block:<blocks>:<fixed>`, matching `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidAction(format!("'{s}' (trivial, regular, block:B:F)"));
        match s {
            "trivial" => Ok(ThetaAction::Trivial),
            "regular" => Ok(ThetaAction::Regular),
            _ => match s.split(':').collect::<Vec<_>>().as_slice() {
                ["block", b, f] => Ok(ThetaAction::BlockShift {
                    blocks: b.parse().map_err(|_| bad())?,
                    fixed: f.parse().map_err(|_| bad())?,
                }),
                _ => Err(bad()),
            },
        }
    }
}

impl ThetaAction {
    /// The action as a validated table `theta[g][a]`.
    pub fn table(&self, gauge: usize, matter: usize) -> Result<Vec<Vec<usize>>> {
        if gauge == 0 || matter == 0 {
            return Err(Error::EmptyGroup);
        }
        let table: Vec<Vec<usize>> = match self {
            ThetaAction::Trivial => vec![(0..matter).collect(); gauge],
            ThetaAction::Regular => {
                if matter != gauge {
                    return Err(Error::InvalidAction(format!(
                        "the regular action needs M = N, got M = {matter}, N = {gauge}"
                    )));
                }
                (0..gauge)
                    .map(|g| (0..matter).map(|a| (a + g) % gauge).collect())
                    .collect()
            }
            &ThetaAction::BlockShift { blocks, fixed } => {
                if blocks * gauge + fixed != matter {
                    return Err(Error::InvalidAction(format!(
                        "{blocks} shift blocks of size {gauge} plus {fixed} fixed levels \
                         do not make M = {matter}"
                    )));
                }
                (0..gauge)
                    .map(|g| {
                        (0..matter)
                            .map(|a| {
                                if a < blocks * gauge {
                                    (a / gauge) * gauge + (a % gauge + g) % gauge
                                } else {
                                    a
                                }
                            })
                            .collect()
                    })
                    .collect()
            }
            ThetaAction::Table(t) => t.clone(),
        };
        validate_action(&table, gauge, matter)?;
        Ok(table)
    }
}

fn validate_action(table: &[Vec<usize>], gauge: usize, matter: usize) -> Result<()> {
    if table.len() != gauge {
        return Err(Error::InvalidAction(format!(
            "expected {gauge} rows, one per group element, got {}",
            table.len()
        )));
    }
    for (g, row) in table.iter().enumerate() {
        let mut seen = vec![false; matter];
        if row.len() != matter {
            return Err(Error::InvalidAction(format!(
                "row {g} has {} entries, expected {matter}",
                row.len()
            )));
        }
        for &a in row {
            if a >= matter || std::mem::replace(&mut seen[a], true) {
                return Err(Error::InvalidAction(format!(
                    "row {g} is not a permutation"
                )));
            }
        }
    }
    if table[0].iter().enumerate().any(|(a, &b)| a != b) {
        return Err(Error::InvalidAction(
            "the identity must act trivially".into(),
        ));
    }
    for g in 0..gauge {
        for h in 0..gauge {
            for a in 0..matter {
                if table[(g + h) % gauge][a] != table[g][table[h][a]] {
                    return Err(Error::InvalidAction(format!(
                        "theta({g}+{h}) differs from theta({g}) after theta({h})"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Permutation matrix of `theta(g)`: column `a` has its one in row `theta(g, a)`.
pub fn action_matrix(table: &[Vec<usize>], g: usize) -> DMatrix<f64> {
    let row = &table[g % table.len()];
    let m = row.len();
    DMatrix::from_fn(m, m, |r, c| if row[c] == r { 1.0 } else { 0.0 })
}

/// Everything needed to build a model deterministically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelSpec {
    pub family: Family,
    /// Gauge group order `N`.
    pub gauge: usize,
    /// Matter dimension: `K` (faces), `M` (vertices), or 1 for the plain double.
    pub matter: usize,
    /// Homomorphism multiplier `n`; only used by the face-matter family.
    pub multiplier: usize,
    /// Group action on vertex matter; only used by the vertex-matter family.
    pub theta: ThetaAction,
    pub rows: usize,
    pub cols: usize,
    pub face_order: FaceOrder,
}

impl ModelSpec {
    pub fn double(gauge: usize, rows: usize, cols: usize) -> Self {
        Self {
            family: Family::DoubleOnly,
            gauge,
            matter: 1,
            multiplier: 0,
            theta: ThetaAction::Trivial,
            rows,
            cols,
            face_order: FaceOrder::LeftFirst,
        }
    }

    pub fn dual(gauge: usize, matter: usize, multiplier: usize, rows: usize, cols: usize) -> Self {
        Self {
            family: Family::DualMatter,
            gauge,
            matter,
            multiplier,
            theta: ThetaAction::Trivial,
            rows,
            cols,
            face_order: FaceOrder::LeftFirst,
        }
    }

    pub fn vertex(
        gauge: usize,
        matter: usize,
        theta: ThetaAction,
        rows: usize,
        cols: usize,
    ) -> Self {
        Self {
            family: Family::VertexMatter,
            gauge,
            matter,
            multiplier: 0,
            theta,
            rows,
            cols,
            face_order: FaceOrder::LeftFirst,
        }
    }

    pub fn with_face_order(mut self, face_order: FaceOrder) -> Self {
        self.face_order = face_order;
        self
    }

    pub fn lattice(&self) -> Result<TorusLattice> {
        TorusLattice::with_face_order(self.rows, self.cols, self.face_order)
    }

    /// The coupling homomorphism (trivial `Z_1 -> Z_N` outside the face-matter family).
    pub fn homomorphism(&self) -> Result<Homomorphism> {
        match self.family {
            Family::DualMatter => Homomorphism::new(self.matter, self.gauge, self.multiplier),
            _ => Homomorphism::trivial(1, self.gauge),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.lattice()?;
        self.homomorphism()?;
        match self.family {
            Family::DoubleOnly if self.matter != 1 => Err(Error::InvalidModel(format!(
                "the plain quantum double carries no matter, got matter dimension {}",
                self.matter
            ))),
            Family::VertexMatter => self.theta.table(self.gauge, self.matter).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Full Hilbert-space dimension.
    pub fn dimension(&self) -> u128 {
        let e = 2 * (self.rows * self.cols) as u32;
        let sites = (self.rows * self.cols) as u32;
        let gauge = (self.gauge as u128).checked_pow(e);
        let matter = match self.family {
            Family::DoubleOnly => Some(1),
            _ => (self.matter as u128).checked_pow(sites),
        };
        gauge
            .zip(matter)
            .and_then(|(a, b)| a.checked_mul(b))
            .unwrap_or(u128::MAX)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::DoubleOnly => write!(f, "D(Z_{})", self.gauge)?,
            Family::DualMatter => write!(
                f,
                "D^{}(Z_{}), n={}",
                self.matter, self.gauge, self.multiplier
            )?,
            Family::VertexMatter => write!(
                f,
                "D_{}(Z_{}), theta={}",
                self.matter, self.gauge, self.theta
            )?,
        }
        write!(f, " on {}x{}", self.rows, self.cols)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    Vertex,
    Face,
    Edge,
}

/// Names one Hamiltonian term, e.g. `A_v2` or `D_j5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TermLabel {
    pub family: Family,
    pub kind: TermKind,
    pub index: usize,
}

impl fmt::Display for TermLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match (self.kind, self.family) {
            (TermKind::Vertex, _) => "A_v",
            (TermKind::Face, _) => "B_p",
            (TermKind::Edge, Family::VertexMatter) => "C_j",
            (TermKind::Edge, _) => "D_j",
        };
        write!(f, "{name}{}", self.index)
    }
}

/// How a projector term is built, used for exact ground-state counting.
#[derive(Clone, Debug)]
pub enum TermStructure {
    /// A 0/1 diagonal matrix in the computational basis.
    Diagonal,
    /// `(1/order) sum_k generator^k` for a permutation operator `generator`.
    GroupAverage { generator: LinearOp, order: usize },
}

#[derive(Clone, Debug)]
pub struct Term {
    pub label: TermLabel,
    pub op: LinearOp,
    pub structure: TermStructure,
}

/// `H = - sum of projector terms`.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    layout: Arc<SiteLayout>,
    terms: Vec<Term>,
}

impl Hamiltonian {
    pub fn new(layout: Arc<SiteLayout>, terms: Vec<Term>) -> Result<Self> {
        if terms
            .iter()
            .any(|t| !Arc::ptr_eq(t.op.layout(), &layout) && **t.op.layout() != *layout)
        {
            return Err(Error::LayoutMismatch);
        }
        Ok(Self { layout, terms })
    }

    pub fn layout(&self) -> &Arc<SiteLayout> {
        &self.layout
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Energy when every term is satisfied.
    pub fn ground_energy(&self) -> f64 {
        -(self.terms.len() as f64)
    }

    /// Concatenate the terms of two Hamiltonians on the same layout.
    pub fn sum(&self, other: &Hamiltonian) -> Result<Hamiltonian> {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Hamiltonian::new(self.layout.clone(), terms)
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        let mut out = StateVector::zero(self.layout.clone());
        for t in &self.terms {
            out = out.axpy(C64::new(-1.0, 0.0), &t.op.apply(psi)?)?;
        }
        Ok(out)
    }

    /// Expectation values of every term in a normalized state.
    pub fn term_expectations(&self, psi: &StateVector) -> Result<Vec<f64>> {
        self.terms
            .iter()
            .map(|t| Ok(t.op.expectation(psi)?.re))
            .collect()
    }

    /// `<psi|H|psi> / <psi|psi>`.
    pub fn energy(&self, psi: &StateVector) -> Result<f64> {
        let norm = psi.norm_sqr();
        if norm == 0.0 {
            return Err(Error::Consistency("energy of the zero vector".into()));
        }
        let total: f64 = self.term_expectations(psi)?.iter().sum();
        Ok(-total / norm)
    }

    /// Columns of `H` as sorted `(row, value)` lists, real parts only
    /// (every term here is real), at most [`DENSE_LIMIT`] states.
    fn real_columns(&self) -> Result<Vec<Vec<(usize, f64)>>> {
        let dim = self.layout.checked_dimension(DENSE_LIMIT)?;
        (0..dim)
            .into_par_iter()
            .map(|x| {
                let col = self.apply(&StateVector::basis(self.layout.clone(), x)?)?;
                col.entries()
                    .iter()
                    .map(|&(r, v)| {
                        if v.im.abs() > 1e-12 {
                            Err(Error::Consistency("Hamiltonian has complex entries".into()))
                        } else {
                            Ok((r, v.re))
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Dense real symmetric matrix, at most [`DENSE_LIMIT`] states.
    pub fn to_dense_real(&self) -> Result<DMatrix<f64>> {
        let cols = self.real_columns()?;
        let mut h = DMatrix::<f64>::zeros(cols.len(), cols.len());
        for (c, col) in cols.iter().enumerate() {
            for &(r, v) in col {
                h[(r, c)] = v;
            }
        }
        Ok(h)
    }

    /// Sorted eigenvalues by dense diagonalization, at most [`DENSE_LIMIT`] states.
    ///
    /// Basis states split into classes that `H` never connects; the matrix is
    /// block diagonal in that ordering and each block is diagonalized densely.
    pub fn dense_spectrum(&self) -> Result<Vec<f64>> {
        let cols = self.real_columns()?;
        let dim = cols.len();
        let mut parent: Vec<usize> = (0..dim).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (c, col) in cols.iter().enumerate() {
            for &(r, _) in col {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); dim];
        for x in 0..dim {
            let r = find(&mut parent, x);
            blocks[r].push(x);
        }
        let blocks: Vec<Vec<usize>> = blocks.into_iter().filter(|b| !b.is_empty()).collect();
        let mut ev: Vec<f64> = blocks
            .par_iter()
            .flat_map_iter(|block| {
                let pos = |x: usize| block.binary_search(&x).expect("same block");
                let mut m = DMatrix::<f64>::zeros(block.len(), block.len());
                for (c, &x) in block.iter().enumerate() {
                    for &(r, v) in &cols[x] {
                        m[(pos(r), c)] = v;
                    }
                }
                m.symmetric_eigenvalues()
                    .iter()
                    .copied()
                    .collect::<Vec<_>>()
            })
            .collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }
}

/// Character-resolved projectors refining one term; label `J` is 0-based.
#[derive(Clone, Debug)]
pub struct ProjectorFamily {
    pub term: TermLabel,
    pub members: Vec<LinearOp>,
}

impl ProjectorFamily {
    /// `max_{a,b} ||P_a P_b - delta_ab P_a||`.
    pub fn orthogonality_defect(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for (a, pa) in self.members.iter().enumerate() {
            for (b, pb) in self.members.iter().enumerate() {
                let prod = pa.compose(pb)?;
                let d = if a == b {
                    prod.distance(pa)?
                } else {
                    prod.max_abs_entry()
                };
                worst = worst.max(d);
            }
        }
        Ok(worst)
    }

    /// `||sum_J P_J - 1||`.
    pub fn completeness_defect(&self) -> Result<f64> {
        let layout = self.members[0].layout().clone();
        let mut sum = LinearOp::scalar(layout.clone(), C64::new(0.0, 0.0));
        for p in &self.members {
            sum = sum.add(p)?;
        }
        sum.distance(&LinearOp::identity(layout))
    }
}

/// Per-site operators of one model.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub vertex: Vec<LinearOp>,
    pub face: Vec<LinearOp>,
    pub edge: Vec<LinearOp>,
}

/// A model bound to a lattice and a site layout.
#[derive(Clone, Debug)]
pub struct Model {
    spec: ModelSpec,
    lattice: TorusLattice,
    layout: Arc<SiteLayout>,
    hom: Homomorphism,
    theta: Vec<Vec<usize>>,
}

impl Model {
    /// Build on the model's own layout: edges, then faces or vertices when present.
    pub fn build(spec: &ModelSpec) -> Result<Self> {
        spec.validate()?;
        let lattice = spec.lattice()?;
        let (faces, vertices) = match spec.family {
            Family::DoubleOnly => (None, None),
            Family::DualMatter => (Some(spec.matter), None),
            Family::VertexMatter => (None, Some(spec.matter)),
        };
        let layout = Arc::new(SiteLayout::for_lattice(
            &lattice, spec.gauge, faces, vertices,
        )?);
        Self::on_layout(spec, layout)
    }

    /// Build on a caller-supplied layout, which must contain this model's sites.
    pub fn on_layout(spec: &ModelSpec, layout: Arc<SiteLayout>) -> Result<Self> {
        spec.validate()?;
        let lattice = spec.lattice()?;
        let theta = match spec.family {
            Family::VertexMatter => spec.theta.table(spec.gauge, spec.matter)?,
            _ => vec![vec![0]; spec.gauge],
        };
        for j in 0..lattice.edge_count() {
            let s = layout.require_edge(j)?;
            check_dim(&layout, s, spec.gauge)?;
        }
        match spec.family {
            Family::DualMatter => {
                for p in 0..lattice.face_count() {
                    let s = layout.require_face(p)?;
                    check_dim(&layout, s, spec.matter)?;
                }
            }
            Family::VertexMatter => {
                for v in 0..lattice.vertex_count() {
                    let s = layout.require_vertex(v)?;
                    check_dim(&layout, s, spec.matter)?;
                }
            }
            Family::DoubleOnly => {}
        }
        Ok(Self {
            spec: spec.clone(),
            lattice,
            layout,
            hom: spec.homomorphism()?,
            theta,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn layout(&self) -> &Arc<SiteLayout> {
        &self.layout
    }

    pub fn homomorphism(&self) -> &Homomorphism {
        &self.hom
    }

    /// `theta[g][a]`; a single fixed level outside the vertex-matter family.
    pub fn theta_table(&self) -> &[Vec<usize>] {
        &self.theta
    }

    fn label(&self, kind: TermKind, index: usize) -> TermLabel {
        TermLabel {
            family: self.spec.family,
            kind,
            index,
        }
    }

    fn n(&self) -> usize {
        self.spec.gauge
    }

    /// Gauge transformation `A^g_v`, a permutation operator.
    ///
    /// Without vertex matter, edges leaving `v` gain `+g` and edges entering
    /// lose `g`. With vertex matter the edge shifts are reversed and the
    /// matter level moves to `theta(g, a)`, which keeps the comparators `C_j`
    /// invariant.
    pub fn vertex_component(&self, v: VertexId, g: usize) -> Result<LinearOp> {
        let star = self.lattice.vertex_star(v)?;
        let n = self.n();
        let g = g % n;
        let flip = self.spec.family == Family::VertexMatter;
        let mut sites = Vec::with_capacity(5);
        let mut shifts = Vec::with_capacity(4);
        for e in star.entries {
            sites.push(self.layout.require_edge(e.edge)?);
            let s = if flip {
                -e.sign.as_i64()
            } else {
                e.sign.as_i64()
            };
            shifts.push((s * g as i64).rem_euclid(n as i64) as usize);
        }
        if flip {
            sites.push(self.layout.require_vertex(v)?);
        }
        let theta = &self.theta[g];
        LinearOp::from_columns(self.layout.clone(), &sites, |d| {
            let mut out = d.to_vec();
            for k in 0..4 {
                out[k] = (d[k] + shifts[k]) % n;
            }
            if flip {
                out[4] = theta[d[4]];
            }
            vec![(out, C64::new(1.0, 0.0))]
        })
    }

    fn group_average(
        &self,
        order: usize,
        label: usize,
        component: impl Fn(usize) -> Result<LinearOp>,
    ) -> Result<LinearOp> {
        let mut acc = component(0)?.scale(C64::new(0.0, 0.0));
        for g in 0..order {
            let w = root_of_unity(order, g * label).conj() / order as f64;
            acc = acc.linear_combination(C64::new(1.0, 0.0), &component(g)?, w)?;
        }
        Ok(acc)
    }

    /// `A_v = (1/N) sum_g A^g_v`.
    pub fn vertex_op(&self, v: VertexId) -> Result<LinearOp> {
        self.group_average(self.n(), 0, |g| self.vertex_component(v, g))
    }

    fn face_word(&self) -> Circulation {
        match self.spec.family {
            Family::VertexMatter => Circulation::CounterClockwise,
            _ => self.lattice.matter_circulation(),
        }
    }

    fn face_sites(&self, p: FaceId) -> Result<(Vec<usize>, [i64; 4])> {
        let word = self.lattice.face_boundary(p)?.word(self.face_word());
        let mut sites = Vec::with_capacity(5);
        for &(e, _) in &word {
            sites.push(self.layout.require_edge(e)?);
        }
        if self.spec.family == Family::DualMatter {
            sites.push(self.layout.require_face(p)?);
        }
        Ok((sites, word.map(|(_, s)| s.as_i64())))
    }

    fn holonomy_of(&self, signs: &[i64; 4], d: &[usize]) -> usize {
        let n = self.n() as i64;
        let mut h: i64 = (0..4).map(|k| signs[k] * d[k] as i64).sum();
        if self.spec.family == Family::DualMatter {
            h += self.hom.apply_value(d[4]).value() as i64;
        }
        h.rem_euclid(n) as usize
    }

    /// `B^h_p`: projector onto boundary configurations whose (fake) holonomy is `h`.
    pub fn face_component(&self, p: FaceId, h: usize) -> Result<LinearOp> {
        let (sites, signs) = self.face_sites(p)?;
        let h = h % self.n();
        LinearOp::from_columns(self.layout.clone(), &sites, |d| {
            if self.holonomy_of(&signs, d) == h {
                vec![(d.to_vec(), C64::new(1.0, 0.0))]
            } else {
                Vec::new()
            }
        })
    }

    pub fn face_op(&self, p: FaceId) -> Result<LinearOp> {
        self.face_component(p, 0)
    }

    /// Holonomy around `p` in `state`, including the matter term `f(gamma)` when present.
    pub fn fake_holonomy(&self, p: FaceId, state: &BasisState) -> Result<GroupElement> {
        let (sites, signs) = self.face_sites(p)?;
        if state.digits().len() != self.layout.len() {
            return Err(Error::DimensionMismatch {
                expected: self.layout.len(),
                found: state.digits().len(),
            });
        }
        let d: Vec<usize> = sites.iter().map(|&s| state.get(s)).collect();
        Ok(CyclicGroup::new(self.n())?.element(self.holonomy_of(&signs, &d) as i64))
    }

    fn edge_shift(&self, j: EdgeId, lambda: usize, p2_sign: i64) -> Result<LinearOp> {
        let (p1, p2) = self.lattice.edge_faces(j)?;
        let sites = [
            self.layout.require_edge(j)?,
            self.layout.require_face(p1)?,
            self.layout.require_face(p2)?,
        ];
        let (n, k) = (self.n(), self.spec.matter);
        let a = self.hom.apply_value(lambda).value();
        let l2 = (p2_sign * lambda as i64).rem_euclid(k as i64) as usize;
        LinearOp::from_columns(self.layout.clone(), &sites, |d| {
            vec![(
                vec![(d[0] + a) % n, (d[1] + lambda) % k, (d[2] + l2) % k],
                C64::new(1.0, 0.0),
            )]
        })
    }

    /// `D^lambda_j`: face `p1` gains `lambda`, face `p2` loses it, edge `j` gains `f(lambda)`.
    pub fn edge_component(&self, j: EdgeId, lambda: usize) -> Result<LinearOp> {
        self.require_family(Family::DualMatter, "D_j")?;
        self.edge_shift(j, lambda % self.spec.matter, -1)
    }

    /// A deliberately wrong `D_j` that shifts `p2` by `+lambda`. Used to show
    /// that the solvability check detects broken terms.
    pub fn corrupted_edge_op(&self, j: EdgeId) -> Result<LinearOp> {
        self.require_family(Family::DualMatter, "D_j")?;
        let k = self.spec.matter;
        self.group_average(k, 0, |l| self.edge_shift(j, l, 1))
    }

    /// Comparator `C_j`: 1 when the head level equals `theta(a, tail level)`.
    pub fn comparator(&self, j: EdgeId) -> Result<LinearOp> {
        self.require_family(Family::VertexMatter, "C_j")?;
        let (tail, head) = self.lattice.edge_endpoints(j)?;
        let sites = [
            self.layout.require_edge(j)?,
            self.layout.require_vertex(tail)?,
            self.layout.require_vertex(head)?,
        ];
        LinearOp::from_columns(self.layout.clone(), &sites, |d| {
            if self.theta[d[0]][d[1]] == d[2] {
                vec![(d.to_vec(), C64::new(1.0, 0.0))]
            } else {
                Vec::new()
            }
        })
    }

    /// The edge term: `D_j` with face matter, `C_j` with vertex matter.
    pub fn edge_op(&self, j: EdgeId) -> Result<LinearOp> {
        match self.spec.family {
            Family::DualMatter => {
                self.group_average(self.spec.matter, 0, |l| self.edge_component(j, l))
            }
            Family::VertexMatter => self.comparator(j),
            Family::DoubleOnly => Err(Error::InvalidModel(
                "the plain quantum double has no edge terms".into(),
            )),
        }
    }

    fn require_family(&self, family: Family, what: &str) -> Result<()> {
        if self.spec.family == family {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!(
                "{what} is not defined for the {} family",
                self.spec.family
            )))
        }
    }

    fn has_edge_terms(&self) -> bool {
        self.spec.family != Family::DoubleOnly
    }

    /// Number of character labels for each term kind.
    pub fn family_size(&self, kind: TermKind) -> usize {
        match (kind, self.spec.family) {
            (TermKind::Vertex | TermKind::Face, _) => self.n(),
            (TermKind::Edge, Family::DualMatter) => self.spec.matter,
            (TermKind::Edge, _) => 2,
        }
    }

    /// `P_J = (1/|G|) sum_g conj(chi_J(g)) U_g`; `J = 0` is the Hamiltonian term.
    pub fn projector_family(&self, kind: TermKind, site: usize) -> Result<ProjectorFamily> {
        let size = self.family_size(kind);
        let members = match kind {
            TermKind::Vertex => (0..size)
                .map(|label| self.group_average(size, label, |g| self.vertex_component(site, g)))
                .collect::<Result<Vec<_>>>()?,
            TermKind::Face => (0..size)
                .map(|h| self.face_component(site, h))
                .collect::<Result<Vec<_>>>()?,
            TermKind::Edge => match self.spec.family {
                Family::DualMatter => (0..size)
                    .map(|label| self.group_average(size, label, |l| self.edge_component(site, l)))
                    .collect::<Result<Vec<_>>>()?,
                Family::VertexMatter => {
                    let c = self.comparator(site)?;
                    let id = LinearOp::identity(self.layout.clone());
                    vec![c.clone(), id.sub(&c)?]
                }
                Family::DoubleOnly => {
                    return Err(Error::InvalidModel(
                        "the plain quantum double has no edge terms".into(),
                    ))
                }
            },
        };
        Ok(ProjectorFamily {
            term: self.label(kind, site),
            members,
        })
    }

    pub fn operator_set(&self) -> Result<OperatorSet> {
        let vertex = (0..self.lattice.vertex_count())
            .map(|v| self.vertex_op(v))
            .collect::<Result<_>>()?;
        let face = (0..self.lattice.face_count())
            .map(|p| self.face_op(p))
            .collect::<Result<_>>()?;
        let edge = if self.has_edge_terms() {
            (0..self.lattice.edge_count())
                .map(|j| self.edge_op(j))
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        Ok(OperatorSet { vertex, face, edge })
    }

    /// `H = -sum A_v - sum B_p - sum (D_j or C_j)`.
    pub fn hamiltonian(&self) -> Result<Hamiltonian> {
        let mut terms = Vec::new();
        for v in 0..self.lattice.vertex_count() {
            terms.push(Term {
                label: self.label(TermKind::Vertex, v),
                op: self.vertex_op(v)?,
                structure: TermStructure::GroupAverage {
                    generator: self.vertex_component(v, 1)?,
                    order: self.n(),
                },
            });
        }
        for p in 0..self.lattice.face_count() {
            terms.push(Term {
                label: self.label(TermKind::Face, p),
                op: self.face_op(p)?,
                structure: TermStructure::Diagonal,
            });
        }
        if self.has_edge_terms() {
            for j in 0..self.lattice.edge_count() {
                let structure = match self.spec.family {
                    Family::DualMatter => TermStructure::GroupAverage {
                        generator: self.edge_component(j, 1)?,
                        order: self.spec.matter,
                    },
                    _ => TermStructure::Diagonal,
                };
                terms.push(Term {
                    label: self.label(TermKind::Edge, j),
                    op: self.edge_op(j)?,
                    structure,
                });
            }
        }
        Hamiltonian::new(self.layout.clone(), terms)
    }

    pub fn solvability_check(&self) -> Result<SolvabilityReport> {
        let h = self.hamiltonian()?;
        let labelled: Vec<(TermLabel, LinearOp)> =
            h.terms.into_iter().map(|t| (t.label, t.op)).collect();
        Ok(check_terms(&labelled))
    }
}

fn check_dim(layout: &SiteLayout, site: usize, expected: usize) -> Result<()> {
    if layout.dim(site) == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            found: layout.dim(site),
        })
    }
}

/// Result of certifying that the terms are commuting projectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SolvabilityReport {
    pub terms: usize,
    /// Pairs with overlapping support; all others commute trivially.
    pub pairs_checked: usize,
    pub max_commutator_norm: f64,
    pub worst_pair: Option<(TermLabel, TermLabel)>,
    pub max_projector_defect: f64,
    pub max_hermiticity_defect: f64,
    /// Cyclic gauge groups are abelian.
    pub abelian: bool,
    /// The image of the coupling lies in the center of the gauge group.
    pub center_condition: bool,
}

impl SolvabilityReport {
    pub fn is_solvable(&self, tol: f64) -> bool {
        self.abelian
            && self.center_condition
            && self.max_commutator_norm < tol
            && self.max_projector_defect < tol
            && self.max_hermiticity_defect < tol
    }
}

/// Pairwise commutators, projector and hermiticity defects of labelled terms.
pub fn check_terms(terms: &[(TermLabel, LinearOp)]) -> SolvabilityReport {
    let overlapping: Vec<(usize, usize)> = (0..terms.len())
        .flat_map(|a| (a + 1..terms.len()).map(move |b| (a, b)))
        .filter(|&(a, b)| {
            let (sa, sb) = (terms[a].1.support(), terms[b].1.support());
            sa.iter().any(|s| sb.binary_search(s).is_ok())
        })
        .collect();
    let norms: Vec<f64> = overlapping
        .par_iter()
        .map(|&(a, b)| {
            terms[a]
                .1
                .commutator_norm(&terms[b].1)
                .unwrap_or(f64::INFINITY)
        })
        .collect();
    let (worst, max_norm) =
        norms.iter().enumerate().fold(
            (None, 0.0f64),
            |(w, m), (k, &x)| if x > m { (Some(k), x) } else { (w, m) },
        );
    let defects: Vec<(f64, f64)> = terms
        .par_iter()
        .map(|(_, op)| (op.projector_defect(), op.hermiticity_defect()))
        .collect();
    SolvabilityReport {
        terms: terms.len(),
        pairs_checked: overlapping.len(),
        max_commutator_norm: max_norm,
        worst_pair: worst.map(|k| {
            let (a, b) = overlapping[k];
            (terms[a].0, terms[b].0)
        }),
        max_projector_defect: defects.iter().map(|d| d.0).fold(0.0, f64::max),
        max_hermiticity_defect: defects.iter().map(|d| d.1).fold(0.0, f64::max),
        abelian: true,
        center_condition: true,
    }
}

/// `A_v` of the model described by `spec`.
pub fn build_vertex_op(spec: &ModelSpec, v: VertexId) -> Result<LinearOp> {
    Model::build(spec)?.vertex_op(v)
}

/// `B_p` of the model described by `spec`.
pub fn build_face_op(spec: &ModelSpec, p: FaceId) -> Result<LinearOp> {
    Model::build(spec)?.face_op(p)
}

/// `D_j` (or `C_j`) of the model described by `spec`.
pub fn build_edge_op(spec: &ModelSpec, j: EdgeId) -> Result<LinearOp> {
    Model::build(spec)?.edge_op(j)
}

pub fn build_hamiltonian(spec: &ModelSpec) -> Result<Hamiltonian> {
    Model::build(spec)?.hamiltonian()
}

/// Cross-family commutator norms of a combined model; reported, not asserted.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossCommutatorReport {
    pub face_matter_terms: Vec<TermLabel>,
    pub vertex_matter_terms: Vec<TermLabel>,
    /// `norms[a][b]` for face-matter term `a` and vertex-matter term `b`.
    pub norms: Vec<Vec<f64>>,
    pub max_norm: f64,
}

#[derive(Clone, Debug)]
pub struct TotalHamiltonian {
    pub face_matter: Model,
    pub vertex_matter: Model,
    pub hamiltonian: Hamiltonian,
    pub cross: CrossCommutatorReport,
}

/// `H_total = H_{D_M} + H_{D^K}` on the joint layout of edges, faces and vertices.
pub fn build_total_hamiltonian(dual: &ModelSpec, vertex: &ModelSpec) -> Result<TotalHamiltonian> {
    if dual.family != Family::DualMatter || vertex.family != Family::VertexMatter {
        return Err(Error::InvalidModel(
            "the total Hamiltonian combines a face-matter and a vertex-matter model".into(),
        ));
    }
    if dual.gauge != vertex.gauge
        || (dual.rows, dual.cols) != (vertex.rows, vertex.cols)
        || dual.face_order != vertex.face_order
    {
        return Err(Error::InvalidModel(
            "both models need the same gauge group and lattice".into(),
        ));
    }
    let lattice = dual.lattice()?;
    let layout = Arc::new(SiteLayout::for_lattice(
        &lattice,
        dual.gauge,
        Some(dual.matter),
        Some(vertex.matter),
    )?);
    let face_matter = Model::on_layout(dual, layout.clone())?;
    let vertex_matter = Model::on_layout(vertex, layout)?;
    let hd = face_matter.hamiltonian()?;
    let hv = vertex_matter.hamiltonian()?;
    let norms: Vec<Vec<f64>> = hd
        .terms()
        .par_iter()
        .map(|a| {
            hv.terms()
                .iter()
                .map(|b| a.op.commutator_norm(&b.op))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let max_norm = norms.iter().flatten().copied().fold(0.0, f64::max);
    let cross = CrossCommutatorReport {
        face_matter_terms: hd.terms().iter().map(|t| t.label).collect(),
        vertex_matter_terms: hv.terms().iter().map(|t| t.label).collect(),
        norms,
        max_norm,
    };
    Ok(TotalHamiltonian {
        hamiltonian: hv.sum(&hd)?,
        face_matter,
        vertex_matter,
        cross,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_and_theta_parse_their_display() {
        for f in [Family::DoubleOnly, Family::DualMatter, Family::VertexMatter] {
            assert_eq!(f.to_string().parse::<Family>().unwrap(), f);
        }
        for t in [
            ThetaAction::Trivial,
            ThetaAction::Regular,
            ThetaAction::BlockShift {
                blocks: 2,
                fixed: 1,
            },
        ] {
            assert_eq!(t.to_string().parse::<ThetaAction>().unwrap(), t);
        }
        assert!("block:1".parse::<ThetaAction>().is_err());
        assert!("cubic".parse::<Family>().is_err());
    }
    use crate::hilbert::clock_shift;

    const TOL: f64 = OPERATOR_TOL;

    fn dual(n: usize, k: usize, m: usize) -> Model {
        Model::build(&ModelSpec::dual(n, k, m, 2, 2)).unwrap()
    }

    fn pauli(which: char) -> DMatrix<C64> {
        let (x, z) = clock_shift(2).unwrap();
        match which {
            'x' => x.local_matrix(),
            'z' => z.local_matrix(),
            _ => DMatrix::identity(2, 2),
        }
    }

    fn kron_all(ms: &[DMatrix<C64>]) -> DMatrix<C64> {
        ms.iter()
            .fold(DMatrix::from_element(1, 1, C64::new(1.0, 0.0)), |a, b| {
                a.kronecker(b)
            })
    }

    fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn z2_vertex_term_is_half_one_plus_xxxx() {
        let m = dual(2, 2, 1);
        let a = m.vertex_op(0).unwrap();
        let x4 = kron_all(&[pauli('x'), pauli('x'), pauli('x'), pauli('x')]);
        let expected = (DMatrix::identity(16, 16) + x4) * C64::new(0.5, 0.0);
        assert!(max_diff(&a.local_matrix(), &expected) < 1e-14);
        assert!(m
            .vertex_component(0, 0)
            .unwrap()
            .local_permutation()
            .unwrap()
            .iter()
            .enumerate()
            .all(|(i, &j)| i == j));
    }

    #[test]
    fn z2_face_and_edge_terms_match_the_pauli_forms() {
        let m = dual(2, 2, 1);
        // Support order: four boundary edges (sorted ids) then the face.
        let b = m.face_op(0).unwrap();
        assert_eq!(b.support().len(), 5);
        let z5 = kron_all(&[pauli('z'), pauli('z'), pauli('z'), pauli('z'), pauli('z')]);
        let expected = (DMatrix::identity(32, 32) + z5) * C64::new(0.5, 0.0);
        assert!(max_diff(&b.local_matrix(), &expected) < 1e-14);
        let d = m.edge_op(0).unwrap();
        let x3 = kron_all(&[pauli('x'), pauli('x'), pauli('x')]);
        let expected = (DMatrix::identity(8, 8) + x3) * C64::new(0.5, 0.0);
        assert!(max_diff(&d.local_matrix(), &expected) < 1e-14);
    }

    #[test]
    fn trivial_coupling_leaves_face_and_edge_factors_alone() {
        let m = dual(2, 2, 0);
        let b = m.face_op(0).unwrap();
        let z4 = kron_all(&[pauli('z'), pauli('z'), pauli('z'), pauli('z'), pauli('1')]);
        let expected = (DMatrix::identity(32, 32) + z4) * C64::new(0.5, 0.0);
        assert!(max_diff(&b.local_matrix(), &expected) < 1e-14);
        let d = m.edge_op(0).unwrap();
        let x2 = kron_all(&[pauli('1'), pauli('x'), pauli('x')]);
        let expected = (DMatrix::identity(8, 8) + x2) * C64::new(0.5, 0.0);
        assert!(max_diff(&d.local_matrix(), &expected) < 1e-14);
    }

    #[test]
    fn z3_vertex_projector_has_rank_one_third() {
        let m = Model::build(&ModelSpec::double(3, 2, 2)).unwrap();
        let a = m.vertex_op(0).unwrap();
        let local = a.local_matrix();
        let trace: C64 = (0..local.nrows()).map(|i| local[(i, i)]).sum();
        assert!((trace.re - 81.0 / 3.0).abs() < 1e-10);
        assert!(a.is_projector(TOL));
        let ev = local.map(|v| v.re).symmetric_eigenvalues();
        assert!(ev
            .iter()
            .all(|&e| e.abs() < 1e-10 || (e - 1.0).abs() < 1e-10));
    }

    #[test]
    fn face_term_is_diagonal() {
        for (n, k, mult) in [(2, 2, 1), (4, 2, 2), (3, 3, 1)] {
            let m = dual(n, k, mult);
            assert!(m.face_op(1).unwrap().is_diagonal());
        }
        let v = Model::build(&ModelSpec::vertex(2, 2, ThetaAction::Regular, 2, 2)).unwrap();
        assert!(v.face_op(1).unwrap().is_diagonal());
        assert!(v.comparator(3).unwrap().is_diagonal());
    }

    #[test]
    fn solvable_models_pass_the_certifier() {
        for (n, k, mult) in [(2, 2, 1), (2, 2, 0), (3, 3, 2), (4, 2, 2), (2, 4, 1)] {
            let r = dual(n, k, mult).solvability_check().unwrap();
            assert!(r.is_solvable(TOL), "{n} {k} {mult}: {r:?}");
            assert_eq!(r.terms, 16);
        }
    }

    #[test]
    fn corrupted_edge_term_is_caught() {
        let m = dual(3, 3, 1);
        let h = m.hamiltonian().unwrap();
        let mut terms: Vec<(TermLabel, LinearOp)> =
            h.terms().iter().map(|t| (t.label, t.op.clone())).collect();
        let k = terms
            .iter()
            .position(|t| t.0.kind == TermKind::Edge)
            .unwrap();
        terms[k].1 = m.corrupted_edge_op(terms[k].0.index).unwrap();
        let r = check_terms(&terms);
        assert!(r.max_commutator_norm > 0.1);
        let (a, b) = r.worst_pair.unwrap();
        assert!(a.kind == TermKind::Edge || b.kind == TermKind::Edge);
        assert!(!r.is_solvable(TOL));
    }

    #[test]
    fn invalid_specs_are_refused() {
        let err = Model::build(&ModelSpec::dual(2, 3, 1, 2, 2)).unwrap_err();
        assert!(err.to_string().contains("not a homomorphism"));
        assert!(Model::build(&ModelSpec::dual(2, 2, 1, 1, 2)).is_err());
        assert!(Model::build(&ModelSpec::vertex(2, 3, ThetaAction::Regular, 2, 2)).is_err());
        let bad = ThetaAction::Table(vec![vec![0, 1, 2], vec![1, 0, 2], vec![0, 2, 1]]);
        assert!(matches!(
            Model::build(&ModelSpec::vertex(3, 3, bad, 2, 2)),
            Err(Error::InvalidAction(_))
        ));
    }

    #[test]
    fn block_shift_action_matrix() {
        let t = ThetaAction::BlockShift {
            blocks: 2,
            fixed: 1,
        }
        .table(3, 7)
        .unwrap();
        let m = action_matrix(&t, 1);
        let shift = DMatrix::from_fn(3, 3, |r, c| if r == (c + 1) % 3 { 1.0 } else { 0.0 });
        let mut expected = DMatrix::<f64>::zeros(7, 7);
        expected.view_mut((0, 0), (3, 3)).copy_from(&shift);
        expected.view_mut((3, 3), (3, 3)).copy_from(&shift);
        expected[(6, 6)] = 1.0;
        assert_eq!(m, expected);
        assert_eq!(action_matrix(&t, 0), DMatrix::identity(7, 7));
        assert!(ThetaAction::BlockShift {
            blocks: 1,
            fixed: 0
        }
        .table(3, 4)
        .is_err());
    }

    #[test]
    fn regular_comparator_on_z2() {
        let m = Model::build(&ModelSpec::vertex(2, 2, ThetaAction::Regular, 2, 2)).unwrap();
        let c = m.comparator(0).unwrap();
        // Support is (edge 0, vertex 0, vertex 1) in site order; edge 0 runs 0 -> 1.
        let local = c.local_matrix();
        for a in 0..2 {
            for alpha in 0..2 {
                for beta in 0..2 {
                    let i = (a * 2 + alpha) * 2 + beta;
                    let want = if beta == (alpha + a) % 2 { 1.0 } else { 0.0 };
                    assert_eq!(local[(i, i)].re, want);
                }
            }
        }
    }

    #[test]
    fn one_level_vertex_matter_is_the_plain_double() {
        let vm = Model::build(&ModelSpec::vertex(3, 1, ThetaAction::Trivial, 2, 2)).unwrap();
        let d = Model::build(&ModelSpec::double(3, 2, 2)).unwrap();
        for v in 0..4 {
            let a = vm.vertex_op(v).unwrap().local_matrix();
            let b = d.vertex_op(v).unwrap().local_matrix();
            assert!(max_diff(&a, &b) < 1e-14);
            let a = vm.face_op(v).unwrap().local_matrix();
            let b = d.face_op(v).unwrap().local_matrix();
            assert!(max_diff(&a, &b) < 1e-14);
        }
        for j in 0..8 {
            let c = vm.comparator(j).unwrap();
            assert!(
                c.distance(&LinearOp::identity(vm.layout().clone()))
                    .unwrap()
                    < 1e-14
            );
        }
    }

    #[test]
    fn vertex_matter_models_are_solvable() {
        let specs = [
            ModelSpec::vertex(2, 2, ThetaAction::Regular, 2, 2),
            ModelSpec::vertex(
                2,
                3,
                ThetaAction::BlockShift {
                    blocks: 1,
                    fixed: 1,
                },
                2,
                2,
            ),
            ModelSpec::vertex(3, 3, ThetaAction::Regular, 2, 2),
            ModelSpec::vertex(3, 2, ThetaAction::Trivial, 2, 2),
        ];
        for s in specs {
            let r = Model::build(&s).unwrap().solvability_check().unwrap();
            assert!(r.is_solvable(TOL), "{s}: {r:?}");
        }
    }

    #[test]
    fn projector_families_are_orthogonal_and_complete() {
        let m = dual(3, 3, 1);
        for kind in [TermKind::Vertex, TermKind::Face, TermKind::Edge] {
            let fam = m.projector_family(kind, 1).unwrap();
            assert_eq!(fam.members.len(), 3);
            assert!(fam.orthogonality_defect().unwrap() < TOL);
            assert!(fam.completeness_defect().unwrap() < TOL);
        }
        let fam = m.projector_family(TermKind::Edge, 2).unwrap();
        assert!(fam.members[0].distance(&m.edge_op(2).unwrap()).unwrap() < 1e-14);
        let v = Model::build(&ModelSpec::vertex(2, 2, ThetaAction::Regular, 2, 2)).unwrap();
        let fam = v.projector_family(TermKind::Edge, 0).unwrap();
        assert!(fam.completeness_defect().unwrap() < TOL);
    }

    #[test]
    fn z2_face_family_second_member() {
        let m = dual(2, 2, 1);
        let fam = m.projector_family(TermKind::Face, 0).unwrap();
        let z5 = kron_all(&[pauli('z'), pauli('z'), pauli('z'), pauli('z'), pauli('z')]);
        let expected = (DMatrix::identity(32, 32) - z5) * C64::new(0.5, 0.0);
        assert!(max_diff(&fam.members[1].local_matrix(), &expected) < 1e-14);
    }

    #[test]
    fn fake_holonomy_examples() {
        let m = dual(2, 2, 1);
        let layout = m.layout().clone();
        let mut s = BasisState::zero(&layout);
        assert!(m.fake_holonomy(0, &s).unwrap().is_identity());
        let face_site = layout.face_site(0).unwrap();
        s.set(&layout, face_site, 1).unwrap();
        assert_eq!(m.fake_holonomy(0, &s).unwrap().value(), 1);
        let psi = StateVector::from_basis_state(layout.clone(), &s).unwrap();
        assert!(m.face_op(0).unwrap().expectation(&psi).unwrap().norm() < 1e-14);
        // Matter in the kernel looks like true holonomy.
        let k = dual(4, 4, 2);
        let layout = k.layout().clone();
        let mut s = BasisState::zero(&layout);
        s.set(&layout, layout.face_site(0).unwrap(), 2).unwrap();
        assert!(k.fake_holonomy(0, &s).unwrap().is_identity());
    }

    #[test]
    fn one_level_face_matter_adds_a_constant() {
        let h1 = Model::build(&ModelSpec::dual(2, 1, 0, 2, 2))
            .unwrap()
            .hamiltonian()
            .unwrap();
        let h0 = Model::build(&ModelSpec::double(2, 2, 2))
            .unwrap()
            .hamiltonian()
            .unwrap();
        let d1 = h1.to_dense_real().unwrap();
        let d0 = h0.to_dense_real().unwrap();
        let shift = DMatrix::<f64>::identity(256, 256) * 8.0;
        assert!((d1 - (d0 - shift)).abs().max() < 1e-12);
    }

    #[test]
    fn total_hamiltonian_reports_cross_commutators() {
        let t = build_total_hamiltonian(
            &ModelSpec::dual(2, 1, 0, 2, 2),
            &ModelSpec::vertex(2, 1, ThetaAction::Trivial, 2, 2),
        )
        .unwrap();
        assert_eq!(t.hamiltonian.terms().len(), 32);
        assert!(t.cross.max_norm < TOL);
        assert!(build_total_hamiltonian(
            &ModelSpec::dual(2, 2, 1, 2, 2),
            &ModelSpec::vertex(3, 1, ThetaAction::Trivial, 2, 2)
        )
        .is_err());
    }
}
