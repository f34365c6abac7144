//! Ground-space counting, ground states, string operators, W-operators and
//! the character-basis analysis of the edge term.
//!
//! All Hamiltonian terms are commuting projectors, so the ground space is the
//! range of their product `Pi`. Diagonal terms multiply to a 0/1 mask `D`,
//! and the group-average terms multiply to the average over the permutation
//! group `Gamma` generated by their generators. Hence
//!
//! `Tr Pi = sum_x D(x) <x| avg_Gamma |x> = sum_x D(x) / |orbit(x)|`,
//!
//! which is evaluated exactly with a union-find pass over the basis. The
//! term-by-term sweep [`trace_by_sweep`] and the dense diagonalization
//! [`dense_ground_multiplicity`] are kept as independent cross-checks.

use std::fmt;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::groups::{fourier_transform, gsd_formula, root_of_unity, GroupElement};
use crate::hilbert::{
    character_basis, clock_on, shift_on, BasisState, LinearOp, SiteLayout, StateVector, DENSE_LIMIT,
};
use crate::lattice::{Direction, DualPath, FaceId, Path};
use crate::models::{Family, Hamiltonian, Model, TermKind, TermStructure, OPERATOR_TOL};

/// Default cap on the full Hilbert-space dimension for basis sweeps.
pub const DEFAULT_CAP: usize = 2_000_000;

/// Environment variable overriding the dimension cap.
pub const CAP_ENV: &str = "QDLAB_CAP";

/// `QDLAB_CAP` when set to a positive integer.
pub fn cap_from_env() -> Result<Option<usize>> {
    match std::env::var(CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&c| c > 0)
            .map(Some)
            .ok_or_else(|| Error::InvalidModel(format!("{CAP_ENV}={v} is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

/// Outcome of the exact trace of the ground-space projector.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTrace {
    pub dimension: u64,
    /// Unrounded `Tr Pi`.
    pub trace: f64,
    pub basis_states: usize,
    pub orbits: usize,
}

struct Generator {
    perm: Vec<usize>,
    offsets: Vec<usize>,
    op: LinearOp,
}

impl Generator {
    #[inline]
    fn image(&self, x: usize, strides: &[usize]) -> usize {
        let l = self.op.local_index(x, strides);
        x - self.offsets[l] + self.offsets[self.perm[l]]
    }
}

struct Mask {
    allowed: Vec<bool>,
    offsets_op: LinearOp,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Exact `Tr Pi` from the term structure. Verifies along the way that each
/// term matches its declared structure, that generators commute and that the
/// diagonal mask is constant on orbits.
pub fn ground_trace(h: &Hamiltonian, cap: usize) -> Result<GroundTrace> {
    let layout = h.layout().clone();
    let dim = layout.checked_dimension(cap)?;
    let strides = layout.strides()?.to_vec();
    let mut masks = Vec::new();
    let mut gens: Vec<Generator> = Vec::new();
    for t in h.terms() {
        match &t.structure {
            TermStructure::Diagonal => {
                let diag = t.op.local_diagonal();
                if !t.op.is_diagonal()
                    || diag.iter().any(|v| {
                        v.im.abs() > OPERATOR_TOL
                            || (v.re.abs() > OPERATOR_TOL && (v.re - 1.0).abs() > OPERATOR_TOL)
                    })
                {
                    return Err(Error::Consistency(format!(
                        "term {} is not a 0/1 diagonal projector",
                        t.label
                    )));
                }
                masks.push(Mask {
                    allowed: diag.iter().map(|v| v.re > 0.5).collect(),
                    offsets_op: t.op.clone(),
                });
            }
            TermStructure::GroupAverage { generator, order } => {
                let perm = generator.local_permutation().ok_or_else(|| {
                    Error::Consistency(format!("generator of {} is not a permutation", t.label))
                })?;
                let mut avg = generator.scale(C64::new(0.0, 0.0));
                let mut power = LinearOp::identity(layout.clone());
                for _ in 0..*order {
                    avg = avg.add(&power)?;
                    power = generator.compose(&power)?;
                }
                let avg = avg.scale(C64::new(1.0 / *order as f64, 0.0));
                if avg.distance(&t.op)? > OPERATOR_TOL {
                    return Err(Error::Consistency(format!(
                        "term {} is not the average of its generator",
                        t.label
                    )));
                }
                gens.push(Generator {
                    perm,
                    offsets: generator.full_offsets()?,
                    op: generator.clone(),
                });
            }
        }
    }
    for (a, ga) in gens.iter().enumerate() {
        for gb in &gens[a + 1..] {
            if ga.op.commutator_norm(&gb.op)? > OPERATOR_TOL {
                return Err(Error::Consistency("term generators do not commute".into()));
            }
        }
    }

    let allowed: Vec<bool> = (0..dim)
        .into_par_iter()
        .map(|x| {
            masks
                .iter()
                .all(|m| m.allowed[m.offsets_op.local_index(x, &strides)])
        })
        .collect();

    let mut parent: Vec<usize> = (0..dim).collect();
    for x in 0..dim {
        for g in &gens {
            let y = g.image(x, &strides);
            let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
            if rx != ry {
                let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
                parent[hi] = lo;
            }
        }
    }
    let mut orbit_size = vec![0u32; dim];
    let mut roots = Vec::with_capacity(dim);
    for x in 0..dim {
        let r = find(&mut parent, x);
        roots.push(r);
        orbit_size[r] += 1;
        if allowed[x] != allowed[r] {
            return Err(Error::Consistency(
                "diagonal terms are not invariant under the group-average terms".into(),
            ));
        }
    }
    let orbits = (0..dim).filter(|&x| roots[x] == x).count();
    let trace: f64 = (0..dim)
        .filter(|&x| allowed[x])
        .map(|x| 1.0 / orbit_size[roots[x]] as f64)
        .sum();
    let rounded = trace.round();
    if (trace - rounded).abs() > 1e-6 {
        return Err(Error::Consistency(format!(
            "ground-space trace {trace} is not an integer"
        )));
    }
    Ok(GroundTrace {
        dimension: rounded as u64,
        trace,
        basis_states: dim,
        orbits,
    })
}

/// Ground-space dimension of `model`, refusing spaces larger than `cap`.
pub fn ground_space_dimension(model: &Model, cap: usize) -> Result<u64> {
    Ok(ground_trace(&model.hamiltonian()?, cap)?.dimension)
}

/// Apply every term of `h` to `psi`, diagonal terms first.
pub fn project(h: &Hamiltonian, psi: &StateVector) -> Result<StateVector> {
    let mut out = psi.clone();
    let ordered = h
        .terms()
        .iter()
        .filter(|t| matches!(t.structure, TermStructure::Diagonal))
        .chain(
            h.terms()
                .iter()
                .filter(|t| !matches!(t.structure, TermStructure::Diagonal)),
        );
    for t in ordered {
        if out.support_size() == 0 {
            break;
        }
        out = t.op.apply(&out)?;
    }
    Ok(out)
}

/// `Tr Pi` by projecting every basis vector through all terms in turn.
/// Slow; meant as an independent check on small spaces.
pub fn trace_by_sweep(h: &Hamiltonian, cap: usize) -> Result<f64> {
    let dim = h.layout().checked_dimension(cap)?;
    let layout = h.layout().clone();
    let diagonals: Vec<f64> = (0..dim)
        .into_par_iter()
        .map(|x| {
            let e = StateVector::basis(layout.clone(), x)?;
            Ok(project(h, &e)?.amplitude(x).re)
        })
        .collect::<Result<_>>()?;
    Ok(diagonals.iter().sum())
}

/// Number of eigenvalues of `H` within `tol` of the ground energy `-(#terms)`,
/// by dense diagonalization (at most [`DENSE_LIMIT`] states).
pub fn dense_ground_multiplicity(h: &Hamiltonian, tol: f64) -> Result<usize> {
    let e0 = h.ground_energy();
    Ok(h.dense_spectrum()?
        .iter()
        .filter(|e| (*e - e0).abs() < tol)
        .count())
}

/// Summary of the ground-space computation for one model.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    pub model: String,
    pub hilbert_dimension: u128,
    pub ground_space_dimension: u64,
    pub trace: f64,
    /// `|ker f| |coker f|^2` when the family has a closed form.
    pub formula: Option<u64>,
    pub matches: Option<bool>,
    pub ground_energy: f64,
    pub basis_states: usize,
    pub orbits: usize,
}

pub fn spectral_report(model: &Model, cap: usize) -> Result<SpectralReport> {
    let h = model.hamiltonian()?;
    let t = ground_trace(&h, cap)?;
    let formula = match model.spec().family {
        Family::VertexMatter => None,
        _ => Some(gsd_formula(model.homomorphism(), 1)),
    };
    Ok(SpectralReport {
        model: model.spec().to_string(),
        hilbert_dimension: model.layout().dimension(),
        ground_space_dimension: t.dimension,
        trace: t.trace,
        formula,
        matches: formula.map(|f| f == t.dimension),
        ground_energy: h.ground_energy(),
        basis_states: t.basis_states,
        orbits: t.orbits,
    })
}

/// `normalize(Pi |ref>)` where `ref` is all zeros except matter site 0 set
/// to `alpha` (face 0 or vertex 0; `alpha` must be 0 without matter).
pub fn ground_state(model: &Model, alpha: usize) -> Result<StateVector> {
    let h = model.hamiltonian()?;
    ground_state_of(model, &h, alpha)
}

/// As [`ground_state`], reusing an already built Hamiltonian.
pub fn ground_state_of(model: &Model, h: &Hamiltonian, alpha: usize) -> Result<StateVector> {
    let layout = model.layout().clone();
    let mut reference = BasisState::zero(&layout);
    let site = match model.spec().family {
        Family::DualMatter => Some(layout.require_face(0)?),
        Family::VertexMatter => Some(layout.require_vertex(0)?),
        Family::DoubleOnly => None,
    };
    match site {
        Some(s) => reference.set(&layout, s, alpha)?,
        None if alpha != 0 => {
            return Err(Error::InvalidModel(
                "the plain quantum double has no matter to seed".into(),
            ))
        }
        None => {}
    }
    let psi = StateVector::from_basis_state(layout, &reference)?;
    project(h, &psi)?
        .normalized()
        .ok_or(Error::OutsideGroundSector)
}

fn check_layout_paths(
    layout: &SiteLayout,
    edges: impl Iterator<Item = usize>,
) -> Result<Vec<usize>> {
    edges.map(|e| layout.require_edge(e)).collect()
}

/// Accumulated exponent per distinct edge site.
fn exponents(
    layout: &SiteLayout,
    steps: &[(usize, crate::lattice::Sign)],
    g: usize,
) -> Result<Vec<(usize, i64)>> {
    let sites = check_layout_paths(layout, steps.iter().map(|s| s.0))?;
    let mut acc: Vec<(usize, i64)> = Vec::new();
    for (site, &(_, sign)) in sites.into_iter().zip(steps) {
        let e = sign.as_i64() * g as i64;
        match acc.iter_mut().find(|a| a.0 == site) {
            Some(a) => a.1 += e,
            None => acc.push((site, e)),
        }
    }
    Ok(acc)
}

/// `prod_j Z_j^(+-g)` along a primal path; the identity for an empty path.
pub fn string_z(layout: &std::sync::Arc<SiteLayout>, path: &Path, g: usize) -> Result<LinearOp> {
    let mut op = LinearOp::identity(layout.clone());
    for (site, e) in exponents(layout, &path.steps, g)? {
        op = op.compose(&clock_on(layout, site, e)?)?;
    }
    Ok(op)
}

/// `prod_j X_j^(+-g)` across a dual path; the identity for an empty path.
pub fn string_x(
    layout: &std::sync::Arc<SiteLayout>,
    path: &DualPath,
    g: usize,
) -> Result<LinearOp> {
    let mut op = LinearOp::identity(layout.clone());
    for (site, e) in exponents(layout, &path.steps, g)? {
        op = op.compose(&shift_on(layout, site, e)?)?;
    }
    Ok(op)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfinementPoint {
    pub length: usize,
    pub delta_e: f64,
}

/// Energy cost of string states, keyed by strictly increasing length.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfinementProfile {
    pub points: Vec<ConfinementPoint>,
}

impl ConfinementProfile {
    pub fn energies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.delta_e).collect()
    }
}

/// `<psi|H|psi> - E0` for `psi = normalize(op |ground>)`, clamped at zero
/// against rounding.
pub fn excitation_energy(h: &Hamiltonian, ground: &StateVector, op: &LinearOp) -> Result<f64> {
    let psi = op
        .apply(ground)?
        .normalized()
        .ok_or_else(|| Error::Consistency("string operator annihilated the ground state".into()))?;
    Ok((h.energy(&psi)? - h.ground_energy()).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StringKind {
    /// Clock string along an open primal path.
    Z,
    /// Shift string across an open dual path.
    X,
}

impl fmt::Display for StringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StringKind::Z => "z",
            StringKind::X => "x",
        })
    }
}

fn sorted_lengths(lengths: &[usize]) -> Result<Vec<usize>> {
    let mut ls = lengths.to_vec();
    ls.sort_unstable();
    ls.dedup();
    if ls.len() != lengths.len() {
        return Err(Error::InvalidPath("lengths must be distinct".into()));
    }
    Ok(ls)
}

/// Energy of open strings of charge `g` on snake paths from vertex/face 0.
pub fn string_profile(
    model: &Model,
    kind: StringKind,
    g: usize,
    lengths: &[usize],
) -> Result<ConfinementProfile> {
    let lengths = sorted_lengths(lengths)?;
    let h = model.hamiltonian()?;
    let ground = ground_state_of(model, &h, 0)?;
    let lattice = model.lattice();
    let layout = model.layout();
    let points = lengths
        .iter()
        .map(|&length| {
            let op = match kind {
                StringKind::Z => string_z(layout, &lattice.snake_path(0, length)?, g)?,
                StringKind::X => string_x(layout, &lattice.snake_dual_path(0, length)?, g)?,
            };
            Ok(ConfinementPoint {
                length,
                delta_e: excitation_energy(&h, &ground, &op)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ConfinementProfile { points })
}

/// `Delta E(L)` for clock strings of charge `g`.
pub fn confinement_profile(
    model: &Model,
    g: usize,
    lengths: &[usize],
) -> Result<ConfinementProfile> {
    string_profile(model, StringKind::Z, g, lengths)
}

/// Energy of a closed shift string winding once around the torus horizontally.
pub fn loop_energy(model: &Model, g: usize) -> Result<f64> {
    let h = model.hamiltonian()?;
    let ground = ground_state_of(model, &h, 0)?;
    let lattice = model.lattice();
    let path = lattice.straight_dual_path(0, Direction::East, lattice.cols())?;
    excitation_energy(&h, &ground, &string_x(model.layout(), &path, g)?)
}

/// `X^a Z^b` on a face centroid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub x_power: usize,
    pub z_power: usize,
}

impl Monomial {
    /// Pauli name for two-level matter, `X^a Z^b` otherwise.
    pub fn name(&self, matter: usize) -> String {
        if matter == 2 {
            return match (self.x_power, self.z_power) {
                (0, 0) => "1",
                (1, 0) => "sigma_x",
                (0, 1) => "sigma_z",
                _ => "sigma_y",
            }
            .to_string();
        }
        match (self.x_power, self.z_power) {
            (0, 0) => "1".into(),
            (a, 0) => format!("X^{a}"),
            (0, b) => format!("Z^{b}"),
            (a, b) => format!("X^{a} Z^{b}"),
        }
    }
}

/// Monomials intertwining the trivial projectors with the `(J, K)` pair; labels are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WEntry {
    pub gauge_label: usize,
    pub matter_label: usize,
    pub monomials: Vec<Monomial>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WOperatorTable {
    pub face: FaceId,
    pub matter: usize,
    pub entries: Vec<WEntry>,
}

impl WOperatorTable {
    pub fn get(&self, gauge_label: usize, matter_label: usize) -> Option<&WEntry> {
        self.entries
            .iter()
            .find(|e| e.gauge_label == gauge_label && e.matter_label == matter_label)
    }

    /// Label pairs for which `monomial` is a solution.
    pub fn pairs_for(&self, monomial: Monomial) -> Vec<(usize, usize)> {
        self.entries
            .iter()
            .filter(|e| e.monomials.contains(&monomial))
            .map(|e| (e.gauge_label, e.matter_label))
            .collect()
    }
}

/// Solve `B_{p,J} W = W B_{p,1}` and `D_{j,K} W = W D_{j,1}` on face 0 for
/// single-face monomials. On edges where the face is `p2` the matter label
/// enters conjugated, since `D^lambda` shifts `p2` by `-lambda`.
pub fn solve_w_operators(model: &Model) -> Result<WOperatorTable> {
    if model.spec().family != Family::DualMatter {
        return Err(Error::InvalidModel("W-operators act on face matter".into()));
    }
    let p: FaceId = 0;
    let layout = model.layout();
    let lattice = model.lattice();
    let (n, k) = (model.spec().gauge, model.spec().matter);
    let face_site = layout.require_face(p)?;
    let faces = model.projector_family(TermKind::Face, p)?.members;
    let boundary = lattice.face_boundary(p)?;
    let mut edges = Vec::new();
    for &j in &boundary.edges {
        let (p1, _) = lattice.edge_faces(j)?;
        edges.push((p1 == p, model.projector_family(TermKind::Edge, j)?.members));
    }
    let intertwines = |a: &LinearOp, w: &LinearOp, b: &LinearOp| -> Result<bool> {
        Ok(a.compose(w)?.distance(&w.compose(b)?)? < OPERATOR_TOL)
    };
    let mut candidates = Vec::new();
    for x_power in 0..k {
        for z_power in 0..k {
            let w = shift_on(layout, face_site, x_power as i64)?.compose(&clock_on(
                layout,
                face_site,
                z_power as i64,
            )?)?;
            candidates.push((Monomial { x_power, z_power }, w));
        }
    }
    let mut entries = Vec::new();
    for j_label in 0..n {
        for k_label in 0..k {
            let mut monomials = Vec::new();
            for (m, w) in &candidates {
                let mut ok = intertwines(&faces[j_label], w, &faces[0])?;
                for (is_p1, fam) in &edges {
                    if !ok {
                        break;
                    }
                    let label = if *is_p1 { k_label } else { (k - k_label) % k };
                    ok = intertwines(&fam[label], w, &fam[0])?;
                }
                if ok {
                    monomials.push(*m);
                }
            }
            entries.push(WEntry {
                gauge_label: j_label + 1,
                matter_label: k_label + 1,
                monomials,
            });
        }
    }
    Ok(WOperatorTable {
        face: p,
        matter: k,
        entries,
    })
}

/// One diagonal entry of `D_j` in the character basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeEigenvalue {
    /// Character label on `p1`.
    pub alpha: usize,
    /// Character label on the edge.
    pub g: usize,
    /// Character label on `p2`.
    pub beta: usize,
    pub value: C64,
    /// `(1/K) FT[w_g o f](chi_(beta - alpha))`.
    pub predicted: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeDiagonalization {
    pub edge: usize,
    pub max_off_diagonal: f64,
    pub max_formula_error: f64,
    pub entries: Vec<EdgeEigenvalue>,
}

impl EdgeDiagonalization {
    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.max_off_diagonal < tol
    }
}

/// Conjugate `D_j` by the character basis on its three sites and compare the
/// diagonal with the Fourier-transform formula.
pub fn diagonalize_edge_op(model: &Model, j: usize) -> Result<EdgeDiagonalization> {
    if model.spec().family != Family::DualMatter {
        return Err(Error::InvalidModel(
            "the Fourier analysis applies to the face-matter edge term".into(),
        ));
    }
    let layout = model.layout();
    let (n, k) = (model.spec().gauge, model.spec().matter);
    let d = model.edge_op(j)?;
    let u = character_basis(layout.clone()).restrict(d.support())?;
    let conj = u.adjoint().compose(&d)?.compose(&u)?;
    let m = conj.local_matrix();
    let (p1, p2) = model.lattice().edge_faces(j)?;
    let support = conj.support().to_vec();
    let pos = |site: usize| support.iter().position(|&s| s == site).expect("in support");
    let (pe, pa, pb) = (
        pos(layout.require_edge(j)?),
        pos(layout.require_face(p1)?),
        pos(layout.require_face(p2)?),
    );
    let dims: Vec<usize> = support.iter().map(|&s| layout.dim(s)).collect();
    let hom = model.homomorphism();
    let transforms: Vec<Vec<C64>> = (0..n)
        .map(|g| {
            let values: Vec<C64> = (0..k)
                .map(|l| root_of_unity(n, g * hom.apply_value(l).value()))
                .collect();
            fourier_transform(&values)
        })
        .collect();
    let mut max_off = 0.0f64;
    let mut max_err = 0.0f64;
    let mut entries = Vec::with_capacity(m.nrows());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if r != c {
                max_off = max_off.max(m[(r, c)].norm());
            }
        }
        let mut digits = [0; 3];
        let mut rest = r;
        for q in (0..3).rev() {
            digits[q] = rest % dims[q];
            rest /= dims[q];
        }
        let (g, alpha, beta) = (digits[pe], digits[pa], digits[pb]);
        let predicted = transforms[g][(beta + k - alpha) % k] / k as f64;
        max_err = max_err.max((m[(r, r)] - predicted).norm());
        entries.push(EdgeEigenvalue {
            alpha,
            g,
            beta,
            value: m[(r, r)],
            predicted,
        });
    }
    if max_off >= OPERATOR_TOL {
        return Err(Error::Consistency(format!(
            "edge term {j} is not diagonal in the character basis (off-diagonal {max_off:e})"
        )));
    }
    entries.sort_by_key(|e| (e.alpha, e.g, e.beta));
    Ok(EdgeDiagonalization {
        edge: j,
        max_off_diagonal: max_off,
        max_formula_error: max_err,
        entries,
    })
}

/// `f(gamma)` plus the oriented boundary sum of face `p` in `state`.
pub fn fake_holonomy(model: &Model, p: FaceId, state: &BasisState) -> Result<GroupElement> {
    model.fake_holonomy(p, state)
}

/// Cap for the dense cross-checks.
pub const fn dense_limit() -> usize {
    DENSE_LIMIT
}
