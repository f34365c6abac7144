//! Worked examples from the model definitions, checked end to end.

use num_complex::Complex64 as C64;
use qdlab::groups::{
    classify, enumerate_homomorphisms, fourier_transform, gsd_formula, ModelClass,
};
use qdlab::hilbert::{character_basis, clock_shift, embed, SiteKind, SiteLayout};
use qdlab::lattice::Direction;
use qdlab::models::{build_total_hamiltonian, Model, ModelSpec, TermKind, ThetaAction};
use qdlab::spectra::{self, diagonalize_edge_op, string_x, string_z, DEFAULT_CAP};
use qdlab::{BasisState, Homomorphism, LinearOp};
use std::sync::Arc;

fn multipliers(k: usize, n: usize) -> Vec<usize> {
    enumerate_homomorphisms(k, n)
        .unwrap()
        .iter()
        .map(|f| f.multiplier())
        .collect()
}

#[test]
fn homomorphism_examples() {
    assert_eq!(multipliers(2, 2), [0, 1]);
    assert_eq!(multipliers(3, 2), [0]);
    assert_eq!(multipliers(2, 4), [0, 2]);

    let f = Homomorphism::new(4, 4, 2).unwrap();
    assert_eq!(
        (f.kernel_order(), f.image_order(), f.cokernel_order()),
        (2, 2, 2)
    );
    let f = Homomorphism::new(2, 2, 1).unwrap();
    assert_eq!(
        (f.kernel_order(), f.image_order(), f.cokernel_order()),
        (1, 2, 1)
    );
    assert_eq!(Homomorphism::new(3, 2, 0).unwrap().kernel_order(), 3);

    assert_eq!(gsd_formula(&Homomorphism::new(1, 2, 0).unwrap(), 1), 4);
    assert_eq!(gsd_formula(&Homomorphism::new(2, 2, 1).unwrap(), 1), 1);
    assert_eq!(gsd_formula(&Homomorphism::new(2, 2, 0).unwrap(), 0), 2);

    assert_eq!(classify(3, 2, 0).unwrap().class, ModelClass::A);
    assert_eq!(classify(2, 2, 1).unwrap().class, ModelClass::B);
    assert_eq!(classify(4, 4, 2).unwrap().class, ModelClass::C);
    assert!(classify(4, 2, 1).is_err());
}

#[test]
fn fourier_examples() {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let close = |a: &[C64], b: &[C64]| a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12);
    assert!(close(&fourier_transform(&[one, one]), &[one * 2.0, zero]));
    assert!(close(&fourier_transform(&[one, zero]), &[one, one]));
    // omega^{f(lambda)} for f the identity on Z_2.
    assert!(close(&fourier_transform(&[one, -one]), &[zero, one * 2.0]));
}

#[test]
fn clock_shift_and_embed_examples() {
    let (x, z) = clock_shift(3).unwrap();
    let w = qdlab::groups::root_of_unity(3, 1);
    assert!(
        z.compose(&x)
            .unwrap()
            .distance(&x.compose(&z).unwrap().scale(w))
            .unwrap()
            < 1e-12
    );

    let layout =
        Arc::new(SiteLayout::new(vec![(SiteKind::Free(0), 3), (SiteKind::Free(1), 3)]).unwrap());
    let x0 = embed(&x, 0, layout.clone()).unwrap();
    let z1 = embed(&z, 1, layout.clone()).unwrap();
    assert_eq!(x0.commutator_norm(&z1).unwrap(), 0.0);
    assert_eq!(x0.nnz(), x.local_nnz() as u128 * 3);
    let id = embed(
        &LinearOp::identity(Arc::new(SiteLayout::single(3).unwrap())),
        0,
        layout.clone(),
    )
    .unwrap();
    assert!(id.distance(&LinearOp::identity(layout)).unwrap() < 1e-14);

    let (sx, sz) = clock_shift(2).unwrap();
    assert!((sx.commutator_norm(&sz).unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn character_basis_is_hadamard_on_one_qubit() {
    let layout = Arc::new(SiteLayout::new(vec![(SiteKind::Edge(0), 2)]).unwrap());
    let u = character_basis(layout)
        .to_linear_op()
        .unwrap()
        .local_matrix();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for (r, c, v) in [(0, 0, h), (0, 1, h), (1, 0, h), (1, 1, -h)] {
        assert!((u[(r, c)] - C64::new(v, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn ground_energy_counts_all_terms() {
    let m = Model::build(&ModelSpec::dual(2, 2, 1, 2, 2)).unwrap();
    let h = m.hamiltonian().unwrap();
    assert_eq!(h.ground_energy(), -16.0);
    let xi = spectra::ground_state(&m, 0).unwrap();
    assert!((h.energy(&xi).unwrap() + 16.0).abs() < 1e-10);
}

#[test]
fn z2_pair_of_ground_states_is_orthogonal() {
    let m = Model::build(&ModelSpec::dual(2, 2, 0, 2, 2)).unwrap();
    let a = spectra::ground_state(&m, 0).unwrap();
    let b = spectra::ground_state(&m, 1).unwrap();
    assert!(a.inner(&b).unwrap().norm() < 1e-12);
}

#[test]
fn z4_algebraic_ground_states() {
    let m = Model::build(&ModelSpec::dual(4, 4, 2, 2, 2)).unwrap();
    assert_eq!(m.homomorphism().kernel_order(), 2);
    let h = m.hamiltonian().unwrap();
    let a = spectra::ground_state_of(&m, &h, 0).unwrap();
    let b = spectra::ground_state_of(&m, &h, 2).unwrap();
    assert!(a.inner(&b).unwrap().norm() < 1e-12);
    for xi in [&a, &b] {
        assert!((h.energy(xi).unwrap() - h.ground_energy()).abs() < 1e-10);
    }
    // Odd values are not in the kernel and project to zero.
    assert!(spectra::ground_state_of(&m, &h, 1).is_err());

    // For Z_2 -> Z_4 with 1 -> 2 the map is injective: only the reference value 0 survives.
    let m = Model::build(&ModelSpec::dual(4, 2, 2, 2, 2)).unwrap();
    assert_eq!(m.homomorphism().kernel_order(), 1);
    assert!(spectra::ground_state(&m, 0).is_ok());
    assert!(spectra::ground_state(&m, 1).is_err());
}

#[test]
fn fake_holonomy_examples() {
    let m = Model::build(&ModelSpec::dual(2, 2, 1, 2, 2)).unwrap();
    let mut state = BasisState::zero(m.layout());
    assert!(spectra::fake_holonomy(&m, 0, &state).unwrap().is_identity());
    let site = m.layout().require_face(0).unwrap();
    state.set(m.layout(), site, 1).unwrap();
    assert_eq!(spectra::fake_holonomy(&m, 0, &state).unwrap().value(), 1);
    let psi = qdlab::StateVector::from_basis_state(m.layout().clone(), &state).unwrap();
    assert!(m.face_op(0).unwrap().apply(&psi).unwrap().norm() < 1e-14);

    // With trivial f the face matter is invisible to the face term.
    let m0 = Model::build(&ModelSpec::dual(2, 2, 0, 2, 2)).unwrap();
    assert!(spectra::fake_holonomy(&m0, 0, &state)
        .unwrap()
        .is_identity());
}

#[test]
fn string_operator_examples() {
    let m = Model::build(&ModelSpec::dual(2, 2, 1, 2, 2)).unwrap();
    let lat = m.lattice();
    let layout = m.layout();
    let empty = lat.path_from_moves(0, &[]).unwrap();
    assert!(
        string_z(layout, &empty, 1)
            .unwrap()
            .distance(&LinearOp::identity(layout.clone()))
            .unwrap()
            < 1e-14
    );
    let two = lat
        .path_from_moves(0, &[Direction::East, Direction::North])
        .unwrap();
    assert!(
        string_z(layout, &two, 0)
            .unwrap()
            .distance(&LinearOp::identity(layout.clone()))
            .unwrap()
            < 1e-14
    );
    let op = string_z(layout, &two, 1).unwrap();
    assert_eq!(op.support().len(), 2);
    let (_, sz) = clock_shift(2).unwrap();
    let zz = sz.local_matrix().kronecker(&sz.local_matrix());
    assert!((op.local_matrix() - zz).iter().all(|v| v.norm() < 1e-12));

    let dual = lat.straight_dual_path(0, Direction::East, 1).unwrap();
    assert_eq!(string_x(layout, &dual, 1).unwrap().support().len(), 1);
}

#[test]
fn confinement_grows_only_for_nontrivial_f() {
    for (n, expect_growth) in [(1, true), (0, false)] {
        let m = Model::build(&ModelSpec::dual(2, 2, n, 3, 3)).unwrap();
        let e = spectra::confinement_profile(&m, 1, &[1, 2, 3, 4])
            .unwrap()
            .energies();
        let strictly_increasing = e.windows(2).all(|w| w[1] > w[0] + 0.5);
        let constant = e.windows(2).all(|w| (w[1] - w[0]).abs() < 1e-9);
        assert!(e.iter().all(|&x| x >= 0.0));
        assert_eq!(strictly_increasing, expect_growth, "{e:?}");
        assert_eq!(constant, !expect_growth, "{e:?}");
    }
}

#[test]
fn edge_diagonal_examples() {
    let m = Model::build(&ModelSpec::dual(2, 2, 1, 2, 2)).unwrap();
    let r = diagonalize_edge_op(&m, 3).unwrap();
    for e in &r.entries {
        let trivial = (e.alpha + e.g + 2 - e.beta) % 2 == 0;
        let expected = if trivial { 1.0 } else { 0.0 };
        assert!((e.value - C64::new(expected, 0.0)).norm() < 1e-12, "{e:?}");
    }
    let m1 = Model::build(&ModelSpec::dual(2, 1, 0, 2, 2)).unwrap();
    let r1 = diagonalize_edge_op(&m1, 0).unwrap();
    assert!(r1
        .entries
        .iter()
        .all(|e| (e.value - C64::new(1.0, 0.0)).norm() < 1e-12));
}

#[test]
fn vertex_matter_examples() {
    // M=1 reduces to the plain quantum double.
    let dm = Model::build(&ModelSpec::vertex(2, 1, ThetaAction::Trivial, 2, 2)).unwrap();
    assert_eq!(
        spectra::ground_space_dimension(&dm, DEFAULT_CAP).unwrap(),
        4
    );
    let c = dm.comparator(0).unwrap();
    assert!(
        c.distance(&LinearOp::identity(dm.layout().clone()))
            .unwrap()
            < 1e-14
    );

    let reg = Model::build(&ModelSpec::vertex(2, 2, ThetaAction::Regular, 2, 2)).unwrap();
    assert!(reg.solvability_check().unwrap().is_solvable(1e-10));
    let fam = reg.projector_family(TermKind::Edge, 0).unwrap();
    assert_eq!(fam.members.len(), 2);
    assert!(fam.completeness_defect().unwrap() < 1e-12);
}

#[test]
fn total_hamiltonian_examples() {
    let trivial = build_total_hamiltonian(
        &ModelSpec::dual(2, 1, 0, 2, 2),
        &ModelSpec::vertex(2, 1, ThetaAction::Trivial, 2, 2),
    )
    .unwrap();
    assert_eq!(trivial.cross.max_norm, 0.0);
    assert_eq!(
        trivial.hamiltonian.ground_energy(),
        -(8.0 + 8.0 + 8.0 + 8.0)
    );

    let both_trivial = build_total_hamiltonian(
        &ModelSpec::dual(2, 2, 0, 2, 2),
        &ModelSpec::vertex(2, 2, ThetaAction::Trivial, 2, 2),
    )
    .unwrap();
    assert!(both_trivial.cross.max_norm < 1e-10);

    let coupled = build_total_hamiltonian(
        &ModelSpec::dual(2, 2, 1, 2, 2),
        &ModelSpec::vertex(2, 2, ThetaAction::Regular, 2, 2),
    )
    .unwrap();
    assert!(coupled.cross.max_norm.is_finite());
    assert_eq!(
        coupled.cross.norms.len(),
        coupled.cross.face_matter_terms.len()
    );

    let mismatch = build_total_hamiltonian(
        &ModelSpec::dual(3, 1, 0, 2, 2),
        &ModelSpec::vertex(2, 1, ThetaAction::Trivial, 2, 2),
    );
    assert!(mismatch.is_err());
}
