//! One function per subcommand; each returns a report and never prints.

use qdlab::groups::{classify, enumerate_homomorphisms};
use qdlab::lattice::FaceOrder;
use qdlab::models::{Family, Model, ModelSpec};
use qdlab::spectra::{
    diagonalize_edge_op, solve_w_operators, spectral_report, string_profile, StringKind,
};

use crate::config::RunConfig;
use crate::report::{sparkline, Json, Report};
use crate::CliError;

/// Eigenvalues closer than this are one level.
const LEVEL_TOL: f64 = 1e-8;

fn model_fields(spec: &ModelSpec) -> Vec<(String, Json)> {
    let mut f: Vec<(String, Json)> = vec![
        ("family".into(), spec.family.to_string().into()),
        ("gauge".into(), spec.gauge.into()),
    ];
    match spec.family {
        Family::DoubleOnly => {}
        Family::DualMatter => {
            f.push(("matter".into(), spec.matter.into()));
            f.push(("hom".into(), spec.multiplier.into()));
        }
        Family::VertexMatter => {
            f.push(("matter".into(), spec.matter.into()));
            f.push(("theta".into(), spec.theta.to_string().into()));
        }
    }
    f.push(("rows".into(), spec.rows.into()));
    f.push(("cols".into(), spec.cols.into()));
    let order = match spec.face_order {
        FaceOrder::LeftFirst => "left",
        FaceOrder::RightFirst => "right",
    };
    f.push(("face_order".into(), order.into()));
    f.push(("hilbert_dimension".into(), spec.dimension().into()));
    f
}

fn report_for(command: &'static str, cfg: &RunConfig) -> Report {
    let mut r = Report::new(command);
    r.model = Some(model_fields(&cfg.spec));
    r
}

/// Every homomorphism `Z_K -> Z_N` with its kernel, image, cokernel and class.
pub fn enumerate(gauge: usize, matter: usize) -> Result<Report, CliError> {
    let mut r = Report::new("enumerate");
    r.field("gauge", gauge).field("matter", matter);
    let homs = enumerate_homomorphisms(matter, gauge)?;
    r.field("count", homs.len());
    r.columns = vec![
        "hom",
        "kernel",
        "image",
        "cokernel",
        "class",
        "deconfined_charges",
    ];
    for f in homs {
        let c = classify(gauge, matter, f.multiplier())?;
        r.rows.push(vec![
            f.multiplier().into(),
            c.kernel_order.into(),
            c.image_order.into(),
            c.cokernel_order.into(),
            format!("{:?}", c.class).into(),
            c.deconfined_charges.into(),
        ]);
    }
    Ok(r)
}

/// Pairwise commutators and projector identities of every Hamiltonian term.
pub fn verify(cfg: &RunConfig) -> Result<Report, CliError> {
    let model = Model::build(&cfg.spec)?;
    let s = model.solvability_check()?;
    let mut r = report_for("verify", cfg);
    r.field("terms", s.terms)
        .field("pairs_checked", s.pairs_checked)
        .field("max_commutator_norm", s.max_commutator_norm)
        .field("worst_pair", s.worst_pair.map(|(a, b)| format!("{a} {b}")))
        .field("max_projector_defect", s.max_projector_defect)
        .field("max_hermiticity_defect", s.max_hermiticity_defect)
        .field("abelian", s.abelian)
        .field("center_condition", s.center_condition)
        .field("tolerance", cfg.tol);
    r.ok = s.is_solvable(cfg.tol);
    r.field("solvable", r.ok);
    Ok(r)
}

/// Exact ground-space dimension against the closed form.
pub fn gsd(cfg: &RunConfig) -> Result<Report, CliError> {
    let model = Model::build(&cfg.spec)?;
    let s = spectral_report(&model, cfg.cap)?;
    let mut r = report_for("gsd", cfg);
    r.field("oracle", s.ground_space_dimension)
        .field("formula", s.formula)
        .field("match", s.matches)
        .field("trace", s.trace)
        .field("ground_energy", s.ground_energy);
    if cfg.spec.family == Family::DualMatter {
        let f = model.homomorphism();
        r.field("kernel", f.kernel_order())
            .field("cokernel", f.cokernel_order());
    }
    r.field("genus", cfg.genus)
        .field("basis_states", s.basis_states)
        .field("orbits", s.orbits)
        .field("cap", cfg.cap);
    r.ok = s.matches != Some(false);
    Ok(r)
}

/// Energy of open strings of charge `g` for lengths `1..=max_length`.
pub fn confine(
    cfg: &RunConfig,
    kind: StringKind,
    g: usize,
    max_length: usize,
) -> Result<Report, CliError> {
    if max_length == 0 {
        return Err(CliError::Config("max length must be at least 1".into()));
    }
    if g >= cfg.spec.gauge {
        return Err(CliError::Config(format!(
            "charge {g} is not an element of Z_{}",
            cfg.spec.gauge
        )));
    }
    let model = Model::build(&cfg.spec)?;
    model.layout().checked_dimension(cfg.cap)?;
    let lengths: Vec<usize> = (1..=max_length).collect();
    let profile = string_profile(&model, kind, g, &lengths)?;
    let energies = profile.energies();
    let mut r = report_for("confine", cfg);
    r.field("string", kind.to_string()).field("charge", g);
    r.columns = vec!["length", "delta_e"];
    for p in &profile.points {
        r.rows.push(vec![p.length.into(), p.delta_e.into()]);
    }
    r.notes.push(format!("profile  {}", sparkline(&energies)));
    Ok(r)
}

/// Low-lying levels of the dense Hamiltonian with multiplicities.
pub fn spectrum(cfg: &RunConfig, levels: usize) -> Result<Report, CliError> {
    let model = Model::build(&cfg.spec)?;
    let h = model.hamiltonian()?;
    let eigen = h.dense_spectrum()?;
    let mut grouped: Vec<(f64, usize)> = Vec::new();
    // Sums of commuting projectors have integer spectra; drop rounding noise.
    let snap = |e: f64| {
        if (e - e.round()).abs() < LEVEL_TOL {
            e.round() + 0.0
        } else {
            e
        }
    };
    for e in eigen.into_iter().map(snap) {
        match grouped.last_mut() {
            Some((level, count)) if (e - *level).abs() < LEVEL_TOL => *count += 1,
            _ => grouped.push((e, 1)),
        }
    }
    let mut r = report_for("spectrum", cfg);
    let (e0, d0) = grouped.first().copied().unwrap_or((f64::NAN, 0));
    r.field("ground_energy", e0)
        .field("ground_multiplicity", d0)
        .field("expected_ground_energy", h.ground_energy())
        .field("levels", grouped.len());
    r.columns = vec!["level", "energy", "multiplicity"];
    for (k, (e, m)) in grouped.into_iter().take(levels).enumerate() {
        r.rows.push(vec![k.into(), e.into(), m.into()]);
    }
    r.ok = (e0 - h.ground_energy()).abs() < LEVEL_TOL;
    Ok(r)
}

/// Face-centroid monomials that intertwine each pair of projector labels.
pub fn wops(cfg: &RunConfig) -> Result<Report, CliError> {
    let model = Model::build(&cfg.spec)?;
    let t = solve_w_operators(&model)?;
    let mut r = report_for("wops", cfg);
    r.field("face", t.face);
    r.columns = vec!["gauge_label", "matter_label", "operators"];
    for e in &t.entries {
        let names = e
            .monomials
            .iter()
            .map(|m| Json::from(m.name(t.matter)))
            .collect();
        r.rows.push(vec![
            e.gauge_label.into(),
            e.matter_label.into(),
            Json::Arr(names),
        ]);
    }
    Ok(r)
}

/// Edge terms in the character basis against the Fourier prediction.
pub fn fourier(cfg: &RunConfig, edge: Option<usize>) -> Result<Report, CliError> {
    let model = Model::build(&cfg.spec)?;
    let edges: Vec<usize> = match edge {
        Some(j) => vec![j],
        None => (0..model.lattice().edge_count()).collect(),
    };
    let mut r = report_for("fourier", cfg);
    let (mut off, mut err) = (0.0f64, 0.0f64);
    r.columns = vec![
        "edge",
        "alpha",
        "g",
        "beta",
        "value_re",
        "value_im",
        "predicted_re",
        "predicted_im",
    ];
    for &j in &edges {
        let d = diagonalize_edge_op(&model, j)?;
        off = off.max(d.max_off_diagonal);
        err = err.max(d.max_formula_error);
        for e in &d.entries {
            r.rows.push(vec![
                j.into(),
                e.alpha.into(),
                e.g.into(),
                e.beta.into(),
                e.value.re.into(),
                e.value.im.into(),
                e.predicted.re.into(),
                e.predicted.im.into(),
            ]);
        }
    }
    r.ok = off < cfg.tol && err < cfg.tol;
    r.field("edges", edges.len())
        .field("diagonal", off < cfg.tol)
        .field("max_off_diagonal", off)
        .field("max_formula_error", err)
        .field("tolerance", cfg.tol);
    Ok(r)
}
