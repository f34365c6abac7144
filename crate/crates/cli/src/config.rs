//! Run configuration: a flat `key = value` file merged with command-line overrides.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use qdlab::lattice::FaceOrder;
use qdlab::models::{Family, ModelSpec, ThetaAction};
use qdlab::spectra::{CAP_ENV, DEFAULT_CAP};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Table,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "table" => Ok(Format::Table),
            _ => Err(CliError::Config(format!(
                "unknown format '{s}' (json, csv, table)"
            ))),
        }
    }
}

pub fn parse_family(s: &str) -> Result<Family, CliError> {
    s.parse()
        .map_err(|e: qdlab::Error| CliError::Config(e.to_string()))
}

pub fn parse_theta(s: &str) -> Result<ThetaAction, CliError> {
    s.parse()
        .map_err(|e: qdlab::Error| CliError::Config(e.to_string()))
}

pub fn parse_face_order(s: &str) -> Result<FaceOrder, CliError> {
    match s {
        "left" => Ok(FaceOrder::LeftFirst),
        "right" => Ok(FaceOrder::RightFirst),
        _ => Err(CliError::Config(format!(
            "unknown face order '{s}' (left, right)"
        ))),
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse '{value}'")))
}

/// Every knob is optional so that file values and flags can be layered.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub family: Option<String>,
    pub gauge: Option<usize>,
    pub matter: Option<usize>,
    pub hom: Option<usize>,
    pub theta: Option<String>,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub genus: Option<u32>,
    pub format: Option<String>,
    pub tol: Option<f64>,
    pub cap: Option<usize>,
    pub face_order: Option<String>,
}

impl Overrides {
    /// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
    pub fn parse_file_contents(text: &str) -> Result<Self, CliError> {
        let mut o = Overrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim().replace('-', "_"), value.trim().to_string());
            match key.as_str() {
                "family" => o.family = Some(value),
                "gauge" => o.gauge = Some(parse_num("gauge", &value)?),
                "matter" => o.matter = Some(parse_num("matter", &value)?),
                "hom" => o.hom = Some(parse_num("hom", &value)?),
                "theta" => o.theta = Some(value),
                "rows" => o.rows = Some(parse_num("rows", &value)?),
                "cols" => o.cols = Some(parse_num("cols", &value)?),
                "genus" => o.genus = Some(parse_num("genus", &value)?),
                "format" => o.format = Some(value),
                "tol" => o.tol = Some(parse_num("tol", &value)?),
                "cap" => o.cap = Some(parse_num("cap", &value)?),
                "face_order" => o.face_order = Some(value),
                _ => {
                    return Err(CliError::Config(format!(
                        "line {}: unknown key '{key}'",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(o)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|err| CliError::Config(format!("{}: {err}", path.display())))?;
        Self::parse_file_contents(&text)
    }

    /// Values in `self` win over values in `base`.
    pub fn over(self, base: Overrides) -> Overrides {
        Overrides {
            family: self.family.or(base.family),
            gauge: self.gauge.or(base.gauge),
            matter: self.matter.or(base.matter),
            hom: self.hom.or(base.hom),
            theta: self.theta.or(base.theta),
            rows: self.rows.or(base.rows),
            cols: self.cols.or(base.cols),
            genus: self.genus.or(base.genus),
            format: self.format.or(base.format),
            tol: self.tol.or(base.tol),
            cap: self.cap.or(base.cap),
            face_order: self.face_order.or(base.face_order),
        }
    }
}

/// Fully resolved configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub spec: ModelSpec,
    pub genus: u32,
    pub format: Format,
    pub tol: f64,
    pub cap: usize,
}

pub const DEFAULT_TOL: f64 = 1e-10;

impl RunConfig {
    /// Resolves flags over file values over defaults. The dimension cap follows
    /// `--cap`, then the environment variable, then the file, then the default.
    pub fn resolve(
        flags: Overrides,
        file: Overrides,
        env_cap: Option<&str>,
    ) -> Result<RunConfig, CliError> {
        let env_cap = match env_cap {
            Some(v) => Some(parse_num::<usize>(CAP_ENV, v)?),
            None => None,
        };
        let cap = flags.cap.or(env_cap).or(file.cap).unwrap_or(DEFAULT_CAP);
        let o = flags.over(file);

        let family = parse_family(o.family.as_deref().unwrap_or("dual"))?;
        let gauge = o.gauge.unwrap_or(2);
        let rows = o.rows.unwrap_or(2);
        let cols = o.cols.unwrap_or(2);
        let mut spec = match family {
            Family::DoubleOnly => ModelSpec::double(gauge, rows, cols),
            Family::DualMatter => {
                ModelSpec::dual(gauge, o.matter.unwrap_or(2), o.hom.unwrap_or(0), rows, cols)
            }
            Family::VertexMatter => ModelSpec::vertex(
                gauge,
                o.matter.unwrap_or(2),
                parse_theta(o.theta.as_deref().unwrap_or("trivial"))?,
                rows,
                cols,
            ),
        };
        if let Some(order) = &o.face_order {
            spec = spec.with_face_order(parse_face_order(order)?);
        }
        spec.validate()
            .map_err(|err| CliError::Config(err.to_string()))?;

        let genus = o.genus.unwrap_or(1);
        if genus != 1 {
            return Err(CliError::Config(format!(
                "genus {genus} is not supported; the lattice is a torus (genus 1)"
            )));
        }
        let tol = o.tol.unwrap_or(DEFAULT_TOL);
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::Config(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        Ok(RunConfig {
            spec,
            genus,
            format: o.format.as_deref().unwrap_or("table").parse()?,
            tol,
            cap,
        })
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.spec)
    }
}
