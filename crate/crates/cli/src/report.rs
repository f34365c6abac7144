//! Report assembly and rendering as JSON, CSV or an aligned text table.

use std::fmt::Write as _;

use crate::config::Format;
use crate::CliError;

pub const SCHEMA_VERSION: u64 = 1;

/// A JSON value whose objects keep insertion order.
#[derive(Clone, Debug, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i128),
    Float(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl From<bool> for Json {
    fn from(v: bool) -> Self {
        Json::Bool(v)
    }
}

impl From<f64> for Json {
    fn from(v: f64) -> Self {
        Json::Float(v)
    }
}

impl From<&str> for Json {
    fn from(v: &str) -> Self {
        Json::Str(v.to_string())
    }
}

impl From<String> for Json {
    fn from(v: String) -> Self {
        Json::Str(v)
    }
}

macro_rules! json_int {
    ($($t:ty),*) => {$(
        impl From<$t> for Json {
            fn from(v: $t) -> Self {
                Json::Int(v as i128)
            }
        }
    )*};
}
json_int!(usize, u32, u64, u128, i64);

impl<T: Into<Json>> From<Option<T>> for Json {
    fn from(v: Option<T>) -> Self {
        v.map_or(Json::Null, Into::into)
    }
}

/// `%.17g`: 17 significant digits, trailing zeros trimmed, exponent form
/// outside `1e-4 <= |x| < 1e17`.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !x.is_finite() {
        // JSON has no literal for these.
        return "null".into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl Json {
    pub fn write(&self, out: &mut String) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => write!(out, "{i}").unwrap(),
            Json::Float(x) => out.push_str(&format_float(*x)),
            Json::Str(s) => out.push_str(&serde_json::to_string(s).expect("string escapes")),
            Json::Arr(items) => {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    item.write(out);
                }
                out.push(']');
            }
            Json::Obj(fields) => {
                out.push('{');
                for (k, (key, value)) in fields.iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    out.push_str(&serde_json::to_string(key).expect("string escapes"));
                    out.push(':');
                    value.write(out);
                }
                out.push('}');
            }
        }
    }

    /// Plain text for CSV cells and table columns.
    pub fn text(&self) -> String {
        match self {
            Json::Null => String::new(),
            Json::Str(s) => s.clone(),
            Json::Arr(items) => items.iter().map(Json::text).collect::<Vec<_>>().join(" "),
            other => {
                let mut s = String::new();
                other.write(&mut s);
                s
            }
        }
    }
}

/// Result of one command: summary fields plus an optional table of rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub model: Option<Vec<(String, Json)>>,
    pub fields: Vec<(String, Json)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Json>>,
    /// Extra lines shown only in table output.
    pub notes: Vec<String>,
    /// False when a physics check failed.
    pub ok: bool,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report {
            command,
            model: None,
            fields: Vec::new(),
            columns: Vec::new(),
            rows: Vec::new(),
            notes: Vec::new(),
            ok: true,
        }
    }

    pub fn field(&mut self, key: &str, value: impl Into<Json>) -> &mut Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
            Format::Table => Ok(self.to_table()),
        }
    }

    pub fn to_json(&self) -> String {
        let mut obj = vec![
            ("schema".to_string(), Json::from(SCHEMA_VERSION)),
            ("command".to_string(), Json::from(self.command)),
        ];
        if let Some(model) = &self.model {
            obj.push(("model".to_string(), Json::Obj(model.clone())));
        }
        obj.extend(self.fields.iter().cloned());
        if !self.columns.is_empty() {
            let rows = self
                .rows
                .iter()
                .map(|r| {
                    Json::Obj(
                        self.columns
                            .iter()
                            .map(|c| c.to_string())
                            .zip(r.iter().cloned())
                            .collect(),
                    )
                })
                .collect();
            obj.push(("rows".to_string(), Json::Arr(rows)));
        }
        obj.push(("ok".to_string(), Json::Bool(self.ok)));
        let mut out = String::new();
        Json::Obj(obj).write(&mut out);
        out.push('\n');
        out
    }

    /// The row table when there is one, otherwise `key,value` pairs.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        if self.columns.is_empty() {
            w.write_record(["key", "value"]).map_err(io)?;
            for (k, v) in self.model_pairs().iter().chain(&self.fields) {
                w.write_record([k.as_str(), &v.text()]).map_err(io)?;
            }
        } else {
            w.write_record(&self.columns).map_err(io)?;
            for row in &self.rows {
                w.write_record(row.iter().map(Json::text)).map_err(io)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }

    fn model_pairs(&self) -> Vec<(String, Json)> {
        self.model
            .iter()
            .flatten()
            .map(|(k, v)| (format!("model.{k}"), v.clone()))
            .collect()
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let pairs: Vec<(String, Json)> = self
            .model_pairs()
            .into_iter()
            .chain(self.fields.iter().cloned())
            .collect();
        let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &pairs {
            writeln!(out, "{k:<width$}  {}", v.text()).unwrap();
        }
        if !self.columns.is_empty() {
            if !pairs.is_empty() {
                out.push('\n');
            }
            let cells: Vec<Vec<String>> = self
                .rows
                .iter()
                .map(|r| r.iter().map(Json::text).collect())
                .collect();
            let widths: Vec<usize> = self
                .columns
                .iter()
                .enumerate()
                .map(|(c, name)| {
                    cells
                        .iter()
                        .map(|r| r[c].chars().count())
                        .chain([name.len()])
                        .max()
                        .unwrap()
                })
                .collect();
            let line = |items: Vec<&str>| {
                items
                    .iter()
                    .zip(&widths)
                    .map(|(s, w)| format!("{s:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            writeln!(out, "{}", line(self.columns.clone())).unwrap();
            for r in &cells {
                writeln!(out, "{}", line(r.iter().map(String::as_str).collect())).unwrap();
            }
        }
        for note in &self.notes {
            writeln!(out, "{note}").unwrap();
        }
        out
    }
}

/// One block character per value, scaled between the minimum and maximum.
pub fn sparkline(values: &[f64]) -> String {
    const BARS: [char; 8] = ['▁', '▂', '▃', '▄', '▅', '▆', '▇', '█'];
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|&v| {
            if hi - lo < 1e-12 {
                BARS[0]
            } else {
                BARS[(((v - lo) / (hi - lo)) * 7.0).round() as usize]
            }
        })
        .collect()
}
