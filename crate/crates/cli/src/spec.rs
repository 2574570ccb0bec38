//! Spec documents: parsing, validation with field paths, and command-line overrides.

use std::fmt;
use std::path::Path;

use loglattice::{
    BoundaryDivisor, CurveConnection, ElementaryModel, FormalConnection, LocalBoundary, Point, PuiseuxBlock,
    RankOneForm, TwistDivisor, WeightWindow,
};
use serde::{Deserialize, Serialize};

pub const DEFAULT_LO: i64 = -12;
pub const DEFAULT_HI: i64 = 12;

/// A schema violation at a field path; exit status 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    pub fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        SchemaError {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "schema error: {}", self.message)
        } else {
            write!(f, "schema error at {}: {}", self.path, self.message)
        }
    }
}

type SchemaResult<T> = Result<T, SchemaError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Tower,
    Irregularity,
    Alpha,
    Beta,
    PSigma,
    Euler,
    Localization,
    Rees,
    Spencer,
    Cohomology,
    Kclass,
    P0,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Tower => "tower",
            Suite::Irregularity => "irregularity",
            Suite::Alpha => "alpha",
            Suite::Beta => "beta",
            Suite::PSigma => "p_sigma",
            Suite::Euler => "euler",
            Suite::Localization => "localization",
            Suite::Rees => "rees",
            Suite::Spencer => "spencer",
            Suite::Cohomology => "cohomology",
            Suite::Kclass => "kclass",
            Suite::P0 => "p0",
        }
    }

    fn needs_disc(self) -> bool {
        matches!(self, Suite::PSigma | Suite::Spencer)
    }

    fn formal(self) -> bool {
        !matches!(self, Suite::Cohomology | Suite::Kclass | Suite::P0)
    }

    fn curve(self) -> bool {
        matches!(
            self,
            Suite::Tower | Suite::Irregularity | Suite::Cohomology | Suite::Kclass | Suite::P0
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowDoc {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormalDoc {
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n_vars: usize,
    /// Number of boundary coordinates; all variables when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    pub blocks: Vec<ElementaryModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suites: Option<Vec<Suite>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDoc {
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub points: Vec<Point>,
    pub summands: Vec<RankOneForm>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub puiseux: Vec<PuiseuxBlock>,
    /// One variable; `hi` is the base pole bound of the oracle on `U`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suites: Option<Vec<Suite>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormalCase {
    pub name: String,
    pub conn: FormalConnection,
    pub window: WeightWindow,
    pub delta: TwistDivisor,
    pub depth: usize,
    pub suites: Vec<Suite>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveCase {
    pub name: String,
    pub conn: CurveConnection,
    pub window: WeightWindow,
    pub delta: TwistDivisor,
    pub depth: usize,
    pub suites: Vec<Suite>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Case {
    Formal(FormalCase),
    Curve(CurveCase),
}

/// Command-line values that replace the corresponding spec fields.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub depth: Option<usize>,
    /// One value applies to every boundary component.
    pub delta: Option<Vec<u32>>,
}

fn window_of(doc: Option<&WindowDoc>, n: usize) -> SchemaResult<WeightWindow> {
    let Some(w) = doc else {
        return Ok(WeightWindow::cube(n, DEFAULT_LO, DEFAULT_HI));
    };
    for (field, v) in [("lo", &w.lo), ("hi", &w.hi)] {
        if v.len() != n {
            return Err(SchemaError::new(
                format!("window.{field}"),
                format!("expected {n} entries, found {}", v.len()),
            ));
        }
    }
    if let Some(i) = (0..n).find(|&i| w.lo[i] > w.hi[i]) {
        return Err(SchemaError::new(
            format!("window.lo[{i}]"),
            format!("lo = {} exceeds hi = {}", w.lo[i], w.hi[i]),
        ));
    }
    WeightWindow::new(w.lo.clone(), w.hi.clone()).map_err(|e| SchemaError::new("window", e))
}

fn delta_of(v: Option<&Vec<u32>>, ell: usize, path: &str) -> SchemaResult<TwistDivisor> {
    match v {
        None => Ok(TwistDivisor::zero(ell)),
        Some(m) if m.len() == 1 => Ok(TwistDivisor::multiple_of_boundary(ell, m[0])),
        Some(m) if m.len() == ell => Ok(TwistDivisor::new(m.clone())),
        Some(m) => Err(SchemaError::new(
            path,
            format!("expected 1 or {ell} multiplicities, found {}", m.len()),
        )),
    }
}

fn suites_of(
    v: Option<&Vec<Suite>>,
    default: Vec<Suite>,
    ok: impl Fn(Suite) -> Option<String>,
) -> SchemaResult<Vec<Suite>> {
    let Some(v) = v else { return Ok(default) };
    for (i, &s) in v.iter().enumerate() {
        if let Some(why) = ok(s) {
            return Err(SchemaError::new(format!("suites[{i}]"), why));
        }
    }
    let mut v = v.clone();
    v.sort();
    v.dedup();
    Ok(v)
}

impl FormalDoc {
    pub fn into_case(self, name: &str, o: &Overrides) -> SchemaResult<FormalCase> {
        let n = self.n_vars;
        if n == 0 {
            return Err(SchemaError::new("n_vars", "must be at least 1"));
        }
        let ell = self.ell.unwrap_or(n);
        let boundary = LocalBoundary::new(n, ell).map_err(|e| SchemaError::new("ell", e))?;
        if self.blocks.is_empty() {
            return Err(SchemaError::new("blocks", "at least one block is required"));
        }
        if let Some(i) = self.blocks.iter().position(|b| b.regular.residues().len() != ell) {
            return Err(SchemaError::new(
                format!("blocks[{i}].regular.residues"),
                format!("expected {ell} residues"),
            ));
        }
        let conn = FormalConnection::new(boundary, self.blocks).map_err(|e| SchemaError::new("blocks", e))?;
        conn.check_good().map_err(|e| match e {
            loglattice::Error::NotGood { block, .. } => SchemaError::new(format!("blocks[{block}]"), e),
            e => SchemaError::new("blocks", e),
        })?;
        let window = window_of(self.window.as_ref(), n)?;
        let delta = match &o.delta {
            Some(d) => delta_of(Some(d), ell, "--delta")?,
            None => delta_of(self.delta.as_ref(), ell, "delta")?,
        };
        let depth = o.depth.or(self.depth).unwrap_or(n + 3);
        if depth < n {
            let path = if o.depth.is_some() { "--depth" } else { "depth" };
            return Err(SchemaError::new(path, format!("depth {depth} is below n_vars = {n}")));
        }
        let disc = n == 1 && ell == 1;
        let default = [
            Suite::Tower,
            Suite::Irregularity,
            Suite::Alpha,
            Suite::Beta,
            Suite::PSigma,
            Suite::Euler,
            Suite::Localization,
            Suite::Rees,
            Suite::Spencer,
        ]
        .into_iter()
        .filter(|s| disc || !s.needs_disc())
        .collect();
        let suites = suites_of(self.suites.as_ref(), default, |s| {
            if !s.formal() {
                Some(format!("`{}` runs on curve documents", s.name()))
            } else if s.needs_disc() && !disc {
                Some(format!("`{}` runs on a disc (n_vars = ell = 1)", s.name()))
            } else {
                None
            }
        })?;
        Ok(FormalCase {
            name: self.name.unwrap_or_else(|| name.to_string()),
            conn,
            window,
            delta,
            depth,
            suites,
        })
    }
}

impl CurveDoc {
    pub fn into_case(self, name: &str, o: &Overrides) -> SchemaResult<CurveCase> {
        let boundary = BoundaryDivisor::new(self.points).map_err(|e| SchemaError::new("points", e))?;
        if self.summands.is_empty() {
            return Err(SchemaError::new("summands", "at least one summand is required"));
        }
        let ell = boundary.len();
        let conn = CurveConnection::new(boundary, self.summands)
            .and_then(|c| c.with_puiseux(self.puiseux))
            .map_err(|e| SchemaError::new("summands", e))?;
        let window = window_of(self.window.as_ref(), 1)?;
        let delta = match &o.delta {
            Some(d) => delta_of(Some(d), ell, "--delta")?,
            None => delta_of(self.delta.as_ref(), ell, "delta")?,
        };
        let depth = o.depth.or(self.depth).unwrap_or(1);
        if depth == 0 {
            let path = if o.depth.is_some() { "--depth" } else { "depth" };
            return Err(SchemaError::new(path, "curve towers need depth at least 1"));
        }
        let default = vec![
            Suite::Tower,
            Suite::Irregularity,
            Suite::Cohomology,
            Suite::Kclass,
            Suite::P0,
        ];
        let suites = suites_of(self.suites.as_ref(), default, |s| {
            (!s.curve()).then(|| format!("`{}` runs on formal documents", s.name()))
        })?;
        Ok(CurveCase {
            name: self.name.unwrap_or_else(|| name.to_string()),
            conn,
            window,
            delta,
            depth,
            suites,
        })
    }
}

fn typed<T: for<'de> Deserialize<'de>>(v: serde_json::Value) -> SchemaResult<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        SchemaError::new(if path == "." { String::new() } else { path }, e.into_inner())
    })
}

/// Parse and validate a document; `name` is used when the document has none.
pub fn parse_document(text: &str, name: &str, o: &Overrides) -> SchemaResult<Case> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: serde_json::Value =
        serde_path_to_error::deserialize(&mut de).map_err(|e| SchemaError::new("", e.into_inner()))?;
    let mode = match value.get("mode") {
        Some(serde_json::Value::String(m)) => m.clone(),
        Some(_) => return Err(SchemaError::new("mode", "expected a string")),
        None => return Err(SchemaError::new("mode", "missing field")),
    };
    match mode.as_str() {
        "formal" => Ok(Case::Formal(typed::<FormalDoc>(value)?.into_case(name, o)?)),
        "curve" => Ok(Case::Curve(typed::<CurveDoc>(value)?.into_case(name, o)?)),
        other => Err(SchemaError::new(
            "mode",
            format!("unknown mode `{other}`, expected `formal` or `curve`"),
        )),
    }
}

pub fn load(path: &Path, o: &Overrides) -> SchemaResult<Case> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SchemaError::new("", format!("cannot read {}: {e}", path.display())))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("spec");
    parse_document(&text, stem, o)
}

fn window_doc(w: &WeightWindow) -> WindowDoc {
    WindowDoc {
        lo: w.lo.clone(),
        hi: w.hi.clone(),
    }
}

impl Case {
    pub fn name(&self) -> &str {
        match self {
            Case::Formal(c) => &c.name,
            Case::Curve(c) => &c.name,
        }
    }

    pub fn suites(&self) -> &[Suite] {
        match self {
            Case::Formal(c) => &c.suites,
            Case::Curve(c) => &c.suites,
        }
    }

    /// A document that reproduces this case with the given suites.
    pub fn document(&self, suites: &[Suite]) -> serde_json::Value {
        let v = match self {
            Case::Formal(c) => serde_json::to_value(FormalDoc {
                mode: "formal".into(),
                name: Some(c.name.clone()),
                n_vars: c.conn.n_vars(),
                ell: Some(c.conn.ell()),
                blocks: c.conn.blocks.clone(),
                window: Some(window_doc(&c.window)),
                delta: Some(c.delta.multiplicities.clone()),
                depth: Some(c.depth),
                suites: Some(suites.to_vec()),
            }),
            Case::Curve(c) => serde_json::to_value(CurveDoc {
                mode: "curve".into(),
                name: Some(c.name.clone()),
                points: c.conn.boundary.points().to_vec(),
                summands: c.conn.summands.clone(),
                puiseux: c.conn.puiseux.clone(),
                window: Some(window_doc(&c.window)),
                delta: Some(c.delta.multiplicities.clone()),
                depth: Some(c.depth),
                suites: Some(suites.to_vec()),
            }),
        };
        v.expect("spec documents serialize")
    }
}

impl FormalCase {
    pub fn new(name: impl Into<String>, conn: FormalConnection, suites: Vec<Suite>) -> Self {
        let n = conn.n_vars();
        FormalCase {
            name: name.into(),
            window: WeightWindow::cube(n, DEFAULT_LO, DEFAULT_HI),
            delta: TwistDivisor::zero(conn.ell()),
            depth: n + 3,
            conn,
            suites,
        }
    }

    pub fn apply(mut self, o: &Overrides) -> SchemaResult<Self> {
        if let Some(d) = &o.delta {
            self.delta = delta_of(Some(d), self.conn.ell(), "--delta")?;
        }
        if let Some(d) = o.depth {
            if d < self.conn.n_vars() {
                return Err(SchemaError::new("--depth", "depth is below n_vars"));
            }
            self.depth = d;
        }
        Ok(self)
    }
}

impl CurveCase {
    pub fn new(name: impl Into<String>, conn: CurveConnection, suites: Vec<Suite>) -> Self {
        CurveCase {
            name: name.into(),
            window: WeightWindow::cube(1, DEFAULT_LO, DEFAULT_HI),
            delta: TwistDivisor::zero(conn.boundary.len()),
            depth: 1,
            conn,
            suites,
        }
    }

    pub fn apply(mut self, o: &Overrides) -> SchemaResult<Self> {
        if let Some(d) = &o.delta {
            self.delta = delta_of(Some(d), self.conn.boundary.len(), "--delta")?;
        }
        if let Some(d) = o.depth {
            if d == 0 {
                return Err(SchemaError::new("--depth", "curve towers need depth at least 1"));
            }
            self.depth = d;
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> SchemaResult<Case> {
        parse_document(s, "t", &Overrides::default())
    }

    const DISC: &str = r#"{"mode": "formal", "n_vars": 1,
        "blocks": [{"phi": {"terms": [{"exp": [3], "coeff": "1"}]}, "regular": {"rank": 1, "residues": ["0"]}}]}"#;

    #[test]
    fn formal_defaults() {
        let Case::Formal(c) = parse(DISC).unwrap() else {
            panic!()
        };
        assert_eq!(c.depth, 4);
        assert_eq!(c.window, WeightWindow::cube(1, -12, 12));
        assert!(c.suites.contains(&Suite::Spencer));
        let again = parse(&c_doc(&Case::Formal(c.clone()))).unwrap();
        assert_eq!(again, Case::Formal(c));
    }

    fn c_doc(c: &Case) -> String {
        c.document(c.suites()).to_string()
    }

    #[test]
    fn window_path() {
        let s = DISC.replace(
            "\"n_vars\": 1,",
            "\"n_vars\": 1, \"window\": {\"lo\": [3], \"hi\": [1]},",
        );
        assert_eq!(parse(&s).unwrap_err().path, "window.lo[0]");
        let s = DISC.replace(
            "\"n_vars\": 1,",
            "\"n_vars\": 1, \"window\": {\"lo\": [3, 4], \"hi\": [5]},",
        );
        assert_eq!(parse(&s).unwrap_err().path, "window.lo");
    }

    #[test]
    fn nested_paths() {
        let s = DISC.replace("\"0\"]", "\"x\"]");
        assert_eq!(parse(&s).unwrap_err().path, "blocks[0].regular.residues[0]");
        let s = DISC.replace("\"formal\"", "\"global\"");
        assert_eq!(parse(&s).unwrap_err().path, "mode");
        let s = DISC.replace("\"n_vars\": 1,", "\"n_vars\": 1, \"extra\": 1,");
        assert!(parse(&s).unwrap_err().message.contains("extra"));
        let s = DISC.replace("\"n_vars\": 1,", "\"n_vars\": 1, \"suites\": [\"kclass\"],");
        assert_eq!(parse(&s).unwrap_err().path, "suites[0]");
    }

    #[test]
    fn curve_document() {
        let s = r#"{"mode": "curve", "points": ["0", "inf"],
            "summands": [{"poles": [{"at": "0", "coeffs": ["0", "-1"]}]}], "delta": [2]}"#;
        let Case::Curve(c) = parse(s).unwrap() else { panic!() };
        assert_eq!(c.delta, TwistDivisor::new(vec![2, 2]));
        let o = Overrides {
            depth: None,
            delta: Some(vec![1, 2, 3]),
        };
        assert_eq!(parse_document(s, "t", &o).unwrap_err().path, "--delta");
    }
}
