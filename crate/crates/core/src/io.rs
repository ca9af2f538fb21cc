//! JSON file formats for maps, states and ensembles.
//!
//! Maps: `{"dim_in": n, "dim_out": m, "repr": "choi"|"kraus"|"holevo", ...}`
//! with payload `"choi": Matrix`, `"kraus": [Matrix]` or
//! `"terms": [{"omega": Matrix, "b": Matrix}]` respectively.
//!
//! States: `{"dims": [n, m], "density": Matrix}`, or
//! `{"dims": [n, m], "repr": "ensemble", "terms": [{"weight", "a", "b"}]}`.
//!
//! A map argument of the form `builtin:NAME` refers to the builtin registry
//! instead of a file.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::choi::{BipartiteState, HolevoForm, HolevoTerm, MatrixMap, Provenance};
use crate::definite::{EnsembleTerm, SeparableEnsemble};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::positivity::builtin_map;
use crate::tolerance::Tolerances;

pub const BUILTIN_PREFIX: &str = "builtin:";

/// A state file: either a density matrix or a separable ensemble.
#[derive(Clone, Debug)]
pub enum StateInput {
    Density(BipartiteState),
    Ensemble(SeparableEnsemble),
}

impl StateInput {
    pub fn state(&self, tol: &Tolerances) -> Result<BipartiteState> {
        match self {
            StateInput::Density(s) => Ok(s.clone()),
            StateInput::Ensemble(e) => BipartiteState::new(e.dims(), e.density(), tol),
        }
    }
}

fn parse_error(message: impl Into<String>) -> Error {
    Error::Parse(message.into())
}

fn field<T: DeserializeOwned>(obj: &Map<String, Value>, key: &str) -> Result<T> {
    let value = obj
        .get(key)
        .ok_or_else(|| parse_error(format!("missing field `{key}`")))?;
    serde_json::from_value(value.clone()).map_err(|e| parse_error(format!("field `{key}`: {e}")))
}

fn object(text: &str) -> Result<Map<String, Value>> {
    match serde_json::from_str(text).map_err(|e| parse_error(e.to_string()))? {
        Value::Object(obj) => Ok(obj),
        _ => Err(parse_error("expected a JSON object")),
    }
}

fn invalid(e: Error) -> Error {
    match e {
        Error::Parse(_) => e,
        other => parse_error(other.to_string()),
    }
}

pub fn parse_map(text: &str, tol: &Tolerances) -> Result<MatrixMap> {
    let obj = object(text)?;
    let dim_in: usize = field(&obj, "dim_in")?;
    let dim_out: usize = field(&obj, "dim_out")?;
    let repr: String = field(&obj, "repr")?;
    let f = match repr.as_str() {
        "choi" => {
            MatrixMap::from_choi(dim_in, dim_out, field(&obj, "choi")?, tol).map_err(invalid)?
        }
        "kraus" => {
            let kraus: Vec<Matrix> = field(&obj, "kraus")?;
            MatrixMap::from_kraus(kraus).map_err(invalid)?
        }
        "holevo" => {
            let terms: Vec<HolevoTerm> = field(&obj, "terms")?;
            MatrixMap::from_holevo(HolevoForm::new(terms, tol).map_err(invalid)?)
        }
        other => return Err(parse_error(format!("unknown map repr `{other}`"))),
    };
    if (f.dim_in(), f.dim_out()) != (dim_in, dim_out) {
        return Err(parse_error(format!(
            "declared dimensions {dim_in}->{dim_out} do not match payload {}->{}",
            f.dim_in(),
            f.dim_out()
        )));
    }
    Ok(f)
}

pub fn map_to_json(f: &MatrixMap) -> Value {
    let mut obj = json!({ "dim_in": f.dim_in(), "dim_out": f.dim_out() });
    let map = obj.as_object_mut().expect("object literal");
    match f.provenance() {
        Provenance::Kraus(kraus) => {
            map.insert("repr".into(), json!("kraus"));
            map.insert("kraus".into(), json!(kraus));
        }
        Provenance::Holevo(form) => {
            map.insert("repr".into(), json!("holevo"));
            map.insert("terms".into(), json!(form.terms()));
        }
        Provenance::Choi => {
            map.insert("repr".into(), json!("choi"));
            map.insert("choi".into(), json!(f.choi()));
        }
    }
    obj
}

pub fn parse_state(text: &str, tol: &Tolerances) -> Result<StateInput> {
    let obj = object(text)?;
    let dims: (usize, usize) = field(&obj, "dims")?;
    let repr = match obj.get("repr") {
        None => "density".to_string(),
        Some(_) => field::<String>(&obj, "repr")?,
    };
    match repr.as_str() {
        "density" => {
            let density: Matrix = field(&obj, "density")?;
            Ok(StateInput::Density(
                BipartiteState::new(dims, density, tol).map_err(invalid)?,
            ))
        }
        "ensemble" => {
            let terms: Vec<EnsembleTerm> = field(&obj, "terms")?;
            let ens = SeparableEnsemble::new(terms, tol).map_err(invalid)?;
            if ens.dims() != dims {
                return Err(parse_error(format!(
                    "declared dims {dims:?} do not match ensemble dims {:?}",
                    ens.dims()
                )));
            }
            Ok(StateInput::Ensemble(ens))
        }
        other => Err(parse_error(format!("unknown state repr `{other}`"))),
    }
}

pub fn state_to_json(s: &BipartiteState) -> Value {
    json!({ "dims": s.dims(), "density": s.density() })
}

pub fn ensemble_to_json(e: &SeparableEnsemble) -> Value {
    json!({ "dims": e.dims(), "repr": "ensemble", "terms": e.terms() })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| parse_error(format!("{}: {e}", path.display())))
}

/// Loads a map from a file path or a `builtin:NAME` reference.
pub fn load_map(arg: &str, tol: &Tolerances) -> Result<MatrixMap> {
    match arg.strip_prefix(BUILTIN_PREFIX) {
        Some(name) => builtin_map(name).map_err(invalid),
        None => parse_map(&read(Path::new(arg))?, tol),
    }
}

pub fn load_state(path: &Path, tol: &Tolerances) -> Result<StateInput> {
    parse_state(&read(path)?, tol)
}

/// Pretty JSON with a trailing newline. Floats use the shortest decimal
/// that round-trips, so equal values always print identically.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("report types serialize");
    out.push('\n');
    out
}
