//! JSON documents for states and hash families.
//!
//! A complex scalar is a two-element array `[re, im]` and a matrix is a
//! row-major array of rows:
//!
//! ```json
//! {"kind":"cq","p":[0.5,0.5],"dB":1,"conditionals":[[[[1,0]]],[[[1,0]]]]}
//! {"kind":"bipartite","dA":2,"dB":1,"rho":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}
//! ```

use std::path::Path;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::cq::{BipartiteState, CqState};
use crate::error::{Error, Result};
use crate::hashing::FamilyDescriptor;
use crate::operator::{DensityOperator, HermitianOperator};

pub type MatrixDoc = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateDoc {
    Cq(CqDoc),
    Bipartite(BipartiteDoc),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CqDoc {
    pub p: Vec<f64>,
    #[serde(rename = "dB")]
    pub d_b: usize,
    pub conditionals: Vec<MatrixDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BipartiteDoc {
    #[serde(rename = "dA")]
    pub d_a: usize,
    #[serde(rename = "dB")]
    pub d_b: usize,
    pub rho: MatrixDoc,
}

/// Typed views used for parsing; errors carry line and column.
#[derive(Deserialize)]
struct KindOnly {
    kind: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Tagged<D> {
    #[serde(rename = "kind")]
    _kind: String,
    #[serde(flatten)]
    doc: D,
}

/// A parsed and validated state.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Cq(CqState<f64>),
    Bipartite(BipartiteState<f64>),
}

impl State {
    /// The state as a bipartite operator; cq states are embedded with `A = X`.
    pub fn to_bipartite(&self) -> Result<BipartiteState<f64>> {
        match self {
            State::Cq(cq) => cq.embed(),
            State::Bipartite(b) => Ok(b.clone()),
        }
    }

    pub fn as_cq(&self) -> Option<&CqState<f64>> {
        match self {
            State::Cq(cq) => Some(cq),
            State::Bipartite(_) => None,
        }
    }
}

pub fn matrix_to_doc(m: &DMatrix<Complex<f64>>) -> MatrixDoc {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn parse_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("field `{field}`: {msg}"))
}

pub fn matrix_from_doc(doc: &MatrixDoc, dim: usize, field: &str) -> Result<DMatrix<Complex<f64>>> {
    if doc.len() != dim {
        return Err(parse_err(field, format!("expected {dim} rows, found {}", doc.len())));
    }
    for (i, row) in doc.iter().enumerate() {
        if row.len() != dim {
            return Err(parse_err(&format!("{field}[{i}]"), format!("expected {dim} entries, found {}", row.len())));
        }
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| Complex::new(doc[i][j][0], doc[i][j][1])))
}

fn density(m: DMatrix<Complex<f64>>, field: &str) -> Result<DensityOperator<f64>> {
    let op = HermitianOperator::from_matrix(m).map_err(|e| parse_err(field, e))?;
    DensityOperator::from_operator(op).map_err(|e| parse_err(field, e))
}

impl StateDoc {
    pub fn from_state(s: &State) -> Self {
        match s {
            State::Cq(cq) => StateDoc::Cq(CqDoc {
                p: cq.probs().to_vec(),
                d_b: cq.d_b(),
                conditionals: cq.conditionals().iter().map(|r| matrix_to_doc(r.op().matrix())).collect(),
            }),
            State::Bipartite(b) => StateDoc::Bipartite(BipartiteDoc {
                d_a: b.dims().0,
                d_b: b.dims().1,
                rho: matrix_to_doc(b.op().matrix()),
            }),
        }
    }

    pub fn into_state(self) -> Result<State> {
        match self {
            StateDoc::Cq(CqDoc { p, d_b, conditionals }) => {
                if d_b == 0 {
                    return Err(parse_err("dB", "must be positive"));
                }
                if conditionals.len() != p.len() {
                    return Err(parse_err(
                        "conditionals",
                        format!("expected {} matrices (one per entry of `p`), found {}", p.len(), conditionals.len()),
                    ));
                }
                let conds = conditionals
                    .iter()
                    .enumerate()
                    .map(|(x, m)| {
                        let field = format!("conditionals[{x}]");
                        density(matrix_from_doc(m, d_b, &field)?, &field)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(State::Cq(CqState::new(p, conds).map_err(|e| parse_err("p", e))?))
            }
            StateDoc::Bipartite(BipartiteDoc { d_a, d_b, rho }) => {
                if d_a == 0 || d_b == 0 {
                    return Err(parse_err("dA/dB", "must be positive"));
                }
                let m = matrix_from_doc(&rho, d_a * d_b, "rho")?;
                let st = density(m, "rho")?;
                Ok(State::Bipartite(BipartiteState::new(st, (d_a, d_b)).map_err(|e| parse_err("rho", e))?))
            }
        }
    }
}

fn json_err(what: &str, e: serde_json::Error) -> Error {
    Error::Parse(format!("{what}: {e}"))
}

pub fn parse_state(text: &str) -> Result<State> {
    let kind: KindOnly = serde_json::from_str(text).map_err(|e| json_err("state document", e))?;
    let doc = match kind.kind.as_str() {
        "cq" => StateDoc::Cq(serde_json::from_str::<Tagged<CqDoc>>(text).map_err(|e| json_err("cq state", e))?.doc),
        "bipartite" => StateDoc::Bipartite(
            serde_json::from_str::<Tagged<BipartiteDoc>>(text).map_err(|e| json_err("bipartite state", e))?.doc,
        ),
        other => return Err(parse_err("kind", format!("unknown state kind `{other}` (cq, bipartite)"))),
    };
    doc.into_state()
}

pub fn state_to_json(s: &State) -> String {
    to_json(&StateDoc::from_state(s))
}

pub fn read_state(path: &Path) -> Result<State> {
    let text = std::fs::read_to_string(path)?;
    parse_state(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_family(text: &str) -> Result<FamilyDescriptor> {
    serde_json::from_str(text).map_err(|e| json_err("family descriptor", e))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}
