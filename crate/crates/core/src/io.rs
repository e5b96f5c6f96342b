//! JSON schemas for lattices, vectors, matrices and bivector bases.
//!
//! Rationals travel as decimal-free `"p/q"` strings. Output goes through
//! `serde_json::Value`, whose maps are key-sorted, so reports are canonical.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{fmt_q, parse_q, Q};
use crate::dynamics::OrbitTrace;
use crate::error::{Error, Result};
use crate::lattice::QuadLattice;
use crate::rigidity::HodgeSetup;
use crate::symbols::SymbolBasis;
use crate::vector::SymbolicVector;

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct LatticeJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub rank: usize,
    pub gram: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fujiki_constant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mbm_bound: Option<u64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub hyperkahler: bool,
}

impl LatticeJson {
    pub fn into_lattice(self) -> Result<QuadLattice> {
        if self.gram.len() != self.rank {
            return Err(Error::input(format!("rank {} but the Gram matrix has {} rows", self.rank, self.gram.len())));
        }
        let mut lat = QuadLattice::new(self.gram)?;
        lat.name = self.name;
        lat.n = self.n;
        lat.mbm_bound = self.mbm_bound;
        lat.hyperkahler = self.hyperkahler;
        if let Some(c) = self.fujiki_constant {
            lat.fujiki_constant = Some(parse_q(&c)?);
        }
        if lat.mbm_bound == Some(0) {
            return Err(Error::input("mbm_bound must be positive"));
        }
        Ok(lat)
    }

    pub fn from_lattice(lat: &QuadLattice) -> Self {
        LatticeJson {
            name: lat.name.clone(),
            rank: lat.rank(),
            gram: lat.gram().to_vec(),
            fujiki_constant: lat.fujiki_constant.as_ref().map(fmt_q),
            n: lat.n,
            mbm_bound: lat.mbm_bound,
            hyperkahler: lat.hyperkahler,
        }
    }
}

pub fn parse_lattice(text: &str) -> Result<QuadLattice> {
    let j: LatticeJson = serde_json::from_str(text).map_err(|e| Error::input(format!("lattice JSON: {e}")))?;
    j.into_lattice()
}

pub fn lattice_to_value(lat: &QuadLattice) -> Value {
    serde_json::to_value(LatticeJson::from_lattice(lat)).expect("serializable")
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct VectorJson {
    pub symbols: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enclosures: Option<Vec<[String; 2]>>,
    /// `coords[i][j]`: coefficient of symbol `j` in coordinate `i`.
    pub coords: Vec<Vec<String>>,
}

impl VectorJson {
    pub fn into_vector(self) -> Result<SymbolicVector> {
        let k = self.symbols.len();
        let encs: Vec<Option<(Q, Q)>> = match self.enclosures {
            None => vec![None; k],
            Some(e) => {
                if e.len() != k {
                    return Err(Error::input("one enclosure per symbol expected"));
                }
                e.iter().map(|[lo, hi]| Ok(Some((parse_q(lo)?, parse_q(hi)?)))).collect::<Result<_>>()?
            }
        };
        let basis = Arc::new(SymbolBasis::new(self.symbols.into_iter().zip(encs).collect())?);
        let mut cols = vec![Vec::with_capacity(self.coords.len()); k];
        for row in &self.coords {
            if row.len() != k {
                return Err(Error::input(format!("coordinate row with {} entries for {k} symbols", row.len())));
            }
            for (c, s) in cols.iter_mut().zip(row) {
                c.push(parse_q(s)?);
            }
        }
        SymbolicVector::from_columns(basis, cols)
    }

    pub fn from_vector(v: &SymbolicVector) -> Result<Self> {
        let (basis, cols) = v.columns()?;
        let coords = (0..v.dim()).map(|i| cols.iter().map(|c| fmt_q(&c[i])).collect()).collect();
        Ok(VectorJson { symbols: basis.labels().to_vec(), enclosures: Some(basis.enclosure_strings()), coords })
    }
}

pub fn parse_vector(text: &str) -> Result<SymbolicVector> {
    let j: VectorJson = serde_json::from_str(text).map_err(|e| Error::input(format!("vector JSON: {e}")))?;
    j.into_vector()
}

pub fn vector_to_value(v: &SymbolicVector) -> Result<Value> {
    Ok(serde_json::to_value(VectorJson::from_vector(v)?).expect("serializable"))
}

/// A plane or any small family of vectors: `{"vectors": [...]}`.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct FamilyJson {
    pub vectors: Vec<VectorJson>,
}

pub fn parse_family(text: &str) -> Result<Vec<SymbolicVector>> {
    let j: FamilyJson = serde_json::from_str(text).map_err(|e| Error::input(format!("vector family JSON: {e}")))?;
    j.vectors.into_iter().map(VectorJson::into_vector).collect()
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct MatrixJson {
    pub matrix: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct GeneratorsJson {
    pub generators: Vec<Vec<Vec<i64>>>,
}

pub fn parse_matrix(text: &str) -> Result<Vec<Vec<i64>>> {
    let j: MatrixJson = serde_json::from_str(text).map_err(|e| Error::input(format!("matrix JSON: {e}")))?;
    Ok(j.matrix)
}

pub fn parse_generators(text: &str) -> Result<Vec<Vec<Vec<i64>>>> {
    let j: GeneratorsJson = serde_json::from_str(text).map_err(|e| Error::input(format!("generators JSON: {e}")))?;
    Ok(j.generators)
}

/// Rational subspace basis: `{"basis": [["p/q", ...], ...]}`.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct SubspaceJson {
    pub basis: Vec<Vec<String>>,
}

pub fn parse_subspace(text: &str) -> Result<Vec<Vec<Q>>> {
    let j: SubspaceJson = serde_json::from_str(text).map_err(|e| Error::input(format!("subspace JSON: {e}")))?;
    j.basis.iter().map(|r| r.iter().map(|s| parse_q(s)).collect()).collect()
}

/// Lattice given inline or by reference (preset name or file path).
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum LatticeRef {
    Named(String),
    Inline(LatticeJson),
}

/// Hodge setup bundle for the rigidity classifier.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SetupJson {
    pub lattice: LatticeRef,
    pub period_plane: Vec<VectorJson>,
    pub kahler_ref: VectorJson,
    pub mbm_bound: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ns_rank_hint: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projective: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_mbm_in_h11: Option<bool>,
}

impl SetupJson {
    /// Builds the setup; `resolve` turns a lattice reference into a lattice.
    pub fn into_setup(self, resolve: impl Fn(&str) -> Result<QuadLattice>) -> Result<HodgeSetup> {
        let lattice = match self.lattice {
            LatticeRef::Named(s) => resolve(&s)?,
            LatticeRef::Inline(j) => j.into_lattice()?,
        };
        Ok(HodgeSetup {
            lattice,
            period_plane: self.period_plane.into_iter().map(VectorJson::into_vector).collect::<Result<_>>()?,
            kahler_ref: self.kahler_ref.into_vector()?,
            mbm_bound: self.mbm_bound,
            ns_rank_hint: self.ns_rank_hint,
            projective_flag: self.projective,
            no_mbm_in_h11_flag: self.no_mbm_in_h11,
        })
    }

    pub fn from_setup(s: &HodgeSetup) -> Result<Self> {
        Ok(SetupJson {
            lattice: LatticeRef::Inline(LatticeJson::from_lattice(&s.lattice)),
            period_plane: s.period_plane.iter().map(VectorJson::from_vector).collect::<Result<_>>()?,
            kahler_ref: VectorJson::from_vector(&s.kahler_ref)?,
            mbm_bound: s.mbm_bound,
            ns_rank_hint: s.ns_rank_hint,
            projective: s.projective_flag,
            no_mbm_in_h11: s.no_mbm_in_h11_flag,
        })
    }
}

pub fn parse_setup(text: &str, resolve: impl Fn(&str) -> Result<QuadLattice>) -> Result<HodgeSetup> {
    let j: SetupJson = serde_json::from_str(text).map_err(|e| Error::input(format!("setup JSON: {e}")))?;
    j.into_setup(resolve)
}

/// Fixed-width decimal used for every floating point diagnostic.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.12e}")
}

/// Orbit trace with distances as decimal strings.
pub fn trace_to_value(t: &OrbitTrace) -> Value {
    json!({
        "steps": t.steps,
        "seed": t.seed,
        "chains": t.chains,
        "max_word": t.max_word,
        "epsilon": fmt_f64(t.epsilon),
        "min_projective_distance": fmt_f64(t.min_projective_distance),
        "witness_word": t.witness_word,
        "first_hit": t.first_hit,
        "history": t.history.iter().map(|(s, d)| json!([s, fmt_f64(*d)])).collect::<Vec<_>>(),
    })
}

pub fn q_row(v: &[Q]) -> Vec<String> {
    v.iter().map(fmt_q).collect()
}

pub fn q_rows(m: &[Vec<Q>]) -> Vec<Vec<String>> {
    m.iter().map(|r| q_row(r)).collect()
}

/// Bivector basis output: `{"d", "rows", "closed"}`.
pub fn bivector_basis_value(d: usize, rows: &[Vec<Q>], closed: bool) -> Value {
    json!({ "d": d, "rows": q_rows(rows), "closed": closed })
}

/// Canonical text: key-sorted, two-space indented, newline-terminated.
pub fn canonical(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
