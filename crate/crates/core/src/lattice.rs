//! Integral quadratic lattices with BBF metadata.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{fmt_q, Q};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::scalar::SymbolicScalar;
use crate::vector::{bbf_pair, SymbolicVector};

#[derive(Clone, Debug, PartialEq)]
pub struct QuadLattice {
    pub name: Option<String>,
    gram: Vec<Vec<i64>>,
    gram_q: Mat<Q>,
    pub fujiki_constant: Option<Q>,
    /// Half the complex dimension of the manifold.
    pub n: Option<u32>,
    pub mbm_bound: Option<u64>,
    /// Whether the lattice claims to be a full second cohomology lattice,
    /// which must then have signature `(3, d - 3)`.
    pub hyperkahler: bool,
}

/// `b_X = ((2n)! / c_X)^(1/n)`.
#[derive(Clone, Debug, PartialEq)]
pub enum FujikiB {
    Exact(Q),
    Root { radicand: Q, n: u32 },
}

impl std::fmt::Display for FujikiB {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FujikiB::Exact(q) => f.write_str(&fmt_q(q)),
            FujikiB::Root { radicand, n } => write!(f, "({})^(1/{n})", fmt_q(radicand)),
        }
    }
}

impl QuadLattice {
    /// Checks symmetry and nondegeneracy.
    pub fn new(gram: Vec<Vec<i64>>) -> Result<Self> {
        let lat = Self::unchecked(gram)?;
        if lat.determinant().is_zero() {
            return Err(Error::input("Gram matrix is degenerate"));
        }
        Ok(lat)
    }

    /// Checks shape and symmetry only; used by validation reports.
    pub fn unchecked(gram: Vec<Vec<i64>>) -> Result<Self> {
        let d = gram.len();
        if d == 0 {
            return Err(Error::input("empty Gram matrix"));
        }
        if gram.iter().any(|r| r.len() != d) {
            return Err(Error::input("Gram matrix is not square"));
        }
        for i in 0..d {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::input(format!("Gram matrix is not symmetric at ({i},{j})")));
                }
            }
        }
        let gram_q = linalg::int_to_q(&gram);
        Ok(QuadLattice {
            name: None,
            gram,
            gram_q,
            fujiki_constant: None,
            n: None,
            mbm_bound: None,
            hyperkahler: false,
        })
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn gram_q(&self) -> &Mat<Q> {
        &self.gram_q
    }

    pub fn determinant(&self) -> BigInt {
        linalg::det(&self.gram_q).to_integer()
    }

    /// Exact signature `(p, m)` by rational congruence diagonalization.
    pub fn signature(&self) -> Result<(usize, usize)> {
        let (p, m, z) = linalg::inertia(&self.gram_q);
        if z > 0 {
            return Err(Error::input("signature of a degenerate form"));
        }
        Ok((p, m))
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.gram[i][i] % 2 == 0)
    }

    pub fn pair(&self, a: &[Q], b: &[Q]) -> Q {
        linalg::form(&self.gram_q, a, b)
    }

    pub fn norm(&self, a: &[Q]) -> Q {
        self.pair(a, a)
    }

    pub fn pair_int(&self, a: &[i64], b: &[i64]) -> i128 {
        let mut s = 0i128;
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                s += x as i128 * self.gram[i][j] as i128 * y as i128;
            }
        }
        s
    }

    /// The constant `b_X`, when both `c_X` and `n` are known.
    pub fn fujiki_b(&self) -> Option<FujikiB> {
        let c = self.fujiki_constant.as_ref()?;
        let n = self.n?;
        let fact: BigInt = (1..=2 * n as u64).map(BigInt::from).product();
        let r = Q::from_integer(fact) / c;
        match (nth_root(r.numer(), n), nth_root(r.denom(), n)) {
            (Some(a), Some(b)) => Some(FujikiB::Exact(Q::new(a, b))),
            _ => Some(FujikiB::Root { radicand: r, n }),
        }
    }

    /// `c_X * q(a)^n`, the right side of the Fujiki relation.
    pub fn fujiki_rhs(&self, a: &SymbolicVector) -> Result<SymbolicScalar> {
        let c = self.fujiki_constant.as_ref().ok_or_else(|| Error::Config("lattice has no Fujiki constant".into()))?;
        let n = self.n.ok_or_else(|| Error::Config("lattice has no dimension n".into()))?;
        Ok(bbf_pair(self, a, a)?.pow(n).scale(c))
    }
}

fn nth_root(x: &BigInt, n: u32) -> Option<BigInt> {
    if x.is_negative() {
        return None;
    }
    let r = x.nth_root(n);
    (num_traits::pow(r.clone(), n as usize) == *x).then_some(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Warn,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn push(&mut self, name: &str, status: CheckStatus, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), status, detail: detail.into() });
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail).count()
    }

    pub fn warnings(&self) -> usize {
        self.checks.iter().filter(|c| c.status == CheckStatus::Warn).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }
}

/// Structural checks on a Gram matrix given as raw rows.
pub fn validate_gram(gram: &[Vec<i64>], hyperkahler: bool) -> Report {
    let mut r = Report { checks: Vec::new() };
    let lat = match QuadLattice::unchecked(gram.to_vec()) {
        Ok(l) => {
            r.push("symmetric", CheckStatus::Pass, "square and symmetric");
            l
        }
        Err(e) => {
            r.push("symmetric", CheckStatus::Fail, e.to_string());
            return r;
        }
    };
    let mut lat = lat;
    lat.hyperkahler = hyperkahler;
    validate_into(&lat, &mut r);
    r
}

pub fn validate_lattice(lat: &QuadLattice) -> Report {
    let mut r = Report { checks: Vec::new() };
    r.push("symmetric", CheckStatus::Pass, "square and symmetric");
    validate_into(lat, &mut r);
    r
}

fn validate_into(lat: &QuadLattice, r: &mut Report) {
    let det = lat.determinant();
    if det.is_zero() {
        r.push("nondegenerate", CheckStatus::Fail, "determinant is 0");
        return;
    }
    r.push("nondegenerate", CheckStatus::Pass, format!("determinant {det}"));
    if lat.is_even() {
        r.push("even", CheckStatus::Pass, "all diagonal entries even");
    } else {
        r.push("even", CheckStatus::Warn, "odd diagonal entry");
    }
    if lat.hyperkahler {
        let (p, m) = lat.signature().expect("nondegenerate");
        let d = lat.rank();
        if d >= 3 && (p, m) == (3, d - 3) {
            r.push("signature", CheckStatus::Pass, format!("({p},{m})"));
        } else {
            r.push("signature", CheckStatus::Fail, format!("({p},{m}) but expected (3,{})", d as i64 - 3));
        }
    }
    if let Some(c) = &lat.fujiki_constant {
        if c.is_positive() {
            r.push("fujiki_constant", CheckStatus::Pass, fmt_q(c));
        } else {
            r.push("fujiki_constant", CheckStatus::Fail, "must be positive");
        }
    }
}

impl QuadLattice {
    /// Determinant as `i64` for display, when it fits.
    pub fn determinant_i64(&self) -> Option<i64> {
        self.determinant().to_i64()
    }

    /// Whether the integer matrix `g` satisfies `g^T G g = G`.
    pub fn preserves(&self, g: &[Vec<i64>]) -> bool {
        let d = self.rank();
        if g.len() != d || g.iter().any(|r| r.len() != d) {
            return false;
        }
        for i in 0..d {
            for j in 0..d {
                let mut s = 0i128;
                for a in 0..d {
                    if g[a][i] == 0 {
                        continue;
                    }
                    for b in 0..d {
                        s += g[a][i] as i128 * self.gram[a][b] as i128 * g[b][j] as i128;
                    }
                }
                if s != self.gram[i][j] as i128 {
                    return false;
                }
            }
        }
        true
    }
}
