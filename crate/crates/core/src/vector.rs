//! Real classes with coordinates over a symbol basis, and the rational
//! kernel computations built on the BBF pairing.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;

use crate::arith::Q;
use crate::error::{Error, Result};
use crate::lattice::QuadLattice;
use crate::linalg::{self, Mat};
use crate::scalar::{terms_add_into, SymbolicScalar, Terms};
use crate::symbols::{Monomial, SymbolBasis};

/// `sum_m m * coords[m]`, each `coords[m]` a rational vector of length `dim`.
#[derive(Clone, Debug)]
pub struct SymbolicVector {
    basis: Arc<SymbolBasis>,
    dim: usize,
    coords: BTreeMap<Monomial, Vec<Q>>,
}

impl PartialEq for SymbolicVector {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.coords == other.coords
    }
}

impl SymbolicVector {
    pub fn zero(basis: Arc<SymbolBasis>, dim: usize) -> Self {
        SymbolicVector { basis, dim, coords: BTreeMap::new() }
    }

    pub fn rational(v: Vec<Q>) -> Self {
        Self::rational_in(SymbolBasis::rational(), v)
    }

    pub fn rational_in(basis: Arc<SymbolBasis>, v: Vec<Q>) -> Self {
        let dim = v.len();
        let mut out = Self::zero(basis, dim);
        out.add_component(&Monomial::unit(), &v);
        out
    }

    pub fn from_ints(v: &[i64]) -> Self {
        Self::rational(v.iter().map(|&x| crate::arith::q(x)).collect())
    }

    /// Column `j` multiplies basis symbol `j`.
    pub fn from_columns(basis: Arc<SymbolBasis>, columns: Vec<Vec<Q>>) -> Result<Self> {
        if columns.len() != basis.len() {
            return Err(Error::input(format!("{} coordinate columns for {} symbols", columns.len(), basis.len())));
        }
        let dim = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != dim) {
            return Err(Error::input("coordinate columns of unequal length"));
        }
        let mut out = Self::zero(basis.clone(), dim);
        for (m, c) in basis.monomials().iter().zip(&columns) {
            out.add_component(m, c);
        }
        Ok(out)
    }

    /// Builds from monomial components, naming any unnamed square-root
    /// products in the basis.
    pub fn from_components(basis: Arc<SymbolBasis>, dim: usize, comps: BTreeMap<Monomial, Vec<Q>>) -> Result<Self> {
        let basis = SymbolBasis::extended(&basis, comps.keys().cloned())?;
        let mut out = Self::zero(basis, dim);
        for (m, c) in &comps {
            if c.len() != dim {
                return Err(Error::input("component length mismatch"));
            }
            out.add_component(m, c);
        }
        Ok(out)
    }

    fn add_component(&mut self, m: &Monomial, v: &[Q]) {
        if v.iter().all(Zero::is_zero) {
            return;
        }
        let e = self.coords.entry(m.clone()).or_insert_with(|| vec![Q::zero(); v.len()]);
        for (x, y) in e.iter_mut().zip(v) {
            *x += y;
        }
        if e.iter().all(Zero::is_zero) {
            self.coords.remove(m);
        }
    }

    pub fn basis(&self) -> &Arc<SymbolBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &BTreeMap<Monomial, Vec<Q>> {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.coords.keys().all(Monomial::is_unit)
    }

    pub fn as_rational(&self) -> Option<Vec<Q>> {
        if !self.is_rational() {
            return None;
        }
        Some(self.coords.get(&Monomial::unit()).cloned().unwrap_or_else(|| vec![Q::zero(); self.dim]))
    }

    /// Coordinate columns in basis order, extending the basis with names
    /// for any product monomials first.
    pub fn columns(&self) -> Result<(Arc<SymbolBasis>, Vec<Vec<Q>>)> {
        let basis = SymbolBasis::extended(&self.basis, self.coords.keys().cloned())?;
        let cols = basis
            .monomials()
            .iter()
            .map(|m| self.coords.get(m).cloned().unwrap_or_else(|| vec![Q::zero(); self.dim]))
            .collect();
        Ok((basis, cols))
    }

    /// Coordinate `i` as a scalar.
    pub fn coordinate(&self, i: usize) -> SymbolicScalar {
        let mut t = Terms::new();
        for (m, v) in &self.coords {
            terms_add_into(&mut t, m, &v[i]);
        }
        SymbolicScalar::new(self.basis.clone(), t)
    }

    pub fn with_basis(&self, basis: Arc<SymbolBasis>) -> Result<Self> {
        let basis = SymbolBasis::merge(&basis, &self.basis)?;
        Ok(SymbolicVector { basis, dim: self.dim, coords: self.coords.clone() })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.dim != o.dim {
            return Err(Error::input("vector dimensions differ"));
        }
        let mut out = SymbolicVector { basis: SymbolBasis::merge(&self.basis, &o.basis)?, ..self.clone() };
        for (m, v) in &o.coords {
            out.add_component(m, v);
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(&Q::from_integer((-1).into())))
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = Self::zero(self.basis.clone(), self.dim);
        if c.is_zero() {
            return out;
        }
        for (m, v) in &self.coords {
            out.coords.insert(m.clone(), v.iter().map(|x| x * c).collect());
        }
        out
    }

    /// Multiplication by a symbolic scalar.
    pub fn mul_scalar(&self, s: &SymbolicScalar) -> Result<Self> {
        let mut out = Self::zero(SymbolBasis::merge(&self.basis, s.basis())?, self.dim);
        for (ms, c) in s.terms() {
            for (mv, v) in &self.coords {
                let (f, m) = ms.mul(mv);
                let k = c * Q::from_integer(f);
                let w: Vec<Q> = v.iter().map(|x| x * &k).collect();
                out.add_component(&m, &w);
            }
        }
        Ok(out)
    }

    /// `A x` for a rational matrix `A`.
    pub fn apply(&self, a: &[Vec<Q>]) -> Self {
        let dim = a.len();
        let mut out = Self::zero(self.basis.clone(), dim);
        for (m, v) in &self.coords {
            out.add_component(m, &linalg::mat_vec(a, v));
        }
        out
    }

    /// Floating point coordinates for diagnostics.
    pub fn approx(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.coordinate(i).approx()).collect()
    }
}

fn check_dim(lat: &QuadLattice, x: &SymbolicVector) -> Result<()> {
    if x.dim != lat.rank() {
        return Err(Error::input(format!("vector of length {} on a lattice of rank {}", x.dim, lat.rank())));
    }
    Ok(())
}

/// `x^T G y`, expanded over symbol products.
pub fn bbf_pair(lat: &QuadLattice, x: &SymbolicVector, y: &SymbolicVector) -> Result<SymbolicScalar> {
    check_dim(lat, x)?;
    check_dim(lat, y)?;
    let basis = SymbolBasis::merge(&x.basis, &y.basis)?;
    let g = lat.gram_q();
    let gy: Vec<(&Monomial, Vec<Q>)> = y.coords.iter().map(|(m, v)| (m, linalg::mat_vec(g, v))).collect();
    let mut t = Terms::new();
    for (mx, vx) in &x.coords {
        for (my, gv) in &gy {
            let c = linalg::dot(vx, gv);
            if c.is_zero() {
                continue;
            }
            let (f, m) = mx.mul(my);
            terms_add_into(&mut t, &m, &(c * Q::from_integer(f)));
        }
    }
    Ok(SymbolicScalar::new(basis, t))
}

pub fn bbf_norm(lat: &QuadLattice, x: &SymbolicVector) -> Result<SymbolicScalar> {
    bbf_pair(lat, x, x)
}

/// Bilinear form used by [`rational_annihilator`].
#[derive(Clone, Copy, Debug)]
pub enum PairingForm<'a> {
    Bbf(&'a QuadLattice),
    /// The identity Gram matrix, for linear foliations on tori.
    Standard,
}

/// Q-basis of `{x in V_Q : q(x, u) = 0}` in reduced echelon form. Empty
/// means `u` is strongly irrational.
pub fn rational_kernel(lat: &QuadLattice, u: &SymbolicVector) -> Result<Vec<Vec<Q>>> {
    if u.is_zero() {
        return Err(Error::input("rational kernel of the zero vector"));
    }
    rational_annihilator(std::slice::from_ref(u), PairingForm::Bbf(lat))
}

/// Q-basis of the rational vectors pairing to zero with every element of
/// `w`. Because the symbols are independent over Q, a rational `x` pairs to
/// zero with `w` iff it pairs to zero with each symbol component of `w`.
pub fn rational_annihilator(w: &[SymbolicVector], form: PairingForm<'_>) -> Result<Vec<Vec<Q>>> {
    let first = w.first().ok_or_else(|| Error::input("empty family"))?;
    let d = first.dim;
    if w.iter().any(|x| x.dim != d) {
        return Err(Error::input("vectors of different lengths"));
    }
    let mut rows: Mat<Q> = Vec::new();
    for x in w {
        if let PairingForm::Bbf(lat) = form {
            check_dim(lat, x)?;
        }
        for v in x.coords.values() {
            rows.push(match form {
                PairingForm::Bbf(lat) => linalg::mat_vec(lat.gram_q(), v),
                PairingForm::Standard => v.clone(),
            });
        }
    }
    Ok(linalg::kernel(&rows, d))
}

/// Kronecker's criterion: the linear foliation of `R^n / Z^n` with
/// directions `f` has dense leaves iff no nonzero rational functional
/// vanishes on all of them.
pub fn torus_leaf_dense(f: &[SymbolicVector]) -> Result<bool> {
    Ok(rational_annihilator(f, PairingForm::Standard)?.is_empty())
}

/// Whether the rational vector `v` lies in the real span of `l`.
///
/// Exact: each symbol component of `l` spans a rational subspace, and `v`
/// is in the real span iff the rank of `[l | v]` over the reals does not
/// grow. We test this through all minors of size `|l| + 1`, expanded
/// symbolically.
pub fn rational_in_real_span(l: &[SymbolicVector], v: &[Q]) -> Result<bool> {
    let d = v.len();
    let k = l.len();
    let vs = SymbolicVector::rational(v.to_vec());
    let mut cols: Vec<SymbolicVector> = l.to_vec();
    cols.push(vs);
    // Real rank of l via a nonvanishing k x k minor.
    let rows_combos = combinations(d, k);
    let entry = |c: &SymbolicVector, i: usize| c.coordinate(i);
    let minor = |rows: &[usize], cs: &[SymbolicVector]| -> Result<SymbolicScalar> {
        let m: Vec<Vec<SymbolicScalar>> = rows.iter().map(|&i| cs.iter().map(|c| entry(c, i)).collect()).collect();
        symbolic_det(&m)
    };
    let Some(pivot) = rows_combos.iter().find(|r| minor(r, &cols[..k]).map(|x| !x.is_zero()).unwrap_or(false)) else {
        return Err(Error::input("spanning family is degenerate"));
    };
    for i in 0..d {
        if pivot.contains(&i) {
            continue;
        }
        let mut rows = pivot.clone();
        rows.push(i);
        if !minor(&rows, &cols)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Division-free determinant by cofactor expansion; only used for tiny
/// symbolic matrices.
pub fn symbolic_det(m: &[Vec<SymbolicScalar>]) -> Result<SymbolicScalar> {
    let n = m.len();
    match n {
        0 => Ok(SymbolicScalar::rational(SymbolBasis::rational(), Q::from_integer(1.into()))),
        1 => Ok(m[0][0].clone()),
        _ => {
            let mut acc: Option<SymbolicScalar> = None;
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let sub: Vec<Vec<SymbolicScalar>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect())
                    .collect();
                let mut t = m[0][j].mul(&symbolic_det(&sub)?)?;
                if j % 2 == 1 {
                    t = t.neg();
                }
                acc = Some(match acc {
                    Some(a) => a.add(&t)?,
                    None => t,
                });
            }
            Ok(acc.unwrap_or_else(|| SymbolicScalar::rational(m[0][0].basis().clone(), Q::zero())))
        }
    }
}
