//! `so(V, q)` realized as `Λ²V`: brackets, the radical `r(L, u)`, rational
//! component spans and Lie closures.
//!
//! A bivector with coefficients `b_ij` (`i < j`) is the antisymmetric
//! matrix `B`; the endomorphism of `v ∧ w` is `x ↦ q(x,w) v − q(x,v) w`,
//! which is `B G`. The bracket is then `B1 G B2 − B2 G B1`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{Field, Fp, Q};
use crate::error::{Error, Result};
use crate::lattice::QuadLattice;
use crate::linalg::{self, Echelon, Mat};
use crate::scalar::{Sign, SymbolicScalar, Terms};
use crate::symbols::{Monomial, SymbolBasis};
use crate::vector::{symbolic_det, SymbolicVector};

pub fn num_pairs(d: usize) -> usize {
    d * d.saturating_sub(1) / 2
}

/// Position of `e_i ∧ e_j`, `i < j`, in lexicographic order.
pub fn pair_index(i: usize, j: usize, d: usize) -> usize {
    debug_assert!(i < j && j < d);
    i * d - i * (i + 1) / 2 + (j - i - 1)
}

pub fn pairs(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect()
}

pub fn antisym<C: Field>(b: &[C], d: usize) -> Mat<C> {
    let mut m = linalg::zeros(d, d);
    for (k, (i, j)) in pairs(d).into_iter().enumerate() {
        if !b[k].is_zero() {
            m[i][j] = b[k].clone();
            m[j][i] = b[k].neg();
        }
    }
    m
}

pub fn from_antisym<C: Field>(m: &[Vec<C>]) -> Vec<C> {
    let d = m.len();
    pairs(d).into_iter().map(|(i, j)| m[i][j].clone()).collect()
}

pub fn wedge_rat<C: Field>(v: &[C], w: &[C]) -> Vec<C> {
    let d = v.len();
    pairs(d).into_iter().map(|(i, j)| v[i].mul(&w[j]).sub(&v[j].mul(&w[i]))).collect()
}

/// Endomorphism `B G` of a rational bivector.
pub fn endo_rat<C: Field>(g: &[Vec<C>], b: &[C]) -> Mat<C> {
    linalg::mat_mul(&antisym(b, g.len()), g)
}

/// A bivector prepared for repeated bracketing: `B` and `B G`.
#[derive(Clone, Debug)]
struct Prepared<C: Field> {
    b: Mat<C>,
    bg: Mat<C>,
}

fn prepare<C: Field>(g: &[Vec<C>], v: &[C]) -> Prepared<C> {
    let b = antisym(v, g.len());
    let bg = linalg::mat_mul(&b, g);
    Prepared { b, bg }
}

fn bracket_prepared<C: Field>(x: &Prepared<C>, y: &Prepared<C>) -> Vec<C> {
    let d = x.b.len();
    let mut out = Vec::with_capacity(num_pairs(d));
    for i in 0..d {
        for j in i + 1..d {
            let mut s = C::zero();
            for k in 0..d {
                if !x.bg[i][k].is_zero() && !y.b[k][j].is_zero() {
                    s = s.add(&x.bg[i][k].mul(&y.b[k][j]));
                }
                if !y.bg[i][k].is_zero() && !x.b[k][j].is_zero() {
                    s = s.sub(&y.bg[i][k].mul(&x.b[k][j]));
                }
            }
            out.push(s);
        }
    }
    out
}

/// `[b1, b2]` for rational bivectors under the Gram matrix `g`.
pub fn bracket_rat<C: Field>(g: &[Vec<C>], b1: &[C], b2: &[C]) -> Vec<C> {
    bracket_prepared(&prepare(g, b1), &prepare(g, b2))
}

/// A bivector with coefficients over the symbol algebra.
#[derive(Clone, Debug)]
pub struct Bivector {
    basis: Arc<SymbolBasis>,
    d: usize,
    coords: BTreeMap<Monomial, Vec<Q>>,
}

impl PartialEq for Bivector {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.coords == other.coords
    }
}

impl Bivector {
    pub fn zero(basis: Arc<SymbolBasis>, d: usize) -> Self {
        Bivector { basis, d, coords: BTreeMap::new() }
    }

    pub fn rational(b: Vec<Q>, d: usize) -> Self {
        assert_eq!(b.len(), num_pairs(d));
        let mut out = Self::zero(SymbolBasis::rational(), d);
        out.add_component(&Monomial::unit(), &b);
        out
    }

    fn add_component(&mut self, m: &Monomial, v: &[Q]) {
        if v.iter().all(Field::is_zero) {
            return;
        }
        let e = self.coords.entry(m.clone()).or_insert_with(|| vec![Q::zero(); v.len()]);
        for (x, y) in e.iter_mut().zip(v) {
            *x += y;
        }
        if e.iter().all(Field::is_zero) {
            self.coords.remove(m);
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn basis(&self) -> &Arc<SymbolBasis> {
        &self.basis
    }

    pub fn components(&self) -> &BTreeMap<Monomial, Vec<Q>> {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn as_rational(&self) -> Option<Vec<Q>> {
        if !self.coords.keys().all(Monomial::is_unit) {
            return None;
        }
        Some(self.coords.get(&Monomial::unit()).cloned().unwrap_or_else(|| vec![Q::zero(); num_pairs(self.d)]))
    }

    pub fn wedge(v: &SymbolicVector, w: &SymbolicVector) -> Result<Self> {
        if v.dim() != w.dim() {
            return Err(Error::input("wedge of vectors of different lengths"));
        }
        let mut out = Self::zero(SymbolBasis::merge(v.basis(), w.basis())?, v.dim());
        for (mv, cv) in v.components() {
            for (mw, cw) in w.components() {
                let (f, m) = mv.mul(mw);
                let f = Q::from_integer(f);
                let b: Vec<Q> = wedge_rat(cv, cw).into_iter().map(|x| x * &f).collect();
                out.add_component(&m, &b);
            }
        }
        Ok(out)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.d != o.d {
            return Err(Error::input("bivectors of different dimensions"));
        }
        let mut out = Bivector { basis: SymbolBasis::merge(&self.basis, &o.basis)?, ..self.clone() };
        for (m, v) in &o.coords {
            out.add_component(m, v);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = Self::zero(self.basis.clone(), self.d);
        for (m, v) in &self.coords {
            out.add_component(m, &v.iter().map(|x| x * c).collect::<Vec<_>>());
        }
        out
    }
}

fn check_lattice(lat: &QuadLattice, d: usize) -> Result<()> {
    if lat.rank() != d {
        return Err(Error::input(format!("bivector on rank {d} used with a lattice of rank {}", lat.rank())));
    }
    Ok(())
}

/// Bilinear extension of the bracket.
pub fn bracket(lat: &QuadLattice, a: &Bivector, b: &Bivector) -> Result<Bivector> {
    check_lattice(lat, a.d)?;
    bracket_gram(lat.gram_q(), a, b)
}

pub fn bracket_gram(g: &Mat<Q>, a: &Bivector, b: &Bivector) -> Result<Bivector> {
    if a.d != b.d || g.len() != a.d {
        return Err(Error::input("bracket dimension mismatch"));
    }
    let mut out = Bivector::zero(SymbolBasis::merge(&a.basis, &b.basis)?, a.d);
    for (ma, va) in &a.coords {
        for (mb, vb) in &b.coords {
            let (f, m) = ma.mul(mb);
            let f = Q::from_integer(f);
            let br: Vec<Q> = bracket_rat(g, va, vb).into_iter().map(|x| x * &f).collect();
            out.add_component(&m, &br);
        }
    }
    Ok(out)
}

/// The endomorphism `x ↦ Σ b_ij (q(x, e_j) e_i − q(x, e_i) e_j)` as a
/// matrix acting on column vectors.
pub fn biv_to_endo(lat: &QuadLattice, b: &Bivector) -> Result<Vec<Vec<SymbolicScalar>>> {
    check_lattice(lat, b.d)?;
    let d = b.d;
    let mut terms: Vec<Vec<Terms>> = vec![vec![Terms::new(); d]; d];
    for (m, v) in &b.coords {
        let x = endo_rat(lat.gram_q(), v);
        for i in 0..d {
            for j in 0..d {
                if !x[i][j].is_zero() {
                    crate::scalar::terms_add_into(&mut terms[i][j], m, &x[i][j]);
                }
            }
        }
    }
    Ok(terms.into_iter().map(|r| r.into_iter().map(|t| SymbolicScalar::new(b.basis.clone(), t)).collect()).collect())
}

/// A point of the parabolic period domain: a positive plane (or line, or
/// nothing) `L` and an isotropic `u ∈ L^⊥`.
#[derive(Clone, Debug)]
pub struct PeriodPoint {
    pub l: Vec<SymbolicVector>,
    pub u: SymbolicVector,
}

impl PeriodPoint {
    /// Checks `q(u) = 0` and `q(u, L_i) = 0` syntactically, `q|_L`
    /// nondegenerate for one vector and positive definite for two.
    pub fn new(lat: &QuadLattice, l: Vec<SymbolicVector>, u: SymbolicVector, budget: u32) -> Result<Self> {
        validate_point(lat.gram_q(), &l, &u, budget)?;
        Ok(PeriodPoint { l, u })
    }

    pub fn ell(&self) -> usize {
        self.l.len()
    }
}

fn pair_gram(g: &Mat<Q>, x: &SymbolicVector, y: &SymbolicVector) -> Result<SymbolicScalar> {
    let mut t = Terms::new();
    for (mx, vx) in x.components() {
        let gx = linalg::mat_vec(g, vx);
        for (my, vy) in y.components() {
            let c = linalg::dot(&gx, vy);
            if c.is_zero() {
                continue;
            }
            let (f, m) = mx.mul(my);
            crate::scalar::terms_add_into(&mut t, &m, &(c * Q::from_integer(f)));
        }
    }
    Ok(SymbolicScalar::new(SymbolBasis::merge(x.basis(), y.basis())?, t))
}

fn validate_point(g: &Mat<Q>, l: &[SymbolicVector], u: &SymbolicVector, budget: u32) -> Result<()> {
    let d = g.len();
    if u.dim() != d || l.iter().any(|x| x.dim() != d) {
        return Err(Error::input("period point vectors have the wrong length"));
    }
    if l.len() > 2 {
        return Err(Error::input("L must have at most two vectors"));
    }
    if u.is_zero() {
        return Err(Error::input("u is zero"));
    }
    if !pair_gram(g, u, u)?.is_zero() {
        return Err(Error::input("q(u) is not syntactically zero"));
    }
    for (i, x) in l.iter().enumerate() {
        if !pair_gram(g, u, x)?.is_zero() {
            return Err(Error::input(format!("q(u, L{}) is not syntactically zero", i + 1)));
        }
    }
    match l.len() {
        1 => {
            if pair_gram(g, &l[0], &l[0])?.sign(budget)? == Sign::Zero {
                return Err(Error::input("q restricted to L is degenerate"));
            }
        }
        2 => {
            let a = pair_gram(g, &l[0], &l[0])?;
            let b = pair_gram(g, &l[0], &l[1])?;
            let c = pair_gram(g, &l[1], &l[1])?;
            let det = a.mul(&c)?.sub(&b.mul(&b)?)?;
            if a.sign(budget)? != Sign::Positive || det.sign(budget)? != Sign::Positive {
                return Err(Error::input("q restricted to L is not positive definite"));
            }
        }
        _ => {}
    }
    Ok(())
}

/// Generators `u ∧ w_k` of `r(L, u) = u ∧ (L + R u)^⊥`.
///
/// The `w_k` are `d − ℓ − 1` vectors spanning `(L + R u)^⊥` over the
/// reals (one direction of which is `u` itself), so `r(L, u)` has
/// dimension `d − ℓ − 2`.
pub fn radical_generators(lat: &QuadLattice, p: &PeriodPoint) -> Result<Vec<Bivector>> {
    radical_gram(lat.gram_q(), &p.u, &p.l)
}

fn radical_gram(g: &Mat<Q>, u: &SymbolicVector, l: &[SymbolicVector]) -> Result<Vec<Bivector>> {
    let d = g.len();
    let mut rows: Vec<Vec<SymbolicScalar>> = Vec::new();
    for x in std::iter::once(u).chain(l.iter()) {
        let gx = x.apply(g);
        if !gx.is_zero() {
            rows.push((0..d).map(|i| gx.coordinate(i)).collect());
        }
    }
    let m = rows.len();
    let minor = |cols: &[usize], nrows: usize| -> Result<SymbolicScalar> {
        let sub: Vec<Vec<SymbolicScalar>> =
            rows[..nrows].iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect();
        symbolic_det(&sub)
    };
    // Grow a pivot set whose leading minor stays nonzero.
    let mut piv: Vec<usize> = Vec::new();
    for k in 0..m {
        let mut found = None;
        for c in 0..d {
            if piv.contains(&c) {
                continue;
            }
            let mut cols = piv.clone();
            cols.push(c);
            if !minor(&cols, k + 1)?.is_zero() {
                found = Some(c);
                break;
            }
        }
        match found {
            Some(c) => piv.push(c),
            None => return Err(Error::input("u and L are linearly dependent")),
        }
    }
    let mut out = Vec::new();
    for c in 0..d {
        if piv.contains(&c) {
            continue;
        }
        let mut s = piv.clone();
        s.push(c);
        s.sort_unstable();
        let mut w = SymbolicVector::zero(u.basis().clone(), d);
        for (t, &col) in s.iter().enumerate() {
            let rest: Vec<usize> = s.iter().copied().filter(|&x| x != col).collect();
            let mut val = minor(&rest, m)?;
            if t % 2 == 1 {
                val = val.neg();
            }
            let mut e = vec![Q::zero(); d];
            e[col] = Q::from_integer(1.into());
            w = w.add(&SymbolicVector::rational(e).mul_scalar(&val)?)?;
        }
        out.push(Bivector::wedge(u, &w)?);
    }
    Ok(out)
}

/// A rational subspace of `Λ²V`, stored as a reduced echelon basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SubalgebraBasis {
    pub d: usize,
    pub rows: Vec<Vec<Q>>,
    pub closed: bool,
}

impl SubalgebraBasis {
    pub fn empty(d: usize) -> Self {
        SubalgebraBasis { d, rows: Vec::new(), closed: false }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn from_rows(d: usize, rows: &[Vec<Q>]) -> Self {
        let mut e = Echelon::new(num_pairs(d));
        for r in rows {
            e.insert(r);
        }
        SubalgebraBasis { d, rows: e.rows().to_vec(), closed: false }
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        let mut e = Echelon::new(num_pairs(self.d));
        for r in &self.rows {
            e.insert(r);
        }
        e.contains(v)
    }
}

/// Every rational component of every generator, in deterministic order.
fn components<'a>(gens: &'a [Bivector]) -> impl Iterator<Item = &'a Vec<Q>> + 'a {
    gens.iter().flat_map(|g| g.coords.values())
}

/// Q-span of the symbol components of `gens`. Since the symbols are
/// independent over Q, this is the smallest rational subspace whose real
/// span contains every generator. Stops early once `max_dim` is reached.
pub fn q_components(gens: &[Bivector], max_dim: Option<usize>) -> SubalgebraBasis {
    let d = gens.first().map_or(0, |g| g.d);
    let mut e = Echelon::new(num_pairs(d));
    let cap = max_dim.unwrap_or(usize::MAX).min(num_pairs(d));
    for c in components(gens) {
        if e.rank() >= cap {
            break;
        }
        e.insert(c);
    }
    SubalgebraBasis { d, rows: e.rows().to_vec(), closed: false }
}

/// Smallest bracket-closed subspace containing the seed rows, over any
/// field. Each round brackets the rows added in the previous round against
/// all rows; brackets of a round are computed in parallel and inserted in
/// a fixed order. Returns the echelon basis and the number of rounds.
pub fn closure_over<C: Field>(g: &Mat<C>, seed: &[Vec<C>]) -> (Echelon<C>, usize) {
    let d = g.len();
    let dim = num_pairs(d);
    let mut e = Echelon::new(dim);
    for s in seed {
        if e.is_full() {
            break;
        }
        e.insert(s);
    }
    let mut prepared: Vec<Prepared<C>> = e.generators().iter().map(|v| prepare(g, v)).collect();
    let mut frontier: Vec<usize> = (0..prepared.len()).collect();
    let mut rounds = 0;
    while !frontier.is_empty() && !e.is_full() {
        rounds += 1;
        let n = prepared.len();
        let in_frontier: Vec<bool> = (0..n).map(|i| frontier.contains(&i)).collect();
        let work: Vec<(usize, usize)> = frontier
            .iter()
            .flat_map(|&i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .filter(|&(i, j)| !in_frontier[j] || j > i)
            .collect();
        let brackets: Vec<Vec<C>> =
            work.par_iter().map(|&(i, j)| bracket_prepared(&prepared[i], &prepared[j])).collect();
        let mut next = Vec::new();
        for br in brackets {
            if e.is_full() {
                break;
            }
            if e.insert(&br) {
                next.push(prepared.len());
                prepared.push(prepare(g, &br));
            }
        }
        frontier = next;
    }
    (e, rounds)
}

/// Lie closure of a rational seed under the Gram matrix `g`.
pub fn lie_closure_gram(g: &Mat<Q>, seed: &SubalgebraBasis) -> (SubalgebraBasis, usize) {
    let (e, rounds) = closure_over(g, &seed.rows);
    (SubalgebraBasis { d: seed.d, rows: e.rows().to_vec(), closed: true }, rounds)
}

pub fn lie_closure(lat: &QuadLattice, seed: &SubalgebraBasis) -> Result<(SubalgebraBasis, usize)> {
    if seed.d != lat.rank() {
        return Err(Error::input("seed dimension does not match the lattice"));
    }
    Ok(lie_closure_gram(lat.gram_q(), seed))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "dim")]
pub enum ClosureVerdict {
    Full,
    Proper(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct RatnerReport {
    pub verdict: ClosureVerdict,
    /// Dimension of the ambient `W` (all of `V` when unrestricted).
    pub ambient_dim: usize,
    pub ell: usize,
    pub generator_count: usize,
    /// Rank of the rational component span; only computed on the exact path.
    pub seed_dim: Option<usize>,
    pub closure_dim: usize,
    pub full_dim: usize,
    pub rounds: usize,
    /// Whether fullness was certified by a computation modulo a prime.
    pub modular: bool,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub basis: Option<SubalgebraBasis>,
}

/// Dimension thresholds under which fullness is guaranteed for strongly
/// irrational points.
pub fn threshold_ok(ell: usize, dim: usize) -> bool {
    match ell {
        0 => dim >= 5,
        1 => dim >= 6,
        _ => dim >= 7,
    }
}

/// Computes the Lie closure of the rational components of `r(L, u)`,
/// inside `Λ²W` when a rational subspace `W ⊇ L, u` is given, and reports
/// whether it is all of `so(W)`.
pub fn ratner_full_check(lat: &QuadLattice, p: &PeriodPoint, restrict_to: Option<&[Vec<Q>]>) -> Result<RatnerReport> {
    let d = lat.rank();
    let (g, u, l) = match restrict_to {
        None => (lat.gram_q().clone(), p.u.clone(), p.l.clone()),
        Some(bw) => restrict(lat, bw, &p.u, &p.l)?,
    };
    let dim_w = g.len();
    let full = num_pairs(dim_w);
    let ell = l.len();
    let mut warnings = Vec::new();
    if !threshold_ok(ell, dim_w) {
        warnings.push(format!("dimension {dim_w} is below the fullness threshold for ell = {ell}"));
    }
    if restrict_to.is_some() && dim_w == d {
        warnings.push("restriction is the whole space".into());
    }
    let gens = radical_gram(&g, &u, &l)?;
    let base = RatnerReport {
        verdict: ClosureVerdict::Full,
        ambient_dim: dim_w,
        ell,
        generator_count: gens.len(),
        seed_dim: None,
        closure_dim: full,
        full_dim: full,
        rounds: 0,
        modular: false,
        warnings,
        basis: None,
    };
    if let Some(rounds) = modular_full(&g, &gens) {
        return Ok(RatnerReport { rounds, modular: true, ..base });
    }
    let seed = q_components(&gens, None);
    let seed_dim = seed.dim();
    let (closed, rounds) = lie_closure_gram(&g, &seed);
    let dim = closed.dim();
    let verdict = if dim == full { ClosureVerdict::Full } else { ClosureVerdict::Proper(dim) };
    Ok(RatnerReport { verdict, seed_dim: Some(seed_dim), closure_dim: dim, rounds, basis: Some(closed), ..base })
}

/// Attempts to certify fullness modulo `2^61 − 1`. The closure of the
/// reduced seed is contained in the reduction of the rational closure, so
/// full rank modulo p implies full rank over Q.
fn modular_full(g: &Mat<Q>, gens: &[Bivector]) -> Option<usize> {
    let gp: Mat<Fp> = linalg::to_field(g)?;
    let dim = num_pairs(g.len());
    let mut e: Echelon<Fp> = Echelon::new(dim);
    for c in components(gens) {
        if e.is_full() {
            break;
        }
        let v: Vec<Fp> = c.iter().map(Fp::from_q).collect::<Option<_>>()?;
        e.insert(&v);
    }
    if e.is_full() {
        return Some(0);
    }
    let (closed, rounds) = closure_over(&gp, e.rows());
    closed.is_full().then_some(rounds)
}

/// Rewrites `u`, `L` in coordinates of the rational basis `bw` of `W`,
/// with Gram matrix `bw G bw^T`.
fn restrict(
    lat: &QuadLattice,
    bw: &[Vec<Q>],
    u: &SymbolicVector,
    l: &[SymbolicVector],
) -> Result<(Mat<Q>, SymbolicVector, Vec<SymbolicVector>)> {
    let d = lat.rank();
    if bw.is_empty() || bw.iter().any(|r| r.len() != d) {
        return Err(Error::input("restriction basis has the wrong shape"));
    }
    if linalg::rank(bw, d) != bw.len() {
        return Err(Error::input("restriction basis is not linearly independent"));
    }
    let g = linalg::mat_mul(&linalg::mat_mul(bw, lat.gram_q()), &linalg::transpose(bw));
    if linalg::det(&g).is_zero() {
        return Err(Error::input("q restricted to W is degenerate"));
    }
    let to_w = |x: &SymbolicVector| -> Result<SymbolicVector> {
        let mut comps = BTreeMap::new();
        for (m, v) in x.components() {
            let a = linalg::solve_in_span(bw, v).ok_or_else(|| Error::input("vector does not lie in W"))?;
            comps.insert(m.clone(), a);
        }
        SymbolicVector::from_components(x.basis().clone(), bw.len(), comps)
    };
    let uw = to_w(u)?;
    let lw = l.iter().map(to_w).collect::<Result<Vec<_>>>()?;
    Ok((g, uw, lw))
}
