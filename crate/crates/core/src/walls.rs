//! Wall arrangements of MBM type in a hyperbolic lattice.
//!
//! The candidate set of MBM classes is every primitive integral class `x`
//! with `-M <= q(x) < 0`. This is a superset of the true MBM classes, so a
//! spurious wall can only make nef verdicts more conservative.
//!
//! Local walls near a positive class `h` are those whose hyperplane `x^⊥`
//! meets the neighbourhood
//! `U = { t h + w : 1/2 < t < 2, w ⊥ h, |q(w)| < q(h)/8 }`.
//! Writing `x = s h/|h| + v` with `v ⊥ h`, the hyperplane meets `U` exactly
//! when `2 s^2 < -q(v)`, i.e. `q(x,h)^2 < -q(x) q(h)`. In particular
//! `s^2 < M` and `|q(v)| < 2M`, which bounds the positive majorant
//! `P_h(x) = 2 q(x,h)^2 / q(h) - q(x)` by `3M` and makes the search finite.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{q, Q};
use crate::enumerate;
use crate::error::{Error, Result};
use crate::lattice::QuadLattice;
use crate::linalg::{self, Mat};
use crate::scalar::{Sign, SymbolicScalar};
use crate::symbols::MAX_ROUND;
use crate::vector::{bbf_norm, bbf_pair, SymbolicVector};

/// A Néron–Severi type lattice of signature `(1, n)` with an MBM bound and
/// an optional rational subspace `H0` of candidate classes.
#[derive(Clone, Debug)]
pub struct HyperbolicSlice {
    pub ns: QuadLattice,
    pub mbm_bound: u64,
    pub h0: Option<Vec<Vec<Q>>>,
}

impl HyperbolicSlice {
    pub fn new(ns: QuadLattice, mbm_bound: u64, h0: Option<Vec<Vec<Q>>>) -> Result<Self> {
        if mbm_bound == 0 {
            return Err(Error::Config("MBM bound must be at least 1".into()));
        }
        let (p, _) = ns.signature()?;
        if p != 1 {
            return Err(Error::input(format!("slice must have signature (1, n), got {p} positive directions")));
        }
        if let Some(rows) = &h0 {
            let d = ns.rank();
            if rows.iter().any(|r| r.len() != d) {
                return Err(Error::input("H0 basis vectors have the wrong length"));
            }
            if linalg::rank(rows, d) != rows.len() {
                return Err(Error::input("H0 basis is linearly dependent"));
            }
        }
        Ok(HyperbolicSlice { ns, mbm_bound, h0 })
    }

    /// Z-basis of the candidate lattice `H0 ∩ Z^d` (all of `Z^d` without H0).
    pub fn candidate_basis(&self) -> Vec<Vec<i64>> {
        let d = self.ns.rank();
        match &self.h0 {
            Some(rows) if rows.is_empty() => Vec::new(),
            Some(rows) => enumerate::saturate(rows, d),
            None => (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect(),
        }
    }
}

/// Hyperplane `x^⊥` of a primitive, sign-normalized integral class.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Wall {
    pub x: Vec<i64>,
}

impl Wall {
    pub fn vector(&self) -> SymbolicVector {
        SymbolicVector::from_ints(&self.x)
    }

    pub fn negated(&self) -> Wall {
        Wall { x: self.x.iter().map(|c| -c).collect() }
    }
}

/// Result of a local enumeration.
#[derive(Clone, Debug)]
pub struct WallSet {
    pub walls: Vec<Wall>,
    pub bound: u64,
    pub center: SymbolicVector,
    /// Shift used by [`walls_near_parabolic`], `h = u + t z`.
    pub t: Option<Q>,
    /// Radius `R` of the majorant ball that was searched.
    pub radius: Q,
    /// Number of lattice points inside the ball.
    pub scanned: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChamberSignature {
    pub walls: Vec<Wall>,
    pub signs: Vec<Sign>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "wall")]
pub enum NefVerdict {
    Nef,
    NotNef(Wall),
    OnWallViolation(Wall),
}

/// `q(x,h)^2 + q(x) q(h)`; the hyperplane `x^⊥` meets `U(h)` iff this is
/// negative.
pub fn wall_discriminant(lat: &QuadLattice, x: &[i64], h: &SymbolicVector) -> Result<SymbolicScalar> {
    let xv = SymbolicVector::from_ints(x);
    let xh = bbf_pair(lat, &xv, h)?;
    let qh = bbf_norm(lat, h)?;
    let qx = Q::from_integer(lat.pair_int(x, x).into());
    xh.mul(&xh)?.add(&qh.scale(&qx))
}

pub fn meets_neighbourhood(lat: &QuadLattice, x: &[i64], h: &SymbolicVector, budget: u32) -> Result<bool> {
    Ok(wall_discriminant(lat, x, h)?.sign(budget)? == Sign::Negative)
}

/// Checks `s^2 < M` and `|q(v)| < 2M` for `x = s h + v`, `v ⊥ h`, with `h`
/// normalized to `q(h) = 1`. Both are stated without division:
/// `q(x,h)^2 < M q(h)` and `q(x,h)^2 - q(x) q(h) < 2M q(h)`.
pub fn proof_bounds_hold(lat: &QuadLattice, x: &[i64], h: &SymbolicVector, m: u64, budget: u32) -> Result<bool> {
    let xv = SymbolicVector::from_ints(x);
    let xh = bbf_pair(lat, &xv, h)?;
    let xh2 = xh.mul(&xh)?;
    let qh = bbf_norm(lat, h)?;
    let qx = Q::from_integer(lat.pair_int(x, x).into());
    let mq = Q::from_integer(m.into());
    let s_ok = xh2.sub(&qh.scale(&mq))?.sign(budget)? == Sign::Negative;
    let v_ok = xh2.sub(&qh.scale(&qx))?.sub(&qh.scale(&(q(2) * &mq)))?.sign(budget)? == Sign::Negative;
    Ok(s_ok && v_ok)
}

/// `2 (G a)(G a)^T / q(a) - G` for a rational positive `a`.
fn majorant(g: &[Vec<Q>], a: &[Q]) -> Mat<Q> {
    let ga = linalg::mat_vec(g, a);
    let qa = linalg::dot(a, &ga);
    let n = g.len();
    let mut p = vec![vec![Q::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            p[i][j] = q(2) * &ga[i] * &ga[j] / &qa - &g[i][j];
        }
    }
    p
}

/// Rational center for the majorant, and the search radius. For irrational
/// `h` the radius grows with `C >= cosh^2` of the hyperbolic angle between
/// `h` and its rational approximation: `6M(2C - 1) + M`.
fn center_and_radius(lat: &QuadLattice, h: &SymbolicVector, m: u64, budget: u32) -> Result<(Vec<Q>, Q)> {
    let mq = Q::from_integer(m.into());
    if let Some(hr) = h.as_rational() {
        return Ok((hr, q(3) * mq));
    }
    let g = lat.gram_q();
    let qh = bbf_norm(lat, h)?;
    for round in 1..=budget.clamp(1, MAX_ROUND) {
        let scale = Q::from_integer(BigInt::one() << (8 * round as usize));
        let approx: Vec<Q> = (0..h.dim())
            .map(|i| {
                let (lo, hi) = h.coordinate(i).interval(round);
                ((lo + hi) / q(2) * &scale).round() / &scale
            })
            .collect();
        let qa = linalg::form(g, &approx, &approx);
        if !qa.is_positive() {
            continue;
        }
        let ha = bbf_pair(lat, h, &SymbolicVector::rational(approx.clone()))?;
        let num = ha.mul(&ha)?.interval(round);
        let den = qh.interval(round);
        if !den.0.is_positive() {
            continue;
        }
        let c = num.1 / (den.0 * &qa);
        if c < q(2) {
            let radius = q(6) * &mq * (q(2) * c - q(1)) + &mq;
            return Ok((approx, radius));
        }
    }
    Err(Error::Indeterminate("could not approximate the center by a nearby rational class".into()))
}

/// All candidate walls whose hyperplane meets the neighbourhood `U` of `h`,
/// sorted.
pub fn enumerate_local_walls(slice: &HyperbolicSlice, h: &SymbolicVector, budget: u32) -> Result<WallSet> {
    let lat = &slice.ns;
    if h.dim() != lat.rank() {
        return Err(Error::input("center has the wrong dimension"));
    }
    if bbf_norm(lat, h)?.sign(budget)? != Sign::Positive {
        return Err(Error::input("center is not a positive class"));
    }
    let m = slice.mbm_bound;
    let (center, radius) = center_and_radius(lat, h, m, budget)?;
    let basis = slice.candidate_basis();
    let mut walls = BTreeSet::new();
    let mut scanned = 0;
    if !basis.is_empty() {
        let p = majorant(lat.gram_q(), &center);
        let basis = enumerate::reduce_basis(&basis, &p);
        let pb = enumerate::gram_in_basis(&basis, &p);
        let points = enumerate::short_vectors(&pb, &radius)?;
        scanned = points.len();
        let mi = m as i128;
        let found: Vec<Result<Option<Wall>>> = points
            .par_iter()
            .map(|a| {
                let mut x = enumerate::combine(a, &basis);
                if !enumerate::is_primitive(&x) {
                    return Ok(None);
                }
                let qx = lat.pair_int(&x, &x);
                if qx >= 0 || qx < -mi {
                    return Ok(None);
                }
                if !meets_neighbourhood(lat, &x, h, budget)? {
                    return Ok(None);
                }
                enumerate::sign_normalize(&mut x);
                Ok(Some(Wall { x }))
            })
            .collect();
        for w in found {
            if let Some(w) = w? {
                walls.insert(w);
            }
        }
    }
    Ok(WallSet { walls: walls.into_iter().collect(), bound: m, center: h.clone(), t: None, radius, scanned })
}

/// Brute-force scan of the coordinate box that contains the majorant ball,
/// using `x_i^2 <= R (P^{-1})_{ii}`. Independent of the reduction and of the
/// short-vector recursion; used for cross-checks.
pub fn box_oracle(slice: &HyperbolicSlice, h: &SymbolicVector, budget: u32) -> Result<Vec<Wall>> {
    let lat = &slice.ns;
    let (center, radius) = center_and_radius(lat, h, slice.mbm_bound, budget)?;
    let p = majorant(lat.gram_q(), &center);
    let pinv = linalg::inverse(&p).ok_or_else(|| Error::input("degenerate majorant"))?;
    let d = lat.rank();
    let bounds: Vec<i64> = (0..d)
        .map(|i| {
            crate::arith::floor_q(&crate::arith::sqrt_upper(&(&radius * &pinv[i][i]))).to_i64().unwrap_or(i64::MAX)
        })
        .collect();
    let total: f64 = bounds.iter().map(|&b| (2 * b + 1) as f64).product();
    if total > 5e7 {
        return Err(Error::Budget(format!("oracle box has {total:.0} points")));
    }
    let mut out = BTreeSet::new();
    let mut x: Vec<i64> = bounds.iter().map(|b| -b).collect();
    let m = slice.mbm_bound as i128;
    loop {
        let qx = lat.pair_int(&x, &x);
        let in_h0 = match &slice.h0 {
            None => true,
            Some(rows) => {
                let xq: Vec<Q> = x.iter().map(|&c| q(c)).collect();
                linalg::solve_in_span(rows, &xq).is_some()
            }
        };
        if in_h0 && qx < 0 && qx >= -m && enumerate::is_primitive(&x) && meets_neighbourhood(lat, &x, h, budget)? {
            let mut w = x.clone();
            enumerate::sign_normalize(&mut w);
            out.insert(Wall { x: w });
        }
        let mut i = 0;
        loop {
            if i == d {
                return Ok(out.into_iter().collect());
            }
            if x[i] < bounds[i] {
                x[i] += 1;
                break;
            }
            x[i] = -bounds[i];
            i += 1;
        }
    }
}

/// Walls near an irrational isotropic class `u`, found at the positive
/// class `h = u + t z` for the first rational `t` (denominators 1..64,
/// numerators up to the denominator) with `q(h) > 0`. Walls in `H0` are
/// orthogonal to `z`, so the same list serves the translated neighbourhood
/// `U(h) - t z` around `u`.
pub fn walls_near_parabolic(slice: &HyperbolicSlice, u: &SymbolicVector, z: &[Q], budget: u32) -> Result<WallSet> {
    let lat = &slice.ns;
    let h0 = slice
        .h0
        .as_ref()
        .ok_or_else(|| Error::Precondition("walls near a parabolic class need the subspace H0".into()))?;
    let d = lat.rank();
    if u.dim() != d || z.len() != d {
        return Err(Error::input("dimension mismatch"));
    }
    if !bbf_norm(lat, u)?.is_zero() {
        return Err(Error::Precondition("u is not isotropic".into()));
    }
    let in_h0 = u.components().values().all(|c| linalg::solve_in_span(h0, c).is_some());
    if in_h0 {
        return Err(Error::Precondition("u lies in the real span of H0".into()));
    }
    if h0.iter().any(|r| !lat.pair(r, z).is_zero()) {
        return Err(Error::input("z is not orthogonal to H0"));
    }
    let zv = SymbolicVector::rational(z.to_vec());
    let uz = bbf_pair(lat, u, &zv)?;
    let dir = match uz.sign(budget)? {
        Sign::Positive => q(1),
        Sign::Negative => q(-1),
        Sign::Zero => return Err(Error::Precondition("q(u, z) vanishes".into())),
    };
    for den in 1..=64i64 {
        for num in 1..=den {
            let t = &dir * Q::new(num.into(), den.into());
            if t.denom() != &BigInt::from(den) {
                continue;
            }
            let h = u.add(&zv.scale(&t))?;
            if bbf_norm(lat, &h)?.sign(budget)? == Sign::Positive {
                let mut set = enumerate_local_walls(slice, &h, budget)?;
                set.t = Some(t);
                return Ok(set);
            }
        }
    }
    Err(Error::Budget("no shift t with denominator up to 64 gives a positive class".into()))
}

pub fn chamber_signature(
    lat: &QuadLattice,
    x: &SymbolicVector,
    walls: &[Wall],
    budget: u32,
) -> Result<ChamberSignature> {
    let mut signs = Vec::with_capacity(walls.len());
    for w in walls {
        let s = bbf_pair(lat, x, &w.vector())?.sign(budget)?;
        if s == Sign::Zero {
            return Err(Error::OnWall { wall: w.x.clone() });
        }
        signs.push(s);
    }
    Ok(ChamberSignature { walls: walls.to_vec(), signs })
}

/// Local nef test: orient each wall towards `h_ref` and require
/// `q(u, w) >= 0`. A vanishing pairing is reported as a violation.
pub fn is_nef_local(
    lat: &QuadLattice,
    u: &SymbolicVector,
    h_ref: &SymbolicVector,
    walls: &[Wall],
    budget: u32,
) -> Result<NefVerdict> {
    let mut not_nef = None;
    for w in walls {
        let oriented = match bbf_pair(lat, h_ref, &w.vector())?.sign(budget)? {
            Sign::Positive => w.clone(),
            Sign::Negative => w.negated(),
            Sign::Zero => return Err(Error::OnWall { wall: w.x.clone() }),
        };
        match bbf_pair(lat, u, &oriented.vector())?.sign(budget)? {
            Sign::Zero => return Ok(NefVerdict::OnWallViolation(oriented)),
            Sign::Negative if not_nef.is_none() => not_nef = Some(oriented),
            _ => {}
        }
    }
    Ok(not_nef.map_or(NefVerdict::Nef, NefVerdict::NotNef))
}

/// Primitive vectors of `span_Q(n) ∩ Z^d` with square in `[-M, 0)`, for a
/// negative definite rational subspace.
pub fn mbm_in_negative_sublattice(lat: &QuadLattice, n: &[Vec<Q>], m: u64) -> Result<Vec<Wall>> {
    let d = lat.rank();
    if n.iter().any(|r| r.len() != d) {
        return Err(Error::input("sublattice basis vectors have the wrong length"));
    }
    if n.is_empty() {
        return Ok(Vec::new());
    }
    if linalg::rank(n, d) != n.len() {
        return Err(Error::input("sublattice basis is linearly dependent"));
    }
    let basis = enumerate::saturate(n, d);
    let neg: Mat<Q> = lat.gram_q().iter().map(|r| r.iter().map(|x| -x).collect()).collect();
    if linalg::inertia(&enumerate::gram_in_basis(&basis, &neg)) != (basis.len(), 0, 0) {
        return Err(Error::input("sublattice is not negative definite"));
    }
    let basis = enumerate::reduce_basis(&basis, &neg);
    let pb = enumerate::gram_in_basis(&basis, &neg);
    let mut out = BTreeSet::new();
    for a in enumerate::short_vectors(&pb, &Q::from_integer(m.into()))? {
        let mut x = enumerate::combine(&a, &basis);
        if enumerate::is_primitive(&x) {
            enumerate::sign_normalize(&mut x);
            out.insert(Wall { x });
        }
    }
    Ok(out.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyperbolic() -> QuadLattice {
        QuadLattice::new(vec![vec![0, 1], vec![1, 0]]).unwrap()
    }

    fn slice(g: Vec<Vec<i64>>, m: u64) -> HyperbolicSlice {
        HyperbolicSlice::new(QuadLattice::new(g).unwrap(), m, None).unwrap()
    }

    #[test]
    fn hyperbolic_plane_walls() {
        let s = slice(vec![vec![0, 1], vec![1, 0]], 2);
        let set = enumerate_local_walls(&s, &SymbolicVector::from_ints(&[2, 1]), 64).unwrap();
        assert_eq!(set.walls, vec![Wall { x: vec![1, -1] }]);
        let s1 = slice(vec![vec![0, 1], vec![1, 0]], 1);
        assert!(enumerate_local_walls(&s1, &SymbolicVector::from_ints(&[2, 1]), 64).unwrap().walls.is_empty());
        assert!(HyperbolicSlice::new(hyperbolic(), 0, None).is_err());
    }

    #[test]
    fn signatures_and_nef() {
        let lat = hyperbolic();
        let walls = vec![Wall { x: vec![1, -1] }];
        let sig = |v: &[i64]| chamber_signature(&lat, &SymbolicVector::from_ints(v), &walls, 64);
        assert_eq!(sig(&[2, 1]).unwrap().signs, vec![Sign::Negative]);
        assert_eq!(sig(&[1, 2]).unwrap().signs, vec![Sign::Positive]);
        assert!(matches!(sig(&[1, 1]), Err(Error::OnWall { .. })));
        let href = SymbolicVector::from_ints(&[2, 1]);
        let nef = |v: &[i64]| is_nef_local(&lat, &SymbolicVector::from_ints(v), &href, &walls, 64).unwrap();
        assert_eq!(nef(&[1, 0]), NefVerdict::Nef);
        assert_eq!(nef(&[0, 1]), NefVerdict::NotNef(Wall { x: vec![-1, 1] }));
        assert_eq!(nef(&[2, 1]), NefVerdict::Nef);
    }

    #[test]
    fn negative_sublattices() {
        let one = |n: i64| QuadLattice::new(vec![vec![n]]).unwrap();
        assert_eq!(mbm_in_negative_sublattice(&one(-2), &[vec![q(1)]], 2).unwrap(), vec![Wall { x: vec![1] }]);
        assert!(mbm_in_negative_sublattice(&one(-4), &[vec![q(1)]], 2).unwrap().is_empty());
        let two = QuadLattice::new(vec![vec![-2, 0], vec![0, -2]]).unwrap();
        let basis = vec![vec![q(1), q(0)], vec![q(0), q(1)]];
        assert_eq!(
            mbm_in_negative_sublattice(&two, &basis, 2).unwrap(),
            vec![Wall { x: vec![0, 1] }, Wall { x: vec![1, 0] }]
        );
        assert!(mbm_in_negative_sublattice(&hyperbolic(), &basis, 2).is_err());
    }
}
