//! Exact short-vector enumeration (Fincke–Pohst) for positive definite
//! rational Gram matrices, and saturated sublattices of `Z^d`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{ceil_q, floor_q, sqrt_upper, Q};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

/// Decomposition `x^T P x = Σ_i D_i (x_i + Σ_{k<i} mu[k][i] x_k)^2`.
pub fn ldl(p: &[Vec<Q>]) -> Option<(Vec<Q>, Mat<Q>)> {
    let n = p.len();
    let mut a = p.to_vec();
    let mut dvec = vec![Q::zero(); n];
    let mut mu = vec![vec![Q::zero(); n]; n];
    // Eliminating from the last coordinate backwards leaves the square for
    // x_0 alone, so the enumeration fixes x_0 first.
    for i in (0..n).rev() {
        let piv = a[i][i].clone();
        if !piv.is_positive() {
            return None;
        }
        for k in 0..i {
            mu[k][i] = &a[k][i] / &piv;
        }
        for r in 0..i {
            for c in 0..i {
                let v = &a[r][i] * &a[i][c] / &piv;
                a[r][c] -= v;
            }
        }
        dvec[i] = piv;
    }
    Some((dvec, mu))
}

/// All nonzero integer vectors `x` with `x^T P x <= bound`, in a fixed
/// deterministic order. `P` must be positive definite. Loop ranges use
/// rational upper bounds of square roots; membership is decided exactly.
pub fn short_vectors(p: &[Vec<Q>], bound: &Q) -> Result<Vec<Vec<i64>>> {
    let n = p.len();
    let (dv, mu) = ldl(p).ok_or_else(|| Error::input("enumeration form is not positive definite"))?;
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    if n == 0 {
        return Ok(out);
    }
    recurse(0, bound.clone(), &dv, &mu, &mut x, &mut out, p, bound)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    i: usize,
    remaining: Q,
    dv: &[Q],
    mu: &Mat<Q>,
    x: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
    p: &[Vec<Q>],
    bound: &Q,
) -> Result<()> {
    let n = x.len();
    let mut c = Q::zero();
    for k in 0..i {
        if x[k] != 0 {
            c -= &mu[k][i] * Q::from_integer(x[k].into());
        }
    }
    let r = sqrt_upper(&(&remaining / &dv[i]));
    let lo = ceil_q(&(&c - &r));
    let hi = floor_q(&(&c + &r));
    let (lo, hi) = match (lo.to_i64(), hi.to_i64()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Budget("enumeration range overflow".into())),
    };
    if hi.saturating_sub(lo) > 10_000_000 {
        return Err(Error::Budget("enumeration range too large".into()));
    }
    for v in lo..=hi {
        x[i] = v;
        let t = Q::from_integer(v.into()) - &c;
        let used = &dv[i] * &t * &t;
        if used > remaining {
            continue;
        }
        let rest = &remaining - used;
        if i + 1 == n {
            if x.iter().any(|&c| c != 0) {
                let xq: Vec<Q> = x.iter().map(|&c| Q::from_integer(c.into())).collect();
                if &linalg::form(p, &xq, &xq) <= bound {
                    out.push(x.clone());
                }
            }
        } else {
            recurse(i + 1, rest, dv, mu, x, out, p, bound)?;
        }
    }
    x[i] = 0;
    Ok(())
}

/// Z-basis of `span_Q(rows) ∩ Z^d` (rows are rational and independent).
pub fn saturate(rows: &[Vec<Q>], d: usize) -> Vec<Vec<i64>> {
    // Integral functionals cutting out the span.
    let comp = linalg::kernel(rows, d);
    if comp.is_empty() {
        return (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect();
    }
    let a: Vec<Vec<BigInt>> = comp.iter().map(|r| linalg::primitive_integer(r)).collect();
    linalg::integer_kernel(&a, d)
        .into_iter()
        .map(|v| v.iter().map(|x| x.to_i64().expect("small basis vector")).collect())
        .collect()
}

/// LLL-improved version of an integer basis under a positive form `p`.
pub fn reduce_basis(basis: &[Vec<i64>], p: &[Vec<Q>]) -> Vec<Vec<i64>> {
    let bq: Mat<Q> = basis.iter().map(|r| r.iter().map(|&x| Q::from_integer(x.into())).collect()).collect();
    let gram = linalg::mat_mul(&linalg::mat_mul(&bq, p), &linalg::transpose(&bq));
    let t = linalg::lll_gram(&gram);
    t.iter()
        .map(|row| {
            let mut v = vec![BigInt::zero(); basis[0].len()];
            for (c, b) in row.iter().zip(basis) {
                if c.is_zero() {
                    continue;
                }
                for (x, &y) in v.iter_mut().zip(b) {
                    *x += c * y;
                }
            }
            v.iter().map(|x| x.to_i64().expect("reduced basis fits")).collect()
        })
        .collect()
}

/// `Σ a_k b_k`.
pub fn combine(a: &[i64], basis: &[Vec<i64>]) -> Vec<i64> {
    let d = basis.first().map_or(0, Vec::len);
    let mut v = vec![0i64; d];
    for (&c, b) in a.iter().zip(basis) {
        if c == 0 {
            continue;
        }
        for (x, &y) in v.iter_mut().zip(b) {
            *x += c * y;
        }
    }
    v
}

pub fn is_primitive(v: &[i64]) -> bool {
    v.iter().fold(0i64, |g, &x| g.gcd(&x)).is_one()
}

/// Negates `v` if needed so its first nonzero entry is positive.
pub fn sign_normalize(v: &mut [i64]) {
    if let Some(&f) = v.iter().find(|&&x| x != 0) {
        if f < 0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

pub fn gram_in_basis(basis: &[Vec<i64>], g: &[Vec<Q>]) -> Mat<Q> {
    let bq: Mat<Q> = basis.iter().map(|r| r.iter().map(|&x| Q::from_integer(x.into())).collect()).collect();
    linalg::mat_mul(&linalg::mat_mul(&bq, g), &linalg::transpose(&bq))
}
