//! Dense univariate polynomials over Z and Q (coefficients low to high),
//! with Sturm root isolation and arithmetic in `Q[x]/(F)`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{q, Q};
use crate::symbols::Interval;

pub type ZPoly = Vec<BigInt>;
pub type QPoly = Vec<Q>;

pub fn trim<T: Zero>(mut p: Vec<T>) -> Vec<T> {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

pub fn degree<T>(p: &[T]) -> usize {
    p.len().saturating_sub(1)
}

pub fn to_q(p: &[BigInt]) -> QPoly {
    p.iter().map(|c| Q::from_integer(c.clone())).collect()
}

/// Characteristic polynomial `det(x I - A)` by Faddeev–LeVerrier. The
/// divisions by `k` are exact over Z.
pub fn charpoly(a: &[Vec<i64>]) -> ZPoly {
    let n = a.len();
    let am: Vec<Vec<BigInt>> = a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut c = vec![BigInt::zero(); n + 1];
    c[n] = BigInt::one();
    let mut m = vec![vec![BigInt::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = BigInt::zero();
                for l in 0..n {
                    if !am[i][l].is_zero() && !m[l][j].is_zero() {
                        s += &am[i][l] * &m[l][j];
                    }
                }
                next[i][j] = s;
            }
            next[i][i] += &c[n - k + 1];
        }
        m = next;
        let mut tr = BigInt::zero();
        for i in 0..n {
            for l in 0..n {
                if !am[i][l].is_zero() && !m[l][i].is_zero() {
                    tr += &am[i][l] * &m[l][i];
                }
            }
        }
        c[n - k] = -tr / BigInt::from(k);
    }
    c
}

pub fn eval(p: &[Q], x: &Q) -> Q {
    p.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
}

fn imul(a: &Interval, b: &Interval) -> Interval {
    crate::symbols::interval_mul(a, b)
}

/// Interval Horner evaluation.
pub fn eval_interval(p: &[Q], x: &Interval) -> Interval {
    let mut acc = (Q::zero(), Q::zero());
    for c in p.iter().rev() {
        acc = imul(&acc, x);
        acc = (&acc.0 + c, &acc.1 + c);
    }
    acc
}

pub fn derivative(p: &[Q]) -> QPoly {
    p.iter().enumerate().skip(1).map(|(i, c)| c * q(i as i64)).collect()
}

pub fn mul(a: &[Q], b: &[Q]) -> QPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

pub fn sub(a: &[Q], b: &[Q]) -> QPoly {
    let n = a.len().max(b.len());
    trim((0..n).map(|i| a.get(i).cloned().unwrap_or_default() - b.get(i).cloned().unwrap_or_default()).collect())
}

/// Quotient and remainder over Q.
pub fn divrem(a: &[Q], b: &[Q]) -> (QPoly, QPoly) {
    let b = trim(b.to_vec());
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut r = trim(a.to_vec());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let lead = b.last().unwrap().clone();
    let mut quo = vec![Q::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let f = r.last().unwrap() / &lead;
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= &f * c;
        }
        quo[shift] = f;
        r.pop();
        r = trim(r);
    }
    (trim(quo), r)
}

pub fn monic(p: &[Q]) -> QPoly {
    let p = trim(p.to_vec());
    match p.last() {
        Some(l) => {
            let l = l.clone();
            p.iter().map(|c| c / &l).collect()
        }
        None => p,
    }
}

pub fn gcd(a: &[Q], b: &[Q]) -> QPoly {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let (_, r) = divrem(&a, &b);
        a = b;
        b = r;
    }
    monic(&a)
}

pub fn squarefree(p: &[Q]) -> QPoly {
    let g = gcd(p, &derivative(p));
    monic(&divrem(p, &g).0)
}

pub fn euler_phi(mut n: u64) -> u64 {
    let mut out = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if n > 1 {
        out -= out / n;
    }
    out
}

/// The `m`-th cyclotomic polynomial.
pub fn cyclotomic(m: u64) -> QPoly {
    cyclotomic_table(&[m]).remove(&m).expect("requested order")
}

/// Cyclotomic polynomials for the given orders, built bottom-up from
/// `x^m - 1 = prod_{k | m} Phi_k`.
fn cyclotomic_table(orders: &[u64]) -> BTreeMap<u64, QPoly> {
    let mut need = BTreeSet::new();
    for &m in orders {
        need.extend((1..=m).filter(|k| m % k == 0));
    }
    let mut table: BTreeMap<u64, QPoly> = BTreeMap::new();
    for &m in &need {
        let mut p = vec![Q::zero(); m as usize + 1];
        p[0] = q(-1);
        p[m as usize] = q(1);
        for (&k, c) in &table {
            if k < m && m % k == 0 {
                p = divrem(&p, c).0;
            }
        }
        table.insert(m, p);
    }
    table
}

/// Orders `m` with `phi(m) <= d`, ascending.
pub fn cyclotomic_orders(d: usize) -> Vec<u64> {
    // phi(m) >= sqrt(m / 2), so m <= 2 d^2 covers every candidate.
    (1..=(2 * d * d).max(2) as u64).filter(|&m| euler_phi(m) as usize <= d).collect()
}

/// Divides out every cyclotomic factor; returns the orders found (with
/// multiplicity) and the cofactor.
pub fn strip_cyclotomic(p: &[Q]) -> (Vec<u64>, QPoly) {
    let mut rest = monic(p);
    let mut found = Vec::new();
    let orders = cyclotomic_orders(degree(&rest));
    let table = cyclotomic_table(&orders);
    for m in orders {
        let c = &table[&m];
        loop {
            if degree(&rest) < degree(c) {
                break;
            }
            let (quo, r) = divrem(&rest, c);
            if !r.is_empty() {
                break;
            }
            found.push(m);
            rest = quo;
        }
    }
    (found, rest)
}

pub fn lcm_all(v: &[u64]) -> u64 {
    v.iter().fold(1u64, |a, &b| a.lcm(&b))
}

/// Sturm sequence of a squarefree polynomial.
pub fn sturm(p: &[Q]) -> Vec<QPoly> {
    let mut seq = vec![trim(p.to_vec()), derivative(p)];
    loop {
        let n = seq.len();
        if seq[n - 1].is_empty() {
            seq.pop();
            return seq;
        }
        let (_, r) = divrem(&seq[n - 2], &seq[n - 1]);
        seq.push(r.into_iter().map(|c| -c).collect());
    }
}

fn sign_changes(seq: &[QPoly], x: &Q) -> usize {
    let mut last = 0;
    let mut n = 0;
    for p in seq {
        let v = eval(p, x);
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                n += 1;
            }
            last = s;
        }
    }
    n
}

/// Number of distinct real roots in `(a, b]`.
pub fn count_roots(seq: &[QPoly], a: &Q, b: &Q) -> usize {
    sign_changes(seq, a) - sign_changes(seq, b)
}

/// Cauchy bound: every root has modulus below the returned value.
pub fn root_bound(p: &[Q]) -> Q {
    let p = monic(p);
    let m = p[..p.len() - 1].iter().map(|c| c.abs()).max().unwrap_or_default();
    m + q(1)
}

/// Isolating interval `(lo, hi]` of the largest real root above `floor`,
/// refined until its width is below `2^-bits`.
pub fn largest_root_above(p: &[Q], floor: &Q, bits: u32) -> Option<Interval> {
    let sf = squarefree(p);
    if degree(&sf) == 0 {
        return None;
    }
    let seq = sturm(&sf);
    let top = root_bound(&sf);
    if count_roots(&seq, floor, &top) == 0 {
        return None;
    }
    let (mut lo, mut hi) = (floor.clone(), top);
    let eps = Q::new(BigInt::one(), BigInt::one() << bits as usize);
    while count_roots(&seq, &lo, &hi) > 1 || &hi - &lo > eps {
        let mid = (&lo + &hi) / q(2);
        if count_roots(&seq, &mid, &hi) >= 1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo, hi))
}

/// Arithmetic in `Q[x]/(F)` for a monic `F`.
#[derive(Clone, Debug)]
pub struct QuotientRing {
    pub modulus: QPoly,
}

impl QuotientRing {
    pub fn new(modulus: QPoly) -> Self {
        QuotientRing { modulus: monic(&modulus) }
    }

    pub fn reduce(&self, a: &[Q]) -> QPoly {
        divrem(a, &self.modulus).1
    }

    pub fn mul(&self, a: &[Q], b: &[Q]) -> QPoly {
        self.reduce(&mul(a, b))
    }

    pub fn x(&self) -> QPoly {
        self.reduce(&[q(0), q(1)])
    }
}

pub fn add(a: &[Q], b: &[Q]) -> QPoly {
    let n = a.len().max(b.len());
    trim((0..n).map(|i| a.get(i).cloned().unwrap_or_default() + b.get(i).cloned().unwrap_or_default()).collect())
}

pub fn scale(a: &[Q], c: &Q) -> QPoly {
    trim(a.iter().map(|x| x * c).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charpoly_of_a_companion_matrix() {
        // x^2 - 3x + 1
        let p = charpoly(&[vec![0, -1], vec![1, 3]]);
        assert_eq!(p, vec![BigInt::from(1), BigInt::from(-3), BigInt::from(1)]);
    }

    #[test]
    fn cyclotomic_values() {
        assert_eq!(cyclotomic(1), vec![q(-1), q(1)]);
        assert_eq!(cyclotomic(6), vec![q(1), q(-1), q(1)]);
        assert_eq!(degree(&cyclotomic(12)), 4);
        assert_eq!(euler_phi(12), 4);
    }

    #[test]
    fn strips_cyclotomic_factors() {
        // (x - 1)^2 (x^2 - 7x + 1)
        let p = mul(&mul(&cyclotomic(1), &cyclotomic(1)), &[q(1), q(-7), q(1)]);
        let (found, rest) = strip_cyclotomic(&p);
        assert_eq!(found, vec![1, 1]);
        assert_eq!(rest, vec![q(1), q(-7), q(1)]);
    }

    #[test]
    fn isolates_the_golden_ratio() {
        let (lo, hi) = largest_root_above(&[q(-1), q(-1), q(1)], &q(1), 40).unwrap();
        assert!(lo < hi);
        assert!(eval(&[q(-1), q(-1), q(1)], &lo).is_negative());
        assert!(!eval(&[q(-1), q(-1), q(1)], &hi).is_negative());
        assert!(largest_root_above(&[q(1), q(1)], &q(1), 10).is_none());
    }
}
