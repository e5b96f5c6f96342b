//! Instance builders and independent oracles shared by the integration
//! tests.
//!
//! Strongly irrational isotropic classes are built in "twisted"
//! coordinates: pick a q-orthogonal rational basis `c_0, ..., c_{k-1}` of a
//! rational subspace `W` and distinct primes `p_j` (with `p_0 = 1`), and set
//! `x = Σ x'_j sqrt(p_j) c_j`. Pairings become the rational diagonal form
//! `q'(x', y') = Σ p_j q(c_j) x'_j y'_j`, so everything can be arranged with
//! rational arithmetic while the resulting classes have irrational
//! coordinates. `c_0, c_1` come from a hyperbolic plane `(e, f)` as
//! `e + y f` and `e − y f`, with `y` chosen so `u' = (1, ..., 1)` is
//! q'-isotropic.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use parabolic::arith::{q, Q};
use parabolic::symbols::{Monomial, SymbolBasis};
use parabolic::{QuadLattice, SymbolicVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub mod hodge;
pub mod lie;

pub fn qv(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&x| q(x)).collect()
}

pub fn unit(i: usize, d: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); d];
    v[i] = Q::one();
    v
}

pub fn pair(g: &[Vec<Q>], a: &[Q], b: &[Q]) -> Q {
    let mut s = Q::zero();
    for i in 0..a.len() {
        if a[i].is_zero() {
            continue;
        }
        for j in 0..b.len() {
            if !g[i][j].is_zero() && !b[j].is_zero() {
                s += &a[i] * &g[i][j] * &b[j];
            }
        }
    }
    s
}

fn axpy(a: &Q, x: &[Q], y: &[Q]) -> Vec<Q> {
    x.iter().zip(y).map(|(xi, yi)| a * xi + yi).collect()
}

/// q-orthogonal basis of the span of `vs`, which must be nondegenerate.
pub fn orthogonal_basis(g: &[Vec<Q>], mut vs: Vec<Vec<Q>>) -> Vec<Vec<Q>> {
    let mut out = Vec::new();
    while !vs.is_empty() {
        let pivot = if let Some(i) = vs.iter().position(|v| !pair(g, v, v).is_zero()) {
            vs.remove(i)
        } else {
            // All isotropic: some pair must pair nontrivially.
            let (i, j) = (0..vs.len())
                .flat_map(|i| (i + 1..vs.len()).map(move |j| (i, j)))
                .find(|&(i, j)| !pair(g, &vs[i], &vs[j]).is_zero())
                .expect("nondegenerate span");
            let s: Vec<Q> = vs[i].iter().zip(&vs[j]).map(|(a, b)| a + b).collect();
            vs[i] = s;
            vs.remove(i)
        };
        let n = pair(g, &pivot, &pivot);
        vs = vs
            .into_iter()
            .map(|v| {
                let c = -pair(g, &v, &pivot) / &n;
                axpy(&c, &pivot, &v)
            })
            .filter(|v| v.iter().any(|x| !x.is_zero()))
            .collect();
        out.push(pivot);
    }
    out
}

pub struct Twisted {
    pub lat: QuadLattice,
    pub c: Vec<Vec<Q>>,
    pub primes: Vec<u64>,
    /// `p_j q(c_j)`.
    pub diag: Vec<Q>,
    pub basis: Arc<SymbolBasis>,
}

impl Twisted {
    /// `(e, f)` a hyperbolic pair, `rest` a basis of a nondegenerate
    /// subspace orthogonal to both; `primes[0]` must be 1.
    pub fn new(lat: QuadLattice, e: Vec<Q>, f: Vec<Q>, rest: Vec<Vec<Q>>, primes: &[u64]) -> Self {
        let g = lat.gram_q().clone();
        let k = rest.len() + 2;
        assert_eq!(primes.len(), k);
        assert_eq!(primes[0], 1);
        let rest = orthogonal_basis(&g, rest);
        assert_eq!(rest.len(), k - 2);
        let s: Q = rest.iter().zip(&primes[2..]).map(|(c, &p)| q(p as i64) * pair(&g, c, c)).sum();
        assert!(!s.is_zero(), "complement contributes nothing");
        // q(u) = 2y - 2y p_1 + s = 0.
        let y = -s / (q(2) * (q(1) - q(primes[1] as i64)));
        let c0 = axpy(&y, &f, &e);
        let c1 = axpy(&-y.clone(), &f, &e);
        let mut c = vec![c0, c1];
        c.extend(rest);
        let diag = c.iter().zip(primes).map(|(cj, &p)| q(p as i64) * pair(&g, cj, cj)).collect();
        let basis = SymbolBasis::with_sqrts(&primes[1..]).unwrap();
        Twisted { lat, c, primes: primes.to_vec(), diag, basis }
    }

    pub fn k(&self) -> usize {
        self.c.len()
    }

    pub fn qp(&self, a: &[Q], b: &[Q]) -> Q {
        a.iter().zip(b).zip(&self.diag).map(|((x, y), w)| x * y * w).sum()
    }

    pub fn to_vec(&self, xp: &[Q]) -> SymbolicVector {
        let d = self.lat.rank();
        let mut comps = BTreeMap::new();
        for (j, x) in xp.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let m = if j == 0 { Monomial::unit() } else { Monomial::sqrt(self.primes[j]).unwrap() };
            comps.insert(m, self.c[j].iter().map(|cj| cj * x).collect::<Vec<Q>>());
        }
        SymbolicVector::from_components(self.basis.clone(), d, comps).unwrap()
    }

    pub fn u_prime(&self) -> Vec<Q> {
        vec![Q::one(); self.k()]
    }

    fn random_in(&self, rng: &mut ChaCha8Rng, span: i64) -> Vec<Q> {
        (0..self.k()).map(|_| q(rng.gen_range(-span..=span))).collect()
    }

    /// Makes `x` q'-orthogonal to each of `to`, assuming each `to[i]` is
    /// either anisotropic or paired with a helper in `helpers`.
    fn project_off(&self, x: Vec<Q>, to: &[Vec<Q>]) -> Vec<Q> {
        let mut x = x;
        for t in to {
            let n = self.qp(t, t);
            let c = -self.qp(&x, t) / n;
            x = axpy(&c, t, &x);
        }
        x
    }

    /// Random q'-positive vectors orthogonal to `u'` and to `others`
    /// (which must be positive and pairwise orthogonal), with every
    /// coordinate nonzero.
    pub fn positive_in_u_perp(&self, rng: &mut ChaCha8Rng, others: &[Vec<Q>]) -> Vec<Q> {
        let u = self.u_prime();
        // A helper z with q'(z, u') != 0, orthogonal to others.
        for attempt in 0..100_000 {
            // Weight the positive directions more as attempts fail.
            let boost = q(1 + attempt / 50);
            let x: Vec<Q> = self
                .random_in(rng, 6)
                .into_iter()
                .zip(&self.diag)
                .map(|(c, w)| if w.is_positive() { c * &boost } else { c })
                .collect();
            let x = self.project_off(x, others);
            let z = self.project_off(self.random_in(rng, 3), others);
            let zu = self.qp(&z, &u);
            if zu.is_zero() {
                continue;
            }
            // x - q'(x,u')/q'(z,u') z is orthogonal to u'; others stay orthogonal.
            let x = axpy(&(-self.qp(&x, &u) / &zu), &z, &x);
            if self.qp(&x, &x).is_positive() && x.iter().all(|c| !c.is_zero()) {
                return x;
            }
        }
        panic!("no positive vector found");
    }

    /// A random instance with `ell` period vectors: `(L', h')` in twisted
    /// coordinates, `h'` positive, orthogonal to `L'` and pairing
    /// positively with `u'`.
    pub fn instance(&self, rng: &mut ChaCha8Rng, ell: usize) -> (Vec<Vec<Q>>, Vec<Q>) {
        let mut l: Vec<Vec<Q>> = Vec::new();
        for _ in 0..ell {
            let x = self.positive_in_u_perp(rng, &l);
            l.push(x);
        }
        let u = self.u_prime();
        loop {
            let z = self.project_off(self.random_in(rng, 4), &l);
            let zu = self.qp(&z, &u);
            if zu.is_zero() {
                continue;
            }
            // h = u' + t z with q'(h) = 2 t zu + t^2 q'(z) > 0 and t zu > 0.
            let mut t = if zu.is_positive() { q(1) } else { q(-1) };
            for _ in 0..64 {
                let h = axpy(&t, &z, &u);
                if self.qp(&h, &h).is_positive() {
                    return (l, h);
                }
                t /= q(2);
            }
        }
    }
}

pub const SMALL_PRIMES: [u64; 40] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
    113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173,
];

/// `1` followed by `k − 1` distinct primes chosen at random.
pub fn fresh_primes(rng: &mut ChaCha8Rng, k: usize) -> Vec<u64> {
    let mut pool: Vec<u64> = SMALL_PRIMES.to_vec();
    let mut out = vec![1];
    for _ in 1..k {
        let i = rng.gen_range(0..pool.len());
        out.push(pool.remove(i));
    }
    out
}

/// Direct sum Gram matrix.
pub fn dsum(blocks: &[Vec<Vec<i64>>]) -> Vec<Vec<i64>> {
    let n: usize = blocks.iter().map(Vec::len).sum();
    let mut g = vec![vec![0; n]; n];
    let mut o = 0;
    for b in blocks {
        for (i, r) in b.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                g[o + i][o + j] = x;
            }
        }
        o += b.len();
    }
    g
}

pub fn u_block() -> Vec<Vec<i64>> {
    vec![vec![0, 1], vec![1, 0]]
}

/// Twisted structure on the whole lattice, assuming it starts with a
/// hyperbolic plane in coordinates 0, 1 orthogonal to the rest.
pub fn twisted_full(lat: QuadLattice, primes: &[u64]) -> Twisted {
    let d = lat.rank();
    let rest = (2..d).map(|i| unit(i, d)).collect();
    Twisted::new(lat, unit(0, d), unit(1, d), rest, primes)
}

/// Gauss–Jordan inverse over Q.
pub fn inverse(m: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero()).expect("invertible");
        a.swap(c, p);
        let inv = Q::one() / &a[c][c];
        for x in a[c].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for k in 0..2 * n {
                    let t = &f * &a[c][k];
                    a[r][k] -= t;
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn ipair(g: &[Vec<i64>], a: &[i64], b: &[i64]) -> i128 {
    let mut s = 0i128;
    for i in 0..a.len() {
        for j in 0..b.len() {
            s += a[i] as i128 * g[i][j] as i128 * b[j] as i128;
        }
    }
    s
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Coordinate box containing every integral `x` whose hyperplane meets the
/// neighbourhood of an integral positive `h`: from `q(x,h)^2 < -q(x) q(h)`
/// and `q(x) >= -M` one gets `P_h(x) < 3M` for the positive definite
/// `P_h = -R_h G`, and `x_i^2 <= 3M (P_h^{-1})_ii`.
pub fn oracle_box(g: &[Vec<i64>], h: &[i64], m: i64) -> Vec<i64> {
    let d = g.len();
    let gq: Vec<Vec<Q>> = g.iter().map(|r| qv(r)).collect();
    let hq = qv(h);
    let gh: Vec<Q> = (0..d).map(|i| pair(&gq, &unit(i, d), &hq)).collect();
    let qh = pair(&gq, &hq, &hq);
    let p: Vec<Vec<Q>> = (0..d).map(|i| (0..d).map(|j| q(2) * &gh[i] * &gh[j] / &qh - &gq[i][j]).collect()).collect();
    let pinv = inverse(&p);
    (0..d)
        .map(|i| {
            let r = q(3 * m) * &pinv[i][i];
            let f = r.numer().to_string().parse::<f64>().unwrap() / r.denom().to_string().parse::<f64>().unwrap();
            f.sqrt().floor() as i64 + 1
        })
        .collect()
}

/// Every primitive sign-normalized integral `x` in `box_` with
/// `-M <= q(x) < 0` and `q(x,h)^2 < -q(x) q(h)`, optionally restricted by
/// integral linear constraints `c . x = 0`.
pub fn brute_force_walls(g: &[Vec<i64>], h: &[i64], m: i64, box_: &[i64], constraints: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let d = g.len();
    let qh = ipair(g, h, h);
    let mut out = std::collections::BTreeSet::new();
    let mut x: Vec<i64> = box_.iter().map(|b| -b).collect();
    loop {
        let qx = ipair(g, &x, &x);
        if qx < 0
            && qx >= -(m as i128)
            && x.iter().fold(0, |a, &b| gcd(a, b)) == 1
            && constraints.iter().all(|c| c.iter().zip(&x).map(|(a, b)| a * b).sum::<i64>() == 0)
        {
            let xh = ipair(g, &x, h);
            if xh * xh < -qx * qh {
                let mut w = x.clone();
                if w.iter().find(|&&c| c != 0).is_some_and(|&c| c < 0) {
                    w.iter_mut().for_each(|c| *c = -*c);
                }
                out.insert(w);
            }
        }
        let mut i = 0;
        loop {
            if i == d {
                return out.into_iter().collect();
            }
            if x[i] < box_[i] {
                x[i] += 1;
                break;
            }
            x[i] = -box_[i];
            i += 1;
        }
    }
}

/// `A^T G A` for a random product of elementary integer operations.
pub fn random_equivalent(rng: &mut ChaCha8Rng, g: &[Vec<i64>], steps: usize) -> Vec<Vec<i64>> {
    let d = g.len();
    let mut a: Vec<Vec<i64>> = (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect();
    for _ in 0..steps {
        let i = rng.gen_range(0..d);
        let j = rng.gen_range(0..d);
        if i == j {
            continue;
        }
        let c = if rng.gen_bool(0.5) { 1 } else { -1 };
        for r in a.iter_mut() {
            r[j] += c * r[i];
        }
    }
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let mut s = 0;
                    for k in 0..d {
                        for l in 0..d {
                            s += a[k][i] * g[k][l] * a[l][j];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}
