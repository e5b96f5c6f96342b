//! Test-side Lie algebra oracles over Q.

use num_traits::Zero;
use parabolic::arith::{q, Q};

use super::unit;
use parabolic::wedge::{biv_to_endo, num_pairs, pairs, Bivector};
use parabolic::QuadLattice;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type M = Vec<Vec<Q>>;

pub fn mul(a: &M, b: &M) -> M {
    let n = b[0].len();
    a.iter().map(|r| (0..n).map(|j| r.iter().zip(b).map(|(x, row)| x * &row[j]).sum()).collect()).collect()
}

pub fn sub(a: &M, b: &M) -> M {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect()).collect()
}

pub fn transpose(a: &M) -> M {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn is_zero_mat(a: &M) -> bool {
    a.iter().flatten().all(Zero::is_zero)
}

/// Endomorphism of a rational bivector straight from the defining formula
/// `e_i ∧ e_j : x ↦ q(x, e_j) e_i − q(x, e_i) e_j`.
pub fn endo_oracle(g: &M, b: &[Q]) -> M {
    let d = g.len();
    let mut m = vec![vec![Q::zero(); d]; d];
    for (k, (i, j)) in pairs(d).into_iter().enumerate() {
        if b[k].is_zero() {
            continue;
        }
        for x in 0..d {
            m[i][x] += &b[k] * &g[x][j];
            m[j][x] -= &b[k] * &g[x][i];
        }
    }
    m
}

pub fn endo_q(lat: &QuadLattice, b: &Bivector) -> M {
    biv_to_endo(lat, b).unwrap().iter().map(|r| r.iter().map(|x| x.as_rational().unwrap()).collect()).collect()
}

pub fn rand_q(rng: &mut ChaCha8Rng) -> Q {
    Q::new(rng.gen_range(-6..=6).into(), rng.gen_range(1..=4).into())
}

pub fn random_biv(rng: &mut ChaCha8Rng, d: usize) -> Bivector {
    Bivector::rational((0..num_pairs(d)).map(|_| if rng.gen_bool(0.6) { rand_q(rng) } else { Q::zero() }).collect(), d)
}

pub fn random_gram(rng: &mut ChaCha8Rng, d: usize) -> QuadLattice {
    loop {
        let mut g = vec![vec![0i64; d]; d];
        for i in 0..d {
            for j in i..d {
                let x = if i == j { 2 * rng.gen_range(-3..=3) } else { rng.gen_range(-2..=2) };
                g[i][j] = x;
                g[j][i] = x;
            }
        }
        if let Ok(l) = QuadLattice::new(g) {
            return l;
        }
    }
}

pub fn rank(m: &M) -> usize {
    let mut rows = m.clone();
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = &rows[i][c] / &rows[r][c];
                let pr = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(&pr) {
                    *x -= &f * y;
                }
            }
        }
        r += 1;
    }
    r
}

/// Random unimodular `A` as a product of elementary operations, with its
/// inverse.
pub fn unimodular(rng: &mut ChaCha8Rng, d: usize, steps: usize) -> (M, M) {
    let id: M = (0..d).map(|i| unit(i, d)).collect();
    let (mut a, mut inv) = (id.clone(), id);
    for _ in 0..steps {
        let (i, j) = (rng.gen_range(0..d), rng.gen_range(0..d));
        if i == j {
            continue;
        }
        let c = q(if rng.gen_bool(0.5) { 1 } else { -1 });
        // A <- A (I + c E_ij); inverse <- (I - c E_ij) inverse.
        for r in a.iter_mut() {
            let add = &c * &r[i];
            r[j] += add;
        }
        let row_j = inv[j].clone();
        for (x, y) in inv[i].iter_mut().zip(&row_j) {
            *x -= &c * y;
        }
    }
    (a, inv)
}

pub fn apply(m: &M, v: &[Q]) -> Vec<Q> {
    m.iter().map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}
