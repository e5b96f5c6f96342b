#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use num_traits::Zero;
use parabolic::arith::{q, Q};
use parabolic::lattice::{validate_gram, validate_lattice, CheckStatus};
use parabolic::presets::{load_preset, PresetKey};
use parabolic::symbols::SymbolBasis;
use parabolic::vector::{rational_annihilator, PairingForm};
use parabolic::{bbf_pair, rational_kernel, sign_of, torus_leaf_dense, Error, QuadLattice, Sign, SymbolicVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn u() -> QuadLattice {
    QuadLattice::new(u_block()).unwrap()
}

/// `U + U` with coordinates `(e1, f1, e2, f2)`.
fn u2() -> QuadLattice {
    QuadLattice::new(dsum(&[u_block(), u_block()])).unwrap()
}

fn sym(radicands: &[u64], cols: &[&[i64]]) -> SymbolicVector {
    let b = SymbolBasis::with_sqrts(radicands).unwrap();
    SymbolicVector::from_columns(b, cols.iter().map(|c| qv(c)).collect()).unwrap()
}

#[test]
fn pairing_examples() {
    let x = SymbolicVector::from_ints(&[1, 0]);
    let y = SymbolicVector::from_ints(&[0, 1]);
    assert_eq!(bbf_pair(&u(), &x, &y).unwrap().as_rational(), Some(q(1)));
    assert!(bbf_pair(&u(), &x, &x).unwrap().is_zero());
    let e = sym(&[2], &[&[1, 0, 0, 0], &[0, 0, 1, 0]]);
    let n = bbf_pair(&u2(), &e, &e).unwrap();
    assert!(n.is_zero());
    assert_eq!(sign_of(&n, 0).unwrap(), Sign::Zero);
}

#[test]
fn pairing_is_bilinear_and_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let lat = QuadLattice::new(dsum(&[u_block(), vec![vec![-2, 1], vec![1, -4]], vec![vec![6]]])).unwrap();
    let b = SymbolBasis::with_sqrts(&[2, 3]).unwrap();
    let rand_vec = |rng: &mut ChaCha8Rng| {
        let cols = (0..3).map(|_| (0..5).map(|_| q(rng.gen_range(-5..=5))).collect()).collect();
        SymbolicVector::from_columns(b.clone(), cols).unwrap()
    };
    for _ in 0..50 {
        let (x, y, z) = (rand_vec(&mut rng), rand_vec(&mut rng), rand_vec(&mut rng));
        let a = Q::new(rng.gen_range(-9..=9).into(), rng.gen_range(1..=9).into());
        let c = Q::new(rng.gen_range(-9..=9).into(), rng.gen_range(1..=9).into());
        let lhs = bbf_pair(&lat, &x.scale(&a).add(&y.scale(&c)).unwrap(), &z).unwrap();
        let rhs = bbf_pair(&lat, &x, &z).unwrap().scale(&a).add(&bbf_pair(&lat, &y, &z).unwrap().scale(&c)).unwrap();
        assert!(lhs.sub(&rhs).unwrap().is_zero());
        assert!(bbf_pair(&lat, &x, &y).unwrap().sub(&bbf_pair(&lat, &y, &x).unwrap()).unwrap().is_zero());
    }
}

#[test]
fn signature_examples() {
    assert_eq!(u().signature().unwrap(), (1, 1));
    let a = QuadLattice::new(vec![vec![-2, 0], vec![0, -2]]).unwrap();
    assert_eq!(a.signature().unwrap(), (0, 2));
    assert_eq!(load_preset(PresetKey::K3).unwrap().signature().unwrap(), (3, 19));
}

#[test]
fn signature_matches_float_eigenvalues() {
    // Oracle: Jacobi eigenvalues of the Gram matrix in f64.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..40 {
        let d = rng.gen_range(2..=6);
        let mut g = vec![vec![0i64; d]; d];
        for i in 0..d {
            for j in i..d {
                let x = rng.gen_range(-4..=4);
                g[i][j] = x;
                g[j][i] = x;
            }
        }
        let Ok(lat) = QuadLattice::new(g.clone()) else { continue };
        let eig = jacobi_eigenvalues(&g);
        if eig.iter().any(|e| e.abs() < 1e-9) {
            continue;
        }
        let p = eig.iter().filter(|e| **e > 0.0).count();
        assert_eq!(lat.signature().unwrap(), (p, d - p), "{g:?}");
    }
}

fn jacobi_eigenvalues(g: &[Vec<i64>]) -> Vec<f64> {
    let n = g.len();
    let mut a: Vec<Vec<f64>> = g.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    for _ in 0..200 {
        let mut off = 0.0;
        for p in 0..n {
            for r in p + 1..n {
                off += a[p][r] * a[p][r];
                if a[p][r].abs() < 1e-15 {
                    continue;
                }
                let theta = (a[r][r] - a[p][p]) / (2.0 * a[p][r]);
                let t = theta.signum().max(0.0).mul_add(2.0, -1.0) / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akr) = (a[k][p], a[k][r]);
                    a[k][p] = c * akp - s * akr;
                    a[k][r] = s * akp + c * akr;
                }
                for k in 0..n {
                    let (apk, ark) = (a[p][k], a[r][k]);
                    a[p][k] = c * apk - s * ark;
                    a[r][k] = s * apk + c * ark;
                }
            }
        }
        if off < 1e-24 {
            break;
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

#[test]
fn fujiki_examples() {
    let mut lat = QuadLattice::new(vec![vec![2]]).unwrap();
    let a = SymbolicVector::from_ints(&[1]);
    assert!(matches!(lat.fujiki_rhs(&a), Err(Error::Config(_))));
    lat.fujiki_constant = Some(q(1));
    lat.n = Some(1);
    assert_eq!(lat.fujiki_rhs(&a).unwrap().as_rational(), Some(q(2)));
    lat.fujiki_constant = Some(q(3));
    lat.n = Some(2);
    assert_eq!(lat.fujiki_rhs(&a).unwrap().as_rational(), Some(q(3 * 2 * 2)));
    let mut hyp = u();
    hyp.fujiki_constant = Some(q(5));
    hyp.n = Some(3);
    assert!(hyp.fujiki_rhs(&SymbolicVector::from_ints(&[1, 0])).unwrap().is_zero());
}

#[test]
fn rational_kernel_examples() {
    let r = rational_kernel(&u2(), &SymbolicVector::from_ints(&[1, 2, 0, 3])).unwrap();
    assert_eq!(r.len(), 3);
    let k = rational_kernel(&u2(), &sym(&[2], &[&[1, 0, 0, 0], &[0, 0, 1, 0]])).unwrap();
    assert_eq!(k, vec![qv(&[1, 0, 0, 0]), qv(&[0, 0, 1, 0])]);
    let s = sym(&[2, 3, 5], &[&[0, 1, 0, 0], &[0, 0, 0, 1], &[1, 0, 0, 0], &[0, 0, 1, 0]]);
    assert!(rational_kernel(&u2(), &s).unwrap().is_empty());
    assert!(matches!(rational_kernel(&u2(), &SymbolicVector::from_ints(&[0, 0, 0, 0])), Err(Error::Input(_))));
}

#[test]
fn rational_kernel_is_sound_and_maximal() {
    // Oracle: every small integer vector orthogonal to u lies in the span.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let d = rng.gen_range(2..=4);
        let k = rng.gen_range(1..=3);
        let g: Vec<Vec<i64>> =
            (0..d).map(|i| (0..d).map(|j| if i == j { [2, -2, 4, -6][i % 4] } else { 0 }).collect()).collect();
        let lat = QuadLattice::new(g).unwrap();
        let radicands = [2u64, 3, 5];
        let cols: Vec<Vec<i64>> = (0..k).map(|_| (0..d).map(|_| rng.gen_range(-1..=1)).collect()).collect();
        let refs: Vec<&[i64]> = cols.iter().map(Vec::as_slice).collect();
        let u = sym(&radicands[..k - 1], &refs);
        if u.is_zero() {
            continue;
        }
        let basis = rational_kernel(&lat, &u).unwrap();
        for b in &basis {
            assert!(bbf_pair(&lat, &SymbolicVector::rational(b.clone()), &u).unwrap().is_zero());
        }
        let gq = lat.gram_q();
        let mut x = vec![-2i64; d];
        loop {
            let xq = qv(&x);
            let orth = cols.iter().all(|c| pair(gq, &xq, &qv(c)).is_zero());
            if orth {
                assert!(in_span(&basis, &xq), "{x:?} orthogonal but not in kernel span");
            }
            let mut i = 0;
            while i < d && x[i] == 2 {
                x[i] = -2;
                i += 1;
            }
            if i == d {
                break;
            }
            x[i] += 1;
        }
    }
}

fn in_span(basis: &[Vec<Q>], v: &[Q]) -> bool {
    let mut rows: Vec<Vec<Q>> = basis.to_vec();
    let r0 = rank(rows.clone());
    rows.push(v.to_vec());
    rank(rows) == r0
}

fn rank(mut m: Vec<Vec<Q>>) -> usize {
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = &m[i][c] / &m[r][c];
                let row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&row) {
                    *x -= &f * y;
                }
            }
        }
        r += 1;
    }
    r
}

#[test]
fn annihilator_examples() {
    let e1 = SymbolicVector::from_ints(&[1, 0, 0, 0]);
    let f1 = SymbolicVector::from_ints(&[0, 1, 0, 0]);
    let a = rational_annihilator(&[e1, f1], PairingForm::Bbf(&u2())).unwrap();
    assert_eq!(a, vec![qv(&[0, 0, 1, 0]), qv(&[0, 0, 0, 1])]);
    let w1 = sym(&[2, 3], &[&[1, 0, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 0]]);
    let w2 = sym(&[2, 3], &[&[0, 1, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 1]]);
    assert!(rational_annihilator(&[w1, w2], PairingForm::Standard).unwrap().is_empty());
}

#[test]
fn torus_leaf_examples() {
    assert!(torus_leaf_dense(&[sym(&[2], &[&[1, 0], &[0, 1]])]).unwrap());
    assert!(!torus_leaf_dense(&[SymbolicVector::from_ints(&[1, 1])]).unwrap());
    let f1 = sym(&[2, 3], &[&[1, 0, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 0]]);
    let f2 = sym(&[2, 3], &[&[0, 1, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 1]]);
    assert!(torus_leaf_dense(&[f1, f2]).unwrap());
    assert!(matches!(torus_leaf_dense(&[]), Err(Error::Input(_))));
}

#[test]
fn sign_examples() {
    let b = SymbolBasis::new(vec![
        ("1".into(), None),
        ("sqrt(2)".into(), Some((Q::new(1414.into(), 1000.into()), Q::new(1415.into(), 1000.into())))),
    ])
    .unwrap();
    let s = SymbolicVector::from_columns(std::sync::Arc::new(b), vec![qv(&[-1]), qv(&[1])]).unwrap();
    assert_eq!(sign_of(&s.coordinate(0), 64).unwrap(), Sign::Positive);
    let z = SymbolicVector::from_ints(&[0]);
    assert_eq!(sign_of(&z.coordinate(0), 0).unwrap(), Sign::Zero);
}

#[test]
fn sign_is_stable_under_more_precision() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let b = SymbolBasis::with_sqrts(&[2, 3, 5]).unwrap();
    for _ in 0..200 {
        let cols = (0..4).map(|_| vec![q(rng.gen_range(-20..=20))]).collect();
        let s = SymbolicVector::from_columns(b.clone(), cols).unwrap().coordinate(0);
        if let Ok(lo) = sign_of(&s, 2) {
            assert_eq!(sign_of(&s, 64).unwrap(), lo);
        }
        let approx = s.approx();
        match sign_of(&s, 64).unwrap() {
            Sign::Positive => assert!(approx > 0.0),
            Sign::Negative => assert!(approx < 0.0),
            Sign::Zero => assert!(s.is_zero()),
        }
    }
}

#[test]
fn presets_match_golden_determinants() {
    let golden = [
        (PresetKey::K3, -1),
        (PresetKey::K3n(2), 2),
        (PresetKey::Kumn(2), 6),
        (PresetKey::OG6, -4),
        (PresetKey::OG10, -3),
    ];
    for (key, det) in golden {
        let lat = load_preset(key).unwrap();
        assert_eq!(lat.determinant(), det.into(), "{key}");
        let d = key.expected_b2();
        assert_eq!(lat.rank(), d);
        assert_eq!(lat.signature().unwrap(), (3, d - 3));
        assert_eq!(validate_lattice(&lat).failures(), 0, "{key}");
    }
    assert_eq!(load_preset(PresetKey::K3n(5)).unwrap().determinant(), 8.into());
    assert!(load_preset(PresetKey::Kumn(1)).is_err());
}

#[test]
fn validation_examples() {
    let r = validate_gram(&[vec![1, 0], vec![0, -1]], true);
    assert!(r.checks.iter().any(|c| c.name == "signature" && c.status == CheckStatus::Fail));
    let r = validate_gram(&[vec![0, 1], vec![1, 1]], false);
    assert!(r.checks.iter().any(|c| c.name == "even" && c.status == CheckStatus::Warn));
    assert!(r.passed());
}
