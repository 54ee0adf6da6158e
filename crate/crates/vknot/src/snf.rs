//! Smith normal form of integer matrices with arbitrary precision entries.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Diagonal of the Smith normal form: `min(rows, cols)` nonnegative entries
/// with each dividing the next (zeros last).
pub fn snf_diagonal(mut m: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let n = rows.min(cols);
    let mut k = 0;
    while k < n {
        // pivot: smallest magnitude nonzero entry of the submatrix
        let mut pivot: Option<(usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                if m[i][j].is_zero() {
                    continue;
                }
                let better = match pivot {
                    None => true,
                    Some((pi, pj)) => m[i][j].abs() < m[pi][pj].abs(),
                };
                if better {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        m.swap(k, pi);
        for row in m.iter_mut() {
            row.swap(k, pj);
        }
        loop {
            // clear column k with rounded division, swapping in smaller
            // remainders as new pivots until everything divides
            let mut dirty = false;
            for i in 0..rows {
                if i == k || m[i][k].is_zero() {
                    continue;
                }
                let q = rounded_div(&m[i][k], &m[k][k]);
                for j in 0..cols {
                    let t = &m[k][j] * &q;
                    m[i][j] -= t;
                }
                if !m[i][k].is_zero() {
                    m.swap(k, i);
                    dirty = true;
                }
            }
            for j in 0..cols {
                if j == k || m[k][j].is_zero() {
                    continue;
                }
                let q = rounded_div(&m[k][j], &m[k][k]);
                for row in m.iter_mut() {
                    let t = &row[k] * &q;
                    row[j] -= t;
                }
                if !m[k][j].is_zero() {
                    for row in m.iter_mut() {
                        row.swap(k, j);
                    }
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // pivot must divide the whole remaining block; if not, fold the
            // offending row in and keep reducing
            let mut offender = None;
            'scan: for i in k + 1..rows {
                for j in k + 1..cols {
                    if !(&m[i][j] % &m[k][k]).is_zero() {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => {
                    for j in 0..cols {
                        let t = m[i][j].clone();
                        m[k][j] += t;
                    }
                }
                None => break,
            }
        }
        if m[k][k].is_negative() {
            let v = -m[k][k].clone();
            m[k][k] = v;
        }
        k += 1;
    }
    (0..n).map(|i| m[i][i].clone()).collect()
}

fn rounded_div(a: &BigInt, b: &BigInt) -> BigInt {
    // quotient with remainder magnitude at most |b|/2
    let (mut q, r) = a.div_rem(b);
    let two_r = BigInt::from(2) * r.abs();
    if two_r > b.abs() {
        if (a.is_negative()) == (b.is_negative()) {
            q += 1;
        } else {
            q -= 1;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn big(v: &[&[i64]]) -> Vec<Vec<BigInt>> {
        v.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn ints(v: Vec<BigInt>) -> Vec<i64> {
        v.into_iter().map(|x| i64::try_from(x).unwrap()).collect()
    }

    #[test]
    fn known_forms() {
        assert_eq!(ints(snf_diagonal(big(&[&[1, 0], &[0, 1]]))), vec![1, 1]);
        assert_eq!(ints(snf_diagonal(big(&[&[2, 4], &[6, 8]]))), vec![2, 4]);
        assert_eq!(ints(snf_diagonal(big(&[&[2, 0], &[0, 3]]))), vec![1, 6]);
        assert_eq!(ints(snf_diagonal(big(&[&[0]]))), vec![0]);
        assert_eq!(ints(snf_diagonal(big(&[&[3, 1], &[-1, 2]]))), vec![1, 7]);
        assert_eq!(ints(snf_diagonal(big(&[&[6, 10], &[15, 25]]))), vec![1, 0]);
    }

    #[test]
    fn rectangular() {
        assert_eq!(ints(snf_diagonal(big(&[&[2, 4, 6]]))), vec![2]);
        assert_eq!(ints(snf_diagonal(big(&[&[2], &[4], &[6]]))), vec![2]);
        assert_eq!(ints(snf_diagonal(big(&[&[1, 2], &[3, 4], &[5, 6]]))), vec![1, 2]);
        assert_eq!(ints(snf_diagonal(Vec::new())), Vec::<i64>::new());
    }

    #[test]
    fn random_matrices_satisfy_snf_laws() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let r = rng.gen_range(1..5usize);
            let c = rng.gen_range(1..5usize);
            let m: Vec<Vec<BigInt>> = (0..r)
                .map(|_| (0..c).map(|_| BigInt::from(rng.gen_range(-9i64..=9))).collect())
                .collect();
            let d = snf_diagonal(m.clone());
            // divisibility chain, zeros trailing
            for w in d.windows(2) {
                if w[0].is_zero() {
                    assert!(w[1].is_zero());
                } else {
                    assert!((&w[1] % &w[0]).is_zero());
                }
            }
            // first factor is the gcd of all entries
            let mut g = BigInt::zero();
            for row in &m {
                for x in row {
                    g = g.gcd(x);
                }
            }
            if g.is_zero() {
                assert!(d.iter().all(|x| x.is_zero()));
            } else {
                assert_eq!(d[0], g);
            }
            // for square matrices the diagonal product is |det|
            if r == 3 && c == 3 {
                let det = &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
                    - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
                    + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0]);
                let prod = d.iter().fold(BigInt::from(1), |a, b| a * b);
                assert_eq!(prod, det.abs());
            }
        }
    }
}
