//! Exact rational linear algebra: fraction-free Gaussian elimination,
//! rank, and nullspace bases. Nullspace dimension is an acceptance
//! quantity for the symmetry solver, so nothing here depends on pivots
//! thresholds or floating tolerance.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Row-echelon form by Bareiss fraction-free elimination over the
/// integers. Returns the echelon rows and the pivot column of each.
fn bareiss_echelon(mut rows: Vec<Vec<BigInt>>, cols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        let Some(pivot_row) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pivot_row);
        for i in r + 1..rows.len() {
            for j in c + 1..cols {
                // Bareiss update: exact integer division by the previous pivot.
                let num = &rows[r][c] * &rows[i][j] - &rows[i][c] * &rows[r][j];
                rows[i][j] = num / &prev;
            }
            rows[i][c] = BigInt::zero();
        }
        prev = rows[r][c].clone();
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(pivots.len());
    (rows, pivots)
}

fn clear_denominators(row: &[BigRational]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for x in row {
        if !x.is_zero() {
            lcm = lcm.lcm(x.denom());
        }
    }
    row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
}

/// Scale a rational vector to a primitive integer vector with positive
/// leading entry; gives every basis a deterministic presentation.
pub fn normalize_primitive(vec: &[BigRational]) -> Vec<BigRational> {
    let ints = clear_denominators(vec);
    let mut gcd = BigInt::zero();
    for x in &ints {
        gcd = gcd.gcd(x);
    }
    if gcd.is_zero() {
        return vec.to_vec();
    }
    let mut out: Vec<BigInt> = ints.into_iter().map(|x| x / &gcd).collect();
    if let Some(first) = out.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in &mut out {
                *x = -x.clone();
            }
        }
    }
    out.into_iter().map(BigRational::from_integer).collect()
}

/// Rank of a rational matrix, exactly.
pub fn rank(matrix: &[Vec<BigRational>]) -> usize {
    let Some(cols) = matrix.first().map(Vec::len) else {
        return 0;
    };
    let rows: Vec<Vec<BigInt>> = matrix.iter().map(|r| clear_denominators(r)).collect();
    bareiss_echelon(rows, cols).1.len()
}

/// A basis of the right nullspace `{ x : A x = 0 }`, each vector scaled to
/// a primitive integer vector. The basis is in free-column order, one
/// vector per non-pivot column.
pub fn nullspace(matrix: &[Vec<BigRational>], cols: usize) -> Vec<Vec<BigRational>> {
    debug_assert!(matrix.iter().all(|r| r.len() == cols));
    let int_rows: Vec<Vec<BigInt>> = matrix
        .iter()
        .map(|r| clear_denominators(r))
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    let (echelon, pivots) = bareiss_echelon(int_rows, cols);
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; cols];
        for &p in &pivots {
            v[p] = true;
        }
        v
    };

    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !is_pivot[c]) {
        let mut x = vec![BigRational::zero(); cols];
        x[free] = BigRational::one();
        // Back-substitute the pivot variables from the bottom row up.
        for (row, &p) in echelon.iter().zip(&pivots).rev() {
            let mut sum = BigRational::zero();
            for c in p + 1..cols {
                if !x[c].is_zero() && !row[c].is_zero() {
                    sum += BigRational::from_integer(row[c].clone()) * &x[c];
                }
            }
            x[p] = -sum / BigRational::from_integer(row[p].clone());
        }
        basis.push(normalize_primitive(&x));
    }
    basis
}

/// Whether two sets of rational vectors span the same subspace.
pub fn same_span(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> bool {
    if a.is_empty() && b.is_empty() {
        return true;
    }
    let ra = rank(a);
    let rb = rank(b);
    if ra != rb {
        return false;
    }
    let combined: Vec<Vec<BigRational>> = a.iter().chain(b.iter()).cloned().collect();
    rank(&combined) == ra
}

/// Whether `v` lies in the span of `basis`.
pub fn in_span(basis: &[Vec<BigRational>], v: &[BigRational]) -> bool {
    if v.iter().all(|x| x.is_zero()) {
        return true;
    }
    let r = rank(basis);
    let mut combined: Vec<Vec<BigRational>> = basis.to_vec();
    combined.push(v.to_vec());
    rank(&combined) == r
}
