//! Brute-force homology by dense Gaussian elimination, used to cross-check
//! [`reduce`](super::reduce). Nothing here touches the column reduction.

use std::collections::HashMap;

use super::PrimeField;
use crate::error::{Error, Result};
use crate::filtrations::{Cell, FilteredComplex};

/// Largest sublevel complex the oracle accepts.
pub const ORACLE_CELL_CAP: usize = 5000;

type Matrix = Vec<Vec<u32>>;

/// `β_k(K^t)` from scratch: `#k-cells − rank ∂_k − rank ∂_{k+1}`.
pub fn oracle_betti(fc: &FilteredComplex, t: f64, k: usize, modulus: u64) -> Result<usize> {
    let field = PrimeField::new(modulus)?;
    let cells = capped_sublevel(fc, t)?;
    let n_k = cells.iter().filter(|c| c.dim() == k).count();
    let rank_k = rank(boundary(cells, k, field).0, field);
    let rank_k1 = rank(boundary(cells, k + 1, field).0, field);
    Ok(n_k - rank_k - rank_k1)
}

/// `β_k^{i,j} = dim Z_k(K^i) − dim(Z_k(K^i) ∩ B_k(K^j))` for `i <= j`, computed
/// as `rank [Z | B] − rank B` with `Z` a cycle basis of `K^i` and `B` the
/// boundaries of `K^j`.
pub fn oracle_persistent_betti(
    fc: &FilteredComplex,
    k: usize,
    i: f64,
    j: f64,
    modulus: u64,
) -> Result<usize> {
    if !(i <= j) {
        return Err(Error::InvalidParameter(format!("need i <= j, got {i} > {j}")));
    }
    let field = PrimeField::new(modulus)?;
    let big = capped_sublevel(fc, j)?;
    // k-cells of K^j, in an order where those of K^i come first
    let k_cells: Vec<&Cell> = big.iter().filter(|c| c.dim() == k).collect();
    let n_small = k_cells.iter().filter(|c| c.value <= i).count();

    let (dk, _) = boundary(big, k, field);
    // restrict ∂_k to the k-cells of K^i; rows of faces outside K^i are zero there
    let dk_small: Matrix = dk.iter().map(|row| row[..n_small].to_vec()).collect();
    let cycles = null_space(dk_small, n_small, field);

    let (dk1, _) = boundary(big, k + 1, field);
    let rank_b = rank(dk1.clone(), field);

    // columns: cycle basis vectors padded to all k-cells of K^j, then boundaries
    let n_k = k_cells.len();
    let mut stacked: Matrix = vec![Vec::with_capacity(cycles.len() + dk1.first().map_or(0, Vec::len)); n_k];
    for (r, row) in stacked.iter_mut().enumerate() {
        for z in &cycles {
            row.push(if r < n_small { z[r] } else { 0 });
        }
        if let Some(b) = dk1.get(r) {
            row.extend_from_slice(b);
        }
    }
    Ok(rank(stacked, field) - rank_b)
}

fn capped_sublevel(fc: &FilteredComplex, t: f64) -> Result<&[Cell]> {
    let cells = fc.sublevel(t);
    if cells.len() > ORACLE_CELL_CAP {
        return Err(Error::OracleCapExceeded {
            cells: cells.len(),
            cap: ORACLE_CELL_CAP,
        });
    }
    Ok(cells)
}

/// Dense `∂_k` with rows indexed by the (k−1)-cells and columns by the k-cells,
/// both in sublevel order. For `k = 0` the matrix has no rows.
fn boundary(cells: &[Cell], k: usize, field: PrimeField) -> (Matrix, usize) {
    let cols: Vec<&Cell> = cells.iter().filter(|c| c.dim() == k).collect();
    if k == 0 {
        return (Vec::new(), cols.len());
    }
    let rows: HashMap<&[usize], usize> = cells
        .iter()
        .filter(|c| c.dim() == k - 1)
        .enumerate()
        .map(|(r, c)| (c.simplex.vertices(), r))
        .collect();
    let mut m = vec![vec![0u32; cols.len()]; rows.len()];
    for (j, c) in cols.iter().enumerate() {
        for (i, face) in c.simplex.facets().enumerate() {
            let r = rows[face.vertices()];
            m[r][j] = field.add(m[r][j], field.sign(i));
        }
    }
    (m, cols.len())
}

/// Reduced row echelon form in place; returns the pivot columns.
fn row_reduce(m: &mut Matrix, field: PrimeField) -> Vec<usize> {
    let n_rows = m.len();
    let n_cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n_cols {
        if r == n_rows {
            break;
        }
        let Some(p) = (r..n_rows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, p);
        let inv = field.inv(m[r][c]);
        for x in m[r].iter_mut() {
            *x = field.mul(*x, inv);
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = field.sub(*x, field.mul(f, y));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn rank(mut m: Matrix, field: PrimeField) -> usize {
    row_reduce(&mut m, field).len()
}

/// Basis of `{x : m x = 0}` for a matrix with `n_cols` columns.
fn null_space(mut m: Matrix, n_cols: usize, field: PrimeField) -> Vec<Vec<u32>> {
    let pivots = row_reduce(&mut m, field);
    let mut is_pivot = vec![false; n_cols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    (0..n_cols)
        .filter(|&f| !is_pivot[f])
        .map(|free| {
            let mut v = vec![0u32; n_cols];
            v[free] = 1;
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = field.neg(m[r][free]);
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtrations::{build_mcf, Simplex};
    use crate::partitions::tests::running_example;
    use crate::partitions::{Partition, ScaledPartitionSequence};

    #[test]
    fn running_example_has_one_loop_at_four() {
        let fc = build_mcf(&running_example(), 3).unwrap();
        assert_eq!(oracle_betti(&fc, 4.0, 1, 2).unwrap(), 1);
        assert_eq!(oracle_betti(&fc, 5.0, 1, 2).unwrap(), 0);
        assert_eq!(oracle_betti(&fc, 2.0, 0, 3).unwrap(), 2);
        assert_eq!(oracle_persistent_betti(&fc, 1, 4.0, 4.0, 2).unwrap(), 1);
        assert_eq!(oracle_persistent_betti(&fc, 1, 4.0, 5.0, 2).unwrap(), 0);
        assert_eq!(oracle_persistent_betti(&fc, 0, 1.0, 2.0, 2).unwrap(), 2);
    }

    #[test]
    fn solid_simplex_is_acyclic() {
        let seq = ScaledPartitionSequence::enumerated(vec![Partition::trivial(4)]).unwrap();
        let fc = build_mcf(&seq, 3).unwrap();
        for p in [2, 3] {
            assert_eq!(oracle_betti(&fc, 1.0, 0, p).unwrap(), 1);
            for k in 1..=3 {
                assert_eq!(oracle_betti(&fc, 1.0, k, p).unwrap(), 0);
            }
        }
    }

    #[test]
    fn hollow_tetrahedron_has_a_void() {
        let seq = ScaledPartitionSequence::enumerated(vec![Partition::trivial(4)]).unwrap();
        let fc = build_mcf(&seq, 2).unwrap();
        assert_eq!(oracle_betti(&fc, 1.0, 2, 2).unwrap(), 1);
        assert!(fc.contains(&Simplex::new(vec![0, 1, 2]).unwrap()));
    }

    #[test]
    fn refuses_large_complexes() {
        let seq = ScaledPartitionSequence::enumerated(vec![Partition::trivial(40)]).unwrap();
        let fc = build_mcf(&seq, 2).unwrap();
        assert!(matches!(
            oracle_betti(&fc, 1.0, 1, 2),
            Err(Error::OracleCapExceeded { .. })
        ));
    }
}
