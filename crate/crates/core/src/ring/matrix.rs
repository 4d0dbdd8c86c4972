//! Exact rational linear algebra and certified Perron eigenvalue estimates.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use super::poly::IntPoly;
use super::RingError;

/// Gauss–Jordan elimination on an n×(n+1) augmented matrix. None if singular.
pub fn solve_augmented(aug: &mut [Vec<BigRational>]) -> Option<Vec<BigRational>> {
    let n = aug.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, pivot);
        let p = aug[col][col].clone();
        for v in aug[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone();
                let pivot_row = aug[col].clone();
                for (v, pv) in aug[r].iter_mut().zip(pivot_row.iter()) {
                    *v -= &factor * pv;
                }
            }
        }
    }
    Some(aug.iter().map(|row| row[n].clone()).collect())
}

pub fn determinant(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &p;
            let pivot_row = a[col].clone();
            for (v, pv) in a[r].iter_mut().zip(pivot_row.iter()) {
                *v -= &factor * pv;
            }
        }
    }
    det
}

pub fn mat_mul(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![BigRational::zero(); m]; n];
    for i in 0..n {
        for t in 0..k {
            if a[i][t].is_zero() {
                continue;
            }
            for j in 0..m {
                out[i][j] += &a[i][t] * &b[t][j];
            }
        }
    }
    out
}

/// Characteristic polynomial det(xI − A) of an integer matrix (Faddeev–LeVerrier, exact).
pub fn characteristic_polynomial(a: &[Vec<i64>]) -> IntPoly {
    let n = a.len();
    let am: Vec<Vec<BigRational>> = a
        .iter()
        .map(|r| {
            r.iter()
                .map(|&v| BigRational::from_integer(BigInt::from(v)))
                .collect()
        })
        .collect();
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::one();
    let mut mk = vec![vec![BigRational::zero(); n]; n];
    for k in 1..=n {
        // M_k = A·M_{k−1} + c_{n−k+1}·I
        let mut next = mat_mul(&am, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &coeffs[n - k + 1];
        }
        let amk = mat_mul(&am, &next);
        let trace: BigRational = (0..n).map(|i| amk[i][i].clone()).sum();
        coeffs[n - k] = -trace / BigRational::from_integer(BigInt::from(k as i64));
        mk = next;
    }
    IntPoly::new(coeffs.into_iter().map(|c| c.to_integer()).collect())
}

/// Complex eigenvalue moduli, largest first.
pub fn eigenvalue_moduli(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    if n == 0 {
        return Vec::new();
    }
    let mat = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    let mut moduli: Vec<f64> = mat.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    moduli
}

/// Perron eigenvalue with Collatz–Wielandt bounds `lower ≤ ρ ≤ upper`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerronEstimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Positive right eigenvector scaled to unit maximum, present for irreducible input.
    pub vector: Option<Vec<f64>>,
}

impl PerronEstimate {
    pub fn error_bound(&self) -> f64 {
        (self.upper - self.lower).max(0.0)
    }
}

/// Sparse nonnegative matrix given as per-row lists of (column, weight).
pub type SparseRows = Vec<Vec<(usize, f64)>>;

pub fn spectral_radius(m: &[Vec<BigRational>]) -> Result<PerronEstimate, RingError> {
    let n = m.len();
    let mut rows: SparseRows = Vec::with_capacity(n);
    for row in m {
        if row.len() != n {
            return Err(RingError::NotSquare);
        }
        let mut sparse = Vec::new();
        for (j, v) in row.iter().enumerate() {
            if v.is_negative() {
                return Err(RingError::NegativeEntry);
            }
            if !v.is_zero() {
                sparse.push((j, v.to_f64().unwrap_or(f64::INFINITY)));
            }
        }
        rows.push(sparse);
    }
    Ok(spectral_radius_sparse(&rows))
}

pub fn spectral_radius_f64(m: &[Vec<f64>]) -> Result<PerronEstimate, RingError> {
    let n = m.len();
    let mut rows: SparseRows = Vec::with_capacity(n);
    for row in m {
        if row.len() != n {
            return Err(RingError::NotSquare);
        }
        if row.iter().any(|&v| v < 0.0) {
            return Err(RingError::NegativeEntry);
        }
        rows.push(
            row.iter()
                .enumerate()
                .filter(|(_, &v)| v > 0.0)
                .map(|(j, &v)| (j, v))
                .collect(),
        );
    }
    Ok(spectral_radius_sparse(&rows))
}

/// Spectral radius of a sparse nonnegative matrix: maximum over strongly connected blocks, each
/// handled by power iteration on B + I with Collatz–Wielandt bracketing.
pub fn spectral_radius_sparse(rows: &SparseRows) -> PerronEstimate {
    let n = rows.len();
    if n == 0 {
        return PerronEstimate {
            value: 0.0,
            lower: 0.0,
            upper: 0.0,
            vector: None,
        };
    }
    let mut graph = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for (i, row) in rows.iter().enumerate() {
        for &(j, _) in row {
            graph.add_edge(nodes[i], nodes[j], ());
        }
    }
    let components = tarjan_scc(&graph);
    let single = components.len() == 1;
    let mut best = PerronEstimate {
        value: 0.0,
        lower: 0.0,
        upper: 0.0,
        vector: None,
    };
    let mut local = vec![usize::MAX; n];
    for comp in components {
        let idx: Vec<usize> = comp.iter().map(|v| v.index()).collect();
        if idx.len() == 1 {
            let i = idx[0];
            let w = rows[i]
                .iter()
                .filter(|(j, _)| *j == i)
                .map(|(_, w)| *w)
                .sum::<f64>();
            if w > best.value {
                best = PerronEstimate {
                    value: w,
                    lower: w,
                    upper: w,
                    vector: None,
                };
            }
            if single {
                best.vector = Some(vec![1.0]);
            }
            continue;
        }
        for (k, &i) in idx.iter().enumerate() {
            local[i] = k;
        }
        let block: SparseRows = idx
            .iter()
            .map(|&i| {
                rows[i]
                    .iter()
                    .filter(|(j, _)| local[*j] != usize::MAX && idx.get(local[*j]) == Some(j))
                    .map(|&(j, w)| (local[j], w))
                    .collect()
            })
            .collect();
        let est = irreducible_radius(&block);
        for &i in &idx {
            local[i] = usize::MAX;
        }
        if est.value > best.value || (single && best.vector.is_none()) {
            let vector = match (&est.vector, single) {
                (Some(local_vec), true) => {
                    let mut global = vec![0.0; n];
                    for (k, &i) in idx.iter().enumerate() {
                        global[i] = local_vec[k];
                    }
                    Some(global)
                }
                _ => None,
            };
            best = PerronEstimate { vector, ..est };
        }
    }
    best
}

fn irreducible_radius(rows: &SparseRows) -> PerronEstimate {
    let n = rows.len();
    let mut x = vec![1.0; n];
    let mut lower = 0.0;
    let mut upper = f64::INFINITY;
    for iter in 0..200_000 {
        let mut y = x.clone();
        for (i, row) in rows.iter().enumerate() {
            for &(j, w) in row {
                y[i] += w * x[j];
            }
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let ratio = y[i] / x[i] - 1.0;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        lower = f64::max(lower, lo);
        upper = f64::min(upper, hi);
        let norm = y.iter().copied().fold(0.0, f64::max);
        x = y.into_iter().map(|v| v / norm).collect();
        if x.iter().any(|&v| v < 1e-300) {
            x.iter_mut().for_each(|v| *v = v.max(1e-300));
        }
        if hi - lo <= 1e-13 * hi.max(1.0) && iter > 3 {
            break;
        }
    }
    let slack = 1e-12 * upper.max(1.0);
    PerronEstimate {
        value: 0.5 * (lower + upper),
        lower: (lower - slack).max(0.0),
        upper: upper + slack,
        vector: Some(x),
    }
}

/// Z-basis (in Hermite normal form) of the group generated by rational vectors.
pub fn lattice_basis(vectors: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let Some(dim) = vectors.first().map(|v| v.len()) else {
        return Vec::new();
    };
    let den = vectors
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let mut rows: Vec<Vec<BigInt>> = vectors
        .iter()
        .map(|v| {
            v.iter()
                .map(|c| (c * BigRational::from_integer(den.clone())).to_integer())
                .collect()
        })
        .filter(|r: &Vec<BigInt>| r.iter().any(|c| !c.is_zero()))
        .collect();
    let mut basis: Vec<Vec<BigInt>> = Vec::new();
    let mut col = 0;
    while col < dim && !rows.is_empty() {
        // Euclid on column `col` across all remaining rows.
        loop {
            let nonzero: Vec<usize> = (0..rows.len())
                .filter(|&r| !rows[r][col].is_zero())
                .collect();
            if nonzero.len() <= 1 {
                break;
            }
            let pivot = *nonzero
                .iter()
                .min_by(|&&a, &&b| rows[a][col].abs().cmp(&rows[b][col].abs()))
                .unwrap();
            let prow = rows[pivot].clone();
            for &r in &nonzero {
                if r == pivot {
                    continue;
                }
                let q = rows[r][col].div_floor(&prow[col]);
                for (v, p) in rows[r].iter_mut().zip(&prow) {
                    *v -= &q * p;
                }
            }
        }
        if let Some(p) = (0..rows.len()).find(|&r| !rows[r][col].is_zero()) {
            let mut row = rows.swap_remove(p);
            if row[col].is_negative() {
                row.iter_mut().for_each(|v| *v = -v.clone());
            }
            basis.push(row);
        }
        rows.retain(|r| r.iter().any(|c| !c.is_zero()));
        col += 1;
    }
    // Reduce entries above pivots.
    for k in 0..basis.len() {
        let pc = basis[k].iter().position(|c| !c.is_zero()).unwrap();
        for r in 0..k {
            let q = basis[r][pc].div_floor(&basis[k][pc]);
            if !q.is_zero() {
                let prow = basis[k].clone();
                for (v, p) in basis[r].iter_mut().zip(&prow) {
                    *v -= &q * p;
                }
            }
        }
    }
    basis
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|c| BigRational::new(c, den.clone()))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    #[test]
    fn fibonacci_perron() {
        let m = vec![vec![r(1), r(1)], vec![r(1), r(0)]];
        let est = spectral_radius(&m).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(est.lower <= phi && phi <= est.upper);
        assert!(est.error_bound() < 1e-10);
        let v = est.vector.clone().unwrap();
        assert!((v[0] / v[1] - phi).abs() < 1e-9);
    }

    #[test]
    fn trivial_radii() {
        let id = vec![vec![r(1), r(0)], vec![r(0), r(1)]];
        assert!((spectral_radius(&id).unwrap().value - 1.0).abs() < 1e-12);
        let two = vec![vec![r(2), r(0)], vec![r(0), r(2)]];
        assert!((spectral_radius(&two).unwrap().value - 2.0).abs() < 1e-12);
        let nil = vec![vec![r(0), r(1)], vec![r(0), r(0)]];
        assert_eq!(spectral_radius(&nil).unwrap().value, 0.0);
        assert!(matches!(
            spectral_radius(&[vec![r(1), r(2)]]),
            Err(RingError::NotSquare)
        ));
    }

    #[test]
    fn periodic_matrix_converges() {
        let swap = vec![vec![r(0), r(1)], vec![r(1), r(0)]];
        assert!((spectral_radius(&swap).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn characteristic_polynomials() {
        assert_eq!(
            characteristic_polynomial(&[vec![1, 1], vec![1, 0]]),
            IntPoly::from_i64(&[-1, -1, 1])
        );
        assert_eq!(
            characteristic_polynomial(&[vec![2]]),
            IntPoly::from_i64(&[-2, 1])
        );
        let trib = characteristic_polynomial(&[vec![1, 1, 1], vec![1, 0, 0], vec![0, 1, 0]]);
        assert_eq!(trib, IntPoly::from_i64(&[-1, -1, -1, 1]));
    }

    #[test]
    fn determinant_and_solve() {
        let m = vec![vec![r(2), r(1)], vec![r(1), r(3)]];
        assert_eq!(determinant(&m), r(5));
        let mut aug = vec![vec![r(2), r(1), r(3)], vec![r(1), r(3), r(4)]];
        assert_eq!(solve_augmented(&mut aug).unwrap(), vec![r(1), r(1)]);
    }

    #[test]
    fn lattice_basis_of_redundant_generators() {
        let vs = vec![
            vec![r(2), r(0)],
            vec![r(3), r(0)],
            vec![r(0), r(4)],
            vec![r(1), r(2)],
        ];
        let b = lattice_basis(&vs);
        assert_eq!(b, vec![vec![r(1), r(0)], vec![r(0), r(2)]]);
    }
}
