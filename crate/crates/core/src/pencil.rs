//! Symmetric-definite generalized eigenvalue solver.
//!
//! Solves `R W = D W Λ` for symmetric `R` and positive definite `D` by
//! Cholesky whitening (`D = L Lᵀ`, then a symmetric eigendecomposition of
//! `L⁻¹ R L⁻ᵀ`). Eigenvalues come back in descending order; eigenvectors are
//! D-orthonormal with the largest-magnitude entry of each column positive.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use ndarray::Array2;

/// Dense symmetric matrix; symmetrized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<F: Scalar> {
    data: Array2<F>,
}

impl<F: Scalar> SymMatrix<F> {
    /// Builds from a square matrix, averaging `m` with its transpose.
    pub fn new(m: Array2<F>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "symmetric matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("symmetric matrix entries must be finite".into()));
        }
        let half = F::cast(0.5);
        let data = (&m + &m.t()) * half;
        Ok(Self { data })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_array(&self) -> &Array2<F> {
        &self.data
    }

    pub fn into_array(self) -> Array2<F> {
        self.data
    }

    pub fn trace(&self) -> F {
        self.data.diag().iter().copied().sum()
    }
}

/// Trace-scaled diagonal loading: `m + epsilon * (trace(m)/dim) * I`.
pub fn apply_ridge<F: Scalar>(m: &SymMatrix<F>, epsilon: f64) -> SymMatrix<F> {
    let n = m.dim();
    let shift = F::cast(epsilon) * m.trace() / F::cast(n as f64);
    let mut data = m.data.clone();
    for i in 0..n {
        data[(i, i)] += shift;
    }
    SymMatrix { data }
}

/// The (R, D) pair of a symmetric-definite pencil. `ridge` records the
/// diagonal loading already applied to D's diagonal blocks.
#[derive(Debug, Clone)]
pub struct PencilPair<F: Scalar> {
    r: SymMatrix<F>,
    d: SymMatrix<F>,
    ridge: f64,
}

impl<F: Scalar> PencilPair<F> {
    pub fn new(r: SymMatrix<F>, d: SymMatrix<F>, ridge: f64) -> Result<Self> {
        if r.dim() != d.dim() {
            return Err(Error::DimensionMismatch(format!(
                "pencil matrices disagree: {} vs {}",
                r.dim(),
                d.dim()
            )));
        }
        if ridge < 0.0 {
            return Err(Error::InvalidConfig(format!("ridge must be nonnegative, got {ridge}")));
        }
        Ok(Self { r, d, ridge })
    }

    pub fn r(&self) -> &SymMatrix<F> {
        &self.r
    }

    pub fn d(&self) -> &SymMatrix<F> {
        &self.d
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn dim(&self) -> usize {
        self.r.dim()
    }
}

/// Top-q generalized eigenpairs.
#[derive(Debug, Clone)]
pub struct PencilSolution<F: Scalar> {
    /// Descending-ordered generalized eigenvalues, length q.
    pub eigenvalues: Vec<F>,
    /// dim x q matrix of D-orthonormal eigenvectors.
    pub vectors: Array2<F>,
    /// Requested component count.
    pub q: usize,
}

/// Solves `R W = D W Λ` and returns the top `q` eigenpairs.
pub fn solve_pencil<F: Scalar>(pencil: &PencilPair<F>, q: usize) -> Result<PencilSolution<F>> {
    let n = pencil.dim();
    if q == 0 || q > n {
        return Err(Error::DimensionMismatch(format!(
            "requested {q} components from a {n}-dimensional pencil"
        )));
    }
    let l = cholesky(pencil.d.as_array())?;
    // M = L^-1 R L^-T, kept symmetric explicitly.
    let y = forward_solve(&l, pencil.r.as_array());
    let m = forward_solve(&l, &y.t().to_owned());
    let half = F::cast(0.5);
    let m = (&m + &m.t()) * half;
    let (vals, vecs) = jacobi_eigen(&m);

    // Stable descending order; ties keep the eigensolver's order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap_or(std::cmp::Ordering::Equal));

    let mut eigenvalues = Vec::with_capacity(q);
    let mut top = Array2::<F>::zeros((n, q));
    for (j, &idx) in order.iter().take(q).enumerate() {
        eigenvalues.push(vals[idx]);
        top.column_mut(j).assign(&vecs.column(idx));
    }
    // Back-substitute Lᵀ W = U so W is D-orthonormal.
    let mut vectors = back_solve_transposed(&l, &top);
    fix_signs(&mut vectors);
    Ok(PencilSolution { eigenvalues, vectors, q })
}

/// Lower-triangular Cholesky factor, or `NotPositiveDefinite`.
pub fn cholesky<F: Scalar>(a: &Array2<F>) -> Result<Array2<F>> {
    let n = a.nrows();
    let mut l = Array2::<F>::zeros((n, n));
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag > F::zero()) || !diag.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let djj = diag.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L Y = B` for lower-triangular `L`, column by column.
fn forward_solve<F: Scalar>(l: &Array2<F>, b: &Array2<F>) -> Array2<F> {
    let n = l.nrows();
    let cols = b.ncols();
    let mut y = b.clone();
    for c in 0..cols {
        for i in 0..n {
            let mut s = y[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * y[(k, c)];
            }
            y[(i, c)] = s / l[(i, i)];
        }
    }
    y
}

/// Solves `Lᵀ X = B` for lower-triangular `L`.
fn back_solve_transposed<F: Scalar>(l: &Array2<F>, b: &Array2<F>) -> Array2<F> {
    let n = l.nrows();
    let cols = b.ncols();
    let mut x = b.clone();
    for c in 0..cols {
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in (i + 1)..n {
                s -= l[(k, i)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    x
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns (eigenvalues, eigenvector columns) in solver order.
pub fn jacobi_eigen<F: Scalar>(m: &Array2<F>) -> (Vec<F>, Array2<F>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = Array2::<F>::eye(n);
    if n == 1 {
        return (vec![a[(0, 0)]], v);
    }
    let fro = a.iter().map(|x| *x * *x).sum::<F>().sqrt();
    let tol = F::epsilon() * if fro > F::zero() { fro } else { F::one() };
    let max_sweeps = 100;
    for _ in 0..max_sweeps {
        let mut off = F::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == F::zero() {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (F::cast(2.0) * apq);
                let t = {
                    let denom = theta.abs() + (F::one() + theta * theta).sqrt();
                    if theta >= F::zero() {
                        F::one() / denom
                    } else {
                        -F::one() / denom
                    }
                };
                let c = F::one() / (F::one() + t * t).sqrt();
                let s = t * c;
                // Rotate rows/columns p and q of A.
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - s * aiq;
                    a[(i, q)] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let api = a[(p, i)];
                    let aqi = a[(q, i)];
                    a[(p, i)] = c * api - s * aqi;
                    a[(q, i)] = s * api + c * aqi;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| a[(i, i)]).collect();
    (vals, v)
}

/// Flips each column so its largest-magnitude entry is positive. The first
/// index attains ties, keeping the output deterministic.
fn fix_signs<F: Scalar>(w: &mut Array2<F>) {
    for mut col in w.columns_mut() {
        let mut best = 0;
        let mut best_abs = F::zero();
        for (i, &x) in col.iter().enumerate() {
            if x.abs() > best_abs {
                best_abs = x.abs();
                best = i;
            }
        }
        if col[best] < F::zero() {
            col.mapv_inplace(|x| -x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn identity_pencil(n: usize) -> PencilPair<f64> {
        let i = Array2::<f64>::eye(n);
        PencilPair::new(SymMatrix::new(i.clone()).unwrap(), SymMatrix::new(i).unwrap(), 0.0)
            .unwrap()
    }

    #[test]
    fn identity_pencil_has_unit_eigenvalues() {
        let sol = solve_pencil(&identity_pencil(2), 2).unwrap();
        assert_eq!(sol.eigenvalues, vec![1.0, 1.0]);
        // D = I so the eigenvectors are orthonormal.
        let g = sol.vectors.t().dot(&sol.vectors);
        for ((i, j), v) in g.indexed_iter() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((v - want).abs() <= 1e-10);
        }
    }

    #[test]
    fn diagonal_pencil_selects_top_component() {
        let r = SymMatrix::<f64>::new(array![[2.0, 0.0], [0.0, 1.0]]).unwrap();
        let d = SymMatrix::new(Array2::eye(2)).unwrap();
        let sol = solve_pencil(&PencilPair::new(r, d, 0.0).unwrap(), 1).unwrap();
        assert!((sol.eigenvalues[0] - 2.0).abs() <= 1e-12);
        assert!((sol.vectors[(0, 0)] - 1.0).abs() <= 1e-12);
        assert!(sol.vectors[(1, 0)].abs() <= 1e-12);
    }

    #[test]
    fn ridge_examples() {
        let i2 = SymMatrix::new(Array2::<f64>::eye(2)).unwrap();
        assert_eq!(apply_ridge(&i2, 0.0).as_array(), i2.as_array());
        let m = SymMatrix::new(array![[2.0, 0.0], [0.0, 0.0]]).unwrap();
        let r = apply_ridge(&m, 0.5);
        assert_eq!(r.as_array(), &array![[2.5, 0.0], [0.0, 0.5]]);
    }

    #[test]
    fn ridge_shifts_minimum_eigenvalue() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let a = Array2::from_shape_fn((4, 4), |_| rng.gen_range(-1.0..1.0));
        let spd = SymMatrix::new(a.t().dot(&a) + Array2::<f64>::eye(4) * 0.1).unwrap();
        let (vals, _) = jacobi_eigen(spd.as_array());
        let min0 = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let shifted = apply_ridge(&spd, 0.01);
        let (vals1, _) = jacobi_eigen(shifted.as_array());
        let min1 = vals1.iter().cloned().fold(f64::INFINITY, f64::min);
        let expect = 0.01 * spd.trace() / 4.0;
        assert!((min1 - min0 - expect).abs() <= 1e-10);
    }

    #[test]
    fn q_larger_than_dim_is_rejected() {
        assert!(matches!(
            solve_pencil(&identity_pencil(2), 3),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn indefinite_d_is_rejected() {
        let r = SymMatrix::new(Array2::<f64>::eye(2)).unwrap();
        let d = SymMatrix::new(array![[1.0, 0.0], [0.0, -1.0]]).unwrap();
        assert!(matches!(
            solve_pencil(&PencilPair::new(r, d, 0.0).unwrap(), 1),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn deterministic_given_identical_inputs() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let a = Array2::from_shape_fn((6, 6), |_| rng.gen_range(-1.0..1.0));
        let b = Array2::from_shape_fn((6, 6), |_| rng.gen_range(-1.0..1.0));
        let r = SymMatrix::new(a.clone() + a.t().to_owned()).unwrap();
        let d = SymMatrix::new(b.t().dot(&b) + Array2::<f64>::eye(6)).unwrap();
        let p = PencilPair::new(r, d, 0.0).unwrap();
        let s1 = solve_pencil(&p, 6).unwrap();
        let s2 = solve_pencil(&p, 6).unwrap();
        for (x, y) in s1.eigenvalues.iter().zip(&s2.eigenvalues) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (x, y) in s1.vectors.iter().zip(s2.vectors.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn signs_have_positive_dominant_entry() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let a = Array2::from_shape_fn((5, 5), |_| rng.gen_range(-1.0..1.0));
            let b = Array2::from_shape_fn((5, 5), |_| rng.gen_range(-1.0..1.0));
            let r = SymMatrix::new(a.clone() + a.t().to_owned()).unwrap();
            let d = SymMatrix::new(b.t().dot(&b) + Array2::<f64>::eye(5)).unwrap();
            let sol = solve_pencil(&PencilPair::new(r, d, 0.0).unwrap(), 5).unwrap();
            for col in sol.vectors.columns() {
                let dominant = col.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
                assert!(dominant >= 0.0);
            }
        }
    }
}
