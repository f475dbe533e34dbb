//! Quantum kernel matrices, kernel centering, kernel PCA projections and
//! classical covariance PCA, sharing one symmetric/Hermitian eigensolver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::parallel;
use crate::qsim::{self, FeatureMapSpec};

const SYMMETRY_TOL: f64 = 1e-10;
const UNIT_DIAG_TOL: f64 = 1e-10;

fn sorted_desc_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    order
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues descending,
/// eigenvectors orthonormal columns. Deterministic for fixed input.
pub fn symmetric_eigendecomposition(a: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let asym = (a - a.transpose()).abs().max();
    if asym > SYMMETRY_TOL {
        return Err(Error::InvalidArgument(format!(
            "matrix is not symmetric: max |A - A^T| = {asym:.3e}"
        )));
    }
    let eig = a.clone().symmetric_eigen();
    let order = sorted_desc_order(eig.eigenvalues.as_slice());
    let d = a.nrows();
    let values = DVector::from_iterator(d, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Complex Hermitian variant; eigenvalues are real, descending.
pub fn hermitian_eigendecomposition(
    a: &DMatrix<Complex64>,
) -> Result<(DVector<f64>, DMatrix<Complex64>)> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let adj = a.adjoint();
    let herm_dev = (a - &adj)
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    if herm_dev > SYMMETRY_TOL {
        return Err(Error::InvalidArgument(format!(
            "matrix is not Hermitian: max |A - A^H| = {herm_dev:.3e}"
        )));
    }
    let eig = a.clone().symmetric_eigen();
    let order = sorted_desc_order(eig.eigenvalues.as_slice());
    let d = a.nrows();
    let values = DVector::from_iterator(d, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// M x M Gram matrix of pairwise state fidelities: symmetric, unit diagonal,
/// PSD up to numerical noise.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    entries: DMatrix<f64>,
}

impl KernelMatrix {
    /// Validate and wrap a Gram matrix (symmetry to 1e-12, unit diagonal).
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "kernel matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let asym = (&entries - entries.transpose()).abs().max();
        if asym > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "kernel matrix not symmetric: max |K - K^T| = {asym:.3e}"
            )));
        }
        for i in 0..entries.nrows() {
            if (entries[(i, i)] - 1.0).abs() > UNIT_DIAG_TOL {
                return Err(Error::InvalidArgument(format!(
                    "kernel diagonal entry {i} = {} deviates from 1",
                    entries[(i, i)]
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Smallest eigenvalue; the PSD invariant asks for >= -1e-8.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (values, _) = symmetric_eigendecomposition(&self.entries)?;
        Ok(values[values.len() - 1])
    }
}

/// Pairwise fidelities of the feature-map states of the rows of `z`.
///
/// Each state is prepared once (M state evaluations); the M(M+1)/2 upper
/// triangle of fidelities is computed and mirrored, so symmetry is exact.
pub fn quantum_kernel_matrix(z: &DMatrix<f64>, spec: &FeatureMapSpec) -> Result<KernelMatrix> {
    let m = z.nrows();
    if m == 0 {
        return Err(Error::DimensionMismatch("kernel needs at least one sample".into()));
    }
    if z.ncols() != spec.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "kernel rows have width {}, feature map expects {}",
            z.ncols(),
            spec.n_qubits
        )));
    }
    let rows: Vec<Vec<f64>> = (0..m).map(|i| z.row(i).iter().copied().collect()).collect();
    let states = parallel::map_indexed(&rows, |row| qsim::zz_feature_map_state(row, spec))?;
    let mut k = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let f = qsim::fidelity(&states[i], &states[j])?;
            k[(i, j)] = f;
            k[(j, i)] = f;
        }
    }
    KernelMatrix::new(k)
}

/// Double centering: K - 1K/M - K1/M + 1K1/M^2. Every row and column of the
/// result sums to zero; symmetry is preserved exactly by mirroring.
pub fn center_kernel(k: &KernelMatrix) -> DMatrix<f64> {
    let m = k.size();
    let entries = k.entries();
    let row_means: Vec<f64> = (0..m).map(|i| entries.row(i).sum() / m as f64).collect();
    let grand = row_means.iter().sum::<f64>() / m as f64;
    let mut out = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = entries[(i, j)] - row_means[i] - row_means[j] + grand;
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Retained top eigenpairs of a (possibly centered) kernel, plus per-sample
/// principal-component values.
#[derive(Debug, Clone)]
pub struct KpcaProjection {
    /// Top n_d kernel eigenvalues, descending.
    pub eigenvalues: DVector<f64>,
    /// M x n_d orthonormal eigenvector columns, sign-fixed.
    pub eigenvectors: DMatrix<f64>,
    /// M x n_d matrix: row i holds sample i's component values.
    pub projections: DMatrix<f64>,
}

/// Fix eigenvector signs: the entry of largest absolute value (first such
/// index on ties) is made positive. This pins the output bit-for-bit.
fn apply_sign_convention(vectors: &mut DMatrix<f64>) {
    for c in 0..vectors.ncols() {
        let col = vectors.column(c);
        let mut best = 0;
        let mut best_abs = f64::NEG_INFINITY;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if vectors[(best, c)] < 0.0 {
            for r in 0..vectors.nrows() {
                vectors[(r, c)] = -vectors[(r, c)];
            }
        }
    }
}

/// Kernel PCA: eigendecompose the (optionally centered) kernel, keep the top
/// n_d eigenpairs, and scale each retained eigenvector by the square root of
/// its eigenvalue (clamped at zero) to obtain per-sample projections.
pub fn kpca_project(k: &KernelMatrix, n_d: usize, center: bool) -> Result<KpcaProjection> {
    let m = k.size();
    if n_d == 0 || n_d > m {
        return Err(Error::InvalidArgument(format!(
            "n_d = {n_d} out of range 1..={m}"
        )));
    }
    let matrix = if center { center_kernel(k) } else { k.entries().clone() };
    let (values, vectors) = symmetric_eigendecomposition(&matrix)?;
    let mut top_vectors = DMatrix::from_fn(m, n_d, |r, c| vectors[(r, c)]);
    apply_sign_convention(&mut top_vectors);
    let top_values = DVector::from_iterator(n_d, values.iter().take(n_d).copied());
    let mut projections = DMatrix::zeros(m, n_d);
    for l in 0..n_d {
        let scale = top_values[l].max(0.0).sqrt();
        for i in 0..m {
            projections[(i, l)] = top_vectors[(i, l)] * scale;
        }
    }
    Ok(KpcaProjection { eigenvalues: top_values, eigenvectors: top_vectors, projections })
}

/// Classical covariance PCA model.
#[derive(Debug, Clone)]
pub struct PcaModel {
    /// Per-feature mean of the training data.
    pub mean: DVector<f64>,
    /// k x N matrix of principal directions (orthonormal rows).
    pub components: DMatrix<f64>,
    /// Variance captured by each direction, descending.
    pub explained_variances: DVector<f64>,
}

/// Mean-center, form C = X^T X / n on the centered data, keep top-k eigenpairs.
pub fn pca_fit(x: &DMatrix<f64>, k: usize) -> Result<PcaModel> {
    let (n, width) = (x.nrows(), x.ncols());
    if n == 0 {
        return Err(Error::InvalidArgument("PCA needs at least one sample".into()));
    }
    if k == 0 || k > n.min(width) {
        return Err(Error::InvalidArgument(format!(
            "k = {k} out of range 1..={}",
            n.min(width)
        )));
    }
    let mean = DVector::from_iterator(width, (0..width).map(|j| x.column(j).sum() / n as f64));
    let mut centered = x.clone();
    for i in 0..n {
        for j in 0..width {
            centered[(i, j)] -= mean[j];
        }
    }
    let cov = centered.transpose() * &centered / n as f64;
    let (values, mut vectors) = symmetric_eigendecomposition(&cov)?;
    let mut top = DMatrix::from_fn(width, k, |r, c| vectors[(r, c)]);
    apply_sign_convention(&mut top);
    vectors = top;
    let components = vectors.transpose();
    let explained = DVector::from_iterator(k, values.iter().take(k).map(|v| v.max(0.0)));
    Ok(PcaModel { mean, components, explained_variances: explained })
}

/// Project rows onto the retained directions: (X - mean) C^T.
pub fn pca_transform(model: &PcaModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() != model.mean.len() {
        return Err(Error::DimensionMismatch(format!(
            "PCA transform expects width {}, got {}",
            model.mean.len(),
            x.ncols()
        )));
    }
    let mut centered = x.clone();
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            centered[(i, j)] -= model.mean[j];
        }
    }
    Ok(centered * model.components.transpose())
}
