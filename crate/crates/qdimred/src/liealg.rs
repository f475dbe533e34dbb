//! Generalized Gell-Mann generator bases, Hermitian matrix exponentials for
//! the SU(n) feature map, feature extraction and the Bloch encoding map.
//!
//! Generators carry no 1/2 normalization (for n = 2 they are the Pauli
//! matrices themselves), so tr(g_i g_j) = 2 delta_ij; any overall scale is
//! absorbed by the trainable encoder weights upstream.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::hermitian_eigendecomposition;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Ordered basis of the n^2 - 1 traceless Hermitian generators.
#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    n: usize,
    generators: Vec<DMatrix<Complex64>>,
}

impl GeneratorBasis {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[DMatrix<Complex64>] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

/// The generalized Gell-Mann matrices for su(n), in a fixed order:
/// symmetric off-diagonal pairs (E_jk + E_kj for j < k, lexicographic),
/// then antisymmetric pairs (-i(E_jk - E_kj)), then the n - 1 diagonal
/// matrices. For n = 2 this is exactly (sigma_x, sigma_y, sigma_z).
pub fn gellmann_generators(n: usize) -> Result<GeneratorBasis> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "generator basis needs dimension >= 2, got {n}"
        )));
    }
    let mut generators = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in j + 1..n {
            let mut g = DMatrix::zeros(n, n);
            g[(j, k)] = c(1.0, 0.0);
            g[(k, j)] = c(1.0, 0.0);
            generators.push(g);
        }
    }
    for j in 0..n {
        for k in j + 1..n {
            let mut g = DMatrix::zeros(n, n);
            g[(j, k)] = c(0.0, -1.0);
            g[(k, j)] = c(0.0, 1.0);
            generators.push(g);
        }
    }
    for l in 1..n {
        let scale = (2.0 / (l as f64 * (l + 1) as f64)).sqrt();
        let mut g = DMatrix::zeros(n, n);
        for j in 0..l {
            g[(j, j)] = c(scale, 0.0);
        }
        g[(l, l)] = c(-(l as f64) * scale, 0.0);
        generators.push(g);
    }
    Ok(GeneratorBasis { n, generators })
}

/// Where the 2n real features are read off the unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionMode {
    /// Real/imaginary parts of the first column; equivalent to acting on the
    /// ground state, always a unit vector.
    FirstColumn,
    /// Plain per-row means (no 1/sqrt(n) factor); equivalent to acting on the
    /// unnormalized equal superposition. Not unit-norm in general.
    RowAverage,
}

/// An SU(n) rotation exp(-i sum_j z_j g_j) together with its inputs.
#[derive(Debug, Clone)]
pub struct UnitaryFeatureMap {
    n: usize,
    matrix: DMatrix<Complex64>,
    coefficients: Vec<f64>,
}

impl UnitaryFeatureMap {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// max |U^H U - I|, the unitarity defect.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.matrix.adjoint() * &self.matrix - DMatrix::<Complex64>::identity(self.n, self.n);
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn check_selection(len: usize, basis: &GeneratorBasis, selection: &[usize]) -> Result<()> {
    if selection.len() != len {
        return Err(Error::DimensionMismatch(format!(
            "selection has {} indices for {} coefficients",
            selection.len(),
            len
        )));
    }
    if len > basis.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot select {} of {} generators",
            len,
            basis.len()
        )));
    }
    let mut seen = vec![false; basis.len()];
    for &s in selection {
        if s >= basis.len() {
            return Err(Error::InvalidArgument(format!(
                "selection index {s} out of range 0..{}",
                basis.len()
            )));
        }
        if seen[s] {
            return Err(Error::InvalidArgument(format!("duplicate selection index {s}")));
        }
        seen[s] = true;
    }
    Ok(())
}

/// exp(-i sum_j z_j g_{selection_j}), computed through the Hermitian
/// eigendecomposition of the generator sum: U = V exp(-i Lambda) V^H.
pub fn su_exponential(
    z: &[f64],
    basis: &GeneratorBasis,
    selection: &[usize],
) -> Result<UnitaryFeatureMap> {
    check_selection(z.len(), basis, selection)?;
    let n = basis.dim();
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for (&zj, &sj) in z.iter().zip(selection) {
        h += &basis.generators()[sj] * c(zj, 0.0);
    }
    let (values, vectors) = hermitian_eigendecomposition(&h)?;
    let phases = DVector::from_iterator(n, values.iter().map(|&l| Complex64::from_polar(1.0, -l)));
    let mut scaled = vectors.clone();
    for col in 0..n {
        for row in 0..n {
            scaled[(row, col)] *= phases[col];
        }
    }
    let matrix = scaled * vectors.adjoint();
    Ok(UnitaryFeatureMap { n, matrix, coefficients: z.to_vec() })
}

/// Read 2n reals off the unitary, interleaved (Re, Im) per row.
pub fn extract_features(map: &UnitaryFeatureMap, mode: ExtractionMode) -> Vec<f64> {
    let n = map.n;
    let mut out = Vec::with_capacity(2 * n);
    match mode {
        ExtractionMode::FirstColumn => {
            for row in 0..n {
                let v = map.matrix[(row, 0)];
                out.push(v.re);
                out.push(v.im);
            }
        }
        ExtractionMode::RowAverage => {
            for row in 0..n {
                let mean = map.matrix.row(row).sum() / c(n as f64, 0.0);
                out.push(mean.re);
                out.push(mean.im);
            }
        }
    }
    out
}

/// The Bloch map (theta, phi) -> (cos(theta/2), sin(theta/2) cos(phi),
/// sin(theta/2) sin(phi)); always a unit vector.
pub fn bloch_encode(theta: f64, phi: f64) -> Result<[f64; 3]> {
    if !theta.is_finite() || !phi.is_finite() {
        return Err(Error::InvalidArgument("Bloch angles must be finite".into()));
    }
    let half = theta / 2.0;
    Ok([half.cos(), half.sin() * phi.cos(), half.sin() * phi.sin()])
}

/// d(bloch_encode)/d(theta, phi), a 3 x 2 matrix.
pub fn bloch_jacobian(theta: f64, phi: f64) -> DMatrix<f64> {
    let half = theta / 2.0;
    DMatrix::from_row_slice(
        3,
        2,
        &[
            -half.sin() / 2.0,
            0.0,
            half.cos() / 2.0 * phi.cos(),
            -half.sin() * phi.sin(),
            half.cos() / 2.0 * phi.sin(),
            half.sin() * phi.cos(),
        ],
    )
}

const JACOBIAN_FD_STEP: f64 = 1e-5;

/// d(extracted features)/dz, a (2n x L) matrix.
///
/// For n = 2 the closed form exp(-i s v.sigma/|v|) = cos(s) I - i sinc(s) v.sigma
/// gives an analytic derivative (with series near s = 0 and finite values at
/// the antipodal point); for n > 2, central finite differences with step 1e-5.
pub fn su_exponential_jacobian(
    z: &[f64],
    basis: &GeneratorBasis,
    selection: &[usize],
    mode: ExtractionMode,
) -> Result<DMatrix<f64>> {
    check_selection(z.len(), basis, selection)?;
    let n = basis.dim();
    if n == 2 {
        return su2_jacobian(z, selection, mode);
    }
    let l = z.len();
    let mut jac = DMatrix::zeros(2 * n, l);
    let mut work = z.to_vec();
    for j in 0..l {
        work[j] = z[j] + JACOBIAN_FD_STEP;
        let plus = extract_features(&su_exponential(&work, basis, selection)?, mode);
        work[j] = z[j] - JACOBIAN_FD_STEP;
        let minus = extract_features(&su_exponential(&work, basis, selection)?, mode);
        work[j] = z[j];
        for r in 0..2 * n {
            jac[(r, j)] = (plus[r] - minus[r]) / (2.0 * JACOBIAN_FD_STEP);
        }
    }
    Ok(jac)
}

/// sinc(s) = sin(s)/s and g(s) = (s cos s - sin s)/s^3 with series near 0.
fn sinc_pair(s: f64) -> (f64, f64) {
    if s < 1e-4 {
        let s2 = s * s;
        (
            1.0 - s2 / 6.0 + s2 * s2 / 120.0,
            -1.0 / 3.0 + s2 / 30.0 - s2 * s2 / 840.0,
        )
    } else {
        ((s.sin()) / s, (s * s.cos() - s.sin()) / (s * s * s))
    }
}

fn su2_jacobian(z: &[f64], selection: &[usize], mode: ExtractionMode) -> Result<DMatrix<f64>> {
    // Pauli coefficient vector v: z scattered into slots (x, y, z) by the
    // selection against the n = 2 generator order.
    let mut v = [0.0f64; 3];
    for (&zj, &sj) in z.iter().zip(selection) {
        v[sj] = zj;
    }
    let s = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let (f, g) = sinc_pair(s);
    let basis = gellmann_generators(2)?;
    let paulis = basis.generators();
    let mut vsigma = DMatrix::<Complex64>::zeros(2, 2);
    for (k, p) in paulis.iter().enumerate() {
        vsigma += p * c(v[k], 0.0);
    }
    let identity = DMatrix::<Complex64>::identity(2, 2);
    let mut jac = DMatrix::zeros(4, z.len());
    for (j, &sj) in selection.iter().enumerate() {
        // dU/dv_k = -f v_k I - i (g v_k (v.sigma) + f sigma_k)
        let vk = v[sj];
        let du = &identity * c(-f * vk, 0.0)
            + (&vsigma * c(vk * g, 0.0) + &paulis[sj] * c(f, 0.0)) * c(0.0, -1.0);
        let feats = extract_matrix_features(&du, mode);
        for r in 0..4 {
            jac[(r, j)] = feats[r];
        }
    }
    Ok(jac)
}

fn extract_matrix_features(m: &DMatrix<Complex64>, mode: ExtractionMode) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(2 * n);
    match mode {
        ExtractionMode::FirstColumn => {
            for row in 0..n {
                out.push(m[(row, 0)].re);
                out.push(m[(row, 0)].im);
            }
        }
        ExtractionMode::RowAverage => {
            for row in 0..n {
                let mean = m.row(row).sum() / c(n as f64, 0.0);
                out.push(mean.re);
                out.push(mean.im);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_matrices_for_n2() {
        let basis = gellmann_generators(2).unwrap();
        assert_eq!(basis.len(), 3);
        let gx = &basis.generators()[0];
        let gy = &basis.generators()[1];
        let gz = &basis.generators()[2];
        assert_eq!(gx[(0, 1)], c(1.0, 0.0));
        assert_eq!(gx[(1, 0)], c(1.0, 0.0));
        assert_eq!(gy[(0, 1)], c(0.0, -1.0));
        assert_eq!(gy[(1, 0)], c(0.0, 1.0));
        assert_eq!(gz[(0, 0)], c(1.0, 0.0));
        assert_eq!(gz[(1, 1)], c(-1.0, 0.0));
    }

    #[test]
    fn basis_count_matches_dimension() {
        for n in 2..=5 {
            assert_eq!(gellmann_generators(n).unwrap().len(), n * n - 1);
        }
        assert!(gellmann_generators(1).is_err());
    }

    #[test]
    fn generators_hermitian_traceless_orthogonal() {
        let basis = gellmann_generators(3).unwrap();
        for g in basis.generators() {
            let herm = (g - g.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(herm < 1e-12);
            assert!(g.trace().norm() < 1e-12);
        }
        for (i, gi) in basis.generators().iter().enumerate() {
            for (j, gj) in basis.generators().iter().enumerate() {
                let tr = (gi * gj).trace();
                let expected = if i == j { 2.0 } else { 0.0 };
                assert!((tr.re - expected).abs() < 1e-10 && tr.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let basis = gellmann_generators(3).unwrap();
        let u = su_exponential(&[0.0; 8], &basis, &(0..8).collect::<Vec<_>>()).unwrap();
        let d = (u.matrix() - DMatrix::<Complex64>::identity(3, 3))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(d < 1e-12);
    }

    #[test]
    fn half_pi_sigma_x_rotation() {
        // exp(-i (pi/2) sigma_x) = -i sigma_x
        let basis = gellmann_generators(2).unwrap();
        let u = su_exponential(&[std::f64::consts::FRAC_PI_2, 0.0, 0.0], &basis, &[0, 1, 2]).unwrap();
        let m = u.matrix();
        assert!((m[(0, 1)] - c(0.0, -1.0)).norm() < 1e-10);
        assert!((m[(1, 0)] - c(0.0, -1.0)).norm() < 1e-10);
        assert!(m[(0, 0)].norm() < 1e-10);
        assert!(m[(1, 1)].norm() < 1e-10);
    }

    #[test]
    fn selection_validation() {
        let basis = gellmann_generators(2).unwrap();
        assert!(su_exponential(&[0.1, 0.2], &basis, &[0]).is_err());
        assert!(su_exponential(&[0.1, 0.2], &basis, &[0, 0]).is_err());
        assert!(su_exponential(&[0.1, 0.2], &basis, &[0, 9]).is_err());
    }

    #[test]
    fn first_column_of_identity() {
        let basis = gellmann_generators(2).unwrap();
        let u = su_exponential(&[0.0, 0.0, 0.0], &basis, &[0, 1, 2]).unwrap();
        let f = extract_features(&u, ExtractionMode::FirstColumn);
        assert_eq!(f.len(), 4);
        assert!((f[0] - 1.0).abs() < 1e-12);
        assert!(f[1].abs() < 1e-12 && f[2].abs() < 1e-12 && f[3].abs() < 1e-12);
    }

    #[test]
    fn first_column_of_minus_i_sigma_x() {
        let basis = gellmann_generators(2).unwrap();
        let u = su_exponential(&[std::f64::consts::FRAC_PI_2, 0.0, 0.0], &basis, &[0, 1, 2]).unwrap();
        let f = extract_features(&u, ExtractionMode::FirstColumn);
        assert!(f[0].abs() < 1e-10 && f[1].abs() < 1e-10 && f[2].abs() < 1e-10);
        assert!((f[3] + 1.0).abs() < 1e-10);
    }

    #[test]
    fn first_column_unit_norm() {
        let basis = gellmann_generators(3).unwrap();
        let u = su_exponential(&[0.3, -1.2, 0.7, 2.0], &basis, &[0, 2, 5, 7]).unwrap();
        let f = extract_features(&u, ExtractionMode::FirstColumn);
        let norm: f64 = f.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-10);
        assert!(u.unitarity_defect() < 1e-10);
    }

    #[test]
    fn bloch_encode_cases() {
        let a = bloch_encode(0.0, 0.0).unwrap();
        assert!((a[0] - 1.0).abs() < 1e-12 && a[1].abs() < 1e-12 && a[2].abs() < 1e-12);
        let b = bloch_encode(std::f64::consts::PI, 0.0).unwrap();
        assert!(b[0].abs() < 1e-12 && (b[1] - 1.0).abs() < 1e-12);
        let d = bloch_encode(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d[0] - s).abs() < 1e-5 && d[1].abs() < 1e-12 && (d[2] - s).abs() < 1e-5);
        assert!(bloch_encode(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn bloch_norm_always_one() {
        for i in 0..50 {
            let t = i as f64 * 0.7 - 10.0;
            let p = i as f64 * 1.3 + 2.0;
            let v = bloch_encode(t, p).unwrap();
            let n: f64 = v.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }
}
