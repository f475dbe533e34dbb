//! Shared oracles for the integration suites, independent of the library's
//! state-update implementation: explicit dense gate matrices combined with
//! Kronecker products, truncated Taylor series for matrix exponentials, and
//! small helpers.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qdimred::qsim::Gate;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

fn eye(dim: usize) -> DMatrix<Complex64> {
    DMatrix::identity(dim, dim)
}

fn single_qubit_matrix(gate: &Gate) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match *gate {
        Gate::H { .. } => DMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]),
        Gate::Ry { angle, .. } => {
            let (cc, ss) = ((angle / 2.0).cos(), (angle / 2.0).sin());
            DMatrix::from_row_slice(2, 2, &[c(cc, 0.0), c(-ss, 0.0), c(ss, 0.0), c(cc, 0.0)])
        }
        Gate::Rz { angle, .. } => DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::from_polar(1.0, -angle / 2.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                Complex64::from_polar(1.0, angle / 2.0),
            ],
        ),
        Gate::Cx { .. } => unreachable!("CX is built as a permutation"),
    }
}

/// Full 2^n x 2^n unitary of a single gate; qubit 0 is the least-significant
/// bit of the basis index, so a gate on qubit q sits as I ⊗ M ⊗ I with 2^q
/// trailing identity dimensions.
pub fn gate_unitary(gate: &Gate, n_qubits: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n_qubits;
    match *gate {
        Gate::Cx { control, target } => {
            let mut m = DMatrix::zeros(dim, dim);
            for input in 0..dim {
                let output = if input & (1 << control) != 0 { input ^ (1 << target) } else { input };
                m[(output, input)] = c(1.0, 0.0);
            }
            m
        }
        ref g => {
            let q = match *g {
                Gate::H { qubit } | Gate::Ry { qubit, .. } | Gate::Rz { qubit, .. } => qubit,
                Gate::Cx { .. } => unreachable!(),
            };
            let m = single_qubit_matrix(g);
            kron(&kron(&eye(1 << (n_qubits - q - 1)), &m), &eye(1 << q))
        }
    }
}

/// Dense product of a whole circuit, applied left to right.
pub fn circuit_unitary(gates: &[Gate], n_qubits: usize) -> DMatrix<Complex64> {
    let mut u = eye(1 << n_qubits);
    for g in gates {
        u = gate_unitary(g, n_qubits) * u;
    }
    u
}

/// Apply the dense circuit product to |0...0>.
pub fn circuit_on_ground_state(gates: &[Gate], n_qubits: usize) -> Vec<Complex64> {
    let u = circuit_unitary(gates, n_qubits);
    (0..u.nrows()).map(|r| u[(r, 0)]).collect()
}

/// Truncated Taylor series for exp(-i H), 50 terms.
pub fn taylor_exp_minus_i(h: &DMatrix<Complex64>, terms: usize) -> DMatrix<Complex64> {
    let dim = h.nrows();
    let step = h * c(0.0, -1.0);
    let mut sum = eye(dim);
    let mut term = eye(dim);
    for k in 1..terms {
        term = &term * &step / c(k as f64, 0.0);
        sum += &term;
    }
    sum
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_matrix_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Relative error with an absolute floor for near-zero references.
pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-8)
}

/// A random circuit over the supported gate set.
pub fn random_circuit(n_qubits: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<Gate> {
    (0..len)
        .map(|_| match rng.gen_range(0..4) {
            0 => Gate::H { qubit: rng.gen_range(0..n_qubits) },
            1 => Gate::Ry { qubit: rng.gen_range(0..n_qubits), angle: rng.gen_range(-3.2..3.2) },
            2 => Gate::Rz { qubit: rng.gen_range(0..n_qubits), angle: rng.gen_range(-3.2..3.2) },
            _ => {
                if n_qubits < 2 {
                    Gate::H { qubit: 0 }
                } else {
                    let control = rng.gen_range(0..n_qubits);
                    let mut target = rng.gen_range(0..n_qubits);
                    while target == control {
                        target = rng.gen_range(0..n_qubits);
                    }
                    Gate::Cx { control, target }
                }
            }
        })
        .collect()
}
