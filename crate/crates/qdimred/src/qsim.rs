//! Dense statevector simulation of the data-encoding and variational circuit
//! blocks, plus the fidelities and measurement probabilities built on them.
//!
//! Qubit 0 is the least-significant bit of the basis-state index, everywhere.
//! All operations are pure and preserve the state norm; probabilities and
//! fidelities are exact (no sampling noise).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum |amplitude|^2 = 1` for accepting external amplitudes.
pub const NORM_TOL: f64 = 1e-10;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Which qubit pairs the entangling blocks touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entanglement {
    /// All ordered pairs (i, j) with i < j, in lexicographic order.
    Full,
    /// Nearest neighbours (i, i + 1).
    Linear,
}

impl Entanglement {
    pub fn pairs(self, n_qubits: usize) -> Vec<(usize, usize)> {
        match self {
            Entanglement::Full => (0..n_qubits)
                .flat_map(|i| (i + 1..n_qubits).map(move |j| (i, j)))
                .collect(),
            Entanglement::Linear => (0..n_qubits.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
        }
    }
}

/// Structure of the data-encoding block: layered H + phase + pairwise
/// ZZ-interaction phases, repeated `reps` times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapSpec {
    pub n_qubits: usize,
    pub reps: usize,
    pub entanglement: Entanglement,
}

impl FeatureMapSpec {
    pub fn new(n_qubits: usize, reps: usize, entanglement: Entanglement) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("feature map needs n_qubits >= 1".into()));
        }
        if reps == 0 {
            return Err(Error::InvalidArgument("feature map needs reps >= 1".into()));
        }
        Ok(Self { n_qubits, reps, entanglement })
    }
}

/// Structure of the variational block: (reps + 1) RY layers interleaved with
/// `reps` CX entangling blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub reps: usize,
    pub entanglement: Entanglement,
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, reps: usize, entanglement: Entanglement) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("ansatz needs n_qubits >= 1".into()));
        }
        Ok(Self { n_qubits, reps, entanglement })
    }

    /// One RY angle per qubit per rotation layer.
    pub fn n_params(&self) -> usize {
        self.n_qubits * (self.reps + 1)
    }
}

/// A normalized complex amplitude vector over the 2^n computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros basis state |0...0>.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("state needs n_qubits >= 1".into()));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wrap externally produced amplitudes, checking the two invariants:
    /// power-of-two length and unit norm within [`NORM_TOL`].
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "state norm^2 = {norm_sqr} deviates from 1 beyond {NORM_TOL}"
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// One primitive circuit operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H { qubit: usize },
    Ry { qubit: usize, angle: f64 },
    Rz { qubit: usize, angle: f64 },
    Cx { control: usize, target: usize },
}

fn check_qubit(q: usize, n_qubits: usize) -> Result<()> {
    if q >= n_qubits {
        return Err(Error::InvalidArgument(format!(
            "qubit index {q} out of range for {n_qubits} qubits"
        )));
    }
    Ok(())
}

fn apply_single(amps: &mut [Complex64], q: usize, m: [[Complex64; 2]; 2]) {
    let bit = 1usize << q;
    for base in 0..amps.len() {
        if base & bit == 0 {
            let hi = base | bit;
            let a0 = amps[base];
            let a1 = amps[hi];
            amps[base] = m[0][0] * a0 + m[0][1] * a1;
            amps[hi] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

fn apply_in_place(amps: &mut [Complex64], n_qubits: usize, gate: &Gate) -> Result<()> {
    match *gate {
        Gate::H { qubit } => {
            check_qubit(qubit, n_qubits)?;
            let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
            apply_single(amps, qubit, [[h, h], [h, -h]]);
        }
        Gate::Ry { qubit, angle } => {
            check_qubit(qubit, n_qubits)?;
            let c = Complex64::new((angle / 2.0).cos(), 0.0);
            let s = Complex64::new((angle / 2.0).sin(), 0.0);
            apply_single(amps, qubit, [[c, -s], [s, c]]);
        }
        Gate::Rz { qubit, angle } => {
            check_qubit(qubit, n_qubits)?;
            let ph = Complex64::from_polar(1.0, angle / 2.0);
            let z = Complex64::new(0.0, 0.0);
            apply_single(amps, qubit, [[ph.conj(), z], [z, ph]]);
        }
        Gate::Cx { control, target } => {
            check_qubit(control, n_qubits)?;
            check_qubit(target, n_qubits)?;
            if control == target {
                return Err(Error::InvalidArgument(
                    "CX control and target must differ".into(),
                ));
            }
            let cbit = 1usize << control;
            let tbit = 1usize << target;
            for idx in 0..amps.len() {
                if idx & cbit != 0 && idx & tbit == 0 {
                    amps.swap(idx, idx | tbit);
                }
            }
        }
    }
    Ok(())
}

/// Apply one gate, returning the new state. Norm is preserved to round-off.
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let mut out = state.clone();
    apply_in_place(&mut out.amps, out.n_qubits, gate)?;
    Ok(out)
}

fn run_circuit(state: &mut StateVector, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
    for g in gates {
        apply_in_place(&mut state.amps, state.n_qubits, &g)?;
    }
    Ok(())
}

/// Gate sequence of one data-encoding block, exposed so oracle tests can
/// replay the exact same circuit through an independent dense-matrix route.
pub fn zz_feature_map_gates(x: &[f64], spec: &FeatureMapSpec) -> Result<Vec<Gate>> {
    if x.len() != spec.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "feature map expects {} angles, got {}",
            spec.n_qubits,
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("feature map angles must be finite".into()));
    }
    let pairs = spec.entanglement.pairs(spec.n_qubits);
    let mut gates = Vec::new();
    for _ in 0..spec.reps {
        for q in 0..spec.n_qubits {
            gates.push(Gate::H { qubit: q });
        }
        for q in 0..spec.n_qubits {
            gates.push(Gate::Rz { qubit: q, angle: 2.0 * x[q] });
        }
        for &(i, j) in &pairs {
            let angle = 2.0 * (std::f64::consts::PI - x[i]) * (std::f64::consts::PI - x[j]);
            gates.push(Gate::Cx { control: i, target: j });
            gates.push(Gate::Rz { qubit: j, angle });
            gates.push(Gate::Cx { control: i, target: j });
        }
    }
    Ok(gates)
}

/// Encode a feature vector into the state U(phi(x))|0...0>.
///
/// One repetition is H on every qubit, RZ(2 x_i) on qubit i, then for every
/// entangled pair (i, j): CX(i, j), RZ(2 (pi - x_i)(pi - x_j)) on j, CX(i, j).
/// Angles wrap, so no input range is enforced.
pub fn zz_feature_map_state(x: &[f64], spec: &FeatureMapSpec) -> Result<StateVector> {
    let mut state = StateVector::zero(spec.n_qubits)?;
    run_circuit(&mut state, zz_feature_map_gates(x, spec)?)?;
    Ok(state)
}

/// Gate sequence of the variational block for a given parameter vector.
pub fn real_amplitudes_gates(theta: &[f64], spec: &AnsatzSpec) -> Result<Vec<Gate>> {
    if theta.len() != spec.n_params() {
        return Err(Error::DimensionMismatch(format!(
            "ansatz expects {} parameters, got {}",
            spec.n_params(),
            theta.len()
        )));
    }
    let pairs = spec.entanglement.pairs(spec.n_qubits);
    let mut gates = Vec::new();
    for layer in 0..=spec.reps {
        for q in 0..spec.n_qubits {
            gates.push(Gate::Ry { qubit: q, angle: theta[layer * spec.n_qubits + q] });
        }
        if layer < spec.reps {
            for &(i, j) in &pairs {
                gates.push(Gate::Cx { control: i, target: j });
            }
        }
    }
    Ok(gates)
}

/// Apply the variational block V(theta) to an input state.
pub fn real_amplitudes_state(
    input: &StateVector,
    theta: &[f64],
    spec: &AnsatzSpec,
) -> Result<StateVector> {
    if input.n_qubits != spec.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "ansatz acts on {} qubits, state has {}",
            spec.n_qubits, input.n_qubits
        )));
    }
    let mut state = input.clone();
    run_circuit(&mut state, real_amplitudes_gates(theta, spec)?)?;
    Ok(state)
}

/// |<a|b>|^2. Symmetric in its arguments to the last bit, and insensitive to
/// global phases on either side.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "fidelity between {}-qubit and {}-qubit states",
            a.n_qubits, b.n_qubits
        )));
    }
    let overlap: Complex64 = a
        .amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(overlap.norm_sqr())
}

/// Exact measurement distribution over the 2^n basis states.
pub fn measure_probs(state: &StateVector) -> Vec<f64> {
    state.amps.iter().map(|a| a.norm_sqr()).collect()
}
