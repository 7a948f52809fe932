//! Independent reference implementations used as test oracles.
//!
//! These deliberately avoid the production evolution path: the density
//! oracle embeds every operator into the full space with Kronecker
//! products and multiplies matrices; the state-vector oracle simulates
//! noiseless circuits as pure states.

use qem_core::circuit::{Gate, GateKind, Param, QuantumCircuit};
use qem_core::complex::{ops, Complex64, ComplexMatrix};
use qem_core::noise::{apply_channel, NoiseModel};

/// Full-dimension unitary for a gate, built by Kronecker embedding.
pub fn embedded_unitary(circuit: &QuantumCircuit, gate: &Gate, n_qubits: usize) -> ComplexMatrix {
    let resolve = |p: Param| circuit.resolve(p);
    if gate.kind == GateKind::Cz {
        let qs: Vec<usize> = gate.qubits().collect();
        let dim = 1usize << n_qubits;
        let (ma, mb) = (
            1usize << (n_qubits - 1 - qs[0]),
            1usize << (n_qubits - 1 - qs[1]),
        );
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            let sign = if i & ma != 0 && i & mb != 0 { -1.0 } else { 1.0 };
            data[i * dim + i] = Complex64::new(sign, 0.0);
        }
        return ComplexMatrix::new(dim, dim, data);
    }
    let u2 = match gate.kind {
        GateKind::X => ops::pauli_x(),
        GateKind::Y => ops::pauli_y(),
        GateKind::Z => ops::pauli_z(),
        GateKind::I => ops::identity2(),
        GateKind::Ry => ops::ry(resolve(gate.params()[0])),
        GateKind::Rz => ops::rz(resolve(gate.params()[0])),
        GateKind::Rot => ops::rot(
            resolve(gate.params()[0]),
            resolve(gate.params()[1]),
            resolve(gate.params()[2]),
        ),
        GateKind::Cz => unreachable!(),
    };
    let q = gate.qubits().next().unwrap();
    ComplexMatrix::identity(1 << q)
        .kron(&u2)
        .kron(&ComplexMatrix::identity(1 << (n_qubits - 1 - q)))
}

/// Reference noisy evolution: embedded-operator arithmetic with the public
/// `apply_channel`, following the same event order as the simulator (noise
/// on each acted qubit, gate, noise again; bare gates skip noise).
pub fn naive_density(circuit: &QuantumCircuit, noise: &NoiseModel) -> ComplexMatrix {
    let n = circuit.n_qubits();
    let dim = 1usize << n;
    let mut rho = ComplexMatrix::basis_density(dim, 0);
    let trivial = noise.channel.is_trivial();
    for gate in circuit.flat_gates() {
        let noisy = !trivial && !gate.bare;
        if noisy {
            for q in gate.qubits() {
                rho = apply_channel(&rho, &noise.channel, q, n).unwrap();
            }
        }
        let u = embedded_unitary(circuit, gate, n);
        rho = u.matmul(&rho).unwrap().matmul(&u.dagger()).unwrap();
        if noisy {
            for q in gate.qubits() {
                rho = apply_channel(&rho, &noise.channel, q, n).unwrap();
            }
        }
    }
    rho
}

/// Noiseless pure-state simulation; returns the final state vector.
pub fn statevector(circuit: &QuantumCircuit) -> Vec<Complex64> {
    let n = circuit.n_qubits();
    let dim = 1usize << n;
    let mut state = vec![Complex64::new(0.0, 0.0); dim];
    state[0] = Complex64::new(1.0, 0.0);
    for gate in circuit.flat_gates() {
        let u = embedded_unitary(circuit, gate, n);
        let mut next = vec![Complex64::new(0.0, 0.0); dim];
        for (i, out) in next.iter_mut().enumerate() {
            for k in 0..dim {
                *out += u.get(i, k) * state[k];
            }
        }
        state = next;
    }
    state
}

/// Z expectations of a pure state.
pub fn statevector_z(state: &[Complex64], n_qubits: usize) -> Vec<f64> {
    (0..n_qubits)
        .map(|q| {
            let mask = 1usize << (n_qubits - 1 - q);
            state
                .iter()
                .enumerate()
                .map(|(i, amp)| {
                    let sign = if i & mask == 0 { 1.0 } else { -1.0 };
                    sign * amp.norm_sqr()
                })
                .sum()
        })
        .collect()
}

/// Density matrix |psi><psi| of a pure state.
pub fn density_of(state: &[Complex64]) -> ComplexMatrix {
    let dim = state.len();
    let mut data = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            data.push(state[i] * state[j].conj());
        }
    }
    ComplexMatrix::new(dim, dim, data)
}

/// Random Hermitian unit-trace positive matrix rho = A A^dagger / tr.
pub fn random_density(dim: usize, rng: &mut impl rand::Rng) -> ComplexMatrix {
    let mut data = Vec::with_capacity(dim * dim);
    for _ in 0..dim * dim {
        data.push(Complex64::new(
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
        ));
    }
    let a = ComplexMatrix::new(dim, dim, data);
    let rho = a.matmul(&a.dagger()).unwrap();
    let trace = rho.trace().unwrap().re;
    rho.scale(Complex64::new(1.0 / trace, 0.0))
}

/// Random parameterized circuit on `n_qubits`, with group barriers so idle
/// windows of length >= 2 occur.
pub fn random_circuit(n_qubits: usize, rng: &mut impl rand::Rng) -> QuantumCircuit {
    let n_groups = rng.gen_range(2..5);
    let mut groups: Vec<Vec<Gate>> = Vec::new();
    for _ in 0..n_groups {
        let mut gates = Vec::new();
        // One busy qubit per group keeps other qubits idle across the
        // group's moments.
        let busy = rng.gen_range(0..n_qubits);
        let depth = rng.gen_range(2..5);
        for _ in 0..depth {
            match rng.gen_range(0..4) {
                0 => gates.push(Gate::ry(busy, Param::Fixed(rng.gen::<f64>() * 3.0))),
                1 => gates.push(Gate::rz(busy, Param::Fixed(rng.gen::<f64>() * 3.0))),
                2 => gates.push(Gate::rot(
                    busy,
                    Param::Fixed(rng.gen::<f64>()),
                    Param::Fixed(rng.gen::<f64>()),
                    Param::Fixed(rng.gen::<f64>()),
                )),
                _ if n_qubits >= 2 => {
                    let other = (busy + 1) % n_qubits;
                    gates.push(Gate::cz(busy.min(other), busy.max(other)));
                }
                _ => gates.push(Gate::ry(busy, Param::Fixed(rng.gen::<f64>()))),
            }
        }
        groups.push(gates);
    }
    let slices: Vec<&[Gate]> = groups.iter().map(Vec::as_slice).collect();
    QuantumCircuit::build_moment_groups(&slices, n_qubits).unwrap().0
}

/// Central finite differences of f at x with step h.
pub fn finite_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Eigenvalues of a 2x2 Hermitian matrix (closed form).
pub fn eigenvalues_2x2(m: &ComplexMatrix) -> [f64; 2] {
    let a = m.get(0, 0).re;
    let d = m.get(1, 1).re;
    let b = m.get(0, 1);
    let mean = (a + d) / 2.0;
    let disc = ((a - d) / 2.0).powi(2) + b.norm_sqr();
    [mean - disc.sqrt(), mean + disc.sqrt()]
}

/// Smallest eigenvalue lower bound for a Hermitian matrix via Gershgorin
/// discs; cheap and sufficient for positivity checks at 8x8 scale.
pub fn gershgorin_lower_bound(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    (0..n)
        .map(|i| {
            let radius: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| m.get(i, j).norm())
                .sum();
            m.get(i, i).re - radius
        })
        .fold(f64::INFINITY, f64::min)
}
