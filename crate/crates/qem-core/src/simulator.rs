//! Noisy density-matrix evolution, Z-basis expectation values, and
//! finite-shot sampling.
//!
//! Execution starts from |0...0><0...0| and, for every gate in moment
//! order, applies the noise channel to each qubit the gate acts on, then
//! the gate unitary, then the channel again on the same qubits. Gates
//! marked bare skip the noise entirely.
//!
//! Single-qubit maps are applied through a 4x4 block superoperator acting
//! on (row-bit, column-bit) sub-blocks of the density matrix, which keeps
//! the per-gate cost linear in the matrix size. Noise and gate superoperators
//! on the same qubit are composed once per gate, so a noisy single-qubit
//! gate costs one sweep instead of three.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::Binomial;

use crate::circuit::{Gate, GateKind, QuantumCircuit};
use crate::complex::{Complex64, ComplexMatrix};
use crate::error::{Error, Result};
use crate::noise::NoiseModel;

/// Hard cap on simulated width; the density matrix is 4^n entries.
pub const DEFAULT_MAX_QUBITS: usize = 10;

/// Execution settings: `shots: None` returns analytic expectations,
/// `shots: Some(n)` samples n computational-basis outcomes.
#[derive(Debug, Clone)]
pub struct SimulatorConfig {
    pub shots: Option<u64>,
    pub seed: u64,
    pub noise: NoiseModel,
}

impl SimulatorConfig {
    pub fn analytic(noise: NoiseModel) -> Self {
        Self {
            shots: None,
            seed: 0,
            noise,
        }
    }

    /// The shot budget used for the benchmark runs.
    pub const BENCH_SHOTS: u64 = 8192;
}

/// Per-qubit Z expectation values, one per measured qubit, with an optional
/// shot-variance estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationResult {
    pub values: Vec<f64>,
    pub variance_estimate: Option<Vec<f64>>,
}

// ---------------------------------------------------------------------------
// Block kernels
//
// Every single-qubit map acts independently on the 2x2 sub-blocks
// (a, b; c, d) of the density matrix selected by one qubit's row/column
// bit, so the hot path never forms embedded operators. The five noise
// channels and the gate set all have closed-form block actions.
// ---------------------------------------------------------------------------

/// Visit each (row-pair, column-pair) block of the qubit selected by `mask`
/// and replace it with `f(a, b, c, d)`.
#[inline(always)]
fn for_each_block<F>(rho: &mut [Complex64], dim: usize, mask: usize, mut f: F)
where
    F: FnMut(Complex64, Complex64, Complex64, Complex64) -> (Complex64, Complex64, Complex64, Complex64),
{
    let low = mask - 1;
    let half = dim / 2;
    for ri in 0..half {
        let r0 = ((ri & !low) << 1) | (ri & low);
        let r1 = r0 | mask;
        for ci in 0..half {
            let c0 = ((ci & !low) << 1) | (ci & low);
            let c1 = c0 | mask;
            let (a, b, c, d) = (
                rho[r0 * dim + c0],
                rho[r0 * dim + c1],
                rho[r1 * dim + c0],
                rho[r1 * dim + c1],
            );
            let (a2, b2, c2, d2) = f(a, b, c, d);
            rho[r0 * dim + c0] = a2;
            rho[r0 * dim + c1] = b2;
            rho[r1 * dim + c0] = c2;
            rho[r1 * dim + c1] = d2;
        }
    }
}

/// Precomputed block action of one noise channel at fixed p.
#[derive(Debug, Clone, Copy)]
enum ChannelKernel {
    /// a' = keep*a + mix*d, d' = keep*d + mix*a, off-diagonals scaled.
    Depolarizing { keep: f64, mix: f64, off: f64 },
    /// Populations and coherences mix with their X-conjugates.
    BitFlip { keep: f64, mix: f64 },
    /// Coherences scaled by 1 - 2p.
    PhaseFlip { off: f64 },
    /// a' = a + p*d, d' = (1-p)*d, coherences scaled by sqrt(1-p).
    AmplitudeDamping { p: f64, off: f64 },
    /// Coherences scaled by sqrt(1-p); populations untouched.
    PhaseDamping { off: f64 },
}

impl ChannelKernel {
    fn from_channel(channel: &crate::noise::NoiseChannel) -> Option<Self> {
        use crate::noise::NoiseChannelKind as K;
        if channel.is_trivial() {
            return None;
        }
        let p = channel.p();
        Some(match channel.kind() {
            K::Depolarizing => ChannelKernel::Depolarizing {
                keep: 1.0 - 2.0 * p / 3.0,
                mix: 2.0 * p / 3.0,
                off: 1.0 - 4.0 * p / 3.0,
            },
            K::BitFlip => ChannelKernel::BitFlip {
                keep: 1.0 - p,
                mix: p,
            },
            K::PhaseFlip => ChannelKernel::PhaseFlip { off: 1.0 - 2.0 * p },
            K::AmplitudeDamping => ChannelKernel::AmplitudeDamping {
                p,
                off: (1.0 - p).sqrt(),
            },
            K::PhaseDamping => ChannelKernel::PhaseDamping {
                off: (1.0 - p).sqrt(),
            },
            K::None => return None,
        })
    }

    #[inline(always)]
    fn apply(self, rho: &mut [Complex64], dim: usize, mask: usize) {
        match self {
            ChannelKernel::Depolarizing { keep, mix, off } => {
                for_each_block(rho, dim, mask, |a, b, c, d| {
                    (
                        a * keep + d * mix,
                        b * off,
                        c * off,
                        d * keep + a * mix,
                    )
                });
            }
            ChannelKernel::BitFlip { keep, mix } => {
                for_each_block(rho, dim, mask, |a, b, c, d| {
                    (
                        a * keep + d * mix,
                        b * keep + c * mix,
                        c * keep + b * mix,
                        d * keep + a * mix,
                    )
                });
            }
            ChannelKernel::PhaseFlip { off } | ChannelKernel::PhaseDamping { off } => {
                for_each_block(rho, dim, mask, |a, b, c, d| (a, b * off, c * off, d));
            }
            ChannelKernel::AmplitudeDamping { p, off } => {
                for_each_block(rho, dim, mask, |a, b, c, d| {
                    (a + d * p, b * off, c * off, d * (1.0 - p))
                });
            }
        }
    }
}

/// Conjugation by RY(theta), a real rotation.
#[inline(always)]
fn apply_ry(rho: &mut [Complex64], dim: usize, mask: usize, theta: f64) {
    let (s, co) = (theta / 2.0).sin_cos();
    for_each_block(rho, dim, mask, |a, b, c, d| {
        // Row transform by U, then column transform by U^T.
        let (a1, c1) = (a * co - c * s, a * s + c * co);
        let (b1, d1) = (b * co - d * s, b * s + d * co);
        (
            a1 * co - b1 * s,
            a1 * s + b1 * co,
            c1 * co - d1 * s,
            c1 * s + d1 * co,
        )
    });
}

/// Conjugation by RZ(theta): pure phases on the coherences.
#[inline(always)]
fn apply_rz(rho: &mut [Complex64], dim: usize, mask: usize, theta: f64) {
    let phase = Complex64::from_polar(1.0, -theta);
    let phase_conj = phase.conj();
    for_each_block(rho, dim, mask, |a, b, c, d| {
        (a, b * phase, c * phase_conj, d)
    });
}

#[inline(always)]
fn apply_pauli(rho: &mut [Complex64], dim: usize, mask: usize, kind: GateKind) {
    match kind {
        GateKind::X => for_each_block(rho, dim, mask, |a, b, c, d| (d, c, b, a)),
        GateKind::Y => for_each_block(rho, dim, mask, |a, b, c, d| (d, -c, -b, a)),
        GateKind::Z => for_each_block(rho, dim, mask, |a, b, c, d| (a, -b, -c, d)),
        GateKind::I => {}
        _ => unreachable!("not a fixed single-qubit gate"),
    }
}

/// CZ conjugation: flips the sign of entries whose row and column index
/// disagree on the doubly-excited subspace.
fn apply_cz(rho: &mut [Complex64], dim: usize, mask_a: usize, mask_b: usize) {
    let both = mask_a | mask_b;
    for r in 0..dim {
        let sr = r & both == both;
        for c in 0..dim {
            let sc = c & both == both;
            if sr != sc {
                rho[r * dim + c] = -rho[r * dim + c];
            }
        }
    }
}

#[inline(always)]
fn apply_gate(rho: &mut [Complex64], dim: usize, mask: usize, circuit: &QuantumCircuit, gate: &Gate) {
    match gate.kind {
        GateKind::X | GateKind::Y | GateKind::Z | GateKind::I => {
            apply_pauli(rho, dim, mask, gate.kind)
        }
        GateKind::Ry => apply_ry(rho, dim, mask, circuit.resolve(gate.params()[0])),
        GateKind::Rz => apply_rz(rho, dim, mask, circuit.resolve(gate.params()[0])),
        GateKind::Rot => {
            // RZ(omega) RY(theta) RZ(phi); RZ(phi) acts first.
            apply_rz(rho, dim, mask, circuit.resolve(gate.params()[0]));
            apply_ry(rho, dim, mask, circuit.resolve(gate.params()[1]));
            apply_rz(rho, dim, mask, circuit.resolve(gate.params()[2]));
        }
        GateKind::Cz => unreachable!("CZ is handled by the caller"),
    }
}

// ---------------------------------------------------------------------------
// Evolution
// ---------------------------------------------------------------------------

fn qubit_mask(n_qubits: usize, q: usize) -> usize {
    // Qubit 0 is the most significant index bit, matching the kron convention.
    1 << (n_qubits - 1 - q)
}

fn evolve(circuit: &QuantumCircuit, noise: &NoiseModel) -> Result<Vec<Complex64>> {
    let n = circuit.n_qubits();
    if n > DEFAULT_MAX_QUBITS {
        return Err(Error::WidthExceeded {
            width: n,
            max: DEFAULT_MAX_QUBITS,
        });
    }
    let dim = 1usize << n;
    let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
    rho[0] = Complex64::new(1.0, 0.0);

    let kernel = ChannelKernel::from_channel(&noise.channel);

    // Moment structure does not affect the state map; gates execute in
    // moment order, which is exactly the flat order.
    for gate in circuit.flat_gates() {
        let noisy = kernel.filter(|_| !gate.bare);
        if gate.kind == GateKind::Cz {
            let mut qs = gate.qubits();
            let (a, b) = (qs.next().unwrap(), qs.next().unwrap());
            let (ma, mb) = (qubit_mask(n, a), qubit_mask(n, b));
            if let Some(ch) = noisy {
                ch.apply(&mut rho, dim, ma);
                ch.apply(&mut rho, dim, mb);
            }
            apply_cz(&mut rho, dim, ma, mb);
            if let Some(ch) = noisy {
                ch.apply(&mut rho, dim, ma);
                ch.apply(&mut rho, dim, mb);
            }
        } else {
            let q = gate.qubits().next().unwrap();
            let mask = qubit_mask(n, q);
            if let Some(ch) = noisy {
                ch.apply(&mut rho, dim, mask);
            }
            apply_gate(&mut rho, dim, mask, circuit, gate);
            if let Some(ch) = noisy {
                ch.apply(&mut rho, dim, mask);
            }
        }
    }
    Ok(rho)
}

/// Evolve the circuit under the noise model and return the final density
/// matrix.
pub fn run_density(circuit: &QuantumCircuit, noise: &NoiseModel) -> Result<ComplexMatrix> {
    let dim = 1usize << circuit.n_qubits();
    Ok(ComplexMatrix::new(dim, dim, evolve(circuit, noise)?))
}

/// Analytic per-qubit Z expectations: value_i = tr(Z_{q_i} rho).
pub fn expectation_z(rho: &ComplexMatrix, qubits: &[usize]) -> ExpectationResult {
    let dim = rho.rows();
    let n = dim.trailing_zeros() as usize;
    let values = qubits
        .iter()
        .map(|&q| {
            let mask = qubit_mask(n, q);
            (0..dim)
                .map(|i| {
                    let sign = if i & mask == 0 { 1.0 } else { -1.0 };
                    sign * rho.get(i, i).re
                })
                .sum()
        })
        .collect();
    ExpectationResult {
        values,
        variance_estimate: None,
    }
}

/// Estimate per-qubit Z expectations from `shots` joint computational-basis
/// outcomes drawn from the diagonal of rho. One multinomial draw is shared
/// by all observables, mirroring a full-register measurement per shot.
/// Deterministic for a given seed.
pub fn sample_z(
    rho: &ComplexMatrix,
    qubits: &[usize],
    shots: u64,
    seed: u64,
) -> Result<ExpectationResult> {
    assert!(shots >= 1, "shots must be >= 1");
    let dim = rho.rows();
    let n = dim.trailing_zeros() as usize;

    let mut probs = Vec::with_capacity(dim);
    let mut sum = 0.0;
    for i in 0..dim {
        let p = rho.get(i, i).re;
        if p < -1e-9 {
            return Err(Error::InvalidState { index: i, value: p });
        }
        let p = p.max(0.0);
        probs.push(p);
        sum += p;
    }
    if (sum - 1.0).abs() >= 1e-9 {
        return Err(Error::InvalidState {
            index: 0,
            value: sum,
        });
    }
    for p in &mut probs {
        *p /= sum;
    }

    // Multinomial draw by sequential binomial splitting: O(dim), not O(shots).
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; dim];
    let mut remaining_shots = shots;
    let mut remaining_prob = 1.0f64;
    for i in 0..dim {
        if remaining_shots == 0 {
            break;
        }
        if i == dim - 1 {
            counts[i] = remaining_shots;
            break;
        }
        let cond = (probs[i] / remaining_prob).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining_shots, cond)
            .expect("clamped probability")
            .sample(&mut rng);
        counts[i] = draw;
        remaining_shots -= draw;
        remaining_prob = (remaining_prob - probs[i]).max(f64::MIN_POSITIVE);
    }

    let shots_f = shots as f64;
    let mut values = Vec::with_capacity(qubits.len());
    let mut variances = Vec::with_capacity(qubits.len());
    for &q in qubits {
        let mask = qubit_mask(n, q);
        let ones: u64 = (0..dim).filter(|i| i & mask != 0).map(|i| counts[i]).sum();
        let value = (shots_f - 2.0 * ones as f64) / shots_f;
        values.push(value);
        variances.push((1.0 - value * value) / shots_f);
    }
    Ok(ExpectationResult {
        values,
        variance_estimate: Some(variances),
    })
}

/// Full execution: density evolution followed by analytic expectations or
/// shot sampling over all qubits.
pub fn execute(circuit: &QuantumCircuit, config: &SimulatorConfig) -> Result<ExpectationResult> {
    let rho = run_density(circuit, &config.noise)?;
    let qubits: Vec<usize> = (0..circuit.n_qubits()).collect();
    match config.shots {
        None => Ok(expectation_z(&rho, &qubits)),
        Some(shots) => sample_z(&rho, &qubits, shots, config.seed),
    }
}

// ---------------------------------------------------------------------------
// Executor abstraction
// ---------------------------------------------------------------------------

/// The circuit-evaluation interface every mitigation technique wraps.
/// Implementations must be pure given (circuit, seed).
pub trait CircuitExecutor: Sync {
    fn expectation(&self, circuit: &QuantumCircuit, seed: u64) -> Result<ExpectationResult>;

    /// Total circuit evaluations performed so far (for overhead accounting).
    fn eval_count(&self) -> u64 {
        0
    }
}

/// Density-matrix executor with an evaluation counter.
#[derive(Debug)]
pub struct DensityExecutor {
    pub noise: NoiseModel,
    pub shots: Option<u64>,
    evals: AtomicU64,
}

impl DensityExecutor {
    pub fn new(noise: NoiseModel, shots: Option<u64>) -> Self {
        Self {
            noise,
            shots,
            evals: AtomicU64::new(0),
        }
    }

    pub fn analytic(noise: NoiseModel) -> Self {
        Self::new(noise, None)
    }
}

impl CircuitExecutor for DensityExecutor {
    fn expectation(&self, circuit: &QuantumCircuit, seed: u64) -> Result<ExpectationResult> {
        self.evals.fetch_add(1, Ordering::Relaxed);
        let config = SimulatorConfig {
            shots: self.shots,
            seed,
            noise: self.noise.clone(),
        };
        execute(circuit, &config)
    }

    fn eval_count(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }
}
