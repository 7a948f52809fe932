//! Probabilistic error cancellation for depolarizing noise: statistically
//! invert the channel by sampling Pauli corrections from a quasiprobability
//! representation of the inverse map.
//!
//! The depolarizing channel scales the X, Y, Z components of the Bloch
//! vector by 1 - 4p/3 and leaves the identity component alone. Inverting it
//! in that picture gives the signed mixture
//! eta_I = (3-p)/(3-4p), eta_X = eta_Y = eta_Z = -p/(3-4p),
//! with one-norm gamma = (3+2p)/(3-4p); the inverse exists only for p < 3/4.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::{clamp_values, MitigatedResult};
use crate::circuit::{Gate, QuantumCircuit};
use crate::error::{Error, Result};
use crate::seeding;
use crate::simulator::{CircuitExecutor, ExpectationResult};

/// Quasiprobability representation of the inverse depolarizing channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PecRepresentation {
    pub p: f64,
    pub eta_i: f64,
    pub eta_x: f64,
    pub eta_y: f64,
    pub eta_z: f64,
    /// One-norm sum |eta|; the per-location sampling overhead.
    pub gamma: f64,
}

impl PecRepresentation {
    /// Signed coefficients in (I, X, Y, Z) order.
    pub fn eta(&self) -> [f64; 4] {
        [self.eta_i, self.eta_x, self.eta_y, self.eta_z]
    }

    /// Large-gamma representations are valid but statistically expensive;
    /// surface a warning the caller can log.
    pub fn variance_warning(&self) -> Option<String> {
        (self.gamma >= 2.0).then(|| {
            format!(
                "pec representation for p = {} has gamma = {:.3}; estimator variance grows as gamma^(2L)",
                self.p, self.gamma
            )
        })
    }
}

/// Invert the depolarizing channel in the Pauli-transfer picture.
/// Fails for p >= 3/4, where the inverse is unbounded or undefined.
pub fn pec_representation(p: f64) -> Result<PecRepresentation> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidProbability(p));
    }
    if p >= 0.75 {
        return Err(Error::NotRepresentable(p));
    }
    let denom = 3.0 - 4.0 * p;
    let eta_i = (3.0 - p) / denom;
    let eta_pauli = -p / denom;
    Ok(PecRepresentation {
        p,
        eta_i,
        eta_x: eta_pauli,
        eta_y: eta_pauli,
        eta_z: eta_pauli,
        gamma: (3.0 + 2.0 * p) / denom,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PecConfig {
    pub representation: PecRepresentation,
    pub num_samples: u32,
    /// Extra entropy mixed into every per-call seed derivation.
    pub seed: u64,
}

impl PecConfig {
    pub fn new(representation: PecRepresentation, num_samples: u32) -> Self {
        Self {
            representation,
            num_samples: num_samples.max(1),
            seed: 0,
        }
    }
}

/// Monte-Carlo estimate of the noise-free expectations.
///
/// For each sample, every noise location of the circuit (each gate-qubit,
/// before and after, mirroring the noise model) draws a Pauli correction
/// from |eta|/gamma and multiplies a running sign by sign(eta); the sampled
/// corrections are inserted as bare gates (ideal recovery operations, not
/// subject to noise). The estimate is gamma^L * mean(sign * value) over the
/// samples, where L is the number of noise locations.
pub fn pec_expectation(
    circuit: &QuantumCircuit,
    config: &PecConfig,
    executor: &dyn CircuitExecutor,
    seed: u64,
) -> Result<MitigatedResult> {
    let rep = &config.representation;
    let gamma = rep.gamma;
    let eta = rep.eta();
    let probs: Vec<f64> = eta.iter().map(|e| e.abs() / gamma).collect();

    let base_gates = circuit.flat_gates();
    let locations: usize = base_gates
        .iter()
        .filter(|g| !g.bare)
        .map(|g| 2 * g.kind.arity())
        .sum();
    let scale = gamma.powi(locations as i32);

    let call_seed = seeding::derive(config.seed, seed);
    let n_samples = config.num_samples as usize;
    let mut sums: Vec<f64> = Vec::new();
    let mut sq_sums: Vec<f64> = Vec::new();

    for s in 0..n_samples {
        let mut rng = ChaCha12Rng::seed_from_u64(seeding::derive(call_seed, 2 * s as u64));
        let mut sign = 1.0f64;
        let mut gates: Vec<Gate> = Vec::with_capacity(base_gates.len());
        for gate in base_gates {
            if gate.bare {
                gates.push(*gate);
                continue;
            }
            // Before-gate corrections. The depolarizing channel commutes with
            // unitary conjugation, so placement on either side of the noise
            // event is equivalent.
            for q in gate.qubits() {
                if let Some(correction) = draw_correction(&mut rng, &probs, &eta, &mut sign, q) {
                    gates.push(correction);
                }
            }
            gates.push(*gate);
            for q in gate.qubits() {
                if let Some(correction) = draw_correction(&mut rng, &probs, &eta, &mut sign, q) {
                    gates.push(correction);
                }
            }
        }
        let sampled = QuantumCircuit::build_moments(&gates, circuit.n_qubits())?
            .with_bindings(circuit.bindings().to_vec());
        let r = executor.expectation(&sampled, seeding::derive(call_seed, 2 * s as u64 + 1))?;
        if sums.is_empty() {
            sums = vec![0.0; r.values.len()];
            sq_sums = vec![0.0; r.values.len()];
        }
        for (o, v) in r.values.iter().enumerate() {
            let contribution = scale * sign * v;
            sums[o] += contribution;
            sq_sums[o] += contribution * contribution;
        }
    }

    let n = n_samples as f64;
    let mut values: Vec<f64> = sums.iter().map(|s| s / n).collect();
    let variance: Vec<f64> = sums
        .iter()
        .zip(&sq_sums)
        .map(|(s, sq)| {
            let mean = s / n;
            ((sq / n - mean * mean).max(0.0)) / n
        })
        .collect();
    let clamped = clamp_values(&mut values);
    Ok(MitigatedResult {
        result: ExpectationResult {
            values,
            variance_estimate: Some(variance),
        },
        clamped,
    })
}

fn draw_correction(
    rng: &mut ChaCha12Rng,
    probs: &[f64],
    eta: &[f64; 4],
    sign: &mut f64,
    qubit: usize,
) -> Option<Gate> {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut drawn = 3usize;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            drawn = i;
            break;
        }
    }
    if eta[drawn] < 0.0 {
        *sign = -*sign;
    }
    match drawn {
        0 => None,
        1 => Some(Gate::x(qubit).bare()),
        2 => Some(Gate::y(qubit).bare()),
        _ => Some(Gate::z(qubit).bare()),
    }
}
