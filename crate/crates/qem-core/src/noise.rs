//! Single-qubit Kraus noise channels and the policy that attaches them
//! to circuit execution.
//!
//! Every channel satisfies the completeness relation
//! `sum_i E_i^dagger E_i = I`, which keeps the induced map completely
//! positive and trace preserving, and acts as the identity map at p = 0.

use serde::{Deserialize, Serialize};

use crate::complex::{ops, Complex64, ComplexMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseChannelKind {
    Depolarizing,
    AmplitudeDamping,
    PhaseDamping,
    BitFlip,
    PhaseFlip,
    None,
}

impl NoiseChannelKind {
    /// All physical (non-trivial) channel kinds, in grid order.
    pub const ALL: [NoiseChannelKind; 5] = [
        NoiseChannelKind::Depolarizing,
        NoiseChannelKind::AmplitudeDamping,
        NoiseChannelKind::PhaseDamping,
        NoiseChannelKind::BitFlip,
        NoiseChannelKind::PhaseFlip,
    ];

    /// The lowercase snake-case name used in config and results files.
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseChannelKind::Depolarizing => "depolarizing",
            NoiseChannelKind::AmplitudeDamping => "amplitude_damping",
            NoiseChannelKind::PhaseDamping => "phase_damping",
            NoiseChannelKind::BitFlip => "bit_flip",
            NoiseChannelKind::PhaseFlip => "phase_flip",
            NoiseChannelKind::None => "none",
        }
    }
}

impl std::fmt::Display for NoiseChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single-qubit noise channel: a Kraus operator set parameterized by the
/// error probability p.
#[derive(Debug, Clone)]
pub struct NoiseChannel {
    kind: NoiseChannelKind,
    p: f64,
    kraus: Vec<ComplexMatrix>,
}

impl NoiseChannel {
    /// Construct the channel's Kraus set for error probability `p` in [0, 1].
    pub fn new(kind: NoiseChannelKind, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::InvalidProbability(p));
        }
        let q = (1.0 - p).sqrt();
        let s = p.sqrt();
        let scale = |m: ComplexMatrix, f: f64| m.scale(Complex64::new(f, 0.0));
        let kraus = match kind {
            NoiseChannelKind::Depolarizing => {
                let f = (p / 3.0).sqrt();
                vec![
                    scale(ops::identity2(), q),
                    scale(ops::pauli_x(), f),
                    scale(ops::pauli_y(), f),
                    scale(ops::pauli_z(), f),
                ]
            }
            NoiseChannelKind::BitFlip => vec![scale(ops::identity2(), q), scale(ops::pauli_x(), s)],
            NoiseChannelKind::PhaseFlip => {
                vec![scale(ops::identity2(), q), scale(ops::pauli_z(), s)]
            }
            NoiseChannelKind::AmplitudeDamping => vec![
                ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, q]),
                ComplexMatrix::from_real(2, 2, &[0.0, s, 0.0, 0.0]),
            ],
            NoiseChannelKind::PhaseDamping => vec![
                ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, q]),
                ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 0.0, s]),
            ],
            NoiseChannelKind::None => vec![ops::identity2()],
        };
        Ok(Self { kind, p, kraus })
    }

    pub fn noiseless() -> Self {
        Self::new(NoiseChannelKind::None, 0.0).expect("p = 0 is always valid")
    }

    pub fn kind(&self) -> NoiseChannelKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// True when the channel acts as the identity map (kind None or p = 0).
    pub fn is_trivial(&self) -> bool {
        self.kind == NoiseChannelKind::None || self.p == 0.0
    }

    /// sum_i E_i^dagger E_i, which must equal the identity.
    pub fn completeness(&self) -> ComplexMatrix {
        let mut sum = ComplexMatrix::zeros(2, 2);
        for e in &self.kraus {
            sum = sum.add(&e.dagger().matmul(e).unwrap()).unwrap();
        }
        sum
    }
}

/// Where noise fires relative to gates. The benchmark applies the channel
/// on every qubit a gate acts on, both before and after the gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NoisePlacement {
    #[default]
    BeforeAndAfterEachGate,
}

/// A channel plus its placement policy.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    pub channel: NoiseChannel,
    pub placement: NoisePlacement,
}

impl NoiseModel {
    pub fn new(channel: NoiseChannel) -> Self {
        Self {
            channel,
            placement: NoisePlacement::BeforeAndAfterEachGate,
        }
    }

    pub fn noiseless() -> Self {
        Self::new(NoiseChannel::noiseless())
    }
}

/// Apply `channel` to qubit `target` of an n-qubit density matrix:
/// rho' = sum_i (embedded E_i) rho (embedded E_i)^dagger, with the Kraus
/// operators embedded through Kronecker products with the identity.
pub fn apply_channel(
    rho: &ComplexMatrix,
    channel: &NoiseChannel,
    target: usize,
    n_qubits: usize,
) -> Result<ComplexMatrix> {
    if target >= n_qubits {
        return Err(Error::QubitOutOfRange {
            index: target,
            n_qubits,
        });
    }
    let dim = 1usize << n_qubits;
    if rho.rows() != dim || rho.cols() != dim {
        return Err(Error::NonSquare {
            rows: rho.rows(),
            cols: rho.cols(),
        });
    }
    let left = ComplexMatrix::identity(1 << target);
    let right = ComplexMatrix::identity(1 << (n_qubits - 1 - target));
    let mut out = ComplexMatrix::zeros(dim, dim);
    for e in channel.kraus() {
        let embedded = left.kron(e).kron(&right);
        let term = embedded.matmul(rho)?.matmul(&embedded.dagger())?;
        out = out.add(&term)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    fn plus_state() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5])
    }

    #[test]
    fn completeness_holds_for_all_kinds_and_probabilities() {
        for kind in NoiseChannelKind::ALL {
            for p in [0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0] {
                let ch = NoiseChannel::new(kind, p).unwrap();
                assert!(
                    ch.completeness().approx_eq(&ComplexMatrix::identity(2), EPS),
                    "{kind} p={p}"
                );
            }
        }
    }

    #[test]
    fn p_zero_acts_as_identity_on_plus_state() {
        for kind in NoiseChannelKind::ALL {
            let ch = NoiseChannel::new(kind, 0.0).unwrap();
            let out = apply_channel(&plus_state(), &ch, 0, 1).unwrap();
            assert!(out.approx_eq(&plus_state(), EPS), "{kind}");
        }
    }

    #[test]
    fn probability_out_of_range_is_rejected() {
        assert!(NoiseChannel::new(NoiseChannelKind::BitFlip, -0.1).is_err());
        assert!(NoiseChannel::new(NoiseChannelKind::BitFlip, 1.1).is_err());
        assert!(NoiseChannel::new(NoiseChannelKind::BitFlip, f64::NAN).is_err());
    }

    #[test]
    fn bit_flip_p1_flips_ground_state() {
        let ch = NoiseChannel::new(NoiseChannelKind::BitFlip, 1.0).unwrap();
        let out = apply_channel(&ComplexMatrix::basis_density(2, 0), &ch, 0, 1).unwrap();
        assert!(out.approx_eq(&ComplexMatrix::basis_density(2, 1), EPS));
    }

    #[test]
    fn amplitude_damping_p1_decays_to_ground() {
        let ch = NoiseChannel::new(NoiseChannelKind::AmplitudeDamping, 1.0).unwrap();
        let out = apply_channel(&ComplexMatrix::basis_density(2, 1), &ch, 0, 1).unwrap();
        assert!(out.approx_eq(&ComplexMatrix::basis_density(2, 0), EPS));
    }

    #[test]
    fn depolarizing_three_quarters_gives_maximally_mixed() {
        // rho + X rho X + Y rho Y + Z rho Z = 2 tr(rho) I, so p = 3/4 maps
        // every state to I/2.
        let ch = NoiseChannel::new(NoiseChannelKind::Depolarizing, 0.75).unwrap();
        let rho = ComplexMatrix::new(
            2,
            2,
            vec![
                Complex64::new(0.7, 0.0),
                Complex64::new(0.2, 0.1),
                Complex64::new(0.2, -0.1),
                Complex64::new(0.3, 0.0),
            ],
        );
        let out = apply_channel(&rho, &ch, 0, 1).unwrap();
        let half_identity = ComplexMatrix::identity(2).scale(Complex64::new(0.5, 0.0));
        assert!(out.approx_eq(&half_identity, 1e-10));
    }

    #[test]
    fn phase_damping_attenuates_off_diagonals() {
        let p = 0.3;
        let ch = NoiseChannel::new(NoiseChannelKind::PhaseDamping, p).unwrap();
        let rho = ComplexMatrix::new(
            2,
            2,
            vec![
                Complex64::new(0.6, 0.0),
                Complex64::new(0.25, 0.15),
                Complex64::new(0.25, -0.15),
                Complex64::new(0.4, 0.0),
            ],
        );
        let out = apply_channel(&rho, &ch, 0, 1).unwrap();
        let damp = (1.0 - p).sqrt();
        assert!((out.get(0, 0) - rho.get(0, 0)).norm() < EPS);
        assert!((out.get(1, 1) - rho.get(1, 1)).norm() < EPS);
        assert!((out.get(0, 1) - rho.get(0, 1) * damp).norm() < EPS);
    }

    #[test]
    fn phase_flip_preserves_computational_probabilities() {
        for p in [0.1, 0.5, 1.0] {
            let ch = NoiseChannel::new(NoiseChannelKind::PhaseFlip, p).unwrap();
            let rho = ComplexMatrix::from_real(2, 2, &[0.8, 0.0, 0.0, 0.2]);
            let out = apply_channel(&rho, &ch, 0, 1).unwrap();
            assert!(out.approx_eq(&rho, EPS));
        }
    }

    #[test]
    fn depolarizing_scales_coherences_by_expected_factor() {
        let p = 0.1;
        let ch = NoiseChannel::new(NoiseChannelKind::Depolarizing, p).unwrap();
        let out = apply_channel(&plus_state(), &ch, 0, 1).unwrap();
        let factor = 1.0 - 4.0 * p / 3.0; // = 13/15 at p = 0.1
        assert!((out.get(0, 1).re - 0.5 * factor).abs() < EPS);
    }

    #[test]
    fn apply_channel_rejects_bad_target() {
        let ch = NoiseChannel::noiseless();
        let rho = ComplexMatrix::identity(2);
        assert!(apply_channel(&rho, &ch, 1, 1).is_err());
    }

    #[test]
    fn channel_embedding_on_second_qubit_of_two() {
        let ch = NoiseChannel::new(NoiseChannelKind::BitFlip, 1.0).unwrap();
        let rho = ComplexMatrix::basis_density(4, 0); // |00>
        let out = apply_channel(&rho, &ch, 1, 2).unwrap();
        assert!(out.approx_eq(&ComplexMatrix::basis_density(4, 1), EPS)); // |01>
    }

    #[test]
    fn kind_names_serialize_snake_case() {
        assert_eq!(
            serde_json::to_string(&NoiseChannelKind::AmplitudeDamping).unwrap(),
            "\"amplitude_damping\""
        );
        assert_eq!(NoiseChannelKind::PhaseFlip.as_str(), "phase_flip");
    }
}
