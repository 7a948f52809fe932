//! Zero-noise extrapolation: evaluate the circuit at amplified noise
//! scales via global unitary folding and extrapolate each observable back
//! to the zero-noise limit.

use serde::{Deserialize, Serialize};

use super::{clamp_values, MitigatedResult};
use crate::circuit::QuantumCircuit;
use crate::error::{Error, Result};
use crate::seeding;
use crate::simulator::{CircuitExecutor, ExpectationResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    /// Polynomial of degree k-1 through all k points, evaluated at 0.
    #[default]
    Richardson,
    /// Least-squares line, evaluated at 0.
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZneConfig {
    /// Odd fold scales; at least two, all distinct.
    pub scale_factors: Vec<u32>,
    pub extrapolation: Extrapolation,
}

impl Default for ZneConfig {
    fn default() -> Self {
        Self {
            scale_factors: vec![1, 3, 5],
            extrapolation: Extrapolation::Richardson,
        }
    }
}

impl ZneConfig {
    fn validate(&self) -> Result<()> {
        if self.scale_factors.len() < 2 {
            return Err(Error::InvalidConfig(
                "zne needs at least two scale factors".into(),
            ));
        }
        let mut seen = self.scale_factors.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.scale_factors.len() {
            return Err(Error::InvalidConfig(
                "zne scale factors must be distinct".into(),
            ));
        }
        Ok(())
    }
}

/// Fit a polynomial through all points by Lagrange interpolation and
/// evaluate it at x = 0: E(0) = sum_i y_i prod_{j != i} x_j / (x_j - x_i).
fn richardson_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut total = 0.0;
    for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate() {
        let mut weight = 1.0;
        for (j, &xj) in xs.iter().enumerate() {
            if j != i {
                weight *= xj / (xj - xi);
            }
        }
        total += yi * weight;
    }
    total
}

/// Least-squares line through the points, evaluated at x = 0.
fn linear_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return sy / n;
    }
    (sy * sxx - sx * sxy) / denom
}

/// Evaluate E(lambda) at each fold scale and return the extrapolated
/// zero-noise values, clamped into [-1, 1] with a diagnostic flag if any
/// value fell outside.
pub fn zne_expectation(
    circuit: &QuantumCircuit,
    config: &ZneConfig,
    executor: &dyn CircuitExecutor,
    seed: u64,
) -> Result<MitigatedResult> {
    config.validate()?;
    let mut measured: Vec<ExpectationResult> = Vec::with_capacity(config.scale_factors.len());
    for (i, &scale) in config.scale_factors.iter().enumerate() {
        let folded = circuit.fold_global(scale)?;
        measured.push(executor.expectation(&folded, seeding::derive(seed, i as u64))?);
    }
    let xs: Vec<f64> = config.scale_factors.iter().map(|&s| s as f64).collect();
    let n_obs = measured[0].values.len();
    let mut values = Vec::with_capacity(n_obs);
    for o in 0..n_obs {
        let ys: Vec<f64> = measured.iter().map(|r| r.values[o]).collect();
        values.push(match config.extrapolation {
            Extrapolation::Richardson => richardson_at_zero(&xs, &ys),
            Extrapolation::Linear => linear_at_zero(&xs, &ys),
        });
    }
    let clamped = clamp_values(&mut values);
    Ok(MitigatedResult {
        result: ExpectationResult {
            values,
            variance_estimate: None,
        },
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Gate, Param};

    /// Synthetic executor returning per-observable values as a function of
    /// the fold scale, inferred from the moment count.
    struct Synthetic {
        base_moments: usize,
        f: fn(f64) -> f64,
    }

    impl CircuitExecutor for Synthetic {
        fn expectation(&self, circuit: &QuantumCircuit, _seed: u64) -> crate::Result<ExpectationResult> {
            let lambda = circuit.moment_count() as f64 / self.base_moments as f64;
            Ok(ExpectationResult {
                values: vec![(self.f)(lambda)],
                variance_estimate: None,
            })
        }
    }

    fn test_circuit() -> QuantumCircuit {
        QuantumCircuit::build_moments(
            &[Gate::ry(0, Param::Fixed(0.3)), Gate::ry(0, Param::Fixed(0.4))],
            1,
        )
        .unwrap()
    }

    #[test]
    fn exact_linear_decay_extrapolates_to_intercept() {
        let exec = Synthetic {
            base_moments: 2,
            f: |l| 1.0 - 0.1 * l,
        };
        let r = zne_expectation(&test_circuit(), &ZneConfig::default(), &exec, 0).unwrap();
        assert!((r.result.values[0] - 1.0).abs() < 1e-12);
        assert!(!r.clamped);
    }

    #[test]
    fn richardson_recovers_quadratic() {
        // E(l) = 0.9 - 0.05 l - 0.01 l^2 sampled at {1, 3, 5}; the
        // interpolating parabola gives E(0) = 0.9.
        let exec = Synthetic {
            base_moments: 2,
            f: |l| 0.9 - 0.05 * l - 0.01 * l * l,
        };
        let r = zne_expectation(&test_circuit(), &ZneConfig::default(), &exec, 0).unwrap();
        assert!((r.result.values[0] - 0.9).abs() < 1e-9);
    }

    #[test]
    fn constant_signal_is_returned_unchanged() {
        let exec = Synthetic {
            base_moments: 2,
            f: |_| 0.42,
        };
        for extrapolation in [Extrapolation::Richardson, Extrapolation::Linear] {
            let config = ZneConfig {
                scale_factors: vec![1, 3, 5],
                extrapolation,
            };
            let r = zne_expectation(&test_circuit(), &config, &exec, 0).unwrap();
            assert!((r.result.values[0] - 0.42).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_scales_are_rejected() {
        let config = ZneConfig {
            scale_factors: vec![1, 3, 3],
            extrapolation: Extrapolation::Richardson,
        };
        assert!(zne_expectation(&test_circuit(), &config, &Synthetic { base_moments: 2, f: |_| 0.0 }, 0).is_err());
    }

    #[test]
    fn runaway_extrapolation_is_clamped_and_flagged() {
        // Measured values stay physical but the intercept lands at 1.2.
        let exec = Synthetic {
            base_moments: 2,
            f: |l| 1.2 - 0.3 * l,
        };
        let r = zne_expectation(&test_circuit(), &ZneConfig::default(), &exec, 0).unwrap();
        assert_eq!(r.result.values[0], 1.0);
        assert!(r.clamped);
    }

    #[test]
    fn linear_least_squares_fits_noisy_line() {
        let exec = Synthetic {
            base_moments: 2,
            f: |l| 0.8 - 0.05 * l,
        };
        let config = ZneConfig {
            scale_factors: vec![1, 3, 5],
            extrapolation: Extrapolation::Linear,
        };
        let r = zne_expectation(&test_circuit(), &config, &exec, 0).unwrap();
        assert!((r.result.values[0] - 0.8).abs() < 1e-12);
    }
}
