//! Layerwise Richardson extrapolation: scale the noise of each circuit
//! layer group independently, fit a multivariate polynomial in the scale
//! variables, and evaluate it at the all-zeros scale vector.

use super::{clamp_values, MitigatedResult};
use crate::circuit::{FoldSpec, QuantumCircuit};
use crate::error::{Error, Result};
use crate::seeding;
use crate::simulator::{CircuitExecutor, ExpectationResult};

#[derive(Debug, Clone, PartialEq)]
pub struct LreConfig {
    /// Total degree of the multivariate polynomial model.
    pub degree: u32,
    /// Base odd fold multiplier; group g in a sample with exponent e gets
    /// scale multiplier^e.
    pub fold_multiplier: u32,
    /// Starting moment indices of the layer groups (first must be 0).
    pub groups: Vec<usize>,
}

impl Default for LreConfig {
    fn default() -> Self {
        Self {
            degree: 2,
            fold_multiplier: 3,
            groups: vec![0],
        }
    }
}

impl LreConfig {
    fn validate(&self) -> Result<()> {
        if self.degree == 0 {
            return Err(Error::InvalidConfig("lre degree must be >= 1".into()));
        }
        if self.fold_multiplier < 3 || self.fold_multiplier % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "lre fold multiplier must be an odd integer >= 3, got {}",
                self.fold_multiplier
            )));
        }
        Ok(())
    }
}

/// All exponent vectors over `g` variables with total degree <= `d`, in
/// graded order (total degree ascending, lexicographic within a degree).
/// The constant monomial is always index 0.
pub fn exponent_vectors(g: usize, d: u32) -> Vec<Vec<u32>> {
    fn with_sum(g: usize, s: u32, out: &mut Vec<Vec<u32>>, prefix: &mut Vec<u32>) {
        if g == 1 {
            prefix.push(s);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=s).rev() {
            prefix.push(first);
            with_sum(g - 1, s - first, out, prefix);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=d {
        with_sum(g, total, &mut out, &mut Vec::new());
    }
    out
}

/// Scale vectors for the exponent set: component i is multiplier^e_i, which
/// stays odd for odd multipliers. Distinct exponent vectors give distinct
/// scale vectors for multiplier >= 3; if duplicates ever arise the
/// construction falls back to components 2e+1 in {1, 3, 5, ...}.
fn scale_vectors(exponents: &[Vec<u32>], multiplier: u32) -> Vec<Vec<u32>> {
    let primary: Vec<Vec<u32>> = exponents
        .iter()
        .map(|e| e.iter().map(|&k| multiplier.pow(k)).collect())
        .collect();
    let mut sorted = primary.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() == primary.len() {
        return primary;
    }
    exponents
        .iter()
        .map(|e| e.iter().map(|&k| 2 * k + 1).collect())
        .collect()
}

/// Solve the square system M x = y for several right-hand sides by Gaussian
/// elimination with partial pivoting. Returns one solution vector per rhs.
fn solve_multi(mut m: Vec<Vec<f64>>, mut rhs: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
            for (r, rc) in rhs[col].clone().iter().enumerate() {
                rhs[row][r] -= factor * rc;
            }
        }
    }
    let n_rhs = rhs[0].len();
    let mut x = vec![vec![0.0; n_rhs]; n];
    for row in (0..n).rev() {
        for r in 0..n_rhs {
            let mut acc = rhs[row][r];
            for k in row + 1..n {
                acc -= m[row][k] * x[k][r];
            }
            x[row][r] = acc / m[row][row];
        }
    }
    Some(x)
}

/// Evaluate the circuit at the canonical scale-vector set via group folding,
/// solve the square monomial system, and return the polynomial value at the
/// all-zeros scale vector (the constant coefficient), per observable.
pub fn lre_expectation(
    circuit: &QuantumCircuit,
    config: &LreConfig,
    executor: &dyn CircuitExecutor,
    seed: u64,
) -> Result<MitigatedResult> {
    config.validate()?;
    let g = config.groups.len();
    let exponents = exponent_vectors(g, config.degree);
    let scales = scale_vectors(&exponents, config.fold_multiplier);

    let mut measured: Vec<ExpectationResult> = Vec::with_capacity(scales.len());
    for (i, scale_vec) in scales.iter().enumerate() {
        let spec = FoldSpec::new(scale_vec.clone(), config.groups.clone());
        let folded = circuit.fold_groups(&spec)?;
        measured.push(executor.expectation(&folded, seeding::derive(seed, i as u64))?);
    }

    // M[v][w] = monomial w evaluated at scale vector v.
    let m: Vec<Vec<f64>> = scales
        .iter()
        .map(|sv| {
            exponents
                .iter()
                .map(|e| {
                    sv.iter()
                        .zip(e)
                        .map(|(&s, &k)| (s as f64).powi(k as i32))
                        .product()
                })
                .collect()
        })
        .collect();
    let rhs: Vec<Vec<f64>> = measured.iter().map(|r| r.values.clone()).collect();
    let n_obs = rhs[0].len();

    let coeffs = solve_multi(m, rhs).ok_or_else(|| {
        Error::SingularSystem(format!(
            "{:?}",
            scales.iter().map(|s| format!("{s:?}")).collect::<Vec<_>>()
        ))
    })?;

    // Constant coefficient = value at the all-zeros scale vector.
    let mut values: Vec<f64> = (0..n_obs).map(|o| coeffs[0][o]).collect();
    let clamped = clamp_values(&mut values);
    Ok(MitigatedResult {
        result: ExpectationResult {
            values,
            variance_estimate: None,
        },
        clamped,
    })
}
