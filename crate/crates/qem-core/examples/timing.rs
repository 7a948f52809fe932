//! Rough per-evaluation timing for the model circuit under noise.
use qem_core::mitigation::{MitigatedExecutor, MitigationPlan};
use qem_core::model::ModelCircuit;
use qem_core::noise::{NoiseChannel, NoiseChannelKind, NoiseModel};
use qem_core::simulator::{CircuitExecutor, DensityExecutor};
use std::time::Instant;

fn main() {
    let mc = ModelCircuit::new();
    let weights: Vec<f64> = (0..36).map(|i| 0.1 * i as f64).collect();
    let circuit = mc.bind(&weights, &[0.3, -0.8, 1.4]);

    for (label, kind, p, shots) in [
        ("noiseless analytic", NoiseChannelKind::None, 0.0, None),
        ("depolarizing 0.1 analytic", NoiseChannelKind::Depolarizing, 0.1, None),
        ("depolarizing 0.1, 8192 shots", NoiseChannelKind::Depolarizing, 0.1, Some(8192)),
        ("amplitude damping 0.1, 8192 shots", NoiseChannelKind::AmplitudeDamping, 0.1, Some(8192)),
    ] {
        let noise = NoiseModel::new(NoiseChannel::new(kind, p).unwrap());
        let exec = DensityExecutor::new(noise, shots);
        let n = 20000;
        let t0 = Instant::now();
        let mut acc = 0.0;
        for i in 0..n {
            acc += exec.expectation(&circuit, i).unwrap().values[0];
        }
        let dt = t0.elapsed().as_secs_f64();
        println!("{label}: {:.2} us/eval (acc {acc:.3})", dt / n as f64 * 1e6);
    }

    // Mitigated expectation costs
    for (label, plan) in [
        ("zne [1,3,5]", MitigationPlan::zne_default()),
        ("lre deg2 x3", MitigationPlan::lre_default()),
        ("pec 200", MitigationPlan::pec_default()),
    ] {
        let noise = NoiseModel::new(NoiseChannel::new(NoiseChannelKind::Depolarizing, 0.1).unwrap());
        let exec = MitigatedExecutor::new(plan, DensityExecutor::new(noise, Some(8192)), mc.groups().to_vec()).unwrap();
        let n = if label.starts_with("pec") { 50 } else { 200 };
        let t0 = Instant::now();
        let mut acc = 0.0;
        for i in 0..n {
            acc += exec.expectation(&circuit, i).unwrap().values[0];
        }
        let dt = t0.elapsed().as_secs_f64();
        println!("{label}: {:.2} us/expectation, {} circuit evals (acc {acc:.3})", dt / n as f64 * 1e6, exec.eval_count());
    }
}
