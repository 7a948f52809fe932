//! Training-loop behavior on the real dataset: determinism, metrics shape,
//! convergence trend, and argmax invariance.

use qem_core::data::{load_iris, prepare, Reduction};
use qem_core::model::{forward, train, ModelCircuit, ModelParams, TrainConfig};
use qem_core::noise::NoiseModel;
use qem_core::simulator::DensityExecutor;

fn split() -> qem_core::data::SplitDataset {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/iris.csv");
    prepare(&load_iris(path).unwrap(), 1234, Reduction::Truncate3)
}

fn quick_config(seed: u64, epochs: usize) -> TrainConfig {
    TrainConfig {
        epochs,
        seed,
        shots: None,
        noise: NoiseModel::noiseless(),
        ..TrainConfig::default()
    }
}

#[test]
fn metrics_have_one_entry_per_epoch_with_sane_ranges() {
    let outcome = train(&split(), &quick_config(7, 2)).unwrap();
    assert_eq!(outcome.metrics.len(), 2);
    for m in &outcome.metrics {
        assert!((0.0..=1.0).contains(&m.train_accuracy));
        assert!((0.0..=1.0).contains(&m.val_accuracy));
        assert!(m.train_loss >= 0.0 && m.val_loss >= 0.0);
        assert!(m.eval_count > 0);
        // Validation accuracy is a multiple of 1/38.
        let scaled = m.val_accuracy * 38.0;
        assert!((scaled - scaled.round()).abs() < 1e-9);
        let scaled = m.train_accuracy * 112.0;
        assert!((scaled - scaled.round()).abs() < 1e-9);
    }
}

#[test]
fn identical_seeds_give_bit_identical_metrics() {
    let a = train(&split(), &quick_config(99, 2)).unwrap();
    let b = train(&split(), &quick_config(99, 2)).unwrap();
    for (ma, mb) in a.metrics.iter().zip(&b.metrics) {
        assert_eq!(ma.train_accuracy, mb.train_accuracy);
        assert_eq!(ma.val_accuracy, mb.val_accuracy);
        assert_eq!(ma.train_loss, mb.train_loss);
        assert_eq!(ma.val_loss, mb.val_loss);
        assert_eq!(ma.eval_count, mb.eval_count);
    }
    assert_eq!(a.params, b.params);
    assert_eq!(a.eval_count, b.eval_count);
}

#[test]
fn noiseless_training_loss_trends_downward() {
    // Over 20 epochs with the default seed the training loss is
    // non-increasing in all but at most two epoch transitions. Mini-batch
    // sampling at this learning rate produces sub-0.03 wiggles every few
    // epochs no matter the seed, so "non-increasing" is judged against that
    // materiality threshold; anything larger counts as a real uptick.
    let outcome = train(&split(), &quick_config(29, 20)).unwrap();
    let losses: Vec<f64> = outcome.metrics.iter().map(|m| m.train_loss).collect();
    let material_upticks = losses.windows(2).filter(|w| w[1] > w[0] + 0.03).count();
    assert!(
        material_upticks <= 2,
        "{material_upticks} material loss upticks across {} transitions: {losses:?}",
        losses.len() - 1
    );
    assert!(
        losses.last().unwrap() < &(losses[0] * 0.5),
        "loss failed to decrease substantially: {losses:?}"
    );
}

#[test]
fn shifting_all_logits_preserves_predictions() {
    let model = ModelCircuit::new();
    let exec = DensityExecutor::analytic(NoiseModel::noiseless());
    let mut params = ModelParams::init(3, false);
    let features = [0.5, -0.3, 1.0];
    let base = forward(&features, &params, &model, &exec, 0).unwrap();
    let argmax = |p: &[f64; 3]| {
        p.iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0
    };
    let before = argmax(&base.probabilities);
    for b in &mut params.head_bias {
        *b += 7.5;
    }
    let shifted = forward(&features, &params, &model, &exec, 0).unwrap();
    assert_eq!(before, argmax(&shifted.probabilities));
    for (a, b) in base.probabilities.iter().zip(&shifted.probabilities) {
        assert!((a - b).abs() < 1e-9, "softmax shift invariance");
    }
}

#[test]
fn gradient_ablation_flag_changes_only_gradient_path() {
    use qem_core::mitigation::MitigationPlan;
    use qem_core::noise::{NoiseChannel, NoiseChannelKind};
    let noise = NoiseModel::new(NoiseChannel::new(NoiseChannelKind::Depolarizing, 0.05).unwrap());
    let base = TrainConfig {
        epochs: 1,
        seed: 5,
        shots: None,
        noise,
        mitigation: MitigationPlan::zne_default(),
        ..TrainConfig::default()
    };
    let mitigated = train(&split(), &base).unwrap();
    let ablated = train(
        &split(),
        &TrainConfig {
            mitigate_gradients: false,
            ..base
        },
    )
    .unwrap();
    // Fewer circuit evaluations without mitigation on the shift evaluations.
    assert!(ablated.eval_count < mitigated.eval_count);
}
