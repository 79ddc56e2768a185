use dtsnn::data::{moving_bar_dataset, ImageSample};
use dtsnn::model::{preset, Network, NeuronModel, Task};
use dtsnn::nn::LayerParams;
use dtsnn::train::{evaluate_ct, TrainConfig, Trainer};
use dtsnn::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn toy_images(n: usize, seed: u64) -> Vec<ImageSample> {
    // class 0 lights the left half, class 1 the right half, with pixel noise
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = (i % 2) as u8;
            let pixels = (0..64)
                .map(|p| {
                    let on = (p % 8 < 4) == (label == 0);
                    if on {
                        rng.random_range(150..=255)
                    } else {
                        rng.random_range(0..40)
                    }
                })
                .collect();
            ImageSample {
                rows: 8,
                cols: 8,
                pixels,
                label,
            }
        })
        .collect()
}

fn toy_trainer(seed: u64) -> Trainer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = Network::dense("toy", NeuronModel::Dc, &[64, 32, 10], 1.0, &mut rng).unwrap();
    let mut cfg = TrainConfig::from_preset(&preset("mlp-128").unwrap());
    cfg.preset = "toy".into();
    cfg.dropout = vec![0.2, 0.1];
    cfg.batch_size = 20;
    cfg.epochs = 5;
    cfg.seed = seed;
    Trainer::new(net, cfg, vec![Task::Digit]).unwrap()
}

#[test]
fn zero_model_first_batch_loss_is_one_per_class() {
    let net = Network::new(
        "z",
        NeuronModel::Dc,
        vec![64],
        1.0,
        vec![
            LayerParams::dense(Tensor::zeros(vec![8, 64]), Tensor::zeros(vec![8])).unwrap(),
            LayerParams::dense(Tensor::zeros(vec![10, 8]), Tensor::zeros(vec![10])).unwrap(),
        ],
    )
    .unwrap();
    let mut cfg = TrainConfig::from_preset(&preset("mlp-128").unwrap());
    cfg.dropout = vec![0.0, 0.0];
    cfg.batch_size = 200;
    let mut tr = Trainer::new(net, cfg, vec![Task::Digit]).unwrap();
    let stats = tr
        .train_epoch_dc(&toy_images(200, 1), &mut ChaCha8Rng::seed_from_u64(0))
        .unwrap();
    // all logits 0 → every class contributes max(0, 1)² = 1
    assert!((stats.loss - 10.0).abs() < 1e-12, "{}", stats.loss);
}

#[test]
fn dc_loss_decreases_on_two_class_toy() {
    let data = toy_images(200, 2);
    let mut tr = toy_trainer(3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let losses: Vec<f64> = (0..5)
        .map(|_| tr.train_epoch_dc(&data, &mut rng).unwrap().loss)
        .collect();
    let smooth: Vec<f64> = losses.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
    assert!(smooth.windows(2).all(|w| w[1] < w[0]), "{losses:?}");
}

#[test]
fn identical_seed_gives_identical_weights() {
    let data = toy_images(100, 5);
    let run = || {
        let mut tr = toy_trainer(7);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2 {
            tr.train_epoch_dc(&data, &mut rng).unwrap();
        }
        tr.net
    };
    let (a, b) = (run(), run());
    for (x, y) in a.layers.iter().zip(&b.layers) {
        let bits = |t: &Tensor| t.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&x.weights), bits(&y.weights));
        assert_eq!(bits(&x.bias), bits(&y.bias));
    }
}

#[test]
fn moving_bar_learns_motion() {
    let data = moving_bar_dataset(11, 2000, 16, 16).unwrap();
    let spec = preset("bar-mlp").unwrap();
    let mut cfg = TrainConfig::from_preset(&spec);
    cfg.seed = 11;
    let mut tr = Trainer::from_preset(&spec, cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut best = 0.0f64;
    for _ in 0..spec.epochs {
        let s = tr.train_epoch_ct(&data, &mut rng).unwrap();
        best = best.max(s.accuracy);
    }
    let e = evaluate_ct(&tr.net, &data, 16, &[Task::Motion]).unwrap();
    let m = e.task(Task::Motion).unwrap();
    assert!(m[16] > 0.95, "training accuracy {}", m[16]);
    assert!(m[16] >= m[1]);
}
