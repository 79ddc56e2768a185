use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use dtsnn::hwsim::{pipeline_simulate, SchedulerState, SimConfig};
use dtsnn::model::{ct_forward, dc_forward, NeuronModel};
use dtsnn::quant::QuantizedModel;
use dtsnn::spiking::{snn_ct_step, Firing, NeuronState};
use dtsnn_bench::{frames, network};

fn dense_forward(c: &mut Criterion) {
    let mut g = c.benchmark_group("dc_forward");
    for hidden in [128, 256, 1024] {
        let net = network(&[784, hidden, hidden, 10], NeuronModel::Dc, 1.0, 1);
        let x = frames(784, 1, 0.13, 2)[0].to_values();
        g.bench_with_input(BenchmarkId::from_parameter(hidden), &x, |b, x| {
            b.iter(|| dc_forward(&net, black_box(x), None, Firing::Binary, None).unwrap())
        });
    }
    g.finish();
}

fn ct_step(c: &mut Criterion) {
    let net = network(&[1156, 512, 512, 12], NeuronModel::Ct, 1.0, 3);
    let input = frames(1156, 16, 0.05, 4);
    let layer = &net.layers[0];
    c.bench_function("ct_step 1156x512", |b| {
        let mut state = NeuronState::new(512, 1.0).unwrap();
        b.iter(|| snn_ct_step(black_box(&input[0]), layer, &mut state).unwrap())
    });
    let seq: Vec<Vec<f64>> = input.iter().map(|f| f.to_values()).collect();
    c.bench_function("ct_forward 16 steps", |b| {
        b.iter(|| ct_forward(&net, black_box(&seq), None, Firing::Binary, None).unwrap())
    });
}

fn quantized_forward(c: &mut Criterion) {
    let net = network(&[784, 256, 256, 10], NeuronModel::Dc, 1.0, 5);
    let model = QuantizedModel::from_network(&net, 7).unwrap();
    let x = frames(784, 1, 0.13, 6).remove(0);
    c.bench_function("quantized forward_dc 784-256-256-10", |b| {
        b.iter(|| model.forward_dc(black_box(&x)).unwrap())
    });
}

fn pipeline(c: &mut Criterion) {
    let mut g = c.benchmark_group("pipeline_simulate");
    for steps in [1, 8, 16] {
        let net = network(&[784, 256, 256, 10], NeuronModel::Dc, 3.0, 7);
        let model = QuantizedModel::from_network(&net, 7).unwrap();
        let input = frames(784, steps, 0.13, 8);
        g.bench_with_input(BenchmarkId::from_parameter(steps), &input, |b, input| {
            b.iter(|| pipeline_simulate(&model, black_box(input), &SimConfig::default()).unwrap())
        });
    }
    g.finish();
}

fn scheduler(c: &mut Criterion) {
    let frame = frames(784, 1, 0.13, 9).remove(0);
    c.bench_function("priority encoder drain 784", |b| {
        b.iter(|| {
            let mut s = SchedulerState::new(black_box(frame.bits.clone()));
            let mut n = 0;
            while s.priority_encode_next().is_some() {
                n += 1;
            }
            n
        })
    });
}

criterion_group!(
    benches,
    dense_forward,
    ct_step,
    quantized_forward,
    pipeline,
    scheduler
);
criterion_main!(benches);
