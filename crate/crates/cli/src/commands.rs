//! The four subcommands. Each writes only into its output directory: a
//! resolved-config echo `<command>.cfg`, a metrics file
//! `<command>-metrics.csv`, and the command's own artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use dtsnn::data::{bernoulli_encode, ImageSample, SpikeFrameSequence};
use dtsnn::hwsim::{
    estimate_energy, report_sparsity, simulate_sequences, write_trace, EnergyCoefficients,
    SimConfig,
};
use dtsnn::metrics::{emit_metrics, MetricsRecord};
use dtsnn::model::{Network, NeuronModel, PresetSpec};
use dtsnn::quant::{float_accuracy, precision_sweep, QuantizedModel, SweepData};
use dtsnn::spiking::SpikeFrame;
use dtsnn::train::{
    argmax, evaluate_ct, evaluate_dc, fit_ct, fit_dc, group_argmax, load_checkpoint_for,
    save_checkpoint, sequence_classes, CheckpointMeta, DcEvalConfig, FitOptions, Trainer,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{parse_kv, RunConfig};
use crate::dataset::{self, Data};

struct Run {
    cfg: RunConfig,
    out: PathBuf,
    run_id: String,
    command: &'static str,
    started: Instant,
    records: Vec<MetricsRecord>,
}

impl Run {
    fn start(mut cfg: RunConfig, command: &'static str) -> Result<Self> {
        let out = cfg.out_dir();
        fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        let run_id = match cfg.get("run_id") {
            Some(id) => id.to_owned(),
            None => format!(
                "{command}-{}-s{}",
                cfg.get("preset").unwrap_or("none"),
                cfg.seed()?
            ),
        };
        cfg.set_default("run_id", &run_id);
        cfg.set_default("out", out.display());
        Ok(Self {
            cfg,
            out,
            run_id,
            command,
            started: Instant::now(),
            records: Vec::new(),
        })
    }

    fn file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn echo(&self) -> Result<()> {
        let path = self.file(&format!("{}.cfg", self.command));
        fs::write(&path, self.cfg.render()).with_context(|| format!("writing {}", path.display()))
    }

    fn record(&mut self, phase: &str, step: u64, metric: &str, value: f64) {
        self.records
            .push(MetricsRecord::new(&self.run_id, phase, step, metric, value));
    }

    fn finish(mut self) -> Result<()> {
        if self.cfg.flag("timing")? {
            let secs = self.started.elapsed().as_secs_f64();
            for r in &mut self.records {
                r.wall_clock = Some(secs);
            }
        }
        self.echo()?;
        let path = self.file(&format!("{}-metrics.csv", self.command));
        emit_metrics(&self.records, &path)?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

fn eval_steps(cfg: &RunConfig, spec: &PresetSpec) -> Result<usize> {
    let default = match spec.neuron {
        NeuronModel::Dc => 16,
        NeuronModel::Ct => spec.steps,
    };
    cfg.parse_or("steps", default)
}

fn load_net(cfg: &RunConfig, spec: &PresetSpec, required: bool) -> Result<Network> {
    match cfg.path("checkpoint") {
        Some(p) => Ok(load_checkpoint_for(&p, spec)
            .with_context(|| format!("loading checkpoint {}", p.display()))?
            .0),
        None if required => bail!("no checkpoint given (use --checkpoint)"),
        None => {
            eprintln!("warning: no checkpoint given, evaluating an untrained network");
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed()?);
            Ok(Network::init(spec, 1.0, &mut rng)?)
        }
    }
}

pub fn train(cfg: RunConfig) -> Result<()> {
    let spec = cfg.preset()?;
    let tc = cfg.train_config(&spec)?;
    let mut run = Run::start(cfg, "train")?;
    run.cfg.resolve_training(&tc);
    run.echo()?;
    let data = dataset::load(&run.cfg, &spec)?;
    let mut trainer = Trainer::from_preset(&spec, tc.clone())?;
    let opts = FitOptions {
        run_id: run.run_id.clone(),
        test_steps: spec.steps,
        ..FitOptions::default()
    };
    let report = match &data {
        Data::Images(s) => fit_dc(&mut trainer, &s.train, &s.validation, &s.test, &opts)?,
        Data::Sequences(s) => fit_ct(&mut trainer, &s.train, &s.validation, &s.test, &opts)?,
    };
    let meta = |epoch: usize| CheckpointMeta {
        epoch: epoch as u64,
        seed: tc.seed,
        config_hash: tc.hash(),
    };
    save_checkpoint(&trainer.net, &meta(trainer.epoch), &run.file("model.ckpt"))?;
    save_checkpoint(
        &report.best_net,
        &meta(report.best_epoch),
        &run.file("best.ckpt"),
    )?;
    for e in &report.epochs {
        println!(
            "epoch {:>3}  lr {:.2e}  loss {:.4}  train {:.4}",
            e.epoch, e.lr, e.loss, e.accuracy
        );
    }
    println!(
        "validation best {:.4} (epoch {}), final {:.4}; test best {:.4}, final {:.4}",
        report.best_validation(),
        report.best_epoch,
        report.final_validation(),
        report.test_best.last().copied().unwrap_or(f64::NAN),
        report.test_final.last().copied().unwrap_or(f64::NAN),
    );
    run.records = report.records;
    run.finish()
}

pub fn eval(cfg: RunConfig) -> Result<()> {
    let spec = cfg.preset()?;
    let steps = eval_steps(&cfg, &spec)?;
    let trials = cfg.trials()?;
    let readout = cfg.readout()?;
    let mut run = Run::start(cfg, "eval")?;
    run.cfg.set_default("steps", steps);
    run.cfg.set_default("trials", trials);
    run.echo()?;
    let net = load_net(&run.cfg, &spec, false)?;
    match dataset::load(&run.cfg, &spec)? {
        Data::Images(s) => {
            let ec = DcEvalConfig {
                t_eval: steps,
                n_trials: trials,
                readout,
                seed: run.cfg.seed()?,
            };
            for (i, acc) in evaluate_dc(&net, &s.test, &ec)?.into_iter().enumerate() {
                println!("t = {:>3}  accuracy {acc:.4}", i + 1);
                run.record("eval", i as u64 + 1, "accuracy", acc);
            }
        }
        Data::Sequences(s) => {
            let e = evaluate_ct(&net, &s.test, steps, &spec.tasks)?;
            for t in 0..=steps {
                let mut mean = 0.0;
                for (task, acc) in e.tasks.iter().zip(&e.accuracy) {
                    run.record(
                        "eval",
                        t as u64,
                        &format!("accuracy_{}", task.name()),
                        acc[t],
                    );
                    mean += acc[t] / e.tasks.len() as f64;
                }
                println!("t = {t:>3}  accuracy {mean:.4}");
                run.record("eval", t as u64, "accuracy", mean);
            }
        }
    }
    run.finish()
}

fn parse_bits_list(s: &str) -> Result<Vec<u8>> {
    s.split(',')
        .map(|b| {
            b.trim()
                .parse::<u8>()
                .map_err(|e| anyhow!("invalid bit width {b:?}: {e}"))
        })
        .collect()
}

pub fn quantize(cfg: RunConfig) -> Result<()> {
    let spec = cfg.preset()?;
    let bits: u8 = cfg.parse_or("bits", 7)?;
    let steps = eval_steps(&cfg, &spec)?;
    let trials = cfg.parse_or("trials", 1)?;
    let readout = cfg.readout()?;
    let sweep = cfg.get("sweep").map(parse_bits_list).transpose()?;
    let mut run = Run::start(cfg, "quantize")?;
    run.cfg.set_default("bits", bits);
    run.cfg.set_default("steps", steps);
    run.cfg.set_default("trials", trials);
    run.echo()?;
    let net = load_net(&run.cfg, &spec, true)?;
    let model = QuantizedModel::from_network(&net, bits)?;
    let model_path = run.file(&format!("model.q{bits}"));
    model.save(&model_path)?;
    println!("wrote {}", model_path.display());
    let data = dataset::load(&run.cfg, &spec)?;
    let ec = DcEvalConfig {
        t_eval: steps,
        n_trials: trials,
        readout,
        seed: run.cfg.seed()?,
    };
    let sd = match &data {
        Data::Images(s) => SweepData::Images(&s.test, ec),
        Data::Sequences(s) => SweepData::Sequences(&s.test, steps, &spec.tasks),
    };
    let float = float_accuracy(&net, sd)?;
    println!("float accuracy {float:.4}");
    run.record("float", 0, "accuracy", float);
    let q = precision_sweep(&net, sd, &[bits])?[0];
    println!("{bits}-bit accuracy {:.4}", q.accuracy);
    run.record("quantize", u64::from(bits), "accuracy", q.accuracy);
    if let Some(list) = sweep {
        for row in precision_sweep(&net, sd, &list)? {
            println!("sweep {:>2} bits  accuracy {:.4}", row.bits, row.accuracy);
            run.record("sweep", u64::from(row.bits), "accuracy", row.accuracy);
        }
    }
    run.finish()
}

fn load_coefficients(path: &Path) -> Result<EnergyCoefficients> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut c = EnergyCoefficients::illustrative();
    for (k, v) in parse_kv(&text, &path.display().to_string())? {
        let x: f64 = v
            .parse()
            .map_err(|e| anyhow!("invalid value {v:?} for {k}: {e}"))?;
        match k.as_str() {
            "row_fetch_nj" => c.row_fetch_nj = x,
            "accumulate_nj" => c.accumulate_nj = x,
            "fire_check_nj" => c.fire_check_nj = x,
            "idle_cycle_nj" => c.idle_cycle_nj = x,
            "frequency_mhz" => c.frequency_mhz = x,
            _ => bail!("unknown coefficient {k:?}"),
        }
    }
    c.validate()?;
    Ok(c)
}

fn image_inputs(images: &[ImageSample], steps: usize, seed: u64) -> Vec<Vec<SpikeFrame>> {
    images
        .iter()
        .enumerate()
        .map(|(i, img)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            (0..steps)
                .map(|t| bernoulli_encode(&img.pixels, t, &mut rng))
                .collect()
        })
        .collect()
}

fn sequence_inputs(seqs: &[SpikeFrameSequence], steps: usize) -> Result<Vec<Vec<SpikeFrame>>> {
    seqs.iter()
        .map(|s| {
            if s.steps() < steps {
                bail!("sequence has {} steps, {steps} requested", s.steps());
            }
            Ok(s.frames[..steps].to_vec())
        })
        .collect()
}

pub fn simulate(mut cfg: RunConfig) -> Result<()> {
    let model_path = cfg
        .path("model")
        .ok_or_else(|| anyhow!("no quantized model given (use --model)"))?;
    let model = QuantizedModel::load(&model_path)
        .with_context(|| format!("loading model {}", model_path.display()))?;
    cfg.set_default("preset", &model.preset);
    let spec = cfg.preset()?;
    if spec.id != model.preset {
        bail!(
            "model was built for preset {}, not {}",
            model.preset,
            spec.id
        );
    }
    let steps = eval_steps(&cfg, &spec)?;
    let samples: usize = cfg.parse_or("samples", 10)?;
    let coefficients = match cfg.path("coefficients") {
        Some(p) => load_coefficients(&p)?,
        None => {
            eprintln!("warning: no coefficients file, using illustrative placeholder values");
            EnergyCoefficients::illustrative()
        }
    };
    let trace = cfg.flag("trace")?;
    let mut run = Run::start(cfg, "simulate")?;
    run.cfg.set_default("steps", steps);
    run.cfg.set_default("samples", samples);
    run.echo()?;
    let seed = run.cfg.seed()?;
    let (inputs, classes): (Vec<Vec<SpikeFrame>>, Vec<Vec<usize>>) =
        match dataset::load(&run.cfg, &spec)? {
            Data::Images(s) => {
                let test = &s.test[..samples.min(s.test.len())];
                (
                    image_inputs(test, steps, seed),
                    test.iter().map(|i| vec![i.label as usize]).collect(),
                )
            }
            Data::Sequences(s) => {
                let test = &s.test[..samples.min(s.test.len())];
                let classes = test
                    .iter()
                    .map(|q| sequence_classes(&q.meta, &spec.tasks))
                    .collect::<dtsnn::Result<_>>()?;
                (sequence_inputs(test, steps)?, classes)
            }
        };
    let sim = SimConfig {
        record_trace: trace,
        ..SimConfig::default()
    };
    let (results, counters) = simulate_sequences(&model, &inputs, &sim)?;
    let mut correct = 0usize;
    let mut total = 0usize;
    for (i, (r, want)) in results.iter().zip(&classes).enumerate() {
        let got = match spec.neuron {
            NeuronModel::Dc => {
                let mut acc = vec![0.0; model.output_dim()];
                for p in r.potentials.last().expect("non-empty model") {
                    acc.iter_mut().zip(p).for_each(|(a, &v)| *a += v as f64);
                }
                vec![argmax(&acc)]
            }
            NeuronModel::Ct => {
                let mut counts = vec![0.0; model.output_dim()];
                for f in r.output_frames() {
                    f.active_indices().for_each(|j| counts[j] += 1.0);
                }
                group_argmax(&counts, &spec.tasks)
            }
        };
        correct += got.iter().zip(want).filter(|(a, b)| a == b).count();
        total += want.len();
        run.record(
            "simulate",
            i as u64,
            "cycles",
            r.counters.total_cycles as f64,
        );
        if trace {
            write_trace(&r.trace, &run.file(&format!("trace-{i:03}.csv")))?;
        }
    }
    let sparsity = report_sparsity(&counters);
    let energy = estimate_energy(&counters, &coefficients)?;
    for (l, s) in sparsity.per_layer.iter().enumerate() {
        run.record("sparsity", l as u64, "active_fraction", *s);
        run.record("energy", l as u64, "layer_nj", energy.per_layer_nj[l]);
    }
    let accuracy = if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    };
    run.record("summary", 0, "total_cycles", counters.total_cycles as f64);
    run.record("summary", 0, "active_fraction", sparsity.aggregate);
    run.record("summary", 0, "energy_nj", energy.total_nj);
    run.record("summary", 0, "wall_time_us", energy.wall_time_us);
    run.record("summary", 0, "accuracy", accuracy);
    println!(
        "{} samples, {} cycles ({:.2} us at {} MHz), active inputs {:.2}%, energy {:.3} nJ, accuracy {:.4}",
        results.len(),
        counters.total_cycles,
        energy.wall_time_us,
        coefficients.frequency_mhz,
        100.0 * sparsity.aggregate,
        energy.total_nj,
        accuracy
    );
    run.finish()
}
