use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use srrt::eval::{
    evaluate, generate_synthetic_sequence, min_sr_distribution_of, EvalInput, LatencyStats, Motion,
    MotionSpec, SrDistribution,
};
use srrt::io::{
    load_dataset, read_records, trajectory_path, write_trajectory, RunConfig, Sequence,
};
use srrt::pipeline::{fixed_sr_track_sequence, srrt_track_sequence, PipelineConfig, Trajectory};
use srrt::trainkit::{export_sample, materialize, sample_dataset_geometry, write_index};
use srrt::{Error, RadiusCategory, Result};

use crate::args::*;

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Track(a) => track(a),
        Command::Eval(a) => eval(a),
        Command::Stats(a) => stats(a),
        Command::Sample(a) => sample(a),
        Command::Bench(a) => bench(a),
        Command::Synth(a) => synth(a),
    }
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn apply_tracker_flags(cfg: &mut RunConfig, f: &TrackerFlags) -> Result<()> {
    if let Some(v) = &f.regulator {
        cfg.regulator = v.clone();
    }
    if let Some(v) = &f.tracker {
        cfg.tracker = v.clone();
    }
    if let Some(v) = &f.categories {
        cfg.categories = v.clone();
    }
    if let Some(v) = f.k {
        cfg.k = v;
    }
    if let Some(v) = f.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = f.sigma {
        cfg.sigma = v;
    }
    cfg.validate()
}

fn required(flag: Option<&PathBuf>, from_config: Option<&PathBuf>, name: &str) -> Result<PathBuf> {
    flag.or(from_config).cloned().ok_or_else(|| {
        Error::Config(format!(
            "no {name} given (flag --{name} or config key '{name}')"
        ))
    })
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(Error::Config("--workers must be positive".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(e.to_string()))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Error::Config(e.to_string()))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| Error::Io {
                    path: dir.to_path_buf(),
                    source: e,
                })?;
            }
            fs::write(p, text).map_err(|e| Error::Io {
                path: p.to_path_buf(),
                source: e,
            })
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_category(f: u32) -> Result<RadiusCategory> {
    RadiusCategory::from_factor(f).ok_or_else(|| Error::Config(format!("unknown category {f}")))
}

fn run_one(
    seq: &Sequence,
    fixed: Option<RadiusCategory>,
    cfg: &PipelineConfig,
) -> Result<Trajectory> {
    match fixed {
        Some(c) => fixed_sr_track_sequence(seq, c, cfg),
        None => srrt_track_sequence(seq, cfg),
    }
}

fn track(a: TrackArgs) -> Result<()> {
    let mut cfg = load_config(&a.common)?;
    apply_tracker_flags(&mut cfg, &a.tracker)?;
    let dataset = required(a.dataset.as_ref(), cfg.dataset.as_ref(), "dataset")?;
    let output = required(a.output.as_ref(), cfg.output.as_ref(), "output")?;
    let pcfg = cfg.pipeline()?;
    let fixed = a.gamma.map(parse_category).transpose()?;
    let mode = fixed.map_or_else(|| "srrt".to_string(), |c| format!("fixed-{c}"));
    let seqs = load_dataset(&dataset)?;
    let results: Vec<Result<()>> = pool(a.common.workers)?.install(|| {
        seqs.par_iter()
            .map(|seq| {
                let traj = run_one(seq, fixed, &pcfg)?;
                write_trajectory(&output, &traj, &mode, &pcfg)?;
                info!("{}: {} frames tracked", seq.name, traj.records.len());
                Ok(())
            })
            .collect()
    });
    results.into_iter().collect::<Result<Vec<()>>>()?;
    println!(
        "tracked {} sequences ({mode}) into {}",
        seqs.len(),
        output.display()
    );
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let cfg = load_config(&a.common)?;
    let dataset = required(a.dataset.as_ref(), cfg.dataset.as_ref(), "dataset")?;
    let seqs = load_dataset(&dataset)?;
    let inputs: Vec<EvalInput> = pool(a.common.workers)?.install(|| {
        seqs.par_iter()
            .map(|seq| {
                let groundtruth = seq.groundtruth.clone().ok_or_else(|| Error::Dataset {
                    sequence: seq.name.clone(),
                    message: "no ground truth to evaluate against".into(),
                })?;
                Ok(EvalInput {
                    name: seq.name.clone(),
                    records: read_records(&trajectory_path(&a.results, &seq.name))?,
                    groundtruth,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let report = evaluate(&inputs)?;
    match &a.output {
        Some(dir) => {
            emit(Some(&dir.join("report.json")), &report.to_json())?;
            emit(Some(&dir.join("success.csv")), &report.curve().to_csv())?;
            for s in &report.sequences {
                let mut csv = String::from("threshold,success\n");
                for (t, r) in srrt::eval::success_thresholds().iter().zip(&s.success) {
                    csv.push_str(&format!("{t:.2},{r}\n"));
                }
                emit(
                    Some(&dir.join("curves").join(format!("{}.csv", s.name))),
                    &csv,
                )?;
            }
            println!("auc={} p={} p_norm={}", report.auc, report.p, report.p_norm);
            Ok(())
        }
        None => emit(None, &report.to_json()),
    }
}

#[derive(Serialize)]
struct StatsReport {
    sequences: usize,
    pairs: usize,
    skipped: usize,
    counts: BTreeMap<String, usize>,
    fractions: BTreeMap<String, f64>,
}

fn stats(a: StatsArgs) -> Result<()> {
    let cfg = load_config(&a.common)?;
    let dataset = required(a.dataset.as_ref(), cfg.dataset.as_ref(), "dataset")?;
    let seqs = load_dataset(&dataset)?;
    let parts: Vec<SrDistribution> = pool(a.common.workers)?.install(|| {
        seqs.par_iter()
            .map(|s| {
                s.groundtruth
                    .as_deref()
                    .map(min_sr_distribution_of)
                    .unwrap_or_default()
            })
            .collect()
    });
    let mut d = SrDistribution::default();
    for p in &parts {
        d.merge(p);
    }
    let report = StatsReport {
        sequences: seqs.len(),
        pairs: d.total(),
        skipped: d.skipped,
        counts: RadiusCategory::ALL
            .iter()
            .map(|c| (c.to_string(), d.counts[c.index()]))
            .collect(),
        fractions: RadiusCategory::ALL
            .iter()
            .map(|c| (c.to_string(), d.fraction(*c)))
            .collect(),
    };
    emit(a.output.as_deref(), &to_json(&report)?)
}

fn sample(a: SampleArgs) -> Result<()> {
    let cfg = load_config(&a.common)?;
    let dataset = required(a.dataset.as_ref(), cfg.dataset.as_ref(), "dataset")?;
    let output = required(a.output.as_ref(), cfg.output.as_ref(), "output")?;
    let sampler = cfg.sampler()?;
    let interp = cfg.interpolation;
    let seqs = load_dataset(&dataset)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let geoms = sample_dataset_geometry(&seqs, a.count, &sampler, &mut rng)?;
    fs::create_dir_all(&output).map_err(|e| Error::Io {
        path: output.clone(),
        source: e,
    })?;
    let by_name: BTreeMap<&str, &Sequence> = seqs.iter().map(|s| (s.name.as_str(), s)).collect();
    pool(a.common.workers)?.install(|| {
        geoms
            .par_iter()
            .enumerate()
            .map(|(id, g)| {
                let seq = by_name[g.provenance.sequence.as_str()];
                export_sample(&output, id, &materialize(seq, g, interp)?)
            })
            .collect::<Result<Vec<()>>>()
    })?;
    write_index(&output, &geoms)?;
    println!("wrote {} samples to {}", geoms.len(), output.display());
    Ok(())
}

fn bench_sequence(frames: usize, seed: u64) -> Result<Sequence> {
    let spec = MotionSpec {
        name: "bench".into(),
        length: frames,
        image_size: [480, 360],
        target_size: [40.0, 32.0],
        start: Some([100.0, 180.0]),
        motion: Motion::Constant { dx: 0.5, dy: 0.05 },
        texture_seed: seed,
    };
    generate_synthetic_sequence(&spec, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn bench(a: BenchArgs) -> Result<()> {
    let mut cfg = load_config(&a.common)?;
    let rows_from = a
        .tracker
        .categories
        .clone()
        .unwrap_or_else(|| vec![2, 4, 6]);
    let flags = TrackerFlags {
        categories: None,
        ..a.tracker
    };
    apply_tracker_flags(&mut cfg, &flags)?;
    let pcfg = cfg.pipeline()?;
    let seqs = match a.dataset.as_ref().or(cfg.dataset.as_ref()) {
        Some(d) => load_dataset(d)?,
        None => vec![bench_sequence(a.frames, cfg.seed)?],
    };
    let mut rows: Vec<(String, Option<RadiusCategory>)> = rows_from
        .iter()
        .map(|&f| parse_category(f).map(|c| (format!("fixed-{c}"), Some(c))))
        .collect::<Result<_>>()?;
    if a.regulated {
        rows.push(("srrt".into(), None));
    }
    // sequential on purpose: concurrent runs would distort the timings
    let mut csv = String::from("config,frames,mean_ms,median_ms,fps\n");
    for (label, fixed) in rows {
        let mut samples = Vec::new();
        for seq in &seqs {
            let traj = run_one(seq, fixed, &pcfg)?;
            samples.extend(traj.latencies_ms().into_iter().skip(a.warmup));
        }
        let s = LatencyStats::from_samples(&samples)?;
        csv.push_str(&format!(
            "{label},{},{:.4},{:.4},{:.2}\n",
            s.frames, s.mean_ms, s.median_ms, s.fps
        ));
    }
    emit(a.output.as_deref(), &csv)
}

fn synth(a: SynthArgs) -> Result<()> {
    let cfg = load_config(&a.common)?;
    let output = required(a.output.as_ref(), cfg.output.as_ref(), "output")?;
    let text = fs::read_to_string(&a.spec).map_err(|e| Error::Io {
        path: a.spec.clone(),
        source: e,
    })?;
    let specs: Vec<MotionSpec> = match serde_json::from_str::<serde_json::Value>(&text) {
        Ok(serde_json::Value::Array(items)) => items
            .into_iter()
            .map(|v| MotionSpec::from_json(&v.to_string()))
            .collect::<Result<_>>()?,
        Ok(_) => vec![MotionSpec::from_json(&text)?],
        Err(e) => return Err(Error::SpecInvalid(e.to_string())),
    };
    let mut names: Vec<&str> = specs.iter().map(|s| s.name.as_str()).collect();
    names.sort();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::SpecInvalid("sequence names must be unique".into()));
    }
    pool(a.common.workers)?.install(|| {
        specs
            .par_iter()
            .enumerate()
            .map(|(i, spec)| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
                let seq = generate_synthetic_sequence(spec, &mut rng)?;
                seq.save(&output.join(&seq.name))
            })
            .collect::<Result<Vec<()>>>()
    })?;
    println!("wrote {} sequences to {}", specs.len(), output.display());
    Ok(())
}
