use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use omwu_core::dynamics::{default_stepsize, max_stepsize, Algorithm, SimConfig, Simulator};
use omwu_core::games::{dg_canonical_2x2, make_instance, sigma_min_restricted};
use omwu_core::metrics::{chi2_to_nash, kl_canonical_2x2, tv_canonical_2x2};
use omwu_core::verify::suites::{build_suite, SuiteOptions};
use omwu_core::verify::{kl_sweep, sweep_ordering_holds, SweepRow};
use omwu_core::{rng, CheckReport, Game, GameSpectral, InstanceFamily, InstanceParams, JointStrategy};
use rayon::prelude::*;
use serde::Serialize;

use crate::manifest::{Format, InitKind, RunManifest};
use crate::output::{fmt_f64, write_json, TrajectoryWriter};
use crate::{InstanceArgs, InstanceCmdArgs, LevelsetArgs, Measure, RunArgs, SweepArgs, Verdict, VerifyArgs, SEED_ENV};

fn env_seed() -> anyhow::Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => Ok(Some(s.trim().parse().with_context(|| format!("{SEED_ENV}={s:?} is not an unsigned integer"))?)),
        Err(_) => Ok(None),
    }
}

fn resolve_seed(flag: Option<u64>) -> anyhow::Result<u64> {
    Ok(match flag {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    })
}

fn pool(jobs: usize) -> anyhow::Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}

fn family_from(args: &InstanceArgs, horizon: Option<usize>) -> anyhow::Result<Option<InstanceFamily>> {
    let Some(tag) = args.family.as_deref() else { return Ok(None) };
    let params = InstanceParams {
        delta_p: args.delta_p,
        delta_q: args.delta_q,
        delta: args.delta,
        epsilon: args.epsilon,
        horizon,
    };
    Ok(Some(InstanceFamily::from_tag(tag, &params)?))
}

fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

#[derive(Serialize)]
struct RunSummary {
    final_kl: Option<f64>,
    final_dg: f64,
    best_dg: f64,
    best_dg_t: usize,
    energy_drop: f64,
    rows: usize,
}

fn start_strategy(m: &RunManifest, init: &JointStrategy, seed: u64) -> anyhow::Result<JointStrategy> {
    let (dm, dn) = (init.m(), init.n());
    match (&m.init_p, &m.init_q) {
        (Some(p), Some(q)) => {
            if p.len() != dm || q.len() != dn {
                bail!("init_p/init_q must have lengths {dm} and {dn}");
            }
            return Ok(JointStrategy::from_probs(p.clone(), q.clone())?);
        }
        (None, None) => {}
        _ => bail!("init_p and init_q must be given together"),
    }
    Ok(match m.init.unwrap_or(InitKind::Instance) {
        InitKind::Instance => init.clone(),
        InitKind::Uniform => JointStrategy::uniform(dm, dn),
        InitKind::Random => omwu_core::verify::random_strategy(&mut rng::seeded(seed), dm, dn, 2.0),
    })
}

pub fn run(a: RunArgs) -> anyhow::Result<Verdict> {
    let file = match &a.manifest {
        Some(p) => RunManifest::load(p)?,
        None => RunManifest::default(),
    };
    let flags = RunManifest {
        command: None,
        family: a.instance.family,
        delta_p: a.instance.delta_p,
        delta_q: a.instance.delta_q,
        delta: a.instance.delta,
        epsilon: a.instance.epsilon,
        eta: a.eta,
        horizon: a.horizon,
        stride: a.stride,
        seed: a.seed,
        algorithm: a.algorithm,
        init: a.init,
        init_p: a.init_p,
        init_q: a.init_q,
        enforce_stepsize: a.enforce_stepsize.then_some(true),
        out: a.out,
        format: a.format,
    };
    let mut m = file.overridden_by(flags);
    if let Some(c) = m.command.as_deref() {
        if c != "run" {
            bail!("manifest is for command {c:?}, not run");
        }
    }
    let family = m.family()?;
    let inst = make_instance::<f64>(&family)?;
    let game = inst.game();
    let seed = match m.seed {
        Some(s) => s,
        None => resolve_seed(None)?,
    };

    // resolved values are written back so the manifest replays the run exactly
    m.command = Some("run".into());
    m.family = Some(family.tag().into());
    m.eta = Some(m.eta.unwrap_or_else(|| default_stepsize(&game.matrix)));
    m.horizon = Some(m.horizon.unwrap_or(1500));
    m.stride = Some(m.stride.unwrap_or(1).max(1));
    m.seed = Some(seed);
    m.algorithm = Some(m.algorithm.unwrap_or(Algorithm::Omwu));
    m.enforce_stepsize = Some(m.enforce_stepsize.unwrap_or(false));
    m.format = Some(m.format.unwrap_or(Format::Csv));
    let out = m.out.clone().unwrap_or_else(|| PathBuf::from("omwu-out"));
    m.out = Some(out.clone());
    let (eta, horizon, stride, format) = (m.eta.unwrap(), m.horizon.unwrap(), m.stride.unwrap(), m.format.unwrap());

    let init = start_strategy(&m, &inst.init, seed)?;
    let cfg = SimConfig::new(init, eta, horizon)
        .stride(stride)
        .algorithm(m.algorithm.unwrap())
        .enforce(m.enforce_stepsize.unwrap());
    let sim = Simulator::new(&game, &cfg)?;

    ensure_dir(&out)?;
    let data_path = out.join(format!("trajectory.{}", format.extension()));
    let file = File::create(&data_path).with_context(|| format!("creating {}", data_path.display()))?;
    let mut writer = TrajectoryWriter::new(BufWriter::new(file), format, game.matrix.m(), game.matrix.n())?;
    let (mut first_energy, mut best, mut rows) = (f64::NAN, (0usize, f64::INFINITY), 0usize);
    let mut last = None;
    for rec in sim {
        if rec.t == 0 {
            first_energy = rec.energy;
        }
        if (rec.t >= 1 || horizon == 0) && rec.dg < best.1 {
            best = (rec.t, rec.dg);
        }
        if rec.t <= 1 || rec.t == horizon || rec.t % stride == 0 {
            writer.write(&rec)?;
            rows += 1;
        }
        last = Some(rec);
    }
    writer.finish()?;
    let last = last.context("simulation produced no records")?;
    let summary = RunSummary {
        final_kl: last.kl,
        final_dg: last.dg,
        best_dg: best.1,
        best_dg_t: best.0,
        energy_drop: first_energy - last.energy,
        rows,
    };
    write_json(&out.join("summary.json"), &summary)?;
    write_json(&out.join("manifest.json"), &m)?;
    println!("wrote {} rows to {}", rows, data_path.display());
    Ok(Verdict::Pass)
}

fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' }).collect()
}

#[derive(Serialize)]
struct IndexEntry<'a> {
    name: &'a str,
    check_id: &'a str,
    pass: bool,
    violations: u64,
}

pub fn verify(a: VerifyArgs) -> anyhow::Result<Verdict> {
    let opts = SuiteOptions {
        seed: resolve_seed(a.seed)?,
        samples: a.samples,
        horizon: a.horizon,
        family: family_from(&a.instance, a.horizon)?,
    };
    let items = build_suite(&a.suite, &opts)?;
    let reports: Vec<CheckReport> = pool(a.jobs)?.install(|| items.par_iter().map(|i| i.run()).collect());
    if let Some(dir) = &a.out {
        ensure_dir(dir)?;
        for (item, r) in items.iter().zip(&reports) {
            write_json(&dir.join(format!("{}.json", file_stem(&item.name))), r)?;
        }
        let index: Vec<IndexEntry> = items
            .iter()
            .zip(&reports)
            .map(|(i, r)| IndexEntry { name: &i.name, check_id: &r.check_id, pass: r.pass, violations: r.violations })
            .collect();
        write_json(&dir.join("index.json"), &index)?;
    }
    for r in &reports {
        println!("{}", r.summary_line());
    }
    Ok(if reports.iter().all(|r| r.pass) { Verdict::Pass } else { Verdict::Fail })
}

pub fn levelset(a: LevelsetArgs) -> anyhow::Result<Verdict> {
    let dp = a.delta_p.or(a.delta).context("levelset needs --delta-p or --delta")?;
    let dq = a.delta_q.or(a.delta).context("levelset needs --delta-q or --delta")?;
    if a.grid_n < 2 {
        bail!("--grid-n must be at least 2");
    }
    let inst = make_instance::<f64>(&InstanceFamily::Canonical2x2 { delta_p: dp, delta_q: dq })?;
    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(BufWriter::new(sink));
    w.write_record(["p1", "q1", "value"])?;
    let n = a.grid_n as f64;
    for i in 0..a.grid_n {
        let p1 = (i as f64 + 0.5) / n;
        for j in 0..a.grid_n {
            let q1 = (j as f64 + 0.5) / n;
            let pt = JointStrategy::from_probs(vec![p1, 1.0 - p1], vec![q1, 1.0 - q1])?;
            let v = match a.measure {
                Measure::Kl => kl_canonical_2x2(dp, dq, &pt)?,
                Measure::Tv => tv_canonical_2x2(dp, dq, &pt)?,
                Measure::Dg => dg_canonical_2x2(dp, dq, &pt)?,
                Measure::Chi2 => chi2_to_nash(&inst.nash, &pt)?,
            };
            w.write_record([fmt_f64(p1), fmt_f64(q1), fmt_f64(v)])?;
        }
    }
    w.flush()?;
    Ok(Verdict::Pass)
}

#[derive(Serialize)]
struct SweepSummaryRow {
    delta: f64,
    slope: Option<f64>,
    final_kl: f64,
}

#[derive(Serialize)]
struct SweepSummary {
    family: String,
    eta: f64,
    horizon: usize,
    rows: Vec<SweepSummaryRow>,
    ordering_holds: bool,
}

pub fn sweep(a: SweepArgs) -> anyhow::Result<Verdict> {
    if a.deltas.is_empty() {
        bail!("--deltas is empty");
    }
    let rows: Vec<SweepRow> = pool(a.jobs)?.install(|| {
        a.deltas
            .par_iter()
            .map(|&d| kl_sweep(&a.family, &[d], a.eta, a.horizon, a.stride).map(|mut v| v.remove(0)))
            .collect::<omwu_core::Result<_>>()
    })?;
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from("omwu-sweep"));
    ensure_dir(&out)?;
    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    let mut header = vec!["t".to_string()];
    header.extend(rows.iter().map(|r| format!("log_kl_delta={}", r.delta)));
    w.write_record(&header)?;
    for (k, &t) in rows[0].t.iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(rows.iter().map(|r| fmt_f64(r.log_kl[k])));
        w.write_record(&rec)?;
    }
    w.flush()?;
    let holds = sweep_ordering_holds(&rows);
    let summary = SweepSummary {
        family: a.family.clone(),
        eta: a.eta,
        horizon: a.horizon,
        rows: rows.iter().map(|r| SweepSummaryRow { delta: r.delta, slope: r.slope, final_kl: r.final_kl }).collect(),
        ordering_holds: holds,
    };
    write_json(&out.join("sweep_summary.json"), &summary)?;
    for r in &summary.rows {
        let slope = r.slope.map_or("none (starts at equilibrium)".to_string(), |s| format!("{s:.6e}"));
        println!("delta={} slope={slope} final_kl={:.6e}", r.delta, r.final_kl);
    }
    println!("ordering {}", if holds { "holds" } else { "violated" });
    Ok(if holds { Verdict::Pass } else { Verdict::Fail })
}

#[derive(Serialize)]
struct InstanceDescription {
    family: InstanceFamily,
    matrix: Vec<Vec<f64>>,
    p_star: Vec<f64>,
    q_star: Vec<f64>,
    value: f64,
    init_p: Vec<f64>,
    init_q: Vec<f64>,
    spectral: GameSpectral,
    max_stepsize: f64,
}

pub fn instance(a: InstanceCmdArgs) -> anyhow::Result<Verdict> {
    let family = family_from(&a.instance, a.horizon)?.context("instance needs --family")?;
    let inst = make_instance::<f64>(&family)?;
    let game: Game = inst.game();
    let desc = InstanceDescription {
        family,
        matrix: game.matrix.to_rows_f64(),
        p_star: inst.nash.p_star.clone(),
        q_star: inst.nash.q_star.clone(),
        value: inst.nash.value,
        init_p: inst.init.p().to_vec(),
        init_q: inst.init.q().to_vec(),
        spectral: sigma_min_restricted(&game.matrix),
        max_stepsize: max_stepsize(&game.matrix),
    };
    match &a.out {
        Some(p) => write_json(p, &desc)?,
        None => println!("{}", serde_json::to_string_pretty(&desc)?),
    }
    Ok(Verdict::Pass)
}
