use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use hambreak::compare::{
    rank_setups, reference_crash_pattern, write_matches_csv, MatchRow, Pattern,
};
use hambreak::empirical::{empirical_report, load_prices_path, EmpiricalReport};
use hambreak::montecarlo::{
    default_betas, default_levels, run_batch, sweep_grid, Batch, Cell, RunConfig,
};
use hambreak::setups::{self, Setup};
use hambreak::stats::{aggregate, StatReport};
use log::info;
use serde::Serialize;

use crate::config::{load_events, ExperimentConfig, Grid};
use crate::{AnalyzeArgs, Common, CompareArgs, Failure, SimulateArgs};

type Outcome = Result<(), Failure>;

fn invalid(msg: impl std::fmt::Display) -> Failure {
    Failure::Invalid(anyhow!("{msg}"))
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

pub fn run_in_pool(threads: Option<usize>, f: impl FnOnce() -> Outcome + Send) -> Outcome {
    match threads {
        None => f(),
        Some(0) => Err(invalid("--threads must be >= 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(runtime)?
            .install(f),
    }
}

fn base_config(common: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(s) = common.perm_seed {
        cfg.perm_seed = s;
    }
    if let Some(o) = &common.out {
        cfg.out_dir = Some(o.clone());
    }
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig) -> Result<PathBuf, Failure> {
    let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(Failure::Runtime)?;
    Ok(dir)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(Failure::Runtime)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Outcome {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(runtime)?;
    writeln!(w).map_err(runtime)?;
    w.flush().map_err(runtime)
}

fn resolve_setups(cfg: &ExperimentConfig) -> Result<Vec<Setup>, Failure> {
    match cfg.simulate.grid {
        Some(Grid::Standard | Grid::Sweep) => Ok(setups::single_element()),
        Some(Grid::Extensions) => Ok(setups::extensions()),
        None if cfg.simulate.setups.is_empty() => Ok(vec![setups::by_name("none")?]),
        None => cfg
            .simulate
            .setups
            .iter()
            .map(|n| setups::by_name(n).map_err(Failure::from))
            .collect(),
    }
}

#[derive(Debug, Serialize)]
struct CellRecord {
    setup: String,
    label: String,
    cell: usize,
    beta: Option<f64>,
    level: Option<f64>,
    seed: u64,
    n_runs: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    created: String,
    command: &'static str,
    seed: u64,
    perm_seed: u64,
    n_perm: usize,
    config: &'a ExperimentConfig,
    cells: Vec<CellRecord>,
}

const SAMPLES_HEADER: [&str; 6] = ["setup", "cell", "run_id", "period", "segment", "x"];

/// One row per observation; periods are 1-based positions in the series.
fn write_samples<W: Write>(
    w: &mut csv::Writer<W>,
    setup: &str,
    cell: usize,
    cfg: &RunConfig,
    batch: &Batch,
) -> Outcome {
    let (before, after) = cfg.part_ranges();
    let first_b = before.end - cfg.window;
    for r in &batch.runs {
        let run = r.meta.run.to_string();
        let segments = [
            ("B", before.start, &r.parts.before),
            ("b", first_b, &r.parts.before_short),
            ("a", after.start, &r.parts.after_short),
            ("A", after.start, &r.parts.after),
        ];
        for (seg, start, xs) in segments {
            for (i, x) in xs.iter().enumerate() {
                let period = (start + i + 1).to_string();
                let cell = cell.to_string();
                w.write_record([
                    setup,
                    cell.as_str(),
                    run.as_str(),
                    &period,
                    seg,
                    &x.to_string(),
                ])
                .map_err(runtime)?;
            }
        }
    }
    Ok(())
}

pub fn simulate(common: &Common, args: &SimulateArgs) -> Outcome {
    let mut cfg = base_config(common)?;
    if let Some(n) = args.runs {
        cfg.run.n_runs = n;
    }
    if let Some(n) = args.n_perm {
        cfg.n_perm = n;
    }
    if args.grid.is_some() {
        cfg.simulate.grid = args.grid;
    }
    if !args.setup.is_empty() {
        cfg.simulate.grid = None;
        cfg.simulate.setups = args.setup.clone();
    }
    if !args.beta.is_empty() {
        cfg.simulate.betas = args.beta.clone();
    }
    if !args.intensity.is_empty() {
        cfg.simulate.levels = args.intensity.clone();
    }
    if args.no_samples {
        cfg.simulate.write_samples = false;
    }
    if cfg.simulate.grid == Some(Grid::Sweep) {
        if cfg.simulate.betas.is_empty() {
            cfg.simulate.betas = default_betas();
        }
        if args.intensity.is_empty() && cfg.simulate.levels == [1.0] {
            cfg.simulate.levels = default_levels();
        }
    }
    cfg.run.seed = cfg.seed;
    cfg.validate()?;
    let setups = resolve_setups(&cfg)?;
    let betas = if cfg.simulate.betas.is_empty() {
        vec![cfg.run.market.beta]
    } else {
        cfg.simulate.betas.clone()
    };
    let levels = cfg.simulate.levels.clone();
    let single = betas.len() == 1 && levels.len() == 1;

    let dir = out_dir(&cfg)?;
    let mut samples = if cfg.simulate.write_samples {
        let mut w = csv::Writer::from_writer(create(&dir, "samples.csv")?);
        w.write_record(SAMPLES_HEADER).map_err(runtime)?;
        Some(w)
    } else {
        None
    };

    let mut rows: Vec<StatReport> = Vec::new();
    let mut cells: Vec<CellRecord> = Vec::new();
    for setup in &setups {
        let batches: Vec<Cell> = if single {
            let mut c = setup.apply(&cfg.run, levels[0]);
            c.market.beta = betas[0];
            let batch = run_batch(&c)?;
            let stochastic = c.extensions.stochastic_params;
            vec![Cell {
                index: 0,
                beta: (!stochastic).then_some(betas[0]),
                level: (!stochastic && c.has_intensity()).then_some(levels[0]),
                config: c,
                batch,
            }]
        } else {
            sweep_grid(&setup.apply(&cfg.run, 1.0), &betas, &levels)?
        };
        for cell in batches {
            let label = if single {
                setup.label.clone()
            } else {
                let mut l = setup.label.clone();
                let mut sep = " @ ";
                if let Some(b) = cell.beta {
                    l.push_str(&format!("{sep}beta={b}"));
                    sep = ", ";
                }
                if let Some(v) = cell.level {
                    l.push_str(&format!("{sep}level={v}"));
                }
                l
            };
            info!("{label}: {} runs", cell.batch.runs.len());
            if let Some(w) = samples.as_mut() {
                write_samples(w, &setup.name, cell.index, &cell.config, &cell.batch)?;
            }
            rows.push(aggregate(&cell.batch, cfg.n_perm, cfg.perm_seed)?.with_setup(label.clone()));
            cells.push(CellRecord {
                setup: setup.name.clone(),
                label,
                cell: cell.index,
                beta: cell.beta,
                level: cell.level,
                seed: cell.config.seed,
                n_runs: cell.config.n_runs,
            });
        }
    }
    if let Some(mut w) = samples {
        w.flush().map_err(runtime)?;
    }

    StatReport::write_csv(&rows, create(&dir, "report.csv")?)?;
    write_json(&dir, "report.json", &rows)?;
    write_json(
        &dir,
        "manifest.json",
        &Manifest {
            tool: "hambreak",
            version: env!("CARGO_PKG_VERSION"),
            created: chrono::Utc::now().to_rfc3339(),
            command: "simulate",
            seed: cfg.seed,
            perm_seed: cfg.perm_seed,
            n_perm: cfg.n_perm,
            config: &cfg,
            cells,
        },
    )?;
    let mut out = std::io::stdout().lock();
    StatReport::write_csv(&rows, &mut out)?;
    info!("wrote {}", dir.display());
    Ok(())
}

fn require_file(p: &Path) -> Outcome {
    if p.is_file() {
        Ok(())
    } else {
        Err(invalid(format!("{}: no such file", p.display())))
    }
}

pub fn analyze(common: &Common, args: &AnalyzeArgs) -> Outcome {
    let mut cfg = base_config(common)?;
    let e = &mut cfg.empirical;
    if let Some(d) = &args.data {
        e.data = Some(d.clone());
    }
    if let Some(p) = &args.events {
        e.events_file = Some(p.clone());
        e.events.clear();
    }
    if let Some(s) = args.bpd_side {
        e.bpd_side = s.into();
    }
    if args.window_days.is_some() {
        e.window_days = args.window_days;
    }
    if e.events.is_empty() {
        let path = e
            .events_file
            .clone()
            .ok_or_else(|| invalid("no events: pass --events or set empirical.events"))?;
        require_file(&path)?;
        e.events = load_events(&path)?;
    }
    if let Some(w) = e.window_days {
        if w == 0 {
            return Err(invalid("--window-days must be >= 1"));
        }
        for ev in &mut e.events {
            ev.window_days = w;
        }
    }
    let data = e
        .data
        .clone()
        .ok_or_else(|| invalid("no price data: pass --data or set empirical.data"))?;
    require_file(&data)?;
    let prices = load_prices_path(&data)?;
    let report = empirical_report(&prices, &cfg.empirical.events, cfg.empirical.bpd_side)?;

    let dir = out_dir(&cfg)?;
    report.write_csv(create(&dir, "empirical.csv")?)?;
    write_json(&dir, "empirical.json", &report)?;
    let mut out = std::io::stdout().lock();
    report.write_csv(&mut out)?;
    info!("wrote {}", dir.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct Comparison {
    target_source: String,
    target: Pattern,
    matches: Vec<MatchRow>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, Failure> {
    require_file(path)?;
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Invalid)?;
    serde_json::from_str(&text)
        .with_context(|| format!("{} is not a valid {what}", path.display()))
        .map_err(Failure::Invalid)
}

pub fn compare(common: &Common, args: &CompareArgs) -> Outcome {
    let cfg = base_config(common)?;
    let reports: Vec<StatReport> = read_json(&args.sim, "simulation report")?;
    if reports.is_empty() {
        return Err(invalid(format!("{}: no setups", args.sim.display())));
    }
    let (source, target) = if let Some(p) = &args.empirical {
        let r: EmpiricalReport = read_json(p, "empirical report")?;
        (p.display().to_string(), Pattern::from_summary(&r.summary)?)
    } else if let Some(name) = &args.target_setup {
        let row = reports
            .iter()
            .find(|r| &r.setup == name)
            .ok_or_else(|| invalid(format!("setup '{name}' not in {}", args.sim.display())))?;
        (format!("setup:{name}"), Pattern::from_report(row)?)
    } else {
        (
            "reference:djia-crashes".to_string(),
            reference_crash_pattern(),
        )
    };
    let matches = rank_setups(&reports, &target)?;

    let dir = out_dir(&cfg)?;
    write_matches_csv(&matches, create(&dir, "compare.csv")?)?;
    write_json(
        &dir,
        "compare.json",
        &Comparison {
            target_source: source,
            target,
            matches: matches.clone(),
        },
    )?;
    let mut out = std::io::stdout().lock();
    write_matches_csv(&matches, &mut out)?;
    info!("wrote {}", dir.display());
    Ok(())
}
