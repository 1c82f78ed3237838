//! Experiment drivers: run the configured study, write artifacts, and leave
//! a summary that `report` can reproduce from the artifacts alone.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use dispersim::diagnostics::{self, StudyAxis};
use dispersim::evolution::{self, EvolutionError, RunConfig};
use dispersim::gauge::{self, GaugeError};
use dispersim::grid::Grid2D;
use dispersim::initial;
use dispersim::nonlinear::{eval_f, product_estimate_probe};
use dispersim::snapshot;
use dispersim::{DispersiveSymbol, ModelPreset, SpectralField};

use crate::config::{ExperimentConfig, ExperimentKind, InitialData};
use crate::report;

/// Failure classes mapped to process exit codes.
pub enum RunError {
    /// Exit 1: configuration or I/O problems.
    Config(anyhow::Error),
    /// Exit 2: the solver failed to converge after the retry ladder.
    Solver(String),
    /// Exit 3: gauge calibration failed.
    Calibration(String),
}

impl RunError {
    pub fn code(&self) -> u8 {
        match self {
            RunError::Config(_) => 1,
            RunError::Solver(_) => 2,
            RunError::Calibration(_) => 3,
        }
    }

    pub fn reason(&self) -> String {
        match self {
            RunError::Config(err) => format!("config-error detail={err:#}").replace('\n', " "),
            RunError::Solver(msg) => format!("solver-divergence detail={msg}"),
            RunError::Calibration(msg) => format!("calibration-failure detail={msg}"),
        }
    }
}

impl From<anyhow::Error> for RunError {
    fn from(err: anyhow::Error) -> Self {
        RunError::Config(err)
    }
}

pub fn execute(cfg: &ExperimentConfig, quiet: bool) -> Result<(), RunError> {
    let out_dir = PathBuf::from(&cfg.output_dir);
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))
        .map_err(RunError::Config)?;

    let grid = cfg.grid.build().map_err(RunError::Config)?;
    let model = cfg.model.build().map_err(RunError::Config)?;

    let echo = serde_json::to_string_pretty(cfg).expect("config serializes");
    fs::write(out_dir.join("run.json"), echo)
        .context("writing run.json")
        .map_err(RunError::Config)?;

    match cfg.kind {
        ExperimentKind::Solve => run_solve(cfg, &grid, &model, &out_dir, quiet)?,
        ExperimentKind::Continuation => run_continuation(cfg, &grid, &model, &out_dir, quiet)?,
        ExperimentKind::Smoothing => run_smoothing(cfg, &grid, &model, &out_dir, quiet)?,
        ExperimentKind::GaugeGrowth => run_gauge_growth(cfg, &grid, &model, &out_dir, quiet)?,
        ExperimentKind::Convergence => run_convergence(cfg, &grid, &model, &out_dir, quiet)?,
        ExperimentKind::EstimateProbe => run_estimate_probe(cfg, &out_dir, quiet)?,
    }

    let results = report::summarize(&out_dir).map_err(RunError::Config)?;
    let mut summary = format!("dispersim {} summary\n\n", cfg.kind.as_str());
    summary.push_str(&cfg.echo());
    summary.push('\n');
    summary.push_str(&results);
    fs::write(out_dir.join("summary.txt"), &summary)
        .context("writing summary.txt")
        .map_err(RunError::Config)?;
    if !quiet {
        println!("{summary}");
        println!("artifacts in {}", out_dir.display());
    }
    Ok(())
}

fn initial_field(
    cfg: &ExperimentConfig,
    grid: &Grid2D,
) -> Result<SpectralField, RunError> {
    cfg.initial_data.build(grid, cfg.seed).map_err(RunError::Config)
}

fn run_solve(
    cfg: &ExperimentConfig,
    grid: &Grid2D,
    model: &ModelPreset,
    out_dir: &Path,
    quiet: bool,
) -> Result<(), RunError> {
    let u0 = initial_field(cfg, grid)?;
    let mut run_cfg = cfg.run_config();
    let mut last_failure = String::new();

    // Library-level non-convergence is an error; the driver's recovery
    // policy is a visible dt/2 ladder, at most 6 halvings.
    for attempt in 0..=6 {
        if !quiet && attempt > 0 {
            println!("retry {attempt}: dt = {}", run_cfg.dt);
        }
        match evolution::solve(&u0, model, &run_cfg) {
            Ok(traj) => {
                write_trajectory(out_dir, &traj).map_err(RunError::Config)?;
                return Ok(());
            }
            Err(EvolutionError::PicardDivergence { t, iterations, last_ratio, .. }) => {
                last_failure = format!(
                    "t={t} dt={} iterations={iterations} ratio={last_ratio:.3e}",
                    run_cfg.dt
                );
                run_cfg.dt /= 2.0;
            }
            Err(other) => {
                return Err(RunError::Config(anyhow::Error::from(other)));
            }
        }
    }
    Err(RunError::Solver(format!("after 6 dt halvings: {last_failure}")))
}

fn write_trajectory(out_dir: &Path, traj: &evolution::Trajectory) -> Result<()> {
    fs::write(out_dir.join("diagnostics.csv"), evolution::trajectory_csv(traj))
        .context("writing diagnostics.csv")?;
    let mut index = String::from("index,t,file\n");
    for (i, (t, field)) in traj.snapshots.iter().enumerate() {
        let name = format!("snapshot_{i:04}.dspf");
        snapshot::write_field(out_dir.join(&name), field)
            .with_context(|| format!("writing {name}"))?;
        let _ = writeln!(index, "{i},{t},{name}");
    }
    fs::write(out_dir.join("snapshots.csv"), index).context("writing snapshots.csv")?;
    Ok(())
}

fn run_continuation(
    cfg: &ExperimentConfig,
    grid: &Grid2D,
    model: &ModelPreset,
    out_dir: &Path,
    quiet: bool,
) -> Result<(), RunError> {
    let ladder = cfg.epsilon_ladder.clone().expect("validated");
    let u0 = initial_field(cfg, grid)?;
    if !quiet {
        println!("continuation over ε ladder {ladder:?}");
    }
    let run_cfg = cfg.run_config();
    let report = evolution::epsilon_continuation(&u0, model, &run_cfg, &ladder)
        .map_err(|e| RunError::Config(anyhow::Error::from(e)))?;

    let mut rungs = String::from("epsilon,sup_hs,t_reached,terminal_hs,failure\n");
    for entry in &report.entries {
        let terminal_hs = entry
            .terminal
            .as_ref()
            .map_or(String::new(), |f| format!("{}", f.sobolev_norm(run_cfg.s)));
        let failure = entry.failure.clone().unwrap_or_default().replace(',', ";");
        let _ = writeln!(
            rungs,
            "{},{},{},{},{}",
            entry.epsilon, entry.sup_hs, entry.t_reached, terminal_hs, failure
        );
    }
    fs::write(out_dir.join("continuation.csv"), rungs)
        .context("writing continuation.csv")
        .map_err(RunError::Config)?;

    let mut diffs = String::from("eps_hi,eps_lo,diff_hs\n");
    let successful: Vec<&evolution::ContinuationEntry> =
        report.entries.iter().filter(|e| e.terminal.is_some()).collect();
    for (pair, diff) in successful.windows(2).zip(&report.differences) {
        let _ = writeln!(diffs, "{},{},{}", pair[0].epsilon, pair[1].epsilon, diff);
    }
    fs::write(out_dir.join("differences.csv"), diffs)
        .context("writing differences.csv")
        .map_err(RunError::Config)?;
    Ok(())
}

fn run_smoothing(
    cfg: &ExperimentConfig,
    grid: &Grid2D,
    model: &ModelPreset,
    out_dir: &Path,
    quiet: bool,
) -> Result<(), RunError> {
    let carriers = cfg.carriers.clone().unwrap_or_else(|| vec![8.0, 16.0, 32.0]);
    let time_nodes = cfg.time_nodes.unwrap_or(49);
    let radius = cfg.window_radius.unwrap_or(0.9);
    let width = match &cfg.initial_data {
        InitialData::GaussianPacket { width, .. } => *width,
        _ => 0.45,
    };
    let center = [0.5 * grid.l1(), 0.5 * grid.l2()];
    let window = initial::bump_window(grid, center, radius);
    let trapping = DispersiveSymbol::new([1.0, 0.0, 0.0, 0.0], [0.0; 3], [0.0; 2], 0.0);

    let mut table = String::from("carrier,gain_half,gain_one,margin,trap_gain_one,ratio_one\n");
    for &k in &carriers {
        if !quiet {
            println!("smoothing probe at carrier (0, {k})");
        }
        let u0 = initial::gaussian_packet(grid, 1.0, center, [0.0, k], width);
        let free = diagnostics::smoothing_probe(
            &model.name,
            &model.symbol,
            &u0,
            cfg.t_end,
            &window,
            time_nodes,
        );
        let trapped =
            diagnostics::smoothing_probe("trapping", &trapping, &u0, cfg.t_end, &window, time_nodes);
        let g_half = free.gain(0.5).unwrap();
        let g_one = free.gain(1.0).unwrap();
        let g_trap = trapped.gain(1.0).unwrap();
        let _ = writeln!(
            table,
            "{k},{g_half},{g_one},{},{g_trap},{}",
            free.nontrapping_margin,
            g_one / g_trap
        );
    }
    fs::write(out_dir.join("smoothing.csv"), table)
        .context("writing smoothing.csv")
        .map_err(RunError::Config)?;
    Ok(())
}

fn run_gauge_growth(
    cfg: &ExperimentConfig,
    grid: &Grid2D,
    model: &ModelPreset,
    out_dir: &Path,
    quiet: bool,
) -> Result<(), RunError> {
    let u0 = initial_field(cfg, grid)?;
    let run_cfg = RunConfig {
        snapshot_stride: if cfg.snapshot_stride == 0 { 25 } else { cfg.snapshot_stride },
        ..cfg.run_config()
    };
    if !quiet {
        println!("gauge growth study, lambda = {:?}", cfg.lambda);
    }
    match gauge::gauge_growth_study(&u0, model, &run_cfg, cfg.lambda, cfg.seed) {
        Ok((rows, traj)) => {
            fs::write(out_dir.join("gauge.csv"), gauge::gauge_csv(&rows))
                .context("writing gauge.csv")
                .map_err(RunError::Config)?;
            write_trajectory(out_dir, &traj).map_err(RunError::Config)?;
            Ok(())
        }
        Err(GaugeError::CalibrationFailed { max_lambda, defect }) => Err(RunError::Calibration(
            format!("lambda={max_lambda} defect={defect:.3e}"),
        )),
        Err(GaugeError::Evolution(EvolutionError::PicardDivergence { t, iterations, .. })) => {
            Err(RunError::Solver(format!("t={t} iterations={iterations}")))
        }
        Err(other) => Err(RunError::Config(anyhow::Error::from(other))),
    }
}

fn run_convergence(
    cfg: &ExperimentConfig,
    grid: &Grid2D,
    model: &ModelPreset,
    out_dir: &Path,
    quiet: bool,
) -> Result<(), RunError> {
    let study = cfg.study.clone().expect("validated");
    let axis = match study.axis.as_str() {
        "grid" => StudyAxis::Grid(study.ladder.iter().map(|&v| v as usize).collect()),
        "dt" => StudyAxis::Dt(study.ladder.clone()),
        "epsilon" => StudyAxis::Epsilon(study.ladder.clone()),
        other => {
            return Err(RunError::Config(anyhow::anyhow!(
                "unknown study axis `{other}` (expected grid, dt or epsilon)"
            )))
        }
    };
    if !quiet {
        println!("convergence study along {}", study.axis);
    }
    // Grid-axis studies rebuild the data on each study grid; the other axes
    // run on the configured grid regardless of what the driver probes with.
    let is_grid_axis = study.axis == "grid";
    let data_cfg = cfg.initial_data.clone();
    let seed = cfg.seed;
    let configured_grid = grid.clone();
    let data = move |g: &Grid2D| {
        let target = if is_grid_axis { g } else { &configured_grid };
        data_cfg
            .build(target, seed)
            .expect("initial data valid on every study grid")
    };
    let table = diagnostics::convergence_study(&data, model, &cfg.run_config(), &axis)
        .map_err(|e| RunError::Config(anyhow::Error::from(e)))?;
    fs::write(out_dir.join("convergence.csv"), table.to_csv())
        .context("writing convergence.csv")
        .map_err(RunError::Config)?;
    let order = table
        .estimated_order
        .map_or(String::new(), |o| format!("{o}"));
    fs::write(out_dir.join("convergence_meta.csv"), format!("axis,estimated_order\n{},{}\n", table.axis, order))
        .context("writing convergence_meta.csv")
        .map_err(RunError::Config)?;
    Ok(())
}

fn run_estimate_probe(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    quiet: bool,
) -> Result<(), RunError> {
    let probe = cfg.probe.clone().unwrap_or(crate::config::ProbeConfig {
        sizes: vec![16, 32, 64],
        kmax: 6,
        trials: 6,
    });
    let s = cfg.s;
    let mut table = String::from("n,quantity,value\n");
    for &n in &probe.sizes {
        if !quiet {
            println!("estimate probe at n = {n}");
        }
        let grid = Grid2D::square(n).map_err(|e| RunError::Config(anyhow::Error::from(e)))?;
        for j in 0..4usize {
            let mut constant = 0.0f64;
            for trial in 0..probe.trials {
                let u = initial::random_band_limited(&grid, probe.kmax, cfg.seed + trial);
                let value = eval_f(j, &u)
                    .map_err(|e| RunError::Config(anyhow::Error::from(e)))?
                    .sobolev_norm(s - 1.0)
                    / u.sobolev_norm(s).powi(3);
                constant = constant.max(value);
            }
            let _ = writeln!(table, "{n},f{j},{constant}");
        }
        let mut ratio = 0.0f64;
        for trial in 0..probe.trials {
            let u = initial::random_band_limited(&grid, probe.kmax, cfg.seed + trial);
            let v = initial::random_band_limited(&grid, probe.kmax, cfg.seed + 100 + trial);
            ratio = ratio.max(
                product_estimate_probe(&u, &v, s)
                    .map_err(|e| RunError::Config(anyhow::Error::from(e)))?,
            );
        }
        let _ = writeln!(table, "{n},product,{ratio}");
    }
    fs::write(out_dir.join("estimates.csv"), table)
        .context("writing estimates.csv")
        .map_err(RunError::Config)?;
    Ok(())
}
