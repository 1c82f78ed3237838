//! Summaries re-derived from the artifacts of a completed run directory.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::config::{ExperimentConfig, ExperimentKind};

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn load(path: &Path) -> Result<Csv> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("missing artifact {}", path.display()))?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .context("empty CSV artifact")?
            .split(',')
            .map(str::to_string)
            .collect();
        let rows = lines
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect();
        Ok(Csv { header, rows })
    }

    fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .header
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("CSV lacks column {name}"))?;
        self.rows
            .iter()
            .map(|r| {
                r[idx]
                    .parse::<f64>()
                    .with_context(|| format!("non-numeric value in column {name}"))
            })
            .collect()
    }
}

/// Loads the run configuration echoed into the artifact directory.
pub fn load_config(dir: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(dir.join("run.json"))
        .with_context(|| format!("missing artifact {}", dir.join("run.json").display()))?;
    Ok(serde_json::from_str(&text).context("parsing run.json")?)
}

/// Builds the `[results]` section from the CSV artifacts alone.
pub fn summarize(dir: &Path) -> Result<String> {
    let cfg = load_config(dir)?;
    let mut out = String::from("[results]\n");
    match cfg.kind {
        ExperimentKind::Solve => summarize_trajectory(dir, &mut out)?,
        ExperimentKind::GaugeGrowth => {
            summarize_trajectory(dir, &mut out)?;
            summarize_gauge(dir, &mut out)?;
        }
        ExperimentKind::Continuation => summarize_continuation(dir, &mut out)?,
        ExperimentKind::Smoothing => summarize_smoothing(dir, &mut out)?,
        ExperimentKind::Convergence => summarize_convergence(dir, &mut out)?,
        ExperimentKind::EstimateProbe => summarize_estimates(dir, &mut out)?,
    }
    Ok(out)
}

fn summarize_trajectory(dir: &Path, out: &mut String) -> Result<()> {
    let diag = Csv::load(&dir.join("diagnostics.csv"))?;
    if diag.rows.is_empty() {
        bail!("diagnostics.csv holds no steps");
    }
    let t = diag.column("t")?;
    let l2 = diag.column("l2")?;
    let hs = diag.column("hs")?;
    let iters = diag.column("picard_iters")?;
    let ratio = diag.column("contraction_ratio")?;
    let steps = t.len() - 1;
    let _ = writeln!(out, "steps = {steps}");
    let _ = writeln!(out, "final_t = {}", t.last().unwrap());
    let _ = writeln!(out, "final_l2 = {}", l2.last().unwrap());
    let _ = writeln!(out, "final_hs = {}", hs.last().unwrap());
    let _ = writeln!(
        out,
        "l2_drift = {:e}",
        (l2.last().unwrap() - l2[0]).abs() / l2[0].max(f64::MIN_POSITIVE)
    );
    let _ = writeln!(out, "sup_hs = {}", hs.iter().cloned().fold(0.0f64, f64::max));
    let _ = writeln!(
        out,
        "max_picard_iters = {}",
        iters.iter().cloned().fold(0.0f64, f64::max)
    );
    let _ = writeln!(
        out,
        "max_contraction_ratio = {:e}",
        ratio.iter().cloned().fold(0.0f64, f64::max)
    );
    let snaps = Csv::load(&dir.join("snapshots.csv"))?;
    let _ = writeln!(out, "snapshots = {}", snaps.rows.len());
    Ok(())
}

fn summarize_gauge(dir: &Path, out: &mut String) -> Result<()> {
    let gauge = Csv::load(&dir.join("gauge.csv"))?;
    if gauge.rows.len() < 2 {
        bail!("gauge.csv holds fewer than two samples");
    }
    let t = gauge.column("t")?;
    let n_t = gauge.column("N_t")?;
    let hs = gauge.column("hs_norm")?;
    let kk = gauge.column("kk_inv_err")?;
    let lambda = gauge.column("lambda")?;
    let horizon = t.last().unwrap() - t[0];
    let gauged_rate = (n_t.last().unwrap() / n_t[0]).ln() / horizon;
    let bare_rate = (hs.last().unwrap() / hs[0]).ln() / horizon;
    let _ = writeln!(out, "lambda = {}", lambda[0]);
    let _ = writeln!(out, "gauged_energy_start = {}", n_t[0]);
    let _ = writeln!(out, "gauged_energy_end = {}", n_t.last().unwrap());
    let _ = writeln!(out, "gauged_rate = {gauged_rate}");
    let _ = writeln!(out, "bare_rate = {bare_rate}");
    let _ = writeln!(
        out,
        "worst_kk_inv_err = {:e}",
        kk.iter().cloned().fold(0.0f64, f64::max)
    );
    Ok(())
}

fn summarize_continuation(dir: &Path, out: &mut String) -> Result<()> {
    let rungs = Csv::load(&dir.join("continuation.csv"))?;
    let eps = rungs.column("epsilon")?;
    let sup = rungs.column("sup_hs")?;
    for (e, s) in eps.iter().zip(&sup) {
        let _ = writeln!(out, "rung eps={e} sup_hs={s}");
    }
    let diffs = Csv::load(&dir.join("differences.csv"))?;
    let hi = diffs.column("eps_hi")?;
    let lo = diffs.column("eps_lo")?;
    let d = diffs.column("diff_hs")?;
    for ((h, l), v) in hi.iter().zip(&lo).zip(&d) {
        let _ = writeln!(out, "difference {h} -> {l}: {v:e}");
    }
    let monotone = d.windows(2).all(|p| p[1] < p[0]);
    let _ = writeln!(out, "differences_strictly_decreasing = {monotone}");
    Ok(())
}

fn summarize_smoothing(dir: &Path, out: &mut String) -> Result<()> {
    let table = Csv::load(&dir.join("smoothing.csv"))?;
    let carriers = table.column("carrier")?;
    let ratio = table.column("ratio_one")?;
    let margin = table.column("margin")?;
    for (k, r) in carriers.iter().zip(&ratio) {
        let _ = writeln!(out, "carrier {k}: gain ratio nontrapping/trapping = {r}");
    }
    if let Some(m) = margin.first() {
        let _ = writeln!(out, "nontrapping_margin = {m}");
    }
    let falling = ratio.windows(2).all(|p| p[1] < p[0]);
    let _ = writeln!(out, "ratio_falls_with_carrier = {falling}");
    Ok(())
}

fn summarize_convergence(dir: &Path, out: &mut String) -> Result<()> {
    let table = Csv::load(&dir.join("convergence.csv"))?;
    let a = table.column("level_a")?;
    let b = table.column("level_b")?;
    let d = table.column("difference")?;
    for ((x, y), v) in a.iter().zip(&b).zip(&d) {
        let _ = writeln!(out, "levels {x} -> {y}: difference {v:e}");
    }
    let meta = Csv::load(&dir.join("convergence_meta.csv"))?;
    let _ = writeln!(out, "axis = {}", meta.rows[0][0]);
    if !meta.rows[0][1].is_empty() {
        let _ = writeln!(out, "estimated_order = {}", meta.rows[0][1]);
    }
    Ok(())
}

fn summarize_estimates(dir: &Path, out: &mut String) -> Result<()> {
    let table = Csv::load(&dir.join("estimates.csv"))?;
    let idx_q = table
        .header
        .iter()
        .position(|h| h == "quantity")
        .context("estimates.csv lacks quantity column")?;
    let n = table.column("n")?;
    let v = table.column("value")?;
    for (row, (size, value)) in table.rows.iter().zip(n.iter().zip(&v)) {
        let _ = writeln!(out, "n={size} {} = {value}", row[idx_q]);
    }
    // Grid stability: worst spread of each quantity across sizes.
    let mut quantities: Vec<String> = table.rows.iter().map(|r| r[idx_q].clone()).collect();
    quantities.sort();
    quantities.dedup();
    for q in quantities {
        let values: Vec<f64> = table
            .rows
            .iter()
            .zip(&v)
            .filter(|(r, _)| r[idx_q] == q)
            .map(|(_, val)| *val)
            .collect();
        let max = values.iter().cloned().fold(f64::MIN, f64::max);
        let min = values.iter().cloned().fold(f64::MAX, f64::min);
        let _ = writeln!(out, "spread {q} = {}", max / min);
    }
    Ok(())
}

/// Prints the full summary (config echo plus results) of a run directory.
pub fn print_report(dir: &Path) -> Result<String> {
    let cfg = load_config(dir)?;
    let results = summarize(dir)?;
    let mut text = format!("dispersim {} summary\n\n", cfg.kind.as_str());
    text.push_str(&cfg.echo());
    text.push('\n');
    text.push_str(&results);
    Ok(text)
}
