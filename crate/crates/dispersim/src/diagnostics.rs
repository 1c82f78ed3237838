//! Norm ledgers, the local-smoothing probe, and convergence-study drivers.
//!
//! These turn runs into numbers a test can pin down: per-step norm records
//! with discrete energy rates, windowed smoothing gains for nontrapping vs
//! trapping symbols, perturbation (uniqueness) probes and ladder studies in
//! grid size, step size or regularization strength.

use num_complex::Complex64;

use crate::evolution::{self, EvolutionError, RunConfig, Trajectory};
use crate::grid::{apply_multiplier, Grid2D, Multiplier, SpectralField};
use crate::symbols::{DispersiveSymbol, ModelPreset};

/// One row of the per-step norm ledger.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l2_norm: f64,
    pub hs_norm: f64,
    pub gauged_norm: Option<f64>,
    pub picard_iters: usize,
    pub contraction_ratio: f64,
    /// `∫φ` per axis when the gauge profiles were evaluated.
    pub phi_mass: Option<[f64; 2]>,
}

impl DiagnosticsRecord {
    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.l2_norm.is_finite()
            && self.hs_norm.is_finite()
            && self.contraction_ratio.is_finite()
            && self.gauged_norm.map_or(true, f64::is_finite)
            && self.phi_mass.map_or(true, |m| m[0].is_finite() && m[1].is_finite())
    }
}

/// Ledger row: the per-step record plus the discrete rate `d/dt ‖u‖²`.
#[derive(Debug, Clone)]
pub struct LedgerRow {
    pub record: DiagnosticsRecord,
    pub ddt_l2_sq: f64,
}

/// Builds the energy ledger of a trajectory. The `d/dt ‖u‖²` column uses
/// centered differences except at the endpoints (one-sided).
pub fn energy_ledger(traj: &Trajectory) -> Vec<LedgerRow> {
    let recs = &traj.records;
    let n = recs.len();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = if n == 1 {
            (i, i)
        } else if i == 0 {
            (0, 1)
        } else if i == n - 1 {
            (n - 2, n - 1)
        } else {
            (i - 1, i + 1)
        };
        let dt = recs[hi].t - recs[lo].t;
        let ddt = if dt > 0.0 {
            (recs[hi].l2_norm.powi(2) - recs[lo].l2_norm.powi(2)) / dt
        } else {
            0.0
        };
        rows.push(LedgerRow { record: recs[i].clone(), ddt_l2_sq: ddt });
    }
    rows
}

/// CSV table of a ledger, header columns named after the record fields.
pub fn ledger_csv(rows: &[LedgerRow]) -> String {
    let mut out = String::from(
        "t,l2_norm,hs_norm,gauged_norm,picard_iters,contraction_ratio,phi_mass,ddt_l2_sq\n",
    );
    for row in rows {
        let r = &row.record;
        let gauged = r.gauged_norm.map_or(String::new(), |v| format!("{v}"));
        let mass = r.phi_mass.map_or(String::new(), |m| format!("{};{}", m[0], m[1]));
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.t, r.l2_norm, r.hs_norm, gauged, r.picard_iters, r.contraction_ratio, mass, row.ddt_l2_sq
        ));
    }
    out
}

/// Windowed smoothing gains of the free flow for one symbol.
#[derive(Debug, Clone)]
pub struct SmoothingReport {
    pub symbol_name: String,
    pub window_descriptor: String,
    pub t_end: f64,
    /// `(derivative order, gain integral)` pairs, orders 1/2 and 1.
    pub gains: Vec<(f64, f64)>,
    pub nontrapping_margin: f64,
}

impl SmoothingReport {
    /// Gain integral at the requested derivative order.
    pub fn gain(&self, order: f64) -> Option<f64> {
        self.gains
            .iter()
            .find(|(o, _)| (o - order).abs() < 1e-12)
            .map(|(_, g)| *g)
    }
}

/// Computes `G = ∫₀ᵀ ‖window · (−Δ)^{θ/2} e^{−t p(∂)} u₀‖² dt` by trapezoid
/// quadrature in time, at derivative orders θ = 1/2 and 1, after normalizing
/// `‖u₀‖ = 1`.
///
/// Third-order nontrapping flows gain one derivative locally, so the order-1
/// gain in a fixed window stays bounded while a trapped wave packet keeps
/// paying the full `|ξ₀|²` for the whole horizon.
pub fn smoothing_probe(
    name: &str,
    sym: &DispersiveSymbol,
    u0: &SpectralField,
    t_end: f64,
    window: &SpectralField,
    time_nodes: usize,
) -> SmoothingReport {
    assert!(time_nodes >= 2, "need at least two time nodes");
    assert!(t_end >= 0.0, "the probe horizon cannot be negative");
    let norm = u0.l2_norm();
    assert!(norm > 0.0, "the probe needs nonzero data");
    let u0 = u0.scale(Complex64::new(1.0 / norm, 0.0));
    let win_phys = window.to_physical();
    let area = u0.grid().cell_area();

    let orders = [0.5, 1.0];
    let mut gains = vec![0.0; orders.len()];
    if t_end > 0.0 {
        let h = t_end / (time_nodes - 1) as f64;
        for node in 0..time_nodes {
            let t = node as f64 * h;
            let weight = if node == 0 || node == time_nodes - 1 { 0.5 * h } else { h };
            let flow = evolution::linear_propagate(&u0, t, 0.0, sym)
                .expect("unitary flow accepts any time");
            for (slot, &order) in orders.iter().enumerate() {
                let m = Multiplier::new(move |w1, w2| {
                    Complex64::new((w1 * w1 + w2 * w2).powf(order / 2.0), 0.0)
                });
                let deriv = apply_multiplier(&flow, &m)
                    .expect("closure multipliers cannot mismatch")
                    .to_physical();
                let local: f64 = deriv
                    .values()
                    .iter()
                    .zip(win_phys.values())
                    .map(|(v, w)| (v * w).norm_sqr())
                    .sum::<f64>()
                    * area;
                gains[slot] += weight * local;
            }
        }
    }

    SmoothingReport {
        symbol_name: name.to_string(),
        window_descriptor: format!("{} samples", win_phys.values().len()),
        t_end,
        gains: orders.iter().copied().zip(gains).collect(),
        nontrapping_margin: sym.nontrapping_margin(1440),
    }
}

/// One rung of a perturbation (empirical uniqueness) probe.
#[derive(Debug, Clone)]
pub struct UniquenessRow {
    pub delta: f64,
    pub difference: f64,
    /// `‖u_δ(T) − u(T)‖_s / δ`; zero for the δ = 0 rung.
    pub ratio: f64,
    pub failure: Option<String>,
}

/// Solves from `u0` and from `u0 + δ·g` for a fixed seeded direction `g`
/// (unit `H^s` norm) down the δ ladder, reporting terminal differences.
///
/// Bounded, δ-stable ratios are the empirical signature of continuous
/// dependence on the data.
pub fn uniqueness_probe(
    u0: &SpectralField,
    model: &ModelPreset,
    cfg: &RunConfig,
    deltas: &[f64],
    seed: u64,
) -> Result<Vec<UniquenessRow>, EvolutionError> {
    for window in deltas.windows(2) {
        if !(window[0] > window[1]) {
            return Err(EvolutionError::InvalidConfig(
                "δ ladder must be strictly decreasing".to_string(),
            ));
        }
    }
    let grid = u0.grid().clone();
    let kmax = ((grid.n1().min(grid.n2()) / 4) as i64).clamp(1, 8);
    let g_raw = crate::initial::random_band_limited(&grid, kmax, seed);
    let g = g_raw.scale(Complex64::new(1.0 / g_raw.sobolev_norm(cfg.s), 0.0));

    let base = evolution::solve(u0, model, cfg)?;
    let base_final = base.final_field();

    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        if delta == 0.0 {
            rows.push(UniquenessRow { delta, difference: 0.0, ratio: 0.0, failure: None });
            continue;
        }
        let perturbed0 = u0.add_scaled(Complex64::new(delta, 0.0), &g)?;
        match evolution::solve(&perturbed0, model, cfg) {
            Ok(traj) => {
                let diff = traj
                    .final_field()
                    .add_scaled(Complex64::new(-1.0, 0.0), base_final)?
                    .sobolev_norm(cfg.s);
                rows.push(UniquenessRow { delta, difference: diff, ratio: diff / delta, failure: None });
            }
            Err(EvolutionError::PicardDivergence { t, .. }) => rows.push(UniquenessRow {
                delta,
                difference: f64::NAN,
                ratio: f64::NAN,
                failure: Some(format!("solver diverged at t = {t}")),
            }),
            Err(other) => return Err(other),
        }
    }
    Ok(rows)
}

/// Ladder axis of a convergence study.
#[derive(Debug, Clone)]
pub enum StudyAxis {
    /// Square grid sizes, coarse to fine.
    Grid(Vec<usize>),
    /// Step sizes, coarse to fine.
    Dt(Vec<f64>),
    /// Regularization strengths, large to small.
    Epsilon(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub level_a: f64,
    pub level_b: f64,
    /// Terminal-state `L²` difference between the two levels.
    pub difference: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub axis: String,
    pub rows: Vec<ConvergenceRow>,
    /// Mean observed order when the ladder has ≥ 3 levels (log-ratio of
    /// consecutive differences over the level refinement ratio).
    pub estimated_order: Option<f64>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level_a,level_b,difference\n");
        for row in &self.rows {
            out.push_str(&format!("{},{},{}\n", row.level_a, row.level_b, row.difference));
        }
        out
    }
}

/// Restricts a field to the retained window of a coarser grid.
fn restrict_to(u: &SpectralField, coarse: &Grid2D) -> SpectralField {
    let spec = u.to_spectral();
    let fine = spec.grid();
    let mut values = vec![Complex64::default(); coarse.len()];
    for i1 in 0..coarse.n1() {
        for i2 in 0..coarse.n2() {
            let k1 = if i1 < coarse.n1() / 2 { i1 as i64 } else { i1 as i64 - coarse.n1() as i64 };
            let k2 = if i2 < coarse.n2() / 2 { i2 as i64 } else { i2 as i64 - coarse.n2() as i64 };
            if let Some(src) = fine.mode_index(k1, k2) {
                values[coarse.index(i1, i2)] = spec.values()[src];
            }
        }
    }
    SpectralField::from_spectral(coarse.clone(), values)
}

/// Runs the configured problem along a refinement ladder and tabulates
/// terminal-state differences between consecutive levels.
///
/// The initial data is rebuilt per grid through `data`, so grid-axis studies
/// compare the same continuum problem at different resolutions (differences
/// are measured after restriction to the coarser window).
pub fn convergence_study(
    data: &dyn Fn(&Grid2D) -> SpectralField,
    model: &ModelPreset,
    cfg: &RunConfig,
    axis: &StudyAxis,
) -> Result<ConvergenceTable, EvolutionError> {
    match axis {
        StudyAxis::Grid(sizes) => {
            if sizes.len() < 2 {
                return Err(EvolutionError::InvalidConfig("grid ladder needs ≥ 2 levels".into()));
            }
            let mut terminals = Vec::new();
            for &n in sizes {
                let grid = Grid2D::square(n).map_err(EvolutionError::Grid)?;
                let u0 = data(&grid);
                let traj = evolution::solve(&u0, model, cfg)?;
                terminals.push((n as f64, traj.final_field().clone()));
            }
            let mut rows = Vec::new();
            for pair in terminals.windows(2) {
                let (na, ua) = &pair[0];
                let (nb, ub) = &pair[1];
                let restricted = restrict_to(ub, ua.grid());
                let diff = ua
                    .add_scaled(Complex64::new(-1.0, 0.0), &restricted)?
                    .l2_norm();
                rows.push(ConvergenceRow { level_a: *na, level_b: *nb, difference: diff });
            }
            Ok(ConvergenceTable { axis: "grid".into(), rows, estimated_order: None })
        }
        StudyAxis::Dt(dts) => {
            if dts.len() < 2 {
                return Err(EvolutionError::InvalidConfig("dt ladder needs ≥ 2 levels".into()));
            }
            let grid = {
                let probe = data(&Grid2D::square(16).map_err(EvolutionError::Grid)?);
                probe.grid().clone()
            };
            let u0 = data(&grid);
            let mut terminals = Vec::new();
            for &dt in dts {
                let mut run = cfg.clone();
                run.dt = dt;
                let traj = evolution::solve(&u0, model, &run)?;
                terminals.push((dt, traj.final_field().clone()));
            }
            let (rows, order) = tabulate(&terminals)?;
            Ok(ConvergenceTable { axis: "dt".into(), rows, estimated_order: order })
        }
        StudyAxis::Epsilon(ladder) => {
            if ladder.len() < 2 {
                return Err(EvolutionError::InvalidConfig("ε ladder needs ≥ 2 levels".into()));
            }
            let grid = {
                let probe = data(&Grid2D::square(16).map_err(EvolutionError::Grid)?);
                probe.grid().clone()
            };
            let u0 = data(&grid);
            let mut terminals = Vec::new();
            for &eps in ladder {
                let mut run = cfg.clone();
                run.epsilon = eps;
                let traj = evolution::solve(&u0, model, &run)?;
                terminals.push((eps, traj.final_field().clone()));
            }
            let (rows, order) = tabulate(&terminals)?;
            Ok(ConvergenceTable { axis: "epsilon".into(), rows, estimated_order: order })
        }
    }
}

fn tabulate(
    terminals: &[(f64, SpectralField)],
) -> Result<(Vec<ConvergenceRow>, Option<f64>), EvolutionError> {
    let mut rows = Vec::new();
    for pair in terminals.windows(2) {
        let diff = pair[0]
            .1
            .add_scaled(Complex64::new(-1.0, 0.0), &pair[1].1)?
            .l2_norm();
        rows.push(ConvergenceRow { level_a: pair[0].0, level_b: pair[1].0, difference: diff });
    }
    let mut order = None;
    if rows.len() >= 2 {
        let mut estimates = Vec::new();
        for pair in rows.windows(2) {
            let refine = pair[0].level_a / pair[1].level_a;
            if pair[1].difference > 0.0 && refine > 1.0 {
                estimates.push((pair[0].difference / pair[1].difference).ln() / refine.ln());
            }
        }
        if !estimates.is_empty() {
            order = Some(estimates.iter().sum::<f64>() / estimates.len() as f64);
        }
    }
    Ok((rows, order))
}
