//! Scratch measurement harness used while pinning test tolerances.

use dispersim::evolution::{self, RunConfig};
use dispersim::gauge::{
    self, gauged_norm, garding_probe, loss_symbols, q0_symbol, snapshot_gauge, GaugeSign,
    MatrixSymbol, PhiProfile,
};
use dispersim::grid::Grid2D;
use dispersim::initial::{gaussian_packet, random_band_limited};
use dispersim::{Complex64, ModelPreset};

fn packet(grid: &Grid2D, amplitude: f64, carrier: [f64; 2], width: f64) -> dispersim::SpectralField {
    let pi = std::f64::consts::PI;
    gaussian_packet(grid, amplitude, [pi, pi], carrier, width)
}

fn normalized_h3(
    u: &dispersim::SpectralField,
    target: f64,
) -> dispersim::SpectralField {
    u.scale(Complex64::new(target / u.sobolev_norm(3.0), 0.0))
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "all".to_string());
    let model = ModelPreset::dysthe();

    if which == "all" || which == "richardson" {
        // Criterion 6: dt-Richardson on a Dysthe run.
        let g = Grid2D::square(32).unwrap();
        let u0 = normalized_h3(&packet(&g, 1.0, [3.0, 0.0], 0.8), 1.5);
        let mut terminals = Vec::new();
        for dt in [8e-3, 4e-3, 2e-3] {
            let cfg = RunConfig::new(0.0, 3.5, dt, 6.4e-2);
            let traj = evolution::solve(&u0, &model, &cfg).unwrap();
            terminals.push(traj.final_field().clone());
        }
        let d1 = terminals[0]
            .add_scaled(Complex64::new(-1.0, 0.0), &terminals[1])
            .unwrap()
            .l2_norm();
        let d2 = terminals[1]
            .add_scaled(Complex64::new(-1.0, 0.0), &terminals[2])
            .unwrap()
            .l2_norm();
        println!("richardson: d1={d1:.6e} d2={d2:.6e} ratio={:.3}", d1 / d2);
    }

    if which == "all" || which == "slope" {
        // Criterion 8: defect slope in lambda at n = 48.
        let g = Grid2D::square(48).unwrap();
        let u0 = normalized_h3(&packet(&g, 1.0, [4.0, 0.0], 0.8), 0.8);
        let cfg = RunConfig::new(0.0, 3.5, 1e-3, 2e-2);
        let traj = evolution::solve(&u0, &model, &cfg).unwrap();
        let snap_u = traj.final_field();
        let t0 = std::time::Instant::now();
        let fields = gauge::probe_fields(&g, 20, 42);
        let mut points = Vec::new();
        for lambda in [4.0, 8.0, 16.0, 32.0] {
            let snap =
                snapshot_gauge(snap_u, &model.coefficients, &model.symbol, 3.5, Some(lambda), 7)
                    .unwrap();
            let defect = snap.operator.composition_defect(&fields);
            println!("lambda={lambda}: defect={defect:.6e}");
            points.push(((lambda as f64).ln(), defect.ln()));
        }
        let n = points.len() as f64;
        let sx: f64 = points.iter().map(|p| p.0).sum();
        let sy: f64 = points.iter().map(|p| p.1).sum();
        let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        println!("slope: {slope:.3}, elapsed {:?}", t0.elapsed());
    }

    if which == "all" || which == "garding" {
        // Criterion 9: probe floor across grids.
        for n in [16usize, 32, 64] {
            let g = Grid2D::square(n).unwrap();
            let u0 = packet(&g, 0.3, [2.0, 1.0], 1.2);
            let cfg = RunConfig::new(0.0, 3.5, 1e-3, 2e-2);
            let traj = evolution::solve(&u0, &model, &cfg).unwrap();
            let u = traj.final_field();
            let lambda = 4.0;
            let snap = snapshot_gauge(u, &model.coefficients, &model.symbol, 3.5, Some(lambda), 7)
                .unwrap();
            let q0 = q0_symbol(
                &snap.combined.on_axis(1),
                &snap.combined.on_axis(2),
                &model.symbol,
                lambda,
                &g,
            )
            .unwrap();
            let mut q: MatrixSymbol = loss_symbols(u, &model.coefficients, &model.symbol);
            q.add_scalar_diagonal(&q0);
            match garding_probe(&q, lambda, 12, 9) {
                Ok(v) => println!("garding n={n}: probe={v:.6e}"),
                Err(e) => println!("garding n={n}: ERROR {e}"),
            }
        }
    }

    if which == "all" || which == "equivalence" {
        // Criterion 10: gauged-norm equivalence constants.
        for n in [32usize, 64] {
            let g = Grid2D::square(n).unwrap();
            let u_snap = normalized_h3(&packet(&g, 1.0, [3.0, 0.0], 0.9), 0.6);
            let snap =
                snapshot_gauge(&u_snap, &model.coefficients, &model.symbol, 3.5, Some(4.0), 7)
                    .unwrap();
            let mut min_ratio = f64::INFINITY;
            let mut max_ratio = 0.0f64;
            for seed in 0..50 {
                let u = random_band_limited(&g, 8, 1000 + seed);
                let ratio = gauged_norm(&u, 3.5, &snap.operator) / u.sobolev_norm(3.5);
                min_ratio = min_ratio.min(ratio);
                max_ratio = max_ratio.max(ratio);
            }
            let c = max_ratio.max(1.0 / min_ratio);
            println!("equivalence n={n}: ratios [{min_ratio:.4}, {max_ratio:.4}], C={c:.4}");
        }
    }

    if which == "all" || which == "growth" {
        // Criterion 12: gauged growth-rate stability for the loss model.
        let mut loss = ModelPreset::dysthe();
        loss.coefficients.a1 = Complex64::new(-1.5, 4.0);
        for n in [32usize, 64] {
            let g = Grid2D::square(n).unwrap();
            let seed: u64 = std::env::args().nth(2).map(|v| v.parse().unwrap()).unwrap_or(77);
            let raw = random_band_limited(&g, 10, seed);
            let u0 = normalized_h3(&raw, 3.0);
            let mut cfg = RunConfig::new(0.0, 3.5, 1e-3, 0.25);
            cfg.snapshot_stride = 50;
            let t0 = std::time::Instant::now();
            match gauge::gauge_growth_study(&u0, &loss, &cfg, Some(16.0), 5) {
                Ok((rows, _)) => {
                    let first = rows.first().unwrap();
                    let last = rows.last().unwrap();
                    let gauged_rate = (last.n_t / first.n_t).ln() / (last.t - first.t);
                    let bare_rate = (last.hs_norm / first.hs_norm).ln() / (last.t - first.t);
                    println!(
                        "growth n={n}: gauged_rate={gauged_rate:.4} bare_rate={bare_rate:.4} \
                         kk_err_last={:.3e} elapsed {:?}",
                        last.kk_inv_err,
                        t0.elapsed()
                    );
                }
                Err(e) => println!("growth n={n}: ERROR {e}"),
            }
        }
    }

    if which == "all" || which == "conserve" {
        // Criterion 2: timing + drift of the full Dysthe run at n = 64.
        let g = Grid2D::square(64).unwrap();
        let u0 = normalized_h3(&packet(&g, 1.0, [4.0, 0.0], 0.5), 0.08);
        let cfg = RunConfig::new(0.0, 3.5, 1e-3, 0.1);
        let t0 = std::time::Instant::now();
        let traj = evolution::solve(&u0, &model, &cfg).unwrap();
        let l2_start = traj.records[0].l2_norm;
        let l2_end = traj.records.last().unwrap().l2_norm;
        println!(
            "conserve: drift={:.3e} elapsed {:?}",
            (l2_end - l2_start).abs() / l2_start,
            t0.elapsed()
        );
    }

    if which == "all" || which == "identity" {
        // Sanity on operator apply timing at n = 48.
        let g = Grid2D::square(48).unwrap();
        let u_snap = normalized_h3(&packet(&g, 1.0, [4.0, 0.0], 0.8), 0.8);
        let t0 = std::time::Instant::now();
        let snap = snapshot_gauge(&u_snap, &model.coefficients, &model.symbol, 3.5, Some(8.0), 7)
            .unwrap();
        let build = t0.elapsed();
        let u = random_band_limited(&g, 10, 3);
        let t1 = std::time::Instant::now();
        let _ = snap.operator.apply(&u, GaugeSign::Plus);
        println!("gauge n=48: build {build:?}, apply {:?}", t1.elapsed());
        let _ = PhiProfile::from_samples(1, vec![0.0; 48], 2.0 * std::f64::consts::PI, 0.5);
    }
}
