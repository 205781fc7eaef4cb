use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use wqed::dynamics::{
    asymptotic_momenta, classify_regime_and_windows, evolve_fixed_k, evolve_localized, is_embedded,
    markov_rate, photon_spectrum_and_directionality, position_observables,
};
use wqed::model::DEFAULT_SIZE_BUDGET;
use wqed::{
    band_scan, bound_wavefunctions, scatter as scatter_one, solve_bound_state, sweep_scattering, Branch,
    ModelParams, Momentum, WqedError,
};

use crate::output::{closed_axis, flag, fmt, momentum_grid, path_for, write_csv, Sidecar};
use crate::{CliError, MapArgs};

const SCATTER_HEADER: [&str; 12] = [
    "k_i", "p_i", "t_re", "t_im", "r_re", "r_im", "T", "R", "p_f2", "k_f2", "dE_qb", "degenerate",
];

const DIRECTIONALITY_NOTE: &str =
    "D = (N_{p>0} - N_{p<0}) / (N_{p>0} + N_{p<0}); the self-mirrored modes p = 0 and p = -pi are excluded";

fn announce(paths: &[&Path]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

pub fn scatter(params: &ModelParams, k_i: f64, p_i: f64, out: &Path) -> Result<(), CliError> {
    for (name, v) in [("ki", k_i), ("pi", p_i)] {
        if !v.is_finite() {
            return Err(WqedError::InvalidParams(format!("{name} must be finite")).into());
        }
    }
    let s = scatter_one(params, Momentum::new(k_i), Momentum::new(p_i));
    let (ki, pi) = (Momentum::new(k_i).value(), Momentum::new(p_i).value());
    let de_qb = params.qubit_energy(s.k_f2.value()) - params.qubit_energy(ki);
    let csv_path = path_for(out, "", "csv");
    write_csv(
        &csv_path,
        &SCATTER_HEADER,
        [vec![
            fmt(ki),
            fmt(pi),
            fmt(s.t.re),
            fmt(s.t.im),
            fmt(s.r.re),
            fmt(s.r.im),
            fmt(s.transmission()),
            fmt(s.reflection()),
            fmt(s.p_f2.value()),
            fmt(s.k_f2.value()),
            fmt(de_qb),
            flag(s.degenerate),
        ]],
    )?;
    let result = json!({
        "k_i": ki,
        "p_i": pi,
        "t": [s.t.re, s.t.im],
        "r": [s.r.re, s.r.im],
        "T": s.transmission(),
        "R": s.reflection(),
        "p_f2": s.p_f2.value(),
        "k_f2": s.k_f2.value(),
        "dE_qb": de_qb,
        "detuning": s.detuning,
        "gamma": s.gamma,
        "degenerate": s.degenerate,
        "branch_corrected": s.branch_corrected,
    });
    let json_path = path_for(out, "", "json");
    let mut meta = Sidecar::new("scatter", Some(params));
    meta.set("result", result.clone());
    meta.output(&csv_path);
    meta.finish(&json_path)?;
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(())
}

pub fn map(args: &MapArgs, command: &'static str, default_stem: &str) -> Result<(), CliError> {
    let params = args.params.build()?;
    if args.nk < 2 || args.np < 2 {
        return Err(WqedError::InvalidParams(format!(
            "nk and np must be >= 2 (got {} and {})",
            args.nk, args.np
        ))
        .into());
    }
    let stem = args.out.clone().unwrap_or_else(|| PathBuf::from(default_stem));
    let rows = sweep_scattering(&params, args.nk, args.np);
    let degenerate = rows.iter().filter(|r| r.degenerate).count();
    let csv_path = path_for(&stem, "", "csv");
    write_csv(
        &csv_path,
        &SCATTER_HEADER,
        rows.iter().map(|r| {
            vec![
                fmt(r.k_i),
                fmt(r.p_i),
                fmt(r.t.re),
                fmt(r.t.im),
                fmt(r.r.re),
                fmt(r.r.im),
                fmt(r.transmission),
                fmt(r.reflection),
                fmt(r.p_f2),
                fmt(r.k_f2),
                fmt(r.de_qb),
                flag(r.degenerate),
            ]
        }),
    )?;
    let json_path = path_for(&stem, "", "json");
    let mut meta = Sidecar::new(command, Some(&params));
    meta.set(
        "grid",
        json!({ "k_i": closed_axis(args.nk), "p_i": closed_axis(args.np), "order": "row-major, k_i outer" }),
    );
    meta.set("degenerate_rows", json!(degenerate));
    meta.output(&csv_path);
    meta.finish(&json_path)?;
    announce(&[&csv_path, &json_path]);
    Ok(())
}

pub fn bound_energies(params: &ModelParams, n_k: usize, out: &Path) -> Result<(), CliError> {
    let scan = band_scan(params, n_k)?;
    let csv_path = path_for(out, "", "csv");
    write_csv(
        &csv_path,
        &["K", "E_minus", "E_plus", "band_min", "band_max"],
        scan.rows
            .iter()
            .map(|r| vec![fmt(r.k), fmt(r.e_minus), fmt(r.e_plus), fmt(r.band_min), fmt(r.band_max)]),
    )?;
    let f = scan.flatness;
    let json_path = path_for(out, "", "json");
    let mut meta = Sidecar::new("bound-energies", Some(params));
    meta.set("grid", json!({ "K": closed_axis(n_k) }));
    meta.set(
        "flatness",
        json!({
            "model": "E_{K,+} - E_{pi,+} = c2 (K-pi)^2 + c4 (K-pi)^4",
            "c2": f.c2,
            "c4": f.c4,
            "window": f.window,
            "points": f.points,
            "quartic": f.is_quartic(),
        }),
    );
    meta.output(&csv_path);
    meta.finish(&json_path)?;
    announce(&[&csv_path, &json_path]);
    Ok(())
}

pub fn bound_wavefunction(
    params: &ModelParams,
    k: f64,
    branch: Branch,
    x_max: usize,
    out: &Path,
) -> Result<(), CliError> {
    if !k.is_finite() {
        return Err(WqedError::InvalidParams("K must be finite".into()).into());
    }
    let bound = solve_bound_state(params, Momentum::new(k), branch)?;
    let w = bound_wavefunctions(params, &bound, x_max);
    let csv_path = path_for(out, "", "csv");
    write_csv(
        &csv_path,
        &["x", "f_re", "f_im", "abs_f", "phase"],
        w.field.x.iter().zip(&w.field.amp).map(|(x, a)| {
            vec![x.to_string(), fmt(a.re), fmt(a.im), fmt(a.norm()), fmt(a.arg())]
        }),
    )?;
    let json_path = path_for(out, "", "json");
    let mut meta = Sidecar::new("bound-wavefunction", Some(params));
    meta.set("grid", json!({ "x": format!("-{x_max}..={x_max}"), "momentum": momentum_grid(params.l) }));
    meta.set(
        "bound_state",
        json!({
            "K": bound.k.value(),
            "branch": branch.as_str(),
            "energy": bound.energy,
            "u": bound.u,
            "y_in": [bound.y_in.re, bound.y_in.im],
            "localization_length": bound.loc_length,
            "residual": bound.residual,
            "cloud_weight": w.cloud_weight,
            "photon_density": w.photon_density,
            "one_sided_weight": w.one_sided_weight,
        }),
    );
    meta.output(&csv_path);
    meta.finish(&json_path)?;
    announce(&[&csv_path, &json_path]);
    Ok(())
}

/// `0, dt, 2dt, ..., tmax`; `tmax` must be a whole number of steps.
fn time_grid(tmax: f64, dt: f64) -> Result<Vec<f64>, WqedError> {
    if !(tmax.is_finite() && tmax > 0.0) {
        return Err(WqedError::InvalidParams(format!("tmax must be finite and > 0 (got {tmax})")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(WqedError::InvalidParams(format!("dt must be finite and > 0 (got {dt})")));
    }
    let steps = (tmax / dt).round();
    if steps < 1.0 || (steps * dt - tmax).abs() > 1e-9 * tmax {
        return Err(WqedError::InvalidParams(format!(
            "tmax must be a whole multiple of dt (got tmax={tmax}, dt={dt})"
        )));
    }
    let steps = steps as usize;
    Ok((0..=steps)
        .map(|i| if i == steps { tmax } else { i as f64 * dt })
        .collect())
}

fn time_meta(times: &[f64], dt: f64) -> Value {
    json!({ "t0": 0.0, "dt": dt, "tmax": times[times.len() - 1], "samples": times.len() })
}

pub fn emit_fixed_k(params: &ModelParams, k: f64, tmax: f64, dt: f64, out: &Path) -> Result<(), CliError> {
    if !k.is_finite() {
        return Err(WqedError::InvalidParams("K must be finite".into()).into());
    }
    let times = time_grid(tmax, dt)?;
    let km = Momentum::new(k);
    let traj = evolve_fixed_k(params, km, &times, DEFAULT_SIZE_BUDGET)?;
    let population = traj.excited_population();

    let (p, n_p, directionality) = match photon_spectrum_and_directionality(&traj, tmax) {
        Ok(s) => (s.p, s.n_p, Some(s.directionality)),
        // nothing emitted: report the empty spectrum with D undefined
        Err(WqedError::NotApplicable(_)) => {
            let last = &traj.states[traj.states.len() - 1];
            (params.grid().values(), last.phi.iter().map(|a| a.norm_sqr()).collect(), None)
        }
        Err(e) => return Err(e.into()),
    };

    let pop_path = path_for(out, "_population", "csv");
    write_csv(
        &pop_path,
        &["t", "P_e_total"],
        times.iter().zip(&population).map(|(t, pe)| vec![fmt(*t), fmt(*pe)]),
    )?;
    let spec_path = path_for(out, "_spectrum", "csv");
    write_csv(
        &spec_path,
        &["p", "N_p"],
        p.iter().zip(&n_p).map(|(p, n)| vec![fmt(*p), fmt(*n)]),
    )?;

    let embedded = is_embedded(params, km.value());
    let (momenta, rate) = if embedded {
        (asymptotic_momenta(params, km).ok(), markov_rate(params, km).ok())
    } else {
        (None, None)
    };
    let json_path = path_for(out, "", "json");
    let mut meta = Sidecar::new("emit-fixed-k", Some(params));
    meta.set("grid", json!({ "momentum": momentum_grid(params.l), "time": time_meta(&times, dt) }));
    meta.set(
        "result",
        json!({
            "K": km.value(),
            "embedded": embedded,
            "E_K": params.effective_gap(km.value()),
            "band_halfwidth": params.band_halfwidth(km.value()),
            "p_plus": momenta.map(|m| m.0),
            "p_minus": momenta.map(|m| m.1),
            "markov_rate": rate,
            "P_e_final": population[population.len() - 1],
            "spectrum_time": tmax,
            "directionality": directionality,
            "directionality_normalization": DIRECTIONALITY_NOTE,
        }),
    );
    meta.output(&pop_path);
    meta.output(&spec_path);
    meta.finish(&json_path)?;
    announce(&[&pop_path, &spec_path, &json_path]);
    Ok(())
}

pub fn emit_localized(
    params: &ModelParams,
    x0: i64,
    tmax: f64,
    dt: f64,
    snapshots: &[f64],
    out: &Path,
) -> Result<(), CliError> {
    let times = time_grid(tmax, dt)?;
    let requested: Vec<f64> = if snapshots.is_empty() { vec![tmax] } else { snapshots.to_vec() };
    // snap every request onto the sampled grid so observables can be assembled
    let mut snap_times = Vec::with_capacity(requested.len());
    for &t in &requested {
        let hit = times
            .iter()
            .copied()
            .find(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or_else(|| {
                WqedError::InvalidParams(format!(
                    "snapshot time {t} must lie on the sampled grid 0, {dt}, ..., {tmax}"
                ))
            })?;
        snap_times.push(hit);
    }
    snap_times.sort_by(f64::total_cmp);
    snap_times.dedup();

    let run = evolve_localized(params, x0, &times, &snap_times, DEFAULT_SIZE_BUDGET)?;
    let population = run.excited_population();
    let pop_path = path_for(out, "_population", "csv");
    write_csv(
        &pop_path,
        &["t", "P_e_total"],
        times.iter().zip(&population).map(|(t, pe)| vec![fmt(*t), fmt(*pe)]),
    )?;

    let mut meta = Sidecar::new("emit-localized", Some(params));
    meta.output(&pop_path);
    let mut written = vec![pop_path];
    let mut snapshot_meta = Vec::new();
    for (i, &t) in snap_times.iter().enumerate() {
        let obs = position_observables(&run, t)?;
        let path = path_for(out, &format!("_snapshot_{i}"), "csv");
        write_csv(
            &path,
            &["x", "N", "P_g", "P_e"],
            (0..obs.x.len()).map(|j| vec![obs.x[j].to_string(), fmt(obs.n[j]), fmt(obs.p_g[j]), fmt(obs.p_e[j])]),
        )?;
        snapshot_meta.push(json!({
            "t": t,
            "file": path.display().to_string(),
            "sum_N": obs.n.iter().sum::<f64>(),
            "sum_P_g": obs.p_g.iter().sum::<f64>(),
            "P_e_total": obs.p_e_total,
        }));
        meta.output(&path);
        written.push(path);
    }
    let json_path = path_for(out, "", "json");
    meta.set(
        "grid",
        json!({
            "momentum": momentum_grid(params.l),
            "time": time_meta(&times, dt),
            "x": "sites -L/2..L/2-1",
        }),
    );
    meta.set(
        "initial_state",
        json!({ "x0": x0, "c_K": "exp(-i K x0) / sqrt(L), qubit excited at x0, no photons" }),
    );
    meta.set("snapshots", Value::Array(snapshot_meta));
    meta.set("P_e_final", json!(population[population.len() - 1]));
    meta.finish(&json_path)?;
    written.push(json_path);
    announce(&written.iter().map(PathBuf::as_path).collect::<Vec<_>>());
    Ok(())
}

pub fn windows(params: &ModelParams, out: &Path) -> Result<(), CliError> {
    let w = classify_regime_and_windows(params);
    let grid = params.grid();
    let csv_path = path_for(out, "", "csv");
    write_csv(
        &csv_path,
        &["K", "E_K", "band_halfwidth", "embedded"],
        grid.values().into_iter().map(|k| {
            vec![
                fmt(k),
                fmt(params.effective_gap(k)),
                fmt(params.band_halfwidth(k)),
                flag(is_embedded(params, k)),
            ]
        }),
    )?;
    let result = serde_json::to_value(&w)?;
    let json_path = path_for(out, "", "json");
    let mut meta = Sidecar::new("windows", Some(params));
    meta.set("grid", json!({ "momentum": momentum_grid(params.l) }));
    meta.set("result", result.clone());
    meta.output(&csv_path);
    meta.finish(&json_path)?;
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_grid_ends_exactly_at_tmax() {
        let t = time_grid(1.0, 0.1).unwrap();
        assert_eq!(t.len(), 11);
        assert_eq!(t[10], 1.0);
        assert!(time_grid(1.0, 0.3).is_err());
        assert!(time_grid(-1.0, 0.1).is_err());
        assert!(time_grid(1.0, 0.0).is_err());
    }
}
