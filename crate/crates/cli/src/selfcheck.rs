//! Quick consistency checks that need no reference data.

use std::f64::consts::PI;
use std::path::Path;

use serde_json::json;
use wqed::dynamics::{evolve_fixed_k, evolve_localized, fit_decay_rate, markov_rate, position_observables};
use wqed::model::{wrap_angle, DEFAULT_SIZE_BUDGET};
use wqed::oracle::dense_block_eigenvalues;
use wqed::{solve_bound_state, sweep_scattering, Branch, ModelParams, Momentum, Result, WqedError};

use crate::output::{path_for, write_csv, Sidecar};
use crate::CliError;

struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
}

fn params(jp: f64, delta: f64, omega: f64, l: usize) -> Result<ModelParams> {
    ModelParams::new(1.0, jp, delta, omega, l)
}

fn unitarity() -> Result<Check> {
    let rows = sweep_scattering(&params(0.1, 0.0, 0.5, 400)?, 101, 101);
    let worst = rows
        .iter()
        .filter(|r| !r.degenerate)
        .map(|r| (1.0 - r.transmission - r.reflection).abs())
        .fold(0.0, f64::max);
    Ok(Check { name: "unitarity |1-(T+R)|", value: worst, limit: 1e-10 })
}

fn static_recoil() -> Result<Check> {
    let rows = sweep_scattering(&params(0.0, 0.0, 0.5, 400)?, 41, 41);
    let worst = rows
        .iter()
        .map(|r| wrap_angle(r.p_f2 + r.p_i).abs())
        .fold(0.0, f64::max);
    Ok(Check { name: "static qubit p_f2 = -p_i", value: worst, limit: 1e-12 })
}

fn static_bound_energy() -> Result<Check> {
    let exact = (2.0 + 5f64.sqrt()).sqrt();
    let p = params(0.0, 0.0, 1.0, 400)?;
    let e = solve_bound_state(&p, Momentum::new(0.0), Branch::Upper)?.energy;
    Ok(Check { name: "static bound energy vs sqrt(2+sqrt5)", value: (e - exact).abs(), limit: 1e-10 })
}

fn dense_bound_energy() -> Result<Check> {
    let p = params(0.5, 0.0, 1.0, 400)?;
    let k = Momentum::new(PI / 3.0);
    let ev = dense_block_eigenvalues(&p, k, DEFAULT_SIZE_BUDGET)?;
    let lo = solve_bound_state(&p, k, Branch::Lower)?.energy;
    let up = solve_bound_state(&p, k, Branch::Upper)?.energy;
    let err = (ev[0] - lo).abs().max((ev[ev.len() - 1] - up).abs());
    Ok(Check { name: "bound energies vs dense block", value: err, limit: 1e-6 })
}

fn markov_decay() -> Result<Check> {
    let p = params(0.5, 0.0, 0.2, 400)?;
    let k = Momentum::new(0.0);
    let times: Vec<f64> = (0..=100).map(f64::from).collect();
    let traj = evolve_fixed_k(&p, k, &times, DEFAULT_SIZE_BUDGET)?;
    let rate = fit_decay_rate(&times, &traj.excited_population(), 10.0, 100.0)?;
    let gamma = markov_rate(&p, k)?;
    Ok(Check { name: "fitted decay vs golden rule (relative)", value: (rate / gamma - 1.0).abs(), limit: 0.05 })
}

fn sum_rules() -> Result<Check> {
    let p = params(0.5, 0.0, 0.2, 100)?;
    let run = evolve_localized(&p, 0, &[0.0, 10.0], &[10.0], DEFAULT_SIZE_BUDGET)?;
    let obs = position_observables(&run, 10.0)?;
    let sn: f64 = obs.n.iter().sum();
    let sg: f64 = obs.p_g.iter().sum();
    let err = (sn - sg).abs().max((obs.p_e_total + sg - 1.0).abs());
    Ok(Check { name: "position-space sum rules", value: err, limit: 1e-9 })
}

pub fn run(out: &Path) -> std::result::Result<(), CliError> {
    let checks: [fn() -> Result<Check>; 6] = [
        unitarity,
        static_recoil,
        static_bound_energy,
        dense_bound_energy,
        markov_decay,
        sum_rules,
    ];
    let mut results = Vec::new();
    for check in checks {
        let c = check()?;
        let pass = c.value <= c.limit;
        println!(
            "[{}] {}: {:.3e} (limit {:.0e})",
            if pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.limit
        );
        results.push((c, pass));
    }
    let csv_path = path_for(out, "", "csv");
    write_csv(
        &csv_path,
        &["check", "value", "limit", "pass"],
        results.iter().map(|(c, pass)| {
            vec![c.name.to_string(), format!("{:.14e}", c.value), format!("{:.0e}", c.limit), (*pass as u8).to_string()]
        }),
    )?;
    let mut meta = Sidecar::new("selfcheck", None);
    meta.set(
        "checks",
        json!(results
            .iter()
            .map(|(c, pass)| json!({ "name": c.name, "value": c.value, "limit": c.limit, "pass": pass }))
            .collect::<Vec<_>>()),
    );
    meta.output(&csv_path);
    meta.finish(&path_for(out, "", "json"))?;

    let failed: Vec<&str> = results.iter().filter(|(_, p)| !p).map(|(c, _)| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(WqedError::NumericalFailure(format!("selfcheck failed: {}", failed.join(", "))).into())
    }
}
