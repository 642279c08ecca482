use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::{Context, Result};
use qpe_core::export;
use qpe_core::planner::{accuracy_window, asymmetric_window, reconstruct_energy, shot_budget, QpePlan};
use qpe_core::shots::{hoeffding_trial, sample_shots, select_extra_qubits, ExtraQubitCandidate, TrialReport, GENERATOR};
use qpe_core::spectral::{
    initial_state_diagnostics, lambda_ratios, phase_distribution, post_measurement, window_probability,
    InitialStateReport, LambdaRatios, PeakInfo, PhaseDistribution, PhaseTable, WindowSummary,
};
use qpe_core::sweep::{energy_sweep, trotter_sweep, SweepConfig, SweepRow, SweepTarget};
use serde::Serialize;

use crate::args::RunArgs;
use crate::inputs::{load_system, plans, System};
use crate::InputError;

fn create(out: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = out.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    let path = out.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn prepare_out(args: &RunArgs) -> Result<()> {
    fs::create_dir_all(&args.out).with_context(|| format!("creating output directory {}", args.out.display()))
}

fn single_plan(args: &RunArgs, system: &System) -> Result<QpePlan> {
    let mut all = plans(args, Some(system))?;
    if all.len() != 1 {
        return Err(InputError).context("this command takes exactly one --strategy");
    }
    Ok(all.remove(0))
}

fn base_register(args: &RunArgs, plan: &QpePlan) -> u32 {
    args.n.unwrap_or(plan.n_min)
}

#[derive(Serialize)]
struct PlanFile<'a> {
    plans: &'a [QpePlan],
}

pub fn plan(args: &RunArgs) -> Result<()> {
    let system = args.hamiltonian.as_ref().map(|_| load_system(args)).transpose()?;
    let plans = plans(args, system.as_ref())?;
    prepare_out(args)?;
    write_json(&args.out, "plan.json", &PlanFile { plans: &plans })?;
    let mut summary = String::new();
    for p in &plans {
        summary.push_str(&p.summary_row());
        summary.push('\n');
        for b in &p.trotter_budgets {
            summary.push_str(&format!(
                "    a = {} order {}: n_min(0,t) = {}, sum over q = {}, ceil(2^a C) = {} (C = {})\n",
                b.a, b.order, b.n_min_per_q[0], b.n_min_tot, b.n_min_tot_approx, b.script_c_p
            ));
        }
    }
    fs::write(args.out.join("plan_summary.txt"), &summary)?;
    eprint!("{summary}");
    for p in &plans {
        for n in &p.notes {
            eprintln!("note [{}]: {n}", p.inputs.strategy.label());
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct WindowReport {
    a: u32,
    n_phase: u32,
    symmetric: WindowSummary,
    /// (e1, e2) from the ground state's offset; absent for a = 0.
    asymmetric: Option<(u64, u64, f64)>,
}

#[derive(Serialize)]
struct DistributionReport<'a> {
    strategy: &'a str,
    t: f64,
    ceil_e0_t: i64,
    n_min: u32,
    n_phase: u32,
    l_star: u64,
    delta_gap: f64,
    energy_estimate: f64,
    exact_ground_energy: f64,
    per_state: &'a [PeakInfo],
    lambda: LambdaRatios,
    initial_state: InitialStateReport,
    windows: Vec<WindowReport>,
}

pub fn distribution(args: &RunArgs) -> Result<()> {
    let system = load_system(args)?;
    let plan = single_plan(args, &system)?;
    let n = base_register(args, &plan);
    let table = PhaseTable::new(&system.spectrum.energies, &system.init, plan.t, n)?;
    let dist = phase_distribution(&table)?;
    let report = initial_state_diagnostics(&table)?;
    let lambda = lambda_ratios(&table, report.l0)?;

    let mut windows = Vec::new();
    for &a in &args.a {
        let t_a = table.with_register(n + a)?;
        let d_a = phase_distribution(&t_a)?;
        let ground = &d_a.per_state[0];
        let symmetric = window_probability(&d_a, ground.nearest_bin, accuracy_window(a));
        let asymmetric = if a == 0 {
            None
        } else {
            let (e1, e2) = asymmetric_window(a, ground.kappa, ground.sign)?;
            Some((e1, e2, d_a.window_sum(ground.nearest_bin, e1, e2)))
        };
        windows.push(WindowReport {
            a,
            n_phase: n + a,
            symmetric,
            asymmetric,
        });
    }

    let shift = system.identity_shift;
    let post = post_measurement(&table, dist.l_star)?;
    let after: Vec<f64> = post.coefficients.iter().map(|c| c.norm_sqr()).collect();
    let energies: Vec<f64> = system.spectrum.energies.iter().map(|e| e + shift).collect();

    prepare_out(args)?;
    export::write_distribution(create(&args.out, "distribution.csv")?, &dist)?;
    export::write_projection(create(&args.out, "projection.csv")?, &energies, &table.weights(), &after)?;
    write_json(
        &args.out,
        "diagnostics.json",
        &DistributionReport {
            strategy: plan.inputs.strategy.label(),
            t: plan.t,
            ceil_e0_t: plan.ceil_e0_t,
            n_min: plan.n_min,
            n_phase: n,
            l_star: dist.l_star,
            delta_gap: dist.delta_gap,
            energy_estimate: reconstruct_energy(dist.l_star, n, plan.t, plan.ceil_e0_t) + shift,
            exact_ground_energy: energies[0],
            per_state: &dist.per_state,
            lambda,
            initial_state: report,
            windows,
        },
    )?;
    for w in &plan.notes {
        eprintln!("note: {w}");
    }
    if !dist.per_state.is_empty() && dist.l_star != dist.per_state[0].nearest_bin {
        eprintln!(
            "warning: most probable outcome {} is not the ground-state bin {}",
            dist.l_star, dist.per_state[0].nearest_bin
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct CrossingSummary {
    strategy: String,
    multiplier: Option<u64>,
    n_min: u32,
    /// Smallest N whose reconstructed energy is chemically accurate.
    first_accurate_n: Option<u32>,
    /// Mean ground-state fidelity over N >= N_min.
    mean_fidelity_from_n_min: Option<f64>,
}

fn crossings(rows: &[SweepRow]) -> Vec<CrossingSummary> {
    let mut keys: Vec<(String, Option<u64>, u32)> = Vec::new();
    for r in rows {
        let key = (r.strategy.clone(), r.multiplier, r.n_min);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(strategy, multiplier, n_min)| {
            let group: Vec<&SweepRow> = rows
                .iter()
                .filter(|r| r.strategy == strategy && r.multiplier == multiplier)
                .collect();
            let tail: Vec<f64> = group.iter().filter(|r| r.n_phase >= n_min).map(|r| r.ground_fidelity).collect();
            CrossingSummary {
                first_accurate_n: group.iter().find(|r| r.chemically_accurate).map(|r| r.n_phase),
                mean_fidelity_from_n_min: (!tail.is_empty()).then(|| tail.iter().sum::<f64>() / tail.len() as f64),
                strategy,
                multiplier,
                n_min,
            }
        })
        .collect()
}

pub fn sweep(args: &RunArgs) -> Result<()> {
    let system = load_system(args)?;
    let plans = plans(args, Some(&system))?;
    let extra = args.a.iter().copied().max().unwrap_or(0);
    let targets: Vec<SweepTarget> = plans
        .iter()
        .map(|p| SweepTarget {
            label: p.inputs.strategy.label().to_string(),
            t: p.t,
            ceil_e0_t: p.ceil_e0_t,
            n_min: p.n_min,
            max_n: args.n.unwrap_or(p.n_min + extra),
        })
        .collect();
    let config = SweepConfig {
        order: args.trotter_order,
        multipliers: args.trotter_mult.clone(),
        include_exact: true,
        epsilon_chem: args.epsilon_chem,
        energy_shift: system.identity_shift,
    };
    let rows = energy_sweep(&system.hamiltonian, &system.spectrum, &system.init, &targets, &config)?;

    let steps: Vec<u64> = (0..=8).map(|k| 1u64 << k).collect();
    let c2 = if args.trotter_order == 2 { args.c_p } else { None };
    let trotter_rows = trotter_sweep(
        &system.hamiltonian,
        &system.spectrum,
        targets[0].t,
        &[args.trotter_order],
        &steps,
        &[0, 1, 2],
        c2,
    )?;

    prepare_out(args)?;
    export::write_sweep(create(&args.out, "sweep.csv")?, &rows)?;
    export::write_trotter(create(&args.out, "trotter.csv")?, &trotter_rows)?;
    let summary = crossings(&rows);
    write_json(&args.out, "sweep_summary.json", &summary)?;
    for s in &summary {
        let m = s.multiplier.map_or("exact".to_string(), |m| format!("{m} x 2^q"));
        match s.first_accurate_n {
            Some(n) => eprintln!("{} ({m}): chemical accuracy from N = {n} (N_min = {})", s.strategy, s.n_min),
            None => eprintln!("{} ({m}): chemical accuracy not reached (N_min = {})", s.strategy, s.n_min),
        }
    }
    if rows.iter().any(|r| r.beyond_first_order) {
        eprintln!("note: some rows exceed 2 pi t 2^q |H - H_S| > 1/2 (flagged in sweep.csv)");
    }
    Ok(())
}

#[derive(Serialize)]
struct ShotsEntry {
    a: u32,
    n_phase: u32,
    l_star: u64,
    delta_gap: f64,
    status: &'static str,
    m_eps: Option<u64>,
    trial: Option<TrialReport>,
}

#[derive(Serialize)]
struct ShotsReport {
    strategy: String,
    t: f64,
    epsilon: f64,
    trials: u64,
    seed: u64,
    generator: &'static str,
    entries: Vec<ShotsEntry>,
    histogram_a: u32,
    histogram_shots: u64,
    selection: Option<Selection>,
}

#[derive(Serialize)]
struct Selection {
    shots_per_candidate: u64,
    chosen_a: u32,
    ranking: Vec<ExtraQubitCandidate>,
}

pub fn shots(args: &RunArgs) -> Result<()> {
    let system = load_system(args)?;
    let plan = single_plan(args, &system)?;
    let n = base_register(args, &plan);
    let base = PhaseTable::new(&system.spectrum.energies, &system.init, plan.t, n)?;

    let mut dists: Vec<(u32, PhaseDistribution)> = Vec::new();
    let mut entries = Vec::new();
    for &a in &args.a {
        let dist = phase_distribution(&base.with_register(n + a)?)?;
        let entry = if dist.delta_gap > 0.0 {
            let trial = hoeffding_trial(&dist, args.shots_epsilon, args.trials, args.seed)?;
            ShotsEntry {
                a,
                n_phase: n + a,
                l_star: dist.l_star,
                delta_gap: dist.delta_gap,
                status: "ok",
                m_eps: Some(trial.m_eps),
                trial: Some(trial),
            }
        } else {
            eprintln!("a = {a}: probability gap is zero, l* is not identifiable");
            ShotsEntry {
                a,
                n_phase: n + a,
                l_star: dist.l_star,
                delta_gap: dist.delta_gap,
                status: "not identifiable",
                m_eps: None,
                trial: None,
            }
        };
        entries.push(entry);
        dists.push((a, dist));
    }

    let (hist_a, hist_dist) = &dists[0];
    let hist_shots = match shot_budget(args.shots_epsilon, hist_dist.delta_gap) {
        Ok(m) => m,
        Err(_) => args.select_shots.max(1),
    };
    let record = sample_shots(hist_dist, hist_shots, args.seed)?;

    let selection = if args.select_a {
        let candidates: Vec<(u32, &PhaseDistribution)> = dists.iter().map(|(a, d)| (*a, d)).collect();
        let ranking = select_extra_qubits(&candidates, args.select_shots, args.seed)?;
        eprintln!("selected a = {} from {} shots per candidate", ranking[0].a, args.select_shots);
        Some(Selection {
            shots_per_candidate: args.select_shots,
            chosen_a: ranking[0].a,
            ranking,
        })
    } else {
        None
    };

    prepare_out(args)?;
    export::write_histogram(create(&args.out, "histogram.csv")?, &record)?;
    write_json(
        &args.out,
        "shots.json",
        &ShotsReport {
            strategy: plan.inputs.strategy.label().to_string(),
            t: plan.t,
            epsilon: args.shots_epsilon,
            trials: args.trials,
            seed: args.seed,
            generator: GENERATOR,
            entries,
            histogram_a: *hist_a,
            histogram_shots: hist_shots,
            selection,
        },
    )?;
    Ok(())
}
