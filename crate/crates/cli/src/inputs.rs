use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use qpe_core::linalg::{diagonalize, Spectrum};
use qpe_core::planner::{PlanInputs, QpePlan, TrotterConstant};
use qpe_core::state::{expectation_energy, overlaps, InitialState, StateSpec};
use qpe_core::LcuHamiltonian;

use crate::args::RunArgs;
use crate::InputError;

/// A Hamiltonian with its spectrum and the initial state.
pub struct System {
    /// Hamiltonian that is evolved (identity term removed if requested).
    pub hamiltonian: LcuHamiltonian,
    pub spectrum: Spectrum,
    pub init: InitialState,
    /// Identity coefficient removed from the file's Hamiltonian.
    pub identity_shift: f64,
}

fn read(path: &Path, what: &str) -> Result<String> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {what} {}", path.display()))
        .context(InputError)
}

pub fn load_system(args: &RunArgs) -> Result<System> {
    let path = args
        .hamiltonian
        .as_deref()
        .ok_or(InputError)
        .context("--hamiltonian is required for this command")?;
    let text = read(path, "Hamiltonian")?;
    let file_h = LcuHamiltonian::parse(&text).with_context(|| format!("in {}", path.display()))?;
    let (hamiltonian, identity_shift) = if args.drop_identity {
        file_h.without_identity().context("after removing the identity term")?
    } else {
        (file_h, 0.0)
    };
    let matrix = hamiltonian.dense_matrix()?;
    let spectrum = diagonalize(&matrix)?;

    let spec = match &args.init {
        Some(p) => StateSpec::parse(&read(p, "initial state")?).with_context(|| format!("in {}", p.display()))?,
        None => {
            let mut best = 0;
            for b in 1..matrix.nrows() {
                if matrix[(b, b)].re < matrix[(best, best)].re {
                    best = b;
                }
            }
            eprintln!("note: no --init given, using basis state {best} (lowest diagonal energy)");
            StateSpec::BasisIndex(best)
        }
    };
    let init = overlaps(&spectrum, &spec)?;
    Ok(System {
        hamiltonian,
        spectrum,
        init,
        identity_shift,
    })
}

/// Energies in the convention of the evolved Hamiltonian.
pub struct Energies {
    pub e_init: f64,
    pub e0: Option<f64>,
    pub one_norm: f64,
}

pub fn energies(args: &RunArgs, system: Option<&System>) -> Result<Energies> {
    let user = |v: f64| v - args.energy_shift - system.map_or(0.0, |s| s.identity_shift);
    let e_init = match (args.e_init, system) {
        (Some(v), _) => user(v),
        (None, Some(s)) => expectation_energy(&s.spectrum, &s.init),
        (None, None) => {
            return Err(InputError).context("either --e-init or --hamiltonian is required");
        }
    };
    let e0 = args.e0.map(user).or_else(|| system.map(|s| s.spectrum.energies[0]));
    let one_norm = match (args.one_norm, system) {
        (Some(v), _) => v,
        (None, Some(s)) => s.hamiltonian.one_norm(),
        (None, None) => f64::NAN,
    };
    Ok(Energies { e_init, e0, one_norm })
}

pub fn trotter_constants(args: &RunArgs, system: Option<&System>) -> Vec<TrotterConstant> {
    let order = args.trotter_order;
    let mut out = Vec::new();
    if let Some(value) = args.c_p {
        out.push(TrotterConstant::Commutator { order, value });
    }
    if let Some(value) = args.script_c_p {
        out.push(TrotterConstant::Scaled { order, value });
    }
    if out.is_empty() && order == 1 {
        if let Some(s) = system {
            let value = s.hamiltonian.commutator_constant_c1();
            if value > 0.0 {
                out.push(TrotterConstant::Commutator { order, value });
            }
        }
    }
    out
}

pub fn plans(args: &RunArgs, system: Option<&System>) -> Result<Vec<QpePlan>> {
    let e = energies(args, system)?;
    let trotter = trotter_constants(args, system);
    args.strategies()?
        .into_iter()
        .map(|strategy| {
            let mut plan = QpePlan::build(PlanInputs {
                strategy,
                e_init: e.e_init,
                e0: e.e0,
                one_norm: e.one_norm,
                energy_shift: args.energy_shift + system.map_or(0.0, |s| s.identity_shift),
                epsilon_chem: args.epsilon_chem,
                a_sweep: args.a.clone(),
                trotter: trotter.clone(),
            })
            .with_context(|| format!("planning strategy {}", strategy.label()))?;
            if trotter.is_empty() {
                plan.notes.push(match system {
                    Some(s) if s.hamiltonian.commutator_constant_c1() == 0.0 && args.trotter_order == 1 => {
                        "all terms commute: product formulas are exact and no Trotter budget is needed".into()
                    }
                    _ => "no Trotter constant given (--c-p or --script-c-p); budgets omitted".into(),
                });
            }
            Ok(plan)
        })
        .collect()
}
