use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand};
use qpe_core::planner::{TimeStepStrategy, CHEMICAL_ACCURACY};

use crate::InputError;

#[derive(Parser, Debug)]
#[command(name = "qpe", version)]
#[command(about = "Plan and analyse quantum phase estimation runs for Pauli-sum Hamiltonians")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Choose t, N_min, accuracy windows and Trotter budgets (plan.json)
    Plan(RunArgs),
    /// Outcome distribution, peak and initial-state diagnostics
    Distribution(RunArgs),
    /// Energy error and ground-state fidelity versus N and Trotter steps
    Sweep(RunArgs),
    /// Shot budgets and seeded Hoeffding trials
    Shots(RunArgs),
}

impl Command {
    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Plan(a) | Command::Distribution(a) | Command::Sweep(a) | Command::Shots(a) => a,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Flat key=value file supplying defaults for any flag not given here
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Hamiltonian file, one `<coefficient> <pauli-string>` per line
    #[arg(long)]
    pub hamiltonian: Option<PathBuf>,

    /// Initial-state file (basis/amp/eig records); defaults to the basis
    /// state with the lowest diagonal energy
    #[arg(long)]
    pub init: Option<PathBuf>,

    /// Time-step strategies, comma separated: known-gap[:d],
    /// init-energy[:alpha], lcu-norm[:alpha]
    #[arg(long, default_value = "lcu-norm", action = ArgAction::Set)]
    pub strategy: String,

    /// Alpha for strategies listed without an explicit value
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Order of magnitude d for known-gap listed without an explicit value
    #[arg(long, allow_negative_numbers = true)]
    pub d: Option<i32>,

    #[arg(long, default_value_t = CHEMICAL_ACCURACY)]
    pub epsilon_chem: f64,

    /// Extra phase qubits to evaluate
    #[arg(long, value_delimiter = ',', default_values_t = [0u32, 1, 2, 3], action = ArgAction::Set)]
    pub a: Vec<u32>,

    /// Phase-register size; overrides N_min from the plan
    #[arg(long = "N")]
    pub n: Option<u32>,

    #[arg(long, default_value_t = 1)]
    pub trotter_order: u32,

    /// Trotter steps per controlled power U^(2^q), as multipliers of 2^q
    #[arg(long, value_delimiter = ',', default_values_t = [1u64, 10, 100], action = ArgAction::Set)]
    pub trotter_mult: Vec<u64>,

    /// Target failure probability for the shot budget
    #[arg(long, default_value_t = 0.1)]
    pub shots_epsilon: f64,

    #[arg(long, default_value_t = 1000)]
    pub trials: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Remove the identity term and report energies with it added back
    #[arg(long)]
    pub drop_identity: bool,

    #[arg(long, default_value = "qpe-out")]
    pub out: PathBuf,

    /// Initial-state energy; computed from the Hamiltonian when omitted
    #[arg(long, allow_negative_numbers = true)]
    pub e_init: Option<f64>,

    /// Exact ground energy, used to check ceil(E0 t)
    #[arg(long, allow_negative_numbers = true)]
    pub e0: Option<f64>,

    /// Sum of |coefficients|; computed from the Hamiltonian when omitted
    #[arg(long)]
    pub one_norm: Option<f64>,

    /// Commutator constant |C_p| for the chosen Trotter order
    #[arg(long)]
    pub c_p: Option<f64>,

    /// Scaled Trotter constant pi (|C_p| / eps^(p+1))^(1/p), given directly
    #[arg(long)]
    pub script_c_p: Option<f64>,

    /// Constant subtracted from --e-init and --e0 (e.g. nuclear repulsion)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub energy_shift: f64,

    /// Rank the extra-qubit counts with a few shots each (shots only)
    #[arg(long)]
    pub select_a: bool,

    /// Shots per candidate for --select-a
    #[arg(long, default_value_t = 50)]
    pub select_shots: u64,
}

const PATH_KEYS: [&str; 3] = ["hamiltonian", "init", "out"];

/// Command-line arguments with the entries of any `--config` file inserted
/// ahead of the user's flags, so explicit flags win.
pub fn merged_args(raw: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(config) = find_config(&raw) else {
        return Ok(raw);
    };
    let text = fs::read_to_string(&config)
        .with_context(|| format!("reading config {}", config.display()))
        .context(InputError)?;
    let base = config.parent().unwrap_or(Path::new("."));
    let extra = config_flags(&text, base).with_context(|| format!("in config {}", config.display()))?;
    // raw = [bin, subcommand, flags...]
    let split = raw.len().min(2);
    let mut merged: Vec<OsString> = raw[..split].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&raw[split..]);
    Ok(merged)
}

fn find_config(raw: &[OsString]) -> Option<PathBuf> {
    let mut it = raw.iter();
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

fn config_flags(text: &str, base: &Path) -> Result<Vec<OsString>> {
    let mut flags = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(InputError).context(format!("line {}: expected key=value", idx + 1));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "config" {
            return Err(InputError).context(format!("line {}: config files cannot nest", idx + 1));
        }
        let flag = if key == "n" { "--N".to_string() } else { format!("--{key}") };
        match value {
            "true" if key == "drop-identity" || key == "select-a" => flags.push(flag.into()),
            "false" if key == "drop-identity" || key == "select-a" => {}
            _ => {
                let value = if PATH_KEYS.contains(&key.as_str()) {
                    base.join(value).into_os_string()
                } else {
                    value.into()
                };
                let mut joined: OsString = format!("{flag}=").into();
                joined.push(value);
                flags.push(joined);
            }
        }
    }
    Ok(flags)
}

impl RunArgs {
    pub fn strategies(&self) -> Result<Vec<TimeStepStrategy>> {
        self.strategy
            .split(',')
            .map(|item| {
                let item = item.trim();
                let (name, value) = match item.split_once(':') {
                    Some((n, v)) => (n, Some(v)),
                    None => (item, None),
                };
                let number = |v: &str| -> Result<f64> {
                    v.parse().with_context(|| format!("invalid strategy value \"{v}\"")).context(InputError)
                };
                Ok(match name {
                    "known-gap" => TimeStepStrategy::KnownGapOrder {
                        d: match value {
                            Some(v) => v
                                .parse()
                                .with_context(|| format!("invalid known-gap order \"{v}\""))
                                .context(InputError)?,
                            None => self.d.unwrap_or(1),
                        },
                    },
                    "init-energy" => TimeStepStrategy::InitEnergy {
                        alpha: value.map(number).transpose()?.or(self.alpha).unwrap_or(1.5),
                    },
                    "lcu-norm" => TimeStepStrategy::LcuOneNorm {
                        alpha: value.map(number).transpose()?.or(self.alpha).unwrap_or(0.5),
                    },
                    other => bail!(anyhow::Error::new(InputError)
                        .context(format!("unknown strategy \"{other}\"; expected known-gap, init-energy or lcu-norm"))),
                })
            })
            .collect()
    }
}
