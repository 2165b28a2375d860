use std::fs;
use std::path::{Path, PathBuf};

use coherence_lab::channels::{classify_kraus, random_fsio};
use coherence_lab::harness::{records_to_csv, run_campaign, CampaignConfig, CampaignSummary, Category};
use coherence_lab::io::{
    classification_json, density_json, fmt_real, fsio_json, parse_kraus, parse_state,
    pure_state_json, roof_result_json, to_json_string,
};
use coherence_lab::measures::{
    convex_roof_g, g_coherence, g_coherence_pure, l1_coherence, RoofConfig,
};
use coherence_lab::qstate::{random_mixed_state, random_pure_state, StateInput};
use coherence_lab::Error;
use serde_json::{json, Value};

use crate::{Format, OutputArg, RandomKind, RoofArgs, Which};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Invalid(Error),
    /// Campaign ran but some in-hypothesis records failed.
    VerificationFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Io(_) => 2,
            Self::Invalid(Error::OptimizerFailure { .. }) => 4,
            Self::Invalid(_) => 2,
            Self::VerificationFailed(_) => 3,
        }
    }

    pub fn message(&self) -> Option<String> {
        match self {
            Self::Usage(m) | Self::Io(m) => Some(m.clone()),
            Self::Invalid(e) => Some(e.to_string()),
            Self::VerificationFailed(n) => Some(format!("{n} verification record(s) failed")),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Invalid(e)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(output: &OutputArg, text: &str) -> Result<(), CliError> {
    match &output.output {
        Some(path) => write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_state(path: &Path) -> Result<StateInput, CliError> {
    parse_state(&read(path)?).map_err(|e| with_path(path, e))
}

fn with_path(path: &Path, e: Error) -> CliError {
    match e {
        Error::Parse(m) => CliError::Invalid(Error::Parse(format!("{}: {m}", path.display()))),
        other => CliError::Invalid(other),
    }
}

pub fn measure(input: &Path, which: Which, format: Format, output: &OutputArg) -> Result<(), CliError> {
    let state = load_state(input)?;
    let rho = state.density();
    let mut values: Vec<(&str, f64)> = Vec::new();
    if matches!(which, Which::L1 | Which::All) {
        values.push(("l1", l1_coherence(&rho)));
    }
    if matches!(which, Which::G | Which::All) {
        values.push(("g", g_coherence(&rho)));
        if let StateInput::Pure(psi) = &state {
            values.push(("g_closed_form", g_coherence_pure(psi)));
        }
    }
    let text = match format {
        Format::Json => {
            let mut v = json!({ "dim": rho.dim() });
            for (k, x) in &values {
                v[*k] = json!(x);
            }
            to_json_string(&v)
        }
        Format::Csv => {
            let mut s = String::from("measure,value\n");
            for (k, x) in &values {
                s.push_str(&format!("{k},{}\n", fmt_real(*x)));
            }
            s
        }
    };
    emit(output, &text)
}

pub fn roof(input: &Path, args: &RoofArgs, seed: u64, output: &OutputArg) -> Result<(), CliError> {
    let rho = load_state(input)?.density();
    let cfg = RoofConfig {
        restarts: args.restarts,
        tol: args.tol,
        seed,
        max_evals: args.max_evals,
    };
    let result = convex_roof_g(&rho, &cfg)?;
    emit(output, &to_json_string(&roof_result_json(&result)))?;
    if output.output.is_some() {
        println!(
            "value {} converged {}",
            fmt_real(result.value),
            result.converged
        );
    }
    Ok(())
}

pub fn classify(kraus: &Path, zero_tol: f64, output: &OutputArg) -> Result<(), CliError> {
    if !(zero_tol >= 0.0) {
        return Err(CliError::Usage(format!("--zero-tol must be non-negative, got {zero_tol}")));
    }
    let set = parse_kraus(&read(kraus)?).map_err(|e| with_path(kraus, e))?;
    let c = classify_kraus(&set, zero_tol);
    emit(output, &to_json_string(&classification_json(&c)))
}

pub fn apply(input: &Path, kraus: &Path, output: &OutputArg) -> Result<(), CliError> {
    let rho = load_state(input)?.density();
    let set = parse_kraus(&read(kraus)?).map_err(|e| with_path(kraus, e))?;
    let out = set.apply(&rho)?;
    emit(output, &to_json_string(&density_json(&out)))
}

pub struct VerifyArgs {
    pub config: Option<PathBuf>,
    pub dims: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub with_roof: bool,
    pub restarts: Option<usize>,
    pub probe_fio: bool,
    pub format: Format,
    pub output: Option<PathBuf>,
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "records".into());
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn campaign_config(args: &VerifyArgs) -> Result<CampaignConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => serde_json::from_str(&read(path)?).map_err(|e| {
            CliError::Invalid(Error::Parse(format!("{}: {e}", path.display())))
        })?,
        None => CampaignConfig {
            master_seed: crate::DEFAULT_SEED,
            ..CampaignConfig::default()
        },
    };
    if let Some(dims) = &args.dims {
        cfg.dims = dims.clone();
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(tol) = args.tol {
        cfg.eq_tol = tol;
    }
    if let Some(restarts) = args.restarts {
        cfg.roof.restarts = restarts;
    }
    cfg.roof.enabled |= args.with_roof;
    cfg.probe_fio |= args.probe_fio;
    cfg.validate()?;
    Ok(cfg)
}

fn summary_json(summary: &CampaignSummary, cfg: &CampaignConfig) -> Value {
    let mut v = serde_json::to_value(summary).expect("summary serializes");
    v["master_seed"] = json!(cfg.master_seed);
    v["suite_failures"] = json!(summary.suite_failures());
    if !cfg.probe_fio {
        v.as_object_mut()
            .expect("summary is an object")
            .remove("counterexample_probe");
    }
    v
}

pub fn verify(args: VerifyArgs) -> Result<(), CliError> {
    let cfg = campaign_config(&args)?;
    let records = run_campaign(&cfg)?;
    let summary = CampaignSummary::from_records(&records);
    let summary_text = to_json_string(&summary_json(&summary, &cfg));
    let suite: Vec<_> = records.iter().filter(|r| r.category == Category::Suite).collect();
    let probes: Vec<_> = records
        .iter()
        .filter(|r| r.category == Category::CounterexampleProbe)
        .collect();

    match &args.output {
        Some(path) => {
            write(path, &records_to_csv(suite.iter().copied()))?;
            if cfg.probe_fio {
                write(&sibling(path, "probe.csv"), &records_to_csv(probes.iter().copied()))?;
            }
            write(&sibling(path, "summary.json"), &summary_text)?;
            println!(
                "{} records, {} suite failure(s)",
                summary.records,
                summary.suite_failures()
            );
        }
        None => match args.format {
            Format::Json => print!("{summary_text}"),
            Format::Csv => print!("{}", records_to_csv(suite.iter().copied())),
        },
    }
    match summary.suite_failures() {
        0 => Ok(()),
        n => Err(CliError::VerificationFailed(n)),
    }
}

pub fn random(
    kind: RandomKind,
    dim: usize,
    rank: Option<usize>,
    n_kraus: usize,
    seed: u64,
    output: &OutputArg,
) -> Result<(), CliError> {
    let value = match kind {
        RandomKind::State => pure_state_json(&random_pure_state(dim, seed)?),
        RandomKind::Mixed => density_json(&random_mixed_state(dim, rank.unwrap_or(dim), seed)?),
        RandomKind::Fsio => fsio_json(&random_fsio(dim, n_kraus, seed)?)?,
    };
    emit(output, &to_json_string(&value))
}
