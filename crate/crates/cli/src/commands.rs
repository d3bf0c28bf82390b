use std::fs;
use std::path::{Path, PathBuf};

use hamlearn_core::dataset::{
    fmt_sig, generate_ham_learning_data, generate_state_learning_data, random_states, select_correlators, DatasetMode,
    TimeSeriesDataset, Truth,
};
use hamlearn_core::hamiltonian::uniform_params;
use hamlearn_core::hamlearn::{exact_predictions, train_with_restarts, validation_errors, LearnConfig, TrainingDiagnostics};
use hamlearn_core::optim::TrainingTrace;
use hamlearn_core::sim::StateVector;
use hamlearn_core::statelearn::{
    random_hamiltonians, select_ic_observables, train_state_with_restarts, LearnedState,
};
use hamlearn_core::su3::{generate_su3_data, learn_su3, su3_cost_gradient};
use hamlearn_core::ParamHamiltonian;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{DataKind, ExperimentConfig};
use crate::error::{CliError, CliResult};

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn write(&self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
    }

    fn write_config(&self, cfg: &ExperimentConfig) -> CliResult<()> {
        self.write("config.json", &pretty(cfg))
    }

    fn write_trace(&self, stem: &str, cfg: &ExperimentConfig, trace: &TrainingTrace<f64>) -> CliResult<()> {
        self.write(&format!("{stem}.csv"), &trace.to_csv())?;
        self.write(
            &format!("{stem}.json"),
            &pretty(&json!({ "seed": cfg.seed, "config": cfg, "trace": trace })),
        )
    }
}

fn pretty<S: serde::Serialize>(v: &S) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn load_dataset(path: &Path) -> CliResult<TimeSeriesDataset<f64>> {
    TimeSeriesDataset::from_json(&read(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn load_hamiltonian(path: &Path) -> CliResult<ParamHamiltonian<f64>> {
    ParamHamiltonian::from_json(&read(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn state_seed(seed: u64) -> u64 {
    seed.wrapping_mul(31).wrapping_add(1000)
}

fn heldout_seed(seed: u64) -> u64 {
    seed.wrapping_mul(31).wrapping_add(5000)
}

fn ham_data(
    cfg: &ExperimentConfig,
    learn: &LearnConfig,
    truth: &ParamHamiltonian<f64>,
) -> CliResult<TimeSeriesDataset<f64>> {
    let n = truth.num_sites();
    let states = random_states(n, learn.num_states, state_seed(cfg.seed))?;
    let obs = select_correlators(n, &learn.correlator_axes, learn.num_observables, cfg.seed)?;
    Ok(generate_ham_learning_data(
        truth,
        &states,
        &obs,
        learn.num_steps,
        learn.dt,
        cfg.noise_sigma,
        cfg.seed,
    )?)
}

fn heldout_data(cfg: &ExperimentConfig, truth: &ParamHamiltonian<f64>) -> CliResult<TimeSeriesDataset<f64>> {
    let n = truth.num_sites();
    let states = random_states(n, cfg.heldout.num_states, heldout_seed(cfg.seed))?;
    Ok(generate_ham_learning_data(
        truth,
        &states,
        &cfg.heldout_observables(n)?,
        cfg.heldout.num_steps,
        cfg.learn.dt,
        0.0,
        cfg.seed,
    )?)
}

fn state_data(cfg: &ExperimentConfig) -> CliResult<TimeSeriesDataset<f64>> {
    let s = &cfg.state.learn;
    let n = cfg.state.num_qubits;
    let target = cfg.state.learn.ansatz(n)?.realizable_target(cfg.seed)?;
    let hams = random_hamiltonians(n, s.num_hamiltonians, cfg.seed.wrapping_mul(7).wrapping_add(1))?;
    let obs = select_ic_observables(n, s.num_observables, cfg.seed);
    Ok(generate_state_learning_data(&target, &hams, &obs, s.num_steps, s.dt, cfg.noise_sigma, cfg.seed)?)
}

fn su3_truth(cfg: &ExperimentConfig) -> Vec<f64> {
    cfg.su3.coefficients.clone().unwrap_or_else(|| uniform_params(8, cfg.seed))
}

fn su3_data(cfg: &ExperimentConfig) -> CliResult<TimeSeriesDataset<f64>> {
    let q = &cfg.su3;
    let states = (0..q.num_states as u64)
        .map(|s| StateVector::random_qudit(1, 3, state_seed(cfg.seed) + s, false))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(generate_su3_data(&su3_truth(cfg), &states, &q.observables, q.num_steps, q.dt, cfg.noise_sigma, cfg.seed)?)
}

pub fn gen_data(cfg: &ExperimentConfig, out: &Output) -> CliResult<String> {
    let d = match cfg.data_kind {
        DataKind::Hamiltonian => {
            let truth = cfg.truth()?;
            out.write("hamiltonian.json", &truth.to_json())?;
            ham_data(cfg, &cfg.learn, &truth)?
        }
        DataKind::State => state_data(cfg)?,
        DataKind::Su3 => su3_data(cfg)?,
    };
    out.write("dataset.json", &d.to_json())?;
    out.write("dataset.csv", &d.to_csv())?;
    out.write_config(cfg)?;
    Ok(format!("wrote {} records", d.records.len()))
}

fn training_dataset(
    cfg: &ExperimentConfig,
    out: &Output,
    generate: impl FnOnce() -> CliResult<TimeSeriesDataset<f64>>,
) -> CliResult<TimeSeriesDataset<f64>> {
    match &cfg.dataset {
        Some(p) => load_dataset(p),
        None => {
            let d = generate()?;
            out.write("dataset.json", &d.to_json())?;
            Ok(d)
        }
    }
}

pub fn learn_ham(cfg: &ExperimentConfig, out: &Output) -> CliResult<String> {
    let d = training_dataset(cfg, out, || ham_data(cfg, &cfg.learn, &cfg.truth()?))?;
    let truth = match (&d.generator_info.truth, d.mode) {
        (Truth::Hamiltonian { hamiltonian }, DatasetMode::HamiltonianLearning) => {
            ParamHamiltonian::from_record(hamiltonian)?
        }
        _ => return Err(CliError::Config("learn-ham needs a Hamiltonian-learning dataset".into())),
    };
    let heldout = heldout_data(cfg, &truth)?;
    let diag = TrainingDiagnostics {
        truth: Some(&truth),
        heldout: Some(&heldout),
        trace_time: None,
    };
    let trace = train_with_restarts(&cfg.learn, &d, &truth, cfg.restarts, diag)?;
    let learned = truth.with_params(&trace.final_params)?;
    out.write("learned.json", &learned.to_json())?;
    out.write("heldout.json", &heldout.to_json())?;
    out.write_trace("trace", cfg, &trace)?;
    out.write("validation.csv", &validation_csv(&learned, &heldout)?)?;
    out.write_config(cfg)?;
    Ok(format!(
        "final cost {:e}, trace distance {:e}, validation error {:e}",
        trace.final_cost,
        trace.final_trace_distance().unwrap_or(f64::NAN),
        trace.final_validation_error().unwrap_or(f64::NAN)
    ))
}

pub fn learn_state(cfg: &ExperimentConfig, out: &Output) -> CliResult<String> {
    let d = training_dataset(cfg, out, || state_data(cfg))?;
    if d.mode != DatasetMode::StateLearning {
        return Err(CliError::Config("learn-state needs a state-learning dataset".into()));
    }
    let ansatz = cfg.state.learn.ansatz(d.num_sites)?;
    let trace = train_state_with_restarts(&cfg.state.learn, &d, ansatz)?;
    let learned = LearnedState::new(ansatz, trace.final_params.clone())?;
    out.write("learned_state.json", &learned.to_json())?;
    out.write_trace("trace", cfg, &trace)?;
    out.write_config(cfg)?;
    Ok(format!(
        "final cost {:e}, state trace distance {:e}",
        trace.final_cost,
        trace.final_trace_distance().unwrap_or(f64::NAN)
    ))
}

pub fn learn_su3_cmd(cfg: &ExperimentConfig, out: &Output) -> CliResult<String> {
    let d = training_dataset(cfg, out, || su3_data(cfg))?;
    let truth = match &d.generator_info.truth {
        Truth::Qutrit { coeffs } => coeffs.clone(),
        _ => return Err(CliError::Config("learn-su3 needs a qutrit dataset".into())),
    };
    let init = uniform_params(8, cfg.seed.wrapping_add(7));
    let (_, _, ledger) = su3_cost_gradient(&init, &d, &cfg.su3.series)?;
    let trace = learn_su3(&cfg.su3.optimizer, &cfg.su3.series, &d, init, Some(&truth))?;
    out.write(
        "learned.json",
        &pretty(&json!({ "coefficients": trace.final_params, "truth": truth })),
    )?;
    out.write("ledger.json", &pretty(&ledger))?;
    out.write_trace("trace", cfg, &trace)?;
    out.write_config(cfg)?;
    Ok(format!(
        "final cost {:e}, max coefficient error {:e}, ledger size {}",
        trace.final_cost,
        trace.final_trace_distance().unwrap_or(f64::NAN),
        ledger.size()
    ))
}

pub fn sweep(cfg: &ExperimentConfig, out: &Output) -> CliResult<String> {
    let truth = cfg.truth()?;
    let heldout = heldout_data(cfg, &truth)?;
    let s = &cfg.sweep;
    let cells: Vec<(usize, usize, usize)> = s
        .num_steps
        .iter()
        .flat_map(|&nt| {
            s.num_states
                .iter()
                .flat_map(move |&ns| s.num_observables.iter().map(move |&no| (nt, ns, no)))
        })
        .collect();
    let results: Vec<TrainingTrace<f64>> = cells
        .par_iter()
        .map(|&(nt, ns, no)| {
            let learn = LearnConfig {
                num_steps: nt,
                num_states: ns,
                num_observables: no,
                ..cfg.learn.clone()
            };
            let d = ham_data(cfg, &learn, &truth)?;
            let diag = TrainingDiagnostics {
                truth: Some(&truth),
                heldout: Some(&heldout),
                trace_time: None,
            };
            Ok(train_with_restarts(&learn, &d, &truth, cfg.restarts, diag)?)
        })
        .collect::<CliResult<_>>()?;
    let mut summary = String::from("num_steps,num_states,num_observables,final_cost,final_trace_distance,final_validation_error\n");
    let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
    for (&(nt, ns, no), t) in cells.iter().zip(&results) {
        out.write(&format!("trace_nt{nt}_ns{ns}_no{no}.csv"), &t.to_csv())?;
        summary.push_str(&format!(
            "{nt},{ns},{no},{},{},{}\n",
            fmt_sig(t.final_cost),
            opt(t.final_trace_distance()),
            opt(t.final_validation_error())
        ));
    }
    out.write("summary.csv", &summary)?;
    out.write("truth.json", &truth.to_json())?;
    out.write_config(cfg)?;
    Ok(format!("{} cells", cells.len()))
}

fn validation_csv(model: &ParamHamiltonian<f64>, heldout: &TimeSeriesDataset<f64>) -> CliResult<String> {
    let mut csv = String::from("observable,error\n");
    for e in validation_errors(model, heldout)? {
        csv.push_str(&format!("{},{}\n", e.observable, fmt_sig(e.error)));
    }
    Ok(csv)
}

pub fn validate(
    cfg: &ExperimentConfig,
    out: &Output,
    model: Option<&Path>,
    data: Option<&Path>,
    truth: Option<&Path>,
) -> CliResult<String> {
    let model = load_hamiltonian(model.ok_or_else(|| CliError::Config("validate needs --model".into()))?)?;
    let heldout = match (data, truth) {
        (Some(d), None) => load_dataset(d)?,
        (None, Some(t)) => heldout_data(cfg, &load_hamiltonian(t)?)?,
        _ => return Err(CliError::Config("validate needs exactly one of --data or --truth".into())),
    };
    if heldout.mode != DatasetMode::HamiltonianLearning || heldout.num_sites != model.num_sites() {
        return Err(CliError::Config("held-out data does not match the model".into()));
    }
    let predictions = exact_predictions(&model, &heldout)?;
    let mut series = String::from("alpha,i,k,t,truth,model\n");
    for (r, m) in heldout.records.iter().zip(&predictions) {
        series.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.alpha,
            r.i,
            r.k,
            fmt_sig(heldout.dt * r.k as f64),
            fmt_sig(r.value),
            fmt_sig(*m)
        ));
    }
    let table = validation_csv(&model, &heldout)?;
    out.write("timeseries.csv", &series)?;
    out.write("validation.csv", &table)?;
    out.write("heldout.json", &heldout.to_json())?;
    out.write_config(cfg)?;
    Ok(table)
}
