//! One training run: configuration, presets per scale, and evaluation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::config::KvConfig;
use super::svg::{LinePlot, Series};
use crate::algebra::VectorField;
use crate::bench::{self, Domain, Problem};
use crate::discovery::{
    error_between, evaluate_on, imde_coefficients_on, make_dataset, save_reports, train, truncated_values, write_curve,
    Dataset, DatasetKind, DatasetSpec, ErrorReport, ModelKind, Objective, Probe, TrainConfig, DEFAULT_LOG_EVERY,
    MIN_DOMAIN_SAMPLES, MIN_POINTS_PER_UNIT_TIME,
};
use crate::error::{Error, Result};
use crate::imde::{ImdeField, ImdeMethod};
use crate::integrators::{rk_step, ButcherTableau, LmmScheme, Method, SolverSpec};
use crate::nn::{hamiltonian_field_from_net, Activation, AdamState, Checkpoint, LrSchedule, Mlp, ScheduleKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Desk,
    Full,
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Desk => "desk",
            Scale::Full => "full",
        })
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            other => Err(Error::Config(format!("unknown scale `{other}` (desk or full)"))),
        }
    }
}

/// Where training pairs come from.
#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    /// One trajectory from `x0` over `[0, horizon]`.
    Flow { x0: Vec<f64>, horizon: f64 },
    /// Uniform samples in a box.
    Domain { domain: Domain, count: usize },
}

/// Batch size of the training loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BatchSize {
    Full,
    /// Clamped to the number of loss terms.
    AtMost(usize),
}

impl fmt::Display for BatchSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BatchSize::Full => f.write_str("full"),
            BatchSize::AtMost(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for BatchSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "full" {
            return Ok(BatchSize::Full);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(BatchSize::AtMost(n)),
            _ => Err(Error::Config(format!("batch must be `full` or a positive integer, got `{s}`"))),
        }
    }
}

/// Training defaults of a problem at a given scale.
#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub schedule: ScheduleKind,
    pub lr: f64,
    pub lr_end: f64,
    pub batch: BatchSize,
    pub updates: u64,
    pub flow_data: bool,
    pub count: usize,
    pub eval_samples: usize,
}

/// Defaults for `problem` at `scale`. Desk scale halves hidden widths and
/// cuts update counts tenfold (HNN: fivefold), and replaces constant
/// learning rates with the exponential decay from `1e-2` to `1e-5`.
pub fn preset(problem: &str, model: ModelKind, scale: Scale) -> Preset {
    let mut p = match problem {
        "pendulum" => Preset {
            hidden: vec![128, 128],
            activation: Activation::Tanh,
            schedule: ScheduleKind::ExpDecay,
            lr: 1e-2,
            lr_end: 1e-5,
            batch: BatchSize::Full,
            updates: 300_000,
            flow_data: true,
            count: 0,
            eval_samples: 1_000_000,
        },
        "damped-oscillator" | "lorenz" => Preset {
            hidden: vec![128],
            activation: Activation::Sigmoid,
            schedule: ScheduleKind::Constant,
            lr: 1e-4,
            lr_end: 1e-4,
            batch: BatchSize::AtMost(if problem == "lorenz" { 500 } else { 2000 }),
            updates: 500_000,
            flow_data: problem == "lorenz",
            count: 10_000,
            eval_samples: 1_000_000,
        },
        "pendulum-hnn" => Preset {
            hidden: vec![128, 128],
            activation: Activation::Tanh,
            schedule: ScheduleKind::Constant,
            lr: 1e-3,
            lr_end: 1e-3,
            batch: BatchSize::Full,
            updates: 500_000,
            flow_data: false,
            count: 6000,
            eval_samples: 1_000_000,
        },
        _ => Preset {
            hidden: vec![64],
            activation: Activation::Tanh,
            schedule: ScheduleKind::ExpDecay,
            lr: 1e-2,
            lr_end: 1e-5,
            batch: BatchSize::Full,
            updates: 10_000,
            flow_data: false,
            count: 1000,
            eval_samples: MIN_DOMAIN_SAMPLES,
        },
    };
    if scale == Scale::Desk {
        p.hidden = p.hidden.iter().map(|w| (w / 2).max(1)).collect();
        p.eval_samples = p.eval_samples.min(MIN_DOMAIN_SAMPLES);
        if model.is_hnn() {
            p.updates = (p.updates / 5).max(1);
            p.batch = BatchSize::AtMost(DESK_HNN_BATCH);
        } else {
            p.updates = (p.updates / 10).max(1);
            if p.schedule == ScheduleKind::Constant {
                p.schedule = ScheduleKind::ExpDecay;
                p.lr = 1e-2;
                p.lr_end = 1e-5;
            }
        }
    }
    p
}

/// Mini-batch size of desk-scale HNN runs.
pub const DESK_HNN_BATCH: usize = 500;

/// Fully resolved settings of one run.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub run_id: String,
    pub scale: Scale,
    pub problem: Problem,
    /// Parameters given explicitly, as `(name, value)`.
    pub problem_params: Vec<(String, f64)>,
    pub model: ModelKind,
    pub method: String,
    /// Data step `T`.
    pub data_step: f64,
    /// Composition count `S`; the solver step is `T / S`.
    pub compositions: usize,
    /// Truncation index `K` of the IMDE compared against.
    pub imde_order: usize,
    pub data: DataSource,
    pub test_count: usize,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub schedule: LrSchedule,
    pub batch: BatchSize,
    pub updates: u64,
    pub log_every: u64,
    /// `run.seed`; the default for the data, training and evaluation seeds.
    pub seed: u64,
    pub data_seed: u64,
    pub train_seed: u64,
    pub eval_seed: u64,
    pub eval_samples: usize,
    pub points_per_unit: usize,
    pub out: PathBuf,
    pub plot: bool,
}

const KNOWN_KEYS: [&str; 27] = [
    "run.id",
    "run.scale",
    "run.seed",
    "run.out",
    "run.plot",
    "problem.name",
    "problem.domain",
    "model.kind",
    "method.name",
    "method.T",
    "method.S",
    "method.K",
    "data.kind",
    "data.count",
    "data.horizon",
    "data.x0",
    "data.test_count",
    "data.seed",
    "net.hidden",
    "net.activation",
    "train.schedule",
    "train.lr",
    "train.lr_end",
    "train.batch",
    "train.updates",
    "train.log_every",
    "train.seed",
];

const EVAL_KEYS: [&str; 3] = ["eval.samples", "eval.points_per_unit", "eval.seed"];

/// HNN comparisons stop at `K = 2`: the third symplectic coefficient needs
/// a fourth-order tower per point and dominates the evaluation time.
fn default_imde_order(model: ModelKind) -> usize {
    if model.is_hnn() {
        2
    } else {
        3
    }
}

fn default_method(model: ModelKind) -> &'static str {
    match model {
        ModelKind::Odenet => "euler",
        ModelKind::Lmnet => "implicit-euler",
        ModelKind::HnnSymplecticEuler => "symplectic-euler",
        ModelKind::HnnExplicit => "euler",
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

impl ExperimentConfig {
    /// Resolves a configuration; missing keys take the preset of the
    /// problem at `run.scale` (desk by default).
    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        for key in kv.keys() {
            if !(KNOWN_KEYS.contains(&key) || EVAL_KEYS.contains(&key) || key.starts_with("problem.")) {
                return Err(Error::Config(format!("unknown key `{key}`")));
            }
        }
        let name: String = kv.required("problem.name")?;
        let mut problem_params = Vec::new();
        for (k, v) in kv.section("problem") {
            if k == "name" || k == "domain" {
                continue;
            }
            let value = v.parse::<f64>().map_err(|e| Error::Config(format!("`problem.{k}` = `{v}`: {e}")))?;
            problem_params.push((k.to_string(), value));
        }
        let problem = bench::problem(&name, &problem_params)?;
        let n = problem.dim();
        let scale: Scale = kv.parse_or("run.scale", Scale::Desk)?;
        let model: ModelKind = kv.parse_or("model.kind", ModelKind::Odenet)?;
        let method: String = kv.parse_or("method.name", default_method(model).to_string())?;
        let data_step: f64 = kv.parse_or("method.T", problem.data_step)?;
        let compositions: usize = kv.parse_or("method.S", 1)?;
        let imde_order: usize = kv.parse_or("method.K", default_imde_order(model))?;
        let p = preset(&name, model, scale);

        let flow = match kv.get("data.kind") {
            None => p.flow_data,
            Some("flow") => true,
            Some("domain") => false,
            Some(other) => return Err(Error::Config(format!("unknown data kind `{other}` (flow or domain)"))),
        };
        let data = if flow {
            let x0 = kv.list_opt::<f64>("data.x0")?.unwrap_or_else(|| problem.x0.clone());
            if x0.len() != n {
                return Err(Error::Config(format!("`data.x0` needs {n} entries")));
            }
            DataSource::Flow { x0, horizon: kv.parse_or("data.horizon", problem.horizon)? }
        } else {
            let domain = match kv.get("problem.domain") {
                Some(d) => problem.domain_named(d)?.clone(),
                None => problem.domain().clone(),
            };
            DataSource::Domain { domain, count: kv.parse_or("data.count", p.count)? }
        };
        let seed: u64 = kv.parse_or("run.seed", 0)?;
        let kind: ScheduleKind = kv.parse_or("train.schedule", p.schedule)?;
        let lr: f64 = kv.parse_or("train.lr", p.lr)?;
        let updates: u64 = kv.parse_or("train.updates", p.updates)?;
        let schedule = match kind {
            ScheduleKind::Constant => LrSchedule::constant(lr),
            ScheduleKind::ExpDecay => LrSchedule::exp_decay(lr, kv.parse_or("train.lr_end", p.lr_end)?, updates),
        };
        let cfg = Self {
            run_id: String::new(),
            scale,
            problem,
            problem_params,
            model,
            method,
            data_step,
            compositions,
            imde_order,
            data,
            test_count: kv.parse_or("data.test_count", 100)?,
            hidden: kv.list_opt("net.hidden")?.unwrap_or(p.hidden),
            activation: kv.parse_or("net.activation", p.activation)?,
            schedule,
            batch: kv.parse_or("train.batch", p.batch)?,
            updates,
            log_every: kv.parse_or("train.log_every", DEFAULT_LOG_EVERY)?,
            seed,
            data_seed: kv.parse_or("data.seed", seed)?,
            train_seed: kv.parse_or("train.seed", seed)?,
            eval_seed: kv.parse_or("eval.seed", seed.wrapping_add(2))?,
            eval_samples: kv.parse_or("eval.samples", p.eval_samples)?,
            points_per_unit: kv.parse_or("eval.points_per_unit", MIN_POINTS_PER_UNIT_TIME)?,
            out: kv.parse_or("run.out", PathBuf::from("out"))?,
            plot: kv.parse_or("run.plot", true)?,
        };
        let run_id = match kv.get("run.id") {
            Some(id) => id.to_string(),
            None => cfg.default_run_id(),
        };
        let cfg = Self { run_id, ..cfg };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_kv(&KvConfig::load(path)?)
    }

    fn default_run_id(&self) -> String {
        format!("{}-{}-{}-T{}-S{}", self.problem.name, self.model, self.method, self.data_step, self.compositions)
    }

    fn check(&self) -> Result<()> {
        if !(self.data_step > 0.0 && self.data_step.is_finite()) {
            return Err(Error::Config(format!("data step must be positive, got {}", self.data_step)));
        }
        if self.compositions == 0 {
            return Err(Error::Config("`method.S` must be at least 1".into()));
        }
        if self.model != ModelKind::Odenet && self.compositions != 1 {
            return Err(Error::Config(format!("{} takes one step per pair; `method.S` must be 1", self.model)));
        }
        if self.hidden.contains(&0) {
            return Err(Error::Config("hidden widths must be positive".into()));
        }
        if self.log_every == 0 {
            return Err(Error::Config("`train.log_every` must be positive".into()));
        }
        if self.eval_samples < MIN_DOMAIN_SAMPLES && matches!(self.data, DataSource::Domain { .. }) {
            return Err(Error::Config(format!("`eval.samples` must be at least {MIN_DOMAIN_SAMPLES}")));
        }
        if self.points_per_unit < MIN_POINTS_PER_UNIT_TIME {
            return Err(Error::Config(format!("`eval.points_per_unit` must be at least {MIN_POINTS_PER_UNIT_TIME}")));
        }
        if let DataSource::Flow { horizon, .. } = &self.data {
            if self.flow_length(*horizon) == 0 {
                return Err(Error::Config(format!("horizon {horizon} is shorter than the data step")));
            }
        }
        if self.model.is_hnn() && !self.problem.dim().is_multiple_of(2) {
            return Err(Error::OddDimension(self.problem.dim()));
        }
        self.objective()?;
        self.imde_method()?;
        Ok(())
    }

    fn flow_length(&self, horizon: f64) -> usize {
        (horizon / self.data_step).round() as usize
    }

    /// Solver step `h = T / S`.
    pub fn step(&self) -> f64 {
        self.data_step / self.compositions as f64
    }

    pub fn objective(&self) -> Result<Objective> {
        let h = self.step();
        let expect = |name: &str| {
            if self.method == name {
                Ok(())
            } else {
                Err(Error::Config(format!("{} trains with `{name}`, not `{}`", self.model, self.method)))
            }
        };
        Ok(match self.model {
            ModelKind::Odenet => {
                let method = Method::Rk(ButcherTableau::named(&self.method)?);
                Objective::Odenet(SolverSpec::for_data_step(method, self.data_step, self.compositions)?)
            }
            ModelKind::Lmnet => Objective::Lmnet { scheme: LmmScheme::named(&self.method)?, h },
            ModelKind::HnnSymplecticEuler => {
                expect("symplectic-euler")?;
                Objective::HnnSymplecticEuler { h }
            }
            ModelKind::HnnExplicit => {
                expect("euler")?;
                Objective::HnnExplicit { h }
            }
        })
    }

    pub fn imde_method(&self) -> Result<ImdeMethod> {
        Ok(match self.model {
            ModelKind::Lmnet => ImdeMethod::Multistep(LmmScheme::named(&self.method)?),
            _ => ImdeMethod::composed(Method::named(&self.method)?, self.compositions),
        })
    }

    pub fn widths(&self) -> Vec<usize> {
        let n = self.problem.dim();
        let mut w = vec![n];
        w.extend(&self.hidden);
        w.push(if self.model.is_hnn() { 1 } else { n });
        w
    }

    fn dataset_spec(&self, test: bool, train_data: Option<&Dataset>) -> Result<DatasetSpec> {
        Ok(match &self.data {
            DataSource::Flow { x0, horizon } => match (test, train_data) {
                // the held-out trajectory continues where the training one ends
                (true, Some(d)) => DatasetSpec::Flow {
                    x0: d.trajectory()?.last().cloned().unwrap_or_else(|| x0.clone()),
                    data_step: self.data_step,
                    length: self.test_count,
                },
                _ => {
                    DatasetSpec::Flow { x0: x0.clone(), data_step: self.data_step, length: self.flow_length(*horizon) }
                }
            },
            DataSource::Domain { domain, count } => DatasetSpec::Domain {
                domain: domain.clone(),
                data_step: self.data_step,
                count: if test { self.test_count } else { *count },
                seed: if test { self.data_seed.wrapping_add(1) } else { self.data_seed },
            },
        })
    }

    pub fn train_data(&self) -> Result<Dataset> {
        make_dataset(&self.problem.field, &self.dataset_spec(false, None)?)
    }

    /// 100 held-out pairs by default: fresh samples for domain data, the
    /// continuation of the trajectory for flow data.
    pub fn test_data(&self, train_data: &Dataset) -> Result<Dataset> {
        make_dataset(&self.problem.field, &self.dataset_spec(true, Some(train_data))?)
    }

    pub fn train_config(&self, data: &Dataset) -> Result<TrainConfig> {
        let objective = self.objective()?;
        let terms = objective.terms(data);
        let batch_size = match self.batch {
            BatchSize::Full => terms,
            BatchSize::AtMost(b) => b.min(terms),
        };
        Ok(TrainConfig {
            objective,
            widths: self.widths(),
            activation: self.activation,
            schedule: self.schedule,
            batch_size,
            updates: self.updates,
            seed: self.train_seed,
            log_every: self.log_every,
        })
    }

    /// The probe set of the error metric: the reference trajectory for flow
    /// data, uniform samples for domain data.
    pub fn probe(&self) -> Result<Probe> {
        Ok(match &self.data {
            DataSource::Flow { x0, horizon } => Probe::flow(&self.problem.field, x0, *horizon, self.points_per_unit)?,
            DataSource::Domain { domain, .. } => Probe::domain(domain, self.eval_samples, self.eval_seed),
        })
    }

    /// Resolved settings as a config file.
    pub fn to_kv(&self) -> KvConfig {
        let mut kv = KvConfig::new();
        let mut set = |k: &str, v: String| kv.set(k, v).expect("static keys are valid");
        set("run.id", self.run_id.clone());
        set("run.scale", self.scale.to_string());
        set("run.seed", self.seed.to_string());
        set("run.out", self.out.display().to_string());
        set("run.plot", self.plot.to_string());
        set("problem.name", self.problem.name.clone());
        for (k, v) in &self.problem_params {
            set(&format!("problem.{k}"), fmt_f64(*v));
        }
        set("model.kind", self.model.to_string());
        set("method.name", self.method.clone());
        set("method.T", fmt_f64(self.data_step));
        set("method.S", self.compositions.to_string());
        set("method.K", self.imde_order.to_string());
        match &self.data {
            DataSource::Flow { x0, horizon } => {
                set("data.kind", "flow".into());
                set("data.x0", x0.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","));
                set("data.horizon", fmt_f64(*horizon));
            }
            DataSource::Domain { domain, count } => {
                set("data.kind", "domain".into());
                set("problem.domain", domain.name.clone());
                set("data.count", count.to_string());
            }
        }
        set("data.test_count", self.test_count.to_string());
        set("net.hidden", self.hidden.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(","));
        set("net.activation", self.activation.to_string());
        set("train.schedule", self.schedule.kind.to_string());
        set("train.lr", fmt_f64(self.schedule.start));
        set("train.lr_end", fmt_f64(self.schedule.end));
        set("train.batch", self.batch.to_string());
        set("train.updates", self.updates.to_string());
        set("train.log_every", self.log_every.to_string());
        set("eval.samples", self.eval_samples.to_string());
        set("eval.points_per_unit", self.points_per_unit.to_string());
        // part seeds are written only when they differ from their `run.seed` defaults
        for (key, value, default) in [
            ("data.seed", self.data_seed, self.seed),
            ("train.seed", self.train_seed, self.seed),
            ("eval.seed", self.eval_seed, self.seed.wrapping_add(2)),
        ] {
            if value != default {
                set(key, value.to_string());
            }
        }
        kv
    }
}

/// Everything a finished run produces.
pub struct ExperimentOutcome {
    pub report: ErrorReport,
    pub net: Mlp,
    pub optimizer: Option<AdamState>,
    pub curve: Vec<(u64, f64)>,
    /// `E(f, f_h^K)`: how far the IMDE itself is from `f`.
    pub e_f_vs_imde: f64,
}

/// Error measures of a trained network.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub train_loss: f64,
    pub test_loss: f64,
    pub e_net_vs_f: f64,
    pub e_net_vs_imde: f64,
    pub e_f_vs_imde: f64,
}

/// Losses and errors of `net` under the configuration's objective and probe.
pub fn evaluate(cfg: &ExperimentConfig, net: &Mlp, train_data: &Dataset) -> Result<Evaluation> {
    let objective = cfg.objective()?;
    objective.validate(net, train_data)?;
    let test_data = cfg.test_data(train_data)?;
    let probe = cfg.probe()?;
    let coeffs = imde_coefficients_on(&cfg.problem.field, &cfg.imde_method()?, cfg.imde_order, &probe)?;
    let f_vals: Vec<Vec<f64>> = coeffs.iter().map(|c| c[0].clone()).collect();
    let imde_vals = truncated_values(&coeffs, cfg.step());
    let net_vals = if cfg.model.is_hnn() {
        let g = hamiltonian_field_from_net(net.clone())?;
        evaluate_on(|x| VectorField::<f64>::eval(&g, x), &probe)?
    } else {
        evaluate_on(|x| net.forward(x), &probe)?
    };
    Ok(Evaluation {
        train_loss: objective.loss(net, train_data)?,
        test_loss: objective.loss(net, &test_data)?,
        e_net_vs_f: error_between(&net_vals, &f_vals, &probe),
        e_net_vs_imde: error_between(&net_vals, &imde_vals, &probe),
        e_f_vs_imde: error_between(&f_vals, &imde_vals, &probe),
    })
}

impl ExperimentConfig {
    /// A report row carrying this run's identity and no measurements.
    pub fn blank_report(&self, status: impl Into<String>) -> ErrorReport {
        ErrorReport {
            run_id: self.run_id.clone(),
            model: self.model.to_string(),
            method: self.method.clone(),
            t: self.data_step,
            s: self.compositions,
            h: self.step(),
            train_loss: None,
            test_loss: None,
            e_net_vs_f: None,
            e_net_vs_imde: None,
            order: None,
            status: status.into(),
        }
    }

    pub fn report(&self, ev: &Evaluation) -> ErrorReport {
        ErrorReport {
            train_loss: Some(ev.train_loss),
            test_loss: Some(ev.test_loss),
            e_net_vs_f: Some(ev.e_net_vs_f),
            e_net_vs_imde: Some(ev.e_net_vs_imde),
            ..self.blank_report("ok")
        }
    }
}

/// Generates data, trains, and evaluates.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let data = cfg.train_data()?;
    let tc = cfg.train_config(&data)?;
    let out = train(&tc, &data)?;
    let ev = evaluate(cfg, &out.net, &data)?;
    Ok(ExperimentOutcome {
        report: cfg.report(&ev),
        net: out.net,
        optimizer: Some(out.optimizer),
        curve: out.curve,
        e_f_vs_imde: ev.e_f_vs_imde,
    })
}

/// Paths of the files written for a run.
pub struct Artifacts {
    pub config: PathBuf,
    pub checkpoint: PathBuf,
    pub curve: PathBuf,
    pub report: PathBuf,
    pub plots: Vec<PathBuf>,
}

impl Artifacts {
    pub fn for_run(dir: &Path, run_id: &str) -> Self {
        let p = |suffix: &str| dir.join(format!("{run_id}.{suffix}"));
        Self {
            config: p("cfg"),
            checkpoint: p("checkpoint.json"),
            curve: p("curve.csv"),
            report: p("report.csv"),
            plots: vec![p("loss.svg"), p("phase.svg")],
        }
    }
}

/// Writes config, checkpoint, loss curve, report row, and plots to `cfg.out`.
pub fn write_artifacts(cfg: &ExperimentConfig, outcome: &ExperimentOutcome) -> Result<Artifacts> {
    std::fs::create_dir_all(&cfg.out)?;
    let a = Artifacts::for_run(&cfg.out, &cfg.run_id);
    std::fs::write(&a.config, cfg.to_kv().to_text())?;
    Checkpoint::from_net(&outcome.net, outcome.optimizer.as_ref()).save(&a.checkpoint)?;
    write_curve(std::fs::File::create(&a.curve)?, &outcome.curve)?;
    save_reports(&a.report, std::slice::from_ref(&outcome.report))?;
    let mut plots = Vec::new();
    if cfg.plot {
        std::fs::write(&a.plots[0], loss_plot(cfg, &outcome.curve).render())?;
        plots.push(a.plots[0].clone());
        if cfg.problem.dim() >= 2 {
            std::fs::write(&a.plots[1], phase_plot(cfg, &outcome.net)?.render())?;
            plots.push(a.plots[1].clone());
        }
    }
    Ok(Artifacts { plots, ..a })
}

fn loss_plot(cfg: &ExperimentConfig, curve: &[(u64, f64)]) -> LinePlot {
    let points = curve.iter().filter(|(_, l)| *l > 0.0).map(|&(s, l)| (s as f64, l)).collect();
    LinePlot {
        title: format!("{} training loss", cfg.run_id),
        x_label: "update".into(),
        y_label: "loss".into(),
        log_y: true,
        series: vec![Series::new("train", points)],
        ..LinePlot::default()
    }
}

/// Classical RK4 trajectory of `g` sampled every `dt`; stops early if the
/// field fails or blows up.
fn rk4_path<G: VectorField<f64> + ?Sized>(g: &G, x0: &[f64], dt: f64, n: usize) -> Vec<Vec<f64>> {
    let tab = ButcherTableau::rk4();
    let mut out = vec![x0.to_vec()];
    for _ in 0..n {
        match rk_step(&tab, g, out.last().unwrap(), &dt) {
            Ok(y) if y.iter().all(|v| v.is_finite() && v.abs() < 1e6) => out.push(y),
            _ => break,
        }
    }
    out
}

/// Trajectories of `f`, the truncated IMDE and the learned field from the
/// initial point, projected to the first two coordinates.
fn phase_plot(cfg: &ExperimentConfig, net: &Mlp) -> Result<LinePlot> {
    let (x0, horizon) = match &cfg.data {
        DataSource::Flow { x0, horizon } => (x0.clone(), *horizon),
        DataSource::Domain { .. } => (cfg.problem.x0.clone(), cfg.problem.horizon),
    };
    let dt = 1e-2;
    let n = (horizon / dt).round() as usize;
    let imde = ImdeField::new(&cfg.problem.field, cfg.imde_method()?, cfg.imde_order)?;
    let learned: Vec<Vec<f64>> = if cfg.model.is_hnn() {
        rk4_path(&hamiltonian_field_from_net(net.clone())?, &x0, dt, n)
    } else {
        rk4_path(net, &x0, dt, n)
    };
    let project = |path: Vec<Vec<f64>>| path.into_iter().map(|y| (y[0], y[1])).collect();
    Ok(LinePlot {
        title: format!("{} phase portrait", cfg.run_id),
        x_label: "y1".into(),
        y_label: "y2".into(),
        series: vec![
            Series::new("f", project(rk4_path(&cfg.problem.field, &x0, dt, n))),
            Series::new(
                &format!("IMDE (K = {})", cfg.imde_order),
                project(rk4_path(&imde.truncated(cfg.step()), &x0, dt, n)),
            ),
            Series::new("learned", project(learned)),
        ],
        ..LinePlot::default()
    })
}

/// Kind of the training data.
pub fn data_kind(cfg: &ExperimentConfig) -> DatasetKind {
    match cfg.data {
        DataSource::Flow { .. } => DatasetKind::Flow,
        DataSource::Domain { .. } => DatasetKind::Domain,
    }
}
