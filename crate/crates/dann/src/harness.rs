//! Experiment orchestration: grid search with target-validation selection,
//! PAD sweeps over representations, the end-to-end moons pipeline, and the
//! result-table emissions. Every run fans a master seed out to per-cell
//! seeds through the stream-derivation rule, so any cell can be reproduced
//! in isolation and concurrent execution cannot change a single byte of the
//! outputs.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::data::{
    gen_moons, load_sparse, make_task, save_sparse_labeled, save_sparse_unlabeled, LabeledSet,
    MoonsConfig, Task, UnlabeledSet,
};
use crate::divergence::{compute_pad, default_c_grid, pad_on_representation, PadReport};
use crate::error::{Error, Result};
use crate::msda;
use crate::net::{self, ModelDocument, TrainConfig, TrainMode};
use crate::rng::Rng;
use crate::svm;
use crate::tensor::SparseVec;
use crate::{analysis, divergence};

const TAG_TASK: u64 = 0x100;
const TAG_CELL: u64 = 0x200;
const TAG_PAD: u64 = 0x300;
const TAG_VAL_PICK: u64 = 0x400;

/// Runs closures for indices `0..n` on up to `jobs` threads; the result
/// order is by index, independent of scheduling.
pub fn parallel_map<T, F>(n: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let jobs = jobs.max(1).min(n.max(1));
    if jobs <= 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let v = f(i);
                slots.lock().expect("worker panicked holding results")[i] = Some(v);
            });
        }
    });
    slots
        .into_inner()
        .expect("scope joined all workers")
        .into_iter()
        .map(|o| o.expect("every index filled"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Dann,
    Nn,
    Svm,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Dann => "dann",
            Algorithm::Nn => "nn",
            Algorithm::Svm => "svm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Raw,
    Msda,
}

impl Representation {
    pub fn as_str(self) -> &'static str {
        match self {
            Representation::Raw => "raw",
            Representation::Msda => "msda",
        }
    }
}

/// Where a task's data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TaskSpec {
    /// Generated rotated-moons problem.
    Moons {
        #[serde(default)]
        moons: MoonsConfig,
    },
    /// Labeled source and target pools in the sparse text format.
    Sparse { source: PathBuf, target: PathBuf },
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Dann, Algorithm::Nn, Algorithm::Svm]
}

/// Nine lambda values log-spaced over `[1e-2, 1]`.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..9).map(|k| 10f64.powf(-2.0 + 2.0 * k as f64 / 8.0)).collect()
}

/// The standard hidden-layer size grid.
pub fn default_hidden_grid() -> Vec<usize> {
    vec![1, 5, 12, 25, 50, 75, 100, 150, 200]
}

fn default_c_grid_cfg() -> Vec<f64> {
    default_c_grid()
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_m() -> usize {
    2000
}
fn default_val_target() -> usize {
    100
}
fn default_grid_max_epochs() -> usize {
    500
}
fn default_grid_patience() -> usize {
    10
}
fn default_jobs() -> usize {
    1
}
fn default_pad_hidden() -> usize {
    100
}
fn default_pad_lambda() -> f64 {
    0.31
}
fn default_msda_p() -> f64 {
    0.5
}
fn default_msda_layers() -> usize {
    5
}
fn default_msda_ridge() -> f64 {
    1e-5
}

/// mSDA front-end settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsdaSettings {
    #[serde(default = "default_msda_p")]
    pub corruption_p: f64,
    #[serde(default = "default_msda_layers")]
    pub layers: usize,
    #[serde(default = "default_msda_ridge")]
    pub ridge: f64,
    /// Keep only this many most-frequent features before fitting; `None`
    /// uses the full dimension.
    #[serde(default)]
    pub keep: Option<usize>,
}

impl Default for MsdaSettings {
    fn default() -> Self {
        MsdaSettings {
            corruption_p: default_msda_p(),
            layers: default_msda_layers(),
            ridge: default_msda_ridge(),
            keep: None,
        }
    }
}

/// One experiment: tasks x algorithms over a hyper-parameter grid, selected
/// on a small labeled target validation set. Defaults mirror the standard
/// sentiment-benchmark protocol: 2000/2000 source/target examples, a
/// 100-example target validation set, nine lambdas in `[1e-2, 1]`, hidden
/// sizes {1, 5, 12, 25, 50, 75, 100, 150, 200}, ten C values in `[1e-5, 1]`,
/// and a fixed learning rate of 1e-3 on raw features or 1e-4 on mSDA
/// features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub tasks: Vec<TaskSpec>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "ExperimentConfig::default_representation")]
    pub representation: Representation,
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_hidden_grid")]
    pub hidden_grid: Vec<usize>,
    #[serde(default = "default_c_grid_cfg")]
    pub c_grid: Vec<f64>,
    /// Learning rate; `None` resolves by representation.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_m")]
    pub m_prime: usize,
    #[serde(default = "default_val_target")]
    pub val_target: usize,
    #[serde(default = "default_grid_max_epochs")]
    pub max_epochs: usize,
    #[serde(default = "default_grid_patience")]
    pub patience: usize,
    #[serde(default)]
    pub msda: MsdaSettings,
    #[serde(default = "default_pad_hidden")]
    pub pad_hidden: usize,
    #[serde(default = "default_pad_lambda")]
    pub pad_lambda: f64,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    fn default_representation() -> Representation {
        Representation::Raw
    }

    pub fn new(tasks: Vec<TaskSpec>) -> Self {
        ExperimentConfig {
            tasks,
            algorithms: default_algorithms(),
            representation: Representation::Raw,
            lambda_grid: default_lambda_grid(),
            hidden_grid: default_hidden_grid(),
            c_grid: default_c_grid_cfg(),
            alpha: None,
            seeds: default_seeds(),
            m: default_m(),
            m_prime: default_m(),
            val_target: default_val_target(),
            max_epochs: default_grid_max_epochs(),
            patience: default_grid_patience(),
            msda: MsdaSettings::default(),
            pad_hidden: default_pad_hidden(),
            pad_lambda: default_pad_lambda(),
            jobs: default_jobs(),
            master_seed: 0,
            output_dir: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tasks.is_empty() {
            return Err(Error::EmptyInput { what: "task list" });
        }
        if self.algorithms.is_empty() {
            return Err(Error::EmptyInput { what: "algorithm list" });
        }
        if self.lambda_grid.is_empty() || self.hidden_grid.is_empty() || self.c_grid.is_empty() {
            return Err(Error::EmptyInput { what: "hyper-parameter grid" });
        }
        if self.seeds.is_empty() {
            return Err(Error::EmptyInput { what: "seed list" });
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0) {
                return Err(Error::InvalidArg(format!("alpha must be > 0, got {a}")));
            }
        }
        Ok(())
    }

    /// Learning rate after representation-dependent resolution.
    pub fn resolved_alpha(&self) -> f64 {
        self.alpha.unwrap_or(match self.representation {
            Representation::Raw => 1e-3,
            Representation::Msda => 1e-4,
        })
    }
}

/// One line of the result table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub task: String,
    pub algorithm: String,
    pub representation: String,
    pub hidden: Option<usize>,
    pub lambda: Option<f64>,
    pub c_param: Option<f64>,
    pub val_risk: f64,
    pub test_risk: f64,
    pub seed: u64,
}

/// Per-cell audit record for the grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct CellLog {
    pub task: String,
    pub algorithm: String,
    pub representation: String,
    pub seed: u64,
    pub hidden: Option<usize>,
    pub lambda: Option<f64>,
    pub c_param: Option<f64>,
    pub val_risk: Option<f64>,
    pub status: String,
}

/// Everything a grid run produces.
#[derive(Debug, Clone, Default)]
pub struct GridOutcome {
    pub rows: Vec<ResultRow>,
    pub cells: Vec<CellLog>,
    pub warnings: Vec<String>,
}

fn materialize_task(spec: &TaskSpec, cfg: &ExperimentConfig, task_seed: u64) -> Result<Task> {
    match spec {
        TaskSpec::Moons { moons } => {
            let moons = MoonsConfig { seed: task_seed, ..moons.clone() };
            let (source, target_unlabeled, truth) = gen_moons(&moons)?;
            // Validation/test split of the labeled rotated sample.
            let mut idx: Vec<usize> = (0..truth.len()).collect();
            let mut rng = Rng::new(task_seed).derive(TAG_VAL_PICK);
            rng.shuffle(&mut idx);
            let val_take = cfg.val_target.min(truth.len() / 2);
            let target_val = truth.subset("target-val", &idx[..val_take])?;
            let target_test = truth.subset("target-test", &idx[val_take..])?;
            Ok(Task {
                name: "moons".to_string(),
                source,
                target_unlabeled,
                target_val,
                target_test,
            })
        }
        TaskSpec::Sparse { source, target } => {
            let src = load_sparse(source, 0)?.labeled()?;
            let tgt_path = target;
            let tgt = load_sparse(tgt_path, src.dim)?.labeled()?;
            let src = if tgt.dim > src.dim {
                // Re-read with the wider dimension so both sides agree.
                load_sparse(source, tgt.dim)?.labeled()?
            } else {
                src
            };
            make_task(&src, &tgt, cfg.m, cfg.m_prime, cfg.val_target, task_seed)
        }
    }
}

fn apply_msda_representation(task: &Task, settings: &MsdaSettings) -> Result<(Task, msda::MsdaModel)> {
    let mut pool: Vec<SparseVec> = task.source.features();
    pool.extend(task.target_unlabeled.examples.iter().cloned());
    let model = match settings.keep {
        Some(k) => msda::fit_truncated(&pool, settings.corruption_p, settings.layers, settings.ridge, k)?,
        None => msda::fit(&pool, settings.corruption_p, settings.layers, settings.ridge)?,
    };
    let map_labeled = |set: &LabeledSet, name: &str| -> Result<LabeledSet> {
        let examples = set
            .examples
            .iter()
            .map(|(x, y)| Ok((msda::transform_to_sparse(&model, x)?, *y)))
            .collect::<Result<Vec<_>>>()?;
        LabeledSet::new(name, model.output_dim(), examples)
    };
    let unl = UnlabeledSet::new(
        &task.target_unlabeled.name,
        model.output_dim(),
        task.target_unlabeled
            .examples
            .iter()
            .map(|x| msda::transform_to_sparse(&model, x))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let mapped = Task {
        name: task.name.clone(),
        source: map_labeled(&task.source, &task.source.name)?,
        target_unlabeled: unl,
        target_val: map_labeled(&task.target_val, "target-val")?,
        target_test: map_labeled(&task.target_test, "target-test")?,
    };
    Ok((mapped, model))
}

#[derive(Clone)]
enum CellModel {
    Net(net::DannParams),
    Svm(svm::SvmModel),
}

#[derive(Clone)]
struct Cell {
    hidden: Option<usize>,
    lambda: Option<f64>,
    c_param: Option<f64>,
}

fn enumerate_cells(algo: Algorithm, cfg: &ExperimentConfig) -> Vec<Cell> {
    match algo {
        Algorithm::Dann => {
            // Hidden size outer, lambda inner: selection walks this order
            // and keeps the first minimum, so ties resolve to the smaller
            // capacity first, then the smaller lambda.
            let mut cells = Vec::new();
            for &l in &cfg.hidden_grid {
                for &lam in &cfg.lambda_grid {
                    cells.push(Cell { hidden: Some(l), lambda: Some(lam), c_param: None });
                }
            }
            cells
        }
        Algorithm::Nn => cfg
            .hidden_grid
            .iter()
            .map(|&l| Cell { hidden: Some(l), lambda: None, c_param: None })
            .collect(),
        Algorithm::Svm => cfg
            .c_grid
            .iter()
            .map(|&c| Cell { hidden: None, lambda: None, c_param: Some(c) })
            .collect(),
    }
}

fn train_cell(
    algo: Algorithm,
    cell: &Cell,
    task: &Task,
    cfg: &ExperimentConfig,
    cell_seed: u64,
) -> Result<(CellModel, f64)> {
    let model = match algo {
        Algorithm::Dann => {
            let mut tc = TrainConfig::new(
                cell.hidden.expect("dann cell has hidden size"),
                cell.lambda.expect("dann cell has lambda"),
                cfg.resolved_alpha(),
                cell_seed,
                TrainMode::Dann,
            );
            tc.max_epochs = cfg.max_epochs;
            tc.patience = cfg.patience;
            let (params, _) = net::train(&task.source, Some(&task.target_unlabeled), &tc)?;
            CellModel::Net(params)
        }
        Algorithm::Nn => {
            let mut tc = TrainConfig::new(
                cell.hidden.expect("nn cell has hidden size"),
                0.0,
                cfg.resolved_alpha(),
                cell_seed,
                TrainMode::NnPlain,
            );
            tc.max_epochs = cfg.max_epochs;
            tc.patience = cfg.patience;
            let (params, _) = net::train(&task.source, None, &tc)?;
            CellModel::Net(params)
        }
        Algorithm::Svm => {
            let model = svm::train(
                &task.source,
                cell.c_param.expect("svm cell has C"),
                svm::DEFAULT_EPOCHS,
                cell_seed,
            )?;
            CellModel::Svm(model)
        }
    };
    let val_risk = eval_model(&model, &task.target_val)?;
    Ok((model, val_risk))
}

fn eval_model(model: &CellModel, data: &LabeledSet) -> Result<f64> {
    match model {
        CellModel::Net(p) => net::risk(p, data),
        CellModel::Svm(m) => svm::error_rate(m, data),
    }
}

/// Trains every grid cell, selects per (task, algorithm, seed) the cell with
/// the lowest target-validation risk, and evaluates only the selected model
/// on the target test set.
pub fn run_grid(cfg: &ExperimentConfig) -> Result<GridOutcome> {
    cfg.validate()?;
    let master = Rng::new(cfg.master_seed);
    let mut outcome = GridOutcome::default();

    for (ti, spec) in cfg.tasks.iter().enumerate() {
        let task_seed = master.derive_seed(TAG_TASK + ti as u64);
        let raw_task = materialize_task(spec, cfg, task_seed)?;
        let task = match cfg.representation {
            Representation::Raw => raw_task,
            Representation::Msda => apply_msda_representation(&raw_task, &cfg.msda)?.0,
        };

        for &algo in &cfg.algorithms {
            for &seed in &cfg.seeds {
                let cells = enumerate_cells(algo, cfg);
                let unit_rng = Rng::new(seed).derive(task_seed);
                let results = parallel_map(cells.len(), cfg.jobs, |i| {
                    let cell_seed = unit_rng.derive_seed(TAG_CELL + i as u64);
                    train_cell(algo, &cells[i], &task, cfg, cell_seed)
                });

                let mut best: Option<(usize, f64, CellModel)> = None;
                for (i, res) in results.into_iter().enumerate() {
                    let cell = &cells[i];
                    match res {
                        Ok((model, val_risk)) => {
                            outcome.cells.push(CellLog {
                                task: task.name.clone(),
                                algorithm: algo.as_str().into(),
                                representation: cfg.representation.as_str().into(),
                                seed,
                                hidden: cell.hidden,
                                lambda: cell.lambda,
                                c_param: cell.c_param,
                                val_risk: Some(val_risk),
                                status: "ok".into(),
                            });
                            let better = match &best {
                                None => true,
                                Some((_, best_risk, _)) => val_risk < *best_risk,
                            };
                            if better {
                                best = Some((i, val_risk, model));
                            }
                        }
                        Err(e) => {
                            outcome.cells.push(CellLog {
                                task: task.name.clone(),
                                algorithm: algo.as_str().into(),
                                representation: cfg.representation.as_str().into(),
                                seed,
                                hidden: cell.hidden,
                                lambda: cell.lambda,
                                c_param: cell.c_param,
                                val_risk: None,
                                status: format!("failed: {e}"),
                            });
                            outcome.warnings.push(format!(
                                "{} {} seed {seed} cell {i}: {e}",
                                task.name,
                                algo.as_str()
                            ));
                        }
                    }
                }

                match best {
                    Some((i, val_risk, model)) => {
                        let test_risk = eval_model(&model, &task.target_test)?;
                        let cell = &cells[i];
                        outcome.rows.push(ResultRow {
                            task: task.name.clone(),
                            algorithm: algo.as_str().into(),
                            representation: cfg.representation.as_str().into(),
                            hidden: cell.hidden,
                            lambda: cell.lambda,
                            c_param: cell.c_param,
                            val_risk,
                            test_risk,
                            seed,
                        });
                    }
                    None => outcome.warnings.push(format!(
                        "{} {} seed {seed}: every grid cell failed, no result row",
                        task.name,
                        algo.as_str()
                    )),
                }
            }
        }
    }
    Ok(outcome)
}

/// Representations compared by the PAD sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadRepresentation {
    Raw,
    NnHidden,
    DannHidden,
    Msda,
    MsdaDann,
}

/// Computes PAD per task for the raw features and the hidden
/// representations of a plain network and a DANN (both at `pad_hidden`
/// neurons, the DANN at `pad_lambda`). With the mSDA representation
/// enabled, the mSDA features and DANN-on-mSDA are measured too. Returns
/// `(task name, report)` pairs.
pub fn run_pad_sweep(cfg: &ExperimentConfig) -> Result<Vec<(String, PadReport)>> {
    cfg.validate()?;
    let master = Rng::new(cfg.master_seed);
    let mut out = Vec::new();

    for (ti, spec) in cfg.tasks.iter().enumerate() {
        let task_seed = master.derive_seed(TAG_TASK + ti as u64);
        let pad_seed = master.derive_seed(TAG_PAD + ti as u64);
        let task = materialize_task(spec, cfg, task_seed)?;
        let s_feats = task.source.features();
        let t_feats = task.target_unlabeled.examples.clone();

        out.push((
            task.name.clone(),
            compute_pad(&s_feats, &t_feats, &cfg.c_grid, pad_seed, "raw")?,
        ));

        let alpha = cfg.resolved_alpha();
        let mut nn_cfg = TrainConfig::new(cfg.pad_hidden, 0.0, alpha, task_seed, TrainMode::NnPlain);
        nn_cfg.max_epochs = cfg.max_epochs;
        nn_cfg.patience = cfg.patience;
        let (nn_params, _) = net::train(&task.source, None, &nn_cfg)?;
        out.push((
            task.name.clone(),
            pad_on_representation(&nn_params, &s_feats, &t_feats, &cfg.c_grid, pad_seed, "nn")?,
        ));

        let mut dann_cfg =
            TrainConfig::new(cfg.pad_hidden, cfg.pad_lambda, alpha, task_seed, TrainMode::Dann);
        dann_cfg.max_epochs = cfg.max_epochs;
        dann_cfg.patience = cfg.patience;
        let (dann_params, _) = net::train(&task.source, Some(&task.target_unlabeled), &dann_cfg)?;
        out.push((
            task.name.clone(),
            pad_on_representation(&dann_params, &s_feats, &t_feats, &cfg.c_grid, pad_seed, "dann")?,
        ));

        if cfg.representation == Representation::Msda {
            let (mapped, _) = apply_msda_representation(&task, &cfg.msda)?;
            let ms = mapped.source.features();
            let mt = mapped.target_unlabeled.examples.clone();
            out.push((
                task.name.clone(),
                compute_pad(&ms, &mt, &cfg.c_grid, pad_seed, "msda")?,
            ));
            let mut md_cfg = TrainConfig::new(
                cfg.pad_hidden,
                cfg.pad_lambda,
                // mSDA features train at the slower rate.
                cfg.alpha.unwrap_or(1e-4),
                task_seed,
                TrainMode::Dann,
            );
            md_cfg.max_epochs = cfg.max_epochs;
            md_cfg.patience = cfg.patience;
            let (md_params, _) = net::train(&mapped.source, Some(&mapped.target_unlabeled), &md_cfg)?;
            out.push((
                task.name.clone(),
                pad_on_representation(&md_params, &ms, &mt, &cfg.c_grid, pad_seed, "msda+dann")?,
            ));
        }
    }
    Ok(out)
}

fn fmt_opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Serializes rows with the fixed column order
/// `task,algo,repr,l,lambda,C,val_risk,test_risk,seed`; byte-stable for
/// identical rows.
pub fn results_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from("task,algo,repr,l,lambda,C,val_risk,test_risk,seed\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.task,
            r.algorithm,
            r.representation,
            fmt_opt_usize(r.hidden),
            fmt_opt_f64(r.lambda),
            fmt_opt_f64(r.c_param),
            r.val_risk,
            r.test_risk,
            r.seed
        ));
    }
    out
}

/// Parses what [`results_to_csv`] wrote.
pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::EmptyInput { what: "results csv" })?;
    if header != "task,algo,repr,l,lambda,C,val_risk,test_risk,seed" {
        return Err(Error::Data(format!("unexpected results header: {header}")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Data(format!(
                "results row {} has {} fields, expected 9",
                i + 2,
                fields.len()
            )));
        }
        let parse_f = |s: &str, what: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Data(format!("bad {what} value {s:?} in results row {}", i + 2)))
        };
        rows.push(ResultRow {
            task: fields[0].to_string(),
            algorithm: fields[1].to_string(),
            representation: fields[2].to_string(),
            hidden: if fields[3].is_empty() {
                None
            } else {
                Some(fields[3].parse().map_err(|_| {
                    Error::Data(format!("bad l value {:?} in results row {}", fields[3], i + 2))
                })?)
            },
            lambda: if fields[4].is_empty() { None } else { Some(parse_f(fields[4], "lambda")?) },
            c_param: if fields[5].is_empty() { None } else { Some(parse_f(fields[5], "C")?) },
            val_risk: parse_f(fields[6], "val_risk")?,
            test_risk: parse_f(fields[7], "test_risk")?,
            seed: fields[8]
                .parse()
                .map_err(|_| Error::Data(format!("bad seed {:?} in results row {}", fields[8], i + 2)))?,
        });
    }
    Ok(rows)
}

/// Per-cell log CSV.
pub fn cells_to_csv(cells: &[CellLog]) -> String {
    let mut out = String::from("task,algo,repr,seed,l,lambda,C,val_risk,status\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.task,
            c.algorithm,
            c.representation,
            c.seed,
            fmt_opt_usize(c.hidden),
            fmt_opt_f64(c.lambda),
            fmt_opt_f64(c.c_param),
            fmt_opt_f64(c.val_risk),
            c.status
        ));
    }
    out
}

/// PAD sweep CSV: `representation_tag,task,pad`.
pub fn pad_to_csv(rows: &[(String, PadReport)]) -> String {
    let mut out = String::from("representation_tag,task,pad\n");
    for (task, report) in rows {
        out.push_str(&format!("{},{task},{}\n", report.representation_tag, report.pad_value));
    }
    out
}

/// Renders the pivot table: one line per task, one column per
/// (algorithm, representation) pair present in the rows, averaging test
/// risks over seeds.
pub fn render_table(rows: &[ResultRow]) -> String {
    let mut tasks: Vec<String> = Vec::new();
    for r in rows {
        if !tasks.contains(&r.task) {
            tasks.push(r.task.clone());
        }
    }
    let col_order = [
        ("dann", "raw"),
        ("nn", "raw"),
        ("svm", "raw"),
        ("dann", "msda"),
        ("nn", "msda"),
        ("svm", "msda"),
    ];
    let cols: Vec<(String, String)> = col_order
        .iter()
        .filter(|(a, rep)| {
            rows.iter()
                .any(|r| r.algorithm == *a && r.representation == *rep)
        })
        .map(|(a, rep)| (a.to_string(), rep.to_string()))
        .collect();

    let task_width = tasks.iter().map(|t| t.len()).max().unwrap_or(4).max(4);
    let mut out = format!("{:<task_width$}", "task");
    for (a, rep) in &cols {
        out.push_str(&format!("  {:>10}", format!("{a}/{rep}")));
    }
    out.push('\n');
    for t in &tasks {
        out.push_str(&format!("{t:<task_width$}"));
        for (a, rep) in &cols {
            let risks: Vec<f64> = rows
                .iter()
                .filter(|r| &r.task == t && &r.algorithm == a && &r.representation == rep)
                .map(|r| r.test_risk)
                .collect();
            if risks.is_empty() {
                out.push_str(&format!("  {:>10}", "-"));
            } else {
                let mean = risks.iter().sum::<f64>() / risks.len() as f64;
                out.push_str(&format!("  {mean:>10.3}"));
            }
        }
        out.push('\n');
    }
    out
}

/// Knobs for the end-to-end moons pipeline: data generation, DANN and NN
/// training, the four analysis views, PAD on the learned representations,
/// and result emission, all under one master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoonsPipelineConfig {
    pub moons: MoonsConfig,
    pub hidden: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub grid_steps: usize,
    pub seed: u64,
}

impl Default for MoonsPipelineConfig {
    fn default() -> Self {
        MoonsPipelineConfig {
            moons: MoonsConfig::default(),
            hidden: 15,
            lambda: 6.0,
            alpha: 1e-3,
            max_epochs: 2000,
            patience: 100,
            grid_steps: 300,
            seed: 0,
        }
    }
}

/// Headline numbers from a pipeline run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoonsSummary {
    pub dann_target_error: f64,
    pub nn_target_error: f64,
    pub pad_raw: f64,
    pub pad_nn: f64,
    pub pad_dann: f64,
}

fn write_model_outputs(
    dir: &Path,
    params: &net::DannParams,
    cfg: &TrainConfig,
    report: &net::TrainReport,
    source: &LabeledSet,
    target: &UnlabeledSet,
    region: analysis::Region,
    grid_steps: usize,
) -> Result<()> {
    std::fs::create_dir_all(dir.join("grids"))?;
    ModelDocument::from_parts(params, cfg, report).save(&dir.join("model.json"))?;

    let label_grid = analysis::label_boundary_grid(params, region, grid_steps)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("grids/label.csv"))?);
    analysis::write_grid_csv(&label_grid, &mut f)?;
    let domain_grid = analysis::domain_boundary_grid(params, region, grid_steps)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("grids/domain.csv"))?);
    analysis::write_grid_csv(&domain_grid, &mut f)?;

    let pca = analysis::pca_embed(params, source, target)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("pca.csv"))?);
    analysis::write_pca_csv(&pca, &mut f)?;

    let lines = analysis::hidden_level_sets(params)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("levelsets.csv"))?);
    analysis::write_levelsets_csv(&lines, &mut f)?;
    Ok(())
}

/// Writes `x1,x2,label,domain` for both samples (target rows carry their
/// generating labels and domain 0).
fn write_moons_csv(source: &LabeledSet, truth: &LabeledSet, path: &Path) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "x1,x2,label,domain")?;
    let coords = |x: &SparseVec| {
        let d = x.to_dense();
        (d.get(0), d.get(1))
    };
    for (x, y) in &source.examples {
        let (a, b) = coords(x);
        writeln!(out, "{a},{b},{y},1")?;
    }
    for (x, y) in &truth.examples {
        let (a, b) = coords(x);
        writeln!(out, "{a},{b},{y},0")?;
    }
    Ok(())
}

/// Generates the rotated-moons problem, trains DANN and the
/// regressor-instrumented plain network at the same settings, and emits
/// data files, models, all four analysis views per model, PAD values for
/// the raw/NN/DANN representations, and the result rows. Byte-identical
/// across runs with the same config.
pub fn run_moons_pipeline(cfg: &MoonsPipelineConfig, out_dir: &Path) -> Result<MoonsSummary> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(
        out_dir.join("config.resolved.json"),
        serde_json::to_string_pretty(cfg)?,
    )?;

    let moons = MoonsConfig { seed: Rng::new(cfg.seed).derive_seed(TAG_TASK), ..cfg.moons.clone() };
    let (source, target, truth) = gen_moons(&moons)?;
    save_sparse_labeled(&source, &out_dir.join("s.sparse"))?;
    save_sparse_unlabeled(&target, &out_dir.join("t.sparse"))?;
    save_sparse_labeled(&truth, &out_dir.join("t_truth.sparse"))?;
    write_moons_csv(&source, &truth, &out_dir.join("moons.csv"))?;

    let train_seed = Rng::new(cfg.seed).derive_seed(TAG_CELL);
    let mut dann_cfg = TrainConfig::new(cfg.hidden, cfg.lambda, cfg.alpha, train_seed, TrainMode::Dann);
    dann_cfg.max_epochs = cfg.max_epochs;
    dann_cfg.patience = cfg.patience;
    let (dann_params, dann_report) = net::train(&source, Some(&target), &dann_cfg)?;

    let mut nn_cfg =
        TrainConfig::new(cfg.hidden, cfg.lambda, cfg.alpha, train_seed, TrainMode::NnWithRegressor);
    nn_cfg.max_epochs = cfg.max_epochs;
    nn_cfg.patience = cfg.patience;
    let (nn_params, nn_report) = net::train(&source, Some(&target), &nn_cfg)?;

    let mut points: Vec<[f64; 2]> = Vec::new();
    for (x, _) in source.examples.iter().chain(&truth.examples) {
        let d = x.to_dense();
        points.push([d.get(0), d.get(1)]);
    }
    let region = analysis::Region::bounding(&points, 0.2)?;

    write_model_outputs(
        &out_dir.join("dann"),
        &dann_params,
        &dann_cfg,
        &dann_report,
        &source,
        &target,
        region,
        cfg.grid_steps,
    )?;
    write_model_outputs(
        &out_dir.join("nn"),
        &nn_params,
        &nn_cfg,
        &nn_report,
        &source,
        &target,
        region,
        cfg.grid_steps,
    )?;

    let dann_target_error = net::risk(&dann_params, &truth)?;
    let nn_target_error = net::risk(&nn_params, &truth)?;

    let pad_seed = Rng::new(cfg.seed).derive_seed(TAG_PAD);
    let s_feats = source.features();
    let t_feats = target.examples.clone();
    let c_grid = default_c_grid();
    let pad_raw = compute_pad(&s_feats, &t_feats, &c_grid, pad_seed, "raw")?;
    let pad_nn =
        divergence::pad_on_representation(&nn_params, &s_feats, &t_feats, &c_grid, pad_seed, "nn")?;
    let pad_dann = divergence::pad_on_representation(
        &dann_params,
        &s_feats,
        &t_feats,
        &c_grid,
        pad_seed,
        "dann",
    )?;
    let pad_rows = vec![
        ("moons".to_string(), pad_raw.clone()),
        ("moons".to_string(), pad_nn.clone()),
        ("moons".to_string(), pad_dann.clone()),
    ];
    std::fs::write(out_dir.join("pad.csv"), pad_to_csv(&pad_rows))?;

    let rows = vec![
        ResultRow {
            task: "moons".into(),
            algorithm: "dann".into(),
            representation: "raw".into(),
            hidden: Some(cfg.hidden),
            lambda: Some(cfg.lambda),
            c_param: None,
            val_risk: dann_report.best_val_risk,
            test_risk: dann_target_error,
            seed: cfg.seed,
        },
        ResultRow {
            task: "moons".into(),
            algorithm: "nn".into(),
            representation: "raw".into(),
            hidden: Some(cfg.hidden),
            lambda: None,
            c_param: None,
            val_risk: nn_report.best_val_risk,
            test_risk: nn_target_error,
            seed: cfg.seed,
        },
    ];
    std::fs::write(out_dir.join("results.csv"), results_to_csv(&rows))?;

    Ok(MoonsSummary {
        dann_target_error,
        nn_target_error,
        pad_raw: pad_raw.pad_value,
        pad_nn: pad_nn.pad_value,
        pad_dann: pad_dann.pad_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ShiftTaskConfig;

    #[test]
    fn parallel_map_orders_results() {
        let out = parallel_map(100, 4, |i| i * i);
        for (i, v) in out.iter().enumerate() {
            assert_eq!(*v, i * i);
        }
        let empty: Vec<usize> = parallel_map(0, 4, |i| i);
        assert!(empty.is_empty());
    }

    #[test]
    fn csv_roundtrip_and_fixed_columns() {
        let rows = vec![
            ResultRow {
                task: "moons".into(),
                algorithm: "dann".into(),
                representation: "raw".into(),
                hidden: Some(15),
                lambda: Some(6.0),
                c_param: None,
                val_risk: 0.03,
                test_risk: 0.012345,
                seed: 7,
            },
            ResultRow {
                task: "a->b".into(),
                algorithm: "svm".into(),
                representation: "msda".into(),
                hidden: None,
                lambda: None,
                c_param: Some(0.001),
                val_risk: 0.21,
                test_risk: 0.2,
                seed: 0,
            },
        ];
        let csv = results_to_csv(&rows);
        assert!(csv.starts_with("task,algo,repr,l,lambda,C,val_risk,test_risk,seed\n"));
        let parsed = parse_results_csv(&csv).unwrap();
        assert_eq!(parsed, rows);

        // Header-only output for zero rows parses to zero rows.
        let empty = results_to_csv(&[]);
        assert_eq!(empty.lines().count(), 1);
        assert!(parse_results_csv(&empty).unwrap().is_empty());

        // Bit stability.
        assert_eq!(csv, results_to_csv(&rows));
    }

    #[test]
    fn table_renders_one_line_per_task() {
        let rows = vec![
            ResultRow {
                task: "books->dvd".into(),
                algorithm: "dann".into(),
                representation: "raw".into(),
                hidden: Some(25),
                lambda: Some(0.1),
                c_param: None,
                val_risk: 0.2,
                test_risk: 0.201,
                seed: 0,
            },
            ResultRow {
                task: "books->dvd".into(),
                algorithm: "nn".into(),
                representation: "raw".into(),
                hidden: Some(50),
                lambda: None,
                c_param: None,
                val_risk: 0.22,
                test_risk: 0.199,
                seed: 0,
            },
        ];
        let table = render_table(&rows);
        assert!(table.contains("books->dvd"));
        assert!(table.contains("dann/raw"));
        assert!(table.contains("0.201"));
        assert_eq!(table.lines().count(), 2);
    }

    fn tiny_moons_config() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(vec![TaskSpec::Moons {
            moons: MoonsConfig { n_per_moon: 30, ..MoonsConfig::default() },
        }]);
        cfg.val_target = 20;
        cfg.lambda_grid = vec![1.0];
        cfg.hidden_grid = vec![4];
        cfg.c_grid = vec![0.1, 1.0];
        cfg.max_epochs = 30;
        cfg.patience = 30;
        cfg
    }

    #[test]
    fn grid_runs_and_is_deterministic_across_jobs() {
        let cfg = tiny_moons_config();
        let a = run_grid(&cfg).unwrap();
        let mut cfg_jobs = cfg.clone();
        cfg_jobs.jobs = 3;
        let b = run_grid(&cfg_jobs).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.cells, b.cells);
        assert_eq!(a.rows.len(), 3); // dann, nn, svm
        for row in &a.rows {
            assert!((0.0..=1.0).contains(&row.val_risk));
            assert!((0.0..=1.0).contains(&row.test_risk));
        }
        // Selection is the argmin of the logged validation risks.
        for row in &a.rows {
            let min = a
                .cells
                .iter()
                .filter(|c| c.algorithm == row.algorithm && c.status == "ok")
                .filter_map(|c| c.val_risk)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(row.val_risk, min);
        }
    }

    #[test]
    fn nn_algorithm_equals_dann_at_lambda_zero() {
        let mut cfg = tiny_moons_config();
        cfg.algorithms = vec![Algorithm::Dann];
        cfg.lambda_grid = vec![0.0];
        let dann_rows = run_grid(&cfg).unwrap().rows;

        let mut cfg_nn = tiny_moons_config();
        cfg_nn.algorithms = vec![Algorithm::Nn];
        let nn_rows = run_grid(&cfg_nn).unwrap().rows;

        assert_eq!(dann_rows[0].val_risk, nn_rows[0].val_risk);
        assert_eq!(dann_rows[0].test_risk, nn_rows[0].test_risk);
    }

    #[test]
    fn pad_sweep_handles_empty_and_moons() {
        let mut cfg = tiny_moons_config();
        cfg.pad_hidden = 8;
        cfg.max_epochs = 20;
        cfg.patience = 20;
        let reports = run_pad_sweep(&cfg).unwrap();
        let tags: Vec<&str> = reports.iter().map(|(_, r)| r.representation_tag.as_str()).collect();
        assert_eq!(tags, vec!["raw", "nn", "dann"]);
        for (_, r) in &reports {
            assert!(r.pad_value <= 2.0 && r.pad_value >= -2.0);
            r.validate().unwrap();
        }
        let csv = pad_to_csv(&reports);
        assert!(csv.starts_with("representation_tag,task,pad\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn moons_pipeline_writes_contracted_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = MoonsPipelineConfig {
            moons: MoonsConfig { n_per_moon: 25, ..MoonsConfig::default() },
            hidden: 6,
            lambda: 2.0,
            alpha: 5e-3,
            max_epochs: 40,
            patience: 40,
            grid_steps: 12,
            seed: 1,
        };
        let summary = run_moons_pipeline(&cfg, dir.path()).unwrap();
        for name in [
            "config.resolved.json",
            "s.sparse",
            "t.sparse",
            "t_truth.sparse",
            "moons.csv",
            "pad.csv",
            "results.csv",
            "dann/model.json",
            "dann/pca.csv",
            "dann/levelsets.csv",
            "dann/grids/label.csv",
            "dann/grids/domain.csv",
            "nn/model.json",
            "nn/pca.csv",
            "nn/levelsets.csv",
            "nn/grids/label.csv",
            "nn/grids/domain.csv",
        ] {
            assert!(dir.path().join(name).exists(), "missing {name}");
        }
        assert!((0.0..=1.0).contains(&summary.dann_target_error));
        let results = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
        assert_eq!(parse_results_csv(&results).unwrap().len(), 2);
    }

    #[test]
    fn shift_task_feeds_the_grid() {
        // Small end-to-end smoke: generated sparse pools, written to disk,
        // consumed through the sparse task spec.
        let dir = tempfile::tempdir().unwrap();
        let (s, t) = crate::data::gen_shift_task(&ShiftTaskConfig {
            dim: 500,
            n_source: 60,
            n_target: 120,
            ..ShiftTaskConfig::default()
        })
        .unwrap();
        let sp = dir.path().join("s.sparse");
        let tp = dir.path().join("t.sparse");
        save_sparse_labeled(&s, &sp).unwrap();
        save_sparse_labeled(&t, &tp).unwrap();

        let mut cfg = ExperimentConfig::new(vec![TaskSpec::Sparse { source: sp, target: tp }]);
        cfg.algorithms = vec![Algorithm::Svm];
        cfg.c_grid = vec![1.0];
        cfg.m = 50;
        cfg.m_prime = 40;
        cfg.val_target = 30;
        let out = run_grid(&cfg).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert_eq!(out.rows[0].task, "s->t");
    }
}
