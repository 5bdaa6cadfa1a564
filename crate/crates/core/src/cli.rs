use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::acceptance::{self, CRITERIA};
use crate::capacity::{capacity_condition, orlicz_capacity, CapacityProblem, Integrand, SetSpec};
use crate::error::{Error, Result};
use crate::estimate::{excess_decay_probe, verify_two_sided, VerifyOptions};
use crate::grid::{Exterior, Lattice};
use crate::io::{num, write_csv, write_grid_csv, write_report};
use crate::potential::{ConvolutionKernel, PotentialKind, PotentialQuery};
use crate::solver::{lane_emden_exponential, lane_emden_power, sola_solve, DirichletSolver, LaneEmdenConfig, SolveConfig};
use crate::{KernelSpec, Measure, Params, ReactionSpec};

/// Overrides the output directory, below `--out` and above the config.
pub const OUT_ENV: &str = "WOLFFLAB_OUT";

#[derive(Debug, Parser)]
#[command(name = "wolfflab", version, about = "Nonlinear potentials and nonlocal measure-data experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for independent sub-experiments.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Wolff, Riesz or fractional maximal potentials at points.
    Potential,
    /// Dirichlet problem with measure data.
    Solve,
    /// Solutions obtained as limits of approximations.
    Sola,
    /// Monotone Lane-Emden iteration.
    LaneEmden,
    /// Two-sided potential bounds and excess decay of a solution.
    Verify,
    /// Orlicz capacities of test sets and the capacity condition.
    Capacity,
    /// The full numerical acceptance battery.
    Acceptance,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Potential => "potential",
            Command::Solve => "solve",
            Command::Sola => "sola",
            Command::LaneEmden => "lane-emden",
            Command::Verify => "verify",
            Command::Capacity => "capacity",
            Command::Acceptance => "acceptance",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub h: f64,
    #[serde(default = "default_collar")]
    pub collar: usize,
}

fn default_collar() -> usize {
    2
}

/// A measure file path, or the measure itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureSource {
    Path(PathBuf),
    Inline(Measure),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    /// Defaults to `s` for Wolff and `sp` otherwise.
    #[serde(default)]
    pub s_order: Option<f64>,
    /// Truncation radius; absent means infinity.
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub eta: f64,
    /// Evaluation points; defaults to the interior lattice nodes.
    #[serde(default)]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolaConfig {
    pub schedule: Vec<u32>,
    pub q: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaneEmdenBlock {
    pub reaction: ReactionSpec,
    /// Smallness level of the interior indicator added to the data in the
    /// exponential bound.
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub c0_emp: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub x0: Vec<f64>,
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default)]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub exclusion: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub decay: Option<DecayConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum IntegrandConfig {
    Power(f64),
    Conjugate { reaction: ReactionSpec, t_max: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityConfig {
    pub kernel: ConvolutionKernel,
    pub integrand: IntegrandConfig,
    pub sets: SetSpec,
    #[serde(default = "default_cells_per_radius")]
    pub cells_per_radius: usize,
    #[serde(default = "default_capacity_tol")]
    pub tol: f64,
    /// With a measure, check `μ(K) <= δ Cap(K)` on every set.
    #[serde(default)]
    pub delta: Option<f64>,
}

fn default_cells_per_radius() -> usize {
    4
}

fn default_capacity_tol() -> f64 {
    1e-4
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceConfig {
    /// Criterion ids to run; all when absent.
    #[serde(default)]
    pub criteria: Option<Vec<u8>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub params: Option<Params>,
    #[serde(default)]
    pub measure: Option<MeasureSource>,
    #[serde(default)]
    pub lattice: Option<LatticeConfig>,
    /// Constant exterior datum.
    #[serde(default)]
    pub exterior: f64,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub potential: Option<PotentialConfig>,
    #[serde(default)]
    pub sola: Option<SolaConfig>,
    #[serde(default)]
    pub lane_emden: Option<LaneEmdenBlock>,
    #[serde(default)]
    pub verify: Option<VerifyConfig>,
    #[serde(default)]
    pub capacity: Option<CapacityConfig>,
    #[serde(default)]
    pub acceptance: Option<AcceptanceConfig>,
}

fn default_seed() -> u64 {
    acceptance::DEFAULT_SEED
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    /// Parses a config file. Relative measure paths are resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        if let Some(MeasureSource::Path(p)) = &mut cfg.measure {
            if p.is_relative() {
                *p = path.parent().unwrap_or(Path::new(".")).join(&*p);
            }
            if !p.exists() {
                return Err(config_err(format!("measure file {} does not exist", p.display())));
            }
        }
        cfg.solve.validate()?;
        Ok(cfg)
    }

    fn params(&self) -> Result<Params> {
        self.params.ok_or_else(|| config_err("missing \"params\" block"))
    }

    fn measure(&self) -> Result<Measure> {
        match &self.measure {
            None => Ok(Measure::zero()),
            Some(MeasureSource::Inline(m)) => Ok(m.clone()),
            Some(MeasureSource::Path(p)) => Measure::load(p),
        }
    }

    fn lattice(&self) -> Result<Arc<Lattice>> {
        let l = self.lattice.as_ref().ok_or_else(|| config_err("missing \"lattice\" block"))?;
        Ok(Arc::new(Lattice::build(&l.lo, &l.hi, l.h, l.collar)?))
    }

    fn solver(&self) -> Result<DirichletSolver> {
        let prm = self.params()?;
        let lat = self.lattice()?;
        if lat.n() != prm.n() {
            return Err(config_err(format!("lattice dimension {} differs from params n = {}", lat.n(), prm.n())));
        }
        DirichletSolver::new(lat, KernelSpec::fractional_p_laplacian(prm))
    }

    fn block<'a, T>(&self, b: &'a Option<T>, name: &str) -> Result<&'a T> {
        b.as_ref().ok_or_else(|| config_err(format!("missing \"{name}\" block")))
    }
}

/// Output directory: `--out`, then the environment, then the config, then `out`.
pub fn output_dir(flag: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    cfg.output.clone().unwrap_or_else(|| PathBuf::from("out"))
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    /// `false` when the run completed but an acceptance criterion failed.
    pub passed: bool,
}

/// Runs one experiment and writes its artifacts under `<out>/<experiment>/`.
pub fn run(cmd: Command, config: &Path, jobs: Option<usize>, out: Option<&Path>) -> Result<RunSummary> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(name) = &cfg.experiment {
        if name != cmd.name() {
            return Err(config_err(format!("config is for experiment \"{name}\", not \"{}\"", cmd.name())));
        }
    }
    cfg.experiment = Some(cmd.name().to_string());
    let root = output_dir(out, &cfg);
    cfg.output = Some(root.clone());
    let dir = root.join(cmd.name());
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(config_err("--jobs must be positive"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| config_err(e.to_string()))?;
    pool.install(|| match cmd {
        Command::Potential => run_potential(&cfg, &dir),
        Command::Solve => run_solve(&cfg, &dir),
        Command::Sola => run_sola(&cfg, &dir),
        Command::LaneEmden => run_lane_emden(&cfg, &dir),
        Command::Verify => run_verify(&cfg, &dir),
        Command::Capacity => run_capacity(&cfg, &dir),
        Command::Acceptance => run_acceptance(&cfg, &dir),
    })
}

fn done(dir: &Path, files: Vec<PathBuf>) -> Result<RunSummary> {
    Ok(RunSummary { dir: dir.to_path_buf(), files, passed: true })
}

fn run_potential(cfg: &ExperimentConfig, dir: &Path) -> Result<RunSummary> {
    let prm = cfg.params()?;
    let pc = cfg.block(&cfg.potential, "potential")?;
    let m = cfg.measure()?;
    let points = match &pc.points {
        Some(p) => p.clone(),
        None => {
            let lat = cfg.lattice()?;
            lat.interior_nodes().iter().map(|&i| lat.coords(i)).collect()
        }
    };
    let s_order = pc.s_order.unwrap_or(match pc.kind {
        PotentialKind::Wolff => prm.s(),
        _ => prm.sp(),
    });
    let values: Vec<f64> = points
        .par_iter()
        .map(|x| PotentialQuery { kind: pc.kind, x: x.clone(), t: pc.t, s_order, eta: pc.eta }.eval(&m, &prm, pc.tol))
        .collect::<Result<_>>()?;
    let n = points.first().map_or(prm.n(), Vec::len);
    let mut header = vec!["point".to_string()];
    header.extend((0..n).map(|k| format!("x{k}")));
    header.push("value".into());
    let rows = points.iter().zip(&values).enumerate().map(|(i, (x, v))| {
        let mut row = vec![i.to_string()];
        row.extend(x.iter().copied().map(num));
        row.push(num(*v));
        row
    });
    let csv = dir.join("potential.csv");
    write_csv(&csv, &header, rows)?;
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let result = json!({
        "points": values.len(),
        "s_order": s_order,
        "infinite": values.len() - finite.len(),
        "min": finite.iter().copied().reduce(f64::min),
        "max": finite.iter().copied().reduce(f64::max),
    });
    let report = dir.join("report.json");
    write_report(&report, "potential", cfg, &result)?;
    done(dir, vec![csv, report])
}

fn run_solve(cfg: &ExperimentConfig, dir: &Path) -> Result<RunSummary> {
    let solver = cfg.solver()?;
    let m = cfg.measure()?;
    let out = solver.solve(&m, &Exterior::Constant(cfg.exterior), &cfg.solve)?;
    let csv = dir.join("solution.csv");
    write_grid_csv(&csv, &[("u", &out.u)])?;
    let result = json!({
        "converged": out.converged,
        "sweeps": out.sweeps,
        "change": out.change,
        "relaxation": out.relaxation,
        "sup_norm": out.u.sup_norm_interior(),
        "energy_trace": out.energy_trace,
    });
    let report = dir.join("report.json");
    write_report(&report, "solve", cfg, &result)?;
    if !out.converged {
        return Err(Error::NotConverged(format!("{} sweeps, last change {:e}; partial results in {}", out.sweeps, out.change, dir.display())));
    }
    done(dir, vec![csv, report])
}

fn run_sola(cfg: &ExperimentConfig, dir: &Path) -> Result<RunSummary> {
    let solver = cfg.solver()?;
    let sc = cfg.block(&cfg.sola, "sola")?;
    let m = cfg.measure()?;
    let rep = sola_solve(&m, &solver, &sc.schedule, sc.q, &cfg.solve)?;
    let csv = dir.join("solution.csv");
    write_grid_csv(&csv, &[("u", &rep.u)])?;
    let report = dir.join("report.json");
    write_report(&report, "sola", cfg, &rep)?;
    done(dir, vec![csv, report])
}

fn run_lane_emden(cfg: &ExperimentConfig, dir: &Path) -> Result<RunSummary> {
    let solver = cfg.solver()?;
    let block = cfg.block(&cfg.lane_emden, "lane_emden")?;
    let m = cfg.measure()?;
    let mut le = LaneEmdenConfig { solve: cfg.solve, c0_emp: block.c0_emp, ..Default::default() };
    if let Some(k) = block.max_iterations {
        le.max_iterations = k;
    }
    if let Some(t) = block.tol {
        le.tol = t;
    }
    let rep = match block.reaction {
        ReactionSpec::Power { gamma } => lane_emden_power(&m, gamma, &solver, &le)?,
        ReactionSpec::Exponential { l, a, beta } => lane_emden_exponential(&m, l, a, beta, block.delta, &solver, &le)?,
        ReactionSpec::Zero => return Err(config_err("lane_emden needs a power or exponential reaction")),
    };
    let csv = dir.join("solution.csv");
    write_grid_csv(&csv, &[("u", &rep.u)])?;
    let report = dir.join("report.json");
    write_report(&report, "lane-emden", cfg, &rep)?;
    done(dir, vec![csv, report])
}

fn run_verify(cfg: &ExperimentConfig, dir: &Path) -> Result<RunSummary> {
    let prm = cfg.params()?;
    let solver = cfg.solver()?;
    let vc = cfg.verify.clone().unwrap_or_default();
    let m = cfg.measure()?;
    let out = solver.solve(&m, &Exterior::Constant(cfg.exterior), &cfg.solve)?;
    if !out.converged {
        return Err(Error::NotConverged(format!("solve stopped after {} sweeps", out.sweeps)));
    }
    let opts = VerifyOptions { points: vc.points.clone(), exclusion: vc.exclusion, tol: vc.tol };
    let rep = verify_two_sided(&out.u, &m, &prm, &opts)?;
    let solution = dir.join("solution.csv");
    write_grid_csv(&solution, &[("u", &out.u)])?;
    let ratios = dir.join("ratios.csv");
    let mut header = vec!["node".to_string()];
    header.extend((0..prm.n()).map(|k| format!("x{k}")));
    header.extend(["u", "wolff_lower", "wolff_upper", "lower_ratio", "upper_ratio"].map(String::from));
    let opt = |v: Option<f64>| v.map_or_else(String::new, num);
    let rows = rep.nodes.iter().map(|r| {
        let mut row = vec![r.node.to_string()];
        row.extend(r.x.iter().copied().map(num));
        row.extend([num(r.u), num(r.wolff_lower), num(r.wolff_upper), opt(r.lower_ratio), opt(r.upper_ratio)]);
        row
    });
    write_csv(&ratios, &header, rows)?;
    let decay = match &vc.decay {
        Some(d) => Some(excess_decay_probe(&out.u, &d.x0, &d.radii, &prm)?),
        None => None,
    };
    let result = json!({
        "solve": { "sweeps": out.sweeps, "change": out.change },
        "lower_band": rep.lower_band,
        "upper_band": rep.upper_band,
        "c0_emp": rep.c0_emp,
        "nodes_used": rep.nodes_used,
        "vacuous": rep.vacuous,
        "decay": decay,
    });
    let report = dir.join("report.json");
    write_report(&report, "verify", cfg, &result)?;
    done(dir, vec![solution, ratios, report])
}

fn run_capacity(cfg: &ExperimentConfig, dir: &Path) -> Result<RunSummary> {
    let cc = cfg.block(&cfg.capacity, "capacity")?;
    let sets = cc.sets.sets();
    if sets.is_empty() {
        return Err(config_err("capacity needs at least one ball or box"));
    }
    for set in &sets {
        set.validate()?;
    }
    let integrand = match &cc.integrand {
        IntegrandConfig::Power(q) => Integrand::power(*q)?,
        IntegrandConfig::Conjugate { reaction, t_max } => Integrand::conjugate(*reaction, cfg.params()?, *t_max)?,
    };
    let report = dir.join("report.json");
    if let Some(delta) = cc.delta {
        let m = cfg.measure()?;
        let rep = capacity_condition(&m, cc.kernel, &integrand, &sets, delta, cc.cells_per_radius, cc.tol)?;
        let csv = dir.join("condition.csv");
        let header = ["set", "mass", "capacity", "ratio"].map(String::from);
        let rows = rep.entries.iter().enumerate().map(|(i, e)| vec![i.to_string(), num(e.mass), num(e.capacity), num(e.ratio)]);
        write_csv(&csv, &header, rows)?;
        write_report(&report, "capacity", cfg, &rep)?;
        return done(dir, vec![csv, report]);
    }
    let results = sets
        .par_iter()
        .map(|set| {
            let cp = CapacityProblem::for_set(cc.kernel, integrand.clone(), set, cc.cells_per_radius)?;
            orlicz_capacity(&cp, cc.tol)
        })
        .collect::<Result<Vec<_>>>()?;
    let csv = dir.join("capacities.csv");
    let header = ["set", "capacity", "dual_bound", "iterations", "certified"].map(String::from);
    let rows = results.iter().enumerate().map(|(i, r)| {
        vec![i.to_string(), num(r.value), num(r.dual_bound), r.iterations.to_string(), u8::from(r.certified).to_string()]
    });
    write_csv(&csv, &header, rows)?;
    let entries: Vec<Value> = sets.iter().zip(&results).map(|(s, r)| json!({ "set": s, "result": r })).collect();
    write_report(&report, "capacity", cfg, &entries)?;
    done(dir, vec![csv, report])
}

fn run_acceptance(cfg: &ExperimentConfig, dir: &Path) -> Result<RunSummary> {
    let ids: Vec<u8> = match cfg.acceptance.as_ref().and_then(|a| a.criteria.clone()) {
        Some(ids) => ids,
        None => CRITERIA.iter().map(|c| c.0).collect(),
    };
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(config_err(format!("unknown acceptance criterion {bad}")));
    }
    let outcomes = acceptance::run_all(&ids, cfg.seed);
    let mut files = Vec::new();
    for o in &outcomes {
        println!("{}", o.line());
        let path = dir.join(format!("criterion_{:02}", o.id)).join("report.json");
        write_report(&path, "acceptance", cfg, o)?;
        files.push(path);
    }
    let passed = outcomes.iter().all(|o| o.passed);
    let summary: Vec<Value> =
        outcomes.iter().map(|o| json!({ "id": o.id, "name": o.name, "passed": o.passed, "summary": o.summary })).collect();
    let path = dir.join("summary.json");
    write_report(&path, "acceptance", cfg, &json!({ "passed": passed, "criteria": summary }))?;
    files.push(path);
    Ok(RunSummary { dir: dir.to_path_buf(), files, passed })
}

/// Error JSON printed on standard error.
pub fn error_json(kind: &str, message: &str) -> String {
    json!({ "error": kind, "message": message, "version": crate::io::VERSION }).to_string()
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprintln!("{}", error_json("usage", e.to_string().trim()));
            return 2;
        }
    };
    let Some(config) = cli.config.as_deref() else {
        eprintln!("{}", error_json("usage", "--config <path> is required"));
        return 2;
    };
    match run(cli.command, config, cli.jobs, cli.out.as_deref()) {
        Ok(s) if s.passed => {
            for f in &s.files {
                eprintln!("wrote {}", f.display());
            }
            0
        }
        Ok(s) => {
            eprintln!("{}", error_json("criteria_failed", &format!("see {}", s.dir.join("summary.json").display())));
            1
        }
        Err(e) => {
            eprintln!("{}", error_json(e.kind(), &e.to_string()));
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_and_rejects_unknown_fields() {
        let text = r#"{"params": {"n": 2, "s": 0.5, "p": 2.0}, "lattice": {"lo": [-1, -1], "hi": [1, 1], "h": 0.25},
                      "potential": {"kind": "wolff", "points": [[0.5, 0]]}}"#;
        let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.lattice.as_ref().unwrap().collar, 2);
        assert_eq!(cfg.potential.as_ref().unwrap().tol, 1e-8);
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back.params, cfg.params);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"paramz": {}}"#).is_err());
    }

    #[test]
    fn integrand_forms() {
        let p: IntegrandConfig = serde_json::from_str(r#"{"power": 1.5}"#).unwrap();
        assert!(matches!(p, IntegrandConfig::Power(q) if q == 1.5));
        let c: IntegrandConfig =
            serde_json::from_str(r#"{"conjugate": {"reaction": {"kind": "power", "gamma": 3}, "t_max": 10}}"#).unwrap();
        assert!(matches!(c, IntegrandConfig::Conjugate { .. }));
    }

    #[test]
    fn out_flag_beats_config() {
        let cfg = ExperimentConfig { output: Some("from-config".into()), ..Default::default() };
        assert_eq!(output_dir(Some(Path::new("flag")), &cfg), PathBuf::from("flag"));
    }

    #[test]
    fn usage_errors_exit_nonzero() {
        assert_eq!(main_with(["wolfflab", "solve"]), 2);
        assert_eq!(main_with(["wolfflab", "bogus", "--config", "x.json"]), 2);
        assert_eq!(main_with(["wolfflab", "solve", "--config", "/nonexistent/x.json"]), 1);
    }

    #[test]
    fn help_is_not_an_error() {
        assert_eq!(main_with(["wolfflab", "--help"]), 0);
    }
}
