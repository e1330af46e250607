//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use licds_core::codec::{self, QuantizationSpec};
use licds_core::learn::{fit_gp, fit_gp_grid, make_dataset, train_mlp, GpHyper, MlpConfig};
use licds_core::systems::quadrotor_with_inertia;
use licds_core::{
    get_system, l2_distance, licds, rk4, sample_em, Complexity, Dynamics, Lambda, LicdsParams,
    SystemSpec, Trajectory,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::io;
use crate::json::{self, BitsJson, LicdsResultJson, Model, ModelFile, ModelJson};
use crate::parallel;
use crate::suite;

#[derive(Debug, Parser)]
#[command(name = "licds", version, about = "Local information criterion for dynamical systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a builtin system and write its trajectory as CSV.
    Simulate(SimulateArgs),
    /// Find the cheapest local encoding of a trajectory.
    Encode(EncodeArgs),
    /// Reconstruct the trajectory carried by a `.licd` message.
    Decode(DecodeArgs),
    /// Train an MLP or fit a GP on noisy trajectories of a builtin system.
    Learn(LearnArgs),
    /// Rank learned models by their average encoding cost.
    Select(SelectArgs),
    /// Numerical checks of the error-transfer inequalities.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    /// Builtin system name.
    #[arg(long)]
    pub system: Option<String>,
    /// Quadrotor principal inertias `Ix,Iy,Iz`.
    #[arg(long, value_delimiter = ',', num_args = 3, allow_hyphen_values = true)]
    pub inertia: Option<Vec<f64>>,
}

impl SystemArgs {
    fn resolve(&self) -> Result<Option<SystemSpec>, CliError> {
        let Some(name) = &self.system else {
            if self.inertia.is_some() {
                return Err(CliError::Config("--inertia needs --system quadrotor".into()));
            }
            return Ok(None);
        };
        match &self.inertia {
            None => Ok(Some(get_system(name)?)),
            Some(i) if name == "quadrotor" => {
                if i.iter().any(|v| !(*v > 0.0)) {
                    return Err(CliError::Config("inertias must be positive".into()));
                }
                Ok(Some(quadrotor_with_inertia([i[0], i[1], i[2]])))
            }
            Some(_) => Err(CliError::Config("--inertia only applies to the quadrotor".into())),
        }
    }

    fn require(&self) -> Result<SystemSpec, CliError> {
        self.resolve()?
            .ok_or_else(|| CliError::Config("--system is required".into()))
    }
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Complexity weight: a non-negative real or `auto`.
    #[arg(long, default_value = "auto", value_parser = parse_lambda)]
    pub lambda: Lambda,
    #[arg(long = "k-max", default_value_t = 8)]
    pub k_max: usize,
    #[arg(long = "m-max", default_value_t = 5)]
    pub m_max: usize,
    /// `terms`: k monomials; `degree`: all monomials of degree below k.
    #[arg(long, default_value = "terms", value_parser = parse_complexity)]
    pub complexity: Complexity,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Initial state (defaults to the system's).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
    #[arg(long = "T")]
    pub t: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Additive noise intensity; given means Euler-Maruyama, absent means RK4.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Learned model file used as the field instead of a builtin system.
    #[arg(long, conflicts_with = "system")]
    pub model: Option<PathBuf>,
    /// Observed trajectory CSV (default: RK4 rollout of the field).
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
    /// Horizon (defaults to the trajectory's length).
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// Step (defaults to the trajectory's, else 0.01).
    #[arg(long)]
    pub dt: Option<f64>,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long = "state-bits", default_value_t = 16)]
    pub state_bits: u8,
    #[arg(long = "coeff-bits", default_value_t = 16)]
    pub coeff_bits: u8,
    #[arg(long = "coeff-bound", default_value_t = 64.0)]
    pub coeff_bound: f64,
    /// Output directory for result.json, cost_curve.csv,
    /// approx_states.csv and message.licd.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the bit accounting as JSON on stdout.
    #[arg(long = "emit-bits")]
    pub emit_bits: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub message: PathBuf,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct LearnArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Hidden layer widths of an MLP.
    #[arg(long, value_delimiter = ',', conflicts_with = "gp", required_unless_present = "gp")]
    pub arch: Option<Vec<usize>>,
    /// Fit a Gaussian process instead of an MLP.
    #[arg(long)]
    pub gp: bool,
    /// Pick GP hyperparameters on a 3x3x3 grid around the given ones.
    #[arg(long = "gp-grid", requires = "gp")]
    pub gp_grid: bool,
    #[arg(long, default_value_t = 1.0)]
    pub lengthscale: f64,
    #[arg(long = "signal-var", default_value_t = 1.0)]
    pub signal_var: f64,
    #[arg(long = "noise-var", default_value_t = 1e-2)]
    pub noise_var: f64,
    #[arg(long = "n-traj", default_value_t = 10)]
    pub n_traj: usize,
    #[arg(long = "n-samples", default_value_t = 100)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Initial-point box `lo:hi,...` (defaults to the system's domain).
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    pub x0_box: Option<Bounds>,
    /// Noise intensity (defaults to the system's).
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub lr: f64,
    /// Standardize inputs and targets before training.
    #[arg(long)]
    pub normalize: bool,
    /// Model JSON; the loss history goes next to it as `<stem>.loss.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SelectArgs {
    /// Model files (repeat the flag).
    #[arg(long = "model", required = true)]
    pub models: Vec<PathBuf>,
    /// True system: enables the L2 distance column.
    #[command(flatten)]
    pub system: SystemArgs,
    /// Also rank the true system itself.
    #[arg(long = "include-system", requires = "system")]
    pub include_system: bool,
    /// Box for initial points and the distance integral (defaults to the
    /// system's domain).
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    pub x0_box: Option<Bounds>,
    #[arg(long = "n-init", default_value_t = 10)]
    pub n_init: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "T", default_value_t = 2.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Complexity weight shared by all candidates.
    #[arg(long, default_value = "1e-4", value_parser = parse_lambda)]
    pub lambda: Lambda,
    #[arg(long = "k-max", default_value_t = 8)]
    pub k_max: usize,
    #[arg(long = "m-max", default_value_t = 5)]
    pub m_max: usize,
    #[arg(long, default_value = "terms", value_parser = parse_complexity)]
    pub complexity: Complexity,
    /// Grid nodes per axis for the distance integral.
    #[arg(long = "eval-points")]
    pub eval_points: Option<usize>,
    /// Ranking JSON; a CSV with the same stem is written alongside.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest perturbation size; 0 compares the field with itself.
    #[arg(long = "max-eps", default_value_t = 0.2)]
    pub max_eps: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Interval box, one `(lo, hi)` per axis.
pub type Bounds = Vec<(f64, f64)>;

fn parse_lambda(s: &str) -> Result<Lambda, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Lambda::Auto);
    }
    let v: f64 = s.parse().map_err(|_| format!("expected a real or `auto`, got `{s}`"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(Lambda::Fixed(v))
    } else {
        Err(format!("lambda must be finite and non-negative, got {v}"))
    }
}

fn parse_complexity(s: &str) -> Result<Complexity, String> {
    s.parse().map_err(|_| format!("expected `terms` or `degree`, got `{s}`"))
}

fn parse_box(s: &str) -> Result<Bounds, String> {
    s.split(',')
        .map(|part| {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| format!("interval `{part}` is not `lo:hi`"))?;
            let lo: f64 = lo.trim().parse().map_err(|_| format!("bad bound `{lo}`"))?;
            let hi: f64 = hi.trim().parse().map_err(|_| format!("bad bound `{hi}`"))?;
            if lo.is_finite() && hi.is_finite() && lo < hi {
                Ok((lo, hi))
            } else {
                Err(format!("interval `{part}` needs finite lo < hi"))
            }
        })
        .collect()
}

fn lambda_json(l: Lambda) -> Value {
    match l {
        Lambda::Auto => json!("auto"),
        Lambda::Fixed(v) => json!(v),
    }
}

fn write_stdout(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn check_x0(x0: &[f64], dim: usize) -> Result<(), CliError> {
    if x0.len() != dim {
        return Err(CliError::Config(format!(
            "x0 has {} components, the field has {dim}",
            x0.len()
        )));
    }
    Ok(())
}

/// Runs one parsed command, writing any stdout text to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => simulate(&a, out),
        Command::Encode(a) => encode(&a, out),
        Command::Decode(a) => decode(&a, out),
        Command::Learn(a) => learn(&a, out),
        Command::Select(a) => select(&a, out),
        Command::Check(a) => check(&a, out),
    }
}

pub fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let sys = a.system.require()?;
    let x0 = a.x0.clone().unwrap_or_else(|| sys.default_x0.clone());
    check_x0(&x0, sys.dim())?;
    let traj = match a.sigma {
        None => rk4(sys.dynamics.as_ref(), &x0, 0.0, a.t, a.dt)?,
        Some(sigma) => sample_em(sys.dynamics.as_ref(), &x0, a.t, a.dt, sigma, a.seed)?,
    };
    match &a.out {
        Some(path) => io::save_trajectory(path, &traj),
        None => io::write_trajectory(&traj, out),
    }
}

/// State bounds padded by a tenth of the observed span on each side.
fn padded_range(traj: &Trajectory) -> Vec<(f64, f64)> {
    (0..traj.dim())
        .map(|d| {
            let (lo, hi) = traj
                .states()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s[d]), hi.max(s[d])));
            let pad = ((hi - lo) * 0.1).max(1e-6 * lo.abs().max(hi.abs())).max(1e-9);
            (lo - pad, hi + pad)
        })
        .collect()
}

pub fn encode(a: &EncodeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let sys = a.system.resolve()?;
    let field: Arc<dyn Dynamics> = match (&sys, &a.model) {
        (Some(s), None) => s.dynamics.clone(),
        (None, Some(path)) => Arc::new(json::load_model(path)?),
        _ => return Err(CliError::Config("give exactly one of --system and --model".into())),
    };
    let truth = match &a.trajectory {
        Some(path) => {
            if a.x0.is_some() {
                return Err(CliError::Config("--x0 conflicts with --trajectory".into()));
            }
            io::load_trajectory(path)?
        }
        None => {
            let x0 = match (&a.x0, &sys) {
                (Some(x0), _) => x0.clone(),
                (None, Some(s)) => s.default_x0.clone(),
                (None, None) => return Err(CliError::Config("--x0 is required with --model".into())),
            };
            check_x0(&x0, field.dim())?;
            let t = a.t.ok_or_else(|| CliError::Config("--T is required without --trajectory".into()))?;
            rk4(field.as_ref(), &x0, 0.0, t, a.dt.unwrap_or(0.01))?
        }
    };
    let dt = a.dt.unwrap_or(truth.dt());
    let t_global = a.t.unwrap_or((truth.len() - 1) as f64 * truth.dt());
    let params = LicdsParams {
        t_global,
        dt,
        lambda: a.search.lambda,
        k_max: a.search.k_max,
        m_max: a.search.m_max,
        complexity: a.search.complexity,
    };
    params.validate()?;
    let result = licds(field.as_ref(), &truth, &params)?;

    let state_bounds = match &sys {
        Some(s) => s.domain_bounds.clone(),
        None => padded_range(&truth),
    };
    let spec = QuantizationSpec {
        state_bits: a.state_bits,
        coeff_bits: a.coeff_bits,
        state_bounds,
        coeff_bound: a.coeff_bound,
    };
    let msg = codec::encode(&result, &spec)?;
    let bits = BitsJson::new(&msg.account(params.k_max), msg.clamped_coeffs);

    let config = json!({
        "command": "encode",
        "system": a.system.system,
        "inertia": a.system.inertia,
        "model": a.model,
        "trajectory": a.trajectory,
        "x0": truth.state(0),
        "T_global": t_global,
        "dt": dt,
        "lambda": lambda_json(a.search.lambda),
        "lambda_resolved": result.lambda,
        "k_max": params.k_max,
        "m_max": params.m_max,
        "complexity": params.complexity.as_str(),
        "state_bits": spec.state_bits,
        "coeff_bits": spec.coeff_bits,
        "coeff_bound": spec.coeff_bound,
        "state_bounds": spec.state_bounds,
    });
    let mut doc = LicdsResultJson::new(&result, config);
    doc.bits = Some(bits.clone());

    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        io::write_file(&dir.join("result.json"), json::to_pretty(&doc).as_bytes())?;
        let rows: Vec<Vec<String>> = result
            .cost_curve
            .iter()
            .map(|c| vec![c.m.to_string(), io::fmt_f64(c.total_cost), c.total_complexity.to_string()])
            .collect();
        io::write_table(io::create(&dir.join("cost_curve.csv"))?, &["m", "L_total", "k_total"], &rows)?;
        io::save_trajectory(&dir.join("approx_states.csv"), &result.approx_states)?;
        io::save_message(&dir.join("message.licd"), &msg)?;
    }
    if a.emit_bits {
        write_stdout(out, &json::to_pretty(&bits))?;
    } else if a.out.is_none() {
        write_stdout(out, &json::to_pretty(&doc))?;
    }
    Ok(())
}

pub fn decode(a: &DecodeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let msg = io::load_message(&a.message)?;
    let traj = codec::decode(&msg)?;
    match &a.out {
        Some(path) => io::save_trajectory(path, &traj),
        None => io::write_trajectory(&traj, out),
    }
}

/// `model.json` -> `model.loss.csv`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

pub fn learn(a: &LearnArgs, _out: &mut dyn Write) -> Result<(), CliError> {
    let mut sys = a.system.require()?;
    if let Some(sigma) = a.sigma {
        sys.noise_sigma = sigma;
    }
    let x0_box = a.x0_box.clone().unwrap_or_else(|| sys.domain_bounds.clone());
    let data = make_dataset(&sys, a.n_traj, a.n_samples, a.dt, a.seed, &x0_box)?;
    let mut config = json!({
        "command": "learn",
        "system": sys.name,
        "inertia": a.system.inertia,
        "n_traj": a.n_traj,
        "n_samples": a.n_samples,
        "dt": a.dt,
        "box": x0_box,
        "sigma": sys.noise_sigma,
        "seed": a.seed,
        "pairs": data.len(),
        "trajectories_kept": data.trajectories.len(),
    });
    let (model, losses): (ModelJson, Option<Vec<f64>>) = if a.gp {
        let hyper = GpHyper {
            lengthscale: a.lengthscale,
            signal_var: a.signal_var,
            noise_var: a.noise_var,
        };
        let gp = if a.gp_grid { fit_gp_grid(&data, hyper)? } else { fit_gp(&data, hyper)? };
        config["gp"] = json!({
            "grid": a.gp_grid,
            "lengthscale": gp.hyper.lengthscale,
            "signal_var": gp.hyper.signal_var,
            "noise_var": gp.hyper.noise_var,
        });
        ((&gp).into(), None)
    } else {
        let cfg = MlpConfig {
            layer_sizes: a.arch.clone().unwrap_or_default(),
            epochs: a.epochs,
            lr: a.lr,
            seed: a.seed,
            normalize: a.normalize,
        };
        let trained = train_mlp(&data, &cfg)?;
        config["mlp"] = json!({
            "arch": cfg.layer_sizes,
            "epochs": cfg.epochs,
            "lr": cfg.lr,
            "normalize": cfg.normalize,
        });
        ((&trained.model).into(), Some(trained.loss_history))
    };
    let file = ModelFile { config, model };
    io::write_file(&a.out, json::to_pretty(&file).as_bytes())?;
    if let Some(losses) = losses {
        let rows: Vec<Vec<String>> = losses
            .iter()
            .enumerate()
            .map(|(e, l)| vec![(e + 1).to_string(), io::fmt_f64(*l)])
            .collect();
        io::write_table(io::create(&sibling(&a.out, "loss.csv"))?, &["epoch", "loss"], &rows)?;
    }
    Ok(())
}

/// Uniform draws from `bounds`, seeded.
pub fn sample_points(bounds: &[(f64, f64)], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axes: Vec<Uniform<f64>> = bounds
        .iter()
        .map(|&(lo, hi)| Uniform::new(lo, hi).expect("box validated"))
        .collect();
    (0..count)
        .map(|_| axes.iter().map(|u| u.sample(&mut rng)).collect())
        .collect()
}

/// Nodes per axis keeping the tensor grid near 10^5 points (601 in 1-D).
pub fn default_eval_points(dim: usize) -> usize {
    let n = (1e5f64).powf(1.0 / dim as f64).floor() as usize;
    n.clamp(2, 601)
}

#[derive(Debug, Clone, Serialize)]
pub struct RankRow {
    pub rank: usize,
    pub name: String,
    pub score: f64,
    pub points_scored: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub true_l2: Option<f64>,
}

pub fn select(a: &SelectArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let sys = a.system.resolve()?;
    let models: Vec<(String, Model)> = a
        .models
        .iter()
        .map(|p| Ok((p.display().to_string(), json::load_model(p)?)))
        .collect::<Result<_, CliError>>()?;
    let dim = models[0].1.dim();
    if let Some((name, m)) = models.iter().find(|(_, m)| m.dim() != dim) {
        return Err(CliError::Config(format!("{name} has dimension {}, expected {dim}", m.dim())));
    }
    if let Some(s) = &sys {
        if s.dim() != dim {
            return Err(CliError::Config(format!("system has dimension {}, models {dim}", s.dim())));
        }
    }
    let bounds = match (&a.x0_box, &sys) {
        (Some(b), _) => b.clone(),
        (None, Some(s)) => s.domain_bounds.clone(),
        (None, None) => return Err(CliError::Config("--box is required without --system".into())),
    };
    if bounds.len() != dim {
        return Err(CliError::Config(format!("box has {} intervals, models have dimension {dim}", bounds.len())));
    }
    let params = LicdsParams {
        t_global: a.t,
        dt: a.dt,
        lambda: a.lambda,
        k_max: a.k_max,
        m_max: a.m_max,
        complexity: a.complexity,
    };
    params.validate()?;
    let points = sample_points(&bounds, a.n_init, a.seed);

    let mut candidates: Vec<(String, &dyn Dynamics)> =
        models.iter().map(|(n, m)| (n.clone(), m as &dyn Dynamics)).collect();
    if a.include_system {
        let s = sys.as_ref().expect("clap requires --system");
        candidates.push((format!("system:{}", s.name), s.dynamics.as_ref()));
    }
    let pool = parallel::pool()?;
    let scores = pool.install(|| parallel::score_models(&candidates, &points, &params))?;
    let per_axis = a.eval_points.unwrap_or_else(|| default_eval_points(dim));
    let mut rows: Vec<RankRow> = candidates
        .iter()
        .zip(&scores)
        .map(|((name, f), s)| RankRow {
            rank: 0,
            name: name.clone(),
            score: s.mean_cost,
            points_scored: s.successes(),
            true_l2: sys
                .as_ref()
                .map(|t| l2_distance(t.dynamics.as_ref(), *f, &bounds, per_axis)),
        })
        .collect();
    rows.sort_by(|x, y| x.score.total_cmp(&y.score).then_with(|| x.name.cmp(&y.name)));
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    let doc = json!({
        "config": {
            "command": "select",
            "models": a.models,
            "system": a.system.system,
            "inertia": a.system.inertia,
            "include_system": a.include_system,
            "box": bounds,
            "n_init": a.n_init,
            "seed": a.seed,
            "init_points": points,
            "T_global": a.t,
            "dt": a.dt,
            "lambda": lambda_json(a.lambda),
            "k_max": a.k_max,
            "m_max": a.m_max,
            "complexity": a.complexity.as_str(),
            "eval_points": per_axis,
        },
        "ranking": rows,
    });
    let text = json::to_pretty(&doc);
    if let Some(path) = &a.out {
        io::write_file(path, text.as_bytes())?;
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.rank.to_string(),
                    r.name.clone(),
                    io::fmt_f64(r.score),
                    r.points_scored.to_string(),
                    r.true_l2.map(io::fmt_f64).unwrap_or_default(),
                ]
            })
            .collect();
        io::write_table(
            io::create(&sibling(path, "csv"))?,
            &["rank", "name", "score", "points_scored", "true_l2"],
            &table,
        )?;
    }
    write_stdout(out, &text)
}

pub fn check(a: &CheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let t1 = suite::theorem1_suite(a.instances, a.seed, a.max_eps, a.dt)?;
    let t2 = suite::theorem2_family(a.seed, a.max_eps, a.dt)?;
    let doc = json!({
        "config": {
            "command": "check",
            "instances": a.instances,
            "seed": a.seed,
            "max_eps": a.max_eps,
            "dt": a.dt,
            "field": "tanh",
        },
        "theorem1": t1,
        "theorem2": { "rows": t2 },
    });
    let text = json::to_pretty(&doc);
    if let Some(path) = &a.out {
        io::write_file(path, text.as_bytes())?;
    }
    write_stdout(out, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lambda_and_box() {
        assert_eq!(parse_lambda("auto"), Ok(Lambda::Auto));
        assert_eq!(parse_lambda("0.5"), Ok(Lambda::Fixed(0.5)));
        assert!(parse_lambda("-1").is_err());
        assert_eq!(parse_box("-3:3,0:1.5"), Ok(vec![(-3.0, 3.0), (0.0, 1.5)]));
        assert!(parse_box("1:1").is_err());
    }

    #[test]
    fn eval_grid_sizes() {
        assert_eq!(default_eval_points(1), 601);
        assert_eq!(default_eval_points(3), 46);
        assert_eq!(default_eval_points(8), 4);
    }

    #[test]
    fn negative_x0_parses() {
        let cli = Cli::try_parse_from(["licds", "simulate", "--system", "pendulum", "--x0", "-2,-3", "--T", "1"]).unwrap();
        let Command::Simulate(a) = cli.command else { panic!() };
        assert_eq!(a.x0, Some(vec![-2.0, -3.0]));
    }
}
