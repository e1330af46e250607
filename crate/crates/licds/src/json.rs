//! JSON forms of local models, partition results and learned models.

use licds_core::codec::BitAccount;
use licds_core::learn::{fit_gp, Dataset, GpHyper, GpModel, MlpModel};
use licds_core::{Dynamics, Jet, LicdsResult, LocalModel, MonomialBasis};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalModelJson {
    pub dim: usize,
    /// Number of monomials per output component.
    pub k: usize,
    pub working_point: Vec<f64>,
    pub exponents: Vec<Vec<u32>>,
    /// One row of `k` coefficients per output component.
    pub coeffs: Vec<Vec<f64>>,
}

impl From<&LocalModel> for LocalModelJson {
    fn from(m: &LocalModel) -> Self {
        let dim = m.working_point().len();
        LocalModelJson {
            dim,
            k: m.k(),
            working_point: m.working_point().to_vec(),
            exponents: m.basis().exponents().to_vec(),
            coeffs: (0..dim).map(|d| m.coeff_row(d).to_vec()).collect(),
        }
    }
}

impl TryFrom<&LocalModelJson> for LocalModel {
    type Error = CliError;

    fn try_from(j: &LocalModelJson) -> Result<Self, CliError> {
        if j.dim == 0 || j.k == 0 || j.working_point.len() != j.dim {
            return Err(CliError::Config("local model: bad dim, k or working point".into()));
        }
        let basis = MonomialBasis::new(j.dim, j.k);
        if basis.exponents() != j.exponents.as_slice() {
            return Err(CliError::Config(
                "local model: exponents are not the graded-lex basis".into(),
            ));
        }
        if j.coeffs.len() != j.dim || j.coeffs.iter().any(|r| r.len() != j.k) {
            return Err(CliError::Config("local model: coefficient shape mismatch".into()));
        }
        Ok(LocalModel::new(
            j.working_point.clone(),
            basis,
            j.coeffs.concat(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostPointJson {
    pub m: usize,
    /// `null` when some window diverged.
    #[serde(rename = "L_total")]
    pub l_total: Option<f64>,
    pub k_total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionJson {
    pub index: usize,
    pub start: usize,
    pub end: usize,
    pub k_star: usize,
    #[serde(rename = "L_star")]
    pub l_star: f64,
    pub integral: f64,
    pub restart_state: Vec<f64>,
    pub model: LocalModelJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LicdsResultJson {
    pub config: Value,
    pub lambda: f64,
    pub m_star: usize,
    #[serde(rename = "L_total_star")]
    pub l_total_star: f64,
    pub k_total_star: usize,
    pub cost_curve: Vec<CostPointJson>,
    pub partitions: Vec<PartitionJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bits: Option<BitsJson>,
}

impl LicdsResultJson {
    pub fn new(result: &LicdsResult, config: Value) -> Self {
        LicdsResultJson {
            config,
            lambda: result.lambda,
            m_star: result.m_star,
            l_total_star: result.total_cost,
            k_total_star: result.total_complexity,
            cost_curve: result
                .cost_curve
                .iter()
                .map(|c| CostPointJson {
                    m: c.m,
                    l_total: c.total_cost.is_finite().then_some(c.total_cost),
                    k_total: c.total_complexity,
                })
                .collect(),
            partitions: result
                .partitions
                .iter()
                .map(|p| PartitionJson {
                    index: p.window.index,
                    start: p.window.start,
                    end: p.window.end,
                    k_star: p.k_star,
                    l_star: p.cost,
                    integral: p.integral,
                    restart_state: p.restart_state.clone(),
                    model: (&p.model).into(),
                })
                .collect(),
            bits: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitsJson {
    pub total_bits: u64,
    pub header_bits: u64,
    pub payload_bits: u64,
    pub per_partition: Vec<u64>,
    pub kmax_variant_bits: u64,
    pub raw_bits: u64,
    pub compression_ratio: f64,
    pub clamped_coeffs: usize,
}

impl BitsJson {
    pub fn new(acc: &BitAccount, clamped_coeffs: usize) -> Self {
        BitsJson {
            total_bits: acc.total_bits,
            header_bits: acc.header_bits,
            payload_bits: acc.payload_bits,
            per_partition: acc.per_partition.clone(),
            kmax_variant_bits: acc.kmax_variant_bits,
            raw_bits: acc.raw_bits,
            compression_ratio: acc.compression_ratio(),
            clamped_coeffs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpJson {
    pub dim: usize,
    pub layer_sizes: Vec<usize>,
    /// Per layer, `out x in` row-major.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub input_shift: Vec<f64>,
    pub input_scale: Vec<f64>,
    pub output_shift: Vec<f64>,
    pub output_scale: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpJson {
    pub dim: usize,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    pub lengthscale: f64,
    pub signal_var: f64,
    pub noise_var: f64,
    pub jitter: f64,
    pub log_marginal_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelJson {
    Mlp(MlpJson),
    Gp(GpJson),
}

/// A learned model file: the model plus the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub config: Value,
    pub model: ModelJson,
}

/// A learned field loaded from disk.
#[derive(Debug, Clone)]
pub enum Model {
    Mlp(MlpModel),
    Gp(GpModel),
}

impl Dynamics for Model {
    fn dim(&self) -> usize {
        match self {
            Model::Mlp(m) => m.dim(),
            Model::Gp(m) => m.dim(),
        }
    }
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Model::Mlp(m) => m.eval(x, out),
            Model::Gp(m) => m.eval(x, out),
        }
    }
    fn eval_jet(&self, x: &[Jet]) -> Option<Vec<Jet>> {
        match self {
            Model::Mlp(m) => m.eval_jet(x),
            Model::Gp(m) => m.eval_jet(x),
        }
    }
}

fn rows(flat: &[f64], dim: usize) -> Vec<Vec<f64>> {
    flat.chunks_exact(dim).map(<[f64]>::to_vec).collect()
}

impl From<&MlpModel> for ModelJson {
    fn from(m: &MlpModel) -> Self {
        ModelJson::Mlp(MlpJson {
            dim: m.dim,
            layer_sizes: m.layer_sizes.clone(),
            weights: m.weights.clone(),
            biases: m.biases.clone(),
            input_shift: m.input_shift.clone(),
            input_scale: m.input_scale.clone(),
            output_shift: m.output_shift.clone(),
            output_scale: m.output_scale.clone(),
        })
    }
}

impl From<&GpModel> for ModelJson {
    fn from(m: &GpModel) -> Self {
        ModelJson::Gp(GpJson {
            dim: m.dim,
            inputs: rows(&m.inputs, m.dim),
            targets: rows(&m.targets, m.dim),
            lengthscale: m.hyper.lengthscale,
            signal_var: m.hyper.signal_var,
            noise_var: m.hyper.noise_var,
            jitter: m.jitter,
            log_marginal_likelihood: m.log_marginal_likelihood,
        })
    }
}

impl From<&Model> for ModelJson {
    fn from(m: &Model) -> Self {
        match m {
            Model::Mlp(m) => m.into(),
            Model::Gp(m) => m.into(),
        }
    }
}

fn check_mlp(j: &MlpJson) -> Result<(), String> {
    let depth = j.layer_sizes.len() + 1;
    if j.dim == 0 || j.weights.len() != depth || j.biases.len() != depth {
        return Err("layer count mismatch".into());
    }
    let widths: Vec<usize> = std::iter::once(j.dim)
        .chain(j.layer_sizes.iter().copied())
        .chain(std::iter::once(j.dim))
        .collect();
    for l in 0..depth {
        if j.weights[l].len() != widths[l] * widths[l + 1] || j.biases[l].len() != widths[l + 1] {
            return Err(format!("layer {} has the wrong shape", l + 1));
        }
    }
    let stats = [&j.input_shift, &j.input_scale, &j.output_shift, &j.output_scale];
    if stats.iter().any(|s| s.len() != j.dim) {
        return Err("normalization vectors must have length dim".into());
    }
    if j.input_scale.iter().chain(&j.output_scale).any(|s| !(*s > 0.0)) {
        return Err("normalization scales must be positive".into());
    }
    Ok(())
}

impl ModelJson {
    /// Rebuilds the model. A GP is refit from its stored data and
    /// hyperparameters.
    pub fn build(&self) -> Result<Model, CliError> {
        match self {
            ModelJson::Mlp(j) => {
                check_mlp(j).map_err(|e| CliError::Config(format!("mlp model: {e}")))?;
                Ok(Model::Mlp(MlpModel {
                    dim: j.dim,
                    layer_sizes: j.layer_sizes.clone(),
                    weights: j.weights.clone(),
                    biases: j.biases.clone(),
                    input_shift: j.input_shift.clone(),
                    input_scale: j.input_scale.clone(),
                    output_shift: j.output_shift.clone(),
                    output_scale: j.output_scale.clone(),
                }))
            }
            ModelJson::Gp(j) => {
                let shaped = |v: &Vec<Vec<f64>>| v.iter().all(|r| r.len() == j.dim);
                if j.dim == 0 || j.inputs.len() != j.targets.len() || !shaped(&j.inputs) || !shaped(&j.targets) {
                    return Err(CliError::Config("gp model: data shape mismatch".into()));
                }
                let mut data = Dataset::from_trajectories(j.dim, 1.0, std::iter::empty());
                data.inputs = j.inputs.concat();
                data.targets = j.targets.concat();
                data.trajectories.push(0..j.inputs.len());
                let hyper = GpHyper {
                    lengthscale: j.lengthscale,
                    signal_var: j.signal_var,
                    noise_var: j.noise_var,
                };
                Ok(Model::Gp(fit_gp(&data, hyper)?))
            }
        }
    }
}

pub fn to_pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn load_model(path: &std::path::Path) -> Result<Model, CliError> {
    let bytes = crate::io::read_file(path)?;
    let file: ModelFile = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    file.model.build().map_err(|e| e.context(&path.display().to_string()))
}
