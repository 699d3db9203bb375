//! Parameter initialization schemes and the dataset normalizations the
//! variance-matched scheme relies on.
//!
//! Four schemes are provided:
//!
//! - **Random**: centers and weights from a zero-mean complex uniform law,
//!   zero bias, constant kernel variance tied to the center variance.
//! - **KMeans** (single hidden layer only): first-layer centers drawn
//!   without replacement from split K-means cluster centers of the input
//!   dataset; kernel variances from in-cluster mean squared distances.
//! - **Constellation**: every center component drawn from a finite symbol
//!   alphabet; kernel variance from the largest pairwise center distance;
//!   weights and bias start at zero.
//! - **Proposed** (variance-matched): sizes every parameter class from the
//!   layer dimensions so that kernel inputs start near a target mean
//!   `mu_v` and every layer output starts with variance `c_sigma * mu_v /
//!   O_l`, keeping kernels away from saturation at any depth. Requires
//!   inputs and targets normalized by [`normalize_inputs`] /
//!   [`normalize_outputs`].
//!
//! Complex variances follow the total convention `Var[z] = Var[Re z] +
//! Var[Im z]` everywhere.

use serde::{Deserialize, Serialize};

use crate::complex::{sample_complex_uniform, shuffle_indices, CMat, ComplexUniformSpec, Cx};
use crate::error::{Error, Result};
use crate::kmeans::split_kmeans;
use crate::net::{NetDims, PtRbfLayer, PtRbfNetwork};
use crate::rng::Prng;
use rand::Rng as _;

/// Epsilon floor applied to degenerate kernel variances when opted in.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// Relative component-variance difference beyond which normalization
/// switches to the per-component (asymmetric) form.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitScheme {
    Random,
    KMeans,
    Constellation,
    Proposed,
}

impl std::fmt::Display for InitScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            InitScheme::Random => "random",
            InitScheme::KMeans => "kmeans",
            InitScheme::Constellation => "constellation",
            InitScheme::Proposed => "proposed",
        };
        f.write_str(s)
    }
}

/// Which scheme to run and its distribution parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct InitSpec {
    pub scheme: InitScheme,
    /// Constant kernel variance component of the proposed scheme; must be
    /// positive.
    pub c_sigma: f64,
    /// Target mean kernel input, equal positive real and imaginary parts.
    pub mu_v_target: Cx,
    /// Center variance of the random scheme.
    pub sigma2_gamma_random: f64,
    /// Symbol alphabet of the constellation scheme.
    pub constellation: Vec<Cx>,
    /// Replace degenerate kernel variances with [`VARIANCE_FLOOR`] instead
    /// of erroring.
    pub epsilon_floor: bool,
}

impl InitSpec {
    pub fn proposed() -> Self {
        InitSpec {
            scheme: InitScheme::Proposed,
            c_sigma: 1.0,
            mu_v_target: Cx::new(1.0, 1.0),
            sigma2_gamma_random: 1.0,
            constellation: Vec::new(),
            epsilon_floor: false,
        }
    }

    pub fn random(sigma2_gamma: f64) -> Self {
        InitSpec {
            scheme: InitScheme::Random,
            sigma2_gamma_random: sigma2_gamma,
            ..Self::proposed()
        }
    }

    pub fn kmeans() -> Self {
        InitSpec {
            scheme: InitScheme::KMeans,
            ..Self::proposed()
        }
    }

    pub fn constellation(symbols: Vec<Cx>) -> Self {
        InitSpec {
            scheme: InitScheme::Constellation,
            constellation: symbols,
            ..Self::proposed()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_sigma > 0.0 && self.c_sigma.is_finite()) {
            return Err(Error::Parameter(format!(
                "c_sigma must be positive, got {}",
                self.c_sigma
            )));
        }
        let mu = self.mu_v_target;
        if !(mu.re > 0.0 && mu.im > 0.0) || (mu.re - mu.im).abs() > 1e-12 * mu.re {
            return Err(Error::Parameter(format!(
                "mu_v_target must have equal positive components, got {mu}"
            )));
        }
        if self.scheme == InitScheme::Random
            && !(self.sigma2_gamma_random > 0.0 && self.sigma2_gamma_random.is_finite())
        {
            return Err(Error::Parameter(format!(
                "random center variance must be positive, got {}",
                self.sigma2_gamma_random
            )));
        }
        if self.scheme == InitScheme::Constellation && self.constellation.is_empty() {
            return Err(Error::Parameter("constellation alphabet is empty".into()));
        }
        Ok(())
    }

    fn mu_v(&self) -> f64 {
        self.mu_v_target.re
    }
}

fn zeros(n: usize) -> Vec<Cx> {
    vec![Cx::new(0.0, 0.0); n]
}

/// Random scheme: Gamma ~ CU(0, sigma2), W ~ CU(0, 1), b = 0,
/// sigma = sigma2/2 (1 + j1).
pub fn init_random(dims: &NetDims, spec: &InitSpec, rng: &mut Prng) -> Result<PtRbfNetwork> {
    spec.validate()?;
    let s2 = spec.sigma2_gamma_random;
    let gamma_spec = ComplexUniformSpec::zero_mean(s2)?;
    let w_spec = ComplexUniformSpec::zero_mean(1.0)?;
    let mut layers = Vec::with_capacity(dims.layer_count());
    for l in 0..dims.layer_count() {
        let (i_l, in_w, out_w) = dims.layer_dims(l);
        layers.push(PtRbfLayer {
            weights: sample_complex_uniform(rng, w_spec, out_w, i_l),
            bias: zeros(out_w),
            centers: sample_complex_uniform(rng, gamma_spec, i_l, in_w),
            sigma: vec![Cx::new(s2 / 2.0, s2 / 2.0); i_l],
        });
    }
    PtRbfNetwork::new(dims.inputs, layers)
}

fn guard_sigma(sigma: Cx, context: &str, floor: bool) -> Result<Cx> {
    if sigma.re > 0.0 && sigma.im > 0.0 {
        return Ok(sigma);
    }
    if floor {
        Ok(Cx::new(sigma.re.max(VARIANCE_FLOOR), sigma.im.max(VARIANCE_FLOOR)))
    } else {
        Err(Error::DegenerateVariance(format!(
            "{context}: kernel variance {sigma} has a nonpositive component \
             (enable the epsilon floor to clamp instead)"
        )))
    }
}

/// K-means scheme, defined for a single hidden layer: K = I_1 cluster
/// centers of the input dataset become the candidate centers; each neuron
/// takes one without replacement, with its in-cluster mean squared
/// distances (real and imaginary sides separately) as kernel variance.
/// Weights and bias follow the random scheme.
pub fn init_kmeans(
    dims: &NetDims,
    data: &[Vec<Cx>],
    spec: &InitSpec,
    rng: &mut Prng,
) -> Result<PtRbfNetwork> {
    spec.validate()?;
    if dims.layer_count() != 1 {
        return Err(Error::UnsupportedScheme(format!(
            "k-means initialization is defined for a single hidden layer, got {}",
            dims.layer_count()
        )));
    }
    let (i_1, in_w, out_w) = dims.layer_dims(0);
    if data.iter().any(|x| x.len() != in_w) {
        return Err(Error::Dimension(format!(
            "k-means dataset width must equal the input width {in_w}"
        )));
    }
    let clustering = split_kmeans(data, i_1, rng)?;

    // one cluster center per neuron, without replacement
    let order = shuffle_indices(rng, i_1);
    let mut center_rows = Vec::with_capacity(i_1);
    let mut sigma = Vec::with_capacity(i_1);
    for &c in &order {
        center_rows.push(clustering.centers.row(c).to_vec());
        let s = Cx::new(clustering.re.mean_sq_dist[c], clustering.im.mean_sq_dist[c]);
        sigma.push(guard_sigma(s, "k-means in-cluster distance", spec.epsilon_floor)?);
    }

    let layer = PtRbfLayer {
        weights: sample_complex_uniform(rng, ComplexUniformSpec::zero_mean(1.0)?, out_w, i_1),
        bias: zeros(out_w),
        centers: CMat::from_rows(center_rows)?,
        sigma,
    };
    PtRbfNetwork::new(dims.inputs, vec![layer])
}

/// Constellation scheme: every center component is a uniformly drawn
/// alphabet symbol; the layer-wide kernel variance is half the largest
/// pairwise center-row distance (real and imaginary sides separately);
/// weights and bias start at zero.
pub fn init_constellation(dims: &NetDims, spec: &InitSpec, rng: &mut Prng) -> Result<PtRbfNetwork> {
    spec.validate()?;
    let alphabet = &spec.constellation;
    let mut layers = Vec::with_capacity(dims.layer_count());
    for l in 0..dims.layer_count() {
        let (i_l, in_w, out_w) = dims.layer_dims(l);
        let mut centers = CMat::zeros(i_l, in_w);
        for z in centers.iter_mut() {
            *z = alphabet[rng.gen_range(0..alphabet.len())];
        }

        let mut max_re = 0.0f64;
        let mut max_im = 0.0f64;
        for i in 0..i_l {
            for k in (i + 1)..i_l {
                let (a, b) = (centers.row(i), centers.row(k));
                let mut d_re = 0.0;
                let mut d_im = 0.0;
                for (x, y) in a.iter().zip(b) {
                    d_re += (x.re - y.re) * (x.re - y.re);
                    d_im += (x.im - y.im) * (x.im - y.im);
                }
                max_re = max_re.max(d_re.sqrt());
                max_im = max_im.max(d_im.sqrt());
            }
        }
        let sigma = guard_sigma(
            Cx::new(max_re / 2.0, max_im / 2.0),
            "constellation center spread",
            spec.epsilon_floor,
        )?;

        layers.push(PtRbfLayer {
            weights: CMat::zeros(out_w, i_l),
            bias: zeros(out_w),
            centers,
            sigma: vec![sigma; i_l],
        });
    }
    PtRbfNetwork::new(dims.inputs, layers)
}

/// Center variance of the proposed scheme at layer `l`:
/// `c_sigma * mu_v / O_{l-1}`.
pub fn proposed_center_variance(spec: &InitSpec, prev_width: usize) -> f64 {
    spec.c_sigma * spec.mu_v() / prev_width as f64
}

/// Weight variance of the proposed scheme at layer `l`:
/// `5 c_sigma exp(2 mu_v) O_{l-1} / (12 I_l O_l mu_v)`.
pub fn proposed_weight_variance(spec: &InitSpec, i_l: usize, prev_width: usize, out_width: usize) -> f64 {
    5.0 * spec.c_sigma * (2.0 * spec.mu_v()).exp() * prev_width as f64
        / (12.0 * i_l as f64 * out_width as f64 * spec.mu_v())
}

/// Variance-matched scheme: b = 0, sigma = c_sigma (1 + j1), centers and
/// weights sized per layer so kernel inputs start at the target mean and
/// every layer output starts with variance `c_sigma * mu_v / O_l`.
pub fn init_proposed(dims: &NetDims, spec: &InitSpec, rng: &mut Prng) -> Result<PtRbfNetwork> {
    spec.validate()?;
    let mut layers = Vec::with_capacity(dims.layer_count());
    for l in 0..dims.layer_count() {
        let (i_l, in_w, out_w) = dims.layer_dims(l);
        let gamma_spec = ComplexUniformSpec::zero_mean(proposed_center_variance(spec, in_w))?;
        let w_spec = ComplexUniformSpec::zero_mean(proposed_weight_variance(spec, i_l, in_w, out_w))?;
        layers.push(PtRbfLayer {
            weights: sample_complex_uniform(rng, w_spec, out_w, i_l),
            bias: zeros(out_w),
            centers: sample_complex_uniform(rng, gamma_spec, i_l, in_w),
            sigma: vec![Cx::new(spec.c_sigma, spec.c_sigma); i_l],
        });
    }
    PtRbfNetwork::new(dims.inputs, layers)
}

/// Scheme dispatcher. `data` is the input dataset required by the K-means
/// scheme and ignored by the rest.
pub fn initialize(
    dims: &NetDims,
    spec: &InitSpec,
    data: Option<&[Vec<Cx>]>,
    rng: &mut Prng,
) -> Result<PtRbfNetwork> {
    match spec.scheme {
        InitScheme::Random => init_random(dims, spec, rng),
        InitScheme::Proposed => init_proposed(dims, spec, rng),
        InitScheme::Constellation => init_constellation(dims, spec, rng),
        InitScheme::KMeans => {
            let data = data.ok_or_else(|| {
                Error::Parameter("k-means initialization needs the input dataset".into())
            })?;
            init_kmeans(dims, data, spec, rng)
        }
    }
}

/// Whether normalization ran in the pooled (symmetric) or per-component
/// (asymmetric) form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMode {
    Symmetric,
    Asymmetric,
}

/// Affine map applied by a normalization pass, with the dataset statistics
/// it was derived from. `x_bar = ((Re x - mean_re) * scale_re) + j ((Im x -
/// mean_im) * scale_im)`; denormalization inverts it exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mode: NormMode,
    pub mean_re: f64,
    pub mean_im: f64,
    pub var_re: f64,
    pub var_im: f64,
    /// P for inputs, R for outputs.
    pub width: usize,
    /// Total complex variance after normalization: c_sigma * mu_v / width.
    pub target_variance: f64,
    pub scale_re: f64,
    pub scale_im: f64,
}

impl NormStats {
    pub fn apply(&self, z: Cx) -> Cx {
        Cx::new(
            (z.re - self.mean_re) * self.scale_re,
            (z.im - self.mean_im) * self.scale_im,
        )
    }

    pub fn invert(&self, z: Cx) -> Cx {
        Cx::new(z.re / self.scale_re + self.mean_re, z.im / self.scale_im + self.mean_im)
    }
}

fn component_stats(data: &[Vec<Cx>]) -> (f64, f64, f64, f64, usize) {
    let mut n = 0usize;
    let mut sum_re = 0.0;
    let mut sum_im = 0.0;
    for v in data {
        for z in v {
            sum_re += z.re;
            sum_im += z.im;
            n += 1;
        }
    }
    let mean_re = sum_re / n as f64;
    let mean_im = sum_im / n as f64;
    let mut var_re = 0.0;
    let mut var_im = 0.0;
    for v in data {
        for z in v {
            var_re += (z.re - mean_re) * (z.re - mean_re);
            var_im += (z.im - mean_im) * (z.im - mean_im);
        }
    }
    (mean_re, mean_im, var_re / n as f64, var_im / n as f64, n)
}

fn normalize(data: &[Vec<Cx>], width: usize, spec: &InitSpec, what: &str) -> Result<(Vec<Vec<Cx>>, NormStats)> {
    spec.validate()?;
    if data.is_empty() || data.iter().any(|v| v.len() != width) {
        return Err(Error::Dimension(format!(
            "{what}: expected nonempty dataset of width {width}"
        )));
    }
    let (mean_re, mean_im, var_re, var_im, _) = component_stats(data);
    let target = spec.c_sigma * spec.mu_v() / width as f64;

    let var_total = var_re + var_im;
    if var_total <= 0.0 {
        return Err(Error::DegenerateData(format!(
            "{what}: dataset variance is zero, cannot normalize"
        )));
    }
    let asymmetric = (var_re - var_im).abs() > ASYMMETRY_TOLERANCE * var_re.max(var_im);
    let (mode, scale_re, scale_im) = if asymmetric {
        if var_re <= 0.0 || var_im <= 0.0 {
            return Err(Error::DegenerateData(format!(
                "{what}: a component variance is zero in asymmetric mode"
            )));
        }
        let s_re = (target / (2.0 * var_re)).sqrt();
        let s_im = (target / (2.0 * var_im)).sqrt();
        (NormMode::Asymmetric, s_re, s_im)
    } else {
        let s = (target / var_total).sqrt();
        (NormMode::Symmetric, s, s)
    };

    let stats = NormStats {
        mode,
        mean_re,
        mean_im,
        var_re,
        var_im,
        width,
        target_variance: target,
        scale_re,
        scale_im,
    };
    let out = data
        .iter()
        .map(|v| v.iter().map(|&z| stats.apply(z)).collect())
        .collect();
    Ok((out, stats))
}

/// Normalize network inputs to zero mean and total variance
/// `c_sigma * mu_v / P`, switching to per-component scaling when the
/// component variances differ.
pub fn normalize_inputs(data: &[Vec<Cx>], p: usize, spec: &InitSpec) -> Result<(Vec<Vec<Cx>>, NormStats)> {
    normalize(data, p, spec, "input normalization")
}

/// Normalize training targets to zero mean and total variance
/// `c_sigma * mu_v / R`.
pub fn normalize_outputs(data: &[Vec<Cx>], r: usize, spec: &InitSpec) -> Result<(Vec<Vec<Cx>>, NormStats)> {
    normalize(data, r, spec, "output normalization")
}

/// Map normalized predictions back to the original target scale.
pub fn denormalize_outputs(values: &[Cx], stats: &NormStats) -> Vec<Cx> {
    values.iter().map(|&z| stats.invert(z)).collect()
}
