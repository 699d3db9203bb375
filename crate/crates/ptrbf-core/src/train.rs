//! Split-complex backpropagation and per-sample stochastic gradient
//! descent.
//!
//! The training loss for one sample is the split real loss
//! `E = 1/2 sum_o [(Re e_o)^2 + (Im e_o)^2]` with `e = y - d`. Gradients
//! with respect to the real and imaginary parts of every parameter are
//! taken separately and stored as the components of a complex number of
//! the parameter's shape. Working through `y = W phi + b`,
//! `phi = exp(-Re v) + j exp(-Im v)`, and the scaled squared-distance
//! kernel input gives, per layer (g denotes the split gradient arriving
//! at the layer output):
//!
//! ```text
//! dE/dW    = g conj(phi)^T          dE/db = g
//! g_phi    = W^H g
//! g_v      = -(Re g_phi Re phi) - j (Im g_phi Im phi)
//! dE/dgamma_mi = -2 (y_i - gamma_mi) / sigma_m * g_v,m   (per component)
//! dE/dsigma_m  = -v_m / sigma_m * g_v,m                  (per component)
//! g_prev,i = sum_m 2 (y_i - gamma_mi) / sigma_m * g_v,m  (per component)
//! ```
//!
//! Updates are plain per-sample SGD with one learning rate per parameter
//! class per layer. Kernel variances are re-clamped to [`SIGMA_MIN`] after
//! every step so the forward pass stays well-defined.

use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::complex::{shuffle_indices, CMat, Cx};
use crate::error::{Error, Result};
use crate::exec;
use crate::init::{InitScheme, NormStats};
use crate::net::{network_forward, ForwardTrace, PtRbfNetwork};
use crate::rng::seeded;

/// Lower clamp for kernel variance components after an SGD step.
pub const SIGMA_MIN: f64 = 1e-6;

/// Floor for MSE values expressed in dB.
pub const MSE_DB_FLOOR: f64 = -300.0;

/// Learning rates for the four parameter classes of one layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerRates {
    pub weights: f64,
    pub bias: f64,
    pub centers: f64,
    pub sigma: f64,
}

impl LayerRates {
    pub fn uniform(rate: f64) -> Self {
        LayerRates {
            weights: rate,
            bias: rate,
            centers: rate,
            sigma: rate,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("weights", self.weights),
            ("bias", self.bias),
            ("centers", self.centers),
            ("sigma", self.sigma),
        ] {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Parameter(format!(
                    "learning rate for {name} must be positive, got {r}"
                )));
            }
        }
        Ok(())
    }
}

/// Empirically tuned single-layer rates per initialization scheme
/// (columns eta_w, eta_b, eta_gamma, eta_sigma).
pub fn single_layer_rates(scheme: InitScheme) -> LayerRates {
    match scheme {
        InitScheme::Random | InitScheme::Constellation => LayerRates::uniform(0.5),
        InitScheme::KMeans | InitScheme::Proposed => LayerRates {
            weights: 0.1,
            bias: 0.1,
            centers: 0.4,
            sigma: 0.2,
        },
    }
}

/// Per-depth rates for deep networks: 0.100, 0.050, 0.033, 0.025 for the
/// first through fourth hidden layers, all parameter classes alike. Only
/// the first L rows apply to an L-layer network.
pub fn deep_rates(layer_count: usize) -> Result<Vec<LayerRates>> {
    const TABLE: [f64; 4] = [0.100, 0.050, 0.033, 0.025];
    if layer_count == 0 || layer_count > TABLE.len() {
        return Err(Error::Parameter(format!(
            "deep rate table covers 1..=4 layers, got {layer_count}"
        )));
    }
    Ok(TABLE[..layer_count].iter().map(|&r| LayerRates::uniform(r)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// One entry per hidden layer.
    pub rates: Vec<LayerRates>,
    pub epochs: usize,
    /// Seed of the per-epoch sample shuffle.
    pub shuffle_seed: u64,
}

impl TrainConfig {
    pub fn validate(&self, layer_count: usize) -> Result<()> {
        if self.rates.len() != layer_count {
            return Err(Error::Parameter(format!(
                "{} rate rows for {} layers",
                self.rates.len(),
                layer_count
            )));
        }
        for r in &self.rates {
            r.validate()?;
        }
        Ok(())
    }

    /// Stable hash of the configuration for run records.
    pub fn stable_hash(&self) -> u64 {
        let text = serde_json::to_string(self).expect("config serializes");
        let mut h = std::collections::hash_map::DefaultHasher::new();
        text.hash(&mut h);
        h.finish()
    }
}

/// Per-layer split-complex gradients, same shapes as the layer parameters.
#[derive(Debug, Clone)]
pub struct LayerGradients {
    pub weights: CMat,
    pub bias: Vec<Cx>,
    pub centers: CMat,
    pub sigma: Vec<Cx>,
}

#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<LayerGradients>,
}

/// How recorded errors are mapped back to the reporting scale. Training on
/// normalized targets reports denormalized errors so curves from different
/// pipelines are comparable on the original symbol scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MseScale {
    Identity,
    /// Invert this output normalization before squaring errors.
    Denormalized(NormStats),
}

impl MseScale {
    /// Squared reporting-scale error of one prediction/target pair given in
    /// the training domain.
    fn sq_error(&self, diff: Cx) -> f64 {
        match self {
            MseScale::Identity => diff.norm_sqr(),
            MseScale::Denormalized(stats) => {
                let re = diff.re / stats.scale_re;
                let im = diff.im / stats.scale_im;
                re * re + im * im
            }
        }
    }
}

/// Mean of |y - y_hat|^2 over every scalar output.
pub fn mse(targets: &[Vec<Cx>], predictions: &[Vec<Cx>]) -> Result<f64> {
    if targets.is_empty() || targets.len() != predictions.len() {
        return Err(Error::Parameter(format!(
            "mse needs equal nonempty sets, got {} targets and {} predictions",
            targets.len(),
            predictions.len()
        )));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for (t, p) in targets.iter().zip(predictions) {
        if t.len() != p.len() {
            return Err(Error::Dimension(format!(
                "mse row widths {} vs {}",
                t.len(),
                p.len()
            )));
        }
        for (a, b) in t.iter().zip(p) {
            sum += (a - b).norm_sqr();
            n += 1;
        }
    }
    Ok(sum / n as f64)
}

/// 10 log10 of a linear MSE, floored at [`MSE_DB_FLOOR`].
pub fn mse_db(linear: f64) -> f64 {
    if linear <= 0.0 {
        MSE_DB_FLOOR
    } else {
        (10.0 * linear.log10()).max(MSE_DB_FLOOR)
    }
}

/// Split-complex gradients of the half squared error at one sample.
/// `trace` must come from `network_forward` on the same network and input.
pub fn backprop(net: &PtRbfNetwork, trace: &ForwardTrace, target: &[Cx]) -> Result<Gradients> {
    let layers = net.layer_count();
    if trace.outputs.len() != layers
        || trace.input.len() != net.inputs
        || trace
            .outputs
            .iter()
            .zip(&net.layers)
            .any(|(y, l)| y.len() != l.output_width())
    {
        return Err(Error::Contract(
            "forward trace does not match the network".into(),
        ));
    }
    let y_out = trace.network_output();
    if target.len() != y_out.len() {
        return Err(Error::Dimension(format!(
            "target width {} vs network output {}",
            target.len(),
            y_out.len()
        )));
    }

    // split gradient at the current layer's output
    let mut g: Vec<Cx> = y_out.iter().zip(target).map(|(y, d)| y - d).collect();
    let mut grads: Vec<LayerGradients> = Vec::with_capacity(layers);

    for l in (0..layers).rev() {
        let layer = &net.layers[l];
        let phi = &trace.kernel_outputs[l];
        let v = &trace.kernel_inputs[l];
        let prev: &[Cx] = if l == 0 { &trace.input } else { &trace.outputs[l - 1] };
        let (m_count, out_w) = (layer.neuron_count(), layer.output_width());

        let mut gl = LayerGradients {
            weights: CMat::zeros(out_w, m_count),
            bias: g.clone(),
            centers: CMat::zeros(m_count, layer.input_width()),
            sigma: vec![Cx::new(0.0, 0.0); m_count],
        };

        // dE/dW = g conj(phi)^T and g_phi = W^H g
        let mut g_phi = vec![Cx::new(0.0, 0.0); m_count];
        for o in 0..out_w {
            let w_row = layer.weights.row(o);
            let gw_row = gl.weights.row_mut(o);
            let go = g[o];
            for m in 0..m_count {
                gw_row[m] = go * phi[m].conj();
                g_phi[m] += w_row[m].conj() * go;
            }
        }

        let mut g_prev = vec![Cx::new(0.0, 0.0); layer.input_width()];
        for m in 0..m_count {
            let gv = Cx::new(-g_phi[m].re * phi[m].re, -g_phi[m].im * phi[m].im);
            let sigma = layer.sigma[m];
            let center = layer.centers.row(m);
            let gc_row = gl.centers.row_mut(m);
            let re_coeff = 2.0 * gv.re / sigma.re;
            let im_coeff = 2.0 * gv.im / sigma.im;
            for i in 0..center.len() {
                let d_re = prev[i].re - center[i].re;
                let d_im = prev[i].im - center[i].im;
                gc_row[i] = Cx::new(-re_coeff * d_re, -im_coeff * d_im);
                g_prev[i].re += re_coeff * d_re;
                g_prev[i].im += im_coeff * d_im;
            }
            gl.sigma[m] = Cx::new(-v[m].re / sigma.re * gv.re, -v[m].im / sigma.im * gv.im);
        }

        grads.push(gl);
        g = g_prev;
    }

    grads.reverse();
    Ok(Gradients { layers: grads })
}

/// One SGD step over every layer: theta <- theta - eta * grad per class,
/// then re-clamp sigma components to stay positive.
pub fn sgd_step(net: &mut PtRbfNetwork, grads: &Gradients, config: &TrainConfig) -> Result<()> {
    if grads.layers.len() != net.layer_count() {
        return Err(Error::Contract("gradient/network layer mismatch".into()));
    }
    config.validate(net.layer_count())?;
    for (layer, (gl, rates)) in net
        .layers
        .iter_mut()
        .zip(grads.layers.iter().zip(&config.rates))
    {
        for (w, gw) in layer.weights.iter_mut().zip(gl.weights.iter()) {
            w.re -= rates.weights * gw.re;
            w.im -= rates.weights * gw.im;
        }
        for (b, gb) in layer.bias.iter_mut().zip(&gl.bias) {
            b.re -= rates.bias * gb.re;
            b.im -= rates.bias * gb.im;
        }
        for (c, gc) in layer.centers.iter_mut().zip(gl.centers.iter()) {
            c.re -= rates.centers * gc.re;
            c.im -= rates.centers * gc.im;
        }
        for (s, gs) in layer.sigma.iter_mut().zip(&gl.sigma) {
            s.re = (s.re - rates.sigma * gs.re).max(SIGMA_MIN);
            s.im = (s.im - rates.sigma * gs.im).max(SIGMA_MIN);
        }
    }
    Ok(())
}

/// Per-epoch learning curve and provenance of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub train_mse_db: Vec<f64>,
    pub val_mse_db: Vec<f64>,
    pub wall_seconds: f64,
    pub config_hash: u64,
    pub seed: u64,
}

impl RunRecord {
    /// CSV with columns epoch, train_mse_db, val_mse_db.
    pub fn write_csv(&self, w: &mut impl std::io::Write) -> Result<()> {
        let io_err = |e| Error::io("writing run record", e);
        writeln!(w, "epoch,train_mse_db,val_mse_db").map_err(io_err)?;
        for (e, (t, v)) in self.train_mse_db.iter().zip(&self.val_mse_db).enumerate() {
            writeln!(w, "{},{},{}", e + 1, t, v).map_err(io_err)?;
        }
        Ok(())
    }
}

/// Mean reporting-scale MSE of a network over a dataset. Per-sample errors
/// are computed in parallel and reduced in index order.
pub fn evaluate_mse(
    net: &PtRbfNetwork,
    inputs: &[Vec<Cx>],
    targets: &[Vec<Cx>],
    scale: &MseScale,
) -> Result<f64> {
    if inputs.is_empty() || inputs.len() != targets.len() {
        return Err(Error::Parameter("evaluation set is empty or mismatched".into()));
    }
    let width = targets[0].len();
    let per_sample: Vec<Result<f64>> = exec::indexed_map(inputs.len(), |i| {
        let trace = network_forward(net, &inputs[i])?;
        let mut sq = 0.0;
        for (y, d) in trace.network_output().iter().zip(&targets[i]) {
            sq += scale.sq_error(y - d);
        }
        Ok(sq)
    });
    let mut sum = 0.0;
    for r in per_sample {
        sum += r?;
    }
    Ok(sum / (inputs.len() * width) as f64)
}

/// Train with per-sample SGD over a shuffled pass each epoch.
///
/// The recorded training MSE is the running mean of pre-update per-sample
/// errors across the epoch; validation is a full pass at each epoch end.
/// Both are reported on `scale`. Deterministic in (network, data, config).
pub fn train(
    mut net: PtRbfNetwork,
    train_inputs: &[Vec<Cx>],
    train_targets: &[Vec<Cx>],
    val_inputs: &[Vec<Cx>],
    val_targets: &[Vec<Cx>],
    config: &TrainConfig,
    scale: &MseScale,
) -> Result<(PtRbfNetwork, RunRecord)> {
    config.validate(net.layer_count())?;
    if train_inputs.len() != train_targets.len() {
        return Err(Error::Parameter("training inputs/targets mismatch".into()));
    }
    let started = std::time::Instant::now();
    let mut record = RunRecord {
        train_mse_db: Vec::with_capacity(config.epochs),
        val_mse_db: Vec::with_capacity(config.epochs),
        wall_seconds: 0.0,
        config_hash: config.stable_hash(),
        seed: config.shuffle_seed,
    };
    let n = train_inputs.len();
    let width = train_targets.first().map(|t| t.len()).unwrap_or(0);
    let mut order_rng = seeded(config.shuffle_seed);

    for _epoch in 0..config.epochs {
        let order = shuffle_indices(&mut order_rng, n);
        let mut sq_sum = 0.0;
        for &i in &order {
            let trace = network_forward(&net, &train_inputs[i])?;
            for (y, d) in trace.network_output().iter().zip(&train_targets[i]) {
                sq_sum += scale.sq_error(y - d);
            }
            let grads = backprop(&net, &trace, &train_targets[i])?;
            sgd_step(&mut net, &grads, config)?;
        }
        record.train_mse_db.push(mse_db(sq_sum / (n * width) as f64));
        let val = evaluate_mse(&net, val_inputs, val_targets, scale)?;
        record.val_mse_db.push(mse_db(val));
    }

    net.validate()?;
    record.wall_seconds = started.elapsed().as_secs_f64();
    Ok((net, record))
}
