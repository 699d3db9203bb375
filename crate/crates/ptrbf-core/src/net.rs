//! PT-RBF network model and forward propagation.
//!
//! A network with L hidden layers maps a complex input vector of width P to
//! a complex output of width R. Layer l holds synaptic weights W (O_l x I_l),
//! a bias b (O_l), center vectors in the rows of Gamma (I_l x O_{l-1}), and a
//! per-neuron complex variance sigma (I_l). The layer computes, per neuron m,
//!
//! ```text
//! v_m   = ||Re(y_prev) - Re(gamma_m)||^2 / Re(sigma_m)
//!       + j ||Im(y_prev) - Im(gamma_m)||^2 / Im(sigma_m)
//! phi_m = exp(-Re(v_m)) + j exp(-Im(v_m))
//! y     = W phi + b
//! ```
//!
//! The kernel acts on real and imaginary channels separately, so both parts
//! of phi lie in (0, 1] whenever both parts of v are nonnegative.

use serde::{Deserialize, Serialize};

use crate::complex::{CMat, Cx};
use crate::error::{Error, Result};

/// Exponent clamp for kernel inputs. exp(-700) is still a normal f64;
/// anything larger is indistinguishable from zero transmittance.
const KERNEL_INPUT_CLAMP: f64 = 700.0;

const FORMAT_NAME: &str = "ptrbf-network";
const FORMAT_VERSION: u32 = 1;

/// Width layout of a network: P inputs, one neuron count per hidden layer,
/// R outputs. The output width of an interior layer equals the next layer's
/// neuron count; the last layer's output width is R.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetDims {
    pub inputs: usize,
    pub neurons: Vec<usize>,
    pub outputs: usize,
}

impl NetDims {
    pub fn new(inputs: usize, neurons: Vec<usize>, outputs: usize) -> Result<Self> {
        if inputs == 0 || outputs == 0 || neurons.is_empty() || neurons.contains(&0) {
            return Err(Error::Parameter(
                "network dims must be positive and at least one hidden layer".into(),
            ));
        }
        Ok(NetDims {
            inputs,
            neurons,
            outputs,
        })
    }

    pub fn layer_count(&self) -> usize {
        self.neurons.len()
    }

    /// (neuron count I_l, input width O_{l-1}, output width O_l) of layer `l`
    /// (0-based).
    pub fn layer_dims(&self, l: usize) -> (usize, usize, usize) {
        let i_l = self.neurons[l];
        let in_w = if l == 0 { self.inputs } else { self.out_width(l - 1) };
        (i_l, in_w, self.out_width(l))
    }

    /// Output width of layer `l` (0-based): next layer's neuron count, or R
    /// for the last layer.
    pub fn out_width(&self, l: usize) -> usize {
        if l + 1 < self.neurons.len() {
            self.neurons[l + 1]
        } else {
            self.outputs
        }
    }
}

/// One PT-RBF hidden layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtRbfLayer {
    /// Synaptic weights, O_l x I_l.
    pub weights: CMat,
    /// Bias, length O_l.
    pub bias: Vec<Cx>,
    /// Center vectors, one neuron per row, I_l x O_{l-1}.
    pub centers: CMat,
    /// Per-neuron kernel variance, length I_l. Both components must stay
    /// positive; the forward pass divides by them.
    pub sigma: Vec<Cx>,
}

impl PtRbfLayer {
    pub fn neuron_count(&self) -> usize {
        self.centers.rows()
    }

    pub fn input_width(&self) -> usize {
        self.centers.cols()
    }

    pub fn output_width(&self) -> usize {
        self.weights.rows()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.neuron_count();
        if self.weights.cols() != m {
            return Err(Error::Dimension(format!(
                "weights have {} columns for {} neurons",
                self.weights.cols(),
                m
            )));
        }
        if self.bias.len() != self.weights.rows() {
            return Err(Error::Dimension(format!(
                "bias length {} vs {} outputs",
                self.bias.len(),
                self.weights.rows()
            )));
        }
        if self.sigma.len() != m {
            return Err(Error::Dimension(format!(
                "sigma length {} vs {} neurons",
                self.sigma.len(),
                m
            )));
        }
        if !self.weights.is_finite()
            || !self.centers.is_finite()
            || self.bias.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
            || self.sigma.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("layer parameters".into()));
        }
        if self.sigma.iter().any(|s| s.re <= 0.0 || s.im <= 0.0) {
            return Err(Error::Parameter(
                "sigma components must be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

/// A stack of PT-RBF layers with a fixed input width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtRbfNetwork {
    pub inputs: usize,
    pub layers: Vec<PtRbfLayer>,
}

impl PtRbfNetwork {
    pub fn new(inputs: usize, layers: Vec<PtRbfLayer>) -> Result<Self> {
        let net = PtRbfNetwork { inputs, layers };
        net.validate()?;
        Ok(net)
    }

    pub fn outputs(&self) -> usize {
        self.layers.last().map(|l| l.output_width()).unwrap_or(0)
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn dims(&self) -> NetDims {
        NetDims {
            inputs: self.inputs,
            neurons: self.layers.iter().map(|l| l.neuron_count()).collect(),
            outputs: self.outputs(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Parameter("network needs at least one layer".into()));
        }
        let mut width = self.inputs;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.validate()?;
            if layer.input_width() != width {
                return Err(Error::Dimension(format!(
                    "layer {} expects input width {}, chain provides {}",
                    i,
                    layer.input_width(),
                    width
                )));
            }
            width = layer.output_width();
        }
        Ok(())
    }
}

/// Cached per-layer signals from one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// The network input the trace was computed from.
    pub input: Vec<Cx>,
    /// Unclamped kernel inputs v, one vector per layer.
    pub kernel_inputs: Vec<Vec<Cx>>,
    /// Kernel outputs phi, one vector per layer.
    pub kernel_outputs: Vec<Vec<Cx>>,
    /// Layer outputs y, one vector per layer.
    pub outputs: Vec<Vec<Cx>>,
}

impl ForwardTrace {
    pub fn network_output(&self) -> &[Cx] {
        self.outputs.last().expect("trace has at least one layer")
    }
}

/// Kernel input of one neuron: componentwise scaled squared distance
/// between the previous layer's output and the neuron's center.
pub fn kernel_input(prev_output: &[Cx], center: &[Cx], variance: Cx) -> Result<Cx> {
    if prev_output.len() != center.len() {
        return Err(Error::Dimension(format!(
            "kernel input: output width {} vs center width {}",
            prev_output.len(),
            center.len()
        )));
    }
    if variance.re <= 0.0 || variance.im <= 0.0 {
        return Err(Error::Parameter(format!(
            "kernel variance components must be positive, got {variance}"
        )));
    }
    let mut d_re = 0.0;
    let mut d_im = 0.0;
    for (y, g) in prev_output.iter().zip(center) {
        let re = y.re - g.re;
        let im = y.im - g.im;
        d_re += re * re;
        d_im += im * im;
    }
    Ok(Cx::new(d_re / variance.re, d_im / variance.im))
}

/// Split-complex Gaussian kernel: exp(-Re v) + j exp(-Im v), with each
/// exponent clamped so the result never underflows past a normal f64.
pub fn kernel(v: Cx) -> Cx {
    Cx::new(
        (-v.re.min(KERNEL_INPUT_CLAMP)).exp(),
        (-v.im.min(KERNEL_INPUT_CLAMP)).exp(),
    )
}

/// One layer forward pass: returns (y, v, phi).
pub fn layer_forward(layer: &PtRbfLayer, prev_output: &[Cx]) -> Result<(Vec<Cx>, Vec<Cx>, Vec<Cx>)> {
    let m = layer.neuron_count();
    let mut v = Vec::with_capacity(m);
    let mut phi = Vec::with_capacity(m);
    for n in 0..m {
        let vn = kernel_input(prev_output, layer.centers.row(n), layer.sigma[n])?;
        v.push(vn);
        phi.push(kernel(vn));
    }
    let mut y = layer.weights.matvec(&phi)?;
    for (yo, b) in y.iter_mut().zip(&layer.bias) {
        *yo += b;
    }
    Ok((y, v, phi))
}

/// Full network forward pass, retaining every intermediate signal.
pub fn network_forward(net: &PtRbfNetwork, input: &[Cx]) -> Result<ForwardTrace> {
    if input.len() != net.inputs {
        return Err(Error::Dimension(format!(
            "network expects {} inputs, got {}",
            net.inputs,
            input.len()
        )));
    }
    let mut trace = ForwardTrace {
        input: input.to_vec(),
        kernel_inputs: Vec::with_capacity(net.layer_count()),
        kernel_outputs: Vec::with_capacity(net.layer_count()),
        outputs: Vec::with_capacity(net.layer_count()),
    };
    let mut prev: &[Cx] = input;
    for layer in &net.layers {
        let (y, v, phi) = layer_forward(layer, prev)?;
        trace.kernel_inputs.push(v);
        trace.kernel_outputs.push(phi);
        trace.outputs.push(y);
        prev = trace.outputs.last().unwrap();
    }
    Ok(trace)
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    format: String,
    version: u32,
    inputs: usize,
    outputs: usize,
    layers: Vec<PtRbfLayer>,
}

/// Serialize a network to the versioned JSON text format. All floats are
/// written with shortest round-trip precision, so load(save(net)) is
/// bit-exact.
pub fn to_json(net: &PtRbfNetwork) -> Result<String> {
    net.validate()?;
    let file = NetworkFile {
        format: FORMAT_NAME.into(),
        version: FORMAT_VERSION,
        inputs: net.inputs,
        outputs: net.outputs(),
        layers: net.layers.clone(),
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::Format(e.to_string()))
}

pub fn from_json(text: &str) -> Result<PtRbfNetwork> {
    let file: NetworkFile =
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if file.format != FORMAT_NAME {
        return Err(Error::Format(format!("unknown format '{}'", file.format)));
    }
    if file.version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported version {} (expected {})",
            file.version, FORMAT_VERSION
        )));
    }
    let net = PtRbfNetwork::new(file.inputs, file.layers)?;
    if net.outputs() != file.outputs {
        return Err(Error::Format(format!(
            "declared output width {} vs layer stack {}",
            file.outputs,
            net.outputs()
        )));
    }
    Ok(net)
}

pub fn save(net: &PtRbfNetwork, path: &std::path::Path) -> Result<()> {
    let text = to_json(net)?;
    std::fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn load(path: &std::path::Path) -> Result<PtRbfNetwork> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{sample_complex_uniform, sample_complex_uniform_vec, ComplexUniformSpec};
    use crate::rng::seeded;

    fn tiny_layer(neurons: usize, inputs: usize, outputs: usize, seed: u64) -> PtRbfLayer {
        let mut rng = seeded(seed);
        let spec = ComplexUniformSpec::zero_mean(1.0).unwrap();
        PtRbfLayer {
            weights: sample_complex_uniform(&mut rng, spec, outputs, neurons),
            bias: sample_complex_uniform_vec(&mut rng, spec, outputs),
            centers: sample_complex_uniform(&mut rng, spec, neurons, inputs),
            sigma: vec![Cx::new(0.8, 1.3); neurons],
        }
    }

    #[test]
    fn kernel_at_zero_is_one_plus_j() {
        assert_eq!(kernel(Cx::new(0.0, 0.0)), Cx::new(1.0, 1.0));
    }

    #[test]
    fn kernel_drop_from_zero_to_three() {
        let drop = kernel(Cx::new(0.0, 0.0)).re - kernel(Cx::new(3.0, 3.0)).re;
        assert!((drop - 0.95).abs() < 1e-3, "drop {drop}");
    }

    #[test]
    fn kernel_at_ten() {
        let phi = kernel(Cx::new(10.0, 10.0));
        assert!((phi.re - 4.539993e-5).abs() < 1e-10);
        assert_eq!(phi.re, phi.im);
    }

    #[test]
    fn kernel_clamp_keeps_result_normal() {
        let phi = kernel(Cx::new(1e9, 1e9));
        assert!(phi.re > 0.0 && phi.re.is_normal());
    }

    #[test]
    fn kernel_input_zero_distance() {
        let p = vec![Cx::new(0.3, -0.7), Cx::new(1.0, 2.0)];
        let v = kernel_input(&p, &p, Cx::new(1.0, 1.0)).unwrap();
        assert_eq!(v, Cx::new(0.0, 0.0));
    }

    #[test]
    fn kernel_input_hand_case() {
        let v = kernel_input(&[Cx::new(1.0, 1.0)], &[Cx::new(0.0, 0.0)], Cx::new(1.0, 1.0)).unwrap();
        assert_eq!(v, Cx::new(1.0, 1.0));
    }

    #[test]
    fn kernel_input_rejects_nonpositive_variance() {
        let p = vec![Cx::new(1.0, 1.0)];
        assert!(kernel_input(&p, &p, Cx::new(0.0, 1.0)).is_err());
        assert!(kernel_input(&p, &p, Cx::new(1.0, -2.0)).is_err());
    }

    #[test]
    fn kernel_input_matches_scalar_loop() {
        let mut rng = seeded(17);
        let spec = ComplexUniformSpec::zero_mean(1.0).unwrap();
        let p = sample_complex_uniform_vec(&mut rng, spec, 12);
        let c = sample_complex_uniform_vec(&mut rng, spec, 12);
        let sigma = Cx::new(0.7, 2.1);
        let v = kernel_input(&p, &c, sigma).unwrap();
        let mut d_re = 0.0;
        let mut d_im = 0.0;
        for i in 0..p.len() {
            d_re += (p[i].re - c[i].re) * (p[i].re - c[i].re);
            d_im += (p[i].im - c[i].im) * (p[i].im - c[i].im);
        }
        assert!((v.re - d_re / 0.7).abs() < 1e-12 * v.re.abs().max(1.0));
        assert!((v.im - d_im / 2.1).abs() < 1e-12 * v.im.abs().max(1.0));
    }

    #[test]
    fn zero_weights_pass_bias_through() {
        let mut layer = tiny_layer(3, 2, 2, 1);
        for w in layer.weights.iter_mut() {
            *w = Cx::new(0.0, 0.0);
        }
        let input = vec![Cx::new(0.4, 0.1), Cx::new(-0.2, 0.9)];
        let (y, _, _) = layer_forward(&layer, &input).unwrap();
        assert_eq!(y, layer.bias);
    }

    #[test]
    fn single_neuron_identity_composition() {
        let input = vec![Cx::new(0.25, -0.5)];
        let layer = PtRbfLayer {
            weights: CMat::from_rows(vec![vec![Cx::new(1.0, 0.0)]]).unwrap(),
            bias: vec![Cx::new(0.0, 0.0)],
            centers: CMat::from_rows(vec![input.clone()]).unwrap(),
            sigma: vec![Cx::new(1.0, 1.0)],
        };
        let (y, _, _) = layer_forward(&layer, &input).unwrap();
        assert_eq!(y, vec![Cx::new(1.0, 1.0)]);
    }

    #[test]
    fn layer_forward_matches_per_element_recomputation() {
        let layer = tiny_layer(6, 4, 3, 23);
        let input = sample_complex_uniform_vec(
            &mut seeded(24),
            ComplexUniformSpec::zero_mean(1.0).unwrap(),
            4,
        );
        let (y, v, phi) = layer_forward(&layer, &input).unwrap();
        for m in 0..6 {
            let vm = kernel_input(&input, layer.centers.row(m), layer.sigma[m]).unwrap();
            assert_eq!(v[m], vm);
            assert_eq!(phi[m], kernel(vm));
        }
        for o in 0..3 {
            let mut acc = layer.bias[o];
            for m in 0..6 {
                acc += layer.weights[(o, m)] * phi[m];
            }
            assert!((y[o] - acc).norm() <= 1e-12 * acc.norm().max(1.0));
        }
    }

    #[test]
    fn two_layer_forward_is_composition() {
        let l1 = tiny_layer(5, 3, 4, 31);
        let l2 = tiny_layer(6, 4, 2, 32);
        let net = PtRbfNetwork::new(3, vec![l1.clone(), l2.clone()]).unwrap();
        let input = sample_complex_uniform_vec(
            &mut seeded(33),
            ComplexUniformSpec::zero_mean(1.0).unwrap(),
            3,
        );
        let trace = network_forward(&net, &input).unwrap();
        let (y1, _, _) = layer_forward(&l1, &input).unwrap();
        let (y2, _, _) = layer_forward(&l2, &y1).unwrap();
        assert_eq!(trace.outputs[0], y1);
        assert_eq!(trace.outputs[1], y2);
        assert_eq!(trace.network_output(), &y2[..]);
    }

    #[test]
    fn forward_is_deterministic_from_trace_inputs() {
        let net = PtRbfNetwork::new(3, vec![tiny_layer(4, 3, 2, 40)]).unwrap();
        let input = sample_complex_uniform_vec(
            &mut seeded(41),
            ComplexUniformSpec::zero_mean(1.0).unwrap(),
            3,
        );
        let a = network_forward(&net, &input).unwrap();
        let b = network_forward(&net, &a.input).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn forward_rejects_wrong_input_width() {
        let net = PtRbfNetwork::new(3, vec![tiny_layer(4, 3, 2, 50)]).unwrap();
        assert!(matches!(
            network_forward(&net, &[Cx::new(0.0, 0.0)]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn validate_rejects_broken_chain_and_bad_sigma() {
        let l1 = tiny_layer(4, 3, 2, 60);
        let l2 = tiny_layer(4, 3, 2, 61); // expects width 3, gets 2
        assert!(PtRbfNetwork::new(3, vec![l1.clone(), l2]).is_err());
        let mut bad = l1;
        bad.sigma[0] = Cx::new(-1.0, 1.0);
        assert!(PtRbfNetwork::new(3, vec![bad]).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let net = PtRbfNetwork::new(4, vec![tiny_layer(5, 4, 3, 70), tiny_layer(2, 3, 2, 71)]).unwrap();
        let text = to_json(&net).unwrap();
        let back = from_json(&text).unwrap();
        assert_eq!(net.inputs, back.inputs);
        for (a, b) in net.layers.iter().zip(&back.layers) {
            for (x, y) in a.weights.iter().zip(b.weights.iter()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
            for (x, y) in a.sigma.iter().zip(&b.sigma) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    #[test]
    fn json_rejects_wrong_version() {
        let net = PtRbfNetwork::new(2, vec![tiny_layer(2, 2, 1, 80)]).unwrap();
        let text = to_json(&net).unwrap().replace("\"version\": 1", "\"version\": 99");
        assert!(matches!(from_json(&text), Err(Error::Format(_))));
    }
}
