//! Synthetic complex-valued regression task: 16-QAM symbol vectors through
//! a random Rayleigh MIMO channel with additive white Gaussian noise.
//!
//! Each instance transmits a vector of [`TX_ANTENNAS`] QAM symbols `d`
//! through a fixed 4x4 channel `H` (drawn once per dataset), observed over
//! [`REUSE_SLOTS`] reuse slots with independent noise:
//!
//! ```text
//! x = stack(H d + n_t, t = 1..4)  in C^16,   target = d  in C^4
//! ```
//!
//! This keeps the learning problem's shape — a complex 16-input/4-output
//! regression with finite-alphabet targets at a configured Eb/N0 — while
//! staying a flat-fading block model. Noise variance is derived as
//! `N0 = (Es / bits_per_symbol) / 10^(EbN0_dB / 10)` with unit symbol
//! energy `Es = 1`.

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::complex::{CMat, Cx};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded, Prng};

pub const TX_ANTENNAS: usize = 4;
pub const RX_ANTENNAS: usize = 4;
pub const REUSE_SLOTS: usize = 4;
pub const INPUT_WIDTH: usize = RX_ANTENNAS * REUSE_SLOTS;
pub const OUTPUT_WIDTH: usize = TX_ANTENNAS;

const DATASET_HEADER: &str = "# ptrbf-dataset v1";

/// Square M-QAM alphabet with unit average power.
///
/// Per axis, the `sqrt(M)` amplitude levels are the odd integers
/// `-(side-1), ..., side-1` scaled by the unit-power factor. `symbols()[i]`
/// is the symbol whose Gray-coded bit label is `i`: the high half of the
/// bits selects the in-phase level, the low half the quadrature level, and
/// ascending levels carry binary-reflected Gray labels so neighboring
/// levels differ in exactly one bit.
#[derive(Debug, Clone, PartialEq)]
pub struct QamAlphabet {
    order: usize,
    symbols: Vec<Cx>,
    scale: f64,
}

fn gray_to_index(g: usize) -> usize {
    // inverse of i -> i ^ (i >> 1)
    let mut i = g;
    let mut shift = 1;
    while (g >> shift) > 0 {
        i ^= g >> shift;
        shift += 1;
    }
    i
}

impl QamAlphabet {
    /// Build an M-QAM alphabet; M must be a power of 4 (4, 16, 64, ...).
    pub fn new(order: usize) -> Result<Self> {
        let valid = order >= 4 && {
            let mut m = order;
            while m % 4 == 0 {
                m /= 4;
            }
            m == 1
        };
        if !valid {
            return Err(Error::Parameter(format!(
                "QAM order must be a power of 4, got {order}"
            )));
        }
        let side = (order as f64).sqrt().round() as usize;
        let bits_per_axis = side.trailing_zeros() as usize;
        // E[level^2] per axis = (side^2 - 1) / 3, two axes
        let mean_power = 2.0 * ((side * side - 1) as f64) / 3.0;
        let scale = mean_power.sqrt().recip();

        let level = |bits: usize| -> f64 {
            let pos = gray_to_index(bits);
            (2 * pos) as f64 - (side - 1) as f64
        };
        let symbols = (0..order)
            .map(|s| {
                let i_bits = s >> bits_per_axis;
                let q_bits = s & (side - 1);
                Cx::new(level(i_bits) * scale, level(q_bits) * scale)
            })
            .collect();
        Ok(QamAlphabet {
            order,
            symbols,
            scale,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn symbols(&self) -> &[Cx] {
        &self.symbols
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    pub fn draw(&self, rng: &mut Prng) -> Cx {
        self.symbols[rng.gen_range(0..self.order)]
    }
}

/// Uniform i.i.d. symbols from the alphabet.
pub fn gen_qam(alphabet: &QamAlphabet, rng: &mut Prng, count: usize) -> Vec<Cx> {
    (0..count).map(|_| alphabet.draw(rng)).collect()
}

/// Noise variance for a given Eb/N0 in dB, unit symbol energy.
pub fn noise_variance_from_ebn0(ebn0_db: f64, bits_per_symbol: usize) -> Result<f64> {
    if bits_per_symbol == 0 {
        return Err(Error::Parameter("bits_per_symbol must be positive".into()));
    }
    let n0 = (1.0 / bits_per_symbol as f64) / 10f64.powf(ebn0_db / 10.0);
    if !(n0 >= 0.0) {
        return Err(Error::Parameter(format!("invalid Eb/N0 {ebn0_db} dB")));
    }
    Ok(n0)
}

/// One channel realization: a MIMO matrix and the per-sample complex noise
/// variance.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInstance {
    /// RX_ANTENNAS x TX_ANTENNAS channel matrix.
    pub h: CMat,
    /// Total complex noise variance per received sample.
    pub noise_variance: f64,
}

impl ChannelInstance {
    /// i.i.d. circular complex Gaussian entries (Rayleigh-magnitude
    /// sub-channels) with unit average power.
    pub fn rayleigh(rng: &mut Prng, noise_variance: f64) -> Self {
        let n = Normal::new(0.0, (0.5f64).sqrt()).expect("valid std");
        let mut h = CMat::zeros(RX_ANTENNAS, TX_ANTENNAS);
        for z in h.iter_mut() {
            *z = Cx::new(n.sample(rng), n.sample(rng));
        }
        ChannelInstance { h, noise_variance }
    }

    pub fn identity(noise_variance: f64) -> Self {
        let mut h = CMat::zeros(RX_ANTENNAS, TX_ANTENNAS);
        for i in 0..RX_ANTENNAS.min(TX_ANTENNAS) {
            h[(i, i)] = Cx::new(1.0, 0.0);
        }
        ChannelInstance { h, noise_variance }
    }

    /// Mean received signal power per component for this realization.
    pub fn mean_signal_power(&self) -> f64 {
        let total: f64 = self.h.iter().map(|z| z.norm_sqr()).sum();
        total / RX_ANTENNAS as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub count: usize,
    pub ebn0_db: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub seed: u64,
    pub ebn0_db: f64,
    pub count: usize,
    pub inputs: usize,
    pub outputs: usize,
}

/// Paired complex inputs and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<Vec<Cx>>,
    pub targets: Vec<Vec<Cx>>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Borrowing split into a head of `n` instances and the tail.
    pub fn split_at(&self, n: usize) -> ((&[Vec<Cx>], &[Vec<Cx>]), (&[Vec<Cx>], &[Vec<Cx>])) {
        (
            (&self.inputs[..n], &self.targets[..n]),
            (&self.inputs[n..], &self.targets[n..]),
        )
    }
}

/// Instances pushed through one channel realization. `clean_inputs` holds
/// the noise-free received signals for power measurements.
#[derive(Debug, Clone)]
pub struct ChannelBatch {
    pub inputs: Vec<Vec<Cx>>,
    pub targets: Vec<Vec<Cx>>,
    pub clean_inputs: Vec<Vec<Cx>>,
}

/// Transmit `count` random symbol vectors through `channel`.
pub fn gen_through_channel(
    channel: &ChannelInstance,
    alphabet: &QamAlphabet,
    count: usize,
    rng: &mut Prng,
) -> Result<ChannelBatch> {
    if count == 0 {
        return Err(Error::Parameter("instance count must be positive".into()));
    }
    let noise_std = (channel.noise_variance / 2.0).sqrt();
    let noise = if noise_std > 0.0 {
        Some(Normal::new(0.0, noise_std).expect("valid std"))
    } else {
        None
    };

    let mut batch = ChannelBatch {
        inputs: Vec::with_capacity(count),
        targets: Vec::with_capacity(count),
        clean_inputs: Vec::with_capacity(count),
    };
    for _ in 0..count {
        let d = gen_qam(alphabet, rng, TX_ANTENNAS);
        let received = channel.h.matvec(&d)?;
        let mut clean = Vec::with_capacity(INPUT_WIDTH);
        let mut noisy = Vec::with_capacity(INPUT_WIDTH);
        for _slot in 0..REUSE_SLOTS {
            for &r in &received {
                clean.push(r);
                let n = match &noise {
                    Some(dist) => Cx::new(dist.sample(rng), dist.sample(rng)),
                    None => Cx::new(0.0, 0.0),
                };
                noisy.push(r + n);
            }
        }
        batch.clean_inputs.push(clean);
        batch.inputs.push(noisy);
        batch.targets.push(d);
    }
    Ok(batch)
}

/// Generate a dataset: one Rayleigh channel draw, then `count` instances.
/// Fully determined by the config.
pub fn gen_dataset(cfg: &DatasetConfig) -> Result<Dataset> {
    let alphabet = QamAlphabet::new(16)?;
    let n0 = noise_variance_from_ebn0(cfg.ebn0_db, alphabet.bits_per_symbol())?;
    let mut rng = seeded(derive_seed(cfg.seed, 0x7a51));
    let channel = ChannelInstance::rayleigh(&mut rng, n0);
    let batch = gen_through_channel(&channel, &alphabet, cfg.count, &mut rng)?;
    Ok(Dataset {
        inputs: batch.inputs,
        targets: batch.targets,
        meta: DatasetMeta {
            seed: cfg.seed,
            ebn0_db: cfg.ebn0_db,
            count: cfg.count,
            inputs: INPUT_WIDTH,
            outputs: OUTPUT_WIDTH,
        },
    })
}

/// Write the columnar text format: `#`-prefixed metadata, a header row,
/// then one instance per row as re/im pairs. Floats use shortest
/// round-trip formatting, so import is bit-exact.
pub fn write_dataset(ds: &Dataset, w: &mut impl std::io::Write) -> Result<()> {
    let io_err = |e| Error::io("writing dataset", e);
    writeln!(w, "{DATASET_HEADER}").map_err(io_err)?;
    writeln!(w, "# seed={}", ds.meta.seed).map_err(io_err)?;
    writeln!(w, "# ebn0_db={}", ds.meta.ebn0_db).map_err(io_err)?;
    writeln!(w, "# count={}", ds.meta.count).map_err(io_err)?;
    writeln!(w, "# inputs={}", ds.meta.inputs).map_err(io_err)?;
    writeln!(w, "# outputs={}", ds.meta.outputs).map_err(io_err)?;
    let mut header = Vec::new();
    for i in 0..ds.meta.inputs {
        header.push(format!("x{i}_re"));
        header.push(format!("x{i}_im"));
    }
    for o in 0..ds.meta.outputs {
        header.push(format!("d{o}_re"));
        header.push(format!("d{o}_im"));
    }
    writeln!(w, "{}", header.join(",")).map_err(io_err)?;
    for (x, d) in ds.inputs.iter().zip(&ds.targets) {
        let mut row = Vec::with_capacity(2 * (x.len() + d.len()));
        for z in x.iter().chain(d) {
            row.push(format!("{}", z.re));
            row.push(format!("{}", z.im));
        }
        writeln!(w, "{}", row.join(",")).map_err(io_err)?;
    }
    Ok(())
}

pub fn save_dataset(ds: &Dataset, path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    let mut w = std::io::BufWriter::new(file);
    write_dataset(ds, &mut w)
}

fn parse_meta_line(line: &str, key: &str) -> Result<f64> {
    let prefix = format!("# {key}=");
    line.strip_prefix(&prefix)
        .ok_or_else(|| Error::Format(format!("expected metadata line '{prefix}...', got '{line}'")))?
        .parse::<f64>()
        .map_err(|e| Error::Format(format!("metadata {key}: {e}")))
}

/// Parse the columnar text format written by [`write_dataset`].
pub fn read_dataset(text: &str) -> Result<Dataset> {
    let mut lines = text.lines();
    let first = lines.next().unwrap_or_default();
    if first != DATASET_HEADER {
        return Err(Error::Format(format!(
            "not a dataset file (header '{first}', expected '{DATASET_HEADER}')"
        )));
    }
    let seed = parse_meta_line(lines.next().unwrap_or_default(), "seed")? as u64;
    let ebn0_db = parse_meta_line(lines.next().unwrap_or_default(), "ebn0_db")?;
    let count = parse_meta_line(lines.next().unwrap_or_default(), "count")? as usize;
    let inputs = parse_meta_line(lines.next().unwrap_or_default(), "inputs")? as usize;
    let outputs = parse_meta_line(lines.next().unwrap_or_default(), "outputs")? as usize;
    let _header = lines.next().ok_or_else(|| Error::Format("missing column header".into()))?;

    let mut ds = Dataset {
        inputs: Vec::with_capacity(count),
        targets: Vec::with_capacity(count),
        meta: DatasetMeta {
            seed,
            ebn0_db,
            count,
            inputs,
            outputs,
        },
    };
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.parse::<f64>().map_err(|e| Error::Format(format!("field '{f}': {e}"))))
            .collect::<Result<_>>()?;
        if fields.len() != 2 * (inputs + outputs) {
            return Err(Error::Format(format!(
                "row has {} fields, expected {}",
                fields.len(),
                2 * (inputs + outputs)
            )));
        }
        let to_complex = |chunk: &[f64]| -> Vec<Cx> {
            chunk.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
        };
        ds.inputs.push(to_complex(&fields[..2 * inputs]));
        ds.targets.push(to_complex(&fields[2 * inputs..]));
    }
    if ds.inputs.len() != count {
        return Err(Error::Format(format!(
            "declared {count} instances, found {}",
            ds.inputs.len()
        )));
    }
    Ok(ds)
}

pub fn load_dataset(path: &std::path::Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    read_dataset(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_qam_alphabet_power_and_levels() {
        let qam = QamAlphabet::new(16).unwrap();
        assert_eq!(qam.symbols().len(), 16);
        let power: f64 = qam.symbols().iter().map(|s| s.norm_sqr()).sum::<f64>() / 16.0;
        assert!((power - 1.0).abs() < 1e-12, "mean power {power}");
        // levels are {±1, ±3}/sqrt(10)
        let scale = 10f64.sqrt().recip();
        for s in qam.symbols() {
            let re = (s.re / scale).round();
            assert!((re - s.re / scale).abs() < 1e-12 && [1.0, 3.0].contains(&re.abs()));
        }
    }

    #[test]
    fn qpsk_alphabet() {
        let qam = QamAlphabet::new(4).unwrap();
        let want = 2f64.sqrt().recip();
        for s in qam.symbols() {
            assert!((s.re.abs() - want).abs() < 1e-12);
            assert!((s.im.abs() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn gray_labels_differ_in_one_bit_between_adjacent_levels() {
        let qam = QamAlphabet::new(16).unwrap();
        // group labels by in-phase level; walking levels in ascending order
        // must flip exactly one bit of the axis label
        let mut by_level: Vec<(f64, usize)> = (0..16)
            .map(|s| (qam.symbols()[s].re, s >> 2))
            .collect();
        by_level.sort_by(|a, b| a.0.total_cmp(&b.0));
        by_level.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12 && a.1 == b.1);
        let labels: Vec<usize> = by_level.iter().map(|&(_, b)| b).collect();
        for w in labels.windows(2) {
            assert_eq!((w[0] ^ w[1]).count_ones(), 1, "labels {labels:?}");
        }
    }

    #[test]
    fn invalid_order_rejected() {
        for m in [0, 2, 8, 32, 15] {
            assert!(QamAlphabet::new(m).is_err(), "order {m}");
        }
    }

    #[test]
    fn symbol_histogram_is_uniform() {
        let qam = QamAlphabet::new(16).unwrap();
        let mut rng = seeded(100);
        let draws = gen_qam(&qam, &mut rng, 100_000);
        let mut counts = vec![0usize; 16];
        for d in &draws {
            let idx = qam.symbols().iter().position(|s| s == d).unwrap();
            counts[idx] += 1;
        }
        // 3-sigma multinomial bound: sd = sqrt(n p (1-p))
        let expect = 100_000.0 / 16.0;
        let bound = 3.0 * (100_000.0 * (1.0 / 16.0) * (15.0 / 16.0)).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - expect).abs() <= bound,
                "symbol {i}: count {c} outside {expect}±{bound}"
            );
        }
    }

    #[test]
    fn noiseless_identity_channel_reproduces_symbols() {
        let qam = QamAlphabet::new(16).unwrap();
        let channel = ChannelInstance::identity(0.0);
        let batch = gen_through_channel(&channel, &qam, 32, &mut seeded(101)).unwrap();
        for (x, d) in batch.inputs.iter().zip(&batch.targets) {
            for slot in 0..REUSE_SLOTS {
                for (r, want) in x[slot * RX_ANTENNAS..(slot + 1) * RX_ANTENNAS].iter().zip(d) {
                    assert_eq!(r, want);
                }
            }
        }
    }

    #[test]
    fn dataset_is_deterministic_per_seed() {
        let cfg = DatasetConfig {
            count: 64,
            ebn0_db: 26.0,
            seed: 7,
        };
        let a = gen_dataset(&cfg).unwrap();
        let b = gen_dataset(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_snr_matches_configuration() {
        let qam = QamAlphabet::new(16).unwrap();
        let n0 = noise_variance_from_ebn0(26.0, 4).unwrap();
        let mut rng = seeded(102);
        let channel = ChannelInstance::rayleigh(&mut rng, n0);
        let batch = gen_through_channel(&channel, &qam, 10_000, &mut rng).unwrap();
        let mut p_sig = 0.0;
        let mut p_noise = 0.0;
        let mut n = 0usize;
        for (x, clean) in batch.inputs.iter().zip(&batch.clean_inputs) {
            for (noisy, c) in x.iter().zip(clean) {
                p_sig += c.norm_sqr();
                p_noise += (noisy - c).norm_sqr();
                n += 1;
            }
        }
        p_sig /= n as f64;
        p_noise /= n as f64;
        let snr_db = 10.0 * (p_sig / p_noise).log10();
        let expected_db = 10.0 * (channel.mean_signal_power() / n0).log10();
        assert!(
            (snr_db - expected_db).abs() < 0.2,
            "snr {snr_db} dB vs expected {expected_db} dB"
        );
    }

    #[test]
    fn targets_are_alphabet_members_and_dims_fixed() {
        let ds = gen_dataset(&DatasetConfig {
            count: 50,
            ebn0_db: 20.0,
            seed: 3,
        })
        .unwrap();
        let qam = QamAlphabet::new(16).unwrap();
        for (x, d) in ds.inputs.iter().zip(&ds.targets) {
            assert_eq!(x.len(), INPUT_WIDTH);
            assert_eq!(d.len(), OUTPUT_WIDTH);
            for s in d {
                assert!(qam.symbols().contains(s));
            }
        }
    }

    #[test]
    fn zero_count_rejected() {
        assert!(gen_dataset(&DatasetConfig {
            count: 0,
            ebn0_db: 26.0,
            seed: 1,
        })
        .is_err());
    }

    #[test]
    fn dataset_file_round_trip_is_bit_exact() {
        let ds = gen_dataset(&DatasetConfig {
            count: 20,
            ebn0_db: 26.0,
            seed: 11,
        })
        .unwrap();
        let mut buf = Vec::new();
        write_dataset(&ds, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = read_dataset(&text).unwrap();
        assert_eq!(ds.meta, back.meta);
        for (a, b) in ds.inputs.iter().flatten().zip(back.inputs.iter().flatten()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        for (a, b) in ds.targets.iter().flatten().zip(back.targets.iter().flatten()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn malformed_dataset_rejected() {
        assert!(read_dataset("not a dataset").is_err());
        let ds = gen_dataset(&DatasetConfig {
            count: 2,
            ebn0_db: 26.0,
            seed: 1,
        })
        .unwrap();
        let mut buf = Vec::new();
        write_dataset(&ds, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let truncated: String = text.lines().take(7).collect::<Vec<_>>().join("\n");
        assert!(read_dataset(&truncated).is_err());
    }
}
