//! The Conv-3 and Conv-5 classifiers.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::init::truncated_normal;
use super::layers::*;
use super::Tensor;
use crate::error::invalid;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    /// One wide convolution, aggressive pooling, large dense layer.
    Conv3,
    /// Three narrower convolutions with gentler pooling.
    Conv5,
}

impl Architecture {
    pub fn name(self) -> &'static str {
        match self {
            Architecture::Conv3 => "conv3",
            Architecture::Conv5 => "conv5",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "conv3" => Some(Architecture::Conv3),
            "conv5" => Some(Architecture::Conv5),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterShape {
    /// 3x3 kernels.
    Square3x3,
    /// Kernels spanning every frequency row (Mx3), i.e. 1-D convolution over
    /// time.
    FreqSpanning,
}

impl FilterShape {
    pub fn name(self) -> &'static str {
        match self {
            FilterShape::Square3x3 => "3x3",
            FilterShape::FreqSpanning => "Mx3",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "3x3" => Some(FilterShape::Square3x3),
            "Mx3" | "mx3" => Some(FilterShape::FreqSpanning),
            _ => None,
        }
    }
}

/// One convolution stage: conv -> ReLU -> (dropout) -> max pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConvStage {
    pub channels: usize,
    pub pool: (usize, usize),
    pub dropout: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub architecture: Architecture,
    pub filter: FilterShape,
    pub stages: Vec<ConvStage>,
    pub dense_units: usize,
    pub dropout: f64,
    pub l2: f64,
    pub n_classes: usize,
}

impl ModelConfig {
    pub fn new(architecture: Architecture, filter: FilterShape, n_classes: usize) -> Self {
        let stages = match architecture {
            Architecture::Conv3 => vec![ConvStage {
                channels: 64,
                pool: (4, 4),
                dropout: true,
            }],
            Architecture::Conv5 => vec![
                ConvStage {
                    channels: 32,
                    pool: (2, 2),
                    dropout: true,
                },
                ConvStage {
                    channels: 64,
                    pool: (2, 2),
                    dropout: false,
                },
                ConvStage {
                    channels: 64,
                    pool: (2, 2),
                    dropout: false,
                },
            ],
        };
        Self {
            architecture,
            filter,
            stages,
            dense_units: match architecture {
                Architecture::Conv3 => 512,
                Architecture::Conv5 => 256,
            },
            dropout: 0.5,
            l2: 1e-3,
            n_classes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let expected = match self.architecture {
            Architecture::Conv3 => 1,
            Architecture::Conv5 => 3,
        };
        if self.stages.len() != expected {
            return Err(invalid!(
                "{} needs {expected} convolution stages, got {}",
                self.architecture.name(),
                self.stages.len()
            ));
        }
        if self.n_classes < 2 {
            return Err(invalid!("need at least two classes"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(invalid!("dropout rate must be in [0, 1)"));
        }
        if self.l2 < 0.0 {
            return Err(invalid!("L2 coefficient must be nonnegative"));
        }
        if self.dense_units == 0 || self.stages.iter().any(|s| s.channels == 0) {
            return Err(invalid!("layer widths must be positive"));
        }
        Ok(())
    }
}

/// A named parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
    /// Weights are L2-regularized and randomly initialized; biases are not.
    pub is_weight: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet {
    params: Vec<Param>,
}

impl ParamSet {
    pub fn new(params: Vec<Param>) -> Self {
        Self { params }
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Param> {
        self.params.iter()
    }

    pub fn iter_mut(&mut self) -> core::slice::IterMut<'_, Param> {
        self.params.iter_mut()
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Same names and shapes, all zeros.
    pub fn zeros_like(&self) -> Self {
        Self {
            params: self
                .params
                .iter()
                .map(|p| Param {
                    data: vec![0.0; p.data.len()],
                    ..p.clone()
                })
                .collect(),
        }
    }

    /// Total scalar parameter count.
    pub fn n_values(&self) -> usize {
        self.params.iter().map(|p| p.data.len()).sum()
    }

    /// Sum of squared weights (biases excluded).
    pub fn weight_sq_norm(&self) -> f64 {
        self.params
            .iter()
            .filter(|p| p.is_weight)
            .flat_map(|p| p.data.iter())
            .map(|w| w * w)
            .sum()
    }

    fn tensor(&self, idx: usize) -> Tensor {
        Tensor::from_vec(&self.params[idx].shape, self.params[idx].data.clone())
    }
}

impl core::ops::Index<usize> for ParamSet {
    type Output = Param;

    fn index(&self, i: usize) -> &Param {
        &self.params[i]
    }
}

impl core::ops::IndexMut<usize> for ParamSet {
    fn index_mut(&mut self, i: usize) -> &mut Param {
        &mut self.params[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Layer {
    /// Weight at `param`, bias at `param + 1`.
    Conv { param: usize },
    Relu,
    Dropout,
    Pool { h: usize, w: usize },
    Flatten,
    Dense { param: usize },
}

enum Cache {
    Conv { input: Tensor },
    Relu { output: Tensor },
    Dropout { mask: Vec<f64> },
    Pool { input_shape: Vec<usize>, argmax: Vec<usize> },
    Flatten { input_shape: Vec<usize> },
    Dense { input: Tensor },
}

/// A model configuration resolved against a concrete input size.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    config: ModelConfig,
    input: (usize, usize),
    layers: Vec<Layer>,
    shapes: Vec<(String, Vec<usize>, bool)>,
}

impl Network {
    /// Resolves kernel and pool sizes for `rows x cols` single-channel input.
    ///
    /// Square kernels are 3x3, frequency-spanning kernels cover every
    /// remaining row; either is clipped to the current feature-map size, so
    /// deep stacks on narrow inputs stay valid.
    pub fn new(config: &ModelConfig, rows: usize, cols: usize) -> Result<Self> {
        config.validate()?;
        if rows == 0 || cols == 0 {
            return Err(invalid!("input must be non-empty"));
        }
        let mut layers = Vec::new();
        let mut shapes = Vec::new();
        let (mut c, mut h, mut w) = (1usize, rows, cols);
        for (i, stage) in config.stages.iter().enumerate() {
            let kh = match config.filter {
                FilterShape::Square3x3 => 3.min(h),
                FilterShape::FreqSpanning => h,
            };
            let kw = 3.min(w);
            layers.push(Layer::Conv {
                param: shapes.len(),
            });
            shapes.push((format!("conv{}.weight", i + 1), vec![stage.channels, c, kh, kw], true));
            shapes.push((format!("conv{}.bias", i + 1), vec![stage.channels], false));
            c = stage.channels;
            h = h - kh + 1;
            w = w - kw + 1;
            layers.push(Layer::Relu);
            if stage.dropout {
                layers.push(Layer::Dropout);
            }
            let (ph, pw) = (stage.pool.0.min(h), stage.pool.1.min(w));
            layers.push(Layer::Pool { h: ph, w: pw });
            h = h.div_ceil(ph);
            w = w.div_ceil(pw);
        }
        layers.push(Layer::Flatten);
        let flat = c * h * w;
        layers.push(Layer::Dense {
            param: shapes.len(),
        });
        shapes.push(("dense1.weight".into(), vec![config.dense_units, flat], true));
        shapes.push(("dense1.bias".into(), vec![config.dense_units], false));
        layers.push(Layer::Relu);
        layers.push(Layer::Dropout);
        layers.push(Layer::Dense {
            param: shapes.len(),
        });
        shapes.push(("dense2.weight".into(), vec![config.n_classes, config.dense_units], true));
        shapes.push(("dense2.bias".into(), vec![config.n_classes], false));
        Ok(Self {
            config: config.clone(),
            input: (rows, cols),
            layers,
            shapes,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn input_shape(&self) -> (usize, usize) {
        self.input
    }

    /// Shapes of the parameter tensors in order.
    pub fn param_shapes(&self) -> impl Iterator<Item = (&str, &[usize])> {
        self.shapes.iter().map(|(n, s, _)| (n.as_str(), s.as_slice()))
    }

    /// Height of the first convolution's output.
    pub fn first_conv_output_height(&self) -> usize {
        let kh = self.shapes[0].1[2];
        self.input.0 - kh + 1
    }

    /// Truncated-normal weights (std `init_std`, cut at 2 std) and zero
    /// biases, drawn in parameter order from a ChaCha8 stream seeded with
    /// `seed`.
    pub fn init_params(&self, seed: u64, init_std: f64) -> ParamSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = self
            .shapes
            .iter()
            .map(|(name, shape, is_weight)| {
                let n: usize = shape.iter().product();
                let data = if *is_weight {
                    (0..n).map(|_| truncated_normal(&mut rng, init_std)).collect()
                } else {
                    vec![0.0; n]
                };
                Param {
                    name: name.clone(),
                    shape: shape.clone(),
                    data,
                    is_weight: *is_weight,
                }
            })
            .collect();
        ParamSet::new(params)
    }

    fn check_params(&self, params: &ParamSet) -> Result<()> {
        if params.len() != self.shapes.len()
            || params
                .iter()
                .zip(&self.shapes)
                .any(|(p, (_, s, _))| &p.shape != s)
        {
            return Err(Error::ShapeMismatch {
                expected: format!("{} parameter tensors for this network", self.shapes.len()),
                found: format!("{} tensors with other shapes", params.len()),
            });
        }
        Ok(())
    }

    fn check_batch(&self, batch: &Tensor) -> Result<()> {
        let expected = [batch.batch(), 1, self.input.0, self.input.1];
        if batch.shape() != expected {
            return Err(Error::ShapeMismatch {
                expected: format!("{expected:?}"),
                found: format!("{:?}", batch.shape()),
            });
        }
        Ok(())
    }

    fn run(
        &self,
        params: &ParamSet,
        batch: &Tensor,
        mut dropout_rng: Option<&mut dyn RngCore>,
        mut caches: Option<&mut Vec<Cache>>,
    ) -> Result<Tensor> {
        self.check_params(params)?;
        self.check_batch(batch)?;
        let mut x = batch.clone();
        for layer in &self.layers {
            let (next, cache) = match *layer {
                Layer::Conv { param } => {
                    let y = conv2d_forward(&x, &params.tensor(param), &params[param + 1].data)?;
                    (y, Cache::Conv { input: x })
                }
                Layer::Relu => {
                    for v in x.data_mut() {
                        *v = v.max(0.0);
                    }
                    let output = if caches.is_some() {
                        x.clone()
                    } else {
                        Tensor::zeros(&[0])
                    };
                    (x, Cache::Relu { output })
                }
                Layer::Dropout => match dropout_rng.as_deref_mut() {
                    Some(rng) if self.config.dropout > 0.0 => {
                        let mask = dropout_mask(x.len(), self.config.dropout, rng);
                        for (v, m) in x.data_mut().iter_mut().zip(&mask) {
                            *v *= m;
                        }
                        (x, Cache::Dropout { mask })
                    }
                    _ => {
                        let mask = Vec::new();
                        (x, Cache::Dropout { mask })
                    }
                },
                Layer::Pool { h, w } => {
                    let p = maxpool_forward(&x, h, w)?;
                    (
                        p.output,
                        Cache::Pool {
                            input_shape: x.shape().to_vec(),
                            argmax: p.argmax,
                        },
                    )
                }
                Layer::Flatten => {
                    let shape = x.shape().to_vec();
                    let (b, n) = (x.batch(), x.item_len());
                    (x.reshape(&[b, n]), Cache::Flatten { input_shape: shape })
                }
                Layer::Dense { param } => {
                    let y = dense_forward(&x, &params.tensor(param), &params[param + 1].data)?;
                    (y, Cache::Dense { input: x })
                }
            };
            if let Some(c) = caches.as_deref_mut() {
                c.push(cache);
            }
            x = next;
        }
        Ok(x)
    }

    /// Logits `[batch, n_classes]` for a `[batch, 1, rows, cols]` input.
    ///
    /// With `dropout_rng` set, dropout is active (training mode); otherwise
    /// it is the identity, which is exact for inverted dropout.
    pub fn forward(
        &self,
        params: &ParamSet,
        batch: &Tensor,
        dropout_rng: Option<&mut dyn RngCore>,
    ) -> Result<Tensor> {
        self.run(params, batch, dropout_rng, None)
    }

    /// Argmax class per batch item, evaluation mode.
    pub fn predict(&self, params: &ParamSet, batch: &Tensor) -> Result<Vec<usize>> {
        let logits = self.forward(params, batch, None)?;
        Ok((0..logits.batch())
            .map(|b| {
                let row = logits.item(b);
                let mut best = 0;
                for (i, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = i;
                    }
                }
                best
            })
            .collect())
    }

    /// Mean softmax cross-entropy plus `l2 * sum(W^2)` over weight tensors,
    /// and the gradient of that loss for every parameter.
    pub fn loss_and_grads(
        &self,
        params: &ParamSet,
        batch: &Tensor,
        labels: &[usize],
        dropout_rng: Option<&mut dyn RngCore>,
    ) -> Result<(f64, ParamSet)> {
        if labels.len() != batch.batch() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} labels", batch.batch()),
                found: format!("{} labels", labels.len()),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= self.config.n_classes) {
            return Err(Error::OutOfRange(format!(
                "label {bad} with {} classes",
                self.config.n_classes
            )));
        }
        let mut caches = Vec::with_capacity(self.layers.len());
        let logits = self.run(params, batch, dropout_rng, Some(&mut caches))?;
        let (ce, mut grad) = softmax_cross_entropy(&logits, labels);
        let loss = ce + self.config.l2 * params.weight_sq_norm();

        let mut grads = params.zeros_like();
        for (layer, cache) in self.layers.iter().zip(caches).rev() {
            grad = match (*layer, cache) {
                (Layer::Conv { param }, Cache::Conv { input }) => {
                    let (gw, gb) = split_pair(&mut grads, param);
                    if param == 0 {
                        // The network input needs no gradient.
                        conv2d_param_grads(&input, &params.tensor(param), &grad, gw, gb)?;
                        grad
                    } else {
                        conv2d_backward(&input, &params.tensor(param), &grad, gw, gb)?
                    }
                }
                (Layer::Relu, Cache::Relu { output }) => {
                    relu_backward_in_place(&output, &mut grad);
                    grad
                }
                (Layer::Dropout, Cache::Dropout { mask }) => {
                    for (g, m) in grad.data_mut().iter_mut().zip(&mask) {
                        *g *= m;
                    }
                    grad
                }
                (Layer::Pool { .. }, Cache::Pool { input_shape, argmax }) => {
                    maxpool_backward(&input_shape, &argmax, &grad)
                }
                (Layer::Flatten, Cache::Flatten { input_shape }) => grad.reshape(&input_shape),
                (Layer::Dense { param }, Cache::Dense { input }) => {
                    let (gw, gb) = split_pair(&mut grads, param);
                    dense_backward(&input, &params.tensor(param), &grad, gw, gb)
                }
                _ => unreachable!("layer/cache mismatch"),
            };
        }
        if self.config.l2 > 0.0 {
            for (g, p) in grads.iter_mut().zip(params.iter()) {
                if p.is_weight {
                    for (gv, &pv) in g.data.iter_mut().zip(&p.data) {
                        *gv += 2.0 * self.config.l2 * pv;
                    }
                }
            }
        }
        Ok((loss, grads))
    }
}

fn split_pair(grads: &mut ParamSet, idx: usize) -> (&mut [f64], &mut [f64]) {
    let (a, b) = grads.params.split_at_mut(idx + 1);
    (&mut a[idx].data, &mut b[0].data)
}

/// Mean cross-entropy of `softmax(logits)` against `labels` and its gradient
/// with respect to the logits.
pub fn softmax_cross_entropy(logits: &Tensor, labels: &[usize]) -> (f64, Tensor) {
    let b = logits.batch();
    let mut grad = Tensor::zeros(logits.shape());
    let mut total = 0.0;
    for (n, &label) in labels.iter().enumerate() {
        let z = logits.item(n);
        let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = z.iter().map(|&v| libm::exp(v - m)).sum();
        let lse = m + libm::log(sum);
        total += lse - z[label];
        let g = grad.item_mut(n);
        for (gi, &zi) in g.iter_mut().zip(z) {
            *gi = libm::exp(zi - lse) / b as f64;
        }
        g[label] -= 1.0 / b as f64;
    }
    (total / b as f64, grad)
}

/// `Tensor` of shape `[items, 1, rows, cols]` from flat row-major images.
pub fn batch_from_images<'a>(
    images: impl IntoIterator<Item = &'a [f64]>,
    rows: usize,
    cols: usize,
) -> Tensor {
    let mut data = Vec::new();
    let mut n = 0;
    for img in images {
        assert_eq!(img.len(), rows * cols, "image size mismatch");
        data.extend_from_slice(img);
        n += 1;
    }
    Tensor::from_vec(&[n, 1, rows, cols], data)
}
