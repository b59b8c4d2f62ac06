//! Batched layer kernels with their analytic backward passes.
//!
//! Activations are `[batch, channels, height, width]` tensors for the
//! convolutional part and `[batch, features]` for the dense part.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use super::gemm::{add_ab, add_abt, add_atb};
use super::Tensor;
use crate::{Error, Result};

fn dims4(t: &Tensor) -> Result<[usize; 4]> {
    match *t.shape() {
        [b, c, h, w] => Ok([b, c, h, w]),
        ref s => Err(Error::ShapeMismatch {
            expected: "[batch, channels, height, width]".into(),
            found: format!("{s:?}"),
        }),
    }
}

/// Unrolls one `[c, h, w]` image into a `(c*kh*kw) x (oh*ow)` patch matrix.
fn im2col(img: &[f64], c: usize, h: usize, w: usize, kh: usize, kw: usize, col: &mut [f64]) {
    let (oh, ow) = (h - kh + 1, w - kw + 1);
    let p = oh * ow;
    for ch in 0..c {
        for i in 0..kh {
            for j in 0..kw {
                let row = ((ch * kh + i) * kw + j) * p;
                for y in 0..oh {
                    let src = &img[(ch * h + y + i) * w + j..][..ow];
                    col[row + y * ow..row + (y + 1) * ow].copy_from_slice(src);
                }
            }
        }
    }
}

/// Adjoint of [`im2col`]: scatters patch gradients back onto the image.
fn col2im(col: &[f64], c: usize, h: usize, w: usize, kh: usize, kw: usize, img: &mut [f64]) {
    let (oh, ow) = (h - kh + 1, w - kw + 1);
    let p = oh * ow;
    for ch in 0..c {
        for i in 0..kh {
            for j in 0..kw {
                let row = ((ch * kh + i) * kw + j) * p;
                for y in 0..oh {
                    let dst = &mut img[(ch * h + y + i) * w + j..][..ow];
                    for (d, &s) in dst.iter_mut().zip(&col[row + y * ow..row + (y + 1) * ow]) {
                        *d += s;
                    }
                }
            }
        }
    }
}

/// Valid, stride-1 cross-correlation.
///
/// `weight` is `[out_ch, in_ch, kh, kw]`; output is
/// `[batch, out_ch, h - kh + 1, w - kw + 1]`.
pub fn conv2d_forward(input: &Tensor, weight: &Tensor, bias: &[f64]) -> Result<Tensor> {
    let [b, c, h, w] = dims4(input)?;
    let [o, wc, kh, kw] = dims4(weight)?;
    if wc != c || bias.len() != o {
        return Err(Error::ShapeMismatch {
            expected: format!("{c} input channels and {o} biases"),
            found: format!("{wc} kernel channels and {} biases", bias.len()),
        });
    }
    if kh > h || kw > w || kh == 0 || kw == 0 {
        return Err(Error::ShapeMismatch {
            expected: format!("kernel no larger than {h}x{w}"),
            found: format!("{kh}x{kw}"),
        });
    }
    let (oh, ow) = (h - kh + 1, w - kw + 1);
    let p = oh * ow;
    let ck = c * kh * kw;
    let mut out = Tensor::zeros(&[b, o, oh, ow]);
    let mut col = vec![0.0; ck * p];
    for n in 0..b {
        im2col(input.item(n), c, h, w, kh, kw, &mut col);
        let dst = out.item_mut(n);
        for (oc, &bv) in bias.iter().enumerate() {
            dst[oc * p..(oc + 1) * p].fill(bv);
        }
        add_ab(dst, weight.data(), &col, o, ck, p);
    }
    Ok(out)
}

/// Gradients of [`conv2d_forward`] given the upstream gradient `grad_out`.
///
/// Accumulates into `grad_weight` and `grad_bias`; returns the input gradient.
pub fn conv2d_backward(
    input: &Tensor,
    weight: &Tensor,
    grad_out: &Tensor,
    grad_weight: &mut [f64],
    grad_bias: &mut [f64],
) -> Result<Tensor> {
    conv2d_param_grads(input, weight, grad_out, grad_weight, grad_bias)?;
    let [b, c, h, w] = dims4(input)?;
    let [o, _, kh, kw] = dims4(weight)?;
    let p = (h - kh + 1) * (w - kw + 1);
    let ck = c * kh * kw;
    let mut grad_in = Tensor::zeros(&[b, c, h, w]);
    let mut dcol = vec![0.0; ck * p];
    for n in 0..b {
        dcol.fill(0.0);
        add_atb(&mut dcol, weight.data(), grad_out.item(n), ck, o, p);
        col2im(&dcol, c, h, w, kh, kw, grad_in.item_mut(n));
    }
    Ok(grad_in)
}

/// The weight and bias half of [`conv2d_backward`], for layers whose input
/// gradient is not needed.
pub fn conv2d_param_grads(
    input: &Tensor,
    weight: &Tensor,
    grad_out: &Tensor,
    grad_weight: &mut [f64],
    grad_bias: &mut [f64],
) -> Result<()> {
    let [b, c, h, w] = dims4(input)?;
    let [o, _, kh, kw] = dims4(weight)?;
    let expected = [b, o, h - kh + 1, w - kw + 1];
    if grad_out.shape() != expected {
        return Err(Error::ShapeMismatch {
            expected: format!("{expected:?}"),
            found: format!("{:?}", grad_out.shape()),
        });
    }
    let p = expected[2] * expected[3];
    let ck = c * kh * kw;
    let mut col = vec![0.0; ck * p];
    for n in 0..b {
        let g = grad_out.item(n);
        im2col(input.item(n), c, h, w, kh, kw, &mut col);
        add_abt(grad_weight, g, &col, o, p, ck);
        for (oc, gb) in grad_bias.iter_mut().enumerate() {
            *gb += g[oc * p..(oc + 1) * p].iter().sum::<f64>();
        }
    }
    Ok(())
}

/// Output of [`maxpool_forward`]: pooled values plus, for every output
/// element, the flat input index it was taken from.
#[derive(Debug, Clone, PartialEq)]
pub struct Pooled {
    pub output: Tensor,
    pub argmax: Vec<usize>,
}

/// Non-overlapping max pooling with stride equal to the window.
///
/// Window dimensions larger than the input are clipped to it; partial
/// windows at the far edges behave as if padded with `-inf`, giving
/// `ceil(h / ph) x ceil(w / pw)` outputs.
pub fn maxpool_forward(input: &Tensor, pool_h: usize, pool_w: usize) -> Result<Pooled> {
    let [b, c, h, w] = dims4(input)?;
    if pool_h == 0 || pool_w == 0 {
        return Err(crate::error::invalid!("pool dimensions must be positive"));
    }
    let (ph, pw) = (pool_h.min(h), pool_w.min(w));
    let (oh, ow) = (h.div_ceil(ph), w.div_ceil(pw));
    let mut output = Tensor::zeros(&[b, c, oh, ow]);
    let mut argmax = Vec::with_capacity(b * c * oh * ow);
    let data = input.data();
    let out = output.data_mut();
    let mut k = 0;
    for plane in 0..b * c {
        let base = plane * h * w;
        for y in 0..oh {
            for x in 0..ow {
                let mut best = base + y * ph * w + x * pw;
                for yy in y * ph..((y + 1) * ph).min(h) {
                    for xx in x * pw..((x + 1) * pw).min(w) {
                        let idx = base + yy * w + xx;
                        if data[idx] > data[best] {
                            best = idx;
                        }
                    }
                }
                out[k] = data[best];
                argmax.push(best);
                k += 1;
            }
        }
    }
    Ok(Pooled { output, argmax })
}

/// Routes each output gradient to the input element that won the max.
pub fn maxpool_backward(input_shape: &[usize], argmax: &[usize], grad_out: &Tensor) -> Tensor {
    let mut grad_in = Tensor::zeros(input_shape);
    let g = grad_in.data_mut();
    for (&idx, &go) in argmax.iter().zip(grad_out.data()) {
        g[idx] += go;
    }
    grad_in
}

pub fn relu_forward(input: &Tensor) -> Tensor {
    Tensor::from_vec(
        input.shape(),
        input.data().iter().map(|&v| v.max(0.0)).collect(),
    )
}

/// `grad_out` masked where the forward output was not positive.
pub fn relu_backward(output: &Tensor, grad_out: &Tensor) -> Tensor {
    let mut grad = grad_out.clone();
    relu_backward_in_place(output, &mut grad);
    grad
}

/// [`relu_backward`] overwriting the upstream gradient.
pub fn relu_backward_in_place(output: &Tensor, grad: &mut Tensor) {
    for (g, &y) in grad.data_mut().iter_mut().zip(output.data()) {
        if y <= 0.0 {
            *g = 0.0;
        }
    }
}

/// Inverted dropout mask: each entry is 0 with probability `rate`, otherwise
/// `1 / (1 - rate)`. A zero rate draws no random numbers.
pub fn dropout_mask<R: RngCore + ?Sized>(len: usize, rate: f64, rng: &mut R) -> Vec<f64> {
    if rate <= 0.0 {
        return vec![1.0; len];
    }
    let keep = 1.0 / (1.0 - rate);
    (0..len)
        .map(|_| if super::init::unit_uniform(rng) < rate { 0.0 } else { keep })
        .collect()
}

pub fn apply_mask(input: &Tensor, mask: &[f64]) -> Tensor {
    Tensor::from_vec(
        input.shape(),
        input.data().iter().zip(mask).map(|(a, m)| a * m).collect(),
    )
}

/// `y = x W^T + b` with `x: [batch, in]`, `W: [out, in]`.
pub fn dense_forward(input: &Tensor, weight: &Tensor, bias: &[f64]) -> Result<Tensor> {
    let (b, f) = (input.batch(), input.item_len());
    let (o, wf) = match *weight.shape() {
        [o, wf] => (o, wf),
        ref s => {
            return Err(Error::ShapeMismatch {
                expected: "[out, in] weight".into(),
                found: format!("{s:?}"),
            })
        }
    };
    if wf != f || bias.len() != o {
        return Err(Error::ShapeMismatch {
            expected: format!("{wf} input features, {o} biases"),
            found: format!("{f} input features, {} biases", bias.len()),
        });
    }
    let mut out = Tensor::zeros(&[b, o]);
    for n in 0..b {
        out.item_mut(n).copy_from_slice(bias);
    }
    add_abt(out.data_mut(), input.data(), weight.data(), b, f, o);
    Ok(out)
}

/// Accumulates weight/bias gradients and returns the input gradient with the
/// shape of `input`.
pub fn dense_backward(
    input: &Tensor,
    weight: &Tensor,
    grad_out: &Tensor,
    grad_weight: &mut [f64],
    grad_bias: &mut [f64],
) -> Tensor {
    let (b, f) = (input.batch(), input.item_len());
    let o = weight.shape()[0];
    add_atb(grad_weight, grad_out.data(), input.data(), o, b, f);
    for n in 0..b {
        for (gb, &g) in grad_bias.iter_mut().zip(grad_out.item(n)) {
            *gb += g;
        }
    }
    let mut grad_in = Tensor::zeros(input.shape());
    add_ab(grad_in.data_mut(), grad_out.data(), weight.data(), b, o, f);
    grad_in
}
