//! Two-hidden-layer ReLU network with per-unit dropout masks.
//!
//! `y = w3 . (z2 * relu(W2 (z1 * relu(W1 x + b1)) + b2)) + b3`
//!
//! Masks act on hidden units only and are never rescaled, so the same
//! network definition is used for training steps and Monte-Carlo prediction.
//! The code is generic over the float type: the surrogate trains in `f32`,
//! gradient checks run in `f64`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, NdFloat, Zip};

use crate::error::{check_len, Result};
use crate::rng::RngStream;

pub const HIDDEN: usize = 256;

/// Float types the network can be instantiated with.
pub trait Real: NdFloat + std::str::FromStr {
    fn of(v: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Real for f32 {
    fn of(v: f64) -> Self {
        v as f32
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn of(v: f64) -> Self {
        v
    }
    fn as_f64(self) -> f64 {
        self
    }
}

/// Network weights. `w1` is `hidden x n`, `w2` is `hidden x hidden`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<F = f64> {
    pub w1: Array2<F>,
    pub b1: Array1<F>,
    pub w2: Array2<F>,
    pub b2: Array1<F>,
    pub w3: Array1<F>,
    pub b3: F,
}

/// Binary keep-masks for the two hidden layers, stored as 0 / 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask<F = f64> {
    pub z1: Array1<F>,
    pub z2: Array1<F>,
}

fn keep_threshold(rate: f64) -> u64 {
    ((1.0 - rate) * 4_294_967_296.0) as u64
}

fn fill_mask<F: Real>(out: &mut [F], threshold: u64, rng: &mut RngStream) {
    use rand::RngCore;
    for v in out {
        *v = if (rng.next_u32() as u64) < threshold {
            F::one()
        } else {
            F::zero()
        };
    }
}

impl<F: Real> DropoutMask<F> {
    pub fn ones(hidden: usize) -> Self {
        Self {
            z1: Array1::ones(hidden),
            z2: Array1::ones(hidden),
        }
    }

    /// Each unit is kept independently with probability `1 - rate`.
    pub fn sample(hidden: usize, rate: f64, rng: &mut RngStream) -> Self {
        let t = keep_threshold(rate);
        let mut z1 = Array1::zeros(hidden);
        let mut z2 = Array1::zeros(hidden);
        fill_mask(z1.as_slice_mut().unwrap(), t, rng);
        fill_mask(z2.as_slice_mut().unwrap(), t, rng);
        Self { z1, z2 }
    }
}

pub(crate) fn sample_mask_rows<F: Real>(rows: usize, hidden: usize, rate: f64, rng: &mut RngStream) -> Array2<F> {
    let mut z = Array2::zeros((rows, hidden));
    fill_mask(z.as_slice_mut().unwrap(), keep_threshold(rate), rng);
    z
}

/// Loss gradient with the same layout as [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrad<F = f64> {
    pub w1: Array2<F>,
    pub b1: Array1<F>,
    pub w2: Array2<F>,
    pub b2: Array1<F>,
    pub w3: Array1<F>,
    pub b3: F,
}

/// Training rows in scaled units.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a, F = f64> {
    pub x: ArrayView2<'a, F>,
    pub y: ArrayView1<'a, F>,
    /// Target input-gradients, one row per sample.
    pub grad: Option<ArrayView2<'a, F>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    pub error: f64,
    pub gradient: f64,
}

impl LossParts {
    pub fn total(&self) -> f64 {
        self.error + self.gradient
    }
}

/// `sum (pred - target)^2 + weight * sum ||pred_grad - target_grad||^2`
pub fn sobolev_loss(
    pred: &[f64],
    target: &[f64],
    pred_grad: &[Vec<f64>],
    target_grad: &[Vec<f64>],
    weight: f64,
) -> f64 {
    let error: f64 = pred.iter().zip(target).map(|(a, b)| (a - b).powi(2)).sum();
    let grad: f64 = pred_grad
        .iter()
        .zip(target_grad)
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>())
        .sum();
    error + weight * grad
}

fn glorot<F: Real>(rows: usize, cols: usize, fan_in: usize, fan_out: usize, rng: &mut RngStream) -> Array2<F> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || F::of(rng.uniform_in(-limit, limit)))
}

fn relu<F: Real>(v: F) -> F {
    if v > F::zero() {
        v
    } else {
        F::zero()
    }
}

impl<F: Real> Mlp<F> {
    pub fn zeros(n: usize, hidden: usize) -> Self {
        Self {
            w1: Array2::zeros((hidden, n)),
            b1: Array1::zeros(hidden),
            w2: Array2::zeros((hidden, hidden)),
            b2: Array1::zeros(hidden),
            w3: Array1::zeros(hidden),
            b3: F::zero(),
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(n: usize, hidden: usize, rng: &mut RngStream) -> Self {
        let w1 = glorot(hidden, n, n, hidden, rng);
        let w2 = glorot(hidden, hidden, hidden, hidden, rng);
        let w3 = glorot(1, hidden, hidden, 1, rng).remove_axis(Axis(0));
        Self {
            w1,
            b1: Array1::zeros(hidden),
            w2,
            b2: Array1::zeros(hidden),
            w3,
            b3: F::zero(),
        }
    }

    pub fn n(&self) -> usize {
        self.w1.ncols()
    }

    pub fn hidden(&self) -> usize {
        self.w1.nrows()
    }

    pub fn is_finite(&self) -> bool {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
            .chain(&self.w3)
            .all(|v| v.is_finite())
            && self.b3.is_finite()
    }

    fn check(&self, mask: &DropoutMask<F>, x: &[F]) -> Result<()> {
        check_len(self.n(), x.len())?;
        check_len(self.hidden(), mask.z1.len())?;
        check_len(self.hidden(), mask.z2.len())
    }

    pub fn forward(&self, mask: &DropoutMask<F>, x: &[F]) -> Result<F> {
        self.check(mask, x)?;
        let x = ArrayView1::from(x);
        let a1 = self.w1.dot(&x) + &self.b1;
        let h1 = a1.mapv(relu) * &mask.z1;
        let a2 = self.w2.dot(&h1) + &self.b2;
        let h2 = a2.mapv(relu) * &mask.z2;
        Ok(self.w3.dot(&h2) + self.b3)
    }

    /// Exact gradient of [`Mlp::forward`] with respect to `x`; ReLU has
    /// derivative 0 at exactly 0.
    pub fn input_gradient(&self, mask: &DropoutMask<F>, x: &[F]) -> Result<Array1<F>> {
        self.check(mask, x)?;
        let x = ArrayView1::from(x);
        let a1 = self.w1.dot(&x) + &self.b1;
        let s1 = step(&a1) * &mask.z1;
        let h1 = &a1 * &s1;
        let a2 = self.w2.dot(&h1) + &self.b2;
        let s2 = step(&a2) * &mask.z2;
        let u2 = &s2 * &self.w3;
        let u1 = self.w2.t().dot(&u2) * &s1;
        Ok(self.w1.t().dot(&u1))
    }

    /// Loss and its weight gradient for one batch. `z1` and `z2` hold one
    /// mask row per sample (broadcast views are fine).
    ///
    /// With gradient targets the loss gains
    /// `weight * sum ||d out/dx - target||^2`. ReLU second derivatives vanish,
    /// so the input gradient is multilinear in the weights and its weight
    /// derivative is taken through the activation pattern as constants.
    pub fn loss_and_grad(
        &self,
        batch: Batch<'_, F>,
        z1: ArrayView2<'_, F>,
        z2: ArrayView2<'_, F>,
        sobolev_weight: f64,
    ) -> (LossParts, MlpGrad<F>) {
        let zero = F::zero();
        let two = F::of(2.0);
        let x = batch.x;
        let mut a1 = x.dot(&self.w1.t());
        a1 += &self.b1;
        // s = mask * relu'(a); h = s * a
        let s1 = Zip::from(&a1)
            .and(&z1)
            .map_collect(|a, z| if *a > zero { *z } else { zero });
        let h1 = &a1 * &s1;
        let mut a2 = h1.dot(&self.w2.t());
        a2 += &self.b2;
        let s2 = Zip::from(&a2)
            .and(&z2)
            .map_collect(|a, z| if *a > zero { *z } else { zero });
        let h2 = &a2 * &s2;
        let y = h2.dot(&self.w3) + self.b3;

        let resid = &y - &batch.y;
        let error = resid.iter().map(|r| r.as_f64() * r.as_f64()).sum::<f64>();
        let dy = resid.mapv(|r| two * r);

        // u2 = d out / d a2, v1 = d out / d h1, u1 = d out / d a1
        let u2 = &s2 * &self.w3;
        let v1 = u2.dot(&self.w2);
        let u1 = &s1 * &v1;

        let db3 = dy.sum();
        let mut dw3 = h2.t().dot(&dy);
        let db2 = u2.t().dot(&dy);
        let db1 = u1.t().dot(&dy);

        let mut left1 = &x * &dy.view().insert_axis(Axis(1));
        let mut left2 = &h1 * &dy.view().insert_axis(Axis(1));
        let mut gradient = 0.0;

        if let (Some(target), true) = (batch.grad, sobolev_weight != 0.0) {
            let gx = u1.dot(&self.w1);
            let diff = &gx - &target;
            gradient = sobolev_weight * diff.iter().map(|d| d.as_f64() * d.as_f64()).sum::<f64>();
            let scale = F::of(2.0 * sobolev_weight);
            let e = diff.mapv(|d| scale * d);
            let dv1 = e.dot(&self.w1.t()) * &s1;
            let du2 = dv1.dot(&self.w2.t());
            dw3 += &(&s2 * &du2).sum_axis(Axis(0));
            left1 += &e;
            left2 += &dv1;
        }

        let grad = MlpGrad {
            w1: u1.t().dot(&left1),
            b1: db1,
            w2: u2.t().dot(&left2),
            b2: db2,
            w3: dw3,
            b3: db3,
        };
        (LossParts { error, gradient }, grad)
    }

    /// `samples` Monte-Carlo outputs per input row, each with its own masks.
    /// Returns a `rows x samples` matrix.
    pub fn mc_outputs(&self, x: ArrayView2<'_, F>, samples: usize, rate: f64, rng: &mut RngStream) -> Array2<F> {
        let rows = x.nrows();
        let hidden = self.hidden();
        let mut a1 = x.dot(&self.w1.t());
        a1 += &self.b1;
        let r1 = a1.mapv(relu);
        let z1 = sample_mask_rows::<F>(rows * samples, hidden, rate, rng);
        let z2 = sample_mask_rows::<F>(rows * samples, hidden, rate, rng);
        let mut h1 = Array2::zeros((rows * samples, hidden));
        for (r, row) in r1.outer_iter().enumerate() {
            for s in 0..samples {
                let k = r * samples + s;
                Zip::from(h1.row_mut(k))
                    .and(&row)
                    .and(z1.row(k))
                    .for_each(|h, &a, &z| *h = a * z);
            }
        }
        let mut a2 = h1.dot(&self.w2.t());
        a2 += &self.b2;
        Zip::from(&mut a2).and(&z2).for_each(|a, &z| *a = relu(*a) * z);
        let y = a2.dot(&self.w3) + self.b3;
        y.into_shape_with_order((rows, samples)).expect("row-major output")
    }
}

fn step<F: Real>(a: &Array1<F>) -> Array1<F> {
    a.mapv(|v| if v > F::zero() { F::one() } else { F::zero() })
}

impl<F: Real> MlpGrad<F> {
    pub fn slices(&self) -> [&[F]; 6] {
        [
            self.w1.as_slice().unwrap(),
            self.b1.as_slice().unwrap(),
            self.w2.as_slice().unwrap(),
            self.b2.as_slice().unwrap(),
            self.w3.as_slice().unwrap(),
            std::slice::from_ref(&self.b3),
        ]
    }
}

impl<F: Real> Mlp<F> {
    pub(crate) fn slices_mut(&mut self) -> [&mut [F]; 6] {
        [
            self.w1.as_slice_mut().unwrap(),
            self.b1.as_slice_mut().unwrap(),
            self.w2.as_slice_mut().unwrap(),
            self.b2.as_slice_mut().unwrap(),
            self.w3.as_slice_mut().unwrap(),
            std::slice::from_mut(&mut self.b3),
        ]
    }

    pub(crate) fn param_count(&self) -> usize {
        let h = self.hidden();
        h * self.n() + h + h * h + h + h + 1
    }
}

/// Adam over all parameters of an [`Mlp`].
#[derive(Debug, Clone)]
pub struct Adam<F = f64> {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: i32,
    m: Vec<F>,
    v: Vec<F>,
}

impl<F: Real> Adam<F> {
    pub fn new(params: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            eps,
            step: 0,
            m: vec![F::zero(); params],
            v: vec![F::zero(); params],
        }
    }

    pub fn update(&mut self, net: &mut Mlp<F>, grad: &MlpGrad<F>) {
        self.step += 1;
        let c1 = F::of(1.0 - self.beta1.powi(self.step));
        let c2 = F::of(1.0 - self.beta2.powi(self.step));
        let lr = F::of(self.lr);
        let (b1, b2, eps) = (F::of(self.beta1), F::of(self.beta2), F::of(self.eps));
        let (rb1, rb2) = (F::one() - b1, F::one() - b2);
        let mut offset = 0;
        for (p, g) in net.slices_mut().into_iter().zip(grad.slices()) {
            let m = &mut self.m[offset..offset + p.len()];
            let v = &mut self.v[offset..offset + p.len()];
            for i in 0..p.len() {
                m[i] = b1 * m[i] + rb1 * g[i];
                v[i] = b2 * v[i] + rb2 * g[i] * g[i];
                let mh = m[i] / c1;
                let vh = v[i] / c2;
                p[i] -= lr * mh / (vh.sqrt() + eps);
            }
            offset += p.len();
        }
    }
}
