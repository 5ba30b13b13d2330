//! Fully-connected networks with reverse-mode gradients.
//!
//! A forward pass over a batch records a [`Tape`]: an append-only list of
//! nodes, each holding one batched operation (an affine layer or an
//! elementwise activation), the index of its parent and the values it
//! produced. Nodes are appended in evaluation order, so parents always precede
//! children, and [`Mlp::backward`] walks the list once in reverse.
//!
//! Parameters live in one flat vector, layer by layer: the weight matrix
//! (`units × inputs`, row-major) followed by the bias vector.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::NetError;
use crate::math::{exp, exp_m1, fast_tanh, sqrt, tanh_in_place};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Tanh,
    /// ELU with `α = 1`.
    Elu,
    Relu,
    Identity,
}

impl Activation {
    pub fn name(&self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Elu => "elu",
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Activation::Tanh => fast_tanh(x),
            Activation::Elu => {
                if x > 0.0 {
                    x
                } else {
                    exp_m1(x)
                }
            }
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }

    pub fn apply_in_place(&self, xs: &mut [f64]) {
        match self {
            Activation::Tanh => tanh_in_place(xs),
            Activation::Identity => {}
            _ => {
                for x in xs.iter_mut() {
                    *x = self.apply(*x);
                }
            }
        }
    }

    /// Derivative expressed through the output `y = apply(x)`.
    #[inline]
    pub fn derivative_from_output(&self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Elu => {
                if y > 0.0 {
                    1.0
                } else {
                    y + 1.0
                }
            }
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

impl FromStr for Activation {
    type Err = NetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "elu" => Ok(Activation::Elu),
            "relu" => Ok(Activation::Relu),
            "identity" | "linear" => Ok(Activation::Identity),
            other => Err(NetError::UnknownActivation(other.to_string())),
        }
    }
}

/// Batched operation recorded on the tape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    Input,
    /// `y = x Wᵀ + b` for layer `layer`.
    Affine { layer: usize },
    Activate(Activation),
}

#[derive(Debug, Clone)]
pub struct Node {
    pub op: Op,
    pub parent: Option<usize>,
    /// Row width; the node's value is `batch × width`, row-major.
    pub width: usize,
    pub value: Vec<f64>,
}

/// Record of one forward pass, consumed by [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct Tape {
    fingerprint: u64,
    batch: usize,
    nodes: Vec<Node>,
}

impl Tape {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn output(&self) -> &[f64] {
        &self.nodes.last().expect("tape has an input node").value
    }
}

/// Gradients of `Σᵢ upstreamᵢ · outputᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    /// With respect to the flat parameter vector.
    pub params: Vec<f64>,
    /// With respect to each input entry (same layout as the forward input).
    pub inputs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    dims: Vec<usize>,
    activation: Activation,
    params: Vec<f64>,
}

/// `Σ (dᵢ dᵢ₋₁ + dᵢ)`.
pub fn param_count(dims: &[usize]) -> usize {
    dims.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
}

fn fingerprint(params: &[f64]) -> u64 {
    // FNV-1a over the bit patterns.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in params {
        for b in p.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// `c (m×n) = a (m×k) · b (k×n) + beta · c`, with explicit strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (isize, isize),
    b: &[f64],
    (rsb, csb): (isize, isize),
    beta: f64,
    c: &mut [f64],
) {
    debug_assert!(c.len() >= m * n);
    // Safety: the callers size `a`, `b`, `c` to cover every strided index.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

impl Mlp {
    fn check_dims(dims: &[usize]) -> Result<(), NetError> {
        if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
            return Err(NetError::BadDims);
        }
        Ok(())
    }

    pub fn from_params(dims: &[usize], activation: Activation, params: Vec<f64>) -> Result<Self, NetError> {
        Self::check_dims(dims)?;
        let expected = param_count(dims);
        if params.len() != expected {
            return Err(NetError::ParamCount {
                expected,
                got: params.len(),
            });
        }
        Ok(Mlp {
            dims: dims.to_vec(),
            activation,
            params,
        })
    }

    pub fn zeros(dims: &[usize], activation: Activation) -> Result<Self, NetError> {
        Self::from_params(dims, activation, alloc::vec![0.0; param_count(dims)])
    }

    /// Glorot-uniform weights in `±√(6/(fan_in+fan_out))`, zero biases.
    pub fn glorot<R: Rng + ?Sized>(dims: &[usize], activation: Activation, rng: &mut R) -> Result<Self, NetError> {
        Self::check_dims(dims)?;
        let mut params = Vec::with_capacity(param_count(dims));
        for w in dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = sqrt(6.0 / (fan_in + fan_out) as f64);
            for _ in 0..fan_in * fan_out {
                params.push(rng.random_range(-limit..limit));
            }
            params.extend(core::iter::repeat(0.0).take(fan_out));
        }
        Self::from_params(dims, activation, params)
    }

    pub fn glorot_seeded(dims: &[usize], activation: Activation, seed: u64) -> Result<Self, NetError> {
        Self::glorot(dims, activation, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// The 1→64→64→1 tanh network used as the variational function.
    pub fn variational(seed: u64) -> Self {
        Self::glorot_seeded(&[1, 64, 64, 1], Activation::Tanh, seed).expect("valid dims")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn input_width(&self) -> usize {
        self.dims[0]
    }

    pub fn output_width(&self) -> usize {
        *self.dims.last().expect("at least two dims")
    }

    /// Offset of layer `l`'s weights in the flat vector, and of its biases.
    fn layer_offsets(&self, l: usize) -> (usize, usize) {
        let start = param_count(&self.dims[..=l]);
        (start, start + self.dims[l] * self.dims[l + 1])
    }

    /// Evaluate on `x` (`batch × d₀`, row-major) and record the tape.
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, Tape), NetError> {
        let d0 = self.input_width();
        if x.is_empty() {
            return Err(NetError::EmptyBatch);
        }
        if x.len() % d0 != 0 {
            return Err(NetError::InputWidth(x.len()));
        }
        let batch = x.len() / d0;
        let layers = self.dims.len() - 1;
        let mut nodes = Vec::with_capacity(2 * layers + 1);
        nodes.push(Node {
            op: Op::Input,
            parent: None,
            width: d0,
            value: x.to_vec(),
        });
        for l in 0..layers {
            let (d_in, d_out) = (self.dims[l], self.dims[l + 1]);
            let (w_off, b_off) = self.layer_offsets(l);
            let w = &self.params[w_off..b_off];
            let b = &self.params[b_off..b_off + d_out];
            let mut y = Vec::with_capacity(batch * d_out);
            for _ in 0..batch {
                y.extend_from_slice(b);
            }
            let input = &nodes.last().expect("input node").value;
            gemm(
                batch,
                d_in,
                d_out,
                input,
                (d_in as isize, 1),
                w,
                (1, d_in as isize),
                1.0,
                &mut y,
            );
            let parent = nodes.len() - 1;
            nodes.push(Node {
                op: Op::Affine { layer: l },
                parent: Some(parent),
                width: d_out,
                value: y,
            });
            if l + 1 < layers && self.activation != Activation::Identity {
                let act = self.activation;
                let mut value = nodes.last().expect("affine node").value.clone();
                act.apply_in_place(&mut value);
                nodes.push(Node {
                    op: Op::Activate(act),
                    parent: Some(nodes.len() - 1),
                    width: d_out,
                    value,
                });
            }
        }
        let tape = Tape {
            fingerprint: fingerprint(&self.params),
            batch,
            nodes,
        };
        Ok((tape.output().to_vec(), tape))
    }

    /// Outputs only.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, NetError> {
        self.forward(x).map(|(y, _)| y)
    }

    /// Reverse sweep over `tape`, seeded with `upstream` on the outputs.
    pub fn backward(&self, tape: &Tape, upstream: &[f64]) -> Result<Gradients, NetError> {
        if tape.fingerprint != fingerprint(&self.params) {
            return Err(NetError::TapeMismatch);
        }
        let expected = tape.batch * self.output_width();
        if upstream.len() != expected {
            return Err(NetError::UpstreamLength {
                expected,
                got: upstream.len(),
            });
        }
        let batch = tape.batch;
        let mut grad = alloc::vec![0.0; self.params.len()];
        let mut adj = upstream.to_vec();
        for idx in (1..tape.nodes.len()).rev() {
            let node = &tape.nodes[idx];
            let parent = &tape.nodes[node.parent.expect("non-input nodes have parents")];
            match node.op {
                Op::Input => unreachable!("input is node 0"),
                Op::Activate(Activation::Tanh) => {
                    for (a, &y) in adj.iter_mut().zip(&node.value) {
                        *a *= 1.0 - y * y;
                    }
                }
                Op::Activate(act) => {
                    for (a, &y) in adj.iter_mut().zip(&node.value) {
                        *a *= act.derivative_from_output(y);
                    }
                }
                Op::Affine { layer } => {
                    let (d_in, d_out) = (parent.width, node.width);
                    let (w_off, b_off) = self.layer_offsets(layer);
                    // dW = adjᵀ · input
                    gemm(
                        d_out,
                        batch,
                        d_in,
                        &adj,
                        (1, d_out as isize),
                        &parent.value,
                        (d_in as isize, 1),
                        0.0,
                        &mut grad[w_off..b_off],
                    );
                    let db = &mut grad[b_off..b_off + d_out];
                    for row in adj.chunks_exact(d_out) {
                        for (g, a) in db.iter_mut().zip(row) {
                            *g += a;
                        }
                    }
                    // d input = adj · W
                    let mut next = alloc::vec![0.0; batch * d_in];
                    gemm(
                        batch,
                        d_out,
                        d_in,
                        &adj,
                        (d_out as isize, 1),
                        &self.params[w_off..b_off],
                        (d_in as isize, 1),
                        0.0,
                        &mut next,
                    );
                    adj = next;
                }
            }
        }
        Ok(Gradients {
            params: grad,
            inputs: adj,
        })
    }
}

/// The sampler `G(z) = μ + σ z`, stored as `(μ, ln σ)` so that `σ > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearGenerator {
    pub mu: f64,
    pub log_sigma: f64,
}

impl LinearGenerator {
    pub fn new(mu: f64, sigma: f64) -> Self {
        LinearGenerator {
            mu,
            log_sigma: crate::math::ln(sigma),
        }
    }

    pub fn sigma(&self) -> f64 {
        exp(self.log_sigma)
    }

    pub fn forward(&self, z: &[f64]) -> Vec<f64> {
        let s = self.sigma();
        z.iter().map(|&z| self.mu + s * z).collect()
    }

    /// Pull `dL/dx` back through `x = μ + σ z`: returns `(dL/dμ, dL/dσ)`.
    pub fn backward(&self, z: &[f64], dx: &[f64]) -> (f64, f64) {
        let mut dmu = 0.0;
        let mut dsigma = 0.0;
        for (&zi, &di) in z.iter().zip(dx) {
            dmu += di;
            dsigma += di * zi;
        }
        (dmu, dsigma)
    }
}

/// Apply `G` to `z` (convenience form of [`LinearGenerator::forward`]).
pub fn generator_forward(g: &LinearGenerator, z: &[f64]) -> Vec<f64> {
    g.forward(z)
}
