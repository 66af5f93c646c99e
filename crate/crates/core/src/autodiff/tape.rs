use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::tensor::Tensor;

/// Handle to a node recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Differentiable primitives. Shape rules:
///
/// * `MatMul`: `(m, k) x (k, n) -> (m, n)`
/// * `Add`: equal shapes, or `(n, m) + (1, m)` with the bias row broadcast
/// * `Sub`, `Mul`: equal shapes
/// * `MeanOverBatch`: `(n, m) -> (1, m)`
/// * `Sum`: anything `-> (1, 1)`
/// * `Concat`: `(n, a) ++ (n, b) -> (n, a + b)`
/// * everything else is elementwise
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OpKind<T> {
    MatMul,
    Add,
    Sub,
    Mul,
    Neg,
    Relu,
    LeakyRelu(T),
    Tanh,
    Sigmoid,
    Log,
    /// `log(sigmoid(x))`, evaluated as `-softplus(-x)`.
    LogSigmoid,
    MeanOverBatch,
    Sum,
    Concat,
    /// Pass-through inside `[lo, hi]`, constant (zero gradient) outside.
    Clamp {
        lo: T,
        hi: T,
    },
    /// `scale * x + shift`
    Affine {
        scale: T,
        shift: T,
    },
}

impl<T> OpKind<T> {
    pub fn arity(&self) -> usize {
        match self {
            OpKind::MatMul | OpKind::Add | OpKind::Sub | OpKind::Mul | OpKind::Concat => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OpKind::MatMul => "matmul",
            OpKind::Add => "add",
            OpKind::Sub => "sub",
            OpKind::Mul => "mul",
            OpKind::Neg => "neg",
            OpKind::Relu => "relu",
            OpKind::LeakyRelu(_) => "leaky_relu",
            OpKind::Tanh => "tanh",
            OpKind::Sigmoid => "sigmoid",
            OpKind::Log => "log",
            OpKind::LogSigmoid => "log_sigmoid",
            OpKind::MeanOverBatch => "mean_over_batch",
            OpKind::Sum => "sum",
            OpKind::Concat => "concat",
            OpKind::Clamp { .. } => "clamp",
            OpKind::Affine { .. } => "affine",
        }
    }
}

struct Node<T> {
    /// `None` for leaves.
    op: Option<OpKind<T>>,
    inputs: [usize; 2],
    tensor: Tensor<T>,
    requires_grad: bool,
}

/// Linear record of a forward computation. Nodes are appended in evaluation
/// order, so every node's inputs precede it and a single reverse sweep
/// suffices for backpropagation.
pub struct Tape<T> {
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

pub(crate) fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

pub(crate) fn log_sigmoid<T: Scalar>(x: T) -> T {
    x.min(T::zero()) - (-x.abs()).exp().ln_1p()
}

fn shape_err<T>(kind: &OpKind<T>, a: &Tensor<T>, b: &Tensor<T>) -> Error
where
    T: Scalar,
{
    Error::Shape {
        op: kind.name(),
        left: a.shape().to_vec(),
        right: b.shape().to_vec(),
    }
}

fn require_2d<T: Scalar>(kind: &OpKind<T>, a: &Tensor<T>) -> Result<(usize, usize)> {
    if a.shape().len() != 2 {
        return Err(Error::Shape {
            op: kind.name(),
            left: a.shape().to_vec(),
            right: vec![],
        });
    }
    Ok((a.shape()[0], a.shape()[1]))
}

fn is_bias_row<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> bool {
    a.shape().len() == 2 && b.numel() == a.cols() && (b.shape() == [1, a.cols()] || b.shape() == [a.cols()])
}

fn forward<T: Scalar>(kind: &OpKind<T>, a: &Tensor<T>, b: Option<&Tensor<T>>) -> Result<Tensor<T>> {
    let map = |f: &dyn Fn(T) -> T| -> Result<Tensor<T>> {
        Tensor::new(a.shape().to_vec(), a.values().iter().map(|&x| f(x)).collect())
    };
    match kind {
        OpKind::MatMul => {
            let b = b.expect("binary");
            let (m, k) = require_2d(kind, a)?;
            let (k2, n) = require_2d(kind, b)?;
            if k != k2 {
                return Err(shape_err(kind, a, b));
            }
            let mut out = vec![T::zero(); m * n];
            T::gemm(
                m,
                k,
                n,
                T::one(),
                a.values(),
                false,
                b.values(),
                false,
                T::zero(),
                &mut out,
            );
            Tensor::matrix(m, n, out)
        }
        OpKind::Add | OpKind::Sub | OpKind::Mul => {
            let b = b.expect("binary");
            let f = |x: T, y: T| match kind {
                OpKind::Add => x + y,
                OpKind::Sub => x - y,
                _ => x * y,
            };
            if a.shape() == b.shape() {
                let v = a.values().iter().zip(b.values()).map(|(&x, &y)| f(x, y)).collect();
                Tensor::new(a.shape().to_vec(), v)
            } else if matches!(kind, OpKind::Add) && is_bias_row(a, b) {
                let cols = a.cols();
                let v = a
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| x + b.values()[i % cols])
                    .collect();
                Tensor::new(a.shape().to_vec(), v)
            } else {
                Err(shape_err(kind, a, b))
            }
        }
        OpKind::Neg => map(&|x| -x),
        OpKind::Relu => map(&|x| if x > T::zero() { x } else { T::zero() }),
        OpKind::LeakyRelu(slope) => {
            let s = *slope;
            map(&move |x| if x > T::zero() { x } else { s * x })
        }
        OpKind::Tanh => map(&|x| x.tanh()),
        OpKind::Sigmoid => map(&sigmoid),
        OpKind::Log => {
            if let Some(pos) = a.values().iter().position(|&x| x.is_nan() || x <= T::zero()) {
                return Err(Error::Domain {
                    op: "log",
                    detail: format!("entry {pos} is {}", a.values()[pos]),
                });
            }
            map(&|x| x.ln())
        }
        OpKind::LogSigmoid => map(&log_sigmoid),
        OpKind::MeanOverBatch => {
            let (n, m) = require_2d(kind, a)?;
            if n == 0 {
                return Err(Error::Shape {
                    op: kind.name(),
                    left: a.shape().to_vec(),
                    right: vec![],
                });
            }
            let mut out = vec![T::zero(); m];
            for r in 0..n {
                for (o, &x) in out.iter_mut().zip(a.row(r)) {
                    *o += x;
                }
            }
            let inv = T::one() / T::from_usize(n).unwrap();
            out.iter_mut().for_each(|o| *o *= inv);
            Tensor::matrix(1, m, out)
        }
        OpKind::Sum => Ok(Tensor::scalar(a.values().iter().copied().sum())),
        OpKind::Concat => {
            let b = b.expect("binary");
            let (n, ca) = require_2d(kind, a)?;
            let (n2, cb) = require_2d(kind, b)?;
            if n != n2 {
                return Err(shape_err(kind, a, b));
            }
            let mut out = Vec::with_capacity(n * (ca + cb));
            for r in 0..n {
                out.extend_from_slice(a.row(r));
                out.extend_from_slice(b.row(r));
            }
            Tensor::matrix(n, ca + cb, out)
        }
        OpKind::Clamp { lo, hi } => {
            let (lo, hi) = (*lo, *hi);
            map(&move |x| x.max(lo).min(hi))
        }
        OpKind::Affine { scale, shift } => {
            let (s, c) = (*scale, *shift);
            map(&move |x| s * x + c)
        }
    }
}

fn accumulate<T: Scalar>(slot: &mut Option<Vec<T>>, numel: usize) -> &mut Vec<T> {
    slot.get_or_insert_with(|| vec![T::zero(); numel])
}

impl<T: Scalar> Tape<T> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Records a leaf. The gradient accumulator starts at zero regardless of
    /// what the incoming tensor carried.
    pub fn leaf(&mut self, mut tensor: Tensor<T>, requires_grad: bool) -> Var {
        tensor.zero_grad();
        self.nodes.push(Node {
            op: None,
            inputs: [0, 0],
            tensor,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    /// Trainable leaf holding a copy of `param`'s values.
    pub fn param(&mut self, param: &Tensor<T>) -> Var {
        self.leaf(param.clone(), true)
    }

    pub fn constant(&mut self, tensor: Tensor<T>) -> Var {
        self.leaf(tensor, false)
    }

    /// Constant copy of `v`'s current value; gradients stop here.
    pub fn detach(&mut self, v: Var) -> Var {
        let t = self.nodes[v.0].tensor.clone();
        self.constant(t)
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    pub fn apply(&mut self, kind: OpKind<T>, inputs: &[Var]) -> Result<Var> {
        if inputs.len() != kind.arity() {
            return Err(Error::contract(
                kind.name(),
                format!("expects {} inputs, got {}", kind.arity(), inputs.len()),
            ));
        }
        if let Some(bad) = inputs.iter().find(|v| v.0 >= self.nodes.len()) {
            return Err(Error::contract(kind.name(), format!("unknown node {}", bad.0)));
        }
        let a = &self.nodes[inputs[0].0];
        let b = inputs.get(1).map(|v| &self.nodes[v.0]);
        let tensor = forward(&kind, &a.tensor, b.map(|n| &n.tensor))?;
        let requires_grad = a.requires_grad || b.is_some_and(|n| n.requires_grad);
        let second = inputs.get(1).map_or(0, |v| v.0);
        self.nodes.push(Node {
            op: Some(kind),
            inputs: [inputs[0].0, second],
            tensor,
            requires_grad,
        });
        Ok(Var(self.nodes.len() - 1))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.apply(OpKind::MatMul, &[a, b])
    }
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.apply(OpKind::Add, &[a, b])
    }
    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.apply(OpKind::Sub, &[a, b])
    }
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.apply(OpKind::Mul, &[a, b])
    }
    pub fn neg(&mut self, a: Var) -> Result<Var> {
        self.apply(OpKind::Neg, &[a])
    }
    pub fn relu(&mut self, a: Var) -> Result<Var> {
        self.apply(OpKind::Relu, &[a])
    }
    pub fn leaky_relu(&mut self, a: Var, slope: T) -> Result<Var> {
        self.apply(OpKind::LeakyRelu(slope), &[a])
    }
    pub fn tanh(&mut self, a: Var) -> Result<Var> {
        self.apply(OpKind::Tanh, &[a])
    }
    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        self.apply(OpKind::Sigmoid, &[a])
    }
    pub fn log(&mut self, a: Var) -> Result<Var> {
        self.apply(OpKind::Log, &[a])
    }
    pub fn log_sigmoid(&mut self, a: Var) -> Result<Var> {
        self.apply(OpKind::LogSigmoid, &[a])
    }
    pub fn mean_over_batch(&mut self, a: Var) -> Result<Var> {
        self.apply(OpKind::MeanOverBatch, &[a])
    }
    pub fn sum(&mut self, a: Var) -> Result<Var> {
        self.apply(OpKind::Sum, &[a])
    }
    pub fn concat(&mut self, a: Var, b: Var) -> Result<Var> {
        self.apply(OpKind::Concat, &[a, b])
    }
    pub fn clamp(&mut self, a: Var, lo: T, hi: T) -> Result<Var> {
        self.apply(OpKind::Clamp { lo, hi }, &[a])
    }
    pub fn affine(&mut self, a: Var, scale: T, shift: T) -> Result<Var> {
        self.apply(OpKind::Affine { scale, shift }, &[a])
    }

    pub fn tensor(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].tensor
    }

    pub fn value(&self, v: Var) -> &[T] {
        self.nodes[v.0].tensor.values()
    }

    pub fn grad(&self, v: Var) -> &[T] {
        self.nodes[v.0].tensor.grad()
    }

    pub fn zero_grad(&mut self) {
        for n in &mut self.nodes {
            n.tensor.zero_grad();
        }
    }

    /// Adds `d loss / d node` into the gradient accumulator of every node
    /// that `loss` depends on and that requires a gradient.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        let root = &self.nodes[loss.0].tensor;
        if root.numel() != 1 {
            return Err(Error::Shape {
                op: "backward",
                left: root.shape().to_vec(),
                right: vec![1],
            });
        }
        if !self.nodes[loss.0].requires_grad {
            return Ok(());
        }
        let mut adj: Vec<Option<Vec<T>>> = Vec::new();
        adj.resize_with(loss.0 + 1, || None);
        adj[loss.0] = Some(vec![T::one()]);

        for i in (0..=loss.0).rev() {
            let Some(g) = adj[i].take() else { continue };
            let (before, rest) = self.nodes.split_at_mut(i);
            let node = &mut rest[0];
            if let Some(kind) = node.op {
                propagate(&kind, node, before, &g, &mut adj);
            }
            for (acc, d) in node.tensor.grad_mut().iter_mut().zip(&g) {
                *acc += *d;
            }
        }
        Ok(())
    }
}

fn propagate<T: Scalar>(kind: &OpKind<T>, node: &Node<T>, before: &[Node<T>], g: &[T], adj: &mut [Option<Vec<T>>]) {
    let ia = node.inputs[0];
    let a = &before[ia];
    let out = node.tensor.values();
    let x = a.tensor.values();
    let unary = |adj: &mut [Option<Vec<T>>], f: &dyn Fn(usize) -> T| {
        if a.requires_grad {
            let ga = accumulate(&mut adj[ia], x.len());
            for (i, gi) in ga.iter_mut().enumerate() {
                *gi += f(i);
            }
        }
    };
    match kind {
        OpKind::MatMul => {
            let ib = node.inputs[1];
            let b = &before[ib];
            let (m, k) = (a.tensor.rows(), a.tensor.cols());
            let n = b.tensor.cols();
            if a.requires_grad {
                let ga = accumulate(&mut adj[ia], m * k);
                T::gemm(m, n, k, T::one(), g, false, b.tensor.values(), true, T::one(), ga);
            }
            if b.requires_grad {
                let gb = accumulate(&mut adj[ib], k * n);
                T::gemm(k, m, n, T::one(), x, true, g, false, T::one(), gb);
            }
        }
        OpKind::Add | OpKind::Sub => {
            let ib = node.inputs[1];
            let b = &before[ib];
            unary(adj, &|i| g[i]);
            if b.requires_grad {
                let sign = if matches!(kind, OpKind::Sub) {
                    -T::one()
                } else {
                    T::one()
                };
                let numel = b.tensor.numel();
                let gb = accumulate(&mut adj[ib], numel);
                // broadcast bias rows fold back by column
                for (i, &gi) in g.iter().enumerate() {
                    gb[i % numel] += sign * gi;
                }
            }
        }
        OpKind::Mul => {
            let ib = node.inputs[1];
            let b = &before[ib];
            let y = b.tensor.values();
            unary(adj, &|i| g[i] * y[i]);
            if b.requires_grad {
                let gb = accumulate(&mut adj[ib], y.len());
                for (i, gi) in gb.iter_mut().enumerate() {
                    *gi += g[i] * x[i];
                }
            }
        }
        OpKind::Neg => unary(adj, &|i| -g[i]),
        OpKind::Relu => unary(adj, &|i| if x[i] > T::zero() { g[i] } else { T::zero() }),
        OpKind::LeakyRelu(s) => {
            let s = *s;
            unary(adj, &move |i| if x[i] > T::zero() { g[i] } else { s * g[i] })
        }
        OpKind::Tanh => unary(adj, &|i| g[i] * (T::one() - out[i] * out[i])),
        OpKind::Sigmoid => unary(adj, &|i| g[i] * out[i] * (T::one() - out[i])),
        OpKind::Log => unary(adj, &|i| g[i] / x[i]),
        OpKind::LogSigmoid => unary(adj, &|i| g[i] * sigmoid(-x[i])),
        OpKind::MeanOverBatch => {
            let cols = a.tensor.cols();
            let inv = T::one() / T::from_usize(a.tensor.rows()).unwrap();
            unary(adj, &move |i| g[i % cols] * inv)
        }
        OpKind::Sum => unary(adj, &|_| g[0]),
        OpKind::Concat => {
            let ib = node.inputs[1];
            let b = &before[ib];
            let (ca, cb) = (a.tensor.cols(), b.tensor.cols());
            let w = ca + cb;
            unary(adj, &|i| g[(i / ca) * w + i % ca]);
            if b.requires_grad {
                let gb = accumulate(&mut adj[ib], b.tensor.numel());
                for (i, gi) in gb.iter_mut().enumerate() {
                    *gi += g[(i / cb) * w + ca + i % cb];
                }
            }
        }
        OpKind::Clamp { lo, hi } => {
            let (lo, hi) = (*lo, *hi);
            unary(adj, &move |i| if x[i] >= lo && x[i] <= hi { g[i] } else { T::zero() })
        }
        OpKind::Affine { scale, .. } => {
            let s = *scale;
            unary(adj, &move |i| s * g[i])
        }
    }
}
