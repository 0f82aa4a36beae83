//! Minimal reverse-mode automatic differentiation on a tape.
//!
//! Operations append nodes to a [`Tape`]; [`Tape::backward`] walks the nodes
//! in reverse insertion order (which is a reverse topological order, since an
//! operation can only reference earlier nodes) and accumulates gradients.
//! One tape is confined to one thread for the duration of a forward/backward
//! pass; independent tapes may run concurrently.
//!
//! Supported operators are exactly what the network and losses need: dense
//! affine maps, valid 1-D convolution, non-overlapping max-pooling, the
//! elementwise nonlinearities, dropout, time-axis slicing/concatenation and
//! reductions. LSTM steps are composed from these in [`lstm`].

mod tensor;

pub mod lstm;

pub use tensor::Tensor;

use crate::error::ShapeError;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Leaf,
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Neg(usize),
    Tanh(usize),
    Sigmoid(usize),
    Exp(usize),
    Ln(usize),
    Sqrt(usize),
    Square(usize),
    Softplus(usize),
    AddScalar(usize, f64),
    MulScalar(usize, f64),
    Dense { x: usize, w: usize, b: Option<usize> },
    Conv1d { x: usize, k: usize, stride: usize },
    MaxPool1d { x: usize, argmax: Vec<usize> },
    SliceTime { x: usize, t0: usize },
    ConcatTime(Vec<usize>),
    Reshape(usize),
    SumAll(usize),
    MeanAll(usize),
    MeanRows(usize),
    BroadcastCol { x: usize, cols: usize },
}

struct Node {
    value: Tensor,
    op: Op,
}

/// Gradients of a scalar output with respect to the tape's leaves.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient tensor for `var`; zeros if the output did not depend on it.
    pub fn get(&self, tape: &Tape, var: Var) -> Tensor {
        match &self.grads[var.0] {
            Some(g) => g.clone(),
            None => Tensor::zeros(tape.nodes[var.0].value.shape()),
        }
    }

    /// Borrowed gradient, `None` if the output did not depend on `var`.
    pub fn get_ref(&self, var: Var) -> Option<&Tensor> {
        self.grads[var.0].as_ref()
    }
}

/// Records operations for one forward/backward pass.
pub struct Tape {
    nodes: Vec<Node>,
    rng: ChaCha8Rng,
}

/// Interpret a rank-2 or rank-3 shape as (batch, time, channels).
fn axis1_view(shape: &[usize]) -> (usize, usize, usize) {
    match shape.len() {
        2 => (shape[0], shape[1], 1),
        3 => (shape[0], shape[1], shape[2]),
        _ => panic!("axis-1 op needs rank 2 or 3, got {shape:?}"),
    }
}

/// Interpret any shape as a (rows, cols) matrix by folding leading axes.
fn matrix_view(shape: &[usize]) -> (usize, usize) {
    assert!(!shape.is_empty(), "matrix view of rank-0 tensor");
    let cols = *shape.last().unwrap();
    (shape.iter().product::<usize>() / cols, cols)
}

impl Tape {
    /// A fresh tape; `seed` drives every stochastic operation recorded on it,
    /// so replaying the same construction reproduces values bit for bit.
    pub fn new(seed: u64) -> Self {
        Self { nodes: Vec::new(), rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    /// Insert a leaf (input, parameter or constant).
    pub fn input(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf)
    }

    /// Insert a scalar leaf.
    pub fn scalar_input(&mut self, value: f64) -> Var {
        self.input(Tensor::scalar(value))
    }

    pub fn value(&self, var: Var) -> &Tensor {
        &self.nodes[var.0].value
    }

    pub fn scalar_value(&self, var: Var) -> f64 {
        self.nodes[var.0].value.item()
    }

    fn binary(&mut self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64, op: Op) -> Var {
        let (va, vb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        assert_eq!(va.shape(), vb.shape(), "elementwise op on mismatched shapes");
        let data = va.data().iter().zip(vb.data()).map(|(&x, &y)| f(x, y)).collect();
        let out = Tensor::from_vec(va.shape(), data);
        self.push(out, op)
    }

    fn unary(&mut self, x: Var, f: impl Fn(f64) -> f64, op: Op) -> Var {
        let vx = &self.nodes[x.0].value;
        let data = vx.data().iter().map(|&v| f(v)).collect();
        let out = Tensor::from_vec(vx.shape(), data);
        self.push(out, op)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, |x, y| x + y, Op::Add(a.0, b.0))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, |x, y| x - y, Op::Sub(a.0, b.0))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, |x, y| x * y, Op::Mul(a.0, b.0))
    }

    pub fn div(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, |x, y| x / y, Op::Div(a.0, b.0))
    }

    pub fn neg(&mut self, x: Var) -> Var {
        self.unary(x, |v| -v, Op::Neg(x.0))
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        self.unary(x, f64::tanh, Op::Tanh(x.0))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        self.unary(x, |v| 1.0 / (1.0 + (-v).exp()), Op::Sigmoid(x.0))
    }

    pub fn exp(&mut self, x: Var) -> Var {
        self.unary(x, f64::exp, Op::Exp(x.0))
    }

    pub fn ln(&mut self, x: Var) -> Var {
        self.unary(x, f64::ln, Op::Ln(x.0))
    }

    pub fn sqrt(&mut self, x: Var) -> Var {
        self.unary(x, f64::sqrt, Op::Sqrt(x.0))
    }

    pub fn square(&mut self, x: Var) -> Var {
        self.unary(x, |v| v * v, Op::Square(x.0))
    }

    /// Numerically stable ln(1 + eˣ).
    pub fn softplus(&mut self, x: Var) -> Var {
        self.unary(x, |v| v.max(0.0) + (-v.abs()).exp().ln_1p(), Op::Softplus(x.0))
    }

    pub fn add_scalar(&mut self, x: Var, c: f64) -> Var {
        self.unary(x, |v| v + c, Op::AddScalar(x.0, c))
    }

    pub fn mul_scalar(&mut self, x: Var, c: f64) -> Var {
        self.unary(x, |v| v * c, Op::MulScalar(x.0, c))
    }

    /// Affine map `x·w + b` with `x: [.., I]`, `w: [I, O]`, `b: [O]`.
    /// Leading axes of `x` are preserved.
    pub fn dense(&mut self, x: Var, w: Var, b: Option<Var>) -> Result<Var, ShapeError> {
        let xs = self.nodes[x.0].value.shape().to_vec();
        let ws = self.nodes[w.0].value.shape().to_vec();
        if ws.len() != 2 {
            return Err(ShapeError::new("dense", format!("weight must be rank 2, got {ws:?}")));
        }
        let (n, i) = matrix_view(&xs);
        if i != ws[0] {
            return Err(ShapeError::new(
                "dense",
                format!("input width {i} does not match weight rows {}", ws[0]),
            ));
        }
        let o = ws[1];
        if let Some(bv) = b {
            let bs = self.nodes[bv.0].value.shape();
            if bs != [o] {
                return Err(ShapeError::new(
                    "dense",
                    format!("bias shape {bs:?} does not match output width {o}"),
                ));
            }
        }
        let mut out = vec![0.0; n * o];
        {
            let xv = self.nodes[x.0].value.data();
            let wv = self.nodes[w.0].value.data();
            for r in 0..n {
                let xrow = &xv[r * i..(r + 1) * i];
                let orow = &mut out[r * o..(r + 1) * o];
                if let Some(bv) = b {
                    orow.copy_from_slice(self.nodes[bv.0].value.data());
                }
                for (k, &xk) in xrow.iter().enumerate() {
                    let wrow = &wv[k * o..(k + 1) * o];
                    for (oj, &wj) in orow.iter_mut().zip(wrow) {
                        *oj += xk * wj;
                    }
                }
            }
        }
        let mut out_shape = xs;
        *out_shape.last_mut().unwrap() = o;
        Ok(self.push(
            Tensor::from_vec(&out_shape, out),
            Op::Dense { x: x.0, w: w.0, b: b.map(|v| v.0) },
        ))
    }

    /// Valid (no padding) 1-D convolution over the time axis.
    /// `x: [B, T, C_in]`, `kernels: [K, C_in, C_out]`; output `[B, T', C_out]`
    /// with `T' = (T − K)/stride + 1`.
    pub fn conv1d(&mut self, x: Var, kernels: Var, stride: usize) -> Result<Var, ShapeError> {
        let xs = self.nodes[x.0].value.shape().to_vec();
        let ks = self.nodes[kernels.0].value.shape().to_vec();
        if xs.len() != 3 || ks.len() != 3 {
            return Err(ShapeError::new("conv1d", format!("need [B,T,C] and [K,C,O], got {xs:?} and {ks:?}")));
        }
        if stride == 0 {
            return Err(ShapeError::new("conv1d", "stride must be >= 1"));
        }
        let (bsz, t, cin) = (xs[0], xs[1], xs[2]);
        let (k, kc, cout) = (ks[0], ks[1], ks[2]);
        if kc != cin {
            return Err(ShapeError::new(
                "conv1d",
                format!("kernel input channels {kc} do not match data channels {cin}"),
            ));
        }
        if t < k {
            return Err(ShapeError::new("conv1d", format!("sequence length {t} shorter than kernel {k}")));
        }
        let t_out = (t - k) / stride + 1;
        let mut out = vec![0.0; bsz * t_out * cout];
        {
            let xv = self.nodes[x.0].value.data();
            let kv = self.nodes[kernels.0].value.data();
            for bi in 0..bsz {
                for to in 0..t_out {
                    let orow = &mut out[(bi * t_out + to) * cout..(bi * t_out + to + 1) * cout];
                    for dt in 0..k {
                        let xrow = &xv[(bi * t + to * stride + dt) * cin..(bi * t + to * stride + dt + 1) * cin];
                        for (ci, &xc) in xrow.iter().enumerate() {
                            let krow = &kv[(dt * cin + ci) * cout..(dt * cin + ci + 1) * cout];
                            for (oj, &kw) in orow.iter_mut().zip(krow) {
                                *oj += xc * kw;
                            }
                        }
                    }
                }
            }
        }
        Ok(self.push(
            Tensor::from_vec(&[bsz, t_out, cout], out),
            Op::Conv1d { x: x.0, k: kernels.0, stride },
        ))
    }

    /// Non-overlapping max pooling over the time axis; trailing frames that do
    /// not fill a window are dropped. Gradient flows to the argmax position,
    /// first index on ties.
    pub fn maxpool1d(&mut self, x: Var, window: usize) -> Var {
        assert!(window >= 1, "maxpool1d window must be >= 1");
        let xs = self.nodes[x.0].value.shape().to_vec();
        assert_eq!(xs.len(), 3, "maxpool1d needs [B,T,C]");
        let (bsz, t, c) = (xs[0], xs[1], xs[2]);
        let t_out = t / window;
        let mut out = vec![0.0; bsz * t_out * c];
        let mut argmax = vec![0usize; bsz * t_out * c];
        {
            let xv = self.nodes[x.0].value.data();
            for bi in 0..bsz {
                for to in 0..t_out {
                    for ci in 0..c {
                        let mut best = f64::NEG_INFINITY;
                        let mut best_idx = 0;
                        for dt in 0..window {
                            let idx = (bi * t + to * window + dt) * c + ci;
                            if xv[idx] > best {
                                best = xv[idx];
                                best_idx = idx;
                            }
                        }
                        let oi = (bi * t_out + to) * c + ci;
                        out[oi] = best;
                        argmax[oi] = best_idx;
                    }
                }
            }
        }
        self.push(Tensor::from_vec(&[bsz, t_out, c], out), Op::MaxPool1d { x: x.0, argmax })
    }

    /// Inverted dropout: in training, zero each element with probability `p`
    /// and rescale survivors by 1/(1−p); in inference, the identity.
    pub fn dropout(&mut self, x: Var, p: f64, training: bool) -> Var {
        assert!((0.0..1.0).contains(&p), "dropout p must be in [0, 1)");
        if !training || p == 0.0 {
            let v = self.nodes[x.0].value.clone();
            return self.push(v, Op::Reshape(x.0));
        }
        let shape = self.nodes[x.0].value.shape().to_vec();
        let keep = 1.0 / (1.0 - p);
        let mask: Vec<f64> = (0..self.nodes[x.0].value.len())
            .map(|_| if self.rng.gen::<f64>() < p { 0.0 } else { keep })
            .collect();
        let mask = self.input(Tensor::from_vec(&shape, mask));
        self.mul(x, mask)
    }

    /// Slice `[t0, t1)` along the time axis of a rank-2 or rank-3 tensor.
    pub fn slice_time(&mut self, x: Var, t0: usize, t1: usize) -> Var {
        let xs = self.nodes[x.0].value.shape().to_vec();
        let (bsz, t, c) = axis1_view(&xs);
        assert!(t0 < t1 && t1 <= t, "slice_time [{t0},{t1}) out of range for T={t}");
        let span = t1 - t0;
        let mut out = vec![0.0; bsz * span * c];
        {
            let xv = self.nodes[x.0].value.data();
            for bi in 0..bsz {
                let src = &xv[(bi * t + t0) * c..(bi * t + t1) * c];
                out[bi * span * c..(bi + 1) * span * c].copy_from_slice(src);
            }
        }
        let mut out_shape = xs;
        out_shape[1] = span;
        self.push(Tensor::from_vec(&out_shape, out), Op::SliceTime { x: x.0, t0 })
    }

    /// Concatenate along the time axis; all parts share batch and channel dims.
    pub fn concat_time(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty(), "concat_time needs at least one part");
        let first = self.nodes[parts[0].0].value.shape().to_vec();
        let (bsz, _, c) = axis1_view(&first);
        let mut total = 0;
        for p in parts {
            let (pb, pt, pc) = axis1_view(self.nodes[p.0].value.shape());
            assert_eq!((pb, pc), (bsz, c), "concat_time parts disagree on batch/channels");
            total += pt;
        }
        let mut out = vec![0.0; bsz * total * c];
        let mut offset = 0;
        for p in parts {
            let (_, pt, _) = axis1_view(self.nodes[p.0].value.shape());
            let pv = self.nodes[p.0].value.data();
            for bi in 0..bsz {
                let dst = (bi * total + offset) * c;
                let src = bi * pt * c;
                out[dst..dst + pt * c].copy_from_slice(&pv[src..src + pt * c]);
            }
            offset += pt;
        }
        let mut out_shape = first;
        out_shape[1] = total;
        self.push(Tensor::from_vec(&out_shape, out), Op::ConcatTime(parts.iter().map(|v| v.0).collect()))
    }

    /// View with a new shape of identical element count.
    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Var {
        let v = self.nodes[x.0].value.clone().reshaped(shape);
        self.push(v, Op::Reshape(x.0))
    }

    pub fn sum_all(&mut self, x: Var) -> Var {
        let s = self.nodes[x.0].value.data().iter().sum();
        self.push(Tensor::scalar(s), Op::SumAll(x.0))
    }

    pub fn mean_all(&mut self, x: Var) -> Var {
        let v = &self.nodes[x.0].value;
        let s = v.data().iter().sum::<f64>() / v.len() as f64;
        self.push(Tensor::scalar(s), Op::MeanAll(x.0))
    }

    /// Row means of a `[B, T]` tensor, producing `[B]`.
    pub fn mean_rows(&mut self, x: Var) -> Var {
        let xs = self.nodes[x.0].value.shape().to_vec();
        assert_eq!(xs.len(), 2, "mean_rows needs [B,T]");
        let (bsz, t) = (xs[0], xs[1]);
        let xv = self.nodes[x.0].value.data();
        let out: Vec<f64> =
            (0..bsz).map(|bi| xv[bi * t..(bi + 1) * t].iter().sum::<f64>() / t as f64).collect();
        self.push(Tensor::from_vec(&[bsz], out), Op::MeanRows(x.0))
    }

    /// Broadcast a `[B]` vector across `cols` columns, producing `[B, cols]`.
    pub fn broadcast_col(&mut self, x: Var, cols: usize) -> Var {
        let xs = self.nodes[x.0].value.shape().to_vec();
        assert_eq!(xs.len(), 1, "broadcast_col needs [B]");
        let bsz = xs[0];
        let xv = self.nodes[x.0].value.data();
        let mut out = vec![0.0; bsz * cols];
        for bi in 0..bsz {
            out[bi * cols..(bi + 1) * cols].fill(xv[bi]);
        }
        self.push(Tensor::from_vec(&[bsz, cols], out), Op::BroadcastCol { x: x.0, cols })
    }

    /// Reverse pass from a scalar output. Gradients of interior nodes are
    /// consumed as they propagate; leaf gradients are retained for querying.
    pub fn backward(&mut self, out: Var) -> Gradients {
        assert_eq!(self.nodes[out.0].value.len(), 1, "backward needs a scalar output");
        let mut grads: Vec<Option<Tensor>> = Vec::with_capacity(self.nodes.len());
        grads.resize_with(self.nodes.len(), || None);
        grads[out.0] = Some(Tensor::scalar(1.0));

        for id in (0..=out.0).rev() {
            if matches!(self.nodes[id].op, Op::Leaf) {
                continue;
            }
            let g = match grads[id].take() {
                Some(g) => g,
                None => continue,
            };
            self.propagate(id, &g, &mut grads);
        }
        Gradients { grads }
    }

    fn propagate(&self, id: usize, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let nodes = &self.nodes;
        let acc = |grads: &mut [Option<Tensor>], src: usize, f: &mut dyn FnMut(&mut [f64])| {
            let slot = grads[src].get_or_insert_with(|| Tensor::zeros(nodes[src].value.shape()));
            f(slot.data_mut());
        };
        let gv = g.data();
        match &nodes[id].op {
            Op::Leaf => {}
            Op::Add(a, b) => {
                acc(grads, *a, &mut |ga| {
                    for (x, &d) in ga.iter_mut().zip(gv) {
                        *x += d;
                    }
                });
                acc(grads, *b, &mut |gb| {
                    for (x, &d) in gb.iter_mut().zip(gv) {
                        *x += d;
                    }
                });
            }
            Op::Sub(a, b) => {
                acc(grads, *a, &mut |ga| {
                    for (x, &d) in ga.iter_mut().zip(gv) {
                        *x += d;
                    }
                });
                acc(grads, *b, &mut |gb| {
                    for (x, &d) in gb.iter_mut().zip(gv) {
                        *x -= d;
                    }
                });
            }
            Op::Mul(a, b) => {
                let (av, bv) = (nodes[*a].value.data(), nodes[*b].value.data());
                acc(grads, *a, &mut |ga| {
                    for i in 0..gv.len() {
                        ga[i] += gv[i] * bv[i];
                    }
                });
                acc(grads, *b, &mut |gb| {
                    for i in 0..gv.len() {
                        gb[i] += gv[i] * av[i];
                    }
                });
            }
            Op::Div(a, b) => {
                let (av, bv) = (nodes[*a].value.data(), nodes[*b].value.data());
                acc(grads, *a, &mut |ga| {
                    for i in 0..gv.len() {
                        ga[i] += gv[i] / bv[i];
                    }
                });
                acc(grads, *b, &mut |gb| {
                    for i in 0..gv.len() {
                        gb[i] -= gv[i] * av[i] / (bv[i] * bv[i]);
                    }
                });
            }
            Op::Neg(a) => acc(grads, *a, &mut |ga| {
                for (x, &d) in ga.iter_mut().zip(gv) {
                    *x -= d;
                }
            }),
            Op::Tanh(a) => {
                let yv = nodes[id].value.data();
                acc(grads, *a, &mut |ga| {
                    for i in 0..gv.len() {
                        ga[i] += gv[i] * (1.0 - yv[i] * yv[i]);
                    }
                });
            }
            Op::Sigmoid(a) => {
                let yv = nodes[id].value.data();
                acc(grads, *a, &mut |ga| {
                    for i in 0..gv.len() {
                        ga[i] += gv[i] * yv[i] * (1.0 - yv[i]);
                    }
                });
            }
            Op::Exp(a) => {
                let yv = nodes[id].value.data();
                acc(grads, *a, &mut |ga| {
                    for i in 0..gv.len() {
                        ga[i] += gv[i] * yv[i];
                    }
                });
            }
            Op::Ln(a) => {
                let av = nodes[*a].value.data();
                acc(grads, *a, &mut |ga| {
                    for i in 0..gv.len() {
                        ga[i] += gv[i] / av[i];
                    }
                });
            }
            Op::Sqrt(a) => {
                let yv = nodes[id].value.data();
                acc(grads, *a, &mut |ga| {
                    for i in 0..gv.len() {
                        ga[i] += gv[i] * 0.5 / yv[i];
                    }
                });
            }
            Op::Square(a) => {
                let av = nodes[*a].value.data();
                acc(grads, *a, &mut |ga| {
                    for i in 0..gv.len() {
                        ga[i] += gv[i] * 2.0 * av[i];
                    }
                });
            }
            Op::Softplus(a) => {
                let av = nodes[*a].value.data();
                acc(grads, *a, &mut |ga| {
                    for i in 0..gv.len() {
                        ga[i] += gv[i] / (1.0 + (-av[i]).exp());
                    }
                });
            }
            Op::AddScalar(a, _) => acc(grads, *a, &mut |ga| {
                for (x, &d) in ga.iter_mut().zip(gv) {
                    *x += d;
                }
            }),
            Op::MulScalar(a, c) => {
                let c = *c;
                acc(grads, *a, &mut |ga| {
                    for (x, &d) in ga.iter_mut().zip(gv) {
                        *x += d * c;
                    }
                });
            }
            Op::Dense { x, w, b } => {
                let (n, i) = matrix_view(nodes[*x].value.shape());
                let o = nodes[*w].value.shape()[1];
                let xv = nodes[*x].value.data();
                let wv = nodes[*w].value.data();
                acc(grads, *x, &mut |gx| {
                    for r in 0..n {
                        let grow = &gv[r * o..(r + 1) * o];
                        let gxrow = &mut gx[r * i..(r + 1) * i];
                        for k in 0..i {
                            let wrow = &wv[k * o..(k + 1) * o];
                            let mut s = 0.0;
                            for j in 0..o {
                                s += grow[j] * wrow[j];
                            }
                            gxrow[k] += s;
                        }
                    }
                });
                acc(grads, *w, &mut |gw| {
                    for r in 0..n {
                        let grow = &gv[r * o..(r + 1) * o];
                        let xrow = &xv[r * i..(r + 1) * i];
                        for (k, &xk) in xrow.iter().enumerate() {
                            let gwrow = &mut gw[k * o..(k + 1) * o];
                            for (gj, &dj) in gwrow.iter_mut().zip(grow) {
                                *gj += xk * dj;
                            }
                        }
                    }
                });
                if let Some(b) = b {
                    acc(grads, *b, &mut |gb| {
                        for r in 0..n {
                            let grow = &gv[r * o..(r + 1) * o];
                            for (gj, &dj) in gb.iter_mut().zip(grow) {
                                *gj += dj;
                            }
                        }
                    });
                }
            }
            Op::Conv1d { x, k, stride } => {
                let xs = nodes[*x].value.shape();
                let ks = nodes[*k].value.shape();
                let (bsz, t, cin) = (xs[0], xs[1], xs[2]);
                let (kw, _, cout) = (ks[0], ks[1], ks[2]);
                let t_out = (t - kw) / stride + 1;
                let xv = nodes[*x].value.data();
                let kv = nodes[*k].value.data();
                acc(grads, *x, &mut |gx| {
                    for bi in 0..bsz {
                        for to in 0..t_out {
                            let grow = &gv[(bi * t_out + to) * cout..(bi * t_out + to + 1) * cout];
                            for dt in 0..kw {
                                let gxrow = &mut gx[(bi * t + to * stride + dt) * cin
                                    ..(bi * t + to * stride + dt + 1) * cin];
                                for (ci, gxc) in gxrow.iter_mut().enumerate() {
                                    let krow = &kv[(dt * cin + ci) * cout..(dt * cin + ci + 1) * cout];
                                    let mut s = 0.0;
                                    for j in 0..cout {
                                        s += grow[j] * krow[j];
                                    }
                                    *gxc += s;
                                }
                            }
                        }
                    }
                });
                acc(grads, *k, &mut |gk| {
                    for bi in 0..bsz {
                        for to in 0..t_out {
                            let grow = &gv[(bi * t_out + to) * cout..(bi * t_out + to + 1) * cout];
                            for dt in 0..kw {
                                let xrow = &xv[(bi * t + to * stride + dt) * cin
                                    ..(bi * t + to * stride + dt + 1) * cin];
                                for (ci, &xc) in xrow.iter().enumerate() {
                                    let gkrow =
                                        &mut gk[(dt * cin + ci) * cout..(dt * cin + ci + 1) * cout];
                                    for (gj, &dj) in gkrow.iter_mut().zip(grow) {
                                        *gj += xc * dj;
                                    }
                                }
                            }
                        }
                    }
                });
            }
            Op::MaxPool1d { x, argmax } => {
                acc(grads, *x, &mut |gx| {
                    for (oi, &src) in argmax.iter().enumerate() {
                        gx[src] += gv[oi];
                    }
                });
            }
            Op::SliceTime { x, t0 } => {
                let (bsz, t, c) = axis1_view(nodes[*x].value.shape());
                let span = g.len() / (bsz * c);
                acc(grads, *x, &mut |gx| {
                    for bi in 0..bsz {
                        let dst = (bi * t + t0) * c;
                        let src = bi * span * c;
                        for j in 0..span * c {
                            gx[dst + j] += gv[src + j];
                        }
                    }
                });
            }
            Op::ConcatTime(parts) => {
                let (bsz, total, c) = axis1_view(nodes[id].value.shape());
                let mut offset = 0;
                for p in parts {
                    let (_, pt, _) = axis1_view(nodes[*p].value.shape());
                    acc(grads, *p, &mut |gp| {
                        for bi in 0..bsz {
                            let src = (bi * total + offset) * c;
                            let dst = bi * pt * c;
                            for j in 0..pt * c {
                                gp[dst + j] += gv[src + j];
                            }
                        }
                    });
                    offset += pt;
                }
            }
            Op::Reshape(a) => acc(grads, *a, &mut |ga| {
                for (x, &d) in ga.iter_mut().zip(gv) {
                    *x += d;
                }
            }),
            Op::SumAll(a) => {
                let d = gv[0];
                acc(grads, *a, &mut |ga| {
                    for x in ga.iter_mut() {
                        *x += d;
                    }
                });
            }
            Op::MeanAll(a) => {
                let d = gv[0] / nodes[*a].value.len() as f64;
                acc(grads, *a, &mut |ga| {
                    for x in ga.iter_mut() {
                        *x += d;
                    }
                });
            }
            Op::MeanRows(a) => {
                let t = nodes[*a].value.shape()[1];
                acc(grads, *a, &mut |ga| {
                    for (bi, &d) in gv.iter().enumerate() {
                        let d = d / t as f64;
                        for x in ga[bi * t..(bi + 1) * t].iter_mut() {
                            *x += d;
                        }
                    }
                });
            }
            Op::BroadcastCol { x, cols } => {
                acc(grads, *x, &mut |gx| {
                    for (bi, gxb) in gx.iter_mut().enumerate() {
                        for j in 0..*cols {
                            *gxb += gv[bi * cols + j];
                        }
                    }
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_plus_sum_rule() {
        // d/dx (x*y + x) at x=2, y=3 is y + 1 = 4.
        let mut tape = Tape::new(0);
        let x = tape.scalar_input(2.0);
        let y = tape.scalar_input(3.0);
        let xy = tape.mul(x, y);
        let out = tape.add(xy, x);
        assert_eq!(tape.scalar_value(out), 8.0);
        let grads = tape.backward(out);
        assert_eq!(grads.get(&tape, x).item(), 4.0);
        assert_eq!(grads.get(&tape, y).item(), 2.0);
    }

    #[test]
    fn dense_forward_example() {
        let mut tape = Tape::new(0);
        let x = tape.input(Tensor::from_vec(&[1, 2], vec![1.0, 2.0]));
        let w = tape.input(Tensor::from_vec(&[2, 1], vec![1.0, 1.0]));
        let b = tape.input(Tensor::from_vec(&[1], vec![0.0]));
        let y = tape.dense(x, w, Some(b)).unwrap();
        assert_eq!(tape.value(y).data(), &[3.0]);
    }

    #[test]
    fn dense_weight_grad_of_sum_is_xt_ones() {
        let mut tape = Tape::new(0);
        let x = tape.input(Tensor::from_vec(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]));
        let w = tape.input(Tensor::from_vec(&[2, 3], vec![0.1; 6]));
        let y = tape.dense(x, w, None).unwrap();
        let s = tape.sum_all(y);
        let grads = tape.backward(s);
        // d(sum)/dw[i,o] = sum_n x[n,i]: column sums 4 and 6 replicated over o.
        assert_eq!(grads.get(&tape, w).data(), &[4.0, 4.0, 4.0, 6.0, 6.0, 6.0]);
    }

    #[test]
    fn dense_shape_errors() {
        let mut tape = Tape::new(0);
        let x = tape.input(Tensor::zeros(&[1, 3]));
        let w = tape.input(Tensor::zeros(&[2, 4]));
        assert!(tape.dense(x, w, None).is_err());
    }

    #[test]
    fn conv1d_shape_arithmetic() {
        let mut tape = Tape::new(0);
        let x = tape.input(Tensor::zeros(&[1, 10, 1]));
        let k = tape.input(Tensor::zeros(&[8, 1, 4]));
        let y = tape.conv1d(x, k, 1).unwrap();
        assert_eq!(tape.value(y).shape(), &[1, 3, 4]);
        let short = tape.input(Tensor::zeros(&[1, 5, 1]));
        assert!(tape.conv1d(short, k, 1).is_err());
    }

    #[test]
    fn conv1d_identity_kernel() {
        let mut tape = Tape::new(0);
        let data: Vec<f64> = (0..12).map(|v| v as f64 * 0.25).collect();
        let x = tape.input(Tensor::from_vec(&[2, 6, 1], data.clone()));
        let k = tape.input(Tensor::from_vec(&[1, 1, 1], vec![1.0]));
        let y = tape.conv1d(x, k, 1).unwrap();
        assert_eq!(tape.value(y).data(), &data[..]);
    }

    #[test]
    fn maxpool_values_and_tie_gradient() {
        let mut tape = Tape::new(0);
        let x = tape.input(Tensor::from_vec(&[1, 4, 1], vec![1.0, 3.0, 2.0, 4.0]));
        let y = tape.maxpool1d(x, 2);
        assert_eq!(tape.value(y).data(), &[3.0, 4.0]);

        // Constant input: gradient routed to the first element of each window.
        let c = tape.input(Tensor::from_vec(&[1, 4, 1], vec![7.0; 4]));
        let yc = tape.maxpool1d(c, 2);
        let s = tape.sum_all(yc);
        let grads = tape.backward(s);
        assert_eq!(grads.get(&tape, c).data(), &[1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn dropout_identity_paths() {
        let mut tape = Tape::new(9);
        let x = tape.input(Tensor::from_vec(&[1, 4], vec![1.0, 2.0, 3.0, 4.0]));
        let inference = tape.dropout(x, 0.5, false);
        assert_eq!(tape.value(inference).data(), tape.value(x).data());
        let p0 = tape.dropout(x, 0.0, true);
        assert_eq!(tape.value(p0).data(), tape.value(x).data());
    }

    #[test]
    fn dropout_keep_fraction_statistics() {
        let n = 100_000;
        let mut tape = Tape::new(1234);
        let x = tape.input(Tensor::filled(&[1, n], 1.0));
        let y = tape.dropout(x, 0.5, true);
        let kept = tape.value(y).data().iter().filter(|&&v| v != 0.0).count();
        // 3 sigma binomial bound around n/2.
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((kept as f64 - n as f64 * 0.5).abs() < 3.0 * sigma, "kept {kept}");
        // Survivors are rescaled by 1/(1-p) = 2.
        assert!(tape.value(y).data().iter().all(|&v| v == 0.0 || v == 2.0));
    }

    #[test]
    fn slice_concat_roundtrip() {
        let mut tape = Tape::new(0);
        let data: Vec<f64> = (0..24).map(f64::from).collect();
        let x = tape.input(Tensor::from_vec(&[2, 6, 2], data.clone()));
        let a = tape.slice_time(x, 0, 2);
        let b = tape.slice_time(x, 2, 6);
        let back = tape.concat_time(&[a, b]);
        assert_eq!(tape.value(back).data(), &data[..]);
        let s = tape.sum_all(back);
        let grads = tape.backward(s);
        assert!(grads.get(&tape, x).data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn backward_is_linear_in_output_combination() {
        // grad(a*f + b*g) = a*grad f + b*grad g for scalar weights.
        let run = |wa: f64, wb: f64| -> f64 {
            let mut tape = Tape::new(0);
            let x = tape.scalar_input(0.7);
            let f = tape.square(x);
            let g = tape.tanh(x);
            let fa = tape.mul_scalar(f, wa);
            let gb = tape.mul_scalar(g, wb);
            let out = tape.add(fa, gb);
            let grads = tape.backward(out);
            grads.get(&tape, x).item()
        };
        let gf = run(1.0, 0.0);
        let gg = run(0.0, 1.0);
        let combined = run(2.0, -3.0);
        assert!((combined - (2.0 * gf - 3.0 * gg)).abs() < 1e-12);
    }

    #[test]
    fn forward_is_deterministic_for_fixed_seed() {
        let build = |seed: u64| -> Vec<f64> {
            let mut tape = Tape::new(seed);
            let x = tape.input(Tensor::filled(&[1, 64], 1.0));
            let d = tape.dropout(x, 0.3, true);
            let t = tape.tanh(d);
            tape.value(t).data().to_vec()
        };
        assert_eq!(build(42), build(42));
        assert_ne!(build(42), build(43));
    }
}
