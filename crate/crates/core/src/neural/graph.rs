//! Tape-based reverse-mode automatic differentiation.
//!
//! Operations execute eagerly and append a node to the tape; `backward`
//! walks the tape once in reverse, accumulating exact gradients. A graph is
//! single-use: building ops after `backward`, or calling `backward` twice,
//! is a state error. Every operation checks its output for NaN/Inf so a
//! numeric blow-up surfaces at the op that produced it.

use super::tensor::{matmul_nn, matmul_nt, matmul_tn, Tensor};
use super::NeuralError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug, Clone, Copy)]
enum Op {
    Leaf,
    /// `a · b`
    MatMul(NodeId, NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    /// Elementwise product.
    Mul(NodeId, NodeId),
    /// `[m×n] + [1×n]`, the row vector broadcast over rows.
    AddRow(NodeId, NodeId),
    Sigmoid(NodeId),
    Tanh(NodeId),
    /// `1 − x` elementwise.
    OneMinus(NodeId),
    /// Mean over all elements, producing `1×1`.
    Mean(NodeId),
}

struct Node {
    value: Tensor,
    op: Op,
}

pub struct Graph {
    nodes: Vec<Node>,
    grads: Vec<Tensor>,
    consumed: bool,
}

impl Graph {
    pub fn new() -> Graph {
        Graph {
            nodes: Vec::new(),
            grads: Vec::new(),
            consumed: false,
        }
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    /// Gradient of the loss with respect to a node; valid after `backward`.
    pub fn grad(&self, id: NodeId) -> &Tensor {
        &self.grads[id.0]
    }

    pub fn leaf(&mut self, value: Tensor) -> NodeId {
        self.push_unchecked(value, Op::Leaf)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NeuralError> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.cols() != tb.rows() {
            return Err(self.shape_err("matmul", a, b));
        }
        let out = matmul_nn(ta, tb);
        self.push("matmul", out, Op::MatMul(a, b))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NeuralError> {
        self.zip("add", a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NeuralError> {
        self.zip("sub", a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NeuralError> {
        self.zip("mul", a, b, |x, y| x * y, Op::Mul(a, b))
    }

    /// Broadcast-add a `1×n` row vector to every row of an `m×n` matrix.
    pub fn add_row(&mut self, a: NodeId, row: NodeId) -> Result<NodeId, NeuralError> {
        let (ta, tr) = (self.value(a), self.value(row));
        if tr.rows() != 1 || tr.cols() != ta.cols() {
            return Err(self.shape_err("add_row", a, row));
        }
        let mut out = ta.clone();
        let r = tr.data().to_vec();
        for chunk in out.data_mut().chunks_exact_mut(r.len()) {
            for (o, v) in chunk.iter_mut().zip(&r) {
                *o += v;
            }
        }
        self.push("add_row", out, Op::AddRow(a, row))
    }

    pub fn sigmoid(&mut self, a: NodeId) -> Result<NodeId, NeuralError> {
        self.map("sigmoid", a, |x| 1.0 / (1.0 + (-x).exp()), Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: NodeId) -> Result<NodeId, NeuralError> {
        self.map("tanh", a, f64::tanh, Op::Tanh(a))
    }

    pub fn one_minus(&mut self, a: NodeId) -> Result<NodeId, NeuralError> {
        self.map("one_minus", a, |x| 1.0 - x, Op::OneMinus(a))
    }

    pub fn mean(&mut self, a: NodeId) -> Result<NodeId, NeuralError> {
        let t = self.value(a);
        let m = t.data().iter().sum::<f64>() / t.len() as f64;
        let out = Tensor::from_vec(1, 1, vec![m]).expect("1x1");
        self.push("mean", out, Op::Mean(a))
    }

    /// Mean squared error between two same-shape nodes, as a `1×1` node.
    pub fn mse(&mut self, pred: NodeId, target: NodeId) -> Result<NodeId, NeuralError> {
        let diff = self.sub(pred, target)?;
        let sq = self.mul(diff, diff)?;
        self.mean(sq)
    }

    /// Seed `d loss / d loss = 1` and accumulate gradients down the tape.
    pub fn backward(&mut self, loss: NodeId) -> Result<(), NeuralError> {
        if self.consumed {
            return Err(NeuralError::GraphConsumed);
        }
        self.consumed = true;
        if self.value(loss).shape() != (1, 1) {
            return Err(NeuralError::Shape {
                op: "backward",
                left: self.value(loss).shape_string(),
                right: "1x1".to_string(),
            });
        }

        self.grads = self
            .nodes
            .iter()
            .map(|n| Tensor::zeros(n.value.rows(), n.value.cols()))
            .collect();
        self.grads[loss.0].data_mut()[0] = 1.0;

        for i in (0..self.nodes.len()).rev() {
            if self.grads[i].data().iter().all(|&g| g == 0.0) {
                continue;
            }
            let g = self.grads[i].clone();
            match self.nodes[i].op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let da = matmul_nt(&g, &self.nodes[b.0].value);
                    let db = matmul_tn(&self.nodes[a.0].value, &g);
                    accumulate(&mut self.grads[a.0], da.data());
                    accumulate(&mut self.grads[b.0], db.data());
                }
                Op::Add(a, b) => {
                    accumulate(&mut self.grads[a.0], g.data());
                    accumulate(&mut self.grads[b.0], g.data());
                }
                Op::Sub(a, b) => {
                    accumulate(&mut self.grads[a.0], g.data());
                    accumulate_neg(&mut self.grads[b.0], g.data());
                }
                Op::Mul(a, b) => {
                    if a == b {
                        // d(x·x) = 2x dx; accumulate both sides in one pass.
                        let x = self.nodes[a.0].value.data().to_vec();
                        for (ga, (gv, xv)) in
                            self.grads[a.0].data_mut().iter_mut().zip(g.data().iter().zip(&x))
                        {
                            *ga += 2.0 * gv * xv;
                        }
                    } else {
                        let (va, vb) =
                            (self.nodes[a.0].value.data().to_vec(), self.nodes[b.0].value.data().to_vec());
                        for (ga, (gv, bv)) in
                            self.grads[a.0].data_mut().iter_mut().zip(g.data().iter().zip(&vb))
                        {
                            *ga += gv * bv;
                        }
                        for (gb, (gv, av)) in
                            self.grads[b.0].data_mut().iter_mut().zip(g.data().iter().zip(&va))
                        {
                            *gb += gv * av;
                        }
                    }
                }
                Op::AddRow(a, row) => {
                    accumulate(&mut self.grads[a.0], g.data());
                    let cols = self.grads[row.0].cols();
                    let gr = self.grads[row.0].data_mut();
                    for chunk in g.data().chunks_exact(cols) {
                        for (o, v) in gr.iter_mut().zip(chunk) {
                            *o += v;
                        }
                    }
                }
                Op::Sigmoid(a) => {
                    let y = self.nodes[i].value.data().to_vec();
                    for (ga, (gv, yv)) in
                        self.grads[a.0].data_mut().iter_mut().zip(g.data().iter().zip(&y))
                    {
                        *ga += gv * yv * (1.0 - yv);
                    }
                }
                Op::Tanh(a) => {
                    let y = self.nodes[i].value.data().to_vec();
                    for (ga, (gv, yv)) in
                        self.grads[a.0].data_mut().iter_mut().zip(g.data().iter().zip(&y))
                    {
                        *ga += gv * (1.0 - yv * yv);
                    }
                }
                Op::OneMinus(a) => {
                    accumulate_neg(&mut self.grads[a.0], g.data());
                }
                Op::Mean(a) => {
                    let scale = g.data()[0] / self.grads[a.0].len() as f64;
                    for ga in self.grads[a.0].data_mut() {
                        *ga += scale;
                    }
                }
            }
        }
        Ok(())
    }

    fn push(&mut self, op_name: &'static str, value: Tensor, op: Op) -> Result<NodeId, NeuralError> {
        if self.consumed {
            return Err(NeuralError::GraphConsumed);
        }
        if !value.all_finite() {
            return Err(NeuralError::Numeric {
                op: op_name,
                step: None,
            });
        }
        Ok(self.push_unchecked(value, op))
    }

    fn push_unchecked(&mut self, value: Tensor, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        NodeId(self.nodes.len() - 1)
    }

    fn zip(
        &mut self,
        name: &'static str,
        a: NodeId,
        b: NodeId,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<NodeId, NeuralError> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(self.shape_err(name, a, b));
        }
        let data = ta.data().iter().zip(tb.data()).map(|(x, y)| f(*x, *y)).collect();
        let out = Tensor::from_vec(ta.rows(), ta.cols(), data).expect("same shape");
        self.push(name, out, op)
    }

    fn map(
        &mut self,
        name: &'static str,
        a: NodeId,
        f: impl Fn(f64) -> f64,
        op: Op,
    ) -> Result<NodeId, NeuralError> {
        let t = self.value(a);
        let data = t.data().iter().map(|x| f(*x)).collect();
        let out = Tensor::from_vec(t.rows(), t.cols(), data).expect("same shape");
        self.push(name, out, op)
    }

    fn shape_err(&self, op: &'static str, a: NodeId, b: NodeId) -> NeuralError {
        NeuralError::Shape {
            op,
            left: self.value(a).shape_string(),
            right: self.value(b).shape_string(),
        }
    }
}

impl Default for Graph {
    fn default() -> Self {
        Graph::new()
    }
}

fn accumulate(into: &mut Tensor, from: &[f64]) {
    for (o, v) in into.data_mut().iter_mut().zip(from) {
        *o += v;
    }
}

fn accumulate_neg(into: &mut Tensor, from: &[f64]) {
    for (o, v) in into.data_mut().iter_mut().zip(from) {
        *o -= v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(rows: usize, cols: usize, data: &[f64]) -> Tensor {
        Tensor::from_vec(rows, cols, data.to_vec()).unwrap()
    }

    #[test]
    fn mse_gradient_analytic() {
        // d/dx mean((x - 0)^2) at x = ones is 2/len per element.
        let mut g = Graph::new();
        let x = g.leaf(t(1, 24, &[1.0; 24]));
        let zero = g.leaf(Tensor::zeros(1, 24));
        let loss = g.mse(x, zero).unwrap();
        assert_eq!(g.value(loss).data()[0], 1.0);
        g.backward(loss).unwrap();
        for &gv in g.grad(x).data() {
            assert!((gv - 2.0 / 24.0).abs() < 1e-15);
        }
        // Zero loss → zero gradients.
        let mut g2 = Graph::new();
        let a = g2.leaf(t(1, 4, &[3.0; 4]));
        let b = g2.leaf(t(1, 4, &[3.0; 4]));
        let loss2 = g2.mse(a, b).unwrap();
        g2.backward(loss2).unwrap();
        assert!(g2.grad(a).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matmul_gradients_hand_checked() {
        // loss = mean(A·B) with A 1x2, B 2x1: loss = a0·b0 + a1·b1.
        let mut g = Graph::new();
        let a = g.leaf(t(1, 2, &[2.0, 3.0]));
        let b = g.leaf(t(2, 1, &[5.0, 7.0]));
        let prod = g.matmul(a, b).unwrap();
        let loss = g.mean(prod).unwrap();
        assert_eq!(g.value(loss).data()[0], 31.0);
        g.backward(loss).unwrap();
        assert_eq!(g.grad(a).data(), &[5.0, 7.0]);
        assert_eq!(g.grad(b).data(), &[2.0, 3.0]);
    }

    #[test]
    fn broadcast_row_gradient_sums_over_rows() {
        let mut g = Graph::new();
        let x = g.leaf(t(3, 2, &[1.0; 6]));
        let b = g.leaf(t(1, 2, &[0.5, -0.5]));
        let y = g.add_row(x, b).unwrap();
        let loss = g.mean(y).unwrap();
        g.backward(loss).unwrap();
        // d mean / d b_j = (number of rows) / len = 3/6.
        assert_eq!(g.grad(b).data(), &[0.5, 0.5]);
    }

    #[test]
    fn shared_operand_square_doubles_gradient() {
        let mut g = Graph::new();
        let x = g.leaf(t(1, 1, &[3.0]));
        let sq = g.mul(x, x).unwrap();
        let loss = g.mean(sq).unwrap();
        g.backward(loss).unwrap();
        assert_eq!(g.grad(x).data(), &[6.0]);
    }

    #[test]
    fn graph_reuse_is_a_state_error() {
        let mut g = Graph::new();
        let x = g.leaf(t(1, 1, &[1.0]));
        let loss = g.mean(x).unwrap();
        g.backward(loss).unwrap();
        assert!(matches!(g.backward(loss), Err(NeuralError::GraphConsumed)));
        assert!(matches!(g.one_minus(x), Err(NeuralError::GraphConsumed)));
    }

    #[test]
    fn non_finite_output_is_a_numeric_error() {
        let mut g = Graph::new();
        let big = g.leaf(t(1, 1, &[1e308]));
        let err = g.mul(big, big).unwrap_err();
        assert!(matches!(err, NeuralError::Numeric { .. }), "{err}");
    }

    #[test]
    fn shape_mismatch_names_both_shapes() {
        let mut g = Graph::new();
        let a = g.leaf(Tensor::zeros(2, 3));
        let b = g.leaf(Tensor::zeros(2, 2));
        let err = g.matmul(a, b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2x3") && msg.contains("2x2"), "{msg}");
    }
}
