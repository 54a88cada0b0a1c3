//! The three forecaster architectures behind one interface: an input window
//! of `input_hours × n_channels` values maps to the 24 hourly values of the
//! next day. FCDNN flattens the window through two tanh layers; LSTM and GRU
//! consume it as a sequence and feed their final hidden state to a linear
//! head. Initial recurrent state is zero.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::features::NormStats;
use crate::rng::SplitMix64;

use super::graph::{Graph, NodeId};
use super::tensor::Tensor;
use super::NeuralError;

/// Hours predicted per forecast: one day ahead.
pub const OUTPUT_HOURS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Fcdnn,
    Lstm,
    Gru,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Architecture::Fcdnn, Architecture::Lstm, Architecture::Gru];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Fcdnn => "fcdnn",
            Architecture::Lstm => "lstm",
            Architecture::Gru => "gru",
        }
    }
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = NeuralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fcdnn" => Ok(Architecture::Fcdnn),
            "lstm" => Ok(Architecture::Lstm),
            "gru" => Ok(Architecture::Gru),
            other => Err(NeuralError::UnknownArchitecture(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub tensor: Tensor,
}

/// Trained (or freshly initialized) weights of one model, together with the
/// normalization statistics the model expects its inputs in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParameters {
    pub architecture: Architecture,
    pub n_channels: usize,
    /// Hours per input window (168 in production, smaller in tests).
    pub input_hours: usize,
    /// FCDNN: the dense layer widths; LSTM/GRU: one entry, the hidden size.
    pub hidden: Vec<usize>,
    pub tensors: Vec<NamedTensor>,
    pub norm_stats: NormStats,
}

impl ModelParameters {
    /// Seeded initialization: every tensor uniform in `±1/√fan_in`, drawn in
    /// tensor order, row-major within each tensor, from one SplitMix64
    /// stream.
    pub fn init(
        architecture: Architecture,
        n_channels: usize,
        input_hours: usize,
        hidden: Vec<usize>,
        norm_stats: NormStats,
        seed: u64,
    ) -> ModelParameters {
        let mut rng = SplitMix64::new(seed);
        let specs = tensor_specs(architecture, n_channels, input_hours, &hidden);
        let tensors = specs
            .into_iter()
            .map(|(name, rows, cols, fan_in)| {
                let bound = 1.0 / (fan_in as f64).sqrt();
                let data = (0..rows * cols).map(|_| rng.next_range(-bound, bound)).collect();
                NamedTensor {
                    name: name.to_string(),
                    tensor: Tensor::from_vec(rows, cols, data).expect("layout shapes consistent"),
                }
            })
            .collect();
        ModelParameters {
            architecture,
            n_channels,
            input_hours,
            hidden,
            tensors,
            norm_stats,
        }
    }

    /// All-zero weights with the same layout (tests, closed-form checks).
    pub fn zeros(
        architecture: Architecture,
        n_channels: usize,
        input_hours: usize,
        hidden: Vec<usize>,
        norm_stats: NormStats,
    ) -> ModelParameters {
        let specs = tensor_specs(architecture, n_channels, input_hours, &hidden);
        let tensors = specs
            .into_iter()
            .map(|(name, rows, cols, _)| NamedTensor {
                name: name.to_string(),
                tensor: Tensor::zeros(rows, cols),
            })
            .collect();
        ModelParameters {
            architecture,
            n_channels,
            input_hours,
            hidden,
            tensors,
            norm_stats,
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors.iter().map(|t| t.tensor.len()).sum()
    }

    pub fn tensor(&self, name: &str) -> Option<&Tensor> {
        self.tensors.iter().find(|t| t.name == name).map(|t| &t.tensor)
    }

    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.tensors
            .iter_mut()
            .find(|t| t.name == name)
            .map(|t| &mut t.tensor)
    }

    /// Recompute the expected layout and check every stored tensor against
    /// it (used after loading checkpoints).
    pub fn validate_shapes(&self) -> Result<(), NeuralError> {
        let specs = tensor_specs(self.architecture, self.n_channels, self.input_hours, &self.hidden);
        if specs.len() != self.tensors.len() {
            return Err(NeuralError::Shape {
                op: "validate",
                left: format!("{} tensors", self.tensors.len()),
                right: format!("{} expected", specs.len()),
            });
        }
        for ((name, rows, cols, _), stored) in specs.iter().zip(&self.tensors) {
            if *name != stored.name || stored.tensor.shape() != (*rows, *cols) {
                return Err(NeuralError::Shape {
                    op: "validate",
                    left: format!("{} {}", stored.name, stored.tensor.shape_string()),
                    right: format!("{name} {rows}x{cols}"),
                });
            }
        }
        if self.norm_stats.mean.len() != self.n_channels {
            return Err(NeuralError::Shape {
                op: "validate",
                left: format!("{} norm channels", self.norm_stats.mean.len()),
                right: format!("{} data channels", self.n_channels),
            });
        }
        Ok(())
    }

    fn rnn_hidden(&self) -> usize {
        self.hidden[0]
    }
}

/// `(name, rows, cols, fan_in)` for every tensor of an architecture.
fn tensor_specs(
    architecture: Architecture,
    n_channels: usize,
    input_hours: usize,
    hidden: &[usize],
) -> Vec<(String, usize, usize, usize)> {
    let mut specs = Vec::new();
    match architecture {
        Architecture::Fcdnn => {
            let mut in_dim = input_hours * n_channels;
            for (i, &h) in hidden.iter().enumerate() {
                specs.push((format!("dense{i}.w"), in_dim, h, in_dim));
                specs.push((format!("dense{i}.b"), 1, h, in_dim));
                in_dim = h;
            }
            specs.push(("head.w".to_string(), in_dim, OUTPUT_HOURS, in_dim));
            specs.push(("head.b".to_string(), 1, OUTPUT_HOURS, in_dim));
        }
        Architecture::Lstm | Architecture::Gru => {
            let h = hidden[0];
            let gates: &[&str] = match architecture {
                Architecture::Lstm => &["i", "f", "g", "o"],
                Architecture::Gru => &["z", "r", "n"],
                Architecture::Fcdnn => unreachable!(),
            };
            for gate in gates {
                specs.push((format!("wx_{gate}"), n_channels, h, n_channels));
                specs.push((format!("wh_{gate}"), h, h, h));
                specs.push((format!("b_{gate}"), 1, h, h));
            }
            specs.push(("head.w".to_string(), h, OUTPUT_HOURS, h));
            specs.push(("head.b".to_string(), 1, OUTPUT_HOURS, h));
        }
    }
    specs
}

/// Graph nodes for every parameter tensor, in `tensors` order.
pub struct ParamNodes {
    pub ids: Vec<NodeId>,
}

pub fn bind_params(graph: &mut Graph, params: &ModelParameters) -> ParamNodes {
    ParamNodes {
        ids: params.tensors.iter().map(|t| graph.leaf(t.tensor.clone())).collect(),
    }
}

impl ParamNodes {
    fn get(&self, params: &ModelParameters, name: &str) -> NodeId {
        let pos = params
            .tensors
            .iter()
            .position(|t| t.name == name)
            .unwrap_or_else(|| panic!("tensor {name} missing"));
        self.ids[pos]
    }
}

/// Run a batch of flattened windows (each `input_hours × n_channels`,
/// hour-major) through the model. Returns the `batch × 24` prediction node.
pub fn forward_model(
    graph: &mut Graph,
    params: &ModelParameters,
    nodes: &ParamNodes,
    batch: &[&[f64]],
) -> Result<NodeId, NeuralError> {
    let expected = params.input_hours * params.n_channels;
    for window in batch {
        if window.len() != expected {
            return Err(NeuralError::Shape {
                op: "forward",
                left: format!("window of {} values", window.len()),
                right: format!(
                    "{}h x {} channels = {expected}",
                    params.input_hours, params.n_channels
                ),
            });
        }
    }
    match params.architecture {
        Architecture::Fcdnn => forward_fcdnn(graph, params, nodes, batch),
        Architecture::Lstm => forward_lstm(graph, params, nodes, batch),
        Architecture::Gru => forward_gru(graph, params, nodes, batch),
    }
}

fn forward_fcdnn(
    graph: &mut Graph,
    params: &ModelParameters,
    nodes: &ParamNodes,
    batch: &[&[f64]],
) -> Result<NodeId, NeuralError> {
    let n = batch.len();
    let flat: Vec<f64> = batch.iter().flat_map(|w| w.iter().copied()).collect();
    let mut x = graph.leaf(Tensor::from_vec(n, params.input_hours * params.n_channels, flat)?);
    for i in 0..params.hidden.len() {
        let w = nodes.get(params, &format!("dense{i}.w"));
        let b = nodes.get(params, &format!("dense{i}.b"));
        let z = graph.matmul(x, w)?;
        let z = graph.add_row(z, b)?;
        x = graph.tanh(z)?;
    }
    let w = nodes.get(params, "head.w");
    let b = nodes.get(params, "head.b");
    let z = graph.matmul(x, w)?;
    graph.add_row(z, b)
}

/// Batch column slices: one `batch × n_channels` tensor per time step.
fn step_tensors(params: &ModelParameters, batch: &[&[f64]]) -> Vec<Tensor> {
    let (n, c) = (batch.len(), params.n_channels);
    (0..params.input_hours)
        .map(|t| {
            let mut data = Vec::with_capacity(n * c);
            for window in batch {
                data.extend_from_slice(&window[t * c..(t + 1) * c]);
            }
            Tensor::from_vec(n, c, data).expect("sizes checked by caller")
        })
        .collect()
}

fn gate(
    graph: &mut Graph,
    x: NodeId,
    wx: NodeId,
    h: NodeId,
    wh: NodeId,
    b: NodeId,
) -> Result<NodeId, NeuralError> {
    let from_x = graph.matmul(x, wx)?;
    let from_h = graph.matmul(h, wh)?;
    let sum = graph.add(from_x, from_h)?;
    graph.add_row(sum, b)
}

fn forward_lstm(
    graph: &mut Graph,
    params: &ModelParameters,
    nodes: &ParamNodes,
    batch: &[&[f64]],
) -> Result<NodeId, NeuralError> {
    let n = batch.len();
    let hs = params.rnn_hidden();
    let p = |name: &str| nodes.get(params, name);
    let (wx_i, wh_i, b_i) = (p("wx_i"), p("wh_i"), p("b_i"));
    let (wx_f, wh_f, b_f) = (p("wx_f"), p("wh_f"), p("b_f"));
    let (wx_g, wh_g, b_g) = (p("wx_g"), p("wh_g"), p("b_g"));
    let (wx_o, wh_o, b_o) = (p("wx_o"), p("wh_o"), p("b_o"));

    let mut h = graph.leaf(Tensor::zeros(n, hs));
    let mut c = graph.leaf(Tensor::zeros(n, hs));
    for (step, xt) in step_tensors(params, batch).into_iter().enumerate() {
        let at_step = |e: NeuralError| e.at_step(step);
        let x = graph.leaf(xt);
        let i_pre = gate(graph, x, wx_i, h, wh_i, b_i).map_err(at_step)?;
        let i = graph.sigmoid(i_pre).map_err(at_step)?;
        let f_pre = gate(graph, x, wx_f, h, wh_f, b_f).map_err(at_step)?;
        let f = graph.sigmoid(f_pre).map_err(at_step)?;
        let o_pre = gate(graph, x, wx_o, h, wh_o, b_o).map_err(at_step)?;
        let o = graph.sigmoid(o_pre).map_err(at_step)?;
        let g_pre = gate(graph, x, wx_g, h, wh_g, b_g).map_err(at_step)?;
        let g = graph.tanh(g_pre).map_err(at_step)?;

        let keep = graph.mul(f, c).map_err(at_step)?;
        let write = graph.mul(i, g).map_err(at_step)?;
        c = graph.add(keep, write).map_err(at_step)?;
        let c_act = graph.tanh(c).map_err(at_step)?;
        h = graph.mul(o, c_act).map_err(at_step)?;
    }
    let z = graph.matmul(h, p("head.w"))?;
    graph.add_row(z, p("head.b"))
}

fn forward_gru(
    graph: &mut Graph,
    params: &ModelParameters,
    nodes: &ParamNodes,
    batch: &[&[f64]],
) -> Result<NodeId, NeuralError> {
    let n = batch.len();
    let hs = params.rnn_hidden();
    let p = |name: &str| nodes.get(params, name);
    let (wx_z, wh_z, b_z) = (p("wx_z"), p("wh_z"), p("b_z"));
    let (wx_r, wh_r, b_r) = (p("wx_r"), p("wh_r"), p("b_r"));
    let (wx_n, wh_n, b_n) = (p("wx_n"), p("wh_n"), p("b_n"));

    let mut h = graph.leaf(Tensor::zeros(n, hs));
    for (step, xt) in step_tensors(params, batch).into_iter().enumerate() {
        let at_step = |e: NeuralError| e.at_step(step);
        let x = graph.leaf(xt);
        let z_pre = gate(graph, x, wx_z, h, wh_z, b_z).map_err(at_step)?;
        let z = graph.sigmoid(z_pre).map_err(at_step)?;
        let r_pre = gate(graph, x, wx_r, h, wh_r, b_r).map_err(at_step)?;
        let r = graph.sigmoid(r_pre).map_err(at_step)?;

        // Candidate uses the reset-gated hidden state.
        let rh = graph.mul(r, h).map_err(at_step)?;
        let n_pre = gate(graph, x, wx_n, rh, wh_n, b_n).map_err(at_step)?;
        let cand = graph.tanh(n_pre).map_err(at_step)?;

        let zc = graph.one_minus(z).map_err(at_step)?;
        let new = graph.mul(zc, cand).map_err(at_step)?;
        let old = graph.mul(z, h).map_err(at_step)?;
        h = graph.add(new, old).map_err(at_step)?;
    }
    let z = graph.matmul(h, p("head.w"))?;
    graph.add_row(z, p("head.b"))
}

/// Forward a single normalized window without recording gradients' use;
/// returns the normalized 24-hour prediction.
pub fn predict_normalized(
    params: &ModelParameters,
    window: &[f64],
) -> Result<Vec<f64>, NeuralError> {
    let mut graph = Graph::new();
    let nodes = bind_params(&mut graph, params);
    let out = forward_model(&mut graph, params, &nodes, &[window])?;
    Ok(graph.value(out).data().to_vec())
}

/// Forecast in MW: normalizes the raw window with the model's stats, runs
/// the forward pass, and maps the prediction back to MW.
pub fn predict_mw(params: &ModelParameters, raw_window: &[f64]) -> Result<Vec<f64>, NeuralError> {
    let stats = &params.norm_stats;
    let c = params.n_channels;
    let normalized: Vec<f64> = raw_window
        .iter()
        .enumerate()
        .map(|(j, v)| (v - stats.mean[j % c]) / stats.sd[j % c])
        .collect();
    let out = predict_normalized(params, &normalized)?;
    let mw = crate::features::invert_target(&out, stats);
    if mw.iter().any(|v| !v.is_finite()) {
        return Err(NeuralError::Numeric {
            op: "predict",
            step: None,
        });
    }
    Ok(mw)
}
