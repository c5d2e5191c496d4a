//! The Wide & Deep network: parameters, forward pass and hand-derived backward pass.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use crate::data::{Context, LabeledGrasp, PartLabeledObject, Vocabularies};
use crate::error::{CageError, Result};
use crate::features::{encode_context, DeepEncoding, EncodedExample, WideEncoding, WideLayout};
use crate::numerics::{
    dense_backward, dense_forward, embedding_backward, embedding_lookup, mean_pool, mean_pool_backward, relu,
    relu_backward, softmax, softmax_cross_entropy, AdamState, Checkpoint, ParamTensor,
};

/// Number of output classes: Suitable, Neutral, Not Suitable.
pub const NUM_CLASSES: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CageModel {
    config: ModelConfig,
    vocabularies: Vocabularies,
    layout: WideLayout,
    /// `true` for wide indices removed by the state or task ablation.
    wide_mask: Vec<bool>,
    pub wide: ParamTensor,
    pub task_embedding: ParamTensor,
    pub state_embedding: ParamTensor,
    pub affordance_embedding: ParamTensor,
    pub material_embedding: ParamTensor,
    pub propagation_w: ParamTensor,
    pub propagation_b: ParamTensor,
    pub hidden_w: Vec<ParamTensor>,
    pub hidden_b: Vec<ParamTensor>,
    pub deep_out: ParamTensor,
    /// Shared output bias of the combined logits.
    pub bias: ParamTensor,
    pub optimizer: Option<AdamState>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointHeader {
    config: ModelConfig,
    vocabularies: Vocabularies,
}

#[derive(Debug, Default)]
struct DeepCache {
    parts: Vec<(usize, usize)>,
    part_inputs: Vec<Vec<f64>>,
    part_pre: Vec<Vec<f64>>,
    layer_inputs: Vec<Vec<f64>>,
    layer_pre: Vec<Vec<f64>>,
    top: Vec<f64>,
}

#[derive(Debug)]
struct Forward {
    logits: Vec<f64>,
    deep: Option<DeepCache>,
}

fn uniform(name: &str, rows: usize, cols: usize, scale: f64, rng: &mut ChaCha8Rng) -> ParamTensor {
    let mut t = ParamTensor::zeros(name, rows, cols);
    for v in &mut t.values {
        *v = rng.random_range(-scale..=scale);
    }
    t
}

fn fan_in_scale(fan_in: usize) -> f64 {
    1.0 / (fan_in.max(1) as f64).sqrt()
}

impl CageModel {
    /// Fresh model with weights drawn uniformly in `±1/√fan_in` and zero biases.
    pub fn new(config: ModelConfig, vocabularies: Vocabularies) -> Result<Self> {
        config.validate()?;
        let layout = WideLayout::new(&vocabularies, config.crosses);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let d = config.embedding_dim;
        let p = config.propagation_dim;
        let emb_scale = fan_in_scale(d);

        let wide = uniform("wide", layout.len, NUM_CLASSES, fan_in_scale(layout.len), &mut rng);
        let task_embedding = uniform("task_embedding", vocabularies.tasks.len(), d, emb_scale, &mut rng);
        let state_embedding = uniform("state_embedding", vocabularies.states.len(), d, emb_scale, &mut rng);
        let affordance_embedding = uniform("affordance_embedding", vocabularies.affordances.len(), d, emb_scale, &mut rng);
        let material_embedding = uniform("material_embedding", vocabularies.materials.len(), d, emb_scale, &mut rng);
        let propagation_w = uniform("propagation_w", 2 * d, p, fan_in_scale(2 * d), &mut rng);
        let propagation_b = ParamTensor::zeros("propagation_b", 1, p);

        let mut hidden_w = Vec::new();
        let mut hidden_b = Vec::new();
        let mut width = config.deep_input_dim();
        for (l, &h) in config.hidden_sizes.iter().enumerate() {
            hidden_w.push(uniform(&format!("hidden_w{l}"), width, h, fan_in_scale(width), &mut rng));
            hidden_b.push(ParamTensor::zeros(format!("hidden_b{l}"), 1, h));
            width = h;
        }
        let deep_out = uniform("deep_out", width, NUM_CLASSES, fan_in_scale(width), &mut rng);
        let bias = ParamTensor::zeros("bias", 1, NUM_CLASSES);

        Ok(Self::assemble(
            config,
            vocabularies,
            layout,
            [wide, task_embedding, state_embedding, affordance_embedding, material_embedding, propagation_w, propagation_b],
            hidden_w,
            hidden_b,
            deep_out,
            bias,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        config: ModelConfig,
        vocabularies: Vocabularies,
        layout: WideLayout,
        fixed: [ParamTensor; 7],
        hidden_w: Vec<ParamTensor>,
        hidden_b: Vec<ParamTensor>,
        deep_out: ParamTensor,
        bias: ParamTensor,
    ) -> Self {
        let wide_mask = (0..layout.len)
            .map(|i| (config.mask_tasks && layout.is_task_feature(i)) || (config.mask_states && layout.is_state_feature(i)))
            .collect();
        let [wide, task_embedding, state_embedding, affordance_embedding, material_embedding, propagation_w, propagation_b] =
            fixed;
        CageModel {
            config,
            vocabularies,
            layout,
            wide_mask,
            wide,
            task_embedding,
            state_embedding,
            affordance_embedding,
            material_embedding,
            propagation_w,
            propagation_b,
            hidden_w,
            hidden_b,
            deep_out,
            bias,
            optimizer: None,
        }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn vocabularies(&self) -> &Vocabularies {
        &self.vocabularies
    }

    pub fn layout(&self) -> &WideLayout {
        &self.layout
    }

    /// All parameter tensors in a fixed order (also the optimizer and checkpoint order).
    pub fn params(&self) -> Vec<&ParamTensor> {
        let mut out = vec![
            &self.wide,
            &self.task_embedding,
            &self.state_embedding,
            &self.affordance_embedding,
            &self.material_embedding,
            &self.propagation_w,
            &self.propagation_b,
        ];
        for (w, b) in self.hidden_w.iter().zip(&self.hidden_b) {
            out.push(w);
            out.push(b);
        }
        out.push(&self.deep_out);
        out.push(&self.bias);
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut ParamTensor> {
        let mut out = vec![
            &mut self.wide,
            &mut self.task_embedding,
            &mut self.state_embedding,
            &mut self.affordance_embedding,
            &mut self.material_embedding,
            &mut self.propagation_w,
            &mut self.propagation_b,
        ];
        for (w, b) in self.hidden_w.iter_mut().zip(&mut self.hidden_b) {
            out.push(w);
            out.push(b);
        }
        out.push(&mut self.deep_out);
        out.push(&mut self.bias);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn zero_grad(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
    }

    fn check_inputs(&self, wide: &WideEncoding, deep: &DeepEncoding) -> Result<()> {
        if wide.len != self.layout.len {
            return Err(CageError::Shape(format!("wide vector of {} for layout of {}", wide.len, self.layout.len)));
        }
        if let Some(&bad) = wide.active.iter().find(|&&i| i >= self.layout.len) {
            return Err(CageError::IndexOutOfRange {
                what: "wide feature",
                index: bad,
                len: self.layout.len,
            });
        }
        if deep.dense.len() != self.config.dense_dim {
            return Err(CageError::Shape(format!(
                "dense passthrough of {} for configured {}",
                deep.dense.len(),
                self.config.dense_dim
            )));
        }
        if deep.parts.is_empty() {
            return Err(CageError::Empty("object parts"));
        }
        Ok(())
    }

    /// Part embeddings in canonical order, which makes pooling bit-exact under part permutations.
    fn canonical_parts(parts: &[(usize, usize)]) -> Vec<(usize, usize)> {
        let mut sorted = parts.to_vec();
        sorted.sort_unstable();
        sorted
    }

    fn part_input(&self, (a, m): (usize, usize)) -> Result<Vec<f64>> {
        let mut x = embedding_lookup(&self.affordance_embedding, a)?.to_vec();
        x.extend_from_slice(embedding_lookup(&self.material_embedding, m)?);
        Ok(x)
    }

    /// Mean of `ReLU(W_pᵀ[e_aff; e_mat] + b_p)` over the object's parts.
    pub fn object_embedding(&self, parts: &[(usize, usize)]) -> Result<Vec<f64>> {
        if parts.is_empty() {
            return Err(CageError::Empty("object parts"));
        }
        let propagated = Self::canonical_parts(parts)
            .into_iter()
            .map(|part| Ok(relu(&dense_forward(&self.propagation_w, &self.propagation_b, &self.part_input(part)?)?)))
            .collect::<Result<Vec<_>>>()?;
        mean_pool(&propagated)
    }

    fn masked_lookup(&self, table: &ParamTensor, index: usize, masked: bool) -> Result<Vec<f64>> {
        let row = embedding_lookup(table, index)?;
        Ok(if masked { vec![0.0; row.len()] } else { row.to_vec() })
    }

    fn forward(&self, wide: &WideEncoding, deep: &DeepEncoding) -> Result<Forward> {
        self.check_inputs(wide, deep)?;
        let mut logits = self.bias.values.clone();

        if self.config.enable_wide {
            for &i in &wide.active {
                if !self.wide_mask[i] {
                    for (l, w) in logits.iter_mut().zip(self.wide.row(i)) {
                        *l += w;
                    }
                }
            }
        }

        if !self.config.enable_deep {
            return Ok(Forward { logits, deep: None });
        }

        let mut cache = DeepCache {
            parts: Self::canonical_parts(&deep.parts),
            ..DeepCache::default()
        };
        let mut pooled_inputs = Vec::with_capacity(cache.parts.len());
        for &part in &cache.parts {
            let x = self.part_input(part)?;
            let pre = dense_forward(&self.propagation_w, &self.propagation_b, &x)?;
            pooled_inputs.push(relu(&pre));
            cache.part_inputs.push(x);
            cache.part_pre.push(pre);
        }
        let object = mean_pool(&pooled_inputs)?;

        let mut a = self.masked_lookup(&self.task_embedding, deep.task, self.config.mask_tasks)?;
        a.extend(self.masked_lookup(&self.state_embedding, deep.state, self.config.mask_states)?);
        a.extend_from_slice(embedding_lookup(&self.affordance_embedding, deep.grasp_affordance)?);
        a.extend_from_slice(embedding_lookup(&self.material_embedding, deep.grasp_material)?);
        a.extend(object);
        a.extend_from_slice(&deep.dense);

        for (w, b) in self.hidden_w.iter().zip(&self.hidden_b) {
            let pre = dense_forward(w, b, &a)?;
            let next = relu(&pre);
            cache.layer_inputs.push(a);
            cache.layer_pre.push(pre);
            a = next;
        }
        for (l, y) in logits.iter_mut().zip(self.deep_out.cols_dot(&a)?) {
            *l += y;
        }
        cache.top = a;
        Ok(Forward {
            logits,
            deep: Some(cache),
        })
    }

    pub fn logits(&self, wide: &WideEncoding, deep: &DeepEncoding) -> Result<Vec<f64>> {
        let logits = self.forward(wide, deep)?.logits;
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(CageError::NonFinite("logits"));
        }
        Ok(logits)
    }

    /// Class probabilities `[p(Suitable), p(Neutral), p(Not Suitable)]`.
    pub fn predict(&self, wide: &WideEncoding, deep: &DeepEncoding) -> Result<[f64; NUM_CLASSES]> {
        let p = softmax(&self.logits(wide, deep)?)?;
        Ok([p[0], p[1], p[2]])
    }

    pub fn loss(&self, example: &EncodedExample) -> Result<f64> {
        let logits = self.forward(&example.wide, &example.deep)?.logits;
        Ok(softmax_cross_entropy(&logits, example.label.class_index())?.loss)
    }

    /// Cross-entropy of one example; gradients are accumulated scaled by `weight`.
    pub fn accumulate_gradients(&mut self, example: &EncodedExample, weight: f64) -> Result<f64> {
        let fwd = self.forward(&example.wide, &example.deep)?;
        let sce = softmax_cross_entropy(&fwd.logits, example.label.class_index())?;
        let up: Vec<f64> = sce.grad.iter().map(|g| g * weight).collect();
        self.backward(&example.wide, &example.deep, fwd, &up)?;
        Ok(sce.loss)
    }

    fn backward(&mut self, wide: &WideEncoding, deep: &DeepEncoding, fwd: Forward, up: &[f64]) -> Result<()> {
        for (g, u) in self.bias.grad.iter_mut().zip(up) {
            *g += u;
        }
        if self.config.enable_wide {
            for &i in &wide.active {
                if !self.wide_mask[i] {
                    for (g, u) in self.wide.grad_row_mut(i).iter_mut().zip(up) {
                        *g += u;
                    }
                }
            }
        }
        let Some(cache) = fwd.deep else {
            return Ok(());
        };

        // deep_out has no bias of its own: dW = a ⊗ up, da = W up
        let mut da = vec![0.0; cache.top.len()];
        for (r, &ar) in cache.top.iter().enumerate() {
            let row = r * NUM_CLASSES;
            for (c, &u) in up.iter().enumerate() {
                self.deep_out.grad[row + c] += ar * u;
                da[r] += self.deep_out.values[row + c] * u;
            }
        }
        for l in (0..self.hidden_w.len()).rev() {
            let dpre = relu_backward(&cache.layer_pre[l], &da);
            da = dense_backward(&mut self.hidden_w[l], &mut self.hidden_b[l], &cache.layer_inputs[l], &dpre)?;
        }

        let d = self.config.embedding_dim;
        let p = self.config.propagation_dim;
        if !self.config.mask_tasks {
            embedding_backward(&mut self.task_embedding, deep.task, &da[0..d])?;
        }
        if !self.config.mask_states {
            embedding_backward(&mut self.state_embedding, deep.state, &da[d..2 * d])?;
        }
        embedding_backward(&mut self.affordance_embedding, deep.grasp_affordance, &da[2 * d..3 * d])?;
        embedding_backward(&mut self.material_embedding, deep.grasp_material, &da[3 * d..4 * d])?;

        let dpart = mean_pool_backward(cache.parts.len(), &da[4 * d..4 * d + p])?;
        for (k, &(a, m)) in cache.parts.iter().enumerate() {
            let dpre = relu_backward(&cache.part_pre[k], &dpart);
            let dx = dense_backward(&mut self.propagation_w, &mut self.propagation_b, &cache.part_inputs[k], &dpre)?;
            embedding_backward(&mut self.affordance_embedding, a, &dx[..d])?;
            embedding_backward(&mut self.material_embedding, m, &dx[d..])?;
        }
        Ok(())
    }

    /// `p(Suitable)` of each grasp of a context, in grasp order.
    pub fn score_context(&self, context: &Context, object: &PartLabeledObject, grasps: &[LabeledGrasp]) -> Result<Vec<f64>> {
        encode_context(context, object, grasps, &self.vocabularies, &self.layout)?
            .iter()
            .map(|ex| Ok(self.predict(&ex.wide, &ex.deep)?[0]))
            .collect()
    }

    pub fn score_grasp(&self, context: &Context, object: &PartLabeledObject, grasp: &LabeledGrasp) -> Result<f64> {
        Ok(self.score_context(context, object, std::slice::from_ref(grasp))?[0])
    }

    pub fn to_checkpoint(&self) -> Result<Checkpoint> {
        let header = serde_json::to_value(CheckpointHeader {
            config: self.config.clone(),
            vocabularies: self.vocabularies.clone(),
        })
        .map_err(|e| CageError::Checkpoint(e.to_string()))?;
        Ok(Checkpoint::new(
            header,
            self.params().into_iter().cloned().collect(),
            self.optimizer.clone(),
        ))
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let header: CheckpointHeader =
            serde_json::from_value(ckpt.header.clone()).map_err(|e| CageError::Checkpoint(e.to_string()))?;
        let mut model = CageModel::new(header.config, header.vocabularies)?;
        for p in model.params_mut() {
            let stored = ckpt.block(&p.name)?;
            if (stored.rows, stored.cols) != (p.rows, p.cols) {
                return Err(CageError::Checkpoint(format!(
                    "block `{}` is {}x{}, expected {}x{}",
                    p.name, stored.rows, stored.cols, p.rows, p.cols
                )));
            }
            p.values.clone_from(&stored.values);
        }
        if ckpt.blocks.len() != model.params().len() {
            return Err(CageError::Checkpoint("unexpected extra blocks".into()));
        }
        model.optimizer = ckpt.optimizer.clone();
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_checkpoint()?.save(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_checkpoint(&Checkpoint::load(path)?)
    }
}

trait ColsDot {
    fn cols_dot(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl ColsDot for ParamTensor {
    /// `Wᵀx` without a bias.
    fn cols_dot(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(CageError::Shape(format!("{}: input of {} for {} rows", self.name, x.len(), self.rows)));
        }
        let mut y = vec![0.0; self.cols];
        for (r, &xr) in x.iter().enumerate() {
            for (yc, w) in y.iter_mut().zip(self.row(r)) {
                *yc += xr * w;
            }
        }
        Ok(y)
    }
}
