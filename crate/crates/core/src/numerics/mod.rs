//! Small fixed-graph differentiable toolkit: dense layers, embeddings, mean
//! pooling, softmax cross-entropy and Adam, all in `f64`.

mod adam;
mod checkpoint;
pub mod gradcheck;
mod ops;
mod tensor;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT};
pub use ops::{
    dense_backward, dense_forward, embedding_backward, embedding_lookup, mean_pool, mean_pool_backward, relu,
    relu_backward, softmax, softmax_cross_entropy, SoftmaxCrossEntropy,
};
pub use tensor::ParamTensor;
