use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ModelConfig;
use super::network::CageModel;
use crate::data::{Dataset, Vocabularies};
use crate::error::{CageError, Result};
use crate::features::{encode_context, EncodedExample, WideLayout};
use crate::numerics::{adam_step, AdamState};

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: CageModel,
    /// Mean training loss of each epoch, measured on the fly.
    pub epoch_losses: Vec<f64>,
}

/// Encodes every grasp of the listed contexts, in the given order.
pub fn encode_contexts(dataset: &Dataset, context_ids: &[String], layout: &WideLayout) -> Result<Vec<EncodedExample>> {
    let mut out = Vec::new();
    for id in context_ids {
        let (ctx, object) = dataset.lookup(id)?;
        out.extend(encode_context(ctx, object, dataset.grasps_for(id), &dataset.vocabularies, layout)?);
    }
    Ok(out)
}

/// Trains on the grasps of `context_ids` with the configured epochs and mini-batches.
pub fn train(dataset: &Dataset, context_ids: &[String], config: &ModelConfig) -> Result<TrainOutcome> {
    let layout = WideLayout::new(&dataset.vocabularies, config.crosses);
    let examples = encode_contexts(dataset, context_ids, &layout)?;
    train_examples(&examples, &dataset.vocabularies, config)
}

pub fn train_examples(examples: &[EncodedExample], vocab: &Vocabularies, config: &ModelConfig) -> Result<TrainOutcome> {
    if examples.is_empty() {
        return Err(CageError::Empty("training set"));
    }
    let mut model = CageModel::new(config.clone(), vocab.clone())?;
    let mut adam = AdamState::new(config.adam, model.params());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);

    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let weight = 1.0 / batch.len() as f64;
            for &i in batch {
                let loss = model
                    .accumulate_gradients(&examples[i], weight)
                    .map_err(|e| match e {
                        CageError::NonFinite(_) => CageError::Diverged { epoch, loss: f64::NAN },
                        other => other,
                    })?;
                total += loss;
            }
            adam_step(&mut model.params_mut(), &mut adam)?;
        }
        let mean = total / examples.len() as f64;
        if !mean.is_finite() {
            return Err(CageError::Diverged { epoch, loss: mean });
        }
        epoch_losses.push(mean);
    }
    model.optimizer = Some(adam);
    Ok(TrainOutcome { model, epoch_losses })
}
