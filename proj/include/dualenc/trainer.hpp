#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dualenc/checkpoint.hpp"
#include "dualenc/dataset.hpp"
#include "dualenc/hybrid.hpp"
#include "dualenc/model.hpp"

namespace dualenc {

struct TrainConfig {
  int batch_size = 128;
  double initial_lr = 1e-4;
  int lr_decay_patience = 3;      // epochs without a lower validation loss
  double lr_decay_factor = 0.5;
  int early_stop_patience = 10;   // epochs without a higher validation SumR
  int max_epochs = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

// Adaptive-moment optimizer state, parallel to the model's parameter list.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m, v;

  static AdamState create(const ParamList& params);
  void apply(ParamList& params, double lr);
};

struct StepLoss {
  double total = 0;
  double latent_rank = 0;
  double concept_rank = 0;
  double bce = 0;
};

// forward + backward + one optimizer update over a batch of caption indices;
// aborts with the offending term named if any loss component is non-finite
StepLoss train_step(DualEncodingModel& model, const TrainingDataset& data,
                    const std::vector<int>& batch, AdamState& adam, double lr,
                    const LossConfig& loss_config);

// batch loss without any update (validation)
StepLoss eval_loss(DualEncodingModel& model, const TrainingDataset& data,
                   const std::vector<int>& batch, const LossConfig& loss_config);

// Learning-rate halving is driven by validation loss, early stopping by
// validation SumR; "improvement" is strict in both cases.
struct ScheduleState {
  double lr = 0;
  double best_val_loss = 0;
  int loss_streak = 0;
  double best_val_sumr = 0;
  int sumr_streak = 0;

  static ScheduleState fresh(double initial_lr);

  struct Update {
    bool halved = false;
    bool improved_sumr = false;
    bool stop = false;
  };
  Update observe(double val_loss, double val_sumr, const TrainConfig& config);
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0;  // mean joint loss per pair
  double val_loss = 0;
  double val_sumr = 0;
  double lr = 0;
};

struct TrainResult {
  std::vector<EpochLog> logs;
  Checkpoint best;  // highest validation SumR; carries full resume state
  Checkpoint last;  // state after the final epoch
  double best_val_sumr = 0;
  int best_epoch = 0;
  int epochs_run = 0;
  bool early_stopped = false;
};

// Full training loop: shuffled constraint-respecting batches, per-epoch
// validation (loss and bidirectional SumR at eval_alpha), LR schedule, early
// stop, checkpointing. `extra_strings` (vocabulary, config, ...) is copied
// into every checkpoint. Pass `resume` to continue a run bit-for-bit.
TrainResult run_training(DualEncodingModel& model, const TrainingDataset& train,
                         const TrainingDataset& val, const TrainConfig& config,
                         const LossConfig& loss_config, double eval_alpha,
                         const std::map<std::string, std::string>& extra_strings = {},
                         const std::function<void(const EpochLog&)>& on_epoch = nullptr,
                         const Checkpoint* resume = nullptr);

}  // namespace dualenc
