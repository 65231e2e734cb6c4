#include "dualenc/trainer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dualenc/eval.hpp"
#include "dualenc/ops.hpp"

namespace dualenc {

void TrainConfig::validate() const {
  if (batch_size < 2) throw std::invalid_argument("train config: batch_size must be >= 2");
  if (initial_lr <= 0.0) throw std::invalid_argument("train config: learning rate must be > 0");
  if (lr_decay_patience < 1 || early_stop_patience < 1) {
    throw std::invalid_argument("train config: patience values must be >= 1");
  }
  if (lr_decay_factor <= 0.0 || lr_decay_factor > 1.0) {
    throw std::invalid_argument("train config: lr_decay_factor must be in (0, 1]");
  }
  if (max_epochs < 1) throw std::invalid_argument("train config: max_epochs must be >= 1");
}

AdamState AdamState::create(const ParamList& params) {
  AdamState state;
  state.m.reserve(params.size());
  state.v.reserve(params.size());
  for (const auto& [name, tensor] : params) {
    state.m.emplace_back(tensor.size(), 0.0);
    state.v.emplace_back(tensor.size(), 0.0);
  }
  return state;
}

void AdamState::apply(ParamList& params, double lr) {
  if (m.size() != params.size()) {
    throw std::logic_error("adam state does not match the parameter list");
  }
  ++step;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& tensor = params[p].second;
    if (!tensor.requires_grad() || !tensor.has_grad()) continue;
    const auto& grad = tensor.grad();
    auto& values = tensor.mutable_values();
    auto& mp = m[p];
    auto& vp = v[p];
    for (std::size_t i = 0; i < values.size(); ++i) {
      mp[i] = beta1 * mp[i] + (1.0 - beta1) * grad[i];
      vp[i] = beta2 * vp[i] + (1.0 - beta2) * grad[i] * grad[i];
      values[i] -= lr * (mp[i] / bc1) / (std::sqrt(vp[i] / bc2) + epsilon);
    }
  }
}

namespace {

struct BatchViews {
  std::vector<const FrameFeatureSequence*> videos;
  std::vector<const TokenSequence*> sentences;
  Tensor labels;  // {B, K}
};

BatchViews collect_batch(const TrainingDataset& data, const std::vector<int>& batch) {
  if (batch.size() < 2) {
    throw std::invalid_argument("batch must hold at least 2 pairs, got " +
                                std::to_string(batch.size()));
  }
  BatchViews views;
  std::vector<double> labels;
  const std::size_t k = data.label(data.caption_video(batch.front())).size();
  for (int caption_index : batch) {
    const int video_index = data.caption_video(caption_index);
    views.videos.push_back(&data.video(video_index));
    views.sentences.push_back(&data.caption(caption_index));
    const auto& y = data.label(video_index);
    labels.insert(labels.end(), y.begin(), y.end());
  }
  views.labels = Tensor::from_data({static_cast<int>(batch.size()), static_cast<int>(k)},
                                   std::move(labels));
  return views;
}

StepLoss to_step_loss(const JointLoss& loss) {
  StepLoss out;
  out.total = loss.total.item();
  out.latent_rank = loss.latent_rank.item();
  out.concept_rank = loss.concept_rank.item();
  out.bce = loss.bce.item();
  return out;
}

void check_finite(const StepLoss& loss) {
  auto require = [](double value, const char* term) {
    if (!std::isfinite(value)) {
      throw std::runtime_error(std::string("training aborted: non-finite ") + term +
                               " loss term");
    }
  };
  require(loss.latent_rank, "latent ranking");
  require(loss.concept_rank, "concept ranking");
  require(loss.bce, "concept BCE");
  require(loss.total, "joint");
}

}  // namespace

StepLoss train_step(DualEncodingModel& model, const TrainingDataset& data,
                    const std::vector<int>& batch, AdamState& adam, double lr,
                    const LossConfig& loss_config) {
  BatchViews views = collect_batch(data, batch);
  auto embeddings = model.forward_batch(views.videos, views.sentences, BnMode::kTrain);
  JointLoss loss = joint_loss(embeddings.fv, embeddings.fs, embeddings.gv, embeddings.gs,
                              views.labels, loss_config.margin, loss_config.bce_clamp);
  StepLoss result = to_step_loss(loss);
  check_finite(result);
  model.zero_grad();
  backward(loss.total);
  adam.apply(model.params, lr);
  return result;
}

StepLoss eval_loss(DualEncodingModel& model, const TrainingDataset& data,
                   const std::vector<int>& batch, const LossConfig& loss_config) {
  NoGradGuard guard;
  BatchViews views = collect_batch(data, batch);
  auto embeddings = model.forward_batch(views.videos, views.sentences, BnMode::kEval);
  JointLoss loss = joint_loss(embeddings.fv, embeddings.fs, embeddings.gv, embeddings.gs,
                              views.labels, loss_config.margin, loss_config.bce_clamp);
  return to_step_loss(loss);
}

ScheduleState ScheduleState::fresh(double initial_lr) {
  ScheduleState state;
  state.lr = initial_lr;
  state.best_val_loss = std::numeric_limits<double>::infinity();
  state.best_val_sumr = -std::numeric_limits<double>::infinity();
  return state;
}

ScheduleState::Update ScheduleState::observe(double val_loss, double val_sumr,
                                             const TrainConfig& config) {
  Update update;
  if (val_loss < best_val_loss) {
    best_val_loss = val_loss;
    loss_streak = 0;
  } else if (++loss_streak >= config.lr_decay_patience) {
    lr *= config.lr_decay_factor;
    loss_streak = 0;
    update.halved = true;
  }
  if (val_sumr > best_val_sumr) {
    best_val_sumr = val_sumr;
    sumr_streak = 0;
    update.improved_sumr = true;
  } else if (++sumr_streak >= config.early_stop_patience) {
    update.stop = true;
  }
  return update;
}

namespace {

double validation_loss(DualEncodingModel& model, const TrainingDataset& val,
                       const TrainConfig& config, const LossConfig& loss_config) {
  // fixed batching (seed 0) keeps validation losses comparable across epochs
  auto batches = make_batches(val, config.batch_size, static_cast<std::uint64_t>(0));
  if (batches.empty()) {
    throw std::invalid_argument("validation set produced no usable batch");
  }
  double total = 0.0;
  std::size_t pairs = 0;
  for (const auto& batch : batches) {
    total += eval_loss(model, val, batch, loss_config).total;
    pairs += batch.size();
  }
  return total / static_cast<double>(pairs);
}

double validation_sumr(DualEncodingModel& model, const TrainingDataset& val, double alpha) {
  std::vector<EvalItem> videos, sentences;
  std::unordered_map<std::string, std::string> sentence_video;
  for (int i = 0; i < val.num_videos(); ++i) {
    videos.push_back({val.video(i).video_id, model.embed_video(val.video(i))});
  }
  for (int c = 0; c < val.num_pairs(); ++c) {
    const auto& sentence = val.caption(c);
    sentences.push_back({sentence.sentence_id, model.embed_text(sentence)});
    sentence_video[sentence.sentence_id] = val.video(val.caption_video(c)).video_id;
  }
  return evaluate_bidirectional(videos, sentences, sentence_video, alpha).sum_recalls;
}

Checkpoint snapshot(const DualEncodingModel& model, const AdamState& adam,
                    const ScheduleState& schedule, const Rng& rng, int epoch,
                    const std::map<std::string, std::string>& extra_strings) {
  Checkpoint checkpoint;
  store_model_tensors(checkpoint, model.params);
  for (std::size_t p = 0; p < model.params.size(); ++p) {
    const auto& [name, tensor] = model.params[p];
    if (!tensor.requires_grad()) continue;
    checkpoint.tensors.push_back({"adam.m." + name, tensor.shape(), adam.m[p]});
    checkpoint.tensors.push_back({"adam.v." + name, tensor.shape(), adam.v[p]});
  }
  checkpoint.integers["adam.step"] = adam.step;
  checkpoint.integers["epoch"] = static_cast<std::uint64_t>(epoch);
  checkpoint.integers["rng.state"] = rng.state();
  checkpoint.integers["schedule.loss_streak"] = static_cast<std::uint64_t>(schedule.loss_streak);
  checkpoint.integers["schedule.sumr_streak"] = static_cast<std::uint64_t>(schedule.sumr_streak);
  checkpoint.reals["schedule.lr"] = schedule.lr;
  checkpoint.reals["schedule.best_val_loss"] = schedule.best_val_loss;
  checkpoint.reals["schedule.best_val_sumr"] = schedule.best_val_sumr;
  for (const auto& [key, value] : extra_strings) checkpoint.strings[key] = value;
  return checkpoint;
}

void restore(const Checkpoint& checkpoint, DualEncodingModel& model, AdamState& adam,
             ScheduleState& schedule, Rng& rng, int& epoch) {
  load_model_tensors(checkpoint, model.params);
  for (std::size_t p = 0; p < model.params.size(); ++p) {
    const auto& [name, tensor] = model.params[p];
    if (!tensor.requires_grad()) continue;
    const auto* m_rec = checkpoint.find_tensor("adam.m." + name);
    const auto* v_rec = checkpoint.find_tensor("adam.v." + name);
    if (m_rec == nullptr || v_rec == nullptr) {
      throw std::runtime_error("checkpoint is missing optimizer state for '" + name + "'");
    }
    adam.m[p] = m_rec->data;
    adam.v[p] = v_rec->data;
  }
  adam.step = checkpoint.integer_at("adam.step");
  epoch = static_cast<int>(checkpoint.integer_at("epoch"));
  rng.set_state(checkpoint.integer_at("rng.state"));
  schedule.loss_streak = static_cast<int>(checkpoint.integer_at("schedule.loss_streak"));
  schedule.sumr_streak = static_cast<int>(checkpoint.integer_at("schedule.sumr_streak"));
  schedule.lr = checkpoint.real_at("schedule.lr");
  schedule.best_val_loss = checkpoint.real_at("schedule.best_val_loss");
  schedule.best_val_sumr = checkpoint.real_at("schedule.best_val_sumr");
}

}  // namespace

TrainResult run_training(DualEncodingModel& model, const TrainingDataset& train,
                         const TrainingDataset& val, const TrainConfig& config,
                         const LossConfig& loss_config, double eval_alpha,
                         const std::map<std::string, std::string>& extra_strings,
                         const std::function<void(const EpochLog&)>& on_epoch,
                         const Checkpoint* resume) {
  config.validate();
  loss_config.validate();
  AdamState adam = AdamState::create(model.params);
  ScheduleState schedule = ScheduleState::fresh(config.initial_lr);
  Rng rng(config.seed);
  int start_epoch = 0;
  if (resume != nullptr) {
    restore(*resume, model, adam, schedule, rng, start_epoch);
  }

  TrainResult result;
  result.best_val_sumr = schedule.best_val_sumr;
  for (int epoch = start_epoch + 1; epoch <= config.max_epochs; ++epoch) {
    auto batches = make_batches(train, config.batch_size, rng);
    if (batches.empty()) {
      throw std::invalid_argument("training set produced no usable batch");
    }
    double train_total = 0.0;
    std::size_t train_pairs = 0;
    for (const auto& batch : batches) {
      train_total += train_step(model, train, batch, adam, schedule.lr, loss_config).total;
      train_pairs += batch.size();
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = train_total / static_cast<double>(train_pairs);
    log.val_loss = validation_loss(model, val, config, loss_config);
    log.val_sumr = validation_sumr(model, val, eval_alpha);
    auto update = schedule.observe(log.val_loss, log.val_sumr, config);
    log.lr = schedule.lr;

    result.logs.push_back(log);
    if (on_epoch) on_epoch(log);
    if (update.improved_sumr) {
      result.best = snapshot(model, adam, schedule, rng, epoch, extra_strings);
      result.best_val_sumr = log.val_sumr;
      result.best_epoch = epoch;
    }
    result.epochs_run = epoch;
    if (update.stop) {
      result.early_stopped = true;
      break;
    }
  }
  result.last = snapshot(model, adam, schedule, rng, result.epochs_run, extra_strings);
  if (result.best.tensors.empty()) result.best = result.last;
  return result;
}

}  // namespace dualenc
