#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "dualenc/trainer.hpp"
#include "toy_data.hpp"

using namespace dualenc;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "dualenc_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

TrainConfig quick_config(int epochs, double lr = 0.01, int batch_size = 4) {
  TrainConfig config;
  config.batch_size = batch_size;
  config.initial_lr = lr;
  config.max_epochs = epochs;
  config.early_stop_patience = 1000;
  config.seed = 11;
  return config;
}

}  // namespace

TEST_CASE("dataset assembly validates caption and video cross-references") {
  auto bundle = toydata::make(3, 2, 1);
  CHECK(bundle.data.num_videos() == 3);
  CHECK(bundle.data.num_pairs() == 6);
  for (int c = 0; c < bundle.data.num_pairs(); ++c) {
    const int v = bundle.data.caption_video(c);
    CHECK(v >= 0);
    CHECK(v < bundle.data.num_videos());
  }
  // labels padded to the concept dimension
  CHECK(bundle.data.label(0).size() == 8);
}

TEST_CASE("dataset assembly rejects captions of unknown videos") {
  auto bundle = toydata::make(2, 1, 2);
  std::vector<FrameFeatureSequence> videos;
  for (int i = 0; i < 2; ++i) videos.push_back(bundle.data.video(i));
  std::vector<CaptionRecord> captions = {{"ghost#0", "ghost", "the bar bin box"}};
  CHECK_THROWS_WITH_AS(TrainingDataset::assemble(std::move(videos), captions, bundle.vocab,
                                                 bundle.cvocab, {}, 64, 8),
                       doctest::Contains("ghost"), std::invalid_argument);
}

TEST_CASE("dataset assembly rejects videos without captions") {
  auto bundle = toydata::make(2, 1, 3);
  std::vector<FrameFeatureSequence> videos;
  for (int i = 0; i < 2; ++i) videos.push_back(bundle.data.video(i));
  std::vector<CaptionRecord> captions = {
      {"v0#0", "v0", "the bar bin box"}};  // v1 left without captions
  CHECK_THROWS_WITH_AS(TrainingDataset::assemble(std::move(videos), captions, bundle.vocab,
                                                 bundle.cvocab, {}, 64, 8),
                       doctest::Contains("v1"), std::invalid_argument);
}

TEST_CASE("make_batches covers every pair exactly once") {
  auto bundle = toydata::make(4, 1, 4);
  auto batches = make_batches(bundle.data, 2, static_cast<std::uint64_t>(5));
  CHECK(batches.size() == 2);
  std::set<int> seen;
  for (const auto& batch : batches) {
    CHECK(batch.size() == 2);
    seen.insert(batch.begin(), batch.end());
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("make_batches is deterministic in the seed") {
  auto bundle = toydata::make(6, 3, 5);
  auto a = make_batches(bundle.data, 4, static_cast<std::uint64_t>(9));
  auto b = make_batches(bundle.data, 4, static_cast<std::uint64_t>(9));
  CHECK(a == b);
  auto c = make_batches(bundle.data, 4, static_cast<std::uint64_t>(10));
  CHECK(a != c);
}

TEST_CASE("no batch contains two captions of the same video") {
  auto bundle = toydata::make(5, 3, 6);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto batches = make_batches(bundle.data, 2, seed);
    std::set<int> all;
    for (const auto& batch : batches) {
      std::set<int> videos_in_batch;
      for (int caption : batch) {
        CHECK(videos_in_batch.insert(bundle.data.caption_video(caption)).second);
      }
      all.insert(batch.begin(), batch.end());
    }
    // every pair appears at most once; stranded singletons may be dropped
    std::size_t emitted = 0;
    for (const auto& batch : batches) emitted += batch.size();
    CHECK(all.size() == emitted);
  }
}

TEST_CASE("make_batches rejects batch sizes below two") {
  auto bundle = toydata::make(3, 1, 7);
  CHECK_THROWS_AS(make_batches(bundle.data, 1, static_cast<std::uint64_t>(0)),
                  std::invalid_argument);
}

TEST_CASE("train_step with zero learning rate reports loss and keeps parameters") {
  auto bundle = toydata::make(4, 2, 8);
  DualEncodingModel model = DualEncodingModel::create(bundle.model_config, 21);
  AdamState adam = AdamState::create(model.params);
  auto batches = make_batches(bundle.data, 4, static_cast<std::uint64_t>(1));
  std::vector<std::vector<double>> before;
  for (const auto& [name, tensor] : model.params) before.push_back(tensor.values());
  StepLoss loss = train_step(model, bundle.data, batches.front(), adam, 0.0, {});
  CHECK(loss.total > 0.0);
  CHECK(loss.total == doctest::Approx(loss.latent_rank + loss.concept_rank + loss.bce));
  for (std::size_t p = 0; p < model.params.size(); ++p) {
    if (!model.params[p].second.requires_grad()) continue;  // BN buffers do move
    CHECK(model.params[p].second.values() == before[p]);
  }
}

TEST_CASE("one small step decreases the loss on the same batch") {
  auto bundle = toydata::make(4, 2, 9);
  DualEncodingModel model = DualEncodingModel::create(bundle.model_config, 22);
  AdamState adam = AdamState::create(model.params);
  auto batches = make_batches(bundle.data, 4, static_cast<std::uint64_t>(2));
  const auto& batch = batches.front();
  StepLoss first = train_step(model, bundle.data, batch, adam, 1e-3, {});
  StepLoss second = eval_loss(model, bundle.data, batch, {});
  // eval_loss uses frozen statistics; compare through another train-mode pass
  AdamState frozen = AdamState::create(model.params);
  StepLoss retrain = train_step(model, bundle.data, batch, frozen, 0.0, {});
  CHECK(retrain.total < first.total);
  CHECK(std::isfinite(second.total));
}

TEST_CASE("training is bitwise deterministic given the seed") {
  auto run = [] {
    auto bundle = toydata::make(4, 2, 10);
    DualEncodingModel model = DualEncodingModel::create(bundle.model_config, 33);
    AdamState adam = AdamState::create(model.params);
    Rng rng(77);
    for (int step = 0; step < 5; ++step) {
      auto batches = make_batches(bundle.data, 4, rng);
      for (const auto& batch : batches) {
        train_step(model, bundle.data, batch, adam, 0.01, {});
      }
    }
    std::vector<std::vector<double>> values;
    for (const auto& [name, tensor] : model.params) values.push_back(tensor.values());
    return values;
  };
  CHECK(run() == run());
}

TEST_CASE("learning rate halves after three non-improving epochs") {
  TrainConfig config;
  config.initial_lr = 1.0;
  ScheduleState state = ScheduleState::fresh(config.initial_lr);
  // validation losses 5.0, 4.0, 4.1, 4.2, 4.3 -> halving after the fifth
  double sumr = 0.0;
  CHECK_FALSE(state.observe(5.0, ++sumr, config).halved);
  CHECK_FALSE(state.observe(4.0, ++sumr, config).halved);
  CHECK_FALSE(state.observe(4.1, ++sumr, config).halved);
  CHECK_FALSE(state.observe(4.2, ++sumr, config).halved);
  auto update = state.observe(4.3, ++sumr, config);
  CHECK(update.halved);
  CHECK(state.lr == 0.5);
  CHECK_FALSE(update.stop);
}

TEST_CASE("strictly decreasing losses never halve the learning rate") {
  TrainConfig config;
  config.initial_lr = 0.25;
  ScheduleState state = ScheduleState::fresh(config.initial_lr);
  double loss = 10.0, sumr = 0.0;
  for (int epoch = 0; epoch < 40; ++epoch) {
    auto update = state.observe(loss, ++sumr, config);
    CHECK_FALSE(update.halved);
    CHECK_FALSE(update.stop);
    loss -= 0.1;
  }
  CHECK(state.lr == 0.25);
}

TEST_CASE("ten non-improving SumR epochs signal the early stop") {
  TrainConfig config;
  ScheduleState state = ScheduleState::fresh(1e-4);
  CHECK_FALSE(state.observe(1.0, 50.0, config).stop);
  ScheduleState::Update update;
  for (int epoch = 0; epoch < 10; ++epoch) {
    update = state.observe(0.5 - epoch * 0.01, 50.0, config);  // loss improves, SumR stalls
  }
  CHECK(update.stop);
}

TEST_CASE("learning rate is non-increasing across a run") {
  auto bundle = toydata::make(4, 2, 11);
  DualEncodingModel model = DualEncodingModel::create(bundle.model_config, 44);
  TrainConfig config = quick_config(8);
  config.lr_decay_patience = 1;  // aggressive halving to exercise the path
  double last_lr = config.initial_lr;
  auto result = run_training(model, bundle.data, bundle.data, config, {}, 0.6, {},
                             [&](const EpochLog& log) {
                               CHECK(log.lr <= last_lr);
                               last_lr = log.lr;
                             });
  CHECK(result.epochs_run == 8);
}

TEST_CASE("checkpoint save-load-save produces identical bytes") {
  auto bundle = toydata::make(3, 2, 12);
  DualEncodingModel model = DualEncodingModel::create(bundle.model_config, 55);
  auto result = run_training(model, bundle.data, bundle.data, quick_config(2), {}, 0.6,
                             {{"config", "demo = 1"}});
  auto first = temp_file("roundtrip_a.ckpt");
  auto second = temp_file("roundtrip_b.ckpt");
  save_checkpoint(first.string(), result.best);
  Checkpoint reloaded = load_checkpoint(first.string());
  save_checkpoint(second.string(), reloaded);
  CHECK(file_bytes(first) == file_bytes(second));
  CHECK(reloaded.string_at("config") == "demo = 1");
}

TEST_CASE("loading a checkpoint into a mismatched model names the tensor") {
  auto bundle = toydata::make(3, 2, 13);
  DualEncodingModel model = DualEncodingModel::create(bundle.model_config, 56);
  auto result = run_training(model, bundle.data, bundle.data, quick_config(1), {}, 0.6, {});

  ModelConfig other = bundle.model_config;
  other.latent_dim = bundle.model_config.latent_dim + 4;
  DualEncodingModel wrong = DualEncodingModel::create(other, 56);
  CHECK_THROWS_WITH_AS(load_model_tensors(result.best, wrong.params),
                       doctest::Contains("latent_video.weight"), std::runtime_error);
}

TEST_CASE("checkpoint loader distinguishes corrupt inputs") {
  auto path = temp_file("bad.ckpt");
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOT-A-CHECKPOINT 9\n";
  }
  CHECK_THROWS_WITH_AS(load_checkpoint(path.string()), doctest::Contains("bad header"),
                       std::runtime_error);
  {
    std::ofstream out(path, std::ios::binary);
    out << "DUALENC-CKPT 9\n";
  }
  CHECK_THROWS_WITH_AS(load_checkpoint(path.string()), doctest::Contains("version"),
                       std::runtime_error);

  auto bundle = toydata::make(3, 2, 14);
  DualEncodingModel model = DualEncodingModel::create(bundle.model_config, 57);
  auto result = run_training(model, bundle.data, bundle.data, quick_config(1), {}, 0.6, {});
  auto good = temp_file("good.ckpt");
  save_checkpoint(good.string(), result.best);
  std::string bytes = file_bytes(good);
  {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_WITH_AS(load_checkpoint(path.string()), doctest::Contains("truncated"),
                       std::runtime_error);
}

TEST_CASE("resumed training matches the uninterrupted run bitwise") {
  auto make_model = [] {
    auto bundle = toydata::make(4, 2, 15);
    return std::make_pair(std::move(bundle), 0);
  };

  // uninterrupted: three epochs
  auto [bundle_a, unused_a] = make_model();
  DualEncodingModel full = DualEncodingModel::create(bundle_a.model_config, 66);
  auto full_result =
      run_training(full, bundle_a.data, bundle_a.data, quick_config(3), {}, 0.6, {});

  // interrupted: two epochs, checkpoint, then one more
  auto [bundle_b, unused_b] = make_model();
  DualEncodingModel part = DualEncodingModel::create(bundle_b.model_config, 66);
  auto part_result =
      run_training(part, bundle_b.data, bundle_b.data, quick_config(2), {}, 0.6, {});
  DualEncodingModel resumed = DualEncodingModel::create(bundle_b.model_config, 66);
  auto resumed_result = run_training(resumed, bundle_b.data, bundle_b.data, quick_config(3), {},
                                     0.6, {}, nullptr, &part_result.last);

  auto full_path = temp_file("full.ckpt");
  auto resumed_path = temp_file("resumed.ckpt");
  save_checkpoint(full_path.string(), full_result.last);
  save_checkpoint(resumed_path.string(), resumed_result.last);
  CHECK(file_bytes(full_path) == file_bytes(resumed_path));

  REQUIRE(resumed_result.logs.size() == 1);
  CHECK(resumed_result.logs.front().epoch == 3);
  CHECK(resumed_result.logs.front().train_loss == full_result.logs.back().train_loss);
  CHECK(resumed_result.logs.front().val_sumr == full_result.logs.back().val_sumr);
}

TEST_CASE("two full runs with one seed produce identical checkpoints and logs") {
  auto run_once = [](const std::filesystem::path& path) {
    auto bundle = toydata::make(4, 2, 16);
    DualEncodingModel model = DualEncodingModel::create(bundle.model_config, 77);
    auto result = run_training(model, bundle.data, bundle.data, quick_config(3), {}, 0.6, {});
    save_checkpoint(path.string(), result.last);
    return result.logs;
  };
  auto path_a = temp_file("det_a.ckpt");
  auto path_b = temp_file("det_b.ckpt");
  auto logs_a = run_once(path_a);
  auto logs_b = run_once(path_b);
  CHECK(file_bytes(path_a) == file_bytes(path_b));
  REQUIRE(logs_a.size() == logs_b.size());
  for (std::size_t i = 0; i < logs_a.size(); ++i) {
    CHECK(logs_a[i].train_loss == logs_b[i].train_loss);
    CHECK(logs_a[i].val_loss == logs_b[i].val_loss);
    CHECK(logs_a[i].val_sumr == logs_b[i].val_sumr);
  }
}
