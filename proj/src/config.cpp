#include "dualenc/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dualenc {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    int parsed = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' expects an integer, got '" + value +
                                "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' expects a number, got '" + value +
                                "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    unsigned long long parsed = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return static_cast<std::uint64_t>(parsed);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' expects a non-negative integer, got '" +
                                value + "'");
  }
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_int(key, item));
  }
  if (out.empty()) {
    throw std::invalid_argument("config: key '" + key + "' expects a comma-separated list");
  }
  return out;
}

std::string join_ints(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(values[i]);
  }
  return out;
}

}  // namespace

std::optional<std::pair<std::string, std::string>> parse_kv_line(const std::string& line) {
  std::string stripped = trim(line);
  if (stripped.empty() || stripped.front() == '#') return std::nullopt;
  std::size_t eq = stripped.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("expected 'key = value', got: " + line);
  }
  std::string key = trim(stripped.substr(0, eq));
  std::string value = trim(stripped.substr(eq + 1));
  if (key.empty()) throw std::invalid_argument("missing key in line: " + line);
  return std::make_pair(key, value);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "features") features = value;
  else if (key == "captions") captions = value;
  else if (key == "val_features") val_features = value;
  else if (key == "val_captions") val_captions = value;
  else if (key == "stopwords") stopwords = value;
  else if (key == "content_words") content_words = value;
  else if (key == "lemmas") lemmas = value;
  else if (key == "word_embeddings") word_embeddings = value;
  else if (key == "frame_dim") frame_dim = parse_int(key, value);
  else if (key == "word_embed_dim") word_embed_dim = parse_int(key, value);
  else if (key == "gru_hidden") gru_hidden = parse_int(key, value);
  else if (key == "conv_filters") conv_filters = parse_int(key, value);
  else if (key == "video_kernels") video_kernels = parse_int_list(key, value);
  else if (key == "text_kernels") text_kernels = parse_int_list(key, value);
  else if (key == "vocab_min_count") vocab_min_count = parse_int(key, value);
  else if (key == "sentence_cap") sentence_cap = parse_int(key, value);
  else if (key == "latent_dim") latent_dim = parse_int(key, value);
  else if (key == "concept_dim") concept_dim = parse_int(key, value);
  else if (key == "margin") margin = parse_double(key, value);
  else if (key == "alpha") alpha = parse_double(key, value);
  else if (key == "batch_size") batch_size = parse_int(key, value);
  else if (key == "learning_rate") learning_rate = parse_double(key, value);
  else if (key == "lr_decay_patience") lr_decay_patience = parse_int(key, value);
  else if (key == "lr_decay_factor") lr_decay_factor = parse_double(key, value);
  else if (key == "early_stop_patience") early_stop_patience = parse_int(key, value);
  else if (key == "max_epochs") max_epochs = parse_int(key, value);
  else if (key == "seed") seed = parse_u64(key, value);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

namespace {

RunConfig parse_lines(std::istream& in, const std::string& origin,
                      const std::filesystem::path* base_dir) {
  RunConfig config;
  std::string line;
  int line_no = 0;
  const std::vector<std::string> path_keys = {"features",      "captions", "val_features",
                                              "val_captions",  "stopwords", "content_words",
                                              "lemmas",        "word_embeddings"};
  while (std::getline(in, line)) {
    ++line_no;
    std::optional<std::pair<std::string, std::string>> kv;
    try {
      kv = parse_kv_line(line);
    } catch (const std::exception& e) {
      throw std::invalid_argument(origin + " line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!kv) continue;
    try {
      std::string value = kv->second;
      if (base_dir != nullptr && !value.empty()) {
        for (const auto& pk : path_keys) {
          if (kv->first == pk && std::filesystem::path(value).is_relative()) {
            value = (*base_dir / value).string();
            break;
          }
        }
      }
      config.set(kv->first, value);
    } catch (const std::exception& e) {
      throw std::invalid_argument(origin + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  return parse_lines(in, path, &base);
}

RunConfig RunConfig::from_kv_string(const std::string& text) {
  std::istringstream in(text);
  return parse_lines(in, "config", nullptr);
}

std::string RunConfig::to_kv_string() const {
  std::ostringstream out;
  char buffer[64];
  auto real = [&buffer](double v) {
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return std::string(buffer);
  };
  out << "features = " << features << "\n";
  out << "captions = " << captions << "\n";
  out << "val_features = " << val_features << "\n";
  out << "val_captions = " << val_captions << "\n";
  out << "stopwords = " << stopwords << "\n";
  out << "content_words = " << content_words << "\n";
  out << "lemmas = " << lemmas << "\n";
  out << "word_embeddings = " << word_embeddings << "\n";
  out << "frame_dim = " << frame_dim << "\n";
  out << "word_embed_dim = " << word_embed_dim << "\n";
  out << "gru_hidden = " << gru_hidden << "\n";
  out << "conv_filters = " << conv_filters << "\n";
  out << "video_kernels = " << join_ints(video_kernels) << "\n";
  out << "text_kernels = " << join_ints(text_kernels) << "\n";
  out << "vocab_min_count = " << vocab_min_count << "\n";
  out << "sentence_cap = " << sentence_cap << "\n";
  out << "latent_dim = " << latent_dim << "\n";
  out << "concept_dim = " << concept_dim << "\n";
  out << "margin = " << real(margin) << "\n";
  out << "alpha = " << real(alpha) << "\n";
  out << "batch_size = " << batch_size << "\n";
  out << "learning_rate = " << real(learning_rate) << "\n";
  out << "lr_decay_patience = " << lr_decay_patience << "\n";
  out << "lr_decay_factor = " << real(lr_decay_factor) << "\n";
  out << "early_stop_patience = " << early_stop_patience << "\n";
  out << "max_epochs = " << max_epochs << "\n";
  out << "seed = " << seed << "\n";
  return out.str();
}

}  // namespace dualenc
