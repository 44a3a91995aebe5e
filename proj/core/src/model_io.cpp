#include <algorithm>
#include <map>

#include "spkid/error.hpp"
#include "spkid/json_util.hpp"
#include "spkid/recognition.hpp"

namespace spkid {
namespace {

using nlohmann::json;

using P = MlpPredictor;

constexpr struct {
  const char* name;
  std::size_t offset;
  std::size_t count;
} kNetFields[] = {
    {"W1", P::kW1, P::kB1 - P::kW1}, {"b1", P::kB1, P::kW2 - P::kB1},
    {"W2", P::kW2, P::kB2 - P::kW2}, {"b2", P::kB2, P::kW3 - P::kB2},
    {"W3", P::kW3, P::kB3 - P::kW3}, {"b3", P::kB3, P::kParams - P::kB3},
};

json net_to_json(const MlpPredictor& net) {
  json j = json::object();
  for (const auto& f : kNetFields) {
    j[f.name] = std::vector<double>(net.params.begin() + static_cast<std::ptrdiff_t>(f.offset),
                                    net.params.begin() + static_cast<std::ptrdiff_t>(f.offset + f.count));
  }
  return j;
}

MlpPredictor net_from_json(const json& j) {
  MlpPredictor net;
  for (const auto& f : kNetFields) {
    const auto v = j.at(f.name).get<std::vector<double>>();
    if (v.size() != f.count) {
      throw Error(ErrorKind::format, std::string("net field ") + f.name + " must hold " +
                                         std::to_string(f.count) + " values");
    }
    std::copy(v.begin(), v.end(), net.params.begin() + static_cast<std::ptrdiff_t>(f.offset));
  }
  return net;
}

json linear_to_json(const LinearCodebook& cb) {
  json words = json::array();
  for (const auto& cw : cb.codewords) {
    words.push_back({{"lpcc", cw.lpcc}, {"lpc", cw.lpc}, {"population", cw.population}});
  }
  return {{"bits", cb.bits},
          {"training_distortion", cb.training_distortion},
          {"degenerate", cb.degenerate},
          {"codewords", words}};
}

LinearCodebook linear_from_json(const json& j) {
  LinearCodebook cb;
  cb.bits = j.at("bits").get<int>();
  cb.training_distortion = j.value("training_distortion", 0.0);
  cb.degenerate = j.value("degenerate", false);
  for (const auto& w : j.at("codewords")) {
    cb.codewords.push_back({w.at("lpcc").get<Vec>(), w.at("lpc").get<Vec>(),
                            w.at("population").get<std::size_t>()});
  }
  if (cb.bits < 0 || cb.codewords.size() != (std::size_t{1} << cb.bits)) {
    throw Error(ErrorKind::format, "linear codebook of " + std::to_string(cb.bits) +
                                       " bits holds " + std::to_string(cb.codewords.size()) +
                                       " codewords");
  }
  return cb;
}

json neural_to_json(const NeuralCodebook& cb) {
  json nets = json::array();
  for (const auto& n : cb.nets) nets.push_back(net_to_json(n));
  return {{"bits", cb.bits},
          {"source_bits", cb.source_bits},
          {"lloyd_iteration", cb.lloyd_iteration},
          {"nets", nets}};
}

NeuralCodebook neural_from_json(const json& j) {
  NeuralCodebook cb;
  cb.bits = j.at("bits").get<int>();
  cb.source_bits = j.value("source_bits", cb.bits);
  cb.lloyd_iteration = j.value("lloyd_iteration", 0);
  for (const auto& n : j.at("nets")) cb.nets.push_back(net_from_json(n));
  if (cb.bits < 0 || cb.nets.size() != (std::size_t{1} << cb.bits)) {
    throw Error(ErrorKind::format, "neural codebook of " + std::to_string(cb.bits) +
                                       " bits holds " + std::to_string(cb.nets.size()) + " nets");
  }
  return cb;
}

void sort_model(SpeakerModel& m) {
  std::stable_sort(m.linear.begin(), m.linear.end(),
                   [](const auto& a, const auto& b) { return a.bits < b.bits; });
  std::stable_sort(m.neural.begin(), m.neural.end(), [](const auto& a, const auto& b) {
    return a.bits != b.bits ? a.bits < b.bits : a.lloyd_iteration < b.lloyd_iteration;
  });
}

}  // namespace

nlohmann::json to_json(const SpeakerModel& model) {
  json linear = json::array();
  for (const auto& cb : model.linear) linear.push_back(linear_to_json(cb));
  json neural = json::array();
  for (const auto& cb : model.neural) neural.push_back(neural_to_json(cb));
  return {{"schema_version", kModelSchemaVersion},
          {"speaker", model.speaker},
          {"config", model.config},
          {"linear_codebooks", linear},
          {"neural_codebooks", neural},
          {"seed", model.seed}};
}

SpeakerModel model_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion) {
      throw Error(ErrorKind::format, "unsupported model schema_version " + std::to_string(version));
    }
    SpeakerModel m;
    m.speaker = j.at("speaker").get<std::string>();
    m.config = j.value("config", json::object());
    m.seed = j.value("seed", std::uint64_t{0});
    for (const auto& cb : j.at("linear_codebooks")) m.linear.push_back(linear_from_json(cb));
    if (j.contains("neural_codebooks")) {
      for (const auto& cb : j.at("neural_codebooks")) m.neural.push_back(neural_from_json(cb));
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, std::string("malformed model: ") + e.what());
  }
}

SpeakerModel model_for_bits(const SpeakerModel& model, int bits) {
  SpeakerModel m;
  m.speaker = model.speaker;
  m.config = model.config;
  m.seed = model.seed;
  for (const auto& cb : model.linear) {
    if (cb.bits == bits) m.linear.push_back(cb);
  }
  for (const auto& cb : model.neural) {
    if (cb.bits == bits) m.neural.push_back(cb);
  }
  return m;
}

SpeakerModel merge_models(std::span<const SpeakerModel> parts) {
  if (parts.empty()) throw Error(ErrorKind::invalid_argument, "merge_models: nothing to merge");
  SpeakerModel m;
  m.speaker = parts.front().speaker;
  m.config = parts.front().config;
  m.seed = parts.front().seed;
  for (const auto& p : parts) {
    if (p.speaker != m.speaker) {
      throw Error(ErrorKind::invalid_argument, "merge_models: mixed speakers");
    }
    for (const auto& cb : p.linear) {
      if (!m.has_linear(cb.bits)) m.linear.push_back(cb);
    }
    for (const auto& cb : p.neural) {
      if (!m.has_neural(cb.bits, cb.lloyd_iteration)) m.neural.push_back(cb);
    }
  }
  sort_model(m);
  return m;
}

std::string model_file_name(const std::string& speaker, int bits) {
  return speaker + "__b" + std::to_string(bits) + ".json";
}

void write_model_file(const SpeakerModel& model, const std::filesystem::path& path) {
  write_text_file(path, dump_json(to_json(model)));
}

SpeakerModel read_model_file(const std::filesystem::path& path) {
  try {
    return model_from_json(read_json_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::vector<SpeakerModel> read_model_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorKind::missing_model, "model directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::map<std::string, std::vector<SpeakerModel>> by_speaker;
  for (const auto& f : files) {
    SpeakerModel m = read_model_file(f);
    by_speaker[m.speaker].push_back(std::move(m));
  }
  if (by_speaker.empty()) {
    throw Error(ErrorKind::missing_model, "no model files in " + dir.string());
  }
  std::vector<SpeakerModel> out;
  for (const auto& [_, parts] : by_speaker) out.push_back(merge_models(parts));
  return out;
}

}  // namespace spkid
