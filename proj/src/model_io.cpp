#include "roweisposes/model_io.hpp"

#include <fstream>
#include <vector>

#include <json.hpp>

namespace roweisposes {

namespace {

using nlohmann::json;

constexpr int kModelSchemaVersion = 1;

json matrix_to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const json& j, const std::string& where) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 ||
      data.size() != static_cast<size_t>(rows * cols)) {
    throw ParseError(where + ": matrix payload size mismatch");
  }
  Matrix m(rows, cols);
  size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++];
  }
  return m;
}

json vector_to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vector_from_json(const json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(data.data(), data.size());
}

json read_document(const std::filesystem::path& path, const char* kind) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!j.contains("schema_version") ||
      j.at("schema_version").get<int>() != kModelSchemaVersion) {
    throw SchemaError(path.string() + ": missing or unsupported schema_version");
  }
  if (!j.contains("kind") || j.at("kind").get<std::string>() != kind) {
    throw SchemaError(path.string() + ": document is not a " +
                      std::string(kind));
  }
  return j;
}

void write_document(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace

void save_rda_model(const RdaModel& model, const std::filesystem::path& path) {
  json j;
  j["schema_version"] = kModelSchemaVersion;
  j["kind"] = "rda_model";
  j["u"] = matrix_to_json(model.U);
  j["p"] = model.p;
  j["pose_alphabet"] = model.pose_alphabet;
  j["projected_class_means"] = matrix_to_json(model.projected_class_means);
  j["train_mean"] = vector_to_json(model.train_mean);
  j["class_means_input"] = matrix_to_json(model.class_means_input);
  j["eigenvalues"] = vector_to_json(model.eigenvalues);
  j["factors"] = {{"r1", model.factors.r1}, {"r2", model.factors.r2}};
  j["kernel"] = to_string(model.kernel);
  j["rbf_gamma"] = model.rbf_gamma;
  j["preprocessing_fingerprint"] = model.preprocessing_fingerprint;
  write_document(j, path);
}

RdaModel load_rda_model(const std::filesystem::path& path) {
  const json j = read_document(path, "rda_model");
  RdaModel model;
  try {
    model.U = matrix_from_json(j.at("u"), path.string());
    model.p = j.at("p").get<int>();
    model.pose_alphabet = j.at("pose_alphabet").get<std::vector<std::string>>();
    model.projected_class_means =
        matrix_from_json(j.at("projected_class_means"), path.string());
    model.train_mean = vector_from_json(j.at("train_mean"));
    model.class_means_input =
        matrix_from_json(j.at("class_means_input"), path.string());
    model.eigenvalues = vector_from_json(j.at("eigenvalues"));
    model.factors.r1 = j.at("factors").at("r1").get<double>();
    model.factors.r2 = j.at("factors").at("r2").get<double>();
    model.kernel = kernel_from_string(j.at("kernel").get<std::string>());
    model.rbf_gamma = j.at("rbf_gamma").get<double>();
    model.preprocessing_fingerprint =
        j.at("preprocessing_fingerprint").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (model.U.cols() != model.p ||
      model.projected_class_means.cols() !=
          static_cast<Eigen::Index>(model.pose_alphabet.size())) {
    throw SchemaError(path.string() + ": inconsistent model dimensions");
  }
  return model;
}

void save_model_bank(const ActionModelBank& bank,
                     const std::filesystem::path& path) {
  json j;
  j["schema_version"] = kModelSchemaVersion;
  j["kind"] = "hmm_bank";
  j["alphabet"] = bank.alphabet;
  json models = json::object();
  for (const auto& [action, hmm] : bank.models) {
    json m;
    m["n_states"] = hmm.n_states;
    m["initial"] = vector_to_json(hmm.initial);
    m["transition"] = matrix_to_json(hmm.transition);
    m["emission"] = matrix_to_json(hmm.emission);
    models[action] = m;
  }
  j["models"] = models;
  write_document(j, path);
}

ActionModelBank load_model_bank(const std::filesystem::path& path) {
  const json j = read_document(path, "hmm_bank");
  ActionModelBank bank;
  try {
    bank.alphabet = j.at("alphabet").get<std::vector<std::string>>();
    for (const auto& [action, m] : j.at("models").items()) {
      DiscreteHmm hmm;
      hmm.n_states = m.at("n_states").get<int>();
      hmm.initial = vector_from_json(m.at("initial"));
      hmm.transition = matrix_from_json(m.at("transition"), path.string());
      hmm.emission = matrix_from_json(m.at("emission"), path.string());
      hmm.alphabet = bank.alphabet;
      bank.models[action] = std::move(hmm);
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  bank.validate();
  return bank;
}

}  // namespace roweisposes
