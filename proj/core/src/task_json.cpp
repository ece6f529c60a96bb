#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"
#include "pflow/task.hpp"

namespace pflow {
namespace {

using nlohmann::json;

json vector_to_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from_json(const json& j, Index dim, const char* name) {
  if (!j.is_array()) throw ConfigError(std::string("task: '") + name + "' must be an array");
  const auto values = j.get<std::vector<double>>();
  if (static_cast<Index>(values.size()) != dim) {
    throw ConfigError(std::string("task: '") + name + "' has wrong length");
  }
  return Eigen::Map<const Vector>(values.data(), dim);
}

json covariance_to_json(const Covariance& c) {
  if (!c.is_dense()) {
    return json{{"direction", vector_to_json(c.spike_direction())},
                {"parallel", c.parallel_variance()},
                {"orthogonal", c.orthogonal_variance()}};
  }
  const Matrix m = c.matrix();
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i).transpose()));
  return rows;
}

Covariance covariance_from_json(const json& j, Index dim, const char* name) {
  if (j.is_object()) {
    return Covariance::spiked(vector_from_json(j.at("direction"), dim, name),
                              j.at("parallel").get<double>(), j.at("orthogonal").get<double>());
  }
  if (!j.is_array() || static_cast<Index>(j.size()) != dim) {
    throw ConfigError(std::string("task: '") + name + "' must be a dim x dim array");
  }
  Matrix m(dim, dim);
  for (Index i = 0; i < dim; ++i) m.row(i) = vector_from_json(j[i], dim, name).transpose();
  return Covariance::dense(m);
}

}  // namespace

std::string task_to_json(const TaskSpec& task) {
  const json j{{"dim", task.dim()},
               {"mu_pos", vector_to_json(task.mu_pos())},
               {"mu_neg", vector_to_json(task.mu_neg())},
               {"sigma_pos", covariance_to_json(task.sigma_pos())},
               {"sigma_neg", covariance_to_json(task.sigma_neg())}};
  return j.dump(2);
}

TaskSpec task_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("task: invalid JSON: ") + e.what(), e.byte);
  }
  try {
    if (!j.is_object()) throw ConfigError("task: top-level JSON value must be an object");
    const Index dim = j.at("dim").get<Index>();
    if (dim <= 0) throw ConfigError("task: 'dim' must be positive");
    if (j.contains("sigma") && !j.contains("sigma_pos")) {
      IsotropicTaskParams p = IsotropicTaskParams::canonical(dim, j.at("sigma").get<double>(),
                                                             j.value("epsilon", 0.0));
      if (j.contains("mu")) p.mu = vector_from_json(j.at("mu"), dim, "mu");
      return p.to_task();
    }
    return TaskSpec(vector_from_json(j.at("mu_pos"), dim, "mu_pos"),
                    vector_from_json(j.at("mu_neg"), dim, "mu_neg"),
                    covariance_from_json(j.at("sigma_pos"), dim, "sigma_pos"),
                    covariance_from_json(j.at("sigma_neg"), dim, "sigma_neg"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("task: ") + e.what());
  }
}

}  // namespace pflow
