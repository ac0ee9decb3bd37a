#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cylev/cylindrical.hpp"
#include "cylev/hilbert.hpp"
#include "cylev/radonify.hpp"
#include "cylev/stats.hpp"
#include "json.hpp"

namespace cylev::io {

using nlohmann::json;

// Shortest exact decimal form; CSV payloads round-trip bit-for-bit.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  out << content;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- Hilbert-Schmidt operators ---------------------------------------------
// Schema: {"lambda": [...], "left": [[...]], "right": [[...]],
//          "K_H": int, "K_G": int}; left[k] is h_k, right[k] is g_k.

inline json hs_to_json(const HilbertSchmidtOp<double>& op) {
  json j;
  j["K_H"] = op.dim_domain();
  j["K_G"] = op.dim_codomain();
  j["lambda"] = std::vector<double>(op.singular_values().data(),
                                    op.singular_values().data() + op.rank());
  json left = json::array();
  json right = json::array();
  for (Index k = 0; k < op.rank(); ++k) {
    left.push_back(std::vector<double>(op.left().col(k).data(),
                                       op.left().col(k).data() + op.dim_domain()));
    right.push_back(std::vector<double>(op.right().col(k).data(),
                                        op.right().col(k).data() + op.dim_codomain()));
  }
  j["left"] = std::move(left);
  j["right"] = std::move(right);
  return j;
}

// Re-validates every constructor invariant on load.
inline HilbertSchmidtOp<double> hs_from_json(const json& j) {
  for (const char* key : {"lambda", "left", "right", "K_H", "K_G"}) {
    if (!j.contains(key)) {
      throw std::invalid_argument(std::string("operator json: missing field '") + key + "'");
    }
  }
  const auto dim_h = j.at("K_H").get<Index>();
  const auto dim_g = j.at("K_G").get<Index>();
  const auto lambda_vals = j.at("lambda").get<std::vector<double>>();
  const Index n = static_cast<Index>(lambda_vals.size());
  if (j.at("left").size() != static_cast<std::size_t>(n) ||
      j.at("right").size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("operator json: left/right must hold one vector per lambda");
  }

  VectorX<double> lambda(n);
  for (Index k = 0; k < n; ++k) lambda[k] = lambda_vals[static_cast<std::size_t>(k)];
  MatrixX<double> left(dim_h, n);
  MatrixX<double> right(dim_g, n);
  for (Index k = 0; k < n; ++k) {
    const auto hk = j.at("left")[static_cast<std::size_t>(k)].get<std::vector<double>>();
    const auto gk = j.at("right")[static_cast<std::size_t>(k)].get<std::vector<double>>();
    if (static_cast<Index>(hk.size()) != dim_h || static_cast<Index>(gk.size()) != dim_g) {
      throw std::invalid_argument("operator json: vector length does not match K_H/K_G");
    }
    for (Index i = 0; i < dim_h; ++i) left(i, k) = hk[static_cast<std::size_t>(i)];
    for (Index i = 0; i < dim_g; ++i) right(i, k) = gk[static_cast<std::size_t>(i)];
  }
  return HilbertSchmidtOp<double>(std::move(lambda), std::move(left), std::move(right));
}

inline void save_hs(const std::string& path, const HilbertSchmidtOp<double>& op) {
  write_text_file(path, hs_to_json(op).dump(2) + "\n");
}

inline HilbertSchmidtOp<double> load_hs(const std::string& path) {
  return hs_from_json(json::parse(read_text_file(path)));
}

// --- model metadata ----------------------------------------------------------

inline json model_to_json(const CoordinateLevyModel<double>& model) {
  json j;
  j["kind"] = to_cstr(model.kind());
  if (model.kind() == LevyKind::CompoundPoisson) {
    j["intensity"] = model.intensity();
    j["jump_law"] = model.jump_law().name();
  }
  if (model.kind() == LevyKind::Stable) {
    j["alpha"] = model.alpha();
  }
  return j;
}

// --- path payloads -----------------------------------------------------------

inline std::string bundle_to_csv(const CylindricalPathBundle<double>& bundle) {
  std::ostringstream out;
  out << "t";
  for (Index k = 0; k < bundle.coordinates(); ++k) out << ",beta_" << k;
  out << "\n";
  for (Index i = 0; i < bundle.grid().size(); ++i) {
    out << format_double(bundle.grid()[i]);
    for (Index k = 0; k < bundle.coordinates(); ++k) {
      out << "," << format_double(bundle.paths()(i, k));
    }
    out << "\n";
  }
  return out.str();
}

inline json bundle_sidecar(const CylindricalPathBundle<double>& bundle) {
  json j;
  j["model"] = model_to_json(bundle.model());
  j["seed"] = bundle.seed();
  j["K"] = bundle.coordinates();
  j["event_times"] = bundle.event_times();
  return j;
}

inline std::string vector_path_to_csv(const VectorPath<double>& path) {
  std::ostringstream out;
  out << "t";
  for (Index k = 0; k < path.dim(); ++k) out << ",y_" << k;
  out << "\n";
  for (Index i = 0; i < path.grid().size(); ++i) {
    out << format_double(path.grid()[i]);
    for (Index k = 0; k < path.dim(); ++k) {
      out << "," << format_double(path.values()(i, k));
    }
    out << "\n";
  }
  return out.str();
}

// --- reports -------------------------------------------------------------------

inline json report_to_json(const TestReport& r, const std::string& config_hash) {
  json j;
  j["name"] = r.name;
  j["statistic"] = r.statistic;
  if (r.p_value) {
    j["p_value"] = *r.p_value;
  } else {
    j["p_value"] = nullptr;
  }
  j["threshold"] = r.threshold;
  j["passed"] = r.passed;
  j["sample_size"] = r.sample_size;
  j["seed"] = r.seed;
  j["config_hash"] = config_hash;
  return j;
}

inline std::string reports_to_jsonl(const std::vector<TestReport>& reports,
                                    const std::string& config_hash) {
  std::ostringstream out;
  for (const auto& r : reports) {
    out << report_to_json(r, config_hash).dump() << "\n";
  }
  return out.str();
}

inline std::string reports_to_csv(const std::vector<TestReport>& reports) {
  std::ostringstream out;
  out << "name,statistic,p_value,passed,seed\n";
  for (const auto& r : reports) {
    out << r.name << "," << format_double(r.statistic) << ","
        << (r.p_value ? format_double(*r.p_value) : std::string()) << ","
        << (r.passed ? "true" : "false") << "," << r.seed << "\n";
  }
  return out.str();
}

inline json probe_to_json(const CauchyProbeReport<double>& r, double horizon,
                          const std::string& config_hash, std::uint64_t seed) {
  json j;
  j["m"] = r.m;
  j["n"] = r.n;
  j["epsilon"] = r.epsilon;
  j["empirical_prob"] = r.empirical_prob;
  j["tail_sq"] = r.tail_sq;
  j["replications"] = r.replications;
  j["chebyshev_bound"] = r.tail_sq * horizon / (r.epsilon * r.epsilon);
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  return j;
}

}  // namespace cylev::io
