#pragma once

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "klrhop/sweep.hpp"

namespace klrhop {

inline constexpr int kModelSchemaVersion = 1;

/// Frozen CSV header for sweep records.
inline constexpr const char* kRecordsCsvHeader =
    "gamma,load,p,sharpness,log10_sharpness,fd_sq,fi_sq,rho,stable_rank,lambda_max,spectrum_class,seed,converged";

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& rows, const char* what) {
  if (!rows.is_array() || rows.empty()) throw SchemaError(std::string(what) + " must be a non-empty array of rows");
  const std::size_t n_cols = rows.front().is_array() ? rows.front().size() : 0;
  if (n_cols == 0) throw SchemaError(std::string(what) + " rows must be non-empty arrays");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(n_cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (!row.is_array() || row.size() != n_cols)
      throw DimensionMismatchError(std::string(what) + " row " + std::to_string(r) + " has the wrong length");
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (!row[c].is_number()) throw SchemaError(std::string(what) + " entries must be numbers");
      m(static_cast<Index>(r), static_cast<Index>(c)) = row[c].get<double>();
    }
  }
  return m;
}

/// Shortest form that parses back to the same double ("%.17g").
inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_real(const std::string& s, const std::string& column) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    throw SchemaError("column '" + column + "': cannot parse '" + s + "' as a real");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

inline nlohmann::json model_to_json(const KlrModel& model) {
  nlohmann::json j;
  j["schema_version"] = kModelSchemaVersion;
  j["config"] = {{"n", model.config.n_neurons},
                 {"p", model.config.n_patterns},
                 {"gamma", model.config.gamma},
                 {"seed", model.config.seed}};
  nlohmann::json patterns = nlohmann::json::array();
  const Matrix& xi = model.patterns.matrix();
  for (Index r = 0; r < xi.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Index c = 0; c < xi.cols(); ++c) row.push_back(xi(r, c) > 0.0 ? 1 : -1);
    patterns.push_back(std::move(row));
  }
  j["patterns"] = std::move(patterns);
  j["dual"] = detail::matrix_to_json(model.dual.matrix());
  const TrainConfig& tc = model.train_config;
  j["train_config"] = {{"reg_lambda", tc.reg_lambda},
                       {"learning_rate", tc.learning_rate},
                       {"max_epochs", tc.max_epochs},
                       {"grad_tol", tc.grad_tol},
                       {"regularizer", to_string(tc.regularizer)},
                       {"step_control", to_string(tc.step_control)}};
  j["train_meta"] = {{"epochs", model.train_meta.epochs},
                     {"final_loss", model.train_meta.final_loss},
                     {"converged", model.train_meta.converged}};
  return j;
}

inline KlrModel model_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || !j.contains("schema_version")) throw SchemaError("model file lacks schema_version");
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion)
      throw SchemaError("unsupported model schema_version " + std::to_string(version) + " (expected " +
                        std::to_string(kModelSchemaVersion) + ")");
    const auto& cfg = j.at("config");
    NetworkConfig config{cfg.at("n").get<Index>(), cfg.at("p").get<Index>(), cfg.at("gamma").get<double>(),
                         cfg.at("seed").get<std::uint64_t>()};
    const Matrix xi = detail::matrix_from_json(j.at("patterns"), "patterns");
    const Matrix dual = detail::matrix_from_json(j.at("dual"), "dual");
    if (xi.rows() != config.n_patterns || xi.cols() != config.n_neurons)
      throw DimensionMismatchError("patterns are " + std::to_string(xi.rows()) + " x " + std::to_string(xi.cols()) +
                                   " but config declares P=" + std::to_string(config.n_patterns) +
                                   ", N=" + std::to_string(config.n_neurons));
    if (dual.rows() != xi.rows() || dual.cols() != xi.cols())
      throw DimensionMismatchError("dual matrix is " + std::to_string(dual.rows()) + " x " +
                                   std::to_string(dual.cols()) + " but patterns are " + std::to_string(xi.rows()) +
                                   " x " + std::to_string(xi.cols()));
    TrainConfig tc;
    if (j.contains("train_config")) {
      const auto& t = j.at("train_config");
      tc.reg_lambda = t.at("reg_lambda").get<double>();
      tc.learning_rate = t.at("learning_rate").get<double>();
      tc.max_epochs = t.at("max_epochs").get<long>();
      tc.grad_tol = t.at("grad_tol").get<double>();
      tc.regularizer = parse_regularizer(t.at("regularizer").get<std::string>());
      tc.step_control = parse_step_control(t.at("step_control").get<std::string>());
    }
    TrainMeta meta;
    const auto& m = j.at("train_meta");
    meta.epochs = m.at("epochs").get<long>();
    meta.final_loss = m.at("final_loss").get<double>();
    meta.converged = m.at("converged").get<bool>();
    return make_model(PatternSet(xi), config.gamma, dual, tc, meta, config.seed);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed model file: ") + e.what());
  } catch (const ParameterError& e) {
    throw SchemaError(std::string("invalid model contents: ") + e.what());
  } catch (const NumericalError& e) {
    throw SchemaError(std::string("invalid model contents: ") + e.what());
  }
}

inline void save_model(const KlrModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << model_to_json(model).dump(1) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline KlrModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingFileError("model file '" + path.string() + "' does not exist");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

inline std::string records_to_csv(const std::vector<CellRecord>& records) {
  std::string out = kRecordsCsvHeader;
  out += '\n';
  for (const auto& r : records) {
    using detail::format_real;
    out += format_real(r.gamma) + ',' + format_real(r.load) + ',' + std::to_string(r.p_patterns) + ',';
    if (r.failed) {
      out += ",,,,,,,,";  // sharpness .. spectrum_class left empty
    } else {
      out += format_real(r.sharpness) + ',' + format_real(r.log10_sharpness) + ',' + format_real(r.fd_sq) + ',' +
             format_real(r.fi_sq) + ',' + format_real(r.rho) + ',' + format_real(r.stable_rank) + ',' +
             format_real(r.lambda_max) + ',' + (r.spectrum_class ? to_string(*r.spectrum_class) : std::string()) + ',';
    }
    out += std::to_string(r.seed) + ',' + ((r.train_converged && !r.failed) ? "true" : "false") + '\n';
  }
  return out;
}

inline void write_records_csv(const std::vector<CellRecord>& records, const std::filesystem::path& path) {
  if (records.empty()) throw ParameterError("write_records_csv: no records");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing: " + std::strerror(errno));
  out << records_to_csv(records);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

/// Parses a file written by write_records_csv. Per-trial detail is not stored
/// in the CSV, so `trials` is empty in the result.
inline std::vector<CellRecord> read_records_csv(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingFileError("records file '" + path.string() + "' does not exist");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string line;
  if (!std::getline(in, line) || line != kRecordsCsvHeader) throw SchemaError("'" + path.string() + "' has an unexpected header");
  static const std::vector<std::string> columns = detail::split_csv_line(kRecordsCsvHeader);
  std::vector<CellRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != columns.size())
      throw SchemaError("row " + std::to_string(records.size() + 1) + " has " + std::to_string(f.size()) + " fields");
    CellRecord r;
    r.gamma = detail::parse_real(f[0], columns[0]);
    r.load = detail::parse_real(f[1], columns[1]);
    r.p_patterns = static_cast<Index>(std::stoll(f[2]));
    r.failed = f[3].empty();
    if (!r.failed) {
      r.sharpness = detail::parse_real(f[3], columns[3]);
      r.log10_sharpness = detail::parse_real(f[4], columns[4]);
      r.fd_sq = detail::parse_real(f[5], columns[5]);
      r.fi_sq = detail::parse_real(f[6], columns[6]);
      r.rho = detail::parse_real(f[7], columns[7]);
      r.stable_rank = detail::parse_real(f[8], columns[8]);
      r.lambda_max = detail::parse_real(f[9], columns[9]);
      if (!f[10].empty()) r.spectrum_class = parse_spectrum_shape(f[10]);
    }
    r.seed = std::stoull(f[11]);
    if (f[12] != "true" && f[12] != "false") throw SchemaError("column 'converged' must be true or false");
    r.train_converged = f[12] == "true";
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace klrhop
