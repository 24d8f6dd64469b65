#include "quantstream/serialize.hpp"

#include <json.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "quantstream/errors.hpp"
#include "quantstream/experiments.hpp"
#include "quantstream/inference.hpp"

namespace quantstream {

namespace {

using nlohmann::json;

constexpr const char* kSnapshotFormat = "quantstream-snapshot";
constexpr int kSnapshotVersion = 1;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, const char* field) {
  if (!rows.is_array() || rows.empty())
    throw InputError(std::string("snapshot: field '") + field +
                     "' must be a non-empty array of rows");
  const auto row_count = static_cast<Eigen::Index>(rows.size());
  Eigen::Index col_count = -1;
  Eigen::MatrixXd out;
  for (Eigen::Index i = 0; i < row_count; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array())
      throw InputError(std::string("snapshot: field '") + field + "' rows must be arrays");
    if (col_count < 0) {
      col_count = static_cast<Eigen::Index>(row.size());
      out.resize(row_count, col_count);
    }
    if (static_cast<Eigen::Index>(row.size()) != col_count)
      throw InputError(std::string("snapshot: field '") + field + "' rows have mixed widths");
    for (Eigen::Index j = 0; j < col_count; ++j) {
      const json& cell = row[static_cast<std::size_t>(j)];
      if (!cell.is_number())
        throw InputError(std::string("snapshot: field '") + field + "' must hold numbers");
      out(i, j) = cell.get<double>();
    }
  }
  return out;
}

// Widest fixed format that round-trips an IEEE double, for CSV artifacts.
std::string full_precision(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

}  // namespace

std::string snapshot_to_json(const QuantileEstimator& est) {
  json doc;
  doc["format"] = kSnapshotFormat;
  doc["version"] = kSnapshotVersion;
  doc["schedule"] = {{"c_gamma", est.schedule().c_gamma},
                     {"beta", est.schedule().beta},
                     {"a", est.schedule().a}};
  doc["grid"] = est.grid().levels();
  doc["series_count"] = est.series_count();
  doc["initial_values"] = est.initial_values();
  doc["step"] = est.step();
  doc["raw"] = matrix_to_json(est.raw());
  doc["averaged"] = matrix_to_json(est.averaged());
  return doc.dump();
}

QuantileEstimator estimator_from_snapshot(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("snapshot: malformed JSON: ") + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("format", std::string()) != kSnapshotFormat)
      throw InputError("snapshot: missing or unexpected format tag");
    if (doc.value("version", -1) != kSnapshotVersion)
      throw InputError("snapshot: unsupported version");
    const json& schedule_doc = doc.at("schedule");
    ScheduleConfig schedule;
    schedule.c_gamma = schedule_doc.at("c_gamma").get<double>();
    schedule.beta = schedule_doc.at("beta").get<double>();
    schedule.a = schedule_doc.at("a").get<double>();
    QuantileGrid grid(doc.at("grid").get<std::vector<double>>());
    auto initial_values = doc.at("initial_values").get<std::vector<double>>();
    const auto series_count = doc.at("series_count").get<std::int64_t>();
    if (series_count != static_cast<std::int64_t>(initial_values.size()))
      throw InputError("snapshot: series_count does not match initial_values");
    const auto step = doc.at("step").get<std::int64_t>();
    Eigen::MatrixXd raw = matrix_from_json(doc.at("raw"), "raw");
    Eigen::MatrixXd averaged = matrix_from_json(doc.at("averaged"), "averaged");
    return QuantileEstimator::restore(std::move(grid), schedule, std::move(initial_values),
                                      step, std::move(raw), std::move(averaged));
  } catch (const json::exception& e) {
    throw InputError(std::string("snapshot: ") + e.what());
  }
}

std::string report_to_json(const InferenceReport& report) {
  json doc;
  doc["statistic"] = report.statistic;
  doc["critical_value"] = report.critical_value;
  doc["alpha"] = report.alpha;
  doc["reject"] = report.reject;
  json bands = json::array();
  for (const Band& band : report.bands) {
    bands.push_back({{"series", band.series},
                     {"tau", band.tau},
                     {"lo", band.lo},
                     {"estimate", band.estimate},
                     {"hi", band.hi}});
  }
  doc["bands"] = std::move(bands);
  return doc.dump();
}

std::string coverage_to_csv(const CoverageTable& table) {
  std::string out = "n,beta,alpha,rate,mc_se,replications\n";
  for (const CoverageCell& cell : table.cells) {
    out += std::to_string(cell.n) + ',' + full_precision(cell.beta) + ',' +
           full_precision(cell.alpha) + ',' + full_precision(cell.rate) + ',' +
           full_precision(cell.mc_se) + ',' + std::to_string(cell.replications) + '\n';
  }
  return out;
}

std::string coverage_to_json(const CoverageTable& table) {
  json cells = json::array();
  for (const CoverageCell& cell : table.cells) {
    cells.push_back({{"n", cell.n},
                     {"beta", cell.beta},
                     {"alpha", cell.alpha},
                     {"rate", cell.rate},
                     {"mc_se", cell.mc_se},
                     {"replications", cell.replications}});
  }
  return json{{"cells", std::move(cells)}}.dump();
}

std::string qq_to_csv(const QqResult& result) {
  std::string out = "p,empirical,reference\n";
  for (const QqPoint& point : result.points) {
    out += full_precision(point.p) + ',' + full_precision(point.empirical) + ',' +
           full_precision(point.reference) + '\n';
  }
  return out;
}

std::string qq_to_json(const QqResult& result) {
  json points = json::array();
  for (const QqPoint& point : result.points) {
    points.push_back(
        {{"p", point.p}, {"empirical", point.empirical}, {"reference", point.reference}});
  }
  return json{{"points", std::move(points)}}.dump();
}

std::string tail_to_csv(const TailCurve& curve) {
  std::string out = "x,averaged_exceedance,raw_exceedance\n";
  for (const TailCurvePoint& point : curve.points) {
    out += full_precision(point.x) + ',' + full_precision(point.averaged_rate) + ',' +
           full_precision(point.raw_rate) + '\n';
  }
  return out;
}

std::string tail_to_json(const TailCurve& curve) {
  json points = json::array();
  for (const TailCurvePoint& point : curve.points) {
    points.push_back({{"x", point.x},
                      {"averaged_exceedance", point.averaged_rate},
                      {"raw_exceedance", point.raw_rate}});
  }
  return json{{"n", curve.n},
              {"tau", curve.tau},
              {"replications", curve.replications},
              {"points", std::move(points)}}
      .dump();
}

}  // namespace quantstream
