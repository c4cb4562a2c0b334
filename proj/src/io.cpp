#include <cmath>
#include <fstream>
#include <sstream>

#include "arveson/io.hpp"

#ifndef ARVESON_VERSION
#define ARVESON_VERSION "0.0.0"
#endif

namespace arveson {

const char* tool_version() { return "arveson " ARVESON_VERSION; }

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const nlohmann::json& field(const nlohmann::json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError("missing field " + join(path, key));
  return *it;
}

double number_at(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path + " is not a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw SchemaError(path + " is not finite");
  return x;
}

std::int64_t integer_at(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number_integer()) throw SchemaError(path + " is not an integer");
  return v.get<std::int64_t>();
}

std::uint64_t unsigned_at(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw SchemaError(path + " is not a non-negative integer");
  return v.get<std::uint64_t>();
}

nlohmann::json parse_json(std::string_view text) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    // Includes number literals that overflow a double.
    throw ParseError(e.what());
  }
}

void require_object(const nlohmann::json& v, const std::string& path) {
  if (!v.is_object()) throw SchemaError((path.empty() ? std::string("document") : path) + " is not an object");
}

}  // namespace

nlohmann::json matrix_to_json(const ComplexMatrix& m) {
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json rr = nlohmann::json::array();
    nlohmann::json ri = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ri.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return {{"n", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

ComplexMatrix matrix_from_json(const nlohmann::json& value, const std::string& path) {
  require_object(value, path);
  const std::int64_t n = integer_at(field(value, path, "n"), join(path, "n"));
  if (n < 1) throw SchemaError(join(path, "n") + " must be positive");
  ComplexMatrix m(n, n);
  for (const char* part : {"re", "im"}) {
    const std::string p = join(path, part);
    const auto& rows = field(value, path, part);
    if (!rows.is_array()) throw SchemaError(p + " must be an array of " + std::to_string(n) + " rows");
    // Rows are checked before the row count so a short first row is
    // reported at its own path.
    for (std::size_t i = 0; i < rows.size() && i < static_cast<std::size_t>(n); ++i) {
      const auto& row = rows[i];
      if (!row.is_array() || row.size() != static_cast<std::size_t>(n))
        throw SchemaError(index(p, i) + " must be an array of " + std::to_string(n) + " numbers");
      for (std::size_t j = 0; j < row.size(); ++j) {
        const double x = number_at(row[j], index(index(p, i), j));
        auto& entry = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (part[0] == 'r')
          entry.real(x);
        else
          entry.imag(x);
      }
    }
    if (rows.size() != static_cast<std::size_t>(n))
      throw SchemaError(p + " has " + std::to_string(rows.size()) + " rows, expected " + std::to_string(n));
  }
  return m;
}

ComplexMatrix parse_matrix(std::string_view text) { return matrix_from_json(parse_json(text)); }

std::string write_matrix(const ComplexMatrix& m) { return canonical_json(matrix_to_json(m)); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool same_matrix(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool operator==(const WitnessFile& a, const WitnessFile& b) {
  return same_matrix(a.h, b.h) && same_matrix(a.k, b.k) && a.value_a == b.value_a && a.value_b == b.value_b;
}

bool operator==(const ReportFile& a, const ReportFile& b) {
  const bool unitary_equal = a.unitary.has_value() == b.unitary.has_value() &&
                             (!a.unitary || same_matrix(*a.unitary, *b.unitary));
  return a.verdict == b.verdict && unitary_equal && a.witness == b.witness && a.max_gap == b.max_gap &&
         a.commutant_dims == b.commutant_dims && a.plan == b.plan && a.tool_version == b.tool_version;
}

ReportFile to_report_file(const SimilarityReport<double>& report) {
  ReportFile out;
  out.verdict = to_string(report.verdict);
  out.unitary = report.unitary;
  if (report.witness)
    out.witness = WitnessFile{report.witness->h, report.witness->k, report.witness->value_a, report.witness->value_b};
  out.max_gap = report.max_invariant_gap;
  out.commutant_dims = {report.commutant_dims.first, report.commutant_dims.second};
  out.plan = {report.plan.count, report.plan.seed, report.plan.grid_denominator};
  out.tool_version = tool_version();
  return out;
}

nlohmann::json report_to_json(const ReportFile& report) {
  nlohmann::json out = {
      {"verdict", report.verdict},
      {"max_gap", report.max_gap},
      {"commutant_dims", {report.commutant_dims[0], report.commutant_dims[1]}},
      {"plan",
       {{"count", report.plan.count}, {"seed", report.plan.seed}, {"grid_denominator", report.plan.grid_denominator}}},
      {"tool_version", report.tool_version},
  };
  if (report.unitary) out["unitary"] = matrix_to_json(*report.unitary);
  if (report.witness)
    out["witness"] = {{"H", matrix_to_json(report.witness->h)},
                      {"K", matrix_to_json(report.witness->k)},
                      {"value_a", report.witness->value_a},
                      {"value_b", report.witness->value_b}};
  return out;
}

ReportFile report_from_json(const nlohmann::json& value) {
  require_object(value, "");
  ReportFile out;
  const auto& verdict = field(value, "", "verdict");
  if (!verdict.is_string()) throw SchemaError("verdict is not a string");
  out.verdict = verdict.get<std::string>();
  if (out.verdict != "similar" && out.verdict != "not_similar" && out.verdict != "inconclusive")
    throw SchemaError("verdict has unknown value " + out.verdict);

  if (value.contains("unitary")) out.unitary = matrix_from_json(value["unitary"], "unitary");
  if (value.contains("witness")) {
    const auto& w = value["witness"];
    require_object(w, "witness");
    out.witness = WitnessFile{matrix_from_json(field(w, "witness", "H"), "witness.H"),
                              matrix_from_json(field(w, "witness", "K"), "witness.K"),
                              number_at(field(w, "witness", "value_a"), "witness.value_a"),
                              number_at(field(w, "witness", "value_b"), "witness.value_b")};
  }
  if (out.unitary.has_value() != (out.verdict == "similar"))
    throw SchemaError("unitary must be present exactly when verdict is similar");
  if (out.witness.has_value() != (out.verdict == "not_similar"))
    throw SchemaError("witness must be present exactly when verdict is not_similar");

  out.max_gap = number_at(field(value, "", "max_gap"), "max_gap");
  const auto& dims = field(value, "", "commutant_dims");
  if (!dims.is_array() || dims.size() != 2) throw SchemaError("commutant_dims must be a pair of integers");
  out.commutant_dims = {integer_at(dims[0], "commutant_dims[0]"), integer_at(dims[1], "commutant_dims[1]")};

  const auto& plan = field(value, "", "plan");
  require_object(plan, "plan");
  out.plan.count = unsigned_at(field(plan, "plan", "count"), "plan.count");
  out.plan.seed = unsigned_at(field(plan, "plan", "seed"), "plan.seed");
  out.plan.grid_denominator = integer_at(field(plan, "plan", "grid_denominator"), "plan.grid_denominator");

  const auto& version = field(value, "", "tool_version");
  if (!version.is_string()) throw SchemaError("tool_version is not a string");
  out.tool_version = version.get<std::string>();
  return out;
}

ReportFile parse_report(std::string_view text) { return report_from_json(parse_json(text)); }

namespace {

void text_matrix(std::ostringstream& os, const char* name, const ComplexMatrix& m) {
  os << name << ":\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << " ";
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      os << "  " << format_number(m(i, j).real()) << (std::signbit(m(i, j).imag()) ? " - " : " + ")
         << format_number(std::abs(m(i, j).imag())) << "i";
    os << "\n";
  }
}

}  // namespace

std::string write_report(const ReportFile& report, ReportFormat format) {
  if (format == ReportFormat::json) return canonical_json(report_to_json(report));
  std::ostringstream os;
  os << "verdict: " << report.verdict << "\n";
  os << "max_gap: " << format_number(report.max_gap) << "\n";
  os << "commutant_dims: " << report.commutant_dims[0] << " " << report.commutant_dims[1] << "\n";
  os << "plan: count=" << report.plan.count << " seed=" << report.plan.seed
     << " grid_denominator=" << report.plan.grid_denominator << "\n";
  if (report.unitary) text_matrix(os, "unitary", *report.unitary);
  if (report.witness) {
    os << "witness: value_a=" << format_number(report.witness->value_a)
       << " value_b=" << format_number(report.witness->value_b) << "\n";
    text_matrix(os, "H", report.witness->h);
    text_matrix(os, "K", report.witness->k);
  }
  os << "tool_version: " << report.tool_version << "\n";
  return os.str();
}

std::string write_report(const SimilarityReport<double>& report, ReportFormat format) {
  return write_report(to_report_file(report), format);
}

}  // namespace arveson
