#pragma once

// JSON plumbing for matrices and similarity reports.
//
// Output is canonical: object keys sorted bytewise, floating-point values
// written with 17 significant digits, fixed indentation. Equal inputs give
// byte-equal text.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "arveson/linalg.hpp"
#include "arveson/similarity.hpp"

namespace arveson {

/// Version string embedded in every report.
const char* tool_version();

std::string canonical_json(const nlohmann::json& value);
std::string format_number(double value);

/// {"n": n, "re": [[...]], "im": [[...]]}, rows outermost.
nlohmann::json matrix_to_json(const ComplexMatrix& m);
/// `path` prefixes locations in SchemaError messages.
ComplexMatrix matrix_from_json(const nlohmann::json& value, const std::string& path = "");
ComplexMatrix parse_matrix(std::string_view text);
std::string write_matrix(const ComplexMatrix& m);

/// Reads a whole file; InvalidArgument if it cannot be opened.
std::string read_file(const std::string& path);

bool same_matrix(const ComplexMatrix& a, const ComplexMatrix& b);

struct WitnessFile {
  ComplexMatrix h;
  ComplexMatrix k;
  double value_a = 0;
  double value_b = 0;
};

struct PlanFile {
  std::uint64_t count = 0;
  std::uint64_t seed = 0;
  std::int64_t grid_denominator = 0;
  friend bool operator==(const PlanFile&, const PlanFile&) = default;
};

struct ReportFile {
  std::string verdict;
  std::optional<ComplexMatrix> unitary;
  std::optional<WitnessFile> witness;
  double max_gap = 0;
  std::array<std::int64_t, 2> commutant_dims{0, 0};
  PlanFile plan;
  std::string tool_version;
};

bool operator==(const WitnessFile& a, const WitnessFile& b);
bool operator==(const ReportFile& a, const ReportFile& b);

enum class ReportFormat { json, text };

ReportFile to_report_file(const SimilarityReport<double>& report);
nlohmann::json report_to_json(const ReportFile& report);
/// Validates the schema invariants as well as the field types.
ReportFile report_from_json(const nlohmann::json& value);
ReportFile parse_report(std::string_view text);

std::string write_report(const ReportFile& report, ReportFormat format);
std::string write_report(const SimilarityReport<double>& report, ReportFormat format);

}  // namespace arveson
