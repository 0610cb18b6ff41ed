#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "delaymargin/stability.hpp"
#include "delaymargin/zen.hpp"

namespace delaymargin::cli {

using nlohmann::json;

inline constexpr const char* kVersion = "1.0.0";

/// One schema problem, located by a JSON path such as "system.spectrum.radius".
struct Diagnostic {
  std::string path;
  std::string message;
};

/// Parses a problem file. Syntax errors become a single diagnostic carrying
/// the line and column.
std::optional<json> load_problem(const std::filesystem::path& file, std::vector<Diagnostic>& diags);

/// Schema check plus the retarded pre-flight (deg P > deg Q). `kind`, when
/// given, must match the file's own kind.
std::vector<Diagnostic> validate_problem(const json& doc, const std::string& kind = {});

// Typed views of validated documents. Behavior on invalid input is a thrown
// Error, so validate first.
cplx parse_complex(const json& v);
Polynomial parse_polynomial(const json& v);
SpectrumDescriptor parse_spectrum(const json& v);
DelaySystem parse_system(const json& v);
MeasureDescriptor parse_measure(const json& v);
TestSignal parse_signal(const json& v);
RationalMatrix parse_symbol(const json& v);

/// Command-line overrides applied on top of the file.
struct RunConfig {
  std::optional<double> tol;
  std::optional<double> h_max;
  std::uint64_t seed = 0;
};

struct RunOutput {
  json report;
  int exit_code = 0;
  std::vector<CrossingEvent> events;
  std::vector<std::pair<double, double>> norm_grid;
};

/// Dispatches one problem. Library errors propagate to the caller.
RunOutput run_problem(const std::string& kind, const json& doc, const RunConfig& cfg);

/// FNV-1a of the canonical serialization, as 16 hex digits.
std::string fingerprint(const json& value);

/// events.csv and, when a grid exists, norm_grid.csv.
void write_csv(const std::filesystem::path& dir, const RunOutput& out);

/// Doubles that JSON cannot hold (inf, nan) become strings.
json number(double x);
json complex_json(cplx z);

}  // namespace delaymargin::cli
