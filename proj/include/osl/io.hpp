#pragma once

// JSON and CSV (de)serialization. Reals that must reload bit-exactly are
// written as decimal strings with 17 significant digits; readers accept
// either strings or JSON numbers.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "osl/cocycle.hpp"
#include "osl/flexible.hpp"
#include "osl/oseledets.hpp"
#include "osl/scalar_dist.hpp"
#include "osl/skyscraper.hpp"

namespace osl {

using Json = nlohmann::ordered_json;

std::string exact_string(double x);
// Number or decimal string. Throws BadSpec.
double read_real(const Json& j, const std::string& what);
// A JSON number, or null for non-finite values.
Json real_value(double x);

Json to_json(const ScalarDist& d);
ScalarDist scalar_dist_from_json(const Json& j);

Json to_json(const MatrixDistribution& nu);
MatrixDistribution matrix_distribution_from_json(const Json& j);

Json to_json(const EtaCell& c);
EtaCell eta_cell_from_json(const Json& j);
Json to_json(const EtaSpec& eta);
EtaSpec eta_spec_from_json(const Json& j);

Json to_json(const TowerVector& pi);
TowerVector tower_vector_from_json(const Json& j);
std::vector<double> p_sequence_from_json(const Json& j);

Json to_json(const Estimate& e);
Json to_json(const LyapunovEstimate& l);
Json to_json(const AngleTailReport& r);
Json to_json(const DriftReport& r);
Json to_json(const ConstructionReport& r);

// Throws BadSpec on I/O or parse errors.
Json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const Json& j);

class CsvWriter {
 public:
  // Throws BadSpec when the file cannot be opened.
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
};

std::string csv_real(double x);

}  // namespace osl
