#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cylperc/errors.hpp"
#include "cylperc/vec.hpp"

namespace cylperc {

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
  double u = 0.1;
  double a0 = 1e5;
  int n = 0;
  // Unset: each experiment uses its own grid default.
  std::optional<double> h;
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  double window_radius = 100.0;
  std::string pair_family = "edge-hugging";
  // Empty: the default x-points of the central face.
  std::vector<Vec2> x_points;
  std::string out_dir = ".";
  unsigned threads = 1;

  double distance = 8.0;
  double r_in = 10.0;
  int i = 1;
  int k0 = 1;
  std::string a0_hat = "1e16";
  double c_p = 1.0;
  double c_q = 1.0;
  int levels = 20;
  double padding = 20.0;
  int directions = 720;
  int offsets = 400;
  std::string corpus;

  // Key/value pairs as given, for the JSON echo.
  std::map<std::string, std::string> raw;
};

// Parses key=value lines; `#` starts a comment. Throws ConfigError on
// unknown keys or bad values.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
void validate_config(const RunConfig& cfg);

struct ResultRecord {
  std::string experiment;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  double wall_time = 0.0;
  int schema_version = kSchemaVersion;
};

// Raised when a resource limit interrupts an experiment; carries the
// records finished so far.
class PartialResults : public ResourceLimit {
 public:
  PartialResults(const std::string& what, std::vector<ResultRecord> done)
      : ResourceLimit(what), records(std::move(done)) {}
  std::vector<ResultRecord> records;
};

const std::vector<std::string>& experiment_names();

std::vector<ResultRecord> run_experiment(const RunConfig& cfg, const std::string& name);
std::vector<ResultRecord> contrast_experiment(const RunConfig& cfg);

const char* build_id();

std::string csv_header();
std::string csv_row(const ResultRecord& r);
nlohmann::ordered_json summary_json(const RunConfig& cfg, const std::string& experiment,
                                    const std::vector<ResultRecord>& records, bool partial);
// Writes <out_dir>/<experiment>.csv and <out_dir>/<experiment>.json.
void write_outputs(const RunConfig& cfg, const std::string& experiment, const std::vector<ResultRecord>& records,
                   bool partial = false);

}  // namespace cylperc
