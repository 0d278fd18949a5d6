#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpaint/diagnostics.hpp"
#include "cpaint/simulation.hpp"

namespace cpaint {

/// One line of the long-format count file
/// `site,eu,ru,level,decoration,count`.
struct RawSherdRecord {
  std::string site;
  std::string eu;
  std::string ru;
  int level = 0;
  std::string decoration;
  long count = 0;

  bool operator==(const RawSherdRecord&) const = default;
};

/// One radiocarbon date, `eu,depth_cm,age_bp,age_sd`.
struct RcdRow {
  std::string eu;
  double depth_cm = 0.0;
  double age_bp = 0.0;
  double age_sd = 0.0;
};

std::vector<RawSherdRecord> parse_counts(std::istream& in, const std::string& source = "<stream>");
std::vector<RawSherdRecord> load_counts(const std::filesystem::path& path);
void write_counts(std::ostream& out, const std::vector<RawSherdRecord>& records);

std::vector<RcdRow> parse_rcd(std::istream& in, const std::string& source = "<stream>");
std::vector<RcdRow> load_rcd(const std::filesystem::path& path);

struct FilterReport {
  long original_total = 0;
  long retained_total = 0;
  std::size_t original_types = 0;
  std::size_t retained_types = 0;
  std::size_t original_sites = 0;
  std::size_t retained_sites = 0;

  /// retained / original, 0 when the input was empty.
  double retained_fraction() const;
};

struct FilterResult {
  std::vector<RawSherdRecord> records;
  FilterReport report;
};

/// Drops decoration types with global total < min_type_total, then sites
/// whose remaining total < min_site_total.
FilterResult filter_dataset(const std::vector<RawSherdRecord>& records, long min_type_total,
                            long min_site_total);

enum class Granularity { kSite, kEu, kRu };

Granularity parse_granularity(const std::string& name);
std::string to_string(Granularity g);

/// Sums counts within (unit, level) at the given granularity and drops
/// all-zero unit-levels. Decoration columns are sorted by label; rows by key.
/// RU aggregation of records lacking an RU treats the EU as one RU and
/// appends a message to `warnings` when provided.
CountTable aggregate(const std::vector<RawSherdRecord>& records, Granularity granularity,
                     std::vector<std::string>* warnings = nullptr);

/// Long-format records for every non-zero cell of a table.
std::vector<RawSherdRecord> table_records(const CountTable& table);

// Chains are stored as one JSON document with labels written 1-based.
inline constexpr int kChainFormatVersion = 1;

nlohmann::json chain_to_json(const ChainRecord& chain);
ChainRecord chain_from_json(const nlohmann::json& doc);
void write_chain(const std::filesystem::path& path, const ChainRecord& chain);
ChainRecord read_chain(const std::filesystem::path& path);

void write_painting_csv(std::ostream& out, const PaintingMatrix& p);
PaintingMatrix parse_painting_csv(std::istream& in, const std::string& source = "<stream>");

/// Flat `key = value` text, `#` starts a comment. Values stay strings.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::istream& in, const std::string& source = "<stream>");
KeyValues load_key_values(const std::filesystem::path& path);

/// Applies recognized keys onto the configs; unknown keys raise InputError.
/// Sampler keys: gamma m iterations burn_in_fraction thin grid_points
/// grid_low grid_high seed exp_mean. Simulation keys: n_cps n_sites
/// levels_per_site D counts_per_unit rho f sim_seed.
void apply_config(const KeyValues& kv, SamplerConfig* sampler, SimulationConfig* simulation);

/// Grid file: simulation/sampler keys plus comma-separated lists for
/// D, counts_per_unit, rho, f and an optional `reps`.
struct StudySpec {
  std::vector<SimulationConfig> grid;
  SamplerConfig sampler;
  int reps = 1;
};
StudySpec parse_study_spec(const KeyValues& kv);

void write_study_rows_csv(std::ostream& out, const StudyReport& report);
void write_study_summary_csv(std::ostream& out, const StudyReport& report);

std::string format_fingerprint(std::uint64_t fp);

}  // namespace cpaint
