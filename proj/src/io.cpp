#include "cpaint/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace cpaint {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string where(const std::string& source, long line, const std::string& column) {
  return source + ":" + std::to_string(line) + ": column '" + column + "'";
}

template <typename Int>
Int parse_int(const std::string& text, const std::string& source, long line, const std::string& column) {
  Int value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw InputError(where(source, line, column) + ": expected an integer, got '" + text + "'");
  }
  return value;
}

double parse_real(const std::string& text, const std::string& source, long line, const std::string& column) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw InputError(where(source, line, column) + ": expected a number, got '" + text + "'");
  }
}

void expect_header(const std::string& line, const std::vector<std::string>& expected,
                   const std::string& source) {
  const auto fields = split_csv(line);
  for (const auto& col : expected) {
    if (std::find(fields.begin(), fields.end(), col) == fields.end()) {
      throw InputError(source + ":1: missing column '" + col + "'");
    }
  }
  if (fields != expected) {
    std::string want;
    for (const auto& c : expected) want += (want.empty() ? "" : ",") + c;
    throw InputError(source + ":1: header must be exactly '" + want + "'");
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  return in;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<RawSherdRecord> parse_counts(std::istream& in, const std::string& source) {
  static const std::vector<std::string> kHeader = {"site", "eu", "ru", "level", "decoration", "count"};
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": empty file (missing header)");
  expect_header(line, kHeader, source);

  std::vector<RawSherdRecord> out;
  std::set<std::tuple<std::string, std::string, std::string, int, std::string>> keys;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != kHeader.size()) {
      throw InputError(source + ":" + std::to_string(line_no) + ": expected 6 fields, got " +
                       std::to_string(f.size()));
    }
    RawSherdRecord r;
    r.site = f[0];
    r.eu = f[1];
    r.ru = f[2];
    if (r.site.empty()) throw InputError(where(source, line_no, "site") + ": empty");
    if (r.eu.empty()) throw InputError(where(source, line_no, "eu") + ": empty");
    r.level = parse_int<int>(f[3], source, line_no, "level");
    if (r.level < 0) throw InputError(where(source, line_no, "level") + ": must be >= 0");
    r.decoration = f[4];
    if (r.decoration.empty()) throw InputError(where(source, line_no, "decoration") + ": empty");
    r.count = parse_int<long>(f[5], source, line_no, "count");
    if (r.count < 1) throw InputError(where(source, line_no, "count") + ": must be >= 1");
    if (!keys.emplace(r.site, r.eu, r.ru, r.level, r.decoration).second) {
      throw InputError(source + ":" + std::to_string(line_no) + ": duplicate (site,eu,ru,level,decoration) key");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RawSherdRecord> load_counts(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_counts(in, path.string());
}

void write_counts(std::ostream& out, const std::vector<RawSherdRecord>& records) {
  out << "site,eu,ru,level,decoration,count\n";
  for (const auto& r : records) {
    out << r.site << ',' << r.eu << ',' << r.ru << ',' << r.level << ',' << r.decoration << ','
        << r.count << '\n';
  }
}

std::vector<RcdRow> parse_rcd(std::istream& in, const std::string& source) {
  static const std::vector<std::string> kHeader = {"eu", "depth_cm", "age_bp", "age_sd"};
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": empty file (missing header)");
  expect_header(line, kHeader, source);
  std::vector<RcdRow> out;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != kHeader.size()) {
      throw InputError(source + ":" + std::to_string(line_no) + ": expected 4 fields");
    }
    RcdRow r;
    r.eu = f[0];
    r.depth_cm = parse_real(f[1], source, line_no, "depth_cm");
    r.age_bp = parse_real(f[2], source, line_no, "age_bp");
    r.age_sd = parse_real(f[3], source, line_no, "age_sd");
    if (r.depth_cm < 0.0) throw InputError(where(source, line_no, "depth_cm") + ": must be >= 0");
    if (!(r.age_bp > 0.0)) throw InputError(where(source, line_no, "age_bp") + ": must be > 0");
    if (!(r.age_sd > 0.0)) throw InputError(where(source, line_no, "age_sd") + ": must be > 0");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RcdRow> load_rcd(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_rcd(in, path.string());
}

double FilterReport::retained_fraction() const {
  return original_total > 0 ? static_cast<double>(retained_total) / static_cast<double>(original_total) : 0.0;
}

FilterResult filter_dataset(const std::vector<RawSherdRecord>& records, long min_type_total,
                            long min_site_total) {
  FilterResult result;
  std::map<std::string, long> type_totals;
  std::set<std::string> sites;
  for (const auto& r : records) {
    type_totals[r.decoration] += r.count;
    sites.insert(r.site);
    result.report.original_total += r.count;
  }
  result.report.original_types = type_totals.size();
  result.report.original_sites = sites.size();

  std::vector<RawSherdRecord> by_type;
  std::map<std::string, long> site_totals;
  for (const auto& r : records) {
    if (type_totals[r.decoration] < min_type_total) continue;
    site_totals[r.site] += r.count;
    by_type.push_back(r);
  }
  std::set<std::string> kept_types, kept_sites;
  for (auto& r : by_type) {
    if (site_totals[r.site] < min_site_total) continue;
    kept_types.insert(r.decoration);
    kept_sites.insert(r.site);
    result.report.retained_total += r.count;
    result.records.push_back(std::move(r));
  }
  result.report.retained_types = kept_types.size();
  result.report.retained_sites = kept_sites.size();
  return result;
}

Granularity parse_granularity(const std::string& name) {
  if (name == "site") return Granularity::kSite;
  if (name == "eu") return Granularity::kEu;
  if (name == "ru") return Granularity::kRu;
  throw InputError("unknown granularity '" + name + "' (expected site, eu or ru)");
}

std::string to_string(Granularity g) {
  switch (g) {
    case Granularity::kSite: return "site";
    case Granularity::kEu: return "eu";
    case Granularity::kRu: return "ru";
  }
  return "?";
}

CountTable aggregate(const std::vector<RawSherdRecord>& records, Granularity granularity,
                     std::vector<std::string>* warnings) {
  std::set<std::string> labels_set;
  for (const auto& r : records) labels_set.insert(r.decoration);
  std::vector<std::string> labels(labels_set.begin(), labels_set.end());
  std::map<std::string, int> column;
  for (std::size_t d = 0; d < labels.size(); ++d) column[labels[d]] = static_cast<int>(d);

  std::set<std::pair<std::string, std::string>> eus_without_ru;
  std::map<UnitKey, CountVector> cells;
  for (const auto& r : records) {
    UnitKey key{r.site, "", "", r.level};
    if (granularity != Granularity::kSite) key.eu = r.eu;
    if (granularity == Granularity::kRu) {
      key.ru = r.ru;
      if (r.ru.empty()) eus_without_ru.emplace(r.site, r.eu);
    }
    auto [it, inserted] = cells.try_emplace(key, CountVector::Zero(static_cast<Eigen::Index>(labels.size())));
    it->second[column[r.decoration]] += static_cast<int>(r.count);
  }
  if (warnings) {
    for (const auto& [site, eu] : eus_without_ru) {
      warnings->push_back("site " + site + " eu " + eu + ": no RU identifiers, treating the EU as a single RU");
    }
  }
  std::vector<UnitLevel> units;
  for (auto& [key, counts] : cells) {
    if (counts.sum() == 0) continue;
    units.push_back(UnitLevel{key, std::move(counts)});
  }
  return CountTable(std::move(labels), std::move(units));
}

std::vector<RawSherdRecord> table_records(const CountTable& table) {
  std::vector<RawSherdRecord> out;
  for (const auto& u : table.units()) {
    for (int d = 0; d < table.dimension(); ++d) {
      if (u.counts[d] == 0) continue;
      out.push_back(RawSherdRecord{u.key.site, u.key.eu, u.key.ru, u.key.level,
                                   table.decoration_labels()[static_cast<std::size_t>(d)], u.counts[d]});
    }
  }
  return out;
}

std::string format_fingerprint(std::uint64_t fp) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
  return buf;
}

namespace {

nlohmann::json sampler_config_to_json(const SamplerConfig& c) {
  return {{"gamma", c.gamma},
          {"m", c.m},
          {"iterations", c.iterations},
          {"burn_in_fraction", c.burn_in_fraction},
          {"thin", c.thin},
          {"grid_points", c.grid_points},
          {"grid_low", c.grid_low},
          {"grid_high", c.grid_high},
          {"seed", c.seed},
          {"exp_mean", c.base.exp_mean},
          {"D", c.base.dimension}};
}

SamplerConfig sampler_config_from_json(const nlohmann::json& j) {
  SamplerConfig c;
  c.gamma = j.at("gamma").get<double>();
  c.m = j.at("m").get<int>();
  c.iterations = j.at("iterations").get<long>();
  c.burn_in_fraction = j.at("burn_in_fraction").get<double>();
  c.thin = j.at("thin").get<long>();
  c.grid_points = j.at("grid_points").get<int>();
  c.grid_low = j.at("grid_low").get<double>();
  c.grid_high = j.at("grid_high").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.base.exp_mean = j.at("exp_mean").get<double>();
  c.base.dimension = j.at("D").get<int>();
  return c;
}

}  // namespace

nlohmann::json chain_to_json(const ChainRecord& chain) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : chain.samples) {
    std::vector<int> labels(s.assignments.size());
    std::transform(s.assignments.begin(), s.assignments.end(), labels.begin(), [](int a) { return a + 1; });
    nlohmann::json components = nlohmann::json::array();
    for (const auto& c : s.components) {
      if (c.dimension() == 0) {
        components.push_back(nullptr);
      } else {
        components.push_back(std::vector<double>(c.alpha().data(), c.alpha().data() + c.alpha().size()));
      }
    }
    samples.push_back({{"iteration", s.iteration},
                       {"log_likelihood", s.log_likelihood},
                       {"K", count_large_clusters(s, 1)},
                       {"assignments", labels},
                       {"components", components}});
  }
  return {{"format_version", kChainFormatVersion},
          {"data_fingerprint", format_fingerprint(chain.data_fingerprint)},
          {"chain_index", chain.chain_index},
          {"k_primary", chain.k_primary},
          {"config", sampler_config_to_json(chain.config)},
          {"samples", samples}};
}

ChainRecord chain_from_json(const nlohmann::json& doc) {
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kChainFormatVersion) {
      throw InputError("unsupported chain format_version " + std::to_string(version));
    }
    ChainRecord chain;
    chain.data_fingerprint = std::stoull(doc.at("data_fingerprint").get<std::string>(), nullptr, 16);
    chain.chain_index = doc.at("chain_index").get<int>();
    chain.k_primary = doc.value("k_primary", 0);
    chain.config = sampler_config_from_json(doc.at("config"));
    for (const auto& js : doc.at("samples")) {
      ChainSample s;
      s.iteration = js.at("iteration").get<long>();
      s.log_likelihood = js.at("log_likelihood").get<double>();
      for (int label : js.at("assignments").get<std::vector<int>>()) {
        if (label < 1) throw InputError("chain: labels are 1-based");
        s.assignments.push_back(label - 1);
      }
      for (const auto& jc : js.at("components")) {
        if (jc.is_null()) {
          s.components.emplace_back();
          continue;
        }
        const auto alpha = jc.get<std::vector<double>>();
        s.components.emplace_back(Eigen::Map<const Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(alpha.size())));
      }
      for (int a : s.assignments) {
        if (a >= static_cast<int>(s.components.size()) || s.components[static_cast<std::size_t>(a)].dimension() == 0) {
          throw InputError("chain: assignment refers to a missing component");
        }
      }
      chain.samples.push_back(std::move(s));
    }
    return chain;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed chain document: ") + e.what());
  } catch (const ContractViolation& e) {
    throw InputError(std::string("invalid chain document: ") + e.what());
  }
}

void write_chain(const std::filesystem::path& path, const ChainRecord& chain) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << chain_to_json(chain).dump(1) << '\n';
}

ChainRecord read_chain(const std::filesystem::path& path) {
  auto in = open_input(path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return chain_from_json(doc);
}

void write_painting_csv(std::ostream& out, const PaintingMatrix& p) {
  out << "site,eu,ru,level,total";
  for (Eigen::Index k = 0; k < p.cols(); ++k) {
    if (p.has_residual && k == p.cols() - 1) {
      out << ",residual";
    } else {
      out << ",CP" << (k + 1);
    }
  }
  out << '\n';
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const auto& key = p.keys[static_cast<std::size_t>(i)];
    out << key.site << ',' << key.eu << ',' << key.ru << ',' << key.level << ','
        << static_cast<long>(p.weights[i]);
    for (Eigen::Index k = 0; k < p.cols(); ++k) out << ',' << format_real(p.values(i, k));
    out << '\n';
  }
}

PaintingMatrix parse_painting_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": empty painting file");
  const auto header = split_csv(line);
  static const std::vector<std::string> kKeys = {"site", "eu", "ru", "level", "total"};
  if (header.size() < kKeys.size() + 1 || !std::equal(kKeys.begin(), kKeys.end(), header.begin())) {
    throw InputError(source + ":1: painting header must start with site,eu,ru,level,total");
  }
  const auto cols = static_cast<Eigen::Index>(header.size() - kKeys.size());
  PaintingMatrix p;
  p.has_residual = header.back() == "residual";
  std::vector<std::vector<double>> rows;
  std::vector<double> weights;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) throw InputError(source + ":" + std::to_string(line_no) + ": wrong field count");
    p.keys.push_back(UnitKey{f[0], f[1], f[2], parse_int<int>(f[3], source, line_no, "level")});
    weights.push_back(static_cast<double>(parse_int<long>(f[4], source, line_no, "total")));
    std::vector<double> row;
    for (std::size_t k = kKeys.size(); k < f.size(); ++k) row.push_back(parse_real(f[k], source, line_no, header[k]));
    rows.push_back(std::move(row));
  }
  p.values.resize(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) p.values(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
  }
  p.weights = Eigen::Map<Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  return p;
}

KeyValues parse_key_values(std::istream& in, const std::string& source) {
  KeyValues kv;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw InputError(source + ":" + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, value).second) {
      throw InputError(source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

KeyValues load_key_values(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_key_values(in, path.string());
}

namespace {

const std::set<std::string> kSamplerKeys = {"gamma",     "m",        "iterations", "burn_in_fraction",
                                            "thin",      "grid_points", "grid_low", "grid_high",
                                            "seed",      "exp_mean"};
const std::set<std::string> kSimulationKeys = {"n_cps", "n_sites", "levels_per_site", "D",
                                               "counts_per_unit", "rho", "f", "sim_seed"};

double value_real(const std::string& key, const std::string& value) {
  return parse_real(value, "config", 0, key);
}

long value_int(const std::string& key, const std::string& value) {
  return parse_int<long>(value, "config", 0, key);
}

}  // namespace

void apply_config(const KeyValues& kv, SamplerConfig* sampler, SimulationConfig* simulation) {
  for (const auto& [key, value] : kv) {
    if (kSamplerKeys.count(key)) {
      if (!sampler) continue;
      if (key == "gamma") sampler->gamma = value_real(key, value);
      else if (key == "m") sampler->m = static_cast<int>(value_int(key, value));
      else if (key == "iterations") sampler->iterations = value_int(key, value);
      else if (key == "burn_in_fraction") sampler->burn_in_fraction = value_real(key, value);
      else if (key == "thin") sampler->thin = value_int(key, value);
      else if (key == "grid_points") sampler->grid_points = static_cast<int>(value_int(key, value));
      else if (key == "grid_low") sampler->grid_low = value_real(key, value);
      else if (key == "grid_high") sampler->grid_high = value_real(key, value);
      else if (key == "seed") sampler->seed = static_cast<std::uint64_t>(value_int(key, value));
      else if (key == "exp_mean") sampler->base.exp_mean = value_real(key, value);
    } else if (kSimulationKeys.count(key)) {
      if (!simulation) continue;
      if (key == "n_cps") simulation->n_cps = static_cast<int>(value_int(key, value));
      else if (key == "n_sites") simulation->n_sites = static_cast<int>(value_int(key, value));
      else if (key == "levels_per_site") simulation->levels_per_site = static_cast<int>(value_int(key, value));
      else if (key == "D") simulation->dimension = static_cast<int>(value_int(key, value));
      else if (key == "counts_per_unit") simulation->counts_per_unit = static_cast<int>(value_int(key, value));
      else if (key == "rho") simulation->rho = value_real(key, value);
      else if (key == "f") simulation->f = value_real(key, value);
      else if (key == "sim_seed") simulation->seed = static_cast<std::uint64_t>(value_int(key, value));
    } else if (key != "reps") {
      throw InputError("unknown config key '" + key + "'");
    }
  }
}

StudySpec parse_study_spec(const KeyValues& kv) {
  static const std::set<std::string> kListKeys = {"D", "counts_per_unit", "rho", "f"};
  KeyValues scalars;
  std::map<std::string, std::vector<std::string>> lists;
  for (const auto& [key, value] : kv) {
    if (kListKeys.count(key)) {
      lists[key] = split_csv(value);
    } else {
      scalars.emplace(key, value);
    }
  }
  StudySpec spec;
  SimulationConfig base;
  apply_config(scalars, &spec.sampler, &base);
  if (auto it = kv.find("reps"); it != kv.end()) spec.reps = static_cast<int>(value_int("reps", it->second));

  auto ints = [&](const std::string& key, int fallback) {
    std::vector<int> out;
    if (!lists.count(key)) return std::vector<int>{fallback};
    for (const auto& v : lists[key]) out.push_back(static_cast<int>(value_int(key, v)));
    return out;
  };
  auto reals = [&](const std::string& key, double fallback) {
    std::vector<double> out;
    if (!lists.count(key)) return std::vector<double>{fallback};
    for (const auto& v : lists[key]) out.push_back(value_real(key, v));
    return out;
  };
  try {
    spec.grid = make_grid(base, ints("D", base.dimension), ints("counts_per_unit", base.counts_per_unit),
                          reals("rho", base.rho), reals("f", base.f));
  } catch (const ContractViolation& e) {
    throw InputError(std::string("invalid grid: ") + e.what());
  }
  return spec;
}

void write_study_rows_csv(std::ostream& out, const StudyReport& report) {
  out << "cell,replicate,D,counts_per_unit,rho,f,kl_divergence,mean_correlation,modal_k\n";
  for (const auto& r : report.rows) {
    out << r.cell << ',' << r.replicate << ',' << r.config.dimension << ',' << r.config.counts_per_unit << ','
        << format_real(r.config.rho) << ',' << format_real(r.config.f) << ','
        << format_real(r.metrics.kl_divergence) << ',' << format_real(r.metrics.mean_correlation) << ','
        << r.metrics.modal_k << '\n';
  }
}

void write_study_summary_csv(std::ostream& out, const StudyReport& report) {
  out << "cell,D,counts_per_unit,rho,f,replicates,mean_kl_divergence,mean_correlation,mean_modal_k,modal_k_hits\n";
  for (const auto& c : report.cells) {
    out << c.cell << ',' << c.config.dimension << ',' << c.config.counts_per_unit << ','
        << format_real(c.config.rho) << ',' << format_real(c.config.f) << ',' << c.replicates << ','
        << format_real(c.mean_kl) << ',' << format_real(c.mean_correlation) << ','
        << format_real(c.mean_modal_k) << ',' << c.modal_k_hits << '\n';
  }
}

}  // namespace cpaint
