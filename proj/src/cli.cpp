#include "cpaint/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "cpaint/io.hpp"
#include "cpaint/render.hpp"

namespace cpaint {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

template <typename Writer>
void write_with(const fs::path& path, Writer&& writer) {
  std::ostringstream buf;
  writer(buf);
  write_text(path, buf.str());
}

// Worker count: CPAINT_WORKERS when set, else the fallback.
int worker_count(int fallback) {
  if (const char* env = std::getenv("CPAINT_WORKERS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw InputError(std::string("CPAINT_WORKERS must be a positive integer, got '") + env + "'");
    return static_cast<int>(v);
  }
  return std::max(1, fallback);
}

CountTable load_table(const fs::path& path, const std::string& granularity, std::ostream& err) {
  std::vector<std::string> warnings;
  CountTable table = aggregate(load_counts(path), parse_granularity(granularity), &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  return table;
}

json nullable(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

// --- filter -------------------------------------------------------------

struct FilterArgs {
  std::string input, output, report;
  long min_type = 2000;
  long min_site = 100;
};

int cmd_filter(const FilterArgs& a, std::ostream& out) {
  const auto result = filter_dataset(load_counts(a.input), a.min_type, a.min_site);
  write_with(a.output, [&](std::ostream& o) { write_counts(o, result.records); });
  const auto& r = result.report;
  const json doc = {{"original_total", r.original_total}, {"retained_total", r.retained_total},
                    {"original_types", r.original_types}, {"retained_types", r.retained_types},
                    {"original_sites", r.original_sites}, {"retained_sites", r.retained_sites},
                    {"retained_fraction", r.retained_fraction()}};
  if (!a.report.empty()) write_text(a.report, doc.dump(2) + "\n");
  out << "types " << r.retained_types << '/' << r.original_types << ", sites " << r.retained_sites << '/'
      << r.original_sites << ", sherds " << r.retained_total << '/' << r.original_total << " ("
      << 100.0 * r.retained_fraction() << "%)\n";
  return 0;
}

// --- fit ----------------------------------------------------------------

struct FitArgs {
  std::string data, granularity = "eu", config, output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<long> iterations;
  int chains = 1;
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  SamplerConfig cfg;
  if (!a.config.empty()) apply_config(load_key_values(a.config), &cfg, nullptr);
  if (a.seed) cfg.seed = *a.seed;
  if (a.iterations) cfg.iterations = *a.iterations;
  const CountTable table = load_table(a.data, a.granularity, err);
  cfg.base.dimension = table.dimension();
  try {
    cfg.validate();
  } catch (const ContractViolation& e) {
    throw InputError(std::string("invalid sampler configuration: ") + e.what());
  }
  if (a.chains < 1) throw InputError("--chains must be at least 1");

  const auto records = run_chains(table, cfg, a.chains, worker_count(a.chains));
  fs::create_directories(a.output_dir);
  for (const auto& chain : records) {
    const fs::path path = fs::path(a.output_dir) / ("chain_" + std::to_string(chain.chain_index + 1) + ".json");
    write_chain(path, chain);
    out << path.string() << ": " << chain.samples.size() << " samples\n";
  }
  return 0;
}

// --- paint --------------------------------------------------------------

struct PaintArgs {
  std::string chain, data, granularity = "eu", output_dir;
  int min_members = 5;
  std::uint64_t seed = 1;
};

int cmd_paint(const PaintArgs& a, std::ostream& out, std::ostream& err) {
  const ChainRecord chain = read_chain(a.chain);
  const CountTable table = load_table(a.data, a.granularity, err);
  if (table.fingerprint() != chain.data_fingerprint) {
    throw InputError("chain " + a.chain + " was fitted to different data (fingerprint " +
                     format_fingerprint(chain.data_fingerprint) + ", data has " +
                     format_fingerprint(table.fingerprint()) + ")");
  }
  const int k_min = select_primary_k(chain, a.min_members);
  const int k_mode = modal_k(chain, a.min_members);
  // At least one primary component, so a painting always exists.
  const int k_primary = std::max(1, k_min);
  const ChainRecord relabeled = relabel_chain(aggregate_small_clusters(chain, k_primary));
  const PaintingMatrix p = painting(relabeled, table);

  const fs::path dir = a.output_dir;
  fs::create_directories(dir);
  write_with(dir / "painting.csv", [&](std::ostream& o) { write_painting_csv(o, p); });
  write_text(dir / "painting.svg", render_painting(p, true));
  write_text(dir / "painting_unshaded.svg", render_painting(p, false));
  const auto histogram = k_histogram(chain);
  write_text(dir / "k_histogram.svg", render_k_histogram(histogram));

  const IncidenceMatrix incidence = incidence_matrix(chain);
  std::vector<int> order;
  const int groups = std::min<int>(k_primary, static_cast<int>(incidence.size()));
  const KMedoidsResult km = cluster_incidence(incidence, groups, a.seed);
  for (int g = 0; g < groups; ++g) {
    for (std::size_t i = 0; i < km.assignments.size(); ++i) {
      if (km.assignments[i] == g) order.push_back(static_cast<int>(i));
    }
  }
  write_text(dir / "incidence.svg", render_incidence(incidence, order));

  // Dendrogram of the primary components in the most likely sample.
  const auto& ml = relabeled.samples[max_likelihood_index(relabeled)];
  std::vector<ComponentParams> primary;
  std::vector<std::string> names;
  for (int k = 0; k < std::min<int>(k_primary, ml.num_components()); ++k) {
    if (ml.components[static_cast<std::size_t>(k)].dimension() == 0) continue;
    primary.push_back(ml.components[static_cast<std::size_t>(k)]);
    names.push_back("CP" + std::to_string(k + 1));
  }
  bool has_dendrogram = false;
  if (primary.size() >= 2) {
    write_text(dir / "dendrogram.svg", render_dendrogram(cluster_components(primary), names));
    has_dendrogram = true;
  }

  json summary = {{"chain", a.chain},
                  {"samples", chain.samples.size()},
                  {"min_members", a.min_members},
                  {"k_primary", k_min},
                  {"k_modal", k_mode},
                  {"k_histogram", histogram},
                  {"kmedoids_cost", km.total_cost},
                  {"dendrogram", has_dendrogram}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  out << "primary K " << k_min << " (modal " << k_mode << "), painting " << p.rows() << " x " << p.cols()
      << " written to " << dir.string() << '\n';
  return 0;
}

// --- diagnose -----------------------------------------------------------

struct DiagnoseArgs {
  std::vector<std::string> chains;
  std::string output_dir;
  int min_members = 5;
};

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out) {
  std::vector<ChainRecord> records;
  for (const auto& path : a.chains) records.push_back(read_chain(path));
  const fs::path dir = a.output_dir;
  fs::create_directories(dir);

  json report = {{"chains", json::array()}};
  for (std::size_t c = 0; c < records.size(); ++c) {
    const TraceSeries trace = likelihood_trace(records[c]);
    std::optional<double> ess, z;
    std::string note;
    try {
      ess = effective_sample_size(trace);
      z = geweke_z(trace);
    } catch (const std::exception& e) {
      note = e.what();
    }
    const std::string svg = "trace_" + std::to_string(c + 1) + ".svg";
    write_text(dir / svg, render_trace(trace));
    json entry = {{"file", a.chains[c]},
                  {"samples", trace.size()},
                  {"ess", nullable(ess)},
                  {"geweke_z", nullable(z)},
                  {"modal_k", modal_k(records[c], a.min_members)},
                  {"primary_k", select_primary_k(records[c], a.min_members)},
                  {"trace_svg", svg}};
    if (!note.empty()) entry["note"] = note;
    report["chains"].push_back(entry);
    out << a.chains[c] << ": n=" << trace.size();
    if (ess) out << " ESS=" << *ess << " Geweke Z=" << *z;
    else out << " (" << note << ')';
    out << '\n';
  }
  if (records.size() >= 2) {
    const RunAgreement agreement = compare_runs(records, a.min_members);
    json pairs = json::array();
    for (const auto& p : agreement.pairs) {
      pairs.push_back({{"chain_a", p.chain_a + 1},
                       {"chain_b", p.chain_b + 1},
                       {"mean_abs_incidence_diff", p.mean_abs_incidence_diff},
                       {"modal_k_a", p.modal_k_a},
                       {"modal_k_b", p.modal_k_b},
                       {"modal_k_agree", p.modal_k_agree},
                       {"max_matched_kl", p.max_matched_kl}});
      out << "chains " << p.chain_a + 1 << " vs " << p.chain_b + 1 << ": incidence diff "
          << p.mean_abs_incidence_diff << ", modal K " << p.modal_k_a << '/' << p.modal_k_b << '\n';
    }
    report["agreement"] = pairs;
  }
  write_text(dir / "diagnostics.json", report.dump(2) + "\n");
  return 0;
}

// --- simulate -----------------------------------------------------------

struct SimulateArgs {
  std::string config, output_dir, dataset, truth;
  bool full_grid = false;
  bool plan_only = false;
  std::optional<int> reps;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const KeyValues kv = a.config.empty() ? KeyValues{} : load_key_values(a.config);

  if (!a.dataset.empty()) {
    SimulationConfig sim;
    apply_config(kv, nullptr, &sim);
    try {
      sim.validate();
    } catch (const ContractViolation& e) {
      throw InputError(std::string("invalid simulation configuration: ") + e.what());
    }
    const auto [table, truth] = simulate_dataset(sim);
    write_with(a.dataset, [&](std::ostream& o) { write_counts(o, table_records(table)); });
    if (!a.truth.empty()) {
      write_with(a.truth, [&](std::ostream& o) {
        o << "site,eu,ru,level,cp\n";
        for (std::size_t i = 0; i < table.size(); ++i) {
          const auto& k = table.unit(i).key;
          o << k.site << ',' << k.eu << ',' << k.ru << ',' << k.level << ',' << truth.true_assignments[i] + 1 << '\n';
        }
      });
    }
    out << "simulated " << table.size() << " unit-levels to " << a.dataset << '\n';
    return 0;
  }

  StudySpec spec = parse_study_spec(kv);
  if (a.full_grid) {
    SimulationConfig base;
    KeyValues scalars = kv;
    for (const char* key : {"D", "counts_per_unit", "rho", "f", "reps"}) scalars.erase(key);
    apply_config(scalars, nullptr, &base);
    spec.grid = full_grid(base);
  }
  if (a.reps) spec.reps = *a.reps;
  if (spec.reps < 1) throw InputError("reps must be at least 1");
  if (a.output_dir.empty()) throw InputError("simulate needs --output-dir unless --dataset is given");
  const fs::path dir = a.output_dir;
  fs::create_directories(dir);

  write_with(dir / "study_cells.csv", [&](std::ostream& o) {
    o << "cell,D,counts_per_unit,rho,f,seed\n";
    for (std::size_t c = 0; c < spec.grid.size(); ++c) {
      const auto& g = spec.grid[c];
      o << c << ',' << g.dimension << ',' << g.counts_per_unit << ',' << g.rho << ',' << g.f << ',' << g.seed << '\n';
    }
  });
  if (a.plan_only) {
    out << spec.grid.size() << " cells x " << spec.reps << " replicates planned\n";
    return 0;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  const StudyReport report = run_study(spec.grid, spec.reps, spec.sampler, worker_count(hw ? static_cast<int>(hw) : 1));
  write_with(dir / "study_rows.csv", [&](std::ostream& o) { write_study_rows_csv(o, report); });
  write_with(dir / "study_summary.csv", [&](std::ostream& o) { write_study_summary_csv(o, report); });
  out << report.cells.size() << " cells, " << report.rows.size() << " runs written to " << dir.string() << '\n';
  return 0;
}

// --- render -------------------------------------------------------------

struct RenderArgs {
  std::string kind, data, granularity = "eu", painting, rcd, chain, output;
  bool unshaded = false;
};

PaintingMatrix load_painting(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return parse_painting_csv(in, path);
}

int cmd_render(const RenderArgs& a, std::ostream& out, std::ostream& err) {
  auto need = [&](const std::string& value, const char* flag) {
    if (value.empty()) throw InputError("render " + a.kind + " requires " + flag);
  };
  std::string svg;
  if (a.kind == "raw") {
    need(a.data, "--data");
    const CountTable table = load_table(a.data, a.granularity, err);
    if (table.empty()) throw InputError("render raw: no unit-levels in " + a.data);
    svg = render_raw(table);
  } else if (a.kind == "painting") {
    need(a.painting, "--painting");
    svg = render_painting(load_painting(a.painting), !a.unshaded);
  } else if (a.kind == "rcd") {
    need(a.painting, "--painting");
    need(a.data, "--data");
    const auto rcd = a.rcd.empty() ? std::vector<RcdRow>{} : load_rcd(a.rcd);
    svg = render_rcd_overlay(load_painting(a.painting), load_table(a.data, a.granularity, err), rcd);
  } else if (a.kind == "incidence") {
    need(a.chain, "--chain");
    svg = render_incidence(incidence_matrix(read_chain(a.chain)), {});
  } else if (a.kind == "dendrogram") {
    need(a.chain, "--chain");
    const ChainRecord chain = read_chain(a.chain);
    const auto& ml = chain.samples.at(max_likelihood_index(chain));
    std::vector<ComponentParams> params;
    std::vector<std::string> names;
    for (int k = 0; k < ml.num_components(); ++k) {
      if (ml.components[static_cast<std::size_t>(k)].dimension() == 0) continue;
      params.push_back(ml.components[static_cast<std::size_t>(k)]);
      names.push_back("CP" + std::to_string(k + 1));
    }
    svg = render_dendrogram(cluster_components(params), names);
  }
  write_text(a.output, svg);
  out << "wrote " << a.output << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Infer cultural periods from stratified potsherd counts", "cpaint"};
  app.require_subcommand(1);

  FilterArgs filter;
  auto* sub_filter = app.add_subcommand("filter", "Drop rare decoration types, then small sites");
  sub_filter->add_option("-i,--input", filter.input, "Long-format count CSV")->required()->check(CLI::ExistingFile);
  sub_filter->add_option("-o,--output", filter.output, "Filtered count CSV")->required();
  sub_filter->add_option("--min-type", filter.min_type, "Minimum global total per decoration type")->capture_default_str();
  sub_filter->add_option("--min-site", filter.min_site, "Minimum remaining total per site")->capture_default_str();
  sub_filter->add_option("--report", filter.report, "Write the retention report as JSON");

  FitArgs fit;
  auto* sub_fit = app.add_subcommand("fit", "Run Gibbs chains and store thinned samples");
  sub_fit->add_option("-d,--data", fit.data, "Long-format count CSV")->required()->check(CLI::ExistingFile);
  sub_fit->add_option("-g,--granularity", fit.granularity, "site, eu or ru")->capture_default_str();
  sub_fit->add_option("-c,--config", fit.config, "Sampler key = value file")->check(CLI::ExistingFile);
  sub_fit->add_option("-s,--seed", fit.seed, "Overrides the configured seed");
  sub_fit->add_option("--iterations", fit.iterations, "Overrides the configured iteration count");
  sub_fit->add_option("-n,--chains", fit.chains, "Number of independent chains")->capture_default_str();
  sub_fit->add_option("-o,--output-dir", fit.output_dir, "Directory for chain_<i>.json")->required();

  PaintArgs paint;
  auto* sub_paint = app.add_subcommand("paint", "Relabel a chain and write its culture painting");
  sub_paint->add_option("--chain", paint.chain, "Chain JSON from fit")->required()->check(CLI::ExistingFile);
  sub_paint->add_option("-d,--data", paint.data, "Count CSV the chain was fitted to")->required()->check(CLI::ExistingFile);
  sub_paint->add_option("-g,--granularity", paint.granularity, "site, eu or ru")->capture_default_str();
  sub_paint->add_option("--min-members", paint.min_members, "Size threshold for a primary component")->capture_default_str();
  sub_paint->add_option("--seed", paint.seed, "Seed for k-medoids candidate order")->capture_default_str();
  sub_paint->add_option("-o,--output-dir", paint.output_dir, "Output directory")->required();

  DiagnoseArgs diagnose;
  auto* sub_diag = app.add_subcommand("diagnose", "ESS, Geweke and cross-chain agreement");
  sub_diag->add_option("--chain", diagnose.chains, "Chain JSON (repeatable)")->required()->check(CLI::ExistingFile);
  sub_diag->add_option("--min-members", diagnose.min_members, "Size threshold for counting components")->capture_default_str();
  sub_diag->add_option("-o,--output-dir", diagnose.output_dir, "Output directory")->required();

  SimulateArgs simulate;
  auto* sub_sim = app.add_subcommand("simulate", "Synthetic datasets and simulation studies");
  sub_sim->add_option("-c,--config,--grid", simulate.config, "Simulation/sampler key = value file")->check(CLI::ExistingFile);
  sub_sim->add_flag("--full-grid", simulate.full_grid, "Use the full 180-cell design grid");
  sub_sim->add_flag("--plan-only", simulate.plan_only, "Only write the cell listing");
  sub_sim->add_option("--reps", simulate.reps, "Replicates per cell");
  sub_sim->add_option("--dataset", simulate.dataset, "Write one simulated count CSV instead of a study");
  sub_sim->add_option("--truth", simulate.truth, "With --dataset, also write true CP memberships");
  sub_sim->add_option("-o,--output-dir", simulate.output_dir, "Directory for study CSVs");

  RenderArgs render;
  auto* sub_render = app.add_subcommand("render", "Render tables, paintings and chains to SVG");
  sub_render->add_option("kind", render.kind, "raw, painting, rcd, incidence or dendrogram")
      ->required()
      ->check(CLI::IsMember({"raw", "painting", "rcd", "incidence", "dendrogram"}));
  sub_render->add_option("-d,--data", render.data, "Count CSV")->check(CLI::ExistingFile);
  sub_render->add_option("-g,--granularity", render.granularity, "site, eu or ru")->capture_default_str();
  sub_render->add_option("-p,--painting", render.painting, "Painting CSV")->check(CLI::ExistingFile);
  sub_render->add_option("--rcd", render.rcd, "Radiocarbon CSV")->check(CLI::ExistingFile);
  sub_render->add_option("--chain", render.chain, "Chain JSON")->check(CLI::ExistingFile);
  sub_render->add_flag("--unshaded", render.unshaded, "Disable sample-size shading");
  sub_render->add_option("-o,--output", render.output, "SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*sub_filter) return cmd_filter(filter, out);
    if (*sub_fit) return cmd_fit(fit, out, err);
    if (*sub_paint) return cmd_paint(paint, out, err);
    if (*sub_diag) return cmd_diagnose(diagnose, out);
    if (*sub_sim) return cmd_simulate(simulate, out);
    if (*sub_render) return cmd_render(render, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace cpaint
