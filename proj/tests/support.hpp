#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cpaint/postprocess.hpp"

namespace testing {

using Rational = boost::multiprecision::cpp_rational;

// Rows become unit-levels S1/1/level i; labels are T1..TD.
inline cpaint::CountTable make_table(const std::vector<std::vector<int>>& rows, const std::string& site = "S1") {
  std::vector<cpaint::UnitLevel> units;
  const std::size_t d = rows.empty() ? 0 : rows.front().size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    cpaint::UnitLevel u;
    u.key = {site, "1", "", static_cast<int>(i)};
    u.counts = Eigen::Map<const Eigen::VectorXi>(rows[i].data(), static_cast<Eigen::Index>(rows[i].size()));
    units.push_back(u);
  }
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < d; ++k) labels.push_back("T" + std::to_string(k + 1));
  return cpaint::CountTable(labels, units);
}

// Γ(Ā)/Γ(N+Ā) · Π Γ(n_d+α_d)/Γ(α_d) as an exact ratio of rising factorials.
inline Rational exact_dm_likelihood(const std::vector<int>& counts, const std::vector<Rational>& alpha) {
  Rational num = 1, den = 1, alpha_bar = 0;
  int total = 0;
  for (std::size_t d = 0; d < counts.size(); ++d) {
    for (int j = 0; j < counts[d]; ++j) num *= alpha[d] + j;
    alpha_bar += alpha[d];
    total += counts[d];
  }
  for (int j = 0; j < total; ++j) den *= alpha_bar + j;
  return num / den;
}

inline cpaint::ComponentParams params(std::initializer_list<double> alpha) {
  Eigen::VectorXd a(static_cast<Eigen::Index>(alpha.size()));
  Eigen::Index i = 0;
  for (double v : alpha) a[i++] = v;
  return cpaint::ComponentParams(a);
}

// A chain whose samples carry the given 0-based assignments; component k of
// each sample gets `component_alpha[k]`.
inline cpaint::ChainRecord make_chain(const std::vector<std::vector<int>>& assignments,
                                      const std::vector<cpaint::ComponentParams>& components,
                                      const std::vector<double>& log_likelihoods = {}) {
  cpaint::ChainRecord chain;
  for (std::size_t s = 0; s < assignments.size(); ++s) {
    cpaint::ChainSample sample;
    sample.iteration = static_cast<long>(s + 1);
    sample.assignments = assignments[s];
    const int k = *std::max_element(assignments[s].begin(), assignments[s].end()) + 1;
    for (int c = 0; c < k; ++c) sample.components.push_back(components[static_cast<std::size_t>(c) % components.size()]);
    sample.log_likelihood = s < log_likelihoods.size() ? log_likelihoods[s] : -static_cast<double>(s);
    chain.samples.push_back(sample);
  }
  return chain;
}

// Applies label permutation perm (old -> new) to one sample.
inline cpaint::ChainSample permute_sample(const cpaint::ChainSample& s, const std::vector<int>& perm) {
  cpaint::ChainSample out = s;
  out.components.assign(s.components.size(), cpaint::ComponentParams());
  for (std::size_t i = 0; i < s.assignments.size(); ++i) out.assignments[i] = perm[static_cast<std::size_t>(s.assignments[i])];
  for (std::size_t k = 0; k < s.components.size(); ++k) out.components[static_cast<std::size_t>(perm[k])] = s.components[k];
  return out;
}

// Minimal XML well-formedness check plus id bookkeeping, enough to catch
// unbalanced tags, bad attributes, stray ampersands and dangling references.
struct XmlCheck {
  bool ok = true;
  std::string error;
  std::set<std::string> ids;
  std::set<std::string> references;
  std::size_t elements = 0;

  bool references_resolved() const {
    for (const auto& r : references) {
      if (!ids.count(r)) return false;
    }
    return true;
  }
};

inline XmlCheck check_xml(const std::string& doc) {
  XmlCheck result;
  auto fail = [&](const std::string& why, std::size_t at) {
    result.ok = false;
    result.error = why + " at offset " + std::to_string(at);
    return result;
  };
  auto check_text = [&](std::string_view text, std::size_t at) {
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == '<') return false;
      if (text[i] == '&') {
        const auto semi = text.find(';', i);
        if (semi == std::string_view::npos) return false;
        const auto entity = text.substr(i, semi - i + 1);
        if (entity != "&amp;" && entity != "&lt;" && entity != "&gt;" && entity != "&quot;" && entity != "&apos;") {
          return false;
        }
      }
    }
    (void)at;
    return true;
  };

  std::size_t pos = 0;
  if (doc.rfind("<?xml", 0) == 0) {
    pos = doc.find("?>");
    if (pos == std::string::npos) return fail("unterminated declaration", 0);
    pos += 2;
  }
  std::vector<std::string> stack;
  bool seen_root = false;
  static const std::regex url_ref(R"(url\(#([^)]+)\))");
  while (pos < doc.size()) {
    const auto lt = doc.find('<', pos);
    const std::string_view text(doc.data() + pos, (lt == std::string::npos ? doc.size() : lt) - pos);
    if (!check_text(text, pos)) return fail("bad character data", pos);
    if (stack.empty() && text.find_first_not_of(" \t\r\n") != std::string_view::npos) return fail("text outside root", pos);
    if (lt == std::string::npos) break;
    const auto gt = doc.find('>', lt);
    if (gt == std::string::npos) return fail("unterminated tag", lt);
    std::string tag = doc.substr(lt + 1, gt - lt - 1);
    pos = gt + 1;
    if (tag.rfind("!--", 0) == 0) continue;
    if (!tag.empty() && tag[0] == '/') {
      const std::string name = tag.substr(1);
      if (stack.empty() || stack.back() != name) return fail("mismatched </" + name + ">", lt);
      stack.pop_back();
      continue;
    }
    const bool self_closing = !tag.empty() && tag.back() == '/';
    if (self_closing) tag.pop_back();
    std::size_t i = 0;
    while (i < tag.size() && !std::isspace(static_cast<unsigned char>(tag[i]))) ++i;
    const std::string name = tag.substr(0, i);
    if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])))) return fail("bad element name", lt);
    if (stack.empty() && seen_root) return fail("second root element", lt);
    seen_root = true;
    ++result.elements;
    std::set<std::string> attrs;
    while (true) {
      while (i < tag.size() && std::isspace(static_cast<unsigned char>(tag[i]))) ++i;
      if (i >= tag.size()) break;
      const auto eq = tag.find('=', i);
      if (eq == std::string::npos) return fail("attribute without value", lt);
      const std::string attr = tag.substr(i, eq - i);
      if (attr.empty() || attr.find_first_of(" \t\"") != std::string::npos) return fail("bad attribute name", lt);
      if (!attrs.insert(attr).second) return fail("duplicate attribute " + attr, lt);
      if (eq + 1 >= tag.size() || tag[eq + 1] != '"') return fail("unquoted attribute", lt);
      const auto close = tag.find('"', eq + 2);
      if (close == std::string::npos) return fail("unterminated attribute", lt);
      const std::string value = tag.substr(eq + 2, close - eq - 2);
      if (!check_text(value, lt)) return fail("bad attribute value", lt);
      if (attr == "id" && !result.ids.insert(value).second) return fail("duplicate id " + value, lt);
      if ((attr == "href" || attr == "xlink:href") && !value.empty() && value[0] == '#') {
        result.references.insert(value.substr(1));
      }
      for (std::sregex_iterator it(value.begin(), value.end(), url_ref), end; it != end; ++it) {
        result.references.insert((*it)[1]);
      }
      i = close + 1;
    }
    if (!self_closing) stack.push_back(name);
  }
  if (!stack.empty()) return fail("unclosed <" + stack.back() + ">", doc.size());
  if (!seen_root) return fail("no root element", 0);
  return result;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cpaint_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
