#pragma once

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lsbeta/config.hpp"
#include "lsbeta/delimited.hpp"
#include "lsbeta/error.hpp"

namespace lsbeta {

// One entry per ModelConfig field: the name used in config files, on the
// command line and in manifests.
struct ConfigField {
  std::string name;
  std::function<std::string(const ModelConfig&)> get;
  std::function<void(ModelConfig&, const std::string&)> set;
};

namespace detail {

inline double to_double(const std::string& name, const std::string& v) {
  double out;
  if (!parse_double(detail::trim(v), out)) throw ConfigError(name + ": expected a number, got '" + v + "'");
  return out;
}

inline long to_long(const std::string& name, const std::string& v) {
  const auto s = detail::trim(v);
  long out = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError(name + ": expected an integer, got '" + v + "'");
  return out;
}

inline bool to_bool(const std::string& name, const std::string& v) {
  const auto s = detail::trim(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(name + ": expected true/false, got '" + v + "'");
}

inline std::string unquote(std::string s) {
  s = std::string(detail::trim(s));
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = s.substr(1, s.size() - 2);
  return s;
}

}  // namespace detail

inline const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = [] {
    std::vector<ConfigField> f;
    auto real = [&f](const char* name, double ModelConfig::*m) {
      f.push_back({name, [m](const ModelConfig& c) { return format_double(c.*m); },
                   [m, name](ModelConfig& c, const std::string& v) { c.*m = detail::to_double(name, v); }});
    };
    auto scale = [&f](const char* name, double ProposalScales::*m) {
      f.push_back({name, [m](const ModelConfig& c) { return format_double(c.scales.*m); },
                   [m, name](ModelConfig& c, const std::string& v) { c.scales.*m = detail::to_double(name, v); }});
    };
    auto integer = [&f](const char* name, long ModelConfig::*m) {
      f.push_back({name, [m](const ModelConfig& c) { return std::to_string(c.*m); },
                   [m, name](ModelConfig& c, const std::string& v) { c.*m = detail::to_long(name, v); }});
    };
    auto flag = [&f](const char* name, bool ModelConfig::*m) {
      f.push_back({name, [m](const ModelConfig& c) { return std::string(c.*m ? "true" : "false"); },
                   [m, name](ModelConfig& c, const std::string& v) { c.*m = detail::to_bool(name, v); }});
    };
    auto text = [&f](const char* name, std::string ModelConfig::*m) {
      f.push_back({name, [m](const ModelConfig& c) { return c.*m; },
                   [m](ModelConfig& c, const std::string& v) { c.*m = detail::unquote(v); }});
    };

    f.push_back({"latent_dim", [](const ModelConfig& c) { return std::to_string(c.latent_dim); },
                 [](ModelConfig& c, const std::string& v) {
                   c.latent_dim = static_cast<int>(detail::to_long("latent_dim", v));
                 }});
    real("a_sigma", &ModelConfig::a_sigma);
    real("b_sigma", &ModelConfig::b_sigma);
    real("mu_gamma", &ModelConfig::mu_gamma);
    real("sigma2_gamma", &ModelConfig::sigma2_gamma);
    f.push_back({"coefficient_prior",
                 [](const ModelConfig& c) {
                   return std::string(c.coefficient_prior == CoefficientPrior::Zellner ? "zellner" : "diffuse");
                 },
                 [](ModelConfig& c, const std::string& v) {
                   const auto s = detail::unquote(v);
                   if (s == "zellner") c.coefficient_prior = CoefficientPrior::Zellner;
                   else if (s == "diffuse") c.coefficient_prior = CoefficientPrior::Diffuse;
                   else throw ConfigError("coefficient_prior: expected zellner or diffuse, got '" + v + "'");
                 }});
    real("g", &ModelConfig::g);
    real("sigma2_B", &ModelConfig::sigma2_B);
    real("a_phi", &ModelConfig::a_phi);
    real("b_phi", &ModelConfig::b_phi);
    integer("iterations", &ModelConfig::iterations);
    integer("burn_in", &ModelConfig::burn_in);
    integer("thin", &ModelConfig::thin);
    scale("scale_a", &ProposalScales::a);
    scale("scale_b", &ProposalScales::b);
    scale("scale_log_gamma", &ProposalScales::log_gamma);
    scale("scale_z", &ProposalScales::z);
    scale("scale_w", &ProposalScales::w);
    scale("scale_beta", &ProposalScales::beta);
    scale("scale_log_phi", &ProposalScales::log_phi);
    flag("adapt", &ModelConfig::adapt);
    real("target_accept_scalar", &ModelConfig::target_accept_scalar);
    real("target_accept_block", &ModelConfig::target_accept_block);
    f.push_back({"seed", [](const ModelConfig& c) { return std::to_string(c.seed); },
                 [](ModelConfig& c, const std::string& v) {
                   const auto s = detail::trim(v);
                   std::uint64_t out = 0;
                   const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
                   if (res.ec != std::errc() || res.ptr != s.data() + s.size())
                     throw ConfigError("seed: expected a non-negative integer, got '" + v + "'");
                   c.seed = out;
                 }});
    f.push_back({"transform", [](const ModelConfig& c) { return to_string(c.transform); },
                 [](ModelConfig& c, const std::string& v) { c.transform = parse_transform(detail::unquote(v)); }});
    real("affinity_epsilon", &ModelConfig::affinity_epsilon);
    flag("clamp_affinity", &ModelConfig::clamp_affinity);
    flag("cut_feedback", &ModelConfig::cut_feedback);
    flag("impute_missing", &ModelConfig::impute_missing);
    flag("beta_likelihood", &ModelConfig::beta_likelihood);
    real("lopsided_lo", &ModelConfig::lopsided_lo);
    real("lopsided_hi", &ModelConfig::lopsided_hi);
    flag("rate_counts_missing", &ModelConfig::rate_counts_missing);
    integer("ppc_draws", &ModelConfig::ppc_draws);
    integer("ppc_replicates", &ModelConfig::ppc_replicates);
    real("cred_level", &ModelConfig::cred_level);
    integer("bic_param_count", &ModelConfig::bic_param_count);
    integer("bic_n_obs", &ModelConfig::bic_n_obs);
    text("party_a", &ModelConfig::party_a);
    text("party_b", &ModelConfig::party_b);
    integer("robustness_burn_in", &ModelConfig::robustness_burn_in);
    integer("robustness_passes", &ModelConfig::robustness_passes);
    flag("robustness_full_refit", &ModelConfig::robustness_full_refit);
    return f;
  }();
  return fields;
}

inline const ConfigField* find_config_field(const std::string& name) {
  for (const auto& f : config_fields())
    if (f.name == name) return &f;
  return nullptr;
}

inline void set_config_value(ModelConfig& cfg, const std::string& key, const std::string& value) {
  const ConfigField* f = find_config_field(key);
  if (!f) throw ConfigError("unknown configuration key '" + key + "'");
  f->set(cfg, value);
}

inline std::string serialize_config(const ModelConfig& cfg) {
  std::ostringstream out;
  for (const auto& f : config_fields()) out << f.name << " = " << f.get(cfg) << '\n';
  return out.str();
}

// `key = value` lines; '#' starts a comment, blank lines and [section]
// headers are ignored.
inline ModelConfig parse_config_text(const std::string& text, ModelConfig base = {}, const std::string& origin = "config") {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto s = std::string(detail::trim(line));
    if (s.empty() || s.front() == '[') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key(detail::trim(std::string_view(s).substr(0, eq)));
    const std::string value(detail::trim(std::string_view(s).substr(eq + 1)));
    try {
      set_config_value(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

inline ModelConfig load_config(const std::string& path, ModelConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), base, path);
}

}  // namespace lsbeta
