// lsbeta: command-line driver for the latent-space + beta-regression model.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "lsbeta/lsbeta.hpp"

namespace fs = std::filesystem;
using namespace lsbeta;

namespace {

constexpr const char* kVersion = "0.1.0";

struct UsageError : Error {
  using Error::Error;
};

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256 failed");
  }
  EVP_MD_CTX_free(ctx);
  std::ostringstream out;
  for (unsigned int k = 0; k < len; ++k) out << std::hex << std::setw(2) << std::setfill('0') << int(md[k]);
  return out.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("--") + what + " is required");
  if (!fs::is_regular_file(path)) throw DataError(std::string(what) + " file not found: '" + path + "'");
}

// Options shared by every subcommand.
struct Common {
  std::string config_path;
  std::string out;
  bool overwrite = false;
  std::map<std::string, std::string> overrides;
  std::string started;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "key = value configuration file");
  sub->add_option("--out", c.out, "output directory")->required();
  sub->add_flag("--overwrite", c.overwrite, "replace existing outputs");
  for (const auto& f : config_fields()) {
    auto* slot = &c.overrides[f.name];
    sub->add_option("--" + f.name, *slot, "model configuration field");
  }
}

ModelConfig resolve_config(const Common& c) {
  ModelConfig cfg;
  if (!c.config_path.empty()) cfg = load_config(c.config_path);
  for (const auto& [key, value] : c.overrides)
    if (!value.empty()) set_config_value(cfg, key, value);
  cfg.validate();
  return cfg;
}

// All outputs of a command pass through here once the work is done.
class Writer {
 public:
  Writer(const Common& c, std::string command) : common_(c), command_(std::move(command)) {}

  void add(const std::string& rel, std::string content) { files_.emplace_back(rel, std::move(content)); }
  void add(const ReportFiles& fs, const std::string& prefix = "") {
    for (const auto& [rel, content] : fs) add(prefix + rel, content);
  }
  void input(const std::string& name, const std::string& path) { inputs_.emplace_back(name, path); }
  void note(const std::string& key, const std::string& value) { notes_.emplace_back(key, value); }

  void check_clobber() const {
    const fs::path out(common_.out);
    if (fs::exists(out) && !fs::is_directory(out)) throw DataError("'" + out.string() + "' exists and is not a directory");
    if (!common_.overwrite && fs::exists(out) && !fs::is_empty(out))
      throw DataError("output directory '" + out.string() + "' is not empty (pass --overwrite to replace)");
  }

  void commit(const ModelConfig& cfg) {
    check_clobber();
    const fs::path out(common_.out);
    std::ostringstream m;
    m << "version = " << kVersion << '\n'
      << "command = " << command_ << '\n'
      << "started = " << common_.started << '\n'
      << "finished = " << utc_now() << '\n'
      << "seed = " << cfg.seed << '\n';
    auto inputs = inputs_;
    if (!common_.config_path.empty()) inputs.emplace_back("config", common_.config_path);
    for (const auto& [name, path] : inputs)
      m << "input." << name << " = " << fs::absolute(path).string() << '\n'
        << "input." << name << ".sha256 = " << sha256_hex(slurp(path)) << '\n';
    for (const auto& [k, v] : notes_) m << k << " = " << v << '\n';
    std::istringstream cfg_lines(serialize_config(cfg));
    for (std::string line; std::getline(cfg_lines, line);) m << "config." << line << '\n';
    for (const auto& [rel, content] : files_) m << "output." << rel << ".sha256 = " << sha256_hex(content) << '\n';
    files_.emplace_back("manifest.txt", m.str());

    for (const auto& [rel, content] : files_) {
      const fs::path p = out / rel;
      fs::create_directories(p.parent_path());
      write_text_file(p.string(), content);
    }
    for (const auto& [rel, content] : files_)
      if (slurp(out / rel) != content) throw Error("verification failed for '" + (out / rel).string() + "'");
  }

 private:
  const Common& common_;
  std::string command_;
  ReportFiles files_;
  std::vector<std::pair<std::string, std::string>> inputs_, notes_;
};

std::vector<int> parse_dims(const std::string& text) {
  if (text.empty()) throw UsageError("--dims is required");
  std::vector<int> dims;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    const auto dash = tok.find('-', 1);
    auto number = [&](const std::string& s) {
      const auto t = std::string(detail::trim(s));
      int v = 0;
      const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
      if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size() || v < 1)
        throw UsageError("malformed --dims '" + text + "': expected positive integers like 1,2,3 or 1-3");
      return v;
    };
    if (dash == std::string::npos) {
      dims.push_back(number(tok));
    } else {
      const int lo = number(tok.substr(0, dash)), hi = number(tok.substr(dash + 1));
      if (lo > hi) throw UsageError("malformed --dims '" + text + "': empty range");
      for (int s = lo; s <= hi; ++s) dims.push_back(s);
    }
  }
  std::sort(dims.begin(), dims.end());
  dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
  return dims;
}

std::vector<AffinityTransform> parse_transforms(const std::string& text) {
  std::vector<AffinityTransform> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    const auto t = std::string(detail::trim(tok));
    if (!t.empty()) out.push_back(parse_transform(t));
  }
  return out;
}

// Runs fn(k) for k in [0, n) on up to hardware_concurrency threads.
template <typename Fn>
auto parallel_map(std::size_t n, Fn fn) {
  using R = decltype(fn(std::size_t{0}));
  std::vector<std::optional<R>> results(n);
  std::vector<std::exception_ptr> errors(n);
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t k; (k = next++) < n;) {
        try {
          results[k].emplace(fn(k));
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  std::vector<R> out;
  for (std::size_t k = 0; k < n; ++k) {
    if (errors[k]) std::rethrow_exception(errors[k]);
    out.push_back(std::move(*results[k]));
  }
  return out;
}

// Inputs recorded by `fit` let later commands find the data again.
std::string from_manifest(const std::string& chain_dir, const std::string& key) {
  const fs::path p = fs::path(chain_dir) / "manifest.txt";
  if (!fs::exists(p)) return {};
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    if (std::string(detail::trim(std::string_view(line).substr(0, eq))) == key)
      return std::string(detail::trim(std::string_view(line).substr(eq + 1)));
  }
  return {};
}

struct ChainData {
  ChainOutput chain;
  VoteMatrix votes;
  CovariateMatrix covariates;
};

ChainData load_chain_with_data(const std::string& chain_dir, std::string votes_path, std::string cov_path,
                               bool need_votes, bool need_covariates, Writer& w) {
  ChainData d;
  d.chain = read_chain(chain_dir);
  if (d.chain.empty()) throw DataError("no draws in '" + chain_dir + "'");
  if (votes_path.empty()) votes_path = from_manifest(chain_dir, "input.votes");
  if (cov_path.empty()) cov_path = from_manifest(chain_dir, "input.covariates");
  if (need_votes) {
    require_file(votes_path, "votes");
    w.input("votes", votes_path);
    d.votes = select_bills_by_id(load_votes(votes_path), d.chain.bill_ids);
    if (d.votes.legislator_ids() != d.chain.legislator_ids)
      throw DataError("legislators in '" + votes_path + "' do not match the chain");
  }
  if (need_covariates) {
    require_file(cov_path, "covariates");
    w.input("covariates", cov_path);
    const auto cov = load_covariates(cov_path);
    VoteMatrix shape(d.chain.legislator_ids, d.chain.bill_ids,
                     std::vector<Vote>(d.chain.legislator_ids.size() * d.chain.bill_ids.size(), Vote::Yea));
    d.covariates = validate_covariates(cov, shape);
    if (d.covariates.column_names() != d.chain.covariate_names)
      throw DataError("covariates in '" + cov_path + "' do not match the chain");
  }
  return d;
}

std::string summary_text(const std::string& title, const std::vector<std::pair<std::string, std::string>>& rows) {
  std::ostringstream out;
  out << title << '\n';
  for (const auto& [k, v] : rows) out << "  " << std::left << std::setw(44) << k << v << '\n';
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-space roll-call model with an issue-specific beta-regression layer"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;
  std::string votes_path, cov_path, parties_path, chain_dir, dims_text, transforms_text;
  double sim_gamma = -1.0, sim_missing = -1.0;

  auto* sim = app.add_subcommand("simulate", "generate a synthetic data bundle with its truth record");
  auto* fit = app.add_subcommand("fit", "run the one-stage sampler");
  auto* sel = app.add_subcommand("select-dim", "fit a range of latent dimensions and tabulate criteria");
  auto* summ = app.add_subcommand("summarize", "align a stored chain and summarize issue coefficients");
  auto* ppc = app.add_subcommand("ppc", "posterior predictive checks for both model layers");
  auto* rob = app.add_subcommand("robustness", "coefficient concordance across affinity transforms");
  for (auto* s : {sim, fit, sel, summ, ppc, rob}) add_common(s, common);
  sim->add_option("--gamma", sim_gamma, "true distance weight");
  sim->add_option("--missing_rate", sim_missing, "fraction of cells masked as missing");
  for (auto* s : {fit, sel, ppc, rob}) {
    s->add_option("--votes", votes_path, "vote matrix file");
    s->add_option("--covariates", cov_path, "bill covariate file");
  }
  for (auto* s : {fit, summ, rob}) s->add_option("--parties", parties_path, "legislator party file");
  for (auto* s : {summ, ppc, rob}) s->add_option("--chain", chain_dir, "directory written by fit")->required();
  sel->add_option("--dims", dims_text, "latent dimensions, e.g. 1,2,3 or 1-6")->required();
  rob->add_option("--transforms", transforms_text, "comma-separated affinity transforms")
      ->default_val("exp_neg_d,exp_neg_d_squared,inverse_one_plus_d");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  common.started = utc_now();
  try {
    const ModelConfig cfg = resolve_config(common);

    if (sim->parsed()) {
      Writer w(common, "simulate");
      w.check_clobber();
      SyntheticSpec spec = SyntheticSpec::desk_default(cfg.seed);
      spec.transform = cfg.transform;
      if (sim_gamma >= 0.0) spec.gamma = sim_gamma;
      if (sim_missing >= 0.0) spec.missing_rate = sim_missing;
      const SyntheticData data = generate(spec);
      w.add(synthetic_files(data));
      w.commit(cfg);
      std::cout << "wrote synthetic bundle (" << data.votes.n_legislators() << " legislators, " << data.votes.n_bills()
                << " bills) to " << common.out << '\n';
      return 0;
    }

    if (fit->parsed()) {
      Writer w(common, "fit");
      w.check_clobber();
      require_file(votes_path, "votes");
      require_file(cov_path, "covariates");
      w.input("votes", votes_path);
      w.input("covariates", cov_path);
      const PreparedData data = prepare_data(votes_path, cov_path, cfg);
      if (!parties_path.empty()) {
        require_file(parties_path, "parties");
        load_parties(parties_path).require_covers(data.votes.legislator_ids());
        w.input("parties", parties_path);
      }
      const ChainOutput chain = run(data.votes, data.covariates, cfg);
      for (const auto& [name, content] : serialize_chain(chain)) w.add(name, content);
      std::ostringstream removed;
      removed << "bill\n";
      for (const auto& id : data.removed_bills) removed << id << '\n';
      w.add("removed_bills.csv", removed.str());
      w.note("draws", std::to_string(chain.size()));
      w.note("nonfinite_rejections", std::to_string(chain.nonfinite_rejections));
      for (std::size_t k = 0; k < kNumBlocks; ++k)
        w.note(std::string("acceptance.") + kBlockNames[k], format_double(chain.acceptance_rates[k]));
      w.commit(cfg);
      std::cout << "stored " << chain.size() << " draws in " << common.out << '\n';
      return 0;
    }

    if (sel->parsed()) {
      Writer w(common, "select-dim");
      const auto dims = parse_dims(dims_text);
      w.check_clobber();
      require_file(votes_path, "votes");
      require_file(cov_path, "covariates");
      w.input("votes", votes_path);
      w.input("covariates", cov_path);
      const PreparedData data = prepare_data(votes_path, cov_path, cfg);
      const CriteriaReport report = parallel_map(dims.size(), [&](std::size_t k) {
        ModelConfig c = cfg;
        c.latent_dim = dims[k];
        return information_criteria(run(data.votes, data.covariates, c), data.votes, c);
      });
      w.add(criteria_files(report));
      w.note("dims", dims_text);
      w.commit(cfg);
      for (const auto& r : report) std::cout << "S=" << r.latent_dim << "  WAIC=" << r.waic << "  DIC=" << r.dic << "  BIC=" << r.bic << '\n';
      return 0;
    }

    if (summ->parsed()) {
      Writer w(common, "summarize");
      w.check_clobber();
      if (parties_path.empty()) parties_path = from_manifest(chain_dir, "input.parties");
      require_file(parties_path, "parties");
      w.input("parties", parties_path);
      const ChainOutput chain = read_chain(chain_dir);
      if (chain.empty()) throw DataError("no draws in '" + chain_dir + "'");
      const PartyRoster roster = load_parties(parties_path);
      const AlignedChain aligned = procrustes_align(chain);
      const IssueSummary s = coefficient_summaries(aligned, roster, cfg);
      w.add(summary_files(s));
      std::vector<std::pair<std::string, std::string>> rows{
          {"draws", std::to_string(chain.size())},
          {"reference draw", std::to_string(aligned.reference_index)},
          {"degenerate alignments", std::to_string(aligned.degenerate_draws)},
          {"polarization pair", s.party_a + " vs " + s.party_b}};
      for (std::size_t k = 0; k < s.covariate_names.size(); ++k)
        rows.emplace_back("difference " + s.covariate_names[k], format_double(s.mean_difference(k)));
      w.add("summary.txt", summary_text("coefficient summary", rows));
      w.commit(cfg);
      std::cout << summary_text("coefficient summary", rows);
      return 0;
    }

    if (ppc->parsed()) {
      Writer w(common, "ppc");
      w.check_clobber();
      const ChainData d = load_chain_with_data(chain_dir, votes_path, cov_path, true, true, w);
      const auto n_draws = static_cast<std::size_t>(cfg.ppc_draws);
      const auto n_rep = static_cast<std::size_t>(cfg.ppc_replicates);
      const LsirmPpc lp = ppc_lsirm(d.chain, d.votes, n_rep, n_draws, cfg.seed, cfg.cred_level);
      ModelConfig c = cfg;
      c.transform = d.chain.transform;
      const BetaPpc bp = ppc_beta(d.chain, d.covariates, c, n_rep, n_draws, cfg.seed, cfg.cred_level);
      for (double v : {lp.bill_coverage, lp.legislator_coverage, bp.coverage})
        if (!(v >= 0.0 && v <= 1.0)) throw Error("coverage outside [0,1]");
      w.add(lsirm_ppc_files(lp, d.votes));
      w.add(beta_ppc_files(bp, d.chain.legislator_ids));
      const std::vector<std::pair<std::string, std::string>> rows{
          {"bill coverage", format_double(lp.bill_coverage)},
          {"legislator coverage", format_double(lp.legislator_coverage)},
          {"beta coverage", format_double(bp.coverage)},
          {"beta PPP median", format_double(bp.ppp_median)},
          {"beta PPP mean", format_double(bp.ppp_mean)},
          {"beta PPP < 0.05", format_double(bp.ppp_below_005)},
          {"global PPP", format_double(bp.global_ppp)}};
      w.add("ppc_report.txt", summary_text("posterior predictive checks", rows));
      w.commit(cfg);
      std::cout << summary_text("posterior predictive checks", rows);
      return 0;
    }

    if (rob->parsed()) {
      Writer w(common, "robustness");
      const auto transforms = parse_transforms(transforms_text);
      if (transforms.size() < 2) throw ConfigError("need >= 2 transforms");
      w.check_clobber();
      const ChainData d = load_chain_with_data(chain_dir, votes_path, cov_path, cfg.robustness_full_refit, true, w);
      std::optional<PartyRoster> roster;
      if (parties_path.empty()) parties_path = from_manifest(chain_dir, "input.parties");
      if (!parties_path.empty()) {
        require_file(parties_path, "parties");
        w.input("parties", parties_path);
        roster = load_parties(parties_path);
      }
      const RobustnessReport r = affinity_robustness(d.chain, d.covariates, cfg, transforms, roster ? &*roster : nullptr,
                                                     cfg.robustness_full_refit ? &d.votes : nullptr);
      w.add(robustness_files(r, d.chain.legislator_ids));
      std::vector<std::pair<std::string, std::string>> rows;
      for (const auto& p : r.pairs)
        for (std::size_t k = 0; k < r.covariate_names.size(); ++k)
          rows.emplace_back(to_string(r.transforms[p.first]) + "~" + to_string(r.transforms[p.second]) + " " +
                                r.covariate_names[k],
                            format_double(p.correlation(k)));
      w.add("robustness_report.txt", summary_text("coefficient correlations across transforms", rows));
      w.commit(cfg);
      std::cout << summary_text("coefficient correlations across transforms", rows);
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
