// Copyright 2026 The dpfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// dpfilter: design, analyze and simulate private filter mechanisms.

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dpfilter/df.hpp"
#include "dpfilter/error.hpp"
#include "dpfilter/io.hpp"
#include "dpfilter/lms.hpp"
#include "dpfilter/markov.hpp"
#include "dpfilter/sensitivity.hpp"
#include "dpfilter/sim.hpp"
#include "dpfilter/zfe.hpp"

namespace {

using dpfilter::Error;
using dpfilter::ErrorCode;
using dpfilter::io::json;
namespace io = dpfilter::io;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> grid_n;
  std::string out;
  bool verbose = false;
};

// Every knob with its default. Keys outside this object are rejected.
json default_config() {
  return json{{"filter", "markov_demo"},
              {"privacy", nullptr},
              {"forecast_model", nullptr},
              {"mechanism", "zfe"},
              {"mechanisms", json::array()},
              {"spectrum", nullptr},
              {"source", nullptr},
              {"grid_n", 1024},
              {"order", 40},
              {"fit_tol", 1e-3},
              {"max_order", 1024},
              {"floor_rel", 1e-3},
              {"lookahead", 2},
              {"domain", "reals"},
              {"trials", 10},
              {"steps", 20000},
              {"seed", 1},
              {"plot_steps", 480},
              {"exact_output_sensitivity", false},
              {"sensitivity", json{{"method", "auto"}, {"tol", 1e-10}, {"max_horizon", 1000000}}}};
}

class Context {
 public:
  Context(const Globals& g, const json& overrides) : globals_(g) {
    config_ = default_config();
    if (!g.config_path.empty()) {
      const json user = io::read_json(g.config_path);
      if (!user.is_object()) throw Error(ErrorCode::kConfigError, "config: expected an object");
      for (const auto& item : user.items()) {
        if (!config_.contains(item.key())) {
          throw Error(ErrorCode::kConfigError, "config: unknown key \"" + item.key() + "\"");
        }
        if (item.key() == "sensitivity") {
          io::require_keys(item.value(), {"method", "tol", "max_horizon"}, "sensitivity");
          config_["sensitivity"].update(item.value());
        } else {
          config_[item.key()] = item.value();
        }
      }
    }
    for (const auto& item : overrides.items()) config_[item.key()] = item.value();
    if (g.seed) config_["seed"] = *g.seed;
    if (g.grid_n) config_["grid_n"] = *g.grid_n;
  }

  const json& config() const { return config_; }
  bool verbose() const { return globals_.verbose; }

  template <typename T>
  T get(const char* key) const {
    try {
      return config_.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::kConfigError, std::string("config.") + key + ": wrong type");
    }
  }

  json provenance() const {
    return json{{"tool", "dpfilter"},
                {"version", io::kToolVersion},
                {"config_hash", io::fnv1a_hex(config_.dump())},
                {"seed", get<std::uint64_t>("seed")}};
  }

  std::optional<dpfilter::ForecastModel> forecast() const {
    const json& f = config_.at("forecast_model");
    if (f.is_null()) return dpfilter::default_forecast_model();
    if (f.is_string() && f.get<std::string>() == "none") return std::nullopt;
    return io::forecast_from_json(f);
  }

  dpfilter::TransferMatrix filter() const {
    return io::filter_from_spec(config_.at("filter"), forecast());
  }

  dpfilter::PrivacySpec privacy(Eigen::Index inputs) const {
    const json& p = config_.at("privacy");
    if (p.is_null()) throw Error(ErrorCode::kConfigError, "config: missing \"privacy\" block");
    dpfilter::PrivacySpec spec = io::privacy_from_json(p);
    spec.validate(inputs);
    return spec;
  }

  std::optional<io::SpectrumSpec> spectrum() const {
    const json& s = config_.at("spectrum");
    if (s.is_null()) return std::nullopt;
    return io::spectrum_from_spec(s, get<std::size_t>("grid_n"));
  }

  dpfilter::SourceFn source() const {
    const json& s = config_.at("source");
    if (s.is_null()) throw Error(ErrorCode::kConfigError, "config: missing \"source\"");
    return io::source_from_spec(s);
  }

  dpfilter::ZfeOptions zfe_options() const {
    dpfilter::ZfeOptions o;
    o.grid_n = get<std::size_t>("grid_n");
    o.order = get<int>("order");
    o.fit_tol = get<double>("fit_tol");
    o.max_order = get<int>("max_order");
    return o;
  }

  dpfilter::LmsOptions lms_options() const {
    dpfilter::LmsOptions o;
    o.grid_n = get<std::size_t>("grid_n");
    o.order = get<int>("order");
    o.fit_tol = get<double>("fit_tol");
    o.max_order = get<int>("max_order");
    o.floor_rel = get<double>("floor_rel");
    return o;
  }

  void log(const std::string& msg) const {
    if (globals_.verbose) std::cerr << "dpfilter: " << msg << '\n';
  }

  void emit(const json& doc, const std::string& path) const {
    const std::string text = doc.dump(2) + "\n";
    if (path.empty()) {
      std::cout << text;
    } else {
      io::write_text(path, text);
      log("wrote " + path);
    }
  }

 private:
  Globals globals_;
  json config_;
};

json design_document(const Context& ctx, const dpfilter::MechanismDesign& d,
                     const std::optional<dpfilter::AllocationProfile>& profile) {
  json doc = io::to_json(d);
  const std::size_t n = ctx.get<std::size_t>("grid_n");
  const double diag = dpfilter::zfe_mse_diag_bound(d.target, d.privacy, n);
  json bounds{{"zfe_diag_bound", diag},
              {"nuclear_bound", dpfilter::zfe_general_lower_bound(d.target, d.privacy, n)}};
  if (d.theory_mse) bounds["theory_over_diag_bound"] = *d.theory_mse / diag;
  doc["bounds"] = bounds;
  if (profile) doc["allocation"] = io::to_json(*profile);
  doc["provenance"] = ctx.provenance();
  return doc;
}

int cmd_design(const Context& ctx, const std::string& out) {
  const dpfilter::TransferMatrix f = ctx.filter();
  const dpfilter::PrivacySpec privacy = ctx.privacy(f.cols());
  const dpfilter::MechanismKind kind =
      dpfilter::parse_mechanism_kind(ctx.get<std::string>("mechanism"));
  ctx.log("designing " + dpfilter::to_string(kind));
  std::optional<dpfilter::AllocationProfile> profile;
  dpfilter::MechanismDesign d;
  auto need_spectrum = [&] {
    auto s = ctx.spectrum();
    if (!s) {
      throw Error(ErrorCode::kConfigError, dpfilter::to_string(kind) + " needs a \"spectrum\"");
    }
    return *s;
  };
  switch (kind) {
    case dpfilter::MechanismKind::kOutputPerturbation:
      d = dpfilter::output_perturbation(f, privacy, ctx.get<bool>("exact_output_sensitivity"));
      break;
    case dpfilter::MechanismKind::kZeroForcing:
      d = dpfilter::design_zfe(f, privacy, ctx.zfe_options());
      break;
    case dpfilter::MechanismKind::kWienerSmoother:
    case dpfilter::MechanismKind::kWienerCausal: {
      const io::SpectrumSpec s = need_spectrum();
      dpfilter::AllocationProfile p;
      d = dpfilter::assemble_lms(f, s.centered, s.mean, privacy,
                                 kind == dpfilter::MechanismKind::kWienerSmoother
                                     ? dpfilter::LmsMode::kSmoother
                                     : dpfilter::LmsMode::kCausal,
                                 ctx.lms_options(), &p);
      profile = p;
      break;
    }
    case dpfilter::MechanismKind::kDecisionFeedback: {
      const io::SpectrumSpec s = need_spectrum();
      d = dpfilter::assemble_df(f, s.centered, s.mean, privacy,
                                dpfilter::parse_decision_domain(ctx.get<std::string>("domain")),
                                ctx.get<int>("lookahead"), ctx.lms_options());
      break;
    }
  }
  ctx.emit(design_document(ctx, d, profile), out);
  return 0;
}

int cmd_sensitivity(const Context& ctx, const std::string& out) {
  const dpfilter::TransferMatrix g = ctx.filter();
  dpfilter::Vec k = dpfilter::Vec::Ones(g.cols());
  if (!ctx.config().at("privacy").is_null()) k = ctx.privacy(g.cols()).k;
  const json& opts = ctx.config().at("sensitivity");
  const std::string method = opts.value("method", "auto");
  dpfilter::SensitivityReport r = dpfilter::mimo_bounds(g, k);
  std::string used = "bounds";
  if (method == "auto" || method == "exact") {
    if (g.cols() == 1) {
      r.exact = dpfilter::simo_sensitivity(g, k[0]);
      used = "simo";
    } else if (g.is_diagonal()) {
      r.exact = dpfilter::diagonal_sensitivity(g, k);
      used = "diagonal";
    } else {
      const dpfilter::SensitivityReport e = dpfilter::mimo_exact(
          dpfilter::realize_state_space(g), k, opts.value("tol", 1e-10),
          opts.value("max_horizon", 1000000));
      r.exact = e.exact;
      r.horizon_used = e.horizon_used;
      used = "mimo_exact";
    }
  } else if (method != "bounds") {
    throw Error(ErrorCode::kConfigError, "sensitivity.method: use auto, exact or bounds");
  }
  json doc = io::to_json(r);
  doc["method"] = used;
  doc["provenance"] = ctx.provenance();
  ctx.emit(doc, out);
  return 0;
}

void write_plots(const Context& ctx, const std::string& dir, const dpfilter::ExperimentReport& r) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir);
  for (const dpfilter::MechanismResult& res : r.results) {
    const std::string path =
        (std::filesystem::path(dir) / (dpfilter::to_string(res.kind) + ".csv")).string();
    io::write_text(path, dpfilter::plot_csv(res));
    ctx.log("wrote " + path);
  }
}

int cmd_simulate(const Context& ctx, const std::string& design_path,
                 const std::string& source_path, const std::string& report_path,
                 const std::string& plots_dir, bool timing) {
  dpfilter::ExperimentReport report;
  const std::uint64_t seed = ctx.get<std::uint64_t>("seed");
  const auto trials = ctx.get<std::size_t>("trials");
  const auto steps = ctx.get<std::size_t>("steps");
  dpfilter::SourceFn source;
  if (!source_path.empty()) {
    const std::string ext = std::filesystem::path(source_path).extension().string();
    source = ext == ".csv" ? io::source_from_spec(json{{"type", "csv"}, {"path", source_path}})
                           : io::source_from_spec(io::read_json(source_path));
  } else {
    source = ctx.source();
  }

  if (!design_path.empty()) {
    const json doc = io::read_json(design_path);
    const dpfilter::MechanismDesign d = io::design_from_json(doc);
    const std::size_t n = ctx.get<std::size_t>("grid_n");
    report.zfe_diag_bound = dpfilter::zfe_mse_diag_bound(d.target, d.privacy, n);
    report.nuclear_bound = dpfilter::zfe_general_lower_bound(d.target, d.privacy, n);
    dpfilter::MechanismResult res;
    res.kind = d.kind;
    res.theory_mse = d.theory_mse;
    res.noise_sigma = d.noise_sigma;
    ctx.log("simulating " + std::to_string(trials) + " x " + std::to_string(steps));
    const dpfilter::MseEstimate est = dpfilter::empirical_mse(d, source, trials, steps, seed);
    res.empirical_mse = est.mean;
    res.stderr_mse = est.stderr_mean;
    res.burn_in = est.burn_in;
    res.plot = dpfilter::plot_data(d, source, steps, seed, est.burn_in,
                                   ctx.get<std::size_t>("plot_steps"));
    report.results.push_back(std::move(res));
  } else {
    dpfilter::ExperimentSpec spec;
    spec.f = ctx.filter();
    spec.privacy = ctx.privacy(spec.f.cols());
    for (const json& m : ctx.config().at("mechanisms")) {
      spec.mechanisms.push_back(dpfilter::parse_mechanism_kind(m.get<std::string>()));
    }
    if (spec.mechanisms.empty()) {
      spec.mechanisms.push_back(dpfilter::parse_mechanism_kind(ctx.get<std::string>("mechanism")));
    }
    spec.source = source;
    if (auto s = ctx.spectrum()) {
      spec.spectrum = s->centered;
      spec.mean = s->mean;
    }
    spec.trials = trials;
    spec.steps = steps;
    spec.seed = seed;
    spec.plot_steps = ctx.get<std::size_t>("plot_steps");
    spec.zfe = ctx.zfe_options();
    spec.lms = ctx.lms_options();
    spec.domain = dpfilter::parse_decision_domain(ctx.get<std::string>("domain"));
    spec.lookahead = ctx.get<int>("lookahead");
    spec.exact_output_sensitivity = ctx.get<bool>("exact_output_sensitivity");
    ctx.log("comparing " + std::to_string(spec.mechanisms.size()) + " mechanisms");
    report = dpfilter::compare_mechanisms(spec);
  }
  json doc = io::to_json(report, timing);
  doc["trials"] = trials;
  doc["steps"] = steps;
  if (!design_path.empty()) doc["design"] = design_path;
  doc["provenance"] = ctx.provenance();
  ctx.emit(doc, report_path);
  write_plots(ctx, plots_dir, report);
  return 0;
}

int cmd_markov_gen(const Context& ctx, std::optional<double> alpha, std::optional<double> beta,
                   const std::string& out) {
  json spec = ctx.config().at("source");
  if (alpha || beta) {
    spec = json{{"type", "server"}, {"alpha", alpha.value_or(0.3)}, {"beta", beta.value_or(0.6)}};
  }
  if (spec.is_null()) spec = json{{"type", "server"}, {"alpha", 0.3}, {"beta", 0.6}};
  const dpfilter::MarkovSource src = io::markov_from_spec(spec);
  const dpfilter::EventStream s =
      dpfilter::sample_chain(src, ctx.get<std::size_t>("steps"), ctx.get<std::uint64_t>("seed"));
  const std::string text = io::to_csv(s);
  if (out.empty()) {
    std::cout << text;
  } else {
    io::write_text(out, text);
    ctx.log("wrote " + out);
  }
  return 0;
}

int cmd_report(const Context& ctx, const std::vector<std::string>& inputs, const std::string& out) {
  json rows = json::array();
  for (const std::string& path : inputs) {
    const json doc = io::read_json(path);
    const json prov = doc.value("provenance", json::object());
    const std::string hash = prov.value("config_hash", "");
    if (doc.contains("kind")) {
      rows.push_back(json{{"file", path},
                          {"mechanism", doc.at("kind")},
                          {"theory_mse", doc.value("theory_mse", json(nullptr))},
                          {"empirical_mse", nullptr},
                          {"stderr", nullptr},
                          {"noise_sigma", doc.value("noise_sigma", json(nullptr))},
                          {"config_hash", hash}});
    } else if (doc.contains("mechanisms")) {
      for (const json& m : doc.at("mechanisms")) {
        rows.push_back(json{{"file", path},
                            {"mechanism", m.value("mechanism", "")},
                            {"theory_mse", m.value("theory_mse", json(nullptr))},
                            {"empirical_mse", m.value("empirical_mse", json(nullptr))},
                            {"stderr", m.value("stderr", json(nullptr))},
                            {"noise_sigma", m.value("noise_sigma", json(nullptr))},
                            {"config_hash", hash}});
      }
    } else {
      throw Error(ErrorCode::kConfigError, path + ": neither a design nor a simulation report");
    }
  }
  json doc{{"rows", rows}, {"provenance", ctx.provenance()}};
  if (!out.empty()) {
    auto cell = [](const json& v) {
      if (v.is_null()) return std::string("-");
      std::ostringstream os;
      os << std::setprecision(6) << v.get<double>();
      return os.str();
    };
    std::printf("%-22s %-14s %-14s %-12s %s\n", "mechanism", "theory_mse", "empirical_mse",
                "stderr", "file");
    for (const json& r : rows) {
      std::printf("%-22s %-14s %-14s %-12s %s\n", r.at("mechanism").get<std::string>().c_str(),
                  cell(r.at("theory_mse")).c_str(), cell(r.at("empirical_mse")).c_str(),
                  cell(r.at("stderr")).c_str(), r.at("file").get<std::string>().c_str());
    }
  }
  ctx.emit(doc, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design, analyze and simulate differentially private filter mechanisms"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(io::kToolVersion));
  Globals g;
  app.add_option("--config", g.config_path, "JSON configuration file");
  app.add_option("--seed", g.seed, "top-level random seed");
  app.add_option("--grid-n", g.grid_n, "frequency grid size N");
  app.add_option("--out", g.out, "output file (default: stdout)");
  app.add_flag("--verbose", g.verbose, "progress messages on stderr");

  json overrides = json::object();

  auto* design = app.add_subcommand("design", "design a mechanism and write its JSON description");
  std::string mechanism;
  std::string spectrum_path;
  std::string domain;
  std::optional<int> lookahead;
  design->add_option("--mechanism", mechanism,
                     "output_perturbation | zfe | lms_smoother | lms_causal | df");
  design->add_option("--spectrum", spectrum_path, "input spectrum JSON file");
  design->add_option("--domain", domain, "reals | integers | binary (df)");
  design->add_option("--lookahead", lookahead, "df publication delay d");

  auto* sens = app.add_subcommand("sensitivity", "report the l2 sensitivity of the filter");
  std::string method;
  sens->add_option("--method", method, "auto | exact | bounds");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo MSE of a design or a comparison");
  std::string design_path;
  std::string source_path;
  std::string report_path;
  std::string plots_dir;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> steps;
  std::vector<std::string> mechanisms;
  bool timing = false;
  sim->add_option("--design", design_path, "design JSON from the design command");
  sim->add_option("--source", source_path, "input CSV or source description JSON");
  sim->add_option("--trials", trials, "number of independent trials");
  sim->add_option("--steps", steps, "steps per trial");
  sim->add_option("--report", report_path, "report JSON (default: --out or stdout)");
  sim->add_option("--plots", plots_dir, "directory for per-mechanism plot CSVs");
  sim->add_option("--mechanism", mechanisms, "mechanisms to compare (repeatable)");
  sim->add_option("--spectrum", spectrum_path, "input spectrum JSON file");
  sim->add_flag("--timing", timing, "include runtimes (outputs are then not byte-stable)");

  auto* gen = app.add_subcommand("markov-gen", "sample a Markov event stream to CSV");
  std::optional<double> alpha;
  std::optional<double> beta;
  gen->add_option("--alpha", alpha, "server example: idle to s1 probability");
  gen->add_option("--beta", beta, "server example: busy to s2 probability");
  gen->add_option("--steps", steps, "number of steps");

  auto* rep = app.add_subcommand("report", "merge design and simulation outputs into one table");
  std::vector<std::string> inputs;
  rep->add_option("inputs", inputs, "design or simulate JSON files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!mechanism.empty()) overrides["mechanism"] = mechanism;
    if (!domain.empty()) overrides["domain"] = domain;
    if (lookahead) overrides["lookahead"] = *lookahead;
    if (!spectrum_path.empty()) overrides["spectrum"] = io::read_json(spectrum_path);
    if (trials) overrides["trials"] = *trials;
    if (steps) overrides["steps"] = *steps;
    if (!mechanisms.empty()) overrides["mechanisms"] = mechanisms;
    if (!method.empty()) {
      json s = default_config()["sensitivity"];
      s["method"] = method;
      overrides["sensitivity"] = s;
    }
    const Context ctx(g, overrides);
    if (*design) return cmd_design(ctx, g.out);
    if (*sens) return cmd_sensitivity(ctx, g.out);
    if (*sim) {
      return cmd_simulate(ctx, design_path, source_path,
                          report_path.empty() ? g.out : report_path, plots_dir, timing);
    }
    if (*gen) return cmd_markov_gen(ctx, alpha, beta, g.out);
    if (*rep) return cmd_report(ctx, inputs, g.out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return dpfilter::exit_status(e.code());
  } catch (const json::exception& e) {
    std::cerr << "error: cli.ConfigError: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
