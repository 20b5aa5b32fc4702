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

#include "dpfilter/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dpfilter/error.hpp"

namespace dpfilter::io {

namespace {

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorCode::kConfigError, msg);
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double get_double(const json& j, const std::string& context) {
  if (!j.is_number()) config_error(context + ": expected a number");
  return j.get<double>();
}

template <typename T>
T value_or(const json& obj, const char* key, T fallback, const std::string& context) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    config_error(context + "." + key + ": wrong type");
  }
}

std::vector<double> coeffs(const json& j, const std::string& context) {
  if (!j.is_array() || j.empty()) config_error(context + ": expected a nonempty array");
  std::vector<double> out;
  for (const json& v : j) out.push_back(get_double(v, context));
  return out;
}

const std::string& type_of(const json& spec, const std::string& context) {
  if (!spec.is_object() || !spec.contains("type") || !spec.at("type").is_string()) {
    config_error(context + ": needs a string \"type\"");
  }
  return spec.at("type").get_ref<const std::string&>();
}

TransferMatrix aligned_delays(Eigen::Index m) {
  // Pure delays 0..m-1 on one output: events at aligned times add up.
  TransferMatrix g(1, m);
  for (Eigen::Index i = 0; i < m; ++i) g(0, i) = RationalFilter::delay(static_cast<int>(i));
  return g;
}

}  // namespace

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& context) {
  if (!obj.is_object()) config_error(context + ": expected an object");
  for (const auto& item : obj.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                [&](const char* k) { return item.key() == k; });
    if (!ok) config_error(context + ": unknown key \"" + item.key() + "\"");
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path);
}

json read_json(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(path + ": " + e.what());
  }
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

EventStream read_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kIoError, path + ": empty file");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell.erase(std::remove(cell.begin(), cell.end(), '\r'), cell.end());
      out.push_back(cell);
    }
    return out;
  };
  const std::vector<std::string> names = split(line);
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != names.size()) {
      throw Error(ErrorCode::kIoError, path + ":" + std::to_string(lineno) + ": expected " +
                                           std::to_string(names.size()) + " columns");
    }
    std::vector<double> row;
    for (const std::string& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kIoError,
                    path + ":" + std::to_string(lineno) + ": not a number: " + c);
      }
    }
    rows.push_back(std::move(row));
  }
  Mat data(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < names.size(); ++c) {
      data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return EventStream(std::move(data), names);
}

std::string to_csv(const EventStream& stream) {
  std::ostringstream os;
  std::vector<std::string> names = stream.names;
  if (static_cast<Eigen::Index>(names.size()) != stream.channels()) {
    names = EventStream::default_names(stream.channels(), "u");
  }
  for (std::size_t i = 0; i < names.size(); ++i) os << (i ? "," : "") << names[i];
  os << '\n' << std::setprecision(17);
  for (Eigen::Index t = 0; t < stream.steps(); ++t) {
    for (Eigen::Index c = 0; c < stream.channels(); ++c) {
      os << (c ? "," : "") << stream.samples(t, c);
    }
    os << '\n';
  }
  return os.str();
}

json to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(number(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& j, const std::string& context) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    config_error(context + ": expected an array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      config_error(context + ": ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = get_double(row.at(static_cast<std::size_t>(c)), context);
    }
  }
  return m;
}

json to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
  return out;
}

Vec vec_from_json(const json& j, const std::string& context) {
  const std::vector<double> c = coeffs(j, context);
  return Eigen::Map<const Vec>(c.data(), static_cast<Eigen::Index>(c.size()));
}

json to_json(const RationalFilter& f) {
  json out{{"num", f.numerator()}};
  if (!f.is_fir()) out["den"] = f.denominator();
  return out;
}

RationalFilter filter_from_json(const json& j, const std::string& context) {
  if (j.is_number()) return RationalFilter({j.get<double>()});
  require_keys(j, {"num", "den"}, context);
  if (!j.contains("num")) config_error(context + ": missing \"num\"");
  std::vector<double> den{1.0};
  if (j.contains("den")) den = coeffs(j.at("den"), context + ".den");
  if (den.front() == 0.0) config_error(context + ": leading denominator coefficient is 0");
  return RationalFilter(coeffs(j.at("num"), context + ".num"), den);
}

json to_json(const TransferMatrix& tm) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < tm.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < tm.cols(); ++c) row.push_back(to_json(tm(r, c)));
    rows.push_back(std::move(row));
  }
  return json{{"rows", tm.rows()}, {"cols", tm.cols()}, {"entries", rows}};
}

TransferMatrix transfer_matrix_from_json(const json& j, const std::string& context) {
  require_keys(j, {"rows", "cols", "entries"}, context);
  if (!j.contains("entries") || !j.at("entries").is_array() || j.at("entries").empty()) {
    config_error(context + ": missing \"entries\" rows");
  }
  const json& entries = j.at("entries");
  const auto rows = static_cast<Eigen::Index>(entries.size());
  if (!entries.front().is_array()) config_error(context + ".entries: expected rows");
  const auto cols = static_cast<Eigen::Index>(entries.front().size());
  if (j.value("rows", rows) != rows || j.value("cols", cols) != cols) {
    config_error(context + ": declared shape disagrees with entries");
  }
  TransferMatrix tm(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = entries.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      config_error(context + ": ragged entries");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      tm(r, c) = filter_from_json(row.at(static_cast<std::size_t>(c)),
                                  context + ".entries[" + std::to_string(r) + "][" +
                                      std::to_string(c) + "]");
    }
  }
  return tm;
}

json to_json(const MatrixFir& fir) {
  json taps = json::array();
  for (const Mat& t : fir.taps) taps.push_back(to_json(t));
  return json{{"start", fir.start}, {"taps", taps}};
}

MatrixFir fir_from_json(const json& j, const std::string& context) {
  require_keys(j, {"start", "taps"}, context);
  MatrixFir fir;
  fir.start = value_or<int>(j, "start", 0, context);
  if (!j.contains("taps") || !j.at("taps").is_array() || j.at("taps").empty()) {
    config_error(context + ": missing \"taps\"");
  }
  for (const json& t : j.at("taps")) {
    fir.taps.push_back(mat_from_json(t, context + ".taps"));
    if (fir.taps.back().rows() != fir.taps.front().rows() ||
        fir.taps.back().cols() != fir.taps.front().cols()) {
      config_error(context + ": taps differ in shape");
    }
  }
  return fir;
}

json to_json(const PrivacySpec& p) {
  return json{{"epsilon", p.epsilon}, {"delta", p.delta}, {"k", to_json(p.k)}};
}

PrivacySpec privacy_from_json(const json& j) {
  require_keys(j, {"epsilon", "delta", "k"}, "privacy");
  PrivacySpec p;
  if (!j.contains("epsilon") || !j.contains("delta") || !j.contains("k")) {
    config_error("privacy: needs epsilon, delta and k");
  }
  p.epsilon = get_double(j.at("epsilon"), "privacy.epsilon");
  p.delta = get_double(j.at("delta"), "privacy.delta");
  p.k = vec_from_json(j.at("k"), "privacy.k");
  p.validate();
  return p;
}

json to_json(const ForecastModel& m) {
  return json{{"a", to_json(m.a)}, {"b0", to_json(m.b0)}, {"b1", to_json(m.b1)}};
}

ForecastModel forecast_from_json(const json& j) {
  require_keys(j, {"a", "b0", "b1"}, "forecast_model");
  if (!j.contains("a") || !j.contains("b0") || !j.contains("b1")) {
    throw Error(ErrorCode::kMissingForecastModel, "forecast_model needs a, b0 and b1");
  }
  ForecastModel m{vec_from_json(j.at("a"), "forecast_model.a"),
                  vec_from_json(j.at("b0"), "forecast_model.b0"),
                  vec_from_json(j.at("b1"), "forecast_model.b1")};
  if (m.a.size() != 4) config_error("forecast_model.a: needs 4 coefficients");
  if (m.b0.size() != m.b1.size()) config_error("forecast_model: b0 and b1 differ in length");
  return m;
}

json to_json(const SensitivityReport& r) {
  json out{{"lower", r.lower}, {"upper", r.upper}};
  out["exact"] = r.exact ? json(*r.exact) : json(nullptr);
  out["horizon_used"] = r.horizon_used ? json(*r.horizon_used) : json(nullptr);
  const double scale = std::max(r.upper, 1e-300);
  out["equals_lower"] = std::abs(r.upper - r.lower) <= 1e-9 * scale ||
                        (r.exact && std::abs(*r.exact - r.lower) <= 1e-9 * scale);
  out["equals_upper"] = std::abs(r.upper - r.lower) <= 1e-9 * scale ||
                        (r.exact && std::abs(*r.exact - r.upper) <= 1e-9 * scale);
  return out;
}

json to_json(const MechanismDesign& d) {
  json out;
  out["kind"] = to_string(d.kind);
  out["privacy"] = to_json(d.privacy);
  out["sensitivity"] = number(d.sensitivity);
  out["noise_sigma"] = number(d.noise_sigma);
  out["theory_mse"] = d.theory_mse ? number(*d.theory_mse) : json(nullptr);
  out["input_mean"] = to_json(d.input_mean);
  out["domain"] = to_string(d.domain);
  out["lookahead"] = d.lookahead;
  out["target"] = to_json(d.target);
  out["prefilter"] = to_json(d.prefilter);
  if (d.rational_postfilter) {
    out["postfilter"] = json{{"type", "rational"}, {"filter", to_json(*d.rational_postfilter)}};
  } else if (d.fir_postfilter) {
    out["postfilter"] = json{{"type", "fir"}, {"filter", to_json(*d.fir_postfilter)}};
  } else {
    out["postfilter"] = nullptr;
  }
  out["feedback"] = d.feedback ? to_json(*d.feedback) : json(nullptr);
  json diag = json::object();
  for (const auto& [k, v] : d.diagnostics) diag[k] = number(v);
  out["diagnostics"] = diag;
  return out;
}

MechanismDesign design_from_json(const json& j) {
  require_keys(j, {"kind", "privacy", "sensitivity", "noise_sigma", "theory_mse", "input_mean",
                   "domain", "lookahead", "target", "prefilter", "postfilter", "feedback",
                   "diagnostics", "allocation", "provenance", "bounds"},
               "design");
  for (const char* key : {"kind", "privacy", "noise_sigma", "target", "prefilter"}) {
    if (!j.contains(key)) config_error(std::string("design: missing \"") + key + "\"");
  }
  MechanismDesign d;
  d.kind = parse_mechanism_kind(j.at("kind").get<std::string>());
  d.privacy = privacy_from_json(j.at("privacy"));
  d.sensitivity = value_or<double>(j, "sensitivity", 0.0, "design");
  d.noise_sigma = get_double(j.at("noise_sigma"), "design.noise_sigma");
  if (j.contains("theory_mse") && !j.at("theory_mse").is_null()) {
    d.theory_mse = get_double(j.at("theory_mse"), "design.theory_mse");
  }
  if (j.contains("input_mean") && !j.at("input_mean").empty()) {
    d.input_mean = vec_from_json(j.at("input_mean"), "design.input_mean");
  }
  if (j.contains("domain")) d.domain = parse_decision_domain(j.at("domain").get<std::string>());
  d.lookahead = value_or<int>(j, "lookahead", 0, "design");
  d.target = transfer_matrix_from_json(j.at("target"), "design.target");
  d.prefilter = transfer_matrix_from_json(j.at("prefilter"), "design.prefilter");
  if (j.contains("postfilter") && !j.at("postfilter").is_null()) {
    const json& post = j.at("postfilter");
    require_keys(post, {"type", "filter"}, "design.postfilter");
    const std::string& type = type_of(post, "design.postfilter");
    if (!post.contains("filter")) config_error("design.postfilter: missing \"filter\"");
    if (type == "rational") {
      d.rational_postfilter = transfer_matrix_from_json(post.at("filter"), "design.postfilter");
    } else if (type == "fir") {
      d.fir_postfilter = fir_from_json(post.at("filter"), "design.postfilter");
    } else {
      config_error("design.postfilter: unknown type \"" + type + "\"");
    }
  }
  if (j.contains("feedback") && !j.at("feedback").is_null()) {
    d.feedback = fir_from_json(j.at("feedback"), "design.feedback");
  }
  if (j.contains("diagnostics")) {
    for (const auto& item : j.at("diagnostics").items()) {
      if (item.value().is_number()) d.diagnostics[item.key()] = item.value().get<double>();
    }
  }
  if (d.prefilter.cols() != d.target.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "design: prefilter and target inputs differ");
  }
  return d;
}

json to_json(const AllocationProfile& p) {
  return json{{"grid_n", p.n()},      {"lambda", number(p.lambda)},
              {"objective", number(p.objective)}, {"gap", number(p.gap)},
              {"iterations", p.iterations}, {"x", to_json(p.x)}};
}

TransferMatrix filter_from_spec(const json& spec, const std::optional<ForecastModel>& forecast) {
  json obj = spec;
  if (spec.is_string()) obj = json{{"builtin", spec}};
  if (!obj.is_object()) config_error("filter: expected a name or an object");
  if (obj.contains("path")) {
    require_keys(obj, {"path"}, "filter");
    return transfer_matrix_from_json(read_json(obj.at("path").get<std::string>()), "filter");
  }
  if (!obj.contains("builtin")) return transfer_matrix_from_json(obj, "filter");
  const std::string name = obj.at("builtin").get<std::string>();
  if (name == "occupancy_bank") {
    require_keys(obj, {"builtin", "zones"}, "filter");
    return occupancy_filter_bank(forecast, value_or<int>(obj, "zones", 15, "filter"));
  }
  if (name == "markov_demo") {
    require_keys(obj, {"builtin"}, "filter");
    return markov_demo_filter();
  }
  if (name == "aligned_delays") {
    require_keys(obj, {"builtin", "m"}, "filter");
    const int m = value_or<int>(obj, "m", 3, "filter");
    if (m < 1) config_error("filter.m must be positive");
    return aligned_delays(m);
  }
  if (name == "smoothing") {
    require_keys(obj, {"builtin", "m", "a"}, "filter");
    return exponential_smoothing_bank(value_or<int>(obj, "m", 2, "filter"),
                                      value_or<double>(obj, "a", 0.75, "filter"));
  }
  config_error("filter: unknown builtin \"" + name + "\"");
}

MarkovSource markov_from_spec(const json& spec) {
  const std::string& type = type_of(spec, "source");
  if (type == "server") {
    require_keys(spec, {"type", "alpha", "beta"}, "source");
    return server_example(value_or<double>(spec, "alpha", 0.3, "source"),
                          value_or<double>(spec, "beta", 0.6, "source"));
  }
  if (type == "markov") {
    require_keys(spec, {"type", "transition", "selectors"}, "source");
    if (!spec.contains("transition") || !spec.contains("selectors")) {
      config_error("source: markov needs transition and selectors");
    }
    MarkovSource src;
    src.transition = mat_from_json(spec.at("transition"), "source.transition");
    src.selectors = spec.at("selectors").get<std::vector<int>>();
    src.validate();
    return src;
  }
  config_error("source: \"" + type + "\" is not a Markov chain");
}

SpectrumSpec spectrum_from_spec(const json& spec, std::size_t n) {
  const std::string& type = type_of(spec, "spectrum");
  SpectrumSpec out;
  if (type == "server" || type == "markov") {
    const ChainSpectrum cs = chain_spectrum(markov_from_spec(spec), n);
    out.centered = cs.centered;
    out.mean = cs.mean;
    return out;
  }
  if (type == "autocovariance") {
    require_keys(spec, {"type", "lags", "mean"}, "spectrum");
    if (!spec.contains("lags") || !spec.at("lags").is_array() || spec.at("lags").empty()) {
      config_error("spectrum.lags: expected R_0, R_1, ...");
    }
    std::vector<Mat> lags;
    for (const json& l : spec.at("lags")) lags.push_back(mat_from_json(l, "spectrum.lags"));
    const Eigen::Index m = lags.front().rows();
    for (const Mat& r : lags) {
      if (r.rows() != m || r.cols() != m) config_error("spectrum.lags: need square, equal sizes");
    }
    out.centered = SpectrumGrid(n, m, m);
    for (std::size_t q = 0; q <= n; ++q) {
      const double w = out.centered.omega(q);
      CMat val = lags.front().cast<cplx>();
      for (std::size_t k = 1; k < lags.size(); ++k) {
        const cplx e = std::polar(1.0, -w * static_cast<double>(k));
        val += e * lags[k].cast<cplx>() + std::conj(e) * lags[k].transpose().cast<cplx>();
      }
      out.centered[q] = 0.5 * (val + val.adjoint());
    }
  } else if (type == "rational") {
    require_keys(spec, {"type", "filter", "covariance", "mean"}, "spectrum");
    if (!spec.contains("filter")) config_error("spectrum: rational needs \"filter\"");
    const TransferMatrix h = transfer_matrix_from_json(spec.at("filter"), "spectrum.filter");
    Mat cov = Mat::Identity(h.cols(), h.cols());
    if (spec.contains("covariance")) cov = mat_from_json(spec.at("covariance"), "spectrum.covariance");
    if (cov.rows() != h.cols() || cov.cols() != h.cols()) {
      config_error("spectrum.covariance: must match the filter inputs");
    }
    const SpectrumGrid hg = freq_response(h, n);
    out.centered = SpectrumGrid(n, h.rows(), h.rows());
    for (std::size_t q = 0; q <= n; ++q) {
      out.centered[q] = hg[q] * cov.cast<cplx>() * hg[q].adjoint();
    }
  } else if (type == "white") {
    require_keys(spec, {"type", "covariance", "mean"}, "spectrum");
    if (!spec.contains("covariance")) config_error("spectrum: white needs \"covariance\"");
    const Mat cov = mat_from_json(spec.at("covariance"), "spectrum.covariance");
    out.centered = SpectrumGrid(n, cov.rows(), cov.cols());
    for (std::size_t q = 0; q <= n; ++q) out.centered[q] = cov.cast<cplx>();
  } else {
    config_error("spectrum: unknown type \"" + type + "\"");
  }
  out.mean = spec.contains("mean") ? vec_from_json(spec.at("mean"), "spectrum.mean")
                                   : Vec::Zero(out.centered.rows());
  if (out.mean.size() != out.centered.rows()) config_error("spectrum.mean: wrong length");
  return out;
}

SourceFn source_from_spec(const json& spec) {
  const std::string& type = type_of(spec, "source");
  if (type == "server" || type == "markov") {
    const MarkovSource src = markov_from_spec(spec);
    return [src](std::size_t steps, std::uint64_t seed) { return sample_chain(src, steps, seed); };
  }
  if (type == "occupancy") {
    require_keys(spec,
                 {"type", "zones", "rates", "period", "amplitude", "phase", "modulated", "depth",
                  "switch_prob", "dt_label"},
                 "source");
    OccupancySourceConfig cfg;
    const int zones = value_or<int>(spec, "zones", 15, "source");
    cfg.rates = spec.contains("rates") ? vec_from_json(spec.at("rates"), "source.rates")
                                       : Vec::Constant(zones, 1.0);
    cfg.period = value_or<int>(spec, "period", cfg.period, "source");
    cfg.amplitude = value_or<double>(spec, "amplitude", cfg.amplitude, "source");
    cfg.phase = value_or<double>(spec, "phase", cfg.phase, "source");
    cfg.modulated = value_or<bool>(spec, "modulated", cfg.modulated, "source");
    cfg.depth = value_or<double>(spec, "depth", cfg.depth, "source");
    cfg.switch_prob = value_or<double>(spec, "switch_prob", cfg.switch_prob, "source");
    cfg.dt_label = value_or<std::string>(spec, "dt_label", cfg.dt_label, "source");
    synthetic_occupancy_source(cfg, 1, 0);  // validates
    return [cfg](std::size_t steps, std::uint64_t seed) {
      return synthetic_occupancy_source(cfg, steps, seed);
    };
  }
  if (type == "csv") {
    require_keys(spec, {"type", "path"}, "source");
    if (!spec.contains("path")) config_error("source: csv needs \"path\"");
    const EventStream data = read_csv(spec.at("path").get<std::string>());
    return [data](std::size_t steps, std::uint64_t) {
      if (static_cast<Eigen::Index>(steps) > data.steps()) {
        throw Error(ErrorCode::kInsufficientSteps,
                    "the CSV source holds only " + std::to_string(data.steps()) + " steps");
      }
      EventStream out(data.samples.topRows(static_cast<Eigen::Index>(steps)), data.names);
      out.dt_label = data.dt_label;
      return out;
    };
  }
  config_error("source: unknown type \"" + type + "\"");
}

json to_json(const ExperimentReport& r, bool timing) {
  json out;
  out["bounds"] = json{{"zfe_diag_bound", number(r.zfe_diag_bound)},
                       {"nuclear_bound", number(r.nuclear_bound)}};
  json results = json::array();
  for (const MechanismResult& res : r.results) {
    json e{{"mechanism", to_string(res.kind)},
           {"theory_mse", res.theory_mse ? number(*res.theory_mse) : json(nullptr)},
           {"empirical_mse", number(res.empirical_mse)},
           {"stderr", number(res.stderr_mse)},
           {"noise_sigma", number(res.noise_sigma)},
           {"burn_in", res.burn_in}};
    if (timing) {
      e["runtime"] = json{{"design_seconds", res.design_seconds},
                          {"simulate_seconds", res.simulate_seconds}};
    }
    results.push_back(std::move(e));
  }
  out["mechanisms"] = results;
  return out;
}

}  // namespace dpfilter::io
