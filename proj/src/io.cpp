#include "campus/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "campus/errors.hpp"

#ifndef CAMPUS_VERSION
#define CAMPUS_VERSION "0.0.0"
#endif

namespace campus {

using nlohmann::json;

std::string version_string() { return CAMPUS_VERSION; }

namespace {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

Count parse_count(const std::string& raw, std::size_t line, const char* what) {
  const std::string text = trim(raw);
  Count value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    throw ParseError(std::string(what) + " is not an integer: '" + text + "'", line);
  return value;
}

double parse_real(const std::string& raw, std::size_t line, const char* what) {
  const std::string text = trim(raw);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    throw ParseError(std::string(what) + " is not a number: '" + text + "'", line);
  return value;
}

// Reads all non-blank lines; the first must match `header`.
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_table(
    std::istream& in, const std::vector<std::string>& header, bool header_prefix = false) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::string line;
  std::size_t number = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty()) continue;
    auto cells = split_row(line);
    for (auto& c : cells) c = trim(c);
    if (!seen_header) {
      const bool ok = header_prefix
                          ? cells.size() >= header.size() &&
                                std::equal(header.begin(), header.end(), cells.begin())
                          : cells == header;
      if (!ok) throw ParseError("unexpected header", number);
      seen_header = true;
      rows.emplace_back(number, std::move(cells));
      continue;
    }
    rows.emplace_back(number, std::move(cells));
  }
  if (!seen_header) throw ParseError("empty file", 0);
  return rows;
}

void expect_width(const std::vector<std::string>& cells, std::size_t width, std::size_t line) {
  if (cells.size() != width)
    throw ParseError("expected " + std::to_string(width) + " columns, found " +
                         std::to_string(cells.size()),
                     line);
}

}  // namespace

// ---------------------------------------------------------------- observed

ObservedSeries parse_observed_csv(std::istream& in) {
  ObservedSeries series;
  std::string line;
  std::size_t number = 0;
  bool any = false;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty()) continue;
    auto cells = split_row(line);
    if (!any && cells.size() == 2 && trim(cells[0]) == "week" && trim(cells[1]) == "cases") {
      any = true;
      continue;
    }
    any = true;
    expect_width(cells, 2, number);
    const Count week = parse_count(cells[0], number, "week");
    const Count cases = parse_count(cells[1], number, "case count");
    const auto expected = static_cast<Count>(series.cases.size()) + 1;
    if (week > expected) throw ParseError("gap in series: missing week " + std::to_string(expected), number);
    if (week < expected)
      throw ParseError("week " + std::to_string(week) + " is duplicated or out of order", number);
    if (cases < 0) throw ParseError("negative case count in week " + std::to_string(week), number);
    series.cases.push_back(cases);
  }
  if (series.cases.empty()) throw ParseError("observed series is empty", 0);
  return series;
}

ObservedSeries parse_observed_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return parse_observed_csv(in);
}

void write_observed_csv(std::ostream& out, const WeeklySeries& series) {
  out << "week,cases\n";
  for (std::size_t w = 0; w < series.size(); ++w) out << (w + 1) << ',' << series[w] << '\n';
}

// -------------------------------------------------------------- trajectory

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "day";
  for (const auto& f : kCompartmentFields) out << ',' << f.name;
  for (const auto& f : kFlowFields) out << ',' << f.name;
  out << '\n';
  const DailyFlows none;
  for (std::size_t d = 0; d < trajectory.states.size(); ++d) {
    out << d;
    for (const auto& f : kCompartmentFields) out << ',' << trajectory.states[d].*f.member;
    const DailyFlows& flows = d == 0 ? none : trajectory.flows[d - 1];
    for (const auto& f : kFlowFields) out << ',' << flows.*f.member;
    out << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::vector<std::string> header{"day"};
  for (const auto& f : kCompartmentFields) header.emplace_back(f.name);
  for (const auto& f : kFlowFields) header.emplace_back(f.name);
  const auto rows = read_table(in, header);

  Trajectory traj;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& [line, cells] = rows[r];
    expect_width(cells, header.size(), line);
    if (parse_count(cells[0], line, "day") != static_cast<Count>(r - 1))
      throw ParseError("days must run 0, 1, 2, ...", line);
    CompartmentState state;
    std::size_t c = 1;
    for (const auto& f : kCompartmentFields) state.*f.member = parse_count(cells[c++], line, "count");
    DailyFlows flows;
    for (const auto& f : kFlowFields) flows.*f.member = parse_count(cells[c++], line, "flow");
    traj.states.push_back(state);
    if (r > 1) traj.flows.push_back(flows);
  }
  if (traj.states.empty()) throw ParseError("trajectory has no rows", 0);
  // The ledger is not exported; recover what the flows determine.
  return traj;
}

// --------------------------------------------------------------- posterior

void write_posterior_draws_csv(std::ostream& out, const PosteriorSample& posterior) {
  out << "alpha,beta,i_out\n";
  for (std::size_t i = 0; i < posterior.points.size(); ++i) {
    const auto& p = posterior.points[i];
    const std::string row = format_double(p.alpha) + ',' + format_double(p.beta) + ',' +
                            std::to_string(p.i_out) + '\n';
    for (Count k = 0; k < posterior.counts[i].accepted; ++k) out << row;
  }
}

std::vector<GridPoint> read_posterior_draws_csv(std::istream& in) {
  const auto rows = read_table(in, {"alpha", "beta", "i_out"});
  std::vector<GridPoint> draws;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& [line, cells] = rows[r];
    expect_width(cells, 3, line);
    draws.push_back({parse_real(cells[0], line, "alpha"), parse_real(cells[1], line, "beta"),
                     parse_count(cells[2], line, "i_out")});
  }
  return draws;
}

void write_acceptance_surface_csv(std::ostream& out, const PosteriorSample& posterior) {
  out << "alpha,beta,i_out,accepted,attempted\n";
  for (std::size_t i = 0; i < posterior.points.size(); ++i) {
    const auto& p = posterior.points[i];
    out << format_double(p.alpha) << ',' << format_double(p.beta) << ',' << p.i_out << ','
        << posterior.counts[i].accepted << ',' << posterior.counts[i].attempted << '\n';
  }
}

PosteriorSample read_acceptance_surface_csv(std::istream& in) {
  const auto rows = read_table(in, {"alpha", "beta", "i_out", "accepted", "attempted"});
  PosteriorSample posterior;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& [line, cells] = rows[r];
    expect_width(cells, 5, line);
    posterior.points.push_back({parse_real(cells[0], line, "alpha"),
                                parse_real(cells[1], line, "beta"),
                                parse_count(cells[2], line, "i_out")});
    const GridCount count{parse_count(cells[3], line, "accepted"),
                          parse_count(cells[4], line, "attempted")};
    if (count.accepted < 0 || count.attempted < 1 || count.accepted > count.attempted)
      throw ParseError("need 0 <= accepted <= attempted and attempted >= 1", line);
    posterior.counts.push_back(count);
  }
  return posterior;
}

PosteriorSample read_acceptance_surface_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return read_acceptance_surface_csv(in);
}

// ---------------------------------------------------------------- ensemble

void write_band_csv(std::ostream& out, const FunctionalBand& band) {
  out << "week,fence_lo,band_lo,median,band_hi,fence_hi\n";
  for (std::size_t t = 0; t < band.median.size(); ++t)
    out << (t + 1) << ',' << band.fence_low[t] << ',' << band.band_low[t] << ',' << band.median[t]
        << ',' << band.band_high[t] << ',' << band.fence_high[t] << '\n';
}

void write_curves_csv(std::ostream& out, const CurveMatrix& curves) {
  out << "curve,alpha,beta,i_out";
  for (std::size_t w = 0; w < curves.weeks(); ++w) out << ",week_" << (w + 1);
  out << '\n';
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& p = curves.provenance[i];
    out << i << ',' << format_double(p.alpha) << ',' << format_double(p.beta) << ',' << p.i_out;
    for (Count c : curves.curves[i]) out << ',' << c;
    out << '\n';
  }
}

CurveMatrix read_curves_csv(std::istream& in) {
  const auto rows = read_table(in, {"curve", "alpha", "beta", "i_out"}, true);
  CurveMatrix m;
  const std::size_t width = rows.front().second.size();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& [line, cells] = rows[r];
    expect_width(cells, width, line);
    m.provenance.push_back({parse_real(cells[1], line, "alpha"), parse_real(cells[2], line, "beta"),
                            parse_count(cells[3], line, "i_out")});
    WeeklySeries curve;
    for (std::size_t c = 4; c < width; ++c) curve.push_back(parse_count(cells[c], line, "cases"));
    m.curves.push_back(std::move(curve));
  }
  return m;
}

void write_policy_curves_csv(std::ostream& out, const std::vector<PolicyReport>& reports) {
  out << "day";
  for (const auto& r : reports) out << ',' << r.strategy.label;
  out << '\n';
  const std::size_t days = reports.empty() ? 0 : reports.front().median_daily_cases.size();
  for (std::size_t d = 0; d < days; ++d) {
    out << (d + 1);
    for (const auto& r : reports) out << ',' << r.median_daily_cases[d];
    out << '\n';
  }
}

// -------------------------------------------------------------------- JSON

json to_json(const PeakSet& peaks) {
  json arr = json::array();
  for (const auto& p : peaks) arr.push_back({{"week", p.week}, {"height", p.height}});
  return {{"count", peaks.size()}, {"peaks", arr}};
}

PeakSet peaks_from_json(const json& j) {
  PeakSet peaks;
  for (const auto& p : j.at("peaks")) peaks.push_back({p.at("week").get<int>(), p.at("height").get<Count>()});
  return peaks;
}

json to_json(const CredibleIntervals& ci, const PosteriorSample& posterior) {
  auto interval = [](const Interval& i) { return json{{"low", i.low}, {"high", i.high}}; };
  return {{"level", ci.level},
          {"alpha", interval(ci.alpha)},
          {"beta", interval(ci.beta)},
          {"i_out", interval(ci.i_out)},
          {"posterior_size", posterior.size()},
          {"max_acceptance_rate", posterior.max_rate()}};
}

CredibleIntervals intervals_from_json(const json& j) {
  auto interval = [](const json& i) { return Interval{i.at("low").get<double>(), i.at("high").get<double>()}; };
  CredibleIntervals ci;
  ci.level = j.at("level").get<double>();
  ci.alpha = interval(j.at("alpha"));
  ci.beta = interval(j.at("beta"));
  ci.i_out = interval(j.at("i_out"));
  return ci;
}

json to_json(const Strategy& s) {
  return {{"label", s.label}, {"sigma", s.sigma}, {"interval_days", s.interval_days}, {"tau_f", s.tau_f()}};
}

Strategy strategy_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("strategy must be an object");
  Strategy s;
  try {
    s.sigma = j.at("sigma").get<double>();
    s.interval_days = j.at("interval_days").get<double>();
    s.label = j.value("label", std::string{});
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad strategy: ") + e.what());
  }
  if (s.label.empty()) {
    std::ostringstream label;
    label << static_cast<int>(s.sigma * 100 + 0.5) << "% every " << s.interval_days << " days";
    s.label = label.str();
  }
  s.validate();
  return s;
}

namespace {

json quantiles_json(const Quantiles& q) {
  return {{"q05", q.q05}, {"q25", q.q25}, {"q50", q.q50}, {"q75", q.q75}, {"q95", q.q95}};
}

Quantiles quantiles_from(const json& j) {
  return {j.at("q05").get<Count>(), j.at("q25").get<Count>(), j.at("q50").get<Count>(),
          j.at("q75").get<Count>(), j.at("q95").get<Count>()};
}

}  // namespace

json to_json(const std::vector<PolicyReport>& reports, const SweepOptions& options) {
  json arr = json::array();
  for (const auto& r : reports) {
    json runs = json::array();
    for (const auto& run : r.runs)
      runs.push_back({{"detected", run.detected},
                      {"quarantine_entries", run.quarantine_entries},
                      {"final_quarantine", run.final_quarantine},
                      {"peak_occupancy", run.peak_occupancy},
                      {"tests", run.tests}});
    arr.push_back({{"strategy", to_json(r.strategy)},
                   {"detected", quantiles_json(r.detected)},
                   {"quarantine_entries", quantiles_json(r.quarantine_entries)},
                   {"final_quarantine", quantiles_json(r.final_quarantine)},
                   {"peak_occupancy", quantiles_json(r.peak_occupancy)},
                   {"tests", quantiles_json(r.tests)},
                   {"tests_per_week", r.tests_per_week},
                   {"median_daily_cases", r.median_daily_cases},
                   {"runs", runs}});
  }
  return {{"n_per_strategy", options.n_per_strategy},
          {"seed", options.base_seed},
          {"common_random_numbers", options.common_random_numbers},
          {"reports", arr}};
}

std::vector<PolicyReport> policy_reports_from_json(const json& j) {
  std::vector<PolicyReport> reports;
  for (const auto& r : j.at("reports")) {
    PolicyReport rep;
    rep.strategy = strategy_from_json(r.at("strategy"));
    rep.detected = quantiles_from(r.at("detected"));
    rep.quarantine_entries = quantiles_from(r.at("quarantine_entries"));
    rep.final_quarantine = quantiles_from(r.at("final_quarantine"));
    rep.peak_occupancy = quantiles_from(r.at("peak_occupancy"));
    rep.tests = quantiles_from(r.at("tests"));
    rep.tests_per_week = r.at("tests_per_week").get<double>();
    rep.median_daily_cases = r.at("median_daily_cases").get<std::vector<Count>>();
    for (const auto& run : r.at("runs"))
      rep.runs.push_back({run.at("detected").get<Count>(), run.at("quarantine_entries").get<Count>(),
                          run.at("final_quarantine").get<Count>(),
                          run.at("peak_occupancy").get<Count>(), run.at("tests").get<Count>()});
    reports.push_back(std::move(rep));
  }
  return reports;
}

json to_json(const FunctionalBand& band) {
  return {{"median_index", band.median_index}, {"median", band.median},
          {"band_low", band.band_low},         {"band_high", band.band_high},
          {"fence_low", band.fence_low},       {"fence_high", band.fence_high},
          {"outliers", band.outliers}};
}

json to_json(const ModelParams& p) {
  return {{"beta", p.beta},       {"alpha", p.alpha},
          {"mu", p.mu},           {"gamma", p.gamma},
          {"sigma", p.sigma},     {"tau_f", p.tau_f},
          {"tau_s", p.tau_s},     {"tau_r", p.tau_r},
          {"r_i", p.r_i},         {"r_q", p.r_q},
          {"n_cc", p.n_cc},       {"i_out", p.i_out},
          {"n_total", p.n_total}, {"break_return_day", p.break_return_day}};
}

ModelParams params_from_json(const json& j, ModelParams p) {
  if (!j.is_object()) throw InvalidArgument("params must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    auto real = [&](double& field) {
      if (!v.is_number()) throw InvalidArgument("params." + k + " must be a number");
      field = v.get<double>();
    };
    auto integer = [&](auto& field) {
      if (!v.is_number_integer()) throw InvalidArgument("params." + k + " must be an integer");
      field = v.get<std::remove_reference_t<decltype(field)>>();
    };
    if (k == "beta") real(p.beta);
    else if (k == "alpha") real(p.alpha);
    else if (k == "mu") real(p.mu);
    else if (k == "gamma") real(p.gamma);
    else if (k == "sigma") real(p.sigma);
    else if (k == "tau_f") real(p.tau_f);
    else if (k == "tau_s") real(p.tau_s);
    else if (k == "tau_r") real(p.tau_r);
    else if (k == "r_i") real(p.r_i);
    else if (k == "r_q") real(p.r_q);
    else if (k == "n_cc") integer(p.n_cc);
    else if (k == "i_out") integer(p.i_out);
    else if (k == "n_total") integer(p.n_total);
    else if (k == "break_return_day") integer(p.break_return_day);
    else throw InvalidArgument("unknown parameter '" + k + "'");
  }
  return p;
}

json to_json(const CompartmentState& s) {
  json j;
  for (const auto& f : kCompartmentFields) j[std::string(f.name)] = s.*f.member;
  j["Q_q_ledger"] = {{"exposed", s.q_q_ledger.exposed},
                     {"infectious", s.q_q_ledger.infectious},
                     {"recovered", s.q_q_ledger.recovered}};
  return j;
}

CompartmentState state_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("init must be an object");
  CompartmentState s;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "Q_q_ledger") {
      s.q_q_ledger.exposed = it->value("exposed", Count{0});
      s.q_q_ledger.infectious = it->value("infectious", Count{0});
      s.q_q_ledger.recovered = it->value("recovered", Count{0});
      continue;
    }
    bool known = false;
    for (const auto& f : kCompartmentFields) {
      if (k == f.name) {
        if (!it->is_number_integer()) throw InvalidArgument("init." + k + " must be an integer");
        s.*f.member = it->get<Count>();
        known = true;
      }
    }
    if (!known) throw InvalidArgument("unknown compartment '" + k + "'");
  }
  if (!j.contains("Q_q_ledger")) s.q_q_ledger.exposed = s.q_q;
  return s;
}

json trajectory_summary(const Trajectory& trajectory) {
  const WeeklySeries weeks = weekly_cases(trajectory);
  json compartments;
  for (const auto& f : kCompartmentFields) {
    std::vector<Count> series;
    series.reserve(trajectory.states.size());
    for (const auto& s : trajectory.states) series.push_back(s.*f.member);
    compartments[std::string(f.name)] = series;
  }
  return {{"horizon_days", trajectory.horizon()},
          {"seed", trajectory.seed},
          {"params", to_json(trajectory.params)},
          {"weekly_cases", weeks},
          {"peaks", to_json(detect_peaks(weeks))},
          {"compartments", compartments}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

void write_manifest(const std::filesystem::path& dir, const RunConfig& config,
                    const std::string& command, const std::vector<std::string>& argv) {
  std::filesystem::create_directories(dir);
  write_text(dir / "config.toml", to_toml(config));
  const json manifest{{"command", command},
                      {"argv", argv},
                      {"seed", config.seed},
                      {"version", version_string()},
                      {"config", "config.toml"}};
  write_text(dir / "manifest.json", dump(manifest));
}

}  // namespace campus
