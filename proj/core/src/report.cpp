#include "hlwnet/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "hlwnet/error.hpp"

namespace hlwnet {

namespace {

constexpr const char* kHeader =
    "scheme,n_ues,mean_speed_mps,seed,network_throughput_bps,mean_interval_s,hho,vho,updates,"
    "decision_runtime_s";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Mean of `value` over rows grouped by (scheme, key); one line per key.
template <typename Key, typename KeyFn, typename ValueFn>
std::string pivot(const std::vector<ReportRow>& rows, const char* key_name, KeyFn key_of, ValueFn value_of) {
  std::vector<std::string> schemes;
  std::set<Key> keys;
  std::map<std::pair<std::string, Key>, std::pair<double, int>> acc;
  for (const ReportRow& r : rows) {
    if (std::find(schemes.begin(), schemes.end(), r.scheme) == schemes.end()) schemes.push_back(r.scheme);
    const Key k = key_of(r);
    keys.insert(k);
    auto& a = acc[{r.scheme, k}];
    a.first += value_of(r);
    ++a.second;
  }
  std::ostringstream os;
  os << key_name;
  for (const std::string& s : schemes) os << ',' << s;
  os << '\n';
  for (const Key& k : keys) {
    os << fmt(static_cast<double>(k));
    for (const std::string& s : schemes) {
      os << ',';
      auto it = acc.find({s, k});
      if (it != acc.end()) os << fmt(it->second.first / it->second.second);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace

ReportRow make_row(const std::string& scheme, int n_ues, double speed, std::uint64_t seed,
                   const SimMetrics& metrics) {
  ReportRow r;
  r.scheme = scheme;
  r.n_ues = n_ues;
  r.mean_speed_mps = speed;
  r.seed = seed;
  r.network_throughput_bps = metrics.network_throughput_bps;
  r.mean_interval_s = metrics.mean_interval_s;
  r.hho = metrics.hho;
  r.vho = metrics.vho;
  for (long long u : metrics.updates) r.updates += u;
  if (!metrics.decision_runtime_s.empty()) {
    std::vector<double> t = metrics.decision_runtime_s;
    std::nth_element(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(t.size() / 2), t.end());
    r.decision_runtime_s = t[t.size() / 2];
  }
  return r;
}

std::string rows_to_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  os << kHeader << '\n';
  for (const ReportRow& r : rows) {
    os << r.scheme << ',' << r.n_ues << ',' << fmt(r.mean_speed_mps) << ',' << r.seed << ','
       << fmt(r.network_throughput_bps) << ',' << fmt(r.mean_interval_s) << ',' << r.hho << ',' << r.vho << ','
       << r.updates << ',' << fmt(r.decision_runtime_s) << '\n';
  }
  return os.str();
}

std::vector<ReportRow> rows_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kHeader) throw FormatError("report CSV header mismatch");
  std::vector<ReportRow> rows;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> c = split(line);
    if (c.size() != 10) throw FormatError("report CSV line " + std::to_string(line_no) + ": expected 10 cells");
    try {
      ReportRow r;
      r.scheme = c[0];
      r.n_ues = std::stoi(c[1]);
      r.mean_speed_mps = std::stod(c[2]);
      r.seed = std::stoull(c[3]);
      r.network_throughput_bps = std::stod(c[4]);
      r.mean_interval_s = std::stod(c[5]);
      r.hho = std::stoll(c[6]);
      r.vho = std::stoll(c[7]);
      r.updates = std::stoll(c[8]);
      r.decision_runtime_s = std::stod(c[9]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw FormatError("report CSV line " + std::to_string(line_no) + ": bad number");
    }
  }
  return rows;
}

std::string throughput_vs_speed(const std::vector<ReportRow>& rows) {
  return pivot<double>(
      rows, "mean_speed_mps", [](const ReportRow& r) { return r.mean_speed_mps; },
      [](const ReportRow& r) { return r.network_throughput_bps / 1e6; });
}

std::string throughput_vs_n_ues(const std::vector<ReportRow>& rows) {
  return pivot<int>(
      rows, "n_ues", [](const ReportRow& r) { return r.n_ues; },
      [](const ReportRow& r) { return r.network_throughput_bps / 1e6; });
}

std::string interval_vs_speed(const std::vector<ReportRow>& rows) {
  return pivot<double>(
      rows, "mean_speed_mps", [](const ReportRow& r) { return r.mean_speed_mps; },
      [](const ReportRow& r) { return r.mean_interval_s * 1e3; });
}

std::string runtime_vs_n_ues(const std::vector<RuntimeRow>& rows) {
  std::ostringstream os;
  os << "n_ues,msnn_s,surrogate_s,gt_s,gt_iterations\n";
  for (const RuntimeRow& r : rows) {
    os << r.n_ues << ',' << fmt(r.msnn_s) << ',' << fmt(r.surrogate_s) << ',' << fmt(r.gt_s) << ','
       << fmt(r.gt_iterations) << '\n';
  }
  return os.str();
}

}  // namespace hlwnet
