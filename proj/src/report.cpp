#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "frn/metrics.hpp"

namespace frn {

namespace {

nlohmann::json num_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return nullptr;  // +inf sentinel; readers map null back
  return v;
}

double from_num_or_null(const nlohmann::json& j, bool inf_sentinel) {
  if (j.is_null())
    return inf_sentinel ? std::numeric_limits<double>::infinity()
                        : std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "-";
  if (std::isinf(v)) return "inf";
  std::ostringstream o;
  o << std::fixed << std::setprecision(4) << v;
  return o.str();
}

}  // namespace

std::string MetricReport::to_jsonl() const {
  std::ostringstream out;
  for (const auto& [id, metrics] : per_image) {
    nlohmann::json j{{"id", id}};
    for (const auto& [name, v] : metrics) j[name] = num_or_null(v);
    out << j.dump() << "\n";
  }
  nlohmann::json agg{{"id", "__aggregate__"}};
  for (const auto& [name, mv] : aggregate) {
    agg[name + "_mean"] = num_or_null(mv.first);
    agg[name + "_std"] = num_or_null(mv.second);
  }
  out << agg.dump() << "\n";
  return out.str();
}

MetricReport MetricReport::from_jsonl(const std::string& text) {
  MetricReport r;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    const std::string id = j.at("id").get<std::string>();
    if (id == "__aggregate__") {
      for (auto& [key, val] : j.items()) {
        if (key == "id") continue;
        const bool is_mean = key.size() > 5 && key.substr(key.size() - 5) == "_mean";
        const bool is_std = key.size() > 4 && key.substr(key.size() - 4) == "_std";
        const std::string name = is_mean ? key.substr(0, key.size() - 5)
                                         : key.substr(0, key.size() - 4);
        auto& slot = r.aggregate[name];
        const double v = from_num_or_null(val, name == "psnr");
        if (is_mean) slot.first = v;
        else if (is_std) slot.second = v;
      }
    } else {
      std::map<std::string, double> m;
      for (auto& [key, val] : j.items()) {
        if (key == "id") continue;
        m[key] = from_num_or_null(val, key == "psnr");
      }
      r.per_image.emplace_back(id, std::move(m));
    }
  }
  return r;
}

std::string MetricReport::table() const {
  // Statistical | Perceptual column order
  static const char* order[] = {"psnr", "ssim", "ms_ssim", "fed", "lle",
                                "frechet_fd", "lpips", "niqe"};
  std::vector<std::string> cols;
  for (const char* name : order)
    if (aggregate.count(name)) cols.push_back(name);
  for (const auto& [name, _] : aggregate)
    if (std::find(cols.begin(), cols.end(), name) == cols.end()) cols.push_back(name);

  std::ostringstream out;
  out << std::left << std::setw(14) << "metric" << std::setw(12) << "mean"
      << std::setw(12) << "std" << "\n";
  for (const auto& c : cols) {
    const auto& mv = aggregate.at(c);
    out << std::left << std::setw(14) << c << std::setw(12) << fmt(mv.first) << std::setw(12)
        << fmt(mv.second) << "\n";
  }
  return out.str();
}

}  // namespace frn
