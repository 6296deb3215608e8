#include "bcsr/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace bcsr {

namespace {

using nlohmann::json;

Point2 point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected a 2-element array");
  return {j[0].get<double>(), j[1].get<double>()};
}

json point_to(const Point2& p) { return json::array({p.x(), p.y()}); }

std::vector<Point2> points_from(const json& j) {
  std::vector<Point2> out;
  for (const auto& e : j) out.push_back(point_from(e));
  return out;
}

json points_to(const std::vector<Point2>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back(point_to(p));
  return out;
}

// Literal beta: Mt*Nr [re, im] pairs in block order (receiver-major).
ComplexMatrix beta_from(const json& j, Index Mt, Index Nr) {
  if (!j.is_array() || static_cast<Index>(j.size()) != Mt * Nr)
    throw std::invalid_argument("beta must list Mt*Nr complex values");
  ComplexMatrix out(Mt, Nr);
  for (Index l = 0; l < Nr; ++l)
    for (Index i = 0; i < Mt; ++i) {
      const json& e = j[static_cast<std::size_t>(l * Mt + i)];
      out(i, l) = e.is_number() ? Complex(e.get<double>(), 0.0)
                                : Complex(e.at(0).get<double>(), e.at(1).get<double>());
    }
  return out;
}

json beta_to(const ComplexMatrix& a) {
  json out = json::array();
  for (Index l = 0; l < a.cols(); ++l)
    for (Index i = 0; i < a.rows(); ++i) out.push_back(json::array({a(i, l).real(), a(i, l).imag()}));
  return out;
}

DopplerTimeBase time_base_from(const std::string& s) {
  if (s == "Tp") return DopplerTimeBase::pulse_duration;
  if (s == "T") return DopplerTimeBase::pri;
  throw std::invalid_argument("doppler_time_base must be \"Tp\" or \"T\"");
}

json to_json(const Scenario& s) {
  json j;
  j["geometry"] = {{"tx", points_to(s.geometry.tx)}, {"rx", points_to(s.geometry.rx)}};
  const auto& w = s.waveform;
  j["waveform"] = {{"fc", w.fc}, {"T", w.T}, {"Tp", w.Tp}, {"Ts", w.Ts}, {"Ns", w.Ns},
                   {"Np", w.Np}, {"c", w.c},
                   {"doppler_time_base",
                    w.doppler_time_base == DopplerTimeBase::pri ? "T" : "Tp"}};
  j["grid"] = {{"x", s.grid.x}, {"y", s.grid.y}, {"vx", s.grid.vx}, {"vy", s.grid.vy}};
  j["targets"] = json::array();
  for (const auto& t : s.targets) {
    json jt = {{"p", point_to(t.position)}, {"v", point_to(t.velocity)}};
    if (t.beta_dist)
      jt["beta_dist"] = {{"mean", t.beta_dist->mean}, {"var", t.beta_dist->var}};
    else
      jt["beta"] = beta_to(t.attenuation);
    j["targets"].push_back(jt);
  }
  // JSON has no infinity; the noiseless case is spelled "inf".
  if (std::isinf(s.enr_db) && s.enr_db > 0)
    j["enr_db"] = "inf";
  else
    j["enr_db"] = s.enr_db;
  j["Pt"] = s.powers.Pt;
  j["powers"] = std::vector<double>(s.powers.p.data(), s.powers.p.data() + s.powers.p.size());
  return j;
}

}  // namespace

Scenario parse_scenario(std::string_view json_text) {
  const json j = json::parse(json_text);
  Scenario s;
  s.geometry.tx = points_from(j.at("geometry").at("tx"));
  s.geometry.rx = points_from(j.at("geometry").at("rx"));

  const json& w = j.at("waveform");
  s.waveform.fc = w.at("fc").get<double>();
  s.waveform.T = w.at("T").get<double>();
  s.waveform.Tp = w.value("Tp", s.waveform.T / 4.0);
  s.waveform.Ts = w.at("Ts").get<double>();
  s.waveform.Ns = w.at("Ns").get<Index>();
  s.waveform.Np = w.at("Np").get<Index>();
  s.waveform.c = w.value("c", kSpeedOfLight);
  s.waveform.doppler_time_base = time_base_from(w.value("doppler_time_base", std::string("Tp")));

  const json& g = j.at("grid");
  s.grid.x = g.at("x").get<std::vector<double>>();
  s.grid.y = g.at("y").get<std::vector<double>>();
  s.grid.vx = g.at("vx").get<std::vector<double>>();
  s.grid.vy = g.at("vy").get<std::vector<double>>();

  for (const auto& jt : j.value("targets", json::array())) {
    Target t;
    t.position = point_from(jt.at("p"));
    t.velocity = point_from(jt.at("v"));
    if (jt.contains("beta")) {
      t.attenuation = beta_from(jt.at("beta"), s.Mt(), s.Nr());
    } else if (jt.contains("beta_dist")) {
      BetaDistribution d;
      d.mean = jt.at("beta_dist").value("mean", d.mean);
      d.var = jt.at("beta_dist").value("var", d.var);
      t.beta_dist = d;
    } else {
      t.beta_dist = BetaDistribution{};
    }
    s.targets.push_back(std::move(t));
  }

  s.enr_db = 10.0;
  if (j.contains("enr_db")) {
    const auto& e = j.at("enr_db");
    if (e.is_string()) {
      if (e.get<std::string>() != "inf") throw std::invalid_argument("enr_db: expected a number or \"inf\"");
      s.enr_db = std::numeric_limits<double>::infinity();
    } else {
      s.enr_db = e.get<double>();
    }
  }
  const double Pt = j.value("Pt", static_cast<double>(s.Mt()));
  if (j.contains("powers")) {
    const auto p = j.at("powers").get<std::vector<double>>();
    s.powers.p = Eigen::Map<const RealVector>(p.data(), static_cast<Index>(p.size()));
    s.powers.Pt = Pt;
    if (std::abs(s.powers.energy() - Pt) > 1e-9 * Pt)
      throw std::invalid_argument("powers: sum of squared amplitudes must equal Pt");
  } else {
    s.powers = PowerAllocation::uniform(s.Mt(), Pt);
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string dump_scenario(const Scenario& scenario) { return to_json(scenario).dump(2); }

std::uint64_t scenario_hash(const Scenario& scenario) {
  const std::string text = to_json(scenario).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace bcsr
