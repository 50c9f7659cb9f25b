#include "pursuit/scenario_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "pursuit/defaults.hpp"
#include "pursuit/errors.hpp"

namespace pursuit::io {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// A JSON object together with its path, checking keys as they are read.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(at(key) + ": missing");
    return j_.at(key);
  }

  double num(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number()) throw ConfigError(at(key) + ": expected a number");
    return v.get<double>();
  }

  double num(const std::string& key, double fallback) { return has(key) ? num(key) : (seen_.insert(key), fallback); }

  long integer(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(at(key) + ": expected an integer");
    return v.get<long>();
  }

  std::string str(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(at(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> nums(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_array()) throw ConfigError(at(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number()) throw ConfigError(at(key) + "[" + std::to_string(k) + "]: expected a number");
      out.push_back(v[k].get<double>());
    }
    return out;
  }

  Obj child(const std::string& key) { return Obj(raw(key), at(key)); }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const std::string& path() const { return path_; }

  // Every key must have been read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()) + ": unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

model::VelocityProfile velocity_from(Obj o) {
  const auto kind = o.str("kind");
  model::VelocityProfile v;
  if (kind == "quadratic") {
    v.law = model::QuadraticLaw{o.num("k"), o.num("beta"), o.num("alpha"), o.num("L_gap")};
  } else if (kind == "linear_clamped") {
    v.law = model::LinearClamped{o.num("slope"), o.num("lo"), o.num("hi")};
  } else if (kind == "tabulated") {
    model::Tabulated t{o.nums("x"), o.nums("f"), o.num("C_F"), o.num("F_sup"),
                       static_cast<std::size_t>(defaults::velocity_audit_points)};
    if (o.has("audit_points")) {
      const long n = o.integer("audit_points");
      if (n < 2) throw ConfigError(o.at("audit_points") + ": must be >= 2");
      t.audit_points = static_cast<std::size_t>(n);
    }
    v.law = std::move(t);
  } else {
    throw ConfigError(o.at("kind") + ": unknown velocity kind '" + kind + "'");
  }
  o.finish();
  return v;
}

model::DelayProfile delay_from(Obj o) {
  const auto kind = o.str("kind");
  model::DelayProfile d;
  if (kind == "constant")
    d.profile = model::ConstantDelay{o.num("tau")};
  else if (kind == "tabulated")
    d.profile = model::TabulatedDelay{o.nums("x"), o.nums("tau0")};
  else
    throw ConfigError(o.at("kind") + ": unknown delay kind '" + kind + "'");
  o.finish();
  return d;
}

model::InitialHistory initial_from(Obj o, double tau) {
  const auto family = o.str("family");
  model::InitialHistory h;
  h.window = o.num("window", 2 * tau);
  if (family == "linear") {
    h.family = model::LinearHistory{o.num("L_gap")};
  } else if (family == "alternating_sine") {
    h.family = model::AlternatingSineHistory{o.num("L_gap"), o.num("A"), o.num("alpha")};
  } else if (family == "order_break") {
    const long n0 = o.integer("n0");
    const auto copy = o.str("copy");
    if (copy != "X" && copy != "Y") throw ConfigError(o.at("copy") + ": expected \"X\" or \"Y\"");
    h.family = model::OrderBreakHistory{static_cast<int>(n0), o.integer("j"),
                                       copy == "X" ? model::OrderBreakCopy::X : model::OrderBreakCopy::Y};
  } else if (family == "sine_perturbed") {
    h.family = model::SinePerturbedHistory{o.num("L_gap"), o.num("amplitude"), o.num("period")};
  } else if (family == "table") {
    model::TableHistory t;
    t.t = o.nums("t");
    t.first = o.integer("first");
    t.L_lip = o.num("L_lip");
    const auto& rows = o.raw("x");
    if (!rows.is_array()) throw ConfigError(o.at("x") + ": expected an array of rows");
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const std::string where = o.at("x") + "[" + std::to_string(k) + "]";
      if (!rows[k].is_array()) throw ConfigError(where + ": expected an array of numbers");
      std::vector<double> row;
      for (const auto& v : rows[k]) {
        if (!v.is_number()) throw ConfigError(where + ": expected numbers");
        row.push_back(v.get<double>());
      }
      t.x.push_back(std::move(row));
    }
    h.family = std::move(t);
  } else {
    throw ConfigError(o.at("family") + ": unknown initial family '" + family + "'");
  }
  o.finish();
  return h;
}

model::Truncation truncation_from(Obj o) {
  const auto mode = o.str("mode");
  model::Truncation t;
  if (mode == "periodic") {
    const long N = o.integer("N");
    if (N < 1) throw ConfigError(o.at("N") + ": must be >= 1");
    t = model::PeriodicTruncation{static_cast<std::size_t>(N), o.num("P")};
  } else if (mode == "cone") {
    t = model::ConeTruncation{o.integer("first"), o.integer("last"), o.num("horizon")};
  } else {
    throw ConfigError(o.at("mode") + ": unknown truncation mode '" + mode + "'");
  }
  o.finish();
  return t;
}

}  // namespace

model::Scenario scenario_from_json(const json& j) {
  Obj o(j, "");
  model::Scenario s;
  s.velocity = velocity_from(o.child("velocity"));
  s.delay = delay_from(o.child("delay"));
  const double tau = s.delay.tau();
  s.initial = initial_from(o.child("initial"), tau);
  s.truncation = truncation_from(o.child("truncation"));
  s.T = o.num("T");
  s.dt = o.num("dt", defaults::dt_fraction * tau);
  s.epsilons = o.has("epsilons") ? o.nums("epsilons") : defaults::epsilons();
  s.scale = o.num("scale", 1.0);
  o.finish();
  return s;
}

ordered_json scenario_to_json(const model::Scenario& s) {
  ordered_json j;
  std::visit(
      [&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, model::QuadraticLaw>)
          j["velocity"] = {{"kind", "quadratic"}, {"k", law.k}, {"beta", law.beta}, {"alpha", law.alpha}, {"L_gap", law.L_gap}};
        else if constexpr (std::is_same_v<T, model::LinearClamped>)
          j["velocity"] = {{"kind", "linear_clamped"}, {"slope", law.slope}, {"lo", law.lo}, {"hi", law.hi}};
        else
          j["velocity"] = {{"kind", "tabulated"}, {"x", law.x}, {"f", law.f}, {"C_F", law.C_F},
                           {"F_sup", law.F_sup}, {"audit_points", law.audit_points}};
      },
      s.velocity.law);
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, model::ConstantDelay>)
          j["delay"] = {{"kind", "constant"}, {"tau", d.tau}};
        else
          j["delay"] = {{"kind", "tabulated"}, {"x", d.x}, {"tau0", d.tau0}};
      },
      s.delay.profile);
  ordered_json init;
  std::visit(
      [&](const auto& h) {
        using T = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<T, model::LinearHistory>) {
          init = {{"family", "linear"}, {"L_gap", h.L_gap}};
        } else if constexpr (std::is_same_v<T, model::AlternatingSineHistory>) {
          init = {{"family", "alternating_sine"}, {"L_gap", h.L_gap}, {"A", h.A}, {"alpha", h.alpha}};
        } else if constexpr (std::is_same_v<T, model::OrderBreakHistory>) {
          init = {{"family", "order_break"}, {"n0", h.n0}, {"j", h.j},
                  {"copy", h.copy == model::OrderBreakCopy::X ? "X" : "Y"}};
        } else if constexpr (std::is_same_v<T, model::SinePerturbedHistory>) {
          init = {{"family", "sine_perturbed"}, {"L_gap", h.L_gap}, {"amplitude", h.amplitude}, {"period", h.period}};
        } else {
          init = {{"family", "table"}, {"t", h.t}, {"first", h.first}, {"x", h.x}, {"L_lip", h.L_lip}};
        }
      },
      s.initial.family);
  init["window"] = s.initial.window;
  j["initial"] = std::move(init);
  if (const auto* p = std::get_if<model::PeriodicTruncation>(&s.truncation))
    j["truncation"] = {{"mode", "periodic"}, {"N", p->N}, {"P", p->P}};
  else {
    const auto& c = std::get<model::ConeTruncation>(s.truncation);
    j["truncation"] = {{"mode", "cone"}, {"first", c.first}, {"last", c.last}, {"horizon", c.horizon}};
  }
  j["T"] = s.T;
  j["dt"] = s.dt;
  j["epsilons"] = s.epsilons;
  j["scale"] = s.scale;
  return j;
}

model::Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace pursuit::io
