#include "sdae/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace sdae {

using nlohmann::json;

bool PeriodicSwitching::operator==(const PeriodicSwitching& o) const {
  if (repetitions != o.repetitions || cycle.size() != o.cycle.size()) return false;
  for (std::size_t i = 0; i < cycle.size(); ++i)
    if (cycle[i].mode != o.cycle[i].mode || cycle[i].duration != o.cycle[i].duration)
      return false;
  return true;
}

bool Scenario::operator==(const Scenario& other) const {
  const auto windows_eq = [&] {
    if (periodic_windows != other.periodic_windows) return false;
    if (window_list.size() != other.window_list.size()) return false;
    for (std::size_t i = 0; i < window_list.size(); ++i)
      if (window_list[i].p != other.window_list[i].p ||
          window_list[i].q != other.window_list[i].q)
        return false;
    return true;
  };
  return name == other.name && n == other.n && udim == other.udim &&
         ydim == other.ydim && modes == other.modes &&
         switching == other.switching && windows_eq() && x0 == other.x0 &&
         xhat0 == other.xhat0 && alpha_hat == other.alpha_hat &&
         gain.type == other.gain.type && gain.poles == other.gain.poles &&
         gain.target_eps == other.gain.target_eps &&
         gain.budget_safety == other.gain.budget_safety &&
         noise.type == other.noise.type && noise.eps == other.noise.eps &&
         noise.seed == other.noise.seed && delay == other.delay &&
         grid_step == other.grid_step && out_dir == other.out_dir;
}

namespace {

class Validator {
public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) {
    errors.push_back(path + ": " + msg);
  }

  bool read_int(const json& j, const std::string& path, int* out,
                int min_value = std::numeric_limits<int>::min()) {
    if (!j.is_number_integer()) {
      fail(path, "expected an integer");
      return false;
    }
    const int v = j.get<int>();
    if (v < min_value) {
      fail(path, "value below " + std::to_string(min_value));
      return false;
    }
    *out = v;
    return true;
  }

  bool read_double(const json& j, const std::string& path, double* out) {
    if (!j.is_number()) {
      fail(path, "expected a number");
      return false;
    }
    *out = j.get<double>();
    if (!std::isfinite(*out)) {
      fail(path, "expected a finite number");
      return false;
    }
    return true;
  }

  bool read_matrix(const json& j, const std::string& path, Index rows, Index cols,
                   Matrix* out) {
    if (!j.is_array()) {
      fail(path, "expected a nested array");
      return false;
    }
    if (static_cast<Index>(j.size()) != rows) {
      fail(path, "expected " + std::to_string(rows) + " rows");
      return false;
    }
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      const json& row = j[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
        fail(path + "[" + std::to_string(r) + "]",
             "expected " + std::to_string(cols) + " columns");
        return false;
      }
      for (Index c = 0; c < cols; ++c) {
        double v;
        if (!read_double(row[static_cast<std::size_t>(c)],
                         path + "[" + std::to_string(r) + "][" + std::to_string(c) +
                             "]",
                         &v))
          return false;
        m(r, c) = v;
      }
    }
    *out = std::move(m);
    return true;
  }

  bool read_vector(const json& j, const std::string& path, Index size, Vector* out) {
    if (!j.is_array() || static_cast<Index>(j.size()) != size) {
      fail(path, "expected an array of length " + std::to_string(size));
      return false;
    }
    Vector v(size);
    for (Index i = 0; i < size; ++i) {
      double x;
      if (!read_double(j[static_cast<std::size_t>(i)],
                       path + "[" + std::to_string(i) + "]", &x))
        return false;
      v(i) = x;
    }
    *out = std::move(v);
    return true;
  }
};

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

int interval_count_of(const Scenario& s) {
  if (const auto* p = std::get_if<PeriodicSwitching>(&s.switching))
    return static_cast<int>(p->cycle.size()) * p->repetitions;
  const auto& e = std::get<ExplicitSwitching>(s.switching);
  return static_cast<int>(e.modes.size());
}

}  // namespace

ParseResult parse_scenario(const std::string& text) {
  ParseResult result;
  Validator v;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    result.errors.push_back(std::string("document: not valid JSON (") + e.what() +
                            ")");
    return result;
  }
  if (!doc.is_object()) {
    result.errors.push_back("document: expected a JSON object");
    return result;
  }

  Scenario s;
  if (doc.contains("name") && doc["name"].is_string())
    s.name = doc["name"].get<std::string>();
  else
    v.fail("name", "expected a string");

  v.read_int(doc.value("n", json()), "n", &s.n, 1);
  v.read_int(doc.value("u", json(0)), "u", &s.udim, 0);
  v.read_int(doc.value("y", json()), "y", &s.ydim, 1);
  if (!v.errors.empty()) {
    result.errors = v.errors;
    return result;
  }

  const Index n = s.n, u = s.udim, y = s.ydim;
  if (!doc.contains("modes") || !doc["modes"].is_array() || doc["modes"].empty()) {
    v.fail("modes", "expected a non-empty array of mode objects");
  } else {
    for (std::size_t i = 0; i < doc["modes"].size(); ++i) {
      const std::string path = "modes[" + std::to_string(i) + "]";
      const json& jm = doc["modes"][i];
      if (!jm.is_object()) {
        v.fail(path, "expected an object");
        continue;
      }
      ScenarioMode m;
      bool ok = true;
      ok &= jm.contains("E") ? v.read_matrix(jm["E"], path + ".E", n, n, &m.E)
                             : (v.fail(path + ".E", "missing"), false);
      ok &= jm.contains("A") ? v.read_matrix(jm["A"], path + ".A", n, n, &m.A)
                             : (v.fail(path + ".A", "missing"), false);
      ok &= jm.contains("C") ? v.read_matrix(jm["C"], path + ".C", y, n, &m.C)
                             : (v.fail(path + ".C", "missing"), false);
      m.B = Matrix::Zero(n, u);
      m.D = Matrix::Zero(y, u);
      if (jm.contains("B")) ok &= v.read_matrix(jm["B"], path + ".B", n, u, &m.B);
      if (jm.contains("D")) ok &= v.read_matrix(jm["D"], path + ".D", y, u, &m.D);
      if (ok) s.modes.push_back(std::move(m));
    }
  }

  const int pool_size = static_cast<int>(s.modes.size());
  if (!doc.contains("switching") || !doc["switching"].is_object()) {
    v.fail("switching", "expected an object");
  } else {
    const json& js = doc["switching"];
    const std::string type = js.value("type", "");
    if (type == "periodic") {
      PeriodicSwitching p;
      if (!js.contains("cycle") || !js["cycle"].is_array() || js["cycle"].empty()) {
        v.fail("switching.cycle", "expected a non-empty array");
      } else {
        for (std::size_t i = 0; i < js["cycle"].size(); ++i) {
          const std::string path = "switching.cycle[" + std::to_string(i) + "]";
          const json& je = js["cycle"][i];
          CycleEntry e;
          if (!je.is_object() || !je.contains("mode") || !je.contains("duration")) {
            v.fail(path, "expected {mode, duration}");
            continue;
          }
          v.read_int(je["mode"], path + ".mode", &e.mode, 0);
          v.read_double(je["duration"], path + ".duration", &e.duration);
          if (e.mode >= pool_size)
            v.fail(path + ".mode", "mode index out of range");
          if (e.duration <= 0.0)
            v.fail(path + ".duration", "must be positive");
          p.cycle.push_back(e);
        }
      }
      v.read_int(js.value("repetitions", json()), "switching.repetitions",
                 &p.repetitions, 1);
      s.switching = std::move(p);
    } else if (type == "explicit") {
      ExplicitSwitching e;
      if (js.contains("times") && js["times"].is_array()) {
        double prev = 0.0;
        for (std::size_t i = 0; i < js["times"].size(); ++i) {
          double t;
          if (v.read_double(js["times"][i],
                            "switching.times[" + std::to_string(i) + "]", &t)) {
            if (t <= prev)
              v.fail("switching.times[" + std::to_string(i) + "]",
                     "times must be strictly increasing and positive");
            e.times.push_back(t);
            prev = t;
          }
        }
      } else {
        v.fail("switching.times", "expected an array");
      }
      if (js.contains("modes") && js["modes"].is_array()) {
        for (std::size_t i = 0; i < js["modes"].size(); ++i) {
          int idx = 0;
          if (v.read_int(js["modes"][i],
                         "switching.modes[" + std::to_string(i) + "]", &idx, 0)) {
            if (idx >= pool_size)
              v.fail("switching.modes[" + std::to_string(i) + "]",
                     "mode index out of range");
            e.modes.push_back(idx);
          }
        }
        if (e.modes.size() != e.times.size() + 1)
          v.fail("switching.modes", "expected one mode per interval (times + 1)");
      } else {
        v.fail("switching.modes", "expected an array");
      }
      v.read_double(js.value("horizon", json()), "switching.horizon", &e.horizon);
      if (!e.times.empty() && e.horizon <= e.times.back())
        v.fail("switching.horizon", "must exceed the last switching time");
      s.switching = std::move(e);
    } else {
      v.fail("switching.type", "expected \"periodic\" or \"explicit\"");
    }
  }

  if (doc.contains("windows")) {
    const json& jw = doc["windows"];
    if (jw.is_string() && jw.get<std::string>() == "periodic") {
      s.periodic_windows = true;
      if (!std::holds_alternative<PeriodicSwitching>(s.switching))
        v.fail("windows", "\"periodic\" requires periodic switching");
    } else if (jw.is_array()) {
      s.periodic_windows = false;
      const int intervals = v.errors.empty() ? interval_count_of(s) : 0;
      for (std::size_t i = 0; i < jw.size(); ++i) {
        const std::string path = "windows[" + std::to_string(i) + "]";
        if (!jw[i].is_array() || jw[i].size() != 2) {
          v.fail(path, "expected a pair [p, q]");
          continue;
        }
        WindowSpec w;
        v.read_int(jw[i][0], path + "[0]", &w.p, 0);
        v.read_int(jw[i][1], path + "[1]", &w.q, 0);
        if (w.p >= w.q) v.fail(path, "window needs p < q");
        if (intervals > 0 && w.q > intervals)
          v.fail(path, "window end exceeds the interval count");
        s.window_list.push_back(w);
      }
      if (s.window_list.empty()) v.fail("windows", "expected at least one window");
    } else {
      v.fail("windows", "expected \"periodic\" or an array of [p, q] pairs");
    }
  } else {
    v.fail("windows", "missing");
  }

  v.read_vector(doc.value("x0", json()), "x0", n, &s.x0);
  v.read_vector(doc.value("xhat0", json()), "xhat0", n, &s.xhat0);

  if (doc.contains("observer") && doc["observer"].is_object()) {
    const json& jo = doc["observer"];
    if (jo.contains("alpha_hat")) {
      v.read_double(jo["alpha_hat"], "observer.alpha_hat", &s.alpha_hat);
      if (s.alpha_hat <= 0.0 || s.alpha_hat >= 1.0)
        v.fail("observer.alpha_hat", "must lie in (0, 1)");
    }
    if (jo.contains("gain") && jo["gain"].is_object()) {
      const json& jg = jo["gain"];
      const std::string type = jg.value("type", "");
      if (type == "poles") {
        s.gain.type = GainPolicy::Type::Poles;
        if (!jg.contains("poles") || !jg["poles"].is_array() || jg["poles"].empty()) {
          v.fail("observer.gain.poles", "expected a non-empty array");
        } else {
          for (std::size_t i = 0; i < jg["poles"].size(); ++i) {
            double p;
            if (v.read_double(jg["poles"][i],
                              "observer.gain.poles[" + std::to_string(i) + "]", &p)) {
              if (p >= 0.0)
                v.fail("observer.gain.poles[" + std::to_string(i) + "]",
                       "poles must be negative");
              s.gain.poles.push_back(p);
            }
          }
        }
      } else if (type == "target_eps") {
        s.gain.type = GainPolicy::Type::TargetEps;
        v.read_double(jg.value("eps", json()), "observer.gain.eps",
                      &s.gain.target_eps);
        if (s.gain.target_eps <= 0.0)
          v.fail("observer.gain.eps", "must be positive");
      } else if (type == "budget") {
        s.gain.type = GainPolicy::Type::Budget;
        if (jg.contains("safety")) {
          v.read_double(jg["safety"], "observer.gain.safety", &s.gain.budget_safety);
          if (s.gain.budget_safety <= 0.0 || s.gain.budget_safety > 1.0)
            v.fail("observer.gain.safety", "must lie in (0, 1]");
        }
      } else {
        v.fail("observer.gain.type",
               "expected \"poles\", \"target_eps\" or \"budget\"");
      }
    }
    if (jo.contains("noise") && jo["noise"].is_object()) {
      const json& jn = jo["noise"];
      const std::string type = jn.value("type", "off");
      if (type == "off") {
        s.noise.type = NoiseSpec::Type::Off;
      } else if (type == "multiplicative") {
        s.noise.type = NoiseSpec::Type::Multiplicative;
        v.read_double(jn.value("eps", json()), "observer.noise.eps", &s.noise.eps);
        if (s.noise.eps < 0.0) v.fail("observer.noise.eps", "must be nonnegative");
        if (jn.contains("seed") && jn["seed"].is_number_unsigned())
          s.noise.seed = jn["seed"].get<std::uint64_t>();
        else
          v.fail("observer.noise.seed", "expected an unsigned integer");
      } else {
        v.fail("observer.noise.type", "expected \"off\" or \"multiplicative\"");
      }
    }
    if (jo.contains("delay")) {
      v.read_double(jo["delay"], "observer.delay", &s.delay);
      if (s.delay < 0.0) v.fail("observer.delay", "must be nonnegative");
    }
  }

  if (doc.contains("output") && doc["output"].is_object()) {
    const json& jo = doc["output"];
    if (jo.contains("grid_step")) {
      double g;
      if (v.read_double(jo["grid_step"], "output.grid_step", &g)) {
        if (g <= 0.0)
          v.fail("output.grid_step", "must be positive");
        else
          s.grid_step = g;
      }
    }
    if (jo.contains("dir")) {
      if (jo["dir"].is_string())
        s.out_dir = jo["dir"].get<std::string>();
      else
        v.fail("output.dir", "expected a string");
    }
  }

  if (!v.errors.empty()) {
    result.errors = v.errors;
    return result;
  }
  result.scenario = std::move(s);
  return result;
}

std::string serialize_scenario(const Scenario& s) {
  json doc;
  doc["name"] = s.name;
  doc["n"] = s.n;
  doc["u"] = s.udim;
  doc["y"] = s.ydim;
  json modes = json::array();
  for (const auto& m : s.modes) {
    json jm;
    jm["E"] = matrix_to_json(m.E);
    jm["A"] = matrix_to_json(m.A);
    jm["C"] = matrix_to_json(m.C);
    jm["B"] = matrix_to_json(m.B);
    jm["D"] = matrix_to_json(m.D);
    modes.push_back(std::move(jm));
  }
  doc["modes"] = std::move(modes);
  if (const auto* p = std::get_if<PeriodicSwitching>(&s.switching)) {
    json cycle = json::array();
    for (const auto& e : p->cycle)
      cycle.push_back(json{{"mode", e.mode}, {"duration", e.duration}});
    doc["switching"] = {{"type", "periodic"},
                        {"cycle", std::move(cycle)},
                        {"repetitions", p->repetitions}};
  } else {
    const auto& e = std::get<ExplicitSwitching>(s.switching);
    doc["switching"] = {{"type", "explicit"},
                        {"times", e.times},
                        {"modes", e.modes},
                        {"horizon", e.horizon}};
  }
  if (s.periodic_windows) {
    doc["windows"] = "periodic";
  } else {
    json windows = json::array();
    for (const auto& w : s.window_list)
      windows.push_back(json::array({w.p, w.q}));
    doc["windows"] = std::move(windows);
  }
  doc["x0"] = vector_to_json(s.x0);
  doc["xhat0"] = vector_to_json(s.xhat0);
  json jo;
  jo["alpha_hat"] = s.alpha_hat;
  switch (s.gain.type) {
    case GainPolicy::Type::Poles:
      jo["gain"] = {{"type", "poles"}, {"poles", s.gain.poles}};
      break;
    case GainPolicy::Type::TargetEps:
      jo["gain"] = {{"type", "target_eps"}, {"eps", s.gain.target_eps}};
      break;
    case GainPolicy::Type::Budget:
      jo["gain"] = {{"type", "budget"}, {"safety", s.gain.budget_safety}};
      break;
  }
  if (s.noise.type == NoiseSpec::Type::Off) {
    jo["noise"] = {{"type", "off"}};
  } else {
    jo["noise"] = {{"type", "multiplicative"},
                   {"eps", s.noise.eps},
                   {"seed", s.noise.seed}};
  }
  jo["delay"] = s.delay;
  doc["observer"] = std::move(jo);
  if (s.grid_step || s.out_dir) {
    json out;
    if (s.grid_step) out["grid_step"] = *s.grid_step;
    if (s.out_dir) out["dir"] = *s.out_dir;
    doc["output"] = std::move(out);
  }
  return doc.dump(2);
}

SwitchedSystem make_system(const Scenario& s, std::optional<int> repetitions_override) {
  std::vector<Mode> pool;
  pool.reserve(s.modes.size());
  for (const auto& m : s.modes) pool.emplace_back(m.E, m.A, m.B, m.C, m.D);
  if (const auto* p = std::get_if<PeriodicSwitching>(&s.switching)) {
    const int reps = repetitions_override.value_or(p->repetitions);
    return SwitchedSystem::periodic(std::move(pool), p->cycle, reps);
  }
  const auto& e = std::get<ExplicitSwitching>(s.switching);
  std::vector<double> boundaries{0.0};
  boundaries.insert(boundaries.end(), e.times.begin(), e.times.end());
  boundaries.push_back(e.horizon);
  return SwitchedSystem(std::move(pool), e.modes, std::move(boundaries));
}

std::vector<WindowSpec> make_windows(const Scenario& s, const SwitchedSystem& sys) {
  if (!s.periodic_windows) return s.window_list;
  const auto& cycle = sys.cycle();
  require(cycle.has_value(), "make_windows: periodic windows need periodic switching");
  const int len = static_cast<int>(cycle->size());
  std::vector<WindowSpec> windows;
  for (int p = 0; p + len <= sys.interval_count(); p += len)
    windows.push_back({p, p + len});
  return windows;
}

ObserverConfig make_observer_config(const Scenario& s, const SwitchedSystem& sys,
                                    std::optional<std::uint64_t> seed_override) {
  ObserverConfig cfg;
  cfg.windows = make_windows(s, sys);
  cfg.alpha_hat = s.alpha_hat;
  cfg.gain = s.gain;
  cfg.noise = s.noise;
  if (seed_override) cfg.noise.seed = *seed_override;
  cfg.delay = s.delay;
  cfg.xhat0 = s.xhat0;
  if (s.grid_step) cfg.grid_step = *s.grid_step;
  return cfg;
}

}  // namespace sdae
