#include "qcn/experiments/config.hpp"

#include "qcn/error.hpp"
#include "qcn/experiments/scenarios.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace qcn::experiments {

namespace pt = boost::property_tree;

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::steady: return "steady";
    case Scenario::sweep2d: return "sweep2d";
    case Scenario::fig2: return "fig2";
    case Scenario::fig3: return "fig3";
    case Scenario::fig4: return "fig4";
    case Scenario::preset_rb87: return "preset_rb87";
  }
  return "?";
}

Scenario scenario_from_string(const std::string& name) {
  for (Scenario s : {Scenario::steady, Scenario::sweep2d, Scenario::fig2, Scenario::fig3,
                     Scenario::fig4, Scenario::preset_rb87}) {
    if (name == to_string(s)) return s;
  }
  if (name == "preset-rb87") return Scenario::preset_rb87;
  fail(ErrorCategory::config, "unknown scenario '" + name + "'");
}

std::string to_string(FrameMode mode) { return mode == FrameMode::lab ? "lab" : "displaced"; }

FrameMode frame_mode_from_string(const std::string& name) {
  if (name == "lab") return FrameMode::lab;
  if (name == "displaced") return FrameMode::displaced;
  fail(ErrorCategory::config, "unknown frame '" + name + "' (expected lab or displaced)");
}

std::vector<double> LogAxis::values() const {
  if (points < 1 || !(min > 0.0) || !(max >= min)) {
    fail(ErrorCategory::config, "log axis needs points >= 1 and 0 < min <= max");
  }
  std::vector<double> v(static_cast<std::size_t>(points));
  if (points == 1) {
    v[0] = min;
    return v;
  }
  const double l0 = std::log10(min);
  const double l1 = std::log10(max);
  for (int i = 0; i < points; ++i) {
    const double e = l0 + (l1 - l0) * i / (points - 1);
    const double r = std::round(e);
    // Whole decades are parsed from text so that 1e-3 is exactly the literal.
    v[static_cast<std::size_t>(i)] =
        std::abs(e - r) < 1e-12 ? std::strtod(("1e" + std::to_string(static_cast<int>(r))).c_str(), nullptr)
                                : std::pow(10.0, e);
  }
  v.front() = min;
  v.back() = max;
  return v;
}

RunConfig default_config(Scenario scenario) {
  RunConfig c;
  c.scenario = scenario;
  switch (scenario) {
    case Scenario::steady:
      c.params = QcnParams::fig2(1e-2, 1e-2);
      break;
    case Scenario::sweep2d:
    case Scenario::fig2:
    case Scenario::fig3:
      c.params = QcnParams::fig2();
      break;
    case Scenario::fig4:
      c.params = QcnParams::fig4();
      c.cascade = CascadeSpec{};
      break;
    case Scenario::preset_rb87:
      c.params = rb87_params();
      c.cascade = CascadeSpec{};
      c.fig4.photon_numbers = {0, 1};
      break;
  }
  return c;
}

void validate(const RunConfig& c) {
  const auto& t = c.truncation;
  if (t.n_a < 1 || t.n_b < 1 || t.n_d1 < 1 || t.n_d2 < 1 || t.min_level < 1) {
    fail(ErrorCategory::config, "truncation levels must be >= 1");
  }
  if (t.automatic && !(t.tolerance > 0.0)) {
    fail(ErrorCategory::config, "automatic truncation needs a positive tolerance");
  }
  if (t.max_dim < 3) fail(ErrorCategory::config, "truncation max_dim must be >= 3");
  if (!(c.rtol > 0.0) || c.rtol >= 1.0) fail(ErrorCategory::config, "rtol must lie in (0, 1)");
  if (c.jobs < 1) fail(ErrorCategory::config, "jobs must be >= 1");
  if (c.output_dir.empty()) fail(ErrorCategory::config, "output_dir is empty");
  if (c.cascade) {
    if (c.cascade->n_s < 0) fail(ErrorCategory::config, "cascade n_s must be >= 0");
    if (!(c.cascade->kappa_d1_ex2_max > 0.0) || !(c.cascade->kappa_d2 > 0.0)) {
      fail(ErrorCategory::config, "cascade rates must be positive");
    }
  }
  if (c.scenario == Scenario::fig4 || c.scenario == Scenario::preset_rb87) {
    if (!c.cascade) fail(ErrorCategory::config, "fig4 needs a [cascade] section");
    if (c.fig4.photon_numbers.empty()) fail(ErrorCategory::config, "fig4 photon_numbers is empty");
    for (int n : c.fig4.photon_numbers) {
      if (n < 0 || n > 3) fail(ErrorCategory::config, "fig4 photon numbers must lie in 0..3");
    }
    if (!(c.fig4.grid_step > 0.0) || !(c.fig4.t_end > c.fig4.grid_step)) {
      fail(ErrorCategory::config, "fig4 time grid is empty");
    }
    if (!(c.fig4.metric_halfwidth > 0.0) || !(c.fig4.probe_halfwidth > 0.0)) {
      fail(ErrorCategory::config, "fig4 window half-widths must be positive");
    }
  }
  for (const LogAxis* axis : {&c.alpha2_axis, &c.beta2_axis, &c.fig3.beta2}) axis->values();
  for (double b : c.cut_beta2) {
    if (!(b >= 0.0)) fail(ErrorCategory::config, "cut_beta2 values must be >= 0");
  }
  if (!(c.fig3.alpha2 >= 0.0)) fail(ErrorCategory::config, "fig3 alpha2 must be >= 0");
  validate(c.params);
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    fail(ErrorCategory::config, "key '" + key + "': '" + text + "' is not a number");
  }
  return v;
}

long parse_long(const std::string& key, const std::string& text) {
  long v = 0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    fail(ErrorCategory::config, "key '" + key + "': '" + text + "' is not an integer");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const long v = parse_long(key, text);
  if (v < -1000000 || v > 1000000) fail(ErrorCategory::config, "key '" + key + "' out of range");
  return static_cast<int>(v);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F fmt) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ",";
    s += fmt(xs[i]);
  }
  return s;
}

struct Field {
  const char* section;
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

CascadeSpec& cascade_of(RunConfig& c) {
  if (!c.cascade) c.cascade = CascadeSpec{};
  return *c.cascade;
}

Field real(const char* section, const char* key, std::function<double&(RunConfig&)> ref) {
  const std::string name = std::string(section) + "." + key;
  return {section, key,
          [ref](const RunConfig& c) { return format_double(ref(const_cast<RunConfig&>(c))); },
          [ref, name](RunConfig& c, const std::string& v) { ref(c) = parse_double(name, v); }};
}

Field integer(const char* section, const char* key, std::function<int&(RunConfig&)> ref) {
  const std::string name = std::string(section) + "." + key;
  return {section, key,
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [ref, name](RunConfig& c, const std::string& v) { ref(c) = parse_int(name, v); }};
}

Field axis_min(const char* s, const char* k, LogAxis RunConfig::*m) {
  return real(s, k, [m](RunConfig& c) -> double& { return (c.*m).min; });
}
Field axis_max(const char* s, const char* k, LogAxis RunConfig::*m) {
  return real(s, k, [m](RunConfig& c) -> double& { return (c.*m).max; });
}
Field axis_points(const char* s, const char* k, LogAxis RunConfig::*m) {
  return integer(s, k, [m](RunConfig& c) -> int& { return (c.*m).points; });
}

const std::vector<Field>& general_fields() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f;
    f.push_back({"run", "scenario", [](const RunConfig& c) { return to_string(c.scenario); },
                 [](RunConfig& c, const std::string& v) { c.scenario = scenario_from_string(v); }});
    f.push_back({"run", "output_dir", [](const RunConfig& c) { return c.output_dir; },
                 [](RunConfig& c, const std::string& v) { c.output_dir = v; }});
    f.push_back(real("run", "rtol", [](RunConfig& c) -> double& { return c.rtol; }));
    f.push_back(integer("run", "jobs", [](RunConfig& c) -> int& { return c.jobs; }));
    f.push_back({"run", "frame", [](const RunConfig& c) { return to_string(c.frame); },
                 [](RunConfig& c, const std::string& v) { c.frame = frame_mode_from_string(v); }});

    f.push_back(real("params", "g1", [](RunConfig& c) -> double& { return c.params.g1; }));
    f.push_back(real("params", "g2", [](RunConfig& c) -> double& { return c.params.g2; }));
    static const char* kex[] = {"kappa_ex1", "kappa_ex2", "kappa_ex3", "kappa_ex4"};
    for (std::size_t i = 0; i < 4; ++i) {
      f.push_back(real("params", kex[i],
                       [i](RunConfig& c) -> double& { return c.params.kappa_ex[i]; }));
    }
    f.push_back(real("params", "kappa_in_a", [](RunConfig& c) -> double& { return c.params.kappa_in_a; }));
    f.push_back(real("params", "kappa_in_b", [](RunConfig& c) -> double& { return c.params.kappa_in_b; }));
    f.push_back(real("params", "gamma21", [](RunConfig& c) -> double& { return c.params.gamma21; }));
    f.push_back(real("params", "gamma31", [](RunConfig& c) -> double& { return c.params.gamma31; }));
    f.push_back(real("params", "delta1", [](RunConfig& c) -> double& { return c.params.delta1; }));
    f.push_back(real("params", "delta2", [](RunConfig& c) -> double& { return c.params.delta2; }));
    f.push_back(real("params", "delta_a", [](RunConfig& c) -> double& { return c.params.delta_a; }));
    f.push_back(real("params", "delta_b", [](RunConfig& c) -> double& { return c.params.delta_b; }));
    f.push_back(real("params", "alpha_re",
                     [](RunConfig& c) -> double& { return reinterpret_cast<double(&)[2]>(c.params.alpha)[0]; }));
    f.push_back(real("params", "alpha_im",
                     [](RunConfig& c) -> double& { return reinterpret_cast<double(&)[2]>(c.params.alpha)[1]; }));
    f.push_back(real("params", "beta_re",
                     [](RunConfig& c) -> double& { return reinterpret_cast<double(&)[2]>(c.params.beta)[0]; }));
    f.push_back(real("params", "beta_im",
                     [](RunConfig& c) -> double& { return reinterpret_cast<double(&)[2]>(c.params.beta)[1]; }));

    f.push_back({"truncation", "mode",
                 [](const RunConfig& c) { return std::string(c.truncation.automatic ? "auto" : "fixed"); },
                 [](RunConfig& c, const std::string& v) {
                   if (v != "auto" && v != "fixed") {
                     fail(ErrorCategory::config, "truncation.mode must be auto or fixed");
                   }
                   c.truncation.automatic = v == "auto";
                 }});
    f.push_back(integer("truncation", "n_a", [](RunConfig& c) -> int& { return c.truncation.n_a; }));
    f.push_back(integer("truncation", "n_b", [](RunConfig& c) -> int& { return c.truncation.n_b; }));
    f.push_back(integer("truncation", "n_d1", [](RunConfig& c) -> int& { return c.truncation.n_d1; }));
    f.push_back(integer("truncation", "n_d2", [](RunConfig& c) -> int& { return c.truncation.n_d2; }));
    f.push_back(real("truncation", "tolerance", [](RunConfig& c) -> double& { return c.truncation.tolerance; }));
    f.push_back({"truncation", "max_dim",
                 [](const RunConfig& c) { return std::to_string(c.truncation.max_dim); },
                 [](RunConfig& c, const std::string& v) {
                   const long n = parse_long("truncation.max_dim", v);
                   if (n < 0) fail(ErrorCategory::config, "truncation.max_dim must be positive");
                   c.truncation.max_dim = static_cast<std::size_t>(n);
                 }});
    f.push_back(integer("truncation", "min_level", [](RunConfig& c) -> int& { return c.truncation.min_level; }));

    f.push_back(axis_min("sweep", "alpha2_min", &RunConfig::alpha2_axis));
    f.push_back(axis_max("sweep", "alpha2_max", &RunConfig::alpha2_axis));
    f.push_back(axis_points("sweep", "alpha2_points", &RunConfig::alpha2_axis));
    f.push_back(axis_min("sweep", "beta2_min", &RunConfig::beta2_axis));
    f.push_back(axis_max("sweep", "beta2_max", &RunConfig::beta2_axis));
    f.push_back(axis_points("sweep", "beta2_points", &RunConfig::beta2_axis));
    f.push_back({"sweep", "cut_beta2",
                 [](const RunConfig& c) { return join(c.cut_beta2, format_double); },
                 [](RunConfig& c, const std::string& v) {
                   c.cut_beta2.clear();
                   for (const auto& item : split_list(v)) {
                     c.cut_beta2.push_back(parse_double("sweep.cut_beta2", item));
                   }
                 }});

    f.push_back(real("fig3", "alpha2", [](RunConfig& c) -> double& { return c.fig3.alpha2; }));
    f.push_back(real("fig3", "beta2_min", [](RunConfig& c) -> double& { return c.fig3.beta2.min; }));
    f.push_back(real("fig3", "beta2_max", [](RunConfig& c) -> double& { return c.fig3.beta2.max; }));
    f.push_back(integer("fig3", "beta2_points", [](RunConfig& c) -> int& { return c.fig3.beta2.points; }));

    f.push_back({"fig4", "photon_numbers",
                 [](const RunConfig& c) {
                   return join(c.fig4.photon_numbers, [](int n) { return std::to_string(n); });
                 },
                 [](RunConfig& c, const std::string& v) {
                   c.fig4.photon_numbers.clear();
                   for (const auto& item : split_list(v)) {
                     c.fig4.photon_numbers.push_back(parse_int("fig4.photon_numbers", item));
                   }
                 }});
    f.push_back(real("fig4", "t_end", [](RunConfig& c) -> double& { return c.fig4.t_end; }));
    f.push_back(real("fig4", "grid_step", [](RunConfig& c) -> double& { return c.fig4.grid_step; }));
    f.push_back(real("fig4", "metric_halfwidth", [](RunConfig& c) -> double& { return c.fig4.metric_halfwidth; }));
    f.push_back(real("fig4", "probe_halfwidth", [](RunConfig& c) -> double& { return c.fig4.probe_halfwidth; }));
    return f;
  }();
  return fields;
}

const std::vector<Field>& cascade_fields() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f;
    f.push_back(integer("cascade", "n_s", [](RunConfig& c) -> int& { return cascade_of(c).n_s; }));
    f.push_back(real("cascade", "kappa_d1_ex2_max",
                     [](RunConfig& c) -> double& { return cascade_of(c).kappa_d1_ex2_max; }));
    f.push_back({"cascade", "pulse_shape",
                 [](const RunConfig& c) { return to_string(c.cascade->pulse.shape); },
                 [](RunConfig& c, const std::string& v) {
                   try {
                     cascade_of(c).pulse.shape = pulse_shape_from_string(v);
                   } catch (const Error& e) {
                     fail(ErrorCategory::config, e.what());
                   }
                 }});
    f.push_back(real("cascade", "pulse_delay", [](RunConfig& c) -> double& { return cascade_of(c).pulse.delay; }));
    f.push_back(real("cascade", "pulse_duration",
                     [](RunConfig& c) -> double& { return cascade_of(c).pulse.duration; }));
    f.push_back({"cascade", "probe_mode",
                 [](const RunConfig& c) { return to_string(c.cascade->probe_mode); },
                 [](RunConfig& c, const std::string& v) {
                   try {
                     cascade_of(c).probe_mode = probe_mode_from_string(v);
                   } catch (const Error& e) {
                     fail(ErrorCategory::config, e.what());
                   }
                 }});
    f.push_back(real("cascade", "kappa_d2", [](RunConfig& c) -> double& { return cascade_of(c).kappa_d2; }));
    return f;
  }();
  return fields;
}

const Field* find_field(const std::string& section, const std::string& key) {
  for (const auto* list : {&general_fields(), &cascade_fields()}) {
    for (const auto& f : *list) {
      if (section == f.section && key == f.key) return &f;
    }
  }
  return nullptr;
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCategory::config, std::string("config syntax: ") + e.what());
  }
  const auto scenario = tree.get_optional<std::string>("run.scenario");
  if (!scenario) fail(ErrorCategory::config, "config lacks run.scenario");
  RunConfig c = default_config(scenario_from_string(*scenario));
  if (tree.find("cascade") != tree.not_found()) cascade_of(c);
  for (const auto& [section, body] : tree) {
    if (section == "manifest") continue;
    if (body.empty() && !body.data().empty()) {
      fail(ErrorCategory::config, "key '" + section + "' outside a section");
    }
    for (const auto& [key, value] : body) {
      const Field* f = find_field(section, key);
      if (!f) fail(ErrorCategory::config, "unknown config key '" + section + "." + key + "'");
      f->set(c, value.data());
    }
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::io, "cannot open config '" + path + "'");
  return parse_config(in);
}

void write_config(std::ostream& out, const RunConfig& c) {
  std::string current;
  auto emit = [&](const Field& f) {
    if (current != f.section) {
      if (!current.empty()) out << '\n';
      current = f.section;
      out << '[' << current << "]\n";
    }
    out << f.key << " = " << f.get(c) << '\n';
  };
  for (const auto& f : general_fields()) emit(f);
  if (c.cascade) {
    for (const auto& f : cascade_fields()) emit(f);
  }
}

std::string format_config(const RunConfig& config) {
  std::ostringstream os;
  write_config(os, config);
  return os.str();
}

TruncationSpec parse_truncation(const std::string& text, TruncationSpec base) {
  if (text == "auto") {
    base.automatic = true;
    return base;
  }
  const auto items = split_list(text);
  if (items.empty() || items.size() > 4) {
    fail(ErrorCategory::config, "--truncation expects 'auto' or n_a,n_b[,n_d1[,n_d2]]");
  }
  int* slots[] = {&base.n_a, &base.n_b, &base.n_d1, &base.n_d2};
  for (std::size_t i = 0; i < items.size(); ++i) {
    *slots[i] = parse_int("truncation", items[i]);
    if (*slots[i] < 1) fail(ErrorCategory::config, "truncation levels must be >= 1");
  }
  if (items.size() == 1) base.n_b = base.n_a;
  base.automatic = false;
  return base;
}

}  // namespace qcn::experiments
