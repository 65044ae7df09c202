#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sfcsim/errors.hpp"
#include "sfcsim/scenario.hpp"

namespace sfcsim {

// Scenario documents are sectioned key/value text:
//
//   # comment
//   base_case = 3
//
//   [control]
//   i_max = 1.8 pu
//   t_c   = 50 ms
//
//   [fault]
//   impedance = 0 + j0.13 pu
//
// Every physical quantity carries its unit. Repeated keys or sections are
// errors. Unspecified fields keep the value of the base scenario.

class ScenarioError : public InputError {
 public:
  ScenarioError(const std::string& path, int line, const std::string& what)
      : InputError(format(path, line, what)), path_(path), line_(line) {}

  const std::string& path() const { return path_; }
  int line() const { return line_; }

 private:
  static std::string format(const std::string& path, int line, const std::string& what) {
    std::ostringstream os;
    os << "scenario";
    if (line > 0) os << " line " << line;
    if (!path.empty()) os << " [" << path << "]";
    os << ": " << what;
    return os.str();
  }

  std::string path_;
  int line_;
};

namespace scenario_detail {

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;

  std::string path() const { return section.empty() ? key : section + "." + key; }
};

struct Document {
  std::vector<Entry> entries;
  std::vector<std::pair<std::string, int>> sections;  // in order of appearance
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline bool valid_name(const std::string& s) {
  static const std::regex re(R"([A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z0-9_]+)*)");
  return std::regex_match(s, re);
}

inline Document parse_document(const std::string& text) {
  Document doc;
  std::map<std::string, int> seen_keys;
  std::map<std::string, int> seen_sections;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ScenarioError("", line_no, "unterminated section header '" + line + "'");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!valid_name(section)) throw ScenarioError("", line_no, "invalid section name '" + section + "'");
      if (auto it = seen_sections.find(section); it != seen_sections.end()) {
        throw ScenarioError(section, line_no,
                            "duplicate section '" + section + "' (first at line " + std::to_string(it->second) + ")");
      }
      seen_sections[section] = line_no;
      doc.sections.emplace_back(section, line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ScenarioError("", line_no, "expected 'key = value', got '" + line + "'");
    Entry e{section, trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)),
            line_no};
    if (!valid_name(e.key) || e.key.find('.') != std::string::npos) {
      throw ScenarioError(e.path(), line_no, "invalid key '" + e.key + "'");
    }
    if (e.value.empty()) throw ScenarioError(e.path(), line_no, "missing value for key '" + e.key + "'");
    if (auto it = seen_keys.find(e.path()); it != seen_keys.end()) {
      throw ScenarioError(e.path(), line_no,
                          "duplicate key '" + e.path() + "' (first at line " + std::to_string(it->second) + ")");
    }
    seen_keys[e.path()] = line_no;
    doc.entries.push_back(std::move(e));
  }
  return doc;
}

inline bool parse_real(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size() && std::isfinite(out);
}

// Accepts "a", "a + jb", "a - jb", "jb", "-jb" (spaces optional).
inline bool parse_complex(std::string_view text, Complex& out) {
  std::string s;
  for (char c : text) {
    if (c != ' ' && c != '\t') s.push_back(c);
  }
  if (s.empty()) return false;
  const auto j = s.find('j');
  if (j == std::string::npos) {
    double re = 0.0;
    if (!parse_real(s, re)) return false;
    out = {re, 0.0};
    return true;
  }
  if (s.find('j', j + 1) != std::string::npos) return false;
  // sign directly in front of j belongs to the imaginary part
  std::size_t split = j;
  bool negative = false;
  if (j > 0 && (s[j - 1] == '+' || s[j - 1] == '-')) {
    split = j - 1;
    negative = s[j - 1] == '-';
  }
  double re = 0.0;
  double im = 0.0;
  if (split > 0 && !parse_real(std::string_view(s).substr(0, split), re)) return false;
  if (split == j && j > 0) return false;  // "2j3"-style garbage
  if (!parse_real(std::string_view(s).substr(j + 1), im)) return false;
  out = {re, negative ? -im : im};
  return true;
}

struct Quantity {
  std::string number;
  std::string unit;
};

inline Quantity split_unit(const std::string& value) {
  const auto sp = value.find_last_of(" \t");
  if (sp == std::string::npos) return {value, ""};
  const std::string last = value.substr(sp + 1);
  Complex probe;
  if (parse_complex(last, probe)) return {value, ""};
  return {trim(std::string_view(value).substr(0, sp)), last};
}

inline std::string format_real(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::string format_complex(Complex z) {
  std::string s = format_real(z.real());
  s += std::signbit(z.imag()) ? " - j" : " + j";
  s += format_real(std::abs(z.imag()));
  return s;
}

// Unit -> scale into the stored unit, for one physical dimension.
using UnitTable = std::map<std::string, double>;

inline const UnitTable kPowerMw{{"MW", 1.0}, {"kW", 1e-3}, {"W", 1e-6}};
inline const UnitTable kPowerMvar{{"Mvar", 1.0}, {"kvar", 1e-3}, {"var", 1e-6}};
inline const UnitTable kApparentMva{{"MVA", 1.0}, {"kVA", 1e-3}};
inline const UnitTable kVoltageKv{{"kV", 1.0}, {"V", 1e-3}};
inline const UnitTable kFrequencyHz{{"Hz", 1.0}};
inline const UnitTable kTimeS{{"s", 1.0}, {"ms", 1e-3}};
inline const UnitTable kDistanceKm{{"km", 1.0}, {"m", 1e-3}};
inline const UnitTable kInductanceH{{"H", 1.0}, {"mH", 1e-3}};
inline const UnitTable kPerUnit{{"pu", 1.0}, {"%", 1e-2}};
inline const UnitTable kStrictPu{{"pu", 1.0}};
inline const UnitTable kPerSecond{{"1/s", 1.0}};
inline const UnitTable kAngleRad{{"rad", 1.0}, {"deg", 3.14159265358979323846 / 180.0}};

class Applier {
 public:
  explicit Applier(const Entry& e) : e_(e) {}

  [[noreturn]] void fail(const std::string& what) const { throw ScenarioError(e_.path(), e_.line, what); }

  double real(const UnitTable& units) const {
    const Quantity q = split_unit(e_.value);
    if (q.unit.empty()) fail("missing unit for '" + e_.path() + "' (expected one of " + names(units) + ")");
    const auto it = units.find(q.unit);
    if (it == units.end()) fail("unit '" + q.unit + "' not valid here (expected one of " + names(units) + ")");
    double v = 0.0;
    if (!parse_real(q.number, v)) fail("not a number: '" + q.number + "'");
    return v * it->second;
  }

  double plain() const {
    double v = 0.0;
    if (!parse_real(e_.value, v)) fail("expected a dimensionless number, got '" + e_.value + "'");
    return v;
  }

  long integer() const {
    long v = 0;
    const auto [p, ec] = std::from_chars(e_.value.data(), e_.value.data() + e_.value.size(), v);
    if (ec != std::errc{} || p != e_.value.data() + e_.value.size()) fail("expected an integer, got '" + e_.value + "'");
    return v;
  }

  bool boolean() const {
    if (e_.value == "true") return true;
    if (e_.value == "false") return false;
    fail("expected true or false, got '" + e_.value + "'");
  }

  ImpedanceValue impedance(bool per_km) const {
    const Quantity q = split_unit(e_.value);
    const std::string ohm = per_km ? "ohm/km" : "ohm";
    const std::string pu = per_km ? "pu/km" : "pu";
    if (q.unit.empty()) fail("missing unit for '" + e_.path() + "' (expected " + ohm + " or " + pu + ")");
    if (q.unit != ohm && q.unit != pu) fail("unit '" + q.unit + "' not valid here (expected " + ohm + " or " + pu + ")");
    Complex z;
    if (!parse_complex(q.number, z)) fail("not a complex number: '" + q.number + "'");
    return {z, q.unit == pu};
  }

  const std::string& text() const { return e_.value; }

 private:
  static std::string names(const UnitTable& units) {
    std::string s;
    for (const auto& [k, v] : units) s += (s.empty() ? "" : ", ") + k;
    return s;
  }

  const Entry& e_;
};

inline FaultCase& fault_slot(Scenario& s, const std::string& label) {
  for (FaultCase& f : s.faults) {
    if (f.label == label) return f;
  }
  FaultCase f;
  f.label = label;
  s.faults.push_back(f);
  return s.faults.back();
}

inline void apply_entry(Scenario& s, const Entry& e, std::set<std::string>& disabled_faults) {
  const Applier a(e);
  const std::string& sec = e.section;
  const std::string& k = e.key;
  auto unknown = [&]() { a.fail("unknown key '" + e.path() + "'"); };

  if (sec.empty()) {
    if (k == "name") s.name = a.text();
    else if (k == "base_case") a.fail("base_case must be the first entry of the document");
    else unknown();
  } else if (sec == "system") {
    if (k == "s_base") s.s_base_mva = a.real(kApparentMva);
    else if (k == "v_base") s.v_base_kv = a.real(kVoltageKv);
    else if (k == "f_base") s.f_base_hz = a.real(kFrequencyHz);
    else unknown();
  } else if (sec == "sfc") {
    if (k == "transformer_rating") s.transformer_rating_mva = a.real(kApparentMva);
    else if (k == "transformer_leakage") s.transformer_leakage_pu = a.real(kPerUnit);
    else if (k == "filter_inductance") s.filter_inductance_h = a.real(kInductanceH);
    else unknown();
  } else if (sec == "rfc") {
    if (k == "xq_motor") s.xq_motor_pu = a.real(kStrictPu);
    else if (k == "motor_transformer_leakage") s.motor_transformer_leakage_pu = a.real(kPerUnit);
    else if (k == "motor_transformer_rating") s.motor_transformer_rating_mva = a.real(kApparentMva);
    else if (k == "xq_generator") s.xq_generator_pu = a.real(kStrictPu);
    else if (k == "generator_transformer_leakage") s.generator_transformer_leakage_pu = a.real(kPerUnit);
    else if (k == "generator_transformer_rating") s.generator_transformer_rating_mva = a.real(kApparentMva);
    else if (k == "raw_reactances") s.raw_reactances = a.boolean();
    else if (k == "droop") s.droop_pu = a.real(kPerUnit);
    else if (k == "u0") s.u0_pu = a.real(kStrictPu);
    else if (k == "theta_50") s.theta_50_rad = a.real(kAngleRad);
    else unknown();
  } else if (sec == "control") {
    ControlGains& g = s.gains;
    if (k == "kp_v") g.kp_v = a.plain();
    else if (k == "ki_v") g.ki_v = a.real(kPerSecond);
    else if (k == "kp_a") g.kp_a = a.plain();
    else if (k == "ki_a") g.ki_a = a.real(kPerSecond);
    else if (k == "kp_cl") g.kp_cl = a.plain();
    else if (k == "ki_cl") g.ki_cl = a.real(kPerSecond);
    else if (k == "t_c") g.t_c = a.real(kTimeS);
    else if (k == "t_i") g.t_i = a.real(kTimeS);
    else if (k == "e_max") g.e_max = a.real(kStrictPu);
    else if (k == "i_max") g.i_max = a.real(kStrictPu);
    else if (k == "anti_windup_voltage") g.anti_windup_voltage = a.boolean();
    else if (k == "anti_windup_angle") g.anti_windup_angle = a.boolean();
    else unknown();
  } else if (sec == "feeder") {
    if (k == "z_init") s.z_init = a.impedance(false);
    else if (k == "z_per_km") s.z_per_km = a.impedance(true);
    else if (k == "load_position") s.load_position_km = a.real(kDistanceKm);
    else unknown();
  } else if (sec == "load") {
    if (k == "p") s.p_load_mw = a.real(kPowerMw);
    else if (k == "q") s.q_load_mvar = a.real(kPowerMvar);
    else unknown();
  } else if (sec == "fault" || sec.rfind("fault.", 0) == 0) {
    const std::string label = sec == "fault" ? "" : sec.substr(6);
    FaultCase& f = fault_slot(s, label);
    if (k == "impedance") f.impedance = a.impedance(false);
    else if (k == "position") f.position_km = a.real(kDistanceKm);
    else if (k == "onset") f.onset_s = a.real(kTimeS);
    else if (k == "duration") f.duration_s = a.real(kTimeS);
    else if (k == "enabled") {
      if (!a.boolean()) disabled_faults.insert(label);
    } else unknown();
  } else if (sec == "solver") {
    SimConfig& c = s.solver;
    if (k == "t_end") s.t_end_s = a.real(kTimeS);
    else if (k == "rel_tol") c.rel_tol = a.plain();
    else if (k == "abs_tol") c.abs_tol = a.plain();
    else if (k == "max_step") c.max_step = a.real(kTimeS);
    else if (k == "output_dt") c.output_dt = a.real(kTimeS);
    else unknown();
  } else if (sec == "measured") {
    if (k == "path") s.measured_path = a.text();
    else unknown();
  } else {
    a.fail("unknown section '" + sec + "'");
  }
}

}  // namespace scenario_detail

// Applies a scenario document on top of `base`. A leading `base_case = N`
// replaces `base` with builtin case N first. The result is validated by
// resolving it (component invariants and load flow) before it is returned.
inline Scenario load_scenario(const std::string& text, const Scenario& base = default_scenario(),
                              bool validate = true) {
  using namespace scenario_detail;
  const Document doc = parse_document(text);
  Scenario s = base;
  std::set<std::string> disabled;
  for (std::size_t i = 0; i < doc.entries.size(); ++i) {
    const Entry& e = doc.entries[i];
    if (e.section.empty() && e.key == "base_case") {
      if (i != 0) Applier(e).fail("base_case must be the first entry of the document");
      try {
        s = builtin_case(static_cast<int>(Applier(e).integer()));
      } catch (const ScenarioError&) {
        throw;
      } catch (const InputError& err) {
        Applier(e).fail(err.what());
      }
      continue;
    }
    apply_entry(s, e, disabled);
  }
  std::erase_if(s.faults, [&](const FaultCase& f) { return disabled.count(f.label) > 0; });

  if (validate) {
    try {
      (void)resolve(s);
    } catch (const ScenarioError&) {
      throw;
    } catch (const Error& err) {
      throw ScenarioError("", 0, std::string("invalid scenario: ") + err.what());
    }
  }
  return s;
}

inline Scenario load_scenario_file(const std::string& path, const Scenario& base = default_scenario()) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str(), base);
}

// Single "section.key = value" override, e.g. ("control.i_max", "1.5 pu").
inline Scenario apply_override(const Scenario& base, const std::string& path, const std::string& value,
                               bool validate = true) {
  const auto dot = path.rfind('.');
  const std::string text = dot == std::string::npos
                               ? path + " = " + value + "\n"
                               : "[" + path.substr(0, dot) + "]\n" + path.substr(dot + 1) + " = " + value + "\n";
  return load_scenario(text, base, validate);
}

// Complete document for a scenario; load_scenario(serialize(s)) == s.
inline std::string serialize(const Scenario& s) {
  using scenario_detail::format_complex;
  using scenario_detail::format_real;
  auto imp = [](const ImpedanceValue& z, bool per_km) {
    return format_complex(z.value) + " " + (z.per_unit ? "pu" : "ohm") + (per_km ? "/km" : "");
  };
  auto b = [](bool v) { return v ? "true" : "false"; };
  const ControlGains& g = s.gains;
  std::ostringstream os;
  if (!s.name.empty()) os << "name = " << s.name << "\n\n";
  os << "[system]\n"
     << "s_base = " << format_real(s.s_base_mva) << " MVA\n"
     << "v_base = " << format_real(s.v_base_kv) << " kV\n"
     << "f_base = " << format_real(s.f_base_hz) << " Hz\n\n";
  os << "[sfc]\n"
     << "transformer_rating = " << format_real(s.transformer_rating_mva) << " MVA\n"
     << "transformer_leakage = " << format_real(s.transformer_leakage_pu) << " pu\n"
     << "filter_inductance = " << format_real(s.filter_inductance_h) << " H\n\n";
  os << "[rfc]\n"
     << "xq_motor = " << format_real(s.xq_motor_pu) << " pu\n"
     << "motor_transformer_leakage = " << format_real(s.motor_transformer_leakage_pu) << " pu\n"
     << "motor_transformer_rating = " << format_real(s.motor_transformer_rating_mva) << " MVA\n"
     << "xq_generator = " << format_real(s.xq_generator_pu) << " pu\n"
     << "generator_transformer_leakage = " << format_real(s.generator_transformer_leakage_pu) << " pu\n"
     << "generator_transformer_rating = " << format_real(s.generator_transformer_rating_mva) << " MVA\n"
     << "raw_reactances = " << b(s.raw_reactances) << "\n"
     << "droop = " << format_real(s.droop_pu) << " pu\n"
     << "u0 = " << format_real(s.u0_pu) << " pu\n"
     << "theta_50 = " << format_real(s.theta_50_rad) << " rad\n\n";
  os << "[control]\n"
     << "kp_v = " << format_real(g.kp_v) << "\n"
     << "ki_v = " << format_real(g.ki_v) << " 1/s\n"
     << "kp_a = " << format_real(g.kp_a) << "\n"
     << "ki_a = " << format_real(g.ki_a) << " 1/s\n"
     << "kp_cl = " << format_real(g.kp_cl) << "\n"
     << "ki_cl = " << format_real(g.ki_cl) << " 1/s\n"
     << "t_c = " << format_real(g.t_c) << " s\n"
     << "t_i = " << format_real(g.t_i) << " s\n"
     << "e_max = " << format_real(g.e_max) << " pu\n"
     << "i_max = " << format_real(g.i_max) << " pu\n"
     << "anti_windup_voltage = " << b(g.anti_windup_voltage) << "\n"
     << "anti_windup_angle = " << b(g.anti_windup_angle) << "\n\n";
  os << "[feeder]\n"
     << "z_init = " << imp(s.z_init, false) << "\n"
     << "z_per_km = " << imp(s.z_per_km, true) << "\n";
  if (s.load_position_km) os << "load_position = " << format_real(*s.load_position_km) << " km\n";
  os << "\n[load]\n"
     << "p = " << format_real(s.p_load_mw) << " MW\n"
     << "q = " << format_real(s.q_load_mvar) << " Mvar\n";
  for (const FaultCase& f : s.faults) {
    os << "\n[" << (f.label.empty() ? "fault" : "fault." + f.label) << "]\n"
       << "impedance = " << imp(f.impedance, false) << "\n"
       << "position = " << format_real(f.position_km) << " km\n"
       << "onset = " << format_real(f.onset_s) << " s\n"
       << "duration = " << format_real(f.duration_s) << " s\n";
  }
  os << "\n[solver]\n";
  if (s.t_end_s) os << "t_end = " << format_real(*s.t_end_s) << " s\n";
  os << "rel_tol = " << format_real(s.solver.rel_tol) << "\n"
     << "abs_tol = " << format_real(s.solver.abs_tol) << "\n"
     << "max_step = " << format_real(s.solver.max_step) << " s\n"
     << "output_dt = " << format_real(s.solver.output_dt) << " s\n";
  if (s.measured_path) os << "\n[measured]\npath = " << *s.measured_path << "\n";
  return os.str();
}

}  // namespace sfcsim
