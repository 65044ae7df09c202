#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sfcsim/errors.hpp"
#include "sfcsim/simulator.hpp"

namespace sfcsim {

// Trace CSV: one header line, then one row per output sample.
inline constexpr const char* kTraceHeader = "time_s,u_pu,i_pu,p_pu,q_pu,e_pu,delta_rad,limiting,int_v,int_cl";

// Three aligned columns; what the comparison works on. Both simulated traces
// and measured recordings (columns time_s, u_pu, i_pu) load into this.
struct RmsSeries {
  std::vector<double> time;
  std::vector<double> u;
  std::vector<double> i;

  std::size_t size() const { return time.size(); }
};

inline RmsSeries rms_series(const TraceSet& tr) { return {tr.time, tr.u_mag, tr.i_mag}; }

namespace csv_detail {

inline std::string num(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

inline double cell_value(const std::string& cell, const std::string& where) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || p != cell.data() + cell.size()) throw InputError(where + ": not a number '" + cell + "'");
  return v;
}

struct Table {
  std::map<std::string, std::size_t> columns;
  std::vector<std::vector<double>> rows;
};

inline Table read_table(std::istream& in, const std::string& name) {
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw InputError(name + ": empty CSV");
  const auto header = split(line);
  for (std::size_t c = 0; c < header.size(); ++c) t.columns[header[c]] = c;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw InputError(name + " line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " columns, got " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(cell_value(c, name + " line " + std::to_string(line_no)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline std::size_t column(const Table& t, const std::string& col, const std::string& name) {
  const auto it = t.columns.find(col);
  if (it == t.columns.end()) throw InputError(name + ": missing column '" + col + "'");
  return it->second;
}

inline std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path + "'");
  return in;
}

}  // namespace csv_detail

inline void write_trace_csv(std::ostream& os, const TraceSet& tr) {
  using csv_detail::num;
  os << kTraceHeader << '\n';
  for (std::size_t k = 0; k < tr.size(); ++k) {
    os << num(tr.time[k]) << ',' << num(tr.u_mag[k]) << ',' << num(tr.i_mag[k]) << ',' << num(tr.p_g[k]) << ','
       << num(tr.q_g[k]) << ',' << num(tr.e_mag[k]) << ',' << num(tr.delta[k]) << ',' << tr.limiting[k] << ','
       << num(tr.int_v[k]) << ',' << num(tr.int_cl[k]) << '\n';
  }
}

inline void write_trace_csv(const std::string& path, const TraceSet& tr) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write '" + path + "'");
  write_trace_csv(os, tr);
  if (!os) throw InputError("write failed for '" + path + "'");
}

inline TraceSet read_trace_csv(std::istream& in, const std::string& name = "trace") {
  using namespace csv_detail;
  const Table t = read_table(in, name);
  const std::size_t c_t = column(t, "time_s", name), c_u = column(t, "u_pu", name), c_i = column(t, "i_pu", name),
                    c_p = column(t, "p_pu", name), c_q = column(t, "q_pu", name), c_e = column(t, "e_pu", name),
                    c_d = column(t, "delta_rad", name), c_l = column(t, "limiting", name),
                    c_iv = column(t, "int_v", name), c_icl = column(t, "int_cl", name);
  TraceSet tr;
  for (const auto& r : t.rows) {
    tr.time.push_back(r[c_t]);
    tr.u_mag.push_back(r[c_u]);
    tr.i_mag.push_back(r[c_i]);
    tr.p_g.push_back(r[c_p]);
    tr.q_g.push_back(r[c_q]);
    tr.e_mag.push_back(r[c_e]);
    tr.delta.push_back(r[c_d]);
    tr.limiting.push_back(r[c_l] != 0.0 ? 1 : 0);
    tr.int_v.push_back(r[c_iv]);
    tr.int_cl.push_back(r[c_icl]);
  }
  return tr;
}

inline TraceSet read_trace_csv(const std::string& path) {
  auto in = csv_detail::open(path);
  return read_trace_csv(in, path);
}

// Any CSV with time_s, u_pu and i_pu columns; time must be strictly increasing.
inline RmsSeries read_rms_csv(std::istream& in, const std::string& name = "series") {
  using namespace csv_detail;
  const Table t = read_table(in, name);
  const std::size_t c_t = column(t, "time_s", name), c_u = column(t, "u_pu", name), c_i = column(t, "i_pu", name);
  RmsSeries s;
  for (const auto& r : t.rows) {
    if (!s.time.empty() && !(r[c_t] > s.time.back())) throw InputError(name + ": time_s must be strictly increasing");
    s.time.push_back(r[c_t]);
    s.u.push_back(r[c_u]);
    s.i.push_back(r[c_i]);
  }
  if (s.size() < 2) throw InputError(name + ": need at least two samples");
  return s;
}

inline RmsSeries read_rms_csv(const std::string& path) {
  auto in = csv_detail::open(path);
  return read_rms_csv(in, path);
}

inline void write_rms_csv(std::ostream& os, const RmsSeries& s) {
  using csv_detail::num;
  os << "time_s,u_pu,i_pu\n";
  for (std::size_t k = 0; k < s.size(); ++k) os << num(s.time[k]) << ',' << num(s.u[k]) << ',' << num(s.i[k]) << '\n';
}

}  // namespace sfcsim
