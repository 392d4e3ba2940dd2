#include "skt/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "skt/errors.hpp"

namespace skt {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);  // binary: same bytes on every platform
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj, int snapshot_every) {
  if (snapshot_every < 1) throw InputError("snapshot_every must be >= 1");
  std::ofstream out = open_out(path);
  if (traj.states.empty()) {
    out << "t,cell,x,y\n";
    return;
  }
  const Field& first = traj.states.front();
  const Grid& g = first.grid;
  out << "t,cell,x,y";
  for (int i = 0; i < first.n; ++i) out << ",u" << (i + 1);
  out << "\n";
  const std::size_t last = traj.states.size() - 1;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    if (k % snapshot_every != 0 && k != last) continue;  // always keep the final state
    const Field& f = traj.states[k];
    for (int c = 0; c < g.ncells(); ++c) {
      const auto x = g.center(c);
      out << fmt17(traj.times[k]) << ',' << c << ',' << fmt17(x[0]) << ',' << fmt17(x[1]);
      for (int i = 0; i < f.n; ++i) out << ',' << fmt17(f.at(i, c));
      out << "\n";
    }
  }
}

void write_series_csv(const std::string& path, const std::vector<SeriesPoint>& series) {
  std::ofstream out = open_out(path);
  int nmass = series.empty() ? 0 : static_cast<int>(series.front().mass.size());
  out << "t,entropy,h_rel,h_cut,h_double";
  for (int i = 0; i < nmass; ++i) out << ",mass" << (i + 1);
  out << ",umin,umax\n";
  for (const auto& p : series) {
    out << fmt17(p.t) << ',' << fmt17(p.entropy) << ',' << fmt17(p.h_rel) << ','
        << fmt17(p.h_cut) << ',' << fmt17(p.h_double);
    for (double m : p.mass) out << ',' << fmt17(m);
    out << ',' << fmt17(p.umin) << ',' << fmt17(p.umax) << "\n";
  }
}

void write_balance_csv(const std::string& path, const EntropyBalanceTerms& terms) {
  std::ofstream out = open_out(path);
  out << "term,value\n";
  for (int i = 0; i < 6; ++i) out << 'G' << (i + 1) << ',' << fmt17(terms.G[i]) << "\n";
  for (int i = 0; i < 12; ++i) out << 'I' << (i + 1) << ',' << fmt17(terms.I[i]) << "\n";
  out << "lhs," << fmt17(terms.lhs) << "\n";
  out << "rhs," << fmt17(terms.rhs()) << "\n";
  out << "residual," << fmt17(terms.residual) << "\n";
  out << "window," << fmt17(terms.window) << "\n";
}

void write_rows_csv(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& rows) {
  std::ofstream out = open_out(path);
  out << "key,value\n";
  for (const auto& [k, v] : rows) out << k << ',' << v << "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
}

}  // namespace skt
