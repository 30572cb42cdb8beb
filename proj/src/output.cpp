#include "crossdiff/output.hpp"

#include <fstream>

#include <fmt/core.h>

#include "crossdiff/errors.hpp"

namespace crossdiff {

namespace fs = std::filesystem;

std::string format_number(double v) { return fmt::format("{}", v); }

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

ArtifactWriter::ArtifactWriter(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec || !fs::is_directory(root_))
    throw ConfigError(fmt::format("cannot create output directory '{}': {}", root_.string(), ec.message()));
}

void ArtifactWriter::write(const std::string& relative, const std::string& content) {
  const fs::path path = root_ / relative;
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << content;
  out.close();
  if (!out) throw ConfigError(fmt::format("failed writing '{}'", path.string()));
  artifacts_.push_back(relative);
}

namespace {

std::string coord_header(const Grid& grid) { return grid.dim() == 2 ? "x,y" : "x"; }

std::string coords(const Grid& grid, int c) {
  const Point p = grid.center(c);
  return grid.dim() == 2 ? format_number(p[0]) + "," + format_number(p[1]) : format_number(p[0]);
}

std::string bool_text(bool b) { return b ? "1" : "0"; }

}  // namespace

std::string snapshot_csv(const Field& f, const Grid& grid, const std::vector<std::string>& names) {
  std::string s = coord_header(grid) + ",species,value,t\n";
  const std::string t = format_number(f.time);
  for (int i = 0; i < f.species; ++i)
    for (int c = 0; c < f.cells; ++c)
      s += fmt::format("{},{},{},{}\n", coords(grid, c), names[i], format_number(f.at(i, c)), t);
  return s;
}

std::string series_csv(const SimulationResult& result) {
  std::string s = "t";
  for (const auto& n : result.names) s += fmt::format(",min_{0},max_{0},mass_{0}", n);
  s += "\n";
  for (const SeriesPoint& p : result.series) {
    s += format_number(p.time);
    for (std::size_t i = 0; i < p.min.size(); ++i)
      s += "," + format_number(p.min[i]) + "," + format_number(p.max[i]) + "," + format_number(p.mass[i]);
    s += "\n";
  }
  return s;
}

std::string conditions_csv(const std::vector<ConditionReport>& reports) {
  std::string s = "name,lhs,rhs,margin,pass\n";
  for (const auto& r : reports)
    s += fmt::format("{},{},{},{},{}\n", r.name, format_number(r.lhs), format_number(r.rhs), format_number(r.margin),
                     bool_text(r.pass));
  return s;
}

std::string degiorgi_csv(const DeGiorgiTrace& trace) {
  std::string s = "n,k_n,v_n,rhs_n,holds\n";
  for (std::size_t n = 0; n < trace.k.size(); ++n)
    s += fmt::format("{},{},{},{},{}\n", n, format_number(trace.k[n]), format_number(trace.v[n]),
                     format_number(trace.recursion_rhs[n]), bool_text(trace.holds[n]));
  return s;
}

std::string balance_csv(const BalanceSeries& balance, const std::vector<std::string>& names) {
  std::string s = "t";
  for (const auto& n : names) s += ",residual_" + n;
  s += ",threshold\n";
  for (std::size_t k = 0; k < balance.time.size(); ++k) {
    s += format_number(balance.time[k]);
    for (double r : balance.residual[k]) s += "," + format_number(r);
    s += "," + format_number(balance.threshold[k]) + "\n";
  }
  return s;
}

std::string bounds_csv(const BoundReport& report, const std::vector<std::string>& names, const Grid& grid) {
  std::string s = "species,side,margin,t," + coord_header(grid) + "\n";
  auto row = [&](const std::string& n, const char* side, const BoundSide& b) {
    std::string loc = format_number(b.location[0]);
    if (grid.dim() == 2) loc += "," + format_number(b.location[1]);
    s += fmt::format("{},{},{},{},{}\n", n, side, format_number(b.margin), format_number(b.time), loc);
  };
  for (std::size_t i = 0; i < report.lower.size(); ++i) {
    row(names[i], "lower", report.lower[i]);
    row(names[i], "upper", report.upper[i]);
  }
  return s;
}

std::string profile_csv(const Field& heads, const Grid& grid, double h2) {
  std::string s = coord_header(grid) + ",h,h1,s\n";
  for (int c = 0; c < grid.size(); ++c)
    s += fmt::format("{},{},{},{}\n", coords(grid, c), format_number(heads.at(0, c)), format_number(heads.at(1, c)),
                     format_number(h2 - heads.at(1, c)));
  return s;
}

std::string confinement_csv(const ConfinementReport& report) {
  std::string s = "t,violation,residual\n";
  for (std::size_t k = 0; k < report.time.size(); ++k)
    s += fmt::format("{},{},{}\n", format_number(report.time[k]), format_number(report.violation[k]),
                     format_number(report.residual[k]));
  return s;
}

std::string sweep_csv(const SweepReport& report) {
  std::string s = "epsilon,ok,final_violation,final_residual,max_violation,lin_tol\n";
  for (const SweepRow& r : report.rows)
    s += fmt::format("{},{},{},{},{},{}\n", format_number(r.epsilon), bool_text(r.ok),
                     format_number(r.final_violation), format_number(r.final_residual),
                     format_number(r.max_violation), format_number(r.lin_tol));
  return s;
}

std::string probe_csv(const UniquenessProbeReport& report, const std::vector<std::string>& names) {
  std::string s = "t";
  for (const auto& n : names) s += ",v_norm_" + n;
  s += ",v_norm_total\n";
  for (std::size_t k = 0; k < report.time.size(); ++k) {
    s += format_number(report.time[k]);
    for (double v : report.v_norms[k]) s += "," + format_number(v);
    s += "," + format_number(report.total_norm[k]) + "\n";
  }
  return s;
}

std::string probe_summary_csv(const UniquenessProbeReport& report, const std::vector<std::string>& names) {
  std::string s = "quantity,value\n";
  auto row = [&](const std::string& q, double v) { s += q + "," + format_number(v) + "\n"; };
  row("amplification", report.amplification);
  for (std::size_t i = 0; i < report.grad_energies.size(); ++i) {
    row("grad_energy_" + names[i], report.grad_energies[i]);
    row("cross_energy_" + names[i], report.cross_energies[i]);
    for (std::size_t j = 0; j < report.weighted_energies[i].size(); ++j)
      row(fmt::format("weighted_energy_{}_{}", names[i], names[j]), report.weighted_energies[i][j]);
  }
  const ProbeMargins& m = report.margins;
  for (std::size_t k = 0; k < m.ratio.size(); ++k) row(fmt::format("ratio_{}", k + 1), m.ratio[k]);
  for (std::size_t k = 0; k < m.eps.size(); ++k) row(fmt::format("eps_{}", k + 1), m.eps[k]);
  for (std::size_t k = 0; k < m.margins.size(); ++k) row(fmt::format("margin_{}", k + 1), m.margins[k]);
  if (!m.margins.empty()) row("min_margin", m.min_margin);
  return s;
}

std::string convergence_csv(const ConvergenceTable& table) {
  std::string s = "cells,h,dt,linf,l2,ratio,order_linf,order_l2\n";
  for (const ConvergenceRow& r : table.rows)
    s += fmt::format("{},{},{},{},{},{},{},{}\n", r.cells, format_number(r.h), format_number(r.dt),
                     format_number(r.linf), format_number(r.l2), format_number(r.ratio), format_number(r.order_linf),
                     format_number(r.order_l2));
  return s;
}

void write_run(ArtifactWriter& out, const std::string& prefix, const SimulationResult& result, const Grid& grid,
               bool snapshots) {
  if (snapshots)
    for (std::size_t k = 0; k < result.snapshots.size(); ++k)
      out.write(fmt::format("{}snapshots/snapshot_{:05d}.csv", prefix, k),
                snapshot_csv(result.snapshots[k], grid, result.names));
  out.write(prefix + "series.csv", series_csv(result));
}

}  // namespace crossdiff
