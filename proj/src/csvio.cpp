#include "kk/csvio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kk {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* coord_name(int i, int base_dim, bool bundle) {
  static const char* names[] = {"t", "x", "y", "z"};
  if (bundle && i == base_dim) return "fiber";
  return names[i];
}

}  // namespace

void atomic_write_text(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
  }
  fs::rename(tmp, p);
}

void CsvWriter::add_row(const std::vector<double>& row) { rows_.push_back(row); }

std::string CsvWriter::to_string() const {
  std::ostringstream out;
  if (!comment_.empty()) out << "# " << comment_ << "\n";
  for (size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
  out << "\n";
  for (const auto& r : rows_) {
    for (size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << fmt(r[i]);
    out << "\n";
  }
  return out.str();
}

void CsvWriter::write(const std::string& path) const { atomic_write_text(path, to_string()); }

std::string csv_comment(uint64_t config_hash, double abs_tol, double rel_tol) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "config=%016llx abs_tol=%.3g rel_tol=%.3g",
                static_cast<unsigned long long>(config_hash), abs_tol, rel_tol);
  return buf;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path,
                          const std::string& comment) {
  const bool bundle = traj.kind == Trajectory::Kind::geodesic5d;
  const int n = bundle ? traj.base_dim + 1 : traj.base_dim;
  std::vector<std::string> cols{"parameter"};
  for (int i = 0; i < n; ++i) cols.push_back(coord_name(i, traj.base_dim, bundle));
  for (int i = 0; i < n; ++i)
    cols.push_back(std::string("v_") + coord_name(i, traj.base_dim, bundle));
  cols.insert(cols.end(), {"t", "t_0", "t_r", "norm_drift", "r_drift"});

  CsvWriter w(comment, cols);
  for (const auto& s : traj.samples) {
    std::vector<double> row{s.parameter};
    for (int i = 0; i < n; ++i) row.push_back(s.position[i]);
    for (int i = 0; i < n; ++i) row.push_back(s.velocity[i]);
    row.insert(row.end(), {s.t, s.t0, s.tr, s.norm_drift, s.aux_drift});
    w.add_row(row);
  }
  w.write(path);
}

void write_clock_table_csv(const ProjectionResult& pr, const std::string& path,
                           const std::string& comment) {
  const int d = pr.samples.empty() ? 0 : pr.samples.front().x.size();
  std::vector<std::string> cols{"t_r"};
  for (int i = 0; i < d; ++i) cols.push_back(coord_name(i, d, false));
  for (int i = 0; i < d; ++i) cols.push_back(std::string("dxdtr_") + coord_name(i, d, false));
  cols.insert(cols.end(), {"t", "t_0", "omega_r", "a", "gr_norm_defect"});
  CsvWriter w(comment, cols);
  for (const auto& s : pr.samples) {
    std::vector<double> row{s.tr};
    for (int i = 0; i < d; ++i) row.push_back(s.x[i]);
    for (int i = 0; i < d; ++i) row.push_back(s.dxdtr[i]);
    row.insert(row.end(), {s.t, s.t0, s.omega_r, s.a, s.gr_norm_defect});
    w.add_row(row);
  }
  w.write(path);
}

void write_deviation_csv(const DeviationReport& rep, const std::string& path,
                         const std::string& comment) {
  CsvWriter w(comment, {"t_r", "position_dev", "velocity_dev", "clock_dev"});
  for (const auto& r : rep.rows) w.add_row({r.tr, r.position_dev, r.velocity_dev, r.clock_dev});
  w.write(path);
}

int CsvTable::column_index(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::runtime_error("no CSV column named '" + name + "'");
  return static_cast<int>(it - columns.begin());
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (t.columns.empty()) {
      t.columns = cells;
      continue;
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto& c : cells) row.push_back(std::strtod(c.c_str(), nullptr));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<PlotSeries>& series, bool log_y) {
  const int W = 820, H = 560, ML = 70, MR = 20, MT = 40, MB = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  auto ty = [&](double y) { return log_y ? std::log10(std::max(y, 1e-300)) : y; };
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, ty(s.y[i]));
      ymax = std::max(ymax, ty(s.y[i]));
    }
  if (!(xmax > xmin)) xmax = xmin + 1;
  if (!(ymax > ymin)) ymax = ymin + 1;
  auto px = [&](double x) { return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR); };
  auto py = [&](double y) { return H - MB - (ty(y) - ymin) / (ymax - ymin) * (H - MT - MB); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                 "#8c564b"};
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
      << "</text>\n";
  // axes
  out << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR << "\" y2=\""
      << H - MB << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\"" << H - MB
      << "\" stroke=\"black\"/>\n";
  char lbl[64];
  std::snprintf(lbl, sizeof lbl, "%.6g", xmin);
  out << "<text x=\"" << ML << "\" y=\"" << H - MB + 18 << "\" font-size=\"12\">" << lbl
      << "</text>\n";
  std::snprintf(lbl, sizeof lbl, "%.6g", xmax);
  out << "<text x=\"" << W - MR << "\" y=\"" << H - MB + 18
      << "\" text-anchor=\"end\" font-size=\"12\">" << lbl << "</text>\n";
  std::snprintf(lbl, sizeof lbl, log_y ? "1e%.3g" : "%.6g", log_y ? ymin : ymin);
  out << "<text x=\"" << ML - 6 << "\" y=\"" << H - MB << "\" text-anchor=\"end\" font-size=\"12\">"
      << lbl << "</text>\n";
  std::snprintf(lbl, sizeof lbl, log_y ? "1e%.3g" : "%.6g", log_y ? ymax : ymax);
  out << "<text x=\"" << ML - 6 << "\" y=\"" << MT + 4 << "\" text-anchor=\"end\" font-size=\"12\">"
      << lbl << "</text>\n";

  int ci = 0;
  for (const auto& s : series) {
    const char* col = colors[ci % 6];
    out << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) out << px(s.x[i]) << "," << py(s.y[i]) << " ";
    out << "\"/>\n";
    out << "<text x=\"" << W - MR - 8 << "\" y=\"" << MT + 16 + 16 * ci
        << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << col << "\">" << s.name
        << "</text>\n";
    ++ci;
  }
  out << "</svg>\n";
  atomic_write_text(path, out.str());
}

}  // namespace kk
