#ifndef KK_CSVIO_HPP
#define KK_CSVIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "kk/dynamics.hpp"
#include "kk/projection.hpp"

namespace kk {

// Minimal CSV emitter. Every file carries one comment line with the config
// hash and tolerances, then a header row. Files are written to a temporary
// name and renamed into place so readers never see partial output.
class CsvWriter {
public:
  CsvWriter(std::string comment, std::vector<std::string> columns)
      : comment_(std::move(comment)), columns_(std::move(columns)) {}

  void add_row(const std::vector<double>& row);
  void write(const std::string& path) const;
  std::string to_string() const;

private:
  std::string comment_;
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

std::string csv_comment(uint64_t config_hash, double abs_tol, double rel_tol);

// Column layout: parameter, coordinates, velocity, t, t_0, t_r, norm and
// charge-ratio drift. Coordinate names follow t,x,y,z plus "fiber".
void write_trajectory_csv(const Trajectory& traj, const std::string& path,
                          const std::string& comment);

void write_clock_table_csv(const ProjectionResult& pr, const std::string& path,
                           const std::string& comment);

void write_deviation_csv(const DeviationReport& rep, const std::string& path,
                         const std::string& comment);

// Simple numeric table read-back (skips '#' comments; first row = header).
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  int column_index(const std::string& name) const;
};
CsvTable read_csv(const std::string& path);

// Standalone SVG line plot; series share the x column.
struct PlotSeries {
  std::string name;
  std::vector<double> x, y;
};
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<PlotSeries>& series, bool log_y = false);

void atomic_write_text(const std::string& path, const std::string& content);

}  // namespace kk

#endif
