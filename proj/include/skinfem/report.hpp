#pragma once

// Study reports: a deterministic CSV table (fixed %.12e formatting, no
// timing data), a JSON summary carrying the config echo, verdicts, slopes,
// and wall times, and an optional gnuplot-friendly .dat mirror.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "skinfem/core.hpp"

namespace skinfem {

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Report {
  struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
  };

  std::string study;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<Table> extra_tables;
  std::vector<Verdict> verdicts;
  nlohmann::json summary;

  bool all_pass() const {
    for (const auto& v : verdicts)
      if (!v.pass) return false;
    return true;
  }

  void add_verdict(const std::string& name, bool pass, const std::string& detail) {
    verdicts.push_back({name, pass, detail});
  }

  void finalize_summary() {
    nlohmann::json vj = nlohmann::json::array();
    for (const auto& v : verdicts)
      vj.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
    summary["study"] = study;
    summary["verdicts"] = vj;
    summary["all_pass"] = all_pass();
  }

  void write_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    for (std::size_t i = 0; i < columns.size(); ++i)
      f << (i ? "," : "") << columns[i];
    f << '\n';
    char buf[64];
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12e", row[i]);
        f << (i ? "," : "") << buf;
      }
      f << '\n';
    }
  }

  void write_dat(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << "#";
    for (const auto& c : columns) f << ' ' << c;
    f << '\n';
    char buf[64];
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12e", row[i]);
        f << (i ? " " : "") << buf;
      }
      f << '\n';
    }
  }

  void write_summary(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << summary.dump(2) << '\n';
  }
};

class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace skinfem
