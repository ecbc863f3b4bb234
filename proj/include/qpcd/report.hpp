#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "qpcd/driver.hpp"

namespace qpcd {

/// One CSV line per solve.
struct BenchRow {
  std::string instance;
  std::string mode;
  std::string status;
  double lower = 0.0;
  double upper = 0.0;
  double relgap = 0.0;
  int iterations = 0;
  int cuts_konno = 0;
  int cuts_dnn = 0;
  std::uint64_t lp_calls = 0;
  std::uint64_t sdp_calls = 0;
  double wall_seconds = 0.0;
};

inline BenchRow make_row(const std::string& instance, const SolveReport& rep) {
  return BenchRow{instance,      rep.mode,      to_string(rep.status), rep.lower,    rep.upper,
                  rep.relgap,    rep.iterations, rep.cuts_konno,       rep.cuts_dnn, rep.lp_calls,
                  rep.sdp_calls, rep.wall_seconds};
}

inline const char* csv_header() {
  return "instance,mode,status,lower,upper,relgap,iterations,cuts_konno,cuts_dnn,lp_calls,sdp_calls,wall_seconds";
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Row without the wall time, used to compare runs.
inline std::string csv_fields(const BenchRow& r, bool with_time = true) {
  std::ostringstream os;
  os << csv_escape(r.instance) << ',' << csv_escape(r.mode) << ',' << csv_escape(r.status) << ','
     << csv_number(r.lower) << ',' << csv_number(r.upper) << ',' << csv_number(r.relgap) << ',' << r.iterations << ','
     << r.cuts_konno << ',' << r.cuts_dnn << ',' << r.lp_calls << ',' << r.sdp_calls;
  if (with_time) os << ',' << csv_number(r.wall_seconds);
  return os.str();
}

/// Append-only CSV log. Writes the header only when the file is empty or new.
class CsvLog {
 public:
  explicit CsvLog(std::string path) : path_(std::move(path)) {}

  void append(const BenchRow& row) {
    std::lock_guard<std::mutex> lock(mu_);
    std::error_code ec;
    const bool fresh = !std::filesystem::exists(path_, ec) || std::filesystem::file_size(path_, ec) == 0;
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot open log file " + path_);
    if (fresh) out << csv_header() << '\n';
    out << csv_fields(row) << '\n';
  }

 private:
  std::string path_;
  std::mutex mu_;
};

}  // namespace qpcd
