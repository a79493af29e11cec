#include "encctl/trace_io.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace encctl {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double to_double(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "trace line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

std::uint64_t to_u64(const std::string& s, int line) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error(ErrorCode::ConfigError, "trace line " + std::to_string(line) + ": bad count '" + s + "'");
  }
  return v;
}

}  // namespace

void write_trace_csv(std::ostream& os, const Trace& trace, const std::string& scheme) {
  os << kTraceHeader << " scheme=" << scheme << " n=" << trace.n << " m=" << trace.m << '\n';
  os << "step";
  for (int j = 0; j < trace.n; ++j) os << ",x" << j + 1;
  for (int i = 0; i < trace.m; ++i) os << ",u_enc" << i + 1;
  for (int i = 0; i < trace.m; ++i) os << ",u_oracle" << i + 1;
  os << ",enc,dec,hom_mul,hom_add,hom_mul_const,messages,bytes\n";
  for (const auto& r : trace.rows) {
    os << r.step;
    for (Eigen::Index j = 0; j < r.x.size(); ++j) os << ',' << num(r.x(j));
    for (Eigen::Index i = 0; i < r.u_enc.size(); ++i) os << ',' << num(r.u_enc(i));
    for (Eigen::Index i = 0; i < r.u_oracle.size(); ++i) os << ',' << num(r.u_oracle(i));
    os << ',' << r.ops.enc << ',' << r.ops.dec << ',' << r.ops.hom_mul << ',' << r.ops.hom_add << ','
       << r.ops.hom_mul_const << ',' << r.messages << ',' << r.bytes << '\n';
  }
}

Trace read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind(kTraceHeader, 0) != 0) {
    throw Error(ErrorCode::ConfigError, "trace: missing '" + std::string(kTraceHeader) + "' header");
  }
  Trace t;
  {
    std::stringstream ss(line.substr(std::string(kTraceHeader).size()));
    std::string kv;
    while (ss >> kv) {
      if (kv.rfind("n=", 0) == 0) t.n = std::stoi(kv.substr(2));
      if (kv.rfind("m=", 0) == 0) t.m = std::stoi(kv.substr(2));
    }
  }
  if (t.n < 1 || t.m < 1) throw Error(ErrorCode::ConfigError, "trace: header lacks n= and m=");
  if (!std::getline(is, line)) throw Error(ErrorCode::ConfigError, "trace: missing column row");
  const auto expect = static_cast<std::size_t>(1 + t.n + 2 * t.m + 7);
  if (split_csv(line).size() != expect) throw Error(ErrorCode::ConfigError, "trace: column count mismatch");
  int lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != expect) {
      throw Error(ErrorCode::ConfigError, "trace line " + std::to_string(lineno) + ": wrong field count");
    }
    TraceRow r;
    std::size_t k = 0;
    r.step = static_cast<int>(to_u64(c[k++], lineno));
    r.x.resize(t.n);
    r.u_enc.resize(t.m);
    r.u_oracle.resize(t.m);
    for (int j = 0; j < t.n; ++j) r.x(j) = to_double(c[k++], lineno);
    for (int i = 0; i < t.m; ++i) r.u_enc(i) = to_double(c[k++], lineno);
    for (int i = 0; i < t.m; ++i) r.u_oracle(i) = to_double(c[k++], lineno);
    r.ops.enc = to_u64(c[k++], lineno);
    r.ops.dec = to_u64(c[k++], lineno);
    r.ops.hom_mul = to_u64(c[k++], lineno);
    r.ops.hom_add = to_u64(c[k++], lineno);
    r.ops.hom_mul_const = to_u64(c[k++], lineno);
    r.messages = to_u64(c[k++], lineno);
    r.bytes = to_u64(c[k++], lineno);
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace encctl
