#pragma once

#include <iosfwd>
#include <string>

#include "encctl/linctrl.hpp"

namespace encctl {

inline constexpr const char* kTraceHeader = "# encctl-trace v1";

// Columns: step, x1..xn, u_enc1..m, u_oracle1..m, enc, dec, hom_mul, hom_add,
// hom_mul_const, messages, bytes.
void write_trace_csv(std::ostream& os, const Trace& trace, const std::string& scheme);
Trace read_trace_csv(std::istream& is);

}  // namespace encctl
