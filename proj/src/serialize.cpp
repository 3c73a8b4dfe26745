#include "rstar/serialize.hpp"

#include <cmath>
#include <cstdio>

namespace rstar {

namespace {

void check_finite(const nlohmann::json& j) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) {
    throw Error(ErrorCode::NonFinite, "refusing to serialize a non-finite value");
  }
  if (j.is_structured()) {
    for (const auto& item : j) check_finite(item);
  }
}

}

std::string dump_finite(const nlohmann::json& j, int indent) {
  check_finite(j);
  return j.dump(indent);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace rstar
