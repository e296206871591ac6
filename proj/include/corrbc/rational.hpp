#pragma once

#include <boost/rational.hpp>

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <string>

namespace corrbc {

using Q = boost::rational<std::int64_t>;

inline double to_double(const Q& q) { return boost::rational_cast<double>(q); }
inline double to_double(double x) { return x; }

inline Q qmin(const Q& a, const Q& b) { return a < b ? a : b; }
inline Q qmax(const Q& a, const Q& b) { return a < b ? b : a; }
inline Q pos(const Q& a) { return qmax(a, Q(0)); }

inline std::string to_string(const Q& q) {
  return q.denominator() == 1 ? std::to_string(q.numerator())
                              : std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

}  // namespace corrbc
