#pragma once

// Text export in the CPLEX LP file format, for cross-checking a model with an
// external solver. Layout:
//
//   \ <title>
//   Minimize | Maximize
//    obj: <terms> [+ constant]
//   Subject To
//    <row name>: <terms> <= | >= | = <rhs>
//   Bounds
//    <lo> <= <var> <= <hi>    (or "<var> free", "-inf <= <var> <= <hi>")
//   General
//    <integer vars>
//   Binary
//    <binary vars>
//   End
//
// Unnamed rows are written as c<index>, unnamed variables as x<index>.
// Numbers use 17 significant digits so a round trip through another solver
// sees the same coefficients.

#include <cstdio>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "gdp/mip.hpp"

namespace gdp::lp {

namespace detail {

inline std::string lp_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_terms(std::ostream& os, const LinearProgram& lp, const std::vector<Term>& terms) {
  bool first = true;
  for (const auto& t : terms) {
    if (t.coef == 0.0) continue;
    const double mag = std::abs(t.coef);
    if (first) os << (t.coef < 0 ? "- " : "");
    else os << (t.coef < 0 ? " - " : " + ");
    if (mag != 1.0) os << lp_number(mag) << ' ';
    os << lp.variable_name(t.var);
    first = false;
  }
  if (first) os << "0 " << lp.variable_name(0);
}

}  // namespace detail

inline void write_lp_file(std::ostream& os, const MipProblem& mip, const std::string& title = "gdp model") {
  const LinearProgram& lp = mip.base;
  os << "\\ " << title << '\n';
  os << (lp.sense == Sense::minimize ? "Minimize" : "Maximize") << '\n';
  std::vector<Term> obj;
  for (std::size_t j = 0; j < lp.num_variables(); ++j)
    if (lp.objective[j] != 0.0) obj.push_back({j, lp.objective[j]});
  os << " obj: ";
  if (obj.empty() && lp.num_variables() > 0) obj.push_back({0, 0.0});
  detail::write_terms(os, lp, obj);
  if (lp.objective_offset != 0.0)
    os << (lp.objective_offset < 0 ? " - " : " + ") << detail::lp_number(std::abs(lp.objective_offset));
  os << "\nSubject To\n";
  for (std::size_t i = 0; i < lp.num_constraints(); ++i) {
    const auto& c = lp.constraints[i];
    os << ' ' << (c.name.empty() ? "c" + std::to_string(i) : c.name) << ": ";
    detail::write_terms(os, lp, c.terms);
    switch (c.relation) {
      case Relation::less_equal: os << " <= "; break;
      case Relation::greater_equal: os << " >= "; break;
      case Relation::equal: os << " = "; break;
    }
    os << detail::lp_number(c.rhs) << '\n';
  }
  os << "Bounds\n";
  const std::set<std::size_t> binaries(mip.binary_vars.begin(), mip.binary_vars.end());
  for (std::size_t j = 0; j < lp.num_variables(); ++j) {
    if (binaries.count(j)) continue;
    const double lo = lp.lower[j], hi = lp.upper[j];
    if (lo == 0.0 && hi == kInf) continue;
    const std::string name = lp.variable_name(j);
    if (lo == -kInf && hi == kInf) os << ' ' << name << " free\n";
    else {
      os << ' ' << (lo == -kInf ? std::string("-inf") : detail::lp_number(lo)) << " <= " << name << " <= "
         << (hi == kInf ? std::string("+inf") : detail::lp_number(hi)) << '\n';
    }
  }
  if (!mip.integer_vars.empty()) {
    os << "General\n";
    for (std::size_t j : mip.integer_vars) os << ' ' << lp.variable_name(j) << '\n';
  }
  if (!mip.binary_vars.empty()) {
    os << "Binary\n";
    for (std::size_t j : mip.binary_vars) os << ' ' << lp.variable_name(j) << '\n';
  }
  os << "End\n";
}

inline std::string to_lp_string(const MipProblem& mip, const std::string& title = "gdp model") {
  std::ostringstream os;
  write_lp_file(os, mip, title);
  return os.str();
}

}  // namespace gdp::lp
