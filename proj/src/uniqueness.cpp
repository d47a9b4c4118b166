#include "threespheres/uniqueness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace threespheres {

namespace {

nlohmann::json parse_document(std::string_view text, const char* what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::InvalidInput, std::string(what) + ": " + e.what());
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SmallnessSequence sequence_from_json(std::string_view text) {
  const nlohmann::json doc = parse_document(text, "sequence JSON");
  if (!doc.is_array()) fail(ErrorCode::InvalidInput, "sequence JSON: expected an array");
  SmallnessSequence seq;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& e = doc[i];
    const std::string where = "sequence JSON entry " + std::to_string(i);
    try {
      SmallnessEntry entry;
      const auto xs = e.at("x").get<std::vector<double>>();
      if (xs.empty()) fail(ErrorCode::InvalidInput, where + ": empty x");
      entry.x = Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
      entry.r = e.at("r").get<double>();
      if (e.contains("log_eps")) {
        entry.log_eps = e.at("log_eps").get<double>();
      } else {
        const double eps = e.at("eps").get<double>();
        if (!(eps > 0)) fail(ErrorCode::InvalidInput, where + ": eps must be > 0");
        entry.log_eps = std::log(eps);
      }
      seq.push_back(std::move(entry));
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorCode::InvalidInput, where + ": " + ex.what());
    }
  }
  return seq;
}

double rho(double x_norm, double r) {
  if (!(r > 0) || !(2.0 * r <= x_norm) || !std::isfinite(x_norm)) {
    std::ostringstream msg;
    msg << "need 0 < 2r <= |x| (|x|=" << x_norm << ", r=" << r << ")";
    fail(ErrorCode::ConstraintViolated, msg.str());
  }
  return 1.0 / std::log(2.0 * x_norm / r);
}

// ---------------------------------------------------------------------------

GrowthEnvelope GrowthEnvelope::power(double p, double c) {
  if (!(p >= 0) || !(c > 0)) fail(ErrorCode::InvalidInput, "power envelope needs p >= 0, c > 0");
  return GrowthEnvelope(Kind::Power, p, c, {});
}

GrowthEnvelope GrowthEnvelope::exp_power(double p, double c) {
  if (!(p >= 0) || !(c > 0)) {
    fail(ErrorCode::InvalidInput, "exp_power envelope needs p >= 0, c > 0");
  }
  return GrowthEnvelope(Kind::ExpPower, p, c, {});
}

GrowthEnvelope GrowthEnvelope::table(std::vector<std::pair<double, double>> samples) {
  if (samples.empty()) fail(ErrorCode::InvalidInput, "table envelope needs samples");
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].first > samples[i - 1].first) ||
        samples[i].second < samples[i - 1].second) {
      fail(ErrorCode::InvalidInput, "table envelope must be increasing in r and monotone");
    }
  }
  if (samples.front().first < 0) fail(ErrorCode::InvalidInput, "table envelope starts below 0");
  return GrowthEnvelope(Kind::Table, 0.0, 0.0, std::move(samples));
}

GrowthEnvelope GrowthEnvelope::from_json(std::string_view text) {
  const nlohmann::json doc = parse_document(text, "envelope JSON");
  try {
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "power") return power(doc.at("p").get<double>(), doc.value("c", 1.0));
    if (kind == "exp_power") return exp_power(doc.at("p").get<double>(), doc.value("c", 1.0));
    if (kind == "table") {
      return table(doc.at("samples").get<std::vector<std::pair<double, double>>>());
    }
    fail(ErrorCode::InvalidInput, "envelope JSON: unknown kind '" + kind + "'");
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::InvalidInput, std::string("envelope JSON: ") + ex.what());
  }
}

double GrowthEnvelope::operator()(double r) const {
  switch (kind_) {
    case Kind::Power:
      return c_ * std::pow(r, p_);
    case Kind::ExpPower:
      return c_ * std::exp(std::pow(r, p_));
    case Kind::Table:
      break;
  }
  if (r <= samples_.front().first || samples_.size() == 1) {
    return r <= samples_.front().first ? samples_.front().second : samples_.back().second;
  }
  auto hi = std::upper_bound(samples_.begin(), samples_.end(), r,
                             [](double v, const auto& s) { return v < s.first; });
  if (hi == samples_.end()) hi = samples_.end() - 1;
  const auto lo = hi - 1;
  const double w = (r - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

std::string GrowthEnvelope::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::Power:
      out << "power(p=" << p_ << ", c=" << c_ << ")";
      break;
    case Kind::ExpPower:
      out << "exp_power(p=" << p_ << ", c=" << c_ << ")";
      break;
    case Kind::Table:
      out << "table(" << samples_.size() << " samples)";
      break;
  }
  return out.str();
}

// ---------------------------------------------------------------------------

const char* to_string(Trend trend) {
  switch (trend) {
    case Trend::Diverges: return "diverges";
    case Trend::DoesNot: return "does not";
    case Trend::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Trend trend_of(const std::vector<double>& terms, const TrendOptions& opts) {
  const int k = std::max(opts.window, 2);
  if (static_cast<int>(terms.size()) < k) return Trend::Inconclusive;
  const std::size_t first = terms.size() - static_cast<std::size_t>(k);
  bool decreasing = true;
  for (std::size_t i = first + 1; i < terms.size(); ++i) {
    if (!(terms[i] < terms[i - 1])) decreasing = false;
  }
  if (!decreasing) return Trend::DoesNot;
  return terms.back() < -opts.threshold ? Trend::Diverges : Trend::Inconclusive;
}

CriterionTrace criterion_trace(const SmallnessSequence& seq, const GrowthEnvelope& phi,
                               const TrendOptions& opts) {
  CriterionTrace trace;
  std::vector<double> a;
  std::vector<double> b;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const SmallnessEntry& e = seq[i];
    TraceRow row;
    row.m = static_cast<int>(i) + 1;
    row.x_norm = e.x.norm();
    row.r = e.r;
    try {
      row.rho = rho(row.x_norm, e.r);
    } catch (const Error& err) {
      fail(err.code(), "entry " + std::to_string(row.m) + ": " + err.what());
    }
    const double growth = phi(4.0 * row.x_norm);
    if (!(growth > 0)) {
      std::ostringstream msg;
      msg << "entry " << row.m << ": phi(4|x|) = " << growth << " <= 0, log phi undefined";
      fail(ErrorCode::NonpositivePhi, msg.str());
    }
    const double smallness = row.rho / 100.0 * e.log_eps;
    row.term_a = smallness + growth;
    row.term_b = smallness + std::log(growth);
    a.push_back(row.term_a);
    b.push_back(row.term_b);
    row.running_a = trend_of(a, opts);
    row.running_b = trend_of(b, opts);
    trace.rows.push_back(row);
  }
  trace.verdict_a = trend_of(a, opts);
  trace.verdict_b = trend_of(b, opts);
  return trace;
}

std::string verdict_line(const CriterionTrace& trace) {
  auto phrase = [](Trend t) -> std::string {
    switch (t) {
      case Trend::Diverges: return "diverges";
      case Trend::DoesNot: return "does not diverge";
      case Trend::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
  };
  if (trace.verdict_a == trace.verdict_b) {
    return "trend: " + phrase(trace.verdict_a) + " (variant A and B)";
  }
  return "trend: variant A " + phrase(trace.verdict_a) + ", variant B " +
         phrase(trace.verdict_b);
}

std::string trace_csv(const CriterionTrace& trace) {
  std::string out = "m,x_norm,r,rho,term_a,term_b,verdict\n";
  for (const TraceRow& row : trace.rows) {
    out += std::to_string(row.m) + ',' + format_double(row.x_norm) + ',' + format_double(row.r) +
           ',' + format_double(row.rho) + ',' + format_double(row.term_a) + ',' +
           format_double(row.term_b) + ',' + to_string(row.running_a) + '/' +
           to_string(row.running_b) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

double propagation_bound(const Vector& x0, double r0, double xbar_norm, double lambda, double R,
                         double eps, double M, Delta0Variant variant) {
  const double x0n = x0.norm();
  if (x0n < 0.5 * R * (1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "propagation bound needs |x0| >= R/2 (|x0|=" << x0n << ", R=" << R << ")";
    fail(ErrorCode::PreconditionViolated, msg.str());
  }
  if (!(lambda > 0 && lambda < 1)) fail(ErrorCode::PreconditionViolated, "lambda not in (0, 1)");
  if (!(eps > 0) || !(M > 0)) fail(ErrorCode::PreconditionViolated, "eps and M must be > 0");
  const int n = static_cast<int>(x0.size());
  const double rbar = correlated_radius_general(x0n, r0, xbar_norm, R);
  const double d = delta0(x0n, r0, xbar_norm, R, variant);
  return std::sqrt(405.0) / std::pow(1.0 - lambda * lambda, 1.25) *
         std::pow(R / rbar, 0.5 * (n + 5)) * std::pow(eps, d) * std::pow(M, 1.0 - d);
}

DeltaLowerBound delta_lower_bound_check(double x_norm, double r) {
  DeltaLowerBound out;
  out.rho = rho(x_norm, r);
  const double target = out.rho / 100.0;
  const double R = 2.0 * x_norm;
  const double xbar = x_norm / 3.0;
  out.scale_derived = inequality_report(
      "delta_lower_bound_scale_derived", target,
      delta0(x_norm, r, xbar, R, Delta0Variant::ScaleDerived), 0.0, 0.0);
  try {
    out.as_printed = inequality_report("delta_lower_bound_as_printed", target,
                                       delta0(x_norm, r, xbar, R, Delta0Variant::AsPrinted), 0.0,
                                       0.0);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateLog) throw;
    out.as_printed = inequality_report("delta_lower_bound_as_printed", target,
                                       std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0);
    out.as_printed_error = e.what();
  }
  return out;
}

}  // namespace threespheres
