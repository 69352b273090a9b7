#include "siqrng/optimizer.hpp"

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>

#include "siqrng/errors.hpp"
#include "siqrng/protocol_math.hpp"

namespace siqrng::optimizer {

double p_single_click(double lambda, double eta) {
  if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("eta must lie in [0, 1]");
  const double miss = std::exp(-0.5 * lambda * eta);
  return 2.0 * miss * (1.0 - miss);
}

double error_rate_model(double lambda, const RateModelParams& params) {
  if (params.error_model == ErrorModel::constant) return params.error_value;
  // Wrong arm mean l e_d, right arm mean l (1 - e_d); a double click is half an error.
  const double l = lambda * params.eta;
  const double wrong = l * params.error_value;
  const double right = l - wrong;
  const double any = -std::expm1(-l);
  if (any <= 0.0) return params.error_value;
  const double p_wrong = -std::expm1(-wrong);
  const double p_right = -std::expm1(-right);
  const double wrong_only = p_wrong * (1.0 - p_right);
  const double both = p_wrong * p_right;
  return (wrong_only + 0.5 * both) / any;
}

double rate_from_click_probability(double p_single, double e_bx, const RateModelParams& params,
                                   double run_duration_s) {
  if (e_bx + params.theta > 0.5) throw DomainError("rate model: e_bX + theta exceeds 1/2");
  const double per_second = params.rep_rate * p_single * (params.coefficient - protocol::binary_entropy(e_bx + params.theta));
  if (params.te_mode == TeMode::raw) return per_second - params.t_e;
  if (!(run_duration_s > 0.0)) throw DomainError("rate model: run duration must be positive");
  return per_second - params.t_e / run_duration_s;
}

double rate_model(double lambda, const RateModelParams& params, double run_duration_s) {
  return rate_from_click_probability(p_single_click(lambda, params.eta), error_rate_model(lambda, params), params,
                                     run_duration_s);
}

Optimum maximize_scanned(const std::function<double(double)>& f, double lo, double hi, double tolerance) {
  if (!(hi > lo)) throw DomainError("maximize_scanned: invalid search range");
  auto value = [&](double x) {
    const double v = f(x);
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  };

  constexpr int kGrid = 400;
  std::vector<double> grid(kGrid + 1);
  std::vector<double> values(kGrid + 1);
  for (int i = 0; i <= kGrid; ++i) {
    grid[i] = lo + (hi - lo) * i / kGrid;
    values[i] = value(grid[i]);
  }
  int best = 0;
  for (int i = 1; i <= kGrid; ++i)
    if (values[i] > values[best]) best = i;
  // Any other interior local maximum that is not within relative noise of the
  // best means the function is not unimodal on this range.
  const double slack = 1e-9 * std::max(1.0, std::abs(values[best]));
  for (int i = 1; i < kGrid; ++i) {
    if (std::abs(i - best) <= 1) continue;
    if (values[i] > values[i - 1] + slack && values[i] > values[i + 1] + slack)
      throw NonUnimodalError("maximize_scanned: several local maxima on the range");
  }
  const double a = grid[std::max(0, best - 1)];
  const double b = grid[std::min(kGrid, best + 1)];
  Optimum opt;
  opt.lambda = golden_section_maximize(value, a, b, tolerance);
  opt.rate = value(opt.lambda);
  return opt;
}

Optimum optimize_lambda(const RateModelParams& params, double lambda_lo, double lambda_hi, double run_duration_s,
                        double tolerance) {
  if (!(lambda_lo > 0.0 && lambda_hi > lambda_lo)) throw DomainError("optimize_lambda: invalid search range");
  auto rate = [&](double lambda) {
    try {
      return rate_model(lambda, params, run_duration_s);
    } catch (const DomainError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  return maximize_scanned(rate, lambda_lo, lambda_hi, tolerance);
}

RateTable flatness_report(const RateModelParams& params, const std::vector<double>& lambdas, double run_duration_s) {
  RateTable table;
  table.reserve(lambdas.size());
  for (const double lambda : lambdas) table.emplace_back(lambda, rate_model(lambda, params, run_duration_s));
  return table;
}

void write_rate_csv(std::ostream& os, const RateTable& table) {
  os << "lambda,rate_bps\n";
  char line[96];
  for (const auto& [lambda, rate] : table) {
    std::snprintf(line, sizeof line, "%.6g,%.6g\n", lambda, rate);
    os << line;
  }
}

}  // namespace siqrng::optimizer
