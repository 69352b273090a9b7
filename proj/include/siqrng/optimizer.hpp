#pragma once

#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

namespace siqrng::optimizer {

/// How e_bX depends on lambda in the rate model.
enum class ErrorModel {
  constant,      ///< fixed measured floor
  double_click,  ///< threshold-detector model with per-photon misalignment e_d
};

/// How the t_e bits enter a bits/second rate.
enum class TeMode {
  amortized,  ///< t_e / run_duration
  raw,        ///< subtract t_e directly from the per-second rate
};

struct RateModelParams {
  double rep_rate = 4.0e6;  ///< G
  double coefficient = 0.952;
  double theta = 0.001;
  double t_e = 100.0;
  double eta = 0.1;
  ErrorModel error_model = ErrorModel::constant;
  double error_value = 0.0033;  ///< e_bX (constant) or e_d (double_click)
  TeMode te_mode = TeMode::amortized;
};

/// 2 e^{-l/2} (1 - e^{-l/2}) with l = lambda * eta.
double p_single_click(double lambda, double eta);

/// e_bX at a given lambda under the configured error model.
double error_rate_model(double lambda, const RateModelParams& params);

/// G p (coefficient - H(e + theta)) - t_e term, for a given single-click
/// probability. Throws DomainError when e + theta > 1/2.
double rate_from_click_probability(double p_single, double e_bx, const RateModelParams& params,
                                   double run_duration_s);

/// Final generation rate in bits/second at mean photon number lambda.
double rate_model(double lambda, const RateModelParams& params, double run_duration_s);

struct Optimum {
  double lambda = 0.0;
  double rate = 0.0;
};

/// Grid pre-scan of f on [lo, hi] followed by golden-section refinement around
/// the best grid point; throws NonUnimodalError if the scan finds several
/// separated interior maxima. Non-finite values count as -infinity.
Optimum maximize_scanned(const std::function<double(double)>& f, double lo, double hi, double tolerance = 1e-3);

/// maximize_scanned applied to rate_model over [lambda_lo, lambda_hi].
Optimum optimize_lambda(const RateModelParams& params, double lambda_lo, double lambda_hi, double run_duration_s,
                        double tolerance = 1e-3);

using RateTable = std::vector<std::pair<double, double>>;

RateTable flatness_report(const RateModelParams& params, const std::vector<double>& lambdas, double run_duration_s);

/// CSV with header `lambda,rate_bps`, six significant digits.
void write_rate_csv(std::ostream& os, const RateTable& table);

/// Generic golden-section maximizer on a unimodal function.
template <typename F>
double golden_section_maximize(F&& f, double a, double b, double tolerance) {
  const double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace siqrng::optimizer
