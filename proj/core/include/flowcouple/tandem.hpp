#pragma once

#include <span>
#include <vector>

#include "flowcouple/model.hpp"

namespace flowcouple {

/// Two queues in series with finite buffers. delta1/delta2 give the service rate at each
/// queue length 0..s_i; entry 0 must be 0.
struct TandemParams {
  int s1 = 1;
  int s2 = 1;
  double beta = 1.0;
  std::vector<double> delta1;
  std::vector<double> delta2;

  /// delta_i(x) = c_i * x
  static TandemParams linear_service(int s1, int s2, double beta, double c1, double c2);

  /// Throws ModelError when capacities, table sizes, or entries are invalid.
  void validate() const;
};

/// delta(k) <= delta(k+1) for all k.
bool is_nondecreasing(std::span<const double> table);

/// Blocking tandem on the full box {0..s1} x {0..s2}:
///   arrival   beta * 1(x1 < s1)
///   transfer  delta1(x1) * 1(x2 < s2)
///   departure delta2(x2)
NetworkSpec build_original_tandem(const TandemParams& p);

/// Balanced tandem on the box minus the corner (s1, s2):
///   arrival   beta * 1(x1 < s1, x2 < s2)
///   transfer  delta1(x1) * 1(x2 < s2)
///   departure delta2(x2) * 1(x1 < s1)
NetworkSpec build_balanced_tandem(const TandemParams& p);

/// Long-run loss rate beta - throughput on (0,1), cross-checked against beta times the
/// stationary mass of arrival-blocked states. Needs a `beta` parameter on the spec and
/// arrival rates in {0, beta}; throws ModelError otherwise, and SolverError when the
/// two formulas disagree by more than 1e-10.
double loss_rate(const NetworkSpec& spec, std::span<const double> pi);

/// Fits pi(x) ~ c * prod_i g_i(x_i) by ratio extraction along each axis and returns the
/// largest absolute deviation. Throws SolverError when pi has a zero entry or a ratio
/// cannot be extracted.
double product_form_residual(const NetworkSpec& spec, std::span<const double> pi);

}  // namespace flowcouple
