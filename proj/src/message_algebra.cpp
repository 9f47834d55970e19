#include "saturate/message_algebra.hpp"

namespace saturate {

void normalize(ProbVec<double>& p) {
  double sum = 0.0;
  for (int i = 0; i <= p.dim(); ++i) {
    double& v = p[i];
    if (v < 0.0) {
      if (v < -kClampTol) throw std::invalid_argument("ProbVec: negative entry beyond tolerance");
      v = 0.0;
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTol) throw std::invalid_argument("ProbVec: mass not preserved");
  for (int i = 0; i <= p.dim(); ++i) p[i] /= sum;
}

}  // namespace saturate
