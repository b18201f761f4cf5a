#include "codedmm/baseline_codes.hpp"

namespace codedmm::baseline {

namespace {

double ln2(double x) {
  const double l = std::log(x);
  return l * l;
}

} // namespace

double poly_encode_work(std::size_t n, std::size_t b) {
  if (n == 0 || b == 0)
    return 0.0;
  return 2.0 * static_cast<double>(b - 1) * static_cast<double>(n * b - 1);
}

double poly_decode_work(std::size_t k, std::size_t b) {
  const double kb = static_cast<double>(k * b);
  return kb * ln2(kb);
}

double matdot_decode_work(std::size_t k, std::size_t b) {
  const double kd = static_cast<double>(k);
  return kd * kd * static_cast<double>(b) * ln2(kd);
}

} // namespace codedmm::baseline
