#pragma once

#include <cmath>
#include <stdexcept>

#include "tmob/params.hpp"

namespace tmob {

// The arctan number codec. A stored real r appears as the Number robot's
// offset from Q on the segment QQ' of length lambda:
//
//   offset(r) = lambda/2 + atan(r) * lambda / pi          (range (0, lambda))
//   r(offset) = tan((offset - lambda/2) * pi / lambda)
//
// Decoding is ill-conditioned once atan saturates, so values are capped at
// |r| <= 1e8; beyond that the codec refuses rather than silently corrupting.
class NumberCodec {
 public:
  explicit NumberCodec(const MachineParams& p) : lambda_(p.lambda) {}
  NumberCodec(double d, double lambda) : lambda_(lambda) { (void)d; }

  static constexpr double kValueGuard = 1e8;

  double encode(double r) const {
    if (!(std::abs(r) <= kValueGuard)) throw std::domain_error("register overflow");
    return lambda_ / 2.0 + std::atan(r) * lambda_ / kPi;
  }

  double decode(double offset) const {
    if (!(offset > 0.0 && offset < lambda_))
      throw std::domain_error("out of codec range");
    double r = std::tan((offset - lambda_ / 2.0) * kPi / lambda_);
    if (!(std::abs(r) <= kValueGuard)) throw std::domain_error("register overflow");
    return r;
  }

  bool decodable(double offset) const {
    if (!(offset > 0.0 && offset < lambda_)) return false;
    double r = std::tan((offset - lambda_ / 2.0) * kPi / lambda_);
    return std::abs(r) <= kValueGuard;
  }

  double lambda() const { return lambda_; }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  double lambda_;
};

}  // namespace tmob
