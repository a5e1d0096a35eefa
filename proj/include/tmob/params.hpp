#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace tmob {

// The scale ladder: eta << delta <= lambda << mu << d << s << sigma << eps << V.
// The inner rungs (lambda..d) carry the protocol geometry and are enforced at
// ratio >= 20 (eta at >= 1000); the outer rungs (d..V) only separate layout
// scales and are enforced at ratio >= 2, which is what the stock parameter
// sets satisfy.
struct MachineParams {
  double V = 1e4;       // simulated-robot visibility radius
  double eps = 100.0;   // extra visibility; machine containment disk
  double sigma = 50.0;  // full-machine containment disk
  double s = 10.0;      // component spacing
  double d = 1.0;       // Commander-Reference rest distance
  double mu = 0.05;     // step length
  double lambda = 1e-3; // number-segment length
  double delta = 1e-4;  // scheduler's minimum guaranteed travel
  double eta = 1e-9;    // geometric tolerance

  double dprime() const { return std::sqrt(d * d + mu * mu - d * mu); }
  double machine_visibility() const { return V + eps; }

  void validate() const {
    auto require = [](bool ok, const std::string& msg) {
      if (!ok) throw std::invalid_argument("invalid machine parameters: " + msg);
    };
    require(eta > 0 && delta > 0 && lambda > 0 && mu > 0 && d > 0 && s > 0 &&
                sigma > 0 && eps > 0 && V > 0,
            "all scales must be positive");
    require(std::isfinite(V) && std::isfinite(eta), "scales must be finite");
    require(delta >= 1000.0 * eta, "delta must be >= 1000*eta");
    require(lambda >= delta, "lambda must be >= delta");
    require(mu >= 20.0 * lambda, "mu must be >= 20*lambda");
    require(d >= 20.0 * mu, "d must be >= 20*mu");
    require(s >= 2.0 * d, "s must be >= 2*d");
    require(sigma >= 2.0 * s, "sigma must be >= 2*s");
    require(eps >= 2.0 * sigma, "eps must be >= 2*sigma");
    require(V >= 2.0 * eps, "V must be >= 2*eps");
    require(eta <= lambda / 1000.0, "eta must be <= lambda/1000");
  }

  bool valid() const {
    try {
      validate();
      return true;
    } catch (const std::invalid_argument&) {
      return false;
    }
  }
};

}  // namespace tmob
