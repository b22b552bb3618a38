// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ncnet {

// Base of everything the library throws on bad input or infeasible requests.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-range input (maps to CLI exit code 2).
class InputError : public Error {
public:
  using Error::Error;
};

// A size guard of an exact/exhaustive algorithm was exceeded (CLI exit code 3).
class SizeGuardError : public Error {
public:
  using Error::Error;
};

// The layered power allocation does not exist at the requested SNR.
class InfeasibleAllocation : public Error {
public:
  InfeasibleAllocation(double snr, double threshold)
      : Error("allocation infeasible at SNR " + std::to_string(snr) +
              " (requires SNR > " + std::to_string(threshold) + ")"),
        snr_(snr), threshold_(threshold) {}

  double snr() const noexcept { return snr_; }
  double threshold() const noexcept { return threshold_; }

private:
  double snr_;
  double threshold_;
};

// A Gaussian mutual information is infinite because the joint covariance is singular.
class InfiniteMutualInformation : public Error {
public:
  using Error::Error;
};

// Numerical procedure failed (factorization, maximization bracket, ...).
class NumericalError : public Error {
public:
  using Error::Error;
};

} // namespace ncnet
