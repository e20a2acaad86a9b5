#pragma once

// Proportional / integral / derivative reading of size-3 convolution kernels.
//
// A kernel [a, b, c] is a combination of three basis kernels
//   proportional [0, 1, 0], integral [1/3, 1/3, 1/3], derivative [-1, 0, 1]
// and, equivalently, of proportional, derivative and second difference
// [1, -2, 1] once the integral weight is re-expressed. Everything here is
// exact linear algebra and is evaluated in double precision.

#include <iosfwd>
#include <string>
#include <vector>

#include "pidcnn/autodiff.hpp"

namespace pidcnn::pid {

struct Kernel3 {
  double a = 0.0, b = 0.0, c = 0.0;
  bool operator==(const Kernel3&) const = default;
};

inline constexpr Kernel3 kProportional{0.0, 1.0, 0.0};
inline constexpr Kernel3 kIntegral{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
inline constexpr Kernel3 kDerivative{-1.0, 0.0, 1.0};
inline constexpr Kernel3 kSecondDifference{1.0, -2.0, 1.0};

struct PidCoefficients {
  double kp = 0.0, ki = 0.0, kd = 0.0;
  bool operator==(const PidCoefficients&) const = default;
};

/// Weights on f, f' and f'' (proportional, derivative, second difference).
struct SecondOrderCoefficients {
  double kp2 = 0.0, kd2 = 0.0, ks = 0.0;
  bool operator==(const SecondOrderCoefficients&) const = default;
};

/// f(x-1), f(x), f(x+1) at unit spacing.
struct SignalWindow {
  double prev = 0.0, center = 0.0, next = 0.0;
};

struct WindowOperators {
  double first_diff = 0.0;   // f(x+1) - f(x-1)
  double second_diff = 0.0;  // f(x+1) - 2 f(x) + f(x-1)
  double integral = 0.0;     // inclusive three-sample sum over [x-1, x+1]
};

struct Nonlinearity {
  enum class Kind { identity, relu, prelu };
  Kind kind = Kind::identity;
  double alpha = 0.0;  // prelu slope on the negative side

  static Nonlinearity identity() { return {}; }
  static Nonlinearity relu() { return {Kind::relu, 0.0}; }
  static Nonlinearity prelu(double alpha) { return {Kind::prelu, alpha}; }
  double operator()(double z) const;
};

Kernel3 compose_kernel(const PidCoefficients& c);
PidCoefficients decompose_kernel(const Kernel3& k);
SecondOrderCoefficients to_second_order(const PidCoefficients& c);
WindowOperators window_operators(const SignalWindow& w);

/// a f(x-1) + b f(x) + c f(x+1).
double apply_kernel(const Kernel3& k, const SignalWindow& w);

/// g(kp f + (ki/3) * integral + kd f').
double single_layer_response(const SignalWindow& w, const PidCoefficients& c, const Nonlinearity& g);

/// g(kp2 f + kd2 f' + ks f''). Same value as single_layer_response after to_second_order.
double second_order_response(const SignalWindow& w, const SecondOrderCoefficients& c, const Nonlinearity& g);

/// Squared-coefficient share of each basis; all zero for the zero kernel.
struct EnergyFractions {
  double proportional = 0.0, integral = 0.0, derivative = 0.0;
};
EnergyFractions energy_fractions(const PidCoefficients& c);

struct KernelPidRow {
  std::string layer;  // parameter name of the conv weight
  std::size_t out_channel = 0;
  std::size_t in_channel = 0;
  std::string axis;  // row0..row2, col0..col2
  PidCoefficients coefficients;
  EnergyFractions energy;
};

/// Decomposes every row and column of every 3x3 spatial kernel found in the
/// store (tensors shaped [Cout,Cin,1,3,3]). Throws std::invalid_argument when
/// the store holds no such tensor.
std::vector<KernelPidRow> report_kernel_pid(const ParameterStore<float>& params);

/// CSV with header layer,outc,inc,axis,kp,ki,kd,ep,ei,ed.
void write_kernel_report(std::ostream& os, const std::vector<KernelPidRow>& rows);

}  // namespace pidcnn::pid
