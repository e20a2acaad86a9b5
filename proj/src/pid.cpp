#include "pidcnn/pid.hpp"

#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace pidcnn::pid {

double Nonlinearity::operator()(double z) const {
  switch (kind) {
    case Kind::relu:
      return z > 0.0 ? z : 0.0;
    case Kind::prelu:
      return z >= 0.0 ? z : alpha * z;
    case Kind::identity:
      break;
  }
  return z;
}

Kernel3 compose_kernel(const PidCoefficients& c) {
  const double i = c.ki / 3.0;
  return {i - c.kd, c.kp + i, i + c.kd};
}

PidCoefficients decompose_kernel(const Kernel3& k) {
  const double outer = k.a + k.c;
  return {k.b - outer / 2.0, 3.0 * outer / 2.0, (k.c - k.a) / 2.0};
}

SecondOrderCoefficients to_second_order(const PidCoefficients& c) {
  return {c.kp + c.ki, c.kd, c.ki / 3.0};
}

WindowOperators window_operators(const SignalWindow& w) {
  return {w.next - w.prev, w.next - 2.0 * w.center + w.prev, w.prev + w.center + w.next};
}

double apply_kernel(const Kernel3& k, const SignalWindow& w) {
  return k.a * w.prev + k.b * w.center + k.c * w.next;
}

double single_layer_response(const SignalWindow& w, const PidCoefficients& c, const Nonlinearity& g) {
  const auto ops = window_operators(w);
  return g(c.kp * w.center + (c.ki / 3.0) * ops.integral + c.kd * ops.first_diff);
}

double second_order_response(const SignalWindow& w, const SecondOrderCoefficients& c, const Nonlinearity& g) {
  const auto ops = window_operators(w);
  return g(c.kp2 * w.center + c.kd2 * ops.first_diff + c.ks * ops.second_diff);
}

EnergyFractions energy_fractions(const PidCoefficients& c) {
  const double p = c.kp * c.kp, i = c.ki * c.ki, d = c.kd * c.kd;
  const double total = p + i + d;
  if (total == 0.0) return {};
  return {p / total, i / total, d / total};
}

std::vector<KernelPidRow> report_kernel_pid(const ParameterStore<float>& params) {
  std::vector<KernelPidRow> rows;
  bool found = false;
  for (const auto& p : params) {
    const Shape& s = p.value.shape();
    if (s.size() != 5 || s[2] != 1 || s[3] != 3 || s[4] != 3) continue;
    found = true;
    for (std::size_t o = 0; o < s[0]; ++o) {
      for (std::size_t i = 0; i < s[1]; ++i) {
        auto tap = [&](std::size_t r, std::size_t c) { return static_cast<double>(p.value.at({o, i, 0, r, c})); };
        for (std::size_t r = 0; r < 3; ++r) {
          const auto coeffs = decompose_kernel({tap(r, 0), tap(r, 1), tap(r, 2)});
          rows.push_back({p.name, o, i, "row" + std::to_string(r), coeffs, energy_fractions(coeffs)});
        }
        for (std::size_t c = 0; c < 3; ++c) {
          const auto coeffs = decompose_kernel({tap(0, c), tap(1, c), tap(2, c)});
          rows.push_back({p.name, o, i, "col" + std::to_string(c), coeffs, energy_fractions(coeffs)});
        }
      }
    }
  }
  if (!found) throw std::invalid_argument("report_kernel_pid: no [Cout,Cin,1,3,3] convolution weights found");
  return rows;
}

void write_kernel_report(std::ostream& os, const std::vector<KernelPidRow>& rows) {
  os << "layer,outc,inc,axis,kp,ki,kd,ep,ei,ed\n";
  os << std::setprecision(9);
  for (const auto& r : rows) {
    os << r.layer << ',' << r.out_channel << ',' << r.in_channel << ',' << r.axis << ',' << r.coefficients.kp << ','
       << r.coefficients.ki << ',' << r.coefficients.kd << ',' << r.energy.proportional << ',' << r.energy.integral
       << ',' << r.energy.derivative << '\n';
  }
}

}  // namespace pidcnn::pid
