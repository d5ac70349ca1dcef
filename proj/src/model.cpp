#include "softland/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "softland/errors.hpp"

namespace softland {

namespace {

constexpr std::array<std::string_view, kNumUncertain> kNames = {
    "k_s", "z_s", "m", "kappa1", "lambda_sat", "kappa3", "kappa4", "kappa5", "kappa6"};

// Fringing denominator g(z) = 1 + kappa5 z log(kappa6 / z).
double fringing(double z, const PhysicalParams& p) {
    return 1.0 + p.kappa5 * z * std::log(p.kappa6 / z);
}

double clamp_gap(double z) { return std::max(z, kMinGap); }

}  // namespace

std::array<double, kNumUncertain> PhysicalParams::uncertain() const noexcept {
    return {k_s, z_s, m, kappa1, lambda_sat, kappa3, kappa4, kappa5, kappa6};
}

PhysicalParams PhysicalParams::from_uncertain(const std::array<double, kNumUncertain>& v,
                                              double R_coil) {
    PhysicalParams p;
    p.k_s = v[0];
    p.z_s = v[1];
    p.m = v[2];
    p.kappa1 = v[3];
    p.lambda_sat = v[4];
    p.kappa3 = v[5];
    p.kappa4 = v[6];
    p.kappa5 = v[7];
    p.kappa6 = v[8];
    p.R_coil = R_coil;
    return p;
}

void PhysicalParams::validate(double z_upper) const {
    const auto values = uncertain();
    for (std::size_t i = 0; i < kNumUncertain; ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
            throw std::invalid_argument("parameter " + std::string(kNames[i]) +
                                        " must be finite and strictly positive");
        }
    }
    if (!(R_coil > 0.0) || !std::isfinite(R_coil)) {
        throw std::invalid_argument("parameter R_coil must be finite and strictly positive");
    }
    if (!(kappa6 > z_upper)) {
        throw std::invalid_argument("kappa6 must exceed the upper stroke limit");
    }
}

PhysicalParams nominal_params() noexcept { return PhysicalParams{}; }

std::string_view uncertain_name(std::size_t i) { return kNames.at(i); }

double reluctance(double z, double lambda, const PhysicalParams& p) {
    const double ratio = std::abs(lambda) / p.lambda_sat;
    if (!(ratio < 1.0)) {
        throw SaturationError(lambda, p.lambda_sat);
    }
    const double zc = clamp_gap(z);
    return p.kappa1 / (1.0 - ratio) + p.kappa3 + p.kappa4 * zc / fringing(zc, p);
}

double d_reluctance_dz(double z, const PhysicalParams& p) {
    const double zc = clamp_gap(z);
    const double g = fringing(zc, p);
    return p.kappa4 * (1.0 + p.kappa5 * zc) / (g * g);
}

double d2_reluctance_dz2(double z, const PhysicalParams& p) {
    const double zc = clamp_gap(z);
    const double g = fringing(zc, p);
    const double dg = p.kappa5 * (std::log(p.kappa6 / zc) - 1.0);
    return p.kappa4 * (p.kappa5 * g - 2.0 * (1.0 + p.kappa5 * zc) * dg) / (g * g * g);
}

double magnetic_force(double z, double lambda, const PhysicalParams& p) {
    return -0.5 * lambda * lambda * d_reluctance_dz(z, p);
}

StateDerivative state_derivative(const ActuatorState& s, double u, const PhysicalParams& p) {
    StateDerivative d;
    d.dz = s.v;
    d.dv = (-p.k_s * (s.z - p.z_s) + magnetic_force(s.z, s.lambda, p)) / p.m;
    d.dlambda = -p.R_coil * s.lambda * reluctance(s.z, s.lambda, p) + u;
    return d;
}

}  // namespace softland
