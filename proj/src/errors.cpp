#include "softland/errors.hpp"

#include <sstream>

namespace softland {

namespace {

std::string saturation_message(double flux, double flux_sat) {
    std::ostringstream os;
    os.precision(17);
    os << "flux linkage " << flux << " Wb is at or beyond saturation " << flux_sat << " Wb";
    return os.str();
}

std::string flatness_message(const std::string& what, double z, double z_ddot) {
    std::ostringstream os;
    os.precision(17);
    os << what << " (z=" << z << " m, z_ddot=" << z_ddot << " m/s^2)";
    return os.str();
}

}  // namespace

SaturationError::SaturationError(double flux, double flux_sat)
    : std::domain_error(saturation_message(flux, flux_sat)), flux_(flux) {}

InfeasibleFlatnessError::InfeasibleFlatnessError(const std::string& what, double z,
                                                 double z_ddot)
    : std::domain_error(flatness_message(what, z, z_ddot)), z_(z), z_ddot_(z_ddot) {}

SensitivityError::SensitivityError(std::size_t component, const std::string& cause)
    : std::domain_error("feedforward infeasible while probing theta_" +
                        std::to_string(component + 1) + ": " + cause),
      component_(component) {}

}  // namespace softland
