#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace softland {

/// Flux linkage reached or exceeded the saturation limit of the core.
class SaturationError : public std::domain_error {
public:
    SaturationError(double flux, double flux_sat);
    double flux() const noexcept { return flux_; }

private:
    double flux_;
};

/// The flat-output inversion has no real solution (negative radicand,
/// saturated flux, or a vanishing flux in the rate expression).
class InfeasibleFlatnessError : public std::domain_error {
public:
    InfeasibleFlatnessError(const std::string& what, double z, double z_ddot);
    double position() const noexcept { return z_; }
    double acceleration() const noexcept { return z_ddot_; }

private:
    double z_;
    double z_ddot_;
};

/// A central-difference probe of the feedforward hit an infeasible point.
class SensitivityError : public std::domain_error {
public:
    SensitivityError(std::size_t component, const std::string& cause);
    std::size_t component() const noexcept { return component_; }

private:
    std::size_t component_;
};

class SimulationDivergedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ProtocolError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace softland
