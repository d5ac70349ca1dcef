#pragma once

// Sensitivity of the feedforward voltage to the dimensionless controller
// parameters, the Fisher information matrix built from it, and the two
// reduced search parameterizations derived from them.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "softland/feedforward.hpp"
#include "softland/model.hpp"
#include "softland/trajectory.hpp"

namespace softland {

using Vector9d = Eigen::Matrix<double, 9, 1>;
using Matrix9d = Eigen::Matrix<double, 9, 9>;

struct SensitivityOptions {
    std::size_t n_nodes = 701;
    double step = 1e-6;  // central-difference step in theta
};

/// du_ff/dtheta at the nodes of a uniform grid on [t0, tf].
struct SensitivityGrid {
    std::vector<double> times;
    std::vector<Vector9d> rows;
};

struct FisherMatrix {
    Matrix9d m = Matrix9d::Zero();
};

/// Eigenpairs sorted by descending eigenvalue; each eigenvector is scaled
/// so that its largest-magnitude entry is positive.
struct EigenBasis {
    Vector9d values = Vector9d::Zero();
    Matrix9d vectors = Matrix9d::Identity();
};

/// Central-difference sensitivity of u_ff(t, .) at theta. Throws
/// SensitivityError naming the component whose probe was infeasible.
Vector9d sensitivity_row(double t, const ControlParams& theta, const Trajectory& traj,
                         const PhysicalParams& p_nom, double step = 1e-6);

SensitivityGrid sensitivity_grid(const ControlParams& theta, const Trajectory& traj,
                                 const PhysicalParams& p_nom, const SensitivityOptions& opts = {});

/// Trapezoidal integral of the squared sensitivities.
Vector9d integral_square_sensitivity(const SensitivityGrid& grid);
Vector9d integral_square_sensitivity(const ControlParams& theta, const Trajectory& traj,
                                     const PhysicalParams& p_nom,
                                     const SensitivityOptions& opts = {});

/// Trapezoidal integral of s^T s. Its diagonal is bit-identical to
/// integral_square_sensitivity on the same grid.
FisherMatrix fisher_matrix(const SensitivityGrid& grid);
FisherMatrix fisher_matrix(const ControlParams& theta, const Trajectory& traj,
                           const PhysicalParams& p_nom, const SensitivityOptions& opts = {});

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Throws
/// NumericError if the sweep budget runs out.
EigenBasis sym_eigen(const Matrix9d& a);
inline EigenBasis sym_eigen(const FisherMatrix& f) { return sym_eigen(f.m); }

/// Half the integral-square deviation of u_ff(., theta) from u_ff(., 1).
double deviation_D(const ControlParams& theta, const Trajectory& traj, const PhysicalParams& p_nom,
                   std::size_t n_nodes = 701);

enum class ReductionKind { IndexSubset, Orthogonal };

/// How orthogonal coordinates phi map back to theta.
///  Affine:  theta = theta* + V (phi - phi*), anchored at the nominal point.
///  Literal: theta = V phi, exact only when theta* lies in span(V).
enum class OrthogonalMap { Affine, Literal };

struct Reduction {
    ReductionKind kind = ReductionKind::IndexSubset;
    OrthogonalMap map = OrthogonalMap::Affine;
    std::size_t r = kNumUncertain;
    std::vector<std::size_t> free_indices;  // subset kind, ascending
    Eigen::MatrixXd basis;                  // orthogonal kind, 9 x r
    Eigen::VectorXd phi_star;               // orthogonal kind
    ControlParams theta_star = ControlParams::ones();
    ThetaBox box;

    /// Reduced coordinates of theta_star.
    Eigen::VectorXd anchor() const;
};

/// Keep the r entries with largest S_IS free (ties to the lower index).
/// Throws std::invalid_argument unless 1 <= r <= 9.
Reduction make_subset_reduction(const Vector9d& s_is, std::size_t r, ThetaBox box = {});

/// Search along the first r eigenvectors.
Reduction make_orthogonal_reduction(const EigenBasis& basis, std::size_t r, ThetaBox box = {},
                                    OrthogonalMap map = OrthogonalMap::Affine);

struct MappedTheta {
    ControlParams theta;
    bool clamped = false;
};

/// Full theta for reduced coordinates x, clamped to the box.
MappedTheta theta_from_reduced(const Reduction& red, const Eigen::VectorXd& x);

Eigen::VectorXd reduced_from_theta(const Reduction& red, const ControlParams& theta);

/// Everything the analysis step needs at the nominal point.
struct NominalAnalysis {
    SensitivityGrid grid;
    Vector9d s_is;
    FisherMatrix fisher;
    EigenBasis eigen;
};

NominalAnalysis analyze_nominal(const Trajectory& traj, const PhysicalParams& p_nom,
                                const SensitivityOptions& opts = {});

}  // namespace softland
