#include "softland/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "softland/errors.hpp"

namespace softland {

namespace {

std::vector<double> uniform_nodes(const TrajectorySpec& spec, std::size_t n) {
    if (n < 2) {
        throw std::invalid_argument("quadrature needs at least two nodes");
    }
    std::vector<double> t(n);
    const double step = spec.duration() / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = (i + 1 == n) ? spec.tf : spec.t0 + step * static_cast<double>(i);
    }
    return t;
}

// Trapezoid weights for a uniform grid.
double trapezoid_weight(const std::vector<double>& t, std::size_t i) {
    const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    return (i == 0 || i + 1 == t.size()) ? 0.5 * h : h;
}

Eigen::VectorXd as_vector(const ControlParams& theta) {
    Eigen::VectorXd v(9);
    for (Eigen::Index i = 0; i < 9; ++i) v(i) = theta[static_cast<std::size_t>(i)];
    return v;
}

void check_grid(const SensitivityGrid& grid) {
    if (grid.times.size() < 2 || grid.rows.size() != grid.times.size()) {
        throw std::invalid_argument("sensitivity grid needs >= 2 nodes and one row per node");
    }
}

}  // namespace

Vector9d sensitivity_row(double t, const ControlParams& theta, const Trajectory& traj,
                         const PhysicalParams& p_nom, double step) {
    if (!(step > 0.0)) {
        throw std::invalid_argument("sensitivity step must be positive");
    }
    Vector9d row;
    for (std::size_t i = 0; i < kNumUncertain; ++i) {
        ControlParams up = theta;
        ControlParams down = theta;
        up[i] += step;
        down[i] -= step;
        try {
            row(static_cast<Eigen::Index>(i)) = (feedforward_voltage(t, up, traj, p_nom) -
                                                 feedforward_voltage(t, down, traj, p_nom)) /
                                                (2.0 * step);
        } catch (const std::domain_error& e) {
            throw SensitivityError(i, e.what());
        }
    }
    return row;
}

SensitivityGrid sensitivity_grid(const ControlParams& theta, const Trajectory& traj,
                                 const PhysicalParams& p_nom, const SensitivityOptions& opts) {
    SensitivityGrid g;
    g.times = uniform_nodes(traj.spec(), opts.n_nodes);
    g.rows.reserve(g.times.size());
    for (double t : g.times) {
        g.rows.push_back(sensitivity_row(t, theta, traj, p_nom, opts.step));
    }
    return g;
}

Vector9d integral_square_sensitivity(const SensitivityGrid& grid) {
    check_grid(grid);
    Vector9d s = Vector9d::Zero();
    for (std::size_t k = 0; k < grid.times.size(); ++k) {
        const double w = trapezoid_weight(grid.times, k);
        const auto& row = grid.rows[k];
        for (Eigen::Index i = 0; i < 9; ++i) {
            s(i) += w * (row(i) * row(i));
        }
    }
    return s;
}

Vector9d integral_square_sensitivity(const ControlParams& theta, const Trajectory& traj,
                                     const PhysicalParams& p_nom, const SensitivityOptions& opts) {
    return integral_square_sensitivity(sensitivity_grid(theta, traj, p_nom, opts));
}

FisherMatrix fisher_matrix(const SensitivityGrid& grid) {
    check_grid(grid);
    FisherMatrix f;
    for (std::size_t k = 0; k < grid.times.size(); ++k) {
        const double w = trapezoid_weight(grid.times, k);
        const auto& row = grid.rows[k];
        for (Eigen::Index i = 0; i < 9; ++i) {
            for (Eigen::Index j = i; j < 9; ++j) {
                f.m(i, j) += w * (row(i) * row(j));
            }
        }
    }
    for (Eigen::Index i = 0; i < 9; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            f.m(i, j) = f.m(j, i);
        }
    }
    return f;
}

FisherMatrix fisher_matrix(const ControlParams& theta, const Trajectory& traj,
                           const PhysicalParams& p_nom, const SensitivityOptions& opts) {
    return fisher_matrix(sensitivity_grid(theta, traj, p_nom, opts));
}

EigenBasis sym_eigen(const Matrix9d& input) {
    constexpr int n = 9;
    constexpr int kMaxSweeps = 100;
    Matrix9d a = 0.5 * (input + input.transpose());
    Matrix9d v = Matrix9d::Identity();
    const double norm = a.norm();

    auto off_norm = [&] {
        double s = 0.0;
        for (int p = 0; p < n; ++p) {
            for (int q = 0; q < n; ++q) {
                if (p != q) s += a(p, q) * a(p, q);
            }
        }
        return std::sqrt(s);
    };

    int sweep = 0;
    while (off_norm() > 1e-14 * norm) {
        if (++sweep > kMaxSweeps) {
            throw NumericError("Jacobi eigensolver did not converge");
        }
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                // Rotation angle that annihilates a(p, q).
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::array<int, n> order{};
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return a(i, i) > a(j, j); });

    EigenBasis out;
    for (int k = 0; k < n; ++k) {
        out.values(k) = a(order[k], order[k]);
        Vector9d col = v.col(order[k]);
        Eigen::Index imax = 0;
        col.cwiseAbs().maxCoeff(&imax);
        if (col(imax) < 0.0) col = -col;
        out.vectors.col(k) = col;
    }
    return out;
}

double deviation_D(const ControlParams& theta, const Trajectory& traj, const PhysicalParams& p_nom,
                   std::size_t n_nodes) {
    const auto nodes = uniform_nodes(traj.spec(), n_nodes);
    const auto nominal = ControlParams::ones();
    double sum = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double du = feedforward_voltage(nodes[k], theta, traj, p_nom) -
                          feedforward_voltage(nodes[k], nominal, traj, p_nom);
        sum += trapezoid_weight(nodes, k) * du * du;
    }
    return 0.5 * sum;
}

Eigen::VectorXd Reduction::anchor() const {
    return reduced_from_theta(*this, theta_star);
}

Reduction make_subset_reduction(const Vector9d& s_is, std::size_t r, ThetaBox box) {
    if (r < 1 || r > kNumUncertain) {
        throw std::invalid_argument("reduction dimension must be in [1, 9]");
    }
    std::array<std::size_t, kNumUncertain> idx{};
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        return s_is(static_cast<Eigen::Index>(i)) > s_is(static_cast<Eigen::Index>(j));
    });
    Reduction red;
    red.kind = ReductionKind::IndexSubset;
    red.r = r;
    red.box = box;
    red.free_indices.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(r));
    std::sort(red.free_indices.begin(), red.free_indices.end());
    return red;
}

Reduction make_orthogonal_reduction(const EigenBasis& basis, std::size_t r, ThetaBox box,
                                    OrthogonalMap map) {
    if (r < 1 || r > kNumUncertain) {
        throw std::invalid_argument("reduction dimension must be in [1, 9]");
    }
    Reduction red;
    red.kind = ReductionKind::Orthogonal;
    red.map = map;
    red.r = r;
    red.box = box;
    red.basis = basis.vectors.leftCols(static_cast<Eigen::Index>(r));
    red.phi_star = red.basis.transpose() * as_vector(red.theta_star);
    return red;
}

MappedTheta theta_from_reduced(const Reduction& red, const Eigen::VectorXd& x) {
    if (static_cast<std::size_t>(x.size()) != red.r) {
        throw std::invalid_argument("reduced vector has the wrong dimension");
    }
    MappedTheta out{red.theta_star, false};
    if (red.kind == ReductionKind::IndexSubset) {
        for (std::size_t k = 0; k < red.r; ++k) {
            out.theta[red.free_indices[k]] = x(static_cast<Eigen::Index>(k));
        }
    } else {
        const Eigen::VectorXd full = red.map == OrthogonalMap::Affine
                                         ? Eigen::VectorXd(as_vector(red.theta_star) +
                                                           red.basis * (x - red.phi_star))
                                         : Eigen::VectorXd(red.basis * x);
        for (std::size_t i = 0; i < kNumUncertain; ++i) {
            out.theta[i] = full(static_cast<Eigen::Index>(i));
        }
    }
    for (auto& v : out.theta.theta) {
        const double c = std::clamp(v, red.box.lo, red.box.hi);
        if (c != v) {
            out.clamped = true;
            v = c;
        }
    }
    return out;
}

Eigen::VectorXd reduced_from_theta(const Reduction& red, const ControlParams& theta) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(red.r));
    if (red.kind == ReductionKind::IndexSubset) {
        for (std::size_t k = 0; k < red.r; ++k) {
            x(static_cast<Eigen::Index>(k)) = theta[red.free_indices[k]];
        }
        return x;
    }
    if (red.map == OrthogonalMap::Affine) {
        return red.phi_star + red.basis.transpose() * (as_vector(theta) - as_vector(red.theta_star));
    }
    return red.basis.transpose() * as_vector(theta);
}

NominalAnalysis analyze_nominal(const Trajectory& traj, const PhysicalParams& p_nom,
                                const SensitivityOptions& opts) {
    NominalAnalysis a;
    a.grid = sensitivity_grid(ControlParams::ones(), traj, p_nom, opts);
    a.s_is = integral_square_sensitivity(a.grid);
    a.fisher = fisher_matrix(a.grid);
    a.eigen = sym_eigen(a.fisher);
    return a;
}

}  // namespace softland
