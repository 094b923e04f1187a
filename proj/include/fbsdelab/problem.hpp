#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fbsdelab/errors.hpp"

namespace fbsdelab {

// sup-norm bound C0 on (sigma, f(.,.,0,0), g), ellipticity floor c0,
// Lipschitz constant L — valid on the problem's declared probe box.
struct CoefficientBounds {
    double C0 = 1.0;
    double c0 = 1.0;
    double L = 1.0;
};

// Which arguments a coefficient actually varies in; drives probing and
// the mollification tensor product.
struct ArgMask {
    bool t = false, x = false, y = false, z = false;
    int active() const { return int(t) + int(x) + int(y) + int(z); }
};

using Scalar4Fn = std::function<double(double, double, double, double)>;  // (t,x,y,z)
using Scalar1Fn = std::function<double(double)>;                          // (x)
// path-dependent drift: (t, time nodes <= t, path values at those nodes)
using PathDriftFn = std::function<double(double, const Eigen::VectorXd&, const Eigen::VectorXd&)>;

// The tuple (b, sigma, f, g) with assumption metadata. Scalar closures are
// authoritative for dim_x == 1 (the whole catalog); the Eigen closures are
// used for dim_x == 2. Immutable after construction; all transforms return
// fresh sets.
struct CoefficientSet {
    std::string name;
    int dim_x = 1;

    Scalar4Fn b1;       // null means b == 0
    Scalar4Fn sigma1;
    Scalar4Fn f1;       // null means f == 0
    Scalar1Fn g1;       // null means g == 0

    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&, double, const Eigen::RowVectorXd&)> bd;
    std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&, double, const Eigen::RowVectorXd&)> sigmad;
    std::function<double(double, const Eigen::VectorXd&, double, const Eigen::RowVectorXd&)> fd;
    std::function<double(const Eigen::VectorXd&)> gd;

    PathDriftFn path_drift;  // Tsirelson-type problems; bypasses b when set

    CoefficientBounds bounds;
    ArgMask sigma_args, f_args;
    bool g_varies = true;
    bool mollified = false;

    double b(double t, double x, double y, double z) const { return b1 ? b1(t, x, y, z) : 0.0; }
    double sigma(double t, double x, double y, double z) const { return sigma1(t, x, y, z); }
    double f(double t, double x, double y, double z) const { return f1 ? f1(t, x, y, z) : 0.0; }
    double g(double x) const { return g1 ? g1(x) : 0.0; }

    Eigen::MatrixXd sigma_mat(double t, const Eigen::VectorXd& x, double y, const Eigen::RowVectorXd& z) const;
    Eigen::VectorXd b_vec(double t, const Eigen::VectorXd& x, double y, const Eigen::RowVectorXd& z) const;
    double f_val(double t, const Eigen::VectorXd& x, double y, const Eigen::RowVectorXd& z) const;
    double g_val(const Eigen::VectorXd& x) const;
};

// Sampling plan for assumption checks: a bounded box in (t,x,y,z), a random
// sample count, per-axis sweep count, and a seed. Part of every report.
struct ProbePlan {
    double t_lo = 0.0, t_hi = 1.0;
    Eigen::VectorXd x_lo, x_hi;   // per spatial dimension
    double y_lo = -1.0, y_hi = 1.0;
    double z_lo = -1.0, z_hi = 1.0;
    int count = 10000;
    std::uint64_t seed = 1;

    static ProbePlan box1d(double xlo, double xhi, int count = 10000, std::uint64_t seed = 1);
};

struct AssumptionCheck {
    std::string name;
    int probe_count = 0;
    double worst_violation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    double lipschitz_x = 0.0, lipschitz_y = 0.0, lipschitz_z = 0.0;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    const AssumptionCheck* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

AssumptionReport validate_assumptions(const CoefficientSet& coeffs, const ProbePlan& probes);

// Smooth each of (sigma, f, g) by convolution with a compactly supported
// bump kernel; bandwidths found by halving search so that on probes
// |sigma_n - sigma| <= eps_n and |f_n - f|, |g_n - g| <= 1/n.
CoefficientSet mollify(const CoefficientSet& coeffs, int n, double eps_n, const ProbePlan& probes);

// f -> f_n + (2a-1)*(2/n), g -> g_n + (2a-1)*(1/n);  a=1 is the upper
// branch, a=0 the lower, a=1/2 the unshifted mollified pair.
CoefficientSet shift_coefficients(const CoefficientSet& coeffs, int n, double alpha);

struct DriftRemoval {
    CoefficientSet driftless;
    // Girsanov kernel theta = -sigma^{-1} b
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&, double, const Eigen::RowVectorXd&)> kernel;
    Scalar4Fn kernel1;
};

DriftRemoval remove_drift(const CoefficientSet& coeffs);

struct WeakToStrongResult {
    bool invertible = false;
    CoefficientSet strong;
    Scalar4Fn psi;                       // inverse of z -> z*sigma(t,x,y,z)
    double non_monotone_lo = 0.0;
    double non_monotone_hi = 0.0;
};

// d=1 only: invert z -> z*sigma(t,x,y,z) by monotonicity probe + bisection
// on the plan's z-range, producing the strong-formulation coefficients.
WeakToStrongResult weak_to_strong(const CoefficientSet& coeffs, const ProbePlan& probes);

}  // namespace fbsdelab
