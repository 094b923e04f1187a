#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace fbsdelab {

// Uniform tensor grid on [0,T] x [lo,hi]^d, d <= 2.
struct TimeSpaceGrid {
    double horizon = 1.0;
    int n_t = 100;
    Eigen::VectorXd space_lo;
    Eigen::VectorXd space_hi;
    Eigen::VectorXi n_x;

    int dim() const { return static_cast<int>(space_lo.size()); }
    double dt() const { return horizon / n_t; }
    double dx(int d = 0) const { return (space_hi[d] - space_lo[d]) / n_x[d]; }
    int nodes(int d = 0) const { return n_x[d] + 1; }
    int total_nodes() const {
        int n = 1;
        for (int d = 0; d < dim(); ++d) n *= nodes(d);
        return n;
    }
    double node(int d, int j) const { return space_lo[d] + j * dx(d); }
    double time_node(int k) const { return k * dt(); }

    void validate() const {
        if (dim() < 1 || dim() > 2) throw std::invalid_argument("grid: spatial dimension must be 1 or 2");
        if (n_t < 1) throw std::invalid_argument("grid: n_t must be >= 1");
        if (horizon <= 0.0) throw std::invalid_argument("grid: horizon must be positive");
        for (int d = 0; d < dim(); ++d) {
            if (n_x[d] < 3) throw std::invalid_argument("grid: n_x must be >= 3 in every dimension");
            if (space_hi[d] <= space_lo[d]) throw std::invalid_argument("grid: space_hi must exceed space_lo");
        }
    }

    static TimeSpaceGrid uniform1d(double T, int nt, double lo, double hi, int nx) {
        TimeSpaceGrid g;
        g.horizon = T;
        g.n_t = nt;
        g.space_lo = Eigen::VectorXd::Constant(1, lo);
        g.space_hi = Eigen::VectorXd::Constant(1, hi);
        g.n_x = Eigen::VectorXi::Constant(1, nx);
        g.validate();
        return g;
    }

    static TimeSpaceGrid uniform2d(double T, int nt, double lo, double hi, int nx) {
        TimeSpaceGrid g;
        g.horizon = T;
        g.n_t = nt;
        g.space_lo = Eigen::VectorXd::Constant(2, lo);
        g.space_hi = Eigen::VectorXd::Constant(2, hi);
        g.n_x = Eigen::VectorXi::Constant(2, nx);
        g.validate();
        return g;
    }
};

}  // namespace fbsdelab
