#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fbsdelab/grid.hpp"

namespace fbsdelab {

// Grid-sampled decoupling function u and its spatial gradient du.
// Row k of u holds the slice at t_k; for d=2 node index is j1*(nx2+1)+j2.
struct DecouplingField {
    TimeSpaceGrid grid;
    Eigen::MatrixXd u;                  // (n_t+1) x total_nodes
    std::vector<Eigen::MatrixXd> du;    // one matrix per spatial dimension

    struct Meta {
        int picard_iters_used = 0;
        double residual_sup = 0.0;
        bool remollified = false;
    } meta;

    bool contains1(double x) const {
        return x >= grid.space_lo[0] && x <= grid.space_hi[0];
    }

    // bilinear interpolation in (t,x); queries are clamped to the box
    double value1(double t, double x) const { return interp1(u, t, x); }
    double gradient1(double t, double x) const { return interp1(du[0], t, x); }

    double value(double t, const Eigen::VectorXd& x) const {
        if (grid.dim() == 1) return value1(t, x[0]);
        return interp2(u, t, x[0], x[1]);
    }
    Eigen::RowVectorXd gradient(double t, const Eigen::VectorXd& x) const {
        Eigen::RowVectorXd g(grid.dim());
        if (grid.dim() == 1) {
            g[0] = gradient1(t, x[0]);
        } else {
            for (int d = 0; d < 2; ++d) g[d] = interp2(du[d], t, x[0], x[1]);
        }
        return g;
    }

    // Central differences in space (one-sided copy at the edges), exact
    // inverse of what the solver stores.
    void recompute_gradient() {
        const int d = grid.dim();
        du.assign(d, Eigen::MatrixXd::Zero(u.rows(), u.cols()));
        if (d == 1) {
            const int nn = grid.nodes(0);
            const double h = grid.dx(0);
            for (int k = 0; k < u.rows(); ++k) {
                for (int j = 1; j + 1 < nn; ++j)
                    du[0](k, j) = (u(k, j + 1) - u(k, j - 1)) / (2.0 * h);
                du[0](k, 0) = du[0](k, 1);
                du[0](k, nn - 1) = du[0](k, nn - 2);
            }
        } else {
            const int n1 = grid.nodes(0), n2 = grid.nodes(1);
            const double h1 = grid.dx(0), h2 = grid.dx(1);
            auto idx = [n2](int j1, int j2) { return j1 * n2 + j2; };
            for (int k = 0; k < u.rows(); ++k) {
                for (int j1 = 0; j1 < n1; ++j1)
                    for (int j2 = 0; j2 < n2; ++j2) {
                        const int j1m = std::max(j1 - 1, 0), j1p = std::min(j1 + 1, n1 - 1);
                        const int j2m = std::max(j2 - 1, 0), j2p = std::min(j2 + 1, n2 - 1);
                        du[0](k, idx(j1, j2)) = (u(k, idx(j1p, j2)) - u(k, idx(j1m, j2))) / ((j1p - j1m) * h1);
                        du[1](k, idx(j1, j2)) = (u(k, idx(j1, j2p)) - u(k, idx(j1, j2m))) / ((j2p - j2m) * h2);
                    }
            }
        }
    }

private:
    double interp1(const Eigen::MatrixXd& a, double t, double x) const {
        const double dt = grid.dt(), h = grid.dx(0);
        double s = (t - 0.0) / dt;
        s = std::min(std::max(s, 0.0), static_cast<double>(grid.n_t));
        int k = std::min(static_cast<int>(s), grid.n_t - 1);
        const double wt = s - k;
        double r = (x - grid.space_lo[0]) / h;
        r = std::min(std::max(r, 0.0), static_cast<double>(grid.n_x[0]));
        int j = std::min(static_cast<int>(r), grid.n_x[0] - 1);
        const double wx = r - j;
        return (1 - wt) * ((1 - wx) * a(k, j) + wx * a(k, j + 1)) +
               wt * ((1 - wx) * a(k + 1, j) + wx * a(k + 1, j + 1));
    }

    double interp2(const Eigen::MatrixXd& a, double t, double x1, double x2) const {
        const double dt = grid.dt();
        double s = t / dt;
        s = std::min(std::max(s, 0.0), static_cast<double>(grid.n_t));
        int k = std::min(static_cast<int>(s), grid.n_t - 1);
        const double wt = s - k;
        auto plane = [&](int kk) {
            const int n2 = grid.nodes(1);
            double r1 = (x1 - grid.space_lo[0]) / grid.dx(0);
            r1 = std::min(std::max(r1, 0.0), static_cast<double>(grid.n_x[0]));
            int j1 = std::min(static_cast<int>(r1), grid.n_x[0] - 1);
            const double w1 = r1 - j1;
            double r2 = (x2 - grid.space_lo[1]) / grid.dx(1);
            r2 = std::min(std::max(r2, 0.0), static_cast<double>(grid.n_x[1]));
            int j2 = std::min(static_cast<int>(r2), grid.n_x[1] - 1);
            const double w2 = r2 - j2;
            auto idx = [n2](int a1, int a2) { return a1 * n2 + a2; };
            return (1 - w1) * ((1 - w2) * a(kk, idx(j1, j2)) + w2 * a(kk, idx(j1, j2 + 1))) +
                   w1 * ((1 - w2) * a(kk, idx(j1 + 1, j2)) + w2 * a(kk, idx(j1 + 1, j2 + 1)));
        };
        return (1 - wt) * plane(k) + wt * plane(k + 1);
    }
};

void write_field(const DecouplingField& field, const std::string& path);
DecouplingField read_field(const std::string& path);

}  // namespace fbsdelab
