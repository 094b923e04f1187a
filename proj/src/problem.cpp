#include "fbsdelab/problem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "fbsdelab/rng.hpp"

namespace fbsdelab {

Eigen::MatrixXd CoefficientSet::sigma_mat(double t, const Eigen::VectorXd& x, double y,
                                          const Eigen::RowVectorXd& z) const {
    if (dim_x == 1 && sigma1) return Eigen::MatrixXd::Constant(1, 1, sigma1(t, x[0], y, z[0]));
    return sigmad(t, x, y, z);
}

Eigen::VectorXd CoefficientSet::b_vec(double t, const Eigen::VectorXd& x, double y,
                                      const Eigen::RowVectorXd& z) const {
    if (dim_x == 1) return Eigen::VectorXd::Constant(1, b(t, x[0], y, z[0]));
    if (bd) return bd(t, x, y, z);
    return Eigen::VectorXd::Zero(dim_x);
}

double CoefficientSet::f_val(double t, const Eigen::VectorXd& x, double y,
                             const Eigen::RowVectorXd& z) const {
    if (dim_x == 1) return f(t, x[0], y, z[0]);
    return fd ? fd(t, x, y, z) : 0.0;
}

double CoefficientSet::g_val(const Eigen::VectorXd& x) const {
    if (dim_x == 1) return g(x[0]);
    return gd ? gd(x) : 0.0;
}

ProbePlan ProbePlan::box1d(double xlo, double xhi, int count, std::uint64_t seed) {
    ProbePlan p;
    p.x_lo = Eigen::VectorXd::Constant(1, xlo);
    p.x_hi = Eigen::VectorXd::Constant(1, xhi);
    p.count = count;
    p.seed = seed;
    return p;
}

namespace {

void require_finite(double v, const char* what, double t, const Eigen::VectorXd& x, double y,
                    const Eigen::RowVectorXd& z) {
    if (std::isfinite(v)) return;
    std::ostringstream os;
    os << "non-finite " << what << " at probe t=" << t << " x=" << x.transpose() << " y=" << y
       << " z=" << z;
    throw InvalidCoefficientError(os.str());
}

struct Probe {
    double t, y;
    Eigen::VectorXd x;
    Eigen::RowVectorXd z;
};

Probe random_probe(const ProbePlan& plan, Rng& rng, int d) {
    Probe p;
    p.t = plan.t_lo + (plan.t_hi - plan.t_lo) * rng.uniform();
    p.y = plan.y_lo + (plan.y_hi - plan.y_lo) * rng.uniform();
    p.x.resize(d);
    for (int i = 0; i < d; ++i) p.x[i] = plan.x_lo[i] + (plan.x_hi[i] - plan.x_lo[i]) * rng.uniform();
    p.z.resize(d);
    for (int i = 0; i < d; ++i) p.z[i] = plan.z_lo + (plan.z_hi - plan.z_lo) * rng.uniform();
    return p;
}

}  // namespace

AssumptionReport validate_assumptions(const CoefficientSet& coeffs, const ProbePlan& probes) {
    const int d = coeffs.dim_x;
    const CoefficientBounds bnd = coeffs.bounds;
    AssumptionReport report;
    Rng rng(probes.seed);

    double sigma_bound = 0.0, f0_bound = 0.0, g_bound = 0.0;
    double symmetry = 0.0, ellipticity = 0.0, cond_v = 0.0;

    auto eval_all = [&](const Probe& p) {
        Eigen::MatrixXd s = coeffs.sigma_mat(p.t, p.x, p.y, p.z);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) require_finite(s(i, j), "sigma", p.t, p.x, p.y, p.z);
        const Eigen::RowVectorXd z0 = Eigen::RowVectorXd::Zero(d);
        const double f0 = coeffs.f_val(p.t, p.x, 0.0, z0);
        require_finite(f0, "f(t,x,0,0)", p.t, p.x, 0.0, z0);
        const double gv = coeffs.g_val(p.x);
        require_finite(gv, "g", p.t, p.x, p.y, p.z);

        sigma_bound = std::max(sigma_bound, s.operatorNorm() - bnd.C0);
        f0_bound = std::max(f0_bound, std::abs(f0) - bnd.C0);
        g_bound = std::max(g_bound, std::abs(gv) - bnd.C0);
        symmetry = std::max(symmetry, (s - s.transpose()).cwiseAbs().maxCoeff());
        if (d == 1) {
            ellipticity = std::max(ellipticity, bnd.c0 - s(0, 0));
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
            ellipticity = std::max(ellipticity, bnd.c0 - es.eigenvalues().minCoeff());
        }
    };

    const int n_random = probes.count;
    for (int i = 0; i < n_random; ++i) eval_all(random_probe(probes, rng, d));

    // deterministic per-axis sweeps; adjacent quotients give the Lipschitz
    // estimates at the plan's resolution
    const int n_sweep = std::max(probes.count, 3);
    auto mid = [&](int i) { return 0.5 * (probes.x_lo[i] + probes.x_hi[i]); };
    const double tmid = 0.5 * (probes.t_lo + probes.t_hi);
    const double ymid = 0.5 * (probes.y_lo + probes.y_hi);
    const double zmid = 0.5 * (probes.z_lo + probes.z_hi);

    double lip_x = 0.0, lip_y = 0.0, lip_z = 0.0;

    auto coeff_tuple = [&](double t, const Eigen::VectorXd& x, double y, const Eigen::RowVectorXd& z) {
        Eigen::MatrixXd s = coeffs.sigma_mat(t, x, y, z);
        const double snorm = (d == 1) ? s(0, 0) : s.operatorNorm();
        return std::array<double, 3>{snorm, coeffs.f_val(t, x, y, z), coeffs.g_val(x)};
    };

    // x sweep (first coordinate; others pinned at midpoints)
    {
        Eigen::VectorXd x(d);
        for (int i = 0; i < d; ++i) x[i] = mid(i);
        Eigen::RowVectorXd z = Eigen::RowVectorXd::Constant(d, zmid);
        std::array<double, 3> prev{};
        double xprev = 0.0;
        for (int k = 0; k < n_sweep; ++k) {
            x[0] = probes.x_lo[0] + (probes.x_hi[0] - probes.x_lo[0]) * k / double(n_sweep - 1);
            eval_all(Probe{tmid, ymid, x, z});
            auto cur = coeff_tuple(tmid, x, ymid, z);
            if (k > 0) {
                const double h = std::abs(x[0] - xprev);
                for (int c = 0; c < 3; ++c) lip_x = std::max(lip_x, std::abs(cur[c] - prev[c]) / h);
            }
            prev = cur;
            xprev = x[0];
        }
    }
    // y sweep
    {
        Eigen::VectorXd x(d);
        for (int i = 0; i < d; ++i) x[i] = mid(i);
        Eigen::RowVectorXd z = Eigen::RowVectorXd::Constant(d, zmid);
        std::array<double, 3> prev{};
        double yprev = 0.0;
        for (int k = 0; k < n_sweep; ++k) {
            const double y = probes.y_lo + (probes.y_hi - probes.y_lo) * k / double(n_sweep - 1);
            eval_all(Probe{tmid, y, x, z});
            auto cur = coeff_tuple(tmid, x, y, z);
            if (k > 0) {
                const double h = std::abs(y - yprev);
                for (int c = 0; c < 2; ++c) lip_y = std::max(lip_y, std::abs(cur[c] - prev[c]) / h);
            }
            prev = cur;
            yprev = y;
        }
    }
    // z sweep (first component)
    {
        Eigen::VectorXd x(d);
        for (int i = 0; i < d; ++i) x[i] = mid(i);
        Eigen::RowVectorXd z = Eigen::RowVectorXd::Constant(d, zmid);
        std::array<double, 3> prev{};
        double zprev = 0.0;
        for (int k = 0; k < n_sweep; ++k) {
            z[0] = probes.z_lo + (probes.z_hi - probes.z_lo) * k / double(n_sweep - 1);
            eval_all(Probe{tmid, ymid, x, z});
            auto cur = coeff_tuple(tmid, x, ymid, z);
            if (k > 0) {
                const double h = std::abs(z[0] - zprev);
                for (int c = 0; c < 2; ++c) lip_z = std::max(lip_z, std::abs(cur[c] - prev[c]) / h);
            }
            prev = cur;
            zprev = z[0];
        }
    }

    // Assumption (v): either the z-modulus bound on sigma, or d=1.
    if (d > 1) {
        Rng r2(probes.seed + 17);
        for (int i = 0; i < probes.count; ++i) {
            Probe p = random_probe(probes, r2, d);
            Eigen::RowVectorXd z2(d);
            for (int j = 0; j < d; ++j) z2[j] = probes.z_lo + (probes.z_hi - probes.z_lo) * r2.uniform();
            Eigen::MatrixXd s1 = coeffs.sigma_mat(p.t, p.x, p.y, p.z);
            Eigen::MatrixXd s2 = coeffs.sigma_mat(p.t, p.x, p.y, z2);
            const double lhs = (s1 - s2).operatorNorm();
            const double rhs = bnd.C0 / (1.0 + p.z.norm()) * (p.z - z2).norm();
            cond_v = std::max(cond_v, lhs - rhs);
        }
    }

    const int total = n_random + 3 * n_sweep;
    auto add = [&](const std::string& name, double worst, double tol, int cnt) {
        AssumptionCheck c;
        c.name = name;
        c.probe_count = cnt;
        c.worst_violation = std::max(worst, 0.0);
        c.tolerance = tol;
        c.pass = c.worst_violation <= tol;
        report.checks.push_back(c);
    };
    add("sigma_bound", sigma_bound, 1e-9, total);
    add("f0_bound", f0_bound, 1e-9, total);
    add("g_bound", g_bound, 1e-9, total);
    add("sigma_symmetry", symmetry, 1e-12, total);
    add("ellipticity", ellipticity, 1e-9, total);
    add("lipschitz_x", lip_x - bnd.L, 1e-9, n_sweep);
    add("lipschitz_y", lip_y - bnd.L, 1e-9, n_sweep);
    add("lipschitz_z", lip_z - bnd.L, 1e-9, n_sweep);
    if (d > 1) add("sigma_z_modulus", cond_v, 1e-9, probes.count);
    report.lipschitz_x = lip_x;
    report.lipschitz_y = lip_y;
    report.lipschitz_z = lip_z;
    return report;
}

// ---- mollification -------------------------------------------------------

namespace {

// normalized bump-kernel quadrature nodes/weights on [-1,1]; weights are
// renormalized so constants are reproduced exactly and summation is done in
// symmetric pairs so linear functions are reproduced exactly as well
struct BumpQuadrature {
    std::vector<double> nodes, weights;
    BumpQuadrature() {
        const int n = 256;  // Simpson intervals
        nodes.resize(n + 1);
        weights.resize(n + 1);
        double total = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double s = -1.0 + 2.0 * i / n;
            nodes[i] = s;
            const double k = (std::abs(s) < 1.0) ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
            double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            weights[i] = w * k;
            total += weights[i];
        }
        for (auto& w : weights) w /= total;
    }
};

const BumpQuadrature& bump_quad() {
    static BumpQuadrature q;
    return q;
}

// convolution at bandwidth h of a univariate slice, symmetric-pair summation
template <class F>
double convolve1(const F& f, double v, double h) {
    const auto& q = bump_quad();
    const int n = static_cast<int>(q.nodes.size());
    double acc = q.weights[n / 2] * f(v);
    for (int i = 0; i < n / 2; ++i)
        acc += q.weights[i] * f(v - h * q.nodes[i]) + q.weights[n - 1 - i] * f(v - h * q.nodes[n - 1 - i]);
    return acc;
}

enum class Var { T, X, Y, Z };

std::vector<Var> active_vars(const ArgMask& m) {
    std::vector<Var> v;
    if (m.t) v.push_back(Var::T);
    if (m.x) v.push_back(Var::X);
    if (m.y) v.push_back(Var::Y);
    if (m.z) v.push_back(Var::Z);
    return v;
}

// tensor-product mollification of a (t,x,y,z) coefficient over its active
// variables, one shared bandwidth
Scalar4Fn mollify4(const Scalar4Fn& f, const ArgMask& mask, double h) {
    auto vars = active_vars(mask);
    if (vars.empty()) return f;
    return [f, vars, h](double t, double x, double y, double z) {
        std::function<double(int, double, double, double, double)> rec =
            [&](int level, double tt, double xx, double yy, double zz) -> double {
            if (level == static_cast<int>(vars.size())) return f(tt, xx, yy, zz);
            auto inner = [&](double v) {
                double t2 = tt, x2 = xx, y2 = yy, z2 = zz;
                switch (vars[level]) {
                    case Var::T: t2 = v; break;
                    case Var::X: x2 = v; break;
                    case Var::Y: y2 = v; break;
                    case Var::Z: z2 = v; break;
                }
                return rec(level + 1, t2, x2, y2, z2);
            };
            double base = 0.0;
            switch (vars[level]) {
                case Var::T: base = tt; break;
                case Var::X: base = xx; break;
                case Var::Y: base = yy; break;
                case Var::Z: base = zz; break;
            }
            return convolve1(inner, base, h);
        };
        return rec(0, t, x, y, z);
    };
}

// sampled sup distance between a coefficient and its mollification over the
// probe box, sweeping each active variable
double mollify_error4(const Scalar4Fn& orig, const Scalar4Fn& moll, const ArgMask& mask,
                      const ProbePlan& plan) {
    auto vars = active_vars(mask);
    if (vars.empty()) return 0.0;
    const int n_pts = 801;
    const double tmid = 0.5 * (plan.t_lo + plan.t_hi);
    const double xmid = 0.5 * (plan.x_lo[0] + plan.x_hi[0]);
    const double ymid = 0.5 * (plan.y_lo + plan.y_hi);
    const double zmid = 0.5 * (plan.z_lo + plan.z_hi);
    double worst = 0.0;
    for (Var v : vars) {
        double lo = 0, hi = 0;
        switch (v) {
            case Var::T: lo = plan.t_lo; hi = plan.t_hi; break;
            case Var::X: lo = plan.x_lo[0]; hi = plan.x_hi[0]; break;
            case Var::Y: lo = plan.y_lo; hi = plan.y_hi; break;
            case Var::Z: lo = plan.z_lo; hi = plan.z_hi; break;
        }
        for (int i = 0; i < n_pts; ++i) {
            const double s = lo + (hi - lo) * i / double(n_pts - 1);
            double t = tmid, x = xmid, y = ymid, z = zmid;
            switch (v) {
                case Var::T: t = s; break;
                case Var::X: x = s; break;
                case Var::Y: y = s; break;
                case Var::Z: z = s; break;
            }
            worst = std::max(worst, std::abs(orig(t, x, y, z) - moll(t, x, y, z)));
        }
    }
    return worst;
}

// bandwidth halving search against a sampled sup target
template <class MakeFn, class ErrFn>
double search_bandwidth(const MakeFn& make, const ErrFn& err, double h0, double target,
                        const char* what) {
    double h = h0;
    for (int it = 0; it < 60; ++it) {
        if (err(make(h)) <= target) return h;
        h *= 0.5;
    }
    throw MollificationFailure(std::string("mollification bandwidth search failed for ") + what);
}

}  // namespace

CoefficientSet mollify(const CoefficientSet& coeffs, int n, double eps_n, const ProbePlan& probes) {
    if (coeffs.dim_x != 1) throw ConfigurationError("mollify: only dim_x == 1 coefficients supported");
    if (eps_n <= 0.0 || n < 1) throw std::invalid_argument("mollify: need eps_n > 0 and n >= 1");
    CoefficientSet out = coeffs;
    out.name = coeffs.name + "-mollified";
    const double range = probes.x_hi[0] - probes.x_lo[0];
    const double h0 = std::max(range, 1.0) / 4.0;

    Scalar4Fn sig = coeffs.sigma1;
    if (coeffs.sigma_args.active() > 0) {
        const double h = search_bandwidth(
            [&](double hh) { return mollify4(sig, coeffs.sigma_args, hh); },
            [&](const Scalar4Fn& m) { return mollify_error4(sig, m, coeffs.sigma_args, probes); }, h0,
            eps_n, "sigma");
        out.sigma1 = mollify4(sig, coeffs.sigma_args, h);
    }
    if (coeffs.f1 && coeffs.f_args.active() > 0) {
        Scalar4Fn f = coeffs.f1;
        const double h = search_bandwidth(
            [&](double hh) { return mollify4(f, coeffs.f_args, hh); },
            [&](const Scalar4Fn& m) { return mollify_error4(f, m, coeffs.f_args, probes); }, h0,
            1.0 / n, "f");
        out.f1 = mollify4(f, coeffs.f_args, h);
    }
    if (coeffs.g1 && coeffs.g_varies) {
        Scalar1Fn g = coeffs.g1;
        auto make = [&](double hh) {
            return Scalar1Fn([g, hh](double x) { return convolve1(g, x, hh); });
        };
        auto err = [&](const Scalar1Fn& m) {
            const int n_pts = 801;
            double worst = 0.0;
            for (int i = 0; i < n_pts; ++i) {
                const double x = probes.x_lo[0] + range * i / double(n_pts - 1);
                worst = std::max(worst, std::abs(g(x) - m(x)));
            }
            return worst;
        };
        const double h = search_bandwidth(make, err, h0, 1.0 / n, "g");
        out.g1 = make(h);
    }
    out.bounds.C0 = coeffs.bounds.C0 + std::max(eps_n, 1.0 / n);
    out.bounds.c0 = coeffs.bounds.c0 - eps_n;
    out.mollified = true;
    return out;
}

CoefficientSet shift_coefficients(const CoefficientSet& coeffs, int n, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("shift_coefficients: alpha must be in [0,1]");
    if (!coeffs.mollified) throw std::invalid_argument("shift_coefficients: coefficients must be mollified first");
    CoefficientSet out = coeffs;
    const double fshift = (2.0 * alpha - 1.0) * 2.0 / n;
    const double gshift = (2.0 * alpha - 1.0) * 1.0 / n;
    Scalar4Fn f = coeffs.f1;
    out.f1 = [f, fshift](double t, double x, double y, double z) {
        return (f ? f(t, x, y, z) : 0.0) + fshift;
    };
    Scalar1Fn g = coeffs.g1;
    out.g1 = [g, gshift](double x) { return (g ? g(x) : 0.0) + gshift; };
    out.bounds.C0 = coeffs.bounds.C0 + std::abs(fshift);
    return out;
}

DriftRemoval remove_drift(const CoefficientSet& coeffs) {
    DriftRemoval out;
    out.driftless = coeffs;
    out.driftless.name = coeffs.name + "-driftless";
    if (coeffs.dim_x == 1) {
        Scalar4Fn b = coeffs.b1;
        Scalar4Fn s = coeffs.sigma1;
        out.driftless.b1 = nullptr;
        out.kernel1 = [b, s](double t, double x, double y, double z) {
            const double sv = s(t, x, y, z);
            if (!(sv > 0.0)) throw EllipticityError("remove_drift: singular sigma at probe");
            return b ? -b(t, x, y, z) / sv : 0.0;
        };
        Scalar4Fn k1 = out.kernel1;
        out.kernel = [k1](double t, const Eigen::VectorXd& x, double y, const Eigen::RowVectorXd& z) {
            return Eigen::VectorXd::Constant(1, k1(t, x[0], y, z[0]));
        };
    } else {
        auto b = coeffs.bd;
        auto s = coeffs.sigmad;
        out.driftless.bd = nullptr;
        out.kernel = [b, s](double t, const Eigen::VectorXd& x, double y, const Eigen::RowVectorXd& z) {
            Eigen::MatrixXd sv = s(t, x, y, z);
            Eigen::FullPivLU<Eigen::MatrixXd> lu(sv);
            if (!lu.isInvertible()) throw EllipticityError("remove_drift: singular sigma at probe");
            Eigen::VectorXd bv = b ? b(t, x, y, z) : Eigen::VectorXd::Zero(x.size());
            return Eigen::VectorXd(-lu.solve(bv));
        };
    }
    return out;
}

WeakToStrongResult weak_to_strong(const CoefficientSet& coeffs, const ProbePlan& probes) {
    if (coeffs.dim_x != 1) throw ConfigurationError("weak_to_strong: requires d == 1");
    WeakToStrongResult out;
    const double zlo = probes.z_lo, zhi = probes.z_hi;
    const double tmid = 0.5 * (probes.t_lo + probes.t_hi);
    const double xmid = 0.5 * (probes.x_lo[0] + probes.x_hi[0]);
    const double ymid = 0.5 * (probes.y_lo + probes.y_hi);
    Scalar4Fn s = coeffs.sigma1;
    auto m = [s](double t, double x, double y, double z) { return z * s(t, x, y, z); };

    const int n_pts = 2001;
    double prev = m(tmid, xmid, ymid, zlo);
    for (int i = 1; i < n_pts; ++i) {
        const double z = zlo + (zhi - zlo) * i / double(n_pts - 1);
        const double cur = m(tmid, xmid, ymid, z);
        if (cur <= prev) {
            out.invertible = false;
            out.non_monotone_lo = zlo + (zhi - zlo) * (i - 1) / double(n_pts - 1);
            out.non_monotone_hi = z;
            return out;
        }
        prev = cur;
    }

    // psi(t,x,y,w): bisection of z*sigma(z) = w on [zlo, zhi]
    Scalar4Fn psi = [m, zlo, zhi](double t, double x, double y, double w) {
        double a = zlo, b = zhi;
        double fa = m(t, x, y, a) - w, fb = m(t, x, y, b) - w;
        if (fa > 0.0 || fb < 0.0)
            throw std::domain_error("weak_to_strong: psi target outside probed monotone range");
        for (int it = 0; it < 200; ++it) {
            const double c = 0.5 * (a + b);
            const double fc = m(t, x, y, c) - w;
            if (fc <= 0.0) { a = c; fa = fc; } else { b = c; fb = fc; }
            if (b - a < 1e-14 * std::max(1.0, std::abs(a) + std::abs(b))) break;
        }
        return 0.5 * (a + b);
    };

    out.invertible = true;
    out.psi = psi;
    out.strong = coeffs;
    out.strong.name = coeffs.name + "-strong";
    Scalar4Fn b1 = coeffs.b1, f1 = coeffs.f1, sg = coeffs.sigma1;
    out.strong.b1 = [b1, psi](double t, double x, double y, double z) {
        return b1 ? b1(t, x, y, psi(t, x, y, z)) : 0.0;
    };
    out.strong.sigma1 = [sg, psi](double t, double x, double y, double z) {
        return sg(t, x, y, psi(t, x, y, z));
    };
    out.strong.f1 = [f1, b1, psi](double t, double x, double y, double z) {
        const double p = psi(t, x, y, z);
        const double bt = b1 ? b1(t, x, y, p) : 0.0;
        return (f1 ? f1(t, x, y, p) : 0.0) - p * bt;
    };
    return out;
}

}  // namespace fbsdelab
