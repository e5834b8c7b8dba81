#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/CholmodSupport>
#include <Eigen/Sparse>

#include "error.hpp"
#include "model.hpp"

// Embedded LP solver: Mehrotra predictor-corrector primal-dual interior-point
// method on the normal equations, for
//
//     min c.x  s.t.  A x = b,  x >= 0.
//
// Presolve drops empty rows and equilibrates A (Ruiz). The flow-graph model
// has many linearly dependent rows, so A D A^T is singular; its null space is
// exactly null(A^T), which the Newton direction never sees (only A^T dy
// enters dx and dz). The normal matrix is therefore factored with a tiny
// diagonal shift and each solve is polished by iterative refinement against
// the unshifted matrix. A contradictory system is detected at the start: the
// least-norm solution of A x = b then leaves a residual.
//
// Interior-point iterates never cycle, so degeneracy needs no pivoting rule.
// Without crossover the result on a degenerate or tied problem is a point in
// the relative interior of the optimal face, not necessarily a vertex.
namespace tsplp {

struct SolverSettings {
    double feas_tol = 1e-7;
    double opt_tol = 1e-7;
    long max_iterations = 0;  // 0: 10 * (rows + cols)
    bool scaling = true;
};

enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit };

inline std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::iteration_limit: return "iteration_limit";
    }
    return "?";
}

struct Solution {
    SolveStatus status = SolveStatus::iteration_limit;
    double objective = std::numeric_limits<double>::quiet_NaN();
    double dual_objective = std::numeric_limits<double>::quiet_NaN();
    Point point;
    double max_primal_residual = std::numeric_limits<double>::infinity();
    // max(relative duality gap, relative dual residual)
    double optimality_certificate = std::numeric_limits<double>::infinity();
    long iterations = 0;
    int rows_removed = 0;
    std::string note;
};

namespace detail {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vec = Eigen::VectorXd;

inline SpMat to_eigen(const LinearModel& lm, const std::vector<int>& keep_rows) {
    std::vector<Eigen::Triplet<double, int>> trip;
    trip.reserve(static_cast<std::size_t>(lm.nonzeros()));
    for (std::size_t k = 0; k < keep_rows.size(); ++k) {
        auto row = lm.row(keep_rows[k]);
        for (std::size_t t = 0; t < row.size; ++t)
            trip.emplace_back(static_cast<int>(k), row.col(t), row.val(t));
    }
    SpMat a(static_cast<int>(keep_rows.size()), lm.col_count());
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    return a;
}

inline double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Ruiz equilibration: A <- R A C with every row and column inf-norm near 1.
inline void equilibrate(SpMat& a, Vec& row_scale, Vec& col_scale, int passes = 10) {
    row_scale = Vec::Ones(a.rows());
    col_scale = Vec::Ones(a.cols());
    for (int pass = 0; pass < passes; ++pass) {
        Vec rmax = Vec::Zero(a.rows()), cmax = Vec::Zero(a.cols());
        for (int c = 0; c < a.outerSize(); ++c)
            for (SpMat::InnerIterator it(a, c); it; ++it) {
                double v = std::abs(it.value());
                rmax[it.row()] = std::max(rmax[it.row()], v);
                cmax[c] = std::max(cmax[c], v);
            }
        bool done = true;
        for (int i = 0; i < a.rows(); ++i) {
            rmax[i] = rmax[i] > 0 ? 1.0 / std::sqrt(rmax[i]) : 1.0;
            if (std::abs(rmax[i] - 1.0) > 1e-3) done = false;
        }
        for (int j = 0; j < a.cols(); ++j) {
            cmax[j] = cmax[j] > 0 ? 1.0 / std::sqrt(cmax[j]) : 1.0;
            if (std::abs(cmax[j] - 1.0) > 1e-3) done = false;
        }
        if (done) break;
        for (int c = 0; c < a.outerSize(); ++c)
            for (SpMat::InnerIterator it(a, c); it; ++it) it.valueRef() *= rmax[it.row()] * cmax[c];
        row_scale.array() *= rmax.array();
        col_scale.array() *= cmax.array();
    }
}

// A D A^T for diagonal D, keeping the sparsity pattern of A A^T fixed so the
// symbolic factorization is reused.
class NormalMatrix {
public:
    explicit NormalMatrix(const SpMat& a) : a_(a), at_(a.transpose()) {
        at_.makeCompressed();
    }

    SpMat build(const Vec& d, double shift) const {
        SpMat ad = a_ * d.asDiagonal();
        SpMat m = ad * at_;
        SpMat out = m.triangularView<Eigen::Lower>();
        if (shift != 0.0)
            for (int k = 0; k < out.outerSize(); ++k)
                for (SpMat::InnerIterator it(out, k); it; ++it)
                    if (it.row() == it.col()) it.valueRef() += shift;
        out.makeCompressed();
        return out;
    }

private:
    const SpMat& a_;
    SpMat at_;
};

class NormalSolver {
public:
    explicit NormalSolver(const SpMat& a) : a_(a), nm_(a) {}

    // Factor A D A^T + shift I, shift = 1e-12 * max diagonal, raised on breakdown.
    bool factor(const Vec& d) {
        d_ = d;
        double maxd = 0.0;
        SpMat m0 = nm_.build(d, 0.0);
        for (int k = 0; k < m0.outerSize(); ++k)
            for (SpMat::InnerIterator it(m0, k); it; ++it)
                if (it.row() == it.col()) maxd = std::max(maxd, it.value());
        if (!analyzed_) {
            llt_.analyzePattern(m0);
            analyzed_ = true;
        }
        shift_ = 1e-12 * std::max(1.0, maxd);
        for (int attempt = 0; attempt < 6; ++attempt) {
            llt_.factorize(nm_.build(d, shift_));
            if (llt_.info() == Eigen::Success) return true;
            shift_ *= 100.0;
        }
        return false;
    }

    // Solve (A D A^T) v = rhs with two steps of iterative refinement against
    // the unshifted matrix.
    Vec solve(const Vec& rhs) const {
        Vec v = llt_.solve(rhs);
        for (int k = 0; k < 3; ++k) {
            Vec r = rhs - apply(v);
            v += llt_.solve(r);
        }
        return v;
    }

    Vec apply(const Vec& v) const {
        Vec t = a_.transpose() * v;
        t.array() *= d_.array();
        return a_ * t;
    }

    double shift() const { return shift_; }

private:
    const SpMat& a_;
    NormalMatrix nm_;
    Eigen::CholmodSimplicialLLT<SpMat, Eigen::Lower> llt_;
    bool analyzed_ = false;
    Vec d_;
    double shift_ = 0.0;
};

inline double max_step(const Vec& v, const Vec& dv) {
    double a = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (dv[i] < 0) a = std::min(a, -v[i] / dv[i]);
    return a;
}

}  // namespace detail

inline Solution solve(const LinearModel& lm, const SolverSettings& settings = {}) {
    using detail::SpMat;
    using detail::Vec;
    if (settings.feas_tol <= 0 || settings.opt_tol <= 0) throw ConfigError("solver tolerances must be positive");
    if (lm.row_count() < 1) throw ValidationError("model has no rows");
    const int ncol = lm.col_count();
    if (static_cast<int>(lm.objective.size()) != ncol) throw ValidationError("objective length does not match model");
    const long max_iter =
        settings.max_iterations > 0 ? settings.max_iterations : 10L * (lm.row_count() + static_cast<long>(ncol));

    Solution sol;

    // Empty rows: 0 = rhs.
    std::vector<int> nonempty;
    for (int k = 0; k < lm.row_count(); ++k) {
        if (lm.row(k).size > 0) {
            nonempty.push_back(k);
        } else if (std::abs(lm.rhs[k]) > settings.feas_tol) {
            sol.status = SolveStatus::infeasible;
            sol.note = "empty row " + lm.tags[k].label() + " with nonzero right-hand side";
            return sol;
        }
    }

    SpMat a_full = detail::to_eigen(lm, nonempty);
    Vec b_full(static_cast<Eigen::Index>(nonempty.size()));
    for (std::size_t k = 0; k < nonempty.size(); ++k) b_full[k] = lm.rhs[nonempty[k]];
    Vec c = Eigen::Map<const Vec>(lm.objective.data(), ncol);

    Vec row_scale = Vec::Ones(a_full.rows()), col_scale = Vec::Ones(ncol);
    if (settings.scaling) detail::equilibrate(a_full, row_scale, col_scale);
    Vec bs_full = b_full.cwiseProduct(row_scale);
    Vec cs = c.cwiseProduct(col_scale);
    double cost_scale = 1.0;
    if (settings.scaling && detail::inf_norm(cs) > 0) cost_scale = 1.0 / detail::inf_norm(cs);
    cs *= cost_scale;

    sol.rows_removed = static_cast<int>(lm.row_count() - nonempty.size());
    const SpMat& a = a_full;
    const Vec& b = bs_full;

    const Eigen::Index n = a.cols();

    // Unscaled residual b - A x over every model row.
    auto primal_residual = [&](const Vec& x_unscaled) {
        Point p{std::vector<double>(x_unscaled.data(), x_unscaled.data() + n)};
        auto res = row_residuals(lm, p);
        double mx = 0.0;
        for (double r : res) mx = std::max(mx, std::abs(r));
        return mx;
    };

    detail::NormalSolver ns(a);

    // Starting point (Mehrotra's heuristic) from the least-norm solutions.
    if (!ns.factor(Vec::Ones(n))) {
        sol.status = SolveStatus::iteration_limit;
        sol.note = "normal matrix factorization failed at start";
        return sol;
    }
    Vec x = a.transpose() * ns.solve(b);
    {
        // A consistent system is solved exactly by the least-norm point.
        Vec xu = x.cwiseProduct(col_scale);
        double res = primal_residual(xu);
        if (res > std::max(settings.feas_tol, 1e-9 * (1.0 + detail::inf_norm(b_full))) * 10) {
            sol.status = SolveStatus::infeasible;
            sol.note = "equality system is inconsistent (least-norm residual " + format_double(res) + ")";
            return sol;
        }
    }
    Vec y = ns.solve(a * cs);
    Vec z = cs - a.transpose() * y;
    {
        double dx = std::max(-1.5 * x.minCoeff(), 0.0);
        double dz = std::max(-1.5 * z.minCoeff(), 0.0);
        x.array() += dx;
        z.array() += dz;
        double xz = x.dot(z);
        double sx = x.sum(), sz = z.sum();
        if (xz <= 0 || sx <= 0 || sz <= 0) {
            x.array() += 1.0;
            z.array() += 1.0;
        } else {
            x.array() += 0.5 * xz / sz;
            z.array() += 0.5 * xz / sx;
        }
        x = x.cwiseMax(1e-8);
        z = z.cwiseMax(1e-8);
    }

    const double bnorm = 1.0 + detail::inf_norm(b);
    const double cnorm = 1.0 + detail::inf_norm(cs);
    const double inner_feas = settings.feas_tol * 1e-2;
    const double inner_opt = settings.opt_tol * 1e-2;
    double best_merit = std::numeric_limits<double>::infinity();
    int stall = 0;

    auto certificate_of = [&](const Vec& xs, const Vec& ys, const Vec& zs) {
        double pobj = cs.dot(xs), dobj = b.dot(ys);
        double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
        double dres = detail::inf_norm(cs - a.transpose() * ys - zs) / cnorm;
        return std::max(gap, dres);
    };

    long it = 0;
    for (; it < max_iter; ++it) {
        Vec rp = b - a * x;
        Vec rd = cs - a.transpose() * y - z;
        double mu = x.dot(z) / static_cast<double>(n);
        double pres = detail::inf_norm(rp) / bnorm;
        double cert = certificate_of(x, y, z);

        if (pres <= inner_feas && cert <= inner_opt) break;

        double merit = std::max(pres, cert);
        if (merit < 0.5 * best_merit) {
            best_merit = merit;
            stall = 0;
        } else if (++stall > 25) {
            sol.note = "no progress for 25 iterations";
            break;
        }
        if (!std::isfinite(merit)) {
            sol.note = "numerical breakdown";
            break;
        }
        if (detail::inf_norm(x) > 1e14) {
            sol.status = cs.dot(x) < 0 ? SolveStatus::unbounded : SolveStatus::infeasible;
            sol.note = "primal iterates diverged";
            sol.iterations = it;
            return sol;
        }
        if (detail::inf_norm(y) > 1e14 || detail::inf_norm(z) > 1e14) {
            sol.status = b.dot(y) > 0 ? SolveStatus::infeasible : SolveStatus::unbounded;
            sol.note = "dual iterates diverged";
            sol.iterations = it;
            return sol;
        }

        Vec d = x.cwiseQuotient(z);
        if (!ns.factor(d)) {
            sol.note = "normal matrix factorization failed";
            break;
        }

        // Newton system with complementarity right-hand side rc:
        //   M dy = rp + A (D rd - Z^-1 rc),  dz = rd - A^T dy,  dx = Z^-1 rc - D dz
        auto direction = [&](const Vec& rc, Vec& dx, Vec& dy, Vec& dz) {
            Vec t = d.cwiseProduct(rd) - rc.cwiseQuotient(z);
            dy = ns.solve(rp + a * t);
            dz = rd - a.transpose() * dy;
            dx = rc.cwiseQuotient(z) - d.cwiseProduct(dz);
        };

        Vec dxa, dya, dza;
        Vec xz = x.cwiseProduct(z);
        direction(-xz, dxa, dya, dza);
        double ap = detail::max_step(x, dxa), ad = detail::max_step(z, dza);
        double mu_aff = (x + ap * dxa).dot(z + ad * dza) / static_cast<double>(n);
        double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);
        sigma = std::min(sigma, 1.0);

        Vec rc = (sigma * mu) * Vec::Ones(n) - xz - dxa.cwiseProduct(dza);
        Vec dx, dy, dz;
        direction(rc, dx, dy, dz);
        const double eta = std::max(0.9, 1.0 - 10.0 * mu);
        ap = std::min(1.0, eta * detail::max_step(x, dx));
        ad = std::min(1.0, eta * detail::max_step(z, dz));
        x += ap * dx;
        y += ad * dy;
        z += ad * dz;
    }
    sol.iterations = it;

    Vec xu = x.cwiseProduct(col_scale);
    sol.point.values.assign(xu.data(), xu.data() + n);
    sol.objective = c.dot(xu);
    sol.dual_objective = b.dot(y) / cost_scale;
    sol.max_primal_residual = primal_residual(xu);
    sol.optimality_certificate = certificate_of(x, y, z);
    const double min_x = n ? xu.minCoeff() : 0.0;

    if (sol.max_primal_residual <= settings.feas_tol && sol.optimality_certificate <= settings.opt_tol &&
        min_x >= -settings.feas_tol) {
        sol.status = SolveStatus::optimal;
    } else {
        sol.status = SolveStatus::iteration_limit;
        if (sol.note.empty()) sol.note = "iteration limit reached";
    }
    return sol;
}

}  // namespace tsplp
