#include <algorithm>
#include <cmath>
#include <limits>

#include "metacomment/classifiers.hpp"
#include "metacomment/util/error.hpp"

namespace metacomment::classifiers {

namespace {

constexpr double kTau = 1e-12;
constexpr Eigen::Index kMaxCachedRows = 8000;

// Linear kernel columns, from a full Gram matrix when it fits in memory.
class KernelColumns {
public:
    explicit KernelColumns(const Matrix& x) : x_(x) {
        if (x.rows() <= kMaxCachedRows) gram_ = x * x.transpose();
        diag_ = x.rowwise().squaredNorm();
    }
    const Vector& diag() const { return diag_; }
    Vector column(Eigen::Index i) const {
        if (gram_.size() > 0) return gram_.col(i);
        return x_ * x_.row(i).transpose();
    }

private:
    const Matrix& x_;
    Matrix gram_;
    Vector diag_;
};

}  // namespace

double svm_primal_objective(std::span<const double> w, double b, const Matrix& x, std::span<const int> y, double C) {
    if (static_cast<Eigen::Index>(w.size()) != x.cols() || y.size() != static_cast<std::size_t>(x.rows())) {
        throw InvalidArgument("svm_primal_objective: shape mismatch");
    }
    double reg = 0;
    for (double v : w) reg += v * v;
    double hinge = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double f = b;
        for (Eigen::Index j = 0; j < x.cols(); ++j) f += w[static_cast<std::size_t>(j)] * x(i, j);
        const double yi = y[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
        hinge += std::max(0.0, 1.0 - yi * f);
    }
    return 0.5 * reg + C * hinge;
}

LinearModel train_linear_svm(const Matrix& x, std::span<const int> labels, const SvmHyperparams& p) {
    validate(p);
    const Eigen::Index n = x.rows();
    if (n == 0) throw InvalidArgument("train_linear_svm: empty training set");
    if (labels.size() != static_cast<std::size_t>(n)) throw InvalidArgument("train_linear_svm: one label per row");
    std::vector<double> y(static_cast<std::size_t>(n));
    bool has_pos = false, has_neg = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        y[i] = labels[i] ? 1.0 : -1.0;
        (labels[i] ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) throw InvalidArgument("train_linear_svm: both classes must be present");

    const double C = p.C;
    const KernelColumns kernel(x);
    const Vector& qd = kernel.diag();
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);
    auto at_upper = [&](Eigen::Index t) { return alpha[t] >= C; };
    auto at_lower = [&](Eigen::Index t) { return alpha[t] <= 0.0; };

    LinearModel out;
    const std::size_t max_iter = static_cast<std::size_t>(p.max_epochs) * static_cast<std::size_t>(n);
    Vector ki, kj;
    while (out.iterations < max_iter) {
        // Maximal violating pair with second-order selection of j; ties go to the lower index.
        double gmax = -std::numeric_limits<double>::infinity();
        Eigen::Index i = -1;
        for (Eigen::Index t = 0; t < n; ++t) {
            const double v = y[t] > 0 ? -grad[t] : grad[t];
            const bool eligible = y[t] > 0 ? !at_upper(t) : !at_lower(t);
            if (eligible && v > gmax) {
                gmax = v;
                i = t;
            }
        }
        if (i < 0) {
            out.converged = true;
            break;
        }
        ki = kernel.column(i);
        double gmax2 = -std::numeric_limits<double>::infinity();
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index j = -1;
        for (Eigen::Index t = 0; t < n; ++t) {
            const bool eligible = y[t] > 0 ? !at_lower(t) : !at_upper(t);
            if (!eligible) continue;
            const double v = y[t] > 0 ? grad[t] : -grad[t];
            gmax2 = std::max(gmax2, v);
            const double diff = gmax + v;
            if (diff <= 0) continue;
            double quad = qd[i] + qd[t] - 2.0 * y[i] * y[t] * ki[t];
            if (quad <= 0) quad = kTau;
            const double obj = -(diff * diff) / quad;
            if (obj < best) {
                best = obj;
                j = t;
            }
        }
        if (gmax + gmax2 < p.tolerance || j < 0) {
            out.converged = true;
            break;
        }
        kj = kernel.column(j);

        const double old_i = alpha[i], old_j = alpha[j];
        const double qij = y[i] * y[j] * ki[j];
        if (y[i] != y[j]) {
            double quad = qd[i] + qd[j] + 2.0 * qij;
            if (quad <= 0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = -diff;
            }
            if (diff > 0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = qd[i] + qd[j] - 2.0 * qij;
            if (quad <= 0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0) {
                alpha[j] = 0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = sum;
            }
        }
        const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
        for (Eigen::Index t = 0; t < n; ++t) grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        ++out.iterations;

        double obj = 0;
        for (Eigen::Index t = 0; t < n; ++t) obj += alpha[t] * (grad[t] - 1.0);
        out.objective.push_back(0.5 * obj);
    }

    // Bias from free vectors, else the middle of the feasible interval.
    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0;
    std::size_t n_free = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (at_upper(t)) {
            if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (at_lower(t)) {
            if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
    out.b = -rho;

    Vector w = Vector::Zero(x.cols());
    for (Eigen::Index t = 0; t < n; ++t) {
        if (alpha[t] != 0.0) w += alpha[t] * y[t] * x.row(t).transpose();
    }
    out.w.assign(w.data(), w.data() + w.size());
    out.alpha = std::move(alpha);
    return out;
}

}  // namespace metacomment::classifiers
