#include "quantsig/linalg.hpp"

#include "quantsig/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace quantsig {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw Error(Errc::ShapeMismatch, "matmul inner dimensions differ");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto o = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) o[j] += aik * brow[j];
        }
    }
    return out;
}

namespace linalg {

std::vector<double> least_squares_qr(Matrix a, std::vector<double> b, double rank_tol) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (b.size() != m) throw Error(Errc::ShapeMismatch, "rhs length differs from row count");
    if (m < n) throw Error(Errc::SingularSystem, "underdetermined system");

    std::vector<double> v(m);
    std::vector<double> diag(n);
    for (std::size_t k = 0; k < n; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < m; ++i) norm += a(i, k) * a(i, k);
        norm = std::sqrt(norm);
        const double alpha = a(k, k) > 0 ? -norm : norm;
        diag[k] = alpha;
        if (norm == 0.0) continue;

        // v = x - alpha e1, normalised so reflections are I - 2 v v^T.
        for (std::size_t i = k; i < m; ++i) v[i] = a(i, k);
        v[k] -= alpha;
        double vnorm = 0.0;
        for (std::size_t i = k; i < m; ++i) vnorm += v[i] * v[i];
        vnorm = std::sqrt(vnorm);
        if (vnorm == 0.0) continue;
        for (std::size_t i = k; i < m; ++i) v[i] /= vnorm;

        for (std::size_t j = k; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = k; i < m; ++i) s += v[i] * a(i, j);
            s *= 2.0;
            for (std::size_t i = k; i < m; ++i) a(i, j) -= s * v[i];
        }
        double s = 0.0;
        for (std::size_t i = k; i < m; ++i) s += v[i] * b[i];
        s *= 2.0;
        for (std::size_t i = k; i < m; ++i) b[i] -= s * v[i];
    }

    double rmax = 0.0;
    for (std::size_t k = 0; k < n; ++k) rmax = std::max(rmax, std::fabs(a(k, k)));
    std::vector<double> x(n);
    for (std::size_t kk = n; kk-- > 0;) {
        const double r = a(kk, kk);
        if (std::fabs(r) <= rank_tol * rmax || rmax == 0.0)
            throw Error(Errc::SingularSystem, "rank-deficient design at column " + std::to_string(kk));
        double s = b[kk];
        for (std::size_t j = kk + 1; j < n; ++j) s -= a(kk, j) * x[j];
        x[kk] = s / r;
    }
    return x;
}

SymmetricEigen jacobi_eigen(Matrix a, double tol, int max_sweeps) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw Error(Errc::ShapeMismatch, "eigen input must be square");
    Matrix vec(n, n);
    for (std::size_t i = 0; i < n; ++i) vec(i, i) = 1.0;

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    SymmetricEigen out;
    while (out.sweeps < max_sweeps && off_norm() >= tol) {
        ++out.sweeps;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // A <- J^T A J on rows/cols p and q.
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = vec(k, p);
                    const double vkq = vec(k, q);
                    vec(k, p) = c * vkp - s * vkq;
                    vec(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = vec(i, order[j]);
    }
    return out;
}

}  // namespace linalg
}  // namespace quantsig
