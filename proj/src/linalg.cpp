#include "emt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace emt::la {

void matvec(const std::vector<double>& w, std::size_t rows, std::size_t cols,
            const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = w.data() + r * cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

void mat_t_vec(const std::vector<double>& w, std::size_t rows, std::size_t cols,
               const double* x, double* y) {
    std::fill(y, y + cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = w.data() + r * cols;
        const double xr = x[r];
        for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * xr;
    }
}

double norm(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

std::vector<double> gauss_solve(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
        }
        if (std::abs(a[pivot * n + col]) < 1e-14) {
            throw std::domain_error("gauss_solve: singular system");
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
            std::swap(b[col], b[pivot]);
        }
        const double inv = 1.0 / a[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = a[r * n + col] * inv;
            if (factor == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) acc -= a[ri * n + c] * x[c];
        x[ri] = acc / a[ri * n + ri];
    }
    return x;
}

void jacobi_eigen_sym(const std::vector<double>& a_in, std::size_t d,
                      std::vector<double>& values, std::vector<double>& vectors) {
    std::vector<double> a = a_in;
    vectors.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) vectors[i * d + i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) off += a[p * d + q] * a[p * d + q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = a[p * d + q];
                if (std::abs(apq) < 1e-300) continue;
                const double app = a[p * d + p];
                const double aqq = a[q * d + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < d; ++k) {
                    const double akp = a[k * d + p];
                    const double akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double apk = a[p * d + k];
                    const double aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double vkp = vectors[k * d + p];
                    const double vkq = vectors[k * d + q];
                    vectors[k * d + p] = c * vkp - s * vkq;
                    vectors[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    values.resize(d);
    for (std::size_t i = 0; i < d; ++i) values[i] = a[i * d + i];

    // Sort descending, permuting eigenvector columns alongside.
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t l, std::size_t r) { return values[l] > values[r]; });
    std::vector<double> sorted_values(d);
    std::vector<double> sorted_vectors(d * d);
    for (std::size_t j = 0; j < d; ++j) {
        sorted_values[j] = values[order[j]];
        for (std::size_t i = 0; i < d; ++i) sorted_vectors[i * d + j] = vectors[i * d + order[j]];
    }
    values = std::move(sorted_values);
    vectors = std::move(sorted_vectors);
}

namespace {

double det_small(const std::vector<double>& m, std::size_t d) {
    if (d == 1) return m[0];
    if (d == 2) return m[0] * m[3] - m[1] * m[2];
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

}  // namespace

void kabsch(const std::vector<double>& from, const std::vector<double>& to,
            std::size_t n, std::size_t d, std::vector<double>& rotation,
            std::vector<double>& translation) {
    if (n == 0 || d == 0 || d > 3) throw std::domain_error("kabsch: bad dimensions");
    std::vector<double> from_mean(d, 0.0), to_mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            from_mean[k] += from[i * d + k];
            to_mean[k] += to[i * d + k];
        }
    }
    for (std::size_t k = 0; k < d; ++k) {
        from_mean[k] /= static_cast<double>(n);
        to_mean[k] /= static_cast<double>(n);
    }

    // Cross-covariance M = sum (to - to_mean)(from - from_mean)^T.
    std::vector<double> m(d * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < d; ++r) {
            const double tr = to[i * d + r] - to_mean[r];
            for (std::size_t c = 0; c < d; ++c) {
                m[r * d + c] += tr * (from[i * d + c] - from_mean[c]);
            }
        }
    }

    // SVD of M via eigen-decomposition of M^T M.
    std::vector<double> mtm(d * d, 0.0);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) acc += m[k * d + r] * m[k * d + c];
            mtm[r * d + c] = acc;
        }
    std::vector<double> evals, v;
    jacobi_eigen_sym(mtm, d, evals, v);

    std::vector<double> sing(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) sing[i] = std::sqrt(std::max(0.0, evals[i]));

    // U columns = M v_i / s_i.
    std::vector<double> u(d * d, 0.0);
    const double s_max = sing.empty() ? 0.0 : sing[0];
    for (std::size_t j = 0; j < d; ++j) {
        if (sing[j] > 1e-12 * std::max(1.0, s_max)) {
            for (std::size_t r = 0; r < d; ++r) {
                double acc = 0.0;
                for (std::size_t k = 0; k < d; ++k) acc += m[r * d + k] * v[k * d + j];
                u[r * d + j] = acc / sing[j];
            }
        } else if (d == 3 && j == 2) {
            // Complete a rank-2 basis with the cross product of the first two columns.
            u[0 * d + 2] = u[1 * d + 0] * u[2 * d + 1] - u[2 * d + 0] * u[1 * d + 1];
            u[1 * d + 2] = u[2 * d + 0] * u[0 * d + 1] - u[0 * d + 0] * u[2 * d + 1];
            u[2 * d + 2] = u[0 * d + 0] * u[1 * d + 1] - u[1 * d + 0] * u[0 * d + 1];
        } else if (d == 2 && j == 1) {
            u[0 * d + 1] = -u[1 * d + 0];
            u[1 * d + 1] = u[0 * d + 0];
        } else if (j == 0) {
            throw std::domain_error("kabsch: degenerate point sets");
        }
    }

    // R = U diag(1, .., det(U V^T)) V^T keeps the result a proper rotation.
    std::vector<double> uvt(d * d, 0.0);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) acc += u[r * d + k] * v[c * d + k];
            uvt[r * d + c] = acc;
        }
    const double sign = det_small(uvt, d) < 0.0 ? -1.0 : 1.0;

    rotation.assign(d * d, 0.0);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double dk = (k + 1 == d) ? sign : 1.0;
                acc += u[r * d + k] * dk * v[c * d + k];
            }
            rotation[r * d + c] = acc;
        }

    translation.assign(d, 0.0);
    for (std::size_t r = 0; r < d; ++r) {
        double acc = to_mean[r];
        for (std::size_t c = 0; c < d; ++c) acc -= rotation[r * d + c] * from_mean[c];
        translation[r] = acc;
    }
}

}  // namespace emt::la
