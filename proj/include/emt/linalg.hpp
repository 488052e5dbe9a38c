// linalg.hpp
// Minimal dense helpers for the small systems used across the toolkit.
// Matrices are row-major std::vector<double>.

#pragma once

#include <cstddef>
#include <vector>

namespace emt::la {

// y = W x, W is rows x cols row-major.
void matvec(const std::vector<double>& w, std::size_t rows, std::size_t cols,
            const double* x, double* y);

// y = W^T x, W is rows x cols row-major, x has rows entries, y has cols.
void mat_t_vec(const std::vector<double>& w, std::size_t rows, std::size_t cols,
               const double* x, double* y);

double norm(const std::vector<double>& v);

// Solves A x = b with partial pivoting; A is n x n row-major (copied).
// Throws std::domain_error on a singular system.
std::vector<double> gauss_solve(std::vector<double> a, std::vector<double> b);

// Eigen-decomposition of a symmetric d x d matrix by cyclic Jacobi sweeps.
// Returns eigenvalues (descending) and the matching eigenvectors as columns
// of `vectors` (row-major d x d).
void jacobi_eigen_sym(const std::vector<double>& a, std::size_t d,
                      std::vector<double>& values, std::vector<double>& vectors);

// Best-fit rigid transform (rotation R, translation t) mapping `from` points
// onto `to` points in the least-squares sense (Kabsch). Points are rows of
// n x d row-major matrices. R is d x d row-major with det(R) = +1.
void kabsch(const std::vector<double>& from, const std::vector<double>& to,
            std::size_t n, std::size_t d, std::vector<double>& rotation,
            std::vector<double>& translation);

}  // namespace emt::la
