#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

namespace spectral {

/// Dense row-major real matrix, sized for desk-scale chains.
struct DenseMatrix {
    int n = 0;
    std::vector<double> a;

    static DenseMatrix zero(int n) { return DenseMatrix{n, std::vector<double>(std::size_t(n) * n, 0.0)}; }
    static DenseMatrix identity(int n) {
        DenseMatrix m = zero(n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

    double& at(int i, int j) { return a[std::size_t(i) * n + j]; }
    double at(int i, int j) const { return a[std::size_t(i) * n + j]; }

    std::vector<double> apply(std::span<const double> f) const {
        if (static_cast<int>(f.size()) != n) throw std::invalid_argument("dimension mismatch");
        std::vector<double> out(n, 0.0);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            const double* row = a.data() + std::size_t(i) * n;
            for (int j = 0; j < n; ++j) s += row[j] * f[j];
            out[i] = s;
        }
        return out;
    }

    std::vector<double> column(int j) const {
        std::vector<double> c(n);
        for (int i = 0; i < n; ++i) c[i] = at(i, j);
        return c;
    }
};

/// Dense row-major complex matrix (weighted transfer operators).
struct DenseComplexMatrix {
    int n = 0;
    std::vector<std::complex<double>> a;

    static DenseComplexMatrix zero(int n) {
        return DenseComplexMatrix{n, std::vector<std::complex<double>>(std::size_t(n) * n)};
    }

    std::complex<double>& at(int i, int j) { return a[std::size_t(i) * n + j]; }
    std::complex<double> at(int i, int j) const { return a[std::size_t(i) * n + j]; }

    std::vector<std::complex<double>> apply(std::span<const std::complex<double>> f) const {
        if (static_cast<int>(f.size()) != n) throw std::invalid_argument("dimension mismatch");
        std::vector<std::complex<double>> out(n);
        for (int i = 0; i < n; ++i) {
            std::complex<double> s = 0.0;
            const auto* row = a.data() + std::size_t(i) * n;
            for (int j = 0; j < n; ++j) s += row[j] * f[j];
            out[i] = s;
        }
        return out;
    }
};

}  // namespace spectral
