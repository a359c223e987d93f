#pragma once

// Periodic differentiation, dealiasing and quadrature on a uniform grid.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <fftw3.h>

#include "filmsolve/model.hpp"

namespace filmsolve {

using RealField = Eigen::ArrayXd;
using ComplexSpectrum = Eigen::ArrayXcd;

/// Uniform periodic grid on [0, L); the right endpoint is identified with x = 0.
class Grid {
public:
    Grid(int n, double length) : n_(n), length_(length) {
        if (n < 16 || n % 2 != 0)
            throw Error("invalid-grid", "n must be even and >= 16, got " + std::to_string(n));
        if (!(length > 0) || !std::isfinite(length))
            throw Error("invalid-grid", "length must be positive");
        dx_ = length / n;
        x_ = RealField(n);
        for (int j = 0; j < n; ++j) x_[j] = j * dx_;
    }

    int n() const { return n_; }
    double length() const { return length_; }
    double dx() const { return dx_; }
    const RealField& x() const { return x_; }

    /// Angular wavenumber of Fourier mode m.
    double wavenumber(int m) const { return 2.0 * std::numbers::pi * m / length_; }

    /// Highest mode index retained by the 2/3 rule.
    int dealias_cutoff() const { return n_ / 3; }

    bool operator==(const Grid& o) const { return n_ == o.n_ && length_ == o.length_; }

private:
    int n_;
    double length_;
    double dx_;
    RealField x_;
};

enum class DerivBackend { Spectral, FiniteDifference4 };

namespace detail {

// FFTW planning is not thread-safe; execution with new arrays is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const {
        if (p) {
            std::lock_guard lock(fftw_planner_mutex());
            fftw_destroy_plan(p);
        }
    }
};
using PlanHandle = std::shared_ptr<fftw_plan_s>;

// SIMD-aligned scratch. Plans are made on aligned arrays, so every execute
// goes through one of these and always takes the same code path.
struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

// Per-thread transform workspace, resized on demand.
struct FftwScratch {
    int n = 0;
    FftwBuffer<double> real;
    FftwBuffer<fftw_complex> complex;

    static FftwScratch& local(int n) {
        thread_local FftwScratch s;
        if (s.n != n) {
            s.real.reset(fftw_alloc_real(static_cast<std::size_t>(n)));
            s.complex.reset(fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1)));
            s.n = n;
        }
        return s;
    }
};

} // namespace detail

/// Spatial operators bound to one grid. Immutable after construction, so a
/// single instance may be shared between threads.
class Spectral {
public:
    explicit Spectral(Grid grid, DerivBackend backend = DerivBackend::Spectral)
        : grid_(std::move(grid)), backend_(backend) {
        const int n = grid_.n();
        const int nc = n / 2 + 1;
        {
            // ESTIMATE plans are deterministic, so trajectories are reproducible.
            std::lock_guard lock(detail::fftw_planner_mutex());
            double* re = fftw_alloc_real(static_cast<std::size_t>(n));
            fftw_complex* co = fftw_alloc_complex(static_cast<std::size_t>(nc));
            auto plan_pair = [&](unsigned flags, detail::PlanHandle& fwd, detail::PlanHandle& bwd) {
                fwd = detail::PlanHandle(fftw_plan_dft_r2c_1d(n, re, co, flags), detail::PlanDeleter{});
                bwd = detail::PlanHandle(fftw_plan_dft_c2r_1d(n, co, re, flags), detail::PlanDeleter{});
            };
            plan_pair(FFTW_ESTIMATE, forward_, backward_);
            fftw_free(re);
            fftw_free(co);
        }
        if (!forward_ || !backward_) throw Error("fft-plan", "FFTW planning failed");
        k_.resize(nc);
        for (int m = 0; m < nc; ++m) k_[m] = grid_.wavenumber(m);
    }

    const Grid& grid() const { return grid_; }
    int n() const { return grid_.n(); }
    DerivBackend backend() const { return backend_; }

    /// Half spectrum c_m = (1/n) sum_j f_j exp(-i k_m x_j), m = 0..n/2.
    ComplexSpectrum forward(const RealField& f) const {
        check_size(f);
        const int nc = n() / 2 + 1;
        auto& ws = detail::FftwScratch::local(n());
        std::copy(f.data(), f.data() + n(), ws.real.get());
        fftw_execute_dft_r2c(forward_.get(), ws.real.get(), ws.complex.get());
        ComplexSpectrum c(nc);
        const double scale = 1.0 / n();
        for (int m = 0; m < nc; ++m)
            c[m] = {ws.complex[m][0] * scale, ws.complex[m][1] * scale};
        return c;
    }

    /// Inverse of `forward`. The Nyquist coefficient is taken as real.
    RealField backward(const ComplexSpectrum& c) const {
        const int nc = n() / 2 + 1;
        auto& ws = detail::FftwScratch::local(n());
        for (int m = 0; m < nc; ++m) {
            ws.complex[m][0] = c[m].real();
            ws.complex[m][1] = c[m].imag();
        }
        fftw_execute_dft_c2r(backward_.get(), ws.complex.get(), ws.real.get());
        return Eigen::Map<const RealField>(ws.real.get(), n());
    }

    /// d^order f / dx^order for order in {1, 2, 3}.
    RealField deriv(const RealField& f, int order) const {
        if (order < 1 || order > 3)
            throw Error("bad-order", "derivative order must be 1, 2 or 3");
        check_finite(f);
        if (backend_ == DerivBackend::FiniteDifference4) return deriv_fd4(f, order);
        return backward(deriv_spectrum(forward(f), order));
    }

    /// First three derivatives from a single forward transform.
    std::array<RealField, 3> derivs123(const RealField& f) const {
        check_finite(f);
        if (backend_ == DerivBackend::FiniteDifference4)
            return {deriv_fd4(f, 1), deriv_fd4(f, 2), deriv_fd4(f, 3)};
        const ComplexSpectrum c = forward(f);
        return {backward(deriv_spectrum(c, 1)), backward(deriv_spectrum(c, 2)),
                backward(deriv_spectrum(c, 3))};
    }

    /// Multiplies a half spectrum by (i k)^order, zeroing Nyquist for odd orders.
    ComplexSpectrum deriv_spectrum(const ComplexSpectrum& c, int order) const {
        ComplexSpectrum d(c.size());
        const std::complex<double> i(0.0, 1.0);
        for (Eigen::Index m = 0; m < c.size(); ++m) {
            std::complex<double> ik = i * k_[m];
            std::complex<double> factor = ik;
            for (int o = 1; o < order; ++o) factor *= ik;
            d[m] = factor * c[m];
        }
        if (order % 2 == 1) d[c.size() - 1] = 0.0;
        return d;
    }

    /// 2/3-rule filter: zero every mode with |m| > n/3.
    RealField dealias(const RealField& f) const {
        ComplexSpectrum c = forward(f);
        truncate(c);
        return backward(c);
    }

    void truncate(ComplexSpectrum& c) const {
        const int cutoff = grid_.dealias_cutoff();
        for (Eigen::Index m = cutoff + 1; m < c.size(); ++m) c[m] = 0.0;
    }

    /// Pointwise product followed by the 2/3-rule filter.
    RealField dealias_product(const RealField& a, const RealField& b) const {
        check_size(a);
        check_size(b);
        return dealias(a * b);
    }

    /// Rectangle rule, which is the trapezoid rule on a periodic grid.
    double integrate(const RealField& f) const {
        check_size(f);
        return grid_.dx() * f.sum();
    }

    /// L * sum_m |c_m|^2 over the full two-sided spectrum; equals
    /// integrate(f^2) by Parseval.
    double spectral_energy(const RealField& f) const {
        const ComplexSpectrum c = forward(f);
        double e = std::norm(c[0]) + std::norm(c[c.size() - 1]);
        for (Eigen::Index m = 1; m + 1 < c.size(); ++m) e += 2.0 * std::norm(c[m]);
        return grid_.length() * e;
    }

    double wavenumber(int m) const { return k_[static_cast<std::size_t>(m)]; }

    /// Samples f(x) on the grid nodes.
    template <typename F>
    RealField sample(F&& fn) const {
        RealField out(n());
        for (int j = 0; j < n(); ++j) out[j] = fn(grid_.x()[j]);
        return out;
    }

private:
    void check_size(const RealField& f) const {
        if (f.size() != n())
            throw Error("size-mismatch", "field has " + std::to_string(f.size()) +
                                             " samples, grid has " + std::to_string(n()));
    }

    void check_finite(const RealField& f) const {
        check_size(f);
        if (!f.allFinite()) throw Error("non-finite", "field contains non-finite values");
    }

    // Fourth-order central differences.
    RealField deriv_fd4(const RealField& f, int order) const {
        const int n = grid_.n();
        const double dx = grid_.dx();
        auto at = [&](int j) { return f[((j % n) + n) % n]; };
        RealField d(n);
        for (int j = 0; j < n; ++j) {
            switch (order) {
            case 1:
                d[j] = (-at(j + 2) + 8.0 * at(j + 1) - 8.0 * at(j - 1) + at(j - 2)) / (12.0 * dx);
                break;
            case 2:
                d[j] = (-at(j + 2) + 16.0 * at(j + 1) - 30.0 * at(j) + 16.0 * at(j - 1) -
                        at(j - 2)) /
                       (12.0 * dx * dx);
                break;
            default:
                d[j] = (-at(j + 3) + 8.0 * at(j + 2) - 13.0 * at(j + 1) + 13.0 * at(j - 1) -
                        8.0 * at(j - 2) + at(j - 3)) /
                       (8.0 * dx * dx * dx);
            }
        }
        return d;
    }

    Grid grid_;
    DerivBackend backend_;
    detail::PlanHandle forward_;
    detail::PlanHandle backward_;
    std::vector<double> k_;
};

} // namespace filmsolve
