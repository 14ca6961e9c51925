#include "leafflow/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace leafflow {

ScalarField SchrodingerOperator::apply(const ScalarField& f) const {
    ScalarField lap = laplacian(f);
    std::vector<double> v(f.size());
    for (int i = 0; i < f.size(); ++i) v[i] = -lap[i] - beta[i] * f[i];
    return ScalarField(grid, std::move(v));
}

SchrodingerOperator assemble(const GridPtr& grid, const ScalarField& beta) {
    if (!grid->periodic())
        throw std::invalid_argument("assemble: Schrodinger operator needs a closed leaf "
                                    "(periodic grid)");
    if (!beta.grid()->same_grid(*grid))
        throw std::invalid_argument("assemble: beta lives on a different grid");
    const int n = grid->point_count();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    if (grid->topology() == Topology::Circle) {
        const double ih2 = 1.0 / (grid->hx() * grid->hx());
        for (int i = 0; i < n; ++i) {
            const int ip = (i + 1 == n) ? 0 : i + 1;
            const int im = (i == 0) ? n - 1 : i - 1;
            m(i, i) = 2.0 * ih2 - beta[i];
            m(i, ip) += -ih2;
            m(i, im) += -ih2;
        }
    } else {
        const int nx = grid->nx(), ny = grid->ny();
        const double ihx2 = 1.0 / (grid->hx() * grid->hx());
        const double ihy2 = 1.0 / (grid->hy() * grid->hy());
        for (int j = 0; j < ny; ++j) {
            const int jp = (j + 1 == ny) ? 0 : j + 1;
            const int jm = (j == 0) ? ny - 1 : j - 1;
            for (int i = 0; i < nx; ++i) {
                const int ip = (i + 1 == nx) ? 0 : i + 1;
                const int im = (i == 0) ? nx - 1 : i - 1;
                const int c = grid->index(i, j);
                m(c, c) = 2.0 * (ihx2 + ihy2) - beta[c];
                m(c, grid->index(ip, j)) += -ihx2;
                m(c, grid->index(im, j)) += -ihx2;
                m(c, grid->index(i, jp)) += -ihy2;
                m(c, grid->index(i, jm)) += -ihy2;
            }
        }
    }
    return SchrodingerOperator{grid, beta, std::move(m)};
}

SpectralData::SpectralData(GridPtr grid, std::vector<double> eigenvalues,
                           std::vector<ScalarField> eigenfunctions)
    : grid_(std::move(grid)),
      eigenvalues_(std::move(eigenvalues)),
      eigenfunctions_(std::move(eigenfunctions)) {
    if (eigenvalues_.size() != eigenfunctions_.size() || eigenvalues_.size() < 2)
        throw std::invalid_argument("SpectralData: need at least two eigenpairs");
}

SpectralData eigensolve(const SchrodingerOperator& op, int k) {
    const int n = op.grid->point_count();
    if (k < 2) throw std::invalid_argument("eigensolve: k must be >= 2");
    if (k > n) throw std::invalid_argument("eigensolve: k exceeds grid point count");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op.matrix);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigensolve: dense symmetric eigensolver failed to converge");

    // Eigen returns grid-l2 orthonormal columns; rescale to the L2
    // quadrature inner product.
    const double scale = 1.0 / std::sqrt(op.grid->cell_measure());
    std::vector<double> values(k);
    std::vector<ScalarField> funcs;
    funcs.reserve(k);
    for (int j = 0; j < k; ++j) {
        values[j] = solver.eigenvalues()(j);
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) v[i] = solver.eigenvectors()(i, j) * scale;
        funcs.emplace_back(op.grid, std::move(v));
    }

    // Ground state of a connected grid is simple and has one sign.
    auto [lo, hi] = field_extrema(funcs[0]);
    if (std::abs(lo) > std::abs(hi)) {
        funcs[0] = -1.0 * funcs[0];
        std::tie(lo, hi) = field_extrema(funcs[0]);
    }
    if (!(field_extrema(funcs[0]).first > 0.0))
        throw std::runtime_error("eigensolve: ground state is not strictly positive");

    return SpectralData(op.grid, std::move(values), std::move(funcs));
}

double fundamental_gap(const SpectralData& spec) { return spec.gap(); }

std::vector<double> project(const ScalarField& f, const SpectralData& spec) {
    std::vector<double> c(spec.count());
    for (int j = 0; j < spec.count(); ++j) c[j] = inner_product_l2(f, spec.eigenfunction(j));
    return c;
}

ScalarField reconstruct(const std::vector<double>& coeff, const SpectralData& spec) {
    std::vector<double> v(spec.grid()->point_count(), 0.0);
    for (size_t j = 0; j < coeff.size(); ++j) {
        const auto& e = spec.eigenfunction(static_cast<int>(j));
        for (size_t i = 0; i < v.size(); ++i) v[i] += coeff[j] * e[i];
    }
    return ScalarField(spec.grid(), std::move(v));
}

ScalarField linear_heat_evolve(const ScalarField& u0, const SpectralData& full_spec,
                               double t) {
    if (t < 0.0) throw std::invalid_argument("linear_heat_evolve: t must be >= 0");
    std::vector<double> c = project(u0, full_spec);
    for (int j = 0; j < full_spec.count(); ++j) c[j] *= std::exp(-full_spec.eigenvalue(j) * t);
    return reconstruct(c, full_spec);
}

ScalarField linear_heat_evolve(const ScalarField& u0, const ScalarField& beta, double t) {
    SchrodingerOperator op = assemble(u0.grid(), beta);
    SpectralData spec = eigensolve(op, u0.grid()->point_count());
    return linear_heat_evolve(u0, spec, t);
}

ScalarField duhamel_solve(const ScalarField& u0, const SpectralData& full_spec,
                          const std::function<ScalarField(double)>& forcing, double t_end,
                          double quad_dt) {
    if (t_end < 0.0 || quad_dt <= 0.0)
        throw std::invalid_argument("duhamel_solve: need t_end >= 0 and quad_dt > 0");
    const int k = full_spec.count();
    const double lam0 = full_spec.lambda0();
    std::vector<double> v = project(u0, full_spec);
    for (int j = 0; j < k; ++j) v[j] *= std::exp((lam0 - full_spec.eigenvalue(j)) * t_end);

    const int steps = std::max(1, static_cast<int>(std::ceil(t_end / quad_dt - 1e-12)));
    const double dtau = t_end / steps;
    // v_j(t) = u_j^0 e^{(l0-lj)t} + int_0^t e^{(l0-lj)(t-tau)} q_j(tau) dtau
    for (int s = 0; s <= steps; ++s) {
        const double tau = s * dtau;
        const double w = (s == 0 || s == steps) ? 0.5 * dtau : dtau;
        std::vector<double> q = project(forcing(tau), full_spec);
        for (int j = 0; j < k; ++j)
            v[j] += w * std::exp((lam0 - full_spec.eigenvalue(j)) * (t_end - tau)) * q[j];
    }
    return reconstruct(v, full_spec);
}

TildeU00 tilde_u00(double u0_coeff, const std::vector<double>& times,
                   const std::vector<double>& q0_series) {
    if (times.size() != q0_series.size() || times.size() < 4)
        throw std::invalid_argument("tilde_u00: need matching series with >= 4 samples");
    TildeU00 out;
    double integral = 0.0;
    for (size_t i = 1; i < times.size(); ++i)
        integral += 0.5 * (times[i] - times[i - 1]) * (q0_series[i] + q0_series[i - 1]);

    // Tail beyond the record: fit |q0| ~ C exp(-r t) over the last decade
    // of the time axis and integrate the fit to infinity.
    const double t_end = times.back();
    const double t_lo = std::max(times.front(), 0.9 * t_end);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_lo || std::abs(q0_series[i]) < 1e-300) continue;
        const double lx = times[i], ly = std::log(std::abs(q0_series[i]));
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++m;
    }
    double tail = 0.0, rate = 0.0;
    if (m >= 3) {
        const double denom = m * sxx - sx * sx;
        if (std::abs(denom) > 0.0) {
            const double slope = (m * sxy - sx * sy) / denom;
            rate = -slope;
            if (rate > 1e-12) tail = q0_series.back() / rate;
        }
    }
    out.fitted_rate = rate;
    out.tail = tail;
    out.value = u0_coeff + integral + tail;
    out.tail_warning = std::abs(tail) > 0.01 * std::abs(out.value);
    return out;
}

}  // namespace leafflow
