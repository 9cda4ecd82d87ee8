#include "pohozaev/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "fft.hpp"
#include "pohozaev/error.hpp"

namespace pohozaev {

double quad(const GridFunction& u, const std::function<double(double)>& integrand) {
    const auto w = node_weights(u.grid);
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double v = integrand(u.values[j]);
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteValue, "integrand is not finite at node " + std::to_string(j));
        s += w[j] * v;
    }
    return s;
}

double integrate(const Grid& grid, const std::vector<double>& values) {
    if (const auto* rg = std::get_if<RadialGrid>(&grid)) {
        double s = 0.0;
        for (std::size_t j = 0; j < values.size(); ++j) s += rg->weights[j] * values[j];
        return s;
    }
    return std::get<BoxGrid>(grid).cell_volume() * std::accumulate(values.begin(), values.end(), 0.0);
}

namespace {

GridFunction symmetrize_radial(const GridFunction& u) {
    const auto& w = u.radial()->weights;
    const std::size_t n = u.size();
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = std::max(u.values[j], 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });

    std::vector<double> pos(n), val(n), target(n);
    double c = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        pos[k] = c + 0.5 * w[order[k]];
        val[k] = v[order[k]];
        c += w[order[k]];
    }
    c = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        target[j] = c + 0.5 * w[j];
        c += w[j];
    }
    GridFunction out(u.grid, std::vector<double>(n), true);
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double m = target[j];
        while (k + 1 < n && pos[k + 1] < m) ++k;
        if (m <= pos[0]) {
            out.values[j] = val[0];
        } else if (k + 1 >= n) {
            out.values[j] = val[n - 1];
        } else if (m == pos[k + 1]) {
            out.values[j] = val[k + 1];
        } else {
            const double th = (m - pos[k]) / (pos[k + 1] - pos[k]);
            out.values[j] = val[k] + th * (val[k + 1] - val[k]);
        }
    }
    return out;
}

GridFunction symmetrize_box(const GridFunction& u) {
    const auto& g = *u.box();
    const std::size_t n = u.size();
    std::vector<double> key(n);
    for (std::size_t j = 0; j < n; ++j) key[j] = g.distance2(j);
    std::vector<std::size_t> nodes(n);
    std::iota(nodes.begin(), nodes.end(), 0);
    std::stable_sort(nodes.begin(), nodes.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = std::max(u.values[j], 0.0);
    std::sort(v.begin(), v.end(), std::greater<>());

    GridFunction out(u.grid, std::vector<double>(n), true);
    std::size_t i = 0;
    while (i < n) {
        std::size_t k = i;
        double sum = 0.0;
        while (k < n && key[nodes[k]] == key[nodes[i]]) sum += v[k++];
        const double avg = sum / static_cast<double>(k - i);
        for (std::size_t m = i; m < k; ++m) out.values[nodes[m]] = (k - i == 1) ? v[m] : avg;
        i = k;
    }
    return out;
}

double interp_profile(const RadialGrid& g, const std::vector<double>& v, double r) {
    if (r >= g.extent()) return 0.0;
    const auto it = std::upper_bound(g.radii.begin(), g.radii.end(), r);
    const std::size_t j = static_cast<std::size_t>(it - g.radii.begin()) - 1;
    const double th = (r - g.radii[j]) / (g.radii[j + 1] - g.radii[j]);
    return v[j] + th * (v[j + 1] - v[j]);
}

}  // namespace

GridFunction symmetrize(const GridFunction& u) {
    return u.radial() ? symmetrize_radial(u) : symmetrize_box(u);
}

GridFunction embed_in_box(const GridFunction& radial) {
    const auto& rg = *radial.radial();
    const std::size_t cells = rg.size() - 1;
    std::size_t n = 2 * cells;
    double total = 1.0;
    for (int a = 0; a < rg.dim; ++a) total *= static_cast<double>(n);
    if (total > 1 << 24) throw Error(ErrorKind::ValidationError, "radial grid too fine to embed in a box");
    BoxGrid bg;
    bg.dim = rg.dim;
    bg.points.assign(rg.dim, n);
    bg.spacing.assign(rg.dim, rg.extent() / static_cast<double>(cells));
    return sample_radial(Grid(bg), [&](double r) { return interp_profile(rg, radial.values, r); });
}

SpectralValue fractional_seminorm_unchecked(const GridFunction& u, double s) {
    if (u.radial()) return fractional_seminorm_unchecked(embed_in_box(u), s);
    const auto& g = *u.box();
    auto& fft = detail::fft_for(g);
    const auto spec = detail::spectrum_for(g);
    const auto& info = *spec;
    std::vector<std::complex<double>> U(fft.spectrum_size());
    fft.forward(u.values.data(), U.data());
    double total = 0.0, high = 0.0;
    for (std::size_t k = 0; k < U.size(); ++k) {
        const double sigma = (s == 0.0) ? 1.0 : (info.xi2[k] == 0.0 ? 0.0 : std::pow(info.xi2[k], s));
        const double c = info.multiplicity[k] * sigma * std::norm(U[k]);
        total += c;
        if (info.high[k]) high += c;
    }
    const double scale = g.cell_volume() / static_cast<double>(g.size());
    SpectralValue out;
    out.value = scale * total;
    out.high_fraction = total > 0.0 ? high / total : 0.0;
    return out;
}

double fractional_seminorm(const GridFunction& u, double s) {
    const auto sv = fractional_seminorm_unchecked(u, s);
    if (!std::isfinite(sv.value)) throw Error(ErrorKind::NonFiniteValue, "fractional seminorm is not finite");
    if (sv.high_fraction > 0.01)
        throw Error(ErrorKind::GridTooCoarse, "top third of the spectrum carries " + std::to_string(100.0 * sv.high_fraction) +
                                                  "% of the fractional seminorm");
    return sv.value;
}

std::vector<double> fractional_seminorm_gradient(const GridFunction& u, double s) {
    if (!u.box()) throw Error(ErrorKind::ValidationError, "fractional gradient needs a box grid");
    const auto& g = *u.box();
    auto& fft = detail::fft_for(g);
    const auto spec = detail::spectrum_for(g);
    const auto& info = *spec;
    std::vector<std::complex<double>> U(fft.spectrum_size());
    fft.forward(u.values.data(), U.data());
    for (std::size_t k = 0; k < U.size(); ++k) {
        const double sigma = (s == 0.0) ? 1.0 : (info.xi2[k] == 0.0 ? 0.0 : std::pow(info.xi2[k], s));
        U[k] *= sigma;
    }
    std::vector<double> grad(u.size());
    fft.backward(U.data(), grad.data());
    const double scale = 2.0 * g.cell_volume() / static_cast<double>(g.size());
    for (auto& x : grad) x *= scale;
    return grad;
}

namespace {

// Difference quotient along `axis` at every node.
std::vector<double> differences(const GridFunction& u, int axis, Difference scheme) {
    const auto& g = *u.box();
    const auto st = g.strides();
    const std::size_t n = g.points[axis];
    const std::size_t stride = st[axis];
    const double h = g.spacing[axis];
    std::vector<double> d(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
        const std::size_t i = (j / stride) % n;
        const std::size_t base = j - i * stride;
        const std::size_t ip = base + ((i + 1) % n) * stride;
        if (scheme == Difference::Forward) {
            d[j] = (u.values[ip] - u.values[j]) / h;
        } else {
            const std::size_t im = base + ((i + n - 1) % n) * stride;
            d[j] = (u.values[ip] - u.values[im]) / (2.0 * h);
        }
    }
    return d;
}

inline double reg_abs(double d, double delta) {
    return delta == 0.0 ? std::abs(d) : std::sqrt(d * d + delta * delta) - delta;
}

void require_box(const GridFunction& u, const char* what) {
    if (!u.box()) throw Error(ErrorKind::ValidationError, std::string(what) + " needs a box grid");
}

}  // namespace

double axis_energy(const GridFunction& u, int axis, double p, double delta, Difference scheme) {
    require_box(u, "anisotropic energy");
    const auto d = differences(u, axis, scheme);
    double s = 0.0;
    for (double x : d) s += std::pow(reg_abs(x, delta), p);
    return u.box()->cell_volume() * s / p;
}

std::vector<double> axis_energy_gradient(const GridFunction& u, int axis, double p, double delta, Difference scheme) {
    require_box(u, "anisotropic gradient");
    const auto& g = *u.box();
    const auto d = differences(u, axis, scheme);
    const auto st = g.strides();
    const std::size_t n = g.points[axis];
    const std::size_t stride = st[axis];
    const double h = g.spacing[axis];
    const double vol = g.cell_volume();
    // phi'(d)/p with phi(d) = reg_abs(d)^p
    std::vector<double> q(d.size());
    for (std::size_t j = 0; j < d.size(); ++j) {
        const double x = d[j];
        if (x == 0.0) {
            q[j] = 0.0;
        } else if (delta == 0.0) {
            q[j] = std::pow(std::abs(x), p - 1.0) * (x > 0 ? 1.0 : -1.0);
        } else {
            const double rt = std::sqrt(x * x + delta * delta);
            q[j] = std::pow(rt - delta, p - 1.0) * x / rt;
        }
    }
    std::vector<double> grad(u.size(), 0.0);
    for (std::size_t j = 0; j < u.size(); ++j) {
        const std::size_t i = (j / stride) % n;
        const std::size_t base = j - i * stride;
        const std::size_t ip = base + ((i + 1) % n) * stride;
        if (scheme == Difference::Forward) {
            grad[ip] += vol * q[j] / h;
            grad[j] -= vol * q[j] / h;
        } else {
            const std::size_t im = base + ((i + n - 1) % n) * stride;
            grad[ip] += vol * q[j] / (2.0 * h);
            grad[im] -= vol * q[j] / (2.0 * h);
        }
    }
    return grad;
}

std::vector<double> anisotropic_energy(const GridFunction& u, const std::vector<double>& p, double delta,
                                       Difference scheme) {
    require_box(u, "anisotropic energy");
    if (static_cast<int>(p.size()) != u.dim())
        throw Error(ErrorKind::ValidationError, "anisotropic energy needs one exponent per axis");
    std::vector<double> e(p.size());
    for (int a = 0; a < u.dim(); ++a) {
        e[a] = axis_energy(u, a, p[a], delta, scheme);
        if (!std::isfinite(e[a])) throw Error(ErrorKind::NonFiniteValue, "anisotropic energy is not finite");
        if (scheme == Difference::Centered) {
            const double f = axis_energy(u, a, p[a], delta, Difference::Forward);
            const double m = std::max(e[a], f);
            if (m > 0.0 && std::abs(e[a] - f) > 0.05 * m)
                throw Error(ErrorKind::GridTooCoarse, "centered and one-sided differences disagree by " +
                                                          std::to_string(100.0 * std::abs(e[a] - f) / m) + "% on axis " +
                                                          std::to_string(a));
        }
    }
    return e;
}

double dirichlet_energy(const GridFunction& u, Difference scheme) {
    if (const auto* rg = u.radial()) {
        double s = 0.0;
        for (std::size_t j = 0; j + 1 < u.size(); ++j) {
            const double du = (u.values[j + 1] - u.values[j]) / (rg->radii[j + 1] - rg->radii[j]);
            s += rg->shell_volume(j) * du * du;
        }
        return 0.5 * s;
    }
    std::vector<double> p(u.dim(), 2.0);
    const auto e = anisotropic_energy(u, p, 0.0, scheme);
    return std::accumulate(e.begin(), e.end(), 0.0);
}

std::vector<double> dirichlet_gradient(const GridFunction& u, Difference scheme) {
    if (const auto* rg = u.radial()) {
        std::vector<double> g(u.size(), 0.0);
        for (std::size_t j = 0; j + 1 < u.size(); ++j) {
            const double h = rg->radii[j + 1] - rg->radii[j];
            const double q = rg->shell_volume(j) * (u.values[j + 1] - u.values[j]) / (h * h);
            g[j] -= q;
            g[j + 1] += q;
        }
        return g;
    }
    std::vector<double> g(u.size(), 0.0);
    for (int a = 0; a < u.dim(); ++a) {
        const auto ga = axis_energy_gradient(u, a, 2.0, 0.0, scheme);
        for (std::size_t j = 0; j < g.size(); ++j) g[j] += ga[j];
    }
    return g;
}

}  // namespace pohozaev
