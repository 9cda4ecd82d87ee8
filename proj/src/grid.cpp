#include "pohozaev/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pohozaev/error.hpp"

namespace pohozaev {

const char* kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NonFiniteValue: return "NonFiniteValue";
        case ErrorKind::PhiNonpositive: return "PhiNonpositive";
        case ErrorKind::BracketNotFound: return "BracketNotFound";
        case ErrorKind::NotOnManifold: return "NotOnManifold";
        case ErrorKind::GridTooCoarse: return "GridTooCoarse";
        case ErrorKind::NonadmissibleExponents: return "NonadmissibleExponents";
        case ErrorKind::EpsilonTooLarge: return "EpsilonTooLarge";
        case ErrorKind::PhiNeverPositive: return "PhiNeverPositive";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::MissingGradient: return "MissingGradient";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::ValidationError: return "ValidationError";
        case ErrorKind::Io: return "IoError";
    }
    return "Error";
}

double sphere_area(int dim) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

double ball_volume(int dim, double radius) {
    return sphere_area(dim) / dim * std::pow(radius, dim);
}

namespace {

double binomial(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

// Integrals over [a, a+h] of (1-x) r^{N-1} and x r^{N-1}, with r = a + h x,
// expanded so that no cancellation occurs.
void hat_integrals(int dim, double a, double h, double& left, double& right) {
    left = 0.0;
    right = 0.0;
    double hk = 1.0;
    for (int k = 0; k <= dim - 1; ++k) {
        const double c = binomial(dim - 1, k) * std::pow(a, dim - 1 - k) * hk;
        left += c / ((k + 1.0) * (k + 2.0));
        right += c / (k + 2.0);
        hk *= h;
    }
    left *= h;
    right *= h;
}

}  // namespace

RadialGrid RadialGrid::uniform(int dim, double radius, std::size_t cells) {
    std::vector<double> r(cells + 1);
    for (std::size_t j = 0; j <= cells; ++j) r[j] = radius * static_cast<double>(j) / static_cast<double>(cells);
    return from_radii(dim, std::move(r));
}

RadialGrid RadialGrid::from_radii(int dim, std::vector<double> radii) {
    if (dim < 1) throw Error(ErrorKind::ValidationError, "radial grid needs dim >= 1");
    if (radii.size() < 2 || radii.front() != 0.0)
        throw Error(ErrorKind::ValidationError, "radial grid needs r_0 = 0 and at least two nodes");
    for (std::size_t j = 1; j < radii.size(); ++j)
        if (!(radii[j] > radii[j - 1])) throw Error(ErrorKind::ValidationError, "radii must be strictly increasing");
    RadialGrid g;
    g.dim = dim;
    g.radii = std::move(radii);
    g.weights.assign(g.radii.size(), 0.0);
    const double om = sphere_area(dim);
    for (std::size_t j = 0; j + 1 < g.radii.size(); ++j) {
        double left, right;
        hat_integrals(dim, g.radii[j], g.radii[j + 1] - g.radii[j], left, right);
        g.weights[j] += om * left;
        g.weights[j + 1] += om * right;
    }
    return g;
}

double RadialGrid::shell_volume(std::size_t j) const {
    const double a = radii[j];
    const double h = radii[j + 1] - a;
    double s = 0.0, hk = 1.0;
    for (int k = 0; k <= dim - 1; ++k) {
        s += binomial(dim - 1, k) * std::pow(a, dim - 1 - k) * hk / (k + 1.0);
        hk *= h;
    }
    return sphere_area(dim) * h * s;
}

BoxGrid BoxGrid::cube(int dim, double half_width, std::size_t n) {
    if (dim < 1 || n < 4 || n % 2 != 0)
        throw Error(ErrorKind::ValidationError, "box grid needs dim >= 1 and an even point count >= 4");
    BoxGrid g;
    g.dim = dim;
    g.points.assign(dim, n);
    g.spacing.assign(dim, 2.0 * half_width / static_cast<double>(n));
    return g;
}

std::size_t BoxGrid::size() const {
    std::size_t n = 1;
    for (auto p : points) n *= p;
    return n;
}

double BoxGrid::cell_volume() const {
    double v = 1.0;
    for (auto h : spacing) v *= h;
    return v;
}

std::vector<std::size_t> BoxGrid::strides() const {
    std::vector<std::size_t> s(dim, 1);
    for (int a = dim - 2; a >= 0; --a) s[a] = s[a + 1] * points[a + 1];
    return s;
}

double BoxGrid::distance2(std::size_t flat) const {
    bool equal = true;
    for (int a = 1; a < dim; ++a) equal = equal && spacing[a] == spacing[0];
    if (equal) {
        // Integer offsets keep lattice points at equal distance exactly tied.
        long long k2 = 0;
        for (int a = dim - 1; a >= 0; --a) {
            const long long k = static_cast<long long>(flat % points[a]) - static_cast<long long>(points[a] / 2);
            flat /= points[a];
            k2 += k * k;
        }
        return static_cast<double>(k2) * spacing[0] * spacing[0];
    }
    double d2 = 0.0;
    for (int a = dim - 1; a >= 0; --a) {
        const std::size_t j = flat % points[a];
        flat /= points[a];
        const double x = coordinate(a, j);
        d2 += x * x;
    }
    return d2;
}

int grid_dim(const Grid& grid) {
    return std::visit([](const auto& g) { return g.dim; }, grid);
}

std::size_t grid_size(const Grid& grid) {
    return std::visit([](const auto& g) { return g.size(); }, grid);
}

std::vector<double> node_weights(const Grid& grid) {
    if (const auto* rg = std::get_if<RadialGrid>(&grid)) return rg->weights;
    const auto& bg = std::get<BoxGrid>(grid);
    return std::vector<double>(bg.size(), bg.cell_volume());
}

double grid_volume(const Grid& grid) {
    if (const auto* rg = std::get_if<RadialGrid>(&grid)) return ball_volume(rg->dim, rg->extent());
    const auto& bg = std::get<BoxGrid>(grid);
    return bg.cell_volume() * static_cast<double>(bg.size());
}

GridFunction zeros(const Grid& grid) {
    return GridFunction(grid, std::vector<double>(grid_size(grid), 0.0));
}

bool is_radially_nonincreasing(const GridFunction& u, double tol) {
    for (double v : u.values)
        if (v < -tol) return false;
    if (u.radial()) {
        for (std::size_t j = 1; j < u.size(); ++j)
            if (u.values[j] > u.values[j - 1] + tol) return false;
        return true;
    }
    const auto& bg = *u.box();
    std::vector<std::pair<double, double>> dv(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) dv[j] = {bg.distance2(j), u.values[j]};
    std::sort(dv.begin(), dv.end());
    // Within a distance class every value must not exceed the smallest value of
    // the previous class.
    double prev_min = INFINITY;
    std::size_t i = 0;
    while (i < dv.size()) {
        std::size_t k = i;
        double cls_min = INFINITY, cls_max = -INFINITY;
        while (k < dv.size() && dv[k].first <= dv[i].first * (1.0 + 1e-12)) {
            cls_min = std::min(cls_min, dv[k].second);
            cls_max = std::max(cls_max, dv[k].second);
            ++k;
        }
        if (cls_max > prev_min + tol) return false;
        prev_min = cls_min;
        i = k;
    }
    return true;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s) {
    double x = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && *b == ' ') ++b;
    auto res = std::from_chars(b, e, x);
    if (res.ec != std::errc() || res.ptr != e)
        throw Error(ErrorKind::ParseError, "bad number '" + s + "' in grid CSV");
    return x;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

std::vector<std::string> expect_row(std::istream& in, const std::string& key) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "grid CSV ended before '" + key + "'");
    auto row = split(line);
    if (row.empty() || row[0] != key) throw Error(ErrorKind::ParseError, "grid CSV expected row '" + key + "'");
    row.erase(row.begin());
    return row;
}

}  // namespace

std::string to_csv(const GridFunction& u) {
    std::ostringstream os;
    if (const auto* rg = u.radial()) {
        os << "kind,radial\n";
        os << "dim," << rg->dim << "\n";
        os << "points," << rg->size() << "\n";
        os << "monotone," << (u.monotone ? 1 : 0) << "\n";
        os << "r,weight,value\n";
        for (std::size_t j = 0; j < rg->size(); ++j)
            os << format_double(rg->radii[j]) << ',' << format_double(rg->weights[j]) << ','
               << format_double(u.values[j]) << '\n';
    } else {
        const auto& bg = *u.box();
        os << "kind,box\n";
        os << "dim," << bg.dim << "\n";
        os << "points";
        for (auto p : bg.points) os << ',' << p;
        os << "\nspacing";
        for (auto h : bg.spacing) os << ',' << format_double(h);
        os << "\nperiodic," << (bg.periodic ? 1 : 0) << "\n";
        os << "monotone," << (u.monotone ? 1 : 0) << "\n";
        for (int a = 0; a < bg.dim; ++a) os << 'x' << a << ',';
        os << "value\n";
        const auto st = bg.strides();
        for (std::size_t j = 0; j < u.size(); ++j) {
            for (int a = 0; a < bg.dim; ++a) os << format_double(bg.coordinate(a, (j / st[a]) % bg.points[a])) << ',';
            os << format_double(u.values[j]) << '\n';
        }
    }
    return os.str();
}

GridFunction from_csv(const std::string& text) {
    std::istringstream in(text);
    const auto kind = expect_row(in, "kind");
    if (kind.size() != 1) throw Error(ErrorKind::ParseError, "grid CSV: malformed kind row");
    const int dim = static_cast<int>(parse_double(expect_row(in, "dim").at(0)));
    std::string line;
    if (kind[0] == "radial") {
        const auto n = static_cast<std::size_t>(parse_double(expect_row(in, "points").at(0)));
        const bool mono = parse_double(expect_row(in, "monotone").at(0)) != 0.0;
        std::getline(in, line);
        RadialGrid g;
        g.dim = dim;
        std::vector<double> vals;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto row = split(line);
            if (row.size() != 3) throw Error(ErrorKind::ParseError, "grid CSV: radial rows need r,weight,value");
            g.radii.push_back(parse_double(row[0]));
            g.weights.push_back(parse_double(row[1]));
            vals.push_back(parse_double(row[2]));
        }
        if (vals.size() != n) throw Error(ErrorKind::ParseError, "grid CSV: point count mismatch");
        return GridFunction(g, std::move(vals), mono);
    }
    if (kind[0] != "box") throw Error(ErrorKind::ParseError, "grid CSV: unknown kind '" + kind[0] + "'");
    BoxGrid g;
    g.dim = dim;
    for (const auto& s : expect_row(in, "points")) g.points.push_back(static_cast<std::size_t>(parse_double(s)));
    for (const auto& s : expect_row(in, "spacing")) g.spacing.push_back(parse_double(s));
    g.periodic = parse_double(expect_row(in, "periodic").at(0)) != 0.0;
    const bool mono = parse_double(expect_row(in, "monotone").at(0)) != 0.0;
    if (static_cast<int>(g.points.size()) != dim || static_cast<int>(g.spacing.size()) != dim)
        throw Error(ErrorKind::ParseError, "grid CSV: axis count mismatch");
    std::getline(in, line);
    std::vector<double> vals;
    vals.reserve(g.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto row = split(line);
        if (static_cast<int>(row.size()) != dim + 1) throw Error(ErrorKind::ParseError, "grid CSV: bad box row");
        vals.push_back(parse_double(row.back()));
    }
    if (vals.size() != g.size()) throw Error(ErrorKind::ParseError, "grid CSV: point count mismatch");
    return GridFunction(g, std::move(vals), mono);
}

void write_csv(const std::filesystem::path& path, const GridFunction& u) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << to_csv(u);
}

GridFunction read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_csv(ss.str());
}

}  // namespace pohozaev
