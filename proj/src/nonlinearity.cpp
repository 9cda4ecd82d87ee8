#include "pohozaev/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pohozaev/error.hpp"

namespace pohozaev {

namespace {

double eval_terms(const std::vector<Monomial>& terms, double s) {
    double v = 0.0;
    for (const auto& m : terms) v += m.coeff * (m.power == 0.0 ? 1.0 : std::pow(s, m.power));
    return v;
}

double eval_antiderivative(const std::vector<Monomial>& terms, double a, double s) {
    double v = 0.0;
    for (const auto& m : terms)
        v += m.coeff * (std::pow(s, m.power + 1.0) - std::pow(a, m.power + 1.0)) / (m.power + 1.0);
    return v;
}

bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

NonlinearitySpec NonlinearitySpec::table(std::vector<Segment> segments, std::string name) {
    if (segments.empty() || segments.front().start != 0.0)
        throw Error(ErrorKind::ValidationError, "nonlinearity table must start at s = 0");
    for (std::size_t k = 1; k < segments.size(); ++k)
        if (!(segments[k].start > segments[k - 1].start))
            throw Error(ErrorKind::ValidationError, "nonlinearity segment starts must increase");
    for (const auto& seg : segments)
        for (const auto& m : seg.terms)
            if (!(m.power >= 0.0) || !std::isfinite(m.coeff))
                throw Error(ErrorKind::ValidationError, "nonlinearity terms need finite coefficients and powers >= 0");
    NonlinearitySpec spec;
    spec.name = std::move(name);
    spec.segments_ = std::move(segments);
    // Conservative growth constants from the terms.
    double q = 1.0;
    for (const auto& seg : spec.segments_)
        for (const auto& m : seg.terms) q = std::max(q, m.power);
    double A = 0.0, B = 0.0;
    for (const auto& seg : spec.segments_) {
        for (const auto& m : seg.terms) {
            const double c = std::abs(m.coeff);
            if (c == 0.0) continue;
            if (m.power <= 1.0) {
                A += seg.start > 0.0 ? c * std::pow(seg.start, m.power - 1.0)
                                     : (m.power == 1.0 ? c : std::numeric_limits<double>::infinity());
            } else if (m.power < q) {
                A += c;
                B += c;
            } else {
                B += c;
            }
        }
    }
    spec.A = A;
    spec.B = B;
    spec.q = q;
    spec.prepare();
    return spec;
}

NonlinearitySpec NonlinearitySpec::builtin(const std::string& text) {
    static const std::regex num(R"(\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*)");
    std::smatch m;
    const std::string t = text;
    if (t == "cubic") {
        auto spec = table({Segment{0.0, {{1.0, 3.0}}}}, "cubic");
        spec.A = 0.0;
        spec.B = 1.0;
        spec.q = 3.0;
        return spec;
    }
    if (t == "zero") return table({Segment{0.0, {}}}, "zero");
    static const std::regex power(R"(power\(\s*([^)]*)\))");
    if (std::regex_match(t, m, power)) {
        std::smatch a;
        const std::string arg = m[1];
        if (!std::regex_match(arg, a, num)) throw Error(ErrorKind::ValidationError, "bad power() argument in '" + t + "'");
        const double p = std::stod(a[1]);
        if (!(p > 1.0)) throw Error(ErrorKind::ValidationError, "power(p) needs p > 1");
        auto spec = table({Segment{0.0, {{1.0, p}}}}, t);
        spec.A = 0.0;
        spec.B = 1.0;
        spec.q = p;
        return spec;
    }
    static const std::regex jump(R"(cubic-jump\(([^,]*),([^)]*)\))");
    if (std::regex_match(t, m, jump)) {
        std::smatch a, h;
        const std::string sa = m[1], sh = m[2];
        if (!std::regex_match(sa, a, num) || !std::regex_match(sh, h, num))
            throw Error(ErrorKind::ValidationError, "bad cubic-jump(a,h) arguments in '" + t + "'");
        const double av = std::stod(a[1]), hv = std::stod(h[1]);
        if (!(av > 0.0) || !(hv > 0.0)) throw Error(ErrorKind::ValidationError, "cubic-jump(a,h) needs a > 0 and h > 0");
        auto spec = table({Segment{0.0, {{1.0, 3.0}}}, Segment{av, {{1.0, 3.0}, {hv, 0.0}}}}, t);
        spec.A = hv / av;
        spec.B = 1.0;
        spec.q = 3.0;
        return spec;
    }
    throw Error(ErrorKind::ValidationError, "unknown nonlinearity '" + t + "'");
}

void NonlinearitySpec::prepare() {
    const auto& seg = segments_;
    cum_.assign(seg.size(), 0.0);
    jumps_.clear();
    heights_.clear();
    for (std::size_t k = 1; k < seg.size(); ++k) {
        cum_[k] = cum_[k - 1] + eval_antiderivative(seg[k - 1].terms, seg[k - 1].start, seg[k].start);
        const double a = seg[k].start;
        const double l = eval_terms(seg[k - 1].terms, a), r = eval_terms(seg[k].terms, a);
        if (std::abs(r - l) > 1e-14 * std::max({1.0, std::abs(l), std::abs(r)})) {
            jumps_.push_back(a);
            heights_.push_back(r - l);
        }
    }
}

std::size_t NonlinearitySpec::segment_of(double s) const {
    std::size_t k = 0;
    while (k + 1 < segments_.size() && s >= segments_[k + 1].start) ++k;
    return k;
}

double NonlinearitySpec::raw_f(double s) const {
    if (s < 0.0) return 0.0;
    return eval_terms(segments_[segment_of(s)].terms, s);
}

double NonlinearitySpec::raw_F(double s) const {
    if (s <= 0.0) return 0.0;
    const std::size_t k = segment_of(s);
    return cum_[k] + eval_antiderivative(segments_[k].terms, segments_[k].start, s);
}

double NonlinearitySpec::left_limit(double s) const {
    if (s <= 0.0) return 0.0;
    std::size_t k = segment_of(s);
    if (segments_[k].start == s && k > 0) --k;
    return eval_terms(segments_[k].terms, s);
}

double NonlinearitySpec::min_jump_gap() const {
    const auto jp = jump_points();
    if (jp.empty()) return std::numeric_limits<double>::infinity();
    double gap = jp.front();
    for (std::size_t k = 1; k < jp.size(); ++k) gap = std::min(gap, jp[k] - jp[k - 1]);
    return gap;
}

double NonlinearitySpec::f(double s) const {
    if (smoothing == 0.0) return raw_f(s);
    if (s < 0.0) return 0.0;
    const auto& jp = jumps_;
    const auto& jh = heights_;
    double v = raw_f(s);
    for (std::size_t j = 0; j < jp.size(); ++j) {
        const double x = s - jp[j];
        if (std::abs(x) > smoothing) continue;
        const double step = x >= 0.0 ? 1.0 : 0.0;
        v += jh[j] * ((x + smoothing) / (2.0 * smoothing) - step);
    }
    return v;
}

double NonlinearitySpec::F(double s) const {
    if (smoothing == 0.0) return raw_F(s);
    if (s <= 0.0) return 0.0;
    const auto& jp = jumps_;
    const auto& jh = heights_;
    double v = raw_F(s);
    for (std::size_t j = 0; j < jp.size(); ++j) {
        const double x = s - jp[j];
        if (x < -smoothing || x > smoothing) continue;
        const double ramp = (x + smoothing) * (x + smoothing) / (4.0 * smoothing);
        v += jh[j] * (ramp - std::max(x, 0.0));
    }
    return v;
}

double NonlinearitySpec::lower(double s) const {
    const double v = f(s);
    if (smoothing == 0.0 && s > 0.0 && segments_[segment_of(s)].start == s) return std::min(v, left_limit(s));
    return v;
}

double NonlinearitySpec::upper(double s) const {
    const double v = f(s);
    if (smoothing == 0.0 && s > 0.0 && segments_[segment_of(s)].start == s) return std::max(v, left_limit(s));
    return v;
}

bool NonlinearitySpec::operator==(const NonlinearitySpec& o) const {
    return name == o.name && segments_ == o.segments_ && same_double(tau, o.tau) && same_double(A, o.A) &&
           same_double(B, o.B) && same_double(q, o.q) && smoothing == o.smoothing;
}

MollifiedNonlinearity mollify(const NonlinearitySpec& spec, double eps) {
    if (!(eps > 0.0)) throw Error(ErrorKind::EpsilonTooLarge, "mollification width must be positive");
    const double gap = spec.min_jump_gap();
    if (!(eps < 0.5 * gap)) {
        std::ostringstream os;
        os << "eps = " << eps << " is not below half the minimal jump gap " << gap;
        throw Error(ErrorKind::EpsilonTooLarge, os.str());
    }
    MollifiedNonlinearity m;
    m.base = spec;
    m.epsilon = eps;
    m.smoothed = spec;
    if (spec.has_jumps()) {
        m.smoothed.smoothing = eps;
        m.smoothed.B = spec.B + 1.0;
    }
    return m;
}

bool NonlinearityReport::passed() const {
    return std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.passed || c.advisory; });
}

double quadratic_G(const NonlinearitySpec& spec, double tau) {
    using boost::math::quadrature::gauss_kronrod;
    auto g = [&](double s) { return spec.f(s) - s; };
    std::vector<double> cuts{0.0};
    for (double a : spec.jump_points())
        if (a < tau) cuts.push_back(a);
    cuts.push_back(tau);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
        total += gauss_kronrod<double, 15>::integrate(g, cuts[k], cuts[k + 1], 15, 1e-13);
    return total;
}

NonlinearityReport validate_nonlinearity(const NonlinearitySpec& spec, double upper_q) {
    NonlinearityReport rep;
    std::ostringstream w;

    {  // f(s)/s -> 0 along a dyadic sequence
        ConditionResult c;
        c.name = "f(s)/s -> 0 as s -> 0+";
        double mx = 0.0, last = 0.0;
        for (int k = 4; k <= 1000; k += 4) {
            const double s = std::ldexp(1.0, -k);
            last = std::abs(spec.f(s)) / s;
            mx = std::max(mx, last);
        }
        c.passed = last <= 1e-2 * mx || mx == 0.0;
        if (!c.passed) {
            w.str("");
            w << "f(s)/s = " << last << " at s = 2^-1000";
            c.witness = w.str();
        }
        rep.conditions.push_back(c);
    }
    {  // growth exponent at infinity inside the family window
        ConditionResult c;
        c.name = "growth at infinity below the critical window";
        c.advisory = true;
        const double s1 = std::ldexp(1.0, 40), s2 = std::ldexp(1.0, 50);
        const double f1 = std::abs(spec.f(s1)), f2 = std::abs(spec.f(s2));
        const double e = (f1 > 0.0 && f2 > 0.0) ? std::log(f2 / f1) / std::log(s2 / s1) : 0.0;
        if (upper_q > 0.0) {
            c.passed = e + 1.0 < upper_q;
            if (!c.passed) {
                w.str("");
                w << "f grows like s^" << e << ", needs q = " << e + 1.0 << " < " << upper_q;
                c.witness = w.str();
            }
        }
        rep.conditions.push_back(c);
    }
    {  // positivity
        ConditionResult c;
        c.name = "f(s) > 0 for s > 0";
        for (int k = -30; k <= 30 && c.passed; ++k) {
            const double s = std::ldexp(1.0, k);
            if (!(spec.f(s) > 0.0)) {
                c.passed = false;
                w.str("");
                w << "f(" << s << ") = " << spec.f(s);
                c.witness = w.str();
            }
        }
        rep.conditions.push_back(c);
    }
    {  // G(tau) > 0
        ConditionResult c;
        c.name = "G(tau) > 0 for some tau";
        double found = std::numeric_limits<double>::quiet_NaN();
        if (std::isfinite(spec.tau)) {
            if (quadratic_G(spec, spec.tau) > 0.0) found = spec.tau;
        } else {
            for (int k = -40; k <= 40; ++k) {
                const double tau = std::pow(2.0, 0.5 * k);
                if (quadratic_G(spec, tau) > 0.0) {
                    found = tau;
                    break;
                }
            }
        }
        c.passed = std::isfinite(found);
        w.str("");
        if (c.passed) w << "tau = " << found << ", G(tau) = " << quadratic_G(spec, found);
        else w << "no tau with G(tau) > 0 on the scan";
        c.witness = w.str();
        rep.conditions.push_back(c);
    }
    {  // |f(s)| <= A|s| + B|s|^q
        ConditionResult c;
        c.name = "|f(s)| <= A|s| + B|s|^q";
        std::vector<double> samples;
        for (int k = -30; k <= 30; ++k) samples.push_back(std::ldexp(1.0, k));
        for (double a : spec.jump_points())
            for (double d : {-1e-9, 0.0, 1e-9}) samples.push_back(a * (1.0 + d));
        for (double s : samples) {
            const double v = std::max(std::abs(spec.lower(s)), std::abs(spec.upper(s)));
            const double bound = spec.A * s + spec.B * std::pow(s, spec.q);
            if (v > bound * (1.0 + 1e-12)) {
                c.passed = false;
                w.str("");
                w << "|f(" << s << ")| = " << v << " exceeds " << bound;
                c.witness = w.str();
                break;
            }
        }
        rep.conditions.push_back(c);
    }
    return rep;
}

double inclusion_check(const NonlinearitySpec& spec, const GridFunction& u, const std::vector<double>& residual,
                       double tol) {
    const auto w = node_weights(u.grid);
    double measure = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double lo = spec.lower(u.values[j]) - tol;
        const double hi = spec.upper(u.values[j]) + tol;
        if (residual[j] < lo || residual[j] > hi) measure += w[j];
    }
    return measure;
}

}  // namespace pohozaev
