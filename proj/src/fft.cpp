#include "fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace pohozaev::detail {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

RealFft::RealFft(const std::vector<std::size_t>& dims) : dims_(dims) {
    real_size_ = 1;
    for (auto d : dims_) real_size_ *= d;
    spectrum_size_ = real_size_ / dims_.back() * (dims_.back() / 2 + 1);
    std::vector<int> n(dims_.begin(), dims_.end());
    std::lock_guard<std::mutex> lock(planner_mutex());
    rbuf_ = fftw_alloc_real(real_size_);
    auto* c = fftw_alloc_complex(spectrum_size_);
    cbuf_ = c;
    fwd_ = fftw_plan_dft_r2c(static_cast<int>(n.size()), n.data(), rbuf_, c, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r(static_cast<int>(n.size()), n.data(), c, rbuf_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
    fftw_free(rbuf_);
    fftw_free(cbuf_);
}

void RealFft::forward(const double* in, std::complex<double>* out) {
    std::memcpy(rbuf_, in, real_size_ * sizeof(double));
    fftw_execute(static_cast<fftw_plan>(fwd_));
    std::memcpy(static_cast<void*>(out), cbuf_, spectrum_size_ * sizeof(fftw_complex));
}

void RealFft::backward(const std::complex<double>* in, double* out) {
    std::memcpy(cbuf_, static_cast<const void*>(in), spectrum_size_ * sizeof(fftw_complex));
    fftw_execute(static_cast<fftw_plan>(bwd_));
    std::memcpy(out, rbuf_, real_size_ * sizeof(double));
}

RealFft& fft_for(const BoxGrid& grid) {
    thread_local std::map<std::vector<std::size_t>, std::unique_ptr<RealFft>> cache;
    auto& slot = cache[grid.points];
    if (!slot) slot = std::make_unique<RealFft>(grid.points);
    return *slot;
}

std::shared_ptr<const SpectrumInfo> spectrum_for(const BoxGrid& grid) {
    // Dilated grids change the spacing on every projection, so the cache is bounded.
    using Key = std::pair<std::vector<std::size_t>, std::vector<double>>;
    thread_local std::map<Key, std::shared_ptr<const SpectrumInfo>> cache;
    Key key{grid.points, grid.spacing};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    if (cache.size() >= 16) cache.clear();

    const int dim = grid.dim;
    std::vector<std::size_t> half = grid.points;
    half.back() = grid.points.back() / 2 + 1;
    std::size_t total = 1;
    for (auto d : half) total *= d;
    SpectrumInfo info;
    info.xi2.resize(total);
    info.multiplicity.resize(total);
    info.high.resize(total);
    info.laplacian.resize(total);
    std::vector<std::size_t> idx(dim, 0);
    for (std::size_t k = 0; k < total; ++k) {
        std::size_t rem = k;
        for (int a = dim - 1; a >= 0; --a) {
            idx[a] = rem % half[a];
            rem /= half[a];
        }
        double xi2 = 0.0, lap = 0.0;
        bool high = false;
        for (int a = 0; a < dim; ++a) {
            const auto n = static_cast<long long>(grid.points[a]);
            long long m = static_cast<long long>(idx[a]);
            if (m > n / 2) m -= n;
            const double xi = 2.0 * std::numbers::pi * static_cast<double>(m) / (static_cast<double>(n) * grid.spacing[a]);
            xi2 += xi * xi;
            const double sn = std::sin(0.5 * xi * grid.spacing[a]);
            lap += 4.0 * sn * sn / (grid.spacing[a] * grid.spacing[a]);
            if (3 * std::llabs(m) > n) high = true;
        }
        const auto nl = grid.points.back();
        const std::size_t ml = idx[dim - 1];
        info.multiplicity[k] = (ml == 0 || (nl % 2 == 0 && ml == nl / 2)) ? 1.0 : 2.0;
        info.xi2[k] = xi2;
        info.high[k] = high ? 1 : 0;
        info.laplacian[k] = lap;
    }
    auto ptr = std::make_shared<const SpectrumInfo>(std::move(info));
    cache.emplace(std::move(key), ptr);
    return ptr;
}

}  // namespace pohozaev::detail
