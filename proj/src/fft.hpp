#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include "pohozaev/grid.hpp"

namespace pohozaev::detail {

// Real-to-complex transform of a box grid, row-major with the last axis halved.
// Plans live in a per-thread cache; planning itself is serialized.
class RealFft {
public:
    explicit RealFft(const std::vector<std::size_t>& dims);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t real_size() const { return real_size_; }
    std::size_t spectrum_size() const { return spectrum_size_; }
    void forward(const double* in, std::complex<double>* out);
    // Unnormalized inverse; the input is not modified.
    void backward(const std::complex<double>* in, double* out);

private:
    std::vector<std::size_t> dims_;
    std::size_t real_size_ = 0;
    std::size_t spectrum_size_ = 0;
    double* rbuf_ = nullptr;
    void* cbuf_ = nullptr;
    void* fwd_ = nullptr;
    void* bwd_ = nullptr;
};

RealFft& fft_for(const BoxGrid& grid);

// |xi|^2 for every entry of the half spectrum, plus its multiplicity in the
// full spectrum, whether it sits in the top third of some axis, and the symbol
// of the periodic second-difference Laplacian.
struct SpectrumInfo {
    std::vector<double> xi2;
    std::vector<double> multiplicity;
    std::vector<unsigned char> high;
    std::vector<double> laplacian;
};

std::shared_ptr<const SpectrumInfo> spectrum_for(const BoxGrid& grid);

}  // namespace pohozaev::detail
