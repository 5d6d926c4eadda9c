#include "ductwarp/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace ductwarp {

namespace {

// FFTW plan creation is not thread-safe; execution of distinct plans is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

std::vector<std::complex<double>> real_fft(const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    if (n == 0) return {};
    std::vector<double> in(x);
    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_dft_r2c_1d(n, in.data(),
                                    reinterpret_cast<fftw_complex*>(out.data()),
                                    FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

std::vector<double> real_ifft(std::vector<std::complex<double>> spectrum, int n) {
    if (n != 2 * (static_cast<int>(spectrum.size()) - 1))
        throw std::invalid_argument("real_ifft: n must equal 2*(spectrum.size()-1)");
    std::vector<double> out(n);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(spectrum.data()),
                                    out.data(), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

RealFftPlan::RealFftPlan(int n) : n_(n) {
    if (n <= 0) throw std::invalid_argument("RealFftPlan: n must be > 0");
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan_ = fftw_plan_dft_r2c_1d(n, in_, static_cast<fftw_complex*>(out_), FFTW_ESTIMATE);
}

RealFftPlan::~RealFftPlan() {
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    }
    fftw_free(in_);
    fftw_free(out_);
}

void RealFftPlan::execute(const std::vector<double>& x,
                          std::vector<std::complex<double>>& out) {
    if (static_cast<int>(x.size()) != n_)
        throw std::invalid_argument("RealFftPlan: input size mismatch");
    std::copy(x.begin(), x.end(), in_);
    fftw_execute(static_cast<fftw_plan>(plan_));
    out.resize(n_ / 2 + 1);
    auto* oc = static_cast<fftw_complex*>(out_);
    for (int k = 0; k <= n_ / 2; ++k) out[k] = {oc[k][0], oc[k][1]};
}

std::vector<double> convolve_same(const std::vector<double>& x,
                                  const std::vector<double>& kernel) {
    const int nx = static_cast<int>(x.size());
    const int nk = static_cast<int>(kernel.size());
    if (nx == 0 || nk == 0) return std::vector<double>(nx, 0.0);

    int nfull = nx + nk - 1;
    int nfft = nfull % 2 == 0 ? nfull : nfull + 1; // c2r needs an even length
    std::vector<double> xa(nfft, 0.0), ka(nfft, 0.0);
    std::copy(x.begin(), x.end(), xa.begin());
    std::copy(kernel.begin(), kernel.end(), ka.begin());

    auto X = real_fft(xa);
    auto K = real_fft(ka);
    for (std::size_t i = 0; i < X.size(); ++i) X[i] *= K[i] / static_cast<double>(nfft);
    std::vector<double> full = real_ifft(std::move(X), nfft);

    std::vector<double> out(nx);
    const int offset = (nk - 1) / 2;
    for (int i = 0; i < nx; ++i) out[i] = full[i + offset];
    return out;
}

} // namespace ductwarp
