#ifndef DUCTWARP_FFT_HPP
#define DUCTWARP_FFT_HPP

#include <complex>
#include <vector>

namespace ductwarp {

/// Forward real FFT: X_k = sum_n x_n exp(-2*pi*i*k*n/N), k = 0..N/2.
std::vector<std::complex<double>> real_fft(const std::vector<double>& x);

/// Unnormalized inverse of real_fft: x_n = sum over the Hermitian extension
/// of the one-sided spectrum (FFTW backward convention). n must equal
/// 2 * (spectrum.size() - 1).
std::vector<double> real_ifft(std::vector<std::complex<double>> spectrum, int n);

/// Linear convolution of x with a symmetric FIR kernel, trimmed to x's
/// length with the kernel center aligned (zero-phase for symmetric kernels).
std::vector<double> convolve_same(const std::vector<double>& x,
                                  const std::vector<double>& kernel);

/// Reusable fixed-size forward real FFT (one plan, many frames).
class RealFftPlan {
public:
    explicit RealFftPlan(int n);
    ~RealFftPlan();
    RealFftPlan(const RealFftPlan&) = delete;
    RealFftPlan& operator=(const RealFftPlan&) = delete;

    int size() const { return n_; }
    /// x.size() must equal size(); returns the one-sided spectrum.
    void execute(const std::vector<double>& x, std::vector<std::complex<double>>& out);

private:
    int n_;
    double* in_;
    void* out_;  // fftw_complex buffer
    void* plan_; // fftw_plan
};

} // namespace ductwarp

#endif
