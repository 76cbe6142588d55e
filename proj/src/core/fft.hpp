#pragma once

// Iterative radix-2 complex FFT with cached twiddle tables. Grid sizes in this
// project are powers of two by construction, and a self-contained kernel keeps
// results bit-identical across runs and thread counts (no planner heuristics).

#include <complex>
#include <cstddef>
#include <vector>

namespace gm {

using cplx = std::complex<double>;

class Fft {
  public:
    explicit Fft(std::size_t n);

    std::size_t size() const { return n_; }

    // In-place transform of a contiguous line; sign = -1 forward (e^{-i2pijk/n}),
    // sign = +1 inverse kernel (unnormalized; caller scales by 1/n).
    void transform(cplx* data, int sign) const;

    void forward(cplx* data) const { transform(data, -1); }
    void inverse_unscaled(cplx* data) const { transform(data, +1); }

  private:
    std::size_t n_;
    std::vector<std::size_t> bitrev_;
    std::vector<cplx> tw_fwd_;  // stage-packed twiddles
    std::vector<cplx> tw_inv_;
};

// Shared immutable plan per size.
const Fft& fft_plan(std::size_t n);

}  // namespace gm
