#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

#include "biphoton/error.hpp"
#include "biphoton/numerics.hpp"

namespace biphoton::numerics {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class Plan {
public:
    Plan(int rank, const int* dims, fftw_complex* buf, int sign) {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan_ = fftw_plan_dft(rank, dims, buf, buf, sign, FFTW_ESTIMATE);
        if (!plan_) throw Error(ErrorCode::InvalidConfig, "fftw plan creation failed");
    }
    ~Plan() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    void run() { fftw_execute(plan_); }

private:
    fftw_plan plan_{};
};

class Buffer {
public:
    explicit Buffer(std::size_t n) : n_(n), p_(fftw_alloc_complex(n)) {
        if (!p_) throw std::bad_alloc();
    }
    ~Buffer() { fftw_free(p_); }
    Buffer(const Buffer&) = delete;
    Buffer& operator=(const Buffer&) = delete;
    fftw_complex* get() { return p_; }
    void load(const cvec& x, std::size_t count) {
        std::memset(p_, 0, sizeof(fftw_complex) * n_);
        for (std::size_t i = 0; i < count; ++i) {
            p_[i][0] = x[i].real();
            p_[i][1] = x[i].imag();
        }
    }
    cvec store(double scale) const {
        cvec out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = {p_[i][0] * scale, p_[i][1] * scale};
        return out;
    }

private:
    std::size_t n_;
    fftw_complex* p_;
};

cvec transform1d(const cvec& x, std::size_t n, int sign, double scale) {
    if (n == 0) throw Error(ErrorCode::InvalidConfig, "fft of empty sequence");
    Buffer buf(n);
    // Plan before loading: FFTW_ESTIMATE does not touch the buffer, but keep it obvious.
    const int dims[1] = {static_cast<int>(n)};
    Plan plan(1, dims, buf.get(), sign);
    buf.load(x, std::min(n, x.size()));
    plan.run();
    return buf.store(scale);
}

}  // namespace

cvec fft(const cvec& x, std::size_t n) {
    if (n == 0) n = x.size();
    return transform1d(x, n, FFTW_FORWARD, 1.0);
}

cvec ifft(const cvec& X) {
    return transform1d(X, X.size(), FFTW_BACKWARD, 1.0 / static_cast<double>(X.size()));
}

cvec fft2(const cvec& x, std::size_t rows, std::size_t cols) {
    if (x.size() != rows * cols || rows == 0 || cols == 0) {
        throw Error(ErrorCode::InvalidConfig, "fft2 shape mismatch");
    }
    Buffer buf(rows * cols);
    const int dims[2] = {static_cast<int>(rows), static_cast<int>(cols)};
    Plan plan(2, dims, buf.get(), FFTW_FORWARD);
    buf.load(x, x.size());
    plan.run();
    return buf.store(1.0);
}

double bin_frequency(std::size_t k, std::size_t n, double dt) noexcept {
    const auto kk = static_cast<long long>(k);
    const auto nn = static_cast<long long>(n);
    const long long signed_k = (kk < (nn + 1) / 2) ? kk : kk - nn;
    return 2.0 * std::numbers::pi * static_cast<double>(signed_k) / (static_cast<double>(n) * dt);
}

std::size_t next_pow2(std::size_t n) noexcept {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace biphoton::numerics
