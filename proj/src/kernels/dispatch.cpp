#include "fovea/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace fovea::kernels {

namespace {

std::atomic<int> g_backend{-1}; // -1 = unresolved

Backend resolve() {
    const char* env = std::getenv("FOVEA_KERNELS");
    if (env) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2_fma())
            return Backend::avx2;
        if (std::strcmp(env, "avx2") == 0) return Backend::scalar; // no CPU support
    }
    return cpu_has_avx2_fma() ? Backend::avx2 : Backend::scalar;
}

inline Backend current() {
    int b = g_backend.load(std::memory_order_relaxed);
    if (b < 0) {
        b = static_cast<int>(resolve());
        g_backend.store(b, std::memory_order_relaxed);
    }
    return static_cast<Backend>(b);
}

} // namespace

bool cpu_has_avx2_fma() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

Backend active() { return current(); }

void force(Backend b) {
    if (b == Backend::avx2 && !cpu_has_avx2_fma()) b = Backend::scalar;
    g_backend.store(static_cast<int>(b), std::memory_order_relaxed);
}

void reset() { g_backend.store(-1, std::memory_order_relaxed); }

const char* name(Backend b) {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

void gemm(int M, int N, int K, const float* A, int lda, bool transA,
          const float* B, int ldb, bool transB, float* C, int ldc,
          bool accumulate) {
    if (current() == Backend::avx2)
        avx2::gemm_f32(M, N, K, A, lda, transA, B, ldb, transB, C, ldc, accumulate);
    else
        scalar::gemm_f32(M, N, K, A, lda, transA, B, ldb, transB, C, ldc, accumulate);
}

void gemm(int M, int N, int K, const double* A, int lda, bool transA,
          const double* B, int ldb, bool transB, double* C, int ldc,
          bool accumulate) {
    scalar::gemm_ref<double>(M, N, K, A, lda, transA, B, ldb, transB, C, ldc,
                             accumulate);
}

void relu_forward(const float* x, float* y, std::size_t n) {
    if (current() == Backend::avx2)
        avx2::relu_forward_f32(x, y, n);
    else
        scalar::relu_forward<float>(x, y, n);
}
void relu_forward(const double* x, double* y, std::size_t n) {
    scalar::relu_forward<double>(x, y, n);
}

void relu_backward(const float* x, const float* dy, float* dx, std::size_t n) {
    if (current() == Backend::avx2)
        avx2::relu_backward_f32(x, dy, dx, n);
    else
        scalar::relu_backward<float>(x, dy, dx, n);
}
void relu_backward(const double* x, const double* dy, double* dx, std::size_t n) {
    scalar::relu_backward<double>(x, dy, dx, n);
}

void adam_step(float* w, float* m, float* v, const float* g, std::size_t n,
               float lr, float b1, float b2, float eps, float inv_bc1,
               float inv_bc2) {
    if (current() == Backend::avx2)
        avx2::adam_step_f32(w, m, v, g, n, lr, b1, b2, eps, inv_bc1, inv_bc2);
    else
        scalar::adam_step<float>(w, m, v, g, n, lr, b1, b2, eps, inv_bc1, inv_bc2);
}
void adam_step(double* w, double* m, double* v, const double* g, std::size_t n,
               double lr, double b1, double b2, double eps, double inv_bc1,
               double inv_bc2) {
    scalar::adam_step<double>(w, m, v, g, n, lr, b1, b2, eps, inv_bc1, inv_bc2);
}

void bilinear_gather(const float* src, int w, int h, const float* sx,
                     const float* sy, float* dst, std::size_t n) {
    if (current() == Backend::avx2)
        avx2::bilinear_gather_f32(src, w, h, sx, sy, dst, n);
    else
        scalar::bilinear_gather(src, w, h, sx, sy, dst, n);
}

} // namespace fovea::kernels
