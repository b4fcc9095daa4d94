#include "fovea/kernels/kernels.hpp"

#include <cmath>

// Reference lane. Every loop here is the bit-level contract the AVX2 lane is
// tested against: reductions run in increasing k with fused multiply-add,
// elementwise ops keep the exact expression shape repeated by the vector
// code, and nothing is re-associated.

namespace fovea::kernels::scalar {

namespace {

template <typename T>
inline T load_a(const T* A, int lda, bool transA, int m, int k) {
    return transA ? A[static_cast<std::size_t>(k) * lda + m]
                  : A[static_cast<std::size_t>(m) * lda + k];
}

template <typename T>
inline T load_b(const T* B, int ldb, bool transB, int k, int n) {
    return transB ? B[static_cast<std::size_t>(n) * ldb + k]
                  : B[static_cast<std::size_t>(k) * ldb + n];
}

} // namespace

template <typename T>
void gemm_ref(int M, int N, int K, const T* A, int lda, bool transA,
              const T* B, int ldb, bool transB, T* C, int ldc,
              bool accumulate) {
    for (int m = 0; m < M; ++m) {
        for (int n = 0; n < N; ++n) {
            T acc = T(0);
            for (int k = 0; k < K; ++k)
                acc = std::fma(load_a(A, lda, transA, m, k),
                               load_b(B, ldb, transB, k, n), acc);
            T* c = C + static_cast<std::size_t>(m) * ldc + n;
            *c = accumulate ? *c + acc : acc;
        }
    }
}

template void gemm_ref<float>(int, int, int, const float*, int, bool,
                              const float*, int, bool, float*, int, bool);
template void gemm_ref<double>(int, int, int, const double*, int, bool,
                               const double*, int, bool, double*, int, bool);

void gemm_f32(int M, int N, int K, const float* A, int lda, bool transA,
              const float* B, int ldb, bool transB, float* C, int ldc,
              bool accumulate) {
    gemm_ref<float>(M, N, K, A, lda, transA, B, ldb, transB, C, ldc, accumulate);
}

template <typename T>
void relu_forward(const T* x, T* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template void relu_forward<float>(const float*, float*, std::size_t);
template void relu_forward<double>(const double*, double*, std::size_t);

template <typename T>
void relu_backward(const T* x, const T* dy, T* dx, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
}

template void relu_backward<float>(const float*, const float*, float*, std::size_t);
template void relu_backward<double>(const double*, const double*, double*, std::size_t);

template <typename T>
void adam_step(T* w, T* m, T* v, const T* g, std::size_t n, T lr, T b1, T b2,
               T eps, T inv_bc1, T inv_bc2) {
    const T omb1 = T(1) - b1;
    const T omb2 = T(1) - b2;
    for (std::size_t i = 0; i < n; ++i) {
        const T gi = g[i];
        const T mi = b1 * m[i] + omb1 * gi;
        const T vi = b2 * v[i] + omb2 * (gi * gi);
        m[i] = mi;
        v[i] = vi;
        const T num = lr * (mi * inv_bc1);
        const T den = std::sqrt(vi * inv_bc2) + eps;
        w[i] = w[i] - num / den;
    }
}

template void adam_step<float>(float*, float*, float*, const float*,
                               std::size_t, float, float, float, float, float,
                               float);
template void adam_step<double>(double*, double*, double*, const double*,
                                std::size_t, double, double, double, double,
                                double, double);

void bilinear_gather(const float* src, int w, int h, const float* sx,
                     const float* sy, float* dst, std::size_t n) {
    const float xmax = static_cast<float>(w - 1);
    const float ymax = static_cast<float>(h - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const float xf = std::floor(sx[i]);
        const float yf = std::floor(sy[i]);
        const float fx = sx[i] - xf;
        const float fy = sy[i] - yf;
        // per-neighbor validity from float comparisons; the int cast happens
        // only on in-range values
        const bool x0 = xf >= 0.0f && xf <= xmax;
        const bool x1 = xf + 1.0f >= 0.0f && xf + 1.0f <= xmax;
        const bool y0 = yf >= 0.0f && yf <= ymax;
        const bool y1 = yf + 1.0f >= 0.0f && yf + 1.0f <= ymax;
        const int ix = x0 || x1 ? static_cast<int>(xf) : 0;
        const int iy = y0 || y1 ? static_cast<int>(yf) : 0;
        const float v00 = x0 && y0 ? src[iy * w + ix] : 0.0f;
        const float v01 = x1 && y0 ? src[iy * w + ix + 1] : 0.0f;
        const float v10 = x0 && y1 ? src[(iy + 1) * w + ix] : 0.0f;
        const float v11 = x1 && y1 ? src[(iy + 1) * w + ix + 1] : 0.0f;
        const float gx = 1.0f - fx;
        const float gy = 1.0f - fy;
        const float top = v00 * gx + v01 * fx;
        const float bot = v10 * gx + v11 * fx;
        dst[i] = top * gy + bot * fy;
    }
}

} // namespace fovea::kernels::scalar
