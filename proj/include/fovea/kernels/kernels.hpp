#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops, implemented twice: a portable scalar reference
// (namespace kernels::scalar) and an AVX2+FMA lane (kernels::avx2), selected
// at runtime. Both lanes perform the identical per-element operation sequence
// (same k-order in reductions, fused multiply-add on both sides, no
// re-association), so outputs are bit-identical; the equivalence tests assert
// exact equality, not tolerances.
namespace fovea::kernels {

enum class Backend { scalar, avx2 };

// Resolved once: FOVEA_KERNELS=scalar|avx2 env override, else CPU detection.
Backend active();
void force(Backend b); // test hook; pass through detection again with reset()
void reset();
bool cpu_has_avx2_fma();
const char* name(Backend b);

// C[M x N] = op(A)[M x K] * op(B)[K x N], row-major with leading dimensions.
// transX means X is stored as the transpose of op(X). With accumulate, the
// freshly computed product is added onto C with a single add per element.
// Per element, products are accumulated with fma in increasing k.
void gemm(int M, int N, int K, const float* A, int lda, bool transA,
          const float* B, int ldb, bool transB, float* C, int ldc,
          bool accumulate);
void gemm(int M, int N, int K, const double* A, int lda, bool transA,
          const double* B, int ldb, bool transB, double* C, int ldc,
          bool accumulate);

// y = max(x, 0)
void relu_forward(const float* x, float* y, std::size_t n);
void relu_forward(const double* x, double* y, std::size_t n);
// dx = (x > 0) ? dy : 0, x being the pre-activation input
void relu_backward(const float* x, const float* dy, float* dx, std::size_t n);
void relu_backward(const double* x, const double* dy, double* dx, std::size_t n);

// Adam update, elementwise:
//   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g*g
//   w -= lr * (m*inv_bc1) / (sqrt(v*inv_bc2) + eps)
// inv_bc1/inv_bc2 are the step's bias corrections 1/(1-b^t).
void adam_step(float* w, float* m, float* v, const float* g, std::size_t n,
               float lr, float b1, float b2, float eps, float inv_bc1,
               float inv_bc2);
void adam_step(double* w, double* m, double* v, const double* g, std::size_t n,
               double lr, double b1, double b2, double eps, double inv_bc1,
               double inv_bc2);

// dst[i] = bilinear sample of src (w x h, row-major) at (sx[i], sy[i]).
// Integer coordinates address pixel centers; neighbors outside the image
// contribute 0, so points fully outside [-0.5,w-0.5]x[-0.5,h-0.5] yield 0.
void bilinear_gather(const float* src, int w, int h, const float* sx,
                     const float* sy, float* dst, std::size_t n);

namespace scalar {
void gemm_f32(int M, int N, int K, const float* A, int lda, bool transA,
              const float* B, int ldb, bool transB, float* C, int ldc,
              bool accumulate);
template <typename T>
void gemm_ref(int M, int N, int K, const T* A, int lda, bool transA,
              const T* B, int ldb, bool transB, T* C, int ldc, bool accumulate);
template <typename T> void relu_forward(const T* x, T* y, std::size_t n);
template <typename T>
void relu_backward(const T* x, const T* dy, T* dx, std::size_t n);
template <typename T>
void adam_step(T* w, T* m, T* v, const T* g, std::size_t n, T lr, T b1, T b2,
               T eps, T inv_bc1, T inv_bc2);
void bilinear_gather(const float* src, int w, int h, const float* sx,
                     const float* sy, float* dst, std::size_t n);
} // namespace scalar

namespace avx2 {
void gemm_f32(int M, int N, int K, const float* A, int lda, bool transA,
              const float* B, int ldb, bool transB, float* C, int ldc,
              bool accumulate);
void relu_forward_f32(const float* x, float* y, std::size_t n);
void relu_backward_f32(const float* x, const float* dy, float* dx, std::size_t n);
void adam_step_f32(float* w, float* m, float* v, const float* g, std::size_t n,
                   float lr, float b1, float b2, float eps, float inv_bc1,
                   float inv_bc2);
void bilinear_gather_f32(const float* src, int w, int h, const float* sx,
                         const float* sy, float* dst, std::size_t n);
} // namespace avx2

} // namespace fovea::kernels
