#include "fovea/kernels/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstring>
#include <vector>

// AVX2+FMA lane. Compiled with -mavx2 -mfma (see CMakeLists); only reached
// after the dispatcher has verified CPU support. Each kernel repeats the
// scalar lane's per-element operation sequence exactly, so the two lanes are
// interchangeable at the bit level.

namespace fovea::kernels::avx2 {

namespace {

constexpr int MR = 6;
constexpr int NR = 16;

inline const float* a_ptr(const float* A, int lda, bool transA, int m, int k) {
    return transA ? A + static_cast<std::size_t>(k) * lda + m
                  : A + static_cast<std::size_t>(m) * lda + k;
}

// A packed k-major in MR-row panels: ap[p][k*MR + i], zero padded past M.
void pack_a(const float* A, int lda, bool transA, int M, int K, float* dst) {
    for (int p = 0; p < M; p += MR) {
        for (int k = 0; k < K; ++k) {
            for (int i = 0; i < MR; ++i) {
                int m = p + i;
                *dst++ = m < M ? *a_ptr(A, lda, transA, m, k) : 0.0f;
            }
        }
    }
}

// One NR-column panel of op(B), k-major: bp[k*NR + j], zero padded past N.
void pack_b_panel(const float* B, int ldb, bool transB, int K, int N, int n0,
                  float* dst) {
    const int nr = N - n0 < NR ? N - n0 : NR;
    if (!transB) {
        for (int k = 0; k < K; ++k) {
            const float* row = B + static_cast<std::size_t>(k) * ldb + n0;
            int j = 0;
            for (; j < nr; ++j) dst[j] = row[j];
            for (; j < NR; ++j) dst[j] = 0.0f;
            dst += NR;
        }
    } else {
        for (int k = 0; k < K; ++k) {
            for (int j = 0; j < NR; ++j)
                dst[j] = j < nr ? B[static_cast<std::size_t>(n0 + j) * ldb + k]
                                : 0.0f;
            dst += NR;
        }
    }
}

void micro_6x16(int K, const float* ap, const float* bp, float* C, int ldc,
                bool accumulate, int m_rem, int n_rem) {
    __m256 acc[MR][2];
    for (int i = 0; i < MR; ++i) {
        acc[i][0] = _mm256_setzero_ps();
        acc[i][1] = _mm256_setzero_ps();
    }
    for (int k = 0; k < K; ++k) {
        const __m256 b0 = _mm256_loadu_ps(bp);
        const __m256 b1 = _mm256_loadu_ps(bp + 8);
        for (int i = 0; i < MR; ++i) {
            const __m256 ai = _mm256_broadcast_ss(ap + i);
            acc[i][0] = _mm256_fmadd_ps(ai, b0, acc[i][0]);
            acc[i][1] = _mm256_fmadd_ps(ai, b1, acc[i][1]);
        }
        ap += MR;
        bp += NR;
    }
    if (m_rem == MR && n_rem == NR) {
        for (int i = 0; i < MR; ++i) {
            float* c = C + static_cast<std::size_t>(i) * ldc;
            if (accumulate) {
                _mm256_storeu_ps(c, _mm256_add_ps(_mm256_loadu_ps(c), acc[i][0]));
                _mm256_storeu_ps(c + 8,
                                 _mm256_add_ps(_mm256_loadu_ps(c + 8), acc[i][1]));
            } else {
                _mm256_storeu_ps(c, acc[i][0]);
                _mm256_storeu_ps(c + 8, acc[i][1]);
            }
        }
    } else {
        alignas(32) float tmp[MR * NR];
        for (int i = 0; i < MR; ++i) {
            _mm256_store_ps(tmp + i * NR, acc[i][0]);
            _mm256_store_ps(tmp + i * NR + 8, acc[i][1]);
        }
        for (int i = 0; i < m_rem; ++i) {
            float* c = C + static_cast<std::size_t>(i) * ldc;
            for (int j = 0; j < n_rem; ++j)
                c[j] = accumulate ? c[j] + tmp[i * NR + j] : tmp[i * NR + j];
        }
    }
}

std::vector<float>& workspace_a() {
    thread_local std::vector<float> ws;
    return ws;
}
std::vector<float>& workspace_b() {
    thread_local std::vector<float> ws;
    return ws;
}

} // namespace

void gemm_f32(int M, int N, int K, const float* A, int lda, bool transA,
              const float* B, int ldb, bool transB, float* C, int ldc,
              bool accumulate) {
    if (M <= 0 || N <= 0) return;
    if (K <= 0) {
        if (!accumulate)
            for (int m = 0; m < M; ++m)
                std::memset(C + static_cast<std::size_t>(m) * ldc, 0,
                            sizeof(float) * N);
        return;
    }
    const int mpanels = (M + MR - 1) / MR;
    auto& wa = workspace_a();
    auto& wb = workspace_b();
    wa.resize(static_cast<std::size_t>(mpanels) * MR * K);
    wb.resize(static_cast<std::size_t>(NR) * K);
    pack_a(A, lda, transA, M, K, wa.data());
    for (int n0 = 0; n0 < N; n0 += NR) {
        pack_b_panel(B, ldb, transB, K, N, n0, wb.data());
        const int n_rem = N - n0 < NR ? N - n0 : NR;
        for (int p = 0; p < mpanels; ++p) {
            const int m0 = p * MR;
            const int m_rem = M - m0 < MR ? M - m0 : MR;
            micro_6x16(K, wa.data() + static_cast<std::size_t>(p) * MR * K,
                       wb.data(), C + static_cast<std::size_t>(m0) * ldc + n0,
                       ldc, accumulate, m_rem, n_rem);
        }
    }
}

void relu_forward_f32(const float* x, float* y, std::size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 v = _mm256_loadu_ps(x + i);
        _mm256_storeu_ps(y + i, _mm256_max_ps(v, zero));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward_f32(const float* x, const float* dy, float* dx, std::size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(x + i), zero, _CMP_GT_OQ);
        _mm256_storeu_ps(dx + i, _mm256_and_ps(_mm256_loadu_ps(dy + i), mask));
    }
    for (; i < n; ++i) dx[i] = x[i] > 0.0f ? dy[i] : 0.0f;
}

void adam_step_f32(float* w, float* m, float* v, const float* g, std::size_t n,
                   float lr, float b1, float b2, float eps, float inv_bc1,
                   float inv_bc2) {
    const float omb1s = 1.0f - b1;
    const float omb2s = 1.0f - b2;
    const __m256 vb1 = _mm256_set1_ps(b1);
    const __m256 vb2 = _mm256_set1_ps(b2);
    const __m256 vomb1 = _mm256_set1_ps(omb1s);
    const __m256 vomb2 = _mm256_set1_ps(omb2s);
    const __m256 vlr = _mm256_set1_ps(lr);
    const __m256 veps = _mm256_set1_ps(eps);
    const __m256 vbc1 = _mm256_set1_ps(inv_bc1);
    const __m256 vbc2 = _mm256_set1_ps(inv_bc2);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 gi = _mm256_loadu_ps(g + i);
        const __m256 mi = _mm256_add_ps(_mm256_mul_ps(vb1, _mm256_loadu_ps(m + i)),
                                        _mm256_mul_ps(vomb1, gi));
        const __m256 vi = _mm256_add_ps(
            _mm256_mul_ps(vb2, _mm256_loadu_ps(v + i)),
            _mm256_mul_ps(vomb2, _mm256_mul_ps(gi, gi)));
        _mm256_storeu_ps(m + i, mi);
        _mm256_storeu_ps(v + i, vi);
        const __m256 num = _mm256_mul_ps(vlr, _mm256_mul_ps(mi, vbc1));
        const __m256 den = _mm256_add_ps(
            _mm256_sqrt_ps(_mm256_mul_ps(vi, vbc2)), veps);
        _mm256_storeu_ps(
            w + i, _mm256_sub_ps(_mm256_loadu_ps(w + i), _mm256_div_ps(num, den)));
    }
    for (; i < n; ++i) {
        const float gi = g[i];
        const float mi = b1 * m[i] + omb1s * gi;
        const float vi = b2 * v[i] + omb2s * (gi * gi);
        m[i] = mi;
        v[i] = vi;
        const float num = lr * (mi * inv_bc1);
        const float den = std::sqrt(vi * inv_bc2) + eps;
        w[i] = w[i] - num / den;
    }
}

void bilinear_gather_f32(const float* src, int w, int h, const float* sx,
                         const float* sy, float* dst, std::size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    const __m256 one = _mm256_set1_ps(1.0f);
    const __m256 xmax = _mm256_set1_ps(static_cast<float>(w - 1));
    const __m256 ymax = _mm256_set1_ps(static_cast<float>(h - 1));
    const __m256i wv = _mm256_set1_epi32(w);
    const __m256i onei = _mm256_set1_epi32(1);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 sxv = _mm256_loadu_ps(sx + i);
        const __m256 syv = _mm256_loadu_ps(sy + i);
        const __m256 xf = _mm256_floor_ps(sxv);
        const __m256 yf = _mm256_floor_ps(syv);
        const __m256 fx = _mm256_sub_ps(sxv, xf);
        const __m256 fy = _mm256_sub_ps(syv, yf);
        const __m256 xf1 = _mm256_add_ps(xf, one);
        const __m256 yf1 = _mm256_add_ps(yf, one);
        const __m256 x0m = _mm256_and_ps(_mm256_cmp_ps(xf, zero, _CMP_GE_OQ),
                                         _mm256_cmp_ps(xf, xmax, _CMP_LE_OQ));
        const __m256 x1m = _mm256_and_ps(_mm256_cmp_ps(xf1, zero, _CMP_GE_OQ),
                                         _mm256_cmp_ps(xf1, xmax, _CMP_LE_OQ));
        const __m256 y0m = _mm256_and_ps(_mm256_cmp_ps(yf, zero, _CMP_GE_OQ),
                                         _mm256_cmp_ps(yf, ymax, _CMP_LE_OQ));
        const __m256 y1m = _mm256_and_ps(_mm256_cmp_ps(yf1, zero, _CMP_GE_OQ),
                                         _mm256_cmp_ps(yf1, ymax, _CMP_LE_OQ));
        const __m256i ix = _mm256_cvttps_epi32(xf);
        const __m256i iy = _mm256_cvttps_epi32(yf);
        const __m256i idx00 = _mm256_add_epi32(_mm256_mullo_epi32(iy, wv), ix);
        const __m256i idx01 = _mm256_add_epi32(idx00, onei);
        const __m256i idx10 = _mm256_add_epi32(idx00, wv);
        const __m256i idx11 = _mm256_add_epi32(idx10, onei);
        const __m256 m00 = _mm256_and_ps(x0m, y0m);
        const __m256 m01 = _mm256_and_ps(x1m, y0m);
        const __m256 m10 = _mm256_and_ps(x0m, y1m);
        const __m256 m11 = _mm256_and_ps(x1m, y1m);
        // clamp masked-off lanes to index 0 so the gather stays in bounds
        auto fetch = [&](const __m256i idx, const __m256 mask) {
            const __m256i safe = _mm256_and_si256(idx, _mm256_castps_si256(mask));
            const __m256 v = _mm256_i32gather_ps(src, safe, 4);
            return _mm256_and_ps(v, mask);
        };
        const __m256 v00 = fetch(idx00, m00);
        const __m256 v01 = fetch(idx01, m01);
        const __m256 v10 = fetch(idx10, m10);
        const __m256 v11 = fetch(idx11, m11);
        const __m256 gx = _mm256_sub_ps(one, fx);
        const __m256 gy = _mm256_sub_ps(one, fy);
        const __m256 top = _mm256_add_ps(_mm256_mul_ps(v00, gx), _mm256_mul_ps(v01, fx));
        const __m256 bot = _mm256_add_ps(_mm256_mul_ps(v10, gx), _mm256_mul_ps(v11, fx));
        _mm256_storeu_ps(dst + i,
                         _mm256_add_ps(_mm256_mul_ps(top, gy), _mm256_mul_ps(bot, fy)));
    }
    if (i < n) scalar::bilinear_gather(src, w, h, sx + i, sy + i, dst + i, n - i);
}

} // namespace fovea::kernels::avx2
