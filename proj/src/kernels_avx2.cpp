// AVX2 kernel variants. Compiled with -mavx2 (and only on x86-64); selected
// at runtime, so the rest of the library never needs target attributes.
//
// Bit-exactness: these kernels intentionally use mul+add rather than FMA and
// keep the scalar reference's per-element operation order, so everything
// except the reduction kernels (sum/dot/sumsq/matmul_acc_abt) produces
// bit-identical results to the scalar backend. Conditional accumulators use
// blendv so untouched lanes keep their exact bit pattern (including -0.0).

#if defined(MSA_AVX2_BUILD)

#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "msa/kernels.hpp"

namespace msa::kernels {
namespace avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

}  // namespace

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c) {
  std::memset(c, 0, m * n * sizeof(double));
  const std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t l = 0; l < k; ++l) {
      const double ail = a[i * k + l];
      const double* bl = b + l * n;
      const __m256d va = _mm256_set1_pd(ail);
      std::size_t j = 0;
      for (; j < n4; j += 4) {
        const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(bl + j));
        _mm256_storeu_pd(ci + j, _mm256_add_pd(_mm256_loadu_pd(ci + j), prod));
      }
      for (; j < n; ++j) ci[j] += ail * bl[j];
    }
  }
}

void matmul_acc_abt(std::size_t rows, std::size_t inner, std::size_t cols,
                    const double* a, const double* b, double* c) {
  const std::size_t in4 = inner & ~std::size_t(3);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* ai = a + i * inner;
    for (std::size_t j = 0; j < cols; ++j) {
      const double* bj = b + j * inner;
      __m256d acc = _mm256_setzero_pd();
      std::size_t l = 0;
      for (; l < in4; l += 4) {
        acc = _mm256_add_pd(
            acc, _mm256_mul_pd(_mm256_loadu_pd(ai + l), _mm256_loadu_pd(bj + l)));
      }
      double s = hsum(acc);
      for (; l < inner; ++l) s += ai[l] * bj[l];
      c[i * cols + j] += s;
    }
  }
}

void matmul_acc_atb(std::size_t inner, std::size_t rows, std::size_t cols,
                    const double* a, const double* b, double* c) {
  const std::size_t c4 = cols & ~std::size_t(3);
  for (std::size_t l = 0; l < inner; ++l) {
    const double* bl = b + l * cols;
    for (std::size_t i = 0; i < rows; ++i) {
      const double ali = a[l * rows + i];
      double* ci = c + i * cols;
      const __m256d va = _mm256_set1_pd(ali);
      std::size_t j = 0;
      for (; j < c4; j += 4) {
        const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(bl + j));
        _mm256_storeu_pd(ci + j, _mm256_add_pd(_mm256_loadu_pd(ci + j), prod));
      }
      for (; j < cols; ++j) ci[j] += ali * bl[j];
    }
  }
}

void add(std::size_t n, const double* a, const double* b, double* out) {
  const std::size_t n4 = n & ~std::size_t(3);
  std::size_t i = 0;
  for (; i < n4; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(std::size_t n, const double* a, const double* b, double* out) {
  const std::size_t n4 = n & ~std::size_t(3);
  std::size_t i = 0;
  for (; i < n4; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(std::size_t n, const double* a, const double* b, double* out) {
  const std::size_t n4 = n & ~std::size_t(3);
  std::size_t i = 0;
  for (; i < n4; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale(std::size_t n, double alpha, const double* x, double* out) {
  const __m256d va = _mm256_set1_pd(alpha);
  const std::size_t n4 = n & ~std::size_t(3);
  std::size_t i = 0;
  for (; i < n4; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

void acc(std::size_t n, const double* x, double* y) {
  const std::size_t n4 = n & ~std::size_t(3);
  std::size_t i = 0;
  for (; i < n4; i += 4)
    _mm256_storeu_pd(y + i,
                     _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] += x[i];
}

void axpy_acc(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  const std::size_t n4 = n & ~std::size_t(3);
  std::size_t i = 0;
  for (; i < n4; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void mul_acc(std::size_t n, const double* a, const double* b, double* out) {
  const std::size_t n4 = n & ~std::size_t(3);
  std::size_t i = 0;
  for (; i < n4; i += 4) {
    const __m256d prod =
        _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(out + i), prod));
  }
  for (; i < n; ++i) out[i] += a[i] * b[i];
}

void add_scalar_acc(std::size_t n, double alpha, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  const std::size_t n4 = n & ~std::size_t(3);
  std::size_t i = 0;
  for (; i < n4; i += 4)
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), va));
  for (; i < n; ++i) y[i] += alpha;
}

void relu(std::size_t n, const double* x, double* out) {
  const __m256d zero = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t(3);
  std::size_t i = 0;
  // maxpd returns the second operand on equal, so -0.0 maps to +0.0 exactly
  // like the scalar (x > 0 ? x : 0.0) form.
  for (; i < n4; i += 4)
    _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_acc(std::size_t n, const double* x, const double* g, double* dx) {
  const __m256d zero = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t(3);
  std::size_t i = 0;
  for (; i < n4; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vdx = _mm256_loadu_pd(dx + i);
    const __m256d sum = _mm256_add_pd(vdx, _mm256_loadu_pd(g + i));
    const __m256d mask = _mm256_cmp_pd(vx, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(dx + i, _mm256_blendv_pd(vdx, sum, mask));
  }
  for (; i < n; ++i) {
    if (x[i] > 0.0) dx[i] += g[i];
  }
}

void tanh_bwd_acc(std::size_t n, const double* y, const double* g, double* dx) {
  const __m256d one = _mm256_set1_pd(1.0);
  const std::size_t n4 = n & ~std::size_t(3);
  std::size_t i = 0;
  for (; i < n4; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    const __m256d d = _mm256_sub_pd(one, _mm256_mul_pd(vy, vy));
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(g + i), d);
    _mm256_storeu_pd(dx + i, _mm256_add_pd(_mm256_loadu_pd(dx + i), prod));
  }
  for (; i < n; ++i) dx[i] += g[i] * (1.0 - y[i] * y[i]);
}

void sigmoid_bwd_acc(std::size_t n, const double* y, const double* g,
                     double* dx) {
  const __m256d one = _mm256_set1_pd(1.0);
  const std::size_t n4 = n & ~std::size_t(3);
  std::size_t i = 0;
  for (; i < n4; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    const __m256d d = _mm256_mul_pd(vy, _mm256_sub_pd(one, vy));
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(g + i), d);
    _mm256_storeu_pd(dx + i, _mm256_add_pd(_mm256_loadu_pd(dx + i), prod));
  }
  for (; i < n; ++i) dx[i] += g[i] * (y[i] * (1.0 - y[i]));
}

void abs_fwd(std::size_t n, const double* x, double* out) {
  const __m256d signmask = _mm256_set1_pd(-0.0);
  const std::size_t n4 = n & ~std::size_t(3);
  std::size_t i = 0;
  for (; i < n4; i += 4)
    _mm256_storeu_pd(out + i, _mm256_andnot_pd(signmask, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = std::fabs(x[i]);
}

void abs_bwd_acc(std::size_t n, const double* x, const double* g, double* dx) {
  const __m256d zero = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t(3);
  std::size_t i = 0;
  for (; i < n4; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vg = _mm256_loadu_pd(g + i);
    __m256d vdx = _mm256_loadu_pd(dx + i);
    const __m256d pos = _mm256_cmp_pd(vx, zero, _CMP_GT_OQ);
    const __m256d neg = _mm256_cmp_pd(vx, zero, _CMP_LT_OQ);
    vdx = _mm256_blendv_pd(vdx, _mm256_add_pd(vdx, vg), pos);
    vdx = _mm256_blendv_pd(vdx, _mm256_sub_pd(vdx, vg), neg);
    _mm256_storeu_pd(dx + i, vdx);
  }
  for (; i < n; ++i) {
    if (x[i] > 0.0)
      dx[i] += g[i];
    else if (x[i] < 0.0)
      dx[i] -= g[i];
  }
}

double sum(std::size_t n, const double* x) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t(3);
  std::size_t i = 0;
  for (; i < n4; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double dot(std::size_t n, const double* x, const double* y) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t(3);
  std::size_t i = 0;
  for (; i < n4; i += 4)
    acc = _mm256_add_pd(acc,
                        _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sumsq(std::size_t n, const double* x) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t(3);
  std::size_t i = 0;
  for (; i < n4; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(vx, vx));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

void outer3(std::size_t na, std::size_t nb, std::size_t nc, const double* a,
            const double* b, const double* c, double* out) {
  const std::size_t c4 = nc & ~std::size_t(3);
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      const double ab = a[i] * b[j];
      const __m256d vab = _mm256_set1_pd(ab);
      double* o = out + (i * nb + j) * nc;
      std::size_t k = 0;
      for (; k < c4; k += 4)
        _mm256_storeu_pd(o + k, _mm256_mul_pd(vab, _mm256_loadu_pd(c + k)));
      for (; k < nc; ++k) o[k] = ab * c[k];
    }
  }
}

void adam_update(std::size_t n, double* p, const double* g, double* m,
                 double* v, double lr, double beta1, double beta2, double eps,
                 double corr1, double corr2) {
  const __m256d vb1 = _mm256_set1_pd(beta1);
  const __m256d vb2 = _mm256_set1_pd(beta2);
  const __m256d v1mb1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d v1mb2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d vc1 = _mm256_set1_pd(corr1);
  const __m256d vc2 = _mm256_set1_pd(corr2);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vlr = _mm256_set1_pd(lr);
  const std::size_t n4 = n & ~std::size_t(3);
  std::size_t i = 0;
  for (; i < n4; i += 4) {
    const __m256d vg = _mm256_loadu_pd(g + i);
    __m256d vm = _mm256_loadu_pd(m + i);
    __m256d vv = _mm256_loadu_pd(v + i);
    vm = _mm256_add_pd(_mm256_mul_pd(vb1, vm), _mm256_mul_pd(v1mb1, vg));
    vv = _mm256_add_pd(_mm256_mul_pd(vb2, vv),
                       _mm256_mul_pd(v1mb2, _mm256_mul_pd(vg, vg)));
    _mm256_storeu_pd(m + i, vm);
    _mm256_storeu_pd(v + i, vv);
    const __m256d mhat = _mm256_mul_pd(vm, vc1);
    const __m256d vhat = _mm256_mul_pd(vv, vc2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
    const __m256d step = _mm256_mul_pd(vlr, _mm256_div_pd(mhat, denom));
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
    const double mhat = m[i] * corr1;
    const double vhat = v[i] * corr2;
    p[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
  }
}

}  // namespace avx2

static const Ops kAvx2Ops = {
    avx2::gemm_nn,        avx2::matmul_acc_abt, avx2::matmul_acc_atb,
    avx2::add,            avx2::sub,            avx2::mul,
    avx2::scale,          avx2::acc,            avx2::axpy_acc,
    avx2::mul_acc,        avx2::add_scalar_acc, avx2::relu,
    avx2::relu_bwd_acc,   avx2::tanh_bwd_acc,   avx2::sigmoid_bwd_acc,
    avx2::abs_fwd,        avx2::abs_bwd_acc,    avx2::sum,
    avx2::dot,            avx2::sumsq,          avx2::outer3,
    avx2::adam_update,
};

const Ops& avx2_ops() { return kAvx2Ops; }

}  // namespace msa::kernels

#endif  // MSA_AVX2_BUILD
