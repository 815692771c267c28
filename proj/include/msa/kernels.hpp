#pragma once

#include <cstddef>
#include <cstdint>

// Dense arithmetic inner loops used by the autodiff engine, the layers and
// the Adam optimizer. Every kernel has a scalar reference implementation and,
// on x86-64 with AVX2, a vectorized variant selected once at startup.
//
// Equivalence contract between backends:
//   - Elementwise kernels, the broadcast-axpy gemm_nn / matmul_acc_atb forms,
//     outer3 and adam_update perform the same IEEE operations in the same
//     per-element order in both backends and are bit-identical (the project
//     builds with -ffp-contract=off and the AVX2 code uses no FMA).
//   - Reduction kernels (sum, dot, sumsq, matmul_acc_abt) use multiple SIMD
//     accumulators and may differ from the scalar reference in the last ulps;
//     they are equivalence-tested at tolerance instead.
// Transcendentals (tanh, sigmoid, exp, log) are not part of this table; the
// engine uses one scalar implementation for both backends.
//
// Backend selection: AVX2 when the CPU supports it, else scalar. Override
// with the MSA_KERNELS environment variable ("scalar" or "avx2") or
// force_backend(). The choice is process-wide and made once, so a run is
// always served by a single backend.
namespace msa::kernels {

enum class Backend { Scalar, Avx2 };

struct Ops {
  // c[m×n] = a[m×k] · b[k×n], row-major. Broadcast-axpy loop order (i, l, j).
  void (*gemm_nn)(std::size_t m, std::size_t k, std::size_t n, const double* a,
                  const double* b, double* c);
  // c[rows×cols] += a[rows×inner] · b^T, b stored [cols×inner]. Row-dot form.
  void (*matmul_acc_abt)(std::size_t rows, std::size_t inner, std::size_t cols,
                         const double* a, const double* b, double* c);
  // c[rows×cols] += a^T · b, a stored [inner×rows], b stored [inner×cols].
  void (*matmul_acc_atb)(std::size_t inner, std::size_t rows, std::size_t cols,
                         const double* a, const double* b, double* c);

  void (*add)(std::size_t n, const double* a, const double* b, double* out);
  void (*sub)(std::size_t n, const double* a, const double* b, double* out);
  void (*mul)(std::size_t n, const double* a, const double* b, double* out);
  void (*scale)(std::size_t n, double alpha, const double* x, double* out);
  // y += x
  void (*acc)(std::size_t n, const double* x, double* y);
  // y += alpha * x
  void (*axpy_acc)(std::size_t n, double alpha, const double* x, double* y);
  // out += a ∘ b
  void (*mul_acc)(std::size_t n, const double* a, const double* b, double* out);
  // y += alpha (scalar broadcast)
  void (*add_scalar_acc)(std::size_t n, double alpha, double* y);

  void (*relu)(std::size_t n, const double* x, double* out);
  // dx += g where x > 0
  void (*relu_bwd_acc)(std::size_t n, const double* x, const double* g,
                       double* dx);
  // dx += g * (1 - y^2), y = tanh(x)
  void (*tanh_bwd_acc)(std::size_t n, const double* y, const double* g,
                       double* dx);
  // dx += g * y * (1 - y), y = sigmoid(x)
  void (*sigmoid_bwd_acc)(std::size_t n, const double* y, const double* g,
                          double* dx);
  void (*abs_fwd)(std::size_t n, const double* x, double* out);
  // dx += g * sign(x), sign(0) = 0
  void (*abs_bwd_acc)(std::size_t n, const double* x, const double* g,
                      double* dx);

  double (*sum)(std::size_t n, const double* x);
  double (*dot)(std::size_t n, const double* x, const double* y);
  double (*sumsq)(std::size_t n, const double* x);

  // out[((i*nb)+j)*nc + k] = a[i]*b[j]*c[k]
  void (*outer3)(std::size_t na, std::size_t nb, std::size_t nc,
                 const double* a, const double* b, const double* c,
                 double* out);

  // One fused Adam step; corr1/corr2 are the precomputed 1/(1-beta^t) factors.
  void (*adam_update)(std::size_t n, double* p, const double* g, double* m,
                      double* v, double lr, double beta1, double beta2,
                      double eps, double corr1, double corr2);
};

/// Dispatch table of the active backend.
const Ops& ops();

/// Reference implementations, always available (used by equivalence tests).
const Ops& scalar_ops();

/// AVX2 implementations; only valid to call when cpu_has_avx2().
const Ops& avx2_ops();

bool cpu_has_avx2();
Backend active_backend();
const char* backend_name();

/// Test hook: overrides the runtime choice for the rest of the process.
void force_backend(Backend b);

}  // namespace msa::kernels
