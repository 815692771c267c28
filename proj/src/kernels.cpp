#include "msa/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace msa::kernels {

namespace scalar {

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c) {
  std::memset(c, 0, m * n * sizeof(double));
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t l = 0; l < k; ++l) {
      const double ail = a[i * k + l];
      const double* bl = b + l * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += ail * bl[j];
    }
  }
}

void matmul_acc_abt(std::size_t rows, std::size_t inner, std::size_t cols,
                    const double* a, const double* b, double* c) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* ai = a + i * inner;
    for (std::size_t j = 0; j < cols; ++j) {
      const double* bj = b + j * inner;
      double s = 0.0;
      for (std::size_t l = 0; l < inner; ++l) s += ai[l] * bj[l];
      c[i * cols + j] += s;
    }
  }
}

void matmul_acc_atb(std::size_t inner, std::size_t rows, std::size_t cols,
                    const double* a, const double* b, double* c) {
  for (std::size_t l = 0; l < inner; ++l) {
    const double* bl = b + l * cols;
    for (std::size_t i = 0; i < rows; ++i) {
      const double ali = a[l * rows + i];
      double* ci = c + i * cols;
      for (std::size_t j = 0; j < cols; ++j) ci[j] += ali * bl[j];
    }
  }
}

void add(std::size_t n, const double* a, const double* b, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(std::size_t n, const double* a, const double* b, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(std::size_t n, const double* a, const double* b, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale(std::size_t n, double alpha, const double* x, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i];
}

void acc(std::size_t n, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

void axpy_acc(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void mul_acc(std::size_t n, const double* a, const double* b, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * b[i];
}

void add_scalar_acc(std::size_t n, double alpha, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha;
}

void relu(std::size_t n, const double* x, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_acc(std::size_t n, const double* x, const double* g, double* dx) {
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > 0.0) dx[i] += g[i];
  }
}

void tanh_bwd_acc(std::size_t n, const double* y, const double* g, double* dx) {
  for (std::size_t i = 0; i < n; ++i) dx[i] += g[i] * (1.0 - y[i] * y[i]);
}

void sigmoid_bwd_acc(std::size_t n, const double* y, const double* g,
                     double* dx) {
  for (std::size_t i = 0; i < n; ++i) dx[i] += g[i] * (y[i] * (1.0 - y[i]));
}

void abs_fwd(std::size_t n, const double* x, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::fabs(x[i]);
}

void abs_bwd_acc(std::size_t n, const double* x, const double* g, double* dx) {
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > 0.0)
      dx[i] += g[i];
    else if (x[i] < 0.0)
      dx[i] -= g[i];
    // subgradient at 0 is 0
  }
}

double sum(std::size_t n, const double* x) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double dot(std::size_t n, const double* x, const double* y) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sumsq(std::size_t n, const double* x) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

void outer3(std::size_t na, std::size_t nb, std::size_t nc, const double* a,
            const double* b, const double* c, double* out) {
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      const double ab = a[i] * b[j];
      double* o = out + (i * nb + j) * nc;
      for (std::size_t k = 0; k < nc; ++k) o[k] = ab * c[k];
    }
  }
}

void adam_update(std::size_t n, double* p, const double* g, double* m,
                 double* v, double lr, double beta1, double beta2, double eps,
                 double corr1, double corr2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
    const double mhat = m[i] * corr1;
    const double vhat = v[i] * corr2;
    p[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
  }
}

}  // namespace scalar

static const Ops kScalarOps = {
    scalar::gemm_nn,        scalar::matmul_acc_abt, scalar::matmul_acc_atb,
    scalar::add,            scalar::sub,            scalar::mul,
    scalar::scale,          scalar::acc,            scalar::axpy_acc,
    scalar::mul_acc,        scalar::add_scalar_acc, scalar::relu,
    scalar::relu_bwd_acc,   scalar::tanh_bwd_acc,   scalar::sigmoid_bwd_acc,
    scalar::abs_fwd,        scalar::abs_bwd_acc,    scalar::sum,
    scalar::dot,            scalar::sumsq,          scalar::outer3,
    scalar::adam_update,
};

const Ops& scalar_ops() { return kScalarOps; }

bool cpu_has_avx2() {
#if defined(MSA_AVX2_BUILD)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

namespace {

Backend pick_backend() {
  if (const char* env = std::getenv("MSA_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Backend::Avx2;
  }
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

Backend g_backend = pick_backend();

}  // namespace

Backend active_backend() { return g_backend; }

const char* backend_name() {
  return g_backend == Backend::Avx2 ? "avx2" : "scalar";
}

void force_backend(Backend b) {
  if (b == Backend::Avx2 && !cpu_has_avx2()) return;
  g_backend = b;
}

const Ops& ops() {
  return g_backend == Backend::Avx2 ? avx2_ops() : kScalarOps;
}

#if !defined(MSA_AVX2_BUILD)
// No AVX2 translation unit on this target; never reached because
// cpu_has_avx2() is false.
const Ops& avx2_ops() { return kScalarOps; }
#endif

}  // namespace msa::kernels
