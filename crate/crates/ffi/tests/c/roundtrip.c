#include <math.h>
#include <stdio.h>
#include "quatfill.h"

#define CHECK(call)                                                          \
  do {                                                                       \
    QfStatus s_ = (call);                                                    \
    if (s_ != QF_STATUS_OK) {                                                \
      fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, qf_last_error());   \
      return 1;                                                              \
    }                                                                        \
  } while (0)

int main(void) {
  /* rank-1 pure matrix: u_i * v_j with u pure, v real */
  enum { M = 12, N = 10 };
  size_t shape[2] = {M, N};
  double x[M * N], y[M * N], z[M * N];
  for (size_t j = 0; j < N; j++) {
    for (size_t i = 0; i < M; i++) {
      double v = 1.0 + 0.1 * (double)j;
      x[i + M * j] = (1.0 + (double)i) * v;
      y[i + M * j] = (2.0 - 0.3 * (double)i) * v;
      z[i + M * j] = (0.5 + 0.05 * (double)(i * i)) * v;
    }
  }
  QfTensor *truth = NULL, *observed = NULL, *recovered = NULL;
  QfMask *mask = NULL;
  QfConfig *cfg = NULL;
  QfReport *report = NULL;
  CHECK(qf_tensor_from_planes(2, shape, NULL, x, y, z, &truth));
  CHECK(qf_mask_generate(2, shape, 0.7, 3, &mask));
  CHECK(qf_mask_apply(mask, truth, &observed));
  CHECK(qf_config_default(QF_MODE_MATRIX, 2, &cfg));
  CHECK(qf_complete(observed, mask, cfg, QF_MODE_MATRIX, 1, &recovered, &report));

  double rel = 0.0;
  CHECK(qf_tensor_relative_error(recovered, truth, &rel));
  printf("iterations %zu converged %d rel %.3e\n", qf_report_iterations(report),
         qf_report_converged(report), rel);

  if (qf_tensor_zeros(9, shape, &recovered) != QF_STATUS_INVALID_ARGUMENT || recovered != NULL) {
    return 2;
  }
  if (qf_last_error() == NULL) return 3;

  qf_report_free(report);
  qf_tensor_free(recovered);
  qf_tensor_free(observed);
  qf_tensor_free(truth);
  qf_mask_free(mask);
  qf_config_free(cfg);
  return rel < 1e-2 ? 0 : 4;
}
