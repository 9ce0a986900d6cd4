/* Solve one model point and run a short simulation through the C ABI.
 *
 *   cc predict.c -I../include -L../../../target/release -ltreecount_ffi -lm -lpthread -ldl
 */
#include <stdio.h>

#include "treecount.h"

int main(void) {
  TcModelParams params = tc_model_params_default(1000.0, 8.0, 10.0);
  TcModel *model = NULL;
  if (tc_model_predict(&params, &model) != TC_STATUS_OK) {
    fprintf(stderr, "predict: %s\n", tc_last_error_message());
    return 1;
  }
  printf("model a0 %.6f levels %zu\n", tc_model_a0(model), tc_model_num_levels(model));
  tc_model_free(model);

  TcSimConfig cfg = tc_sim_config_default(200, 8.0, 10.0);
  cfg.num_samples = 50;
  cfg.warmup_time = 5.0;
  TcSimulation *sim = NULL;
  if (tc_simulate(&cfg, &sim) != TC_STATUS_OK) {
    fprintf(stderr, "simulate: %s\n", tc_last_error_message());
    return 1;
  }
  double se = 0.0;
  double a0 = tc_sim_a0(sim, &se);
  printf("sim a0 %.6f se %.6f\n", a0, se);
  tc_sim_free(sim);

  params.ratio = -1.0;
  if (tc_model_predict(&params, &model) != TC_STATUS_INVALID_CONFIG) {
    return 1;
  }
  printf("rejected: %s\n", tc_last_error_message());
  return 0;
}
