#include <math.h>
#include <stdio.h>

#include "coalition_nash.h"

static int check(CnStatus s, const char *what) {
  if (s != CN_STATUS_OK) {
    const char *msg = cn_last_error_message();
    fprintf(stderr, "%s failed (%d): %s\n", what, (int)s, msg ? msg : "");
    return 1;
  }
  return 0;
}

int main(void) {
  CnScenario *scenario = NULL;
  CnGame *game = NULL;
  CnTrajectory *run = NULL;
  double ne[15], x[15];
  double kkt = 0.0;

  if (check(cn_scenario_builtin("case1", &scenario), "builtin")) return 1;
  if (check(cn_scenario_build_game(scenario, &game), "build_game")) return 1;
  if (check(cn_game_solve_ne(game, ne, 15, &kkt), "solve_ne")) return 1;

  CnRunOptions opts = cn_run_options_default();
  opts.log_stride = 1000;
  if (check(cn_game_run(game, CN_ALGORITHM_SPECIAL, 0.02, &opts, &run), "run")) return 1;
  if (check(cn_trajectory_final_x(run, x, 15), "final_x")) return 1;

  double worst = 0.0;
  for (int i = 0; i < 15; i++) worst = fmax(worst, fabs(x[i] - ne[i]));
  CnRunSummary summary;
  if (check(cn_trajectory_summary(run, &summary), "summary")) return 1;
  printf("version %s: x_11 = %.4f, max gap %.2e, %zu iterations, %zu records\n", cn_version(), x[0], worst,
         summary.iterations, summary.records);

  CnScenario *missing = NULL;
  if (cn_scenario_builtin("nope", &missing) != CN_STATUS_NOT_FOUND || missing != NULL) return 1;

  cn_trajectory_free(run);
  cn_game_free(game);
  cn_scenario_free(scenario);
  return worst < 1e-6 ? 0 : 1;
}
