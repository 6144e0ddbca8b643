#include <stdio.h>
#include <string.h>
#include "tablegene.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        TgStatus s_ = (call);                                              \
        if (s_ != TG_STATUS_OK) {                                          \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_,              \
                    tg_last_error_message());                              \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    TgGenotype *truth = NULL, *est = NULL, *best = NULL;
    TgImage *skel = NULL;
    TgFitResult *fit = NULL;
    uint32_t xs[16];
    size_t nx = 0;

    CHECK(tg_genotype_sample("base", 7, &truth));
    CHECK(tg_skeleton_oracle(truth, &skel));
    if (tg_image_width(skel) != 256 || tg_image_height(skel) != 256) return 2;
    CHECK(tg_initial_genotype(skel, &est));
    if (tg_genotype_rows(est) != tg_genotype_rows(truth)) return 3;
    if (tg_genotype_cols(est) != tg_genotype_cols(truth)) return 3;
    CHECK(tg_fit(skel, est, TG_OBJECTIVE_NONOVERLAP, 0, 1, &fit));
    CHECK(tg_fit_result_best(fit, &best));
    CHECK(tg_genotype_dividers(best, TG_AXIS_X, xs, 16, &nx));
    if (nx != tg_genotype_cols(best) + 1) return 4;

    if (tg_genotype_sample("no-such-config", 1, &est) != TG_STATUS_INVALID_ARGUMENT) return 5;
    if (strstr(tg_last_error_message(), "no-such-config") == NULL) return 6;

    printf("ok %s rows=%zu cols=%zu objective=%g epochs=%zu\n", tg_version(),
           tg_genotype_rows(best), tg_genotype_cols(best),
           tg_fit_result_objective(fit), tg_fit_result_epochs(fit));
    tg_fit_result_free(fit);
    tg_genotype_free(best);
    tg_genotype_free(est);
    tg_genotype_free(truth);
    tg_image_free(skel);
    return 0;
}
