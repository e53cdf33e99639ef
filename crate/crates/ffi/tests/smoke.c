#include <math.h>
#include <stdio.h>
#include <string.h>

#include "dqc1.h"

#define CHECK(cond)                                                    \
    do {                                                               \
        if (!(cond)) {                                                 \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__,    \
                    #cond, dqc1_last_error());                         \
            return 1;                                                  \
        }                                                              \
    } while (0)

int main(void) {
    uint64_t shots = 0;
    CHECK(dqc1_shots_needed(0.1, 0.05, 1.0, &shots) == DQC1_STATUS_OK);
    CHECK(shots == 738);
    CHECK(dqc1_shots_needed(0.1, 1.5, 1.0, &shots) == DQC1_STATUS_INVALID_INPUT);
    CHECK(strlen(dqc1_last_error()) > 0);

    double re = 0, im = 0;
    CHECK(dqc1_kernel(1.0, 2.0, 1.0, 2.0, 3, DQC1_REGISTER_MIXED, &re, &im) == DQC1_STATUS_OK);
    CHECK(fabs(re - 1.0) < 1e-12 && fabs(im) < 1e-12);

    const double xs[] = {0.0, 0.0, 0.2, 0.1, 3.0, 3.0, 3.1, 2.8};
    const int8_t ys[] = {1, 1, -1, -1};
    Dqc1Gram *g = NULL;
    CHECK(dqc1_gram_rbf(xs, 4, xs, 4, 1.0, &g) == DQC1_STATUS_OK);
    CHECK(dqc1_gram_rows(g) == 4 && dqc1_gram_cols(g) == 4);

    Dqc1Model *m = NULL;
    CHECK(dqc1_svm_train(g, ys, 4, 10.0, &m) == DQC1_STATUS_OK);
    double d[4];
    CHECK(dqc1_svm_decision(m, g, d, 4) == DQC1_STATUS_OK);
    for (int i = 0; i < 4; i++) {
        CHECK((d[i] >= 0) == (ys[i] > 0));
    }
    char *json = dqc1_svm_to_json(m);
    CHECK(json != NULL && strstr(json, "\"alphas\"") != NULL);
    dqc1_string_free(json);
    dqc1_svm_free(m);
    dqc1_gram_free(g);
    printf("ok %s\n", dqc1_version());
    return 0;
}
