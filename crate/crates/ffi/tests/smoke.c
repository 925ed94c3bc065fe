#include <stdio.h>
#include "maslov.h"

int main(void) {
    MaslovProblem *p = NULL;
    MaslovOptions opts = maslov_options_default();
    int64_t index = 0;
    if (maslov_problem_new("scalar_rd", NULL, NULL, 0, &p) != MASLOV_STATUS_OK) {
        fprintf(stderr, "%s\n", maslov_last_error_message());
        return 1;
    }
    if (maslov_index_by_angle(p, -0.5, &opts, &index) == MASLOV_STATUS_OK) {
        printf("maslov %s: index %lld\n", maslov_version(), (long long)index);
    }
    maslov_problem_free(p);
    return 0;
}
