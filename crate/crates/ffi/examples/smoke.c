#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "faber.h"

static double kink(const double *x, size_t dim, void *user_data) {
    (void)user_data;
    double v = 1.0;
    for (size_t i = 0; i < dim; i++) {
        v *= fabs(x[i] - 0.3);
    }
    return v;
}

int main(void) {
    FaberSeriesHandle *s = NULL;
    if (faber_analyze(2, 6, kink, NULL, &s) != FABER_STATUS_OK) {
        fprintf(stderr, "analyze: %s\n", faber_last_error());
        return 1;
    }
    double x[2] = {0.5, 0.75};
    double v = 0.0, integral = 0.0;
    if (faber_series_evaluate(s, x, 2, &v) != FABER_STATUS_OK ||
        faber_series_integrate(s, &integral) != FABER_STATUS_OK) {
        fprintf(stderr, "query: %s\n", faber_last_error());
        return 1;
    }
    uint64_t m = 0;
    faber_node_count(6, 2, &m);
    printf("value %.12f integral %.12f nodes %llu\n", v, integral, (unsigned long long)m);
    faber_series_free(s);
    return fabs(v - 0.2 * 0.45) < 1e-12 && m == 1281 ? 0 : 1;
}
