#include <math.h>
#include <stdio.h>
#include <string.h>

#include "nvgate.h"

int main(int argc, char **argv) {
    if (argc < 2) {
        fprintf(stderr, "usage: smoke <config.toml>\n");
        return 2;
    }
    NvgConfig *cfg = NULL;
    if (nvg_config_from_file(argv[1], NULL, &cfg) != NVG_STATUS_OK) {
        fprintf(stderr, "config: %s\n", nvg_last_error());
        return 1;
    }
    NvgEffectiveScalars s;
    if (nvg_effective_scalars(cfg, &s) != NVG_STATUS_OK) {
        fprintf(stderr, "scalars: %s\n", nvg_last_error());
        return 1;
    }
    NvgResult *res = NULL;
    if (nvg_run(cfg, &res) != NVG_STATUS_OK) {
        fprintf(stderr, "run: %s\n", nvg_last_error());
        return 1;
    }
    size_t rows = 0, cols = 0;
    nvg_result_shape(res, &rows, &cols);
    for (size_t i = 0; i < rows; i++) {
        double v = 0.0;
        nvg_result_value(res, i, 0, &v);
        printf("%s=%.9g\n", nvg_result_label(res, i), v);
    }
    double bad = 0.0;
    int status = nvg_result_value(res, rows, 0, &bad);
    printf("out_of_range_status=%d\n", status);
    printf("g_e_hz=%.6f\n", s.g_e / (2.0 * M_PI));
    printf("version=%s\n", nvg_version());
    nvg_result_free(res);
    nvg_config_free(cfg);
    return 0;
}
