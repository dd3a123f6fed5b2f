#include <stdio.h>
#include <string.h>
#include "hermite.h"

int main(void) {
    const char *want[] = {"2", "1", "2", "1", "1", "4", "1", "1", "6", "1"};
    HermiteCfStream *s = NULL;
    if (hermite_cf_stream_new("1", 10, 0.0, &s) != HERMITE_STATUS_OK) return 1;
    uint64_t index = 0;
    char *value = NULL;
    int k = 0;
    while (hermite_cf_stream_next(s, &index, &value) == HERMITE_STATUS_OK) {
        if (k >= 10 || strcmp(value, want[k]) != 0) return 2;
        hermite_string_free(value);
        k++;
    }
    hermite_cf_stream_free(s);
    if (k != 10) return 3;
    int64_t n[2] = {1, 1};
    char *det = NULL;
    if (hermite_mahler_det("0,3", n, 2, &det) != HERMITE_STATUS_OK) return 4;
    printf("delta %s\n", det);
    hermite_string_free(det);
    if (hermite_mahler_det("0,0", n, 2, &det) != HERMITE_STATUS_INVALID_ARGUMENT) return 5;
    printf("error %s\n", hermite_last_error());
    return 0;
}
