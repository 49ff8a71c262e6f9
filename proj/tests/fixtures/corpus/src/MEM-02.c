#include <stdint.h>
#include <stdlib.h>

int *build_histogram(size_t n) {
    if (n > SIZE_MAX / sizeof(int)) return NULL;
    int* buf = malloc(n * sizeof(int));
    if (buf == NULL) return NULL;
    for (size_t i = 0; i < n; i++) buf[i] = 0;
    return buf;
}
