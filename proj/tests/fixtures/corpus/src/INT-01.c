#include <stdlib.h>

void *make_buffer(int count) {
    return malloc(count);
}
