if (n > SIZE_MAX / sizeof(int)) return NULL;
int* buf = malloc(n * sizeof(int));
