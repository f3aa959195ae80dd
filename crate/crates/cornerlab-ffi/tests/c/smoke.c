#include <stdio.h>
#include "cornerlab.h"

int main(void) {
    double p[2] = {0.4, 1.0};
    CornerlabModel *a = NULL, *ab = NULL;
    CornerlabInvariant inv;
    const char *cls = NULL;
    if (cornerlab_model_builtin("ssh", p, 2, &a) != CORNERLAB_STATUS_OK) {
        fprintf(stderr, "%s\n", cornerlab_last_error());
        return 1;
    }
    if (cornerlab_product(a, a, &ab) != CORNERLAB_STATUS_OK)
        return 1;
    cornerlab_model_class(ab, &cls);
    if (cornerlab_corner_invariant(ab, 2, 24, &inv) != CORNERLAB_STATUS_OK) {
        fprintf(stderr, "%s\n", cornerlab_last_error());
        return 1;
    }
    printf("%s %lld\n", cls, (long long)inv.value);
    cornerlab_model_free(ab);
    cornerlab_model_free(a);
    return 0;
}
