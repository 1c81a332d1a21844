#include <stdio.h>
#include "approval_nash.h"

/* Loads an instance, prints its lazy equilibria and releases everything. */
int run_smoke(const char *path) {
    ApprovalInstance *inst = NULL;
    char *json = NULL;
    size_t m, n, k;

    if (approval_instance_load(path, &inst) != APPROVAL_STATUS_OK) {
        fprintf(stderr, "%s\n", approval_last_error());
        return 1;
    }
    approval_instance_size(inst, &m, &n, &k);
    ApprovalStatus st = approval_find_pne(inst, NULL, APPROVAL_EQUILIBRIUM_KIND_LAZY, true, &json);
    if (st == APPROVAL_STATUS_OK) {
        printf("m=%zu n=%zu k=%zu %s\n", m, n, k, json);
        approval_string_free(json);
    }
    approval_instance_free(inst);
    return st == APPROVAL_STATUS_OK ? 0 : 1;
}
