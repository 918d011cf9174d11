#include <math.h>
#include <stdio.h>
#include "tunnel_noise.h"

int main(void) {
    TnSolution *sol = NULL;
    if (tn_solve(TN_FAMILY_SYMMETRIC, 5.0, 0.0, 1.0, 1.0, &sol) != TN_STATUS_OK) {
        fprintf(stderr, "solve: %s\n", tn_last_error_message());
        return 1;
    }
    TnScattering sc;
    TnUncertainty u;
    if (tn_solution_scattering(sol, &sc) != TN_STATUS_OK || tn_solution_uncertainty(sol, 1.0, &u) != TN_STATUS_OK) {
        return 2;
    }
    tn_solution_free(sol);
    if (fabs(sc.transmission + sc.reflection - 1.0) > 1e-10 || fabs(u.product_over_hbar - 0.5) > 1e-10) {
        return 3;
    }
    if (tn_solve(TN_FAMILY_SYMMETRIC, 5.0, 0.0, 1.0, 6.0, &sol) != TN_STATUS_DOMAIN || sol != NULL) {
        return 4;
    }
    printf("ok %s %.12f\n", tn_version(), u.product_over_hbar);
    return 0;
}
