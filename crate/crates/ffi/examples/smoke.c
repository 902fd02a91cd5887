/* Plane wave against its matched fluid: H stays at round-off over one unit of time. */
#include <math.h>
#include <stdio.h>

#include "kglab.h"

static int check(KglabStatus s, const char *what) {
    if (s != KGLAB_STATUS_OK) {
        char msg[256];
        kglab_last_error(msg, sizeof msg);
        fprintf(stderr, "%s failed (%d): %s\n", what, (int)s, msg);
        return 1;
    }
    return 0;
}

int main(void) {
    size_t n = 64;
    double len = 6.283185307179586, k = 1.0, u = 1.0;
    KglabGrid *grid = NULL;
    KglabKg *kg = NULL;
    KglabFluid *fluid = NULL;
    KglabModulated m;
    KglabKgDiagnostics d0, d1;

    if (check(kglab_grid_new(1, &n, &len, &grid), "grid")) return 1;
    if (check(kglab_kg_plane_wave(grid, 2.0, 1.0, 0.0, &k, 0.1, &kg), "plane wave")) return 1;
    if (check(kglab_fluid_constant(grid, 2.0, &u, 1.0, &fluid), "fluid")) return 1;
    if (check(kglab_kg_diagnostics(kg, &d0), "diagnostics")) return 1;
    if (check(kglab_kg_advance(kg, 1.0, 0.05), "advance")) return 1;
    if (check(kglab_kg_diagnostics(kg, &d1), "diagnostics")) return 1;
    if (check(kglab_modulated_energy(kg, fluid, &m), "modulated energy")) return 1;

    /* A CFL violation is reported, not fatal. */
    if (kglab_kg_step(kg, 1.0) != KGLAB_STATUS_CFL) return 1;

    printf("t = %.3f  energy drift = %.3e  H = %.3e\n", d1.time, fabs(d1.energy - d0.energy) / d0.energy, m.h);
    kglab_fluid_free(fluid);
    kglab_kg_free(kg);
    kglab_grid_free(grid);
    return fabs(m.h) < 1e-10 ? 0 : 1;
}
