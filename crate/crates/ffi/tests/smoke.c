#include <math.h>
#include <stdio.h>
#include <string.h>

#include "bellcheck.h"

#define CHECK(cond)                                              \
    do {                                                         \
        if (!(cond)) {                                           \
            fprintf(stderr, "check failed line %d: %s\n", __LINE__, #cond); \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(void) {
    BcCircuit *ch = NULL, *cz = NULL;
    BcUnitary *h = NULL, *z = NULL;
    double d = -1.0;
    uint64_t shots = 0;
    BcEstimate est;

    CHECK(bc_circuit_parse("qubits 1\nH 0\n", &ch) == BC_STATUS_OK);
    CHECK(bc_circuit_parse("qubits 1\nZ 0\n", &cz) == BC_STATUS_OK);
    CHECK(bc_circuit_unitary(ch, &h) == BC_STATUS_OK);
    CHECK(bc_circuit_unitary(cz, &z) == BC_STATUS_OK);
    CHECK(bc_circuit_distance(h, z, &d) == BC_STATUS_OK);
    CHECK(fabs(d - sqrt(0.5)) < 1e-12);

    CHECK(bc_plan_shots(0.1, 0.05, &shots) == BC_STATUS_OK);
    CHECK(shots == 2397);
    CHECK(bc_estimate_distance(h, z, 2, shots, 1, &est) == BC_STATUS_OK);
    CHECK(est.shots == shots);
    CHECK(fabs(est.distance - d) < 0.2);

    bc_circuit_free(ch);
    ch = NULL;
    CHECK(bc_circuit_parse("qubits 1\nFOO 0\n", &ch) == BC_STATUS_PARSE);
    CHECK(ch == NULL);
    CHECK(strstr(bc_last_error_message(), "line 2") != NULL);

    bc_unitary_free(h);
    bc_unitary_free(z);
    bc_circuit_free(cz);
    printf("c smoke ok: D=%.6f est=%.6f version=%s\n", d, est.distance, bc_version());
    return 0;
}
