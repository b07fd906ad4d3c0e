#include "qbsa.h"
#include <stdio.h>
#include <assert.h>

int main(void) {
    QbsaUnit *unit = NULL;
    assert(qbsa_unit_new(&unit) == QbsaStatus_Ok);

    QbsaTiming timing;
    assert(qbsa_unit_timing(unit, &timing) == QbsaStatus_Ok);
    printf("latency=%u ii_dep=%u ii_indep=%u\n", timing.latency, timing.ii_dep, timing.ii_indep);
    assert(timing.latency == 15 && timing.ii_dep == 8 && timing.ii_indep == 1);

    uint64_t mismatches = 99;
    assert(qbsa_unit_check(unit, 128, 42, &mismatches) == QbsaStatus_Ok);
    assert(mismatches == 0);

    uint32_t s; uint8_t c;
    assert(qbsa_alu_exec(QbsaOpcode_Add, 0xFFFFFFFFu, 1u, &s, &c) == QbsaStatus_Ok);
    assert(s == 0 && c == 1);

    QbsaTrace *trace = NULL;
    assert(qbsa_trace_parse_canonical("t", "add x1 x2 x3\nadd x4 x1 x1\n", &trace) == QbsaStatus_Ok);
    QbsaIpcResult r;
    assert(qbsa_ipc_estimate(trace, QbsaProfile_Qbsp, 1, &r) == QbsaStatus_Ok);
    printf("ipc=%f nops=%llu\n", r.ipc, (unsigned long long)r.total_nops);
    assert(r.total_nops == 7);

    qbsa_trace_free(trace);
    qbsa_unit_free(unit);
    printf("C smoke test OK\n");
    return 0;
}
