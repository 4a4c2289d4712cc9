#include <stdio.h>
#include <string.h>

#include "relaxedsync.h"

#define EXPECT(cond)                                              \
    do {                                                          \
        if (!(cond)) {                                            \
            fprintf(stderr, "%s:%d: failed: %s\n", __FILE__,      \
                    __LINE__, #cond);                             \
            return 1;                                             \
        }                                                         \
    } while (0)

int main(void) {
    RsObject *q = NULL;
    EXPECT(rs_object_new("setseqqueue", 2, 0, &q) == RS_STATUS_OK);
    EXPECT(q != NULL);
    EXPECT(rs_insert(q, 0, 10) == RS_STATUS_OK);
    EXPECT(rs_insert(q, 1, 11) == RS_STATUS_OK);

    RsRemoved r;
    EXPECT(rs_remove(q, 1, &r) == RS_STATUS_OK);
    EXPECT(r.kind == RS_RESULT_KIND_ITEM && r.item == 10);
    EXPECT(rs_remove(q, 0, &r) == RS_STATUS_OK);
    EXPECT(r.kind == RS_RESULT_KIND_ITEM && r.item == 11);
    EXPECT(rs_remove(q, 0, &r) == RS_STATUS_OK);
    EXPECT(r.kind == RS_RESULT_KIND_EMPTY);

    EXPECT(rs_insert(q, 2, 1) == RS_STATUS_INVALID_ARGUMENT);
    char msg[128];
    size_t len = rs_last_error(msg, sizeof msg);
    EXPECT(len > 0 && strstr(msg, "out of range") != NULL);
    rs_object_free(q);

    RsObject *none = NULL;
    EXPECT(rs_object_new("nosuch", 2, 0, &none) == RS_STATUS_INVALID_ARGUMENT);
    EXPECT(none == NULL);
    EXPECT(rs_insert(NULL, 0, 1) == RS_STATUS_NULL_POINTER);

    const char *trace =
        "trace v1 n=2 impl=setseqstack\n"
        "0 0 inv push 1\n"
        "1 1 inv pop -\n"
        "2 0 res push true\n"
        "3 1 res pop 1\n";
    int32_t ok = -1;
    EXPECT(rs_check_trace(trace, RS_CONDITION_SET_LIN_STACK, 0, &ok) == RS_STATUS_OK);
    EXPECT(ok == 1);
    EXPECT(rs_check_trace("garbage", RS_CONDITION_LIN_STACK, 0, &ok) == RS_STATUS_PARSE_ERROR);

    puts("ok");
    return 0;
}
