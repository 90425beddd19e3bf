#include <stdio.h>
#include "gcdlab.h"

int main(void) {
    GcdlabRuleSet *rs = NULL;
    if (gcdlab_rule_set_from_preset("b420", 0, &rs) != GCDLAB_STATUS_OK) {
        fprintf(stderr, "%s\n", gcdlab_last_error_message());
        return 1;
    }
    printf("len=%zu predict(32)=%llu\n", gcdlab_rule_set_len(rs),
           (unsigned long long)gcdlab_rule_set_predict(rs, 32));
    gcdlab_rule_set_free(rs);

    GcdlabSamplerConfig cfg = gcdlab_sampler_config_default();
    cfg.outcome_dist = GCDLAB_OUTCOME_DIST_UNIFORM;
    GcdlabSampler *s = NULL;
    if (gcdlab_sampler_new(&cfg, &s) != GCDLAB_STATUS_OK) return 1;
    uint64_t a, b, g;
    for (int i = 0; i < 3; i++) {
        gcdlab_sampler_next(s, &a, &b, &g);
        if (gcdlab_gcd(a, b) != g) return 2;
    }
    gcdlab_sampler_free(s);

    uint32_t digits[8];
    size_t len = 0;
    gcdlab_encode(1000, 30, digits, 8, &len);
    printf("digits=%zu\n", len);
    return 0;
}
