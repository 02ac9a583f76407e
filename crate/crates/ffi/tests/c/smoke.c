#include <stdio.h>
#include <string.h>

#include "verdict.h"

static int fail(const char *what) {
    const char *msg = verdict_last_error_message();
    fprintf(stderr, "%s: %s\n", what, msg ? msg : "(no message)");
    return 1;
}

int main(void) {
    VerdictCorpus *corpus = NULL;
    if (verdict_corpus_synthetic("{\"docs_per_class\": 30}", 1, &corpus) != VERDICT_STATUS_OK)
        return fail("synthetic");

    const char *config = "{\"task\": \"ruling-multi\", \"min_support\": 10, \"eval\": {\"folds\": 3}}";
    char *report = NULL;
    if (verdict_cv_run(corpus, config, &report) != VERDICT_STATUS_OK)
        return fail("cv");
    int has_svm = strstr(report, "\"svm\"") != NULL;
    verdict_string_free(report);

    VerdictPipeline *pipeline = NULL;
    if (verdict_train(corpus, config, &pipeline) != VERDICT_STATUS_OK)
        return fail("train");
    char *label = NULL;
    if (verdict_pipeline_predict(pipeline, "zkaaa zkaab", &label) != VERDICT_STATUS_OK)
        return fail("predict");
    printf("%s\n", label);
    verdict_string_free(label);

    double p = 0.0;
    uint64_t counts[2] = {1, 1};
    verdict_expected_dummy_accuracy(counts, 2, &p);

    VerdictCorpus *missing = NULL;
    VerdictStatus status = verdict_corpus_from_path("/nonexistent.jsonl", &missing);

    verdict_pipeline_free(pipeline);
    verdict_corpus_free(corpus);
    return has_svm && p == 0.5 && status == VERDICT_STATUS_IO && missing == NULL ? 0 : 1;
}
