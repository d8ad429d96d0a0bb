#ifndef TOOLEXPANDER_TOOLEXPANDER_H
#define TOOLEXPANDER_TOOLEXPANDER_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TX_API __declspec(dllexport)
#else
#define TX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values of 1-3 double as CLI exit codes. */
typedef enum tx_status {
  TX_OK = 0,
  TX_ERR_CONFIG = 1,
  TX_ERR_DATA = 2,
  TX_ERR_RUNTIME = 3,
  TX_ERR_INVALID_ARGUMENT = 4
} tx_status;

typedef struct tx_dataset tx_dataset;
typedef struct tx_policy tx_policy;

/* Message for the last failing call on this thread; "" after success. */
TX_API const char* tx_last_error(void);
/* Frees strings returned through char** out-parameters. */
TX_API void tx_string_free(char* s);

TX_API tx_status tx_dataset_load(const char* path, tx_dataset** out);
TX_API void tx_dataset_free(tx_dataset* ds);
TX_API tx_status tx_dataset_counts(const tx_dataset* ds, size_t* total, size_t* with_fewshot,
                                   size_t* without_fewshot);
TX_API tx_status tx_dataset_save(const tx_dataset* ds, const char* path);

/* Loads a checkpoint file. */
TX_API tx_status tx_policy_load(const char* path, tx_policy** out);
TX_API void tx_policy_free(tx_policy* policy);
TX_API tx_status tx_policy_round(const tx_policy* policy, int* round);
TX_API tx_status tx_policy_seed(const tx_policy* policy, uint64_t* seed);

/* mode: "random", "cautious" or "bold". Vetted modes need a policy; random
   ignores it. Rollouts and temperature apply to vetting only. */
TX_API tx_status tx_dataset_build_fewshots(tx_dataset* ds, const char* mode,
                                           const tx_policy* policy, int k, int rollouts,
                                           double temperature, uint64_t seed);

/* reward_mode: "plain" or "self_exemplifying". Writes
   {"hard_count": n, "hard_ids": [...]} to *json_out. */
TX_API tx_status tx_classify_hard(const tx_dataset* ds, const tx_policy* policy,
                                  const char* reward_mode, int rollouts, double temperature,
                                  uint64_t seed, int workers, char** json_out);

/* Scores one response against a dataset sample. Writes
   {"sample_id", "value", "result_ok", "format_ok", "fewshot_ok"}. */
TX_API tx_status tx_score_text(const tx_dataset* ds, const char* sample_id, const char* text,
                               const char* reward_mode, char** json_out);
/* Batch form: input lines are {"sample_id", "text"}; output is one JSON
   object per line in input order. */
TX_API tx_status tx_score_jsonl(const tx_dataset* ds, const char* input_path,
                                const char* reward_mode, char** jsonl_out);

/* Runs training from a config file. output_dir overrides the config when
   non-NULL; workers overrides it when > 0. */
TX_API tx_status tx_train(const char* config_path, const char* output_dir, int workers,
                          char** summary_json_out);

/* Uses the config's dataset, initial checkpoint and seed. */
TX_API tx_status tx_experiment_rollouts_vs_fewshots(const char* config_path, int workers,
                                                    char** report_json_out);

/* Writes the bundled toy dataset, initial checkpoint and config into dir. */
TX_API tx_status tx_write_toy_bundle(const char* dir);

#ifdef __cplusplus
}
#endif

#endif
