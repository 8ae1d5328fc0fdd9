#ifndef SSD_H
#define SSD_H

/* C interface to the smoothing-defense testbed. Every call returns an
 * ssd_status; on failure ssd_last_error() describes it (per thread).
 * Objects are opaque handles released with their *_free function. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SSD_API __declspec(dllexport)
#else
#define SSD_API __attribute__((visibility("default")))
#endif

typedef enum ssd_status {
    SSD_OK = 0,
    SSD_ERR_PARAMETER = 1,
    SSD_ERR_SHAPE = 2,
    SSD_ERR_IO = 3,
    SSD_ERR_FORMAT = 4,
    SSD_ERR_CONFIG = 5,
    SSD_ERR_TRAINING = 6,
    SSD_ERR_ATTACK = 7,
    SSD_ERR_NUMERIC = 8,
    SSD_ERR_INTERNAL = 9,
    SSD_ERR_NULL_ARGUMENT = 10,
    SSD_ERR_BUFFER_TOO_SMALL = 11
} ssd_status;

typedef struct ssd_image ssd_image;
typedef struct ssd_dataset ssd_dataset;
typedef struct ssd_model ssd_model;
typedef struct ssd_attack_set ssd_attack_set;

SSD_API const char* ssd_version(void);
SSD_API const char* ssd_status_name(ssd_status status);
/* Message of the last failed call on this thread ("" if none). */
SSD_API const char* ssd_last_error(void);
/* Releases strings returned through char** out-parameters. */
SSD_API void ssd_string_free(char* s);

/* Images: height x width x channels, interleaved, doubles. */
SSD_API ssd_status ssd_image_create(size_t height, size_t width, size_t channels, const double* data,
                                    ssd_image** out);
SSD_API void ssd_image_free(ssd_image* img);
SSD_API ssd_status ssd_image_shape(const ssd_image* img, size_t* height, size_t* width, size_t* channels);
SSD_API ssd_status ssd_image_copy_data(const ssd_image* img, double* out, size_t capacity);
SSD_API ssd_status ssd_image_load(const char* path, ssd_image** out);
SSD_API ssd_status ssd_image_save(const ssd_image* img, const char* path);
SSD_API ssd_status ssd_image_save_png(const ssd_image* img, const char* path);

/* Smoothing: spec_json is {"method", "params", "strength_param"}. */
SSD_API ssd_status ssd_smooth(const ssd_image* in, const char* spec_json, ssd_image** out);

/* Datasets */
SSD_API ssd_status ssd_dataset_load_idx(const char* images_path, const char* labels_path, size_t limit,
                                        ssd_dataset** out);
SSD_API ssd_status ssd_dataset_synthetic(size_t count, uint64_t seed, ssd_dataset** out);
SSD_API void ssd_dataset_free(ssd_dataset* data);
SSD_API ssd_status ssd_dataset_size(const ssd_dataset* data, size_t* size);
SSD_API ssd_status ssd_dataset_sample(const ssd_dataset* data, size_t index, ssd_image** image, int* label);

/* Models. config_json uses the model.train keys; NULL or "" means defaults.
 * test may be NULL. */
SSD_API ssd_status ssd_model_train(const ssd_dataset* train, const ssd_dataset* test, const char* config_json,
                                   ssd_model** out);
SSD_API ssd_status ssd_model_load(const char* path, ssd_model** out);
SSD_API ssd_status ssd_model_save(const ssd_model* model, const char* path);
SSD_API void ssd_model_free(ssd_model* model);
SSD_API ssd_status ssd_model_predict(const ssd_model* model, const ssd_image* img, int* label, double* confidence);
SSD_API ssd_status ssd_model_accuracy(const ssd_model* model, const ssd_dataset* data, unsigned workers,
                                      double* accuracy);
/* Writes the NUL-terminated hex fingerprint; needs capacity >= 17. */
SSD_API ssd_status ssd_model_fingerprint(const ssd_model* model, char* buf, size_t capacity);

/* Attack sets. spec_json as the "attack" config key; out_dir may be NULL
 * to keep the set in memory only. */
SSD_API ssd_status ssd_attack_generate(const ssd_model* model, const ssd_dataset* data, const char* spec_json,
                                       const char* out_dir, unsigned workers, ssd_attack_set** out);
SSD_API ssd_status ssd_attack_load(const char* dir, ssd_attack_set** out);
SSD_API void ssd_attack_set_free(ssd_attack_set* set);
SSD_API ssd_status ssd_attack_summary(const ssd_attack_set* set, size_t* candidates, size_t* successes);

/* Config-driven commands. command is "train", "attack" or "experiment".
 * ssd_config_validate checks the schema and the command's inputs without
 * computing anything. ssd_run writes outputs under the configured
 * output_dir and returns a JSON summary in *summary_json (may be NULL). */
SSD_API ssd_status ssd_config_validate(const char* config_json, const char* command);
SSD_API ssd_status ssd_run(const char* config_json, const char* command, char** summary_json);
/* Applies "a.b=value" to a JSON document; returns the new document. */
SSD_API ssd_status ssd_config_override(const char* config_json, const char* assignment, char** out_json);
/* Documentation of all config keys. */
SSD_API const char* ssd_config_reference(void);
/* Comma-separated experiment names. */
SSD_API const char* ssd_experiment_names(void);

/* Re-renders saved experiment results (result.json files) into out_dir. */
SSD_API ssd_status ssd_report_emit(const char* const* result_paths, size_t count, const char* out_dir,
                                   char** summary_json);

#ifdef __cplusplus
}
#endif

#endif
