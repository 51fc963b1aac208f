/* Copyright 2026 The Unilabel Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the unilabel library. Objects are opaque handles released
 * with their matching *_free function. Every fallible call returns a
 * ul_status; on failure ul_last_error() describes the most recent error on
 * the calling thread. */

#ifndef UNILABEL_UNILABEL_H
#define UNILABEL_UNILABEL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(UNILABEL_BUILDING)
#define UL_API __declspec(dllexport)
#else
#define UL_API __declspec(dllimport)
#endif
#else
#define UL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ul_status {
  UL_OK = 0,
  UL_ERR_PARSE = 1,
  UL_ERR_REFERENCE = 2,
  UL_ERR_CONFLICT = 3,
  UL_ERR_COLLISION = 4,
  UL_ERR_RANGE = 5,
  UL_ERR_FORMAT = 6,
  UL_ERR_IO = 7,
  UL_ERR_ARGUMENT = 8,
  UL_ERR_INTERNAL = 9
} ul_status;

typedef struct ul_taxonomy ul_taxonomy;
typedef struct ul_label_space ul_label_space;
typedef struct ul_lut ul_lut;
typedef struct ul_confusion ul_confusion;

#define UL_IGNORE_ID 255

UL_API const char* ul_version(void);

/* Message for the last failed call on this thread; "" if none. */
UL_API const char* ul_last_error(void);

/* Releases strings returned by the library. */
UL_API void ul_string_free(char* s);

/* Taxonomies. */
UL_API ul_status ul_taxonomy_parse(const char* text, ul_taxonomy** out);
UL_API void ul_taxonomy_free(ul_taxonomy* t);
UL_API const char* ul_taxonomy_dataset_id(const ul_taxonomy* t);
UL_API size_t ul_taxonomy_class_count(const ul_taxonomy* t);      /* evaluation classes */
UL_API size_t ul_taxonomy_declared_count(const ul_taxonomy* t);   /* classes plus ignore ids */

/* Universal label-space. `directives` may be NULL. */
UL_API ul_status ul_label_space_merge(const ul_taxonomy* const* taxonomies, size_t count,
                                      const char* directives, ul_label_space** out);
UL_API ul_status ul_label_space_from_json(const char* json, ul_label_space** out);
UL_API ul_status ul_label_space_to_json(const ul_label_space* s, char** out_json);
UL_API void ul_label_space_free(ul_label_space* s);
UL_API size_t ul_label_space_size(const ul_label_space* s);
/* Name of universal class `id`, or NULL when out of range. */
UL_API const char* ul_label_space_name(const ul_label_space* s, int id);
/* Universal id of a dataset-local id (UL_IGNORE_ID for ignore classes). */
UL_API ul_status ul_label_space_lookup(const ul_label_space* s, const char* dataset_id, int local_id,
                                       int* out_universal);

/* Lookup tables and rasters. */
UL_API ul_status ul_lut_build(const ul_label_space* s, const char* dataset_id, int strict, ul_lut** out);
UL_API void ul_lut_free(ul_lut* lut);
/* Remaps `count` ids; `in` and `out` may alias. */
UL_API ul_status ul_remap(const ul_lut* lut, const uint8_t* in, uint8_t* out, size_t count);
/* Interleaved 8-bit RGB to class ids by the R/G/B threshold code. */
UL_API ul_status ul_decode_color_coded(const uint8_t* rgb, size_t pixel_count, int strict, uint8_t* out_ids);

/* Confusion matrices. */
UL_API ul_status ul_confusion_create(int class_count, ul_confusion** out);
UL_API void ul_confusion_free(ul_confusion* m);
UL_API ul_status ul_confusion_accumulate(ul_confusion* m, const uint8_t* gt, const uint8_t* pred, size_t count);
UL_API ul_status ul_confusion_merge(ul_confusion* into, const ul_confusion* other);
UL_API uint64_t ul_confusion_count(const ul_confusion* m, int gt, int pred);
/* Writes class_count values; undefined IoUs are NaN. */
UL_API ul_status ul_confusion_iou(const ul_confusion* m, double* out_iou);
/* Mean over defined IoUs among `subset` (all classes when subset is NULL). */
UL_API ul_status ul_confusion_mean_iou(const ul_confusion* m, const int* subset, size_t subset_count,
                                       double* out_miou);

/* Splits. Histograms are row-major, `count` rows of 256 pixel counts. */
UL_API ul_status ul_split_divergence(const uint64_t* val_histogram, const uint64_t* train_histogram,
                                     double* out_divergence);
/* `keys` orders records for tie-breaking; out_in_val receives 1 for
 * validation records. */
UL_API ul_status ul_propose_split(const char* const* keys, const uint64_t* histograms, size_t count,
                                  double fraction, uint64_t seed, unsigned sweeps, unsigned workers,
                                  uint8_t* out_in_val, double* out_divergence);

/* Runs the command-line tool; argv[0] is the program name. */
UL_API int ul_cli_main(int argc, const char* const* argv);

#ifdef __cplusplus
}
#endif

#endif /* UNILABEL_UNILABEL_H */
