#ifndef FOALKIT_H
#define FOALKIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call.
typedef enum FkStatus {
  FK_STATUS_OK = 0,
  FK_STATUS_NULL_POINTER = 1,
  FK_STATUS_INVALID_ARGUMENT = 2,
  FK_STATUS_SHAPE_MISMATCH = 3,
  FK_STATUS_EMPTY_MASK = 4,
  FK_STATUS_EMPTY_DATASET = 5,
  FK_STATUS_NEGATIVE_LOSS = 6,
  FK_STATUS_NO_VALID_PIXELS = 7,
  FK_STATUS_IO = 8,
  FK_STATUS_PARSE = 9,
  FK_STATUS_INTERNAL = 10,
} FkStatus;

// Image domain selector.
typedef enum FkDomain {
  // Daytime color.
  FK_DOMAIN_A = 0,
  // Thermal infrared.
  FK_DOMAIN_B = 1,
} FkDomain;

// Pool a scheduler draw came from.
typedef enum FkPool {
  FK_POOL_ALL = 0,
  FK_POOL_SOC = 1,
} FkPool;

// Opaque image handle.
typedef struct FkImage FkImage;

// Opaque label map handle.
typedef struct FkLabels FkLabels;

// Opaque binary mask handle.
typedef struct FkMask FkMask;

// Opaque scheduler handle over `uint32_t` sample ids.
typedef struct FkScheduler FkScheduler;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length without the NUL, or
// 0 if there is none.
size_t fk_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *fk_version(void);

// Creates an image from `height * width * channels` values.
enum FkStatus fk_image_new(size_t height,
                           size_t width,
                           size_t channels,
                           const double *data,
                           struct FkImage **image_out);

// Shape of an image; any output pointer may be null.
enum FkStatus fk_image_shape(const struct FkImage *image,
                             size_t *height,
                             size_t *width,
                             size_t *channels);

// Copies image values into `buf`, which must hold `len` >= h*w*c doubles.
enum FkStatus fk_image_copy(const struct FkImage *image, double *buf, size_t len);

void fk_image_free(struct FkImage *image);

// Creates a mask from `height * width` bytes (nonzero = set).
enum FkStatus fk_mask_new(size_t height,
                          size_t width,
                          const uint8_t *bits,
                          struct FkMask **mask_out);

// Copies mask bits (0 or 1) into `buf`, which must hold `len` >= h*w bytes.
enum FkStatus fk_mask_copy(const struct FkMask *mask, uint8_t *buf, size_t len);

void fk_mask_free(struct FkMask *mask);

// Creates a label map from `height * width` category ids.
enum FkStatus fk_labels_new(size_t height,
                            size_t width,
                            const uint8_t *ids,
                            struct FkLabels **labels_out);

void fk_labels_free(struct FkLabels *labels);

// Mean SSIM of two images of equal shape.
enum FkStatus fk_ssim(const struct FkImage *a, const struct FkImage *b, double *value_out);

// Masked image distance with smooth-L1 weight `lambda_sl1`.
enum FkStatus fk_midf(const struct FkMask *mask,
                      const struct FkImage *rec,
                      const struct FkImage *ori,
                      double lambda_sl1,
                      double *value_out);

// Edge precision of a translation against a single-channel source, with
// the default thresholds and tolerance.
enum FkStatus fk_apce(const struct FkImage *translated,
                      const struct FkImage *source,
                      bool strict,
                      double *value_out);

// Mean IoU over `classes`; pixels labelled 255 in `gt` are ignored.
enum FkStatus fk_class_miou(const struct FkLabels *pred,
                            const struct FkLabels *gt,
                            const uint8_t *classes,
                            size_t n_classes,
                            double *value_out);

// Occlusion-aware mix with the default category configuration. Outputs
// the mixed image, the pasted-region mask and the luminance factor; any
// output pointer except `mixed_out` may be null.
enum FkStatus fk_oamix(const struct FkImage *real_image,
                       const struct FkImage *fake_image,
                       const struct FkLabels *real_labels,
                       const struct FkLabels *fake_labels,
                       enum FkDomain domain_sel,
                       struct FkImage **mixed_out,
                       struct FkMask **pasted_out,
                       double *ala_factor_out);

// Creates a scheduler. `soc_*` ids must be contained in `all_*`.
enum FkStatus fk_scheduler_new(const uint32_t *soc_a,
                               size_t n_soc_a,
                               const uint32_t *all_a,
                               size_t n_all_a,
                               const uint32_t *soc_b,
                               size_t n_soc_b,
                               const uint32_t *all_b,
                               size_t n_all_b,
                               uint64_t seed,
                               struct FkScheduler **scheduler_out);

// Records one iteration's losses for a domain.
enum FkStatus fk_scheduler_update(struct FkScheduler *scheduler,
                                  enum FkDomain domain_sel,
                                  double z_soc,
                                  double z_global);

// Draws the next sample id for a domain. `pool_out` may be null.
enum FkStatus fk_scheduler_next(struct FkScheduler *scheduler,
                                enum FkDomain domain_sel,
                                uint32_t *id_out,
                                enum FkPool *pool_out);

void fk_scheduler_free(struct FkScheduler *scheduler);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FOALKIT_H */
