#ifndef POSESYNC_H
#define POSESYNC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

#define PS_NODE_MODEL_STUDENT_T 0

#define PS_NODE_MODEL_GAUSSIAN 1

typedef enum PsStatus {
  PS_STATUS_OK = 0,
  PS_STATUS_NULL_POINTER = 1,
  PS_STATUS_INVALID_UTF8 = 2,
  PS_STATUS_INVALID_PARAMETER = 3,
  PS_STATUS_INVALID_GRAPH = 4,
  PS_STATUS_DISCONNECTED = 5,
  PS_STATUS_UNKNOWN_NODE = 6,
  PS_STATUS_NUMERICAL = 7,
  PS_STATUS_JSON = 8,
  PS_STATUS_OUT_OF_RANGE = 9,
  PS_STATUS_PANIC = 10,
} PsStatus;

// Opaque pose graph.
typedef struct PsGraph PsGraph;

// Opaque synchronization output.
typedef struct PsSyncResult PsSyncResult;

// Pose `(x, y, theta)` in meters and radians.
typedef struct PsPose {
  double x;
  double y;
  double theta;
} PsPose;

typedef struct PsSyncOptions {
  // One of the `PS_NODE_MODEL_*` constants.
  uint32_t node_model;
  bool reweighting;
  uint32_t icm_iters;
  uint32_t reweight_iters;
  uint32_t em_iters;
  double dof;
  double gamma_shape;
} PsSyncOptions;

// Message describing the last failure on this thread, or null. The pointer
// stays valid until the next call into the library on the same thread.
const char *ps_last_error_message(void);

// # Safety
// Pointers must be null or valid for the access implied by their type.
enum PsStatus ps_pose_compose(const struct PsPose *a,
                              const struct PsPose *b,
                              struct PsPose *result);

// # Safety
// Pointers must be null or valid for the access implied by their type.
enum PsStatus ps_pose_inverse(const struct PsPose *a, struct PsPose *result);

// Relative pose `inverse(pose_i) * pose_j`.
//
// # Safety
// Pointers must be null or valid for the access implied by their type.
enum PsStatus ps_pose_relative(const struct PsPose *pose_i,
                               const struct PsPose *pose_j,
                               struct PsPose *result);

// Overlap fraction of two `length` x `width` rectangles centered on the poses.
//
// # Safety
// Pointers must be null or valid for the access implied by their type.
enum PsStatus ps_overlap_fraction(const struct PsPose *a,
                                  const struct PsPose *b,
                                  double length,
                                  double width,
                                  double *result);

// Parses a graph from its JSON interchange document.
//
// # Safety
// `json` must be null or a NUL-terminated string; `graph` must be null or writable.
enum PsStatus ps_graph_from_json(const char *json, struct PsGraph **graph);

// # Safety
// `graph` must be null or a handle from [`ps_graph_from_json`] not yet freed.
void ps_graph_free(struct PsGraph *graph);

// # Safety
// `graph` must be null or a live handle.
enum PsStatus ps_graph_node_count(const struct PsGraph *graph, uintptr_t *count);

struct PsSyncOptions ps_sync_options_default(void);

// Runs synchronization. A null `options` uses the defaults.
//
// # Safety
// `graph` must be a live handle, `options` null or valid, `result` null or writable.
enum PsStatus ps_synchronize(const struct PsGraph *graph,
                             const struct PsSyncOptions *options,
                             struct PsSyncResult **result);

// # Safety
// `result` must be null or a handle from [`ps_synchronize`] not yet freed.
void ps_sync_result_free(struct PsSyncResult *result);

// # Safety
// `result` must be a live handle; `count` null or writable.
enum PsStatus ps_sync_result_node_count(const struct PsSyncResult *result, uintptr_t *count);

// Node id and estimated pose at position `index` in ascending id order.
//
// # Safety
// `result` must be a live handle; out-pointers null or writable.
enum PsStatus ps_sync_result_pose(const struct PsSyncResult *result,
                                  uintptr_t index,
                                  uintptr_t *node_id,
                                  struct PsPose *pose);

// Final trust weight of edge `from -> to`.
//
// # Safety
// `result` must be a live handle; `weight` null or writable.
enum PsStatus ps_sync_result_edge_weight(const struct PsSyncResult *result,
                                         uintptr_t from,
                                         uintptr_t to,
                                         double *weight);

// # Safety
// `result` must be a live handle; `count` null or writable.
enum PsStatus ps_sync_result_clamp_events(const struct PsSyncResult *result, uintptr_t *count);

#endif  /* POSESYNC_H */
