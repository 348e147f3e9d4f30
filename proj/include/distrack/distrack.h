/* C interface to the distributed tracking simulator. */
#ifndef DISTRACK_H
#define DISTRACK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef DISTRACK_BUILDING_LIBRARY
#    define DT_API __declspec(dllexport)
#  else
#    define DT_API __declspec(dllimport)
#  endif
#else
#  define DT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dt_status {
  DT_OK = 0,
  DT_ERR_INVALID_ARGUMENT = 1,
  DT_ERR_IO = 2,
  DT_ERR_PARSE = 3,
  DT_ERR_PROTOCOL = 4,
  DT_ERR_STATE = 5,
  DT_ERR_NULL = 6,
  DT_ERR_NOMEM = 7,
  DT_ERR_INTERNAL = 8
} dt_status;

typedef struct dt_stream dt_stream;
typedef struct dt_generator dt_generator;
typedef struct dt_config dt_config;
typedef struct dt_report dt_report;
typedef struct dt_mg dt_mg;
typedef struct dt_fd dt_fd;

DT_API const char* dt_version(void);
/* Message for the last failed call on this thread; "" if none. */
DT_API const char* dt_last_error(void);
DT_API const char* dt_status_name(dt_status s);
/* Frees strings returned through char** out-parameters. */
DT_API void dt_string_free(char* s);

/* ---- streams ---- */

DT_API dt_status dt_stream_gen_zipf(uint64_t n, uint64_t universe, double skew, double beta,
                                    uint64_t seed, dt_stream** out);
/* kind: "lowrank", "highrank" or "arc". */
DT_API dt_status dt_stream_gen_matrix(const char* kind, uint64_t n, uint64_t dim, uint64_t rank,
                                      double noise, double arc_degrees, uint64_t seed,
                                      dt_stream** out);
DT_API dt_status dt_stream_from_elements(const uint64_t* elements, const double* weights,
                                         uint64_t n, dt_stream** out);
DT_API dt_status dt_stream_from_rows(const double* values, uint64_t n, uint64_t dim,
                                     dt_stream** out);
/* Binary stream files are detected by content; otherwise CSV. rows selects
   the CSV flavour; columns is a comma list of 0-based indices or NULL. */
DT_API dt_status dt_stream_load(const char* path, int rows, int header, const char* columns,
                                dt_stream** out);
/* ".bin"/".dts" paths get the binary format, "-" writes CSV to stdout,
   anything else CSV. */
DT_API dt_status dt_stream_save(const dt_stream* s, const char* path);
DT_API dt_status dt_stream_info(const dt_stream* s, int* is_rows, uint64_t* size, uint64_t* dim,
                                double* max_weight);
DT_API void dt_stream_free(dt_stream* s);

/* Stream generator for sweeps whose axis changes the stream (beta). */
DT_API dt_status dt_generator_zipf(uint64_t n, uint64_t universe, double skew, uint64_t seed,
                                   dt_generator** out);
DT_API void dt_generator_free(dt_generator* g);

/* ---- run configuration ---- */

DT_API dt_status dt_config_create(dt_config** out);
/* Keys: protocol, sites, eps, phi, beta, assignment, query_every,
   query_at_end, seed, repetitions, strict, sample_size, p4_copies, estimator
   ("drop-min" or "fixed-size"), threads.
   Keys starting with "meta." are echoed into report headers. */
DT_API dt_status dt_config_set(dt_config* c, const char* key, const char* value);
DT_API dt_status dt_config_validate(const dt_config* c);
DT_API void dt_config_free(dt_config* c);

/* ---- simulation ---- */

DT_API dt_status dt_run(const dt_config* c, const dt_stream* s, dt_report** out);
/* axis: "eps", "sites" or "beta". Exactly one of stream / generator. */
DT_API dt_status dt_sweep(const dt_config* c, const char* axis, const double* values, size_t count,
                          const dt_stream* stream, const dt_generator* generator,
                          dt_report** out);

DT_API dt_status dt_report_csv(const dt_report* r, char** out);
DT_API dt_status dt_report_json(const dt_report* r, char** out);
/* Number of rows: queries for a run, cells for a sweep. */
DT_API dt_status dt_report_rows(const dt_report* r, size_t* out);
/* name: n, recall, precision, err, err_w, within_eps, cov_err, total,
   total_estimate, msg, rounds, true_count, returned_count, sketch_rows. For
   sweeps the row's final query is used. */
DT_API dt_status dt_report_metric(const dt_report* r, size_t row, const char* name, double* out);
/* name: up_messages, up_units, broadcasts, msg, scalars, slots, rounds, or
   "kind:<message kind>". For sweeps row selects the cell; runs ignore it. */
DT_API dt_status dt_report_tally(const dt_report* r, size_t row, const char* name, uint64_t* out);
DT_API void dt_report_free(dt_report* r);

/* Exact heavy hitters (f_e >= phi W) of an element stream, as CSV. */
DT_API dt_status dt_oracle_csv(const dt_stream* s, double phi, char** out);

/* ---- sketches ---- */

DT_API dt_status dt_mg_create(uint64_t capacity, dt_mg** out);
DT_API dt_status dt_mg_update(dt_mg* mg, uint64_t element, double weight);
DT_API dt_status dt_mg_merge(dt_mg* into, const dt_mg* other);
DT_API dt_status dt_mg_estimate(const dt_mg* mg, uint64_t element, double* out);
DT_API dt_status dt_mg_size(const dt_mg* mg, uint64_t* out);
DT_API void dt_mg_free(dt_mg* mg);

DT_API dt_status dt_fd_create(uint64_t ell, uint64_t dim, dt_fd** out);
DT_API dt_status dt_fd_update(dt_fd* fd, const double* row, uint64_t dim);
DT_API dt_status dt_fd_rows(const dt_fd* fd, uint64_t* out);
/* Copies the sketch row-major into buf (capacity in doubles). */
DT_API dt_status dt_fd_matrix(const dt_fd* fd, double* buf, size_t capacity);
DT_API void dt_fd_free(dt_fd* fd);

#ifdef __cplusplus
}
#endif

#endif
