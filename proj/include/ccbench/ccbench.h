#ifndef CCBENCH_CCBENCH_H
#define CCBENCH_CCBENCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(CCB_BUILDING_LIBRARY)
#define CCB_API __attribute__((visibility("default")))
#else
#define CCB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ccb_status {
  CCB_OK = 0,
  CCB_ERR_INVALID_ARGUMENT = 1,
  CCB_ERR_UNKNOWN_SCHEME = 2,
  CCB_ERR_IO = 3,
  CCB_ERR_NO_DATA = 4,
  CCB_ERR_CONFIG = 5,
  CCB_ERR_INTERNAL = 6,
  /* The call produced a result, but some benchmark cells failed. */
  CCB_PARTIAL = 7
} ccb_status;

typedef struct ccb_scheme ccb_scheme;
typedef struct ccb_bundle ccb_bundle;

typedef enum ccb_event_kind {
  CCB_EVENT_ACK = 0,
  CCB_EVENT_DUPACK_LOSS = 1,
  CCB_EVENT_TIMEOUT_LOSS = 2,
  CCB_EVENT_SEND_OPPORTUNITY = 3,
  CCB_EVENT_TIMER_TICK = 4
} ccb_event_kind;

typedef struct ccb_event {
  int kind; /* ccb_event_kind */
  double now_s;
  double rtt_sample_s;
  int64_t bytes_acked;
  int64_t bytes_in_flight;
} ccb_event;

typedef struct ccb_decision {
  double cwnd_bytes;
  int has_pacing_rate;
  double pacing_rate_bps;
} ccb_decision;

/* Library version string, e.g. "1.0.0". */
CCB_API const char* ccb_version(void);

/* Message of the last failed call on this thread; "" if none. */
CCB_API const char* ccb_last_error(void);

/* Strings returned through char** outputs must be released with this. */
CCB_API void ccb_free_string(char* s);

/* Scores and link arithmetic. Rates in Mbps, delays in ms. */
CCB_API ccb_status ccb_power_score(double r_mbps, double d_ms, double alpha,
                                   double* out);
CCB_API ccb_status ccb_friendliness_score(double f_mbps, double r_mbps,
                                          double* out);
CCB_API ccb_status ccb_bdp_bytes(double bw_bps, double min_rtt_s, double* out);
CCB_API ccb_status ccb_serialization_time(int64_t size_bytes, double rate_bps,
                                          double* out_s);

/* Scheme roster. */
CCB_API size_t ccb_scheme_count(void);
CCB_API const char* ccb_scheme_name(size_t index);

/* A standalone congestion controller, driven event by event. */
CCB_API ccb_status ccb_scheme_create(const char* id, ccb_scheme** out);
CCB_API ccb_status ccb_scheme_on_event(ccb_scheme* scheme,
                                       const ccb_event* event,
                                       ccb_decision* out);
CCB_API void ccb_scheme_destroy(ccb_scheme* scheme);

/* Manifest JSON of the scenarios a run config would execute. */
CCB_API ccb_status ccb_list_scenarios(const char* run_config_json,
                                      char** out_manifest_json);

/* Runs a benchmark. On CCB_OK or CCB_PARTIAL `*out` holds a bundle. */
CCB_API ccb_status ccb_run(const char* run_config_json, ccb_bundle** out);
/* Runs a single-axis sweep. Same return contract as ccb_run. */
CCB_API ccb_status ccb_sweep(const char* sweep_config_json, ccb_bundle** out);

CCB_API ccb_status ccb_bundle_load(const char* dir, ccb_bundle** out);
CCB_API ccb_status ccb_bundle_write(const ccb_bundle* bundle, const char* dir);
CCB_API ccb_status ccb_bundle_rescore(ccb_bundle* bundle, double alpha);
CCB_API ccb_status ccb_bundle_results_csv(const ccb_bundle* bundle,
                                          char** out_csv);
CCB_API ccb_status ccb_bundle_report(const ccb_bundle* bundle,
                                     char** out_ranking_csv,
                                     char** out_series_csv);
/* JSON object {"ccbench1": [{"scheme":..,"winning_rate":..}], ...}. */
CCB_API ccb_status ccb_bundle_rankings(const ccb_bundle* bundle,
                                       char** out_json);
/* JSON object with version, config hash, timestamp and record counts. */
CCB_API ccb_status ccb_bundle_summary(const ccb_bundle* bundle,
                                      char** out_json);
CCB_API size_t ccb_bundle_score_count(const ccb_bundle* bundle);
CCB_API size_t ccb_bundle_failure_count(const ccb_bundle* bundle);
CCB_API void ccb_bundle_destroy(ccb_bundle* bundle);

#ifdef __cplusplus
}
#endif

#endif
