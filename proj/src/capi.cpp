#include "ccbench/ccbench.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "ccbench/harness.hpp"
#include "ccbench/netsim.hpp"
#include "ccbench/scenarios.hpp"
#include "ccbench/scoring.hpp"

struct ccb_scheme {
  std::unique_ptr<ccb::CongestionControl> impl;
};

struct ccb_bundle {
  ccb::ResultsBundle impl;
};

namespace {

thread_local std::string g_last_error;

ccb_status fail(ccb_status code, std::string msg) {
  g_last_error = std::move(msg);
  return code;
}

ccb_status map_code(ccb::ErrorCode c) {
  switch (c) {
    case ccb::ErrorCode::kInvalidArgument:
      return CCB_ERR_INVALID_ARGUMENT;
    case ccb::ErrorCode::kUnknownScheme:
      return CCB_ERR_UNKNOWN_SCHEME;
    case ccb::ErrorCode::kIo:
      return CCB_ERR_IO;
    case ccb::ErrorCode::kNoData:
      return CCB_ERR_NO_DATA;
    case ccb::ErrorCode::kConfig:
      return CCB_ERR_CONFIG;
  }
  return CCB_ERR_INTERNAL;
}

template <typename F>
ccb_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const ccb::Error& e) {
    return fail(map_code(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(CCB_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CCB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CCB_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

nlohmann::json parse_config(const char* text) {
  if (!text) throw ccb::invalid_argument("config json is null");
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ccb::Error(ccb::ErrorCode::kConfig,
                     std::string("config is not valid JSON: ") + e.what());
  }
}

ccb_status finish_bundle(ccb::ResultsBundle b, ccb_bundle** out) {
  const bool partial = b.partial();
  *out = new ccb_bundle{std::move(b)};
  return partial ? CCB_PARTIAL : CCB_OK;
}

}  // namespace

extern "C" {

const char* ccb_version(void) { return ccb::kToolVersion.data(); }

const char* ccb_last_error(void) { return g_last_error.c_str(); }

void ccb_free_string(char* s) { std::free(s); }

ccb_status ccb_power_score(double r_mbps, double d_ms, double alpha,
                           double* out) {
  if (!out) return fail(CCB_ERR_INVALID_ARGUMENT, "out is null");
  return guarded([&] {
    *out = ccb::power_score(r_mbps, d_ms, alpha);
    return CCB_OK;
  });
}

ccb_status ccb_friendliness_score(double f_mbps, double r_mbps, double* out) {
  if (!out) return fail(CCB_ERR_INVALID_ARGUMENT, "out is null");
  return guarded([&] {
    *out = ccb::friendliness_score(f_mbps, r_mbps);
    return CCB_OK;
  });
}

ccb_status ccb_bdp_bytes(double bw_bps, double min_rtt_s, double* out) {
  if (!out) return fail(CCB_ERR_INVALID_ARGUMENT, "out is null");
  return guarded([&] {
    *out = ccb::bdp_bytes(bw_bps, min_rtt_s);
    return CCB_OK;
  });
}

ccb_status ccb_serialization_time(int64_t size_bytes, double rate_bps,
                                  double* out_s) {
  if (!out_s) return fail(CCB_ERR_INVALID_ARGUMENT, "out is null");
  return guarded([&] {
    *out_s = ccb::serialization_time(size_bytes, rate_bps);
    return CCB_OK;
  });
}

size_t ccb_scheme_count(void) { return ccb::roster().size(); }

const char* ccb_scheme_name(size_t index) {
  const auto& r = ccb::roster();
  return index < r.size() ? r[index].c_str() : nullptr;
}

ccb_status ccb_scheme_create(const char* id, ccb_scheme** out) {
  if (!id || !out) return fail(CCB_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new ccb_scheme{ccb::make_scheme(id)};
    return CCB_OK;
  });
}

ccb_status ccb_scheme_on_event(ccb_scheme* scheme, const ccb_event* event,
                               ccb_decision* out) {
  if (!scheme || !event || !out)
    return fail(CCB_ERR_INVALID_ARGUMENT, "null argument");
  if (event->kind < CCB_EVENT_ACK || event->kind > CCB_EVENT_TIMER_TICK)
    return fail(CCB_ERR_INVALID_ARGUMENT, "unknown event kind");
  return guarded([&] {
    ccb::CcEvent ev;
    ev.kind = static_cast<ccb::CcEventKind>(event->kind);
    ev.now = event->now_s;
    ev.rtt_sample = event->rtt_sample_s;
    ev.bytes_acked = event->bytes_acked;
    ev.bytes_in_flight = event->bytes_in_flight;
    const ccb::CcDecision d = scheme->impl->on_event(ev);
    out->cwnd_bytes = d.cwnd;
    out->has_pacing_rate = d.pacing_rate.has_value() ? 1 : 0;
    out->pacing_rate_bps = d.pacing_rate.value_or(0.0);
    return CCB_OK;
  });
}

void ccb_scheme_destroy(ccb_scheme* scheme) { delete scheme; }

ccb_status ccb_list_scenarios(const char* run_config_json,
                              char** out_manifest_json) {
  if (!out_manifest_json) return fail(CCB_ERR_INVALID_ARGUMENT, "out is null");
  *out_manifest_json = nullptr;
  return guarded([&] {
    const auto cfg = ccb::RunConfig::from_json(parse_config(run_config_json));
    *out_manifest_json =
        dup_string(ccb::manifest_to_json(ccb::plan(cfg)).dump(2));
    return CCB_OK;
  });
}

ccb_status ccb_run(const char* run_config_json, ccb_bundle** out) {
  if (!out) return fail(CCB_ERR_INVALID_ARGUMENT, "out is null");
  *out = nullptr;
  return guarded([&] {
    const auto cfg = ccb::RunConfig::from_json(parse_config(run_config_json));
    return finish_bundle(ccb::run(cfg), out);
  });
}

ccb_status ccb_sweep(const char* sweep_config_json, ccb_bundle** out) {
  if (!out) return fail(CCB_ERR_INVALID_ARGUMENT, "out is null");
  *out = nullptr;
  return guarded([&] {
    const auto cfg =
        ccb::SweepConfig::from_json(parse_config(sweep_config_json));
    return finish_bundle(ccb::sweep(cfg), out);
  });
}

ccb_status ccb_bundle_load(const char* dir, ccb_bundle** out) {
  if (!dir || !out) return fail(CCB_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { return finish_bundle(ccb::load_bundle(dir), out); });
}

ccb_status ccb_bundle_write(const ccb_bundle* bundle, const char* dir) {
  if (!bundle || !dir) return fail(CCB_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    ccb::write_bundle(bundle->impl, dir);
    return CCB_OK;
  });
}

ccb_status ccb_bundle_rescore(ccb_bundle* bundle, double alpha) {
  if (!bundle) return fail(CCB_ERR_INVALID_ARGUMENT, "bundle is null");
  return guarded([&] {
    ccb::rescore(bundle->impl, alpha);
    return CCB_OK;
  });
}

ccb_status ccb_bundle_results_csv(const ccb_bundle* bundle, char** out_csv) {
  if (!bundle || !out_csv)
    return fail(CCB_ERR_INVALID_ARGUMENT, "null argument");
  *out_csv = nullptr;
  return guarded([&] {
    *out_csv = dup_string(ccb::results_csv(bundle->impl));
    return CCB_OK;
  });
}

ccb_status ccb_bundle_report(const ccb_bundle* bundle, char** out_ranking_csv,
                             char** out_series_csv) {
  if (!bundle) return fail(CCB_ERR_INVALID_ARGUMENT, "bundle is null");
  if (out_ranking_csv) *out_ranking_csv = nullptr;
  if (out_series_csv) *out_series_csv = nullptr;
  return guarded([&] {
    const ccb::Report r = ccb::report(bundle->impl);
    char* ranking = out_ranking_csv ? dup_string(r.ranking_csv) : nullptr;
    try {
      if (out_series_csv) *out_series_csv = dup_string(r.series_csv);
    } catch (...) {
      std::free(ranking);
      throw;
    }
    if (out_ranking_csv) *out_ranking_csv = ranking;
    return CCB_OK;
  });
}

ccb_status ccb_bundle_rankings(const ccb_bundle* bundle, char** out_json) {
  if (!bundle || !out_json)
    return fail(CCB_ERR_INVALID_ARGUMENT, "null argument");
  *out_json = nullptr;
  return guarded([&] {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [group, ranking] : bundle->impl.rankings) {
      auto& rows = j[group] = nlohmann::json::array();
      for (const auto& e : ranking)
        rows.push_back({{"scheme", e.scheme}, {"winning_rate", e.winning_rate}});
    }
    *out_json = dup_string(j.dump());
    return CCB_OK;
  });
}

ccb_status ccb_bundle_summary(const ccb_bundle* bundle, char** out_json) {
  if (!bundle || !out_json)
    return fail(CCB_ERR_INVALID_ARGUMENT, "null argument");
  *out_json = nullptr;
  return guarded([&] {
    const auto& b = bundle->impl;
    nlohmann::json j = {{"tool_version", b.tool_version},
                        {"config_hash", b.config_hash},
                        {"timestamp", b.timestamp},
                        {"alpha", b.alpha},
                        {"schemes", b.schemes},
                        {"scenarios", b.scenarios.size()},
                        {"score_records", b.scores.size()},
                        {"failures", b.failures.size()}};
    *out_json = dup_string(j.dump());
    return CCB_OK;
  });
}

size_t ccb_bundle_score_count(const ccb_bundle* bundle) {
  return bundle ? bundle->impl.scores.size() : 0;
}

size_t ccb_bundle_failure_count(const ccb_bundle* bundle) {
  return bundle ? bundle->impl.failures.size() : 0;
}

void ccb_bundle_destroy(ccb_bundle* bundle) { delete bundle; }

}  // extern "C"
