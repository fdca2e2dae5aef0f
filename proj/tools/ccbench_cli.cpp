// ccbench: command-line front end over the C API.

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccbench/ccbench.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

struct StringDeleter {
  void operator()(char* s) const { ccb_free_string(s); }
};
using CString = std::unique_ptr<char, StringDeleter>;

struct BundleDeleter {
  void operator()(ccb_bundle* b) const { ccb_bundle_destroy(b); }
};
using Bundle = std::unique_ptr<ccb_bundle, BundleDeleter>;

int report_error(ccb_status s) {
  std::cerr << "ccbench: " << ccb_last_error() << "\n";
  return s == CCB_PARTIAL ? kExitPartial : kExitConfig;
}

struct GridFlags {
  std::vector<double> bw, min_rtt, qs, step_bw1, step_m;

  void add(CLI::App* cmd) {
    cmd->add_option("--bw", bw, "Bandwidth grid, Mbps")->delimiter(',');
    cmd->add_option("--min-rtt", min_rtt, "minRTT grid, ms")->delimiter(',');
    cmd->add_option("--qs", qs, "Buffer grid, multiples of BDP")
        ->delimiter(',');
    cmd->add_option("--step-bw1", step_bw1, "Step-scenario base rates, Mbps")
        ->delimiter(',');
    cmd->add_option("--step-m", step_m, "Step-scenario multipliers")
        ->delimiter(',');
  }

  nlohmann::json to_json() const {
    nlohmann::json g = nlohmann::json::object();
    if (!bw.empty()) g["bw_mbps"] = bw;
    if (!min_rtt.empty()) g["min_rtt_ms"] = min_rtt;
    if (!qs.empty()) g["qs_bdp"] = qs;
    if (!step_bw1.empty()) g["step_bw1_mbps"] = step_bw1;
    if (!step_m.empty()) g["step_m"] = step_m;
    return g;
  }
};

void print_ranking(const ccb_bundle* b) {
  char* ranking = nullptr;
  if (ccb_bundle_report(b, &ranking, nullptr) == CCB_OK) {
    std::cout << ranking;
    ccb_free_string(ranking);
  } else {
    std::cerr << "ccbench: " << ccb_last_error() << "\n";
  }
}

int finish(ccb_status status, const Bundle& bundle, const std::string& out) {
  if (!out.empty()) {
    const ccb_status ws = ccb_bundle_write(bundle.get(), out.c_str());
    if (ws != CCB_OK) return report_error(ws);
  }
  print_ranking(bundle.get());
  if (status == CCB_PARTIAL) {
    std::cerr << "ccbench: " << ccb_bundle_failure_count(bundle.get())
              << " interval(s) failed; see failures.csv\n";
    return kExitPartial;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Congestion-control benchmark over a simulated bottleneck"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ccb_version()));

  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  // list-scenarios
  std::string ls_benchmark = "ccbench1";
  std::string ls_manifest;
  GridFlags ls_grid;
  auto* ls = app.add_subcommand("list-scenarios",
                                "Print the scenario manifest as JSON");
  ls->add_option("--benchmark", ls_benchmark,
                 "ccbench1, ccbench1_flat, ccbench1_step or ccbench2");
  ls->add_option("--manifest", ls_manifest, "Pinned manifest to validate");
  ls_grid.add(ls);

  // run
  std::string run_benchmark = "ccbench1";
  std::vector<std::string> run_schemes;
  double run_alpha = 2.0;
  int run_parallel = hw;
  std::string run_out;
  std::string run_manifest;
  GridFlags run_grid;
  auto* run = app.add_subcommand("run", "Run a benchmark and write a bundle");
  run->add_option("--benchmark", run_benchmark,
                  "ccbench1, ccbench1_flat, ccbench1_step or ccbench2");
  run->add_option("--schemes", run_schemes, "Comma-separated scheme ids")
      ->delimiter(',');
  run->add_option("--alpha", run_alpha, "Power-score exponent");
  run->add_option("--parallel", run_parallel, "Worker threads");
  run->add_option("--out", run_out, "Bundle directory");
  run->add_option("--manifest", run_manifest, "Pinned scenario manifest");
  run_grid.add(run);

  // score
  std::string score_in;
  std::string score_out;
  double score_alpha = 0;
  auto* score = app.add_subcommand(
      "score", "Rescore a stored bundle, optionally with a new alpha");
  score->add_option("bundle", score_in, "Bundle directory")->required();
  score->add_option("--alpha", score_alpha, "Power-score exponent");
  score->add_option("--out", score_out,
                    "Destination directory (default: rewrite in place)");

  // rank
  std::string rank_in;
  bool rank_series = false;
  auto* rank = app.add_subcommand("rank", "Print the ranking of a bundle");
  rank->add_option("bundle", rank_in, "Bundle directory")->required();
  rank->add_flag("--series", rank_series, "Print score series instead");

  // sweep
  std::string sw_axis = "buffer_kb";
  double sw_bw = 48;
  double sw_rtt = 40;
  std::vector<double> sw_buffers;
  double sw_qs = 5;
  std::vector<double> sw_rtts;
  std::vector<std::string> sw_schemes;
  double sw_alpha = 2.0;
  int sw_parallel = hw;
  double sw_duration = 30;
  std::string sw_out;
  auto* sw = app.add_subcommand("sweep",
                                "Score-vs-parameter curves on a flat link");
  sw->add_option("--axis", sw_axis, "buffer_kb or min_rtt_ms")
      ->check(CLI::IsMember({"buffer_kb", "min_rtt_ms"}));
  sw->add_option("--bw", sw_bw, "Bandwidth, Mbps");
  sw->add_option("--min-rtt", sw_rtt, "minRTT for the buffer axis, ms");
  sw->add_option("--buffers-kb", sw_buffers, "Buffer sizes, KiB")
      ->delimiter(',');
  sw->add_option("--qs", sw_qs, "Buffer for the minRTT axis, x BDP");
  sw->add_option("--min-rtts", sw_rtts, "minRTT values, ms")->delimiter(',');
  sw->add_option("--schemes", sw_schemes, "Comma-separated scheme ids")
      ->delimiter(',');
  sw->add_option("--alpha", sw_alpha, "Power-score exponent");
  sw->add_option("--parallel", sw_parallel, "Worker threads");
  sw->add_option("--duration", sw_duration, "Run length, s");
  sw->add_option("--out", sw_out, "Bundle directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (*ls) {
    nlohmann::json cfg = {{"benchmark", ls_benchmark},
                          {"grid", ls_grid.to_json()}};
    if (!ls_manifest.empty()) {
      cfg["manifest"] = ls_manifest;
      cfg.erase("grid");
    }
    char* out = nullptr;
    const ccb_status s = ccb_list_scenarios(cfg.dump().c_str(), &out);
    if (s != CCB_OK) return report_error(s);
    CString guard(out);
    std::cout << out << "\n";
    return kExitOk;
  }

  if (*run) {
    nlohmann::json cfg = {{"benchmark", run_benchmark},
                          {"alpha", run_alpha},
                          {"parallel", run_parallel},
                          {"grid", run_grid.to_json()}};
    if (!run_schemes.empty()) cfg["schemes"] = run_schemes;
    if (!run_manifest.empty()) {
      cfg["manifest"] = run_manifest;
      if (cfg["grid"].empty()) cfg.erase("grid");
    }
    ccb_bundle* raw = nullptr;
    const ccb_status s = ccb_run(cfg.dump().c_str(), &raw);
    if (s != CCB_OK && s != CCB_PARTIAL) return report_error(s);
    return finish(s, Bundle(raw), run_out);
  }

  if (*score) {
    ccb_bundle* raw = nullptr;
    const ccb_status s = ccb_bundle_load(score_in.c_str(), &raw);
    if (s != CCB_OK && s != CCB_PARTIAL) return report_error(s);
    Bundle bundle(raw);
    if (score->count("--alpha")) {
      const ccb_status rs = ccb_bundle_rescore(bundle.get(), score_alpha);
      if (rs != CCB_OK) return report_error(rs);
    }
    return finish(s, bundle, score_out.empty() ? score_in : score_out);
  }

  if (*rank) {
    ccb_bundle* raw = nullptr;
    const ccb_status s = ccb_bundle_load(rank_in.c_str(), &raw);
    if (s != CCB_OK && s != CCB_PARTIAL) return report_error(s);
    Bundle bundle(raw);
    char* ranking = nullptr;
    char* series = nullptr;
    const ccb_status rs = ccb_bundle_report(bundle.get(), &ranking, &series);
    if (rs != CCB_OK) return report_error(rs);
    CString g1(ranking), g2(series);
    std::cout << (rank_series ? series : ranking);
    return s == CCB_PARTIAL ? kExitPartial : kExitOk;
  }

  if (*sw) {
    nlohmann::json cfg = {{"axis", sw_axis},     {"bw_mbps", sw_bw},
                          {"alpha", sw_alpha},   {"parallel", sw_parallel},
                          {"duration_s", sw_duration}};
    if (sw_axis == "buffer_kb") {
      cfg["min_rtt_ms"] = sw_rtt;
      if (!sw_buffers.empty()) cfg["buffers_kb"] = sw_buffers;
    } else {
      cfg["qs_bdp"] = sw_qs;
      if (!sw_rtts.empty()) cfg["min_rtts_ms"] = sw_rtts;
    }
    if (!sw_schemes.empty()) cfg["schemes"] = sw_schemes;
    ccb_bundle* raw = nullptr;
    const ccb_status s = ccb_sweep(cfg.dump().c_str(), &raw);
    if (s != CCB_OK && s != CCB_PARTIAL) return report_error(s);
    Bundle bundle(raw);
    if (!sw_out.empty()) {
      const ccb_status ws = ccb_bundle_write(bundle.get(), sw_out.c_str());
      if (ws != CCB_OK) return report_error(ws);
    }
    char* series = nullptr;
    const ccb_status rs = ccb_bundle_report(bundle.get(), nullptr, &series);
    if (rs != CCB_OK) return report_error(rs);
    CString guard(series);
    std::cout << series;
    return s == CCB_PARTIAL ? kExitPartial : kExitOk;
  }
  return kExitConfig;
}
