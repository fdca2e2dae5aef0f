#include <algorithm>

#include "ccbench/schemes.hpp"

namespace ccb {

const std::vector<std::string>& roster() {
  static const std::vector<std::string> ids = {
      "newreno", "cubic", "vegas", "ledbat", "bbr_lite", "copa_lite",
      "westwood_like"};
  return ids;
}

bool is_known_scheme(std::string_view id) {
  const auto& ids = roster();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

std::unique_ptr<CongestionControl> make_scheme(std::string_view id) {
  if (id == "newreno") return std::make_unique<NewReno>();
  if (id == "cubic") return std::make_unique<Cubic>();
  if (id == "vegas") return std::make_unique<Vegas>();
  if (id == "ledbat") return std::make_unique<Ledbat>();
  if (id == "bbr_lite") return std::make_unique<BbrLite>();
  if (id == "copa_lite") return std::make_unique<CopaLite>();
  if (id == "westwood_like") return std::make_unique<WestwoodLike>();
  throw Error(ErrorCode::kUnknownScheme,
              "unknown scheme '" + std::string(id) + "'");
}

bool RoundTracker::on_ack(Bytes bytes_acked, Bytes in_flight) {
  delivered_ += bytes_acked;
  if (delivered_ < round_end_) return false;
  round_end_ = delivered_ + std::max<Bytes>(in_flight, kMss);
  ++rounds_;
  return true;
}

}  // namespace ccb
