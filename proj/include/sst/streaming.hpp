// SPDX-License-Identifier: Apache-2.0
//
// Read/write policy engines and the session orchestrator: segments stream in,
// the encoder/adapter/decoder advance incrementally, a clock accounts for
// waiting and computation, and every READ/WRITE lands in the event log.

#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sst/decoder.hpp"
#include "sst/encoder.hpp"
#include "sst/model.hpp"

namespace sst {

enum class ClockMode { real, simulated };

// Simulated-mode charge rates: milliseconds per million multiply-accumulates,
// by operation kind ("extract", "encode", "adapt", "decode").
struct CostTable {
  std::map<std::string, double> ms_per_mega_mac;
};

// Every operation kind at the same rate; rate 0 is the ideal-latency mode
// where writes land exactly at the audio arrival time.
CostTable uniform_cost_table(double ms_per_mega_mac);

// Monotone session clock.  Simulated mode advances only through advance_to
// (audio arrival) and charge (computation); real mode reads the steady clock,
// floored at the audio arrival point.
class Clock {
 public:
  static Clock simulated(CostTable table);
  static Clock real();

  ClockMode mode() const { return mode_; }
  double now_ms() const;

  // Audio up to audio_ms has arrived; the clock can never be behind that.
  void advance_to(double audio_ms);

  // Computation charge.  Simulated mode requires a rate for the kind; real
  // mode ignores charges (wall time is observed directly).
  void charge(const std::string& kind, double mega_macs);

 private:
  Clock() = default;
  ClockMode mode_ = ClockMode::simulated;
  CostTable table_;
  double sim_now_ms_ = 0.0;
  double floor_ms_ = 0.0;
  std::chrono::steady_clock::time_point start_{};
};

struct Event {
  enum class Type { read, write };
  Type type;
  double t_wall_ms = 0.0;
  double audio_ms = 0.0;       // total audio read when the event fired
  int segment_index = 0;       // reads only, 1-based
  bool padded = false;         // reads only: final short segment zero-filled
  std::vector<int> tokens;     // writes only
  int words = 0;               // writes only: boundary tokens emitted
};

struct EventLog {
  std::vector<Event> events;
};

// Throws invalid-log unless: nonempty, first event is a READ, wall times
// nondecreasing, audio_ms strictly increasing across READs.
void validate_log(const EventLog& log);

enum class PolicyKind { wait_k_stride_n, hold_n };

struct PolicyConfig {
  PolicyKind kind = PolicyKind::wait_k_stride_n;
  int k = 1;                       // wait_k only
  int n = 1;                       // words per write / held suffix length
  double segment_ms = 1000.0;
  int max_tokens_per_write = 64;

  void validate() const;  // throws invalid-config
};

struct SessionResult {
  std::vector<int> tokens;
  EventLog log;
};

// Per-step hold-n trace for property tests: the full hypothesis considered
// and what was emitted from it.
struct HoldStep {
  std::vector<int> hypothesis;  // committed prefix + fresh continuation
  std::vector<int> emitted;
  int committed_before = 0;
};

// Reads k segments, then alternates n-word writes with reads; the write
// after the final segment runs until EOS or the token cap.  An EOS emitted
// earlier ends the session and skips the remaining reads.
SessionResult run_wait_k_stride_n(const Model& model,
                                  const std::vector<std::vector<float>>& segments,
                                  const PolicyConfig& cfg, Clock& clock);

// After each segment: greedy hypothesis continuation, discard the last n
// tokens of the full hypothesis, emit the remainder beyond the committed
// prefix, roll uncommitted rows out of the decoder cache.  The final segment
// emits the whole hypothesis.
SessionResult run_hold_n(const Model& model,
                         const std::vector<std::vector<float>>& segments,
                         const PolicyConfig& cfg, Clock& clock,
                         std::vector<HoldStep>* trace = nullptr);

}  // namespace sst
