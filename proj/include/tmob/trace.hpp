#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmob/geom.hpp"

namespace tmob {

enum class EventKind { Look, Compute, MoveEnd };

struct TraceEvent {
  uint64_t t = 0;
  int robot = -1;
  EventKind kind = EventKind::Look;
  Vec pos;                    // robot position (look), destination (compute),
                              // end position (move_end); global coordinates
  bool interrupted = false;   // move_end only
};

// Append-only event log. Per-robot order is Look -> Compute -> MoveEnd
// repeating; the engine enforces it when appending.
struct Trace {
  std::vector<TraceEvent> events;

  uint64_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
  void append(TraceEvent e) { events.push_back(std::move(e)); }
};

namespace detail {
inline void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}
}  // namespace detail

inline const char* kind_name(EventKind k) {
  switch (k) {
    case EventKind::Look: return "look";
    case EventKind::Compute: return "compute";
    case EventKind::MoveEnd: return "move_end";
  }
  return "?";
}

// One JSON object per line. Positions use 17 significant digits so a
// round-trip through text is exact for IEEE-754 doubles.
inline std::string trace_event_to_jsonl(const TraceEvent& e) {
  std::string out;
  out += "{\"t\":" + std::to_string(e.t);
  out += ",\"robot\":" + std::to_string(e.robot);
  out += ",\"kind\":\"";
  out += kind_name(e.kind);
  out += "\",\"pos\":[";
  for (int i = 0; i < e.pos.dim(); ++i) {
    if (i) out += ',';
    detail::append_double(out, e.pos[i]);
  }
  out += "]";
  if (e.kind == EventKind::MoveEnd) {
    out += ",\"interrupted\":";
    out += e.interrupted ? "true" : "false";
  }
  out += "}";
  return out;
}

inline std::string trace_to_jsonl(const Trace& tr) {
  std::string out;
  for (const auto& e : tr.events) {
    out += trace_event_to_jsonl(e);
    out += '\n';
  }
  return out;
}

}  // namespace tmob
