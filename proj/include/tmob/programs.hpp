#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "tmob/basic_mobile.hpp"
#include "tmob/codec.hpp"
#include "tmob/full_mobile.hpp"

// The pluggable brains: direction-choice and register-update callbacks for
// machines, plus the simulated rigid-robot programs.

namespace tmob::programs {

// Direction of the n-th move of the exploration spiral: runs of increasing
// length 1,2,3,... cycling through the three directions. Returns a 0-based
// index into the canonical direction order.
inline int spiral_direction(long long n) {
  long long t = static_cast<long long>((std::sqrt(8.0 * n + 1.0) - 1.0) / 2.0);
  while (t * (t + 1) / 2 <= n) ++t;
  while (t > 1 && (t - 1) * t / 2 > n) --t;
  return static_cast<int>((t - 1) % 3);
}

// Brute-force oracle for the spiral: materialize the run-length pattern.
inline std::vector<int> spiral_prefix_bruteforce(int count) {
  std::vector<int> out;
  int run = 1;
  while (static_cast<int>(out.size()) < count) {
    int dir = (run - 1) % 3;
    for (int i = 0; i < run && static_cast<int>(out.size()) < count; ++i)
      out.push_back(dir);
    ++run;
  }
  return out;
}

// A machine behavior at the decoded-register level: choose sees the stored
// real and the environment (in the observer's frame, machine excluded);
// update produces the next stored real. Both must be pure.
struct MobileProgram {
  std::function<std::optional<int>(double value, const std::vector<Vec>& env,
                                   const basic::RestFrame& f)>
      choose;
  std::function<double(double value, const std::vector<Vec>& env,
                       const basic::RestFrame& f)>
      update;
};

// Lower a register-level program onto the codec-offset callbacks the rule
// consumes. Integer-valued programs tolerate codec noise because the decoded
// value is rounded where the program declares an integer register.
inline basic::Callbacks to_callbacks(const MobileProgram& prog,
                                     const MachineParams& params,
                                     bool integer_register = false) {
  NumberCodec codec(params);
  basic::Callbacks cb;
  cb.choose = [prog, codec, integer_register](double offset,
                                              const std::vector<Vec>& env,
                                              const basic::RestFrame& f) {
    double v = codec.decode(offset);
    if (integer_register) v = std::round(v);
    return prog.choose(v, env, f);
  };
  cb.update = [prog, codec, integer_register](double offset,
                                              const std::vector<Vec>& env,
                                              const basic::RestFrame& f, int) {
    double v = codec.decode(offset);
    if (integer_register) v = std::round(v);
    return codec.encode(prog.update(v, env, f));
  };
  return cb;
}

// Plane exploration: one counter register, direction from the spiral.
inline MobileProgram exploration_program() {
  MobileProgram prog;
  prog.choose = [](double v, const std::vector<Vec>&, const basic::RestFrame&) {
    long long n = std::llround(v);
    if (n < 0) n = 0;
    return std::optional<int>(spiral_direction(n));
  };
  prog.update = [](double v, const std::vector<Vec>&, const basic::RestFrame&) {
    return v + 1.0;
  };
  return prog;
}

// --- m-dimensional exploration itinerary --------------------------------------

// One move of the m-dimensional exploration schedule: the planar spiral with,
// after each completed run, an orthogonal excursion of the run's length and
// its exact backtrack. Excursions cycle through the m-2 orthogonal axes and
// alternate which half-space they probe first. Deleting excursion and
// backtrack moves leaves exactly the planar spiral.
struct ItineraryMove {
  int dir = 0;  // direction-token index (0..2 in-plane, 3.. orthogonal pairs)
  enum class Tag { Spiral, Excursion, Backtrack } tag = Tag::Spiral;
};

inline ItineraryMove itinerary_move(long long n, int m) {
  if (m < 3) return {spiral_direction(n), ItineraryMove::Tag::Spiral};
  // run T occupies moves [3T(T-1)/2, 3T(T+1)/2): T spiral, T out, T back
  long long t = static_cast<long long>((std::sqrt(8.0 * (n / 3.0) + 1.0) - 1.0) / 2.0);
  while (3 * t * (t + 1) / 2 <= n) ++t;
  while (t > 1 && 3 * (t - 1) * t / 2 > n) --t;
  long long idx = n - 3 * t * (t - 1) / 2;
  int spiral_dir = static_cast<int>((t - 1) % 3);
  int axis = static_cast<int>((t - 1) % (m - 2));
  int up = 3 + 2 * axis, down = 4 + 2 * axis;
  bool odd = (t % 2) == 1;
  if (idx < t) return {spiral_dir, ItineraryMove::Tag::Spiral};
  if (idx < 2 * t)
    return {odd ? up : down, ItineraryMove::Tag::Excursion};
  return {odd ? down : up, ItineraryMove::Tag::Backtrack};
}

inline std::vector<ItineraryMove> itinerary_prefix_bruteforce(int count, int m) {
  std::vector<ItineraryMove> out;
  int run = 1;
  while (static_cast<int>(out.size()) < count) {
    int dir = (run - 1) % 3;
    for (int i = 0; i < run && static_cast<int>(out.size()) < count; ++i)
      out.push_back({dir, ItineraryMove::Tag::Spiral});
    if (m >= 3) {
      int axis = (run - 1) % (m - 2);
      int up = 3 + 2 * axis, down = 4 + 2 * axis;
      bool odd = (run % 2) == 1;
      for (int i = 0; i < run && static_cast<int>(out.size()) < count; ++i)
        out.push_back({odd ? up : down, ItineraryMove::Tag::Excursion});
      for (int i = 0; i < run && static_cast<int>(out.size()) < count; ++i)
        out.push_back({odd ? down : up, ItineraryMove::Tag::Backtrack});
    }
    ++run;
  }
  return out;
}

// --- machine-level programs ----------------------------------------------------

// Every component mirrors the single move counter; the Leader reads the
// itinerary off it. Works for any m >= 2 (m = 2 degenerates to the spiral).
inline full::FullProgram exploration_program_md(int m) {
  full::FullProgram fp;
  fp.choose = [m](const full::LayoutView&, const std::vector<double>& vals,
                  const std::vector<Vec>&, const MachineParams&)
      -> std::optional<int> {
    long long n = std::llround(vals[0]);
    if (n < 0) n = 0;
    return itinerary_move(n, m).dir;
  };
  fp.update = [](const full::LayoutView&, const std::vector<double>& vals,
                 int comp, const Vec&, const std::vector<Vec>&,
                 const MachineParams&) { return std::round(vals[comp]) + 1.0; };
  return fp;
}

// --- built-in simulated-robot programs ------------------------------------------

inline full::SimProgram sim_stay(int registers = 1) {
  full::SimProgram sp;
  sp.registers = registers;
  sp.step = [registers](const std::vector<Vec>& snap,
                        const std::vector<double>& regs) {
    int dim = snap.empty() ? 2 : snap[0].dim();
    return std::make_pair(Vec::zero(dim), regs);
  };
  return sp;
}

inline full::SimProgram sim_constant_walk(Vec step_vec, int registers = 1) {
  full::SimProgram sp;
  sp.registers = registers;
  sp.step = [step_vec](const std::vector<Vec>&, const std::vector<double>& regs) {
    return std::make_pair(step_vec, regs);
  };
  return sp;
}

// Never moves; register 0 accumulates `increment` per step.
inline full::SimProgram sim_register_counter(double increment,
                                             int registers = 1) {
  full::SimProgram sp;
  sp.registers = registers;
  sp.step = [increment](const std::vector<Vec>& snap,
                        const std::vector<double>& regs) {
    int dim = snap.empty() ? 2 : snap[0].dim();
    std::vector<double> out = regs;
    if (!out.empty()) out[0] += increment;
    return std::make_pair(Vec::zero(dim), out);
  };
  return sp;
}

// Relative hops from a script, indexed by register 0; stays once exhausted.
inline full::SimProgram sim_scripted_hops(std::vector<Vec> hops,
                                          int registers = 1) {
  full::SimProgram sp;
  sp.registers = registers;
  sp.step = [hops](const std::vector<Vec>& snap,
                   const std::vector<double>& regs) {
    int dim = snap.empty() ? 2 : snap[0].dim();
    long long idx = regs.empty() ? 0 : std::llround(regs[0]);
    std::vector<double> out = regs;
    Vec rel = Vec::zero(dim);
    if (idx >= 0 && idx < static_cast<long long>(hops.size())) {
      rel = hops[idx];
      if (!out.empty()) out[0] = static_cast<double>(idx + 1);
    }
    return std::make_pair(rel, out);
  };
  return sp;
}

}  // namespace tmob::programs
