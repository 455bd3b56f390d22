#pragma once

// Line format, one instruction per line, opcode then duration (us):
//
//   # tzclock-sequence v1
//   ARRAY <n_sites>
//   PULSE   <dur> <angle> <drive_phase>
//   SHIFT   <dur> <site>:<dx_nm> ...
//   WAIT    <dur>
//   FLIP    <dur> <composite|ideal> <pulse_us> <shift_us> <pad_us> <half_wave_nm> <site>,<site>,...
//   MEASURE 0 <basis letters, one per site>
//
// Numbers are written with %.17g so parse(serialize(s)) == s exactly.
// Blank lines and lines starting with '#' after the header are ignored.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tzclock/errors.hpp"
#include "tzclock/sequence.hpp"

namespace tzclock {

inline constexpr const char* sequence_format_header = "# tzclock-sequence v1";

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty())
    throw InvalidArgument("line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

inline int parse_int(const std::string& s, int line) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end)
    throw InvalidArgument("line " + std::to_string(line) + ": bad integer '" + s + "'");
  return v;
}

}  // namespace detail

inline std::string serialize(const PulseSequence& seq) {
  using detail::fmt17;
  std::ostringstream os;
  os << sequence_format_header << '\n' << "ARRAY " << seq.array_size() << '\n';
  for (const auto& ins : seq.instructions()) {
    if (const auto* g = std::get_if<GlobalPulse>(&ins)) {
      os << "PULSE " << fmt17(g->duration_us) << ' ' << fmt17(g->angle) << ' ' << fmt17(g->drive_phase);
    } else if (const auto* s = std::get_if<LocalShift>(&ins)) {
      os << "SHIFT " << fmt17(s->shift_time_us);
      for (const auto& [site, dx] : s->shift_nm) os << ' ' << site << ':' << fmt17(dx);
    } else if (const auto* w = std::get_if<Wait>(&ins)) {
      os << "WAIT " << fmt17(w->duration_us);
    } else if (const auto* f = std::get_if<LocalPiFlip>(&ins)) {
      os << "FLIP " << fmt17(f->duration_us()) << ' '
         << (f->mode == FlipMode::ideal ? "ideal" : "composite") << ' ' << fmt17(f->pulse_us) << ' '
         << fmt17(f->shift_time_us) << ' ' << fmt17(f->pad_us) << ' ' << fmt17(f->half_wave_nm) << ' ';
      for (std::size_t i = 0; i < f->sites.size(); ++i) os << (i ? "," : "") << f->sites[i];
      if (f->sites.empty()) os << '-';
    } else if (const auto* m = std::get_if<Measure>(&ins)) {
      os << "MEASURE 0 ";
      for (Basis b : m->basis) os << to_char(b);
    }
    os << '\n';
  }
  return os.str();
}

inline PulseSequence parse_sequence(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) -> InvalidArgument {
    return InvalidArgument("line " + std::to_string(line_no) + ": " + msg);
  };

  if (!std::getline(is, line) || line != sequence_format_header)
    throw InvalidArgument("sequence text must start with '" + std::string(sequence_format_header) + "'");
  ++line_no;

  std::optional<PulseSequence> seq;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string& op = tok[0];

    if (op == "ARRAY") {
      if (seq) throw fail("duplicate ARRAY line");
      if (tok.size() != 2) throw fail("ARRAY takes one value");
      seq.emplace(detail::parse_int(tok[1], line_no));
      continue;
    }
    if (!seq) throw fail("instruction before ARRAY");
    if (tok.size() < 2) throw fail("missing duration");
    const double dur = detail::parse_double(tok[1], line_no);

    if (op == "PULSE") {
      if (tok.size() != 4) throw fail("PULSE takes duration, angle, phase");
      seq->append(GlobalPulse{detail::parse_double(tok[2], line_no),
                              detail::parse_double(tok[3], line_no), dur});
    } else if (op == "SHIFT") {
      LocalShift s;
      s.shift_time_us = dur;
      for (std::size_t i = 2; i < tok.size(); ++i) {
        const auto colon = tok[i].find(':');
        if (colon == std::string::npos) throw fail("SHIFT entries are site:dx");
        const int site = detail::parse_int(tok[i].substr(0, colon), line_no);
        if (!s.shift_nm.emplace(site, detail::parse_double(tok[i].substr(colon + 1), line_no)).second)
          throw fail("site listed twice in SHIFT");
      }
      seq->append(std::move(s));
    } else if (op == "WAIT") {
      if (tok.size() != 2) throw fail("WAIT takes only a duration");
      seq->append(Wait{dur});
    } else if (op == "FLIP") {
      if (tok.size() != 8) throw fail("FLIP takes duration, mode, pulse, shift, pad, half-wave, sites");
      LocalPiFlip f;
      if (tok[2] == "ideal") f.mode = FlipMode::ideal;
      else if (tok[2] == "composite") f.mode = FlipMode::composite;
      else throw fail("unknown flip mode '" + tok[2] + "'");
      f.pulse_us = detail::parse_double(tok[3], line_no);
      f.shift_time_us = detail::parse_double(tok[4], line_no);
      f.pad_us = detail::parse_double(tok[5], line_no);
      f.half_wave_nm = detail::parse_double(tok[6], line_no);
      if (tok[7] != "-") {
        std::istringstream ss(tok[7]);
        for (std::string item; std::getline(ss, item, ',');) f.sites.push_back(detail::parse_int(item, line_no));
      }
      if (!std::is_sorted(f.sites.begin(), f.sites.end()) ||
          std::adjacent_find(f.sites.begin(), f.sites.end()) != f.sites.end())
        throw fail("FLIP sites must be sorted and unique");
      if (std::abs(f.duration_us() - dur) > 1e-9 * std::max(1.0, dur))
        throw fail("FLIP duration does not match its parameters");
      seq->append(std::move(f));
    } else if (op == "MEASURE") {
      if (tok.size() != 3) throw fail("MEASURE takes 0 and one basis letter per site");
      if (dur != 0.0) throw fail("MEASURE duration must be 0");
      Measure m;
      for (char c : tok[2]) {
        if (c == 'X') m.basis.push_back(Basis::x);
        else if (c == 'Y') m.basis.push_back(Basis::y);
        else if (c == 'Z') m.basis.push_back(Basis::z);
        else throw fail(std::string("unknown basis '") + c + "'");
      }
      if (static_cast<int>(m.basis.size()) != seq->array_size()) throw fail("MEASURE must list every site");
      seq->append(std::move(m));
    } else {
      throw fail("unknown opcode '" + op + "'");
    }
  }
  if (!seq) throw InvalidArgument("sequence text has no ARRAY line");
  return std::move(*seq);
}

}  // namespace tzclock
