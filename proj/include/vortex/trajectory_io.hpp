#pragma once

// Plain-text serialization of event trajectories (format "pvtraj 1").
//
// The format is line oriented and human readable:
//
//   pvtraj 1
//   forced <0|1>
//   domain <plane|disk>
//   events <E>
//   event <burst|merge> <t> <re> <im> <intensity> <fit_residual>
//         <n_before> <i...> <n_after> <i...>          (one line per event)
//   segments <S>
//   segment <k>
//   intensities <n> <x_1> ... <x_n>
//   tolerance <tol>
//   nodes <m>
//   <t> <j> <re> <im> <vre> <vim>                     (m * n records)
//   ...
//   end
//
// Every floating-point value is written with 17 significant digits, so a
// write/read cycle reproduces the trajectory bit for bit.  `forced` marks
// trajectories built under a nonzero external field; their free-space
// invariants and weak residuals are not expected to be conserved, and
// verification downgrades accordingly.  `domain` selects the invariant set
// used during verification (free plane vs unit disk).

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortex/dynamics.hpp"
#include "vortex/trajectory.hpp"

namespace vortex {

namespace detail {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string{buf};
}

/// Structural checks shared by the writer (before emitting) and the reader
/// (after parsing): segment/event counts, matching array sizes, monotone
/// node times.  Throws std::invalid_argument describing the defect.
inline void check_trajectory_structure(const EventTrajectory& tr) {
  if (tr.segments.empty())
    throw std::invalid_argument("trajectory: no segments");
  if (tr.segments.size() != tr.events.size() + 1)
    throw std::invalid_argument("trajectory: segments must equal events + 1");
  for (std::size_t k = 0; k < tr.segments.size(); ++k) {
    const Trajectory& s = tr.segments[k];
    const std::string where = "trajectory: segment " + std::to_string(k);
    if (s.empty()) throw std::invalid_argument(where + " has no nodes");
    if (s.positions.size() != s.nodes() || s.velocities.size() != s.nodes())
      throw std::invalid_argument(where + " node array size mismatch");
    for (std::size_t i = 0; i < s.nodes(); ++i) {
      if (s.positions[i].size() != s.size() || s.velocities[i].size() != s.size())
        throw std::invalid_argument(where + " vortex count mismatch at a node");
      if (i + 1 < s.nodes() && !(s.times[i + 1] > s.times[i]))
        throw std::invalid_argument(where + " node times not ascending");
    }
  }
  for (std::size_t k = 0; k < tr.events.size(); ++k) {
    const Event& ev = tr.events[k];
    const std::string where = "trajectory: event " + std::to_string(k);
    const Trajectory& pre = tr.segments[k];
    const Trajectory& post = tr.segments[k + 1];
    if (ev.before.empty() || ev.after.empty())
      throw std::invalid_argument(where + " has an empty participant list");
    for (std::size_t j : ev.before)
      if (j >= pre.size())
        throw std::invalid_argument(where + " references a missing vortex (before)");
    for (std::size_t j : ev.after)
      if (j >= post.size())
        throw std::invalid_argument(where + " references a missing vortex (after)");
  }
}

/// Cursor over the lines of a stream, tracking the line number for errors.
struct LineReader {
  std::istream& is;
  int line_no = 0;

  explicit LineReader(std::istream& s) : is(s) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error("pvtraj: " + msg + " (line " +
                             std::to_string(line_no) + ")");
  }

  /// Next non-empty line, or fail with the given context.
  std::string next(const std::string& context) {
    std::string line;
    while (std::getline(is, line)) {
      ++line_no;
      std::size_t a = line.find_first_not_of(" \t\r");
      if (a == std::string::npos) continue;  // blank
      std::size_t b = line.find_last_not_of(" \t\r");
      return line.substr(a, b - a + 1);
    }
    ++line_no;
    fail("unexpected end of file, expected " + context);
  }
};

inline double parse_double(LineReader& r, std::istringstream& in,
                           const std::string& what) {
  double x = 0.0;
  if (!(in >> x)) r.fail("cannot read " + what);
  return x;
}

inline std::size_t parse_count(LineReader& r, std::istringstream& in,
                               const std::string& what, std::size_t cap) {
  long long n = -1;
  if (!(in >> n) || n < 0) r.fail("cannot read " + what);
  if (static_cast<unsigned long long>(n) > cap) r.fail(what + " is implausibly large");
  return static_cast<std::size_t>(n);
}

inline void expect_word(LineReader& r, std::istringstream& in,
                        const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word)
    r.fail("expected '" + word + "', got '" + got + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

inline void write_pvtraj(std::ostream& os, const EventTrajectory& tr,
                         bool forced = false, Domain domain = Domain::plane) {
  detail::check_trajectory_structure(tr);
  using detail::fmt17;
  os << "pvtraj 1\n";
  os << "forced " << (forced ? 1 : 0) << "\n";
  os << "domain " << (domain == Domain::disk ? "disk" : "plane") << "\n";
  os << "events " << tr.events.size() << "\n";
  for (const Event& ev : tr.events) {
    os << "event " << to_string(ev.kind) << ' ' << fmt17(ev.t) << ' '
       << fmt17(ev.position.real()) << ' ' << fmt17(ev.position.imag()) << ' '
       << fmt17(ev.intensity) << ' ' << fmt17(ev.fit_residual) << ' '
       << ev.before.size();
    for (std::size_t j : ev.before) os << ' ' << j;
    os << ' ' << ev.after.size();
    for (std::size_t j : ev.after) os << ' ' << j;
    os << "\n";
  }
  os << "segments " << tr.segments.size() << "\n";
  for (std::size_t k = 0; k < tr.segments.size(); ++k) {
    const Trajectory& s = tr.segments[k];
    os << "segment " << k << "\n";
    os << "intensities " << s.size();
    for (double xi : s.intensities) os << ' ' << fmt17(xi);
    os << "\n";
    os << "tolerance " << fmt17(s.tolerance) << "\n";
    os << "nodes " << s.nodes() << "\n";
    for (std::size_t i = 0; i < s.nodes(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j)
        os << fmt17(s.times[i]) << ' ' << j << ' '
           << fmt17(s.positions[i][j].real()) << ' '
           << fmt17(s.positions[i][j].imag()) << ' '
           << fmt17(s.velocities[i][j].real()) << ' '
           << fmt17(s.velocities[i][j].imag()) << "\n";
  }
  os << "end\n";
  if (!os) throw std::runtime_error("pvtraj: write failed");
}

inline void write_pvtraj_file(const std::string& path, const EventTrajectory& tr,
                              bool forced = false, Domain domain = Domain::plane) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("pvtraj: cannot open '" + path + "' for writing");
  write_pvtraj(os, tr, forced, domain);
  os.flush();
  if (!os) throw std::runtime_error("pvtraj: write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Reading
// ---------------------------------------------------------------------------

struct PvtrajFile {
  EventTrajectory trajectory;
  bool forced = false;
  Domain domain = Domain::plane;
};

inline PvtrajFile read_pvtraj(std::istream& is) {
  constexpr std::size_t kMaxCount = 50'000'000;
  detail::LineReader r(is);
  PvtrajFile out;

  {
    std::istringstream in(r.next("header"));
    detail::expect_word(r, in, "pvtraj");
    long long version = 0;
    if (!(in >> version)) r.fail("cannot read format version");
    if (version != 1)
      r.fail("unsupported format version " + std::to_string(version));
  }
  {
    std::istringstream in(r.next("forced flag"));
    detail::expect_word(r, in, "forced");
    long long flag = 0;
    if (!(in >> flag) || (flag != 0 && flag != 1)) r.fail("forced flag must be 0 or 1");
    out.forced = flag == 1;
  }
  {
    std::istringstream in(r.next("domain"));
    detail::expect_word(r, in, "domain");
    std::string name;
    if (!(in >> name) || (name != "plane" && name != "disk"))
      r.fail("domain must be 'plane' or 'disk'");
    out.domain = name == "disk" ? Domain::disk : Domain::plane;
  }

  std::size_t n_events = 0;
  {
    std::istringstream in(r.next("event count"));
    detail::expect_word(r, in, "events");
    n_events = detail::parse_count(r, in, "event count", kMaxCount);
  }
  out.trajectory.events.reserve(n_events);
  for (std::size_t e = 0; e < n_events; ++e) {
    std::istringstream in(r.next("event record"));
    detail::expect_word(r, in, "event");
    Event ev;
    std::string kind;
    if (!(in >> kind)) r.fail("cannot read event kind");
    if (kind == "burst")
      ev.kind = Event::Kind::burst;
    else if (kind == "merge")
      ev.kind = Event::Kind::merge;
    else
      r.fail("unknown event kind '" + kind + "'");
    ev.t = detail::parse_double(r, in, "event time");
    const double re = detail::parse_double(r, in, "event position");
    const double im = detail::parse_double(r, in, "event position");
    ev.position = cplx{re, im};
    ev.intensity = detail::parse_double(r, in, "event intensity");
    ev.fit_residual = detail::parse_double(r, in, "event fit residual");
    const std::size_t nb = detail::parse_count(r, in, "before count", kMaxCount);
    ev.before.resize(nb);
    for (std::size_t i = 0; i < nb; ++i)
      ev.before[i] = detail::parse_count(r, in, "before index", kMaxCount);
    const std::size_t na = detail::parse_count(r, in, "after count", kMaxCount);
    ev.after.resize(na);
    for (std::size_t i = 0; i < na; ++i)
      ev.after[i] = detail::parse_count(r, in, "after index", kMaxCount);
    out.trajectory.events.push_back(std::move(ev));
  }

  std::size_t n_segments = 0;
  {
    std::istringstream in(r.next("segment count"));
    detail::expect_word(r, in, "segments");
    n_segments = detail::parse_count(r, in, "segment count", kMaxCount);
  }
  if (n_segments != n_events + 1)
    r.fail("segment count must equal event count + 1");
  out.trajectory.segments.reserve(n_segments);
  for (std::size_t k = 0; k < n_segments; ++k) {
    {
      std::istringstream in(r.next("segment marker"));
      detail::expect_word(r, in, "segment");
      const std::size_t idx = detail::parse_count(r, in, "segment index", kMaxCount);
      if (idx != k) r.fail("segments out of order");
    }
    Trajectory seg;
    std::size_t n_vortices = 0;
    {
      std::istringstream in(r.next("intensities"));
      detail::expect_word(r, in, "intensities");
      n_vortices = detail::parse_count(r, in, "vortex count", kMaxCount);
      seg.intensities.resize(n_vortices);
      for (std::size_t j = 0; j < n_vortices; ++j)
        seg.intensities[j] = detail::parse_double(r, in, "intensity");
    }
    {
      std::istringstream in(r.next("tolerance"));
      detail::expect_word(r, in, "tolerance");
      seg.tolerance = detail::parse_double(r, in, "tolerance");
    }
    std::size_t n_nodes = 0;
    {
      std::istringstream in(r.next("node count"));
      detail::expect_word(r, in, "nodes");
      n_nodes = detail::parse_count(r, in, "node count", kMaxCount);
      if (n_nodes == 0) r.fail("segment must have at least one node");
      if (n_vortices != 0 && n_nodes > kMaxCount / std::max<std::size_t>(n_vortices, 1))
        r.fail("record count is implausibly large");
    }
    seg.times.reserve(n_nodes);
    seg.positions.reserve(n_nodes);
    seg.velocities.reserve(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
      std::vector<cplx> z(n_vortices), v(n_vortices);
      double t_node = 0.0;
      for (std::size_t j = 0; j < n_vortices; ++j) {
        std::istringstream in(r.next("node record"));
        const double t = detail::parse_double(r, in, "node time");
        const std::size_t jj = detail::parse_count(r, in, "vortex index", kMaxCount);
        if (jj != j) r.fail("vortex records out of order");
        if (j == 0)
          t_node = t;
        else if (t != t_node)
          r.fail("node time differs between vortex records");
        const double zr = detail::parse_double(r, in, "position");
        const double zi = detail::parse_double(r, in, "position");
        const double vr = detail::parse_double(r, in, "velocity");
        const double vi = detail::parse_double(r, in, "velocity");
        z[j] = cplx{zr, zi};
        v[j] = cplx{vr, vi};
      }
      if (n_vortices == 0) {
        // Zero-vortex segments carry bare time stamps.
        std::istringstream in(r.next("node record"));
        t_node = detail::parse_double(r, in, "node time");
      }
      seg.push_node(t_node, std::move(z), std::move(v));
    }
    out.trajectory.segments.push_back(std::move(seg));
  }
  {
    std::istringstream in(r.next("end marker"));
    detail::expect_word(r, in, "end");
  }

  detail::check_trajectory_structure(out.trajectory);
  return out;
}

inline PvtrajFile read_pvtraj_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("pvtraj: cannot open '" + path + "'");
  return read_pvtraj(is);
}

// ---------------------------------------------------------------------------
// Export formats
// ---------------------------------------------------------------------------

/// Flat table: one line per (node, vortex) record across all segments,
/// columns "segment t vortex re im", preceded by a comment header.
inline void export_table(std::ostream& os, const EventTrajectory& tr) {
  detail::check_trajectory_structure(tr);
  using detail::fmt17;
  os << "# segment t vortex re im\n";
  for (std::size_t k = 0; k < tr.segments.size(); ++k) {
    const Trajectory& s = tr.segments[k];
    for (std::size_t i = 0; i < s.nodes(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j)
        os << k << ' ' << fmt17(s.times[i]) << ' ' << j << ' '
           << fmt17(s.positions[i][j].real()) << ' '
           << fmt17(s.positions[i][j].imag()) << "\n";
  }
  if (!os) throw std::runtime_error("export: write failed");
}

/// Plot-friendly blocks: one block per (segment, vortex) pair with columns
/// "t re im", blocks separated by blank lines (gnuplot index convention).
inline void export_plotdata(std::ostream& os, const EventTrajectory& tr) {
  detail::check_trajectory_structure(tr);
  using detail::fmt17;
  bool first = true;
  for (std::size_t k = 0; k < tr.segments.size(); ++k) {
    const Trajectory& s = tr.segments[k];
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (!first) os << "\n\n";
      first = false;
      os << "# segment " << k << " vortex " << j << " intensity "
         << fmt17(s.intensities[j]) << "\n";
      for (std::size_t i = 0; i < s.nodes(); ++i)
        os << fmt17(s.times[i]) << ' ' << fmt17(s.positions[i][j].real()) << ' '
           << fmt17(s.positions[i][j].imag()) << "\n";
    }
  }
  if (!os) throw std::runtime_error("export: write failed");
}

}  // namespace vortex
