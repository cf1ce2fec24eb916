#pragma once

#include "socfault/probe.hpp"

#include <iosfwd>

namespace socfault {

/// Line-oriented debug console over a probe session. Commands:
///   halt | go [limit] | s [n] | rr i | wr i v | pc addr | md addr len
///   exec w... [xN=v ...] | map lo hi | iciallu | civac addr | tlbi | q
/// Reads commands from `in` until EOF or `q`; suitable for scripted use.
void run_repl(Simulator& sim, std::istream& in, std::ostream& out);

} // namespace socfault
