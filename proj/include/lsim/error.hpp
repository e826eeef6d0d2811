#pragma once

#include <stdexcept>
#include <string>

namespace lsim {

enum class Errc {
  domain,                  // argument outside a function's mathematical domain
  config,                  // inconsistent or unsupported configuration
  capacity_exceeded,       // a node store would exceed clen
  missing_fragment,        // read of a fragment the node does not hold
  insufficient_fragments,  // fewer than k distinct EFIs for a decode
  unknown_efi,             // EFI outside [0, n)
  invariant_violation,     // a repairer invariant failed: always a bug
  parse,                   // malformed input text
  io,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace lsim
