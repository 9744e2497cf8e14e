#pragma once

#include <string>

#include "alchemloop/oracle/oracle.hpp"

namespace alchemloop::oracle {

// Drives an external oracle over a line protocol: one JSON object per line
// on the child's stdin ({"id": n, "smiles": s}) and one per line on its
// stdout ({"id": n, "stable": b, "density": x, "hof": y, "reason": r};
// density/hof are null for unstable molecules). The child is spawned once
// via /bin/sh -c and kept alive for the oracle's lifetime. Protocol
// violations and timeouts raise OracleFailure.
class ExternalOracle final : public Oracle {
 public:
  explicit ExternalOracle(std::string command, int timeout_ms = 30000);
  ~ExternalOracle() override;

  ExternalOracle(const ExternalOracle&) = delete;
  ExternalOracle& operator=(const ExternalOracle&) = delete;

  OracleResult evaluate(const molgraph::Molecule& m) override;
  std::string name() const override { return "external:" + command_; }

 private:
  void spawn();
  void shutdown();
  std::string read_line();

  std::string command_;
  int timeout_ms_;
  int child_pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  long next_id_ = 0;
};

}  // namespace alchemloop::oracle
