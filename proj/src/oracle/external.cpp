#include "alchemloop/oracle/external.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <json.hpp>

#include "alchemloop/molgraph/smiles.hpp"

namespace alchemloop::oracle {

ExternalOracle::ExternalOracle(std::string command, int timeout_ms)
    : command_(std::move(command)), timeout_ms_(timeout_ms) {
  spawn();
}

ExternalOracle::~ExternalOracle() { shutdown(); }

void ExternalOracle::spawn() {
  int to_pipe[2];
  int from_pipe[2];
  if (pipe(to_pipe) != 0 || pipe(from_pipe) != 0) {
    throw OracleFailure("failed to create pipes for external oracle");
  }
  const int pid = fork();
  if (pid < 0) throw OracleFailure("failed to fork external oracle process");
  if (pid == 0) {
    dup2(to_pipe[0], STDIN_FILENO);
    dup2(from_pipe[1], STDOUT_FILENO);
    close(to_pipe[0]);
    close(to_pipe[1]);
    close(from_pipe[0]);
    close(from_pipe[1]);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(to_pipe[0]);
  close(from_pipe[1]);
  child_pid_ = pid;
  to_child_ = to_pipe[1];
  from_child_ = from_pipe[0];
}

void ExternalOracle::shutdown() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (child_pid_ > 0) {
    int status = 0;
    if (waitpid(child_pid_, &status, WNOHANG) == 0) {
      kill(child_pid_, SIGTERM);
      waitpid(child_pid_, &status, 0);
    }
    child_pid_ = -1;
  }
}

std::string ExternalOracle::read_line() {
  for (;;) {
    const std::size_t nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = poll(&pfd, 1, timeout_ms_);
    if (ready == 0) throw OracleFailure("external oracle timed out after " +
                                        std::to_string(timeout_ms_) + " ms");
    if (ready < 0) throw OracleFailure(std::string("poll failed: ") + std::strerror(errno));
    char chunk[4096];
    const ssize_t n = read(from_child_, chunk, sizeof(chunk));
    if (n <= 0) throw OracleFailure("external oracle closed its output stream");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

OracleResult ExternalOracle::evaluate(const molgraph::Molecule& m) {
  const long id = next_id_++;
  nlohmann::json request{{"id", id}, {"smiles", molgraph::write_smiles(m)}};
  const std::string line = request.dump() + "\n";
  if (write(to_child_, line.data(), line.size()) != static_cast<ssize_t>(line.size())) {
    throw OracleFailure("failed to write request to external oracle");
  }

  nlohmann::json response;
  try {
    response = nlohmann::json::parse(read_line());
  } catch (const nlohmann::json::parse_error& e) {
    throw OracleFailure(std::string("malformed external oracle response: ") + e.what());
  }
  if (!response.contains("id") || response["id"].get<long>() != id) {
    throw OracleFailure("external oracle response id mismatch");
  }
  if (!response.contains("stable") || !response["stable"].is_boolean()) {
    throw OracleFailure("external oracle response missing 'stable'");
  }
  OracleResult r;
  r.stable = response["stable"].get<bool>();
  if (r.stable) {
    if (!response.contains("density") || !response["density"].is_number() ||
        !response.contains("hof") || !response["hof"].is_number()) {
      throw OracleFailure("stable verdict without density/hof values");
    }
    r.density = response["density"].get<double>();
    r.solid_hof = response["hof"].get<double>();
    r.reason = FailureReason::None;
  } else {
    r.reason = failure_reason_from_name(response.value("reason", "geometry_failed"));
    if (r.reason == FailureReason::None) r.reason = FailureReason::GeometryFailed;
  }
  return r;
}

}  // namespace alchemloop::oracle
