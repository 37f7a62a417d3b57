#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "edgesplit/error.hpp"
#include "edgesplit/executor.hpp"
#include "edgesplit/kv_text.hpp"

extern char** environ;

namespace edgesplit {

using Clock = std::chrono::steady_clock;

namespace {

double elapsed_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename Worker>
Worker& worker_at(std::vector<std::unique_ptr<Worker>>& workers, WorkerHandle h) {
  if (h.id >= workers.size() || !workers[h.id]) {
    throw InvalidArgument("unknown worker handle " + std::to_string(h.id));
  }
  return *workers[h.id];
}

std::string errno_text(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

// Reads a file descriptor to EOF.
std::string drain(int fd) {
  std::string out;
  char buf[8192];
  for (;;) {
    const ssize_t n = ::read(fd, buf, sizeof(buf));
    if (n > 0) {
      out.append(buf, static_cast<std::size_t>(n));
    } else if (n == 0) {
      break;
    } else if (errno != EINTR) {
      break;
    }
  }
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    pos = nl + 1;
  }
  return lines;
}

// Returns a description of an abnormal exit, or empty for exit code 0.
std::string reap(pid_t pid) {
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) return errno_text("waitpid");
  }
  if (WIFEXITED(status)) {
    const int code = WEXITSTATUS(status);
    return code == 0 ? std::string() : "exited with status " + std::to_string(code);
  }
  if (WIFSIGNALED(status)) return "killed by signal " + std::to_string(WTERMSIG(status));
  return "ended abnormally";
}

void write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// MockBackend

struct MockBackend::Worker {
  Segment segment;
  CpuShare share;
  std::jthread thread;
  SegmentResult result;
  bool fail = false;
  bool collected = false;
};

MockBackend::MockBackend(DurationFn duration, std::set<std::size_t> failing_segments)
    : duration_(std::move(duration)), failing_(std::move(failing_segments)) {
  if (!duration_) throw InvalidArgument("mock backend needs a duration function");
}

MockBackend::~MockBackend() = default;

WorkerHandle MockBackend::launch(const Segment& segment, CpuShare cpu_share) {
  auto worker = std::make_unique<Worker>();
  worker->segment = segment;
  worker->share = cpu_share;
  worker->fail = failing_.contains(segment.index);
  const double seconds = duration_(segment);
  if (!(seconds >= 0.0)) throw InvalidArgument("mock worker duration must be >= 0");
  Worker* w = worker.get();
  w->thread = std::jthread([w, seconds] {
    const auto start = Clock::now();
    std::this_thread::sleep_until(start + std::chrono::duration_cast<Clock::duration>(
                                              std::chrono::duration<double>(seconds)));
    w->result.segment_index = w->segment.index;
    if (!w->fail) {
      w->result.outputs.reserve(w->segment.size);
      for (std::uint64_t u = w->segment.start_unit; u < w->segment.end_unit(); ++u) {
        w->result.outputs.push_back(default_unit_output(u));
      }
    }
    w->result.worker_seconds = elapsed_since(start);
  });
  workers_.push_back(std::move(worker));
  return WorkerHandle{workers_.size() - 1};
}

SegmentResult MockBackend::wait(WorkerHandle handle) {
  Worker& w = worker_at(workers_, handle);
  if (w.collected) throw InvalidArgument("worker already collected");
  w.thread.join();
  w.collected = true;
  if (w.fail) {
    throw WorkerFailure(w.segment.index,
                        "injected failure in segment " + std::to_string(w.segment.index));
  }
  return std::move(w.result);
}

std::map<std::size_t, CpuShare> MockBackend::shares_seen() const {
  std::map<std::size_t, CpuShare> out;
  for (const auto& w : workers_) out[w->segment.index] = w->share;
  return out;
}

// ---------------------------------------------------------------------------
// LocalProcessBackend

struct LocalProcessBackend::Worker {
  Segment segment;
  pid_t pid = -1;
  int read_fd = -1;
  Clock::time_point launched;
  std::optional<std::filesystem::path> cgroup;
  bool collected = false;
};

LocalProcessBackend::LocalProcessBackend(Options options) : options_(std::move(options)) {
  if (!(options_.unit_cost_seconds >= 0.0)) {
    throw InvalidArgument("unit cost must be >= 0");
  }
  if (!options_.payload) options_.payload = default_unit_output;
  if (!options_.cgroup_parent) {
    static std::once_flag warned;
    std::call_once(warned, [] {
      std::cerr << "warning: no cgroup directory configured; local workers run "
                   "without a CPU cap\n";
    });
  }
}

LocalProcessBackend::~LocalProcessBackend() {
  for (auto& w : workers_) {
    if (!w || w->collected) continue;
    ::kill(w->pid, SIGKILL);
    if (w->read_fd >= 0) ::close(w->read_fd);
    reap(w->pid);
    if (w->cgroup) {
      std::error_code ec;
      std::filesystem::remove(*w->cgroup, ec);
    }
  }
}

namespace {

// cpu.max takes "<quota> <period>" in microseconds.
std::filesystem::path make_worker_cgroup(const std::string& parent, std::size_t index,
                                         CpuShare share) {
  static std::atomic<unsigned> counter{0};
  const std::filesystem::path dir =
      std::filesystem::path(parent) /
      ("edgesplit-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
       std::to_string(index));
  std::error_code ec;
  std::filesystem::create_directory(dir, ec);
  if (ec) throw ExecutionError("cannot create cgroup " + dir.string() + ": " + ec.message());
  constexpr long long kPeriodUs = 100000;
  const long long quota = share.hundredths() * kPeriodUs / 100;
  std::ofstream cpu_max(dir / "cpu.max");
  cpu_max << quota << ' ' << kPeriodUs << '\n';
  cpu_max.close();
  if (!cpu_max) {
    std::filesystem::remove(dir, ec);
    throw ExecutionError("cannot write cpu.max in " + dir.string());
  }
  return dir;
}

void spin_for(double seconds) {
  const auto until = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                        std::chrono::duration<double>(seconds));
  volatile std::uint64_t sink = 0;
  while (Clock::now() < until) {
    for (int i = 0; i < 256; ++i) sink = sink + static_cast<std::uint64_t>(i);
  }
}

}  // namespace

WorkerHandle LocalProcessBackend::launch(const Segment& segment, CpuShare cpu_share) {
  auto worker = std::make_unique<Worker>();
  worker->segment = segment;
  if (options_.cgroup_parent) {
    worker->cgroup = make_worker_cgroup(*options_.cgroup_parent, segment.index, cpu_share);
  }

  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw ExecutionError(errno_text("pipe"));
  worker->launched = Clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw ExecutionError(errno_text("fork"));
  }
  if (pid == 0) {
    ::close(fds[0]);
    if (worker->cgroup) {
      const std::string procs = (*worker->cgroup / "cgroup.procs").string();
      const int fd = ::open(procs.c_str(), O_WRONLY);
      if (fd < 0) ::_exit(97);
      write_all(fd, "0\n");
      ::close(fd);
    }
    const auto start = Clock::now();
    std::string out;
    for (std::uint64_t u = segment.start_unit; u < segment.end_unit(); ++u) {
      spin_for(options_.unit_cost_seconds);
      out += options_.payload(u);
      out += '\n';
    }
    char tail[64];
    std::snprintf(tail, sizeof(tail), "#worker_seconds=%.9f\n", elapsed_since(start));
    out += tail;
    write_all(fds[1], out);
    ::close(fds[1]);
    ::_exit(0);
  }
  ::close(fds[1]);
  worker->pid = pid;
  worker->read_fd = fds[0];
  workers_.push_back(std::move(worker));
  return WorkerHandle{workers_.size() - 1};
}

SegmentResult LocalProcessBackend::wait(WorkerHandle handle) {
  Worker& w = worker_at(workers_, handle);
  if (w.collected) throw InvalidArgument("worker already collected");
  const std::string text = drain(w.read_fd);
  ::close(w.read_fd);
  w.read_fd = -1;
  const std::string exit_problem = reap(w.pid);
  w.collected = true;
  if (w.cgroup) {
    std::error_code ec;
    std::filesystem::remove(*w.cgroup, ec);
  }
  if (!exit_problem.empty()) {
    throw WorkerFailure(w.segment.index, "worker " + std::to_string(w.segment.index) +
                                             " " + exit_problem);
  }

  SegmentResult result;
  result.segment_index = w.segment.index;
  result.worker_seconds = -1.0;
  for (std::string& line : split_lines(text)) {
    constexpr std::string_view kTag = "#worker_seconds=";
    if (line.starts_with(kTag)) {
      result.worker_seconds = parse_double(std::string_view(line).substr(kTag.size()));
    } else {
      result.outputs.push_back(std::move(line));
    }
  }
  if (result.worker_seconds < 0.0) {
    throw WorkerFailure(w.segment.index, "worker " + std::to_string(w.segment.index) +
                                             " did not report its run time");
  }
  return result;
}

// ---------------------------------------------------------------------------
// ContainerBackend

struct ContainerBackend::Worker {
  std::size_t segment_index = 0;
  pid_t pid = -1;
  int read_fd = -1;
  Clock::time_point launched;
  bool collected = false;
};

ContainerBackend::ContainerBackend(SplitPlan plan, std::string image, std::string runtime,
                                   std::string name_prefix)
    : commands_(container_adapter_command(plan, image, runtime, name_prefix)) {}

ContainerBackend::~ContainerBackend() {
  for (auto& w : workers_) {
    if (!w || w->collected) continue;
    ::kill(w->pid, SIGKILL);
    if (w->read_fd >= 0) ::close(w->read_fd);
    reap(w->pid);
  }
}

WorkerHandle ContainerBackend::launch(const Segment& segment, CpuShare cpu_share) {
  if (segment.index >= commands_.size()) {
    throw InvalidArgument("segment " + std::to_string(segment.index) + " not in plan");
  }
  const ContainerCommand& cmd = commands_[segment.index];
  if (cmd.cpus != cpu_share) throw InvalidArgument("cpu share differs from the plan");

  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw ExecutionError(errno_text("pipe"));
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
  std::vector<char*> argv;
  for (const std::string& a : cmd.argv) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  auto worker = std::make_unique<Worker>();
  worker->segment_index = segment.index;
  worker->launched = Clock::now();
  pid_t pid = -1;
  const int rc = ::posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(fds[1]);
  if (rc != 0) {
    ::close(fds[0]);
    throw ExecutionError("cannot start '" + cmd.argv[0] + "': " + std::strerror(rc));
  }
  worker->pid = pid;
  worker->read_fd = fds[0];
  workers_.push_back(std::move(worker));
  return WorkerHandle{workers_.size() - 1};
}

SegmentResult ContainerBackend::wait(WorkerHandle handle) {
  Worker& w = worker_at(workers_, handle);
  if (w.collected) throw InvalidArgument("worker already collected");
  const std::string text = drain(w.read_fd);
  ::close(w.read_fd);
  w.read_fd = -1;
  const std::string exit_problem = reap(w.pid);
  w.collected = true;
  if (!exit_problem.empty()) {
    throw WorkerFailure(w.segment_index, "container " + commands_[w.segment_index].name +
                                             " " + exit_problem);
  }
  SegmentResult result;
  result.segment_index = w.segment_index;
  result.outputs = split_lines(text);
  result.worker_seconds = elapsed_since(w.launched);
  return result;
}

}  // namespace edgesplit
