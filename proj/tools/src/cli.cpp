#include "edgesplit/cli/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "edgesplit/cli/fixtures.hpp"
#include "edgesplit/device.hpp"
#include "edgesplit/error.hpp"
#include "edgesplit/executor.hpp"
#include "edgesplit/kv_text.hpp"
#include "edgesplit/modelfit.hpp"
#include "edgesplit/planner.hpp"
#include "edgesplit/powermeter.hpp"
#include "edgesplit/splitter.hpp"

namespace edgesplit::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  // shared
  std::string device = "tx2";
  std::string out;
  std::optional<std::size_t> max_containers;
  std::string time_model;
  std::string energy_model;
  std::string power_model;

  // fit
  std::string input;
  std::string family = "auto";
  std::string metric;

  // plan
  std::string objective = "min_time";
  std::optional<double> wt;
  std::optional<double> epsilon;
  std::optional<double> power_cap;
  std::optional<std::size_t> containers;
  std::uint64_t work_units = 900;

  // simulate
  std::optional<std::uint64_t> seed;

  // run
  std::string plan_file;
  std::string backend = "local";
  double unit_cost = 0.001;
  std::string image = "edgesplit-worker";
  std::string runtime = "docker";
  std::string cgroup;
  std::optional<double> constant_power;
  std::string power_trace;
  double interval = kDefaultSampleInterval;
  std::string outputs_file;

  // report
  std::string time_input;
  std::string energy_input;
  std::string power_input;
  std::string sweep;
};

void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty()) {
    out << text;
  } else {
    write_file(o.out, text);
  }
}

DeviceProfile resolve_device(const std::string& name_or_path) {
  if (auto d = bundled_profile(name_or_path)) return *d;
  return device_profile_from_text(read_file(name_or_path));
}

std::string metric_from_name(const std::string& name) {
  for (const char* m : {"time", "energy", "power"}) {
    const std::string suffix = std::string("_") + m;
    if (name.size() >= suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      return m;
    }
  }
  return "";
}

struct ResolvedModels {
  std::optional<PerfModel> time;
  std::optional<PerfModel> energy;
  std::optional<PerfModel> power;
};

ResolvedModels resolve_models(const Options& o, const DeviceProfile& device) {
  ResolvedModels r;
  if (auto bundled = bundled_models(device.name); bundled && bundled_profile(o.device)) {
    r.time = bundled->time;
    r.energy = bundled->energy;
    r.power = bundled->power;
  }
  const auto load = [](const std::string& path) {
    return fitted_model_from_text(read_file(path)).model;
  };
  if (!o.time_model.empty()) r.time = load(o.time_model);
  if (!o.energy_model.empty()) r.energy = load(o.energy_model);
  if (!o.power_model.empty()) r.power = load(o.power_model);
  return r;
}

std::size_t resolve_max(const Options& o, const DeviceProfile& device) {
  const std::size_t max = o.max_containers.value_or(device.max_containers);
  if (max < 1) throw UsageError("--max-containers must be >= 1");
  return max;
}

int run_fit(const Options& o, std::ostream& out) {
  const auto points = load_points(o.input);
  FittedModel fm;
  fm.model = fit_model(points, parse_family(o.family));

  std::string metric = o.metric.empty() ? metric_from_name(o.input) : o.metric;
  if (!o.metric.empty() && metric != "time" && metric != "energy" && metric != "power") {
    throw UsageError("--metric must be time, energy or power");
  }
  if (!metric.empty()) {
    const DeviceProfile device = resolve_device(o.device);
    if (metric == "time") fm = {fm.model, device.ref_time, "s"};
    if (metric == "energy") fm = {fm.model, device.ref_energy, "J"};
    if (metric == "power") fm = {fm.model, device.ref_power, "W"};
  }
  emit(o, out, to_text(fm));
  return kOk;
}

void print_prediction(std::ostream& os, const Prediction& p) {
  os << "n=" << p.n << '\n'
     << "objective_value=" << format_exact(p.objective) << '\n'
     << "time_ratio=" << format_exact(p.time_ratio) << '\n'
     << "energy_ratio=" << format_exact(p.energy_ratio) << '\n'
     << "power_ratio=" << format_exact(p.power_ratio) << '\n'
     << "predicted_time_s=" << format_exact(p.time_s) << '\n'
     << "predicted_energy_j=" << format_exact(p.energy_j) << '\n'
     << "predicted_power_w=" << format_exact(p.power_w) << '\n';
}

int run_plan(const Options& o, std::ostream& out) {
  const DeviceProfile device = resolve_device(o.device);
  validate(device);
  const ObjectiveKind kind = parse_objective(o.objective);
  if (o.wt && kind != ObjectiveKind::kWeighted) {
    throw UsageError("--wt only applies to --objective weighted");
  }

  std::ostringstream report;
  std::size_t n = 0;
  if (o.containers) {
    if (o.epsilon || o.power_cap || o.wt) {
      throw UsageError("--containers fixes n; drop the planning options");
    }
    n = *o.containers;
    report << "n=" << n << '\n';
  } else {
    const ResolvedModels models = resolve_models(o, device);
    if (!models.time || !models.energy) {
      throw UsageError("device '" + device.name +
                       "' has no bundled models; pass --time-model and --energy-model");
    }
    if (o.power_cap && !models.power) {
      throw UsageError("--power-cap needs a power model");
    }
    Objective objective;
    switch (kind) {
      case ObjectiveKind::kMinTime: objective = Objective::min_time(); break;
      case ObjectiveKind::kMinEnergy: objective = Objective::min_energy(); break;
      case ObjectiveKind::kWeighted: objective = Objective::weighted(o.wt.value_or(0.5)); break;
    }
    Constraints constraints{resolve_max(o, device), o.power_cap, o.epsilon};
    const PlanDecision decision =
        optimal_containers(*models.time, *models.energy,
                           models.power ? &*models.power : nullptr, objective,
                           constraints, device);
    n = decision.chosen.n;
    print_prediction(report, decision.chosen);
    if (decision.continuous_minimizer) {
      report << "continuous_minimizer=" << format_exact(*decision.continuous_minimizer)
             << '\n';
    }
  }
  const SplitPlan plan =
      make_split_plan(o.work_units, n, static_cast<double>(device.total_cores));
  out << report.str();
  if (o.out.empty()) {
    out << to_text(plan);
  } else {
    write_file(o.out, to_text(plan));
  }
  return kOk;
}

int run_simulate(const Options& o, std::ostream& out) {
  const DeviceProfile device = resolve_device(o.device);
  validate(device);
  const ResolvedModels models = resolve_models(o, device);
  if (!models.time || !models.energy) {
    throw UsageError("simulate needs time and energy models for '" + device.name + "'");
  }
  const std::size_t max = resolve_max(o, device);
  if (max > device.max_containers) {
    throw UsageError("--max-containers exceeds the device limit");
  }
  std::string csv = "n,time_s,energy_j,avg_power_w\n";
  for (std::size_t n = 1; n <= max; ++n) {
    const RunMetrics m = simulate_run(device, *models.time, *models.energy, n, o.seed);
    csv += std::to_string(n) + ',' + format_exact(m.wall_time) + ',' +
           format_exact(m.energy) + ',' + format_exact(m.avg_power) + '\n';
  }
  emit(o, out, csv);
  return kOk;
}

int run_run(const Options& o, std::ostream& out) {
  SplitPlan plan;
  if (!o.plan_file.empty()) {
    if (o.containers) throw UsageError("--plan and --containers are exclusive");
    plan = split_plan_from_text(read_file(o.plan_file));
  } else {
    const DeviceProfile device = resolve_device(o.device);
    plan = make_split_plan(o.work_units, o.containers.value_or(1),
                           static_cast<double>(device.total_cores));
  }

  if (o.constant_power && !o.power_trace.empty()) {
    throw UsageError("--power and --power-trace are exclusive");
  }
  std::unique_ptr<PowerSource> source;
  if (!o.power_trace.empty()) {
    source = std::make_unique<ReplaySource>(trace_from_csv(read_file(o.power_trace)), true);
  } else {
    source = std::make_unique<ConstantSource>(o.constant_power.value_or(1.0));
  }

  std::unique_ptr<Backend> backend;
  if (o.backend == "mock") {
    const double cost = o.unit_cost;
    backend = std::make_unique<MockBackend>(
        [cost](const Segment& s) { return cost * static_cast<double>(s.size); });
  } else if (o.backend == "local") {
    LocalProcessBackend::Options lo;
    lo.unit_cost_seconds = o.unit_cost;
    if (!o.cgroup.empty()) lo.cgroup_parent = o.cgroup;
    backend = std::make_unique<LocalProcessBackend>(std::move(lo));
  } else if (o.backend == "container") {
    backend = std::make_unique<ContainerBackend>(plan, o.image, o.runtime);
  } else {
    throw UsageError("--backend must be mock, local or container");
  }

  ExperimentOptions eo;
  eo.sample_interval = o.interval;
  const ExperimentResult r = run_experiment(plan, *backend, *source, eo);
  out << "n_containers=" << r.metrics.n_containers << '\n'
      << "cpu_share_per_container=" << plan.cpu_share_per_container.str() << '\n'
      << "wall_time_s=" << format_exact(r.metrics.wall_time) << '\n'
      << "energy_j=" << format_exact(r.metrics.energy) << '\n'
      << "avg_power_w=" << format_exact(r.metrics.avg_power) << '\n'
      << "outputs=" << r.outputs.size() << '\n';
  for (std::size_t i = 0; i < r.metrics.per_worker_times.size(); ++i) {
    out << "worker_" << i << "_s=" << format_exact(r.metrics.per_worker_times[i]) << '\n';
  }
  if (!o.out.empty()) write_file(o.out, to_csv(r.trace));
  if (!o.outputs_file.empty()) {
    std::string text;
    for (const std::string& line : r.outputs) text += line + '\n';
    write_file(o.outputs_file, text);
  }
  return kOk;
}

// Columns of a `simulate` sweep, keyed by n.
struct Sweep {
  MetricSeries time;
  MetricSeries energy;
  MetricSeries power;
};

Sweep read_sweep(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  Sweep sweep;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!header) {
      if (line != "n,time_s,energy_j,avg_power_w") {
        throw DataError("sweep file: expected header 'n,time_s,energy_j,avg_power_w'");
      }
      header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 4) {
      throw DataError("sweep file: parse error at line " + std::to_string(line_no));
    }
    try {
      const double nd = parse_double(fields[0]);
      const auto n = static_cast<std::size_t>(nd);
      if (nd < 1 || static_cast<double>(n) != nd) throw DataError("bad n");
      sweep.time[n] = parse_double(fields[1]);
      sweep.energy[n] = parse_double(fields[2]);
      sweep.power[n] = parse_double(fields[3]);
    } catch (const DataError&) {
      throw DataError("sweep file: parse error at line " + std::to_string(line_no));
    }
  }
  if (sweep.time.empty()) throw DataError("sweep file: no data rows");
  return sweep;
}

int run_report(const Options& o, std::ostream& out) {
  std::optional<MetricSeries> time, energy, power;
  if (!o.sweep.empty()) {
    if (!o.input.empty() || !o.time_input.empty() || !o.energy_input.empty() ||
        !o.power_input.empty()) {
      throw UsageError("--sweep cannot be combined with point inputs");
    }
    Sweep s = read_sweep(o.sweep);
    time = std::move(s.time);
    energy = std::move(s.energy);
    power = std::move(s.power);
  }
  if (!o.input.empty()) {
    const std::string metric = o.metric.empty() ? metric_from_name(o.input) : o.metric;
    const MetricSeries series = series_from_points(load_points(o.input));
    if (metric == "time" || metric.empty()) {
      time = series;
    } else if (metric == "energy") {
      energy = series;
    } else if (metric == "power") {
      power = series;
    } else {
      throw UsageError("--metric must be time, energy or power");
    }
  }
  if (!o.time_input.empty()) time = series_from_points(load_points(o.time_input));
  if (!o.energy_input.empty()) energy = series_from_points(load_points(o.energy_input));
  if (!o.power_input.empty()) power = series_from_points(load_points(o.power_input));
  if (!time && !energy && !power) {
    throw UsageError("report needs --input, --time/--energy/--power or --sweep");
  }

  std::size_t max = o.max_containers.value_or(0);
  if (max == 0) {
    for (const auto* s : {&time, &energy, &power}) {
      if (*s && !(*s)->empty()) max = std::max(max, (*s)->rbegin()->first);
    }
  }
  emit(o, out, to_csv(savings_report(time, energy, power, max)));
  return kOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Split inference workloads across CPU-capped containers and plan the "
               "container count",
               "edgesplit"};
  app.require_subcommand(1);

  const auto add_device = [&](CLI::App* sub) {
    sub->add_option("--device", o.device, "Device profile: tx2, orin, or a profile file");
  };
  const auto add_models = [&](CLI::App* sub) {
    sub->add_option("--time-model", o.time_model, "Fitted time model file");
    sub->add_option("--energy-model", o.energy_model, "Fitted energy model file");
    sub->add_option("--power-model", o.power_model, "Fitted power model file");
  };

  CLI::App* fit = app.add_subcommand("fit", "Fit a model to points");
  fit->add_option("--input", o.input, "Points CSV or fixture name")->required();
  fit->add_option("--family", o.family, "quadratic, exp or auto")
      ->check(CLI::IsMember({"quadratic", "exp", "auto"}));
  fit->add_option("--metric", o.metric, "time, energy or power (sets the reference)");
  add_device(fit);
  fit->add_option("--out", o.out, "Model file to write");

  CLI::App* plan = app.add_subcommand("plan", "Choose the container count");
  add_device(plan);
  add_models(plan);
  plan->add_option("--objective", o.objective, "min_time, min_energy or weighted")
      ->check(CLI::IsMember({"min_time", "min_energy", "weighted"}));
  plan->add_option("--wt", o.wt, "Time weight for the weighted objective")
      ->check(CLI::Range(0.0, 1.0));
  plan->add_option("--epsilon", o.epsilon, "Marginal gain cutoff on normalized metrics");
  plan->add_option("--power-cap", o.power_cap, "Upper bound on predicted power (W)");
  plan->add_option("--max-containers", o.max_containers, "Largest n to consider");
  plan->add_option("--containers", o.containers, "Use this n instead of planning");
  plan->add_option("--work-units", o.work_units, "Units (frames) to split");
  plan->add_option("--out", o.out, "Split plan file to write");

  CLI::App* sim = app.add_subcommand("simulate", "Model-driven sweep over n");
  add_device(sim);
  add_models(sim);
  sim->add_option("--max-containers", o.max_containers, "Largest n to simulate");
  sim->add_option("--seed", o.seed, "Enable 0.5% multiplicative noise with this seed");
  sim->add_option("--out", o.out, "Sweep CSV to write");

  CLI::App* run = app.add_subcommand("run", "Execute a split plan");
  add_device(run);
  run->add_option("--plan", o.plan_file, "Split plan file");
  run->add_option("--containers", o.containers, "Number of containers");
  run->add_option("--work-units", o.work_units, "Units (frames) to split");
  run->add_option("--backend", o.backend, "mock, local or container");
  run->add_option("--unit-cost", o.unit_cost, "Seconds of work per unit");
  run->add_option("--image", o.image, "Container image");
  run->add_option("--runtime", o.runtime, "Container runtime binary");
  run->add_option("--cgroup", o.cgroup, "Writable cgroup v2 directory for CPU caps");
  run->add_option("--power", o.constant_power, "Constant power source (W)");
  run->add_option("--power-trace", o.power_trace, "Replay power from a trace CSV");
  run->add_option("--interval", o.interval, "Power sampling interval (s)")
      ->check(CLI::PositiveNumber);
  run->add_option("--outputs", o.outputs_file, "Write merged unit outputs here");
  run->add_option("--out", o.out, "Power trace CSV to write");

  CLI::App* report = app.add_subcommand("report", "Savings relative to n=1");
  report->add_option("--input", o.input, "Points CSV or fixture name");
  report->add_option("--metric", o.metric, "Metric of --input (default from its name)");
  report->add_option("--time", o.time_input, "Time points");
  report->add_option("--energy", o.energy_input, "Energy points");
  report->add_option("--power", o.power_input, "Power points");
  report->add_option("--sweep", o.sweep, "CSV written by simulate");
  report->add_option("--max-containers", o.max_containers, "Largest n to report");
  report->add_option("--out", o.out, "Savings CSV to write");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsageError;
  }

  try {
    if (*fit) return run_fit(o, out);
    if (*plan) return run_plan(o, out);
    if (*sim) return run_simulate(o, out);
    if (*run) return run_run(o, out);
    if (*report) return run_report(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ExecutionError& e) {
    err << "error: " << e.what() << '\n';
    return kExecutionError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}

}  // namespace edgesplit::cli
