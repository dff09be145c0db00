#include "certmesh/sweep.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace certmesh {

const char* kCsvHeader =
    "attacker_fraction,mpktv,known_certs,mode,replicate,seed,valid_rate,corrupted_rate,"
    "mean_delay_s,failed,messages_sent,bytes_sent";

namespace {

struct Cell {
  double attacker_fraction;
  double mpktv;
  std::size_t known_certs;
};

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fmt_opt6(const std::optional<double>& v) { return v ? fmt6(*v) : "NA"; }

SweepRow mean_of(const std::vector<SweepRow>& reps) {
  SweepRow mean = reps.front();
  mean.replicate.reset();
  mean.seed.reset();
  double valid = 0, corrupted = 0, failed = 0, messages = 0, bytes = 0;
  double delay_sum = 0;
  std::size_t delay_n = 0;
  for (const auto& r : reps) {
    valid += r.valid_rate.value_or(0);
    corrupted += r.corrupted_rate.value_or(0);
    failed += r.failed;
    messages += r.messages_sent;
    bytes += r.bytes_sent;
    if (r.mean_delay) {
      delay_sum += *r.mean_delay;
      delay_n += 1;
    }
  }
  double n = static_cast<double>(reps.size());
  mean.valid_rate = valid / n;
  mean.corrupted_rate = corrupted / n;
  mean.mean_delay =
      delay_n > 0 ? std::optional<double>(delay_sum / static_cast<double>(delay_n)) : std::nullopt;
  mean.failed = failed / n;
  mean.messages_sent = messages / n;
  mean.bytes_sent = bytes / n;
  return mean;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  std::vector<Cell> cells;
  for (double frac : spec.attacker_fractions) {
    for (double mpktv : spec.mpktvs) {
      for (std::size_t known : spec.known_certs) {
        cells.push_back({frac, mpktv, known});
      }
    }
  }

  struct Task {
    std::size_t cell;
    std::size_t replicate;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t r = 0; r < spec.replications; ++r) tasks.push_back({c, r});
  }

  std::vector<SweepRow> replicate_rows(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::string first_error;

  auto worker = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error.empty()) return;
      }
      const Task& task = tasks[i];
      const Cell& cell = cells[task.cell];
      ScenarioConfig cfg = spec.base;
      cfg.attacker_fraction = cell.attacker_fraction;
      cfg.mpktv = cell.mpktv;
      cfg.known_certs = cell.known_certs;
      std::uint64_t seed = spec.base.seed + task.replicate;
      try {
        RunResult run = run_scenario(cfg, seed);
        Rates rates = compute_rates(run.metrics);
        SweepRow row;
        row.attacker_fraction = cell.attacker_fraction;
        row.mpktv = cell.mpktv;
        row.known_certs = cell.known_certs;
        row.mode = cfg.attacker_mode;
        row.replicate = task.replicate;
        row.seed = seed;
        row.valid_rate = rates.valid_rate;
        row.corrupted_rate = rates.corrupted_rate;
        row.mean_delay = rates.mean_delay;
        row.failed = static_cast<double>(run.metrics.failed);
        row.messages_sent = static_cast<double>(run.metrics.messages_sent);
        row.bytes_sent = static_cast<double>(run.metrics.bytes_sent);
        replicate_rows[i] = row;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty()) {
          char buf[160];
          std::snprintf(buf, sizeof(buf),
                        "sweep cell (attacker_fraction=%g, mpktv=%g, known_certs=%zu, seed=%llu) "
                        "failed: ",
                        cell.attacker_fraction, cell.mpktv, cell.known_certs,
                        static_cast<unsigned long long>(seed));
          first_error = std::string(buf) + e.what();
        }
      }
    }
  };

  std::size_t jobs = spec.jobs == 0 ? 1 : spec.jobs;
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (!first_error.empty()) throw std::runtime_error(first_error);

  // Replicate rows in task order (already sorted by cell, replicate), plus a
  // mean row per cell.
  std::vector<SweepRow> rows;
  rows.reserve(tasks.size() + cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<SweepRow> reps(replicate_rows.begin() + static_cast<std::ptrdiff_t>(c * spec.replications),
                               replicate_rows.begin() +
                                   static_cast<std::ptrdiff_t>((c + 1) * spec.replications));
    for (const auto& r : reps) rows.push_back(r);
    rows.push_back(mean_of(reps));
  }

  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    auto key = [](const SweepRow& r) {
      return std::make_tuple(static_cast<int>(r.mode), r.attacker_fraction, r.mpktv, r.known_certs,
                             r.replicate.has_value() ? *r.replicate
                                                     : std::numeric_limits<std::size_t>::max());
    };
    return key(a) < key(b);
  });
  return rows;
}

std::string format_csv(const std::vector<SweepRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& row : rows) {
    out += fmt6(row.attacker_fraction);
    out += ',';
    out += fmt6(row.mpktv);
    out += ',';
    out += std::to_string(row.known_certs);
    out += ',';
    out += row.mode == AttackerMode::isolated ? "isolated" : "colluding";
    out += ',';
    out += row.replicate ? std::to_string(*row.replicate) : "mean";
    out += ',';
    out += row.seed ? std::to_string(*row.seed) : "NA";
    out += ',';
    out += fmt_opt6(row.valid_rate);
    out += ',';
    out += fmt_opt6(row.corrupted_rate);
    out += ',';
    out += fmt_opt6(row.mean_delay);
    out += ',';
    if (row.replicate) {
      out += std::to_string(static_cast<std::uint64_t>(row.failed));
      out += ',';
      out += std::to_string(static_cast<std::uint64_t>(row.messages_sent));
      out += ',';
      out += std::to_string(static_cast<std::uint64_t>(row.bytes_sent));
    } else {
      out += fmt6(row.failed);
      out += ',';
      out += fmt6(row.messages_sent);
      out += ',';
      out += fmt6(row.bytes_sent);
    }
    out += '\n';
  }
  return out;
}

void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << format_csv(rows);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace certmesh
