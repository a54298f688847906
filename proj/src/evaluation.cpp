#include "udderid/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iterator>
#include <mutex>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "udderid/error.hpp"
#include "udderid/random.hpp"

namespace udderid {

void validate(const Dataset& ds) {
  std::set<std::tuple<std::string, int, int>> seen;
  for (const Sample& s : ds.samples) {
    if (s.collection != 1 && s.collection != 2) {
      throw Error(ErrorCode::InvalidArgument, "collection must be 1 or 2 (cow " + s.cow_id + ")");
    }
    if (s.day != 1 && s.day != 2) throw Error(ErrorCode::InvalidArgument, "day must be 1 or 2 (cow " + s.cow_id + ")");
    if (!seen.emplace(s.cow_id, s.collection, s.day).second) {
      throw Error(ErrorCode::DuplicateEntry, "cow " + s.cow_id + " collection " + std::to_string(s.collection) +
                                                 " day " + std::to_string(s.day));
    }
  }
}

std::string_view to_string(Protocol protocol) {
  return protocol == Protocol::ConsecutiveDay ? "consecutive-day" : "cross-collection";
}

std::optional<Protocol> parse_protocol(std::string_view text) {
  if (text == "consecutive-day") return Protocol::ConsecutiveDay;
  if (text == "cross-collection") return Protocol::CrossCollection;
  return std::nullopt;
}

ProtocolSplit split_protocol(const Dataset& ds, Protocol protocol) {
  validate(ds);
  ProtocolSplit split;

  if (protocol == Protocol::ConsecutiveDay) {
    std::map<std::pair<std::string, int>, std::pair<bool, bool>> days;
    for (const Sample& s : ds.samples) {
      auto& d = days[{s.cow_id, s.collection}];
      (s.day == 1 ? d.first : d.second) = true;
    }
    for (const auto& [key, d] : days) {
      if (!d.first || !d.second) {
        throw Error(ErrorCode::CowMissingSession, "cow " + key.first + " lacks day " + (d.first ? "2" : "1") +
                                                      " in collection " + std::to_string(key.second));
      }
    }
    for (const Sample& s : ds.samples) {
      (s.day == 1 ? split.gallery : split.probes).push_back({s.features, s.cow_id});
    }
    return split;
  }

  std::set<std::string> first;
  std::set<std::string> second;
  for (const Sample& s : ds.samples) (s.collection == 1 ? first : second).insert(s.cow_id);
  std::set<std::string> shared;
  std::set_intersection(first.begin(), first.end(), second.begin(), second.end(),
                        std::inserter(shared, shared.end()));
  if (shared.empty()) throw Error(ErrorCode::CowMissingSession, "no cow appears in both collections");
  for (const Sample& s : ds.samples) {
    if (!shared.contains(s.cow_id)) continue;
    (s.collection == 1 ? split.gallery : split.probes).push_back({s.features, s.cow_id});
  }
  return split;
}

std::vector<std::string> eligible_cows(const ProtocolSplit& split) {
  std::set<std::string> g;
  std::set<std::string> p;
  for (const auto& s : split.gallery) g.insert(s.cow_id);
  for (const auto& s : split.probes) p.insert(s.cow_id);
  std::vector<std::string> out;
  std::set_intersection(g.begin(), g.end(), p.begin(), p.end(), std::back_inserter(out));
  return out;
}

double run_trial(const ProtocolSplit& split, std::span<const std::string> cow_subset, Algorithm algorithm,
                 const Hyperparams& hyperparams, std::uint64_t seed) {
  if (cow_subset.empty()) throw Error(ErrorCode::EmptySubset, "trial needs at least one cow");
  const std::set<std::string> subset(cow_subset.begin(), cow_subset.end());

  std::vector<LabeledVector> gallery;
  std::vector<const LabeledVector*> probes;
  std::set<std::string> in_gallery;
  std::set<std::string> in_probes;
  for (const auto& s : split.gallery) {
    if (subset.contains(s.cow_id)) {
      gallery.push_back(s);
      in_gallery.insert(s.cow_id);
    }
  }
  for (const auto& s : split.probes) {
    if (subset.contains(s.cow_id)) {
      probes.push_back(&s);
      in_probes.insert(s.cow_id);
    }
  }
  for (const std::string& cow : subset) {
    if (!in_gallery.contains(cow) || !in_probes.contains(cow)) {
      throw Error(ErrorCode::CowMissingSession, "cow " + cow + " is not in both gallery and probes");
    }
  }

  const TrainedModel model = fit(algorithm, gallery, hyperparams, derive_seed(seed, 1));
  std::size_t correct = 0;
  for (const LabeledVector* probe : probes) {
    if (model.predict(probe->features) == probe->cow_id) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(probes.size());
}

std::uint64_t trial_seed(std::uint64_t master_seed, int n, int trial) {
  return derive_seed(master_seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(trial));
}

std::vector<double> trial_accuracies(const ProtocolSplit& split, Algorithm algorithm, int n,
                                     const CurveOptions& options) {
  const std::vector<std::string> cows = eligible_cows(split);
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "group size must be positive");
  if (static_cast<std::size_t>(n) > cows.size()) {
    throw Error(ErrorCode::GroupSizeTooLarge,
                "group size " + std::to_string(n) + " exceeds " + std::to_string(cows.size()) + " eligible cows");
  }
  if (options.trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be positive");

  std::vector<double> accuracy(static_cast<std::size_t>(options.trials));
  const auto one = [&](int t) {
    const std::uint64_t seed = trial_seed(options.master_seed, n, t);
    Rng rng(seed);
    std::vector<std::string> pool = cows;
    // Partial Fisher-Yates: the first n entries are the subset.
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.index(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(n));
    accuracy[static_cast<std::size_t>(t)] = run_trial(split, pool, algorithm, options.hyperparams, seed);
  };

  const int workers = std::clamp(options.threads, 1, options.trials);
  if (workers == 1) {
    for (int t = 0; t < options.trials; ++t) one(t);
    return accuracy;
  }

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int t = next++; t < options.trials; t = next++) {
        try {
          one(t);
        } catch (...) {
          const std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return accuracy;
}

EvaluationReport accuracy_curve(const ProtocolSplit& split, Algorithm algorithm, std::span<const int> n_values,
                                const CurveOptions& options) {
  if (split.gallery.empty()) throw Error(ErrorCode::EmptyGallery, "no gallery samples");
  const FeatureLayout layout = split.gallery.front().features.layout;

  EvaluationReport report;
  for (const int n : n_values) {
    const std::vector<double> acc = trial_accuracies(split, algorithm, n, options);
    double mean = 0;
    for (const double a : acc) mean += a;
    mean /= static_cast<double>(acc.size());
    double var = 0;
    for (const double a : acc) var += (a - mean) * (a - mean);
    var /= static_cast<double>(acc.size());
    report.entries.push_back({algorithm, layout, n, options.trials, mean, std::sqrt(var), options.master_seed});
  }
  return report;
}

std::string report_csv(const EvaluationReport& report) {
  std::string out = "algorithm,layout,n,trials,mean_accuracy,std_accuracy,seed\n";
  char line[256];
  for (const ReportEntry& e : report.entries) {
    std::snprintf(line, sizeof line, "%s,%s,%d,%d,%.6f,%.6f,%llu\n", std::string(to_string(e.algorithm)).c_str(),
                  std::string(to_string(e.layout)).c_str(), e.n, e.trials, e.mean_accuracy, e.std_accuracy,
                  static_cast<unsigned long long>(e.seed));
    out += line;
  }
  return out;
}

void export_report(const EvaluationReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << report_csv(report);
  if (!out.flush()) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

EvaluationReport import_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "algorithm,layout,n,trials,mean_accuracy,std_accuracy,seed") {
    throw Error(ErrorCode::ParseError, "unexpected report header in " + path.string());
  }
  EvaluationReport report;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    const auto algorithm = cells.size() == 7 ? parse_algorithm(cells[0]) : std::nullopt;
    const auto layout = cells.size() == 7 ? parse_layout(cells[1]) : std::nullopt;
    if (!algorithm || !layout) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": malformed row");
    }
    try {
      report.entries.push_back({*algorithm, *layout, std::stoi(cells[2]), std::stoi(cells[3]), std::stod(cells[4]),
                                std::stod(cells[5]), std::stoull(cells[6])});
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  return report;
}

}  // namespace udderid
