#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "udderid/classifiers.hpp"
#include "udderid/features.hpp"

namespace udderid {

struct Sample {
  std::string cow_id;
  int collection = 1;  // 1 or 2
  int day = 1;         // 1 or 2
  FeatureVector features;
};

struct Dataset {
  std::vector<Sample> samples;
};

/// Throws DuplicateEntry on a repeated (cow, collection, day) and
/// InvalidArgument on a collection or day outside {1, 2}.
void validate(const Dataset& ds);

enum class Protocol {
  ConsecutiveDay,   // day-1 gallery, day-2 probes, per collection
  CrossCollection,  // collection-1 gallery, collection-2 probes, shared cows only
};

std::string_view to_string(Protocol protocol);
std::optional<Protocol> parse_protocol(std::string_view text);

struct ProtocolSplit {
  std::vector<LabeledVector> gallery;
  std::vector<LabeledVector> probes;
};

/// Consecutive-day: every (cow, collection) present must have both days,
/// otherwise CowMissingSession. Cross-collection: both days of each shared cow
/// are used on each side; CowMissingSession if no cow is shared.
ProtocolSplit split_protocol(const Dataset& ds, Protocol protocol);

/// Sorted cow ids present in both gallery and probes.
std::vector<std::string> eligible_cows(const ProtocolSplit& split);

/// Fits on the subset's gallery samples and returns the fraction of the
/// subset's probes whose top-ranked label is correct.
double run_trial(const ProtocolSplit& split, std::span<const std::string> cow_subset, Algorithm algorithm,
                 const Hyperparams& hyperparams, std::uint64_t trial_seed);

/// Seed of trial `trial` at group size `n`. Subset draw and classifier
/// training both derive from it.
std::uint64_t trial_seed(std::uint64_t master_seed, int n, int trial);

struct ReportEntry {
  Algorithm algorithm = Algorithm::Knn;
  FeatureLayout layout = FeatureLayout::Geometry17;
  int n = 0;
  int trials = 0;
  double mean_accuracy = 0;
  double std_accuracy = 0;  // population standard deviation over trials
  std::uint64_t seed = 0;
};

struct EvaluationReport {
  std::vector<ReportEntry> entries;
};

struct CurveOptions {
  int trials = 50;
  std::uint64_t master_seed = 42;
  int threads = 1;
  Hyperparams hyperparams;
};

/// Mean and spread of rank-1 accuracy over `trials` random n-cow subsets for
/// each n. Results are independent of `threads`.
EvaluationReport accuracy_curve(const ProtocolSplit& split, Algorithm algorithm, std::span<const int> n_values,
                                const CurveOptions& options);

/// Raw per-trial accuracies for one group size, in trial order.
std::vector<double> trial_accuracies(const ProtocolSplit& split, Algorithm algorithm, int n,
                                     const CurveOptions& options);

/// CSV with header `algorithm,layout,n,trials,mean_accuracy,std_accuracy,seed`,
/// floats printed with six decimals.
std::string report_csv(const EvaluationReport& report);
void export_report(const EvaluationReport& report, const std::filesystem::path& path);
EvaluationReport import_report(const std::filesystem::path& path);

}  // namespace udderid
