#include "udderid/evaluation.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "udderid/error.hpp"
#include "udderid/random.hpp"
#include "udderid/synthetic.hpp"

namespace fs = std::filesystem;
using namespace udderid;

namespace {

Dataset synthetic_dataset(int cows, const NoiseModel& noise, std::uint64_t seed, int collections = 1) {
  const auto herd = generate_herd(cows, seed);
  Dataset ds;
  for (std::size_t i = 0; i < herd.size(); ++i) {
    for (int c = 1; c <= collections; ++c) {
      for (int d = 1; d <= 2; ++d) {
        const auto ann = sample_session(herd[i], noise, {c, d}, derive_seed(seed, i, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(d)));
        ds.samples.push_back({herd[i].cow_id, c, d,
                              make_feature_vector(FeatureLayout::Geometry17, geometric_features(ann).flatten())});
      }
    }
  }
  return ds;
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

Sample sample(std::string cow, int collection, int day, double v) {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(17, v);
  return {std::move(cow), collection, day, make_feature_vector(FeatureLayout::Geometry17, x)};
}

TEST(SplitProtocol, ConsecutiveDay) {
  const Dataset ds{{sample("a", 1, 1, 0), sample("a", 1, 2, 0.1), sample("b", 1, 1, 5), sample("b", 1, 2, 5.1)}};
  const ProtocolSplit s = split_protocol(ds, Protocol::ConsecutiveDay);
  ASSERT_EQ(s.gallery.size(), 2u);
  ASSERT_EQ(s.probes.size(), 2u);
  EXPECT_EQ(s.gallery[0].features.values(0), 0);
  EXPECT_EQ(s.probes[1].features.values(0), 5.1);
  EXPECT_EQ(eligible_cows(s), (std::vector<std::string>{"a", "b"}));
}

TEST(SplitProtocol, MissingDayAndDuplicates) {
  const Dataset missing{{sample("a", 1, 1, 0), sample("a", 1, 2, 0), sample("b", 1, 1, 1)}};
  EXPECT_EQ(code_of([&] { split_protocol(missing, Protocol::ConsecutiveDay); }), ErrorCode::CowMissingSession);
  const Dataset dup{{sample("a", 1, 1, 0), sample("a", 1, 1, 1)}};
  EXPECT_EQ(code_of([&] { split_protocol(dup, Protocol::ConsecutiveDay); }), ErrorCode::DuplicateEntry);
  const Dataset disjoint{{sample("a", 1, 1, 0), sample("b", 2, 1, 0)}};
  EXPECT_EQ(code_of([&] { split_protocol(disjoint, Protocol::CrossCollection); }), ErrorCode::CowMissingSession);
}

TEST(SplitProtocol, CrossCollectionUsesSharedCowsOnly) {
  Dataset ds;
  for (int cow = 0; cow < 30; ++cow) {
    const std::string id = "cow" + std::to_string(cow);
    const bool in_first = cow < 25;
    const bool in_second = cow >= 4;  // 21 shared cows
    for (int d = 1; d <= 2; ++d) {
      if (in_first) ds.samples.push_back(sample(id, 1, d, cow));
      if (in_second) ds.samples.push_back(sample(id, 2, d, cow + 0.5));
    }
  }
  const ProtocolSplit s = split_protocol(ds, Protocol::CrossCollection);
  EXPECT_EQ(s.gallery.size(), 42u);
  EXPECT_EQ(s.probes.size(), 42u);
  EXPECT_EQ(eligible_cows(s).size(), 21u);
}

TEST(RunTrial, Basics) {
  const Dataset ds = synthetic_dataset(6, NoiseModel{}, 1);
  const ProtocolSplit s = split_protocol(ds, Protocol::ConsecutiveDay);
  const std::vector<std::string> one = {"cow002"};
  for (const Algorithm a : kAllAlgorithms) EXPECT_EQ(run_trial(s, one, a, {}, 7), 1.0);
  EXPECT_EQ(code_of([&] { run_trial(s, std::vector<std::string>{}, Algorithm::Knn, {}, 1); }), ErrorCode::EmptySubset);
  EXPECT_EQ(code_of([&] { run_trial(s, std::vector<std::string>{"nobody"}, Algorithm::Knn, {}, 1); }),
            ErrorCode::CowMissingSession);

  // Probes identical to the gallery.
  ProtocolSplit same{s.gallery, s.gallery};
  EXPECT_EQ(run_trial(same, eligible_cows(same), Algorithm::Knn, {}, 1), 1.0);
}

TEST(RunTrial, ZeroNoiseHerdIsPerfectForEveryClassifier) {
  NoiseModel zero{0, 0, 0, 1};
  const ProtocolSplit s = split_protocol(synthetic_dataset(20, zero, 2), Protocol::ConsecutiveDay);
  for (std::size_t i = 0; i < s.gallery.size(); ++i) {
    EXPECT_EQ(s.gallery[i].features.values, s.probes[i].features.values);
  }
  for (const Algorithm a : kAllAlgorithms) EXPECT_EQ(run_trial(s, eligible_cows(s), a, {}, 3), 1.0) << to_string(a);
}

TEST(AccuracyCurve, DeterminismAndTrivia) {
  NoiseModel noise;
  noise.center_sigma = 10;
  noise.box_sigma = 0.08;
  const ProtocolSplit s = split_protocol(synthetic_dataset(15, noise, 3), Protocol::ConsecutiveDay);
  CurveOptions opt;
  opt.trials = 12;
  const std::vector<int> ns = {1, 5, 15};
  const EvaluationReport a = accuracy_curve(s, Algorithm::Knn, ns, opt);
  const EvaluationReport b = accuracy_curve(s, Algorithm::Knn, ns, opt);
  EXPECT_EQ(report_csv(a), report_csv(b));
  EXPECT_EQ(a.entries[0].mean_accuracy, 1.0);
  EXPECT_EQ(a.entries[0].std_accuracy, 0.0);
  EXPECT_EQ(a.entries[2].std_accuracy, 0.0);  // n = herd size: a single possible subset
  for (const auto& e : a.entries) {
    EXPECT_GE(e.mean_accuracy, 0.0);
    EXPECT_LE(e.mean_accuracy, 1.0);
    EXPECT_EQ(e.trials, 12);
  }

  opt.threads = 4;
  EXPECT_EQ(report_csv(accuracy_curve(s, Algorithm::Knn, ns, opt)), report_csv(a));
  const CurveOptions twelve = opt;
  opt.threads = 1;
  opt.master_seed = 43;
  EXPECT_NE(trial_accuracies(s, Algorithm::Knn, 5, opt), trial_accuracies(s, Algorithm::Knn, 5, twelve));

  EXPECT_EQ(code_of([&] { accuracy_curve(s, Algorithm::Knn, std::vector<int>{16}, opt); }), ErrorCode::GroupSizeTooLarge);
}

TEST(AccuracyCurve, FullHerdTrialsAgreeForDeterministicClassifiers) {
  NoiseModel noise;
  noise.center_sigma = 8;
  const ProtocolSplit s = split_protocol(synthetic_dataset(12, noise, 4), Protocol::ConsecutiveDay);
  CurveOptions opt;
  opt.trials = 2;
  for (const Algorithm a : {Algorithm::Knn, Algorithm::LogReg, Algorithm::Tree}) {
    const auto acc = trial_accuracies(s, a, 12, opt);
    EXPECT_EQ(acc[0], acc[1]) << to_string(a);
  }
}

TEST(AccuracyCurve, LargerGroupsAreNotEasier) {
  NoiseModel noise;
  noise.center_sigma = 6;
  noise.box_sigma = 0.05;
  noise.scale_sigma = 0.05;
  const ProtocolSplit s = split_protocol(synthetic_dataset(45, noise, 5), Protocol::ConsecutiveDay);
  CurveOptions opt;
  const EvaluationReport r = accuracy_curve(s, Algorithm::Knn, std::vector<int>{5, 40}, opt);
  EXPECT_LE(r.entries[1].mean_accuracy, r.entries[0].mean_accuracy + 0.02);
}

TEST(GalleryProbeDisjointness, ProbesNeverTrainTheModel) {
  // Swapping the probe features for garbage must not change the fitted model,
  // so accuracy only moves through prediction.
  NoiseModel noise;
  noise.center_sigma = 5;
  const ProtocolSplit s = split_protocol(synthetic_dataset(10, noise, 6), Protocol::ConsecutiveDay);
  ProtocolSplit corrupted = s;
  for (auto& p : corrupted.probes) p.features.values.setConstant(1e6);
  const auto cows = eligible_cows(s);
  const std::vector<LabeledVector> gallery = s.gallery;
  const TrainedModel m = fit(Algorithm::LogReg, gallery, {}, derive_seed(99, 1));
  std::size_t hits = 0;
  for (const auto& p : corrupted.probes) hits += m.predict(p.features) == p.cow_id;
  EXPECT_EQ(run_trial(corrupted, cows, Algorithm::LogReg, {}, 99), static_cast<double>(hits) / corrupted.probes.size());
}

TEST(ReportCsv, ExportImport) {
  const fs::path dir = fs::temp_directory_path() / "udderid_test_eval";
  fs::create_directories(dir);

  export_report({}, dir / "empty.csv");
  std::ifstream in(dir / "empty.csv");
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(all, "algorithm,layout,n,trials,mean_accuracy,std_accuracy,seed\n");

  EvaluationReport r;
  r.entries.push_back({Algorithm::Svm, FeatureLayout::Combined89, 20, 50, 0.6125, 0.0831234, 42});
  export_report(r, dir / "one.csv");
  EXPECT_EQ(report_csv(r), "algorithm,layout,n,trials,mean_accuracy,std_accuracy,seed\n"
                           "svm,combined-89,20,50,0.612500,0.083123,42\n");
  const EvaluationReport back = import_report(dir / "one.csv");
  ASSERT_EQ(back.entries.size(), 1u);
  EXPECT_EQ(back.entries[0].algorithm, Algorithm::Svm);
  EXPECT_EQ(back.entries[0].layout, FeatureLayout::Combined89);
  EXPECT_EQ(back.entries[0].n, 20);
  EXPECT_EQ(back.entries[0].seed, 42u);
  EXPECT_NEAR(back.entries[0].mean_accuracy, 0.6125, 5e-7);
  EXPECT_NEAR(back.entries[0].std_accuracy, 0.0831234, 5e-7);
  EXPECT_EQ(report_csv(back), report_csv(r));

  EXPECT_THROW(export_report(r, dir / "missing" / "x.csv"), Error);
}

}  // namespace
