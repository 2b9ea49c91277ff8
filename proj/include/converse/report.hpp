#pragma once

// Tables, prediction exports and SVG plots.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "converse/evaluation.hpp"

namespace converse {

// thread_id,tweet_id,depth,gold,pred,p_support,p_deny,p_query,p_comment
std::string stance_predictions_csv(std::span<const ThreadPrediction> predictions);
// thread_id,gold,pred,p_true,p_false,p_unverified
std::string veracity_predictions_csv(std::span<const ThreadPrediction> predictions);
// thread_id,tweet_id,dims_won
std::string attribution_csv(std::span<const ThreadPrediction> predictions);

struct StanceTableRow {
  std::string method;
  double macro_f1 = 0.0;
  std::array<double, kStanceClasses> f1{};
  double accuracy = 0.0;
};
StanceTableRow stance_row(std::string method, const MetricSummary& s);
// method,macro_f1,f_s,f_d,f_q,f_c,acc
std::string stance_table_csv(std::span<const StanceTableRow> rows);

struct VeracityTableRow {
  std::string method;
  std::string dataset;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
};
// method,dataset,macro_f1,acc
std::string veracity_table_csv(std::span<const VeracityTableRow> rows);

struct NamedDepthReport {
  std::string method;
  DepthBucketReport report;
};
// method,depth,tweets,macro_f1
std::string depth_table_csv(std::span<const NamedDepthReport> rows);
// lambda,macro_f1,f_false,f_unverified,acc
std::string sweep_csv(const SweepCurve& curve);
// veracity,bucket,tweets,support,deny,query,comment
std::string stance_over_time_csv(std::span<const StanceTimeRow> rows);

// Published reference values, labelled "published: ..." in the method column.
std::vector<StanceTableRow> published_stance_rows();
std::vector<VeracityTableRow> published_veracity_rows();
std::vector<NamedDepthReport> published_depth_rows();

// Deterministic SVG renderings.
std::string stance_over_time_svg(std::span<const StanceTimeRow> rows);
std::string depth_buckets_svg(std::span<const NamedDepthReport> rows);
std::string sweep_svg(const SweepCurve& curve);
// One thread: a row of tweets in chronological order shaded by dims won.
std::string attribution_svg(const ThreadPrediction& prediction);

// Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace converse
