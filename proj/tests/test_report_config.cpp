#include <gtest/gtest.h>

#include "converse/config.hpp"
#include "converse/error.hpp"
#include "converse/fingerprint.hpp"
#include "converse/report.hpp"

using namespace converse;

namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

ThreadPrediction sample_prediction() {
  ThreadPrediction p;
  p.thread_id = "th,1";  // needs quoting
  p.tweet_ids = {"a", "b"};
  p.depths = {0, 1};
  p.gold_stances = {Stance::support, std::nullopt};
  p.stances = {Stance::support, Stance::deny};
  p.stance_probs = {{0.7, 0.1, 0.1, 0.1}, {0.2, 0.5, 0.2, 0.1}};
  p.gold_veracity = Veracity::false_rumor;
  p.veracity = Veracity::false_rumor;
  p.veracity_probs = {0.2, 0.7, 0.1};
  p.dims_won = {3, 5};
  return p;
}

}  // namespace

TEST(Csv, HeadersAndHeaderOnlyWhenEmpty) {
  const std::vector<ThreadPrediction> none;
  EXPECT_EQ(stance_predictions_csv(none),
            "thread_id,tweet_id,depth,gold,pred,p_support,p_deny,p_query,p_comment\n");
  EXPECT_EQ(veracity_predictions_csv(none), "thread_id,gold,pred,p_true,p_false,p_unverified\n");
  EXPECT_EQ(attribution_csv(none), "thread_id,tweet_id,dims_won\n");
  EXPECT_EQ(stance_table_csv(std::vector<StanceTableRow>{}), "method,macro_f1,f_s,f_d,f_q,f_c,acc\n");
  EXPECT_EQ(veracity_table_csv(std::vector<VeracityTableRow>{}), "method,dataset,macro_f1,acc\n");
  EXPECT_EQ(depth_table_csv(std::vector<NamedDepthReport>{}), "method,depth,tweets,macro_f1\n");
  EXPECT_EQ(sweep_csv({}), "lambda,macro_f1,f_false,f_unverified,acc\n");
  EXPECT_EQ(stance_over_time_csv(std::vector<StanceTimeRow>{}),
            "veracity,bucket,tweets,support,deny,query,comment\n");
}

TEST(Csv, PredictionRows) {
  const std::vector<ThreadPrediction> preds{sample_prediction()};
  const std::string stance = stance_predictions_csv(preds);
  EXPECT_EQ(std::count(stance.begin(), stance.end(), '\n'), 3);
  EXPECT_NE(stance.find("\"th,1\",a,0,support,support"), std::string::npos);
  EXPECT_NE(stance.find("\"th,1\",b,1,,deny"), std::string::npos);
  EXPECT_NE(veracity_predictions_csv(preds).find("\"th,1\",false,false"), std::string::npos);
  EXPECT_NE(attribution_csv(preds).find("\"th,1\",b,5"), std::string::npos);
}

TEST(Csv, PublishedRowsAreLabelled) {
  for (const auto& r : published_stance_rows()) EXPECT_EQ(r.method.rfind("published: ", 0), 0u);
  for (const auto& r : published_veracity_rows()) EXPECT_EQ(r.method.rfind("published: ", 0), 0u);
  for (const auto& r : published_depth_rows()) EXPECT_EQ(r.method.rfind("published: ", 0), 0u);
  EXPECT_FALSE(published_veracity_rows().empty());
}

TEST(Svg, DeterministicAndWellFormed) {
  SweepCurve curve;
  curve.points = {{0.0, 0.4, 0.3, 0.2, 0.5}, {1.0, 0.6, 0.5, 0.4, 0.7}};
  const std::string a = sweep_svg(curve);
  EXPECT_EQ(a, sweep_svg(curve));
  EXPECT_EQ(a.rfind("<svg", 0), 0u);
  EXPECT_NE(a.find("</svg>"), std::string::npos);

  const std::vector<StanceTimeRow> rows{{Veracity::false_rumor, 0, 3, {0.2, 0.5, 0.1, 0.2}},
                                        {Veracity::false_rumor, 1, 4, {0.1, 0.7, 0.1, 0.1}}};
  EXPECT_EQ(stance_over_time_svg(rows), stance_over_time_svg(rows));
  const std::vector<NamedDepthReport> depth = published_depth_rows();
  EXPECT_EQ(depth_buckets_svg(depth), depth_buckets_svg(depth));
  EXPECT_NE(attribution_svg(sample_prediction()).find("</svg>"), std::string::npos);
  EXPECT_EQ(sweep_svg({}).rfind("<svg", 0), 0u);
}

TEST(Files, WriteAndReadBack) {
  const std::string path = ::testing::TempDir() + "report.txt";
  write_text_file(path, "x,y\n1,2\n");
  EXPECT_EQ(read_text_file(path), "x,y\n1,2\n");
  EXPECT_THROW(read_text_file("/nonexistent/nothing.txt"), IoError);
  EXPECT_THROW(write_text_file(path + "/under-a-file.txt", "x"), IoError);
}

TEST(Config, Profiles) {
  EXPECT_EQ(profile_config("semeval").train.learning_rate, 0.001);
  EXPECT_EQ(profile_config("pheme").train.learning_rate, 0.005);
  const RunConfig desk = profile_config("desk");
  EXPECT_EQ(desk.model.content.content_dim, 32u);
  EXPECT_EQ(desk.train.dropout, 0.0);
  EXPECT_THROW(profile_config("laptop"), ConfigError);
}

TEST(Config, ParseOverridesAndRoundTrip) {
  const RunConfig c = parse_run_config(
      "[train]\nlambda = 0.5\nmode = single-task\n"
      "[gcn]\nlayer_sizes = 64, 4\nvariant = original\n"
      "[veracity]\nrnn = cnn\ncnn_windows = 2,3\n");
  EXPECT_EQ(c.train.lambda, 0.5);
  EXPECT_EQ(c.train.mode, TrainMode::single_task_veracity);
  EXPECT_EQ(c.model.gcn.layer_sizes, (std::vector<std::size_t>{64, 4}));
  EXPECT_EQ(c.model.gcn.variant, AdjacencyVariant::original);
  EXPECT_EQ(c.model.veracity.rnn, RnnVariant::cnn);
  EXPECT_EQ(c.model.veracity.cnn_windows, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(c.train.batch_size, TrainConfig{}.batch_size);

  const std::string ini = run_config_to_ini(c);
  EXPECT_EQ(run_config_to_ini(parse_run_config(ini)), ini);
  const RunConfig desk = profile_config("desk");
  EXPECT_EQ(run_config_to_ini(parse_run_config(run_config_to_ini(desk))), run_config_to_ini(desk));
}

TEST(Config, ShippedFilesMatchProfiles) {
  for (const std::string name : {"semeval", "pheme", "desk"}) {
    const RunConfig loaded = load_run_config(std::string(CONVERSE_CONFIG_DIR) + "/" + name + ".ini");
    EXPECT_EQ(run_config_to_ini(loaded), run_config_to_ini(profile_config(name))) << name;
  }
}

TEST(Config, RejectsUnknownAndMalformed) {
  EXPECT_THROW(parse_run_config("[train]\nlamda = 1\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[optimizer]\nlr = 1\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[train]\nlambda = lots\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[train]\nmode = both\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[gcn]\nlayer_sizes = 64, 3\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[train\n"), ConfigError);
  EXPECT_THROW(load_run_config("/nonexistent.ini"), Error);
}

TEST(Fingerprint, Sha256) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Fingerprint, CorpusHashFollowsContent) {
  SyntheticSpec spec = default_synthetic_spec();
  Corpus a = generate_synthetic(spec);
  Corpus b = generate_synthetic(spec);
  b.name = "renamed";
  EXPECT_EQ(corpus_fingerprint(a), corpus_fingerprint(b));
  b.threads[0].tweets[0].text += " x";
  EXPECT_NE(corpus_fingerprint(a), corpus_fingerprint(b));
  EXPECT_EQ(first_line(corpus_fingerprint(a)).size(), 64u);
}
